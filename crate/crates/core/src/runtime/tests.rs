// Copyright 2026 The sessinfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


use super::*;
use crate::surface::parse;

fn corpus(name: &str) -> Program {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run_src(src: &str, opts: &RunOptions) -> RunResult {
    run(&parse(src).unwrap(), opts).unwrap()
}

#[test]
fn calculator_prints_lesser_under_every_seed() {
    let prog = corpus("calc.pi");
    for seed in 0..10 {
        let r = run(&prog, &RunOptions { seed, ..Default::default() }).unwrap();
        assert_eq!(r.outcome, Outcome::Finished);
        assert_eq!(r.log.text(), "PRINT Lesser\n");
    }
}

#[test]
fn delegation_prints_hello() {
    let r = run(&corpus("pq.pi"), &RunOptions::default()).unwrap();
    assert_eq!(r.outcome, Outcome::Finished);
    assert_eq!(r.log.prints(), ["Hello"]);
}

#[test]
fn two_senders_are_a_non_redex_pair() {
    let src = "session main() { c <- new; fork { send c 1 }; send c 2 }";
    for seed in 0..10 {
        let opts = RunOptions { seed, unchecked: true, ..Default::default() };
        let r = run_src(src, &opts);
        let Outcome::Error(report) = &r.outcome else { panic!("{:?}", r.outcome) };
        assert_eq!(report.class, ErrorClass::NonRedexPair);
        assert_eq!(r.log.text(), "ERROR NonRedexPair c\n");
    }
    assert!(matches!(run(&parse(src).unwrap(), &RunOptions::default()), Err(RunError::Type(_))));
}

#[test]
fn three_engagers_are_reported() {
    let src = "session main() { c <- new; fork { send c 1 }; fork { x <- recv c }; send c 2 }";
    let seen: Vec<_> = (0..20)
        .map(|seed| run_src(src, &RunOptions { seed, unchecked: true, ..Default::default() }).outcome)
        .collect();
    assert!(seen.iter().all(|o| matches!(o, Outcome::Error(_))));
    assert!(seen.iter().any(|o| matches!(o, Outcome::Error(r) if r.class == ErrorClass::ThreeOrMore)));
}

#[test]
fn send_and_receive_is_no_error() {
    let src = "session main() { c <- new; fork { x <- recv c; io print(x) }; send c 7 }";
    let r = run_src(src, &RunOptions::default());
    assert_eq!((r.outcome, r.log.text()), (Outcome::Finished, "PRINT 7\n".to_string()));
}

#[test]
fn cross_channel_wait_is_a_deadlock() {
    let src = "session main() { c <- new; d <- new; fork { x <- recv c; send d 1 }; y <- recv d; send c 2 }";
    let r = run_src(src, &RunOptions::default());
    let Outcome::Deadlock(d) = &r.outcome else { panic!("{:?}", r.outcome) };
    assert_eq!(d.blocked.len(), 2);
    assert_eq!(r.log.text(), "DEADLOCK\n");
}

#[test]
fn endless_recursion_exhausts_the_budget() {
    let r = run(&corpus("loop.pi"), &RunOptions { budget: 500, ..Default::default() }).unwrap();
    assert_eq!(r.outcome, Outcome::BudgetExhausted);
    assert!(r.log.prints().iter().all(|s| *s == "Hello"));
    assert!(r.log.prints().len() > 10);
    assert_eq!(r.log.entries.last().unwrap().1, Effect::Budget);
}

fn smtp_script() -> Vec<String> {
    ["alice@example.org", "bob@example.org", "Hello Bob"].map(String::from).to_vec()
}

#[test]
fn smtp_transcript_is_identical_per_seed() {
    let prog = corpus("smtp.pi");
    let mut transcripts = Vec::new();
    let mut first = String::new();
    for seed in 0..10 {
        let opts = RunOptions { seed, script: smtp_script(), ..Default::default() };
        let r = run(&prog, &opts).unwrap();
        assert_eq!(r.outcome, Outcome::Finished, "seed {seed}");
        assert_eq!(run(&prog, &opts).unwrap().log, r.log, "seed {seed} is reproducible");
        transcripts.push(r.log.prints().join("\n"));
        if seed == 0 {
            first = r.log.text();
        }
    }
    // The protocol fixes the order of the server's transcript.
    assert!(transcripts.windows(2).all(|w| w[0] == w[1]));
    for line in [
        "CONNECT smtp",
        "PRINT EHLO(\"mydomain\")",
        "PRINT MAIL(\"alice@example.org\")",
        "PRINT RCPT(\"bob@example.org\")",
        "PRINT DATA",
        "PRINT MailBody([\"Hello Bob\"])",
        "PRINT QUIT",
    ] {
        assert!(first.contains(line), "{line} missing from\n{first}");
    }
}

#[test]
fn script_exhaustion_is_a_fault() {
    let prog = corpus("smtp.pi");
    let err = run(&prog, &RunOptions { script: vec!["a@b".into()], ..Default::default() }).unwrap_err();
    assert!(matches!(err, RunError::Fault(RuntimeFault::ScriptExhausted)));
}

#[test]
fn connect_spawns_independent_servers() {
    let prog = corpus("smtp.pi");
    let opts = RunOptions::default();
    let mut soup = Soup::new(&prog, &opts);
    let a = soup.connect("smtp").unwrap();
    let b = soup.connect("smtp").unwrap();
    assert_ne!(a, b);
    assert_eq!(soup.live_processes(), 2);
    assert_eq!(soup.connect("nosuch"), Err(RuntimeFault::UnknownService("nosuch".into())));
    assert!(soup.detect_error().is_none());
}

#[test]
fn runs_are_deterministic_per_seed() {
    let src = "session main() { c <- new; d <- new; fork { send c 1; io print(\"a\") }; \
               fork { send d 2; io print(\"b\") }; x <- recv c; y <- recv d; io print(x + y) }";
    let prog = parse(src).unwrap();
    let texts: Vec<String> = (0..30)
        .map(|seed| run(&prog, &RunOptions { seed, ..Default::default() }).unwrap().log.text())
        .collect();
    for seed in 0..30 {
        let again = run(&prog, &RunOptions { seed, ..Default::default() }).unwrap().log.text();
        assert_eq!(again, texts[seed as usize]);
    }
    assert!(texts.iter().any(|t| t != &texts[0]), "different seeds interleave differently");
}
