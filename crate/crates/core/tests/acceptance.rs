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


//! Acceptance checks: prints one `criterion N: pass|fail` line per
//! criterion and exits non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{corpus_programs, load, load_mutant, mutant_programs, random_type, script, Gen};
use sessinfer::cli::initial_environments;
use sessinfer::infer::signature::pretty;
use sessinfer::infer::{infer_program, parse_signature};
use sessinfer::oracle::{check, check_exhaustive, elaborate, protocols_up_to, SessionEnv, Sorting};
use sessinfer::runtime::{run, Outcome, RunOptions};
use sessinfer::surface::{parse, parse_type, Program};
use sessinfer::types::{comp, dual, unfold, AlgebraError, SessionType, ValueType};

type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Check {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

/// Reference signatures of the worked examples.
const FIXTURES: &[(&str, &str, &str)] = &[
    ("calc", "server", "(Recv Int (Recv Int (Offer (Send Int a) (Send Bool a))), a)"),
    ("calc", "calc", "(Bot, End)"),
    ("fig6", "two", "Session (ss :> Send String u1 :> Send Bool u2) (ss :> u1 :> u2) ()"),
    ("fig6", "main", "Session (ss) (ss :> End :> End) ()"),
    (
        "smtp",
        "sendMail",
        "EndedTail ss => Session \
         (ss :> Recv R2yz (Send EHLO (Recv R2yz (Rec Z (SelectN \
            (Send MAIL (Recv R2yz (Rec (S Z) (SelectN \
              (Send RCPT (OfferN (Recv R2yz (Var (S Z))) (Recv R5yz (Send QUIT Close)))) \
              (Send DATA (Recv R354 (Send MailBody (Recv R2yz (Var Z))))))))) \
            (Send QUIT Close))))) \
         :> Recv String (Recv String (Select (Recv [String] Close) (Send [String] Close)))) \
         (ss :> End :> End) ()",
    ),
];

fn reference_fixtures() -> Check {
    for (program, session, expected) in FIXTURES {
        let start = Instant::now();
        let inf = infer_program(&load(program)).map_err(|e| format!("{program}: {e}"))?;
        let sig = inf.get(session).ok_or_else(|| format!("{program}: no session {session}"))?;
        let want = parse_signature(expected).map_err(|e| e.to_string())?;
        let got = pretty(sig);
        ensure(got == want, || format!("{program}.{session}: expected {want}, inferred {got}"))?;
        within(Duration::from_secs(1), start, program)?;
    }
    Ok(())
}

fn run_seed(name: &str, prog: &Program, seed: u64) -> Result<sessinfer::runtime::RunResult, String> {
    let opts = RunOptions { seed, script: script(name), ..Default::default() };
    run(prog, &opts).map_err(|e| format!("{name}: {e}"))
}

fn execution_fixtures() -> Check {
    let start = Instant::now();
    let calc = load("calc");
    for seed in 0..10 {
        let r = run_seed("calc", &calc, seed)?;
        ensure(r.log.prints() == ["Lesser"], || format!("calc seed {seed}: {:?}", r.log.prints()))?;
    }
    within(Duration::from_secs(1), start, "calc")?;

    let start = Instant::now();
    let r = run_seed("pq", &load("pq"), 0)?;
    ensure(r.log.prints() == ["Hello"], || format!("pq: {:?}", r.log.prints()))?;
    within(Duration::from_secs(1), start, "pq")?;

    let start = Instant::now();
    let smtp = load("smtp");
    let transcript = ["EHLO(", "MAIL(", "RCPT(", "DATA", "MailBody(", "QUIT"];
    for seed in 0..10 {
        let first = run_seed("smtp", &smtp, seed)?;
        let again = run_seed("smtp", &smtp, seed)?;
        ensure(first.outcome == Outcome::Finished, || format!("smtp seed {seed}: {:?}", first.outcome))?;
        ensure(first.log == again.log, || format!("smtp seed {seed} is not reproducible"))?;
        let prints = first.log.prints();
        ensure(
            prints.len() == transcript.len() && prints.iter().zip(transcript).all(|(p, t)| p.starts_with(t)),
            || format!("smtp seed {seed}: transcript {prints:?}"),
        )?;
    }
    within(Duration::from_secs(1), start, "smtp")
}

fn type_safety() -> Check {
    let start = Instant::now();
    let names = corpus_programs();
    ensure(names.len() >= 30, || format!("only {} programs", names.len()))?;
    for name in &names {
        let prog = load(name);
        for seed in 0..200 {
            let opts = RunOptions { seed, script: script(name), budget: 10_000, ..Default::default() };
            let r = run(&prog, &opts).map_err(|e| format!("{name}: {e}"))?;
            if let Outcome::Error(report) = r.outcome {
                return Err(format!("{name} seed {seed}: error configuration {report:?}"));
            }
        }
    }
    within(Duration::from_secs(60), start, "type safety")
}

fn negative_suite() -> Check {
    let names = mutant_programs();
    ensure(names.len() >= 30, || format!("only {} mutants", names.len()))?;
    for name in &names {
        let prog = load_mutant(name);
        ensure(infer_program(&prog).is_err(), || format!("{name} is inferred well typed"))?;
        let base = name.split('_').next().unwrap();
        let reached = (0..20).any(|seed| {
            let opts = RunOptions { seed, script: script(base), unchecked: true, ..Default::default() };
            matches!(run(&prog, &opts).map(|r| r.outcome), Ok(Outcome::Error(_)))
        });
        ensure(reached, || format!("{name}: no error configuration in seeds 0..19"))?;
    }
    Ok(())
}

fn algebra() -> Check {
    let start = Instant::now();
    let g = Gen { depth: 6, recursive: true, close: true };
    for seed in 0..1000 {
        let u = random_type(seed, g);
        let d = dual(&u).map_err(|e| format!("{u}: {e}"))?;
        ensure(dual(&d).as_ref() == Ok(&u), || format!("dual is not an involution on {u}"))?;
        let expected = if u == SessionType::End { SessionType::End } else { SessionType::Bot };
        ensure(comp(&u, &d) == Ok(expected), || format!("{u} does not compose with its dual"))?;
    }
    ensure(matches!(dual(&SessionType::Bot), Err(AlgebraError::DualUndefined(_))), || "dual(Bot) is defined".into())?;
    let (a, b) = (parse_type("Send Int End").unwrap(), parse_type("Send Int End").unwrap());
    ensure(matches!(comp(&a, &b), Err(AlgebraError::CompUndefined(..))), || "Send ⊕ Send is defined".into())?;
    ensure(
        matches!(comp(&SessionType::Close, &SessionType::End), Err(AlgebraError::CompUndefined(..))),
        || "Close ⊕ End is defined".into(),
    )?;
    within(Duration::from_secs(5), start, "algebra")
}

fn oracle_agreement() -> Check {
    let start = Instant::now();
    let universe = protocols_up_to(2, &[ValueType::Int, ValueType::Bool, ValueType::Str]);
    let mut programs: Vec<(String, Program, bool)> =
        corpus_programs().into_iter().map(|n| (n.clone(), load(&n), true)).collect();
    programs.extend(mutant_programs().into_iter().map(|n| (n.clone(), load_mutant(&n), false)));
    let mut fragment = 0;
    for (name, prog, well_typed) in &programs {
        let entry = prog.entry().ok_or_else(|| format!("{name}: no entry"))?.name.clone();
        let Ok(process) = elaborate(prog, &entry) else { continue };
        if *well_typed {
            fragment += 1;
        }
        let inferred = infer_program(prog).is_ok();
        let (gamma, delta): (Sorting, SessionEnv) = initial_environments(prog, &entry).unwrap_or_default();
        let derivable = check(prog, &gamma, &process, &delta).is_ok();
        ensure(inferred == derivable, || format!("{name}: inference {inferred}, oracle {derivable}"))?;
        if process.parallel_width() <= 3 {
            let brute = check_exhaustive(prog, &gamma, &process, &delta, universe.clone()).is_ok();
            ensure(brute == derivable, || format!("{name}: split search {derivable}, enumeration {brute}"))?;
        }
        if !inferred {
            continue;
        }
        for sig in &infer_program(prog).unwrap().signatures {
            let Ok(p) = elaborate(prog, &sig.name) else { continue };
            if !sig.post.entries.iter().all(|u| sessinfer::infer::ground(u) == SessionType::End) {
                continue;
            }
            let (gamma, delta) = initial_environments(prog, &sig.name)?;
            check(prog, &gamma, &p, &delta).map_err(|f| format!("{name}.{}: {f}", sig.name))?;
        }
    }
    ensure(fragment >= 15, || format!("sub-corpus has only {fragment} programs"))?;
    within(Duration::from_secs(30), start, "oracle agreement")
}

/// `u` unfolded `n` times along its continuation, finished with `End`.
fn unrolled(u: &SessionType, n: usize) -> SessionType {
    if n == 0 {
        return SessionType::End;
    }
    match unfold(u) {
        Ok(SessionType::Throw(a, k)) => SessionType::Throw(a, Box::new(unrolled(&k, n - 1))),
        Ok(SessionType::Catch(a, k)) => SessionType::Catch(a, Box::new(unrolled(&k, n - 1))),
        other => panic!("unexpected unfolding {other:?}"),
    }
}

const UNROLLED_LOOP: &str = r#"
session loop2(c) {
  d <- new; throw c d; send d "Hello";
  e <- new; throw c e; send e "Hello"
}
"#;

fn recursion() -> Check {
    let prog = load("loop");
    let inf = infer_program(&prog).map_err(|e| e.to_string())?;
    let sig = inf.get("loop").ok_or("no session loop")?;
    let at_c = &sig.pre.entries[0];
    ensure(matches!(at_c, SessionType::Rec(..)), || format!("loop's c is not Rec-rooted: {at_c}"))?;
    let fixture = parse_type("Rec Z (Throw (Recv String End) (Var Z))").unwrap();
    ensure(*at_c == fixture, || format!("loop's c is {at_c}"))?;

    // Two unfoldings of the inferred type are derivable for the unrolled
    // body, and the thrown endpoint's share is the receiving one.
    let unrolled_prog = parse(UNROLLED_LOOP).unwrap();
    let process = elaborate(&unrolled_prog, "loop2").map_err(|e| e.to_string())?;
    let delta = BTreeMap::from([("c".to_string(), unrolled(at_c, 2))]);
    check(&unrolled_prog, &Sorting::new(), &process, &delta).map_err(|f| f.to_string())?;
    let sending = parse_type("Throw (Send String End) (Throw (Send String End) End)").unwrap();
    let wrong = BTreeMap::from([("c".to_string(), sending)]);
    ensure(check(&unrolled_prog, &Sorting::new(), &process, &wrong).is_err(), || {
        "the oracle also derives a sending share for the thrown endpoint".into()
    })?;

    let opts = RunOptions { budget: 10_000, ..Default::default() };
    let r = run(&prog, &opts).map_err(|e| e.to_string())?;
    ensure(r.outcome == Outcome::BudgetExhausted, || format!("loop ended with {:?}", r.outcome))?;
    ensure(r.steps == 10_000, || format!("loop ran {} steps", r.steps))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Check); 7] = [
        (1, reference_fixtures),
        (2, execution_fixtures),
        (3, type_safety),
        (4, negative_suite),
        (5, algebra),
        (6, oracle_agreement),
        (7, recursion),
    ];
    let mut failed = false;
    for (n, criterion) in criteria {
        match criterion() {
            Ok(()) => println!("criterion {n}: pass"),
            Err(why) => {
                failed = true;
                println!("criterion {n}: fail ({why})");
            }
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
