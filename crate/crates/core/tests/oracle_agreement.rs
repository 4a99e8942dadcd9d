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


//! Inference agrees with the declarative checker on the first-order
//! fragment: a program is inferred well typed exactly when its entry
//! process has a derivation, and inferred signatures are derivable.

mod common;

use common::{corpus_programs, load, load_mutant, mutant_programs};
use sessinfer::cli::initial_environments;
use sessinfer::infer::{ground, infer_program};
use sessinfer::oracle::{check, check_exhaustive, elaborate, protocols_up_to, Sorting, SessionEnv};
use sessinfer::surface::Program;
use sessinfer::types::{SessionType, ValueType};

/// Programs whose entry session elaborates to a finite process.
fn fragment(programs: Vec<(String, Program)>) -> Vec<(String, Program)> {
    programs
        .into_iter()
        .filter(|(_, p)| p.entry().is_some_and(|e| elaborate(p, &e.name).is_ok()))
        .collect()
}

fn corpus() -> Vec<(String, Program)> {
    corpus_programs().into_iter().map(|n| (n.clone(), load(&n))).collect()
}

fn mutants() -> Vec<(String, Program)> {
    mutant_programs().into_iter().map(|n| (n.clone(), load_mutant(&n))).collect()
}

/// Whether the oracle derives the entry process of `prog`.
fn oracle_accepts(prog: &Program) -> bool {
    let entry = prog.entry().unwrap().name.clone();
    let p = elaborate(prog, &entry).unwrap();
    let (gamma, delta) = initial_environments(prog, &entry).unwrap_or_default();
    check(prog, &gamma, &p, &delta).is_ok()
}

#[test]
fn the_fragment_covers_most_of_the_corpus() {
    assert!(fragment(corpus()).len() >= 20);
    assert!(fragment(mutants()).len() >= 20);
}

#[test]
fn inference_and_oracle_agree_on_programs_and_mutants() {
    for (name, prog) in fragment(corpus()).into_iter().chain(fragment(mutants())) {
        let inferred = infer_program(&prog).is_ok();
        assert_eq!(inferred, oracle_accepts(&prog), "{name}: inference says {inferred}");
    }
}

#[test]
fn every_corpus_fragment_program_is_accepted_and_every_mutant_rejected() {
    for (name, prog) in fragment(corpus()) {
        assert!(oracle_accepts(&prog), "{name}");
    }
    for (name, prog) in fragment(mutants()) {
        assert!(!oracle_accepts(&prog), "{name}");
    }
}

/// Sessions whose inferred post-row is finished once unknowns are grounded.
fn completed_sessions(prog: &Program) -> Vec<String> {
    let inf = infer_program(prog).unwrap();
    inf.signatures
        .iter()
        .filter(|s| s.post.entries.iter().all(|u| ground(u) == SessionType::End))
        .map(|s| s.name.clone())
        .collect()
}

#[test]
fn inferred_signatures_are_derivable() {
    let mut checked = 0;
    for (name, prog) in corpus() {
        for session in completed_sessions(&prog) {
            let Ok(p) = elaborate(&prog, &session) else { continue };
            let (gamma, delta) = initial_environments(&prog, &session).unwrap();
            if let Err(f) = check(&prog, &gamma, &p, &delta) {
                panic!("{name}.{session} with {delta:?}: {f}");
            }
            checked += 1;
        }
    }
    assert!(checked >= 40, "only {checked} sessions checked");
}

#[test]
fn pruned_and_exhaustive_split_search_agree() {
    let universe = protocols_up_to(2, &[ValueType::Int, ValueType::Bool, ValueType::Str]);
    let mut compared = 0;
    for (name, prog) in fragment(corpus()).into_iter().chain(fragment(mutants())) {
        let entry = prog.entry().unwrap().name.clone();
        let p = elaborate(&prog, &entry).unwrap();
        if p.parallel_width() > 3 {
            continue;
        }
        let (gamma, delta): (Sorting, SessionEnv) = initial_environments(&prog, &entry).unwrap_or_default();
        let pruned = check(&prog, &gamma, &p, &delta).is_ok();
        let exhaustive = check_exhaustive(&prog, &gamma, &p, &delta, universe.clone()).is_ok();
        assert_eq!(pruned, exhaustive, "{name}");
        compared += 1;
    }
    assert!(compared >= 20, "only {compared} programs compared");
}
