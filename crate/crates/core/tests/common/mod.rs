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


//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sessinfer::surface::{parse, Program};
use sessinfer::types::{SessionType, ValueType};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Names (without extension) of the `.pi` files in a directory, sorted.
pub fn programs_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "pi").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

pub fn corpus_programs() -> Vec<String> {
    programs_in(&corpus_dir())
}

pub fn mutant_programs() -> Vec<String> {
    programs_in(&corpus_dir().join("mutants"))
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn load(name: &str) -> Program {
    parse(&read(&corpus_dir().join(format!("{name}.pi")))).unwrap()
}

pub fn load_mutant(name: &str) -> Program {
    parse(&read(&corpus_dir().join("mutants").join(format!("{name}.pi")))).unwrap()
}

/// Console input for a corpus program, if it has a script.
pub fn script(name: &str) -> Vec<String> {
    let path = corpus_dir().join(format!("{name}.script"));
    if path.exists() {
        read(&path).lines().map(String::from).collect()
    } else {
        Vec::new()
    }
}

/// Shape of randomly generated session types.
#[derive(Debug, Clone, Copy)]
pub struct Gen {
    pub depth: usize,
    /// Allow `Rec`/`Var`.
    pub recursive: bool,
    /// Allow `Close`.
    pub close: bool,
}

fn value(rng: &mut ChaCha8Rng) -> ValueType {
    match rng.gen_range(0..6) {
        0 => ValueType::Int,
        1 => ValueType::Bool,
        2 => ValueType::Str,
        3 => ValueType::Unit,
        4 => ValueType::List(Box::new(ValueType::Int)),
        _ => ValueType::Tagged("Msg".into()),
    }
}

fn session(rng: &mut ChaCha8Rng, g: Gen, depth: usize, binders: &mut Vec<u32>) -> SessionType {
    let leaf = |rng: &mut ChaCha8Rng, binders: &[u32]| {
        if !binders.is_empty() && rng.gen_bool(0.5) {
            SessionType::Var(binders[rng.gen_range(0..binders.len())])
        } else if g.close && rng.gen_bool(0.2) {
            SessionType::Close
        } else {
            SessionType::End
        }
    };
    if depth == 0 || rng.gen_bool(0.15) {
        return leaf(rng, binders);
    }
    let sub = |rng: &mut ChaCha8Rng, binders: &mut Vec<u32>| session(rng, g, depth - 1, binders);
    let choices = if g.recursive { 10 } else { 9 };
    match rng.gen_range(0..choices) {
        0 => SessionType::send(value(rng), sub(rng, binders)),
        1 => SessionType::recv(value(rng), sub(rng, binders)),
        2 => SessionType::select(sub(rng, binders), sub(rng, binders)),
        3 => SessionType::offer(sub(rng, binders), sub(rng, binders)),
        4 => SessionType::SelectN(Box::new(sub(rng, binders)), Box::new(sub(rng, binders))),
        5 => SessionType::OfferN(Box::new(sub(rng, binders)), Box::new(sub(rng, binders))),
        6 => SessionType::throw(sub(rng, binders), sub(rng, binders)),
        7 => SessionType::catch(sub(rng, binders), sub(rng, binders)),
        8 => leaf(rng, binders),
        _ => {
            let level = rng.gen_range(0..3);
            binders.push(level);
            let body = sub(rng, binders);
            binders.pop();
            SessionType::rec(level, body)
        }
    }
}

/// A closed, ground, `Bot`-free session type drawn from `seed`.
pub fn random_type(seed: u64, g: Gen) -> SessionType {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    session(&mut rng, g, g.depth, &mut Vec::new())
}

/// A `Rec`-rooted closed type drawn from `seed`.
pub fn random_rec_type(seed: u64, depth: usize) -> SessionType {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let level = rng.gen_range(0..3);
    let g = Gen { depth, recursive: true, close: false };
    let body = session(&mut rng, g, depth - 1, &mut vec![level]);
    SessionType::rec(level, body)
}
