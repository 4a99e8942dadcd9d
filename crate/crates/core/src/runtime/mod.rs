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


//! Execution by synchronous rendezvous under a seeded scheduler.
//!
//! The running program is a flat soup of sequential processes. At every
//! step the scheduler collects the enabled steps — local actions and
//! matching pairs of communications on one channel — and fires one chosen
//! uniformly by a seeded generator. After each step the error detector
//! looks for channels where the engaged processes cannot react.

mod soup;
pub mod value;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::infer::{check_runnable, check_service_server, infer_program, InferError};
use crate::surface::{walk_stmts, Program, StmtKind};

pub use soup::Soup;
pub use value::{ChanId, Value};

/// Default bound on scheduler steps.
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeFault {
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error("readline with an exhausted script")]
    ScriptExhausted,
    #[error("unknown service `{0}`")]
    UnknownService(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("the program has no entry session")]
    NoEntry,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Type(#[from] InferError),
    #[error("not runnable: {0}")]
    NotRunnable(String),
    #[error("runtime fault: {0}")]
    Fault(#[from] RuntimeFault),
}

/// Observable effects of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Effect {
    Print(String),
    Read(String),
    Connect(String),
    Error { class: ErrorClass, channel: String },
    Deadlock,
    Budget,
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effect::Print(s) => write!(f, "PRINT {s}"),
            Effect::Read(s) => write!(f, "READ {s}"),
            Effect::Connect(s) => write!(f, "CONNECT {s}"),
            Effect::Error { class, channel } => write!(f, "ERROR {class} {channel}"),
            Effect::Deadlock => f.write_str("DEADLOCK"),
            Effect::Budget => f.write_str("BUDGET"),
        }
    }
}

/// Effects with the step at which each happened.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EffectLog {
    pub entries: Vec<(usize, Effect)>,
}

impl EffectLog {
    pub fn push(&mut self, step: usize, e: Effect) {
        self.entries.push((step, e));
    }

    /// One line per effect, as stored in golden files.
    pub fn text(&self) -> String {
        self.entries.iter().map(|(_, e)| format!("{e}\n")).collect()
    }

    pub fn prints(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter_map(|(_, e)| match e {
                Effect::Print(s) => Some(s.as_str()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Exactly two processes engage a channel with actions that do not react.
    NonRedexPair,
    /// Three or more processes engage one channel.
    ThreeOrMore,
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorClass::NonRedexPair => "NonRedexPair",
            ErrorClass::ThreeOrMore => "ThreeOrMore",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorReport {
    pub channel: String,
    pub engaged: Vec<String>,
    pub class: ErrorClass,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadlockReport {
    pub blocked: Vec<String>,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Finished,
    Error(ErrorReport),
    Deadlock(DeadlockReport),
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    pub script: Vec<String>,
    /// Skip type checking before the run.
    pub unchecked: bool,
    pub budget: usize,
    pub trace: bool,
    /// Service name to server session; unlisted services use `<name>_server`.
    pub servers: BTreeMap<String, String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            script: Vec::new(),
            unchecked: false,
            budget: DEFAULT_BUDGET,
            trace: false,
            servers: BTreeMap::new(),
        }
    }
}

impl RunOptions {
    pub fn server_for(&self, service: &str) -> String {
        self.servers.get(service).cloned().unwrap_or_else(|| format!("{service}_server"))
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: Outcome,
    pub log: EffectLog,
    pub steps: usize,
    /// One line per fired step when tracing.
    pub trace: Vec<String>,
}

/// Type checks `prog` for a top-level run: the entry session takes no
/// parameters and finishes every channel, and every connected service has a
/// conforming server.
pub fn check_program(prog: &Program, opts: &RunOptions) -> Result<(), RunError> {
    let inference = infer_program(prog)?;
    let entry = prog.entry().ok_or(RuntimeFault::NoEntry)?;
    let sig = inference.get(&entry.name).expect("every session has a signature");
    check_runnable(sig).map_err(RunError::NotRunnable)?;
    let mut services = Vec::new();
    for d in &prog.sessions {
        walk_stmts(&d.body, &mut |s| {
            if let StmtKind::Connect(_, svc) = &s.kind {
                services.push(svc.clone());
            }
        });
    }
    for svc in services {
        let decl = prog.service(&svc).ok_or_else(|| RuntimeFault::UnknownService(svc.clone()))?;
        let server = opts.server_for(&svc);
        let sig = inference.get(&server).ok_or_else(|| RuntimeFault::UnknownService(svc.clone()))?;
        check_service_server(&decl.ty, sig).map_err(RunError::NotRunnable)?;
    }
    Ok(())
}

/// Runs the entry session of `prog` to completion, error, deadlock or
/// budget exhaustion.
pub fn run(prog: &Program, opts: &RunOptions) -> Result<RunResult, RunError> {
    if !opts.unchecked {
        check_program(prog, opts)?;
    }
    let entry = prog.entry().ok_or(RuntimeFault::NoEntry)?;
    let mut soup = Soup::new(prog, opts);
    soup.spawn_session(&entry.name, Vec::new())?;
    Ok(soup.run_to_end()?)
}

#[cfg(test)]
mod tests;
