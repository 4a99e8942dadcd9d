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


//! The command-line interface. [`execute`] runs one invocation and returns
//! its exit status:
//!
//! | status | meaning                                   |
//! |--------|-------------------------------------------|
//! | 0      | success                                   |
//! | 1      | type error (or no derivation)             |
//! | 2      | inferred signature differs from expected  |
//! | 3      | usage, I/O or syntax error                |
//! | 4      | a run reached an error configuration      |
//! | 5      | a run deadlocked or ran out of budget     |
//! | 6      | a run faulted                             |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::infer::signature::{pretty, structured, Expectation};
use crate::infer::{ground, infer_program, ParamSig};
use crate::oracle::{self, SessionEnv, Sorting};
use crate::runtime::{self, Outcome, RunError, RunOptions, DEFAULT_BUDGET};
use crate::surface::{self, Program};
use crate::types::dual;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_ERROR_REPORT: i32 = 4;
pub const EXIT_STUCK: i32 = 5;
pub const EXIT_FAULT: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "sessinfer", version, about = "Session-type inference for a small pi-calculus protocol language")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Pretty,
    Structured,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Infer and print the signature of every session.
    Infer {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
        /// Compare against a file of `name :: signature` lines.
        #[arg(long, alias = "expect-type")]
        expect: Option<PathBuf>,
    },
    /// Derive a typing for a session with the declarative rules.
    Check {
        file: PathBuf,
        /// Session to check; defaults to the entry session.
        #[arg(long)]
        session: Option<String>,
        /// Print the derivation tree.
        #[arg(long)]
        trace: bool,
    },
    /// Run the entry session.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lines returned by successive `readline` actions.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Run without type checking first.
        #[arg(long)]
        unchecked: bool,
        #[arg(long, alias = "step-budget", default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Print every fired step to standard error.
        #[arg(long)]
        trace: bool,
    },
    /// Print the dual of a session type.
    Dual { ty: String },
    /// Print the process term a session elaborates to.
    Elaborate {
        file: PathBuf,
        #[arg(long)]
        session: Option<String>,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

macro_rules! say {
    ($w:expr, $($t:tt)*) => {{
        let _ = writeln!($w, $($t)*);
    }};
}

/// Runs one invocation; `args` includes the program name.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut io = Io { out, err };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if help {
                say!(io.out, "{}", e.render());
                return EXIT_OK;
            }
            say!(io.err, "{}", e.render());
            return EXIT_INPUT;
        }
    };
    match cli.command {
        Command::Infer { file, format, expect } => cmd_infer(&mut io, &file, format, expect.as_deref()),
        Command::Check { file, session, trace } => cmd_check(&mut io, &file, session.as_deref(), trace),
        Command::Run { file, seed, script, unchecked, budget, trace } => {
            cmd_run(&mut io, &file, seed, script.as_deref(), unchecked, budget, trace)
        }
        Command::Dual { ty } => cmd_dual(&mut io, &ty),
        Command::Elaborate { file, session } => cmd_elaborate(&mut io, &file, session.as_deref()),
    }
}

fn read(io: &mut Io, path: &Path) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| {
        say!(io.err, "{}: {e}", path.display());
        EXIT_INPUT
    })
}

fn load(io: &mut Io, path: &Path) -> Result<Program, i32> {
    let text = read(io, path)?;
    surface::parse(&text).map_err(|e| {
        say!(io.err, "{}:{e}", path.display());
        EXIT_INPUT
    })
}

fn cmd_infer(io: &mut Io, file: &Path, format: Format, expect: Option<&Path>) -> i32 {
    let prog = match load(io, file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let expectations = match expect {
        None => None,
        Some(path) => {
            let text = match read(io, path) {
                Ok(t) => t,
                Err(code) => return code,
            };
            match Expectation::parse_file(&text) {
                Ok(e) => Some(e),
                Err(e) => {
                    say!(io.err, "{}:{e}", path.display());
                    return EXIT_INPUT;
                }
            }
        }
    };
    let inference = match infer_program(&prog) {
        Ok(i) => i,
        Err(e) => {
            say!(io.err, "{}:{e}", file.display());
            return EXIT_TYPE;
        }
    };
    match format {
        Format::Pretty => {
            for s in &inference.signatures {
                say!(io.out, "{} :: {}", s.name, pretty(s));
            }
        }
        Format::Structured => {
            let doc = serde_json::to_string_pretty(&structured(&inference.signatures)).expect("serializable");
            say!(io.out, "{doc}");
        }
    }
    let Some(expectations) = expectations else { return EXIT_OK };
    let mut code = EXIT_OK;
    for e in &expectations {
        match inference.get(&e.name) {
            None => {
                say!(io.err, "line {}: no session `{}`", e.line, e.name);
                code = EXIT_MISMATCH;
            }
            Some(sig) if !e.matches(sig) => {
                say!(io.err, "line {}: `{}` expected {}\n  inferred {}", e.line, e.name, e.expected(), pretty(sig));
                code = EXIT_MISMATCH;
            }
            Some(_) => {}
        }
    }
    code
}

/// The environments a session is checked under: its parameters with their
/// inferred (grounded) entry types.
pub fn initial_environments(prog: &Program, session: &str) -> Result<(Sorting, SessionEnv), String> {
    let inference = infer_program(prog).map_err(|e| e.to_string())?;
    let sig = inference.get(session).ok_or_else(|| format!("no session `{session}`"))?;
    let (mut gamma, mut delta) = (Sorting::new(), SessionEnv::new());
    let mut chans = sig.pre.entries.iter();
    for p in &sig.params {
        match p {
            ParamSig::Chan { name, .. } => {
                let u = chans.next().ok_or("parameter rows disagree")?;
                delta.insert(name.clone(), ground(u));
            }
            ParamSig::Value { name, ty } => {
                gamma.insert(name.clone(), ty.clone());
            }
        }
    }
    Ok((gamma, delta))
}

fn target(io: &mut Io, prog: &Program, session: Option<&str>) -> Result<String, i32> {
    match session {
        Some(s) => Ok(s.to_string()),
        None => prog.entry().map(|d| d.name.clone()).ok_or_else(|| {
            say!(io.err, "no entry session");
            EXIT_INPUT
        }),
    }
}

fn cmd_check(io: &mut Io, file: &Path, session: Option<&str>, trace: bool) -> i32 {
    let prog = match load(io, file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let name = match target(io, &prog, session) {
        Ok(n) => n,
        Err(code) => return code,
    };
    let process = match oracle::elaborate(&prog, &name) {
        Ok(p) => p,
        Err(e) => {
            say!(io.err, "{}:{e}", file.display());
            return EXIT_TYPE;
        }
    };
    let (gamma, delta) = match initial_environments(&prog, &name) {
        Ok(envs) => envs,
        Err(_) if session.is_none() => (Sorting::new(), SessionEnv::new()),
        Err(e) => {
            say!(io.err, "{}: {e}", file.display());
            return EXIT_TYPE;
        }
    };
    match oracle::check(&prog, &gamma, &process, &delta) {
        Ok(d) => {
            say!(io.out, "{name}: derivable ({} rule applications)", d.size());
            if trace {
                let _ = write!(io.out, "{d}");
            }
            EXIT_OK
        }
        Err(f) => {
            say!(io.err, "{name}: no derivation: {f}");
            EXIT_TYPE
        }
    }
}

fn cmd_run(
    io: &mut Io,
    file: &Path,
    seed: u64,
    script: Option<&Path>,
    unchecked: bool,
    budget: usize,
    trace: bool,
) -> i32 {
    let prog = match load(io, file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let script = match script {
        None => Vec::new(),
        Some(path) => match read(io, path) {
            Ok(t) => t.lines().map(String::from).collect(),
            Err(code) => return code,
        },
    };
    let opts = RunOptions { seed, script, unchecked, budget, trace, ..Default::default() };
    let result = match runtime::run(&prog, &opts) {
        Ok(r) => r,
        Err(RunError::Fault(f)) => {
            say!(io.err, "{}: {f}", file.display());
            return EXIT_FAULT;
        }
        Err(e) => {
            say!(io.err, "{}:{e}", file.display());
            return EXIT_TYPE;
        }
    };
    for line in &result.trace {
        say!(io.err, "{line}");
    }
    let _ = write!(io.out, "{}", result.log.text());
    match result.outcome {
        Outcome::Finished => EXIT_OK,
        Outcome::Error(r) => {
            say!(io.err, "error configuration at step {} on `{}`: {}", r.step, r.channel, r.engaged.join(", "));
            EXIT_ERROR_REPORT
        }
        Outcome::Deadlock(d) => {
            say!(io.err, "deadlock at step {}: {}", d.step, d.blocked.join(", "));
            EXIT_STUCK
        }
        Outcome::BudgetExhausted => {
            say!(io.err, "step budget of {budget} exhausted");
            EXIT_STUCK
        }
    }
}

fn cmd_dual(io: &mut Io, text: &str) -> i32 {
    let u = match surface::parse_type(text) {
        Ok(u) => u,
        Err(e) => {
            say!(io.err, "{e}");
            return EXIT_INPUT;
        }
    };
    match dual(&u) {
        Ok(d) => {
            say!(io.out, "{d}");
            EXIT_OK
        }
        Err(e) => {
            say!(io.err, "{e}");
            EXIT_TYPE
        }
    }
}

fn cmd_elaborate(io: &mut Io, file: &Path, session: Option<&str>) -> i32 {
    let prog = match load(io, file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let name = match target(io, &prog, session) {
        Ok(n) => n,
        Err(code) => return code,
    };
    match oracle::elaborate(&prog, &name) {
        Ok(p) => {
            say!(io.out, "{p}");
            EXIT_OK
        }
        Err(e) => {
            say!(io.err, "{}:{e}", file.display());
            EXIT_TYPE
        }
    }
}
