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


//! A declarative checker for the π-calculus core, independent of the
//! inference engine, and the elaboration of sessions into process terms.

mod check;
mod elaborate;
mod synth;

use std::fmt;

use crate::surface::printer::{expr_text, pattern_text};
use crate::surface::{Expr, IoAction, Pattern};

pub use check::{check, check_exhaustive, check_expr, protocols_up_to, Derivation, ExprTypeError, Failure, Sorting, SessionEnv};
pub use elaborate::{elaborate, ElabError};

/// Process terms with named binders.
#[derive(Debug, Clone, PartialEq)]
pub enum Process {
    Send(String, Expr, Box<Process>),
    Recv(String, Pattern, Box<Process>),
    Sel1(String, Box<Process>),
    Sel2(String, Box<Process>),
    Offer(String, Box<Process>, Box<Process>),
    /// Channel output: `sendS c d P`.
    SendS(String, String, Box<Process>),
    /// Channel input: `recvS c (λd. P)`.
    RecvS(String, String, Box<Process>),
    Par(Box<Process>, Box<Process>),
    Inact,
    New(String, Box<Process>),
    /// An I/O action; transparent to typing.
    Io(IoAction, Option<Pattern>, Box<Process>),
}

impl Process {
    /// Free channel and value names.
    pub fn free_names(&self) -> std::collections::BTreeSet<String> {
        use std::collections::BTreeSet;
        fn expr_names(e: &Expr, out: &mut BTreeSet<String>) {
            match e {
                Expr::Var(v) => {
                    out.insert(v.clone());
                }
                Expr::List(xs) | Expr::Tag(_, xs) => xs.iter().for_each(|x| expr_names(x, out)),
                Expr::Bin(_, a, b) => {
                    expr_names(a, out);
                    expr_names(b, out);
                }
                Expr::If(a, b, c) => {
                    expr_names(a, out);
                    expr_names(b, out);
                    expr_names(c, out);
                }
                Expr::Field(_, _, x) => expr_names(x, out),
                _ => {}
            }
        }
        fn go(p: &Process, out: &mut BTreeSet<String>) {
            let without = |p: &Process, bound: &[&str], out: &mut BTreeSet<String>| {
                let mut inner = BTreeSet::new();
                go(p, &mut inner);
                for b in bound {
                    inner.remove(*b);
                }
                out.extend(inner);
            };
            match p {
                Process::Send(c, e, k) => {
                    out.insert(c.clone());
                    expr_names(e, out);
                    go(k, out);
                }
                Process::Recv(c, pat, k) => {
                    out.insert(c.clone());
                    without(k, &pat.bound_names(), out);
                }
                Process::Sel1(c, k) | Process::Sel2(c, k) => {
                    out.insert(c.clone());
                    go(k, out);
                }
                Process::Offer(c, a, b) => {
                    out.insert(c.clone());
                    go(a, out);
                    go(b, out);
                }
                Process::SendS(c, d, k) => {
                    out.insert(c.clone());
                    out.insert(d.clone());
                    go(k, out);
                }
                Process::RecvS(c, d, k) => {
                    out.insert(c.clone());
                    without(k, &[d.as_str()], out);
                }
                Process::Par(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Process::Inact => {}
                Process::New(c, k) => without(k, &[c.as_str()], out),
                Process::Io(action, bind, k) => {
                    if let IoAction::Print(e) = action {
                        expr_names(e, out);
                    }
                    match bind {
                        Some(pat) => without(k, &pat.bound_names(), out),
                        None => go(k, out),
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    /// Number of top-level parallel components.
    pub fn parallel_width(&self) -> usize {
        match self {
            Process::Par(a, b) => a.parallel_width() + b.parallel_width(),
            _ => 1,
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Send(c, e, k) => write!(f, "send {c} {}. {k}", atomic(e)),
            Process::Recv(c, p, k) => write!(f, "recv {c} (λ{}. {k})", pattern_text(p)),
            Process::Sel1(c, k) => write!(f, "sel1 {c}. {k}"),
            Process::Sel2(c, k) => write!(f, "sel2 {c}. {k}"),
            Process::Offer(c, a, b) => write!(f, "offer {c} {{{a}}} {{{b}}}"),
            Process::SendS(c, d, k) => write!(f, "sendS {c} {d}. {k}"),
            Process::RecvS(c, d, k) => write!(f, "recvS {c} (λ{d}. {k})"),
            Process::Par(a, b) => write!(f, "({a} ||| {b})"),
            Process::Inact => f.write_str("inact"),
            Process::New(c, k) => write!(f, "new (λ{c}. {k})"),
            Process::Io(IoAction::Print(e), _, k) => write!(f, "io print({}). {k}", expr_text(e)),
            Process::Io(IoAction::Readline, Some(p), k) => write!(f, "io readline (λ{}. {k})", pattern_text(p)),
            Process::Io(IoAction::Readline, None, k) => write!(f, "io readline. {k}"),
        }
    }
}

fn atomic(e: &Expr) -> String {
    let s = expr_text(e);
    match e {
        Expr::Bin(..) | Expr::If(..) => format!("({s})"),
        Expr::Int(n) if *n < 0 => format!("({s})"),
        _ => s,
    }
}
