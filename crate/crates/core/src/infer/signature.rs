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


//! Rendering and parsing of inferred signatures.
//!
//! Pretty form: `(pre, post)` for a session of one channel that creates no
//! channels; otherwise
//! `[EndedTail ss => ][V -> ...]Session (pre-row) (post-row) result`.

use serde_json::{json, Value};

use super::{ParamSig, SessionSignature};
use crate::surface::lexer::Tok;
use crate::surface::parser::Parser;
use crate::surface::SyntaxError;
use crate::types::{write_row, write_session, write_value, EnvRow, SessionType, ValueType, VarNames};

#[derive(Debug, Clone, PartialEq)]
enum Form {
    Pair(SessionType, SessionType),
    Full { pre: EnvRow, post: EnvRow, result: ValueType },
}

#[derive(Debug, Clone, PartialEq)]
struct SigText {
    ended_tail: bool,
    values: Vec<ValueType>,
    form: Form,
}

impl SigText {
    fn of(sig: &SessionSignature) -> Self {
        let values: Vec<ValueType> = sig
            .params
            .iter()
            .filter_map(|p| match p {
                ParamSig::Value { ty, .. } => Some(ty.clone()),
                ParamSig::Chan { .. } => None,
            })
            .collect();
        let pair = sig.chan_count() == 1 && sig.post.entries.len() == 1 && values.is_empty() && !sig.ended_tail;
        let form = if pair {
            Form::Pair(sig.pre.entries[0].clone(), sig.post.entries[0].clone())
        } else {
            Form::Full { pre: sig.pre.clone(), post: sig.post.clone(), result: sig.result.clone() }
        };
        SigText { ended_tail: sig.ended_tail, values, form }
    }

    fn render(&self) -> String {
        let mut names = VarNames::new();
        let mut out = String::new();
        match &self.form {
            Form::Pair(a, b) => {
                out.push('(');
                write_session(&mut out, a, &mut names, false);
                out.push_str(", ");
                write_session(&mut out, b, &mut names, false);
                out.push(')');
            }
            Form::Full { pre, post, result } => {
                if self.ended_tail {
                    out.push_str("EndedTail ss => ");
                }
                for v in &self.values {
                    write_value(&mut out, v, &mut names);
                    out.push_str(" -> ");
                }
                out.push_str("Session (");
                write_row(&mut out, pre, "ss", &mut names);
                out.push_str(") (");
                write_row(&mut out, post, "ss", &mut names);
                out.push_str(") ");
                write_value(&mut out, result, &mut names);
            }
        }
        out
    }

    fn parse(text: &str) -> Result<Self, SyntaxError> {
        let mut p = Parser::new(text)?;
        let out = if p.eat(&Tok::LParen) {
            let a = p.session_type()?;
            p.expect(&Tok::Comma)?;
            let b = p.session_type()?;
            p.expect(&Tok::RParen)?;
            SigText { ended_tail: false, values: Vec::new(), form: Form::Pair(a, b) }
        } else {
            let ended_tail = p.eat_upper("EndedTail");
            if ended_tail {
                p.env_row()?;
                p.expect(&Tok::FatArrow)?;
            }
            let mut values = Vec::new();
            while !p.eat_upper("Session") {
                values.push(p.value_type()?);
                p.expect(&Tok::RArrow)?;
            }
            p.expect(&Tok::LParen)?;
            let pre = p.env_row()?;
            p.expect(&Tok::RParen)?;
            p.expect(&Tok::LParen)?;
            let post = p.env_row()?;
            p.expect(&Tok::RParen)?;
            let result = p.value_type()?;
            SigText { ended_tail, values, form: Form::Full { pre, post, result } }
        };
        p.expect_eof()?;
        Ok(out)
    }
}

/// The notation-level rendering of a signature.
pub fn pretty(sig: &SessionSignature) -> String {
    SigText::of(sig).render()
}

/// Canonical text of a written signature: equal for signatures that differ
/// only in the names of their variables.
pub fn parse_signature(text: &str) -> Result<String, SyntaxError> {
    Ok(SigText::parse(text)?.render())
}

/// One `name :: signature` line of an expectation file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub name: String,
    pub line: usize,
    canonical: String,
}

impl Expectation {
    /// Reads an expectation file; blank lines and `--` comments are skipped.
    pub fn parse_file(text: &str) -> Result<Vec<Expectation>, SyntaxError> {
        let mut out = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split("--").next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((name, sig)) = line.split_once("::") else {
                return Err(SyntaxError {
                    line: i + 1,
                    column: 1,
                    expected: vec!["`name :: signature`".into()],
                    found: line.to_string(),
                });
            };
            let canonical = parse_signature(sig).map_err(|e| SyntaxError { line: i + 1, ..e })?;
            out.push(Expectation { name: name.trim().to_string(), line: i + 1, canonical });
        }
        Ok(out)
    }

    pub fn expected(&self) -> &str {
        &self.canonical
    }

    pub fn matches(&self, sig: &SessionSignature) -> bool {
        pretty(sig) == self.canonical
    }
}

fn typed(u: &SessionType) -> Value {
    json!({ "type": u, "text": u.to_string() })
}

fn row(r: &EnvRow) -> Value {
    json!({ "tail": "ss", "entries": r.entries.iter().map(typed).collect::<Vec<_>>() })
}

/// The structured, versioned rendering of a set of signatures.
pub fn structured(sigs: &[SessionSignature]) -> Value {
    let sessions: Vec<Value> = sigs
        .iter()
        .map(|s| {
            let residual: Vec<Value> =
                if s.ended_tail { vec![json!({ "kind": "EndedTail", "tail": "ss" })] } else { Vec::new() };
            json!({
                "name": s.name,
                "params": s.params,
                "pre": row(&s.pre),
                "post": row(&s.post),
                "result": { "type": s.result, "text": s.result.to_string() },
                "residual": residual,
                "pretty": pretty(s),
            })
        })
        .collect();
    json!({ "schema_version": "1", "sessions": sessions })
}
