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


//! The protocol DSL: syntax tree, parser, printer and name resolution.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod resolve;

use thiserror::Error;

pub use ast::*;
pub use printer::{print_program, print_type};
pub use resolve::{resolve, ResolveError};

use crate::types::{EnvRow, SessionType, ValueType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: syntax error: expected {}, found {found}", expected.join(" or "))]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

/// Parses a whole program.
pub fn parse(text: &str) -> Result<Program, SyntaxError> {
    let mut p = parser::Parser::new(text)?;
    let prog = p.program()?;
    p.expect_eof()?;
    Ok(prog)
}

/// Parses a session type written in the standard textual notation. Lowercase names
/// are unification variables numbered by first occurrence.
pub fn parse_type(text: &str) -> Result<SessionType, SyntaxError> {
    let mut p = parser::Parser::new(text)?;
    let t = p.session_type()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_value_type(text: &str) -> Result<ValueType, SyntaxError> {
    let mut p = parser::Parser::new(text)?;
    let t = p.value_type()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses an environment row such as `ss :> End :> Bot` or `Nil :> End`.
pub fn parse_row(text: &str) -> Result<EnvRow, SyntaxError> {
    let mut p = parser::Parser::new(text)?;
    let r = p.env_row()?;
    p.expect_eof()?;
    Ok(r)
}
