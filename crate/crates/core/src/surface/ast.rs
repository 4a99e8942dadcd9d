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

use std::fmt;

use crate::types::{SessionType, ValueType};

/// Source position (1-based).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub data_decls: Vec<DataDecl>,
    pub service_decls: Vec<ServiceDecl>,
    pub sessions: Vec<SessionDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataDecl {
    pub name: String,
    pub payload: Vec<ValueType>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceDecl {
    pub name: String,
    pub ty: SessionType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Block,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Chan(String),
    Value(String, ValueType),
}

impl Param {
    pub fn name(&self) -> &str {
        match self {
            Param::Chan(n) | Param::Value(n, _) => n,
        }
    }

    pub fn is_chan(&self) -> bool {
        matches!(self, Param::Chan(_))
    }
}

pub type Block = Vec<Stmt>;

/// A statement with its source position. Positions do not take part in
/// equality.
#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Stmt { kind, pos: Pos::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    New(String),
    Send(String, Expr),
    Recv(Pattern, String),
    Sel1(String),
    Sel2(String),
    Offer(String, Block, Block),
    Sel1N(String),
    Sel2N(String),
    OfferN(String, Block, Block),
    Throw(String, String),
    Catch(String, String),
    Fork(ForkBody),
    Io(Option<Pattern>, IoAction),
    Unwind(u32, String),
    Recur1(String, String),
    Close(String),
    Connect(String, String),
    Return(Expr),
    Call(Option<Pattern>, Call),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForkBody {
    Call(Call),
    Block(Block),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Call {
    pub session: String,
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IoAction {
    Print(Expr),
    Readline,
}

/// Binders for received values.
#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Wild,
    Name(String),
    Tagged(String, Vec<Pattern>),
}

impl Pattern {
    pub fn bound_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a Pattern, out: &mut Vec<&'a str>) {
            match p {
                Pattern::Wild => {}
                Pattern::Name(n) => out.push(n),
                Pattern::Tagged(_, ps) => ps.iter().for_each(|p| go(p, out)),
            }
        }
        go(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Str(String),
    Unit,
    List(Vec<Expr>),
    Var(String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    /// Constructor application of a declared data type.
    Tag(String, Vec<Expr>),
    /// Positional field of a tagged value: `Tag.i(e)`.
    Field(String, usize, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Lt,
    Eq,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Lt => "<",
            BinOp::Eq => "==",
        }
    }
}

impl Program {
    pub fn session(&self, name: &str) -> Option<&SessionDecl> {
        self.sessions.iter().find(|s| s.name == name)
    }

    pub fn data(&self, name: &str) -> Option<&DataDecl> {
        self.data_decls.iter().find(|d| d.name == name)
    }

    pub fn service(&self, name: &str) -> Option<&ServiceDecl> {
        self.service_decls.iter().find(|s| s.name == name)
    }

    /// The session that `run` starts: `main` if declared, otherwise the
    /// last session without parameters.
    pub fn entry(&self) -> Option<&SessionDecl> {
        self.session("main")
            .or_else(|| self.sessions.iter().rev().find(|s| s.params.is_empty()))
    }
}

/// Visits every statement in a block, including nested blocks.
pub fn walk_stmts<'a>(block: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for s in block {
        f(s);
        match &s.kind {
            StmtKind::Offer(_, a, b) | StmtKind::OfferN(_, a, b) => {
                walk_stmts(a, f);
                walk_stmts(b, f);
            }
            StmtKind::Fork(ForkBody::Block(b)) => walk_stmts(b, f),
            _ => {}
        }
    }
}
