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

use std::collections::HashMap;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::SyntaxError;
use crate::types::{EnvRow, RowTail, SessionType, ValueType};

pub const KEYWORDS: &[&str] = &[
    "data", "service", "session", "new", "send", "recv", "sel1", "sel2", "sel1N", "sel2N", "offer",
    "offerN", "throw", "catch", "fork", "io", "unwind", "recur1", "close", "connect", "return",
    "print", "readline", "if", "then", "else",
];

const TYPE_WORDS: &[&str] = &[
    "Send", "Recv", "Select", "Offer", "SelectN", "OfferN", "Throw", "Catch", "End", "Bot", "Close",
    "Rec", "Var", "Int", "Bool", "String", "Str", "Unit", "Nil", "Session", "Z", "S", "True",
    "False", "EndedTail",
];

/// Names that cannot be used for declared data types.
pub fn is_reserved_tag(name: &str) -> bool {
    TYPE_WORDS.contains(&name)
}

pub struct Parser {
    toks: Vec<Token>,
    at: usize,
    expected: Vec<String>,
    /// Lowercase type variables seen so far, numbered by first occurrence.
    type_vars: HashMap<String, u32>,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Parser { toks: lex(src)?, at: 0, expected: Vec::new(), type_vars: HashMap::new() })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.at + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        self.expected.clear();
        t
    }

    pub fn error(&mut self, expected: &str) -> SyntaxError {
        self.expected.push(expected.to_string());
        let pos = self.pos();
        let mut expected = std::mem::take(&mut self.expected);
        expected.sort();
        expected.dedup();
        SyntaxError { line: pos.line, column: pos.column, expected, found: self.peek().to_string() }
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            self.expected.push(format!("`{}`", tok.symbol()));
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), SyntaxError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(&format!("`{}`", tok.symbol())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            self.expected.push(format!("`{kw}`"));
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    pub fn eat_upper(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Tok::Upper(n) if n == word) {
            self.advance();
            true
        } else {
            self.expected.push(format!("`{word}`"));
            false
        }
    }

    pub fn expect_eof(&mut self) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn name(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Name(n) if !KEYWORDS.contains(&n.as_str()) && n != "_" => {
                self.advance();
                Ok(n)
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn upper(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Upper(n) => {
                self.advance();
                Ok(n)
            }
            _ => Err(self.error("constructor name")),
        }
    }

    fn nat(&mut self) -> Result<u32, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(n) if n >= 0 && n <= u32::MAX as i64 => {
                self.advance();
                Ok(n as u32)
            }
            _ => Err(self.error("natural number")),
        }
    }

    pub fn type_var(&mut self, name: &str) -> u32 {
        let next = self.type_vars.len() as u32;
        *self.type_vars.entry(name.to_string()).or_insert(next)
    }

    // ---- types ----

    pub fn value_type(&mut self) -> Result<ValueType, SyntaxError> {
        match self.peek().clone() {
            Tok::Upper(n) => {
                self.advance();
                Ok(match n.as_str() {
                    "Int" => ValueType::Int,
                    "Bool" => ValueType::Bool,
                    "String" | "Str" => ValueType::Str,
                    "Unit" => ValueType::Unit,
                    _ => ValueType::Tagged(n),
                })
            }
            Tok::Name(n) if !KEYWORDS.contains(&n.as_str()) => {
                self.advance();
                Ok(ValueType::Var(self.type_var(&n)))
            }
            Tok::LBracket => {
                self.advance();
                let inner = self.value_type()?;
                self.expect(&Tok::RBracket)?;
                Ok(ValueType::List(Box::new(inner)))
            }
            Tok::LParen => {
                self.advance();
                if self.eat(&Tok::RParen) {
                    return Ok(ValueType::Unit);
                }
                let inner = self.value_type()?;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            _ => Err(self.error("value type")),
        }
    }

    fn level(&mut self) -> Result<u32, SyntaxError> {
        if self.eat_upper("Z") {
            return Ok(0);
        }
        if self.eat_upper("S") {
            return Ok(self.level()? + 1);
        }
        if self.eat(&Tok::LParen) {
            let l = self.level()?;
            self.expect(&Tok::RParen)?;
            return Ok(l);
        }
        if let Tok::Int(_) = self.peek() {
            return self.nat();
        }
        Err(self.error("level"))
    }

    fn session_arg(&mut self) -> Result<SessionType, SyntaxError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let t = self.session_type()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            Tok::Upper(n) if matches!(n.as_str(), "End" | "Bot" | "Close") => self.session_type(),
            Tok::Name(n) if !KEYWORDS.contains(&n.as_str()) => {
                self.advance();
                Ok(SessionType::UVar(self.type_var(&n)))
            }
            _ => Err(self.error("session type")),
        }
    }

    pub fn session_type(&mut self) -> Result<SessionType, SyntaxError> {
        let word = match self.peek().clone() {
            Tok::Upper(w) => w,
            Tok::LParen | Tok::Name(_) => return self.session_arg(),
            _ => return Err(self.error("session type")),
        };
        let pair = |p: &mut Parser| -> Result<(Box<SessionType>, Box<SessionType>), SyntaxError> {
            Ok((Box::new(p.session_arg()?), Box::new(p.session_arg()?)))
        };
        let t = match word.as_str() {
            "Send" | "Recv" => {
                self.advance();
                let v = self.value_type()?;
                let k = Box::new(self.session_arg()?);
                if word == "Send" {
                    SessionType::Send(v, k)
                } else {
                    SessionType::Recv(v, k)
                }
            }
            "Select" | "Offer" | "SelectN" | "OfferN" | "Throw" | "Catch" => {
                self.advance();
                let (a, b) = pair(self)?;
                match word.as_str() {
                    "Select" => SessionType::Select(a, b),
                    "Offer" => SessionType::Offer(a, b),
                    "SelectN" => SessionType::SelectN(a, b),
                    "OfferN" => SessionType::OfferN(a, b),
                    "Throw" => SessionType::Throw(a, b),
                    _ => SessionType::Catch(a, b),
                }
            }
            "End" => {
                self.advance();
                SessionType::End
            }
            "Bot" => {
                self.advance();
                SessionType::Bot
            }
            "Close" => {
                self.advance();
                SessionType::Close
            }
            "Rec" => {
                self.advance();
                let l = self.level()?;
                SessionType::Rec(l, Box::new(self.session_arg()?))
            }
            "Var" => {
                self.advance();
                SessionType::Var(self.level()?)
            }
            _ => return Err(self.error("session type constructor")),
        };
        Ok(t)
    }

    /// `Nil :> u0 :> u1` or `ss :> u0`; any lowercase tail name is a row
    /// variable.
    pub fn env_row(&mut self) -> Result<EnvRow, SyntaxError> {
        let tail = if self.eat_upper("Nil") {
            RowTail::Nil
        } else {
            match self.peek().clone() {
                Tok::Name(n) if !KEYWORDS.contains(&n.as_str()) => {
                    self.advance();
                    RowTail::Var(self.type_var(&n))
                }
                _ => return Err(self.error("row tail")),
            }
        };
        let mut entries = Vec::new();
        while self.eat(&Tok::Snoc) {
            entries.push(self.session_type()?);
        }
        Ok(EnvRow::new(tail, entries))
    }

    // ---- programs ----

    pub fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut p = Program::default();
        loop {
            if self.eat_kw("data") {
                let name = self.upper()?;
                let mut payload = Vec::new();
                if self.eat(&Tok::LParen) {
                    payload.push(self.value_type()?);
                    while self.eat(&Tok::Comma) {
                        payload.push(self.value_type()?);
                    }
                    self.expect(&Tok::RParen)?;
                }
                p.data_decls.push(DataDecl { name, payload });
            } else if self.eat_kw("service") {
                let name = self.name()?;
                self.expect(&Tok::Colon)?;
                self.type_vars.clear();
                let ty = self.session_type()?;
                p.service_decls.push(ServiceDecl { name, ty });
            } else if self.is_kw("session") {
                p.sessions.push(self.session_decl()?);
            } else if *self.peek() == Tok::Eof {
                return Ok(p);
            } else {
                return Err(self.error("`data`, `service` or `session`"));
            }
            self.eat(&Tok::Semi);
        }
    }

    fn session_decl(&mut self) -> Result<SessionDecl, SyntaxError> {
        let pos = self.pos();
        self.expect_kw("session")?;
        let name = self.name()?;
        self.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let n = self.name()?;
                if self.eat(&Tok::Colon) {
                    self.type_vars.clear();
                    params.push(Param::Value(n, self.value_type()?));
                } else {
                    params.push(Param::Chan(n));
                }
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        let body = self.block()?;
        Ok(SessionDecl { name, params, body, pos })
    }

    fn block(&mut self) -> Result<Block, SyntaxError> {
        self.expect(&Tok::LBrace)?;
        let mut stmts = Vec::new();
        loop {
            if self.eat(&Tok::RBrace) {
                return Ok(stmts);
            }
            stmts.push(self.stmt()?);
            if !self.eat(&Tok::Semi) {
                self.expect(&Tok::RBrace)?;
                return Ok(stmts);
            }
        }
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let pos = self.pos();
        let kind = self.stmt_kind()?;
        Ok(Stmt { kind, pos })
    }

    fn stmt_kind(&mut self) -> Result<StmtKind, SyntaxError> {
        let word = match self.peek().clone() {
            Tok::Name(w) => w,
            Tok::Upper(_) => return self.binding_stmt(),
            _ => return Err(self.error("statement")),
        };
        Ok(match word.as_str() {
            "send" => {
                self.advance();
                let c = self.name()?;
                StmtKind::Send(c, self.expr()?)
            }
            "sel1" | "sel2" | "sel1N" | "sel2N" | "close" => {
                self.advance();
                let c = self.name()?;
                match word.as_str() {
                    "sel1" => StmtKind::Sel1(c),
                    "sel2" => StmtKind::Sel2(c),
                    "sel1N" => StmtKind::Sel1N(c),
                    "sel2N" => StmtKind::Sel2N(c),
                    _ => StmtKind::Close(c),
                }
            }
            "offer" | "offerN" => {
                self.advance();
                let c = self.name()?;
                let b1 = self.block()?;
                let b2 = self.block()?;
                if word == "offer" {
                    StmtKind::Offer(c, b1, b2)
                } else {
                    StmtKind::OfferN(c, b1, b2)
                }
            }
            "throw" => {
                self.advance();
                let c = self.name()?;
                StmtKind::Throw(c, self.name()?)
            }
            "fork" => {
                self.advance();
                if *self.peek() == Tok::LBrace {
                    StmtKind::Fork(ForkBody::Block(self.block()?))
                } else {
                    StmtKind::Fork(ForkBody::Call(self.call()?))
                }
            }
            "io" => {
                self.advance();
                StmtKind::Io(None, self.io_action()?)
            }
            "unwind" => {
                self.advance();
                let l = self.nat()?;
                StmtKind::Unwind(l, self.name()?)
            }
            "recur1" => {
                self.advance();
                let f = self.name()?;
                StmtKind::Recur1(f, self.name()?)
            }
            "return" => {
                self.advance();
                StmtKind::Return(self.expr()?)
            }
            _ if *self.peek_at(1) == Tok::LParen && !KEYWORDS.contains(&word.as_str()) => {
                StmtKind::Call(None, self.call()?)
            }
            _ => self.binding_stmt()?,
        })
    }

    fn binding_stmt(&mut self) -> Result<StmtKind, SyntaxError> {
        let pat = self.pattern()?;
        self.expect(&Tok::Arrow)?;
        let simple = match &pat {
            Pattern::Name(n) => Some(n.clone()),
            _ => None,
        };
        let need_name = |p: &mut Parser, what: &str| -> Result<String, SyntaxError> {
            simple.clone().ok_or_else(|| p.error(&format!("plain name binder for `{what}`")))
        };
        if self.eat_kw("new") {
            return Ok(StmtKind::New(need_name(self, "new")?));
        }
        if self.eat_kw("recv") {
            return Ok(StmtKind::Recv(pat, self.name()?));
        }
        if self.eat_kw("catch") {
            let b = need_name(self, "catch")?;
            return Ok(StmtKind::Catch(b, self.name()?));
        }
        if self.eat_kw("connect") {
            let b = need_name(self, "connect")?;
            return Ok(StmtKind::Connect(b, self.name()?));
        }
        if self.eat_kw("io") {
            return Ok(StmtKind::Io(Some(pat), self.io_action()?));
        }
        if matches!(self.peek(), Tok::Name(n) if !KEYWORDS.contains(&n.as_str())) {
            return Ok(StmtKind::Call(Some(pat), self.call()?));
        }
        Err(self.error("`new`, `recv`, `catch`, `connect`, `io` or a session call"))
    }

    fn pattern(&mut self) -> Result<Pattern, SyntaxError> {
        match self.peek().clone() {
            Tok::Name(n) if n == "_" => {
                self.advance();
                Ok(Pattern::Wild)
            }
            Tok::Name(_) => Ok(Pattern::Name(self.name()?)),
            Tok::Upper(tag) => {
                self.advance();
                let mut subs = Vec::new();
                if self.eat(&Tok::LParen) {
                    subs.push(self.pattern()?);
                    while self.eat(&Tok::Comma) {
                        subs.push(self.pattern()?);
                    }
                    self.expect(&Tok::RParen)?;
                }
                Ok(Pattern::Tagged(tag, subs))
            }
            _ => Err(self.error("pattern")),
        }
    }

    fn call(&mut self) -> Result<Call, SyntaxError> {
        let session = self.name()?;
        self.expect(&Tok::LParen)?;
        let mut args = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                args.push(self.expr()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        Ok(Call { session, args })
    }

    fn io_action(&mut self) -> Result<IoAction, SyntaxError> {
        if self.eat_kw("print") {
            self.expect(&Tok::LParen)?;
            let e = self.expr()?;
            self.expect(&Tok::RParen)?;
            Ok(IoAction::Print(e))
        } else if self.eat_kw("readline") {
            self.expect(&Tok::LParen)?;
            self.expect(&Tok::RParen)?;
            Ok(IoAction::Readline)
        } else {
            Err(self.error("`print` or `readline`"))
        }
    }

    // ---- expressions ----

    pub fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let lhs = self.additive()?;
        let op = if self.eat(&Tok::Lt) {
            BinOp::Lt
        } else if self.eat(&Tok::EqEq) {
            BinOp::Eq
        } else {
            return Ok(lhs);
        };
        let rhs = self.additive()?;
        Ok(Expr::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn additive(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.atom()?;
        loop {
            let op = if self.eat(&Tok::Plus) {
                BinOp::Add
            } else if self.eat(&Tok::Minus) {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.atom()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(Expr::Int(n))
            }
            Tok::Minus => {
                self.advance();
                match self.peek().clone() {
                    Tok::Int(n) => {
                        self.advance();
                        Ok(Expr::Int(-n))
                    }
                    _ => Err(self.error("integer literal")),
                }
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::Str(s))
            }
            Tok::LParen => {
                self.advance();
                if self.eat(&Tok::RParen) {
                    return Ok(Expr::Unit);
                }
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::LBracket => {
                self.advance();
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        items.push(self.expr()?);
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        self.expect(&Tok::Comma)?;
                    }
                }
                Ok(Expr::List(items))
            }
            Tok::Name(n) if n == "if" => {
                self.advance();
                let c = self.expr()?;
                self.expect_kw("then")?;
                let t = self.expr()?;
                self.expect_kw("else")?;
                let e = self.expr()?;
                Ok(Expr::If(Box::new(c), Box::new(t), Box::new(e)))
            }
            Tok::Name(_) => Ok(Expr::Var(self.name()?)),
            Tok::Upper(tag) => {
                self.advance();
                match tag.as_str() {
                    "True" => return Ok(Expr::Bool(true)),
                    "False" => return Ok(Expr::Bool(false)),
                    _ => {}
                }
                if self.eat(&Tok::Dot) {
                    let i = self.nat()? as usize;
                    self.expect(&Tok::LParen)?;
                    let e = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(Expr::Field(tag, i, Box::new(e)));
                }
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    loop {
                        args.push(self.expr()?);
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        self.expect(&Tok::Comma)?;
                    }
                }
                Ok(Expr::Tag(tag, args))
            }
            _ => Err(self.error("expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, parse_type};
    use super::*;

    #[test]
    fn parses_start_calc() {
        let p = parse("session startCalc() { c <- new; fork calc_server(c); send c 123; }").unwrap();
        assert_eq!(p.sessions.len(), 1);
        let body = &p.sessions[0].body;
        assert_eq!(body.len(), 3);
        assert_eq!(body[0].kind, StmtKind::New("c".into()));
        assert_eq!(
            body[1].kind,
            StmtKind::Fork(ForkBody::Call(Call { session: "calc_server".into(), args: vec![Expr::Var("c".into())] }))
        );
        assert_eq!(body[2].kind, StmtKind::Send("c".into(), Expr::Int(123)));
    }

    #[test]
    fn parses_offer_blocks() {
        let p = parse("session s(c) { offer c { send c (x + y) } { send c (x < y) } }").unwrap();
        let x = || Box::new(Expr::Var("x".into()));
        let y = || Box::new(Expr::Var("y".into()));
        assert_eq!(
            p.sessions[0].body[0].kind,
            StmtKind::Offer(
                "c".into(),
                vec![Stmt::new(StmtKind::Send("c".into(), Expr::Bin(BinOp::Add, x(), y())))],
                vec![Stmt::new(StmtKind::Send("c".into(), Expr::Bin(BinOp::Lt, x(), y())))],
            )
        );
    }

    #[test]
    fn missing_argument_is_a_syntax_error() {
        let err = parse("session s(c) { send c }").unwrap_err();
        assert_eq!((err.line, err.column), (1, 23));
        assert!(err.expected.iter().any(|e| e == "expression"), "{err:?}");
    }

    #[test]
    fn parses_patterns_and_fields() {
        let p = parse("data R(String); session s(c) { R(m) <- recv c; io print(R.0(R(m))) }").unwrap();
        assert_eq!(p.data_decls[0].payload, vec![ValueType::Str]);
        assert!(matches!(&p.sessions[0].body[0].kind, StmtKind::Recv(Pattern::Tagged(t, _), _) if t == "R"));
    }

    #[test]
    fn type_notation() {
        let t = parse_type("Rec (S Z) (Send [String] (Var (S Z)))").unwrap();
        assert_eq!(
            t,
            SessionType::rec(1, SessionType::send(ValueType::List(Box::new(ValueType::Str)), SessionType::Var(1)))
        );
        assert_eq!(parse_type("Send Int a").unwrap(), SessionType::send(ValueType::Int, SessionType::UVar(0)));
        assert!(parse_type("Send Int").is_err());
        assert_eq!(parse_type("Rec 2 End").unwrap(), SessionType::rec(2, SessionType::End));
    }
}
