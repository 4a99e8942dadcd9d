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


use std::fmt::Write as _;

use super::ast::*;
use crate::types::{write_session, write_value, SessionType, VarNames};

/// Renders a session type in the standard textual notation.
pub fn print_type(u: &SessionType) -> String {
    u.to_string()
}

/// Renders a program as source text that parses back to the same tree.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.data_decls {
        out.push_str("data ");
        out.push_str(&d.name);
        if !d.payload.is_empty() {
            out.push('(');
            let mut names = VarNames::new();
            for (i, v) in d.payload.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(&mut out, v, &mut names);
            }
            out.push(')');
        }
        out.push('\n');
    }
    for s in &p.service_decls {
        let _ = writeln!(out, "service {} : {}", s.name, print_type(&s.ty));
    }
    for (i, s) in p.sessions.iter().enumerate() {
        if i > 0 || !p.data_decls.is_empty() || !p.service_decls.is_empty() {
            out.push('\n');
        }
        print_session(&mut out, s);
    }
    out
}

fn print_session(out: &mut String, s: &SessionDecl) {
    let _ = write!(out, "session {}(", s.name);
    for (i, p) in s.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match p {
            Param::Chan(n) => out.push_str(n),
            Param::Value(n, v) => {
                let _ = write!(out, "{n}: ");
                write_value(out, v, &mut VarNames::new());
            }
        }
    }
    out.push_str(") ");
    print_block(out, &s.body, 0);
    out.push('\n');
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn print_block(out: &mut String, b: &Block, depth: usize) {
    if b.is_empty() {
        out.push_str("{ }");
        return;
    }
    out.push_str("{\n");
    for (i, s) in b.iter().enumerate() {
        indent(out, depth + 1);
        print_stmt(out, s, depth + 1);
        if i + 1 < b.len() {
            out.push(';');
        }
        out.push('\n');
    }
    indent(out, depth);
    out.push('}');
}

fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    match &s.kind {
        StmtKind::New(x) => {
            let _ = write!(out, "{x} <- new");
        }
        StmtKind::Send(c, e) => {
            let _ = write!(out, "send {c} {}", expr_text(e));
        }
        StmtKind::Recv(p, c) => {
            let _ = write!(out, "{} <- recv {c}", pattern_text(p));
        }
        StmtKind::Sel1(c) => {
            let _ = write!(out, "sel1 {c}");
        }
        StmtKind::Sel2(c) => {
            let _ = write!(out, "sel2 {c}");
        }
        StmtKind::Sel1N(c) => {
            let _ = write!(out, "sel1N {c}");
        }
        StmtKind::Sel2N(c) => {
            let _ = write!(out, "sel2N {c}");
        }
        StmtKind::Offer(c, a, b) | StmtKind::OfferN(c, a, b) => {
            let kw = if matches!(s.kind, StmtKind::Offer(..)) { "offer" } else { "offerN" };
            let _ = write!(out, "{kw} {c} ");
            print_block(out, a, depth);
            out.push(' ');
            print_block(out, b, depth);
        }
        StmtKind::Throw(c, d) => {
            let _ = write!(out, "throw {c} {d}");
        }
        StmtKind::Catch(x, c) => {
            let _ = write!(out, "{x} <- catch {c}");
        }
        StmtKind::Fork(ForkBody::Call(call)) => {
            let _ = write!(out, "fork {}", call_text(call));
        }
        StmtKind::Fork(ForkBody::Block(b)) => {
            out.push_str("fork ");
            print_block(out, b, depth);
        }
        StmtKind::Io(bind, action) => {
            if let Some(p) = bind {
                let _ = write!(out, "{} <- ", pattern_text(p));
            }
            match action {
                IoAction::Print(e) => {
                    let _ = write!(out, "io print({})", expr_text(e));
                }
                IoAction::Readline => out.push_str("io readline()"),
            }
        }
        StmtKind::Unwind(l, c) => {
            let _ = write!(out, "unwind {l} {c}");
        }
        StmtKind::Recur1(f, c) => {
            let _ = write!(out, "recur1 {f} {c}");
        }
        StmtKind::Close(c) => {
            let _ = write!(out, "close {c}");
        }
        StmtKind::Connect(x, svc) => {
            let _ = write!(out, "{x} <- connect {svc}");
        }
        StmtKind::Return(e) => {
            let _ = write!(out, "return {}", expr_text(e));
        }
        StmtKind::Call(bind, call) => {
            if let Some(p) = bind {
                let _ = write!(out, "{} <- ", pattern_text(p));
            }
            out.push_str(&call_text(call));
        }
    }
}

fn call_text(c: &Call) -> String {
    let args: Vec<String> = c.args.iter().map(expr_text).collect();
    format!("{}({})", c.session, args.join(", "))
}

pub fn pattern_text(p: &Pattern) -> String {
    match p {
        Pattern::Wild => "_".into(),
        Pattern::Name(n) => n.clone(),
        Pattern::Tagged(t, subs) if subs.is_empty() => t.clone(),
        Pattern::Tagged(t, subs) => {
            let subs: Vec<String> = subs.iter().map(pattern_text).collect();
            format!("{t}({})", subs.join(", "))
        }
    }
}

/// Renders an expression, parenthesizing exactly where the grammar needs it.
pub fn expr_text(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, Prec::Top);
    s
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Top,
    Additive,
    Atom,
}

fn write_expr(out: &mut String, e: &Expr, ctx: Prec) {
    let own = match e {
        Expr::Bin(BinOp::Lt | BinOp::Eq, ..) | Expr::If(..) => Prec::Top,
        Expr::Bin(..) => Prec::Additive,
        Expr::Int(n) if *n < 0 => Prec::Additive,
        _ => Prec::Atom,
    };
    let paren = own < ctx;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Bool(b) => out.push_str(if *b { "True" } else { "False" }),
        Expr::Str(s) => {
            out.push('"');
            for ch in s.chars() {
                match ch {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        Expr::Unit => out.push_str("()"),
        Expr::List(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, x, Prec::Top);
            }
            out.push(']');
        }
        Expr::Var(v) => out.push_str(v),
        Expr::Bin(op, l, r) => {
            let (lp, rp) = match op {
                BinOp::Lt | BinOp::Eq => (Prec::Additive, Prec::Additive),
                _ => (Prec::Additive, Prec::Atom),
            };
            write_expr(out, l, lp);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, r, rp);
        }
        Expr::If(c, t, f) => {
            out.push_str("if ");
            write_expr(out, c, Prec::Top);
            out.push_str(" then ");
            write_expr(out, t, Prec::Top);
            out.push_str(" else ");
            write_expr(out, f, Prec::Top);
        }
        Expr::Tag(t, args) => {
            out.push_str(t);
            if !args.is_empty() {
                out.push('(');
                for (i, x) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_expr(out, x, Prec::Top);
                }
                out.push(')');
            }
        }
        Expr::Field(t, i, x) => {
            let _ = write!(out, "{t}.{i}(");
            write_expr(out, x, Prec::Top);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

/// Renders a session type with display names shared across calls.
pub fn print_type_with(u: &SessionType, names: &mut VarNames) -> String {
    let mut s = String::new();
    write_session(&mut s, u, names, false);
    s
}
