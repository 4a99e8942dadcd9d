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


use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::ast::*;
use super::parser::is_reserved_tag;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ResolveError {
    pub pos: Pos,
    pub message: String,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NameKind {
    Chan,
    Value,
}

/// Checks that every referenced name is declared and bound, that binders are
/// fresh, and that channels and values are used in their proper places.
pub fn resolve(p: &Program) -> Result<(), ResolveError> {
    let top = Pos::default();
    let err = |pos: Pos, message: String| Err(ResolveError { pos, message });
    let mut seen = HashSet::new();
    for d in &p.data_decls {
        if is_reserved_tag(&d.name) {
            return err(top, format!("`{}` is a reserved name", d.name));
        }
        if !seen.insert(d.name.clone()) {
            return err(top, format!("data type `{}` declared twice", d.name));
        }
    }
    let mut services = HashSet::new();
    for s in &p.service_decls {
        if !services.insert(s.name.clone()) {
            return err(top, format!("service `{}` declared twice", s.name));
        }
        if !s.ty.is_ground() {
            return err(top, format!("service `{}` has a type with variables", s.name));
        }
    }
    let mut sessions = HashSet::new();
    for s in &p.sessions {
        if !sessions.insert(s.name.clone()) {
            return err(s.pos, format!("session `{}` declared twice", s.name));
        }
    }
    for s in &p.sessions {
        let mut scope = Scope { prog: p, names: HashMap::new() };
        for param in &s.params {
            let kind = if param.is_chan() { NameKind::Chan } else { NameKind::Value };
            scope.bind(param.name(), kind, s.pos)?;
        }
        scope.block(&s.body)?;
    }
    Ok(())
}

struct Scope<'a> {
    prog: &'a Program,
    names: HashMap<String, NameKind>,
}

impl Scope<'_> {
    fn bind(&mut self, name: &str, kind: NameKind, pos: Pos) -> Result<(), ResolveError> {
        if self.names.insert(name.to_string(), kind).is_some() {
            return Err(ResolveError { pos, message: format!("`{name}` is already bound") });
        }
        Ok(())
    }

    fn chan(&self, name: &str, pos: Pos) -> Result<(), ResolveError> {
        match self.names.get(name) {
            Some(NameKind::Chan) => Ok(()),
            Some(NameKind::Value) => {
                Err(ResolveError { pos, message: format!("`{name}` is a value, not a channel") })
            }
            None => Err(ResolveError { pos, message: format!("unbound channel `{name}`") }),
        }
    }

    fn pattern(&mut self, p: &Pattern, pos: Pos) -> Result<(), ResolveError> {
        match p {
            Pattern::Wild => Ok(()),
            Pattern::Name(n) => self.bind(n, NameKind::Value, pos),
            Pattern::Tagged(t, subs) => {
                let Some(d) = self.prog.data(t) else {
                    return Err(ResolveError { pos, message: format!("unknown data type `{t}`") });
                };
                if d.payload.len() != subs.len() {
                    return Err(ResolveError {
                        pos,
                        message: format!("`{t}` has {} fields, pattern has {}", d.payload.len(), subs.len()),
                    });
                }
                subs.iter().try_for_each(|s| self.pattern(s, pos))
            }
        }
    }

    fn expr(&self, e: &Expr, pos: Pos) -> Result<(), ResolveError> {
        let fail = |message: String| Err(ResolveError { pos, message });
        match e {
            Expr::Int(_) | Expr::Bool(_) | Expr::Str(_) | Expr::Unit => Ok(()),
            Expr::List(xs) => xs.iter().try_for_each(|x| self.expr(x, pos)),
            Expr::Var(v) => match self.names.get(v) {
                Some(NameKind::Value) => Ok(()),
                Some(NameKind::Chan) => fail(format!("channel `{v}` used as a value")),
                None => fail(format!("unbound variable `{v}`")),
            },
            Expr::Bin(_, a, b) => {
                self.expr(a, pos)?;
                self.expr(b, pos)
            }
            Expr::If(a, b, c) => {
                self.expr(a, pos)?;
                self.expr(b, pos)?;
                self.expr(c, pos)
            }
            Expr::Tag(t, args) => {
                let Some(d) = self.prog.data(t) else {
                    return fail(format!("unknown data type `{t}`"));
                };
                if d.payload.len() != args.len() {
                    return fail(format!("`{t}` takes {} arguments, given {}", d.payload.len(), args.len()));
                }
                args.iter().try_for_each(|x| self.expr(x, pos))
            }
            Expr::Field(t, i, x) => {
                let Some(d) = self.prog.data(t) else {
                    return fail(format!("unknown data type `{t}`"));
                };
                if *i >= d.payload.len() {
                    return fail(format!("`{t}` has no field {i}"));
                }
                self.expr(x, pos)
            }
        }
    }

    fn call(&self, c: &Call, pos: Pos) -> Result<(), ResolveError> {
        let Some(callee) = self.prog.session(&c.session) else {
            return Err(ResolveError { pos, message: format!("unknown session `{}`", c.session) });
        };
        if callee.params.len() != c.args.len() {
            return Err(ResolveError {
                pos,
                message: format!(
                    "`{}` takes {} arguments, given {}",
                    c.session,
                    callee.params.len(),
                    c.args.len()
                ),
            });
        }
        let mut chans = HashSet::new();
        for (param, arg) in callee.params.iter().zip(&c.args) {
            if param.is_chan() {
                match arg {
                    Expr::Var(v) => {
                        self.chan(v, pos)?;
                        if !chans.insert(v.as_str()) {
                            return Err(ResolveError {
                                pos,
                                message: format!("channel `{v}` passed twice to `{}`", c.session),
                            });
                        }
                    }
                    _ => {
                        return Err(ResolveError {
                            pos,
                            message: format!("parameter `{}` of `{}` needs a channel", param.name(), c.session),
                        })
                    }
                }
            } else {
                self.expr(arg, pos)?;
            }
        }
        Ok(())
    }

    fn nested(&self, b: &Block) -> Result<(), ResolveError> {
        let mut inner = Scope { prog: self.prog, names: self.names.clone() };
        inner.block(b)
    }

    fn block(&mut self, b: &Block) -> Result<(), ResolveError> {
        for s in b {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), ResolveError> {
        let pos = s.pos;
        match &s.kind {
            StmtKind::New(x) => self.bind(x, NameKind::Chan, pos),
            StmtKind::Send(c, e) => {
                self.chan(c, pos)?;
                self.expr(e, pos)
            }
            StmtKind::Recv(p, c) => {
                self.chan(c, pos)?;
                self.pattern(p, pos)
            }
            StmtKind::Sel1(c)
            | StmtKind::Sel2(c)
            | StmtKind::Sel1N(c)
            | StmtKind::Sel2N(c)
            | StmtKind::Close(c)
            | StmtKind::Unwind(_, c) => self.chan(c, pos),
            StmtKind::Offer(c, a, b) | StmtKind::OfferN(c, a, b) => {
                self.chan(c, pos)?;
                self.nested(a)?;
                self.nested(b)
            }
            StmtKind::Throw(c, d) => {
                self.chan(c, pos)?;
                self.chan(d, pos)?;
                if c == d {
                    return Err(ResolveError { pos, message: format!("cannot throw `{c}` over itself") });
                }
                Ok(())
            }
            StmtKind::Catch(x, c) => {
                self.chan(c, pos)?;
                self.bind(x, NameKind::Chan, pos)
            }
            StmtKind::Fork(ForkBody::Call(call)) => self.call(call, pos),
            StmtKind::Fork(ForkBody::Block(b)) => self.nested(b),
            StmtKind::Io(bind, action) => {
                if let IoAction::Print(e) = action {
                    self.expr(e, pos)?;
                }
                match bind {
                    Some(p) => self.pattern(p, pos),
                    None => Ok(()),
                }
            }
            StmtKind::Recur1(f, c) => {
                self.chan(c, pos)?;
                match self.prog.session(f) {
                    Some(d) if d.params.len() == 1 && d.params[0].is_chan() => Ok(()),
                    Some(_) => Err(ResolveError {
                        pos,
                        message: format!("`recur1` needs a session of one channel parameter, `{f}` is not"),
                    }),
                    None => Err(ResolveError { pos, message: format!("unknown session `{f}`") }),
                }
            }
            StmtKind::Connect(x, svc) => {
                if self.prog.service(svc).is_none() {
                    return Err(ResolveError { pos, message: format!("unknown service `{svc}`") });
                }
                self.bind(x, NameKind::Chan, pos)
            }
            StmtKind::Return(e) => self.expr(e, pos),
            StmtKind::Call(bind, call) => {
                self.call(call, pos)?;
                match bind {
                    Some(p) => self.pattern(p, pos),
                    None => Ok(()),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn check(src: &str) -> Result<(), ResolveError> {
        resolve(&parse(src).unwrap())
    }

    #[test]
    fn accepts_well_scoped_program() {
        check("session a(c) { x <- recv c; send c (x + 1) } session m() { c <- new; fork a(c); send c 1; y <- recv c }")
            .unwrap();
    }

    #[test]
    fn rejects_scope_errors() {
        assert!(check("session a(c) { send d 1 }").unwrap_err().message.contains("unbound channel"));
        assert!(check("session a(c) { send c x }").unwrap_err().message.contains("unbound variable"));
        assert!(check("session a(c) { send c c }").unwrap_err().message.contains("used as a value"));
        assert!(check("session a(c) { c <- new }").unwrap_err().message.contains("already bound"));
        assert!(check("session a(c) { fork b(c) }").unwrap_err().message.contains("unknown session"));
        assert!(check("session a(c, d) { throw c c }").unwrap_err().message.contains("over itself"));
        assert!(check("session a(c) { d <- connect web }").unwrap_err().message.contains("unknown service"));
    }

    #[test]
    fn branch_binders_do_not_escape() {
        assert!(check("session a(c) { offer c { x <- recv c } { x <- recv c }; send c x }").is_err());
        check("session a(c) { offer c { x <- recv c } { x <- recv c }; send c 1 }").unwrap();
    }
}
