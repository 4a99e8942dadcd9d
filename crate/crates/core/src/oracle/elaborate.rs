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


//! Translation of surface sessions into process terms. Calls are inlined
//! with capture-avoiding renaming; a call's result is substituted into the
//! caller's continuation.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::Process;
use crate::surface::{Expr, ForkBody, IoAction, Pattern, Pos, Program, SessionDecl, Stmt, StmtKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElabError {
    #[error("{pos}: `{construct}` is outside the core calculus")]
    OutsideFragment { pos: Pos, construct: String },
    #[error("{pos}: unknown session `{name}`")]
    UnknownSession { pos: Pos, name: String },
}

type Env = HashMap<String, Expr>;

/// The rest of a caller's block, resumed once an inlined body finishes.
#[derive(Clone)]
struct Frame<'a> {
    stmts: &'a [Stmt],
    env: Env,
    bind: Option<Pattern>,
}

struct Elab<'a> {
    prog: &'a Program,
    recursive: HashSet<String>,
    used: HashSet<String>,
}

/// Elaborates `session` (its parameters stay free in the result).
pub fn elaborate(prog: &Program, session: &str) -> Result<Process, ElabError> {
    let decl = prog
        .session(session)
        .ok_or_else(|| ElabError::UnknownSession { pos: Pos::default(), name: session.to_string() })?;
    let mut e = Elab { prog, recursive: recursive_sessions(prog), used: HashSet::new() };
    if e.recursive.contains(&decl.name) {
        return Err(ElabError::OutsideFragment { pos: decl.pos, construct: "recursive session".into() });
    }
    let mut env = Env::new();
    for p in &decl.params {
        e.used.insert(p.name().to_string());
        env.insert(p.name().to_string(), Expr::Var(p.name().to_string()));
    }
    e.block(&decl.body, env, &[])
}

/// Sessions that can reach themselves through calls.
fn recursive_sessions(prog: &Program) -> HashSet<String> {
    let callees = |d: &SessionDecl| {
        let mut out = Vec::new();
        crate::surface::walk_stmts(&d.body, &mut |s: &Stmt| match &s.kind {
            StmtKind::Call(_, c) | StmtKind::Fork(ForkBody::Call(c)) => out.push(c.session.clone()),
            StmtKind::Recur1(f, _) => out.push(f.clone()),
            _ => {}
        });
        out
    };
    let graph: HashMap<&str, Vec<String>> = prog.sessions.iter().map(|d| (d.name.as_str(), callees(d))).collect();
    let mut out = HashSet::new();
    for d in &prog.sessions {
        let mut seen = HashSet::new();
        let mut stack = graph[d.name.as_str()].clone();
        while let Some(n) = stack.pop() {
            if n == d.name {
                out.insert(d.name.clone());
                break;
            }
            if seen.insert(n.clone()) {
                stack.extend(graph.get(n.as_str()).cloned().unwrap_or_default());
            }
        }
    }
    out
}

fn subst(e: &Expr, env: &Env) -> Expr {
    let go = |x: &Expr| subst(x, env);
    match e {
        Expr::Var(v) => env.get(v).cloned().unwrap_or_else(|| e.clone()),
        Expr::List(xs) => Expr::List(xs.iter().map(go).collect()),
        Expr::Tag(t, xs) => Expr::Tag(t.clone(), xs.iter().map(go).collect()),
        Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(go(a)), Box::new(go(b))),
        Expr::If(a, b, c) => Expr::If(Box::new(go(a)), Box::new(go(b)), Box::new(go(c))),
        Expr::Field(t, i, x) => Expr::Field(t.clone(), *i, Box::new(go(x))),
        other => other.clone(),
    }
}

/// Binds a pattern to an expression by substitution.
fn bind_value(p: &Pattern, v: Expr, env: &mut Env) {
    match p {
        Pattern::Wild => {}
        Pattern::Name(n) => {
            env.insert(n.clone(), v);
        }
        Pattern::Tagged(t, ps) => {
            for (i, sub) in ps.iter().enumerate() {
                bind_value(sub, Expr::Field(t.clone(), i, Box::new(v.clone())), env);
            }
        }
    }
}

impl<'a> Elab<'a> {
    fn fresh(&mut self, name: &str) -> String {
        if self.used.insert(name.to_string()) {
            return name.to_string();
        }
        (1..)
            .map(|k| format!("{name}_{k}"))
            .find(|n| self.used.insert(n.clone()))
            .expect("unbounded supply")
    }

    /// Renames a binder pattern, recording the renaming in `env`.
    fn binder(&mut self, p: &Pattern, env: &mut Env) -> Pattern {
        match p {
            Pattern::Wild => Pattern::Wild,
            Pattern::Name(n) => {
                let f = self.fresh(n);
                env.insert(n.clone(), Expr::Var(f.clone()));
                Pattern::Name(f)
            }
            Pattern::Tagged(t, ps) => Pattern::Tagged(t.clone(), ps.iter().map(|q| self.binder(q, env)).collect()),
        }
    }

    fn chan(&self, name: &str, env: &Env) -> String {
        match env.get(name) {
            Some(Expr::Var(v)) => v.clone(),
            _ => name.to_string(),
        }
    }

    fn outside(pos: Pos, construct: &str) -> ElabError {
        ElabError::OutsideFragment { pos, construct: construct.to_string() }
    }

    fn finish(&mut self, value: Expr, k: &[Frame<'a>]) -> Result<Process, ElabError> {
        match k.split_last() {
            None => Ok(Process::Inact),
            Some((frame, outer)) => {
                let mut env = frame.env.clone();
                if let Some(p) = &frame.bind {
                    bind_value(p, value, &mut env);
                }
                self.block(frame.stmts, env, outer)
            }
        }
    }

    /// Inlines a call whose continuation is `k`.
    fn call(
        &mut self,
        pos: Pos,
        call: &crate::surface::Call,
        env: &Env,
        k: &[Frame<'a>],
    ) -> Result<Process, ElabError> {
        let decl = self
            .prog
            .session(&call.session)
            .ok_or_else(|| ElabError::UnknownSession { pos, name: call.session.clone() })?;
        if self.recursive.contains(&decl.name) {
            return Err(Self::outside(pos, "recursive call"));
        }
        let mut callee_env = Env::new();
        for (p, a) in decl.params.iter().zip(&call.args) {
            callee_env.insert(p.name().to_string(), subst(a, env));
        }
        self.block(&decl.body, callee_env, k)
    }

    fn block(&mut self, stmts: &'a [Stmt], mut env: Env, k: &[Frame<'a>]) -> Result<Process, ElabError> {
        let Some((s, rest)) = stmts.split_first() else {
            return self.finish(Expr::Unit, k);
        };
        let pos = s.pos;
        let boxed = |p: Process| Box::new(p);
        Ok(match &s.kind {
            StmtKind::New(c) => {
                let f = self.fresh(c);
                env.insert(c.clone(), Expr::Var(f.clone()));
                Process::New(f, boxed(self.block(rest, env, k)?))
            }
            StmtKind::Send(c, e) => {
                let (c, e) = (self.chan(c, &env), subst(e, &env));
                Process::Send(c, e, boxed(self.block(rest, env, k)?))
            }
            StmtKind::Recv(p, c) => {
                let c = self.chan(c, &env);
                let p = self.binder(p, &mut env);
                Process::Recv(c, p, boxed(self.block(rest, env, k)?))
            }
            StmtKind::Sel1(c) => Process::Sel1(self.chan(c, &env), boxed(self.block(rest, env, k)?)),
            StmtKind::Sel2(c) => Process::Sel2(self.chan(c, &env), boxed(self.block(rest, env, k)?)),
            StmtKind::Offer(c, b1, b2) => {
                let c = self.chan(c, &env);
                let mut inner = k.to_vec();
                inner.push(Frame { stmts: rest, env: env.clone(), bind: None });
                let p1 = self.block(b1, env.clone(), &inner)?;
                let p2 = self.block(b2, env, &inner)?;
                Process::Offer(c, boxed(p1), boxed(p2))
            }
            StmtKind::Throw(c, d) => {
                let (c, d) = (self.chan(c, &env), self.chan(d, &env));
                Process::SendS(c, d, boxed(self.block(rest, env, k)?))
            }
            StmtKind::Catch(d, c) => {
                let c = self.chan(c, &env);
                let f = self.fresh(d);
                env.insert(d.clone(), Expr::Var(f.clone()));
                Process::RecvS(c, f, boxed(self.block(rest, env, k)?))
            }
            StmtKind::Fork(body) => {
                let child = match body {
                    ForkBody::Call(call) => self.call(pos, call, &env, &[])?,
                    ForkBody::Block(b) => self.block(b, env.clone(), &[])?,
                };
                Process::Par(boxed(child), boxed(self.block(rest, env, k)?))
            }
            StmtKind::Io(bind, action) => {
                let action = match action {
                    IoAction::Print(e) => IoAction::Print(subst(e, &env)),
                    IoAction::Readline => IoAction::Readline,
                };
                let bind = bind.as_ref().map(|p| self.binder(p, &mut env));
                Process::Io(action, bind, boxed(self.block(rest, env, k)?))
            }
            StmtKind::Return(e) => return self.finish(subst(e, &env), k),
            StmtKind::Call(bind, call) => {
                let mut outer = k.to_vec();
                outer.push(Frame { stmts: rest, env: env.clone(), bind: bind.clone() });
                return self.call(pos, call, &env, &outer);
            }
            StmtKind::Sel1N(_) | StmtKind::Sel2N(_) => return Err(Self::outside(pos, "n-ary selection")),
            StmtKind::OfferN(..) => return Err(Self::outside(pos, "n-ary offer")),
            StmtKind::Unwind(..) => return Err(Self::outside(pos, "unwind")),
            StmtKind::Recur1(..) => return Err(Self::outside(pos, "recur1")),
            StmtKind::Close(_) => return Err(Self::outside(pos, "close")),
            StmtKind::Connect(..) => return Err(Self::outside(pos, "connect")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse;

    #[test]
    fn inlines_calls_and_substitutes_results() {
        let prog = parse(
            "session client(c) { send c 123; send c 456; sel2 c; ans <- recv c; return ans }\n\
             session main() { c <- new; fork { x <- recv c; y <- recv c; offer c { send c (x + y) } { send c (x < y) } }; \
             r <- client(c); io print(r) }",
        )
        .unwrap();
        let p = elaborate(&prog, "main").unwrap();
        assert_eq!(
            p.to_string(),
            "new (λc. (recv c (λx. recv c (λy. offer c {send c (x + y). inact} {send c (x < y). inact})) \
             ||| send c 123. send c 456. sel2 c. recv c (λans. io print(ans). inact)))"
        );
    }

    #[test]
    fn renames_inlined_binders() {
        let prog = parse("session get(c) { x <- recv c; return x }\nsession main(a, b) { x <- get(a); y <- get(b); send a (x + y) }").unwrap();
        let p = elaborate(&prog, "main").unwrap();
        assert_eq!(p.to_string(), "recv a (λx. recv b (λx_1. send a (x + x_1). inact))");
    }

    #[test]
    fn rejects_constructs_outside_the_core() {
        let prog = parse("session main() { c <- new; close c }").unwrap();
        assert!(matches!(elaborate(&prog, "main"), Err(ElabError::OutsideFragment { .. })));
        let prog = parse("session loop(c) { send c 1; loop(c) }\nsession main() { c <- new; loop(c) }").unwrap();
        assert!(matches!(elaborate(&prog, "main"), Err(ElabError::OutsideFragment { .. })));
    }
}
