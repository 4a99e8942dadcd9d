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


//! Reconstruction of a channel's protocol from how a process uses it, used
//! to propose the split of a `Bot` entry between two parallel components.
//!
//! Unknown parts of a protocol are holes, later filled with `End`. Payload
//! types are solved by a small unifier: received values get type variables
//! that are resolved by how the values are used and by what the other
//! component sends. Payloads nothing constrains stay variables, which the
//! checker treats as matching any type.

use std::collections::HashMap;

use super::check::{SessionEnv, Sorting};
use super::Process;
use crate::surface::{BinOp, Expr, IoAction, Pattern, Program};
use crate::types::{SessionType, ValueType};

const HOLE: SessionType = SessionType::UVar(0);

fn b(u: SessionType) -> Box<SessionType> {
    Box::new(u)
}

fn bv(v: ValueType) -> Box<ValueType> {
    Box::new(v)
}

/// Protocol `u` for `c` such that the left component gets `u` and the right
/// component gets its dual.
pub(crate) fn split_protocol(
    prog: &Program,
    gamma: &Sorting,
    delta: &SessionEnv,
    c: &str,
    l: &Process,
    r: &Process,
) -> SessionType {
    let mut s = Synth { prog, next: 0, subst: HashMap::new() };
    let left = s.usage(gamma, delta, l, c);
    let right = s.usage(gamma, delta, r, c);
    let merged = s.merge(&left, &pdual(&right));
    s.fill(&merged)
}

struct Synth<'a> {
    prog: &'a Program,
    next: u32,
    subst: HashMap<u32, ValueType>,
}

impl Synth<'_> {
    fn fresh(&mut self) -> ValueType {
        self.next += 1;
        ValueType::Var(self.next)
    }

    fn resolve(&self, v: &ValueType) -> ValueType {
        match v {
            ValueType::Var(n) => match self.subst.get(n) {
                Some(t) => self.resolve(t),
                None => v.clone(),
            },
            ValueType::List(x) => ValueType::List(bv(self.resolve(x))),
            other => other.clone(),
        }
    }

    fn occurs(&self, n: u32, v: &ValueType) -> bool {
        match self.resolve(v) {
            ValueType::Var(m) => m == n,
            ValueType::List(x) => self.occurs(n, &x),
            _ => false,
        }
    }

    /// Best-effort unification; conflicts are left for the checker to find.
    fn unify(&mut self, x: &ValueType, y: &ValueType) {
        match (self.resolve(x), self.resolve(y)) {
            (ValueType::Var(n), ValueType::Var(m)) if n == m => {}
            (ValueType::Var(n), t) | (t, ValueType::Var(n)) => {
                if !self.occurs(n, &t) {
                    self.subst.insert(n, t);
                }
            }
            (ValueType::List(a), ValueType::List(c)) => self.unify(&a, &c),
            _ => {}
        }
    }

    fn expr(&mut self, gamma: &Sorting, e: &Expr) -> ValueType {
        match e {
            Expr::Int(_) => ValueType::Int,
            Expr::Bool(_) => ValueType::Bool,
            Expr::Str(_) => ValueType::Str,
            Expr::Unit => ValueType::Unit,
            Expr::Var(v) => gamma.get(v).cloned().unwrap_or_else(|| self.fresh()),
            Expr::List(xs) => {
                let elem = self.fresh();
                for x in xs {
                    let t = self.expr(gamma, x);
                    self.unify(&elem, &t);
                }
                ValueType::List(bv(elem))
            }
            Expr::Bin(op, x, y) => {
                for side in [x, y] {
                    let t = self.expr(gamma, side);
                    self.unify(&t, &ValueType::Int);
                }
                match op {
                    BinOp::Add | BinOp::Sub => ValueType::Int,
                    BinOp::Lt | BinOp::Eq => ValueType::Bool,
                }
            }
            Expr::If(c, x, y) => {
                let t = self.expr(gamma, c);
                self.unify(&t, &ValueType::Bool);
                let (tx, ty) = (self.expr(gamma, x), self.expr(gamma, y));
                self.unify(&tx, &ty);
                tx
            }
            Expr::Tag(tag, args) => {
                let fields = self.payload(tag);
                for (x, want) in args.iter().zip(fields) {
                    let t = self.expr(gamma, x);
                    self.unify(&t, &want);
                }
                ValueType::Tagged(tag.clone())
            }
            Expr::Field(tag, i, x) => {
                let t = self.expr(gamma, x);
                self.unify(&t, &ValueType::Tagged(tag.clone()));
                self.payload(tag).get(*i).cloned().unwrap_or_else(|| self.fresh())
            }
        }
    }

    fn payload(&self, tag: &str) -> Vec<ValueType> {
        self.prog.data(tag).map(|d| d.payload.clone()).unwrap_or_default()
    }

    /// Binds a pattern's names, returning the type of the matched value.
    fn bind(&mut self, p: &Pattern, gamma: &mut Sorting) -> ValueType {
        match p {
            Pattern::Wild => self.fresh(),
            Pattern::Name(n) => {
                let v = self.fresh();
                gamma.insert(n.clone(), v.clone());
                v
            }
            Pattern::Tagged(tag, subs) => {
                for (sub, t) in subs.iter().zip(self.payload(tag)) {
                    let v = self.bind(sub, gamma);
                    self.unify(&v, &t);
                }
                ValueType::Tagged(tag.clone())
            }
        }
    }

    /// The partial protocol `p` follows on `x`.
    fn usage(&mut self, gamma: &Sorting, known: &SessionEnv, p: &Process, x: &str) -> SessionType {
        match p {
            Process::Inact => SessionType::End,
            Process::Send(c, e, k) => {
                let t = self.expr(gamma, e);
                let rest = self.usage(gamma, known, k, x);
                if c == x {
                    SessionType::Send(t, b(rest))
                } else {
                    rest
                }
            }
            Process::Recv(c, pat, k) => {
                let mut g = gamma.clone();
                let t = self.bind(pat, &mut g);
                let rest = self.usage(&g, known, k, x);
                if c == x {
                    SessionType::Recv(t, b(rest))
                } else {
                    rest
                }
            }
            Process::Io(action, bind, k) => {
                let mut g = gamma.clone();
                match action {
                    IoAction::Print(e) => {
                        self.expr(gamma, e);
                    }
                    IoAction::Readline => {
                        if let Some(pat) = bind {
                            let t = self.bind(pat, &mut g);
                            self.unify(&t, &ValueType::Str);
                        }
                    }
                }
                self.usage(&g, known, k, x)
            }
            Process::Sel1(c, k) if c == x => SessionType::Select(b(self.usage(gamma, known, k, x)), b(HOLE)),
            Process::Sel2(c, k) if c == x => SessionType::Select(b(HOLE), b(self.usage(gamma, known, k, x))),
            Process::Offer(c, l, r) => {
                let (ul, ur) = (self.usage(gamma, known, l, x), self.usage(gamma, known, r, x));
                if c == x {
                    SessionType::Offer(b(ul), b(ur))
                } else {
                    self.merge(&ul, &ur)
                }
            }
            Process::SendS(c, d, k) if c == x => {
                let thrown = if k.free_names().contains(d) {
                    match known.get(d) {
                        Some(SessionType::Bot) => pdual(&self.usage(gamma, known, k, d)),
                        _ => HOLE,
                    }
                } else {
                    match known.get(d) {
                        Some(SessionType::Bot) | None => HOLE,
                        Some(u) => u.clone(),
                    }
                };
                SessionType::Throw(b(thrown), b(self.usage(gamma, known, k, x)))
            }
            Process::SendS(_, d, _) if d == x => HOLE,
            Process::RecvS(c, d, k) if c == x => {
                let thrown = self.usage(gamma, known, k, d);
                SessionType::Catch(b(thrown), b(self.usage(gamma, known, k, x)))
            }
            Process::Par(l, r) => match (l.free_names().contains(x), r.free_names().contains(x)) {
                (true, true) => HOLE,
                (true, false) => self.usage(gamma, known, l, x),
                (false, true) => self.usage(gamma, known, r, x),
                (false, false) => SessionType::End,
            },
            Process::New(c, k) => {
                let mut inner = known.clone();
                inner.insert(c.clone(), SessionType::Bot);
                self.usage(gamma, &inner, k, x)
            }
            Process::Sel1(_, k) | Process::Sel2(_, k) | Process::SendS(_, _, k) | Process::RecvS(_, _, k) => {
                self.usage(gamma, known, k, x)
            }
        }
    }

    fn merge(&mut self, x: &SessionType, y: &SessionType) -> SessionType {
        use SessionType::*;
        match (x, y) {
            (UVar(_), _) => y.clone(),
            (_, UVar(_)) => x.clone(),
            (Send(v, k), Send(w, j)) | (Recv(v, k), Recv(w, j)) => {
                self.unify(v, w);
                let rest = b(self.merge(k, j));
                if matches!(x, Send(..)) {
                    Send(v.clone(), rest)
                } else {
                    Recv(v.clone(), rest)
                }
            }
            (Select(a, c), Select(d, e)) => Select(b(self.merge(a, d)), b(self.merge(c, e))),
            (Offer(a, c), Offer(d, e)) => Offer(b(self.merge(a, d)), b(self.merge(c, e))),
            (Throw(a, c), Throw(d, e)) => Throw(b(self.merge(a, d)), b(self.merge(c, e))),
            (Catch(a, c), Catch(d, e)) => Catch(b(self.merge(a, d)), b(self.merge(c, e))),
            _ => x.clone(),
        }
    }

    fn fill(&self, u: &SessionType) -> SessionType {
        use SessionType::*;
        match u {
            UVar(_) => End,
            Send(v, k) => Send(self.resolve(v), b(self.fill(k))),
            Recv(v, k) => Recv(self.resolve(v), b(self.fill(k))),
            Select(x, y) => Select(b(self.fill(x)), b(self.fill(y))),
            Offer(x, y) => Offer(b(self.fill(x)), b(self.fill(y))),
            Throw(x, y) => Throw(b(self.fill(x)), b(self.fill(y))),
            Catch(x, y) => Catch(b(self.fill(x)), b(self.fill(y))),
            other => other.clone(),
        }
    }
}

fn pdual(u: &SessionType) -> SessionType {
    use SessionType::*;
    match u {
        Send(v, k) => Recv(v.clone(), b(pdual(k))),
        Recv(v, k) => Send(v.clone(), b(pdual(k))),
        Select(x, y) => Offer(b(pdual(x)), b(pdual(y))),
        Offer(x, y) => Select(b(pdual(x)), b(pdual(y))),
        Throw(x, k) => Catch(x.clone(), b(pdual(k))),
        Catch(x, k) => Throw(x.clone(), b(pdual(k))),
        other => other.clone(),
    }
}
