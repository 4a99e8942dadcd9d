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


//! Threads an environment row through a session body, statement by
//! statement, emitting equations and deferred constraints.

use std::collections::HashMap;

use super::error::InferError;
use super::solver::{clash_error, render_value, Deferred};
use super::term::{CopyMap, Id, Imports, Node, VId, VNode};
use super::{Ctx, SigGraph};
use crate::surface::*;

/// One channel of the threaded row: its remaining obligation and the
/// recursion binders unwound on it so far (level, `Rec` node).
#[derive(Debug, Clone)]
pub struct Slot {
    pub ty: Id,
    pub binders: Vec<(u32, Id)>,
}

#[derive(Debug, Clone, Default)]
pub struct State {
    pub slots: Vec<Slot>,
}

impl State {
    fn push(&mut self, ty: Id) -> usize {
        self.slots.push(Slot { ty, binders: Vec::new() });
        self.slots.len() - 1
    }
}

#[derive(Debug, Clone, Default)]
pub struct Scope {
    pub chans: HashMap<String, usize>,
    pub vals: HashMap<String, VId>,
}

/// Per-body facts that do not flow into forked children.
#[derive(Debug, Default)]
pub struct Frame {
    pub ended_tail: bool,
}

impl Ctx<'_> {
    fn chan(&self, scope: &Scope, name: &str) -> usize {
        scope.chans[name]
    }

    /// Requires the channel's current type `entry` to have the shape the
    /// primitive needs.
    fn expect_shape(&mut self, pos: Pos, entry: Id, shape: Id) -> Result<(), InferError> {
        self.terms.unify(entry, shape).map_err(|c| clash_error(&self.terms, pos, entry, shape, c))
    }

    fn expect_value(&mut self, pos: Pos, expected: VId, found: VId) -> Result<(), InferError> {
        self.terms.vunify(expected, found).map_err(|_| InferError::Type {
            pos,
            expected: render_value(&self.terms, expected),
            found: render_value(&self.terms, found),
            note: None,
        })
    }

    fn end(&mut self) -> Id {
        self.terms.mk(Node::End)
    }

    fn require_end(&mut self, pos: Pos, id: Id, why: &str) -> Result<(), InferError> {
        let end = self.end();
        self.terms.unify(id, end).map_err(|c| {
            let mut e = clash_error(&self.terms, pos, end, id, c);
            if let InferError::Type { note, .. } = &mut e {
                note.get_or_insert_with(|| why.to_string());
            }
            e
        })
    }

    pub(crate) fn data_type(&mut self, tag: &str) -> VId {
        self.terms.vmk(VNode::Tagged(tag.to_string()))
    }

    fn payload(&mut self, tag: &str) -> Vec<VId> {
        let payload = self.prog.data(tag).map(|d| d.payload.clone()).unwrap_or_default();
        let mut vars = HashMap::new();
        payload.iter().map(|v| self.terms.import_value(v, &mut vars)).collect()
    }

    pub(crate) fn expr(&mut self, e: &Expr, scope: &Scope, pos: Pos) -> Result<VId, InferError> {
        let t = &mut self.terms;
        Ok(match e {
            Expr::Int(_) => t.vmk(VNode::Int),
            Expr::Bool(_) => t.vmk(VNode::Bool),
            Expr::Str(_) => t.vmk(VNode::Str),
            Expr::Unit => t.vmk(VNode::Unit),
            Expr::List(items) => {
                let elem = t.vfresh();
                for x in items {
                    let tx = self.expr(x, scope, pos)?;
                    self.expect_value(pos, elem, tx)?;
                }
                self.terms.vmk(VNode::List(elem))
            }
            Expr::Var(v) => scope.vals[v],
            Expr::Bin(op, a, b) => {
                let int = t.vmk(VNode::Int);
                let ta = self.expr(a, scope, pos)?;
                self.expect_value(pos, int, ta)?;
                let tb = self.expr(b, scope, pos)?;
                self.expect_value(pos, int, tb)?;
                match op {
                    BinOp::Add | BinOp::Sub => int,
                    BinOp::Lt | BinOp::Eq => self.terms.vmk(VNode::Bool),
                }
            }
            Expr::If(c, a, b) => {
                let boolean = t.vmk(VNode::Bool);
                let tc = self.expr(c, scope, pos)?;
                self.expect_value(pos, boolean, tc)?;
                let ta = self.expr(a, scope, pos)?;
                let tb = self.expr(b, scope, pos)?;
                self.expect_value(pos, ta, tb)?;
                ta
            }
            Expr::Tag(tag, args) => {
                let payload = self.payload(tag);
                for (x, want) in args.iter().zip(payload) {
                    let tx = self.expr(x, scope, pos)?;
                    self.expect_value(pos, want, tx)?;
                }
                self.data_type(tag)
            }
            Expr::Field(tag, i, x) => {
                let want = self.data_type(tag);
                let tx = self.expr(x, scope, pos)?;
                self.expect_value(pos, want, tx)?;
                self.payload(tag)[*i]
            }
        })
    }

    fn bind(&mut self, p: &Pattern, v: VId, scope: &mut Scope, pos: Pos) -> Result<(), InferError> {
        match p {
            Pattern::Wild => Ok(()),
            Pattern::Name(n) => {
                scope.vals.insert(n.clone(), v);
                Ok(())
            }
            Pattern::Tagged(tag, subs) => {
                let want = self.data_type(tag);
                self.expect_value(pos, want, v)?;
                let payload = self.payload(tag);
                for (s, pv) in subs.iter().zip(payload) {
                    self.bind(s, pv, scope, pos)?;
                }
                Ok(())
            }
        }
    }

    pub(crate) fn block(
        &mut self,
        b: &Block,
        mut state: State,
        scope: &mut Scope,
        frame: &mut Frame,
    ) -> Result<(State, VId), InferError> {
        let mut result = self.terms.vmk(VNode::Unit);
        for s in b {
            let (next, r) = self.stmt(s, state, scope, frame)?;
            self.solver.solve(&mut self.terms)?;
            state = next;
            result = r;
        }
        Ok((state, result))
    }

    fn stmt(
        &mut self,
        s: &Stmt,
        mut st: State,
        scope: &mut Scope,
        frame: &mut Frame,
    ) -> Result<(State, VId), InferError> {
        let pos = s.pos;
        let unit = self.terms.vmk(VNode::Unit);
        match &s.kind {
            StmtKind::New(x) => {
                let bot = self.terms.mk(Node::Bot);
                let i = st.push(bot);
                scope.chans.insert(x.clone(), i);
            }
            StmtKind::Send(c, e) => {
                let v = self.expr(e, scope, pos)?;
                let i = self.chan(scope, c);
                let k = self.terms.fresh();
                let shape = self.terms.mk(Node::Send(v, k));
                self.expect_shape(pos, st.slots[i].ty, shape)?;
                st.slots[i].ty = k;
            }
            StmtKind::Recv(p, c) => {
                let i = self.chan(scope, c);
                let v = self.terms.vfresh();
                let k = self.terms.fresh();
                let shape = self.terms.mk(Node::Recv(v, k));
                self.expect_shape(pos, st.slots[i].ty, shape)?;
                st.slots[i].ty = k;
                self.bind(p, v, scope, pos)?;
                return Ok((st, v));
            }
            StmtKind::Sel1(c) | StmtKind::Sel2(c) | StmtKind::Sel1N(c) | StmtKind::Sel2N(c) => {
                let i = self.chan(scope, c);
                let (a, b) = (self.terms.fresh(), self.terms.fresh());
                let n = matches!(s.kind, StmtKind::Sel1N(_) | StmtKind::Sel2N(_));
                let shape = self.terms.mk(if n { Node::SelectN(a, b) } else { Node::Select(a, b) });
                self.expect_shape(pos, st.slots[i].ty, shape)?;
                let first = matches!(s.kind, StmtKind::Sel1(_) | StmtKind::Sel1N(_));
                st.slots[i].ty = if first { a } else { b };
            }
            StmtKind::Offer(c, b1, b2) | StmtKind::OfferN(c, b1, b2) => {
                let i = self.chan(scope, c);
                let (a, b) = (self.terms.fresh(), self.terms.fresh());
                let n = matches!(s.kind, StmtKind::OfferN(..));
                let shape = self.terms.mk(if n { Node::OfferN(a, b) } else { Node::Offer(a, b) });
                self.expect_shape(pos, st.slots[i].ty, shape)?;
                let mut left = st.clone();
                left.slots[i].ty = a;
                let mut right = st;
                right.slots[i].ty = b;
                let (left, r1) = self.block(b1, left, &mut scope.clone(), frame)?;
                let (right, r2) = self.block(b2, right, &mut scope.clone(), frame)?;
                let merged = self.merge(pos, left, right)?;
                self.expect_value(pos, r1, r2)?;
                return Ok((merged, r1));
            }
            StmtKind::Throw(c, d) => {
                let (i, j) = (self.chan(scope, c), self.chan(scope, d));
                let (u1, u2) = (self.terms.fresh(), self.terms.fresh());
                let shape = self.terms.mk(Node::Throw(u1, u2));
                self.expect_shape(pos, st.slots[i].ty, shape)?;
                st.slots[i].ty = u2;
                // The thrown endpoint takes `u1` out of d's obligation.
                let rest = self.terms.fresh();
                self.solver.push(Deferred::Comp { a: rest, b: u1, c: st.slots[j].ty, pos });
                st.slots[j] = Slot { ty: rest, binders: Vec::new() };
            }
            StmtKind::Catch(x, c) => {
                let i = self.chan(scope, c);
                let (u1, u2) = (self.terms.fresh(), self.terms.fresh());
                let shape = self.terms.mk(Node::Catch(u1, u2));
                self.expect_shape(pos, st.slots[i].ty, shape)?;
                st.slots[i].ty = u2;
                let j = st.push(u1);
                scope.chans.insert(x.clone(), j);
            }
            StmtKind::Fork(body) => {
                let mut child = State::default();
                for _ in 0..st.slots.len() {
                    let v = self.terms.fresh();
                    child.push(v);
                }
                let pre: Vec<Id> = child.slots.iter().map(|s| s.ty).collect();
                let mut child_frame = Frame::default();
                let child = match body {
                    ForkBody::Block(b) => self.block(b, child, &mut scope.clone(), &mut child_frame)?.0,
                    ForkBody::Call(call) => self.call(call, child, scope, pos, &mut child_frame)?.0,
                };
                for slot in &child.slots {
                    self.require_end(pos, slot.ty, "a forked process must use up its channels")?;
                }
                for (i, a) in pre.into_iter().enumerate() {
                    let rest = self.terms.fresh();
                    self.solver.push(Deferred::Comp { a, b: rest, c: st.slots[i].ty, pos });
                    st.slots[i].ty = rest;
                }
            }
            StmtKind::Io(bind, action) => {
                let v = match action {
                    IoAction::Print(e) => {
                        self.expr(e, scope, pos)?;
                        unit
                    }
                    IoAction::Readline => self.terms.vmk(VNode::Str),
                };
                if let Some(p) = bind {
                    self.bind(p, v, scope, pos)?;
                }
                return Ok((st, v));
            }
            StmtKind::Unwind(level, c) => {
                let i = self.chan(scope, c);
                self.unwind(pos, &mut st.slots[i], *level, c)?;
            }
            StmtKind::Recur1(f, c) => {
                let i = self.chan(scope, c);
                let sig = self.signature_for(f, pos, true);
                self.expect_shape(pos, st.slots[i].ty, sig.pre[0])?;
                for j in 0..st.slots.len() {
                    if j != i {
                        let ty = st.slots[j].ty;
                        self.require_end(pos, ty, "recur1 needs every other channel to be finished")?;
                    }
                }
                frame.ended_tail = true;
                for slot in &mut st.slots {
                    *slot = Slot { ty: self.terms.fresh(), binders: Vec::new() };
                }
                let r = self.terms.vfresh();
                return Ok((st, r));
            }
            StmtKind::Close(c) => {
                let i = self.chan(scope, c);
                let close = self.terms.mk(Node::Close);
                self.expect_shape(pos, st.slots[i].ty, close)?;
                st.slots[i] = Slot { ty: self.end(), binders: Vec::new() };
                frame.ended_tail = true;
            }
            StmtKind::Connect(x, svc) => {
                let ty = self.prog.service(svc).map(|s| s.ty.clone()).unwrap_or(crate::types::SessionType::End);
                let id = self.terms.import(&ty, &mut Imports::default());
                let i = st.push(id);
                scope.chans.insert(x.clone(), i);
            }
            StmtKind::Return(e) => {
                let v = self.expr(e, scope, pos)?;
                return Ok((st, v));
            }
            StmtKind::Call(bind, call) => {
                let (st, v) = self.call(call, st, scope, pos, frame)?;
                if let Some(p) = bind {
                    self.bind(p, v, scope, pos)?;
                }
                return Ok((st, v));
            }
        }
        Ok((st, unit))
    }

    fn unwind(&mut self, pos: Pos, slot: &mut Slot, level: u32, c: &str) -> Result<(), InferError> {
        let fold_err = |reason: String| InferError::Fold { pos, session: c.to_string(), reason };
        let rec = if let Some(at) = slot.binders.iter().position(|(l, _)| *l == level) {
            // Back to an enclosing binder: the current obligation is the
            // recursion variable itself.
            let r = slot.binders[at].1;
            self.expect_shape(pos, slot.ty, r)?;
            slot.binders.truncate(at + 1);
            r
        } else {
            let e = self.terms.find(slot.ty);
            let r = match self.terms.node(e).clone() {
                Node::Rec(k, _) if k == level => e,
                Node::Rec(k, _) => {
                    return Err(fold_err(format!("`unwind {level}` on a type bound at level {k}")));
                }
                Node::Var => {
                    let body = self.terms.fresh();
                    let r = self.terms.mk(Node::Rec(level, body));
                    self.terms.unify(e, r).expect("variable unifies");
                    r
                }
                _ => {
                    return Err(fold_err(format!(
                        "`unwind {level}` on `{c}` after its type is already fixed to `{}`",
                        super::solver::render(&self.terms, e)
                    )))
                }
            };
            slot.binders.retain(|(l, _)| *l < level);
            slot.binders.push((level, r));
            r
        };
        slot.ty = match self.terms.node(rec) {
            Node::Rec(_, body) => *body,
            _ => unreachable!("binders hold Rec nodes"),
        };
        Ok(())
    }

    /// Joins the rows left by two branches; channels that exist in only one
    /// branch must be finished there.
    fn merge(&mut self, pos: Pos, mut a: State, b: State) -> Result<State, InferError> {
        let n = a.slots.len().max(b.slots.len());
        for i in 0..n {
            match (a.slots.get(i).map(|s| s.ty), b.slots.get(i).map(|s| s.ty)) {
                (Some(x), Some(y)) => {
                    self.terms.unify(x, y).map_err(|c| {
                        let mut e = clash_error(&self.terms, pos, x, y, c);
                        if let InferError::Type { note, .. } = &mut e {
                            note.get_or_insert_with(|| "the branches leave a channel in different states".into());
                        }
                        e
                    })?;
                    let common = a.slots[i]
                        .binders
                        .iter()
                        .zip(&b.slots[i].binders)
                        .take_while(|(p, q)| p.0 == q.0 && self.terms.find(p.1) == self.terms.find(q.1))
                        .count();
                    a.slots[i].binders.truncate(common);
                }
                (Some(x), None) | (None, Some(x)) => {
                    self.require_end(pos, x, "a channel created in one branch must be finished there")?;
                    if i >= a.slots.len() {
                        a.push(x);
                    }
                }
                (None, None) => unreachable!(),
            }
        }
        Ok(a)
    }

    /// The signature used at a call: shared for sessions being inferred
    /// together, otherwise a fresh copy.
    fn signature_for(&mut self, name: &str, pos: Pos, tail_call: bool) -> SigGraph {
        let sig = self.sigs[name].clone();
        if self.scc.contains(name) {
            if !tail_call {
                self.recursive_calls.push((pos, name.to_string()));
            }
            return sig;
        }
        let mut map = CopyMap::default();
        let t = &mut self.terms;
        SigGraph {
            params: sig.params.clone(),
            pre: sig.pre.iter().map(|x| t.copy(*x, &mut map)).collect(),
            post: sig.post.iter().map(|x| t.copy(*x, &mut map)).collect(),
            extras: sig.extras.iter().map(|x| t.copy(*x, &mut map)).collect(),
            values: sig.values.iter().map(|x| t.vcopy(*x, &mut map)).collect(),
            result: t.vcopy(sig.result, &mut map),
            ended_tail: sig.ended_tail,
        }
    }

    fn call(
        &mut self,
        call: &Call,
        mut st: State,
        scope: &Scope,
        pos: Pos,
        frame: &mut Frame,
    ) -> Result<(State, VId), InferError> {
        let sig = self.signature_for(&call.session, pos, false);
        let (mut ci, mut vi) = (0, 0);
        let mut used = Vec::new();
        for (param, arg) in sig.params.iter().zip(&call.args) {
            if param.is_chan() {
                let Expr::Var(name) = arg else { unreachable!("resolved") };
                let i = self.chan(scope, name);
                self.expect_shape(pos, st.slots[i].ty, sig.pre[ci])?;
                st.slots[i].ty = sig.post[ci];
                used.push(i);
                ci += 1;
            } else {
                let v = self.expr(arg, scope, pos)?;
                self.expect_value(pos, sig.values[vi], v)?;
                vi += 1;
            }
        }
        if sig.ended_tail {
            for j in 0..st.slots.len() {
                if !used.contains(&j) {
                    let ty = st.slots[j].ty;
                    self.require_end(
                        pos,
                        ty,
                        &format!("`{}` needs every channel it is not given to be finished", call.session),
                    )?;
                }
            }
            frame.ended_tail = true;
        }
        for x in sig.extras {
            st.push(x);
        }
        Ok((st, sig.result))
    }
}
