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


//! Session-type reconstruction: every session gets a pre- and post-row of
//! channel obligations, a result type, and the ended-tail flag.

mod error;
mod session;
pub mod signature;
mod solver;
pub mod term;

use std::collections::{HashMap, HashSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

pub use error::InferError;
pub use signature::{parse_signature, Expectation};

use crate::surface::{resolve, walk_stmts, ForkBody, Param, Program, SessionDecl, StmtKind};
use crate::types::{dual, EnvRow, LevelExpr, RowTail, SessionType, ValueType};
use session::{Frame, Scope, Slot, State};
use solver::Solver;
use term::{CycleError, Export, Id, Terms, VId};

/// A parameter of an inferred session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ParamSig {
    Chan { name: String, level: LevelExpr },
    Value { name: String, ty: ValueType },
}

/// The inferred type of one session definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionSignature {
    pub name: String,
    pub params: Vec<ParamSig>,
    pub pre: EnvRow,
    pub post: EnvRow,
    pub result: ValueType,
    /// Every channel below the parameters (the row tail) must be finished.
    pub ended_tail: bool,
}

impl SessionSignature {
    pub fn chan_count(&self) -> usize {
        self.pre.entries.len()
    }

    /// Channels the session creates and leaves in its post row.
    pub fn extras(&self) -> &[SessionType] {
        &self.post.entries[self.chan_count()..]
    }
}

/// Two usages of one channel that a fork composed into `Bot`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BotSplit {
    pub session: String,
    pub left: SessionType,
    pub right: SessionType,
}

#[derive(Debug, Clone)]
pub struct Inference {
    /// In declaration order.
    pub signatures: Vec<SessionSignature>,
    pub bot_splits: Vec<BotSplit>,
}

impl Inference {
    pub fn get(&self, name: &str) -> Option<&SessionSignature> {
        self.signatures.iter().find(|s| s.name == name)
    }
}

/// A signature in term form, shared by the sessions of one recursive group
/// and copied at every other call.
#[derive(Debug, Clone)]
pub(crate) struct SigGraph {
    pub params: Vec<Param>,
    pub pre: Vec<Id>,
    pub post: Vec<Id>,
    pub extras: Vec<Id>,
    pub values: Vec<VId>,
    pub result: VId,
    pub ended_tail: bool,
}

pub(crate) struct Ctx<'p> {
    pub prog: &'p Program,
    pub terms: Terms,
    pub solver: Solver,
    pub sigs: HashMap<String, SigGraph>,
    pub scc: HashSet<String>,
    pub recursive_calls: Vec<(crate::surface::Pos, String)>,
}

/// The callees of a session: plain calls, forked calls and `recur1`.
fn callees(d: &SessionDecl) -> Vec<(String, bool)> {
    let mut out = Vec::new();
    walk_stmts(&d.body, &mut |s| match &s.kind {
        StmtKind::Call(_, c) => out.push((c.session.clone(), false)),
        StmtKind::Fork(ForkBody::Call(c)) => out.push((c.session.clone(), true)),
        StmtKind::Recur1(f, _) => out.push((f.clone(), false)),
        _ => {}
    });
    out
}

/// Sessions whose callers must have finished all other channels: those
/// that close a channel or recur, directly or through a plain call. Work
/// inside a forked block belongs to the child and does not count.
fn ended_tail_sessions(p: &Program) -> HashSet<String> {
    /// A statement that ends the session itself (`true`), or a call.
    type Fact = (bool, Option<String>);
    fn direct(b: &[crate::surface::Stmt], out: &mut Vec<Fact>) {
        for s in b {
            match &s.kind {
                StmtKind::Close(_) | StmtKind::Recur1(..) => out.push((true, None)),
                StmtKind::Call(_, c) => out.push((false, Some(c.session.clone()))),
                StmtKind::Offer(_, a, b) | StmtKind::OfferN(_, a, b) => {
                    direct(a, out);
                    direct(b, out);
                }
                _ => {}
            }
        }
    }
    let facts: Vec<(String, Vec<Fact>)> = p
        .sessions
        .iter()
        .map(|d| {
            let mut v = Vec::new();
            direct(&d.body, &mut v);
            (d.name.clone(), v)
        })
        .collect();
    let mut set = HashSet::new();
    loop {
        let before = set.len();
        for (name, fs) in &facts {
            if fs.iter().any(|(own, callee)| *own || callee.as_ref().is_some_and(|c| set.contains(c))) {
                set.insert(name.clone());
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

/// Infers every session of a program.
pub fn infer_program(p: &Program) -> Result<Inference, InferError> {
    resolve(p)?;
    let mut graph = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..p.sessions.len()).map(|i| graph.add_node(i)).collect();
    let index: HashMap<&str, usize> = p.sessions.iter().enumerate().map(|(i, s)| (s.name.as_str(), i)).collect();
    for (i, d) in p.sessions.iter().enumerate() {
        for (callee, _) in callees(d) {
            graph.add_edge(nodes[i], nodes[index[callee.as_str()]], ());
        }
    }
    let ended = ended_tail_sessions(p);
    let mut ctx = Ctx {
        prog: p,
        terms: Terms::new(),
        solver: Solver::default(),
        sigs: HashMap::new(),
        scc: HashSet::new(),
        recursive_calls: Vec::new(),
    };
    let mut out: Vec<Option<SessionSignature>> = vec![None; p.sessions.len()];
    let mut bot_splits = Vec::new();
    for group in tarjan_scc(&graph) {
        let mut members: Vec<usize> = group.iter().map(|n| graph[*n]).collect();
        members.sort_unstable();
        let decls: Vec<&SessionDecl> = members.iter().map(|i| &p.sessions[*i]).collect();
        let (sigs, splits) = ctx.infer_group(&decls, &ended)?;
        for (i, sig) in members.into_iter().zip(sigs) {
            out[i] = Some(sig);
        }
        bot_splits.extend(splits);
    }
    Ok(Inference { signatures: out.into_iter().map(|s| s.expect("every session inferred")).collect(), bot_splits })
}

impl Ctx<'_> {
    fn infer_group(
        &mut self,
        decls: &[&SessionDecl],
        ended: &HashSet<String>,
    ) -> Result<(Vec<SessionSignature>, Vec<BotSplit>), InferError> {
        self.scc = decls.iter().map(|d| d.name.clone()).collect();
        self.recursive_calls.clear();
        for d in decls {
            let mut sig = SigGraph {
                params: d.params.clone(),
                pre: Vec::new(),
                post: Vec::new(),
                extras: Vec::new(),
                values: Vec::new(),
                result: self.terms.vfresh(),
                ended_tail: ended.contains(&d.name),
            };
            for param in &d.params {
                match param {
                    Param::Chan(_) => {
                        sig.pre.push(self.terms.fresh());
                        sig.post.push(self.terms.fresh());
                    }
                    Param::Value(_, v) => {
                        let id = self.terms.import_value(v, &mut HashMap::new());
                        sig.values.push(id);
                    }
                }
            }
            self.sigs.insert(d.name.clone(), sig);
        }
        let splits_from = self.solver.bot_splits.len();
        let mut split_owner = Vec::new();
        for d in decls {
            let sig = self.sigs[&d.name].clone();
            let mut state = State::default();
            let mut scope = Scope::default();
            let (mut ci, mut vi) = (0, 0);
            for param in &d.params {
                match param {
                    Param::Chan(n) => {
                        state.slots.push(Slot { ty: sig.pre[ci], binders: Vec::new() });
                        scope.chans.insert(n.clone(), ci);
                        ci += 1;
                    }
                    Param::Value(n, _) => {
                        scope.vals.insert(n.clone(), sig.values[vi]);
                        vi += 1;
                    }
                }
            }
            let before = self.solver.bot_splits.len();
            let mut frame = Frame::default();
            let (state, result) = self.block(&d.body, state, &mut scope, &mut frame)?;
            for (slot, post) in state.slots.iter().zip(&sig.post) {
                self.terms
                    .unify(slot.ty, *post)
                    .map_err(|c| solver::clash_error(&self.terms, d.pos, *post, slot.ty, c))?;
            }
            self.terms.vunify(sig.result, result).map_err(|_| InferError::Type {
                pos: d.pos,
                expected: solver::render_value(&self.terms, sig.result),
                found: solver::render_value(&self.terms, result),
                note: Some("result type of a recursive session".into()),
            })?;
            let extras = state.slots[sig.pre.len()..].iter().map(|s| s.ty).collect();
            self.sigs.get_mut(&d.name).expect("skeleton").extras = extras;
            split_owner.extend(std::iter::repeat_n(d.name.clone(), self.solver.bot_splits.len() - before));
        }
        if let Some(pos) = self.solver.finish(&mut self.terms)? {
            return Err(InferError::Ambiguity {
                pos,
                session: decls[0].name.clone(),
                detail: "a duality between two unconstrained protocols remains".into(),
            });
        }
        for (pos, callee) in std::mem::take(&mut self.recursive_calls) {
            if !self.sigs[&callee].extras.is_empty() {
                return Err(InferError::Type {
                    pos,
                    expected: "a recursive session that creates no channels".into(),
                    found: format!("`{callee}` creating {} channel(s)", self.sigs[&callee].extras.len()),
                    note: Some("use recur1 for loops that create channels".into()),
                });
            }
        }
        self.scc.clear();
        let mut sigs = Vec::new();
        for d in decls {
            sigs.push(self.export(d)?);
        }
        let splits = self.solver.bot_splits[splits_from..]
            .iter()
            .zip(split_owner)
            .map(|((a, b), session)| {
                let mut ex = Export::lenient(&self.terms);
                BotSplit { session, left: ex.session(*a).expect("lenient"), right: ex.session(*b).expect("lenient") }
            })
            .collect();
        Ok((sigs, splits))
    }

    fn export(&self, d: &SessionDecl) -> Result<SessionSignature, InferError> {
        let sig = &self.sigs[&d.name];
        let mut ex = Export::new(&self.terms);
        let cycle = |e: CycleError| {
            let mut recurs = false;
            walk_stmts(&d.body, &mut |s| recurs |= matches!(s.kind, StmtKind::Recur1(..)));
            match e {
                CycleError::Shadowed(k) => InferError::Fold {
                    pos: d.pos,
                    session: d.name.clone(),
                    reason: format!("a recursion variable at level {k} is shadowed by an inner binder"),
                },
                CycleError::NoBinder if recurs => InferError::Fold {
                    pos: d.pos,
                    session: d.name.clone(),
                    reason: "the recursion has no unwind to name its binder".into(),
                },
                CycleError::NoBinder => InferError::Occurs { pos: d.pos, session: d.name.clone() },
            }
        };
        let tail = RowTail::Var(0);
        let pre = sig.pre.iter().map(|x| ex.session(*x)).collect::<Result<Vec<_>, _>>().map_err(cycle)?;
        let post = sig
            .post
            .iter()
            .chain(&sig.extras)
            .map(|x| ex.session(*x))
            .collect::<Result<Vec<_>, _>>()
            .map_err(cycle)?;
        let mut params = Vec::new();
        let (mut ci, mut vi) = (0, 0);
        for param in &d.params {
            match param {
                Param::Chan(n) => {
                    params.push(ParamSig::Chan { name: n.clone(), level: LevelExpr::new(tail, ci) });
                    ci += 1;
                }
                Param::Value(n, _) => {
                    params.push(ParamSig::Value { name: n.clone(), ty: ex.value(sig.values[vi]) });
                    vi += 1;
                }
            }
        }
        Ok(SessionSignature {
            name: d.name.clone(),
            params,
            pre: EnvRow::new(tail, pre),
            post: EnvRow::new(tail, post),
            result: ex.value(sig.result),
            ended_tail: sig.ended_tail,
        })
    }
}

/// Replaces every unification variable by `End`, the obligation-free
/// instance used when a concrete environment is needed.
pub fn ground(u: &SessionType) -> SessionType {
    use SessionType as S;
    let b = |x: &S| Box::new(ground(x));
    match u {
        S::UVar(_) => S::End,
        S::Send(v, k) => S::Send(v.clone(), b(k)),
        S::Recv(v, k) => S::Recv(v.clone(), b(k)),
        S::Select(x, y) => S::Select(b(x), b(y)),
        S::Offer(x, y) => S::Offer(b(x), b(y)),
        S::SelectN(x, y) => S::SelectN(b(x), b(y)),
        S::OfferN(x, y) => S::OfferN(b(x), b(y)),
        S::Throw(x, y) => S::Throw(b(x), b(y)),
        S::Catch(x, y) => S::Catch(b(x), b(y)),
        S::Rec(k, x) => S::Rec(*k, b(x)),
        other => other.clone(),
    }
}

/// A session can be started on its own when it takes no channels and
/// discharges every channel it creates.
pub fn check_runnable(sig: &SessionSignature) -> Result<(), String> {
    if sig.chan_count() > 0 || sig.params.iter().any(|p| matches!(p, ParamSig::Value { .. })) {
        return Err(format!("`{}` takes parameters and cannot be started on its own", sig.name));
    }
    for (i, u) in sig.post.entries.iter().enumerate() {
        if ground(u) != SessionType::End {
            return Err(format!("`{}` leaves channel {i} unfinished with `{u}`", sig.name));
        }
    }
    Ok(())
}

/// Checks that `server` can serve clients of the declared service type.
pub fn check_service_server(service: &SessionType, server: &SessionSignature) -> Result<(), String> {
    if server.chan_count() != 1 || server.params.len() != 1 {
        return Err(format!("server `{}` must take exactly one channel", server.name));
    }
    let want = dual(service).map_err(|e| e.to_string())?;
    // Parts of the server's protocol it leaves open accept any client
    // behaviour, so match by unification rather than equality.
    let mut terms = Terms::new();
    let w = terms.import(&want, &mut term::Imports::default());
    let mut vars = term::Imports::default();
    let g = terms.import(&server.pre.entries[0], &mut vars);
    if terms.unify(w, g).is_err() {
        return Err(format!("server `{}` speaks `{}`, the service needs `{want}`", server.name, server.pre.entries[0]));
    }
    if let Some(u) = server.post.entries.iter().find(|u| !matches!(u, SessionType::End | SessionType::UVar(_))) {
        return Err(format!("server `{}` leaves a channel unfinished with `{u}`", server.name));
    }
    Ok(())
}
