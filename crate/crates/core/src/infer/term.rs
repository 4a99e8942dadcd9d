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


//! A union-find arena of session and value type terms. Session terms may be
//! cyclic; a cycle is well formed when it passes through a `Rec` node, which
//! marks the binder that the cycle folds back to.

use std::collections::{HashMap, HashSet};

use crate::types::{SessionType, ValueType};

pub type Id = usize;
pub type VId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Var,
    Send(VId, Id),
    Recv(VId, Id),
    Select(Id, Id),
    Offer(Id, Id),
    SelectN(Id, Id),
    OfferN(Id, Id),
    Throw(Id, Id),
    Catch(Id, Id),
    End,
    Bot,
    Close,
    /// A recursion binder. The node denotes the same tree as its body; paths
    /// that return to the node are printed as `Var level`.
    Rec(u32, Id),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VNode {
    Var,
    Int,
    Bool,
    Str,
    Unit,
    List(VId),
    Tagged(String),
}

/// Why two terms failed to unify.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Clash {
    Session(Id, Id),
    Value(VId, VId),
    RecLevel(u32, u32),
}

/// A cycle that cannot be written with `Rec`/`Var`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CycleError {
    /// The cycle passes through no `Rec` node.
    NoBinder,
    /// A back edge to a binder shadowed by an inner binder of the same level.
    Shadowed(u32),
}

#[derive(Debug, Default, Clone)]
pub struct Terms {
    nodes: Vec<Node>,
    parent: Vec<Id>,
    vnodes: Vec<VNode>,
    vparent: Vec<VId>,
}

impl Terms {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mk(&mut self, n: Node) -> Id {
        self.nodes.push(n);
        self.parent.push(self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    pub fn fresh(&mut self) -> Id {
        self.mk(Node::Var)
    }

    pub fn vmk(&mut self, n: VNode) -> VId {
        self.vnodes.push(n);
        self.vparent.push(self.vnodes.len() - 1);
        self.vnodes.len() - 1
    }

    pub fn vfresh(&mut self) -> VId {
        self.vmk(VNode::Var)
    }

    pub fn find(&self, mut id: Id) -> Id {
        while self.parent[id] != id {
            id = self.parent[id];
        }
        id
    }

    pub fn vfind(&self, mut id: VId) -> VId {
        while self.vparent[id] != id {
            id = self.vparent[id];
        }
        id
    }

    pub fn node(&self, id: Id) -> &Node {
        &self.nodes[self.find(id)]
    }

    pub fn vnode(&self, id: VId) -> &VNode {
        &self.vnodes[self.vfind(id)]
    }

    /// Fills in the body of a `Rec` node created with a placeholder.
    pub fn set_rec_body(&mut self, rec: Id, body: Id) {
        if let Node::Rec(k, _) = self.nodes[rec] {
            self.nodes[rec] = Node::Rec(k, body);
        }
    }

    /// The representative of the first non-`Rec` node reached from `id`;
    /// `None` when that node is still an unknown variable (or the chain of
    /// binders never reaches a constructor).
    pub fn head(&self, id: Id) -> Option<Id> {
        let mut id = self.find(id);
        for _ in 0..=self.nodes.len() {
            match &self.nodes[id] {
                Node::Var => return None,
                Node::Rec(_, body) => id = self.find(*body),
                _ => return Some(id),
            }
        }
        None
    }

    pub fn is_var(&self, id: Id) -> bool {
        matches!(self.node(id), Node::Var)
    }

    fn union(&mut self, from: Id, to: Id) {
        self.parent[from] = to;
    }

    pub fn vunify(&mut self, a: VId, b: VId) -> Result<(), Clash> {
        let mut stack = vec![(a, b)];
        while let Some((a, b)) = stack.pop() {
            let (a, b) = (self.vfind(a), self.vfind(b));
            if a == b {
                continue;
            }
            match (self.vnodes[a].clone(), self.vnodes[b].clone()) {
                (VNode::Var, _) => self.vparent[a] = b,
                (_, VNode::Var) => self.vparent[b] = a,
                (VNode::List(x), VNode::List(y)) => {
                    self.vparent[b] = a;
                    stack.push((x, y));
                }
                (VNode::Tagged(x), VNode::Tagged(y)) if x == y => self.vparent[b] = a,
                (x, y) if x == y && !matches!(x, VNode::List(_) | VNode::Tagged(_)) => self.vparent[b] = a,
                _ => return Err(Clash::Value(a, b)),
            }
        }
        Ok(())
    }

    /// Unifies two session terms as (possibly infinite) trees.
    pub fn unify(&mut self, a: Id, b: Id) -> Result<(), Clash> {
        let mut stack = vec![(a, b)];
        let mut seen = HashSet::new();
        while let Some((a, b)) = stack.pop() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b || !seen.insert((a, b)) {
                continue;
            }
            use Node::*;
            match (self.nodes[a].clone(), self.nodes[b].clone()) {
                (Var, _) => self.union(a, b),
                (_, Var) => self.union(b, a),
                (Rec(k1, b1), Rec(k2, b2)) => {
                    if k1 != k2 {
                        return Err(Clash::RecLevel(k1, k2));
                    }
                    self.union(b, a);
                    stack.push((b1, b2));
                }
                (Rec(_, body), _) => stack.push((body, b)),
                (_, Rec(_, body)) => stack.push((a, body)),
                (Send(v1, k1), Send(v2, k2)) | (Recv(v1, k1), Recv(v2, k2)) => {
                    self.vunify(v1, v2)?;
                    self.union(b, a);
                    stack.push((k1, k2));
                }
                (Select(x1, y1), Select(x2, y2))
                | (Offer(x1, y1), Offer(x2, y2))
                | (SelectN(x1, y1), SelectN(x2, y2))
                | (OfferN(x1, y1), OfferN(x2, y2))
                | (Throw(x1, y1), Throw(x2, y2))
                | (Catch(x1, y1), Catch(x2, y2)) => {
                    self.union(b, a);
                    stack.push((y1, y2));
                    stack.push((x1, x2));
                }
                (End, End) | (Bot, Bot) | (Close, Close) => self.union(b, a),
                _ => return Err(Clash::Session(a, b)),
            }
        }
        Ok(())
    }

    // ---- conversion from ground syntax ----

    pub fn import_value(&mut self, v: &ValueType, vars: &mut HashMap<u32, VId>) -> VId {
        match v {
            ValueType::Int => self.vmk(VNode::Int),
            ValueType::Bool => self.vmk(VNode::Bool),
            ValueType::Str => self.vmk(VNode::Str),
            ValueType::Unit => self.vmk(VNode::Unit),
            ValueType::List(inner) => {
                let i = self.import_value(inner, vars);
                self.vmk(VNode::List(i))
            }
            ValueType::Tagged(t) => self.vmk(VNode::Tagged(t.clone())),
            ValueType::Var(x) => match vars.get(x) {
                Some(id) => *id,
                None => {
                    let id = self.vfresh();
                    vars.insert(*x, id);
                    id
                }
            },
        }
    }

    /// Builds a term for a session type. `Var k` refers to the innermost
    /// enclosing `Rec k`; unbound `Var`s become fresh variables.
    pub fn import(&mut self, u: &SessionType, vars: &mut Imports) -> Id {
        let mut binders = Vec::new();
        self.import_in(u, vars, &mut binders)
    }

    fn import_in(&mut self, u: &SessionType, vars: &mut Imports, binders: &mut Vec<(u32, Id)>) -> Id {
        use SessionType as S;
        let pair = |t: &mut Terms, a: &S, b: &S, vars: &mut Imports, binders: &mut Vec<(u32, Id)>| {
            (t.import_in(a, vars, binders), t.import_in(b, vars, binders))
        };
        match u {
            S::Send(v, k) | S::Recv(v, k) => {
                let v = self.import_value(v, &mut vars.values);
                let k = self.import_in(k, vars, binders);
                self.mk(if matches!(u, S::Send(..)) { Node::Send(v, k) } else { Node::Recv(v, k) })
            }
            S::Select(a, b) => {
                let (a, b) = pair(self, a, b, vars, binders);
                self.mk(Node::Select(a, b))
            }
            S::Offer(a, b) => {
                let (a, b) = pair(self, a, b, vars, binders);
                self.mk(Node::Offer(a, b))
            }
            S::SelectN(a, b) => {
                let (a, b) = pair(self, a, b, vars, binders);
                self.mk(Node::SelectN(a, b))
            }
            S::OfferN(a, b) => {
                let (a, b) = pair(self, a, b, vars, binders);
                self.mk(Node::OfferN(a, b))
            }
            S::Throw(a, b) => {
                let (a, b) = pair(self, a, b, vars, binders);
                self.mk(Node::Throw(a, b))
            }
            S::Catch(a, b) => {
                let (a, b) = pair(self, a, b, vars, binders);
                self.mk(Node::Catch(a, b))
            }
            S::End => self.mk(Node::End),
            S::Bot => self.mk(Node::Bot),
            S::Close => self.mk(Node::Close),
            S::Rec(k, body) => {
                let placeholder = self.fresh();
                let r = self.mk(Node::Rec(*k, placeholder));
                binders.push((*k, r));
                let b = self.import_in(body, vars, binders);
                binders.pop();
                self.set_rec_body(r, b);
                r
            }
            S::Var(k) => match binders.iter().rev().find(|(l, _)| l == k) {
                Some((_, r)) => *r,
                None => self.fresh(),
            },
            S::UVar(x) => match vars.sessions.get(x) {
                Some(id) => *id,
                None => {
                    let id = self.fresh();
                    vars.sessions.insert(*x, id);
                    id
                }
            },
        }
    }

    // ---- copying (instantiation of generalized signatures) ----

    pub fn copy(&mut self, id: Id, map: &mut CopyMap) -> Id {
        let id = self.find(id);
        if let Some(c) = map.sessions.get(&id) {
            return *c;
        }
        let new = self.fresh();
        map.sessions.insert(id, new);
        let node = match self.nodes[id].clone() {
            Node::Var => return new,
            Node::Send(v, k) => Node::Send(self.vcopy(v, map), self.copy(k, map)),
            Node::Recv(v, k) => Node::Recv(self.vcopy(v, map), self.copy(k, map)),
            Node::Select(a, b) => Node::Select(self.copy(a, map), self.copy(b, map)),
            Node::Offer(a, b) => Node::Offer(self.copy(a, map), self.copy(b, map)),
            Node::SelectN(a, b) => Node::SelectN(self.copy(a, map), self.copy(b, map)),
            Node::OfferN(a, b) => Node::OfferN(self.copy(a, map), self.copy(b, map)),
            Node::Throw(a, b) => Node::Throw(self.copy(a, map), self.copy(b, map)),
            Node::Catch(a, b) => Node::Catch(self.copy(a, map), self.copy(b, map)),
            Node::Rec(k, b) => Node::Rec(k, self.copy(b, map)),
            n @ (Node::End | Node::Bot | Node::Close) => n,
        };
        self.nodes[new] = node;
        new
    }

    pub fn vcopy(&mut self, id: VId, map: &mut CopyMap) -> VId {
        let id = self.vfind(id);
        if let Some(c) = map.values.get(&id) {
            return *c;
        }
        let node = match self.vnodes[id].clone() {
            VNode::Var => VNode::Var,
            VNode::List(x) => VNode::List(self.vcopy(x, map)),
            other => other,
        };
        let new = self.vmk(node);
        map.values.insert(id, new);
        new
    }
}

#[derive(Debug, Default)]
pub struct Imports {
    pub sessions: HashMap<u32, Id>,
    pub values: HashMap<u32, VId>,
}

#[derive(Debug, Default)]
pub struct CopyMap {
    sessions: HashMap<Id, Id>,
    values: HashMap<VId, VId>,
}

/// Converts terms back to syntax, numbering unknowns by first occurrence.
/// One exporter shared across several roots gives them a common numbering.
pub struct Export<'a> {
    terms: &'a Terms,
    vars: HashMap<Id, u32>,
    vvars: HashMap<VId, u32>,
    next: u32,
    /// When set, ill-formed cycles are cut with a fresh variable instead of
    /// failing (used for error messages).
    lenient: bool,
}

impl<'a> Export<'a> {
    pub fn new(terms: &'a Terms) -> Self {
        Export { terms, vars: HashMap::new(), vvars: HashMap::new(), next: 0, lenient: false }
    }

    pub fn lenient(terms: &'a Terms) -> Self {
        Export { lenient: true, ..Export::new(terms) }
    }

    fn next_id(&mut self) -> u32 {
        self.next += 1;
        self.next - 1
    }

    pub fn value(&mut self, v: VId) -> ValueType {
        let v = self.terms.vfind(v);
        match &self.terms.vnodes[v] {
            VNode::Var => {
                if let Some(x) = self.vvars.get(&v) {
                    return ValueType::Var(*x);
                }
                let x = self.next_id();
                self.vvars.insert(v, x);
                ValueType::Var(x)
            }
            VNode::Int => ValueType::Int,
            VNode::Bool => ValueType::Bool,
            VNode::Str => ValueType::Str,
            VNode::Unit => ValueType::Unit,
            VNode::List(x) => ValueType::List(Box::new(self.value(*x))),
            VNode::Tagged(t) => ValueType::Tagged(t.clone()),
        }
    }

    pub fn session(&mut self, id: Id) -> Result<SessionType, CycleError> {
        let mut path = Vec::new();
        self.session_in(id, &mut path)
    }

    fn session_in(&mut self, id: Id, path: &mut Vec<Id>) -> Result<SessionType, CycleError> {
        use SessionType as S;
        let id = self.terms.find(id);
        if let Some(at) = path.iter().position(|p| *p == id) {
            return match self.terms.nodes[id] {
                Node::Rec(k, _) => {
                    let shadowed = path[at + 1..]
                        .iter()
                        .any(|p| matches!(self.terms.nodes[*p], Node::Rec(j, _) if j == k));
                    if shadowed {
                        self.cut(CycleError::Shadowed(k))
                    } else {
                        Ok(S::Var(k))
                    }
                }
                _ => self.cut(CycleError::NoBinder),
            };
        }
        path.push(id);
        let node = self.terms.nodes[id].clone();
        let mut go = |this: &mut Self, x: Id| this.session_in(x, path).map(Box::new);
        let out = match node {
            Node::Var => {
                let x = match self.vars.get(&id) {
                    Some(x) => *x,
                    None => {
                        let x = self.next_id();
                        self.vars.insert(id, x);
                        x
                    }
                };
                S::UVar(x)
            }
            Node::Send(v, k) => {
                let v = self.value(v);
                S::Send(v, go(self, k)?)
            }
            Node::Recv(v, k) => {
                let v = self.value(v);
                S::Recv(v, go(self, k)?)
            }
            Node::Select(a, b) => S::Select(go(self, a)?, go(self, b)?),
            Node::Offer(a, b) => S::Offer(go(self, a)?, go(self, b)?),
            Node::SelectN(a, b) => S::SelectN(go(self, a)?, go(self, b)?),
            Node::OfferN(a, b) => S::OfferN(go(self, a)?, go(self, b)?),
            Node::Throw(a, b) => S::Throw(go(self, a)?, go(self, b)?),
            Node::Catch(a, b) => S::Catch(go(self, a)?, go(self, b)?),
            Node::End => S::End,
            Node::Bot => S::Bot,
            Node::Close => S::Close,
            Node::Rec(k, b) => S::Rec(k, go(self, b)?),
        };
        path.pop();
        Ok(out)
    }

    fn cut(&mut self, e: CycleError) -> Result<SessionType, CycleError> {
        if self.lenient {
            let x = self.next_id();
            Ok(SessionType::UVar(x))
        } else {
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_type;

    fn roundtrip(text: &str) -> String {
        let mut t = Terms::new();
        let id = t.import(&parse_type(text).unwrap(), &mut Imports::default());
        Export::new(&t).session(id).unwrap().to_string()
    }

    #[test]
    fn import_export_round_trip() {
        for s in ["Send Int (Recv Bool End)", "Rec Z (Send Int (Var Z))", "Rec Z (Select (Rec (S Z) (Send a (Var Z))) End)"] {
            assert_eq!(roundtrip(s), s);
        }
    }

    #[test]
    fn unification_binds_variables() {
        let mut t = Terms::new();
        let mut im = Imports::default();
        let a = t.import(&parse_type("Send Int x").unwrap(), &mut im);
        let b = t.import(&parse_type("Send Int (Recv Bool End)").unwrap(), &mut Imports::default());
        t.unify(a, b).unwrap();
        assert_eq!(Export::new(&t).session(im.sessions[&0]).unwrap().to_string(), "Recv Bool End");
        let c = t.import(&parse_type("Recv Int End").unwrap(), &mut Imports::default());
        assert!(matches!(t.unify(a, c), Err(Clash::Session(..))));
    }

    #[test]
    fn rational_unification_through_rec() {
        // x = Send Int x against the binder form.
        let mut t = Terms::new();
        let r = t.import(&parse_type("Rec Z (Send Int (Var Z))").unwrap(), &mut Imports::default());
        let x = t.fresh();
        let v = t.vmk(VNode::Int);
        let s = t.mk(Node::Send(v, x));
        t.unify(x, r).unwrap();
        t.unify(s, r).unwrap();
        assert_eq!(Export::new(&t).session(x).unwrap().to_string(), "Rec Z (Send Int (Var Z))");
    }

    #[test]
    fn cycles_without_binder_are_rejected() {
        let mut t = Terms::new();
        let x = t.fresh();
        let v = t.vmk(VNode::Int);
        let s = t.mk(Node::Send(v, x));
        t.unify(x, s).unwrap();
        assert_eq!(Export::new(&t).session(s), Err(CycleError::NoBinder));
        assert!(Export::lenient(&t).session(s).is_ok());
    }

    #[test]
    fn copies_are_independent() {
        let mut t = Terms::new();
        let mut im = Imports::default();
        let a = t.import(&parse_type("Rec Z (Send x (Var Z))").unwrap(), &mut im);
        let b = t.copy(a, &mut CopyMap::default());
        let int = t.vmk(VNode::Int);
        t.vunify(im.values[&0], int).unwrap();
        assert_eq!(Export::new(&t).session(a).unwrap().to_string(), "Rec Z (Send Int (Var Z))");
        assert_eq!(Export::new(&t).session(b).unwrap().to_string(), "Rec Z (Send a (Var Z))");
    }
}
