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


//! Deferred duality and composition constraints, fired as soon as enough of
//! their arguments is known.

use std::collections::HashMap;

use super::error::InferError;
use super::term::{Clash, Export, Id, Node, Terms};
use crate::surface::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Origin {
    pub pos: Pos,
    /// The composed pair, when the constraint comes from a fork.
    pub comp: Option<(Id, Id)>,
}

#[derive(Debug, Clone)]
pub enum Deferred {
    /// `b` is the dual of `a`.
    Dual { a: Id, b: Id, origin: Origin },
    /// `a ⊕ b = c`.
    Comp { a: Id, b: Id, c: Id, pos: Pos },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Unknown,
    End,
    Bot,
    Close,
    Other,
}

#[derive(Debug, Default)]
pub struct Solver {
    pending: Vec<Deferred>,
    dual_of: HashMap<Id, Id>,
    /// Compositions resolved to `Bot`: the two composed usages.
    pub bot_splits: Vec<(Id, Id)>,
}

pub fn render(terms: &Terms, id: Id) -> String {
    match Export::lenient(terms).session(id) {
        Ok(t) => t.to_string(),
        Err(_) => "?".into(),
    }
}

pub fn render_value(terms: &Terms, id: usize) -> String {
    Export::lenient(terms).value(id).to_string()
}

/// Turns a unification failure into a located type error.
pub fn clash_error(terms: &Terms, pos: Pos, expected: Id, found: Id, clash: Clash) -> InferError {
    let note = match clash {
        Clash::Session(a, b) if terms.find(a) != terms.find(expected) || terms.find(b) != terms.find(found) => {
            Some(format!("`{}` does not match `{}`", render(terms, a), render(terms, b)))
        }
        Clash::Value(a, b) => Some(format!("value type `{}` does not match `{}`", render_value(terms, a), render_value(terms, b))),
        Clash::RecLevel(k, j) => Some(format!("recursion levels {k} and {j} differ")),
        _ => None,
    };
    InferError::Type { pos, expected: render(terms, expected), found: render(terms, found), note }
}

impl Solver {
    pub fn push(&mut self, d: Deferred) {
        self.pending.push(d);
    }

    fn kind(terms: &Terms, id: Id) -> Kind {
        match terms.head(id) {
            None => Kind::Unknown,
            Some(h) => match terms.node(h) {
                Node::End => Kind::End,
                Node::Bot => Kind::Bot,
                Node::Close => Kind::Close,
                _ => Kind::Other,
            },
        }
    }

    /// Fires constraints until none can make progress.
    pub fn solve(&mut self, terms: &mut Terms) -> Result<(), InferError> {
        loop {
            let mut progress = false;
            let work = std::mem::take(&mut self.pending);
            let mut stuck = Vec::new();
            let mut iter = work.into_iter();
            while let Some(d) = iter.next() {
                match self.fire(terms, &d) {
                    Ok(true) => progress = true,
                    Ok(false) => stuck.push(d),
                    Err(e) => {
                        stuck.extend(iter);
                        self.pending.extend(stuck);
                        return Err(e);
                    }
                }
            }
            stuck.append(&mut self.pending);
            self.pending = stuck;
            if !progress {
                return Ok(());
            }
        }
    }

    /// Resolves stuck compositions by preferring `End` for the unknown
    /// share, then reports any duality that is still undetermined.
    pub fn finish(&mut self, terms: &mut Terms) -> Result<Option<Pos>, InferError> {
        loop {
            self.solve(terms)?;
            let Some(i) = self.pending.iter().position(|d| matches!(d, Deferred::Comp { .. })) else {
                break;
            };
            let Deferred::Comp { a, b, c, pos } = self.pending.remove(i) else { unreachable!() };
            let end = terms.mk(Node::End);
            let (unit, other) = if Self::kind(terms, a) != Kind::Unknown { (b, a) } else { (a, b) };
            terms.unify(unit, end).map_err(|cl| clash_error(terms, pos, unit, end, cl))?;
            terms.unify(c, other).map_err(|cl| clash_error(terms, pos, c, other, cl))?;
        }
        // What is left relates two unconstrained protocols; the
        // obligation-free instance ends both.
        for d in std::mem::take(&mut self.pending) {
            if let Deferred::Dual { a, b, origin } = d {
                for x in [a, b] {
                    let end = terms.mk(Node::End);
                    terms.unify(x, end).map_err(|c| clash_error(terms, origin.pos, x, end, c))?;
                }
            }
        }
        self.solve(terms)?;
        Ok(self.pending.first().map(|d| match d {
            Deferred::Dual { origin, .. } => origin.pos,
            Deferred::Comp { pos, .. } => *pos,
        }))
    }

    fn fail(terms: &Terms, origin: Origin, a: Id, b: Id, clash: Option<Clash>) -> InferError {
        match origin.comp {
            Some((l, r)) => InferError::Composition {
                pos: origin.pos,
                left: render(terms, l),
                right: render(terms, r),
                note: match clash {
                    Some(Clash::Value(x, y)) => Some(format!(
                        "value type `{}` does not match `{}`",
                        render_value(terms, x),
                        render_value(terms, y)
                    )),
                    _ => Some(format!("`{}` is not dual to `{}`", render(terms, a), render(terms, b))),
                },
            },
            None => InferError::Type {
                pos: origin.pos,
                expected: format!("dual of {}", render(terms, a)),
                found: render(terms, b),
                note: None,
            },
        }
    }

    fn fire(&mut self, terms: &mut Terms, d: &Deferred) -> Result<bool, InferError> {
        match *d {
            Deferred::Dual { a, b, origin } => self.fire_dual(terms, a, b, origin),
            Deferred::Comp { a, b, c, pos } => self.fire_comp(terms, a, b, c, pos),
        }
    }

    fn fire_dual(&mut self, terms: &mut Terms, a: Id, b: Id, origin: Origin) -> Result<bool, InferError> {
        let (a, b) = match (terms.is_var(a), terms.is_var(b)) {
            (true, true) => return Ok(false),
            (true, false) => (b, a),
            _ => (a, b),
        };
        let ra = terms.find(a);
        if let Some(p) = self.dual_of.get(&ra).copied() {
            return terms.unify(b, p).map(|_| true).map_err(|c| Self::fail(terms, origin, a, b, Some(c)));
        }
        self.dual_of.insert(ra, b);
        let rb = terms.find(b);
        self.dual_of.entry(rb).or_insert(a);
        let sub = |s: &mut Self, x: Id, y: Id| {
            s.pending.push(Deferred::Dual { a: x, b: y, origin });
        };
        let shape = match terms.node(a).clone() {
            Node::Var => unreachable!(),
            Node::Rec(k, body) => {
                let x = terms.fresh();
                sub(self, body, x);
                Node::Rec(k, x)
            }
            Node::Send(v, k) | Node::Recv(v, k) => {
                let x = terms.fresh();
                sub(self, k, x);
                if matches!(terms.node(a), Node::Send(..)) {
                    Node::Recv(v, x)
                } else {
                    Node::Send(v, x)
                }
            }
            Node::Select(p, q) | Node::Offer(p, q) | Node::SelectN(p, q) | Node::OfferN(p, q) => {
                let (x, y) = (terms.fresh(), terms.fresh());
                sub(self, p, x);
                sub(self, q, y);
                match terms.node(a) {
                    Node::Select(..) => Node::Offer(x, y),
                    Node::Offer(..) => Node::Select(x, y),
                    Node::SelectN(..) => Node::OfferN(x, y),
                    _ => Node::SelectN(x, y),
                }
            }
            Node::Throw(p, q) | Node::Catch(p, q) => {
                let y = terms.fresh();
                sub(self, q, y);
                if matches!(terms.node(a), Node::Throw(..)) {
                    Node::Catch(p, y)
                } else {
                    Node::Throw(p, y)
                }
            }
            Node::End => Node::End,
            Node::Close => Node::Close,
            Node::Bot => return Err(Self::fail(terms, origin, a, b, None)),
        };
        let shape = terms.mk(shape);
        terms.unify(b, shape).map_err(|c| Self::fail(terms, origin, a, b, Some(c)))?;
        Ok(true)
    }

    fn fire_comp(&mut self, terms: &mut Terms, a: Id, b: Id, c: Id, pos: Pos) -> Result<bool, InferError> {
        let (ka, kb, kc) = (Self::kind(terms, a), Self::kind(terms, b), Self::kind(terms, c));
        let undefined = |terms: &Terms| InferError::Composition {
            pos,
            left: render(terms, a),
            right: render(terms, b),
            note: None,
        };
        let unify = |terms: &mut Terms, x: Id, y: Id| {
            terms.unify(x, y).map_err(|_| InferError::Composition {
                pos,
                left: render(terms, a),
                right: render(terms, b),
                note: Some(format!("result must be `{}`", render(terms, c))),
            })
        };
        if ka == Kind::End || kb == Kind::End {
            let other = if ka == Kind::End { b } else { a };
            if Self::kind(terms, other) == Kind::Close || kc == Kind::Close {
                return Err(undefined(terms));
            }
            unify(terms, c, other)?;
            return Ok(true);
        }
        let dual = |s: &mut Self| {
            s.bot_splits.push((a, b));
            s.pending.push(Deferred::Dual { a, b, origin: Origin { pos, comp: Some((a, b)) } });
        };
        if ka != Kind::Unknown && kb != Kind::Unknown {
            if ka == Kind::Bot || kb == Kind::Bot {
                return Err(undefined(terms));
            }
            let bot = terms.mk(Node::Bot);
            unify(terms, c, bot)?;
            dual(self);
            return Ok(true);
        }
        if ka == Kind::Bot || kb == Kind::Bot {
            // `Bot` composes only with the unit.
            let (bot, other) = if ka == Kind::Bot { (a, b) } else { (b, a) };
            let end = terms.mk(Node::End);
            unify(terms, other, end)?;
            unify(terms, c, bot)?;
            return Ok(true);
        }
        match kc {
            Kind::Unknown => Ok(false),
            Kind::Bot => {
                dual(self);
                Ok(true)
            }
            Kind::End => {
                let end = terms.mk(Node::End);
                unify(terms, a, end)?;
                unify(terms, b, end)?;
                Ok(true)
            }
            Kind::Close | Kind::Other => {
                let end = terms.mk(Node::End);
                if ka != Kind::Unknown {
                    unify(terms, b, end)?;
                    unify(terms, c, a)?;
                    Ok(true)
                } else if kb != Kind::Unknown {
                    unify(terms, a, end)?;
                    unify(terms, c, b)?;
                    Ok(true)
                } else {
                    Ok(false)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infer::term::Imports;
    use crate::surface::parse_type;

    fn import(t: &mut Terms, s: &str, im: &mut Imports) -> Id {
        t.import(&parse_type(s).unwrap(), im)
    }

    fn show(t: &Terms, id: Id) -> String {
        Export::new(t).session(id).unwrap().to_string()
    }

    #[test]
    fn composition_to_bot_determines_the_dual() {
        let mut t = Terms::new();
        let a = t.fresh();
        let b = import(&mut t, "Recv Int End", &mut Imports::default());
        let c = t.mk(Node::Bot);
        let mut s = Solver::default();
        s.push(Deferred::Comp { a, b, c, pos: Pos::default() });
        s.solve(&mut t).unwrap();
        assert_eq!(show(&t, a), "Send Int End");
    }

    #[test]
    fn end_is_the_unit() {
        let mut t = Terms::new();
        let a = t.mk(Node::End);
        let (b, c) = (t.fresh(), t.fresh());
        let mut s = Solver::default();
        s.push(Deferred::Comp { a, b, c, pos: Pos::default() });
        s.solve(&mut t).unwrap();
        assert_eq!(t.find(b), t.find(c));
    }

    #[test]
    fn dual_of_send_with_unknown_continuation() {
        let mut t = Terms::new();
        let mut im = Imports::default();
        let a = import(&mut t, "Send Int x", &mut im);
        let b = t.fresh();
        let mut s = Solver::default();
        s.push(Deferred::Dual { a, b, origin: Origin { pos: Pos::default(), comp: None } });
        s.solve(&mut t).unwrap();
        assert!(matches!(t.node(b), Node::Recv(..)));
        // Fixing x later fixes its paired dual.
        let x = im.sessions[&0];
        let end = import(&mut t, "Recv Bool End", &mut Imports::default());
        t.unify(x, end).unwrap();
        s.solve(&mut t).unwrap();
        assert_eq!(show(&t, b), "Recv Int (Send Bool End)");
    }

    #[test]
    fn dual_of_recursive_type() {
        let mut t = Terms::new();
        let a = import(&mut t, "Rec Z (Send Int (Select (Var Z) End))", &mut Imports::default());
        let b = t.fresh();
        let mut s = Solver::default();
        s.push(Deferred::Dual { a, b, origin: Origin { pos: Pos::default(), comp: None } });
        s.solve(&mut t).unwrap();
        assert_eq!(show(&t, b), "Rec Z (Recv Int (Offer (Var Z) End))");
    }

    #[test]
    fn insoluble_composition_is_reported() {
        let mut t = Terms::new();
        let a = import(&mut t, "Send Int End", &mut Imports::default());
        let b = import(&mut t, "Send Int End", &mut Imports::default());
        let c = t.fresh();
        let mut s = Solver::default();
        s.push(Deferred::Comp { a, b, c, pos: Pos::default() });
        let err = s.solve(&mut t).unwrap_err();
        assert!(matches!(err, InferError::Composition { .. }), "{err}");
    }

    #[test]
    fn stuck_composition_defaults_to_end_share() {
        let mut t = Terms::new();
        let a = import(&mut t, "Send Int End", &mut Imports::default());
        let (b, c) = (t.fresh(), t.fresh());
        let mut s = Solver::default();
        s.push(Deferred::Comp { a, b, c, pos: Pos::default() });
        s.solve(&mut t).unwrap();
        assert!(t.is_var(b));
        assert_eq!(s.finish(&mut t).unwrap(), None);
        assert_eq!(show(&t, b), "End");
        assert_eq!(show(&t, c), "Send Int End");
    }
}
