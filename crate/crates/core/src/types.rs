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

//! The session-type term algebra.
//!
//! Session types describe one endpoint of a binary channel. Recursion uses
//! de Bruijn *levels*: `Rec k body` binds `Var k`, and the outermost binder
//! has level 0. Environment rows ([`EnvRow`]) are sequences of session types
//! indexed by level, optionally extended on the left by an unknown tail.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Types of basic (non-channel) values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValueType {
    Int,
    Bool,
    Str,
    Unit,
    List(Box<ValueType>),
    /// A declared data type, identified by its constructor name.
    Tagged(String),
    /// An unresolved value type produced by inference.
    Var(u32),
}

/// Session types. `UVar` only appears in inference results.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SessionType {
    Send(ValueType, Box<SessionType>),
    Recv(ValueType, Box<SessionType>),
    Select(Box<SessionType>, Box<SessionType>),
    Offer(Box<SessionType>, Box<SessionType>),
    SelectN(Box<SessionType>, Box<SessionType>),
    OfferN(Box<SessionType>, Box<SessionType>),
    Throw(Box<SessionType>, Box<SessionType>),
    Catch(Box<SessionType>, Box<SessionType>),
    End,
    Bot,
    Close,
    Rec(u32, Box<SessionType>),
    Var(u32),
    UVar(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("dual of `{0}` is undefined")]
    DualUndefined(SessionType),
    #[error("`{0}` is not ground")]
    NotGround(SessionType),
    #[error("composition of `{0}` and `{1}` is undefined")]
    CompUndefined(SessionType, SessionType),
    #[error("`{0}` is not a recursive type")]
    NotRecursive(SessionType),
}

impl SessionType {
    pub fn send(v: ValueType, k: SessionType) -> Self {
        SessionType::Send(v, Box::new(k))
    }

    pub fn recv(v: ValueType, k: SessionType) -> Self {
        SessionType::Recv(v, Box::new(k))
    }

    pub fn select(a: SessionType, b: SessionType) -> Self {
        SessionType::Select(Box::new(a), Box::new(b))
    }

    pub fn offer(a: SessionType, b: SessionType) -> Self {
        SessionType::Offer(Box::new(a), Box::new(b))
    }

    pub fn throw(a: SessionType, b: SessionType) -> Self {
        SessionType::Throw(Box::new(a), Box::new(b))
    }

    pub fn catch(a: SessionType, b: SessionType) -> Self {
        SessionType::Catch(Box::new(a), Box::new(b))
    }

    pub fn rec(level: u32, body: SessionType) -> Self {
        SessionType::Rec(level, Box::new(body))
    }

    /// True when no inference variable occurs anywhere in the type.
    pub fn is_ground(&self) -> bool {
        let mut ground = true;
        self.walk(&mut |t| {
            if matches!(t, SessionType::UVar(_)) {
                ground = false;
            }
        });
        ground
    }

    pub fn contains_bot(&self) -> bool {
        let mut found = false;
        self.walk(&mut |t| {
            if matches!(t, SessionType::Bot) {
                found = true;
            }
        });
        found
    }

    /// Pre-order traversal over session-type nodes.
    pub fn walk(&self, f: &mut impl FnMut(&SessionType)) {
        f(self);
        match self {
            SessionType::Send(_, k) | SessionType::Recv(_, k) | SessionType::Rec(_, k) => k.walk(f),
            SessionType::Select(a, b)
            | SessionType::Offer(a, b)
            | SessionType::SelectN(a, b)
            | SessionType::OfferN(a, b)
            | SessionType::Throw(a, b)
            | SessionType::Catch(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            SessionType::End
            | SessionType::Bot
            | SessionType::Close
            | SessionType::Var(_)
            | SessionType::UVar(_) => {}
        }
    }

    /// Levels of `Var` nodes not bound by an enclosing `Rec`.
    pub fn free_levels(&self) -> BTreeSet<u32> {
        fn go(t: &SessionType, bound: &mut Vec<u32>, out: &mut BTreeSet<u32>) {
            match t {
                SessionType::Var(k) => {
                    if !bound.contains(k) {
                        out.insert(*k);
                    }
                }
                SessionType::Rec(k, body) => {
                    bound.push(*k);
                    go(body, bound, out);
                    bound.pop();
                }
                SessionType::Send(_, k) | SessionType::Recv(_, k) => go(k, bound, out),
                SessionType::Select(a, b)
                | SessionType::Offer(a, b)
                | SessionType::SelectN(a, b)
                | SessionType::OfferN(a, b)
                | SessionType::Throw(a, b)
                | SessionType::Catch(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    fn max_level(&self) -> Option<u32> {
        let mut max = None;
        self.walk(&mut |t| {
            if let SessionType::Rec(k, _) | SessionType::Var(k) = t {
                max = Some(max.map_or(*k, |m: u32| m.max(*k)));
            }
        });
        max
    }
}

/// The dual endpoint's protocol.
///
/// `Throw`/`Catch` dualize only their continuation; `Rec`/`Var` are
/// homomorphic and `Close` is self-dual.
pub fn dual(u: &SessionType) -> Result<SessionType, AlgebraError> {
    if !u.is_ground() {
        return Err(AlgebraError::NotGround(u.clone()));
    }
    dual_of(u).ok_or_else(|| AlgebraError::DualUndefined(u.clone()))
}

fn dual_of(u: &SessionType) -> Option<SessionType> {
    use SessionType::*;
    Some(match u {
        Send(v, k) => Recv(v.clone(), Box::new(dual_of(k)?)),
        Recv(v, k) => Send(v.clone(), Box::new(dual_of(k)?)),
        Select(a, b) => Offer(Box::new(dual_of(a)?), Box::new(dual_of(b)?)),
        Offer(a, b) => Select(Box::new(dual_of(a)?), Box::new(dual_of(b)?)),
        SelectN(a, b) => OfferN(Box::new(dual_of(a)?), Box::new(dual_of(b)?)),
        OfferN(a, b) => SelectN(Box::new(dual_of(a)?), Box::new(dual_of(b)?)),
        Throw(a, b) => {
            if a.contains_bot() {
                return None;
            }
            Catch(a.clone(), Box::new(dual_of(b)?))
        }
        Catch(a, b) => {
            if a.contains_bot() {
                return None;
            }
            Throw(a.clone(), Box::new(dual_of(b)?))
        }
        End => End,
        Close => Close,
        Bot => return None,
        Rec(k, body) => Rec(*k, Box::new(dual_of(body)?)),
        Var(k) => Var(*k),
        UVar(_) => return None,
    })
}

/// Composition of two usages of one channel.
///
/// `End` is the unit, dual usages compose to `Bot`. `Close` never composes
/// with `End`: a closed network session has exactly one owner.
pub fn comp(u1: &SessionType, u2: &SessionType) -> Result<SessionType, AlgebraError> {
    for u in [u1, u2] {
        if !u.is_ground() {
            return Err(AlgebraError::NotGround(u.clone()));
        }
    }
    let undefined = || AlgebraError::CompUndefined(u1.clone(), u2.clone());
    match (u1, u2) {
        (SessionType::End, SessionType::Close) | (SessionType::Close, SessionType::End) => {
            Err(undefined())
        }
        (SessionType::End, u) | (u, SessionType::End) => Ok(u.clone()),
        (a, b) => match dual_of(a) {
            Some(d) if &d == b => Ok(SessionType::Bot),
            _ => Err(undefined()),
        },
    }
}

/// Pointwise composition of two rows; missing entries count as `End`.
pub fn comp_rows(r1: &[SessionType], r2: &[SessionType]) -> Result<Vec<SessionType>, AlgebraError> {
    let n = r1.len().max(r2.len());
    (0..n)
        .map(|i| {
            let a = r1.get(i).unwrap_or(&SessionType::End);
            let b = r2.get(i).unwrap_or(&SessionType::End);
            comp(a, b)
        })
        .collect()
}

/// One unfolding of a `Rec` node: `body[Var k := Rec k body]`.
pub fn unfold(u: &SessionType) -> Result<SessionType, AlgebraError> {
    match u {
        SessionType::Rec(k, body) => Ok(subst_level(body, *k, u)),
        other => Err(AlgebraError::NotRecursive(other.clone())),
    }
}

/// Replaces free `Var level` in `t` by `with`, renaming inner binders whose
/// level is free in `with` so that nothing gets captured.
pub fn subst_level(t: &SessionType, level: u32, with: &SessionType) -> SessionType {
    let free = with.free_levels();
    let mut next_fresh = t
        .max_level()
        .into_iter()
        .chain(with.max_level())
        .chain(std::iter::once(level))
        .max()
        .unwrap_or(0)
        + 1;
    subst_rec(t, level, with, &free, &mut next_fresh)
}

fn subst_rec(
    t: &SessionType,
    level: u32,
    with: &SessionType,
    free: &BTreeSet<u32>,
    fresh: &mut u32,
) -> SessionType {
    use SessionType::*;
    if let Rec(k, body) = t {
        if *k != level && free.contains(k) {
            let renamed = *fresh;
            *fresh += 1;
            let body = rename_level(body, *k, renamed);
            return Rec(renamed, Box::new(subst_rec(&body, level, with, free, fresh)));
        }
    }
    let mut go = |s: &SessionType| Box::new(subst_rec(s, level, with, free, fresh));
    match t {
        Var(k) if *k == level => with.clone(),
        Rec(k, _) if *k == level => t.clone(),
        Rec(k, body) => Rec(*k, go(body)),
        Send(v, k) => Send(v.clone(), go(k)),
        Recv(v, k) => Recv(v.clone(), go(k)),
        Select(a, b) => Select(go(a), go(b)),
        Offer(a, b) => Offer(go(a), go(b)),
        SelectN(a, b) => SelectN(go(a), go(b)),
        OfferN(a, b) => OfferN(go(a), go(b)),
        Throw(a, b) => Throw(go(a), go(b)),
        Catch(a, b) => Catch(go(a), go(b)),
        End | Bot | Close | Var(_) | UVar(_) => t.clone(),
    }
}

fn rename_level(t: &SessionType, from: u32, to: u32) -> SessionType {
    subst_rec(t, from, &SessionType::Var(to), &BTreeSet::from([to]), &mut (to + 1))
}

/// Compares the infinite trees of two types up to `depth` constructors,
/// unfolding every `Rec` node on the way.
pub fn equal_unfolding(u1: &SessionType, u2: &SessionType, depth: usize) -> bool {
    fn head(t: &SessionType, budget: usize) -> SessionType {
        let mut t = t.clone();
        // Bounded so that non-contractive types like `Rec 0 (Var 0)` terminate.
        for _ in 0..=budget {
            match unfold(&t) {
                Ok(next) => t = next,
                Err(_) => break,
            }
        }
        t
    }
    fn go(a: &SessionType, b: &SessionType, depth: usize) -> bool {
        if depth == 0 {
            return true;
        }
        use SessionType::*;
        let a = head(a, depth);
        let b = head(b, depth);
        match (&a, &b) {
            (Send(v1, k1), Send(v2, k2)) | (Recv(v1, k1), Recv(v2, k2)) => {
                v1 == v2 && go(k1, k2, depth - 1)
            }
            (Select(a1, b1), Select(a2, b2))
            | (Offer(a1, b1), Offer(a2, b2))
            | (SelectN(a1, b1), SelectN(a2, b2))
            | (OfferN(a1, b1), OfferN(a2, b2))
            | (Throw(a1, b1), Throw(a2, b2))
            | (Catch(a1, b1), Catch(a2, b2)) => go(a1, a2, depth - 1) && go(b1, b2, depth - 1),
            _ => a == b,
        }
    }
    go(u1, u2, depth)
}

/// A row tail: either the empty row or an unknown row variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RowTail {
    Nil,
    Var(u32),
}

/// `(length of base) + offset`: the de Bruijn level of a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelExpr {
    pub base: RowTail,
    pub offset: usize,
}

impl LevelExpr {
    pub fn new(base: RowTail, offset: usize) -> Self {
        LevelExpr { base, offset }
    }

    /// `Some(equal)` when the answer does not depend on unknown tail lengths.
    pub fn decide_eq(&self, other: &LevelExpr) -> Option<bool> {
        if self.base == other.base {
            Some(self.offset == other.offset)
        } else {
            None
        }
    }
}

/// A type environment indexed by level, open on the left when `tail` is a
/// row variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvRow {
    pub tail: RowTail,
    pub entries: Vec<SessionType>,
}

impl EnvRow {
    pub fn new(tail: RowTail, entries: Vec<SessionType>) -> Self {
        EnvRow { tail, entries }
    }

    pub fn closed(entries: Vec<SessionType>) -> Self {
        EnvRow { tail: RowTail::Nil, entries }
    }

    pub fn level_of(&self, index: usize) -> LevelExpr {
        LevelExpr::new(self.tail, index)
    }

    pub fn lookup(&self, level: LevelExpr) -> Option<&SessionType> {
        if level.base == self.tail {
            self.entries.get(level.offset)
        } else {
            None
        }
    }
}

/// True iff every entry of a closed row is `End`.
pub fn is_completed(row: &EnvRow) -> bool {
    row.entries.iter().all(|u| *u == SessionType::End)
}

/// Assigns display names `a`, `b`, ... to inference variables in order of
/// first occurrence.
#[derive(Debug, Default, Clone)]
pub struct VarNames {
    names: HashMap<u32, String>,
}

impl VarNames {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn name(&mut self, id: u32) -> String {
        let next = self.names.len();
        self.names.entry(id).or_insert_with(|| display_var(next)).clone()
    }
}

fn display_var(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{}{}", letter, i / 26)
    }
}

/// Peano rendering of a level: `Z`, `S Z`, `S (S Z)`, ...
pub fn level_text(level: u32, as_arg: bool) -> String {
    fn go(n: u32) -> String {
        match n {
            0 => "Z".to_string(),
            1 => "S Z".to_string(),
            n => format!("S ({})", go(n - 1)),
        }
    }
    let s = go(level);
    if as_arg && level > 0 {
        format!("({s})")
    } else {
        s
    }
}

pub fn write_value(out: &mut String, v: &ValueType, names: &mut VarNames) {
    match v {
        ValueType::Int => out.push_str("Int"),
        ValueType::Bool => out.push_str("Bool"),
        ValueType::Str => out.push_str("String"),
        ValueType::Unit => out.push_str("()"),
        ValueType::List(inner) => {
            out.push('[');
            write_value(out, inner, names);
            out.push(']');
        }
        ValueType::Tagged(name) => out.push_str(name),
        ValueType::Var(id) => out.push_str(&names.name(*id)),
    }
}

pub fn write_session(out: &mut String, u: &SessionType, names: &mut VarNames, as_arg: bool) {
    use SessionType::*;
    let atomic = matches!(u, End | Bot | Close | UVar(_));
    let paren = as_arg && !atomic;
    if paren {
        out.push('(');
    }
    match u {
        Send(v, k) | Recv(v, k) => {
            out.push_str(if matches!(u, Send(..)) { "Send " } else { "Recv " });
            write_value(out, v, names);
            out.push(' ');
            write_session(out, k, names, true);
        }
        Select(a, b) | Offer(a, b) | SelectN(a, b) | OfferN(a, b) | Throw(a, b) | Catch(a, b) => {
            let ctor = match u {
                Select(..) => "Select",
                Offer(..) => "Offer",
                SelectN(..) => "SelectN",
                OfferN(..) => "OfferN",
                Throw(..) => "Throw",
                _ => "Catch",
            };
            out.push_str(ctor);
            out.push(' ');
            write_session(out, a, names, true);
            out.push(' ');
            write_session(out, b, names, true);
        }
        End => out.push_str("End"),
        Bot => out.push_str("Bot"),
        Close => out.push_str("Close"),
        Rec(k, body) => {
            out.push_str("Rec ");
            out.push_str(&level_text(*k, true));
            out.push(' ');
            write_session(out, body, names, true);
        }
        Var(k) => {
            out.push_str("Var ");
            out.push_str(&level_text(*k, true));
        }
        UVar(id) => out.push_str(&names.name(*id)),
    }
    if paren {
        out.push(')');
    }
}

pub fn write_row(out: &mut String, row: &EnvRow, tail_name: &str, names: &mut VarNames) {
    match row.tail {
        RowTail::Nil => out.push_str("Nil"),
        RowTail::Var(_) => out.push_str(tail_name),
    }
    for u in &row.entries {
        out.push_str(" :> ");
        write_session(out, u, names, false);
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_value(&mut s, self, &mut VarNames::new());
        f.write_str(&s)
    }
}

impl fmt::Display for SessionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_session(&mut s, self, &mut VarNames::new(), false);
        f.write_str(&s)
    }
}

impl fmt::Display for EnvRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_row(&mut s, self, "ss", &mut VarNames::new());
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SessionType::*;

    fn send_int(k: SessionType) -> SessionType {
        SessionType::send(ValueType::Int, k)
    }

    #[test]
    fn dual_table() {
        assert_eq!(dual(&send_int(End)).unwrap(), SessionType::recv(ValueType::Int, End));
        assert_eq!(dual(&End).unwrap(), End);
        assert_eq!(dual(&Bot), Err(AlgebraError::DualUndefined(Bot)));
        let t = SessionType::throw(SessionType::send(ValueType::Bool, End), End);
        assert_eq!(
            dual(&t).unwrap(),
            SessionType::catch(SessionType::send(ValueType::Bool, End), End)
        );
        assert_eq!(dual(&Close).unwrap(), Close);
        assert!(matches!(dual(&send_int(UVar(0))), Err(AlgebraError::NotGround(_))));
    }

    #[test]
    fn comp_clauses() {
        let r = SessionType::recv(ValueType::Int, End);
        assert_eq!(comp(&End, &r).unwrap(), r);
        assert_eq!(comp(&r, &End).unwrap(), r);
        assert_eq!(comp(&send_int(End), &r).unwrap(), Bot);
        assert!(matches!(
            comp(&send_int(End), &send_int(End)),
            Err(AlgebraError::CompUndefined(..))
        ));
        assert!(comp(&Close, &End).is_err());
        assert_eq!(comp(&Close, &Close).unwrap(), Bot);
    }

    #[test]
    fn comp_rows_pads_with_end() {
        let row = comp_rows(&[send_int(End)], &[SessionType::recv(ValueType::Int, End), Bot]).unwrap();
        assert_eq!(row, vec![Bot, Bot]);
    }

    #[test]
    fn unfold_examples() {
        let u = SessionType::rec(0, send_int(Var(0)));
        assert_eq!(unfold(&u).unwrap(), send_int(u.clone()));
        assert_eq!(unfold(&SessionType::rec(0, End)).unwrap(), End);
        assert_eq!(unfold(&End), Err(AlgebraError::NotRecursive(End)));
    }

    #[test]
    fn unfold_leaves_shadowed_binder_alone() {
        // The inner `Rec 0` rebinds level 0, so its `Var 0` is not replaced.
        let u = SessionType::rec(0, send_int(SessionType::rec(0, Var(0))));
        assert_eq!(unfold(&u).unwrap(), send_int(SessionType::rec(0, Var(0))));
    }

    #[test]
    fn equal_unfolding_examples() {
        let a = SessionType::rec(0, send_int(Var(0)));
        assert!(equal_unfolding(&a, &unfold(&a).unwrap(), 8));
        assert!(!equal_unfolding(&End, &Bot, 3));
        let b = SessionType::rec(0, send_int(send_int(Var(0))));
        assert!(equal_unfolding(&a, &b, 8));
        assert!(!equal_unfolding(&a, &SessionType::rec(0, send_int(End)), 8));
    }

    #[test]
    fn completed_rows() {
        assert!(is_completed(&EnvRow::closed(vec![End, End])));
        assert!(!is_completed(&EnvRow::closed(vec![Bot])));
        assert!(is_completed(&EnvRow::closed(vec![])));
    }

    #[test]
    fn level_lookup() {
        let row = EnvRow::new(RowTail::Var(3), vec![End, Bot]);
        assert_eq!(row.lookup(LevelExpr::new(RowTail::Var(3), 1)), Some(&Bot));
        assert_eq!(row.lookup(LevelExpr::new(RowTail::Nil, 1)), None);
        assert_eq!(LevelExpr::new(RowTail::Var(1), 2).decide_eq(&LevelExpr::new(RowTail::Var(1), 2)), Some(true));
        assert_eq!(LevelExpr::new(RowTail::Var(1), 2).decide_eq(&LevelExpr::new(RowTail::Nil, 2)), None);
    }

    #[test]
    fn display_uses_standard_notation() {
        let t = SessionType::recv(
            ValueType::Int,
            SessionType::offer(send_int(UVar(7)), SessionType::send(ValueType::Bool, UVar(7))),
        );
        assert_eq!(t.to_string(), "Recv Int (Offer (Send Int a) (Send Bool a))");
        let r = SessionType::rec(1, SessionType::send(ValueType::List(Box::new(ValueType::Str)), Var(1)));
        assert_eq!(r.to_string(), "Rec (S Z) (Send [String] (Var (S Z)))");
        let row = EnvRow::new(RowTail::Var(0), vec![End, UVar(2)]);
        assert_eq!(row.to_string(), "ss :> End :> a");
    }
}
