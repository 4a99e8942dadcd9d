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


//! The typing judgment `Γ ⊢ P ▷ Δ` for process terms, checked by search.
//!
//! The checker is syntax directed except at parallel composition, where
//! every entry of `Δ` must be split between the two components. Each entry
//! has at most three candidate splits: all to the left, all to the right,
//! or, for a `Bot` entry used on both sides, a protocol and its dual. The
//! protocol of a `Bot` split is read off the two components' usage of the
//! channel. Failed sub-searches are memoised.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use super::Process;
use crate::surface::printer::expr_text;
use crate::surface::{BinOp, Expr, IoAction, Pattern, Program};
use crate::types::{dual, SessionType, ValueType};

/// Value sorting `Γ`.
pub type Sorting = BTreeMap<String, ValueType>;
/// Channel environment `Δ`.
pub type SessionEnv = BTreeMap<String, SessionType>;

/// Placeholder for a value type nothing constrains.
const ANY: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprTypeError {
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("unknown constructor `{0}`")]
    UnknownTag(String),
    #[error("`{expr}` has type `{found}`, expected `{expected}`")]
    Mismatch { expr: String, expected: ValueType, found: ValueType },
    #[error("`{tag}` takes {expected} field(s), given {found}")]
    Arity { tag: String, expected: usize, found: usize },
}

/// Why no derivation exists.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("[{rule}] {reason} in `{process}`")]
pub struct Failure {
    pub rule: &'static str,
    pub process: String,
    pub reason: String,
}

/// A derivation tree; each node records the rule and its conclusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: &'static str,
    pub process: String,
    pub env: String,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(f, "{:indent$}[{}] {} ▷ {}", "", self.rule, self.process, self.env, indent = depth * 2)?;
        self.premises.iter().try_for_each(|p| p.write(f, depth + 1))
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

fn env_text(delta: &SessionEnv) -> String {
    if delta.is_empty() {
        return "·".into();
    }
    delta.iter().map(|(c, u)| format!("{c}:{u}")).collect::<Vec<_>>().join(", ")
}

/// The leading action of a process, for compact derivation output.
fn head(p: &Process) -> String {
    let text = p.to_string();
    match p {
        Process::Inact => text,
        Process::Par(..) => "(… ||| …)".into(),
        Process::Offer(c, ..) => format!("offer {c} {{…}} {{…}}"),
        _ => match text.find(". ").filter(|&i| !text[..i].contains('λ')) {
            Some(i) => format!("{}. …", &text[..i]),
            None => match text.find(". ") {
                Some(i) => format!("{}. …)", &text[..i]),
                None => text,
            },
        },
    }
}

/// Value types agree; an unconstrained placeholder agrees with anything.
fn compatible(a: &ValueType, b: &ValueType) -> bool {
    match (a, b) {
        (ValueType::Var(_), _) | (_, ValueType::Var(_)) => true,
        (ValueType::List(x), ValueType::List(y)) => compatible(x, y),
        _ => a == b,
    }
}

/// Protocols agree up to unconstrained payload types.
fn same_protocol(a: &SessionType, b: &SessionType) -> bool {
    use SessionType::*;
    match (a, b) {
        (Send(v, k), Send(w, j)) | (Recv(v, k), Recv(w, j)) => compatible(v, w) && same_protocol(k, j),
        (Select(x, y), Select(z, w))
        | (Offer(x, y), Offer(z, w))
        | (Throw(x, y), Throw(z, w))
        | (Catch(x, y), Catch(z, w)) => same_protocol(x, z) && same_protocol(y, w),
        _ => a == b,
    }
}

fn payload<'p>(prog: &'p Program, tag: &str) -> Result<&'p [ValueType], ExprTypeError> {
    prog.data(tag).map(|d| d.payload.as_slice()).ok_or_else(|| ExprTypeError::UnknownTag(tag.into()))
}

/// Types an expression under `gamma`.
pub fn check_expr(prog: &Program, gamma: &Sorting, e: &Expr) -> Result<ValueType, ExprTypeError> {
    let want = |x: &Expr, expected: ValueType| -> Result<ValueType, ExprTypeError> {
        let found = check_expr(prog, gamma, x)?;
        if compatible(&expected, &found) {
            Ok(found)
        } else {
            Err(ExprTypeError::Mismatch { expr: expr_text(x), expected, found })
        }
    };
    Ok(match e {
        Expr::Int(_) => ValueType::Int,
        Expr::Bool(_) => ValueType::Bool,
        Expr::Str(_) => ValueType::Str,
        Expr::Unit => ValueType::Unit,
        Expr::Var(v) => gamma.get(v).cloned().ok_or_else(|| ExprTypeError::Unbound(v.clone()))?,
        Expr::List(items) => {
            let mut elem = ValueType::Var(ANY);
            for x in items {
                let t = want(x, elem.clone())?;
                if matches!(elem, ValueType::Var(_)) {
                    elem = t;
                }
            }
            ValueType::List(Box::new(elem))
        }
        Expr::Bin(op, a, b) => {
            want(a, ValueType::Int)?;
            want(b, ValueType::Int)?;
            match op {
                BinOp::Add | BinOp::Sub => ValueType::Int,
                BinOp::Lt | BinOp::Eq => ValueType::Bool,
            }
        }
        Expr::If(c, a, b) => {
            want(c, ValueType::Bool)?;
            let ta = check_expr(prog, gamma, a)?;
            let tb = want(b, ta.clone())?;
            if matches!(ta, ValueType::Var(_)) {
                tb
            } else {
                ta
            }
        }
        Expr::Tag(tag, args) => {
            let fields = payload(prog, tag)?;
            if fields.len() != args.len() {
                return Err(ExprTypeError::Arity { tag: tag.clone(), expected: fields.len(), found: args.len() });
            }
            for (x, t) in args.iter().zip(fields) {
                want(x, t.clone())?;
            }
            ValueType::Tagged(tag.clone())
        }
        Expr::Field(tag, i, x) => {
            let fields = payload(prog, tag)?;
            want(x, ValueType::Tagged(tag.clone()))?;
            fields
                .get(*i)
                .cloned()
                .ok_or(ExprTypeError::Arity { tag: tag.clone(), expected: fields.len(), found: *i + 1 })?
        }
    })
}

/// Checks `Γ ⊢ P ▷ Δ` trying every split at every parallel composition:
/// each entry may go wholly left or wholly right, and a `Bot` entry may
/// also be split as any protocol of `universe` and its dual. Slow; meant to
/// cross-validate [`check`].
pub fn check_exhaustive(
    prog: &Program,
    gamma: &Sorting,
    p: &Process,
    delta: &SessionEnv,
    universe: Vec<SessionType>,
) -> Result<Derivation, Failure> {
    Checker::new(prog, Splits::Exhaustive(universe)).run(gamma, p, delta)
}

/// Every `Bot`-free, ground protocol up to `depth` constructors deep over
/// the given payload types.
pub fn protocols_up_to(depth: usize, values: &[ValueType]) -> Vec<SessionType> {
    let mut level = vec![SessionType::End];
    for _ in 1..depth {
        let mut next = vec![SessionType::End];
        for k in &level {
            for v in values {
                next.push(SessionType::send(v.clone(), k.clone()));
                next.push(SessionType::recv(v.clone(), k.clone()));
            }
            for j in &level {
                next.push(SessionType::select(k.clone(), j.clone()));
                next.push(SessionType::offer(k.clone(), j.clone()));
                next.push(SessionType::throw(k.clone(), j.clone()));
                next.push(SessionType::catch(k.clone(), j.clone()));
            }
        }
        level = next;
    }
    level
}

/// How parallel composition enumerates splits.
#[derive(Debug, Clone)]
pub(crate) enum Splits {
    /// Candidates pruned by free names, with memoised failures.
    Pruned,
    /// Every split of every entry; `Bot` entries additionally try each
    /// protocol in the given universe.
    Exhaustive(Vec<SessionType>),
}

pub(crate) struct Checker<'a> {
    prog: &'a Program,
    splits: Splits,
    memo: HashMap<(usize, String), Failure>,
}

/// Checks `Γ ⊢ P ▷ Δ`, returning a derivation.
pub fn check(prog: &Program, gamma: &Sorting, p: &Process, delta: &SessionEnv) -> Result<Derivation, Failure> {
    Checker::new(prog, Splits::Pruned).run(gamma, p, delta)
}

impl<'a> Checker<'a> {
    pub(crate) fn new(prog: &'a Program, splits: Splits) -> Self {
        Checker { prog, splits, memo: HashMap::new() }
    }

    fn fail(rule: &'static str, p: &Process, reason: impl Into<String>) -> Failure {
        Failure { rule, process: head(p), reason: reason.into() }
    }

    fn node(rule: &'static str, p: &Process, delta: &SessionEnv, premises: Vec<Derivation>) -> Derivation {
        Derivation { rule, process: head(p), env: env_text(delta), premises }
    }

    pub(crate) fn run(&mut self, gamma: &Sorting, p: &Process, delta: &SessionEnv) -> Result<Derivation, Failure> {
        let memoise = matches!(self.splits, Splits::Pruned);
        let key = (p as *const Process as usize, format!("{delta:?}"));
        if memoise {
            if let Some(f) = self.memo.get(&key) {
                return Err(f.clone());
            }
        }
        let out = self.rule(gamma, p, delta);
        if let (true, Err(f)) = (memoise, &out) {
            self.memo.insert(key, f.clone());
        }
        out
    }

    fn entry(rule: &'static str, p: &Process, delta: &SessionEnv, c: &str) -> Result<SessionType, Failure> {
        match delta.get(c) {
            Some(SessionType::Rec(..)) => {
                let u = crate::types::unfold(&delta[c]).map_err(|e| Self::fail(rule, p, e.to_string()))?;
                Ok(u)
            }
            Some(u) => Ok(u.clone()),
            None => Err(Self::fail(rule, p, format!("`{c}` is not in the environment"))),
        }
    }

    fn shape_error(rule: &'static str, p: &Process, c: &str, want: &str, found: &SessionType) -> Failure {
        Self::fail(rule, p, format!("`{c}` has type `{found}`, expected {want}"))
    }

    fn bind(&self, rule: &'static str, p: &Process, pat: &Pattern, v: &ValueType, gamma: &mut Sorting) -> Result<(), Failure> {
        match pat {
            Pattern::Wild => Ok(()),
            Pattern::Name(n) => {
                gamma.insert(n.clone(), v.clone());
                Ok(())
            }
            Pattern::Tagged(tag, subs) => {
                let want = ValueType::Tagged(tag.clone());
                if !compatible(&want, v) {
                    return Err(Self::fail(rule, p, format!("pattern `{tag}` cannot match a value of type `{v}`")));
                }
                let fields = payload(self.prog, tag).map_err(|e| Self::fail(rule, p, e.to_string()))?;
                for (s, t) in subs.iter().zip(fields) {
                    self.bind(rule, p, s, t, gamma)?;
                }
                Ok(())
            }
        }
    }

    fn value(&self, rule: &'static str, p: &Process, gamma: &Sorting, e: &Expr) -> Result<ValueType, Failure> {
        check_expr(self.prog, gamma, e).map_err(|err| Self::fail(rule, p, err.to_string()))
    }

    fn rule(&mut self, gamma: &Sorting, p: &Process, delta: &SessionEnv) -> Result<Derivation, Failure> {
        let with = |c: &str, u: SessionType| {
            let mut d = delta.clone();
            d.insert(c.to_string(), u);
            d
        };
        match p {
            Process::Inact => match delta.iter().find(|(_, u)| **u != SessionType::End) {
                Some((c, u)) => Err(Self::fail("Inact", p, format!("`{c}` is not completed: `{u}`"))),
                None => Ok(Self::node("Inact", p, delta, vec![])),
            },
            Process::Send(c, e, k) => match Self::entry("Out", p, delta, c)? {
                SessionType::Send(v, u) => {
                    let found = self.value("Out", p, gamma, e)?;
                    if !compatible(&v, &found) {
                        return Err(Self::fail("Out", p, format!("sent value has type `{found}`, expected `{v}`")));
                    }
                    let sub = self.run(gamma, k, &with(c, *u))?;
                    Ok(Self::node("Out", p, delta, vec![sub]))
                }
                other => Err(Self::shape_error("Out", p, c, "an output", &other)),
            },
            Process::Recv(c, pat, k) => match Self::entry("In", p, delta, c)? {
                SessionType::Recv(v, u) => {
                    let mut g = gamma.clone();
                    self.bind("In", p, pat, &v, &mut g)?;
                    let sub = self.run(&g, k, &with(c, *u))?;
                    Ok(Self::node("In", p, delta, vec![sub]))
                }
                other => Err(Self::shape_error("In", p, c, "an input", &other)),
            },
            Process::Sel1(c, k) | Process::Sel2(c, k) => {
                let rule = if matches!(p, Process::Sel1(..)) { "Sel1" } else { "Sel2" };
                match Self::entry(rule, p, delta, c)? {
                    SessionType::Select(a, b) => {
                        let u = if rule == "Sel1" { *a } else { *b };
                        let sub = self.run(gamma, k, &with(c, u))?;
                        Ok(Self::node(rule, p, delta, vec![sub]))
                    }
                    other => Err(Self::shape_error(rule, p, c, "a selection", &other)),
                }
            }
            Process::Offer(c, l, r) => match Self::entry("Bra", p, delta, c)? {
                SessionType::Offer(a, b) => {
                    let left = self.run(gamma, l, &with(c, *a))?;
                    let right = self.run(gamma, r, &with(c, *b))?;
                    Ok(Self::node("Bra", p, delta, vec![left, right]))
                }
                other => Err(Self::shape_error("Bra", p, c, "an offer", &other)),
            },
            Process::SendS(c, d, k) => match Self::entry("Thr", p, delta, c)? {
                SessionType::Throw(u1, u2) => {
                    let td = Self::entry("Thr", p, delta, d)?;
                    // The thrower may keep a share of `d`: td = u1 ⊕ rest.
                    let mut rests = Vec::new();
                    if same_protocol(&td, &u1) {
                        rests.push(SessionType::End);
                    }
                    if td == SessionType::Bot {
                        rests.extend(dual(&u1).ok());
                    }
                    if *u1 == SessionType::End {
                        rests.push(td.clone());
                    }
                    rests.dedup();
                    let mut first = None;
                    for rest in rests {
                        let mut d2 = with(c, (*u2).clone());
                        d2.insert(d.clone(), rest);
                        match self.run(gamma, k, &d2) {
                            Ok(sub) => return Ok(Self::node("Thr", p, delta, vec![sub])),
                            Err(f) => {
                                first.get_or_insert(f);
                            }
                        }
                    }
                    Err(first.unwrap_or_else(|| {
                        Self::fail("Thr", p, format!("`{d}` has type `{td}`, which does not contain `{u1}`"))
                    }))
                }
                other => Err(Self::shape_error("Thr", p, c, "a channel output", &other)),
            },
            Process::RecvS(c, d, k) => match Self::entry("Cat", p, delta, c)? {
                SessionType::Catch(u1, u2) => {
                    if delta.contains_key(d) {
                        return Err(Self::fail("Cat", p, format!("`{d}` is already in the environment")));
                    }
                    let mut d2 = with(c, *u2);
                    d2.insert(d.clone(), *u1);
                    let sub = self.run(gamma, k, &d2)?;
                    Ok(Self::node("Cat", p, delta, vec![sub]))
                }
                other => Err(Self::shape_error("Cat", p, c, "a channel input", &other)),
            },
            Process::New(c, k) => {
                if delta.contains_key(c) {
                    return Err(Self::fail("Cres", p, format!("`{c}` is already in the environment")));
                }
                let sub = self.run(gamma, k, &with(c, SessionType::Bot))?;
                Ok(Self::node("Cres", p, delta, vec![sub]))
            }
            Process::Io(action, bind, k) => {
                let mut g = gamma.clone();
                match action {
                    IoAction::Print(e) => {
                        self.value("Io", p, gamma, e)?;
                    }
                    IoAction::Readline => {
                        if let Some(pat) = bind {
                            self.bind("Io", p, pat, &ValueType::Str, &mut g)?;
                        }
                    }
                }
                let sub = self.run(&g, k, delta)?;
                Ok(Self::node("Io", p, delta, vec![sub]))
            }
            Process::Par(l, r) => self.par(gamma, p, l, r, delta),
        }
    }

    /// Candidate splits of one entry.
    fn options(&self, gamma: &Sorting, c: &str, u: &SessionType, l: &Process, r: &Process, delta: &SessionEnv) -> Vec<(SessionType, SessionType)> {
        let end = SessionType::End;
        let exhaustive = matches!(self.splits, Splits::Exhaustive(_));
        let (in_l, in_r) = (l.free_names().contains(c), r.free_names().contains(c));
        if !exhaustive {
            if *u == end {
                return vec![(end.clone(), end)];
            }
            match (in_l, in_r) {
                (false, true) => return vec![(end, u.clone())],
                (true, false) | (false, false) => return vec![(u.clone(), end)],
                _ => {}
            }
        }
        let mut out = vec![(u.clone(), end.clone()), (end.clone(), u.clone())];
        if *u == SessionType::Bot {
            let mut protocols = Vec::new();
            if in_l || in_r {
                protocols.push(super::synth::split_protocol(self.prog, gamma, delta, c, l, r));
            }
            if let Splits::Exhaustive(universe) = &self.splits {
                protocols.extend(universe.iter().cloned());
            }
            for a in protocols {
                if let Ok(b) = dual(&a) {
                    if !out.contains(&(a.clone(), b.clone())) {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }

    fn par(&mut self, gamma: &Sorting, p: &Process, l: &Process, r: &Process, delta: &SessionEnv) -> Result<Derivation, Failure> {
        let entries: Vec<(String, Vec<(SessionType, SessionType)>)> = delta
            .iter()
            .map(|(c, u)| (c.clone(), self.options(gamma, c, u, l, r, delta)))
            .collect();
        let mut choice = vec![0usize; entries.len()];
        let mut first: Option<Failure> = None;
        loop {
            let mut dl = SessionEnv::new();
            let mut dr = SessionEnv::new();
            for ((c, opts), &i) in entries.iter().zip(&choice) {
                dl.insert(c.clone(), opts[i].0.clone());
                dr.insert(c.clone(), opts[i].1.clone());
            }
            let attempt = self.run(gamma, l, &dl).and_then(|a| Ok((a, self.run(gamma, r, &dr)?)));
            match attempt {
                Ok((a, b)) => return Ok(Self::node("Conc", p, delta, vec![a, b])),
                Err(f) => {
                    first.get_or_insert(f);
                }
            }
            // Next split in the product, odometer style.
            let mut k = 0;
            loop {
                if k == entries.len() {
                    return Err(first.unwrap_or_else(|| Self::fail("Conc", p, "no split of the environment")));
                }
                choice[k] += 1;
                if choice[k] < entries[k].1.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::elaborate;
    use crate::surface::parse;

    fn check_main(src: &str) -> Result<Derivation, Failure> {
        let prog = parse(src).unwrap();
        let p = elaborate(&prog, "main").unwrap();
        check(&prog, &Sorting::new(), &p, &SessionEnv::new())
    }

    const CALC: &str = "session server(c) { x <- recv c; y <- recv c; offer c { send c (x + y) } { send c (x < y) } }\n\
        session client(c) { send c 123; send c 456; sel2 c; ans <- recv c; io print(ans) }\n\
        session main() { c <- new; fork server(c); client(c) }";

    #[test]
    fn derives_the_calculator() {
        let d = check_main(CALC).unwrap();
        assert_eq!(d.rule, "Cres");
        assert_eq!(d.premises[0].rule, "Conc");
        assert!(d.to_string().contains("[Bra] offer c {…} {…} ▷ c:Offer (Send Int End) (Send Bool End)"), "{d}");
    }

    #[test]
    fn rejects_a_mistyped_client() {
        let bad = CALC.replace("send c 456", "send c True");
        assert!(check_main(&bad).is_err());
        let bad = CALC.replace("sel2 c", "sel1 c; sel2 c");
        assert!(check_main(&bad).is_err());
    }

    #[test]
    fn delegation_keeps_the_throwers_share() {
        let src = "session main() { c <- new; fork { d <- catch c; send d \"Hello\" }; \
                   d <- new; throw c d; s <- recv d; io print(s) }";
        let d = check_main(src).unwrap();
        assert!(d.to_string().contains("[Thr]"), "{d}");
        let bad = src.replace("io print(s)", "io print(s + 1)");
        assert!(check_main(&bad).is_err());
    }

    #[test]
    fn unfinished_channels_are_rejected() {
        let f = check_main("session main() { c <- new; fork { send c 1 } }").unwrap_err();
        assert!(f.to_string().contains("not completed") || f.rule == "Out", "{f}");
    }

    #[test]
    fn expression_typing() {
        let prog = parse("data MAIL(String)\nsession main() { }").unwrap();
        let mut g = Sorting::new();
        g.insert("x".into(), ValueType::Int);
        let t = |e: &str, g: &Sorting| {
            let p = parse(&format!("session m(c) {{ send c {e} }}")).unwrap();
            let crate::surface::StmtKind::Send(_, e) = &p.sessions[0].body[0].kind else { unreachable!() };
            check_expr(&prog, g, e)
        };
        assert_eq!(t("(x + 1 < 3)", &g), Ok(ValueType::Bool));
        assert_eq!(t("MAIL(\"a\")", &g), Ok(ValueType::Tagged("MAIL".into())));
        assert_eq!(t("[1, 2]", &g), Ok(ValueType::List(Box::new(ValueType::Int))));
        assert!(matches!(t("(x + True)", &g), Err(ExprTypeError::Mismatch { .. })));
        assert!(matches!(t("y", &g), Err(ExprTypeError::Unbound(_))));
        assert!(matches!(t("[1, \"a\"]", &g), Err(ExprTypeError::Mismatch { .. })));
    }

    #[test]
    fn exhaustive_search_agrees() {
        let values = [ValueType::Int, ValueType::Bool];
        for src in [CALC.to_string(), CALC.replace("send c 456", "send c True")] {
            let prog = parse(&src).unwrap();
            let p = elaborate(&prog, "main").unwrap();
            let fast = check(&prog, &Sorting::new(), &p, &SessionEnv::new()).is_ok();
            let slow =
                check_exhaustive(&prog, &Sorting::new(), &p, &SessionEnv::new(), protocols_up_to(2, &values)).is_ok();
            assert_eq!(fast, slow);
        }
    }
}
