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


//! Algebraic laws of session types, printing/parsing round trips, soundness
//! of sequential composition, and capture-avoiding unfolding.

mod common;

use std::collections::HashMap;
use std::rc::Rc;

use common::{random_rec_type, random_type, Gen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sessinfer::infer::infer_program;
use sessinfer::infer::term::{Export, Imports, Terms};
use sessinfer::surface::{parse, parse_type};
use sessinfer::types::{comp, dual, unfold, write_session, AlgebraError, SessionType, ValueType, VarNames};

const PLAIN: Gen = Gen { depth: 6, recursive: false, close: true };
const RECURSIVE: Gen = Gen { depth: 6, recursive: true, close: true };

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dual_is_an_involution(seed in any::<u64>()) {
        let u = random_type(seed, RECURSIVE);
        let d = dual(&u).unwrap();
        prop_assert_eq!(dual(&d).unwrap(), u);
    }

    #[test]
    fn dual_usages_compose_to_bot(seed in any::<u64>()) {
        let u = random_type(seed, RECURSIVE);
        let d = dual(&u).unwrap();
        if u == SessionType::End {
            prop_assert_eq!(comp(&u, &d).unwrap(), SessionType::End);
        } else {
            prop_assert_eq!(comp(&u, &d).unwrap(), SessionType::Bot);
        }
    }

    #[test]
    fn end_is_the_unit_except_for_close(seed in any::<u64>()) {
        let u = random_type(seed, RECURSIVE);
        let r = comp(&u, &SessionType::End);
        if u == SessionType::Close {
            prop_assert!(matches!(r, Err(AlgebraError::CompUndefined(..))));
        } else {
            prop_assert_eq!(r.unwrap(), u);
        }
    }

    #[test]
    fn composition_commutes(s1 in any::<u64>(), s2 in any::<u64>(), pick in 0..3u8) {
        let a = random_type(s1, PLAIN);
        let b = match pick {
            0 => random_type(s2, PLAIN),
            1 => dual(&a).unwrap(),
            _ => SessionType::End,
        };
        prop_assert_eq!(comp(&a, &b), comp(&b, &a).map_err(|e| match e {
            AlgebraError::CompUndefined(x, y) => AlgebraError::CompUndefined(y, x),
            other => other,
        }));
    }

    #[test]
    fn non_dual_usages_do_not_compose(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_type(s1, PLAIN);
        let b = random_type(s2, PLAIN);
        let compatible = a == SessionType::End
            || b == SessionType::End
            || dual(&a).unwrap() == b;
        let forbidden = matches!((&a, &b), (SessionType::Close, SessionType::End) | (SessionType::End, SessionType::Close));
        prop_assert_eq!(comp(&a, &b).is_ok(), compatible && !forbidden);
    }
}

#[test]
fn bot_has_no_dual_and_composes_with_nothing_but_end() {
    assert!(matches!(dual(&SessionType::Bot), Err(AlgebraError::DualUndefined(_))));
    let inner = SessionType::throw(SessionType::Bot, SessionType::End);
    assert!(matches!(dual(&inner), Err(AlgebraError::DualUndefined(_))));
    assert_eq!(comp(&SessionType::Bot, &SessionType::End).unwrap(), SessionType::Bot);
    assert!(matches!(comp(&SessionType::Bot, &SessionType::Bot), Err(AlgebraError::CompUndefined(..))));
    assert!(matches!(comp(&SessionType::UVar(0), &SessionType::End), Err(AlgebraError::NotGround(_))));
}

#[test]
fn throw_and_catch_dualize_only_the_continuation() {
    let u = parse_type("Throw (Send Int End) (Recv Bool End)").unwrap();
    assert_eq!(dual(&u).unwrap(), parse_type("Catch (Send Int End) (Send Bool End)").unwrap());
    assert_eq!(dual(&SessionType::Close).unwrap(), SessionType::Close);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn printed_types_parse_back(seed in any::<u64>()) {
        let u = random_type(seed, RECURSIVE);
        prop_assert_eq!(parse_type(&u.to_string()).unwrap(), u);
    }
}

// ---------------------------------------------------------------------------
// Sequencing: typing `f; g` agrees with unifying f's post with g's pre.

/// A random straight-line use of channel `c`.
fn random_ops(rng: &mut ChaCha8Rng, prefix: &str) -> Vec<String> {
    let n = rng.gen_range(1..5);
    let mut ops = Vec::new();
    for i in 0..n {
        let op = match rng.gen_range(0..7) {
            0 => "send c 1".to_string(),
            1 => "send c True".to_string(),
            2 => "send c \"s\"".to_string(),
            3 => format!("{prefix}{i} <- recv c"),
            4 => "sel1 c".to_string(),
            5 => "sel2 c".to_string(),
            _ => {
                ops.push("close c".to_string());
                break;
            }
        };
        ops.push(op);
    }
    ops
}

struct Pair {
    pre: SessionType,
    post: SessionType,
}

fn pair_of(inf: &sessinfer::infer::Inference, name: &str) -> Pair {
    let sig = inf.get(name).unwrap();
    Pair { pre: sig.pre.entries[0].clone(), post: sig.post.entries[0].clone() }
}

fn render_pair(pre: &SessionType, post: &SessionType) -> String {
    let mut names = VarNames::new();
    let mut out = String::from("(");
    write_session(&mut out, pre, &mut names, false);
    out.push_str(", ");
    write_session(&mut out, post, &mut names, false);
    out.push(')');
    out
}

/// `Some(h's pair)` predicted from f and g alone, `None` if they clash.
fn predicted(f: &Pair, g: &Pair) -> Option<String> {
    let mut terms = Terms::new();
    let mut fim = Imports::default();
    let mut gim = Imports::default();
    let f_pre = terms.import(&f.pre, &mut fim);
    let f_post = terms.import(&f.post, &mut fim);
    let g_pre = terms.import(&g.pre, &mut gim);
    let g_post = terms.import(&g.post, &mut gim);
    terms.unify(f_post, g_pre).ok()?;
    let mut ex = Export::new(&terms);
    let pre = ex.session(f_pre).ok()?;
    let post = ex.session(g_post).ok()?;
    Some(render_pair(&pre, &post))
}

#[test]
fn sequencing_is_unification_of_post_and_pre() {
    let (mut clashes, mut composed) = (0, 0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_ops(&mut rng, "x");
        let g = random_ops(&mut rng, "y");
        let fg = [f.clone(), g.clone()].concat();
        let base = format!(
            "session f(c) {{ {} }}\nsession g(c) {{ {} }}\n",
            f.join("; "),
            g.join("; ")
        );
        let parts = infer_program(&parse(&base).unwrap()).unwrap();
        let expected = predicted(&pair_of(&parts, "f"), &pair_of(&parts, "g"));
        for h in [format!("session h(c) {{ {} }}", fg.join("; ")), "session h(c) { f(c); g(c) }".to_string()] {
            let src = format!("{base}{h}\n");
            let got = infer_program(&parse(&src).unwrap());
            match (&expected, got) {
                (None, Err(_)) => clashes += 1,
                (Some(want), Ok(inf)) => {
                    let p = pair_of(&inf, "h");
                    assert_eq!(&render_pair(&p.pre, &p.post), want, "{src}");
                    composed += 1;
                }
                (want, got) => panic!("{src}\npredicted {want:?}, inferred {:?}", got.map(|i| pair_of(&i, "h").pre)),
            }
        }
    }
    assert!(clashes > 0 && composed > 0, "{clashes} clashes, {composed} compositions");
}

// ---------------------------------------------------------------------------
// Unfolding: compared against an environment-based expansion that never
// substitutes and so cannot capture.

#[derive(Debug, PartialEq)]
enum Tree {
    Node(&'static str, Option<ValueType>, Vec<Tree>),
    Cut,
}

#[derive(Clone)]
struct Closure {
    rec: SessionType,
    env: Env,
}

#[derive(Clone, Default)]
struct Env(HashMap<u32, Rc<Closure>>);

fn tree(t: &SessionType, env: &Env, depth: usize) -> Tree {
    unroll(t, env, depth, 8)
}

/// `fuel` bounds consecutive variable lookups so that non-contractive
/// types like `Rec Z (Var Z)` terminate.
fn unroll(t: &SessionType, env: &Env, depth: usize, fuel: usize) -> Tree {
    use SessionType::*;
    if depth == 0 || fuel == 0 {
        return Tree::Cut;
    }
    let node = |name, v: Option<&ValueType>, kids: Vec<Tree>| Tree::Node(name, v.cloned(), kids);
    let pair = |name, a: &SessionType, b: &SessionType| {
        node(name, None, vec![tree(a, env, depth - 1), tree(b, env, depth - 1)])
    };
    match t {
        Send(v, k) => node("Send", Some(v), vec![tree(k, env, depth - 1)]),
        Recv(v, k) => node("Recv", Some(v), vec![tree(k, env, depth - 1)]),
        Select(a, b) => pair("Select", a, b),
        Offer(a, b) => pair("Offer", a, b),
        SelectN(a, b) => pair("SelectN", a, b),
        OfferN(a, b) => pair("OfferN", a, b),
        Throw(a, b) => pair("Throw", a, b),
        Catch(a, b) => pair("Catch", a, b),
        End => node("End", None, vec![]),
        Bot => node("Bot", None, vec![]),
        Close => node("Close", None, vec![]),
        UVar(_) => node("UVar", None, vec![]),
        Rec(k, body) => {
            let mut inner = env.clone();
            inner.0.insert(*k, Rc::new(Closure { rec: t.clone(), env: env.clone() }));
            unroll(body, &inner, depth, fuel)
        }
        Var(k) => match env.0.get(k) {
            Some(c) => unroll(&c.rec, &c.env, depth, fuel - 1),
            None => node("Free", None, vec![]),
        },
    }
}

#[test]
fn unfolding_preserves_the_infinite_tree() {
    for seed in 0..20u64 {
        let u = random_rec_type(seed, 6);
        let once = unfold(&u).unwrap();
        assert_eq!(tree(&once, &Env::default(), 12), tree(&u, &Env::default(), 12), "{u}");
    }
}

#[test]
fn unfolding_renames_binders_that_would_capture() {
    // Nested binders whose bodies refer to both levels.
    let u = parse_type("Rec Z (Send Int (Rec (S Z) (Offer (Var Z) (Var (S Z)))))").unwrap();
    let once = unfold(&u).unwrap();
    assert_eq!(tree(&once, &Env::default(), 10), tree(&u, &Env::default(), 10));
    // An open replacement: substituting `Var (S Z)` under a `Rec (S Z)`
    // must rename the inner binder.
    let t = parse_type("Rec (S Z) (Send Int (Var Z))").unwrap();
    let s = sessinfer::types::subst_level(&t, 0, &SessionType::Var(1));
    match &s {
        SessionType::Rec(k, body) => {
            assert_ne!(*k, 1);
            assert_eq!(**body, SessionType::send(ValueType::Int, SessionType::Var(1)));
        }
        other => panic!("{other}"),
    }
}
