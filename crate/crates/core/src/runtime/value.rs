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


//! Runtime values and expression evaluation.

use std::collections::HashMap;
use std::fmt;

use crate::surface::{BinOp, Expr, Pattern};

use super::RuntimeFault;

/// Identifier of a channel allocated during a run.
pub type ChanId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    Unit,
    List(Vec<Value>),
    Tagged(String, Vec<Value>),
    Chan(ChanId),
}

impl Value {
    /// Text shown by `print`: strings appear without quotes at the top level.
    pub fn display(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, xs: &[Value]| -> fmt::Result {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}")?;
            }
            Ok(())
        };
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Unit => f.write_str("()"),
            Value::List(xs) => {
                f.write_str("[")?;
                list(f, xs)?;
                f.write_str("]")
            }
            Value::Tagged(t, xs) if xs.is_empty() => f.write_str(t),
            Value::Tagged(t, xs) => {
                write!(f, "{t}(")?;
                list(f, xs)?;
                f.write_str(")")
            }
            Value::Chan(c) => write!(f, "<chan {c}>"),
        }
    }
}

pub type Env = HashMap<String, Value>;

fn mismatch(e: &Expr, want: &str, got: &Value) -> RuntimeFault {
    RuntimeFault::Eval(format!("`{}` evaluated to {got}, expected {want}", crate::surface::printer::expr_text(e)))
}

pub fn eval(e: &Expr, env: &Env) -> Result<Value, RuntimeFault> {
    let int = |x: &Expr| match eval(x, env)? {
        Value::Int(n) => Ok(n),
        other => Err(mismatch(x, "an integer", &other)),
    };
    Ok(match e {
        Expr::Int(n) => Value::Int(*n),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Str(s) => Value::Str(s.clone()),
        Expr::Unit => Value::Unit,
        Expr::List(xs) => Value::List(xs.iter().map(|x| eval(x, env)).collect::<Result<_, _>>()?),
        Expr::Var(v) => env.get(v).cloned().ok_or_else(|| RuntimeFault::Eval(format!("unbound name `{v}`")))?,
        Expr::Bin(op, a, b) => {
            let (x, y) = (int(a)?, int(b)?);
            match op {
                BinOp::Add => Value::Int(x.wrapping_add(y)),
                BinOp::Sub => Value::Int(x.wrapping_sub(y)),
                BinOp::Lt => Value::Bool(x < y),
                BinOp::Eq => Value::Bool(x == y),
            }
        }
        Expr::If(c, a, b) => match eval(c, env)? {
            Value::Bool(true) => eval(a, env)?,
            Value::Bool(false) => eval(b, env)?,
            other => return Err(mismatch(c, "a boolean", &other)),
        },
        Expr::Tag(t, xs) => Value::Tagged(t.clone(), xs.iter().map(|x| eval(x, env)).collect::<Result<_, _>>()?),
        Expr::Field(t, i, x) => match eval(x, env)? {
            Value::Tagged(u, fields) if &u == t && *i < fields.len() => fields[*i].clone(),
            other => return Err(mismatch(x, &format!("a `{t}` value with field {i}"), &other)),
        },
    })
}

/// Binds `v` against `p`; a tag mismatch is a fault.
pub fn bind(p: &Pattern, v: Value, env: &mut Env) -> Result<(), RuntimeFault> {
    match (p, v) {
        (Pattern::Wild, _) => Ok(()),
        (Pattern::Name(n), v) => {
            env.insert(n.clone(), v);
            Ok(())
        }
        (Pattern::Tagged(t, ps), Value::Tagged(u, fields)) if *t == u && ps.len() == fields.len() => {
            ps.iter().zip(fields).try_for_each(|(p, f)| bind(p, f, env))
        }
        (Pattern::Tagged(t, _), v) => Err(RuntimeFault::Eval(format!("pattern `{t}` does not match {v}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_forms() {
        let v = Value::Tagged("MAIL".into(), vec![Value::Str("a@b".into())]);
        assert_eq!(v.display(), "MAIL(\"a@b\")");
        assert_eq!(Value::List(vec![Value::Str("x".into())]).display(), "[\"x\"]");
        assert_eq!(Value::Str("Hello".into()).display(), "Hello");
        assert_eq!(Value::Tagged("QUIT".into(), vec![]).display(), "QUIT");
    }

    #[test]
    fn evaluation() {
        let mut env = Env::new();
        env.insert("x".into(), Value::Int(2));
        let e = Expr::If(
            Box::new(Expr::Bin(BinOp::Lt, Box::new(Expr::Var("x".into())), Box::new(Expr::Int(3)))),
            Box::new(Expr::Str("small".into())),
            Box::new(Expr::Str("big".into())),
        );
        assert_eq!(eval(&e, &env).unwrap(), Value::Str("small".into()));
        assert!(eval(&Expr::Var("y".into()), &env).is_err());
        let p = Pattern::Tagged("R2yz".into(), vec![Pattern::Name("m".into())]);
        bind(&p, Value::Tagged("R2yz".into(), vec![Value::Str("250".into())]), &mut env).unwrap();
        assert_eq!(env["m"], Value::Str("250".into()));
        assert!(bind(&p, Value::Tagged("R5yz".into(), vec![]), &mut env).is_err());
    }
}
