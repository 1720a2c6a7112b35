//! Big-step tracing evaluation `γ, e ⇓ v, T`.

use crate::error::{Error, Result};
use crate::syntax::{Env, Expr, Prim, Trace, Value};

/// Default step budget for evaluation and replay.
pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Counts rule applications and fails once the budget is spent.
#[derive(Clone, Copy, Debug)]
pub struct Fuel {
    limit: u64,
    used: u64,
}

impl Fuel {
    pub fn new(limit: u64) -> Fuel {
        Fuel { limit, used: 0 }
    }

    pub fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            Err(Error::FuelExhausted(self.limit))
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}

impl Default for Fuel {
    fn default() -> Fuel {
        Fuel::new(DEFAULT_FUEL)
    }
}

fn int_arg(op: Prim, v: &Value) -> Result<i64> {
    v.as_int().ok_or_else(|| Error::eval(format!("`{op}` expects an integer, got {}", v.describe())))
}

fn bool_arg(op: Prim, v: &Value) -> Result<bool> {
    v.as_bool().ok_or_else(|| Error::eval(format!("`{op}` expects a boolean, got {}", v.describe())))
}

/// The semantic operation behind a primitive. Integer arithmetic wraps.
pub fn eval_primitive(op: Prim, args: &[Value]) -> Result<Value> {
    if args.len() != op.arity() {
        return Err(Error::eval(format!("`{op}` expects {} arguments, got {}", op.arity(), args.len())));
    }
    Ok(match op {
        Prim::Add => Value::int(int_arg(op, &args[0])?.wrapping_add(int_arg(op, &args[1])?)),
        Prim::Sub => Value::int(int_arg(op, &args[0])?.wrapping_sub(int_arg(op, &args[1])?)),
        Prim::Mul => Value::int(int_arg(op, &args[0])?.wrapping_mul(int_arg(op, &args[1])?)),
        Prim::Eq => Value::bool(int_arg(op, &args[0])? == int_arg(op, &args[1])?),
        Prim::Lt => Value::bool(int_arg(op, &args[0])? < int_arg(op, &args[1])?),
        Prim::And => Value::bool(bool_arg(op, &args[0])? && bool_arg(op, &args[1])?),
        Prim::Or => Value::bool(bool_arg(op, &args[0])? || bool_arg(op, &args[1])?),
        Prim::Not => Value::bool(!bool_arg(op, &args[0])?),
    })
}

/// Evaluate with the default fuel.
pub fn eval(env: &Env, e: &Expr) -> Result<(Value, Trace)> {
    eval_with_fuel(env, e, &mut Fuel::default())
}

pub fn eval_with_fuel(env: &Env, e: &Expr, fuel: &mut Fuel) -> Result<(Value, Trace)> {
    let mut env = env.clone();
    go(&mut env, e, fuel)
}

/// Grow the native stack when it runs low; every recursive walker over
/// traces, values or expressions goes through this.
pub(crate) fn deep<R>(f: impl FnOnce() -> R) -> R {
    stacker::maybe_grow(64 * 1024, 4 << 20, f)
}

fn go(env: &mut Env, e: &Expr, fuel: &mut Fuel) -> Result<(Value, Trace)> {
    deep(|| step(env, e, fuel))
}

fn step(env: &mut Env, e: &Expr, fuel: &mut Fuel) -> Result<(Value, Trace)> {
    fuel.tick()?;
    Ok(match e {
        Expr::Var(x) => (env.lookup(x)?.clone(), Trace::Var(x.clone())),
        Expr::Const(c) => (Value::Const(*c), Trace::Const(*c)),
        Expr::Prim(op, args) => {
            let mut vs = Vec::with_capacity(args.len());
            let mut ts = Vec::with_capacity(args.len());
            for a in args {
                let (v, t) = go(env, a, fuel)?;
                vs.push(v);
                ts.push(t);
            }
            (eval_primitive(*op, &vs)?, Trace::Prim(*op, ts))
        }
        Expr::Let(x, e1, e2) => {
            let (v1, t1) = go(env, e1, fuel)?;
            env.push(x.clone(), v1);
            let r = go(env, e2, fuel);
            env.pop();
            let (v2, t2) = r?;
            (v2, Trace::Let(Box::new(t1), x.clone(), Box::new(t2)))
        }
        Expr::Pair(a, b) => {
            let (va, ta) = go(env, a, fuel)?;
            let (vb, tb) = go(env, b, fuel)?;
            (Value::pair(va, vb), Trace::Pair(Box::new(ta), Box::new(tb)))
        }
        Expr::Fst(a) | Expr::Snd(a) => {
            let (v, t) = go(env, a, fuel)?;
            let Value::Pair(l, r) = v else {
                return Err(Error::eval(format!("projection from {}", v.describe())));
            };
            if matches!(e, Expr::Fst(_)) {
                (*l, Trace::Fst(Box::new(t)))
            } else {
                (*r, Trace::Snd(Box::new(t)))
            }
        }
        Expr::Inl(ann, a) => {
            let (v, t) = go(env, a, fuel)?;
            (Value::inl(v), Trace::Inl(ann.clone(), Box::new(t)))
        }
        Expr::Inr(ann, a) => {
            let (v, t) = go(env, a, fuel)?;
            (Value::inr(v), Trace::Inr(ann.clone(), Box::new(t)))
        }
        Expr::Roll(ann, a) => {
            let (v, t) = go(env, a, fuel)?;
            (Value::roll(v), Trace::Roll(ann.clone(), Box::new(t)))
        }
        Expr::Unroll(a) => {
            let (v, t) = go(env, a, fuel)?;
            let Value::Roll(inner) = v else {
                return Err(Error::eval(format!("unroll of {}", v.describe())));
            };
            (*inner, Trace::Unroll(Box::new(t)))
        }
        Expr::Case(s, m) => {
            let (v, ts) = go(env, s, fuel)?;
            let (left, payload) = match v {
                Value::Inl(p) => (true, *p),
                Value::Inr(p) => (false, *p),
                other => return Err(Error::eval(format!("case on {}", other.describe()))),
            };
            let (x, body) = if left { (&m.x1, &m.e1) } else { (&m.x2, &m.e2) };
            env.push(x.clone(), payload);
            let r = go(env, body, fuel);
            env.pop();
            let (vb, tb) = r?;
            let t = if left {
                Trace::CaseL(m.clone(), Box::new(ts), Box::new(tb))
            } else {
                Trace::CaseR(m.clone(), Box::new(ts), Box::new(tb))
            };
            (vb, t)
        }
        Expr::Fun(k) => (Value::Closure(k.clone(), env.restrict(k.free_vars())?), Trace::Fun(k.clone())),
        Expr::App(f, a) => {
            let (vf, tf) = go(env, f, fuel)?;
            let (va, ta) = go(env, a, fuel)?;
            let Value::Closure(k, rho) = &vf else {
                return Err(Error::eval(format!("application of {}", vf.describe())));
            };
            let k = k.clone();
            let mut inner = rho.clone();
            inner.push(k.name.clone(), vf.clone());
            inner.push(k.param.clone(), va);
            let (v, tb) = go(&mut inner, &k.body, fuel)?;
            (v, Trace::App(k, Box::new(tf), Box::new(ta), Box::new(tb)))
        }
        // Labels only mark inputs; they have no runtime effect.
        Expr::Label(a, _) => go(env, a, fuel)?,
    })
}
