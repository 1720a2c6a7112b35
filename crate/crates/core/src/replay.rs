//! Trace replay `γ, T ↷ v`. Replay follows the recorded control flow and
//! fails as soon as the environment would send evaluation elsewhere.
//! Bodies of calls are not compared against their code pointers.

use crate::error::{Error, Result};
use crate::eval::{deep, eval_primitive, Fuel};
use crate::pretty::pretty_trace;
use crate::syntax::{Env, Trace, Value};

pub(crate) fn inconsistent(t: &Trace, reason: impl Into<String>) -> Error {
    let mut node = pretty_trace(t);
    if node.chars().count() > 60 {
        node = node.chars().take(57).collect::<String>() + "...";
    }
    Error::ReplayInconsistent { node, reason: reason.into() }
}

pub fn replay(env: &Env, t: &Trace) -> Result<Value> {
    replay_with_fuel(env, t, &mut Fuel::default())
}

pub fn replay_with_fuel(env: &Env, t: &Trace, fuel: &mut Fuel) -> Result<Value> {
    let mut env = env.clone();
    go(&mut env, t, fuel)
}

pub fn is_consistent(env: &Env, t: &Trace) -> bool {
    replay(env, t).is_ok()
}

fn go(env: &mut Env, t: &Trace, fuel: &mut Fuel) -> Result<Value> {
    deep(|| step(env, t, fuel))
}

fn step(env: &mut Env, t: &Trace, fuel: &mut Fuel) -> Result<Value> {
    fuel.tick()?;
    Ok(match t {
        Trace::Hole => return Err(inconsistent(t, "cannot replay a hole")),
        Trace::Var(x) => env.lookup(x)?.clone(),
        Trace::Const(c) => Value::Const(*c),
        Trace::Prim(op, args) => {
            let vs = args.iter().map(|a| go(env, a, fuel)).collect::<Result<Vec<_>>>()?;
            eval_primitive(*op, &vs).map_err(|e| inconsistent(t, e.to_string()))?
        }
        Trace::Let(a, x, b) => {
            let v = go(env, a, fuel)?;
            env.push(x.clone(), v);
            let r = go(env, b, fuel);
            env.pop();
            r?
        }
        Trace::Pair(a, b) => Value::pair(go(env, a, fuel)?, go(env, b, fuel)?),
        Trace::Fst(a) | Trace::Snd(a) => match go(env, a, fuel)? {
            Value::Pair(l, r) => *if matches!(t, Trace::Fst(_)) { l } else { r },
            v => return Err(inconsistent(t, format!("projection from {}", v.describe()))),
        },
        Trace::Inl(_, a) => Value::inl(go(env, a, fuel)?),
        Trace::Inr(_, a) => Value::inr(go(env, a, fuel)?),
        Trace::Roll(_, a) => Value::roll(go(env, a, fuel)?),
        Trace::Unroll(a) => match go(env, a, fuel)? {
            Value::Roll(v) => *v,
            v => return Err(inconsistent(t, format!("unroll of {}", v.describe()))),
        },
        Trace::CaseL(m, s, b) | Trace::CaseR(m, s, b) => {
            let left = matches!(t, Trace::CaseL(..));
            let (x, payload) = match (go(env, s, fuel)?, left) {
                (Value::Inl(p), true) => (&m.x1, *p),
                (Value::Inr(p), false) => (&m.x2, *p),
                (v, true) => return Err(inconsistent(t, format!("trace records inl branch, replay produced {}", v.describe()))),
                (v, false) => return Err(inconsistent(t, format!("trace records inr branch, replay produced {}", v.describe()))),
            };
            env.push(x.clone(), payload);
            let r = go(env, b, fuel);
            env.pop();
            r?
        }
        Trace::Fun(k) => Value::Closure(k.clone(), env.restrict(k.free_vars())?),
        Trace::App(k, f, a, body) => {
            let vf = go(env, f, fuel)?;
            let va = go(env, a, fuel)?;
            let Value::Closure(k2, rho) = &vf else {
                return Err(inconsistent(t, format!("application of {}", vf.describe())));
            };
            if k2 != k {
                return Err(inconsistent(t, format!("trace records a call to `{}`, replay produced closure of `{}`", k.name, k2.name)));
            }
            let mut inner = rho.clone();
            inner.push(k.name.clone(), vf.clone());
            inner.push(k.param.clone(), va);
            go(&mut inner, body, fuel)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval;
    use crate::parser::parse_expr;
    use crate::syntax::name;
    use crate::typecheck::elaborate;

    fn traced(src: &str, env: &Env) -> (Value, Trace) {
        let g = crate::typecheck::check_env(env).unwrap();
        let (e, _) = elaborate(&g, &parse_expr(src).unwrap()).unwrap();
        eval(env, &e).unwrap()
    }

    #[test]
    fn swap_replays_on_new_inputs() {
        let env = Env::new().with("y", Value::int(1)).with("z", Value::int(2));
        let (_, t) = traced("let x = (y, z) in (snd x, fst x)", &env);
        let env2 = Env::new().with("z", Value::int(1)).with("y", Value::int(7));
        assert_eq!(replay(&env2, &t).unwrap(), Value::pair(Value::int(1), Value::int(7)));
    }

    #[test]
    fn branch_flip_is_inconsistent() {
        let env = Env::new().with("x", Value::int(0));
        let (v, t) = traced("if x = 0 then 1 else 2", &env);
        assert_eq!(replay(&env, &t).unwrap(), v);
        let err = replay(&Env::new().with("x", Value::int(3)), &t).unwrap_err();
        let Error::ReplayInconsistent { reason, .. } = err else { panic!("{err}") };
        assert!(reason.contains("inl branch"), "{reason}");
    }

    #[test]
    fn nonsense_trace_is_inconsistent() {
        let t = Trace::Fst(Box::new(Trace::Const(crate::syntax::Const::Int(42))));
        assert!(!is_consistent(&Env::new(), &t));
    }

    #[test]
    fn factorial_with_earlier_base_case_is_inconsistent() {
        let env = Env::new().with("n", Value::int(3));
        let (_, t) = traced("let f = fun f(x:int):int. if x = 0 then 1 else x * f (x - 1) in f n", &env);
        assert!(is_consistent(&env, &t));
        assert!(!is_consistent(&Env::new().with("n", Value::int(1)), &t));
    }

    #[test]
    fn body_traces_are_not_checked_against_code() {
        // Replace the body trace of a call with an unrelated but replayable one.
        let env = Env::new();
        let (_, t) = traced("(fun f(x:int):int. x + 1) 3", &env);
        let Trace::App(k, f, a, _) = t else { panic!() };
        let mangled = Trace::App(k, f, a, Box::new(Trace::Var(name("x"))));
        assert_eq!(replay(&env, &mangled).unwrap(), Value::int(3));
    }
}
