//! Brute-force checks of disclosure and obfuscation over finite universes
//! of traces. A view `P` maps traces to observations, a trace query `Q`
//! maps them to booleans; everything here enumerates the universe.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::eval::{eval_with_fuel, Fuel};
use crate::patterns::{Pattern, PatternEnv};
use crate::syntax::{Env, Expr, Name, Trace, Type, Value};

/// For every observation, which query answers occur in its fiber.
fn fibers<T, O: Eq + Hash>(u: &[T], p: &impl Fn(&T) -> O, q: &impl Fn(&T) -> bool) -> HashMap<O, [bool; 2]> {
    let mut seen: HashMap<O, [bool; 2]> = HashMap::new();
    for t in u {
        seen.entry(p(t)).or_default()[q(t) as usize] = true;
    }
    seen
}

/// `P` discloses `Q`: equal views imply equal answers.
pub fn check_disclosure<T, O: Eq + Hash>(u: &[T], p: impl Fn(&T) -> O, q: impl Fn(&T) -> bool) -> bool {
    fibers(u, &p, &q).values().all(|s| !(s[0] && s[1]))
}

/// A pair of traces with the same view and different answers, if any.
pub fn disclosure_counterexample<T, O: Eq + Hash>(
    u: &[T],
    p: impl Fn(&T) -> O,
    q: impl Fn(&T) -> bool,
) -> Option<(&T, &T)> {
    let mut first: HashMap<O, (bool, &T)> = HashMap::new();
    for t in u {
        let (o, a) = (p(t), q(t));
        match first.get(&o) {
            Some(&(b, t0)) if a != b => return Some((t0, t)),
            Some(_) => {}
            None => {
                first.insert(o, (a, t));
            }
        }
    }
    None
}

/// `P` obfuscates `Q`: every fiber of `P` contains both answers.
pub fn check_obfuscation<T, O: Eq + Hash>(u: &[T], p: impl Fn(&T) -> O, q: impl Fn(&T) -> bool) -> bool {
    fibers(u, &p, &q).values().all(|s| s[0] && s[1])
}

/// `P` positively discloses `Q` via `q`: `q(P(t))` implies `Q(t)`.
pub fn check_positive_disclosure<T, O>(
    u: &[T],
    p: impl Fn(&T) -> O,
    query: impl Fn(&T) -> bool,
    q: impl Fn(&O) -> bool,
) -> bool {
    u.iter().all(|t| !q(&p(t)) || query(t))
}

/// `P` negatively discloses `Q` via `q`: `¬q(P(t))` implies `¬Q(t)`.
pub fn check_negative_disclosure<T, O>(
    u: &[T],
    p: impl Fn(&T) -> O,
    query: impl Fn(&T) -> bool,
    q: impl Fn(&O) -> bool,
) -> bool {
    u.iter().all(|t| q(&p(t)) || !query(t))
}

/// Every trace satisfying `Q` shares its view with one that does not.
pub fn check_positive_obfuscation<T, O: Eq + Hash>(u: &[T], p: impl Fn(&T) -> O, q: impl Fn(&T) -> bool) -> bool {
    fibers(u, &p, &q).values().all(|s| !s[1] || s[0])
}

/// Every trace falsifying `Q` shares its view with one that satisfies it.
pub fn check_negative_obfuscation<T, O: Eq + Hash>(u: &[T], p: impl Fn(&T) -> O, q: impl Fn(&T) -> bool) -> bool {
    fibers(u, &p, &q).values().all(|s| !s[0] || s[1])
}

/// All strings over `alphabet` of length at most `max_len`, shortest
/// first, including the empty string.
pub fn strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| alphabet.iter().map(move |c| format!("{s}{c}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

pub const DEFAULT_STRING_BOUND: usize = 8;

/// A consistent triple `γ, T ↷ v`.
#[derive(Clone, PartialEq, Debug)]
pub struct TmlTriple {
    pub env: Env,
    pub trace: Trace,
    pub value: Value,
}

/// `IN_ρ`: the input lies above `ρ`.
pub fn in_query(rho: PatternEnv) -> impl Fn(&TmlTriple) -> bool {
    move |t| rho.leq_env(&t.env)
}

/// `OUT_p`: the output lies above `p`.
pub fn out_query(p: Pattern) -> impl Fn(&TmlTriple) -> bool {
    move |t| p.leq_value(&t.value)
}

/// Every value of `ty` built from the given integers, with recursive
/// types unrolled at most `depth` times. Function types cannot be
/// enumerated.
pub fn enumerate_values(ty: &Type, ints: &[i64], depth: usize) -> Result<Vec<Value>> {
    Ok(match ty {
        Type::Int => ints.iter().map(|&n| Value::int(n)).collect(),
        Type::Unit => vec![Value::unit()],
        Type::Prod(a, b) => {
            let (va, vb) = (enumerate_values(a, ints, depth)?, enumerate_values(b, ints, depth)?);
            va.iter().flat_map(|x| vb.iter().map(move |y| Value::pair(x.clone(), y.clone()))).collect()
        }
        Type::Sum(a, b) => {
            let mut out: Vec<Value> = enumerate_values(a, ints, depth)?.into_iter().map(Value::inl).collect();
            out.extend(enumerate_values(b, ints, depth)?.into_iter().map(Value::inr));
            out
        }
        Type::Mu(..) if depth == 0 => Vec::new(),
        Type::Mu(..) => {
            let body = ty.unfold().expect("mu type unfolds");
            enumerate_values(&body, ints, depth - 1)?.into_iter().map(Value::roll).collect()
        }
        Type::Arrow(..) | Type::Var(_) => {
            return Err(Error::Precondition(format!("cannot enumerate values of type {ty}")));
        }
    })
}

/// All environments assigning each variable a value from its enumeration.
pub fn enumerate_envs(vars: &[(Name, Type)], ints: &[i64], depth: usize) -> Result<Vec<Env>> {
    let mut envs = vec![Env::new()];
    for (x, ty) in vars {
        let vs = enumerate_values(ty, ints, depth)?;
        envs = envs
            .iter()
            .flat_map(|g| vs.iter().map(move |v| g.clone().with(x, v.clone())))
            .collect();
    }
    Ok(envs)
}

/// Evaluate `e` on every environment drawn from the base domain. Any
/// failure aborts, naming the offending environment.
pub fn enumerate_triples(
    e: &Expr,
    ints: &[i64],
    vars: &[(Name, Type)],
    depth: usize,
    fuel: u64,
) -> Result<Vec<TmlTriple>> {
    enumerate_envs(vars, ints, depth)?
        .into_iter()
        .map(|env| match eval_with_fuel(&env, e, &mut Fuel::new(fuel)) {
            Ok((value, trace)) => Ok(TmlTriple { env, trace, value }),
            Err(err) => Err(Error::Precondition(format!("evaluation failed on {}: {err}", show_env(&env)))),
        })
        .collect()
}

fn show_env(env: &Env) -> String {
    let parts: Vec<String> = env.iter().map(|(x, v)| format!("{x}={v}")).collect();
    format!("[{}]", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_pattern};
    use crate::syntax::name;
    use crate::typecheck::{elaborate, TypeEnv};

    fn count(s: &str, c: char) -> usize {
        s.chars().filter(|&x| x == c).count()
    }

    #[test]
    fn string_universe_size() {
        assert_eq!(strings(&['a', 'b'], 3).len(), 1 + 2 + 4 + 8);
        assert_eq!(strings(&['a', 'b'], 0), vec![String::new()]);
    }

    #[test]
    fn even_b_query() {
        // Over {a,b}^+: the empty string would sit alone in its fiber.
        let u = &strings(&['a', 'b'], 6)[1..];
        let q = |s: &String| count(s, 'b').is_multiple_of(2);
        let all_a = |s: &String| "a".repeat(s.len());
        let drop_a = |s: &String| s.replace('a', "");
        assert!(check_obfuscation(u, all_a, q));
        assert!(!check_disclosure(u, all_a, q));
        assert!(check_disclosure(u, drop_a, q));
        assert!(!check_obfuscation(u, drop_a, q));
        assert!(check_disclosure(u, all_a, |_| true));
        assert!(!check_obfuscation(u, |s: &String| s.clone(), q));
    }

    #[test]
    fn counterexample_names_a_violating_pair() {
        let u = strings(&['a', 'b'], 2);
        let (t1, t2) = disclosure_counterexample(&u, |s: &String| s.len(), |s: &String| s.contains('b')).unwrap();
        assert_eq!(t1.len(), t2.len());
        assert_ne!(t1.contains('b'), t2.contains('b'));
    }

    #[test]
    fn a_to_b_positively_obfuscates_odd_a() {
        let u = strings(&['a', 'b'], 6);
        let q = |s: &String| count(s, 'a') % 2 == 1;
        let p = |s: &String| s.replace('a', "b");
        assert!(check_positive_obfuscation(&u, p, q));
        assert!(!check_negative_obfuscation(&u, p, q));
        assert!(check_positive_obfuscation(&u, p, |_| false));
    }

    #[test]
    fn triples_over_small_domain() {
        let e = elaborate(&TypeEnv::new().with("x", Type::Int).with("y", Type::Int), &parse_expr("fst (x, y)").unwrap()).unwrap().0;
        let vars = [(name("x"), Type::Int), (name("y"), Type::Int)];
        let u = enumerate_triples(&e, &[0, 1], &vars, 2, 1000).unwrap();
        assert_eq!(u.len(), 4);
        assert!(u.iter().all(|t| Some(&t.value) == t.env.get("x")));
        let out = out_query(parse_pattern("1").unwrap());
        assert_eq!(u.iter().filter(|t| out(t)).count(), 2);
        let inq = in_query(PatternEnv::singleton(name("y"), Pattern::int(1)));
        assert_eq!(u.iter().filter(|t| inq(t)).count(), 2);
    }

    #[test]
    fn list_enumeration_is_bounded() {
        // [], [0], [1] at depth 2; depth 3 adds the four two-element lists.
        assert_eq!(enumerate_values(&Type::list(Type::Int), &[0, 1], 2).unwrap().len(), 3);
        assert_eq!(enumerate_values(&Type::list(Type::Int), &[0, 1], 3).unwrap().len(), 7);
        assert!(enumerate_values(&Type::arrow(Type::Int, Type::Int), &[0], 1).is_err());
    }
}
