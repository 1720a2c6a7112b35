//! Partial values: `□` (anything), `◇` (exactly as in the original), the
//! order `⊑`, join `⊔`, matching modulo a pattern and restriction.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::{Const, Env, FunDef, Name, Value};

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Pattern {
    Hole,
    Diamond,
    Const(Const),
    Pair(Box<Pattern>, Box<Pattern>),
    Inl(Box<Pattern>),
    Inr(Box<Pattern>),
    Roll(Box<Pattern>),
    Closure(Arc<FunDef>, PatternEnv),
}

/// Pattern environment. Absent variables stand for `□`, and `□` is never
/// stored, so structural equality coincides with pattern-environment equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
pub struct PatternEnv(BTreeMap<Name, Pattern>);

impl PatternEnv {
    pub fn new() -> PatternEnv {
        PatternEnv(BTreeMap::new())
    }

    pub fn singleton(x: Name, p: Pattern) -> PatternEnv {
        let mut env = PatternEnv::new();
        env.insert(x, p);
        env
    }

    pub fn insert(&mut self, x: Name, p: Pattern) {
        if p == Pattern::Hole {
            self.0.remove(&x);
        } else {
            self.0.insert(x, p);
        }
    }

    pub fn get(&self, x: &str) -> &Pattern {
        self.0.get(x).unwrap_or(&Pattern::Hole)
    }

    pub fn remove(&mut self, x: &str) -> Pattern {
        self.0.remove(x).unwrap_or(Pattern::Hole)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Pattern)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_env(env: &Env) -> PatternEnv {
        let mut out = PatternEnv::new();
        for (x, v) in env.iter() {
            out.insert(x.clone(), Pattern::from_value(v));
        }
        out
    }

    /// Every variable of `names` bound to `◇`.
    pub fn diamonds(names: &[Name]) -> PatternEnv {
        PatternEnv(names.iter().map(|x| (x.clone(), Pattern::Diamond)).collect())
    }

    pub fn join(&self, other: &PatternEnv) -> Result<PatternEnv> {
        let mut out = self.clone();
        for (x, p) in other.iter() {
            let joined = join(out.get(x), p)?;
            out.insert(x.clone(), joined);
        }
        Ok(out)
    }

    pub fn leq(&self, other: &PatternEnv) -> bool {
        self.join(other).is_ok_and(|j| &j == other)
    }

    pub fn is_diamond_free(&self) -> bool {
        self.0.values().all(Pattern::is_diamond_free)
    }

    /// `ρ ⊑ γ`.
    pub fn leq_env(&self, env: &Env) -> bool {
        self.iter().all(|(x, p)| env.get(x).is_some_and(|v| p.leq_value(v)))
    }

    /// `γ ≡_ρ γ'`.
    pub fn matches_mod(&self, g1: &Env, g2: &Env) -> bool {
        self.iter().all(|(x, p)| match (g1.get(x), g2.get(x)) {
            (Some(a), Some(b)) => matches_mod(p, a, b),
            _ => false,
        })
    }

    /// Restriction `γ|_ρ`.
    pub fn restrict(&self, env: &Env) -> Result<PatternEnv> {
        let mut out = PatternEnv::new();
        for (x, p) in self.iter() {
            let v = env.lookup(x)?;
            out.insert(x.clone(), restrict(v, p)?);
        }
        Ok(out)
    }

    /// Fill every pattern into a full environment if no holes remain.
    pub fn to_env(&self) -> Option<Env> {
        self.iter().map(|(x, p)| p.to_value().map(|v| (x.clone(), v))).collect::<Option<Vec<_>>>().map(Env::from_pairs)
    }
}

impl FromIterator<(Name, Pattern)> for PatternEnv {
    fn from_iter<I: IntoIterator<Item = (Name, Pattern)>>(iter: I) -> Self {
        let mut env = PatternEnv::new();
        for (x, p) in iter {
            env.insert(x, p);
        }
        env
    }
}

impl Pattern {
    pub fn pair(a: Pattern, b: Pattern) -> Pattern {
        Pattern::Pair(Box::new(a), Box::new(b))
    }

    pub fn int(n: i64) -> Pattern {
        Pattern::Const(Const::Int(n))
    }

    pub fn cons(h: Pattern, t: Pattern) -> Pattern {
        Pattern::Roll(Box::new(Pattern::Inr(Box::new(Pattern::pair(h, t)))))
    }

    pub fn nil() -> Pattern {
        Pattern::Roll(Box::new(Pattern::Inl(Box::new(Pattern::Const(Const::Unit)))))
    }

    pub fn list(items: Vec<Pattern>) -> Pattern {
        items.into_iter().rev().fold(Pattern::nil(), |t, h| Pattern::cons(h, t))
    }

    pub fn from_value(v: &Value) -> Pattern {
        match v {
            Value::Const(c) => Pattern::Const(*c),
            Value::Pair(a, b) => Pattern::pair(Pattern::from_value(a), Pattern::from_value(b)),
            Value::Inl(v) => Pattern::Inl(Box::new(Pattern::from_value(v))),
            Value::Inr(v) => Pattern::Inr(Box::new(Pattern::from_value(v))),
            Value::Roll(v) => Pattern::Roll(Box::new(Pattern::from_value(v))),
            Value::Closure(k, env) => Pattern::Closure(k.clone(), PatternEnv::from_env(env)),
        }
    }

    /// The value denoted by a pattern without `□` or `◇`.
    pub fn to_value(&self) -> Option<Value> {
        Some(match self {
            Pattern::Hole | Pattern::Diamond => return None,
            Pattern::Const(c) => Value::Const(*c),
            Pattern::Pair(a, b) => Value::pair(a.to_value()?, b.to_value()?),
            Pattern::Inl(p) => Value::inl(p.to_value()?),
            Pattern::Inr(p) => Value::inr(p.to_value()?),
            Pattern::Roll(p) => Value::roll(p.to_value()?),
            Pattern::Closure(k, rho) => {
                let env = k
                    .free_vars()
                    .iter()
                    .map(|x| rho.get(x).to_value().map(|v| (x.clone(), v)))
                    .collect::<Option<Vec<_>>>()?;
                Value::Closure(k.clone(), Env::from_pairs(env))
            }
        })
    }

    pub fn is_diamond_free(&self) -> bool {
        match self {
            Pattern::Diamond => false,
            Pattern::Hole | Pattern::Const(_) => true,
            Pattern::Pair(a, b) => a.is_diamond_free() && b.is_diamond_free(),
            Pattern::Inl(p) | Pattern::Inr(p) | Pattern::Roll(p) => p.is_diamond_free(),
            Pattern::Closure(_, rho) => rho.is_diamond_free(),
        }
    }

    pub fn is_hole_free(&self) -> bool {
        match self {
            Pattern::Hole => false,
            Pattern::Diamond | Pattern::Const(_) => true,
            Pattern::Pair(a, b) => a.is_hole_free() && b.is_hole_free(),
            Pattern::Inl(p) | Pattern::Inr(p) | Pattern::Roll(p) => p.is_hole_free(),
            Pattern::Closure(k, rho) => k.free_vars().iter().all(|x| rho.get(x).is_hole_free()),
        }
    }

    /// `p ⊑ p'` iff `p ⊔ p' = p'`.
    pub fn leq(&self, other: &Pattern) -> bool {
        join(self, other).is_ok_and(|j| &j == other)
    }

    /// `p ⊑ v` for a complete value.
    pub fn leq_value(&self, v: &Value) -> bool {
        match (self, v) {
            (Pattern::Hole | Pattern::Diamond, _) => true,
            (Pattern::Const(c), Value::Const(d)) => c == d,
            (Pattern::Pair(p1, p2), Value::Pair(v1, v2)) => p1.leq_value(v1) && p2.leq_value(v2),
            (Pattern::Inl(p), Value::Inl(v)) | (Pattern::Inr(p), Value::Inr(v)) | (Pattern::Roll(p), Value::Roll(v)) => {
                p.leq_value(v)
            }
            (Pattern::Closure(k1, rho), Value::Closure(k2, env)) => k1 == k2 && rho.leq_env(env),
            _ => false,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Pattern::Hole | Pattern::Diamond | Pattern::Const(_) => 1,
            Pattern::Pair(a, b) => 1 + a.size() + b.size(),
            Pattern::Inl(p) | Pattern::Inr(p) | Pattern::Roll(p) => 1 + p.size(),
            Pattern::Closure(_, rho) => 1 + rho.iter().map(|(_, p)| p.size()).sum::<usize>(),
        }
    }
}

/// `v1 ≡_p v2`.
pub fn matches_mod(p: &Pattern, v1: &Value, v2: &Value) -> bool {
    match (p, v1, v2) {
        (Pattern::Hole, _, _) => true,
        (Pattern::Diamond, _, _) => v1 == v2,
        (Pattern::Const(c), Value::Const(a), Value::Const(b)) => c == a && c == b,
        (Pattern::Pair(p1, p2), Value::Pair(a1, a2), Value::Pair(b1, b2)) => {
            matches_mod(p1, a1, b1) && matches_mod(p2, a2, b2)
        }
        (Pattern::Inl(p), Value::Inl(a), Value::Inl(b))
        | (Pattern::Inr(p), Value::Inr(a), Value::Inr(b))
        | (Pattern::Roll(p), Value::Roll(a), Value::Roll(b)) => matches_mod(p, a, b),
        (Pattern::Closure(k, rho), Value::Closure(k1, e1), Value::Closure(k2, e2)) => {
            k == k1 && k == k2 && rho.matches_mod(e1, e2)
        }
        _ => false,
    }
}

/// `p[◇/□]`.
pub fn diamond_subst(p: &Pattern) -> Pattern {
    match p {
        Pattern::Hole | Pattern::Diamond => Pattern::Diamond,
        Pattern::Const(c) => Pattern::Const(*c),
        Pattern::Pair(a, b) => Pattern::pair(diamond_subst(a), diamond_subst(b)),
        Pattern::Inl(q) => Pattern::Inl(Box::new(diamond_subst(q))),
        Pattern::Inr(q) => Pattern::Inr(Box::new(diamond_subst(q))),
        Pattern::Roll(q) => Pattern::Roll(Box::new(diamond_subst(q))),
        Pattern::Closure(k, rho) => {
            Pattern::Closure(k.clone(), k.free_vars().iter().map(|x| (x.clone(), diamond_subst(rho.get(x)))).collect())
        }
    }
}

/// `p ⊔ p'`, failing on incompatible patterns.
pub fn join(p: &Pattern, q: &Pattern) -> Result<Pattern> {
    use Pattern::*;
    Ok(match (p, q) {
        (Hole, r) | (r, Hole) => r.clone(),
        (Diamond, r) | (r, Diamond) => diamond_subst(r),
        (Const(a), Const(b)) if a == b => Const(*a),
        (Pair(a1, b1), Pair(a2, b2)) => Pattern::pair(join(a1, a2)?, join(b1, b2)?),
        (Inl(a), Inl(b)) => Inl(Box::new(join(a, b)?)),
        (Inr(a), Inr(b)) => Inr(Box::new(join(a, b)?)),
        (Roll(a), Roll(b)) => Roll(Box::new(join(a, b)?)),
        (Closure(k1, r1), Closure(k2, r2)) if k1 == k2 => Closure(k1.clone(), r1.join(r2)?),
        _ => return Err(Error::Incompatible(p.to_string(), q.to_string())),
    })
}

/// `v|_p`: replace the `◇`s of `p` by the corresponding parts of `v`.
pub fn restrict(v: &Value, p: &Pattern) -> Result<Pattern> {
    let bad = || Error::Precondition(format!("pattern `{p}` does not lie below value `{v}`"));
    Ok(match (p, v) {
        (Pattern::Hole, _) => Pattern::Hole,
        (Pattern::Diamond, _) => Pattern::from_value(v),
        (Pattern::Const(c), Value::Const(d)) if c == d => Pattern::Const(*c),
        (Pattern::Pair(p1, p2), Value::Pair(v1, v2)) => Pattern::pair(restrict(v1, p1)?, restrict(v2, p2)?),
        (Pattern::Inl(q), Value::Inl(w)) => Pattern::Inl(Box::new(restrict(w, q)?)),
        (Pattern::Inr(q), Value::Inr(w)) => Pattern::Inr(Box::new(restrict(w, q)?)),
        (Pattern::Roll(q), Value::Roll(w)) => Pattern::Roll(Box::new(restrict(w, q)?)),
        (Pattern::Closure(k1, rho), Value::Closure(k2, env)) if k1 == k2 => {
            Pattern::Closure(k1.clone(), rho.restrict(env).map_err(|_| bad())?)
        }
        _ => return Err(bad()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_pattern, parse_value};

    fn p(s: &str) -> Pattern {
        parse_pattern(s).unwrap()
    }

    fn v(s: &str) -> Value {
        parse_value(s).unwrap()
    }

    #[test]
    fn matching_examples() {
        assert!(matches_mod(&p("_"), &v("1"), &v("(2,3)")));
        assert!(matches_mod(&p("="), &v("1"), &v("1")));
        assert!(!matches_mod(&p("="), &v("1"), &v("2")));
        assert!(matches_mod(&p("(=,_)"), &v("(1,2)"), &v("(1,5)")));
        assert!(!matches_mod(&p("(=,_)"), &v("(1,2)"), &v("(2,2)")));
    }

    #[test]
    fn join_examples() {
        assert_eq!(join(&p("_"), &p("(1,_)")).unwrap(), p("(1,_)"));
        assert_eq!(join(&p("="), &p("(1,_)")).unwrap(), p("(1,=)"));
        assert!(matches!(join(&p("inl 1"), &p("inr 2")), Err(Error::Incompatible(..))));
        assert!(join(&p("1"), &p("2")).is_err());
    }

    #[test]
    fn order_examples() {
        for q in ["_", "=", "(1,_)", "[1,2]", "inl (=, 3)"] {
            assert!(p("_").leq(&p(q)));
        }
        assert!(p("(1,_)").leq(&p("(1,2)")));
        assert!(p("=").leq(&p("(1,(2,3))")));
        assert!(!p("(1,2)").leq(&p("(1,_)")));
    }

    #[test]
    fn restriction_examples() {
        assert_eq!(restrict(&v("(1,2)"), &p("(=,_)")).unwrap(), p("(1,_)"));
        assert_eq!(restrict(&v("[1,2]"), &p("_")).unwrap(), p("_"));
        assert_eq!(restrict(&v("[1,2]"), &p("=")).unwrap(), p("[1,2]"));
        assert!(restrict(&v("(1,2)"), &p("(3,_)")).is_err());
    }

    #[test]
    fn diamond_subst_examples() {
        assert_eq!(diamond_subst(&p("(1,_)")), p("(1,=)"));
        assert_eq!(diamond_subst(&p("=")), p("="));
        assert_eq!(diamond_subst(&p("inl _")), p("inl ="));
    }

    #[test]
    fn env_absent_is_hole() {
        let rho: PatternEnv = [(crate::syntax::name("x"), Pattern::Hole)].into_iter().collect();
        assert!(rho.is_empty());
        assert_eq!(rho.get("x"), &Pattern::Hole);
    }
}
