//! Trace slicing. Disclosure slicing pushes a partial output backwards
//! through a trace, keeping just enough of the input and trace to certify
//! it. Obfuscation slicing re-runs a trace forwards on a partial input and
//! erases whatever depends on the missing parts.

use std::sync::Arc;

use crate::annot::{AnnEnv, AnnNode, AnnValue, Annotation};
use crate::error::{Error, Result};
use crate::eval::{deep, eval_primitive};
use crate::extract::{extract, AnnotationStructure};
use crate::patterns::{join, Pattern, PatternEnv};
use crate::pretty::pretty_trace;
use crate::syntax::{Env, FunDef, Name, Trace, Value};

/// A partial input paired with a partial trace.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Slice {
    pub env: PatternEnv,
    pub trace: Trace,
}

fn internal(t: &Trace, what: &str) -> Error {
    let mut node = pretty_trace(t);
    if node.chars().count() > 60 {
        node = node.chars().take(57).collect::<String>() + "...";
    }
    Error::Precondition(format!("cannot slice `{node}`: {what}"))
}

/// Children demanded of a pattern by a constructor trace. `◇` demands
/// every child exactly.
fn split_pair(p: &Pattern, t: &Trace) -> Result<(Pattern, Pattern)> {
    match p {
        Pattern::Pair(a, b) => Ok(((**a).clone(), (**b).clone())),
        Pattern::Diamond => Ok((Pattern::Diamond, Pattern::Diamond)),
        _ => Err(internal(t, &format!("pattern `{p}` is not a pair"))),
    }
}

fn split_unary(p: &Pattern, t: &Trace) -> Result<Pattern> {
    match (p, t) {
        (Pattern::Diamond, _) => Ok(Pattern::Diamond),
        (Pattern::Inl(q), Trace::Inl(..)) | (Pattern::Inr(q), Trace::Inr(..)) | (Pattern::Roll(q), Trace::Roll(..)) => {
            Ok((**q).clone())
        }
        _ => Err(internal(t, &format!("pattern `{p}` does not match the constructor"))),
    }
}

fn inl(p: Pattern) -> Pattern {
    Pattern::Inl(Box::new(p))
}

fn inr(p: Pattern) -> Pattern {
    Pattern::Inr(Box::new(p))
}

/// `p, T ⟶disc S, ρ`.
pub fn disclosure_slice(p: &Pattern, t: &Trace) -> Result<Slice> {
    deep(|| disc(p, t))
}

fn disc(p: &Pattern, t: &Trace) -> Result<Slice> {
    if *p == Pattern::Hole {
        return Ok(Slice { env: PatternEnv::new(), trace: Trace::Hole });
    }
    let sl = |env, trace| Ok(Slice { env, trace });
    match t {
        Trace::Hole => Err(internal(t, "hole in a trace being sliced")),
        Trace::Var(x) => sl(PatternEnv::singleton(x.clone(), p.clone()), t.clone()),
        Trace::Const(_) => sl(PatternEnv::new(), t.clone()),
        Trace::Prim(op, args) => {
            let mut env = PatternEnv::new();
            let mut ts = Vec::with_capacity(args.len());
            for a in args {
                let s = disclosure_slice(&Pattern::Diamond, a)?;
                env = env.join(&s.env)?;
                ts.push(s.trace);
            }
            sl(env, Trace::Prim(*op, ts))
        }
        Trace::Let(t1, x, t2) => {
            let mut s2 = disclosure_slice(p, t2)?;
            let p1 = s2.env.remove(x);
            let s1 = disclosure_slice(&p1, t1)?;
            sl(s1.env.join(&s2.env)?, Trace::Let(Box::new(s1.trace), x.clone(), Box::new(s2.trace)))
        }
        Trace::Pair(a, b) => {
            let (pa, pb) = split_pair(p, t)?;
            let sa = disclosure_slice(&pa, a)?;
            let sb = disclosure_slice(&pb, b)?;
            sl(sa.env.join(&sb.env)?, Trace::Pair(Box::new(sa.trace), Box::new(sb.trace)))
        }
        Trace::Fst(a) => {
            let s = disclosure_slice(&Pattern::pair(p.clone(), Pattern::Hole), a)?;
            sl(s.env, Trace::Fst(Box::new(s.trace)))
        }
        Trace::Snd(a) => {
            let s = disclosure_slice(&Pattern::pair(Pattern::Hole, p.clone()), a)?;
            sl(s.env, Trace::Snd(Box::new(s.trace)))
        }
        Trace::Inl(ann, a) => {
            let s = disclosure_slice(&split_unary(p, t)?, a)?;
            sl(s.env, Trace::Inl(ann.clone(), Box::new(s.trace)))
        }
        Trace::Inr(ann, a) => {
            let s = disclosure_slice(&split_unary(p, t)?, a)?;
            sl(s.env, Trace::Inr(ann.clone(), Box::new(s.trace)))
        }
        Trace::Roll(ann, a) => {
            let s = disclosure_slice(&split_unary(p, t)?, a)?;
            sl(s.env, Trace::Roll(ann.clone(), Box::new(s.trace)))
        }
        Trace::Unroll(a) => {
            let s = disclosure_slice(&Pattern::Roll(Box::new(p.clone())), a)?;
            sl(s.env, Trace::Unroll(Box::new(s.trace)))
        }
        Trace::CaseL(m, sc, body) | Trace::CaseR(m, sc, body) => {
            let left = matches!(t, Trace::CaseL(..));
            let mut sb = disclosure_slice(p, body)?;
            let px = sb.env.remove(if left { &m.x1 } else { &m.x2 });
            let ss = disclosure_slice(&if left { inl(px) } else { inr(px) }, sc)?;
            let (sc, body) = (Box::new(ss.trace), Box::new(sb.trace));
            let trace = if left { Trace::CaseL(m.clone(), sc, body) } else { Trace::CaseR(m.clone(), sc, body) };
            sl(ss.env.join(&sb.env)?, trace)
        }
        Trace::Fun(k) => match p {
            Pattern::Closure(k2, rho) if k2 == k => sl(rho.clone(), t.clone()),
            Pattern::Diamond => sl(PatternEnv::diamonds(k.free_vars()), t.clone()),
            _ => Err(internal(t, &format!("pattern `{p}` is not a closure of `{}`", k.name))),
        },
        Trace::App(k, f, a, body) => {
            let mut sb = disclosure_slice(p, body)?;
            let p2 = sb.env.remove(&k.param);
            let p1 = if k.name == k.param { Pattern::Hole } else { sb.env.remove(&k.name) };
            let demanded = join(&p1, &Pattern::Closure(k.clone(), closure_part(k, &sb.env)))?;
            let sf = disclosure_slice(&demanded, f)?;
            let sa = disclosure_slice(&p2, a)?;
            sl(
                sf.env.join(&sa.env)?,
                Trace::App(k.clone(), Box::new(sf.trace), Box::new(sa.trace), Box::new(sb.trace)),
            )
        }
    }
}

/// The part of a body's pattern environment that lives in the closure.
fn closure_part(k: &FunDef, rho: &PatternEnv) -> PatternEnv {
    k.free_vars().iter().map(|x| (x.clone(), rho.get(x).clone())).collect()
}

/// A part of `v` showing why it fails to match `p`: clashing constants or
/// constructors are kept with `□` children; otherwise the leftmost
/// mismatching child is witnessed and its siblings are `□`.
pub fn witness(p: &Pattern, v: &Value) -> Result<Pattern> {
    if p.leq_value(v) {
        return Err(Error::Precondition(format!("pattern `{p}` matches `{v}`, so there is nothing to witness")));
    }
    if !p.is_diamond_free() {
        return Err(Error::Precondition(format!("pattern `{p}` contains ◇")));
    }
    deep(|| witness_unchecked(p, v))
}

fn witness_unchecked(p: &Pattern, v: &Value) -> Result<Pattern> {
    let hole = || Box::new(Pattern::Hole);
    Ok(match (p, v) {
        (Pattern::Pair(p1, p2), Value::Pair(v1, v2)) => {
            if !p1.leq_value(v1) {
                Pattern::Pair(Box::new(witness_unchecked(p1, v1)?), hole())
            } else {
                Pattern::Pair(hole(), Box::new(witness_unchecked(p2, v2)?))
            }
        }
        (Pattern::Inl(q), Value::Inl(w)) => inl(witness_unchecked(q, w)?),
        (Pattern::Inr(q), Value::Inr(w)) => inr(witness_unchecked(q, w)?),
        (Pattern::Roll(q), Value::Roll(w)) => Pattern::Roll(Box::new(witness_unchecked(q, w)?)),
        (Pattern::Closure(k1, rho), Value::Closure(k2, env)) if k1 == k2 => {
            let mut out = PatternEnv::new();
            for x in k1.free_vars() {
                let (px, vx) = (rho.get(x), env.lookup(x)?);
                if !px.leq_value(vx) {
                    out.insert(x.clone(), witness_unchecked(px, vx)?);
                    break;
                }
            }
            Pattern::Closure(k1.clone(), out)
        }
        // Clash at the top: v's own constructor suffices.
        (_, Value::Const(c)) => Pattern::Const(*c),
        (_, Value::Pair(..)) => Pattern::Pair(hole(), hole()),
        (_, Value::Inl(_)) => Pattern::Inl(hole()),
        (_, Value::Inr(_)) => Pattern::Inr(hole()),
        (_, Value::Roll(_)) => Pattern::Roll(hole()),
        (_, Value::Closure(k, _)) => Pattern::Closure(k.clone(), PatternEnv::new()),
    })
}

/// `Disc_p(γ, T, v)`: slice by `p` if it matches `v`, otherwise by a
/// witness of the mismatch; `◇`s in the input part are filled from `γ`.
pub fn disc_view(p: &Pattern, env: &Env, t: &Trace, v: &Value) -> Result<Slice> {
    let criterion = if p.leq_value(v) { p.clone() } else { witness(p, v)? };
    let s = disclosure_slice(&criterion, t)?;
    Ok(Slice { env: s.env.restrict(env)?, trace: s.trace })
}

/// Scoped pattern bindings for the forward pass; absent names are `□`.
#[derive(Clone, Default)]
struct Scope(Vec<(Name, Pattern)>);

impl Scope {
    fn get(&self, x: &str) -> Pattern {
        self.0.iter().rev().find(|(y, _)| &**y == x).map(|(_, p)| p.clone()).unwrap_or(Pattern::Hole)
    }

    fn with(&self, x: &Name, p: Pattern) -> Scope {
        let mut s = self.clone();
        s.0.push((x.clone(), p));
        s
    }

    fn closure_env(&self, k: &FunDef) -> PatternEnv {
        k.free_vars().iter().map(|x| (x.clone(), self.get(x))).collect()
    }
}

/// `ρ, T ⟶obf p, S`.
pub fn obfuscation_slice(rho: &PatternEnv, t: &Trace) -> Result<(Pattern, Trace)> {
    if !rho.is_diamond_free() {
        return Err(Error::Precondition("obfuscation needs a ◇-free input pattern".into()));
    }
    let scope = Scope(rho.iter().map(|(x, p)| (x.clone(), p.clone())).collect());
    obf(&scope, t)
}

fn erased() -> Result<(Pattern, Trace)> {
    Ok((Pattern::Hole, Trace::Hole))
}

fn obf(rho: &Scope, t: &Trace) -> Result<(Pattern, Trace)> {
    deep(|| obf_step(rho, t))
}

fn obf_step(rho: &Scope, t: &Trace) -> Result<(Pattern, Trace)> {
    match t {
        Trace::Hole => erased(),
        Trace::Var(x) => match rho.get(x) {
            Pattern::Hole => erased(),
            p => Ok((p, t.clone())),
        },
        Trace::Const(c) => Ok((Pattern::Const(*c), t.clone())),
        Trace::Prim(op, args) => {
            let mut vals = Vec::with_capacity(args.len());
            let mut ts = Vec::with_capacity(args.len());
            for a in args {
                let (p, s) = obf(rho, a)?;
                vals.push(p.to_value());
                ts.push(s);
            }
            match vals.into_iter().collect::<Option<Vec<Value>>>() {
                Some(vs) => {
                    let v = eval_primitive(*op, &vs).map_err(|e| internal(t, &e.to_string()))?;
                    Ok((Pattern::from_value(&v), Trace::Prim(*op, ts)))
                }
                None => erased(),
            }
        }
        Trace::Let(t1, x, t2) => {
            let (p1, s1) = obf(rho, t1)?;
            let (p2, s2) = obf(&rho.with(x, p1), t2)?;
            Ok((p2, Trace::Let(Box::new(s1), x.clone(), Box::new(s2))))
        }
        Trace::Pair(a, b) => {
            let (pa, sa) = obf(rho, a)?;
            let (pb, sb) = obf(rho, b)?;
            Ok((Pattern::pair(pa, pb), Trace::Pair(Box::new(sa), Box::new(sb))))
        }
        Trace::Fst(a) | Trace::Snd(a) => {
            let (p, s) = obf(rho, a)?;
            match p {
                Pattern::Hole => erased(),
                Pattern::Pair(l, _) if matches!(t, Trace::Fst(_)) => Ok((*l, Trace::Fst(Box::new(s)))),
                Pattern::Pair(_, r) => Ok((*r, Trace::Snd(Box::new(s)))),
                _ => Err(internal(t, "projection from a non-pair")),
            }
        }
        Trace::Inl(ann, a) => {
            let (p, s) = obf(rho, a)?;
            Ok((inl(p), Trace::Inl(ann.clone(), Box::new(s))))
        }
        Trace::Inr(ann, a) => {
            let (p, s) = obf(rho, a)?;
            Ok((inr(p), Trace::Inr(ann.clone(), Box::new(s))))
        }
        Trace::Roll(ann, a) => {
            let (p, s) = obf(rho, a)?;
            Ok((Pattern::Roll(Box::new(p)), Trace::Roll(ann.clone(), Box::new(s))))
        }
        Trace::Unroll(a) => {
            let (p, s) = obf(rho, a)?;
            match p {
                Pattern::Hole => erased(),
                Pattern::Roll(q) => Ok((*q, Trace::Unroll(Box::new(s)))),
                _ => Err(internal(t, "unroll of a non-roll value")),
            }
        }
        Trace::CaseL(m, sc, body) | Trace::CaseR(m, sc, body) => {
            let left = matches!(t, Trace::CaseL(..));
            let (p, s) = obf(rho, sc)?;
            let (x, payload) = match (p, left) {
                (Pattern::Hole, _) => return erased(),
                (Pattern::Inl(q), true) => (&m.x1, *q),
                (Pattern::Inr(q), false) => (&m.x2, *q),
                _ => return Err(internal(t, "scrutinee does not match the recorded branch")),
            };
            let (pb, sb) = obf(&rho.with(x, payload), body)?;
            let (s, sb) = (Box::new(s), Box::new(sb));
            Ok((pb, if left { Trace::CaseL(m.clone(), s, sb) } else { Trace::CaseR(m.clone(), s, sb) }))
        }
        Trace::Fun(k) => Ok((Pattern::Closure(k.clone(), rho.closure_env(k)), t.clone())),
        Trace::App(k, f, a, body) => {
            let (pf, sf) = obf(rho, f)?;
            let inner = match &pf {
                Pattern::Hole => return erased(),
                Pattern::Closure(k2, env) if k2 == k => env.clone(),
                _ => return Err(internal(t, "application of something other than the recorded function")),
            };
            let (pa, sa) = obf(rho, a)?;
            let scope = Scope(inner.iter().map(|(x, p)| (x.clone(), p.clone())).collect())
                .with(&k.name, pf)
                .with(&k.param, pa);
            let (pb, sb) = obf(&scope, body)?;
            Ok((pb, Trace::App(k.clone(), Box::new(sf), Box::new(sa), Box::new(sb))))
        }
    }
}

/// `Obf_ρ(γ, T, v)`.
pub fn obf_view(rho: &PatternEnv, env: &Env, t: &Trace, v: &Value) -> Result<(Pattern, Trace)> {
    if !rho.leq_env(env) {
        return Err(Error::Precondition(format!("input pattern {rho} does not lie below the environment")));
    }
    let (p, s) = obfuscation_slice(rho, t)?;
    if !p.leq_value(v) {
        return Err(Error::Precondition(format!("obfuscated output `{p}` does not lie below `{v}`")));
    }
    Ok((p, s))
}

/// `v̂ ≡_p v̂′` lifted to annotated values: where `p` has a constructor both
/// sides agree on it and its annotation; `◇` demands full equality.
pub fn ann_matches_mod<A: Annotation>(p: &Pattern, a: &AnnValue<A>, b: &AnnValue<A>) -> bool {
    match p {
        Pattern::Hole => return true,
        Pattern::Diamond => return a == b,
        _ => {}
    }
    if a.ann != b.ann {
        return false;
    }
    deep(|| match (p, &a.node, &b.node) {
        (Pattern::Const(c), AnnNode::Const(x), AnnNode::Const(y)) => c == x && c == y,
        (Pattern::Pair(p1, p2), AnnNode::Pair(a1, a2), AnnNode::Pair(b1, b2)) => {
            ann_matches_mod(p1, a1, b1) && ann_matches_mod(p2, a2, b2)
        }
        (Pattern::Inl(q), AnnNode::Inl(x), AnnNode::Inl(y))
        | (Pattern::Inr(q), AnnNode::Inr(x), AnnNode::Inr(y))
        | (Pattern::Roll(q), AnnNode::Roll(x), AnnNode::Roll(y)) => ann_matches_mod(q, x, y),
        (Pattern::Closure(k, rho), AnnNode::Closure(k1, e1), AnnNode::Closure(k2, e2)) => {
            k == k1 && k == k2 && ann_env_matches_mod(rho, e1, e2)
        }
        _ => false,
    })
}

pub fn ann_env_matches_mod<A: Annotation>(rho: &PatternEnv, a: &AnnEnv<A>, b: &AnnEnv<A>) -> bool {
    rho.iter().all(|(x, p)| match (a.get(x), b.get(x)) {
        (Some(v), Some(w)) => ann_matches_mod(p, v, w),
        _ => false,
    })
}

/// Extraction agrees on the part of the output a disclosure slice
/// certifies: `F(T, γ̂) ≡_p F(T′, γ̂′)` whenever `p,T ⟶disc S,ρ`,
/// `γ̂ ≡_ρ γ̂′` and `T′ ⊒ S`. Preconditions are checked.
pub fn extraction_from_slice_check<S: AnnotationStructure>(
    s: &S,
    p: &Pattern,
    t: &Trace,
    env: &AnnEnv<S::A>,
    t2: &Trace,
    env2: &AnnEnv<S::A>,
) -> Result<bool> {
    let slice = disclosure_slice(p, t)?;
    if !ann_env_matches_mod(&slice.env, env, env2) {
        return Err(Error::Precondition("the two annotated inputs differ on the sliced part".into()));
    }
    if !slice.trace.leq(t2) {
        return Err(Error::Precondition("the second trace does not extend the slice".into()));
    }
    let a = extract(s, t, env)?;
    let b = extract(s, t2, env2)?;
    Ok(ann_matches_mod(p, &a, &b))
}

/// Closure pattern shorthand used by tests and the CLI.
pub fn closure_pattern(k: &Arc<FunDef>, rho: PatternEnv) -> Pattern {
    Pattern::Closure(k.clone(), rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval;
    use crate::parser::{parse_expr, parse_pattern, parse_value};
    use crate::pretty::pretty_trace;
    use crate::syntax::name;
    use crate::typecheck::{check_env, elaborate};

    fn p(s: &str) -> Pattern {
        parse_pattern(s).unwrap()
    }

    fn run(src: &str, env: &Env) -> (Value, Trace) {
        let (e, _) = elaborate(&check_env(env).unwrap(), &parse_expr(src).unwrap()).unwrap();
        eval(env, &e).unwrap()
    }

    fn swap_env() -> Env {
        Env::new().with("y", Value::int(7)).with("z", Value::int(1))
    }

    #[test]
    fn swap_disclosure() {
        let (_, t) = run("let x = (y, z) in (snd x, fst x)", &swap_env());
        let s = disclosure_slice(&p("(1,_)"), &t).unwrap();
        assert_eq!(pretty_trace(&s.trace), "let x = (_, z) in (snd(x), _)");
        assert_eq!(s.env, PatternEnv::singleton(name("z"), Pattern::int(1)));
    }

    #[test]
    fn swap_obfuscation() {
        let (_, t) = run("let x = (y, z) in (snd x, fst x)", &swap_env());
        let rho = PatternEnv::singleton(name("z"), Pattern::int(1));
        let (out, s) = obfuscation_slice(&rho, &t).unwrap();
        assert_eq!(out, p("(1,_)"));
        assert_eq!(pretty_trace(&s), "let x = (_, z) in (snd(x), fst(x))");
    }

    #[test]
    fn hole_slices_to_nothing() {
        let (_, t) = run("let x = (y, z) in (snd x, fst x)", &swap_env());
        let s = disclosure_slice(&Pattern::Hole, &t).unwrap();
        assert_eq!(s.trace, Trace::Hole);
        assert!(s.env.is_empty());
    }

    #[test]
    fn full_environment_reproduces_everything() {
        let env = swap_env();
        let (v, t) = run("let x = (y, z) in (snd x, fst x)", &env);
        let (out, s) = obf_view(&PatternEnv::from_env(&env), &env, &t, &v).unwrap();
        assert_eq!(out, Pattern::from_value(&v));
        assert_eq!(s, t);
    }

    #[test]
    fn witness_examples() {
        let v = |s| parse_value(s).unwrap();
        assert_eq!(witness(&p("7"), &v("5")).unwrap(), p("5"));
        assert_eq!(witness(&p("inl _"), &v("inr 3")).unwrap(), p("inr _"));
        assert_eq!(witness(&p("(1,_)"), &v("(2,9)")).unwrap(), p("(2,_)"));
        assert!(witness(&p("(_,_)"), &v("(2,9)")).is_err());
    }

    #[test]
    fn primitive_arguments_sliced_exactly() {
        let env = Env::new().with("a", Value::int(2)).with("b", Value::int(3));
        let (v, t) = run("(a + b, a)", &env);
        let s = disc_view(&p("(5,_)"), &env, &t, &v).unwrap();
        assert_eq!(s.env.get("a"), &Pattern::int(2));
        assert_eq!(s.env.get("b"), &Pattern::int(3));
        assert_eq!(pretty_trace(&s.trace), "(a + b, _)");
    }
}
