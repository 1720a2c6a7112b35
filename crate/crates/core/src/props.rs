//! Executable forms of the metatheory. Each check runs one instance of a
//! property and returns `Ok(true)` when it was exercised, `Ok(false)` when
//! its hypothesis did not hold (vacuous), and `Err` with a description on
//! a violation.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::annot::{path_annotate_env, AnnEnv, Annotation, Path, Step};
use crate::eval::eval;
use crate::extract::{
    dep_env, eq_except_at, eq_except_at_env, eval_term_in_env, expr_env, extract, where_env, where_from_expr, Dependency,
    Expression, Trivial, Where,
};
use crate::gen::Program;
use crate::patterns::{diamond_subst, join, matches_mod, restrict, Pattern, PatternEnv};
use crate::replay::replay;
use crate::security::{check_disclosure, enumerate_triples, out_query, TmlTriple};
use crate::slicing::{disc_view, disclosure_slice, obf_view, obfuscation_slice, witness};
use crate::syntax::{Const, Env, Trace, Type, Value};
use crate::typecheck::{check_env_against, check_trace, check_value_against};

pub type Check = std::result::Result<bool, String>;

fn fail<T>(what: impl Into<String>) -> std::result::Result<T, String> {
    Err(what.into())
}

fn show_env(env: &Env) -> String {
    let parts: Vec<String> = env.iter().map(|(x, v)| format!("{x} = {v}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn run(prog: &Program, env: &Env) -> std::result::Result<(Value, Trace), String> {
    eval(env, &prog.expr).map_err(|e| format!("evaluation failed on {}: {e}", show_env(env)))
}

/// Consistency: `γ, e ⇓ v, T` implies `γ, T ↷ v`.
pub fn consistency(prog: &Program, env: &Env) -> Check {
    let (v, t) = run(prog, env)?;
    match replay(env, &t) {
        Ok(w) if w == v => Ok(true),
        Ok(w) => fail(format!("replay gave {w}, evaluation gave {v}")),
        Err(e) => fail(format!("trace does not replay on its own input: {e}")),
    }
}

/// Fidelity: if the trace of `γ` replays on `γ′` to `v′`, then evaluating
/// on `γ′` yields `v′` and the same trace.
pub fn fidelity(prog: &Program, env: &Env, env2: &Env) -> Check {
    let (_, t) = run(prog, env)?;
    let Ok(v2) = replay(env2, &t) else { return Ok(false) };
    let (w, t2) = run(prog, env2)?;
    if w != v2 {
        return fail(format!("replay on {} gave {v2}, evaluation gave {w}", show_env(env2)));
    }
    if t2 != t {
        return fail(format!("replay succeeded on {} but evaluation took a different trace", show_env(env2)));
    }
    Ok(true)
}

/// Replay is a function of its inputs.
pub fn determinacy(env: &Env, t: &Trace) -> Check {
    let (a, b) = (replay(env, t), replay(env, t));
    if a != b {
        return fail("two replays of the same trace disagree");
    }
    Ok(a.is_ok())
}

/// Results and traces have the program's type.
pub fn type_safety(prog: &Program, env: &Env) -> Check {
    let g = prog.type_env();
    check_env_against(env, &g).map_err(|e| format!("input does not fit the program's inputs: {e}"))?;
    let (v, t) = run(prog, env)?;
    check_value_against(&v, &prog.ty).map_err(|e| format!("result {v} is not a {}: {e}", prog.ty))?;
    let tt = check_trace(&g, &t).map_err(|e| format!("trace is ill-typed: {e}"))?;
    if !tt.alpha_eq(&prog.ty) {
        return fail(format!("trace has type {tt}, program has type {}", prog.ty));
    }
    Ok(true)
}

/// Extraction over `path(γ)`: erasure, where-copying, consistency of
/// expression terms, and where read off expression provenance.
pub fn extraction(prog: &Program, env: &Env) -> Check {
    let (v, t) = run(prog, env)?;
    let paths = path_annotate_env(env, &Path::empty());
    let ex = |e: crate::error::Error| format!("extraction failed: {e}");

    let triv = extract(&Trivial, &t, &AnnEnv::lift(env, &|_| ())).map_err(ex)?;
    let win = where_env(&paths);
    let w = extract(&Where, &t, &win).map_err(ex)?;
    let e = extract(&Expression, &t, &expr_env(&paths)).map_err(ex)?;
    let d = extract(&Dependency, &t, &dep_env(&paths)).map_err(ex)?;
    for (instance, erased) in [("trivial", triv.erase()), ("where", w.erase()), ("expression", e.erase()), ("dependency", d.erase())] {
        if erased != v {
            return fail(format!("{instance} extraction erases to {erased}, expected {v}"));
        }
    }

    let inputs = win.occ();
    for occ in w.occ_nonbot() {
        if !inputs.contains(&occ) {
            return fail(format!("where-annotated {occ} is not a copy of any input part"));
        }
    }

    for node in e.occ() {
        if node.ann.is_bottom() {
            continue;
        }
        match eval_term_in_env(env, &node.ann) {
            Ok(x) if x == node.erase() => {}
            Ok(x) => return fail(format!("term {} evaluates to {x}, annotates {}", node.ann, node.erase())),
            Err(err) => return fail(format!("term {} does not evaluate: {err}", node.ann)),
        }
    }

    if where_from_expr(&e) != w {
        return fail(format!("where {w} differs from expression read as where {}", where_from_expr(&e)));
    }
    Ok(true)
}

/// Combine two values along a pattern: `◇` and constants keep `v`, `□`
/// takes `w`, and constructors recurse while both sides agree on them.
/// The result is `≡_p`-related to `v` and has the same type.
pub fn mix(p: &Pattern, v: &Value, w: &Value) -> Value {
    match (p, v, w) {
        (Pattern::Hole, _, _) => w.clone(),
        (Pattern::Pair(p1, p2), Value::Pair(v1, v2), Value::Pair(w1, w2)) => Value::pair(mix(p1, v1, w1), mix(p2, v2, w2)),
        (Pattern::Inl(q), Value::Inl(a), Value::Inl(b)) => Value::inl(mix(q, a, b)),
        (Pattern::Inr(q), Value::Inr(a), Value::Inr(b)) => Value::inr(mix(q, a, b)),
        (Pattern::Roll(q), Value::Roll(a), Value::Roll(b)) => Value::roll(mix(q, a, b)),
        (Pattern::Closure(k, rho), Value::Closure(k1, e1), Value::Closure(k2, e2)) if k1 == k && k2 == k => {
            Value::Closure(k.clone(), mix_env(rho, e1, e2))
        }
        _ => v.clone(),
    }
}

pub fn mix_env(rho: &PatternEnv, env: &Env, other: &Env) -> Env {
    Env::from_pairs(env.iter().map(|(x, v)| {
        let mixed = match other.get(x) {
            Some(w) => mix(rho.get(x), v, w),
            None => v.clone(),
        };
        (x.clone(), mixed)
    }))
}

/// A random pattern below `v`. `◇` appears only if `diamonds` is set.
pub fn random_prefix(rng: &mut impl Rng, v: &Value, diamonds: bool) -> Pattern {
    let r: f64 = rng.gen();
    if r < 0.2 {
        return Pattern::Hole;
    }
    if diamonds && r < 0.3 {
        return Pattern::Diamond;
    }
    match v {
        Value::Const(c) => Pattern::Const(*c),
        Value::Pair(a, b) => Pattern::pair(random_prefix(rng, a, diamonds), random_prefix(rng, b, diamonds)),
        Value::Inl(a) => Pattern::Inl(Box::new(random_prefix(rng, a, diamonds))),
        Value::Inr(a) => Pattern::Inr(Box::new(random_prefix(rng, a, diamonds))),
        Value::Roll(a) => Pattern::Roll(Box::new(random_prefix(rng, a, diamonds))),
        Value::Closure(k, env) => Pattern::Closure(k.clone(), random_prefix_env(rng, env, diamonds)),
    }
}

pub fn random_prefix_env(rng: &mut impl Rng, env: &Env, diamonds: bool) -> PatternEnv {
    env.iter().map(|(x, v)| (x.clone(), random_prefix(rng, v, diamonds))).collect()
}

/// `◇` everywhere except a `□` at `steps`.
fn punch(v: &Value, steps: &[Step]) -> Pattern {
    let Some((s, rest)) = steps.split_first() else { return Pattern::Hole };
    match (v, s) {
        (Value::Pair(a, _), Step::One) => Pattern::pair(punch(a, rest), Pattern::Diamond),
        (Value::Pair(_, b), Step::Two) => Pattern::pair(Pattern::Diamond, punch(b, rest)),
        (Value::Inl(a), Step::One) => Pattern::Inl(Box::new(punch(a, rest))),
        (Value::Inr(a), Step::One) => Pattern::Inr(Box::new(punch(a, rest))),
        (Value::Roll(a), Step::One) => Pattern::Roll(Box::new(punch(a, rest))),
        _ => Pattern::Diamond,
    }
}

/// Dependency correctness: perturbing the input only below `ℓ` perturbs
/// the output only below parts whose dependency set contains `ℓ`.
pub fn dependency(prog: &Program, env: &Env, other: &Env, rng: &mut impl Rng) -> Check {
    let paths = path_annotate_env(env, &Path::empty());
    let locations: Vec<Path> = paths.occ().into_iter().map(|o| o.ann.clone()).collect();
    let Some(l) = locations.choose(rng).cloned() else { return Ok(false) };
    let Some((Step::Var(x), rest)) = l.steps().split_first() else { return Ok(false) };
    let v = env.lookup(x).map_err(|e| e.to_string())?;
    let rho = PatternEnv::singleton(x.clone(), punch(v, rest));
    let env2 = Env::from_pairs(env.iter().map(|(y, v)| {
        if y == x {
            (y.clone(), mix(rho.get(y), v, other.get(y).unwrap_or(v)))
        } else {
            (y.clone(), v.clone())
        }
    }));
    let d_in = dep_env(&paths);
    let d_in2 = dep_env(&path_annotate_env(&env2, &Path::empty()));
    if !eq_except_at_env(&l, &d_in, &d_in2) {
        return fail(format!("perturbed input {} is not equal to {} except at {l}", show_env(&env2), show_env(env)));
    }
    let (_, t) = run(prog, env)?;
    let (_, t2) = run(prog, &env2)?;
    let d = extract(&Dependency, &t, &d_in).map_err(|e| e.to_string())?;
    let d2 = extract(&Dependency, &t2, &d_in2).map_err(|e| e.to_string())?;
    if !eq_except_at(&l, &d, &d2) {
        return fail(format!("changing {l} from {} to {} changed {d} into {d2}", show_env(env), show_env(&env2)));
    }
    Ok(true)
}

fn junk_fill(rng: &mut impl Rng, s: &Trace, t: &Trace, env: &Env) -> Trace {
    use Trace::*;
    let b = |x: &Trace, y: &Trace, rng: &mut _| Box::new(junk_fill(rng, x, y, env));
    match (s, t) {
        (Hole, _) => match rng.gen_range(0..3) {
            0 => t.clone(),
            1 => Trace::Const(crate::syntax::Const::Int(rng.gen_range(0..3))),
            _ => match env.names().choose(rng) {
                Some(x) => Var(x.clone()),
                None => Trace::Const(crate::syntax::Const::Unit),
            },
        },
        (Prim(op, a), Prim(_, c)) => Prim(*op, a.iter().zip(c).map(|(x, y)| junk_fill(rng, x, y, env)).collect()),
        (Let(a, x, c), Let(a2, _, c2)) => Let(b(a, a2, rng), x.clone(), b(c, c2, rng)),
        (Pair(a, c), Pair(a2, c2)) => Pair(b(a, a2, rng), b(c, c2, rng)),
        (Fst(a), Fst(a2)) => Fst(b(a, a2, rng)),
        (Snd(a), Snd(a2)) => Snd(b(a, a2, rng)),
        (Inl(ty, a), Inl(_, a2)) => Inl(ty.clone(), b(a, a2, rng)),
        (Inr(ty, a), Inr(_, a2)) => Inr(ty.clone(), b(a, a2, rng)),
        (Roll(ty, a), Roll(_, a2)) => Roll(ty.clone(), b(a, a2, rng)),
        (Unroll(a), Unroll(a2)) => Unroll(b(a, a2, rng)),
        (CaseL(m, a, c), CaseL(_, a2, c2)) => CaseL(m.clone(), b(a, a2, rng), b(c, c2, rng)),
        (CaseR(m, a, c), CaseR(_, a2, c2)) => CaseR(m.clone(), b(a, a2, rng), b(c, c2, rng)),
        (App(k, f, a, c), App(_, f2, a2, c2)) => App(k.clone(), b(f, f2, rng), b(a, a2, rng), b(c, c2, rng)),
        _ => s.clone(),
    }
}

/// Disclosure slicing correctness: for `p ⊑ v` and `p, T ⟶disc S, ρ`,
/// every `γ′ ≡_ρ γ` and `T′ ⊒ S` with `γ′, T′ ↷ v′` has `v′ ≡_p v`.
pub fn disclosure_correct(prog: &Program, env: &Env, other: &Env, rng: &mut impl Rng) -> Check {
    let (v, t) = run(prog, env)?;
    let p = random_prefix(rng, &v, true);
    let slice = disclosure_slice(&p, &t).map_err(|e| format!("disclosure slicing by {p} failed: {e}"))?;
    if !slice.trace.leq(&t) {
        return fail(format!("slice by {p} is not below the trace"));
    }
    if !slice.env.leq_env(env) {
        return fail(format!("slice input {} is not below the input", slice.env));
    }
    let env2 = mix_env(&slice.env, env, other);
    if !slice.env.matches_mod(env, &env2) {
        return fail("mixed environment is not related to the original");
    }
    let mut candidates = vec![t.clone(), junk_fill(rng, &slice.trace, &t, env)];
    if let Ok((_, t2)) = run(prog, &env2) {
        if slice.trace.leq(&t2) {
            candidates.push(t2);
        }
    }
    let mut exercised = false;
    for t2 in candidates {
        if let Ok(v2) = replay(&env2, &t2) {
            exercised = true;
            if !matches_mod(&p, &v, &v2) {
                return fail(format!(
                    "slice by {p} on {}: replay on {} gave {v2}, not related to {v}",
                    show_env(env),
                    show_env(&env2)
                ));
            }
        }
    }
    Ok(exercised)
}

/// Obfuscation slicing is a function of `(ρ, T)` and stable: every input
/// above `ρ` obfuscates to the same partial output and trace.
pub fn obfuscation_stable(prog: &Program, env: &Env, other: &Env, rng: &mut impl Rng) -> Check {
    let (v, t) = run(prog, env)?;
    let rho = random_prefix_env(rng, env, false);
    let (p, s) = obf_view(&rho, env, &t, &v).map_err(|e| format!("obfuscation by {rho} failed: {e}"))?;
    if obfuscation_slice(&rho, &t).map_err(|e| e.to_string())? != (p.clone(), s.clone()) {
        return fail("obfuscation is not deterministic");
    }
    if !s.leq(&t) {
        return fail(format!("obfuscation slice by {rho} is not below the trace"));
    }
    let env2 = mix_env(&rho, env, other);
    let (v2, t2) = run(prog, &env2)?;
    match obf_view(&rho, &env2, &t2, &v2) {
        Ok(r) if r == (p.clone(), s.clone()) => Ok(true),
        Ok((p2, _)) => fail(format!("obfuscation by {rho} gives {p} on {} but {p2} on {}", show_env(env), show_env(&env2))),
        Err(e) => fail(format!("obfuscation by {rho} failed on {}: {e}", show_env(&env2))),
    }
}

/// Whether filling a hole with `p` rules out some value of the hole's
/// type: units and rolls alone do not.
fn informative(p: &Pattern) -> bool {
    match p {
        Pattern::Hole | Pattern::Diamond | Pattern::Const(Const::Unit) => false,
        Pattern::Const(_) | Pattern::Inl(_) | Pattern::Inr(_) => true,
        Pattern::Pair(a, b) => informative(a) || informative(b),
        Pattern::Roll(q) => informative(q),
        Pattern::Closure(..) => true,
    }
}

/// Positions where `hi` fills a hole of `lo`, as the filling patterns.
fn fillings<'a>(lo: &Pattern, hi: &'a Pattern, out: &mut Vec<&'a Pattern>) {
    match (lo, hi) {
        (_, Pattern::Hole) => {}
        (Pattern::Hole, _) => out.push(hi),
        (Pattern::Pair(a, b), Pattern::Pair(c, d)) => {
            fillings(a, c, out);
            fillings(b, d, out);
        }
        (Pattern::Inl(a), Pattern::Inl(c)) | (Pattern::Inr(a), Pattern::Inr(c)) | (Pattern::Roll(a), Pattern::Roll(c)) => {
            fillings(a, c, out)
        }
        (Pattern::Closure(_, r1), Pattern::Closure(_, r2)) => {
            for (x, q) in r2.iter() {
                fillings(r1.get(x), q, out);
            }
        }
        _ => {}
    }
}

/// Positive obfuscation of `IN_ρ′` by `Obf_ρ` over a finite universe:
/// for `ρ ⊑ ρ′ ⊑ γ` with `ρ′` filling some nonsingular hole, some `γ′ ⊒ ρ`
/// with `ρ′ ⋢ γ′` has the same obfuscated view. The universe should reach
/// beyond `tr` so that alternatives to every filled hole exist.
pub fn positive_obfuscation(universe: &[TmlTriple], tr: &TmlTriple, rng: &mut impl Rng) -> Check {
    let rho = random_prefix_env(rng, &tr.env, false);
    let extra = random_prefix_env(rng, &tr.env, false);
    let rho2 = rho.join(&extra).map_err(|e| e.to_string())?;
    let mut filled = Vec::new();
    for (x, q) in rho2.iter() {
        fillings(rho.get(x), q, &mut filled);
    }
    if !filled.iter().any(|q| informative(q)) {
        return Ok(false);
    }
    let view = obf_view(&rho, &tr.env, &tr.trace, &tr.value).map_err(|e| e.to_string())?;
    let mut avoiding = 0;
    for other in universe {
        if !rho.leq_env(&other.env) {
            continue;
        }
        let v2 = obf_view(&rho, &other.env, &other.trace, &other.value).map_err(|e| e.to_string())?;
        if v2 != view {
            return fail(format!("obfuscation by {rho} differs between {} and {}", show_env(&tr.env), show_env(&other.env)));
        }
        if !rho2.leq_env(&other.env) {
            avoiding += 1;
        }
    }
    if avoiding == 0 {
        return fail(format!("no input above {rho} avoids {rho2}"));
    }
    Ok(true)
}

/// `Disc_p` discloses `OUT_p` on the universe.
pub fn full_disclosure(universe: &[TmlTriple], p: &Pattern) -> Check {
    let views = universe
        .iter()
        .map(|t| disc_view(p, &t.env, &t.trace, &t.value))
        .collect::<crate::error::Result<Vec<_>>>()
        .map_err(|e| format!("Disc_{p} failed: {e}"))?;
    let indices: Vec<usize> = (0..universe.len()).collect();
    let out = out_query(p.clone());
    if check_disclosure(&indices, |&i| views[i].clone(), |&i| out(&universe[i])) {
        Ok(true)
    } else {
        fail(format!("two inputs with the same Disc_{p} view disagree on OUT_{p}"))
    }
}

/// The triples of a program over a small base domain.
pub fn universe(prog: &Program, ints: &[i64], depth: usize) -> std::result::Result<Vec<TmlTriple>, String> {
    enumerate_triples(&prog.expr, ints, &prog.inputs, depth, crate::eval::DEFAULT_FUEL).map_err(|e| e.to_string())
}

/// Every value of a type, every pattern of a type (optionally with `◇`).
pub fn patterns_of_type(ty: &Type, ints: &[i64], depth: usize, diamonds: bool) -> Vec<Pattern> {
    let mut out = vec![Pattern::Hole];
    if diamonds {
        out.push(Pattern::Diamond);
    }
    match ty {
        Type::Int => out.extend(ints.iter().map(|&n| Pattern::int(n))),
        Type::Unit => out.push(Pattern::Const(Const::Unit)),
        Type::Prod(a, b) => {
            let (pa, pb) = (patterns_of_type(a, ints, depth, diamonds), patterns_of_type(b, ints, depth, diamonds));
            out.extend(pa.iter().flat_map(|x| pb.iter().map(move |y| Pattern::pair(x.clone(), y.clone()))));
        }
        Type::Sum(a, b) => {
            out.extend(patterns_of_type(a, ints, depth, diamonds).into_iter().map(|p| Pattern::Inl(Box::new(p))));
            out.extend(patterns_of_type(b, ints, depth, diamonds).into_iter().map(|p| Pattern::Inr(Box::new(p))));
        }
        Type::Mu(..) if depth > 0 => {
            let body = ty.unfold().expect("mu unfolds");
            out.extend(patterns_of_type(&body, ints, depth - 1, diamonds).into_iter().map(|p| Pattern::Roll(Box::new(p))));
        }
        _ => {}
    }
    out
}

/// The witness lemma on one pair: `Witness(p, v) ⊑ v`, and no value above
/// the witness matches `p`.
pub fn witness_lemma(p: &Pattern, v: &Value, values: &[Value]) -> Check {
    if p.leq_value(v) {
        return Ok(false);
    }
    let w = witness(p, v).map_err(|e| e.to_string())?;
    if !w.leq_value(v) {
        return fail(format!("Witness({p}, {v}) = {w} is not below {v}"));
    }
    if p.leq(&w) {
        return fail(format!("Witness({p}, {v}) = {w} lies above {p}"));
    }
    if let Some(v2) = values.iter().find(|v2| w.leq_value(v2) && p.leq_value(v2)) {
        return fail(format!("{v2} extends Witness({p}, {v}) = {w} yet matches {p}"));
    }
    Ok(true)
}

/// Values with constants `ints`, built with pairs, injections and rolls,
/// nested at most `depth` deep.
pub fn small_values(ints: &[i64], depth: usize) -> Vec<Value> {
    let mut vs: Vec<Value> = ints.iter().map(|&n| Value::int(n)).collect();
    for _ in 0..depth {
        let prev = vs.clone();
        let mut next: Vec<Value> = ints.iter().map(|&n| Value::int(n)).collect();
        next.extend(prev.iter().flat_map(|a| prev.iter().map(move |b| Value::pair(a.clone(), b.clone()))));
        next.extend(prev.iter().map(|a| Value::inl(a.clone())));
        next.extend(prev.iter().map(|a| Value::inr(a.clone())));
        next.extend(prev.iter().map(|a| Value::roll(a.clone())));
        vs = next;
    }
    vs
}

/// Patterns over the same shapes as `small_values`, with `□` and `◇`.
pub fn small_patterns(ints: &[i64], depth: usize) -> Vec<Pattern> {
    let leaves = || {
        let mut l = vec![Pattern::Hole, Pattern::Diamond];
        l.extend(ints.iter().map(|&n| Pattern::int(n)));
        l
    };
    let mut ps = leaves();
    for _ in 0..depth {
        let prev = ps.clone();
        let mut next = leaves();
        next.extend(prev.iter().flat_map(|a| prev.iter().map(move |b| Pattern::pair(a.clone(), b.clone()))));
        next.extend(prev.iter().map(|a| Pattern::Inl(Box::new(a.clone()))));
        next.extend(prev.iter().map(|a| Pattern::Inr(Box::new(a.clone()))));
        next.extend(prev.iter().map(|a| Pattern::Roll(Box::new(a.clone()))));
        ps = next;
    }
    ps
}

/// A relation on `n` values as bit rows.
#[derive(Clone, PartialEq, Eq)]
struct Rel {
    n: usize,
    bits: Vec<u64>,
}

impl Rel {
    fn new(n: usize) -> Rel {
        let words = n.div_ceil(64);
        Rel { n, bits: vec![0; n * words] }
    }

    fn words(&self) -> usize {
        self.n.div_ceil(64)
    }

    fn set(&mut self, i: usize, j: usize) {
        let w = self.words();
        self.bits[i * w + j / 64] |= 1 << (j % 64);
    }

    fn get(&self, i: usize, j: usize) -> bool {
        let w = self.words();
        self.bits[i * w + j / 64] >> (j % 64) & 1 == 1
    }

    fn row(&self, i: usize) -> &[u64] {
        let w = self.words();
        &self.bits[i * w..(i + 1) * w]
    }

    fn and(&self, other: &Rel) -> Rel {
        Rel { n: self.n, bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect() }
    }

    fn subset(&self, other: &Rel) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }
}

/// Outcome of the exhaustive pattern-lattice check.
#[derive(Debug, Default)]
pub struct LatticeReport {
    pub patterns: usize,
    pub values: usize,
    pub joins: usize,
    pub orderings: usize,
}

/// The laws of `≡_p` over every pattern and value of the given depth:
/// partial equivalence, `≡_{p⊔p′} = ≡_p ∩ ≡_{p′}`, `≡_{p[◇/□]} = ≡_◇ ∩ ≡_p`,
/// antitonicity in `p`, agreement with `⊑`, and restriction.
// Closure patterns carry a free-variable cache that hashing ignores.
#[allow(clippy::mutable_key_type)]
pub fn pattern_laws(ints: &[i64], depth: usize) -> std::result::Result<LatticeReport, String> {
    let values = small_values(ints, depth);
    let patterns = small_patterns(ints, depth);
    let n = values.len();
    let index: HashMap<&Pattern, usize> = patterns.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let rels: Vec<Rel> = patterns
        .iter()
        .map(|p| {
            let mut r = Rel::new(n);
            for i in 0..n {
                for j in 0..n {
                    if matches_mod(p, &values[i], &values[j]) {
                        r.set(i, j);
                    }
                }
            }
            r
        })
        .collect();
    let diamond = &rels[index[&Pattern::Diamond]];

    for (pi, p) in patterns.iter().enumerate() {
        let r = &rels[pi];
        for i in 0..n {
            let below = p.leq_value(&values[i]);
            if below != r.get(i, i) {
                return fail(format!("{p} ⊑ {} is {below} but reflexivity says otherwise", values[i]));
            }
            for j in 0..n {
                if r.get(i, j) != r.get(j, i) {
                    return fail(format!("≡_{p} is not symmetric on {} and {}", values[i], values[j]));
                }
                if r.get(i, j) {
                    if !below || !p.leq_value(&values[j]) {
                        return fail(format!("{} ≡_{p} {} without both lying above {p}", values[i], values[j]));
                    }
                    let (ri, rj) = (r.row(i), r.row(j));
                    if rj.iter().zip(ri).any(|(b, a)| b & !a != 0) {
                        return fail(format!("≡_{p} is not transitive through {} and {}", values[i], values[j]));
                    }
                }
            }
            if below {
                let q = restrict(&values[i], p).map_err(|e| e.to_string())?;
                if !q.is_diamond_free() {
                    return fail(format!("{}|_{p} = {q} contains ◇", values[i]));
                }
                for j in 0..n {
                    if r.get(i, j) != q.leq_value(&values[j]) {
                        return fail(format!("{}|_{p} = {q} does not characterise ≡_{p} at {}", values[i], values[j]));
                    }
                }
            }
        }
        let sub = diamond_subst(p);
        if let Some(&si) = index.get(&sub) {
            if rels[si] != diamond.and(r) {
                return fail(format!("≡ at {sub} is not ≡_◇ ∩ ≡_{p}"));
            }
        }
    }

    let mut report = LatticeReport { patterns: patterns.len(), values: n, ..Default::default() };
    for (pi, p) in patterns.iter().enumerate() {
        for (qi, q) in patterns.iter().enumerate() {
            let Ok(j) = join(p, q) else { continue };
            report.joins += 1;
            let Some(&ji) = index.get(&j) else { continue };
            if rels[ji] != rels[pi].and(&rels[qi]) {
                return fail(format!("≡ at {p} ⊔ {q} = {j} is not the intersection"));
            }
            if j == *q {
                report.orderings += 1;
                if !rels[qi].subset(&rels[pi]) {
                    return fail(format!("{p} ⊑ {q} but ≡_{q} is not contained in ≡_{p}"));
                }
            }
        }
    }
    Ok(report)
}
