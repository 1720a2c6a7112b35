//! Generic provenance extraction `F(T, γ̂)`: trace replay over annotated
//! values, parameterised by how annotations propagate through each step.
//! Where-, expression- and dependency-provenance are instances.

use std::fmt::{self, Display, Formatter};

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::annot::{path_lookup_env, AnnEnv, AnnNode, AnnValue, Annotation, Path, Style};
use crate::error::{Error, Result};
use crate::eval::{deep, eval_primitive};
use crate::replay::inconsistent;
use crate::syntax::{Const, Env, Prim, Trace, Value};

/// The propagation functions of an annotation structure. Pairs, injections,
/// rolls and `let` are fixed by the engine and always produce `⊥` at the top.
///
/// `proj*`, `case_*`, `app` and `unroll` receive the annotation of the
/// eliminated value (pair, scrutinee, closure, roll) and the annotation of
/// the result part. `prim` also sees the erased arguments.
pub trait AnnotationStructure {
    type A: Annotation;

    fn bottom(&self) -> Self::A;
    fn constant(&self, c: Const) -> Self::A;
    fn kappa(&self) -> Self::A;
    fn proj1(&self, pair: &Self::A, part: &Self::A) -> Self::A;
    fn proj2(&self, pair: &Self::A, part: &Self::A) -> Self::A;
    fn case_l(&self, scrut: &Self::A, body: &Self::A) -> Self::A;
    fn case_r(&self, scrut: &Self::A, body: &Self::A) -> Self::A;
    fn app(&self, closure: &Self::A, body: &Self::A) -> Self::A;
    fn unroll(&self, roll: &Self::A, inner: &Self::A) -> Self::A;
    fn prim(&self, op: Prim, args: &[Self::A], values: &[Value]) -> Self::A;
}

/// Annotations `{⊥}`; extraction coincides with replay.
#[derive(Clone, Copy, Debug, Default)]
pub struct Trivial;

impl AnnotationStructure for Trivial {
    type A = ();

    fn bottom(&self) {}
    fn constant(&self, _: Const) {}
    fn kappa(&self) {}
    fn proj1(&self, _: &(), _: &()) {}
    fn proj2(&self, _: &(), _: &()) {}
    fn case_l(&self, _: &(), _: &()) {}
    fn case_r(&self, _: &(), _: &()) {}
    fn app(&self, _: &(), _: &()) {}
    fn unroll(&self, _: &(), _: &()) {}
    fn prim(&self, _: Prim, _: &[()], _: &[Value]) {}
}

/// Where-provenance: copies keep their location, computed data gets `⊥`
/// (`None`).
#[derive(Clone, Copy, Debug, Default)]
pub struct Where;

impl Annotation for Option<Path> {
    fn is_bottom(&self) -> bool {
        self.is_none()
    }

    fn render(&self, style: Style, leaf: bool) -> Option<String> {
        match (self, style) {
            (Some(p), _) => p.render(style, leaf),
            (None, Style::Braced) if leaf => Some("{}".into()),
            (None, _) => None,
        }
    }
}

impl AnnotationStructure for Where {
    type A = Option<Path>;

    fn bottom(&self) -> Option<Path> {
        None
    }
    fn constant(&self, _: Const) -> Option<Path> {
        None
    }
    fn kappa(&self) -> Option<Path> {
        None
    }
    fn proj1(&self, _: &Option<Path>, b: &Option<Path>) -> Option<Path> {
        b.clone()
    }
    fn proj2(&self, _: &Option<Path>, b: &Option<Path>) -> Option<Path> {
        b.clone()
    }
    fn case_l(&self, _: &Option<Path>, b: &Option<Path>) -> Option<Path> {
        b.clone()
    }
    fn case_r(&self, _: &Option<Path>, b: &Option<Path>) -> Option<Path> {
        b.clone()
    }
    fn app(&self, _: &Option<Path>, b: &Option<Path>) -> Option<Path> {
        b.clone()
    }
    fn unroll(&self, _: &Option<Path>, b: &Option<Path>) -> Option<Path> {
        b.clone()
    }
    fn prim(&self, _: Prim, _: &[Option<Path>], _: &[Value]) -> Option<Path> {
        None
    }
}

/// Expression annotations `t ::= π | c | ⊕(t1,…,tn) | ⊥`. Booleans are
/// sums here, so `Bool` stands in for boolean constants.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum ExprTerm {
    Bot,
    Path(Path),
    Const(Const),
    Bool(bool),
    Prim(Prim, Vec<ExprTerm>),
}

impl Annotation for ExprTerm {
    fn is_bottom(&self) -> bool {
        *self == ExprTerm::Bot
    }

    fn render(&self, _: Style, _: bool) -> Option<String> {
        match self {
            ExprTerm::Bot => None,
            t => Some(format!("{{{t}}}")),
        }
    }
}

/// Expression provenance: like where-provenance, but constants and
/// primitive applications build terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct Expression;

impl AnnotationStructure for Expression {
    type A = ExprTerm;

    fn bottom(&self) -> ExprTerm {
        ExprTerm::Bot
    }
    fn constant(&self, c: Const) -> ExprTerm {
        ExprTerm::Const(c)
    }
    fn kappa(&self) -> ExprTerm {
        ExprTerm::Bot
    }
    fn proj1(&self, _: &ExprTerm, b: &ExprTerm) -> ExprTerm {
        b.clone()
    }
    fn proj2(&self, _: &ExprTerm, b: &ExprTerm) -> ExprTerm {
        b.clone()
    }
    fn case_l(&self, _: &ExprTerm, b: &ExprTerm) -> ExprTerm {
        b.clone()
    }
    fn case_r(&self, _: &ExprTerm, b: &ExprTerm) -> ExprTerm {
        b.clone()
    }
    fn app(&self, _: &ExprTerm, b: &ExprTerm) -> ExprTerm {
        b.clone()
    }
    fn unroll(&self, _: &ExprTerm, b: &ExprTerm) -> ExprTerm {
        b.clone()
    }
    fn prim(&self, op: Prim, args: &[ExprTerm], values: &[Value]) -> ExprTerm {
        // A blank boolean argument was built by `true`/`false` in the
        // program, which is a constant in the source language.
        let args = args
            .iter()
            .zip(values)
            .map(|(a, v)| match (a, v.as_bool()) {
                (ExprTerm::Bot, Some(b)) => ExprTerm::Bool(b),
                _ => a.clone(),
            })
            .collect();
        ExprTerm::Prim(op, args)
    }
}

fn term_prec(op: Prim) -> u8 {
    match op {
        Prim::Or => 1,
        Prim::And => 2,
        Prim::Eq | Prim::Lt => 3,
        Prim::Add | Prim::Sub => 5,
        Prim::Mul => 6,
        Prim::Not => 9,
    }
}

/// Fold `(t-c1)-c2` into `t-(c1+c2)`, so repeated decrements read `L-3`.
fn fold_term(t: &ExprTerm) -> ExprTerm {
    match t {
        ExprTerm::Prim(op, args) => {
            let args: Vec<ExprTerm> = args.iter().map(fold_term).collect();
            if *op == Prim::Sub {
                if let (ExprTerm::Prim(Prim::Sub, inner), ExprTerm::Const(Const::Int(c2))) = (&args[0], &args[1]) {
                    if let ExprTerm::Const(Const::Int(c1)) = &inner[1] {
                        return ExprTerm::Prim(
                            Prim::Sub,
                            vec![inner[0].clone(), ExprTerm::Const(Const::Int(c1.wrapping_add(*c2)))],
                        );
                    }
                }
            }
            ExprTerm::Prim(*op, args)
        }
        other => other.clone(),
    }
}

fn write_term(out: &mut String, t: &ExprTerm, min: u8) {
    match t {
        ExprTerm::Bot => out.push('⊥'),
        ExprTerm::Path(p) => out.push_str(&p.to_string()),
        ExprTerm::Const(Const::Int(n)) if *n < 0 && min > 0 => out.push_str(&format!("({n})")),
        ExprTerm::Const(c) => out.push_str(&c.to_string()),
        ExprTerm::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprTerm::Prim(Prim::Not, args) => {
            out.push_str("not(");
            write_term(out, &args[0], 0);
            out.push(')');
        }
        ExprTerm::Prim(op, args) => {
            let p = term_prec(*op);
            let (lp, rp) = match op {
                Prim::Add | Prim::Mul | Prim::And | Prim::Or => (p, p),
                Prim::Sub => (p, p + 1),
                _ => (p + 1, p + 1),
            };
            if p < min {
                out.push('(');
            }
            write_term(out, &args[0], lp);
            out.push_str(op.symbol());
            write_term(out, &args[1], rp);
            if p < min {
                out.push(')');
            }
        }
    }
}

impl Display for ExprTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_term(&mut out, &fold_term(self), 0);
        f.write_str(&out)
    }
}

/// Dependency annotations: sets of locations, `⊥ = ∅`. Equality ignores
/// insertion order; printing follows it.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct DepSet(pub IndexSet<Path>);

impl DepSet {
    pub fn singleton(p: Path) -> DepSet {
        DepSet(IndexSet::from([p]))
    }

    pub fn union(&self, other: &DepSet) -> DepSet {
        let mut s = self.0.clone();
        s.extend(other.0.iter().cloned());
        DepSet(s)
    }

    pub fn contains(&self, p: &Path) -> bool {
        self.0.contains(p)
    }
}

impl Display for DepSet {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(Path::to_string).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

impl Annotation for DepSet {
    fn is_bottom(&self) -> bool {
        self.0.is_empty()
    }

    fn render(&self, _: Style, leaf: bool) -> Option<String> {
        if self.0.is_empty() && !leaf {
            None
        } else {
            Some(self.to_string())
        }
    }
}

/// Dependency provenance: every eliminator unions the annotation of the
/// eliminated value into the result.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dependency;

impl AnnotationStructure for Dependency {
    type A = DepSet;

    fn bottom(&self) -> DepSet {
        DepSet::default()
    }
    fn constant(&self, _: Const) -> DepSet {
        DepSet::default()
    }
    fn kappa(&self) -> DepSet {
        DepSet::default()
    }
    fn proj1(&self, a: &DepSet, b: &DepSet) -> DepSet {
        a.union(b)
    }
    fn proj2(&self, a: &DepSet, b: &DepSet) -> DepSet {
        a.union(b)
    }
    fn case_l(&self, a: &DepSet, b: &DepSet) -> DepSet {
        a.union(b)
    }
    fn case_r(&self, a: &DepSet, b: &DepSet) -> DepSet {
        a.union(b)
    }
    fn app(&self, a: &DepSet, b: &DepSet) -> DepSet {
        a.union(b)
    }
    fn unroll(&self, a: &DepSet, b: &DepSet) -> DepSet {
        a.union(b)
    }
    fn prim(&self, _: Prim, args: &[DepSet], _: &[Value]) -> DepSet {
        args.iter().fold(DepSet::default(), |acc, a| acc.union(a))
    }
}

/// `F(T, γ̂)`. Fails exactly when replaying `T` on `|γ̂|` fails.
pub fn extract<S: AnnotationStructure>(s: &S, t: &Trace, env: &AnnEnv<S::A>) -> Result<AnnValue<S::A>> {
    let mut env = env.clone();
    go(s, t, &mut env)
}

fn go<S: AnnotationStructure>(s: &S, t: &Trace, env: &mut AnnEnv<S::A>) -> Result<AnnValue<S::A>> {
    deep(|| step(s, t, env))
}

fn step<S: AnnotationStructure>(s: &S, t: &Trace, env: &mut AnnEnv<S::A>) -> Result<AnnValue<S::A>> {
    let bot = || s.bottom();
    Ok(match t {
        Trace::Hole => return Err(inconsistent(t, "cannot extract from a hole")),
        Trace::Var(x) => env.lookup(x)?.clone(),
        Trace::Const(c) => AnnValue::new(AnnNode::Const(*c), s.constant(*c)),
        Trace::Prim(op, args) => {
            let vs = args.iter().map(|a| go(s, a, env)).collect::<Result<Vec<_>>>()?;
            let erased: Vec<Value> = vs.iter().map(AnnValue::erase).collect();
            let v = eval_primitive(*op, &erased).map_err(|e| inconsistent(t, e.to_string()))?;
            let anns: Vec<S::A> = vs.into_iter().map(|v| v.ann).collect();
            AnnValue::blank(&v, &bot()).with_ann(s.prim(*op, &anns, &erased))
        }
        Trace::Let(a, x, b) => {
            let v = go(s, a, env)?;
            env.push(x.clone(), v);
            let r = go(s, b, env);
            env.pop();
            r?
        }
        Trace::Pair(a, b) => {
            let va = go(s, a, env)?;
            let vb = go(s, b, env)?;
            AnnValue::new(AnnNode::Pair(Box::new(va), Box::new(vb)), bot())
        }
        Trace::Fst(a) | Trace::Snd(a) => {
            let v = go(s, a, env)?;
            let AnnNode::Pair(l, r) = v.node else {
                return Err(inconsistent(t, "projection from a non-pair"));
            };
            if matches!(t, Trace::Fst(_)) {
                let ann = s.proj1(&v.ann, &l.ann);
                l.with_ann(ann)
            } else {
                let ann = s.proj2(&v.ann, &r.ann);
                r.with_ann(ann)
            }
        }
        Trace::Inl(_, a) => AnnValue::new(AnnNode::Inl(Box::new(go(s, a, env)?)), bot()),
        Trace::Inr(_, a) => AnnValue::new(AnnNode::Inr(Box::new(go(s, a, env)?)), bot()),
        Trace::Roll(_, a) => AnnValue::new(AnnNode::Roll(Box::new(go(s, a, env)?)), bot()),
        Trace::Unroll(a) => {
            let v = go(s, a, env)?;
            let AnnNode::Roll(inner) = v.node else {
                return Err(inconsistent(t, "unroll of a non-roll value"));
            };
            let ann = s.unroll(&v.ann, &inner.ann);
            inner.with_ann(ann)
        }
        Trace::CaseL(m, sc, b) | Trace::CaseR(m, sc, b) => {
            let left = matches!(t, Trace::CaseL(..));
            let v = go(s, sc, env)?;
            let (x, payload) = match (v.node, left) {
                (AnnNode::Inl(p), true) => (&m.x1, *p),
                (AnnNode::Inr(p), false) => (&m.x2, *p),
                (_, true) => return Err(inconsistent(t, "trace records inl branch, scrutinee is not inl")),
                (_, false) => return Err(inconsistent(t, "trace records inr branch, scrutinee is not inr")),
            };
            env.push(x.clone(), payload);
            let r = go(s, b, env);
            env.pop();
            let r = r?;
            let ann = if left { s.case_l(&v.ann, &r.ann) } else { s.case_r(&v.ann, &r.ann) };
            r.with_ann(ann)
        }
        Trace::Fun(k) => AnnValue::new(AnnNode::Closure(k.clone(), env.restrict(k.free_vars())?), s.kappa()),
        Trace::App(k, f, a, body) => {
            let vf = go(s, f, env)?;
            let va = go(s, a, env)?;
            let AnnNode::Closure(k2, rho) = &vf.node else {
                return Err(inconsistent(t, "application of a non-closure"));
            };
            if k2 != k {
                return Err(inconsistent(t, format!("trace records a call to `{}`, found closure of `{}`", k.name, k2.name)));
            }
            let mut inner = rho.clone();
            inner.push(k.name.clone(), vf.clone());
            inner.push(k.param.clone(), va);
            let r = go(s, body, &mut inner)?;
            let ann = s.app(&vf.ann, &r.ann);
            r.with_ann(ann)
        }
    })
}

/// Initial where-annotations from `path(γ)`.
pub fn where_env(paths: &AnnEnv<Path>) -> AnnEnv<Option<Path>> {
    paths.map(&|p| Some(p.clone()))
}

pub fn expr_env(paths: &AnnEnv<Path>) -> AnnEnv<ExprTerm> {
    paths.map(&|p| ExprTerm::Path(p.clone()))
}

pub fn dep_env(paths: &AnnEnv<Path>) -> AnnEnv<DepSet> {
    paths.map(&|p| DepSet::singleton(p.clone()))
}

/// `h(t)`: evaluate a term, resolving locations through `h`.
pub fn eval_annotation_term(h: &dyn Fn(&Path) -> Result<Value>, t: &ExprTerm) -> Result<Value> {
    match t {
        ExprTerm::Bot => Err(Error::Precondition("the blank term ⊥ has no value".into())),
        ExprTerm::Path(p) => h(p),
        ExprTerm::Const(c) => Ok(Value::Const(*c)),
        ExprTerm::Bool(b) => Ok(Value::bool(*b)),
        ExprTerm::Prim(op, args) => {
            let vs = args.iter().map(|a| eval_annotation_term(h, a)).collect::<Result<Vec<_>>>()?;
            eval_primitive(*op, &vs)
        }
    }
}

/// `γ(t)`: locations are looked up as paths into `γ`.
pub fn eval_term_in_env(env: &Env, t: &ExprTerm) -> Result<Value> {
    eval_annotation_term(&|p| path_lookup_env(env, p).cloned(), t)
}

/// `v̂ ≡ℓ v̂′`: equal except possibly below nodes labelled `ℓ` on both sides.
pub fn eq_except_at(l: &Path, a: &AnnValue<DepSet>, b: &AnnValue<DepSet>) -> bool {
    if a.ann.contains(l) && b.ann.contains(l) {
        return true;
    }
    if a.ann != b.ann {
        return false;
    }
    deep(|| match (&a.node, &b.node) {
        (AnnNode::Const(c), AnnNode::Const(d)) => c == d,
        (AnnNode::Pair(a1, a2), AnnNode::Pair(b1, b2)) => eq_except_at(l, a1, b1) && eq_except_at(l, a2, b2),
        (AnnNode::Inl(x), AnnNode::Inl(y)) | (AnnNode::Inr(x), AnnNode::Inr(y)) | (AnnNode::Roll(x), AnnNode::Roll(y)) => {
            eq_except_at(l, x, y)
        }
        (AnnNode::Closure(k1, e1), AnnNode::Closure(k2, e2)) => k1 == k2 && eq_except_at_env(l, e1, e2),
        _ => false,
    })
}

pub fn eq_except_at_env(l: &Path, a: &AnnEnv<DepSet>, b: &AnnEnv<DepSet>) -> bool {
    a.len() == b.len() && a.iter().zip(b.iter()).all(|((x, v), (y, w))| x == y && eq_except_at(l, v, w))
}

/// Where-provenance read off expression provenance: bare locations stay,
/// every other term becomes `⊥`.
pub fn where_from_expr(v: &AnnValue<ExprTerm>) -> AnnValue<Option<Path>> {
    v.map(&|t| match t {
        ExprTerm::Path(p) => Some(p.clone()),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annot::path_annotate_env;
    use crate::eval::eval;
    use crate::parser::{parse_expr, parse_value};
    use crate::syntax::{name, Env};
    use crate::typecheck::{check_env, elaborate};

    fn traced(src: &str, env: &Env) -> Trace {
        let (e, _) = elaborate(&check_env(env).unwrap(), &parse_expr(src).unwrap()).unwrap();
        eval(env, &e).unwrap().1
    }

    #[test]
    fn first_argument_matters_for_dependency() {
        // fst x where x's pair carries its own label: the pair label joins in.
        let one = AnnValue::new(AnnNode::Const(Const::Int(1)), DepSet::singleton(Path::var("a")));
        let two = AnnValue::new(AnnNode::Const(Const::Int(2)), DepSet::singleton(Path::var("b")));
        let pair = AnnValue::new(AnnNode::Pair(Box::new(one), Box::new(two)), DepSet::singleton(Path::var("c")));
        let env = AnnEnv::new().with("x", pair);
        let t = Trace::Fst(Box::new(Trace::Var(name("x"))));
        let out = extract(&Dependency, &t, &env).unwrap();
        assert_eq!(out.ann, DepSet(IndexSet::from([Path::var("c"), Path::var("a")])));
        assert_eq!(out.render(Style::Braced), "1@{c,a}");
    }

    #[test]
    fn constants_and_copies() {
        let env = Env::new().with("x", Value::int(2)).with("y", Value::int(3));
        let paths = path_annotate_env(&env, &Path::empty());
        let t = traced("(x, x + y, 5)", &env);
        assert_eq!(extract(&Where, &t, &where_env(&paths)).unwrap().render(Style::Compact), "(2@x,5,5)");
        assert_eq!(extract(&Expression, &t, &expr_env(&paths)).unwrap().render(Style::Braced), "(2@{x},5@{x+y},5@{5})");
        assert_eq!(extract(&Dependency, &t, &dep_env(&paths)).unwrap().render(Style::Braced), "(2@{x},5@{x,y},5@{})");
    }

    #[test]
    fn term_evaluation() {
        let env = Env::new().with("x", parse_value("(1,2)").unwrap()).with("y", parse_value("(2,3)").unwrap());
        let t = ExprTerm::Prim(
            Prim::Add,
            vec![ExprTerm::Path("x.1".parse().unwrap()), ExprTerm::Path("y.2".parse().unwrap())],
        );
        assert_eq!(eval_term_in_env(&env, &t).unwrap(), Value::int(4));
        assert_eq!(eval_term_in_env(&env, &ExprTerm::Const(Const::Int(7))).unwrap(), Value::int(7));
        assert!(eval_term_in_env(&env, &ExprTerm::Bot).is_err());
    }

    #[test]
    fn term_printing_folds_decrements() {
        let l = || ExprTerm::Path(Path::var("L"));
        let c = |n| ExprTerm::Const(Const::Int(n));
        let sub = |a, b| ExprTerm::Prim(Prim::Sub, vec![a, b]);
        let mul = |a, b| ExprTerm::Prim(Prim::Mul, vec![a, b]);
        let t = mul(l(), mul(sub(l(), c(1)), mul(sub(sub(l(), c(1)), c(1)), c(1))));
        assert_eq!(t.to_string(), "L*(L-1)*(L-2)*1");
        assert_eq!(sub(l(), ExprTerm::Prim(Prim::Add, vec![c(1), c(2)])).to_string(), "L-(1+2)");
    }

    #[test]
    fn eq_except_at_examples() {
        let l = Path::var("l");
        let k = |n, s: DepSet| AnnValue::new(AnnNode::Const(Const::Int(n)), s);
        assert!(eq_except_at(&l, &k(1, DepSet::default()), &k(1, DepSet::default())));
        assert!(eq_except_at(&l, &k(1, DepSet::singleton(l.clone())), &k(2, DepSet::singleton(l.clone()))));
        assert!(!eq_except_at(&l, &k(1, DepSet::default()), &k(2, DepSet::default())));
    }

    #[test]
    fn trivial_matches_replay() {
        let env = Env::new().with("n", Value::int(3));
        let t = traced("let f = fun f(x:int):int. if x = 0 then 1 else x * f (x - 1) in f n", &env);
        let out = extract(&Trivial, &t, &AnnEnv::lift(&env, &|_| ())).unwrap();
        assert_eq!(out.erase(), Value::int(6));
    }
}
