//! Bidirectional type checking for expressions, values, environments and
//! traces. Checking an expression also elaborates it: sum and μ
//! annotations are filled in and every code pointer records the types of
//! its free variables, which the trace checker needs for call bodies.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::syntax::{name, Const, Env, Expr, FunDef, MatchPtr, Name, Trace, Type, Value};

#[derive(Clone, PartialEq, Debug, Default)]
pub struct TypeEnv(Vec<(Name, Type)>);

impl TypeEnv {
    pub fn new() -> TypeEnv {
        TypeEnv(Vec::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Name, Type)>) -> TypeEnv {
        TypeEnv(pairs.into_iter().collect())
    }

    pub fn get(&self, x: &str) -> Option<&Type> {
        self.0.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }

    pub fn lookup(&self, x: &str) -> Result<&Type> {
        self.get(x).ok_or_else(|| Error::Unbound(name(x)))
    }

    pub fn push(&mut self, x: Name, t: Type) {
        self.0.push((x, t));
    }

    pub fn with(mut self, x: &str, t: Type) -> TypeEnv {
        self.push(name(x), t);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Name, Type)> {
        self.0.iter()
    }

    fn extended(&self, binds: &[(&Name, Type)]) -> TypeEnv {
        let mut g = self.clone();
        for (x, t) in binds {
            g.push((*x).clone(), t.clone());
        }
        g
    }
}

fn mismatch(expected: &Type, found: &Type, term: impl std::fmt::Display) -> Error {
    Error::ty(format!("expected type `{expected}`, found `{found}`"), term)
}

fn same(expected: &Type, found: &Type, term: impl std::fmt::Display) -> Result<()> {
    if expected.alpha_eq(found) {
        Ok(())
    } else {
        Err(mismatch(expected, found, term))
    }
}

fn as_sum(t: &Type, term: impl std::fmt::Display) -> Result<(&Type, &Type)> {
    match t {
        Type::Sum(a, b) => Ok((a, b)),
        _ => Err(Error::ty(format!("expected a sum type, found `{t}`"), term)),
    }
}

fn as_prod(t: &Type, term: impl std::fmt::Display) -> Result<(&Type, &Type)> {
    match t {
        Type::Prod(a, b) => Ok((a, b)),
        _ => Err(Error::ty(format!("expected a pair type, found `{t}`"), term)),
    }
}

fn as_arrow(t: &Type, term: impl std::fmt::Display) -> Result<(&Type, &Type)> {
    match t {
        Type::Arrow(a, b) => Ok((a, b)),
        _ => Err(Error::ty(format!("expected a function type, found `{t}`"), term)),
    }
}

fn unfold(t: &Type, term: impl std::fmt::Display) -> Result<Type> {
    t.unfold().ok_or_else(|| Error::ty(format!("expected a recursive type, found `{t}`"), term))
}

/// Infer the type of `e`, returning the elaborated expression.
pub fn infer(g: &TypeEnv, e: &Expr) -> Result<(Expr, Type)> {
    Ok(match e {
        Expr::Var(x) => (e.clone(), g.lookup(x)?.clone()),
        Expr::Const(Const::Int(_)) => (e.clone(), Type::Int),
        Expr::Const(Const::Unit) => (e.clone(), Type::Unit),
        Expr::Prim(op, args) => {
            if args.len() != op.arity() {
                return Err(Error::ty(format!("`{op}` expects {} arguments", op.arity()), e));
            }
            let args = args.iter().zip(op.arg_types()).map(|(a, t)| check(g, a, &t)).collect::<Result<_>>()?;
            (Expr::Prim(*op, args), op.result_type())
        }
        Expr::Let(x, e1, e2) => {
            let (e1, t1) = infer(g, e1)?;
            let (e2, t2) = infer(&g.extended(&[(x, t1)]), e2)?;
            (Expr::Let(x.clone(), Box::new(e1), Box::new(e2)), t2)
        }
        Expr::Pair(a, b) => {
            let (a, ta) = infer(g, a)?;
            let (b, tb) = infer(g, b)?;
            (Expr::pair(a, b), Type::prod(ta, tb))
        }
        Expr::Fst(a) | Expr::Snd(a) => {
            let (a2, t) = infer(g, a)?;
            let (l, r) = as_prod(&t, e)?;
            if matches!(e, Expr::Fst(_)) {
                (Expr::fst(a2), l.clone())
            } else {
                (Expr::snd(a2), r.clone())
            }
        }
        Expr::Inl(Some(t), _) | Expr::Inr(Some(t), _) | Expr::Roll(Some(t), _) => {
            let t = t.clone();
            (check(g, e, &t)?, t)
        }
        Expr::Inl(None, _) | Expr::Inr(None, _) => {
            return Err(Error::ty("cannot infer the type of an unannotated injection; write inl{τ} e", e))
        }
        Expr::Roll(None, inner) => {
            // A cons cell determines its list type from the head.
            if let Expr::Inr(None, p) = &**inner {
                if let Expr::Pair(h, _) = &**p {
                    let (_, th) = infer(g, h)?;
                    let t = Type::list(th);
                    return Ok((check(g, e, &t)?, t));
                }
            }
            return Err(Error::ty("cannot infer the type of roll; annotate it, e.g. ([] : int list)", e));
        }
        Expr::Unroll(a) => {
            let (a, t) = infer(g, a)?;
            let u = unfold(&t, e)?;
            (Expr::Unroll(Box::new(a)), u)
        }
        Expr::Case(s, m) => {
            let (s, ts) = infer(g, s)?;
            let (l, r) = as_sum(&ts, e)?;
            let g1 = g.extended(&[(&m.x1, l.clone())]);
            let g2 = g.extended(&[(&m.x2, r.clone())]);
            let (e1, e2, t) = match infer(&g1, &m.e1) {
                Ok((e1, t)) => (e1, check(&g2, &m.e2, &t)?, t),
                Err(first) => match infer(&g2, &m.e2) {
                    Ok((e2, t)) => (check(&g1, &m.e1, &t)?, e2, t),
                    Err(_) => return Err(first),
                },
            };
            (Expr::Case(Box::new(s), Arc::new(MatchPtr { e1, e2, ..(**m).clone() })), t)
        }
        Expr::Fun(k) => {
            let (k, t) = check_fun(g, k, None)?;
            (Expr::Fun(Arc::new(k)), t)
        }
        Expr::App(f, a) => {
            let (f, tf) = infer(g, f)?;
            let (dom, cod) = as_arrow(&tf, e)?;
            let a = check(g, a, dom)?;
            (Expr::app(f, a), cod.clone())
        }
        Expr::Label(a, l) => {
            let (a, t) = infer(g, a)?;
            (Expr::Label(Box::new(a), l.clone()), t)
        }
    })
}

/// Check `e` against `t`, returning the elaborated expression.
pub fn check(g: &TypeEnv, e: &Expr, t: &Type) -> Result<Expr> {
    match e {
        Expr::Inl(ann, a) | Expr::Inr(ann, a) => {
            if let Some(ann) = ann {
                same(t, ann, e)?;
            }
            let (l, r) = as_sum(t, e)?;
            let left = matches!(e, Expr::Inl(..));
            let a = check(g, a, if left { l } else { r })?;
            Ok(if left { Expr::Inl(Some(t.clone()), Box::new(a)) } else { Expr::Inr(Some(t.clone()), Box::new(a)) })
        }
        Expr::Roll(ann, a) => {
            if let Some(ann) = ann {
                same(t, ann, e)?;
            }
            let u = unfold(t, e)?;
            Ok(Expr::Roll(Some(t.clone()), Box::new(check(g, a, &u)?)))
        }
        Expr::Pair(a, b) => {
            let (ta, tb) = as_prod(t, e)?;
            Ok(Expr::pair(check(g, a, ta)?, check(g, b, tb)?))
        }
        Expr::Let(x, e1, e2) => {
            let (e1, t1) = infer(g, e1)?;
            let e2 = check(&g.extended(&[(x, t1)]), e2, t)?;
            Ok(Expr::Let(x.clone(), Box::new(e1), Box::new(e2)))
        }
        Expr::Case(s, m) => {
            let (s, ts) = infer(g, s)?;
            let (l, r) = as_sum(&ts, e)?;
            let e1 = check(&g.extended(&[(&m.x1, l.clone())]), &m.e1, t)?;
            let e2 = check(&g.extended(&[(&m.x2, r.clone())]), &m.e2, t)?;
            Ok(Expr::Case(Box::new(s), Arc::new(MatchPtr { e1, e2, ..(**m).clone() })))
        }
        Expr::Fun(k) => {
            let (k, tk) = check_fun(g, k, Some(t))?;
            same(t, &tk, e)?;
            Ok(Expr::Fun(Arc::new(k)))
        }
        Expr::Label(a, l) => Ok(Expr::Label(Box::new(check(g, a, t)?), l.clone())),
        _ => {
            let (e2, found) = infer(g, e)?;
            same(t, &found, e)?;
            Ok(e2)
        }
    }
}

/// Missing binder annotations are taken from `expected` when available.
fn check_fun(g: &TypeEnv, k: &FunDef, expected: Option<&Type>) -> Result<(FunDef, Type)> {
    let term = Expr::Fun(Arc::new(k.clone()));
    let exp = match expected {
        Some(t) => Some(as_arrow(t, &term)?),
        None => None,
    };
    let param_ty = match (&k.param_ty, exp) {
        (Some(t), _) => t.clone(),
        (None, Some((d, _))) => d.clone(),
        (None, None) => return Err(Error::ty(format!("parameter `{}` needs a type annotation", k.param), &term)),
    };
    let mut ctx = Vec::new();
    for x in k.free_vars() {
        ctx.push((x.clone(), g.lookup(x)?.clone()));
    }
    let inner = TypeEnv::from_pairs(ctx.clone());
    let (body, ret_ty) = match (&k.ret_ty, exp) {
        (Some(r), _) | (None, Some((_, r))) => {
            let gb = inner.extended(&[(&k.name, Type::arrow(param_ty.clone(), r.clone())), (&k.param, param_ty.clone())]);
            (check(&gb, &k.body, r)?, r.clone())
        }
        (None, None) => {
            if crate::syntax::free_vars(&k.body).contains(&k.name) {
                return Err(Error::ty(format!("recursive function `{}` needs a return type annotation", k.name), &term));
            }
            infer(&inner.extended(&[(&k.param, param_ty.clone())]), &k.body)?
        }
    };
    let t = Type::arrow(param_ty.clone(), ret_ty.clone());
    let out = FunDef::new(k.name.clone(), k.param.clone(), Some(param_ty), Some(ret_ty), body).with_ctx(Some(ctx));
    Ok((out, t))
}

/// Type of an expression.
pub fn check_expr(g: &TypeEnv, e: &Expr) -> Result<Type> {
    infer(g, e).map(|(_, t)| t)
}

/// Elaborated form of an expression together with its type.
pub fn elaborate(g: &TypeEnv, e: &Expr) -> Result<(Expr, Type)> {
    infer(g, e)
}

/// Infer the type of a value. Injections of `()` default to `bool`;
/// other injections need a type and are rejected here.
pub fn check_value(v: &Value) -> Result<Type> {
    Ok(match v {
        Value::Const(Const::Int(_)) => Type::Int,
        Value::Const(Const::Unit) => Type::Unit,
        Value::Pair(a, b) => Type::prod(check_value(a)?, check_value(b)?),
        Value::Inl(_) | Value::Inr(_) if v.as_bool().is_some() => Type::bool(),
        Value::Inl(_) | Value::Inr(_) => return Err(Error::ty("cannot infer the sum type of an injection", v)),
        Value::Roll(inner) => {
            if let Value::Inr(p) = &**inner {
                if let Value::Pair(h, _) = &**p {
                    let t = Type::list(check_value(h)?);
                    check_value_against(v, &t)?;
                    return Ok(t);
                }
            }
            return Err(Error::ty("cannot infer the type of a roll value", v));
        }
        Value::Closure(k, env) => {
            let g = check_env(env)?;
            check_fun(&g, k, None)?.1
        }
    })
}

pub fn check_value_against(v: &Value, t: &Type) -> Result<()> {
    match (v, t) {
        (Value::Const(Const::Int(_)), Type::Int) | (Value::Const(Const::Unit), Type::Unit) => Ok(()),
        (Value::Pair(a, b), Type::Prod(ta, tb)) => {
            check_value_against(a, ta)?;
            check_value_against(b, tb)
        }
        (Value::Inl(a), Type::Sum(ta, _)) => check_value_against(a, ta),
        (Value::Inr(b), Type::Sum(_, tb)) => check_value_against(b, tb),
        (Value::Roll(a), Type::Mu(..)) => check_value_against(a, &t.unfold().unwrap()),
        (Value::Closure(k, env), Type::Arrow(..)) => {
            let g = check_env(env)?;
            let (_, tk) = check_fun(&g, k, Some(t))?;
            same(t, &tk, v)
        }
        _ => Err(Error::ty(format!("value does not have type `{t}`"), v)),
    }
}

pub fn check_env(env: &Env) -> Result<TypeEnv> {
    env.iter().map(|(x, v)| Ok((x.clone(), check_value(v)?))).collect::<Result<Vec<_>>>().map(TypeEnv::from_pairs)
}

/// `⊢ γ : Γ` for every variable of `Γ`.
pub fn check_env_against(env: &Env, g: &TypeEnv) -> Result<()> {
    for (x, t) in g.iter() {
        check_value_against(env.lookup(x)?, t)?;
    }
    Ok(())
}

/// Type of a (complete) trace.
pub fn check_trace(g: &TypeEnv, t: &Trace) -> Result<Type> {
    Ok(match t {
        Trace::Hole => return Err(Error::ty("holes have no type", t)),
        Trace::Var(x) => g.lookup(x)?.clone(),
        Trace::Const(Const::Int(_)) => Type::Int,
        Trace::Const(Const::Unit) => Type::Unit,
        Trace::Prim(op, args) => {
            if args.len() != op.arity() {
                return Err(Error::ty(format!("`{op}` expects {} arguments", op.arity()), t));
            }
            for (a, ty) in args.iter().zip(op.arg_types()) {
                same(&ty, &check_trace(g, a)?, t)?;
            }
            op.result_type()
        }
        Trace::Let(a, x, b) => {
            let ta = check_trace(g, a)?;
            check_trace(&g.extended(&[(x, ta)]), b)?
        }
        Trace::Pair(a, b) => Type::prod(check_trace(g, a)?, check_trace(g, b)?),
        Trace::Fst(a) => as_prod(&check_trace(g, a)?, t)?.0.clone(),
        Trace::Snd(a) => as_prod(&check_trace(g, a)?, t)?.1.clone(),
        Trace::Inl(ann, a) | Trace::Inr(ann, a) => {
            let Some(ann) = ann else { return Err(Error::ty("injection trace lacks its sum type", t)) };
            let (l, r) = as_sum(ann, t)?;
            let ta = check_trace(g, a)?;
            same(if matches!(t, Trace::Inl(..)) { l } else { r }, &ta, t)?;
            ann.clone()
        }
        Trace::Roll(ann, a) => {
            let Some(ann) = ann else { return Err(Error::ty("roll trace lacks its recursive type", t)) };
            same(&unfold(ann, t)?, &check_trace(g, a)?, t)?;
            ann.clone()
        }
        Trace::Unroll(a) => unfold(&check_trace(g, a)?, t)?,
        Trace::CaseL(m, s, b) | Trace::CaseR(m, s, b) => {
            let ts = check_trace(g, s)?;
            let (l, r) = as_sum(&ts, t)?;
            let g1 = g.extended(&[(&m.x1, l.clone())]);
            let g2 = g.extended(&[(&m.x2, r.clone())]);
            if matches!(t, Trace::CaseL(..)) {
                let tb = check_trace(&g1, b)?;
                check(&g2, &m.e2, &tb)?;
                tb
            } else {
                let tb = check_trace(&g2, b)?;
                check(&g1, &m.e1, &tb)?;
                tb
            }
        }
        Trace::Fun(k) => check_fun(g, k, None)?.1,
        Trace::App(k, f, a, body) => {
            let tf = check_trace(g, f)?;
            let (dom, cod) = as_arrow(&tf, t)?;
            same(dom, &check_trace(g, a)?, t)?;
            match (&k.param_ty, &k.ret_ty) {
                (Some(p), Some(r)) => {
                    same(dom, p, t)?;
                    same(cod, r, t)?;
                }
                _ => return Err(Error::ty("code pointer lacks type annotations", t)),
            }
            let Some(ctx) = &k.ctx else { return Err(Error::ty("code pointer lacks its typing context", t)) };
            let inner = TypeEnv::from_pairs(ctx.clone()).extended(&[(&k.name, tf.clone()), (&k.param, dom.clone())]);
            let tb = check_trace(&inner, body)?;
            same(cod, &tb, t)?;
            cod.clone()
        }
    })
}
