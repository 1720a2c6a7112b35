//! Abstract syntax: types, expressions, values, environments and traces.

use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Type {
    Int,
    Unit,
    Prod(Box<Type>, Box<Type>),
    Sum(Box<Type>, Box<Type>),
    Arrow(Box<Type>, Box<Type>),
    Mu(Name, Box<Type>),
    Var(Name),
}

impl Type {
    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Type, b: Type) -> Type {
        Type::Sum(Box::new(a), Box::new(b))
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn bool() -> Type {
        Type::sum(Type::Unit, Type::Unit)
    }

    /// `τ list` is `μa. unit + (τ × a)`.
    pub fn list(elem: Type) -> Type {
        let a = name("a");
        Type::Mu(a.clone(), Box::new(Type::sum(Type::Unit, Type::prod(elem, Type::Var(a)))))
    }

    /// Element type if this is (alpha-equivalent to) a list type.
    pub fn list_elem(&self) -> Option<&Type> {
        if let Type::Mu(a, body) = self {
            if let Type::Sum(l, r) = &**body {
                if let (Type::Unit, Type::Prod(h, t)) = (&**l, &**r) {
                    if matches!(&**t, Type::Var(b) if b == a) && !h.mentions(a) {
                        return Some(h);
                    }
                }
            }
        }
        None
    }

    fn mentions(&self, a: &Name) -> bool {
        match self {
            Type::Int | Type::Unit => false,
            Type::Var(b) => a == b,
            Type::Prod(x, y) | Type::Sum(x, y) | Type::Arrow(x, y) => x.mentions(a) || y.mentions(a),
            Type::Mu(b, t) => b != a && t.mentions(a),
        }
    }

    pub fn is_bool(&self) -> bool {
        matches!(self, Type::Sum(l, r) if **l == Type::Unit && **r == Type::Unit)
    }

    /// Capture-free because the substituted type is always closed.
    pub fn subst(&self, a: &Name, with: &Type) -> Type {
        match self {
            Type::Int | Type::Unit => self.clone(),
            Type::Var(b) => {
                if a == b {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            Type::Prod(x, y) => Type::prod(x.subst(a, with), y.subst(a, with)),
            Type::Sum(x, y) => Type::sum(x.subst(a, with), y.subst(a, with)),
            Type::Arrow(x, y) => Type::arrow(x.subst(a, with), y.subst(a, with)),
            Type::Mu(b, t) => {
                if a == b {
                    self.clone()
                } else {
                    Type::Mu(b.clone(), Box::new(t.subst(a, with)))
                }
            }
        }
    }

    /// `μa.τ` unfolds to `τ[μa.τ/a]`.
    pub fn unfold(&self) -> Option<Type> {
        match self {
            Type::Mu(a, t) => Some(t.subst(a, self)),
            _ => None,
        }
    }

    /// Equality up to renaming of μ-bound variables.
    pub fn alpha_eq(&self, other: &Type) -> bool {
        fn go<'a>(x: &'a Type, y: &'a Type, bx: &mut Vec<&'a Name>, by: &mut Vec<&'a Name>) -> bool {
            match (x, y) {
                (Type::Int, Type::Int) | (Type::Unit, Type::Unit) => true,
                (Type::Prod(a, b), Type::Prod(c, d))
                | (Type::Sum(a, b), Type::Sum(c, d))
                | (Type::Arrow(a, b), Type::Arrow(c, d)) => go(a, c, bx, by) && go(b, d, bx, by),
                (Type::Mu(a, t), Type::Mu(b, u)) => {
                    bx.push(a);
                    by.push(b);
                    let r = go(t, u, bx, by);
                    bx.pop();
                    by.pop();
                    r
                }
                (Type::Var(a), Type::Var(b)) => {
                    let ia = bx.iter().rposition(|n| *n == a);
                    let ib = by.iter().rposition(|n| *n == b);
                    match (ia, ib) {
                        (Some(i), Some(j)) => i == j,
                        (None, None) => a == b,
                        _ => false,
                    }
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new(), &mut Vec::new())
    }

    /// Inhabited by at least two values.
    pub fn is_nonsingular(&self) -> bool {
        match self {
            Type::Unit => false,
            Type::Int | Type::Sum(..) | Type::Arrow(..) | Type::Mu(..) => true,
            Type::Prod(a, b) => a.is_nonsingular() || b.is_nonsingular(),
            Type::Var(_) => true,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Const {
    Int(i64),
    Unit,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Eq,
    Lt,
    And,
    Or,
    Not,
}

impl Prim {
    pub const ALL: [Prim; 8] = [Prim::Add, Prim::Sub, Prim::Mul, Prim::Eq, Prim::Lt, Prim::And, Prim::Or, Prim::Not];

    pub fn arity(self) -> usize {
        match self {
            Prim::Not => 1,
            _ => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Prim::Add => "+",
            Prim::Sub => "-",
            Prim::Mul => "*",
            Prim::Eq => "=",
            Prim::Lt => "<",
            Prim::And => "&&",
            Prim::Or => "||",
            Prim::Not => "not",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Prim> {
        Prim::ALL.into_iter().find(|p| p.symbol() == s)
    }

    pub fn arg_types(self) -> Vec<Type> {
        match self {
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Eq | Prim::Lt => vec![Type::Int, Type::Int],
            Prim::And | Prim::Or => vec![Type::bool(), Type::bool()],
            Prim::Not => vec![Type::bool()],
        }
    }

    pub fn result_type(self) -> Type {
        match self {
            Prim::Add | Prim::Sub | Prim::Mul => Type::Int,
            _ => Type::bool(),
        }
    }
}

/// Code pointer `fun f(x:τ1):τ2. e`; `ctx` holds the types of the free
/// variables and is only consulted by the trace type checker.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct FunDef {
    pub name: Name,
    pub param: Name,
    pub param_ty: Option<Type>,
    pub ret_ty: Option<Type>,
    pub body: Expr,
    pub ctx: Option<Vec<(Name, Type)>>,
    #[serde(skip)]
    fv: FvCache,
}

impl FunDef {
    pub fn new(name: Name, param: Name, param_ty: Option<Type>, ret_ty: Option<Type>, body: Expr) -> FunDef {
        FunDef { name, param, param_ty, ret_ty, body, ctx: None, fv: FvCache::default() }
    }

    pub fn with_ctx(&self, ctx: Option<Vec<(Name, Type)>>) -> FunDef {
        FunDef { ctx, ..self.clone() }
    }

    pub fn with_body(&self, body: Expr) -> FunDef {
        FunDef::new(self.name.clone(), self.param.clone(), self.param_ty.clone(), self.ret_ty.clone(), body)
            .with_ctx(self.ctx.clone())
    }

    /// Free variables of the whole function term, sorted.
    pub fn free_vars(&self) -> &[Name] {
        self.fv.0.get_or_init(|| {
            let mut s = free_vars(&self.body);
            s.remove(&self.name);
            s.remove(&self.param);
            s.into_iter().collect()
        })
    }

    pub fn is_typed(&self) -> bool {
        self.param_ty.is_some() && self.ret_ty.is_some()
    }
}

#[derive(Clone, Default, Debug)]
struct FvCache(OnceLock<Vec<Name>>);

impl PartialEq for FvCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for FvCache {}

impl Hash for FvCache {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

/// Match pointer `{inl(x1).e1; inr(x2).e2}`. `from_if` marks matches
/// produced by desugaring `if`, which only changes how traces print.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct MatchPtr {
    pub x1: Name,
    pub e1: Expr,
    pub x2: Name,
    pub e2: Expr,
    pub from_if: bool,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Expr {
    Var(Name),
    Const(Const),
    Prim(Prim, Vec<Expr>),
    Let(Name, Box<Expr>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    /// The optional annotation is the whole sum type.
    Inl(Option<Type>, Box<Expr>),
    Inr(Option<Type>, Box<Expr>),
    Case(Box<Expr>, Arc<MatchPtr>),
    Fun(Arc<FunDef>),
    App(Box<Expr>, Box<Expr>),
    /// The optional annotation is the μ-type.
    Roll(Option<Type>, Box<Expr>),
    Unroll(Box<Expr>),
    /// `e@L`: a labelled literal, lifted to an input variable before tracing.
    Label(Box<Expr>, Name),
}

impl Expr {
    pub fn var(x: &str) -> Expr {
        Expr::Var(name(x))
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Const::Int(n))
    }

    pub fn unit() -> Expr {
        Expr::Const(Const::Unit)
    }

    pub fn bool(b: bool) -> Expr {
        let ann = Some(Type::bool());
        if b {
            Expr::Inl(ann, Box::new(Expr::unit()))
        } else {
            Expr::Inr(ann, Box::new(Expr::unit()))
        }
    }

    pub fn prim(op: Prim, args: Vec<Expr>) -> Expr {
        Expr::Prim(op, args)
    }

    pub fn let_(x: &str, e1: Expr, e2: Expr) -> Expr {
        Expr::Let(name(x), Box::new(e1), Box::new(e2))
    }

    pub fn pair(a: Expr, b: Expr) -> Expr {
        Expr::Pair(Box::new(a), Box::new(b))
    }

    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Box::new(f), Box::new(a))
    }

    pub fn fst(e: Expr) -> Expr {
        Expr::Fst(Box::new(e))
    }

    pub fn snd(e: Expr) -> Expr {
        Expr::Snd(Box::new(e))
    }

    pub fn if_(c: Expr, t: Expr, f: Expr) -> Expr {
        Expr::Case(
            Box::new(c),
            Arc::new(MatchPtr { x1: name("_"), e1: t, x2: name("_"), e2: f, from_if: true }),
        )
    }

    pub fn contains_label(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Label(..)) {
                found = true;
            }
        });
        found
    }

    /// Preorder traversal, including function and match bodies.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Var(_) | Expr::Const(_) => {}
            Expr::Prim(_, es) => es.iter().for_each(|e| e.visit(f)),
            Expr::Let(_, a, b) | Expr::Pair(a, b) | Expr::App(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Fst(e)
            | Expr::Snd(e)
            | Expr::Inl(_, e)
            | Expr::Inr(_, e)
            | Expr::Roll(_, e)
            | Expr::Unroll(e)
            | Expr::Label(e, _) => e.visit(f),
            Expr::Case(e, m) => {
                e.visit(f);
                m.e1.visit(f);
                m.e2.visit(f);
            }
            Expr::Fun(k) => k.body.visit(f),
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

/// Free variables of an expression.
pub fn free_vars(e: &Expr) -> BTreeSet<Name> {
    fn go(e: &Expr, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match e {
            Expr::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Expr::Const(_) => {}
            Expr::Prim(_, es) => es.iter().for_each(|e| go(e, bound, out)),
            Expr::Let(x, a, b) => {
                go(a, bound, out);
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
            Expr::Pair(a, b) | Expr::App(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Expr::Fst(e)
            | Expr::Snd(e)
            | Expr::Inl(_, e)
            | Expr::Inr(_, e)
            | Expr::Roll(_, e)
            | Expr::Unroll(e)
            | Expr::Label(e, _) => go(e, bound, out),
            Expr::Case(e, m) => {
                go(e, bound, out);
                bound.push(m.x1.clone());
                go(&m.e1, bound, out);
                bound.pop();
                bound.push(m.x2.clone());
                go(&m.e2, bound, out);
                bound.pop();
            }
            Expr::Fun(k) => {
                bound.push(k.name.clone());
                bound.push(k.param.clone());
                go(&k.body, bound, out);
                bound.pop();
                bound.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(e, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Value {
    Const(Const),
    Pair(Box<Value>, Box<Value>),
    Inl(Box<Value>),
    Inr(Box<Value>),
    Roll(Box<Value>),
    Closure(Arc<FunDef>, Env),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Const(Const::Int(n))
    }

    pub fn unit() -> Value {
        Value::Const(Const::Unit)
    }

    pub fn bool(b: bool) -> Value {
        if b {
            Value::Inl(Box::new(Value::unit()))
        } else {
            Value::Inr(Box::new(Value::unit()))
        }
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn inl(v: Value) -> Value {
        Value::Inl(Box::new(v))
    }

    pub fn inr(v: Value) -> Value {
        Value::Inr(Box::new(v))
    }

    pub fn roll(v: Value) -> Value {
        Value::Roll(Box::new(v))
    }

    pub fn nil() -> Value {
        Value::roll(Value::inl(Value::unit()))
    }

    pub fn cons(h: Value, t: Value) -> Value {
        Value::roll(Value::inr(Value::pair(h, t)))
    }

    pub fn list(items: Vec<Value>) -> Value {
        items.into_iter().rev().fold(Value::nil(), |t, h| Value::cons(h, t))
    }

    /// Elements if this value is a proper list.
    pub fn as_list(&self) -> Option<Vec<&Value>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            let Value::Roll(inner) = cur else { return None };
            match &**inner {
                Value::Inl(u) if **u == Value::unit() => return Some(out),
                Value::Inr(p) => match &**p {
                    Value::Pair(h, t) => {
                        out.push(&**h);
                        cur = t;
                    }
                    _ => return None,
                },
                _ => return None,
            }
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Const(Const::Int(n)) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Inl(u) if **u == Value::unit() => Some(true),
            Value::Inr(u) if **u == Value::unit() => Some(false),
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Value::Const(_) => 1,
            Value::Pair(a, b) => 1 + a.size() + b.size(),
            Value::Inl(v) | Value::Inr(v) | Value::Roll(v) => 1 + v.size(),
            Value::Closure(_, env) => 1 + env.iter().map(|(_, v)| v.size()).sum::<usize>(),
        }
    }

    /// Short description of the outermost constructor, for error messages.
    pub fn describe(&self) -> &'static str {
        match self {
            Value::Const(Const::Int(_)) => "an integer",
            Value::Const(Const::Unit) => "unit",
            Value::Pair(..) => "a pair",
            Value::Inl(_) => "an inl value",
            Value::Inr(_) => "an inr value",
            Value::Roll(_) => "a roll value",
            Value::Closure(..) => "a closure",
        }
    }
}

/// Ordered variable bindings; lookup finds the innermost (last) binding.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
pub struct Env(Vec<(Name, Value)>);

impl Env {
    pub fn new() -> Env {
        Env(Vec::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Name, Value)>) -> Env {
        Env(pairs.into_iter().collect())
    }

    pub fn get(&self, x: &str) -> Option<&Value> {
        self.0.iter().rev().find(|(y, _)| &**y == x).map(|(_, v)| v)
    }

    pub fn lookup(&self, x: &str) -> Result<&Value> {
        self.get(x).ok_or_else(|| Error::Unbound(name(x)))
    }

    pub fn push(&mut self, x: Name, v: Value) {
        self.0.push((x, v));
    }

    pub fn pop(&mut self) {
        self.0.pop();
    }

    pub fn with(mut self, x: &str, v: Value) -> Env {
        self.push(name(x), v);
        self
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Name, Value)> {
        self.0.iter()
    }

    pub fn names(&self) -> Vec<Name> {
        self.0.iter().map(|(x, _)| x.clone()).collect()
    }

    /// Bindings visible for `names`, in the order given.
    pub fn restrict(&self, names: &[Name]) -> Result<Env> {
        names.iter().map(|x| Ok((x.clone(), self.lookup(x)?.clone()))).collect::<Result<Vec<_>>>().map(Env)
    }

    /// Replace the innermost binding of `x`, or append one.
    pub fn set(&mut self, x: &str, v: Value) {
        match self.0.iter_mut().rev().find(|(y, _)| &**y == x) {
            Some(slot) => slot.1 = v,
            None => self.0.push((name(x), v)),
        }
    }
}

/// Environment lookup; unbound names are an error.
pub fn env_lookup<'a>(env: &'a Env, x: &str) -> Result<&'a Value> {
    env.lookup(x)
}

/// Traces, with `Hole` for partial traces.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Trace {
    Hole,
    Var(Name),
    Const(Const),
    Prim(Prim, Vec<Trace>),
    Let(Box<Trace>, Name, Box<Trace>),
    Pair(Box<Trace>, Box<Trace>),
    Fst(Box<Trace>),
    Snd(Box<Trace>),
    Inl(Option<Type>, Box<Trace>),
    Inr(Option<Type>, Box<Trace>),
    /// Scrutinee trace, then the trace of the taken branch (binder from `m`).
    CaseL(Arc<MatchPtr>, Box<Trace>, Box<Trace>),
    CaseR(Arc<MatchPtr>, Box<Trace>, Box<Trace>),
    Fun(Arc<FunDef>),
    /// `app_κ(T1, T2, f, x, T)`; `f` and `x` are the binders of `κ`.
    App(Arc<FunDef>, Box<Trace>, Box<Trace>, Box<Trace>),
    Roll(Option<Type>, Box<Trace>),
    Unroll(Box<Trace>),
}

impl Trace {
    pub fn is_hole(&self) -> bool {
        matches!(self, Trace::Hole)
    }

    /// Children in left-to-right order.
    pub fn children(&self) -> Vec<&Trace> {
        match self {
            Trace::Hole | Trace::Var(_) | Trace::Const(_) | Trace::Fun(_) => vec![],
            Trace::Prim(_, ts) => ts.iter().collect(),
            Trace::Let(a, _, b) | Trace::Pair(a, b) | Trace::CaseL(_, a, b) | Trace::CaseR(_, a, b) => {
                vec![a, b]
            }
            Trace::Fst(t) | Trace::Snd(t) | Trace::Inl(_, t) | Trace::Inr(_, t) | Trace::Roll(_, t) | Trace::Unroll(t) => {
                vec![t]
            }
            Trace::App(_, a, b, c) => vec![a, b, c],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Trace::size).sum::<usize>()
    }

    pub fn count(&self, pred: &impl Fn(&Trace) -> bool) -> usize {
        usize::from(pred(self)) + self.children().into_iter().map(|c| c.count(pred)).sum::<usize>()
    }

    pub fn holes(&self) -> usize {
        self.count(&Trace::is_hole)
    }

    /// `S ⊑ T`: `T` is obtained from `S` by filling holes.
    pub fn leq(&self, other: &Trace) -> bool {
        use Trace::*;
        match (self, other) {
            (Hole, _) => true,
            (Var(x), Var(y)) => x == y,
            (Const(a), Const(b)) => a == b,
            (Fun(a), Fun(b)) => a == b,
            (Prim(o1, a), Prim(o2, b)) => o1 == o2 && a.len() == b.len() && a.iter().zip(b).all(|(s, t)| s.leq(t)),
            (Let(a1, x, b1), Let(a2, y, b2)) => x == y && a1.leq(a2) && b1.leq(b2),
            (Pair(a1, b1), Pair(a2, b2)) => a1.leq(a2) && b1.leq(b2),
            (Fst(a), Fst(b)) | (Snd(a), Snd(b)) | (Unroll(a), Unroll(b)) => a.leq(b),
            (Inl(s, a), Inl(t, b)) | (Inr(s, a), Inr(t, b)) | (Roll(s, a), Roll(t, b)) => s == t && a.leq(b),
            (CaseL(m1, a1, b1), CaseL(m2, a2, b2)) | (CaseR(m1, a1, b1), CaseR(m2, a2, b2)) => {
                m1 == m2 && a1.leq(a2) && b1.leq(b2)
            }
            (App(k1, a1, b1, c1), App(k2, a2, b2, c2)) => k1 == k2 && a1.leq(a2) && b1.leq(b2) && c1.leq(c2),
            _ => false,
        }
    }
}
