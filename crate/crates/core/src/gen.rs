//! Random well-typed, terminating programs for property testing.
//!
//! Programs are built type-directed over first-order types. Recursion
//! only appears through two templates: a countdown on a clamped integer
//! and a fold over a list, so every generated program terminates.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::syntax::{name, Env, Expr, FunDef, MatchPtr, Name, Prim, Type, Value};
use crate::typecheck::{elaborate, TypeEnv};

/// Largest integer literal or input.
pub const MAX_INT: i64 = 3;

/// A closed-over-inputs program: `inputs ⊢ expr : ty`, already elaborated.
#[derive(Clone, Debug)]
pub struct Program {
    pub inputs: Vec<(Name, Type)>,
    pub expr: Expr,
    pub ty: Type,
}

impl Program {
    pub fn type_env(&self) -> TypeEnv {
        TypeEnv::from_pairs(self.inputs.iter().cloned())
    }

    pub fn random_env(&self, rng: &mut impl Rng) -> Env {
        Env::from_pairs(self.inputs.iter().map(|(x, t)| (x.clone(), random_value(rng, t))))
    }
}

fn int_pair() -> Type {
    Type::prod(Type::Int, Type::Int)
}

fn int_sum() -> Type {
    Type::sum(Type::Int, Type::Int)
}

fn int_list() -> Type {
    Type::list(Type::Int)
}

/// The types inputs and intermediate results are drawn from.
pub fn base_types() -> Vec<Type> {
    vec![Type::Int, Type::Int, Type::bool(), int_pair(), int_sum(), int_list()]
}

/// A random value of a first-order type: integers in `0..=MAX_INT`,
/// lists of length at most 3.
pub fn random_value(rng: &mut impl Rng, ty: &Type) -> Value {
    random_value_at(rng, ty, 3)
}

fn random_value_at(rng: &mut impl Rng, ty: &Type, budget: usize) -> Value {
    if let Some(elem) = ty.list_elem() {
        let len = rng.gen_range(0..=budget);
        return Value::list((0..len).map(|_| random_value_at(rng, elem, budget)).collect());
    }
    match ty {
        Type::Int => Value::int(rng.gen_range(0..=MAX_INT)),
        Type::Unit => Value::unit(),
        Type::Prod(a, b) => Value::pair(random_value_at(rng, a, budget), random_value_at(rng, b, budget)),
        Type::Sum(a, b) => {
            if rng.gen_bool(0.5) {
                Value::inl(random_value_at(rng, a, budget))
            } else {
                Value::inr(random_value_at(rng, b, budget))
            }
        }
        Type::Mu(..) => Value::roll(random_value_at(rng, &ty.unfold().expect("mu unfolds"), budget.saturating_sub(1))),
        Type::Arrow(..) | Type::Var(_) => panic!("no random values of type {ty}"),
    }
}

fn nil(elem: &Type) -> Expr {
    let lt = Type::list(elem.clone());
    let body = lt.unfold().expect("list unfolds");
    Expr::Roll(Some(lt), Box::new(Expr::Inl(Some(body), Box::new(Expr::unit()))))
}

fn cons(elem: &Type, h: Expr, t: Expr) -> Expr {
    let lt = Type::list(elem.clone());
    let body = lt.unfold().expect("list unfolds");
    Expr::Roll(Some(lt), Box::new(Expr::Inr(Some(body), Box::new(Expr::pair(h, t)))))
}

fn case(scrut: Expr, x1: Name, e1: Expr, x2: Name, e2: Expr) -> Expr {
    Expr::Case(Box::new(scrut), Arc::new(MatchPtr { x1, e1, x2, e2, from_if: false }))
}

fn fun(f: Name, x: Name, from: Type, to: Type, body: Expr) -> Expr {
    Expr::Fun(Arc::new(FunDef::new(f, x, Some(from), Some(to), body)))
}

fn var(x: &Name) -> Expr {
    Expr::Var(x.clone())
}

type Ctx = Vec<(Name, Type)>;

fn extend(ctx: &Ctx, x: &Name, t: Type) -> Ctx {
    let mut c = ctx.clone();
    c.push((x.clone(), t));
    c
}

/// Generator state: the random source and a counter for fresh names.
pub struct Generator<'r, R: Rng> {
    rng: &'r mut R,
    fresh: usize,
}

impl<'r, R: Rng> Generator<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        Generator { rng, fresh: 0 }
    }

    fn fresh(&mut self, base: &str) -> Name {
        self.fresh += 1;
        name(&format!("{base}{}", self.fresh))
    }

    /// A program with one to three inputs and expression depth at most
    /// `depth`.
    pub fn program(&mut self, depth: usize) -> Result<Program> {
        let types = base_types();
        let n = self.rng.gen_range(1..=3);
        let inputs: Ctx = (0..n)
            .map(|i| (name(["a", "b", "c"][i]), types.choose(self.rng).unwrap().clone()))
            .collect();
        let ty = types.choose(self.rng).unwrap().clone();
        let raw = self.expr(&ty, &inputs, depth);
        let (expr, ty) = elaborate(&TypeEnv::from_pairs(inputs.iter().cloned()), &raw)?;
        Ok(Program { inputs, expr, ty })
    }

    fn literal(&mut self, ty: &Type) -> Expr {
        if let Some(elem) = ty.list_elem() {
            let len = self.rng.gen_range(0..=2);
            let mut e = nil(elem);
            for _ in 0..len {
                let h = self.literal(elem);
                e = cons(elem, h, e);
            }
            return e;
        }
        match ty {
            Type::Int => Expr::int(self.rng.gen_range(0..=MAX_INT)),
            Type::Unit => Expr::unit(),
            Type::Prod(a, b) => Expr::pair(self.literal(a), self.literal(b)),
            Type::Sum(a, b) => {
                if self.rng.gen_bool(0.5) {
                    Expr::Inl(Some(ty.clone()), Box::new(self.literal(a)))
                } else {
                    Expr::Inr(Some(ty.clone()), Box::new(self.literal(b)))
                }
            }
            _ => panic!("no literals of type {ty}"),
        }
    }

    fn leaf(&mut self, ty: &Type, ctx: &Ctx) -> Expr {
        let vars: Vec<&Name> = ctx.iter().filter(|(_, t)| t == ty).map(|(x, _)| x).collect();
        if !vars.is_empty() && self.rng.gen_bool(0.7) {
            var(vars.choose(self.rng).unwrap())
        } else {
            self.literal(ty)
        }
    }

    pub fn expr(&mut self, ty: &Type, ctx: &Ctx, depth: usize) -> Expr {
        if depth <= 1 || self.rng.gen_bool(0.15) {
            return self.leaf(ty, ctx);
        }
        let d = depth - 1;
        let callable: Vec<(Name, Type)> = ctx
            .iter()
            .filter_map(|(f, t)| match t {
                Type::Arrow(a, r) if **r == *ty => Some((f.clone(), (**a).clone())),
                _ => None,
            })
            .collect();
        // Type-specific introduction forms get extra weight.
        let mut rules: Vec<u8> = vec![0, 1, 2, 3, 4, 5, 6, 10, 10, 10];
        if !callable.is_empty() {
            rules.extend([7, 7]);
        }
        if depth >= 3 {
            rules.extend([8, 9]);
        }
        match *rules.choose(self.rng).unwrap() {
            0 => self.leaf(ty, ctx),
            1 => {
                let t = base_types().choose(self.rng).unwrap().clone();
                let x = self.fresh("x");
                let e1 = self.expr(&t, ctx, d);
                let e2 = self.expr(ty, &extend(ctx, &x, t), d);
                Expr::Let(x, Box::new(e1), Box::new(e2))
            }
            2 => Expr::if_(self.expr(&Type::bool(), ctx, d), self.expr(ty, ctx, d), self.expr(ty, ctx, d)),
            3 => {
                let (x1, x2) = (self.fresh("l"), self.fresh("r"));
                let s = self.expr(&int_sum(), ctx, d);
                let e1 = self.expr(ty, &extend(ctx, &x1, Type::Int), d);
                let e2 = self.expr(ty, &extend(ctx, &x2, Type::Int), d);
                case(s, x1, e1, x2, e2)
            }
            4 => {
                if self.rng.gen_bool(0.5) {
                    Expr::fst(self.expr(&Type::prod(ty.clone(), Type::Int), ctx, d))
                } else {
                    Expr::snd(self.expr(&Type::prod(Type::Int, ty.clone()), ctx, d))
                }
            }
            5 => {
                // Immediately applied lambda; its closure captures ctx.
                let t = base_types().choose(self.rng).unwrap().clone();
                let (f, x) = (self.fresh("f"), self.fresh("y"));
                let body = self.expr(ty, &extend(ctx, &x, t.clone()), d);
                Expr::app(fun(f, x, t.clone(), ty.clone(), body), self.expr(&t, ctx, d))
            }
            6 => {
                // A named function, then a body that may call it.
                let t = base_types().choose(self.rng).unwrap().clone();
                let r = base_types().choose(self.rng).unwrap().clone();
                let (g, x) = (self.fresh("g"), self.fresh("y"));
                let body = self.expr(&r, &extend(ctx, &x, t.clone()), d);
                let rest = self.expr(ty, &extend(ctx, &g, Type::arrow(t.clone(), r.clone())), d);
                Expr::Let(g.clone(), Box::new(fun(g, x, t, r, body)), Box::new(rest))
            }
            7 => {
                let (f, a) = callable.choose(self.rng).unwrap().clone();
                Expr::app(var(&f), self.expr(&a, ctx, d))
            }
            8 => self.countdown(ty, ctx, d),
            9 => self.fold(ty, ctx, d),
            _ => self.intro(ty, ctx, d),
        }
    }

    fn intro(&mut self, ty: &Type, ctx: &Ctx, d: usize) -> Expr {
        if let Some(elem) = ty.list_elem() {
            return if self.rng.gen_bool(0.25) {
                nil(elem)
            } else {
                let h = self.expr(elem, ctx, d);
                cons(elem, h, self.expr(ty, ctx, d))
            };
        }
        match ty {
            Type::Int => {
                let op = *[Prim::Add, Prim::Sub, Prim::Mul].choose(self.rng).unwrap();
                Expr::prim(op, vec![self.expr(&Type::Int, ctx, d), self.expr(&Type::Int, ctx, d)])
            }
            t if t.is_bool() => match self.rng.gen_range(0..4) {
                0 | 1 => {
                    let op = if self.rng.gen_bool(0.5) { Prim::Eq } else { Prim::Lt };
                    Expr::prim(op, vec![self.expr(&Type::Int, ctx, d), self.expr(&Type::Int, ctx, d)])
                }
                2 => {
                    let op = if self.rng.gen_bool(0.5) { Prim::And } else { Prim::Or };
                    Expr::prim(op, vec![self.expr(ty, ctx, d), self.expr(ty, ctx, d)])
                }
                _ => Expr::prim(Prim::Not, vec![self.expr(ty, ctx, d)]),
            },
            Type::Prod(a, b) => Expr::pair(self.expr(a, ctx, d), self.expr(b, ctx, d)),
            Type::Sum(a, b) => {
                if self.rng.gen_bool(0.5) {
                    Expr::Inl(Some(ty.clone()), Box::new(self.expr(a, ctx, d)))
                } else {
                    Expr::Inr(Some(ty.clone()), Box::new(self.expr(b, ctx, d)))
                }
            }
            _ => self.leaf(ty, ctx),
        }
    }

    /// `let r = fun r(n:int):τ. if n < 1 then base else (let y = r (n-1) in step)
    ///  in r (clamp arg)`, with the argument clamped to at most `MAX_INT`.
    fn countdown(&mut self, ty: &Type, ctx: &Ctx, d: usize) -> Expr {
        let (r, n, y, c) = (self.fresh("rec"), self.fresh("n"), self.fresh("acc"), self.fresh("k"));
        let inner = extend(ctx, &n, Type::Int);
        let base = self.expr(ty, &inner, d.saturating_sub(1));
        let step = self.expr(ty, &extend(&inner, &y, ty.clone()), d.saturating_sub(1));
        let call = Expr::app(var(&r), Expr::prim(Prim::Sub, vec![var(&n), Expr::int(1)]));
        let body = Expr::if_(
            Expr::prim(Prim::Lt, vec![var(&n), Expr::int(1)]),
            base,
            Expr::Let(y, Box::new(call), Box::new(step)),
        );
        let arg = self.expr(&Type::Int, ctx, d);
        let clamped = Expr::Let(
            c.clone(),
            Box::new(arg),
            Box::new(Expr::if_(Expr::prim(Prim::Lt, vec![var(&c), Expr::int(MAX_INT + 1)]), var(&c), Expr::int(MAX_INT))),
        );
        Expr::Let(
            r.clone(),
            Box::new(fun(r.clone(), n, Type::Int, ty.clone(), body)),
            Box::new(Expr::app(var(&r), clamped)),
        )
    }

    /// A right fold over an int list:
    /// `case unroll l of inl _ => base | inr p => let h = fst p in let acc = r (snd p) in step`.
    fn fold(&mut self, ty: &Type, ctx: &Ctx, d: usize) -> Expr {
        let (r, l, u, p, h, acc) =
            (self.fresh("fold"), self.fresh("xs"), self.fresh("u"), self.fresh("p"), self.fresh("h"), self.fresh("acc"));
        let base = self.expr(ty, ctx, d.saturating_sub(1));
        let step_ctx = extend(&extend(ctx, &h, Type::Int), &acc, ty.clone());
        let step = self.expr(ty, &step_ctx, d.saturating_sub(1));
        let cons_branch = Expr::Let(
            h,
            Box::new(Expr::fst(var(&p))),
            Box::new(Expr::Let(
                acc,
                Box::new(Expr::app(var(&r), Expr::snd(var(&p)))),
                Box::new(step),
            )),
        );
        let body = case(Expr::Unroll(Box::new(var(&l))), u, base, p, cons_branch);
        let arg = self.expr(&int_list(), ctx, d);
        Expr::app(fun(r, l, int_list(), ty.clone(), body), arg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval_with_fuel, Fuel};
    use crate::typecheck::check_value_against;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_programs_typecheck_and_terminate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let prog = Generator::new(&mut rng).program(6).unwrap();
            let env = prog.random_env(&mut rng);
            let (v, _) = eval_with_fuel(&env, &prog.expr, &mut Fuel::new(1_000_000)).unwrap();
            check_value_against(&v, &prog.ty).unwrap();
        }
    }

    #[test]
    fn random_values_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let v = random_value(&mut rng, &int_list());
            let items = v.as_list().unwrap();
            assert!(items.len() <= 3);
            assert!(items.iter().all(|x| (0..=MAX_INT).contains(&x.as_int().unwrap())));
        }
    }
}
