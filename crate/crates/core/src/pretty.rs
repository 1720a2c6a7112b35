//! Printers. Types, expressions, values and patterns print in the concrete
//! syntax accepted by the parser; traces print in a read-only form.

use std::fmt::{self, Display, Formatter, Write};

use crate::patterns::{Pattern, PatternEnv};
use crate::syntax::{Const, Env, Expr, FunDef, Prim, Trace, Type, Value};

impl Display for Const {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Const::Int(n) => write!(f, "{n}"),
            Const::Unit => f.write_str("()"),
        }
    }
}

impl Display for Prim {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

// ---- types ----

fn type_prec(t: &Type) -> u8 {
    match t {
        Type::Arrow(..) | Type::Mu(..) if t.list_elem().is_none() => 0,
        Type::Sum(..) if !t.is_bool() => 1,
        Type::Prod(..) => 2,
        Type::Mu(..) => 3,
        _ => 4,
    }
}

fn write_type(f: &mut Formatter<'_>, t: &Type, prec: u8) -> fmt::Result {
    if type_prec(t) < prec {
        f.write_char('(')?;
        write_type(f, t, 0)?;
        return f.write_char(')');
    }
    if let Some(elem) = t.list_elem() {
        write_type(f, elem, 3)?;
        return f.write_str(" list");
    }
    match t {
        Type::Int => f.write_str("int"),
        Type::Unit => f.write_str("unit"),
        _ if t.is_bool() => f.write_str("bool"),
        Type::Var(a) => f.write_str(a),
        Type::Arrow(a, b) => {
            write_type(f, a, 1)?;
            f.write_str(" -> ")?;
            write_type(f, b, 0)
        }
        Type::Sum(a, b) => {
            write_type(f, a, 2)?;
            f.write_str(" + ")?;
            write_type(f, b, 1)
        }
        Type::Prod(a, b) => {
            write_type(f, a, 3)?;
            f.write_str(" * ")?;
            write_type(f, b, 2)
        }
        Type::Mu(a, body) => {
            write!(f, "mu {a}. ")?;
            write_type(f, body, 0)
        }
    }
}

impl Display for Type {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_type(f, self, 0)
    }
}

// ---- expressions ----

const OPEN: u8 = 0;
const APP: u8 = 7;
const POSTFIX: u8 = 8;
const ATOM: u8 = 9;

fn binop_level(op: Prim) -> u8 {
    match op {
        Prim::Or => 1,
        Prim::And => 2,
        Prim::Eq | Prim::Lt => 3,
        Prim::Add | Prim::Sub => 5,
        Prim::Mul => 6,
        Prim::Not => APP,
    }
}

/// Elements of a desugared list literal `[e1, ..., en]`.
fn list_literal(e: &Expr) -> Option<Vec<&Expr>> {
    let mut out = Vec::new();
    let mut cur = e;
    loop {
        let Expr::Roll(None, inner) = cur else { return None };
        match &**inner {
            Expr::Inl(None, u) if **u == Expr::unit() => return Some(out),
            Expr::Inr(None, p) => match &**p {
                Expr::Pair(h, t) => {
                    out.push(&**h);
                    cur = t;
                }
                _ => return None,
            },
            _ => return None,
        }
    }
}

fn cons_parts(e: &Expr) -> Option<(&Expr, &Expr)> {
    if let Expr::Roll(None, inner) = e {
        if let Expr::Inr(None, p) = &**inner {
            if let Expr::Pair(h, t) = &**p {
                return Some((h, t));
            }
        }
    }
    None
}

fn is_bool_lit(e: &Expr) -> Option<bool> {
    match e {
        Expr::Inl(Some(t), u) if t.is_bool() && **u == Expr::unit() => Some(true),
        Expr::Inr(Some(t), u) if t.is_bool() && **u == Expr::unit() => Some(false),
        _ => None,
    }
}

/// `([] : τ)` for an annotated empty list.
fn annotated_nil(e: &Expr) -> Option<&Type> {
    if let Expr::Roll(Some(t), inner) = e {
        if let Expr::Inl(Some(u), x) = &**inner {
            if **x == Expr::unit() && t.unfold().as_ref() == Some(u) {
                return Some(t);
            }
        }
    }
    None
}

fn expr_prec(e: &Expr) -> u8 {
    if list_literal(e).is_some() || is_bool_lit(e).is_some() || annotated_nil(e).is_some() {
        return ATOM;
    }
    if cons_parts(e).is_some() {
        return 4;
    }
    match e {
        Expr::Let(..) | Expr::Fun(_) | Expr::Case(..) => OPEN,
        Expr::Prim(op, args) if args.len() == 2 => binop_level(*op),
        Expr::Prim(..) | Expr::Fst(_) | Expr::Snd(_) | Expr::Inl(..) | Expr::Inr(..) | Expr::Roll(..) | Expr::Unroll(_) => APP,
        Expr::App(..) => APP,
        Expr::Label(..) => POSTFIX,
        Expr::Var(_) | Expr::Const(_) | Expr::Pair(..) => ATOM,
    }
}

fn tuple_items(e: &Expr) -> Vec<&Expr> {
    let mut out = Vec::new();
    let mut cur = e;
    while let Expr::Pair(a, b) = cur {
        out.push(&**a);
        cur = b;
    }
    out.push(cur);
    out
}

fn write_fun_header(f: &mut Formatter<'_>, k: &FunDef) -> fmt::Result {
    write!(f, "fun {}(", k.name)?;
    f.write_str(&k.param)?;
    if let Some(t) = &k.param_ty {
        write!(f, ":{t}")?;
    }
    f.write_char(')')?;
    if let Some(t) = &k.ret_ty {
        write!(f, ":{t}")?;
    }
    Ok(())
}

fn write_annot(f: &mut Formatter<'_>, t: &Option<Type>) -> fmt::Result {
    match t {
        Some(t) => write!(f, "{{{t}}}"),
        None => Ok(()),
    }
}

fn write_expr(f: &mut Formatter<'_>, e: &Expr, prec: u8) -> fmt::Result {
    if expr_prec(e) < prec {
        f.write_char('(')?;
        write_expr(f, e, OPEN)?;
        return f.write_char(')');
    }
    if let Some(items) = list_literal(e) {
        f.write_char('[')?;
        for (i, x) in items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write_expr(f, x, OPEN)?;
        }
        return f.write_char(']');
    }
    if let Some(b) = is_bool_lit(e) {
        return f.write_str(if b { "true" } else { "false" });
    }
    if let Some(t) = annotated_nil(e) {
        return write!(f, "([] : {t})");
    }
    if let Some((h, t)) = cons_parts(e) {
        write_expr(f, h, 5)?;
        f.write_str(" :: ")?;
        return write_expr(f, t, 4);
    }
    match e {
        Expr::Var(x) => f.write_str(x),
        Expr::Const(Const::Int(n)) if *n < 0 => write!(f, "(-{})", n.unsigned_abs()),
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Prim(Prim::Not, args) if args.len() == 1 => {
            f.write_str("not ")?;
            write_expr(f, &args[0], POSTFIX)
        }
        Expr::Prim(op, args) if args.len() == 2 => {
            let l = binop_level(*op);
            let (lp, rp) = if matches!(op, Prim::Eq | Prim::Lt) { (l + 1, l + 1) } else { (l, l + 1) };
            write_expr(f, &args[0], lp)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, &args[1], rp)
        }
        Expr::Prim(op, args) => {
            write!(f, "{}(", op.symbol())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_expr(f, a, OPEN)?;
            }
            f.write_char(')')
        }
        Expr::Let(x, a, b) => {
            write!(f, "let {x} = ")?;
            write_expr(f, a, OPEN)?;
            f.write_str(" in ")?;
            write_expr(f, b, OPEN)
        }
        Expr::Pair(..) => {
            f.write_char('(')?;
            for (i, x) in tuple_items(e).into_iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_expr(f, x, OPEN)?;
            }
            f.write_char(')')
        }
        Expr::Fst(a) => {
            f.write_str("fst ")?;
            write_expr(f, a, POSTFIX)
        }
        Expr::Snd(a) => {
            f.write_str("snd ")?;
            write_expr(f, a, POSTFIX)
        }
        Expr::Inl(t, a) => {
            f.write_str("inl")?;
            write_annot(f, t)?;
            f.write_char(' ')?;
            write_expr(f, a, POSTFIX)
        }
        Expr::Inr(t, a) => {
            f.write_str("inr")?;
            write_annot(f, t)?;
            f.write_char(' ')?;
            write_expr(f, a, POSTFIX)
        }
        Expr::Roll(t, a) => {
            f.write_str("roll")?;
            write_annot(f, t)?;
            f.write_char(' ')?;
            write_expr(f, a, POSTFIX)
        }
        Expr::Unroll(a) => {
            f.write_str("unroll ")?;
            write_expr(f, a, POSTFIX)
        }
        Expr::Case(s, m) if m.from_if => {
            f.write_str("if ")?;
            write_expr(f, s, OPEN)?;
            f.write_str(" then ")?;
            write_expr(f, &m.e1, OPEN)?;
            f.write_str(" else ")?;
            write_expr(f, &m.e2, OPEN)
        }
        Expr::Case(s, m) => {
            f.write_str("case ")?;
            write_expr(f, s, OPEN)?;
            write!(f, " of {{inl({}). ", m.x1)?;
            write_expr(f, &m.e1, OPEN)?;
            write!(f, "; inr({}). ", m.x2)?;
            write_expr(f, &m.e2, OPEN)?;
            f.write_char('}')
        }
        Expr::Fun(k) => {
            write_fun_header(f, k)?;
            f.write_str(". ")?;
            write_expr(f, &k.body, OPEN)
        }
        Expr::App(a, b) => {
            write_expr(f, a, APP)?;
            f.write_char(' ')?;
            write_expr(f, b, POSTFIX)
        }
        Expr::Label(a, l) => {
            write_expr(f, a, ATOM)?;
            write!(f, "@{l}")
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(f, self, OPEN)
    }
}

impl Display for FunDef {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_fun_header(f, self)?;
        f.write_str(". ")?;
        write_expr(f, &self.body, OPEN)
    }
}

// ---- values and patterns ----

/// Shared shape of values and patterns for printing.
pub(crate) enum Node<'a, T> {
    Leaf(String),
    Pair(&'a T, &'a T),
    Inl(&'a T),
    Inr(&'a T),
    Roll(&'a T),
    Closure(&'a FunDef, String),
}

pub(crate) trait Tree: Sized {
    fn node(&self) -> Node<'_, Self>;

    fn is_unit(&self) -> bool {
        matches!(self.node(), Node::Leaf(s) if s == "()")
    }
}

impl Tree for Value {
    fn node(&self) -> Node<'_, Value> {
        match self {
            Value::Const(c) => Node::Leaf(c.to_string()),
            Value::Pair(a, b) => Node::Pair(a, b),
            Value::Inl(v) => Node::Inl(v),
            Value::Inr(v) => Node::Inr(v),
            Value::Roll(v) => Node::Roll(v),
            Value::Closure(k, env) => Node::Closure(k, env.to_string()),
        }
    }
}

impl Tree for Pattern {
    fn node(&self) -> Node<'_, Pattern> {
        match self {
            Pattern::Hole => Node::Leaf("_".into()),
            Pattern::Diamond => Node::Leaf("=".into()),
            Pattern::Const(c) => Node::Leaf(c.to_string()),
            Pattern::Pair(a, b) => Node::Pair(a, b),
            Pattern::Inl(v) => Node::Inl(v),
            Pattern::Inr(v) => Node::Inr(v),
            Pattern::Roll(v) => Node::Roll(v),
            Pattern::Closure(k, env) => Node::Closure(k, env.to_string()),
        }
    }
}

/// Splits a cons chain into its elements and the final tail.
pub(crate) fn cons_chain<T: Tree>(t: &T) -> Option<(Vec<&T>, &T)> {
    let mut items = Vec::new();
    let mut cur = t;
    while let Node::Roll(inner) = cur.node() {
        let Node::Inr(p) = inner.node() else { break };
        let Node::Pair(h, tl) = p.node() else { break };
        items.push(h);
        cur = tl;
    }
    if items.is_empty() {
        None
    } else {
        Some((items, cur))
    }
}

pub(crate) fn is_nil<T: Tree>(t: &T) -> bool {
    match t.node() {
        Node::Roll(inner) => matches!(inner.node(), Node::Inl(u) if u.is_unit()),
        _ => false,
    }
}

fn bool_of<T: Tree>(t: &T) -> Option<bool> {
    match t.node() {
        Node::Inl(u) if u.is_unit() => Some(true),
        Node::Inr(u) if u.is_unit() => Some(false),
        _ => None,
    }
}

/// Writes a value-like tree. `leaf` decorates each node (annotations);
/// `atomic` requests parentheses around non-atomic output.
pub(crate) fn write_tree<T: Tree>(
    out: &mut String,
    t: &T,
    atomic: bool,
    decorate: &dyn Fn(&T) -> Option<String>,
) {
    let deco = decorate(t);
    let needs_atomic = atomic || deco.is_some();
    let mut body = String::new();
    let simple = write_tree_body(&mut body, t, decorate);
    if !simple && needs_atomic {
        out.push('(');
        out.push_str(&body);
        out.push(')');
    } else {
        out.push_str(&body);
    }
    if let Some(d) = deco {
        out.push('@');
        out.push_str(&d);
    }
}

/// Returns whether the output is atomic.
fn write_tree_body<T: Tree>(out: &mut String, t: &T, decorate: &dyn Fn(&T) -> Option<String>) -> bool {
    if is_nil(t) {
        out.push_str("[]");
        return true;
    }
    if let Some(b) = bool_of(t) {
        out.push_str(if b { "true" } else { "false" });
        return true;
    }
    if let Some((items, tail)) = cons_chain(t) {
        let spine_plain = spine_undecorated(t, decorate);
        if spine_plain && is_nil(tail) && decorate(tail).is_none() {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_tree(out, *x, false, decorate);
            }
            out.push(']');
            return true;
        }
        if spine_plain {
            for x in items {
                write_tree(out, x, true, decorate);
                out.push_str("::");
            }
            write_tree(out, tail, true, decorate);
            return false;
        }
    }
    match t.node() {
        Node::Leaf(s) => {
            out.push_str(&s);
            !s.starts_with('-')
        }
        Node::Pair(..) => {
            out.push('(');
            let mut cur = t;
            let mut first = true;
            loop {
                if let Node::Pair(a, b) = cur.node() {
                    if first || decorate(cur).is_none() {
                        if !first {
                            out.push(',');
                        }
                        write_tree(out, a, false, decorate);
                        first = false;
                        cur = b;
                        continue;
                    }
                }
                out.push(',');
                write_tree(out, cur, false, decorate);
                break;
            }
            out.push(')');
            true
        }
        Node::Inl(v) => {
            out.push_str("inl ");
            write_tree(out, v, true, decorate);
            false
        }
        Node::Inr(v) => {
            out.push_str("inr ");
            write_tree(out, v, true, decorate);
            false
        }
        Node::Roll(v) => {
            out.push_str("roll ");
            write_tree(out, v, true, decorate);
            false
        }
        Node::Closure(k, env) => {
            let _ = write!(out, "<{k}, {env}>");
            true
        }
    }
}

/// A list spine prints as sugar only if none of its cells carry decorations.
fn spine_undecorated<T: Tree>(t: &T, decorate: &dyn Fn(&T) -> Option<String>) -> bool {
    let mut cur = t;
    loop {
        if decorate(cur).is_some() {
            return false;
        }
        let Node::Roll(inner) = cur.node() else { return true };
        if decorate(inner).is_some() {
            return false;
        }
        match inner.node() {
            Node::Inr(p) => {
                if decorate(p).is_some() {
                    return false;
                }
                let Node::Pair(_, tl) = p.node() else { return true };
                cur = tl;
            }
            _ => return true,
        }
    }
}

pub(crate) fn tree_string<T: Tree>(t: &T, decorate: &dyn Fn(&T) -> Option<String>) -> String {
    let mut s = String::new();
    write_tree(&mut s, t, false, decorate);
    s
}

impl Display for Value {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&tree_string(self, &|_| None))
    }
}

impl Display for Pattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&tree_string(self, &|_| None))
    }
}

impl Display for Env {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_char('[')?;
        for (i, (x, v)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} |-> {v}")?;
        }
        f.write_char(']')
    }
}

impl Display for PatternEnv {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_char('[')?;
        for (i, (x, p)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} |-> {p}")?;
        }
        f.write_char(']')
    }
}

// ---- traces ----

fn trace_atomic(t: &Trace) -> bool {
    matches!(t, Trace::Hole | Trace::Var(_) | Trace::Const(_) | Trace::Pair(..))
        || matches!(t, Trace::Fst(_) | Trace::Snd(_) | Trace::Inl(..) | Trace::Inr(..) | Trace::Roll(..) | Trace::Unroll(_))
}

fn write_trace_atomic(f: &mut Formatter<'_>, t: &Trace) -> fmt::Result {
    if trace_atomic(t) {
        write_trace(f, t)
    } else {
        f.write_char('(')?;
        write_trace(f, t)?;
        f.write_char(')')
    }
}

fn write_trace(f: &mut Formatter<'_>, t: &Trace) -> fmt::Result {
    match t {
        Trace::Hole => f.write_char('_'),
        Trace::Var(x) => f.write_str(x),
        Trace::Const(c) => write!(f, "{c}"),
        Trace::Prim(op, args) if args.len() == 2 => {
            write_trace_atomic(f, &args[0])?;
            write!(f, " {} ", op.symbol())?;
            write_trace_atomic(f, &args[1])
        }
        Trace::Prim(op, args) => {
            write!(f, "{}", op.symbol())?;
            for a in args {
                f.write_char(' ')?;
                write_trace_atomic(f, a)?;
            }
            Ok(())
        }
        Trace::Let(a, x, b) => {
            write!(f, "let {x} = ")?;
            write_trace(f, a)?;
            f.write_str(" in ")?;
            write_trace(f, b)
        }
        Trace::Pair(a, b) => {
            f.write_char('(')?;
            write_trace(f, a)?;
            f.write_str(", ")?;
            write_trace(f, b)?;
            f.write_char(')')
        }
        Trace::Fst(a) => wrap(f, "fst", a),
        Trace::Snd(a) => wrap(f, "snd", a),
        Trace::Inl(_, a) => wrap(f, "inl", a),
        Trace::Inr(_, a) => wrap(f, "inr", a),
        Trace::Roll(_, a) => wrap(f, "roll", a),
        Trace::Unroll(a) => wrap(f, "unroll", a),
        Trace::CaseL(m, s, b) | Trace::CaseR(m, s, b) => {
            let left = matches!(t, Trace::CaseL(..));
            write_trace_atomic(f, s)?;
            if m.from_if {
                f.write_str(if left { " |>_then (" } else { " |>_else (" })?;
            } else {
                let x = if left { &m.x1 } else { &m.x2 };
                write!(f, " |>_{} {x}.(", if left { "inl" } else { "inr" })?;
            }
            write_trace(f, b)?;
            f.write_char(')')
        }
        Trace::Fun(k) => write!(f, "fun {}({})", k.name, k.param),
        Trace::App(k, a, b, body) => {
            write_trace_atomic(f, a)?;
            f.write_char(' ')?;
            write_trace_atomic(f, b)?;
            write!(f, " |> {}({}).(", k.name, k.param)?;
            write_trace(f, body)?;
            f.write_char(')')
        }
    }
}

fn wrap(f: &mut Formatter<'_>, kw: &str, t: &Trace) -> fmt::Result {
    write!(f, "{kw}(")?;
    write_trace(f, t)?;
    f.write_char(')')
}

impl Display for Trace {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_trace(f, self)
    }
}

/// Human-readable trace text; holes print as `_`.
pub fn pretty_trace(t: &Trace) -> String {
    t.to_string()
}

/// Concrete syntax of an expression, re-parsable by `parse_expr`.
pub fn pretty_expr(e: &Expr) -> String {
    e.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_pattern, parse_type, parse_value};

    #[test]
    fn expr_round_trips() {
        for src in [
            "let x = (1, 2) in fst x",
            "fun f(x:int):int. if x = 0 then 1 else x * f (x - 1)",
            "case z of {inl(a). a; inr(b). w}",
            "[1, 2, 3]",
            "h :: t",
            "(a - b) - c",
            "a - (b - c)",
            "f (g x) (-3)",
            "not (x < 1) || y && z",
            "inl{int + bool} 3",
            "([] : int list)",
            "(1, 2, 3)",
            "((1, 2), 3)",
            "1@L :: []@L2",
            "unroll (roll{int list} (inl{unit + int * int list} ()))",
        ] {
            let e = parse_expr(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_expr(&printed).unwrap(), e, "{src} printed as {printed}");
        }
    }

    #[test]
    fn types_print() {
        for src in ["int list", "(int * int) list", "int -> int -> bool", "(int -> int) -> int", "int + bool * unit", "mu b. unit + b"] {
            let t = parse_type(src).unwrap();
            assert_eq!(t.to_string(), src);
        }
    }

    #[test]
    fn values_print_compactly() {
        assert_eq!(parse_value("[2, 2, 4]").unwrap().to_string(), "[2,2,4]");
        assert_eq!(parse_value("((5,6),(3,4))").unwrap().to_string(), "((5,6),3,4)");
        assert_eq!(parse_value("(1,(2,3))").unwrap().to_string(), "(1,2,3)");
        assert_eq!(parse_value("inl (inr 3)").unwrap().to_string(), "inl (inr 3)");
        assert_eq!(parse_value("true").unwrap().to_string(), "true");
        assert_eq!(parse_pattern("[2,_,_]").unwrap().to_string(), "[2,_,_]");
        assert_eq!(parse_pattern("_ :: 2 :: _").unwrap().to_string(), "_::2::_");
        assert_eq!(parse_pattern("(=, _)").unwrap().to_string(), "(=,_)");
    }

    #[test]
    fn value_round_trips() {
        for src in ["[2,2,4]", "(1,2,3)", "((1,2),3)", "inl (inr (-3))", "_::2::_", "roll (inr (1,_))", "[(1,2),(3,4)]"] {
            let p = parse_pattern(src).unwrap();
            assert_eq!(parse_pattern(&p.to_string()).unwrap(), p, "{src}");
        }
    }

    #[test]
    fn trace_holes_print_as_underscore() {
        let t = Trace::Pair(Box::new(Trace::Hole), Box::new(Trace::Var(crate::syntax::name("z"))));
        assert_eq!(pretty_trace(&t), "(_, z)");
    }
}
