//! Recursive-descent parser for types, expressions, values, patterns and
//! pattern environments. The grammar is documented in `docs/grammar.ebnf`.

use std::sync::Arc;

use crate::error::{Error, Result, SourceSpan};
use crate::patterns::{Pattern, PatternEnv};
use crate::syntax::{name, Const, Expr, FunDef, MatchPtr, Name, Prim, Type, Value};

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Int(i64),
    Ident(String),
    Sym(&'static str),
    Eof,
}

const KEYWORDS: &[&str] = &[
    "let", "in", "fun", "if", "then", "else", "case", "of", "fst", "snd", "inl", "inr", "roll", "unroll",
    "not", "true", "false", "int", "unit", "bool", "list", "mu",
];

// Longest symbols first so that maximal munch works by linear scan.
const SYMBOLS: &[&str] = &[
    "|->", "::", "->", "=>", "&&", "||", ":=", "(", ")", "[", "]", "{", "}", ",", ";", ".", ":", "=", "+", "-",
    "*", "<", ">", "@", "|",
];

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < src.len() {
        let c = src[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if src[i..].starts_with("(*") {
            let Some(close) = src[i + 2..].find("*)") else {
                return Err(syntax_error(src, i, src.len(), "unterminated comment"));
            };
            i += close + 4;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < src.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i]
                .parse::<i64>()
                .map_err(|_| syntax_error(src, start, i, "integer literal out of range"))?;
            out.push(Token { tok: Tok::Int(n), start, end: i });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < src.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            let word = &src[start..i];
            let tok = if word == "_" { Tok::Sym("_") } else { Tok::Ident(word.to_string()) };
            out.push(Token { tok, start, end: i });
            continue;
        }
        let unicode = match c {
            '↦' => Some("|->"),
            '∧' => Some("&&"),
            '∨' => Some("||"),
            '¬' => Some("not"),
            '□' => Some("_"),
            '◇' => Some("="),
            '×' => Some("*"),
            '→' => Some("->"),
            _ => None,
        };
        if let Some(sym) = unicode {
            i += c.len_utf8();
            let tok = if sym == "not" { Tok::Ident("not".into()) } else { Tok::Sym(sym) };
            out.push(Token { tok, start, end: i });
            continue;
        }
        for sym in SYMBOLS {
            if src[i..].starts_with(sym) {
                i += sym.len();
                out.push(Token { tok: Tok::Sym(sym), start, end: i });
                continue 'outer;
            }
        }
        return Err(syntax_error(src, start, start + c.len_utf8(), &format!("unexpected character `{c}`")));
    }
    out.push(Token { tok: Tok::Eof, start: src.len(), end: src.len() });
    Ok(out)
}

fn syntax_error(src: &str, start: usize, end: usize, msg: &str) -> Error {
    let before = &src[..start.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Error::Syntax { span: SourceSpan { start, end, line, column }, msg: msg.to_string() }
}

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Binder patterns accepted by `let` and list `case` arms.
enum Binder {
    Name(Name),
    Tuple(Vec<Binder>),
}

pub struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    fresh: usize,
}

impl<'a> Parser<'a> {
    pub fn new(src: &'a str) -> Result<Parser<'a>> {
        Ok(Parser { src, toks: lex(src)?, pos: 0, fresh: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl AsRef<str>) -> Error {
        let t = &self.toks[self.pos];
        syntax_error(self.src, t.start, t.end, msg.as_ref())
    }

    fn found(&self) -> String {
        match self.peek() {
            Tok::Int(n) => format!("`{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", self.found())))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", self.found())))
        }
    }

    pub fn at_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {} after end of input", self.found())))
        }
    }

    /// Byte offset of the next token; used by callers that split input.
    pub fn offset(&self) -> usize {
        self.toks[self.pos].start
    }

    fn ident(&mut self) -> Result<Name> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(name(&s))
            }
            _ => Err(self.error(format!("expected identifier, found {}", self.found()))),
        }
    }

    fn binder_name(&mut self) -> Result<Name> {
        if self.eat_sym("_") {
            Ok(name("_"))
        } else {
            self.ident()
        }
    }

    fn fresh(&mut self, base: &str) -> Name {
        let n = name(&format!("_{base}{}", self.fresh));
        self.fresh += 1;
        n
    }

    // ---- types ----

    pub fn ty(&mut self) -> Result<Type> {
        if self.eat_kw("mu") {
            let a = self.ident()?;
            self.expect_sym(".")?;
            let body = self.ty()?;
            return Ok(Type::Mu(a, Box::new(body)));
        }
        let lhs = self.ty_sum()?;
        if self.eat_sym("->") {
            Ok(Type::arrow(lhs, self.ty()?))
        } else {
            Ok(lhs)
        }
    }

    fn ty_sum(&mut self) -> Result<Type> {
        let lhs = self.ty_prod()?;
        if self.eat_sym("+") {
            Ok(Type::sum(lhs, self.ty_sum()?))
        } else {
            Ok(lhs)
        }
    }

    fn ty_prod(&mut self) -> Result<Type> {
        let lhs = self.ty_postfix()?;
        if self.eat_sym("*") {
            Ok(Type::prod(lhs, self.ty_prod()?))
        } else {
            Ok(lhs)
        }
    }

    fn ty_postfix(&mut self) -> Result<Type> {
        let mut t = self.ty_atom()?;
        while self.eat_kw("list") {
            t = Type::list(t);
        }
        Ok(t)
    }

    fn ty_atom(&mut self) -> Result<Type> {
        if self.eat_kw("int") {
            return Ok(Type::Int);
        }
        if self.eat_kw("unit") {
            return Ok(Type::Unit);
        }
        if self.eat_kw("bool") {
            return Ok(Type::bool());
        }
        if self.eat_sym("(") {
            let t = self.ty()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        if self.is_kw("mu") {
            return self.ty();
        }
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Type::Var(name(&s)))
            }
            _ => Err(self.error(format!("expected a type, found {}", self.found()))),
        }
    }

    // ---- expressions ----

    pub fn expr(&mut self) -> Result<Expr> {
        if self.is_kw("let") {
            return self.let_expr();
        }
        if self.is_kw("fun") {
            return Ok(Expr::Fun(Arc::new(self.fun_def()?)));
        }
        if self.eat_kw("if") {
            let c = self.expr()?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            let f = self.expr()?;
            return Ok(Expr::if_(c, t, f));
        }
        if self.is_kw("case") {
            return self.case_expr();
        }
        self.binop(0)
    }

    fn let_expr(&mut self) -> Result<Expr> {
        self.expect_kw("let")?;
        let b = self.binder()?;
        self.expect_sym("=")?;
        let e1 = self.expr()?;
        self.expect_kw("in")?;
        let e2 = self.expr()?;
        Ok(self.bind(b, e1, e2))
    }

    fn binder(&mut self) -> Result<Binder> {
        if self.eat_sym("(") {
            let mut items = vec![self.binder()?];
            while self.eat_sym(",") {
                items.push(self.binder()?);
            }
            self.expect_sym(")")?;
            return Ok(if items.len() == 1 { items.pop().unwrap() } else { Binder::Tuple(items) });
        }
        Ok(Binder::Name(self.binder_name()?))
    }

    /// `let (a,b,c) = e1 in e2` becomes nested projections of a fresh name.
    fn bind(&mut self, b: Binder, e1: Expr, e2: Expr) -> Expr {
        match b {
            Binder::Name(x) => Expr::Let(x, Box::new(e1), Box::new(e2)),
            Binder::Tuple(items) => {
                let t = self.fresh("t");
                let body = self.project(Expr::Var(t.clone()), items, e2);
                Expr::Let(t, Box::new(e1), Box::new(body))
            }
        }
    }

    fn project(&mut self, subject: Expr, mut items: Vec<Binder>, body: Expr) -> Expr {
        if items.len() == 1 {
            let b = items.pop().unwrap();
            return self.bind(b, subject, body);
        }
        let first = items.remove(0);
        let rest = self.project(Expr::snd(subject.clone()), items, body);
        self.bind(first, Expr::fst(subject), rest)
    }

    /// `fun f(x:τ):τ'. e`, `fun f(x). e` or `fun f x = e`.
    fn fun_def(&mut self) -> Result<FunDef> {
        self.expect_kw("fun")?;
        let f = self.ident()?;
        let (x, param_ty) = if self.eat_sym("(") {
            let x = self.binder_name()?;
            let t = if self.eat_sym(":") { Some(self.ty()?) } else { None };
            self.expect_sym(")")?;
            (x, t)
        } else {
            (self.binder_name()?, None)
        };
        let ret_ty = if self.eat_sym(":") { Some(self.ty()?) } else { None };
        if !self.eat_sym(".") {
            self.expect_sym("=")?;
        }
        let body = self.expr()?;
        Ok(FunDef::new(f, x, param_ty, ret_ty, body))
    }

    fn case_expr(&mut self) -> Result<Expr> {
        self.expect_kw("case")?;
        let scrut = self.expr()?;
        self.expect_kw("of")?;
        let braced = self.eat_sym("{");
        let first = self.arm()?;
        if !self.eat_sym(";") {
            self.expect_sym("|")?;
        }
        let second = self.arm()?;
        if braced {
            self.eat_sym(";");
            self.expect_sym("}")?;
        }
        match (first, second) {
            (Arm::Inl(x1, e1), Arm::Inr(x2, e2)) | (Arm::Inr(x2, e2), Arm::Inl(x1, e1)) => {
                Ok(Expr::Case(Box::new(scrut), Arc::new(MatchPtr { x1, e1, x2, e2, from_if: false })))
            }
            (Arm::Nil(e1), Arm::Cons(h, t, e2)) | (Arm::Cons(h, t, e2), Arm::Nil(e1)) => {
                let c = self.fresh("c");
                let body = self.project(Expr::Var(c.clone()), vec![h, t], e2);
                let m = MatchPtr { x1: name("_"), e1, x2: c, e2: body, from_if: false };
                Ok(Expr::Case(Box::new(Expr::Unroll(Box::new(scrut))), Arc::new(m)))
            }
            _ => Err(self.error("case arms must be inl/inr or []/::")),
        }
    }

    fn arm(&mut self) -> Result<Arm> {
        let arm = if self.eat_kw("inl") || self.eat_kw("inr") {
            let left = matches!(&self.toks[self.pos - 1].tok, Tok::Ident(s) if s == "inl");
            let parens = self.eat_sym("(");
            let x = self.binder_name()?;
            if parens {
                self.expect_sym(")")?;
            }
            self.arm_arrow()?;
            let e = self.expr()?;
            if left {
                Arm::Inl(x, e)
            } else {
                Arm::Inr(x, e)
            }
        } else if self.eat_sym("[") {
            self.expect_sym("]")?;
            self.arm_arrow()?;
            Arm::Nil(self.expr()?)
        } else {
            let h = self.binder()?;
            self.expect_sym("::")?;
            let t = self.binder()?;
            self.arm_arrow()?;
            Arm::Cons(h, t, self.expr()?)
        };
        Ok(arm)
    }

    fn arm_arrow(&mut self) -> Result<()> {
        if self.eat_sym(".") || self.eat_sym("=>") || self.eat_sym("->") {
            Ok(())
        } else {
            Err(self.error(format!("expected `.` or `=>` in case arm, found {}", self.found())))
        }
    }

    fn binop(&mut self, level: u8) -> Result<Expr> {
        // 0: ||   1: &&   2: = <   3: ::   4: + -   5: *
        if level == 6 {
            return self.app();
        }
        let mut lhs = self.binop(level + 1)?;
        loop {
            let op = match (level, self.peek()) {
                (0, Tok::Sym("||")) => Prim::Or,
                (1, Tok::Sym("&&")) => Prim::And,
                (2, Tok::Sym("=")) => Prim::Eq,
                (2, Tok::Sym("<")) => Prim::Lt,
                (3, Tok::Sym("::")) => {
                    self.bump();
                    let tail = self.binop(3)?;
                    return Ok(cons(lhs, tail));
                }
                (4, Tok::Sym("+")) => Prim::Add,
                (4, Tok::Sym("-")) => Prim::Sub,
                (5, Tok::Sym("*")) => Prim::Mul,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.rhs_operand(level)?;
            lhs = Expr::Prim(op, vec![lhs, rhs]);
            if level == 2 {
                return Ok(lhs);
            }
        }
    }

    /// Right operands may start with a binder form (`x + let y = ...`).
    fn rhs_operand(&mut self, level: u8) -> Result<Expr> {
        if self.is_kw("let") || self.is_kw("fun") || self.is_kw("if") || self.is_kw("case") {
            self.expr()
        } else {
            self.binop(level + 1)
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Int(_) => true,
            Tok::Ident(s) => !is_keyword(s) || matches!(s.as_str(), "true" | "false"),
            Tok::Sym(s) => matches!(*s, "(" | "["),
            Tok::Eof => false,
        }
    }

    fn app(&mut self) -> Result<Expr> {
        let mut head = self.prefix()?;
        while self.starts_atom() || self.is_prefix_kw() {
            let arg = self.prefix()?;
            head = Expr::app(head, arg);
        }
        Ok(head)
    }

    fn is_prefix_kw(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if matches!(s.as_str(), "fst" | "snd" | "inl" | "inr" | "roll" | "unroll" | "not"))
    }

    /// Prefix keywords bind like application to a single argument.
    fn prefix(&mut self) -> Result<Expr> {
        let Tok::Ident(kw) = self.peek().clone() else { return self.postfix() };
        let build: fn(Option<Type>, Expr) -> Expr = match kw.as_str() {
            "fst" => |_, e| Expr::fst(e),
            "snd" => |_, e| Expr::snd(e),
            "inl" => |t, e| Expr::Inl(t, Box::new(e)),
            "inr" => |t, e| Expr::Inr(t, Box::new(e)),
            "roll" => |t, e| Expr::Roll(t, Box::new(e)),
            "unroll" => |_, e| Expr::Unroll(Box::new(e)),
            "not" => |_, e| Expr::Prim(Prim::Not, vec![e]),
            _ => return self.postfix(),
        };
        self.bump();
        let annot = if matches!(kw.as_str(), "inl" | "inr" | "roll") && self.eat_sym("{") {
            let t = self.ty()?;
            self.expect_sym("}")?;
            Some(t)
        } else {
            None
        };
        let arg = self.prefix()?;
        Ok(build(annot, arg))
    }

    fn postfix(&mut self) -> Result<Expr> {
        let mut e = self.atom()?;
        while self.eat_sym("@") {
            let l = self.ident()?;
            e = Expr::Label(Box::new(e), l);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::int(n))
            }
            Tok::Sym("-") if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                let Tok::Int(n) = self.bump() else { unreachable!() };
                Ok(Expr::int(-n))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::bool(s == "true"))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Expr::Var(name(&s)))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(Expr::unit());
                }
                let first = self.expr()?;
                if self.eat_sym(":") {
                    let t = self.ty()?;
                    self.expect_sym(")")?;
                    return self.ascribe(first, t);
                }
                let mut items = vec![first];
                while self.eat_sym(",") {
                    items.push(self.expr()?);
                }
                self.expect_sym(")")?;
                Ok(tuple(items))
            }
            Tok::Sym("[") => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat_sym("]") {
                    items.push(self.expr()?);
                    while self.eat_sym(",") {
                        items.push(self.expr()?);
                    }
                    self.expect_sym("]")?;
                }
                Ok(items.into_iter().rev().fold(nil(), |t, h| cons(h, t)))
            }
            _ => Err(self.error(format!("expected an expression, found {}", self.found()))),
        }
    }

    fn ascribe(&self, e: Expr, t: Type) -> Result<Expr> {
        let err = || self.error("type ascription is only supported on inl, inr, roll and list literals");
        match e {
            Expr::Roll(None, inner) => {
                let unfolded = t.unfold().ok_or_else(err)?;
                let inner = match *inner {
                    Expr::Inl(None, p) => Expr::Inl(Some(unfolded), p),
                    Expr::Inr(None, p) => Expr::Inr(Some(unfolded), p),
                    other => other,
                };
                Ok(Expr::Roll(Some(t), Box::new(inner)))
            }
            Expr::Inl(None, p) => Ok(Expr::Inl(Some(t), p)),
            Expr::Inr(None, p) => Ok(Expr::Inr(Some(t), p)),
            _ => Err(err()),
        }
    }

    // ---- patterns and values ----

    pub fn pattern(&mut self) -> Result<Pattern> {
        let head = self.pattern_atom()?;
        if self.eat_sym("::") {
            let tail = self.pattern()?;
            return Ok(Pattern::Roll(Box::new(Pattern::Inr(Box::new(Pattern::Pair(Box::new(head), Box::new(tail)))))));
        }
        Ok(head)
    }

    fn pattern_atom(&mut self) -> Result<Pattern> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Pattern::Const(Const::Int(n)))
            }
            Tok::Sym("-") if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                let Tok::Int(n) = self.bump() else { unreachable!() };
                Ok(Pattern::Const(Const::Int(-n)))
            }
            Tok::Sym("_") => {
                self.bump();
                Ok(Pattern::Hole)
            }
            Tok::Sym("=") => {
                self.bump();
                Ok(Pattern::Diamond)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Pattern::from_value(&Value::bool(s == "true")))
            }
            Tok::Ident(s) if matches!(s.as_str(), "inl" | "inr" | "roll") => {
                self.bump();
                let p = Box::new(self.pattern_atom()?);
                Ok(match s.as_str() {
                    "inl" => Pattern::Inl(p),
                    "inr" => Pattern::Inr(p),
                    _ => Pattern::Roll(p),
                })
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(Pattern::Const(Const::Unit));
                }
                let mut items = vec![self.pattern()?];
                while self.eat_sym(",") {
                    items.push(self.pattern()?);
                }
                self.expect_sym(")")?;
                let last = items.pop().unwrap();
                Ok(items.into_iter().rev().fold(last, |acc, p| Pattern::Pair(Box::new(p), Box::new(acc))))
            }
            Tok::Sym("[") => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat_sym("]") {
                    items.push(self.pattern()?);
                    while self.eat_sym(",") {
                        items.push(self.pattern()?);
                    }
                    self.expect_sym("]")?;
                }
                Ok(Pattern::list(items))
            }
            Tok::Sym("<") => {
                self.bump();
                let k = self.fun_def()?;
                self.expect_sym(",")?;
                let env = self.pattern_env()?;
                self.expect_sym(">")?;
                Ok(Pattern::Closure(Arc::new(k), env))
            }
            _ => Err(self.error(format!("expected a pattern, found {}", self.found()))),
        }
    }

    /// `[x |-> p, ...]`; `↦` and `:=` are accepted for `|->`.
    pub fn pattern_env(&mut self) -> Result<PatternEnv> {
        self.expect_sym("[")?;
        let mut env = PatternEnv::new();
        if self.eat_sym("]") {
            return Ok(env);
        }
        loop {
            let x = self.ident()?;
            if !self.eat_sym("|->") {
                self.expect_sym(":=")?;
            }
            let p = self.pattern()?;
            env.insert(x, p);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("]")?;
        Ok(env)
    }

    pub fn value(&mut self) -> Result<Value> {
        let start = self.offset();
        let p = self.pattern()?;
        p.to_value().ok_or_else(|| syntax_error(self.src, start, self.offset(), "values may not contain `_` or `=`"))
    }
}

enum Arm {
    Inl(Name, Expr),
    Inr(Name, Expr),
    Nil(Expr),
    Cons(Binder, Binder, Expr),
}

fn tuple(mut items: Vec<Expr>) -> Expr {
    let last = items.pop().unwrap();
    items.into_iter().rev().fold(last, |acc, e| Expr::pair(e, acc))
}

fn nil() -> Expr {
    Expr::Roll(None, Box::new(Expr::Inl(None, Box::new(Expr::unit()))))
}

fn cons(h: Expr, t: Expr) -> Expr {
    Expr::Roll(None, Box::new(Expr::Inr(None, Box::new(Expr::pair(h, t)))))
}

fn whole<'s, T>(src: &'s str, f: impl FnOnce(&mut Parser<'s>) -> Result<T>) -> Result<T> {
    let mut p = Parser::new(src)?;
    let out = f(&mut p)?;
    p.expect_end()?;
    Ok(out)
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    whole(src, |p| p.expr())
}

pub fn parse_type(src: &str) -> Result<Type> {
    whole(src, |p| p.ty())
}

pub fn parse_pattern(src: &str) -> Result<Pattern> {
    whole(src, |p| p.pattern())
}

pub fn parse_pattern_env(src: &str) -> Result<PatternEnv> {
    whole(src, |p| p.pattern_env())
}

pub fn parse_value(src: &str) -> Result<Value> {
    whole(src, |p| p.value())
}
