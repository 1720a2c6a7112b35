//! Annotated values `w^a`, paths into environments, erasure and
//! occurrence sets.

use std::fmt::{self, Debug, Display, Formatter};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::deep;
use crate::pretty::{write_tree, Node, Tree};
use crate::syntax::{name, Const, Env, FunDef, Name, Value};

/// How annotations are decorated when printing.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Style {
    /// `5@L5`; blank annotations are omitted.
    #[default]
    Compact,
    /// `5@{L5}`; blank annotations on leaves print as `@{}`.
    Braced,
}

/// Behaviour every annotation set supplies: a blank element and a way to
/// print itself. `render` returns `None` when nothing should be printed.
pub trait Annotation: Clone + PartialEq + Debug {
    fn is_bottom(&self) -> bool;

    fn render(&self, style: Style, leaf: bool) -> Option<String>;
}

impl Annotation for () {
    fn is_bottom(&self) -> bool {
        true
    }

    fn render(&self, _: Style, _: bool) -> Option<String> {
        None
    }
}

/// One step of a path: a variable, or the first/second child.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Step {
    Var(Name),
    One,
    Two,
}

/// A location: a variable followed by child selections, e.g. `x.1.2`.
/// Closures expose their environment through step `1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Path(pub Vec<Step>);

impl Path {
    pub fn empty() -> Path {
        Path(Vec::new())
    }

    pub fn var(x: &str) -> Path {
        Path(vec![Step::Var(name(x))])
    }

    pub fn child(&self, s: Step) -> Path {
        let mut p = self.clone();
        p.0.push(s);
        p
    }

    pub fn concat(&self, other: &Path) -> Path {
        Path(self.0.iter().chain(&other.0).cloned().collect())
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }
}

impl Display for Step {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Step::Var(x) => f.write_str(x),
            Step::One => f.write_str("1"),
            Step::Two => f.write_str("2"),
        }
    }
}

impl Display for Path {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Path {
    type Err = Error;

    fn from_str(s: &str) -> Result<Path> {
        if s == "ε" || s.is_empty() {
            return Ok(Path::empty());
        }
        let steps = s
            .split('.')
            .map(|part| match part {
                "1" => Ok(Step::One),
                "2" => Ok(Step::Two),
                x if x.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                    && x.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'') =>
                {
                    Ok(Step::Var(name(x)))
                }
                _ => Err(Error::Precondition(format!("malformed path `{s}`"))),
            })
            .collect::<Result<_>>()?;
        Ok(Path(steps))
    }
}

impl Annotation for Path {
    fn is_bottom(&self) -> bool {
        false
    }

    fn render(&self, style: Style, _: bool) -> Option<String> {
        Some(match style {
            Style::Compact => self.to_string(),
            Style::Braced => format!("{{{self}}}"),
        })
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum AnnNode<A> {
    Const(Const),
    Pair(Box<AnnValue<A>>, Box<AnnValue<A>>),
    Inl(Box<AnnValue<A>>),
    Inr(Box<AnnValue<A>>),
    Roll(Box<AnnValue<A>>),
    Closure(Arc<FunDef>, AnnEnv<A>),
}

/// `w^a`: a constructor whose children are themselves annotated.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct AnnValue<A> {
    pub node: AnnNode<A>,
    pub ann: A,
}

#[derive(Clone, PartialEq, Debug, Default, Serialize, Deserialize)]
pub struct AnnEnv<A>(Vec<(Name, AnnValue<A>)>);

impl<A> AnnValue<A> {
    pub fn new(node: AnnNode<A>, ann: A) -> AnnValue<A> {
        AnnValue { node, ann }
    }

    /// Immediate annotated children, closure environments included.
    pub fn children(&self) -> Vec<&AnnValue<A>> {
        match &self.node {
            AnnNode::Const(_) => vec![],
            AnnNode::Pair(a, b) => vec![a, b],
            AnnNode::Inl(v) | AnnNode::Inr(v) | AnnNode::Roll(v) => vec![v],
            AnnNode::Closure(_, env) => env.0.iter().map(|(_, v)| v).collect(),
        }
    }

    /// `|v̂|`.
    pub fn erase(&self) -> Value {
        deep(|| match &self.node {
            AnnNode::Const(c) => Value::Const(*c),
            AnnNode::Pair(a, b) => Value::pair(a.erase(), b.erase()),
            AnnNode::Inl(v) => Value::inl(v.erase()),
            AnnNode::Inr(v) => Value::inr(v.erase()),
            AnnNode::Roll(v) => Value::roll(v.erase()),
            AnnNode::Closure(k, env) => Value::Closure(k.clone(), env.erase()),
        })
    }

    /// Decorate every node of `v` with `f(v-node)`.
    pub fn lift(v: &Value, f: &impl Fn(&Value) -> A) -> AnnValue<A> {
        deep(|| {
            let node = match v {
                Value::Const(c) => AnnNode::Const(*c),
                Value::Pair(a, b) => AnnNode::Pair(Box::new(AnnValue::lift(a, f)), Box::new(AnnValue::lift(b, f))),
                Value::Inl(x) => AnnNode::Inl(Box::new(AnnValue::lift(x, f))),
                Value::Inr(x) => AnnNode::Inr(Box::new(AnnValue::lift(x, f))),
                Value::Roll(x) => AnnNode::Roll(Box::new(AnnValue::lift(x, f))),
                Value::Closure(k, env) => {
                    AnnNode::Closure(k.clone(), AnnEnv(env.iter().map(|(x, v)| (x.clone(), AnnValue::lift(v, f))).collect()))
                }
            };
            AnnValue::new(node, f(v))
        })
    }

    pub fn map<B>(&self, f: &impl Fn(&A) -> B) -> AnnValue<B> {
        deep(|| {
            let node = match &self.node {
                AnnNode::Const(c) => AnnNode::Const(*c),
                AnnNode::Pair(a, b) => AnnNode::Pair(Box::new(a.map(f)), Box::new(b.map(f))),
                AnnNode::Inl(v) => AnnNode::Inl(Box::new(v.map(f))),
                AnnNode::Inr(v) => AnnNode::Inr(Box::new(v.map(f))),
                AnnNode::Roll(v) => AnnNode::Roll(Box::new(v.map(f))),
                AnnNode::Closure(k, env) => AnnNode::Closure(k.clone(), env.map(f)),
            };
            AnnValue::new(node, f(&self.ann))
        })
    }

    pub fn with_ann(self, ann: A) -> AnnValue<A> {
        AnnValue { ann, ..self }
    }

    /// `occ(v̂)`: every annotated subvalue including the root, in preorder.
    pub fn occ(&self) -> Vec<&AnnValue<A>> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(v) = stack.pop() {
            out.push(v);
            let mut cs = v.children();
            cs.reverse();
            stack.extend(cs);
        }
        out
    }
}

impl<A: Annotation> AnnValue<A> {
    /// `occ^{≠⊥}(v̂)`.
    pub fn occ_nonbot(&self) -> Vec<&AnnValue<A>> {
        self.occ().into_iter().filter(|v| !v.ann.is_bottom()).collect()
    }

    /// Every node annotated with `⊥`.
    pub fn blank(v: &Value, bottom: &A) -> AnnValue<A> {
        AnnValue::lift(v, &|_| bottom.clone())
    }

    pub fn render(&self, style: Style) -> String {
        let mut out = String::new();
        write_tree(&mut out, self, false, &|t: &AnnValue<A>| t.ann.render(style, matches!(t.node, AnnNode::Const(_))));
        out
    }
}

impl<A> AnnEnv<A> {
    pub fn new() -> AnnEnv<A> {
        AnnEnv(Vec::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Name, AnnValue<A>)>) -> AnnEnv<A> {
        AnnEnv(pairs.into_iter().collect())
    }

    pub fn get(&self, x: &str) -> Option<&AnnValue<A>> {
        self.0.iter().rev().find(|(y, _)| &**y == x).map(|(_, v)| v)
    }

    pub fn lookup(&self, x: &str) -> Result<&AnnValue<A>> {
        self.get(x).ok_or_else(|| Error::Unbound(name(x)))
    }

    pub fn push(&mut self, x: Name, v: AnnValue<A>) {
        self.0.push((x, v));
    }

    pub fn pop(&mut self) {
        self.0.pop();
    }

    pub fn with(mut self, x: &str, v: AnnValue<A>) -> AnnEnv<A> {
        self.push(name(x), v);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Name, AnnValue<A>)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn erase(&self) -> Env {
        Env::from_pairs(self.0.iter().map(|(x, v)| (x.clone(), v.erase())))
    }

    pub fn map<B>(&self, f: &impl Fn(&A) -> B) -> AnnEnv<B> {
        AnnEnv(self.0.iter().map(|(x, v)| (x.clone(), v.map(f))).collect())
    }

    pub fn lift(env: &Env, f: &impl Fn(&Value) -> A) -> AnnEnv<A> {
        AnnEnv(env.iter().map(|(x, v)| (x.clone(), AnnValue::lift(v, f))).collect())
    }
}

impl<A: Clone> AnnEnv<A> {
    pub fn restrict(&self, names: &[Name]) -> Result<AnnEnv<A>> {
        names.iter().map(|x| Ok((x.clone(), self.lookup(x)?.clone()))).collect::<Result<Vec<_>>>().map(AnnEnv)
    }

    /// `occ(γ̂)`: occurrences of every bound value.
    pub fn occ(&self) -> Vec<&AnnValue<A>> {
        self.0.iter().flat_map(|(_, v)| v.occ()).collect()
    }
}

impl<A: Annotation> AnnEnv<A> {
    pub fn occ_nonbot(&self) -> Vec<&AnnValue<A>> {
        self.0.iter().flat_map(|(_, v)| v.occ_nonbot()).collect()
    }

    pub fn render(&self, style: Style) -> String {
        let items: Vec<String> = self.0.iter().map(|(x, v)| format!("{x} |-> {}", v.render(style))).collect();
        format!("[{}]", items.join(", "))
    }
}

impl<A: Annotation> Display for AnnValue<A> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Style::Braced))
    }
}

impl<A: Annotation> Display for AnnEnv<A> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Style::Braced))
    }
}

impl<A: Annotation> Tree for AnnValue<A> {
    fn node(&self) -> Node<'_, Self> {
        match &self.node {
            AnnNode::Const(c) => Node::Leaf(c.to_string()),
            AnnNode::Pair(a, b) => Node::Pair(a, b),
            AnnNode::Inl(v) => Node::Inl(v),
            AnnNode::Inr(v) => Node::Inr(v),
            AnnNode::Roll(v) => Node::Roll(v),
            AnnNode::Closure(k, env) => Node::Closure(k, env.to_string()),
        }
    }
}

/// `path_π(v)`: every node annotated with its own address below `prefix`.
pub fn path_annotate(v: &Value, prefix: &Path) -> AnnValue<Path> {
    deep(|| {
        let node = match v {
            Value::Const(c) => AnnNode::Const(*c),
            Value::Pair(a, b) => AnnNode::Pair(
                Box::new(path_annotate(a, &prefix.child(Step::One))),
                Box::new(path_annotate(b, &prefix.child(Step::Two))),
            ),
            Value::Inl(x) => AnnNode::Inl(Box::new(path_annotate(x, &prefix.child(Step::One)))),
            Value::Inr(x) => AnnNode::Inr(Box::new(path_annotate(x, &prefix.child(Step::One)))),
            Value::Roll(x) => AnnNode::Roll(Box::new(path_annotate(x, &prefix.child(Step::One)))),
            Value::Closure(k, env) => AnnNode::Closure(k.clone(), path_annotate_env(env, &prefix.child(Step::One))),
        };
        AnnValue::new(node, prefix.clone())
    })
}

/// `path_π(γ)`; `path(γ)` is `path_annotate_env(γ, &Path::empty())`.
pub fn path_annotate_env(env: &Env, prefix: &Path) -> AnnEnv<Path> {
    AnnEnv(env.iter().map(|(x, v)| (x.clone(), path_annotate(v, &prefix.child(Step::Var(x.clone()))))).collect())
}

fn mismatch(path: &Path, subject: impl Display) -> Error {
    let mut subject = subject.to_string();
    if subject.chars().count() > 60 {
        subject = subject.chars().take(57).collect::<String>() + "...";
    }
    Error::PathMismatch { path: path.to_string(), subject }
}

/// `v[π]`.
pub fn path_lookup<'a>(v: &'a Value, path: &Path) -> Result<&'a Value> {
    let mut cur = v;
    let mut steps = path.0.iter();
    while let Some(s) = steps.next() {
        cur = match (cur, s) {
            (Value::Pair(a, _), Step::One) => a,
            (Value::Pair(_, b), Step::Two) => b,
            (Value::Inl(x) | Value::Inr(x) | Value::Roll(x), Step::One) => x,
            (Value::Closure(_, env), Step::One) => match steps.next() {
                Some(Step::Var(x)) => env.get(x).ok_or_else(|| mismatch(path, v))?,
                _ => return Err(mismatch(path, v)),
            },
            _ => return Err(mismatch(path, v)),
        };
    }
    Ok(cur)
}

/// `γ[π]`: the first step names a variable.
pub fn path_lookup_env<'a>(env: &'a Env, path: &Path) -> Result<&'a Value> {
    match path.0.split_first() {
        Some((Step::Var(x), rest)) => {
            let v = env.get(x).ok_or_else(|| mismatch(path, env))?;
            path_lookup(v, &Path(rest.to_vec())).map_err(|_| mismatch(path, env))
        }
        _ => Err(mismatch(path, env)),
    }
}
