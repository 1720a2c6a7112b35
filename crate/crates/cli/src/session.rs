//! A toplevel session. Definitions are kept as source and replayed as a
//! `let` chain in front of every query, so that a labelled input bound by
//! `val` keeps its identity inside later traces. Labels `e@L` are lifted
//! to input variables named `L` before evaluation; labels nested inside a
//! labelled literal name a path below that input.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use tml_core::annot::{AnnEnv, AnnNode, AnnValue, Annotation, Path, Step, Style};
use tml_core::eval::{eval_with_fuel, Fuel, DEFAULT_FUEL};
use tml_core::extract::{extract, DepSet, Dependency, ExprTerm, Expression, Where};
use tml_core::parser::{parse_expr, parse_pattern, parse_pattern_env, Parser};
use tml_core::pretty::pretty_trace;
use tml_core::replay::replay_with_fuel;
use tml_core::slicing::{disc_view, obf_view};
use tml_core::syntax::{free_vars, MatchPtr};
use tml_core::typecheck::{elaborate, infer, TypeEnv};
use tml_core::{name, Env, Error, Expr, Name, Type, Value};

use crate::check;
use crate::document::{self, Body, Input, Mark, RunDoc, SliceDoc, SliceKind, TraceDocument};

/// How traces and slices are printed.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Pretty,
    /// The JSON encoding used by `.tmltrace` files.
    Canonical,
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Document(#[from] document::DocError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {err}")]
    Io { path: String, err: std::io::Error },
}

pub type Outcome = Result<String, SessionError>;

fn usage<T>(msg: impl Into<String>) -> Result<T, SessionError> {
    Err(SessionError::Usage(msg.into()))
}

struct Def {
    name: Name,
    expr: Expr,
}

pub struct Session {
    defs: Vec<Def>,
    /// Inputs introduced by `val` bindings; they outlive the command.
    inputs: Vec<Input>,
    runs: HashMap<Name, RunDoc>,
    /// The most recent run or slice, for `:save` without a name.
    last: Option<TraceDocument>,
    pub fuel: u64,
    pub style: Style,
    pub format: Format,
}

impl Default for Session {
    fn default() -> Self {
        Session::new(DEFAULT_FUEL)
    }
}

const HELP: &str = "\
expressions      e                     evaluate and print
definitions      val x = e | fun f(x: t): t = e
tracing          trace e               record a trace, bound to `it`
                 val t = trace e       record a trace, bound to `t`
provenance       where t | dependency t | expression t
slicing          slice t <pattern> | obfuscate t <pattern-env>
replay           replay t [x |-> v, ...]
printing         show t
meta             :type e | :fuel [n] | :style compact|braced | :format pretty|canonical
                 :save [t] file | :load [t] file | :check file.toml | :reset | :help";

impl Session {
    pub fn new(fuel: u64) -> Session {
        Session {
            defs: Vec::new(),
            inputs: Vec::new(),
            runs: HashMap::new(),
            last: None,
            fuel,
            style: Style::Braced,
            format: Format::Pretty,
        }
    }

    /// Run one command, given without its terminating `;`.
    pub fn command(&mut self, line: &str) -> Outcome {
        let line = line.trim();
        let (head, rest) = split_word(line);
        match head {
            "" => Ok(String::new()),
            _ if head.starts_with(':') => self.meta(head, rest),
            "val" => self.val(rest),
            "fun" => self.fun(line),
            "trace" => self.trace(name("it"), rest),
            "where" => self.provenance(rest, Prov::Where),
            "dependency" => self.provenance(rest, Prov::Dependency),
            "expression" => self.provenance(rest, Prov::Expression),
            "slice" => self.slice(rest),
            "obfuscate" => self.obfuscate(rest),
            "replay" => self.replay(rest),
            "show" => {
                let run = self.run(rest.trim())?;
                Ok(self.show_trace(&run.trace))
            }
            _ => self.evaluate(line),
        }
    }

    fn meta(&mut self, cmd: &str, rest: &str) -> Outcome {
        let rest = rest.trim();
        match cmd {
            ":help" => Ok(HELP.to_string()),
            ":reset" => {
                let (fuel, style, format) = (self.fuel, self.style, self.format);
                *self = Session { style, format, ..Session::new(fuel) };
                Ok("session reset".into())
            }
            ":type" => {
                let e = parse_expr(rest)?;
                let (_, ty, _) = self.prepare(&e)?;
                Ok(format!("{ty}"))
            }
            ":fuel" => {
                if !rest.is_empty() {
                    self.fuel = rest.parse().map_err(|_| SessionError::Usage(format!("`{rest}` is not a step count")))?;
                }
                Ok(format!("fuel = {}", self.fuel))
            }
            ":style" => {
                self.style = match rest {
                    "compact" => Style::Compact,
                    "braced" => Style::Braced,
                    _ => return usage("usage: :style compact|braced"),
                };
                Ok(format!("style = {rest}"))
            }
            ":format" => {
                self.format = match rest {
                    "pretty" => Format::Pretty,
                    "canonical" => Format::Canonical,
                    _ => return usage("usage: :format pretty|canonical"),
                };
                Ok(format!("format = {rest}"))
            }
            ":save" => {
                let (doc, path) = match rest.split_whitespace().collect::<Vec<_>>()[..] {
                    [path] => (self.last.clone().ok_or_else(|| SessionError::Usage("nothing to save yet".into()))?, path),
                    [t, path] => (TraceDocument::run(self.run(t)?.clone()), path),
                    _ => return usage("usage: :save [t] file"),
                };
                std::fs::write(path, document::serialize(&doc)).map_err(|err| SessionError::Io { path: path.into(), err })?;
                Ok(format!("saved {path}"))
            }
            ":load" => {
                let (t, path) = match rest.split_whitespace().collect::<Vec<_>>()[..] {
                    [path] => ("it", path),
                    [t, path] => (t, path),
                    _ => return usage("usage: :load [t] file"),
                };
                let bytes = std::fs::read(path).map_err(|err| SessionError::Io { path: path.into(), err })?;
                let doc = document::deserialize(&bytes)?;
                self.last = Some(doc.clone());
                match doc.body {
                    Body::Run(run) => Ok(self.bind_run(name(t), run)),
                    Body::Slice(s) => Ok(self.show_slice(&s)),
                }
            }
            ":check" => {
                let src = std::fs::read_to_string(rest).map_err(|err| SessionError::Io { path: rest.into(), err })?;
                check::run_str(&src, self.fuel).map_err(|e| SessionError::Usage(e.to_string()))
            }
            _ => usage(format!("unknown command {cmd}; try :help")),
        }
    }

    fn val(&mut self, rest: &str) -> Outcome {
        let Some((x, e)) = rest.split_once('=') else { return usage("usage: val x = e") };
        let x = x.trim();
        if !is_ident(x) {
            return usage(format!("`{x}` is not a variable name"));
        }
        let (head, body) = split_word(e.trim());
        if head == "trace" {
            return self.trace(name(x), body);
        }
        let e = parse_expr(e)?;
        self.define(name(x), e)
    }

    fn fun(&mut self, line: &str) -> Outcome {
        let e = parse_expr(line)?;
        let Expr::Fun(k) = &e else { return usage("expected a function declaration") };
        self.define(k.name.clone(), e)
    }

    /// Bind `x` to `e`. Labels in `e` become inputs of the session.
    fn define(&mut self, x: Name, e: Expr) -> Outcome {
        let (lifted, ty, fresh) = self.prepare(&e)?;
        let (v, _) = self.execute(&lifted, &fresh)?;
        self.inputs.extend(fresh);
        self.defs.push(Def { name: x.clone(), expr: strip_chain(&lifted, self.chain_len(&e)) });
        self.runs.remove(&x);
        Ok(format!("val {x} = {} : {ty}", show_value(&v)))
    }

    fn evaluate(&mut self, src: &str) -> Outcome {
        let e = parse_expr(src)?;
        let (lifted, ty, fresh) = self.prepare(&e)?;
        let (v, _) = self.execute(&lifted, &fresh)?;
        Ok(format!("val it = {} : {ty}", show_value(&v)))
    }

    fn trace(&mut self, x: Name, src: &str) -> Outcome {
        let e = parse_expr(src)?;
        let (lifted, ty, fresh) = self.prepare(&e)?;
        let inputs = self.inputs_of(&lifted, fresh);
        let env = Env::from_pairs(inputs.iter().map(|i| (i.name.clone(), i.value.clone())));
        let (value, trace) = eval_with_fuel(&env, &lifted, &mut Fuel::new(self.fuel))?;
        Ok(self.bind_run(x, RunDoc { inputs, trace, value, ty }))
    }

    fn bind_run(&mut self, x: Name, run: RunDoc) -> String {
        let out = format!("val {x} = <trace> : {}", trace_type(&run));
        self.last = Some(TraceDocument::run(run.clone()));
        self.runs.insert(x, run);
        out
    }

    fn run(&self, t: &str) -> Result<&RunDoc, SessionError> {
        self.runs.get(t).ok_or_else(|| SessionError::Usage(format!("`{t}` is not a trace; record one with `trace e`")))
    }

    fn provenance(&self, rest: &str, which: Prov) -> Outcome {
        let run = self.run(rest.trim())?;
        let out = match which {
            Prov::Where => {
                let env = annotate_inputs(&run.inputs, &|l| Some(Path::var(l)), &None);
                extract(&Where, &run.trace, &env)?.render(self.style)
            }
            Prov::Expression => {
                let env = annotate_inputs(&run.inputs, &|l| ExprTerm::Path(Path::var(l)), &ExprTerm::Bot);
                extract(&Expression, &run.trace, &env)?.render(self.style)
            }
            Prov::Dependency => {
                let env = annotate_inputs(&run.inputs, &|l| DepSet::singleton(Path::var(l)), &DepSet::default());
                extract(&Dependency, &run.trace, &env)?.render(self.style)
            }
        };
        Ok(format!("val it = {out}"))
    }

    fn slice(&mut self, rest: &str) -> Outcome {
        let (t, p) = split_word(rest.trim());
        let run = self.run(t)?;
        let p = parse_pattern(p)?;
        let s = disc_view(&p, &run.env(), &run.trace, &run.value)?;
        let doc = SliceDoc { kind: SliceKind::Disclosure, env: s.env, trace: s.trace, output: p };
        let out = self.show_slice(&doc);
        self.last = Some(TraceDocument::slice(doc));
        Ok(out)
    }

    fn obfuscate(&mut self, rest: &str) -> Outcome {
        let (t, rho) = split_word(rest.trim());
        let run = self.run(t)?;
        let rho = parse_pattern_env(rho)?;
        let (p, trace) = obf_view(&rho, &run.env(), &run.trace, &run.value)?;
        let doc = SliceDoc { kind: SliceKind::Obfuscation, env: rho, trace, output: p };
        let out = self.show_slice(&doc);
        self.last = Some(TraceDocument::slice(doc));
        Ok(out)
    }

    fn replay(&self, rest: &str) -> Outcome {
        let (t, overrides) = split_word(rest.trim());
        let run = self.run(t)?;
        let mut env = run.env();
        if !overrides.is_empty() {
            for (x, p) in parse_pattern_env(overrides)?.iter() {
                let Some(v) = p.to_value() else { return usage(format!("the new value of {x} has holes")) };
                if env.get(x).is_none() {
                    return usage(format!("`{x}` is not an input of {t}"));
                }
                env.set(x, v);
            }
        }
        let v = replay_with_fuel(&env, &run.trace, &mut Fuel::new(self.fuel))?;
        Ok(format!("val it = {} : {}", show_value(&v), run.ty))
    }

    fn show_trace(&self, t: &tml_core::Trace) -> String {
        match self.format {
            Format::Pretty => pretty_trace(t),
            Format::Canonical => json(t),
        }
    }

    fn show_slice(&self, s: &SliceDoc) -> String {
        let mut out = String::new();
        match self.format {
            Format::Pretty => {
                let _ = writeln!(out, "input: {}", s.env);
                let _ = writeln!(out, "output: {}", s.output);
                let _ = write!(out, "trace: {}", pretty_trace(&s.trace));
            }
            Format::Canonical => {
                let doc = document::serialize(&TraceDocument::slice(s.clone()));
                out.push_str(String::from_utf8_lossy(&doc).trim_end());
            }
        }
        out
    }

    /// Number of session definitions `e` depends on.
    fn chain_len(&self, e: &Expr) -> usize {
        self.needed(e).len()
    }

    /// The definitions `e` transitively refers to, latest first.
    fn needed(&self, e: &Expr) -> Vec<&Def> {
        let mut want: BTreeSet<Name> = free_vars(e);
        let mut out = Vec::new();
        for d in self.defs.iter().rev() {
            if want.remove(&d.name) {
                want.extend(free_vars(&d.expr));
                out.push(d);
            }
        }
        out
    }

    /// Wrap `e` in the definitions it uses, typecheck, and lift labels.
    /// Returns the closed program, its type and the labels it introduced.
    fn prepare(&self, e: &Expr) -> Result<(Expr, Type, Vec<Input>), SessionError> {
        let full = self.needed(e).into_iter().fold(e.clone(), |body, d| Expr::Let(d.name.clone(), Box::new(d.expr.clone()), Box::new(body)));
        let g = TypeEnv::from_pairs(self.inputs.iter().map(|i| (i.name.clone(), i.ty.clone())));
        let (elab, ty) = elaborate(&g, &full)?;
        let mut fresh = Vec::new();
        let lifted = lift(&elab, &mut fresh, false)?;
        let mut seen: BTreeSet<&str> = self.inputs.iter().flat_map(|i| i.marks.iter().map(|m| &*m.label)).collect();
        for l in fresh.iter().flat_map(|i| &i.marks) {
            if !seen.insert(&l.label) {
                return usage(format!("label `{}` is already in use", l.label));
            }
        }
        Ok((lifted, ty, fresh))
    }

    /// The inputs a lifted program reads: session labels it mentions, then
    /// the ones it introduced.
    fn inputs_of(&self, e: &Expr, fresh: Vec<Input>) -> Vec<Input> {
        let fv = free_vars(e);
        let mut out: Vec<Input> = self.inputs.iter().filter(|i| fv.contains(&i.name)).cloned().collect();
        out.extend(fresh);
        out
    }

    fn execute(&self, e: &Expr, fresh: &[Input]) -> Result<(Value, tml_core::Trace), SessionError> {
        let inputs = self.inputs_of(e, fresh.to_vec());
        let env = Env::from_pairs(inputs.into_iter().map(|i| (i.name, i.value)));
        Ok(eval_with_fuel(&env, e, &mut Fuel::new(self.fuel))?)
    }
}

#[derive(Clone, Copy)]
enum Prov {
    Where,
    Dependency,
    Expression,
}

/// Remove the `n` outer `let`s that `prepare` wrapped around a definition.
fn strip_chain(e: &Expr, n: usize) -> Expr {
    let mut cur = e;
    for _ in 0..n {
        match cur {
            Expr::Let(_, _, body) => cur = body,
            _ => unreachable!("prepare wraps one let per definition"),
        }
    }
    cur.clone()
}

fn split_word(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    }
}

fn is_ident(s: &str) -> bool {
    let mut p = match Parser::new(s) {
        Ok(p) => p,
        Err(_) => return false,
    };
    matches!(p.expr(), Ok(Expr::Var(_))) && p.at_end()
}

fn show_value(v: &Value) -> String {
    match v {
        Value::Closure(..) => "<fun>".into(),
        v => v.to_string(),
    }
}

fn json<T: serde::Serialize>(t: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::new(&mut out);
    t.serialize(serde_stacker::Serializer::new(&mut ser)).expect("serializable");
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// `({L1:int,...}, τ) trace`.
pub fn trace_type(run: &RunDoc) -> String {
    let labels: Vec<String> = run.inputs.iter().flat_map(|i| &i.marks).map(|m| format!("{}:{}", m.label, m.ty)).collect();
    format!("({{{}}}, {}) trace", labels.join(","), run.ty)
}

/// Annotate every input with `mk(L)` on the nodes labelled `L` and with
/// `bot` elsewhere.
pub fn annotate_inputs<A: Annotation>(inputs: &[Input], mk: &impl Fn(&str) -> A, bot: &A) -> AnnEnv<A> {
    AnnEnv::from_pairs(
        inputs.iter().map(|i| (i.name.clone(), annotate(&i.value, &Path::empty(), &i.marks, mk, bot))),
    )
}

fn annotate<A: Annotation>(v: &Value, at: &Path, marks: &[Mark], mk: &impl Fn(&str) -> A, bot: &A) -> AnnValue<A> {
    let ann = marks.iter().find(|m| &m.path == at).map_or_else(|| bot.clone(), |m| mk(&m.label));
    let go = |w: &Value, s: Step| Box::new(annotate(w, &at.child(s), marks, mk, bot));
    let node = match v {
        Value::Const(c) => AnnNode::Const(*c),
        Value::Pair(a, b) => AnnNode::Pair(go(a, Step::One), go(b, Step::Two)),
        Value::Inl(w) => AnnNode::Inl(go(w, Step::One)),
        Value::Inr(w) => AnnNode::Inr(go(w, Step::One)),
        Value::Roll(w) => AnnNode::Roll(go(w, Step::One)),
        Value::Closure(k, env) => AnnNode::Closure(k.clone(), AnnEnv::lift(env, &|_| bot.clone())),
    };
    AnnValue::new(node, ann)
}

/// Replace each outermost `e@L` by the variable `L`, recording `L` as an
/// input. `in_fun` rejects labels inside function bodies, whose values
/// would differ from call to call.
fn lift(e: &Expr, out: &mut Vec<Input>, in_fun: bool) -> Result<Expr, SessionError> {
    let b = |x: &Expr, out: &mut Vec<Input>| lift(x, out, in_fun).map(Box::new);
    Ok(match e {
        Expr::Label(inner, l) => {
            if in_fun {
                return usage(format!("label `{l}` may not appear inside a function body"));
            }
            let mut marks = Vec::new();
            let (_, ty) = infer(&TypeEnv::new(), &strip_labels(inner, &Path::empty(), &mut Vec::new())?)
                .map_err(|_| SessionError::Usage(format!("the value labelled `{l}` must be closed")))?;
            marks.push(Mark { label: l.clone(), path: Path::empty(), ty: ty.clone() });
            let plain = strip_labels(inner, &Path::empty(), &mut marks)?;
            let (value, _) = eval_with_fuel(&Env::new(), &plain, &mut Fuel::new(DEFAULT_FUEL))?;
            out.push(Input { name: l.clone(), ty, value, marks });
            Expr::Var(l.clone())
        }
        Expr::Var(_) | Expr::Const(_) => e.clone(),
        Expr::Prim(op, args) => Expr::Prim(*op, args.iter().map(|a| lift(a, out, in_fun)).collect::<Result<_, _>>()?),
        Expr::Let(x, a, c) => Expr::Let(x.clone(), b(a, out)?, b(c, out)?),
        Expr::Pair(a, c) => Expr::Pair(b(a, out)?, b(c, out)?),
        Expr::Fst(a) => Expr::Fst(b(a, out)?),
        Expr::Snd(a) => Expr::Snd(b(a, out)?),
        Expr::Inl(t, a) => Expr::Inl(t.clone(), b(a, out)?),
        Expr::Inr(t, a) => Expr::Inr(t.clone(), b(a, out)?),
        Expr::Roll(t, a) => Expr::Roll(t.clone(), b(a, out)?),
        Expr::Unroll(a) => Expr::Unroll(b(a, out)?),
        Expr::App(f, a) => Expr::App(b(f, out)?, b(a, out)?),
        Expr::Case(s, m) => {
            let m2 = MatchPtr { e1: lift(&m.e1, out, in_fun)?, e2: lift(&m.e2, out, in_fun)?, ..(**m).clone() };
            Expr::Case(b(s, out)?, Arc::new(m2))
        }
        Expr::Fun(k) => {
            if k.body.contains_label() {
                lift(&k.body, out, true)?;
            }
            e.clone()
        }
    })
}

/// Drop labels below a labelled literal, recording where they sat.
fn strip_labels(e: &Expr, at: &Path, marks: &mut Vec<Mark>) -> Result<Expr, SessionError> {
    let child = |x: &Expr, s: Step, marks: &mut Vec<Mark>| strip_labels(x, &at.child(s), marks).map(Box::new);
    Ok(match e {
        Expr::Label(inner, l) => {
            let plain = strip_labels(inner, at, &mut Vec::new())?;
            let ty = infer(&TypeEnv::new(), &plain).map(|(_, t)| t).map_err(|_| SessionError::Usage(format!("the value labelled `{l}` must be closed")))?;
            marks.push(Mark { label: l.clone(), path: at.clone(), ty });
            strip_labels(inner, at, marks)?
        }
        Expr::Pair(a, b) => Expr::Pair(child(a, Step::One, marks)?, child(b, Step::Two, marks)?),
        Expr::Inl(t, a) => Expr::Inl(t.clone(), child(a, Step::One, marks)?),
        Expr::Inr(t, a) => Expr::Inr(t.clone(), child(a, Step::One, marks)?),
        Expr::Roll(t, a) => Expr::Roll(t.clone(), child(a, Step::One, marks)?),
        _ if e.contains_label() => return usage("labels inside a labelled value must sit on its constructors"),
        _ => e.clone(),
    })
}

/// Split a script into commands: a command ends at a line whose last
/// character is `;` outside brackets, or at a line starting with `:`.
/// Blank lines and comments between commands are skipped.
pub fn commands(src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_comment = false;
    for line in src.lines() {
        let t = line.trim();
        if in_comment {
            in_comment = !t.contains("*)");
            continue;
        }
        if cur.is_empty() {
            if t.is_empty() {
                continue;
            }
            if t.starts_with("(*") {
                in_comment = !t.ends_with("*)");
                continue;
            }
            if t.starts_with(':') {
                out.push(t.trim_end_matches(';').trim_end().to_string());
                continue;
            }
        }
        if !cur.is_empty() {
            cur.push('\n');
        }
        cur.push_str(line.trim_end());
        if t.ends_with(';') && balanced(&cur) {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    out
}

fn balanced(s: &str) -> bool {
    let mut depth = 0i64;
    for c in s.chars() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            _ => {}
        }
    }
    depth <= 0
}

/// Run a script, echoing each command after `- ` as the toplevel would.
/// Returns the transcript and whether every command succeeded; stops at
/// the first error unless `keep_going`.
pub fn run_script(session: &mut Session, src: &str, keep_going: bool) -> (String, bool) {
    let mut transcript = String::new();
    let mut ok = true;
    for cmd in commands(src) {
        for (i, line) in cmd.lines().enumerate() {
            transcript.push_str(if i == 0 { "- " } else { "  " });
            transcript.push_str(line);
            transcript.push('\n');
        }
        let body = cmd.trim_end().trim_end_matches(';');
        match session.command(body) {
            Ok(out) => {
                if !out.is_empty() {
                    transcript.push_str(&out);
                    transcript.push('\n');
                }
            }
            Err(e) => {
                ok = false;
                let _ = writeln!(transcript, "error: {e}");
                if !keep_going {
                    break;
                }
            }
        }
    }
    (transcript, ok)
}
