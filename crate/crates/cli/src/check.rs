//! Declarative security checks: a TOML file names a program, a finite
//! input universe, a view and a query, and the property to decide.
//!
//! ```toml
//! program = "let x = (y, z) in (snd x, fst x)"
//! ints = [0, 1]
//! property = "disclosure"
//! inputs = [{ name = "y", type = "int" }, { name = "z", type = "int" }]
//! view = { kind = "disclosure", pattern = "(1, _)" }
//! query = { kind = "out", pattern = "(1, _)" }
//! ```

use std::fmt::Write as _;
use std::hash::Hash;

use serde::Deserialize;

use tml_core::parser::{parse_expr, parse_pattern, parse_pattern_env, parse_type};
use tml_core::security::{
    check_negative_obfuscation, check_obfuscation, check_positive_obfuscation,
    disclosure_counterexample, enumerate_triples, in_query, out_query, TmlTriple,
};
use tml_core::slicing::{disc_view, obf_view};
use tml_core::typecheck::{elaborate, TypeEnv};
use tml_core::{name, Name, Type};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckFile {
    pub program: String,
    pub inputs: Vec<InputDecl>,
    #[serde(default = "default_ints")]
    pub ints: Vec<i64>,
    /// How many times recursive types are unrolled when enumerating inputs.
    #[serde(default = "default_depth")]
    pub depth: usize,
    pub property: Property,
    pub view: View,
    pub query: Query,
}

fn default_ints() -> Vec<i64> {
    vec![0, 1, 2]
}

fn default_depth() -> usize {
    2
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDecl {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Disclosure,
    Obfuscation,
    PositiveObfuscation,
    NegativeObfuscation,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum View {
    /// The output value.
    Output,
    /// The whole trace.
    Trace,
    /// `Disc_p`: the disclosure slice for `p`, via a witness when needed.
    Disclosure { pattern: String },
    /// `Obf_ρ`: only triples whose input lies above `ρ` are considered.
    Obfuscation { env: String },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Query {
    /// `IN_ρ`.
    In { env: String },
    /// `OUT_p`.
    Out { pattern: String },
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error("check file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Core(#[from] tml_core::Error),
}

pub fn run_str(src: &str, fuel: u64) -> Result<String, CheckError> {
    let file: CheckFile = toml::from_str(src)?;
    run(&file, fuel)
}

/// Decide the property and describe the verdict.
pub fn run(file: &CheckFile, fuel: u64) -> Result<String, CheckError> {
    let vars: Vec<(Name, Type)> =
        file.inputs.iter().map(|i| Ok((name(&i.name), parse_type(&i.ty)?))).collect::<Result<_, tml_core::Error>>()?;
    let (e, _) = elaborate(&TypeEnv::from_pairs(vars.iter().cloned()), &parse_expr(&file.program)?)?;
    let mut universe = enumerate_triples(&e, &file.ints, &vars, file.depth, fuel)?;

    let query: Box<dyn Fn(&TmlTriple) -> bool> = match &file.query {
        Query::In { env } => Box::new(in_query(parse_pattern_env(env)?)),
        Query::Out { pattern } => Box::new(out_query(parse_pattern(pattern)?)),
    };
    let mut out = String::new();
    let verdict = match &file.view {
        View::Output => decide(file.property, &universe, |t| t.value.clone(), &query, &mut out),
        View::Trace => decide(file.property, &universe, |t| t.trace.clone(), &query, &mut out),
        View::Disclosure { pattern } => {
            let p = parse_pattern(pattern)?;
            let view = |t: &TmlTriple| disc_view(&p, &t.env, &t.trace, &t.value).ok();
            decide(file.property, &universe, view, &query, &mut out)
        }
        View::Obfuscation { env } => {
            let rho = parse_pattern_env(env)?;
            universe.retain(|t| rho.leq_env(&t.env));
            let view = |t: &TmlTriple| obf_view(&rho, &t.env, &t.trace, &t.value).ok();
            decide(file.property, &universe, view, &query, &mut out)
        }
    };
    let name = match file.property {
        Property::Disclosure => "disclosure",
        Property::Obfuscation => "obfuscation",
        Property::PositiveObfuscation => "positive obfuscation",
        Property::NegativeObfuscation => "negative obfuscation",
    };
    let verb = if verdict { "holds" } else { "fails" };
    Ok(format!("{name} {verb} over {} triples{out}", universe.len()))
}

fn decide<O: Eq + Hash>(
    property: Property,
    u: &[TmlTriple],
    view: impl Fn(&TmlTriple) -> O,
    query: &dyn Fn(&TmlTriple) -> bool,
    note: &mut String,
) -> bool {
    match property {
        Property::Disclosure => {
            let Some((a, b)) = disclosure_counterexample(u, &view, query) else { return true };
            let _ = write!(note, "\n  same view, different answers: {} and {}", show(a), show(b));
            false
        }
        Property::Obfuscation => check_obfuscation(u, view, query),
        Property::PositiveObfuscation => check_positive_obfuscation(u, view, query),
        Property::NegativeObfuscation => check_negative_obfuscation(u, view, query),
    }
}

fn show(t: &TmlTriple) -> String {
    let parts: Vec<String> = t.env.iter().map(|(x, v)| format!("{x} |-> {v}")).collect();
    format!("[{}] => {}", parts.join(", "), t.value)
}
