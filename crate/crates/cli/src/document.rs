//! `.tmltrace` documents: a versioned JSON tree holding either a traced
//! run or a slice. Encoding is canonical, so re-serializing a parsed
//! document reproduces its bytes. See `docs/trace-format.md`.

use serde::{Deserialize, Serialize};

use tml_core::annot::Path;
use tml_core::patterns::{Pattern, PatternEnv};
use tml_core::{Env, Name, Trace, Type, Value};

pub const FORMAT_VERSION: u32 = 1;
pub const EXTENSION: &str = "tmltrace";

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDocument {
    pub version: u32,
    pub body: Body,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Body {
    Run(RunDoc),
    Slice(SliceDoc),
}

/// A label naming a part of an input: `path` is relative to the input.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mark {
    pub label: Name,
    pub path: Path,
    pub ty: Type,
}

/// An input variable introduced by a labelled literal.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Input {
    pub name: Name,
    pub ty: Type,
    pub value: Value,
    pub marks: Vec<Mark>,
}

/// `Γ, γ, T, v` of one traced evaluation.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDoc {
    pub inputs: Vec<Input>,
    pub trace: Trace,
    pub value: Value,
    pub ty: Type,
}

impl RunDoc {
    pub fn env(&self) -> Env {
        Env::from_pairs(self.inputs.iter().map(|i| (i.name.clone(), i.value.clone())))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceKind {
    Disclosure,
    Obfuscation,
}

/// A partial input, partial trace and partial output.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceDoc {
    pub kind: SliceKind,
    pub env: PatternEnv,
    pub trace: Trace,
    pub output: Pattern,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DocError {
    #[error("malformed trace document at byte {offset}: {msg}")]
    Malformed { offset: usize, msg: String },
    #[error("unsupported trace document version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
}

impl TraceDocument {
    pub fn run(doc: RunDoc) -> TraceDocument {
        TraceDocument { version: FORMAT_VERSION, body: Body::Run(doc) }
    }

    pub fn slice(doc: SliceDoc) -> TraceDocument {
        TraceDocument { version: FORMAT_VERSION, body: Body::Slice(doc) }
    }
}

/// Compact JSON followed by a single newline.
pub fn serialize(doc: &TraceDocument) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut ser = serde_json::Serializer::new(&mut out);
        let ser = serde_stacker::Serializer::new(&mut ser);
        doc.serialize(ser).expect("documents always serialize");
    }
    out.push(b'\n');
    out
}

#[derive(Deserialize)]
struct Header {
    version: u32,
}

fn parse<'de, T: Deserialize<'de>>(bytes: &'de [u8]) -> Result<T, DocError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    de.disable_recursion_limit();
    let value = T::deserialize(serde_stacker::Deserializer::new(&mut de))
        .and_then(|v| de.end().map(|()| v))
        .map_err(|e| DocError::Malformed { offset: byte_offset(bytes, e.line(), e.column()), msg: strip_position(&e) })?;
    Ok(value)
}

pub fn deserialize(bytes: &[u8]) -> Result<TraceDocument, DocError> {
    // Read the version on its own first, so that documents from another
    // version report that rather than a schema mismatch.
    if let Ok(h) = serde_json::from_slice::<Header>(bytes) {
        if h.version != FORMAT_VERSION {
            return Err(DocError::Version { found: h.version });
        }
    }
    parse(bytes)
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = bytes.split(|&b| b == b'\n').take(line - 1).map(|l| l.len() + 1).sum();
    (start + column.saturating_sub(1)).min(bytes.len())
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tml_core::parser::parse_expr;
    use tml_core::slicing::disc_view;
    use tml_core::typecheck::{check_env, elaborate};

    fn factorial() -> RunDoc {
        let src = "let f = fun f(x: int): int. if x = 0 then 1 else x * f (x - 1) in f n";
        let env = Env::new().with("n", Value::int(4));
        let (e, ty) = elaborate(&check_env(&env).unwrap(), &parse_expr(src).unwrap()).unwrap();
        let (value, trace) = tml_core::eval::eval(&env, &e).unwrap();
        let inputs = vec![Input { name: "n".into(), ty: Type::Int, value: Value::int(4), marks: vec![] }];
        RunDoc { inputs, trace, value, ty }
    }

    #[test]
    fn factorial_round_trips() {
        let bytes = serialize(&TraceDocument::run(factorial()));
        let back = deserialize(&bytes).unwrap();
        assert_eq!(serialize(&back), bytes);
        assert_eq!(back, TraceDocument::run(factorial()));
    }

    #[test]
    fn truncation_is_malformed() {
        let bytes = serialize(&TraceDocument::run(factorial()));
        let cut = &bytes[..bytes.len() / 2];
        match deserialize(cut) {
            Err(DocError::Malformed { offset, .. }) => assert!(offset <= cut.len()),
            other => panic!("{other:?}"),
        }
        assert!(matches!(deserialize(b""), Err(DocError::Malformed { offset: 0, .. })));
    }

    #[test]
    fn other_versions_are_rejected() {
        let bytes = String::from_utf8(serialize(&TraceDocument::run(factorial()))).unwrap();
        let bumped = bytes.replacen("\"version\":1", "\"version\":7", 1);
        assert_eq!(deserialize(bumped.as_bytes()), Err(DocError::Version { found: 7 }));
    }

    #[test]
    fn slices_keep_their_holes() {
        let env = Env::new().with("y", Value::int(7)).with("z", Value::int(1));
        let e = parse_expr("let x = (y, z) in (snd x, fst x)").unwrap();
        let (e, _) = elaborate(&check_env(&env).unwrap(), &e).unwrap();
        let (v, t) = tml_core::eval::eval(&env, &e).unwrap();
        let out = tml_core::parser::parse_pattern("(1, _)").unwrap();
        let s = disc_view(&out, &env, &t, &v).unwrap();
        assert_eq!(s.trace.holes(), 2);
        let doc = TraceDocument::slice(SliceDoc { kind: SliceKind::Disclosure, env: s.env, trace: s.trace, output: out });
        let bytes = serialize(&doc);
        let back = deserialize(&bytes).unwrap();
        assert_eq!(serialize(&back), bytes);
        let Body::Slice(s) = back.body else { panic!() };
        assert_eq!(s.trace.holes(), 2);
    }
}
