pub mod annot;
pub mod error;
pub mod eval;
pub mod extract;
pub mod gen;
pub mod parser;
pub mod patterns;
pub mod pretty;
pub mod props;
pub mod replay;
pub mod security;
pub mod slicing;
pub mod syntax;
pub mod typecheck;

pub use error::{Error, Result, SourceSpan};
pub use syntax::*;
