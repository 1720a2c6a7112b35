//! Toplevel front end: sessions, scripts, trace documents and
//! declarative security checks.

pub mod check;
pub mod document;
pub mod session;

pub use session::{run_script, Format, Session};
