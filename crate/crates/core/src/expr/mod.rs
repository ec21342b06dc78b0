//! Expression language for signals and symbols.

pub mod parse;
pub mod poly;
pub mod profile;
pub mod signal;
pub mod symbol;

pub use signal::SignalExpr;
pub use symbol::{CutoffSpec, SymbolExpr, Var};
