//! Phase-space analysis: short-time Fourier transforms, Weyl and anti-Wick
//! quantization of Shubin symbols, Shubin-Sobolev norms and cone-resolved
//! Gabor and Sobolev-Gabor wave front set estimates, in one space dimension.

pub mod checks;
pub mod closed_form;
pub mod cone;
pub mod error;
pub mod expr;
pub mod grid;
pub mod operators;
pub mod report;
pub mod sampled;
pub mod stft;
pub mod symbols;
pub mod wavefront;

pub use cone::Cone;
pub use error::{Error, Result};
pub use expr::{SignalExpr, SymbolExpr};
pub use grid::PhaseGrid;
pub use report::ReportEnvelope;
pub use sampled::SampledSignal;
pub use stft::{PhaseField, WindowKind};
pub use symbols::ShubinSymbol;
pub use wavefront::WavefrontEstimate;
