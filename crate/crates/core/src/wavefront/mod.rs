//! Cone-resolved wave front estimation from the decay of `|V u|`.
//!
//! For a direction `theta` and a cone of half-width `w` around it, the
//! transform is sampled on arcs at geometrically spaced radii. The shell
//! supremum gives the Gabor decay exponent, the shell mean of `|V u|^2` gives
//! `gamma_2` and the Sobolev threshold `s* = (gamma_2 - 2d) / 2`: with
//! `mean(r) ~ r^{-gamma_2}`, `int r^{2s} r^{2d-1} mean(r) dr` is finite iff
//! `2s < gamma_2 - 2d`.

mod estimate;
mod inclusion;
mod source;

pub use estimate::*;
pub use inclusion::*;
pub use source::*;
