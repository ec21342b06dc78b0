//! Discretization of phase space `R^d x R^d`.
//!
//! The spatial axis is `x_j = -L + j*hx`, `j = 0..N`, with `hx = 2L/N`. The
//! frequency axis holds the DFT frequencies of the spatial axis, densified by
//! an integer oversampling factor: `xi_k = k' * pi/(L*oversample)` for
//! `k' = -M/2 .. M/2` where `M = N*oversample`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub dim: usize,
    pub half_width: f64,
    pub n: usize,
    pub oversample: usize,
}

impl PhaseGrid {
    /// Builds a grid for the numeric path (which requires `dim == 1`).
    pub fn new(dim: usize, half_width: f64, n: usize, oversample: usize) -> Result<Self> {
        if dim != 1 {
            return Err(Error::Grid(format!(
                "numeric path supports d = 1 only, got d = {dim}"
            )));
        }
        if !n.is_power_of_two() {
            return Err(Error::Grid(format!("N = {n} is not a power of two")));
        }
        if n < 16 {
            return Err(Error::Grid(format!("N = {n} is below the minimum of 16")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Grid(format!("L = {half_width} must be positive")));
        }
        if oversample == 0 {
            return Err(Error::Grid("oversample must be >= 1".into()));
        }
        Ok(Self {
            dim,
            half_width,
            n,
            oversample,
        })
    }

    /// Grid whose frequency axis coincides with its spatial axis
    /// (`pi/hx == L`), so the unitary DFT maps samples onto the same lattice.
    pub fn self_dual(n: usize) -> Result<Self> {
        Self::new(1, (PI * n as f64 / 2.0).sqrt(), n, 1)
    }

    pub fn hx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.hx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Number of frequency samples, `N * oversample`.
    pub fn n_freq(&self) -> usize {
        self.n * self.oversample
    }

    pub fn dxi(&self) -> f64 {
        PI / (self.half_width * self.oversample as f64)
    }

    /// Frequency of column `k`, ascending from `-pi/hx`.
    pub fn xi(&self, k: usize) -> f64 {
        (k as f64 - (self.n_freq() / 2) as f64) * self.dxi()
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.n_freq()).map(|k| self.xi(k)).collect()
    }

    /// Largest frequency magnitude on the axis, `pi/hx`.
    pub fn xi_max(&self) -> f64 {
        PI / self.hx()
    }

    /// Radius of the largest centered disk covered by the phase lattice.
    pub fn radial_reach(&self) -> f64 {
        self.half_width.min(self.xi_max())
    }

    /// Index of the spatial node closest to `x`, if it lies on the axis.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let t = (x + self.half_width) / self.hx();
        let j = t.round();
        if j < 0.0 || j >= self.n as f64 {
            None
        } else {
            Some(j as usize)
        }
    }

    pub fn same_as(&self, other: &PhaseGrid) -> bool {
        self == other
    }

    pub fn check_same(&self, other: &PhaseGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_from_definition() {
        let g = PhaseGrid::new(1, 16.0, 256, 1).unwrap();
        assert_eq!(g.hx(), 0.125);
        assert!((g.dxi() - PI / 16.0).abs() < 1e-15);
        assert_eq!(g.n_freq(), 256);
        assert_eq!(g.x(0), -16.0);
        assert!((g.xi(0) + PI / g.hx()).abs() < 1e-12);
    }

    #[test]
    fn oversample_doubles_density() {
        let g = PhaseGrid::new(1, 16.0, 256, 2).unwrap();
        assert!((g.dxi() - PI / 32.0).abs() < 1e-15);
        assert_eq!(g.n_freq(), 512);
        // the band edge is unchanged
        assert!((g.xi(0) + PI / g.hx()).abs() < 1e-12);
    }

    #[test]
    fn axes_are_dft_duals() {
        let g = PhaseGrid::new(1, 16.0, 256, 2).unwrap();
        let prod = g.hx() * g.dxi() * g.n_freq() as f64;
        assert!((prod - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(PhaseGrid::new(1, 16.0, 255, 1), Err(Error::Grid(_))));
        assert!(PhaseGrid::new(2, 16.0, 256, 1).is_err());
        assert!(PhaseGrid::new(1, 16.0, 8, 1).is_err());
        assert!(PhaseGrid::new(1, -1.0, 256, 1).is_err());
        assert!(PhaseGrid::new(1, 16.0, 256, 0).is_err());
    }

    #[test]
    fn self_dual_grid() {
        let g = PhaseGrid::self_dual(256).unwrap();
        assert!((g.xi_max() - g.half_width).abs() < 1e-12);
        assert!((g.hx() - g.dxi()).abs() < 1e-12);
    }
}
