//! Gaussian smoothing `b = pi^{-1} e^{-|w|^2} * a` and its Taylor coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::PhaseSymbol;
use crate::expr::SymbolExpr;
use crate::grid::PhaseGrid;
use crate::stft::PhaseField;

/// Kernel truncation radius, in units of the Gaussian width.
pub const KERNEL_RADIUS: f64 = 6.0;
/// Quadrature step of the smoothing kernel.
pub const KERNEL_STEP: f64 = 0.5;

/// `c_alpha` for `|alpha| <= K`, keyed `(alpha_x, alpha_xi)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WickCoefficients {
    pub max_order: u32,
    pub entries: Vec<((u32, u32), f64)>,
}

impl WickCoefficients {
    pub fn get(&self, alpha: (u32, u32)) -> f64 {
        self.entries
            .iter()
            .find(|(k, _)| *k == alpha)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }
}

/// One-dimensional factors `(1/k!) pi^{-1/2} int (-w)^k e^{-w^2} dw` by
/// trapezoid quadrature, scaled so that the zeroth one is exactly 1.
fn moment_factors(k: u32) -> Vec<f64> {
    let h = 0.01;
    let n = (10.0 / h) as i64;
    let mut raw = vec![0.0; k as usize + 1];
    for i in -n..=n {
        let w = i as f64 * h;
        let g = (-w * w).exp() * h / PI.sqrt();
        let mut p = 1.0;
        for r in raw.iter_mut() {
            *r += p * g;
            p *= -w;
        }
    }
    let mut fact = 1.0;
    let c0 = raw[0];
    raw.iter()
        .enumerate()
        .map(|(j, v)| {
            if j > 0 {
                fact *= j as f64;
            }
            if j % 2 == 1 {
                0.0
            } else {
                v / c0 / fact
            }
        })
        .collect()
}

pub fn wick_coefficients(k: u32) -> WickCoefficients {
    let f = moment_factors(k);
    let mut entries = Vec::new();
    for total in 0..=k {
        for i in (0..=total).rev() {
            let j = total - i;
            entries.push(((i, j), f[i as usize] * f[j as usize]));
        }
    }
    WickCoefficients {
        max_order: k,
        entries,
    }
}

/// `sum_{|alpha| <= k} c_alpha d^alpha a` as an expression.
pub fn wick_expansion(a: &SymbolExpr, k: u32) -> SymbolExpr {
    let c = wick_coefficients(k);
    let terms = c
        .entries
        .iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|((i, j), v)| crate::expr::symbol::scale(*v, a.partial(*i, *j)))
        .collect();
    crate::expr::symbol::sum(terms).simplified()
}

/// Smoothed symbol, evaluated by direct quadrature of the convolution.
pub struct WickSmoothed<'a, A: PhaseSymbol + ?Sized> {
    pub symbol: &'a A,
    nodes: Vec<(f64, f64, f64)>,
    /// Gaussian mass outside the truncation disk.
    pub truncation_bound: f64,
}

impl<'a, A: PhaseSymbol + ?Sized> WickSmoothed<'a, A> {
    pub fn new(symbol: &'a A) -> Self {
        let n = (KERNEL_RADIUS / KERNEL_STEP).round() as i64;
        let mut nodes = Vec::new();
        for i in -n..=n {
            for j in -n..=n {
                let (u, v) = (i as f64 * KERNEL_STEP, j as f64 * KERNEL_STEP);
                if u * u + v * v <= KERNEL_RADIUS * KERNEL_RADIUS {
                    nodes.push((u, v, (-(u * u + v * v)).exp()));
                }
            }
        }
        let mass: f64 = nodes.iter().map(|n| n.2).sum();
        for n in &mut nodes {
            n.2 /= mass;
        }
        WickSmoothed {
            symbol,
            nodes,
            truncation_bound: (-KERNEL_RADIUS * KERNEL_RADIUS).exp(),
        }
    }
}

impl<A: PhaseSymbol + ?Sized> PhaseSymbol for WickSmoothed<'_, A> {
    fn eval(&self, x: f64, xi: f64) -> Complex64 {
        self.nodes
            .iter()
            .map(|(u, v, w)| self.symbol.eval(x - u, xi - v) * w)
            .sum()
    }
}

/// The smoothed symbol sampled on the phase lattice of `grid`.
pub fn wick_smooth_field<A: PhaseSymbol + ?Sized>(a: &A, grid: &PhaseGrid) -> PhaseField {
    let b = WickSmoothed::new(a);
    let mut f = PhaseField::from_fn(grid, |x, xi| b.eval(x, xi));
    f.window = "wick-smoothed symbol".into();
    f
}
