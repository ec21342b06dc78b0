//! Evaluators of `|V u|` at arbitrary phase-space points.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::expr::{SignalExpr, SymbolExpr};
use crate::grid::PhaseGrid;
use crate::operators::{apply_matrix, weyl_quantize, Quantization};
use crate::sampled::SampledSignal;
use crate::stft::{make_window, stft, PhaseField, WindowKind};
use crate::symbols::ShubinSymbol;

/// Default radial fit window for analytic sources.
pub const CLOSED_FORM_WINDOW: (f64, f64) = (200.0, 2000.0);
/// Default radial fit window when the transform is a quadrature.
pub const QUADRATURE_WINDOW: (f64, f64) = (40.0, 400.0);

pub trait PhaseSource: Sync {
    /// `|V u|` at each point, in order.
    fn abs_many(&self, pts: &[(f64, f64)]) -> Vec<f64>;
    /// Radii on which the values can be trusted.
    fn reliable_band(&self) -> (f64, f64);
    fn label(&self) -> String;
}

/// Analytic transform of a closed-form signal.
#[derive(Debug, Clone)]
pub struct ClosedFormSource {
    pub form: ClosedForm,
    pub window: WindowKind,
    pub label: String,
}

impl ClosedFormSource {
    pub fn new(form: ClosedForm, window: WindowKind, label: impl Into<String>) -> Self {
        ClosedFormSource {
            form,
            window,
            label: label.into(),
        }
    }

    pub fn from_expr(u: &SignalExpr, window: WindowKind) -> Result<Self> {
        Ok(Self::new(ClosedForm::from_expr(u)?, window, u.to_string()))
    }

    /// Continuous Fourier transform of the signal, same window.
    pub fn fourier(&self) -> Result<Self> {
        Ok(Self::new(self.form.fourier()?, self.window, format!("fourier({})", self.label)))
    }
}

impl PhaseSource for ClosedFormSource {
    fn abs_many(&self, pts: &[(f64, f64)]) -> Vec<f64> {
        pts.par_iter().map(|&(x, xi)| self.form.stft_at(self.window, x, xi).norm()).collect()
    }

    fn reliable_band(&self) -> (f64, f64) {
        CLOSED_FORM_WINDOW
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Sampled transform, bilinear in between nodes.
#[derive(Debug, Clone)]
pub struct GridSource {
    pub field: PhaseField,
    pub band: (f64, f64),
    pub label: String,
}

impl GridSource {
    pub fn new(field: PhaseField, label: impl Into<String>) -> Self {
        let hi = 0.7 * field.grid.radial_reach();
        GridSource {
            field,
            band: (4.0, hi),
            label: label.into(),
        }
    }

    pub fn from_signal(u: &SampledSignal, psi: &SampledSignal, label: impl Into<String>) -> Result<Self> {
        Ok(Self::new(stft(u, psi)?, label))
    }

    /// Samples an expression on the grid; approximate deltas cap the band at `0.5 / eps`.
    pub fn from_expr(u: &SignalExpr, grid: &PhaseGrid, window: WindowKind) -> Result<Self> {
        let psi = make_window(window, grid)?;
        let s = SampledSignal::sample(u, grid)?;
        let mut src = Self::from_signal(&s, &psi, u.to_string())?;
        if let Some(eps) = u.min_delta_width() {
            src.band.1 = src.band.1.min(0.5 / eps);
        }
        Ok(src)
    }
}

impl PhaseSource for GridSource {
    fn abs_many(&self, pts: &[(f64, f64)]) -> Vec<f64> {
        pts.par_iter()
            .map(|&(x, xi)| self.field.abs_at(x, xi).unwrap_or(0.0))
            .collect()
    }

    fn reliable_band(&self) -> (f64, f64) {
        self.band
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `V(A_a u)` with the Gaussian window through the reproducing kernel
/// `K(z, w) = exp(-|z-w|^2/4) exp(-i (z_xi - w_xi)(z_x + w_x) / 2)`,
/// integrated on a fixed lattice of step `step` within `radius` of `z`.
pub struct AntiWickQuadratureSource {
    pub inner: ClosedFormSource,
    pub symbol: SymbolExpr,
    pub step: f64,
    pub radius: f64,
    pub label: String,
}

impl AntiWickQuadratureSource {
    pub fn new(inner: ClosedFormSource, symbol: SymbolExpr) -> Result<Self> {
        if inner.window != WindowKind::Gaussian {
            return Err(Error::Precondition(
                "anti-Wick quadrature needs the Gaussian window".into(),
            ));
        }
        let label = format!("antiwick({}; {})", symbol, inner.label);
        Ok(AntiWickQuadratureSource {
            inner,
            symbol,
            step: 0.25,
            radius: 9.0,
            label,
        })
    }

    fn offsets(&self) -> Vec<(i64, i64)> {
        let m = (self.radius / self.step).ceil() as i64 + 1;
        let mut v = Vec::new();
        for i in -m..=m {
            for j in -m..=m {
                v.push((i, j));
            }
        }
        v
    }
}

impl PhaseSource for AntiWickQuadratureSource {
    fn abs_many(&self, pts: &[(f64, f64)]) -> Vec<f64> {
        let h = self.step;
        let r2 = self.radius * self.radius;
        let offs = self.offsets();
        let anchor = |x: f64| (x / h).round() as i64;
        let mut keys: Vec<(i64, i64)> = Vec::new();
        for &(x, xi) in pts {
            let (ci, cj) = (anchor(x), anchor(xi));
            for &(di, dj) in &offs {
                let (i, j) = (ci + di, cj + dj);
                let (wx, wxi) = (i as f64 * h, j as f64 * h);
                if (wx - x).powi(2) + (wxi - xi).powi(2) <= r2 {
                    keys.push((i, j));
                }
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let vals: Vec<Complex64> = keys
            .par_iter()
            .map(|&(i, j)| {
                let (wx, wxi) = (i as f64 * h, j as f64 * h);
                self.symbol.eval(wx, wxi) * self.inner.form.stft_at(WindowKind::Gaussian, wx, wxi)
            })
            .collect();
        let table: HashMap<(i64, i64), Complex64> = keys.into_iter().zip(vals).collect();
        let weight = h * h / (2.0 * PI);
        pts.par_iter()
            .map(|&(x, xi)| {
                let (ci, cj) = (anchor(x), anchor(xi));
                let mut acc = Complex64::new(0.0, 0.0);
                for &(di, dj) in &offs {
                    let (i, j) = (ci + di, cj + dj);
                    let (wx, wxi) = (i as f64 * h, j as f64 * h);
                    let d2 = (wx - x).powi(2) + (wxi - xi).powi(2);
                    if d2 > r2 {
                        continue;
                    }
                    let phase = -(xi - wxi) * (x + wx) / 2.0;
                    acc += table[&(i, j)] * Complex64::from_polar((-d2 / 4.0).exp(), phase);
                }
                (acc * weight).norm()
            })
            .collect()
    }

    fn reliable_band(&self) -> (f64, f64) {
        QUADRATURE_WINDOW
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `a^w u` or `A_a u` as a phase source. Polynomial symbols act exactly on
/// the closed form; otherwise anti-Wick goes through the kernel quadrature
/// and Weyl through the grid.
pub fn apply_symbol(
    u: &ClosedFormSource,
    a: &ShubinSymbol,
    quantization: Quantization,
    grid: &PhaseGrid,
    signal: Option<&SignalExpr>,
) -> Result<Box<dyn PhaseSource>> {
    if let Some(p) = a.expr.as_polynomial() {
        let form = match quantization {
            Quantization::Weyl => u.form.apply_weyl_poly(&p),
            Quantization::AntiWick => u.form.apply_antiwick_poly(&p),
        };
        let tag = match quantization {
            Quantization::Weyl => "weyl",
            Quantization::AntiWick => "antiwick",
        };
        return Ok(Box::new(ClosedFormSource::new(
            form,
            u.window,
            format!("{tag}({}; {})", a.expr, u.label),
        )));
    }
    match quantization {
        Quantization::AntiWick => Ok(Box::new(AntiWickQuadratureSource::new(u.clone(), a.expr.clone())?)),
        Quantization::Weyl => {
            let sig = signal.ok_or_else(|| {
                Error::Unsupported("Weyl action of a non-polynomial symbol needs a sampled signal".into())
            })?;
            let psi = make_window(u.window, grid)?;
            let s = SampledSignal::sample(sig, grid)?;
            let au = apply_matrix(&weyl_quantize(&a.expr, grid), grid, &s)?;
            Ok(Box::new(GridSource::from_signal(&au, &psi, format!("weyl({}; {})", a.expr, sig))?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_reproduces_constant_symbol() {
        let u = ClosedFormSource::from_expr(&SignalExpr::parse("planewave(2) + delta").unwrap(), WindowKind::Gaussian).unwrap();
        let q = AntiWickQuadratureSource::new(u.clone(), SymbolExpr::parse("1").unwrap()).unwrap();
        let pts = [(0.0, 0.0), (30.0, 2.0), (0.3, 40.0), (5.0, 5.0), (-100.0, 1.5)];
        let exact = u.abs_many(&pts);
        let approx = q.abs_many(&pts);
        for (e, a) in exact.iter().zip(&approx) {
            assert!((e - a).abs() <= 1e-6 * e.max(1e-3), "{e} vs {a}");
        }
    }

    #[test]
    fn quadrature_matches_polynomial_action() {
        let u = ClosedFormSource::from_expr(&SignalExpr::parse("chirp(2)").unwrap(), WindowKind::Gaussian).unwrap();
        let a = ShubinSymbol::parse("1 + x^2 + xi^2", None).unwrap();
        let exact = apply_symbol(&u, &a, Quantization::AntiWick, &PhaseGrid::new(1, 16.0, 64, 1).unwrap(), None).unwrap();
        let q = AntiWickQuadratureSource::new(u, a.expr.clone()).unwrap();
        let pts = [(10.0, 20.0), (20.0, 40.0), (3.0, 5.0)];
        for (e, v) in exact.abs_many(&pts).iter().zip(q.abs_many(&pts)) {
            assert!((e - v).abs() <= 1e-6 * e, "{e} vs {v}");
        }
    }
}
