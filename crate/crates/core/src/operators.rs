//! Weyl and anti-Wick operators as dense matrices, and Shubin-Sobolev norms.
//!
//! Matrices act on sample vectors with the quadrature weight folded in:
//! `(A u)_j = sum_k A_jk u_k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expr::SymbolExpr;
use crate::grid::PhaseGrid;
use crate::sampled::SampledSignal;
use crate::stft::{make_window, stft, stft_adjoint, WindowKind};
use crate::symbols::seminorm::seminorm_screen;
use crate::symbols::{PhaseSymbol, ShubinSymbol};

pub const POWER_ITERATIONS: usize = 200;
pub const POWER_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantization {
    Weyl,
    AntiWick,
}

#[derive(Debug, Clone)]
pub struct OperatorRep {
    pub grid: PhaseGrid,
    pub matrix: DMatrix<Complex64>,
    pub source: String,
    pub quantization: Quantization,
    pub order: f64,
}

/// Weyl quantization on the grid. Anti-diagonal `s = j + k` shares the
/// midpoint `-L + s hx / 2`; the frequency integral over the unoversampled
/// DFT axis is one inverse FFT per anti-diagonal.
pub fn weyl_quantize<A: PhaseSymbol + ?Sized>(a: &A, grid: &PhaseGrid) -> DMatrix<Complex64> {
    let n = grid.n;
    let dxi = PI / grid.half_width;
    let hx = grid.hx();
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let diag: Vec<Vec<Complex64>> = (0..2 * n - 1)
        .into_par_iter()
        .map(|s| {
            let mid = -grid.half_width + s as f64 * hx / 2.0;
            // column l holds frequency (l - n/2) dxi; rotate so index 0 is l = n/2
            let mut buf: Vec<Complex64> = (0..n)
                .map(|l| {
                    let k = (l + n / 2) % n;
                    a.eval(mid, (k as f64 - (n / 2) as f64) * dxi)
                })
                .collect();
            ifft.process(&mut buf);
            buf.iter().map(|v| v / n as f64).collect()
        })
        .collect();
    DMatrix::from_fn(n, n, |j, k| {
        let m = (j + n - k) % n;
        // e^{2 pi i m (l - n/2) / n} summed over the rotated index
        diag[j + k][m]
    })
}

pub fn weyl_operator(a: &ShubinSymbol, grid: &PhaseGrid) -> OperatorRep {
    OperatorRep {
        grid: grid.clone(),
        matrix: weyl_quantize(&a.expr, grid),
        source: a.expr.to_string(),
        quantization: Quantization::Weyl,
        order: a.order,
    }
}

/// `A_a u = (2 pi)^{-1} V* (a V u)` with the Gaussian window.
pub fn anti_wick_apply<A: PhaseSymbol + ?Sized>(a: &A, u: &SampledSignal, psi0: &SampledSignal) -> Result<SampledSignal> {
    let v = stft(u, psi0)?;
    let av = v.multiplied(|x, xi| a.eval(x, xi));
    let mut out = stft_adjoint(&av, psi0)?.scaled(Complex64::new(1.0 / (2.0 * PI), 0.0));
    out.provenance = u.provenance.as_ref().map(|p| format!("antiwick({p})"));
    Ok(out)
}

/// Dense matrix of the anti-Wick operator, column by column.
pub fn anti_wick_matrix<A: PhaseSymbol + ?Sized>(a: &A, grid: &PhaseGrid) -> Result<DMatrix<Complex64>> {
    let psi0 = make_window(WindowKind::Gaussian, grid)?;
    let n = grid.n;
    let cols: Vec<Vec<Complex64>> = (0..n)
        .map(|k| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[k] = Complex64::new(1.0, 0.0);
            let u = SampledSignal::from_vec(grid, e, None)?;
            Ok(anti_wick_apply(a, &u, &psi0)?.data)
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |j, k| cols[k][j]))
}

pub fn anti_wick_operator(a: &ShubinSymbol, grid: &PhaseGrid) -> Result<OperatorRep> {
    Ok(OperatorRep {
        grid: grid.clone(),
        matrix: anti_wick_matrix(&a.expr, grid)?,
        source: a.expr.to_string(),
        quantization: Quantization::AntiWick,
        order: a.order,
    })
}

impl OperatorRep {
    pub fn apply(&self, u: &SampledSignal) -> Result<SampledSignal> {
        apply_matrix(&self.matrix, &self.grid, u)
    }

    /// `self * other`
    pub fn compose(&self, other: &OperatorRep) -> Result<OperatorRep> {
        self.grid.check_same(&other.grid)?;
        Ok(OperatorRep {
            grid: self.grid.clone(),
            matrix: &self.matrix * &other.matrix,
            source: format!("({}) o ({})", self.source, other.source),
            quantization: self.quantization,
            order: self.order + other.order,
        })
    }

    /// `max |A - A^*|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for j in 0..m.nrows() {
            for k in 0..m.ncols() {
                worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
            }
        }
        worst
    }
}

pub fn apply_matrix(m: &DMatrix<Complex64>, grid: &PhaseGrid, u: &SampledSignal) -> Result<SampledSignal> {
    grid.check_same(&u.grid)?;
    if m.ncols() != u.len() {
        return Err(Error::GridMismatch("operator and signal sizes differ".into()));
    }
    let v = m * DVector::from_column_slice(&u.data);
    SampledSignal::from_vec(grid, v.iter().copied().collect(), None)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Size of the central spectral band: the lowest quarter of the spectrum.
pub fn central_band_size(n: usize) -> usize {
    (n / 4).max(1)
}

/// Orthonormal eigenvectors of the lowest `count` eigenvalues (by magnitude)
/// of a Hermitian matrix, as columns.
pub fn low_eigenvectors(m: &DMatrix<Complex64>, count: usize) -> DMatrix<Complex64> {
    let e = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|a, b| e.eigenvalues[*a].abs().total_cmp(&e.eigenvalues[*b].abs()));
    let cols: Vec<DVector<Complex64>> = order[..count].iter().map(|&i| e.eigenvectors.column(i).into_owned()).collect();
    DMatrix::from_columns(&cols)
}

/// Largest singular value by power iteration on `A^* A` from a seeded
/// random start.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let n = m.ncols();
    let mut v = DVector::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    v /= Complex64::new(v.norm(), 0.0);
    let mh = m.adjoint();
    let mut est = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = &mh * (m * &v);
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        est = nw.sqrt();
        v = w / Complex64::new(nw, 0.0);
    }
    est
}

/// Norm of `A` compressed to the span of the columns of `q` (orthonormal).
pub fn band_norm(m: &DMatrix<Complex64>, q: &DMatrix<Complex64>) -> f64 {
    operator_norm(&(q.adjoint() * m * q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QMethod {
    StftWeighted,
    Locop,
    WeylElliptic,
}

impl QMethod {
    pub const ALL: [QMethod; 3] = [QMethod::StftWeighted, QMethod::Locop, QMethod::WeylElliptic];

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "stft-weighted" => Ok(QMethod::StftWeighted),
            "locop" => Ok(QMethod::Locop),
            "weyl-elliptic" => Ok(QMethod::WeylElliptic),
            other => Err(Error::Precondition(format!(
                "unknown Q^s method `{other}` (expected stft-weighted, locop or weyl-elliptic)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            QMethod::StftWeighted => "stft-weighted",
            QMethod::Locop => "locop",
            QMethod::WeylElliptic => "weyl-elliptic",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QNormReport {
    pub s: f64,
    pub value: f64,
    pub method: QMethod,
    pub grid: PhaseGrid,
    pub window: String,
    pub signal: Option<String>,
}

fn weight(s: f64) -> impl Fn(f64, f64) -> Complex64 + Sync {
    move |x, xi| Complex64::new((1.0 + x * x + xi * xi).powf(s / 2.0), 0.0)
}

/// `||u||_{Q^s}` by one of three equivalent definitions:
/// `||<z>^s V u||`, `||A_{<z>^s} u||` or `||(<z>^s)^w u||`.
pub fn q_norm(u: &SampledSignal, s: f64, method: QMethod, psi: &SampledSignal) -> Result<QNormReport> {
    u.grid.check_same(&psi.grid)?;
    let value = match method {
        QMethod::StftWeighted => stft(u, psi)?.multiplied(weight(s)).norm(),
        QMethod::Locop => {
            let psi0 = make_window(WindowKind::Gaussian, &u.grid)?;
            anti_wick_apply(&weight(s), u, &psi0)?.norm()
        }
        QMethod::WeylElliptic => apply_matrix(&weyl_quantize(&weight(s), &u.grid), &u.grid, u)?.norm(),
    };
    Ok(QNormReport {
        s,
        value,
        method,
        grid: u.grid.clone(),
        window: psi.provenance.clone().unwrap_or_default(),
        signal: u.provenance.clone(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceFit {
    pub s: f64,
    pub n: usize,
    /// smallest `C` with every ratio of two methods in `[1/C, C]`
    pub constant: f64,
    /// `(signal, method, value)` rows
    pub values: Vec<(String, QMethod, f64)>,
}

/// Fits the equivalence constant of the three norms over a signal set.
pub fn fit_equivalence(signals: &[SampledSignal], s: f64, psi: &SampledSignal) -> Result<EquivalenceFit> {
    let mut values = Vec::new();
    let mut c: f64 = 1.0;
    for u in signals {
        let v: Vec<f64> = QMethod::ALL
            .iter()
            .map(|m| q_norm(u, s, *m, psi).map(|r| r.value))
            .collect::<Result<_>>()?;
        for i in 0..v.len() {
            for j in 0..v.len() {
                c = c.max(v[i] / v[j]);
            }
        }
        for (m, val) in QMethod::ALL.iter().zip(&v) {
            values.push((u.provenance.clone().unwrap_or_default(), *m, *val));
        }
    }
    Ok(EquivalenceFit {
        s,
        n: psi.grid.n,
        constant: c,
        values,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub symbol: String,
    pub order: f64,
    pub s: f64,
    pub method: QMethod,
    pub screen_pass: bool,
    /// `(N, sup ratio)` per grid
    pub sups: Vec<(usize, f64)>,
    pub relative_change: f64,
    pub pass: bool,
}

/// `sup_u ||a^w u||_{Q^{s-m}} / ||u||_{Q^s}` on two grids; passes when finite
/// and the two sups differ by less than 20%.
pub fn q_boundedness_check(
    a: &ShubinSymbol,
    s: f64,
    signals: &[SymbolOrSignal],
    grids: &[PhaseGrid],
    method: QMethod,
) -> Result<BoundednessReport> {
    let screen = seminorm_screen(a, a.order, 5.0, 50.0, 3)?;
    let mut report = BoundednessReport {
        symbol: a.expr.to_string(),
        order: a.order,
        s,
        method,
        screen_pass: screen.pass,
        sups: Vec::new(),
        relative_change: f64::NAN,
        pass: false,
    };
    if !screen.pass {
        return Ok(report);
    }
    for g in grids {
        let psi = make_window(WindowKind::Gaussian, g)?;
        let op = weyl_quantize(&a.expr, g);
        let mut sup: f64 = 0.0;
        for sig in signals {
            let u = SampledSignal::sample(sig, g)?;
            let au = apply_matrix(&op, g, &u)?;
            let num = q_norm(&au, s - a.order, method, &psi)?.value;
            let den = q_norm(&u, s, method, &psi)?.value;
            sup = sup.max(num / den);
        }
        report.sups.push((g.n, sup));
    }
    let first = report.sups.first().map(|p| p.1).unwrap_or(f64::NAN);
    let last = report.sups.last().map(|p| p.1).unwrap_or(f64::NAN);
    report.relative_change = (last - first).abs() / first;
    report.pass = report.sups.iter().all(|p| p.1.is_finite()) && report.relative_change < 0.2;
    Ok(report)
}

/// Test signals for the boundedness check are given as expressions so they
/// can be resampled on each grid.
pub type SymbolOrSignal = crate::expr::SignalExpr;

/// Convenience: Weyl matrix of a parsed symbol.
pub fn weyl_of(text: &str, grid: &PhaseGrid) -> Result<DMatrix<Complex64>> {
    Ok(weyl_quantize(&SymbolExpr::parse(text)?, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::SignalExpr;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(1, 16.0, 256, 1).unwrap()
    }

    #[test]
    fn identity_and_multiplication() {
        let g = grid();
        let one = weyl_of("1", &g).unwrap();
        let x = weyl_of("x", &g).unwrap();
        for j in 0..g.n {
            for k in 0..g.n {
                let id = if j == k { 1.0 } else { 0.0 };
                assert!((one[(j, k)] - id).norm() < 1e-8);
                let xd = if j == k { g.x(j) } else { 0.0 };
                assert!((x[(j, k)] - xd).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn harmonic_oscillator_spectrum() {
        let g = grid();
        let h = weyl_of("x^2 + xi^2", &g).unwrap();
        let ev = hermitian_eigenvalues(&h);
        for k in 0..9 {
            let want = (2 * k + 1) as f64;
            assert!((ev[k] - want).abs() / want < 1e-3, "{k}: {}", ev[k]);
        }
    }

    #[test]
    fn real_symbols_are_hermitian() {
        let g = PhaseGrid::new(1, 8.0, 64, 1).unwrap();
        let a = ShubinSymbol::parse("x * xi + bracket(1) * coneCutoff(0, 1, 2, 0.2, 1)", None).unwrap();
        assert!(weyl_operator(&a, &g).hermitian_defect() < 1e-8);
    }

    #[test]
    fn positivity_of_anti_wick() {
        let g = PhaseGrid::new(1, 8.0, 64, 1).unwrap();
        let psi0 = make_window(WindowKind::Gaussian, &g).unwrap();
        let a = SymbolExpr::parse("coneCutoff(0, 2, 1, 0.3, 1) * bracket(1)").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let data = (0..g.n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let u = SampledSignal::from_vec(&g, data, None).unwrap();
            let q = anti_wick_apply(&a, &u, &psi0).unwrap().inner(&u).unwrap();
            assert!(q.re >= -1e-10);
        }
    }

    #[test]
    fn composition_is_associative() {
        let g = PhaseGrid::new(1, 8.0, 64, 1).unwrap();
        let a = weyl_operator(&ShubinSymbol::parse("x", None).unwrap(), &g);
        let b = weyl_operator(&ShubinSymbol::parse("xi", None).unwrap(), &g);
        let u = SampledSignal::sample(&SignalExpr::parse("hermite(2)").unwrap(), &g).unwrap();
        let lhs = a.apply(&b.apply(&u).unwrap()).unwrap();
        let rhs = a.compose(&b).unwrap().apply(&u).unwrap();
        assert!(lhs.rel_diff(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn q_norm_of_window() {
        let g = grid();
        let psi = make_window(WindowKind::Gaussian, &g).unwrap();
        let r = q_norm(&psi, 0.0, QMethod::StftWeighted, &psi).unwrap();
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-6);
        assert!(QMethod::parse("sobolev").is_err());
    }

    #[test]
    fn weyl_product_on_central_band() {
        let g = grid();
        let x = weyl_of("x", &g).unwrap();
        let xi = weyl_of("xi", &g).unwrap();
        let xxi = weyl_quantize(&|x: f64, xi: f64| Complex64::new(x * xi, 0.5), &g);
        let q = low_eigenvectors(&weyl_of("x^2 + xi^2", &g).unwrap(), central_band_size(g.n));
        let d = &x * &xi - xxi;
        assert!(band_norm(&d, &q) < 1e-3, "{}", band_norm(&d, &q));
    }

    #[test]
    fn power_iteration() {
        let m = DMatrix::from_fn(3, 3, |i, j| Complex64::new(if i == j { (i + 1) as f64 } else { 0.0 }, 0.0));
        assert!((operator_norm(&m) - 3.0).abs() < 1e-10);
    }
}
