//! Discrete short-time Fourier transform on a [`PhaseGrid`].
//!
//! `V u(x_j, xi_k) = hx * sum_n u(y_n) conj(psi(y_n - x_j)) e^{-i y_n xi_k}`.
//! The window is stored centered at `x = 0` and read circularly, so
//! `psi(y_n - x_j)` is sample `(n - j + N/2) mod N`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expr::signal::hermite_function;
use crate::grid::PhaseGrid;
use crate::sampled::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Gaussian,
    Hermite(u32),
}

impl WindowKind {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "gaussian" || t == "gauss" {
            return Ok(WindowKind::Gaussian);
        }
        if let Some(rest) = t.strip_prefix("hermite") {
            let inner = rest.trim().trim_start_matches('(').trim_end_matches(')').trim();
            let k: i64 = inner
                .parse()
                .map_err(|_| Error::Precondition(format!("bad window `{text}`")))?;
            if k < 0 {
                return Err(Error::Precondition(format!("hermite window degree {k} < 0")));
            }
            return Ok(WindowKind::Hermite(k as u32));
        }
        Err(Error::Precondition(format!("unknown window `{text}`")))
    }

    pub fn label(&self) -> String {
        match self {
            WindowKind::Gaussian => "gaussian".into(),
            WindowKind::Hermite(k) => format!("hermite({k})"),
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            WindowKind::Gaussian => 0,
            WindowKind::Hermite(k) => *k,
        }
    }
}

/// Window samples, renormalized to unit discrete L2 norm.
pub fn make_window(kind: WindowKind, grid: &PhaseGrid) -> Result<SampledSignal> {
    let k = kind.degree();
    let mut data: Vec<Complex64> = grid
        .xs()
        .into_iter()
        .map(|x| Complex64::new(hermite_function(k, x), 0.0))
        .collect();
    let norm = (data.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.hx()).sqrt();
    for v in &mut data {
        *v /= norm;
    }
    SampledSignal::from_vec(grid, data, Some(kind.label()))
}

/// Complex field on the phase lattice, rows indexed by `x_j`, columns by `xi_k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseField {
    pub grid: PhaseGrid,
    pub window: String,
    pub provenance: Option<String>,
    pub data: Vec<Complex64>,
}

impl PhaseField {
    pub fn zeros(grid: &PhaseGrid) -> Self {
        PhaseField {
            grid: grid.clone(),
            window: String::new(),
            provenance: None,
            data: vec![Complex64::new(0.0, 0.0); grid.n * grid.n_freq()],
        }
    }

    /// Samples `f(x, xi)` on the lattice.
    pub fn from_fn(grid: &PhaseGrid, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        let m = grid.n_freq();
        let xis = grid.xis();
        let data = (0..grid.n)
            .into_par_iter()
            .flat_map_iter(|j| {
                let x = grid.x(j);
                xis.iter().map(|&xi| f(x, xi)).collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        debug_assert_eq!(data.len(), grid.n * m);
        PhaseField {
            grid: grid.clone(),
            window: String::new(),
            provenance: None,
            data,
        }
    }

    pub fn cols(&self) -> usize {
        self.grid.n_freq()
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.data[j * self.cols() + k]
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        let m = self.cols();
        &self.data[j * m..(j + 1) * m]
    }

    /// `(sum |F|^2 hx dxi)^{1/2}`
    pub fn norm(&self) -> f64 {
        (self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.hx() * self.grid.dxi()).sqrt()
    }

    /// `sum F conj(G) hx dxi`
    pub fn inner(&self, other: &PhaseField) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * self.grid.hx()
            * self.grid.dxi())
    }

    /// Pointwise product with `a(x, xi)`.
    pub fn multiplied(&self, a: impl Fn(f64, f64) -> Complex64 + Sync) -> PhaseField {
        let m = self.cols();
        let xis = self.grid.xis();
        let data = self
            .data
            .par_chunks(m)
            .enumerate()
            .flat_map_iter(|(j, row)| {
                let x = self.grid.x(j);
                row.iter().zip(&xis).map(|(v, &xi)| v * a(x, xi)).collect::<Vec<_>>()
            })
            .collect();
        PhaseField {
            grid: self.grid.clone(),
            window: self.window.clone(),
            provenance: self.provenance.clone(),
            data,
        }
    }

    /// Bilinear interpolation of `|F|` at an arbitrary phase-space point.
    /// Returns `None` outside the lattice.
    pub fn abs_at(&self, x: f64, xi: f64) -> Option<f64> {
        let g = &self.grid;
        let fj = (x + g.half_width) / g.hx();
        let fk = xi / g.dxi() + (g.n_freq() / 2) as f64;
        if fj < 0.0 || fk < 0.0 {
            return None;
        }
        let (j0, k0) = (fj.floor() as usize, fk.floor() as usize);
        if j0 + 1 >= g.n || k0 + 1 >= g.n_freq() {
            return None;
        }
        let (tj, tk) = (fj - j0 as f64, fk - k0 as f64);
        let v = |j, k| self.get(j, k).norm();
        Some(
            (1.0 - tj) * ((1.0 - tk) * v(j0, k0) + tk * v(j0, k0 + 1))
                + tj * ((1.0 - tk) * v(j0 + 1, k0) + tk * v(j0 + 1, k0 + 1)),
        )
    }

    /// Rows `x, xi, re, im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,xi,re,im\n");
        let xis = self.grid.xis();
        for j in 0..self.grid.n {
            let x = self.grid.x(j);
            for (k, xi) in xis.iter().enumerate() {
                let v = self.get(j, k);
                s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", x, xi, v.re, v.im));
            }
        }
        s
    }

    /// Rows `x, xi, abs`, blank line between x-blocks (gnuplot `pm3d` layout).
    pub fn heatmap_csv(&self) -> String {
        let mut s = String::from("# x,xi,abs\n");
        let xis = self.grid.xis();
        for j in 0..self.grid.n {
            let x = self.grid.x(j);
            for (k, xi) in xis.iter().enumerate() {
                s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", x, xi, self.get(j, k).norm()));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: PhaseField = serde_json::from_str(text)?;
        if f.data.len() != f.grid.n * f.grid.n_freq() || f.data.iter().any(|c| !c.is_finite()) {
            return Err(Error::GridMismatch("phase field does not match its grid".into()));
        }
        Ok(f)
    }
}

fn window_index(n: usize, j: usize, i: usize) -> usize {
    // sample of psi(y_i - x_j)
    (i + n + n / 2 - j) % n
}

fn parity(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Discrete STFT of `u` with window `psi`.
pub fn stft(u: &SampledSignal, psi: &SampledSignal) -> Result<PhaseField> {
    u.grid.check_same(&psi.grid)?;
    let g = &u.grid;
    let (n, m) = (g.n, g.n_freq());
    let hx = g.hx();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let phase: Vec<Complex64> = g
        .xis()
        .iter()
        .map(|&xi| Complex64::from_polar(hx, g.half_width * xi))
        .collect();
    let data = (0..n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for i in 0..n {
                buf[i] = u.data[i] * psi.data[window_index(n, j, i)].conj() * parity(i);
            }
            fft.process(&mut buf);
            // the (-1)^i factor moves the zero frequency to column m/2
            (0..m)
                .map(|k| buf[k] * phase[k])
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(PhaseField {
        grid: g.clone(),
        window: psi.provenance.clone().unwrap_or_default(),
        provenance: u.provenance.clone(),
        data,
    })
}

/// Adjoint of [`stft`] for the inner products weighted by `hx` and `hx dxi`.
pub fn stft_adjoint(f: &PhaseField, psi: &SampledSignal) -> Result<SampledSignal> {
    f.grid.check_same(&psi.grid)?;
    let g = &f.grid;
    let (n, m) = (g.n, g.n_freq());
    let w = g.hx() * g.dxi();
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(m);
    let phase: Vec<Complex64> = g
        .xis()
        .iter()
        .map(|&xi| Complex64::from_polar(1.0, -g.half_width * xi))
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for k in 0..m {
                buf[k] = f.get(j, k) * phase[k];
            }
            ifft.process(&mut buf);
            (0..n)
                .map(|i| buf[i] * parity(i) * psi.data[window_index(n, j, i)])
                .collect()
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for row in &rows {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    for o in &mut out {
        *o *= w;
    }
    SampledSignal::from_vec(g, out, None)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MoyalResidual {
    /// `||(2 pi)^{-1} V* V u - u|| / ||u||`
    pub inversion: f64,
    /// `|(2 pi)^{-1} ||V u||^2 - ||u||^2| / ||u||^2`
    pub energy: f64,
}

pub fn moyal_residual(u: &SampledSignal, psi: &SampledSignal) -> Result<MoyalResidual> {
    let nu = u.norm();
    if nu == 0.0 {
        return Err(Error::Precondition("Moyal residual of the zero signal".into()));
    }
    let v = stft(u, psi)?;
    let back = stft_adjoint(&v, psi)?.scaled(Complex64::new(1.0 / (2.0 * PI), 0.0));
    let inversion = back.rel_diff(u)?;
    let energy = (v.norm().powi(2) / (2.0 * PI) - nu * nu).abs() / (nu * nu);
    Ok(MoyalResidual { inversion, energy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::SignalExpr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(1, 16.0, 256, 1).unwrap()
    }

    fn sig(text: &str, g: &PhaseGrid) -> SampledSignal {
        SampledSignal::sample(&SignalExpr::parse(text).unwrap(), g).unwrap()
    }

    #[test]
    fn window_values() {
        let g = grid();
        let w = make_window(WindowKind::Gaussian, &g).unwrap();
        assert!((w.data[128].re - PI.powf(-0.25)).abs() < 1e-14);
        assert!((w.data[136].re - PI.powf(-0.25) * (-0.5f64).exp()).abs() < 1e-14);
        let h1 = make_window(WindowKind::Hermite(1), &g).unwrap();
        assert!((h1.norm() - 1.0).abs() < 1e-10);
        assert!(WindowKind::parse("hermite(-1)").is_err());
        assert_eq!(WindowKind::parse("hermite(2)").unwrap(), WindowKind::Hermite(2));
    }

    #[test]
    fn gaussian_stft_magnitude() {
        let g = grid();
        let w = make_window(WindowKind::Gaussian, &g).unwrap();
        let v = stft(&w, &w).unwrap();
        let k0 = g.n_freq() / 2;
        assert!((v.get(128, k0).re - 1.0).abs() < 1e-6);
        for j in 0..g.n {
            for k in 0..g.n_freq() {
                let (x, xi) = (g.x(j), g.xi(k));
                if x.hypot(xi) <= 8.0 {
                    let want = (-(x * x + xi * xi) / 4.0).exp();
                    assert!((v.get(j, k).norm() - want).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn adjoint_pairing() {
        let g = PhaseGrid::new(1, 8.0, 64, 2).unwrap();
        let w = make_window(WindowKind::Hermite(1), &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut cplx = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let u = SampledSignal::from_vec(&g, (0..g.n).map(|_| cplx()).collect(), None).unwrap();
        let mut f = PhaseField::zeros(&g);
        for v in &mut f.data {
            *v = cplx();
        }
        let lhs = stft_adjoint(&f, &w).unwrap().inner(&u).unwrap();
        let rhs = f.inner(&stft(&u, &w).unwrap()).unwrap();
        assert!((lhs - rhs).norm() <= 1e-8 * rhs.norm());
    }

    #[test]
    fn moyal() {
        let g = grid();
        let w = make_window(WindowKind::Gaussian, &g).unwrap();
        let r = moyal_residual(&sig("hermite(3)", &g), &w).unwrap();
        assert!(r.inversion < 1e-6 && r.energy < 1e-6, "{r:?}");
        let r0 = moyal_residual(&w, &w).unwrap();
        assert!(r0.inversion < 1e-8 && r0.energy < 1e-8);
        let z = SampledSignal::from_vec(&g, vec![Complex64::new(0.0, 0.0); g.n], None).unwrap();
        assert!(moyal_residual(&z, &w).is_err());
        let back = stft_adjoint(&PhaseField::zeros(&g), &w).unwrap();
        assert_eq!(back.max_abs(), 0.0);
    }

    #[test]
    fn translation_covariance() {
        let g = grid();
        let w = make_window(WindowKind::Gaussian, &g).unwrap();
        let u = sig("gauss(-1, 2) + 0.5 * hermite(2)", &g);
        let k = 12;
        let a = stft(&u, &w).unwrap();
        let b = stft(&u.shifted(k as isize), &w).unwrap();
        for j in 0..g.n - k {
            for c in 0..g.n_freq() {
                assert!((b.get(j + k, c).norm() - a.get(j, c).norm()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn linearity() {
        let g = grid();
        let w = make_window(WindowKind::Gaussian, &g).unwrap();
        let (u, v) = (sig("hermite(2)", &g), sig("chirp(1)", &g));
        let a = Complex64::new(0.5, 2.0);
        let lhs = stft(&u.axpy(a, &v).unwrap(), &w).unwrap();
        let (su, sv) = (stft(&u, &w).unwrap(), stft(&v, &w).unwrap());
        for i in 0..lhs.data.len() {
            assert!((lhs.data[i] - (su.data[i] + a * sv.data[i])).norm() < 1e-12);
        }
    }

    #[test]
    fn json_roundtrip() {
        let g = PhaseGrid::new(1, 4.0, 16, 1).unwrap();
        let w = make_window(WindowKind::Gaussian, &g).unwrap();
        let v = stft(&w, &w).unwrap();
        let back = PhaseField::from_json(&v.to_json().unwrap()).unwrap();
        assert_eq!(back.data, v.data);
        assert!(v.to_csv().starts_with("x,xi,re,im\n"));
    }
}
