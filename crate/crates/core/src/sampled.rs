//! Signals sampled on the spatial axis of a [`PhaseGrid`].

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::expr::SignalExpr;
use crate::grid::PhaseGrid;

/// Relative boundary level above which a decaying signal triggers a warning.
pub const BOUNDARY_WARN_LEVEL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledSignal {
    pub grid: PhaseGrid,
    pub data: Vec<Complex64>,
    pub provenance: Option<String>,
    /// max |u| on the outermost 5% of the axis (both ends)
    pub boundary_max: f64,
    pub warnings: Vec<String>,
}

fn zero(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

/// Reads a `re,im` (or `x,re,im`, as written by `to_csv`) CSV with exactly
/// `n` data rows.
/// Blank lines, `#` comments and a non-numeric header row are skipped.
pub fn read_csv_samples(path: &Path, n: usize) -> Result<Vec<Complex64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::with_capacity(n);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = cols.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 2 => out.push(Complex64::new(v[0], v[1])),
            Ok(v) if v.len() == 3 => out.push(Complex64::new(v[1], v[2])),
            Err(_) if out.is_empty() && lineno == 0 => continue,
            _ => {
                return Err(Error::Eval(format!(
                    "{}:{}: expected numeric columns `re,im` or `x,re,im`",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if out.len() != n {
        return Err(Error::GridMismatch(format!(
            "{} has {} rows, grid has N = {n}",
            path.display(),
            out.len()
        )));
    }
    Ok(out)
}

fn sample_node(e: &SignalExpr, grid: &PhaseGrid, warnings: &mut Vec<String>) -> Result<Vec<Complex64>> {
    let n = grid.n;
    Ok(match e {
        SignalExpr::Sum(ts) => {
            let mut acc = zero(n);
            for t in ts {
                let v = sample_node(t, grid, warnings)?;
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += b;
                }
            }
            acc
        }
        SignalExpr::Product(fs) => {
            let mut acc = vec![Complex64::new(1.0, 0.0); n];
            for f in fs {
                let v = sample_node(f, grid, warnings)?;
                for (a, b) in acc.iter_mut().zip(v) {
                    *a *= b;
                }
            }
            acc
        }
        SignalExpr::Delta(x0) => {
            let j = grid.nearest_index(*x0).ok_or_else(|| {
                Error::Eval(format!("delta location {x0} lies outside the grid"))
            })?;
            if (grid.x(j) - x0).abs() > 1e-9 * grid.hx() {
                warnings.push(format!(
                    "delta({x0}) is off the lattice; placed at x = {}",
                    grid.x(j)
                ));
            }
            let mut v = zero(n);
            v[j] = Complex64::new(1.0 / grid.hx(), 0.0);
            v
        }
        SignalExpr::File(p) => read_csv_samples(Path::new(p), n)?,
        other => grid.xs().into_iter().map(|x| other.eval(x)).collect::<Result<_>>()?,
    })
}

impl SampledSignal {
    pub fn from_vec(grid: &PhaseGrid, data: Vec<Complex64>, provenance: Option<String>) -> Result<Self> {
        if data.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "sample vector has length {}, grid has N = {}",
                data.len(),
                grid.n
            )));
        }
        let boundary_max = boundary_max(&data);
        Ok(SampledSignal {
            grid: grid.clone(),
            data,
            provenance,
            boundary_max,
            warnings: Vec::new(),
        })
    }

    /// Samples `expr` at the grid nodes and records the boundary diagnostic.
    pub fn sample(expr: &SignalExpr, grid: &PhaseGrid) -> Result<Self> {
        let mut warnings = Vec::new();
        let data = sample_node(expr, grid, &mut warnings)?;
        let mut s = SampledSignal::from_vec(grid, data, Some(expr.to_string()))?;
        let interior = s.max_abs();
        if !expr.has_nondecaying_part() && interior > 0.0 && s.boundary_max > BOUNDARY_WARN_LEVEL * interior {
            warnings.push(format!(
                "boundary decay: max |u| on the outer 5% is {:.3e} of the peak for `{expr}`",
                s.boundary_max / interior
            ));
        }
        s.warnings = warnings;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `(sum |u_j|^2 hx)^{1/2}`
    pub fn norm(&self) -> f64 {
        (self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.hx()).sqrt()
    }

    /// `sum u_j conj(v_j) hx`
    pub fn inner(&self, other: &SampledSignal) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * self.grid.hx())
    }

    pub fn scaled(&self, c: Complex64) -> SampledSignal {
        let data = self.data.iter().map(|v| v * c).collect();
        SampledSignal::from_vec(&self.grid, data, None).unwrap()
    }

    pub fn axpy(&self, c: Complex64, other: &SampledSignal) -> Result<SampledSignal> {
        self.grid.check_same(&other.grid)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect();
        SampledSignal::from_vec(&self.grid, data, None)
    }

    /// Relative L2 distance `||u - v|| / ||v||`.
    pub fn rel_diff(&self, reference: &SampledSignal) -> Result<f64> {
        let d = self.axpy(Complex64::new(-1.0, 0.0), reference)?;
        Ok(d.norm() / reference.norm())
    }

    /// Circular shift by `k` lattice steps: `(T u)(x_j) = u(x_{j-k})`.
    pub fn shifted(&self, k: isize) -> SampledSignal {
        let n = self.len() as isize;
        let data = (0..n)
            .map(|j| self.data[((j - k).rem_euclid(n)) as usize])
            .collect();
        SampledSignal::from_vec(&self.grid, data, None).unwrap()
    }

    /// Riemann-sum Fourier transform `int u(y) e^{-i y w} dy` on a self-dual
    /// grid (`hx` equal to the frequency spacing), returned on the same axis.
    pub fn fourier(&self) -> Result<SampledSignal> {
        let g = &self.grid;
        if g.oversample != 1 || (g.hx() - g.dxi()).abs() > 1e-12 * g.hx() || g.n % 4 != 0 {
            return Err(Error::Precondition(
                "the lattice Fourier transform needs a self-dual grid (hx = pi/L, oversample 1)".into(),
            ));
        }
        let n = g.n;
        let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
        let mut buf: Vec<Complex64> = self.data.iter().enumerate().map(|(j, v)| v * sign(j)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let hx = g.hx();
        let data = buf.iter().enumerate().map(|(k, v)| v * sign(k) * hx).collect();
        SampledSignal::from_vec(g, data, self.provenance.as_ref().map(|p| format!("fourier({p})")))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,re,im\n");
        for (j, v) in self.data.iter().enumerate() {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", self.grid.x(j), v.re, v.im));
        }
        s
    }
}

fn boundary_max(data: &[Complex64]) -> f64 {
    let n = data.len();
    let edge = ((n as f64) * 0.05).ceil() as usize;
    data.iter()
        .enumerate()
        .filter(|(j, _)| *j < edge || *j >= n - edge)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max)
}
