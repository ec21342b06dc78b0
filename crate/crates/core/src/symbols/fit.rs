//! Log-log least squares for power-law decay.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    /// slope of `log v` against `log r`
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

impl PowerFit {
    /// Decay exponent `gamma` in `v ~ r^{-gamma}`.
    pub fn decay(&self) -> f64 {
        -self.slope
    }
}

/// Log-scale scatter below which a series counts as noise-free.
pub const LOG_SCATTER: f64 = 0.05;

/// Fits `log v = slope * log r + intercept` over the points with `v > 0`.
/// Returns `None` with fewer than three usable points.
pub fn fit_power(rs: &[f64], vs: &[f64]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = rs
        .iter()
        .zip(vs)
        .filter(|(r, v)| **r > 0.0 && **v > 0.0 && v.is_finite())
        .map(|(r, v)| (r.ln(), v.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // total variation floored at LOG_SCATTER per point, so near-flat
    // series with tiny scatter count as well fitted
    let ss_res = (syy - slope * sxy).max(0.0);
    let r2 = 1.0 - ss_res / syy.max(nf * LOG_SCATTER * LOG_SCATTER);
    Some(PowerFit {
        slope,
        intercept,
        r2,
        points: n,
    })
}

/// `n` points geometrically spaced over `[lo, hi]`, endpoints included.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power() {
        let rs = geomspace(5.0, 50.0, 20);
        let vs: Vec<f64> = rs.iter().map(|r| 3.0 * r.powf(-2.5)).collect();
        let f = fit_power(&rs, &vs).unwrap();
        assert!((f.decay() - 2.5).abs() < 1e-12);
        assert!(f.r2 > 0.999999);
        let flat = vec![1.0; rs.len()];
        let g = fit_power(&rs, &flat).unwrap();
        assert_eq!(g.slope, 0.0);
        assert_eq!(g.r2, 1.0);
        assert!(fit_power(&rs[..2], &vs[..2]).is_none());
    }
}
