//! Ray-sampled estimates of hypercharacteristic sets and microsupports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::fit::{fit_power, geomspace};
use super::DerivTable;
use crate::cone::angular_distance;
use crate::expr::SymbolExpr;

/// Below this, `|a|` counts as vanishing.
pub const DIVISION_FLOOR: f64 = 1e-300;

/// `D` equally spaced directions `2 pi j / D`.
pub fn uniform_directions(d: usize) -> Vec<f64> {
    (0..d).map(|j| TAU * j as f64 / d as f64).collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RayOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    /// rays at `theta - spread, theta, theta + spread`
    pub spread: f64,
    /// highest derivative order used
    pub k: u32,
}

impl RayOptions {
    /// `[5, 0.8 * radial reach]` for the given grid.
    pub fn for_grid(grid: &crate::grid::PhaseGrid) -> Self {
        RayOptions {
            r_max: 0.8 * grid.radial_reach(),
            ..Default::default()
        }
    }
}

impl Default for RayOptions {
    /// Annulus of the default grid (`L = 16`, `N = 256`).
    fn default() -> Self {
        RayOptions {
            r_min: 5.0,
            r_max: 12.8,
            radii: 32,
            spread: TAU / 720.0,
            k: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub tau_low: f64,
    pub tau_ratio: f64,
    pub r2_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            tau_low: 1e-3,
            tau_ratio: 1e3,
            r2_min: 0.9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharDirection {
    pub theta: f64,
    /// `inf |a| <z>^{-m'}` along the ray family
    pub lower: f64,
    /// `sup_{1 <= |alpha| <= K} |d^alpha a| <z>^{|alpha|} / |a|`
    pub ratio: f64,
    pub non_hypercharacteristic: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharSetEstimate {
    pub order: f64,
    pub thresholds: Thresholds,
    pub options: RayOptions,
    pub directions: Vec<CharDirection>,
}

impl CharSetEstimate {
    /// Directions flagged hypercharacteristic.
    pub fn char_directions(&self) -> Vec<f64> {
        self.directions
            .iter()
            .filter(|d| !d.non_hypercharacteristic)
            .map(|d| d.theta)
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.iter().all(|d| d.non_hypercharacteristic)
    }

    /// Verdict of the sampled direction nearest to `theta`.
    pub fn is_char(&self, theta: f64) -> bool {
        self.directions
            .iter()
            .min_by(|a, b| angular_distance(a.theta, theta).total_cmp(&angular_distance(b.theta, theta)))
            .map(|d| !d.non_hypercharacteristic)
            .unwrap_or(false)
    }
}

/// `char_{m_low}(a) ⊆ char_{m_high}(a)` for `m_low <= m_high`, direction by
/// direction on a shared direction set.
pub fn char_monotone(low: &CharSetEstimate, high: &CharSetEstimate) -> bool {
    low.order <= high.order
        && low.directions.len() == high.directions.len()
        && low
            .directions
            .iter()
            .zip(&high.directions)
            .all(|(l, h)| l.non_hypercharacteristic || !h.non_hypercharacteristic)
}

fn bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

fn ray_points(theta: f64, opts: &RayOptions) -> Vec<(f64, f64, f64)> {
    let mut pts = Vec::new();
    for &r in &geomspace(opts.r_min, opts.r_max, opts.radii) {
        for dt in [-opts.spread, 0.0, opts.spread] {
            let t = theta + dt;
            pts.push((r, r * t.cos(), r * t.sin()));
        }
    }
    pts
}

pub fn estimate_char_set(
    a: &SymbolExpr,
    m_prime: f64,
    directions: &[f64],
    opts: RayOptions,
    thresholds: Thresholds,
) -> CharSetEstimate {
    let table = DerivTable::new(a, opts.k);
    char_set_from_table(&table, m_prime, directions, opts, thresholds)
}

pub fn char_set_from_table(
    table: &DerivTable,
    m_prime: f64,
    directions: &[f64],
    opts: RayOptions,
    thresholds: Thresholds,
) -> CharSetEstimate {
    let idx: Vec<(u32, u32)> = table.indices().into_iter().filter(|(i, j)| i + j >= 1).collect();
    let dirs: Vec<CharDirection> = directions
        .par_iter()
        .map(|&theta| {
            let mut lower = f64::INFINITY;
            let mut ratio: f64 = 0.0;
            for (r, x, xi) in ray_points(theta, &opts) {
                let av = table.get(0, 0).eval(x, xi).norm();
                lower = lower.min(av * bracket(r).powf(-m_prime));
                if av < DIVISION_FLOOR || !av.is_finite() {
                    ratio = f64::INFINITY;
                    continue;
                }
                for &(i, j) in &idx {
                    let d = table.get(i, j).eval(x, xi).norm();
                    let q = d * bracket(r).powi((i + j) as i32) / av;
                    ratio = if q.is_nan() { f64::INFINITY } else { ratio.max(q) };
                }
            }
            let non_hyper = lower >= thresholds.tau_low && ratio <= thresholds.tau_ratio;
            CharDirection {
                theta,
                lower,
                ratio,
                non_hypercharacteristic: non_hyper,
            }
        })
        .collect();
    CharSetEstimate {
        order: m_prime,
        thresholds,
        options: opts,
        directions: dirs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    In,
    Out,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MicrosupportDirection {
    pub theta: f64,
    /// fitted decay exponent of `max_{|alpha| <= K} |d^alpha a|`; `None` for
    /// super-polynomial decay
    pub decay: Option<f64>,
    pub r2: Option<f64>,
    pub membership: Membership,
}

/// A direction is outside the microsupport when the derivatives decay
/// faster than `r^{-n_max}` along its ray family.
pub fn estimate_microsupport(
    a: &SymbolExpr,
    directions: &[f64],
    opts: RayOptions,
    n_max: f64,
    thresholds: Thresholds,
) -> Vec<MicrosupportDirection> {
    let table = DerivTable::new(a, opts.k);
    let idx = table.indices();
    let radii = geomspace(opts.r_min, opts.r_max, opts.radii);
    directions
        .par_iter()
        .map(|&theta| {
            let vals: Vec<f64> = radii
                .iter()
                .map(|&r| {
                    let mut best: f64 = 0.0;
                    for dt in [-opts.spread, 0.0, opts.spread] {
                        let (x, xi) = (r * (theta + dt).cos(), r * (theta + dt).sin());
                        for &(i, j) in &idx {
                            best = best.max(table.get(i, j).eval(x, xi).norm());
                        }
                    }
                    best
                })
                .collect();
            if vals.iter().any(|v| *v < DIVISION_FLOOR) {
                return MicrosupportDirection {
                    theta,
                    decay: None,
                    r2: None,
                    membership: Membership::Out,
                };
            }
            match fit_power(&radii, &vals) {
                Some(f) if f.r2 >= thresholds.r2_min => MicrosupportDirection {
                    theta,
                    decay: Some(f.decay()),
                    r2: Some(f.r2),
                    membership: if f.decay() > n_max { Membership::Out } else { Membership::In },
                },
                f => MicrosupportDirection {
                    theta,
                    decay: f.map(|f| f.decay()),
                    r2: f.map(|f| f.r2),
                    membership: Membership::Inconclusive,
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn sym(t: &str) -> SymbolExpr {
        SymbolExpr::parse(t).unwrap()
    }

    #[test]
    fn bracket_is_elliptic() {
        let e = estimate_char_set(&sym("bracket(2)"), 2.0, &uniform_directions(36), RayOptions::default(), Thresholds::default());
        assert!(e.is_empty());
    }

    #[test]
    fn coordinate_vanishes_on_frequency_axis() {
        let dirs = uniform_directions(360);
        let e = estimate_char_set(&sym("x"), 1.0, &dirs, RayOptions::default(), Thresholds::default());
        assert!(e.is_char(FRAC_PI_2));
        assert!(e.is_char(3.0 * FRAC_PI_2));
        assert!(!e.is_char(0.0));
        let lower = estimate_char_set(&sym("x"), 0.0, &dirs, RayOptions::default(), Thresholds::default());
        assert!(char_monotone(&lower, &e));
    }

    #[test]
    fn cutoff_char_set_and_microsupport() {
        let chi = sym("coneCutoff(-0.5, 0.5, 2, 0.1, 1)");
        let dirs = uniform_directions(72);
        let e = estimate_char_set(&chi, 0.0, &dirs, RayOptions::default(), Thresholds::default());
        for d in &e.directions {
            let off = angular_distance(d.theta, 0.0);
            if off > 0.5 {
                assert!(!d.non_hypercharacteristic, "{}", d.theta);
            }
            if off < 0.3 {
                assert!(d.non_hypercharacteristic, "{}", d.theta);
            }
        }
        let mu = estimate_microsupport(&chi, &dirs, RayOptions::default(), 8.0, Thresholds::default());
        for d in &mu {
            if angular_distance(d.theta, 0.0) > 0.5 + 0.01 {
                assert_eq!(d.membership, Membership::Out);
            }
        }
    }

    #[test]
    fn microsupport_examples() {
        let dirs = uniform_directions(24);
        let g = estimate_microsupport(&sym("gaussz"), &dirs, RayOptions::default(), 8.0, Thresholds::default());
        assert!(g.iter().all(|d| d.membership == Membership::Out));
        let b = estimate_microsupport(&sym("bracket(2)"), &dirs, RayOptions::default(), 8.0, Thresholds::default());
        for d in &b {
            assert_eq!(d.membership, Membership::In);
            assert!((d.decay.unwrap() + 2.0).abs() < 0.05);
        }
    }
}
