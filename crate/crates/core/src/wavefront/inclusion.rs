//! Threshold comparisons before and after applying an operator.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::cone::{angular_distance, Cone};
use crate::error::{Error, Result};
use crate::expr::symbol::{constant, product, scale, sum};
use crate::expr::{CutoffSpec, SignalExpr, SymbolExpr};
use crate::grid::PhaseGrid;
use crate::operators::Quantization;
use crate::stft::WindowKind;
use crate::symbols::charset::{char_monotone, estimate_char_set, uniform_directions, RayOptions, Thresholds};
use crate::symbols::seminorm::seminorm_screen;
use crate::symbols::ShubinSymbol;

use super::estimate::{estimate_wavefront, WavefrontEstimate, WfOptions};
use super::source::{apply_symbol, ClosedFormSource, GridSource, PhaseSource, QUADRATURE_WINDOW};

pub const DEFAULT_TOL: f64 = 0.3;

/// Signals used for corpus-wide checks.
pub const CORPUS: [&str; 8] = [
    "gauss(0, 0)",
    "hermite(1)",
    "hermite(3)",
    "gauss(1.5, -2)",
    "planewave(5)",
    "chirp(2)",
    "delta",
    "planewave(5) + delta",
];

pub fn corpus() -> Vec<SignalExpr> {
    CORPUS.iter().map(|t| SignalExpr::parse(t).expect("corpus entry parses")).collect()
}

/// Analytic source when the signal has a closed form, sampled otherwise.
pub fn source_for(u: &SignalExpr, window: WindowKind, grid: &PhaseGrid) -> Result<Box<dyn PhaseSource>> {
    if u.contains_file() {
        return Ok(Box::new(GridSource::from_expr(u, grid, window)?));
    }
    Ok(Box::new(ClosedFormSource::from_expr(u, window)?))
}

pub fn gabor_wf(u: &SignalExpr, window: WindowKind, grid: &PhaseGrid, opts: &WfOptions) -> Result<WavefrontEstimate> {
    estimate_wavefront(source_for(u, window, grid)?.as_ref(), opts)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SobolevWf {
    pub s: f64,
    /// direction indices in the estimated `WF_{Q^s}`
    pub members: Vec<usize>,
    pub estimate: WavefrontEstimate,
}

pub fn sobolev_wf(u: &SignalExpr, s: f64, window: WindowKind, grid: &PhaseGrid, opts: &WfOptions) -> Result<SobolevWf> {
    let estimate = gabor_wf(u, window, grid, opts)?;
    Ok(SobolevWf {
        s,
        members: estimate.sobolev_set(s),
        estimate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InclusionMode {
    Microlocal,
    Microelliptic,
    Filter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Ok,
    Violation,
    /// inconclusive fit on either side
    Excluded,
    /// hypercharacteristic direction, no claim
    Characteristic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionRecord {
    pub index: usize,
    pub theta: f64,
    pub before: f64,
    pub after: f64,
    /// signed slack of the tested inequality; negative on violation
    pub margin: f64,
    pub status: RecordStatus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EqualityCheck {
    /// `(theta, s*_Au - (s*_u - m))` at singular directions
    pub deviations: Vec<(f64, f64)>,
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionReport {
    pub mode: InclusionMode,
    pub quantization: Quantization,
    pub symbol: String,
    pub order: f64,
    pub m_prime: Option<f64>,
    pub s: Option<f64>,
    pub tol: f64,
    pub records: Vec<InclusionRecord>,
    pub violations: Vec<InclusionRecord>,
    pub excluded: Vec<f64>,
    pub notices: Vec<String>,
    pub char_monotone: Option<bool>,
    pub equality: Option<EqualityCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct InclusionOptions {
    pub wf: WfOptions,
    pub tol: f64,
    pub quantization: Quantization,
    /// grid for the sampled Weyl pipeline
    pub grid: PhaseGrid,
}

impl Default for InclusionOptions {
    fn default() -> Self {
        InclusionOptions {
            wf: WfOptions::default(),
            tol: DEFAULT_TOL,
            quantization: Quantization::Weyl,
            grid: PhaseGrid::new(1, 16.0, 256, 1).expect("default grid"),
        }
    }
}

/// Thresholds of `u` and of the operator image on a common fit window.
pub fn threshold_pair(
    a: &ShubinSymbol,
    u: &SignalExpr,
    opts: &InclusionOptions,
) -> Result<(WavefrontEstimate, WavefrontEstimate)> {
    let base = ClosedFormSource::from_expr(u, WindowKind::Gaussian)?;
    let au = apply_symbol(&base, a, opts.quantization, &opts.grid, Some(u))?;
    let mut wf = opts.wf.clone();
    if wf.fit_window.is_none() {
        wf.fit_window = Some(au.reliable_band());
    }
    let grid_path = a.expr.as_polynomial().is_none() && opts.quantization == Quantization::Weyl;
    let est_u = if grid_path {
        estimate_wavefront(&GridSource::from_expr(u, &opts.grid, WindowKind::Gaussian)?, &wf)?
    } else {
        estimate_wavefront(&base, &wf)?
    };
    let est_au = estimate_wavefront(au.as_ref(), &wf)?;
    Ok((est_u, est_au))
}

fn ge_slack(lhs: f64, rhs: f64) -> f64 {
    if lhs == f64::INFINITY && rhs == f64::INFINITY {
        0.0
    } else {
        lhs - rhs
    }
}

/// Microlocal: `s*_Au >= s*_u - m - tol`. Microelliptic: away from
/// `char_{m'}(a)`, `s*_u >= s*_Au + m' - tol`.
pub fn inclusion_check(
    a: &ShubinSymbol,
    u: &SignalExpr,
    s: Option<f64>,
    mode: InclusionMode,
    m_prime: Option<f64>,
    opts: &InclusionOptions,
) -> Result<InclusionReport> {
    if mode == InclusionMode::Filter {
        return Err(Error::Precondition("use filter_order_report for the filter mode".into()));
    }
    let screen = seminorm_screen(a, a.order, 5.0, 50.0, 3)?;
    if !screen.pass {
        return Err(Error::Precondition(format!(
            "`{}` fails the order-{} seminorm screen",
            a.expr, a.order
        )));
    }
    let m = a.order;
    let mp = match mode {
        InclusionMode::Microelliptic => Some(m_prime.unwrap_or(m)),
        _ => None,
    };
    let (est_u, est_au) = threshold_pair(a, u, opts)?;
    let dirs = uniform_directions(opts.wf.directions);
    let (chars, monotone) = match mp {
        Some(mp) => {
            let high = estimate_char_set(&a.expr, mp, &dirs, RayOptions::for_grid(&opts.grid), Thresholds::default());
            let low = estimate_char_set(&a.expr, mp - 1.0, &dirs, RayOptions::for_grid(&opts.grid), Thresholds::default());
            (Some(high.clone()), Some(char_monotone(&low, &high)))
        }
        None => (None, None),
    };
    let tol = opts.tol;
    let mut records = Vec::new();
    let mut excluded = Vec::new();
    for ru in &est_u.records {
        let Some(ra) = est_au.record(ru.index) else { continue };
        let (before, after) = (ru.s_star, ra.s_star);
        if !(ru.sobolev_conclusive && ra.sobolev_conclusive) {
            excluded.push(ru.theta);
            records.push(InclusionRecord {
                index: ru.index,
                theta: ru.theta,
                before,
                after,
                margin: f64::NAN,
                status: RecordStatus::Excluded,
            });
            continue;
        }
        let (margin, status) = match (mode, &chars) {
            (InclusionMode::Microelliptic, Some(c)) if c.directions[ru.index].non_hypercharacteristic == false => {
                (f64::NAN, RecordStatus::Characteristic)
            }
            (InclusionMode::Microelliptic, _) => {
                let slack = ge_slack(before, after + mp.unwrap_or(m) - tol);
                (slack, if slack >= 0.0 { RecordStatus::Ok } else { RecordStatus::Violation })
            }
            _ => {
                let slack = ge_slack(after, before - m - tol);
                (slack, if slack >= 0.0 { RecordStatus::Ok } else { RecordStatus::Violation })
            }
        };
        records.push(InclusionRecord {
            index: ru.index,
            theta: ru.theta,
            before,
            after,
            margin,
            status,
        });
    }
    let violations: Vec<InclusionRecord> =
        records.iter().filter(|r| r.status == RecordStatus::Violation).cloned().collect();
    let mut notices = Vec::new();
    if est_u.records.iter().all(|r| !r.singular()) {
        notices.push("no singular directions".to_string());
    }
    let equality = match (&chars, mp) {
        (Some(c), Some(mp)) if c.is_empty() && (mp - m).abs() < 1e-12 => {
            let deviations: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.status != RecordStatus::Excluded && r.before.is_finite())
                .map(|r| (r.theta, r.after - (r.before - m)))
                .collect();
            let max_deviation = deviations.iter().map(|d| d.1.abs()).fold(0.0, f64::max);
            Some(EqualityCheck {
                pass: max_deviation <= tol,
                deviations,
                max_deviation,
            })
        }
        _ => None,
    };
    let pass = violations.is_empty() && monotone.unwrap_or(true);
    Ok(InclusionReport {
        mode,
        quantization: opts.quantization,
        symbol: a.expr.to_string(),
        order: m,
        m_prime: mp,
        s,
        tol,
        records,
        violations,
        excluded,
        notices,
        char_monotone: monotone,
        equality,
        pass,
    })
}

#[derive(Debug, Clone)]
pub struct ConeFilter {
    pub chi1: SymbolExpr,
    pub chi2: SymbolExpr,
    pub symbol: ShubinSymbol,
    pub m: f64,
    pub overlap_width: f64,
}

fn arc_len(from: f64, to: f64) -> f64 {
    (to - from).rem_euclid(TAU)
}

/// `chi1` is the cone cutoff of `g1` with plateau on `g1 \ g2`;
/// `chi2 = <z>^{-m} (1 - chi1)`, so `chi1 + chi2 >= <z>^{-m}` everywhere.
pub fn build_cone_filter(g1: &Cone, g2: &Cone, m: f64, inner: f64, w_radial: f64) -> Result<ConeFilter> {
    if m < 0.0 {
        return Err(Error::Precondition(format!("filter order {m} must be nonnegative")));
    }
    let probe = uniform_directions(3600);
    if probe.iter().any(|&t| !g1.contains_direction(t) && !g2.contains_direction(t)) {
        return Err(Error::Cone("the two cones do not cover all directions".into()));
    }
    let only = |a: &Cone, b: &Cone| probe.iter().any(|&t| a.contains_direction_strictly(t, 1e-3) && !b.contains_direction(t));
    if !only(g1, g2) || !only(g2, g1) {
        return Err(Error::Cone("both set differences need nonempty angular interior".into()));
    }
    let w = arc_len(g2.theta_lo(), g1.theta_hi()).min(arc_len(g1.theta_lo(), g2.theta_hi()));
    if !(w > 0.0) {
        return Err(Error::Cone("the cones must overlap on both sides".into()));
    }
    let chi1 = SymbolExpr::cone_cutoff(CutoffSpec {
        theta_lo: g1.theta_lo(),
        theta_hi: g1.theta_lo() + g1.width(),
        inner,
        w_angle: w,
        w_radial,
    })?;
    let chi2 = product(vec![SymbolExpr::Bracket(-m), sum(vec![constant(1.0), scale(-1.0, chi1.clone())])]);
    let symbol = ShubinSymbol::new(sum(vec![chi1.clone(), chi2.clone()]), 0.0);
    Ok(ConeFilter {
        chi1,
        chi2,
        symbol,
        m,
        overlap_width: w,
    })
}

/// Direction indices of `a \ b` at least `gap` away from `b`.
fn region(a: &Cone, b: &Cone, d: usize, gap: f64) -> Vec<usize> {
    let step = TAU / d as f64;
    (0..d)
        .filter(|&j| {
            let t = j as f64 * step;
            a.contains_direction_strictly(t, gap)
                && !b.contains_direction(t)
                && angular_distance(t, b.theta_lo()).min(angular_distance(t, b.theta_hi())) > gap
        })
        .collect()
}

/// Per-region threshold shifts under the filter: none in `g1 \ g2`, `+m` in `g2 \ g1`.
pub fn filter_order_report(
    u: &SignalExpr,
    filter: &ConeFilter,
    g1: &Cone,
    g2: &Cone,
    opts: &InclusionOptions,
) -> Result<InclusionReport> {
    let mut wf = opts.wf.clone();
    let quadrature = filter.symbol.expr.as_polynomial().is_none() && opts.quantization == Quantization::AntiWick;
    if wf.fit_window.is_none() && quadrature {
        wf.fit_window = Some(QUADRATURE_WINDOW);
    }
    let base = ClosedFormSource::from_expr(u, WindowKind::Gaussian)?;
    let est_u = estimate_wavefront(&base, &wf)?;
    let d = wf.directions;
    let gap = (wf.half_width_steps + 1) as f64 * wf.step();
    let regions = [(region(g1, g2, d, gap), 0.0, "g1 minus g2"), (region(g2, g1, d, gap), filter.m, "g2 minus g1")];
    let mut notices = Vec::new();
    let mut wanted = Vec::new();
    for (dirs, _, name) in &regions {
        let sing: Vec<usize> = dirs
            .iter()
            .copied()
            .filter(|&j| est_u.record(j).map(|r| r.singular()).unwrap_or(false))
            .collect();
        if sing.is_empty() {
            notices.push(format!("no singular directions in {name}; region skipped"));
        }
        wanted.extend(sing);
    }
    let mut records = Vec::new();
    let mut excluded = Vec::new();
    if !wanted.is_empty() {
        let au = apply_symbol(&base, &filter.symbol, opts.quantization, &opts.grid, Some(u))?;
        let mut wf_au = wf.clone();
        wf_au.subset = Some(wanted.clone());
        let est_au = estimate_wavefront(au.as_ref(), &wf_au)?;
        for (dirs, shift, _) in &regions {
            for &j in dirs {
                if !wanted.contains(&j) {
                    continue;
                }
                let ru = est_u.record(j).expect("estimated");
                let ra = est_au.record(j).expect("estimated");
                let mut rec = InclusionRecord {
                    index: j,
                    theta: ru.theta,
                    before: ru.s_star,
                    after: ra.s_star,
                    margin: f64::NAN,
                    status: RecordStatus::Excluded,
                };
                if ra.sobolev_conclusive {
                    let dev = (ra.s_star - (ru.s_star + shift)).abs();
                    rec.margin = opts.tol - dev;
                    rec.status = if dev <= opts.tol { RecordStatus::Ok } else { RecordStatus::Violation };
                } else {
                    excluded.push(ru.theta);
                }
                records.push(rec);
            }
        }
    }
    if wanted.is_empty() {
        notices.push("no singular directions".to_string());
    }
    let violations: Vec<InclusionRecord> =
        records.iter().filter(|r| r.status == RecordStatus::Violation).cloned().collect();
    Ok(InclusionReport {
        mode: InclusionMode::Filter,
        quantization: opts.quantization,
        symbol: filter.symbol.expr.to_string(),
        order: filter.symbol.order,
        m_prime: Some(-filter.m),
        s: None,
        tol: opts.tol,
        pass: violations.is_empty(),
        records,
        violations,
        excluded,
        notices,
        char_monotone: None,
        equality: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cones() -> (Cone, Cone) {
        (
            Cone::from_degrees(-150.0, 150.0, 0.0).unwrap(),
            Cone::from_degrees(30.0, 330.0, 0.0).unwrap(),
        )
    }

    #[test]
    fn filter_shape() {
        let (g1, g2) = cones();
        let f = build_cone_filter(&g1, &g2, 2.0, 2.0, 1.0).unwrap();
        let at = |deg: f64, r: f64| {
            let t = deg.to_radians();
            f.symbol.expr.eval(r * t.cos(), r * t.sin()).re
        };
        for r in [50.0, 500.0] {
            assert!((at(0.0, r) - 1.0).abs() < 1e-12);
            let b = (1.0 + r * r).powf(-1.0);
            assert!((at(180.0, r) / b - 1.0).abs() < 1e-12);
            for deg in (0..360).step_by(5) {
                assert!(at(deg as f64, r) >= b * (1.0 - 1e-12));
            }
        }
        let dirs = uniform_directions(360);
        let c = estimate_char_set(&f.symbol.expr, -2.0, &dirs, RayOptions::default(), Thresholds::default());
        assert!(c.is_empty(), "{:?}", c.char_directions());
    }

    #[test]
    fn filter_preconditions() {
        let a = Cone::from_degrees(0.0, 100.0, 0.0).unwrap();
        let b = Cone::from_degrees(90.0, 200.0, 0.0).unwrap();
        assert!(build_cone_filter(&a, &b, 2.0, 2.0, 1.0).is_err());
        let (g1, g2) = cones();
        assert!(build_cone_filter(&g1, &g2, -1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn inclusion_rejects_unscreened_symbol() {
        let a = ShubinSymbol::parse("x^3", Some(1.0)).unwrap();
        let u = SignalExpr::parse("delta").unwrap();
        let r = inclusion_check(&a, &u, None, InclusionMode::Microlocal, None, &InclusionOptions::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn schwartz_filter_report_is_vacuous() {
        let (g1, g2) = cones();
        let f = build_cone_filter(&g1, &g2, 2.0, 2.0, 1.0).unwrap();
        let u = SignalExpr::parse("hermite(2)").unwrap();
        let o = InclusionOptions {
            quantization: Quantization::AntiWick,
            ..Default::default()
        };
        let r = filter_order_report(&u, &f, &g1, &g2, &o).unwrap();
        assert!(r.pass && r.records.is_empty());
        assert!(r.notices.iter().any(|n| n == "no singular directions"));
    }
}
