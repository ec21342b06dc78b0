//! Pass/fail checks of the structural claims, shared by the CLI, the
//! bindings and the acceptance suite.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::SignalExpr;
use crate::grid::PhaseGrid;
use crate::operators::{anti_wick_apply, apply_matrix, weyl_quantize, Quantization};
use crate::sampled::SampledSignal;
use crate::stft::{make_window, moyal_residual, WindowKind};
use crate::symbols::wick::WickSmoothed;
use crate::symbols::ShubinSymbol;
use crate::wavefront::{
    estimate_wavefront, gabor_wf, inclusion_check, rotate_indices, sets_agree, ClosedFormSource, InclusionMode,
    InclusionOptions, WfOptions,
};

pub const MOYAL_TOL: f64 = 1e-6;
pub const WEYL_WICK_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Moyal,
    Weylwick,
    Microlocal,
    Microelliptic,
    WindowInvariance,
    FourierRotation,
    UnionEquality,
}

impl CheckKind {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(match text {
            "moyal" => CheckKind::Moyal,
            "weylwick" => CheckKind::Weylwick,
            "microlocal" => CheckKind::Microlocal,
            "microelliptic" => CheckKind::Microelliptic,
            "window-invariance" => CheckKind::WindowInvariance,
            "fourier-rotation" => CheckKind::FourierRotation,
            "union-equality" => CheckKind::UnionEquality,
            other => return Err(Error::Precondition(format!("unknown check `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: CheckKind,
    pub signal: String,
    pub symbol: Option<String>,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub detail: serde_json::Value,
}

impl CheckReport {
    fn new(check: CheckKind, u: &SignalExpr) -> Self {
        CheckReport {
            check,
            signal: u.to_string(),
            symbol: None,
            pass: false,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            detail: serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub grid: PhaseGrid,
    pub window: WindowKind,
    pub wf: WfOptions,
    pub tol: f64,
    pub quantization: Quantization,
    /// resolution tolerance for direction-set comparisons, in steps
    pub resolution_steps: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            grid: PhaseGrid::new(1, 16.0, 256, 1).expect("default grid"),
            window: WindowKind::Gaussian,
            wf: WfOptions::default(),
            tol: crate::wavefront::DEFAULT_TOL,
            quantization: Quantization::Weyl,
            resolution_steps: 1,
        }
    }
}

/// `(2 pi)^{-1} V* V u = u` and the energy identity.
pub fn check_moyal(u: &SignalExpr, opts: &CheckOptions) -> Result<CheckReport> {
    let s = SampledSignal::sample(u, &opts.grid)?;
    let psi = make_window(opts.window, &opts.grid)?;
    let r = moyal_residual(&s, &psi)?;
    let mut rep = CheckReport::new(CheckKind::Moyal, u);
    rep.metrics.insert("inversion".into(), r.inversion);
    rep.metrics.insert("energy".into(), r.energy);
    rep.notes.extend(s.warnings.iter().cloned());
    rep.pass = r.inversion < MOYAL_TOL && r.energy < MOYAL_TOL;
    Ok(rep)
}

/// `A_a u` against the Weyl quantization of the Gaussian-smoothed symbol.
pub fn check_weyl_wick(a: &ShubinSymbol, u: &SignalExpr, opts: &CheckOptions) -> Result<CheckReport> {
    let g = &opts.grid;
    let s = SampledSignal::sample(u, g)?;
    let psi0 = make_window(WindowKind::Gaussian, g)?;
    let lhs = anti_wick_apply(&a.expr, &s, &psi0)?;
    let smooth = WickSmoothed::new(&a.expr);
    let rhs = apply_matrix(&weyl_quantize(&smooth, g), g, &s)?;
    let diff = lhs.axpy(num_complex::Complex64::new(-1.0, 0.0), &rhs)?.norm() / s.norm();
    let mut rep = CheckReport::new(CheckKind::Weylwick, u);
    rep.symbol = Some(a.expr.to_string());
    rep.metrics.insert("relative_difference".into(), diff);
    rep.metrics.insert("truncation_bound".into(), smooth.truncation_bound);
    rep.pass = diff <= WEYL_WICK_TOL;
    Ok(rep)
}

/// Microlocality or micro-hypoellipticity of `a` on `u`.
pub fn check_inclusion(
    a: &ShubinSymbol,
    u: &SignalExpr,
    mode: InclusionMode,
    m_prime: Option<f64>,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let io = InclusionOptions {
        wf: opts.wf.clone(),
        tol: opts.tol,
        quantization: opts.quantization,
        grid: opts.grid.clone(),
    };
    let r = inclusion_check(a, u, None, mode, m_prime, &io)?;
    let kind = if mode == InclusionMode::Microlocal {
        CheckKind::Microlocal
    } else {
        CheckKind::Microelliptic
    };
    let mut rep = CheckReport::new(kind, u);
    rep.symbol = Some(a.expr.to_string());
    rep.metrics.insert("violations".into(), r.violations.len() as f64);
    rep.metrics.insert("excluded".into(), r.excluded.len() as f64);
    if let Some(eq) = &r.equality {
        rep.metrics.insert("equality_max_deviation".into(), eq.max_deviation);
    }
    rep.notes.extend(r.notices.iter().cloned());
    rep.pass = r.pass;
    rep.detail = serde_json::to_value(&r)?;
    Ok(rep)
}

/// Direction sets with the Gaussian and the first Hermite window agree.
pub fn check_window_invariance(u: &SignalExpr, opts: &CheckOptions) -> Result<CheckReport> {
    let a = gabor_wf(u, WindowKind::Gaussian, &opts.grid, &opts.wf)?;
    let b = gabor_wf(u, WindowKind::Hermite(1), &opts.grid, &opts.wf)?;
    let d = opts.wf.directions;
    let tol = opts.resolution_steps;
    let gabor = sets_agree(&a.gabor_upper(), &b.gabor_upper(), d, tol);
    let sobolev = sets_agree(&a.sobolev_union(), &b.sobolev_union(), d, tol);
    let mut rep = CheckReport::new(CheckKind::WindowInvariance, u);
    rep.metrics.insert("gabor_agree".into(), gabor as u8 as f64);
    rep.metrics.insert("sobolev_agree".into(), sobolev as u8 as f64);
    rep.pass = gabor && sobolev;
    rep.detail = serde_json::json!({
        "gaussian": a.gabor_upper(),
        "hermite1": b.gabor_upper(),
    });
    Ok(rep)
}

/// WF of the Fourier transform is the WF of `u` turned by -90 degrees.
pub fn check_fourier_rotation(u: &SignalExpr, opts: &CheckOptions) -> Result<CheckReport> {
    let src = ClosedFormSource::from_expr(u, opts.window)?;
    let a = estimate_wavefront(&src, &opts.wf)?;
    let f = estimate_wavefront(&src.fourier()?, &opts.wf)?;
    let d = opts.wf.directions;
    let rotated = rotate_indices(&a.gabor_upper(), -((d / 4) as isize), d);
    let mut rep = CheckReport::new(CheckKind::FourierRotation, u);
    rep.pass = d % 4 == 0 && sets_agree(&f.gabor_upper(), &rotated, d, opts.resolution_steps);
    rep.detail = serde_json::json!({ "rotated": rotated, "fourier": f.gabor_upper() });
    Ok(rep)
}

/// Directions with finite Sobolev threshold equal the Gabor set.
pub fn check_union_equality(u: &SignalExpr, opts: &CheckOptions) -> Result<CheckReport> {
    let e = gabor_wf(u, opts.window, &opts.grid, &opts.wf)?;
    let mut rep = CheckReport::new(CheckKind::UnionEquality, u);
    rep.pass = e.union_consistent(opts.resolution_steps);
    rep.metrics.insert("inconclusive".into(), e.inconclusive().len() as f64);
    rep.detail = serde_json::json!({ "union": e.sobolev_union(), "gabor": e.gabor_set() });
    Ok(rep)
}

pub fn run_check(kind: CheckKind, u: &SignalExpr, a: Option<&ShubinSymbol>, opts: &CheckOptions) -> Result<CheckReport> {
    let need = || a.ok_or_else(|| Error::Precondition("this check needs a symbol".into()));
    match kind {
        CheckKind::Moyal => check_moyal(u, opts),
        CheckKind::Weylwick => check_weyl_wick(need()?, u, opts),
        CheckKind::Microlocal => check_inclusion(need()?, u, InclusionMode::Microlocal, None, opts),
        CheckKind::Microelliptic => check_inclusion(need()?, u, InclusionMode::Microelliptic, None, opts),
        CheckKind::WindowInvariance => check_window_invariance(u, opts),
        CheckKind::FourierRotation => check_fourier_rotation(u, opts),
        CheckKind::UnionEquality => check_union_equality(u, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moyal_on_hermite() {
        let u = SignalExpr::parse("hermite(3)").unwrap();
        let r = check_moyal(&u, &CheckOptions::default()).unwrap();
        assert!(r.pass, "{:?}", r.metrics);
    }

    #[test]
    fn weyl_wick_harmonic() {
        let a = ShubinSymbol::parse("x^2 + xi^2", None).unwrap();
        let u = SignalExpr::parse("hermite(2)").unwrap();
        let r = check_weyl_wick(&a, &u, &CheckOptions::default()).unwrap();
        assert!(r.pass, "{:?}", r.metrics);
    }

    #[test]
    fn parse_kinds() {
        assert_eq!(CheckKind::parse("fourier-rotation").unwrap(), CheckKind::FourierRotation);
        assert!(CheckKind::parse("bogus").is_err());
    }
}
