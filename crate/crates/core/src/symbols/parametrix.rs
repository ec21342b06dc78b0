//! Truncated micro-parametrix `b = b_0 + ... + b_{J-1}` with
//! `b_0 = chi / a` and `b_{j+1} = -r_j / a`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::charset::{estimate_char_set, uniform_directions, RayOptions, Thresholds};
use super::fit::{fit_power, geomspace, PowerFit};
use super::weyl_product::weyl_product_range;
use super::ShubinSymbol;
use crate::error::{Error, Result};
use crate::expr::symbol::{pow, product, scale, sum};
use crate::expr::SymbolExpr;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ParametrixOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    pub directions: usize,
    pub thresholds: Thresholds,
}

impl Default for ParametrixOptions {
    fn default() -> Self {
        ParametrixOptions {
            r_min: 10.0,
            r_max: 1000.0,
            radii: 24,
            directions: 1440,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Parametrix {
    pub terms: Vec<SymbolExpr>,
    pub b: SymbolExpr,
    /// `(b_0 + ... + b_{J-1}) # a - chi` with the product truncated at level `J + 1`
    pub remainder: SymbolExpr,
    pub report: ParametrixReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParametrixReport {
    pub n_terms: u32,
    pub truncation: u32,
    /// sampled directions where `chi` does not vanish
    pub support_directions: usize,
    pub radii: Vec<f64>,
    /// sup of the remainder over the support directions, per radius
    pub remainder_sup: Vec<f64>,
    pub fit: Option<PowerFit>,
    /// `None` when the remainder vanishes on every shell
    pub decay: Option<f64>,
}

/// Builds the parametrix of `a` relative to the cutoff `chi` and samples its
/// remainder on the directions where `chi` is nonzero.
pub fn parametrix_truncated(
    a: &ShubinSymbol,
    chi: &SymbolExpr,
    m_prime: f64,
    n_terms: u32,
    opts: ParametrixOptions,
) -> Result<Parametrix> {
    if n_terms == 0 {
        return Err(Error::Precondition("at least one parametrix term is required".into()));
    }
    let n = n_terms + 1;
    a.check_order(n - 1)?;
    let all = uniform_directions(opts.directions);
    let support: Vec<f64> = all
        .iter()
        .copied()
        .filter(|t| chi.eval(opts.r_max * t.cos(), opts.r_max * t.sin()).norm() > 0.0)
        .collect();
    if support.is_empty() {
        return Err(Error::Precondition("the cutoff vanishes on the sampling annulus".into()));
    }
    // hypoellipticity of a on an open neighborhood of the cutoff's directions
    let step = std::f64::consts::TAU / opts.directions as f64;
    let near: Vec<f64> = all
        .iter()
        .copied()
        .filter(|t| support.iter().any(|s| crate::cone::angular_distance(*s, *t) <= 1.5 * step))
        .collect();
    let ray = RayOptions {
        r_min: opts.r_min,
        r_max: opts.r_max,
        radii: 16,
        spread: step / 2.0,
        k: 3.min(a.closure),
    };
    let est = estimate_char_set(&a.expr, m_prime, &near, ray, opts.thresholds);
    if let Some(bad) = est.directions.iter().find(|d| !d.non_hypercharacteristic) {
        return Err(Error::Precondition(format!(
            "symbol is hypercharacteristic of order {m_prime} at direction {:.4} rad inside the cutoff's support",
            bad.theta
        )));
    }

    let inv = pow(a.expr.clone(), -1).simplified();
    let mut terms = vec![product(vec![chi.clone(), inv.clone()]).simplified()];
    let mut remainder = weyl_product_range(&terms[0], &a.expr, 1, n);
    for _ in 1..n_terms {
        let next = scale(Complex64::new(-1.0, 0.0), product(vec![remainder.clone(), inv.clone()])).simplified();
        remainder = weyl_product_range(&next, &a.expr, 1, n);
        terms.push(next);
    }
    let b = sum(terms.clone()).simplified();

    let radii = geomspace(opts.r_min, opts.r_max, opts.radii);
    let remainder_sup: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            support
                .iter()
                .map(|t| remainder.eval(r * t.cos(), r * t.sin()).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let (fit, decay) = if remainder_sup.iter().all(|v| *v == 0.0) {
        (None, None)
    } else {
        let f = fit_power(&radii, &remainder_sup);
        (f, f.map(|f| f.decay()))
    };
    Ok(Parametrix {
        terms,
        b,
        remainder,
        report: ParametrixReport {
            n_terms,
            truncation: n,
            support_directions: support.len(),
            radii,
            remainder_sup,
            fit,
            decay,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi() -> SymbolExpr {
        SymbolExpr::parse("coneCutoff(-0.6, 0.6, 3, 0.2, 2)").unwrap()
    }

    #[test]
    fn first_term_gains_two_orders() {
        let a = ShubinSymbol::parse("bracket(2)", None).unwrap();
        let p = parametrix_truncated(&a, &chi(), 2.0, 1, ParametrixOptions::default()).unwrap();
        let d = p.report.decay.unwrap();
        assert!(d >= 2.0 - 0.3, "{d}");
        assert!(p.report.fit.unwrap().r2 > 0.9);
    }

    #[test]
    fn second_term_gains_four_orders() {
        let a = ShubinSymbol::parse("bracket(2)", None).unwrap();
        let p = parametrix_truncated(&a, &chi(), 2.0, 2, ParametrixOptions::default()).unwrap();
        let d = p.report.decay.unwrap();
        assert!(d >= 4.0 - 0.3, "{d}");
    }

    #[test]
    fn zero_ray_is_rejected() {
        let a = ShubinSymbol::parse("x", None).unwrap();
        let c = SymbolExpr::parse("coneCutoff(1.2, 1.9, 3, 0.2, 2)").unwrap();
        assert!(matches!(
            parametrix_truncated(&a, &c, 1.0, 1, ParametrixOptions::default()),
            Err(Error::Precondition(_))
        ));
    }
}
