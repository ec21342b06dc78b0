//! Grid estimates of the Shubin seminorms
//! `C_alpha = sup <z>^{|alpha| - m} |d^alpha a(z)|` over an annulus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::fit::geomspace;
use super::{DerivTable, ShubinSymbol};
use crate::error::Result;

/// Relative change under a +-20% change of the outer radius that still
/// counts as stable.
pub const STABILITY_TOL: f64 = 0.1;
/// Constants below this level are treated as zero.
pub const NEGLIGIBLE: f64 = 1e-300;

const RADII: usize = 48;
const ANGLES: usize = 720;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeminormEntry {
    pub alpha: [u32; 2],
    pub constant: f64,
    pub constant_inner: f64,
    pub constant_outer: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeminormTable {
    pub order: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub max_order: u32,
    pub entries: Vec<SeminormEntry>,
    pub pass: bool,
}

impl SeminormTable {
    pub fn get(&self, alpha: [u32; 2]) -> Option<&SeminormEntry> {
        self.entries.iter().find(|e| e.alpha == alpha)
    }
}

fn bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

fn stable(a: f64, b: f64) -> bool {
    if a.max(b) < NEGLIGIBLE {
        return true;
    }
    (a - b).abs() <= STABILITY_TOL * a.max(b)
}

/// Seminorm screen of `a` at declared order `m` on `[r_min, r_max]`.
/// Constants are also computed with the outer radius scaled by 0.8 and 1.2;
/// the screen passes when every constant is finite and moves by less than
/// 10% under both changes.
pub fn seminorm_screen(a: &ShubinSymbol, m: f64, r_min: f64, r_max: f64, k: u32) -> Result<SeminormTable> {
    let table = a.derivative_table(k)?;
    Ok(screen_table(&table, m, r_min, r_max))
}

pub fn screen_table(table: &DerivTable, m: f64, r_min: f64, r_max: f64) -> SeminormTable {
    let mut radii = geomspace(r_min, 1.2 * r_max, RADII);
    radii.push(0.8 * r_max);
    radii.push(r_max);
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let idx = table.indices();
    // per radius, per alpha: sup over angles
    let per_radius: Vec<Vec<f64>> = radii
        .par_iter()
        .map(|&r| {
            idx.iter()
                .map(|&(i, j)| {
                    let e = table.get(i, j);
                    let w = bracket(r).powf((i + j) as f64 - m);
                    (0..ANGLES)
                        .map(|t| {
                            let th = TAU * t as f64 / ANGLES as f64;
                            e.eval(r * th.cos(), r * th.sin()).norm() * w
                        })
                        .fold(0.0, |acc: f64, v| if v.is_nan() { f64::INFINITY } else { acc.max(v) })
                })
                .collect()
        })
        .collect();
    let sup_upto = |hi: f64, a: usize| {
        radii
            .iter()
            .zip(&per_radius)
            .filter(|(r, _)| **r <= hi * (1.0 + 1e-12))
            .map(|(_, v)| v[a])
            .fold(0.0, f64::max)
    };
    let mut entries = Vec::new();
    let mut pass = true;
    for (n, &(i, j)) in idx.iter().enumerate() {
        let c = sup_upto(r_max, n);
        let ci = sup_upto(0.8 * r_max, n);
        let co = sup_upto(1.2 * r_max, n);
        let ok = c.is_finite() && co.is_finite() && stable(c, ci) && stable(c, co);
        pass &= ok;
        entries.push(SeminormEntry {
            alpha: [i, j],
            constant: c,
            constant_inner: ci,
            constant_outer: co,
            stable: ok,
        });
    }
    SeminormTable {
        order: m,
        r_min,
        r_max,
        max_order: table.max_order,
        entries,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn screen(text: &str, m: f64, k: u32) -> SeminormTable {
        seminorm_screen(&ShubinSymbol::parse(text, Some(m)).unwrap(), m, 5.0, 50.0, k).unwrap()
    }

    #[test]
    fn bracket_orders() {
        let t = screen("bracket(2)", 2.0, 3);
        assert!(t.pass);
        let c0 = t.get([0, 0]).unwrap().constant;
        assert!((c0 - 1.0).abs() <= 0.05);
        assert!(!screen("bracket(2)", 1.0, 3).pass);
    }

    #[test]
    fn gaussian_and_cutoff() {
        let g = screen("gaussz", 0.0, 3);
        assert!(g.pass);
        assert!(g.get([0, 0]).unwrap().constant < 1e-9);
        let c = screen("coneCutoff(-0.5, 0.5, 2, 0.2, 1)", 0.0, 3);
        assert!(c.pass, "{:?}", c.entries);
        assert!(c.entries.iter().all(|e| e.constant.is_finite()));
    }
}
