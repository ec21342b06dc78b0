use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::symbols::charset::Membership;
use crate::symbols::fit::{fit_power, geomspace};

use super::source::PhaseSource;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WfOptions {
    pub directions: usize,
    pub half_width_steps: usize,
    /// `None`: the source's reliable band
    pub fit_window: Option<(f64, f64)>,
    pub radii: usize,
    /// arc length between samples on a shell
    pub arc_spacing: f64,
    pub n_cap: f64,
    pub s_cap: f64,
    pub r2_min: f64,
    /// values below `floor_rel * reference` count as super-polynomial decay
    pub floor_rel: f64,
    pub margin: f64,
    /// only these direction indices are estimated
    pub subset: Option<Vec<usize>>,
}

impl Default for WfOptions {
    fn default() -> Self {
        WfOptions {
            directions: 360,
            half_width_steps: 3,
            fit_window: None,
            radii: 16,
            arc_spacing: 0.35,
            n_cap: 8.0,
            s_cap: 8.0,
            r2_min: 0.9,
            floor_rel: 1e-12,
            margin: 0.1,
            subset: None,
        }
    }
}

impl WfOptions {
    pub fn step(&self) -> f64 {
        TAU / self.directions as f64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DirectionRecord {
    pub index: usize,
    pub theta: f64,
    /// `+inf` (written as null) for super-polynomial decay
    #[serde(deserialize_with = "null_as_inf")]
    pub gamma_g: f64,
    #[serde(deserialize_with = "null_as_nan")]
    pub r2_g: f64,
    pub gabor: Membership,
    #[serde(deserialize_with = "null_as_inf")]
    pub gamma_2: f64,
    #[serde(deserialize_with = "null_as_nan")]
    pub r2_s: f64,
    #[serde(deserialize_with = "null_as_inf")]
    pub s_star: f64,
    pub sobolev_conclusive: bool,
}

// JSON has no infinities; they are written as null.
fn null_as_inf<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

fn null_as_nan<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl DirectionRecord {
    pub fn singular(&self) -> bool {
        self.sobolev_conclusive && self.s_star.is_finite()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WavefrontEstimate {
    pub source: String,
    pub dim: usize,
    pub directions: usize,
    pub half_width_steps: usize,
    pub fit_window: (f64, f64),
    pub radii: Vec<f64>,
    pub reference: f64,
    pub floor: f64,
    pub n_cap: f64,
    pub s_cap: f64,
    pub r2_min: f64,
    pub margin: f64,
    pub records: Vec<DirectionRecord>,
}

/// One shell: `samples_per_step` samples per direction step.
fn shell_points(r: f64, d: usize, spacing: f64) -> (usize, Vec<(f64, f64)>) {
    let per = ((TAU * r) / (spacing * d as f64)).ceil().max(1.0) as usize;
    let n = per * d;
    let pts = (0..n)
        .map(|t| {
            let phi = TAU * t as f64 / n as f64;
            (r * phi.cos(), r * phi.sin())
        })
        .collect();
    (per, pts)
}

fn cone_indices(j: usize, w: usize, per: usize, d: usize) -> impl Iterator<Item = usize> {
    let n = per * d;
    let lo = (j * per + n - w * per) % n;
    (0..=2 * w * per).map(move |t| (lo + t) % n)
}

fn classify_fit(
    rs: &[f64],
    vs: &[f64],
    floor: f64,
    r2_min: f64,
) -> (f64, f64, bool) {
    if vs.iter().any(|v| !(*v >= floor)) {
        return (f64::INFINITY, 1.0, true);
    }
    match fit_power(rs, vs) {
        Some(f) => (f.decay(), f.r2, f.r2 >= r2_min),
        None => (f64::NAN, 0.0, false),
    }
}

/// Estimates per-direction decay exponents and Sobolev thresholds.
pub fn estimate_wavefront(src: &dyn PhaseSource, opts: &WfOptions) -> Result<WavefrontEstimate> {
    let (lo, hi) = opts.fit_window.unwrap_or_else(|| src.reliable_band());
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::Precondition(format!("empty fit window [{lo}, {hi}]")));
    }
    if opts.directions < 4 || 2 * opts.half_width_steps + 1 > opts.directions {
        return Err(Error::Precondition(format!(
            "{} directions cannot hold cones of half-width {} steps",
            opts.directions, opts.half_width_steps
        )));
    }
    let d = opts.directions;
    let w = opts.half_width_steps;
    let dirs: Vec<usize> = match &opts.subset {
        Some(s) => {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            if s.iter().any(|&j| j >= d) {
                return Err(Error::Precondition("direction index out of range".into()));
            }
            s
        }
        None => (0..d).collect(),
    };
    let radii = geomspace(lo, hi, opts.radii);

    // small-radius probe for the reference level
    let mut reference: f64 = 0.0;
    for r in geomspace(0.5, lo, 6) {
        let (_, pts) = shell_points(r, d, opts.arc_spacing);
        reference = src.abs_many(&pts).into_iter().fold(reference, f64::max);
    }

    // sup and mean |V|^2 per (direction, radius)
    let mut sup = vec![vec![0.0; radii.len()]; dirs.len()];
    let mut mean = vec![vec![0.0; radii.len()]; dirs.len()];
    for (i, &r) in radii.iter().enumerate() {
        let (per, all) = shell_points(r, d, opts.arc_spacing);
        let n = all.len();
        let mut need = vec![false; n];
        for &j in &dirs {
            for t in cone_indices(j, w, per, d) {
                need[t] = true;
            }
        }
        let idx: Vec<usize> = (0..n).filter(|&t| need[t]).collect();
        let pts: Vec<(f64, f64)> = idx.iter().map(|&t| all[t]).collect();
        let vals = src.abs_many(&pts);
        let mut full = vec![0.0; n];
        for (t, v) in idx.iter().zip(&vals) {
            full[*t] = *v;
            reference = reference.max(*v);
        }
        let per_dir: Vec<(f64, f64)> = dirs
            .par_iter()
            .map(|&j| {
                let mut s: f64 = 0.0;
                let mut m = 0.0;
                let mut count = 0usize;
                for t in cone_indices(j, w, per, d) {
                    s = s.max(full[t]);
                    m += full[t] * full[t];
                    count += 1;
                }
                (s, m / count as f64)
            })
            .collect();
        for (k, (s, m)) in per_dir.into_iter().enumerate() {
            sup[k][i] = s;
            mean[k][i] = m;
        }
    }

    let floor = opts.floor_rel * reference;
    let records = dirs
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            let (gamma_g, r2_g, ok_g) = classify_fit(&radii, &sup[k], floor, opts.r2_min);
            let (gamma_2, r2_s, ok_s) = classify_fit(&radii, &mean[k], floor * floor, opts.r2_min);
            let gabor = if !ok_g {
                Membership::Inconclusive
            } else if gamma_g > opts.n_cap {
                Membership::Out
            } else {
                Membership::In
            };
            let mut s_star = (gamma_2 - 2.0) / 2.0;
            if s_star > opts.s_cap {
                s_star = f64::INFINITY;
            }
            DirectionRecord {
                index: j,
                theta: TAU * j as f64 / d as f64,
                gamma_g,
                r2_g,
                gabor,
                gamma_2,
                r2_s,
                s_star,
                sobolev_conclusive: ok_s,
            }
        })
        .collect();
    Ok(WavefrontEstimate {
        source: src.label(),
        dim: 1,
        directions: d,
        half_width_steps: w,
        fit_window: (lo, hi),
        radii,
        reference,
        floor,
        n_cap: opts.n_cap,
        s_cap: opts.s_cap,
        r2_min: opts.r2_min,
        margin: opts.margin,
        records,
    })
}

/// Circular distance between direction indices.
pub fn index_distance(a: usize, b: usize, d: usize) -> usize {
    let t = (a + d - b) % d;
    t.min(d - t)
}

/// Every element of each set lies within `tol` steps of the other set.
pub fn sets_agree(a: &[usize], b: &[usize], d: usize, tol: usize) -> bool {
    let near = |x: usize, s: &[usize]| s.iter().any(|&y| index_distance(x, y, d) <= tol);
    a.iter().all(|&x| near(x, b)) && b.iter().all(|&y| near(y, a))
}

/// Direction indices whose cone of half-width `w` steps contains one of the rays.
pub fn directions_near(rays: &[f64], d: usize, w: usize) -> Vec<usize> {
    let step = TAU / d as f64;
    (0..d)
        .filter(|&j| {
            rays.iter()
                .any(|&r| crate::cone::angular_distance(j as f64 * step, r) <= w as f64 * step + 1e-9)
        })
        .collect()
}

/// Rotates direction indices by `k` steps counterclockwise.
pub fn rotate_indices(set: &[usize], k: isize, d: usize) -> Vec<usize> {
    let mut v: Vec<usize> = set
        .iter()
        .map(|&j| ((j as isize + k).rem_euclid(d as isize)) as usize)
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

impl WavefrontEstimate {
    pub fn step(&self) -> f64 {
        TAU / self.directions as f64
    }

    pub fn record(&self, index: usize) -> Option<&DirectionRecord> {
        self.records.iter().find(|r| r.index == index)
    }

    /// Conclusive Gabor wave front directions.
    pub fn gabor_set(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.gabor == Membership::In).map(|r| r.index).collect()
    }

    /// Gabor directions that are IN or inconclusive.
    pub fn gabor_upper(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.gabor != Membership::Out).map(|r| r.index).collect()
    }

    pub fn inconclusive(&self) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| r.gabor == Membership::Inconclusive || !r.sobolev_conclusive)
            .map(|r| r.index)
            .collect()
    }

    /// Estimated `WF_{Q^s}`: conclusive directions with `s >= s* - margin`.
    pub fn sobolev_set(&self, s: f64) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| r.sobolev_conclusive && s >= r.s_star - self.margin)
            .map(|r| r.index)
            .collect()
    }

    /// Union of `WF_{Q^s}` over `s <= s_cap`.
    pub fn sobolev_union(&self) -> Vec<usize> {
        self.sobolev_set(self.s_cap)
    }

    /// Finite-threshold directions equal the Gabor set up to `tol` steps.
    pub fn union_consistent(&self, tol: usize) -> bool {
        sets_agree(&self.sobolev_union(), &self.gabor_set(), self.directions, tol)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `theta,gamma_g,s_star,flag` rows; `inf` for super-polynomial decay.
    pub fn polar_csv(&self) -> String {
        let mut out = String::from("theta,gamma_g,s_star,flag\n");
        for r in &self.records {
            let flag = match (r.gabor, r.sobolev_conclusive) {
                (Membership::Inconclusive, _) | (_, false) => "inconclusive",
                (Membership::In, _) => "in",
                (Membership::Out, _) => "out",
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_csv(r.theta),
                fmt_csv(r.gamma_g),
                fmt_csv(r.s_star),
                flag
            ));
        }
        out
    }
}

pub fn fmt_csv(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_helpers() {
        assert_eq!(index_distance(1, 359, 360), 2);
        assert!(sets_agree(&[0, 1, 2], &[359, 0, 1, 2, 3], 360, 1));
        assert!(!sets_agree(&[0], &[5], 360, 1));
        assert_eq!(directions_near(&[0.0], 360, 3), vec![0, 1, 2, 3, 357, 358, 359]);
        assert_eq!(rotate_indices(&[0, 90], -90, 360), vec![0, 270]);
    }

    #[test]
    fn cone_indices_wrap() {
        let v: Vec<usize> = cone_indices(0, 1, 2, 4).collect();
        assert_eq!(v, vec![6, 7, 0, 1, 2]);
    }

    #[test]
    fn infinite_fields_survive_json() {
        let r = DirectionRecord {
            index: 3,
            theta: 0.05,
            gamma_g: f64::INFINITY,
            r2_g: f64::NAN,
            gabor: Membership::Out,
            gamma_2: f64::INFINITY,
            r2_s: 0.99,
            s_star: f64::INFINITY,
            sobolev_conclusive: true,
        };
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"s_star\":null"));
        let back: DirectionRecord = serde_json::from_str(&text).unwrap();
        assert!(back.gamma_g.is_infinite() && back.s_star.is_infinite() && back.r2_g.is_nan());
        assert_eq!(back.r2_s, 0.99);
        assert!(!back.singular());
    }
}
