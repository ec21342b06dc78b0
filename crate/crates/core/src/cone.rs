//! Conic subsets of phase space with the inner ball removed.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Reduces an angle to `[0, 2pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Smallest absolute angular distance between two directions.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Angular sector `[lo, hi]` (counter-clockwise from `lo`) beyond radius `inner_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    lo: f64,
    width: f64,
    pub inner_radius: f64,
}

impl Cone {
    pub fn new(theta_lo: f64, theta_hi: f64, inner_radius: f64) -> Result<Self> {
        let width = theta_hi - theta_lo;
        if !(width > 0.0 && width < TAU) {
            return Err(Error::Cone(format!(
                "angular width {width} must lie in (0, 2pi)"
            )));
        }
        if !(inner_radius >= 0.0) {
            return Err(Error::Cone(format!("inner radius {inner_radius} < 0")));
        }
        Ok(Self {
            lo: wrap_angle(theta_lo),
            width,
            inner_radius,
        })
    }

    pub fn from_degrees(lo_deg: f64, hi_deg: f64, inner_radius: f64) -> Result<Self> {
        Self::new(lo_deg.to_radians(), hi_deg.to_radians(), inner_radius)
    }

    /// Cone of half-width `half` around direction `axis`.
    pub fn around(axis: f64, half: f64, inner_radius: f64) -> Result<Self> {
        Self::new(axis - half, axis + half, inner_radius)
    }

    pub fn theta_lo(&self) -> f64 {
        self.lo
    }

    pub fn theta_hi(&self) -> f64 {
        self.lo + self.width
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn center(&self) -> f64 {
        wrap_angle(self.lo + self.width / 2.0)
    }

    /// Offset of `theta` counter-clockwise from the lower edge, in `[0, 2pi)`.
    pub fn offset(&self, theta: f64) -> f64 {
        wrap_angle(theta - self.lo)
    }

    pub fn contains_direction(&self, theta: f64) -> bool {
        self.offset(theta) <= self.width
    }

    /// Direction lies inside with at least `margin` radians to both edges.
    pub fn contains_direction_strictly(&self, theta: f64, margin: f64) -> bool {
        let t = self.offset(theta);
        t >= margin && t <= self.width - margin
    }

    pub fn contains(&self, x: f64, xi: f64) -> bool {
        let r = x.hypot(xi);
        r > self.inner_radius && self.contains_direction(xi.atan2(x))
    }

    /// Complementary sector (same inner radius).
    pub fn complement(&self) -> Result<Self> {
        Self::new(self.theta_hi(), self.lo + TAU, self.inner_radius)
    }
}

/// Dimension-generic cone given by an axis and an angular half-width. Only
/// membership is provided; the numeric path uses [`Cone`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisCone {
    pub axis: Vec<f64>,
    pub half_width: f64,
    pub inner_radius: f64,
}

impl AxisCone {
    pub fn new(axis: Vec<f64>, half_width: f64, inner_radius: f64) -> Result<Self> {
        let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 || !(half_width > 0.0 && half_width < PI) {
            return Err(Error::Cone("degenerate axis cone".into()));
        }
        Ok(Self {
            axis: axis.iter().map(|a| a / norm).collect(),
            half_width,
            inner_radius,
        })
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        let r = z.iter().map(|a| a * a).sum::<f64>().sqrt();
        if r <= self.inner_radius || z.len() != self.axis.len() {
            return false;
        }
        let c = z.iter().zip(&self.axis).map(|(a, b)| a * b).sum::<f64>() / r;
        c.clamp(-1.0, 1.0).acos() <= self.half_width
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn membership_and_wrap() {
        let c = Cone::from_degrees(-30.0, 30.0, 1.0).unwrap();
        assert!(c.contains(5.0, 0.0));
        assert!(!c.contains(0.5, 0.0));
        assert!(!c.contains(0.0, 5.0));
        assert!(c.contains(5.0, -2.0));
        assert!(Cone::new(0.0, TAU, 0.0).is_err());
        assert!(Cone::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn axis_cone_matches_sector_in_2d() {
        let a = AxisCone::new(vec![1.0, 0.0], 0.5, 1.0).unwrap();
        let s = Cone::around(0.0, 0.5, 1.0).unwrap();
        for &(x, y) in &[(3.0, 1.0), (3.0, 2.0), (-1.0, 0.2), (0.5, 0.0)] {
            assert_eq!(a.contains(&[x, y]), s.contains(x, y));
        }
    }

    proptest! {
        #[test]
        fn scale_invariant_above_inner_radius(
            lo in -7.0f64..7.0, w in 0.05f64..6.2, r0 in 0.0f64..3.0,
            th in -7.0f64..7.0, rad in 0.1f64..50.0, t in 1.0f64..20.0
        ) {
            let c = Cone::new(lo, lo + w, r0).unwrap();
            let (x, y) = (rad * th.cos(), rad * th.sin());
            if rad > r0 {
                prop_assert_eq!(c.contains(x, y), c.contains(t * x, t * y));
            }
            if c.contains(x, y) {
                prop_assert!(c.contains(t * x, t * y));
            }
        }
    }
}
