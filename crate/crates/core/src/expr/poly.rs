//! Polynomials in `(x, xi)` with complex coefficients.

use num_complex::Complex64;
use std::collections::BTreeMap;

/// `sum c_{jk} x^j xi^k`, keyed by `(j, k)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly2(pub BTreeMap<(u32, u32), Complex64>);

impl Poly2 {
    pub fn constant(c: Complex64) -> Self {
        let mut m = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            m.insert((0, 0), c);
        }
        Poly2(m)
    }

    pub fn monomial(j: u32, k: u32) -> Self {
        let mut m = BTreeMap::new();
        m.insert((j, k), Complex64::new(1.0, 0.0));
        Poly2(m)
    }

    fn pruned(mut self) -> Self {
        self.0.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        self
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        let mut m = self.0.clone();
        for (k, c) in &o.0 {
            *m.entry(*k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Poly2(m).pruned()
    }

    pub fn mul(&self, o: &Poly2) -> Poly2 {
        let mut m = BTreeMap::new();
        for ((a, b), c) in &self.0 {
            for ((p, q), d) in &o.0 {
                *m.entry((a + p, b + q)).or_insert(Complex64::new(0.0, 0.0)) += c * d;
            }
        }
        Poly2(m).pruned()
    }

    pub fn pow(&self, n: u32) -> Poly2 {
        let mut acc = Poly2::constant(Complex64::new(1.0, 0.0));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale(&self, s: Complex64) -> Poly2 {
        Poly2(self.0.iter().map(|(k, c)| (*k, c * s)).collect()).pruned()
    }

    /// `d^i/dx^i d^j/dxi^j`
    pub fn partial(&self, i: u32, j: u32) -> Poly2 {
        let mut m = BTreeMap::new();
        for ((a, b), c) in &self.0 {
            if *a < i || *b < j {
                continue;
            }
            let fa: f64 = ((a - i + 1)..=*a).map(f64::from).product();
            let fb: f64 = ((b - j + 1)..=*b).map(f64::from).product();
            m.insert((a - i, b - j), c * fa * fb);
        }
        Poly2(m).pruned()
    }

    pub fn degree(&self) -> u32 {
        self.0.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64, xi: f64) -> Complex64 {
        self.0
            .iter()
            .map(|((a, b), c)| c * x.powi(*a as i32) * xi.powi(*b as i32))
            .sum()
    }

    /// Gaussian smoothing `pi^{-1} e^{-|w|^2} * a`, which for polynomials is
    /// the finite sum of `d_x^{2i} d_xi^{2j} a / (4^{i+j} i! j!)`.
    pub fn gauss_smoothed(&self) -> Poly2 {
        let d = self.degree();
        let mut acc = Poly2::default();
        let mut fi = 1.0;
        for i in 0..=d / 2 {
            if i > 0 {
                fi *= i as f64;
            }
            let mut fj = 1.0;
            for j in 0..=(d / 2 - i) {
                if j > 0 {
                    fj *= j as f64;
                }
                let w = 1.0 / (4f64.powi((i + j) as i32) * fi * fj);
                acc = acc.add(&self.partial(2 * i, 2 * j).scale(Complex64::new(w, 0.0)));
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing_of_quadratic() {
        let a = Poly2::monomial(2, 0).add(&Poly2::monomial(0, 2));
        let b = a.gauss_smoothed();
        assert_eq!(b, a.add(&Poly2::constant(Complex64::new(1.0, 0.0))));
        let q = Poly2::monomial(4, 0).gauss_smoothed();
        // E (x - w)^4 with w ~ N(0, 1/2): x^4 + 3 x^2 + 3/4
        assert!((q.eval(0.0, 0.0).re - 0.75).abs() < 1e-15);
        assert!((q.0[&(2, 0)].re - 3.0).abs() < 1e-15);
    }
}
