//! Exact STFTs and Fourier transforms for signals built from Gaussian-type
//! terms `P(y) exp(-a y^2 + b y + c)` (`Re a >= 0`) and point masses
//! `delta^{(n)}(y - x0)`.
//!
//! Polynomial symbols act exactly on this class, in both the Weyl and the
//! anti-Wick quantization.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expr::poly::Poly2;
use crate::expr::SignalExpr;
use crate::stft::WindowKind;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

// --- univariate polynomials, coefficient of y^n at index n ---

fn pmul(p: &[C], q: &[C]) -> Vec<C> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut r = vec![ZERO; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            r[i + j] += a * b;
        }
    }
    r
}

fn padd(p: &[C], q: &[C]) -> Vec<C> {
    let mut r = vec![ZERO; p.len().max(q.len())];
    for (i, a) in p.iter().enumerate() {
        r[i] += a;
    }
    for (i, b) in q.iter().enumerate() {
        r[i] += b;
    }
    r
}

fn pderiv(p: &[C]) -> Vec<C> {
    p.iter().enumerate().skip(1).map(|(n, a)| a * n as f64).collect()
}

fn peval(p: &[C], y: C) -> C {
    p.iter().rev().fold(ZERO, |acc, a| acc * y + a)
}

/// Coefficients of `p(s + mu)` in `s`.
fn pshift(p: &[C], mu: C) -> Vec<C> {
    let mut r = p.to_vec();
    let n = r.len();
    // repeated synthetic division
    for k in 0..n {
        for j in (k..n - 1).rev() {
            let t = r[j + 1] * mu;
            r[j] += t;
        }
    }
    r
}

/// Coefficients of the normalized Hermite function `h_k(t) = p_k(t) e^{-t^2/2}`.
pub fn hermite_poly(k: u32) -> Vec<C> {
    let mut prev: Vec<C> = Vec::new();
    let mut cur = vec![c(PI.powf(-0.25))];
    for n in 0..k as usize {
        let nf = n as f64;
        let mut next = vec![ZERO; cur.len() + 1];
        for (i, a) in cur.iter().enumerate() {
            next[i + 1] += a * (2.0 / (nf + 1.0)).sqrt();
        }
        for (i, a) in prev.iter().enumerate() {
            next[i] -= a * (nf / (nf + 1.0)).sqrt();
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `P(y) exp(-a y^2 + b y + c0)`
#[derive(Debug, Clone, PartialEq)]
pub struct GaussTerm {
    pub poly: Vec<C>,
    pub a: C,
    pub b: C,
    pub c0: C,
}

/// `coef * delta^{(order)}(y - x0)`
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTerm {
    pub coef: C,
    pub order: u32,
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Gauss(GaussTerm),
    Delta(DeltaTerm),
}

impl GaussTerm {
    fn simple(coef: C, a: C, b: C, c0: C) -> Self {
        GaussTerm {
            poly: vec![coef],
            a,
            b,
            c0,
        }
    }

    pub fn eval(&self, y: f64) -> C {
        let y = c(y);
        peval(&self.poly, y) * (-self.a * y * y + self.b * y + self.c0).exp()
    }

    /// `d/dy`, again of the same form.
    pub fn deriv(&self) -> GaussTerm {
        let g1 = [self.b, -2.0 * self.a];
        GaussTerm {
            poly: padd(&pderiv(&self.poly), &pmul(&self.poly, &g1)),
            ..self.clone()
        }
    }

    fn times_y(&self) -> GaussTerm {
        GaussTerm {
            poly: pmul(&self.poly, &[ZERO, ONE]),
            ..self.clone()
        }
    }

    fn scaled(&self, s: C) -> GaussTerm {
        GaussTerm {
            poly: self.poly.iter().map(|p| p * s).collect(),
            ..self.clone()
        }
    }

    fn mul(&self, o: &GaussTerm) -> GaussTerm {
        GaussTerm {
            poly: pmul(&self.poly, &o.poly),
            a: self.a + o.a,
            b: self.b + o.b,
            c0: self.c0 + o.c0,
        }
    }

    /// `int P(y) h_k(y - x) e^{-i y xi} e^{-a y^2 + b y + c0} dy`.
    fn stft(&self, window: &[C], x: f64, xi: f64) -> C {
        let a_tot = self.a + 0.5;
        let beta = self.b - I * xi;
        let two_a = 2.0 * a_tot;
        let mu = (beta + x) / two_a;
        // B^2/(4A) - x^2/2 with B = x + beta, written without cancellation
        let expo = (beta * beta + 2.0 * x * beta - 2.0 * self.a * x * x) / (2.0 * two_a) + self.c0;
        let r = pmul(&pshift(&self.poly, mu), &pshift(window, mu - x));
        // even Gaussian moments (2j-1)!! / (2A)^j
        let mut sum = ZERO;
        let mut m = ONE;
        for (n, coef) in r.iter().enumerate().step_by(2) {
            if n > 0 {
                m = m * (n as f64 - 1.0) / two_a;
            }
            sum += coef * m;
        }
        sum * (c(PI) / a_tot).sqrt() * expo.exp()
    }
}

impl DeltaTerm {
    /// `(-1)^n d^n/dy^n [h_k(y - x) e^{-i y xi}]` at `y = x0`.
    fn stft(&self, window: &[C], x: f64, xi: f64) -> C {
        let t0 = self.x0 - x;
        let g1 = [-I * xi, -ONE];
        let mut r = window.to_vec();
        for _ in 0..self.order {
            r = padd(&pderiv(&r), &pmul(&r, &g1));
        }
        let sign = if self.order % 2 == 0 { 1.0 } else { -1.0 };
        let phase = C::new(-0.5 * t0 * t0, -xi * self.x0).exp();
        self.coef * sign * peval(&r, c(t0)) * phase
    }
}

/// A finite sum of [`Term`]s.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClosedForm {
    pub terms: Vec<Term>,
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn gauss_times_delta(g: &GaussTerm, d: &DeltaTerm) -> Vec<Term> {
    // g delta^{(n)} = sum_k (-1)^k C(n,k) g^{(k)}(x0) delta^{(n-k)}
    let mut out = Vec::new();
    let mut gk = g.clone();
    for k in 0..=d.order {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out.push(Term::Delta(DeltaTerm {
            coef: d.coef * gk.eval(d.x0) * sign * binom(d.order, k),
            order: d.order - k,
            x0: d.x0,
        }));
        gk = gk.deriv();
    }
    out
}

impl ClosedForm {
    pub fn from_expr(e: &SignalExpr) -> Result<Self> {
        let g = |t: GaussTerm| ClosedForm {
            terms: vec![Term::Gauss(t)],
        };
        Ok(match e {
            SignalExpr::Gauss { x0, xi0 } => g(GaussTerm::simple(
                c(PI.powf(-0.25)),
                c(0.5),
                C::new(*x0, *xi0),
                c(-0.5 * x0 * x0),
            )),
            SignalExpr::Chirp(cc) => g(GaussTerm::simple(ONE, C::new(0.0, -0.5 * cc), ZERO, ZERO)),
            SignalExpr::PlaneWave(eta) => g(GaussTerm::simple(ONE, ZERO, C::new(0.0, *eta), ZERO)),
            SignalExpr::DeltaApprox(eps) => g(GaussTerm::simple(
                c(1.0 / ((2.0 * PI).sqrt() * eps)),
                c(0.5 / (eps * eps)),
                ZERO,
                ZERO,
            )),
            SignalExpr::Hermite(k) => g(GaussTerm {
                poly: hermite_poly(*k),
                a: c(0.5),
                b: ZERO,
                c0: ZERO,
            }),
            SignalExpr::Delta(x0) => ClosedForm {
                terms: vec![Term::Delta(DeltaTerm {
                    coef: ONE,
                    order: 0,
                    x0: *x0,
                })],
            },
            SignalExpr::Const(v) => g(GaussTerm::simple(*v, ZERO, ZERO, ZERO)),
            SignalExpr::Sum(ts) => {
                let mut terms = Vec::new();
                for t in ts {
                    terms.extend(ClosedForm::from_expr(t)?.terms);
                }
                ClosedForm { terms }
            }
            SignalExpr::Product(fs) => {
                let mut acc = g(GaussTerm::simple(ONE, ZERO, ZERO, ZERO));
                for f in fs {
                    acc = acc.mul(&ClosedForm::from_expr(f)?)?;
                }
                acc
            }
            SignalExpr::File(_) => {
                return Err(Error::Unsupported(
                    "file input has no closed-form transform".into(),
                ))
            }
        })
    }

    pub fn mul(&self, o: &ClosedForm) -> Result<ClosedForm> {
        let mut terms = Vec::new();
        for s in &self.terms {
            for t in &o.terms {
                match (s, t) {
                    (Term::Gauss(p), Term::Gauss(q)) => terms.push(Term::Gauss(p.mul(q))),
                    (Term::Gauss(p), Term::Delta(d)) | (Term::Delta(d), Term::Gauss(p)) => {
                        terms.extend(gauss_times_delta(p, d))
                    }
                    (Term::Delta(_), Term::Delta(_)) => {
                        return Err(Error::Unsupported("product of two point masses".into()))
                    }
                }
            }
        }
        Ok(ClosedForm { terms }.merged())
    }

    /// Combines terms with identical exponents or identical support.
    pub fn merged(self) -> ClosedForm {
        let mut out: Vec<Term> = Vec::new();
        for t in self.terms {
            let slot = out.iter_mut().find(|o| match (&**o, &t) {
                (Term::Gauss(p), Term::Gauss(q)) => p.a == q.a && p.b == q.b && p.c0 == q.c0,
                (Term::Delta(p), Term::Delta(q)) => p.order == q.order && p.x0 == q.x0,
                _ => false,
            });
            match (slot, t) {
                (Some(Term::Gauss(p)), Term::Gauss(q)) => p.poly = padd(&p.poly, &q.poly),
                (Some(Term::Delta(p)), Term::Delta(q)) => p.coef += q.coef,
                (_, t) => out.push(t),
            }
        }
        out.retain(|t| match t {
            Term::Gauss(g) => g.poly.iter().any(|p| *p != ZERO),
            Term::Delta(d) => d.coef != ZERO,
        });
        ClosedForm { terms: out }
    }

    pub fn eval(&self, y: f64) -> Result<C> {
        let mut acc = ZERO;
        for t in &self.terms {
            match t {
                Term::Gauss(g) => acc += g.eval(y),
                Term::Delta(_) => return Err(Error::Eval("point masses have no pointwise value".into())),
            }
        }
        Ok(acc)
    }

    pub fn has_delta(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, Term::Delta(_)))
    }

    /// Exact `V_h u(x, xi)` for the Hermite window `h_k`.
    pub fn stft_at(&self, window: WindowKind, x: f64, xi: f64) -> C {
        self.stft_with(&hermite_poly(window.degree()), x, xi)
    }

    pub fn stft_with(&self, window_poly: &[C], x: f64, xi: f64) -> C {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Gauss(g) => g.stft(window_poly, x, xi),
                Term::Delta(d) => d.stft(window_poly, x, xi),
            })
            .sum()
    }

    /// `int u(y) e^{-i y w} dy`, again in closed form.
    pub fn fourier(&self) -> Result<ClosedForm> {
        let mut terms = Vec::new();
        for t in &self.terms {
            match t {
                Term::Delta(d) => {
                    // (i w)^n e^{-i w x0}
                    let mut poly = vec![ZERO; d.order as usize + 1];
                    poly[d.order as usize] = d.coef * I.powu(d.order);
                    terms.push(Term::Gauss(GaussTerm {
                        poly,
                        a: ZERO,
                        b: C::new(0.0, -d.x0),
                        c0: ZERO,
                    }));
                }
                Term::Gauss(g) if g.a == ZERO => {
                    if g.b.re != 0.0 {
                        return Err(Error::Unsupported("exponentially growing term".into()));
                    }
                    // y^n e^{i eta y} -> 2 pi i^n delta^{(n)}(w - eta)
                    for (n, p) in g.poly.iter().enumerate() {
                        terms.push(Term::Delta(DeltaTerm {
                            coef: p * 2.0 * PI * I.powu(n as u32) * g.c0.exp(),
                            order: n as u32,
                            x0: g.b.im,
                        }));
                    }
                }
                Term::Gauss(g) => {
                    if g.a.re < 0.0 || (g.a.re == 0.0 && g.b.re != 0.0) {
                        return Err(Error::Unsupported("non-integrable Gaussian term".into()));
                    }
                    let base = GaussTerm::simple(
                        (c(PI) / g.a).sqrt(),
                        1.0 / (4.0 * g.a),
                        -I * g.b / (2.0 * g.a),
                        g.c0 + g.b * g.b / (4.0 * g.a),
                    );
                    // y^n f -> (i d/dw)^n F f
                    let mut acc = GaussTerm {
                        poly: Vec::new(),
                        ..base.clone()
                    };
                    let mut cur = base;
                    for p in &g.poly {
                        acc.poly = padd(&acc.poly, &cur.scaled(*p).poly);
                        cur = cur.deriv().scaled(I);
                    }
                    terms.push(Term::Gauss(acc));
                }
            }
        }
        Ok(ClosedForm { terms }.merged())
    }

    fn apply_x(&self) -> ClosedForm {
        let mut terms = Vec::new();
        for t in &self.terms {
            match t {
                Term::Gauss(g) => terms.push(Term::Gauss(g.times_y())),
                Term::Delta(d) => {
                    // y delta^{(n)}(y - x0) = x0 delta^{(n)} - n delta^{(n-1)}
                    terms.push(Term::Delta(DeltaTerm {
                        coef: d.coef * d.x0,
                        ..d.clone()
                    }));
                    if d.order > 0 {
                        terms.push(Term::Delta(DeltaTerm {
                            coef: -d.coef * d.order as f64,
                            order: d.order - 1,
                            x0: d.x0,
                        }));
                    }
                }
            }
        }
        ClosedForm { terms }.merged()
    }

    fn apply_d(&self) -> ClosedForm {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Gauss(g) => Term::Gauss(g.deriv().scaled(-I)),
                Term::Delta(d) => Term::Delta(DeltaTerm {
                    coef: -I * d.coef,
                    order: d.order + 1,
                    x0: d.x0,
                }),
            })
            .collect();
        ClosedForm { terms }.merged()
    }

    fn scaled(&self, s: C) -> ClosedForm {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Gauss(g) => Term::Gauss(g.scaled(s)),
                Term::Delta(d) => Term::Delta(DeltaTerm {
                    coef: d.coef * s,
                    ..d.clone()
                }),
            })
            .collect();
        ClosedForm { terms }
    }

    /// Weyl quantization of a polynomial symbol, applied exactly:
    /// `Op(x^j xi^k) = 2^{-j} sum_l C(j,l) X^l D^k X^{j-l}`.
    pub fn apply_weyl_poly(&self, a: &Poly2) -> ClosedForm {
        let mut terms = Vec::new();
        for ((j, k), coef) in &a.0 {
            for l in 0..=*j {
                let mut v = self.clone();
                for _ in 0..(j - l) {
                    v = v.apply_x();
                }
                for _ in 0..*k {
                    v = v.apply_d();
                }
                for _ in 0..l {
                    v = v.apply_x();
                }
                let w = coef * binom(*j, l) / 2f64.powi(*j as i32);
                terms.extend(v.scaled(w).terms);
            }
        }
        ClosedForm { terms }.merged()
    }

    /// Anti-Wick quantization of a polynomial symbol: the Weyl operator of its
    /// Gaussian smoothing.
    pub fn apply_antiwick_poly(&self, a: &Poly2) -> ClosedForm {
        self.apply_weyl_poly(&a.gauss_smoothed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::signal::hermite_function;

    fn cf(text: &str) -> ClosedForm {
        ClosedForm::from_expr(&SignalExpr::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn hermite_coefficients() {
        for k in 0..7 {
            let p = hermite_poly(k);
            for &y in &[-1.3, 0.0, 0.4, 2.5] {
                let v = peval(&p, c(y)).re * (-0.5 * y * y).exp();
                assert!((v - hermite_function(k, y)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn shift_matches_evaluation() {
        let p = vec![c(1.0), C::new(2.0, 1.0), c(-0.5), c(0.25)];
        let mu = C::new(0.7, -0.3);
        let q = pshift(&p, mu);
        let s = C::new(0.2, 0.9);
        assert!((peval(&q, s) - peval(&p, s + mu)).norm() < 1e-13);
    }

    #[test]
    fn gaussian_self_transform() {
        let u = cf("gauss(0, 0)");
        for &(x, xi) in &[(0.0, 0.0), (1.0, 2.0), (-3.0, 0.5)] {
            let v = u.stft_at(WindowKind::Gaussian, x, xi);
            assert!((v.norm() - (-(x * x + xi * xi) / 4.0f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn delta_magnitude_is_window() {
        let u = cf("delta");
        for &(x, xi) in &[(0.0, 0.0), (1.0, 200.0), (-2.0, -1500.0)] {
            let v = u.stft_at(WindowKind::Gaussian, x, xi);
            assert!((v.norm() - PI.powf(-0.25) * (-0.5 * x * x).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn planewave_magnitude() {
        let u = cf("planewave(5)");
        for &(x, xi) in &[(0.0, 5.0), (300.0, 4.0), (-1000.0, 7.0)] {
            let v = u.stft_at(WindowKind::Gaussian, x, xi);
            let want = (2.0 * PI.sqrt()).sqrt() * (-(xi - 5.0f64).powi(2) / 2.0).exp();
            assert!((v.norm() - want).abs() < 1e-9 * want.max(1.0), "{x} {xi}");
        }
    }

    #[test]
    fn delta_times_gauss() {
        let u = cf("delta(1) * gauss(0, 0)");
        let v = cf("delta(1)").stft_at(WindowKind::Gaussian, 0.3, 0.7) * PI.powf(-0.25) * (-0.5f64).exp();
        assert!((u.stft_at(WindowKind::Gaussian, 0.3, 0.7) - v).norm() < 1e-15);
    }

    #[test]
    fn fourier_pairs() {
        // F psi0 = sqrt(2 pi) psi0
        let f = cf("gauss(0,0)").fourier().unwrap();
        for &w in &[0.0, 1.0, -2.2] {
            let want = (2.0 * PI).sqrt() * hermite_function(0, w);
            assert!((f.eval(w).unwrap() - want).norm() < 1e-14);
        }
        // F h_k = (-i)^k sqrt(2 pi) h_k
        let f3 = cf("hermite(3)").fourier().unwrap();
        let want = I.powu(3).conj() * (2.0 * PI).sqrt() * hermite_function(3, 0.8);
        assert!((f3.eval(0.8).unwrap() - want).norm() < 1e-13);
        assert!(cf("planewave(5)").fourier().unwrap().has_delta());
        let fd = cf("delta").fourier().unwrap();
        assert_eq!(fd.eval(3.0).unwrap(), ONE);
        // chirp: F e^{i c y^2/2} = sqrt(2 pi i / c) e^{-i w^2 / (2c)}
        let fc = cf("chirp(2)").fourier().unwrap();
        let want = (C::new(0.0, 2.0 * PI / 2.0)).sqrt() * C::new(0.0, -1.5f64.powi(2) / 4.0).exp();
        assert!((fc.eval(1.5).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn harmonic_oscillator_on_hermite() {
        let h = Poly2::monomial(2, 0).add(&Poly2::monomial(0, 2));
        for k in 0..5u32 {
            let u = cf(&format!("hermite({k})"));
            let v = u.apply_weyl_poly(&h);
            let w = u.apply_antiwick_poly(&h);
            for &y in &[0.3, -1.1, 2.0] {
                let uy = u.eval(y).unwrap();
                assert!((v.eval(y).unwrap() - uy * (2 * k + 1) as f64).norm() < 1e-12);
                assert!((w.eval(y).unwrap() - uy * (2 * k + 2) as f64).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn weyl_of_x_xi_on_delta() {
        // Op(x xi) = (X D + D X)/2 ; on delta: X D delta = -i X delta' = -i(0 - delta) = i delta,
        // D X delta = 0, so Op(x xi) delta = i/2 delta at x0 = 0.
        let u = cf("delta");
        let v = u.apply_weyl_poly(&Poly2::monomial(1, 1));
        assert_eq!(v.terms.len(), 1);
        match &v.terms[0] {
            Term::Delta(d) => {
                assert_eq!(d.order, 0);
                assert!((d.coef - C::new(0.0, 0.5)).norm() < 1e-15);
            }
            t => panic!("{t:?}"),
        }
    }
}
