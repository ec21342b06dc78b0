//! Smooth step built from the `e^{-1/t}` bump, with exact derivatives.
//!
//! `S(t) = f(t) / (f(t) + f(1 - t))`, `f(t) = e^{-1/t}` for `t > 0`, so that
//! `S = 0` on `t <= 0`, `S = 1` on `t >= 1`, and `S` is smooth everywhere.
//! Derivatives are obtained by truncated Taylor arithmetic, which is exact up
//! to rounding.

/// Truncated Taylor series `sum c_i h^i` around a base point.
#[derive(Debug, Clone)]
struct Jet(Vec<f64>);

impl Jet {
    fn variable(t0: f64, order: usize, slope: f64) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = t0;
        if order >= 1 {
            c[1] = slope;
        }
        Jet(c)
    }

    fn recip(&self) -> Self {
        let a = &self.0;
        let mut r = vec![0.0; a.len()];
        r[0] = 1.0 / a[0];
        for n in 1..a.len() {
            let s: f64 = (1..=n).map(|k| a[k] * r[n - k]).sum();
            r[n] = -s / a[0];
        }
        Jet(r)
    }

    fn exp(&self) -> Self {
        let a = &self.0;
        let mut e = vec![0.0; a.len()];
        e[0] = a[0].exp();
        for n in 1..a.len() {
            let s: f64 = (1..=n).map(|k| k as f64 * a[k] * e[n - k]).sum();
            e[n] = s / n as f64;
        }
        Jet(e)
    }

    fn sub(&self, o: &Jet) -> Self {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    fn add_scalar(mut self, s: f64) -> Self {
        self.0[0] += s;
        self
    }
}

/// Value and derivatives `S^{(0..=order)}(t)` of the smooth step.
pub fn smoothstep_derivs(t: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    if t <= 0.0 {
        return out;
    }
    if t >= 1.0 {
        out[0] = 1.0;
        return out;
    }
    // S = 1 / (1 + exp(g)), g = 1/t - 1/(1-t)
    let g0 = 1.0 / t - 1.0 / (1.0 - t);
    if g0 > 700.0 {
        return out;
    }
    if g0 < -700.0 {
        out[0] = 1.0;
        return out;
    }
    let tj = Jet::variable(t, order, 1.0);
    let sj = Jet::variable(1.0 - t, order, -1.0);
    let g = tj.recip().sub(&sj.recip());
    let s = g.exp().add_scalar(1.0).recip();
    let mut fact = 1.0;
    for (k, c) in s.0.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        out[k] = c * fact;
    }
    out
}

/// The `k`-th derivative of the smooth step at `t`.
pub fn smoothstep(t: f64, k: u32) -> f64 {
    smoothstep_derivs(t, k as usize)[k as usize]
}
