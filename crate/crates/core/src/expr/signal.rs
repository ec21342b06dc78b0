//! Signal expressions `u(y)` built from time-frequency primitives.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

use super::parse::{check_arity, const_value, fmt_real, parse_node, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SignalExpr {
    /// `e^{i y xi0} psi0(y - x0)`
    Gauss { x0: f64, xi0: f64 },
    /// `e^{i c y^2 / 2}`
    Chirp(f64),
    /// `e^{i y xi0}`
    PlaneWave(f64),
    /// L1-normalized Gaussian of width `eps`.
    DeltaApprox(f64),
    /// Exact point mass at `x0`; sampled as a Kronecker spike of mass one.
    Delta(f64),
    /// Normalized Hermite function of degree `k`.
    Hermite(u32),
    /// Samples read from a `re,im` or `x,re,im` CSV file.
    File(String),
    Const(Complex64),
    Sum(Vec<SignalExpr>),
    Product(Vec<SignalExpr>),
}

use SignalExpr as E;

/// Normalized Hermite functions `h_0..=h_k` at `y`.
pub fn hermite_functions(k: u32, y: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(k as usize + 1);
    h.push(PI.powf(-0.25) * (-0.5 * y * y).exp());
    if k >= 1 {
        h.push(2f64.sqrt() * y * h[0]);
    }
    for n in 1..k as usize {
        let next = (2.0 / (n as f64 + 1.0)).sqrt() * y * h[n]
            - (n as f64 / (n as f64 + 1.0)).sqrt() * h[n - 1];
        h.push(next);
    }
    h
}

pub fn hermite_function(k: u32, y: f64) -> f64 {
    hermite_functions(k, y)[k as usize]
}

impl SignalExpr {
    pub fn parse(text: &str) -> Result<Self> {
        from_node(&parse_node(text)?)
    }

    pub fn scaled(c: impl Into<Complex64>, e: SignalExpr) -> SignalExpr {
        E::Product(vec![E::Const(c.into()), e])
    }

    /// Pointwise value. Exact deltas and file inputs have no pointwise value.
    pub fn eval(&self, y: f64) -> Result<Complex64> {
        Ok(match self {
            E::Gauss { x0, xi0 } => {
                let d = y - x0;
                Complex64::from_polar(PI.powf(-0.25) * (-0.5 * d * d).exp(), y * xi0)
            }
            E::Chirp(c) => Complex64::from_polar(1.0, 0.5 * c * y * y),
            E::PlaneWave(xi0) => Complex64::from_polar(1.0, y * xi0),
            E::DeltaApprox(eps) => {
                let t = y / eps;
                Complex64::new((-0.5 * t * t).exp() / ((2.0 * PI).sqrt() * eps), 0.0)
            }
            E::Hermite(k) => Complex64::new(hermite_function(*k, y), 0.0),
            E::Const(c) => *c,
            E::Sum(ts) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in ts {
                    acc += t.eval(y)?;
                }
                acc
            }
            E::Product(fs) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for f in fs {
                    acc *= f.eval(y)?;
                }
                acc
            }
            E::Delta(_) => {
                return Err(Error::Eval("delta has no pointwise value".into()));
            }
            E::File(p) => {
                return Err(Error::Eval(format!("file(\"{p}\") has no pointwise value")));
            }
        })
    }

    /// True if some term does not decay at infinity (plane waves, chirps).
    pub fn has_nondecaying_part(&self) -> bool {
        match self {
            E::Chirp(_) | E::PlaneWave(_) => true,
            E::Const(c) => *c != Complex64::new(0.0, 0.0),
            E::Sum(ts) => ts.iter().any(|t| t.has_nondecaying_part()),
            E::Product(fs) => {
                // a product decays as soon as one factor does
                fs.iter().all(|f| f.has_nondecaying_part())
            }
            _ => false,
        }
    }

    pub fn contains_file(&self) -> bool {
        match self {
            E::File(_) => true,
            E::Sum(v) | E::Product(v) => v.iter().any(|t| t.contains_file()),
            _ => false,
        }
    }

    /// Width of the narrowest `deltaApprox` in the tree.
    pub fn min_delta_width(&self) -> Option<f64> {
        match self {
            E::DeltaApprox(e) => Some(*e),
            E::Sum(v) | E::Product(v) => v
                .iter()
                .filter_map(|t| t.min_delta_width())
                .reduce(f64::min),
            _ => None,
        }
    }
}

fn from_node(node: &Node) -> Result<SignalExpr> {
    Ok(match node {
        Node::Num(v) => E::Const(Complex64::new(*v, 0.0)),
        Node::Str(_, off) => {
            return Err(Error::Syntax {
                offset: *off,
                message: "string literal outside file(...)".into(),
            })
        }
        Node::Add(ts) => E::Sum(ts.iter().map(from_node).collect::<Result<_>>()?),
        Node::Mul(fs) => E::Product(fs.iter().map(from_node).collect::<Result<_>>()?),
        Node::Neg(inner) => E::Product(vec![E::Const(Complex64::new(-1.0, 0.0)), from_node(inner)?]),
        Node::Pow(b, n) => {
            if *n < 0 {
                return Err(Error::Unsupported("negative powers of signals".into()));
            }
            let base = from_node(b)?;
            if *n == 0 {
                E::Const(Complex64::new(1.0, 0.0))
            } else {
                E::Product(vec![base; *n as usize])
            }
        }
        Node::Ident { name, args, offset } => {
            let off = *offset;
            let a: &[Node] = args.as_deref().unwrap_or(&[]);
            let num = |i: usize| const_value(&a[i], off);
            match (name.as_str(), args.is_some()) {
                ("i", false) => E::Const(Complex64::new(0.0, 1.0)),
                ("pi", false) => E::Const(Complex64::new(PI, 0.0)),
                ("delta", false) => E::Delta(0.0),
                ("gauss", true) => {
                    check_arity(name, a, &[2], off)?;
                    E::Gauss { x0: num(0)?, xi0: num(1)? }
                }
                ("chirp", true) => {
                    check_arity(name, a, &[1], off)?;
                    E::Chirp(num(0)?)
                }
                ("planewave", true) => {
                    check_arity(name, a, &[1], off)?;
                    E::PlaneWave(num(0)?)
                }
                ("deltaApprox", true) => {
                    check_arity(name, a, &[1], off)?;
                    let eps = num(0)?;
                    if !(eps > 0.0) {
                        return Err(Error::Precondition(format!("deltaApprox width {eps} must be positive")));
                    }
                    E::DeltaApprox(eps)
                }
                ("delta", true) => {
                    check_arity(name, a, &[0, 1], off)?;
                    E::Delta(if a.is_empty() { 0.0 } else { num(0)? })
                }
                ("hermite", true) => {
                    check_arity(name, a, &[1], off)?;
                    let k = num(0)?;
                    if k < 0.0 || k.fract() != 0.0 {
                        return Err(Error::Precondition(format!("hermite degree {k} must be a nonnegative integer")));
                    }
                    E::Hermite(k as u32)
                }
                ("const", true) => {
                    check_arity(name, a, &[1, 2], off)?;
                    let im = if a.len() == 2 { num(1)? } else { 0.0 };
                    E::Const(Complex64::new(num(0)?, im))
                }
                ("file", true) => {
                    check_arity(name, a, &[1], off)?;
                    match &a[0] {
                        Node::Str(s, _) => E::File(s.clone()),
                        _ => {
                            return Err(Error::Syntax {
                                offset: off,
                                message: "file(...) expects a quoted path".into(),
                            })
                        }
                    }
                }
                ("gauss" | "chirp" | "planewave" | "deltaApprox" | "hermite" | "const" | "file", false) => {
                    return Err(Error::Syntax {
                        offset: off,
                        message: format!("`{name}` requires an argument list"),
                    })
                }
                _ => {
                    return Err(Error::UnknownPrimitive {
                        name: name.clone(),
                        offset: off,
                    })
                }
            }
        }
    })
}

impl fmt::Display for SignalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            E::Gauss { x0, xi0 } => write!(f, "gauss({}, {})", fmt_real(*x0), fmt_real(*xi0)),
            E::Chirp(c) => write!(f, "chirp({})", fmt_real(*c)),
            E::PlaneWave(x) => write!(f, "planewave({})", fmt_real(*x)),
            E::DeltaApprox(e) => write!(f, "deltaApprox({})", fmt_real(*e)),
            E::Delta(x0) => write!(f, "delta({})", fmt_real(*x0)),
            E::Hermite(k) => write!(f, "hermite({k})"),
            E::File(p) => write!(f, "file(\"{p}\")"),
            E::Const(c) => {
                if c.im == 0.0 && c.re.is_sign_positive() {
                    write!(f, "{}", fmt_real(c.re))
                } else {
                    write!(f, "const({}, {})", fmt_real(c.re), fmt_real(c.im))
                }
            }
            E::Sum(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    if matches!(t, E::Sum(_)) {
                        write!(f, "({t})")?;
                    } else {
                        write!(f, "{t}")?;
                    }
                }
                Ok(())
            }
            E::Product(fs) => {
                for (i, t) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    if matches!(t, E::Sum(_) | E::Product(_)) {
                        write!(f, "({t})")?;
                    } else {
                        write!(f, "{t}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_two() {
        match SignalExpr::parse("planewave(5) + chirp(2)").unwrap() {
            E::Sum(v) => {
                assert_eq!(v, vec![E::PlaneWave(5.0), E::Chirp(2.0)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_offsets() {
        assert!(matches!(SignalExpr::parse("gauss(,1)"), Err(Error::Syntax { offset: 6, .. })));
        assert!(matches!(SignalExpr::parse("gauss(1)"), Err(Error::Arity { got: 1, .. })));
        assert!(matches!(
            SignalExpr::parse("2 * wobble(1)"),
            Err(Error::UnknownPrimitive { offset: 4, .. })
        ));
        assert!(SignalExpr::parse("deltaApprox(0)").is_err());
        assert!(SignalExpr::parse("hermite(-1)").is_err());
    }

    #[test]
    fn point_values() {
        let g = SignalExpr::parse("gauss(0,0)").unwrap();
        assert!((g.eval(0.0).unwrap().re - PI.powf(-0.25)).abs() < 1e-15);
        let h = SignalExpr::parse("hermite(1)").unwrap();
        assert_eq!(h.eval(0.0).unwrap().norm(), 0.0);
        assert!(SignalExpr::parse("delta").unwrap().eval(0.0).is_err());
    }

    #[test]
    fn hermite_orthonormal() {
        let h = 0.01;
        for j in 0..6u32 {
            for k in 0..6u32 {
                let s: f64 = (-2000..=2000)
                    .map(|i| {
                        let y = i as f64 * h;
                        hermite_function(j, y) * hermite_function(k, y) * h
                    })
                    .sum();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-10, "{j} {k} {s}");
            }
        }
    }

    #[test]
    fn roundtrip() {
        for t in [
            "gauss(1.5, -2) + 0.5 * hermite(3)",
            "planewave(5) * (chirp(2) + delta(0.25))",
            "const(0, 1) * deltaApprox(0.1) + file(\"in.csv\")",
            "const(-2, 0) * gauss(0, 0)",
        ] {
            let e = SignalExpr::parse(t).unwrap();
            assert_eq!(SignalExpr::parse(&e.to_string()).unwrap(), e, "{t}");
        }
    }
}
