//! Phase-space symbol expressions `a(x, xi)` with exact differentiation.
//!
//! Every primitive differentiates into a combination of primitives, so
//! `d/dx` and `d/dxi` can be applied any number of times without leaving the
//! tree. Angular and radial profiles carry their own derivative index.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt;

use super::poly::Poly2;
use super::parse::{check_arity, const_value, fmt_real, parse_node, Node};
use super::profile::smoothstep;
use crate::cone::wrap_angle;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Xi,
}

/// Parameters of a cone cutoff `chi(z) = ramp(|z|) * plateau(angle(z))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub inner: f64,
    pub w_angle: f64,
    pub w_radial: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolExpr {
    Const(Complex64),
    X,
    Xi,
    /// `<z>^m = (1 + x^2 + xi^2)^{m/2}`
    Bracket(f64),
    /// `|z|^p`
    Radius(f64),
    /// `exp(-|z|^2)`
    GaussZ,
    ConeCutoff(CutoffSpec),
    /// `d^k/dr^k` of the radial ramp, 0 below `inner`, 1 beyond `inner + width`.
    Ramp { inner: f64, width: f64, deriv: u32 },
    /// `d^k/dphi^k` of the angular plateau over `[lo, hi]` with edge width `width`.
    Plateau { lo: f64, hi: f64, width: f64, deriv: u32 },
    Sum(Vec<SymbolExpr>),
    Product(Vec<SymbolExpr>),
    Pow(Box<SymbolExpr>, i32),
}

use SymbolExpr as S;

pub fn constant(c: impl Into<Complex64>) -> SymbolExpr {
    S::Const(c.into())
}

fn is_zero(e: &SymbolExpr) -> bool {
    matches!(e, S::Const(c) if *c == Complex64::new(0.0, 0.0))
}

#[cfg(test)]
fn is_one(e: &SymbolExpr) -> bool {
    matches!(e, S::Const(c) if *c == Complex64::new(1.0, 0.0))
}

/// Sum with flattening, zero removal and constant folding.
pub fn sum(terms: Vec<SymbolExpr>) -> SymbolExpr {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut out = Vec::new();
    for t in terms {
        match t {
            S::Const(c) => acc += c,
            S::Sum(inner) => {
                for u in inner {
                    match u {
                        S::Const(c) => acc += c,
                        other => out.push(other),
                    }
                }
            }
            other => out.push(other),
        }
    }
    if acc != Complex64::new(0.0, 0.0) {
        out.push(S::Const(acc));
    }
    match out.len() {
        0 => S::Const(Complex64::new(0.0, 0.0)),
        1 => out.pop().unwrap(),
        _ => S::Sum(out),
    }
}

/// Product with flattening, zero absorption and constant folding.
pub fn product(factors: Vec<SymbolExpr>) -> SymbolExpr {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut out = Vec::new();
    for f in factors {
        match f {
            S::Const(c) => acc *= c,
            S::Product(inner) => {
                for u in inner {
                    match u {
                        S::Const(c) => acc *= c,
                        other => out.push(other),
                    }
                }
            }
            other => out.push(other),
        }
    }
    if acc == Complex64::new(0.0, 0.0) {
        return S::Const(acc);
    }
    if acc != Complex64::new(1.0, 0.0) || out.is_empty() {
        out.insert(0, S::Const(acc));
    }
    if out.len() == 1 {
        out.pop().unwrap()
    } else {
        S::Product(out)
    }
}

pub fn pow(base: SymbolExpr, n: i32) -> SymbolExpr {
    match (&base, n) {
        (_, 0) => constant(1.0),
        (_, 1) => base,
        (S::Const(c), n) => S::Const(c.powi(n)),
        (S::Pow(inner, m), n) => pow((**inner).clone(), m * n),
        _ => S::Pow(Box::new(base), n),
    }
}

pub fn scale(c: impl Into<Complex64>, e: SymbolExpr) -> SymbolExpr {
    product(vec![S::Const(c.into()), e])
}

impl SymbolExpr {
    pub fn cone_cutoff(spec: CutoffSpec) -> Result<Self> {
        let width = spec.theta_hi - spec.theta_lo;
        if !(width > 0.0 && width < TAU) {
            return Err(Error::Cone(format!("angular width {width} outside (0, 2pi)")));
        }
        if !(spec.w_angle > 0.0 && spec.w_angle < width / 2.0) {
            return Err(Error::Precondition(format!(
                "angular transition width {} must lie in (0, {})",
                spec.w_angle,
                width / 2.0
            )));
        }
        if !(spec.inner > 0.0 && spec.w_radial > 0.0) {
            return Err(Error::Precondition(
                "inner radius and radial transition width must be positive".into(),
            ));
        }
        Ok(S::ConeCutoff(spec))
    }

    /// Exact partial derivative in one variable.
    pub fn derivative(&self, var: Var) -> SymbolExpr {
        let v = || match var {
            Var::X => S::X,
            Var::Xi => S::Xi,
        };
        match self {
            S::Const(_) => constant(0.0),
            S::X => constant(if var == Var::X { 1.0 } else { 0.0 }),
            S::Xi => constant(if var == Var::Xi { 1.0 } else { 0.0 }),
            S::Bracket(m) => {
                if *m == 0.0 {
                    constant(0.0)
                } else {
                    product(vec![constant(*m), v(), S::Bracket(m - 2.0)])
                }
            }
            S::Radius(p) => {
                if *p == 0.0 {
                    constant(0.0)
                } else {
                    product(vec![constant(*p), v(), S::Radius(p - 2.0)])
                }
            }
            S::GaussZ => product(vec![constant(-2.0), v(), S::GaussZ]),
            S::ConeCutoff(c) => product(vec![
                S::Ramp {
                    inner: c.inner,
                    width: c.w_radial,
                    deriv: 0,
                },
                S::Plateau {
                    lo: c.theta_lo,
                    hi: c.theta_hi,
                    width: c.w_angle,
                    deriv: 0,
                },
            ])
            .derivative(var),
            S::Ramp {
                inner,
                width,
                deriv,
            } => product(vec![
                S::Ramp {
                    inner: *inner,
                    width: *width,
                    deriv: deriv + 1,
                },
                v(),
                S::Radius(-1.0),
            ]),
            S::Plateau {
                lo,
                hi,
                width,
                deriv,
            } => {
                // d(phi)/dx = -xi/r^2, d(phi)/dxi = x/r^2
                let (sign, other) = match var {
                    Var::X => (-1.0, S::Xi),
                    Var::Xi => (1.0, S::X),
                };
                product(vec![
                    S::Plateau {
                        lo: *lo,
                        hi: *hi,
                        width: *width,
                        deriv: deriv + 1,
                    },
                    constant(sign),
                    other,
                    S::Radius(-2.0),
                ])
            }
            S::Sum(terms) => sum(terms.iter().map(|t| t.derivative(var)).collect()),
            S::Product(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for i in 0..fs.len() {
                    let d = fs[i].derivative(var);
                    if is_zero(&d) {
                        continue;
                    }
                    let mut f: Vec<SymbolExpr> = Vec::with_capacity(fs.len());
                    for (j, g) in fs.iter().enumerate() {
                        f.push(if i == j { d.clone() } else { g.clone() });
                    }
                    terms.push(product(f));
                }
                sum(terms)
            }
            S::Pow(base, n) => {
                let d = base.derivative(var);
                if is_zero(&d) {
                    return constant(0.0);
                }
                product(vec![constant(*n as f64), pow((**base).clone(), n - 1), d])
            }
        }
    }

    /// `d^i/dx^i d^j/dxi^j`, collected into a sum of monomials.
    pub fn partial(&self, i: u32, j: u32) -> SymbolExpr {
        let mut e = self.clone();
        for _ in 0..i {
            e = e.derivative(Var::X).simplified();
        }
        for _ in 0..j {
            e = e.derivative(Var::Xi).simplified();
        }
        e
    }

    /// Expands into monomials in the atoms and merges equal monomials.
    /// Powers of `radius` and `bracket` are combined.
    pub fn simplified(&self) -> SymbolExpr {
        let mut merged: Vec<Mono> = Vec::new();
        for m in monos(self) {
            if let Some(t) = merged.iter_mut().find(|t| t.same_key(&m)) {
                t.coef += m.coef;
            } else {
                merged.push(m);
            }
        }
        sum(merged
            .into_iter()
            .filter(|m| m.coef != Complex64::new(0.0, 0.0))
            .map(Mono::rebuild)
            .collect())
    }

    pub fn eval(&self, x: f64, xi: f64) -> Complex64 {
        let re = |v: f64| Complex64::new(v, 0.0);
        match self {
            S::Const(c) => *c,
            S::X => re(x),
            S::Xi => re(xi),
            S::Bracket(m) => re((1.0 + x * x + xi * xi).powf(m / 2.0)),
            S::Radius(p) => {
                let r2 = x * x + xi * xi;
                if *p == 2.0 {
                    re(r2)
                } else {
                    re(r2.powf(p / 2.0))
                }
            }
            S::GaussZ => re((-(x * x + xi * xi)).exp()),
            S::ConeCutoff(c) => re(ramp(x.hypot(xi), c.inner, c.w_radial, 0)
                * plateau(xi.atan2(x), c.theta_lo, c.theta_hi, c.w_angle, 0)),
            S::Ramp {
                inner,
                width,
                deriv,
            } => re(ramp(x.hypot(xi), *inner, *width, *deriv)),
            S::Plateau {
                lo,
                hi,
                width,
                deriv,
            } => re(plateau(xi.atan2(x), *lo, *hi, *width, *deriv)),
            S::Sum(ts) => ts.iter().map(|t| t.eval(x, xi)).sum(),
            S::Product(fs) => {
                let mut acc = Complex64::new(1.0, 0.0);
                let mut zero = false;
                for f in fs {
                    let v = f.eval(x, xi);
                    if v == Complex64::new(0.0, 0.0) {
                        zero = true;
                    }
                    acc *= v;
                }
                // a vanishing cutoff factor wins over singular radius factors
                if zero {
                    Complex64::new(0.0, 0.0)
                } else {
                    acc
                }
            }
            S::Pow(b, n) => b.eval(x, xi).powi(*n),
        }
    }

    /// Order assigned by the grammar rules: `bracket(m)` has order `m`, cutoffs
    /// order 0, coordinates order 1, Gaussians `-inf`; products add, sums take
    /// the maximum.
    pub fn inferred_order(&self) -> f64 {
        match self {
            S::Const(c) => {
                if *c == Complex64::new(0.0, 0.0) {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
            S::X | S::Xi => 1.0,
            S::Bracket(m) => *m,
            S::Radius(p) => *p,
            S::GaussZ => f64::NEG_INFINITY,
            S::ConeCutoff(_) => 0.0,
            S::Ramp { deriv, .. } => {
                if *deriv == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            S::Plateau { .. } => 0.0,
            S::Sum(ts) => ts
                .iter()
                .map(|t| t.inferred_order())
                .fold(f64::NEG_INFINITY, f64::max),
            S::Product(fs) => fs.iter().map(|f| f.inferred_order()).sum(),
            S::Pow(b, n) => {
                let o = b.inferred_order();
                if o.is_infinite() && *n < 0 {
                    f64::INFINITY
                } else {
                    o * *n as f64
                }
            }
        }
    }

    /// True when the tree only involves constants, coordinates, even
    /// nonnegative brackets, sums, products and nonnegative powers.
    pub fn is_polynomial(&self) -> bool {
        match self {
            S::Const(_) | S::X | S::Xi => true,
            S::Bracket(m) => *m >= 0.0 && m.fract() == 0.0 && (*m as i64) % 2 == 0,
            S::Sum(ts) => ts.iter().all(|t| t.is_polynomial()),
            S::Product(fs) => fs.iter().all(|t| t.is_polynomial()),
            S::Pow(b, n) => *n >= 0 && b.is_polynomial(),
            _ => false,
        }
    }

    /// Exact polynomial form, when the tree is polynomial.
    pub fn as_polynomial(&self) -> Option<Poly2> {
        let one = Complex64::new(1.0, 0.0);
        Some(match self {
            S::Const(c) => Poly2::constant(*c),
            S::X => Poly2::monomial(1, 0),
            S::Xi => Poly2::monomial(0, 1),
            S::Bracket(m) if self.is_polynomial() => {
                let q = Poly2::constant(one)
                    .add(&Poly2::monomial(2, 0))
                    .add(&Poly2::monomial(0, 2));
                q.pow((*m / 2.0) as u32)
            }
            S::Sum(ts) => {
                let mut acc = Poly2::default();
                for t in ts {
                    acc = acc.add(&t.as_polynomial()?);
                }
                acc
            }
            S::Product(fs) => {
                let mut acc = Poly2::constant(one);
                for f in fs {
                    acc = acc.mul(&f.as_polynomial()?);
                }
                acc
            }
            S::Pow(b, n) if *n >= 0 => b.as_polynomial()?.pow(*n as u32),
            _ => return None,
        })
    }

    pub fn node_count(&self) -> usize {
        match self {
            S::Sum(v) | S::Product(v) => 1 + v.iter().map(|t| t.node_count()).sum::<usize>(),
            S::Pow(b, _) => 1 + b.node_count(),
            _ => 1,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        from_node(&parse_node(text)?)
    }
}

#[derive(Debug, Clone)]
struct Mono {
    coef: Complex64,
    x: i32,
    xi: i32,
    radius: f64,
    bracket: f64,
    gauss: i32,
    others: Vec<(SymbolExpr, i32)>,
}

impl Mono {
    fn one() -> Self {
        Mono {
            coef: Complex64::new(1.0, 0.0),
            x: 0,
            xi: 0,
            radius: 0.0,
            bracket: 0.0,
            gauss: 0,
            others: Vec::new(),
        }
    }

    fn same_key(&self, o: &Mono) -> bool {
        self.x == o.x
            && self.xi == o.xi
            && self.radius == o.radius
            && self.bracket == o.bracket
            && self.gauss == o.gauss
            && self.others == o.others
    }

    fn mul(&self, o: &Mono) -> Mono {
        let mut others = self.others.clone();
        for (e, n) in &o.others {
            if let Some(slot) = others.iter_mut().find(|(f, _)| f == e) {
                slot.1 += n;
            } else {
                others.push((e.clone(), *n));
            }
        }
        others.retain(|(_, n)| *n != 0);
        others.sort_by_key(|(e, _)| e.to_string());
        Mono {
            coef: self.coef * o.coef,
            x: self.x + o.x,
            xi: self.xi + o.xi,
            radius: self.radius + o.radius,
            bracket: self.bracket + o.bracket,
            gauss: self.gauss + o.gauss,
            others,
        }
    }

    fn powi(&self, n: i32) -> Mono {
        Mono {
            coef: self.coef.powi(n),
            x: self.x * n,
            xi: self.xi * n,
            radius: self.radius * n as f64,
            bracket: self.bracket * n as f64,
            gauss: self.gauss * n,
            others: self.others.iter().map(|(e, k)| (e.clone(), k * n)).collect(),
        }
    }

    fn rebuild(self) -> SymbolExpr {
        let mut f = vec![S::Const(self.coef)];
        if self.x != 0 {
            f.push(pow(S::X, self.x));
        }
        if self.xi != 0 {
            f.push(pow(S::Xi, self.xi));
        }
        if self.radius != 0.0 {
            f.push(S::Radius(self.radius));
        }
        if self.bracket != 0.0 {
            f.push(S::Bracket(self.bracket));
        }
        if self.gauss != 0 {
            f.push(pow(S::GaussZ, self.gauss));
        }
        for (e, n) in self.others {
            f.push(pow(e, n));
        }
        product(f)
    }
}

fn monos(e: &SymbolExpr) -> Vec<Mono> {
    let single = |f: &dyn Fn(&mut Mono)| {
        let mut m = Mono::one();
        f(&mut m);
        vec![m]
    };
    match e {
        S::Const(c) => single(&|m| m.coef = *c),
        S::X => single(&|m| m.x = 1),
        S::Xi => single(&|m| m.xi = 1),
        S::Radius(p) => single(&|m| m.radius = *p),
        S::Bracket(b) => single(&|m| m.bracket = *b),
        S::GaussZ => single(&|m| m.gauss = 1),
        S::ConeCutoff(_) | S::Ramp { .. } | S::Plateau { .. } => {
            single(&|m| m.others = vec![(e.clone(), 1)])
        }
        S::Sum(ts) => ts.iter().flat_map(monos).collect(),
        S::Product(fs) => {
            let mut acc = vec![Mono::one()];
            for f in fs {
                let ms = monos(f);
                acc = acc.iter().flat_map(|a| ms.iter().map(move |b| a.mul(b))).collect();
            }
            acc
        }
        S::Pow(b, n) => {
            let ms = monos(b);
            if ms.len() == 1 {
                vec![ms[0].powi(*n)]
            } else if *n > 0 {
                let mut acc = vec![Mono::one()];
                for _ in 0..*n {
                    acc = acc.iter().flat_map(|a| ms.iter().map(move |b| a.mul(b))).collect();
                }
                acc
            } else {
                vec![Mono {
                    others: vec![(S::Pow(Box::new(b.simplified()), *n), 1)],
                    ..Mono::one()
                }]
            }
        }
    }
}

fn ramp(r: f64, inner: f64, width: f64, k: u32) -> f64 {
    smoothstep((r - inner) / width, k) / width.powi(k as i32)
}

fn plateau(phi: f64, lo: f64, hi: f64, width: f64, k: u32) -> f64 {
    let span = hi - lo;
    let t = wrap_angle(phi - lo);
    if t > span {
        return 0.0;
    }
    let scale = width.powi(k as i32);
    if t < width {
        smoothstep(t / width, k) / scale
    } else if t > span - width {
        let s = smoothstep((span - t) / width, k) / scale;
        if k % 2 == 1 {
            -s
        } else {
            s
        }
    } else if k == 0 {
        1.0
    } else {
        0.0
    }
}

fn from_node(node: &Node) -> Result<SymbolExpr> {
    Ok(match node {
        Node::Num(v) => constant(*v),
        Node::Str(_, off) => {
            return Err(Error::Syntax {
                offset: *off,
                message: "string literals are not valid in symbols".into(),
            })
        }
        Node::Add(ts) => S::Sum(ts.iter().map(from_node).collect::<Result<_>>()?),
        Node::Mul(fs) => S::Product(fs.iter().map(from_node).collect::<Result<_>>()?),
        Node::Neg(inner) => S::Product(vec![constant(-1.0), from_node(inner)?]),
        Node::Pow(b, n) => S::Pow(Box::new(from_node(b)?), *n),
        Node::Ident { name, args, offset } => {
            let off = *offset;
            let args_v: &[Node] = args.as_deref().unwrap_or(&[]);
            let num = |i: usize| const_value(&args_v[i], off);
            match (name.as_str(), args.is_some()) {
                ("x", false) => S::X,
                ("xi", false) => S::Xi,
                ("i", false) => constant(Complex64::new(0.0, 1.0)),
                ("pi", false) => constant(std::f64::consts::PI),
                ("gaussz", _) => {
                    check_arity(name, args_v, &[0], off)?;
                    S::GaussZ
                }
                ("const", true) => {
                    check_arity(name, args_v, &[1, 2], off)?;
                    let im = if args_v.len() == 2 { num(1)? } else { 0.0 };
                    constant(Complex64::new(num(0)?, im))
                }
                ("bracket", true) => {
                    check_arity(name, args_v, &[1], off)?;
                    S::Bracket(num(0)?)
                }
                ("radius", true) => {
                    check_arity(name, args_v, &[1], off)?;
                    S::Radius(num(0)?)
                }
                ("coneCutoff", true) => {
                    check_arity(name, args_v, &[5], off)?;
                    SymbolExpr::cone_cutoff(CutoffSpec {
                        theta_lo: num(0)?,
                        theta_hi: num(1)?,
                        inner: num(2)?,
                        w_angle: num(3)?,
                        w_radial: num(4)?,
                    })?
                }
                ("ramp", true) => {
                    check_arity(name, args_v, &[3], off)?;
                    S::Ramp {
                        inner: num(0)?,
                        width: num(1)?,
                        deriv: num(2)? as u32,
                    }
                }
                ("plateau", true) => {
                    check_arity(name, args_v, &[4], off)?;
                    S::Plateau {
                        lo: num(0)?,
                        hi: num(1)?,
                        width: num(2)?,
                        deriv: num(3)? as u32,
                    }
                }
                ("x" | "xi" | "i" | "pi", true) => {
                    return Err(Error::Arity {
                        name: name.clone(),
                        expected: "0".into(),
                        got: args_v.len(),
                        offset: off,
                    })
                }
                ("const" | "bracket" | "radius" | "coneCutoff" | "ramp" | "plateau", false) => {
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

fn fmt_const(c: Complex64) -> String {
    if c.im == 0.0 && c.re >= 0.0 && c.re.is_sign_positive() {
        fmt_real(c.re)
    } else if c.im == 0.0 {
        format!("const({})", fmt_real(c.re))
    } else {
        format!("const({}, {})", fmt_real(c.re), fmt_real(c.im))
    }
}

fn is_atomic(e: &SymbolExpr) -> bool {
    !matches!(e, S::Sum(_) | S::Product(_) | S::Pow(_, _))
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            S::Const(c) => write!(f, "{}", fmt_const(*c)),
            S::X => write!(f, "x"),
            S::Xi => write!(f, "xi"),
            S::Bracket(m) => write!(f, "bracket({})", fmt_real(*m)),
            S::Radius(p) => write!(f, "radius({})", fmt_real(*p)),
            S::GaussZ => write!(f, "gaussz"),
            S::ConeCutoff(c) => write!(
                f,
                "coneCutoff({}, {}, {}, {}, {})",
                fmt_real(c.theta_lo),
                fmt_real(c.theta_hi),
                fmt_real(c.inner),
                fmt_real(c.w_angle),
                fmt_real(c.w_radial)
            ),
            S::Ramp {
                inner,
                width,
                deriv,
            } => write!(f, "ramp({}, {}, {deriv})", fmt_real(*inner), fmt_real(*width)),
            S::Plateau {
                lo,
                hi,
                width,
                deriv,
            } => write!(
                f,
                "plateau({}, {}, {}, {deriv})",
                fmt_real(*lo),
                fmt_real(*hi),
                fmt_real(*width)
            ),
            S::Sum(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    if matches!(t, S::Sum(_)) {
                        write!(f, "({t})")?;
                    } else {
                        write!(f, "{t}")?;
                    }
                }
                Ok(())
            }
            S::Product(fs) => {
                for (i, t) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    if matches!(t, S::Sum(_) | S::Product(_)) {
                        write!(f, "({t})")?;
                    } else {
                        write!(f, "{t}")?;
                    }
                }
                Ok(())
            }
            S::Pow(b, n) => {
                if is_atomic(b) && !matches!(**b, S::Const(_)) {
                    write!(f, "{b}^{n}")
                } else {
                    write!(f, "({b})^{n}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_declared_order() {
        let a = SymbolExpr::parse("bracket(2)").unwrap();
        assert_eq!(a, S::Bracket(2.0));
        assert_eq!(a.inferred_order(), 2.0);
        let b = SymbolExpr::parse("x * xi + bracket(-1)").unwrap();
        assert_eq!(b.inferred_order(), 2.0);
        let c = SymbolExpr::parse("coneCutoff(0, 1, 2, 0.2, 1) * bracket(3)").unwrap();
        assert_eq!(c.inferred_order(), 3.0);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            SymbolExpr::parse("foo(1)"),
            Err(Error::UnknownPrimitive { .. })
        ));
        assert!(matches!(
            SymbolExpr::parse("bracket(1, 2)"),
            Err(Error::Arity { got: 2, .. })
        ));
        assert!(SymbolExpr::parse("coneCutoff(0, 1, 2, 0.6, 1)").is_err());
    }

    #[test]
    fn bracket_second_derivative_is_constant() {
        let a = SymbolExpr::parse("1 + x^2 + xi^2").unwrap();
        let d = a.partial(2, 0);
        for &(x, y) in &[(0.0, 0.0), (3.0, -2.0), (10.0, 7.0)] {
            assert!((d.eval(x, y) - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        }
        let b = S::Bracket(2.0).partial(2, 0);
        for &(x, y) in &[(0.5, 0.1), (3.0, -2.0)] {
            assert!((b.eval(x, y).re - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_derivatives_vanish() {
        let c = constant(3.0);
        for (i, j) in [(1, 0), (0, 1), (2, 3)] {
            assert!(is_zero(&c.partial(i, j)));
        }
        assert!(is_one(&S::X.derivative(Var::X)));
    }

    #[test]
    fn polynomial_extraction() {
        let p = SymbolExpr::parse("bracket(2) * x + 2 * xi^2").unwrap().as_polynomial().unwrap();
        assert_eq!(p.eval(2.0, 3.0), Complex64::new((1.0 + 4.0 + 9.0) * 2.0 + 18.0, 0.0));
        assert!(SymbolExpr::parse("bracket(1)").unwrap().as_polynomial().is_none());
        assert!(SymbolExpr::parse("x^-1").unwrap().as_polynomial().is_none());
    }

    #[test]
    fn simplification_preserves_values() {
        let e = SymbolExpr::parse("(x + xi) * (x - xi) * radius(2) * radius(-2) + bracket(2) * bracket(-1)").unwrap();
        let s = e.simplified();
        for &(x, y) in &[(1.0, 2.0), (-3.0, 0.5)] {
            assert!((e.eval(x, y) - s.eval(x, y)).norm() < 1e-12);
        }
        assert_eq!(SymbolExpr::parse("x * xi - xi * x").unwrap().simplified(), constant(0.0));
    }

    #[test]
    fn cutoff_values() {
        let spec = CutoffSpec {
            theta_lo: -0.5,
            theta_hi: 0.5,
            inner: 2.0,
            w_angle: 0.1,
            w_radial: 1.0,
        };
        let chi = SymbolExpr::cone_cutoff(spec).unwrap();
        let r = 2.0 * (2.0 + 1.0);
        assert_eq!(chi.eval(r, 0.0).re, 1.0);
        assert_eq!(chi.eval(-r, 0.0).re, 0.0);
        assert_eq!(chi.eval(0.0, r).re, 0.0);
        assert_eq!(chi.eval(0.0, 0.0).re, 0.0);
        let d = chi.partial(1, 1);
        assert!(d.eval(0.0, 0.0).re.is_finite());
    }

    #[test]
    fn display_roundtrip_examples() {
        for text in [
            "x * xi + const(0, 0.5)",
            "bracket(-2) * coneCutoff(-0.5, 0.5, 2.0, 0.1, 1.0)",
            "(1.0 + x)^-1 * gaussz",
            "const(-1.0) * (x + xi)",
            "plateau(0.0, 1.0, 0.2, 2) * radius(-2.0)",
        ] {
            let e = SymbolExpr::parse(text).unwrap();
            let back = SymbolExpr::parse(&e.to_string()).unwrap();
            assert_eq!(e, back, "{text} -> {e}");
        }
    }
}
