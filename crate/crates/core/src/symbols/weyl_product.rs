//! Truncated asymptotic expansion of the Weyl product `a # b`.

use num_complex::Complex64;

use super::ShubinSymbol;
use crate::error::Result;
use crate::expr::symbol::{product, scale, sum};
use crate::expr::SymbolExpr;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Terms of `a # b` with `alpha + beta = k` (one space dimension):
/// `(-1)^beta / (alpha! beta!) 2^{-k} D_x^beta d_xi^alpha a * D_x^alpha d_xi^beta b`,
/// with `D = -i d`.
pub fn weyl_product_level(a: &SymbolExpr, b: &SymbolExpr, k: u32) -> SymbolExpr {
    let mi = Complex64::new(0.0, -1.0);
    let mut terms = Vec::new();
    for alpha in 0..=k {
        let beta = k - alpha;
        let da = a.partial(beta, alpha);
        let db = b.partial(alpha, beta);
        let sign = if beta % 2 == 0 { 1.0 } else { -1.0 };
        let c = mi.powu(k) * sign / (factorial(alpha) * factorial(beta) * 2f64.powi(k as i32));
        terms.push(scale(c, product(vec![da, db])));
    }
    sum(terms).simplified()
}

/// Sum of the levels `k < n` of the Weyl product expansion.
pub fn weyl_product_truncated(a: &ShubinSymbol, b: &ShubinSymbol, n: u32) -> Result<SymbolExpr> {
    if n == 0 {
        return Ok(SymbolExpr::Const(Complex64::new(0.0, 0.0)));
    }
    a.check_order(n - 1)?;
    b.check_order(n - 1)?;
    Ok(weyl_product_range(&a.expr, &b.expr, 0, n))
}

/// Sum of the levels `lo <= k < hi`.
pub fn weyl_product_range(a: &SymbolExpr, b: &SymbolExpr, lo: u32, hi: u32) -> SymbolExpr {
    sum((lo..hi).map(|k| weyl_product_level(a, b, k)).collect()).simplified()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn s(t: &str) -> ShubinSymbol {
        ShubinSymbol::parse(t, None).unwrap()
    }

    #[test]
    fn canonical_pairs() {
        let i = Complex64::new(0.0, 1.0);
        let xy = weyl_product_truncated(&s("x"), &s("xi"), 2).unwrap();
        let yx = weyl_product_truncated(&s("xi"), &s("x"), 2).unwrap();
        for &(x, y) in &[(0.0, 0.0), (1.5, -2.0)] {
            assert!((xy.eval(x, y) - (x * y + 0.5 * i)).norm() < 1e-15);
            assert!((yx.eval(x, y) - (x * y - 0.5 * i)).norm() < 1e-15);
        }
        for n in 1..4 {
            let one = weyl_product_truncated(&s("1"), &s("1"), n).unwrap();
            assert_eq!(one.eval(0.3, 0.2), Complex64::new(1.0, 0.0));
        }
        assert!(matches!(
            weyl_product_truncated(&s("x").with_closure(1), &s("xi"), 3),
            Err(Error::ClosureExceeded { .. })
        ));
    }

    #[test]
    fn bilinear() {
        let (a, b, c) = (s("x^2 + xi"), s("xi^2"), s("x * xi"));
        let lhs = weyl_product_truncated(&ShubinSymbol::parse("x^2 + xi + 2 * x * xi", None).unwrap(), &b, 3).unwrap();
        let r1 = weyl_product_truncated(&a, &b, 3).unwrap();
        let r2 = weyl_product_truncated(&c, &b, 3).unwrap();
        for &(x, y) in &[(0.7, -0.1), (-2.0, 3.0)] {
            assert!((lhs.eval(x, y) - r1.eval(x, y) - 2.0 * r2.eval(x, y)).norm() < 1e-12);
        }
    }
}
