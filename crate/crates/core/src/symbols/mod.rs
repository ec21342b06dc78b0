//! Shubin symbol calculus.

pub mod charset;
pub mod fit;
pub mod parametrix;
pub mod seminorm;
pub mod weyl_product;
pub mod wick;

use num_complex::Complex64;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expr::poly::Poly2;
use crate::expr::SymbolExpr;

pub const DEFAULT_CLOSURE: u32 = 6;

/// Anything that can be evaluated on phase space.
pub trait PhaseSymbol: Sync {
    fn eval(&self, x: f64, xi: f64) -> Complex64;
}

impl PhaseSymbol for SymbolExpr {
    fn eval(&self, x: f64, xi: f64) -> Complex64 {
        SymbolExpr::eval(self, x, xi)
    }
}

impl PhaseSymbol for Poly2 {
    fn eval(&self, x: f64, xi: f64) -> Complex64 {
        Poly2::eval(self, x, xi)
    }
}

impl<F: Fn(f64, f64) -> Complex64 + Sync> PhaseSymbol for F {
    fn eval(&self, x: f64, xi: f64) -> Complex64 {
        self(x, xi)
    }
}

/// A symbol expression with a declared order and a derivative closure order.
#[derive(Debug, Clone, PartialEq)]
pub struct ShubinSymbol {
    pub expr: SymbolExpr,
    pub order: f64,
    pub closure: u32,
}

impl ShubinSymbol {
    pub fn new(expr: SymbolExpr, order: f64) -> Self {
        ShubinSymbol {
            expr,
            order,
            closure: DEFAULT_CLOSURE,
        }
    }

    /// Parses `text`; the declared order defaults to the inferred one.
    pub fn parse(text: &str, order: Option<f64>) -> Result<Self> {
        let expr = SymbolExpr::parse(text)?;
        let m = order.unwrap_or_else(|| expr.inferred_order());
        Ok(ShubinSymbol::new(expr, m))
    }

    pub fn with_closure(mut self, k: u32) -> Self {
        self.closure = k;
        self
    }

    pub fn check_order(&self, total: u32) -> Result<()> {
        if total > self.closure {
            Err(Error::ClosureExceeded {
                requested: total,
                closure: self.closure,
            })
        } else {
            Ok(())
        }
    }

    pub fn partial(&self, i: u32, j: u32) -> Result<SymbolExpr> {
        self.check_order(i + j)?;
        Ok(self.expr.partial(i, j))
    }

    /// `d_x^i d_xi^j a` at `(x, xi)`.
    pub fn eval_deriv(&self, x: f64, xi: f64, alpha: (u32, u32)) -> Result<Complex64> {
        Ok(self.partial(alpha.0, alpha.1)?.eval(x, xi))
    }

    /// All partials of total order `<= k`.
    pub fn derivative_table(&self, k: u32) -> Result<DerivTable> {
        self.check_order(k)?;
        Ok(DerivTable::new(&self.expr, k))
    }
}

/// Partial derivatives `d_x^i d_xi^j a` for `i + j <= k`, built incrementally.
#[derive(Debug, Clone)]
pub struct DerivTable {
    pub max_order: u32,
    entries: HashMap<(u32, u32), SymbolExpr>,
}

impl DerivTable {
    pub fn new(a: &SymbolExpr, k: u32) -> Self {
        let mut entries = HashMap::new();
        entries.insert((0, 0), a.clone());
        for total in 1..=k {
            for i in 0..=total {
                let j = total - i;
                let e = if j > 0 {
                    entries[&(i, j - 1)].derivative(crate::expr::Var::Xi)
                } else {
                    entries[&(i - 1, 0)].derivative(crate::expr::Var::X)
                };
                entries.insert((i, j), e.simplified());
            }
        }
        DerivTable {
            max_order: k,
            entries,
        }
    }

    pub fn get(&self, i: u32, j: u32) -> &SymbolExpr {
        &self.entries[&(i, j)]
    }

    /// Multi-indices in a fixed order: by total order, then by `i`.
    pub fn indices(&self) -> Vec<(u32, u32)> {
        let mut v = Vec::new();
        for total in 0..=self.max_order {
            for i in (0..=total).rev() {
                v.push((i, total - i));
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_is_enforced() {
        let a = ShubinSymbol::parse("bracket(2)", None).unwrap();
        assert_eq!(a.order, 2.0);
        assert!((a.eval_deriv(3.0, -1.0, (2, 0)).unwrap().re - 2.0).abs() < 1e-12);
        assert!(matches!(
            a.eval_deriv(0.0, 0.0, (4, 3)),
            Err(Error::ClosureExceeded { requested: 7, closure: 6 })
        ));
        let c = ShubinSymbol::parse("3", None).unwrap();
        assert_eq!(c.eval_deriv(1.0, 2.0, (1, 2)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn table_matches_direct_partials() {
        let a = SymbolExpr::parse("x * bracket(1) + xi^3 * gaussz").unwrap();
        let t = DerivTable::new(&a, 3);
        for (i, j) in t.indices() {
            let d = a.partial(i, j);
            for &(x, y) in &[(0.4, -1.2), (2.0, 0.3)] {
                assert!((t.get(i, j).eval(x, y) - d.eval(x, y)).norm() < 1e-10);
            }
        }
    }
}
