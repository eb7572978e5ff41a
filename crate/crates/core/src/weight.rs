//! The weight function `h(r)` multiplying the spectral parameter.

use crate::error::{Error, Result};
use crate::expr::AnalyticExpr;
use crate::grid::{RadialGrid, SampledField};

/// `h(r)` sampled on a grid with exact first and second derivatives.
#[derive(Debug, Clone)]
pub struct Weight {
    expr: AnalyticExpr,
    field: SampledField,
    second: Vec<f64>,
}

impl Weight {
    pub fn new(expr: AnalyticExpr, grid: &RadialGrid) -> Result<Self> {
        let field = expr.evaluate_on_grid(grid)?;
        let second = expr.derivative().derivative().sample(grid)?;
        if let Some(node) = field.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::NonPositiveWeight {
                node,
                r: grid.node(node),
                value: field.values()[node],
            });
        }
        Ok(Weight { expr, field, second })
    }

    pub fn parse(text: &str, grid: &RadialGrid) -> Result<Self> {
        Weight::new(AnalyticExpr::parse(text)?, grid)
    }

    /// `h ≡ 1`, the ordinary Schrödinger case.
    pub fn unit(grid: &RadialGrid) -> Self {
        Weight {
            expr: AnalyticExpr::constant(1.0),
            field: SampledField::constant(*grid, 1.0),
            second: vec![0.0; grid.len()],
        }
    }

    pub fn expr(&self) -> &AnalyticExpr {
        &self.expr
    }

    pub fn grid(&self) -> &RadialGrid {
        self.field.grid()
    }

    /// `h` and `h'` as a field.
    pub fn field(&self) -> &SampledField {
        &self.field
    }

    pub fn h(&self) -> &[f64] {
        self.field.values()
    }

    pub fn dh(&self) -> &[f64] {
        self.field.derivs()
    }

    pub fn d2h(&self) -> &[f64] {
        &self.second
    }

    /// `√h · d²/dr² (1/√h) = ¾ (h'/h)² − ½ h''/h` at node `i`.
    pub fn sqrt_curvature(&self, i: usize) -> f64 {
        let h = self.h()[i];
        let g = self.dh()[i] / h;
        0.75 * g * g - 0.5 * self.second[i] / h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_non_positive_weight() {
        let g = RadialGrid::new(0.0, 2.0, 21).unwrap();
        let err = Weight::parse("1 - r", &g).unwrap_err();
        assert!(matches!(err, Error::NonPositiveWeight { node: 10, .. }));
    }

    #[test]
    fn sqrt_curvature_closed_form() {
        // 1/√h = (1+r)^-2, so √h (1/√h)'' = 6/(1+r)^2
        let g = RadialGrid::new(0.0, 3.0, 31).unwrap();
        let w = Weight::parse("(1+r)^4", &g).unwrap();
        for (i, r) in g.nodes().enumerate() {
            assert_abs_diff_eq!(w.sqrt_curvature(i), 6.0 / ((1.0 + r) * (1.0 + r)), epsilon = 1e-12);
        }
        let u = Weight::unit(&g);
        assert!((0..g.len()).all(|i| u.sqrt_curvature(i) == 0.0));
    }
}
