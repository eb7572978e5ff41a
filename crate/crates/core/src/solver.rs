//! Fourth-order integration of `−φ'' + V(r) φ = γ² h(r) φ`.
//!
//! The equation is integrated as the first-order system `(φ, φ')` with
//! classical RK4. Potential and weight are only known at grid nodes; the
//! half-step values RK4 needs come from cubic Hermite interpolation using the
//! derivative channels of `V` and `h`, which keeps the scheme fourth order.

use crate::error::{Error, Result};
use crate::expr::AnalyticExpr;
use crate::grid::{same_grid, RadialGrid, SampledField};
use crate::verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// `φ(a) = 0`, `φ'(a) = 1`.
    RegularAtLeft,
    /// Decaying at `b`: `φ(b) = e^{−κ(b−a)}`, `φ'(b) = −κ φ(b)` with
    /// `κ² = V(b) − γ² h(b) > 0`.
    JostAtRight,
    Custom {
        value: f64,
        slope: f64,
        at: Endpoint,
    },
}

/// A solution (or seed) of the radial equation at a fixed `γ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub gamma_sq: f64,
    pub field: SampledField,
    pub bc: BoundaryCondition,
}

impl Solution {
    pub fn new(gamma_sq: f64, field: SampledField, bc: BoundaryCondition) -> Self {
        Solution { gamma_sq, field, bc }
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn derivs(&self) -> &[f64] {
        self.field.derivs()
    }

    pub fn grid(&self) -> &RadialGrid {
        self.field.grid()
    }

    pub fn len(&self) -> usize {
        self.field.len()
    }

    pub fn is_empty(&self) -> bool {
        self.field.is_empty()
    }
}

/// Integrate the radial equation on the grid shared by `v` and `h`.
pub fn solve(v: &SampledField, h: &SampledField, gamma_sq: f64, bc: BoundaryCondition) -> Result<Solution> {
    v.ensure_same_grid(h)?;
    let grid = *v.grid();
    if let Some(node) = h.values().iter().position(|&x| x <= 0.0) {
        return Err(Error::NonPositiveWeight {
            node,
            r: grid.node(node),
            value: h.values()[node],
        });
    }
    let n = grid.len();
    let q: Vec<f64> = (0..n).map(|i| v.values()[i] - gamma_sq * h.values()[i]).collect();
    let dq: Vec<f64> = (0..n).map(|i| v.derivs()[i] - gamma_sq * h.derivs()[i]).collect();

    let (start, value, slope) = match bc {
        BoundaryCondition::RegularAtLeft => (Endpoint::Left, 0.0, 1.0),
        BoundaryCondition::JostAtRight => {
            let kappa_sq = q[n - 1];
            if kappa_sq.is_nan() || kappa_sq <= 0.0 {
                return Err(Error::InvalidSeedSet(format!(
                    "Jost condition needs V(b) - γ² h(b) > 0, got {kappa_sq} at γ² = {gamma_sq}"
                )));
            }
            let kappa = kappa_sq.sqrt();
            let value = (-kappa * (grid.b() - grid.a())).exp();
            (Endpoint::Right, value, -kappa * value)
        }
        BoundaryCondition::Custom { value, slope, at } => (at, value, slope),
    };

    let mut phi = vec![0.0; n];
    let mut dphi = vec![0.0; n];
    let order: Box<dyn Iterator<Item = usize>> = match start {
        Endpoint::Left => Box::new(0..n),
        Endpoint::Right => Box::new((0..n).rev()),
    };
    let mut prev: Option<usize> = None;
    let (mut y, mut dy) = (value, slope);
    for i in order {
        if let Some(j) = prev {
            let dx = grid.node(i) - grid.node(j);
            let q_mid = 0.5 * (q[j] + q[i]) + dx / 8.0 * (dq[j] - dq[i]);
            (y, dy) = rk4_step(y, dy, dx, q[j], q_mid, q[i]);
            if !(y.is_finite() && dy.is_finite()) {
                return Err(Error::NonFinite {
                    node: i,
                    r: grid.node(i),
                });
            }
        }
        phi[i] = y;
        dphi[i] = dy;
        prev = Some(i);
    }
    Ok(Solution::new(gamma_sq, SampledField::from_parts(grid, phi, dphi), bc))
}

/// One RK4 step of `y' = dy`, `dy' = q y` over `dx`.
#[inline]
fn rk4_step(y: f64, dy: f64, dx: f64, q0: f64, q_mid: f64, q1: f64) -> (f64, f64) {
    let half = 0.5 * dx;
    let (k1y, k1d) = (dy, q0 * y);
    let (k2y, k2d) = (dy + half * k1d, q_mid * (y + half * k1y));
    let (k3y, k3d) = (dy + half * k2d, q_mid * (y + half * k2y));
    let (k4y, k4d) = (dy + dx * k3d, q1 * (y + dx * k3y));
    (
        y + dx / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        dy + dx / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
    )
}

/// Sample an analytic seed `y°(r)` and accept it only if it solves the base
/// equation at `gamma_sq` to within `tol` (relative residual).
pub fn seed_from_expression(
    text: &str,
    grid: &RadialGrid,
    v0: &SampledField,
    h: &SampledField,
    gamma_sq: f64,
    tol: f64,
) -> Result<Solution> {
    same_grid(grid, v0.grid())?;
    let expr = AnalyticExpr::parse(text)?;
    let field = expr.evaluate_on_grid(grid)?;
    let bc = BoundaryCondition::Custom {
        value: field.values()[0],
        slope: field.derivs()[0],
        at: Endpoint::Left,
    };
    let seed = Solution::new(gamma_sq, field, bc);
    let report = verify::residual(v0, h, &seed, tol)?;
    if !report.pass {
        return Err(Error::SeedRejected {
            max_rel: report.max_rel,
            node: report.argmax_node,
            tol,
        });
    }
    Ok(seed)
}
