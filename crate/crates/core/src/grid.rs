//! Uniform radial grids and sampled fields.
//!
//! A [`SampledField`] always carries its first derivative next to its values.
//! Wronskians are formed from those carried derivatives, never from finite
//! differences.

use crate::error::{Error, Result};

/// Uniform grid on `[a, b]` with `n` nodes. The last node is exactly `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    a: f64,
    b: f64,
    n: usize,
    step: f64,
}

impl RadialGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidGrid(format!("need finite a < b, got a={a}, b={b}")));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
        }
        Ok(RadialGrid {
            a,
            b,
            n,
            step: (b - a) / (n - 1) as f64,
        })
    }

    /// Grid whose spacing is as close as possible to `step` without exceeding it.
    pub fn with_step(a: f64, b: f64, step: f64) -> Result<Self> {
        if step.is_nan() || step <= 0.0 {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        let panels = ((b - a) / step - 1e-9).ceil().max(2.0) as usize;
        RadialGrid::new(a, b, panels + 1)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.b
        } else {
            self.a + i as f64 * self.step
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Halved step on the same interval.
    pub fn refined(&self) -> RadialGrid {
        RadialGrid::new(self.a, self.b, 2 * self.n - 1).expect("refining a valid grid")
    }
}

/// Integration direction for cumulative integrals.
///
/// `FromLeft` accumulates from `a` (regular solutions), `FromRight`
/// accumulates from `b` (Jost-type solutions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    FromLeft,
    FromRight,
}

/// Function values and first derivatives on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: RadialGrid,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl SampledField {
    pub fn new(grid: RadialGrid, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() || derivs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} values and {} derivatives for a {}-node grid",
                values.len(),
                derivs.len(),
                grid.len()
            )));
        }
        let first_bad = values
            .iter()
            .zip(&derivs)
            .position(|(v, d)| !v.is_finite() || !d.is_finite());
        if let Some(node) = first_bad {
            return Err(Error::NonFinite {
                node,
                r: grid.node(node),
            });
        }
        Ok(SampledField { grid, values, derivs })
    }

    /// Unchecked constructor for values produced by code that already
    /// guarantees lengths and finiteness.
    pub(crate) fn from_parts(grid: RadialGrid, values: Vec<f64>, derivs: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        debug_assert_eq!(derivs.len(), grid.len());
        SampledField { grid, values, derivs }
    }

    /// Field with the derivative channel filled by fourth-order finite
    /// differences. Used for constructed potentials, whose derivative is only
    /// needed for interpolation inside the integrator.
    pub fn from_values(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        let derivs = finite_difference(&values, grid.step());
        SampledField::new(grid, values, derivs)
    }

    pub fn constant(grid: RadialGrid, value: f64) -> Self {
        SampledField::from_parts(grid, vec![value; grid.len()], vec![0.0; grid.len()])
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        SampledField::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_parts(self) -> (RadialGrid, Vec<f64>, Vec<f64>) {
        (self.grid, self.values, self.derivs)
    }

    pub fn ensure_same_grid(&self, other: &SampledField) -> Result<()> {
        same_grid(&self.grid, &other.grid)
    }

    /// `self * k`, derivative included.
    pub fn scaled(&self, k: f64) -> SampledField {
        SampledField::from_parts(
            self.grid,
            self.values.iter().map(|v| v * k).collect(),
            self.derivs.iter().map(|d| d * k).collect(),
        )
    }

    /// Node-wise product with product-rule derivative.
    pub fn product(&self, other: &SampledField) -> Result<SampledField> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(f, g)| f * g).collect();
        let derivs = (0..self.len())
            .map(|i| self.derivs[i] * other.values[i] + self.values[i] * other.derivs[i])
            .collect();
        SampledField::new(self.grid, values, derivs)
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, other: &SampledField, k: f64) -> Result<SampledField> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(f, g)| f + k * g).collect();
        let derivs = self.derivs.iter().zip(&other.derivs).map(|(f, g)| f + k * g).collect();
        SampledField::new(self.grid, values, derivs)
    }

    /// Largest absolute node-wise difference of values.
    pub fn sup_distance(&self, other: &SampledField) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear resampling onto another grid covering a sub-interval of this one.
    pub fn resample(&self, target: &RadialGrid) -> Result<SampledField> {
        let tol = 1e-12 * (self.grid.b - self.grid.a);
        if target.a() < self.grid.a - tol || target.b() > self.grid.b + tol {
            return Err(Error::GridMismatch(format!(
                "cannot resample [{}, {}] onto [{}, {}]",
                self.grid.a,
                self.grid.b,
                target.a(),
                target.b()
            )));
        }
        let h = self.grid.step;
        let last = self.grid.n - 1;
        let mut values = Vec::with_capacity(target.len());
        let mut derivs = Vec::with_capacity(target.len());
        for r in target.nodes() {
            let x = ((r - self.grid.a) / h).clamp(0.0, last as f64);
            let i = (x.floor() as usize).min(last - 1);
            let t = x - i as f64;
            values.push((1.0 - t) * self.values[i] + t * self.values[i + 1]);
            derivs.push((1.0 - t) * self.derivs[i] + t * self.derivs[i + 1]);
        }
        SampledField::new(*target, values, derivs)
    }
}

pub(crate) fn same_grid(a: &RadialGrid, b: &RadialGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "[{}, {}] with {} nodes vs [{}, {}] with {} nodes",
            a.a, a.b, a.n, b.a, b.b, b.n
        )))
    }
}

/// `W{f, g} = f g' - f' g` node by node, from the carried derivatives.
///
/// The returned field's derivative channel is a finite-difference estimate;
/// callers that know `dW/dr` exactly (solutions of the same equation) build
/// their own field instead.
pub fn wronskian(f: &SampledField, g: &SampledField) -> Result<SampledField> {
    let values = wronskian_values(f, g)?;
    SampledField::from_values(f.grid, values)
}

pub fn wronskian_values(f: &SampledField, g: &SampledField) -> Result<Vec<f64>> {
    f.ensure_same_grid(g)?;
    Ok((0..f.len())
        .map(|i| f.values[i] * g.derivs[i] - f.derivs[i] * g.values[i])
        .collect())
}

/// Cumulative integral: `∫ₐʳ f` for [`Direction::FromLeft`], `∫ᵣᵇ f` for
/// [`Direction::FromRight`].
///
/// Every panel uses the corrected trapezoid `h/2 (f₀ + f₁) + h²/12 (f₀' − f₁')`
/// with the carried derivative. The sum telescopes to the Euler-Maclaurin
/// rule, fourth order with an error that varies smoothly from node to node.
/// Composite Simpson has the same order but alternates between even and odd
/// nodes, and that zig-zag shows up in anything differentiated afterwards.
///
/// The derivative channel of the result is `f` (left) or `−f` (right).
pub fn integrate_prefix(f: &SampledField, direction: Direction) -> SampledField {
    let n = f.len();
    let h = f.grid.step;
    let (vals, ders): (Vec<f64>, Vec<f64>) = match direction {
        Direction::FromLeft => (f.values.clone(), f.derivs.clone()),
        Direction::FromRight => (
            f.values.iter().rev().copied().collect(),
            // walking right-to-left flips the sign of d/dr
            f.derivs.iter().rev().map(|d| -d).collect(),
        ),
    };
    let mut acc = vec![0.0; n];
    for k in 1..n {
        let (f0, f1) = (vals[k - 1], vals[k]);
        let (d0, d1) = (ders[k - 1], ders[k]);
        acc[k] = acc[k - 1] + 0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1);
    }
    match direction {
        Direction::FromLeft => SampledField::from_parts(f.grid, acc, f.values.clone()),
        Direction::FromRight => {
            acc.reverse();
            SampledField::from_parts(f.grid, acc, f.values.iter().map(|v| -v).collect())
        }
    }
}

/// Antiderivative oriented so that its r-derivative is `+f` in both
/// directions: `∫ₐʳ f` from the left, `−∫ᵣᵇ f` from the right.
pub fn oriented_integral(f: &SampledField, direction: Direction) -> SampledField {
    let prefix = integrate_prefix(f, direction);
    match direction {
        Direction::FromLeft => prefix,
        Direction::FromRight => prefix.scaled(-1.0),
    }
}

/// Fourth-order finite-difference first derivative (one-sided at the ends).
pub fn finite_difference(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let f = values;
    if n < 5 {
        return (0..n)
            .map(|i| {
                if i == 0 {
                    (f[1] - f[0]) / h
                } else if i == n - 1 {
                    (f[n - 1] - f[n - 2]) / h
                } else {
                    (f[i + 1] - f[i - 1]) / (2.0 * h)
                }
            })
            .collect();
    }
    (0..n)
        .map(|i| {
            if i < 2 {
                // forward five-point stencil, shifted for node 1
                if i == 0 {
                    (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
                } else {
                    (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
                }
            } else if i + 2 >= n {
                if i == n - 1 {
                    (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5])
                        / (12.0 * h)
                } else {
                    (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / (12.0 * h)
                }
            } else {
                (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::AnalyticExpr;
    use approx::assert_abs_diff_eq;

    fn field(text: &str, grid: &RadialGrid) -> SampledField {
        AnalyticExpr::parse(text).unwrap().evaluate_on_grid(grid).unwrap()
    }

    #[test]
    fn grid_construction() {
        let g = RadialGrid::new(0.0, 1.0, 11).unwrap();
        assert_abs_diff_eq!(g.step(), 0.1);
        assert_eq!(g.node(10), 1.0);
        assert!(RadialGrid::new(1.0, 0.0, 11).is_err());
        assert!(RadialGrid::new(0.0, 1.0, 2).is_err());
        assert!(RadialGrid::new(0.0, f64::INFINITY, 5).is_err());
        let g = RadialGrid::with_step(0.0, 10.0, 1e-3).unwrap();
        assert_eq!(g.len(), 10_001);
        assert_eq!(g.refined().len(), 20_001);
    }

    #[test]
    fn field_rejects_bad_input() {
        let g = RadialGrid::new(0.0, 1.0, 4).unwrap();
        assert!(matches!(
            SampledField::new(g, vec![0.0; 3], vec![0.0; 4]),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(
            SampledField::new(g, vec![0.0, f64::NAN, 0.0, 0.0], vec![0.0; 4]),
            Err(Error::NonFinite { node: 1, .. })
        ));
    }

    #[test]
    fn wronskian_examples() {
        let g = RadialGrid::new(0.0, 2.0, 201).unwrap();
        let ch = field("cosh(r)", &g);
        let sh = field("sinh(r)", &g);
        let w = wronskian(&ch, &sh).unwrap();
        for v in w.values() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
        let w = wronskian(&ch, &ch).unwrap();
        assert!(w.values().iter().all(|&v| v == 0.0));

        let s = field("sin(r)", &g);
        let c = field("cos(r)", &g);
        for v in wronskian_values(&s, &c).unwrap() {
            assert_abs_diff_eq!(v, -1.0, epsilon = 1e-12);
        }

        let other = RadialGrid::new(0.0, 2.0, 101).unwrap();
        assert!(wronskian(&s, &field("r", &other)).is_err());
    }

    #[test]
    fn prefix_integrals() {
        let g = RadialGrid::new(0.0, 1.0, 101).unwrap();
        let zero = integrate_prefix(&SampledField::zeros(g), Direction::FromLeft);
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let one = integrate_prefix(&SampledField::constant(g, 1.0), Direction::FromLeft);
        for (r, v) in g.nodes().zip(one.values()) {
            assert_abs_diff_eq!(*v, r, epsilon = 1e-12);
        }

        let g = RadialGrid::new(0.0, 1.0, 1001).unwrap();
        let f = field("sinh(r)^2", &g);
        let exact = (1f64.sinh() * 1f64.cosh() - 1.0) / 2.0;
        let left = integrate_prefix(&f, Direction::FromLeft);
        assert_abs_diff_eq!(left.values()[1000], exact, epsilon = 1e-12);
        let right = integrate_prefix(&f, Direction::FromRight);
        assert_abs_diff_eq!(right.values()[0], left.values()[1000], epsilon = 1e-12);
        assert_eq!(right.values()[1000], 0.0);
        // every node, odd ones included
        for (i, r) in g.nodes().enumerate() {
            let exact = ((r.sinh() * r.cosh()) - r) / 2.0;
            assert_abs_diff_eq!(left.values()[i], exact, epsilon = 1e-12);
            assert_abs_diff_eq!(
                left.values()[i] + right.values()[i],
                left.values()[1000],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn prefix_integral_even_node_count() {
        let g = RadialGrid::new(0.0, 1.0, 1000).unwrap();
        let f = field("cos(3*r)", &g);
        let left = integrate_prefix(&f, Direction::FromLeft);
        let right = integrate_prefix(&f, Direction::FromRight);
        let exact = (3.0f64).sin() / 3.0;
        assert_abs_diff_eq!(left.values()[999], exact, epsilon = 1e-12);
        assert_abs_diff_eq!(right.values()[0], exact, epsilon = 1e-12);
    }

    #[test]
    fn simpson_order() {
        let errs: Vec<f64> = [21usize, 41, 81]
            .iter()
            .map(|&n| {
                let g = RadialGrid::new(0.0, 2.0, n).unwrap();
                let f = field("exp(r)*sin(2*r)", &g);
                let total = integrate_prefix(&f, Direction::FromLeft).values()[n - 1];
                // ∫ e^r sin 2r = e^r (sin 2r − 2 cos 2r)/5
                let anti = |r: f64| r.exp() * ((2.0 * r).sin() - 2.0 * (2.0 * r).cos()) / 5.0;
                (total - (anti(2.0) - anti(0.0))).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 3.5, "observed order {order}");
        }
    }

    #[test]
    fn finite_difference_is_fourth_order() {
        let g = RadialGrid::new(0.0, 1.0, 101).unwrap();
        let f = field("sin(2*r)", &g);
        let d = finite_difference(f.values(), g.step());
        for (i, r) in g.nodes().enumerate() {
            assert_abs_diff_eq!(d[i], 2.0 * (2.0 * r).cos(), epsilon = 1e-6);
        }
    }

    #[test]
    fn linear_resample() {
        let g = RadialGrid::new(0.0, 1.0, 11).unwrap();
        let f = field("2*r+1", &g);
        let target = RadialGrid::new(0.05, 0.95, 7).unwrap();
        let s = f.resample(&target).unwrap();
        for (r, v) in target.nodes().zip(s.values()) {
            assert_abs_diff_eq!(*v, 2.0 * r + 1.0, epsilon = 1e-12);
        }
        assert!(f.resample(&RadialGrid::new(0.0, 2.0, 5).unwrap()).is_err());
    }
}
