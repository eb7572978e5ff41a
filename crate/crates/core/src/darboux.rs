//! Generalized Darboux transformation and its two-step chain.
//!
//! A seed `y°` solving the base problem at `γ'²` maps the base potential to
//!
//! ```text
//! V = V° − 2√h d/dr[(1/√h) d/dr ln y°] + √h d²/dr²(1/√h)
//! ```
//!
//! and every base solution `φ°` at `γ²` to `φ = W{y°, φ°} / (√h y°)`.
//!
//! Writing `u = y°'/y°` and using `u' = V° − γ'² h − u²` (the seed solves the
//! base equation), the potential becomes
//! `−V° + 2γ'² h + 2u² + (h'/h) u + ¾(h'/h)² − ½ h''/h`, which needs only the
//! seed's value and derivative channels. Nothing is differentiated
//! numerically.

use crate::error::{Error, Result};
use crate::grid::{oriented_integral, same_grid, Direction, SampledField};
use crate::solver::{BoundaryCondition, Endpoint, Solution};
use crate::weight::Weight;

/// Seeds with `|y°| < NODE_EPSILON` at any node are refused.
pub const NODE_EPSILON: f64 = 1e-10;

/// Spectral parameters closer than this are treated as coincident.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-8;

fn tagged(gamma_sq: f64, field: SampledField) -> Solution {
    let bc = BoundaryCondition::Custom {
        value: field.values()[0],
        slope: field.derivs()[0],
        at: Endpoint::Left,
    };
    Solution::new(gamma_sq, field, bc)
}

fn check_nodeless(seed: &Solution, nodes: std::ops::Range<usize>, eps: f64) -> Result<()> {
    let y = seed.values();
    let start = nodes.start;
    for i in nodes {
        // a sign change between neighbours hides a node between grid points
        let crossed = i > start && y[i] * y[i - 1] < 0.0;
        if y[i].is_nan() || y[i].abs() < eps || crossed {
            return Err(Error::SingularSeed {
                node: i,
                r: seed.grid().node(i),
                value: y[i].abs(),
            });
        }
    }
    Ok(())
}

fn check_coincidence(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() < COINCIDENCE_TOLERANCE {
        return Err(Error::CoincidentSpectralParameters {
            first: a,
            second: b,
            tol: COINCIDENCE_TOLERANCE,
        });
    }
    Ok(())
}

/// One Darboux step built from a nodeless seed.
#[derive(Debug, Clone)]
pub struct DarbouxTransform {
    seed: Solution,
    weight: Weight,
    base_potential: SampledField,
    new_potential: SampledField,
    // y°'/y°
    log_deriv: Vec<f64>,
}

impl DarbouxTransform {
    pub fn new(seed: Solution, weight: &Weight, v0: &SampledField) -> Result<Self> {
        Self::with_node_epsilon(seed, weight, v0, NODE_EPSILON)
    }

    pub fn with_node_epsilon(seed: Solution, weight: &Weight, v0: &SampledField, eps: f64) -> Result<Self> {
        same_grid(seed.grid(), weight.grid())?;
        same_grid(seed.grid(), v0.grid())?;
        check_nodeless(&seed, 0..seed.len(), eps)?;
        let log_deriv: Vec<f64> = seed.values().iter().zip(seed.derivs()).map(|(y, dy)| dy / y).collect();
        let (h, dh) = (weight.h(), weight.dh());
        let gp = seed.gamma_sq;
        let values = (0..seed.len())
            .map(|i| {
                let u = log_deriv[i];
                -v0.values()[i] + 2.0 * gp * h[i] + 2.0 * u * u + dh[i] / h[i] * u + weight.sqrt_curvature(i)
            })
            .collect();
        let new_potential = SampledField::from_values(*seed.grid(), values)?;
        Ok(DarbouxTransform {
            seed,
            weight: weight.clone(),
            base_potential: v0.clone(),
            new_potential,
            log_deriv,
        })
    }

    pub fn seed(&self) -> &Solution {
        &self.seed
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn base_potential(&self) -> &SampledField {
        &self.base_potential
    }

    pub fn potential(&self) -> &SampledField {
        &self.new_potential
    }

    /// `φ = W{y°, φ°} / (√h y°)` with
    /// `φ' = √h (γ'² − γ²) φ° − φ (h'/2h + y°'/y°)`.
    pub fn solution(&self, phi0: &Solution) -> Result<Solution> {
        same_grid(self.seed.grid(), phi0.grid())?;
        let (y, dy) = (self.seed.values(), self.seed.derivs());
        let (p, dp) = (phi0.values(), phi0.derivs());
        let (h, dh) = (self.weight.h(), self.weight.dh());
        let delta = self.seed.gamma_sq - phi0.gamma_sq;
        let n = y.len();
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for i in 0..n {
            let w = y[i] * dp[i] - dy[i] * p[i];
            let sh = h[i].sqrt();
            let phi = w / (sh * y[i]);
            values.push(phi);
            derivs.push(sh * delta * p[i] - phi * (0.5 * dh[i] / h[i] + self.log_deriv[i]));
        }
        let field = SampledField::new(*self.seed.grid(), values, derivs)?;
        Ok(tagged(phi0.gamma_sq, field))
    }

    /// `y = 1/(√h y°)`, which solves the new equation at `γ'²`.
    pub fn partner_seed(&self) -> Solution {
        let (y, h, dh) = (self.seed.values(), self.weight.h(), self.weight.dh());
        let values: Vec<f64> = (0..y.len()).map(|i| 1.0 / (h[i].sqrt() * y[i])).collect();
        let derivs = (0..y.len())
            .map(|i| -values[i] * (0.5 * dh[i] / h[i] + self.log_deriv[i]))
            .collect();
        tagged(
            self.seed.gamma_sq,
            SampledField::from_parts(*self.seed.grid(), values, derivs),
        )
    }
}

pub fn darboux_potential(seed: &Solution, weight: &Weight, v0: &SampledField) -> Result<SampledField> {
    Ok(DarbouxTransform::new(seed.clone(), weight, v0)?.new_potential)
}

pub fn darboux_solution(seed: &Solution, weight: &Weight, v0: &SampledField, phi0: &Solution) -> Result<Solution> {
    DarbouxTransform::new(seed.clone(), weight, v0)?.solution(phi0)
}

/// Second Darboux step driven by `η₁ = P / (√h y°)`,
/// `P(r) = 1 + C ∫ h y°²`.
///
/// Composing the two steps cancels the `y°` and `√h` terms, leaving
/// `V = V° − 2√h d/dr[(1/√h) d/dr ln P]`, evaluated here as
/// `V° + 2L² − (h'/h) L − 4C h y° y°'/P` with `L = P'/P`. The result has no
/// division by `y°`, so regular seeds (`y°(a) = 0`) are allowed; the seed
/// only has to be nodeless on the open interval.
///
/// The integral runs in `direction` and is oriented so that
/// `P' = C h y°²` either way.
#[derive(Debug, Clone)]
pub struct ChainTransform {
    seed: Solution,
    weight: Weight,
    base_potential: SampledField,
    c: f64,
    direction: Direction,
    norm: SampledField,
    potential: SampledField,
}

impl ChainTransform {
    pub fn new(seed: Solution, weight: &Weight, v0: &SampledField, c: f64, direction: Direction) -> Result<Self> {
        same_grid(seed.grid(), weight.grid())?;
        same_grid(seed.grid(), v0.grid())?;
        let n = seed.len();
        check_nodeless(&seed, 1..n - 1, NODE_EPSILON)?;
        let (y, dy) = (seed.values(), seed.derivs());
        let (h, dh) = (weight.h(), weight.dh());

        let integrand = weight.field().product(&seed.field)?.product(&seed.field)?;
        let integral = oriented_integral(&integrand, direction);
        let norm = SampledField::constant(*seed.grid(), 1.0).add_scaled(&integral, c)?;
        if let Some(i) = norm.values().iter().position(|&p| p.is_nan() || p <= 0.0) {
            return Err(Error::SingularChain {
                node: i,
                r: seed.grid().node(i),
                value: norm.values()[i],
            });
        }
        let p = norm.values();
        let values = (0..n)
            .map(|i| {
                let l = c * h[i] * y[i] * y[i] / p[i];
                v0.values()[i] + 2.0 * l * l - dh[i] / h[i] * l - 4.0 * c * h[i] * y[i] * dy[i] / p[i]
            })
            .collect();
        let potential = SampledField::from_values(*seed.grid(), values)?;
        Ok(ChainTransform {
            seed,
            weight: weight.clone(),
            base_potential: v0.clone(),
            c,
            direction,
            norm,
            potential,
        })
    }

    /// Chain continuing an existing first step.
    pub fn from_first(first: &DarbouxTransform, c: f64, direction: Direction) -> Result<Self> {
        ChainTransform::new(first.seed.clone(), &first.weight, &first.base_potential, c, direction)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// `P(r)` with `P' = C h y°²` in the derivative channel.
    pub fn normalization(&self) -> &SampledField {
        &self.norm
    }

    pub fn potential(&self) -> &SampledField {
        &self.potential
    }

    /// `φ = φ° − C y° W{y°, φ°} / (P (γ'² − γ²))`.
    pub fn solution(&self, phi0: &Solution) -> Result<Solution> {
        same_grid(self.seed.grid(), phi0.grid())?;
        let delta = self.seed.gamma_sq - phi0.gamma_sq;
        check_coincidence(self.seed.gamma_sq, phi0.gamma_sq)?;
        let (y, dy) = (self.seed.values(), self.seed.derivs());
        let (f, df) = (phi0.values(), phi0.derivs());
        let (p, dp) = (self.norm.values(), self.norm.derivs());
        let h = self.weight.h();
        let c = self.c;
        let n = y.len();
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for i in 0..n {
            let w = y[i] * df[i] - dy[i] * f[i];
            let q = c * y[i] * w / (p[i] * delta);
            let dq = c
                * (dy[i] * w / (p[i] * delta) + h[i] * y[i] * y[i] * f[i] / p[i]
                    - y[i] * w * dp[i] / (p[i] * p[i] * delta));
            values.push(f[i] - q);
            derivs.push(df[i] - dq);
        }
        Ok(tagged(
            phi0.gamma_sq,
            SampledField::new(*self.seed.grid(), values, derivs)?,
        ))
    }

    /// `η₁ = P/(√h y°)`, a solution of the first-step equation at `γ'²`.
    /// Requires a seed that is nonzero at every node.
    pub fn eta(&self) -> Result<Solution> {
        check_nodeless(&self.seed, 0..self.seed.len(), NODE_EPSILON)?;
        let (y, dy) = (self.seed.values(), self.seed.derivs());
        let (h, dh) = (self.weight.h(), self.weight.dh());
        let (p, dp) = (self.norm.values(), self.norm.derivs());
        let n = y.len();
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for i in 0..n {
            let base = 1.0 / (h[i].sqrt() * y[i]);
            let eta = p[i] * base;
            values.push(eta);
            derivs.push(dp[i] * base - eta * (0.5 * dh[i] / h[i] + dy[i] / y[i]));
        }
        Ok(tagged(
            self.seed.gamma_sq,
            SampledField::new(*self.seed.grid(), values, derivs)?,
        ))
    }

    /// The chain as two literal Darboux steps: `y°` on `V°`, then `η₁` on
    /// the first-step potential. Only available for seeds without nodes.
    pub fn literal_steps(&self) -> Result<(DarbouxTransform, DarbouxTransform)> {
        let first = DarbouxTransform::new(self.seed.clone(), &self.weight, &self.base_potential)?;
        let second = DarbouxTransform::new(self.eta()?, &self.weight, first.potential())?;
        Ok((first, second))
    }

    /// Solution map through [`Self::literal_steps`], normalized by
    /// `1/(γ'² − γ²)` so that it matches [`Self::solution`].
    pub fn literal_solution(&self, phi0: &Solution) -> Result<Solution> {
        check_coincidence(self.seed.gamma_sq, phi0.gamma_sq)?;
        let (first, second) = self.literal_steps()?;
        let phi2 = second.solution(&first.solution(phi0)?)?;
        let scaled = phi2.field.scaled(1.0 / (self.seed.gamma_sq - phi0.gamma_sq));
        Ok(tagged(phi0.gamma_sq, scaled))
    }
}
