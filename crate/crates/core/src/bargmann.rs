//! M-fold generalized Bargmann transformation.
//!
//! Seeds `φ°(γ_μ, r)` with constants `C_μ` define the matrix
//!
//! ```text
//! P_μν(r) = δ_μν + C_μ W{φ°_μ, φ°_ν} / (γ_μ² − γ_ν²)
//! ```
//!
//! whose entries all satisfy `P'_μν = C_μ h φ°_μ φ°_ν`. The Wronskian form is
//! 0/0 on the diagonal, so diagonal entries use the integral representation
//! `1 + C_μ ∫ h φ°_μ²` instead (oriented like [`oriented_integral`]).
//!
//! The new potential is `V = V° − 2√h d/dr[(1/√h) d/dr ln det P]`. With
//! `X = P⁻¹P'` and `Y = P⁻¹P''`, `(ln det P)' = tr X` and
//! `(ln det P)'' = tr Y − tr X²`, and `P''` follows from the carried
//! derivatives of the seeds, so the whole expression is evaluated node by node
//! without numerical differentiation.

use nalgebra::DMatrix;

use crate::darboux::COINCIDENCE_TOLERANCE;
use crate::error::{Error, Result};
use crate::grid::{oriented_integral, same_grid, wronskian_values, Direction, RadialGrid, SampledField};
use crate::solver::{BoundaryCondition, Endpoint, Solution};
use crate::verify;
use crate::weight::Weight;

/// Default cap on the number of seeds.
pub const MAX_SEEDS: usize = 8;

#[derive(Debug, Clone)]
pub struct BargmannSeed {
    pub c: f64,
    pub solution: Solution,
}

impl BargmannSeed {
    pub fn new(c: f64, solution: Solution) -> Self {
        BargmannSeed { c, solution }
    }

    pub fn gamma_sq(&self) -> f64 {
        self.solution.gamma_sq
    }
}

/// Validated set of seeds sharing one grid and one integration direction.
#[derive(Debug, Clone)]
pub struct BargmannSeedSet {
    seeds: Vec<BargmannSeed>,
    direction: Direction,
}

impl BargmannSeedSet {
    pub fn new(seeds: Vec<BargmannSeed>, direction: Direction) -> Result<Self> {
        Self::with_limit(seeds, direction, MAX_SEEDS)
    }

    pub fn with_limit(seeds: Vec<BargmannSeed>, direction: Direction, max: usize) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::InvalidSeedSet("at least one seed is required".into()));
        }
        if seeds.len() > max {
            return Err(Error::InvalidSeedSet(format!(
                "{} seeds exceed the configured maximum of {max}",
                seeds.len()
            )));
        }
        let grid = *seeds[0].solution.grid();
        for s in &seeds {
            same_grid(&grid, s.solution.grid())?;
            if !s.c.is_finite() {
                return Err(Error::InvalidSeedSet(format!("C = {} is not finite", s.c)));
            }
            let clash = match (s.solution.bc, direction) {
                (BoundaryCondition::RegularAtLeft, Direction::FromRight) => Some("regular"),
                (BoundaryCondition::JostAtRight, Direction::FromLeft) => Some("Jost-type"),
                (
                    BoundaryCondition::Custom {
                        at: Endpoint::Right, ..
                    },
                    Direction::FromLeft,
                ) => Some("right-anchored"),
                _ => None,
            };
            if let Some(kind) = clash {
                return Err(Error::InvalidSeedSet(format!(
                    "{kind} seed at γ² = {} cannot be used with {direction:?} integrals",
                    s.gamma_sq()
                )));
            }
        }
        for (i, a) in seeds.iter().enumerate() {
            for b in &seeds[i + 1..] {
                if (a.gamma_sq() - b.gamma_sq()).abs() < COINCIDENCE_TOLERANCE {
                    return Err(Error::CoincidentSpectralParameters {
                        first: a.gamma_sq(),
                        second: b.gamma_sq(),
                        tol: COINCIDENCE_TOLERANCE,
                    });
                }
            }
        }
        Ok(BargmannSeedSet { seeds, direction })
    }

    pub fn seeds(&self) -> &[BargmannSeed] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn grid(&self) -> &RadialGrid {
        self.seeds[0].solution.grid()
    }

    /// Check every seed against the base problem.
    pub fn validate_against(&self, v0: &SampledField, h: &SampledField, tol: f64) -> Result<()> {
        for s in &self.seeds {
            let rep = verify::residual(v0, h, &s.solution, tol)?;
            if !rep.pass {
                return Err(Error::SeedRejected {
                    max_rel: rep.max_rel,
                    node: rep.argmax_node,
                    tol,
                });
            }
        }
        Ok(())
    }
}

/// `P(r)`, `P'(r)` and `P(r)⁻¹` at every node.
#[derive(Debug, Clone)]
pub struct PMatrix {
    grid: RadialGrid,
    values: Vec<DMatrix<f64>>,
    derivs: Vec<DMatrix<f64>>,
    inverses: Vec<DMatrix<f64>>,
    dets: Vec<f64>,
}

/// Conditioning summary of a P-matrix field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PMatrixSummary {
    pub det_sign: f64,
    pub min_abs_det: f64,
    pub max_abs_det: f64,
    /// Largest 1-norm condition number over the grid.
    pub max_condition: f64,
}

impl PMatrix {
    pub fn order(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn at(&self, node: usize) -> &DMatrix<f64> {
        &self.values[node]
    }

    pub fn deriv_at(&self, node: usize) -> &DMatrix<f64> {
        &self.derivs[node]
    }

    pub fn inverse_at(&self, node: usize) -> &DMatrix<f64> {
        &self.inverses[node]
    }

    pub fn det(&self, node: usize) -> f64 {
        self.dets[node]
    }

    pub fn summary(&self) -> PMatrixSummary {
        let norm1 = |m: &DMatrix<f64>| {
            m.column_iter()
                .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let max_condition = self
            .values
            .iter()
            .zip(&self.inverses)
            .map(|(p, q)| norm1(p) * norm1(q))
            .fold(0.0, f64::max);
        PMatrixSummary {
            det_sign: self.dets[0].signum(),
            min_abs_det: self.dets.iter().fold(f64::INFINITY, |m, d| m.min(d.abs())),
            max_abs_det: self.dets.iter().fold(0.0, |m, d| m.max(d.abs())),
            max_condition,
        }
    }
}

/// Build the P-matrix field. Fails when det P vanishes or changes sign.
pub fn p_matrix(seeds: &BargmannSeedSet, h: &SampledField) -> Result<PMatrix> {
    same_grid(seeds.grid(), h.grid())?;
    let grid = *seeds.grid();
    let m = seeds.len();
    let n = grid.len();
    let s = seeds.seeds();

    let diag: Vec<SampledField> = s
        .iter()
        .map(|seed| {
            let f = h.product(&seed.solution.field)?.product(&seed.solution.field)?;
            Ok(oriented_integral(&f, seeds.direction()))
        })
        .collect::<Result<_>>()?;
    let mut off = vec![vec![Vec::new(); m]; m];
    for mu in 0..m {
        for nu in 0..m {
            if mu != nu {
                off[mu][nu] = wronskian_values(&s[mu].solution.field, &s[nu].solution.field)?;
            }
        }
    }

    let hv = h.values();
    let mut values = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    let mut inverses = Vec::with_capacity(n);
    let mut dets = Vec::with_capacity(n);
    let mut sign = 0.0;
    for i in 0..n {
        let p = DMatrix::from_fn(m, m, |mu, nu| {
            if mu == nu {
                1.0 + s[mu].c * diag[mu].values()[i]
            } else {
                s[mu].c * off[mu][nu][i] / (s[mu].gamma_sq() - s[nu].gamma_sq())
            }
        });
        let dp = DMatrix::from_fn(m, m, |mu, nu| {
            s[mu].c * hv[i] * s[mu].solution.values()[i] * s[nu].solution.values()[i]
        });
        let lu = p.clone().lu();
        let det = lu.determinant();
        let singular = || Error::SingularBargmann {
            node: i,
            r: grid.node(i),
            det,
        };
        if !det.is_finite() || det == 0.0 {
            return Err(singular());
        }
        if i == 0 {
            sign = det.signum();
        } else if det.signum() != sign {
            return Err(singular());
        }
        let inv = lu.try_inverse().ok_or_else(singular)?;
        values.push(p);
        derivs.push(dp);
        inverses.push(inv);
        dets.push(det);
    }
    Ok(PMatrix {
        grid,
        values,
        derivs,
        inverses,
        dets,
    })
}

/// Largest difference between off-diagonal entries in Wronskian form and
/// the same entries from the integral representation.
pub fn p_matrix_quadrature_defect(seeds: &BargmannSeedSet, pm: &PMatrix, h: &SampledField) -> Result<f64> {
    let s = seeds.seeds();
    let m = s.len();
    let mut worst = 0.0f64;
    for mu in 0..m {
        for nu in 0..m {
            if mu == nu {
                continue;
            }
            let f = h.product(&s[mu].solution.field)?.product(&s[nu].solution.field)?;
            let k = oriented_integral(&f, seeds.direction());
            for (i, kv) in k.values().iter().enumerate() {
                let quad = s[mu].c * kv;
                worst = worst.max((pm.at(i)[(mu, nu)] - quad).abs());
            }
        }
    }
    Ok(worst)
}

/// The transformed potential.
pub fn bargmann_potential(
    seeds: &BargmannSeedSet,
    pm: &PMatrix,
    weight: &Weight,
    v0: &SampledField,
) -> Result<SampledField> {
    same_grid(seeds.grid(), v0.grid())?;
    same_grid(seeds.grid(), weight.grid())?;
    let s = seeds.seeds();
    let m = s.len();
    let (h, dh) = (weight.h(), weight.dh());
    let values = (0..pm.grid.len())
        .map(|i| {
            let d2p = DMatrix::from_fn(m, m, |mu, nu| {
                let (a, da) = (s[mu].solution.values()[i], s[mu].solution.derivs()[i]);
                let (b, db) = (s[nu].solution.values()[i], s[nu].solution.derivs()[i]);
                s[mu].c * (dh[i] * a * b + h[i] * (da * b + a * db))
            });
            let inv = pm.inverse_at(i);
            let x = inv * pm.deriv_at(i);
            let y = inv * d2p;
            let l = x.trace();
            let dl = y.trace() - (&x * &x).trace();
            v0.values()[i] - 2.0 * dl + dh[i] / h[i] * l
        })
        .collect();
    SampledField::from_values(pm.grid, values)
}

/// Row vectors `y_μ = C_μ w_μ` with `w = φ°ᵀ P⁻¹`, and their derivatives
/// from `w' = (φ°'ᵀ − wᵀP') P⁻¹`, as `(values[μ][node], derivs[μ][node])`.
fn seed_rows(seeds: &BargmannSeedSet, pm: &PMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let s = seeds.seeds();
    let m = s.len();
    let n = pm.grid.len();
    let mut ys = vec![vec![0.0; n]; m];
    let mut dys = vec![vec![0.0; n]; m];
    for i in 0..n {
        let inv = pm.inverse_at(i);
        let dp = pm.deriv_at(i);
        let w: Vec<f64> = (0..m)
            .map(|mu| (0..m).map(|nu| s[nu].solution.values()[i] * inv[(nu, mu)]).sum())
            .collect();
        for mu in 0..m {
            let dw: f64 = (0..m)
                .map(|nu| {
                    let row = s[nu].solution.derivs()[i] - (0..m).map(|k| w[k] * dp[(k, nu)]).sum::<f64>();
                    row * inv[(nu, mu)]
                })
                .sum();
            ys[mu][i] = s[mu].c * w[mu];
            dys[mu][i] = s[mu].c * dw;
        }
    }
    (ys, dys)
}

fn tagged(gamma_sq: f64, grid: RadialGrid, values: Vec<f64>, derivs: Vec<f64>) -> Result<Solution> {
    let field = SampledField::new(grid, values, derivs)?;
    let bc = BoundaryCondition::Custom {
        value: field.values()[0],
        slope: field.derivs()[0],
        at: Endpoint::Left,
    };
    Ok(Solution::new(gamma_sq, field, bc))
}

/// Transformed bound-type solutions `y_μ = C_μ Σ_ν φ°_ν P⁻¹_νμ`, each at
/// its own `γ_μ²`.
pub fn transformed_seed_solutions(seeds: &BargmannSeedSet, pm: &PMatrix) -> Result<Vec<Solution>> {
    let (ys, dys) = seed_rows(seeds, pm);
    ys.into_iter()
        .zip(dys)
        .zip(seeds.seeds())
        .map(|((y, dy), s)| tagged(s.gamma_sq(), pm.grid, y, dy))
        .collect()
}

/// Transformed solution at the `γ²` of `phi0`:
/// `φ = φ° − Σ_μ y_μ K_μ` with `K_μ = W{φ°_μ, φ°}/(γ_μ² − γ²)`.
///
/// `K_μ` is taken from the integral representation anchored at the
/// direction's starting endpoint, `K_μ = W(anchor)/(γ_μ² − γ²) + ∫ h φ°_μ φ°`,
/// which is exact for any `φ°` and avoids forming a large Wronskian divided
/// by a small difference of spectral parameters. For regular (or decaying)
/// `φ°` the anchor term vanishes.
pub fn bargmann_solution(seeds: &BargmannSeedSet, pm: &PMatrix, h: &SampledField, phi0: &Solution) -> Result<Solution> {
    same_grid(seeds.grid(), phi0.grid())?;
    same_grid(seeds.grid(), h.grid())?;
    let s = seeds.seeds();
    for seed in s {
        if (seed.gamma_sq() - phi0.gamma_sq).abs() < COINCIDENCE_TOLERANCE {
            return Err(Error::CoincidentSpectralParameters {
                first: seed.gamma_sq(),
                second: phi0.gamma_sq,
                tol: COINCIDENCE_TOLERANCE,
            });
        }
    }
    let (ys, dys) = seed_rows(seeds, pm);
    let n = pm.grid.len();
    let anchor = match seeds.direction() {
        Direction::FromLeft => 0,
        Direction::FromRight => n - 1,
    };
    let mut values = phi0.values().to_vec();
    let mut derivs = phi0.derivs().to_vec();
    for (mu, seed) in s.iter().enumerate() {
        let integrand = h.product(&seed.solution.field)?.product(&phi0.field)?;
        let integral = oriented_integral(&integrand, seeds.direction());
        let (a, da) = (seed.solution.values()[anchor], seed.solution.derivs()[anchor]);
        let (b, db) = (phi0.values()[anchor], phi0.derivs()[anchor]);
        let offset = (a * db - da * b) / (seed.gamma_sq() - phi0.gamma_sq);
        for i in 0..n {
            let k = offset + integral.values()[i];
            let dk = integrand.values()[i];
            values[i] -= ys[mu][i] * k;
            derivs[i] -= dys[mu][i] * k + ys[mu][i] * dk;
        }
    }
    tagged(phi0.gamma_sq, pm.grid, values, derivs)
}

/// A complete Bargmann transformation over a base problem.
#[derive(Debug, Clone)]
pub struct BargmannTransform {
    seeds: BargmannSeedSet,
    weight: Weight,
    pmatrix: PMatrix,
    potential: SampledField,
}

impl BargmannTransform {
    pub fn new(seeds: BargmannSeedSet, weight: &Weight, v0: &SampledField) -> Result<Self> {
        let pmatrix = p_matrix(&seeds, weight.field())?;
        let potential = bargmann_potential(&seeds, &pmatrix, weight, v0)?;
        Ok(BargmannTransform {
            seeds,
            weight: weight.clone(),
            pmatrix,
            potential,
        })
    }

    pub fn seeds(&self) -> &BargmannSeedSet {
        &self.seeds
    }

    pub fn pmatrix(&self) -> &PMatrix {
        &self.pmatrix
    }

    pub fn potential(&self) -> &SampledField {
        &self.potential
    }

    pub fn solution(&self, phi0: &Solution) -> Result<Solution> {
        bargmann_solution(&self.seeds, &self.pmatrix, self.weight.field(), phi0)
    }

    pub fn transformed_seeds(&self) -> Result<Vec<Solution>> {
        transformed_seed_solutions(&self.seeds, &self.pmatrix)
    }
}
