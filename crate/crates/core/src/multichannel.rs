//! Multichannel generalization of the one-seed Bargmann map.
//!
//! The coupled problem is `−φ_αβ'' + Σ_k V_αk φ_kβ = γ_α² h φ_αβ`, with a
//! symmetric potential matrix and one spectral parameter per row. A seed
//! vector `ψ°_α = Σ_β φ°_αβ(γ') c_β` defines
//!
//! ```text
//! D   = 1 + Σ_j ∫ h ψ°_j²
//! ψ_α = ψ°_α / D
//! V_αβ = V°_αβ − 2h (ψ_α ψ°_β)' − h' ψ_α ψ°_β
//! φ_αβ = φ°_αβ − ψ_α K_β,   K_β' = h Σ_j ψ°_j φ°_jβ
//! ```
//!
//! Since `ψ_α ψ°_β = ψ°_α ψ°_β / D`, the new potential is symmetric whenever
//! the base one is. The solution map needs `K_β = Σ_j W{ψ°_j, φ°_jβ} / Δ`,
//! which only holds when every channel is shifted by the same
//! `Δ = γ'_j² − γ_j²`; other evaluation points are refused.

use crate::darboux::COINCIDENCE_TOLERANCE;
use crate::error::{Error, Result};
use crate::grid::{oriented_integral, same_grid, wronskian_values, Direction, RadialGrid, SampledField};
use crate::solver::{solve, BoundaryCondition, Solution};
use crate::weight::Weight;

/// Relative asymmetry tolerated in a base potential matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

fn check_grids(grid: &RadialGrid, fields: &[SampledField]) -> Result<()> {
    fields.iter().try_for_each(|f| same_grid(grid, f.grid()))
}

/// Square matrix of sampled fields, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialMatrix {
    n: usize,
    entries: Vec<SampledField>,
}

impl PotentialMatrix {
    pub fn new(n: usize, entries: Vec<SampledField>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidChannelSystem(format!(
                "{} entries do not form a {n}x{n} matrix",
                entries.len()
            )));
        }
        check_grids(entries[0].grid(), &entries)?;
        Ok(PotentialMatrix { n, entries })
    }

    /// Uncoupled channels.
    pub fn diagonal(channels: Vec<SampledField>) -> Result<Self> {
        let n = channels.len();
        if n == 0 {
            return Err(Error::InvalidChannelSystem("no channels".into()));
        }
        let grid = *channels[0].grid();
        check_grids(&grid, &channels)?;
        let mut diag = channels.into_iter();
        let entries = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    diag.next().expect("one diagonal entry per channel")
                } else {
                    SampledField::zeros(grid)
                }
            })
            .collect();
        Ok(PotentialMatrix { n, entries })
    }

    pub fn channels(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &RadialGrid {
        self.entries[0].grid()
    }

    pub fn get(&self, alpha: usize, beta: usize) -> &SampledField {
        &self.entries[alpha * self.n + beta]
    }

    pub fn entries(&self) -> &[SampledField] {
        &self.entries
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|a| (0..self.n).all(|b| a == b || self.get(a, b).sup_norm() == 0.0))
    }

    /// `max |V_αβ − V_βα|` over all entries and nodes.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.n {
            for b in a + 1..self.n {
                let d = self.get(a, b).sup_distance(self.get(b, a)).unwrap_or(f64::INFINITY);
                worst = worst.max(d);
            }
        }
        worst
    }

    fn scale(&self) -> f64 {
        self.entries.iter().map(SampledField::sup_norm).fold(0.0, f64::max)
    }
}

/// `rows × cols` matrix of solutions; row `α` is at `gamma_sq[α]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionMatrix {
    rows: usize,
    cols: usize,
    gamma_sq: Vec<f64>,
    entries: Vec<SampledField>,
}

impl SolutionMatrix {
    pub fn new(rows: usize, cols: usize, gamma_sq: Vec<f64>, entries: Vec<SampledField>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols || gamma_sq.len() != rows {
            return Err(Error::InvalidChannelSystem(format!(
                "{} entries and {} spectral parameters do not form a {rows}x{cols} solution matrix",
                entries.len(),
                gamma_sq.len()
            )));
        }
        check_grids(entries[0].grid(), &entries)?;
        Ok(SolutionMatrix {
            rows,
            cols,
            gamma_sq,
            entries,
        })
    }

    /// Diagonal matrix of single-channel solutions.
    pub fn diagonal(solutions: Vec<Solution>) -> Result<Self> {
        let n = solutions.len();
        if n == 0 {
            return Err(Error::InvalidChannelSystem("no channels".into()));
        }
        let grid = *solutions[0].grid();
        let gamma_sq = solutions.iter().map(|s| s.gamma_sq).collect();
        let mut diag = solutions.into_iter();
        let entries = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    diag.next().expect("one solution per channel").field
                } else {
                    SampledField::zeros(grid)
                }
            })
            .collect();
        SolutionMatrix::new(n, n, gamma_sq, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn gamma_sq(&self) -> &[f64] {
        &self.gamma_sq
    }

    pub fn grid(&self) -> &RadialGrid {
        self.entries[0].grid()
    }

    pub fn get(&self, alpha: usize, beta: usize) -> &SampledField {
        &self.entries[alpha * self.cols + beta]
    }

    pub fn entries(&self) -> &[SampledField] {
        &self.entries
    }

    /// `Σ_β φ_αβ c_β` as a single-column matrix.
    pub fn combine(&self, c: &[f64]) -> Result<SolutionMatrix> {
        if c.len() != self.cols {
            return Err(Error::InvalidChannelSystem(format!(
                "{} coefficients for {} columns",
                c.len(),
                self.cols
            )));
        }
        let grid = *self.grid();
        let entries = (0..self.rows)
            .map(|a| (0..self.cols).try_fold(SampledField::zeros(grid), |acc, b| acc.add_scaled(self.get(a, b), c[b])))
            .collect::<Result<Vec<_>>>()?;
        SolutionMatrix::new(self.rows, 1, self.gamma_sq.clone(), entries)
    }
}

/// Solve each channel of an uncoupled base problem at its own `γ_α²`.
pub fn solve_diagonal_base(
    v0: &PotentialMatrix,
    h: &SampledField,
    gamma_sq: &[f64],
    bc: BoundaryCondition,
) -> Result<SolutionMatrix> {
    if !v0.is_diagonal() {
        return Err(Error::InvalidChannelSystem(
            "base solutions can only be integrated for uncoupled channels".into(),
        ));
    }
    if gamma_sq.len() != v0.channels() {
        return Err(Error::InvalidChannelSystem(format!(
            "{} spectral parameters for {} channels",
            gamma_sq.len(),
            v0.channels()
        )));
    }
    let sols = gamma_sq
        .iter()
        .enumerate()
        .map(|(a, &g2)| solve(v0.get(a, a), h, g2, bc))
        .collect::<Result<Vec<_>>>()?;
    SolutionMatrix::diagonal(sols)
}

/// How the kernel `K_β` of the solution map is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelForm {
    /// Oriented integral of `h Σ_j ψ°_j φ°_jβ`, anchored by the Wronskian at
    /// the starting endpoint.
    #[default]
    Integral,
    /// `Σ_j W{ψ°_j, φ°_jβ} / Δ` at every node.
    Wronskian,
}

/// A multichannel transformation built from one seed vector.
#[derive(Debug, Clone)]
pub struct ChannelSystem {
    base: PotentialMatrix,
    weight: Weight,
    seed: SolutionMatrix,
    direction: Direction,
    denominator: SampledField,
    psi: Vec<SampledField>,
    potential: PotentialMatrix,
}

impl ChannelSystem {
    /// `seeds` holds base solutions at `γ'` (one row per channel), combined
    /// column-wise with `c`.
    pub fn new(
        base: PotentialMatrix,
        weight: &Weight,
        seeds: &SolutionMatrix,
        c: &[f64],
        direction: Direction,
    ) -> Result<Self> {
        let n = base.channels();
        let grid = *base.grid();
        same_grid(&grid, weight.grid())?;
        same_grid(&grid, seeds.grid())?;
        if seeds.rows() != n {
            return Err(Error::InvalidChannelSystem(format!(
                "seed matrix has {} rows for {n} channels",
                seeds.rows()
            )));
        }
        let asym = base.symmetry_defect();
        if asym > SYMMETRY_TOLERANCE * (1.0 + base.scale()) {
            return Err(Error::InvalidChannelSystem(format!(
                "base potential is not symmetric (defect {asym:e})"
            )));
        }
        let seed = seeds.combine(c)?;
        let h = weight.field();

        let sum_sq = (0..n).try_fold(SampledField::zeros(grid), |acc, j| {
            acc.add_scaled(&h.product(seed.get(j, 0))?.product(seed.get(j, 0))?, 1.0)
        })?;
        let integral = oriented_integral(&sum_sq, direction);
        let dv: Vec<f64> = integral.values().iter().map(|x| 1.0 + x).collect();
        let ddv = sum_sq.values().to_vec();
        for (i, &d) in dv.iter().enumerate() {
            if d.is_nan() || d < crate::darboux::NODE_EPSILON {
                return Err(Error::SingularDenominator {
                    node: i,
                    r: grid.node(i),
                    value: d,
                });
            }
        }
        let denominator = SampledField::new(grid, dv, ddv)?;

        let (d, dd) = (denominator.values(), denominator.derivs());
        let psi = (0..n)
            .map(|a| {
                let s = seed.get(a, 0);
                let values = (0..grid.len()).map(|i| s.values()[i] / d[i]).collect();
                let derivs = (0..grid.len())
                    .map(|i| s.derivs()[i] / d[i] - s.values()[i] * dd[i] / (d[i] * d[i]))
                    .collect();
                SampledField::new(grid, values, derivs)
            })
            .collect::<Result<Vec<_>>>()?;

        let (hv, dh) = (weight.h(), weight.dh());
        let mut entries = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let (p, q) = (seed.get(a, 0), seed.get(b, 0));
                // written symmetrically in (a, b) so that V_ab == V_ba exactly
                let values = (0..grid.len())
                    .map(|i| {
                        let pq = p.values()[i] * q.values()[i];
                        let prod = pq / d[i];
                        let dprod = (p.derivs()[i] * q.values()[i] + p.values()[i] * q.derivs()[i]) / d[i]
                            - pq * dd[i] / (d[i] * d[i]);
                        base.get(a, b).values()[i] - 2.0 * hv[i] * dprod - dh[i] * prod
                    })
                    .collect();
                entries.push(SampledField::from_values(grid, values)?);
            }
        }
        let potential = PotentialMatrix::new(n, entries)?;
        Ok(ChannelSystem {
            base,
            weight: weight.clone(),
            seed,
            direction,
            denominator,
            psi,
            potential,
        })
    }

    pub fn channels(&self) -> usize {
        self.base.channels()
    }

    pub fn base(&self) -> &PotentialMatrix {
        &self.base
    }

    pub fn potential(&self) -> &PotentialMatrix {
        &self.potential
    }

    /// `D(r)` with its derivative.
    pub fn denominator(&self) -> &SampledField {
        &self.denominator
    }

    /// The combined seed vector `ψ°` as an `N × 1` matrix.
    pub fn seed_vector(&self) -> &SolutionMatrix {
        &self.seed
    }

    /// `ψ = ψ°/D`, a solution of the transformed system at `γ'`.
    pub fn transformed_seed(&self) -> Result<SolutionMatrix> {
        SolutionMatrix::new(self.channels(), 1, self.seed.gamma_sq().to_vec(), self.psi.clone())
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.potential.symmetry_defect()
    }

    /// Map a base solution matrix at `γ` to the transformed system.
    pub fn solution(&self, phi0: &SolutionMatrix, form: KernelForm) -> Result<SolutionMatrix> {
        let n = self.channels();
        let grid = *self.base.grid();
        same_grid(&grid, phi0.grid())?;
        if phi0.rows() != n {
            return Err(Error::InvalidChannelSystem(format!(
                "solution matrix has {} rows for {n} channels",
                phi0.rows()
            )));
        }
        let delta = self.seed.gamma_sq()[0] - phi0.gamma_sq()[0];
        for j in 1..n {
            let dj = self.seed.gamma_sq()[j] - phi0.gamma_sq()[j];
            if (dj - delta).abs() > COINCIDENCE_TOLERANCE * (1.0 + delta.abs()) {
                return Err(Error::InvalidChannelSystem(format!(
                    "spectral shift differs between channels: {delta} in channel 0, {dj} in channel {j}"
                )));
            }
        }
        let coincident = delta.abs() < COINCIDENCE_TOLERANCE;
        let refuse = || Error::CoincidentSpectralParameters {
            first: self.seed.gamma_sq()[0],
            second: phi0.gamma_sq()[0],
            tol: COINCIDENCE_TOLERANCE,
        };
        if coincident && form == KernelForm::Wronskian {
            return Err(refuse());
        }
        let h = self.weight.field();
        let len = grid.len();
        let anchor = match self.direction {
            Direction::FromLeft => 0,
            Direction::FromRight => len - 1,
        };
        let mut entries = Vec::with_capacity(n * phi0.cols());
        let mut columns = Vec::with_capacity(phi0.cols());
        for b in 0..phi0.cols() {
            let integrand = (0..n).try_fold(SampledField::zeros(grid), |acc, j| {
                acc.add_scaled(&h.product(self.seed.get(j, 0))?.product(phi0.get(j, b))?, 1.0)
            })?;
            let wronskians = (0..n)
                .map(|j| wronskian_values(self.seed.get(j, 0), phi0.get(j, b)))
                .collect::<Result<Vec<_>>>()?;
            let w_sum = |i: usize| wronskians.iter().map(|w| w[i]).sum::<f64>();
            let k: Vec<f64> = match form {
                KernelForm::Integral => {
                    // at Δ = 0 the map is only defined when the Wronskian sum
                    // vanishes, e.g. seed and solution regular at the same end
                    let offset = if coincident {
                        if w_sum(anchor).abs() > COINCIDENCE_TOLERANCE {
                            return Err(refuse());
                        }
                        0.0
                    } else {
                        w_sum(anchor) / delta
                    };
                    oriented_integral(&integrand, self.direction)
                        .values()
                        .iter()
                        .map(|x| offset + x)
                        .collect()
                }
                KernelForm::Wronskian => (0..len).map(|i| w_sum(i) / delta).collect(),
            };
            columns.push((k, integrand.values().to_vec()));
        }
        for a in 0..n {
            for (b, (k, dk)) in columns.iter().enumerate() {
                let (p, f) = (&self.psi[a], phi0.get(a, b));
                let values = (0..len).map(|i| f.values()[i] - p.values()[i] * k[i]).collect();
                let derivs = (0..len)
                    .map(|i| f.derivs()[i] - p.derivs()[i] * k[i] - p.values()[i] * dk[i])
                    .collect();
                entries.push(SampledField::new(grid, values, derivs)?);
            }
        }
        SolutionMatrix::new(n, phi0.cols(), phi0.gamma_sq().to_vec(), entries)
    }
}
