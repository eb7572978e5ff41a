//! Shared fixtures for the benchmarks.

use forge_core::bargmann::{BargmannSeed, BargmannSeedSet};
use forge_core::{
    solve, AnalyticExpr, BoundaryCondition, Direction, Endpoint, RadialGrid, SampledField, Solution, Weight,
};

/// Base problem used by every benchmark: a Pöschl-Teller well with a
/// slowly varying weight on `[0, 10]`.
pub struct Fixture {
    pub grid: RadialGrid,
    pub weight: Weight,
    pub v0: SampledField,
}

impl Fixture {
    pub fn new(n: usize) -> Self {
        let grid = RadialGrid::new(0.0, 10.0, n).expect("valid grid");
        let weight = Weight::parse("1+0.2*tanh(r)", &grid).expect("positive weight");
        let v0 = AnalyticExpr::parse("-2*sech(r)^2")
            .expect("valid expression")
            .evaluate_on_grid(&grid)
            .expect("finite on grid");
        Fixture { grid, weight, v0 }
    }

    pub fn regular(&self, gamma_sq: f64) -> Solution {
        solve(
            &self.v0,
            self.weight.field(),
            gamma_sq,
            BoundaryCondition::RegularAtLeft,
        )
        .expect("finite solution")
    }

    /// Even solution `phi(0) = 1, phi'(0) = 0`. Nodeless whenever
    /// `V - gamma_sq*h > 0`, which holds for `gamma_sq <= -2`.
    pub fn even(&self, gamma_sq: f64) -> Solution {
        let bc = BoundaryCondition::Custom {
            value: 1.0,
            slope: 0.0,
            at: Endpoint::Left,
        };
        solve(&self.v0, self.weight.field(), gamma_sq, bc).expect("finite solution")
    }

    /// Regular seeds at `gamma_sq = -1, -2, ...`, all with `C = 0.5`.
    pub fn seed_set(&self, m: usize) -> BargmannSeedSet {
        let seeds = (1..=m)
            .map(|k| BargmannSeed::new(0.5, self.regular(-(k as f64))))
            .collect();
        BargmannSeedSet::new(seeds, Direction::FromLeft).expect("valid seed set")
    }
}
