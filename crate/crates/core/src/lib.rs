//! Transformation toolkit for the radial equation `−φ'' + V(r) φ = γ² h(r) φ`.
//!
//! Everything works on uniform grids ([`RadialGrid`]) with fields that carry
//! their first derivative ([`SampledField`]). Potentials and weights are given
//! as closed-form expressions ([`AnalyticExpr`]) and differentiated
//! symbolically; the transforms then build new potentials and solutions node
//! by node and [`verify`] checks them against the equation independently.

pub mod bargmann;
pub mod darboux;
pub mod error;
pub mod expr;
pub mod grid;
pub mod multichannel;
pub mod solver;
pub mod verify;
pub mod weight;

pub use bargmann::{BargmannSeed, BargmannSeedSet, BargmannTransform, PMatrix, PMatrixSummary};
pub use darboux::{ChainTransform, DarbouxTransform};
pub use error::{Error, Result};
pub use expr::{AnalyticExpr, ParseError};
pub use grid::{Direction, RadialGrid, SampledField};
pub use multichannel::{ChannelSystem, KernelForm, PotentialMatrix, SolutionMatrix};
pub use solver::{solve, BoundaryCondition, Endpoint, Solution};
pub use verify::ResidualReport;
pub use weight::Weight;
