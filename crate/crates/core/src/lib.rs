//! Exact-arithmetic Dempster-Shafer calculus over multivariate frames.
//!
//! Belief functions are stored as sparse maps from focal sets to exact
//! rationals. Dense commonality tables are built only on small frames, or on
//! the small sub-lattice a computation actually touches.

pub mod calculus;
pub mod cli;
pub mod error;
mod feasibility;
pub mod fixtures;
pub mod frame;
pub mod graphoid;
pub mod independence;
mod lattice;
pub mod massfun;
pub mod rational;
pub mod regression;

pub use calculus::{
    combine, condition_shafer, project, remove_shenoy, vacuous_extend, CombinationOutcome,
};
pub use error::{Error, Result};
pub use frame::{ConfigSet, EventSet, Frame, Variable, VariableSet};
pub use massfun::{
    commonality, mass_from_commonality, Classification, CommonalityTable, MassAssignment,
    MassFunction, NormMode, PointValues,
};
pub use rational::Rational;

/// Size limits shared by every operation that builds dense tables or runs
/// the feasibility eliminator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest number of configurations a dense subset lattice may span.
    pub lattice_gate: usize,
    /// Largest number of free unknowns handed to Fourier-Motzkin elimination.
    pub solver_cap: usize,
    /// Largest number of inequality rows kept during elimination.
    pub fm_row_limit: usize,
    /// Largest variable count for exhaustive graphoid sweeps.
    pub sweep_max_vars: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            lattice_gate: 20,
            solver_cap: 24,
            fm_row_limit: 20_000,
            sweep_max_vars: 4,
        }
    }
}

impl Limits {
    pub fn check_lattice(&self, size: usize) -> Result<()> {
        if size > self.lattice_gate {
            Err(Error::LatticeTooLarge {
                size,
                gate: self.lattice_gate,
            })
        } else {
            Ok(())
        }
    }
}
