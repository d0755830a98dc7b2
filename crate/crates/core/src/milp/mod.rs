//! Exact solvers: a dense simplex, branch-and-bound, and an enumeration oracle.

pub mod bnb;
pub mod lp;
pub mod oracle;

pub use bnb::{branch_and_bound, SolveOptions, SolveResult, SolveStatus, TraceRecord};
pub use lp::{simplex_solve, LpProblem, LpSolution, LpStatus, Simplex};
pub use oracle::{exhaustive_oracle, OracleResult};

use crate::error::Result;
use crate::formulate::IpInstance;
use crate::scoring::{ModelMeta, ScoringSystem};

impl IpInstance {
    /// Scoring system of the best solution, annotated with solver metadata.
    pub fn decode(&self, result: &SolveResult) -> Option<ScoringSystem> {
        let x = result.solution.as_ref()?;
        let model = self.model_from(x).ok()?;
        let meta = ModelMeta {
            solver_status: Some(result.status.as_str().to_string()),
            gap: Some(result.gap),
            ..model.meta.clone()
        };
        Some(model.with_meta(meta))
    }

    pub fn try_decode(&self, result: &SolveResult) -> Result<ScoringSystem> {
        self.decode(result)
            .ok_or_else(|| crate::Error::Infeasible(format!("solver returned no model ({})", result.status.as_str())))
    }
}
