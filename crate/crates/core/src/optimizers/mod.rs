//! Design-space exploration: normalisation helpers, grid sweeps, a
//! hypervolume-driven multi-objective EA and a stochastic-ranking evolution
//! strategy for the constrained single-objective mission problem.

mod cache;
pub mod hypervolume;
pub mod isres;
pub mod moea;
pub mod normalize;
pub mod problem;
pub mod sweep;

pub use cache::EvalCache;
pub use hypervolume::hypervolume;
pub use isres::{isres_optimize, IsresResult, IsresSettings, IsresTracePoint, SuccessRule};
pub use moea::{moea_optimize, HvPoint, MoeaResult, MoeaSettings};
pub use normalize::{combine, inverse_mbsd, normalize, DEFAULT_INVERSE_CAP};
pub use problem::{ArchiveEntry, DesignObjective, Outcome, Problem, Sense};
pub use sweep::{sweep, Axis, SweepGrid, SweepVariable};

use rand::Rng;

/// Feasibility-first comparison on minimised objective values: any feasible
/// point beats any infeasible one, infeasible points compare by violation.
pub(crate) fn feasibility_first_better(a_obj: f64, a_viol: f64, b_obj: f64, b_viol: f64) -> bool {
    match (a_viol == 0.0, b_viol == 0.0) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a_viol < b_viol,
        (true, true) => a_obj < b_obj,
    }
}

/// Standard normal draw; kept local so both optimisers share one source of
/// Gaussian noise.
pub(crate) fn gauss<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}
