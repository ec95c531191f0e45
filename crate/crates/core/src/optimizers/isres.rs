//! Improved stochastic-ranking evolution strategy for one objective under
//! constraints expressed as a total violation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cache::EvalCache;
use super::problem::{ArchiveEntry, Problem};
use super::{feasibility_first_better, gauss};
use crate::error::{domain, Result};

/// How the 1/7 rule is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuccessRule {
    /// Parents are the top `(1 - gamma)` share of the offspring and a global
    /// step multiplier steers the smoothed mutation success rate toward the
    /// target.
    SuccessRate,
    /// Parents are the top `target` share of the offspring; no global
    /// multiplier.
    ParentFraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsresSettings {
    /// Offspring per generation.
    pub pop_size: usize,
    /// Differential-variation weight; also sets the parent share in
    /// success-rate mode.
    pub gamma: f64,
    /// Exponential smoothing of step sizes and of the success rate.
    pub alpha: f64,
    pub success_target: f64,
    pub rule: SuccessRule,
    /// Probability of comparing by objective alone during stochastic ranking.
    pub p_f: f64,
    pub budget: usize,
    pub stall_generations: usize,
    pub stall_tol: f64,
    pub seed: u64,
}

impl Default for IsresSettings {
    fn default() -> Self {
        IsresSettings {
            pop_size: 400,
            gamma: 0.85,
            alpha: 0.2,
            success_target: 1.0 / 7.0,
            rule: SuccessRule::SuccessRate,
            p_f: 0.45,
            budget: 30_000,
            stall_generations: 20,
            stall_tol: 1e-3,
            seed: 1,
        }
    }
}

impl IsresSettings {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 || self.budget < self.pop_size {
            return domain("isres needs pop_size >= 2 and budget >= pop_size");
        }
        for (n, v) in [("gamma", self.gamma), ("alpha", self.alpha), ("p_f", self.p_f)] {
            if !(0.0..=1.0).contains(&v) {
                return domain(format!("isres {n} must lie in [0, 1]"));
            }
        }
        if !(self.success_target > 0.0 && self.success_target < 1.0) {
            return domain("isres success target must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn parents(&self) -> usize {
        let share = match self.rule {
            SuccessRule::SuccessRate => 1.0 - self.gamma,
            SuccessRule::ParentFraction => self.success_target,
        };
        ((share * self.pop_size as f64).ceil() as usize).clamp(1, self.pop_size)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsresTracePoint {
    pub gen: usize,
    pub evaluations: usize,
    /// Best feasible objective so far in natural units; NaN until one exists.
    pub best_objective: f64,
    /// Smallest violation seen so far.
    pub best_violation: f64,
    pub success_rate: f64,
    pub step_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsresResult {
    /// Best individual under feasibility-first ordering.
    pub best: ArchiveEntry,
    pub trace: Vec<IsresTracePoint>,
    pub archive: Vec<ArchiveEntry>,
    pub evaluations: usize,
    pub generations: usize,
    pub converged: bool,
    pub cache_hits: usize,
}

impl IsresResult {
    pub fn found_feasible(&self) -> bool {
        self.best.outcome.feasible
    }
}

/// Bubble-sort style ranking that compares by objective with probability
/// `p_f` (or always when both are feasible) and by violation otherwise.
pub fn stochastic_rank<R: Rng>(rng: &mut R, f: &[f64], phi: &[f64], p_f: f64) -> Vec<usize> {
    let n = f.len();
    let mut idx: Vec<usize> = (0..n).collect();
    for _ in 0..n {
        let mut swapped = false;
        for j in 0..n.saturating_sub(1) {
            let (a, b) = (idx[j], idx[j + 1]);
            let u: f64 = rng.random();
            let by_objective = (phi[a] == 0.0 && phi[b] == 0.0) || u < p_f;
            let swap = if by_objective { f[a] > f[b] } else { phi[a] > phi[b] };
            if swap {
                idx.swap(j, j + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    idx
}

pub fn isres_optimize(problem: &Problem, settings: &IsresSettings) -> Result<IsresResult> {
    settings.validate()?;
    if problem.n_objectives() != 1 {
        return domain("isres_optimize handles exactly one objective");
    }
    let sense = problem.senses[0];
    let n = problem.dim();
    let lam = settings.pop_size;
    let mu = settings.parents();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut cache = EvalCache::new();

    let tau = 1.0 / (2.0 * (n as f64).sqrt()).sqrt();
    let tau_p = 1.0 / (2.0 * n as f64).sqrt();
    let sigma0: Vec<f64> = (0..n).map(|i| (problem.upper[i] - problem.lower[i]) / (n as f64).sqrt()).collect();
    let sigma_floor: Vec<f64> = sigma0.iter().map(|s| (s * 1e-12).max(f64::MIN_POSITIVE)).collect();

    let mut xs: Vec<Vec<f64>> = (0..lam)
        .map(|_| {
            (0..n)
                .map(|i| {
                    let (l, u) = (problem.lower[i], problem.upper[i]);
                    if u > l {
                        rng.random_range(l..=u)
                    } else {
                        l
                    }
                })
                .collect()
        })
        .collect();
    let mut sigmas: Vec<Vec<f64>> = vec![sigma0.clone(); lam];
    // Parent of each offspring that came from mutation, for success counting.
    let mut mutated_from: Vec<Option<(f64, f64)>> = vec![None; lam];

    let mut archive: Vec<ArchiveEntry> = Vec::new();
    let mut trace = Vec::new();
    let mut best: Option<usize> = None;
    let mut best_violation = f64::INFINITY;
    let mut multiplier = 1.0;
    let mut smoothed_success = settings.success_target;
    let mut gen = 0;
    let mut converged = false;

    loop {
        let take = lam.min(settings.budget - archive.len());
        let evaluated: Vec<Vec<f64>> = xs[..take].iter().map(|x| problem.repair(x)).collect();
        let outs = cache.evaluate_batch(problem, &evaluated);
        let mut f = Vec::with_capacity(take);
        let mut phi = Vec::with_capacity(take);
        for (x, o) in evaluated.into_iter().zip(outs) {
            f.push(sense.to_min(o.objectives[0]));
            phi.push(o.ranking_violation());
            best_violation = best_violation.min(phi[phi.len() - 1]);
            let id = archive.len();
            let better = best.is_none_or(|b| {
                let bo = &archive[b].outcome;
                feasibility_first_better(
                    f[f.len() - 1],
                    phi[phi.len() - 1],
                    sense.to_min(bo.objectives[0]),
                    bo.ranking_violation(),
                )
            });
            archive.push(ArchiveEntry { gen, eval_id: id, x, outcome: o });
            if better {
                best = Some(id);
            }
        }

        // Success of mutated offspring against their parent.
        let (mut trials, mut wins) = (0usize, 0usize);
        for k in 0..take {
            if let Some((pf, pphi)) = mutated_from[k] {
                trials += 1;
                if feasibility_first_better(f[k], phi[k], pf, pphi) {
                    wins += 1;
                }
            }
        }
        let rate = if trials > 0 { wins as f64 / trials as f64 } else { settings.success_target };
        if gen > 0 && settings.rule == SuccessRule::SuccessRate {
            smoothed_success = (1.0 - settings.alpha) * smoothed_success + settings.alpha * rate;
            let t = settings.success_target;
            multiplier *= ((smoothed_success - t) / (1.0 - t) / (n as f64 + 1.0).sqrt()).exp();
            multiplier = multiplier.clamp(1e-3, 1e3);
        }

        let b = &archive[best.expect("at least one evaluation")];
        trace.push(IsresTracePoint {
            gen,
            evaluations: archive.len(),
            best_objective: if b.outcome.feasible { b.outcome.objectives[0] } else { f64::NAN },
            best_violation,
            success_rate: rate,
            step_multiplier: multiplier,
        });
        if plateau(&trace, sense, settings.stall_generations, settings.stall_tol) {
            converged = true;
            break;
        }
        if take < lam || archive.len() >= settings.budget {
            break;
        }

        // Selection.
        let order = stochastic_rank(&mut rng, &f, &phi, settings.p_f);
        let parents: Vec<usize> = order[..mu.min(take)].to_vec();
        let mu_eff = parents.len();

        // Variation.
        let mut next_x = Vec::with_capacity(lam);
        let mut next_s = Vec::with_capacity(lam);
        let mut next_from = Vec::with_capacity(lam);
        for k in 0..lam {
            let pi = parents[k % mu_eff];
            let mut done = false;
            if k + 1 < mu_eff {
                // Differential step toward the best along the rank ladder.
                let (first, next) = (parents[0], parents[k % mu_eff + 1]);
                let cand: Vec<f64> =
                    (0..n).map(|j| xs[pi][j] + settings.gamma * (xs[first][j] - xs[next][j])).collect();
                if problem.in_bounds(&cand) {
                    next_x.push(cand);
                    next_s.push(sigmas[pi].clone());
                    next_from.push(None);
                    done = true;
                }
            }
            if done {
                continue;
            }
            let global = tau_p * gauss(&mut rng);
            let new_s: Vec<f64> =
                (0..n).map(|j| (sigmas[pi][j] * (global + tau * gauss(&mut rng)).exp()).max(sigma_floor[j])).collect();
            let mut cand = xs[pi].clone();
            for j in 0..n {
                let (l, u) = (problem.lower[j], problem.upper[j]);
                let mut v = f64::NAN;
                for _ in 0..10 {
                    let t = xs[pi][j] + multiplier * new_s[j] * gauss(&mut rng);
                    if t >= l && t <= u {
                        v = t;
                        break;
                    }
                }
                cand[j] = if v.is_nan() { xs[pi][j] } else { v };
            }
            let smoothed: Vec<f64> =
                (0..n).map(|j| sigmas[pi][j] + settings.alpha * (new_s[j] - sigmas[pi][j])).collect();
            next_x.push(cand);
            next_s.push(smoothed);
            next_from.push(Some((f[pi], phi[pi])));
        }
        xs = next_x;
        sigmas = next_s;
        mutated_from = next_from;
        gen += 1;
    }

    let best = archive[best.expect("at least one evaluation")].clone();
    Ok(IsresResult {
        best,
        evaluations: archive.len(),
        archive,
        trace,
        generations: gen + 1,
        converged,
        cache_hits: cache.hits,
    })
}

/// Best feasible objective improved by less than `tol` (relative) over the
/// last `window` generations.
fn plateau(trace: &[IsresTracePoint], sense: super::Sense, window: usize, tol: f64) -> bool {
    if window == 0 || trace.len() <= window {
        return false;
    }
    let now = trace[trace.len() - 1].best_objective;
    let then = trace[trace.len() - 1 - window].best_objective;
    if !(now.is_finite() && then.is_finite()) {
        return false;
    }
    let gain = sense.to_min(then) - sense.to_min(now);
    gain <= tol * then.abs().max(f64::MIN_POSITIVE)
}
