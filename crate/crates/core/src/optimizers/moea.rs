//! Steady-state EA with hypervolume-contribution survivor selection
//! (SMS-EMOA scheme) for bi-objective problems.
//!
//! One offspring replaces one survivor per step. Offspring are produced in
//! small fixed-size batches from the population as it stood at the start of
//! the batch; the batch is evaluated in parallel and then merged in index
//! order, so a fixed seed gives the same archive on any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cache::EvalCache;
use super::hypervolume::{contributions_2d, hypervolume, nondominated_ranks};
use super::problem::{ArchiveEntry, Problem};
use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoeaSettings {
    pub pop_size: usize,
    /// Total number of offspring, initial population included.
    pub budget: usize,
    /// Offspring created from one population snapshot.
    pub batch: usize,
    pub crossover_prob: f64,
    pub eta_crossover: f64,
    /// Per-variable mutation probability; `None` means 1/n.
    pub mutation_prob: Option<f64>,
    pub eta_mutation: f64,
    /// Plateau detection: stop when the hypervolume grows by less than
    /// `stall_tol` (relative) over `stall_generations` generations.
    pub stall_generations: usize,
    pub stall_tol: f64,
    /// Hypervolume reference point in natural units. When absent it is
    /// fixed from the first feasible population.
    pub reference: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for MoeaSettings {
    fn default() -> Self {
        MoeaSettings {
            pop_size: 200,
            budget: 30_000,
            batch: 10,
            crossover_prob: 0.9,
            eta_crossover: 15.0,
            mutation_prob: None,
            eta_mutation: 20.0,
            stall_generations: 20,
            stall_tol: 1e-3,
            reference: None,
            seed: 1,
        }
    }
}

impl MoeaSettings {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 || self.batch == 0 || self.budget < self.pop_size {
            return domain("moea needs pop_size >= 2, batch >= 1 and budget >= pop_size");
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) || self.eta_crossover < 0.0 || self.eta_mutation < 0.0 {
            return domain("moea variation parameters out of range");
        }
        if self.mutation_prob.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
            return domain("mutation probability must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvPoint {
    pub gen: usize,
    pub evaluations: usize,
    /// Zero until a feasible front and the reference point exist.
    pub hypervolume: f64,
    pub feasible_in_population: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoeaResult {
    /// Every evaluated individual, in evaluation order.
    pub archive: Vec<ArchiveEntry>,
    /// Archive indices of the final population.
    pub population: Vec<usize>,
    pub trace: Vec<HvPoint>,
    /// Reference point on the minimised scale.
    pub reference: Option<Vec<f64>>,
    pub evaluations: usize,
    pub generations: usize,
    pub converged: bool,
    pub cache_hits: usize,
}

impl MoeaResult {
    /// Archive indices of the feasible non-dominated members of the final
    /// population.
    pub fn front(&self, problem: &Problem) -> Vec<usize> {
        let feas: Vec<usize> = self.population.iter().copied().filter(|&i| self.archive[i].outcome.feasible).collect();
        let pts: Vec<Vec<f64>> = feas.iter().map(|&i| problem.minimised(&self.archive[i].outcome)).collect();
        let ranks = nondominated_ranks(&pts);
        feas.into_iter().zip(ranks).filter(|(_, r)| *r == 0).map(|(i, _)| i).collect()
    }
}

struct Member {
    f: Vec<f64>,
    viol: f64,
    archive: usize,
    x: Vec<f64>,
}

/// Rank under feasibility-first dominance: feasible fronts first, then one
/// rank per distinct violation level.
fn population_ranks(pop: &[Member]) -> Vec<usize> {
    let feas: Vec<usize> = (0..pop.len()).filter(|&i| pop[i].viol == 0.0).collect();
    let pts: Vec<Vec<f64>> = feas.iter().map(|&i| pop[i].f.clone()).collect();
    let fr = nondominated_ranks(&pts);
    let mut rank = vec![0usize; pop.len()];
    let base = fr.iter().copied().max().map_or(0, |m| m + 1);
    for (k, &i) in feas.iter().enumerate() {
        rank[i] = fr[k];
    }
    let mut infeas: Vec<usize> = (0..pop.len()).filter(|&i| pop[i].viol > 0.0).collect();
    infeas.sort_by(|&a, &b| pop[a].viol.total_cmp(&pop[b].viol));
    let mut level = base;
    for (k, &i) in infeas.iter().enumerate() {
        if k > 0 && pop[i].viol > pop[infeas[k - 1]].viol {
            level += 1;
        }
        rank[i] = level;
    }
    rank
}

fn select_victim(pop: &[Member]) -> usize {
    let worst_infeasible = (0..pop.len())
        .filter(|&i| pop[i].viol > 0.0)
        .max_by(|&a, &b| pop[a].viol.total_cmp(&pop[b].viol).then(a.cmp(&b)));
    if let Some(i) = worst_infeasible {
        return i;
    }
    let pts: Vec<Vec<f64>> = pop.iter().map(|m| m.f.clone()).collect();
    let ranks = nondominated_ranks(&pts);
    let worst = *ranks.iter().max().unwrap_or(&0);
    let front: Vec<usize> = (0..pop.len()).filter(|&i| ranks[i] == worst).collect();
    if front.len() == 1 {
        return front[0];
    }
    let fpts: Vec<Vec<f64>> = front.iter().map(|&i| pts[i].clone()).collect();
    let c = contributions_2d(&fpts);
    let k = (0..front.len()).min_by(|&a, &b| c[a].total_cmp(&c[b]).then(b.cmp(&a))).unwrap_or(0);
    front[k]
}

/// Simulated binary crossover (bounded form), first child only.
pub(crate) fn sbx<R: Rng>(rng: &mut R, a: &[f64], b: &[f64], lo: &[f64], hi: &[f64], eta: f64, prob: f64) -> Vec<f64> {
    let mut c = a.to_vec();
    if rng.random::<f64>() > prob {
        return c;
    }
    for i in 0..a.len() {
        if rng.random::<f64>() > 0.5 || (a[i] - b[i]).abs() < 1e-14 || hi[i] <= lo[i] {
            continue;
        }
        let (y1, y2) = if a[i] < b[i] { (a[i], b[i]) } else { (b[i], a[i]) };
        let u: f64 = rng.random();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let bq1 = spread(1.0 + 2.0 * (y1 - lo[i]) / (y2 - y1));
        let bq2 = spread(1.0 + 2.0 * (hi[i] - y2) / (y2 - y1));
        let c1 = (0.5 * ((y1 + y2) - bq1 * (y2 - y1))).clamp(lo[i], hi[i]);
        let c2 = (0.5 * ((y1 + y2) + bq2 * (y2 - y1))).clamp(lo[i], hi[i]);
        c[i] = if rng.random::<f64>() < 0.5 { c1 } else { c2 };
    }
    c
}

/// Bounded polynomial mutation.
pub(crate) fn polynomial_mutation<R: Rng>(rng: &mut R, x: &mut [f64], lo: &[f64], hi: &[f64], eta: f64, prob: f64) {
    for i in 0..x.len() {
        if rng.random::<f64>() >= prob || hi[i] <= lo[i] {
            continue;
        }
        let span = hi[i] - lo[i];
        let (d1, d2) = ((x[i] - lo[i]) / span, (hi[i] - x[i]) / span);
        let r: f64 = rng.random();
        let p = 1.0 / (eta + 1.0);
        let dq = if r < 0.5 {
            let v = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1).powf(eta + 1.0);
            v.powf(p) - 1.0
        } else {
            let v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(p)
        };
        x[i] = (x[i] + dq * span).clamp(lo[i], hi[i]);
    }
}

fn random_point<R: Rng>(rng: &mut R, p: &Problem) -> Vec<f64> {
    p.lower.iter().zip(&p.upper).map(|(&l, &u)| if u > l { rng.random_range(l..=u) } else { l }).collect()
}

pub fn moea_optimize(problem: &Problem, settings: &MoeaSettings) -> Result<MoeaResult> {
    settings.validate()?;
    if problem.n_objectives() != 2 {
        return domain("moea_optimize handles exactly two objectives");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut cache = EvalCache::new();
    let pm = settings.mutation_prob.unwrap_or(1.0 / problem.dim() as f64);
    let mut reference: Option<Vec<f64>> =
        settings.reference.as_ref().map(|r| r.iter().zip(&problem.senses).map(|(&v, s)| s.to_min(v)).collect());

    let mut archive: Vec<ArchiveEntry> = Vec::with_capacity(settings.budget);
    let mut pop: Vec<Member> = Vec::with_capacity(settings.pop_size + settings.batch);

    let init: Vec<Vec<f64>> =
        (0..settings.pop_size).map(|_| problem.repair(&random_point(&mut rng, problem))).collect();
    let outs = cache.evaluate_batch(problem, &init);
    for (x, o) in init.into_iter().zip(outs) {
        pop.push(Member {
            f: problem.minimised(&o),
            viol: o.ranking_violation(),
            archive: archive.len(),
            x: x.clone(),
        });
        archive.push(ArchiveEntry { gen: 0, eval_id: archive.len(), x, outcome: o });
    }

    let mut trace = Vec::new();
    let mut gen = 0;
    let mut converged = false;
    let close_generation = |pop: &[Member], reference: &mut Option<Vec<f64>>, gen: usize, evals: usize| {
        let feas: Vec<Vec<f64>> =
            pop.iter().filter(|m| m.viol == 0.0 && m.f.iter().all(|v| v.is_finite())).map(|m| m.f.clone()).collect();
        if reference.is_none() && !feas.is_empty() {
            *reference = Some(default_reference(&feas));
        }
        let hv = reference.as_ref().map_or(0.0, |r| hypervolume(&feas, r));
        HvPoint { gen, evaluations: evals, hypervolume: hv, feasible_in_population: feas.len() }
    };
    trace.push(close_generation(&pop, &mut reference, 0, archive.len()));

    let mut produced = 0;
    gen += 1;
    while archive.len() < settings.budget {
        let b = settings.batch.min(settings.pop_size - produced).min(settings.budget - archive.len());
        let ranks = population_ranks(&pop);
        let tournament = |rng: &mut ChaCha8Rng| {
            let (i, j) = (rng.random_range(0..pop.len()), rng.random_range(0..pop.len()));
            if ranks[j] < ranks[i] {
                j
            } else {
                i
            }
        };
        let mut children = Vec::with_capacity(b);
        for _ in 0..b {
            let (pa, pb) = (tournament(&mut rng), tournament(&mut rng));
            let mut c = sbx(
                &mut rng,
                &pop[pa].x,
                &pop[pb].x,
                &problem.lower,
                &problem.upper,
                settings.eta_crossover,
                settings.crossover_prob,
            );
            polynomial_mutation(&mut rng, &mut c, &problem.lower, &problem.upper, settings.eta_mutation, pm);
            children.push(problem.repair(&c));
        }
        let outs = cache.evaluate_batch(problem, &children);
        for (x, o) in children.into_iter().zip(outs) {
            pop.push(Member {
                f: problem.minimised(&o),
                viol: o.ranking_violation(),
                archive: archive.len(),
                x: x.clone(),
            });
            archive.push(ArchiveEntry { gen, eval_id: archive.len(), x, outcome: o });
            let v = select_victim(&pop);
            pop.swap_remove(v);
        }
        produced += b;
        let last = archive.len() >= settings.budget;
        if produced == settings.pop_size || last {
            trace.push(close_generation(&pop, &mut reference, gen, archive.len()));
            if stalled(&trace, settings.stall_generations, settings.stall_tol) {
                converged = true;
                break;
            }
            produced = 0;
            if !last {
                gen += 1;
            }
        }
    }

    // Keep the population listing in archive order for stable output.
    let mut population: Vec<usize> = pop.iter().map(|m| m.archive).collect();
    population.sort_unstable();
    Ok(MoeaResult {
        evaluations: archive.len(),
        archive,
        population,
        trace,
        reference,
        generations: gen,
        converged,
        cache_hits: cache.hits,
    })
}

/// Worst feasible value per objective pushed out by a tenth of the range.
fn default_reference(front: &[Vec<f64>]) -> Vec<f64> {
    let m = front[0].len();
    (0..m)
        .map(|j| {
            let hi = front.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max);
            let lo = front.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
            let pad = if hi > lo { 0.1 * (hi - lo) } else { 0.1 * hi.abs().max(1.0) };
            hi + pad
        })
        .collect()
}

fn stalled(trace: &[HvPoint], window: usize, tol: f64) -> bool {
    if window == 0 || trace.len() <= window {
        return false;
    }
    let now = trace[trace.len() - 1].hypervolume;
    let then = trace[trace.len() - 1 - window].hypervolume;
    then > 0.0 && now - then <= tol * then
}
