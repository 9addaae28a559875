//! Classic RIME: soft-rime search followed by hard-rime puncture.

use crate::optimizer::{
    evolve, Bounds, Objective, OptimizerError, Population, Propose, RandomSource, RunConfig,
    RunObserver, RunResult, RunRng, ScheduleState,
};

/// Soft-rime move of a single coordinate around the best agent.
pub(crate) fn soft_rime_coordinate<R: RandomSource + ?Sized>(
    best: f64,
    lower: f64,
    upper: f64,
    sched: &ScheduleState,
    rng: &mut R,
) -> f64 {
    let r1 = rng.symmetric();
    let h = rng.uniform();
    best + r1 * sched.theta.cos() * sched.beta * (h * (upper - lower) + lower)
}

/// Soft-rime search. Each coordinate of every proposal moves with
/// probability `E`; the rest keep their current value.
pub fn soft_rime_step<R: RandomSource + ?Sized>(
    pop: &Population,
    sched: &ScheduleState,
    bounds: &Bounds,
    rng: &mut R,
    proposals: &mut [Vec<f64>],
) {
    let best = &pop.best().position;
    for proposal in proposals.iter_mut() {
        for (j, x) in proposal.iter_mut().enumerate() {
            let r2 = rng.uniform();
            if r2 <= sched.e {
                *x =
                    soft_rime_coordinate(best[j], bounds.lower()[j], bounds.upper()[j], sched, rng);
            }
        }
    }
}

/// Hard-rime puncture: coordinate `j` of agent `i` is overwritten by the
/// best agent's coordinate with probability `fnorm[i]`.
pub fn hard_rime_step<R: RandomSource + ?Sized>(
    pop: &Population,
    fnorm: &[f64],
    rng: &mut R,
    proposals: &mut [Vec<f64>],
) {
    let best = &pop.best().position;
    for (proposal, &f) in proposals.iter_mut().zip(fnorm) {
        for (x, &b) in proposal.iter_mut().zip(best) {
            if rng.uniform() < f {
                *x = b;
            }
        }
    }
}

struct Rime;

impl Propose for Rime {
    fn propose(
        &mut self,
        pop: &Population,
        sched: &ScheduleState,
        fnorm: &[f64],
        bounds: &Bounds,
        rng: &mut RunRng,
        proposals: &mut [Vec<f64>],
    ) {
        soft_rime_step(pop, sched, bounds, rng, proposals);
        hard_rime_step(pop, fnorm, rng, proposals);
    }
}

pub fn rime_run<O: Objective + ?Sized>(
    objective: &O,
    bounds: &Bounds,
    cfg: &RunConfig,
) -> Result<RunResult, OptimizerError> {
    rime_run_observed(objective, bounds, cfg, &mut ())
}

pub fn rime_run_observed<O, W>(
    objective: &O,
    bounds: &Bounds,
    cfg: &RunConfig,
    observer: &mut W,
) -> Result<RunResult, OptimizerError>
where
    O: Objective + ?Sized,
    W: RunObserver + ?Sized,
{
    evolve(objective, bounds, cfg, &mut Rime, observer)
}
