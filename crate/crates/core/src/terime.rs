//! TERIME: RIME with a DE/rand/1 branch in exploration and a crossover plus
//! Gaussian-neighborhood exploitation replacing the hard-rime puncture.
//!
//! One generation:
//!
//! 1. update `theta`, `beta`, `E`, `C` from the iteration counter;
//! 2. exploration: per agent, with probability 1/2 a whole-vector
//!    DE/rand/1 move `x_i + phi (x_a - x_b)`, otherwise the soft-rime move
//!    applied coordinate-wise with probability `E`;
//! 3. exploitation: per agent, with probability `F_norm(x_i)` either a
//!    Gaussian resample around the best agent (`N(x_best, sigma |x_best|)`)
//!    or a crossover `x_i + C (x_c - x_d)`, each with probability 1/2;
//! 4. redraw out-of-bounds coordinates, evaluate the batch and keep
//!    improvements.
//!
//! Random partners `a, b` and `c, d` are drawn from the population as it
//! stood at the start of the generation, distinct from each other and from
//! `i`. Both phases read the start-of-generation best agent.

use crate::optimizer::{
    distinct_pair, evolve, Bounds, Objective, OptimizerError, Population, Propose, RandomSource,
    RunConfig, RunObserver, RunResult, RunRng, ScheduleState,
};
use crate::rime::soft_rime_coordinate;

/// Probability of the DE/rand/1 branch in exploration.
const DE_PROBABILITY: f64 = 0.5;
/// Probability of the Gaussian (vs. crossover) branch in exploitation.
const GAUSSIAN_PROBABILITY: f64 = 0.5;

/// Which exploitation move an agent received.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExploitMove {
    Gaussian,
    Crossover,
    Keep,
}

/// Exploration phase. Returns, per agent, whether the DE branch was taken.
pub fn explore_step<R: RandomSource + ?Sized>(
    pop: &Population,
    sched: &ScheduleState,
    bounds: &Bounds,
    rng: &mut R,
    proposals: &mut [Vec<f64>],
) -> Vec<bool> {
    let agents = pop.agents();
    let best = &pop.best().position;
    let n = agents.len();
    let mut took_de = Vec::with_capacity(n);
    for (i, proposal) in proposals.iter_mut().enumerate() {
        let r4 = rng.uniform();
        if r4 < DE_PROBABILITY {
            let (a, b) = distinct_pair(rng, n, i);
            let phi = rng.uniform();
            let (xa, xb) = (&agents[a].position, &agents[b].position);
            for (j, x) in proposal.iter_mut().enumerate() {
                *x = agents[i].position[j] + phi * (xa[j] - xb[j]);
            }
            took_de.push(true);
        } else {
            for (j, x) in proposal.iter_mut().enumerate() {
                let r2 = rng.uniform();
                if r2 < sched.e {
                    *x = soft_rime_coordinate(
                        best[j],
                        bounds.lower()[j],
                        bounds.upper()[j],
                        sched,
                        rng,
                    );
                }
            }
            took_de.push(false);
        }
    }
    took_de
}

/// Exploitation phase, applied on top of the exploration proposals.
/// Returns the move each agent received.
pub fn exploit_step<R: RandomSource + ?Sized>(
    pop: &Population,
    sched: &ScheduleState,
    fnorm: &[f64],
    sigma: f64,
    rng: &mut R,
    proposals: &mut [Vec<f64>],
) -> Vec<ExploitMove> {
    let agents = pop.agents();
    let best = &pop.best().position;
    let n = agents.len();
    let mut moves = Vec::with_capacity(n);
    for (i, proposal) in proposals.iter_mut().enumerate() {
        let r3 = rng.uniform();
        let r5 = rng.uniform();
        if r3 >= fnorm[i] {
            moves.push(ExploitMove::Keep);
        } else if r5 < GAUSSIAN_PROBABILITY {
            for (x, &b) in proposal.iter_mut().zip(best) {
                *x = b + sigma * b.abs() * rng.standard_normal();
            }
            moves.push(ExploitMove::Gaussian);
        } else {
            let (c, d) = distinct_pair(rng, n, i);
            let (xc, xd) = (&agents[c].position, &agents[d].position);
            for (j, x) in proposal.iter_mut().enumerate() {
                *x += sched.c * (xc[j] - xd[j]);
            }
            moves.push(ExploitMove::Crossover);
        }
    }
    moves
}

struct Terime {
    sigma: f64,
}

impl Propose for Terime {
    fn propose(
        &mut self,
        pop: &Population,
        sched: &ScheduleState,
        fnorm: &[f64],
        bounds: &Bounds,
        rng: &mut RunRng,
        proposals: &mut [Vec<f64>],
    ) {
        explore_step(pop, sched, bounds, rng, proposals);
        exploit_step(pop, sched, fnorm, self.sigma, rng, proposals);
    }
}

pub fn terime_run<O: Objective + ?Sized>(
    objective: &O,
    bounds: &Bounds,
    cfg: &RunConfig,
) -> Result<RunResult, OptimizerError> {
    terime_run_observed(objective, bounds, cfg, &mut ())
}

pub fn terime_run_observed<O, W>(
    objective: &O,
    bounds: &Bounds,
    cfg: &RunConfig,
    observer: &mut W,
) -> Result<RunResult, OptimizerError>
where
    O: Objective + ?Sized,
    W: RunObserver + ?Sized,
{
    evolve(
        objective,
        bounds,
        cfg,
        &mut Terime { sigma: cfg.sigma },
        observer,
    )
}
