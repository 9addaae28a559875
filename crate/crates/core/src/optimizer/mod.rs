//! Machinery shared by the RIME-family optimizers: bounded populations,
//! iteration schedules, fitness normalization, boundary repair, greedy
//! selection and the generation loop itself.

mod rng;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rng::{derive_seed, distinct_pair, RandomSource, RunRng};

#[cfg(test)]
pub(crate) use rng::testing;

/// Fitness assigned to points the objective cannot evaluate.
pub const WORST_FITNESS: f64 = f64::MAX;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("bound {index}: lower {lower} is greater than upper {upper}")]
    InvertedBound {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("bound {index} is not finite")]
    NonFiniteBound { index: usize },
    #[error("lower and upper bound vectors differ in length ({lower} vs {upper})")]
    BoundLength { lower: usize, upper: usize },
    #[error("objective has dimension {objective} but bounds have dimension {bounds}")]
    DimensionMismatch { objective: usize, bounds: usize },
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown optimizer `{0}` (expected `rime` or `terime`)")]
    UnknownOptimizer(String),
}

/// Minimization target.
pub trait Objective: Sync {
    fn dimension(&self) -> usize;

    /// Objective value at `x`. Must return a finite number; use
    /// [`WORST_FITNESS`] for points that cannot be evaluated.
    fn evaluate(&self, x: &[f64]) -> f64;
}

/// Wraps a closure as an [`Objective`].
pub struct FnObjective<F> {
    dimension: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        let v = (self.f)(x);
        if v.is_finite() {
            v
        } else {
            WORST_FITNESS
        }
    }
}

/// Per-dimension box constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, OptimizerError> {
        if lower.len() != upper.len() {
            return Err(OptimizerError::BoundLength {
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        for (index, (&lb, &ub)) in lower.iter().zip(&upper).enumerate() {
            if !lb.is_finite() || !ub.is_finite() {
                return Err(OptimizerError::NonFiniteBound { index });
            }
            if lb > ub {
                return Err(OptimizerError::InvertedBound {
                    index,
                    lower: lb,
                    upper: ub,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, OptimizerError> {
        let (lower, upper) = pairs.iter().copied().unzip();
        Self::new(lower, upper)
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lb, &ub))| v >= lb && v <= ub)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub position: Vec<f64>,
    pub fitness: f64,
}

#[derive(Debug, Clone)]
pub struct Population {
    agents: Vec<Agent>,
    best_index: usize,
    evaluations_used: u64,
}

impl Population {
    /// Builds a population from already evaluated agents.
    pub fn from_agents(agents: Vec<Agent>, evaluations_used: u64) -> Self {
        assert!(!agents.is_empty(), "population must not be empty");
        let mut pop = Self {
            agents,
            best_index: 0,
            evaluations_used,
        };
        pop.refresh_best();
        pop
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn best(&self) -> &Agent {
        &self.agents[self.best_index]
    }

    pub fn best_index(&self) -> usize {
        self.best_index
    }

    pub fn evaluations_used(&self) -> u64 {
        self.evaluations_used
    }

    pub fn fitness(&self) -> impl Iterator<Item = f64> + '_ {
        self.agents.iter().map(|a| a.fitness)
    }

    // Lowest index wins ties.
    fn refresh_best(&mut self) {
        let mut best = 0;
        for (i, a) in self.agents.iter().enumerate().skip(1) {
            if a.fitness < self.agents[best].fitness {
                best = i;
            }
        }
        self.best_index = best;
    }
}

/// Settings of a single optimizer run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub population: usize,
    /// Number of generations after initialization (`T_max`).
    pub generations: usize,
    pub seed: u64,
    /// Relative spread of the Gaussian exploitation move.
    pub sigma: f64,
    /// Number of steps of the soft-rime amplitude staircase.
    pub w_steps: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            population: 20,
            generations: 100_000,
            seed: 0,
            sigma: 0.001,
            w_steps: 5,
        }
    }
}

impl RunConfig {
    /// Configuration whose total scalar objective evaluations,
    /// `N * (T_max + 1)`, does not exceed `max_evaluations`.
    pub fn from_evaluation_budget(population: usize, max_evaluations: u64, seed: u64) -> Self {
        let generations = (max_evaluations / population.max(1) as u64).saturating_sub(1) as usize;
        Self {
            population,
            generations,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.population < 4 {
            return Err(OptimizerError::InvalidConfig(format!(
                "population must be at least 4, got {}",
                self.population
            )));
        }
        if self.w_steps == 0 {
            return Err(OptimizerError::InvalidConfig(
                "w_steps must be at least 1".into(),
            ));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(OptimizerError::InvalidConfig(format!(
                "sigma must be a non-negative number, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Scalar objective evaluations a complete run performs.
    pub fn total_evaluations(&self) -> u64 {
        self.population as u64 * (self.generations as u64 + 1)
    }
}

/// Iteration-dependent coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleState {
    /// Soft-rime angle, `pi t / (10 T_max)`.
    pub theta: f64,
    /// Soft-rime staircase amplitude.
    pub beta: f64,
    /// Soft-rime condensation probability, `sqrt(t / T_max)`.
    pub e: f64,
    /// Crossover factor.
    pub c: f64,
}

pub fn schedule(t: usize, t_max: usize, w: u32) -> ScheduleState {
    assert!(t_max >= 1, "schedule needs T_max >= 1");
    let frac = t as f64 / t_max as f64;
    let w = w as f64;
    ScheduleState {
        theta: PI * frac / 10.0,
        // f64::round rounds half away from zero.
        beta: 1.0 - (w * frac).round() / w,
        e: frac.sqrt(),
        c: ((PI * frac).cos() + 1.0) * (1.0 - frac / 2.0),
    }
}

/// Min-max normalized fitness; the best agent maps to 0, the worst to 1.
pub fn normalize_fitness(pop: &Population) -> Vec<f64> {
    let (min, max) = pop
        .fitness()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| {
            (lo.min(f), hi.max(f))
        });
    let range = max - min;
    if range > 0.0 && range.is_finite() {
        pop.fitness().map(|f| (f - min) / range).collect()
    } else if range > 0.0 {
        // Only reachable with infinite fitness; keep the result in [0, 1].
        pop.fitness()
            .map(|f| if f == min { 0.0 } else { 1.0 })
            .collect()
    } else {
        vec![0.5; pop.len()]
    }
}

/// Redraws every out-of-bounds coordinate uniformly inside its interval.
/// In-bounds coordinates are left untouched.
pub fn boundary_repair<R: RandomSource + ?Sized>(
    position: &mut [f64],
    bounds: &Bounds,
    rng: &mut R,
) {
    for ((x, &lb), &ub) in position.iter_mut().zip(bounds.lower()).zip(bounds.upper()) {
        if !(*x >= lb && *x <= ub) {
            let gamma = rng.uniform();
            *x = (ub + lb) / 2.0 + (ub - lb) / 2.0 * (2.0 * gamma - 1.0);
        }
    }
}

/// Candidate replaces the incumbent only on strict improvement.
pub fn greedy_select(old: Agent, candidate: Agent) -> Agent {
    if candidate.fitness < old.fitness {
        candidate
    } else {
        old
    }
}

/// Uniform random population inside `bounds`, fully evaluated.
pub fn init_population<O, R>(objective: &O, bounds: &Bounds, n: usize, rng: &mut R) -> Population
where
    O: Objective + ?Sized,
    R: RandomSource + ?Sized,
{
    let agents = (0..n)
        .map(|_| {
            let position: Vec<f64> = bounds
                .lower()
                .iter()
                .zip(bounds.upper())
                .map(|(&lb, &ub)| lb + rng.uniform() * (ub - lb))
                .collect();
            let fitness = objective.evaluate(&position);
            Agent { position, fitness }
        })
        .collect();
    Population::from_agents(agents, n as u64)
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness after initialization (index 0) and after each generation.
    pub trace: Vec<f64>,
    pub evaluations: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Receives the population after initialization (generation 0) and after
/// each generation's selection step.
pub trait RunObserver {
    fn observe(&mut self, generation: usize, pop: &Population);
}

impl RunObserver for () {
    fn observe(&mut self, _: usize, _: &Population) {}
}

impl<F: FnMut(usize, &Population)> RunObserver for F {
    fn observe(&mut self, generation: usize, pop: &Population) {
        self(generation, pop)
    }
}

/// Proposal stage of one generation. Writes candidate positions into
/// `proposals`, which arrive holding a copy of the current positions.
pub(crate) trait Propose {
    fn propose(
        &mut self,
        pop: &Population,
        sched: &ScheduleState,
        fnorm: &[f64],
        bounds: &Bounds,
        rng: &mut RunRng,
        proposals: &mut [Vec<f64>],
    );
}

/// Generation loop common to RIME and TERIME: schedule, propose, repair,
/// batch evaluate, greedy select.
pub(crate) fn evolve<O, P, W>(
    objective: &O,
    bounds: &Bounds,
    cfg: &RunConfig,
    proposer: &mut P,
    observer: &mut W,
) -> Result<RunResult, OptimizerError>
where
    O: Objective + ?Sized,
    P: Propose,
    W: RunObserver + ?Sized,
{
    cfg.validate()?;
    if objective.dimension() != bounds.dimension() {
        return Err(OptimizerError::DimensionMismatch {
            objective: objective.dimension(),
            bounds: bounds.dimension(),
        });
    }
    let started = Instant::now();
    let mut rng = RunRng::new(cfg.seed);
    let mut pop = init_population(objective, bounds, cfg.population, &mut rng);
    let mut trace = Vec::with_capacity(cfg.generations + 1);
    trace.push(pop.best().fitness);
    observer.observe(0, &pop);

    let mut proposals: Vec<Vec<f64>> = pop.agents.iter().map(|a| a.position.clone()).collect();
    for t in 1..=cfg.generations {
        let sched = schedule(t, cfg.generations, cfg.w_steps);
        let fnorm = normalize_fitness(&pop);
        for (p, a) in proposals.iter_mut().zip(&pop.agents) {
            p.copy_from_slice(&a.position);
        }
        proposer.propose(&pop, &sched, &fnorm, bounds, &mut rng, &mut proposals);
        for p in proposals.iter_mut() {
            boundary_repair(p, bounds, &mut rng);
        }
        for (agent, p) in pop.agents.iter_mut().zip(&proposals) {
            let fitness = objective.evaluate(p);
            if fitness < agent.fitness {
                agent.position.copy_from_slice(p);
                agent.fitness = fitness;
            }
        }
        pop.evaluations_used += cfg.population as u64;
        pop.refresh_best();
        trace.push(pop.best().fitness);
        observer.observe(t, &pop);
    }

    let best = pop.best();
    Ok(RunResult {
        seed: cfg.seed,
        best_position: best.position.clone(),
        best_fitness: best.fitness,
        trace,
        evaluations: pop.evaluations_used,
        wall_time: started.elapsed(),
    })
}
