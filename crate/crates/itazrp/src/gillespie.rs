//! Continuous-time Monte Carlo simulation at fixed numeric rates.
//!
//! Direct-method simulation: every step enumerates all `(site, split)`
//! events of the current configuration, draws an exponential holding time
//! from the total rate and one event proportionally to its rate. The
//! empirical stationary distribution is the holding-time average after a
//! burn-in, which estimates the continuous-time stationary law without
//! jump-chain reweighting.
//!
//! RNG: `ChaCha12Rng` seeded via `seed_from_u64`, a named, portable,
//! splittable (per-stream) generator; uniforms come from the top 53 bits
//! and the exponential uses the inverse CDF. Trajectories are strictly
//! sequential, so a given seed reproduces bit-identical output. Independent
//! replicas with different seeds can run in parallel and be merged.

use std::collections::BTreeMap;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::markov::transitions;
use crate::states::{Configuration, Sector, StateError};

#[derive(Debug, Clone, Error)]
pub enum SimError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("rate vector has length {0}, expected {1}")]
    BadRates(usize, usize),
    #[error("all rates must be positive, w{0} is not")]
    NonPositiveRate(usize),
    #[error("events ({events}) must exceed burn_in ({burn_in})")]
    BadEventBudget { events: u64, burn_in: u64 },
    #[error("initial configuration is outside the sector")]
    BadInitialState,
}

/// Simulation parameters. `events` counts all jumps including the
/// `burn_in` prefix that is discarded.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub sector: Sector,
    pub w: Vec<f64>,
    pub seed: u64,
    pub events: u64,
    pub burn_in: u64,
}

impl SimConfig {
    fn validate(&self) -> Result<(), SimError> {
        if self.w.len() != self.sector.species() {
            return Err(SimError::BadRates(self.w.len(), self.sector.species()));
        }
        if let Some(i) = self.w.iter().position(|&x| x <= 0.0 || x.is_nan()) {
            return Err(SimError::NonPositiveRate(i + 1));
        }
        if self.events <= self.burn_in {
            return Err(SimError::BadEventBudget { events: self.events, burn_in: self.burn_in });
        }
        Ok(())
    }
}

/// Holding-time-weighted occupancy over configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    weights: BTreeMap<Configuration, f64>,
    total_time: f64,
}

impl EmpiricalDistribution {
    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn weights(&self) -> &BTreeMap<Configuration, f64> {
        &self.weights
    }

    /// Time fraction spent in each visited configuration.
    pub fn time_fractions(&self) -> BTreeMap<Configuration, f64> {
        self.weights
            .iter()
            .map(|(c, &t)| (c.clone(), t / self.total_time))
            .collect()
    }

    /// Merge an independent replica by adding weights and total time.
    pub fn merge(&mut self, other: &EmpiricalDistribution) {
        for (c, t) in &other.weights {
            *self.weights.entry(c.clone()).or_insert(0.0) += t;
        }
        self.total_time += other.total_time;
    }

    /// Total variation distance to an exact distribution on the sector.
    pub fn total_variation(&self, exact: &BTreeMap<Configuration, f64>) -> f64 {
        let fractions = self.time_fractions();
        let mut acc = 0.0;
        for (c, q) in exact {
            let p = fractions.get(c).copied().unwrap_or(0.0);
            acc += (p - q).abs();
        }
        for (c, p) in &fractions {
            if !exact.contains_key(c) {
                acc += p.abs();
            }
        }
        acc / 2.0
    }
}

/// Uniform in `(0, 1]` from the top 53 bits; never zero, so `ln` is safe.
fn uniform_unit(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One jump: samples the holding time of `state` and the event to apply.
///
/// The total exit rate equals the rate-vector evaluation of the sum of
/// per-site exit rates, which is positive in any basic sector.
pub fn step(
    state: &Configuration,
    w: &[f64],
    rng: &mut ChaCha12Rng,
) -> (Configuration, f64) {
    let events = transitions(state);
    let rates: Vec<f64> = events.iter().map(|t| w[t.rate_species - 1]).collect();
    let total: f64 = rates.iter().sum();
    assert!(total > 0.0, "a basic sector always has at least one event");
    let holding = -uniform_unit(rng).ln() / total;
    let mut pick = uniform_unit(rng) * total;
    let mut chosen = events.len() - 1;
    for (i, r) in rates.iter().enumerate() {
        if pick <= *r {
            chosen = i;
            break;
        }
        pick -= r;
    }
    (events[chosen].target.clone(), holding)
}

/// Run one trajectory from the canonical initial configuration (the first
/// one in enumeration order). Deterministic given the seed.
pub fn run(cfg: &SimConfig) -> Result<EmpiricalDistribution, SimError> {
    cfg.validate()?;
    let initial = cfg
        .sector
        .enumerate_configurations()
        .into_iter()
        .next()
        .ok_or(SimError::BadInitialState)?;
    run_from(cfg, initial)
}

/// Run one trajectory from an explicit initial configuration.
pub fn run_from(
    cfg: &SimConfig,
    initial: Configuration,
) -> Result<EmpiricalDistribution, SimError> {
    cfg.validate()?;
    if !cfg.sector.contains(&initial) {
        return Err(SimError::BadInitialState);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut state = initial;
    let mut weights: BTreeMap<Configuration, f64> = BTreeMap::new();
    let mut total_time = 0.0;
    for event in 0..cfg.events {
        let (next, holding) = step(&state, &cfg.w, &mut rng);
        if event >= cfg.burn_in {
            *weights.entry(state).or_insert(0.0) += holding;
            total_time += holding;
        }
        state = next;
    }
    Ok(EmpiricalDistribution { weights, total_time })
}
