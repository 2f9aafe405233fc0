//! Seeded Monte Carlo oracle for the jump chains.
//!
//! Replicates walk the conditioned (jump) chain, so every interior state is
//! a two-outcome draw. The uniform stream of a replicate is a pure function
//! of `(seed, replicate_index)` through a counter-based SplitMix64 layout,
//! which makes runs bit-identical across platforms and worker counts and
//! lets replicates run embarrassingly parallel.
//!
//! Generator constants (Steele, Lea & Flood's SplitMix64):
//! increment `0x9E3779B97F4A7C15`, mixing multipliers `0xBF58476D1CE4E5B9`
//! and `0x94D049BB133111EB` with shifts 30/27/31. A replicate's stream seed
//! is the mix of `seed + (replicate + 1) * increment`; draw `i` of the
//! stream is the mix of `stream_seed + (i + 1) * increment`. Uniforms take
//! the top 53 bits.

use rayon::prelude::*;
use thiserror::Error;

use crate::fitness::FitnessProfile;
use crate::star_exact::{self, ModelError, Process, StarChainSpec};

pub const SPLITMIX_INCREMENT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Hard cap on jump-chain steps per replicate; hitting it is a diagnostic,
/// not an expected outcome.
pub const STEP_CAP: u64 = 1_000_000_000;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("initial state {state} outside the {count}-state chain")]
    InvalidInitialState { state: usize, count: usize },
    #[error("replicate {replicate} exceeded the step cap of {cap} jumps")]
    StepCapExceeded { replicate: u64, cap: u64 },
    #[error("step() called on absorbing state {state}")]
    StepOnAbsorbing { state: usize },
}

#[inline]
fn splitmix_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based uniform stream: `draw(i)` is independent of call order.
#[derive(Debug, Clone, Copy)]
pub struct ReplicateStream {
    stream_seed: u64,
    counter: u64,
}

impl ReplicateStream {
    pub fn new(seed: u64, replicate: u64) -> Self {
        let stream_seed = splitmix_mix(
            seed.wrapping_add(replicate.wrapping_add(1).wrapping_mul(SPLITMIX_INCREMENT)),
        );
        ReplicateStream { stream_seed, counter: 0 }
    }

    /// Next uniform in [0, 1).
    pub fn next_uniform(&mut self) -> f64 {
        self.counter += 1;
        let bits = splitmix_mix(
            self.stream_seed.wrapping_add(self.counter.wrapping_mul(SPLITMIX_INCREMENT)),
        );
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Which jump chain to simulate.
#[derive(Debug, Clone)]
pub enum ChainTopology {
    /// The 2N-state star chain of [`StarChainSpec`].
    Star(StarChainSpec),
    /// The (N+1)-state complete-graph chain (states = mutant counts).
    Complete { process: Process, n: usize, profile: FitnessProfile },
}

impl ChainTopology {
    pub fn state_count(&self) -> usize {
        match self {
            ChainTopology::Star(spec) => spec.state_count(),
            ChainTopology::Complete { n, .. } => n + 1,
        }
    }
}

/// Precomputed two-outcome rows: `(threshold, low_target, high_target)`;
/// a uniform below the threshold jumps to the low target.
#[derive(Debug, Clone)]
pub struct JumpTable {
    rows: Vec<Option<(f64, usize, usize)>>,
    mutant_absorbing: usize,
}

impl JumpTable {
    pub fn new(chain: &ChainTopology) -> Result<Self, SimError> {
        match chain {
            ChainTopology::Star(spec) => {
                let matrix = star_exact::build_transition_matrix(spec)?;
                let dim = matrix.dimension();
                let mut rows = vec![None; dim];
                for (state, row) in rows.iter_mut().enumerate() {
                    if matrix.is_absorbing(state) {
                        continue;
                    }
                    let entries = matrix.row_entries(state);
                    *row = Some((entries[0].1, entries[0].0, entries[1].0));
                }
                Ok(JumpTable { rows, mutant_absorbing: dim - 1 })
            }
            ChainTopology::Complete { process, n, profile } => {
                profile.check_positivity(*n).map_err(ModelError::from)?;
                let nf = *n as f64;
                let mut rows = vec![None; n + 1];
                for (k, row) in rows.iter_mut().enumerate().take(*n).skip(1) {
                    let x = k as f64 / nf;
                    let phi1 = 1.0 + profile.birth_at(x) / nf;
                    let phi2 = 1.0 + profile.death_at(x) / nf;
                    let kf = k as f64;
                    // Down/up jump ratio; probabilities conditioned on moving.
                    let ratio = match process {
                        Process::Bd => {
                            phi2 * ((kf - 1.0) * phi2 + nf - kf)
                                / (phi1 * (kf * phi2 + nf - 1.0 - kf))
                        }
                        Process::Db => {
                            phi2 * (kf * phi1 + nf - 1.0 - kf)
                                / (phi1 * ((kf - 1.0) * phi1 + nf - kf))
                        }
                    };
                    let down = ratio / (1.0 + ratio);
                    *row = Some((down, k - 1, k + 1));
                }
                Ok(JumpTable { rows, mutant_absorbing: *n })
            }
        }
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        self.rows[state].is_none()
    }

    pub fn mutant_absorbing_state(&self) -> usize {
        self.mutant_absorbing
    }

    /// One conditioned jump driven by a single uniform draw.
    pub fn step(&self, state: usize, draw: f64) -> Result<usize, SimError> {
        match self.rows[state] {
            None => Err(SimError::StepOnAbsorbing { state }),
            Some((threshold, lo, hi)) => Ok(if draw < threshold { lo } else { hi }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub chain: ChainTopology,
    pub initial_state: usize,
    pub replicates: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimResult {
    pub estimate: f64,
    #[serde(rename = "se")]
    pub standard_error: f64,
    pub replicates: u64,
    pub seed: u64,
}

/// Outcome of a single replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Absorption {
    MutantFixed,
    ResidentFixed,
}

/// Runs one replicate to absorption; deterministic in
/// `(seed, replicate_index)`.
pub fn run_to_absorption(
    table: &JumpTable,
    initial_state: usize,
    seed: u64,
    replicate: u64,
) -> Result<Absorption, SimError> {
    let mut stream = ReplicateStream::new(seed, replicate);
    let mut state = initial_state;
    let mut steps: u64 = 0;
    while !table.is_absorbing(state) {
        state = table.step(state, stream.next_uniform())?;
        steps += 1;
        if steps > STEP_CAP {
            return Err(SimError::StepCapExceeded { replicate, cap: STEP_CAP });
        }
    }
    Ok(if state == table.mutant_absorbing_state() {
        Absorption::MutantFixed
    } else {
        Absorption::ResidentFixed
    })
}

/// Monte Carlo fixation estimate with binomial standard error. Replicates
/// are independent streams merged by an integer count, so the result is
/// bit-identical for any worker count.
pub fn estimate_fixation(config: &SimConfig) -> Result<SimResult, SimError> {
    assert!(config.replicates >= 1, "at least one replicate required");
    let table = JumpTable::new(&config.chain)?;
    let count = config.chain.state_count();
    if config.initial_state >= count {
        return Err(SimError::InvalidInitialState { state: config.initial_state, count });
    }

    let fixed: Result<u64, SimError> = (0..config.replicates)
        .into_par_iter()
        .try_fold(
            || 0u64,
            |acc, r| {
                let outcome = run_to_absorption(&table, config.initial_state, config.seed, r)?;
                Ok(acc + u64::from(outcome == Absorption::MutantFixed))
            },
        )
        .try_reduce(|| 0u64, |a, b| Ok(a + b));
    let fixed = fixed?;

    let p = fixed as f64 / config.replicates as f64;
    let se = (p * (1.0 - p) / config.replicates as f64).sqrt();
    Ok(SimResult {
        estimate: p,
        standard_error: se,
        replicates: config.replicates,
        seed: config.seed,
    })
}
