//! Block-size selection learned from run telemetry: a contextual
//! epsilon-greedy bandit over a discrete candidate grid, plus a
//! nearest-neighbor regression mode for fixed training pairs.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::telemetry::{TelemetryRecord, TelemetryStore};

pub const POLICY_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_CANDIDATES: [usize; 5] = [2, 4, 8, 16, 32];
pub const DEFAULT_ACCURACY_CEILING: f64 = 1e-3;
/// Candidate returned when a context bucket has no data yet.
pub const COLD_START_BLOCK_SIZE: usize = 8;
const EPSILON_FLOOR: f64 = 0.05;
const EPSILON_START: f64 = 0.5;
const EPSILON_DECAY: f64 = 0.9;

/// Running cost estimate of one candidate inside one context bucket.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidateStat {
    pub count: u64,
    pub mean_total_ms: f64,
}

/// Contextual epsilon-greedy policy over candidate block sizes.
///
/// Contexts are bucketed by `(floor(log2 N), sparsity decile)`; value
/// estimates are mean observed `total_ms`, built only from records that meet
/// the accuracy ceiling. The RNG state is part of the policy so a fixed seed
/// replays an identical decision stream across save/load cycles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub v: u32,
    pub candidates: Vec<usize>,
    /// Bucket key -> per-candidate stats, parallel to `candidates`.
    pub buckets: BTreeMap<String, Vec<CandidateStat>>,
    pub epsilon: f64,
    pub updates: u64,
    pub accuracy_ceiling: f64,
    pub rng_seed: u64,
    pub rng_word_pos: u128,
}

impl Policy {
    pub fn new(rng_seed: u64) -> Self {
        Self {
            v: POLICY_SCHEMA_VERSION,
            candidates: DEFAULT_CANDIDATES.to_vec(),
            buckets: BTreeMap::new(),
            epsilon: EPSILON_START,
            updates: 0,
            accuracy_ceiling: DEFAULT_ACCURACY_CEILING,
            rng_seed,
            rng_word_pos: 0,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let data = std::fs::read_to_string(path.as_ref())?;
        let policy: Policy = serde_json::from_str(&data)?;
        if policy.v != POLICY_SCHEMA_VERSION {
            return Err(Error::InvalidRecord(format!(
                "policy schema version {} (expected {POLICY_SCHEMA_VERSION})",
                policy.v
            )));
        }
        Ok(policy)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path.as_ref(), json)?;
        Ok(())
    }

    /// Context bucket of a system.
    pub fn bucket_key(n: usize, sparsity: f64) -> String {
        let log2n = usize::BITS - 1 - n.max(1).leading_zeros();
        let decile = ((sparsity * 10.0).floor() as i64).clamp(0, 9);
        format!("l{log2n}-d{decile}")
    }

    /// Greedy candidate for a bucket: lowest mean `total_ms` among sampled
    /// candidates, the cold-start default when nothing is sampled.
    pub fn greedy_block_size(&self, n: usize, sparsity: f64) -> usize {
        let key = Self::bucket_key(n, sparsity);
        let default = self.default_candidate();
        let Some(stats) = self.buckets.get(&key) else {
            return default;
        };
        let mut best: Option<(usize, f64)> = None;
        for (slot, stat) in stats.iter().enumerate() {
            if stat.count == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((_, cost)) => stat.mean_total_ms < cost,
            };
            if better {
                best = Some((slot, stat.mean_total_ms));
            }
        }
        match best {
            Some((slot, _)) => self.candidates[slot],
            None => default,
        }
    }

    fn default_candidate(&self) -> usize {
        if self.candidates.contains(&COLD_START_BLOCK_SIZE) {
            COLD_START_BLOCK_SIZE
        } else {
            self.candidates[self.candidates.len() / 2]
        }
    }

    /// Epsilon-greedy selection: with probability `1 - epsilon` the greedy
    /// candidate, otherwise a uniformly random one. A cold-start bucket (no
    /// sampled candidate yet) returns the default candidate outright,
    /// consuming no randomness. Deterministic under the policy's RNG seed
    /// and stored stream position.
    pub fn predict_block_size(&mut self, n: usize, sparsity: f64) -> usize {
        let key = Self::bucket_key(n, sparsity);
        let cold = !self
            .buckets
            .get(&key)
            .is_some_and(|stats| stats.iter().any(|s| s.count > 0));
        if cold {
            return self.default_candidate();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_word_pos(self.rng_word_pos);
        let roll: f64 = rng.random();
        let choice = if roll < self.epsilon {
            self.candidates[rng.random_range(0..self.candidates.len())]
        } else {
            self.greedy_block_size(n, sparsity)
        };
        self.rng_word_pos = rng.get_word_pos();
        choice
    }

    /// Fold one telemetry record into the value estimates. Records that miss
    /// the accuracy ceiling advance the schedule but never influence
    /// estimates.
    pub fn observe(&mut self, record: &TelemetryRecord) {
        self.updates += 1;
        self.epsilon = (EPSILON_START * EPSILON_DECAY.powi(self.updates as i32)).max(EPSILON_FLOOR);
        if record.residual > self.accuracy_ceiling {
            return;
        }
        let Some(slot) = self.candidates.iter().position(|&c| c == record.block_size) else {
            return;
        };
        let key = Self::bucket_key(record.matrix_dim, record.sparsity);
        let stats = self
            .buckets
            .entry(key)
            .or_insert_with(|| vec![CandidateStat::default(); self.candidates.len()]);
        let stat = &mut stats[slot];
        stat.count += 1;
        stat.mean_total_ms += (record.total_ms - stat.mean_total_ms) / stat.count as f64;
    }
}

/// Validate, persist, and learn from one run.
pub fn record_run(
    record: &TelemetryRecord,
    store: &TelemetryStore,
    policy: &mut Policy,
) -> Result<()> {
    record.validate()?;
    store.append(record)?;
    policy.observe(record);
    Ok(())
}

/// Deterministic workload for tuning episodes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorkloadSpec {
    /// System dimension per episode.
    pub n: usize,
    /// Context sparsity used for bucketing. This must match the sparsity
    /// the episode records will carry (the realized nonzero fraction of the
    /// episode systems), or predictions and updates land in different
    /// buckets.
    pub sparsity: f64,
    /// Episode i uses seed `base_seed + i`.
    pub base_seed: u64,
}

/// Context handed to the episode runner.
#[derive(Clone, Debug)]
pub struct EpisodeContext {
    pub episode: usize,
    pub n: usize,
    pub sparsity: f64,
    pub block_size: usize,
    pub seed: u64,
}

/// Outcome of a tuning run.
#[derive(Clone, Debug, Default)]
pub struct TuneReport {
    pub episodes_run: usize,
    /// (episode index, error text) for failed episodes.
    pub failures: Vec<(usize, String)>,
}

/// Run `episodes` select-observe-update cycles against an episode runner.
///
/// The runner executes the pipeline (or a synthetic cost model in tests) for
/// the chosen block size and returns the resulting telemetry record. Episode
/// failures are recorded in the report, not fatal. With a fixed policy seed
/// and a deterministic runner the whole trajectory replays identically.
pub fn tune<F>(
    policy: &mut Policy,
    workload: &WorkloadSpec,
    episodes: usize,
    store: &TelemetryStore,
    mut run_episode: F,
) -> Result<TuneReport>
where
    F: FnMut(&EpisodeContext) -> Result<TelemetryRecord>,
{
    let mut report = TuneReport::default();
    for episode in 0..episodes {
        let block_size = policy.predict_block_size(workload.n, workload.sparsity);
        let ctx = EpisodeContext {
            episode,
            n: workload.n,
            sparsity: workload.sparsity,
            block_size,
            seed: workload.base_seed + episode as u64,
        };
        match run_episode(&ctx) {
            Ok(record) => {
                record_run(&record, store, policy)?;
            }
            Err(e) => report.failures.push((episode, e.to_string())),
        }
        report.episodes_run += 1;
    }
    Ok(report)
}

/// Nearest-neighbor regression over `(matrix size, sparsity) -> block size`
/// training pairs; training points are reproduced exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegressionPredictor {
    points: Vec<(f64, f64, f64)>,
    n_scale: f64,
    s_scale: f64,
}

impl RegressionPredictor {
    pub fn fit(features: &[(f64, f64)], targets: &[f64]) -> Result<Self> {
        if features.is_empty() || features.len() != targets.len() {
            return Err(Error::InvalidArgument(
                "regression needs matching, nonempty features and targets".into(),
            ));
        }
        let span = |vals: Vec<f64>| -> f64 {
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                hi - lo
            } else {
                1.0
            }
        };
        let n_scale = span(features.iter().map(|f| f.0).collect());
        let s_scale = span(features.iter().map(|f| f.1).collect());
        Ok(Self {
            points: features
                .iter()
                .zip(targets)
                .map(|(&(n, s), &t)| (n, s, t))
                .collect(),
            n_scale,
            s_scale,
        })
    }

    pub fn predict(&self, n: f64, sparsity: f64) -> usize {
        let mut best = (f64::INFINITY, 0usize);
        for (idx, &(pn, ps, _)) in self.points.iter().enumerate() {
            let dn = (n - pn) / self.n_scale;
            let ds = (sparsity - ps) / self.s_scale;
            let dist = dn * dn + ds * ds;
            if dist < best.0 {
                best = (dist, idx);
            }
        }
        self.points[best.1].2.round() as usize
    }
}
