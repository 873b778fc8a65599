//! Accuracy-predictor construction: QMC architecture pool plus iterative
//! exploration/exploitation sample selection against a pluggable evaluation
//! oracle.
//!
//! Each iteration fits a GP on all observations, scores every unevaluated
//! pool member (predicted mean, predictive standard deviation, FLOPs),
//! evaluates the `explore_count` highest-uncertainty genes and the
//! `exploit_count` highest mean/FLOPs genes, and repeats until the LOO MSE
//! drops below the threshold or the sample budget is exhausted.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gp::{self, GpModel};
use crate::qmc::LowDiscrepancy;
use crate::space::{Gene, SearchSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// QMC pool size k.
    pub pool_size: usize,
    /// Exploration samples p per iteration (highest uncertainty).
    pub explore_count: usize,
    /// Exploitation samples q per iteration (highest mean/FLOPs).
    pub exploit_count: usize,
    /// Stop once LOO MSE falls below this threshold.
    pub mse_threshold: f64,
    /// Hard cap on oracle evaluations, initial batch included.
    pub max_total_samples: usize,
    /// Size of the random batch evaluated before the first fit.
    pub initial_random: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            pool_size: 2048,
            explore_count: 8,
            exploit_count: 8,
            mse_threshold: 1e-4,
            max_total_samples: 240,
            initial_random: 48,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.explore_count + self.exploit_count == 0 {
            return Err(SamplerError::InvalidConfig(
                "explore_count + exploit_count must be >= 1".to_string(),
            ));
        }
        if self.pool_size < self.initial_random + self.explore_count + self.exploit_count {
            return Err(SamplerError::InvalidConfig(
                "pool_size must cover initial_random + explore_count + exploit_count".to_string(),
            ));
        }
        if !(self.mse_threshold > 0.0) {
            return Err(SamplerError::InvalidConfig(
                "mse_threshold must be > 0".to_string(),
            ));
        }
        if self.initial_random == 0 || self.initial_random > self.max_total_samples {
            return Err(SamplerError::InvalidConfig(
                "initial_random must be in 1..=max_total_samples".to_string(),
            ));
        }
        Ok(())
    }
}

/// Where an observation came from in the sampling loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Initial,
    Explore,
    Exploit,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Initial => "initial",
            Source::Explore => "explore",
            Source::Exploit => "exploit",
        }
    }
}

/// One oracle evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub gene: Gene,
    pub value: f64,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleError {
    pub message: String,
}

impl OracleError {
    pub fn new(message: impl Into<String>) -> Self {
        OracleError {
            message: message.into(),
        }
    }
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

/// Abstract evaluation backend: measurement replay, synthetic simulator, or
/// an external command. Implementations must be deterministic per gene
/// within one run.
pub trait EvalOracle {
    fn evaluate(&mut self, gene: &Gene) -> Result<f64, OracleError>;
}

impl<F> EvalOracle for F
where
    F: FnMut(&Gene) -> Result<f64, OracleError>,
{
    fn evaluate(&mut self, gene: &Gene) -> Result<f64, OracleError> {
        self(gene)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SamplerError {
    InvalidConfig(String),
    /// The discrete space has fewer distinct genes than requested.
    PoolExhausted { requested: usize, available: u128 },
    /// The oracle failed on a specific gene.
    OracleFailure { gene: Gene, message: String },
    InsufficientCandidates { needed: usize, available: usize },
    Gp(gp::GpError),
}

impl fmt::Display for SamplerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplerError::InvalidConfig(m) => write!(f, "invalid sampler config: {m}"),
            SamplerError::PoolExhausted {
                requested,
                available,
            } => write!(
                f,
                "pool exhausted: requested {requested} distinct genes, space holds {available}"
            ),
            SamplerError::OracleFailure { gene, message } => {
                write!(f, "oracle failed on gene {:?}: {message}", gene.values)
            }
            SamplerError::InsufficientCandidates { needed, available } => {
                write!(f, "need {needed} candidates, only {available} available")
            }
            SamplerError::Gp(e) => write!(f, "gp error: {e}"),
        }
    }
}

impl From<gp::GpError> for SamplerError {
    fn from(e: gp::GpError) -> Self {
        SamplerError::Gp(e)
    }
}

/// Draw `k` distinct genes from a scrambled low-discrepancy sequence over
/// the space. Each coordinate is mapped onto the hyperparameter's grid;
/// duplicates after rounding are replaced by subsequent sequence points.
pub fn qmc_pool(space: &SearchSpace, k: usize, seed: u64) -> Result<Vec<Gene>, SamplerError> {
    let card = space.cardinality();
    if (k as u128) > card {
        return Err(SamplerError::PoolExhausted {
            requested: k,
            available: card,
        });
    }
    let defs: Vec<_> = space
        .searchable_defs()
        .iter()
        .map(|d| (d.lower, d.step, d.grid_len()))
        .collect();
    let mut seq = LowDiscrepancy::new(defs.len(), seed);
    let mut seen = BTreeSet::new();
    let mut pool = Vec::with_capacity(k);
    // The sequence eventually covers the grid; the cap guards degenerate
    // spaces where collisions dominate.
    let budget = (k as u64).saturating_mul(4096).max(1 << 20);
    let mut draws = 0u64;
    while pool.len() < k && draws < budget {
        draws += 1;
        let point = seq.next_point();
        let values: Vec<u32> = point
            .iter()
            .zip(&defs)
            .map(|(&u, &(lower, step, len))| {
                let idx = ((u * len as f64) as u64).min(len - 1);
                lower + (idx as u32) * step
            })
            .collect();
        if seen.insert(values.clone()) {
            pool.push(Gene::new(values));
        }
    }
    if pool.len() < k {
        // Tiny spaces: complete the pool by lexicographic enumeration.
        let mut counter = alloc::vec![0u64; defs.len()];
        'outer: loop {
            let values: Vec<u32> = counter
                .iter()
                .zip(&defs)
                .map(|(&i, &(lower, step, _))| lower + (i as u32) * step)
                .collect();
            if seen.insert(values.clone()) {
                pool.push(Gene::new(values));
                if pool.len() == k {
                    break;
                }
            }
            for d in 0..defs.len() {
                counter[d] += 1;
                if counter[d] < defs[d].2 {
                    continue 'outer;
                }
                counter[d] = 0;
            }
            break;
        }
    }
    debug_assert!(pool.iter().all(|g| space.validate(g)));
    Ok(pool)
}

/// Rank candidates for the next evaluation batch: `explore` holds the p
/// highest predictive standard deviations, `exploit` the q highest
/// mean/FLOPs ratios among candidates not already picked for exploration.
/// Ties break toward the lower candidate index.
pub fn select_samples<F>(
    model: &GpModel,
    space: &SearchSpace,
    candidates: &[Gene],
    p: usize,
    q: usize,
    mut flops_fn: F,
) -> Result<(Vec<usize>, Vec<usize>), SamplerError>
where
    F: FnMut(&Gene) -> u64,
{
    if candidates.is_empty() || p + q > candidates.len() {
        return Err(SamplerError::InsufficientCandidates {
            needed: p + q,
            available: candidates.len(),
        });
    }
    let mut scored = Vec::with_capacity(candidates.len());
    for (i, gene) in candidates.iter().enumerate() {
        let pred = model.predict(&space.normalize(gene))?;
        let flops = flops_fn(gene).max(1) as f64;
        scored.push((i, pred.std_dev(), pred.mean / flops));
    }
    let mut by_sd: Vec<usize> = (0..scored.len()).collect();
    by_sd.sort_by(|&a, &b| {
        scored[b]
            .1
            .partial_cmp(&scored[a].1)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(scored[a].0.cmp(&scored[b].0))
    });
    let explore: Vec<usize> = by_sd[..p].to_vec();
    let taken: BTreeSet<usize> = explore.iter().copied().collect();
    let mut by_ratio: Vec<usize> = (0..scored.len())
        .filter(|i| !taken.contains(i))
        .collect();
    by_ratio.sort_by(|&a, &b| {
        scored[b]
            .2
            .partial_cmp(&scored[a].2)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(scored[a].0.cmp(&scored[b].0))
    });
    let exploit: Vec<usize> = by_ratio[..q].to_vec();
    Ok((explore, exploit))
}

/// Default hyperparameters used before enough observations exist to tune.
const FALLBACK_GAMMA: f64 = 1.0;
const FALLBACK_NOISE: f64 = 1e-4;

fn fit_tuned(
    inputs: &[Vec<f64>],
    targets: &[f64],
) -> Result<(GpModel, f64), SamplerError> {
    let (gamma, noise) = if inputs.len() >= 4 {
        gp::tune_hyperparams(inputs, targets)?
    } else {
        (FALLBACK_GAMMA, FALLBACK_NOISE)
    };
    let model = GpModel::fit(inputs.to_vec(), targets.to_vec(), gamma, noise)?;
    let mse = if inputs.len() >= 2 {
        let res = model.loo_residuals();
        res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64
    } else {
        f64::INFINITY
    };
    Ok((model, mse))
}

/// Build a GP predictor over the space with the given oracle, following the
/// iterative explore/exploit loop. Returns the final model and the full
/// observation log in evaluation order. Each gene is evaluated at most once.
pub fn build_predictor<O: EvalOracle>(
    space: &SearchSpace,
    oracle: &mut O,
    cfg: &SamplerConfig,
) -> Result<(GpModel, Vec<Observation>), SamplerError> {
    cfg.validate()?;
    let pool = qmc_pool(space, cfg.pool_size, cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xa5a5_1234_dead_beef);
    let mut memo: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    let mut observations: Vec<Observation> = Vec::new();
    let mut evaluated: BTreeSet<usize> = BTreeSet::new();

    let evaluate = |idx: usize,
                        source: Source,
                        oracle: &mut O,
                        memo: &mut BTreeMap<Vec<u32>, f64>,
                        observations: &mut Vec<Observation>,
                        evaluated: &mut BTreeSet<usize>|
     -> Result<(), SamplerError> {
        let gene = &pool[idx];
        if evaluated.contains(&idx) {
            return Ok(());
        }
        let value = match memo.get(&gene.values) {
            Some(&v) => v,
            None => {
                let v = oracle
                    .evaluate(gene)
                    .map_err(|e| SamplerError::OracleFailure {
                        gene: gene.clone(),
                        message: e.message,
                    })?;
                memo.insert(gene.values.clone(), v);
                v
            }
        };
        evaluated.insert(idx);
        observations.push(Observation {
            gene: gene.clone(),
            value,
            source,
        });
        Ok(())
    };

    let initial = rand::seq::index::sample(&mut rng, pool.len(), cfg.initial_random);
    let mut initial: Vec<usize> = initial.into_iter().collect();
    initial.sort_unstable();
    for idx in initial {
        evaluate(
            idx,
            Source::Initial,
            oracle,
            &mut memo,
            &mut observations,
            &mut evaluated,
        )?;
    }

    loop {
        let inputs: Vec<Vec<f64>> = observations
            .iter()
            .map(|o| space.normalize(&o.gene))
            .collect();
        let targets: Vec<f64> = observations.iter().map(|o| o.value).collect();
        let (model, mse) = fit_tuned(&inputs, &targets)?;
        let budget_left = cfg.max_total_samples.saturating_sub(observations.len());
        if mse < cfg.mse_threshold || budget_left == 0 {
            return Ok((model, observations));
        }
        let candidate_idx: Vec<usize> =
            (0..pool.len()).filter(|i| !evaluated.contains(i)).collect();
        let candidates: Vec<Gene> = candidate_idx.iter().map(|&i| pool[i].clone()).collect();
        let p = cfg.explore_count.min(candidates.len());
        let q = cfg.exploit_count.min(candidates.len() - p);
        if p + q == 0 {
            return Ok((model, observations));
        }
        let (explore, exploit) = select_samples(&model, space, &candidates, p, q, |g| {
            space.flops(g).unwrap_or(u64::MAX)
        })?;
        let batch: Vec<(usize, Source)> = explore
            .iter()
            .map(|&c| (candidate_idx[c], Source::Explore))
            .chain(exploit.iter().map(|&c| (candidate_idx[c], Source::Exploit)))
            .take(budget_left)
            .collect();
        for (idx, source) in batch {
            evaluate(
                idx,
                source,
                oracle,
                &mut memo,
                &mut observations,
                &mut evaluated,
            )?;
        }
    }
}
