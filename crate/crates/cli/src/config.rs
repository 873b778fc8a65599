//! TOML run configuration. Every field is optional in the file; defaults
//! mirror the library defaults. Resource thresholds are unit-suffixed
//! (`thres_ms` / `thres_mj`) so a latency budget can never be silently read
//! as an energy budget. Unknown keys are rejected.

use chamnet_core::ees::EesConfig;
use chamnet_core::fitness::{FitnessParams, PenaltyMode, ResourceKind};
use chamnet_core::sampler::SamplerConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// Round searchable channel counts to this multiple (1 = full grid).
    pub channel_step: Option<u32>,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub gp: GpSection,
    #[serde(default)]
    pub fitness: FitnessSection,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub lut: LutSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub pool_size: Option<usize>,
    pub initial_random: Option<usize>,
    pub explore_count: Option<usize>,
    pub exploit_count: Option<usize>,
    pub mse_threshold: Option<f64>,
    pub max_total_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GpSection {
    /// Subtract the target mean before fitting (zero prior mean otherwise).
    pub center_targets: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FitnessSection {
    /// "latency" or "energy".
    pub constraint: Option<String>,
    /// Latency budget. The unit suffix is mandatory: `thres` alone is an
    /// unknown key.
    pub thres_ms: Option<f64>,
    /// Energy budget.
    pub thres_mj: Option<f64>,
    pub alpha: Option<f64>,
    pub w: Option<f64>,
    /// "ramp" or "step".
    pub penalty_mode: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub population: Option<usize>,
    pub survivors: Option<usize>,
    pub iterations: Option<usize>,
    pub crossover_prob: Option<[f64; 2]>,
    pub mutation_prob: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LutSection {
    /// Fall back to channel interpolation on missing operator keys.
    pub interpolate: Option<bool>,
}

impl RunConfig {
    pub fn parse(text: &str, path: &str) -> Result<RunConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::Data(format!("{path}: {e}")))
    }

    /// Canonical serialization of the effective configuration; digested into
    /// the manifest and written next to every command's outputs.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn sampler_config(&self, seed: u64) -> SamplerConfig {
        let d = SamplerConfig::default();
        SamplerConfig {
            pool_size: self.sampler.pool_size.unwrap_or(d.pool_size),
            initial_random: self.sampler.initial_random.unwrap_or(d.initial_random),
            explore_count: self.sampler.explore_count.unwrap_or(d.explore_count),
            exploit_count: self.sampler.exploit_count.unwrap_or(d.exploit_count),
            mse_threshold: self.sampler.mse_threshold.unwrap_or(d.mse_threshold),
            max_total_samples: self.sampler.max_total_samples.unwrap_or(d.max_total_samples),
            seed,
        }
    }

    pub fn ees_config(&self, seed: u64) -> EesConfig {
        let d = EesConfig::default();
        EesConfig {
            population: self.search.population.unwrap_or(d.population),
            survivors: self.search.survivors.unwrap_or(d.survivors),
            iterations: self.search.iterations.unwrap_or(d.iterations),
            crossover_prob_bounds: self
                .search
                .crossover_prob
                .map(|[a, b]| (a, b))
                .unwrap_or(d.crossover_prob_bounds),
            mutation_prob_bounds: self
                .search
                .mutation_prob
                .map(|[a, b]| (a, b))
                .unwrap_or(d.mutation_prob_bounds),
            seed,
        }
    }

    /// Resolve fitness parameters. `kind` comes from which predictor the
    /// command was given; the config's unit-suffixed threshold must agree.
    pub fn fitness_params(
        &self,
        kind: ResourceKind,
        thres_override: Option<f64>,
    ) -> Result<FitnessParams, CliError> {
        if let Some(c) = self.fitness.constraint.as_deref() {
            let expected = match kind {
                ResourceKind::Latency => "latency",
                ResourceKind::Energy => "energy",
            };
            if c != expected {
                return Err(CliError::Usage(format!(
                    "config constraint '{c}' does not match the {expected} predictor in use"
                )));
            }
        }
        let wrong_unit = match kind {
            ResourceKind::Latency => self.fitness.thres_mj,
            ResourceKind::Energy => self.fitness.thres_ms,
        };
        if wrong_unit.is_some() {
            return Err(CliError::Usage(format!(
                "threshold unit mismatch: a {} constraint takes {}",
                kind.unit(),
                match kind {
                    ResourceKind::Latency => "thres_ms",
                    ResourceKind::Energy => "thres_mj",
                }
            )));
        }
        let config_thres = match kind {
            ResourceKind::Latency => self.fitness.thres_ms,
            ResourceKind::Energy => self.fitness.thres_mj,
        };
        let thres = thres_override.or(config_thres).ok_or_else(|| {
            CliError::Usage(format!(
                "no threshold given: set {} in the config or pass --thres-{}",
                match kind {
                    ResourceKind::Latency => "thres_ms",
                    ResourceKind::Energy => "thres_mj",
                },
                kind.unit().to_lowercase()
            ))
        })?;
        if !(thres > 0.0) {
            return Err(CliError::Usage("threshold must be > 0".to_string()));
        }
        let penalty_mode = match self.fitness.penalty_mode.as_deref() {
            None | Some("ramp") => PenaltyMode::Ramp,
            Some("step") => PenaltyMode::Step,
            Some(other) => {
                return Err(CliError::Usage(format!(
                    "penalty_mode must be 'ramp' or 'step', got '{other}'"
                )))
            }
        };
        let base = match kind {
            ResourceKind::Latency => FitnessParams::latency_default(thres),
            ResourceKind::Energy => FitnessParams::energy_default(thres),
        };
        let alpha = self.fitness.alpha.unwrap_or(base.alpha);
        let w = self.fitness.w.unwrap_or(base.w);
        if !(alpha > 0.0) || !(w > 0.0) {
            return Err(CliError::Usage("alpha and w must be > 0".to_string()));
        }
        Ok(FitnessParams {
            alpha,
            w,
            thres,
            penalty_mode,
            resource_kind: kind,
        })
    }
}
