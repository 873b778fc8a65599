//! Evaluation-oracle backends for the predictor-building commands.
//!
//! An oracle spec is one of:
//! - `synthetic` — the built-in deterministic landscape (accuracy) or
//!   device-derived energy model; `synthetic:dsp` selects the staircase
//!   device profile where a device is involved.
//! - `file:PATH` — replay from an observation log; genes absent from the
//!   log are oracle failures.
//! - `cmd:PROG` — run an external program with the gene values as
//!   arguments; its stdout must be a single number.

use std::collections::BTreeMap;
use std::process::Command;

use chamnet_core::oracle::{SyntheticAccuracyOracle, SyntheticDevice, SyntheticEnergyOracle};
use chamnet_core::sampler::{EvalOracle, OracleError};
use chamnet_core::space::{Gene, SearchSpace};

use crate::formats;
use crate::CliError;

pub enum OracleKind {
    Accuracy,
    Energy,
}

pub enum CliOracle {
    Accuracy {
        space: SearchSpace,
        oracle: SyntheticAccuracyOracle,
    },
    Energy {
        space: SearchSpace,
        oracle: SyntheticEnergyOracle,
    },
    Replay {
        values: BTreeMap<Vec<u32>, f64>,
        path: String,
    },
    Command {
        program: String,
    },
}

impl CliOracle {
    /// Resolve an oracle spec string for the given space and seed.
    pub fn from_spec(
        spec: &str,
        kind: OracleKind,
        space: &SearchSpace,
        seed: u64,
    ) -> Result<CliOracle, CliError> {
        if spec == "synthetic" || spec == "synthetic:cpu" || spec == "synthetic:dsp" {
            let device = if spec.ends_with(":dsp") {
                SyntheticDevice::dsp_like()
            } else {
                SyntheticDevice::cpu_like()
            };
            return Ok(match kind {
                OracleKind::Accuracy => CliOracle::Accuracy {
                    space: space.clone(),
                    oracle: SyntheticAccuracyOracle::for_space(space, seed),
                },
                OracleKind::Energy => CliOracle::Energy {
                    space: space.clone(),
                    oracle: SyntheticEnergyOracle::new(device),
                },
            });
        }
        if let Some(path) = spec.strip_prefix("file:") {
            let text = crate::read_file(path)?;
            let observations = formats::parse_obslog(&text, path, space)?;
            let values = observations
                .into_iter()
                .map(|o| (o.gene.values, o.value))
                .collect();
            return Ok(CliOracle::Replay {
                values,
                path: path.to_string(),
            });
        }
        if let Some(program) = spec.strip_prefix("cmd:") {
            return Ok(CliOracle::Command {
                program: program.to_string(),
            });
        }
        Err(CliError::Usage(format!(
            "unknown oracle spec '{spec}': expected synthetic, file:PATH, or cmd:PROG"
        )))
    }
}

impl EvalOracle for CliOracle {
    fn evaluate(&mut self, gene: &Gene) -> Result<f64, OracleError> {
        match self {
            CliOracle::Accuracy { space, oracle } => Ok(oracle.accuracy(space, gene)),
            CliOracle::Energy { space, oracle } => Ok(oracle.energy_mj(space, gene)),
            CliOracle::Replay { values, path } => {
                values.get(&gene.values).copied().ok_or_else(|| {
                    OracleError::new(format!("gene not present in replay log {path}"))
                })
            }
            CliOracle::Command { program } => {
                let args: Vec<String> =
                    gene.values.iter().map(|v| v.to_string()).collect();
                let output = Command::new(&*program)
                    .args(&args)
                    .output()
                    .map_err(|e| OracleError::new(format!("spawn {program}: {e}")))?;
                if !output.status.success() {
                    return Err(OracleError::new(format!(
                        "{program} exited with {}",
                        output.status
                    )));
                }
                let text = String::from_utf8_lossy(&output.stdout);
                text.trim()
                    .parse::<f64>()
                    .map_err(|_| OracleError::new(format!("{program} printed '{}'", text.trim())))
            }
        }
    }
}

/// Oracle wrapper that serves values from an existing partial log before
/// falling back to the inner oracle, and counts the fallback calls.
pub struct ResumingOracle<'a> {
    pub inner: &'a mut CliOracle,
    pub cached: BTreeMap<Vec<u32>, f64>,
    pub fresh_evaluations: usize,
}

impl EvalOracle for ResumingOracle<'_> {
    fn evaluate(&mut self, gene: &Gene) -> Result<f64, OracleError> {
        if let Some(&v) = self.cached.get(&gene.values) {
            return Ok(v);
        }
        self.fresh_evaluations += 1;
        self.inner.evaluate(gene)
    }
}
