//! Resource predictors: the operator-latency lookup table with
//! sum-composition, the exploration-only GP energy predictor, and
//! power-trace post-processing into per-inference energy.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::gp::GpModel;
use crate::sampler::{self, EvalOracle, Observation, SamplerConfig, SamplerError};
use crate::space::{ArchitectureDescription, SearchSpace};

pub use crate::space::OperatorKey;

#[derive(Debug, Clone, PartialEq)]
pub enum ResourceError {
    /// One or more decoded operators have no LUT record. Every absent key
    /// is listed, not just the first.
    MissingOperator { keys: Vec<OperatorKey> },
    /// Energy builds must disable exploitation sampling.
    ConfigViolation(String),
    EmptyTrace,
    Sampler(SamplerError),
}

impl fmt::Display for ResourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceError::MissingOperator { keys } => {
                write!(f, "{} operator(s) missing from LUT:", keys.len())?;
                for k in keys {
                    write!(
                        f,
                        " [{} {}x{} {}->{} s{} k{} t{}]",
                        k.op_kind.as_str(),
                        k.input_h,
                        k.input_w,
                        k.in_channels,
                        k.out_channels,
                        k.stride,
                        k.kernel_size,
                        k.expansion
                    )?;
                }
                Ok(())
            }
            ResourceError::ConfigViolation(m) => write!(f, "config violation: {m}"),
            ResourceError::EmptyTrace => write!(f, "power trace has no samples"),
            ResourceError::Sampler(e) => write!(f, "{e}"),
        }
    }
}

impl From<SamplerError> for ResourceError {
    fn from(e: SamplerError) -> Self {
        ResourceError::Sampler(e)
    }
}

/// Operator-descriptor to latency database. Latencies are integer
/// microseconds internally so that sum-composition is exact; the query API
/// reports milliseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyLut {
    pub platform: String,
    records: BTreeMap<OperatorKey, u64>,
}

impl LatencyLut {
    /// Build from a record stream. Duplicate keys are resolved by the
    /// arithmetic mean (rounded to the nearest microsecond).
    pub fn build(platform: &str, records: impl IntoIterator<Item = (OperatorKey, u64)>) -> Self {
        let mut acc: BTreeMap<OperatorKey, (u64, u64)> = BTreeMap::new();
        for (key, us) in records {
            let e = acc.entry(key).or_insert((0, 0));
            e.0 += us;
            e.1 += 1;
        }
        let records = acc
            .into_iter()
            .map(|(k, (sum, count))| (k, (sum + count / 2) / count))
            .collect();
        LatencyLut {
            platform: String::from(platform),
            records,
        }
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    pub fn get_us(&self, key: &OperatorKey) -> Option<u64> {
        self.records.get(key).copied()
    }

    pub fn records(&self) -> impl Iterator<Item = (&OperatorKey, u64)> {
        self.records.iter().map(|(k, &v)| (k, v))
    }

    /// Lookup with bilinear interpolation over (in_channels, out_channels)
    /// among records matching every other key field. Falls back to the exact
    /// record when one exists; `None` when no record shares the remaining
    /// fields. Results round to the nearest microsecond.
    pub fn get_us_interpolated(&self, key: &OperatorKey) -> Option<u64> {
        if let Some(us) = self.get_us(key) {
            return Some(us);
        }
        // Records agreeing with `key` on everything but the channel axes.
        let siblings: Vec<(u32, u32, u64)> = self
            .records
            .iter()
            .filter(|(k, _)| {
                k.op_kind == key.op_kind
                    && k.input_h == key.input_h
                    && k.input_w == key.input_w
                    && k.stride == key.stride
                    && k.kernel_size == key.kernel_size
                    && k.expansion == key.expansion
            })
            .map(|(k, &us)| (k.in_channels, k.out_channels, us))
            .collect();
        if siblings.is_empty() {
            return None;
        }
        let interp_out = |cin: u32| -> Option<f64> {
            let row: Vec<(u32, u64)> = siblings
                .iter()
                .filter(|&&(ci, _, _)| ci == cin)
                .map(|&(_, co, us)| (co, us))
                .collect();
            interp_axis(&row, key.out_channels)
        };
        let cins: alloc::collections::BTreeSet<u32> =
            siblings.iter().map(|&(ci, _, _)| ci).collect();
        let lower = cins.iter().rev().find(|&&c| c <= key.in_channels).copied();
        let upper = cins.iter().find(|&&c| c >= key.in_channels).copied();
        let v = match (lower, upper) {
            (Some(a), Some(b)) if a == b => interp_out(a)?,
            (Some(a), Some(b)) => {
                let (va, vb) = (interp_out(a)?, interp_out(b)?);
                let f = (key.in_channels - a) as f64 / (b - a) as f64;
                va + f * (vb - va)
            }
            (Some(a), None) => interp_out(a)?,
            (None, Some(b)) => interp_out(b)?,
            (None, None) => return None,
        };
        Some(libm::round(v) as u64)
    }

    /// Exact integer-microsecond sum over the architecture's operators.
    pub fn network_latency_us(&self, arch: &ArchitectureDescription) -> Result<u64, ResourceError> {
        let mut missing = Vec::new();
        let mut total = 0u64;
        for op in &arch.operators {
            match self.records.get(op) {
                Some(&us) => total += us,
                None => {
                    if !missing.contains(op) {
                        missing.push(*op);
                    }
                }
            }
        }
        if missing.is_empty() {
            Ok(total)
        } else {
            Err(ResourceError::MissingOperator { keys: missing })
        }
    }

    /// Network latency in milliseconds (Eq.-style sum of operator records).
    pub fn predict_latency_ms(
        &self,
        arch: &ArchitectureDescription,
    ) -> Result<f64, ResourceError> {
        Ok(self.network_latency_us(arch)? as f64 / 1000.0)
    }

    /// As [`network_latency_us`](Self::network_latency_us), but missing keys
    /// fall back to channel interpolation before erroring.
    pub fn network_latency_us_interpolated(
        &self,
        arch: &ArchitectureDescription,
    ) -> Result<u64, ResourceError> {
        let mut missing = Vec::new();
        let mut total = 0u64;
        for op in &arch.operators {
            match self.get_us_interpolated(op) {
                Some(us) => total += us,
                None => {
                    if !missing.contains(op) {
                        missing.push(*op);
                    }
                }
            }
        }
        if missing.is_empty() {
            Ok(total)
        } else {
            Err(ResourceError::MissingOperator { keys: missing })
        }
    }
}

/// Linear interpolation of `(coordinate, value)` samples at `at`, clamping
/// outside the sampled range. `None` when `row` is empty.
fn interp_axis(row: &[(u32, u64)], at: u32) -> Option<f64> {
    if row.is_empty() {
        return None;
    }
    let lower = row.iter().rev().find(|&&(c, _)| c <= at);
    let upper = row.iter().find(|&&(c, _)| c >= at);
    Some(match (lower, upper) {
        (Some(&(a, va)), Some(&(b, vb))) if a != b => {
            let f = (at - a) as f64 / (b - a) as f64;
            va as f64 + f * (vb as f64 - va as f64)
        }
        (Some(&(_, v)), _) => v as f64,
        (None, Some(&(_, v))) => v as f64,
        (None, None) => unreachable!(),
    })
}

/// GP predictor over per-inference energies in millijoules.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    pub gp: GpModel,
    pub platform: String,
}

impl EnergyModel {
    /// Predicted mean energy in mJ, clamped non-negative.
    pub fn predict_mj(&self, space: &SearchSpace, gene: &crate::space::Gene) -> Result<f64, SamplerError> {
        let pred = self.gp.predict(&space.normalize(gene))?;
        Ok(pred.mean.max(0.0))
    }
}

/// Build an energy predictor: identical flow to the accuracy sampler but
/// with exploitation disabled (uncertainty-only selection).
pub fn build_energy_predictor<O: EvalOracle>(
    space: &SearchSpace,
    oracle: &mut O,
    cfg: &SamplerConfig,
    platform: &str,
) -> Result<(EnergyModel, Vec<Observation>), ResourceError> {
    if cfg.exploit_count != 0 {
        return Err(ResourceError::ConfigViolation(String::from(
            "energy builds select exploration samples only (exploit_count must be 0)",
        )));
    }
    let (gp, obs) = sampler::build_predictor(space, oracle, cfg)?;
    Ok((
        EnergyModel {
            gp,
            platform: String::from(platform),
        },
        obs,
    ))
}

/// Raw current trace from a constant-voltage power monitor.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    pub voltage: f64,
    /// Seconds between current samples.
    pub sample_interval: f64,
    /// Current readings in amperes.
    pub samples: Vec<f64>,
    /// Idle-mode current deducted from every sample.
    pub baseline_current: f64,
    /// Number of inference runs captured by the trace.
    pub run_count: u32,
}

/// Per-inference energy in millijoules. Per-sample excess current below the
/// baseline clamps to zero, so the result is never negative.
pub fn trace_to_energy(trace: &PowerTrace) -> Result<f64, ResourceError> {
    if trace.samples.is_empty() {
        return Err(ResourceError::EmptyTrace);
    }
    debug_assert!(trace.sample_interval > 0.0 && trace.run_count >= 1);
    let excess: f64 = trace
        .samples
        .iter()
        .map(|&a| (a - trace.baseline_current).max(0.0))
        .sum();
    let joules = trace.voltage * excess * trace.sample_interval / trace.run_count as f64;
    Ok(joules * 1000.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{chamnet_mobile, OpKind};
    use alloc::vec;

    fn key(out_c: u32) -> OperatorKey {
        OperatorKey {
            op_kind: OpKind::Conv2d,
            input_h: 56,
            input_w: 56,
            in_channels: 32,
            out_channels: out_c,
            stride: 1,
            kernel_size: 1,
            expansion: 1,
        }
    }

    #[test]
    fn duplicate_keys_averaged() {
        let lut = LatencyLut::build("p", vec![(key(8), 100), (key(8), 200)]);
        assert_eq!(lut.get_us(&key(8)), Some(150));
        assert_eq!(lut.record_count(), 1);
    }

    #[test]
    fn empty_stream_empty_lut() {
        let lut = LatencyLut::build("p", Vec::new());
        assert_eq!(lut.record_count(), 0);
    }

    #[test]
    fn latency_sum_and_ms_report() {
        let lut = LatencyLut::build("p", vec![(key(8), 3000), (key(16), 4500)]);
        let arch = ArchitectureDescription {
            operators: vec![key(8), key(16)],
            stage_of: vec![0, 0],
        };
        assert_eq!(lut.network_latency_us(&arch).unwrap(), 7500);
        assert_eq!(lut.predict_latency_ms(&arch).unwrap(), 7.5);
    }

    #[test]
    fn empty_architecture_zero_latency() {
        let lut = LatencyLut::build("p", Vec::new());
        let arch = ArchitectureDescription {
            operators: vec![],
            stage_of: vec![],
        };
        assert_eq!(lut.predict_latency_ms(&arch).unwrap(), 0.0);
    }

    #[test]
    fn missing_operators_all_listed() {
        let lut = LatencyLut::build("p", vec![(key(8), 10)]);
        let arch = ArchitectureDescription {
            operators: vec![key(8), key(16), key(24)],
            stage_of: vec![0, 0, 0],
        };
        match lut.network_latency_us(&arch) {
            Err(ResourceError::MissingOperator { keys }) => {
                assert_eq!(keys, vec![key(16), key(24)]);
            }
            other => panic!("expected MissingOperator, got {other:?}"),
        }
    }

    #[test]
    fn additivity_exact() {
        let lut = LatencyLut::build("p", vec![(key(8), 123), (key(16), 456), (key(24), 789)]);
        let a = ArchitectureDescription {
            operators: vec![key(8), key(16)],
            stage_of: vec![0, 0],
        };
        let b = ArchitectureDescription {
            operators: vec![key(24)],
            stage_of: vec![0],
        };
        let joined = ArchitectureDescription {
            operators: vec![key(8), key(16), key(24)],
            stage_of: vec![0, 0, 0],
        };
        assert_eq!(
            lut.network_latency_us(&joined).unwrap(),
            lut.network_latency_us(&a).unwrap() + lut.network_latency_us(&b).unwrap()
        );
    }

    #[test]
    fn interpolation_fills_channel_gaps() {
        let lut = LatencyLut::build("p", vec![(key(8), 100), (key(16), 200), (key(32), 400)]);
        // Midpoint of the 8..16 segment.
        assert_eq!(lut.get_us_interpolated(&key(12)), Some(150));
        // Exact keys are passed through untouched.
        assert_eq!(lut.get_us_interpolated(&key(16)), Some(200));
        // Outside the sampled range clamps to the nearest record.
        assert_eq!(lut.get_us_interpolated(&key(40)), Some(400));
        // No sibling records at all -> None.
        let other = OperatorKey {
            input_h: 7,
            ..key(8)
        };
        assert_eq!(lut.get_us_interpolated(&other), None);
    }

    #[test]
    fn energy_build_rejects_exploitation() {
        let space = chamnet_mobile();
        let cfg = SamplerConfig {
            exploit_count: 3,
            ..SamplerConfig::default()
        };
        let mut oracle = |_: &crate::space::Gene| Ok(1.0);
        match build_energy_predictor(&space, &mut oracle, &cfg, "p") {
            Err(ResourceError::ConfigViolation(_)) => {}
            other => panic!("expected ConfigViolation, got {other:?}"),
        }
    }

    #[test]
    fn worked_energy_example() {
        // 4.2 V, 1.0 A above baseline for 10 s total, 1000 runs -> 42 mJ.
        let trace = PowerTrace {
            voltage: 4.2,
            sample_interval: 0.01,
            samples: vec![1.3; 1000], // 10 s of samples at 0.3 A baseline
            baseline_current: 0.3,
            run_count: 1000,
        };
        let mj = trace_to_energy(&trace).unwrap();
        assert!((mj - 42.0).abs() < 1e-9);
    }

    #[test]
    fn baseline_only_trace_zero_energy() {
        let trace = PowerTrace {
            voltage: 4.2,
            sample_interval: 2e-4,
            samples: vec![0.25; 64],
            baseline_current: 0.25,
            run_count: 10,
        };
        assert_eq!(trace_to_energy(&trace).unwrap(), 0.0);
    }

    #[test]
    fn empty_trace_errors() {
        let trace = PowerTrace {
            voltage: 4.2,
            sample_interval: 2e-4,
            samples: vec![],
            baseline_current: 0.0,
            run_count: 1,
        };
        assert_eq!(trace_to_energy(&trace).unwrap_err(), ResourceError::EmptyTrace);
    }

    #[test]
    fn noise_below_baseline_clamped() {
        let trace = PowerTrace {
            voltage: 1.0,
            sample_interval: 1.0,
            samples: vec![0.5, 0.1, 0.5], // middle sample dips below baseline
            baseline_current: 0.3,
            run_count: 1,
        };
        let mj = trace_to_energy(&trace).unwrap();
        assert!((mj - 400.0).abs() < 1e-9);
        assert!(mj >= 0.0);
    }
}
