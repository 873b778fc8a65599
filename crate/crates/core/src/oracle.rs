//! Desk-scale simulators standing in for network training and device
//! measurement: a synthetic accuracy landscape over a search space, a
//! synthetic operator-latency device model, and a derived energy model.
//!
//! The synthetic landscapes are explicit stand-ins; numbers derived from
//! them describe the toolkit's behavior, not any real dataset or device.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::space::{Gene, HyperparamKind, OpKind, OperatorKey, SearchSpace};

/// Deterministic synthetic accuracy landscape: a saturating function of
/// log-scaled per-stage FLOPs plus a resolution term and seeded noise.
/// Outputs are in [0, 1].
#[derive(Debug, Clone)]
pub struct SyntheticAccuracyOracle {
    pub seed: u64,
    /// Upper bound of the noise-free output; the landscape midpoint is
    /// `saturation / 2`.
    pub saturation: f64,
    /// One weight per stage of the space.
    pub stage_weights: Vec<f64>,
    pub noise_sd: f64,
    /// Per-stage (ln min, ln max) FLOPs over the space's corner genes.
    stage_log_bounds: Vec<(f64, f64)>,
    res_lower: u32,
    res_upper: u32,
}

const LANDSCAPE_SCALE: f64 = 6.0;
/// Amplitude and frequency of the smooth per-stage ripple superimposed on
/// the saturating trend. The ripple gives the landscape genuine local
/// structure, strongest for small stages (small networks differ wildly,
/// large ones all saturate), so predictor quality depends on where the
/// samples were placed.
const RIPPLE_AMP: f64 = 0.12;
const RIPPLE_FREQ: f64 = 1.5;

impl SyntheticAccuracyOracle {
    pub fn for_space(space: &SearchSpace, seed: u64) -> Self {
        let lo = space
            .decode(&space.corner_gene(false))
            .expect("corner gene decodes")
            .stage_flops(space.stages.len());
        let hi = space
            .decode(&space.corner_gene(true))
            .expect("corner gene decodes")
            .stage_flops(space.stages.len());
        let stage_log_bounds: Vec<(f64, f64)> = lo
            .iter()
            .zip(&hi)
            .map(|(&a, &b)| {
                (
                    libm::log(a.max(1) as f64),
                    libm::log(b.max(1) as f64),
                )
            })
            .collect();
        SyntheticAccuracyOracle {
            seed,
            saturation: 0.9,
            stage_weights: alloc::vec![1.0; space.stages.len()],
            noise_sd: 0.0,
            stage_log_bounds,
            res_lower: space.resolution.lower,
            res_upper: space.resolution.upper,
        }
    }

    /// Synthetic accuracy for a valid gene of the originating space.
    pub fn accuracy(&self, space: &SearchSpace, gene: &Gene) -> f64 {
        let arch = space.decode(gene).expect("valid gene");
        let flops = arch.stage_flops(space.stages.len());
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        let mut ripple = 0.0f64;
        for ((&f, &(lo, hi)), &w) in flops
            .iter()
            .zip(&self.stage_log_bounds)
            .zip(&self.stage_weights)
        {
            if hi > lo {
                let u = (libm::log(f.max(1) as f64) - lo) / (hi - lo);
                num += w * (u - 0.5);
                ripple += w * (1.0 - u) * libm::sin(2.0 * core::f64::consts::PI * RIPPLE_FREQ * u);
                den += w;
            }
        }
        // Resolution term, weighted by the mean stage weight so that an
        // all-zero weight vector gives a flat landscape.
        let w_res = if self.stage_weights.is_empty() {
            0.0
        } else {
            self.stage_weights.iter().sum::<f64>() / self.stage_weights.len() as f64
        };
        if self.res_upper > self.res_lower && w_res != 0.0 {
            let mut res = self.res_lower;
            if space.resolution.searchable() {
                res = gene.values[0];
            }
            let u = (res - self.res_lower) as f64 / (self.res_upper - self.res_lower) as f64;
            num += w_res * (u - 0.5);
            den += w_res;
        }
        let z = if den > 0.0 {
            LANDSCAPE_SCALE * num / den
        } else {
            0.0
        };
        let mut base = self.saturation / (1.0 + libm::exp(-z));
        if den > 0.0 {
            base += RIPPLE_AMP * ripple / den;
        }
        let noisy = if self.noise_sd > 0.0 {
            base + self.noise_sd * gaussian_for_gene(self.seed, gene)
        } else {
            base
        };
        noisy.clamp(0.0, 1.0)
    }
}

/// Standard normal draw keyed by (seed, gene), stable across calls.
fn gaussian_for_gene(seed: u64, gene: &Gene) -> f64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &v in &gene.values {
        h ^= v as u64;
        h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
        h ^= h >> 33;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceProfile {
    /// Smooth FLOPs/throughput with a slowdown on large spatial inputs.
    CpuLike,
    /// Staircase throughput: channel counts round up to a fixed quantum.
    DspLike,
}

/// Synthetic operator-additive device. Whole-network latency is by
/// construction the exact sum of its operator latencies.
#[derive(Debug, Clone)]
pub struct SyntheticDevice {
    pub profile: DeviceProfile,
    /// Base throughput in MACs per microsecond, per operator kind.
    pub base_rate: f64,
    pub channel_quantum: u32,
}

impl SyntheticDevice {
    pub fn cpu_like() -> Self {
        SyntheticDevice {
            profile: DeviceProfile::CpuLike,
            base_rate: 5000.0,
            channel_quantum: 1,
        }
    }

    pub fn dsp_like() -> Self {
        SyntheticDevice {
            profile: DeviceProfile::DspLike,
            base_rate: 20000.0,
            channel_quantum: 32,
        }
    }

    fn rate_for(&self, kind: OpKind) -> f64 {
        let factor = match kind {
            OpKind::Conv2d => 1.0,
            OpKind::InvertedBottleneck => 0.8,
            OpKind::ResidualBottleneck => 1.0,
            OpKind::AvgPool => 0.1,
            OpKind::Fc => 0.5,
        };
        self.base_rate * factor
    }

    /// Latency of one operator in integer microseconds (>= 1).
    pub fn op_latency_us(&self, key: &OperatorKey) -> u64 {
        let effective = match self.profile {
            DeviceProfile::CpuLike => *key,
            DeviceProfile::DspLike => {
                let q = self.channel_quantum;
                let round = |c: u32| ((c + q - 1) / q) * q;
                OperatorKey {
                    in_channels: round(key.in_channels),
                    out_channels: round(key.out_channels),
                    ..*key
                }
            }
        };
        let work = match key.op_kind {
            // avgpool has zero MACs; cost it by elements touched.
            OpKind::AvgPool => {
                (effective.input_h as u64) * (effective.input_w as u64)
                    * (effective.in_channels as u64)
            }
            _ => effective.flops(),
        };
        let slowdown = match self.profile {
            DeviceProfile::CpuLike => {
                1.0 + 2.0 * (key.input_h as f64 * key.input_w as f64) / (224.0 * 224.0)
            }
            DeviceProfile::DspLike => 1.0,
        };
        let us = libm::round(work as f64 * slowdown / self.rate_for(key.op_kind));
        (us as u64).max(1)
    }

    /// Direct whole-network latency: exact operator sum, in microseconds.
    pub fn network_latency_us(&self, space: &SearchSpace, gene: &Gene) -> u64 {
        let arch = space.decode(gene).expect("valid gene");
        arch.operators.iter().map(|op| self.op_latency_us(op)).sum()
    }
}

/// Deterministic synthetic energy oracle: device latency times an assumed
/// average power draw, in millijoules per inference.
#[derive(Debug, Clone)]
pub struct SyntheticEnergyOracle {
    pub device: SyntheticDevice,
    /// Average power in watts; mJ = ms * W.
    pub power_w: f64,
}

impl SyntheticEnergyOracle {
    pub fn new(device: SyntheticDevice) -> Self {
        SyntheticEnergyOracle {
            device,
            power_w: 2.0,
        }
    }

    pub fn energy_mj(&self, space: &SearchSpace, gene: &Gene) -> f64 {
        self.device.network_latency_us(space, gene) as f64 / 1000.0 * self.power_w
    }
}

/// Emit one latency record per distinct operator key reachable from the
/// space's decode outputs across all gene bounds, on the space's channel
/// grids. The stream is sorted by key, so regeneration is byte-identical.
pub fn generate_lut(device: &SyntheticDevice, space: &SearchSpace) -> Vec<(OperatorKey, u64)> {
    let mut keys: BTreeSet<OperatorKey> = BTreeSet::new();
    let resolutions: Vec<u32> = space.resolution.grid().collect();
    // Per-stage possible input channel sets (resolution independent).
    let mut in_sets: Vec<Vec<u32>> = Vec::with_capacity(space.stages.len());
    let mut current: Vec<u32> = alloc::vec![space.input_channels];
    for stage in &space.stages {
        in_sets.push(current.clone());
        let grid = |kind: HyperparamKind| -> Option<Vec<u32>> {
            stage
                .hyperparams
                .iter()
                .find(|h| h.kind == kind)
                .map(|h| h.grid().collect())
        };
        current = match stage.op_kind {
            OpKind::Conv2d | OpKind::Fc => grid(HyperparamKind::Channels).unwrap_or(current),
            OpKind::InvertedBottleneck => grid(HyperparamKind::Channels).unwrap_or(current),
            OpKind::ResidualBottleneck => {
                let cs = grid(HyperparamKind::Channels).unwrap_or_else(|| current.clone());
                let ts =
                    grid(HyperparamKind::ExpansionFactor).unwrap_or_else(|| alloc::vec![1]);
                let set: BTreeSet<u32> =
                    ts.iter().flat_map(|&t| cs.iter().map(move |&c| t * c)).collect();
                set.into_iter().collect()
            }
            OpKind::AvgPool => current,
        };
    }
    for &res in &resolutions {
        let mut h = res;
        for (stage, in_set) in space.stages.iter().zip(&in_sets) {
            let grid = |kind: HyperparamKind| -> Vec<u32> {
                stage
                    .hyperparams
                    .iter()
                    .find(|h| h.kind == kind)
                    .map(|h| h.grid().collect())
                    .unwrap_or_else(|| alloc::vec![1])
            };
            match stage.op_kind {
                OpKind::Conv2d => {
                    for &cin in in_set {
                        for cout in grid(HyperparamKind::Channels) {
                            keys.insert(OperatorKey {
                                op_kind: OpKind::Conv2d,
                                input_h: h,
                                input_w: h,
                                in_channels: cin,
                                out_channels: cout,
                                stride: stage.stride,
                                kernel_size: stage.kernel_size,
                                expansion: 1,
                            });
                        }
                    }
                    h = (h + stage.stride - 1) / stage.stride;
                }
                OpKind::InvertedBottleneck | OpKind::ResidualBottleneck => {
                    let n_max = stage
                        .hyperparams
                        .iter()
                        .find(|hp| hp.kind == HyperparamKind::Repeats)
                        .map(|hp| hp.upper)
                        .unwrap_or(1);
                    let h2 = (h + stage.stride - 1) / stage.stride;
                    for t in grid(HyperparamKind::ExpansionFactor) {
                        for c in grid(HyperparamKind::Channels) {
                            for &cin in in_set {
                                keys.insert(OperatorKey {
                                    op_kind: stage.op_kind,
                                    input_h: h,
                                    input_w: h,
                                    in_channels: cin,
                                    out_channels: c,
                                    stride: stage.stride,
                                    kernel_size: stage.kernel_size,
                                    expansion: t,
                                });
                            }
                            if n_max >= 2 {
                                let rep_in = match stage.op_kind {
                                    OpKind::ResidualBottleneck => t * c,
                                    _ => c,
                                };
                                keys.insert(OperatorKey {
                                    op_kind: stage.op_kind,
                                    input_h: h2,
                                    input_w: h2,
                                    in_channels: rep_in,
                                    out_channels: c,
                                    stride: 1,
                                    kernel_size: stage.kernel_size,
                                    expansion: t,
                                });
                            }
                        }
                    }
                    h = h2;
                }
                OpKind::AvgPool => {
                    for &cin in in_set {
                        keys.insert(OperatorKey {
                            op_kind: OpKind::AvgPool,
                            input_h: h,
                            input_w: h,
                            in_channels: cin,
                            out_channels: cin,
                            stride: 1,
                            kernel_size: h,
                            expansion: 1,
                        });
                    }
                    h = 1;
                }
                OpKind::Fc => {
                    for &cin in in_set {
                        for cout in grid(HyperparamKind::Channels) {
                            keys.insert(OperatorKey {
                                op_kind: OpKind::Fc,
                                input_h: 1,
                                input_w: 1,
                                in_channels: cin,
                                out_channels: cout,
                                stride: 1,
                                kernel_size: 1,
                                expansion: 1,
                            });
                        }
                    }
                }
            }
        }
    }
    keys.into_iter()
        .map(|k| {
            let us = device.op_latency_us(&k);
            (k, us)
        })
        .collect()
}
