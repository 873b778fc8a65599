//! Constrained-search objective: predicted accuracy minus a resource
//! penalty.
//!
//! Ramp mode penalizes by `(alpha * max(F - thres, 0))^w`, so the penalty
//! grows with the size of the violation and is zero on the feasible side.
//! Step mode applies the flat penalty `alpha^w` whenever `F > thres`.
//! The boundary `F = thres` counts as feasible in both modes.

use core::fmt;

use crate::gp::GpModel;
use crate::resource::{EnergyModel, LatencyLut, ResourceError};
use crate::sampler::SamplerError;
use crate::space::{Gene, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyMode {
    /// Penalty scales with the resource excess: `(alpha * (F - thres))^w`.
    Ramp,
    /// Flat `alpha^w` penalty for any violation.
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceKind {
    Latency,
    Energy,
}

impl ResourceKind {
    pub fn unit(&self) -> &'static str {
        match self {
            ResourceKind::Latency => "ms",
            ResourceKind::Energy => "mJ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessParams {
    /// Penalty coefficient, in 1/ms or 1/mJ.
    pub alpha: f64,
    /// Penalty exponent.
    pub w: f64,
    /// Resource budget, in ms or mJ.
    pub thres: f64,
    pub penalty_mode: PenaltyMode,
    pub resource_kind: ResourceKind,
}

impl FitnessParams {
    pub fn latency_default(thres_ms: f64) -> Self {
        FitnessParams {
            alpha: 10.0,
            w: 2.0,
            thres: thres_ms,
            penalty_mode: PenaltyMode::Ramp,
            resource_kind: ResourceKind::Latency,
        }
    }

    pub fn energy_default(thres_mj: f64) -> Self {
        FitnessParams {
            alpha: 10.0,
            w: 2.0,
            thres: thres_mj,
            penalty_mode: PenaltyMode::Ramp,
            resource_kind: ResourceKind::Energy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessResult {
    pub fitness: f64,
    pub accuracy: f64,
    pub resource: f64,
    pub feasible: bool,
}

/// The resource predictor bound to a fitness evaluation: a latency LUT or
/// an energy GP.
pub enum ResourcePredictor<'a> {
    Latency(&'a LatencyLut),
    /// Latency LUT with channel interpolation on missing keys.
    LatencyInterpolated(&'a LatencyLut),
    Energy(&'a EnergyModel),
}

impl<'a> ResourcePredictor<'a> {
    pub fn predict(&self, space: &SearchSpace, gene: &Gene) -> Result<f64, FitnessError> {
        let decode = |gene: &Gene| {
            space.decode(gene).map_err(|e| {
                FitnessError::Sampler(SamplerError::InvalidConfig(alloc::format!("{e}")))
            })
        };
        match self {
            ResourcePredictor::Latency(lut) => Ok(lut.predict_latency_ms(&decode(gene)?)?),
            ResourcePredictor::LatencyInterpolated(lut) => {
                Ok(lut.network_latency_us_interpolated(&decode(gene)?)? as f64 / 1000.0)
            }
            ResourcePredictor::Energy(model) => Ok(model.predict_mj(space, gene)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitnessError {
    Resource(ResourceError),
    Sampler(SamplerError),
    Gp(crate::gp::GpError),
}

impl fmt::Display for FitnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitnessError::Resource(e) => write!(f, "{e}"),
            FitnessError::Sampler(e) => write!(f, "{e}"),
            FitnessError::Gp(e) => write!(f, "{e}"),
        }
    }
}

impl From<ResourceError> for FitnessError {
    fn from(e: ResourceError) -> Self {
        FitnessError::Resource(e)
    }
}

impl From<SamplerError> for FitnessError {
    fn from(e: SamplerError) -> Self {
        FitnessError::Sampler(e)
    }
}

impl From<crate::gp::GpError> for FitnessError {
    fn from(e: crate::gp::GpError) -> Self {
        FitnessError::Gp(e)
    }
}

/// Penalized fitness from an accuracy value and a resource value.
pub fn score(accuracy: f64, resource: f64, params: &FitnessParams) -> FitnessResult {
    let excess = resource - params.thres;
    let feasible = excess <= 0.0;
    let penalty = if feasible {
        0.0
    } else {
        match params.penalty_mode {
            PenaltyMode::Ramp => libm::pow(params.alpha * excess, params.w),
            PenaltyMode::Step => libm::pow(params.alpha, params.w),
        }
    };
    FitnessResult {
        fitness: accuracy - penalty,
        accuracy,
        resource,
        feasible,
    }
}

/// Evaluate the objective for one gene from the accuracy GP and the bound
/// resource predictor.
pub fn evaluate(
    space: &SearchSpace,
    gene: &Gene,
    acc_model: &GpModel,
    res_predictor: &ResourcePredictor<'_>,
    params: &FitnessParams,
) -> Result<FitnessResult, FitnessError> {
    let accuracy = acc_model.predict(&space.normalize(gene))?.mean;
    let resource = res_predictor.predict(space, gene)?;
    Ok(score(accuracy, resource, params))
}
