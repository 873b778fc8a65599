//! Gene-encoded architecture search spaces.
//!
//! A [`SearchSpace`] is an ordered list of stages, each carrying bounded
//! integer hyperparameters (expansion factor, output channels, repeat count).
//! A [`Gene`] assigns one value to every searchable hyperparameter, in schema
//! order: input resolution first (when searched), then per-stage
//! hyperparameters in stage order. Genes decode into a flat list of operator
//! instances with resolved shapes, from which FLOPs (multiply-accumulates)
//! are counted.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// What a hyperparameter controls. `StrideFixed` entries are never searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperparamKind {
    ExpansionFactor,
    Channels,
    Repeats,
    Resolution,
    StrideFixed,
}

/// One bounded hyperparameter. `step` is the search granularity: legal
/// values are `lower, lower+step, ..., upper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperparamDef {
    pub name: String,
    pub lower: u32,
    pub upper: u32,
    pub step: u32,
    pub default: u32,
    pub kind: HyperparamKind,
}

impl HyperparamDef {
    pub fn new(
        name: &str,
        lower: u32,
        upper: u32,
        step: u32,
        default: u32,
        kind: HyperparamKind,
    ) -> Self {
        debug_assert!(lower <= upper && lower > 0 && step > 0);
        debug_assert!(kind != HyperparamKind::StrideFixed || lower == upper);
        HyperparamDef {
            name: String::from(name),
            lower,
            upper,
            step,
            default,
            kind,
        }
    }

    pub fn fixed(name: &str, value: u32, kind: HyperparamKind) -> Self {
        Self::new(name, value, value, 1, value, kind)
    }

    /// A hyperparameter is searched only when its range is non-degenerate.
    pub fn searchable(&self) -> bool {
        self.lower < self.upper
    }

    /// Number of legal values on this definition's grid.
    pub fn grid_len(&self) -> u64 {
        ((self.upper - self.lower) / self.step) as u64 + 1
    }

    pub fn contains(&self, v: u32) -> bool {
        v >= self.lower && v <= self.upper && (v - self.lower) % self.step == 0
    }

    /// Values on the grid, ascending.
    pub fn grid(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.grid_len()).map(move |i| self.lower + (i as u32) * self.step)
    }
}

/// Operator kinds appearing in the built-in spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Conv2d,
    InvertedBottleneck,
    ResidualBottleneck,
    AvgPool,
    Fc,
}

impl OpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OpKind::Conv2d => "conv2d",
            OpKind::InvertedBottleneck => "inverted_bottleneck",
            OpKind::ResidualBottleneck => "residual_bottleneck",
            OpKind::AvgPool => "avgpool",
            OpKind::Fc => "fc",
        }
    }
}

/// One stage of a space: an operator kind, its hyperparameters, and a fixed
/// stride applied by the first block of the stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageDef {
    pub op_kind: OpKind,
    pub hyperparams: Vec<HyperparamDef>,
    pub stride: u32,
    pub kernel_size: u32,
}

impl StageDef {
    fn find(&self, kind: HyperparamKind) -> Option<&HyperparamDef> {
        self.hyperparams.iter().find(|h| h.kind == kind)
    }
}

/// Canonical description of one concrete operator instance. Two identical
/// operator configurations always compare equal, which makes this the key
/// type for the latency lookup table.
///
/// For bottleneck blocks the whole block is one operator: `out_channels` is
/// the block's channel hyperparameter `c` and `expansion` its factor `t`.
/// An inverted bottleneck outputs `c` channels; a residual bottleneck
/// outputs `t * c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperatorKey {
    pub op_kind: OpKind,
    pub input_h: u32,
    pub input_w: u32,
    pub in_channels: u32,
    pub out_channels: u32,
    pub stride: u32,
    pub kernel_size: u32,
    pub expansion: u32,
}

impl OperatorKey {
    /// Spatial size after applying the stride (same-padding convention).
    pub fn output_hw(&self) -> (u32, u32) {
        (
            div_ceil(self.input_h, self.stride),
            div_ceil(self.input_w, self.stride),
        )
    }

    /// Channel count seen by the following operator.
    pub fn output_channels(&self) -> u32 {
        match self.op_kind {
            OpKind::ResidualBottleneck => self.expansion * self.out_channels,
            _ => self.out_channels,
        }
    }

    /// Multiply-accumulate count of this operator instance.
    pub fn flops(&self) -> u64 {
        let (oh, ow) = self.output_hw();
        let (oh, ow) = (oh as u64, ow as u64);
        let (h, w) = (self.input_h as u64, self.input_w as u64);
        let cin = self.in_channels as u64;
        let cout = self.out_channels as u64;
        let k = self.kernel_size as u64;
        let t = self.expansion as u64;
        match self.op_kind {
            OpKind::Conv2d => oh * ow * k * k * cin * cout,
            OpKind::InvertedBottleneck => {
                let hidden = t * cin;
                // The expansion conv is omitted when t = 1 (MobileNetV2 convention).
                let expand = if t > 1 { h * w * cin * hidden } else { 0 };
                let depthwise = oh * ow * hidden * k * k;
                let project = oh * ow * hidden * cout;
                expand + depthwise + project
            }
            OpKind::ResidualBottleneck => {
                let width = cout; // bottleneck width c; block output is t*c
                let reduce = h * w * cin * width;
                let conv3 = oh * ow * width * width * k * k;
                let expand = oh * ow * width * (t * width);
                let shortcut = if cin != t * width || self.stride != 1 {
                    oh * ow * cin * (t * width)
                } else {
                    0
                };
                reduce + conv3 + expand + shortcut
            }
            OpKind::AvgPool => 0,
            OpKind::Fc => cin * cout,
        }
    }
}

fn div_ceil(a: u32, b: u32) -> u32 {
    (a + b - 1) / b
}

/// A decoded architecture: the flat operator list in execution order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchitectureDescription {
    pub operators: Vec<OperatorKey>,
    /// Stage index of each operator, parallel to `operators`. Resolution is
    /// not a stage; indices refer to `SearchSpace::stages`.
    pub stage_of: Vec<usize>,
}

impl ArchitectureDescription {
    pub fn total_flops(&self) -> u64 {
        self.operators.iter().map(|op| op.flops()).sum()
    }

    /// FLOPs aggregated per stage of the originating space.
    pub fn stage_flops(&self, n_stages: usize) -> Vec<u64> {
        let mut acc = alloc::vec![0u64; n_stages];
        for (op, &s) in self.operators.iter().zip(&self.stage_of) {
            acc[s] += op.flops();
        }
        acc
    }
}

/// An ordered stage/hyperparameter schema with per-gene bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    pub name: String,
    pub resolution: HyperparamDef,
    pub stages: Vec<StageDef>,
    pub input_channels: u32,
}

/// Integer hyperparameter vector encoding one architecture.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gene {
    pub values: Vec<u32>,
}

impl Gene {
    pub fn new(values: Vec<u32>) -> Self {
        Gene { values }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceError {
    /// Gene fails length or bound validation against the space.
    InvalidGene { reason: String },
}

impl fmt::Display for SpaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceError::InvalidGene { reason } => write!(f, "invalid gene: {reason}"),
        }
    }
}

impl SearchSpace {
    /// Searchable hyperparameter definitions in gene order.
    pub fn searchable_defs(&self) -> Vec<&HyperparamDef> {
        let mut defs = Vec::new();
        if self.resolution.searchable() {
            defs.push(&self.resolution);
        }
        for stage in &self.stages {
            for h in &stage.hyperparams {
                if h.searchable() {
                    defs.push(h);
                }
            }
        }
        defs
    }

    /// Number of searchable hyperparameters (the gene length).
    pub fn dims(&self) -> usize {
        self.searchable_defs().len()
    }

    /// Number of distinct genes, saturating at `u128::MAX`.
    pub fn cardinality(&self) -> u128 {
        self.searchable_defs()
            .iter()
            .fold(1u128, |acc, d| acc.saturating_mul(d.grid_len() as u128))
    }

    /// Gene built from every hyperparameter's default value.
    pub fn default_gene(&self) -> Gene {
        Gene::new(self.searchable_defs().iter().map(|d| d.default).collect())
    }

    /// Gene with every coordinate at its lower (upper) bound.
    pub fn corner_gene(&self, upper: bool) -> Gene {
        Gene::new(
            self.searchable_defs()
                .iter()
                .map(|d| if upper { d.upper } else { d.lower })
                .collect(),
        )
    }

    /// True iff the gene has the right length and every entry sits on its
    /// hyperparameter's grid. Total function.
    pub fn validate(&self, gene: &Gene) -> bool {
        let defs = self.searchable_defs();
        gene.values.len() == defs.len()
            && gene
                .values
                .iter()
                .zip(&defs)
                .all(|(&v, d)| d.contains(v))
    }

    /// Map each gene coordinate affinely to [0, 1] using its bounds.
    pub fn normalize(&self, gene: &Gene) -> Vec<f64> {
        self.searchable_defs()
            .iter()
            .zip(&gene.values)
            .map(|(d, &v)| (v - d.lower) as f64 / (d.upper - d.lower) as f64)
            .collect()
    }

    /// Resolve the value of a hyperparameter under a gene: searchable defs
    /// consume the next gene entry, fixed defs yield their sole value.
    fn resolved_values<'a>(&'a self, gene: &'a Gene) -> ResolvedValues<'a> {
        ResolvedValues {
            gene: &gene.values,
            cursor: 0,
            _space: self,
        }
    }

    /// Decode a gene into the flat operator list with resolved shapes.
    /// Repeated blocks are expanded: the first repeat carries the stage
    /// stride, subsequent repeats use stride 1.
    pub fn decode(&self, gene: &Gene) -> Result<ArchitectureDescription, SpaceError> {
        if !self.validate(gene) {
            return Err(SpaceError::InvalidGene {
                reason: String::from("length or bounds violated"),
            });
        }
        let mut rv = self.resolved_values(gene);
        let res = rv.take(&self.resolution);
        let mut h = res;
        let mut w = res;
        let mut in_ch = self.input_channels;
        let mut operators = Vec::new();
        let mut stage_of = Vec::new();
        for (si, stage) in self.stages.iter().enumerate() {
            let t = stage
                .find(HyperparamKind::ExpansionFactor)
                .map(|d| rv.take(d))
                .unwrap_or(1);
            let c = stage
                .find(HyperparamKind::Channels)
                .map(|d| rv.take(d))
                .unwrap_or(in_ch);
            let n = stage
                .find(HyperparamKind::Repeats)
                .map(|d| rv.take(d))
                .unwrap_or(1);
            match stage.op_kind {
                OpKind::Conv2d => {
                    let key = OperatorKey {
                        op_kind: OpKind::Conv2d,
                        input_h: h,
                        input_w: w,
                        in_channels: in_ch,
                        out_channels: c,
                        stride: stage.stride,
                        kernel_size: stage.kernel_size,
                        expansion: 1,
                    };
                    let (oh, ow) = key.output_hw();
                    in_ch = key.output_channels();
                    h = oh;
                    w = ow;
                    operators.push(key);
                    stage_of.push(si);
                }
                OpKind::InvertedBottleneck | OpKind::ResidualBottleneck => {
                    for rep in 0..n {
                        let stride = if rep == 0 { stage.stride } else { 1 };
                        let key = OperatorKey {
                            op_kind: stage.op_kind,
                            input_h: h,
                            input_w: w,
                            in_channels: in_ch,
                            out_channels: c,
                            stride,
                            kernel_size: stage.kernel_size,
                            expansion: t,
                        };
                        let (oh, ow) = key.output_hw();
                        in_ch = key.output_channels();
                        h = oh;
                        w = ow;
                        operators.push(key);
                        stage_of.push(si);
                    }
                }
                OpKind::AvgPool => {
                    let key = OperatorKey {
                        op_kind: OpKind::AvgPool,
                        input_h: h,
                        input_w: w,
                        in_channels: in_ch,
                        out_channels: in_ch,
                        stride: 1,
                        kernel_size: h,
                        expansion: 1,
                    };
                    h = 1;
                    w = 1;
                    operators.push(key);
                    stage_of.push(si);
                }
                OpKind::Fc => {
                    let key = OperatorKey {
                        op_kind: OpKind::Fc,
                        input_h: 1,
                        input_w: 1,
                        in_channels: in_ch,
                        out_channels: c,
                        stride: 1,
                        kernel_size: 1,
                        expansion: 1,
                    };
                    in_ch = c;
                    operators.push(key);
                    stage_of.push(si);
                }
            }
        }
        Ok(ArchitectureDescription {
            operators,
            stage_of,
        })
    }

    /// Total multiply-accumulate count of the decoded architecture.
    pub fn flops(&self, gene: &Gene) -> Result<u64, SpaceError> {
        Ok(self.decode(gene)?.total_flops())
    }

    /// Round all channel-kind hyperparameters to a coarser grid. Lower and
    /// upper bounds are pulled inward onto multiples of `step`; defaults are
    /// clamped onto the new grid.
    pub fn with_channel_step(mut self, step: u32) -> SearchSpace {
        for stage in &mut self.stages {
            for h in &mut stage.hyperparams {
                if h.kind == HyperparamKind::Channels && h.searchable() {
                    let lower = div_ceil(h.lower, step) * step;
                    let upper = (h.upper / step) * step;
                    if lower < upper {
                        h.lower = lower;
                        h.upper = upper;
                        h.step = step;
                        let d = h.default.clamp(lower, upper);
                        h.default = lower + (d - lower) / step * step;
                    }
                }
            }
        }
        self
    }
}

struct ResolvedValues<'a> {
    gene: &'a [u32],
    cursor: usize,
    _space: &'a SearchSpace,
}

impl<'a> ResolvedValues<'a> {
    fn take(&mut self, def: &HyperparamDef) -> u32 {
        if def.searchable() {
            let v = self.gene[self.cursor];
            self.cursor += 1;
            v
        } else {
            def.lower
        }
    }
}

fn bottleneck(
    kind: OpKind,
    t: (u32, u32, u32),
    c: (u32, u32, u32),
    n: (u32, u32, u32),
    stride: u32,
    idx: usize,
) -> StageDef {
    let mut hp = Vec::new();
    let mut name = String::from("s");
    name.push((b'0' + (idx % 10) as u8) as char);
    let mk = |suffix: &str| {
        let mut s = name.clone();
        s.push('_');
        s.push_str(suffix);
        s
    };
    hp.push(HyperparamDef::new(
        &mk("t"),
        t.0,
        t.1,
        1,
        t.2,
        HyperparamKind::ExpansionFactor,
    ));
    hp.push(HyperparamDef::new(
        &mk("c"),
        c.0,
        c.1,
        1,
        c.2,
        HyperparamKind::Channels,
    ));
    hp.push(HyperparamDef::new(
        &mk("n"),
        n.0,
        n.1,
        1,
        n.2,
        HyperparamKind::Repeats,
    ));
    StageDef {
        op_kind: kind,
        hyperparams: hp,
        stride,
        kernel_size: 3,
    }
}

/// The mobile adaptation space: inverted-bottleneck stages with searchable
/// expansion factors, channel counts, repeat counts, and input resolution
/// (multiples of 8). 21 searchable hyperparameters.
pub fn chamnet_mobile() -> SearchSpace {
    let ib = OpKind::InvertedBottleneck;
    SearchSpace {
        name: String::from("chamnet-mobile"),
        resolution: HyperparamDef::new("resolution", 96, 224, 8, 224, HyperparamKind::Resolution),
        input_channels: 3,
        stages: alloc::vec![
            StageDef {
                op_kind: OpKind::Conv2d,
                hyperparams: alloc::vec![HyperparamDef::new(
                    "stem_c",
                    8,
                    48,
                    1,
                    32,
                    HyperparamKind::Channels
                )],
                stride: 2,
                kernel_size: 3,
            },
            bottleneck(ib, (1, 1, 1), (8, 32, 16), (1, 1, 1), 1, 1),
            bottleneck(ib, (2, 6, 6), (8, 40, 24), (1, 2, 2), 2, 2),
            bottleneck(ib, (2, 6, 6), (8, 48, 32), (1, 3, 3), 2, 3),
            bottleneck(ib, (2, 6, 6), (16, 96, 64), (1, 4, 4), 2, 4),
            bottleneck(ib, (2, 6, 6), (32, 160, 96), (1, 3, 3), 1, 5),
            bottleneck(ib, (2, 6, 6), (56, 256, 160), (1, 3, 3), 2, 6),
            bottleneck(ib, (2, 6, 6), (96, 480, 320), (1, 1, 1), 1, 7),
            StageDef {
                op_kind: OpKind::Conv2d,
                hyperparams: alloc::vec![HyperparamDef::new(
                    "head_c",
                    1024,
                    2048,
                    1,
                    1280,
                    HyperparamKind::Channels
                )],
                stride: 1,
                kernel_size: 1,
            },
            StageDef {
                op_kind: OpKind::AvgPool,
                hyperparams: Vec::new(),
                stride: 1,
                kernel_size: 1,
            },
            StageDef {
                op_kind: OpKind::Fc,
                hyperparams: alloc::vec![HyperparamDef::fixed(
                    "classes",
                    1000,
                    HyperparamKind::Channels
                )],
                stride: 1,
                kernel_size: 1,
            },
        ],
    }
}

/// The server adaptation space: residual-bottleneck stages at a fixed 224
/// input resolution. 13 searchable hyperparameters.
pub fn chamnet_res() -> SearchSpace {
    let rb = OpKind::ResidualBottleneck;
    SearchSpace {
        name: String::from("chamnet-res"),
        resolution: HyperparamDef::fixed("resolution", 224, HyperparamKind::Resolution),
        input_channels: 3,
        stages: alloc::vec![
            StageDef {
                op_kind: OpKind::Conv2d,
                hyperparams: alloc::vec![HyperparamDef::new(
                    "stem_c",
                    16,
                    64,
                    1,
                    64,
                    HyperparamKind::Channels
                )],
                stride: 2,
                kernel_size: 7,
            },
            bottleneck(rb, (2, 6, 4), (16, 64, 64), (1, 3, 3), 2, 1),
            bottleneck(rb, (2, 6, 4), (32, 128, 128), (1, 8, 4), 2, 2),
            bottleneck(rb, (2, 6, 4), (64, 256, 256), (1, 36, 6), 2, 3),
            bottleneck(rb, (2, 6, 4), (128, 512, 512), (1, 3, 3), 2, 4),
            StageDef {
                op_kind: OpKind::AvgPool,
                hyperparams: Vec::new(),
                stride: 1,
                kernel_size: 1,
            },
            StageDef {
                op_kind: OpKind::Fc,
                hyperparams: alloc::vec![HyperparamDef::fixed(
                    "classes",
                    1000,
                    HyperparamKind::Channels
                )],
                stride: 1,
                kernel_size: 1,
            },
        ],
    }
}

/// Look up a built-in space by name.
pub fn builtin(name: &str) -> Option<SearchSpace> {
    match name {
        "chamnet-mobile" => Some(chamnet_mobile()),
        "chamnet-res" => Some(chamnet_res()),
        _ => None,
    }
}
