//! Delimited-text artifact formats. Every format is line-oriented, carries a
//! version tag on its first line, and round-trips byte-identically: writers
//! are deterministic and floats use Rust's shortest round-trip formatting.
//!
//! Formats:
//! - space schema (`schema-v1`): stage/hyperparameter table mirroring the
//!   built-in adaptation spaces.
//! - gene pool (`pool-v1`): one gene per line.
//! - operator-latency LUT (`lut-v1`): platform header + one record per line.
//! - observation log (`obslog-v1`): gene, value, source tag, and the
//!   evaluation ordinal per line; consumed by the replay oracle and resume.
//! - GP model dump (`gpmodel-v1`): hyperparameters + normalized training
//!   rows; the factorization is recomputed on load.
//! - power trace (`trace-v1`): measurement header + one current sample per
//!   line.
//! - run manifest (`manifest-v1`): the exact command line, config digest,
//!   and input/output inventory of one command invocation.

use std::fmt::Write as _;

use chamnet_core::gp::GpModel;
use chamnet_core::resource::{LatencyLut, PowerTrace};
use chamnet_core::sampler::{Observation, Source};
use chamnet_core::space::{
    Gene, HyperparamDef, HyperparamKind, OpKind, OperatorKey, SearchSpace, StageDef,
};

use crate::CliError;

fn data_err(path: &str, line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{path}:{line}: {msg}"))
}

fn parse_u32(path: &str, line: usize, tok: &str) -> Result<u32, CliError> {
    tok.parse()
        .map_err(|_| data_err(path, line, format!("expected integer, got '{tok}'")))
}

fn parse_f64(path: &str, line: usize, tok: &str) -> Result<f64, CliError> {
    tok.parse()
        .map_err(|_| data_err(path, line, format!("expected number, got '{tok}'")))
}

// ---------------------------------------------------------------------------
// space schema

fn kind_tag(kind: HyperparamKind) -> &'static str {
    match kind {
        HyperparamKind::ExpansionFactor => "expansion",
        HyperparamKind::Channels => "channels",
        HyperparamKind::Repeats => "repeats",
        HyperparamKind::Resolution => "resolution",
        HyperparamKind::StrideFixed => "stride",
    }
}

fn kind_from_tag(tag: &str) -> Option<HyperparamKind> {
    Some(match tag {
        "expansion" => HyperparamKind::ExpansionFactor,
        "channels" => HyperparamKind::Channels,
        "repeats" => HyperparamKind::Repeats,
        "resolution" => HyperparamKind::Resolution,
        "stride" => HyperparamKind::StrideFixed,
        _ => return None,
    })
}

fn op_kind_from_tag(tag: &str) -> Option<OpKind> {
    Some(match tag {
        "conv2d" => OpKind::Conv2d,
        "inverted_bottleneck" => OpKind::InvertedBottleneck,
        "residual_bottleneck" => OpKind::ResidualBottleneck,
        "avgpool" => OpKind::AvgPool,
        "fc" => OpKind::Fc,
        _ => return None,
    })
}

/// Canonical schema text for a space. `parse_space(write_space(s)) == s`.
pub fn write_space(space: &SearchSpace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "schema-v1 {}", space.name);
    let _ = writeln!(out, "input_channels {}", space.input_channels);
    let r = &space.resolution;
    let _ = writeln!(
        out,
        "resolution {} {} {} {}",
        r.lower, r.upper, r.step, r.default
    );
    for stage in &space.stages {
        let _ = writeln!(
            out,
            "stage {} stride {} kernel {}",
            stage.op_kind.as_str(),
            stage.stride,
            stage.kernel_size
        );
        for hp in &stage.hyperparams {
            let _ = writeln!(
                out,
                "hp {} {} {} {} {} {}",
                kind_tag(hp.kind),
                hp.name,
                hp.lower,
                hp.upper,
                hp.step,
                hp.default
            );
        }
    }
    out
}

pub fn parse_space(text: &str, path: &str) -> Result<SearchSpace, CliError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| data_err(path, 1, "empty schema file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("schema-v1") {
        return Err(data_err(ln_path(path), ln, "expected 'schema-v1 <name>' header"));
    }
    let name = toks
        .next()
        .ok_or_else(|| data_err(path, ln, "missing space name"))?
        .to_string();

    let mut input_channels: Option<u32> = None;
    let mut resolution: Option<HyperparamDef> = None;
    let mut stages: Vec<StageDef> = Vec::new();
    for (ln, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "input_channels" => {
                if toks.len() != 2 {
                    return Err(data_err(path, ln, "input_channels takes one value"));
                }
                input_channels = Some(parse_u32(path, ln, toks[1])?);
            }
            "resolution" => {
                if toks.len() != 5 {
                    return Err(data_err(path, ln, "resolution takes lower upper step default"));
                }
                resolution = Some(HyperparamDef::new(
                    "resolution",
                    parse_u32(path, ln, toks[1])?,
                    parse_u32(path, ln, toks[2])?,
                    parse_u32(path, ln, toks[3])?,
                    parse_u32(path, ln, toks[4])?,
                    HyperparamKind::Resolution,
                ));
            }
            "stage" => {
                if toks.len() != 6 || toks[2] != "stride" || toks[4] != "kernel" {
                    return Err(data_err(
                        path,
                        ln,
                        "expected 'stage <op> stride <s> kernel <k>'",
                    ));
                }
                let op_kind = op_kind_from_tag(toks[1])
                    .ok_or_else(|| data_err(path, ln, format!("unknown op kind '{}'", toks[1])))?;
                stages.push(StageDef {
                    op_kind,
                    hyperparams: Vec::new(),
                    stride: parse_u32(path, ln, toks[3])?,
                    kernel_size: parse_u32(path, ln, toks[5])?,
                });
            }
            "hp" => {
                if toks.len() != 7 {
                    return Err(data_err(
                        path,
                        ln,
                        "expected 'hp <kind> <name> <lower> <upper> <step> <default>'",
                    ));
                }
                let kind = kind_from_tag(toks[1])
                    .ok_or_else(|| data_err(path, ln, format!("unknown kind '{}'", toks[1])))?;
                let def = HyperparamDef::new(
                    toks[2],
                    parse_u32(path, ln, toks[3])?,
                    parse_u32(path, ln, toks[4])?,
                    parse_u32(path, ln, toks[5])?,
                    parse_u32(path, ln, toks[6])?,
                    kind,
                );
                match stages.last_mut() {
                    Some(stage) => stage.hyperparams.push(def),
                    None => return Err(data_err(path, ln, "hp line before any stage")),
                }
            }
            other => return Err(data_err(path, ln, format!("unknown directive '{other}'"))),
        }
    }
    Ok(SearchSpace {
        name,
        resolution: resolution.ok_or_else(|| data_err(path, 0, "missing resolution line"))?,
        input_channels: input_channels
            .ok_or_else(|| data_err(path, 0, "missing input_channels line"))?,
        stages,
    })
}

fn ln_path(path: &str) -> &str {
    path
}

// ---------------------------------------------------------------------------
// gene pool

pub fn write_pool(space: &SearchSpace, pool: &[Gene]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "pool-v1 {} dims {} k {}",
        space.name,
        space.dims(),
        pool.len()
    );
    for gene in pool {
        out.push_str(&join_u32(&gene.values));
        out.push('\n');
    }
    out
}

pub fn parse_pool(text: &str, path: &str, space: &SearchSpace) -> Result<Vec<Gene>, CliError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| data_err(path, 1, "empty pool file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.first() != Some(&"pool-v1") {
        return Err(data_err(path, ln, "expected 'pool-v1' header"));
    }
    let mut pool = Vec::new();
    for (ln, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let gene = parse_gene_tokens(path, ln, &line.split_whitespace().collect::<Vec<_>>())?;
        if !space.validate(&gene) {
            return Err(data_err(path, ln, "gene does not validate against the space"));
        }
        pool.push(gene);
    }
    Ok(pool)
}

fn parse_gene_tokens(path: &str, ln: usize, toks: &[&str]) -> Result<Gene, CliError> {
    let mut values = Vec::with_capacity(toks.len());
    for t in toks {
        values.push(parse_u32(path, ln, t)?);
    }
    Ok(Gene::new(values))
}

fn join_u32(vals: &[u32]) -> String {
    let mut s = String::new();
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v}");
    }
    s
}

/// Parse a comma- or space-separated gene given on the command line.
pub fn parse_gene_arg(arg: &str) -> Result<Gene, CliError> {
    let values: Result<Vec<u32>, _> = arg
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u32>())
        .collect();
    values
        .map(Gene::new)
        .map_err(|_| CliError::Usage(format!("gene '{arg}' is not a list of integers")))
}

// ---------------------------------------------------------------------------
// latency LUT

pub fn write_lut(lut: &LatencyLut) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "lut-v1 {}", lut.platform);
    for (k, us) in lut.records() {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {} {}",
            k.op_kind.as_str(),
            k.input_h,
            k.input_w,
            k.in_channels,
            k.out_channels,
            k.stride,
            k.kernel_size,
            k.expansion,
            us
        );
    }
    out
}

pub fn parse_lut(text: &str, path: &str) -> Result<LatencyLut, CliError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| data_err(path, 1, "empty LUT file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("lut-v1") {
        return Err(data_err(path, ln, "expected 'lut-v1 <platform>' header"));
    }
    let platform = toks
        .next()
        .ok_or_else(|| data_err(path, ln, "missing platform id"))?
        .to_string();
    let mut records = Vec::new();
    for (ln, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 9 {
            return Err(data_err(path, ln, "expected 9 fields per record"));
        }
        let op_kind = op_kind_from_tag(toks[0])
            .ok_or_else(|| data_err(path, ln, format!("unknown op kind '{}'", toks[0])))?;
        let key = OperatorKey {
            op_kind,
            input_h: parse_u32(path, ln, toks[1])?,
            input_w: parse_u32(path, ln, toks[2])?,
            in_channels: parse_u32(path, ln, toks[3])?,
            out_channels: parse_u32(path, ln, toks[4])?,
            stride: parse_u32(path, ln, toks[5])?,
            kernel_size: parse_u32(path, ln, toks[6])?,
            expansion: parse_u32(path, ln, toks[7])?,
        };
        let us: u64 = toks[8]
            .parse()
            .map_err(|_| data_err(path, ln, format!("bad latency '{}'", toks[8])))?;
        records.push((key, us));
    }
    Ok(LatencyLut::build(&platform, records))
}

// ---------------------------------------------------------------------------
// observation log

pub fn write_obslog(space: &SearchSpace, observations: &[Observation]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "obslog-v1 {} dims {}", space.name, space.dims());
    let _ = writeln!(out, "# columns: gene[dims] value source ordinal");
    for (i, obs) in observations.iter().enumerate() {
        let _ = writeln!(
            out,
            "{} {} {} {}",
            join_u32(&obs.gene.values),
            obs.value,
            obs.source.as_str(),
            i + 1
        );
    }
    out
}

pub fn parse_obslog(
    text: &str,
    path: &str,
    space: &SearchSpace,
) -> Result<Vec<Observation>, CliError> {
    let dims = space.dims();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| data_err(path, 1, "empty observation log"))?;
    if header.split_whitespace().next() != Some("obslog-v1") {
        return Err(data_err(path, ln, "expected 'obslog-v1' header"));
    }
    let mut observations = Vec::new();
    for (ln, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != dims + 3 {
            return Err(data_err(
                path,
                ln,
                format!("expected {} fields, got {}", dims + 3, toks.len()),
            ));
        }
        let gene = parse_gene_tokens(path, ln, &toks[..dims])?;
        if !space.validate(&gene) {
            return Err(data_err(path, ln, "gene does not validate against the space"));
        }
        let value = parse_f64(path, ln, toks[dims])?;
        let source = match toks[dims + 1] {
            "initial" => Source::Initial,
            "explore" => Source::Explore,
            "exploit" => Source::Exploit,
            other => return Err(data_err(path, ln, format!("unknown source '{other}'"))),
        };
        observations.push(Observation {
            gene,
            value,
            source,
        });
    }
    Ok(observations)
}

// ---------------------------------------------------------------------------
// GP model dump

pub struct GpDump {
    pub space_name: String,
    /// Platform id for energy models; absent for accuracy models.
    pub platform: Option<String>,
    pub model: GpModel,
}

pub fn write_gp(space_name: &str, platform: Option<&str>, model: &GpModel) -> String {
    let mut out = String::new();
    match platform {
        Some(p) => {
            let _ = writeln!(out, "gpmodel-v1 {space_name} {p}");
        }
        None => {
            let _ = writeln!(out, "gpmodel-v1 {space_name}");
        }
    }
    let _ = writeln!(out, "dims {} count {}", model.dims(), model.len());
    let _ = writeln!(
        out,
        "gamma {} noise_var {} mean_offset {}",
        model.gamma(),
        model.noise_var(),
        model.mean_offset()
    );
    for (x, t) in model.inputs().iter().zip(model.targets()) {
        let mut row = String::from("obs");
        for v in x {
            let _ = write!(row, " {v}");
        }
        let _ = writeln!(out, "{row} {t}");
    }
    out
}

pub fn parse_gp(text: &str, path: &str) -> Result<GpDump, CliError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| data_err(path, 1, "empty model file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("gpmodel-v1") {
        return Err(data_err(path, ln, "expected 'gpmodel-v1 <space>' header"));
    }
    let space_name = toks
        .next()
        .ok_or_else(|| data_err(path, ln, "missing space name"))?
        .to_string();
    let platform = toks.next().map(str::to_string);
    let (ln, dims_line) = lines
        .next()
        .ok_or_else(|| data_err(path, 2, "missing dims line"))?;
    let toks: Vec<&str> = dims_line.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "dims" || toks[2] != "count" {
        return Err(data_err(path, ln, "expected 'dims <d> count <n>'"));
    }
    let dims = parse_u32(path, ln, toks[1])? as usize;
    let count = parse_u32(path, ln, toks[3])? as usize;
    let (ln, hp_line) = lines
        .next()
        .ok_or_else(|| data_err(path, 3, "missing hyperparameter line"))?;
    let toks: Vec<&str> = hp_line.split_whitespace().collect();
    if toks.len() != 6 || toks[0] != "gamma" || toks[2] != "noise_var" || toks[4] != "mean_offset" {
        return Err(data_err(
            path,
            ln,
            "expected 'gamma <g> noise_var <v> mean_offset <m>'",
        ));
    }
    let gamma = parse_f64(path, ln, toks[1])?;
    let noise_var = parse_f64(path, ln, toks[3])?;
    let mean_offset = parse_f64(path, ln, toks[5])?;
    let mut inputs = Vec::with_capacity(count);
    let mut targets = Vec::with_capacity(count);
    for (ln, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks[0] != "obs" || toks.len() != dims + 2 {
            return Err(data_err(
                path,
                ln,
                format!("expected 'obs' with {} numbers", dims + 1),
            ));
        }
        let mut x = Vec::with_capacity(dims);
        for t in &toks[1..=dims] {
            x.push(parse_f64(path, ln, t)?);
        }
        inputs.push(x);
        targets.push(parse_f64(path, ln, toks[dims + 1])?);
    }
    if inputs.len() != count {
        return Err(data_err(
            path,
            0,
            format!("header count {count} but {} rows", inputs.len()),
        ));
    }
    let model = GpModel::fit(inputs, targets, gamma, noise_var)
        .map_err(|e| CliError::Data(format!("{path}: refit failed: {e}")))?
        .with_mean_offset(mean_offset);
    Ok(GpDump {
        space_name,
        platform,
        model,
    })
}

// ---------------------------------------------------------------------------
// power trace

pub fn parse_trace(text: &str, path: &str) -> Result<PowerTrace, CliError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| data_err(path, 1, "empty trace file"))?;
    if header.trim() != "trace-v1" {
        return Err(data_err(path, ln, "expected 'trace-v1' header"));
    }
    let mut voltage = None;
    let mut interval = None;
    let mut baseline = None;
    let mut runs = None;
    let mut samples = Vec::new();
    for (ln, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "voltage" if toks.len() == 2 => voltage = Some(parse_f64(path, ln, toks[1])?),
            "interval" if toks.len() == 2 => interval = Some(parse_f64(path, ln, toks[1])?),
            "baseline" if toks.len() == 2 => baseline = Some(parse_f64(path, ln, toks[1])?),
            "runs" if toks.len() == 2 => runs = Some(parse_u32(path, ln, toks[1])?),
            _ if toks.len() == 1 => samples.push(parse_f64(path, ln, toks[0])?),
            _ => return Err(data_err(path, ln, "malformed trace line")),
        }
    }
    let missing = |what: &str| CliError::Data(format!("{path}: missing '{what}' header field"));
    Ok(PowerTrace {
        voltage: voltage.ok_or_else(|| missing("voltage"))?,
        sample_interval: interval.ok_or_else(|| missing("interval"))?,
        baseline_current: baseline.ok_or_else(|| missing("baseline"))?,
        run_count: runs.ok_or_else(|| missing("runs"))?,
        samples,
    })
}

// ---------------------------------------------------------------------------
// run manifest

pub struct Manifest {
    pub toolkit_version: String,
    /// Argv after the program name, space-joined.
    pub command: String,
    pub seed: u64,
    pub config_digest: String,
    pub inputs: Vec<String>,
    /// File names inside the output directory.
    pub outputs: Vec<String>,
}

pub fn write_manifest(m: &Manifest) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "manifest-v1");
    let _ = writeln!(out, "toolkit_version {}", m.toolkit_version);
    let _ = writeln!(out, "command {}", m.command);
    let _ = writeln!(out, "seed {}", m.seed);
    let _ = writeln!(out, "config_digest {}", m.config_digest);
    for i in &m.inputs {
        let _ = writeln!(out, "input {i}");
    }
    for o in &m.outputs {
        let _ = writeln!(out, "output {o}");
    }
    out
}

pub fn parse_manifest(text: &str, path: &str) -> Result<Manifest, CliError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| data_err(path, 1, "empty manifest"))?;
    if header.trim() != "manifest-v1" {
        return Err(data_err(path, ln, "expected 'manifest-v1' header"));
    }
    let mut m = Manifest {
        toolkit_version: String::new(),
        command: String::new(),
        seed: 0,
        config_digest: String::new(),
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    for (ln, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "toolkit_version" => m.toolkit_version = rest.to_string(),
            "command" => m.command = rest.to_string(),
            "seed" => {
                m.seed = rest
                    .parse()
                    .map_err(|_| data_err(path, ln, "bad seed"))?
            }
            "config_digest" => m.config_digest = rest.to_string(),
            "input" => m.inputs.push(rest.to_string()),
            "output" => m.outputs.push(rest.to_string()),
            other => return Err(data_err(path, ln, format!("unknown field '{other}'"))),
        }
    }
    Ok(m)
}
