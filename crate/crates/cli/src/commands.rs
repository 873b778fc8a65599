//! Implementations of the subcommands. Every command that produces files
//! writes them into its `--out` directory together with the effective
//! configuration (`config.toml`) and a run manifest (`manifest.txt`)
//! recording the exact argv and the config digest.

use std::path::{Path, PathBuf};

use chamnet_core::ees::{self, SearchResult};
use chamnet_core::fitness::{FitnessParams, ResourceKind, ResourcePredictor};
use chamnet_core::gp::GpModel;
use chamnet_core::oracle::SyntheticDevice;
use chamnet_core::resource::LatencyLut;
use chamnet_core::sampler::{self, Observation, SamplerConfig, SamplerError};
use chamnet_core::space::{self, Gene, SearchSpace};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::formats::{self, Manifest};
use crate::oracles::{CliOracle, OracleKind, ResumingOracle};
use crate::{read_file, Cli, CliError, Command};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Built-in schema files, byte-identical to the writer's output for the
/// built-in space definitions.
pub const SCHEMA_MOBILE: &str = include_str!("../schemas/chamnet-mobile.space");
pub const SCHEMA_RES: &str = include_str!("../schemas/chamnet-res.space");

/// Shared, fully-resolved command context.
pub struct Ctx {
    pub cfg: RunConfig,
    pub space: SearchSpace,
    pub seed: u64,
    /// Set when --space pointed at a schema file.
    pub space_path: Option<String>,
    pub config_path: Option<String>,
}

impl Ctx {
    fn resolve(cli: &Cli) -> Result<Ctx, CliError> {
        let mut cfg = match &cli.config {
            Some(p) => {
                let path = p.display().to_string();
                RunConfig::parse(&read_file(&path)?, &path)?
            }
            None => RunConfig::default(),
        };
        // CLI flags override the file; the merged result is what gets
        // digested into the manifest.
        if cli.space.is_some() {
            cfg.space = cli.space.clone();
        }
        if cli.seed.is_some() {
            cfg.seed = cli.seed;
        }
        if cli.threads.is_some() {
            cfg.threads = cli.threads;
        }
        if cli.channel_step.is_some() {
            cfg.channel_step = cli.channel_step;
        }
        let spec = cfg.space.clone().unwrap_or_else(|| "chamnet-mobile".to_string());
        let (mut space, space_path) = match space::builtin(&spec) {
            Some(s) => (s, None),
            None => {
                if !Path::new(&spec).exists() {
                    return Err(CliError::Usage(format!(
                        "unknown space '{spec}': not a built-in name or schema file"
                    )));
                }
                (formats::parse_space(&read_file(&spec)?, &spec)?, Some(spec))
            }
        };
        if let Some(step) = cfg.channel_step {
            if step == 0 {
                return Err(CliError::Usage("channel step must be >= 1".to_string()));
            }
            if step > 1 {
                space = space.with_channel_step(step);
            }
        }
        Ok(Ctx {
            seed: cfg.seed.unwrap_or(0),
            config_path: cli.config.as_ref().map(|p| p.display().to_string()),
            cfg,
            space,
            space_path,
        })
    }
}

/// Collects a command's output files and writes them, the effective config,
/// and the manifest in one pass.
struct OutDir {
    dir: PathBuf,
    files: Vec<(String, String)>,
    inputs: Vec<String>,
}

impl OutDir {
    fn new(dir: &Path) -> OutDir {
        OutDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            inputs: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    fn input(&mut self, path: impl Into<String>) {
        self.inputs.push(path.into());
    }

    fn finish(mut self, ctx: &Ctx, argv: &[String]) -> Result<(), CliError> {
        if let Some(p) = &ctx.config_path {
            self.inputs.insert(0, p.clone());
        }
        if let Some(p) = &ctx.space_path {
            self.inputs.insert(0, p.clone());
        }
        let config_text = ctx.cfg.to_toml();
        let digest = format!("sha256:{:x}", Sha256::digest(config_text.as_bytes()));
        self.files.push(("config.toml".to_string(), config_text));
        let mut outputs: Vec<String> = self.files.iter().map(|(n, _)| n.clone()).collect();
        outputs.push("manifest.txt".to_string());
        let manifest = Manifest {
            toolkit_version: TOOLKIT_VERSION.to_string(),
            command: argv.join(" "),
            seed: ctx.seed,
            config_digest: digest,
            inputs: self.inputs,
            outputs,
        };
        self.files
            .push(("manifest.txt".to_string(), formats::write_manifest(&manifest)));
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| CliError::Data(format!("{}: {e}", self.dir.display())))?;
        for (name, content) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, content)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn sampler_error(e: SamplerError) -> CliError {
    match e {
        SamplerError::OracleFailure { gene, message } => CliError::Oracle(format!(
            "oracle failed on gene [{}]: {message}",
            gene.values
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        )),
        other => CliError::Data(format!("{other}")),
    }
}

pub fn dispatch(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let ctx = Ctx::resolve(cli)?;
    match &cli.command {
        Command::Pool { k, out } => cmd_pool(&ctx, argv, *k, out),
        Command::BuildAcc {
            oracle,
            resume,
            out,
        } => cmd_build_acc(&ctx, argv, oracle, resume.as_deref(), out),
        Command::BuildLut {
            device,
            records,
            platform,
            out,
        } => cmd_build_lut(&ctx, argv, device.as_deref(), records.as_deref(), platform.as_deref(), out),
        Command::BuildEnergy {
            oracle,
            platform,
            out,
        } => cmd_build_energy(&ctx, argv, oracle, platform.as_deref(), out),
        Command::Search {
            acc,
            lut,
            energy,
            thres_ms,
            thres_mj,
            out,
        } => cmd_search(
            &ctx, argv, acc, lut.as_deref(), energy.as_deref(), *thres_ms, *thres_mj, out,
        ),
        Command::Sweep {
            acc,
            lut,
            thres_ms_list,
            out,
        } => cmd_sweep(&ctx, argv, acc, lut, thres_ms_list, out),
        Command::Eval {
            gene,
            acc,
            lut,
            energy,
            thres_ms,
            thres_mj,
        } => cmd_eval(
            &ctx, gene, acc, lut.as_deref(), energy.as_deref(), *thres_ms, *thres_mj,
        ),
    }
}

fn cmd_pool(ctx: &Ctx, argv: &[String], k: usize, out: &Path) -> Result<(), CliError> {
    if k == 0 {
        return Err(CliError::Usage("--k must be >= 1".to_string()));
    }
    let pool = sampler::qmc_pool(&ctx.space, k, ctx.seed).map_err(sampler_error)?;
    let mut dir = OutDir::new(out);
    dir.add("pool.txt", formats::write_pool(&ctx.space, &pool));
    dir.finish(ctx, argv)
}

fn cmd_build_acc(
    ctx: &Ctx,
    argv: &[String],
    oracle_spec: &str,
    resume: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let mut inner = CliOracle::from_spec(oracle_spec, OracleKind::Accuracy, &ctx.space, ctx.seed)?;
    let cfg = ctx.cfg.sampler_config(ctx.seed);
    let (model, observations, fresh) = build_with_resume(ctx, &mut inner, &cfg, resume)?;
    let model = maybe_center(ctx, model)?;
    if resume.is_some() {
        eprintln!("resume: {fresh} fresh oracle evaluation(s)");
    }
    let mut dir = OutDir::new(out);
    if let Some(p) = resume {
        dir.input(p.display().to_string());
    }
    if let Some(path) = oracle_spec.strip_prefix("file:") {
        dir.input(path);
    }
    dir.add("model.txt", formats::write_gp(&ctx.space.name, None, &model));
    dir.add("observations.txt", formats::write_obslog(&ctx.space, &observations));
    dir.finish(ctx, argv)
}

fn build_with_resume(
    ctx: &Ctx,
    inner: &mut CliOracle,
    cfg: &SamplerConfig,
    resume: Option<&Path>,
) -> Result<(GpModel, Vec<Observation>, usize), CliError> {
    match resume {
        None => {
            let (model, obs) =
                sampler::build_predictor(&ctx.space, inner, cfg).map_err(sampler_error)?;
            Ok((model, obs, 0))
        }
        Some(path) => {
            let path_s = path.display().to_string();
            let prior = formats::parse_obslog(&read_file(&path_s)?, &path_s, &ctx.space)?;
            let mut oracle = ResumingOracle {
                inner,
                cached: prior.into_iter().map(|o| (o.gene.values, o.value)).collect(),
                fresh_evaluations: 0,
            };
            let (model, obs) =
                sampler::build_predictor(&ctx.space, &mut oracle, cfg).map_err(sampler_error)?;
            Ok((model, obs, oracle.fresh_evaluations))
        }
    }
}

/// Refit with target centering when the config asks for it.
fn maybe_center(ctx: &Ctx, model: GpModel) -> Result<GpModel, CliError> {
    if ctx.cfg.gp.center_targets != Some(true) {
        return Ok(model);
    }
    GpModel::fit_centered(
        model.inputs().to_vec(),
        model.targets().to_vec(),
        model.gamma(),
        model.noise_var(),
    )
    .map_err(|e| CliError::Data(format!("centered refit failed: {e}")))
}

fn cmd_build_lut(
    ctx: &Ctx,
    argv: &[String],
    device: Option<&str>,
    records: Option<&Path>,
    platform: Option<&str>,
    out: &Path,
) -> Result<(), CliError> {
    let mut dir = OutDir::new(out);
    let lut = match (device, records) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(CliError::Usage(
                "build-lut takes exactly one of --device or --records".to_string(),
            ))
        }
        (Some(profile), None) => {
            let (dev, default_platform) = match profile {
                "cpu_like" => (SyntheticDevice::cpu_like(), "synthetic-cpu"),
                "dsp_like" => (SyntheticDevice::dsp_like(), "synthetic-dsp"),
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown device profile '{other}': expected cpu_like or dsp_like"
                    )))
                }
            };
            let records = chamnet_core::oracle::generate_lut(&dev, &ctx.space);
            LatencyLut::build(platform.unwrap_or(default_platform), records)
        }
        (None, Some(path)) => {
            let path_s = path.display().to_string();
            dir.input(path_s.clone());
            let parsed = formats::parse_lut(&read_file(&path_s)?, &path_s)?;
            match platform {
                Some(p) => LatencyLut::build(p, parsed.records().map(|(k, us)| (*k, us))),
                None => parsed,
            }
        }
    };
    dir.add("lut.txt", formats::write_lut(&lut));
    dir.finish(ctx, argv)
}

fn cmd_build_energy(
    ctx: &Ctx,
    argv: &[String],
    oracle_spec: &str,
    platform: Option<&str>,
    out: &Path,
) -> Result<(), CliError> {
    let mut oracle = CliOracle::from_spec(oracle_spec, OracleKind::Energy, &ctx.space, ctx.seed)?;
    // Energy builds are exploration-only; the exploitation budget moves to
    // exploration so the per-iteration batch size is preserved.
    let mut cfg = ctx.cfg.sampler_config(ctx.seed);
    cfg.explore_count += cfg.exploit_count;
    cfg.exploit_count = 0;
    let platform = platform.unwrap_or(match oracle_spec {
        "synthetic:dsp" => "synthetic-dsp",
        _ => "synthetic-cpu",
    });
    let (energy_model, observations) =
        chamnet_core::resource::build_energy_predictor(&ctx.space, &mut oracle, &cfg, platform)
            .map_err(|e| match e {
                chamnet_core::resource::ResourceError::Sampler(s) => sampler_error(s),
                other => CliError::Data(format!("{other}")),
            })?;
    let model = maybe_center(ctx, energy_model.gp)?;
    let mut dir = OutDir::new(out);
    if let Some(path) = oracle_spec.strip_prefix("file:") {
        dir.input(path);
    }
    dir.add(
        "model.txt",
        formats::write_gp(&ctx.space.name, Some(platform), &model),
    );
    dir.add("observations.txt", formats::write_obslog(&ctx.space, &observations));
    dir.finish(ctx, argv)
}

/// Loaded resource predictor for search/eval: owns the backing data.
enum ResourceBacking {
    Lut(LatencyLut, bool),
    Energy(chamnet_core::resource::EnergyModel),
}

impl ResourceBacking {
    fn predictor(&self) -> ResourcePredictor<'_> {
        match self {
            ResourceBacking::Lut(lut, false) => ResourcePredictor::Latency(lut),
            ResourceBacking::Lut(lut, true) => ResourcePredictor::LatencyInterpolated(lut),
            ResourceBacking::Energy(m) => ResourcePredictor::Energy(m),
        }
    }

    fn kind(&self) -> ResourceKind {
        match self {
            ResourceBacking::Lut(..) => ResourceKind::Latency,
            ResourceBacking::Energy(_) => ResourceKind::Energy,
        }
    }
}

fn load_acc_model(ctx: &Ctx, path: &Path) -> Result<GpModel, CliError> {
    let path_s = path.display().to_string();
    let dump = formats::parse_gp(&read_file(&path_s)?, &path_s)?;
    if dump.space_name != ctx.space.name {
        return Err(CliError::Data(format!(
            "{path_s}: model was built for space '{}', current space is '{}'",
            dump.space_name, ctx.space.name
        )));
    }
    if dump.model.dims() != ctx.space.dims() {
        return Err(CliError::Data(format!(
            "{path_s}: model has {} dims, space has {}",
            dump.model.dims(),
            ctx.space.dims()
        )));
    }
    Ok(dump.model)
}

fn load_resource(
    ctx: &Ctx,
    lut: Option<&Path>,
    energy: Option<&Path>,
) -> Result<ResourceBacking, CliError> {
    match (lut, energy) {
        (Some(_), Some(_)) | (None, None) => Err(CliError::Usage(
            "exactly one of --lut or --energy is required".to_string(),
        )),
        (Some(p), None) => {
            let path_s = p.display().to_string();
            let lut = formats::parse_lut(&read_file(&path_s)?, &path_s)?;
            let interpolate = ctx.cfg.lut.interpolate == Some(true);
            Ok(ResourceBacking::Lut(lut, interpolate))
        }
        (None, Some(p)) => {
            let path_s = p.display().to_string();
            let dump = formats::parse_gp(&read_file(&path_s)?, &path_s)?;
            if dump.space_name != ctx.space.name {
                return Err(CliError::Data(format!(
                    "{path_s}: energy model space '{}' does not match '{}'",
                    dump.space_name, ctx.space.name
                )));
            }
            Ok(ResourceBacking::Energy(chamnet_core::resource::EnergyModel {
                gp: dump.model,
                platform: dump.platform.unwrap_or_default(),
            }))
        }
    }
}

fn run_search(
    ctx: &Ctx,
    acc: &GpModel,
    backing: &ResourceBacking,
    params: &FitnessParams,
    seeds: &[Gene],
) -> Result<SearchResult, CliError> {
    let cfg = ctx.cfg.ees_config(ctx.seed);
    ees::search_seeded(&ctx.space, acc, &backing.predictor(), params, &cfg, seeds)
        .map_err(|e| CliError::Data(format!("search failed: {e}")))
}

/// The gene a search run reports: the best feasible gene when one was seen
/// (so the returned architecture honors the budget), otherwise the overall
/// penalized-fitness winner.
fn reported_winner(res: &SearchResult) -> (Gene, chamnet_core::fitness::FitnessResult) {
    match &res.best_feasible {
        Some((g, r)) => (g.clone(), *r),
        None => (res.best_gene.clone(), res.best_fitness),
    }
}

fn write_result(space: &SearchSpace, params: &FitnessParams, res: &SearchResult) -> String {
    use std::fmt::Write as _;
    let (gene, fit) = reported_winner(res);
    let mut out = String::new();
    let _ = writeln!(out, "result-v1");
    let _ = writeln!(out, "space {}", space.name);
    let unit = params.resource_kind.unit();
    let _ = writeln!(out, "constraint {} thres_{} {}",
        match params.resource_kind {
            ResourceKind::Latency => "latency",
            ResourceKind::Energy => "energy",
        },
        unit.to_lowercase(),
        params.thres
    );
    let gene = gene
        .values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(out, "best_gene {gene}");
    let _ = writeln!(out, "fitness {}", fit.fitness);
    let _ = writeln!(out, "accuracy {}", fit.accuracy);
    let _ = writeln!(out, "resource_{} {}", unit.to_lowercase(), fit.resource);
    let _ = writeln!(out, "feasible {}", fit.feasible);
    let _ = writeln!(out, "evaluations {}", res.evaluations);
    let _ = writeln!(out, "feasible_seen {}", res.feasible_seen);
    out
}

fn write_history(res: &SearchResult) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "history-v1");
    let _ = writeln!(out, "# iteration best mean");
    for (i, (best, mean)) in res.history.iter().enumerate() {
        let _ = writeln!(out, "{} {} {}", i + 1, best, mean);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    ctx: &Ctx,
    argv: &[String],
    acc: &Path,
    lut: Option<&Path>,
    energy: Option<&Path>,
    thres_ms: Option<f64>,
    thres_mj: Option<f64>,
    out: &Path,
) -> Result<(), CliError> {
    let model = load_acc_model(ctx, acc)?;
    let backing = load_resource(ctx, lut, energy)?;
    let over = match backing.kind() {
        ResourceKind::Latency => {
            if thres_mj.is_some() {
                return Err(CliError::Usage(
                    "--thres-mj given but the constraint is latency (use --thres-ms)".to_string(),
                ));
            }
            thres_ms
        }
        ResourceKind::Energy => {
            if thres_ms.is_some() {
                return Err(CliError::Usage(
                    "--thres-ms given but the constraint is energy (use --thres-mj)".to_string(),
                ));
            }
            thres_mj
        }
    };
    let params = ctx.cfg.fitness_params(backing.kind(), over)?;
    let res = run_search(ctx, &model, &backing, &params, &[])?;
    if !res.feasible_seen {
        eprintln!(
            "warning: no feasible gene was evaluated; the budget may be below the space's minimum"
        );
    }
    let mut dir = OutDir::new(out);
    dir.input(acc.display().to_string());
    if let Some(p) = lut {
        dir.input(p.display().to_string());
    }
    if let Some(p) = energy {
        dir.input(p.display().to_string());
    }
    dir.add("result.txt", write_result(&ctx.space, &params, &res));
    dir.add("history.txt", write_history(&res));
    dir.finish(ctx, argv)
}

fn cmd_sweep(
    ctx: &Ctx,
    argv: &[String],
    acc: &Path,
    lut: &Path,
    thres_list: &[f64],
    out: &Path,
) -> Result<(), CliError> {
    use std::fmt::Write as _;
    if thres_list.is_empty() {
        return Err(CliError::Usage("--thres-ms-list must be non-empty".to_string()));
    }
    let model = load_acc_model(ctx, acc)?;
    let backing = load_resource(ctx, Some(lut), None)?;
    let mut thresholds = thres_list.to_vec();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut table = String::from("tradeoff-v1\n# thres_ms accuracy resource_ms gene...\n");
    // Ascending execution with winner injection: each search's initial
    // population contains every smaller-budget winner, so the best fitness
    // (= accuracy when feasible) never decreases along the table.
    let mut winners: Vec<Gene> = Vec::new();
    let mut any_infeasible = false;
    for &thres in &thresholds {
        let params = ctx.cfg.fitness_params(ResourceKind::Latency, Some(thres))?;
        let res = run_search(ctx, &model, &backing, &params, &winners)?;
        any_infeasible |= !res.feasible_seen;
        let (winner, fit) = reported_winner(&res);
        let gene = winner
            .values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(table, "{} {} {} {}", thres, fit.accuracy, fit.resource, gene);
        winners.push(winner);
    }
    if any_infeasible {
        eprintln!("warning: at least one threshold saw no feasible gene");
    }
    let mut dir = OutDir::new(out);
    dir.input(acc.display().to_string());
    dir.input(lut.display().to_string());
    dir.add("tradeoff.txt", table);
    dir.finish(ctx, argv)
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    ctx: &Ctx,
    gene_arg: &str,
    acc: &Path,
    lut: Option<&Path>,
    energy: Option<&Path>,
    thres_ms: Option<f64>,
    thres_mj: Option<f64>,
) -> Result<(), CliError> {
    let gene = formats::parse_gene_arg(gene_arg)?;
    if !ctx.space.validate(&gene) {
        return Err(CliError::Usage(format!(
            "gene does not validate against space '{}' ({} dims)",
            ctx.space.name,
            ctx.space.dims()
        )));
    }
    let model = load_acc_model(ctx, acc)?;
    let accuracy = model
        .predict(&ctx.space.normalize(&gene))
        .map_err(|e| CliError::Data(format!("{e}")))?
        .mean;
    println!("accuracy {accuracy}");
    if lut.is_none() && energy.is_none() {
        return Ok(());
    }
    let backing = load_resource(ctx, lut, energy)?;
    let resource = backing
        .predictor()
        .predict(&ctx.space, &gene)
        .map_err(|e| CliError::Data(format!("{e}")))?;
    let unit = backing.kind().unit().to_lowercase();
    println!("resource_{unit} {resource}");
    let over = match backing.kind() {
        ResourceKind::Latency => thres_ms,
        ResourceKind::Energy => thres_mj,
    };
    // Fitness needs a budget; without one the command stops at raw scores.
    if over.is_some()
        || ctx.cfg.fitness.thres_ms.is_some()
        || ctx.cfg.fitness.thres_mj.is_some()
    {
        let params = ctx.cfg.fitness_params(backing.kind(), over)?;
        let r = chamnet_core::fitness::score(accuracy, resource, &params);
        println!("fitness {}", r.fitness);
        println!("feasible {}", r.feasible);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The embedded schema files must stay byte-identical to what the writer
    /// produces for the built-in spaces. Run with REGEN_SCHEMAS=1 to rewrite
    /// them after changing a built-in definition.
    #[test]
    fn embedded_schemas_match_builtins() {
        for (name, embedded) in [("chamnet-mobile", SCHEMA_MOBILE), ("chamnet-res", SCHEMA_RES)] {
            let written = formats::write_space(&space::builtin(name).unwrap());
            if std::env::var("REGEN_SCHEMAS").is_ok() {
                let path = format!("{}/schemas/{name}.space", env!("CARGO_MANIFEST_DIR"));
                std::fs::write(path, &written).unwrap();
                continue;
            }
            assert_eq!(
                embedded, written,
                "{name} schema file is stale; rerun tests with REGEN_SCHEMAS=1"
            );
            let parsed = formats::parse_space(embedded, "embedded").unwrap();
            assert_eq!(formats::write_space(&parsed), written);
        }
    }
}
