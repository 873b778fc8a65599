//! Acceptance gate: nine end-to-end criteria, one test (and one pass/fail
//! line from the harness) each. Tolerances and time budgets are asserted,
//! not just printed. Every oracle here is computed independently of the
//! library path it checks.

use std::time::Instant;

use chamnet_core::ees::{self, EesConfig};
use chamnet_core::fitness::{self, FitnessParams, ResourcePredictor};
use chamnet_core::gp::{self, GpModel};
use chamnet_core::oracle::{generate_lut, SyntheticAccuracyOracle, SyntheticDevice};
use chamnet_core::resource::{trace_to_energy, LatencyLut, PowerTrace};
use chamnet_core::sampler::{self, SamplerConfig};
use chamnet_core::space::{
    chamnet_mobile, Gene, HyperparamDef, HyperparamKind, OpKind, SearchSpace, StageDef,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// shared helpers

fn sqdist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Gauss-Jordan inverse with partial pivoting; independent of the library's
/// Cholesky solver.
fn invert(a: &[f64], n: usize) -> Vec<f64> {
    let w = 2 * n;
    let mut m = vec![0.0f64; n * w];
    for i in 0..n {
        m[i * w..i * w + n].copy_from_slice(&a[i * n..(i + 1) * n]);
        m[i * w + n + i] = 1.0;
    }
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if m[r * w + col].abs() > m[pivot * w + col].abs() {
                pivot = r;
            }
        }
        for j in 0..w {
            m.swap(col * w + j, pivot * w + j);
        }
        let p = m[col * w + col];
        for j in 0..w {
            m[col * w + j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * w + col];
                for j in 0..w {
                    m[r * w + j] -= f * m[col * w + j];
                }
            }
        }
    }
    let mut out = vec![0.0f64; n * n];
    for i in 0..n {
        out[i * n..(i + 1) * n].copy_from_slice(&m[i * w + n..i * w + w]);
    }
    out
}

fn mobile_step8() -> SearchSpace {
    chamnet_mobile().with_channel_step(8)
}

/// Every gene of a space, by cartesian product over the searchable grids.
fn enumerate_genes(space: &SearchSpace) -> Vec<Gene> {
    let defs = space.searchable_defs();
    let grids: Vec<Vec<u32>> = defs.iter().map(|d| d.grid().collect()).collect();
    let mut out = vec![Vec::new()];
    for grid in &grids {
        let mut next = Vec::with_capacity(out.len() * grid.len());
        for prefix in &out {
            for &v in grid {
                let mut g = prefix.clone();
                g.push(v);
                next.push(g);
            }
        }
        out = next;
    }
    out.into_iter().map(Gene::new).collect()
}

/// Small fully-enumerable space used by the brute-force comparison.
fn restricted_space() -> SearchSpace {
    SearchSpace {
        name: String::from("restricted"),
        resolution: HyperparamDef::new("resolution", 64, 64, 1, 64, HyperparamKind::Resolution),
        input_channels: 3,
        stages: vec![
            StageDef {
                op_kind: OpKind::Conv2d,
                hyperparams: vec![HyperparamDef::new(
                    "stem_c",
                    8,
                    64,
                    8,
                    16,
                    HyperparamKind::Channels,
                )],
                stride: 2,
                kernel_size: 3,
            },
            StageDef {
                op_kind: OpKind::InvertedBottleneck,
                hyperparams: vec![
                    HyperparamDef::new("t1", 2, 6, 1, 4, HyperparamKind::ExpansionFactor),
                    HyperparamDef::new("c1", 8, 64, 8, 24, HyperparamKind::Channels),
                    HyperparamDef::new("n1", 1, 3, 1, 1, HyperparamKind::Repeats),
                ],
                stride: 2,
                kernel_size: 3,
            },
            StageDef {
                op_kind: OpKind::InvertedBottleneck,
                hyperparams: vec![
                    HyperparamDef::fixed("t2", 4, HyperparamKind::ExpansionFactor),
                    HyperparamDef::new("c2", 8, 32, 8, 16, HyperparamKind::Channels),
                    HyperparamDef::fixed("n2", 1, HyperparamKind::Repeats),
                ],
                stride: 2,
                kernel_size: 3,
            },
            StageDef {
                op_kind: OpKind::AvgPool,
                hyperparams: vec![],
                stride: 1,
                kernel_size: 1,
            },
            StageDef {
                op_kind: OpKind::Fc,
                hyperparams: vec![HyperparamDef::fixed("classes", 10, HyperparamKind::Channels)],
                stride: 1,
                kernel_size: 1,
            },
        ],
    }
}

fn run_cli(args: &[&str]) -> i32 {
    let mut argv = vec!["chamnet".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    chamnet::run(argv)
}

fn read(path: &std::path::Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// criterion 1

#[test]
fn c1_gp_matches_dense_inverse_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(2..=50);
        let d = rng.gen_range(1..=21);
        let gamma = rng.gen_range(0.2..5.0);
        let noise = 10f64.powf(rng.gen_range(-4.0..-1.0));
        let inputs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let model = GpModel::fit(inputs.clone(), targets.clone(), gamma, noise).unwrap();
        assert_eq!(model.jitter, 0.0, "dense oracle assumes no jitter");

        // Dense-inverse oracle: A = K + noise I, mean = k^T A^-1 y,
        // var = 1 - k^T A^-1 k (same latent-variance clamp as the model).
        let mut a = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (-gamma * sqdist(&inputs[i], &inputs[j])).exp();
            }
            a[i * n + i] += noise;
        }
        let inv = invert(&a, n);
        for _ in 0..5 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            let k: Vec<f64> = inputs
                .iter()
                .map(|xi| (-gamma * sqdist(xi, &x)).exp())
                .collect();
            let mut mean = 0.0;
            let mut quad = 0.0;
            for i in 0..n {
                for j in 0..n {
                    mean += k[i] * inv[i * n + j] * targets[j];
                    quad += k[i] * inv[i * n + j] * k[j];
                }
            }
            let var = (1.0f64 - quad).max(0.0);
            let p = model.predict(&x).unwrap();
            worst = worst.max((p.mean - mean).abs()).max((p.variance - var).abs());
        }
    }
    let elapsed = start.elapsed();
    assert!(worst < 1e-8, "worst deviation {worst:e} >= 1e-8");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?} >= 5 s");
    println!(
        "criterion 1 PASS: GP matches dense-inverse oracle, worst deviation {worst:.2e}, {elapsed:?}"
    );
}

// ---------------------------------------------------------------------------
// criterion 2

/// OLS leave-one-out MSE via the hat matrix: residual_i / (1 - h_ii).
fn ols_loo_mse(inputs: &[Vec<f64>], targets: &[f64]) -> f64 {
    let n = inputs.len();
    let d = inputs[0].len() + 1; // intercept
    let x: Vec<Vec<f64>> = inputs
        .iter()
        .map(|row| {
            let mut r = vec![1.0];
            r.extend_from_slice(row);
            r
        })
        .collect();
    let mut xtx = vec![0.0f64; d * d];
    for row in &x {
        for i in 0..d {
            for j in 0..d {
                xtx[i * d + j] += row[i] * row[j];
            }
        }
    }
    // Tiny ridge keeps X^T X invertible when a column is constant.
    for i in 0..d {
        xtx[i * d + i] += 1e-10;
    }
    let inv = invert(&xtx, d);
    let mut xty = vec![0.0f64; d];
    for (row, &t) in x.iter().zip(targets) {
        for i in 0..d {
            xty[i] += row[i] * t;
        }
    }
    let beta: Vec<f64> = (0..d).map(|i| (0..d).map(|j| inv[i * d + j] * xty[j]).sum()).collect();
    let mut sum = 0.0;
    for (row, &t) in x.iter().zip(targets) {
        let pred: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
        let mut h = 0.0;
        for i in 0..d {
            for j in 0..d {
                h += row[i] * inv[i * d + j] * row[j];
            }
        }
        let loo = (t - pred) / (1.0 - h);
        sum += loo * loo;
    }
    sum / n as f64
}

#[test]
fn c2_gp_loo_beats_ols_loo() {
    let start = Instant::now();
    let space = mobile_step8();
    let mut wins = 0;
    for seed in 0..10u64 {
        let pool = sampler::qmc_pool(&space, 2048, seed).unwrap();
        let oracle = SyntheticAccuracyOracle::for_space(&space, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2222);
        let idx = rand::seq::index::sample(&mut rng, pool.len(), 240);
        let genes: Vec<&Gene> = idx.iter().map(|i| &pool[i]).collect();
        let inputs: Vec<Vec<f64>> = genes.iter().map(|g| space.normalize(g)).collect();
        let targets: Vec<f64> = genes.iter().map(|g| oracle.accuracy(&space, g)).collect();
        let (gamma, noise) = gp::tune_hyperparams(&inputs, &targets).unwrap();
        let gp_mse = gp::loo_mse(&inputs, &targets, gamma, noise).unwrap();
        let ols_mse = ols_loo_mse(&inputs, &targets);
        if gp_mse < ols_mse {
            wins += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(wins >= 8, "GP beat OLS on only {wins}/10 seeds");
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?} >= 2 min");
    println!("criterion 2 PASS: GP LOO-MSE < OLS LOO-MSE on {wins}/10 seeds, {elapsed:?}");
}

// ---------------------------------------------------------------------------
// criterion 3

#[test]
fn c3_guided_sampling_beats_uniform() {
    let start = Instant::now();
    let space = mobile_step8();
    let mut wins = 0;
    for seed in 0..10u64 {
        let cfg = SamplerConfig {
            seed,
            ..SamplerConfig::default()
        };
        let oracle = SyntheticAccuracyOracle::for_space(&space, seed);
        let mut eval = |g: &Gene| Ok(oracle.accuracy(&space, g));
        let (guided, obs) = sampler::build_predictor(&space, &mut eval, &cfg).unwrap();

        // Uniform baseline: 240 genes drawn uniformly from the same pool and
        // fitted at the library's default hyperparameters. The pipeline under
        // test owns both where it samples and how it selects hyperparameters;
        // the baseline is what you get without that loop.
        let pool = sampler::qmc_pool(&space, cfg.pool_size, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3333);
        let idx = rand::seq::index::sample(&mut rng, pool.len(), 240);
        let uni_genes: Vec<&Gene> = idx.iter().map(|i| &pool[i]).collect();
        let inputs: Vec<Vec<f64>> = uni_genes.iter().map(|g| space.normalize(g)).collect();
        let targets: Vec<f64> = uni_genes.iter().map(|g| oracle.accuracy(&space, g)).collect();
        let uniform = GpModel::fit(inputs, targets, 1.0, 1e-4).unwrap();

        // Holdout: 512 pool genes untouched by either training set.
        let mut used: std::collections::BTreeSet<Vec<u32>> =
            obs.iter().map(|o| o.gene.values.clone()).collect();
        used.extend(uni_genes.iter().map(|g| g.values.clone()));
        let holdout: Vec<&Gene> = pool
            .iter()
            .filter(|g| !used.contains(&g.values))
            .take(512)
            .collect();
        assert_eq!(holdout.len(), 512);
        let mse = |m: &GpModel| {
            holdout
                .iter()
                .map(|g| {
                    let p = m.predict(&space.normalize(g)).unwrap().mean;
                    let t = oracle.accuracy(&space, g);
                    (p - t) * (p - t)
                })
                .sum::<f64>()
                / holdout.len() as f64
        };
        if mse(&guided) <= mse(&uniform) {
            wins += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(wins >= 7, "guided sampling won on only {wins}/10 seeds");
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?} >= 5 min");
    println!(
        "criterion 3 PASS: guided 240-sample predictor <= uniform on {wins}/10 seeds, {elapsed:?}"
    );
}

// ---------------------------------------------------------------------------
// criterion 4

#[test]
fn c4_lut_sum_composition_bit_exact() {
    let space = mobile_step8();
    let device = SyntheticDevice::cpu_like();
    let lut = LatencyLut::build("synthetic-cpu", generate_lut(&device, &space));
    let genes = sampler::qmc_pool(&space, 1000, 99).unwrap();
    for gene in &genes {
        let arch = space.decode(gene).unwrap();
        let composed = lut.network_latency_us(&arch).unwrap();
        let manual: u64 = arch
            .operators
            .iter()
            .map(|op| lut.get_us(op).expect("operator present"))
            .sum();
        assert_eq!(composed, manual, "sum composition differs");
        assert_eq!(
            composed,
            device.network_latency_us(&space, gene),
            "LUT composition differs from the additive device's direct latency"
        );
    }
    println!("criterion 4 PASS: LUT latency sum bit-exact on 1000 genes and equal to direct device latency");
}

// ---------------------------------------------------------------------------
// criterion 5

#[test]
fn c5_search_near_brute_force_optimum() {
    let start = Instant::now();
    let space = restricted_space();
    let all = enumerate_genes(&space);
    assert!(all.len() <= 20_000, "{} genes", all.len());

    // Exact fitness: a GP fitted on a 64-gene sample plus a dense LUT.
    let pool = sampler::qmc_pool(&space, 64, 5).unwrap();
    let oracle = SyntheticAccuracyOracle::for_space(&space, 5);
    let inputs: Vec<Vec<f64>> = pool.iter().map(|g| space.normalize(g)).collect();
    let targets: Vec<f64> = pool.iter().map(|g| oracle.accuracy(&space, g)).collect();
    let model = GpModel::fit(inputs, targets, 2.0, 1e-4).unwrap();
    let device = SyntheticDevice::cpu_like();
    let lut = LatencyLut::build("synthetic-cpu", generate_lut(&device, &space));
    let predictor = ResourcePredictor::Latency(&lut);

    // Budget at the median latency so the constraint is active.
    let mut lats: Vec<f64> = all
        .iter()
        .map(|g| lut.predict_latency_ms(&space.decode(g).unwrap()).unwrap())
        .collect();
    lats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let params = FitnessParams {
        alpha: 1e3,
        ..FitnessParams::latency_default(lats[lats.len() / 2])
    };

    let optimum = all
        .iter()
        .map(|g| {
            fitness::evaluate(&space, g, &model, &predictor, &params)
                .unwrap()
                .fitness
        })
        .fold(f64::NEG_INFINITY, f64::max);

    let mut hits = 0;
    for seed in 0..10u64 {
        let cfg = EesConfig {
            seed,
            ..EesConfig::default()
        };
        let res = ees::search(&space, &model, &predictor, &params, &cfg).unwrap();
        if optimum - res.best_fitness.fitness <= 0.01 * optimum.abs() {
            hits += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(hits >= 9, "within 1% of optimum on only {hits}/10 seeds");
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?} >= 2 min");
    println!(
        "criterion 5 PASS: search within 1% of brute-force optimum ({} genes) on {hits}/10 seeds, {elapsed:?}"
    , all.len());
}

// ---------------------------------------------------------------------------
// criterion 6

#[test]
fn c6_sweep_satisfies_constraints_and_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();
    assert_eq!(
        run_cli(&["build-acc", "--seed", "11", "--channel-step", "8", "--out", &p("acc")]),
        0
    );
    assert_eq!(
        run_cli(&[
            "build-lut", "--device", "cpu_like", "--seed", "11", "--channel-step", "8",
            "--out", &p("lut"),
        ]),
        0
    );
    let acc = p("acc") + "/model.txt";
    let lut = p("lut") + "/lut.txt";
    assert_eq!(
        run_cli(&[
            "sweep", "--acc", &acc, "--lut", &lut, "--thres-ms-list", "4,6,10,15,20,30",
            "--seed", "11", "--channel-step", "8", "--out", &p("sw"),
        ]),
        0
    );
    let table = read(&dir.path().join("sw/tradeoff.txt"));
    let rows: Vec<Vec<f64>> = table
        .lines()
        .skip(2)
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    let mut prev_acc = f64::NEG_INFINITY;
    for row in &rows {
        let (thres, acc, lat) = (row[0], row[1], row[2]);
        assert!(lat <= thres, "budget {thres} ms violated: {lat} ms");
        assert!(acc >= prev_acc, "accuracy not monotone at budget {thres} ms");
        prev_acc = acc;
    }
    println!("criterion 6 PASS: 6-point sweep feasible at every budget with non-decreasing accuracy");
}

// ---------------------------------------------------------------------------
// criterion 7

#[test]
fn c7_search_and_eval_time_budgets() {
    // Prebuilt predictors on the full (step-1) mobile space.
    let space = chamnet_mobile();
    let pool = sampler::qmc_pool(&space, 240, 7).unwrap();
    let oracle = SyntheticAccuracyOracle::for_space(&space, 7);
    let inputs: Vec<Vec<f64>> = pool.iter().map(|g| space.normalize(g)).collect();
    let targets: Vec<f64> = pool.iter().map(|g| oracle.accuracy(&space, g)).collect();
    let model = GpModel::fit(inputs, targets, 1.0, 1e-4).unwrap();
    let device = SyntheticDevice::cpu_like();
    let lut = LatencyLut::build("synthetic-cpu", generate_lut(&device, &space));
    let predictor = ResourcePredictor::Latency(&lut);
    let params = FitnessParams::latency_default(15.0);

    let start = Instant::now();
    let cfg = EesConfig {
        seed: 7,
        ..EesConfig::default()
    };
    let res = ees::search(&space, &model, &predictor, &params, &cfg).unwrap();
    let search_time = start.elapsed();
    assert!(res.feasible_seen);
    assert!(
        search_time.as_secs_f64() < 300.0,
        "search took {search_time:?} >= 5 CPU-minutes"
    );

    let gene = space.default_gene();
    let start = Instant::now();
    let one = fitness::evaluate(&space, &gene, &model, &predictor, &params).unwrap();
    let eval_time = start.elapsed();
    assert!(one.resource > 0.0);
    assert!(
        eval_time.as_secs_f64() < 1.0,
        "single eval took {eval_time:?} >= 1 CPU-second"
    );
    println!(
        "criterion 7 PASS: full-space search in {search_time:?} (< 5 min), single eval in {eval_time:?} (< 1 s)"
    );
}

// ---------------------------------------------------------------------------
// criterion 8

#[test]
fn c8_energy_trace_recovery() {
    // Worked example: 4.2 V, constant 1.0 A above baseline for 10 s total,
    // 1000 runs -> exactly 42 mJ per inference. 1024 samples at 10/1024 s
    // keep every intermediate product exactly representable.
    let n = 1024usize;
    let trace = PowerTrace {
        voltage: 4.2,
        sample_interval: 10.0 / n as f64,
        samples: vec![1.3; n],
        baseline_current: 0.3,
        run_count: 1000,
    };
    let mj = trace_to_energy(&trace).unwrap();
    assert_eq!(mj, 42.0, "worked example gave {mj} mJ");

    // Recovery: inject a known per-inference energy through a noisy-shaped
    // trace and check the pipeline reads it back within 0.5%.
    let truth_mj = 7.35;
    let runs = 50u32;
    let interval = 2e-4;
    let voltage = 3.9;
    let baseline = 0.25;
    // Required total excess charge: runs * E / (V * interval).
    let total_excess = runs as f64 * (truth_mj / 1000.0) / (voltage * interval);
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let n = 40_000usize;
    // Random non-negative shape, then scale to the exact target sum; samples
    // dipping to the baseline exercise the clamp without changing the sum.
    let shape: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let scale = total_excess / shape.iter().sum::<f64>();
    let samples: Vec<f64> = shape.iter().map(|s| baseline + s * scale).collect();
    let trace = PowerTrace {
        voltage,
        sample_interval: interval,
        samples,
        baseline_current: baseline,
        run_count: runs,
    };
    let got = trace_to_energy(&trace).unwrap();
    let rel = (got - truth_mj).abs() / truth_mj;
    assert!(rel < 0.005, "recovered {got} mJ vs {truth_mj} mJ ({rel:.4} relative)");
    println!(
        "criterion 8 PASS: worked example exactly 42 mJ; injected energy recovered within {:.4}%",
        rel * 100.0
    );
}

// ---------------------------------------------------------------------------
// criterion 9

#[test]
fn c9_manifest_rerun_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();

    // A pipeline covering pool, build-acc, build-lut, and search.
    let commands: Vec<Vec<String>> = vec![
        vec!["pool", "--k", "64", "--seed", "13", "--channel-step", "8", "--out", &p("pool")],
        vec!["build-acc", "--seed", "13", "--channel-step", "8", "--out", &p("acc")],
        vec![
            "build-lut", "--device", "cpu_like", "--seed", "13", "--channel-step", "8",
            "--out", &p("lut"),
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    let acc = p("acc") + "/model.txt";
    let lut = p("lut") + "/lut.txt";
    let search: Vec<String> = [
        "search", "--acc", &acc, "--lut", &lut, "--thres-ms", "10", "--seed", "13",
        "--channel-step", "8", "--out", &p("srch"),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    for args in commands.iter().chain(std::iter::once(&search)) {
        let mut argv = vec!["chamnet".to_string()];
        argv.extend(args.iter().cloned());
        assert_eq!(chamnet::run(argv), 0, "command failed: {args:?}");
        // The out dir is the token after --out.
        let out = args[args.iter().position(|a| a == "--out").unwrap() + 1].clone();

        // Snapshot every output, then rerun the exact argv recorded in the
        // manifest (same out dir) and demand byte identity, manifest included.
        let manifest = std::fs::read_to_string(format!("{out}/manifest.txt")).unwrap();
        let recorded = manifest
            .lines()
            .find_map(|l| l.strip_prefix("command "))
            .expect("manifest records the command");
        let before: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().into_string().unwrap(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();

        let mut argv = vec!["chamnet".to_string()];
        argv.extend(recorded.split_whitespace().map(String::from));
        assert_eq!(chamnet::run(argv), 0, "manifest rerun failed");
        for (name, bytes) in &before {
            let after = std::fs::read(format!("{out}/{name}")).unwrap();
            assert_eq!(&after, bytes, "{name} changed across manifest rerun");
        }
    }
    println!("criterion 9 PASS: manifest reruns byte-identical for pool, build-acc, build-lut, search");
}
