//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

mod common;

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use common::gradcheck::{worst_of, LOSSES, NETWORKS, OPS};
use common::tiny_config;
use profilesr::data::{block_mean, downsample, LoadProfile};
use profilesr::harness::{
    run_experiment, train_cnn_baseline, train_stage1, Dataset, RunConfig, CNN, CNN_COLUMNS, GAN_POLISHED,
    GAN_UNPOLISHED, LERP,
};
use profilesr::metrics::{
    build_report, dft_fast, dft_naive, fce, mse, rdp_simplify, rounded_percent, wasserstein_1d, MethodResults,
    MetricKind, MetricSet, ProfileMetrics,
};
use profilesr::networks::{
    generator_forward, init_params, polisher_forward, Checkpoint, GeneratorConfig, PolisherConfig,
};
use profilesr::rng::{self, Rng};
use profilesr::signal::{Shape, Tensor};
use rand::Rng as _;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn random_profile(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(0.0..5.0)).collect()
}

fn gradient_suite() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    let catalogs = [OPS, LOSSES, NETWORKS];
    for (c, catalog) in catalogs.iter().enumerate() {
        for (i, &(name, case)) in catalog.iter().enumerate() {
            match worst_of(case, 1000 + 100 * c as u64 + i as u64, 100) {
                Ok((e, kinks)) => {
                    worst = worst.max(e);
                    if !(e < 1e-4) || kinks > 10 {
                        bad.push(format!("{name} {e:.1e}/{kinks} kinks"));
                    }
                }
                Err(err) => bad.push(format!("{name}: {err}")),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let n = OPS.len() + LOSSES.len() + NETWORKS.len();
    Outcome::new(
        bad.is_empty() && secs < 120.0,
        format!("{n} cases x 100 trials, worst rel. error {worst:.1e}, {secs:.1} s {bad:?}"),
    )
}

/// Minimum-cost matching of two equal-size samples by trying every permutation.
fn transport_oracle(a: &[f64], b: &[f64]) -> f64 {
    fn go(a: &[f64], b: &mut Vec<f64>, k: usize, acc: f64, best: &mut f64) {
        if k == a.len() {
            *best = best.min(acc);
            return;
        }
        for j in k..b.len() {
            b.swap(k, j);
            go(a, b, k + 1, acc + (a[k] - b[k]).abs(), best);
            b.swap(k, j);
        }
    }
    let mut best = f64::INFINITY;
    go(a, &mut b.to_vec(), 0, 0.0, &mut best);
    best / a.len() as f64
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut r = rng::stream(2, "acceptance/oracles");
    let mut dft_err: f64 = 0.0;
    for _ in 0..50 {
        let x: Vec<f64> = (0..288).map(|_| r.random_range(-1.0..1.0)).collect();
        for (f, n) in dft_fast(&x).iter().zip(dft_naive(&x)) {
            dft_err = dft_err.max((f - n).norm());
        }
    }
    let mut w_err: f64 = 0.0;
    for _ in 0..20 {
        let a: Vec<f64> = (0..5).map(|_| r.random_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..5).map(|_| r.random_range(-3.0..3.0)).collect();
        w_err = w_err.max((wasserstein_1d(&a, &b).unwrap() - transport_oracle(&a, &b)).abs());
    }
    let ramp: Vec<f64> = (0..10).map(f64::from).collect();
    let triangle = [0.0, 1.0, 2.0, 1.0, 0.0];
    let step = [0.0, 0.0, 0.0, 0.0, 0.0, 5.0, 5.0, 5.0, 5.0, 5.0];
    let fixtures = [
        (rdp_simplify(&ramp, 0.1).unwrap().indices(), vec![0, 9]),
        (rdp_simplify(&triangle, 0.5).unwrap().indices(), vec![0, 2, 4]),
        (rdp_simplify(&triangle, 2.5).unwrap().indices(), vec![0, 4]),
        (rdp_simplify(&step, 0.1).unwrap().indices(), vec![0, 4, 5, 9]),
    ];
    let rdp_ok = fixtures.iter().all(|(got, want)| got == want);
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        dft_err < 1e-9 && w_err < 1e-9 && rdp_ok && secs < 60.0,
        format!("DFT max error {dft_err:.1e}, W1 max error {w_err:.1e}, RDP fixtures ok={rdp_ok}, {secs:.1} s"),
    )
}

fn downsampling_laws() -> Outcome {
    let mut r = rng::stream(3, "acceptance/downsample");
    let (mut lin_err, mut energy_err): (f64, f64) = (0.0, 0.0);
    let mut lengths_ok = true;
    for _ in 0..1000 {
        let x = random_profile(&mut r, 288);
        let y = random_profile(&mut r, 288);
        let (a, b) = (r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let (dx, dy, dm) = (block_mean(&x, 6).unwrap(), block_mean(&y, 6).unwrap(), block_mean(&mix, 6).unwrap());
        for i in 0..dm.len() {
            lin_err = lin_err.max((dm[i] - (a * dx[i] + b * dy[i])).abs());
        }
        let hr = LoadProfile::new("h", 0, 5, x.clone()).unwrap();
        let lr = downsample(&hr, 6, 0.0, &mut r).unwrap();
        lengths_ok &= lr.len() == 48 && lr.period_min == 30;
        energy_err = energy_err.max((lr.mean() - hr.mean()).abs());
    }
    Outcome::new(
        lin_err < 1e-12 && energy_err < 1e-12 && lengths_ok,
        format!("linearity error {lin_err:.1e}, mean error {energy_err:.1e}, 288 -> 48 ok={lengths_ok}"),
    )
}

fn shape_vs_point() -> Outcome {
    let mut r = rng::stream(4, "acceptance/shift");
    let (mut worst_fce, mut min_mse): (f64, f64) = (0.0, f64::INFINITY);
    for _ in 0..100 {
        let x = random_profile(&mut r, 288);
        let mut shifted = x.clone();
        shifted.rotate_right(1);
        worst_fce = worst_fce.max(fce(&shifted, &x).unwrap());
        min_mse = min_mse.min(mse(&shifted, &x).unwrap());
    }
    Outcome::new(
        worst_fce < 1e-9 && min_mse > 0.0,
        format!("max FCE {worst_fce:.1e}, min MSE {min_mse:.3}"),
    )
}

fn desk_config(seed: u64) -> RunConfig {
    RunConfig {
        seed,
        households: 20,
        days_per_household: 100,
        features: 16,
        residual_blocks: 2,
        polisher_features: 8,
        lr: 1e-3,
        lr_polish: 1e-3,
        epochs_gan: 30,
        epochs_polish: 30,
        checkpoint_every: 0,
        ..RunConfig::default()
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn table_ordering() -> Outcome {
    let start = Instant::now();
    let seeds = [2022, 2023, 2024];
    let mut reports = Vec::new();
    for &s in &seeds {
        match run_experiment(&desk_config(s), None) {
            Ok(e) => reports.push(e.report),
            Err(e) => return Outcome::new(false, format!("seed {s}: {e}")),
        }
    }
    let m = |method: &str, k: MetricKind| median(reports.iter().map(|r| r.summary(method).unwrap().means.get(k)).collect());
    let a = m(CNN, MetricKind::Mse) <= m(GAN_UNPOLISHED, MetricKind::Mse);
    let b = [MetricKind::Fce, MetricKind::Cpe, MetricKind::Ple]
        .iter()
        .all(|&k| m(GAN_POLISHED, k) < m(LERP, k));
    let c = m(GAN_POLISHED, MetricKind::Mse) < m(GAN_UNPOLISHED, MetricKind::Mse);
    let mut detail = format!("(a)={a} (b)={b} (c)={c}; medians");
    for method in [LERP, CNN, GAN_UNPOLISHED, GAN_POLISHED] {
        let cells: Vec<String> = MetricKind::ALL.iter().map(|&k| format!("{}={:.3}", k.name(), m(method, k))).collect();
        detail.push_str(&format!(" | {method}: {}", cells.join(" ")));
    }
    let secs = start.elapsed().as_secs_f64();
    detail.push_str(&format!(" | {secs:.0} s"));
    Outcome::new(a && b && c && secs < 45.0 * 60.0, detail)
}

fn baseline_equivalence() -> Outcome {
    let cfg = RunConfig {
        lambda1: 0.0,
        lambda2: 0.0,
        epochs_gan: 3,
        ..tiny_config(20)
    };
    let data = Dataset::prepare(&cfg).unwrap();
    let gan = train_stage1(&cfg, &data, None).unwrap();
    let cnn = train_cnn_baseline(&cfg, &data, None).unwrap();
    let params = gan.generator == cnn.generator;
    let logs = CNN_COLUMNS.iter().all(|c| {
        let bits = |l: &profilesr::harness::TrainLog| l.column(c).unwrap().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        bits(&gan.log) == bits(&cnn.log)
    });
    Outcome::new(params && logs, format!("generator parameters equal={params}, L_G/L_cont bits equal={logs}"))
}

fn train_once(dir: &Path) -> bool {
    let args = [
        "train", "--households", "2", "--days-per-household", "6", "--features", "4", "--residual-blocks", "1",
        "--polisher-features", "4", "--polisher-blocks", "1", "--batch-size", "4", "--epochs-gan", "2",
        "--epochs-polish", "2", "--checkpoint-every", "1", "--seed", "7",
    ];
    let ok = Command::new(env!("CARGO_BIN_EXE_profilesr"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false);
    ok && Command::new(env!("CARGO_BIN_EXE_profilesr"))
        .args(["polish", "--config"])
        .arg(dir.join("config.kv"))
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn reproducibility() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    if !(train_once(a.path()) && train_once(b.path())) {
        return Outcome::new(false, "train/polish invocation failed");
    }
    let mut names: Vec<String> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv") || n.ends_with(".ckpt"))
        .collect();
    names.sort();
    let differing: Vec<&String> = names
        .iter()
        .filter(|n| std::fs::read(a.path().join(n)).ok() != std::fs::read(b.path().join(n)).ok())
        .collect();
    Outcome::new(
        differing.is_empty() && names.len() >= 8,
        format!("{} log/checkpoint files compared, differing: {differing:?}", names.len()),
    )
}

fn shape_contracts() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for alpha in [3, 6, 12] {
        let cfg = GeneratorConfig {
            features: 4,
            residual_blocks: 1,
            ..GeneratorConfig::for_alpha(alpha, 0).unwrap()
        };
        let params = init_params(&cfg, &mut rng::stream(alpha as u64, "acceptance/shape"));
        let lr_len = 288 / alpha;
        let lr = Tensor::zeros(Shape::new(2, 1, lr_len));
        let out = generator_forward(&cfg, &params, &lr, None).unwrap();
        let len_ok = out.shape() == Shape::new(2, 1, alpha * lr_len);
        let bytes = Checkpoint { alpha: alpha as u32, epoch: 1, params: params.clone() }.to_bytes().unwrap();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        let round_ok = back.params == params && back.to_bytes().unwrap() == bytes;
        ok &= len_ok && round_ok;
        notes.push(format!("alpha {alpha}: {lr_len} -> {}", out.shape().len));
    }
    let pcfg = PolisherConfig { features: 4, residual_blocks: 1, ..PolisherConfig::default() };
    let pol = init_params(&pcfg, &mut rng::stream(1, "acceptance/polisher"));
    let x = Tensor::zeros(Shape::new(2, 1, 288));
    let pol_ok = polisher_forward(&pcfg, &pol, &x).unwrap().shape() == x.shape();
    let bytes = Checkpoint { alpha: 6, epoch: 0, params: pol.clone() }.to_bytes().unwrap();
    let pol_round = Checkpoint::from_bytes(&bytes).unwrap().params == pol;
    ok &= pol_ok && pol_round;
    Outcome::new(ok, format!("{}; polisher keeps length={pol_ok}, checkpoints bit-exact", notes.join(", ")))
}

fn gain_arithmetic() -> Outcome {
    let profile = |ple, fce, cpe| ProfileMetrics { id: "fixture".into(), values: MetricSet { mse: 1.0, ple, fce, cpe } };
    let report = build_report(
        vec![
            MethodResults::new(LERP, vec![profile(1.38, 7.22, 0.65)]),
            MethodResults::new(GAN_POLISHED, vec![profile(0.73, 4.65, 0.25)]),
        ],
        LERP,
    )
    .unwrap();
    let g = report.summary(GAN_POLISHED).unwrap().gains;
    let got = [
        rounded_percent(g.get(MetricKind::Ple)),
        rounded_percent(g.get(MetricKind::Fce)),
        rounded_percent(g.get(MetricKind::Cpe)),
    ];
    Outcome::new(got == [47, 36, 62], format!("PLE/FCE/CPE gains {got:?}%"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("gradient suite", gradient_suite),
        ("metric oracles", metric_oracles),
        ("downsampling laws", downsampling_laws),
        ("shape-vs-point discrimination", shape_vs_point),
        ("directional method ordering", table_ordering),
        ("baseline equivalence", baseline_equivalence),
        ("reproducibility", reproducibility),
        ("length/shape contracts", shape_contracts),
        ("gain arithmetic", gain_arithmetic),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let o = run();
        println!("criterion {id} [{name}]: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
