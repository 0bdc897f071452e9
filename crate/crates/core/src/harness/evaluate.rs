use std::path::Path;

use crate::baselines::lerp_values;
use crate::error::{invalid, Error, Result};
use crate::harness::{
    generator_outputs, train_cnn_baseline, train_stage1, train_stage2, Dataset, RunConfig, Stage1, Stage2,
};
use crate::metrics::{
    build_report, spectral_wasserstein, MethodResults, MetricKind, MetricReport, ProfileMetrics,
};
use crate::networks::{polisher_forward, GeneratorConfig, NetworkParams, PolisherConfig};
use crate::signal::Tensor;

pub const LERP: &str = "LERP";
pub const CNN: &str = "CNN";
pub const GAN_UNPOLISHED: &str = "GAN-unpolished";
pub const GAN_POLISHED: &str = "GAN-polished";

/// Metric settings shared by every method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub rdp_fraction: f64,
    pub spectral_bins: usize,
}

impl MetricConfig {
    pub fn from_run(config: &RunConfig) -> Self {
        Self {
            rdp_fraction: config.rdp_fraction,
            spectral_bins: config.spectral_bins,
        }
    }
}

fn range(x: &[f64]) -> f64 {
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Per-profile metrics in input order, computed on all available cores.
fn profile_metrics(
    ids: &[String],
    truth: &[Vec<f64>],
    generated: &[Vec<f64>],
    metric: MetricConfig,
) -> Result<Vec<ProfileMetrics>> {
    let n = truth.len();
    let workers = std::thread::available_parallelism().map_or(1, |w| w.get()).min(n.max(1));
    let chunk = n.div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..n)
            .step_by(chunk)
            .map(|start| {
                let end = (start + chunk).min(n);
                s.spawn(move || {
                    (start..end)
                        .map(|i| {
                            let eps = metric.rdp_fraction * range(&truth[i]);
                            ProfileMetrics::compute(ids[i].clone(), &generated[i], &truth[i], Some(eps))
                        })
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(n);
        for h in handles {
            out.extend(h.join().expect("metric worker panicked")?);
        }
        Ok(out)
    })
}

/// Scores each method's reconstructions of the same ground truth. The
/// baseline must be among `methods` under the name [`LERP`].
pub fn evaluate_outputs(
    ids: &[String],
    truth: &[Vec<f64>],
    methods: Vec<(String, Vec<Vec<f64>>)>,
    metric: MetricConfig,
) -> Result<MetricReport> {
    if ids.len() != truth.len() {
        return Err(Error::LengthMismatch {
            op: "evaluate ids",
            left: ids.len(),
            right: truth.len(),
        });
    }
    if !methods.iter().any(|(m, _)| m == LERP) {
        return Err(invalid(format!("missing outputs for baseline `{LERP}`")));
    }
    let mut results = Vec::with_capacity(methods.len());
    for (name, outputs) in methods {
        if outputs.len() != truth.len() {
            return Err(invalid(format!(
                "method `{name}` produced {} profiles for a test set of {}",
                outputs.len(),
                truth.len()
            )));
        }
        let profiles = profile_metrics(ids, truth, &outputs, metric)?;
        let mut r = MethodResults::new(name, profiles);
        r.wasserstein = Some(spectral_wasserstein(&outputs, truth, metric.spectral_bins)?);
        results.push(r);
    }
    build_report(results, LERP)
}

/// Trained networks needed to upsample the test split.
#[derive(Debug, Clone, Copy)]
pub struct Models<'a> {
    pub generator_config: &'a GeneratorConfig,
    pub gan: &'a NetworkParams,
    pub cnn: &'a NetworkParams,
    pub polisher_config: &'a PolisherConfig,
    pub polisher: &'a NetworkParams,
}

fn denormalize_all(data: &Dataset, normalized: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    normalized
        .into_iter()
        .map(|p| data.normalizer.load.denormalize(&p).into_iter().map(|v| v.max(0.0)).collect())
        .collect()
}

/// Outputs of every method on `indices`, in kW with negatives clamped to zero.
pub fn method_outputs(
    config: &RunConfig,
    data: &Dataset,
    models: Models<'_>,
    indices: &[usize],
) -> Result<Vec<(String, Vec<Vec<f64>>)>> {
    let lerp = indices
        .iter()
        .map(|&i| lerp_values(data.samples[i].lr.values(), data.alpha).map(|v| v.into_iter().map(|x| x.max(0.0)).collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let cnn = generator_outputs(models.generator_config, models.cnn, data, indices, config.batch_size)?;
    let gan = generator_outputs(models.generator_config, models.gan, data, indices, config.batch_size)?;
    let mut polished = Vec::with_capacity(gan.len());
    for chunk in gan.chunks(config.batch_size.max(1)) {
        let y = polisher_forward(models.polisher_config, models.polisher, &Tensor::from_signals(chunk)?)?;
        polished.extend((0..chunk.len()).map(|i| y.row(i, 0).to_vec()));
    }
    Ok(vec![
        (LERP.to_string(), lerp),
        (CNN.to_string(), denormalize_all(data, cnn)),
        (GAN_UNPOLISHED.to_string(), denormalize_all(data, gan)),
        (GAN_POLISHED.to_string(), denormalize_all(data, polished)),
    ])
}

/// Evaluates all four methods on the test split.
pub fn evaluate(config: &RunConfig, data: &Dataset, models: Models<'_>) -> Result<MetricReport> {
    let test = &data.split.test;
    let ids: Vec<String> = test.iter().map(|&i| data.samples[i].id()).collect();
    let truth: Vec<Vec<f64>> = test.iter().map(|&i| data.samples[i].hr.values().to_vec()).collect();
    let methods = method_outputs(config, data, models, test)?;
    evaluate_outputs(&ids, &truth, methods, MetricConfig::from_run(config))
}

/// Everything produced by one end-to-end run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: RunConfig,
    pub gan: Stage1,
    pub cnn: Stage1,
    pub polish: Stage2,
    pub report: MetricReport,
}

impl Experiment {
    /// Writes logs, configuration and the report under `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.config.save(dir.join("config.kv"))?;
        self.gan.log.save(dir.join("train_log.csv"))?;
        self.cnn.log.save(dir.join("cnn_log.csv"))?;
        self.polish.log.save(dir.join("polish_log.csv"))?;
        self.report.save(&dir.join("report"))
    }
}

/// Synthesizes (or loads) data, trains both stages and the baseline, and
/// evaluates on the test split. Checkpoints go to `checkpoint_dir` if given.
pub fn run_experiment(config: &RunConfig, checkpoint_dir: Option<&Path>) -> Result<Experiment> {
    let data = Dataset::prepare(config)?;
    run_on(config, &data, checkpoint_dir)
}

pub fn run_on(config: &RunConfig, data: &Dataset, checkpoint_dir: Option<&Path>) -> Result<Experiment> {
    let gan = train_stage1(config, data, checkpoint_dir)?;
    let cnn = train_cnn_baseline(config, data, checkpoint_dir)?;
    let polish = train_stage2(config, data, &gan.generator_config, &gan.generator, checkpoint_dir)?;
    let pcfg = config.polisher_config();
    let report = evaluate(
        config,
        data,
        Models {
            generator_config: &gan.generator_config,
            gan: &gan.generator,
            cnn: &cnn.generator,
            polisher_config: &pcfg,
            polisher: &polish.polisher,
        },
    )?;
    Ok(Experiment {
        config: config.clone(),
        gan,
        cnn,
        polish,
        report,
    })
}

/// One full run per scale factor. Every factor is validated before any
/// training starts.
pub fn sweep_alpha(config: &RunConfig, alphas: &[usize]) -> Result<Vec<(usize, Experiment)>> {
    let configs = alphas
        .iter()
        .map(|&a| {
            let c = RunConfig { alpha: a, ..config.clone() };
            c.validate().map(|_| (a, c))
        })
        .collect::<Result<Vec<_>>>()?;
    configs
        .into_iter()
        .map(|(a, c)| run_experiment(&c, None).map(|e| (a, e)))
        .collect()
}

/// Two identical runs differing only in weather conditioning:
/// `(with weather, without weather)`.
pub fn ablate_weather(config: &RunConfig) -> Result<(Experiment, Experiment)> {
    let on = run_experiment(&RunConfig { weather: true, ..config.clone() }, None)?;
    let off = run_experiment(&RunConfig { weather: false, ..config.clone() }, None)?;
    Ok((on, off))
}

/// One row per (label, method) with the four metric means.
pub fn comparison_table(reports: &[(String, &MetricReport)]) -> String {
    let mut out = String::from("run,method,MSE,PLE,FCE,CPE\n");
    for (label, r) in reports {
        for s in &r.summaries {
            let cells: Vec<String> = MetricKind::ALL.iter().map(|&k| s.means.get(k).to_string()).collect();
            out.push_str(&format!("{label},{},{}\n", s.method, cells.join(",")));
        }
    }
    out
}
