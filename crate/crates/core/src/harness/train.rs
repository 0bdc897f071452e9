use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::baselines::cnn_baseline_config;
use crate::error::{invalid, Error, Result};
use crate::harness::{Dataset, RunConfig};
use crate::losses::{graph, LossWeights};
use crate::networks::{
    discriminator_graph, generator_forward, generator_graph, generator_input, init_params, polisher_graph,
    Checkpoint, DiscriminatorConfig, GeneratorConfig, Mode, NetworkParams,
};
use crate::rng::{self, Rng};
use crate::signal::{AdamState, Tape, Tensor};

/// Per-epoch means of tracked quantities. The first column is always `epoch`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub const STAGE1_COLUMNS: &[&str] = &["L_D", "L_G", "L_cont", "L_adv", "L_feat", "D_real", "D_fake"];
pub const CNN_COLUMNS: &[&str] = &["L_G", "L_cont"];
pub const STAGE2_COLUMNS: &[&str] = &["L_pol", "L_out", "L_swit"];

impl TrainLog {
    pub fn new(columns: &[&str]) -> Self {
        let mut c = vec!["epoch".to_string()];
        c.extend(columns.iter().map(|s| s.to_string()));
        Self {
            columns: c,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn all_finite(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_finite())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let columns: Vec<String> = reader
            .headers()
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            let row = rec
                .iter()
                .map(|c| {
                    c.parse::<f64>().map_err(|_| Error::Csv {
                        path: path.to_path_buf(),
                        row: i + 2,
                        message: format!("`{c}` is not a number"),
                    })
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}

struct EpochMeans {
    sums: Vec<f64>,
    batches: usize,
}

impl EpochMeans {
    fn new(n: usize) -> Self {
        Self { sums: vec![0.0; n], batches: 0 }
    }

    fn add(&mut self, values: &[f64]) {
        for (s, v) in self.sums.iter_mut().zip(values) {
            *s += v;
        }
        self.batches += 1;
    }

    fn row(&self, epoch: usize) -> Vec<f64> {
        let mut r = vec![epoch as f64];
        r.extend(self.sums.iter().map(|s| s / self.batches.max(1) as f64));
        r
    }
}

fn batches(indices: &[usize], batch_size: usize, shuffle: Option<&mut Rng>) -> Vec<Vec<usize>> {
    let mut order = indices.to_vec();
    if let Some(rng) = shuffle {
        order.shuffle(rng);
    }
    order.chunks(batch_size).map(<[usize]>::to_vec).collect()
}

fn abort(epoch: usize, batch: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::TrainingAborted {
        epoch,
        batch,
        source: Box::new(e),
    }
}

fn save_checkpoint(dir: &Path, name: &str, alpha: usize, epoch: usize, params: &NetworkParams) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Checkpoint {
        alpha: alpha as u32,
        epoch: epoch as u32,
        params: params.clone(),
    }
    .save(dir.join(name))
}

fn mean(t: &Tensor) -> f64 {
    t.data().iter().sum::<f64>() / t.numel().max(1) as f64
}

/// Result of the first stage (or of the content-only baseline, which has no
/// discriminator).
#[derive(Debug, Clone)]
pub struct Stage1 {
    pub generator_config: GeneratorConfig,
    pub generator: NetworkParams,
    pub discriminator: Option<NetworkParams>,
    pub log: TrainLog,
}

/// One discriminator update on a real batch and a detached fake batch.
/// Returns `(L_D, mean real score, mean fake score)`.
fn discriminator_step(
    config: &DiscriminatorConfig,
    params: &mut NetworkParams,
    adam: &mut AdamState,
    real: &Tensor,
    fake: &Tensor,
) -> Result<(f64, f64, f64)> {
    let mut tape = Tape::new();
    let session = params.bind_eval(&mut tape, true);
    let r = tape.constant(real.clone());
    let f = tape.constant(fake.clone());
    let out_r = discriminator_graph(config, &session, &mut tape, r)?;
    let out_f = discriminator_graph(config, &session, &mut tape, f)?;
    let loss = graph::discriminator_loss(&mut tape, out_r.score, out_f.score)?;
    let grads = tape.backward(loss)?;
    let named = session.gradients(&tape, &grads);
    let stats = (
        tape.value(loss).item()?,
        mean(tape.value(out_r.score)),
        mean(tape.value(out_f.score)),
    );
    adam.step(&mut params.tensors, &named)?;
    Ok(stats)
}

struct Discriminator<'a> {
    config: DiscriminatorConfig,
    params: &'a mut NetworkParams,
    adam: &'a mut AdamState,
    steps: usize,
}

/// One generator update, preceded by discriminator updates when adversarial
/// training is on. Returns the stage-one log columns (or the baseline ones).
fn generator_step(
    config: &GeneratorConfig,
    params: &mut NetworkParams,
    adam: &mut AdamState,
    disc: Option<&mut Discriminator<'_>>,
    weights: LossWeights,
    batch: &crate::harness::Batch,
) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let input = generator_input(config, &batch.lr, batch.weather.as_ref())?;
    let x = tape.constant(input);
    let mut session = params.bind(&mut tape, true, Mode::Train);
    let fake = generator_graph(config, &mut session, &mut tape, x)?;
    let real = tape.constant(batch.hr.clone());
    let content = graph::content_loss(&mut tape, fake, real)?;
    let (total, row) = match disc {
        None => (content, None),
        Some(d) => {
            let detached = tape.value(fake).clone();
            let mut d_stats = (0.0, 0.0, 0.0);
            for _ in 0..d.steps {
                d_stats = discriminator_step(&d.config, d.params, d.adam, &batch.hr, &detached)?;
            }
            let ds = d.params.bind_eval(&mut tape, false);
            let out_f = discriminator_graph(&d.config, &ds, &mut tape, fake)?;
            let out_r = discriminator_graph(&d.config, &ds, &mut tape, real)?;
            let adv = graph::adversarial_loss(&mut tape, out_f.score)?;
            let feat = graph::feature_matching_loss(&mut tape, &out_f.features, &out_r.features)?;
            let total = graph::generator_loss(&mut tape, content, adv, feat, weights)?;
            (total, Some((d_stats, adv, feat)))
        }
    };
    let grads = tape.backward(total)?;
    let named = session.gradients(&tape, &grads);
    drop(session);
    let l_g = tape.value(total).item()?;
    let l_cont = tape.value(content).item()?;
    let out = match row {
        None => vec![l_g, l_cont],
        Some(((l_d, d_real, d_fake), adv, feat)) => vec![
            l_d,
            l_g,
            l_cont,
            tape.value(adv).item()?,
            tape.value(feat).item()?,
            d_real,
            d_fake,
        ],
    };
    adam.step(&mut params.tensors, &named)?;
    Ok(out)
}

fn train_generator(
    config: &RunConfig,
    data: &Dataset,
    adversarial: bool,
    checkpoint_dir: Option<&Path>,
) -> Result<Stage1> {
    config.validate()?;
    let gcfg = config.generator_config(data.weather_channels())?;
    let (weights, prefix) = if adversarial {
        (config.loss_weights(), "generator")
    } else {
        (cnn_baseline_config(&gcfg)?.weights, "cnn")
    };
    let mut generator = init_params(&gcfg, &mut rng::stream(config.seed, "init/generator"));
    let mut adam_g = AdamState::new(config.adam());
    let dcfg = config.discriminator_config();
    let mut discriminator = adversarial.then(|| init_params(&dcfg, &mut rng::stream(config.seed, "init/discriminator")));
    let mut adam_d = AdamState::new(config.adam());
    let mut shuffle = rng::stream(config.seed, "shuffle/stage1");
    let columns = if adversarial { STAGE1_COLUMNS } else { CNN_COLUMNS };
    let mut log = TrainLog::new(columns);

    for epoch in 1..=config.epochs_gan {
        let mut means = EpochMeans::new(columns.len());
        let order = batches(&data.split.train, config.batch_size, config.shuffle.then_some(&mut shuffle));
        for (b, idx) in order.iter().enumerate() {
            let batch = data.batch(idx).map_err(abort(epoch, b))?;
            let mut disc = discriminator.as_mut().map(|p| Discriminator {
                config: dcfg.clone(),
                params: p,
                adam: &mut adam_d,
                steps: config.d_steps,
            });
            let row = generator_step(&gcfg, &mut generator, &mut adam_g, disc.as_mut(), weights, &batch)
                .map_err(abort(epoch, b))?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(abort(epoch, b)(Error::NonFinite("stage-one loss".into())));
            }
            means.add(&row);
        }
        log.rows.push(means.row(epoch));
        if let Some(dir) = checkpoint_dir {
            if config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0 {
                save_checkpoint(dir, &format!("{prefix}_e{epoch:04}.ckpt"), config.alpha, epoch, &generator)?;
                if let Some(d) = &discriminator {
                    save_checkpoint(dir, &format!("discriminator_e{epoch:04}.ckpt"), config.alpha, epoch, d)?;
                }
            }
        }
    }
    if let Some(dir) = checkpoint_dir {
        save_checkpoint(dir, &format!("{prefix}.ckpt"), config.alpha, config.epochs_gan, &generator)?;
        if let Some(d) = &discriminator {
            save_checkpoint(dir, "discriminator.ckpt", config.alpha, config.epochs_gan, d)?;
        }
    }
    Ok(Stage1 {
        generator_config: gcfg,
        generator,
        discriminator,
        log,
    })
}

/// Adversarial training of generator and discriminator with one (or
/// `d_steps`) discriminator update before each generator update.
pub fn train_stage1(config: &RunConfig, data: &Dataset, checkpoint_dir: Option<&Path>) -> Result<Stage1> {
    train_generator(config, data, true, checkpoint_dir)
}

/// Same generator, schedule and seed streams as [`train_stage1`], trained on
/// the content loss alone.
pub fn train_cnn_baseline(config: &RunConfig, data: &Dataset, checkpoint_dir: Option<&Path>) -> Result<Stage1> {
    train_generator(config, data, false, checkpoint_dir)
}

#[derive(Debug, Clone)]
pub struct Stage2 {
    pub polisher: NetworkParams,
    pub log: TrainLog,
}

/// Eval-mode generator outputs (normalized) for `indices`, computed in batches.
pub fn generator_outputs(
    config: &GeneratorConfig,
    generator: &NetworkParams,
    data: &Dataset,
    indices: &[usize],
    batch_size: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(indices.len());
    for chunk in indices.chunks(batch_size.max(1)) {
        let b = data.batch(chunk)?;
        let y = generator_forward(config, generator, &b.lr, b.weather.as_ref())?;
        for i in 0..chunk.len() {
            out.push(y.row(i, 0).to_vec());
        }
    }
    Ok(out)
}

/// Trains the polisher on frozen-generator outputs against the true
/// high-resolution profiles.
pub fn train_stage2(
    config: &RunConfig,
    data: &Dataset,
    generator_config: &GeneratorConfig,
    generator: &NetworkParams,
    checkpoint_dir: Option<&Path>,
) -> Result<Stage2> {
    config.validate()?;
    let pcfg = config.polisher_config();
    let pool = config.pool();
    let mut polisher = init_params(&pcfg, &mut rng::stream(config.seed, "init/polisher"));
    let mut adam = AdamState::new(config.adam_polish());
    let mut shuffle = rng::stream(config.seed, "shuffle/stage2");
    let mut log = TrainLog::new(STAGE2_COLUMNS);

    let train = &data.split.train;
    let generated = generator_outputs(generator_config, generator, data, train, config.batch_size)?;
    // position of each training index inside `generated`
    let slot: std::collections::BTreeMap<usize, usize> = train.iter().enumerate().map(|(k, &i)| (i, k)).collect();

    for epoch in 1..=config.epochs_polish {
        let mut means = EpochMeans::new(STAGE2_COLUMNS.len());
        let order = batches(train, config.batch_size, config.shuffle.then_some(&mut shuffle));
        for (b, idx) in order.iter().enumerate() {
            let mut step = || -> Result<Vec<f64>> {
                let inputs: Vec<&[f64]> = idx.iter().map(|i| generated[slot[i]].as_slice()).collect();
                let target = data.batch(idx)?.hr;
                let mut tape = Tape::new();
                let x = tape.constant(Tensor::from_signals(&inputs)?);
                let y = tape.constant(target);
                let mut session = polisher.bind(&mut tape, true, Mode::Train);
                let out = polisher_graph(&pcfg, &mut session, &mut tape, x)?;
                let (total, outline, switching) = graph::polishing_loss(&mut tape, out, y, pool)?;
                let grads = tape.backward(total)?;
                let named = session.gradients(&tape, &grads);
                drop(session);
                let row = vec![
                    tape.value(total).item()?,
                    tape.value(outline).item()?,
                    tape.value(switching).item()?,
                ];
                adam.step(&mut polisher.tensors, &named)?;
                Ok(row)
            };
            let row = step().map_err(abort(epoch, b))?;
            means.add(&row);
        }
        log.rows.push(means.row(epoch));
        if let Some(dir) = checkpoint_dir {
            if config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0 {
                save_checkpoint(dir, &format!("polisher_e{epoch:04}.ckpt"), config.alpha, epoch, &polisher)?;
            }
        }
    }
    if let Some(dir) = checkpoint_dir {
        save_checkpoint(dir, "polisher.ckpt", config.alpha, config.epochs_polish, &polisher)?;
    }
    Ok(Stage2 { polisher, log })
}
