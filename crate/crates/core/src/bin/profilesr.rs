use std::path::Path;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use profilesr::data::{downsample, load_csv, save_csv, save_weather_csv, synthesize_corpus, CorpusSpec};
use profilesr::harness::{
    ablate_weather, comparison_table, evaluate, sweep_alpha, train_cnn_baseline, train_stage1,
    train_stage2, Dataset, Models, RunConfig,
};
use profilesr::metrics::MetricReport;
use profilesr::networks::Checkpoint;
use profilesr::{rng, Error, Result};

fn with_config_flags(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("flat key = value configuration file"),
    );
    RunConfig::KEYS.iter().fold(cmd, |c, key| {
        let flag = key.replace('_', "-");
        c.arg(Arg::new(*key).long(flag).value_name("VALUE").help(format!("overrides `{key}`")))
    })
}

fn path_arg(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("PATH").required(true).help(help)
}

fn cli() -> Command {
    Command::new("profilesr")
        .about("Two-stage super-resolution for smart-meter load profiles")
        .subcommand_required(true)
        .subcommand(
            with_config_flags(Command::new("synth").about("write a synthetic high-resolution corpus"))
                .arg(path_arg("out", "profile CSV to write"))
                .arg(Arg::new("weather-out").long("weather-out").value_name("PATH").help("weather CSV to write")),
        )
        .subcommand(
            with_config_flags(Command::new("downsample").about("interval-average a profile CSV by `alpha`"))
                .arg(path_arg("input", "high-resolution profile CSV"))
                .arg(path_arg("output", "low-resolution profile CSV to write")),
        )
        .subcommand(with_config_flags(
            Command::new("train").about("train the adversarial generator and the content-only baseline"),
        ))
        .subcommand(with_config_flags(
            Command::new("polish").about("train the polishing network on a trained generator"),
        ))
        .subcommand(with_config_flags(Command::new("eval").about("score all methods on the test split")))
        .subcommand(
            with_config_flags(Command::new("sweep-alpha").about("full runs for several scale factors")).arg(
                Arg::new("alphas")
                    .long("alphas")
                    .value_name("LIST")
                    .default_value("3,6,12")
                    .help("comma-separated scale factors"),
            ),
        )
        .subcommand(with_config_flags(
            Command::new("ablate-weather").about("paired runs with and without weather input"),
        ))
        .subcommand(
            Command::new("export-report")
                .about("re-export a saved report as CSV files and a table")
                .arg(path_arg("report", "report.json written by eval"))
                .arg(Arg::new("out").long("out").value_name("DIR").help("directory for CSV output"))
                .arg(Arg::new("quiet").long("quiet").action(ArgAction::SetTrue).help("do not print the table")),
        )
}

fn config_from(m: &ArgMatches) -> Result<RunConfig> {
    let mut c = match m.get_one::<String>("config") {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for key in RunConfig::KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            c.set(key, v)?;
        }
    }
    c.validate()?;
    Ok(c)
}

fn load_generator(dir: &Path, name: &str, config: &RunConfig, data: &Dataset) -> Result<Checkpoint> {
    let gcfg = config.generator_config(data.weather_channels())?;
    Checkpoint::load_for(dir.join(name), &gcfg)
}

fn run(matches: ArgMatches) -> Result<()> {
    let (name, m) = matches.subcommand().expect("subcommand required");
    if name == "export-report" {
        let path = m.get_one::<String>("report").expect("required");
        let report = MetricReport::from_json(&std::fs::read_to_string(path)?)?;
        if let Some(out) = m.get_one::<String>("out") {
            report.save(Path::new(out))?;
        }
        if !m.get_flag("quiet") {
            print!("{}", report.to_table());
        }
        return Ok(());
    }
    let config = config_from(m)?;
    let out = config.out_dir.clone();
    match name {
        "synth" => {
            let corpus = synthesize_corpus(&CorpusSpec {
                households: config.households,
                days_per_household: config.days_per_household,
                seed: config.seed,
                ..CorpusSpec::default()
            })?;
            save_csv(&corpus.profiles, m.get_one::<String>("out").expect("required"))?;
            if let Some(w) = m.get_one::<String>("weather-out") {
                let mut by_day: Vec<_> = corpus.profiles.iter().map(|p| p.day).zip(corpus.weather).collect();
                by_day.sort_by_key(|(d, _)| *d);
                by_day.dedup_by_key(|(d, _)| *d);
                save_weather_csv(&by_day, w)?;
            }
            eprintln!("wrote {} profiles", corpus.profiles.len());
        }
        "downsample" => {
            let hr = load_csv(m.get_one::<String>("input").expect("required"))?;
            let mut noise = rng::stream(config.seed, "noise");
            let lr = hr
                .iter()
                .map(|p| downsample(p, config.alpha, config.noise_var, &mut noise))
                .collect::<Result<Vec<_>>>()?;
            save_csv(&lr, m.get_one::<String>("output").expect("required"))?;
        }
        "train" => {
            let data = Dataset::prepare(&config)?;
            std::fs::create_dir_all(&out)?;
            config.save(out.join("config.kv"))?;
            let gan = train_stage1(&config, &data, Some(&out))?;
            gan.log.save(out.join("train_log.csv"))?;
            let cnn = train_cnn_baseline(&config, &data, Some(&out))?;
            cnn.log.save(out.join("cnn_log.csv"))?;
        }
        "polish" => {
            let data = Dataset::prepare(&config)?;
            let gen = load_generator(&out, "generator.ckpt", &config, &data)?;
            let gcfg = config.generator_config(data.weather_channels())?;
            let before = gen.params.clone();
            let stage2 = train_stage2(&config, &data, &gcfg, &gen.params, Some(&out))?;
            if gen.params != before {
                return Err(Error::InvalidArgument("generator changed during polishing".into()));
            }
            stage2.log.save(out.join("polish_log.csv"))?;
        }
        "eval" => {
            let data = Dataset::prepare(&config)?;
            let gcfg = config.generator_config(data.weather_channels())?;
            let pcfg = config.polisher_config();
            let gan = load_generator(&out, "generator.ckpt", &config, &data)?;
            let cnn = load_generator(&out, "cnn.ckpt", &config, &data)?;
            let pol = Checkpoint::load_for(out.join("polisher.ckpt"), &pcfg)?;
            let report = evaluate(
                &config,
                &data,
                Models {
                    generator_config: &gcfg,
                    gan: &gan.params,
                    cnn: &cnn.params,
                    polisher_config: &pcfg,
                    polisher: &pol.params,
                },
            )?;
            report.save(&out.join("report"))?;
            print!("{}", report.to_table());
        }
        "sweep-alpha" => {
            let alphas = m
                .get_one::<String>("alphas")
                .expect("defaulted")
                .split(',')
                .map(|a| a.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad scale factor `{a}`"))))
                .collect::<Result<Vec<_>>>()?;
            let runs = sweep_alpha(&config, &alphas)?;
            let mut rows = Vec::new();
            for (a, e) in &runs {
                e.save(&out.join(format!("alpha_{a}")))?;
                rows.push((format!("alpha={a}"), &e.report));
            }
            let table = comparison_table(&rows);
            std::fs::write(out.join("sweep.csv"), &table)?;
            print!("{table}");
        }
        "ablate-weather" => {
            let (on, off) = ablate_weather(&config)?;
            on.save(&out.join("weather_on"))?;
            off.save(&out.join("weather_off"))?;
            let table = comparison_table(&[("weather".into(), &on.report), ("no_weather".into(), &off.report)]);
            std::fs::write(out.join("ablation.csv"), &table)?;
            print!("{table}");
        }
        _ => unreachable!("clap rejects unknown subcommands"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    match run(matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

