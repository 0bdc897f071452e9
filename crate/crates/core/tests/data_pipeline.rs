mod common;

use common::tiny_config;
use profilesr::data::{save_csv, save_weather_csv, synthesize_corpus, synthesize_profile, CorpusSpec, SynthSpec};
use profilesr::harness::{Dataset, RunConfig};
use profilesr::rng;

#[test]
fn synthetic_mean_matches_expected_power() {
    let spec = SynthSpec::default();
    let mut r = rng::stream(4, "synth");
    let days = 1000;
    let total: f64 = (0..days)
        .map(|d| synthesize_profile(&spec, "h", d, &mut r).unwrap().0.mean())
        .sum();
    let mean = total / days as f64;
    let expected = spec.expected_mean_kw();
    assert!((mean - expected).abs() / expected < 0.10, "mean {mean} vs {expected}");
}

#[test]
fn csv_ingest_matches_in_memory_corpus() {
    let cfg = RunConfig {
        households: 1,
        ..tiny_config(12)
    };
    let cfg = RunConfig {
        days_per_household: 12,
        ..cfg
    };
    let corpus = synthesize_corpus(&CorpusSpec {
        households: cfg.households,
        days_per_household: cfg.days_per_household,
        seed: cfg.seed,
        ..CorpusSpec::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (load, weather) = (dir.path().join("load.csv"), dir.path().join("weather.csv"));
    save_csv(&corpus.profiles, &load).unwrap();
    let tracks: Vec<_> = corpus.profiles.iter().map(|p| p.day).zip(corpus.weather.iter().cloned()).collect();
    save_weather_csv(&tracks, &weather).unwrap();

    let synth = Dataset::prepare(&cfg).unwrap();
    let ingested = Dataset::prepare(&RunConfig {
        data: Some(load),
        weather_data: Some(weather),
        ..cfg.clone()
    })
    .unwrap();
    assert_eq!(synth.split, ingested.split);
    assert_eq!(synth.samples, ingested.samples);
    assert_eq!(synth.normalizer, ingested.normalizer);
}

#[test]
fn csv_ingest_rejects_missing_weather_days() {
    let corpus = synthesize_corpus(&CorpusSpec {
        households: 1,
        days_per_household: 6,
        ..CorpusSpec::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (load, weather) = (dir.path().join("load.csv"), dir.path().join("weather.csv"));
    save_csv(&corpus.profiles, &load).unwrap();
    let tracks: Vec<_> = corpus.profiles.iter().map(|p| p.day).zip(corpus.weather.iter().cloned()).take(5).collect();
    save_weather_csv(&tracks, &weather).unwrap();
    let err = Dataset::prepare(&RunConfig {
        data: Some(load),
        weather_data: Some(weather),
        ..tiny_config(6)
    })
    .unwrap_err();
    assert!(err.to_string().contains("no weather"), "{err}");
}
