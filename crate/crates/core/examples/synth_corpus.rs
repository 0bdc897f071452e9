//! Synthesizes a small household corpus and writes it as CSV.
//!
//! `cargo run --example synth_corpus -- [out_dir]`

use profilesr::data::{save_csv, save_weather_csv, synthesize_corpus, CorpusSpec};

fn main() -> profilesr::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("profilesr_corpus").display().to_string());
    let spec = CorpusSpec {
        households: 3,
        days_per_household: 7,
        ..CorpusSpec::default()
    };
    let corpus = synthesize_corpus(&spec)?;
    std::fs::create_dir_all(&out)?;
    let load = std::path::Path::new(&out).join("load.csv");
    save_csv(&corpus.profiles, &load)?;
    // one household keeps weather days unique
    let tracks: Vec<_> = corpus
        .profiles
        .iter()
        .zip(&corpus.weather)
        .filter(|(p, _)| p.household_id == "h000")
        .map(|(p, w)| (p.day, w.clone()))
        .collect();
    save_weather_csv(&tracks, std::path::Path::new(&out).join("weather.csv"))?;

    println!("household,day,mean_kw,peak_kw");
    for p in &corpus.profiles {
        println!("{},{},{:.3},{:.3}", p.household_id, p.day, p.mean(), p.peak());
    }
    println!("wrote {} profiles to {}", corpus.len(), load.display());
    Ok(())
}
