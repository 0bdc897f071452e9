//! Load-profile datasets: synthesis, ingestion, downsampling, normalization
//! and splitting.

mod csv_io;
mod downsample;
mod normalize;
mod profile;
mod split;
pub mod synth;
mod weather;

pub use csv_io::{load_csv, load_csv_resampled, load_weather_csv, save_csv, save_weather_csv};
pub use downsample::{block_mean, downsample};
pub use normalize::{Normalizer, ZScore, STD_FLOOR};
pub use profile::{flag_abnormal, LoadProfile, MINUTES_PER_DAY};
pub use split::{split_dataset, DatasetSplit, SplitFractions};
pub use synth::{synthesize_corpus, synthesize_profile, Corpus, CorpusSpec, SynthSpec};
pub use weather::{interpolate_weather, WeatherTrack, WeatherVar};
