//! Generator, discriminator and polishing networks built from
//! [`crate::signal`] layers.

mod checkpoint;
mod config;
mod discriminator;
mod generator;
mod params;
mod polisher;

pub use checkpoint::{Checkpoint, FORMAT_VERSION, MAGIC};
pub use config::{
    strides_for_alpha, Architecture, DiscriminatorConfig, GeneratorConfig, Init, PolisherConfig,
};
pub use discriminator::{discriminator_forward, discriminator_graph, DiscriminatorOutput};
pub use generator::{generator_forward, generator_forward_train, generator_graph, generator_input};
pub use params::{init_params, Mode, NetworkParams, RunningStats, Session, INIT_STD};
pub use polisher::{polisher_forward, polisher_graph};
