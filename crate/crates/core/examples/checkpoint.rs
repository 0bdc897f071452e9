//! Saves a generator checkpoint, reloads it against its config and shows
//! that a mismatched config is refused.

use profilesr::networks::{generator_forward, init_params, Checkpoint, GeneratorConfig};
use profilesr::rng;
use profilesr::signal::{Shape, Tensor};

fn main() -> profilesr::Result<()> {
    let config = GeneratorConfig {
        features: 8,
        residual_blocks: 1,
        ..GeneratorConfig::for_alpha(6, 0)?
    };
    let params = init_params(&config, &mut rng::stream(2022, "init/generator"));
    let path = std::env::temp_dir().join("profilesr_generator.ckpt");
    Checkpoint { alpha: 6, epoch: 0, params: params.clone() }.save(&path)?;
    println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());

    let restored = Checkpoint::load_for(&path, &config)?.params;
    let lr = Tensor::full(Shape::new(1, 1, 48), 0.5);
    let same = generator_forward(&config, &params, &lr, None)? == generator_forward(&config, &restored, &lr, None)?;
    println!("restored outputs identical: {same}");

    let other = GeneratorConfig { features: 16, ..config };
    match Checkpoint::load_for(&path, &other) {
        Ok(_) => println!("unexpected: mismatched config accepted"),
        Err(e) => println!("mismatched config refused: {e}"),
    }
    Ok(())
}
