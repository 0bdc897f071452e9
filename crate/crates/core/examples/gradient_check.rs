//! Compares tape gradients of a conv + switching-loss graph with central
//! finite differences.

use profilesr::losses::{graph, PoolConfig};
use profilesr::rng;
use profilesr::signal::{Shape, Tape, Tensor};
use rand::Rng;

fn loss(x: &Tensor, w: &Tensor, y: &Tensor) -> profilesr::Result<(f64, Vec<f64>)> {
    let mut tape = Tape::new();
    let xv = tape.constant(x.clone());
    let wv = tape.leaf(w.clone(), true);
    let yv = tape.constant(y.clone());
    let h = tape.conv1d(xv, wv, None, 1, 1)?;
    let l = graph::switching_loss(&mut tape, h, yv, PoolConfig::default())?;
    let g = tape.backward(l)?;
    Ok((tape.value(l).item()?, g.get_or_zeros(wv, w.numel())))
}

fn main() -> profilesr::Result<()> {
    let mut r = rng::stream(3, "example/gradcheck");
    let mut random = |shape: Shape| {
        let data = (0..shape.numel()).map(|_| r.random_range(-1.0..1.0)).collect();
        Tensor::new(shape, data)
    };
    let x = random(Shape::new(2, 1, 16))?;
    let y = random(Shape::new(2, 1, 16))?;
    let w = random(Shape::new(1, 1, 3))?;

    let (value, analytic) = loss(&x, &w, &y)?;
    println!("loss {value:.6}");
    println!("weight,analytic,numeric");
    let h = 1e-6;
    for i in 0..w.numel() {
        let mut up = w.clone();
        up.data_mut()[i] += h;
        let mut down = w.clone();
        down.data_mut()[i] -= h;
        let numeric = (loss(&x, &up, &y)?.0 - loss(&x, &down, &y)?.0) / (2.0 * h);
        println!("{i},{:.9},{numeric:.9}", analytic[i]);
    }
    Ok(())
}
