//! The three training stages run by hand: random init, backward peel, back-substitution.

use karspace::data::{gen_spiral, SpiralConfig};
use karspace::network::{augment, forward};
use karspace::trainer::{back_substitute, init_weights, peel_targets};
use karspace::{NetworkSpec, TrainConfig};

fn main() {
    let d = gen_spiral(&SpiralConfig { points_per_arm: 100, ..SpiralConfig::default() });
    let spec = NetworkSpec::new(2, vec![40, 20, 3]).unwrap();
    let cfg = TrainConfig::with_seed(7);

    let init = init_weights(&spec, &cfg).unwrap();
    for (k, (r, c)) in spec.layer_shapes().into_iter().enumerate() {
        println!("W_{} {r}x{c}", k + 1);
    }

    let peeled = peel_targets(&d.y, &init, &spec, &cfg).unwrap();
    println!("peel: {} pseudo-inverses, {} clipped entries", peeled.pinv_calls, peeled.clip_events);
    for (k, g) in peeled.targets.iter().enumerate() {
        println!("  G_{} is {}x{}", k + 1, g.nrows(), g.ncols());
    }

    let x = augment(&d.x).unwrap();
    let solved = back_substitute(&x, &peeled, &spec, &cfg).unwrap();
    println!("back-substitution: {} pseudo-inverses", solved.pinv_calls);
    for (k, r) in solved.layer_residuals.iter().enumerate() {
        println!("  layer {} residual {r:.4}", k + 1);
    }

    let out = forward(&spec, &solved.weights, &x).unwrap();
    println!("output residual ||Y_hat - Y||_F = {:.4}", (&out - &d.y).norm());
}
