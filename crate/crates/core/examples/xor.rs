//! XOR with a 2-2-1 and a 2-2-2-2-2-1 network, trained in one pass.

use karspace::data::gen_xor;
use karspace::eval::predicted_classes;
use karspace::{train, Model, NetworkSpec, TrainConfig};

fn main() {
    let d = gen_xor();
    for widths in [vec![2, 1], vec![2, 2, 2, 2, 1]] {
        let spec = NetworkSpec::new(2, widths.clone()).unwrap();
        let (weights, report) = train(&d.x, &d.y, &spec, &TrainConfig::with_seed(0)).unwrap();
        let model = Model { spec, weights };
        let out = model.predict(&d.x).unwrap();
        println!("widths {widths:?}: {} pseudo-inverses", report.pinv_calls);
        for (i, class) in predicted_classes(&out).iter().enumerate() {
            println!("  ({}, {}) -> {:.4} class {class}", d.x[(i, 0)], d.x[(i, 1)], out[(i, 0)]);
        }
    }
}
