//! Three-arm spiral: train a 2-100-3 net and write its decision surface as CSV.
//!
//! `cargo run --release --example spiral_regions -- spiral_grid.csv`

use karspace::cli::{surface_csv, AxisRange};
use karspace::data::{gen_spiral, SpiralConfig};
use karspace::eval::accuracy;
use karspace::{train, Model, NetworkSpec, TrainConfig};

fn main() {
    let out_path = std::env::args().nth(1).unwrap_or_else(|| "spiral_grid.csv".into());
    let d = gen_spiral(&SpiralConfig::default());
    let spec = NetworkSpec::new(2, vec![100, 3]).unwrap();
    let (weights, report) = train(&d.x, &d.y, &spec, &TrainConfig::with_seed(0)).unwrap();
    let model = Model { spec, weights };
    let out = model.predict(&d.x).unwrap();
    println!(
        "training accuracy {:.2}% on {} points ({:.1}% of inverse inputs clipped)",
        accuracy(&out, d.labels.as_ref().unwrap()).unwrap(),
        d.rows(),
        100.0 * report.clip_fraction()
    );

    let range = AxisRange { lo: -1.1, hi: 1.1 };
    let csv = surface_csv(&model, range, range, 201).unwrap();
    std::fs::write(&out_path, &csv).unwrap();
    println!("wrote {out_path} ({} grid rows)", 201 * 201);
}
