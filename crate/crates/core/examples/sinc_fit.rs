//! Interpolating versus approximating sinc depending on the hidden width.

use karspace::data::{gen_sinc, SincConfig};
use karspace::eval::mse;
use karspace::{train, Model, NetworkSpec, TrainConfig};

fn main() {
    let noisy = gen_sinc(&SincConfig::default());
    let clean = noisy.clean_subset();
    println!("{} clean points, {} with noisy replicas", clean.rows(), noisy.rows());

    for widths in [vec![8, 1], vec![6, 1], vec![4, 1], vec![1, 1, 8, 1]] {
        let spec = NetworkSpec::new(1, widths.clone()).unwrap();
        let under = spec.is_underdetermined(clean.rows());
        let (w, report) = train(&clean.x, &clean.y, &spec, &TrainConfig::with_seed(0)).unwrap();
        let out = Model { spec, weights: w }.predict(&clean.x).unwrap();
        println!(
            "1-{}: mse {:.3e}, under-determined {under}, clipped {:.1}%",
            widths.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("-"),
            mse(&out, &clean.y).unwrap(),
            100.0 * report.clip_fraction()
        );
    }

    // the noisy set has 88 rows, so h=8 can only approximate it
    let spec = NetworkSpec::new(1, vec![8, 1]).unwrap();
    let (w, _) = train(&noisy.x, &noisy.y, &spec, &TrainConfig::with_seed(0)).unwrap();
    let model = Model { spec, weights: w };
    let out = model.predict(&clean.x).unwrap();
    println!("1-8-1 on noisy data, mse against clean points {:.3e}", mse(&out, &clean.y).unwrap());
}
