//! Saving a trained model, reading it back, and checking the outputs agree bit for bit.

use karspace::data::gen_xor;
use karspace::network::{read_model, write_model};
use karspace::{train, Model, NetworkSpec, TrainConfig};
use std::io::BufReader;

fn main() {
    let d = gen_xor();
    let spec = NetworkSpec::new(2, vec![4, 1]).unwrap();
    let (weights, _) = train(&d.x, &d.y, &spec, &TrainConfig::with_seed(3)).unwrap();
    let model = Model { spec, weights };

    let mut bytes = Vec::new();
    write_model(&model, &mut bytes).unwrap();
    let text = String::from_utf8_lossy(&bytes);
    for line in text.lines().take(8) {
        println!("{line}");
    }
    println!("... {} bytes", bytes.len());

    let back = read_model(BufReader::new(bytes.as_slice())).unwrap();
    let same = model.predict(&d.x).unwrap() == back.predict(&d.x).unwrap();
    println!("reloaded model identical: {}", back == model && same);
}
