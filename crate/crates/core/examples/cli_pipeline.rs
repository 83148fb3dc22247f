//! Drives the `karnet` command line in-process: synth, train, surface, then replay.

use karspace::cli::{main_with_args, Manifest};

fn run(args: &[&str]) {
    let code = main_with_args(std::iter::once("karnet").chain(args.iter().copied()));
    println!("karnet {} -> exit {code}", args.join(" "));
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();

    run(&["synth", "--kind", "xor", "--out", &p("xor.csv")]);
    run(&["train", "--data", &p("xor.csv"), "--widths", "2,1", "--model", &p("xor.kar")]);
    print!("{}", std::fs::read_to_string(p("xor.kar.report")).unwrap());
    run(&["surface", "--model", &p("xor.kar"), "--resolution", "11", "--out", &p("grid.csv")]);

    let manifest = Manifest::read(std::path::Path::new(&p("xor.kar.manifest"))).unwrap();
    println!("manifest args: {}", manifest.args.join(" "));
    run(&["replay", "--manifest", &p("xor.kar.manifest"), "--out-dir", &p("again")]);
    let same = std::fs::read(p("xor.kar")).unwrap() == std::fs::read(p("again/xor.kar")).unwrap();
    println!("replayed model identical: {same}");

    // a model with one input cannot be drawn on a plane
    run(&["synth", "--kind", "sinc", "--out", &p("sinc.csv")]);
    run(&["train", "--data", &p("sinc.csv"), "--widths", "8,1", "--model", &p("sinc.kar")]);
    run(&["surface", "--model", &p("sinc.kar"), "--out", &p("nope.csv")]);
}
