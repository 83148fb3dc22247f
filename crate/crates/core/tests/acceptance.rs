//! End-to-end acceptance checks, one PASS/FAIL line each.
//!
//! Benchmark files are read from `$KARSPACE_DATA_DIR` (default `<workspace>/data`);
//! `scripts/fetch_data.py` extracts optdigits and letter. Set
//! `KARSPACE_ACCEPT_LETTER=1` for the long-running optional letter runs.

mod common;

use common::oracles::{self, Lcg};
use common::{from_rows, to_rows};
use karspace::cli::{main_with_args, Manifest};
use karspace::data::{self, Dataset, EncodingPlan};
use karspace::eval::{self, CVConfig, StructureRule};
use karspace::linalg::{pinv, solve_min_norm, sse};
use karspace::network::NetworkSpec;
use karspace::trainer::{train, TrainConfig};
use karspace::{Activation, Matrix, Model, PinvConfig};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

enum Status {
    Pass,
    Fail,
    Optional,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn pass_if(ok: bool, detail: String) -> Outcome {
    Outcome {
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os("KARSPACE_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1e-300)
}

fn penrose() -> Outcome {
    let start = Instant::now();
    let mut rng = Lcg::new(2024);
    let mut worst: f64 = 0.0;
    let mut deficient = 0;
    for case in 0..200 {
        let m = 1 + (rng.next_u64() % 50) as usize;
        let n = 1 + (rng.next_u64() % 50) as usize;
        let rank = if case % 2 == 1 && m.min(n) > 1 {
            deficient += 1;
            Some(1 + (rng.next_u64() % (m.min(n) as u64 - 1)) as usize)
        } else {
            None
        };
        let a = from_rows(&oracles::random_rows(&mut rng, m, n, rank));
        let p = pinv(&a, &PinvConfig::default()).unwrap();
        let ap = &a * &p;
        let pa = &p * &a;
        for e in [
            rel((&ap * &a - &a).norm(), a.norm()),
            rel((&pa * &p - &p).norm(), p.norm()),
            rel((&ap - ap.transpose()).norm(), ap.norm()),
            rel((&pa - pa.transpose()).norm(), pa.norm()),
        ] {
            worst = worst.max(e);
        }
    }
    let t = start.elapsed();
    pass_if(
        worst < 1e-8 && t < Duration::from_secs(30),
        format!("200 matrices ({deficient} rank-deficient), worst relative violation {worst:.2e}, {}", secs(t)),
    )
}

fn optimality() -> Outcome {
    let mut rng = Lcg::new(77);
    let cfg = PinvConfig::default();
    let mut sse_losses = 0;
    let mut norm_losses = 0;
    for _ in 0..50 {
        let m = 5 + (rng.next_u64() % 20) as usize;
        let n = 1 + (rng.next_u64() % 5) as usize;
        let x = from_rows(&oracles::random_rows(&mut rng, m, n, None));
        let y = from_rows(&oracles::random_rows(&mut rng, m, 2, None));
        let w = solve_min_norm(&x, &y, &cfg).unwrap();
        let best = sse(&x, &w, &y).unwrap();
        for i in 0..1000 {
            let scale = 10f64.powi(-(i % 6) as i32);
            let cand = Matrix::from_fn(n, 2, |r, c| w[(r, c)] + scale * rng.sym());
            if sse(&x, &cand, &y).unwrap() < best * (1.0 - 1e-12) {
                sse_losses += 1;
            }
        }
    }
    for _ in 0..50 {
        let m = 1 + (rng.next_u64() % 6) as usize;
        let n = m + 1 + (rng.next_u64() % 10) as usize;
        let xr = oracles::random_rows(&mut rng, m, n, None);
        let x = from_rows(&xr);
        let y = from_rows(&oracles::random_rows(&mut rng, m, 1, None));
        let w = solve_min_norm(&x, &y, &cfg).unwrap();
        for _ in 0..100 {
            let v: Vec<f64> = (0..n).map(|_| rng.sym()).collect();
            let z = oracles::null_component(&xr, &v);
            let shifted = Matrix::from_fn(n, 1, |i, _| w[(i, 0)] + z[i]);
            let exact = rel((&x * &shifted - &y).norm(), y.norm()) < 1e-8;
            if !exact || shifted.norm() < w.norm() * (1.0 - 1e-12) {
                norm_losses += 1;
            }
        }
    }
    let _ = to_rows(&Matrix::zeros(1, 1));
    pass_if(
        sse_losses == 0 && norm_losses == 0,
        format!(
            "50 systems x 1000 perturbations: {sse_losses} beat the solution; \
             50 systems x 100 null-space shifts: {norm_losses} shorter or inexact"
        ),
    )
}

fn round_trip() -> Outcome {
    let f = Activation::default();
    let n = 100_000;
    let mut worst = (0.0f64, 0.0f64);
    let mut bound_from = f64::NAN;
    for i in 0..n {
        let x = -30.0 + 60.0 * i as f64 / (n - 1) as f64;
        let e = (f.act_inv(f.act(x)).unwrap() - x).abs();
        if e > worst.0 {
            worst = (e, x);
        }
        if e >= 1e-10 {
            bound_from = x;
        }
    }
    pass_if(
        worst.0 < 1e-10,
        format!(
            "max |act_inv(act(x)) - x| = {:.2e} at x = {:.3} over 1e5 points on [-30, 30]; \
             errors reach 1e-10 up to x = {:.2} where f'(x) makes the inverse ill-conditioned",
            worst.0, worst.1, bound_from
        ),
    )
}

fn train_mse(x: &Matrix, y: &Matrix, widths: Vec<usize>, seed: u64) -> f64 {
    let spec = NetworkSpec::new(x.ncols(), widths).unwrap();
    let (w, _) = train(x, y, &spec, &TrainConfig::with_seed(seed)).unwrap();
    eval::mse(&Model { spec, weights: w }.predict(x).unwrap(), y).unwrap()
}

fn xor() -> Outcome {
    let d = data::gen_xor();
    let labels = d.labels.clone().unwrap();
    let mut counts = Vec::new();
    for widths in [vec![2, 1], vec![2, 2, 2, 2, 1]] {
        let spec = NetworkSpec::new(2, widths).unwrap();
        let ok = (0..10)
            .filter(|&s| {
                let (w, _) = train(&d.x, &d.y, &spec, &TrainConfig::with_seed(s)).unwrap();
                let out = Model { spec: spec.clone(), weights: w }.predict(&d.x).unwrap();
                eval::predicted_classes(&out) == labels
            })
            .count();
        counts.push(ok);
    }
    pass_if(
        counts.iter().all(|&c| c >= 8),
        format!("seeds 0..9 fully correct: 2-2-1 {}/10, 2-2-2-2-2-1 {}/10", counts[0], counts[1]),
    )
}

fn sinc_sizing() -> Outcome {
    let d = data::gen_sinc(&data::SincConfig::default()).clean_subset();
    let h8 = train_mse(&d.x, &d.y, vec![8, 1], 0);
    let h6 = train_mse(&d.x, &d.y, vec![6, 1], 0);
    let deep8 = train_mse(&d.x, &d.y, vec![1, 1, 8, 1], 0);
    let deep6 = train_mse(&d.x, &d.y, vec![1, 1, 6, 1], 0);
    let fits = (0..10).filter(|&s| train_mse(&d.x, &d.y, vec![1, 1, 8, 1], s) < 1e-3).count();
    // a difference at rounding level is not an ordering
    let resolved = |lo: f64, hi: f64| hi - lo > 1e-9 * hi.abs();
    pass_if(
        h8 < 1e-4 && resolved(h8, h6) && resolved(deep8, deep6),
        format!(
            "seed 0, 8 clean points: 1-8-1 mse {h8:.2e}, 1-6-1 mse {h6:.2e}; \
             1-1-1-8-1 mse {deep8:.3e}, 1-1-1-6-1 mse {deep6:.3e} (gap {:.1e}); \
             1-1-1-8-1 below 1e-3 on {fits}/10 seeds",
            deep6 - deep8
        ),
    )
}

fn spiral() -> Outcome {
    let start = Instant::now();
    let d = data::gen_spiral(&data::SpiralConfig::default());
    let spec = NetworkSpec::new(2, vec![100, 3]).unwrap();
    let (w, report) = train(&d.x, &d.y, &spec, &TrainConfig::with_seed(0)).unwrap();
    let out = Model { spec, weights: w }.predict(&d.x).unwrap();
    let acc = eval::accuracy(&out, d.labels.as_ref().unwrap()).unwrap();
    let t = start.elapsed();
    pass_if(
        acc >= 95.0 && t < Duration::from_secs(60),
        format!(
            "1500 points, 2-100-3, seed 0: training accuracy {acc:.2}% ({:.1}% of inverse inputs clipped), {}",
            100.0 * report.clip_fraction(),
            secs(t)
        ),
    )
}

fn load_benchmark(file: &str, plan: &str) -> Result<Dataset, String> {
    let path = data_dir().join(file);
    if !path.exists() {
        return Err(format!("{} not found", path.display()));
    }
    let plan = EncodingPlan::from_file(&Path::new(env!("CARGO_MANIFEST_DIR")).join("plans").join(plan))
        .map_err(|e| e.to_string())?;
    data::load_csv(&path, &plan).map_err(|e| e.to_string())
}

fn cv_once(d: &Dataset, rule: StructureRule, h: usize) -> (f64, f64, Duration) {
    let start = Instant::now();
    let cfg = CVConfig {
        trials: 1,
        fixed_hidden: Some(h),
        structure_rule: rule,
        ..CVConfig::default()
    };
    let r = eval::cross_validate(d, &cfg).unwrap();
    (r.mean(), r.std(), start.elapsed())
}

fn optdigit() -> Outcome {
    let d = match load_benchmark("optdigits.csv", "optdigits.plan") {
        Ok(d) => d,
        Err(e) => return pass_if(false, format!("data unavailable: {e} (run scripts/fetch_data.py)")),
    };
    let reference = eval::reference_for("optdigit", 2).unwrap();
    let (mean, std, t) = cv_once(&d, StructureRule::TwoLayerH, 500);
    pass_if(
        (mean - reference).abs() <= 2.0 && t < Duration::from_secs(1800),
        format!(
            "{} rows, 1 x 10-fold, h = 500: {mean:.2} +/- {std:.2} vs published {reference} (tolerance 2.0), {}",
            d.rows(),
            secs(t)
        ),
    )
}

fn nursery() -> Outcome {
    let d = match load_benchmark("nursery.csv", "nursery.plan") {
        Ok(d) => d,
        Err(e) => {
            return pass_if(
                false,
                format!("data unavailable: {e}; the UCI nursery file could not be obtained here"),
            )
        }
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for (rule, h, layers) in [(StructureRule::TwoLayerH, 100, 2), (StructureRule::ThreeLayer2hH, 80, 3)] {
        let reference = eval::reference_for("nursery", layers).unwrap();
        let (mean, std, t) = cv_once(&d, rule, h);
        ok &= (mean - reference).abs() <= 2.0;
        parts.push(format!("{layers}-layer h={h}: {mean:.2} +/- {std:.2} vs {reference} ({})", secs(t)));
    }
    pass_if(ok, parts.join("; "))
}

fn letter() -> Outcome {
    if std::env::var_os("KARSPACE_ACCEPT_LETTER").is_none() {
        return Outcome {
            status: Status::Optional,
            detail: "skipped (long-running; set KARSPACE_ACCEPT_LETTER=1)".into(),
        };
    }
    let d = match load_benchmark("letter.csv", "letter.plan") {
        Ok(d) => d,
        Err(e) => {
            return Outcome {
                status: Status::Optional,
                detail: format!("skipped: {e}"),
            }
        }
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for (rule, layers) in [
        (StructureRule::TwoLayerH, 2),
        (StructureRule::ThreeLayer2hH, 3),
        (StructureRule::FourLayer4h2hH, 4),
    ] {
        let reference = eval::reference_for("letter", layers).unwrap();
        let (mean, std, t) = cv_once(&d, rule, 500);
        ok &= (mean - reference).abs() <= 2.0;
        parts.push(format!("{layers}-layer h=500: {mean:.2} +/- {std:.2} vs {reference} ({})", secs(t)));
    }
    Outcome {
        status: if ok { Status::Pass } else { Status::Fail },
        detail: parts.join("; "),
    }
}

fn single_pass() -> Outcome {
    let mut rng = Lcg::new(5);
    let mut bad = 0;
    let mut runs = 0;
    for depth in 2..=7 {
        for _ in 0..10 {
            let d = 1 + (rng.next_u64() % 4) as usize;
            let m = 3 + (rng.next_u64() % 30) as usize;
            let mut widths: Vec<usize> = (0..depth - 1).map(|_| 1 + (rng.next_u64() % 9) as usize).collect();
            widths.push(1 + (rng.next_u64() % 3) as usize);
            let spec = NetworkSpec::new(d, widths.clone()).unwrap();
            let x = Matrix::from_fn(m, d, |_, _| rng.sym());
            let y = Matrix::from_fn(m, spec.output_dim(), |_, _| 0.5 + 0.4 * rng.sym());
            let (_, r) = train(&x, &y, &spec, &TrainConfig::with_seed(runs)).unwrap();
            runs += 1;
            if r.pinv_calls != 2 * depth - 1 {
                bad += 1;
            }
        }
    }
    let src = include_str!("../src/trainer.rs");
    let body = src.split("#[cfg(test)]").next().unwrap_or(src);
    let looping = ["loop {", "while ", "epoch"].iter().filter(|k| body.contains(*k)).count();
    pass_if(
        bad == 0 && looping == 0,
        format!("{runs} runs of depth 2..7: {bad} with pinv count != 2n-1; iteration constructs in trainer: {looping}"),
    )
}

fn cli(args: &[String]) -> i32 {
    main_with_args(std::iter::once("karnet".to_string()).chain(args.iter().cloned()))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).display().to_string();
    let s = |v: &[&str]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>();
    let mut commands = vec![
        s(&["synth", "--kind", "sinc", "--seed", "11", "--out", &p("sinc.csv")]),
        s(&["synth", "--kind", "xor", "--out", &p("xor.csv")]),
        s(&["synth", "--kind", "spiral", "--seed", "4", "--out", &p("sp.csv")]),
        s(&["train", "--data", &p("sinc.csv"), "--layers", "1,1,1,8,1", "--model", &p("sinc.kar")]),
        s(&["train", "--data", &p("xor.csv"), "--widths", "2,2,2,2,1", "--seed", "2", "--model", &p("xor.kar")]),
        s(&["train", "--data", &p("sp.csv"), "--widths", "100,3", "--init", "uniform_pm1", "--model", &p("sp.kar")]),
        s(&["surface", "--model", &p("sp.kar"), "--x-range", "-1,1", "--y-range", "-1,1", "--out", &p("sp_grid.csv")]),
    ];
    let optdigits = data_dir().join("optdigits.csv");
    if optdigits.exists() {
        commands.push(s(&[
            "bench", "--dataset", "optdigit", "--data", &optdigits.display().to_string(),
            "--trials", "1", "--folds", "3", "--inner-folds", "3", "--grid", "10,50",
            "--out-dir", &p("bench"),
        ]));
    }
    let mut manifests = Vec::new();
    for c in &commands {
        if cli(c) != 0 {
            return pass_if(false, format!("command failed: {}", c.join(" ")));
        }
    }
    for f in ["sinc.csv", "xor.csv", "sp.csv", "sinc.kar", "xor.kar", "sp.kar", "sp_grid.csv"] {
        manifests.push(PathBuf::from(format!("{}.manifest", p(f))));
    }
    if optdigits.exists() {
        manifests.push(dir.path().join("bench/optdigit_l2.manifest"));
    }
    let mut checked = 0;
    let mut differing = Vec::new();
    for (i, m) in manifests.iter().enumerate() {
        let out = dir.path().join(format!("replay{i}"));
        let replay = s(&["replay", "--manifest", &m.display().to_string(), "--out-dir", &out.display().to_string()]);
        if cli(&replay) != 0 {
            return pass_if(false, format!("replay of {} failed", m.display()));
        }
        for original in Manifest::read(m).unwrap().outputs {
            let copy = out.join(original.file_name().unwrap());
            checked += 1;
            if std::fs::read(&original).unwrap() != std::fs::read(&copy).unwrap() {
                differing.push(original.display().to_string());
            }
        }
    }
    pass_if(
        differing.is_empty(),
        format!(
            "{} commands replayed from manifests, {checked} data files compared, {} differ{}",
            manifests.len(),
            differing.len(),
            if optdigits.exists() { "" } else { " (bench skipped: no optdigits data)" }
        ),
    )
}

fn main() {
    let checks: Vec<(&str, fn() -> Outcome)> = vec![
        ("1  pseudo-inverse satisfies the Penrose conditions", penrose),
        ("2  least-squares optimality and minimum norm", optimality),
        ("3  activation round trip to 1e-10 on [-30, 30]", round_trip),
        ("4  XOR separated by 2-layer and 5-layer nets", xor),
        ("5  sinc interpolation vs approximation by size", sinc_sizing),
        ("6  three-spiral training accuracy >= 95%", spiral),
        ("7  optdigit 10-fold accuracy near 97.25", optdigit),
        ("8  nursery 10-fold accuracy near 92.39 / 92.64", nursery),
        ("8b letter 10-fold accuracy (optional)", letter),
        ("9  single pass: 2n-1 pseudo-inverses, no iteration", single_pass),
        ("10 manifest replay reproduces data files", determinism),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        let o = check();
        let tag = match o.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failures += 1;
                "FAIL"
            }
            Status::Optional => "SKIP",
        };
        println!("{tag}  {name}: {}", o.detail);
    }
    println!("acceptance: {failures} failing");
    if failures > 0 {
        std::process::exit(1);
    }
}
