//! Stratified cross-validation on optdigits with inner selection of the hidden width.
//!
//! Needs `data/optdigits.csv` (see `scripts/fetch_data.py`). Pass a path to use another copy.

use karspace::data::{load_csv, EncodingPlan};
use karspace::eval::{cross_validate, CVConfig};
use std::path::PathBuf;

fn main() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| root.join("../../data/optdigits.csv"));
    let plan = EncodingPlan::from_file(&root.join("plans/optdigits.plan")).unwrap();
    let d = match load_csv(&path, &plan) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{e}\nrun scripts/fetch_data.py first");
            std::process::exit(1);
        }
    };
    println!("{} rows, {} features, classes {:?}", d.rows(), d.x.ncols(), d.class_counts().unwrap());

    // small settings so this finishes in well under a minute
    let cfg = CVConfig {
        trials: 1,
        outer_folds: 5,
        inner_folds: 3,
        hidden_grid: vec![50, 100, 200, 400],
        ..CVConfig::default()
    };
    let report = cross_validate(&d, &cfg).unwrap();
    for s in &report.selections {
        println!("selected h = {} from scores {:?}", s.hidden, s.scores);
    }
    for r in &report.runs {
        println!("fold {}: {:.2}% ({} test rows)", r.fold, r.accuracy, r.test_rows);
    }
    println!("{}", report.summary(Some("optdigit")));
}
