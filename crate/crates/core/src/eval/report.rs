use super::cv::CVConfig;
use std::fmt::Write as _;
use std::io::Write;
use std::time::Duration;

/// One outer train/test run.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub trial: usize,
    pub fold: usize,
    pub seed: u64,
    pub hidden: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    /// Test accuracy in percent.
    pub accuracy: f64,
    pub runtime: Duration,
}

/// A model-selection run and the rows it was allowed to see.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRecord {
    pub trial: usize,
    pub fold: usize,
    pub hidden: usize,
    pub scores: Vec<(usize, f64)>,
    pub train_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CVReport {
    pub dataset: String,
    pub config: CVConfig,
    /// Ordered by `(trial, fold)`.
    pub runs: Vec<FoldResult>,
    pub selections: Vec<SelectionRecord>,
    /// Outer fold id per row, one vector per trial.
    pub fold_assignments: Vec<Vec<usize>>,
}

impl CVReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.accuracy).collect()
    }

    pub fn mean(&self) -> f64 {
        let a = self.accuracies();
        a.iter().sum::<f64>() / a.len() as f64
    }

    /// Sample standard deviation over all runs (0 for a single run).
    pub fn std(&self) -> f64 {
        let a = self.accuracies();
        if a.len() < 2 {
            return 0.0;
        }
        let mean = self.mean();
        (a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (a.len() - 1) as f64).sqrt()
    }

    /// Distinct hidden sizes used, ascending.
    pub fn hidden_sizes(&self) -> Vec<usize> {
        let mut h: Vec<usize> = self.runs.iter().map(|r| r.hidden).collect();
        h.sort_unstable();
        h.dedup();
        h
    }

    pub fn total_runtime(&self) -> Duration {
        self.runs.iter().map(|r| r.runtime).sum()
    }

    /// Per-run CSV rows. Holds no timings, so reruns produce identical bytes.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trial", "fold", "seed", "hidden", "train_rows", "test_rows", "accuracy"])?;
        for r in &self.runs {
            w.write_record([
                r.trial.to_string(),
                r.fold.to_string(),
                r.seed.to_string(),
                r.hidden.to_string(),
                r.train_rows.to_string(),
                r.test_rows.to_string(),
                r.accuracy.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `key = value` record; schema in `docs/formats.md`. Timings are left out.
    pub fn to_record(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let grid: Vec<String> = c.hidden_grid.iter().map(|h| h.to_string()).collect();
        let used: Vec<String> = self.hidden_sizes().iter().map(|h| h.to_string()).collect();
        let _ = writeln!(s, "record = cv_report");
        let _ = writeln!(s, "dataset = {}", self.dataset);
        let _ = writeln!(s, "structure_rule = {}", c.structure_rule.as_str());
        let _ = writeln!(s, "trials = {}", c.trials);
        let _ = writeln!(s, "outer_folds = {}", c.outer_folds);
        let _ = writeln!(s, "inner_folds = {}", c.inner_folds);
        let _ = writeln!(s, "hidden_grid = {}", grid.join(","));
        let _ = writeln!(
            s,
            "fixed_hidden = {}",
            c.fixed_hidden.map_or("none".to_string(), |h| h.to_string())
        );
        let _ = writeln!(s, "reselect_per_fold = {}", c.reselect_per_fold);
        let _ = writeln!(s, "seed = {}", c.seed);
        let _ = writeln!(s, "init = {}", c.train.init.as_str());
        let _ = writeln!(s, "pinv_mode = {}", c.train.pinv.mode.as_str());
        let _ = writeln!(s, "runs = {}", self.runs.len());
        let _ = writeln!(s, "hidden_used = {}", used.join(","));
        let _ = writeln!(s, "mean_accuracy = {}", self.mean());
        let _ = writeln!(s, "std_accuracy = {}", self.std());
        for sel in &self.selections {
            let scores: Vec<String> = sel.scores.iter().map(|(h, a)| format!("{h}:{a}")).collect();
            let _ = writeln!(
                s,
                "selection = trial={} fold={} hidden={} scores={}",
                sel.trial,
                sel.fold,
                sel.hidden,
                scores.join(",")
            );
        }
        for r in &self.runs {
            let _ = writeln!(
                s,
                "run = trial={} fold={} seed={} hidden={} train_rows={} test_rows={} accuracy={}",
                r.trial,
                r.fold,
                r.seed,
                r.hidden,
                r.train_rows,
                r.test_rows,
                r.accuracy
            );
        }
        s
    }

    /// Human-readable summary with the published reference accuracies for
    /// `benchmark` alongside the measured result.
    pub fn summary(&self, benchmark: Option<&str>) -> String {
        let layers = self.config.structure_rule.layers();
        let mut s = String::new();
        let _ = writeln!(
            s,
            "measured  KARnet({layers}-layer)  {:.2} +/- {:.2}  ({} runs, h = {:?})",
            self.mean(),
            self.std(),
            self.runs.len(),
            self.hidden_sizes()
        );
        if let Some(col) = benchmark.and_then(benchmark_column) {
            let _ = writeln!(s, "published reference accuracies (reported values, not computed here):");
            for row in REFERENCE_ACCURACY {
                let v = row.values[col].map_or("OM".to_string(), |v| format!("{v:.2}"));
                let _ = writeln!(s, "  {:<16} {v}", row.method);
            }
            if let Some(r) = reference_for(benchmark.unwrap_or(""), layers) {
                let _ = writeln!(s, "delta vs reference KARnet({layers}-layer): {:+.2}", self.mean() - r);
            }
        }
        s
    }
}

/// A row of published accuracies (%), columns nursery / letter / optdigit.
/// `None` marks a method that ran out of memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub method: &'static str,
    pub values: [Option<f64>; 3],
}

pub const REFERENCE_ACCURACY: &[ReferenceRow] = &[
    ReferenceRow { method: "RM", values: [Some(90.93), Some(74.14), Some(95.32)] },
    ReferenceRow { method: "TERRP", values: [Some(96.46), Some(88.20), Some(98.16)] },
    ReferenceRow { method: "TERRM", values: [Some(91.69), Some(78.42), Some(96.81)] },
    ReferenceRow { method: "SVM-Poly", values: [Some(91.61), Some(77.22), Some(95.52)] },
    ReferenceRow { method: "SVM-Rbf", values: [Some(98.24), Some(97.14), Some(99.13)] },
    ReferenceRow { method: "FFnet(2-layer)", values: [Some(98.89), None, None] },
    ReferenceRow { method: "KARnet(2-layer)", values: [Some(92.39), Some(88.99), Some(97.25)] },
    ReferenceRow { method: "KARnet(3-layer)", values: [Some(92.64), Some(94.32), Some(97.17)] },
    ReferenceRow { method: "KARnet(4-layer)", values: [Some(92.73), Some(94.12), Some(96.96)] },
];

fn benchmark_column(name: &str) -> Option<usize> {
    match name {
        "nursery" => Some(0),
        "letter" => Some(1),
        "optdigit" | "optdigits" => Some(2),
        _ => None,
    }
}

/// Published KARnet accuracy for a benchmark and depth (2, 3 or 4 layers).
pub fn reference_for(benchmark: &str, layers: usize) -> Option<f64> {
    let col = benchmark_column(benchmark)?;
    let method = format!("KARnet({layers}-layer)");
    REFERENCE_ACCURACY
        .iter()
        .find(|r| r.method == method)
        .and_then(|r| r.values[col])
}
