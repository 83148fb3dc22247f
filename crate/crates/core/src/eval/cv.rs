use super::report::{CVReport, FoldResult, SelectionRecord};
use super::{accuracy, EvalError};
use crate::data::Dataset;
use crate::network::{self, NetworkSpec};
use crate::trainer::{rng_from_seed, train, TrainConfig};
use rand::seq::SliceRandom;
use std::time::Instant;

pub const DEFAULT_HIDDEN_GRID: [usize; 12] = [1, 2, 3, 5, 10, 20, 30, 50, 80, 100, 200, 500];

const FOLD_STREAM: u64 = 0xF01D;
const INNER_STREAM: u64 = 0x1AAE;

/// How a single hidden size `h` expands into layer widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureRule {
    /// `[h, q]`
    TwoLayerH,
    /// `[2h, h, q]`
    ThreeLayer2hH,
    /// `[4h, 2h, h, q]`
    FourLayer4h2hH,
}

impl StructureRule {
    pub fn widths(self, h: usize, q: usize) -> Vec<usize> {
        match self {
            StructureRule::TwoLayerH => vec![h, q],
            StructureRule::ThreeLayer2hH => vec![2 * h, h, q],
            StructureRule::FourLayer4h2hH => vec![4 * h, 2 * h, h, q],
        }
    }

    pub fn layers(self) -> usize {
        match self {
            StructureRule::TwoLayerH => 2,
            StructureRule::ThreeLayer2hH => 3,
            StructureRule::FourLayer4h2hH => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StructureRule::TwoLayerH => "two_layer_h",
            StructureRule::ThreeLayer2hH => "three_layer_2h_h",
            StructureRule::FourLayer4h2hH => "four_layer_4h_2h_h",
        }
    }
}

impl std::str::FromStr for StructureRule {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "2" | "two_layer_h" => Ok(StructureRule::TwoLayerH),
            "3" | "three_layer_2h_h" => Ok(StructureRule::ThreeLayer2hH),
            "4" | "four_layer_4h_2h_h" => Ok(StructureRule::FourLayer4h2hH),
            other => Err(EvalError::InvalidConfig(format!(
                "unknown structure rule `{other}` (use 2, 3 or 4)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CVConfig {
    pub outer_folds: usize,
    pub trials: usize,
    pub inner_folds: usize,
    /// Candidate hidden sizes, ascending.
    pub hidden_grid: Vec<usize>,
    pub structure_rule: StructureRule,
    pub seed: u64,
    /// Skip model selection and use this `h` everywhere.
    pub fixed_hidden: Option<usize>,
    /// Re-run model selection on every outer fold instead of once.
    pub reselect_per_fold: bool,
    /// Template for each run; its seed is replaced by a derived per-run seed.
    pub train: TrainConfig,
}

impl Default for CVConfig {
    fn default() -> Self {
        Self {
            outer_folds: 10,
            trials: 10,
            inner_folds: 10,
            hidden_grid: DEFAULT_HIDDEN_GRID.to_vec(),
            structure_rule: StructureRule::TwoLayerH,
            seed: 0,
            fixed_hidden: None,
            reselect_per_fold: false,
            train: TrainConfig::default(),
        }
    }
}

impl CVConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: String| Err(EvalError::InvalidConfig(m));
        if self.outer_folds < 2 || self.inner_folds < 2 {
            return bad("fold counts must be >= 2".into());
        }
        if self.trials == 0 {
            return bad("need at least one trial".into());
        }
        if self.fixed_hidden == Some(0) {
            return bad("fixed hidden size must be >= 1".into());
        }
        if self.fixed_hidden.is_none() {
            if self.hidden_grid.is_empty() {
                return bad("hidden grid is empty".into());
            }
            if self.hidden_grid.contains(&0) || !self.hidden_grid.windows(2).all(|w| w[0] < w[1]) {
                return bad("hidden grid must be positive and strictly ascending".into());
            }
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic child seed for a `(master, parts...)` path, e.g. `(seed, trial, fold)`.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Fold id per row. Each class is shuffled and dealt round-robin, continuing
/// the rotation across classes, so per-class and overall fold sizes differ by
/// at most one.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidConfig(format!("need k >= 2, got {k}")));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    for (c, rows) in members.iter().enumerate() {
        if !rows.is_empty() && rows.len() < k {
            return Err(EvalError::ClassTooSmall {
                class: c.to_string(),
                count: rows.len(),
                k,
            });
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for rows in &mut members {
        rows.shuffle(&mut rng);
        for &i in rows.iter() {
            folds[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(folds)
}

/// `(train, test)` row indices for fold `f`, both ascending.
pub fn fold_split(folds: &[usize], f: usize) -> (Vec<usize>, Vec<usize>) {
    (0..folds.len()).partition(|&i| folds[i] != f)
}

fn labels_of(d: &Dataset) -> Result<&[usize], EvalError> {
    d.labels.as_deref().ok_or(EvalError::NoLabels)
}

fn name_class(err: EvalError, d: &Dataset) -> EvalError {
    match (err, &d.class_names) {
        (EvalError::ClassTooSmall { class, count, k }, Some(names)) => {
            let class = class
                .parse::<usize>()
                .ok()
                .and_then(|i| names.get(i).cloned())
                .unwrap_or(class);
            EvalError::ClassTooSmall { class, count, k }
        }
        (err, _) => err,
    }
}

/// Trains on `train_set` with hidden size `h` and returns test accuracy (%).
pub fn fit_and_score(
    train_set: &Dataset,
    test_set: &Dataset,
    h: usize,
    rule: StructureRule,
    cfg: &TrainConfig,
) -> Result<f64, EvalError> {
    let spec = NetworkSpec::new(train_set.x.ncols(), rule.widths(h, train_set.y.ncols()))?;
    let (weights, _) = train(&train_set.x, &train_set.y, &spec, cfg)?;
    let out = network::forward(&spec, &weights, &network::augment_forced(&test_set.x)?)?;
    accuracy(&out, labels_of(test_set)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenSelection {
    pub hidden: usize,
    /// Mean inner accuracy for every grid entry, in grid order.
    pub scores: Vec<(usize, f64)>,
}

/// Inner k-fold over `train_set` only; highest mean accuracy wins, ties to the smaller `h`.
pub fn select_hidden(
    train_set: &Dataset,
    cfg: &CVConfig,
    seed: u64,
) -> Result<HiddenSelection, EvalError> {
    cfg.validate()?;
    let labels = labels_of(train_set)?;
    let folds = stratified_kfold(labels, cfg.inner_folds, derive_seed(seed, &[FOLD_STREAM]))
        .map_err(|e| name_class(e, train_set))?;
    let splits: Vec<(Dataset, Dataset)> = (0..cfg.inner_folds)
        .map(|f| {
            let (tr, te) = fold_split(&folds, f);
            (train_set.subset(&tr), train_set.subset(&te))
        })
        .collect();
    let mut scores = Vec::with_capacity(cfg.hidden_grid.len());
    let mut best: Option<(usize, f64)> = None;
    for &h in &cfg.hidden_grid {
        let mut total = 0.0;
        for (f, (tr, te)) in splits.iter().enumerate() {
            let run_cfg = TrainConfig {
                seed: derive_seed(seed, &[h as u64, f as u64]),
                ..cfg.train
            };
            total += fit_and_score(tr, te, h, cfg.structure_rule, &run_cfg)?;
        }
        let mean = total / cfg.inner_folds as f64;
        scores.push((h, mean));
        if best.is_none_or(|(_, b)| mean > b) {
            best = Some((h, mean));
        }
    }
    Ok(HiddenSelection {
        hidden: best.expect("grid validated non-empty").0,
        scores,
    })
}

/// `trials x outer_folds` train/test runs.
pub fn cross_validate(dataset: &Dataset, cfg: &CVConfig) -> Result<CVReport, EvalError> {
    cfg.validate()?;
    let labels = labels_of(dataset)?;
    let mut runs = Vec::with_capacity(cfg.trials * cfg.outer_folds);
    let mut selections = Vec::new();
    let mut assignments = Vec::with_capacity(cfg.trials);
    let mut shared_hidden = cfg.fixed_hidden;

    for trial in 0..cfg.trials {
        let t = trial as u64;
        let folds = stratified_kfold(labels, cfg.outer_folds, derive_seed(cfg.seed, &[t, FOLD_STREAM]))
            .map_err(|e| name_class(e, dataset))?;
        for fold in 0..cfg.outer_folds {
            let (train_idx, test_idx) = fold_split(&folds, fold);
            let train_set = dataset.subset(&train_idx);
            let test_set = dataset.subset(&test_idx);
            let hidden = match shared_hidden {
                Some(h) => h,
                None => {
                    let sel = select_hidden(
                        &train_set,
                        cfg,
                        derive_seed(cfg.seed, &[t, fold as u64, INNER_STREAM]),
                    )?;
                    selections.push(SelectionRecord {
                        trial,
                        fold,
                        hidden: sel.hidden,
                        scores: sel.scores,
                        train_indices: train_idx.clone(),
                    });
                    if !cfg.reselect_per_fold {
                        shared_hidden = Some(sel.hidden);
                    }
                    sel.hidden
                }
            };
            let seed = derive_seed(cfg.seed, &[t, fold as u64]);
            let start = Instant::now();
            let acc = fit_and_score(
                &train_set,
                &test_set,
                hidden,
                cfg.structure_rule,
                &TrainConfig { seed, ..cfg.train },
            )?;
            runs.push(FoldResult {
                trial,
                fold,
                seed,
                hidden,
                train_rows: train_idx.len(),
                test_rows: test_idx.len(),
                accuracy: acc,
                runtime: start.elapsed(),
            });
        }
        assignments.push(folds);
    }
    Ok(CVReport {
        dataset: dataset.meta.source.clone(),
        config: cfg.clone(),
        runs,
        selections,
        fold_assignments: assignments,
    })
}
