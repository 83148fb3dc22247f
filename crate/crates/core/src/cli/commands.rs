use super::manifest::{write_atomic, Manifest};
use super::{io_err, AxisRange, BenchArgs, CliError, SurfaceArgs, SynthArgs, SynthKind, Task, TrainArgs, TrainOpts};
use crate::data::{self, Dataset, EncodingPlan};
use crate::eval::{self, CVConfig, StructureRule};
use crate::linalg::{Matrix, PinvConfig, PinvMode};
use crate::network::{read_model, write_model};
use crate::network::{Model, NetworkSpec};
use crate::trainer::{self, InitScheme, TrainConfig};
use std::path::{Path, PathBuf};

const NURSERY_PLAN: &str = include_str!("../../plans/nursery.plan");
const LETTER_PLAN: &str = include_str!("../../plans/letter.plan");
const OPTDIGITS_PLAN: &str = include_str!("../../plans/optdigits.plan");

fn absolute(p: &Path) -> Result<PathBuf, CliError> {
    std::path::absolute(p).map_err(|e| io_err(p, e))
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn path_arg(p: &Path) -> String {
    p.display().to_string()
}

fn join(v: &[usize]) -> String {
    v.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(",")
}

fn push(args: &mut Vec<String>, flag: &str, value: impl ToString) {
    args.push(flag.into());
    args.push(value.to_string());
}

impl TrainOpts {
    fn to_config(&self) -> Result<TrainConfig, CliError> {
        let init: InitScheme = self.init.parse().map_err(|e: trainer::TrainError| CliError::Usage(e.to_string()))?;
        let mode: PinvMode = self
            .pinv
            .parse()
            .map_err(|e: crate::linalg::LinalgError| CliError::Usage(e.to_string()))?;
        let pinv = PinvConfig {
            mode,
            rcond: self.rcond,
            lambda: self.lambda,
        };
        pinv.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(s) = self.init_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(CliError::Usage(format!("--init-scale must be positive, got {s}")));
            }
        }
        Ok(TrainConfig {
            seed: self.seed,
            init,
            init_scale: self.init_scale,
            pinv,
            inverse_clip: !self.no_clip,
        })
    }

    fn push_args(&self, args: &mut Vec<String>) {
        let cfg = self.to_config().ok();
        push(args, "--seed", self.seed);
        push(args, "--init", cfg.map_or(self.init.clone(), |c| c.init.as_str().into()));
        if let Some(s) = self.init_scale {
            push(args, "--init-scale", s);
        }
        push(args, "--pinv", &self.pinv);
        if let Some(r) = self.rcond {
            push(args, "--rcond", r);
        }
        push(args, "--lambda", self.lambda);
        if self.no_clip {
            args.push("--no-clip".into());
        }
    }
}

impl SynthArgs {
    pub fn to_args(&self) -> Vec<String> {
        let mut a = vec!["synth".to_string()];
        let kind = match self.kind {
            SynthKind::Sinc => "sinc",
            SynthKind::Xor => "xor",
            SynthKind::Spiral => "spiral",
        };
        push(&mut a, "--kind", kind);
        push(&mut a, "--out", path_arg(&self.out));
        push(&mut a, "--seed", self.seed);
        match self.kind {
            SynthKind::Sinc => {
                push(&mut a, "--noise-fraction", self.noise_fraction);
                push(&mut a, "--replicas", self.replicas);
            }
            SynthKind::Spiral => {
                push(&mut a, "--per-arm", self.per_arm);
                push(&mut a, "--arms", self.arms);
                push(&mut a, "--noise-std", self.noise_std);
                push(&mut a, "--turns", self.turns);
                push(&mut a, "--max-radius", self.max_radius);
            }
            SynthKind::Xor => {}
        }
        a
    }
}

pub fn run_synth(mut a: SynthArgs) -> Result<(), CliError> {
    a.out = absolute(&a.out)?;
    let d = match a.kind {
        SynthKind::Sinc => {
            if !(a.noise_fraction >= 0.0 && a.noise_fraction.is_finite()) {
                return Err(CliError::Usage("--noise-fraction must be >= 0".into()));
            }
            data::gen_sinc(&data::SincConfig {
                noise_fraction: a.noise_fraction,
                noisy_replicas: a.replicas,
                seed: a.seed,
            })
        }
        SynthKind::Xor => data::gen_xor(),
        SynthKind::Spiral => {
            if a.per_arm == 0 || a.arms == 0 {
                return Err(CliError::Usage("--per-arm and --arms must be >= 1".into()));
            }
            if !(a.noise_std >= 0.0 && a.turns.is_finite() && a.max_radius > 0.0) {
                return Err(CliError::Usage(
                    "--noise-std must be >= 0, --turns finite and --max-radius > 0".into(),
                ));
            }
            data::gen_spiral(&data::SpiralConfig {
                points_per_arm: a.per_arm,
                arms: a.arms,
                noise_std: a.noise_std,
                turns: a.turns,
                max_radius: a.max_radius,
                seed: a.seed,
            })
        }
    };
    let mut buf = Vec::new();
    d.write_csv(&mut buf)?;
    write_atomic(&a.out, &buf)?;
    let mut m = Manifest::new("synth", a.to_args());
    m.param("rows", d.rows())
        .param("features", d.x.ncols())
        .param("targets", d.y.ncols())
        .output(&a.out);
    m.write(&sidecar(&a.out, "manifest"))?;
    println!("wrote {} rows to {}", d.rows(), a.out.display());
    Ok(())
}

impl TrainArgs {
    pub fn to_args(&self) -> Vec<String> {
        let mut a = vec!["train".to_string()];
        push(&mut a, "--data", path_arg(&self.data));
        if let Some(p) = &self.plan {
            push(&mut a, "--plan", path_arg(p));
        }
        if let Some(l) = &self.layers {
            push(&mut a, "--layers", join(l));
        }
        if let Some(w) = &self.widths {
            push(&mut a, "--widths", join(w));
        }
        if let Some(t) = self.task {
            push(&mut a, "--task", if t == Task::Classify { "classify" } else { "regress" });
        }
        self.opts.push_args(&mut a);
        push(&mut a, "--model", path_arg(&self.model));
        a
    }
}

fn load_dataset(path: &Path, plan: Option<&Path>) -> Result<Dataset, CliError> {
    Ok(match plan {
        Some(p) => data::load_csv(path, &EncodingPlan::from_file(p)?)?,
        None => data::load_table(path)?,
    })
}

/// Targets for a classification run with output width `q`: the indicator
/// matrix, or a single 0/1 column for two classes and `q = 1`.
fn class_targets(d: &Dataset, q: usize) -> Result<Matrix, CliError> {
    let labels = d
        .labels
        .as_ref()
        .ok_or_else(|| CliError::Usage("classification needs a `label` column".into()))?;
    let classes = d.num_classes().unwrap_or(0);
    if q == classes {
        Ok(d.y.clone())
    } else if q == 1 && classes == 2 {
        Ok(Matrix::from_fn(labels.len(), 1, |i, _| labels[i] as f64))
    } else {
        Err(CliError::Usage(format!(
            "output width {q} does not match {classes} classes"
        )))
    }
}

pub fn run_train(mut a: TrainArgs) -> Result<(), CliError> {
    a.data = absolute(&a.data)?;
    a.plan = a.plan.as_deref().map(absolute).transpose()?;
    a.model = absolute(&a.model)?;
    let cfg = a.opts.to_config()?;
    let d = load_dataset(&a.data, a.plan.as_deref())?;
    let input_dim = d.x.ncols();
    let widths = match (&a.layers, &a.widths) {
        (Some(l), _) => {
            if l.len() < 2 || l[0] != input_dim {
                return Err(CliError::Usage(format!(
                    "--layers must start with the input dimension {input_dim} and name at least one layer"
                )));
            }
            l[1..].to_vec()
        }
        (None, Some(w)) => w.clone(),
        (None, None) => return Err(CliError::Usage("give --layers or --widths".into())),
    };
    let spec = NetworkSpec::new(input_dim, widths)?;
    let q = spec.output_dim();
    let task = a
        .task
        .unwrap_or(if d.labels.is_some() { Task::Classify } else { Task::Regress });
    let y = match task {
        Task::Classify => class_targets(&d, q)?,
        Task::Regress => {
            if d.labels.is_some() || d.y.ncols() != q {
                return Err(CliError::Usage(format!(
                    "regression needs {q} y* target columns"
                )));
            }
            d.y.clone()
        }
    };
    let (weights, report) = trainer::train(&d.x, &y, &spec, &cfg)?;
    let model = Model { spec, weights };
    let out = model.predict(&d.x)?;
    let mut record = report.to_record();
    let fit = match task {
        Task::Classify => {
            let acc = if q == 1 {
                let predicted = eval::predicted_classes(&out);
                let labels = d.labels.as_ref().expect("checked above");
                100.0 * predicted.iter().zip(labels).filter(|(p, l)| p == l).count() as f64
                    / labels.len() as f64
            } else {
                eval::accuracy(&out, d.labels.as_ref().expect("checked above"))?
            };
            format!("train_accuracy = {acc}")
        }
        Task::Regress => format!("train_mse = {}", eval::mse(&out, &y)?),
    };
    record.push_str(&fit);
    record.push('\n');

    let mut bytes = Vec::new();
    write_model(&model, &mut bytes)?;
    write_atomic(&a.model, &bytes)?;
    let report_path = sidecar(&a.model, "report");
    write_atomic(&report_path, record.as_bytes())?;
    let mut m = Manifest::new("train", a.to_args());
    m.param("samples", d.rows())
        .param("pinv_calls", report.pinv_calls)
        .param("clip_events", report.clip_events)
        .info("wall_time_ms", report.wall_time.as_millis())
        .output(&a.model)
        .output(&report_path);
    m.write(&sidecar(&a.model, "manifest"))?;
    if report.clip_warning() {
        eprintln!(
            "warning: {:.1}% of inverse-activation inputs were clipped",
            100.0 * report.clip_fraction()
        );
    }
    println!("{fit}");
    println!("wrote {}", a.model.display());
    Ok(())
}

impl SurfaceArgs {
    pub fn to_args(&self) -> Vec<String> {
        let mut a = vec!["surface".to_string()];
        push(&mut a, "--model", path_arg(&self.model));
        push(&mut a, "--x-range", self.x_range);
        push(&mut a, "--y-range", self.y_range);
        push(&mut a, "--resolution", self.resolution);
        push(&mut a, "--out", path_arg(&self.out));
        a
    }
}

fn axis(range: AxisRange, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.lo];
    }
    (0..n)
        .map(|i| range.lo + (range.hi - range.lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Grid CSV for a two-input model: `x,y,out_1..out_q,argmax`, `x` varying fastest.
pub fn surface_csv(
    model: &Model,
    x_range: AxisRange,
    y_range: AxisRange,
    resolution: usize,
) -> Result<Vec<u8>, CliError> {
    let d = model.spec.input_dim();
    if d != 2 {
        return Err(CliError::Usage(format!(
            "DimensionMismatch: model takes {d} inputs, a surface needs 2"
        )));
    }
    if resolution == 0 {
        return Err(CliError::Usage("need --resolution >= 1".into()));
    }
    let xs = axis(x_range, resolution);
    let ys = axis(y_range, resolution);
    let grid = Matrix::from_fn(resolution * resolution, 2, |i, j| {
        if j == 0 {
            xs[i % resolution]
        } else {
            ys[i / resolution]
        }
    });
    let out = model.predict(&grid)?;
    let classes = eval::predicted_classes(&out);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["x".to_string(), "y".to_string()];
    header.extend((1..=out.ncols()).map(|j| format!("out_{j}")));
    header.push("argmax".into());
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for i in 0..grid.nrows() {
        let mut rec = vec![grid[(i, 0)].to_string(), grid[(i, 1)].to_string()];
        rec.extend((0..out.ncols()).map(|j| out[(i, j)].to_string()));
        rec.push(classes[i].to_string());
        w.write_record(&rec).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn run_surface(mut a: SurfaceArgs) -> Result<(), CliError> {
    a.model = absolute(&a.model)?;
    a.out = absolute(&a.out)?;
    let file = std::fs::File::open(&a.model).map_err(|e| io_err(&a.model, e))?;
    let model = read_model(std::io::BufReader::new(file))?;
    let bytes = surface_csv(&model, a.x_range, a.y_range, a.resolution)?;
    write_atomic(&a.out, &bytes)?;
    let mut m = Manifest::new("surface", a.to_args());
    m.param("rows", a.resolution * a.resolution).output(&a.out);
    m.write(&sidecar(&a.out, "manifest"))?;
    println!("wrote {} grid rows to {}", a.resolution * a.resolution, a.out.display());
    Ok(())
}

impl BenchArgs {
    pub fn to_args(&self) -> Vec<String> {
        let mut a = vec!["bench".to_string()];
        push(&mut a, "--dataset", &self.dataset);
        if let Some(d) = &self.data {
            push(&mut a, "--data", path_arg(d));
        }
        if let Some(p) = &self.plan {
            push(&mut a, "--plan", path_arg(p));
        }
        push(&mut a, "--layers", self.layers);
        if let Some(h) = self.fixed_h {
            push(&mut a, "--fixed-h", h);
        }
        push(&mut a, "--trials", self.trials);
        push(&mut a, "--folds", self.folds);
        push(&mut a, "--inner-folds", self.inner_folds);
        if let Some(g) = &self.grid {
            push(&mut a, "--grid", join(g));
        }
        if self.reselect_per_fold {
            a.push("--reselect-per-fold".into());
        }
        if self.no_merge {
            a.push("--no-merge".into());
        }
        self.opts.push_args(&mut a);
        push(&mut a, "--out-dir", path_arg(&self.out_dir));
        a
    }
}

/// Canonical benchmark name, shipped plan text and default file name.
fn benchmark(name: &str) -> Option<(&'static str, &'static str, &'static str)> {
    match name {
        "nursery" => Some(("nursery", NURSERY_PLAN, "nursery.csv")),
        "letter" => Some(("letter", LETTER_PLAN, "letter.csv")),
        "optdigit" | "optdigits" => Some(("optdigit", OPTDIGITS_PLAN, "optdigits.csv")),
        _ => None,
    }
}

pub fn run_bench(mut a: BenchArgs) -> Result<(), CliError> {
    let (name, shipped, file) = benchmark(&a.dataset).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown dataset `{}` (use nursery, letter or optdigit)",
            a.dataset
        ))
    })?;
    a.dataset = name.into();
    a.data = Some(absolute(a.data.as_deref().unwrap_or(&Path::new("data").join(file)))?);
    a.plan = a.plan.as_deref().map(absolute).transpose()?;
    a.out_dir = absolute(&a.out_dir)?;
    let mut plan = match &a.plan {
        Some(p) => EncodingPlan::from_file(p)?,
        None => shipped.parse::<EncodingPlan>()?,
    };
    if a.no_merge {
        plan = plan.without_merges();
    }
    let structure_rule: StructureRule = a.layers.to_string().parse()?;
    let cfg = CVConfig {
        outer_folds: a.folds,
        trials: a.trials,
        inner_folds: a.inner_folds,
        hidden_grid: a.grid.clone().unwrap_or_else(|| eval::DEFAULT_HIDDEN_GRID.to_vec()),
        structure_rule,
        seed: a.opts.seed,
        fixed_hidden: a.fixed_h,
        reselect_per_fold: a.reselect_per_fold,
        train: a.opts.to_config()?,
    };
    cfg.validate()?;
    let data_path = a.data.clone().expect("set above");
    let d = data::load_csv(&data_path, &plan)?;
    let report = eval::cross_validate(&d, &cfg)?;

    std::fs::create_dir_all(&a.out_dir).map_err(|e| io_err(&a.out_dir, e))?;
    let stem = format!("{name}_l{}", a.layers);
    let csv_path = a.out_dir.join(format!("{stem}.csv"));
    let record_path = a.out_dir.join(format!("{stem}.record"));
    let summary_path = a.out_dir.join(format!("{stem}.summary.txt"));
    let mut csv_bytes = Vec::new();
    report
        .write_csv(&mut csv_bytes)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&csv_path, &csv_bytes)?;
    write_atomic(&record_path, report.to_record().as_bytes())?;
    let summary = report.summary(Some(name));
    write_atomic(&summary_path, summary.as_bytes())?;
    let mut m = Manifest::new("bench", a.to_args());
    m.param("rows", d.rows())
        .param("runs", report.runs.len())
        .info("runtime_ms", report.total_runtime().as_millis())
        .output(&csv_path)
        .output(&record_path)
        .output(&summary_path);
    m.write(&a.out_dir.join(format!("{stem}.manifest")))?;
    print!("{summary}");
    Ok(())
}
