//! Encoding plans and the CSV loader.
//!
//! A plan is a plain-text manifest, one directive per line, `#` comments:
//!
//! ```text
//! name = nursery
//! header = false
//! label_column = last            # or a 0-based column index
//! label_order = a, b, c          # optional; default is sorted order
//! label_merge = b -> c           # optional, repeatable
//! feature = parents ordinal usual, pretentious, great_pret
//! feature = age numeric          # min-max to [0, 1] over the file
//! feature = pixel numeric 0 16   # fixed range to [0, 1]
//! feature = x raw                # copied verbatim
//! features = 64 px numeric 0 16  # 64 identical columns px1..px64
//! ```
//!
//! Ordinal categories map to `code / num_categories` with codes starting at 1,
//! so values land in `(0, 1]`. A category may list aliases as `a|b`.

use super::{indicator, DataError, Dataset, DatasetMeta};
use crate::linalg::Matrix;
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Scaling {
    /// `(v - min) / (max - min)` with min/max over the loaded rows; constant columns become 0.
    MinMax,
    /// `(v - lo) / (hi - lo)`.
    Fixed { lo: f64, hi: f64 },
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind {
    /// Category names in code order; each entry may carry `|`-separated aliases.
    OrdinalCategorical { categories: Vec<Vec<String>> },
    Numeric { scaling: Scaling },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnPlan {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelColumn {
    Last,
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingPlan {
    pub name: String,
    pub has_header: bool,
    pub label_column: LabelColumn,
    pub label_order: Option<Vec<String>>,
    /// `(from, to)` relabelings applied before class indexing.
    pub label_merges: Vec<(String, String)>,
    pub features: Vec<ColumnPlan>,
}

impl EncodingPlan {
    /// `features` raw numeric columns followed by the label.
    pub fn raw_numeric(features: usize) -> Self {
        Self {
            name: "raw".into(),
            has_header: true,
            label_column: LabelColumn::Last,
            label_order: None,
            label_merges: Vec::new(),
            features: (1..=features)
                .map(|j| ColumnPlan {
                    name: format!("x{j}"),
                    kind: ColumnKind::Numeric {
                        scaling: Scaling::Identity,
                    },
                })
                .collect(),
        }
    }

    pub fn without_merges(mut self) -> Self {
        self.label_merges.clear();
        self
    }

    pub fn from_file(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        text.parse()
    }

    fn label_index(&self, ncols: usize) -> usize {
        match self.label_column {
            LabelColumn::Last => ncols - 1,
            LabelColumn::Index(i) => i,
        }
    }
}

fn parse_bool(v: &str, line: usize) -> Result<bool, DataError> {
    match v {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        _ => Err(DataError::Plan {
            line,
            message: format!("expected true/false, got `{v}`"),
        }),
    }
}

fn parse_kind(tokens: &[&str], rest: &str, line: usize) -> Result<ColumnKind, DataError> {
    let err = |message: String| DataError::Plan { line, message };
    match tokens.first().copied() {
        Some("ordinal") => {
            let list = rest.trim_start().strip_prefix("ordinal").unwrap_or("").trim();
            let categories: Vec<Vec<String>> = list
                .split(',')
                .map(|c| c.split('|').map(|a| a.trim().to_owned()).collect::<Vec<_>>())
                .filter(|c| c.iter().all(|a| !a.is_empty()))
                .collect();
            if categories.is_empty() {
                return Err(err("ordinal column needs at least one category".into()));
            }
            Ok(ColumnKind::OrdinalCategorical { categories })
        }
        Some("numeric") => match tokens[1..] {
            [] => Ok(ColumnKind::Numeric {
                scaling: Scaling::MinMax,
            }),
            [lo, hi] => {
                let lo: f64 = lo.parse().map_err(|_| err(format!("bad bound `{lo}`")))?;
                let hi: f64 = hi.parse().map_err(|_| err(format!("bad bound `{hi}`")))?;
                if !(hi > lo) {
                    return Err(err(format!("empty range {lo}..{hi}")));
                }
                Ok(ColumnKind::Numeric {
                    scaling: Scaling::Fixed { lo, hi },
                })
            }
            _ => Err(err("numeric takes no bounds or exactly two".into())),
        },
        Some("raw") => Ok(ColumnKind::Numeric {
            scaling: Scaling::Identity,
        }),
        other => Err(err(format!("unknown column kind {other:?}"))),
    }
}

impl std::str::FromStr for EncodingPlan {
    type Err = DataError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut plan = EncodingPlan {
            name: String::new(),
            has_header: false,
            label_column: LabelColumn::Last,
            label_order: None,
            label_merges: Vec::new(),
            features: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(DataError::Plan {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let err = |message: String| DataError::Plan { line, message };
            match key {
                "name" => plan.name = value.to_owned(),
                "header" => plan.has_header = parse_bool(value, line)?,
                "label_column" => {
                    plan.label_column = if value == "last" {
                        LabelColumn::Last
                    } else {
                        LabelColumn::Index(
                            value
                                .parse()
                                .map_err(|_| err(format!("bad label column `{value}`")))?,
                        )
                    }
                }
                "label_order" => {
                    plan.label_order = Some(value.split(',').map(|s| s.trim().to_owned()).collect())
                }
                "label_merge" => {
                    let (from, to) = value
                        .split_once("->")
                        .ok_or_else(|| err("expected `from -> to`".into()))?;
                    plan.label_merges
                        .push((from.trim().to_owned(), to.trim().to_owned()));
                }
                "feature" => {
                    let (name, rest) = value
                        .split_once(char::is_whitespace)
                        .ok_or_else(|| err("feature needs a name and a kind".into()))?;
                    let tokens: Vec<&str> = rest.split_whitespace().collect();
                    plan.features.push(ColumnPlan {
                        name: name.to_owned(),
                        kind: parse_kind(&tokens, rest, line)?,
                    });
                }
                "features" => {
                    let tokens: Vec<&str> = value.split_whitespace().collect();
                    let [count, prefix, kind @ ..] = tokens.as_slice() else {
                        return Err(err("features needs a count, a prefix and a kind".into()));
                    };
                    let count: usize = count
                        .parse()
                        .map_err(|_| err(format!("bad count `{count}`")))?;
                    let rest = value
                        .splitn(3, char::is_whitespace)
                        .nth(2)
                        .unwrap_or("");
                    let kind = parse_kind(kind, rest, line)?;
                    for j in 1..=count {
                        plan.features.push(ColumnPlan {
                            name: format!("{prefix}{j}"),
                            kind: kind.clone(),
                        });
                    }
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        if plan.features.is_empty() {
            return Err(DataError::Plan {
                line: 0,
                message: "plan declares no feature columns".into(),
            });
        }
        Ok(plan)
    }
}

/// Reads and encodes a CSV file. Row and column numbers in errors are 1-based
/// data rows and 0-based columns.
pub fn load_csv(path: &Path, plan: &EncodingPlan) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut d = parse_csv(std::io::BufReader::new(file), plan)?;
    d.meta.source = format!("{} (plan {})", path.display(), plan.name);
    Ok(d)
}

pub fn parse_csv<R: std::io::Read>(input: R, plan: &EncodingPlan) -> Result<Dataset, DataError> {
    let ncols = plan.features.len() + 1;
    let label_col = plan.label_index(ncols);
    if label_col >= ncols {
        return Err(DataError::Plan {
            line: 0,
            message: format!("label column {label_col} outside {ncols} columns"),
        });
    }
    let lookups: Vec<Option<(HashMap<&str, usize>, usize)>> = plan
        .features
        .iter()
        .map(|c| match &c.kind {
            ColumnKind::OrdinalCategorical { categories } => Some((
                categories
                    .iter()
                    .enumerate()
                    .flat_map(|(code, names)| names.iter().map(move |n| (n.as_str(), code)))
                    .collect(),
                categories.len(),
            )),
            ColumnKind::Numeric { .. } => None,
        })
        .collect();

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(plan.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut values: Vec<f64> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let row = r + 1;
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() != ncols {
            return Err(DataError::Parse {
                row,
                col: rec.len().min(ncols),
                message: format!("expected {ncols} fields, found {}", rec.len()),
            });
        }
        let mut feature = 0;
        for (col, field) in rec.iter().enumerate() {
            if col == label_col {
                raw_labels.push(field.to_owned());
                continue;
            }
            let v = match &lookups[feature] {
                Some((map, n)) => {
                    let code = map.get(field).ok_or_else(|| DataError::UnknownCategory {
                        row,
                        col,
                        value: field.to_owned(),
                    })?;
                    (code + 1) as f64 / *n as f64
                }
                None => {
                    let v: f64 = field.parse().map_err(|_| DataError::Parse {
                        row,
                        col,
                        message: format!("`{field}` is not a number"),
                    })?;
                    if !v.is_finite() {
                        return Err(DataError::Parse {
                            row,
                            col,
                            message: format!("`{field}` is not finite"),
                        });
                    }
                    v
                }
            };
            values.push(v);
            feature += 1;
        }
    }
    let m = raw_labels.len();
    if m == 0 {
        return Err(DataError::Empty);
    }
    let d = plan.features.len();
    let mut x = Matrix::from_row_slice(m, d, &values);
    for (j, c) in plan.features.iter().enumerate() {
        if let ColumnKind::Numeric { scaling } = &c.kind {
            let (lo, hi) = match scaling {
                Scaling::Identity => continue,
                Scaling::Fixed { lo, hi } => (*lo, *hi),
                Scaling::MinMax => {
                    let col = x.column(j);
                    (col.min(), col.max())
                }
            };
            let span = hi - lo;
            for i in 0..m {
                x[(i, j)] = if span > 0.0 { (x[(i, j)] - lo) / span } else { 0.0 };
            }
        }
    }

    let merged: Vec<String> = raw_labels
        .into_iter()
        .map(|l| {
            plan.label_merges
                .iter()
                .find(|(from, _)| *from == l)
                .map_or(l, |(_, to)| to.clone())
        })
        .collect();
    let class_names: Vec<String> = match &plan.label_order {
        Some(order) => order
            .iter()
            .filter(|c| !plan.label_merges.iter().any(|(from, _)| from == *c))
            .cloned()
            .collect(),
        None => {
            let mut names: Vec<String> = merged.clone();
            names.sort();
            names.dedup();
            names
        }
    };
    let index: HashMap<&str, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let labels = merged
        .iter()
        .map(|l| {
            index
                .get(l.as_str())
                .copied()
                .ok_or_else(|| DataError::UnknownLabel(l.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Dataset {
        x,
        y: indicator(&labels, class_names.len()),
        labels: Some(labels),
        class_names: Some(class_names),
        meta: DatasetMeta {
            source: format!("csv (plan {})", plan.name),
            seed: None,
            clean_rows: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLAN: &str = "
        name = toy
        header = true
        label_order = lo, mid, hi, top
        label_merge = top -> hi
        feature = size ordinal small, medium|med, large
        feature = w numeric
        feature = p numeric 0 10
    ";

    #[test]
    fn parses_plan() {
        let plan: EncodingPlan = PLAN.parse().unwrap();
        assert_eq!(plan.name, "toy");
        assert!(plan.has_header);
        assert_eq!(plan.features.len(), 3);
        assert_eq!(plan.label_merges, vec![("top".into(), "hi".into())]);
        let block: EncodingPlan = "features = 3 px numeric 0 16".parse().unwrap();
        assert_eq!(block.features[2].name, "px3");
    }

    #[test]
    fn encodes_rows() {
        let plan: EncodingPlan = PLAN.parse().unwrap();
        let csv = "size,w,p,class\nsmall,2,5,lo\nmed,4,10,top\nlarge,3,0,mid\n\n";
        let d = parse_csv(csv.as_bytes(), &plan).unwrap();
        assert_eq!(d.rows(), 3);
        assert_eq!(d.x.column(0).as_slice(), &[1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(d.x.column(1).as_slice(), &[0.0, 1.0, 0.5]);
        assert_eq!(d.x.column(2).as_slice(), &[0.5, 1.0, 0.0]);
        assert_eq!(d.class_names.as_deref().unwrap(), &["lo", "mid", "hi"]);
        assert_eq!(d.labels, Some(vec![0, 2, 1]));
        assert_eq!(d.y.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn ordinal_codes_in_unit_interval() {
        let plan: EncodingPlan = PLAN.parse().unwrap();
        let csv = "h\nsmall,1,1,lo\nlarge,1,1,lo\n";
        let d = parse_csv(csv.as_bytes(), &plan).unwrap();
        assert!(d.x.column(0).iter().all(|&v| v > 0.0 && v <= 1.0));
        // constant min-max column maps to 0
        assert!(d.x.column(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn error_paths() {
        let plan: EncodingPlan = PLAN.parse().unwrap();
        let bad_cat = "h\nsmall,1,1,lo\nhuge,1,1,lo\n";
        assert!(matches!(
            parse_csv(bad_cat.as_bytes(), &plan),
            Err(DataError::UnknownCategory { row: 2, col: 0, .. })
        ));
        let bad_num = "h\nsmall,x,1,lo\n";
        assert!(matches!(
            parse_csv(bad_num.as_bytes(), &plan),
            Err(DataError::Parse { row: 1, col: 1, .. })
        ));
        let short = "h\nsmall,1,lo\n";
        assert!(matches!(
            parse_csv(short.as_bytes(), &plan),
            Err(DataError::Parse { row: 1, .. })
        ));
        let bad_label = "h\nsmall,1,1,nope\n";
        assert!(matches!(
            parse_csv(bad_label.as_bytes(), &plan),
            Err(DataError::UnknownLabel(_))
        ));
        assert!(matches!(
            parse_csv("h\n".as_bytes(), &plan),
            Err(DataError::Empty)
        ));
        assert!(matches!(
            load_csv(Path::new("/nonexistent/file.csv"), &plan),
            Err(DataError::Io { .. })
        ));
        assert!("feature = a sideways".parse::<EncodingPlan>().is_err());
        assert!("bogus = 1\nfeature = a raw".parse::<EncodingPlan>().is_err());
    }

    #[test]
    fn label_column_index() {
        let plan: EncodingPlan = "label_column = 0\nfeature = a raw\nfeature = b raw"
            .parse()
            .unwrap();
        let d = parse_csv("Z,1,2\nA,3,4\n".as_bytes(), &plan).unwrap();
        assert_eq!(d.class_names.as_deref().unwrap(), &["A", "Z"]);
        assert_eq!(d.labels, Some(vec![1, 0]));
        assert_eq!(d.x.row(1).iter().copied().collect::<Vec<_>>(), vec![3.0, 4.0]);
    }

    #[test]
    fn shipped_plans_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("plans");
        let nursery = EncodingPlan::from_file(&dir.join("nursery.plan")).unwrap();
        assert_eq!(nursery.features.len(), 8);
        assert_eq!(nursery.label_merges.len(), 1);
        let letter = EncodingPlan::from_file(&dir.join("letter.plan")).unwrap();
        assert_eq!(letter.features.len(), 16);
        let optdigits = EncodingPlan::from_file(&dir.join("optdigits.plan")).unwrap();
        assert_eq!(optdigits.features.len(), 64);
    }
}
