//! CSV ingestion, the four benchmark preparation recipes, and seeded
//! train/test splitting with train-only standardization.
//!
//! Recipes expect the benchmark columns renamed to `x1 … xp, y` in the
//! order the variables are listed in the README. Raw files are never bundled.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Direction, FeatureKind, FeatureMeta, ModelSpec, MonotoneConstraint, PairwiseConstraint,
    Standardization, Task,
};

/// Column written into prepared CSV caches; recipes refuse inputs carrying it.
pub const PREPARED_MARKER: &str = "__mnam_prepared";

/// Juvenile charge counts above this are truncated in the COMPAS recipe.
pub const COMPAS_JUVENILE_CAP: f64 = 3.0;

/// Ordered FICO delinquency scale: 30/60/90/120 days delinquent, derogatory comment.
pub const FICO_DELINQUENCY_LEVELS: [f64; 5] = [-4.0, -3.0, -2.0, -1.0, 0.0];

/// Encoded value for "current and never delinquent", below the delinquency scale.
pub const FICO_NEVER_DELINQUENT: f64 = -5.0;

/// Column-major feature matrix with labels and per-column metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub columns: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub meta: Vec<FeatureMeta>,
    pub task: Task,
}

impl Dataset {
    /// Builds a dataset, checking shapes and finiteness and recording each
    /// column's observed range in `meta`.
    pub fn new(
        columns: Vec<Vec<f64>>,
        labels: Vec<f64>,
        mut meta: Vec<FeatureMeta>,
        task: Task,
    ) -> Result<Self> {
        if columns.len() != meta.len() {
            return Err(Error::DimensionMismatch {
                expected: meta.len(),
                got: columns.len(),
            });
        }
        for (c, m) in columns.iter().zip(meta.iter_mut()) {
            if c.len() != labels.len() {
                return Err(Error::InvalidSpec(format!(
                    "column `{}` has {} rows, labels have {}",
                    m.name,
                    c.len(),
                    labels.len()
                )));
            }
            if let Some(row) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::ParseCell {
                    row,
                    column: m.name.clone(),
                    value: c[row].to_string(),
                });
            }
            let (lo, hi) = min_max(c);
            m.min = lo;
            m.max = hi;
        }
        for (row, &y) in labels.iter().enumerate() {
            if !y.is_finite() || (task == Task::Classification && y != 0.0 && y != 1.0) {
                return Err(Error::InvalidLabel { row, value: y });
            }
        }
        Ok(Self {
            columns,
            labels,
            meta,
            task,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, j: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[j]).collect()
    }

    pub fn fill_row(&self, j: usize, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.columns) {
            *o = c[j];
        }
    }

    /// Rows in the given order; metadata is copied unchanged.
    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&j| c[j]).collect())
                .collect(),
            labels: rows.iter().map(|&j| self.labels[j]).collect(),
            meta: self.meta.clone(),
            task: self.task,
        }
    }

    pub fn positive_count(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1.0).count()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.meta
            .iter()
            .position(|m| m.name == name)
            .map(|i| self.columns[i].as_slice())
    }

    /// Sorted distinct values of column `i`.
    pub fn unique_values(&self, i: usize) -> Vec<f64> {
        let mut v = self.columns[i].clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Map a raw (pre-recipe-encoding) row into model space using the recorded transforms.
    pub fn to_model_space(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.meta.len() {
            return Err(Error::DimensionMismatch {
                expected: self.meta.len(),
                got: raw.len(),
            });
        }
        Ok(raw
            .iter()
            .zip(&self.meta)
            .map(|(&v, m)| m.transform.apply(v))
            .collect())
    }

    fn refresh_ranges(&mut self) {
        for (c, m) in self.columns.iter().zip(self.meta.iter_mut()) {
            let (lo, hi) = min_max(c);
            m.min = lo;
            m.max = hi;
        }
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    /// T/F, true/false, yes/no and 0/1 tokens normalized to {0, 1}.
    Boolean,
    /// Kept verbatim for recipe-specific decoding.
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawColumn {
    Numeric(Vec<f64>),
    Text(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub n_rows: usize,
    pub columns: BTreeMap<String, RawColumn>,
}

impl RawTable {
    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match self.columns.get(name) {
            Some(RawColumn::Numeric(v)) => Ok(v),
            Some(RawColumn::Text(_)) => Err(Error::InvalidSpec(format!(
                "column `{name}` was loaded as text"
            ))),
            None => Err(Error::MissingColumn(name.to_string())),
        }
    }

    pub fn text(&self, name: &str) -> Result<&[String]> {
        match self.columns.get(name) {
            Some(RawColumn::Text(v)) => Ok(v),
            Some(RawColumn::Numeric(_)) => Err(Error::InvalidSpec(format!(
                "column `{name}` was loaded as numeric"
            ))),
            None => Err(Error::MissingColumn(name.to_string())),
        }
    }

    pub fn is_prepared(&self) -> bool {
        self.headers.iter().any(|h| h == PREPARED_MARKER)
    }

    /// Writes all columns in header order.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let names: Vec<&String> = self
            .headers
            .iter()
            .filter(|h| self.columns.contains_key(*h))
            .collect();
        w.write_record(names.iter().map(|s| s.as_str()))?;
        for j in 0..self.n_rows {
            let rec: Vec<String> = names
                .iter()
                .map(|n| match &self.columns[*n] {
                    RawColumn::Numeric(v) => fmt_f64(v[j]),
                    RawColumn::Text(v) => v[j].clone(),
                })
                .collect();
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Shortest round-tripping decimal form.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn parse_bool_token(s: &str) -> Option<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "t" | "true" | "1" | "1.0" | "yes" => Some(1.0),
        "f" | "false" | "0" | "0.0" | "no" => Some(0.0),
        _ => None,
    }
}

/// Loads a headered CSV, typing the columns named in `schema`. Other columns
/// are ignored (their names are kept in `headers`).
pub fn load_csv(path: &Path, schema: &[(&str, ColumnKind)]) -> Result<RawTable> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text, schema)
}

pub fn parse_csv(text: &str, schema: &[(&str, ColumnKind)]) -> Result<RawTable> {
    if text.trim().is_empty() {
        return Err(Error::EmptyFile);
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut index = Vec::with_capacity(schema.len());
    for (name, kind) in schema {
        let pos = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        index.push((pos, *name, *kind));
    }
    let mut cols: Vec<RawColumn> = index
        .iter()
        .map(|(_, _, k)| match k {
            ColumnKind::Text => RawColumn::Text(Vec::new()),
            _ => RawColumn::Numeric(Vec::new()),
        })
        .collect();
    let mut n_rows = 0;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for ((pos, name, kind), col) in index.iter().zip(cols.iter_mut()) {
            let cell = rec.get(*pos).unwrap_or("");
            let bad = || Error::ParseCell {
                row,
                column: name.to_string(),
                value: cell.to_string(),
            };
            match (kind, col) {
                (ColumnKind::Text, RawColumn::Text(v)) => v.push(cell.to_string()),
                (ColumnKind::Boolean, RawColumn::Numeric(v)) => {
                    v.push(parse_bool_token(cell).ok_or_else(bad)?)
                }
                (_, RawColumn::Numeric(v)) => {
                    let x: f64 = cell.parse().map_err(|_| bad())?;
                    if !x.is_finite() {
                        return Err(bad());
                    }
                    v.push(x);
                }
                _ => unreachable!(),
            }
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::EmptyFile);
    }
    let columns = index
        .iter()
        .zip(cols)
        .map(|((_, name, _), c)| (name.to_string(), c))
        .collect();
    Ok(RawTable {
        headers,
        n_rows,
        columns,
    })
}

/// Negates every column carrying a decreasing constraint and flips the
/// constraint to increasing, recording the flip in the column transform.
pub fn normalize_directions(data: &mut Dataset, spec: &mut ModelSpec) {
    for c in spec.monotone.iter_mut() {
        if c.direction == Direction::Decreasing {
            let i = c.feature;
            for v in data.columns[i].iter_mut() {
                *v = -*v;
            }
            let t = &mut data.meta[i].transform;
            t.negated = !t.negated;
            if let Some(s) = t.standardize.as_mut() {
                s.mean = -s.mean;
            }
            c.direction = Direction::Increasing;
        }
    }
    data.refresh_ranges();
    spec.features = data.meta.clone();
}

/// Seeded shuffle split. Numeric and ordinal columns are standardized with
/// statistics from the training rows only (pooled within a `scale_group`).
pub fn split(data: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split ratio {ratio} must lie in (0, 1)"
        )));
    }
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 rows to split, got {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let n_train = ((ratio * n as f64).floor() as usize).clamp(1, n - 1);
    let mut train = data.subset(&idx[..n_train]);
    let mut test = data.subset(&idx[n_train..]);
    let stats = fit_standardization(&train);
    for (i, s) in stats.into_iter().enumerate() {
        if let Some(s) = s {
            for d in [&mut train, &mut test] {
                for v in d.columns[i].iter_mut() {
                    *v = (*v - s.mean) / s.sd;
                }
                d.meta[i].transform.standardize = Some(s);
            }
        }
    }
    train.refresh_ranges();
    // The test split reports the training range so certification grids agree.
    test.meta = train.meta.clone();
    Ok((train, test))
}

fn fit_standardization(train: &Dataset) -> Vec<Option<Standardization>> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, m) in train.meta.iter().enumerate() {
        if m.kind == FeatureKind::Binary || m.transform.standardize.is_some() {
            continue;
        }
        let key = m
            .transform
            .scale_group
            .clone()
            .unwrap_or_else(|| format!("\u{0}{i}"));
        groups.entry(key).or_default().push(i);
    }
    let mut out = vec![None; train.n_features()];
    for members in groups.values() {
        let vals: Vec<f64> = members
            .iter()
            .flat_map(|&i| train.columns[i].iter().copied())
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        let sd = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        for &i in members {
            out[i] = Some(Standardization { mean, sd });
        }
    }
    out
}

/// Benchmark preparation recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recipe {
    Compas,
    Law,
    Thoracic,
    Fico,
}

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "compas" => Ok(Recipe::Compas),
            "law" | "law_school" | "lawschool" => Ok(Recipe::Law),
            "thoracic" | "surgery" => Ok(Recipe::Thoracic),
            "fico" | "heloc" => Ok(Recipe::Fico),
            other => Err(Error::InvalidConfig(format!("unknown recipe `{other}`"))),
        }
    }
}

impl Recipe {
    pub const ALL: [Recipe; 4] = [Recipe::Compas, Recipe::Law, Recipe::Thoracic, Recipe::Fico];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Compas => "compas",
            Recipe::Law => "law",
            Recipe::Thoracic => "thoracic",
            Recipe::Fico => "fico",
        }
    }

    pub fn schema(self) -> Vec<(&'static str, ColumnKind)> {
        use ColumnKind::*;
        match self {
            Recipe::Compas => vec![
                ("x1", Text),
                ("x2", Text),
                ("x3", Numeric),
                ("x4", Numeric),
                ("x5", Numeric),
                ("x6", Numeric),
                ("x7", Numeric),
                ("x8", Text),
                ("x9", Numeric),
                ("y", Boolean),
            ],
            Recipe::Law => vec![
                ("x1", Numeric),
                ("x2", Numeric),
                ("x3", Numeric),
                ("x4", Numeric),
                ("x5", Numeric),
                ("x6", Numeric),
                ("x7", Numeric),
                ("x8", Numeric),
                ("x9", Text),
                ("x10", Numeric),
                ("x11", Text),
                ("y", Boolean),
            ],
            Recipe::Thoracic => {
                let mut s = vec![
                    ("x1", Text),
                    ("x2", Numeric),
                    ("x3", Numeric),
                    ("x4", Text),
                ];
                for c in ["x5", "x6", "x7", "x8", "x9"] {
                    s.push((c, Boolean));
                }
                s.push(("x10", Text));
                for c in ["x11", "x12", "x13", "x14", "x15"] {
                    s.push((c, Boolean));
                }
                s.push(("x16", Numeric));
                s.push(("y", Boolean));
                s
            }
            Recipe::Fico => {
                const NAMES: [&str; 23] = [
                    "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9", "x10", "x11", "x12",
                    "x13", "x14", "x15", "x16", "x17", "x18", "x19", "x20", "x21", "x22", "x23",
                ];
                let mut s: Vec<_> = NAMES.iter().map(|n| (*n, Numeric)).collect();
                s.push(("y", Text));
                s
            }
        }
    }

    pub fn load(self, path: &Path) -> Result<RawTable> {
        load_csv(path, &self.schema())
    }

    pub fn prepare(self, raw: &RawTable) -> Result<(Dataset, ModelSpec)> {
        match self {
            Recipe::Compas => prepare_compas(raw),
            Recipe::Law => prepare_law(raw),
            Recipe::Thoracic => prepare_thoracic(raw),
            Recipe::Fico => prepare_fico(raw, FicoMissingPolicy::Median),
        }
    }
}

fn meta(name: &str, kind: FeatureKind) -> FeatureMeta {
    FeatureMeta::new(name, kind)
}

fn increasing(feature: usize) -> MonotoneConstraint {
    MonotoneConstraint {
        feature,
        direction: Direction::Increasing,
    }
}

fn pair(dominant: usize, dominated: usize) -> PairwiseConstraint {
    PairwiseConstraint {
        dominant,
        dominated,
    }
}

fn finish(
    columns: Vec<Vec<f64>>,
    labels: Vec<f64>,
    metas: Vec<FeatureMeta>,
    monotone: Vec<MonotoneConstraint>,
    pairwise: Vec<PairwiseConstraint>,
) -> Result<(Dataset, ModelSpec)> {
    let mut data = Dataset::new(columns, labels, metas, Task::Classification)?;
    let mut spec = ModelSpec {
        features: data.meta.clone(),
        task: Task::Classification,
        monotone,
        pairwise,
    };
    spec.validate()?;
    normalize_directions(&mut data, &mut spec);
    Ok((data, spec))
}

fn reject_prepared(raw: &RawTable) -> Result<()> {
    if raw.is_prepared() {
        return Err(Error::AlreadyPrepared);
    }
    Ok(())
}

/// Recidivism data: drops race, sex and the COMPAS score; caps juvenile
/// felony and misdemeanor counts at three.
pub fn prepare_compas(raw: &RawTable) -> Result<(Dataset, ModelSpec)> {
    reject_prepared(raw)?;
    // race and sex must be present even though they are dropped
    raw.text("x1")?;
    raw.text("x2")?;
    raw.numeric("x9")?;
    let cap = |v: &[f64]| v.iter().map(|x| x.min(COMPAS_JUVENILE_CAP)).collect::<Vec<_>>();
    let degree = raw
        .text("x8")?
        .iter()
        .map(|s| match s.trim().to_ascii_lowercase().as_str() {
            "f" | "felony" | "1" | "1.0" => Ok(1.0),
            "m" | "misdemeanor" | "0" | "0.0" => Ok(0.0),
            _ => Err(Error::UnknownCode {
                column: "x8".into(),
                value: s.clone(),
            }),
        })
        .collect::<Result<Vec<f64>>>()?;
    let columns = vec![
        raw.numeric("x3")?.to_vec(),
        cap(raw.numeric("x4")?),
        cap(raw.numeric("x5")?),
        raw.numeric("x6")?.to_vec(),
        raw.numeric("x7")?.to_vec(),
        degree,
    ];
    let mut metas = vec![
        meta("age", FeatureKind::Numeric),
        meta("juv_fel_count", FeatureKind::Ordinal),
        meta("juv_misd_count", FeatureKind::Ordinal),
        meta("priors_count", FeatureKind::Numeric),
        meta("charge_id", FeatureKind::Numeric),
        meta("charge_degree", FeatureKind::Binary),
    ];
    for m in &mut metas[1..=2] {
        m.transform.cap = Some(COMPAS_JUVENILE_CAP);
        m.transform.scale_group = Some("juvenile_charges".into());
    }
    metas[4]
        .transform
        .notes
        .push("categorical charge code passed through unconstrained".into());
    metas[5]
        .transform
        .notes
        .push("felony=1, misdemeanor=0".into());
    finish(
        columns,
        raw.numeric("y")?.to_vec(),
        metas,
        vec![increasing(1), increasing(2), increasing(3), increasing(5)],
        vec![pair(1, 2)],
    )
}

/// Bar-passage data: drops sex and race; both law-school GPA columns are
/// standardized separately on the training split so they share a scale.
pub fn prepare_law(raw: &RawTable) -> Result<(Dataset, ModelSpec)> {
    reject_prepared(raw)?;
    raw.text("x9")?;
    raw.text("x11")?;
    let spec_cols = [
        ("x1", "decile_year1", FeatureKind::Ordinal),
        ("x2", "decile_year3", FeatureKind::Ordinal),
        ("x3", "lsat", FeatureKind::Numeric),
        ("x4", "ugpa", FeatureKind::Numeric),
        ("x5", "lgpa_year1", FeatureKind::Numeric),
        ("x6", "lgpa_cumulative", FeatureKind::Numeric),
        ("x7", "fulltime", FeatureKind::Ordinal),
        ("x8", "family_income", FeatureKind::Ordinal),
        ("x10", "tier", FeatureKind::Ordinal),
    ];
    let mut columns = Vec::new();
    let mut metas = Vec::new();
    for (col, name, kind) in spec_cols {
        columns.push(raw.numeric(col)?.to_vec());
        metas.push(meta(name, kind));
    }
    metas[0].transform.scale_group = Some("decile".into());
    metas[1].transform.scale_group = Some("decile".into());
    for m in &mut metas[4..=5] {
        m.transform
            .notes
            .push("rescaled by train-split standardization".into());
    }
    finish(
        columns,
        raw.numeric("y")?.to_vec(),
        metas,
        (0..6).map(increasing).collect(),
        vec![pair(1, 0), pair(5, 4)],
    )
}

fn decode_prefixed(column: &str, cell: &str, prefix: &str, offset: f64) -> Result<f64> {
    let t = cell.trim();
    let digits = t.strip_prefix(prefix).unwrap_or(t);
    digits
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(|v| if t.starts_with(prefix) { v - offset } else { v })
        .ok_or_else(|| Error::UnknownCode {
            column: column.into(),
            value: cell.into(),
        })
}

/// Thoracic surgery data: booleans to {0,1}, Zubrod scale and tumour size
/// codes to ordered integers.
pub fn prepare_thoracic(raw: &RawTable) -> Result<(Dataset, ModelSpec)> {
    reject_prepared(raw)?;
    let decode = |col: &str, prefix: &str, offset: f64, allowed: &[f64]| -> Result<Vec<f64>> {
        raw.text(col)?
            .iter()
            .map(|c| {
                let v = decode_prefixed(col, c, prefix, offset)?;
                if allowed.is_empty() || allowed.contains(&v) {
                    Ok(v)
                } else {
                    Err(Error::UnknownCode {
                        column: col.into(),
                        value: c.clone(),
                    })
                }
            })
            .collect()
    };
    let dgn = decode("x1", "DGN", 0.0, &[])?;
    let zubrod = decode("x4", "PRZ", 0.0, &[0.0, 1.0, 2.0, 3.0, 4.0])?;
    // OC11..OC14 -> 1..4
    let tumour = decode("x10", "OC", 10.0, &[1.0, 2.0, 3.0, 4.0])?;
    let b = |c: &str| raw.numeric(c).map(|v| v.to_vec());
    let columns = vec![
        dgn,
        b("x2")?,
        b("x3")?,
        zubrod,
        b("x5")?,
        b("x6")?,
        b("x7")?,
        b("x8")?,
        b("x9")?,
        tumour,
        b("x11")?,
        b("x12")?,
        b("x13")?,
        b("x14")?,
        b("x15")?,
        b("x16")?,
    ];
    use FeatureKind::*;
    let mut metas = vec![
        meta("diagnosis", Numeric),
        meta("fvc", Numeric),
        meta("fev1", Numeric),
        meta("zubrod", Ordinal),
        meta("pain", Binary),
        meta("hemoptysis", Binary),
        meta("dyspnea", Binary),
        meta("cough", Binary),
        meta("weakness", Binary),
        meta("tumour_size", Ordinal),
        meta("diabetes", Binary),
        meta("mi_6mo", Binary),
        meta("pad", Binary),
        meta("smoker", Binary),
        meta("asthma", Binary),
        meta("age", Numeric),
    ];
    metas[0].transform.notes.push("DGNk -> k".into());
    metas[3].transform.notes.push("PRZk -> k".into());
    metas[9].transform.notes.push("OC11..OC14 -> 1..4".into());
    finish(
        columns,
        raw.numeric("y")?.to_vec(),
        metas,
        vec![increasing(5), increasing(6), increasing(7)],
        vec![pair(5, 7), pair(6, 7)],
    )
}

/// Treatment of FICO special values (negative sentinels and non-delinquency codes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FicoMissingPolicy {
    Median,
    DropRows,
}

/// `MaxDelq2PublicRecLast12M` code to the ordered scale; `None` means unknown.
fn fico_recent_code(c: f64) -> Option<f64> {
    match c as i64 {
        0 => Some(0.0),
        1 => Some(-1.0),
        2 => Some(-2.0),
        3 => Some(-3.0),
        4 => Some(-4.0),
        7 => Some(FICO_NEVER_DELINQUENT),
        _ => None,
    }
}

/// `MaxDelqEver` code to the ordered scale; `None` means unknown.
fn fico_ever_code(c: f64) -> Option<f64> {
    match c as i64 {
        2 => Some(0.0),
        3 => Some(-1.0),
        4 => Some(-2.0),
        5 => Some(-3.0),
        6 => Some(-4.0),
        8 => Some(FICO_NEVER_DELINQUENT),
        _ => None,
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub const FICO_NAMES: [&str; 23] = [
    "external_risk_estimate",
    "msince_oldest_trade_open",
    "msince_most_recent_trade_open",
    "average_m_in_file",
    "num_satisfactory_trades",
    "num_trades_60_ever",
    "num_trades_90_ever",
    "percent_trades_never_delq",
    "msince_most_recent_delq",
    "max_delq_last_12m",
    "max_delq_ever",
    "num_total_trades",
    "num_trades_open_12m",
    "percent_install_trades",
    "msince_most_recent_inq",
    "num_inq_last_6m",
    "num_inq_last_6m_excl7",
    "net_fraction_revolving_burden",
    "net_fraction_install_burden",
    "num_revolving_with_balance",
    "num_install_with_balance",
    "num_bank_high_utilization",
    "percent_trades_with_balance",
];

/// HELOC credit data: maps the two maximum-delinquency codes to the ordered
/// scale −4..0 (plus −5 for never delinquent) and handles sentinels per `policy`.
pub fn prepare_fico(raw: &RawTable, policy: FicoMissingPolicy) -> Result<(Dataset, ModelSpec)> {
    reject_prepared(raw)?;
    let labels = raw
        .text("y")?
        .iter()
        .map(|s| match s.trim().to_ascii_lowercase().as_str() {
            "bad" | "1" | "1.0" => Ok(1.0),
            "good" | "0" | "0.0" => Ok(0.0),
            _ => Err(Error::UnknownCode {
                column: "y".into(),
                value: s.clone(),
            }),
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = raw.n_rows;
    // None marks a cell to impute
    let mut cells: Vec<Vec<Option<f64>>> = Vec::with_capacity(23);
    for k in 0..23 {
        let col = raw.numeric(&format!("x{}", k + 1))?;
        let mapped = col
            .iter()
            .map(|&v| {
                if v < 0.0 {
                    None
                } else if k == 9 {
                    fico_recent_code(v)
                } else if k == 10 {
                    fico_ever_code(v)
                } else {
                    Some(v)
                }
            })
            .collect();
        cells.push(mapped);
    }
    // rows with no credit record at all (every field a sentinel) carry no information
    let empty_row = |j: usize| cells.iter().all(|c| c[j].is_none());
    let keep: Vec<usize> = match policy {
        FicoMissingPolicy::Median => (0..n).filter(|&j| !empty_row(j)).collect(),
        FicoMissingPolicy::DropRows => (0..n)
            .filter(|&j| cells.iter().all(|c| c[j].is_some()))
            .collect(),
    };
    let mut columns = Vec::with_capacity(23);
    let mut metas = Vec::with_capacity(23);
    for (k, col) in cells.iter().enumerate() {
        let mut present: Vec<f64> = keep.iter().filter_map(|&j| col[j]).collect();
        let fill = median(&mut present);
        let mut imputed = 0;
        let values: Vec<f64> = keep
            .iter()
            .map(|&j| {
                col[j].unwrap_or_else(|| {
                    imputed += 1;
                    fill
                })
            })
            .collect();
        let kind = if k == 9 || k == 10 {
            FeatureKind::Ordinal
        } else {
            FeatureKind::Numeric
        };
        let mut m = meta(FICO_NAMES[k], kind);
        m.transform.imputed = imputed;
        if imputed > 0 {
            m.transform
                .notes
                .push(format!("{imputed} special-code cells imputed with median {fill}"));
        }
        if k == 9 || k == 10 {
            m.transform.scale_group = Some("delinquency".into());
            m.transform.notes.push(
                "delinquency codes: 30d=-4, 60d=-3, 90d=-2, 120d=-1, derogatory=0, never=-5"
                    .into(),
            );
        }
        columns.push(values);
        metas.push(m);
    }
    let labels = keep.iter().map(|&j| labels[j]).collect();
    finish(
        columns,
        labels,
        metas,
        vec![increasing(9), increasing(10)],
        vec![pair(9, 10)],
    )
}

/// Metadata sidecar written next to a prepared dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreparedSidecar {
    pub recipe: Option<Recipe>,
    pub spec: ModelSpec,
    pub n_rows: usize,
    pub positives: usize,
    pub source_sha256: Option<String>,
}

/// Writes `<stem>.csv` (with the prepared marker column) and `<stem>.json`.
pub fn write_prepared(
    dir: &Path,
    stem: &str,
    data: &Dataset,
    sidecar: &PreparedSidecar,
) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(format!("{stem}.csv")))?;
    let mut header = vec![PREPARED_MARKER.to_string()];
    header.extend(data.meta.iter().map(|m| m.name.clone()));
    header.push("y".into());
    w.write_record(&header)?;
    for j in 0..data.n_rows() {
        let mut rec = vec!["1".to_string()];
        rec.extend(data.columns.iter().map(|c| fmt_f64(c[j])));
        rec.push(fmt_f64(data.labels[j]));
        w.write_record(&rec)?;
    }
    w.flush()?;
    std::fs::write(
        dir.join(format!("{stem}.json")),
        serde_json::to_string_pretty(sidecar)?,
    )?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Synthetic raw tables with each recipe's schema, for runs without the
/// public files. Labels follow a logistic model that respects the recipe's
/// monotone directions.
pub fn synthetic_raw(recipe: Recipe, n: usize, seed: u64) -> RawTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = RawTable {
        n_rows: n,
        ..RawTable::default()
    };
    fn add_num(t: &mut RawTable, name: &str, v: Vec<f64>) {
        t.headers.push(name.to_string());
        t.columns.insert(name.to_string(), RawColumn::Numeric(v));
    }
    fn add_text(t: &mut RawTable, name: &str, v: Vec<String>) {
        t.headers.push(name.to_string());
        t.columns.insert(name.to_string(), RawColumn::Text(v));
    }
    let poisson = |rng: &mut ChaCha8Rng, rate: f64| -> f64 {
        rand_distr::Poisson::new(rate).expect("positive rate").sample(rng)
    };
    let bern = |rng: &mut ChaCha8Rng, logit: f64| -> f64 {
        f64::from(rng.random_bool(crate::feature_net::logistic(logit)) as u8)
    };
    match recipe {
        Recipe::Compas => {
            let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); 6];
            let (mut race, mut sex, mut degree, mut y) = (vec![], vec![], vec![], vec![]);
            for _ in 0..n {
                let age = rng.random_range(18.0f64..70.0).floor();
                let fel = poisson(&mut rng, 0.08);
                let misd = poisson(&mut rng, 0.1);
                let priors = poisson(&mut rng, 3.0);
                let charge = rng.random_range(0..400) as f64;
                let felony = rng.random_bool(0.65);
                let logit = 0.5 - 0.04 * (age - 35.0) + 0.8 * fel.min(3.0) + 0.5 * misd.min(3.0)
                    + 0.15 * priors
                    + if felony { 0.2 } else { 0.0 };
                y.push(bern(&mut rng, logit).to_string());
                race.push(["African-American", "Caucasian", "Hispanic", "Other"][rng.random_range(0..4)].to_string());
                sex.push(if rng.random_bool(0.8) { "Male" } else { "Female" }.to_string());
                degree.push(if felony { "F" } else { "M" }.to_string());
                for (c, v) in cols.iter_mut().zip([age, fel, misd, priors, charge, 0.0]) {
                    c.push(v);
                }
            }
            add_text(&mut t, "x1", race);
            add_text(&mut t, "x2", sex);
            for (k, name) in ["x3", "x4", "x5", "x6", "x7"].iter().enumerate() {
                add_num(&mut t, name, cols[k].clone());
            }
            add_text(&mut t, "x8", degree);
            let decile = (0..n).map(|_| rng.random_range(1..=10) as f64).collect();
            add_num(&mut t, "x9", decile);
            add_text(&mut t, "y", y);
        }
        Recipe::Law => {
            let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); 9];
            let mut y = Vec::with_capacity(n);
            for _ in 0..n {
                let ability: f64 = rng.random_range(-2.0..2.0);
                let noise = |rng: &mut ChaCha8Rng, s: f64| s * rng.random_range(-1.0..1.0);
                let d1 = (5.5 + 2.0 * ability + noise(&mut rng, 2.0)).clamp(1.0, 10.0).round();
                let d3 = (5.5 + 2.0 * ability + noise(&mut rng, 2.0)).clamp(1.0, 10.0).round();
                let lsat = (37.0 + 4.0 * ability + noise(&mut rng, 3.0)).round();
                let ugpa = (3.2 + 0.2 * ability + noise(&mut rng, 0.3)).clamp(1.5, 4.0);
                let fy = 0.5 * ability + noise(&mut rng, 0.5);
                let cum = 0.6 * ability + noise(&mut rng, 0.4);
                let full = if rng.random_bool(0.9) { 1.0 } else { 2.0 };
                let inc = rng.random_range(1..=5) as f64;
                let tier = rng.random_range(1..=6) as f64;
                let logit = 2.4 + 1.2 * ability + 0.1 * (d3 - 5.5);
                y.push(bern(&mut rng, logit).to_string());
                for (c, v) in cols.iter_mut().zip([d1, d3, lsat, ugpa, fy, cum, full, inc, tier]) {
                    c.push(v);
                }
            }
            for (k, name) in ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"].iter().enumerate() {
                add_num(&mut t, name, cols[k].clone());
            }
            add_text(&mut t, "x9", (0..n).map(|j| (j % 2).to_string()).collect());
            add_num(&mut t, "x10", cols[8].clone());
            add_text(&mut t, "x11", (0..n).map(|j| if j % 5 == 0 { "Non-White" } else { "White" }.to_string()).collect());
            add_text(&mut t, "y", y);
        }
        Recipe::Thoracic => {
            let mut text_cols: BTreeMap<&str, Vec<String>> = BTreeMap::new();
            let mut num_cols: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
            for _ in 0..n {
                let flags: Vec<bool> = [0.07, 0.15, 0.07, 0.7, 0.17, 0.07, 0.01, 0.02, 0.8, 0.01]
                    .iter()
                    .map(|&p| rng.random_bool(p))
                    .collect();
                let zub = rng.random_range(0..3);
                let oc = 11 + rng.random_range(0..4);
                let age = rng.random_range(40.0f64..80.0).floor();
                let logit = -2.2
                    + 0.9 * f64::from(flags[1] as u8)
                    + 0.7 * f64::from(flags[2] as u8)
                    + 0.3 * f64::from(flags[3] as u8)
                    + 0.3 * (oc - 11) as f64;
                text_cols.entry("x1").or_default().push(format!("DGN{}", 1 + rng.random_range(0..8)));
                num_cols.entry("x2").or_default().push((rng.random_range(1.5f64..5.5) * 100.0).round() / 100.0);
                num_cols.entry("x3").or_default().push((rng.random_range(1.0f64..4.5) * 100.0).round() / 100.0);
                text_cols.entry("x4").or_default().push(format!("PRZ{zub}"));
                let bool_names = ["x5", "x6", "x7", "x8", "x9", "x11", "x12", "x13", "x14", "x15"];
                for (name, f) in bool_names.iter().zip(&flags) {
                    text_cols.entry(name).or_default().push(if *f { "T" } else { "F" }.into());
                }
                text_cols.entry("x10").or_default().push(format!("OC{oc}"));
                num_cols.entry("x16").or_default().push(age);
                text_cols.entry("y").or_default().push(if bern(&mut rng, logit) == 1.0 { "T" } else { "F" }.into());
            }
            for k in 1..=16 {
                let name = format!("x{k}");
                if let Some(v) = num_cols.remove(name.as_str()) {
                    add_num(&mut t, &name, v);
                } else {
                    add_text(&mut t, &name, text_cols.remove(name.as_str()).unwrap());
                }
            }
            add_text(&mut t, "y", text_cols.remove("y").unwrap());
        }
        Recipe::Fico => {
            let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); 23];
            let mut y = Vec::with_capacity(n);
            for _ in 0..n {
                let risk: f64 = rng.random_range(-2.0..2.0);
                let no_record = rng.random_bool(0.03);
                let recent = *[7.0, 7.0, 7.0, 6.0, 4.0, 3.0, 2.0, 0.0].get(rng.random_range(0..8)).unwrap();
                let ever = *[8.0, 8.0, 6.0, 5.0, 4.0, 3.0, 2.0, 7.0].get(rng.random_range(0..8)).unwrap();
                let delq = fico_recent_code(recent).unwrap_or(-5.0) + 5.0;
                let delq_ever = fico_ever_code(ever).unwrap_or(-5.0) + 5.0;
                let logit = 1.2 * risk + 0.25 * delq + 0.1 * delq_ever - 0.6;
                y.push(if bern(&mut rng, logit) == 1.0 { "Bad" } else { "Good" }.to_string());
                for (k, c) in cols.iter_mut().enumerate() {
                    let v = if no_record {
                        -9.0
                    } else {
                        match k {
                            0 => (72.0 - 8.0 * risk + rng.random_range(-5.0..5.0)).round(),
                            9 => recent,
                            10 => ever,
                            8 if rng.random_bool(0.4) => -7.0,
                            _ => (rng.random_range(0.0f64..50.0) + 5.0 * risk).max(0.0).round(),
                        }
                    };
                    c.push(v);
                }
            }
            for (k, c) in cols.into_iter().enumerate() {
                add_num(&mut t, &format!("x{}", k + 1), c);
            }
            add_text(&mut t, "y", y);
        }
    }
    // Re-read through the recipe schema so column types match a loaded file.
    let text = t.to_csv_string().expect("in-memory csv");
    parse_csv(&text, &recipe.schema()).expect("synthetic table matches its schema")
}
