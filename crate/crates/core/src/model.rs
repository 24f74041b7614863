//! Additive model `g(E[y|x]) = β + Σ f_i(x_i)`, its constraint spec, and the
//! fully connected baseline used for accuracy comparisons.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::feature_net::{logistic, FeatureNetParams, PARAMS_PER_NET};

/// Lower/upper clamp applied to predicted probabilities inside the log-likelihood.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Binary,
    Ordinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Affine scaling fit on a training split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub sd: f64,
}

/// Transforms applied to a raw column, in order: cap, negate, standardize.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    #[serde(default)]
    pub cap: Option<f64>,
    #[serde(default)]
    pub negated: bool,
    #[serde(default)]
    pub standardize: Option<Standardization>,
    /// Columns sharing a group are standardized with pooled statistics so
    /// that their slopes stay comparable.
    #[serde(default)]
    pub scale_group: Option<String>,
    /// Number of cells replaced by imputation during preparation.
    #[serde(default)]
    pub imputed: usize,
    /// Free-form notes (encodings, imputation policy).
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Transform {
    /// Map a raw value into model space.
    pub fn apply(&self, raw: f64) -> f64 {
        let mut v = match self.cap {
            Some(c) => raw.min(c),
            None => raw,
        };
        if self.negated {
            v = -v;
        }
        if let Some(s) = self.standardize {
            v = (v - s.mean) / s.sd;
        }
        v
    }

    /// Inverse of [`Transform::apply`] (up to the cap, which is not invertible).
    pub fn invert(&self, model: f64) -> f64 {
        let mut v = model;
        if let Some(s) = self.standardize {
            v = v * s.sd + s.mean;
        }
        if self.negated {
            v = -v;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: FeatureKind,
    /// Observed minimum in model space.
    pub min: f64,
    /// Observed maximum in model space.
    pub max: f64,
    #[serde(default)]
    pub transform: Transform,
}

impl FeatureMeta {
    pub fn new(name: impl Into<String>, kind: FeatureKind) -> Self {
        Self {
            name: name.into(),
            kind,
            min: f64::NAN,
            max: f64::NAN,
            transform: Transform::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneConstraint {
    pub feature: usize,
    pub direction: Direction,
}

/// `dominant` must have at least the slope of `dominated` everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseConstraint {
    pub dominant: usize,
    pub dominated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub features: Vec<FeatureMeta>,
    pub task: Task,
    #[serde(default)]
    pub monotone: Vec<MonotoneConstraint>,
    #[serde(default)]
    pub pairwise: Vec<PairwiseConstraint>,
}

impl ModelSpec {
    pub fn new(features: Vec<FeatureMeta>, task: Task) -> Self {
        Self {
            features,
            task,
            monotone: Vec::new(),
            pairwise: Vec::new(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn has_constraints(&self) -> bool {
        !self.monotone.is_empty() || !self.pairwise.is_empty()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn is_monotone(&self, feature: usize) -> bool {
        self.monotone.iter().any(|c| c.feature == feature)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.features.len();
        let mut seen = Vec::new();
        for c in &self.monotone {
            if c.feature >= p {
                return Err(Error::InvalidSpec(format!(
                    "monotone feature index {} out of range (p={p})",
                    c.feature
                )));
            }
            if seen.contains(&c.feature) {
                return Err(Error::InvalidSpec(format!(
                    "feature {} constrained twice",
                    c.feature
                )));
            }
            seen.push(c.feature);
        }
        for (i, pc) in self.pairwise.iter().enumerate() {
            if pc.dominant >= p || pc.dominated >= p {
                return Err(Error::InvalidSpec(format!(
                    "pairwise constraint {i} references a feature outside 0..{p}"
                )));
            }
            if pc.dominant == pc.dominated {
                return Err(Error::InvalidSpec(format!(
                    "pairwise constraint {i} compares feature {} with itself",
                    pc.dominant
                )));
            }
            if !self.is_monotone(pc.dominant) || !self.is_monotone(pc.dominated) {
                return Err(Error::InvalidSpec(format!(
                    "pairwise constraint {i}: both features must also be individually monotone"
                )));
            }
            if self.pairwise[..i].contains(pc) {
                return Err(Error::InvalidSpec(format!("duplicate pairwise constraint {i}")));
            }
        }
        Ok(())
    }

    /// Errors unless every monotone constraint is increasing.
    pub fn ensure_increasing(&self) -> Result<()> {
        match self
            .monotone
            .iter()
            .find(|c| c.direction == Direction::Decreasing)
        {
            Some(c) => Err(Error::NotNormalized { feature: c.feature }),
            None => Ok(()),
        }
    }
}

fn check_label(task: Task, row: usize, y: f64) -> Result<()> {
    if task == Task::Classification && y != 0.0 && y != 1.0 {
        return Err(Error::InvalidLabel { row, value: y });
    }
    Ok(())
}

/// Loss contribution and its derivative with respect to the raw score.
#[inline]
fn pointwise_loss(task: Task, raw: f64, y: f64) -> (f64, f64) {
    match task {
        Task::Regression => {
            let r = raw - y;
            (r * r, 2.0 * r)
        }
        Task::Classification => {
            let p = logistic(raw);
            let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            let l = -(y * pc.ln() + (1.0 - y) * (1.0 - pc).ln());
            (l, p - y)
        }
    }
}

fn link_inverse(task: Task, raw: f64) -> f64 {
    match task {
        Task::Regression => raw,
        Task::Classification => logistic(raw),
    }
}

/// Neural additive model.
///
/// Flat parameter layout: `[β, net_0[0..7], net_1[0..7], …]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamModel {
    pub spec: ModelSpec,
    pub intercept: f64,
    pub nets: Vec<FeatureNetParams>,
}

impl NamModel {
    pub fn zeros(spec: ModelSpec) -> Self {
        let p = spec.n_features();
        Self {
            spec,
            intercept: 0.0,
            nets: vec![FeatureNetParams::zeros(); p],
        }
    }

    pub fn init<R: Rng + ?Sized>(spec: ModelSpec, rng: &mut R) -> Self {
        let nets = (0..spec.n_features())
            .map(|_| FeatureNetParams::init(rng))
            .collect();
        Self {
            spec,
            intercept: 0.0,
            nets,
        }
    }

    pub fn n_features(&self) -> usize {
        self.nets.len()
    }

    pub fn param_count(&self) -> usize {
        1 + PARAMS_PER_NET * self.nets.len()
    }

    /// Offset of feature `i`'s first parameter in the flat layout.
    pub fn net_offset(i: usize) -> usize {
        1 + PARAMS_PER_NET * i
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.push(self.intercept);
        for n in &self.nets {
            out.extend_from_slice(&n.to_array());
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count());
        self.intercept = flat[0];
        for (i, net) in self.nets.iter_mut().enumerate() {
            let o = Self::net_offset(i);
            let a: [f64; PARAMS_PER_NET] = flat[o..o + PARAMS_PER_NET].try_into().unwrap();
            *net = FeatureNetParams::from_array(&a);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.intercept.is_finite() && self.nets.iter().all(|n| n.is_finite())
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.nets.len() {
            return Err(Error::DimensionMismatch {
                expected: self.nets.len(),
                got,
            });
        }
        Ok(())
    }

    /// `β + Σ f_i(x_i)`.
    pub fn predict_raw(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.intercept
            + self
                .nets
                .iter()
                .zip(x)
                .map(|(n, &xi)| n.forward(xi))
                .sum::<f64>())
    }

    /// Identity link for regression, inverse logit for classification.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(link_inverse(self.spec.task, self.predict_raw(x)?))
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.check_dim(data.n_features())?;
        let raw = self.raw_scores(data, None);
        Ok(raw
            .into_iter()
            .map(|r| link_inverse(self.spec.task, r))
            .collect())
    }

    fn raw_scores(&self, data: &Dataset, rows: Option<&[usize]>) -> Vec<f64> {
        let n = rows.map_or(data.n_rows(), |r| r.len());
        let mut raw = vec![self.intercept; n];
        for (net, col) in self.nets.iter().zip(&data.columns) {
            match rows {
                Some(r) => raw
                    .iter_mut()
                    .zip(r)
                    .for_each(|(acc, &j)| *acc += net.forward(col[j])),
                None => raw
                    .iter_mut()
                    .zip(col)
                    .for_each(|(acc, &x)| *acc += net.forward(x)),
            }
        }
        raw
    }

    /// Mean squared error (regression) or mean negative log-likelihood (classification).
    pub fn loss(&self, data: &Dataset) -> Result<f64> {
        self.check_dim(data.n_features())?;
        if data.n_rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        let task = self.spec.task;
        let raw = self.raw_scores(data, None);
        let mut total = 0.0;
        for (j, (r, &y)) in raw.iter().zip(&data.labels).enumerate() {
            check_label(task, j, y)?;
            total += pointwise_loss(task, *r, y).0;
        }
        Ok(total / data.n_rows() as f64)
    }

    /// Loss and its gradient over the flat parameter layout, optionally on a
    /// subset of rows.
    pub fn loss_and_gradient(&self, data: &Dataset, rows: Option<&[usize]>) -> Result<(f64, Vec<f64>)> {
        self.check_dim(data.n_features())?;
        let n = rows.map_or(data.n_rows(), |r| r.len());
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let task = self.spec.task;
        let raw = self.raw_scores(data, rows);
        let mut dl = Vec::with_capacity(n);
        let mut total = 0.0;
        for (k, r) in raw.iter().enumerate() {
            let j = rows.map_or(k, |r| r[k]);
            let y = data.labels[j];
            check_label(task, j, y)?;
            let (l, d) = pointwise_loss(task, *r, y);
            total += l;
            dl.push(d / n as f64);
        }
        let mut grad = vec![0.0; self.param_count()];
        grad[0] = dl.iter().sum();
        for (i, (net, col)) in self.nets.iter().zip(&data.columns).enumerate() {
            let o = Self::net_offset(i);
            let mut acc = [0.0; PARAMS_PER_NET];
            for (k, d) in dl.iter().enumerate() {
                let x = col[rows.map_or(k, |r| r[k])];
                let (_, g) = net.value_and_param_gradient(x);
                for (a, gi) in acc.iter_mut().zip(g) {
                    *a += d * gi;
                }
            }
            grad[o..o + PARAMS_PER_NET].copy_from_slice(&acc);
        }
        Ok((total / n as f64, grad))
    }

    /// Centered shape function of feature `i` on `grid`: `f_i(x) − mean_grid f_i`.
    pub fn shape_function(&self, i: usize, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let net = self.nets.get(i).ok_or(Error::DimensionMismatch {
            expected: self.nets.len(),
            got: i + 1,
        })?;
        let vals: Vec<f64> = grid.iter().map(|&x| net.forward(x)).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        Ok(grid.iter().zip(vals).map(|(&x, v)| (x, v - mean)).collect())
    }

    /// True when any grid point lies outside the feature's observed range.
    pub fn extrapolates(&self, i: usize, grid: &[f64]) -> bool {
        let f = &self.spec.features[i];
        grid.iter().any(|&x| x < f.min || x > f.max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        if m.nets.len() != m.spec.n_features() {
            return Err(Error::DimensionMismatch {
                expected: m.spec.n_features(),
                got: m.nets.len(),
            });
        }
        Ok(m)
    }
}

/// Dense single-hidden-layer baseline with `2·p` logistic hidden units.
///
/// Flat layout: hidden weights row-major (`hidden × inputs`), hidden biases,
/// output weights, output bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcnnModel {
    pub task: Task,
    pub n_inputs: usize,
    pub hidden_w: Vec<Vec<f64>>,
    pub hidden_b: Vec<f64>,
    pub out_w: Vec<f64>,
    pub out_b: f64,
}

impl FcnnModel {
    pub fn hidden_width(n_inputs: usize) -> usize {
        2 * n_inputs
    }

    pub fn zeros(task: Task, n_inputs: usize) -> Self {
        let h = Self::hidden_width(n_inputs);
        Self {
            task,
            n_inputs,
            hidden_w: vec![vec![0.0; n_inputs]; h],
            hidden_b: vec![0.0; h],
            out_w: vec![0.0; h],
            out_b: 0.0,
        }
    }

    /// Weights uniform on [-1, 1] scaled by `1/sqrt(p)` on the input layer, biases zero.
    pub fn init<R: Rng + ?Sized>(task: Task, n_inputs: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(task, n_inputs);
        let scale = 1.0 / (n_inputs.max(1) as f64).sqrt();
        for row in &mut m.hidden_w {
            for w in row.iter_mut() {
                *w = scale * rng.random_range(-1.0..=1.0);
            }
        }
        for w in &mut m.out_w {
            *w = rng.random_range(-1.0..=1.0);
        }
        m
    }

    pub fn param_count(&self) -> usize {
        let h = self.hidden_b.len();
        h * self.n_inputs + 2 * h + 1
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for row in &self.hidden_w {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&self.hidden_b);
        out.extend_from_slice(&self.out_w);
        out.push(self.out_b);
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count());
        let p = self.n_inputs;
        let h = self.hidden_b.len();
        for (k, row) in self.hidden_w.iter_mut().enumerate() {
            row.copy_from_slice(&flat[k * p..(k + 1) * p]);
        }
        let o = h * p;
        self.hidden_b.copy_from_slice(&flat[o..o + h]);
        self.out_w.copy_from_slice(&flat[o + h..o + 2 * h]);
        self.out_b = flat[o + 2 * h];
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.n_inputs {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs,
                got,
            });
        }
        Ok(())
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        self.hidden_w
            .iter()
            .zip(&self.hidden_b)
            .map(|(row, b)| logistic(row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b))
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        let h = self.hidden(x);
        Ok(self.out_b + self.out_w.iter().zip(&h).map(|(w, s)| w * s).sum::<f64>())
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(link_inverse(self.task, self.forward(x)?))
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.check_dim(data.n_features())?;
        let mut x = vec![0.0; self.n_inputs];
        (0..data.n_rows())
            .map(|j| {
                data.fill_row(j, &mut x);
                self.predict(&x)
            })
            .collect()
    }

    pub fn loss(&self, data: &Dataset) -> Result<f64> {
        Ok(self.loss_and_gradient(data, None)?.0)
    }

    pub fn loss_and_gradient(&self, data: &Dataset, rows: Option<&[usize]>) -> Result<(f64, Vec<f64>)> {
        self.check_dim(data.n_features())?;
        let n = rows.map_or(data.n_rows(), |r| r.len());
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let p = self.n_inputs;
        let hw = self.hidden_b.len();
        let mut grad = vec![0.0; self.param_count()];
        let mut x = vec![0.0; p];
        let mut total = 0.0;
        for k in 0..n {
            let j = rows.map_or(k, |r| r[k]);
            let y = data.labels[j];
            check_label(self.task, j, y)?;
            data.fill_row(j, &mut x);
            let h = self.hidden(&x);
            let raw = self.out_b + self.out_w.iter().zip(&h).map(|(w, s)| w * s).sum::<f64>();
            let (l, d) = pointwise_loss(self.task, raw, y);
            total += l;
            let d = d / n as f64;
            for u in 0..hw {
                let back = d * self.out_w[u] * h[u] * (1.0 - h[u]);
                let row = &mut grad[u * p..(u + 1) * p];
                for (g, xi) in row.iter_mut().zip(&x) {
                    *g += back * xi;
                }
                grad[hw * p + u] += back;
                grad[hw * p + hw + u] += d * h[u];
            }
            grad[hw * p + 2 * hw] += d;
        }
        Ok((total / n as f64, grad))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
