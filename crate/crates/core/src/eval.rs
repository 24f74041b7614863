//! Classification metrics and the empirical monotonicity audit on marginal
//! curves `ȳ|x`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::simulation::{empirical_marginal_curve, CurvePoint};

/// Predictions at or above this probability count as "Yes".
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub threshold: f64,
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
    pub error: f64,
    /// `None` when the labels contain a single class.
    pub auc: Option<f64>,
}

/// Rank-statistic AUC: the probability that a random positive scores above a
/// random negative, ties counting one half.
pub fn auc(scores: &[f64], labels: &[f64]) -> Option<f64> {
    let n_pos = labels.iter().filter(|&&y| y == 1.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // midranks over runs of tied scores
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            if labels[k] == 1.0 {
                pos_rank_sum += midrank;
            }
        }
        i = j + 1;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Some((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

pub fn metrics(probs: &[f64], labels: &[f64], threshold: f64) -> Result<MetricsReport> {
    if probs.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: probs.len(),
        });
    }
    if probs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some((row, &value)) = labels.iter().enumerate().find(|(_, &y)| y != 0.0 && y != 1.0) {
        return Err(Error::InvalidLabel { row, value });
    }
    let (mut tp, mut fn_, mut fp, mut tn) = (0, 0, 0, 0);
    for (&p, &y) in probs.iter().zip(labels) {
        match (p >= threshold, y == 1.0) {
            (true, true) => tp += 1,
            (false, true) => fn_ += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    let n = probs.len();
    Ok(MetricsReport {
        n,
        threshold,
        tp,
        fn_,
        fp,
        tn,
        error: (fp + fn_) as f64 / n as f64,
        auc: auc(probs, labels),
    })
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}, threshold = {}", self.n, self.threshold)?;
        writeln!(f, "error = {:.2}%", 100.0 * self.error)?;
        match self.auc {
            Some(a) => writeln!(f, "AUC   = {:.2}%", 100.0 * a)?,
            None => writeln!(f, "AUC   = undefined (single class)")?,
        }
        writeln!(f, "{:>16} {:>10} {:>10}", "", "Actual Yes", "Actual No")?;
        writeln!(f, "{:>16} {:>10} {:>10}", "Predicted Yes", self.tp, self.fp)?;
        write!(f, "{:>16} {:>10} {:>10}", "Predicted No", self.fn_, self.tn)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditLevel {
    pub x: i64,
    pub mean: Option<f64>,
    pub count: usize,
    /// Mean is below the previous present level's mean.
    pub decrease: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureAudit {
    pub feature: usize,
    pub name: String,
    pub levels: Vec<AuditLevel>,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStep {
    pub x: i64,
    pub dominant_increment: f64,
    pub dominated_increment: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAudit {
    pub dominant: usize,
    pub dominated: usize,
    pub steps: Vec<PairStep>,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub features: Vec<FeatureAudit>,
    pub pairs: Vec<PairAudit>,
}

/// Raw integer levels of a feature (transforms undone).
fn integer_levels(data: &Dataset, i: usize) -> Result<Vec<i64>> {
    let meta = &data.meta[i];
    data.columns[i]
        .iter()
        .map(|&v| {
            let raw = meta.transform.invert(v);
            let r = raw.round();
            if (raw - r).abs() > 1e-6 {
                Err(Error::InvalidConfig(format!(
                    "feature `{}` is not integer-valued; bin it before auditing",
                    meta.name
                )))
            } else {
                Ok(r as i64)
            }
        })
        .collect()
}

fn curve_on(levels: &[i64], ys: &[f64], lo: i64, hi: i64) -> Vec<CurvePoint> {
    let (xs, ys): (Vec<u32>, Vec<f64>) = levels
        .iter()
        .zip(ys)
        .filter(|(&l, _)| l >= lo && l <= hi)
        .map(|(&l, &y)| ((l - lo) as u32, y))
        .unzip();
    empirical_marginal_curve(&xs, &ys, (hi - lo) as u32)
}

fn feature_audit(data: &Dataset, i: usize, levels: &[i64], lo: i64, hi: i64) -> FeatureAudit {
    let curve = curve_on(levels, &data.labels, lo, hi);
    let mut prev: Option<f64> = None;
    let mut out = Vec::with_capacity(curve.len());
    for p in &curve {
        let decrease = matches!((prev, p.mean), (Some(a), Some(b)) if b < a);
        if p.mean.is_some() {
            prev = p.mean;
        }
        out.push(AuditLevel {
            x: lo + i64::from(p.x),
            mean: p.mean,
            count: p.count,
            decrease,
        });
    }
    FeatureAudit {
        feature: i,
        name: data.meta[i].name.clone(),
        violated: out.iter().any(|l| l.decrease),
        levels: out,
    }
}

fn level_range(levels: &[i64], name: &str) -> Result<(i64, i64)> {
    let lo = *levels.iter().min().ok_or(Error::EmptyDataset)?;
    let hi = *levels.iter().max().ok_or(Error::EmptyDataset)?;
    if lo == hi {
        return Err(Error::InvalidConfig(format!(
            "feature `{name}` has a single observed level"
        )));
    }
    Ok((lo, hi))
}

/// Marginal curves `ȳ|x` for each listed feature over its observed integer
/// levels (capped at `x_max` when given), with a flag on every level whose
/// mean falls below the previous present level. For each `(dominant,
/// dominated)` pair the curve increments are compared at every shared step.
pub fn audit_monotonicity(
    data: &Dataset,
    features: &[usize],
    pairs: &[(usize, usize)],
    x_max: Option<i64>,
) -> Result<AuditReport> {
    let p = data.n_features();
    for &i in features.iter().chain(pairs.iter().flat_map(|(u, v)| [u, v])) {
        if i >= p {
            return Err(Error::DimensionMismatch { expected: p, got: i + 1 });
        }
    }
    let mut cache = std::collections::BTreeMap::new();
    let mut levels_of = |i: usize| -> Result<Vec<i64>> {
        if let Some(l) = cache.get(&i) {
            return Ok(Vec::clone(l));
        }
        let l = integer_levels(data, i)?;
        cache.insert(i, l.clone());
        Ok(l)
    };
    let cap = |hi: i64| x_max.map_or(hi, |m| hi.min(m));

    let mut feats = Vec::new();
    for &i in features {
        let levels = levels_of(i)?;
        let (lo, hi) = level_range(&levels, &data.meta[i].name)?;
        feats.push(feature_audit(data, i, &levels, lo, cap(hi).max(lo)));
    }

    let mut out_pairs = Vec::new();
    for &(u, v) in pairs {
        let (lu, lv) = (levels_of(u)?, levels_of(v)?);
        let (lo_u, hi_u) = level_range(&lu, &data.meta[u].name)?;
        let (lo_v, hi_v) = level_range(&lv, &data.meta[v].name)?;
        let lo = lo_u.min(lo_v);
        let hi = cap(hi_u.max(hi_v)).max(lo);
        let cu = curve_on(&lu, &data.labels, lo, hi);
        let cv = curve_on(&lv, &data.labels, lo, hi);
        let mut steps = Vec::new();
        for (k, (a, b)) in cu.windows(2).zip(cv.windows(2)).enumerate() {
            if let (Some(a0), Some(a1), Some(b0), Some(b1)) = (a[0].mean, a[1].mean, b[0].mean, b[1].mean) {
                let (da, db) = (a1 - a0, b1 - b0);
                steps.push(PairStep {
                    x: lo + k as i64,
                    dominant_increment: da,
                    dominated_increment: db,
                    violated: da < db,
                });
            }
        }
        out_pairs.push(PairAudit {
            dominant: u,
            dominated: v,
            violated: steps.iter().any(|s| s.violated),
            steps,
        });
    }
    Ok(AuditReport {
        features: feats,
        pairs: out_pairs,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn curve_csv(a: &FeatureAudit) -> String {
    let mut s = String::from("x,mean,count,decrease\n");
    for l in &a.levels {
        s.push_str(&format!("{},{},{},{}\n", l.x, opt(l.mean), l.count, l.decrease));
    }
    s
}

pub fn histogram_csv(a: &FeatureAudit) -> String {
    let mut s = String::from("x,count\n");
    for l in &a.levels {
        s.push_str(&format!("{},{}\n", l.x, l.count));
    }
    s
}

pub fn pair_csv(p: &PairAudit) -> String {
    let mut s = String::from("x,dominant_increment,dominated_increment,violated\n");
    for st in &p.steps {
        s.push_str(&format!(
            "{},{:?},{:?},{}\n",
            st.x, st.dominant_increment, st.dominated_increment, st.violated
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FeatureKind, FeatureMeta, Task};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Counts positive/negative pairs directly.
    fn auc_by_pairs(s: &[f64], y: &[f64]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..s.len() {
            for j in 0..s.len() {
                if y[i] == 1.0 && y[j] == 0.0 {
                    den += 1.0;
                    num += if s[i] > s[j] {
                        1.0
                    } else if s[i] == s[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn six_point_hand_case() {
        let p = [0.9, 0.8, 0.7, 0.4, 0.3, 0.1];
        let y = [1.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        let m = metrics(&p, &y, 0.5).unwrap();
        assert_eq!(m.auc, Some(8.0 / 9.0));
        assert_eq!((m.tp, m.fn_, m.fp, m.tn), (2, 1, 1, 2));
        assert_eq!(m.error, 2.0 / 6.0);
    }

    #[test]
    fn perfect_separation() {
        let m = metrics(&[0.1, 0.2, 0.8, 0.9], &[0.0, 0.0, 1.0, 1.0], 0.5).unwrap();
        assert_eq!(m.error, 0.0);
        assert_eq!(m.auc, Some(1.0));
    }

    #[test]
    fn single_class_has_no_auc() {
        let m = metrics(&[0.1, 0.7], &[1.0, 1.0], 0.5).unwrap();
        assert_eq!(m.auc, None);
        assert_eq!((m.tp, m.fn_), (1, 1));
    }

    #[test]
    fn threshold_ties_are_positive() {
        let y = [1.0, 0.0, 1.0, 0.0, 0.0];
        let m = metrics(&[0.5; 5], &y, 0.5).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_, m.tn), (2, 3, 0, 0));
        assert_eq!(m.auc, Some(0.5));
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(metrics(&[0.1], &[1.0, 0.0], 0.5), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(metrics(&[0.1], &[2.0], 0.5), Err(Error::InvalidLabel { .. })));
    }

    #[test]
    fn random_ranking_is_near_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
        let mut y: Vec<f64> = (0..10_000).map(|i| f64::from(i % 3 == 0)).collect();
        y.shuffle(&mut rng);
        let a = auc(&s, &y).unwrap();
        assert!((a - 0.5).abs() < 0.02, "{a}");
    }

    fn int_data(cols: Vec<Vec<f64>>, labels: Vec<f64>) -> Dataset {
        let meta = (0..cols.len())
            .map(|i| FeatureMeta::new(format!("x{i}"), FeatureKind::Ordinal))
            .collect();
        Dataset::new(cols, labels, meta, Task::Classification).unwrap()
    }

    #[test]
    fn monotone_data_has_no_flags() {
        let x: Vec<f64> = (0..40).map(|i| (i % 4) as f64).collect();
        let y = x.iter().map(|&v| f64::from(v >= 2.0)).collect();
        let d = int_data(vec![x], y);
        let r = audit_monotonicity(&d, &[0], &[], None).unwrap();
        assert!(!r.features[0].violated);
        assert_eq!(r.features[0].levels.len(), 4);
        assert!(r.features[0].levels.iter().all(|l| l.count == 10));
    }

    #[test]
    fn flags_dips_and_pair_steps() {
        // x0: means 0, 1, 0.5 ; x1: means 0, 0.5, 1
        let x0 = vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
        let x1 = vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
        let y0 = vec![0.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        let d = int_data(vec![x0, x1], y0);
        let r = audit_monotonicity(&d, &[0], &[(0, 1)], None).unwrap();
        assert!(r.features[0].violated);
        assert!(r.features[0].levels[2].decrease);
        assert_eq!(r.pairs[0].steps.len(), 2);
        assert!(!r.pairs[0].violated);
    }

    #[test]
    fn audit_uses_the_simulation_curve() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<u32> = (0..500).map(|_| rng.random_range(0..5)).collect();
        let ys: Vec<f64> = (0..500).map(|_| f64::from(rng.random_bool(0.4))).collect();
        let d = int_data(vec![xs.iter().map(|&x| f64::from(x)).collect()], ys.clone());
        let r = audit_monotonicity(&d, &[0], &[], None).unwrap();
        let sim = empirical_marginal_curve(&xs, &ys, 4);
        assert_eq!(r.features[0].levels.len(), sim.len());
        for (a, s) in r.features[0].levels.iter().zip(&sim) {
            assert_eq!((a.x, a.mean, a.count), (i64::from(s.x), s.mean, s.count));
        }
    }

    #[test]
    fn audit_rejects_single_level_and_fractions() {
        let d = int_data(vec![vec![1.0; 4]], vec![0.0, 1.0, 0.0, 1.0]);
        assert!(audit_monotonicity(&d, &[0], &[], None).is_err());
        let d = int_data(vec![vec![0.5, 1.0, 0.0, 2.0]], vec![0.0, 1.0, 0.0, 1.0]);
        assert!(audit_monotonicity(&d, &[0], &[], None).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn auc_matches_pair_enumeration(
            v in proptest::collection::vec((0u8..6, proptest::bool::ANY), 2..40)
        ) {
            let s: Vec<f64> = v.iter().map(|(a, _)| f64::from(*a) / 5.0).collect();
            let y: Vec<f64> = v.iter().map(|(_, b)| f64::from(*b)).collect();
            let got = auc(&s, &y);
            if y.iter().all(|&l| l == y[0]) {
                prop_assert!(got.is_none());
            } else {
                prop_assert!((got.unwrap() - auc_by_pairs(&s, &y)).abs() < 1e-12);
            }
        }

        #[test]
        fn auc_invariant_under_increasing_maps(
            v in proptest::collection::vec((0.001f64..0.999, proptest::bool::ANY), 2..60)
        ) {
            let s: Vec<f64> = v.iter().map(|(a, _)| *a).collect();
            let y: Vec<f64> = v.iter().map(|(_, b)| f64::from(*b)).collect();
            let t: Vec<f64> = s.iter().map(|p| (p / (1.0 - p)).ln() * 3.0 + 1.0).collect();
            prop_assert_eq!(auc(&s, &y), auc(&t, &y));
        }

        #[test]
        fn confusion_is_permutation_invariant(
            v in proptest::collection::vec((0.0f64..1.0, proptest::bool::ANY), 1..60),
            seed in 0u64..1000
        ) {
            let s: Vec<f64> = v.iter().map(|(a, _)| *a).collect();
            let y: Vec<f64> = v.iter().map(|(_, b)| f64::from(*b)).collect();
            let mut idx: Vec<usize> = (0..s.len()).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let s2: Vec<f64> = idx.iter().map(|&i| s[i]).collect();
            let y2: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            let a = metrics(&s, &y, 0.5).unwrap();
            let b = metrics(&s2, &y2, 0.5).unwrap();
            prop_assert_eq!((a.tp, a.fn_, a.fp, a.tn), (b.tp, b.fn_, b.fp, b.tn));
            prop_assert_eq!(a.tp + a.fn_ + a.fp + a.tn, a.n);
        }
    }
}
