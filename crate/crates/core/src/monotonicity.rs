//! Squared-hinge monotonicity penalties and grid certification.
//!
//! With `d_i(x) = f_i'(x)` and margin `m`:
//!
//! - individual: `h1 = Σ_i Σ_x max(0, m − d_i(x))²`
//! - pairwise:   `h2 = Σ_(u,v) Σ_x max(0, m − (d_u(x) − d_v(x)))²`
//!
//! All constraints are assumed increasing; decreasing ones are flipped by
//! negating the feature during preparation.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::feature_net::PARAMS_PER_NET;
use crate::model::NamModel;

/// Default strictness margin on standardized inputs.
pub const DEFAULT_MARGIN: f64 = 1e-3;

/// Default number of uniform certification grid points per feature.
pub const DEFAULT_CERTIFY_RESOLUTION: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub lambda: f64,
    pub eta: f64,
    pub margin: f64,
    /// Points at which each individually constrained feature's slope is penalized.
    pub feature_points: BTreeMap<usize, Vec<f64>>,
    /// Shared points per pairwise constraint, aligned with `spec.pairwise`.
    pub pair_points: Vec<Vec<f64>>,
}

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi <= lo {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn sorted_union(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl PenaltyConfig {
    /// Evaluation points from training data: the distinct training values of
    /// each constrained feature plus `grid_points` uniform points over its
    /// observed range. Pairs use the union of both features' points.
    pub fn from_data(
        model: &NamModel,
        data: &Dataset,
        margin: f64,
        grid_points: usize,
    ) -> Result<Self> {
        let spec = &model.spec;
        if data.n_features() != spec.n_features() {
            return Err(Error::DimensionMismatch {
                expected: spec.n_features(),
                got: data.n_features(),
            });
        }
        let points_for = |i: usize| -> Vec<f64> {
            let mut v = data.unique_values(i);
            if grid_points > 0 {
                let m = &data.meta[i];
                v.extend(uniform_grid(m.min, m.max, grid_points));
            }
            sorted_union(v)
        };
        let mut feature_points = BTreeMap::new();
        for c in &spec.monotone {
            feature_points.insert(c.feature, points_for(c.feature));
        }
        let mut pair_points = Vec::with_capacity(spec.pairwise.len());
        for pc in &spec.pairwise {
            let (u, v) = (&data.meta[pc.dominant], &data.meta[pc.dominated]);
            if u.max < v.min || v.max < u.min {
                return Err(Error::DisjointRanges {
                    dominant: pc.dominant,
                    dominated: pc.dominated,
                });
            }
            let mut pts = points_for(pc.dominant);
            pts.extend(points_for(pc.dominated));
            pair_points.push(sorted_union(pts));
        }
        Ok(Self {
            lambda: 0.0,
            eta: 0.0,
            margin,
            feature_points,
            pair_points,
        })
    }

    pub fn with_weights(mut self, lambda: f64, eta: f64) -> Self {
        self.lambda = lambda;
        self.eta = eta;
        self
    }

    pub fn with_margin(&self, margin: f64) -> Self {
        Self {
            margin,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("eta", self.eta), ("margin", self.margin)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    fn points(&self, feature: usize) -> Result<&[f64]> {
        match self.feature_points.get(&feature) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(Error::MissingEvalPoints { feature }),
        }
    }

    fn pair(&self, k: usize, dominant: usize) -> Result<&[f64]> {
        match self.pair_points.get(k) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(Error::MissingEvalPoints { feature: dominant }),
        }
    }
}

/// `h1`: summed squared shortfall of constrained slopes below the margin.
pub fn penalty_individual(model: &NamModel, cfg: &PenaltyConfig) -> Result<f64> {
    model.spec.ensure_increasing()?;
    let mut total = 0.0;
    for c in &model.spec.monotone {
        let net = &model.nets[c.feature];
        for &x in cfg.points(c.feature)? {
            let r = cfg.margin - net.input_derivative(x);
            if r > 0.0 {
                total += r * r;
            }
        }
    }
    Ok(total)
}

/// `h2`: summed squared shortfall of slope gaps `f_u' − f_v'` below the margin.
pub fn penalty_pairwise(model: &NamModel, cfg: &PenaltyConfig) -> Result<f64> {
    let mut total = 0.0;
    for (k, pc) in model.spec.pairwise.iter().enumerate() {
        let (nu, nv) = (&model.nets[pc.dominant], &model.nets[pc.dominated]);
        for &x in cfg.pair(k, pc.dominant)? {
            let r = cfg.margin - (nu.input_derivative(x) - nv.input_derivative(x));
            if r > 0.0 {
                total += r * r;
            }
        }
    }
    Ok(total)
}

/// `(h1, h2)` at the config's margin.
pub fn penalties(model: &NamModel, cfg: &PenaltyConfig) -> Result<(f64, f64)> {
    Ok((penalty_individual(model, cfg)?, penalty_pairwise(model, cfg)?))
}

/// Gradient of `λ·h1 + η·h2` over the model's flat parameter layout.
pub fn penalty_gradient(model: &NamModel, cfg: &PenaltyConfig) -> Result<Vec<f64>> {
    model.spec.ensure_increasing()?;
    let mut grad = vec![0.0; model.param_count()];
    let mut add = |feature: usize, scale: f64, x: f64| {
        let g = model.nets[feature].mixed_gradient(x);
        let o = NamModel::net_offset(feature);
        for (dst, gi) in grad[o..o + PARAMS_PER_NET].iter_mut().zip(g) {
            *dst += scale * gi;
        }
    };
    if cfg.lambda > 0.0 {
        for c in &model.spec.monotone {
            let net = &model.nets[c.feature];
            for &x in cfg.points(c.feature)? {
                let r = cfg.margin - net.input_derivative(x);
                if r > 0.0 {
                    add(c.feature, -2.0 * cfg.lambda * r, x);
                }
            }
        }
    }
    if cfg.eta > 0.0 {
        for (k, pc) in model.spec.pairwise.iter().enumerate() {
            let (nu, nv) = (&model.nets[pc.dominant], &model.nets[pc.dominated]);
            for &x in cfg.pair(k, pc.dominant)? {
                let r = cfg.margin - (nu.input_derivative(x) - nv.input_derivative(x));
                if r > 0.0 {
                    add(pc.dominant, -2.0 * cfg.eta * r, x);
                    add(pc.dominated, 2.0 * cfg.eta * r, x);
                }
            }
        }
    }
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualCheck {
    pub feature: usize,
    pub name: String,
    pub min_slope: f64,
    pub argmin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseCheck {
    pub dominant: usize,
    pub dominated: usize,
    pub dominant_name: String,
    pub dominated_name: String,
    pub min_gap: f64,
    pub argmin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub resolution: usize,
    pub training_points: bool,
    /// Per checked feature: (name, lo, hi).
    pub ranges: Vec<(String, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub individual: Vec<IndividualCheck>,
    pub pairwise: Vec<PairwiseCheck>,
    pub grid: GridInfo,
    pub warnings: Vec<String>,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.individual.iter().all(|c| c.pass) && self.pairwise.iter().all(|c| c.pass)
    }

    pub fn individual_passed(&self) -> bool {
        self.individual.iter().all(|c| c.pass)
    }

    pub fn pairwise_passed(&self) -> bool {
        self.pairwise.iter().all(|c| c.pass)
    }
}

impl fmt::Display for CertificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<12} {:<40} {:>14} {:>12} {:>6}",
            "constraint", "feature(s)", "min", "at x", "status"
        )?;
        for c in &self.individual {
            writeln!(
                f,
                "{:<12} {:<40} {:>14.6e} {:>12.4} {:>6}",
                "individual",
                c.name,
                c.min_slope,
                c.argmin,
                if c.pass { "pass" } else { "FAIL" }
            )?;
        }
        for c in &self.pairwise {
            writeln!(
                f,
                "{:<12} {:<40} {:>14.6e} {:>12.4} {:>6}",
                "pairwise",
                format!("{} over {}", c.dominant_name, c.dominated_name),
                c.min_gap,
                c.argmin,
                if c.pass { "pass" } else { "FAIL" }
            )?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        write!(
            f,
            "grid: {} uniform points per feature{}; overall: {}",
            self.grid.resolution,
            if self.grid.training_points {
                " + training values"
            } else {
                ""
            },
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

fn argmin_over(points: &[f64], g: impl Fn(f64) -> f64) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NAN), |(best, at), &x| {
        let v = g(x);
        if v < best {
            (v, x)
        } else {
            (best, at)
        }
    })
}

/// Evaluates every constrained slope (and pairwise slope gap) on a uniform
/// grid of `resolution` points over the observed range recorded in the spec
/// (the union of both ranges for pairs), plus the training values of the
/// feature(s) when `training` is given. A constraint passes iff its minimum is
/// `>= 0` on those points.
pub fn certify(
    model: &NamModel,
    resolution: usize,
    training: Option<&Dataset>,
) -> Result<CertificationReport> {
    let spec = &model.spec;
    if !spec.has_constraints() {
        return Err(Error::InvalidSpec("no monotonicity constraints to certify".into()));
    }
    spec.ensure_increasing()?;
    if resolution == 0 {
        return Err(Error::EmptyGrid);
    }
    let mut warnings = Vec::new();
    let mut ranges = Vec::new();
    let mut grid_for = |features: &[usize], warnings: &mut Vec<String>| -> Vec<f64> {
        let lo = features
            .iter()
            .map(|&i| spec.features[i].min)
            .fold(f64::INFINITY, f64::min);
        let hi = features
            .iter()
            .map(|&i| spec.features[i].max)
            .fold(f64::NEG_INFINITY, f64::max);
        let names: Vec<&str> = features.iter().map(|&i| spec.features[i].name.as_str()).collect();
        let label = names.join("+");
        let mut pts = if !(lo.is_finite() && hi.is_finite()) {
            warnings.push(format!("{label}: no observed range recorded; checking x = 0 only"));
            vec![0.0]
        } else if lo == hi {
            warnings.push(format!("{label}: degenerate range at {lo}; single-point check"));
            vec![lo]
        } else {
            uniform_grid(lo, hi, resolution)
        };
        ranges.push((label, lo, hi));
        if let Some(d) = training {
            for &i in features {
                pts.extend(d.unique_values(i));
            }
        }
        sorted_union(pts)
    };

    let mut individual = Vec::new();
    for c in &spec.monotone {
        let pts = grid_for(&[c.feature], &mut warnings);
        let net = &model.nets[c.feature];
        let (min, at) = argmin_over(&pts, |x| net.input_derivative(x));
        individual.push(IndividualCheck {
            feature: c.feature,
            name: spec.features[c.feature].name.clone(),
            min_slope: min,
            argmin: at,
            pass: min >= 0.0,
        });
    }
    let mut pairwise = Vec::new();
    for pc in &spec.pairwise {
        let pts = grid_for(&[pc.dominant, pc.dominated], &mut warnings);
        let (nu, nv) = (&model.nets[pc.dominant], &model.nets[pc.dominated]);
        let (min, at) = argmin_over(&pts, |x| nu.input_derivative(x) - nv.input_derivative(x));
        pairwise.push(PairwiseCheck {
            dominant: pc.dominant,
            dominated: pc.dominated,
            dominant_name: spec.features[pc.dominant].name.clone(),
            dominated_name: spec.features[pc.dominated].name.clone(),
            min_gap: min,
            argmin: at,
            pass: min >= 0.0,
        });
    }
    Ok(CertificationReport {
        individual,
        pairwise,
        grid: GridInfo {
            resolution,
            training_points: training.is_some(),
            ranges,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_net::FeatureNetParams;
    use crate::model::{
        Direction, FeatureKind, FeatureMeta, ModelSpec, MonotoneConstraint, PairwiseConstraint,
        Task,
    };
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(p: usize, monotone: &[usize], pairs: &[(usize, usize)]) -> ModelSpec {
        let features = (0..p)
            .map(|i| {
                let mut f = FeatureMeta::new(format!("x{i}"), FeatureKind::Numeric);
                f.min = -2.0;
                f.max = 2.0;
                f
            })
            .collect();
        let mut s = ModelSpec::new(features, Task::Regression);
        s.monotone = monotone
            .iter()
            .map(|&feature| MonotoneConstraint {
                feature,
                direction: Direction::Increasing,
            })
            .collect();
        s.pairwise = pairs
            .iter()
            .map(|&(dominant, dominated)| PairwiseConstraint {
                dominant,
                dominated,
            })
            .collect();
        s
    }

    fn unit(w1: f64, w2: f64) -> FeatureNetParams {
        FeatureNetParams {
            w1: [w1, 0.0],
            b1: [0.0, 0.0],
            w2: [w2, 0.0],
            b2: 0.0,
        }
    }

    fn cfg(points: &[(usize, Vec<f64>)], pairs: Vec<Vec<f64>>, margin: f64) -> PenaltyConfig {
        PenaltyConfig {
            lambda: 1.0,
            eta: 1.0,
            margin,
            feature_points: points.iter().cloned().collect(),
            pair_points: pairs,
        }
    }

    #[test]
    fn increasing_net_has_no_individual_penalty() {
        let mut m = NamModel::zeros(spec(1, &[0], &[]));
        m.nets[0] = unit(1.0, 1.0);
        let c = cfg(&[(0, vec![-2.0, -1.0, 0.0, 1.0, 2.0])], vec![], 0.0);
        assert_eq!(penalty_individual(&m, &c).unwrap(), 0.0);
    }

    #[test]
    fn decreasing_unit_at_origin() {
        let mut m = NamModel::zeros(spec(1, &[0], &[]));
        m.nets[0] = unit(1.0, -1.0);
        let c = cfg(&[(0, vec![0.0])], vec![], 0.0);
        assert_eq!(penalty_individual(&m, &c).unwrap(), 0.0625);
    }

    #[test]
    fn unconstrained_model_has_zero_penalties() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = NamModel::init(spec(3, &[], &[]), &mut rng);
        let c = cfg(&[], vec![], 0.1);
        assert_eq!(penalties(&m, &c).unwrap(), (0.0, 0.0));
        assert!(penalty_gradient(&m, &c).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn missing_points_is_an_error() {
        let m = NamModel::zeros(spec(2, &[1], &[]));
        let c = cfg(&[(0, vec![0.0])], vec![], 0.0);
        assert!(matches!(
            penalty_individual(&m, &c),
            Err(Error::MissingEvalPoints { feature: 1 })
        ));
    }

    #[test]
    fn identical_pair_sits_on_the_boundary() {
        let mut m = NamModel::zeros(spec(2, &[0, 1], &[(0, 1)]));
        m.nets[0] = unit(0.7, 1.3);
        m.nets[1] = m.nets[0];
        let c = cfg(&[], vec![vec![-1.0, 0.0, 1.0]], 0.0);
        assert_eq!(penalty_pairwise(&m, &c).unwrap(), 0.0);
    }

    #[test]
    fn shallower_dominant_feature_is_penalized() {
        // slopes at 0: dominant 0.25, dominated 0.5
        let mut m = NamModel::zeros(spec(2, &[0, 1], &[(0, 1)]));
        m.nets[0] = unit(1.0, 1.0);
        m.nets[1] = unit(1.0, 2.0);
        let c = cfg(&[], vec![vec![0.0]], 0.0);
        assert_eq!(penalty_pairwise(&m, &c).unwrap(), 0.0625);

        // swap roles: steeper dominant, satisfied everywhere
        let mut m2 = m.clone();
        m2.nets.swap(0, 1);
        let c = cfg(&[], vec![vec![-2.0, -0.5, 0.0, 0.5, 2.0]], 0.0);
        assert_eq!(penalty_pairwise(&m2, &c).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_pair_ranges_rejected() {
        let s = spec(2, &[0, 1], &[(0, 1)]);
        let mut d = Dataset::new(
            vec![vec![0.0, 1.0], vec![5.0, 6.0]],
            vec![0.0, 1.0],
            s.features.clone(),
            Task::Regression,
        )
        .unwrap();
        d.meta[0].transform = Default::default();
        let m = NamModel::zeros(s);
        assert!(matches!(
            PenaltyConfig::from_data(&m, &d, 0.0, 0),
            Err(Error::DisjointRanges { .. })
        ));
    }

    #[test]
    fn satisfied_constraints_have_zero_gradient() {
        let mut m = NamModel::zeros(spec(2, &[0, 1], &[(0, 1)]));
        m.nets[0] = unit(1.0, 4.0);
        m.nets[1] = unit(1.0, 1.0);
        m.intercept = 3.0;
        let pts = vec![-1.0, 0.0, 1.0];
        let c = cfg(&[(0, pts.clone()), (1, pts.clone())], vec![pts], 0.0);
        assert!(penalty_gradient(&m, &c).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn certify_increasing_net_passes() {
        let mut m = NamModel::zeros(spec(1, &[0], &[]));
        m.nets[0] = unit(1.0, 1.0);
        let r = certify(&m, 200, None).unwrap();
        assert!(r.passed());
        assert!(r.individual[0].min_slope > 0.0);
    }

    #[test]
    fn certify_locates_a_dip() {
        // f = σ(x) − 2σ(x − 1)·... : a hand-built net with a negative slope region
        let mut m = NamModel::zeros(spec(1, &[0], &[]));
        m.nets[0] = FeatureNetParams {
            w1: [1.0, 3.0],
            b1: [0.0, -3.0],
            w2: [1.0, -2.0],
            b2: 0.0,
        };
        let r = certify(&m, 100, None).unwrap();
        assert!(!r.passed());
        let found = &r.individual[0];
        assert!(found.min_slope < 0.0);

        // brute-force scan at 10x resolution
        let fine = uniform_grid(-2.0, 2.0, 1000);
        let (bmin, bat) = argmin_over(&fine, |x| m.nets[0].input_derivative(x));
        assert!(bmin < 0.0);
        let cell = 4.0 / 99.0;
        assert!((bat - found.argmin).abs() <= cell, "{bat} vs {}", found.argmin);
    }

    #[test]
    fn certify_degenerate_range_warns() {
        let mut s = spec(1, &[0], &[]);
        s.features[0].min = 1.0;
        s.features[0].max = 1.0;
        let m = NamModel::zeros(s);
        let r = certify(&m, 50, None).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(r.passed());
    }

    #[test]
    fn certify_requires_constraints() {
        let m = NamModel::zeros(spec(1, &[], &[]));
        assert!(certify(&m, 10, None).is_err());
    }

    #[test]
    fn one_feature_penalty_matches_numeric_differentiation() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let m = NamModel::init(spec(1, &[0], &[]), &mut rng);
            let pts: Vec<f64> = (0..25).map(|_| rng.random_range(-2.0..2.0)).collect();
            let c = cfg(&[(0, pts.clone())], vec![], 0.01);
            let h = 1e-5;
            let brute: f64 = pts
                .iter()
                .map(|&x| {
                    let d = (m.nets[0].forward(x + h) - m.nets[0].forward(x - h)) / (2.0 * h);
                    (0.01 - d).max(0.0).powi(2)
                })
                .sum();
            let analytic = penalty_individual(&m, &c).unwrap();
            let rel = (analytic - brute).abs() / analytic.abs().max(1e-12);
            assert!(analytic == brute || rel < 1e-6, "{analytic} vs {brute}");
        }
    }

    fn random_constrained(seed: u64) -> (NamModel, PenaltyConfig) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = NamModel::init(spec(3, &[0, 1], &[(0, 1)]), &mut rng);
        let pts = |rng: &mut ChaCha8Rng| (0..8).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>();
        let mut c = cfg(
            &[(0, pts(&mut rng)), (1, pts(&mut rng))],
            vec![pts(&mut rng)],
            rng.random_range(0.0..0.2),
        );
        c.lambda = rng.random_range(0.1..5.0);
        c.eta = rng.random_range(0.1..5.0);
        (m, c)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn penalty_gradient_matches_finite_differences(seed in 0u64..1_000_000) {
            let (m, c) = random_constrained(seed);
            let g = penalty_gradient(&m, &c).unwrap();
            prop_assert_eq!(g[0], 0.0);
            let obj = |p: &[f64]| {
                let mut q = m.clone();
                q.set_params(p);
                let (h1, h2) = penalties(&q, &c).unwrap();
                c.lambda * h1 + c.eta * h2
            };
            let base = m.params();
            let h = 1e-6;
            for i in 0..base.len() {
                let mut up = base.clone();
                let mut dn = base.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (obj(&up) - obj(&dn)) / (2.0 * h);
                let err = (g[i] - fd).abs() / g[i].abs().max(fd.abs()).max(1e-3);
                prop_assert!(err < 1e-4, "param {}: {} vs {}", i, g[i], fd);
            }
            // the unconstrained third feature gets nothing
            let o = NamModel::net_offset(2);
            prop_assert!(g[o..o + PARAMS_PER_NET].iter().all(|&v| v == 0.0));
        }

        #[test]
        fn penalties_nonnegative_and_monotone_in_margin(seed in 0u64..1_000_000, dm in 0.0f64..0.5) {
            let (m, c) = random_constrained(seed);
            let (a1, a2) = penalties(&m, &c).unwrap();
            let (b1, b2) = penalties(&m, &c.with_margin(c.margin + dm)).unwrap();
            prop_assert!(a1 >= 0.0 && a2 >= 0.0);
            prop_assert!(b1 >= a1 && b2 >= a2);
        }

        #[test]
        fn certify_pass_means_nonnegative_on_grid(seed in 0u64..1_000_000) {
            let (m, _) = random_constrained(seed);
            let r = certify(&m, 64, None).unwrap();
            let grid = uniform_grid(-2.0, 2.0, 64);
            for c in &r.individual {
                let all_ok = grid.iter().all(|&x| m.nets[c.feature].input_derivative(x) >= 0.0);
                prop_assert_eq!(c.pass, all_ok);
                prop_assert_eq!(c.pass, c.min_slope >= 0.0);
            }
        }
    }
}
