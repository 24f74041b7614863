//! Monte Carlo estimates of how often a monotone data-generating process
//! produces a non-monotone empirical marginal curve `ȳ|x`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SIM_SEED: u64 = 20_221_013;

fn default_n_samples() -> usize {
    10_000
}
fn default_n_reps() -> usize {
    1000
}
fn default_x_max() -> u32 {
    4
}
fn default_seed() -> u64 {
    DEFAULT_SIM_SEED
}

/// `y = α log(c + X) + ε`, `X ~ Poisson(poisson_rate)`, `ε ~ N(0, σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfigIndividual {
    pub alpha: f64,
    pub c: f64,
    pub poisson_rate: f64,
    pub sigma: f64,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default = "default_n_reps")]
    pub n_reps: usize,
    #[serde(default = "default_x_max")]
    pub x_check_max: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

/// `y = α log(c + X1) + β log(c + X2) + ε` with independent Poisson covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfigPairwise {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub rate1: f64,
    pub rate2: f64,
    pub sigma: f64,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default = "default_n_reps")]
    pub n_reps: usize,
    #[serde(default = "default_x_max")]
    pub x_check_max: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn check_common(c: f64, sigma: f64, n_samples: usize, n_reps: usize) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidConfig(m));
    if !(c >= 1.0 && c.is_finite()) {
        return bad(format!("c must be >= 1, got {c}"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return bad(format!("sigma must be >= 0, got {sigma}"));
    }
    if n_samples == 0 || n_reps == 0 {
        return bad("n_samples and n_reps must be positive".into());
    }
    Ok(())
}

fn check_rate(name: &str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be > 0, got {r}")))
    }
}

impl SimConfigIndividual {
    pub fn validate(&self) -> Result<()> {
        check_common(self.c, self.sigma, self.n_samples, self.n_reps)?;
        check_rate("poisson_rate", self.poisson_rate)?;
        if !self.alpha.is_finite() {
            return Err(Error::InvalidConfig("alpha must be finite".into()));
        }
        Ok(())
    }
}

impl SimConfigPairwise {
    pub fn validate(&self) -> Result<()> {
        check_common(self.c, self.sigma, self.n_samples, self.n_reps)?;
        check_rate("rate1", self.rate1)?;
        check_rate("rate2", self.rate2)?;
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(Error::InvalidConfig("alpha and beta must be finite".into()));
        }
        if self.alpha < self.beta {
            return Err(Error::InvalidConfig(format!(
                "alpha ({}) must be >= beta ({})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: u32,
    /// `None` when no sample has this value.
    pub mean: Option<f64>,
    pub count: usize,
}

/// Mean of `ys` at every integer `x` in `[0, x_max]`. Samples above `x_max`
/// are ignored.
pub fn empirical_marginal_curve(xs: &[u32], ys: &[f64], x_max: u32) -> Vec<CurvePoint> {
    debug_assert_eq!(xs.len(), ys.len());
    let k = x_max as usize + 1;
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (&x, &y) in xs.iter().zip(ys) {
        if (x as usize) < k {
            sum[x as usize] += y;
            count[x as usize] += 1;
        }
    }
    (0..k)
        .map(|v| CurvePoint {
            x: v as u32,
            mean: (count[v] > 0).then(|| sum[v] / count[v] as f64),
            count: count[v],
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Consecutive present levels only.
    Adjacent,
    /// Every ordered pair of present levels.
    AllPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationCheck {
    pub violated: bool,
    /// Fewer than two present levels, so nothing was compared.
    pub vacuous: bool,
}

pub fn is_violated_individual(curve: &[CurvePoint], mode: CheckMode) -> ViolationCheck {
    let means: Vec<f64> = curve.iter().filter_map(|p| p.mean).collect();
    if means.len() < 2 {
        return ViolationCheck {
            violated: false,
            vacuous: true,
        };
    }
    let violated = match mode {
        CheckMode::Adjacent => means.windows(2).any(|w| w[1] < w[0]),
        CheckMode::AllPairs => {
            let mut running_max = f64::NEG_INFINITY;
            means.iter().any(|&m| {
                let v = m < running_max;
                running_max = running_max.max(m);
                v
            })
        }
    };
    ViolationCheck {
        violated,
        vacuous: false,
    }
}

/// Increments `m(x+1) − m(x)` of a curve, for each `x` where both levels are present.
pub fn increments(curve: &[CurvePoint]) -> Vec<Option<f64>> {
    curve
        .windows(2)
        .map(|w| match (w[0].mean, w[1].mean) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        })
        .collect()
}

/// True iff at some `x` where both curves have levels `x` and `x+1`, the
/// dominant curve rises strictly less than the dominated one.
pub fn is_violated_pairwise(dominant: &[CurvePoint], dominated: &[CurvePoint]) -> ViolationCheck {
    let mut compared = false;
    let mut violated = false;
    for (a, b) in increments(dominant).into_iter().zip(increments(dominated)) {
        if let (Some(a), Some(b)) = (a, b) {
            compared = true;
            violated |= a < b;
        }
    }
    ViolationCheck {
        violated,
        vacuous: !compared,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub label: String,
    pub violations: usize,
    pub ratio: f64,
    pub stderr: f64,
    /// Ratio under the all-pairs reading of the check (equals `ratio` for pairwise gaps).
    pub all_pairs_ratio: f64,
    pub vacuous_reps: usize,
}

impl RatioEstimate {
    fn from_counts(label: &str, adjacent: usize, all_pairs: usize, vacuous: usize, n: usize) -> Self {
        let p = adjacent as f64 / n as f64;
        Self {
            label: label.to_string(),
            violations: adjacent,
            ratio: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            all_pairs_ratio: all_pairs as f64 / n as f64,
            vacuous_reps: vacuous,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimConfig {
    Individual(SimConfigIndividual),
    Pairwise(SimConfigPairwise),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub individual: Vec<RatioEstimate>,
    pub pairwise: Option<RatioEstimate>,
    pub n_reps: usize,
    pub config: SimConfig,
}

fn rep_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

fn draw_count(dist: &Poisson<f64>, rng: &mut impl Rng) -> u32 {
    dist.sample(rng) as u32
}

fn noise(sigma: f64, rng: &mut impl Rng) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    adjacent: usize,
    all_pairs: usize,
    vacuous: usize,
}

impl Tally {
    fn add(&mut self, adj: ViolationCheck, all: ViolationCheck) {
        self.adjacent += usize::from(adj.violated);
        self.all_pairs += usize::from(all.violated);
        self.vacuous += usize::from(adj.vacuous);
    }

    fn merge(self, o: Self) -> Self {
        Self {
            adjacent: self.adjacent + o.adjacent,
            all_pairs: self.all_pairs + o.all_pairs,
            vacuous: self.vacuous + o.vacuous,
        }
    }
}

/// One replication of the single-covariate design.
pub fn replicate_individual(cfg: &SimConfigIndividual, rep: usize) -> Vec<CurvePoint> {
    let mut rng = rep_rng(cfg.seed, rep);
    let dist = Poisson::new(cfg.poisson_rate).expect("validated rate");
    let mut xs = Vec::with_capacity(cfg.n_samples);
    let mut ys = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        let x = draw_count(&dist, &mut rng);
        xs.push(x);
        ys.push(cfg.alpha * (cfg.c + f64::from(x)).ln() + noise(cfg.sigma, &mut rng));
    }
    empirical_marginal_curve(&xs, &ys, cfg.x_check_max)
}

/// One replication of the two-covariate design: curves for `x1` and `x2`.
pub fn replicate_pairwise(cfg: &SimConfigPairwise, rep: usize) -> (Vec<CurvePoint>, Vec<CurvePoint>) {
    let mut rng = rep_rng(cfg.seed, rep);
    let d1 = Poisson::new(cfg.rate1).expect("validated rate");
    let d2 = Poisson::new(cfg.rate2).expect("validated rate");
    let mut x1 = Vec::with_capacity(cfg.n_samples);
    let mut x2 = Vec::with_capacity(cfg.n_samples);
    let mut ys = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        let a = draw_count(&d1, &mut rng);
        let b = draw_count(&d2, &mut rng);
        x1.push(a);
        x2.push(b);
        ys.push(
            cfg.alpha * (cfg.c + f64::from(a)).ln()
                + cfg.beta * (cfg.c + f64::from(b)).ln()
                + noise(cfg.sigma, &mut rng),
        );
    }
    (
        empirical_marginal_curve(&x1, &ys, cfg.x_check_max),
        empirical_marginal_curve(&x2, &ys, cfg.x_check_max),
    )
}

pub fn simulate_individual(cfg: &SimConfigIndividual) -> Result<SimResult> {
    cfg.validate()?;
    let t = (0..cfg.n_reps)
        .into_par_iter()
        .map(|rep| {
            let curve = replicate_individual(cfg, rep);
            let mut t = Tally::default();
            t.add(
                is_violated_individual(&curve, CheckMode::Adjacent),
                is_violated_individual(&curve, CheckMode::AllPairs),
            );
            t
        })
        .reduce(Tally::default, Tally::merge);
    Ok(SimResult {
        individual: vec![RatioEstimate::from_counts(
            "x",
            t.adjacent,
            t.all_pairs,
            t.vacuous,
            cfg.n_reps,
        )],
        pairwise: None,
        n_reps: cfg.n_reps,
        config: SimConfig::Individual(cfg.clone()),
    })
}

pub fn simulate_pairwise(cfg: &SimConfigPairwise) -> Result<SimResult> {
    cfg.validate()?;
    let (t1, t2, tp) = (0..cfg.n_reps)
        .into_par_iter()
        .map(|rep| {
            let (c1, c2) = replicate_pairwise(cfg, rep);
            let mut t = [Tally::default(); 3];
            t[0].add(
                is_violated_individual(&c1, CheckMode::Adjacent),
                is_violated_individual(&c1, CheckMode::AllPairs),
            );
            t[1].add(
                is_violated_individual(&c2, CheckMode::Adjacent),
                is_violated_individual(&c2, CheckMode::AllPairs),
            );
            let p = is_violated_pairwise(&c1, &c2);
            t[2].add(p, p);
            (t[0], t[1], t[2])
        })
        .reduce(
            || (Tally::default(), Tally::default(), Tally::default()),
            |a, b| (a.0.merge(b.0), a.1.merge(b.1), a.2.merge(b.2)),
        );
    let n = cfg.n_reps;
    Ok(SimResult {
        individual: vec![
            RatioEstimate::from_counts("x1", t1.adjacent, t1.all_pairs, t1.vacuous, n),
            RatioEstimate::from_counts("x2", t2.adjacent, t2.all_pairs, t2.vacuous, n),
        ],
        pairwise: Some(RatioEstimate::from_counts(
            "x1_over_x2",
            tp.adjacent,
            tp.all_pairs,
            tp.vacuous,
            n,
        )),
        n_reps: n,
        config: SimConfig::Pairwise(cfg.clone()),
    })
}

pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    match cfg {
        SimConfig::Individual(c) => simulate_individual(c),
        SimConfig::Pairwise(c) => simulate_pairwise(c),
    }
}

/// A named simulation cell, optionally with a reference ratio per target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub name: String,
    #[serde(flatten)]
    pub config: SimConfig,
    /// Reference ratios keyed by target label (`x`, `x1`, `x2`, `x1_over_x2`).
    #[serde(default)]
    pub reference: std::collections::BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: String,
    pub target: String,
    pub estimate: RatioEstimate,
    pub reference: Option<f64>,
    pub config: SimConfig,
}

pub fn run_sweep(cells: &[SweepCell]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for cell in cells {
        let res = simulate(&cell.config)?;
        let all = res.individual.iter().chain(res.pairwise.iter());
        for est in all {
            rows.push(SweepRow {
                cell: cell.name.clone(),
                target: est.label.clone(),
                estimate: est.clone(),
                reference: cell.reference.get(&est.label).copied(),
                config: cell.config.clone(),
            });
        }
    }
    Ok(rows)
}

pub const SWEEP_CSV_HEADER: &str = "cell,kind,target,alpha,beta,c,rate1,rate2,sigma,n_samples,x_check_max,ratio,stderr,all_pairs_ratio,reference,n_reps,seed";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let (kind, alpha, beta, c, r1, r2, sigma, n, xm, reps, seed) = match &r.config {
            SimConfig::Individual(k) => (
                "individual",
                k.alpha,
                None,
                k.c,
                k.poisson_rate,
                None,
                k.sigma,
                k.n_samples,
                k.x_check_max,
                k.n_reps,
                k.seed,
            ),
            SimConfig::Pairwise(k) => (
                "pairwise",
                k.alpha,
                Some(k.beta),
                k.c,
                k.rate1,
                Some(k.rate2),
                k.sigma,
                k.n_samples,
                k.x_check_max,
                k.n_reps,
                k.seed,
            ),
        };
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{:?},{},{:?},{:?},{},{:?},{},{},{:?},{:?},{:?},{},{},{}\n",
            r.cell,
            kind,
            r.target,
            alpha,
            opt(beta),
            c,
            r1,
            opt(r2),
            sigma,
            n,
            xm,
            r.estimate.ratio,
            r.estimate.stderr,
            r.estimate.all_pairs_ratio,
            opt(r.reference),
            reps,
            seed
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn curve(means: &[Option<f64>]) -> Vec<CurvePoint> {
        means
            .iter()
            .enumerate()
            .map(|(i, m)| CurvePoint {
                x: i as u32,
                mean: *m,
                count: usize::from(m.is_some()),
            })
            .collect()
    }

    fn ind(sigma: f64) -> SimConfigIndividual {
        SimConfigIndividual {
            alpha: 1.0,
            c: 10.0,
            poisson_rate: 0.5,
            sigma,
            n_samples: 2000,
            n_reps: 200,
            x_check_max: 4,
            seed: 7,
        }
    }

    #[test]
    fn curve_averages() {
        let c = empirical_marginal_curve(&[0, 0, 1], &[1.0, 3.0, 5.0], 1);
        assert_eq!(c[0], CurvePoint { x: 0, mean: Some(2.0), count: 2 });
        assert_eq!(c[1], CurvePoint { x: 1, mean: Some(5.0), count: 1 });
        let c = empirical_marginal_curve(&[2, 2, 2], &[1.0, 2.0, 3.0], 4);
        assert_eq!(c.iter().filter(|p| p.mean.is_some()).count(), 1);
        assert_eq!(c[2].mean, Some(2.0));
    }

    #[test]
    fn curve_counts_match_histogram() {
        let mut rng = rep_rng(3, 0);
        let d = Poisson::new(1.3).unwrap();
        let xs: Vec<u32> = (0..10_000).map(|_| draw_count(&d, &mut rng)).collect();
        let ys = vec![0.0; xs.len()];
        let c = empirical_marginal_curve(&xs, &ys, 6);
        let mut hist: BTreeMap<u32, usize> = BTreeMap::new();
        for &x in &xs {
            *hist.entry(x).or_default() += 1;
        }
        for p in &c {
            assert_eq!(p.count, hist.get(&p.x).copied().unwrap_or(0));
        }
    }

    #[test]
    fn individual_checks() {
        let inc = curve(&[Some(1.0), Some(1.1), Some(1.2)]);
        assert!(!is_violated_individual(&inc, CheckMode::Adjacent).violated);
        let dip = curve(&[Some(1.0), Some(0.9), Some(1.2)]);
        assert!(is_violated_individual(&dip, CheckMode::Adjacent).violated);
        // absent level is bridged
        let gap = curve(&[Some(1.0), None, Some(0.8)]);
        assert!(is_violated_individual(&gap, CheckMode::Adjacent).violated);
        let gap = curve(&[Some(1.0), None, Some(1.8)]);
        assert!(!is_violated_individual(&gap, CheckMode::Adjacent).violated);
        let one = curve(&[None, Some(1.0), None]);
        let v = is_violated_individual(&one, CheckMode::Adjacent);
        assert!(!v.violated && v.vacuous);
        // all-pairs catches what adjacent cannot only through non-adjacent drops
        let slow = curve(&[Some(1.0), Some(1.5), Some(0.9)]);
        assert!(is_violated_individual(&slow, CheckMode::Adjacent).violated);
        assert!(is_violated_individual(&slow, CheckMode::AllPairs).violated);
    }

    #[test]
    fn pairwise_checks() {
        let a = curve(&[Some(0.0), Some(1.0), Some(2.0)]);
        let b = curve(&[Some(0.0), Some(0.5), Some(1.6)]);
        assert!(is_violated_pairwise(&a, &b).violated);
        let b = curve(&[Some(0.0), Some(0.5), Some(1.0)]);
        assert!(!is_violated_pairwise(&a, &b).violated);
        assert!(!is_violated_pairwise(&a, &a).violated);
        let b = curve(&[Some(0.0), None, None]);
        assert!(is_violated_pairwise(&a, &b).vacuous);
    }

    #[test]
    fn noiseless_processes_never_violate() {
        let cfg = SimConfigIndividual {
            alpha: 1.0,
            c: 5.0,
            sigma: 0.0,
            ..ind(0.0)
        };
        let r = simulate_individual(&cfg).unwrap();
        assert_eq!(r.individual[0].violations, 0);
        assert_eq!(r.individual[0].stderr, 0.0);
        let p = SimConfigPairwise {
            alpha: 1.2,
            beta: 1.0,
            c: 10.0,
            rate1: 0.5,
            rate2: 0.4,
            sigma: 0.0,
            // the other covariate still perturbs each marginal mean, so the
            // bins need to be large for the ordering to show in every rep
            n_samples: 1_000_000,
            n_reps: 8,
            x_check_max: 3,
            seed: 1,
        };
        let r = simulate_pairwise(&p).unwrap();
        assert_eq!(r.pairwise.as_ref().unwrap().violations, 0);
        assert!(r.individual.iter().all(|e| e.violations == 0));
    }

    #[test]
    fn reproducible_to_the_bit() {
        let a = simulate_individual(&ind(0.3)).unwrap();
        let b = simulate_individual(&ind(0.3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(replicate_individual(&ind(0.3), 5), replicate_individual(&ind(0.3), 5));
        assert_ne!(replicate_individual(&ind(0.3), 5), replicate_individual(&ind(0.3), 6));
    }

    #[test]
    fn more_noise_more_violations() {
        let ratios: Vec<(f64, f64)> = [0.1, 0.2, 0.3, 0.4]
            .iter()
            .map(|&s| {
                let r = simulate_individual(&ind(s)).unwrap();
                (r.individual[0].ratio, r.individual[0].stderr)
            })
            .collect();
        for w in ratios.windows(2) {
            let tol = 2.0 * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt();
            assert!(w[1].0 + tol >= w[0].0, "{ratios:?}");
        }
    }

    #[test]
    fn spread_shrinks_with_reps() {
        let spread = |reps: usize| {
            let v: Vec<f64> = (0..10u64)
                .map(|m| {
                    let cfg = SimConfigIndividual {
                        n_samples: 1000,
                        n_reps: reps,
                        seed: 1000 + m,
                        ..ind(0.3)
                    };
                    simulate_individual(&cfg).unwrap().individual[0].ratio
                })
                .collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        };
        let ratio = spread(100) / spread(400);
        assert!((ratio - 2.0).abs() <= 0.6, "spread ratio {ratio}");
    }

    #[test]
    fn invalid_configs() {
        assert!(simulate_individual(&SimConfigIndividual { c: 0.5, ..ind(0.1) }).is_err());
        assert!(simulate_individual(&SimConfigIndividual { sigma: -1.0, ..ind(0.1) }).is_err());
        assert!(simulate_individual(&SimConfigIndividual { poisson_rate: 0.0, ..ind(0.1) }).is_err());
    }

    #[test]
    fn sweep_rows_and_csv() {
        let cells = vec![SweepCell {
            name: "demo".into(),
            config: SimConfig::Individual(SimConfigIndividual { n_reps: 20, ..ind(0.2) }),
            reference: [("x".to_string(), 0.083)].into_iter().collect(),
        }];
        let rows = run_sweep(&cells).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].reference, Some(0.083));
        let csv = sweep_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SWEEP_CSV_HEADER));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), SWEEP_CSV_HEADER.split(',').count());
        assert_eq!(fields[0], "demo");
        assert_eq!(fields[15], "20");
    }

    proptest! {
        #[test]
        fn increasing_curves_pass_both_modes(mut v in proptest::collection::vec(-10.0f64..10.0, 2..8)) {
            v.sort_by(f64::total_cmp);
            let c = curve(&v.iter().map(|&m| Some(m)).collect::<Vec<_>>());
            prop_assert!(!is_violated_individual(&c, CheckMode::Adjacent).violated);
            prop_assert!(!is_violated_individual(&c, CheckMode::AllPairs).violated);
        }

        #[test]
        fn adjacent_and_all_pairs_agree(v in proptest::collection::vec(-10.0f64..10.0, 2..8)) {
            // a drop anywhere implies an adjacent drop somewhere
            let c = curve(&v.iter().map(|&m| Some(m)).collect::<Vec<_>>());
            prop_assert_eq!(
                is_violated_individual(&c, CheckMode::Adjacent).violated,
                is_violated_individual(&c, CheckMode::AllPairs).violated
            );
        }
    }
}
