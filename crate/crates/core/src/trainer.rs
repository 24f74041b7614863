//! Gradient-based fitting of the penalized objective `ℓ + λ·h1 + η·h2` and
//! the penalty-escalation loop that produces monotone models.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{FcnnModel, ModelSpec, NamModel};
use crate::monotonicity::{
    self, certify, CertificationReport, PenaltyConfig, DEFAULT_CERTIFY_RESOLUTION, DEFAULT_MARGIN,
};

/// Datasets up to this many rows are trained full-batch when `batch_size` is 0.
pub const FULL_BATCH_LIMIT: usize = 20_000;
const AUTO_BATCH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    GradientDescent,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    /// 0 selects full batch (or 4096-row batches above 20k rows).
    pub batch_size: usize,
    pub step_size: f64,
    pub optimizer: Optimizer,
    pub lambda_init: f64,
    pub eta_init: f64,
    pub escalation_factor: f64,
    pub max_escalations: usize,
    pub margin: f64,
    /// Stop a stage once the objective changes by less than this (relative) between epochs.
    pub tolerance: f64,
    /// Continue each escalation round from the previous round's parameters.
    pub warm_start: bool,
    /// Uniform points per constrained feature added to the penalty evaluation set.
    pub eval_grid_points: usize,
    pub certify_resolution: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 20_220_917,
            epochs: 2000,
            batch_size: 0,
            step_size: 1e-2,
            optimizer: Optimizer::default(),
            lambda_init: 0.1,
            eta_init: 0.1,
            escalation_factor: 10.0,
            max_escalations: 12,
            margin: DEFAULT_MARGIN,
            tolerance: 1e-10,
            warm_start: true,
            eval_grid_points: 25,
            certify_resolution: DEFAULT_CERTIFY_RESOLUTION,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad(format!("step_size must be > 0, got {}", self.step_size));
        }
        if !(self.escalation_factor > 1.0) {
            return bad(format!(
                "escalation_factor must be > 1, got {}",
                self.escalation_factor
            ));
        }
        if self.max_escalations < 1 {
            return bad("max_escalations must be >= 1".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1".into());
        }
        if !(self.lambda_init > 0.0 && self.eta_init > 0.0) {
            return bad("lambda_init and eta_init must be > 0".into());
        }
        if !(self.margin >= 0.0) {
            return bad(format!("margin must be >= 0, got {}", self.margin));
        }
        if let Optimizer::Adam {
            beta1,
            beta2,
            epsilon,
        } = self.optimizer
        {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || !(epsilon > 0.0) {
                return bad("adam decay rates must lie in [0, 1) and epsilon > 0".into());
            }
        }
        Ok(())
    }

    fn effective_batch(&self, n: usize) -> usize {
        match self.batch_size {
            0 if n <= FULL_BATCH_LIMIT => n,
            0 => AUTO_BATCH,
            b => b.min(n),
        }
    }
}

/// Per-epoch objective values of one training stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub objective: Vec<f64>,
    pub epochs_run: usize,
}

enum OptState {
    Gd,
    Adam {
        m: Vec<f64>,
        v: Vec<f64>,
        t: i32,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

impl OptState {
    fn new(opt: Optimizer, n: usize) -> Self {
        match opt {
            Optimizer::GradientDescent => OptState::Gd,
            Optimizer::Adam {
                beta1,
                beta2,
                epsilon,
            } => OptState::Adam {
                m: vec![0.0; n],
                v: vec![0.0; n],
                t: 0,
                beta1,
                beta2,
                epsilon,
            },
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        match self {
            OptState::Gd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= lr * g;
                }
            }
            OptState::Adam {
                m,
                v,
                t,
                beta1,
                beta2,
                epsilon,
            } => {
                *t += 1;
                let c1 = 1.0 - beta1.powi(*t);
                let c2 = 1.0 - beta2.powi(*t);
                for i in 0..params.len() {
                    m[i] = *beta1 * m[i] + (1.0 - *beta1) * grad[i];
                    v[i] = *beta2 * v[i] + (1.0 - *beta2) * grad[i] * grad[i];
                    params[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + *epsilon);
                }
            }
        }
    }
}

/// Runs one optimization stage. `objective(params, rows)` returns the
/// objective and its gradient on `rows` (all rows when `None`).
fn minimize<F>(
    params: &mut Vec<f64>,
    n_rows: usize,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
    weights: (f64, f64),
    mut objective: F,
) -> Result<StageTrace>
where
    F: FnMut(&[f64], Option<&[usize]>) -> Result<(f64, Vec<f64>)>,
{
    let batch = cfg.effective_batch(n_rows);
    let full = batch >= n_rows;
    let mut opt = OptState::new(cfg.optimizer, params.len());
    let mut order: Vec<usize> = (0..n_rows).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let diverged = |epoch: usize| Error::Diverged {
        epoch,
        lambda: weights.0,
        eta: weights.1,
    };
    for epoch in 0..cfg.epochs {
        let epoch_obj = if full {
            let (obj, grad) = objective(params, None)?;
            if !obj.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(diverged(epoch));
            }
            opt.step(params, &grad, cfg.step_size);
            obj
        } else {
            order.shuffle(rng);
            let mut acc = 0.0;
            let mut count = 0;
            for chunk in order.chunks(batch) {
                let (obj, grad) = objective(params, Some(chunk))?;
                if !obj.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    return Err(diverged(epoch));
                }
                opt.step(params, &grad, cfg.step_size);
                acc += obj * chunk.len() as f64;
                count += chunk.len();
            }
            acc / count as f64
        };
        let converged = trace
            .last()
            .is_some_and(|&prev: &f64| (prev - epoch_obj).abs() <= cfg.tolerance * (1.0 + prev.abs()));
        trace.push(epoch_obj);
        if converged {
            break;
        }
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(diverged(trace.len()));
    }
    Ok(StageTrace {
        epochs_run: trace.len(),
        objective: trace,
    })
}

fn check_inputs(data: &Dataset, spec: &ModelSpec) -> Result<()> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if data.n_features() != spec.n_features() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_features(),
            got: data.n_features(),
        });
    }
    if data.task != spec.task {
        return Err(Error::InvalidSpec("dataset task differs from spec task".into()));
    }
    spec.validate()?;
    spec.ensure_increasing()
}

fn init_rngs(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let init = ChaCha8Rng::seed_from_u64(seed);
    let mut batches = ChaCha8Rng::seed_from_u64(seed);
    batches.set_stream(1);
    (init, batches)
}

/// Value of `ℓ + λ·h1 + η·h2` for a model.
pub fn penalized_objective(model: &NamModel, data: &Dataset, pen: &PenaltyConfig) -> Result<f64> {
    let (h1, h2) = monotonicity::penalties(model, pen)?;
    Ok(model.loss(data)? + pen.lambda * h1 + pen.eta * h2)
}

/// One stage of penalized training starting from `model`.
pub fn train_stage(
    model: &mut NamModel,
    data: &Dataset,
    pen: &PenaltyConfig,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<StageTrace> {
    pen.validate()?;
    let constrained = pen.lambda > 0.0 || pen.eta > 0.0;
    let mut params = model.params();
    let mut scratch = model.clone();
    let trace = minimize(
        &mut params,
        data.n_rows(),
        cfg,
        rng,
        (pen.lambda, pen.eta),
        |p, rows| {
            scratch.set_params(p);
            let (mut obj, mut grad) = scratch.loss_and_gradient(data, rows)?;
            if constrained {
                let (h1, h2) = monotonicity::penalties(&scratch, pen)?;
                obj += pen.lambda * h1 + pen.eta * h2;
                let pg = monotonicity::penalty_gradient(&scratch, pen)?;
                grad.iter_mut().zip(pg).for_each(|(g, q)| *g += q);
            }
            Ok((obj, grad))
        },
    )?;
    model.set_params(&params);
    Ok(trace)
}

/// Trains a NAM on `ℓ + λ·h1 + η·h2` from a seeded initialization.
pub fn train_nam(
    data: &Dataset,
    spec: &ModelSpec,
    cfg: &TrainConfig,
    lambda: f64,
    eta: f64,
) -> Result<NamModel> {
    cfg.validate()?;
    check_inputs(data, spec)?;
    let (mut init_rng, mut batch_rng) = init_rngs(cfg.seed);
    let mut model = NamModel::init(spec.clone(), &mut init_rng);
    let pen = PenaltyConfig::from_data(&model, data, cfg.margin, cfg.eval_grid_points)?
        .with_weights(lambda, eta);
    train_stage(&mut model, data, &pen, cfg, &mut batch_rng)?;
    Ok(model)
}

/// One row of the escalation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscalationRecord {
    pub round: usize,
    pub lambda: f64,
    pub eta: f64,
    /// Data loss `ℓ` after the round.
    pub loss: f64,
    /// Individual penalty at zero margin (the verification condition).
    pub h1: f64,
    /// Pairwise penalty at zero margin.
    pub h2: f64,
    /// Penalties at the training margin.
    pub h1_margin: f64,
    pub h2_margin: f64,
    /// Penalized objective at the start of the round.
    pub start_objective: f64,
    pub epochs: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnamFit {
    pub model: NamModel,
    pub log: Vec<EscalationRecord>,
    pub certification: Option<CertificationReport>,
}

pub fn escalation_csv(log: &[EscalationRecord]) -> String {
    let mut s = String::from("round,lambda,eta,loss,h1,h2\n");
    for r in log {
        s.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{:?}\n",
            r.round, r.lambda, r.eta, r.loss, r.h1, r.h2
        ));
    }
    s
}

fn escalate(weight: f64, init: f64, factor: f64) -> f64 {
    if weight == 0.0 {
        init
    } else {
        weight * factor
    }
}

/// Penalty escalation: train with `λ = η = 0`, then while the individual
/// (pairwise) constraints are violated at the evaluation points or on the
/// certification grid, raise `λ` (`η`) and retrain. Returns the first model
/// satisfying every constraint.
pub fn train_mnam(data: &Dataset, spec: &ModelSpec, cfg: &TrainConfig) -> Result<MnamFit> {
    cfg.validate()?;
    check_inputs(data, spec)?;
    let (mut init_rng, mut batch_rng) = init_rngs(cfg.seed);
    let fresh = NamModel::init(spec.clone(), &mut init_rng);
    let mut model = fresh.clone();
    let base = PenaltyConfig::from_data(&model, data, cfg.margin, cfg.eval_grid_points)?;
    let raw = base.with_margin(0.0);
    let (mut lambda, mut eta) = (0.0, 0.0);
    let mut log = Vec::new();

    for round in 0..=cfg.max_escalations {
        let pen = base.clone().with_weights(lambda, eta);
        let start_objective = penalized_objective(&model, data, &pen)?;
        let trace = train_stage(&mut model, data, &pen, cfg, &mut batch_rng)?;
        let loss = model.loss(data)?;
        let (h1, h2) = monotonicity::penalties(&model, &raw)?;
        let (h1_margin, h2_margin) = monotonicity::penalties(&model, &base)?;
        let report = if spec.has_constraints() {
            Some(certify(&model, cfg.certify_resolution, Some(data))?)
        } else {
            None
        };
        let ind_ok = h1 == 0.0 && report.as_ref().is_none_or(|r| r.individual_passed());
        let pair_ok = h2 == 0.0 && report.as_ref().is_none_or(|r| r.pairwise_passed());
        log.push(EscalationRecord {
            round,
            lambda,
            eta,
            loss,
            h1,
            h2,
            h1_margin,
            h2_margin,
            start_objective,
            epochs: trace.epochs_run,
            certified: ind_ok && pair_ok,
        });
        if ind_ok && pair_ok {
            return Ok(MnamFit {
                model,
                log,
                certification: report,
            });
        }
        if !ind_ok {
            lambda = escalate(lambda, cfg.lambda_init, cfg.escalation_factor);
        }
        if !pair_ok {
            eta = escalate(eta, cfg.eta_init, cfg.escalation_factor);
        }
        if !cfg.warm_start {
            model = fresh.clone();
        }
    }
    Err(Error::ConstraintsUnsatisfied { log })
}

/// Fully connected baseline, trained on the unpenalized loss.
pub fn train_fcnn(data: &Dataset, cfg: &TrainConfig) -> Result<FcnnModel> {
    cfg.validate()?;
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let (mut init_rng, mut batch_rng) = init_rngs(cfg.seed);
    let mut model = FcnnModel::init(data.task, data.n_features(), &mut init_rng);
    let mut params = model.params();
    let mut scratch = model.clone();
    minimize(&mut params, data.n_rows(), cfg, &mut batch_rng, (0.0, 0.0), |p, rows| {
        scratch.set_params(p);
        scratch.loss_and_gradient(data, rows)
    })?;
    model.set_params(&params);
    Ok(model)
}
