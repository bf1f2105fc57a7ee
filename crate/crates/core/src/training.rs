//! Collocation sets, the mean-square residual loss, its exact parameter
//! gradient, and Adam training with early stopping.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::net2::{init_params_scaled, NetParams, DEFAULT_INIT_SCALE};
use crate::problems::{BoundaryCache, PointData, ProblemSpec};

/// Loss checkpoints are recorded at this iteration stride.
pub const HISTORY_STRIDE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    #[default]
    Equispaced,
    UniformRandom,
}

/// Strictly increasing interior points of `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    points: Vec<f64>,
}

impl CollocationSet {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("collocation set is empty".into()));
        }
        if points.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::InvalidArgument("collocation points must lie in (0, 1)".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("collocation points must increase strictly".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `Equispaced`: `x_i = i / (n + 1)`. `UniformRandom`: `n` distinct seeded
/// uniform draws, sorted.
pub fn make_collocation(n: usize, sampling: Sampling, seed: u64) -> Result<CollocationSet> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 collocation points, got {n}")));
    }
    let points = match sampling {
        Sampling::Equispaced => (1..=n).map(|i| i as f64 / (n + 1) as f64).collect(),
        Sampling::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut set = BTreeSet::new();
            while set.len() < n {
                let x: f64 = rng.gen();
                if x > 0.0 {
                    set.insert(x.to_bits());
                }
            }
            // positive f64 bit patterns sort like the values
            set.into_iter().map(f64::from_bits).collect()
        }
    };
    CollocationSet::from_points(points)
}

/// Residual-dependent data for one collocation set, precomputed once.
#[derive(Debug, Clone)]
pub struct LossContext<'a> {
    spec: &'a ProblemSpec,
    data: Vec<PointData>,
}

impl<'a> LossContext<'a> {
    pub fn new(spec: &'a ProblemSpec, set: &CollocationSet) -> Result<Self> {
        let data = set.points().iter().map(|&x| spec.point_data(x)).collect::<Result<_>>()?;
        Ok(Self { spec, data })
    }

    pub fn loss(&self, p: &NetParams) -> f64 {
        let cache = BoundaryCache::new(p);
        let sum: f64 = self
            .data
            .iter()
            .map(|d| {
                let r = self.spec.residual_parts(d, p.eval_jet(d.x), cache).r;
                r * r
            })
            .sum();
        sum / self.data.len() as f64
    }

    /// Loss and its gradient (flat `[w1 | b1 | w2]` layout) in one sweep.
    pub fn loss_and_grad(&self, p: &NetParams, grad: &mut [f64]) -> f64 {
        let n1 = p.n1();
        assert_eq!(grad.len(), 3 * n1, "gradient buffer length");
        grad.iter_mut().for_each(|g| *g = 0.0);
        let cache = BoundaryCache::new(p);
        let scale = 2.0 / self.data.len() as f64;
        let mut act = vec![(0.0, 0.0); n1];
        let mut sum = 0.0;
        let (mut c0_weight, mut c1_weight) = (0.0, 0.0);
        for d in &self.data {
            let jet = p.eval_jet_cached(d.x, &mut act);
            let parts = self.spec.residual_parts(d, jet, cache);
            sum += parts.r * parts.r;
            let w = scale * parts.r;
            p.accumulate_vjp(d.x, &act, (w * parts.du, w * parts.dux, w * parts.duxx), grad);
            c0_weight += w * parts.dc0;
            c1_weight += w * parts.dc1;
        }
        // the ansatz also depends on the parameters through u(0) and u(1)
        if c0_weight != 0.0 {
            p.eval_jet_cached(0.0, &mut act);
            p.accumulate_vjp(0.0, &act, (c0_weight, 0.0, 0.0), grad);
        }
        if c1_weight != 0.0 {
            p.eval_jet_cached(1.0, &mut act);
            p.accumulate_vjp(1.0, &act, (c1_weight, 0.0, 0.0), grad);
        }
        sum / self.data.len() as f64
    }
}

/// Mean-square residual over the collocation set.
pub fn loss(spec: &ProblemSpec, p: &NetParams, set: &CollocationSet) -> Result<f64> {
    Ok(LossContext::new(spec, set)?.loss(p))
}

/// Exact gradient of [`loss`] with respect to every parameter.
pub fn loss_grad(spec: &ProblemSpec, p: &NetParams, set: &CollocationSet) -> Result<Vec<f64>> {
    let mut g = vec![0.0; p.len()];
    LossContext::new(spec, set)?.loss_and_grad(p, &mut g);
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub n_points: usize,
    pub width: usize,
    pub max_iters: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub patience: usize,
    pub min_rel_improve: f64,
    pub seed: u64,
    pub sampling: Sampling,
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_points: 50,
            width: 50,
            max_iters: 50_000,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            patience: 2000,
            min_rel_improve: 1e-8,
            seed: 0,
            sampling: Sampling::Equispaced,
            init_scale: DEFAULT_INIT_SCALE,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.n_points < 2 {
            return bad("n_points must be at least 2");
        }
        if self.width == 0 {
            return bad("width must be positive");
        }
        if !(self.lr > 0.0 && self.lr < 1.0) {
            return bad("lr must lie in (0, 1)");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("Adam betas must lie in (0, 1)");
        }
        if self.adam_eps.is_nan() || self.adam_eps <= 0.0 {
            return bad("adam_eps must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be positive");
        }
        if !(self.min_rel_improve >= 0.0 && self.min_rel_improve < 1.0) {
            return bad("min_rel_improve must lie in [0, 1)");
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return bad("init_scale must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossCheckpoint {
    pub iteration: usize,
    /// Loss of the current iterate.
    pub loss: f64,
    /// Best loss seen so far.
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub final_loss: f64,
    pub iterations_run: usize,
    pub loss_history: Vec<LossCheckpoint>,
    pub stopped_early: bool,
}

/// Adam moment buffers.
#[derive(Debug, Clone)]
pub struct Adam {
    beta1: f64,
    beta2: f64,
    eps: f64,
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self { beta1, beta2, eps, lr, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for ((p, g), (m, v)) in params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Trains from `init_params(cfg.width, cfg.seed)` with Adam and returns the
/// best parameters seen.
///
/// Stops after `max_iters` updates, or once the best loss has not dropped by
/// a relative `min_rel_improve` for `patience` consecutive iterations.
pub fn train(spec: &ProblemSpec, cfg: &TrainConfig) -> Result<(NetParams, TrainReport)> {
    cfg.validate()?;
    let set = make_collocation(cfg.n_points, cfg.sampling, cfg.seed)?;
    let ctx = LossContext::new(spec, &set)?;
    let mut params = init_params_scaled(cfg.width, cfg.seed, cfg.init_scale)?;
    let mut grad = vec![0.0; params.len()];
    let mut adam = Adam::new(params.len(), cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);

    let mut best = params.clone();
    let mut best_loss = f64::INFINITY;
    let mut since_improve = 0usize;
    let mut history = Vec::new();
    let mut stopped_early = false;
    let mut iterations_run = 0usize;

    for iter in 0..=cfg.max_iters {
        let loss = ctx.loss_and_grad(&params, &mut grad);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss { iteration: iter });
        }
        if loss < best_loss * (1.0 - cfg.min_rel_improve) {
            since_improve = 0;
        } else {
            since_improve += 1;
        }
        if loss < best_loss {
            best_loss = loss;
            best.clone_from(&params);
        }
        if iter % HISTORY_STRIDE == 0 {
            history.push(LossCheckpoint { iteration: iter, loss, best: best_loss });
        }
        if iter == cfg.max_iters {
            break;
        }
        if since_improve >= cfg.patience {
            stopped_early = true;
            break;
        }
        adam.step(params.as_flat_mut(), &grad);
        iterations_run = iter + 1;
    }
    if history.last().map(|c| c.iteration) != Some(iterations_run) {
        history.push(LossCheckpoint { iteration: iterations_run, loss: ctx.loss(&params), best: best_loss });
    }
    let report = TrainReport { final_loss: best_loss, iterations_run, loss_history: history, stopped_early };
    Ok((best, report))
}
