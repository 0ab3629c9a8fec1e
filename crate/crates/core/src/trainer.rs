//! n-slack cutting-plane training of linear models.
//!
//! Each sample keeps its own working set of cutting planes in weight space.
//! The restricted master
//!
//! ```text
//! min ½‖w‖² + C Σ_i ξ_i   s.t.  ξ_i ≥ b_k + <a_k, w>  (k ∈ S^i),  ξ_i ≥ 0
//! ```
//!
//! is solved in its dual, `max Σ α_k b_k − ½‖Σ α_k a_k‖²` with `α ≥ 0` and
//! `Σ_{k∈S^i} α_k ≤ C`, by coordinate ascent. At every point `w = −Σ α_k a_k`.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::decomp::{decompose, Decomposition};
use crate::error::{Error, Result};
use crate::losses::{LossFamily, LossSpec};
use crate::model::{dot, LinearModel, Sample, WeightMode};
use crate::scalar::Scalar;
use crate::setfn::{Repr, DEFAULT_EXHAUSTIVE_CAP};
use crate::surrogates::{
    b_surrogate, hinge_sum, lovasz_hinge_unchecked, require_submodular, slack_rescale, CuttingPlane, Inference,
    Provenance, SurrogateResult, EXACT_SLACK_CAP,
};

/// Surrogate minimised during training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateKind {
    /// Lovász hinge on `f*` plus slack rescaling on `g*`.
    BD,
    #[serde(rename = "s_greedy", alias = "slack_greedy")]
    SlackGreedy,
    #[serde(rename = "s_exact", alias = "slack_exact")]
    SlackExact,
    Lovasz,
    /// Independent per-position hinges; ignores the loss.
    ZeroOne,
}

impl SurrogateKind {
    pub const ALL: [SurrogateKind; 5] =
        [SurrogateKind::BD, SurrogateKind::SlackGreedy, SurrogateKind::SlackExact, SurrogateKind::Lovasz, SurrogateKind::ZeroOne];

    pub fn name(self) -> &'static str {
        match self {
            SurrogateKind::BD => "b_d",
            SurrogateKind::SlackGreedy => "s_greedy",
            SurrogateKind::SlackExact => "s_exact",
            SurrogateKind::Lovasz => "lovasz",
            SurrogateKind::ZeroOne => "zero_one",
        }
    }

    pub fn needs_decomposition(self) -> bool {
        self == SurrogateKind::BD
    }
}

impl std::fmt::Display for SurrogateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SurrogateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "b_d" | "bd" | "b" => SurrogateKind::BD,
            "s_greedy" | "s-greedy" | "slack_greedy" | "s" => SurrogateKind::SlackGreedy,
            "s_exact" | "s-exact" | "slack_exact" => SurrogateKind::SlackExact,
            "lovasz" | "l" => SurrogateKind::Lovasz,
            "zero_one" | "0-1" | "hamming" | "hinge" => SurrogateKind::ZeroOne,
            other => return Err(Error::Config(format!("unknown surrogate {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerConfig {
    pub c: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    /// KKT tolerance of the restricted master.
    pub qp_tol: f64,
    /// Safety cap on coordinate-ascent sweeps per master solve.
    pub max_qp_sweeps: usize,
    pub kind: SurrogateKind,
    /// Largest `p` for which slack rescaling inside `B_D` enumerates exactly.
    pub exact_cap: usize,
    pub mode: WeightMode,
    pub augmented: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon: 1e-3,
            max_iter: 500,
            qp_tol: 1e-6,
            max_qp_sweeps: 100_000,
            kind: SurrogateKind::BD,
            exact_cap: EXACT_SLACK_CAP,
            mode: WeightMode::Shared,
            augmented: false,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must be positive and finite, got {v}")))
            }
        };
        positive(self.c, "C")?;
        positive(self.epsilon, "ε")?;
        positive(self.qp_tol, "QP tolerance")?;
        if self.max_iter == 0 || self.max_qp_sweeps == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        Ok(())
    }

    /// Slack-rescaling dispatch for this configuration.
    pub fn inference(&self) -> Inference {
        match self.kind {
            SurrogateKind::SlackGreedy => Inference::Greedy,
            SurrogateKind::SlackExact => Inference::Exact,
            _ => Inference::Auto(self.exact_cap),
        }
    }

    /// Human-readable dispatch decision for bags of size `p`.
    pub fn dispatch(&self, p: usize) -> &'static str {
        match self.kind {
            SurrogateKind::Lovasz | SurrogateKind::ZeroOne => "closed-form",
            _ if self.inference().is_exact_for(p) => "exact",
            _ => "greedy",
        }
    }
}

/// Everything the surrogate of one sample needs.
#[derive(Clone, Debug)]
pub struct SampleLoss<T> {
    pub loss: LossSpec<T>,
    pub decomposition: Option<Arc<Decomposition<T>>>,
}

/// Instantiates the loss of every sample and, for `B_D`, its decomposition.
/// Decompositions are shared between samples whose losses have the same
/// reduced shape.
pub fn prepare_losses<T: Scalar>(data: &[Sample<T>], family: &LossFamily, kind: SurrogateKind) -> Result<Vec<SampleLoss<T>>> {
    let mut cache: HashMap<(usize, usize), Arc<Decomposition<T>>> = HashMap::new();
    data.iter()
        .map(|s| {
            let loss = family.instantiate::<T>(&s.y)?;
            prepare_one(loss, kind, &mut cache, family.structure_key(&s.y))
        })
        .collect()
}

/// Like [`prepare_losses`] for explicitly given losses (no sharing).
pub fn prepare_explicit<T: Scalar>(losses: Vec<LossSpec<T>>, kind: SurrogateKind) -> Result<Vec<SampleLoss<T>>> {
    losses
        .into_iter()
        .map(|loss| {
            let mut cache = HashMap::new();
            prepare_one(loss, kind, &mut cache, (0, 0))
        })
        .collect()
}

fn prepare_one<T: Scalar>(
    loss: LossSpec<T>,
    kind: SurrogateKind,
    cache: &mut HashMap<(usize, usize), Arc<Decomposition<T>>>,
    key: (usize, usize),
) -> Result<SampleLoss<T>> {
    if kind == SurrogateKind::Lovasz && loss.p() <= DEFAULT_EXHAUSTIVE_CAP {
        require_submodular(&loss.set_fn)?;
    }
    let decomposition = if kind.needs_decomposition() {
        let shareable = matches!(loss.set_fn.repr(), Repr::Symmetric(_) | Repr::FpFn { .. });
        let dec = match cache.get(&key) {
            Some(d) if shareable => Arc::new(d.transplant(&loss.set_fn)?),
            _ => {
                let d = Arc::new(decompose(&loss.set_fn)?);
                if shareable {
                    cache.insert(key, d.clone());
                }
                d
            }
        };
        Some(dec)
    } else {
        None
    };
    Ok(SampleLoss { loss, decomposition })
}

/// Surrogate value at the model's scores and the affine piece attaining it.
pub fn surrogate_at<T: Scalar>(h: &[T], target: &SampleLoss<T>, kind: SurrogateKind, inference: Inference) -> Result<SurrogateResult<T>> {
    let y = &target.loss.y;
    let l = &target.loss.set_fn;
    match kind {
        SurrogateKind::BD => {
            let dec = target
                .decomposition
                .as_ref()
                .ok_or_else(|| Error::Config("B_D needs a decomposition for every sample".into()))?;
            b_surrogate(dec, y, h, inference)
        }
        SurrogateKind::SlackGreedy | SurrogateKind::SlackExact => slack_rescale(l, y, h, inference),
        SurrogateKind::Lovasz => lovasz_hinge_unchecked(l, y, h),
        SurrogateKind::ZeroOne => hinge_sum(y, h),
    }
}

/// Result of one loss-augmented inference.
#[derive(Clone, Debug)]
pub struct AugmentedPlane<T> {
    /// Plane in weight space, tight at the current `w`.
    pub plane: CuttingPlane<T>,
    /// Surrogate value `H(ŷ)` at the current `w`.
    pub value: T,
    /// `H(ŷ) − ξ_i`.
    pub violation: T,
    pub provenance: Provenance,
}

pub fn loss_augmented_inference<T: Scalar>(
    model: &LinearModel<T>,
    sample: &Sample<T>,
    target: &SampleLoss<T>,
    kind: SurrogateKind,
    inference: Inference,
    xi: &T,
) -> Result<AugmentedPlane<T>> {
    let h = model.scores(&sample.x)?;
    let res = surrogate_at(&h, target, kind, inference)?;
    let plane = res.plane.to_weights(model, &sample.x)?;
    Ok(AugmentedPlane { violation: res.value.clone() - xi.clone(), value: res.value, plane, provenance: res.provenance })
}

/// Per-sample cutting planes and their dual variables.
#[derive(Clone, Debug)]
pub struct WorkingSet<T> {
    planes: Vec<Vec<CuttingPlane<T>>>,
    alpha: Vec<Vec<T>>,
    norms: Vec<Vec<T>>,
    dim: usize,
}

impl<T: Scalar> WorkingSet<T> {
    pub fn new(n: usize, dim: usize) -> Self {
        Self { planes: vec![Vec::new(); n], alpha: vec![Vec::new(); n], norms: vec![Vec::new(); n], dim }
    }

    pub fn num_samples(&self) -> usize {
        self.planes.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add(&mut self, i: usize, plane: CuttingPlane<T>) -> Result<()> {
        if plane.gradient.len() != self.dim {
            return Err(Error::LengthMismatch { expected: self.dim, got: plane.gradient.len() });
        }
        self.norms[i].push(dot(&plane.gradient, &plane.gradient));
        self.planes[i].push(plane);
        self.alpha[i].push(T::zero());
        Ok(())
    }

    pub fn planes(&self, i: usize) -> &[CuttingPlane<T>] {
        &self.planes[i]
    }

    pub fn alpha(&self, i: usize) -> &[T] {
        &self.alpha[i]
    }

    pub fn total_planes(&self) -> usize {
        self.planes.iter().map(Vec::len).sum()
    }

    /// `w = −Σ α_k a_k`.
    pub fn weights(&self) -> Vec<T> {
        let mut w = vec![T::zero(); self.dim];
        for (planes, alpha) in self.planes.iter().zip(&self.alpha) {
            for (pl, a) in planes.iter().zip(alpha) {
                if a.is_zero() {
                    continue;
                }
                for (wk, gk) in w.iter_mut().zip(&pl.gradient) {
                    *wk = wk.clone() - a.clone() * gk.clone();
                }
            }
        }
        w
    }

    /// `ξ_i = max(0, max_k plane_k(w))`.
    pub fn xi(&self, i: usize, w: &[T]) -> T {
        self.planes[i].iter().fold(T::zero(), |acc, pl| T::max_of(acc, pl.eval(w)))
    }

    /// Dual objective `Σ α_k b_k − ½‖w‖²` with `w` recomputed from `α`.
    pub fn dual_objective(&self) -> T {
        let w = self.weights();
        let lin = self
            .planes
            .iter()
            .zip(&self.alpha)
            .flat_map(|(ps, al)| ps.iter().zip(al))
            .fold(T::zero(), |acc, (pl, a)| acc + a.clone() * pl.offset.clone());
        lin - dot(&w, &w) / (T::one() + T::one())
    }

    /// `α ≥ 0` and `Σ_{k∈S^i} α_k ≤ C` (within `tol`).
    pub fn is_dual_feasible(&self, c: &T, tol: &T) -> bool {
        self.alpha.iter().all(|al| {
            al.iter().all(|a| *a >= -tol.clone())
                && al.iter().fold(T::zero(), |s, a| s + a.clone()) <= c.clone() + tol.clone()
        })
    }
}

/// Solution of the restricted master.
#[derive(Clone, Debug)]
pub struct QpSolution<T> {
    pub w: Vec<T>,
    pub xi: Vec<T>,
    pub dual_objective: T,
    /// Largest KKT violation over all samples at return.
    pub kkt_violation: T,
    pub sweeps: usize,
}

fn two<T: Scalar>() -> T {
    T::one() + T::one()
}

/// KKT violation of one sample's block given plane values `v` and budget `C`.
fn block_violation<T: Scalar>(v: &[T], alpha: &[T], c: &T, tol: &T) -> T {
    if v.is_empty() {
        return T::zero();
    }
    let sum = alpha.iter().fold(T::zero(), |s, a| s + a.clone());
    let vmax = v.iter().cloned().fold(v[0].clone(), T::max_of);
    let mut worst = T::zero();
    if sum.clone() < c.clone() - tol.clone() {
        // Budget slack: ξ = 0, so every plane must be ≤ 0 and active ones = 0.
        worst = T::max_of(worst, vmax.positive_part());
        for (vk, a) in v.iter().zip(alpha) {
            if *a > T::zero() {
                worst = T::max_of(worst, -vk.clone());
            }
        }
    } else {
        // Budget spent: active planes must attain the (non-negative) maximum.
        worst = T::max_of(worst, (-vmax.clone()).positive_part());
        for (vk, a) in v.iter().zip(alpha) {
            if *a > T::zero() {
                worst = T::max_of(worst, vmax.clone() - vk.clone());
            }
        }
    }
    worst
}

/// Solves the restricted master by dual coordinate ascent, warm-started from
/// the current `α`. Each step is an exact line search either on one `α_k`
/// (within `[0, C − Σ_{others}]`) or on a pair `(α_up, α_down)` of the same
/// sample that keeps their sum fixed.
pub fn solve_restricted_qp<T: Scalar>(ws: &mut WorkingSet<T>, c: &T, tol: &T, max_sweeps: usize) -> QpSolution<T> {
    let mut w = ws.weights();
    let tiny = T::pivot_tolerance();
    let mut sweeps = 0;
    let mut kkt = T::zero();
    while sweeps < max_sweeps {
        sweeps += 1;
        for i in 0..ws.planes.len() {
            let k_count = ws.planes[i].len();
            if k_count == 0 {
                continue;
            }
            // A bounded number of greedy steps per block before moving on.
            for _ in 0..(4 * k_count + 4) {
                let v: Vec<T> = ws.planes[i].iter().map(|pl| pl.eval(&w)).collect();
                let viol = block_violation(&v, &ws.alpha[i], c, &T::zero());
                if viol <= tol.clone() / two() {
                    break;
                }
                let sum = ws.alpha[i].iter().fold(T::zero(), |s, a| s + a.clone());
                let room = T::max_of(T::zero(), c.clone() - sum);
                let up = (0..k_count).fold(0, |b, k| if v[k] > v[b] { k } else { b });
                let down = (0..k_count)
                    .filter(|&k| ws.alpha[i][k] > T::zero())
                    .fold(None, |b: Option<usize>, k| match b {
                        Some(bb) if v[bb] <= v[k] => Some(bb),
                        _ => Some(k),
                    });
                // Candidate steps: (gain, action).
                let mut best: Option<(T, Step<T>)> = None;
                let mut consider = |gain: T, step: Step<T>| {
                    if gain > T::zero() && best.as_ref().is_none_or(|(g, _)| gain > *g) {
                        best = Some((gain, step));
                    }
                };
                if v[up] > T::zero() && room > T::zero() {
                    let t = line_step(&v[up], &ws.norms[i][up], &room, &tiny);
                    consider(t.clone() * v[up].clone() - t.clone() * t.clone() * ws.norms[i][up].clone() / two(), Step::Single(up, t));
                }
                if let Some(dn) = down {
                    if v[dn] < T::zero() {
                        let t = line_step(&(-v[dn].clone()), &ws.norms[i][dn], &ws.alpha[i][dn], &tiny);
                        consider(
                            -t.clone() * v[dn].clone() - t.clone() * t.clone() * ws.norms[i][dn].clone() / two(),
                            Step::Single(dn, -t),
                        );
                    }
                    if dn != up && v[up] > v[dn] {
                        let diff: Vec<T> = ws.planes[i][up]
                            .gradient
                            .iter()
                            .zip(&ws.planes[i][dn].gradient)
                            .map(|(a, b)| a.clone() - b.clone())
                            .collect();
                        let curv = dot(&diff, &diff);
                        let slope = v[up].clone() - v[dn].clone();
                        let t = line_step(&slope, &curv, &ws.alpha[i][dn], &tiny);
                        consider(t.clone() * slope - t.clone() * t.clone() * curv / two(), Step::Pair(up, dn, t));
                    }
                }
                let Some((_, step)) = best else { break };
                match step {
                    Step::Single(k, t) => {
                        let new = T::max_of(T::zero(), ws.alpha[i][k].clone() + t.clone());
                        let t = new.clone() - ws.alpha[i][k].clone();
                        ws.alpha[i][k] = new;
                        axpy(&mut w, &(-t), &ws.planes[i][k].gradient);
                    }
                    Step::Pair(u, d, t) => {
                        let t = T::min_of(t, ws.alpha[i][d].clone());
                        ws.alpha[i][u] = ws.alpha[i][u].clone() + t.clone();
                        ws.alpha[i][d] = T::max_of(T::zero(), ws.alpha[i][d].clone() - t.clone());
                        let (gu, gd) = (ws.planes[i][u].gradient.clone(), &ws.planes[i][d].gradient);
                        axpy(&mut w, &(-t.clone()), &gu);
                        axpy(&mut w, &t, gd);
                    }
                }
            }
        }
        // Later blocks move w, so the optimality test runs on the final w of
        // the sweep, recomputed from α to drop accumulated rounding.
        w = ws.weights();
        kkt = (0..ws.planes.len())
            .map(|i| {
                let v: Vec<T> = ws.planes[i].iter().map(|pl| pl.eval(&w)).collect();
                block_violation(&v, &ws.alpha[i], c, &T::zero())
            })
            .fold(T::zero(), T::max_of);
        if kkt <= tol.clone() {
            break;
        }
    }
    let w = ws.weights();
    let xi = (0..ws.planes.len()).map(|i| ws.xi(i, &w)).collect();
    QpSolution { dual_objective: ws.dual_objective(), w, xi, kkt_violation: kkt, sweeps }
}

enum Step<T> {
    Single(usize, T),
    Pair(usize, usize, T),
}

/// Maximiser of `t·slope − ½t²·curv` over `[0, bound]` (`slope > 0`).
fn line_step<T: Scalar>(slope: &T, curv: &T, bound: &T, tiny: &T) -> T {
    if *curv <= tiny.clone() {
        return bound.clone();
    }
    T::min_of(slope.clone() / curv.clone(), bound.clone())
}

fn axpy<T: Scalar>(w: &mut [T], a: &T, x: &[T]) {
    for (wk, xk) in w.iter_mut().zip(x) {
        *wk = wk.clone() + a.clone() * xk.clone();
    }
}

/// One row of the training trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub master_obj: f64,
    pub primal_obj: f64,
    pub gap: f64,
    /// Largest `H(ŷ) − ξ_i` seen during the sweep.
    pub max_violation: f64,
    /// Sum over samples of `max(0, H(ŷ) − ξ_i)` during the sweep.
    pub sum_violation: f64,
    pub planes: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TrainTrace {
    pub rows: Vec<TraceRow>,
    /// The iteration cap was reached before a sweep added no planes.
    pub truncated: bool,
    /// Slack dispatch decision per distinct bag size.
    pub dispatch: Vec<(usize, String)>,
}

impl TrainTrace {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// First iteration whose sweep found no violation above `eps`.
    pub fn iterations_to(&self, eps: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.max_violation <= eps).map(|r| r.iter)
    }
}

/// Output of a training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub model: LinearModel<T>,
    pub trace: TrainTrace,
    pub working_set: WorkingSet<T>,
}

/// Sandwich of the regularised risk at the current weights.
#[derive(Clone, Debug, PartialEq)]
pub struct GapReport<T> {
    pub primal: T,
    pub master: T,
    pub gap: T,
}

/// `[½‖w‖² + C Σ max(0, H_i(w))] − master`.
///
/// `H_i` is the surrogate value found by loss-augmented inference, raised to
/// the best working-set plane when the inference routine (greedy) returns
/// less: every stored plane is a minorant, so this is still a lower estimate of
/// the true surrogate, and it keeps the estimate above the master.
pub fn primal_dual_gap<T: Scalar>(
    model: &LinearModel<T>,
    ws: &WorkingSet<T>,
    data: &[Sample<T>],
    targets: &[SampleLoss<T>],
    cfg: &TrainerConfig,
) -> Result<GapReport<T>> {
    let c = T::from_f64(cfg.c).ok_or_else(|| Error::Config("C is not representable".into()))?;
    let inference = cfg.inference();
    let mut risk = T::zero();
    for (i, (s, t)) in data.iter().zip(targets).enumerate() {
        let h = model.scores(&s.x)?;
        let value = surrogate_at(&h, t, cfg.kind, inference)?.value;
        let value = T::max_of(value, ws.xi(i, &model.w));
        risk = risk + value.positive_part();
    }
    let primal = model.norm_sq() / two() + c * risk;
    let master = ws.dual_objective();
    Ok(GapReport { gap: primal.clone() - master.clone(), primal, master })
}

fn check_data<T: Scalar>(data: &[Sample<T>], targets: &[SampleLoss<T>], cfg: &TrainerConfig) -> Result<(usize, Option<usize>)> {
    if data.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    if targets.len() != data.len() {
        return Err(Error::LengthMismatch { expected: data.len(), got: targets.len() });
    }
    for (s, t) in data.iter().zip(targets) {
        s.validate()?;
        if s.y != t.loss.y {
            return Err(Error::Config(format!("loss for bag {:?} was built for different labels", s.bag_id)));
        }
    }
    let d = data[0].dim();
    if let Some(s) = data.iter().find(|s| s.dim() != d) {
        return Err(Error::Dimension(format!("bag {:?} has feature dimension {} instead of {d}", s.bag_id, s.dim())));
    }
    let p0 = data[0].p();
    let fixed = data.iter().all(|s| s.p() == p0);
    if cfg.mode == WeightMode::PerPosition && !fixed {
        return Err(Error::Config("per-position weights need every bag to have the same size; use shared mode".into()));
    }
    Ok((d, fixed.then_some(p0)))
}

/// Cutting-plane training with a loss family instantiated per sample.
pub fn train_cutting_plane<T: Scalar>(data: &[Sample<T>], family: &LossFamily, cfg: &TrainerConfig) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    let targets = prepare_losses(data, family, cfg.kind)?;
    train_with_losses(data, &targets, cfg)
}

/// Cutting-plane training with prepared per-sample losses.
///
/// Sweeps the samples in order. A sample whose loss-augmented plane is
/// violated by more than `ε` gets the plane added, after which the master is
/// re-solved. Stops after a sweep that adds nothing, or at `max_iter` sweeps
/// (then `trace.truncated` is set and the weights with the lowest primal
/// objective seen are returned).
pub fn train_with_losses<T: Scalar>(data: &[Sample<T>], targets: &[SampleLoss<T>], cfg: &TrainerConfig) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    let (d, fixed_p) = check_data(data, targets, cfg)?;
    let conv = |v: f64, what: &str| T::from_f64(v).ok_or_else(|| Error::Config(format!("{what} is not representable")));
    let c = conv(cfg.c, "C")?;
    let eps = conv(cfg.epsilon, "ε")?;
    let qp_tol = conv(cfg.qp_tol, "QP tolerance")?;
    let inference = cfg.inference();

    let mut model = LinearModel::zeros(cfg.mode, d, fixed_p, cfg.augmented)?;
    let mut ws = WorkingSet::new(data.len(), model.num_weights());
    let mut trace = TrainTrace::default();
    let mut sizes: Vec<usize> = data.iter().map(Sample::p).collect();
    sizes.sort_unstable();
    sizes.dedup();
    trace.dispatch = sizes.into_iter().map(|p| (p, cfg.dispatch(p).to_string())).collect();

    let start = Instant::now();
    let mut best: Option<(T, Vec<T>)> = None;
    let mut converged = false;
    for iter in 1..=cfg.max_iter {
        let mut added = 0usize;
        let mut max_violation: Option<T> = None;
        let mut sum_violation = T::zero();
        for (i, (s, t)) in data.iter().zip(targets).enumerate() {
            let xi = ws.xi(i, &model.w);
            let aug = loss_augmented_inference(&model, s, t, cfg.kind, inference, &xi)?;
            sum_violation = sum_violation + aug.violation.clone().positive_part();
            max_violation = Some(match max_violation {
                Some(m) => T::max_of(m, aug.violation.clone()),
                None => aug.violation.clone(),
            });
            if aug.violation > eps {
                ws.add(i, aug.plane)?;
                added += 1;
                let sol = solve_restricted_qp(&mut ws, &c, &qp_tol, cfg.max_qp_sweeps);
                model.w = sol.w;
            }
        }
        let gap = primal_dual_gap(&model, &ws, data, targets, cfg)?;
        trace.rows.push(TraceRow {
            iter,
            master_obj: gap.master.to_f64_lossy(),
            primal_obj: gap.primal.to_f64_lossy(),
            gap: gap.gap.to_f64_lossy(),
            max_violation: max_violation.map_or(0.0, |v| v.to_f64_lossy()),
            sum_violation: sum_violation.to_f64_lossy(),
            planes: ws.total_planes(),
            seconds: start.elapsed().as_secs_f64(),
        });
        if best.as_ref().is_none_or(|(p, _)| gap.primal < *p) {
            best = Some((gap.primal, model.w.clone()));
        }
        if added == 0 {
            converged = true;
            break;
        }
    }
    if !converged {
        trace.truncated = true;
        if let Some((_, w)) = best {
            model.w = w;
        }
    }
    Ok(TrainOutcome { model, trace, working_set: ws })
}

/// Elementwise sign of the model's scores (`sign(0) = +1`).
pub fn predict<T: Scalar>(model: &LinearModel<T>, x: &[Vec<T>]) -> Result<Vec<crate::setfn::Label>> {
    model.predict(x)
}

/// Mean and standard error of a loss over a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub loss: String,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Mean and standard error from a list of values (`stderr = sd / √n` with
/// the `n − 1` sample deviation; `0` for a single value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Evaluates predictions under each loss family.
pub fn evaluate<T: Scalar>(model: &LinearModel<T>, data: &[Sample<T>], losses: &[LossFamily]) -> Result<Vec<LossSummary>> {
    let preds = data.iter().map(|s| model.predict(&s.x)).collect::<Result<Vec<_>>>()?;
    losses
        .iter()
        .map(|fam| {
            let values = data
                .iter()
                .zip(&preds)
                .map(|(s, yp)| Ok(fam.instantiate::<T>(&s.y)?.eval(yp)?.to_f64_lossy()))
                .collect::<Result<Vec<f64>>>()?;
            let (mean, stderr) = mean_stderr(&values);
            Ok(LossSummary { loss: fam.name(), mean, stderr, n: values.len() })
        })
        .collect()
}
