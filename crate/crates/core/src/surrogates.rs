//! Convex surrogates of set-function losses in score space.
//!
//! For a bag with labels `y` and scores `h`, every surrogate here is a
//! maximum of affine functions of `h`. Each evaluation returns the value and
//! the maximising affine piece as a [`ScorePlane`]; since `h` is linear in the
//! model weights, [`ScorePlane::to_weights`] turns that piece into a cutting
//! plane in weight space.
//!
//! * Lovász hinge: `(max_π Σ_j s^{π_j} [f(π_1..π_j) - f(π_1..π_{j-1})])_+`
//!   with margins `s^j = 1 - h^j y^j`; for submodular `f` the max is attained
//!   by sorting `s` in decreasing order.
//! * Slack rescaling: `max_ỹ Δ(y, ỹ) (1 + <h, ỹ> - <h, y>)`, exactly by
//!   enumeration or approximately by greedy bit flips.
//! * The combined surrogate: Lovász hinge of the submodular part plus slack
//!   rescaling of the supermodular part of the canonical decomposition.

use serde::{Deserialize, Serialize};

use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::model::LinearModel;
use crate::scalar::Scalar;
use crate::setfn::{check_structure, Label, Property, SetFunction, Subset, Witness};

/// Largest `p` for exact slack-rescaling enumeration.
pub const EXACT_SLACK_CAP: usize = 20;

/// Largest `p` for which debug builds verify submodularity before a Lovász hinge.
pub const DEBUG_CHECK_CAP: usize = 10;

/// `s^j = 1 - h^j y^j`.
pub fn margins<T: Scalar>(y: &[Label], h: &[T]) -> Result<Vec<T>> {
    if y.len() != h.len() {
        return Err(Error::LengthMismatch { expected: y.len(), got: h.len() });
    }
    Ok(y.iter().zip(h).map(|(&yj, hj)| T::one() - hj.clone() * label(yj)).collect())
}

fn label<T: Scalar>(y: Label) -> T {
    if y > 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Which affine piece produced a value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// The surrogate was clamped at zero.
    Zero,
    Lovasz { order: Vec<usize> },
    /// Slack rescaling at the labelling whose mistake set is `mistakes`.
    Slack { mistakes: u128 },
    /// Sum of per-element hinges over the `active` positions.
    Hinge { active: u128 },
    Combined { lovasz: Box<Provenance>, slack: Box<Provenance> },
}

/// `h ↦ offset + Σ_j slope_j h^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScorePlane<T> {
    pub offset: T,
    pub slope: Vec<T>,
}

impl<T: Scalar> ScorePlane<T> {
    pub fn zero(p: usize) -> Self {
        Self { offset: T::zero(), slope: vec![T::zero(); p] }
    }

    pub fn eval(&self, h: &[T]) -> T {
        self.slope
            .iter()
            .zip(h)
            .fold(self.offset.clone(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            offset: self.offset.clone() + other.offset.clone(),
            slope: self.slope.iter().zip(&other.slope).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    /// The same affine function expressed in the model's weight space.
    pub fn to_weights(&self, model: &LinearModel<T>, x: &[Vec<T>]) -> Result<CuttingPlane<T>> {
        Ok(CuttingPlane { offset: self.offset.clone(), gradient: model.scatter(x, &self.slope)? })
    }
}

/// Affine minorant `w ↦ offset + <gradient, w>` of a surrogate.
#[derive(Clone, Debug, PartialEq)]
pub struct CuttingPlane<T> {
    pub offset: T,
    pub gradient: Vec<T>,
}

impl<T: Scalar> CuttingPlane<T> {
    pub fn eval(&self, w: &[T]) -> T {
        self.gradient
            .iter()
            .zip(w)
            .fold(self.offset.clone(), |acc, (a, b)| acc + a.clone() * b.clone())
    }
}

#[derive(Clone, Debug)]
pub struct SurrogateResult<T> {
    pub value: T,
    pub plane: ScorePlane<T>,
    pub provenance: Provenance,
}

impl<T: Scalar> SurrogateResult<T> {
    fn zero(p: usize) -> Self {
        Self { value: T::zero(), plane: ScorePlane::zero(p), provenance: Provenance::Zero }
    }

    /// `∂ value / ∂ h` of the selected piece.
    pub fn score_gradient(&self) -> &[T] {
        &self.plane.slope
    }
}

fn check_ground<T: Scalar>(f: &SetFunction<T>, y: &[Label], h: &[T]) -> Result<()> {
    if f.p() != y.len() {
        return Err(Error::LengthMismatch { expected: f.p(), got: y.len() });
    }
    if h.len() != y.len() {
        return Err(Error::LengthMismatch { expected: y.len(), got: h.len() });
    }
    Ok(())
}

/// Indices sorted by decreasing margin, ties by increasing index.
pub fn lovasz_order<T: Scalar>(s: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    order
}

/// Lovász hinge of a submodular `f`. Debug builds verify submodularity for
/// `p <= DEBUG_CHECK_CAP` and report a witness on failure.
pub fn lovasz_hinge<T: Scalar>(f: &SetFunction<T>, y: &[Label], h: &[T]) -> Result<SurrogateResult<T>> {
    if cfg!(debug_assertions) && f.p() <= DEBUG_CHECK_CAP {
        require_submodular(f)?;
    }
    lovasz_hinge_unchecked(f, y, h)
}

/// Errors with a witness unless `f` passes the exhaustive submodularity check.
pub fn require_submodular<T: Scalar>(f: &SetFunction<T>) -> Result<()> {
    let report = check_structure(f, &T::tolerance(), crate::setfn::DEFAULT_EXHAUSTIVE_CAP)?;
    if let Some(Witness::Exchange { set, i, j, gap, .. }) = report.witness_for(Property::Submodular) {
        return Err(Error::NotSubmodular { set: *set, i: *i, j: *j, violation: -gap });
    }
    Ok(())
}

/// Lovász hinge without the structural check (caller guarantees submodularity).
pub fn lovasz_hinge_unchecked<T: Scalar>(f: &SetFunction<T>, y: &[Label], h: &[T]) -> Result<SurrogateResult<T>> {
    check_ground(f, y, h)?;
    let s = margins(y, h)?;
    let order = lovasz_order(&s);
    Ok(lovasz_along(f, y, &s, order))
}

/// The Lovász sum for a fixed permutation, clamped at zero.
pub fn lovasz_along<T: Scalar>(f: &SetFunction<T>, y: &[Label], s: &[T], order: Vec<usize>) -> SurrogateResult<T> {
    let p = y.len();
    let mut prefix = Subset::EMPTY;
    let mut prev = T::zero();
    let mut value = T::zero();
    let mut slope = vec![T::zero(); p];
    for &j in &order {
        prefix = prefix.with(j);
        let cur = f.eval(prefix);
        let gain = cur.clone() - prev;
        value = value + gain.clone() * s[j].clone();
        slope[j] = -gain * label::<T>(y[j]);
        prev = cur;
    }
    if value <= T::zero() {
        return SurrogateResult::zero(p);
    }
    // Gains telescope, so the offset is f(V).
    SurrogateResult { value, plane: ScorePlane { offset: prev, slope }, provenance: Provenance::Lovasz { order } }
}

/// Per-element cost `<h, ỹ> - <h, y>` contribution of flipping `j`: `-2 h^j y^j`.
fn flip_costs<T: Scalar>(y: &[Label], h: &[T]) -> Vec<T> {
    y.iter()
        .zip(h)
        .map(|(&yj, hj)| -(T::one() + T::one()) * hj.clone() * label(yj))
        .collect()
}

fn slack_piece<T: Scalar>(g: &SetFunction<T>, y: &[Label], a: Subset, value: T) -> SurrogateResult<T> {
    let p = y.len();
    if value <= T::zero() {
        return SurrogateResult::zero(p);
    }
    let ga = g.eval(a);
    let two = T::one() + T::one();
    let mut slope = vec![T::zero(); p];
    for j in a.iter() {
        slope[j] = -(two.clone() * ga.clone() * label::<T>(y[j]));
    }
    SurrogateResult { value, plane: ScorePlane { offset: ga, slope }, provenance: Provenance::Slack { mistakes: a.bits() } }
}

/// `Δ(A) (1 + Σ_{j∈A} cost_j)` for a mistake set `A`.
fn slack_objective<T: Scalar>(g: &SetFunction<T>, costs: &[T], a: Subset) -> T {
    let margin = a.iter().fold(T::one(), |acc, j| acc + costs[j].clone());
    g.eval(a) * margin
}

/// Slack rescaling by enumeration of all `2^p` labellings (Gray-code order).
pub fn slack_rescale_exact<T: Scalar>(g: &SetFunction<T>, y: &[Label], h: &[T]) -> Result<SurrogateResult<T>> {
    check_ground(g, y, h)?;
    let p = y.len();
    g.ground().require_exhaustive(EXACT_SLACK_CAP)?;
    let costs = flip_costs(y, h);
    let mut a = Subset::EMPTY;
    let mut margin = T::one();
    let mut best = (T::zero(), Subset::EMPTY);
    for step in 1u64..(1u64 << p) {
        let j = step.trailing_zeros() as usize;
        if a.contains(j) {
            margin = margin - costs[j].clone();
        } else {
            margin = margin + costs[j].clone();
        }
        a = a.toggled(j);
        let v = g.eval(a) * margin.clone();
        if v > best.0 {
            best = (v, a);
        }
    }
    Ok(slack_piece(g, y, best.1, best.0))
}

/// Best-improvement single-flip ascent from `start`, at most `p` passes.
fn greedy_from<T: Scalar>(g: &SetFunction<T>, costs: &[T], start: Subset) -> (T, Subset) {
    let p = costs.len();
    let mut a = start;
    let mut current = slack_objective(g, costs, a);
    for _ in 0..p {
        let mut best: Option<(T, Subset)> = None;
        for j in 0..p {
            let cand = a.toggled(j);
            let v = slack_objective(g, costs, cand);
            if v > current && best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                best = Some((v, cand));
            }
        }
        match best {
            Some((v, cand)) => {
                current = v;
                a = cand;
            }
            None => break,
        }
    }
    (current, a)
}

/// Greedy slack rescaling: ascent from `ỹ = y` and from `ỹ = -y`, keeping the
/// better local maximum. Never exceeds the exact value.
pub fn slack_rescale_greedy<T: Scalar>(g: &SetFunction<T>, y: &[Label], h: &[T]) -> Result<SurrogateResult<T>> {
    check_ground(g, y, h)?;
    let costs = flip_costs(y, h);
    let (v0, a0) = greedy_from(g, &costs, Subset::EMPTY);
    let (v1, a1) = greedy_from(g, &costs, Subset::full(y.len()));
    let (v, a) = if v1 > v0 { (v1, a1) } else { (v0, a0) };
    Ok(slack_piece(g, y, a, v))
}

/// How the slack-rescaling maximisation is carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inference {
    Exact,
    Greedy,
    /// Exact up to the given `p`, greedy above.
    Auto(usize),
}

impl Default for Inference {
    fn default() -> Self {
        Inference::Auto(EXACT_SLACK_CAP)
    }
}

impl Inference {
    pub fn is_exact_for(&self, p: usize) -> bool {
        match *self {
            Inference::Exact => true,
            Inference::Greedy => false,
            Inference::Auto(cap) => p <= cap,
        }
    }
}

pub fn slack_rescale<T: Scalar>(g: &SetFunction<T>, y: &[Label], h: &[T], inference: Inference) -> Result<SurrogateResult<T>> {
    if inference.is_exact_for(y.len()) {
        slack_rescale_exact(g, y, h)
    } else {
        slack_rescale_greedy(g, y, h)
    }
}

/// Lovász hinge on `f*` plus slack rescaling on `g*`.
pub fn b_surrogate<T: Scalar>(
    dec: &Decomposition<T>,
    y: &[Label],
    h: &[T],
    inference: Inference,
) -> Result<SurrogateResult<T>> {
    let lov = lovasz_hinge_unchecked(&dec.f_star, y, h)?;
    let slack = slack_rescale(&dec.g_star, y, h, inference)?;
    Ok(SurrogateResult {
        value: lov.value + slack.value,
        plane: lov.plane.add(&slack.plane),
        provenance: Provenance::Combined { lovasz: Box::new(lov.provenance), slack: Box::new(slack.provenance) },
    })
}

/// Sum of independent per-element hinges `Σ_j (1 - h^j y^j)_+` (a linear SVM on
/// every position).
pub fn hinge_sum<T: Scalar>(y: &[Label], h: &[T]) -> Result<SurrogateResult<T>> {
    let s = margins(y, h)?;
    let p = y.len();
    let mut active = Subset::EMPTY;
    let mut value = T::zero();
    let mut slope = vec![T::zero(); p];
    for j in 0..p {
        if s[j] > T::zero() {
            active = active.with(j);
            value = value + s[j].clone();
            slope[j] = -label::<T>(y[j]);
        }
    }
    if active.is_empty() {
        return Ok(SurrogateResult::zero(p));
    }
    Ok(SurrogateResult {
        value,
        plane: ScorePlane { offset: T::from_usize_exact(active.len()), slope },
        provenance: Provenance::Hinge { active: active.bits() },
    })
}

/// Scores placing the margins at the cube vertex `u`: `h^j y^j = 1 - u^j`.
pub fn vertex_scores<T: Scalar>(y: &[Label], u: Subset) -> Vec<T> {
    y.iter()
        .enumerate()
        .map(|(j, &yj)| if u.contains(j) { T::zero() } else { label(yj) })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub vertices: usize,
    pub max_gap: f64,
    /// Vertices (as bitmasks of `u`) where the gap exceeds the tolerance.
    pub failing: Vec<u128>,
}

impl ExtensionReport {
    pub fn holds(&self) -> bool {
        self.failing.is_empty()
    }
}

/// Compares `surrogate(h(u))` with `l(u)` on every vertex `u ∈ {0,1}^p`.
pub fn extension_check<T, F>(surrogate: F, l: &SetFunction<T>, y: &[Label], tol: f64) -> Result<ExtensionReport>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<T>,
{
    l.ground().require_exhaustive(crate::setfn::DEFAULT_EXHAUSTIVE_CAP)?;
    if y.len() != l.p() {
        return Err(Error::LengthMismatch { expected: l.p(), got: y.len() });
    }
    let mut max_gap = 0.0f64;
    let mut failing = Vec::new();
    let mut vertices = 0;
    for u in l.ground().subsets() {
        vertices += 1;
        let h = vertex_scores::<T>(y, u);
        let gap = (surrogate(&h)? - l.eval(u)).abs().to_f64_lossy();
        max_gap = max_gap.max(gap);
        if gap > tol {
            failing.push(u.bits());
        }
    }
    Ok(ExtensionReport { vertices, max_gap, failing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::SetFunction;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn lovasz_examples() {
        let f = SetFunction::modular(vec![1.0, 1.0]).unwrap();
        let r = lovasz_hinge(&f, &[1, 1], &[0.5, -0.5]).unwrap();
        assert!(close(r.value, 2.0));

        let f = SetFunction::symmetric(vec![0.0, 1.0, 1.0]).unwrap();
        let r = lovasz_hinge(&f, &[1, 1], &[-1.0, -2.0]).unwrap();
        assert!(close(r.value, 3.0));
        assert_eq!(r.provenance, Provenance::Lovasz { order: vec![1, 0] });
        assert!(close(r.plane.eval(&[-1.0, -2.0]), 3.0));

        let r = lovasz_hinge(&f, &[1, -1], &[1.0, -1.0]).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.provenance, Provenance::Zero);
        assert_eq!(r.plane, ScorePlane::zero(2));
    }

    #[test]
    fn lovasz_rejects_non_submodular_in_debug() {
        let f = SetFunction::symmetric(vec![0.0, 1.0, 3.0, 6.0]).unwrap();
        let r = lovasz_hinge(&f, &[1, 1, 1], &[0.0, 0.0, 0.0]);
        if cfg!(debug_assertions) {
            assert!(matches!(r, Err(Error::NotSubmodular { .. })));
        }
    }

    #[test]
    fn slack_exact_examples() {
        let hamming = SetFunction::modular(vec![1.0, 1.0]).unwrap();
        let r = slack_rescale_exact(&hamming, &[1, 1], &[0.0, 0.0]).unwrap();
        assert!(close(r.value, 2.0));
        assert_eq!(r.provenance, Provenance::Slack { mistakes: 0b11 });

        let g = SetFunction::symmetric(vec![0.0, 0.0, 2.0]).unwrap();
        let r = slack_rescale_exact(&g, &[1, 1], &[1.0, 1.0]).unwrap();
        assert_eq!(r.value, 0.0);

        let zero = SetFunction::<f64>::zero(3).unwrap();
        let r = slack_rescale_exact(&zero, &[1, -1, 1], &[0.2, 0.1, -3.0]).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.plane, ScorePlane::zero(3));
    }

    #[test]
    fn slack_greedy_examples() {
        let hamming = SetFunction::modular(vec![1.0, 1.0]).unwrap();
        let r = slack_rescale_greedy(&hamming, &[1, 1], &[0.0, 0.0]).unwrap();
        assert!(close(r.value, 2.0));

        let g = SetFunction::symmetric(vec![0.0, 0.0, 2.0]).unwrap();
        let r = slack_rescale_greedy(&g, &[1, 1], &[-1.0, -1.0]).unwrap();
        // start -y gives 2 * (1 + 4) = 10, start y is stuck at 0
        assert!(close(r.value, 10.0));
    }

    #[test]
    fn exact_cap() {
        let g = SetFunction::<f64>::zero(21).unwrap();
        assert!(matches!(slack_rescale_exact(&g, &[1; 21], &[0.0; 21]), Err(Error::AboveCap { .. })));
        assert!(slack_rescale_greedy(&g, &[1; 21], &[0.0; 21]).is_ok());
    }

    #[test]
    fn hinge_sum_is_svm() {
        let r = hinge_sum(&[1, -1, 1], &[0.5, 0.5, 2.0]).unwrap();
        assert!(close(r.value, 0.5 + 1.5));
        assert!(close(r.plane.eval(&[0.5, 0.5, 2.0]), r.value));
        assert_eq!(r.provenance, Provenance::Hinge { active: 0b011 });
    }

    #[test]
    fn zero_vertex_is_zero() {
        let f = SetFunction::symmetric(vec![0.0, 1.0, 1.5]).unwrap();
        let h = vertex_scores::<f64>(&[1, -1], Subset::EMPTY);
        assert_eq!(lovasz_hinge(&f, &[1, -1], &h).unwrap().value, 0.0);
    }
}
