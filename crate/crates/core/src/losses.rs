//! Concrete losses as set functions over the mistake set.
//!
//! * Sørensen–Dice `1 - 2|y ∩ ỹ| / (|y| + |ỹ|)`, which depends on the mistake
//!   set only through the false-negative and false-positive counts.
//! * The four track losses `Δ1..Δ4` used for variable-length bags.
//! * Hamming `|A|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::setfn::{mistake_set, positive_set, Label, SetFunction, Subset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    /// Divide by the bag size `p`.
    #[default]
    ByTrackLength,
}

/// How the piecewise formulas for `Δ1` / `Δ2` are read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaReading {
    /// `min(|I|, p/3, |I| - p/3)` taken literally (negative before clamping).
    Verbatim,
    /// The middle value of the three terms: rises as `|I|`, plateaus at `p/3`,
    /// then rises as `|I| - p/3`.
    #[default]
    Median,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    pub alpha: Option<f64>,
    pub normalization: Normalization,
    pub clamp_at_zero: bool,
}

/// A loss for one ground truth `y`: `Δ(y, ỹ) = l({i | y^i ≠ ỹ^i})`.
#[derive(Clone, Debug)]
pub struct LossSpec<T> {
    pub name: String,
    pub y: Vec<Label>,
    pub set_fn: SetFunction<T>,
    pub params: LossParams,
}

impl<T: Scalar> LossSpec<T> {
    pub fn eval(&self, y_pred: &[Label]) -> Result<T> {
        Ok(self.set_fn.eval(mistake_set(&self.y, y_pred)?))
    }

    pub fn p(&self) -> usize {
        self.y.len()
    }
}

/// A loss family, instantiated per ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "loss", rename_all = "snake_case")]
pub enum LossFamily {
    Hamming,
    Dice,
    Delta(DeltaParams),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaParams {
    pub k: u8,
    pub alpha: f64,
    pub normalization: Normalization,
    pub clamp_at_zero: bool,
    #[serde(default)]
    pub reading: DeltaReading,
}

impl DeltaParams {
    /// Defaults: `α = 2` for `Δ2`, `α = 0.5` for `Δ4`, clamping on for `Δ1`/`Δ2`,
    /// normalised by track length.
    pub fn new(k: u8) -> Result<Self> {
        let alpha = match k {
            1 | 3 => 0.0,
            2 => 2.0,
            4 => 0.5,
            _ => return Err(Error::InvalidLoss(format!("Δ{k} does not exist; use 1..=4"))),
        };
        Ok(Self { k, alpha, normalization: Normalization::ByTrackLength, clamp_at_zero: k <= 2, reading: DeltaReading::Median })
    }
}

impl LossFamily {
    pub fn name(&self) -> String {
        match self {
            LossFamily::Hamming => "hamming".into(),
            LossFamily::Dice => "dice".into(),
            LossFamily::Delta(d) => format!("delta{}", d.k),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "hamming" | "0-1" => Ok(LossFamily::Hamming),
            "dice" => Ok(LossFamily::Dice),
            "delta1" => Ok(LossFamily::Delta(DeltaParams::new(1)?)),
            "delta2" => Ok(LossFamily::Delta(DeltaParams::new(2)?)),
            "delta3" => Ok(LossFamily::Delta(DeltaParams::new(3)?)),
            "delta4" => Ok(LossFamily::Delta(DeltaParams::new(4)?)),
            other => Err(Error::InvalidLoss(format!("unknown loss {other:?}"))),
        }
    }

    pub fn instantiate<T: Scalar>(&self, y: &[Label]) -> Result<LossSpec<T>> {
        match self {
            LossFamily::Hamming => hamming(y),
            LossFamily::Dice => dice_spec(y),
            LossFamily::Delta(d) => delta_k(y, d),
        }
    }

    /// Key under which the decomposition of an instantiated loss can be
    /// shared between ground truths: `(p, m)` for Dice, `(p, 0)` otherwise.
    pub fn structure_key(&self, y: &[Label]) -> (usize, usize) {
        match self {
            LossFamily::Dice => (y.len(), positive_set(y).len()),
            _ => (y.len(), 0),
        }
    }
}

/// Sørensen–Dice loss between a ground-truth positive set and a predicted one.
pub fn dice_loss<T: Scalar>(y: Subset, y_pred: Subset) -> Result<T> {
    if y.is_empty() {
        return Err(Error::InvalidLoss("Dice loss is undefined for an empty ground-truth set".into()));
    }
    let inter = T::from_usize_exact(y.intersect(y_pred).len());
    let total = T::from_usize_exact(y.len() + y_pred.len());
    Ok(T::one() - (T::one() + T::one()) * inter / total)
}

/// Dice in terms of `m = |y|`, `n` false negatives and `fp` false positives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiceCounts {
    pub m: usize,
    pub n: usize,
    pub fp: usize,
}

impl DiceCounts {
    /// `(n + fp) / (2m - n + fp)`.
    pub fn value<T: Scalar>(&self) -> Result<T> {
        if self.m == 0 || self.n > self.m {
            return Err(Error::InvalidLoss(format!("invalid Dice counts {self:?}")));
        }
        let num = T::from_usize_exact(self.n + self.fp);
        let den = T::from_usize_exact(2 * self.m - self.n + self.fp);
        Ok(num / den)
    }
}

/// Dice as an fpfn set function over the mistakes of a fixed `y`.
pub fn dice_as_setfn<T: Scalar>(y: &[Label]) -> Result<SetFunction<T>> {
    let positives = positive_set(y);
    let m = positives.len();
    if m == 0 {
        return Err(Error::InvalidLoss("Dice loss needs at least one positive label".into()));
    }
    let p = y.len();
    let p_neg = p - m;
    let mut grid = Vec::with_capacity((m + 1) * (p_neg + 1));
    for n in 0..=m {
        for fp in 0..=p_neg {
            grid.push(DiceCounts { m, n, fp }.value::<T>()?);
        }
    }
    SetFunction::fpfn(p, m, positives, grid)
}

fn dice_spec<T: Scalar>(y: &[Label]) -> Result<LossSpec<T>> {
    Ok(LossSpec {
        name: "dice".into(),
        y: y.to_vec(),
        set_fn: dice_as_setfn(y)?,
        params: LossParams { alpha: None, normalization: Normalization::None, clamp_at_zero: false },
    })
}

/// Marginal gain of one extra false negative: `(2m + 2fp) / ((2m - n + fp - 1)(2m - n + fp))`.
pub fn dice_fn_gain(m: usize, n: usize, fp: usize) -> f64 {
    let d = (2 * m + fp) as f64 - n as f64;
    (2 * m + 2 * fp) as f64 / ((d - 1.0) * d)
}

/// One point of the two gain curves: `a` at `(n_A, p_A)`, `b` at `(n_A - 1, p_B)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainPoint {
    pub n_a: usize,
    pub a: f64,
    pub b: f64,
}

/// Gain curves for `n_A` in `n_range` (each `n_A >= 1`).
pub fn dice_gain_curves(m: usize, p_a: usize, p_b: usize, n_range: std::ops::RangeInclusive<usize>) -> Result<Vec<GainPoint>> {
    if *n_range.start() == 0 || *n_range.end() >= m || p_b > p_a {
        return Err(Error::InvalidLoss(format!(
            "gain curves need 1 <= n_A < m and p_B <= p_A (m={m}, n_A in {n_range:?}, p_A={p_a}, p_B={p_b})"
        )));
    }
    Ok(n_range
        .map(|n_a| GainPoint { n_a, a: dice_fn_gain(m, n_a, p_a), b: dice_fn_gain(m, n_a - 1, p_b) })
        .collect())
}

fn hamming<T: Scalar>(y: &[Label]) -> Result<LossSpec<T>> {
    let p = y.len();
    Ok(LossSpec {
        name: "hamming".into(),
        y: y.to_vec(),
        set_fn: hamming_setfn(p)?,
        params: LossParams { alpha: None, normalization: Normalization::None, clamp_at_zero: false },
    })
}

/// `l(A) = |A|`.
pub fn hamming_setfn<T: Scalar>(p: usize) -> Result<SetFunction<T>> {
    SetFunction::symmetric((0..=p).map(T::from_usize_exact).collect())
}

fn median3<T: Scalar>(a: T, b: T, c: T) -> T {
    T::max_of(T::min_of(a.clone(), b.clone()), T::min_of(T::max_of(a, b), c))
}

/// Profile `c[0..=p]` of `Δk` for a track of length `p`.
pub fn delta_profile<T: Scalar>(p: usize, params: &DeltaParams) -> Result<Vec<T>> {
    if p == 0 {
        return Err(Error::InvalidLoss("track length must be positive".into()));
    }
    let alpha = T::from_f64(params.alpha).ok_or_else(|| Error::InvalidLoss("α must be finite".into()))?;
    if matches!(params.k, 2 | 4) && params.alpha <= 0.0 {
        return Err(Error::InvalidLoss(format!("Δ{} needs α > 0", params.k)));
    }
    let third = T::ratio(p as i64, 3);
    let quarter = T::ratio(p as i64, 4);
    let scale = match params.normalization {
        Normalization::None => T::one(),
        Normalization::ByTrackLength => T::one() / T::from_usize_exact(p),
    };
    let profile = (0..=p).map(|i| {
        let k = T::from_usize_exact(i);
        let raw = match (params.k, params.reading) {
            (1, DeltaReading::Verbatim) => T::min_of(T::min_of(k.clone(), third.clone()), k - third.clone()),
            (1, DeltaReading::Median) => median3(k.clone(), third.clone(), k - third.clone()),
            (2, DeltaReading::Verbatim) => {
                T::min_of(T::min_of(k.clone(), quarter.clone()), k - quarter.clone())
            }
            (2, DeltaReading::Median) => median3(k.clone(), quarter.clone(), k - quarter.clone()),
            (3, _) => T::min_of((k - third.clone()).positive_part(), third.clone()),
            (4, _) => (k - third.clone()).positive_part(),
            _ => unreachable!("k validated"),
        };
        let mut v = raw * scale.clone();
        // α bounds l(V) on the reported scale.
        if matches!(params.k, 2 | 4) {
            v = T::min_of(v, alpha.clone());
        }
        if params.clamp_at_zero {
            v = v.positive_part();
        }
        v
    });
    let mut c: Vec<T> = profile.collect();
    // The formulas are evaluated at |I| = 0 too; the verbatim reading can put a
    // negative value there, but the set function is normalised to l(∅) = 0.
    c[0] = T::zero();
    Ok(c)
}

/// `Δk` as a symmetric loss over a track of length `y.len()`.
pub fn delta_k<T: Scalar>(y: &[Label], params: &DeltaParams) -> Result<LossSpec<T>> {
    if !(1..=4).contains(&params.k) {
        return Err(Error::InvalidLoss(format!("Δ{} does not exist; use 1..=4", params.k)));
    }
    let c = delta_profile::<T>(y.len(), params)?;
    Ok(LossSpec {
        name: format!("delta{}", params.k),
        y: y.to_vec(),
        set_fn: SetFunction::symmetric(c)?,
        params: LossParams {
            alpha: matches!(params.k, 2 | 4).then_some(params.alpha),
            normalization: params.normalization,
            clamp_at_zero: params.clamp_at_zero,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::check_structure;
    use num_rational::BigRational;

    fn raw(k: u8) -> DeltaParams {
        DeltaParams { normalization: Normalization::None, ..DeltaParams::new(k).unwrap() }
    }

    #[test]
    fn dice_examples() {
        let y = Subset::from_indices([1, 2]);
        assert_eq!(dice_loss::<f64>(y, y).unwrap(), 0.0);
        assert_eq!(dice_loss::<f64>(y, Subset::from_indices([2, 3])).unwrap(), 0.5);
        assert!(dice_loss::<f64>(Subset::EMPTY, y).is_err());
        let v: BigRational = DiceCounts { m: 10, n: 1, fp: 8 }.value().unwrap();
        assert_eq!(v, BigRational::ratio(1, 3));
    }

    #[test]
    fn dice_grid_corners() {
        let y = [1, 1, 1, -1, -1, -1];
        let f = dice_as_setfn::<f64>(&y).unwrap();
        assert_eq!(f.eval(Subset::EMPTY), 0.0);
        assert_eq!(f.eval(Subset::from_indices([0, 1, 2])), 1.0);
        assert!(dice_as_setfn::<f64>(&[-1, -1]).is_err());
    }

    #[test]
    fn dice_neither_sub_nor_super() {
        let f = dice_as_setfn::<f64>(&[1, 1, 1, -1, -1, -1]).unwrap();
        let r = check_structure(&f, &1e-9, 16).unwrap();
        assert!(!r.is_submodular && !r.is_supermodular);
        assert_eq!(r.witnesses.len(), 2);
    }

    #[test]
    fn delta3_values() {
        let l = delta_k::<BigRational>(&[1; 10], &raw(3)).unwrap();
        let c = |k: usize| l.set_fn.eval(Subset::full(k));
        assert_eq!(c(2), BigRational::ratio(0, 1));
        assert_eq!(c(5), BigRational::ratio(5, 3));
        assert_eq!(c(9), BigRational::ratio(10, 3));
    }

    #[test]
    fn delta4_alpha_cap() {
        let l = delta_k::<f64>(&[1; 10], &raw(4)).unwrap();
        assert_eq!(l.set_fn.eval(Subset::full(4)), 0.5);
        assert_eq!(l.set_fn.eval(Subset::full(3)), 0.0);
    }

    #[test]
    fn delta_singletons() {
        for k in 1..=4u8 {
            let l = delta_k::<f64>(&[1; 10], &DeltaParams::new(k).unwrap()).unwrap();
            let single = l.set_fn.eval(Subset::singleton(0));
            if k <= 2 {
                assert!(single > 0.0, "Δ{k}");
            } else {
                assert_eq!(single, 0.0, "Δ{k}");
            }
        }
    }

    #[test]
    fn delta_structure_at_ten() {
        for k in 1..=4u8 {
            let l = delta_k::<f64>(&[1; 10], &DeltaParams::new(k).unwrap()).unwrap();
            let r = check_structure(&l.set_fn, &1e-9, 16).unwrap();
            assert!(!r.is_submodular && !r.is_supermodular, "Δ{k}: {r:?}");
            assert!(r.is_nonnegative);
        }
    }

    #[test]
    fn verbatim_delta1_clamps() {
        let p = DeltaParams { reading: DeltaReading::Verbatim, ..raw(1) };
        let c = delta_profile::<f64>(10, &p).unwrap();
        assert!(c.iter().all(|v| *v >= 0.0));
        let unclamped = DeltaParams { clamp_at_zero: false, ..p };
        assert!(delta_profile::<f64>(10, &unclamped).unwrap()[1] < 0.0);
    }

    #[test]
    fn hamming_is_modular() {
        let l = LossFamily::Hamming.instantiate::<f64>(&[1, -1, 1]).unwrap();
        assert_eq!(l.eval(&[1, -1, 1]).unwrap(), 0.0);
        assert_eq!(l.eval(&[-1, 1, 1]).unwrap(), 2.0);
        assert!(check_structure(&l.set_fn, &1e-9, 16).unwrap().is_modular);
    }

    #[test]
    fn gain_curve_validation() {
        assert!(dice_gain_curves(10, 8, 5, 0..=8).is_err());
        assert!(dice_gain_curves(10, 5, 8, 1..=8).is_err());
        assert_eq!(dice_gain_curves(10, 8, 5, 1..=8).unwrap().len(), 8);
    }
}
