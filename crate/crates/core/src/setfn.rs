//! Finite set functions over a ground set `{0, .., p-1}`.
//!
//! Subsets are bitmasks (element `i` is bit `i`), dense tables are indexed by
//! that bitmask. Four representations are supported: a dense table of `2^p`
//! values, a symmetric profile `c(|A|)`, a false-negative / false-positive
//! grid `c(|A ∩ P|, |A \ P|)` for a designated positive set `P`, and an
//! arbitrary oracle.

use std::fmt;
use std::sync::Arc;


use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default largest `p` for which exhaustive operations are attempted.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 16;

/// Largest ground set a [`Subset`] bitmask can address.
pub const MAX_GROUND: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroundSet {
    p: usize,
}

impl GroundSet {
    pub fn new(p: usize) -> Result<Self> {
        if p == 0 || p > MAX_GROUND {
            return Err(Error::InvalidSetFunction(format!(
                "ground set size must be in 1..={MAX_GROUND}, got {p}"
            )));
        }
        Ok(Self { p })
    }

    pub fn size(&self) -> usize {
        self.p
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.p)
    }

    /// Errors unless `p <= cap`.
    pub fn require_exhaustive(&self, cap: usize) -> Result<()> {
        if self.p > cap {
            Err(Error::AboveCap { p: self.p, cap })
        } else {
            Ok(())
        }
    }

    /// All subsets in bitmask order. Only meaningful for small `p`.
    pub fn subsets(&self) -> impl Iterator<Item = Subset> {
        assert!(self.p < 64, "enumeration requires p < 64");
        (0..(1u128 << self.p)).map(Subset)
    }
}

/// A subset of the ground set as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subset(pub u128);

/// Set of positions where a prediction disagrees with the ground truth.
pub type MistakeSet = Subset;

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn full(p: usize) -> Self {
        if p >= 128 {
            Subset(u128::MAX)
        } else {
            Subset((1u128 << p) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        Subset(1u128 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(items: I) -> Self {
        items.into_iter().fold(Subset::EMPTY, |s, i| s.with(i))
    }

    pub fn bits(&self) -> u128 {
        self.0
    }

    pub fn index(&self) -> usize {
        self.0 as usize
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        Subset(self.0 | 1u128 << i)
    }

    pub fn without(self, i: usize) -> Self {
        Subset(self.0 & !(1u128 << i))
    }

    pub fn toggled(self, i: usize) -> Self {
        Subset(self.0 ^ 1u128 << i)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: Subset) -> Self {
        Subset(self.0 & other.0)
    }

    pub fn union(self, other: Subset) -> Self {
        Subset(self.0 | other.0)
    }

    pub fn difference(self, other: Subset) -> Self {
        Subset(self.0 & !other.0)
    }

    pub fn is_subset_of(&self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// Elements in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A ±1 label.
pub type Label = i8;

/// `{i | y^i != ỹ^i}`.
pub fn mistake_set(y: &[Label], y_pred: &[Label]) -> Result<MistakeSet> {
    if y.len() != y_pred.len() {
        return Err(Error::LengthMismatch { expected: y.len(), got: y_pred.len() });
    }
    if y.len() > MAX_GROUND {
        return Err(Error::InvalidSetFunction(format!("label vector longer than {MAX_GROUND}")));
    }
    Ok(y.iter()
        .zip(y_pred)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .fold(Subset::EMPTY, |s, (i, _)| s.with(i)))
}

/// Positions labelled `+1`.
pub fn positive_set(y: &[Label]) -> Subset {
    Subset::from_indices(y.iter().enumerate().filter(|(_, &v)| v > 0).map(|(i, _)| i))
}

type OracleFn<T> = Arc<dyn Fn(Subset) -> T + Send + Sync>;

#[derive(Clone)]
pub enum Repr<T> {
    /// `2^p` values in bitmask order.
    Dense(Vec<T>),
    /// `c[0..=p]`, value depends on cardinality only.
    Symmetric(Vec<T>),
    /// Row-major `(m + 1) x (p - m + 1)` grid indexed by
    /// `(|A ∩ positives|, |A \ positives|)`.
    FpFn { grid: Vec<T>, m: usize, positives: Subset },
    Oracle(OracleFn<T>),
}

impl<T: fmt::Debug> fmt::Debug for Repr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Repr::Dense(v) => f.debug_tuple("Dense").field(v).finish(),
            Repr::Symmetric(c) => f.debug_tuple("Symmetric").field(c).finish(),
            Repr::FpFn { grid, m, positives } => f
                .debug_struct("FpFn")
                .field("grid", grid)
                .field("m", m)
                .field("positives", positives)
                .finish(),
            Repr::Oracle(_) => f.write_str("Oracle(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SetFunction<T> {
    ground: GroundSet,
    repr: Repr<T>,
}

impl<T: Scalar> SetFunction<T> {
    pub fn dense(p: usize, values: Vec<T>) -> Result<Self> {
        let ground = GroundSet::new(p)?;
        if p >= 32 || values.len() != 1usize << p {
            return Err(Error::InvalidSetFunction(format!(
                "dense table for p={p} needs 2^p entries, got {}",
                values.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::InvalidSetFunction("value at the empty set must be 0".into()));
        }
        Ok(Self { ground, repr: Repr::Dense(values) })
    }

    pub fn symmetric(profile: Vec<T>) -> Result<Self> {
        if profile.len() < 2 {
            return Err(Error::InvalidSetFunction("symmetric profile needs p+1 >= 2 entries".into()));
        }
        if !profile[0].is_zero() {
            return Err(Error::InvalidSetFunction("symmetric profile must have c[0] = 0".into()));
        }
        let ground = GroundSet::new(profile.len() - 1)?;
        Ok(Self { ground, repr: Repr::Symmetric(profile) })
    }

    /// Grid over `(false negatives, false positives)`; `positives` must have `m` elements.
    pub fn fpfn(p: usize, m: usize, positives: Subset, grid: Vec<T>) -> Result<Self> {
        let ground = GroundSet::new(p)?;
        if m > p {
            return Err(Error::InvalidSetFunction(format!("m={m} exceeds p={p}")));
        }
        if positives.len() != m || !positives.is_subset_of(ground.full()) {
            return Err(Error::InvalidSetFunction(format!(
                "positive set {positives:?} is not an {m}-subset of the ground set"
            )));
        }
        if grid.len() != (m + 1) * (p - m + 1) {
            return Err(Error::InvalidSetFunction(format!(
                "fpfn grid must be {}x{}, got {} values",
                m + 1,
                p - m + 1,
                grid.len()
            )));
        }
        if !grid[0].is_zero() {
            return Err(Error::InvalidSetFunction("fpfn grid must have c(0,0) = 0".into()));
        }
        Ok(Self { ground, repr: Repr::FpFn { grid, m, positives } })
    }

    /// Grid with the first `m` elements taken as the positives.
    pub fn fpfn_leading(m: usize, p_neg: usize, grid: Vec<T>) -> Result<Self> {
        Self::fpfn(m + p_neg, m, Subset::full(m), grid)
    }

    /// Oracle-backed function; `f(∅)` must be 0.
    pub fn oracle<F>(p: usize, f: F) -> Result<Self>
    where
        F: Fn(Subset) -> T + Send + Sync + 'static,
    {
        let ground = GroundSet::new(p)?;
        if !f(Subset::EMPTY).is_zero() {
            return Err(Error::InvalidSetFunction("oracle value at the empty set must be 0".into()));
        }
        Ok(Self { ground, repr: Repr::Oracle(Arc::new(f)) })
    }

    /// `A ↦ Σ_{j∈A} w_j`.
    pub fn modular(weights: Vec<T>) -> Result<Self> {
        let p = weights.len();
        if p <= DEFAULT_EXHAUSTIVE_CAP {
            let n = 1usize << p;
            let mut values = vec![T::zero(); n];
            for mask in 1..n {
                let low = mask.trailing_zeros() as usize;
                values[mask] = values[mask & (mask - 1)].clone() + weights[low].clone();
            }
            Self::dense(p, values)
        } else {
            Self::oracle(p, move |a| a.iter().fold(T::zero(), |acc, j| acc + weights[j].clone()))
        }
    }

    pub fn zero(p: usize) -> Result<Self> {
        Self::symmetric(vec![T::zero(); p + 1])
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn p(&self) -> usize {
        self.ground.p
    }

    pub fn repr(&self) -> &Repr<T> {
        &self.repr
    }

    /// `f(A)`. Panics if `A` is not a subset of the ground set.
    pub fn eval(&self, a: Subset) -> T {
        assert!(
            a.is_subset_of(self.ground.full()),
            "subset {a:?} outside ground set of size {}",
            self.ground.p
        );
        match &self.repr {
            Repr::Dense(v) => v[a.index()].clone(),
            Repr::Symmetric(c) => c[a.len()].clone(),
            Repr::FpFn { grid, m, positives } => {
                let fn_count = a.intersect(*positives).len();
                let fp_count = a.len() - fn_count;
                grid[fn_count * (self.ground.p - m + 1) + fp_count].clone()
            }
            Repr::Oracle(f) => f(a),
        }
    }

    /// The dense table, refusing above `cap`.
    pub fn table(&self, cap: usize) -> Result<Vec<T>> {
        self.ground.require_exhaustive(cap)?;
        if let Repr::Dense(v) = &self.repr {
            return Ok(v.clone());
        }
        Ok(self.ground.subsets().map(|a| self.eval(a)).collect())
    }

    pub fn to_dense(&self, cap: usize) -> Result<Self> {
        Self::dense(self.p(), self.table(cap)?)
    }

    pub fn is_symmetric_repr(&self) -> bool {
        matches!(self.repr, Repr::Symmetric(_))
    }

    /// Pointwise map preserving the representation; `op(0)` must be 0.
    pub fn map<F>(&self, op: F) -> Self
    where
        F: Fn(&T) -> T + Send + Sync + 'static,
    {
        let repr = match &self.repr {
            Repr::Dense(v) => Repr::Dense(v.iter().map(&op).collect()),
            Repr::Symmetric(c) => Repr::Symmetric(c.iter().map(&op).collect()),
            Repr::FpFn { grid, m, positives } => Repr::FpFn {
                grid: grid.iter().map(&op).collect(),
                m: *m,
                positives: *positives,
            },
            Repr::Oracle(f) => {
                let f = f.clone();
                Repr::Oracle(Arc::new(move |a| op(&f(a))))
            }
        };
        Self { ground: self.ground, repr }
    }

    pub fn negate(&self) -> Self {
        self.map(|v| -v.clone())
    }

    pub fn scale(&self, factor: T) -> Self {
        self.map(move |v| v.clone() * factor.clone())
    }

    /// Pointwise combination. Keeps a shared compact representation when both
    /// operands have one, otherwise falls back to a dense table (or an oracle
    /// above the exhaustive cap).
    pub fn zip_with<F>(&self, other: &Self, op: F) -> Result<Self>
    where
        F: Fn(&T, &T) -> T + Send + Sync + 'static,
    {
        if self.p() != other.p() {
            return Err(Error::LengthMismatch { expected: self.p(), got: other.p() });
        }
        let repr = match (&self.repr, &other.repr) {
            (Repr::Symmetric(a), Repr::Symmetric(b)) => {
                Repr::Symmetric(a.iter().zip(b).map(|(x, y)| op(x, y)).collect())
            }
            (
                Repr::FpFn { grid: a, m, positives },
                Repr::FpFn { grid: b, m: m2, positives: pos2 },
            ) if m == m2 && positives == pos2 => Repr::FpFn {
                grid: a.iter().zip(b).map(|(x, y)| op(x, y)).collect(),
                m: *m,
                positives: *positives,
            },
            (Repr::Symmetric(c), Repr::FpFn { grid, m, positives }) => {
                let cols = self.p() - m + 1;
                Repr::FpFn {
                    grid: grid
                        .iter()
                        .enumerate()
                        .map(|(k, g)| op(&c[k / cols + k % cols], g))
                        .collect(),
                    m: *m,
                    positives: *positives,
                }
            }
            (Repr::FpFn { grid, m, positives }, Repr::Symmetric(c)) => {
                let cols = self.p() - m + 1;
                Repr::FpFn {
                    grid: grid
                        .iter()
                        .enumerate()
                        .map(|(k, g)| op(g, &c[k / cols + k % cols]))
                        .collect(),
                    m: *m,
                    positives: *positives,
                }
            }
            _ if self.p() <= DEFAULT_EXHAUSTIVE_CAP => Repr::Dense(
                self.ground
                    .subsets()
                    .map(|a| op(&self.eval(a), &other.eval(a)))
                    .collect(),
            ),
            _ => {
                let (a, b) = (self.clone(), other.clone());
                Repr::Oracle(Arc::new(move |s| op(&a.eval(s), &b.eval(s))))
            }
        };
        Ok(Self { ground: self.ground, repr })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    /// Restriction to subsets of `s`, re-indexed so that the `k`-th smallest
    /// element of `s` becomes element `k`.
    pub fn restrict(&self, s: Subset) -> Result<Self> {
        if !s.is_subset_of(self.ground.full()) || s.is_empty() {
            return Err(Error::InvalidSetFunction(format!("cannot restrict to {s:?}")));
        }
        let q = s.len();
        let members: Vec<usize> = s.iter().collect();
        let lift = move |a: Subset| Subset::from_indices(a.iter().map(|k| members[k]));
        let repr = match &self.repr {
            Repr::Symmetric(c) => Repr::Symmetric(c[..=q].to_vec()),
            Repr::FpFn { grid, m, positives } => {
                let kept_pos = s.intersect(*positives);
                let new_m = kept_pos.len();
                let new_neg = q - new_m;
                let cols = self.p() - m + 1;
                let mut sub = Vec::with_capacity((new_m + 1) * (new_neg + 1));
                for a in 0..=new_m {
                    for b in 0..=new_neg {
                        sub.push(grid[a * cols + b].clone());
                    }
                }
                let positives = Subset::from_indices(
                    s.iter().enumerate().filter(|(_, e)| kept_pos.contains(*e)).map(|(k, _)| k),
                );
                Repr::FpFn { grid: sub, m: new_m, positives }
            }
            _ if q <= DEFAULT_EXHAUSTIVE_CAP => Repr::Dense(
                GroundSet::new(q)?.subsets().map(|a| self.eval(lift(a))).collect(),
            ),
            _ => {
                let parent = self.clone();
                Repr::Oracle(Arc::new(move |a| parent.eval(lift(a))))
            }
        };
        Ok(Self { ground: GroundSet::new(q)?, repr })
    }

    /// Largest absolute pointwise difference (exhaustive).
    pub fn max_abs_diff(&self, other: &Self, cap: usize) -> Result<T> {
        let a = self.table(cap)?;
        let b = other.table(cap)?;
        if a.len() != b.len() {
            return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
        }
        Ok(a.iter()
            .zip(&b)
            .map(|(x, y)| (x.clone() - y.clone()).abs())
            .fold(T::zero(), T::max_of))
    }

    /// `Σ_A f(A)`: the decomposition objective.
    pub fn total(&self, cap: usize) -> Result<T> {
        match &self.repr {
            Repr::Symmetric(c) => {
                let p = self.p();
                Ok(c.iter()
                    .enumerate()
                    .map(|(k, v)| v.clone() * binomial::<T>(p, k))
                    .fold(T::zero(), |a, b| a + b))
            }
            Repr::FpFn { grid, m, .. } => {
                let neg = self.p() - m;
                Ok(grid
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        v.clone() * binomial::<T>(*m, k / (neg + 1)) * binomial::<T>(neg, k % (neg + 1))
                    })
                    .fold(T::zero(), |a, b| a + b))
            }
            _ => Ok(self.table(cap)?.into_iter().fold(T::zero(), |a, b| a + b)),
        }
    }
}

/// `n choose k` in the scalar type.
pub fn binomial<T: Scalar>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_usize_exact(n - i) / T::from_usize_exact(i + 1);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Submodular,
    Supermodular,
    Increasing,
    Nonnegative,
}

/// A concrete violation of a structural property.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `f(A∪i) + f(A∪j) - f(A) - f(A∪{i,j})` has the wrong sign; `gap` is the signed value.
    Exchange { property: Property, set: u128, i: usize, j: usize, gap: f64 },
    /// `f(A∪x) < f(A)`.
    Decrease { set: u128, x: usize, drop: f64 },
    Negative { set: u128, value: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub is_submodular: bool,
    pub is_supermodular: bool,
    pub is_modular: bool,
    pub is_increasing: bool,
    pub is_nonnegative: bool,
    pub witnesses: Vec<Witness>,
}

impl StructureReport {
    pub fn witness_for(&self, property: Property) -> Option<&Witness> {
        self.witnesses.iter().find(|w| match w {
            Witness::Exchange { property: p, .. } => *p == property,
            Witness::Decrease { .. } => property == Property::Increasing,
            Witness::Negative { .. } => property == Property::Nonnegative,
        })
    }
}

/// Exhaustive structural check. Submodularity uses the local exchange
/// condition `f(A∪i) + f(A∪j) >= f(A) + f(A∪{i,j})` for all `A` and
/// `i < j ∉ A`; supermodularity is the reversed inequality. One witness (the
/// worst) is kept per failed property.
pub fn check_structure<T: Scalar>(f: &SetFunction<T>, tol: &T, cap: usize) -> Result<StructureReport> {
    let p = f.p();
    let table = f.table(cap)?;
    let tol = tol.clone();
    let neg_tol = -tol.clone();

    let mut worst_sub: Option<(T, Witness)> = None;
    let mut worst_sup: Option<(T, Witness)> = None;
    let mut worst_dec: Option<(T, Witness)> = None;
    let mut worst_neg: Option<(T, Witness)> = None;
    let keep = |slot: &mut Option<(T, Witness)>, amount: T, w: Witness| {
        if slot.as_ref().is_none_or(|(best, _)| amount > *best) {
            *slot = Some((amount, w));
        }
    };

    for a in 0..table.len() {
        let fa = &table[a];
        if *fa < neg_tol {
            keep(
                &mut worst_neg,
                -fa.clone(),
                Witness::Negative { set: a as u128, value: fa.to_f64_lossy() },
            );
        }
        for i in 0..p {
            if a >> i & 1 == 1 {
                continue;
            }
            let ai = a | 1 << i;
            let drop = fa.clone() - table[ai].clone();
            if drop > tol {
                keep(
                    &mut worst_dec,
                    drop.clone(),
                    Witness::Decrease { set: a as u128, x: i, drop: drop.to_f64_lossy() },
                );
            }
            for j in (i + 1)..p {
                if a >> j & 1 == 1 {
                    continue;
                }
                let aj = a | 1 << j;
                let aij = ai | 1 << j;
                let gap = table[ai].clone() + table[aj].clone() - fa.clone() - table[aij].clone();
                if gap < neg_tol {
                    keep(
                        &mut worst_sub,
                        -gap.clone(),
                        Witness::Exchange {
                            property: Property::Submodular,
                            set: a as u128,
                            i,
                            j,
                            gap: gap.to_f64_lossy(),
                        },
                    );
                } else if gap > tol {
                    keep(
                        &mut worst_sup,
                        gap.clone(),
                        Witness::Exchange {
                            property: Property::Supermodular,
                            set: a as u128,
                            i,
                            j,
                            gap: gap.to_f64_lossy(),
                        },
                    );
                }
            }
        }
    }

    let mut report = StructureReport {
        is_submodular: worst_sub.is_none(),
        is_supermodular: worst_sup.is_none(),
        is_increasing: worst_dec.is_none(),
        is_nonnegative: worst_neg.is_none(),
        ..Default::default()
    };
    report.is_modular = report.is_submodular && report.is_supermodular;
    report.witnesses = [worst_sub, worst_sup, worst_dec, worst_neg]
        .into_iter()
        .flatten()
        .map(|(_, w)| w)
        .collect();
    Ok(report)
}

/// Re-evaluates a witness against `f`; returns the amount by which it
/// violates its defining inequality (positive means violated).
pub fn witness_violation<T: Scalar>(f: &SetFunction<T>, w: &Witness) -> f64 {
    match *w {
        Witness::Exchange { property, set, i, j, .. } => {
            let a = Subset(set);
            let gap = f.eval(a.with(i)) + f.eval(a.with(j)) - f.eval(a) - f.eval(a.with(i).with(j));
            let gap = gap.to_f64_lossy();
            match property {
                Property::Submodular => -gap,
                _ => gap,
            }
        }
        Witness::Decrease { set, x, .. } => {
            let a = Subset(set);
            (f.eval(a) - f.eval(a.with(x))).to_f64_lossy()
        }
        Witness::Negative { set, .. } => -f.eval(Subset(set)).to_f64_lossy(),
    }
}

/// Coefficients `w_j = -min_{A ⊆ V} [g(A ∪ {j}) - g(A)]` of the modular
/// correction `m_g` that makes `g + m_g` increasing. The minimum ranges over
/// all `A`, including those already containing `j`, so every `w_j >= 0`.
pub fn modular_shift_weights<T: Scalar>(g: &SetFunction<T>, cap: usize) -> Result<Vec<T>> {
    let table = g.table(cap)?;
    let p = g.p();
    Ok((0..p)
        .map(|j| {
            let min_gain = (0..table.len())
                .filter(|a| a >> j & 1 == 0)
                .map(|a| table[a | 1 << j].clone() - table[a].clone())
                .fold(T::zero(), T::min_of);
            -min_gain
        })
        .collect())
}

/// The modular function `m_g` from [`modular_shift_weights`].
pub fn modular_shift<T: Scalar>(g: &SetFunction<T>, cap: usize) -> Result<SetFunction<T>> {
    SetFunction::modular(modular_shift_weights(g, cap)?)
}

/// On-disk set-function format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetFunctionFile {
    pub p: usize,
    pub repr: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Positive elements for `fpfn`; defaults to the first `m` elements.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positives: Option<Vec<usize>>,
}

impl SetFunctionFile {
    pub fn from_set_function<T: Scalar>(f: &SetFunction<T>, cap: usize) -> Result<Self> {
        let conv = |v: &[T]| v.iter().map(Scalar::to_f64_lossy).collect::<Vec<_>>();
        Ok(match f.repr() {
            Repr::Symmetric(c) => Self {
                p: f.p(),
                repr: "symmetric".into(),
                values: conv(c),
                m: None,
                positives: None,
            },
            Repr::FpFn { grid, m, positives } => Self {
                p: f.p(),
                repr: "fpfn".into(),
                values: conv(grid),
                m: Some(*m),
                positives: if *positives == Subset::full(*m) {
                    None
                } else {
                    Some(positives.iter().collect())
                },
            },
            _ => Self {
                p: f.p(),
                repr: "dense".into(),
                values: conv(&f.table(cap)?),
                m: None,
                positives: None,
            },
        })
    }

    pub fn into_set_function(self) -> Result<SetFunction<f64>> {
        match self.repr.as_str() {
            "dense" => SetFunction::dense(self.p, self.values),
            "symmetric" => {
                if self.values.len() != self.p + 1 {
                    return Err(Error::InvalidSetFunction(format!(
                        "symmetric profile for p={} needs {} values, got {}",
                        self.p,
                        self.p + 1,
                        self.values.len()
                    )));
                }
                SetFunction::symmetric(self.values)
            }
            "fpfn" => {
                let m = self
                    .m
                    .ok_or_else(|| Error::InvalidSetFunction("fpfn file needs \"m\"".into()))?;
                let positives = match self.positives {
                    Some(list) => Subset::from_indices(list),
                    None => Subset::full(m),
                };
                SetFunction::fpfn(self.p, m, positives, self.values)
            }
            other => Err(Error::InvalidSetFunction(format!("unknown repr {other:?}"))),
        }
    }
}
