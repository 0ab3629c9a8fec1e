//! Linear scoring models over bags of feature vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::setfn::Label;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// One weight vector shared by every position in the bag.
    #[default]
    Shared,
    /// A separate block of weights per position; bags must all have size `p`.
    PerPosition,
}

/// A bag of `p` feature vectors with ±1 labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub bag_id: String,
    pub x: Vec<Vec<T>>,
    pub y: Vec<Label>,
}

impl<T: Scalar> Sample<T> {
    pub fn new(bag_id: impl Into<String>, x: Vec<Vec<T>>, y: Vec<Label>) -> Result<Self> {
        let s = Self { bag_id: bag_id.into(), x, y };
        s.validate()?;
        Ok(s)
    }

    pub fn p(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.y.is_empty() {
            return Err(Error::Dimension(format!("bag {:?} is empty", self.bag_id)));
        }
        if self.x.len() != self.y.len() {
            return Err(Error::LengthMismatch { expected: self.y.len(), got: self.x.len() });
        }
        let d = self.dim();
        if let Some(bad) = self.x.iter().find(|v| v.len() != d) {
            return Err(Error::Dimension(format!(
                "bag {:?} mixes feature dimensions {d} and {}",
                self.bag_id,
                bad.len()
            )));
        }
        if let Some(bad) = self.y.iter().find(|v| **v != 1 && **v != -1) {
            return Err(Error::InvalidLoss(format!("label {bad} is not ±1")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel<T> {
    pub mode: WeightMode,
    /// Raw feature dimension (before augmentation).
    pub d: usize,
    /// Bag size, only for per-position models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    pub w: Vec<T>,
    /// Whether a constant 1 feature is appended to every item.
    #[serde(default)]
    pub augmented: bool,
}

impl<T: Scalar> LinearModel<T> {
    pub fn zeros(mode: WeightMode, d: usize, p: Option<usize>, augmented: bool) -> Result<Self> {
        let block = d + usize::from(augmented);
        let len = match mode {
            WeightMode::Shared => block,
            WeightMode::PerPosition => {
                let p = p.ok_or_else(|| Error::Config("per-position models need a bag size".into()))?;
                block * p
            }
        };
        Ok(Self {
            mode,
            d,
            p: if mode == WeightMode::PerPosition { p } else { None },
            w: vec![T::zero(); len],
            augmented,
        })
    }

    /// Length of one weight block.
    pub fn block(&self) -> usize {
        self.d + usize::from(self.augmented)
    }

    pub fn num_weights(&self) -> usize {
        self.w.len()
    }

    fn check_bag(&self, x: &[Vec<T>]) -> Result<()> {
        if let Some(v) = x.iter().find(|v| v.len() != self.d) {
            return Err(Error::Dimension(format!("feature of length {} for a model with d={}", v.len(), self.d)));
        }
        if self.mode == WeightMode::PerPosition && Some(x.len()) != self.p {
            return Err(Error::Dimension(format!(
                "bag of size {} for a per-position model with p={:?}",
                x.len(),
                self.p
            )));
        }
        Ok(())
    }

    fn offset(&self, j: usize) -> usize {
        match self.mode {
            WeightMode::Shared => 0,
            WeightMode::PerPosition => j * self.block(),
        }
    }

    /// `h^j = <w^j, x^j>` for every position.
    pub fn scores(&self, x: &[Vec<T>]) -> Result<Vec<T>> {
        self.scores_with(&self.w, x)
    }

    /// Scores under an arbitrary weight vector of this model's layout.
    pub fn scores_with(&self, w: &[T], x: &[Vec<T>]) -> Result<Vec<T>> {
        self.check_bag(x)?;
        if w.len() != self.w.len() {
            return Err(Error::LengthMismatch { expected: self.w.len(), got: w.len() });
        }
        Ok(x.iter()
            .enumerate()
            .map(|(j, xj)| {
                let base = self.offset(j);
                let mut h = xj
                    .iter()
                    .zip(&w[base..base + self.d])
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
                if self.augmented {
                    h = h + w[base + self.d].clone();
                }
                h
            })
            .collect())
    }

    /// Weight-space vector of the linear form `w ↦ Σ_j coef_j h^j(w)`.
    pub fn scatter(&self, x: &[Vec<T>], coef: &[T]) -> Result<Vec<T>> {
        self.check_bag(x)?;
        if coef.len() != x.len() {
            return Err(Error::LengthMismatch { expected: x.len(), got: coef.len() });
        }
        let mut out = vec![T::zero(); self.w.len()];
        for (j, (xj, c)) in x.iter().zip(coef).enumerate() {
            if c.is_zero() {
                continue;
            }
            let base = self.offset(j);
            for (k, v) in xj.iter().enumerate() {
                out[base + k] = out[base + k].clone() + c.clone() * v.clone();
            }
            if self.augmented {
                out[base + self.d] = out[base + self.d].clone() + c.clone();
            }
        }
        Ok(out)
    }

    /// Elementwise sign of the scores, with `sign(0) = +1`.
    pub fn predict(&self, x: &[Vec<T>]) -> Result<Vec<Label>> {
        Ok(self.scores(x)?.into_iter().map(|h| sign(&h)).collect())
    }

    pub fn norm_sq(&self) -> T {
        self.w.iter().fold(T::zero(), |acc, v| acc + v.clone() * v.clone())
    }
}

/// `+1` for non-negative input, `-1` otherwise.
pub fn sign<T: Scalar>(h: &T) -> Label {
    if *h >= T::zero() {
        1
    } else {
        -1
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_scores() {
        let mut m = LinearModel::<f64>::zeros(WeightMode::Shared, 2, None, false).unwrap();
        let x = vec![vec![2.0, 5.0], vec![-1.0, 1.0]];
        assert_eq!(m.scores(&x).unwrap(), vec![0.0, 0.0]);
        m.w = vec![1.0, 0.0];
        assert_eq!(m.scores(&x).unwrap(), vec![2.0, -1.0]);
    }

    #[test]
    fn per_position_scores() {
        let mut m = LinearModel::<f64>::zeros(WeightMode::PerPosition, 2, Some(2), false).unwrap();
        m.w = vec![1.0, 0.0, 0.0, 1.0];
        let x = vec![vec![3.0, 4.0], vec![5.0, 6.0]];
        assert_eq!(m.scores(&x).unwrap(), vec![3.0, 6.0]);
        assert!(m.scores(&x[..1]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let m = LinearModel::<f64>::zeros(WeightMode::Shared, 3, None, false).unwrap();
        assert!(matches!(m.scores(&[vec![1.0, 2.0]]), Err(Error::Dimension(_))));
    }

    #[test]
    fn scatter_is_adjoint_of_scores() {
        let mut m = LinearModel::<f64>::zeros(WeightMode::PerPosition, 2, Some(3), true).unwrap();
        m.w = vec![0.5, -1.0, 0.2, 1.5, 2.0, -0.3, 0.0, 1.0, 0.7];
        let x = vec![vec![1.0, 2.0], vec![-1.0, 0.5], vec![3.0, -2.0]];
        let coef = vec![0.3, -1.2, 2.0];
        let h = m.scores(&x).unwrap();
        let lhs = dot(&coef, &h);
        let rhs = dot(&m.scatter(&x, &coef).unwrap(), &m.w);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn predict_tie_rule() {
        let mut m = LinearModel::<f64>::zeros(WeightMode::Shared, 1, None, false).unwrap();
        assert_eq!(m.predict(&[vec![1.0], vec![-4.0]]).unwrap(), vec![1, 1]);
        m.w = vec![1.0];
        assert_eq!(m.predict(&[vec![0.3], vec![-2.0]]).unwrap(), vec![1, -1]);
    }

    #[test]
    fn sample_validation() {
        assert!(Sample::<f64>::new("a", vec![vec![1.0], vec![1.0, 2.0]], vec![1, -1]).is_err());
        assert!(Sample::<f64>::new("a", vec![vec![1.0]], vec![0]).is_err());
        assert!(Sample::<f64>::new("a", vec![], vec![]).is_err());
        assert!(Sample::<f64>::new("a", vec![vec![1.0]], vec![-1]).is_ok());
    }
}
