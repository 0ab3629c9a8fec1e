//! Synthetic bags of two-class Gaussian data.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use nonmodular::model::Sample;

use crate::error::HarnessError;

/// A multivariate Gaussian with a full covariance matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl Gaussian {
    pub fn isotropic(mean: Vec<f64>, variance: f64) -> Self {
        let d = mean.len();
        let cov = (0..d).map(|i| (0..d).map(|j| if i == j { variance } else { 0.0 }).collect()).collect();
        Self { mean, cov }
    }

    /// Lower-triangular `L` with `L Lᵀ = cov`; fails unless `cov` is symmetric
    /// positive definite.
    fn cholesky(&self) -> Result<Vec<Vec<f64>>, HarnessError> {
        let d = self.mean.len();
        if self.cov.len() != d || self.cov.iter().any(|r| r.len() != d) {
            return Err(HarnessError::Validation(format!("covariance must be {d}x{d}")));
        }
        let mut l = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..=i {
                if (self.cov[i][j] - self.cov[j][i]).abs() > 1e-12 {
                    return Err(HarnessError::Validation("covariance must be symmetric".into()));
                }
                let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
                if i == j {
                    let diag = self.cov[i][i] - s;
                    if diag <= 0.0 {
                        return Err(HarnessError::Validation("covariance must be positive definite".into()));
                    }
                    l[i][j] = diag.sqrt();
                } else {
                    l[i][j] = (self.cov[i][j] - s) / l[j][j];
                }
            }
        }
        Ok(l)
    }
}

/// Sampler with a precomputed Cholesky factor.
struct Sampler {
    mean: Vec<f64>,
    chol: Vec<Vec<f64>>,
}

impl Sampler {
    fn new(g: &Gaussian) -> Result<Self, HarnessError> {
        Ok(Self { mean: g.mean.clone(), chol: g.cholesky()? })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.mean.len()).map(|_| StandardNormal.sample(rng)).collect();
        self.mean
            .iter()
            .enumerate()
            .map(|(i, m)| m + (0..=i).map(|k| self.chol[i][k] * z[k]).sum::<f64>())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    #[serde(flatten)]
    pub gaussian: Gaussian,
}

/// How many positives a bag gets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PositiveFraction {
    /// `k` uniform over `{lo, …, hi}`.
    UniformCount { lo: usize, hi: usize },
    /// Each item independently positive with this probability.
    Bernoulli { prob: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub bags_train: usize,
    pub bags_test: usize,
    pub p: usize,
    pub positive: Gaussian,
    pub negative: Vec<MixtureComponent>,
    /// Defaults to a uniform count over `{1, …, p − 1}`.
    pub positive_fraction: Option<PositiveFraction>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            bags_train: 200,
            bags_test: 200,
            p: 6,
            positive: Gaussian::isotropic(vec![1.5, 1.5], 0.5),
            negative: vec![
                MixtureComponent { weight: 0.5, gaussian: Gaussian::isotropic(vec![-1.0, -1.0], 0.5) },
                MixtureComponent { weight: 0.5, gaussian: Gaussian::isotropic(vec![2.0, -2.0], 0.5) },
            ],
            positive_fraction: None,
        }
    }
}

impl SynthConfig {
    pub fn fraction(&self) -> PositiveFraction {
        self.positive_fraction
            .clone()
            .unwrap_or(PositiveFraction::UniformCount { lo: 1, hi: self.p.saturating_sub(1).max(1) })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Validation(m));
        if self.p == 0 {
            return bad("bag size p must be at least 1".into());
        }
        let d = self.positive.mean.len();
        if d == 0 {
            return bad("feature dimension must be at least 1".into());
        }
        self.positive.cholesky()?;
        if self.negative.is_empty() {
            return bad("negative mixture needs at least one component".into());
        }
        for c in &self.negative {
            if c.gaussian.mean.len() != d {
                return bad("all mixture components need the positive class's dimension".into());
            }
            if c.weight.is_nan() || c.weight < 0.0 {
                return bad("mixture weights must be non-negative".into());
            }
            c.gaussian.cholesky()?;
        }
        let total: f64 = self.negative.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("mixture weights sum to {total}, not 1"));
        }
        match self.fraction() {
            PositiveFraction::UniformCount { lo, hi } if lo > hi || hi > self.p => {
                bad(format!("positive count range {lo}..={hi} is invalid for p={}", self.p))
            }
            PositiveFraction::Bernoulli { prob } if !(0.0..=1.0).contains(&prob) => {
                bad(format!("positive probability {prob} is not in [0, 1]"))
            }
            _ => Ok(()),
        }
    }
}

/// Training and test bags.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub train: Vec<Sample<f64>>,
    pub test: Vec<Sample<f64>>,
}

/// Draws the configured bags. Deterministic in `cfg.seed`.
pub fn synth_generate(cfg: &SynthConfig) -> Result<Dataset, HarnessError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pos = Sampler::new(&cfg.positive)?;
    let neg: Vec<(f64, Sampler)> =
        cfg.negative.iter().map(|c| Ok((c.weight, Sampler::new(&c.gaussian)?))).collect::<Result<_, HarnessError>>()?;
    let fraction = cfg.fraction();
    let bag = |prefix: &str, b: usize, rng: &mut ChaCha8Rng| {
        let mut y: Vec<i8> = match fraction {
            PositiveFraction::UniformCount { lo, hi } => {
                let k = rng.random_range(lo..=hi);
                (0..cfg.p).map(|j| if j < k { 1 } else { -1 }).collect()
            }
            PositiveFraction::Bernoulli { prob } => (0..cfg.p).map(|_| if rng.random_bool(prob) { 1 } else { -1 }).collect(),
        };
        y.shuffle(rng);
        let x = y
            .iter()
            .map(|&yj| {
                if yj > 0 {
                    pos.draw(rng)
                } else {
                    let mut u: f64 = rng.random();
                    let comp = neg
                        .iter()
                        .find(|(w, _)| {
                            u -= w;
                            u < 0.0
                        })
                        .unwrap_or(neg.last().expect("validated non-empty"));
                    comp.1.draw(rng)
                }
            })
            .collect();
        Sample { bag_id: format!("{prefix}{b:05}"), x, y }
    };
    let train = (0..cfg.bags_train).map(|b| bag("train-", b, &mut rng)).collect();
    let test = (0..cfg.bags_test).map(|b| bag("test-", b, &mut rng)).collect();
    Ok(Dataset { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_label_counts() {
        let ds = synth_generate(&SynthConfig::default()).unwrap();
        assert_eq!(ds.train.len(), 200);
        assert_eq!(ds.test.len(), 200);
        for s in ds.train.iter().chain(&ds.test) {
            assert_eq!(s.p(), 6);
            assert_eq!(s.dim(), 2);
            let k = s.y.iter().filter(|v| **v > 0).count();
            assert!((1..=5).contains(&k));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SynthConfig { seed: 7, ..Default::default() };
        assert_eq!(synth_generate(&cfg).unwrap(), synth_generate(&cfg).unwrap());
        let other = SynthConfig { seed: 8, ..Default::default() };
        assert_ne!(synth_generate(&cfg).unwrap(), synth_generate(&other).unwrap());
    }

    #[test]
    fn rejects_bad_covariance_and_weights() {
        let mut cfg = SynthConfig::default();
        cfg.positive.cov = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(cfg.validate().is_err());
        let mut cfg = SynthConfig::default();
        cfg.negative[0].weight = 0.7;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn correlated_covariance_sample_moments() {
        let g = Gaussian { mean: vec![0.0, 0.0], cov: vec![vec![1.0, 0.8], vec![0.8, 1.0]] };
        let s = Sampler::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20_000;
        let xy: f64 = (0..n).map(|_| {
            let v = s.draw(&mut rng);
            v[0] * v[1]
        }).sum::<f64>() / n as f64;
        assert!((xy - 0.8).abs() < 0.05, "{xy}");
    }
}
