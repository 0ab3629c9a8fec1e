#![allow(dead_code)]

use nonmodular::setfn::{Label, SetFunction, Subset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values uniform in [0, 1] with `l(∅) = 0`.
pub fn random_dense(rng: &mut ChaCha8Rng, p: usize) -> SetFunction<f64> {
    let mut v: Vec<f64> = (0..1usize << p).map(|_| rng.random()).collect();
    v[0] = 0.0;
    SetFunction::dense(p, v).unwrap()
}

fn random_blocks(rng: &mut ChaCha8Rng, p: usize, k: usize) -> Vec<(Subset, f64)> {
    (0..k)
        .map(|_| {
            let bits = rng.random_range(1u128..(1u128 << p));
            (Subset(bits), rng.random_range(0.1..1.0))
        })
        .collect()
}

/// Non-negative modular part plus weighted concave functions of block counts.
pub fn random_submodular(rng: &mut ChaCha8Rng, p: usize) -> SetFunction<f64> {
    let w: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..1.0)).collect();
    let blocks = random_blocks(rng, p, 3);
    let caps: Vec<usize> = blocks.iter().map(|_| rng.random_range(1..=p)).collect();
    let v = (0..1u128 << p)
        .map(|a| {
            let a = Subset(a);
            let modular: f64 = a.iter().map(|j| w[j]).sum();
            let concave: f64 = blocks
                .iter()
                .zip(&caps)
                .map(|((b, c), cap)| {
                    let k = a.intersect(*b).len();
                    c * ((k as f64).sqrt() + k.min(*cap) as f64)
                })
                .sum();
            modular + concave
        })
        .collect();
    SetFunction::dense(p, v).unwrap()
}

/// Non-negative modular part plus weighted squares of block counts.
pub fn random_supermodular(rng: &mut ChaCha8Rng, p: usize) -> SetFunction<f64> {
    let w: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..1.0)).collect();
    let blocks = random_blocks(rng, p, 3);
    let v = (0..1u128 << p)
        .map(|a| {
            let a = Subset(a);
            let modular: f64 = a.iter().map(|j| w[j]).sum();
            let convex: f64 = blocks.iter().map(|(b, c)| c * (a.intersect(*b).len() as f64).powi(2)).sum();
            modular + convex
        })
        .collect();
    SetFunction::dense(p, v).unwrap()
}

pub fn random_labels(rng: &mut ChaCha8Rng, p: usize) -> Vec<Label> {
    (0..p).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()
}

pub fn random_scores(rng: &mut ChaCha8Rng, p: usize, scale: f64) -> Vec<f64> {
    (0..p).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
