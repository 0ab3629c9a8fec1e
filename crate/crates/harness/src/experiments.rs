//! Experiment protocols: cross tables, gap traces, timing and the Dice
//! gain-curve figure data.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nonmodular::losses::{dice_gain_curves, GainPoint, LossFamily};
use nonmodular::model::{LinearModel, Sample, WeightMode};
use nonmodular::trainer::{
    evaluate, loss_augmented_inference, mean_stderr, prepare_losses, train_with_losses, LossSummary, SurrogateKind,
    TrainOutcome, TrainTrace, TrainerConfig,
};

use crate::error::{HResult, HarnessError};
use crate::io::{write_json, write_trace};
use crate::synth::{synth_generate, Dataset, SynthConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub synth: SynthConfig,
    pub train_surrogates: Vec<SurrogateKind>,
    /// Loss the surrogates are built from during training.
    pub train_loss: LossFamily,
    pub eval_losses: Vec<LossFamily>,
    pub c_grid: Vec<f64>,
    pub epsilon: f64,
    pub max_iter: usize,
    pub exact_cap: usize,
    /// Fresh synthetic draws, each with its own seed.
    pub repeats: usize,
    /// Share of the training bags held out to choose `C`.
    pub validation_fraction: f64,
    pub mode: WeightMode,
    pub augmented: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            synth: SynthConfig::default(),
            train_surrogates: vec![SurrogateKind::BD, SurrogateKind::ZeroOne, SurrogateKind::SlackGreedy],
            train_loss: LossFamily::Dice,
            eval_losses: vec![LossFamily::Dice, LossFamily::Hamming],
            c_grid: vec![0.1, 1.0, 10.0],
            epsilon: 1e-3,
            max_iter: 500,
            exact_cap: nonmodular::surrogates::EXACT_SLACK_CAP,
            repeats: 5,
            validation_fraction: 1.0 / 3.0,
            mode: WeightMode::Shared,
            augmented: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> HResult<()> {
        let bad = |m: &str| Err(HarnessError::Validation(m.to_string()));
        if self.train_surrogates.is_empty() {
            return bad("at least one training surrogate is required");
        }
        if self.eval_losses.is_empty() {
            return bad("at least one evaluation loss is required");
        }
        if self.c_grid.is_empty() || self.c_grid.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return bad("C grid must be a non-empty list of positive numbers");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation fraction must lie in (0, 1)");
        }
        self.trainer(SurrogateKind::BD, 1.0).validate()?;
        self.synth.validate()
    }

    pub fn trainer(&self, kind: SurrogateKind, c: f64) -> TrainerConfig {
        TrainerConfig {
            c,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            kind,
            exact_cap: self.exact_cap,
            mode: self.mode,
            augmented: self.augmented,
            ..Default::default()
        }
    }

    /// Synthetic configuration of repeat `r`.
    pub fn synth_for(&self, r: usize) -> SynthConfig {
        SynthConfig { seed: self.seed.wrapping_mul(1_000_003).wrapping_add(r as u64), ..self.synth.clone() }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Splits training bags into a fitting part and a trailing validation part.
pub fn holdout<T: Clone>(data: &[T], fraction: f64) -> (Vec<T>, Vec<T>) {
    let n_val = ((data.len() as f64) * fraction).round() as usize;
    let n_val = n_val.clamp(1.min(data.len()), data.len().saturating_sub(1).max(1.min(data.len())));
    let cut = data.len() - n_val;
    (data[..cut].to_vec(), data[cut..].to_vec())
}

/// Trains one surrogate, failing on truncation.
pub fn train(data: &[Sample<f64>], family: &LossFamily, cfg: &TrainerConfig) -> HResult<TrainOutcome<f64>> {
    let targets = prepare_losses(data, family, cfg.kind)?;
    let out = train_with_losses(data, &targets, cfg)?;
    for (p, how) in &out.trace.dispatch {
        log::info!("{}: slack inference at p={p} is {how}", cfg.kind);
    }
    if out.trace.truncated {
        return Err(HarnessError::NonConvergence(format!(
            "{} did not reach ε={} within {} iterations",
            cfg.kind, cfg.epsilon, cfg.max_iter
        )));
    }
    Ok(out)
}

/// One training run inside a cross table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repeat: usize,
    pub surrogate: SurrogateKind,
    pub chosen_c: f64,
    /// Validation loss (first evaluation loss) per grid value.
    pub validation: Vec<f64>,
    pub iterations: usize,
    pub test: Vec<LossSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// Mean over all test bags of all repeats.
    pub mean: f64,
    pub stderr: f64,
    /// Median over repeats of the per-repeat test mean.
    pub median: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<SurrogateKind>,
    pub columns: Vec<String>,
    /// `cells[row][column]`.
    pub cells: Vec<Vec<Cell>>,
    pub config_hash: String,
    pub runs: Vec<RunRecord>,
}

impl ResultTable {
    pub fn cell(&self, row: SurrogateKind, column: &str) -> Option<&Cell> {
        let r = self.rows.iter().position(|k| *k == row)?;
        let c = self.columns.iter().position(|k| k == column)?;
        Some(&self.cells[r][c])
    }

    pub fn write_csv(&self, path: &Path) -> HResult<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["surrogate".to_string()];
        for c in &self.columns {
            header.extend([format!("{c}_mean"), format!("{c}_stderr"), format!("{c}_median")]);
        }
        w.write_record(&header)?;
        for (row, cells) in self.rows.iter().zip(&self.cells) {
            let mut rec = vec![row.to_string()];
            for c in cells {
                rec.extend([format!("{:.6}", c.mean), format!("{:.6}", c.stderr), format!("{:.6}", c.median)]);
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| HarnessError::io(path, e))
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Chooses `C` by the first evaluation loss on the held-out part (ties go to
/// the smaller `C`), retrains on all training bags, and evaluates on test.
pub fn run_split(ds: &Dataset, kind: SurrogateKind, cfg: &ExperimentConfig, repeat: usize) -> HResult<RunRecord> {
    let (fit, val) = holdout(&ds.train, cfg.validation_fraction);
    let selector = &cfg.eval_losses[..1];
    let mut validation = Vec::with_capacity(cfg.c_grid.len());
    for &c in &cfg.c_grid {
        let out = train(&fit, &cfg.train_loss, &cfg.trainer(kind, c))?;
        validation.push(evaluate(&out.model, &val, selector)?[0].mean);
    }
    let best = (0..validation.len()).fold(0, |b, i| if validation[i] < validation[b] { i } else { b });
    let chosen_c = cfg.c_grid[best];
    let out = train(&ds.train, &cfg.train_loss, &cfg.trainer(kind, chosen_c))?;
    Ok(RunRecord {
        repeat,
        surrogate: kind,
        chosen_c,
        validation,
        iterations: out.trace.iterations(),
        test: evaluate(&out.model, &ds.test, &cfg.eval_losses)?,
    })
}

/// Full cross table over fresh synthetic draws.
pub fn run_cross_table(cfg: &ExperimentConfig) -> HResult<ResultTable> {
    cfg.validate()?;
    let splits = (0..cfg.repeats).map(|r| synth_generate(&cfg.synth_for(r))).collect::<HResult<Vec<_>>>()?;
    run_cross_table_on(&splits, cfg)
}

/// Cross table on given splits.
pub fn run_cross_table_on(splits: &[Dataset], cfg: &ExperimentConfig) -> HResult<ResultTable> {
    if splits.is_empty() {
        return Err(HarnessError::Validation("at least one train/test split is required".into()));
    }
    let mut runs = Vec::new();
    for (r, ds) in splits.iter().enumerate() {
        for &kind in &cfg.train_surrogates {
            let rec = run_split(ds, kind, cfg, r)?;
            log::info!("repeat {r} {kind}: C={} test={:?}", rec.chosen_c, rec.test);
            runs.push(rec);
        }
    }
    let columns: Vec<String> = cfg.eval_losses.iter().map(LossFamily::name).collect();
    let cells = cfg
        .train_surrogates
        .iter()
        .map(|&kind| {
            let mine: Vec<&RunRecord> = runs.iter().filter(|r| r.surrogate == kind).collect();
            (0..columns.len())
                .map(|c| {
                    let n_total: usize = mine.iter().map(|r| r.test[c].n).sum();
                    let mean = mine.iter().map(|r| r.test[c].mean * r.test[c].n as f64).sum::<f64>() / n_total as f64;
                    // Pooled standard error from per-repeat means and variances.
                    let ss: f64 = mine
                        .iter()
                        .map(|r| {
                            let t = &r.test[c];
                            let var = t.stderr.powi(2) * t.n as f64;
                            var * (t.n as f64 - 1.0) + t.n as f64 * (t.mean - mean).powi(2)
                        })
                        .sum();
                    let stderr = if n_total > 1 { (ss / (n_total as f64 - 1.0) / n_total as f64).sqrt() } else { 0.0 };
                    let mut per_repeat: Vec<f64> = mine.iter().map(|r| r.test[c].mean).collect();
                    Cell { mean, stderr, median: median(&mut per_repeat) }
                })
                .collect()
        })
        .collect();
    Ok(ResultTable { rows: cfg.train_surrogates.clone(), columns, cells, config_hash: cfg.hash(), runs })
}

/// Per-surrogate convergence summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub surrogate: SurrogateKind,
    pub iterations: usize,
    pub iterations_to_eps: Option<usize>,
    pub final_gap: f64,
    pub final_max_violation: f64,
    pub min_gap: f64,
    pub trace_file: Option<PathBuf>,
}

/// Trains each surrogate once with a fixed `C`, optionally writing one trace
/// CSV per surrogate into `out_dir`.
pub fn run_gap_trace(
    data: &[Sample<f64>],
    family: &LossFamily,
    surrogates: &[SurrogateKind],
    cfg: &ExperimentConfig,
    c: f64,
    out_dir: Option<&Path>,
) -> HResult<Vec<(GapSummary, TrainTrace)>> {
    surrogates
        .iter()
        .map(|&kind| {
            let tcfg = cfg.trainer(kind, c);
            let out = train(data, family, &tcfg)?;
            let trace = out.trace;
            let trace_file = match out_dir {
                Some(dir) => {
                    let path = dir.join(format!("trace_{kind}.csv"));
                    write_trace(&path, &trace)?;
                    Some(path)
                }
                None => None,
            };
            let last = trace.last().expect("at least one iteration");
            let summary = GapSummary {
                surrogate: kind,
                iterations: trace.iterations(),
                iterations_to_eps: trace.iterations_to(tcfg.epsilon),
                final_gap: last.gap,
                final_max_violation: last.max_violation,
                min_gap: trace.rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min),
                trace_file,
            };
            Ok((summary, trace))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub p: usize,
    pub surrogate: SurrogateKind,
    pub dispatch: String,
    pub mean_seconds: f64,
    pub stderr_seconds: f64,
    pub median_seconds: f64,
}

/// Wall time of one loss-augmented inference per `(p, surrogate)` on random
/// bags and random weights, with `repeats` timed calls each.
pub fn run_timing(
    p_grid: &[usize],
    family: &LossFamily,
    surrogates: &[SurrogateKind],
    repeats: usize,
    exact_cap: usize,
    seed: u64,
) -> HResult<Vec<TimingRow>> {
    if repeats == 0 {
        return Err(HarnessError::Validation("timing needs at least one repeat".into()));
    }
    if p_grid.is_empty() || surrogates.is_empty() {
        return Err(HarnessError::Validation("timing needs a non-empty p grid and surrogate list".into()));
    }
    let mut rows = Vec::new();
    for &p in p_grid {
        let synth = SynthConfig { seed: seed.wrapping_add(p as u64), bags_train: repeats, bags_test: 0, p, ..Default::default() };
        let data = synth_generate(&synth)?.train;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p as u64);
        let mut model = LinearModel::zeros(WeightMode::Shared, data[0].dim(), None, false)?;
        for &kind in surrogates {
            let tcfg = TrainerConfig { kind, exact_cap, ..Default::default() };
            let targets = prepare_losses(&data, family, kind)?;
            let mut times = Vec::with_capacity(repeats);
            for (s, t) in data.iter().zip(&targets) {
                model.w = (0..model.w.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let start = Instant::now();
                let aug = loss_augmented_inference(&model, s, t, kind, tcfg.inference(), &0.0)?;
                times.push(start.elapsed().as_secs_f64());
                std::hint::black_box(aug);
            }
            let (mean, stderr) = mean_stderr(&times);
            rows.push(TimingRow {
                p,
                surrogate: kind,
                dispatch: tcfg.dispatch(p).to_string(),
                mean_seconds: mean,
                stderr_seconds: stderr,
                median_seconds: median(&mut times),
            });
        }
    }
    Ok(rows)
}

pub fn write_timing_csv(path: &Path, rows: &[TimingRow]) -> HResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Gain curves of the Dice loss as CSV rows `n_a,a,b,a_minus_b`.
pub fn dice_figure(m: usize, p_a: usize, p_b: usize) -> HResult<Vec<GainPoint>> {
    if m < 3 {
        return Err(HarnessError::Validation(format!("the gain figure needs m >= 3, got {m}")));
    }
    Ok(dice_gain_curves(m, p_a, p_b, 1..=m - 2)?)
}

pub fn write_dice_figure(path: &Path, points: &[GainPoint]) -> HResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n_a", "a", "b", "a_minus_b"])?;
    for pt in points {
        w.write_record([pt.n_a.to_string(), pt.a.to_string(), pt.b.to_string(), (pt.a - pt.b).to_string()])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Writes a table as `<stem>.csv` and `<stem>.json`.
pub fn write_table(dir: &Path, stem: &str, table: &ResultTable) -> HResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    table.write_csv(&dir.join(format!("{stem}.csv")))?;
    write_json(&dir.join(format!("{stem}.json")), table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holdout_takes_a_third() {
        let v: Vec<usize> = (0..200).collect();
        let (a, b) = holdout(&v, 1.0 / 3.0);
        assert_eq!((a.len(), b.len()), (133, 67));
        assert_eq!(b[0], 133);
    }

    #[test]
    fn config_hash_is_stable() {
        let a = ExperimentConfig::default();
        assert_eq!(a.hash(), a.clone().hash());
        let b = ExperimentConfig { seed: 1, ..Default::default() };
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn timing_rejects_zero_repeats() {
        assert!(matches!(
            run_timing(&[10], &LossFamily::Dice, &[SurrogateKind::BD], 0, 20, 0),
            Err(HarnessError::Validation(_))
        ));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
