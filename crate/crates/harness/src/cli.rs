//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nonmodular::decomp::{decompose_with, verify_decomposition, Method, VerifyReport};
use nonmodular::losses::{DeltaReading, LossFamily, Normalization};
use nonmodular::lp::SolveOptions;
use nonmodular::model::WeightMode;
use nonmodular::setfn::{Label, check_structure, SetFunctionFile, StructureReport, DEFAULT_EXHAUSTIVE_CAP};
use nonmodular::trainer::{evaluate, prepare_losses, train_with_losses, SurrogateKind};

use crate::error::{HResult, HarnessError};
use crate::experiments::{
    dice_figure, run_cross_table, run_gap_trace, run_timing, write_dice_figure, write_table,
    write_timing_csv, ExperimentConfig,
};
use crate::io::{ingest, read_json, read_model, read_set_function, write_json, write_jsonl, write_trace};
use crate::synth::synth_generate;

#[derive(Debug, Parser)]
#[command(name = "nonmodular", version, about = "Decompose set-function losses and train with convex surrogates")]
pub struct Cli {
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for every output file.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Experiment configuration (JSON); missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw synthetic train/test bags as JSONL.
    Synth {
        #[arg(long)]
        bags_train: Option<usize>,
        #[arg(long)]
        bags_test: Option<usize>,
        /// Bag size.
        #[arg(long)]
        p: Option<usize>,
    },
    /// Canonical decomposition of a set function file.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        /// Defaults to `<out-dir>/decomposition.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "auto")]
        method: String,
    },
    /// Structural report (sub/supermodularity with witnesses) of a loss.
    Check {
        /// Set function file; alternatively give `--loss` and `--y`.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        loss: LossArgs,
        /// Ground truth as comma-separated ±1 labels.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        y: Vec<Label>,
    },
    /// Train one surrogate with the cutting-plane solver.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        loss: LossArgs,
        #[arg(long, default_value = "b_d")]
        surrogate: SurrogateKind,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Evaluate a trained model on JSONL bags.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated evaluation losses.
        #[arg(long, value_delimiter = ',', default_value = "dice,hamming")]
        losses: Vec<String>,
    },
    /// Train every configured surrogate and evaluate on every configured loss.
    CrossTable,
    /// Per-surrogate convergence traces at a fixed C.
    GapTrace {
        /// JSONL training bags; synthetic bags from the configuration otherwise.
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        loss: LossArgs,
        #[arg(long, value_delimiter = ',', default_value = "b_d,zero_one,s_greedy")]
        surrogates: Vec<SurrogateKind>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Wall time of one loss-augmented inference.
    Timing {
        #[arg(long, value_delimiter = ',', default_value = "10,50,100")]
        p: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "b_d,s_greedy")]
        surrogates: Vec<SurrogateKind>,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        /// Largest p with exact slack inference; 0 forces greedy everywhere.
        #[arg(long)]
        exact_cap: Option<usize>,
        #[command(flatten)]
        loss: LossArgs,
    },
    /// Gain curves of the Dice loss under extra false negatives.
    DiceFigure {
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        p_a: usize,
        #[arg(long, default_value_t = 5)]
        p_b: usize,
    },
}

#[derive(Debug, Args)]
pub struct LossArgs {
    /// dice, hamming, delta1, delta2, delta3 or delta4. Defaults to dice,
    /// or delta1 for `timing`.
    #[arg(long)]
    pub loss: Option<String>,
    /// Cap parameter of Δ2 / Δ4.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Divide Δk by the bag size.
    #[arg(long)]
    pub normalize: Option<bool>,
    /// Clamp negative Δk values at zero.
    #[arg(long)]
    pub clamp: Option<bool>,
    /// Reading of the Δ1/Δ2 formulas: median or verbatim.
    #[arg(long)]
    pub delta_reading: Option<String>,
}

impl LossArgs {
    pub fn family(&self) -> HResult<LossFamily> {
        self.family_or("dice")
    }

    pub fn family_or(&self, default: &str) -> HResult<LossFamily> {
        let name = self.loss.as_deref().unwrap_or(default);
        let mut family = LossFamily::parse(name)?;
        let tweaks = self.alpha.is_some() || self.normalize.is_some() || self.clamp.is_some() || self.delta_reading.is_some();
        match &mut family {
            LossFamily::Delta(d) => {
                if let Some(a) = self.alpha {
                    d.alpha = a;
                }
                if let Some(n) = self.normalize {
                    d.normalization = if n { Normalization::ByTrackLength } else { Normalization::None };
                }
                if let Some(c) = self.clamp {
                    d.clamp_at_zero = c;
                }
                if let Some(r) = &self.delta_reading {
                    d.reading = match r.as_str() {
                        "median" => DeltaReading::Median,
                        "verbatim" => DeltaReading::Verbatim,
                        other => return Err(HarnessError::Validation(format!("unknown Δ reading {other:?}"))),
                    };
                }
            }
            _ if tweaks => {
                return Err(HarnessError::Validation(format!(
                    "--alpha, --normalize, --clamp and --delta-reading only apply to delta losses, not {name}"
                )))
            }
            _ => {}
        }
        Ok(family)
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Per-position weight blocks instead of one shared vector.
    #[arg(long)]
    pub per_position: bool,
    /// Append a constant feature.
    #[arg(long)]
    pub augmented: bool,
}

impl SolverArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        if self.per_position {
            cfg.mode = WeightMode::PerPosition;
        }
        cfg.augmented |= self.augmented;
    }
}

/// What `decompose` writes.
#[derive(Debug, Serialize)]
pub struct DecomposeOutput {
    pub method: Method,
    pub g_star: SetFunctionFile,
    pub f_star: SetFunctionFile,
    /// `Σ_A g*(A)`.
    pub objective: f64,
    pub f_star_nonnegative: bool,
    pub residuals: Residuals,
    /// Exhaustive structural checks; absent above the enumeration cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerifyReport>,
}

#[derive(Debug, Serialize)]
pub struct Residuals {
    pub duality_gap: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub additivity: Option<f64>,
}

fn load_config(cli: &Cli) -> HResult<ExperimentConfig> {
    let mut cfg: ExperimentConfig = match &cli.config {
        Some(path) => read_json(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.synth.seed = seed;
    }
    Ok(cfg)
}

fn out(cli: &Cli, name: &str) -> PathBuf {
    cli.out_dir.join(name)
}

fn print_json<T: Serialize>(value: &T) -> HResult<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

pub fn run(cli: &Cli) -> HResult<()> {
    let mut cfg = load_config(cli)?;
    match &cli.command {
        Command::Synth { bags_train, bags_test, p } => {
            let mut synth = cfg.synth.clone();
            synth.bags_train = bags_train.unwrap_or(synth.bags_train);
            synth.bags_test = bags_test.unwrap_or(synth.bags_test);
            synth.p = p.unwrap_or(synth.p);
            let ds = synth_generate(&synth)?;
            write_jsonl(&out(cli, "train.jsonl"), &ds.train)?;
            write_jsonl(&out(cli, "test.jsonl"), &ds.test)?;
            write_json(&out(cli, "synth_config.json"), &synth)?;
            log::info!("wrote {} train and {} test bags to {}", ds.train.len(), ds.test.len(), cli.out_dir.display());
        }
        Command::Decompose { input, out: dest, method } => {
            let l = read_set_function(input)?;
            let method: Method = method.parse()?;
            let d = decompose_with(&l, method, &SolveOptions::default())?;
            let verification = if l.p() <= DEFAULT_EXHAUSTIVE_CAP {
                Some(verify_decomposition(&d, &l, DEFAULT_EXHAUSTIVE_CAP)?)
            } else {
                None
            };
            let cert = &d.certificate;
            let result = DecomposeOutput {
                method: d.method,
                g_star: SetFunctionFile::from_set_function(&d.g_star, DEFAULT_EXHAUSTIVE_CAP)?,
                f_star: SetFunctionFile::from_set_function(&d.f_star, DEFAULT_EXHAUSTIVE_CAP)?,
                objective: cert.objective * d.objective_scale,
                f_star_nonnegative: d.f_star_nonnegative()?,
                residuals: Residuals {
                    duality_gap: cert.duality_gap(),
                    primal: cert.primal_residual,
                    dual: cert.dual_residual,
                    complementarity: cert.complementarity,
                    additivity: verification.as_ref().map(|v| v.additivity_residual),
                },
                verification,
            };
            write_json(dest.as_deref().unwrap_or(&out(cli, "decomposition.json")), &result)?;
        }
        Command::Check { input, loss, y } => {
            let f = match input {
                Some(path) => read_set_function(path)?,
                None if !y.is_empty() => loss.family()?.instantiate::<f64>(y)?.set_fn,
                None => return Err(HarnessError::Validation("check needs --in or --y".into())),
            };
            let report: StructureReport = check_structure(&f, &1e-9, DEFAULT_EXHAUSTIVE_CAP)?;
            write_json(&out(cli, "check.json"), &report)?;
            print_json(&report)?;
        }
        Command::Train { data, loss, surrogate, c, solver } => {
            solver.apply(&mut cfg);
            cfg.validate()?;
            let samples = non_empty(ingest(data)?, data)?;
            let tcfg = cfg.trainer(*surrogate, *c);
            let targets = prepare_losses(&samples, &loss.family()?, tcfg.kind)?;
            let outcome = train_with_losses(&samples, &targets, &tcfg)?;
            write_json(&out(cli, "model.json"), &outcome.model)?;
            write_trace(&out(cli, "trace.csv"), &outcome.trace)?;
            if let Some(last) = outcome.trace.last() {
                log::info!("{} iterations, gap {:.3e}, max violation {:.3e}", last.iter, last.gap, last.max_violation);
            }
            if outcome.trace.truncated {
                return Err(HarnessError::NonConvergence(format!(
                    "{} stopped at the {}-iteration cap; best model and trace written",
                    tcfg.kind, tcfg.max_iter
                )));
            }
        }
        Command::Eval { model, data, losses } => {
            let m = read_model(model)?;
            let samples = non_empty(ingest(data)?, data)?;
            let families = losses.iter().map(|l| LossFamily::parse(l)).collect::<Result<Vec<_>, _>>()?;
            let summary = evaluate(&m, &samples, &families)?;
            write_json(&out(cli, "eval.json"), &summary)?;
            print_json(&summary)?;
        }
        Command::CrossTable => {
            let table = run_cross_table(&cfg)?;
            write_json(&out(cli, "cross_table_config.json"), &cfg)?;
            write_table(&cli.out_dir, "cross_table", &table)?;
        }
        Command::GapTrace { data, loss, surrogates, c, solver } => {
            solver.apply(&mut cfg);
            cfg.validate()?;
            let samples = match data {
                Some(path) => non_empty(ingest(path)?, path)?,
                None => synth_generate(&cfg.synth_for(0))?.train,
            };
            let runs = run_gap_trace(&samples, &loss.family()?, surrogates, &cfg, *c, Some(&cli.out_dir))?;
            let summary: Vec<_> = runs.into_iter().map(|(s, _)| s).collect();
            write_json(&out(cli, "gap_summary.json"), &summary)?;
        }
        Command::Timing { p, surrogates, repeats, exact_cap, loss } => {
            let rows = run_timing(p, &loss.family_or("delta1")?, surrogates, *repeats, exact_cap.unwrap_or(cfg.exact_cap), cfg.seed)?;
            std::fs::create_dir_all(&cli.out_dir).map_err(|e| HarnessError::io(&cli.out_dir, e))?;
            write_timing_csv(&out(cli, "timing.csv"), &rows)?;
        }
        Command::DiceFigure { m, p_a, p_b } => {
            let points = dice_figure(*m, *p_a, *p_b)?;
            std::fs::create_dir_all(&cli.out_dir).map_err(|e| HarnessError::io(&cli.out_dir, e))?;
            write_dice_figure(&out(cli, "dice_figure.csv"), &points)?;
        }
    }
    Ok(())
}

fn non_empty<T>(v: Vec<T>, path: &Path) -> HResult<Vec<T>> {
    if v.is_empty() {
        return Err(HarnessError::Validation(format!("{}: no bags", path.display())));
    }
    Ok(v)
}
