//! Error metrics and the Monte-Carlo benchmark harness.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bma::bma;
use crate::channel::{check_delta, transmit};
use crate::error::{Error, Result};
use crate::multi::{
    grad_ascent_traces, independent_combination, ml_exhaustive_traces, smap_exact, smap_sequential,
    ML_TRACES_MAX_N,
};
use crate::relaxed::PriorVec;
use crate::seq::BitSeq;
use crate::single::{coordinate_switch, posterior_single, GradAscentConfig};

/// Fraction of positions where `x` and `xhat` differ.
pub fn hamming_error(x: &BitSeq, xhat: &BitSeq) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: xhat.len(),
        });
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    let d = x.symbols().iter().zip(xhat.symbols()).filter(|(a, b)| a != b).count();
    Ok(d as f64 / x.len() as f64)
}

/// Levenshtein distance divided by `|x|`.
pub fn edit_error(x: &BitSeq, xhat: &BitSeq) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyReference);
    }
    let d = strsim::generic_levenshtein(&x.symbols().to_vec(), &xhat.symbols().to_vec());
    Ok(d as f64 / x.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    SmapExact,
    SmapSeq,
    IndComb,
    GradAsc,
    Bma,
    MlExhaustive,
    /// Single-trace posterior of the first trace.
    Smap1,
    /// Coordinate switch on the first trace from the interior point.
    CoordSwitch,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::SmapExact,
        Algorithm::SmapSeq,
        Algorithm::IndComb,
        Algorithm::GradAsc,
        Algorithm::Bma,
        Algorithm::MlExhaustive,
        Algorithm::Smap1,
        Algorithm::CoordSwitch,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::SmapExact => "smapexact",
            Algorithm::SmapSeq => "smapseq",
            Algorithm::IndComb => "indcomb",
            Algorithm::GradAsc => "gradasc",
            Algorithm::Bma => "bma",
            Algorithm::MlExhaustive => "mlexhaustive",
            Algorithm::Smap1 => "smap1",
            Algorithm::CoordSwitch => "coordswitch",
        }
    }

    /// Runs the estimator. Single-trace estimators use the first trace;
    /// exhaustive ML returns the lexicographically smallest maximiser.
    pub fn run(self, n: usize, traces: &[BitSeq], grad: &GradAscentConfig) -> Result<BitSeq> {
        let first = || traces.first().ok_or(Error::NoTraces);
        match self {
            Algorithm::SmapExact => Ok(smap_exact(n, traces)?.1),
            Algorithm::SmapSeq => smap_sequential(n, traces),
            Algorithm::IndComb => independent_combination(n, traces),
            Algorithm::GradAsc => grad_ascent_traces(n, traces, grad),
            Algorithm::Bma => Ok(bma(n, traces)),
            Algorithm::MlExhaustive => {
                let set = ml_exhaustive_traces(n, traces)?;
                Ok(set
                    .argmax
                    .into_iter()
                    .next()
                    .unwrap_or_else(|| BitSeq::from_symbols(vec![1; n])))
            }
            Algorithm::Smap1 => Ok(posterior_single(&PriorVec::uniform(n), first()?)?.threshold()),
            Algorithm::CoordSwitch => coordinate_switch(&PriorVec::uniform(n), first()?),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.id() == s.trim())
            .ok_or_else(|| Error::UnknownAlgorithm(s.trim().to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub deltas: Vec<f64>,
    pub ts: Vec<usize>,
    pub trials: usize,
    pub algos: Vec<Algorithm>,
    pub seed: u64,
    /// Cells above these sizes skip exact MAP.
    pub exact_max_n: usize,
    pub exact_max_t: usize,
    pub grad: GradAscentConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 20,
            deltas: vec![0.1],
            ts: vec![2],
            trials: 100,
            algos: vec![Algorithm::Bma],
            seed: 0,
            exact_max_n: 40,
            exact_max_t: 3,
            grad: GradAscentConfig::default(),
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Config(format!("bad value {s:?} for {key}")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

impl ExperimentConfig {
    /// Parses `key = value` lines. Lists are comma separated; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let (mut eps, mut iters, mut tol) = (cfg.grad.epsilon, cfg.grad.max_iters, cfg.grad.conv_rel_tol);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim();
            match key {
                "n" => cfg.n = parse_one(key, value)?,
                "deltas" | "delta" => cfg.deltas = parse_list(key, value)?,
                "ts" | "t" => cfg.ts = parse_list(key, value)?,
                "trials" => cfg.trials = parse_one(key, value)?,
                "algos" | "algo" => {
                    cfg.algos = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(Algorithm::from_str)
                        .collect::<Result<_>>()?
                }
                "seed" => cfg.seed = parse_one(key, value)?,
                "exact_max_n" => cfg.exact_max_n = parse_one(key, value)?,
                "exact_max_t" => cfg.exact_max_t = parse_one(key, value)?,
                "epsilon" => eps = parse_one(key, value)?,
                "max_iters" => iters = parse_one(key, value)?,
                "conv_rel_tol" => tol = parse_one(key, value)?,
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }
        cfg.grad = GradAscentConfig::new(eps, iters, tol)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        for &d in &self.deltas {
            check_delta(d)?;
        }
        if self.ts.contains(&0) {
            return Err(Error::NoTraces);
        }
        if self.deltas.is_empty() || self.ts.is_empty() || self.algos.is_empty() {
            return Err(Error::Config("deltas, ts and algos must be nonempty".into()));
        }
        Ok(())
    }

    /// Why `algo` cannot run at trace count `t`, if it cannot.
    pub fn skip_reason(&self, algo: Algorithm, t: usize) -> Option<String> {
        match algo {
            Algorithm::SmapExact if self.n > self.exact_max_n || t > self.exact_max_t => Some(format!(
                "exact MAP capped at n <= {}, t <= {}",
                self.exact_max_n, self.exact_max_t
            )),
            Algorithm::MlExhaustive if self.n > ML_TRACES_MAX_N => {
                Some(format!("exhaustive ML capped at n <= {ML_TRACES_MAX_N}"))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub algo: Algorithm,
    pub n: usize,
    pub delta: f64,
    pub t: usize,
    pub trials: usize,
    pub hamming_error_rate: f64,
    pub edit_error_rate: f64,
    pub stderr_hamming: f64,
    pub stderr_edit: f64,
    pub seed: u64,
    pub wall_time_ms: f64,
}

/// Per-trial outcome of every algorithm that ran in a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub input: BitSeq,
    pub traces: Vec<BitSeq>,
    pub trace_hash: u64,
    /// `(hamming, edit, seconds)` per algorithm, in cell order.
    pub errors: Vec<(f64, f64, f64)>,
}

fn mix(seed: u64, cell: u64) -> u64 {
    seed ^ (cell + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// The input of trial `trial`; identical across cells.
pub fn trial_input(seed: u64, trial: usize, n: usize) -> BitSeq {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    BitSeq::from_symbols((0..n).map(|_| rng.gen_range(0..2)).collect())
}

/// The traces of trial `trial` in cell `cell`.
pub fn trial_traces(seed: u64, cell: u64, trial: usize, x: &BitSeq, delta: f64, t: usize) -> Vec<BitSeq> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, cell));
    rng.set_stream(trial as u64);
    (0..t).map(|_| transmit(x, delta, &mut rng)).collect()
}

fn hash_traces(traces: &[BitSeq]) -> u64 {
    let mut h = DefaultHasher::new();
    traces.hash(&mut h);
    h.finish()
}

/// Runs every trial of one `(delta, t)` cell; all `algos` see the same traces.
pub fn run_cell(
    cfg: &ExperimentConfig,
    cell: u64,
    delta: f64,
    t: usize,
    algos: &[Algorithm],
) -> Result<Vec<TrialRecord>> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let x = trial_input(cfg.seed, trial, cfg.n);
            let traces = trial_traces(cfg.seed, cell, trial, &x, delta, t);
            let trace_hash = hash_traces(&traces);
            log::debug!("delta={delta} t={t} trial={trial} traces={trace_hash:016x}");
            let mut errors = Vec::with_capacity(algos.len());
            for &algo in algos {
                let start = Instant::now();
                let xhat = algo.run(cfg.n, &traces, &cfg.grad)?;
                let secs = start.elapsed().as_secs_f64();
                errors.push((hamming_error(&x, &xhat)?, edit_error(&x, &xhat)?, secs));
            }
            Ok(TrialRecord {
                trial,
                input: x,
                traces,
                trace_hash,
                errors,
            })
        })
        .collect()
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Summarises the trial records of one cell into one row per algorithm.
pub fn summarize(cfg: &ExperimentConfig, delta: f64, t: usize, algos: &[Algorithm], records: &[TrialRecord]) -> Vec<ResultRow> {
    algos
        .iter()
        .enumerate()
        .map(|(a, &algo)| {
            let ham: Vec<f64> = records.iter().map(|r| r.errors[a].0).collect();
            let edit: Vec<f64> = records.iter().map(|r| r.errors[a].1).collect();
            let secs: f64 = records.iter().map(|r| r.errors[a].2).sum();
            let (h, sh) = mean_and_stderr(&ham);
            let (e, se) = mean_and_stderr(&edit);
            ResultRow {
                algo,
                n: cfg.n,
                delta,
                t,
                trials: records.len(),
                hamming_error_rate: h,
                edit_error_rate: e,
                stderr_hamming: sh,
                stderr_edit: se,
                seed: cfg.seed,
                wall_time_ms: secs * 1e3,
            }
        })
        .collect()
}

/// Every `(delta, t, algo)` cell of the experiment. Cells an algorithm
/// cannot run are skipped with a logged reason.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &delta in &cfg.deltas {
        for &t in &cfg.ts {
            let algos: Vec<Algorithm> = cfg
                .algos
                .iter()
                .copied()
                .filter(|&a| match cfg.skip_reason(a, t) {
                    Some(reason) => {
                        log::warn!("skipping {a} at n={} delta={delta} t={t}: {reason}", cfg.n);
                        false
                    }
                    None => true,
                })
                .collect();
            if !algos.is_empty() {
                let records = run_cell(cfg, cell, delta, t, &algos)?;
                rows.extend(summarize(cfg, delta, t, &algos, &records));
            }
            cell += 1;
        }
    }
    Ok(rows)
}

/// Six significant digits, shortest form.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    format!("{rounded}")
}

pub const CSV_HEADER: [&str; 11] = [
    "algo",
    "n",
    "delta",
    "t",
    "trials",
    "hamming_error_rate",
    "edit_error_rate",
    "stderr_hamming",
    "stderr_edit",
    "seed",
    "wall_time_ms",
];

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.algo.id().to_string(),
            r.n.to_string(),
            sig6(r.delta),
            r.t.to_string(),
            r.trials.to_string(),
            sig6(r.hamming_error_rate),
            sig6(r.edit_error_rate),
            sig6(r.stderr_hamming),
            sig6(r.stderr_edit),
            r.seed.to_string(),
            sig6(r.wall_time_ms),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}
