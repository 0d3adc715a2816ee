//! Browser bindings for the demo page in `www/`.
//!
//! Each exported function is a thin wrapper over a plain Rust function that
//! returns `Result<_, String>`, so the logic is testable natively.

use wasm_bindgen::prelude::*;

use tracerec::eval::{edit_error, hamming_error, trial_input, trial_traces, Algorithm};
use tracerec::graph::{build_edit_graph, forward_potentials};
use tracerec::seq::count_ratio;
use tracerec::single::posterior_single;
use tracerec::{BigCount, BitSeq, GradAscentConfig, PriorVec};

/// Exact MAP is offered only up to these sizes in the page.
pub const EXACT_MAX_N: usize = 60;
pub const EXACT_MAX_T: usize = 3;

fn parse(s: &str) -> Result<BitSeq, String> {
    BitSeq::parse_binary(s.trim()).map_err(|e| e.to_string())
}

fn parse_traces(text: &str) -> Result<Vec<BitSeq>, String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(parse).collect()
}

/// `Pr(X_i = 1 | trace)` for each position under uniform priors.
pub fn posterior_profile_impl(trace: &str, n: usize) -> Result<Vec<f64>, String> {
    let y = parse(trace)?;
    posterior_single(&PriorVec::uniform(n), &y)
        .map(|q| q.into_inner())
        .map_err(|e| e.to_string())
}

/// Fraction of origin-to-destination edit-graph paths of each length, for
/// lengths `0..=Σ|y_j|`.
pub fn path_length_distribution_impl(traces: &str) -> Result<Vec<f64>, String> {
    let traces = parse_traces(traces)?;
    let g = build_edit_graph(&traces).map_err(|e| e.to_string())?;
    let cap = traces.iter().map(BitSeq::len).sum();
    let counts = forward_potentials(&g, cap).at(g.destination()).to_dense(cap);
    let total: BigCount = counts.iter().sum();
    Ok(counts.iter().map(|c| count_ratio(c, &total)).collect())
}

/// One simulated trial and every applicable estimator's result.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Comparison {
    input: String,
    traces: Vec<String>,
    rows: Vec<(String, String, f64, f64)>,
}

#[wasm_bindgen]
impl Comparison {
    #[wasm_bindgen(getter)]
    pub fn input(&self) -> String {
        self.input.clone()
    }

    /// Traces, one per line; an empty trace is shown as `-`.
    #[wasm_bindgen(getter)]
    pub fn traces(&self) -> String {
        self.traces.join("\n")
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn algorithm(&self, i: usize) -> String {
        self.rows[i].0.clone()
    }

    pub fn estimate(&self, i: usize) -> String {
        self.rows[i].1.clone()
    }

    pub fn hamming(&self, i: usize) -> f64 {
        self.rows[i].2
    }

    pub fn edit(&self, i: usize) -> f64 {
        self.rows[i].3
    }
}

pub fn compare_impl(n: usize, delta: f64, t: usize, seed: u64) -> Result<Comparison, String> {
    if !(0.0..1.0).contains(&delta) {
        return Err(format!("deletion probability must be in [0, 1), got {delta}"));
    }
    if n == 0 || t == 0 {
        return Err("n and t must be positive".into());
    }
    let x = trial_input(seed, 0, n);
    let traces = trial_traces(seed, 0, 0, &x, delta, t);
    let grad = GradAscentConfig::default();
    let mut algos = vec![
        Algorithm::SmapSeq,
        Algorithm::IndComb,
        Algorithm::GradAsc,
        Algorithm::Bma,
        Algorithm::Smap1,
        Algorithm::CoordSwitch,
    ];
    if n <= EXACT_MAX_N && t <= EXACT_MAX_T {
        algos.insert(0, Algorithm::SmapExact);
    }
    let mut rows = Vec::new();
    for algo in algos {
        // an estimator may reject a trace set (e.g. contradictory full-length traces)
        let Ok(xhat) = algo.run(n, &traces, &grad) else {
            continue;
        };
        let h = hamming_error(&x, &xhat).map_err(|e| e.to_string())?;
        let d = edit_error(&x, &xhat).map_err(|e| e.to_string())?;
        rows.push((algo.id().to_string(), xhat.to_string(), h, d));
    }
    let show = |s: &BitSeq| if s.is_empty() { "-".to_string() } else { s.to_string() };
    Ok(Comparison {
        input: x.to_string(),
        traces: traces.iter().map(show).collect(),
        rows,
    })
}

#[wasm_bindgen]
pub fn posterior_profile(trace: &str, n: usize) -> Result<Vec<f64>, JsError> {
    posterior_profile_impl(trace, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn path_length_distribution(traces: &str) -> Result<Vec<f64>, JsError> {
    path_length_distribution_impl(traces).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn compare(n: usize, delta: f64, t: usize, seed: u64) -> Result<Comparison, JsError> {
    compare_impl(n, delta, t, seed).map_err(|e| JsError::new(&e))
}
