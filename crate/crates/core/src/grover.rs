//! Grover search as used by the quantum slowdown: success probabilities, the
//! random-iteration guarantee and the time-bound cost.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroverError {
    #[error("need 1 <= marked <= n, got n={n} marked={marked}")]
    Instance { n: u64, marked: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchInstance {
    pub n: u64,
    pub marked: u64,
    pub theta: f64,
}

impl SearchInstance {
    pub fn new(n: u64, marked: u64) -> Result<Self, GroverError> {
        if marked == 0 || marked > n {
            return Err(GroverError::Instance { n, marked });
        }
        let theta = (marked as f64 / n as f64).sqrt().asin();
        Ok(SearchInstance { n, marked, theta })
    }
}

/// sin²((2j+1)θ): probability of measuring a marked item after j iterations.
pub fn success_probability(inst: &SearchInstance, j: u64) -> f64 {
    ((2 * j + 1) as f64 * inst.theta).sin().powi(2)
}

/// Marked mass after j iterations of oracle reflection plus inversion about
/// the mean, tracked on the (marked, unmarked) amplitude pair.
pub fn simulate_grover(inst: &SearchInstance, j: u64) -> f64 {
    let n = inst.n as f64;
    let m = inst.marked as f64;
    let mut good = 1.0 / n.sqrt();
    let mut bad = good;
    for _ in 0..j {
        good = -good;
        let mean = (m * good + (n - m) * bad) / n;
        good = 2.0 * mean - good;
        bad = 2.0 * mean - bad;
    }
    m * good * good
}

/// K = ceil(1/sin(2/√N)) iterations are drawn uniformly from 0..K.
pub fn random_iteration_count(n: u64) -> u64 {
    (1.0 / (2.0 / (n as f64).sqrt()).sin()).ceil().max(1.0) as u64
}

/// Average success when j is uniform in {0, …, K−1}.
pub fn random_iteration_success(inst: &SearchInstance) -> f64 {
    let k = random_iteration_count(inst.n);
    (0..k).map(|j| success_probability(inst, j)).sum::<f64>() / k as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostInput {
    pub m: f64,
    pub t: f64,
    pub s: f64,
}

/// 2^{m/2}·(t·s² + m).
pub fn grover_cost(input: &CostInput) -> f64 {
    2f64.powf(input.m / 2.0) * (input.t * input.s * input.s + input.m)
}

/// Exponent of n for Grover over x·log n witness bits on an n^d verifier.
pub fn search_exponent(d: f64, x: f64) -> f64 {
    d + x / 2.0
}

/// Cost exponent of one Grover slowdown with guess length x on an n^d class.
pub fn grodown_exponent(d: f64, x: f64) -> f64 {
    x.max(d - x / 2.0)
}

pub fn grodown_argmin(d: f64) -> f64 {
    2.0 * d / 3.0
}
