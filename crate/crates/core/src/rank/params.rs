use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::element::Rank;
use super::seed::{mix, Seed, DOMAIN_JSTAR};

/// Fixed freeze parameter `p`.
pub const FREEZE_P: f64 = 0.007;
/// Default analysis constant `c`.
pub const DEFAULT_C: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("epsilon = {0} is not of the form 2/L for an integer L >= 8")]
    Epsilon(f64),
    #[error("c must be positive and finite, got {0}")]
    C(f64),
    #[error("graph has no edges (max degree 0)")]
    EmptyGraph,
    #[error("K override must be at least 1")]
    K,
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
}

/// Size data the parameters depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphShape {
    pub n: u64,
    pub m: u64,
    pub max_degree: u64,
}

impl GraphShape {
    pub fn of(graph: &crate::graph::Graph) -> Self {
        Self { n: graph.n() as u64, m: graph.m() as u64, max_degree: graph.max_degree() as u64 }
    }
}

/// Parameters of one run of the augmentation process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub epsilon: f64,
    /// Number of rank intervals, `2 / epsilon`.
    pub levels: usize,
    pub c: f64,
    pub p: f64,
    pub d: u64,
    pub k: u64,
    /// `alphas[i - 1]` is `alpha_i` for `i` in `1..=levels + 1`; the last one is 0.
    pub alphas: Vec<f64>,
    /// The augmentation interval, in `1..=levels`.
    pub j_star: usize,
    pub delta: f64,
    pub shape: GraphShape,
    /// `thresholds[i - 1] = floor(alpha_i * 2^64)`, used to place rank values.
    thresholds: Vec<u128>,
}

pub(crate) fn levels_for(epsilon: f64) -> Result<usize, ParamError> {
    if !(epsilon > 0.0 && epsilon <= 0.25) {
        return Err(ParamError::Epsilon(epsilon));
    }
    let l = 2.0 / epsilon;
    let rounded = l.round();
    if (l - rounded).abs() > 1e-9 || rounded < 8.0 {
        return Err(ParamError::Epsilon(epsilon));
    }
    Ok(rounded as usize)
}

/// The default `delta = 2^(-70 / epsilon)`.
pub fn theoretical_delta(epsilon: f64) -> f64 {
    (-70.0 / epsilon).exp2()
}

impl ParamSet {
    /// Derives all parameters. Logarithms are base 2; `D` and `K` are rounded up.
    pub fn derive(shape: GraphShape, epsilon: f64, c: f64, seed: Seed) -> Result<Self, ParamError> {
        let levels = levels_for(epsilon)?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(ParamError::C(c));
        }
        if shape.max_degree == 0 || shape.n < 2 {
            return Err(ParamError::EmptyGraph);
        }
        let log_n = (shape.n as f64).log2();
        let d = ((c * shape.max_degree as f64 * log_n).powf(epsilon).ceil() as u64).max(2);
        let k = ((10.0 * d as f64 * log_n * log_n).ceil() as u64).max(1);
        let mut alphas: Vec<f64> = (0..levels).map(|i| (d as f64).powi(-(i as i32))).collect();
        alphas.push(0.0);
        let j_star = (mix(seed, DOMAIN_JSTAR, &[]) % levels as u64) as usize + 1;
        let mut params = Self {
            epsilon,
            levels,
            c,
            p: FREEZE_P,
            d,
            k,
            alphas,
            j_star,
            delta: theoretical_delta(epsilon),
            shape,
            thresholds: Vec::new(),
        };
        params.thresholds = params.alphas.iter().map(|&a| alpha_threshold(a)).collect();
        Ok(params)
    }

    /// Replaces `K` (test and benchmark configurations).
    pub fn with_k(mut self, k: u64) -> Result<Self, ParamError> {
        if k == 0 {
            return Err(ParamError::K);
        }
        self.k = k;
        Ok(self)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self, ParamError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(ParamError::Delta(delta));
        }
        self.delta = delta;
        Ok(self)
    }

    /// Forces the augmentation interval (tests).
    pub fn with_j_star(mut self, j_star: usize) -> Self {
        assert!((1..=self.levels).contains(&j_star));
        self.j_star = j_star;
        self
    }

    /// `alpha_i` for `i` in `1..=levels + 1`.
    pub fn alpha(&self, i: usize) -> f64 {
        self.alphas[i - 1]
    }

    /// `|T| = m (K + 1)`.
    pub fn t_size(&self) -> u128 {
        self.shape.m as u128 * (self.k as u128 + 1)
    }

    /// Interval index `i` with `alpha_{i+1} |T| < pos <= alpha_i |T|`, for an
    /// integer position `pos` in `1..=|T|`.
    pub fn partition_of_position(&self, pos: u128) -> usize {
        let t = self.t_size() as f64;
        let pos = pos as f64;
        (1..=self.levels)
            .find(|&i| self.alpha(i + 1) * t < pos && pos <= self.alpha(i) * t)
            .expect("position lies in 1..=|T|")
    }

    /// Interval index of a rank, placing its value in `(0, 1]` as
    /// `(value + 1) / 2^64`. Exact integer comparison.
    pub fn partition_of_rank(&self, rank: &Rank) -> usize {
        let x = rank.value as u128 + 1;
        (1..=self.levels)
            .find(|&i| self.thresholds[i] < x && x <= self.thresholds[i - 1])
            .expect("thresholds cover (0, 2^64]")
    }
}

fn alpha_threshold(alpha: f64) -> u128 {
    const TWO_64: f64 = 18_446_744_073_709_551_616.0;
    if alpha >= 1.0 {
        1u128 << 64
    } else {
        (alpha * TWO_64).floor() as u128
    }
}
