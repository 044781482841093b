//! Random-walk Metropolis sampling of the finite-N joint densities.
//!
//! The densities are known only up to normalisation, and the kernels are not
//! symmetric, so projection-DPP samplers do not apply directly. Each chain uses
//! ChaCha8 seeded from `seed` with the chain index as its stream, which makes
//! draws bit-identical across runs and platforms.

mod histogram;
mod io;

pub use histogram::{
    batch_mean_std_error, empirical_rho1, empirical_rho2, predicted_rho1, predicted_rho2, Histogram1, Histogram2,
};
pub use io::{BINARY_MAGIC, BINARY_VERSION};

use crate::error::{domain, Result};
use crate::kernels::{EnsembleSpec, Family};
use crate::special::signed_pow;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Sweeps per chain, burn-in included; one sweep proposes a move for every point.
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
    /// Initial proposal standard deviation (in log-coordinates for Laguerre).
    pub proposal_scale: f64,
    pub seed: u64,
    pub chains: u32,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { steps: 1_010_000, burn_in: 10_000, thin: 5, proposal_scale: 0.2, seed: 0, chains: 4 }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.thin == 0 || self.chains == 0 {
            return domain("steps, thin and chains must be positive");
        }
        if self.burn_in >= self.steps {
            return domain(format!("burn_in ({}) must be below steps ({})", self.burn_in, self.steps));
        }
        if !(self.proposal_scale > 0.0 && self.proposal_scale.is_finite()) {
            return domain("proposal_scale must be positive and finite");
        }
        Ok(())
    }

    /// Kept configurations per chain.
    pub fn kept_per_chain(&self) -> u64 {
        (self.steps - self.burn_in) / self.thin
    }
}

/// Kept configurations in flat storage, one row of N coordinates per draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draws {
    pub n: usize,
    pub chain: Vec<u32>,
    pub step: Vec<u64>,
    pub positions: Vec<f64>,
}

impl Draws {
    pub fn new(n: usize) -> Self {
        Self { n, chain: Vec::new(), step: Vec::new(), positions: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn configuration(&self, i: usize) -> &[f64] {
        &self.positions[i * self.n..(i + 1) * self.n]
    }

    pub fn configurations(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.n.max(1))
    }

    fn push(&mut self, chain: u32, step: u64, config: &[f64]) {
        self.chain.push(chain);
        self.step.push(step);
        let start = self.positions.len();
        self.positions.extend_from_slice(config);
        self.positions[start..].sort_by(f64::total_cmp);
    }

    fn append(&mut self, other: Draws) {
        self.chain.extend(other.chain);
        self.step.extend(other.step);
        self.positions.extend(other.positions);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub spec: EnsembleSpec,
    pub config: ChainConfig,
    /// Accepted fraction of proposals after burn-in, over all chains.
    pub acceptance_rate: f64,
    /// Proposal scale each chain settled on during burn-in.
    pub proposal_scales: Vec<f64>,
    pub draws: Draws,
}

fn log_weight(spec: &EnsembleSpec, x: f64) -> f64 {
    match spec.family {
        Family::Jacobi => spec.alpha * x.ln(),
        Family::Laguerre => spec.alpha * x.ln() - x,
        Family::Hermite => spec.alpha * x.abs().ln() - x * x,
    }
}

fn pair_term(x: f64, xt: f64, y: f64, yt: f64) -> f64 {
    (x - y).abs().ln() + (xt - yt).abs().ln()
}

/// Unnormalised log of ∏ω(x_i) ∏_{i<j}(x_i − x_j)(x_i^θ − x_j^θ). Points outside
/// the interval or coincident points give −∞.
pub fn log_density(spec: &EnsembleSpec, points: &[f64]) -> f64 {
    if points.iter().any(|&x| !spec.contains(x)) {
        return f64::NEG_INFINITY;
    }
    let pw: Vec<f64> = points.iter().map(|&x| signed_pow(x, spec.theta)).collect();
    let mut s: f64 = points.iter().map(|&x| log_weight(spec, x)).sum();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            s += pair_term(points[i], pw[i], points[j], pw[j]);
        }
    }
    if s.is_nan() {
        f64::NEG_INFINITY
    } else {
        s
    }
}

/// log_density after moving point i to `to`, minus log_density before; `powers`
/// holds x_j^θ for the current points.
pub fn log_density_delta(spec: &EnsembleSpec, points: &[f64], powers: &[f64], i: usize, to: f64) -> f64 {
    if !spec.contains(to) {
        return f64::NEG_INFINITY;
    }
    let (from, from_t, to_t) = (points[i], powers[i], signed_pow(to, spec.theta));
    let mut d = log_weight(spec, to) - log_weight(spec, from);
    for j in (0..points.len()).filter(|&j| j != i) {
        d += pair_term(to, to_t, points[j], powers[j]) - pair_term(from, from_t, points[j], powers[j]);
    }
    if d.is_nan() {
        f64::NEG_INFINITY
    } else {
        d
    }
}

/// Folds a real line point into (0,1) by reflection at both ends.
fn reflect_unit(x: f64) -> f64 {
    let y = x.rem_euclid(2.0);
    if y > 1.0 {
        2.0 - y
    } else {
        y
    }
}

const ADAPT_EVERY: u64 = 100;
const TARGET_ACCEPT: (f64, f64) = (0.3, 0.5);

/// Upper bound on the proposal scale: beyond it a reflected or log-scale walk
/// gains nothing (and for flat densities acceptance would never drop).
fn max_scale(family: Family) -> f64 {
    match family {
        Family::Jacobi => 1.0,
        Family::Laguerre => 3.0,
        Family::Hermite => 5.0,
    }
}

/// Deterministic starting configuration well inside the interval.
fn initial_points(spec: &EnsembleSpec) -> Vec<f64> {
    let n = spec.n_points;
    (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            match spec.family {
                Family::Jacobi => u,
                Family::Laguerre => (spec.alpha + 1.0) * (0.2 + 2.0 * u),
                Family::Hermite => (2.0 * u - 1.0) * (n as f64).sqrt(),
            }
        })
        .collect()
}

struct ChainResult {
    draws: Draws,
    accepted: u64,
    proposed: u64,
    scale: f64,
}

fn run_chain(spec: &EnsembleSpec, cfg: &ChainConfig, chain: u32) -> ChainResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::from(chain));
    let n = spec.n_points;
    let mut x = initial_points(spec);
    let mut xt: Vec<f64> = x.iter().map(|&v| signed_pow(v, spec.theta)).collect();
    let mut scale = cfg.proposal_scale.min(max_scale(spec.family));
    let mut draws = Draws::new(n);
    let (mut accepted, mut proposed) = (0u64, 0u64);
    let (mut win_acc, mut win_prop) = (0u64, 0u64);
    for step in 0..cfg.steps {
        let measuring = step >= cfg.burn_in;
        for i in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            let (to, log_q) = match spec.family {
                Family::Jacobi => (reflect_unit(x[i] + scale * z), 0.0),
                // Walk in log x; the Jacobian makes the proposal ratio x'/x.
                Family::Laguerre => {
                    let to = x[i] * (scale * z).exp();
                    (to, scale * z)
                }
                Family::Hermite => (x[i] + scale * z, 0.0),
            };
            let log_a = log_density_delta(spec, &x, &xt, i, to) + log_q;
            let u: f64 = rng.random();
            let ok = log_a >= 0.0 || u.ln() < log_a;
            if ok {
                x[i] = to;
                xt[i] = signed_pow(to, spec.theta);
            }
            if measuring {
                proposed += 1;
                accepted += u64::from(ok);
            } else {
                win_prop += 1;
                win_acc += u64::from(ok);
            }
        }
        if !measuring && (step + 1) % ADAPT_EVERY == 0 {
            let rate = win_acc as f64 / win_prop as f64;
            if rate > TARGET_ACCEPT.1 {
                scale = (scale * 1.25).min(max_scale(spec.family));
            } else if rate < TARGET_ACCEPT.0 {
                scale /= 1.25;
            }
            win_acc = 0;
            win_prop = 0;
        }
        if measuring && (step - cfg.burn_in + 1) % cfg.thin == 0 {
            draws.push(chain, step, &x);
        }
    }
    ChainResult { draws, accepted, proposed, scale }
}

/// Runs `config.chains` independent chains in parallel and merges their draws
/// in chain order.
pub fn sample(spec: &EnsembleSpec, config: &ChainConfig) -> Result<SampleBatch> {
    config.validate()?;
    let results: Vec<ChainResult> = (0..config.chains).into_par_iter().map(|c| run_chain(spec, config, c)).collect();
    let mut draws = Draws::new(spec.n_points);
    let (mut acc, mut prop) = (0u64, 0u64);
    let mut scales = Vec::with_capacity(results.len());
    for r in results {
        acc += r.accepted;
        prop += r.proposed;
        scales.push(r.scale);
        draws.append(r.draws);
    }
    Ok(SampleBatch {
        spec: *spec,
        config: *config,
        acceptance_rate: if prop == 0 { 0.0 } else { acc as f64 / prop as f64 },
        proposal_scales: scales,
        draws,
    })
}
