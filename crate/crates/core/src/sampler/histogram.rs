//! Empirical one- and two-point correlation functions and their determinantal
//! predictions.

use super::SampleBatch;
use crate::error::{domain, Result};
use crate::kernels::{weight, FiniteKernel};
use crate::numerics::{integrate_interval, integrate_weighted_power, rational_denominator, GaussRule, SeriesConfig};
use serde::{Deserialize, Serialize};

/// Estimate of ρ₁ on equal-width bins. Densities are counts / (draws · width),
/// so the histogram integrates to the mean number of points inside the range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram1 {
    pub lo: f64,
    pub hi: f64,
    pub centers: Vec<f64>,
    pub counts: Vec<u64>,
    pub densities: Vec<f64>,
    /// Poisson approximation sqrt(count) / (draws · width).
    pub std_errors: Vec<f64>,
    pub draws: usize,
}

impl Histogram1 {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.centers.len() as f64
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let w = self.width();
        (self.lo + w * i as f64, self.lo + w * (i + 1) as f64)
    }

    /// Integral of the histogram with its Poisson standard error.
    pub fn total_mass(&self) -> (f64, f64) {
        let w = self.width();
        let mass = self.densities.iter().sum::<f64>() * w;
        let var: f64 = self.std_errors.iter().map(|s| (s * w).powi(2)).sum();
        (mass, var.sqrt())
    }
}

/// Estimate of ρ₂ on a square grid of bins over range², from ordered pairs of
/// distinct points. Row index is the first coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2 {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
    pub centers: Vec<f64>,
    pub counts: Vec<u64>,
    pub densities: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub draws: usize,
}

impl Histogram2 {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.bins + j
    }
}

fn check_range(bins: usize, range: (f64, f64)) -> Result<()> {
    if !(range.0 < range.1) || !range.0.is_finite() || !range.1.is_finite() {
        return domain(format!("histogram range [{}, {}] must be finite and non-empty", range.0, range.1));
    }
    if bins < 5 {
        return domain(format!("need at least 5 bins (got {bins})"));
    }
    Ok(())
}

fn bin_of(x: f64, lo: f64, hi: f64, bins: usize) -> Option<usize> {
    if x < lo || x >= hi {
        return None;
    }
    Some((((x - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1))
}

fn centers(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let w = (hi - lo) / bins as f64;
    (0..bins).map(|i| lo + w * (i as f64 + 0.5)).collect()
}

pub fn empirical_rho1(batch: &SampleBatch, bins: usize, range: (f64, f64)) -> Result<Histogram1> {
    check_range(bins, range)?;
    let draws = batch.draws.len();
    if draws == 0 {
        return domain("sample batch is empty");
    }
    let (lo, hi) = range;
    let mut counts = vec![0u64; bins];
    for &x in &batch.draws.positions {
        if let Some(b) = bin_of(x, lo, hi, bins) {
            counts[b] += 1;
        }
    }
    let norm = draws as f64 * (hi - lo) / bins as f64;
    Ok(Histogram1 {
        lo,
        hi,
        centers: centers(lo, hi, bins),
        densities: counts.iter().map(|&c| c as f64 / norm).collect(),
        std_errors: counts.iter().map(|&c| (c as f64).sqrt() / norm).collect(),
        counts,
        draws,
    })
}

pub fn empirical_rho2(batch: &SampleBatch, bins: usize, range: (f64, f64)) -> Result<Histogram2> {
    check_range(bins, range)?;
    if bins > 15 {
        return domain(format!("at most 15 bins per axis for two-point histograms (got {bins})"));
    }
    let draws = batch.draws.len();
    if draws == 0 {
        return domain("sample batch is empty");
    }
    let (lo, hi) = range;
    let mut counts = vec![0u64; bins * bins];
    let mut idx = Vec::with_capacity(batch.draws.n);
    for c in batch.draws.configurations() {
        idx.clear();
        idx.extend(c.iter().map(|&x| bin_of(x, lo, hi, bins)));
        for (a, ba) in idx.iter().enumerate() {
            for (b, bb) in idx.iter().enumerate() {
                if let (true, Some(i), Some(j)) = (a != b, ba, bb) {
                    counts[i * bins + j] += 1;
                }
            }
        }
    }
    let w = (hi - lo) / bins as f64;
    let norm = draws as f64 * w * w;
    Ok(Histogram2 {
        lo,
        hi,
        bins,
        centers: centers(lo, hi, bins),
        densities: counts.iter().map(|&c| c as f64 / norm).collect(),
        std_errors: counts.iter().map(|&c| (c as f64).sqrt() / norm).collect(),
        counts,
        draws,
    })
}

/// Bin averages of ω(x)K_N(x,x) for the bins of `hist`.
pub fn predicted_rho1(kernel: &FiniteKernel, hist: &Histogram1) -> Result<Vec<f64>> {
    let spec = *kernel.spec();
    let cfg = SeriesConfig { rel_tol: 1e-10, ..Default::default() };
    let rho = |x: f64| weight(&spec, x).and_then(|w| Ok(w * kernel.eval(x, x)?)).unwrap_or(f64::NAN);
    (0..hist.centers.len())
        .map(|i| {
            let (a, b) = hist.edges(i);
            let (a, b) = (clip(&spec, a), clip(&spec, b));
            if a >= b {
                return Ok(0.0);
            }
            let v = if a < 0.0 && b > 0.0 {
                from_origin(&spec, &rho, a, &cfg)? + from_origin(&spec, &rho, b, &cfg)?
            } else if a == 0.0 || b == 0.0 {
                from_origin(&spec, &rho, a + b, &cfg)?
            } else {
                integrate_interval(&rho, a, b, &cfg)?
            };
            Ok(v / hist.width())
        })
        .collect()
}

/// ∫ ρ between 0 and c (either sign). Near the origin ρ behaves like |x|^α
/// times a function of |x|^θ, so |x|^α goes into the rule's weight and a
/// rational θ is resolved by substitution.
fn from_origin(spec: &crate::kernels::EnsembleSpec, rho: &dyn Fn(f64) -> f64, c: f64, cfg: &SeriesConfig) -> Result<f64> {
    let h = c.abs();
    let q = rational_denominator(spec.theta).unwrap_or(1);
    let a = spec.alpha;
    let v = integrate_weighted_power(|t| if t == 0.0 { 0.0 } else { rho(c * t) / t.powf(a) }, a, q, cfg)?;
    Ok(h * v)
}

/// Restricts bin edges to the closure of the ensemble interval.
fn clip(spec: &crate::kernels::EnsembleSpec, x: f64) -> f64 {
    use crate::kernels::Family;
    match spec.family {
        Family::Jacobi => x.clamp(0.0, 1.0),
        Family::Laguerre => x.max(0.0),
        Family::Hermite => x,
    }
}

const RHO2_NODES: usize = 8;

/// Bin averages of ω(x)ω(y)det[K(x_i,x_j)] over the cells of `hist`, by a
/// tensor Gauss–Legendre rule in each cell.
pub fn predicted_rho2(kernel: &FiniteKernel, hist: &Histogram2) -> Result<Vec<f64>> {
    let spec = *kernel.spec();
    let rule = GaussRule::jacobi_unit(0.0, RHO2_NODES)?;
    let w = hist.width();
    let mut out = vec![0.0; hist.bins * hist.bins];
    for i in 0..hist.bins {
        for j in 0..=i {
            let (xa, xb) = (clip(&spec, hist.lo + w * i as f64), clip(&spec, hist.lo + w * (i + 1) as f64));
            let (ya, yb) = (clip(&spec, hist.lo + w * j as f64), clip(&spec, hist.lo + w * (j + 1) as f64));
            let mut s = 0.0;
            for (tx, wx) in rule.nodes.iter().zip(&rule.weights) {
                for (ty, wy) in rule.nodes.iter().zip(&rule.weights) {
                    let x = xa + (xb - xa) * tx;
                    let y = ya + (yb - ya) * ty;
                    s += wx * wy * kernel.correlation(&[x, y])?;
                }
            }
            let v = s * (xb - xa) * (yb - ya) / (w * w);
            out[hist.index(i, j)] = v;
            out[hist.index(j, i)] = v;
        }
    }
    Ok(out)
}

/// Standard error of the mean of a correlated series from `batches` contiguous batch means.
pub fn batch_mean_std_error(x: &[f64], batches: usize) -> f64 {
    let len = x.len() / batches.max(1);
    if batches < 2 || len == 0 {
        return f64::NAN;
    }
    let means: Vec<f64> = x.chunks_exact(len).take(batches).map(|c| c.iter().sum::<f64>() / len as f64).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::super::{sample, ChainConfig};
    use super::*;
    use crate::kernels::{EnsembleSpec, Family};

    fn batch(family: Family, alpha: f64, theta: f64, n: usize, steps: u64, seed: u64) -> SampleBatch {
        let spec = EnsembleSpec::new(family, alpha, theta, n).unwrap();
        let cfg = ChainConfig { steps, burn_in: 2000, thin: 5, proposal_scale: 0.5, seed, chains: 4 };
        sample(&spec, &cfg).unwrap()
    }

    #[test]
    fn input_checks() {
        let b = batch(Family::Jacobi, 0.0, 1.0, 2, 2100, 1);
        assert!(empirical_rho1(&b, 4, (0.0, 1.0)).is_err());
        assert!(empirical_rho1(&b, 10, (1.0, 0.0)).is_err());
        assert!(empirical_rho2(&b, 16, (0.0, 1.0)).is_err());
        let mut empty = b.clone();
        empty.draws = super::super::Draws::new(2);
        assert!(empirical_rho1(&empty, 10, (0.0, 1.0)).is_err());
    }

    #[test]
    fn laguerre_single_point_is_exponential() {
        let b = batch(Family::Laguerre, 0.0, 1.0, 1, 202_000, 5);
        let h = empirical_rho1(&b, 10, (0.0, 5.0)).unwrap();
        for i in 0..10 {
            let (a, c) = h.edges(i);
            let want = ((-a as f64).exp() - (-c as f64).exp()) / h.width();
            // Successive thinned draws are still mildly correlated; allow for it.
            assert!((h.densities[i] - want).abs() < 3.0 * 1.5 * h.std_errors[i], "bin {i}: {} vs {want}", h.densities[i]);
        }
    }

    #[test]
    fn two_point_histogram_is_symmetric_and_repulsive() {
        let b = batch(Family::Jacobi, 0.0, 1.0, 3, 40_000, 9);
        let h2 = empirical_rho2(&b, 8, (0.0, 1.0)).unwrap();
        let h1 = empirical_rho1(&b, 8, (0.0, 1.0)).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(h2.counts[h2.index(i, j)], h2.counts[h2.index(j, i)]);
            }
            let product = h1.densities[i] * h1.densities[i];
            assert!(h2.densities[h2.index(i, i)] < 0.8 * product, "bin {i}");
        }
    }

    #[test]
    fn hermite_marginal_is_sign_symmetric() {
        let b = batch(Family::Hermite, 0.5, 2.0, 3, 60_000, 13);
        let h = empirical_rho1(&b, 12, (-3.0, 3.0)).unwrap();
        for i in 0..6 {
            let (p, q) = (h.densities[i], h.densities[11 - i]);
            let s = h.std_errors[i].hypot(h.std_errors[11 - i]);
            assert!((p - q).abs() <= 3.0 * 1.5 * s + 1e-12, "bin {i}: {p} vs {q}");
        }
    }

    #[test]
    fn predicted_rho1_integrates_to_n() {
        let spec = EnsembleSpec::new(Family::Jacobi, 1.0, 2.0, 3).unwrap();
        let k = FiniteKernel::new(spec).unwrap();
        let b = batch(Family::Jacobi, 1.0, 2.0, 3, 2100, 1);
        let h = empirical_rho1(&b, 20, (0.0, 1.0)).unwrap();
        let p = predicted_rho1(&k, &h).unwrap();
        assert!((p.iter().sum::<f64>() * h.width() - 3.0).abs() < 1e-8);
        let h2 = empirical_rho2(&b, 10, (0.0, 1.0)).unwrap();
        let p2 = predicted_rho2(&k, &h2).unwrap();
        // ∫∫ρ₂ = N(N−1).
        assert!((p2.iter().sum::<f64>() * h2.width().powi(2) - 6.0).abs() < 1e-6);
    }

    #[test]
    fn batch_means_of_iid_data() {
        let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(batch_mean_std_error(&x, 10) < 1e-12);
        assert!(batch_mean_std_error(&x, 1).is_nan());
    }
}
