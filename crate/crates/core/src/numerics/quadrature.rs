//! Gauss-type quadrature with the endpoint weight t^α built into the rule.

use super::series::SeriesConfig;
use crate::error::{domain, Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights on [0, 1] for the weight t^α.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Golub–Welsch rule for ∫₀¹ f(t) t^α dt, exact for polynomials of degree < 2n.
    pub fn jacobi_unit(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return domain(format!("quadrature weight exponent must be > -1 (got {alpha})"));
        }
        if n == 0 {
            return domain("quadrature order must be positive");
        }
        // Monic Jacobi recurrence on [−1, 1] for (1−s)^a (1+s)^b with a = 0, b = α.
        let (a, b) = (0.0f64, alpha);
        let ab = a + b;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        diag[0] = (b - a) / (ab + 2.0);
        for (i, d) in diag.iter_mut().enumerate().skip(1) {
            let k = i as f64;
            let s = 2.0 * k + ab;
            *d = (b * b - a * a) / (s * (s + 2.0));
        }
        for (i, o) in off.iter_mut().enumerate() {
            let k = i as f64 + 1.0;
            let s = 2.0 * k + ab;
            let beta = if i == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            *o = beta.sqrt();
        }
        let mut j = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            j[(i, i)] = diag[i];
            if i + 1 < n {
                j[(i, i + 1)] = off[i];
                j[(i + 1, i)] = off[i];
            }
        }
        let eig = SymmetricEigen::new(j);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                ((1.0 + eig.eigenvalues[i]) / 2.0, v0 * v0 / (alpha + 1.0))
            })
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0.clamp(0.0, 1.0)).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn apply<F: FnMut(f64) -> f64>(&self, mut f: F) -> (f64, f64) {
        let mut s = super::series::NeumaierSum::default();
        let mut abs = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = w * f(*x);
            s.add(v);
            abs += v.abs();
        }
        (s.value(), abs)
    }
}

const MIN_ORDER: usize = 16;
const MAX_ORDER: usize = 512;

fn adaptive<F>(mut rule_at: impl FnMut(usize) -> Result<GaussRule>, mut f: F, cfg: &SeriesConfig) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut n = MIN_ORDER;
    let (mut prev, _) = rule_at(n)?.apply(&mut f);
    let mut est = f64::INFINITY;
    while n < MAX_ORDER {
        n *= 2;
        let (cur, abs) = rule_at(n)?.apply(&mut f);
        if !cur.is_finite() {
            return Err(Error::NonFinite { index: n });
        }
        est = (cur - prev).abs();
        if est <= cfg.abs_tol.max(cfg.rel_tol * abs) {
            return Ok((cur, abs));
        }
        prev = cur;
    }
    Err(Error::Accuracy { estimate: est, context: format!("quadrature did not settle by order {MAX_ORDER}") })
}

/// ∫₀¹ f(t) t^α dt.
pub fn integrate_weighted<F: FnMut(f64) -> f64>(f: F, alpha: f64, cfg: &SeriesConfig) -> Result<f64> {
    integrate_weighted_power(f, alpha, 1, cfg)
}

/// ∫₀¹ f(t) t^α dt after the substitution t = u^q, which makes integrands
/// containing powers t^{m/q} smooth in u.
pub fn integrate_weighted_power<F: FnMut(f64) -> f64>(mut f: F, alpha: f64, q: u32, cfg: &SeriesConfig) -> Result<f64> {
    integrate_weighted_power_abs(&mut f, alpha, q, cfg).map(|r| r.0)
}

fn integrate_weighted_power_abs<F: FnMut(f64) -> f64>(f: &mut F, alpha: f64, q: u32, cfg: &SeriesConfig) -> Result<(f64, f64)> {
    if q == 0 {
        return domain("substitution power must be positive");
    }
    let qf = f64::from(q);
    let beta = qf * (alpha + 1.0) - 1.0;
    let (v, a) = adaptive(|n| GaussRule::jacobi_unit(beta, n), |u| f(u.powi(q as i32)), cfg)?;
    Ok((qf * v, qf * a))
}

/// ∫ₐᵇ f(x) dx by adaptive Gauss–Legendre.
pub fn integrate_interval<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &SeriesConfig) -> Result<f64> {
    integrate_interval_abs(&mut f, a, b, cfg).map(|r| r.0)
}

fn integrate_interval_abs<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, cfg: &SeriesConfig) -> Result<(f64, f64)> {
    let h = b - a;
    let (v, abs) = adaptive(|n| GaussRule::jacobi_unit(0.0, n), |t| f(a + h * t), cfg)?;
    Ok((h * v, h.abs() * abs))
}

/// ∫₀^∞ f(x) x^α dx for integrands decaying at infinity. The unit interval
/// uses the weighted rule (with substitution power q); the tail is covered by
/// panels until their contribution is negligible.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(mut f: F, alpha: f64, q: u32, cfg: &SeriesConfig) -> Result<f64> {
    let (mut total, mut abs_total) = integrate_weighted_power_abs(&mut f, alpha, q, cfg)?;
    let mut g = |x: f64| f(x) * x.powf(alpha);
    let mut a = 1.0;
    let mut width = 1.0;
    let mut quiet = 0;
    while quiet < 2 {
        if a > 1e4 {
            return Err(Error::Accuracy { estimate: abs_total, context: "integrand does not decay on the half line".into() });
        }
        let b = a + width;
        let (v, abs) = integrate_interval_abs(&mut g, a, b, cfg)?;
        total += v;
        abs_total += abs;
        if abs <= 1e-17 * abs_total {
            quiet += 1;
        } else {
            quiet = 0;
        }
        a = b;
        width = (width * 2.0).min(8.0);
    }
    Ok(total)
}

/// Smallest q ≤ 12 with q·θ an integer, used to smooth t^θ powers.
pub fn rational_denominator(theta: f64) -> Option<u32> {
    (1..=12u32).find(|&q| {
        let p = theta * f64::from(q);
        (p - p.round()).abs() < 1e-12 * p.max(1.0)
    })
}
