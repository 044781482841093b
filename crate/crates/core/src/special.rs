//! Wright's generalized Bessel function, the Wright–Bessel limit kernels and
//! the classical sine and Bessel kernels they reduce to.
//!
//! Powers of negative reals use the signed convention x^θ = sign(x)|x|^θ.

use crate::error::{check_alpha, check_theta, domain, Error, Result};
use crate::numerics::{
    integrate_weighted_power, ln_factorial, log_recip_gamma, rational_denominator, recip_gamma, NeumaierSum, SeriesConfig,
    SignedLogValue,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Signed power sign(x)·|x|^θ.
pub fn signed_pow(x: f64, theta: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitKernelParams {
    pub alpha: f64,
    pub theta: f64,
}

impl LimitKernelParams {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_theta(theta)?;
        Ok(Self { alpha, theta })
    }

    /// Parameters of the even-index part of the Hermite kernel.
    pub fn hermite_even(self) -> Self {
        Self { alpha: (self.alpha - 1.0) / 2.0, theta: self.theta }
    }

    /// Parameters of the odd-index part of the Hermite kernel.
    pub fn hermite_odd(self) -> Self {
        Self { alpha: (self.alpha + self.theta) / 2.0, theta: self.theta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Method {
    #[default]
    Series,
    Quadrature,
    /// Series, falling back to quadrature when the series loses too many digits.
    Auto,
}

/// Signed-log value of the m-th Wright term (−x)^m / (m! Γ(a+bm)).
fn wright_term(a: f64, b: f64, ln_abs_x: f64, neg_x: bool, m: usize) -> SignedLogValue {
    let r = log_recip_gamma(a + b * m as f64);
    if r.is_zero() {
        return r;
    }
    let sign = if neg_x && m % 2 == 1 { -1 } else { 1 };
    SignedLogValue::new(sign, ln_abs_x * m as f64 - ln_factorial(m as u64)).mul(r)
}

/// J_{a,b}(x) = Σ_m (−x)^m / (m! Γ(a+bm)).
pub fn wright_bessel(a: f64, b: f64, x: f64) -> Result<f64> {
    wright_bessel_with(a, b, x, &SeriesConfig::default())
}

pub fn wright_bessel_with(a: f64, b: f64, x: f64, cfg: &SeriesConfig) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() || !a.is_finite() || !x.is_finite() {
        return domain(format!("wright_bessel requires finite a, x and b > 0 (got a={a}, b={b}, x={x})"));
    }
    if x == 0.0 {
        return Ok(recip_gamma(a));
    }
    let ln_abs_x = x.abs().ln();
    // (−x)^m has sign (−1)^m when x > 0.
    let neg = x > 0.0;
    // Terms with a + bm ≤ 0 may vanish at poles; sum them before applying the stop rule.
    let first_regular = if a > 0.0 { 0 } else { ((-a) / b).floor() as usize + 1 };
    let mut acc = NeumaierSum::default();
    for m in 0..first_regular {
        acc.add(wright_term(a, b, ln_abs_x, neg, m).to_real());
    }
    let mut small = 0;
    let mut est = f64::INFINITY;
    for m in first_regular..cfg.max_terms {
        let t = wright_term(a, b, ln_abs_x, neg, m).to_real();
        if !t.is_finite() {
            return Err(Error::NonFinite { index: m });
        }
        acc.add(t);
        est = t.abs();
        // Terms decay monotonically once m exceeds the peak, so the window is meaningful there.
        if t.abs() <= cfg.abs_tol.max(cfg.rel_tol * acc.value().abs()) && (m as f64) > x.abs().powf(1.0 / (1.0 + b)) {
            small += 1;
            if small >= cfg.tail_window {
                return Ok(acc.value());
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Accuracy { estimate: est, context: format!("wright_bessel({a}, {b}, {x}) did not converge") })
}

/// Result of the double-series evaluation of the limit kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSeries {
    pub value: f64,
    /// Σ|term|, for cancellation estimates.
    pub abs_sum: f64,
    pub diagonals: usize,
}

/// Double series for 𝒦^{(α,θ)}(x, y), enumerated along diagonals k + l = d.
pub fn limit_kernel_series(p: LimitKernelParams, x: f64, y: f64, cfg: &SeriesConfig) -> Result<KernelSeries> {
    if !(x >= 0.0) || !(y >= 0.0) {
        return domain(format!("limit kernel requires x, y >= 0 (got {x}, {y})"));
    }
    let LimitKernelParams { alpha, theta } = p;
    let a1 = alpha + 1.0;
    let ln_x = x.ln();
    let ln_yt = theta * y.ln();
    // a_k = (−x)^k / (k! Γ((α+1+k)/θ)),  b_l = (−y^θ)^l / (l! Γ(α+1+θl)).
    let a_term = |k: usize| -> f64 {
        if k == 0 {
            return recip_gamma(a1 / theta);
        }
        if x == 0.0 {
            return 0.0;
        }
        let s = if k % 2 == 1 { -1 } else { 1 };
        SignedLogValue::new(s, ln_x * k as f64 - ln_factorial(k as u64)).mul(log_recip_gamma((a1 + k as f64) / theta)).to_real()
    };
    let b_term = |l: usize| -> f64 {
        if l == 0 {
            return recip_gamma(a1);
        }
        if y == 0.0 {
            return 0.0;
        }
        let s = if l % 2 == 1 { -1 } else { 1 };
        SignedLogValue::new(s, ln_yt * l as f64 - ln_factorial(l as u64)).mul(log_recip_gamma(a1 + theta * l as f64)).to_real()
    };
    let mut a: Vec<f64> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut acc = NeumaierSum::default();
    let mut abs_sum = 0.0;
    let mut small = 0;
    for d in 0..cfg.max_terms {
        a.push(a_term(d));
        b.push(b_term(d));
        let mut diag = NeumaierSum::default();
        let mut diag_abs = 0.0;
        for k in 0..=d {
            let l = d - k;
            let t = a[k] * b[l] / (a1 + k as f64 + theta * l as f64);
            diag.add(t);
            diag_abs += t.abs();
        }
        if !diag_abs.is_finite() {
            return Err(Error::NonFinite { index: d });
        }
        acc.add(diag.value());
        abs_sum += diag_abs;
        let peaked = (d as f64) > 2.0 * (x + y.powf(theta)).sqrt() + 2.0;
        if peaked && diag_abs <= cfg.abs_tol.max(cfg.rel_tol * acc.value().abs()) {
            small += 1;
            if small >= cfg.tail_window {
                return Ok(KernelSeries { value: theta * acc.value(), abs_sum: theta * abs_sum, diagonals: d + 1 });
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Accuracy { estimate: abs_sum, context: format!("limit kernel series at ({x}, {y}) did not converge") })
}

/// Integral form θ ∫₀¹ J_{(α+1)/θ, 1/θ}(xt) J_{α+1, θ}((yt)^θ) t^α dt.
pub fn limit_kernel_quadrature(p: LimitKernelParams, x: f64, y: f64, cfg: &SeriesConfig) -> Result<f64> {
    if !(x >= 0.0) || !(y >= 0.0) {
        return domain(format!("limit kernel requires x, y >= 0 (got {x}, {y})"));
    }
    let LimitKernelParams { alpha, theta } = p;
    let q = rational_denominator(theta).unwrap_or(1);
    let mut err = None;
    let inner_cfg = SeriesConfig { rel_tol: cfg.rel_tol.min(1e-14), ..*cfg };
    let v = integrate_weighted_power(
        |t| {
            let f1 = wright_bessel_with((alpha + 1.0) / theta, 1.0 / theta, x * t, &inner_cfg);
            let f2 = wright_bessel_with(alpha + 1.0, theta, (y * t).powf(theta), &inner_cfg);
            match (f1, f2) {
                (Ok(a), Ok(b)) => a * b,
                (Err(e), _) | (_, Err(e)) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        alpha,
        q,
        cfg,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(theta * v)
}

/// 𝒦^{(α,θ)}(x, y) for x, y ≥ 0.
pub fn limit_kernel(p: LimitKernelParams, x: f64, y: f64, method: Method) -> Result<f64> {
    limit_kernel_with(p, x, y, method, &SeriesConfig::default())
}

pub fn limit_kernel_with(p: LimitKernelParams, x: f64, y: f64, method: Method, cfg: &SeriesConfig) -> Result<f64> {
    match method {
        Method::Series => limit_kernel_series(p, x, y, cfg).map(|s| s.value),
        Method::Quadrature => limit_kernel_quadrature(p, x, y, cfg),
        Method::Auto => {
            let s = limit_kernel_series(p, x, y, cfg)?;
            let lost = f64::EPSILON * s.abs_sum / s.value.abs();
            if lost > 1e6 * cfg.rel_tol {
                limit_kernel_quadrature(p, x, y, cfg)
            } else {
                Ok(s.value)
            }
        }
    }
}

/// Hermite-type limit kernel 𝒦^{((α−1)/2,θ)}(x², y²) + x^θ·y·𝒦^{((α+θ)/2,θ)}(x², y²) on ℝ².
pub fn limit_kernel_hermite(p: LimitKernelParams, x: f64, y: f64) -> Result<f64> {
    limit_kernel_hermite_with(p, x, y, Method::Series, &SeriesConfig::default())
}

pub fn limit_kernel_hermite_with(p: LimitKernelParams, x: f64, y: f64, method: Method, cfg: &SeriesConfig) -> Result<f64> {
    let (u, v) = (x * x, y * y);
    let even = limit_kernel_with(p.hermite_even(), u, v, method, cfg)?;
    let cross = signed_pow(x, p.theta) * y;
    if cross == 0.0 {
        return Ok(even);
    }
    Ok(even + cross * limit_kernel_with(p.hermite_odd(), u, v, method, cfg)?)
}

/// Partial sums S_j(x) = Σ_m c_m (m+α/2)^j x^m with c_m = (−1)^m/(m! Γ(m+α+1)),
/// together with their derivatives in x.
fn bessel_parts(alpha: f64, x: f64, cfg: &SeriesConfig) -> Result<[f64; 4]> {
    let h = alpha / 2.0;
    let mut s = [NeumaierSum::default(); 4];
    let mut small = 0;
    let ln_x = x.ln();
    for m in 0..cfg.max_terms {
        let mf = m as f64;
        let sign = if m % 2 == 1 { -1 } else { 1 };
        let c = SignedLogValue::new(sign, mf * ln_x - ln_factorial(m as u64)).mul(log_recip_gamma(mf + alpha + 1.0));
        let cx = c.to_real();
        // x^{m−1} m c_m for the derivatives.
        let dcx = if m == 0 {
            0.0
        } else {
            SignedLogValue::new(sign, (mf - 1.0) * ln_x - ln_factorial(m as u64 - 1))
                .mul(log_recip_gamma(mf + alpha + 1.0))
                .to_real()
        };
        let t = [cx, cx * (mf + h), dcx, dcx * (mf + h)];
        for (acc, v) in s.iter_mut().zip(t) {
            acc.add(v);
        }
        if !cx.is_finite() || !dcx.is_finite() {
            return Err(Error::NonFinite { index: m });
        }
        let scale = s[0].value().abs().max(s[1].value().abs()).max(s[2].value().abs());
        if t.iter().all(|v| v.abs() <= cfg.abs_tol.max(cfg.rel_tol * 1e-3 * scale)) && mf > x.sqrt() {
            small += 1;
            if small >= cfg.tail_window {
                return Ok([s[0].value(), s[1].value(), s[2].value(), s[3].value()]);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Accuracy { estimate: f64::NAN, context: format!("Bessel series at x={x} did not converge") })
}

/// Bessel kernel (φ₁(x)φ₂(y) − φ₁(y)φ₂(x))/(x − y) with φ₁(x) = J_α(2√x), φ₂ = xφ₁′.
pub fn bessel_kernel(alpha: f64, x: f64, y: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x > 0.0) || !(y > 0.0) || !x.is_finite() || !y.is_finite() {
        return domain(format!("bessel_kernel requires x, y > 0 (got {x}, {y})"));
    }
    let cfg = SeriesConfig::default();
    if (x - y).abs() <= 1e-6 * x.abs().max(1.0) {
        let m = 0.5 * (x + y);
        let [s0, s1, d0, d1] = bessel_parts(alpha, m, &cfg)?;
        return Ok(m.powf(alpha) * (d0 * s1 - s0 * d1));
    }
    let [s0x, s1x, _, _] = bessel_parts(alpha, x, &cfg)?;
    let [s0y, s1y, _, _] = bessel_parts(alpha, y, &cfg)?;
    Ok((x * y).powf(alpha / 2.0) * (s0x * s1y - s0y * s1x) / (x - y))
}

/// sin(π(ξ−η)) / (π(ξ−η)), equal to 1 on the diagonal.
pub fn sine_kernel(xi: f64, eta: f64) -> f64 {
    let d = xi - eta;
    if d == 0.0 {
        1.0
    } else {
        (PI * d).sin() / (PI * d)
    }
}
