//! Scaling limits of the finite kernels and of the component sums A_N, B_N,
//! C_N, D_N behind them, plus the (α, θ) ↦ ((α+1)/θ − 1, 1/θ) symmetry.
//!
//! Scaled kernels carry the weight's power factor, so the Jacobi kernel tends
//! to x^α 𝒦(x,y), the Laguerre kernel to x^α 𝒦(y,x), and the Hermite kernel to
//! |x|^α 𝒦₁(y²,x²) + |x|^α x^θ y 𝒦₂(y²,x²). Transposition does not change the
//! correlation determinants of the Laguerre limit.

use crate::error::{check_alpha, check_theta, domain, Error, Result};
use crate::kernels::{EnsembleSpec, Family, FiniteKernel, KernelCache};
use crate::numerics::{ln_factorial, ln_gamma, log_pochhammer, sum_signed_logs, SignedLogValue};
use crate::special::{limit_kernel, signed_pow, wright_bessel, LimitKernelParams, Method};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// (α, θ) ↦ ((α+1)/θ − 1, 1/θ); an involution.
pub fn symmetry_map(alpha: f64, theta: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    Ok(((alpha + 1.0) / theta - 1.0, 1.0 / theta))
}

/// The coordinate scale s(N) with scaled points x/s.
pub fn scale_factor(family: Family, theta: f64, n: usize) -> f64 {
    let nf = n as f64;
    match family {
        Family::Jacobi => nf.powf(1.0 + 1.0 / theta),
        Family::Laguerre => nf.powf(1.0 / theta),
        Family::Hermite => (nf / 2.0).powf(1.0 / (2.0 * theta)),
    }
}

/// A finite kernel viewed at the hard-edge (Jacobi, Laguerre) or bulk
/// (Hermite) scale.
pub struct ScaledKernel<K: std::ops::Deref<Target = FiniteKernel> = Box<FiniteKernel>> {
    kernel: K,
    scale: f64,
}

impl ScaledKernel {
    pub fn new(spec: EnsembleSpec) -> Result<Self> {
        Self::from_kernel(Box::new(FiniteKernel::new(spec)?))
    }
}

impl<K: std::ops::Deref<Target = FiniteKernel>> ScaledKernel<K> {
    pub fn from_kernel(kernel: K) -> Result<Self> {
        let s = kernel.spec();
        if s.family == Family::Hermite && s.n_points < 2 {
            return domain("the Hermite bulk scaling needs N >= 2");
        }
        let scale = scale_factor(s.family, s.theta, s.n_points);
        Ok(Self { kernel, scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let spec = self.kernel.spec();
        let s = self.scale;
        let (xs, ys) = (x / s, y / s);
        let a = spec.alpha;
        match spec.family {
            Family::Jacobi => {
                if !(xs > 0.0 && xs < 1.0 && ys > 0.0 && ys < 1.0) {
                    return domain(format!(
                        "scaled points ({xs}, {ys}) fall outside (0,1); increase N (currently {})",
                        spec.n_points
                    ));
                }
                Ok(xs.powf(a) * self.kernel.eval(xs, ys)? / s)
            }
            Family::Laguerre => {
                if !(x > 0.0 && y > 0.0) {
                    return domain("Laguerre scaling needs x, y > 0");
                }
                Ok(xs.powf(a) * xs.exp() * self.kernel.eval(xs, ys)? / s)
            }
            Family::Hermite => Ok(xs.abs().powf(a) * self.kernel.eval(xs, ys)? / s),
        }
    }
}

pub fn scaled_kernel_jacobi(alpha: f64, theta: f64, n: usize, x: f64, y: f64) -> Result<f64> {
    ScaledKernel::new(EnsembleSpec::new(Family::Jacobi, alpha, theta, n)?)?.eval(x, y)
}

pub fn scaled_kernel_laguerre(alpha: f64, theta: f64, n: usize, x: f64, y: f64) -> Result<f64> {
    ScaledKernel::new(EnsembleSpec::new(Family::Laguerre, alpha, theta, n)?)?.eval(x, y)
}

/// Bulk scaling with M = N/2 (taken literally, so odd N gives a half-integer M).
pub fn scaled_kernel_hermite(alpha: f64, theta: f64, n: usize, x: f64, y: f64) -> Result<f64> {
    ScaledKernel::new(EnsembleSpec::new(Family::Hermite, alpha, theta, n)?)?.eval(x, y)
}

/// 𝒦₁(y², x²) + x^θ y 𝒦₂(y², x²) with the even/odd parameters (α−1)/2, (α+θ)/2:
/// the limit of the finite Hermite kernel. Its transpose-free counterpart is
/// [`crate::special::limit_kernel_hermite`].
pub fn hermite_bulk_limit(p: LimitKernelParams, x: f64, y: f64) -> Result<f64> {
    let (u, v) = (y * y, x * x);
    let even = limit_kernel(p.hermite_even(), u, v, Method::Auto)?;
    let odd = limit_kernel(p.hermite_odd(), u, v, Method::Auto)?;
    Ok(even + signed_pow(x, p.theta) * y * odd)
}

/// The value the scaled kernel of `family` tends to at (x, y).
pub fn limit_value(family: Family, alpha: f64, theta: f64, x: f64, y: f64) -> Result<f64> {
    let p = LimitKernelParams::new(alpha, theta)?;
    Ok(match family {
        Family::Jacobi => x.powf(alpha) * limit_kernel(p, x, y, Method::Auto)?,
        Family::Laguerre => x.powf(alpha) * limit_kernel(p, y, x, Method::Auto)?,
        Family::Hermite => x.abs().powf(alpha) * hermite_bulk_limit(p, x, y)?,
    })
}

/// The appendix sums whose scaled limits are Wright functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    /// A_N(x) = Σ_{k=1}^N ((k+α)/θ)_N (−x)^{k−1} / ((k−1)!(N−k)!)
    A,
    /// B_N(y) = Σ_{l=1}^N (θ(l−1)+α+1)_N (−y)^{l−1} / ((l−1)!(N−l)!)
    B,
    /// C_N(x) = Σ_{k=0}^{N−1} Γ(N)(−x)^k / (Γ(α+θk+1) k! (N−k−1)!)
    C,
    /// D_N(y) = Σ_{i=0}^{N−1} Γ(N+(i+α+1)/θ)(−y)^i / (Γ(N) Γ((i+α+1)/θ) i!)
    D,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::A, Component::B, Component::C, Component::D];

    /// Log-coefficient of (−x)^j, j = 0..N−1.
    fn log_coeff(self, alpha: f64, theta: f64, n: usize, j: usize) -> SignedLogValue {
        let (nn, jj, jf) = (n as u64, j as u64, j as f64);
        let lf = ln_factorial(jj) + ln_factorial(nn - 1 - jj);
        match self {
            Component::A => log_pochhammer((jf + 1.0 + alpha) / theta, n).mul(SignedLogValue::new(1, -lf)),
            Component::B => log_pochhammer(theta * jf + alpha + 1.0, n).mul(SignedLogValue::new(1, -lf)),
            Component::C => {
                SignedLogValue::new(1, ln_factorial(nn - 1) - ln_gamma(alpha + theta * jf + 1.0) - lf)
            }
            Component::D => {
                let b = (jf + alpha + 1.0) / theta;
                SignedLogValue::new(1, ln_gamma(n as f64 + b) - ln_factorial(nn - 1) - ln_gamma(b) - ln_factorial(jj))
            }
        }
    }

    /// Σ_j c_j (−x)^j times e^{extra}, summed in signed-log form.
    fn sum(self, alpha: f64, theta: f64, n: usize, x: f64, extra: f64) -> Result<SignedLogValue> {
        check_alpha(alpha)?;
        check_theta(theta)?;
        if n == 0 {
            return domain("components need N >= 1");
        }
        if x == 0.0 {
            return Ok(self.log_coeff(alpha, theta, n, 0).mul(SignedLogValue::new(1, extra)));
        }
        let (lx, sx) = (x.abs().ln(), if x > 0.0 { -1 } else { 1 });
        let terms = (0..n).map(|j| {
            let sign = if j % 2 == 1 { sx } else { 1 };
            self.log_coeff(alpha, theta, n, j).mul(SignedLogValue::new(sign, j as f64 * lx + extra))
        });
        let (total, _) = sum_signed_logs(terms);
        if total.log_mag.is_nan() {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(total)
    }

    /// The raw sum at x, in signed-log form (the values overflow f64 quickly).
    pub fn raw(self, alpha: f64, theta: f64, n: usize, x: f64) -> Result<SignedLogValue> {
        self.sum(alpha, theta, n, x, 0.0)
    }

    /// (argument scale, log of the prefactor) of the limit statement.
    fn scaling(self, alpha: f64, theta: f64, n: usize) -> (f64, f64) {
        let ln_n = (n as f64).ln();
        match self {
            Component::A => ((1.0 + 1.0 / theta) * ln_n, -(alpha + 1.0) / theta * ln_n),
            Component::B => ((1.0 + theta) * ln_n, -(alpha + 1.0) * ln_n),
            Component::C => (ln_n, 0.0),
            Component::D => (ln_n / theta, -(alpha + 1.0) / theta * ln_n),
        }
    }

    /// N^{−c} X_N(x / N^e) with the exponents that make it converge.
    pub fn scaled(self, alpha: f64, theta: f64, n: usize, x: f64) -> Result<f64> {
        let (ln_s, pre) = self.scaling(alpha, theta, n);
        if n == 0 {
            return domain("components need N >= 1");
        }
        // x/N^e is formed in log space to keep the scale exact for large N.
        let xs = if x == 0.0 { 0.0 } else { x.signum() * (x.abs().ln() - ln_s).exp() };
        Ok(self.sum(alpha, theta, n, xs, pre)?.to_real())
    }

    /// Wright-function limit of [`Component::scaled`].
    pub fn limit(self, alpha: f64, theta: f64, x: f64) -> Result<f64> {
        let (a, b) = match self {
            Component::A | Component::D => ((alpha + 1.0) / theta, 1.0 / theta),
            Component::B | Component::C => (alpha + 1.0, theta),
        };
        wright_bessel(a, b, x)
    }
}

pub fn component_a(alpha: f64, theta: f64, n: usize, x: f64) -> Result<SignedLogValue> {
    Component::A.raw(alpha, theta, n, x)
}

pub fn component_b(alpha: f64, theta: f64, n: usize, y: f64) -> Result<SignedLogValue> {
    Component::B.raw(alpha, theta, n, y)
}

pub fn component_c(alpha: f64, theta: f64, n: usize, x: f64) -> Result<SignedLogValue> {
    Component::C.raw(alpha, theta, n, x)
}

pub fn component_d(alpha: f64, theta: f64, n: usize, y: f64) -> Result<SignedLogValue> {
    Component::D.raw(alpha, theta, n, y)
}

/// Scaled finite kernels against their limit over a grid, one row per N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub family: Family,
    pub alpha: f64,
    pub theta: f64,
    pub grid: Vec<(f64, f64)>,
    pub n_list: Vec<usize>,
    pub finite_values: Vec<Vec<f64>>,
    pub limit_values: Vec<f64>,
    pub errors: Vec<Vec<f64>>,
    pub sup_errors: Vec<f64>,
    /// Sup-error non-increasing along `n_list`, allowing 10% growth per step.
    pub monotone_flag: bool,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,x,y,finite_value,limit_value,abs_error\n");
        for (i, n) in self.n_list.iter().enumerate() {
            for (j, (x, y)) in self.grid.iter().enumerate() {
                let _ = writeln!(out, "{n},{x},{y},{},{},{}", self.finite_values[i][j], self.limit_values[j], self.errors[i][j]);
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Sup-error at the largest N.
    pub fn final_error(&self) -> f64 {
        self.sup_errors.last().copied().unwrap_or(f64::NAN)
    }
}

/// Cartesian square of a coordinate list.
pub fn square_grid(coords: &[f64]) -> Vec<(f64, f64)> {
    coords.iter().flat_map(|&x| coords.iter().map(move |&y| (x, y))).collect()
}

pub const MONOTONE_SLACK: f64 = 1.1;

pub fn convergence_study(family: Family, alpha: f64, theta: f64, grid: &[(f64, f64)], n_list: &[usize]) -> Result<ConvergenceReport> {
    convergence_study_with(family, alpha, theta, grid, n_list, &KernelCache::new())
}

pub fn convergence_study_with(
    family: Family,
    alpha: f64,
    theta: f64,
    grid: &[(f64, f64)],
    n_list: &[usize],
    cache: &KernelCache,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() || grid.is_empty() {
        return domain("convergence study needs a non-empty grid and N list");
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return domain("N list must be strictly ascending");
    }
    let limit_values = grid.par_iter().map(|&(x, y)| limit_value(family, alpha, theta, x, y)).collect::<Result<Vec<_>>>()?;
    let kernels = n_list
        .par_iter()
        .map(|&n| ScaledKernel::from_kernel(cache.get(&EnsembleSpec::new(family, alpha, theta, n)?)?))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, usize)> = (0..n_list.len()).flat_map(|i| (0..grid.len()).map(move |j| (i, j))).collect();
    let flat = tasks.par_iter().map(|&(i, j)| kernels[i].eval(grid[j].0, grid[j].1)).collect::<Result<Vec<_>>>()?;
    let finite_values: Vec<Vec<f64>> = flat.chunks(grid.len()).map(<[f64]>::to_vec).collect();
    let errors: Vec<Vec<f64>> =
        finite_values.iter().map(|row| row.iter().zip(&limit_values).map(|(f, l)| (f - l).abs()).collect()).collect();
    let sup_errors: Vec<f64> = errors.iter().map(|r| r.iter().fold(0.0f64, |m, &e| m.max(e))).collect();
    let monotone_flag = sup_errors.windows(2).all(|w| w[1] <= MONOTONE_SLACK * w[0]);
    Ok(ConvergenceReport {
        family,
        alpha,
        theta,
        grid: grid.to_vec(),
        n_list: n_list.to_vec(),
        finite_values,
        limit_values,
        errors,
        sup_errors,
        monotone_flag,
    })
}

/// ∏ w(x_i) det[K(x_i, x_j)] together with ∏ w(x_i) K(x_i, x_i), the natural
/// magnitude against which a determinant's rounding should be judged.
fn weighted_det(points: &[f64], w: impl Fn(f64) -> f64, k: impl Fn(f64, f64) -> Result<f64>) -> Result<(f64, f64)> {
    let n = points.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = k(points[i], points[j])?;
        }
    }
    let wp: f64 = points.iter().map(|&x| w(x)).product();
    let diag: f64 = (0..n).map(|i| m[(i, i)]).product();
    Ok((wp * m.determinant(), (wp * diag).abs()))
}

/// ∏ x_i^α det[𝒦^{(α,θ)}(x_i, x_j)], the limiting hard-edge correlation.
pub fn limit_correlation(alpha: f64, theta: f64, points: &[f64]) -> Result<f64> {
    limit_correlation_scaled(alpha, theta, points).map(|r| r.0)
}

fn limit_correlation_scaled(alpha: f64, theta: f64, points: &[f64]) -> Result<(f64, f64)> {
    let p = LimitKernelParams::new(alpha, theta)?;
    weighted_det(points, |x| x.powf(alpha), |x, y| limit_kernel(p, x, y, Method::Auto))
}

/// ∏ |x_i|^α det[H(x_i, x_j)] with H the Hermite bulk limit.
pub fn hermite_limit_correlation(alpha: f64, theta: f64, points: &[f64]) -> Result<f64> {
    hermite_limit_correlation_scaled(alpha, theta, points).map(|r| r.0)
}

fn hermite_limit_correlation_scaled(alpha: f64, theta: f64, points: &[f64]) -> Result<(f64, f64)> {
    let p = LimitKernelParams::new(alpha, theta)?;
    weighted_det(points, |x| x.abs().powf(alpha), |x, y| hermite_bulk_limit(p, x, y))
}

/// Both sides of the symmetry: the (α, θ) density pushed forward by
/// x ↦ sign(x)|x|^θ, and the (α′, θ′) density, at the same points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub transformed: f64,
    pub mapped: f64,
    /// Largest product of one-point functions on either side.
    pub scale: f64,
}

impl SymmetryCheck {
    fn new(transformed: (f64, f64), mapped: (f64, f64)) -> Self {
        Self { transformed: transformed.0, mapped: mapped.0, scale: transformed.1.max(mapped.1) }
    }

    /// |transformed − mapped| relative to the product of one-point functions.
    /// Determinants of nearby points cancel, so their own size is a poor yardstick.
    pub fn relative_residual(&self) -> f64 {
        let d = (self.transformed - self.mapped).abs();
        if self.scale == 0.0 {
            d
        } else {
            d / self.scale
        }
    }
}

fn push_forward(theta: f64, points: &[f64], rho: impl FnOnce(&[f64]) -> Result<(f64, f64)>) -> Result<(f64, f64)> {
    // u = x^{1/θ}, du/dx = (1/θ)|x|^{1/θ − 1}.
    let u: Vec<f64> = points.iter().map(|&x| signed_pow(x, 1.0 / theta)).collect();
    let jac: f64 = points.iter().map(|&x| x.abs().powf(1.0 / theta - 1.0) / theta).product();
    let (v, s) = rho(&u)?;
    Ok((v * jac, s * jac))
}

/// Hard-edge limit symmetry at points x_i > 0.
pub fn limit_symmetry(alpha: f64, theta: f64, points: &[f64]) -> Result<SymmetryCheck> {
    let (a2, t2) = symmetry_map(alpha, theta)?;
    Ok(SymmetryCheck::new(
        push_forward(theta, points, |u| limit_correlation_scaled(alpha, theta, u))?,
        limit_correlation_scaled(a2, t2, points)?,
    ))
}

/// Bulk Hermite limit symmetry at nonzero real points.
pub fn hermite_limit_symmetry(alpha: f64, theta: f64, points: &[f64]) -> Result<SymmetryCheck> {
    let (a2, t2) = symmetry_map(alpha, theta)?;
    Ok(SymmetryCheck::new(
        push_forward(theta, points, |u| hermite_limit_correlation_scaled(alpha, theta, u))?,
        hermite_limit_correlation_scaled(a2, t2, points)?,
    ))
}

/// The same comparison for the finite Laguerre ensemble, where it fails.
pub fn finite_laguerre_symmetry(alpha: f64, theta: f64, n: usize, points: &[f64]) -> Result<SymmetryCheck> {
    let (a2, t2) = symmetry_map(alpha, theta)?;
    let finite = |a: f64, t: f64, pts: &[f64]| -> Result<(f64, f64)> {
        let spec = EnsembleSpec::new(Family::Laguerre, a, t, n)?;
        let k = FiniteKernel::new(spec)?;
        weighted_det(pts, |x| x.powf(a) * (-x).exp(), |x, y| k.eval(x, y))
    };
    Ok(SymmetryCheck::new(push_forward(theta, points, |u| finite(alpha, theta, u))?, finite(a2, t2, points)?))
}
