//! Gram matrices of the biorthogonal systems, their closed-form Cauchy-type
//! inverses, and biorthogonalization by triangular decomposition.
//!
//! Closed-form inverses are kept in signed-log form: their entries grow
//! super-exponentially with N while the kernels built from them stay moderate.

pub mod exact;

use crate::error::{check_alpha, check_theta, domain, Error, Result};
use crate::numerics::{ln_factorial, ln_gamma, log_pochhammer, sum_signed_logs, DoubleDouble as Dd, SignedLogValue};
use nalgebra::DMatrix;

/// Two real sequences defining the Cauchy matrix M_ij = 1/(A_i + B_j).
#[derive(Debug, Clone, PartialEq)]
pub struct CauchySystem {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl CauchySystem {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return domain("Cauchy sequences must be non-empty and of equal length");
        }
        for (name, v) in [("A", &a), ("B", &b)] {
            for i in 0..v.len() {
                if !v[i].is_finite() {
                    return domain(format!("{name}[{}] is not finite", i + 1));
                }
                for j in 0..i {
                    if v[i] == v[j] {
                        return Err(Error::Singular(format!("{name}[{}] = {name}[{}]", j + 1, i + 1)));
                    }
                }
            }
        }
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                if ai + bj == 0.0 {
                    return Err(Error::Singular(format!("A[{}] + B[{}] = 0", i + 1, j + 1)));
                }
            }
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| 1.0 / (self.a[i] + self.b[j]))
    }
}

/// Dense N×N matrix of signed-log entries, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    n: usize,
    entries: Vec<SignedLogValue>,
}

impl CoefficientMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> SignedLogValue) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                entries.push(f(k, l));
            }
        }
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry (k, l), zero-based.
    pub fn get(&self, k: usize, l: usize) -> SignedLogValue {
        self.entries[k * self.n + l]
    }

    pub fn row(&self, k: usize) -> &[SignedLogValue] {
        &self.entries[k * self.n..(k + 1) * self.n]
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.sign == 0 || e.log_mag.is_finite())
    }

    /// Plain floating-point copy; overflows to ±inf for large N.
    pub fn to_real(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |k, l| self.get(k, l).to_real())
    }

    /// Product computed entrywise with rescaled compensated sums.
    pub fn product(&self, other: &CoefficientMatrix) -> Result<CoefficientMatrix> {
        if self.n != other.n {
            return domain("dimension mismatch in signed-log product");
        }
        let n = self.n;
        Ok(Self::from_fn(n, |i, j| sum_signed_logs((0..n).map(|l| self.get(i, l).mul(other.get(l, j)))).0))
    }
}

/// Closed-form inverse of the Cauchy matrix M_ij = 1/(A_i + B_j), so that C·M = I:
/// C_kl = ∏_i (B_i+A_l)(A_i+B_k) / [∏_{i≠l}(A_l−A_i) ∏_{j≠k}(B_k−B_j) (A_l+B_k)].
pub fn cauchy_inverse(sys: &CauchySystem) -> CoefficientMatrix {
    let (a, b) = (sys.a(), sys.b());
    let n = sys.n();
    let prod = |f: &dyn Fn(usize) -> f64| -> SignedLogValue {
        (0..n).fold(SignedLogValue::ONE, |acc, i| acc.mul(SignedLogValue::from_real(f(i))))
    };
    let p: Vec<_> = (0..n).map(|l| prod(&|i| b[i] + a[l])).collect();
    let q: Vec<_> = (0..n).map(|k| prod(&|i| a[i] + b[k])).collect();
    let r: Vec<_> = (0..n).map(|l| prod(&|i| if i == l { 1.0 } else { a[l] - a[i] })).collect();
    let s: Vec<_> = (0..n).map(|k| prod(&|j| if j == k { 1.0 } else { b[k] - b[j] })).collect();
    CoefficientMatrix::from_fn(n, |k, l| {
        p[l].mul(q[k]).div(r[l].mul(s[k]).mul(SignedLogValue::from_real(a[l] + b[k])))
    })
}

fn check_params(alpha: f64, theta: f64, n: usize) -> Result<()> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    if n == 0 {
        return domain("n must be >= 1");
    }
    Ok(())
}

/// Jacobi Gram matrix g_ij = 1/(j + θ(i−1) + α), indices from 1.
pub fn jacobi_gram(alpha: f64, theta: f64, n: usize) -> Result<DMatrix<f64>> {
    check_params(alpha, theta, n)?;
    Ok(DMatrix::from_fn(n, n, |i, j| 1.0 / ((j + 1) as f64 + theta * i as f64 + alpha)))
}

/// The Cauchy data behind [`jacobi_gram`]: A_i = θ(i−1), B_j = j + α.
pub fn jacobi_cauchy_system(alpha: f64, theta: f64, n: usize) -> Result<CauchySystem> {
    check_params(alpha, theta, n)?;
    CauchySystem::new((0..n).map(|i| theta * i as f64).collect(), (0..n).map(|j| (j + 1) as f64 + alpha).collect())
}

/// Closed-form inverse of the Jacobi Gram matrix:
/// c_kl = θ ((k+α)/θ)_N (θ(l−1)+α+1)_N (−1)^{k+l} / ((k−1)!(N−k)!(l−1)!(N−l)! (k+θ(l−1)+α)).
pub fn jacobi_coeffs(alpha: f64, theta: f64, n: usize) -> Result<CoefficientMatrix> {
    check_params(alpha, theta, n)?;
    let nn = n as u64;
    let row: Vec<SignedLogValue> = (1..=n)
        .map(|k| {
            let f = ln_factorial(k as u64 - 1) + ln_factorial(nn - k as u64);
            log_pochhammer((k as f64 + alpha) / theta, n).mul(SignedLogValue::new(1, theta.ln() - f))
        })
        .collect();
    let col: Vec<SignedLogValue> = (1..=n)
        .map(|l| {
            let f = ln_factorial(l as u64 - 1) + ln_factorial(nn - l as u64);
            log_pochhammer(theta * (l - 1) as f64 + alpha + 1.0, n).mul(SignedLogValue::new(1, -f))
        })
        .collect();
    Ok(CoefficientMatrix::from_fn(n, |k, l| {
        let sign = if (k + l) % 2 == 0 { 1.0 } else { -1.0 };
        let d = (k + 1) as f64 + theta * l as f64 + alpha;
        row[k].mul(col[l]).mul(SignedLogValue::from_real(sign / d))
    }))
}

/// Laguerre Gram matrix g̃_ij = Γ(1+α+N+θ(j−1)) / (α+N+θ(j−1)−(i−1)) in signed-log form.
pub fn laguerre_gram_tilde(alpha: f64, theta: f64, n: usize) -> Result<CoefficientMatrix> {
    check_params(alpha, theta, n)?;
    let nf = n as f64;
    Ok(CoefficientMatrix::from_fn(n, |i, j| {
        let bj = alpha + nf + theta * j as f64;
        SignedLogValue::new(1, ln_gamma(1.0 + bj)).div(SignedLogValue::from_real(bj - i as f64))
    }))
}

/// The Cauchy data behind [`laguerre_gram_tilde`]: A_i = −(i−1), B_j = α+N+θ(j−1);
/// g̃ = M·diag Γ(1+B_j).
pub fn laguerre_cauchy_system(alpha: f64, theta: f64, n: usize) -> Result<CauchySystem> {
    check_params(alpha, theta, n)?;
    let nf = n as f64;
    CauchySystem::new((0..n).map(|i| -(i as f64)).collect(), (0..n).map(|j| alpha + nf + theta * j as f64).collect())
}

/// Closed-form inverse of g̃:
/// c̃_kl = θ ((α+N−l+1)/θ)_N (−1)^{N+k+l+1}
///        / (Γ(1+α+θ(k−1)) (k−1)!(N−k)! (l−1)!(N−l)! (α+N+θ(k−1)−(l−1))).
pub fn laguerre_coeffs(alpha: f64, theta: f64, n: usize) -> Result<CoefficientMatrix> {
    check_params(alpha, theta, n)?;
    let nn = n as u64;
    let nf = n as f64;
    let row: Vec<SignedLogValue> = (1..=n)
        .map(|k| {
            let f = ln_factorial(k as u64 - 1) + ln_factorial(nn - k as u64);
            SignedLogValue::new(1, theta.ln() - f - ln_gamma(1.0 + alpha + theta * (k - 1) as f64))
        })
        .collect();
    let col: Vec<SignedLogValue> = (1..=n)
        .map(|l| {
            let f = ln_factorial(l as u64 - 1) + ln_factorial(nn - l as u64);
            log_pochhammer((alpha + nf - l as f64 + 1.0) / theta, n).mul(SignedLogValue::new(1, -f))
        })
        .collect();
    Ok(CoefficientMatrix::from_fn(n, |k, l| {
        let sign = if (n + k + l + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let d = alpha + nf + theta * k as f64 - l as f64;
        row[k].mul(col[l]).mul(SignedLogValue::from_real(sign / d))
    }))
}

/// Gauss decomposition L·G·U = I without pivoting (pivoting would break the
/// nesting of spans). Rows of L and columns of U give the biorthonormal systems.
pub fn biorthogonalize(g: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = g.nrows();
    if n == 0 || g.ncols() != n {
        return domain("biorthogonalize needs a non-empty square matrix");
    }
    let norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut lo = DMatrix::<f64>::identity(n, n);
    let mut up = g.clone();
    for p in 0..n {
        let piv = up[(p, p)];
        if !(piv.abs() > 1e-13 * norm) {
            return Err(Error::Decomposition { order: p + 1 });
        }
        for r in p + 1..n {
            let m = up[(r, p)] / piv;
            lo[(r, p)] = m;
            for c in p..n {
                up[(r, c)] -= m * up[(p, c)];
            }
        }
    }
    // G = L₀U₀ with L₀ unit-lower; invert both triangles.
    let l_inv = invert_unit_lower(&lo);
    let u_inv = invert_upper(&up);
    Ok((l_inv, u_inv))
}

/// Jacobi Gram matrix in double-double, row-major.
pub fn jacobi_gram_dd(alpha: f64, theta: f64, n: usize) -> Result<Vec<Dd>> {
    check_params(alpha, theta, n)?;
    let (a, t) = (Dd::new(alpha), Dd::new(theta));
    Ok((0..n * n).map(|idx| (t * (idx / n) as f64 + a + (idx % n + 1) as f64).recip()).collect())
}

/// [`biorthogonalize`] in double-double for an n×n row-major matrix; the Gram
/// matrices are Cauchy-like and lose about log10 κ digits in f64.
pub fn biorthogonalize_dd(g: &[Dd], n: usize) -> Result<(Vec<Dd>, Vec<Dd>)> {
    if n == 0 || g.len() != n * n {
        return domain("biorthogonalize needs a non-empty square matrix");
    }
    let norm = g.iter().fold(0.0f64, |m, v| m.max(v.hi.abs()));
    let mut lo = vec![Dd::ZERO; n * n];
    let mut up = g.to_vec();
    for p in 0..n {
        lo[p * n + p] = Dd::ONE;
        let piv = up[p * n + p];
        if !(piv.hi.abs() > 1e-28 * norm) {
            return Err(Error::Decomposition { order: p + 1 });
        }
        for r in p + 1..n {
            let m = up[r * n + p] / piv;
            lo[r * n + p] = m;
            for c in p..n {
                let d = m * up[p * n + c];
                up[r * n + c] -= d;
            }
        }
    }
    let mut li = vec![Dd::ZERO; n * n];
    for c in 0..n {
        li[c * n + c] = Dd::ONE;
        for r in c + 1..n {
            let s: Dd = (c..r).map(|k| lo[r * n + k] * li[k * n + c]).sum();
            li[r * n + c] = -s;
        }
    }
    let mut ui = vec![Dd::ZERO; n * n];
    for c in 0..n {
        ui[c * n + c] = up[c * n + c].recip();
        for r in (0..c).rev() {
            let s: Dd = (r + 1..=c).map(|k| up[r * n + k] * ui[k * n + c]).sum();
            ui[r * n + c] = -s / up[r * n + r];
        }
    }
    Ok((li, ui))
}

fn invert_unit_lower(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut x = DMatrix::<f64>::identity(n, n);
    for c in 0..n {
        for r in c + 1..n {
            let s: f64 = (c..r).map(|k| l[(r, k)] * x[(k, c)]).sum();
            x[(r, c)] = -s;
        }
    }
    x
}

fn invert_upper(u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.nrows();
    let mut x = DMatrix::<f64>::zeros(n, n);
    for c in 0..n {
        x[(c, c)] = 1.0 / u[(c, c)];
        for r in (0..c).rev() {
            let s: f64 = (r + 1..=c).map(|k| u[(r, k)] * x[(k, c)]).sum();
            x[(r, c)] = -s / u[(r, r)];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_weighted, SeriesConfig};

    #[test]
    fn dd_gauss_decomposition_inverts_gram() {
        let n = 10;
        let g = jacobi_gram_dd(0.5, 0.5, n).unwrap();
        let (l, u) = biorthogonalize_dd(&g, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut s = Dd::ZERO;
                for k in 0..n {
                    for m in 0..n {
                        s += l[i * n + k] * g[k * n + m] * u[m * n + j];
                    }
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s.to_f64() - want).abs() < 1e-14, "({i},{j}) {}", s.to_f64());
            }
        }
    }

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    #[test]
    fn cauchy_small_examples() {
        let c = cauchy_inverse(&CauchySystem::new(vec![0.0], vec![2.0]).unwrap()).to_real();
        assert!((c[(0, 0)] - 2.0).abs() < 1e-15);
        let c = cauchy_inverse(&CauchySystem::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap()).to_real();
        let want = [[4.0, -6.0], [-6.0, 12.0]];
        for k in 0..2 {
            for l in 0..2 {
                assert!((c[(k, l)] - want[k][l]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cauchy_rejects_degenerate() {
        assert!(matches!(CauchySystem::new(vec![1.0, 1.0], vec![0.0, 2.0]), Err(Error::Singular(_))));
        assert!(matches!(CauchySystem::new(vec![1.0, 2.0], vec![-1.0, 3.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn jacobi_examples() {
        let g = jacobi_gram(0.3, 1.7, 1).unwrap();
        assert!((g[(0, 0)] - 1.0 / 1.3).abs() < 1e-16);
        let h = jacobi_gram(0.0, 1.0, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h[(i, j)], 1.0 / (i + j + 1) as f64);
            }
        }
        assert!((jacobi_coeffs(0.3, 1.7, 1).unwrap().get(0, 0).to_real() - 1.3).abs() < 1e-14);
        let c = jacobi_coeffs(0.0, 1.0, 2).unwrap().to_real();
        assert!((c[(0, 0)] - 4.0).abs() < 1e-13 && (c[(0, 1)] + 6.0).abs() < 1e-13);
        assert!((c[(1, 0)] + 6.0).abs() < 1e-13 && (c[(1, 1)] - 12.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_gram_by_quadrature() {
        let (alpha, theta) = (0.5, 2.0);
        let g = jacobi_gram(alpha, theta, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let e = j as f64 + theta * i as f64;
                let v = integrate_weighted(|x| x.powf(e), alpha, &SeriesConfig::default()).unwrap();
                assert!((v - g[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn laguerre_examples() {
        let g = laguerre_gram_tilde(0.4, 1.3, 1).unwrap();
        assert!((g.get(0, 0).to_real() - ln_gamma(1.4).exp()).abs() < 1e-14);
        let g = laguerre_gram_tilde(0.0, 1.0, 2).unwrap();
        assert!((g.get(0, 0).to_real() - 1.0).abs() < 1e-14);
        let c = laguerre_coeffs(0.4, 1.3, 1).unwrap();
        assert!((c.get(0, 0).to_real() - (-ln_gamma(1.4)).exp()).abs() < 1e-14);
        // g̃ = M·diag Γ(1+B_j)
        let sys = laguerre_cauchy_system(0.5, 2.0, 4).unwrap();
        let m = sys.matrix();
        let g = laguerre_gram_tilde(0.5, 2.0, 4).unwrap().to_real();
        for i in 0..4 {
            for j in 0..4 {
                let want = m[(i, j)] * ln_gamma(1.0 + sys.b()[j]).exp();
                assert!(((g[(i, j)] - want) / want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn laguerre_small_n_against_dense_inverse() {
        for &(alpha, theta) in &[(0.0, 1.0), (0.5, 2.0), (1.5, 0.5)] {
            for n in 1..=3 {
                let g = laguerre_gram_tilde(alpha, theta, n).unwrap();
                let inv = g.to_real().try_inverse().unwrap();
                let c = laguerre_coeffs(alpha, theta, n).unwrap().to_real();
                for k in 0..n {
                    for l in 0..n {
                        assert!((c[(k, l)] - inv[(k, l)]).abs() <= 1e-8 * inv[(k, l)].abs().max(1e-30), "n={n}");
                    }
                }
                let p = laguerre_coeffs(alpha, theta, n).unwrap().product(&g).unwrap().to_real();
                assert!(max_abs(&(p - DMatrix::identity(n, n))) < 1e-10);
            }
        }
    }

    #[test]
    fn jacobi_closed_form_is_cauchy_inverse() {
        for &(alpha, theta) in &[(0.0, 1.0), (0.5, 2.0), (1.5, 0.5), (-0.6, 3.3)] {
            for n in 1..=20 {
                let a = jacobi_coeffs(alpha, theta, n).unwrap();
                let b = cauchy_inverse(&jacobi_cauchy_system(alpha, theta, n).unwrap());
                for k in 0..n {
                    for l in 0..n {
                        let (x, y) = (a.get(k, l), b.get(k, l));
                        assert_eq!(x.sign, y.sign);
                        assert!((x.log_mag - y.log_mag).abs() <= 1e-10 * x.log_mag.abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn biorthogonalize_examples() {
        let (l, u) = biorthogonalize(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(l, DMatrix::identity(3, 3));
        assert_eq!(u, DMatrix::identity(3, 3));
        let h = jacobi_gram(0.0, 1.0, 2).unwrap();
        let (l, u) = biorthogonalize(&h).unwrap();
        assert!(max_abs(&(&l * &h * &u - DMatrix::identity(2, 2))) < 1e-12);
        let singular = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(biorthogonalize(&singular), Err(Error::Decomposition { order: 1 }));
    }

    #[test]
    fn biorthogonal_functions_by_quadrature() {
        // ζ_a(x) = Σ_j u_ja x^{j−1}, ψ_b(y) = Σ_i l_bi y^{θ(i−1)}, paired against x^α on (0,1).
        let (alpha, theta, n) = (0.0, 2.0, 4);
        let g = jacobi_gram(alpha, theta, n).unwrap();
        let (l, u) = biorthogonalize(&g).unwrap();
        for a in 0..n {
            for b in 0..n {
                let f = |x: f64| {
                    let z: f64 = (0..n).map(|j| u[(j, a)] * x.powi(j as i32)).sum();
                    let p: f64 = (0..n).map(|i| l[(b, i)] * x.powf(theta * i as f64)).sum();
                    z * p
                };
                let v = integrate_weighted(f, alpha, &SeriesConfig::default()).unwrap();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-9, "({a},{b}): {v}");
            }
        }
    }
}
