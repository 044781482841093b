//! Exact rational oracles for the Gram inverses.
//!
//! Every finite f64 is a dyadic rational, so Gram matrices and closed-form
//! inverses for given (α, θ) can be formed without rounding. Residuals that
//! are hopeless in floating point (Hilbert-type conditioning) are then exact.

use super::CoefficientMatrix;
use crate::error::{domain, Error, Result};
use crate::numerics::{ln_gamma, SignedLogValue};
use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type RatMatrix = Vec<Vec<BigRational>>;

pub fn rat(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn bigint_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map(f64::abs).unwrap_or(f64::NAN).ln();
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Signed-log image of a rational (no overflow for huge numerators or denominators).
pub fn to_signed_log(r: &BigRational) -> SignedLogValue {
    match r.numer().sign() {
        Sign::NoSign => SignedLogValue::ZERO,
        s => SignedLogValue::new(if s == Sign::Minus { -1 } else { 1 }, bigint_ln(r.numer()) - bigint_ln(r.denom())),
    }
}

fn pochhammer(a: &BigRational, m: usize) -> BigRational {
    let mut p = BigRational::one();
    let mut f = a.clone();
    for _ in 0..m {
        p *= &f;
        f += BigRational::one();
    }
    p
}

fn factorial(n: usize) -> BigRational {
    (1..=n as i64).fold(BigRational::one(), |acc, k| acc * int(k))
}

pub fn cauchy_matrix(a: &[BigRational], b: &[BigRational]) -> Result<RatMatrix> {
    let mut m = Vec::with_capacity(a.len());
    for ai in a {
        let mut row = Vec::with_capacity(b.len());
        for bj in b {
            let d = ai + bj;
            if d.is_zero() {
                return Err(Error::Singular("A_i + B_j = 0".into()));
            }
            row.push(d.recip());
        }
        m.push(row);
    }
    Ok(m)
}

/// The Cauchy closed-form inverse evaluated exactly.
pub fn cauchy_inverse(a: &[BigRational], b: &[BigRational]) -> RatMatrix {
    let n = a.len();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    let mut num = BigRational::one();
                    let mut den = &a[l] + &b[k];
                    for i in 0..n {
                        num *= (&b[i] + &a[l]) * (&a[i] + &b[k]);
                        if i != l {
                            den *= &a[l] - &a[i];
                        }
                        if i != k {
                            den *= &b[k] - &b[i];
                        }
                    }
                    num / den
                })
                .collect()
        })
        .collect()
}

pub fn matmul(x: &RatMatrix, y: &RatMatrix) -> RatMatrix {
    let n = x.len();
    let m = y[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..y.len()).fold(BigRational::zero(), |acc, l| acc + &x[i][l] * &y[l][j]))
                .collect()
        })
        .collect()
}

/// Gauss–Jordan inversion with partial pivoting (largest magnitude pivot).
pub fn invert(m: &RatMatrix) -> Result<RatMatrix> {
    let n = m.len();
    let mut a: RatMatrix = m.clone();
    let mut inv: RatMatrix = (0..n).map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()).collect();
    for c in 0..n {
        let p = (c..n)
            .filter(|&r| !a[r][c].is_zero())
            .max_by(|&r, &s| a[r][c].abs().cmp(&a[s][c].abs()))
            .ok_or_else(|| Error::Singular(format!("zero pivot in column {}", c + 1)))?;
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c].clone();
        for j in 0..n {
            a[c][j] = &a[c][j] / &piv;
            inv[c][j] = &inv[c][j] / &piv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..n {
                    let t = &f * &a[c][j];
                    a[r][j] -= t;
                    let t = &f * &inv[c][j];
                    inv[r][j] -= t;
                }
            }
        }
    }
    Ok(inv)
}

fn params(alpha: f64, theta: f64) -> Result<(BigRational, BigRational)> {
    if !(alpha > -1.0) || !(theta > 0.0) {
        return domain("need alpha > -1 and theta > 0");
    }
    Ok((rat(alpha)?, rat(theta)?))
}

/// Exact Jacobi Gram matrix.
pub fn jacobi_gram(alpha: f64, theta: f64, n: usize) -> Result<RatMatrix> {
    let (a, t) = params(alpha, theta)?;
    Ok((0..n).map(|i| (0..n).map(|j| (int(j as i64 + 1) + &t * int(i as i64) + &a).recip()).collect()).collect())
}

/// Exact evaluation of the closed-form Jacobi inverse.
pub fn jacobi_coeffs(alpha: f64, theta: f64, n: usize) -> Result<RatMatrix> {
    let (a, t) = params(alpha, theta)?;
    let row: Vec<BigRational> = (1..=n)
        .map(|k| &t * pochhammer(&((int(k as i64) + &a) / &t), n) / (factorial(k - 1) * factorial(n - k)))
        .collect();
    let col: Vec<BigRational> = (1..=n)
        .map(|l| pochhammer(&(&t * int(l as i64 - 1) + &a + BigRational::one()), n) / (factorial(l - 1) * factorial(n - l)))
        .collect();
    Ok((0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    let sign = if (k + l) % 2 == 0 { int(1) } else { int(-1) };
                    let d = int(k as i64 + 1) + &t * int(l as i64) + &a;
                    &row[k] * &col[l] * sign / d
                })
                .collect()
        })
        .collect())
}

/// Cauchy part M of the Laguerre Gram matrix (g̃ = M·diag Γ(1+B_j)).
pub fn laguerre_cauchy(alpha: f64, theta: f64, n: usize) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let (a, t) = params(alpha, theta)?;
    let nn = int(n as i64);
    Ok(((0..n).map(|i| int(-(i as i64))).collect(), (0..n).map(|j| &a + &nn + &t * int(j as i64)).collect()))
}

/// Rational part of the closed-form Laguerre inverse: c̃_kl·Γ(1+α+θ(k−1)).
pub fn laguerre_coeffs_scaled(alpha: f64, theta: f64, n: usize) -> Result<RatMatrix> {
    let (a, t) = params(alpha, theta)?;
    let nn = int(n as i64);
    Ok((1..=n)
        .map(|k| {
            (1..=n)
                .map(|l| {
                    let sign = if (n + k + l + 1) % 2 == 0 { int(1) } else { int(-1) };
                    let p = pochhammer(&((&a + &nn - int(l as i64) + BigRational::one()) / &t), n);
                    let d = &a + &nn + &t * int(k as i64 - 1) - int(l as i64 - 1);
                    &t * p * sign / (factorial(k - 1) * factorial(n - k) * factorial(l - 1) * factorial(n - l) * d)
                })
                .collect()
        })
        .collect())
}

fn max_identity_deviation(p: &RatMatrix) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in p.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let d = if i == j { v - BigRational::one() } else { v.clone() };
            worst = worst.max(to_signed_log(&d).to_real().abs());
        }
    }
    worst
}

/// max |C·G − I| with C the closed-form Jacobi inverse, evaluated exactly.
pub fn jacobi_residual(alpha: f64, theta: f64, n: usize) -> Result<f64> {
    Ok(max_identity_deviation(&matmul(&jacobi_coeffs(alpha, theta, n)?, &jacobi_gram(alpha, theta, n)?)))
}

/// max |C̃·g̃ − I| for the closed-form Laguerre inverse. Writing x_k = 1+α+θ(k−1)
/// and B_j = α+N+θ(j−1), the entry is Γ(1+B_j)/Γ(x_k)·(Ĉ·M − diag 1/(x_k)_N)_kj,
/// whose rational bracket is computed exactly.
pub fn laguerre_residual(alpha: f64, theta: f64, n: usize) -> Result<f64> {
    let (am, bm) = laguerre_cauchy(alpha, theta, n)?;
    let t = matmul(&laguerre_coeffs_scaled(alpha, theta, n)?, &cauchy_matrix(&am, &bm)?);
    let (a, th) = params(alpha, theta)?;
    let mut worst = 0.0f64;
    for k in 0..n {
        let xk = &a + BigRational::one() + &th * int(k as i64);
        let target = pochhammer(&xk, n).recip();
        for j in 0..n {
            let bracket = if k == j { &t[k][j] - &target } else { t[k][j].clone() };
            let s = to_signed_log(&bracket);
            if s.is_zero() {
                continue;
            }
            let bj = alpha + n as f64 + theta * j as f64;
            let scale = ln_gamma(1.0 + bj) - ln_gamma(alpha + 1.0 + theta * k as f64);
            worst = worst.max((s.log_mag + scale).exp());
        }
    }
    Ok(worst)
}

/// Largest entrywise relative deviation |c/e − 1| between a signed-log matrix and an
/// oracle given as signed-log values; sign mismatches count as deviation 2.
pub fn max_relative_deviation(c: &CoefficientMatrix, oracle: &dyn Fn(usize, usize) -> SignedLogValue) -> f64 {
    let n = c.n();
    let mut worst = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            let (x, e) = (c.get(k, l), oracle(k, l));
            let d = if x.sign != e.sign {
                2.0
            } else if x.sign == 0 {
                0.0
            } else {
                (x.log_mag - e.log_mag).exp_m1().abs()
            };
            worst = worst.max(d);
        }
    }
    worst
}

/// Deviation of the floating closed-form Jacobi inverse from exact dense inversion of G.
pub fn jacobi_dense_deviation(alpha: f64, theta: f64, n: usize) -> Result<f64> {
    let inv = invert(&jacobi_gram(alpha, theta, n)?)?;
    let c = super::jacobi_coeffs(alpha, theta, n)?;
    Ok(max_relative_deviation(&c, &|k, l| to_signed_log(&inv[k][l])))
}

/// Deviation of the floating closed-form Laguerre inverse from dense inversion:
/// g̃⁻¹ = diag(1/Γ(1+B_k))·M⁻¹ with M⁻¹ exact.
pub fn laguerre_dense_deviation(alpha: f64, theta: f64, n: usize) -> Result<f64> {
    let (am, bm) = laguerre_cauchy(alpha, theta, n)?;
    let inv = invert(&cauchy_matrix(&am, &bm)?)?;
    let c = super::laguerre_coeffs(alpha, theta, n)?;
    Ok(max_relative_deviation(&c, &|k, l| {
        let bk = alpha + n as f64 + theta * k as f64;
        to_signed_log(&inv[k][l]).mul(SignedLogValue::new(1, -ln_gamma(1.0 + bk)))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{cauchy_inverse as float_cauchy, CauchySystem};
    use proptest::prelude::*;

    #[test]
    fn hilbert_inverse() {
        let g = jacobi_gram(0.0, 1.0, 3).unwrap();
        let inv = invert(&g).unwrap();
        let want = [[9, -36, 30], [-36, 192, -180], [30, -180, 180]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(inv[i][j], int(want[i][j]));
            }
        }
    }

    #[test]
    fn closed_forms_exact() {
        for &(a, t) in &[(0.0, 1.0), (0.5, 2.0), (1.5, 0.5)] {
            for n in 1..=12 {
                assert_eq!(jacobi_residual(a, t, n).unwrap(), 0.0, "jacobi ({a},{t}) n={n}");
                assert_eq!(laguerre_residual(a, t, n).unwrap(), 0.0, "laguerre ({a},{t}) n={n}");
            }
        }
    }

    #[test]
    fn perturbed_formula_is_detected() {
        // Using (θ(l−1)+α)_N instead of (θ(l−1)+α+1)_N must break the identity.
        let (a, t, n) = (0.5, 2.0, 3);
        let mut c = jacobi_coeffs(a, t, n).unwrap();
        c[0][0] = &c[0][0] * int(2);
        let r = max_identity_deviation(&matmul(&c, &jacobi_gram(a, t, n).unwrap()));
        assert!(r > 0.1);
    }

    #[test]
    fn float_closed_forms_match_dense_inversion() {
        for &(a, t) in &[(0.0, 1.0), (0.5, 2.0), (1.5, 0.5)] {
            for n in 1..=8 {
                assert!(jacobi_dense_deviation(a, t, n).unwrap() < 1e-12);
                assert!(laguerre_dense_deviation(a, t, n).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn signed_log_of_huge_rationals() {
        let big = BigRational::from_integer(BigInt::from(10).pow(400));
        let s = to_signed_log(&(-big.clone()));
        assert_eq!(s.sign, -1);
        assert!((s.log_mag - 400.0 * 10f64.ln()).abs() < 1e-10);
        assert!((to_signed_log(&big.recip()).log_mag + 400.0 * 10f64.ln()).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn cauchy_inverse_residual(seed in prop::collection::vec(0.1f64..1.0, 1..=10), shift in 0.05f64..3.0) {
            let n = seed.len();
            let a: Vec<f64> = seed.iter().scan(0.0, |s, v| { *s += v; Some(*s) }).collect();
            let b: Vec<f64> = a.iter().map(|x| shift + 1.3 * x).collect();
            let ar: Vec<_> = a.iter().map(|&x| rat(x).unwrap()).collect();
            let br: Vec<_> = b.iter().map(|&x| rat(x).unwrap()).collect();
            let c = cauchy_inverse(&ar, &br);
            let r = max_identity_deviation(&matmul(&cauchy_matrix(&ar, &br).unwrap(), &c));
            prop_assert_eq!(r, 0.0);
            // The floating signed-log closed form agrees with the exact one.
            let f = float_cauchy(&CauchySystem::new(a, b).unwrap());
            prop_assert!(max_relative_deviation(&f, &|k, l| to_signed_log(&c[k][l])) < 1e-11);
            let _ = n;
        }
    }
}
