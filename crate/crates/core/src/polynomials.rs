//! Explicit biorthogonal families.
//!
//! General-exponent pairs on [0,1], the Konhauser pair (Z_n, Y_n) for the weight
//! x^α e^{−x} with powers x^θ, and the Hermite pair (S_n, T_n) built from it by
//! parity. These are a verification surface: they are offered only up to degree
//! [`MAX_DEGREE`], and the kernels module uses closed forms for production work.

use crate::error::{check_alpha, check_theta, domain, Result};
use crate::gram::{biorthogonalize_dd, jacobi_gram_dd};
use crate::kernels::Family;
use crate::numerics::{recip_gamma, DoubleDouble as Dd, NeumaierSum};
use crate::special::signed_pow;
use serde::{Deserialize, Serialize};

/// Highest degree for which the dense polynomial families are built. The Y_n
/// coefficients are alternating finite differences that lose about n·log10(2)
/// plus the Pochhammer growth in digits.
pub const MAX_DEGREE: usize = 12;

/// Σ c_i x^{e_i} with real exponents, terms sorted by exponent.
///
/// Coefficients are plain f64: at the supported sizes they are far from
/// overflow, and a log-magnitude store would cost ε·|ln c| of relative accuracy
/// per coefficient, which the cancelling pairings amplify.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentPolynomial {
    terms: Vec<(f64, f64)>,
    /// Normalising factor already folded into the coefficients.
    pub normalization: f64,
}

impl ExponentPolynomial {
    pub fn new(mut terms: Vec<(f64, f64)>, normalization: f64) -> Result<Self> {
        if let Some((c, e)) = terms.iter().find(|(c, e)| !c.is_finite() || !e.is_finite()) {
            return domain(format!("non-finite term {c} x^{e}"));
        }
        terms.sort_by(|a, b| a.1.total_cmp(&b.1));
        if let Some(w) = terms.windows(2).find(|w| w[0].1 == w[1].1) {
            return domain(format!("repeated exponent {}", w[0].1));
        }
        Ok(Self { terms, normalization })
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    /// Value at x ≥ 0. At x = 0 only a zero exponent contributes; negative
    /// exponents give infinity.
    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            return self
                .terms
                .iter()
                .map(|(c, e)| match e.partial_cmp(&0.0) {
                    Some(std::cmp::Ordering::Equal) => *c,
                    Some(std::cmp::Ordering::Less) => f64::INFINITY.copysign(*c),
                    _ => 0.0,
                })
                .sum();
        }
        self.terms.iter().map(|(c, e)| c * x.powf(*e)).collect::<NeumaierSum>().value()
    }
}

/// Polynomial with real coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensePolynomial {
    coefficients: Vec<f64>,
}

impl DensePolynomial {
    /// Trailing zero coefficients are dropped.
    pub fn new(mut coefficients: Vec<f64>) -> Self {
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        return domain(format!("polynomial families are offered up to degree {MAX_DEGREE} (got {n})"));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// The n-th (1-based) pair (ζ_n, ψ_n) biorthonormal in L²([0,1], dx), with
/// ζ_n spanned by x^{a_1..a_n} and ψ_n by x^{b_1..b_n}.
pub fn biortho_pair_general(a: &[f64], b: &[f64], n: usize) -> Result<(ExponentPolynomial, ExponentPolynomial)> {
    if n == 0 || a.len() < n || b.len() < n {
        return domain(format!("need n >= 1 and at least n exponents of each kind (n = {n})"));
    }
    let (a, b) = (&a[..n], &b[..n]);
    for i in 0..n {
        for j in 0..n {
            if !(a[i] + b[j] > -1.0) {
                return domain(format!("a_{} + b_{} must exceed -1", i + 1, j + 1));
            }
            if i < j && a[i] == a[j] {
                return domain(format!("a_{} and a_{} coincide", i + 1, j + 1));
            }
            if i < j && b[i] == b[j] {
                return domain(format!("b_{} and b_{} coincide", i + 1, j + 1));
            }
        }
    }
    let scale = (a[n - 1] + b[n - 1] + 1.0).sqrt();
    let side = |p: &[f64], q: &[f64]| {
        let terms = (0..n)
            .map(|i| {
                let mut c = scale;
                for &qk in &q[..n - 1] {
                    c *= p[i] + qk + 1.0;
                }
                for (k, &pk) in p.iter().enumerate() {
                    if k != i {
                        c /= p[i] - pk;
                    }
                }
                (c, p[i])
            })
            .collect();
        ExponentPolynomial::new(terms, scale)
    };
    Ok((side(a, b)?, side(b, a)?))
}

/// Z_n^α(u, θ) = Σ_j C(n,j) (−1)^j u^j / Γ(θj + α + 1), as a polynomial in u.
pub fn konhauser_z(alpha: f64, theta: f64, n: usize) -> Result<DensePolynomial> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    check_degree(n)?;
    let c = (0..=n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            s * binomial(n, j) * recip_gamma(theta * j as f64 + alpha + 1.0)
        })
        .collect();
    Ok(DensePolynomial::new(c))
}

/// Y_n^α(x, θ) = (1/n!) Σ_r (x^r / r!) Σ_i (−1)^i C(r,i) ((i+α+1)/θ)_n.
///
/// The inner sum is the r-th forward difference of a degree-n polynomial in i,
/// so it vanishes for r > n; for r ≤ n it is accumulated in double-double.
pub fn konhauser_y(alpha: f64, theta: f64, n: usize) -> Result<DensePolynomial> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    check_degree(n)?;
    let poch: Vec<Dd> = (0..=n)
        .map(|i| {
            let base = Dd::new(i as f64 + alpha + 1.0) / Dd::new(theta);
            (0..n).fold(Dd::ONE, |acc, k| acc * (base + k as f64))
        })
        .collect();
    let mut nfact = Dd::ONE;
    for k in 2..=n {
        nfact = nfact * k as f64;
    }
    let mut rfact = Dd::ONE;
    let c = (0..=n)
        .map(|r| {
            if r > 1 {
                rfact = rfact * r as f64;
            }
            let mut s = Dd::ZERO;
            for (i, p) in poch.iter().enumerate().take(r + 1) {
                let term = *p * binomial(r, i);
                s += if i % 2 == 0 { term } else { -term };
            }
            (s / (nfact * rfact)).to_f64()
        })
        .collect();
    Ok(DensePolynomial::new(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// A Hermite-type polynomial: radial(x²), times x when odd.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityPolynomial {
    pub parity: Parity,
    pub radial: DensePolynomial,
}

impl ParityPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        let r = self.radial.eval(x * x);
        match self.parity {
            Parity::Even => r,
            Parity::Odd => x * r,
        }
    }
}

fn hermite_family(alpha: f64, theta: f64, n: usize, base: fn(f64, f64, usize) -> Result<DensePolynomial>) -> Result<ParityPolynomial> {
    check_alpha(alpha)?;
    let (parity, a) = if n % 2 == 0 { (Parity::Even, (alpha - 1.0) / 2.0) } else { (Parity::Odd, (alpha + theta) / 2.0) };
    Ok(ParityPolynomial { parity, radial: base(a, theta, n / 2)? })
}

/// S_{2m} = Z_m^{(α−1)/2}(x², θ), S_{2m+1} = x·Z_m^{(α+θ)/2}(x², θ).
pub fn hermite_s(alpha: f64, theta: f64, n: usize) -> Result<ParityPolynomial> {
    hermite_family(alpha, theta, n, konhauser_z)
}

/// T_n: as [`hermite_s`] with Y in place of Z.
pub fn hermite_t(alpha: f64, theta: f64, n: usize) -> Result<ParityPolynomial> {
    hermite_family(alpha, theta, n, konhauser_y)
}

enum Pairs {
    /// Row-major coefficients on x^k (left) and y^{θk} (right), one row per index.
    Jacobi { n: usize, left: Vec<f64>, right: Vec<f64> },
    Laguerre(Vec<(DensePolynomial, DensePolynomial)>),
    Hermite(Vec<(ParityPolynomial, ParityPolynomial)>),
}

/// The kernel written as Σ_{i<N} ζ_i(x) ψ_i(y) with an explicit polynomial pair.
///
/// Laguerre uses Z_i(x^θ) Y_i(y), Hermite S_i(x^θ) T_i(y), and Jacobi the Gauss
/// decomposition of the Gram matrix, with ζ_i in integer powers of x and ψ_i in
/// powers of y^θ.
pub struct PolynomialKernel {
    theta: f64,
    pairs: Pairs,
}

impl PolynomialKernel {
    pub fn new(family: Family, alpha: f64, theta: f64, n: usize) -> Result<Self> {
        check_alpha(alpha)?;
        check_theta(theta)?;
        if n == 0 {
            return domain("need at least one term");
        }
        check_degree(n - 1)?;
        let pairs = match family {
            Family::Jacobi => {
                // L·G·U = I with G rows in y^{θ(i−1)} and columns in x^{j−1}.
                let (l, u) = biorthogonalize_dd(&jacobi_gram_dd(alpha, theta, n)?, n)?;
                let left = (0..n * n).map(|idx| u[(idx % n) * n + idx / n].to_f64()).collect();
                Pairs::Jacobi { n, left, right: l.iter().map(|v| v.to_f64()).collect() }
            }
            Family::Laguerre => {
                Pairs::Laguerre((0..n).map(|i| Ok((konhauser_z(alpha, theta, i)?, konhauser_y(alpha, theta, i)?))).collect::<Result<_>>()?)
            }
            Family::Hermite => {
                Pairs::Hermite((0..n).map(|i| Ok((hermite_s(alpha, theta, i)?, hermite_t(alpha, theta, i)?))).collect::<Result<_>>()?)
            }
        };
        Ok(Self { theta, pairs })
    }

    pub fn len(&self) -> usize {
        match &self.pairs {
            Pairs::Jacobi { n, .. } => *n,
            Pairs::Laguerre(p) => p.len(),
            Pairs::Hermite(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (ζ_i(x), ψ_i(y)) for 0-based i.
    pub fn term(&self, i: usize, x: f64, y: f64) -> (f64, f64) {
        let xt = signed_pow(x, self.theta);
        match &self.pairs {
            Pairs::Jacobi { n, left, right } => {
                let yt = signed_pow(y, self.theta);
                let l = left[i * n..(i + 1) * n].iter().rev().fold(0.0, |acc, c| acc * x + c);
                let r = right[i * n..(i + 1) * n].iter().rev().fold(0.0, |acc, c| acc * yt + c);
                (l, r)
            }
            Pairs::Laguerre(p) => (p[i].0.eval(xt), p[i].1.eval(y)),
            Pairs::Hermite(p) => (p[i].0.eval(xt), p[i].1.eval(y)),
        }
    }

    /// Σ_{i<m} ζ_i(x) ψ_i(y) for m ≤ N.
    pub fn partial_sum(&self, m: usize, x: f64, y: f64) -> f64 {
        (0..m.min(self.len())).map(|i| {
            let (a, b) = self.term(i, x, y);
            a * b
        }).sum()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.partial_sum(self.len(), x, y)
    }
}

pub fn kernel_from_polynomials(family: Family, alpha: f64, theta: f64, n: usize, x: f64, y: f64) -> Result<f64> {
    Ok(PolynomialKernel::new(family, alpha, theta, n)?.eval(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{integrate_against_weight, EnsembleSpec, FiniteKernel};
    use crate::numerics::{ln_gamma, SeriesConfig};
    use proptest::prelude::*;

    #[test]
    fn general_pair_n1() {
        let (z, p) = biortho_pair_general(&[0.3], &[1.2], 1).unwrap();
        let s = (0.3f64 + 1.2 + 1.0).sqrt();
        assert!((z.eval(0.5) - s * 0.5f64.powf(0.3)).abs() < 1e-15);
        assert!((p.eval(0.5) - s * 0.5f64.powf(1.2)).abs() < 1e-15);
    }

    #[test]
    fn general_pair_rejects_bad_input() {
        let e = biortho_pair_general(&[0.0, 1.0], &[-1.5, 2.0], 2).unwrap_err();
        assert!(e.to_string().contains("a_1 + b_1"), "{e}");
        assert!(biortho_pair_general(&[0.0, 0.0], &[1.0, 2.0], 2).unwrap_err().to_string().contains("a_1 and a_2"));
        assert!(biortho_pair_general(&[0.0], &[1.0], 2).is_err());
    }

    // ∫₀¹ x^{a_i + b_j} dx = 1/(a_i + b_j + 1), so the pairing is a finite sum.
    fn pairing(z: &ExponentPolynomial, p: &ExponentPolynomial) -> f64 {
        let mut s = Dd::ZERO;
        for (c, e) in z.terms() {
            for (d, f) in p.terms() {
                s += Dd::new(c * d) / Dd::new(e + f + 1.0);
            }
        }
        s.to_f64()
    }

    proptest! {
        #[test]
        fn general_pairs_are_biorthonormal(
            a0 in 0.0f64..2.0,
            b0 in -0.5f64..2.0,
            da in proptest::collection::vec(0.8f64..2.0, 4),
            db in proptest::collection::vec(0.8f64..2.0, 4),
            shuffle in 0usize..5,
        ) {
            // Separated exponents; near-coincident ones make the pair itself ill-conditioned.
            let walk = |x0: f64, d: &[f64]| {
                let mut v = vec![x0];
                for g in d {
                    v.push(v.last().unwrap() + g);
                }
                v
            };
            let (mut a, b) = (walk(a0, &da), walk(b0, &db));
            a.rotate_left(shuffle);
            let pairs: Vec<_> = (1..=5).map(|n| biortho_pair_general(&a, &b, n).unwrap()).collect();
            for m in 0..5 {
                for n in 0..5 {
                    let v = pairing(&pairs[m].0, &pairs[n].1);
                    let want = if m == n { 1.0 } else { 0.0 };
                    prop_assert!((v - want).abs() < 1e-9, "m={} n={} {}", m, n, v);
                }
            }
        }
    }

    // Orthonormal shifted Legendre √(2n+1) P_n(2x−1) by the three-term recurrence.
    fn shifted_legendre(n: usize, x: f64) -> f64 {
        let t = 2.0 * x - 1.0;
        let (mut p0, mut p1) = (0.0, 1.0);
        for k in 0..n {
            let kf = k as f64;
            let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        (2.0 * n as f64 + 1.0).sqrt() * p1
    }

    #[test]
    fn integer_exponents_give_legendre() {
        let e: Vec<f64> = (0..5).map(f64::from).collect();
        for n in 1..=5 {
            let (z, p) = biortho_pair_general(&e, &e, n).unwrap();
            for &x in &[0.05, 0.3, 0.5, 0.77, 1.0] {
                let want = shifted_legendre(n - 1, x);
                assert!((z.eval(x) - want).abs() < 1e-12, "n={n} x={x}");
                assert!((p.eval(x) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn konhauser_examples() {
        let a = 0.7;
        let z0 = konhauser_z(a, 2.0, 0).unwrap();
        assert!((z0.coefficients()[0] - (-ln_gamma(a + 1.0)).exp()).abs() < 1e-15);
        let z1 = konhauser_z(a, 2.0, 1).unwrap();
        assert!((z1.coefficients()[1] + (-ln_gamma(a + 3.0)).exp()).abs() < 1e-15);
        assert_eq!(konhauser_y(a, 2.0, 0).unwrap().coefficients(), &[1.0]);
        assert!(konhauser_z(a, 1.0, MAX_DEGREE + 1).is_err());
        for n in 0..=MAX_DEGREE {
            assert_eq!(konhauser_z(a, 0.5, n).unwrap().degree(), Some(n));
            assert_eq!(konhauser_y(a, 0.5, n).unwrap().degree(), Some(n));
        }
    }

    // Classical Laguerre L_n^{(α)} by recurrence; at θ = 1 both Z_n·Γ(n+α+1)/n!
    // and Y_n equal it.
    fn laguerre(alpha: f64, n: usize, x: f64) -> f64 {
        let (mut p0, mut p1) = (0.0, 1.0);
        for k in 0..n {
            let kf = k as f64;
            let p2 = ((2.0 * kf + 1.0 + alpha - x) * p1 - (kf + alpha) * p0) / (kf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn theta_one_is_classical_laguerre() {
        for &alpha in &[0.0, 0.5, 2.0] {
            for n in 0..=4 {
                let z = konhauser_z(alpha, 1.0, n).unwrap();
                let y = konhauser_y(alpha, 1.0, n).unwrap();
                let scale = (ln_gamma(n as f64 + alpha + 1.0) - ln_gamma(n as f64 + 1.0)).exp();
                for &x in &[0.1, 1.0, 3.3, 8.0] {
                    let want = laguerre(alpha, n, x);
                    let tol = 1e-12 * want.abs().max(1.0);
                    assert!((z.eval(x) * scale - want).abs() < tol, "Z a={alpha} n={n} x={x}");
                    assert!((y.eval(x) - want).abs() < tol, "Y a={alpha} n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn konhauser_biorthonormality() {
        let cfg = SeriesConfig::default();
        for &(alpha, theta) in &[(0.0, 1.0), (0.5, 2.0), (1.5, 0.5)] {
            let spec = EnsembleSpec::new(Family::Laguerre, alpha, theta, 1).unwrap();
            for m in 0..=4 {
                let z = konhauser_z(alpha, theta, m).unwrap();
                for n in 0..=4 {
                    let y = konhauser_y(alpha, theta, n).unwrap();
                    let v = integrate_against_weight(&spec, |x| z.eval(x.powf(theta)) * y.eval(x), &cfg).unwrap();
                    let want = if m == n { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-8, "({alpha},{theta}) m={m} n={n}: {v}");
                }
            }
        }
    }

    #[test]
    fn hermite_examples_and_biorthonormality() {
        let (alpha, theta) = (0.5, 1.5);
        let s0 = hermite_s(alpha, theta, 0).unwrap();
        assert_eq!(s0.parity, Parity::Even);
        assert!((s0.eval(0.3) - (-ln_gamma((alpha + 1.0) / 2.0)).exp()).abs() < 1e-15);
        let s1 = hermite_s(alpha, theta, 1).unwrap();
        assert_eq!(s1.parity, Parity::Odd);
        assert!((s1.eval(2.0) - 2.0 * (-ln_gamma((alpha + theta + 2.0) / 2.0)).exp()).abs() < 1e-14);
        assert_eq!(hermite_t(alpha, theta, 0).unwrap().eval(-4.0), 1.0);

        let cfg = SeriesConfig::default();
        for &(alpha, theta) in &[(0.0, 1.0), (0.5, 2.0), (1.5, 0.5)] {
            let spec = EnsembleSpec::new(Family::Hermite, alpha, theta, 1).unwrap();
            for m in 0..=4 {
                let s = hermite_s(alpha, theta, m).unwrap();
                for n in 0..=4 {
                    let t = hermite_t(alpha, theta, n).unwrap();
                    let v = integrate_against_weight(&spec, |x| s.eval(signed_pow(x, theta)) * t.eval(x), &cfg).unwrap();
                    let want = if m == n { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-8, "({alpha},{theta}) m={m} n={n}: {v}");
                }
            }
        }
    }

    #[test]
    fn polynomial_sum_matches_closed_form_kernels() {
        let pts = [0.15, 0.4, 0.85];
        for fam in [Family::Jacobi, Family::Laguerre, Family::Hermite] {
            for &(alpha, theta) in &[(0.0, 1.0), (0.5, 2.0), (1.5, 0.5), (-0.3, 1.7)] {
                for n in 1..=6 {
                    let pk = PolynomialKernel::new(fam, alpha, theta, n).unwrap();
                    let k = FiniteKernel::new(EnsembleSpec::new(fam, alpha, theta, n).unwrap()).unwrap();
                    let scale = if fam == Family::Jacobi { 1.0 } else { 3.0 };
                    let sign = if fam == Family::Hermite { -1.0 } else { 1.0 };
                    for &x in &pts {
                        for &y in &pts {
                            let (x, y) = (x * scale * sign, y * scale);
                            let (got, want) = (pk.eval(x, y), k.eval(x, y).unwrap());
                            assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "{fam} ({alpha},{theta}) N={n} ({x},{y}): {got} vs {want}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn general_pair_gives_jacobi_kernel() {
        let (alpha, theta, n) = (0.5, 2.0, 5);
        let a: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..n).map(|i| theta * i as f64 + alpha).collect();
        let pairs: Vec<_> = (1..=n).map(|m| biortho_pair_general(&a, &b, m).unwrap()).collect();
        for &(x, y) in &[(0.2, 0.7), (0.5, 0.5), (0.9, 0.1)] {
            let s: f64 = pairs.iter().map(|(z, p)| z.eval(x) * p.eval(y)).sum::<f64>() * y.powf(-alpha);
            let want = crate::kernels::kernel_jacobi(alpha, theta, n, x, y).unwrap();
            assert!((s - want).abs() < 1e-9 * (1.0 + want.abs()), "({x},{y}): {s} vs {want}");
        }
    }

    #[test]
    fn partial_sums_step_by_one_term() {
        let pk = PolynomialKernel::new(Family::Laguerre, 0.5, 1.5, 6).unwrap();
        for m in 1..6 {
            let (a, b) = pk.term(m, 1.3, 0.6);
            let step = pk.partial_sum(m + 1, 1.3, 0.6) - pk.partial_sum(m, 1.3, 0.6);
            assert!((step - a * b).abs() < 1e-13);
            let smaller = PolynomialKernel::new(Family::Laguerre, 0.5, 1.5, m).unwrap();
            assert!((smaller.eval(1.3, 0.6) - pk.partial_sum(m, 1.3, 0.6)).abs() < 1e-13);
        }
    }
}
