//! Named suites of numerical invariant checks, each reporting measured
//! residuals against fixed thresholds.

use crate::error::{domain, Error, Result};
use crate::gram::exact;
use crate::kernels::{
    integrate_against_weight, integrate_against_weight_dd, reproduced_function, reproduced_function_dd, DdPoint,
    EnsembleSpec, Family, FiniteKernel,
};
use crate::numerics::{ln_gamma, DdIntegrator, SeriesConfig};
use crate::polynomials::PolynomialKernel;
use crate::scaling::{finite_laguerre_symmetry, hermite_limit_symmetry, limit_symmetry, Component};
use crate::special::{bessel_kernel, limit_kernel, limit_kernel_hermite, wright_bessel, LimitKernelParams, Method};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Kernels,
    Gram,
    Polynomials,
    Symmetry,
    Reductions,
    Components,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Kernels, Suite::Gram, Suite::Polynomials, Suite::Symmetry, Suite::Reductions, Suite::Components];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernels => "kernels",
            Suite::Gram => "gram",
            Suite::Polynomials => "polynomials",
            Suite::Symmetry => "symmetry",
            Suite::Reductions => "reductions",
            Suite::Components => "components",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Suite::Kernels => "reproducing property, trace = N and the classical Christoffel-Darboux case",
            Suite::Gram => "closed-form Gram inverses: exact C*G - I and agreement with dense inversion",
            Suite::Polynomials => "kernels rebuilt from biorthonormal polynomial pairs",
            Suite::Symmetry => "(alpha, theta) -> ((alpha+1)/theta - 1, 1/theta) invariance of the limits",
            Suite::Reductions => "sine kernel, Bessel kernel and the Wright-Bessel identity",
            Suite::Components => "scaled A_N, B_N, C_N, D_N against their Wright-function limits",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .map_or_else(|| domain(format!("unknown suite '{s}'")), Ok)
    }
}

/// Whether a check wants the residual small or (for expected violations) large.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Self { name: name.into(), residual, threshold, bound: Bound::AtMost, passed: residual <= threshold }
    }

    pub fn at_least(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Self { name: name.into(), residual, threshold, bound: Bound::AtLeast, passed: residual >= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Kernels => kernels()?,
        Suite::Gram => gram()?,
        Suite::Polynomials => polynomials()?,
        Suite::Symmetry => symmetry()?,
        Suite::Reductions => reductions()?,
        Suite::Components => components()?,
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { suite, checks, passed })
}

const FAMILIES: [Family; 3] = [Family::Jacobi, Family::Laguerre, Family::Hermite];

fn probes(f: Family) -> [f64; 5] {
    match f {
        Family::Jacobi => [0.1, 0.3, 0.5, 0.7, 0.9],
        Family::Laguerre => [0.3, 1.0, 2.5, 4.0, 7.0],
        Family::Hermite => [-1.5, -0.4, 0.2, 0.9, 1.8],
    }
}

fn kernels() -> Result<Vec<Check>> {
    let ig = DdIntegrator::new();
    let cfg = SeriesConfig::default();
    let mut out = Vec::new();
    for fam in FAMILIES {
        for &(alpha, theta) in &[(0.0, 1.0), (0.5, 2.0), (1.5, 0.5)] {
            let (mut trace, mut repro, mut trace64) = (0.0f64, 0.0f64, 0.0f64);
            for n in [1usize, 3, 6] {
                let spec = EnsembleSpec::new(fam, alpha, theta, n)?;
                let k = FiniteKernel::new(spec)?;
                let nf = n as f64;
                let t = integrate_against_weight_dd(&spec, &ig, |p| k.eval_dd(p, p).unwrap_or(f64::NAN.into()))?;
                trace = trace.max((t.to_f64() - nf).abs());
                let t64 = integrate_against_weight(&spec, |x| k.eval(x, x).unwrap_or(f64::NAN), &cfg)?;
                trace64 = trace64.max((t64 - nf).abs());
                for j in 1..=n {
                    for &x in &probes(fam)[..3] {
                        let px = DdPoint::new(x, theta);
                        let v = integrate_against_weight_dd(&spec, &ig, |p| {
                            k.eval_dd(&px, p).unwrap_or(f64::NAN.into()) * reproduced_function_dd(&spec, j, p)
                        })?
                        .to_f64();
                        let want = reproduced_function(&spec, j, x);
                        repro = repro.max((v - want).abs() / want.abs().max(1.0));
                    }
                }
            }
            let tag = format!("{fam} alpha={alpha} theta={theta}");
            out.push(Check::at_most(format!("trace {tag}"), trace, 1e-6));
            out.push(Check::at_most(format!("trace (f64 quadrature) {tag}"), trace64, 1e-6));
            out.push(Check::at_most(format!("reproducing {tag}"), repro, 1e-6));
        }
    }
    let mut cd = 0.0f64;
    for n in [2usize, 5, 9] {
        let k = FiniteKernel::new(EnsembleSpec::new(Family::Hermite, 0.0, 1.0, n)?)?;
        for &x in &probes(Family::Hermite) {
            for &y in &probes(Family::Hermite) {
                cd = cd.max((k.eval(x, y)? - hermite_christoffel_darboux(n, x, y)).abs());
            }
        }
    }
    out.push(Check::at_most("hermite theta=1 equals Christoffel-Darboux sum", cd, 1e-8));
    Ok(out)
}

/// Σ_{k<n} h_k(x)h_k(y) for Hermite functions orthonormal against e^{−x²}.
fn hermite_christoffel_darboux(n: usize, x: f64, y: f64) -> f64 {
    let values = |t: f64| {
        let mut h = Vec::with_capacity(n);
        let (mut a, mut b) = (0.0, PI.powf(-0.25));
        h.push(b);
        for k in 1..n {
            let kf = k as f64;
            let c = (2.0 / kf).sqrt() * t * b - ((kf - 1.0) / kf).sqrt() * a;
            a = b;
            b = c;
            h.push(b);
        }
        h
    };
    values(x).iter().zip(values(y)).map(|(a, b)| a * b).sum()
}

fn gram() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &(alpha, theta) in &[(0.0, 1.0), (0.5, 2.0), (1.5, 0.5)] {
        let (mut jr, mut lr, mut jd, mut ld) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for n in 1..=12 {
            jr = jr.max(exact::jacobi_residual(alpha, theta, n)?);
            lr = lr.max(exact::laguerre_residual(alpha, theta, n)?);
            if n <= 8 {
                jd = jd.max(exact::jacobi_dense_deviation(alpha, theta, n)?);
                ld = ld.max(exact::laguerre_dense_deviation(alpha, theta, n)?);
            }
        }
        let tag = format!("alpha={alpha} theta={theta}");
        out.push(Check::at_most(format!("jacobi |C*G - I| N<=12 {tag}"), jr, 1e-8));
        out.push(Check::at_most(format!("laguerre |C*G - I| N<=12 {tag}"), lr, 1e-8));
        out.push(Check::at_most(format!("jacobi closed form vs dense inverse N<=8 {tag}"), jd, 1e-6));
        out.push(Check::at_most(format!("laguerre closed form vs dense inverse N<=8 {tag}"), ld, 1e-6));
    }
    Ok(out)
}

/// Deterministic pseudo-random points for a family.
fn random_points(fam: Family, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            match fam {
                Family::Jacobi => 0.02 + 0.96 * u,
                Family::Laguerre => 0.1 + 6.0 * u,
                Family::Hermite => -2.0 + 4.0 * u,
            }
        })
        .collect()
}

fn polynomials() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for fam in FAMILIES {
        for &(alpha, theta) in &[(0.0, 1.0), (0.5, 2.0)] {
            let pts = random_points(fam, 20, 51);
            let mut worst = 0.0f64;
            for n in 1..=6 {
                let poly = PolynomialKernel::new(fam, alpha, theta, n)?;
                let k = FiniteKernel::new(EnsembleSpec::new(fam, alpha, theta, n)?)?;
                for p in pts.chunks_exact(2) {
                    let want = k.eval(p[0], p[1])?;
                    worst = worst.max((poly.eval(p[0], p[1]) - want).abs() / (1.0 + want.abs()));
                }
            }
            out.push(Check::at_most(format!("{fam} polynomial sum vs kernel N<=6 alpha={alpha} theta={theta}"), worst, 1e-9));
        }
    }
    Ok(out)
}

fn symmetry() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &(alpha, theta) in &[(0.0, 2.0), (1.0, 0.5)] {
        let p = LimitKernelParams::new(alpha, theta)?;
        let (a2, t2) = crate::scaling::symmetry_map(alpha, theta)?;
        let q = LimitKernelParams::new(a2, t2)?;
        let (mut with_theta, mut printed) = (0.0f64, f64::INFINITY);
        for &(x, y) in &[(0.0, 0.0), (0.5, 1.2), (2.0, 0.3), (1.5, 1.5)] {
            let lhs = limit_kernel(p, f64::powf(y, 1.0 / theta), f64::powf(x, 1.0 / theta), Method::Series)?;
            let rhs = limit_kernel(q, x, y, Method::Series)?;
            with_theta = with_theta.max((lhs - theta * rhs).abs() / (1.0 + lhs.abs()));
            printed = printed.min((lhs - rhs / theta).abs() / (1.0 + lhs.abs()));
        }
        let tag = format!("alpha={alpha} theta={theta}");
        out.push(Check::at_most(format!("scalar identity with factor theta {tag}"), with_theta, 1e-9));
        out.push(Check::at_least(format!("scalar identity with factor 1/theta fails {tag}"), printed, 1e-3));

        let (mut hard, mut bulk) = (0.0f64, 0.0f64);
        let pos = random_points(Family::Laguerre, 15, 77);
        let real = random_points(Family::Hermite, 15, 78);
        for (a, b) in pos.chunks_exact(3).zip(real.chunks_exact(3)) {
            let a: Vec<f64> = a.iter().map(|x| x.min(3.0)).collect();
            hard = hard.max(limit_symmetry(alpha, theta, &a)?.relative_residual());
            bulk = bulk.max(hermite_limit_symmetry(alpha, theta, b)?.relative_residual());
        }
        out.push(Check::at_most(format!("hard-edge limit determinant invariance {tag}"), hard, 1e-8));
        out.push(Check::at_most(format!("hermite limit determinant invariance {tag}"), bulk, 1e-8));
        let finite = finite_laguerre_symmetry(alpha, theta, 3, &[0.4, 1.1, 2.3])?.relative_residual();
        out.push(Check::at_least(format!("finite N=3 laguerre violates invariance {tag}"), finite, 1e-3));
    }
    Ok(out)
}

/// J_ν(z) from its power series with the term ratio −(z/2)²/((m+1)(m+ν+1)).
pub fn bessel_j_series(nu: f64, z: f64) -> f64 {
    let h = 0.5 * z;
    let mut term = (nu * h.ln() - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    for m in 0..500 {
        let mf = m as f64;
        term *= -h * h / ((mf + 1.0) * (mf + nu + 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() && mf > h {
            break;
        }
    }
    sum
}

fn reductions() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let p = LimitKernelParams::new(0.0, 1.0)?;
    let mut sine = 0.0f64;
    for i in 0..9 {
        for j in 0..9 {
            let (x, y) = (-2.0 + 0.5 * i as f64, -2.0 + 0.5 * j as f64);
            let want = if x == y { 2.0 / PI } else { (2.0 * (x - y)).sin() / (PI * (x - y)) };
            sine = sine.max((limit_kernel_hermite(p, x, y)? - want).abs());
        }
    }
    out.push(Check::at_most("hermite alpha=0 theta=1 limit is the sine kernel", sine, 1e-8));
    for &alpha in &[0.0, 0.5, 2.0] {
        let p = LimitKernelParams::new(alpha, 1.0)?;
        let mut worst = 0.0f64;
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for i in 1..=5 {
            for j in 1..=5 {
                pairs.push((0.8 * i as f64, 0.8 * j as f64));
            }
        }
        pairs.extend([(1.0, 1.0 + 1e-5), (3.2, 3.2 - 1e-5)]);
        for (x, y) in pairs {
            let k = (x * y).powf(alpha / 2.0) * limit_kernel(p, x, y, Method::Auto)?;
            worst = worst.max((k - bessel_kernel(alpha, x, y)?).abs());
        }
        out.push(Check::at_most(format!("theta=1 limit is the Bessel kernel alpha={alpha}"), worst, 1e-8));
    }
    let mut wb = 0.0f64;
    for &a in &[0.0, 0.5, 1.0, 2.3] {
        for &x in &[0.1, 1.0, 5.0, 20.0] {
            let lhs = f64::powf(x, a / 2.0) * wright_bessel(a + 1.0, 1.0, x)?;
            wb = wb.max((lhs - bessel_j_series(a, 2.0 * f64::sqrt(x))).abs());
        }
    }
    out.push(Check::at_most("x^(a/2) J_(a+1,1)(x) = J_a(2 sqrt x)", wb, 1e-10));
    Ok(out)
}

fn components() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &(alpha, theta) in &[(0.0, 1.0), (0.5, 2.0)] {
        for c in Component::ALL {
            let mut sup = [0.0f64; 2];
            for &x in &[0.25, 0.5, 1.0, 2.0, 4.0] {
                let lim = c.limit(alpha, theta, x)?;
                for (slot, n) in [100usize, 400].into_iter().enumerate() {
                    sup[slot] = sup[slot].max((c.scaled(alpha, theta, n, x)? - lim).abs());
                }
            }
            let tag = format!("{c:?} alpha={alpha} theta={theta}");
            out.push(Check::at_most(format!("component {tag} at N=400"), sup[1], 0.02));
            out.push(Check::at_least(format!("component {tag} error drop from N=100 to 400"), sup[0] - sup[1], 0.0));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn bessel_series_values() {
        // J_0(1) and J_1(2) from standard tables.
        assert!((bessel_j_series(0.0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j_series(1.0, 2.0) - 0.576_724_807_756_873_4).abs() < 1e-15);
    }

    #[test]
    fn check_bounds() {
        assert!(Check::at_most("a", 1.0, 2.0).passed);
        assert!(!Check::at_most("a", f64::NAN, 2.0).passed);
        assert!(Check::at_least("a", 3.0, 2.0).passed);
    }

    #[test]
    fn quick_suites_pass() {
        for s in [Suite::Reductions, Suite::Polynomials, Suite::Symmetry] {
            let r = run_suite(s).unwrap();
            for c in &r.checks {
                assert!(c.passed, "{c:?}");
            }
        }
    }
}
