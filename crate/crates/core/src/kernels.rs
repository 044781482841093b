//! Finite-N correlation kernels of the Jacobi, Laguerre and Hermite
//! biorthogonal ensembles, their weights, and n-point correlation functions.
//!
//! Two evaluation paths share one coefficient table per ensemble:
//! * double-double accumulation for N ≤ [`DD_MAX_N`], which survives the heavy
//!   cancellation of the alternating coefficient sums at unscaled arguments;
//! * signed-log pairing for larger N, where coefficients overflow `f64` and the
//!   kernel is only ever evaluated at scaled (small) arguments.

use crate::error::{check_alpha, check_theta, domain, Error, Result};
use crate::numerics::{
    integrate_half_line, integrate_weighted_power, ln_factorial, Abscissa, DdIntegrator, ln_gamma, log_pochhammer, rational_denominator,
    DoubleDouble as Dd, NeumaierSum, SeriesConfig, SignedLogValue,
};
use crate::special::signed_pow;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Largest N evaluated with double-double tables.
pub const DD_MAX_N: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Jacobi,
    Laguerre,
    Hermite,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jacobi" => Ok(Family::Jacobi),
            "laguerre" => Ok(Family::Laguerre),
            "hermite" => Ok(Family::Hermite),
            _ => domain(format!("unknown family '{s}' (expected jacobi, laguerre or hermite)")),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Jacobi => "jacobi",
            Family::Laguerre => "laguerre",
            Family::Hermite => "hermite",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub family: Family,
    pub alpha: f64,
    pub theta: f64,
    pub n_points: usize,
}

impl EnsembleSpec {
    pub fn new(family: Family, alpha: f64, theta: f64, n_points: usize) -> Result<Self> {
        check_alpha(alpha)?;
        check_theta(theta)?;
        if n_points == 0 {
            return domain("n must be >= 1");
        }
        Ok(Self { family, alpha, theta, n_points })
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.family {
            Family::Jacobi => x > 0.0 && x < 1.0,
            Family::Laguerre => x > 0.0 && x.is_finite(),
            Family::Hermite => x.is_finite(),
        }
    }
}

/// ω(x): x^α on (0,1), x^α e^{−x} on (0,∞), |x|^α e^{−x²} on ℝ.
pub fn weight(spec: &EnsembleSpec, x: f64) -> Result<f64> {
    if !spec.contains(x) {
        return domain(format!("x = {x} lies outside the {} interval", spec.family));
    }
    let a = spec.alpha;
    Ok(match spec.family {
        Family::Jacobi => x.powf(a),
        Family::Laguerre => (a * x.ln() - x).exp(),
        Family::Hermite => {
            if x == 0.0 {
                if a < 0.0 {
                    return domain("Hermite weight is infinite at 0 for alpha < 0");
                }
                return Ok(if a == 0.0 { 1.0 } else { 0.0 });
            }
            (a * x.abs().ln() - x * x).exp()
        }
    })
}

fn sign_of(parity: usize) -> f64 {
    if parity % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn dd_pochhammer(a: Dd, m: usize) -> Dd {
    let mut p = Dd::ONE;
    let mut f = a;
    for _ in 0..m {
        p *= f;
        f = f + 1.0;
    }
    p
}

fn dd_factorial(n: usize) -> Dd {
    (1..=n).fold(Dd::ONE, |acc, k| acc * k as f64)
}

/// Γ(a) for a ≥ 1 as Γ(r)·(r)_m with r ∈ [1, 2), so that all values sharing a
/// fractional part share one rounding error.
fn dd_gamma(a: f64) -> Dd {
    let m = (a - 1.0).floor().max(0.0) as usize;
    let r = a - m as f64;
    dd_pochhammer(Dd::new(r), m) * ln_gamma(r).exp()
}

/// Coefficient tables of the Jacobi kernel Σ_{k,l} c_kl x^k y^{θl} (zero-based).
#[derive(Debug, Clone)]
struct JacobiTables {
    n: usize,
    theta: f64,
    row_log: Vec<SignedLogValue>,
    col_log: Vec<SignedLogValue>,
    den: Vec<f64>,
    dd: Option<(Vec<Dd>, Vec<Dd>, Vec<Dd>)>,
}

impl JacobiTables {
    /// Double-double evaluation from x and y^θ; requires the dd tables.
    fn eval_dd(&self, x: Dd, yt: Dd) -> Dd {
        let n = self.n;
        let (rows, cols, inv) = self.dd.as_ref().expect("double-double tables");
        let mut yp = Vec::with_capacity(n);
        let mut p = Dd::ONE;
        for _ in 0..n {
            yp.push(p);
            p = p * yt;
        }
        let mut total = Dd::ZERO;
        let mut xp = Dd::ONE;
        for k in 0..n {
            let mut w = Dd::ZERO;
            for l in 0..n {
                w += cols[l] * yp[l] * inv[k * n + l];
            }
            total += rows[k] * xp * w;
            xp = xp * x;
        }
        total
    }

    fn new(alpha: f64, theta: f64, n: usize) -> Self {
        let nn = n as u64;
        let row_log = (0..n)
            .map(|k| {
                let f = ln_factorial(k as u64) + ln_factorial(nn - 1 - k as u64);
                log_pochhammer((k as f64 + 1.0 + alpha) / theta, n)
                    .mul(SignedLogValue::new(if k % 2 == 0 { 1 } else { -1 }, theta.ln() - f))
            })
            .collect();
        let col_log = (0..n)
            .map(|l| {
                let f = ln_factorial(l as u64) + ln_factorial(nn - 1 - l as u64);
                log_pochhammer(theta * l as f64 + alpha + 1.0, n).mul(SignedLogValue::new(if l % 2 == 0 { 1 } else { -1 }, -f))
            })
            .collect();
        let mut den = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                den.push(k as f64 + 1.0 + alpha + theta * l as f64);
            }
        }
        let dd = (n <= DD_MAX_N).then(|| {
            let (a, t) = (Dd::new(alpha), Dd::new(theta));
            let rows = (0..n)
                .map(|k| {
                    let p = dd_pochhammer((a + (k as f64 + 1.0)) / t, n);
                    t * p / (dd_factorial(k) * dd_factorial(n - 1 - k)) * sign_of(k)
                })
                .collect();
            let cols = (0..n)
                .map(|l| {
                    let p = dd_pochhammer(t * l as f64 + a + 1.0, n);
                    p / (dd_factorial(l) * dd_factorial(n - 1 - l)) * sign_of(l)
                })
                .collect();
            let mut inv = Vec::with_capacity(n * n);
            for k in 0..n {
                for l in 0..n {
                    inv.push((t * l as f64 + a + (k as f64 + 1.0)).recip());
                }
            }
            (rows, cols, inv)
        });
        Self { n, theta, row_log, col_log, den, dd }
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let n = self.n;
        let yt = y.powf(self.theta);
        if self.dd.is_some() {
            return self.eval_dd(Dd::new(x), Dd::new(yt)).to_f64();
        }
        let a = scaled_powers(&self.row_log, x.ln(), x == 0.0);
        let b = scaled_powers(&self.col_log, yt.ln(), yt == 0.0);
        let mut total = NeumaierSum::default();
        for k in 0..n {
            if a.values[k] == 0.0 {
                continue;
            }
            let mut w = NeumaierSum::default();
            for l in 0..n {
                w.add(b.values[l] / self.den[k * n + l]);
            }
            total.add(a.values[k] * w.value());
        }
        total.value() * (a.shift + b.shift).exp()
    }
}

/// c_k·z^k rescaled by the largest magnitude: values[k]·exp(shift) = c_k z^k.
struct Scaled {
    values: Vec<f64>,
    shift: f64,
}

fn scaled_powers(coef: &[SignedLogValue], ln_z: f64, z_is_zero: bool) -> Scaled {
    let logs: Vec<f64> = coef
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if c.is_zero() || (z_is_zero && k > 0) {
                f64::NEG_INFINITY
            } else if k == 0 {
                c.log_mag
            } else {
                c.log_mag + ln_z * k as f64
            }
        })
        .collect();
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };
    let values = logs.iter().zip(coef).map(|(l, c)| f64::from(c.sign) * (l - shift).exp()).collect();
    Scaled { values, shift }
}

/// Coefficient tables of the Laguerre kernel
/// θ Σ_{k,i} u_k v_i x^{θk} y^i E_{N−1−i}(y) / (α+θk+i+1), E_m the truncated exponential.
#[derive(Debug, Clone)]
struct LaguerreTables {
    n: usize,
    theta: f64,
    u_log: Vec<SignedLogValue>,
    v_log: Vec<SignedLogValue>,
    den: Vec<f64>,
    dd: Option<(Vec<Dd>, Vec<Dd>, Vec<Dd>)>,
}

impl LaguerreTables {
    /// Double-double evaluation from x^θ and y; requires the dd tables.
    fn eval_dd(&self, xt: Dd, y: Dd) -> Dd {
        let n = self.n;
        let (u, v, inv) = self.dd.as_ref().expect("double-double tables");
        // E_m(y) and y^i.
        let mut e = Vec::with_capacity(n);
        let mut yp = Vec::with_capacity(n);
        let (mut term, mut acc, mut p) = (Dd::ONE, Dd::ZERO, Dd::ONE);
        for m in 0..n {
            if m > 0 {
                term = term * y / Dd::new(m as f64);
            }
            acc += term;
            e.push(acc);
            yp.push(p);
            p = p * y;
        }
        let b: Vec<Dd> = (0..n).map(|i| v[i] * yp[i] * e[n - 1 - i]).collect();
        let mut total = Dd::ZERO;
        let mut xp = Dd::ONE;
        for k in 0..n {
            let mut w = Dd::ZERO;
            for i in 0..n {
                w += b[i] * inv[k * n + i];
            }
            total += u[k] * xp * w;
            xp = xp * xt;
        }
        total * self.theta
    }

    fn new(alpha: f64, theta: f64, n: usize) -> Self {
        let nn = n as u64;
        let u_log = (0..n)
            .map(|k| {
                let f = ln_factorial(k as u64) + ln_factorial(nn - 1 - k as u64) + ln_gamma(alpha + theta * k as f64 + 1.0);
                SignedLogValue::new(if k % 2 == 0 { 1 } else { -1 }, -f)
            })
            .collect();
        let v_log = (0..n)
            .map(|i| {
                log_pochhammer((i as f64 + alpha + 1.0) / theta, n)
                    .mul(SignedLogValue::new(if i % 2 == 0 { 1 } else { -1 }, -ln_factorial(i as u64)))
            })
            .collect();
        let mut den = Vec::with_capacity(n * n);
        for k in 0..n {
            for i in 0..n {
                den.push(alpha + theta * k as f64 + i as f64 + 1.0);
            }
        }
        let dd = (n <= DD_MAX_N).then(|| {
            let (a, t) = (Dd::new(alpha), Dd::new(theta));
            let u = (0..n)
                .map(|k| {
                    let g = dd_gamma(alpha + theta * k as f64 + 1.0);
                    (g * dd_factorial(k) * dd_factorial(n - 1 - k)).recip() * sign_of(k)
                })
                .collect();
            let v = (0..n)
                .map(|i| dd_pochhammer((a + (i as f64 + 1.0)) / t, n) / dd_factorial(i) * sign_of(i))
                .collect();
            let mut inv = Vec::with_capacity(n * n);
            for k in 0..n {
                for i in 0..n {
                    inv.push((t * k as f64 + a + (i as f64 + 1.0)).recip());
                }
            }
            (u, v, inv)
        });
        Self { n, theta, u_log, v_log, den, dd }
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let n = self.n;
        let xt = x.powf(self.theta);
        if self.dd.is_some() {
            return self.eval_dd(Dd::new(xt), Dd::new(y)).to_f64();
        }
        let a = scaled_powers(&self.u_log, xt.ln(), xt == 0.0);
        // Truncated exponentials by upward summation (all terms positive for y ≥ 0).
        let mut e = Vec::with_capacity(n);
        let (mut term, mut acc) = (1.0f64, 0.0f64);
        for m in 0..n {
            if m > 0 {
                term *= y / m as f64;
            }
            acc += term;
            e.push(acc);
        }
        let v_with_e: Vec<SignedLogValue> = (0..n).map(|i| self.v_log[i].mul(SignedLogValue::new(1, e[n - 1 - i].ln()))).collect();
        let b = scaled_powers(&v_with_e, y.ln(), y == 0.0);
        let mut total = NeumaierSum::default();
        for k in 0..n {
            if a.values[k] == 0.0 {
                continue;
            }
            let mut w = NeumaierSum::default();
            for i in 0..n {
                w.add(b.values[i] / self.den[k * n + i]);
            }
            total.add(a.values[k] * w.value());
        }
        self.theta * total.value() * (a.shift + b.shift).exp()
    }
}

#[derive(Debug, Clone)]
enum Tables {
    Jacobi(JacobiTables),
    Laguerre(LaguerreTables),
    Hermite { even: LaguerreTables, odd: Option<LaguerreTables> },
}

/// Finite-N kernel with its coefficient tables built once; cheap to share
/// between threads behind an `Arc`.
#[derive(Debug, Clone)]
pub struct FiniteKernel {
    spec: EnsembleSpec,
    tables: Tables,
}

impl FiniteKernel {
    pub fn new(spec: EnsembleSpec) -> Result<Self> {
        let spec = EnsembleSpec::new(spec.family, spec.alpha, spec.theta, spec.n_points)?;
        let (a, t, n) = (spec.alpha, spec.theta, spec.n_points);
        let tables = match spec.family {
            Family::Jacobi => Tables::Jacobi(JacobiTables::new(a, t, n)),
            Family::Laguerre => Tables::Laguerre(LaguerreTables::new(a, t, n)),
            Family::Hermite => {
                let (e, o) = (n.div_ceil(2), n / 2);
                Tables::Hermite {
                    even: LaguerreTables::new((a - 1.0) / 2.0, t, e),
                    odd: (o > 0).then(|| LaguerreTables::new((a + t) / 2.0, t, o)),
                }
            }
        };
        Ok(Self { spec, tables })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// K_N(x, y). Jacobi accepts [0,1], Laguerre [0,∞), Hermite ℝ.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        if !x.is_finite() || !y.is_finite() {
            return domain("kernel arguments must be finite");
        }
        let v = match &self.tables {
            Tables::Jacobi(t) => {
                if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                    return domain(format!("Jacobi kernel needs x, y in [0, 1] (got {x}, {y})"));
                }
                t.eval(x, y)
            }
            Tables::Laguerre(t) => {
                if x < 0.0 || y < 0.0 {
                    return domain(format!("Laguerre kernel needs x, y >= 0 (got {x}, {y})"));
                }
                t.eval(x, y)
            }
            Tables::Hermite { even, odd } => {
                let (u, w) = (x * x, y * y);
                let mut v = even.eval(u, w);
                if let Some(odd) = odd {
                    let cross = signed_pow(x, self.spec.theta) * y;
                    if cross != 0.0 {
                        v += cross * odd.eval(u, w);
                    }
                }
                v
            }
        };
        if !v.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(v)
    }

    /// Whether [`FiniteKernel::eval_dd`] is available (N ≤ [`DD_MAX_N`]).
    pub fn has_dd(&self) -> bool {
        match &self.tables {
            Tables::Jacobi(t) => t.dd.is_some(),
            Tables::Laguerre(t) => t.dd.is_some(),
            Tables::Hermite { even, .. } => even.dd.is_some(),
        }
    }

    /// K_N(x, y) in double-double arithmetic, for verification integrals.
    pub fn eval_dd(&self, x: &DdPoint, y: &DdPoint) -> Result<Dd> {
        if !self.has_dd() {
            return domain(format!("double-double evaluation needs N <= {DD_MAX_N}"));
        }
        Ok(match &self.tables {
            Tables::Jacobi(t) => t.eval_dd(x.v, y.pow_theta),
            Tables::Laguerre(t) => t.eval_dd(x.pow_theta, y.v),
            Tables::Hermite { even, odd } => {
                let (ut, w) = (x.pow_theta * x.pow_theta, y.v * y.v);
                let mut v = even.eval_dd(ut, w);
                if let Some(odd) = odd {
                    v += x.pow_theta * y.v * odd.eval_dd(ut, w);
                }
                v
            }
        })
    }

    pub fn matrix(&self, points: &[f64]) -> Result<KernelMatrix> {
        let k = points.len();
        let mut values = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                values[(i, j)] = self.eval(points[i], points[j])?;
            }
        }
        Ok(KernelMatrix { values, points: points.to_vec() })
    }

    /// ∏ω(x_i) · det[K_N(x_i, x_j)].
    pub fn correlation(&self, points: &[f64]) -> Result<f64> {
        if points.len() > self.spec.n_points {
            return domain(format!("at most N = {} points allowed", self.spec.n_points));
        }
        let mut w = 1.0;
        for &x in points {
            w *= weight(&self.spec, x)?;
        }
        Ok(w * self.matrix(points)?.values.determinant())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub values: DMatrix<f64>,
    pub points: Vec<f64>,
}

pub fn kernel_jacobi(alpha: f64, theta: f64, n: usize, x: f64, y: f64) -> Result<f64> {
    FiniteKernel::new(EnsembleSpec::new(Family::Jacobi, alpha, theta, n)?)?.eval(x, y)
}

pub fn kernel_laguerre(alpha: f64, theta: f64, n: usize, x: f64, y: f64) -> Result<f64> {
    FiniteKernel::new(EnsembleSpec::new(Family::Laguerre, alpha, theta, n)?)?.eval(x, y)
}

pub fn kernel_hermite(alpha: f64, theta: f64, n: usize, x: f64, y: f64) -> Result<f64> {
    FiniteKernel::new(EnsembleSpec::new(Family::Hermite, alpha, theta, n)?)?.eval(x, y)
}

pub fn correlation(spec: &EnsembleSpec, points: &[f64]) -> Result<f64> {
    FiniteKernel::new(*spec)?.correlation(points)
}

/// Memo of kernels keyed by (family, α, θ, N); safe for concurrent readers.
#[derive(Debug, Default)]
pub struct KernelCache {
    map: Mutex<HashMap<(Family, u64, u64, usize), Arc<FiniteKernel>>>,
}

impl KernelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, spec: &EnsembleSpec) -> Result<Arc<FiniteKernel>> {
        let key = (spec.family, spec.alpha.to_bits(), spec.theta.to_bits(), spec.n_points);
        if let Some(k) = self.map.lock().expect("kernel cache poisoned").get(&key) {
            return Ok(Arc::clone(k));
        }
        // Build outside the lock; a concurrent duplicate build is harmless.
        let k = Arc::new(FiniteKernel::new(*spec)?);
        Ok(Arc::clone(self.map.lock().expect("kernel cache poisoned").entry(key).or_insert(k)))
    }
}

/// ∫_I f(x) ω(x) dx over the family's interval. Powers x^θ are smoothed by
/// substituting x = u^q on the unit interval when θ = p/q.
pub fn integrate_against_weight<F: FnMut(f64) -> f64>(spec: &EnsembleSpec, mut f: F, cfg: &SeriesConfig) -> Result<f64> {
    let q = rational_denominator(spec.theta).unwrap_or(1);
    let a = spec.alpha;
    match spec.family {
        Family::Jacobi => integrate_weighted_power(f, a, q, cfg),
        Family::Laguerre => integrate_half_line(|x| f(x) * (-x).exp(), a, q, cfg),
        Family::Hermite => {
            let pos = integrate_half_line(|x| f(x) * (-x * x).exp(), a, q, cfg)?;
            let neg = integrate_half_line(|x| f(-x) * (-x * x).exp(), a, q, cfg)?;
            Ok(pos + neg)
        }
    }
}

/// A real point in double-double together with its signed power x^θ.
#[derive(Debug, Clone, Copy)]
pub struct DdPoint {
    pub v: Dd,
    pub pow_theta: Dd,
}

impl DdPoint {
    pub fn new(x: f64, theta: f64) -> Self {
        let v = Dd::new(x);
        let p = if x == 0.0 { Dd::ZERO } else { v.abs().powf(theta) };
        Self { v, pow_theta: if x < 0.0 { -p } else { p } }
    }

    /// From a quadrature abscissa; when t = u^q and θq = p is an integer, t^θ = u^p exactly.
    pub fn from_abscissa(a: Abscissa, theta: f64, q: u32) -> Self {
        let pow_theta = match a.root {
            Some(u) if (theta * f64::from(q)).fract() == 0.0 => u.powi((theta * f64::from(q)) as u32),
            _ if a.t.hi == 0.0 => Dd::ZERO,
            _ => a.t.powf(theta),
        };
        Self { v: a.t, pow_theta }
    }

    pub fn neg(self) -> Self {
        Self { v: -self.v, pow_theta: -self.pow_theta }
    }
}

/// ∫_I f(x) ω(x) dx in double-double arithmetic.
pub fn integrate_against_weight_dd<F: FnMut(&DdPoint) -> Dd>(spec: &EnsembleSpec, ig: &DdIntegrator, mut f: F) -> Result<Dd> {
    let q = rational_denominator(spec.theta).unwrap_or(1);
    let (a, t) = (spec.alpha, spec.theta);
    match spec.family {
        Family::Jacobi => ig.weighted_power(|s| f(&DdPoint::from_abscissa(s, t, q)), a, q),
        Family::Laguerre => ig.half_line(|s| f(&DdPoint::from_abscissa(s, t, q)) * (-s.t).exp(), a, q),
        Family::Hermite => {
            let pos = ig.half_line(|s| f(&DdPoint::from_abscissa(s, t, q)) * (-(s.t * s.t)).exp(), a, q)?;
            let neg = ig.half_line(|s| f(&DdPoint::from_abscissa(s, t, q).neg()) * (-(s.t * s.t)).exp(), a, q)?;
            Ok(pos + neg)
        }
    }
}

/// ξ_j evaluated at a double-double point (see [`reproduced_function`]).
pub fn reproduced_function_dd(spec: &EnsembleSpec, j: usize, p: &DdPoint) -> Dd {
    match spec.family {
        Family::Jacobi => p.v.powi(j as u32 - 1),
        Family::Laguerre | Family::Hermite => p.pow_theta.powi(j as u32 - 1),
    }
}

/// The functions ξ_j (j ≥ 1) that the kernel reproduces: x^{j−1} for Jacobi,
/// (x^θ)^{j−1} for Laguerre and Hermite, with the signed power x^θ.
pub fn reproduced_function(spec: &EnsembleSpec, j: usize, x: f64) -> f64 {
    match spec.family {
        Family::Jacobi => x.powi(j as i32 - 1),
        Family::Laguerre | Family::Hermite => signed_pow(x, spec.theta).powi(j as i32 - 1),
    }
}
