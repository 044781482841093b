//! Gauss quadrature carried out in double-double arithmetic.
//!
//! Verification integrals such as ∫ K_N(x,y) y^m ω(y) dy can cancel by twelve
//! orders of magnitude; the f64 rule's rounding floor (~1e-16·∫|f|) is then
//! far above the quantity being checked. Nodes are seeded from the f64
//! Golub–Welsch rule and polished by Newton iteration on the three-term
//! recurrence; weights are Christoffel numbers, all in double-double.

use super::dd::DoubleDouble as Dd;
use super::quadrature::GaussRule;
use crate::error::{domain, Error, Result};
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

#[derive(Debug, Clone)]
pub struct DdRule {
    pub nodes: Vec<Dd>,
    pub weights: Vec<Dd>,
}

impl DdRule {
    /// Rule for ∫₀¹ f(t) t^β dt with n nodes.
    pub fn jacobi_unit(beta: f64, n: usize) -> Result<Self> {
        let seed = GaussRule::jacobi_unit(beta, n)?;
        let b = Dd::new(beta);
        // Monic recurrence t q_k = q_{k+1} + A_k q_k + B_k q_{k−1} on [0,1], run on
        // 4^k q_k so that values and norms stay O(1) at high order.
        let mut a_k = Vec::with_capacity(n);
        let mut b_k = Vec::with_capacity(n);
        for k in 0..n {
            let s = b + (2 * k) as f64;
            let diag = if k == 0 { b / (b + 2.0) } else { b * b / (s * (s + 2.0)) };
            a_k.push((diag + 1.0) * 0.5);
            let beta_k = if k == 0 {
                Dd::ZERO
            } else if k == 1 {
                (b + 1.0) * 4.0 / ((b + 2.0) * (b + 2.0) * (b + 3.0))
            } else {
                let kf = k as f64;
                Dd::new(4.0 * kf * kf) * (b + kf) * (b + kf) / (s * s * (s + 1.0) * (s + (-1.0)))
            };
            b_k.push(beta_k * 0.25);
        }
        let eval = |t: Dd| -> (Dd, Dd, Vec<Dd>) {
            let mut vals = Vec::with_capacity(n + 1);
            let (mut p0, mut p1) = (Dd::ZERO, Dd::ONE);
            let (mut d0, mut d1) = (Dd::ZERO, Dd::ZERO);
            vals.push(p1);
            for k in 0..n {
                let p2 = (t - a_k[k]) * p1 * 4.0 - b_k[k] * p0 * 16.0;
                let d2 = (p1 + (t - a_k[k]) * d1) * 4.0 - b_k[k] * d0 * 16.0;
                p0 = p1;
                p1 = p2;
                d0 = d1;
                d1 = d2;
                vals.push(p1);
            }
            (p1, d1, vals)
        };
        let mut norms = Vec::with_capacity(n);
        let mut h = (b + 1.0).recip();
        for k in 0..n {
            if k > 0 {
                h = h * b_k[k] * 16.0;
            }
            norms.push(h);
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &t0 in &seed.nodes {
            let mut t = Dd::new(t0);
            for _ in 0..8 {
                let (p, d, _) = eval(t);
                let step = p / d;
                t -= step;
                if step.hi.abs() <= 1e-33 * t.hi.abs().max(1e-300) {
                    break;
                }
            }
            let (_, _, vals) = eval(t);
            let mut s = Dd::ZERO;
            for k in 0..n {
                s += vals[k] * vals[k] / norms[k];
            }
            if !t.is_finite() || !s.is_finite() {
                return Err(Error::NonFinite { index: nodes.len() });
            }
            nodes.push(t);
            weights.push(s.recip());
        }
        Ok(Self { nodes, weights })
    }
}

/// Integration point handed to integrands. `root` is set when the variable was
/// substituted as t = root^q, letting callers form fractional powers exactly.
#[derive(Debug, Clone, Copy)]
pub struct Abscissa {
    pub t: Dd,
    pub root: Option<Dd>,
}

/// Double-double integrator with a per-instance rule cache (not shared across threads).
#[derive(Debug, Default)]
pub struct DdIntegrator {
    rules: RefCell<HashMap<(u64, usize), Rc<DdRule>>>,
    /// Relative target, measured against Σ|w·f|.
    pub rel_tol: f64,
}

const MIN_ORDER: usize = 16;
const MAX_ORDER: usize = 256;
const NOISE_PLATEAU: f64 = 1e-18;

impl DdIntegrator {
    pub fn new() -> Self {
        Self { rules: RefCell::default(), rel_tol: 1e-25 }
    }

    fn rule(&self, beta: f64, n: usize) -> Result<Rc<DdRule>> {
        let key = (beta.to_bits(), n);
        if let Some(r) = self.rules.borrow().get(&key) {
            return Ok(Rc::clone(r));
        }
        let r = Rc::new(DdRule::jacobi_unit(beta, n)?);
        self.rules.borrow_mut().insert(key, Rc::clone(&r));
        Ok(r)
    }

    fn adaptive(&self, beta: f64, map: &mut dyn FnMut(Dd) -> Dd) -> Result<(Dd, f64)> {
        let apply = |rule: &DdRule, map: &mut dyn FnMut(Dd) -> Dd| {
            let mut s = Dd::ZERO;
            let mut abs = 0.0;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let v = *w * map(*x);
                s += v;
                abs += v.hi.abs();
            }
            (s, abs)
        };
        let mut n = MIN_ORDER;
        let (mut prev, _) = apply(&*self.rule(beta, n)?, map);
        let mut est = f64::INFINITY;
        let mut last_abs = 0.0;
        while n < MAX_ORDER {
            n *= 2;
            let (cur, abs) = apply(&*self.rule(beta, n)?, map);
            if !cur.is_finite() {
                return Err(Error::NonFinite { index: n });
            }
            est = (cur - prev).to_f64().abs();
            if est <= self.rel_tol * abs || (abs == 0.0 && cur.hi == 0.0) {
                return Ok((cur, abs));
            }
            prev = cur;
            last_abs = abs;
        }
        // A residual difference this small is rounding noise in the integrand itself.
        if est <= NOISE_PLATEAU * last_abs {
            return Ok((prev, last_abs));
        }
        Err(Error::Accuracy { estimate: est, context: format!("double-double quadrature did not settle by order {MAX_ORDER}") })
    }

    /// ∫₀¹ F(t) t^α dt with t = u^q.
    pub fn weighted_power<F: FnMut(Abscissa) -> Dd>(&self, mut f: F, alpha: f64, q: u32) -> Result<Dd> {
        self.weighted_power_abs(&mut f, alpha, q).map(|r| r.0)
    }

    fn weighted_power_abs(&self, f: &mut dyn FnMut(Abscissa) -> Dd, alpha: f64, q: u32) -> Result<(Dd, f64)> {
        if q == 0 || !(alpha > -1.0) {
            return domain("need q >= 1 and alpha > -1");
        }
        let qf = f64::from(q);
        let beta = qf * (alpha + 1.0) - 1.0;
        let (v, a) = self.adaptive(beta, &mut |u| f(Abscissa { t: u.powi(q), root: Some(u) }))?;
        Ok((v * qf, a * qf))
    }

    /// ∫₀^∞ F(t) t^α dt; the unit interval uses the substituted weighted rule and
    /// the tail is covered by Gauss–Legendre panels (with t^α applied pointwise).
    pub fn half_line<F: FnMut(Abscissa) -> Dd>(&self, mut f: F, alpha: f64, q: u32) -> Result<Dd> {
        let (mut total, mut abs_total) = self.weighted_power_abs(&mut f, alpha, q)?;
        let (mut a, mut width) = (1.0f64, 1.0f64);
        let mut quiet = 0;
        while quiet < 2 {
            if a > 1e4 {
                return Err(Error::Accuracy { estimate: abs_total, context: "integrand does not decay on the half line".into() });
            }
            let (lo, h) = (Dd::new(a), Dd::new(width));
            let (v, abs) = self.adaptive(0.0, &mut |s| {
                let t = lo + h * s;
                f(Abscissa { t, root: None }) * t.powf(alpha) * h
            })?;
            total += v;
            abs_total += abs;
            quiet = if abs <= 1e-34 * abs_total { quiet + 1 } else { 0 };
            a += width;
            width = (width * 2.0).min(8.0);
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn high_order_rule_keeps_mass() {
        let r = DdRule::jacobi_unit(1.0, 256).unwrap();
        let s: Dd = r.weights.iter().copied().sum();
        assert!((s + (-0.5)).to_f64().abs() < 1e-30);
    }

    #[test]
    fn rule_is_exact_for_moments() {
        for &beta in &[-0.5, 0.0, 1.7] {
            let r = DdRule::jacobi_unit(beta, 12).unwrap();
            for m in 0..24u32 {
                let s: Dd = r.nodes.iter().zip(&r.weights).map(|(x, w)| *w * x.powi(m)).sum();
                let want = Dd::new(1.0) / (Dd::new(beta) + (m as f64 + 1.0));
                assert!(((s - want) / want).to_f64().abs() < 1e-29, "β={beta} m={m}");
            }
        }
    }

    #[test]
    fn cancelling_half_line_integral() {
        // ∫₀^∞ (y^14 − 14!)·e^{−y} dy = 0 exactly; ∫|·| is about 1e11.
        let ig = DdIntegrator::new();
        let fact14 = (1..=14).fold(Dd::ONE, |a, k| a * f64::from(k));
        let v = ig.half_line(|p| (p.t.powi(14) - fact14) * (-p.t).exp(), 0.0, 1).unwrap();
        assert!(v.to_f64().abs() < 1e-12, "{:e}", v.to_f64());
    }

    #[test]
    fn substitution_power() {
        // ∫₀¹ t^{1/2} t^{0.5} dt = 1/2 with t = u².
        let ig = DdIntegrator::new();
        let v = ig.weighted_power(|p| p.root.unwrap(), 0.5, 2).unwrap();
        assert!((v - Dd::new(0.5)).to_f64().abs() < 1e-30);
    }
}
