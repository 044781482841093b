//! Double-double arithmetic (about 32 significant digits).
//!
//! Used where alternating sums of exactly-known coefficients cancel by many
//! orders of magnitude, e.g. finite-N kernels at unscaled arguments.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn powi(self, mut n: u32) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// x·2^k without rounding (barring overflow/underflow).
    pub fn ldexp(self, k: i32) -> Self {
        let (k1, k2) = (k / 2, k - k / 2);
        let (f1, f2) = (2f64.powi(k1), 2f64.powi(k2));
        Self { hi: self.hi * f1 * f2, lo: self.lo * f1 * f2 }
    }

    pub fn exp(self) -> Self {
        if self.hi < -745.2 {
            return Self::ZERO;
        }
        if self.hi > 709.7 {
            return Self::new(f64::INFINITY);
        }
        let k = (self.hi / LN_2.hi).round();
        let r = (self - LN_2 * k).ldexp(-5);
        // Taylor series on |r| ≤ 0.011, then undo the 2^-5 scaling by squaring.
        let mut term = Self::ONE;
        let mut sum = Self::ONE;
        for m in 1..=20 {
            term = term * r / Self::new(f64::from(m));
            sum += term;
            if term.hi.abs() < 1e-34 * sum.hi.abs() {
                break;
            }
        }
        for _ in 0..5 {
            sum = sum * sum;
        }
        sum.ldexp(k as i32)
    }

    /// Natural log for positive arguments (one Newton step on exp).
    pub fn ln(self) -> Self {
        if !(self.hi > 0.0) {
            return Self::new(f64::NAN);
        }
        let y = Self::new(self.hi.ln());
        y + self * (-y).exp() - Self::ONE
    }

    /// self^e for self > 0.
    pub fn powf(self, e: f64) -> Self {
        if e == 0.0 {
            return Self::ONE;
        }
        (self.ln() * e).exp()
    }

    /// Exact-as-possible quotient of two integers or small reals.
    pub fn ratio(a: f64, b: f64) -> Self {
        Self::new(a) / Self::new(b)
    }
}

pub const LN_2: DoubleDouble = DoubleDouble { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Self { hi, lo }
    }
}

impl Add<f64> for DoubleDouble {
    type Output = Self;
    fn add(self, o: f64) -> Self {
        let (s1, s2) = two_sum(self.hi, o);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, o);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * o);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + q3
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign for DoubleDouble {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl std::iter::Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn captures_sub_ulp_parts() {
        let a = DoubleDouble::new(1.0) + 1e-20;
        assert_eq!(a.hi, 1.0);
        assert_eq!(a.lo, 1e-20);
        assert_eq!((a - DoubleDouble::ONE).to_f64(), 1e-20);
    }

    #[test]
    fn one_third_times_three() {
        let third = DoubleDouble::ratio(1.0, 3.0);
        let r = third * 3.0 - DoubleDouble::ONE;
        assert!(r.to_f64().abs() < 1e-31);
        let r = third * DoubleDouble::new(3.0) - DoubleDouble::ONE;
        assert!(r.to_f64().abs() < 1e-31);
    }

    #[test]
    fn cancellation_in_alternating_sum() {
        // Σ (−1)^k C(40,k) = 0 exactly; f64 loses everything, dd keeps it.
        let mut c = DoubleDouble::ONE;
        let mut s = DoubleDouble::ZERO;
        for k in 0..=40u32 {
            s += if k % 2 == 0 { c } else { -c };
            c = c * f64::from(40 - k) / DoubleDouble::new(f64::from(k + 1));
        }
        assert!(s.to_f64().abs() < 1e-18);
    }

    #[test]
    fn exp_and_ln() {
        let e = DoubleDouble::ONE.exp();
        // e = 2.718281828459045 + 1.4456468917292502e-16
        assert_eq!(e.hi, std::f64::consts::E);
        assert!((e.lo - 1.445_646_891_729_250_2e-16).abs() < 1e-29, "{:e}", e.lo);
        for &x in &[-30.5, -1.0, 1e-8, 0.75, 12.25] {
            let v = DoubleDouble::new(x);
            let back = v.exp().ln();
            assert!((back - v).to_f64().abs() < 1e-29 * x.abs().max(1.0), "{x}");
        }
        let p = DoubleDouble::new(2.0).powf(0.5);
        assert!((p * p - DoubleDouble::new(2.0)).to_f64().abs() < 1e-30);
        assert_eq!(DoubleDouble::new(-800.0).exp(), DoubleDouble::ZERO);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = DoubleDouble::ratio(7.0, 3.0);
        let mut p = DoubleDouble::ONE;
        for _ in 0..13 {
            p *= x;
        }
        let q = x.powi(13);
        assert!(((p - q) / p).to_f64().abs() < 1e-30);
    }
}
