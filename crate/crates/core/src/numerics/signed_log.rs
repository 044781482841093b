//! Sign plus natural-log magnitude, for products that overflow `f64`.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLogValue {
    /// −1, 0 or +1.
    pub sign: i8,
    /// ln |value|; meaningless when `sign == 0`.
    pub log_mag: f64,
}

impl SignedLogValue {
    pub const ZERO: Self = Self { sign: 0, log_mag: f64::NEG_INFINITY };
    pub const ONE: Self = Self { sign: 1, log_mag: 0.0 };

    pub fn new(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { sign: sign.signum(), log_mag }
        }
    }

    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn to_real(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_mag.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn mul(self, o: Self) -> Self {
        if self.sign == 0 || o.sign == 0 {
            return Self::ZERO;
        }
        Self::new(self.sign * o.sign, self.log_mag + o.log_mag)
    }

    /// Division; dividing by zero yields a NaN magnitude with the numerator's sign.
    pub fn div(self, o: Self) -> Self {
        if self.sign == 0 {
            return Self::ZERO;
        }
        if o.sign == 0 {
            return Self { sign: self.sign, log_mag: f64::NAN };
        }
        Self::new(self.sign * o.sign, self.log_mag - o.log_mag)
    }

    pub fn neg(self) -> Self {
        Self { sign: -self.sign, log_mag: self.log_mag }
    }

    pub fn recip(self) -> Self {
        Self::ONE.div(self)
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        let sign = if self.sign < 0 && n % 2 != 0 { -1 } else { 1 };
        Self::new(sign, self.log_mag * f64::from(n))
    }

    pub fn add(self, o: Self) -> Self {
        if self.sign == 0 {
            return o;
        }
        if o.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_mag >= o.log_mag { (self, o) } else { (o, self) };
        let r = (small.log_mag - big.log_mag).exp();
        if big.sign == small.sign {
            Self::new(big.sign, big.log_mag + r.ln_1p())
        } else if r == 1.0 {
            Self::ZERO
        } else {
            Self::new(big.sign, big.log_mag + (-r).ln_1p())
        }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    /// Compares absolute values.
    pub fn cmp_mag(self, o: Self) -> Ordering {
        match (self.sign == 0, o.sign == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.log_mag.total_cmp(&o.log_mag),
        }
    }
}

/// Sum of signed-log values: rescales by the largest magnitude and accumulates
/// with compensated summation. Returns the total and Σ|term| in the same form.
pub fn sum_signed_logs<I>(values: I) -> (SignedLogValue, SignedLogValue)
where
    I: IntoIterator<Item = SignedLogValue>,
{
    let vals: Vec<SignedLogValue> = values.into_iter().filter(|v| v.sign != 0).collect();
    let Some(max) = vals.iter().map(|v| v.log_mag).reduce(f64::max) else {
        return (SignedLogValue::ZERO, SignedLogValue::ZERO);
    };
    let mut total = super::series::NeumaierSum::default();
    let mut abs = 0.0;
    for v in &vals {
        let t = (v.log_mag - max).exp();
        total.add(f64::from(v.sign) * t);
        abs += t;
    }
    let t = SignedLogValue::from_real(total.value());
    (
        SignedLogValue::new(t.sign, t.log_mag + max),
        SignedLogValue::new(1, abs.ln() + max),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn round_trip_moderate_range() {
        for i in 0..=400 {
            let x = 10f64.powf(-20.0 + 0.1 * f64::from(i));
            for v in [x, -x] {
                let y = SignedLogValue::from_real(v).to_real();
                assert!(((y - v) / v).abs() < 1e-14, "{v}");
            }
        }
    }

    #[test]
    fn basic_arithmetic() {
        let a = SignedLogValue::from_real(-3.0);
        let b = SignedLogValue::from_real(4.0);
        assert!((a.mul(b).to_real() + 12.0).abs() < 1e-13);
        assert!((a.div(b).to_real() + 0.75).abs() < 1e-15);
        assert!((a.add(b).to_real() - 1.0).abs() < 1e-14);
        assert!(a.add(a.neg()).is_zero());
        assert!((a.powi(3).to_real() + 27.0).abs() < 1e-12);
        assert_eq!(SignedLogValue::ZERO.to_real(), 0.0);
        assert!(SignedLogValue::ZERO.mul(b).is_zero());
    }

    #[test]
    fn sum_of_large_magnitudes() {
        let big = SignedLogValue::new(1, 1000.0);
        let (s, abs) = sum_signed_logs([big, big.neg(), big, SignedLogValue::new(1, 999.0)]);
        assert_eq!(s.sign, 1);
        assert!((s.log_mag - (1000f64 + (-1f64).exp().ln_1p())).abs() < 1e-12);
        assert!(abs.log_mag > s.log_mag);
    }

    proptest! {
        #[test]
        fn round_trip(m in 1e-300f64..1e300, neg in any::<bool>()) {
            let x = if neg { -m } else { m };
            // exp() amplifies the rounding of ln|x| by |ln|x||.
            let y = SignedLogValue::from_real(x).to_real();
            prop_assert!(((y - x) / x).abs() < 2.0 * f64::EPSILON * (1.0 + x.abs().ln().abs()));
        }

        #[test]
        fn multiply_adds_logs(a in -1e3f64..1e3, b in -1e3f64..1e3, sa in -1i8..=1, sb in -1i8..=1) {
            let p = SignedLogValue::new(sa, a).mul(SignedLogValue::new(sb, b));
            prop_assert_eq!(p.sign, sa * sb);
            if sa != 0 && sb != 0 {
                prop_assert_eq!(p.log_mag, a + b);
            }
        }

        #[test]
        fn same_sign_add_never_shrinks(a in -1e3f64..1e3, b in -1e3f64..1e3, s in prop::sample::select(vec![-1i8, 1])) {
            let r = SignedLogValue::new(s, a).add(SignedLogValue::new(s, b));
            prop_assert!(r.log_mag >= a.max(b));
            prop_assert_eq!(r.sign, s);
        }
    }
}
