//! Gamma-function family: ln Γ, 1/Γ, Pochhammer symbols and factorials.

use super::signed_log::SignedLogValue;
use crate::error::{domain, Result};
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// ζ(k) − 1 for k = 2, 3, ….
const ZETA_MINUS_ONE: [f64; 40] = [
    0.644_934_066_848_226_4,
    0.202_056_903_159_594_3,
    0.082_323_233_711_138_19,
    0.036_927_755_143_369_93,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_827,
    0.004_077_356_197_944_339,
    0.002_008_392_826_082_214,
    0.000_994_575_127_818_085_3,
    0.000_494_188_604_119_464_6,
    0.000_246_086_553_308_048_3,
    0.000_122_713_347_578_489_1,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_762e-6,
    3.817_293_264_999_84e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_961e-7,
    4.769_329_867_878_065e-7,
    2.384_505_027_277_33e-7,
    1.192_199_259_653_111e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504e-8,
    7.450_711_789_835_429e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
    4.656_629_065_033_784e-10,
    2.328_311_833_676_505e-10,
    1.164_155_017_270_052e-10,
    5.820_772_087_902_701e-11,
    2.910_385_044_497_1e-11,
    1.455_192_189_104_198e-11,
    7.275_959_835_057_481e-12,
    3.637_979_547_378_651e-12,
    1.818_989_650_307_066e-12,
    9.094_947_840_263_889e-13,
    4.547_473_783_042_154e-13,
];

/// ln Γ(2+z) for |z| ≤ 1/2 from its Taylor series about 2.
fn ln_gamma_2_plus(z: f64) -> f64 {
    let mut acc = 0.0;
    let mut zk = -z;
    for (i, c) in ZETA_MINUS_ONE.iter().enumerate() {
        zk *= -z;
        let term = c * zk / (i as f64 + 2.0);
        acc += term;
        if term.abs() < 1e-18 * acc.abs().max(1e-300) {
            break;
        }
    }
    z * (1.0 - EULER_GAMMA) + acc
}

fn ln_gamma_stirling(x: f64) -> f64 {
    // Bernoulli coefficients B_{2k}/(2k(2k-1)).
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let r = 1.0 / x;
    let r2 = r * r;
    let mut corr = 0.0;
    for c in C.iter().rev() {
        corr = corr * r2 + c;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + corr * r
}

/// ln Γ(x) for finite x > 0 without argument checks. Returns NaN outside the domain.
pub fn ln_gamma(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    if x < 0.5 {
        // ln Γ(x) = ln Γ(x+2) − ln(x+1) − ln x.
        return ln_gamma_2_plus(x) - x.ln_1p() - x.ln();
    }
    if x < 1.5 {
        return ln_gamma_2_plus(x - 1.0) - x.ln();
    }
    if x < 2.5 {
        return ln_gamma_2_plus(x - 2.0);
    }
    if x < 15.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y >= 2.5 {
            y -= 1.0;
            prod *= y;
        }
        return ln_gamma_2_plus(y - 2.0) + prod.ln();
    }
    ln_gamma_stirling(x)
}

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return domain(format!("log_gamma requires finite x > 0 (got {x})"));
    }
    Ok(ln_gamma(x))
}

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if x == x.floor() {
        return 0.0;
    }
    let r = x - 2.0 * (x / 2.0).floor(); // in [0, 2)
    let (s, r) = if r > 1.0 { (-1.0, r - 1.0) } else { (1.0, r) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    s * (PI * r).sin()
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// 1/Γ(x) as a signed-log value; zero at the poles of Γ.
pub fn log_recip_gamma(x: f64) -> SignedLogValue {
    if is_nonpositive_integer(x) {
        return SignedLogValue::ZERO;
    }
    if x > 0.0 {
        return SignedLogValue::new(1, -ln_gamma(x));
    }
    // Reflection: 1/Γ(x) = Γ(1−x) sin(πx)/π.
    let s = sin_pi(x);
    let sign = if s > 0.0 { 1 } else { -1 };
    SignedLogValue::new(sign, ln_gamma(1.0 - x) + s.abs().ln() - PI.ln())
}

/// 1/Γ(x) for any finite x; exactly 0 at non-positive integers.
pub fn recip_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x > 0.0 && x == x.floor() && x <= 171.0 {
        return (-ln_factorial(x as u64 - 1)).exp();
    }
    log_recip_gamma(x).to_real()
}

/// ln n! (exact table lookup up to 20!, then ln Γ(n+1)).
pub fn ln_factorial(n: u64) -> f64 {
    if n <= 20 {
        let mut f: u64 = 1;
        for i in 2..=n {
            f *= i;
        }
        return (f as f64).ln();
    }
    ln_gamma(n as f64 + 1.0)
}

/// Rising factorial (a)_m = a(a+1)…(a+m−1) in signed-log form.
pub fn log_pochhammer(a: f64, m: usize) -> SignedLogValue {
    let mut sign: i8 = 1;
    let mut sum = super::series::NeumaierSum::default();
    for j in 0..m {
        let f = a + j as f64;
        if f == 0.0 {
            return SignedLogValue::ZERO;
        }
        if f < 0.0 {
            sign = -sign;
        }
        sum.add(f.abs().ln());
    }
    SignedLogValue::new(sign, sum.value())
}
