//! Probabilists' Hermite polynomials, `H_0 = 1`, `H_1 = x`,
//! `H_{k+1} = x H_k - k H_{k-1}`.

const LN_2: f64 = core::f64::consts::LN_2;
// Rescale the recurrence state once it leaves [2^-RESCALE, 2^RESCALE].
const RESCALE: i32 = 512;

/// Value of `H_k(x)` in sign / log-magnitude form.
///
/// `value` is `sign * exp(log_magnitude)` and overflows to `±inf` once the
/// magnitude leaves the double range; the log fields stay valid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HermiteEval {
    pub degree: u32,
    pub value: f64,
    pub log_magnitude: f64,
    pub sign: i8,
}

impl HermiteEval {
    fn from_scaled(degree: u32, mantissa: f64, exp2: i64) -> Self {
        if mantissa == 0.0 {
            return Self { degree, value: 0.0, log_magnitude: f64::NEG_INFINITY, sign: 0 };
        }
        let sign = if mantissa > 0.0 { 1 } else { -1 };
        let log_magnitude = libm::log(mantissa.abs()) + exp2 as f64 * LN_2;
        let value = if exp2 == 0 { mantissa } else { f64::from(sign) * libm::exp(log_magnitude) };
        Self { degree, value, log_magnitude, sign }
    }
}

/// Evaluates `H_k(x)` by the three-term recurrence with a shared binary
/// exponent, so large degrees do not overflow.
pub fn hermite_eval(k: u32, x: f64) -> HermiteEval {
    if k == 0 {
        return HermiteEval::from_scaled(0, 1.0, 0);
    }
    let (mut prev, mut cur) = (1.0_f64, x);
    let mut exp2: i64 = 0;
    let hi = libm::ldexp(1.0, RESCALE);
    let lo = libm::ldexp(1.0, -RESCALE);
    for j in 1..k {
        let next = x * cur - f64::from(j) * prev;
        prev = cur;
        cur = next;
        let m = cur.abs().max(prev.abs());
        if m > hi {
            cur = libm::ldexp(cur, -RESCALE);
            prev = libm::ldexp(prev, -RESCALE);
            exp2 += i64::from(RESCALE);
        } else if m < lo && m > 0.0 {
            cur = libm::ldexp(cur, RESCALE);
            prev = libm::ldexp(prev, RESCALE);
            exp2 -= i64::from(RESCALE);
        }
    }
    HermiteEval::from_scaled(k, cur, exp2)
}

/// `H_k(0)`: zero for odd `k`, `(-1)^{k/2} (k-1)!!` for even `k`.
pub fn hermite_at_zero(k: u32) -> HermiteEval {
    if k % 2 == 1 {
        return HermiteEval { degree: k, value: 0.0, log_magnitude: f64::NEG_INFINITY, sign: 0 };
    }
    let sign: i8 = if (k / 2) % 2 == 0 { 1 } else { -1 };
    let mut log_magnitude = 0.0;
    let mut product = 1.0_f64;
    let mut j = 1;
    while j < k {
        log_magnitude += libm::log(f64::from(j));
        product *= f64::from(j);
        j += 2;
    }
    let value = if product.is_finite() { f64::from(sign) * product } else { f64::from(sign) * f64::INFINITY };
    HermiteEval { degree: k, value, log_magnitude, sign }
}
