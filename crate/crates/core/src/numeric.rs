//! Exact-to-float conversions with directed rounding.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Natural log of a positive big integer, accurate to a few ulps.
pub fn big_ln(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "log of zero");
    let bits = x.bits();
    if bits <= 52 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Largest f64 not above `x`.
pub fn rational_to_f64_down(x: &BigRational) -> f64 {
    let f = approx_f64(x);
    let back = BigRational::from_float(f).expect("finite");
    if &back > x {
        f.next_down()
    } else {
        f
    }
}

/// Smallest f64 not below `x`.
pub fn rational_to_f64_up(x: &BigRational) -> f64 {
    let f = approx_f64(x);
    let back = BigRational::from_float(f).expect("finite");
    if &back < x {
        f.next_up()
    } else {
        f
    }
}

fn approx_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    // Scale numerator so integer division keeps ~64 significant bits.
    let num = x.numer();
    let den = x.denom();
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let (scaled, exp) = if shift >= 0 {
        ((num << shift as usize) / den, -shift)
    } else {
        (num / (den << (-shift) as usize), -shift)
    };
    scaled.to_f64().unwrap() * 2f64.powi(exp as i32)
}

/// Decimal rendering of `x` with `places` fractional digits, rounded toward
/// −∞ (`round_up = false`) or +∞ (`round_up = true`).
pub fn rational_to_decimal(x: &BigRational, places: usize, round_up: bool) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = x * BigRational::from_integer(scale.clone());
    let q = if round_up {
        scaled.ceil().to_integer()
    } else {
        scaled.floor().to_integer()
    };
    let neg = q.is_negative();
    let (int_part, frac_part) = q.abs().div_rem(&scale);
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    s.push_str(&int_part.to_string());
    if places > 0 {
        let frac = frac_part.to_string();
        s.push('.');
        for _ in frac.len()..places {
            s.push('0');
        }
        s.push_str(&frac);
    }
    s
}

/// Exact rational value of an f64 (finite, positive tolerances).
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// `ceil(log2(1/x))` for 0 < x, clamped to at least 0.
pub fn bits_for(x: &BigRational) -> u64 {
    if x >= &BigRational::one() {
        return 0;
    }
    let c: BigInt = x.recip().ceil().to_integer() - 1;
    c.bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn directed_rounding_brackets_value() {
        for (n, d) in [(1, 3), (2, 3), (10, 7), (123456789, 1000), (1, 1 << 40)] {
            let x = r(n, d);
            let lo = rational_to_f64_down(&x);
            let hi = rational_to_f64_up(&x);
            assert!(BigRational::from_float(lo).unwrap() <= x);
            assert!(BigRational::from_float(hi).unwrap() >= x);
            assert!(hi - lo <= 2.0 * f64::EPSILON * hi.abs());
        }
        assert_eq!(rational_to_f64_down(&r(2, 1)), 2.0);
        assert_eq!(rational_to_f64_up(&r(2, 1)), 2.0);
    }

    #[test]
    fn decimal_strings() {
        assert_eq!(rational_to_decimal(&r(1, 3), 4, false), "0.3333");
        assert_eq!(rational_to_decimal(&r(1, 3), 4, true), "0.3334");
        assert_eq!(rational_to_decimal(&r(2, 1), 3, false), "2.000");
        assert_eq!(rational_to_decimal(&r(-1, 8), 2, false), "-0.13");
        assert_eq!(rational_to_decimal(&r(5, 1), 0, true), "5");
    }

    #[test]
    fn ln_of_big_values() {
        let x = BigUint::from(1u32) << 200usize;
        assert!((big_ln(&x) - 200.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!((big_ln(&BigUint::from(1000u32)) - 1000f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bits_for_tolerance() {
        assert_eq!(bits_for(&r(1, 1024)), 10);
        assert_eq!(bits_for(&r(1, 1000)), 10);
        assert_eq!(bits_for(&r(1, 1025)), 11);
        assert!(bits_for(&rational_from_f64(1e-12)) >= 40);
    }
}
