//! Exact integer and rational arithmetic helpers: big-integer binomial
//! coefficients and shorthand constructors for exact rationals.
//!
//! All counting in this crate is exact; nothing here ever rounds.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

/// Exact rational number used for every weight and charge in the crate.
pub type Rational = BigRational;

/// Exact integer used for set counts and binomial coefficients.
pub type Int = BigInt;

/// Binomial coefficient C(n, k) as an exact big integer.
///
/// Out-of-range indices are total: `k < 0` or `k > n` yields 0, so sums
/// over size classes can be written without boundary cases.
pub fn binomial(n: i64, k: i64) -> Int {
    if k < 0 || k > n || n < 0 {
        return Int::zero();
    }
    // Multiplicative recurrence: each partial product is itself a binomial
    // coefficient, so every division below is exact.
    let k = k.min(n - k);
    let mut acc = Int::one();
    for i in 1..=k {
        acc = acc * Int::from(n - k + i) / Int::from(i);
    }
    acc
}

/// Sum of binomial coefficients C(n, t) for lo <= t <= hi (empty range = 0).
pub fn binomial_sum(n: i64, lo: i64, hi: i64) -> Int {
    let mut acc = Int::zero();
    let mut t = lo;
    while t <= hi {
        acc += binomial(n, t);
        t += 1;
    }
    acc
}

/// Rational p/q from machine integers (q must be nonzero).
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(Int::from(p), Int::from(q))
}

/// Rational with value of an integer.
pub fn rat_int(v: Int) -> Rational {
    Rational::from_integer(v)
}

/// C(n, k) as a rational, convenient for weight formulas.
pub fn binomial_rat(n: i64, k: i64) -> Rational {
    rat_int(binomial(n, k))
}

/// Canonical text form of a rational: `p/q`, or bare `p` when integral.
/// Used by every JSON/CSV report so exact values survive serialization.
pub fn rational_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(binomial(7, 3), Int::from(35));
        assert_eq!(binomial(10, 4), Int::from(210));
        assert_eq!(binomial(0, 0), Int::from(1));
        assert_eq!(binomial(5, 0), Int::from(1));
        assert_eq!(binomial(5, 5), Int::from(1));
    }

    #[test]
    fn out_of_range_is_zero() {
        assert_eq!(binomial(4, -1), Int::zero());
        assert_eq!(binomial(4, 5), Int::zero());
        assert_eq!(binomial(-1, 0), Int::zero());
    }

    #[test]
    fn rows_sum_to_powers_of_two() {
        for n in 0..=16 {
            assert_eq!(binomial_sum(n, 0, n), Int::from(1u64 << n));
        }
    }

    #[test]
    fn pascal_identity() {
        for n in 1..=30i64 {
            for k in 0..=n {
                assert_eq!(
                    binomial(n, k),
                    binomial(n - 1, k - 1) + binomial(n - 1, k)
                );
            }
        }
    }

    #[test]
    fn large_value_exact() {
        // C(40, 20) computed independently.
        assert_eq!(binomial(40, 20), "137846528820".parse::<Int>().unwrap());
    }

    #[test]
    fn rational_text_forms() {
        assert_eq!(rational_string(&rat(3, 8)), "3/8");
        assert_eq!(rational_string(&rat(4, 2)), "2");
        assert_eq!(rational_string(&rat(-1, 2)), "-1/2");
        assert_eq!(rational_string(&rat(0, 5)), "0");
    }
}
