//! Double-double accumulation used by the prefix tables.
//!
//! A box sum read from a summed-area table is a difference of four large
//! cumulative sums; carrying the cumulative sums in double-double keeps the
//! cancellation error far below one ulp of the box sum itself.

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Exact product `a * b = p + e` (Dekker).
#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let (t, f) = two_sum(self.lo, other.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, x: f64) -> Dd {
        let (s, e) = two_sum(self.hi, x);
        let e = e + self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// `self / d` rounded from a two-term quotient, so that `(k·c)/k`
    /// returns `c` whenever the sum `k·c` is held exactly.
    #[inline]
    pub fn div_f64(self, d: f64) -> f64 {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = self.sub(Dd { hi: p, lo: e });
        let q2 = r.hi / d;
        q1 + q2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_is_recovered() {
        let big = Dd::ZERO.add_f64(1e16).add_f64(1.0).add_f64(1.0);
        let diff = big.sub(Dd::ZERO.add_f64(1e16));
        assert_eq!(diff.to_f64(), 2.0);
    }

    #[test]
    fn mean_of_repeated_constant_is_exact() {
        for &c in &[0.1, 1.0 / 3.0, 7.25, -2.2, 1e-7] {
            for k in 1..200usize {
                let mut s = Dd::ZERO;
                for _ in 0..k {
                    s = s.add_f64(c);
                }
                assert_eq!(s.div_f64(k as f64), c, "c={c} k={k}");
            }
        }
    }

    #[test]
    fn two_prod_is_exact_on_small_integers() {
        let (p, e) = two_prod(3.0, 0.1);
        assert_eq!(p, 3.0 * 0.1);
        // 3 * 0.1 is not representable; the error term captures the remainder
        assert!(e != 0.0);
    }
}
