//! Double-double arithmetic: an unevaluated sum of two `f64`s giving
//! roughly 32 significant digits.
//!
//! The series for the Bessel-type functions in this crate alternate with
//! terms that can exceed the final sum by 15 or more orders of magnitude
//! near the top of the operating range (z up to 40). Plain `f64` term
//! recurrences lose all significance there; carrying the recurrence and
//! the accumulator in double-double keeps the result good to well below
//! 1e-12 relative across the whole range.

/// Unevaluated sum `hi + lo` with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
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
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, x: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, x);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, x);
        let p2 = p2 + self.lo * x;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e }.add_f64(q3)
    }

    #[inline]
    pub fn div_f64(self, x: f64) -> Dd {
        self.div(Dd::from(x))
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }
}

/// Product of two `f64`s as an exact double-double.
#[inline]
pub fn dd_prod(a: f64, b: f64) -> Dd {
    let (hi, lo) = two_prod(a, b);
    Dd { hi, lo }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_keeps_low_bits() {
        let a = Dd::from(1.0);
        let eps = Dd::from(1e-25);
        let s = a.add(eps).sub(a);
        assert_eq!(s.to_f64(), 1e-25);
    }

    #[test]
    fn mul_exact_product() {
        // (1 + 2^-30)^2 = 1 + 2^-29 + 2^-60 must survive in the low word
        let x = 1.0 + (0.5f64).powi(30);
        let p = dd_prod(x, x);
        let expect_lo = (0.5f64).powi(60);
        let back = p.sub(Dd::from(1.0 + (0.5f64).powi(29)));
        assert_eq!(back.to_f64(), expect_lo);
    }

    #[test]
    fn div_roundtrip() {
        let a = Dd::from(std::f64::consts::PI);
        let b = Dd::from(std::f64::consts::E);
        let q = a.div(b).mul(b).sub(a);
        assert!(q.to_f64().abs() < 1e-30);
    }
}
