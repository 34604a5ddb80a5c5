//! Double-double arithmetic (about 32 significant digits).
//!
//! Only what the kernel eigenvalue refinement needs: `+ - *`, division by an
//! f64-sized value, `sqrt` and `exp`.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DD {
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

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };
    /// ln 2 to double-double precision.
    pub const LN2: DD = DD {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };

    pub fn new(x: f64) -> DD {
        DD { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> DD {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> DD {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        DD { hi, lo }
    }

    pub fn sqr(self) -> DD {
        self * self
    }

    pub fn recip(self) -> DD {
        DD::ONE / self
    }

    pub fn sqrt(self) -> DD {
        if self.hi <= 0.0 {
            return DD::ZERO;
        }
        let x = self.hi.sqrt();
        // One Newton step: x + (a - x^2) / (2x).
        let r = self - DD::new(x) * DD::new(x);
        let (hi, lo) = quick_two_sum(x, r.hi / (2.0 * x));
        DD { hi, lo }
    }

    /// e^x. Underflows to zero below about -745.
    pub fn exp(self) -> DD {
        if self.hi < -745.0 {
            return DD::ZERO;
        }
        if self.hi == 0.0 {
            return DD::ONE;
        }
        let m = (self.hi / std::f64::consts::LN_2).round();
        let r = self - DD::LN2.mul_f64(m);
        // Scale down by 2^10 so the Taylor series converges fast, then undo it
        // with (1 + s)^2 - 1 = s (s + 2), which keeps the small part exact.
        const SQUARINGS: i32 = 10;
        let r = r.mul_f64(1.0 / f64::from(1 << SQUARINGS));
        let mut term = r;
        let mut s = r;
        for k in 2..=16 {
            term = term * r / DD::new(f64::from(k));
            s += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..SQUARINGS {
            s = s * (s + DD::new(2.0));
        }
        let sum = s + DD::ONE;
        // Two steps keep the scale factors normal when 2^m alone is not.
        let m = m as i32;
        let (a, b) = (2f64.powi(m / 2), 2f64.powi(m - m / 2));
        DD {
            hi: sum.hi * a * b,
            lo: sum.lo * a * b,
        }
    }
}

impl From<f64> for DD {
    fn from(x: f64) -> DD {
        DD::new(x)
    }
}

impl Add for DD {
    type Output = DD;
    #[inline]
    fn add(self, b: DD) -> DD {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DD { hi, lo }
    }
}

impl AddAssign for DD {
    #[inline]
    fn add_assign(&mut self, b: DD) {
        *self = *self + b;
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DD {
    type Output = DD;
    #[inline]
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    #[inline]
    fn mul(self, b: DD) -> DD {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::new(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_times_three_is_one() {
        let third = DD::ONE / DD::new(3.0);
        let back = third.mul_f64(3.0) - DD::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn sqrt_two_squared() {
        let r = DD::new(2.0).sqrt();
        assert!((r.sqr() - DD::new(2.0)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn exp_matches_f64_and_inverse() {
        for &x in &[-700.0, -30.5, -1.0, 0.25, 3.0, 40.0] {
            let e = DD::new(x).exp();
            assert!((e.to_f64() / f64::exp(x) - 1.0).abs() < 1e-15, "x={x}");
            if x.abs() > 100.0 {
                continue;
            }
            let prod = e * DD::new(-x).exp();
            assert!((prod - DD::ONE).to_f64().abs() < 1e-29, "x={x}");
        }
        assert_eq!(DD::new(-800.0).exp(), DD::ZERO);
    }

    #[test]
    fn exp_one_digits() {
        // e = 2.718281828459045235360287471352662...
        let e = DD::ONE.exp();
        assert_eq!(e.hi, std::f64::consts::E);
        assert!((e.lo - 1.445_646_891_729_250_2e-16).abs() < 1e-31);
    }
}
