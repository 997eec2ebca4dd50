//! Double-double arithmetic (about 32 significant digits).
//!
//! Only what the residue sums need: field operations, `exp`, `ln`, `sin(πx)`
//! and a signed log-gamma of real argument.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub(crate) const PI: Dd = Dd {
    hi: std::f64::consts::PI,
    lo: 1.224_646_799_147_353_2e-16,
};
pub(crate) const LN_PI: Dd = Dd {
    hi: 1.144_729_885_849_400_2,
    lo: 1.026_595_116_270_782_6e-17,
};
pub(crate) const LN_2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};
const HALF_LN_2PI: Dd = Dd {
    hi: 0.918_938_533_204_672_8,
    lo: -3.878_294_158_067_241_4e-17,
};

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

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub const fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn round(self) -> Dd {
        let r = self.hi.round();
        if r == self.hi {
            let (s, e) = quick_two_sum(r, self.lo.round());
            Dd { hi: s, lo: e }
        } else if (r - self.hi).abs() == 0.5 {
            // hi sits exactly on a half; lo decides the direction.
            let f = self.hi.floor();
            if self.lo > 0.0 || (self.lo == 0.0 && r != f) {
                Dd::new(f + 1.0)
            } else {
                Dd::new(f)
            }
        } else {
            Dd::new(r)
        }
    }

    pub fn powi(self, n: u32) -> Dd {
        let mut base = self;
        let mut acc = Dd::ONE;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN_2.hi).round();
        let r = self - LN_2 * k;
        // exp(r) = exp(r / 2^10)^(2^10)
        let t = r * (1.0 / 1024.0);
        let mut term = t;
        let mut sum = t;
        for n in 2..30 {
            term = term * t / (n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // expm1 squaring: (1+s)^2 - 1 = 2s + s^2
        for _ in 0..10 {
            sum = sum * 2.0 + sum * sum;
        }
        let e = sum + 1.0;
        Dd {
            hi: e.hi * 2f64.powi(k as i32),
            lo: e.lo * 2f64.powi(k as i32),
        }
    }

    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive double-double");
        let y = Dd::new(self.hi.ln());
        // One Newton step on exp(y) = x doubles the accuracy.
        y + self * (-y).exp() - 1.0
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let y = Dd::new(self.hi.sqrt());
        y + (self - y * y) / (y * 2.0)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    fn add(self, o: f64) -> Dd {
        let (s, e) = two_sum(self.hi, o);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    fn sub(self, o: f64) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, o: f64) -> Dd {
        let (p, e) = two_prod(self.hi, o);
        let (hi, lo) = quick_two_sum(p, e + self.lo * o);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, o: f64) -> Dd {
        self / Dd::new(o)
    }
}

/// `sin(πx)`; exact zeros at integers.
pub fn sin_pi(x: Dd) -> Dd {
    let n = x.round();
    let r = x - n;
    if r.hi == 0.0 {
        return Dd::ZERO;
    }
    let odd = (n.hi % 2.0 != 0.0) ^ (n.lo % 2.0 != 0.0);
    let y = PI * r;
    let y2 = y * y;
    let mut term = y;
    let mut sum = y;
    for k in 1..40 {
        term = -(term * y2) / ((2 * k * (2 * k + 1)) as f64);
        sum = sum + term;
        if term.hi.abs() < 1e-35 * sum.hi.abs() {
            break;
        }
    }
    if odd {
        -sum
    } else {
        sum
    }
}

// B_{2k} as (numerator, denominator), k = 1..15.
const BERNOULLI: [(f64, f64); 15] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
    (8553103.0, 6.0),
    (-23749461029.0, 870.0),
    (8615841276005.0, 14322.0),
];

fn stirling(x: Dd) -> Dd {
    // x >= 25
    let mut s = (x - 0.5) * x.ln() - x + HALF_LN_2PI;
    let inv = x.recip();
    let inv2 = inv * inv;
    let mut p = inv;
    for (k, (num, den)) in BERNOULLI.iter().enumerate() {
        let n2 = 2.0 * (k + 1) as f64;
        s = s + Dd::new(*num) / Dd::new(den * n2 * (n2 - 1.0)) * p;
        p = p * inv2;
    }
    s
}

/// `(ln|Γ(x)|, sign Γ(x))` in double-double, or `None` at a pole.
pub fn ln_gamma_signed(x: Dd) -> Option<(Dd, f64)> {
    if x.hi <= 0.0 && x.round() == x {
        return None;
    }
    if x.hi < 0.5 {
        let s = sin_pi(x);
        let (lg, _) = ln_gamma_signed(Dd::ONE - x)?;
        let sign = if s.hi < 0.0 { -1.0 } else { 1.0 };
        return Some((LN_PI - s.abs().ln() - lg, sign));
    }
    let mut shifted = x;
    let mut prod = Dd::ONE;
    while shifted.hi < 25.0 {
        prod = prod * shifted;
        shifted = shifted + 1.0;
    }
    Some((stirling(shifted) - prod.ln(), 1.0))
}
