//! Double-double arithmetic (about 106 significant bits), enough to serve as
//! a reference for f64 formula evaluation.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }
}

impl Dd {
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn ln2() -> Self {
        Dd::new(std::f64::consts::LN_2, 2.319_046_813_846_299_6e-17)
    }

    fn mul_pow2(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from(0.0);
        }
        let y = Dd::from(self.hi.sqrt());
        // one Newton step from a correctly rounded start doubles the digits
        y + (self - y * y) / (Dd::from(2.0) * y)
    }

    pub fn exp(self) -> Self {
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self - Dd::ln2() * Dd::from(k);
        let r = r.mul_pow2(-4);
        // Taylor series on |r| < 2^-4 * ln2 / 2
        let mut term = Dd::from(1.0);
        let mut sum = Dd::from(1.0);
        for i in 1..=27 {
            term = term * r / Dd::from(i as f64);
            sum = sum + term;
        }
        for _ in 0..4 {
            sum = sum * sum;
        }
        sum.mul_pow2(k as i32)
    }

    pub fn ln(self) -> Self {
        assert!(self.hi > 0.0, "ln of nonpositive value");
        let mut y = Dd::from(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Dd::from(1.0);
        }
        y
    }

    pub fn powd(self, e: Dd) -> Self {
        (e * self.ln()).exp()
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

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
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

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from(q2);
        let q3 = r.hi / o.hi;
        Dd::new(q1, q2) + Dd::from(q3)
    }
}

/// Known-value checks of the primitives; true when all hold to 1e-28.
pub fn self_check() -> bool {
    let two = Dd::from(2.0);
    let e = Dd::from(1.0).exp();
    let s = two.sqrt();
    [
        (two.ln() - Dd::ln2()).to_f64(),
        (e - Dd::new(std::f64::consts::E, 1.445_646_891_729_250_2e-16)).to_f64(),
        (s * s - two).to_f64(),
    ]
    .iter()
    .all(|d| d.abs() < 1e-28)
}
