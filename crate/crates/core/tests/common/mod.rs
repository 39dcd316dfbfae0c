//! Test-side oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

pub mod dd;

use dd::Dd;

/// `1.01 (r + 2 sqrt(r beta ln m) + 2 beta ln m)` in double-double.
pub fn gamma_sq(r: usize, beta: f64, m: usize) -> Dd {
    let lm = Dd::from(m as f64).ln();
    let r = Dd::from(r as f64);
    let beta = Dd::from(beta);
    let inner = r + Dd::from(2.0) * (r * beta * lm).sqrt() + Dd::from(2.0) * beta * lm;
    Dd::from(1.01) * inner
}

/// `sqrt i + sqrt j + sqrt(2 i ln(e m / i) + 2 j ln(e n / j) + 8 ln m)`.
pub fn delta(i: usize, j: usize, m: usize, n: usize) -> Dd {
    let (i, j, mm, nn) = (Dd::from(i as f64), Dd::from(j as f64), Dd::from(m as f64), Dd::from(n as f64));
    let one = Dd::from(1.0);
    let two = Dd::from(2.0);
    // ln(e m / i) = 1 + ln m - ln i
    let li = one + mm.ln() - i.ln();
    let lj = one + nn.ln() - j.ln();
    i.sqrt() + j.sqrt() + (two * i * li + two * j * lj + Dd::from(8.0) * mm.ln()).sqrt()
}

/// `r^(2/q) (k + l) + r^(2/q - 1) (k ln(e m / k) + l ln(e n / l))`.
pub fn psi_q(m: usize, n: usize, k: usize, l: usize, r: usize, q: f64) -> Dd {
    let (mm, nn, kk, ll, rr) = (
        Dd::from(m as f64),
        Dd::from(n as f64),
        Dd::from(k as f64),
        Dd::from(l as f64),
        Dd::from(r as f64),
    );
    let one = Dd::from(1.0);
    let e = Dd::from(2.0) / Dd::from(q);
    let a = rr.powd(e) * (kk + ll);
    let b = rr.powd(e - one) * (kk * (one + mm.ln() - kk.ln()) + ll * (one + nn.ln() - ll.ln()));
    a + b
}

/// `r^(2/q - 1) (r + ln m) (k + l)`.
pub fn rescale(q: f64, m: usize, k: usize, l: usize, r: usize) -> Dd {
    let rr = Dd::from(r as f64);
    let e = Dd::from(2.0) / Dd::from(q) - Dd::from(1.0);
    rr.powd(e) * (rr + Dd::from(m as f64).ln()) * Dd::from((k + l) as f64)
}

/// Unrounded `0.55 (log2 m + ln(d^2 / g^2))`.
pub fn t_hat_raw(d: f64, g: f64, m: usize) -> Dd {
    let mm = Dd::from(m as f64);
    let log2m = mm.ln() / Dd::ln2();
    let ratio = (Dd::from(d) * Dd::from(d)) / (Dd::from(g) * Dd::from(g));
    Dd::from(1.1) / Dd::from(2.0) * (log2m + ratio.ln())
}

/// Relative difference of an f64 result against a double-double oracle.
pub fn rel_err(got: f64, want: Dd) -> f64 {
    ((Dd::from(got) - want).to_f64() / want.to_f64()).abs()
}
