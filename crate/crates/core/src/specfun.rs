//! Real-line gamma and log-gamma via a fixed-coefficient Lanczos
//! approximation.
//!
//! The coefficients are embedded in the source rather than delegating to the
//! platform `tgamma`, so coefficient tables derived from gamma ratios are
//! bit-stable across platforms. Accuracy is ~1e-14 relative on (0, 30),
//! comfortably below the truncation errors (≥ 1e-14) the schemes produce.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Lanczos parameter g = 7 with the classic 9-term coefficient set.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Maximum argument before Γ(x) overflows an f64 (Γ(171.63) ≈ 1.79e308).
const GAMMA_OVERFLOW_X: f64 = 171.62;

/// Tolerance for detecting integer arguments (poles of Γ at 0, −1, −2, ...).
const POLE_TOL: f64 = 1e-14;

/// Lanczos series A_g(x) for x ≥ 0 (the shifted argument, i.e. Γ(x+1) form).
fn lanczos_sum(x: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// Γ(x) for real x excluding the poles at zero and the negative integers.
///
/// Positive arguments use the Lanczos approximation directly; negative
/// non-integer arguments go through the reflection identity
/// Γ(x)Γ(1−x) = π/sin(πx).
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma argument {x} not finite")));
    }
    if x <= 0.0 && (x - x.round()).abs() < POLE_TOL {
        return Err(Error::GammaPole(x));
    }
    if x < 0.5 {
        // Reflection: Γ(x) = π / (sin(πx) Γ(1−x)).
        let s = (PI * x).sin();
        let g1mx = gamma(1.0 - x)?;
        let v = PI / (s * g1mx);
        if !v.is_finite() {
            return Err(Error::Overflow { context: "gamma", x });
        }
        return Ok(v);
    }
    if x > GAMMA_OVERFLOW_X {
        return Err(Error::Overflow { context: "gamma", x });
    }
    // Γ(x) = √(2π) t^{x-1/2} e^{-t} A_g(x-1), t = x - 1 + g + 1/2.
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let v = (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z);
    if !v.is_finite() {
        return Err(Error::Overflow { context: "gamma", x });
    }
    Ok(v)
}

/// ln Γ(x) for x > 0.
///
/// Evaluated in log form so ratio-of-gamma expressions (e.g. the exact Riesz
/// derivatives of `x^m (1-x)^m`, with factorials up to 20!) never overflow.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        // ln Γ(x) = ln π − ln sin(πx) − ln Γ(1−x); sin(πx) > 0 on (0, 1).
        return Ok(PI.ln() - (PI * x).sin().ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}
