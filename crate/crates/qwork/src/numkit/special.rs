//! Gamma, confluent limit function 0F1, and Airy functions with derivatives.

use crate::error::{Error, Result};

// Lanczos approximation, g = 7, 9 coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Gamma function for real arguments (poles at non-positive integers are rejected).
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma argument {x} is not finite")));
    }
    if x < 0.5 {
        if x == x.floor() {
            return Err(Error::Domain(format!("gamma pole at {x}")));
        }
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI / (s * gamma_fn(1.0 - x)?));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    Ok((2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc)
}

/// 0F1(; a; z) by direct term recursion.
pub fn hyp0f1(a: f64, z: f64) -> Result<f64> {
    if a <= 0.0 && a == a.floor() {
        return Err(Error::Domain(format!("0F1 parameter {a} is a non-positive integer")));
    }
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for n in 0..500 {
        term *= z / ((a + n as f64) * (n as f64 + 1.0));
        sum += term;
        if term.abs() <= 1e-16 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "0F1 series".into(),
    })
}

/// Ai, Bi, Ai', Bi' at a real argument.
#[derive(Debug, Clone, Copy)]
pub struct AiryValues {
    pub ai: f64,
    pub bi: f64,
    pub ai_prime: f64,
    pub bi_prime: f64,
}

/// Validated argument range for the Maclaurin-type series below.
pub const AIRY_MAX_ABS: f64 = 10.0;

/// Airy functions via the ascending series
///   f(z) = 0F1(2/3; z^3/9),  g(z) = z 0F1(4/3; z^3/9),
///   Ai = c1 f - c2 g,  Bi = sqrt(3) (c1 f + c2 g),
/// with f'(z) = (z^2/2) 0F1(5/3; z^3/9) and g'(z) = 0F1(1/3; z^3/9).
pub fn airy(z: f64) -> Result<AiryValues> {
    if !z.is_finite() || z.abs() > AIRY_MAX_ABS {
        return Err(Error::AiryDomain {
            z,
            max: AIRY_MAX_ABS,
        });
    }
    let c1 = 1.0 / (3.0_f64.powf(2.0 / 3.0) * gamma_fn(2.0 / 3.0)?);
    let c2 = 1.0 / (3.0_f64.powf(1.0 / 3.0) * gamma_fn(1.0 / 3.0)?);
    let w = z * z * z / 9.0;
    let f = hyp0f1(2.0 / 3.0, w)?;
    let g = z * hyp0f1(4.0 / 3.0, w)?;
    let fp = 0.5 * z * z * hyp0f1(5.0 / 3.0, w)?;
    let gp = hyp0f1(1.0 / 3.0, w)?;
    let sqrt3 = 3.0_f64.sqrt();
    Ok(AiryValues {
        ai: c1 * f - c2 * g,
        bi: sqrt3 * (c1 * f + c2 * g),
        ai_prime: c1 * fp - c2 * gp,
        bi_prime: sqrt3 * (c1 * fp + c2 * gp),
    })
}
