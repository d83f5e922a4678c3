//! Quadratic Gauss sums `G(a, b, c) = sum_{l=0}^{c-1} e^{2 pi i (a l^2 + b l)/c}`.
//!
//! These weight the delta train that a Dirac comb revives into at rational
//! times. For odd modulus `c` and `gcd(a, c) = 1` the modulus of the sum is
//! exactly `sqrt(c)`; the phase has no closed form we rely on, so it is only
//! ever obtained numerically from the sum itself.
//!
//! Evaluation is direct `O(c)` summation with compensated accumulation; the
//! exponent is reduced mod `c` in integer arithmetic before any call to
//! `sin`/`cos`, so every summand's angle is computed from an exact residue.

use crate::error::{Error, Result};
use crate::util::{principal_angle, CompensatedC64};
use crate::C64;
use num_integer::Integer;

/// Refuse direct summation beyond this modulus; the sums in scope are
/// desk-scale and anything larger is almost certainly a caller bug.
pub const MAX_MODULUS: u64 = 10_000_000;

/// Parameters of the sum `sum_{l=0}^{c-1} e^{2 pi i (a l^2 + b l)/c}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussSumParams {
    /// Quadratic coefficient.
    pub a: i64,
    /// Linear coefficient.
    pub b: i64,
    /// Modulus, at least 1.
    pub c: u64,
}

impl GaussSumParams {
    pub fn new(a: i64, b: i64, c: u64) -> Result<Self> {
        if c == 0 {
            return Err(Error::invalid("gauss sum modulus c must be >= 1"));
        }
        if c > MAX_MODULUS {
            return Err(Error::invalid(format!(
                "gauss sum modulus {c} exceeds the summation bound {MAX_MODULUS}"
            )));
        }
        Ok(Self { a, b, c })
    }
}

/// Direct evaluation of the quadratic Gauss sum.
///
/// Coefficients are reduced mod `c` first, which makes the periodicity
/// `G(a, b, c) = G(a + c, b, c) = G(a, b + c, c)` hold bit-for-bit.
pub fn gauss_sum(params: GaussSumParams) -> Result<C64> {
    let GaussSumParams { a, b, c } = params;
    // Re-validate so a hand-built struct cannot bypass the bounds.
    let params = GaussSumParams::new(a, b, c)?;
    let c = params.c as i128;
    let a = (params.a as i128).rem_euclid(c);
    let b = (params.b as i128).rem_euclid(c);

    let mut acc = CompensatedC64::default();
    let two_pi = std::f64::consts::TAU;
    for l in 0..c {
        // a l^2 + b l mod c stays well inside i128 for c <= 1e7.
        let r = (a * l % c * l % c + b * l % c) % c;
        let angle = two_pi * (r as f64) / (c as f64);
        let (s, co) = angle.sin_cos();
        acc.add(C64::new(co, s));
    }
    Ok(acc.value())
}

/// Phase `theta` in `(-pi, pi]` with `G(-p, m, q) = sqrt(q) e^{i theta}`,
/// valid for odd `q` coprime to `p` (the only case with a magnitude law).
pub fn gauss_phase(p: i64, m: i64, q: u64) -> Result<f64> {
    if q == 0 || q % 2 == 0 {
        return Err(Error::invalid(format!(
            "gauss_phase requires odd q >= 1, got q = {q}"
        )));
    }
    let g = (p.unsigned_abs() % q).gcd(&q);
    if g != 1 && !(q == 1) {
        return Err(Error::invalid(format!(
            "gauss_phase requires gcd(p, q) = 1, got gcd = {g}"
        )));
    }
    let sum = gauss_sum(GaussSumParams::new(-p, m, q)?)?;
    Ok(principal_angle(sum.im.atan2(sum.re)))
}
