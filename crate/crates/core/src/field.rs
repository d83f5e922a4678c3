//! Physical-space evaluation of `u(x, t)` and the closed-form special
//! solutions.
//!
//! The reconstruction route is the pseudo-conformal prefactor formula
//! `u(x, t) = (it)^{-1/2} e^{i x^2/4t} conj(V)(x/2t, 1/t)` with
//! `V(y, tau) = sum_j B_j(tau) e^{ijy}`; it agrees term by term with
//! summing coefficient-weighted propagator bricks
//! `sum_j A_j(t) (it)^{-1/2} e^{i(x-j)^2/4t}`, which the tests exercise as
//! an independent route.

use crate::coeffs::{a_from_b, CoefficientState, Mode};
use crate::error::{Error, Result};
use crate::util::{cis, CompensatedC64};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// One sample of the reconstructed field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: f64,
    /// Strictly positive; the `t = 0` trace exists only as coefficient data.
    pub t: f64,
    pub value: (f64, f64),
}

impl FieldSample {
    pub fn new(x: f64, t: f64, value: C64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::invalid("field samples exist only for t > 0"));
        }
        Ok(Self {
            x,
            t,
            value: (value.re, value.im),
        })
    }

    pub fn value_c(&self) -> C64 {
        C64::new(self.value.0, self.value.1)
    }
}

/// Evaluate `V(y) = sum_j B_j e^{ijy}` of a line state.
fn v_eval(state: &CoefficientState, y: f64) -> C64 {
    let mut acc = CompensatedC64::default();
    for (j, b) in state.iter() {
        if b.norm_sqr() != 0.0 {
            acc.add(b * cis(j as f64 * y));
        }
    }
    acc.value()
}

/// `u(x, t)` from a coefficient state at `t = 1/tau`, via the prefactor
/// formula; `|u(x, t)| = t^{-1/2} |V(x/2t, 1/t)|` exactly.
///
/// Line states only: a periodic state sums over all integers and has no
/// pointwise value (truncate to a window first).
pub fn u_from_state(state: &CoefficientState, x: f64) -> Result<C64> {
    if matches!(state.mode(), Mode::Periodic { .. }) {
        return Err(Error::invalid(
            "periodic states have no pointwise field; truncate to a line window first",
        ));
    }
    let tau = state.tau();
    let t = 1.0 / tau;
    let y = x * tau / 2.0;
    let v = v_eval(state, y);
    Ok(tau.sqrt() * cis(x * x / (4.0 * t) - FRAC_PI_4) * v.conj())
}

/// [`u_from_state`] over a grid of `x` values.
pub fn u_grid(state: &CoefficientState, xs: &[f64]) -> Result<Vec<C64>> {
    xs.iter().map(|&x| u_from_state(state, x)).collect()
}

/// `omega(xi) = sum_j A_j(t) e^{ij xi}`, the `2 pi`-periodic twisted
/// transform of the solution; satisfies `(1/2pi) int_0^{2pi} |omega|^2 = cl1`.
pub fn omega_eval(state: &CoefficientState, xi: f64) -> Result<C64> {
    let a = a_from_b(state)?;
    let mut acc = CompensatedC64::default();
    for (&j, &aj) in &a.coeffs {
        acc.add(aj * cis(j as f64 * xi));
    }
    Ok(acc.value())
}

/// Symmetric truncation `c sum_{|k| <= K} e^{i(t k^2 + k x)}` of the
/// theta-type solution; the full sum does not converge pointwise, so only
/// truncations are ever evaluated.
pub fn u_m_eval(c: f64, x: f64, t: f64, k_trunc: u64) -> C64 {
    let mut acc = CompensatedC64::default();
    let k_trunc = k_trunc as i64;
    for k in -k_trunc..=k_trunc {
        let kf = k as f64;
        acc.add(cis(t * kf * kf + kf * x));
    }
    c * acc.value()
}

/// The self-similar brick `c0 t^{-1/2} e^{i x^2 / 4t}` (gauge
/// `M(t) = c0^2/t`); `|u| = c0 t^{-1/2}`.
pub fn self_similar(c0: f64, x: f64, t: f64) -> Result<C64> {
    if !(t > 0.0) {
        return Err(Error::invalid("self-similar profile requires t > 0"));
    }
    Ok(c0 / t.sqrt() * cis(x * x / (4.0 * t)))
}

/// Corner strength from the corner angle: `c = sqrt(-(2/pi) ln sin theta)`,
/// `theta` in `(0, pi/2]`.
pub fn c_from_angle(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= FRAC_PI_2) {
        return Err(Error::invalid(format!(
            "corner angle must lie in (0, pi/2], got {theta}"
        )));
    }
    Ok((-(2.0 / PI) * theta.sin().ln()).sqrt())
}

/// Inverse of [`c_from_angle`]: `theta = arcsin(e^{-pi c^2 / 2})`.
pub fn angle_from_c(c: f64) -> Result<f64> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::invalid("corner strength must be a nonnegative real"));
    }
    Ok((-PI * c * c / 2.0).exp().asin())
}

/// Coefficient value for the regular `M`-gon: `sin(2 pi / M) = e^{-pi c^2/2}`.
pub fn polygon_c(m: u32) -> Result<f64> {
    if m < 3 {
        return Err(Error::invalid("a polygon needs at least 3 sides"));
    }
    let s = (2.0 * PI / m as f64).sin();
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::invalid(format!(
            "sin(2 pi / {m}) = {s} is outside (0, 1]"
        )));
    }
    Ok((-(2.0 / PI) * s.ln()).sqrt())
}
