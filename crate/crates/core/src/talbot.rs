//! Linear Schrödinger evolution of Dirac-comb data.
//!
//! Three statements of the free flow's amplitude coexist in this problem,
//! and each function documents which one it uses:
//!
//! * the *ansatz brick* [`free_propagator_delta`], `(it)^{-1/2} e^{i(x-j)^2/4t}`,
//!   with modulus `t^{-1/2}`: the building block of the coefficient ansatz,
//!   of [`crate::field::u_from_state`], and of [`linear_evolve_direct`];
//! * the *unit-mass kernel* `(4 pi i t)^{-1/2} e^{i(x-j)^2/4t}`, the flow
//!   with Fourier multiplier `e^{-i t xi^2}`, equal to [`KERNEL_RENORM`]
//!   times the brick. The comb revival into the Gauss train `G(-p,m,q)/q`
//!   ([`dirac_comb_revival`]) is exact in this convention;
//! * the *revival amplitude* `q^{-1/2} |u_hat(xi_x)|` of
//!   [`talbot_closed_form`], which states the spectral density directly and
//!   differs from the unit-mass kernel by the Jacobian `4 pi t = 2p/q` of
//!   the substitution `xi = (x - l - m/q)/2t`.
//!
//! Cross-checks between families therefore convert explicitly:
//! closed form = `4 pi t *` unit-mass = [`revival_renorm`]` *` brick sum.

use crate::error::{Error, Result};
use crate::gauss::{gauss_sum, GaussSumParams};
use crate::util::{cis, fft_forward, CompensatedC64};
use crate::C64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI, TAU};

/// `(4 pi)^{-1/2}`: multiplying a sum of [`free_propagator_delta`] terms by
/// this constant yields the unit-mass-kernel evolution.
pub const KERNEL_RENORM: f64 = 0.28209479177387814; // 1/sqrt(4 pi)

/// `sqrt(4 pi) t`: multiplying the brick sum [`linear_evolve_direct`] by
/// this factor expresses it in the revival-amplitude convention of
/// [`talbot_closed_form`] (`4 pi t` from the kernel-to-amplitude Jacobian
/// times [`KERNEL_RENORM`] from brick to kernel).
pub fn revival_renorm(t: &RationalTime) -> f64 {
    (4.0 * PI).sqrt() * t.value()
}

/// Reduced rational time `t = (1/2pi) (p/q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalTime {
    p: u64,
    q: u64,
}

impl RationalTime {
    /// Build from a fraction; the representation is reduced so the stored
    /// pair is always coprime.
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::invalid("rational time requires p >= 1 and q >= 1"));
        }
        let g = p.gcd(&q);
        Ok(Self { p: p / g, q: q / g })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// The time value `p / (2 pi q)`.
    pub fn value(&self) -> f64 {
        self.p as f64 / (TAU * self.q as f64)
    }

    pub fn q_is_odd(&self) -> bool {
        self.q % 2 == 1
    }
}

/// Fourier-side datum: finitely many coefficients `alpha_k`, with the
/// convention `u_hat(xi) = sum_k alpha_k e^{-ik xi}` (physical side:
/// `u_0 = sum_k alpha_k delta(x - k)`). Serializes as a map `k -> [re, im]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeriodicSpectrum {
    coeffs: BTreeMap<i64, C64>,
}

impl Serialize for PeriodicSpectrum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr: BTreeMap<i64, [f64; 2]> =
            self.coeffs.iter().map(|(&k, c)| (k, [c.re, c.im])).collect();
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodicSpectrum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = BTreeMap::<i64, [f64; 2]>::deserialize(d)?;
        Ok(Self {
            coeffs: repr
                .into_iter()
                .map(|(k, [re, im])| (k, C64::new(re, im)))
                .collect(),
        })
    }
}

impl PeriodicSpectrum {
    pub fn new(coeffs: BTreeMap<i64, C64>) -> Self {
        Self { coeffs }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, C64)>) -> Self {
        Self {
            coeffs: pairs.into_iter().collect(),
        }
    }

    /// Truncated comb `alpha_k = 1` for `|k| <= n`.
    pub fn truncated_comb(n: i64) -> Self {
        Self::from_pairs((-n..=n).map(|k| (k, C64::new(1.0, 0.0))))
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, C64> {
        &self.coeffs
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    /// Homogeneous weighted norm `(sum |k|^{2s} |alpha_k|^2)^{1/2}`.
    pub fn l2s_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&k, c)| (k as f64).abs().powf(2.0 * s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Multiply every coefficient by a real factor.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_pairs(self.coeffs.iter().map(|(&k, &c)| (k, c * factor)))
    }

    /// True when `alpha_k = alpha_{-k}` and all coefficients are real, the
    /// class where `sum alpha_k e^{-ik xi}` and `sum alpha_k e^{ik xi}`
    /// coincide.
    pub fn is_even_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(&k, c)| {
            let mirror = self.coeffs.get(&-k).copied().unwrap_or_default();
            c.im.abs() <= tol && (c - mirror).norm() <= tol
        })
    }

    /// Dense view `(k_min, values)` covering the support.
    fn dense(&self) -> (i64, Vec<C64>) {
        if self.coeffs.is_empty() {
            return (0, vec![]);
        }
        let kmin = *self.coeffs.keys().next().unwrap();
        let kmax = *self.coeffs.keys().last().unwrap();
        let mut v = vec![C64::default(); (kmax - kmin + 1) as usize];
        for (&k, &c) in &self.coeffs {
            v[(k - kmin) as usize] = c;
        }
        (kmin, v)
    }

    /// `u_hat(xi) = sum_k alpha_k e^{-ik xi}`.
    pub fn u_hat(&self, xi: f64) -> C64 {
        let (kmin, dense) = self.dense();
        let mut acc = CompensatedC64::default();
        let z = cis(-xi);
        let mut w = cis(-(kmin as f64) * xi);
        for (i, c) in dense.iter().enumerate() {
            if i > 0 {
                if i % 256 == 0 {
                    w = cis(-((kmin + i as i64) as f64) * xi);
                } else {
                    w *= z;
                }
            }
            if c.norm_sqr() > 0.0 {
                acc.add(c * w);
            }
        }
        acc.value()
    }

    /// Values of `u_hat` on the uniform grid `xi_j = 2 pi j / n`, via FFT.
    pub fn u_hat_samples(&self, n: usize) -> Vec<C64> {
        let mut buf = vec![C64::default(); n];
        for (&k, &c) in &self.coeffs {
            let idx = (k.rem_euclid(n as i64)) as usize;
            buf[idx] += c;
        }
        // sum_k alpha_k e^{-2 pi i k j / n} is a forward DFT of the wrapped
        // coefficient array.
        fft_forward(&mut buf);
        buf
    }

    /// Half-width `r` of the support of `u_hat` modulo `2 pi`: the largest
    /// `|xi|`, `xi` in `(-pi, pi]`, where `|u_hat|` exceeds `rel_tol` times
    /// its maximum. Resolved on an FFT grid fine enough for the support.
    pub fn support_halfwidth(&self, rel_tol: f64) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        let span = self
            .coeffs
            .keys()
            .map(|k| k.unsigned_abs())
            .max()
            .unwrap_or(0) as usize;
        let n = (4 * span + 1).next_power_of_two().max(4096);
        let samples = self.u_hat_samples(n);
        let peak = samples.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let mut r: f64 = 0.0;
        for (j, c) in samples.iter().enumerate() {
            if c.norm() > rel_tol * peak {
                let xi = TAU * j as f64 / n as f64;
                let xi = if xi > PI { xi - TAU } else { xi };
                r = r.max(xi.abs());
            }
        }
        r
    }
}

/// A periodic train of weighted Dirac masses.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTrain {
    /// `(support point, weight)`, supports inside one period cell.
    pub entries: Vec<(f64, C64)>,
    pub period: f64,
}

impl DeltaTrain {
    /// Pair the train (periodised over the cells in `cells`) with a test
    /// function: `sum_l sum_m w_m f(s_m + l * period)`.
    pub fn pair_with(&self, cells: std::ops::RangeInclusive<i64>, f: impl Fn(f64) -> C64) -> C64 {
        let mut acc = CompensatedC64::default();
        for l in cells {
            for &(s, w) in &self.entries {
                acc.add(w * f(s + l as f64 * self.period));
            }
        }
        acc.value()
    }
}

/// Free evolution of a unit delta at `j`, in the constant-free convention:
/// `(it)^{-1/2} e^{i(x-j)^2/4t}`, principal branch, so the modulus is
/// `t^{-1/2}` and the phase is `(x-j)^2/4t - pi/4`.
pub fn free_propagator_delta(x: f64, t: f64, j: i64) -> Result<C64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!(
            "free propagator requires t > 0, got t = {t}"
        )));
    }
    let d = x - j as f64;
    Ok(t.powf(-0.5) * cis(d * d / (4.0 * t) - FRAC_PI_4))
}

/// Revival of the integer Dirac comb at rational time `t = p/(2 pi q)`:
/// a train of `q` masses per unit cell at `m/q` with weights `G(-p, m, q)/q`
/// (unit-mass kernel convention). For odd `q` every weight has modulus
/// `q^{-1/2}`.
pub fn dirac_comb_revival(t: &RationalTime) -> Result<DeltaTrain> {
    let q = t.q();
    let p = t.p() as i64;
    let mut entries = Vec::with_capacity(q as usize);
    for m in 0..q {
        let g = gauss_sum(GaussSumParams::new(-p, m as i64, q)?)?;
        entries.push((m as f64 / q as f64, g / q as f64));
    }
    Ok(DeltaTrain {
        entries,
        period: 1.0,
    })
}

/// Free evolution of a finite-support spectrum by direct summation of
/// ansatz bricks: `sum_k alpha_k (it)^{-1/2} e^{i(x-k)^2/4t}`.
///
/// This is the oracle path; comparisons against the unit-mass kernel or the
/// revival amplitude apply [`KERNEL_RENORM`] or [`revival_renorm`].
pub fn linear_evolve_direct(spec: &PeriodicSpectrum, t: f64, x: f64) -> Result<C64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!(
            "linear evolution requires t > 0, got t = {t}"
        )));
    }
    let mut acc = CompensatedC64::default();
    for (&k, &c) in spec.coeffs() {
        let d = x - k as f64;
        acc.add(c * cis(d * d / (4.0 * t)));
    }
    Ok(acc.value() * t.powf(-0.5) * cis(-FRAC_PI_4))
}

/// Grid version of [`linear_evolve_direct`] at a rational time, with the
/// quadratic phases `k^2/4t = pi q k^2 / (2p)` reduced exactly in integer
/// arithmetic so the summation stays accurate for spectra with tens of
/// thousands of modes.
pub fn evolve_direct_rational(spec: &PeriodicSpectrum, t: &RationalTime, xs: &[f64]) -> Vec<C64> {
    let (kmin, dense) = spec.dense();
    if dense.is_empty() {
        return vec![C64::default(); xs.len()];
    }
    let p = t.p() as i128;
    let q = t.q() as i128;
    let tval = t.value();
    // twisted coefficients alpha_k e^{i k^2 / 4t}, exact phase mod 2 pi
    let twisted: Vec<C64> = dense
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = kmin + i as i64;
            let r = ((k as i128) * (k as i128) % (4 * p) * q) % (4 * p);
            c * cis(PI * r as f64 / (2.0 * p as f64))
        })
        .collect();
    let amp = tval.powf(-0.5);
    let rate = PI * q as f64 / p as f64; // phase of e^{-ikx/2t} is -k x rate / x ... -k * x * rate
    xs.iter()
        .map(|&x| {
            let z = cis(-x * rate);
            let mut w = cis(-(kmin as f64) * x * rate);
            let mut acc = CompensatedC64::default();
            for (i, c) in twisted.iter().enumerate() {
                if i > 0 {
                    if i % 256 == 0 {
                        w = cis(-((kmin + i as i64) as f64) * x * rate);
                    } else {
                        w *= z;
                    }
                }
                if c.norm_sqr() > 0.0 {
                    acc.add(c * w);
                }
            }
            acc.value() * amp * cis(x * x / (4.0 * tval) - FRAC_PI_4)
        })
        .collect()
}

/// `xi_x = (pi q / p) d(x, (1/q) Z)`, the spectral coordinate of the closed
/// form; lies in `[0, pi/(2p)]`.
pub fn xi_x(x: f64, t: &RationalTime) -> f64 {
    let q = t.q() as f64;
    let d = (x * q - (x * q).round()).abs() / q;
    PI * q / t.p() as f64 * d
}

fn check_support(spec: &PeriodicSpectrum, t: &RationalTime) -> Result<()> {
    if !t.q_is_odd() {
        return Err(Error::invalid(format!(
            "closed form requires odd q, got q = {}",
            t.q()
        )));
    }
    let r = spec.support_halfwidth(1e-9);
    let limit = PI / (2.0 * t.p() as f64);
    if r >= limit {
        return Err(Error::invalid(format!(
            "spectrum support half-width {r:.3e} is not inside (-pi/2p, pi/2p) = \
             (+-{limit:.3e}); the revival formula does not apply"
        )));
    }
    Ok(())
}

/// Modulus of the revival of a concentrated spectrum at `t = p/(2 pi q)`,
/// odd `q`: `q^{-1/2} |u_hat(xi_x)|` (unit-mass kernel convention). The
/// value vanishes wherever `xi_x` leaves the spectrum support; the phase is
/// not reproduced.
pub fn talbot_closed_form(spec: &PeriodicSpectrum, t: &RationalTime, x: f64) -> Result<f64> {
    check_support(spec, t)?;
    Ok(spec.u_hat(xi_x(x, t)).norm() / (t.q() as f64).sqrt())
}

/// Grid version of [`talbot_closed_form`] (support condition checked once).
pub fn talbot_closed_form_grid(
    spec: &PeriodicSpectrum,
    t: &RationalTime,
    xs: &[f64],
) -> Result<Vec<f64>> {
    check_support(spec, t)?;
    let scale = (t.q() as f64).sqrt().recip();
    Ok(xs
        .iter()
        .map(|&x| spec.u_hat(xi_x(x, t)).norm() * scale)
        .collect())
}

/// Partial sum `sum_{k=1}^{K} (e^{i t k^2} - 1)/k^2` of Riemann's
/// non-differentiable function; the dropped tail is at most `2/K`.
pub fn riemann_function(t: f64, k_max: u64) -> Result<C64> {
    if k_max == 0 {
        return Err(Error::invalid("riemann_function requires K >= 1"));
    }
    let mut acc = CompensatedC64::default();
    for k in 1..=k_max {
        let kk = (k * k) as f64;
        acc.add((cis(t * kk) - C64::new(1.0, 0.0)) / kk);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rational_time_reduces() {
        let t = RationalTime::new(4, 6).unwrap();
        assert_eq!((t.p(), t.q()), (2, 3));
        assert_relative_eq!(t.value(), 2.0 / (TAU * 3.0));
        assert!(t.q_is_odd());
        assert!(RationalTime::new(0, 3).is_err());
    }

    #[test]
    fn propagator_at_center_and_shifted() {
        // x = j: e^{-i pi/4}
        let v = free_propagator_delta(5.0, 1.0, 5).unwrap();
        assert_relative_eq!(v.re, FRAC_PI_4.cos(), epsilon = 1e-14);
        assert_relative_eq!(v.im, -FRAC_PI_4.sin(), epsilon = 1e-14);
        // x = j + 2, t = 1: phase 1 - pi/4
        let v = free_propagator_delta(2.0, 1.0, 0).unwrap();
        assert_relative_eq!(v.re, (1.0 - FRAC_PI_4).cos(), epsilon = 1e-14);
        assert_relative_eq!(v.im, (1.0 - FRAC_PI_4).sin(), epsilon = 1e-14);
        // modulus t^{-1/2}
        for x in [-3.3, 0.1, 7.9] {
            assert_relative_eq!(
                free_propagator_delta(x, 4.0, 1).unwrap().norm(),
                0.5,
                epsilon = 1e-14
            );
        }
        assert!(free_propagator_delta(0.0, 0.0, 0).is_err());
        assert!(free_propagator_delta(0.0, -1.0, 0).is_err());
    }

    #[test]
    fn full_revival_at_unit_fraction() {
        let train = dirac_comb_revival(&RationalTime::new(1, 1).unwrap()).unwrap();
        assert_eq!(train.entries.len(), 1);
        assert_eq!(train.entries[0].0, 0.0);
        assert_relative_eq!(train.entries[0].1.re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(train.entries[0].1.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn q3_revival_moduli() {
        let train = dirac_comb_revival(&RationalTime::new(1, 3).unwrap()).unwrap();
        assert_eq!(train.entries.len(), 3);
        for (m, &(s, w)) in train.entries.iter().enumerate() {
            assert_relative_eq!(s, m as f64 / 3.0);
            assert_relative_eq!(w.norm(), 1.0 / 3.0f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn q5_weights_match_gauss_sums() {
        let train = dirac_comb_revival(&RationalTime::new(2, 5).unwrap()).unwrap();
        for (m, &(_, w)) in train.entries.iter().enumerate() {
            let g = gauss_sum(GaussSumParams::new(-2, m as i64, 5).unwrap()).unwrap();
            assert_relative_eq!((w - g / 5.0).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn revival_weight_mass_is_one() {
        // |G(-p,m,q)/q|^2 = 1/q per site, q sites: the revival conserves the
        // per-cell l2 mass of the comb weights.
        for &(p, q) in &[(1u64, 3u64), (2, 5), (4, 7), (8, 9)] {
            let train = dirac_comb_revival(&RationalTime::new(p, q).unwrap()).unwrap();
            let mass: f64 = train.entries.iter().map(|(_, w)| w.norm_sqr()).sum();
            assert_relative_eq!(mass, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn evolve_single_delta_is_the_propagator_brick() {
        let spec = PeriodicSpectrum::from_pairs([(0, C64::new(1.0, 0.0))]);
        for &(x, t) in &[(0.3, 0.8), (-1.7, 0.05)] {
            let direct = linear_evolve_direct(&spec, t, x).unwrap();
            let brick = free_propagator_delta(x, t, 0).unwrap();
            assert_relative_eq!((direct - brick).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_renormalised_direct_sum() {
        let spec = gaussian_spectrum(16.0, 96);
        let t = RationalTime::new(2, 3).unwrap();
        let xs: Vec<f64> = (0..128).map(|i| -0.5 + i as f64 / 128.0).collect();
        let closed = talbot_closed_form_grid(&spec, &t, &xs).unwrap();
        let direct = evolve_direct_rational(&spec, &t, &xs);
        let factor = revival_renorm(&t);
        let peak = closed.iter().cloned().fold(0.0f64, f64::max);
        for (c, d) in closed.iter().zip(&direct) {
            assert!(
                (c - factor * d.norm()).abs() <= 1e-8 * peak,
                "closed {c} vs renormalised direct {}",
                factor * d.norm()
            );
        }
    }

    #[test]
    fn evolve_is_linear() {
        let s1 = PeriodicSpectrum::from_pairs([(0, C64::new(1.0, 0.0)), (2, C64::new(0.0, 0.5))]);
        let s2 = PeriodicSpectrum::from_pairs([(-1, C64::new(0.3, -0.2)), (2, C64::new(1.0, 0.0))]);
        let (a, b) = (C64::new(0.7, 0.1), C64::new(-0.4, 0.9));
        let mut combo = BTreeMap::new();
        for (&k, &c) in s1.coeffs() {
            *combo.entry(k).or_insert(C64::default()) += a * c;
        }
        for (&k, &c) in s2.coeffs() {
            *combo.entry(k).or_insert(C64::default()) += b * c;
        }
        let spec = PeriodicSpectrum::new(combo);
        let (x, t) = (0.37, 0.21);
        let lhs = linear_evolve_direct(&spec, t, x).unwrap();
        let rhs = a * linear_evolve_direct(&s1, t, x).unwrap()
            + b * linear_evolve_direct(&s2, t, x).unwrap();
        assert_relative_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn rational_grid_matches_generic_evolve() {
        let spec = PeriodicSpectrum::from_pairs(
            (-40..=40i64).map(|k| (k, C64::new((-0.01 * (k * k) as f64).exp(), 0.0))),
        );
        let t = RationalTime::new(2, 3).unwrap();
        let xs = [0.0, 0.11, 0.5, -0.37];
        let fast = evolve_direct_rational(&spec, &t, &xs);
        for (i, &x) in xs.iter().enumerate() {
            let slow = linear_evolve_direct(&spec, t.value(), x).unwrap();
            assert_relative_eq!((fast[i] - slow).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn xi_on_lattice_and_hand_value() {
        let t = RationalTime::new(2, 3).unwrap();
        assert_relative_eq!(xi_x(1.0, &t), 0.0, epsilon = 1e-14); // 3/q with q=3
        // x = 1/6: d = 1/6, (pi q / p) d = (3 pi / 2)(1/6) = pi/4
        assert_relative_eq!(xi_x(1.0 / 6.0, &t), PI / 4.0, epsilon = 1e-14);
        // periodic in x with period 1/q
        for x in [0.02, 0.013, 0.4] {
            assert_relative_eq!(xi_x(x + 1.0 / 3.0, &t), xi_x(x, &t), epsilon = 1e-12);
        }
    }

    /// Even-real Gaussian coefficients of width `sigma`; `u_hat` is then a
    /// periodised Gaussian of width `2/sigma`, concentrated enough for the
    /// closed form once `sigma` is large.
    fn gaussian_spectrum(sigma: f64, span: i64) -> PeriodicSpectrum {
        PeriodicSpectrum::from_pairs(
            (-span..=span).map(|k| (k, C64::new((-(k as f64 / sigma).powi(2)).exp(), 0.0))),
        )
    }

    #[test]
    fn closed_form_on_lattice_is_peak_over_sqrt_q() {
        // u_hat support ~ 9.1/sigma ~ 0.57 at the 1e-9 level, inside pi/(2p)
        let spec = gaussian_spectrum(16.0, 96);
        let t = RationalTime::new(2, 3).unwrap();
        let v0 = talbot_closed_form(&spec, &t, 1.0 / 3.0).unwrap();
        let peak = spec.u_hat(0.0).norm();
        assert_relative_eq!(v0, peak / 3.0f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn closed_form_modulus_is_one_over_q_periodic() {
        let spec = gaussian_spectrum(16.0, 96);
        let t = RationalTime::new(2, 3).unwrap();
        for i in 0..64 {
            let x = -0.5 + i as f64 / 64.0;
            let a = talbot_closed_form(&spec, &t, x).unwrap();
            let b = talbot_closed_form(&spec, &t, x + 1.0 / 3.0).unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_form_rejects_wide_spectrum_and_even_q() {
        // flat comb: u_hat is a delta-like spike train with full-width support
        let spec = PeriodicSpectrum::truncated_comb(10);
        let t = RationalTime::new(25, 27).unwrap();
        assert!(talbot_closed_form(&spec, &t, 0.0).is_err());
        let narrow = gaussian_spectrum(16.0, 96);
        let teven = RationalTime::new(1, 2).unwrap();
        assert!(talbot_closed_form(&narrow, &teven, 0.0).is_err());
    }

    #[test]
    fn riemann_zero_at_zero() {
        for k in [1u64, 7, 100] {
            let v = riemann_function(0.0, k).unwrap();
            assert_eq!(v, C64::default());
        }
    }

    #[test]
    fn riemann_near_zero_at_two_pi() {
        // at the f64 nearest to 2 pi the partial sum is zero up to
        // K * |fl(2pi) - 2pi| ~ 2.4e-16 K
        let v = riemann_function(TAU, 16).unwrap();
        assert!(v.norm() <= 1e-14, "|S| = {}", v.norm());
    }

    #[test]
    fn riemann_at_pi_converges_to_quarter_pi_squared() {
        // e^{i pi k^2} = (-1)^k: odd terms contribute -2/k^2, sum -> -pi^2/4
        let target = -PI * PI / 4.0;
        for k in [10u64, 100, 1000, 10000] {
            let v = riemann_function(PI, k).unwrap();
            assert!(v.im.abs() < 1e-12);
            assert!(
                (v.re - target).abs() <= 2.0 / k as f64,
                "K={k}: err {} > {}",
                (v.re - target).abs(),
                2.0 / k as f64
            );
        }
    }

    #[test]
    fn support_halfwidth_of_narrow_spectrum() {
        // gaussian coefficients of width sigma give a u_hat gaussian of
        // width 2/sigma; the 1e-9-relative support edge is 2 sqrt(ln 1e9)/sigma
        let spec = gaussian_spectrum(8.0, 60);
        let r = spec.support_halfwidth(1e-9);
        let expected = 2.0 * (1e9f64.ln()).sqrt() / 8.0;
        assert!((r - expected).abs() < 0.05, "r = {r}, expected ~ {expected}");
        assert!(spec.is_even_real(0.0));
    }

    #[test]
    fn delta_train_pairs_with_test_function() {
        let train = DeltaTrain {
            entries: vec![(0.25, C64::new(2.0, 0.0))],
            period: 1.0,
        };
        let v = train.pair_with(-1..=1, |x| C64::new(x, 0.0));
        // 2 * ((-0.75) + 0.25 + 1.25) = 1.5
        assert_relative_eq!(v.re, 1.5, epsilon = 1e-14);
    }
}
