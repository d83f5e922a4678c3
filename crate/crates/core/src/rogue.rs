//! The concentrated-bump experiment: data whose spectrum sits in a narrow
//! window around the integers produce, at a rational time with large
//! denominator structure `q ~ p`, a `1/q`-periodic field of small amplitude
//! `p^beta / sqrt(q)`, and at a coarse rational time a localized structure
//! taller by `sqrt(q / q~)`. The nonlinear correction is computed by
//! integrating the coefficient flow backward from a large slow time (where
//! the remainders are zeroed) and re-assembling the field from the dressed
//! coefficients.

use crate::coeffs::{data_from_interaction, interaction_from_data, LineData};
use crate::error::{Error, Result};
use crate::integrate::{integrate_opts, IntegrateOpts, IntegrationStats};
use crate::talbot::{
    evolve_direct_rational, revival_renorm, talbot_closed_form_grid, PeriodicSpectrum,
    RationalTime,
};
use crate::util::cis;
use crate::C64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Even, nonnegative, smooth profile supported on `[-1, 1]` with value 1
/// at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BumpProfile {
    /// `exp(1 - 1/(1 - x^2))` inside `(-1, 1)`, zero outside.
    #[default]
    Standard,
}

/// Pointwise-evaluable bump profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct BumpSpec {
    pub profile: BumpProfile,
}

impl BumpSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self.profile {
            BumpProfile::Standard => {
                if x.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - x * x)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// `int_{-1}^{1} psi`, by composite trapezoid (spectrally accurate: all
    /// derivatives vanish at the endpoints).
    pub fn integral(&self) -> f64 {
        let n = 4096;
        let mut acc = 0.0;
        for i in 0..=n {
            let x = -1.0 + 2.0 * i as f64 / n as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * self.eval(x);
        }
        acc * 2.0 / n as f64
    }
}

/// Parameters of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RogueConfig {
    /// Spectral concentration, in `(0, 1/4)`.
    pub eta: f64,
    /// Concentration scale (denominator of the fine time is close to it).
    pub p: u64,
    /// Regularity index, `> 1/2`.
    pub s: f64,
    /// Amplitude exponent, `< 1/2 - 3s/2`.
    pub beta: f64,
    /// Fine-time denominator: odd, coprime to `p`, with `p/q` near 1.
    pub q: u64,
    /// Coarse rational time `p~/q~`, with `p~ < q~`, `q~` odd and small.
    pub p_tilde: u64,
    pub q_tilde: u64,
    #[serde(default)]
    pub bump: BumpSpec,
}

impl RogueConfig {
    /// The configuration exercised throughout the test suites.
    pub fn example() -> Self {
        Self {
            eta: 0.1,
            p: 25,
            s: 0.6,
            beta: -0.5,
            q: 27,
            p_tilde: 1,
            q_tilde: 3,
            bump: BumpSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 0.25) {
            return Err(Error::invalid("eta must lie in (0, 1/4)"));
        }
        if self.p == 0 || self.q == 0 || self.p_tilde == 0 || self.q_tilde == 0 {
            return Err(Error::invalid("p, q, p~, q~ must be positive"));
        }
        if !(self.s > 0.5) {
            return Err(Error::invalid("s must exceed 1/2"));
        }
        if !(self.beta < 0.5 - 1.5 * self.s) {
            return Err(Error::invalid(format!(
                "beta must be below 1/2 - 3s/2 = {}",
                0.5 - 1.5 * self.s
            )));
        }
        if self.q % 2 == 0 || self.q_tilde % 2 == 0 {
            return Err(Error::invalid("q and q~ must be odd"));
        }
        if self.p.gcd(&self.q) != 1 || self.p_tilde.gcd(&self.q_tilde) != 1 {
            return Err(Error::invalid("time fractions must be reduced"));
        }
        let ratio = self.p as f64 / self.q as f64;
        if (ratio - 1.0).abs() > 0.2 {
            return Err(Error::invalid(format!(
                "p/q = {ratio:.3} strays more than 20% from 1"
            )));
        }
        if self.p_tilde >= self.q_tilde {
            return Err(Error::invalid("the coarse time needs p~ < q~"));
        }
        let ratio = self.p_tilde as f64 / self.q_tilde as f64;
        if (ratio - 1.0).abs() > 0.7 {
            return Err(Error::invalid(format!(
                "p~/q~ = {ratio:.3} strays too far from 1"
            )));
        }
        Ok(())
    }

    pub fn time_fine(&self) -> RationalTime {
        RationalTime::new(self.p, self.q).expect("validated")
    }

    pub fn time_coarse(&self) -> RationalTime {
        RationalTime::new(self.p_tilde, self.q_tilde).expect("validated")
    }

    /// Support half-width `2 pi eta / p` of the spectrum on the Fourier side.
    pub fn support_halfwidth(&self) -> f64 {
        TAU * self.eta / self.p as f64
    }
}

/// Measured amplitudes of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RogueReport {
    /// `|u(0)|` at the fine time (the closed form gives `p^beta/sqrt(q)`).
    pub amp_at_0_tpq: f64,
    /// Global max of `|u|` on the measurement grid at the fine time.
    pub amp_max_tpq: f64,
    /// `|u(0)|` at the coarse time.
    pub amp_at_0_tilde: f64,
    /// Max of `|u|` over `{x : d(x, (1/q)Z) > 2 eta / q}` at the fine time.
    pub zero_region_max_tpq: f64,
    /// `1/q`-periodicity defect of `|u|` at the fine time, relative to peak.
    pub period_check: f64,
    /// `sup|u_nl - u_lin| sqrt(t) / ||alpha||^3_{l^{2,s}}`; zero in a
    /// purely linear run.
    pub remainder_estimate: f64,
}

/// One row of the measured profile at a given time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub x: f64,
    pub closed: f64,
    pub oracle: f64,
}

/// Linear experiment outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RogueLinear {
    pub report: RogueReport,
    /// Worst closed-form vs direct-sum modulus mismatch, relative to peak.
    pub oracle_mismatch_rel: f64,
    pub profile_tpq: Vec<ProfilePoint>,
    pub profile_tilde: Vec<ProfilePoint>,
}

/// Fourier coefficients `alpha_k` of `f(xi) = p^beta psi(p xi / (2 pi eta))`
/// for an arbitrary concentration scale `p`, supported in `|k| <= k_max`,
/// computed by an oversampled FFT (exact to aliasing level for this smooth
/// compactly supported profile). Errors when the dropped tail exceeds
/// `1e-12` of the coefficient peak, suggesting an adequate cut.
pub fn bump_spectrum(
    eta: f64,
    p: u64,
    beta: f64,
    bump: &BumpSpec,
    k_max: u64,
) -> Result<PeriodicSpectrum> {
    if !(eta > 0.0 && eta < 0.25) {
        return Err(Error::invalid("eta must lie in (0, 1/4)"));
    }
    if p == 0 || k_max == 0 {
        return Err(Error::invalid("p and k_max must be positive"));
    }
    let k_max = k_max as usize;
    let n = (8 * k_max).next_power_of_two().max(1 << 14);
    let amp = (p as f64).powf(beta);
    let halfwidth = TAU * eta / p as f64;
    let mut buf = vec![C64::default(); n];
    for (j, v) in buf.iter_mut().enumerate() {
        let xi = -std::f64::consts::PI + TAU * j as f64 / n as f64;
        *v = C64::new(amp * bump.eval(xi / halfwidth), 0.0);
    }
    crate::util::fft_forward(&mut buf);
    // alpha_k = (-1)^k DFT_k / n for the grid starting at -pi
    let alpha = |k: i64| -> f64 {
        let idx = k.rem_euclid(n as i64) as usize;
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        // f is real and even, so the coefficients are real and even; the
        // imaginary parts are pure rounding and get dropped here
        sign * buf[idx].re / n as f64
    };
    let peak = (0..=k_max as i64)
        .map(|k| alpha(k).abs())
        .fold(0.0f64, f64::max);
    // dropped tail: everything the FFT resolves beyond the cut
    let mut tail_max = 0.0f64;
    let mut suggestion = k_max;
    for k in (k_max as i64 + 1)..(n as i64 / 2) {
        tail_max = tail_max.max(alpha(k).abs());
    }
    if tail_max > 1e-12 * peak {
        // walk outward until the remaining tail is small enough
        let mut running = 0.0f64;
        for k in (k_max as i64 + 1..n as i64 / 2).rev() {
            running = running.max(alpha(k).abs());
            if running > 1e-12 * peak {
                suggestion = k as usize;
                break;
            }
        }
        return Err(Error::invalid(format!(
            "coefficient tail beyond k_max = {k_max} reaches {:.2e} of the peak; \
             k_max of about {} would satisfy the 1e-12 tail bound",
            tail_max / peak,
            suggestion + suggestion / 50 + 8,
        )));
    }
    let pairs = (-(k_max as i64)..=k_max as i64).map(|k| {
        let v = 0.5 * (alpha(k) + alpha(-k));
        (k, C64::new(v, 0.0))
    });
    Ok(PeriodicSpectrum::from_pairs(pairs))
}

/// [`bump_spectrum`] for a validated experiment configuration.
pub fn build_bump_coefficients(cfg: &RogueConfig, k_max: u64) -> Result<PeriodicSpectrum> {
    cfg.validate()?;
    bump_spectrum(cfg.eta, cfg.p, cfg.beta, &cfg.bump, k_max)
}

/// Smallest coefficient cut meeting the 1e-12 tail rule for this profile
/// (scanned on a wide oversampled transform).
pub fn suggest_bump_cut(eta: f64, p: u64, beta: f64, bump: &BumpSpec) -> Result<u64> {
    if !(eta > 0.0 && eta < 0.25) || p == 0 {
        return Err(Error::invalid("need 0 < eta < 1/4 and p >= 1"));
    }
    let n: usize = 1 << 20;
    let amp = (p as f64).powf(beta);
    let halfwidth = TAU * eta / p as f64;
    let mut buf = vec![C64::default(); n];
    for (j, v) in buf.iter_mut().enumerate() {
        let xi = -std::f64::consts::PI + TAU * j as f64 / n as f64;
        *v = C64::new(amp * bump.eval(xi / halfwidth), 0.0);
    }
    crate::util::fft_forward(&mut buf);
    let mag = |k: usize| buf[k].re.abs() / n as f64;
    let peak = (0..n / 2).map(mag).fold(0.0f64, f64::max);
    let mut cut = n / 2 - 1;
    let mut running = 0.0f64;
    for k in (1..n / 2).rev() {
        running = running.max(mag(k));
        if running > 1e-12 * peak {
            cut = k;
            break;
        }
    }
    Ok((cut + cut / 50 + 8) as u64)
}

fn measurement_grid(cfg: &RogueConfig) -> Vec<f64> {
    let n = (32 * cfg.q_tilde as usize)
        .max(8 * cfg.q as usize)
        .max(512)
        .next_power_of_two();
    (0..n).map(|i| -0.5 + i as f64 / n as f64).collect()
}

fn lattice_distance(x: f64, q: u64) -> f64 {
    let xq = x * q as f64;
    (xq - xq.round()).abs() / q as f64
}

struct Measured {
    amp_at_0: f64,
    amp_max: f64,
    zero_region_max: f64,
    period_defect_rel: f64,
}

/// Amplitude measurements of a field given on the grid, plus its values on
/// the `1/q`-shifted grid for the periodicity defect.
fn measure(xs: &[f64], moduli: &[f64], shifted: &[f64], cfg: &RogueConfig) -> Measured {
    let mut amp_at_0 = 0.0;
    let mut amp_max = 0.0f64;
    let mut zero_max = 0.0f64;
    let mut defect = 0.0f64;
    let threshold = 2.0 * cfg.eta / cfg.q as f64;
    for (i, &x) in xs.iter().enumerate() {
        let m = moduli[i];
        amp_max = amp_max.max(m);
        if x == 0.0 {
            amp_at_0 = m;
        }
        if lattice_distance(x, cfg.q) > threshold {
            zero_max = zero_max.max(m);
        }
        defect = defect.max((shifted[i] - m).abs());
    }
    Measured {
        amp_at_0,
        amp_max,
        zero_region_max: zero_max,
        period_defect_rel: defect / amp_max.max(f64::MIN_POSITIVE),
    }
}

fn moduli_renormalized(values: &[C64], factor: f64) -> Vec<f64> {
    values.iter().map(|v| factor * v.norm()).collect()
}

/// Oracle moduli of the evolved spectrum, expressed in the revival-amplitude
/// convention (the one the closed form and the reported amplitudes use).
fn oracle_moduli(spec: &PeriodicSpectrum, t: &RationalTime, xs: &[f64]) -> Vec<f64> {
    moduli_renormalized(&evolve_direct_rational(spec, t, xs), revival_renorm(t))
}

/// Run the linear experiment: closed-form and direct-sum measurements at
/// both rational times.
pub fn run_linear(cfg: &RogueConfig, spectrum: &PeriodicSpectrum) -> Result<RogueLinear> {
    cfg.validate()?;
    let t_fine = cfg.time_fine();
    let t_coarse = cfg.time_coarse();
    let xs = measurement_grid(cfg);

    let closed_fine = talbot_closed_form_grid(spectrum, &t_fine, &xs)?;
    let oracle_fine = oracle_moduli(spectrum, &t_fine, &xs);
    let shift = 1.0 / cfg.q as f64;
    let xs_shifted: Vec<f64> = xs.iter().map(|&x| x + shift).collect();
    let oracle_fine_shifted = oracle_moduli(spectrum, &t_fine, &xs_shifted);

    let m_fine = measure(&xs, &oracle_fine, &oracle_fine_shifted, cfg);
    let peak = m_fine.amp_max.max(f64::MIN_POSITIVE);
    let oracle_mismatch_rel = closed_fine
        .iter()
        .zip(&oracle_fine)
        .map(|(c, o)| (c - o).abs())
        .fold(0.0f64, f64::max)
        / peak;

    // coarse time: |u(0)| and the profile over one coarse cell
    let closed_coarse_at_0 = talbot_closed_form_grid(spectrum, &t_coarse, &[0.0])?[0];
    let half_cell = 0.5 / cfg.q_tilde as f64;
    let n_prof = 257;
    let xs_coarse: Vec<f64> = (0..n_prof)
        .map(|i| -half_cell + 2.0 * half_cell * i as f64 / (n_prof - 1) as f64)
        .collect();
    let closed_coarse = talbot_closed_form_grid(spectrum, &t_coarse, &xs_coarse)?;
    let oracle_coarse = oracle_moduli(spectrum, &t_coarse, &xs_coarse);

    let profile_tpq: Vec<ProfilePoint> = xs
        .iter()
        .zip(closed_fine.iter().zip(&oracle_fine))
        .map(|(&x, (&c, &o))| ProfilePoint { x, closed: c, oracle: o })
        .collect();
    let profile_tilde: Vec<ProfilePoint> = xs_coarse
        .iter()
        .zip(closed_coarse.iter().zip(&oracle_coarse))
        .map(|(&x, (&c, &o))| ProfilePoint { x, closed: c, oracle: o })
        .collect();

    Ok(RogueLinear {
        report: RogueReport {
            amp_at_0_tpq: m_fine.amp_at_0,
            amp_max_tpq: m_fine.amp_max,
            amp_at_0_tilde: closed_coarse_at_0,
            zero_region_max_tpq: m_fine.zero_region_max,
            period_check: m_fine.period_defect_rel,
            remainder_estimate: 0.0,
        },
        oracle_mismatch_rel,
        profile_tpq,
        profile_tilde,
    })
}

/// Options of the nonlinear run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RogueNonlinearOpts {
    /// Slow time where the remainders are zeroed.
    pub tau_start: f64,
    /// Half-width of the coefficient window carried by the dynamics; modes
    /// outside evolve by the explicit logarithmic phase alone.
    pub ode_window: i64,
}

impl Default for RogueNonlinearOpts {
    fn default() -> Self {
        Self {
            tau_start: 1000.0 * TAU,
            ode_window: 192,
        }
    }
}

/// Nonlinear experiment outcome: linear and dressed measurements side by
/// side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RogueNonlinear {
    pub linear: RogueReport,
    pub nonlinear: RogueReport,
    /// `sup_x |u_nl - u_lin|` on the measurement grid at the fine time.
    pub sup_diff_abs: f64,
    /// The same relative to the linear peak.
    pub sup_diff_rel: f64,
    /// `|u_nl(0)|` at the coarse time (dressed).
    pub amp_at_0_tilde_nl: f64,
    /// Fraction of the spectrum's l1 mass inside the dynamic window.
    pub l1_window_coverage: f64,
    pub tau_start: f64,
    pub ode_window: i64,
    /// Raised when the data leave the perturbative smallness regime.
    pub smallness_warning: bool,
    #[serde(skip)]
    pub stats: IntegrationStats,
}

/// Dress the spectrum with the integrated coefficients: window modes take
/// their dynamic values `A_k(t)`, outer modes the explicit log-phase
/// accumulated from `t_start`.
fn dressed_spectrum(
    spectrum: &PeriodicSpectrum,
    window: &LineData,
    dynamic: &LineData,
    m0: f64,
    log_t_ratio: f64,
) -> PeriodicSpectrum {
    PeriodicSpectrum::from_pairs(spectrum.coeffs().iter().map(|(&k, &alpha)| {
        if window.coeffs.contains_key(&k) {
            (k, dynamic.coeffs.get(&k).copied().unwrap_or_default())
        } else {
            let phase = (alpha.norm_sqr() - 2.0 * m0) * log_t_ratio;
            (k, alpha * cis(phase))
        }
    }))
}

/// Measure a spectrum's evolved field from the direct sum alone (no support
/// condition needed).
fn measure_oracle(cfg: &RogueConfig, spec: &PeriodicSpectrum, remainder: f64) -> RogueReport {
    let t_fine = cfg.time_fine();
    let t_coarse = cfg.time_coarse();
    let xs = measurement_grid(cfg);
    let fine = oracle_moduli(spec, &t_fine, &xs);
    let shift = 1.0 / cfg.q as f64;
    let xs_shifted: Vec<f64> = xs.iter().map(|&x| x + shift).collect();
    let fine_shifted = oracle_moduli(spec, &t_fine, &xs_shifted);
    let m = measure(&xs, &fine, &fine_shifted, cfg);
    let at0_coarse = oracle_moduli(spec, &t_coarse, &[0.0])[0];
    RogueReport {
        amp_at_0_tpq: m.amp_at_0,
        amp_max_tpq: m.amp_max,
        amp_at_0_tilde: at0_coarse,
        zero_region_max_tpq: m.zero_region_max,
        period_check: m.period_defect_rel,
        remainder_estimate: remainder,
    }
}

/// Integrate the coefficient flow from `tau_start` down through both
/// measurement times and compare the dressed field with the linear one.
/// All amplitudes are reported in the revival convention so linear and
/// nonlinear columns are directly comparable.
pub fn run_nonlinear(
    cfg: &RogueConfig,
    spectrum: &PeriodicSpectrum,
    tol: f64,
    opts: &RogueNonlinearOpts,
) -> Result<RogueNonlinear> {
    cfg.validate()?;
    let t_fine = cfg.time_fine();
    let t_coarse = cfg.time_coarse();
    let tau_fine = 1.0 / t_fine.value();
    let tau_coarse = 1.0 / t_coarse.value();
    if opts.tau_start <= tau_fine.max(tau_coarse) {
        return Err(Error::invalid(
            "tau_start must exceed the measurement slow times",
        ));
    }

    let linear = measure_oracle(cfg, spectrum, 0.0);
    let smallness_warning = spectrum.l1_norm() > 0.3;

    // window data for the dynamics
    let window = LineData::from_pairs(
        spectrum
            .coeffs()
            .iter()
            .filter(|(&k, _)| k.abs() <= opts.ode_window)
            .map(|(&k, &c)| (k, c)),
    );
    let l1_window_coverage = window.l1_norm() / spectrum.l1_norm().max(f64::MIN_POSITIVE);
    let m0 = window.l2_norm_sq();
    let t_start = 1.0 / opts.tau_start;

    // "remainders vanish at tau_start": the flow's variables are
    // interaction-picture coefficients, frozen under the free flow
    let state0 = interaction_from_data(&window, opts.tau_start, opts.ode_window)?;
    let int_opts = IntegrateOpts {
        tol,
        ..Default::default()
    };

    // descend from tau_start through the larger of the two measurement slow
    // times to the smaller (p~/q~ < 1 < ~ p/q puts the coarse time first)
    let run1 = integrate_opts(&state0, tau_coarse.max(tau_fine), int_opts)?;
    let mut stats = run1.stats;
    let state_first = run1.state;
    let run2 = integrate_opts(&state_first, tau_fine.min(tau_coarse), int_opts)?;
    stats.steps_accepted += run2.stats.steps_accepted;
    stats.steps_rejected += run2.stats.steps_rejected;
    stats.rhs_evals += run2.stats.rhs_evals;
    stats.cl1_drift_rel += run2.stats.cl1_drift_rel;
    let state_second = run2.state;
    let (state_coarse, state_fine) = if tau_coarse >= tau_fine {
        (state_first, state_second)
    } else {
        (state_second, state_first)
    };

    let xs = measurement_grid(cfg);
    let dress = |state: &crate::coeffs::CoefficientState, t: f64| -> Result<PeriodicSpectrum> {
        let dynamic = a_from_b(state)?;
        Ok(dressed_spectrum(
            spectrum,
            &window,
            &dynamic,
            m0,
            (t / t_start).ln(),
        ))
    };

    let factor_fine = revival_renorm(&t_fine);
    let dressed_fine = dress(&state_fine, t_fine.value())?;
    let u_nl_fine = evolve_direct_rational(&dressed_fine, &t_fine, &xs);
    let u_lin_fine = evolve_direct_rational(spectrum, &t_fine, &xs);
    let sup_diff_abs = u_nl_fine
        .iter()
        .zip(&u_lin_fine)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max)
        * factor_fine;
    let lin_peak = linear.amp_max_tpq.max(f64::MIN_POSITIVE);

    let l2s = spectrum.l2s_norm(cfg.s).max(f64::MIN_POSITIVE);
    let remainder_estimate = sup_diff_abs * t_fine.value().sqrt() / l2s.powi(3);

    let dressed_coarse = dress(&state_coarse, t_coarse.value())?;
    let mut nonlinear = measure_oracle(cfg, &dressed_fine, remainder_estimate);
    nonlinear.amp_at_0_tilde = oracle_moduli(&dressed_coarse, &t_coarse, &[0.0])[0];
    let amp_at_0_tilde_nl = nonlinear.amp_at_0_tilde;

    Ok(RogueNonlinear {
        linear,
        nonlinear,
        sup_diff_abs,
        sup_diff_rel: sup_diff_abs / lin_peak,
        amp_at_0_tilde_nl,
        l1_window_coverage,
        tau_start: opts.tau_start,
        ode_window: opts.ode_window,
        smallness_warning,
        stats,
    })
}
