//! Adaptive integration of the coefficient system.
//!
//! The system is advanced in `sigma = log tau`, which removes the overall
//! `1/tau` factor from the right-hand side:
//! `dB/dsigma = -i [ cubic bracket at tau = e^sigma ]`. Steps are taken with
//! the Dormand–Prince 5(4) embedded pair; the fourth-order embedded solution
//! drives the local error control, and integration may run in either
//! direction in `tau`.

use crate::coeffs::{cl1, cl2, cl3, rhs_bracket, CoefficientState, Mode, RhsWorkspace};
use crate::error::{Error, Result};
use crate::C64;

/// Controls for [`integrate_opts`].
#[derive(Debug, Clone, Copy)]
pub struct IntegrateOpts {
    /// Target local error per step (weighted RMS against
    /// `atol + tol * |y|`).
    pub tol: f64,
    /// Hard cap on accepted + rejected steps.
    pub max_steps: u64,
    /// Initial step in `sigma`; chosen automatically when `None`.
    pub h_init: Option<f64>,
    /// Safety factor of the step controller.
    pub safety: f64,
}

impl Default for IntegrateOpts {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_steps: 20_000_000,
            h_init: None,
            safety: 0.9,
        }
    }
}

/// Integration bookkeeping, including the conservation drift of the run
/// (zero up to integrator error: the truncated flow conserves these sums
/// exactly).
#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrationStats {
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub rhs_evals: u64,
    /// `|cl1(end) - cl1(start)| / max(cl1(start), tiny)`.
    pub cl1_drift_rel: f64,
    /// `|cl2(end) - cl2(start)|` for line states.
    pub cl2_drift_abs: Option<f64>,
    /// `|cl3(end) - cl3(start)| / max(cl3(start), tiny)` for periodic states.
    pub cl3_drift_rel: Option<f64>,
}

/// Result of an integration: the advanced state plus run statistics.
#[derive(Debug, Clone)]
pub struct Integration {
    pub state: CoefficientState,
    pub stats: IntegrationStats,
}

// Dormand–Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

struct Dp54<'a> {
    mode: Mode,
    ws: &'a mut RhsWorkspace,
    evals: u64,
}

impl Dp54<'_> {
    /// dB/dsigma at `sigma`: `-i * bracket(tau = e^sigma, y)`.
    fn eval(&mut self, sigma: f64, y: &[C64], out: &mut [C64]) {
        rhs_bracket(self.mode, sigma.exp(), y, self.ws, out);
        for v in out.iter_mut() {
            *v = C64::new(v.im, -v.re); // multiply by -i
        }
        self.evals += 1;
    }
}

fn axpy(dst: &mut [C64], base: &[C64], h: f64, coeffs: &[f64], stages: &[Vec<C64>]) {
    for (i, d) in dst.iter_mut().enumerate() {
        let mut acc = base[i];
        for (c, k) in coeffs.iter().zip(stages) {
            if *c != 0.0 {
                acc += h * *c * k[i];
            }
        }
        *d = acc;
    }
}

/// Advance a state to `tau_end` with the given local tolerance.
pub fn integrate(state: &CoefficientState, tau_end: f64, tol: f64) -> Result<Integration> {
    integrate_opts(
        state,
        tau_end,
        IntegrateOpts {
            tol,
            ..Default::default()
        },
    )
}

/// Advance a state to `tau_end`, forward or backward in `tau`.
pub fn integrate_opts(
    state: &CoefficientState,
    tau_end: f64,
    opts: IntegrateOpts,
) -> Result<Integration> {
    if !(tau_end > 0.0) || !tau_end.is_finite() {
        return Err(Error::invalid(format!(
            "integration target tau must be positive, got {tau_end}"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }

    let cl1_start = cl1(state);
    let cl2_start = cl2(state).ok();
    let cl3_start = cl3(state).ok();

    let mut stats = IntegrationStats::default();
    let finish = |end: CoefficientState, mut stats: IntegrationStats| {
        stats.cl1_drift_rel = (cl1(&end) - cl1_start).abs() / cl1_start.max(f64::MIN_POSITIVE);
        stats.cl2_drift_abs = cl2_start.map(|c0| (cl2(&end).unwrap() - c0).abs());
        stats.cl3_drift_rel =
            cl3_start.map(|c0| (cl3(&end).unwrap() - c0).abs() / c0.max(f64::MIN_POSITIVE));
        Integration { state: end, stats }
    };

    let sigma0 = state.tau().ln();
    let sigma1 = tau_end.ln();
    if sigma0 == sigma1 || state.is_empty() {
        let end = CoefficientState::from_raw(tau_end, state.mode(), state.as_slice().to_vec());
        return Ok(finish(end, stats));
    }
    let dir = (sigma1 - sigma0).signum();
    let span = (sigma1 - sigma0).abs();

    let n = state.len();
    let mut ws = RhsWorkspace::new();
    let mut sys = Dp54 {
        mode: state.mode(),
        ws: &mut ws,
        evals: 0,
    };

    let mut y: Vec<C64> = state.as_slice().to_vec();
    let mut sigma = sigma0;
    let mut stages: Vec<Vec<C64>> = (0..7).map(|_| vec![C64::default(); n]).collect();
    let mut ytmp = vec![C64::default(); n];
    let mut y5 = vec![C64::default(); n];

    // error weights: atol floor anchored to the initial state scale
    let scale0 = y.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1e-300);
    let atol = opts.tol * 1e-3 * scale0;
    let rtol = opts.tol;

    sys.eval(sigma, &y, &mut stages[0]);

    // starting step from the weighted derivative scale; the controller
    // refines it within a few steps either way
    let mut h = opts.h_init.map(|h| h.abs() * dir).unwrap_or_else(|| {
        let d0 = (stages[0]
            .iter()
            .zip(&y)
            .map(|(f, yy)| {
                let r = f.norm() / (atol + rtol * yy.norm());
                r * r
            })
            .sum::<f64>()
            / n as f64)
            .sqrt();
        let h0 = if d0 > 0.0 { 0.01 / d0 } else { span * 1e-3 };
        h0.min(span).max(span * 1e-6) * dir
    });

    let make_state = |sigma: f64, y: &[C64], mode: Mode| {
        CoefficientState::from_raw(sigma.exp(), mode, y.to_vec())
    };

    loop {
        if stats.steps_accepted + stats.steps_rejected >= opts.max_steps {
            return Err(Error::StepBudget {
                tau: sigma.exp(),
                budget: opts.max_steps,
                last_state: Box::new(make_state(sigma, &y, state.mode())),
            });
        }
        // clamp the final step onto the target
        let remaining = sigma1 - sigma;
        if remaining * dir <= 0.0 {
            break;
        }
        if (h * dir) > remaining * dir {
            h = remaining;
        }
        // a step that no longer moves sigma in floating point cannot make
        // progress at any tolerance
        if sigma + h == sigma {
            return Err(Error::StepUnderflow {
                tau: sigma.exp(),
                last_state: Box::new(make_state(sigma, &y, state.mode())),
            });
        }

        // stages 2..6 (k1 is in stages[0], FSAL)
        axpy(&mut ytmp, &y, h, &A2, &stages[..1]);
        let (head, tail) = stages.split_at_mut(1);
        let _ = head;
        sys.eval(sigma + C[1] * h, &ytmp, &mut tail[0]);

        axpy(&mut ytmp, &y, h, &A3, &stages[..2]);
        let (head, tail) = stages.split_at_mut(2);
        let _ = head;
        sys.eval(sigma + C[2] * h, &ytmp, &mut tail[0]);

        axpy(&mut ytmp, &y, h, &A4, &stages[..3]);
        let (head, tail) = stages.split_at_mut(3);
        let _ = head;
        sys.eval(sigma + C[3] * h, &ytmp, &mut tail[0]);

        axpy(&mut ytmp, &y, h, &A5, &stages[..4]);
        let (head, tail) = stages.split_at_mut(4);
        let _ = head;
        sys.eval(sigma + C[4] * h, &ytmp, &mut tail[0]);

        axpy(&mut ytmp, &y, h, &A6, &stages[..5]);
        let (head, tail) = stages.split_at_mut(5);
        let _ = head;
        sys.eval(sigma + C[5] * h, &ytmp, &mut tail[0]);

        // 5th-order solution, then k7 = f(sigma + h, y5) (FSAL slot)
        axpy(&mut y5, &y, h, &B5, &stages[..6]);
        let (head, tail) = stages.split_at_mut(6);
        let _ = head;
        sys.eval(sigma + h, &y5, &mut tail[0]);

        // weighted RMS of y5 - y4
        let mut err_sq = 0.0;
        for i in 0..n {
            let mut e = C64::default();
            for (bi, (b5, b4)) in B5.iter().zip(&B4).enumerate() {
                let diff = b5 - b4;
                if diff != 0.0 {
                    e += h * diff * stages[bi][i];
                }
            }
            let w = atol + rtol * y[i].norm().max(y5[i].norm());
            let r = e.norm() / w;
            err_sq += r * r;
        }
        let err = (err_sq / n as f64).sqrt();

        if err <= 1.0 {
            sigma += h;
            std::mem::swap(&mut y, &mut y5);
            stages.swap(0, 6); // FSAL
            stats.steps_accepted += 1;
            let fac = (opts.safety * err.powf(-0.2)).clamp(0.2, 5.0);
            h *= fac;
        } else {
            stats.steps_rejected += 1;
            let fac = (opts.safety * err.powf(-0.2)).clamp(0.1, 1.0);
            h *= fac;
        }
    }

    stats.rhs_evals = sys.evals;
    // land exactly on the requested tau rather than exp(ln(tau))
    let end = CoefficientState::from_raw(tau_end, state.mode(), y);
    Ok(finish(end, stats))
}
