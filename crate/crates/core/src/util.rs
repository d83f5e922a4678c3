//! Small numeric helpers shared across modules.

use crate::C64;
use rustfft::FftPlanner;
use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::{Arc, OnceLock};

/// Neumaier-compensated accumulator for f64.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedC64 {
    re: Compensated,
    im: Compensated,
}

impl CompensatedC64 {
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Wrap an angle to the half-open interval (-pi, pi].
pub fn principal_angle(theta: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut t = theta.rem_euclid(two_pi);
    if t > std::f64::consts::PI {
        t -= two_pi;
    }
    t
}

/// Forward complex FFT in place (engineering sign, no normalisation).
/// Plans are cached per size.
pub fn fft_forward(buf: &mut [C64]) {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<dyn rustfft::Fft<f64>>>>> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let fft = {
        let mut guard = plans.lock().unwrap();
        guard
            .entry(buf.len())
            .or_insert_with(|| FftPlanner::new().plan_fft_forward(buf.len()))
            .clone()
    };
    fft.process(buf);
}

/// Least-squares line fit `y = a + b x`, returning `(b, sigma_b)` where
/// `sigma_b` is the standard error of the slope estimated from residuals.
pub fn slope_with_sigma(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(xs.len() >= 3, "need at least 3 points for a slope error");
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let b = sxy / sxx;
    let a = ybar - b * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (a + b * x);
            r * r
        })
        .sum();
    let sigma2 = ss_res / (n - 2.0);
    (b, (sigma2 / sxx).sqrt())
}

/// Unwrap a sequence of phases (radians) so consecutive values never jump by
/// more than pi.
pub fn unwrap_phases(phases: &mut [f64]) {
    let two_pi = std::f64::consts::TAU;
    for i in 1..phases.len() {
        let mut d = phases[i] - phases[i - 1];
        while d > std::f64::consts::PI {
            phases[i] -= two_pi;
            d = phases[i] - phases[i - 1];
        }
        while d < -std::f64::consts::PI {
            phases[i] += two_pi;
            d = phases[i] - phases[i - 1];
        }
    }
}

/// `e^{i theta}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    let (s, c) = theta.sin_cos();
    C64::new(c, s)
}
