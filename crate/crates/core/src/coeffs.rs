//! Slow-time dynamics of the Fourier coefficients `B_j(tau)`.
//!
//! The state evolves by
//!
//! ```text
//! i dB_k/dtau = (1/tau) [ sum_{NR_k} e^{-i tau w} B_{j1} conj(B_{j2}) B_{j3}
//!                         + (2 m0 - |B_k|^2) B_k ]
//! ```
//!
//! where the non-resonant set `NR_k` consists of `(j1, j2, j3)` with
//! `k - j1 + j2 - j3 = 0` and `w = k^2 - j1^2 + j2^2 - j3^2 = 2(k-j1)(j1-j2)`
//! nonzero, and `m0 = sum_j |B_j|^2`. The resonant part of the cubic sum is
//! exactly `(2 m0 - |B_k|^2) B_k`, which is why it appears folded out.
//!
//! Triads are parametrised by the offsets `a = k - j1`, `d = j1 - j2`
//! (then `j2 = k - a - d`, `j3 = k - d`, `w = 2 a d`): the index windows
//! below are windows in `(a, d)`, which makes the truncation translation
//! covariant. With this closure the truncated flow conserves
//! `sum c(j) |B_j|^2` exactly for `c(j) = 1` and `c(j) = j`, and in periodic
//! mode the per-period mass, so observed drift measures integrator error
//! alone.
//!
//! In line mode indices run over `|j| <= N`; a triad is kept only when all
//! four of its indices lie in the window. In periodic mode the state stores
//! one period `B_0..B_{M-1}` (`B_{j+M} = B_j`) and the offsets run over a
//! sign-symmetric window of length `M`; for even `M` the two half-weighted
//! edge offsets `+-M/2` address the same residue, keeping the offset window
//! symmetric (an asymmetric window would let the constant state's modulus
//! drift, which the explicit solution forbids).

use crate::error::{Error, Result};
use crate::util::{cis, fft_forward, Compensated, CompensatedC64};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

/// Index layout of a coefficient state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Truncation to `|j| <= n_max`.
    Line { n_max: i64 },
    /// `B_{j+period} = B_j`, storing indices `0..period`.
    Periodic { period: usize },
}

impl Mode {
    pub fn len(&self) -> usize {
        match *self {
            Mode::Line { n_max } => (2 * n_max + 1) as usize,
            Mode::Periodic { period } => period,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn j_at(&self, idx: usize) -> i64 {
        match *self {
            Mode::Line { n_max } => idx as i64 - n_max,
            Mode::Periodic { .. } => idx as i64,
        }
    }

    fn index_of(&self, j: i64) -> Option<usize> {
        match *self {
            Mode::Line { n_max } => {
                if j.abs() <= n_max {
                    Some((j + n_max) as usize)
                } else {
                    None
                }
            }
            Mode::Periodic { period } => Some(j.rem_euclid(period as i64) as usize),
        }
    }
}

/// Truncated coefficient vector at slow time `tau = 1/t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientState {
    tau: f64,
    mode: Mode,
    data: Vec<C64>,
}

/// Serialized form: sparse map `j -> [re, im]` plus `tau` and the mode.
#[derive(Serialize, Deserialize)]
struct StateRepr {
    tau: f64,
    mode: Mode,
    coeffs: BTreeMap<i64, [f64; 2]>,
}

impl Serialize for CoefficientState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateRepr {
            tau: self.tau,
            mode: self.mode,
            coeffs: self
                .iter()
                .filter(|(_, c)| c.norm_sqr() != 0.0)
                .map(|(j, c)| (j, [c.re, c.im]))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefficientState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = StateRepr::deserialize(d)?;
        let coeffs: BTreeMap<i64, C64> = repr
            .coeffs
            .into_iter()
            .map(|(j, [re, im])| (j, C64::new(re, im)))
            .collect();
        CoefficientState::new(repr.tau, repr.mode, &coeffs).map_err(serde::de::Error::custom)
    }
}

impl CoefficientState {
    pub fn new(tau: f64, mode: Mode, coeffs: &BTreeMap<i64, C64>) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::invalid(format!("tau must be positive, got {tau}")));
        }
        match mode {
            Mode::Line { n_max } if n_max < 0 => {
                return Err(Error::invalid("line window n_max must be >= 0"))
            }
            Mode::Periodic { period: 0 } => {
                return Err(Error::invalid("periodic mode needs period >= 1"))
            }
            _ => {}
        }
        let mut data = vec![C64::default(); mode.len()];
        for (&j, &c) in coeffs {
            match mode {
                Mode::Line { .. } => {
                    let idx = mode.index_of(j).ok_or_else(|| {
                        Error::invalid(format!("coefficient index {j} outside the line window"))
                    })?;
                    data[idx] = c;
                }
                Mode::Periodic { period } => {
                    if j < 0 || j >= period as i64 {
                        return Err(Error::invalid(format!(
                            "periodic mode stores indices 0..{period}, got {j}"
                        )));
                    }
                    data[j as usize] = c;
                }
            }
        }
        Ok(Self { tau, mode, data })
    }

    pub fn line(tau: f64, n_max: i64, coeffs: &BTreeMap<i64, C64>) -> Result<Self> {
        Self::new(tau, Mode::Line { n_max }, coeffs)
    }

    pub fn periodic(tau: f64, period: usize, coeffs: &BTreeMap<i64, C64>) -> Result<Self> {
        Self::new(tau, Mode::Periodic { period }, coeffs)
    }

    /// Periodic state with every `B_j` equal to `value`.
    pub fn constant_periodic(tau: f64, period: usize, value: C64) -> Result<Self> {
        let coeffs: BTreeMap<i64, C64> = (0..period as i64).map(|j| (j, value)).collect();
        Self::periodic(tau, period, &coeffs)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Coefficient `B_j`; wraps in periodic mode, zero outside a line window.
    pub fn get(&self, j: i64) -> C64 {
        self.mode
            .index_of(j)
            .map(|i| self.data[i])
            .unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.mode.j_at(i), c))
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn from_raw(tau: f64, mode: Mode, data: Vec<C64>) -> Self {
        debug_assert_eq!(mode.len(), data.len());
        Self { tau, mode, data }
    }

    /// Per-period (periodic) or total (line) mass `m0 = sum |B_j|^2`.
    pub fn m0(&self) -> f64 {
        let mut acc = Compensated::default();
        for c in &self.data {
            acc.add(c.norm_sqr());
        }
        acc.value()
    }
}

/// Line-mode coefficient data `a_j` (or `A_j(t)` when tagged by time).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LineData {
    pub coeffs: BTreeMap<i64, C64>,
}

impl LineData {
    pub fn new(coeffs: BTreeMap<i64, C64>) -> Self {
        Self { coeffs }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, C64)>) -> Self {
        Self {
            coeffs: pairs.into_iter().collect(),
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    /// `(sum |j|^{2s} |a_j|^2)^{1/2}`.
    pub fn l2s_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&j, c)| (j as f64).abs().powf(2.0 * s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_index(&self) -> i64 {
        self.coeffs.keys().map(|j| j.abs()).max().unwrap_or(0)
    }
}

/// `w = k^2 - j1^2 + j2^2 - j3^2 = 2 (k - j1)(j1 - j2)` with
/// `j3 = k - j1 + j2`; zero exactly on the resonant set.
pub fn resonance_weight(k: i64, j1: i64, j2: i64) -> i64 {
    2 * (k - j1) * (j1 - j2)
}

/// Sign-symmetric offset window for one period of length `m`.
/// Returns `(offset, weight)`; weights are 1 except for even `m`, where the
/// two edge offsets `+-m/2` (the same residue) carry weight 1/2 each.
fn periodic_offsets(m: usize) -> Vec<(i64, f64)> {
    let m = m as i64;
    if m % 2 == 1 {
        let h = (m - 1) / 2;
        (-h..=h).map(|a| (a, 1.0)).collect()
    } else {
        let h = m / 2;
        (-h..=h)
            .map(|a| (a, if a.abs() == h { 0.5 } else { 1.0 }))
            .collect()
    }
}

/// Oscillatory factors `e^{-i tau w}` for `w = 2 m`, indexed by
/// `m = a d` in `[-m_max, m_max]`.
pub(crate) struct PhaseTable {
    m_max: i64,
    vals: Vec<C64>,
}

impl PhaseTable {
    fn build(tau: f64, m_max: i64, buf: Vec<C64>) -> Self {
        let len = (2 * m_max + 1) as usize;
        let mut vals = buf;
        vals.clear();
        vals.reserve(len);
        for m in -m_max..=m_max {
            let w = 2 * m;
            vals.push(cis(-(tau * w as f64)));
        }
        Self { m_max, vals }
    }

    #[inline]
    fn get(&self, m: i64) -> C64 {
        self.vals[(m + self.m_max) as usize]
    }
}

fn line_m_max(n_max: i64) -> i64 {
    n_max * n_max
}

fn periodic_m_max(period: usize) -> i64 {
    let h = (period as i64) / 2;
    h * h
}

/// Workspace so the integrator can evaluate the right-hand side without
/// allocating.
pub(crate) struct RhsWorkspace {
    phase_buf: Vec<C64>,
}

impl RhsWorkspace {
    pub(crate) fn new() -> Self {
        Self { phase_buf: vec![] }
    }
}

/// Cubic bracket `sum_{NR_k} e^{-i tau w} B B~ B + (2 m0 - |B_k|^2) B_k`
/// for every stored index; the time derivative is `-i/tau` times this.
pub(crate) fn rhs_bracket(
    mode: Mode,
    tau: f64,
    data: &[C64],
    ws: &mut RhsWorkspace,
    out: &mut [C64],
) {
    debug_assert_eq!(data.len(), out.len());
    let mut m0 = Compensated::default();
    for c in data {
        m0.add(c.norm_sqr());
    }
    let m0 = m0.value();

    match mode {
        Mode::Line { n_max } => {
            let table = PhaseTable::build(tau, line_m_max(n_max), std::mem::take(&mut ws.phase_buf));
            let n = n_max;
            let len = data.len() as i64;
            for k_idx in 0..len {
                let k = k_idx - n;
                let bk = data[k_idx as usize];
                let mut acc = CompensatedC64::default();
                acc.add((2.0 * m0 - bk.norm_sqr()) * bk);
                for a in (k - n)..=(k + n) {
                    if a == 0 {
                        continue;
                    }
                    let j1 = data[(k_idx - a) as usize];
                    if j1.norm_sqr() == 0.0 {
                        continue;
                    }
                    let d_lo = (k - a - n).max(k - n);
                    let d_hi = (k - a + n).min(k + n);
                    let mut inner = C64::default();
                    for d in d_lo..=d_hi {
                        if d == 0 {
                            continue;
                        }
                        let j2 = data[(k_idx - a - d) as usize];
                        let j3 = data[(k_idx - d) as usize];
                        let ph = table.get(a * d);
                        // ph * conj(j2) * j3
                        let pj = C64::new(
                            ph.re * j2.re + ph.im * j2.im,
                            ph.im * j2.re - ph.re * j2.im,
                        );
                        inner += pj * j3;
                    }
                    acc.add(j1 * inner);
                }
                out[k_idx as usize] = acc.value();
            }
            ws.phase_buf = table.vals;
        }
        Mode::Periodic { period } => {
            let table =
                PhaseTable::build(tau, periodic_m_max(period), std::mem::take(&mut ws.phase_buf));
            let offsets = periodic_offsets(period);
            let m = period as i64;
            for k in 0..m {
                let bk = data[k as usize];
                let mut acc = CompensatedC64::default();
                acc.add((2.0 * m0 - bk.norm_sqr()) * bk);
                for &(a, wa) in &offsets {
                    if a == 0 {
                        continue;
                    }
                    let j1 = data[(k - a).rem_euclid(m) as usize];
                    let mut inner = C64::default();
                    for &(d, wd) in &offsets {
                        if d == 0 {
                            continue;
                        }
                        let j2 = data[(k - a - d).rem_euclid(m) as usize];
                        let j3 = data[(k - d).rem_euclid(m) as usize];
                        inner += wd * table.get(a * d) * j2.conj() * j3;
                    }
                    acc.add(wa * j1 * inner);
                }
                out[k as usize] = acc.value();
            }
            ws.phase_buf = table.vals;
        }
    }
}

/// `dB_k/dtau` for every stored index, aligned with
/// [`CoefficientState::iter`].
pub fn rhs(state: &CoefficientState) -> Result<Vec<C64>> {
    if !(state.tau() > 0.0) {
        return Err(Error::invalid("rhs requires tau > 0"));
    }
    let mut out = vec![C64::default(); state.len()];
    let mut ws = RhsWorkspace::new();
    rhs_bracket(state.mode(), state.tau(), state.as_slice(), &mut ws, &mut out);
    let minus_i_over_tau = C64::new(0.0, -1.0 / state.tau());
    for v in &mut out {
        *v *= minus_i_over_tau;
    }
    Ok(out)
}

/// Same as [`rhs`] keyed by coefficient index.
pub fn rhs_map(state: &CoefficientState) -> Result<BTreeMap<i64, C64>> {
    let v = rhs(state)?;
    Ok(state.iter().map(|(j, _)| j).zip(v).collect())
}

/// `sum |B_j|^2` (total in line mode, per period in periodic mode).
pub fn cl1(state: &CoefficientState) -> f64 {
    state.m0()
}

/// `sum j |B_j|^2`; meaningful for line mode only (divergent over a
/// periodised lattice).
pub fn cl2(state: &CoefficientState) -> Result<f64> {
    match state.mode() {
        Mode::Line { .. } => {
            let mut acc = Compensated::default();
            for (j, c) in state.iter() {
                acc.add(j as f64 * c.norm_sqr());
            }
            Ok(acc.value())
        }
        Mode::Periodic { .. } => Err(Error::invalid(
            "cl2 is divergent in periodic mode; it is defined for line states",
        )),
    }
}

/// Per-period mass `sum_{j=0}^{M-1} |B_j|^2`; periodic mode only.
pub fn cl3(state: &CoefficientState) -> Result<f64> {
    match state.mode() {
        Mode::Periodic { .. } => Ok(state.m0()),
        Mode::Line { .. } => Err(Error::invalid("cl3 is the periodic per-period mass")),
    }
}

/// `sum j^2 |B_j|^2`; line mode only.
pub fn moment2(state: &CoefficientState) -> Result<f64> {
    match state.mode() {
        Mode::Line { .. } => {
            let mut acc = Compensated::default();
            for (j, c) in state.iter() {
                acc.add((j * j) as f64 * c.norm_sqr());
            }
            Ok(acc.value())
        }
        Mode::Periodic { .. } => Err(Error::invalid(
            "moment2 is divergent in periodic mode; it is defined for line states",
        )),
    }
}

/// Quartic fluctuation integral `Q = int_0^{2pi} (|V|^2 - m0)^2 dy`
/// evaluated spectrally on an oversampled grid (exact for the trig
/// polynomial degree at hand). `V` here carries the interaction phases,
/// `V(y) = sum_k B_k e^{i tau k^2} e^{iky}` up to conjugation, which is the
/// gauge in which the energy law closes.
fn quartic_fluctuation(state: &CoefficientState) -> Result<f64> {
    if matches!(state.mode(), Mode::Periodic { .. }) {
        return Err(Error::invalid(
            "energy functionals need compact coefficient support (line mode)",
        ));
    }
    let m0 = state.m0();
    let len = state.len();
    let grid = (8 * len.max(1)).next_power_of_two().max(64);
    // W(y_j) = sum_k C_k e^{i k y_j} = conj(DFT(conj(C)))_j
    let mut buf = vec![C64::default(); grid];
    let tau = state.tau();
    for (j, c) in state.iter() {
        let twisted = c * cis(tau * (j * j) as f64);
        let idx = j.rem_euclid(grid as i64) as usize;
        buf[idx] += twisted.conj();
    }
    fft_forward(&mut buf);
    let mut acc = Compensated::default();
    for v in &buf {
        let fluct = v.norm_sqr() - m0;
        acc.add(fluct * fluct);
    }
    Ok(acc.value() * TAU / grid as f64)
}

/// Energy `E = int |d_y V|^2 - (1/2tau) int (|V|^2 - m0)^2` over one period,
/// with the mean-mass gauge `m = m0` (so any constant-modulus profile has
/// zero fluctuation term). Satisfies `dE/dtau = energy_flux` exactly along
/// the truncated flow.
pub fn energy(state: &CoefficientState) -> Result<f64> {
    let q = quartic_fluctuation(state)?;
    let kinetic = TAU * moment2(state)?;
    Ok(kinetic - q / (2.0 * state.tau()))
}

/// `dE/dtau = (1/2 tau^2) int (|V|^2 - m0)^2 dy`.
pub fn energy_flux(state: &CoefficientState) -> Result<f64> {
    let q = quartic_fluctuation(state)?;
    let tau = state.tau();
    Ok(q / (2.0 * tau * tau))
}

/// Conserved quantities and energy of a state, with fields inapplicable to
/// the state's mode left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservedReport {
    pub tau: f64,
    pub cl1: f64,
    pub cl2: Option<f64>,
    pub cl3: Option<f64>,
    pub moment2: Option<f64>,
    pub energy: Option<f64>,
    pub m0: f64,
}

pub fn conserved_report(state: &CoefficientState) -> ConservedReport {
    let line = matches!(state.mode(), Mode::Line { .. });
    ConservedReport {
        tau: state.tau(),
        cl1: cl1(state),
        cl2: line.then(|| cl2(state).unwrap()),
        cl3: (!line).then(|| cl3(state).unwrap()),
        moment2: line.then(|| moment2(state).unwrap()),
        energy: line.then(|| energy(state).unwrap()),
        m0: state.m0(),
    }
}

/// `B_j(tau) = conj(A_j(1/tau)) e^{-i tau j^2 / 4}` with `tau = 1/t`,
/// windowed to the data's support.
pub fn b_from_a(a: &LineData, t: f64) -> Result<CoefficientState> {
    b_from_a_with_window(a, t, a.max_index())
}

/// Same with an explicit (usually larger) window, so initially silent modes
/// stay available for excitation.
pub fn b_from_a_with_window(a: &LineData, t: f64, n_max: i64) -> Result<CoefficientState> {
    if !(t > 0.0) {
        return Err(Error::invalid("b_from_a requires t > 0"));
    }
    let tau = 1.0 / t;
    let coeffs: BTreeMap<i64, C64> = a
        .coeffs
        .iter()
        .map(|(&j, &aj)| (j, aj.conj() * cis(-tau * (j * j) as f64 / 4.0)))
        .collect();
    CoefficientState::line(tau, n_max, &coeffs)
}

/// Initial state of the flow for given ansatz data: `B_j = conj(a_j)`.
///
/// The evolution equation here carries its oscillatory phases explicitly in
/// the right-hand side, so its variables are interaction-picture
/// coefficients: under the free flow they are constant, and imposing
/// "remainders vanish at `tau_start`" means exactly `B_j(tau_start) =
/// conj(a_j)`. (Initialising with the quadratic reconstruction phases of
/// [`b_from_a`] instead would attribute a spurious `j^2` rotation between
/// `tau_start` and the measurement time to the linear flow.)
pub fn interaction_from_data(a: &LineData, tau: f64, n_max: i64) -> Result<CoefficientState> {
    if !(tau > 0.0) {
        return Err(Error::invalid("interaction state requires tau > 0"));
    }
    let coeffs: BTreeMap<i64, C64> = a.coeffs.iter().map(|(&j, &aj)| (j, aj.conj())).collect();
    CoefficientState::line(tau, n_max, &coeffs)
}

/// Ansatz coefficients `A_j(t) = conj(B_j)` of an interaction-picture state;
/// feeding them through [`b_from_a`] at `t = 1/tau` produces the state whose
/// field reconstruction matches `sum_j A_j (it)^{-1/2} e^{i(x-j)^2/4t}`.
pub fn data_from_interaction(state: &CoefficientState) -> Result<LineData> {
    match state.mode() {
        Mode::Line { .. } => Ok(LineData::from_pairs(
            state.iter().map(|(j, b)| (j, b.conj())),
        )),
        Mode::Periodic { .. } => Err(Error::invalid(
            "interaction readout needs a line state",
        )),
    }
}

/// Inverse of [`b_from_a`]: the coefficients `A_j(t)` at `t = 1/tau`.
pub fn a_from_b(state: &CoefficientState) -> Result<LineData> {
    match state.mode() {
        Mode::Line { .. } => Ok(LineData::from_pairs(state.iter().map(|(j, b)| {
            (
                j,
                (b * cis(state.tau() * (j * j) as f64 / 4.0)).conj(),
            )
        }))),
        Mode::Periodic { .. } => Err(Error::invalid(
            "a_from_b needs a line state; periodic states have no summable A picture",
        )),
    }
}

/// Logarithmic phase convention used when assembling the ansatz from data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// `Phi_j = (|a_j|^2 / 8 pi) log t`.
    PerMode,
    /// `Phi_j = (|a_j|^2 - 2 sum_l |a_l|^2) log t`.
    MassShifted,
}

/// The phased coefficients `a_j e^{i Phi_j(t)}` for the selected convention.
pub fn log_phase_coefficients(
    a: &LineData,
    t: f64,
    convention: PhaseConvention,
) -> Result<BTreeMap<i64, C64>> {
    if !(t > 0.0) {
        return Err(Error::invalid("log phases require t > 0"));
    }
    let log_t = t.ln();
    let total: f64 = a.l2_norm_sq();
    Ok(a.coeffs
        .iter()
        .map(|(&j, &aj)| {
            let phi = match convention {
                PhaseConvention::PerMode => aj.norm_sqr() / (8.0 * PI) * log_t,
                PhaseConvention::MassShifted => (aj.norm_sqr() - 2.0 * total) * log_t,
            };
            (j, aj * cis(phi))
        })
        .collect())
}

#[cfg(test)]
pub(crate) mod test_oracles {
    //! Independent brute-force evaluations used by several test suites.

    use super::*;

    /// Naive quadruple-loop right-hand side for line states: enumerate all
    /// `(k, j1, j2, j3)` in the window with `k - j1 + j2 - j3 = 0`, split by
    /// `w = 0` / `w != 0`, and fold the resonant part explicitly.
    pub fn brute_rhs_line(state: &CoefficientState) -> Vec<C64> {
        let n = match state.mode() {
            Mode::Line { n_max } => n_max,
            _ => panic!("line oracle"),
        };
        let tau = state.tau();
        let mut out = Vec::new();
        for k in -n..=n {
            let mut nonres = C64::default();
            let mut res = C64::default();
            for j1 in -n..=n {
                for j2 in -n..=n {
                    let j3 = k - j1 + j2;
                    if j3 < -n || j3 > n {
                        continue;
                    }
                    let w = k * k - j1 * j1 + j2 * j2 - j3 * j3;
                    let term = state.get(j1) * state.get(j2).conj() * state.get(j3);
                    if w == 0 {
                        res += term;
                    } else {
                        nonres += cis(-(tau * w as f64)) * term;
                    }
                }
            }
            // resonant part must equal (2 m0 - |B_k|^2) B_k; use it directly
            out.push(C64::new(0.0, -1.0 / tau) * (nonres + res));
        }
        out
    }
}
