//! Ground-truth engines independent of the closed forms.
//!
//! 1. Fixed-step RK4 integration of the classical Heisenberg-Langevin
//!    equations (fluctuations dropped), projected onto e^{-i Omega t} to
//!    recover the steady-state amplitude that the closed forms predict.
//! 2. Dense exact diagonalization of the finite-N spin-boson Hamiltonian,
//!    to measure how well the large-N bosonization reproduces the
//!    low-excitation spectrum.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::modes;

/// Dense-solver budget on the exact Hilbert-space dimension.
pub const MAX_EXACT_DIM: usize = 200_000;

/// Divergence guard for the time-domain integration.
const DIVERGENCE_LIMIT: f64 = 1.0e12;

/// A fixed-step time series of the real phase-space vector
/// (Z0, P0, Z1, P1[, Z2, P2]).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    /// Smallest strictly positive damping rate of the integrated system
    /// (infinity when undamped); sets the steady-state settling window.
    pub gamma_min: f64,
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    /// Build a trajectory from raw samples (used by test fixtures).
    pub fn from_samples(dt: f64, gamma_min: f64, dim: usize, data: Vec<f64>) -> Self {
        assert!(dim > 0 && data.len() % dim == 0);
        Self { dt, gamma_min, dim, data }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Spin coordinate Z0 at sample i.
    pub fn z0(&self, i: usize) -> f64 {
        self.data[i * self.dim]
    }
}

/// Precomputed right-hand side of the Langevin system (omega_0 = 1):
///   Z0'' = -gamma0 Z0' - Z0 - sum_j sqrt(N) G_j Z_j - 2 sqrt(N) Gp cos(Omega t)
///   Zj'' = -gammaj Zj' - omegaj^2 Zj - omegaj sqrt(N) G_j Z0
struct Langevin {
    gamma0: f64,
    drive: f64,
    drive_omega: f64,
    res: Vec<(f64, f64, f64)>, // (omega, gamma, sqrt(N) G)
}

impl Langevin {
    fn new(sys: &SystemParams, drive_omega: f64) -> Self {
        let sqn = (sys.n_spins as f64).sqrt();
        Self {
            gamma0: sys.spin.gamma,
            drive: 2.0 * sqn * sys.drive_gp,
            drive_omega,
            res: sys
                .resonators
                .iter()
                .zip(&sys.couplings)
                .map(|(r, &g)| (r.omega, r.gamma, sqn * g))
                .collect(),
        }
    }

    fn dim(&self) -> usize {
        2 + 2 * self.res.len()
    }

    fn rhs(&self, t: f64, s: &[f64], out: &mut [f64]) {
        let mut force0 = -s[0] - self.drive * (self.drive_omega * t).cos();
        for (j, &(w, g, c)) in self.res.iter().enumerate() {
            let z = s[2 + 2 * j];
            let v = s[3 + 2 * j];
            force0 -= c * z;
            out[2 + 2 * j] = v;
            out[3 + 2 * j] = -w * w * z - c * w * s[0] - g * v;
        }
        out[0] = s[1];
        out[1] = force0 - self.gamma0 * s[1];
    }
}

fn rk4_step(sys: &Langevin, t: f64, state: &mut [f64], dt: f64, scratch: &mut [f64]) {
    let dim = state.len();
    let (k1, rest) = scratch.split_at_mut(dim);
    let (k2, rest) = rest.split_at_mut(dim);
    let (k3, rest) = rest.split_at_mut(dim);
    let (k4, tmp) = rest.split_at_mut(dim);
    sys.rhs(t, state, k1);
    for i in 0..dim {
        tmp[i] = state[i] + 0.5 * dt * k1[i];
    }
    sys.rhs(t + 0.5 * dt, tmp, k2);
    for i in 0..dim {
        tmp[i] = state[i] + 0.5 * dt * k2[i];
    }
    sys.rhs(t + 0.5 * dt, tmp, k3);
    for i in 0..dim {
        tmp[i] = state[i] + dt * k3[i];
    }
    sys.rhs(t + dt, tmp, k4);
    for i in 0..dim {
        state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

fn min_positive_gamma(sys: &SystemParams) -> f64 {
    sys.resonators
        .iter()
        .map(|r| r.gamma)
        .chain(std::iter::once(sys.spin.gamma))
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min)
}

fn check_dt(sys: &SystemParams, drive_omega: f64, dt: f64) -> Result<()> {
    let omega_max = modes::eigenfrequencies(sys)
        .frequencies
        .iter()
        .copied()
        .chain(std::iter::once(drive_omega.abs()))
        .fold(1.0_f64, f64::max);
    let dt_max = 2.0 * std::f64::consts::PI / (20.0 * omega_max);
    if !(dt > 0.0) || dt > dt_max {
        return Err(Error::Precondition(format!(
            "dt = {dt} exceeds 2 pi / (20 omega_max) = {dt_max}"
        )));
    }
    Ok(())
}

/// Integrate the Langevin equations from the given initial phase-space
/// state, storing every step.
pub fn integrate_langevin_from(
    sys: &SystemParams,
    drive_omega: f64,
    t_end: f64,
    dt: f64,
    initial: &[f64],
) -> Result<Trajectory> {
    check_dt(sys, drive_omega, dt)?;
    let gamma_min = min_positive_gamma(sys);
    if gamma_min.is_finite() && t_end < 10.0 / gamma_min {
        return Err(Error::Precondition(format!(
            "t_end = {t_end} is shorter than 10 / min gamma = {}",
            10.0 / gamma_min
        )));
    }
    let lang = Langevin::new(sys, drive_omega);
    let dim = lang.dim();
    if initial.len() != dim {
        return Err(Error::Precondition(format!(
            "initial state must have {dim} components"
        )));
    }
    let n_steps = (t_end / dt).ceil() as usize;
    let mut state = initial.to_vec();
    let mut scratch = vec![0.0; 5 * dim];
    let mut data = Vec::with_capacity((n_steps + 1) * dim);
    data.extend_from_slice(&state);
    for step in 0..n_steps {
        let t = step as f64 * dt;
        rk4_step(&lang, t, &mut state, dt, &mut scratch);
        if state.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::Diverged { t: t + dt });
        }
        data.extend_from_slice(&state);
    }
    Ok(Trajectory { dt, gamma_min, dim, data })
}

/// Integrate the driven system from rest.
pub fn integrate_langevin(
    sys: &SystemParams,
    drive_omega: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let dim = 2 + 2 * sys.resonators.len();
    integrate_langevin_from(sys, drive_omega, t_end, dt, &vec![0.0; dim])
}

/// Coefficient of e^{-i Omega t} in the late-time Z0(t): trapezoidal
/// projection (1/T) int Z0(t) e^{+i Omega t} dt over the final window.
///
/// The window spans the largest whole number of drive periods that still
/// starts after t = 8 / min gamma, and must hold at least 5 periods.
pub fn steady_state_amplitude(traj: &Trajectory, omega: f64) -> Result<Complex64> {
    if !(omega > 0.0) {
        return Err(Error::Precondition("projection requires omega > 0".into()));
    }
    let n = traj.len();
    if n < 2 {
        return Err(Error::Precondition("trajectory too short".into()));
    }
    let t_end = (n - 1) as f64 * traj.dt;
    let period = 2.0 * std::f64::consts::PI / omega;
    let settle = if traj.gamma_min.is_finite() { 8.0 / traj.gamma_min } else { 0.0 };
    let k = ((t_end - settle) / period).floor();
    if k < 5.0 {
        return Err(Error::Precondition(format!(
            "need >= 5 whole drive periods after t = {settle}; trajectory ends at {t_end}"
        )));
    }
    // A late, bounded window keeps residual transients out of the average.
    let k = k.min(200.0);
    // Align the window to the sample grid, as close to k periods as possible.
    let span_samples = ((k * period) / traj.dt).round() as usize;
    let span_samples = span_samples.min(n - 1).max(1);
    let start = n - 1 - span_samples;
    let mut acc = Complex64::ZERO;
    for i in start..=n - 1 {
        let t = i as f64 * traj.dt;
        let w = if i == start || i == n - 1 { 0.5 } else { 1.0 };
        acc += w * traj.z0(i) * Complex64::new(0.0, omega * t).exp();
    }
    let span = span_samples as f64 * traj.dt;
    Ok(acc * traj.dt / span)
}

/// Streaming variant: integrate from rest for `settle` time units plus a
/// projection window of `periods` drive periods, without storing the
/// trajectory. Returns the projected steady-state amplitude.
pub fn steady_state_response(
    sys: &SystemParams,
    drive_omega: f64,
    dt: f64,
    settle: f64,
    periods: usize,
) -> Result<Complex64> {
    check_dt(sys, drive_omega, dt)?;
    if !(drive_omega > 0.0) || periods < 5 {
        return Err(Error::Precondition(
            "need omega > 0 and at least 5 projection periods".into(),
        ));
    }
    let gamma_min = min_positive_gamma(sys);
    if gamma_min.is_finite() && settle < 8.0 / gamma_min {
        return Err(Error::Precondition(format!(
            "settle = {settle} is shorter than 8 / min gamma = {}",
            8.0 / gamma_min
        )));
    }
    let period = 2.0 * std::f64::consts::PI / drive_omega;
    let settle_steps = (settle / dt).ceil() as usize;
    let window_steps = ((periods as f64 * period) / dt).round() as usize;
    let lang = Langevin::new(sys, drive_omega);
    let dim = lang.dim();
    let mut state = vec![0.0; dim];
    let mut scratch = vec![0.0; 5 * dim];
    let mut acc = Complex64::ZERO;
    let total = settle_steps + window_steps;
    for step in 0..=total {
        let t = step as f64 * dt;
        if step >= settle_steps {
            let w = if step == settle_steps || step == total { 0.5 } else { 1.0 };
            acc += w * state[0] * Complex64::new(0.0, drive_omega * t).exp();
        }
        if step < total {
            rk4_step(&lang, t, &mut state, dt, &mut scratch);
            if state.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
                return Err(Error::Diverged { t: t + dt });
            }
        }
    }
    let span = window_steps as f64 * dt;
    Ok(acc * dt / span)
}

/// Damped-system energy that is non-increasing without drive:
/// E = (V0^2 + Z0^2)/2 + sum_j (Vj^2 + wj^2 Zj^2)/(2 wj)
///     + sqrt(N) sum_j G_j Z0 Zj.
pub fn oscillator_energy(sys: &SystemParams, state: &[f64]) -> f64 {
    let sqn = (sys.n_spins as f64).sqrt();
    let mut e = 0.5 * (state[1] * state[1] + state[0] * state[0]);
    for (j, (r, &g)) in sys.resonators.iter().zip(&sys.couplings).enumerate() {
        let z = state[2 + 2 * j];
        let v = state[3 + 2 * j];
        e += 0.5 * (v * v + r.omega * r.omega * z * z) / r.omega;
        e += sqn * g * state[0] * z;
    }
    e
}

/// Finite-N spin-boson model with truncated Fock spaces: N spin-1/2
/// particles coupled to one boson mode per resonator.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactModel {
    pub n_spins: u32,
    /// Maximum Fock occupation per boson mode.
    pub boson_cutoff: usize,
    pub resonator_omegas: Vec<f64>,
    pub couplings: Vec<f64>,
}

impl ExactModel {
    pub fn new(
        n_spins: u32,
        boson_cutoff: usize,
        resonator_omegas: Vec<f64>,
        couplings: Vec<f64>,
    ) -> Result<Self> {
        if n_spins < 1 || n_spins > 8 {
            return Err(Error::InvalidParameter("exact model supports 1 <= N <= 8".into()));
        }
        if resonator_omegas.is_empty()
            || resonator_omegas.len() > 2
            || resonator_omegas.len() != couplings.len()
        {
            return Err(Error::InvalidParameter(
                "need 1 or 2 boson modes with matching couplings".into(),
            ));
        }
        let model = Self { n_spins, boson_cutoff, resonator_omegas, couplings };
        let dim = model.full_dim();
        if dim > MAX_EXACT_DIM {
            return Err(Error::ResourceLimit(format!(
                "Hilbert dimension {dim} exceeds the dense budget {MAX_EXACT_DIM}"
            )));
        }
        Ok(model)
    }

    fn fock_dim(&self) -> usize {
        (self.boson_cutoff + 1).pow(self.resonator_omegas.len() as u32)
    }

    pub fn full_dim(&self) -> usize {
        (1usize << self.n_spins) * self.fock_dim()
    }

    pub fn symmetric_dim(&self) -> usize {
        (self.n_spins as usize + 1) * self.fock_dim()
    }
}

fn sorted_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Dense Hamiltonian in the full 2^N x Fock basis:
/// H = sum_k w_k n_k + (1/2) sum_j sigma_j^z
///     + sum_k (G_k / 2)(a_k + a_k^dag) sum_j sigma_j^x.
pub fn exact_hamiltonian(model: &ExactModel) -> Result<DMatrix<f64>> {
    let n = model.n_spins as usize;
    let n_modes = model.resonator_omegas.len();
    let cut = model.boson_cutoff + 1;
    let fock = model.fock_dim();
    let dim = model.full_dim();
    if dim > MAX_EXACT_DIM {
        return Err(Error::ResourceLimit(format!("dimension {dim} over budget")));
    }
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    // Basis index = spin_bits * fock + fock_index; fock_index is little-
    // endian in the mode occupations.
    for spins in 0..(1usize << n) {
        let up = spins.count_ones() as f64;
        let spin_energy = up - 0.5 * n as f64;
        for f in 0..fock {
            let idx = spins * fock + f;
            let mut occ_energy = 0.0;
            let mut rem = f;
            for k in 0..n_modes {
                occ_energy += model.resonator_omegas[k] * (rem % cut) as f64;
                rem /= cut;
            }
            h[(idx, idx)] = spin_energy + occ_energy;
            // (a_k + a_k^dag) sigma_j^x couplings: raise one occupation and
            // flip one spin; the symmetric assembly fills both triangles.
            let mut stride = 1;
            let mut rem = f;
            for k in 0..n_modes {
                let occ = rem % cut;
                rem /= cut;
                if occ + 1 < cut {
                    let f_up = f + stride;
                    let amp = 0.5 * model.couplings[k] * ((occ + 1) as f64).sqrt();
                    for j in 0..n {
                        let flipped = spins ^ (1 << j);
                        let a = spins * fock + f_up;
                        let b = flipped * fock + f;
                        h[(a, b)] += amp;
                        h[(b, a)] += amp;
                    }
                }
                stride *= cut;
            }
        }
    }
    Ok(h)
}

/// Ascending eigenvalues of the truncated spin-boson Hamiltonian.
pub fn exact_spectrum(model: &ExactModel) -> Result<Vec<f64>> {
    Ok(sorted_eigenvalues(&exact_hamiltonian(model)?))
}

/// Hamiltonian restricted to the maximal-spin (symmetric, S = N/2) sector
/// in the Dicke basis |m> x Fock, m = 0..N. The collective mode that the
/// bosonization approximates lives entirely in this sector.
pub fn symmetric_hamiltonian(model: &ExactModel) -> Result<DMatrix<f64>> {
    let n = model.n_spins as usize;
    let n_modes = model.resonator_omegas.len();
    let cut = model.boson_cutoff + 1;
    let fock = model.fock_dim();
    let dim = model.symmetric_dim();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for m in 0..=n {
        // J_z eigenvalue for m spins up.
        let jz = m as f64 - 0.5 * n as f64;
        for f in 0..fock {
            let idx = m * fock + f;
            let mut occ_energy = 0.0;
            let mut rem = f;
            for k in 0..n_modes {
                occ_energy += model.resonator_omegas[k] * (rem % cut) as f64;
                rem /= cut;
            }
            h[(idx, idx)] = jz + occ_energy;
            if m + 1 <= n {
                // <m+1| J_x |m> = (1/2) sqrt((N - m)(m + 1)).
                let jx = 0.5 * (((n - m) * (m + 1)) as f64).sqrt();
                let mut stride = 1;
                let mut rem = f;
                for k in 0..n_modes {
                    let occ = rem % cut;
                    rem /= cut;
                    let amp0 = model.couplings[k] * jx;
                    if occ + 1 < cut {
                        let a = (m + 1) * fock + f;
                        let b = m * fock + f + stride;
                        let amp = amp0 * ((occ + 1) as f64).sqrt();
                        h[(a, b)] += amp;
                        h[(b, a)] += amp;
                    }
                    if occ > 0 {
                        let a = (m + 1) * fock + f;
                        let b = m * fock + f - stride;
                        let amp = amp0 * (occ as f64).sqrt();
                        h[(a, b)] += amp;
                        h[(b, a)] += amp;
                    }
                    stride *= cut;
                }
            }
        }
    }
    Ok(h)
}

/// Bosonized normal-mode frequencies for the model's couplings: the
/// undamped roots of the coupled-oscillator characteristic polynomial.
pub fn bosonized_mode_frequencies(model: &ExactModel) -> Result<Vec<f64>> {
    let sys = SystemParams::new(
        crate::model::OscillatorParams { omega: 1.0, gamma: 0.0 },
        model
            .resonator_omegas
            .iter()
            .map(|&w| crate::model::OscillatorParams { omega: w, gamma: 0.0 })
            .collect(),
        model.couplings.clone(),
        model.n_spins as u64,
        0.0,
    )?;
    let m = modes::eigenfrequencies(&sys);
    let mut freqs = m.frequencies;
    if let Some(dark) = m.dark_mode {
        freqs.push(dark);
        freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    Ok(freqs)
}

/// Maximum relative deviation between the exact excitation gaps at the
/// given quanta `level` and the corresponding sums of bosonized mode
/// frequencies. Level 1 compares the single-excitation gaps; level 2 the
/// two-quanta combinations, and so on.
pub fn bosonization_error_at(model: &ExactModel, level: usize) -> Result<f64> {
    if level < 1 {
        return Err(Error::Precondition("level must be >= 1".into()));
    }
    let freqs = bosonized_mode_frequencies(model)?;
    let spectrum = sorted_eigenvalues(&symmetric_hamiltonian(model)?);
    let e0 = spectrum[0];
    // Predicted gaps: all multisets of `l` quanta over the modes, for every
    // l up to `level`; the exact gaps are compared segment by segment.
    let mut offset = 1;
    for l in 1..=level {
        let combos = quanta_combinations(&freqs, l);
        let count = combos.len();
        if offset + count > spectrum.len() {
            return Err(Error::ResourceLimit(
                "spectrum too small for the requested excitation level".into(),
            ));
        }
        if l == level {
            let mut err = 0.0_f64;
            for (i, predicted) in combos.iter().enumerate() {
                let gap = spectrum[offset + i] - e0;
                err = err.max((gap - predicted).abs() / predicted);
            }
            return Ok(err);
        }
        offset += count;
    }
    unreachable!()
}

/// Maximum relative deviation of the lowest single-excitation gaps from
/// the bosonized normal modes.
pub fn bosonization_error(model: &ExactModel) -> Result<f64> {
    bosonization_error_at(model, 1)
}

fn quanta_combinations(freqs: &[f64], level: usize) -> Vec<f64> {
    let mut out = Vec::new();
    fn rec(freqs: &[f64], level: usize, start: usize, sum: f64, out: &mut Vec<f64>) {
        if level == 0 {
            out.push(sum);
            return;
        }
        for i in start..freqs.len() {
            rec(freqs, level - 1, i, sum + freqs[i], out);
        }
    }
    rec(freqs, level, 0, 0.0, &mut out);
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}
