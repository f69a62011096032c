//! Parameter types and the SI boundary.
//!
//! Everything downstream of this module works in dimensionless units where
//! the spin frequency omega_0 = 1. Physical quantities (tesla, meters,
//! joules) appear only here: converting a magnetized-tip geometry into
//! dimensionless couplings and computing the SI prefactor of the magnetic
//! susceptibility.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes;

/// Vacuum permeability mu_0 (T·m/A).
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;
/// Bohr magneton mu_B (J/T).
pub const MU_B: f64 = 9.27401e-24;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054572e-34;
/// Conventional electron g-factor.
pub const G_S: f64 = 2.0;

/// A magnetized cantilever tip: point dipole of moment `moment` along x,
/// sitting at `position` (meters, yz-plane) relative to the spin ensemble
/// at the origin, attached to a resonator of effective mass `mass` and
/// angular frequency `mech_freq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TipGeometry {
    pub moment: f64,
    pub position: [f64; 3],
    pub mass: f64,
    pub mech_freq: f64,
}

impl TipGeometry {
    pub fn new(moment: f64, position: [f64; 3], mass: f64, mech_freq: f64) -> Result<Self> {
        if position[0] != 0.0 {
            return Err(Error::InvalidParameter(
                "tip position must lie in the yz-plane".into(),
            ));
        }
        let r = norm3(position);
        if r == 0.0 {
            return Err(Error::DegenerateGeometry("tip coincides with the ensemble".into()));
        }
        if !(mass > 0.0) || !(mech_freq > 0.0) || !moment.is_finite() {
            return Err(Error::InvalidParameter(
                "tip mass and frequency must be positive".into(),
            ));
        }
        Ok(Self { moment, position, mass, mech_freq })
    }

    fn distance(&self) -> f64 {
        norm3(self.position)
    }
}

/// Static field configuration and the spin constants that set omega_0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticFieldParams {
    /// Magnitude of the static field along -z (tesla).
    pub b0: f64,
    pub g_factor: f64,
    pub bohr_magneton: f64,
    pub vacuum_permeability: f64,
}

impl StaticFieldParams {
    pub fn new(b0: f64, g_factor: f64) -> Result<Self> {
        if b0 < 0.0 || !(g_factor > 0.0) {
            return Err(Error::InvalidParameter("need b0 >= 0 and g_factor > 0".into()));
        }
        Ok(Self { b0, g_factor, bohr_magneton: MU_B, vacuum_permeability: MU0 })
    }

    /// Spin angular frequency omega_0 = g_s mu_B B_0 / hbar (rad/s).
    pub fn omega0(&self) -> f64 {
        self.g_factor * self.bohr_magneton * self.b0 / HBAR
    }
}

impl Default for StaticFieldParams {
    /// B0 chosen so that omega_0 = 10^6 rad/s.
    fn default() -> Self {
        Self {
            b0: HBAR * 1.0e6 / (G_S * MU_B),
            g_factor: G_S,
            bohr_magneton: MU_B,
            vacuum_permeability: MU0,
        }
    }
}

/// A damped harmonic mode: frequency and damping rate in units of omega_0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub omega: f64,
    pub gamma: f64,
}

impl OscillatorParams {
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        if !(omega > 0.0) || gamma < 0.0 || !gamma.is_finite() {
            return Err(Error::InvalidParameter(
                "oscillator needs omega > 0 and gamma >= 0".into(),
            ));
        }
        Ok(Self { omega, gamma })
    }
}

/// Dimensionless model of the coupled system: the bosonized spin mode
/// (omega fixed to 1), one or two resonators with their couplings, the spin
/// count, and the probe drive strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub spin: OscillatorParams,
    pub resonators: Vec<OscillatorParams>,
    pub couplings: Vec<f64>,
    pub n_spins: u64,
    pub drive_gp: f64,
}

impl SystemParams {
    pub fn new(
        spin: OscillatorParams,
        resonators: Vec<OscillatorParams>,
        couplings: Vec<f64>,
        n_spins: u64,
        drive_gp: f64,
    ) -> Result<Self> {
        if spin.omega != 1.0 {
            return Err(Error::InvalidParameter(
                "spin mode frequency is fixed to 1 by the unit convention".into(),
            ));
        }
        if resonators.is_empty() || resonators.len() > 2 || resonators.len() != couplings.len() {
            return Err(Error::InvalidParameter(
                "need 1 or 2 resonators with matching couplings".into(),
            ));
        }
        if n_spins < 1 {
            return Err(Error::InvalidParameter("n_spins must be >= 1".into()));
        }
        if !(drive_gp >= 0.0) || couplings.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter(
                "drive_gp must be >= 0 and couplings finite".into(),
            ));
        }
        let sys = Self { spin, resonators, couplings, n_spins, drive_gp };
        let roots = modes::undamped_squared_roots(&sys);
        if roots.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidParameter(
                "unstable parameters: the undamped characteristic polynomial has a negative root in omega^2".into(),
            ));
        }
        Ok(sys)
    }

    /// Like [`SystemParams::new`] but without the stability check, so that
    /// mode analysis can classify and report unstable parameter sets
    /// instead of rejecting them outright. Shape invariants still hold.
    pub fn new_unchecked(
        spin: OscillatorParams,
        resonators: Vec<OscillatorParams>,
        couplings: Vec<f64>,
        n_spins: u64,
        drive_gp: f64,
    ) -> Result<Self> {
        if spin.omega != 1.0 {
            return Err(Error::InvalidParameter(
                "spin mode frequency is fixed to 1 by the unit convention".into(),
            ));
        }
        if resonators.is_empty() || resonators.len() > 2 || resonators.len() != couplings.len() {
            return Err(Error::InvalidParameter(
                "need 1 or 2 resonators with matching couplings".into(),
            ));
        }
        if n_spins < 1 {
            return Err(Error::InvalidParameter("n_spins must be >= 1".into()));
        }
        if !(drive_gp >= 0.0) || couplings.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter(
                "drive_gp must be >= 0 and couplings finite".into(),
            ));
        }
        Ok(Self { spin, resonators, couplings, n_spins, drive_gp })
    }

    pub fn single(
        spin_gamma: f64,
        resonator: OscillatorParams,
        coupling: f64,
        n_spins: u64,
        drive_gp: f64,
    ) -> Result<Self> {
        Self::new(
            OscillatorParams { omega: 1.0, gamma: spin_gamma },
            vec![resonator],
            vec![coupling],
            n_spins,
            drive_gp,
        )
    }

    pub fn double(
        spin_gamma: f64,
        resonators: [OscillatorParams; 2],
        couplings: [f64; 2],
        n_spins: u64,
        drive_gp: f64,
    ) -> Result<Self> {
        Self::new(
            OscillatorParams { omega: 1.0, gamma: spin_gamma },
            resonators.to_vec(),
            couplings.to_vec(),
            n_spins,
            drive_gp,
        )
    }

    pub fn is_double(&self) -> bool {
        self.resonators.len() == 2
    }
}

/// Physical-scale quantities entering only the susceptibility prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Ensemble volume (m^3).
    pub volume: f64,
    /// Absolute value of omega_0 (rad/s).
    pub omega_scale: f64,
    pub g_factor: f64,
}

impl MaterialParams {
    pub fn new(volume: f64, omega_scale: f64, g_factor: f64) -> Result<Self> {
        if !(volume > 0.0) || !(omega_scale > 0.0) || !(g_factor > 0.0) {
            return Err(Error::InvalidParameter(
                "volume, omega_scale and g_factor must be positive".into(),
            ));
        }
        Ok(Self { volume, omega_scale, g_factor })
    }
}

impl Default for MaterialParams {
    /// V = (4 pi / 3) 10^3 nm^3, omega_0 = 10^6 rad/s, electron g-factor.
    fn default() -> Self {
        Self {
            volume: (4.0 * std::f64::consts::PI / 3.0) * 1.0e3 * 1.0e-27,
            omega_scale: 1.0e6,
            g_factor: G_S,
        }
    }
}

/// Output of [`to_dimensionless`]: resonator frequencies and couplings in
/// units of omega_0, plus the absolute scale itself.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionlessCouplings {
    /// omega_j / omega_0 per tip.
    pub resonator_omegas: Vec<f64>,
    /// G_j / omega_0 per tip.
    pub couplings: Vec<f64>,
    /// omega_0 (rad/s).
    pub omega_scale: f64,
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Uniform field amplitude A (tesla) and gradient G (tesla/meter) of the
/// tip's dipolar field at the ensemble, both along x.
///
/// A = -mu0 m / (4 pi |r|^3); G = 3 r_z mu0 m / (4 pi |r|^5) with r the
/// tip-to-spin vector, so that B_x(z) ~ A - G z for a tip displacement z.
pub fn tip_field_params(tip: &TipGeometry, _fields: &StaticFieldParams) -> Result<(f64, f64)> {
    let r = tip.distance();
    if r == 0.0 {
        return Err(Error::DegenerateGeometry("tip coincides with the ensemble".into()));
    }
    let a = -MU0 * tip.moment / (4.0 * std::f64::consts::PI * r.powi(3));
    // Tip-to-spin vector is -position (the ensemble sits at the origin).
    let rz = -tip.position[2];
    let grad = 3.0 * rz * MU0 * tip.moment / (4.0 * std::f64::consts::PI * r.powi(5));
    Ok((a, grad))
}

/// Magnetic dipole-dipole energy of the two tips, each displaced by dz
/// along z from its equilibrium position.
pub fn dipole_dipole_energy(
    tip1: &TipGeometry,
    tip2: &TipGeometry,
    dz1: f64,
    dz2: f64,
) -> Result<f64> {
    let p1 = [tip1.position[0], tip1.position[1], tip1.position[2] + dz1];
    let p2 = [tip2.position[0], tip2.position[1], tip2.position[2] + dz2];
    let sep = [p2[0] - p1[0], p2[1] - p1[1], p2[2] - p1[2]];
    let d = norm3(sep);
    if d == 0.0 {
        return Err(Error::DegenerateGeometry("coincident tips".into()));
    }
    let e12 = [sep[0] / d, sep[1] / d, sep[2] / d];
    // Both moments are along x by construction.
    let m1_e = tip1.moment * e12[0];
    let m2_e = tip2.moment * e12[0];
    let m1_m2 = tip1.moment * tip2.moment;
    Ok(MU0 * (3.0 * m1_e * m2_e - m1_m2) / (4.0 * std::f64::consts::PI * d.powi(3)))
}

/// Convert tip geometries to dimensionless couplings G_j / omega_0 and
/// frequencies omega_j / omega_0, with omega_0 = g_s mu_B B_0 / hbar.
pub fn to_dimensionless(
    tips: &[TipGeometry],
    fields: &StaticFieldParams,
) -> Result<DimensionlessCouplings> {
    let omega0 = fields.omega0();
    if omega0 <= 0.0 {
        return Err(Error::ZeroSpinFrequency);
    }
    let mut couplings = Vec::with_capacity(tips.len());
    let mut omegas = Vec::with_capacity(tips.len());
    for tip in tips {
        let (_, grad) = tip_field_params(tip, fields)?;
        // g_j = g_s mu_B G_j / 2; script-G_j = g_j sqrt(2 hbar / M_j omega_j) / hbar.
        let g_j = fields.g_factor * fields.bohr_magneton * grad / 2.0;
        let coupling = g_j * (2.0 * HBAR / (tip.mass * tip.mech_freq)).sqrt() / HBAR;
        couplings.push(coupling / omega0);
        omegas.push(tip.mech_freq / omega0);
    }
    Ok(DimensionlessCouplings { resonator_omegas: omegas, couplings, omega_scale: omega0 })
}

/// Dimensionless susceptibility prefactor
/// kappa = mu0 (g_s mu_B)^2 N / (2 V hbar G_p), with G_p in rad/s.
///
/// chi(Omega) = -kappa * Z0(Omega) / sqrt(N), which makes chi independent
/// of the drive amplitude, as it must be for a linear response.
pub fn susceptibility_prefactor(mat: &MaterialParams, sys: &SystemParams) -> Result<f64> {
    if sys.drive_gp == 0.0 {
        return Err(Error::ZeroDrive);
    }
    let gp_abs = sys.drive_gp * mat.omega_scale;
    let gmu = mat.g_factor * MU_B;
    Ok(MU0 * gmu * gmu * sys.n_spins as f64 / (2.0 * mat.volume * HBAR * gp_abs))
}
