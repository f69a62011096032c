//! Closed-form frequency-domain linear response.
//!
//! All formulas are evaluated in units of the spin frequency (omega_0 = 1).
//! The steady-state spin amplitude for the single-resonator system is
//!
//!   Z0(Omega) = sqrt(N) Gp xi / (xi0 xi - N omega G^2),
//!
//! and for two resonators
//!
//!   Z0(Omega) = sqrt(N) Gp xi1 xi2 / D(Omega),
//!   D(Omega)  = xi0 xi1 xi2 - N (omega1 G1^2 xi2 + omega2 G2^2 xi1),
//!
//! with xi_j = i Omega gamma_j - omega_j^2 + Omega^2. The susceptibility is
//! chi(Omega) = -kappa Z0(Omega) / sqrt(N) with the dimensionless prefactor
//! kappa from the model module.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{susceptibility_prefactor, MaterialParams, OscillatorParams, SystemParams};

/// Two resonator frequencies closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1.0e-9;

/// xi(Omega) = i Omega gamma - omega^2 + Omega^2.
pub fn xi(osc: OscillatorParams, omega: f64) -> Complex64 {
    Complex64::new(omega * omega - osc.omega * osc.omega, omega * osc.gamma)
}

/// Derivative of xi with respect to the probe frequency.
fn dxi(osc: OscillatorParams, omega: f64) -> Complex64 {
    Complex64::new(2.0 * omega, osc.gamma)
}

fn require_single(sys: &SystemParams) -> Result<()> {
    if sys.resonators.len() != 1 {
        return Err(Error::Precondition("expected a single-resonator system".into()));
    }
    Ok(())
}

fn require_double(sys: &SystemParams) -> Result<()> {
    if sys.resonators.len() != 2 {
        return Err(Error::Precondition("expected a two-resonator system".into()));
    }
    Ok(())
}

/// Steady-state spin amplitude Z0(Omega) for one resonator.
pub fn lineshape_single(sys: &SystemParams, omega: f64) -> Result<Complex64> {
    require_single(sys)?;
    let n = sys.n_spins as f64;
    let res = sys.resonators[0];
    let g = sys.couplings[0];
    let xi0 = xi(sys.spin, omega);
    let xi1 = xi(res, omega);
    let denom = xi0 * xi1 - n * res.omega * g * g;
    if denom == Complex64::ZERO {
        return Err(Error::Singularity { omega });
    }
    Ok(n.sqrt() * sys.drive_gp * xi1 / denom)
}

/// Damped characteristic denominator D(Omega) for two resonators.
pub(crate) fn denominator_double(sys: &SystemParams, omega: f64) -> Complex64 {
    let n = sys.n_spins as f64;
    let (r1, r2) = (sys.resonators[0], sys.resonators[1]);
    let (g1, g2) = (sys.couplings[0], sys.couplings[1]);
    let xi0 = xi(sys.spin, omega);
    let xi1 = xi(r1, omega);
    let xi2 = xi(r2, omega);
    xi0 * xi1 * xi2 - n * (r1.omega * g1 * g1 * xi2 + r2.omega * g2 * g2 * xi1)
}

/// Steady-state spin amplitude Z0(Omega) for two resonators.
pub fn lineshape_double(sys: &SystemParams, omega: f64) -> Result<Complex64> {
    require_double(sys)?;
    let n = sys.n_spins as f64;
    let xi1 = xi(sys.resonators[0], omega);
    let xi2 = xi(sys.resonators[1], omega);
    let d = denominator_double(sys, omega);
    if d == Complex64::ZERO {
        return Err(Error::Singularity { omega });
    }
    Ok(n.sqrt() * sys.drive_gp * xi1 * xi2 / d)
}

/// Reduced two-resonator amplitude for omega1 ~ omega2: the common xi
/// cancels and the couplings combine into N (omega1 G1^2 + omega2 G2^2).
pub fn lineshape_double_degenerate(sys: &SystemParams, omega: f64) -> Result<Complex64> {
    require_double(sys)?;
    let (r1, r2) = (sys.resonators[0], sys.resonators[1]);
    if (r1.omega - r2.omega).abs() >= DEGENERACY_TOL {
        return Err(Error::Precondition(
            "degenerate form requires omega1 = omega2".into(),
        ));
    }
    let n = sys.n_spins as f64;
    let (g1, g2) = (sys.couplings[0], sys.couplings[1]);
    let xi0 = xi(sys.spin, omega);
    let xi1 = xi(r1, omega);
    let eff = n * (r1.omega * g1 * g1 + r2.omega * g2 * g2);
    let denom = xi0 * xi1 - eff;
    if denom == Complex64::ZERO {
        return Err(Error::Singularity { omega });
    }
    Ok(n.sqrt() * sys.drive_gp * xi1 / denom)
}

/// Magnetic susceptibility chi(Omega); dispatches on the resonator count.
/// Re chi is the dispersive part, Im chi the absorptive part.
pub fn chi(sys: &SystemParams, mat: &MaterialParams, omega: f64) -> Result<Complex64> {
    let kappa = susceptibility_prefactor(mat, sys)?;
    let lineshape = if sys.is_double() {
        lineshape_double(sys, omega)?
    } else {
        lineshape_single(sys, omega)?
    };
    Ok(-kappa / (sys.n_spins as f64).sqrt() * lineshape)
}

/// Analytic derivative d chi / d Omega via the quotient rule on the
/// closed-form rational lineshape.
pub fn dchi_domega(sys: &SystemParams, mat: &MaterialParams, omega: f64) -> Result<Complex64> {
    let kappa = susceptibility_prefactor(mat, sys)?;
    let n = sys.n_spins as f64;
    let gp = sys.drive_gp;
    let dlineshape = if sys.is_double() {
        let (r1, r2) = (sys.resonators[0], sys.resonators[1]);
        let (g1, g2) = (sys.couplings[0], sys.couplings[1]);
        let xi0 = xi(sys.spin, omega);
        let xi1 = xi(r1, omega);
        let xi2 = xi(r2, omega);
        let dxi0 = dxi(sys.spin, omega);
        let dxi1 = dxi(r1, omega);
        let dxi2 = dxi(r2, omega);
        let u = xi1 * xi2;
        let du = dxi1 * xi2 + xi1 * dxi2;
        let d = xi0 * u - n * (r1.omega * g1 * g1 * xi2 + r2.omega * g2 * g2 * xi1);
        if d == Complex64::ZERO {
            return Err(Error::Singularity { omega });
        }
        let dd = dxi0 * u + xi0 * du - n * (r1.omega * g1 * g1 * dxi2 + r2.omega * g2 * g2 * dxi1);
        n.sqrt() * gp * (du * d - u * dd) / (d * d)
    } else {
        require_single(sys)?;
        let res = sys.resonators[0];
        let g = sys.couplings[0];
        let xi0 = xi(sys.spin, omega);
        let xi1 = xi(res, omega);
        let dxi0 = dxi(sys.spin, omega);
        let dxi1 = dxi(res, omega);
        let q = xi0 * xi1 - n * res.omega * g * g;
        if q == Complex64::ZERO {
            return Err(Error::Singularity { omega });
        }
        let dq = dxi0 * xi1 + xi0 * dxi1;
        n.sqrt() * gp * (dxi1 * q - xi1 * dq) / (q * q)
    };
    Ok(-kappa / n.sqrt() * dlineshape)
}

/// Complex refractive index n = sqrt(1 + chi), principal branch with
/// Re(n) >= 0; a pure negative real radicand resolves to +i sqrt(|.|).
pub fn refractive_index(chi_value: Complex64) -> Result<Complex64> {
    let s = Complex64::new(1.0, 0.0) + chi_value;
    if s == Complex64::ZERO {
        return Err(Error::BranchPoint);
    }
    if s.im == 0.0 && s.re < 0.0 {
        return Ok(Complex64::new(0.0, (-s.re).sqrt()));
    }
    let mut n = s.sqrt();
    if n.re < 0.0 {
        n = -n;
    }
    Ok(n)
}

/// v_g / c from precomputed chi and d chi / d Omega:
/// Re[1 / (n + Omega d chi / (2 n))].
pub fn group_velocity_from_parts(
    chi_value: Complex64,
    dchi: Complex64,
    omega: f64,
) -> Result<f64> {
    let n = refractive_index(chi_value)?;
    let group_index = n + omega * dchi / (2.0 * n);
    if group_index == Complex64::ZERO {
        return Err(Error::DivergentGroupIndex { omega });
    }
    Ok((1.0 / group_index).re)
}

/// Group velocity ratio v_g / c at the given probe frequency.
pub fn group_velocity(sys: &SystemParams, mat: &MaterialParams, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Precondition("group_velocity requires omega > 0".into()));
    }
    let c = chi(sys, mat, omega)?;
    let dc = dchi_domega(sys, mat, omega)?;
    group_velocity_from_parts(c, dc, omega)
}

/// One sampled point of a response scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub chi: Complex64,
    pub n: Complex64,
    pub vg_over_c: f64,
}

/// A sampled response spectrum with a digest of the parameters it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub points: Vec<SpectrumPoint>,
    pub params_digest: String,
}

/// Sample chi, n and v_g/c on a uniform grid.
pub fn scan(
    sys: &SystemParams,
    mat: &MaterialParams,
    omega_min: f64,
    omega_max: f64,
    points: usize,
) -> Result<Spectrum> {
    if !(omega_min > 0.0) || !(omega_min < omega_max) || points < 3 {
        return Err(Error::Precondition(
            "scan requires 0 < omega_min < omega_max and points >= 3".into(),
        ));
    }
    let step = (omega_max - omega_min) / (points - 1) as f64;
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let omega = omega_min + i as f64 * step;
        let c = chi(sys, mat, omega)?;
        let dc = dchi_domega(sys, mat, omega)?;
        out.push(SpectrumPoint {
            omega,
            chi: c,
            n: refractive_index(c)?,
            vg_over_c: group_velocity_from_parts(c, dc, omega)?,
        });
    }
    let digest = serde_json::to_string(&(sys, mat))?;
    Ok(Spectrum { points: out, params_digest: digest })
}
