//! Undamped normal-mode analysis and peak/window detection.
//!
//! The undamped zeros of the characteristic denominator, taken in
//! x = Omega^2, are the eigenfrequencies of the coupled oscillator system:
//! a quadratic for one resonator, a cubic for two. Roots are found as
//! companion-matrix eigenvalues of the monic polynomial.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{MaterialParams, SystemParams};
use crate::poly;
use crate::response::{self, Spectrum};

/// Roots closer than this in x = Omega^2 count as a multiple root; the same
/// threshold decides resonator-frequency degeneracy for dark-mode detection.
pub const DEGENERACY_TOL: f64 = 1.0e-9;

/// Undamped normal-mode frequencies with stability and dark-mode metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    /// Ascending non-negative mode frequencies (omega_0 units). In the
    /// degenerate two-resonator case these are the two bright modes.
    pub frequencies: Vec<f64>,
    /// False when the characteristic polynomial has a negative root in x.
    pub stable: bool,
    /// Frequency of the undriven (zero-response) mode in degenerate cases.
    pub dark_mode: Option<f64>,
}

/// A refined absorption maximum of Im chi.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PeakInfo {
    pub location: f64,
    pub height: f64,
}

/// A transparency window between two adjacent absorption peaks.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WindowInfo {
    pub lower_peak: f64,
    pub upper_peak: f64,
    /// Location of the Im chi minimum inside the window.
    pub minimum: f64,
    /// Im chi at the minimum.
    pub depth: f64,
    /// d Re chi / d Omega at the minimum.
    pub dispersion_slope: f64,
}

/// Monic coefficients (ascending, constant term first, leading 1 implied)
/// of the undamped characteristic polynomial in x = Omega^2.
pub fn undamped_char_poly(sys: &SystemParams) -> Vec<f64> {
    let n = sys.n_spins as f64;
    if sys.is_double() {
        let (r1, r2) = (sys.resonators[0], sys.resonators[1]);
        let (g1, g2) = (sys.couplings[0], sys.couplings[1]);
        let b = r1.omega * r1.omega;
        let c = r2.omega * r2.omega;
        let k1 = n * r1.omega * g1 * g1;
        let k2 = n * r2.omega * g2 * g2;
        vec![
            -b * c + k1 * c + k2 * b,
            b + c + b * c - (k1 + k2),
            -(1.0 + b + c),
        ]
    } else {
        let r = sys.resonators[0];
        let g = sys.couplings[0];
        let b = r.omega * r.omega;
        vec![b - n * r.omega * g * g, -(1.0 + b)]
    }
}

/// Roots of the undamped characteristic polynomial in x = Omega^2, ascending.
pub fn undamped_squared_roots(sys: &SystemParams) -> Vec<f64> {
    poly::real_roots_monic(&undamped_char_poly(sys))
}

/// Damped characteristic denominator
/// D(Omega) = xi0 xi1 xi2 - N (omega1 G1^2 xi2 + omega2 G2^2 xi1).
pub fn characteristic_determinant(sys: &SystemParams, omega: f64) -> Result<Complex64> {
    if sys.resonators.len() != 2 {
        return Err(Error::Precondition(
            "characteristic determinant requires two resonators".into(),
        ));
    }
    Ok(response::denominator_double(sys, omega))
}

/// Undamped normal-mode frequencies. In the exact-degenerate double case
/// the coupling-orthogonal resonator combination decouples and is reported
/// as the dark mode; `frequencies` then holds the two bright modes.
pub fn eigenfrequencies(sys: &SystemParams) -> ModeSet {
    if sys.is_double() {
        let (r1, r2) = (sys.resonators[0], sys.resonators[1]);
        if (r1.omega - r2.omega).abs() < DEGENERACY_TOL {
            let n = sys.n_spins as f64;
            let (g1, g2) = (sys.couplings[0], sys.couplings[1]);
            let b = r1.omega * r1.omega;
            let eff = n * (r1.omega * g1 * g1 + r2.omega * g2 * g2);
            // Bright modes: (x - 1)(x - omega^2) = N omega (G1^2 + G2^2).
            let roots = poly::real_roots_monic(&[b - eff, -(1.0 + b)]);
            return mode_set(roots, Some(r1.omega));
        }
    }
    mode_set(undamped_squared_roots(sys), None)
}

fn mode_set(squared_roots: Vec<f64>, dark_mode: Option<f64>) -> ModeSet {
    let stable = squared_roots.iter().all(|&x| x >= 0.0);
    let frequencies = squared_roots.iter().map(|&x| x.max(0.0).sqrt()).collect();
    ModeSet { frequencies, stable, dark_mode }
}

/// Interior local maxima of Im chi, each refined by a quadratic fit through
/// the three bracketing samples.
pub fn find_peaks(spectrum: &Spectrum) -> Result<Vec<PeakInfo>> {
    let pts = &spectrum.points;
    if pts.len() < 3 || pts.windows(2).any(|w| w[0].omega >= w[1].omega) {
        return Err(Error::Precondition(
            "peak detection needs >= 3 strictly increasing samples".into(),
        ));
    }
    let mut peaks = Vec::new();
    for i in 1..pts.len() - 1 {
        let (y0, y1, y2) = (pts[i - 1].chi.im, pts[i].chi.im, pts[i + 1].chi.im);
        if y1 > y0 && y1 > y2 {
            let xs = [pts[i - 1].omega, pts[i].omega, pts[i + 1].omega];
            let ys = [y0, y1, y2];
            let location = poly::quadratic_vertex(xs, ys);
            let height = quadratic_value(xs, ys, location);
            peaks.push(PeakInfo { location, height });
        }
    }
    Ok(peaks)
}

fn quadratic_value(x: [f64; 3], y: [f64; 3], at: f64) -> f64 {
    // Newton form of the interpolating parabola.
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = ((y[2] - y[1]) / (x[2] - x[1]) - d1) / (x[2] - x[0]);
    y[0] + d1 * (at - x[0]) + d2 * (at - x[0]) * (at - x[1])
}

/// One window per adjacent peak pair: the Im chi minimum between them,
/// refined by golden-section search on the closed form, with the Re chi
/// slope evaluated there.
pub fn find_windows(
    sys: &SystemParams,
    mat: &MaterialParams,
    spectrum: &Spectrum,
    peaks: &[PeakInfo],
) -> Result<Vec<WindowInfo>> {
    if peaks.len() < 2 {
        return Ok(Vec::new());
    }
    let mut windows = Vec::with_capacity(peaks.len() - 1);
    for pair in peaks.windows(2) {
        let (lo, hi) = (pair[0].location, pair[1].location);
        // Bracket the grid minimum between the two peaks first.
        let inside: Vec<_> = spectrum
            .points
            .iter()
            .filter(|p| p.omega > lo && p.omega < hi)
            .collect();
        let seed = inside
            .iter()
            .min_by(|a, b| a.chi.im.partial_cmp(&b.chi.im).unwrap())
            .map(|p| p.omega)
            .unwrap_or(0.5 * (lo + hi));
        let step = spectrum.points[1].omega - spectrum.points[0].omega;
        let a = (seed - step).max(lo);
        let b = (seed + step).min(hi);
        let minimum = poly::golden_section_min(a, b, 1.0e-6, |o| {
            response::chi(sys, mat, o).map(|c| c.im).unwrap_or(f64::INFINITY)
        });
        let depth = response::chi(sys, mat, minimum)?.im;
        let dispersion_slope = response::dchi_domega(sys, mat, minimum)?.re;
        windows.push(WindowInfo {
            lower_peak: lo,
            upper_peak: hi,
            minimum,
            depth,
            dispersion_slope,
        });
    }
    Ok(windows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MaterialParams, OscillatorParams, SystemParams};
    use crate::response::{scan, xi};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn osc(omega: f64, gamma: f64) -> OscillatorParams {
        OscillatorParams { omega, gamma }
    }

    fn fig5b() -> SystemParams {
        SystemParams::double(
            5.0e-2,
            [osc(1.0, 1.0e-7), osc(1.5, 1.0e-7)],
            [0.03, 0.05],
            20,
            1.0,
        )
        .unwrap()
    }

    /// Cofactor expansion of the 3x3 coupling matrix with damped diagonal.
    fn determinant_oracle(sys: &SystemParams, omega: f64) -> Complex64 {
        let n = (sys.n_spins as f64).sqrt();
        let (r1, r2) = (sys.resonators[0], sys.resonators[1]);
        let (g1, g2) = (sys.couplings[0], sys.couplings[1]);
        let x0 = xi(sys.spin, omega);
        let x1 = xi(r1, omega);
        let x2 = xi(r2, omega);
        let a01 = Complex64::from(-n * g1);
        let a02 = Complex64::from(-n * g2);
        let a10 = Complex64::from(-r1.omega * n * g1);
        let a20 = Complex64::from(-r2.omega * n * g2);
        x0 * (x1 * x2) - a01 * (a10 * x2) + a02 * (-x1 * a20)
    }

    #[test]
    fn determinant_matches_cofactor_oracle() {
        let sys = fig5b();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let o = rng.gen_range(0.2..3.0);
            let d = characteristic_determinant(&sys, o).unwrap();
            let oracle = determinant_oracle(&sys, o);
            assert!((d - oracle).norm() <= 1e-12 * oracle.norm().max(1.0));
        }
    }

    #[test]
    fn determinant_decoupled_factorizes() {
        let sys = SystemParams::double(
            5.0e-2,
            [osc(1.0, 1.0e-7), osc(1.5, 1.0e-7)],
            [0.0, 0.0],
            20,
            1.0,
        )
        .unwrap();
        let o = 1.3;
        let d = characteristic_determinant(&sys, o).unwrap();
        let prod = xi(sys.spin, o) * xi(sys.resonators[0], o) * xi(sys.resonators[1], o);
        assert_eq!(d, prod);
    }

    #[test]
    fn determinant_vanishes_on_undamped_roots() {
        let sys = SystemParams::double(
            0.0,
            [osc(1.0, 0.0), osc(1.5, 0.0)],
            [0.03, 0.05],
            20,
            1.0,
        )
        .unwrap();
        let coeffs = undamped_char_poly(&sys);
        let scale: f64 = coeffs.iter().fold(1.0, |a, c| a.max(c.abs()));
        for &x in &undamped_squared_roots(&sys) {
            let d = characteristic_determinant(&sys, x.sqrt()).unwrap();
            assert!(d.norm() <= 1e-12 * scale, "D = {d} at x = {x}");
        }
    }

    #[test]
    fn determinant_equals_char_poly_when_undamped() {
        let sys = SystemParams::double(
            0.0,
            [osc(1.0, 0.0), osc(1.5, 0.0)],
            [0.03, 0.05],
            20,
            1.0,
        )
        .unwrap();
        let coeffs = undamped_char_poly(&sys);
        for o in [0.3, 0.77, 1.21, 1.9] {
            let x = o * o;
            let p = x * x * x + coeffs[2] * x * x + coeffs[1] * x + coeffs[0];
            let d = characteristic_determinant(&sys, o).unwrap();
            assert_relative_eq!(d.re, p, max_relative = 1e-12);
            assert_eq!(d.im, 0.0);
        }
    }

    #[test]
    fn decoupled_eigenfrequencies_are_bare() {
        let single = SystemParams::single(5.0e-2, osc(1.3, 1.0e-7), 0.0, 20, 1.0).unwrap();
        let m = eigenfrequencies(&single);
        assert_eq!(m.frequencies.len(), 2);
        assert_relative_eq!(m.frequencies[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(m.frequencies[1], 1.3, max_relative = 1e-12);
        assert!(m.stable && m.dark_mode.is_none());

        let double = SystemParams::double(
            5.0e-2,
            [osc(0.8, 1.0e-7), osc(1.5, 1.0e-7)],
            [0.0, 0.0],
            20,
            1.0,
        )
        .unwrap();
        let m = eigenfrequencies(&double);
        assert_eq!(m.frequencies.len(), 3);
        assert_relative_eq!(m.frequencies[0], 0.8, max_relative = 1e-10);
        assert_relative_eq!(m.frequencies[1], 1.0, max_relative = 1e-10);
        assert_relative_eq!(m.frequencies[2], 1.5, max_relative = 1e-10);
    }

    #[test]
    fn fig5b_eigenfrequencies_and_trace() {
        let m = eigenfrequencies(&fig5b());
        assert_eq!(m.frequencies.len(), 3);
        assert_abs_diff_eq!(m.frequencies[0], 0.915, epsilon = 1e-3);
        assert_abs_diff_eq!(m.frequencies[1], 1.051, epsilon = 1e-3);
        assert_abs_diff_eq!(m.frequencies[2], 1.519, epsilon = 1e-3);
        let trace: f64 = m.frequencies.iter().map(|f| f * f).sum();
        assert_abs_diff_eq!(trace, 4.25, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_case_reports_dark_mode() {
        let sys = SystemParams::double(
            5.0e-2,
            [osc(1.0, 1.0e-7), osc(1.0, 1.0e-7)],
            [0.03, 0.05],
            20,
            1.0,
        )
        .unwrap();
        let m = eigenfrequencies(&sys);
        assert_eq!(m.frequencies.len(), 2);
        assert_abs_diff_eq!(m.frequencies[0], (1.0f64 - 0.068f64.sqrt()).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.frequencies[1], (1.0f64 + 0.068f64.sqrt()).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.frequencies[0], 0.8598, epsilon = 1e-4);
        assert_abs_diff_eq!(m.frequencies[1], 1.1228, epsilon = 1e-4);
        assert_eq!(m.dark_mode, Some(1.0));
    }

    #[test]
    fn trace_identity_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let w1 = rng.gen_range(0.5..2.0);
            let w2 = rng.gen_range(0.5..2.0);
            let g1 = rng.gen_range(0.0..0.05);
            let g2 = rng.gen_range(0.0..0.05);
            let Ok(sys) = SystemParams::double(
                5.0e-2,
                [osc(w1, 1.0e-4), osc(w2, 1.0e-4)],
                [g1, g2],
                20,
                1.0,
            ) else {
                continue;
            };
            let trace: f64 = undamped_squared_roots(&sys).iter().sum();
            assert_relative_eq!(trace, 1.0 + w1 * w1 + w2 * w2, max_relative = 1e-10);
        }
    }

    #[test]
    fn interlacing_with_bare_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut tested = 0;
        while tested < 100 {
            let w1: f64 = rng.gen_range(0.5..2.0);
            let w2: f64 = rng.gen_range(0.5..2.0);
            if (w1 - w2).abs() < 1e-3 {
                continue;
            }
            let g1 = rng.gen_range(1.0e-3..0.04);
            let g2 = rng.gen_range(1.0e-3..0.04);
            let Ok(sys) = SystemParams::double(
                5.0e-2,
                [osc(w1, 1.0e-4), osc(w2, 1.0e-4)],
                [g1, g2],
                20,
                1.0,
            ) else {
                continue;
            };
            let x = undamped_squared_roots(&sys);
            let (lo, hi) = (w1.min(w2).powi(2), w1.max(w2).powi(2));
            assert!(x[0] < lo.min(1.0), "x0 = {} vs {}", x[0], lo.min(1.0));
            assert!(x[1] > lo && x[1] < hi || (x[1] - lo).abs() < 1e-12);
            assert!(x[2] > hi.max(1.0));
            tested += 1;
        }
    }

    #[test]
    fn splitting_monotone_in_coupling() {
        let mut prev = 0.0;
        for i in 1..20 {
            let g = 0.005 * i as f64;
            let sys = SystemParams::single(5.0e-2, osc(1.0, 1.0e-7), g, 20, 1.0).unwrap();
            let x = undamped_squared_roots(&sys);
            let split = x[1] - x[0];
            assert!(split > prev, "splitting not monotone at G = {g}");
            // Closed form: 2 G sqrt(N omega).
            assert_relative_eq!(split, 2.0 * g * (20.0f64).sqrt(), max_relative = 1e-9);
            prev = split;
        }
    }

    #[test]
    fn peaks_decoupled_single_lorentzian() {
        let sys = SystemParams::single(5.0e-2, osc(1.0, 1.0e-7), 0.0, 20, 1.0).unwrap();
        let mat = MaterialParams::default();
        let spec = scan(&sys, &mat, 0.5, 1.5, 2001).unwrap();
        let peaks = find_peaks(&spec).unwrap();
        assert_eq!(peaks.len(), 1);
        assert_abs_diff_eq!(peaks[0].location, 1.0, epsilon = 1e-3);
        let windows = find_windows(&sys, &mat, &spec, &peaks).unwrap();
        assert!(windows.is_empty());
    }

    #[test]
    fn fig4b_two_peaks_one_window() {
        let sys = SystemParams::single(5.0e-2, osc(1.0, 1.0e-7), 0.05, 20, 1.0).unwrap();
        let mat = MaterialParams::default();
        let spec = scan(&sys, &mat, 0.5, 2.0, 3001).unwrap();
        let peaks = find_peaks(&spec).unwrap();
        assert_eq!(peaks.len(), 2);
        assert_abs_diff_eq!(peaks[0].location, 0.8811, epsilon = 0.02);
        assert_abs_diff_eq!(peaks[1].location, 1.1062, epsilon = 0.02);
        let windows = find_windows(&sys, &mat, &spec, &peaks).unwrap();
        assert_eq!(windows.len(), 1);
        let w = windows[0];
        assert!(w.minimum > w.lower_peak && w.minimum < w.upper_peak);
        assert!(w.dispersion_slope > 0.0);
    }

    #[test]
    fn fig5b_three_peaks_two_windows() {
        let sys = fig5b();
        let mat = MaterialParams::default();
        let spec = scan(&sys, &mat, 0.5, 2.0, 3001).unwrap();
        let peaks = find_peaks(&spec).unwrap();
        assert_eq!(peaks.len(), 3);
        let modes = eigenfrequencies(&sys);
        for (p, f) in peaks.iter().zip(&modes.frequencies) {
            assert_abs_diff_eq!(p.location, *f, epsilon = 0.03);
        }
        let windows = find_windows(&sys, &mat, &spec, &peaks).unwrap();
        assert_eq!(windows.len(), 2);
        for w in &windows {
            assert!(w.minimum > w.lower_peak && w.minimum < w.upper_peak);
            assert!(w.dispersion_slope > 0.0);
            assert!(w.depth < peaks[0].height);
        }
    }

    #[test]
    fn peaks_track_eigenfrequencies() {
        // Every Im chi peak on a fine grid lies within 3 gamma0 of an
        // undamped eigenfrequency (all dampings <= 1e-2).
        let mat = MaterialParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let w2 = rng.gen_range(1.2..1.8);
            let g1 = rng.gen_range(0.01..0.04);
            let g2 = rng.gen_range(0.01..0.04);
            let gamma0 = rng.gen_range(1.0e-3..1.0e-2);
            let Ok(sys) = SystemParams::double(
                gamma0,
                [osc(1.0, 1.0e-5), osc(w2, 1.0e-5)],
                [g1, g2],
                20,
                1.0,
            ) else {
                continue;
            };
            let spec = scan(&sys, &mat, 0.5, 2.5, 8001).unwrap();
            let peaks = find_peaks(&spec).unwrap();
            let modes = eigenfrequencies(&sys);
            for p in &peaks {
                let near = modes
                    .frequencies
                    .iter()
                    .any(|f| (p.location - f).abs() <= 3.0 * gamma0);
                assert!(near, "peak {} far from {:?}", p.location, modes.frequencies);
            }
        }
    }

    #[test]
    fn find_peaks_rejects_degenerate_input() {
        let sys = fig5b();
        let mat = MaterialParams::default();
        let mut spec = scan(&sys, &mat, 0.5, 2.0, 11).unwrap();
        spec.points.truncate(2);
        assert!(matches!(find_peaks(&spec), Err(Error::Precondition(_))));
    }
}
