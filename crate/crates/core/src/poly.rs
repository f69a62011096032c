//! Small polynomial and 1-D minimization helpers shared by the mode analysis
//! and the parameter-validation code.

use nalgebra::DMatrix;

/// Roots of a monic polynomial x^n + c[n-1] x^(n-1) + ... + c[0] known to
/// have all-real roots, found as eigenvalues of the companion matrix.
/// `coeffs` holds the non-leading coefficients in ascending order (c[0] is
/// the constant term). Returned sorted ascending.
///
/// The characteristic polynomials handled here come from matrices similar
/// to a real symmetric one, so real parts are taken unconditionally; any
/// imaginary residue is companion-matrix roundoff.
pub fn real_roots_monic(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![-coeffs[0]];
    }
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for (i, &c) in coeffs.iter().enumerate() {
        companion[(i, n - 1)] = -c;
    }
    let mut roots: Vec<f64> = companion.complex_eigenvalues().iter().map(|z| z.re).collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Vertex abscissa of the parabola through three points. Falls back to the
/// middle abscissa when the points are collinear.
pub fn quadratic_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d2 - d1) / (x[2] - x[0]);
    if curv == 0.0 {
        return x[1];
    }
    0.5 * (x[0] + x[1] - d1 / curv)
}

/// Golden-section minimization of `f` on [a, b] to absolute tolerance `tol`
/// in the abscissa. Returns the minimizer.
pub fn golden_section_min(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
