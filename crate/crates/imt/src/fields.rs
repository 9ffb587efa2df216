//! Counter-propagating biased-Gaussian control fields sampled on the grid.
//!
//! Forward: Ω_c^F = Ω{1 + αG e^{-iΦ}}, backward: Ω_c^B = Ω{1 + αG e^{+i(Φ+2φ)}},
//! with the Gaussian envelope G and phase Φ evaluated around the beam focus.
//! The carrier phases e^{±ik_c y} are absorbed into the envelope convention;
//! only envelopes are stored.

use num_complex::Complex64 as C64;

use crate::grid::{ComplexField2D, Grid};
use crate::params::Internal;

/// Gaussian envelope amplitude G and phase Φ at (z, y), beam focused at the
/// origin with waist w0 and Rayleigh range l_r.
///
/// G = (1 + y²/L_r²)^{-1/2} · exp[-z²/(w0²(1 + y²/L_r²))]
/// Φ = z²/(w0²(1 + y²/L_r²)) · y/L_r
pub fn gaussian_envelope(z: f64, y: f64, w0: f64, l_r: f64) -> (f64, f64) {
    let expand = 1.0 + (y / l_r) * (y / l_r);
    let arg = z * z / (w0 * w0 * expand);
    ((-arg).exp() / expand.sqrt(), arg * y / l_r)
}

/// The two control-field envelopes on the grid, in units of Γ.
#[derive(Debug, Clone)]
pub struct ControlFieldPair {
    pub forward: ComplexField2D,
    pub backward: ComplexField2D,
}

/// Evaluate Ω_c^{F,B} on the full grid. Fields are static in every run; the
/// solvers never re-evaluate pointwise.
pub fn control_fields(ip: &Internal) -> ControlFieldPair {
    let grid = Grid::from_internal(ip);
    let omega = ip.omega;
    let alpha = ip.alpha;
    let two_phi = 2.0 * ip.phi;
    let forward = ComplexField2D::from_fn(grid, |z, y| {
        let (g, phi_env) = gaussian_envelope(z, y, ip.w0, ip.l_r);
        omega * (C64::new(1.0, 0.0) + alpha * g * C64::from_polar(1.0, -phi_env))
    });
    let backward = ComplexField2D::from_fn(grid, |z, y| {
        let (g, phi_env) = gaussian_envelope(z, y, ip.w0, ip.l_r);
        omega * (C64::new(1.0, 0.0) + alpha * g * C64::from_polar(1.0, phi_env + two_phi))
    });
    ControlFieldPair { forward, backward }
}
