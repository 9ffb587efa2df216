//! Physical and numerical parameters, derived constants, and validation.
//!
//! All solver-facing code works in internal units: time in 1/Γ, length in mm,
//! ħ = 1. Conversion to SI (kHz, μs, mm) happens only at the I/O boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 2π
pub const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("gamma must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("omega must be positive, got {0}")]
    NonPositiveOmega(f64),
    #[error("optical depth xi must be positive, got {0}")]
    NonPositiveXi(f64),
    #[error("beam waist w0 must be positive, got {0}")]
    NonPositiveWaist(f64),
    #[error("medium length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("wavelength must be positive, got {0}")]
    NonPositiveWavelength(f64),
    #[error("alpha must exceed -1 (got {0}); the on-axis control amplitude would vanish")]
    AlphaTooNegative(f64),
    #[error("phi must lie in [0, pi), got {0}")]
    PhiOutOfRange(f64),
    #[error("grid counts must be >= 8, got nz={nz}, ny={ny}")]
    GridTooSmall { nz: usize, ny: usize },
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("z half-extent must be >= 3*w0 (got {extent} with w0 = {w0})")]
    ZExtentTooSmall { extent: f64, w0: f64 },
}

/// Grid and time-stepping controls. Lengths in mm, dt in units of 1/Γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nz: usize,
    pub ny: usize,
    /// Grid spans z ∈ [-z_half_extent, +z_half_extent], in mm.
    pub z_half_extent: f64,
    /// Time step in units of 1/Γ.
    pub dt: f64,
}

impl GridSpec {
    pub fn defaults_for_waist(w0_mm: f64) -> Self {
        GridSpec {
            nz: 256,
            ny: 128,
            z_half_extent: 4.0 * w0_mm,
            dt: 0.05,
        }
    }
}

/// All physical inputs in SI units, plus grid controls.
///
/// `gamma`, `omega`, `delta_p` are angular frequencies in rad/s; lengths in
/// meters; `alpha`, `phi`, `xi` dimensionless (phi in radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub gamma: f64,
    pub omega: f64,
    pub alpha: f64,
    pub phi: f64,
    pub delta_p: f64,
    pub w0: f64,
    pub xi: f64,
    pub medium_length: f64,
    pub lambda_p: f64,
    pub lambda_c: f64,
    pub grid: GridSpec,
}

impl ParamSet {
    /// The reference parameter set:
    /// (α, Γ, Ω, λc, λp, L) = (−0.25, 2π·6 MHz, 3Γ, 780 nm, 780 nm, 5 mm),
    /// with (Δp, w0, φ, ξ) = (0, 1 mm, 0, 80).
    pub fn reference_defaults() -> Self {
        let gamma = TAU * 6.0e6;
        ParamSet {
            gamma,
            omega: 3.0 * gamma,
            alpha: -0.25,
            phi: 0.0,
            delta_p: 0.0,
            w0: 1.0e-3,
            xi: 80.0,
            medium_length: 5.0e-3,
            lambda_p: 780.0e-9,
            lambda_c: 780.0e-9,
            grid: GridSpec::defaults_for_waist(1.0),
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.gamma > 0.0) {
            return Err(ParamError::NonPositiveGamma(self.gamma));
        }
        if !(self.omega > 0.0) {
            return Err(ParamError::NonPositiveOmega(self.omega));
        }
        if !(self.xi > 0.0) {
            return Err(ParamError::NonPositiveXi(self.xi));
        }
        if !(self.w0 > 0.0) {
            return Err(ParamError::NonPositiveWaist(self.w0));
        }
        if !(self.medium_length > 0.0) {
            return Err(ParamError::NonPositiveLength(self.medium_length));
        }
        if !(self.lambda_p > 0.0) {
            return Err(ParamError::NonPositiveWavelength(self.lambda_p));
        }
        if !(self.lambda_c > 0.0) {
            return Err(ParamError::NonPositiveWavelength(self.lambda_c));
        }
        if !(self.alpha > -1.0) {
            return Err(ParamError::AlphaTooNegative(self.alpha));
        }
        if !(self.phi >= 0.0 && self.phi < std::f64::consts::PI) {
            return Err(ParamError::PhiOutOfRange(self.phi));
        }
        if self.grid.nz < 8 || self.grid.ny < 8 {
            return Err(ParamError::GridTooSmall {
                nz: self.grid.nz,
                ny: self.grid.ny,
            });
        }
        if !(self.grid.dt > 0.0) {
            return Err(ParamError::NonPositiveDt(self.grid.dt));
        }
        let w0_mm = self.w0 * 1e3;
        if self.grid.z_half_extent < 3.0 * w0_mm {
            return Err(ParamError::ZExtentTooSmall {
                extent: self.grid.z_half_extent,
                w0: w0_mm,
            });
        }
        Ok(())
    }

    /// Convert to internal units (Γ = 1, length in mm, ħ = 1).
    pub fn internal(&self) -> Result<Internal, ParamError> {
        self.validate()?;
        let mm = 1e3; // m -> mm
        let w0 = self.w0 * mm;
        let l = self.medium_length * mm;
        let lambda_p = self.lambda_p * mm;
        let lambda_c = self.lambda_c * mm;
        Ok(Internal {
            gamma_si: self.gamma,
            omega: self.omega / self.gamma,
            alpha: self.alpha,
            phi: self.phi,
            delta_p: self.delta_p / self.gamma,
            w0,
            xi: self.xi,
            l,
            eta: self.xi / (2.0 * l),
            k_p: TAU / lambda_p,
            k_y: TAU / l,
            l_r: std::f64::consts::PI * w0 * w0 / lambda_c,
            grid: self.grid,
        })
    }
}

/// Derived constants in SI units (per the defining formulas).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// η = Γξ/(2L), rad s⁻¹ m⁻¹.
    pub eta: f64,
    /// k_p = 2π/λp, m⁻¹.
    pub k_p: f64,
    /// k_y = 2π/L, m⁻¹.
    pub k_y: f64,
    /// Rayleigh range L_r = πw0²/λc, m.
    pub rayleigh: f64,
}

pub fn derive_constants(p: &ParamSet) -> Result<DerivedConstants, ParamError> {
    p.validate()?;
    Ok(DerivedConstants {
        eta: p.gamma * p.xi / (2.0 * p.medium_length),
        k_p: TAU / p.lambda_p,
        k_y: TAU / p.medium_length,
        rayleigh: std::f64::consts::PI * p.w0 * p.w0 / p.lambda_c,
    })
}

/// Report on the L_r ≫ L approximation and the bound-state condition α < 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// L_r / L.
    pub rayleigh_ratio: f64,
    pub threshold: f64,
    /// rayleigh_ratio >= threshold.
    pub uniform_in_y: bool,
    /// Centrally confined profiles occur only when α < 0.
    pub bound_state_expected: bool,
}

pub const DEFAULT_REGIME_THRESHOLD: f64 = 50.0;

pub fn validate_regime(p: &ParamSet, threshold: f64) -> Result<RegimeReport, ParamError> {
    let d = derive_constants(p)?;
    let ratio = d.rayleigh / p.medium_length;
    Ok(RegimeReport {
        rayleigh_ratio: ratio,
        threshold,
        uniform_in_y: ratio >= threshold,
        bound_state_expected: p.alpha < 0.0,
    })
}

/// All quantities the solvers need, in internal units (Γ = 1, mm, ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Internal {
    /// Γ in rad/s, kept only for converting outputs back to SI.
    pub gamma_si: f64,
    /// Ω in units of Γ.
    pub omega: f64,
    pub alpha: f64,
    pub phi: f64,
    /// Δp in units of Γ.
    pub delta_p: f64,
    /// Beam waist, mm.
    pub w0: f64,
    pub xi: f64,
    /// Medium length, mm.
    pub l: f64,
    /// η = ξ/(2L), Γ/mm.
    pub eta: f64,
    /// 2π/λp, 1/mm.
    pub k_p: f64,
    /// 2π/L, 1/mm.
    pub k_y: f64,
    /// Rayleigh range, mm.
    pub l_r: f64,
    pub grid: GridSpec,
}

impl Internal {
    /// Internal time (1/Γ) to μs.
    pub fn time_to_us(&self, t: f64) -> f64 {
        t / self.gamma_si * 1e6
    }

    /// μs to internal time (1/Γ).
    pub fn us_to_time(&self, us: f64) -> f64 {
        us * 1e-6 * self.gamma_si
    }

    /// Internal angular rate (Γ) to kHz-scale rad/s (rad/s divided by 10³),
    /// the convention the trap frequencies and decay rates are quoted in.
    pub fn rate_to_khz(&self, r: f64) -> f64 {
        r * self.gamma_si / 1e3
    }
}
