//! Conversions from magnet parameters to grid units.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Neutron gyromagnetic ratio |gamma_n| in rad s^-1 T^-1 (CODATA 2018).
pub const GAMMA_N: f64 = 1.832_471_71e8;

fn default_gamma() -> f64 {
    GAMMA_N
}

/// SI magnet and beam parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Longitudinal velocity, m/s.
    pub v_z: f64,
    #[serde(default = "default_gamma")]
    pub gamma_n: f64,
    /// Quadrupole gradient, T/m.
    pub gradient: f64,
    /// Quadrupole length, m.
    pub length: f64,
    /// Prism field magnitude, T.
    pub field: f64,
    /// Prism inclination, radians.
    #[serde(deserialize_with = "crate::angle::deserialize")]
    pub theta: f64,
    /// Transverse coherence length, m.
    pub sigma: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        invalid(format!("{name} must be positive, got {v}"))
    }
}

/// `pi v_z / (gamma_n K d)` in metres.
pub fn rho_c_meters(v_z: f64, gamma_n: f64, gradient: f64, length: f64) -> Result<f64> {
    positive("v_z", v_z)?;
    positive("gamma_n", gamma_n)?;
    positive("gradient", gradient)?;
    positive("length", length)?;
    Ok(PI * v_z / (gamma_n * gradient * length))
}

/// `2 pi v_z / (gamma_n |B| tan theta)` in metres.
pub fn lattice_constant_meters(v_z: f64, gamma_n: f64, field: f64, theta: f64) -> Result<f64> {
    positive("v_z", v_z)?;
    positive("gamma_n", gamma_n)?;
    if !(field.is_finite() && field != 0.0) {
        return invalid(format!("field must be nonzero, got {field}"));
    }
    if !theta.is_finite() || theta.cos().abs() < 1e-12 {
        return invalid("prism inclination of pi/2 is degenerate");
    }
    let t = theta.tan();
    if t.abs() < 1e-15 {
        return invalid("prism inclination with tan(theta) = 0 gives no gradient");
    }
    Ok(2.0 * PI * v_z / (gamma_n * field.abs() * t.abs()))
}

/// Characteristic quadrupole radius in metres and in units of sigma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoC {
    pub meters: f64,
    pub over_sigma: f64,
}

pub fn rho_c_from_physical(p: &PhysicalParams) -> Result<RhoC> {
    positive("sigma", p.sigma)?;
    let meters = rho_c_meters(p.v_z, p.gamma_n, p.gradient, p.length)?;
    Ok(RhoC { meters, over_sigma: meters / p.sigma })
}

pub fn lattice_constant(p: &PhysicalParams) -> Result<f64> {
    lattice_constant_meters(p.v_z, p.gamma_n, p.field, p.theta)
}
