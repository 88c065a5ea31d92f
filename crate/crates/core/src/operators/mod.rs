//! Preparation operators. All act pointwise on the spinor field.
//!
//! Operator products are written rightmost-first, as in the physics
//! literature; pipelines list steps in traversal order. `traversal_order`
//! converts between the two.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::field::{SpinDirection, SpinorField, Warning};

mod physical;
mod pipeline;

pub use physical::{
    lattice_constant, lattice_constant_meters, rho_c_from_physical, rho_c_meters, PhysicalParams, RhoC, GAMMA_N,
};
pub use pipeline::{run_pipeline, traversal_order, LovSigns, OperatorStep, PipelineRun, StepRecord};

/// Row-major 2x2 complex matrix acting on `(up, down)`.
pub type Mat2 = [[Complex64; 2]; 2];

const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
fn apply_mat(m: &Mat2, u: Complex64, d: Complex64) -> (Complex64, Complex64) {
    (m[0][0] * u + m[0][1] * d, m[1][0] * u + m[1][1] * d)
}

/// `m1 * m0` (m0 acts first).
pub fn mat_mul(m1: &Mat2, m0: &Mat2) -> Mat2 {
    let mut out = [[Complex64::default(); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = m1[r][0] * m0[0][c] + m1[r][1] * m0[1][c];
        }
    }
    out
}

fn check_rho_c(rho_c: f64) -> Result<()> {
    if rho_c.is_finite() && rho_c > 0.0 {
        Ok(())
    } else {
        invalid(format!("rho_c must be positive, got {rho_c}"))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be finite, got {v}"))
    }
}

fn flag_charge(mut psi: SpinorField, q: f64) -> SpinorField {
    if q.fract() != 0.0 {
        psi.push_warning(Warning::NonIntegerCharge { q });
    }
    psi
}

/// Both components times `exp(i (alpha0 + q phi))` about the grid origin.
pub fn apply_spp(psi: &SpinorField, q: f64, alpha0: f64) -> Result<SpinorField> {
    check_finite("q", q)?;
    check_finite("alpha0", alpha0)?;
    let out = psi.map_pointwise(|x, y, u, d| {
        let p = Complex64::cis(alpha0 + q * y.atan2(x));
        (u * p, d * p)
    });
    Ok(flag_charge(out, q))
}

/// Down component times `exp(i (beta + q phi))`; up unchanged.
pub fn apply_magnetic_spp(psi: &SpinorField, q: f64, beta: f64) -> Result<SpinorField> {
    check_finite("q", q)?;
    check_finite("beta", beta)?;
    let out = psi.map_pointwise(|x, y, u, d| (u, d * Complex64::cis(beta + q * y.atan2(x))));
    Ok(flag_charge(out, q))
}

/// Local quadrupole rotation at `(x, y)`, conjugated by `exp(-i delta sigma_z / 2)`:
/// `[[c, i s e^{i(phi-delta)}], [i s e^{-i(phi-delta)}, c]]` with angle `pi rho / (2 rho_c)`.
pub fn quadrupole_matrix(x: f64, y: f64, rho_c: f64, delta: f64) -> Mat2 {
    let rho = x.hypot(y);
    let (s, c) = (PI * rho / (2.0 * rho_c)).sin_cos();
    let e = if rho > 0.0 { Complex64::new(x / rho, y / rho) * Complex64::cis(-delta) } else { Complex64::new(1.0, 0.0) };
    let c = Complex64::new(c, 0.0);
    [[c, I * s * e], [I * s * e.conj(), c]]
}

pub fn apply_quadrupole(psi: &SpinorField, rho_c: f64, delta: f64) -> Result<SpinorField> {
    check_rho_c(rho_c)?;
    check_finite("delta", delta)?;
    Ok(psi.map_pointwise(|x, y, u, d| apply_mat(&quadrupole_matrix(x, y, rho_c, delta), u, d)))
}

/// BB1 phase `acos(-1/8)`.
pub fn bb1_delta1() -> f64 {
    (-1.0f64 / 8.0).acos()
}

/// BB1 factors as `(rho_c, delta)` in operator-product order (leftmost first).
pub fn bb1_factors(rho_c: f64) -> [(f64, f64); 4] {
    let d1 = bb1_delta1();
    [(rho_c / 2.0, d1), (rho_c / 4.0, 3.0 * d1), (rho_c / 2.0, d1), (rho_c, 0.0)]
}

pub fn apply_bb1(psi: &SpinorField, rho_c: f64) -> Result<SpinorField> {
    check_rho_c(rho_c)?;
    let mut out = psi.clone();
    for (r, d) in bb1_factors(rho_c).into_iter().rev() {
        out = apply_quadrupole(&out, r, d)?;
    }
    Ok(out)
}

/// Field plus the retained probability of a post-selecting operation.
#[derive(Debug, Clone)]
pub struct Projected {
    pub field: SpinorField,
    /// Output norm^2 over input norm^2.
    pub survival: f64,
}

fn survival(before: f64, after: &SpinorField) -> f64 {
    if before > 0.0 {
        after.norm_sqr() / before
    } else {
        0.0
    }
}

/// `(U_Q (-i sigma_x) P_down)^j U_Q`, unnormalized.
pub fn apply_higher_order(psi: &SpinorField, j: u32, rho_c: f64) -> Result<Projected> {
    check_rho_c(rho_c)?;
    let before = psi.norm_sqr();
    let mut out = apply_quadrupole(psi, rho_c, 0.0)?;
    for _ in 0..j {
        // P_down then -i sigma_x moves the kept down amplitude to up.
        out = out.map_pointwise(|_, _, _, d| (-I * d, Complex64::default()));
        out = apply_quadrupole(&out, rho_c, 0.0)?;
    }
    let survival = survival(before, &out);
    Ok(Projected { field: out, survival })
}

/// `cos t - i sin t (sigma_x cos phi_m + sigma_y sin phi_m)` with
/// `t = pi (x cos phi_g + y sin phi_g) / (2 rho_c)`.
pub fn gradient_matrix(x: f64, y: f64, phi_g: f64, phi_m: f64, rho_c: f64) -> Mat2 {
    let t = PI * (x * phi_g.cos() + y * phi_g.sin()) / (2.0 * rho_c);
    let (s, c) = t.sin_cos();
    let c = Complex64::new(c, 0.0);
    [[c, -I * s * Complex64::cis(-phi_m)], [-I * s * Complex64::cis(phi_m), c]]
}

pub fn apply_gradient(psi: &SpinorField, phi_g: f64, phi_m: f64, rho_c: f64) -> Result<SpinorField> {
    check_rho_c(rho_c)?;
    check_finite("phi_g", phi_g)?;
    check_finite("phi_m", phi_m)?;
    Ok(psi.map_pointwise(|x, y, u, d| apply_mat(&gradient_matrix(x, y, phi_g, phi_m, rho_c), u, d)))
}

/// Gradient directions `(first, second)` of one LOV repetition; `second` acts first.
pub fn lov_directions(signs: LovSigns) -> ((f64, f64), (f64, f64)) {
    let h = PI / 2.0;
    let first = (h - signs.gradient as f64 * h, h - signs.field as f64 * h);
    (first, (h, h))
}

/// `N` repetitions of a perpendicular gradient pair. Each gradient is
/// weakened to length `N rho_c` so the product approaches the quadrupole
/// `U_Q(rho_c)` as `N` grows; the lattice pitch is `2 N rho_c`.
pub fn apply_lov(psi: &SpinorField, n: u32, signs: LovSigns, rho_c: f64) -> Result<SpinorField> {
    check_rho_c(rho_c)?;
    if n == 0 {
        return invalid("LOV repetition count must be at least 1");
    }
    let ((g1, m1), (g2, m2)) = lov_directions(signs);
    let r = rho_c * n as f64;
    Ok(psi.map_pointwise(|x, y, mut u, mut d| {
        let a = gradient_matrix(x, y, g2, m2, r);
        let b = gradient_matrix(x, y, g1, m1, r);
        let cell = mat_mul(&b, &a);
        for _ in 0..n {
            (u, d) = apply_mat(&cell, u, d);
        }
        (u, d)
    }))
}

/// Global `exp(-i angle/2 n.sigma)`.
pub fn spin_rotation_matrix(axis: SpinDirection, angle: f64) -> Mat2 {
    let [nx, ny, nz] = axis.axis();
    let (s, c) = (angle / 2.0).sin_cos();
    [
        [Complex64::new(c, -s * nz), Complex64::new(-s * ny, -s * nx)],
        [Complex64::new(s * ny, -s * nx), Complex64::new(c, s * nz)],
    ]
}

pub fn apply_spin_rotation(psi: &SpinorField, axis: SpinDirection, angle: f64) -> Result<SpinorField> {
    check_finite("angle", angle)?;
    let m = spin_rotation_matrix(axis, angle);
    Ok(psi.map_pointwise(|_, _, u, d| apply_mat(&m, u, d)))
}

/// Keeps the component along `direction`; no renormalization.
pub fn project_spin(psi: &SpinorField, direction: SpinDirection) -> Projected {
    let s = direction.spinor();
    let (a, b) = (s.up(), s.down());
    let before = psi.norm_sqr();
    let field = psi.map_pointwise(|_, _, u, d| {
        let p = a.conj() * u + b.conj() * d;
        (a * p, b * p)
    });
    let survival = survival(before, &field);
    Projected { field, survival }
}
