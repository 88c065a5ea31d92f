use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::field::{gaussian_wavepacket, Spin, SpinDirection, SpinorField, CONTAINMENT_SIGMAS};
use crate::grid::GridSpec;
use crate::lg::{angular_momentum_about, decompose_about};
use crate::operators::apply_spp;

/// `<L_z>` about `axis` for a normalized field.
pub fn extrinsic_oam(psi: &SpinorField, axis: (f64, f64)) -> Result<f64> {
    if !(axis.0.is_finite() && axis.1.is_finite()) || !psi.grid().contains(axis.0, axis.1) {
        return invalid(format!("axis ({}, {}) is outside the window", axis.0, axis.1));
    }
    psi.ensure_normalized()?;
    Ok(angular_momentum_about(psi, axis))
}

/// Mode content of an SPP-imprinted packet displaced from the plate axis,
/// measured about the packet's own centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisplacedModes {
    pub rho0: f64,
    /// `p[n][ell]` for `n, ell` in {0, 1}.
    pub p: [[f64; 2]; 2],
    /// `<L_z>` about the packet centre.
    pub intrinsic_oam: f64,
}

/// For each displacement, a spin-up Gaussian at `(rho0, 0)` passes an SPP of
/// charge `q` on the grid axis and is decomposed about `(rho0, 0)`.
pub fn displaced_mode_probabilities(grid: &GridSpec, q: i32, rho0s: &[f64]) -> Result<Vec<DisplacedModes>> {
    let limit = grid.half_width() - CONTAINMENT_SIGMAS;
    rho0s
        .iter()
        .map(|&rho0| {
            if !(rho0.is_finite() && rho0 >= 0.0) || rho0 > limit + 1e-12 {
                return invalid(format!(
                    "displacement {rho0} must lie in [0, {limit}] to keep the packet inside the window"
                ));
            }
            let psi = gaussian_wavepacket(grid, (rho0, 0.0), SpinDirection::plus_z())?;
            let psi = apply_spp(&psi, q as f64, 0.0)?;
            let d = decompose_about(&psi, 1, (0, 1), (rho0, 0.0))?;
            let mut p = [[0.0; 2]; 2];
            for (n, row) in p.iter_mut().enumerate() {
                for (l, v) in row.iter_mut().enumerate() {
                    *v = d.probability(n, l as i32, Spin::Up).unwrap_or(0.0);
                }
            }
            Ok(DisplacedModes { rho0, p, intrinsic_oam: angular_momentum_about(&psi, (rho0, 0.0)) })
        })
        .collect()
}

pub fn write_displaced_csv<W: Write>(rows: &[DisplacedModes], mut w: W) -> std::io::Result<()> {
    writeln!(w, "rho0,p_n0_l0,p_n0_l1,p_n1_l0,p_n1_l1,intrinsic_oam")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.rho0, r.p[0][0], r.p[0][1], r.p[1][0], r.p[1][1], r.intrinsic_oam
        )?;
    }
    Ok(())
}

/// `y = amplitude * exp(-rate x^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit {
    pub amplitude: f64,
    pub rate: f64,
    /// Coefficient of determination on the untransformed data.
    pub r_squared: f64,
    pub points_used: usize,
}

/// Least squares on `ln y` against `x^2`, skipping points below `1e-12` of the
/// largest `y` where the logarithm is dominated by rounding.
pub fn gaussian_falloff_fit(xs: &[f64], ys: &[f64]) -> Result<GaussianFit> {
    if xs.len() != ys.len() {
        return invalid("x and y lengths differ");
    }
    let ymax = ys.iter().copied().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite() && **y > 1e-12 * ymax)
        .map(|(x, y)| (*x, *y))
        .collect();
    if pts.len() < 3 {
        return invalid("need at least three positive points for a Gaussian fit");
    }
    let n = pts.len() as f64;
    let u: Vec<f64> = pts.iter().map(|(x, _)| x * x).collect();
    let v: Vec<f64> = pts.iter().map(|(_, y)| y.ln()).collect();
    let (mu, mv) = (u.iter().sum::<f64>() / n, v.iter().sum::<f64>() / n);
    let suu: f64 = u.iter().map(|a| (a - mu).powi(2)).sum();
    if suu == 0.0 {
        return invalid("degenerate abscissae");
    }
    let suv: f64 = u.iter().zip(&v).map(|(a, b)| (a - mu) * (b - mv)).sum();
    let slope = suv / suu;
    let amplitude = (mv - slope * mu).exp();
    let rate = -slope;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|&(x, y)| (y - amplitude * (-rate * x * x).exp()).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(GaussianFit { amplitude, rate, r_squared, points_used: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_gaussian() {
        let xs: Vec<f64> = (0..10).map(|k| k as f64 * 0.4).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.7 * (-1.3 * x * x).exp()).collect();
        let f = gaussian_falloff_fit(&xs, &ys).unwrap();
        assert!((f.amplitude - 0.7).abs() < 1e-12 && (f.rate - 1.3).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unshifted_packet_has_no_extrinsic_oam() {
        let g = GridSpec::new(128, 128, 8.0).unwrap();
        let psi = gaussian_wavepacket(&g, (1.5, 0.7), SpinDirection::plus_x()).unwrap();
        assert!(extrinsic_oam(&psi, (-2.0, 1.0)).unwrap().abs() < 1e-9);
        assert!(extrinsic_oam(&psi, (9.0, 0.0)).is_err());
    }

    #[test]
    fn displacement_limit() {
        let g = GridSpec::new(64, 64, 8.0).unwrap();
        assert!(displaced_mode_probabilities(&g, 1, &[2.5]).is_err());
        let r = displaced_mode_probabilities(&g, 0, &[1.0]).unwrap();
        assert!((r[0].p[0][0] - 1.0).abs() < 1e-9);
    }
}
