use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::ScalarMap2D;
use crate::error::{invalid, Result};

pub const ANGULAR_SAMPLES: usize = 256;

/// Harmonics weaker than this fraction of the mean count as absent.
const HARMONIC_FLOOR: f64 = 1e-3;

fn check_map(map: &ScalarMap2D) -> Result<()> {
    if map.values().iter().any(|v| !v.is_finite()) {
        return invalid("map contains non-finite values");
    }
    if !(map.max() > 0.0) {
        return invalid("map is identically zero");
    }
    Ok(())
}

/// `A(phi_j) = sum_r r I(r, phi_j)` on 256 angles, radial step equal to the
/// sample pitch out to the inscribed radius, bilinear resampling.
pub fn azimuthal_profile(map: &ScalarMap2D) -> Vec<f64> {
    let g = map.grid();
    let dr = g.dx().min(g.dy());
    let nr = (g.half_width() / dr).floor() as usize;
    (0..ANGULAR_SAMPLES)
        .into_par_iter()
        .map(|j| {
            let (s, c) = (2.0 * PI * j as f64 / ANGULAR_SAMPLES as f64).sin_cos();
            (0..nr)
                .map(|i| {
                    let r = (i as f64 + 0.5) * dr;
                    r * map.sample_bilinear(r * c, r * s)
                })
                .sum()
        })
        .collect()
}

/// `|sum_j A_j e^{-2 pi i m j / 256}|` for `m = 0..=128`.
pub fn angular_harmonics(profile: &[f64]) -> Vec<f64> {
    let n = profile.len();
    (0..=n / 2)
        .map(|m| {
            profile
                .iter()
                .enumerate()
                .map(|(j, a)| Complex64::cis(-2.0 * PI * (m * j % n) as f64 / n as f64) * a)
                .sum::<Complex64>()
                .norm()
        })
        .collect()
}

/// Strongest angular harmonic `m >= 1`, or 0 when the map is azimuthally
/// uniform to one part in a thousand. Ties go to the smaller `m`.
pub fn rotational_symmetry_order(map: &ScalarMap2D) -> Result<usize> {
    check_map(map)?;
    let h = angular_harmonics(&azimuthal_profile(map));
    let dc = h[0];
    let mut best = (0, 0.0);
    for (m, &v) in h.iter().enumerate().skip(1) {
        if v > best.1 * (1.0 + 1e-9) {
            best = (m, v);
        }
    }
    if best.1 <= HARMONIC_FLOOR * dc {
        Ok(0)
    } else {
        Ok(best.0)
    }
}

/// Angle by which `b` is rotated relative to `a` (counter-clockwise positive),
/// from the circular cross-correlation peak of the azimuthal profiles with
/// parabolic refinement. Result in (-pi, pi].
pub fn estimate_rotation(a: &ScalarMap2D, b: &ScalarMap2D) -> Result<f64> {
    check_map(a)?;
    check_map(b)?;
    let (pa, pb) = (azimuthal_profile(a), azimuthal_profile(b));
    let n = pa.len();
    let ma = pa.iter().sum::<f64>() / n as f64;
    let mb = pb.iter().sum::<f64>() / n as f64;
    let corr: Vec<f64> = (0..n)
        .map(|s| (0..n).map(|j| (pa[j] - ma) * (pb[(j + s) % n] - mb)).sum())
        .collect();
    let (peak, _) = corr
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (s, &v)| if v > acc.1 { (s, v) } else { acc });
    let (l, c, r) = (corr[(peak + n - 1) % n], corr[peak], corr[(peak + 1) % n]);
    let den = l - 2.0 * c + r;
    let frac = if den < 0.0 { (0.5 * (l - r) / den).clamp(-0.5, 0.5) } else { 0.0 };
    let mut theta = (peak as f64 + frac) * 2.0 * PI / n as f64;
    if theta > PI {
        theta -= 2.0 * PI;
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Domain;
    use crate::grid::GridSpec;

    fn petals(m: f64, rot: f64) -> ScalarMap2D {
        let g = GridSpec::new(128, 128, 8.0).unwrap();
        let mut v = Vec::new();
        for j in 0..128 {
            for i in 0..128 {
                let (x, y) = (g.x(i), g.y(j));
                let r2 = x * x + y * y;
                v.push((-r2 / 2.0).exp() * r2 * (1.0 + (m * (y.atan2(x) - rot)).cos()));
            }
        }
        ScalarMap2D::new(g, Domain::Position, v).unwrap()
    }

    #[test]
    fn orders() {
        for m in 1..=4 {
            assert_eq!(rotational_symmetry_order(&petals(m as f64, 0.3)).unwrap(), m);
        }
        assert_eq!(rotational_symmetry_order(&petals(0.0, 0.0)).unwrap(), 0);
        let g = GridSpec::new(32, 32, 1.0).unwrap();
        assert!(rotational_symmetry_order(&ScalarMap2D::new(g, Domain::Position, vec![0.0; 1024]).unwrap()).is_err());
    }

    #[test]
    fn rotation_estimate() {
        let a = petals(1.0, 0.0);
        for rot in [0.4, -1.1, 2.0] {
            let est = estimate_rotation(&a, &petals(1.0, rot)).unwrap();
            assert!((est - rot).abs() < 2.0 * PI / 256.0, "{rot} {est}");
        }
    }
}
