use std::io::Write;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::field::SpinorField;
use crate::reduce::{add_vecs, reduce_rows};

/// Per-radius overlap over uniform bins spanning `[0, half_width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCurve {
    pub centers: Vec<f64>,
    pub bin_width: f64,
    /// `None` for bins containing no samples or no amplitude.
    pub values: Vec<Option<f64>>,
    /// Amplitude-weighted mean radius of each bin.
    pub mean_radius: Vec<Option<f64>>,
}

impl RadialCurve {
    /// `(mean radius, value)` for populated bins.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.mean_radius.iter().zip(&self.values).filter_map(|(r, v)| Some(((*r)?, (*v)?)))
    }

    /// `rho_over_sigma,value`, abscissa is the weighted mean radius.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "rho_over_sigma,value")?;
        for (r, v) in self.points() {
            writeln!(w, "{r:.9},{v:.12}")?;
        }
        Ok(())
    }
}

/// `f = |sum_bin <a|b>| / sqrt(sum_bin |a|^2 sum_bin |b|^2)` per radial bin.
pub fn radial_overlap(a: &SpinorField, b: &SpinorField, nbins: usize) -> Result<RadialCurve> {
    a.grid().ensure_same(b.grid())?;
    if nbins < 16 {
        return invalid(format!("need at least 16 radial bins, got {nbins}"));
    }
    let g = *a.grid();
    let rmax = g.half_width();
    let width = rmax / nbins as f64;
    let nx = g.nx();
    // per bin: re, im, |a|^2, |b|^2, weight, weight * rho
    let acc = reduce_rows(
        g.ny(),
        |j| {
            let mut acc = vec![0.0; nbins * 6];
            let y = g.y(j);
            for i in 0..nx {
                let rho = g.x(i).hypot(y);
                let bin = (rho / width) as usize;
                if bin >= nbins {
                    continue;
                }
                let k = j * nx + i;
                let (au, ad, bu, bd) = (a.up()[k], a.down()[k], b.up()[k], b.down()[k]);
                let c: Complex64 = au.conj() * bu + ad.conj() * bd;
                let na = au.norm_sqr() + ad.norm_sqr();
                let nb = bu.norm_sqr() + bd.norm_sqr();
                let s = &mut acc[bin * 6..bin * 6 + 6];
                s[0] += c.re;
                s[1] += c.im;
                s[2] += na;
                s[3] += nb;
                s[4] += na + nb;
                s[5] += (na + nb) * rho;
            }
            acc
        },
        add_vecs,
    )
    .expect("grid has rows");
    let mut values = Vec::with_capacity(nbins);
    let mut mean_radius = Vec::with_capacity(nbins);
    for s in acc.chunks(6) {
        let denom = (s[2] * s[3]).sqrt();
        if denom > 0.0 && s[4] > 0.0 {
            values.push(Some(s[0].hypot(s[1]) / denom));
            mean_radius.push(Some(s[5] / s[4]));
        } else {
            values.push(None);
            mean_radius.push(None);
        }
    }
    Ok(RadialCurve {
        centers: (0..nbins).map(|b| (b as f64 + 0.5) * width).collect(),
        bin_width: width,
        values,
        mean_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gaussian_wavepacket, SpinDirection};
    use crate::grid::GridSpec;
    use crate::operators::{apply_magnetic_spp, apply_quadrupole};
    use std::f64::consts::PI;

    #[test]
    fn self_overlap_is_one_and_symmetric() {
        let g = GridSpec::new(128, 128, 8.0).unwrap();
        let a = gaussian_wavepacket(&g, (0.0, 0.0), SpinDirection::plus_z()).unwrap();
        let a = apply_quadrupole(&a, 1.82, 0.0).unwrap();
        let b = gaussian_wavepacket(&g, (0.0, 0.0), SpinDirection::plus_x()).unwrap();
        let b = apply_magnetic_spp(&b, -1.0, PI / 2.0).unwrap();
        let aa = radial_overlap(&a, &a, 32).unwrap();
        for (_, v) in aa.points() {
            assert!((v - 1.0).abs() < 1e-9);
        }
        let ab = radial_overlap(&a, &b, 32).unwrap();
        let ba = radial_overlap(&b, &a, 32).unwrap();
        for ((_, x), (_, y)) in ab.points().zip(ba.points()) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(radial_overlap(&a, &b, 8).is_err());
    }
}
