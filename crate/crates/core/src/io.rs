//! Binary dumps and quick-look images.
//!
//! Dump layout (little endian): 16-byte magic, `u32 nx`, `u32 ny`,
//! `f64 half_width`, then samples in row-major order. Spinor dumps store
//! `up.re, up.im, down.re, down.im` per sample; scalar dumps one `f64`.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::analysis::{Domain, ScalarMap2D};
use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::grid::GridSpec;

pub const FIELD_MAGIC: &[u8; 16] = b"SPINORFIELD\0\0\0\0\0";
pub const SCALAR_MAGIC: &[u8; 16] = b"SCALARMAP2D\0\0\0\0\0";

fn write_header<W: Write>(w: &mut W, magic: &[u8; 16], g: &GridSpec) -> Result<()> {
    let nx = u32::try_from(g.nx()).map_err(|_| Error::Format("nx too large".into()))?;
    let ny = u32::try_from(g.ny()).map_err(|_| Error::Format("ny too large".into()))?;
    w.write_all(magic)?;
    w.write_all(&nx.to_le_bytes())?;
    w.write_all(&ny.to_le_bytes())?;
    w.write_all(&g.half_width().to_le_bytes())?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R, magic: &[u8; 16]) -> Result<GridSpec> {
    let mut m = [0u8; 16];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::Format(format!("bad magic {:?}", String::from_utf8_lossy(&m))));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let nx = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let ny = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    GridSpec::new(nx, ny, f64::from_le_bytes(b8)).map_err(|e| Error::Format(e.to_string()))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn write_field<W: Write>(mut w: W, psi: &SpinorField) -> Result<()> {
    write_header(&mut w, FIELD_MAGIC, psi.grid())?;
    let mut buf = Vec::with_capacity(psi.grid().len() * 32);
    for (u, d) in psi.up().iter().zip(psi.down()) {
        for v in [u.re, u.im, d.re, d.im] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<SpinorField> {
    let g = read_header(&mut r, FIELD_MAGIC)?;
    let v = read_f64s(&mut r, g.len() * 4)?;
    let up = v.chunks_exact(4).map(|c| Complex64::new(c[0], c[1])).collect();
    let down = v.chunks_exact(4).map(|c| Complex64::new(c[2], c[3])).collect();
    SpinorField::from_components(g, up, down)
}

pub fn write_scalar_map<W: Write>(mut w: W, map: &ScalarMap2D) -> Result<()> {
    write_header(&mut w, SCALAR_MAGIC, map.grid())?;
    let mut buf = Vec::with_capacity(map.values().len() * 8);
    for v in map.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// The dump does not record the domain; the caller supplies it.
pub fn read_scalar_map<R: Read>(mut r: R, domain: Domain) -> Result<ScalarMap2D> {
    let g = read_header(&mut r, SCALAR_MAGIC)?;
    let v = read_f64s(&mut r, g.len())?;
    ScalarMap2D::new(g, domain, v)
}

/// Binary 8-bit PGM, linearly scaled so the map minimum is 0 and its maximum
/// 255. The top image row is the largest `y`.
pub fn write_pgm<W: Write>(mut w: W, map: &ScalarMap2D) -> Result<()> {
    let g = map.grid();
    let (lo, hi) = (map.min(), map.max());
    let span = if hi > lo { hi - lo } else { 1.0 };
    write!(w, "P5\n{} {}\n255\n", g.nx(), g.ny())?;
    let mut buf = Vec::with_capacity(g.len());
    for j in (0..g.ny()).rev() {
        for i in 0..g.nx() {
            let v = map.get(i, j);
            let s = if v.is_finite() { ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) } else { 0.0 };
            buf.push(s as u8);
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gaussian_wavepacket, SpinDirection};

    #[test]
    fn field_round_trip() {
        let g = GridSpec::new(36, 32, 3.0).unwrap();
        let psi = gaussian_wavepacket(&g, (0.5, 1.0), SpinDirection::new(1.0, 2.0, -0.5).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &psi).unwrap();
        assert_eq!(buf.len(), 32 + 36 * 32 * 32);
        assert_eq!(&buf[..16], FIELD_MAGIC);
        let back = read_field(&buf[..]).unwrap();
        assert_eq!(back.up(), psi.up());
        assert_eq!(back.down(), psi.down());
        assert!(read_field(&buf[..40]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_field(&bad[..]), Err(Error::Format(_))));
    }

    #[test]
    fn scalar_round_trip_and_pgm() {
        let g = GridSpec::new(32, 34, 1.0).unwrap();
        let m = ScalarMap2D::new(g, Domain::Momentum, (0..32 * 34).map(|v| v as f64).collect()).unwrap();
        let mut buf = Vec::new();
        write_scalar_map(&mut buf, &m).unwrap();
        assert_eq!(read_scalar_map(&buf[..], Domain::Momentum).unwrap(), m);
        let mut img = Vec::new();
        write_pgm(&mut img, &m).unwrap();
        let header = b"P5\n32 34\n255\n";
        assert_eq!(&img[..header.len()], header);
        // first written row is j = 33
        let top = 33.0 * 32.0;
        let max: f64 = 32.0 * 34.0 - 1.0;
        assert_eq!(img[header.len()], (top / max * 255.0).round() as u8);
        assert_eq!(*img.last().unwrap(), (31.0 / max * 255.0).round() as u8);
    }
}
