//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use spinorbit::operators::apply_magnetic_spp;
use spinorbit::{gaussian_wavepacket, GridSpec, SpinDirection, SpinorField};

pub const RHO_C: f64 = 1.82;

pub fn grid(n: usize) -> GridSpec {
    GridSpec::new(n, n, 8.0).expect("bench grid")
}

pub fn packet(n: usize) -> SpinorField {
    gaussian_wavepacket(&grid(n), (0.0, 0.0), SpinDirection::plus_z()).expect("bench packet")
}

/// `q = 2` magnetic plate output on a +x packet in the wide tomography window.
pub fn petals(n: usize) -> SpinorField {
    let g = GridSpec::new(n, n, 16.0).expect("bench grid");
    let psi = gaussian_wavepacket(&g, (0.0, 0.0), SpinDirection::plus_x()).expect("bench packet");
    apply_magnetic_spp(&psi, 2.0, PI / 2.0).expect("bench plate")
}
