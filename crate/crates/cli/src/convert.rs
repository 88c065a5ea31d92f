use serde::Serialize;
use spinorbit::operators::{lattice_constant_meters, rho_c_meters};
use spinorbit::Result;

#[derive(Debug, Default, Serialize, PartialEq)]
pub struct Conversion {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_c_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_c_over_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_constant_m: Option<f64>,
}

pub struct Inputs {
    pub v_z: f64,
    pub gamma_n: f64,
    pub gradient: Option<f64>,
    pub length: Option<f64>,
    pub field: Option<f64>,
    pub theta: Option<f64>,
    pub sigma: Option<f64>,
}

pub fn convert(p: &Inputs) -> Result<Conversion> {
    let mut out = Conversion::default();
    if let (Some(k), Some(d)) = (p.gradient, p.length) {
        let rc = rho_c_meters(p.v_z, p.gamma_n, k, d)?;
        out.rho_c_m = Some(rc);
        out.rho_c_over_sigma = p.sigma.map(|s| rc / s);
    }
    if let (Some(b), Some(theta)) = (p.field, p.theta) {
        out.lattice_constant_m = Some(lattice_constant_meters(p.v_z, p.gamma_n, b, theta)?);
    }
    Ok(out)
}

impl Conversion {
    pub fn lines(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Some(rc) = self.rho_c_m {
            v.push(format!("rho_c = {rc:.4e} m"));
        }
        if let Some(r) = self.rho_c_over_sigma {
            v.push(format!("rho_c / sigma = {r:.6}"));
        }
        if let Some(a) = self.lattice_constant_m {
            v.push(format!("a = {a:.4e} m"));
        }
        v
    }
}
