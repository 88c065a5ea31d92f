//! Declarative operator sequences.

use serde::{Deserialize, Serialize};

use super::*;
use crate::error::Error;

/// Orientation of the second LOV gradient relative to the first: each sign
/// picks `+pi/2` or `-pi/2` for the gradient and field directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[i8; 2]", into = "[i8; 2]")]
pub struct LovSigns {
    pub gradient: i8,
    pub field: i8,
}

impl Default for LovSigns {
    /// The quadrupole-like arrangement `(U_{pi,0} U_{pi/2,pi/2})^N`.
    fn default() -> Self {
        LovSigns { gradient: -1, field: 1 }
    }
}

impl TryFrom<[i8; 2]> for LovSigns {
    type Error = String;
    fn try_from(v: [i8; 2]) -> std::result::Result<Self, String> {
        if v.iter().all(|s| *s == 1 || *s == -1) {
            Ok(LovSigns { gradient: v[0], field: v[1] })
        } else {
            Err(format!("LOV signs must be +1 or -1, got {v:?}"))
        }
    }
}

impl From<LovSigns> for [i8; 2] {
    fn from(s: LovSigns) -> Self {
        [s.gradient, s.field]
    }
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorStep {
    Spp {
        q: f64,
        #[serde(default, skip_serializing_if = "is_zero", deserialize_with = "crate::angle::deserialize")]
        alpha0: f64,
    },
    MagneticSpp {
        q: f64,
        #[serde(default, skip_serializing_if = "is_zero", deserialize_with = "crate::angle::deserialize")]
        beta: f64,
    },
    Quadrupole {
        rho_c: f64,
        #[serde(default, skip_serializing_if = "is_zero", deserialize_with = "crate::angle::deserialize")]
        delta: f64,
    },
    Bb1 {
        rho_c: f64,
    },
    HigherOrderQ {
        j: u32,
        rho_c: f64,
    },
    LinearGradient {
        #[serde(deserialize_with = "crate::angle::deserialize")]
        phi_g: f64,
        #[serde(deserialize_with = "crate::angle::deserialize")]
        phi_m: f64,
        rho_c: f64,
    },
    Lov {
        n: u32,
        #[serde(default)]
        signs: LovSigns,
        rho_c: f64,
    },
    SpinRotation {
        axis: SpinDirection,
        #[serde(deserialize_with = "crate::angle::deserialize")]
        angle: f64,
    },
    SpinProjection {
        direction: SpinDirection,
    },
}

impl OperatorStep {
    pub fn kind(&self) -> &'static str {
        match self {
            OperatorStep::Spp { .. } => "spp",
            OperatorStep::MagneticSpp { .. } => "magnetic_spp",
            OperatorStep::Quadrupole { .. } => "quadrupole",
            OperatorStep::Bb1 { .. } => "bb1",
            OperatorStep::HigherOrderQ { .. } => "higher_order_q",
            OperatorStep::LinearGradient { .. } => "linear_gradient",
            OperatorStep::Lov { .. } => "lov",
            OperatorStep::SpinRotation { .. } => "spin_rotation",
            OperatorStep::SpinProjection { .. } => "spin_projection",
        }
    }

    /// Projections and the higher-order sequence discard probability.
    pub fn is_unitary(&self) -> bool {
        !matches!(self, OperatorStep::SpinProjection { .. } | OperatorStep::HigherOrderQ { .. })
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        let fin = |name: &str, v: f64| if v.is_finite() { Ok(()) } else { Err(format!("{name} must be finite")) };
        match *self {
            OperatorStep::Spp { q, alpha0 } => fin("q", q).and(fin("alpha0", alpha0)),
            OperatorStep::MagneticSpp { q, beta } => fin("q", q).and(fin("beta", beta)),
            OperatorStep::Quadrupole { rho_c, delta } => pos("rho_c", rho_c).and(fin("delta", delta)),
            OperatorStep::Bb1 { rho_c } | OperatorStep::HigherOrderQ { rho_c, .. } => pos("rho_c", rho_c),
            OperatorStep::LinearGradient { phi_g, phi_m, rho_c } => {
                pos("rho_c", rho_c).and(fin("phi_g", phi_g)).and(fin("phi_m", phi_m))
            }
            OperatorStep::Lov { n, rho_c, .. } => {
                if n == 0 {
                    Err("n must be at least 1".into())
                } else {
                    pos("rho_c", rho_c)
                }
            }
            OperatorStep::SpinRotation { angle, .. } => fin("angle", angle),
            OperatorStep::SpinProjection { .. } => Ok(()),
        }
    }

    /// Applies the step; the second value is the retained probability fraction.
    pub fn apply(&self, psi: &SpinorField) -> Result<(SpinorField, f64)> {
        let unitary = |f: Result<SpinorField>| f.map(|f| (f, 1.0));
        match *self {
            OperatorStep::Spp { q, alpha0 } => unitary(apply_spp(psi, q, alpha0)),
            OperatorStep::MagneticSpp { q, beta } => unitary(apply_magnetic_spp(psi, q, beta)),
            OperatorStep::Quadrupole { rho_c, delta } => unitary(apply_quadrupole(psi, rho_c, delta)),
            OperatorStep::Bb1 { rho_c } => unitary(apply_bb1(psi, rho_c)),
            OperatorStep::HigherOrderQ { j, rho_c } => apply_higher_order(psi, j, rho_c).map(|p| (p.field, p.survival)),
            OperatorStep::LinearGradient { phi_g, phi_m, rho_c } => unitary(apply_gradient(psi, phi_g, phi_m, rho_c)),
            OperatorStep::Lov { n, signs, rho_c } => unitary(apply_lov(psi, n, signs, rho_c)),
            OperatorStep::SpinRotation { axis, angle } => unitary(apply_spin_rotation(psi, axis, angle)),
            OperatorStep::SpinProjection { direction } => {
                let p = project_spin(psi, direction);
                Ok((p.field, p.survival))
            }
        }
    }
}

/// Reverses an operator product (rightmost factor first) into traversal order.
pub fn traversal_order(product: &[OperatorStep]) -> Vec<OperatorStep> {
    product.iter().rev().cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub index: usize,
    pub kind: &'static str,
    pub survival: f64,
    pub norm_sqr: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub field: SpinorField,
    pub log: Vec<StepRecord>,
}

impl PipelineRun {
    /// Product of per-step survival fractions.
    pub fn survival(&self) -> f64 {
        self.log.iter().map(|r| r.survival).product()
    }
}

/// Applies `steps` in list order.
pub fn run_pipeline(psi: &SpinorField, steps: &[OperatorStep]) -> Result<PipelineRun> {
    let mut field = psi.clone();
    let mut log = Vec::with_capacity(steps.len());
    for (index, step) in steps.iter().enumerate() {
        let fail = |reason: String| Error::InvalidStep { index, kind: step.kind().to_string(), reason };
        step.validate().map_err(fail)?;
        let (next, survival) = step.apply(&field).map_err(|e| match e {
            Error::NonFinite(_) => e,
            e => fail(e.to_string()),
        })?;
        next.validate()?;
        field = next;
        log.push(StepRecord { index, kind: step.kind(), survival, norm_sqr: field.norm_sqr() });
    }
    Ok(PipelineRun { field, log })
}
