//! Job files: a pipeline plus the analyses to run on its output.

use std::collections::BTreeSet;
use std::path::{Component, Path};

use serde::{Deserialize, Serialize};
use spinorbit::config::{line_of, parse_toml, validate_steps, InputSpec, PipelineConfig};
use spinorbit::operators::{OperatorStep, PhysicalParams};
use spinorbit::{Error, GridSpec, Result, SpinDirection};
use toml::Spanned;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub grid: GridSpec,
    pub input: InputSpec,
    #[serde(default)]
    pub steps: Vec<Spanned<OperatorStep>>,
    /// Also dump the final field as `field.spinor`.
    #[serde(default)]
    pub save_field: bool,
    #[serde(default)]
    pub units: Option<PhysicalParams>,
    #[serde(default)]
    pub analyses: Vec<Spanned<Analysis>>,
}

/// Second pipeline that radial overlaps compare against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    /// Defaults to the job's input.
    #[serde(default)]
    pub input: Option<InputSpec>,
    #[serde(default)]
    pub steps: Vec<OperatorStep>,
}

fn yes() -> bool {
    true
}

fn default_angles() -> usize {
    spinorbit::tomography::DEFAULT_ANGLES
}

fn default_n_max() -> usize {
    20
}

fn default_ell() -> (i32, i32) {
    (-8, 8)
}

fn default_decimate() -> usize {
    1
}

fn default_q() -> i32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    Intensity {
        output: String,
        spin: SpinDirection,
        #[serde(default)]
        phase: bool,
        #[serde(default = "yes")]
        pgm: bool,
    },
    Momentum {
        output: String,
        spin: SpinDirection,
        /// Keep only the central `crop`^2 samples.
        #[serde(default)]
        crop: Option<usize>,
        #[serde(default = "yes")]
        pgm: bool,
    },
    Decompose {
        output: String,
        #[serde(default = "default_n_max")]
        n_max: usize,
        #[serde(default = "default_ell")]
        ell_range: (i32, i32),
        /// Cartesian centre of the mode basis.
        #[serde(default)]
        center: (f64, f64),
    },
    RadialOverlap {
        output: String,
        reference: Reference,
        /// Defaults to 16 bins per unit radius.
        #[serde(default)]
        nbins: Option<usize>,
    },
    Texture {
        output: String,
        #[serde(default = "default_decimate")]
        decimate: usize,
    },
    Sinogram {
        output: String,
        spin: SpinDirection,
        #[serde(default = "default_angles")]
        angles: usize,
    },
    Reconstruct {
        output: String,
        spin: SpinDirection,
        #[serde(default = "default_angles")]
        angles: usize,
        /// Output side in pixels; defaults to a quarter of the grid.
        #[serde(default)]
        size: Option<usize>,
        #[serde(default = "yes")]
        pgm: bool,
    },
    Oam {
        output: String,
        /// Cartesian axis; defaults to the grid origin.
        #[serde(default)]
        axis: (f64, f64),
    },
    DisplacedProbabilities {
        output: String,
        #[serde(default = "default_q")]
        q: i32,
        rho0: Vec<f64>,
    },
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Intensity { .. } => "intensity",
            Analysis::Momentum { .. } => "momentum",
            Analysis::Decompose { .. } => "decompose",
            Analysis::RadialOverlap { .. } => "radial_overlap",
            Analysis::Texture { .. } => "texture",
            Analysis::Sinogram { .. } => "sinogram",
            Analysis::Reconstruct { .. } => "reconstruct",
            Analysis::Oam { .. } => "oam",
            Analysis::DisplacedProbabilities { .. } => "displaced_probabilities",
        }
    }

    pub fn output(&self) -> &str {
        match self {
            Analysis::Intensity { output, .. }
            | Analysis::Momentum { output, .. }
            | Analysis::Decompose { output, .. }
            | Analysis::RadialOverlap { output, .. }
            | Analysis::Texture { output, .. }
            | Analysis::Sinogram { output, .. }
            | Analysis::Reconstruct { output, .. }
            | Analysis::Oam { output, .. }
            | Analysis::DisplacedProbabilities { output, .. } => output,
        }
    }

    fn validate(&self, grid: &GridSpec) -> std::result::Result<(), String> {
        let out = Path::new(self.output());
        if self.output().is_empty() || !out.components().all(|c| matches!(c, Component::Normal(_))) {
            return Err(format!("output '{}' must be a relative path without '..'", self.output()));
        }
        match self {
            Analysis::Decompose { ell_range, .. } if ell_range.0 > ell_range.1 => {
                Err(format!("empty ell_range [{}, {}]", ell_range.0, ell_range.1))
            }
            Analysis::RadialOverlap { reference, nbins, .. } => {
                if matches!(nbins, Some(n) if *n < 16) {
                    return Err("nbins must be at least 16".into());
                }
                for (i, s) in reference.steps.iter().enumerate() {
                    s.validate().map_err(|e| format!("reference step {i} ({}): {e}", s.kind()))?;
                }
                Ok(())
            }
            Analysis::Momentum { crop: Some(c), .. }
                if grid.is_square() && (*c > grid.nx() || !(grid.nx() - c).is_multiple_of(2)) =>
            {
                Err(format!("crop {c} must not exceed the grid and must match its parity"))
            }
            Analysis::Texture { decimate: 0, .. } => Err("decimate must be at least 1".into()),
            Analysis::Sinogram { angles, .. } | Analysis::Reconstruct { angles, .. }
                if *angles < spinorbit::tomography::MIN_ANGLES =>
            {
                Err(format!("need at least {} angles", spinorbit::tomography::MIN_ANGLES))
            }
            Analysis::Sinogram { .. } | Analysis::Reconstruct { .. } | Analysis::Momentum { .. }
                if !grid.is_square() =>
            {
                Err("momentum-space analyses need a square grid".into())
            }
            Analysis::DisplacedProbabilities { rho0, .. } if rho0.is_empty() => Err("rho0 is empty".into()),
            _ => Ok(()),
        }
    }
}

impl JobConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let job: JobConfig = parse_toml(src)?;
        validate_steps(src, &job.steps)?;
        let mut seen = BTreeSet::new();
        for a in &job.analyses {
            let line = line_of(src, a.span().start);
            let a = a.get_ref();
            a.validate(&job.grid)
                .map_err(|message| Error::Config { line, message: format!("{}: {message}", a.kind()) })?;
            if !seen.insert(a.output().to_string()) {
                return Err(Error::Config { line, message: format!("output '{}' used twice", a.output()) });
            }
        }
        Ok(job)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig { grid: self.grid, input: self.input.clone(), steps: self.steps.clone() }
    }

    pub fn analyses(&self) -> impl Iterator<Item = &Analysis> {
        self.analyses.iter().map(|a| a.get_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "[grid]\nnx = 64\nny = 64\nhalf_width = 8.0\n\n[input]\nspin = \"+z\"\n";

    #[test]
    fn parses_every_kind() {
        let src = format!(
            "{HEAD}
[[analyses]]
kind = \"intensity\"
output = \"i\"
spin = \"+x\"
phase = true

[[analyses]]
kind = \"radial_overlap\"
output = \"curves/q\"
[analyses.reference]
steps = [{{ kind = \"quadrupole\", rho_c = 1.82 }}]

[[analyses]]
kind = \"displaced_probabilities\"
output = \"d\"
rho0 = [0.0, 1.0]
"
        );
        let job = JobConfig::from_toml(&src).unwrap();
        let kinds: Vec<_> = job.analyses().map(|a| a.kind()).collect();
        assert_eq!(kinds, ["intensity", "radial_overlap", "displaced_probabilities"]);
    }

    #[test]
    fn bundled_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut n = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "toml") {
                let src = std::fs::read_to_string(&path).unwrap();
                let job = JobConfig::from_toml(&src).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                assert!(!job.analyses.is_empty(), "{}", path.display());
                n += 1;
            }
        }
        assert!(n >= 8);
    }

    #[test]
    fn rejects_bad_outputs_by_line() {
        let src = format!("{HEAD}\n[[analyses]]\nkind = \"texture\"\noutput = \"../x\"\n");
        match JobConfig::from_toml(&src) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
        let dup = format!(
            "{HEAD}\n[[analyses]]\nkind = \"texture\"\noutput = \"t\"\n\n[[analyses]]\nkind = \"oam\"\noutput = \"t\"\n"
        );
        assert!(matches!(JobConfig::from_toml(&dup), Err(Error::Config { line: 13, .. })));
    }
}
