//! TOML pipeline descriptions.
//!
//! ```toml
//! [grid]
//! nx = 512
//! ny = 512
//! half_width = 8.0
//!
//! [input]
//! center = [0.0, 0.0]   # polar (xi0, phi0)
//! spin = "+z"
//!
//! [[steps]]
//! kind = "quadrupole"
//! rho_c = 1.82
//! ```

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::field::{gaussian_wavepacket, SpinDirection, SpinorField};
use crate::grid::GridSpec;
use crate::operators::{run_pipeline, OperatorStep, PipelineRun};

/// Real number that also accepts angle strings such as `"pi/3"`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AngleValue(pub f64);

impl<'de> Deserialize<'de> for AngleValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        crate::angle::deserialize(d).map(AngleValue)
    }
}

impl Serialize for AngleValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    /// Polar position `(xi0, phi0)` of the packet centre.
    #[serde(default)]
    pub center: [AngleValue; 2],
    pub spin: SpinDirection,
}

impl InputSpec {
    pub fn build(&self, grid: &GridSpec) -> Result<SpinorField> {
        gaussian_wavepacket(grid, (self.center[0].0, self.center[1].0), self.spin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub grid: GridSpec,
    pub input: InputSpec,
    #[serde(default)]
    pub steps: Vec<Spanned<OperatorStep>>,
}

/// 1-based line of a byte offset.
pub fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

/// Deserializes TOML, reporting the line of the offending item on failure.
pub fn parse_toml<T: DeserializeOwned>(src: &str) -> Result<T> {
    toml::from_str(src).map_err(|e| Error::Config {
        line: e.span().map(|s| line_of(src, s.start)).unwrap_or(0),
        message: e.message().trim().to_string(),
    })
}

/// Checks every step's parameters, reporting the first failure by line.
pub fn validate_steps(src: &str, steps: &[Spanned<OperatorStep>]) -> Result<()> {
    for (i, s) in steps.iter().enumerate() {
        if let Err(reason) = s.get_ref().validate() {
            return Err(Error::Config {
                line: line_of(src, s.span().start),
                message: format!("step {i} ({}): {reason}", s.get_ref().kind()),
            });
        }
    }
    Ok(())
}

impl PipelineConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: PipelineConfig = parse_toml(src)?;
        validate_steps(src, &cfg.steps)?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pipeline config serializes")
    }

    pub fn steps(&self) -> Vec<OperatorStep> {
        self.steps.iter().map(|s| s.get_ref().clone()).collect()
    }

    pub fn build_input(&self) -> Result<SpinorField> {
        self.input.build(&self.grid)
    }

    pub fn run(&self) -> Result<PipelineRun> {
        run_pipeline(&self.build_input()?, &self.steps())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const SRC: &str = r#"
[grid]
nx = 64
ny = 64
half_width = 8.0

[input]
center = [1.5, "pi/4"]
spin = "+x"

[[steps]]
kind = "magnetic_spp"
q = -1
beta = "pi/2"

[[steps]]
kind = "lov"
n = 2
rho_c = 1.82

[[steps]]
kind = "spin_projection"
direction = { theta = "pi/2", phi = 0 }
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = PipelineConfig::from_toml(SRC).unwrap();
        assert_eq!(cfg.input.center[1].0, PI / 4.0);
        assert_eq!(cfg.steps().len(), 3);
        assert_eq!(cfg.steps()[0], OperatorStep::MagneticSpp { q: -1.0, beta: PI / 2.0 });
        let text = cfg.to_toml();
        let again = PipelineConfig::from_toml(&text).unwrap();
        assert_eq!(again.steps(), cfg.steps());
        assert_eq!(again.grid, cfg.grid);
        assert_eq!(again.input, cfg.input);
        assert_eq!(again.to_toml(), text);
    }

    #[test]
    fn errors_name_the_line() {
        let bad = SRC.replace("rho_c = 1.82", "rho_c = -1.0");
        match PipelineConfig::from_toml(&bad) {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, 16, "{message}");
                assert!(message.contains("rho_c"));
            }
            other => panic!("{other:?}"),
        }
        let bad = SRC.replace("kind = \"lov\"", "kind = \"prism\"");
        match PipelineConfig::from_toml(&bad) {
            Err(Error::Config { line, .. }) => assert!((15..=18).contains(&line), "{line}"),
            other => panic!("{other:?}"),
        }
        let bad = SRC.replace("nx = 64", "nx = 1");
        assert!(matches!(PipelineConfig::from_toml(&bad), Err(Error::Config { line: 2..=5, .. })));
    }

    #[test]
    fn runs() {
        let run = PipelineConfig::from_toml(SRC).unwrap().run().unwrap();
        assert_eq!(run.log.len(), 3);
        assert!(run.survival() > 0.0 && run.survival() < 1.0);
    }
}
