use std::path::Path;

use pauli_core::axial::{AxialGrid, AxialProfile, GridMapping};
use pauli_core::landau::{LandauBasisSpec, RadialProfile};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Toeplitz,
    Constants,
    Inequalities,
    Resonances,
    Spectrum,
    Report,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Toeplitz => "toeplitz",
            ExperimentKind::Constants => "constants",
            ExperimentKind::Inequalities => "inequalities",
            ExperimentKind::Resonances => "resonances",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialConfig {
    PowerLaw { alpha: f64, u0: f64 },
    Gaussian { rate: f64, amplitude: f64 },
    Tabulated { r: Vec<f64>, values: Vec<f64>, alpha: f64, u0: Option<f64> },
}

impl RadialConfig {
    pub fn build(&self) -> pauli_core::Result<RadialProfile> {
        match self {
            RadialConfig::PowerLaw { alpha, u0 } => RadialProfile::power_law(*alpha, *u0),
            RadialConfig::Gaussian { rate, amplitude } => RadialProfile::gaussian(*rate, *amplitude),
            RadialConfig::Tabulated { r, values, alpha, u0 } => {
                RadialProfile::tabulated(r.clone(), values.clone(), *alpha, *u0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AxialConfig {
    ExpBracket { delta: f64, amplitude: f64 },
    ExpAbs { rate: f64 },
    SmoothedBox { a: f64, s: f64 },
}

impl AxialConfig {
    pub fn build(&self) -> pauli_core::Result<AxialProfile> {
        match self {
            AxialConfig::ExpBracket { delta, amplitude } => AxialProfile::exp_bracket(*delta, *amplitude),
            AxialConfig::ExpAbs { rate } => AxialProfile::exp_abs(*rate),
            AxialConfig::SmoothedBox { a, s } => AxialProfile::smoothed_box(*a, *s),
        }
    }
}

/// Axial grid description; `scale` selects a sinh-graded grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub nodes: usize,
    #[serde(default)]
    pub scale: Option<f64>,
}

impl GridConfig {
    fn mapping(&self) -> GridMapping {
        match self.scale {
            Some(scale) => GridMapping::Sinh { scale },
            None => GridMapping::Uniform,
        }
    }

    pub fn build(&self) -> pauli_core::Result<AxialGrid> {
        AxialGrid::new(self.half_width, self.nodes, self.mapping())
    }

    /// No node floor; used for the characteristic-value families.
    pub fn build_small(&self) -> pauli_core::Result<AxialGrid> {
        AxialGrid::small(self.half_width, self.nodes, self.mapping())
    }
}

/// Log-spaced positive values `min..=max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let ratio = (self.max / self.min).ln();
        (0..self.points)
            .map(|i| self.min * (ratio * i as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusConfig {
    pub r_in: f64,
    pub r_out: f64,
    pub aperture: f64,
    /// Sectors `0..=l_max` scanned for characteristic values.
    pub l_max: usize,
    pub q_max: usize,
    pub grid: GridConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    pub b0: f64,
    pub nu: f64,
    pub radial: RadialConfig,
    pub axial: AxialConfig,
    pub q_max: usize,
    pub l_max: usize,
    #[serde(default = "default_radial_nodes")]
    pub radial_nodes: usize,
    /// Grid for the axial constants and effective blocks.
    pub constants_grid: GridConfig,
    /// Grid for the direct sector truncation.
    #[serde(default)]
    pub direct_grid: Option<GridConfig>,
    /// Thresholds `r` for eigenvalue counts below `−r²`.
    #[serde(default)]
    pub r_grid: Option<LogGrid>,
    /// Thresholds `s` for Toeplitz counting.
    #[serde(default)]
    pub s_grid: Option<LogGrid>,
    #[serde(default)]
    pub annulus: Option<AnnulusConfig>,
    #[serde(default = "default_sandwich_tolerance")]
    pub sandwich_tolerance: f64,
}

fn default_radial_nodes() -> usize {
    32
}

fn default_sandwich_tolerance() -> f64 {
    0.25
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError(format!("field `{name}`: must be positive and finite, got {v}")))
    }
}

fn wrap(field: &str) -> impl Fn(pauli_core::Error) -> ConfigError + '_ {
    move |e| ConfigError(format!("field `{field}`: {e}"))
}

fn log_grid(name: &str, g: &LogGrid) -> Result<(), ConfigError> {
    positive(&format!("{name}.min"), g.min)?;
    positive(&format!("{name}.max"), g.max)?;
    if g.max < g.min || g.points == 0 {
        return Err(ConfigError(format!("field `{name}`: need min <= max and points >= 1")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            ConfigError(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    /// Module-level constraints, checked before any computation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("b0", self.b0)?;
        if !self.nu.is_finite() {
            return Err(ConfigError("field `nu`: must be finite".into()));
        }
        LandauBasisSpec::new(self.b0, self.q_max, self.l_max, self.radial_nodes).map_err(wrap("radial_nodes"))?;
        self.radial.build().map_err(wrap("radial"))?;
        let axial = self.axial.build().map_err(wrap("axial"))?;
        let grid = self.constants_grid.build().map_err(wrap("constants_grid"))?;
        axial.check_grid(&grid).map_err(wrap("constants_grid"))?;
        if let Some(g) = &self.direct_grid {
            let grid = g.build_small().map_err(wrap("direct_grid"))?;
            axial.check_grid(&grid).map_err(wrap("direct_grid"))?;
        }
        if let Some(g) = &self.r_grid {
            log_grid("r_grid", g)?;
        }
        if let Some(g) = &self.s_grid {
            log_grid("s_grid", g)?;
        }
        if let Some(a) = &self.annulus {
            positive("annulus.r_in", a.r_in)?;
            positive("annulus.aperture", a.aperture)?;
            if a.r_out <= a.r_in {
                return Err(ConfigError("field `annulus.r_out`: must exceed r_in".into()));
            }
            let grid = a.grid.build_small().map_err(wrap("annulus.grid"))?;
            axial.check_grid(&grid).map_err(wrap("annulus.grid"))?;
        }
        if !(self.sandwich_tolerance >= 0.0) {
            return Err(ConfigError("field `sandwich_tolerance`: must be >= 0".into()));
        }
        Ok(())
    }

    pub fn basis(&self) -> LandauBasisSpec {
        LandauBasisSpec::new(self.b0, self.q_max, self.l_max, self.radial_nodes).expect("validated")
    }

    /// Hash of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        hash_text(&serde_json::to_string(self).expect("config serialises"))
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn hash_text(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "b0": 1.0, "nu": 0.3,
        "radial": {"kind": "power_law", "alpha": 2.0, "u0": 1.0},
        "axial": {"kind": "exp_bracket", "delta": 1.0, "amplitude": 1.0},
        "q_max": 2, "l_max": 10,
        "constants_grid": {"half_width": 16.0, "nodes": 256}
    }"#;

    #[test]
    fn parses_and_hashes_stably() {
        let a = ExperimentConfig::parse(SAMPLE).unwrap();
        let b = ExperimentConfig::parse(&SAMPLE.replace("  ", " ")).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn rejects_bad_fields() {
        let bad = SAMPLE.replace("\"b0\": 1.0", "\"b0\": -1.0");
        assert!(ExperimentConfig::parse(&bad).unwrap_err().0.contains("b0"));
        let unknown = SAMPLE.replace("\"q_max\"", "\"qmax\"");
        assert!(ExperimentConfig::parse(&unknown).unwrap_err().0.contains("line"));
        let short = SAMPLE.replace("16.0", "4.0");
        assert!(ExperimentConfig::parse(&short).unwrap_err().0.contains("constants_grid"));
    }
}
