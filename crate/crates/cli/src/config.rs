//! Scenario configuration: TOML sections with documented defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wgcorr::recurrence::ScanCorrelation;
use wgcorr::states::sigma_from_fwhm;
use wgcorr::{imaging_width, BeamSpec, InputConfig, PhaseModel, StateKind, TransverseGrid, WaveguideGeometry};

use crate::error::CliError;
use crate::units::{Length, LengthScales, Ratio, Unit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub compute: ComputeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_name() -> String {
    "scenario".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Explicit mirror separation. Mutually exclusive with `talbots`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<Length>,
    /// Choose the width so that the length is this many Talbot distances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub talbots: Option<Ratio>,
    #[serde(default = "default_length")]
    pub length: Length,
    #[serde(default = "default_wavelength")]
    pub wavelength: Length,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub phase_model: PhaseModel,
}

fn default_length() -> Length {
    Length::new(4.85, Unit::Centimeter)
}

fn default_wavelength() -> Length {
    Length::new(532.0, Unit::Nanometer)
}

fn default_modes() -> usize {
    wgcorr::geometry::DEFAULT_MODE_COUNT
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            width: None,
            talbots: None,
            length: default_length(),
            wavelength: default_wavelength(),
            modes: default_modes(),
            phase_model: PhaseModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Samples for intensities, carpets and lobe metrics.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Samples per axis of emitted order-2 maps.
    #[serde(default = "default_map_samples")]
    pub map_samples: usize,
    /// Samples per axis of order-3 maps.
    #[serde(default = "default_map3_samples")]
    pub map3_samples: usize,
}

fn default_samples() -> usize {
    wgcorr::geometry::DEFAULT_GRID_SAMPLES
}

fn default_map_samples() -> usize {
    256
}

fn default_map3_samples() -> usize {
    128
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { samples: default_samples(), map_samples: default_map_samples(), map3_samples: default_map3_samples() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    /// Number of equally spaced beams. Mutually exclusive with `positions`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beams: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Length>>,
    #[serde(default = "default_fwhm")]
    pub fwhm: Length,
    /// Relative beam phases in radians, used by the fixed-phase coherent state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    #[serde(default = "default_states")]
    pub states: Vec<StateKind>,
}

fn default_fwhm() -> Length {
    Length::new(5.0, Unit::Micrometer)
}

fn default_states() -> Vec<StateKind> {
    vec![StateKind::FockOnePerBeam, StateKind::Thermal]
}

impl Default for InputSection {
    fn default() -> Self {
        Self { beams: None, positions: None, fwhm: default_fwhm(), phases: None, states: default_states() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ThermalMethod {
    #[default]
    Exact,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeConfig {
    /// Correlation order; defaults to the number of beams.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default)]
    pub thermal: ThermalMethod,
    #[serde(default = "default_mc_samples")]
    pub samples: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Planes at which correlation maps are written.
    #[serde(default = "default_planes")]
    pub planes: Vec<Length>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carpet: Option<CarpetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
}

fn default_mc_samples() -> u64 {
    100_000
}

fn default_seed() -> u64 {
    1
}

fn default_planes() -> Vec<Length> {
    vec![Length::new(1.0, Unit::Length)]
}

impl Default for ComputeConfig {
    fn default() -> Self {
        Self {
            order: None,
            thermal: ThermalMethod::default(),
            samples: default_mc_samples(),
            seed: default_seed(),
            planes: default_planes(),
            carpet: None,
            scan: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarpetConfig {
    #[serde(default = "zero_length")]
    pub start: Length,
    #[serde(default = "default_carpet_end")]
    pub end: Length,
    #[serde(default = "default_carpet_steps")]
    pub steps: usize,
}

fn zero_length() -> Length {
    Length::meters(0.0)
}

fn default_carpet_end() -> Length {
    Length::new(1.0, Unit::Length)
}

fn default_carpet_steps() -> usize {
    201
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "zero_length")]
    pub start: Length,
    #[serde(default = "default_scan_end")]
    pub end: Length,
    #[serde(default = "default_scan_steps")]
    pub steps: usize,
    #[serde(default = "default_scan_samples")]
    pub samples: usize,
    #[serde(default)]
    pub correlation: ScanCorrelation,
}

fn default_scan_end() -> Length {
    Length::new(1.0, Unit::Revival)
}

fn default_scan_steps() -> usize {
    97
}

fn default_scan_samples() -> usize {
    96
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    /// Write 8-bit PGM previews of carpets.
    #[serde(default = "yes")]
    pub pgm: bool,
    /// Also write order-3 slices through each lobe peak.
    #[serde(default)]
    pub slices: bool,
}

fn default_dir() -> String {
    "out".into()
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), pgm: true, slices: false }
    }
}

/// Everything a run needs, in SI units.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub geometry: WaveguideGeometry,
    pub grid: TransverseGrid,
    pub input: InputConfig,
    pub order: usize,
    pub scales: LengthScales,
    pub planes: Vec<f64>,
}

impl ScenarioConfig {
    pub fn from_table(table: toml::Table) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = table.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let g = &self.geometry;
        if g.width.is_some() && g.talbots.is_some() {
            return bad("geometry: give either `width` or `talbots`, not both".into());
        }
        for (key, l) in [("geometry.length", g.length), ("geometry.wavelength", g.wavelength)]
            .into_iter()
            .chain(g.width.map(|w| ("geometry.width", w)))
            .chain([("input.fwhm", self.input.fwhm)])
        {
            if !l.unit.is_absolute() {
                return bad(format!("{key}: `{l}` must be an absolute length"));
            }
        }
        if self.input.beams.is_some() && self.input.positions.is_some() {
            return bad("input: give either `beams` or `positions`, not both".into());
        }
        if self.input.positions.iter().flatten().any(|p| !matches!(p.unit, Unit::Width) && !p.unit.is_absolute()) {
            return bad("input.positions: use absolute lengths or fractions of the width (`0.3D`)".into());
        }
        if self.input.states.is_empty() {
            return bad("input.states must not be empty".into());
        }
        if self.compute.thermal == ThermalMethod::Mc && self.compute.samples < 2 {
            return bad("compute.samples must be at least 2".into());
        }
        Ok(())
    }

    pub fn beam_count(&self) -> usize {
        self.input.positions.as_ref().map_or(self.input.beams.unwrap_or(2), Vec::len)
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let g = &self.geometry;
        let length = g.length.absolute().unwrap();
        let wavelength = g.wavelength.absolute().unwrap();
        let width = match (g.width, g.talbots) {
            (Some(w), _) => w.absolute().unwrap(),
            (None, t) => {
                let t = t.map_or(4.0, |r| r.value());
                if !(t > 0.0) {
                    return Err(CliError::Config("geometry.talbots must be positive".into()));
                }
                imaging_width(length, wavelength)? / (t / 4.0).sqrt()
            }
        };
        let geometry = WaveguideGeometry::with_phase_model(width, length, wavelength, g.modes, g.phase_model)?;
        let grid = TransverseGrid::for_geometry(&geometry, self.grid.samples)?;
        let scales = LengthScales { width, length, talbot: geometry.revival_distances().talbot };
        let sigma = sigma_from_fwhm(self.input.fwhm.absolute().unwrap());
        let kind = self.input.states[0];
        let mut input = match &self.input.positions {
            Some(p) => InputConfig::new(p.iter().map(|l| BeamSpec::new(l.resolve(&scales), sigma)).collect(), kind)?,
            None => InputConfig::symmetric(self.beam_count(), width, sigma, kind)?,
        };
        if let Some(ph) = &self.input.phases {
            if ph.len() != input.len() {
                return Err(CliError::Config(format!("input.phases has {} entries for {} beams", ph.len(), input.len())));
            }
            for (b, &p) in input.beams.iter_mut().zip(ph) {
                b.relative_phase = p;
            }
        }
        let order = self.compute.order.unwrap_or(input.len());
        let planes = self.compute.planes.iter().map(|l| l.resolve(&scales)).collect();
        Ok(Resolved { geometry, grid, input, order, scales, planes })
    }
}

/// Recursively merge `over` into `base`; tables merge, everything else replaces.
pub fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn parse_table(text: &str, origin: &str) -> Result<toml::Table, CliError> {
    text.parse::<toml::Table>().map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

pub fn read_table(path: &Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config `{}`: {e}", path.display())))?;
    parse_table(&text, &path.display().to_string())
}

/// Apply `key.path=value`; the value is read as TOML and falls back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("invalid override key `{key}`")));
    }
    let mut node = table;
    for p in &parts[..parts.len() - 1] {
        let entry = node.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(CliError::Config(format!("override `{key}`: `{p}` is not a section"))),
        };
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let c = ScenarioConfig::from_table(toml::Table::new()).unwrap();
        assert_eq!(c.grid.samples, 1024);
        assert_eq!(c.compute.samples, 100_000);
        assert_eq!(c.beam_count(), 2);
        let r = c.resolve().unwrap();
        assert!((r.geometry.length_in_talbot() - 4.0).abs() < 1e-12);
        assert_eq!(r.planes, vec![r.geometry.length()]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let t = parse_table("[geometry]\nwidht = \"57um\"\n", "x").unwrap();
        let err = ScenarioConfig::from_table(t).unwrap_err();
        assert!(err.to_string().contains("widht"));
        let t = parse_table("colour = 1\n", "x").unwrap();
        assert!(ScenarioConfig::from_table(t).is_err());
    }

    #[test]
    fn overrides_parse_values() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "geometry.width=57um").unwrap();
        apply_override(&mut t, "compute.seed=9").unwrap();
        apply_override(&mut t, "input.positions=[\"0.3D\", \"0.7D\"]").unwrap();
        let c = ScenarioConfig::from_table(t).unwrap();
        assert_eq!(c.geometry.width.unwrap().absolute().unwrap(), 57e-6);
        assert_eq!(c.compute.seed, 9);
        let r = c.resolve().unwrap();
        assert!((r.input.beams[0].center - 0.3 * 57e-6).abs() < 1e-18);
        assert!(apply_override(&mut toml::Table::new(), "novalue").is_err());
    }

    #[test]
    fn conflicting_keys_rejected() {
        let t = parse_table("[geometry]\nwidth = \"57um\"\ntalbots = 3\n", "x").unwrap();
        assert!(ScenarioConfig::from_table(t).is_err());
        let t = parse_table("[input]\nbeams = 2\npositions = [\"1um\"]\n", "x").unwrap();
        assert!(ScenarioConfig::from_table(t).is_err());
        let t = parse_table("[geometry]\nlength = \"2zT\"\n", "x").unwrap();
        assert!(ScenarioConfig::from_table(t).is_err());
    }

    #[test]
    fn serialized_config_reparses_identically() {
        let t = parse_table(
            "name = \"x\"\n[geometry]\ntalbots = \"8/3\"\n[input]\nbeams = 3\n[compute]\ncarpet = { steps = 11 }\nplanes = [\"0m\", \"1.5zT\"]\n",
            "x",
        )
        .unwrap();
        let c = ScenarioConfig::from_table(t).unwrap();
        let again = ScenarioConfig::from_table(parse_table(&c.to_toml(), "echo").unwrap()).unwrap();
        assert_eq!(c, again);
    }
}
