//! Named scenarios. Each one is a TOML fragment layered under user settings.

use crate::config::{parse_table, ScenarioConfig};
use crate::error::CliError;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    toml: &'static str,
}

// Widths follow from the Talbot fraction of L = 4.85 cm at 532 nm, which
// rounds to 57, 66, 72, 70 and 74 µm.
const PRESETS: &[Preset] = &[
    Preset {
        name: "fig1",
        summary: "two beams at 0.3D and 0.7D: intensity carpet over [0, 2zT], G2 snapshots and recurrence scan",
        toml: r#"
name = "fig1"
[geometry]
talbots = 4
[input]
positions = ["0.3D", "0.7D"]
[compute]
planes = ["0m", "0.5zT", "1zT", "1.5zT", "2zT"]
carpet = { start = "0m", end = "2zT", steps = 201 }
scan = { steps = 97, samples = 96 }
"#,
    },
    Preset {
        name: "fig2a",
        summary: "imaging, D = D0 (57 um), beams at D/4 and 3D/4",
        toml: r#"
name = "fig2a"
[geometry]
talbots = 4
[input]
beams = 2
"#,
    },
    Preset {
        name: "fig2b",
        summary: "equal two-way splitter, L = 3zT (D = 66 um)",
        toml: r#"
name = "fig2b"
[geometry]
talbots = 3
[input]
beams = 2
[compute]
scan = { steps = 97, samples = 96 }
"#,
    },
    Preset {
        name: "fig2c",
        summary: "unequal two-way splitter, L = 5zT/2 (D = 72 um), beams at D/4 and 3D/4",
        toml: r#"
name = "fig2c"
[geometry]
talbots = "5/2"
[input]
beams = 2
"#,
    },
    Preset {
        name: "fig4a",
        summary: "equal three-way splitter, L = 8zT/3 (D = 70 um), beams at D/6, D/2, 5D/6",
        toml: r#"
name = "fig4a"
[geometry]
talbots = "8/3"
[input]
beams = 3
[compute]
scan = { steps = 97, samples = 96 }
"#,
    },
    Preset {
        name: "fig4b",
        summary: "unequal three-way splitter, L = 7zT/3 (D = 74 um), beams at D/6, D/2, 5D/6",
        toml: r#"
name = "fig4b"
[geometry]
talbots = "7/3"
[input]
beams = 3
"#,
    },
];

pub fn presets() -> &'static [Preset] {
    PRESETS
}

pub fn preset_table(name: &str) -> Result<toml::Table, CliError> {
    let p = PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        CliError::Config(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })?;
    parse_table(p.toml, p.name)
}

pub fn preset(name: &str) -> Result<ScenarioConfig, CliError> {
    ScenarioConfig::from_table(preset_table(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_expands() {
        for p in presets() {
            let c = preset(p.name).unwrap();
            let r = c.resolve().unwrap();
            assert_eq!(c.name, p.name);
            assert!((r.geometry.length() - 4.85e-2).abs() < 1e-15);
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn nominal_widths() {
        for (name, um) in [("fig2a", 57.0), ("fig2b", 66.0), ("fig2c", 72.0), ("fig4a", 70.0), ("fig4b", 74.0)] {
            let w = preset(name).unwrap().resolve().unwrap().geometry.width();
            assert_eq!((w * 1e6).round(), um, "{name}");
        }
    }

    #[test]
    fn three_beam_positions() {
        let r = preset("fig4b").unwrap().resolve().unwrap();
        let d = r.geometry.width();
        for (b, f) in r.input.beams.iter().zip([1.0 / 6.0, 0.5, 5.0 / 6.0]) {
            assert!((b.center - f * d).abs() < 1e-15);
        }
    }
}
