//! Waveguide geometry, the transverse sampling grid and revival-distance arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of retained guided modes.
pub const DEFAULT_MODE_COUNT: usize = 128;
/// Default number of transverse grid samples.
pub const DEFAULT_GRID_SAMPLES: usize = 1024;

/// How the per-mode propagation phase is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseModel {
    /// Quadratic-in-m phase; revivals are exact.
    #[default]
    Paraxial,
    /// Full propagation constant `sqrt(k² - (mπ/D)²)` relative to `k`.
    Exact,
}

/// Two ideal parallel mirrors separated by `width`, guiding light of
/// `wavelength` over `length`. All lengths are in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideGeometry {
    width: f64,
    length: f64,
    wavelength: f64,
    mode_count: usize,
    phase_model: PhaseModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevivalDistances {
    /// Full revival distance `8 D² / λ`.
    pub revival: f64,
    /// Talbot distance, a quarter of the revival distance.
    pub talbot: f64,
}

impl WaveguideGeometry {
    pub fn new(width: f64, length: f64, wavelength: f64, mode_count: usize) -> Result<Self> {
        Self::with_phase_model(width, length, wavelength, mode_count, PhaseModel::Paraxial)
    }

    pub fn with_phase_model(
        width: f64,
        length: f64,
        wavelength: f64,
        mode_count: usize,
        phase_model: PhaseModel,
    ) -> Result<Self> {
        for (name, v) in [("width", width), ("length", length), ("wavelength", wavelength)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} must be positive, got {v}")));
            }
        }
        if mode_count == 0 {
            return Err(Error::InvalidGeometry("mode count must be at least 1".into()));
        }
        let cutoff = mode_count as f64 * wavelength / (2.0 * width);
        if cutoff >= 1.0 {
            return Err(Error::InvalidGeometry(format!(
                "{mode_count} modes exceed the guided cutoff (M·λ/2D = {cutoff:.3})"
            )));
        }
        Ok(Self { width, length, wavelength, mode_count, phase_model })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn phase_model(&self) -> PhaseModel {
        self.phase_model
    }

    /// Same geometry with a different number of retained modes.
    pub fn with_mode_count(&self, mode_count: usize) -> Result<Self> {
        Self::with_phase_model(self.width, self.length, self.wavelength, mode_count, self.phase_model)
    }

    pub fn revival_distances(&self) -> RevivalDistances {
        let revival = 8.0 * self.width * self.width / self.wavelength;
        RevivalDistances { revival, talbot: revival / 4.0 }
    }

    /// Waveguide length in units of the Talbot distance.
    pub fn length_in_talbot(&self) -> f64 {
        self.length / self.revival_distances().talbot
    }
}

/// Width whose revival distance equals `length`: `sqrt(λ L / 8)`.
pub fn imaging_width(length: f64, wavelength: f64) -> Result<f64> {
    if !(length > 0.0 && wavelength > 0.0) {
        return Err(Error::InvalidGeometry("length and wavelength must be positive".into()));
    }
    Ok((wavelength * length / 8.0).sqrt())
}

/// Uniform cell-centered sampling of the open interval `(0, D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseGrid {
    samples: usize,
    width: f64,
}

impl TransverseGrid {
    pub fn new(samples: usize, width: f64) -> Result<Self> {
        if samples < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples, got {samples}")));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidGrid(format!("width must be positive, got {width}")));
        }
        Ok(Self { samples, width })
    }

    /// Grid spanning the waveguide, checked to resolve every retained mode.
    pub fn for_geometry(geom: &WaveguideGeometry, samples: usize) -> Result<Self> {
        let grid = Self::new(samples, geom.width())?;
        grid.check_resolves(geom)?;
        Ok(grid)
    }

    pub(crate) fn check_resolves(&self, geom: &WaveguideGeometry) -> Result<()> {
        let rel = (self.width - geom.width()).abs() / geom.width();
        if rel > 1e-12 {
            return Err(Error::IncompatibleGrid(format!(
                "grid width {} differs from waveguide width {}",
                self.width,
                geom.width()
            )));
        }
        // Discrete sine orthogonality holds for m < K only.
        if geom.mode_count() >= self.samples {
            return Err(Error::IncompatibleGrid(format!(
                "{} samples cannot resolve {} modes",
                self.samples,
                geom.mode_count()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples == 0
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn spacing(&self) -> f64 {
        self.width / self.samples as f64
    }

    pub fn position(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.samples).map(|i| self.position(i)).collect()
    }

    /// Index of the grid point mirrored through the waveguide center.
    pub fn mirror_index(&self, i: usize) -> usize {
        self.samples - 1 - i
    }

    /// Index of the sample nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = (x / self.spacing() - 0.5).round();
        i.clamp(0.0, (self.samples - 1) as f64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const LAMBDA: f64 = 532e-9;
    const L: f64 = 4.85e-2;

    #[test]
    fn rejects_bad_geometry() {
        assert!(WaveguideGeometry::new(0.0, L, LAMBDA, 10).is_err());
        assert!(WaveguideGeometry::new(57e-6, -1.0, LAMBDA, 10).is_err());
        assert!(WaveguideGeometry::new(57e-6, L, LAMBDA, 0).is_err());
        // 2D/λ ≈ 214 guided modes
        assert!(WaveguideGeometry::new(57e-6, L, LAMBDA, 214).is_ok());
        assert!(WaveguideGeometry::new(57e-6, L, LAMBDA, 215).is_err());
    }

    #[test]
    fn revival_at_57um_matches_waveguide_length() {
        let g = WaveguideGeometry::new(57e-6, L, LAMBDA, 128).unwrap();
        let r = g.revival_distances();
        assert_relative_eq!(r.revival, 48.857e-3, max_relative = 1e-4);
        assert!((r.revival - L).abs() / L < 0.01);
        assert_eq!(r.talbot / r.revival, 0.25);
    }

    #[test]
    fn length_is_three_talbot_at_66um() {
        let g = WaveguideGeometry::new(66e-6, L, LAMBDA, 128).unwrap();
        assert!((g.length_in_talbot() - 3.0).abs() / 3.0 < 0.02);
    }

    #[test]
    fn imaging_width_values() {
        let d0 = imaging_width(L, LAMBDA).unwrap();
        assert_relative_eq!(d0, 56.79e-6, max_relative = 1e-3);
        assert_relative_eq!(imaging_width(4.0 * L, LAMBDA).unwrap(), 2.0 * d0, max_relative = 1e-14);
        let d = 66e-6;
        assert_relative_eq!(imaging_width(8.0 * d * d / LAMBDA, LAMBDA).unwrap(), d, max_relative = 1e-14);
        let g = WaveguideGeometry::new(d0, L, LAMBDA, 128).unwrap();
        assert_relative_eq!(g.revival_distances().revival, L, max_relative = 1e-14);
    }

    #[test]
    fn grid_is_cell_centered_and_mirror_exact() {
        let grid = TransverseGrid::new(1024, 57e-6).unwrap();
        assert_relative_eq!(grid.position(0), grid.spacing() / 2.0);
        for i in [0, 17, 511, 1023] {
            let x = grid.position(i);
            let xm = grid.position(grid.mirror_index(i));
            assert_relative_eq!(x + xm, 57e-6, max_relative = 1e-14);
            assert_eq!(grid.nearest_index(x), i);
        }
    }

    #[test]
    fn grid_must_resolve_modes() {
        let g = WaveguideGeometry::new(57e-6, L, LAMBDA, 128).unwrap();
        assert!(TransverseGrid::for_geometry(&g, 128).is_err());
        assert!(TransverseGrid::for_geometry(&g, 129).is_ok());
        assert!(TransverseGrid::for_geometry(&WaveguideGeometry::new(60e-6, L, LAMBDA, 8).unwrap(), 64)
            .and_then(|grid| grid.check_resolves(&g))
            .is_err());
    }
}
