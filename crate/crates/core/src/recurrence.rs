//! Recurrence scans: how far the intensity and the correlation map are from
//! their input-plane values along the waveguide.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{quantum_correlation, thermal_correlation_exact, CorrelationMap, PropagatedBeams};
use crate::error::{Error, Result};
use crate::geometry::{TransverseGrid, WaveguideGeometry};
use crate::states::InputConfig;

/// A sample is a revival when its distance is below this fraction of the mean distance.
pub const REVIVAL_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScanCorrelation {
    #[default]
    Quantum,
    Thermal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceScan {
    pub z: Vec<f64>,
    pub intensity_distance: Vec<f64>,
    pub correlation_distance: Vec<f64>,
}

/// Positions flagged as revivals in one distance series.
pub fn revivals(z: &[f64], distance: &[f64]) -> Vec<f64> {
    let mean = distance.iter().sum::<f64>() / distance.len() as f64;
    z.iter()
        .zip(distance)
        .filter(|(_, &d)| d < REVIVAL_THRESHOLD * mean)
        .map(|(&z, _)| z)
        .collect()
}

/// Smallest positive revival distance, if any.
pub fn empirical_period(z: &[f64], distance: &[f64]) -> Option<f64> {
    revivals(z, distance).into_iter().find(|&v| v > 0.0)
}

impl RecurrenceScan {
    pub fn intensity_period(&self) -> Option<f64> {
        empirical_period(&self.z, &self.intensity_distance)
    }

    pub fn correlation_period(&self) -> Option<f64> {
        empirical_period(&self.z, &self.correlation_distance)
    }

    /// Correlation period over intensity period.
    pub fn period_ratio(&self) -> Option<f64> {
        Some(self.correlation_period()? / self.intensity_period()?)
    }
}

fn l1_relative(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    num / b.iter().map(|v| v.abs()).sum::<f64>()
}

/// Scan `steps` equally spaced planes over `z_range`, which must span at
/// least one revival distance. Correlations are of order `N` (the beam count)
/// and are evaluated on a grid of `grid_samples` points.
pub fn scan_recurrence(
    config: &InputConfig,
    geom: &WaveguideGeometry,
    z_range: (f64, f64),
    steps: usize,
    grid_samples: usize,
    correlation: ScanCorrelation,
) -> Result<RecurrenceScan> {
    let (start, end) = z_range;
    let z0 = geom.revival_distances().revival;
    if !(start >= 0.0) || end - start < z0 * (1.0 - 1e-12) {
        return Err(Error::ScanRange);
    }
    if steps < 2 {
        return Err(Error::InvalidInput("a scan needs at least two steps".into()));
    }
    let order = config.len();
    if !(2..=3).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let geom = geom.with_mode_count(geom.mode_count().min(grid_samples - 1))?;
    let grid = TransverseGrid::for_geometry(&geom, grid_samples)?;
    let beams = PropagatedBeams::new(config, &geom, &grid)?;
    let corr = |z: f64| -> Result<(Vec<f64>, CorrelationMap)> {
        let a = beams.at(z)?;
        let g = match correlation {
            ScanCorrelation::Quantum => quantum_correlation(&a, order)?,
            ScanCorrelation::Thermal => thermal_correlation_exact(&a, order)?,
        };
        Ok((a.incoherent_intensity(), g))
    };
    let (i0, g0) = corr(0.0)?;
    let z: Vec<f64> = (0..steps).map(|s| start + (end - start) * s as f64 / (steps - 1) as f64).collect();
    let rows: Vec<(f64, f64)> = z
        .par_iter()
        .map(|&zz| {
            let (i, g) = corr(zz)?;
            Ok((l1_relative(&i, &i0), g.l1_distance(&g0)))
        })
        .collect::<Result<_>>()?;
    let (intensity_distance, correlation_distance) = rows.into_iter().unzip();
    Ok(RecurrenceScan { z, intensity_distance, correlation_distance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_detection() {
        let z: Vec<f64> = (0..9).map(f64::from).collect();
        let d = [0.0, 1.0, 1.0, 1.0, 0.001, 1.0, 1.0, 1.0, 0.0];
        assert_eq!(revivals(&z, &d), vec![0.0, 4.0, 8.0]);
        assert_eq!(empirical_period(&z, &d), Some(4.0));
        assert_eq!(empirical_period(&z, &[0.0, 1.0, 1.0]), None);
    }

    #[test]
    fn short_range_rejected() {
        let g = WaveguideGeometry::new(57e-6, 4.85e-2, 532e-9, 64).unwrap();
        let cfg = InputConfig::symmetric(2, g.width(), 2.12e-6, crate::states::StateKind::FockOnePerBeam).unwrap();
        let z0 = g.revival_distances().revival;
        assert!(matches!(
            scan_recurrence(&cfg, &g, (0.0, 0.5 * z0), 10, 96, ScanCorrelation::Quantum),
            Err(Error::ScanRange)
        ));
    }
}
