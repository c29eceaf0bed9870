use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{TransverseGrid, WaveguideGeometry};
use crate::propagation::{ModeAmplitudes, ModeBasis};
use crate::states::{gaussian_beam, InputConfig};

/// Output amplitude of every input beam at one plane: `rows[n][x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeMatrix {
    pub grid: TransverseGrid,
    pub z: f64,
    pub rows: Vec<Vec<Complex64>>,
}

impl AmplitudeMatrix {
    pub fn new(grid: TransverseGrid, z: f64, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("amplitude matrix without beams".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != grid.len()) {
            return Err(Error::IncompatibleGrid(format!("row of {} samples on a {}-point grid", r.len(), grid.len())));
        }
        Ok(Self { grid, z, rows })
    }

    pub fn beams(&self) -> usize {
        self.rows.len()
    }

    pub fn samples(&self) -> usize {
        self.grid.len()
    }

    pub fn row_norms(&self) -> Vec<f64> {
        let dx = self.grid.spacing();
        self.rows.iter().map(|r| r.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx).collect()
    }

    /// Sum of the single-beam intensities: the ensemble-averaged intensity of
    /// mutually incoherent beams.
    pub fn incoherent_intensity(&self) -> Vec<f64> {
        (0..self.samples())
            .map(|x| self.rows.iter().map(|r| r[x].norm_sqr()).sum())
            .collect()
    }

    /// `|Σ_n e^{iθ_n} A_n(x)|²`.
    pub fn coherent_intensity(&self, phases: &[f64]) -> Result<Vec<f64>> {
        if phases.len() != self.beams() {
            return Err(Error::PhaseCount { expected: self.beams(), got: phases.len() });
        }
        let w: Vec<Complex64> = phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        Ok((0..self.samples())
            .map(|x| self.rows.iter().zip(&w).map(|(r, &e)| e * r[x]).sum::<Complex64>().norm_sqr())
            .collect())
    }
}

/// `phases` must be given exactly when `coherent`.
pub fn intensity(a: &AmplitudeMatrix, coherent: bool, phases: Option<&[f64]>) -> Result<Vec<f64>> {
    match (coherent, phases) {
        (true, Some(p)) => a.coherent_intensity(p),
        (false, None) => Ok(a.incoherent_intensity()),
        (true, None) => Err(Error::PhaseCount { expected: a.beams(), got: 0 }),
        (false, Some(_)) => Err(Error::InvalidInput("phases given for an incoherent intensity".into())),
    }
}

/// Input beams decomposed once into guided modes, ready to be evaluated at any plane.
#[derive(Debug, Clone)]
pub struct PropagatedBeams {
    basis: ModeBasis,
    modes: Vec<ModeAmplitudes>,
}

impl PropagatedBeams {
    pub fn new(config: &InputConfig, geom: &WaveguideGeometry, grid: &TransverseGrid) -> Result<Self> {
        let basis = ModeBasis::new(geom, grid)?;
        let modes = config
            .beams
            .iter()
            .map(|spec| {
                let field = gaussian_beam(spec, grid)?;
                basis.check_truncation(&field)?;
                basis.decompose(&field)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { basis, modes })
    }

    pub fn geometry(&self) -> &WaveguideGeometry {
        self.basis.geometry()
    }

    pub fn grid(&self) -> &TransverseGrid {
        self.basis.grid()
    }

    pub fn at(&self, z: f64) -> Result<AmplitudeMatrix> {
        if !(z >= 0.0) {
            return Err(Error::NegativeDistance(z));
        }
        let rows = self
            .modes
            .iter()
            .map(|m| self.basis.recompose(&self.basis.advance(m, z), z).amplitudes)
            .collect();
        AmplitudeMatrix::new(*self.grid(), z, rows)
    }
}

pub fn amplitude_matrix(
    config: &InputConfig,
    geom: &WaveguideGeometry,
    z: f64,
    grid: &TransverseGrid,
) -> Result<AmplitudeMatrix> {
    PropagatedBeams::new(config, geom, grid)?.at(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{sample_phases, sigma_from_fwhm, StateKind};

    fn setup(n: usize) -> (WaveguideGeometry, TransverseGrid, InputConfig) {
        let g = WaveguideGeometry::new(57e-6, 4.85e-2, 532e-9, 128).unwrap();
        let grid = TransverseGrid::for_geometry(&g, 1024).unwrap();
        let cfg = InputConfig::symmetric(n, g.width(), sigma_from_fwhm(5e-6), StateKind::Thermal).unwrap();
        (g, grid, cfg)
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_distance_gives_input_beams() {
        let (g, grid, cfg) = setup(2);
        let a = amplitude_matrix(&cfg, &g, 0.0, &grid).unwrap();
        for (row, spec) in a.rows.iter().zip(&cfg.beams) {
            let f = gaussian_beam(spec, &grid).unwrap();
            let peak = f.amplitudes.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(max_diff(row, &f.amplitudes) < 1e-4 * peak);
        }
        for n in a.row_norms() {
            assert!((n - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn revival_and_beam_exchange() {
        let (g, grid, cfg) = setup(2);
        let beams = PropagatedBeams::new(&cfg, &g, &grid).unwrap();
        let z0 = g.revival_distances().revival;
        let a0 = beams.at(0.0).unwrap();
        let afull = beams.at(z0).unwrap();
        let peak = a0.rows[0].iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (r, s) in afull.rows.iter().zip(&a0.rows) {
            assert!(max_diff(r, s) < 1e-6 * peak);
        }
        let ahalf = beams.at(z0 / 2.0).unwrap();
        // the mirror image of beam 0 is beam 1, up to a global sign
        let mut reflected = a0.rows[0].clone();
        reflected.reverse();
        let moduli = ahalf.rows[0].iter().zip(&a0.rows[1]).map(|(a, b)| (a.norm() - b.norm()).abs());
        assert!(moduli.fold(0.0, f64::max) < 1e-6 * peak);
        assert!(max_diff(&ahalf.rows[0], &reflected.iter().map(|v| -v).collect::<Vec<_>>()) < 1e-6 * peak);
    }

    #[test]
    fn single_beam_coherent_equals_incoherent() {
        let (g, grid, cfg) = setup(1);
        let a = amplitude_matrix(&cfg, &g, 7.3e-3, &grid).unwrap();
        let inc = intensity(&a, false, None).unwrap();
        let coh = intensity(&a, true, Some(&[1.234])).unwrap();
        for (x, y) in inc.iter().zip(&coh) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
        assert!(intensity(&a, true, None).is_err());
        assert!(intensity(&a, false, Some(&[0.0])).is_err());
        assert!(a.coherent_intensity(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn two_lobes_at_talbot_multiples() {
        let (g, grid, _) = setup(2);
        // generic symmetric positions, not ±D/4
        let sigma = sigma_from_fwhm(5e-6);
        let cfg = InputConfig::new(
            vec![
                crate::states::BeamSpec::new(0.3 * g.width(), sigma),
                crate::states::BeamSpec::new(0.7 * g.width(), sigma),
            ],
            StateKind::Thermal,
        )
        .unwrap();
        let beams = PropagatedBeams::new(&cfg, &g, &grid).unwrap();
        let zt = g.revival_distances().talbot;
        let i0 = beams.at(0.0).unwrap().incoherent_intensity();
        let peak = i0.iter().cloned().fold(0.0, f64::max);
        for k in 1..=3 {
            let ik = beams.at(k as f64 * zt).unwrap().incoherent_intensity();
            for x in 0..grid.len() {
                assert!((ik[x] - ik[grid.mirror_index(x)]).abs() < 1e-3 * peak);
                assert!((ik[x] - i0[x]).abs() < 1e-3 * peak);
            }
        }
    }

    #[test]
    fn incoherent_is_phase_average_of_coherent() {
        let (g, grid, cfg) = setup(2);
        let a = amplitude_matrix(&cfg, &g, 0.37 * g.revival_distances().talbot, &grid).unwrap();
        let inc = a.incoherent_intensity();
        let s = 10_000;
        let mut acc = vec![0.0; grid.len()];
        for i in 0..s {
            let ci = a.coherent_intensity(&sample_phases(3, i, 2)).unwrap();
            acc.iter_mut().zip(&ci).for_each(|(a, c)| *a += c);
        }
        let dx = grid.spacing();
        let total: f64 = inc.iter().sum::<f64>() * dx;
        let l1: f64 = acc.iter().zip(&inc).map(|(a, b)| (a / s as f64 - b).abs()).sum::<f64>() * dx;
        assert!(l1 / total < 0.01, "relative L1 {}", l1 / total);
    }
}
