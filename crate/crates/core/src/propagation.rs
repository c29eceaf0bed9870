//! Guided-mode basis of the two-mirror waveguide and modal field propagation.
//!
//! Mode `m` is `sqrt(2/D)·sin(mπx/D)`. In the paraxial model it accumulates the
//! phase `-π λ m² z / (4 D²)`, so all relative phases are multiples of `2π` at
//! the revival distance `8 D² / λ`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PhaseModel, TransverseGrid, WaveguideGeometry};

/// Largest discarded fraction of the input norm accepted by [`ModeBasis::check_truncation`].
pub const TRUNCATION_TOLERANCE: f64 = 1e-3;

/// Complex amplitude sampled on a transverse grid at distance `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub grid: TransverseGrid,
    pub amplitudes: Vec<Complex64>,
    pub z: f64,
}

impl SampledField {
    pub fn new(grid: TransverseGrid, amplitudes: Vec<Complex64>, z: f64) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::IncompatibleGrid(format!(
                "{} amplitudes on a {}-point grid",
                amplitudes.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, amplitudes, z })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Quadrature inner product `<self, other>`, conjugating `self`.
    pub fn overlap(&self, other: &SampledField) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.spacing()
    }

    /// Field reflected through the waveguide center, `f(D - x)`.
    pub fn reflected(&self) -> SampledField {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.reverse();
        SampledField { grid: self.grid, amplitudes, z: self.z }
    }
}

/// Coefficients `c_m` of a field in the guided-mode basis, `m = 1..=M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitudes {
    pub coefficients: Vec<Complex64>,
}

impl ModeAmplitudes {
    pub fn power(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Coefficient of mode `m` (1-based).
    pub fn get(&self, m: usize) -> Option<Complex64> {
        m.checked_sub(1).and_then(|i| self.coefficients.get(i).copied())
    }
}

/// Mode `m` sampled on `grid`.
pub fn mode_profile(m: usize, geom: &WaveguideGeometry, grid: &TransverseGrid) -> Result<Vec<f64>> {
    if m == 0 || m > geom.mode_count() {
        return Err(Error::ModeIndexOutOfRange { index: m, max: geom.mode_count() });
    }
    Ok(sampled_mode(m, geom.width(), grid))
}

fn sampled_mode(m: usize, width: f64, grid: &TransverseGrid) -> Vec<f64> {
    let amp = (2.0 / width).sqrt();
    let k = grid.len() as f64;
    (0..grid.len())
        .map(|j| amp * (m as f64 * PI * (j as f64 + 0.5) / k).sin())
        .collect()
}

/// Phase accumulated by mode `m` after distance `z`, relative to a plane wave.
pub fn propagation_phase(m: usize, z: f64, geom: &WaveguideGeometry) -> f64 {
    let mf = m as f64;
    match geom.phase_model() {
        PhaseModel::Paraxial => -PI * geom.wavelength() * mf * mf * z / (4.0 * geom.width().powi(2)),
        PhaseModel::Exact => exact_phase_rate(mf, geom) * z,
    }
}

// β_m - k, written to avoid cancellation.
fn exact_phase_rate(m: f64, geom: &WaveguideGeometry) -> f64 {
    let k = TAU / geom.wavelength();
    let kt = m * PI / geom.width();
    -(kt * kt) / (k + (k * k - kt * kt).sqrt())
}

/// `exp(i φ_m(z))`, with the phase reduced before exponentiation so that
/// revival planes are exact to rounding.
fn phase_factor(m: usize, z: f64, geom: &WaveguideGeometry) -> Complex64 {
    let angle = match geom.phase_model() {
        PhaseModel::Paraxial => {
            let t = (m * m) as f64 * (z / geom.revival_distances().revival);
            -TAU * (t - t.floor())
        }
        PhaseModel::Exact => (exact_phase_rate(m as f64, geom) * z).rem_euclid(TAU),
    };
    Complex64::from_polar(1.0, angle)
}

/// Retained modes tabulated on a grid.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    geom: WaveguideGeometry,
    grid: TransverseGrid,
    profiles: Vec<Vec<f64>>,
}

impl ModeBasis {
    pub fn new(geom: &WaveguideGeometry, grid: &TransverseGrid) -> Result<Self> {
        grid.check_resolves(geom)?;
        let profiles = (1..=geom.mode_count()).map(|m| sampled_mode(m, geom.width(), grid)).collect();
        Ok(Self { geom: *geom, grid: *grid, profiles })
    }

    pub fn geometry(&self) -> &WaveguideGeometry {
        &self.geom
    }

    pub fn grid(&self) -> &TransverseGrid {
        &self.grid
    }

    fn check_field(&self, field: &SampledField) -> Result<()> {
        if field.grid != self.grid {
            return Err(Error::IncompatibleGrid("field was sampled on a different grid".into()));
        }
        Ok(())
    }

    pub fn decompose(&self, field: &SampledField) -> Result<ModeAmplitudes> {
        self.check_field(field)?;
        let dx = self.grid.spacing();
        let coefficients = self
            .profiles
            .iter()
            .map(|p| p.iter().zip(&field.amplitudes).map(|(&w, &a)| a * w).sum::<Complex64>() * dx)
            .collect();
        Ok(ModeAmplitudes { coefficients })
    }

    pub fn recompose(&self, modes: &ModeAmplitudes, z: f64) -> SampledField {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (p, &c) in self.profiles.iter().zip(&modes.coefficients) {
            for (a, &w) in amplitudes.iter_mut().zip(p) {
                *a += c * w;
            }
        }
        SampledField { grid: self.grid, amplitudes, z }
    }

    /// Mode amplitudes advanced by `dz`.
    pub fn advance(&self, modes: &ModeAmplitudes, dz: f64) -> ModeAmplitudes {
        let coefficients = modes
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, &c)| c * phase_factor(i + 1, dz, &self.geom))
            .collect();
        ModeAmplitudes { coefficients }
    }

    /// Field after a further distance `dz`; the result is stamped `field.z + dz`.
    pub fn propagate(&self, field: &SampledField, dz: f64) -> Result<SampledField> {
        if !(dz >= 0.0) {
            return Err(Error::NegativeDistance(dz));
        }
        let modes = self.decompose(field)?;
        Ok(self.recompose(&self.advance(&modes, dz), field.z + dz))
    }

    /// Fraction of the field norm outside the retained modes.
    pub fn truncation_loss(&self, field: &SampledField) -> Result<f64> {
        let norm = field.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        Ok((1.0 - self.decompose(field)?.power() / norm).max(0.0))
    }

    pub fn check_truncation(&self, field: &SampledField) -> Result<()> {
        let fraction = self.truncation_loss(field)?;
        if fraction > TRUNCATION_TOLERANCE {
            return Err(Error::Truncation { fraction });
        }
        Ok(())
    }
}

pub fn decompose(field: &SampledField, geom: &WaveguideGeometry) -> Result<ModeAmplitudes> {
    ModeBasis::new(geom, &field.grid)?.decompose(field)
}

pub fn propagate(field: &SampledField, z: f64, geom: &WaveguideGeometry) -> Result<SampledField> {
    ModeBasis::new(geom, &field.grid)?.propagate(field, z)
}

/// Propagator sampled on the grid, row-major over `(x_out, x_in)`:
/// `G(x, x') = Σ_m ψ_m(x) ψ_m(x') exp(iφ_m(z))`. Applying it to a field is
/// `Σ_x' G(x, x') f(x') Δx`.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    pub samples: usize,
    pub spacing: f64,
    pub values: Vec<Complex64>,
}

impl GreenKernel {
    pub fn get(&self, out: usize, inp: usize) -> Complex64 {
        self.values[out * self.samples + inp]
    }

    pub fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        self.values
            .par_chunks(self.samples)
            .map(|row| row.iter().zip(input).map(|(g, f)| g * f).sum::<Complex64>() * self.spacing)
            .collect()
    }

    /// Composition `self ∘ other` under grid quadrature.
    pub fn compose(&self, other: &GreenKernel) -> GreenKernel {
        let n = self.samples;
        let values = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum::<Complex64>() * self.spacing
            })
            .collect();
        GreenKernel { samples: n, spacing: self.spacing, values }
    }
}

pub fn green_kernel(geom: &WaveguideGeometry, z: f64, grid: &TransverseGrid) -> Result<GreenKernel> {
    if !(z >= 0.0) {
        return Err(Error::NegativeDistance(z));
    }
    let basis = ModeBasis::new(geom, grid)?;
    let phases: Vec<Complex64> = (1..=geom.mode_count()).map(|m| phase_factor(m, z, geom)).collect();
    let n = grid.len();
    let values = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let basis = &basis;
            let phases = &phases;
            (0..n).map(move |j| {
                basis
                    .profiles
                    .iter()
                    .zip(phases)
                    .map(|(p, &e)| e * (p[i] * p[j]))
                    .sum::<Complex64>()
            })
        })
        .collect();
    Ok(GreenKernel { samples: n, spacing: grid.spacing(), values })
}
