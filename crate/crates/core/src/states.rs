//! Input beams, multi-beam input configurations and the two-photon input states.

use std::f64::consts::TAU;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TransverseGrid;
use crate::propagation::SampledField;

/// Gaussian standard deviation of the amplitude-squared profile for an
/// intensity FWHM.
pub fn sigma_from_fwhm(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt())
}

/// One focused input spot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub center: f64,
    /// Standard deviation of the intensity profile.
    pub sigma: f64,
    pub relative_phase: f64,
    pub relative_amplitude: f64,
}

impl BeamSpec {
    pub fn new(center: f64, sigma: f64) -> Self {
        Self { center, sigma, relative_phase: 0.0, relative_amplitude: 1.0 }
    }

    pub fn with_phase(self, relative_phase: f64) -> Self {
        Self { relative_phase, ..self }
    }

    fn validate(&self, width: f64) -> Result<()> {
        if !(self.sigma > 0.0) || !(self.relative_amplitude >= 0.0) {
            return Err(Error::InvalidBeam(format!("sigma {} / amplitude {}", self.sigma, self.relative_amplitude)));
        }
        let (lo, hi) = (self.center - 3.0 * self.sigma, self.center + 3.0 * self.sigma);
        if lo <= 0.0 || hi >= width {
            return Err(Error::InvalidBeam(format!(
                "beam at {:.3e} m with sigma {:.3e} m reaches a mirror",
                self.center, self.sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    /// One photon in each beam (`|11>`, `|111>`).
    FockOnePerBeam,
    /// Identical beams with independent uniformly random phases.
    Thermal,
    /// A single realization with the beams' own relative phases.
    FixedPhaseCoherent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputConfig {
    pub beams: Vec<BeamSpec>,
    pub state_kind: StateKind,
}

impl InputConfig {
    pub fn new(beams: Vec<BeamSpec>, state_kind: StateKind) -> Result<Self> {
        if beams.is_empty() || beams.len() > 3 {
            return Err(Error::InvalidInput(format!("{} beams; supported are 1 to 3", beams.len())));
        }
        let mut sorted = beams.clone();
        sorted.sort_by(|a, b| a.center.total_cmp(&b.center));
        for pair in sorted.windows(2) {
            let gap = pair[1].center - pair[0].center;
            if gap <= 3.0 * (pair[0].sigma + pair[1].sigma) {
                return Err(Error::InvalidInput(format!(
                    "beams at {:.3e} m and {:.3e} m overlap",
                    pair[0].center, pair[1].center
                )));
            }
        }
        Ok(Self { beams, state_kind })
    }

    /// `n` identical beams at [`symmetric_positions`].
    pub fn symmetric(n: usize, width: f64, sigma: f64, state_kind: StateKind) -> Result<Self> {
        let beams = symmetric_positions(n, width).into_iter().map(|x| BeamSpec::new(x, sigma)).collect();
        Self::new(beams, state_kind)
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }
}

/// Unit-norm Gaussian `exp(-(x-x0)²/4σ²)`, then scaled by the relative amplitude and phase.
pub fn gaussian_beam(spec: &BeamSpec, grid: &TransverseGrid) -> Result<SampledField> {
    spec.validate(grid.width())?;
    let profile: Vec<f64> = grid
        .positions()
        .iter()
        .map(|&x| (-(x - spec.center).powi(2) / (4.0 * spec.sigma * spec.sigma)).exp())
        .collect();
    let norm = (profile.iter().map(|v| v * v).sum::<f64>() * grid.spacing()).sqrt();
    let scale = Complex64::from_polar(spec.relative_amplitude / norm, spec.relative_phase);
    let amplitudes = profile.into_iter().map(|v| scale * v).collect();
    SampledField::new(*grid, amplitudes, 0.0)
}

/// `n` equally spaced positions symmetric about the center, spacing `D/n`.
pub fn symmetric_positions(n: usize, width: f64) -> Vec<f64> {
    (1..=n)
        .map(|k| width / 2.0 + (2.0 * k as f64 - 1.0 - n as f64) * width / (2.0 * n as f64))
        .collect()
}

/// Two-photon density matrix of two modes in the basis `{|20>, |11>, |02>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonDensity(Matrix3<Complex64>);

/// Default tolerance for Hermiticity, trace and positivity checks.
pub const DENSITY_TOLERANCE: f64 = 1e-10;

impl TwoPhotonDensity {
    pub fn new(matrix: Matrix3<Complex64>) -> Result<Self> {
        let rho = Self(matrix);
        rho.validate(DENSITY_TOLERANCE)?;
        Ok(rho)
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        // Hermitize so that rounding in the anti-Hermitian part cannot leak in.
        let h = (self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let e = h.symmetric_eigenvalues();
        let mut out = [e[0], e[1], e[2]];
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::InvalidDensity(format!("not Hermitian (error {herm:.2e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = self.eigenvalues()[0];
        if min < -tol {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.2e}")));
        }
        Ok(())
    }

    /// Populations of `|20>`, `|11>`, `|02>`.
    pub fn populations(&self) -> [f64; 3] {
        [self.0[(0, 0)].re, self.0[(1, 1)].re, self.0[(2, 2)].re]
    }

    /// Bunched over anti-bunched population.
    pub fn bunching_ratio(&self) -> f64 {
        let p = self.populations();
        (p[0] + p[2]) / p[1]
    }
}

/// Two-photon part of two independent thermal beams: `diag(1, 2, 1) / 4`.
pub fn thermal_two_photon_input() -> TwoPhotonDensity {
    let c = |v: f64| Complex64::new(v, 0.0);
    TwoPhotonDensity(Matrix3::from_diagonal(&nalgebra::Vector3::new(c(0.25), c(0.5), c(0.25))))
}

/// Uniform phases in `[0, 2π)` for one realization of the pseudo-thermal
/// ensemble. Each sample draws from its own ChaCha stream, so the result
/// depends only on `(seed, sample_index, beam)`.
pub fn sample_phases(seed: u64, sample_index: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_index);
    (0..n).map(|_| TAU * rng.random::<f64>()).collect()
}
