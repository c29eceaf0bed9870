//! The waveguide at a lobe-forming plane viewed as a discrete N-port beam
//! splitter: transfer-matrix extraction, multi-photon output states and the
//! two-photon density-matrix map.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlations::{AmplitudeMatrix, LobeBinning, PropagatedBeams, ThreePhotonProfile};
use crate::error::{Error, Result};
use crate::geometry::{TransverseGrid, WaveguideGeometry};
use crate::permanent::permanent;
use crate::states::{InputConfig, TwoPhotonDensity};

/// Default bound on `‖T†T - I‖` (Frobenius).
pub const UNITARITY_TOLERANCE: f64 = 1e-2;

/// `T[m][n]`: amplitude for output lobe `m` given input beam `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub matrix: DMatrix<Complex64>,
    pub unitarity_residual: f64,
    /// Fractional power of beam `n` found in lobe `m`, integrated over the bin.
    pub lobe_power: DMatrix<f64>,
}

impl TransferMatrix {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Self {
        let n = matrix.nrows();
        let lobe_power = matrix.map(|v| v.norm_sqr());
        let residual = (matrix.adjoint() * &matrix - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt();
        Self { matrix, unitarity_residual: residual, lobe_power }
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn check_unitary(&self, tolerance: f64) -> Result<()> {
        if self.unitarity_residual > tolerance {
            return Err(Error::NotUnitary { residual: self.unitarity_residual, tolerance });
        }
        Ok(())
    }

    /// Largest `| |T[m][n]|² - lobe power |`.
    pub fn lobe_power_error(&self) -> f64 {
        self.matrix
            .iter()
            .zip(self.lobe_power.iter())
            .map(|(t, p)| (t.norm_sqr() - p).abs())
            .fold(0.0, f64::max)
    }

    pub fn moduli(&self) -> DMatrix<f64> {
        self.matrix.map(|v| v.norm())
    }
}

/// Transfer matrix from propagated beam amplitudes. Each lobe's reference
/// mode is the brightest beam's profile restricted to that bin, normalized
/// and phased to be real at the lobe peak.
pub fn transfer_matrix_from_amplitudes(a: &AmplitudeMatrix, bins: &LobeBinning) -> Result<TransferMatrix> {
    let n = a.beams();
    if bins.len() != n {
        return Err(Error::UnresolvedLobes { found: bins.len(), needed: n });
    }
    if bins.samples() != a.samples() {
        return Err(Error::IncompatibleGrid("binning and amplitudes use different grids".into()));
    }
    let dx = a.grid.spacing();
    let mut t = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let mut power = DMatrix::from_element(n, n, 0.0);
    for (m, &(s, e)) in bins.intervals.iter().enumerate() {
        let powers: Vec<f64> = a.rows.iter().map(|r| r[s..e].iter().map(|v| v.norm_sqr()).sum::<f64>() * dx).collect();
        let brightest = (0..n).max_by(|&i, &j| powers[i].total_cmp(&powers[j])).unwrap_or(0);
        let reference = &a.rows[brightest][s..e];
        let peak = bins.peaks[m].clamp(s, e - 1) - s;
        let rot = reference[peak].conj() / reference[peak].norm();
        let norm = powers[brightest].sqrt();
        for (beam, row) in a.rows.iter().enumerate() {
            let ov: Complex64 = reference.iter().zip(&row[s..e]).map(|(r, v)| (r * rot).conj() * v).sum();
            t[(m, beam)] = ov * dx / norm;
            power[(m, beam)] = powers[beam];
        }
    }
    let mut out = TransferMatrix::from_matrix(t);
    out.lobe_power = power;
    Ok(out)
}

pub fn extract_transfer_matrix(
    config: &InputConfig,
    geom: &WaveguideGeometry,
    grid: &TransverseGrid,
    z: f64,
    bins: &LobeBinning,
) -> Result<TransferMatrix> {
    let a = PropagatedBeams::new(config, geom, grid)?.at(z)?;
    transfer_matrix_from_amplitudes(&a, bins)
}

/// Occupation-number basis of `photons` bosons in `modes` modes, in
/// descending lexicographic order (`|20>, |11>, |02>` for two of each).
pub fn fock_basis(modes: usize, photons: usize) -> Vec<Vec<usize>> {
    fn rec(modes: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == modes {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(modes, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if modes > 0 {
        rec(modes, photons, &mut Vec::new(), &mut out);
    }
    out
}

fn mode_list(occ: &[usize]) -> Vec<usize> {
    occ.iter().enumerate().flat_map(|(m, &k)| std::iter::repeat_n(m, k)).collect()
}

fn factorial_product(occ: &[usize]) -> f64 {
    occ.iter().map(|&k| (1..=k).map(|v| v as f64).product::<f64>()).product()
}

/// Action of `T` on the `photons`-photon symmetric subspace, in the
/// [`fock_basis`]: `<out|U|in> = perm(T[out, in]) / sqrt(Π out! Π in!)`.
pub fn multiphoton_matrix(t: &TransferMatrix, photons: usize) -> Result<DMatrix<Complex64>> {
    let basis = fock_basis(t.size(), photons);
    let d = basis.len();
    let mut u = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for (c, inp) in basis.iter().enumerate() {
        let cols = mode_list(inp);
        for (r, out) in basis.iter().enumerate() {
            let rows = mode_list(out);
            let sub = DMatrix::from_fn(photons, photons, |i, j| t.matrix[(rows[i], cols[j])]);
            u[(r, c)] = permanent(&sub)? / (factorial_product(inp) * factorial_product(out)).sqrt();
        }
    }
    Ok(u)
}

/// N-photon state over the output lobes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockOutputState {
    pub basis: Vec<Vec<usize>>,
    pub amplitudes: Vec<Complex64>,
    /// Norm before renormalization; differs from one only through non-unitarity of `T`.
    pub raw_norm: f64,
}

impl FockOutputState {
    pub fn amplitude(&self, occ: &[usize]) -> Option<Complex64> {
        self.basis.iter().position(|b| b == occ).map(|i| self.amplitudes[i])
    }

    pub fn probability(&self, occ: &[usize]) -> f64 {
        self.amplitude(occ).map_or(0.0, |a| a.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn photons(&self) -> usize {
        self.basis.first().map_or(0, |b| b.iter().sum())
    }

    /// `|<self|other>|²` over a shared basis.
    pub fn fidelity(&self, other: &FockOutputState) -> f64 {
        self.aligned(other).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr()
    }

    /// Fidelity after optimal per-component rephasing, `(Σ|a||b|)²`; insensitive
    /// to the arbitrary phase references of lobes and inputs.
    pub fn modulus_fidelity(&self, other: &FockOutputState) -> f64 {
        self.aligned(other).map(|(a, b)| a.norm() * b.norm()).sum::<f64>().powi(2)
    }

    fn aligned<'a>(&'a self, other: &'a FockOutputState) -> impl Iterator<Item = (Complex64, Complex64)> + 'a {
        self.basis
            .iter()
            .zip(&self.amplitudes)
            .map(move |(occ, &a)| (a, other.amplitude(occ).unwrap_or_default()))
    }
}

/// Output state for one photon in each input beam.
pub fn fock_output_state(t: &TransferMatrix) -> Result<FockOutputState> {
    let n = t.size();
    let basis = fock_basis(n, n);
    let u = multiphoton_matrix(t, n)?;
    let input = basis.iter().position(|b| b.iter().all(|&k| k == 1)).unwrap_or(0);
    let column: Vec<Complex64> = u.column(input).iter().copied().collect();
    let raw_norm = column.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let amplitudes = column.iter().map(|a| a / raw_norm).collect();
    Ok(FockOutputState { basis, amplitudes, raw_norm })
}

/// Probability of all three photons in one lobe, exactly two, or none sharing.
pub fn three_photon_profile(state: &FockOutputState) -> Result<ThreePhotonProfile> {
    if state.photons() != 3 {
        return Err(Error::UnsupportedOrder(state.photons()));
    }
    let (mut triple, mut double, mut distinct) = (0.0, 0.0, 0.0);
    for (occ, a) in state.basis.iter().zip(&state.amplitudes) {
        let p = a.norm_sqr();
        match occ.iter().max() {
            Some(3) => triple += p,
            Some(2) => double += p,
            _ => distinct += p,
        }
    }
    Ok(ThreePhotonProfile { triple, double, distinct })
}

/// Closest unitary to `T` in the Frobenius norm, `W V†` from `T = W Σ V†`.
pub fn nearest_unitary(t: &TransferMatrix) -> TransferMatrix {
    let svd = t.matrix.clone().svd(true, true);
    let (w, v_t) = (svd.u.expect("left vectors requested"), svd.v_t.expect("right vectors requested"));
    let mut out = TransferMatrix::from_matrix(w * v_t);
    out.lobe_power = t.lobe_power.clone();
    out
}

/// `ρ_out = U₂ ρ U₂†` with `U₂` the two-photon representation of a 2×2 `T`.
/// `T` must pass the unitarity check; its small residual is then removed by
/// [`nearest_unitary`] so that trace and positivity are kept to rounding.
pub fn apply_splitter_to_density(t: &TransferMatrix, rho: &TwoPhotonDensity) -> Result<TwoPhotonDensity> {
    if t.size() != 2 {
        return Err(Error::UnsupportedSize(t.size()));
    }
    t.check_unitary(UNITARITY_TOLERANCE)?;
    let u = multiphoton_matrix(&nearest_unitary(t), 2)?;
    let u3 = Matrix3::from_fn(|i, j| u[(i, j)]);
    TwoPhotonDensity::new(u3 * rho.matrix() * u3.adjoint())
}

/// Literature three-photon outputs for one photon per beam, in the three-lobe
/// [`fock_basis`]. Phases follow one particular convention and only moduli are
/// convention-independent.
pub fn equal_three_way_reference() -> FockOutputState {
    let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let a = e * (2f64.sqrt() / 3.0);
    let entries = [(vec![3, 0, 0], a), (vec![0, 3, 0], -a), (vec![0, 0, 3], a), (vec![1, 1, 1], Complex64::new(1.0 / 3f64.sqrt(), 0.0))];
    reference_state(&entries)
}

pub fn unequal_three_way_reference() -> FockOutputState {
    let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let a = 1.0 / (3.0 * 2f64.sqrt());
    let b = -1.0 / 6f64.sqrt();
    let c = |v: f64| Complex64::new(v, 0.0);
    let entries = [
        (vec![3, 0, 0], c(a)),
        (vec![0, 3, 0], c(2.0 * a)),
        (vec![0, 0, 3], c(a)),
        (vec![2, 1, 0], e * b),
        (vec![2, 0, 1], c(b)),
        (vec![1, 0, 2], c(b)),
        (vec![0, 1, 2], e * b),
    ];
    reference_state(&entries)
}

fn reference_state(entries: &[(Vec<usize>, Complex64)]) -> FockOutputState {
    let basis = fock_basis(3, 3);
    let amplitudes = basis
        .iter()
        .map(|occ| entries.iter().find(|(o, _)| o == occ).map_or(Complex64::new(0.0, 0.0), |e| e.1))
        .collect();
    FockOutputState { basis, amplitudes, raw_norm: 1.0 }
}
