//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every scenario uses a 4.85 cm guide at 532 nm with 5 µm FWHM beams; the
//! width is set through the guide length in Talbot distances.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Serialize;
use wasm_bindgen::prelude::*;
use wgcorr::correlations::{
    lobe_bins, quantum_correlation, quantum_lobe_masses, thermal_correlation_exact, thermal_lobe_masses,
    AmplitudeMatrix, PropagatedBeams,
};
use wgcorr::splitter::{fock_output_state, transfer_matrix_from_amplitudes};
use wgcorr::states::sigma_from_fwhm;
use wgcorr::{imaging_width, BeamSpec, InputConfig, StateKind, TransverseGrid, WaveguideGeometry};

const LENGTH: f64 = 4.85e-2;
const WAVELENGTH: f64 = 532e-9;
const FWHM: f64 = 5e-6;
const MAX_SAMPLES: usize = 512;

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn setup(talbots: f64, positions: &[f64], samples: usize) -> Result<PropagatedBeams, String> {
    if !(talbots > 0.0) {
        return Err("the length must be a positive number of Talbot distances".into());
    }
    if !(8..=MAX_SAMPLES).contains(&samples) {
        return Err(format!("samples must lie in 8..={MAX_SAMPLES}"));
    }
    let width = imaging_width(LENGTH, WAVELENGTH).map_err(err)? / (talbots / 4.0).sqrt();
    let geom = WaveguideGeometry::new(width, LENGTH, WAVELENGTH, 128.min(samples - 1)).map_err(err)?;
    let grid = TransverseGrid::for_geometry(&geom, samples).map_err(err)?;
    let sigma = sigma_from_fwhm(FWHM);
    let beams = positions.iter().map(|&f| BeamSpec::new(f * width, sigma)).collect();
    let input = InputConfig::new(beams, StateKind::Thermal).map_err(err)?;
    PropagatedBeams::new(&input, &geom, &grid).map_err(err)
}

/// Incoherent intensity over `steps` planes from the input to `z_end` Talbot
/// distances, row-major with `samples` columns.
pub fn carpet(talbots: f64, positions: &[f64], z_end: f64, steps: usize, samples: usize) -> Result<Vec<f64>, String> {
    let beams = setup(talbots, positions, samples)?;
    let zt = beams.geometry().revival_distances().talbot;
    if !(z_end > 0.0) || steps < 2 {
        return Err("need a positive end plane and at least two steps".into());
    }
    let mut out = Vec::with_capacity(steps * samples);
    for s in 0..steps {
        let z = z_end * zt * s as f64 / (steps - 1) as f64;
        out.extend(beams.at(z).map_err(err)?.incoherent_intensity());
    }
    Ok(out)
}

fn plane(talbots: f64, positions: &[f64], z: f64, samples: usize) -> Result<AmplitudeMatrix, String> {
    let beams = setup(talbots, positions, samples)?;
    let zt = beams.geometry().revival_distances().talbot;
    if !(z >= 0.0) {
        return Err("the plane must be at a non-negative distance".into());
    }
    beams.at(z * zt).map_err(err)
}

/// Second-order correlation of two beams at `z` Talbot distances, `samples`² values.
pub fn g2(talbots: f64, positions: &[f64], z: f64, state: &str, samples: usize) -> Result<Vec<f64>, String> {
    if positions.len() != 2 {
        return Err("the correlation map needs exactly two beams".into());
    }
    let a = plane(talbots, positions, z, samples)?;
    let map = match state {
        "quantum" => quantum_correlation(&a, 2),
        "thermal" => thermal_correlation_exact(&a, 2),
        other => return Err(format!("unknown state `{other}` (quantum or thermal)")),
    };
    Ok(map.map_err(err)?.values)
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub width_um: f64,
    pub moduli: Vec<Vec<f64>>,
    pub unitarity_residual: f64,
    /// Output occupation of one photon per beam, `(lobes, probability)`.
    pub fock: Vec<(Vec<usize>, f64)>,
    pub quantum_bunched: f64,
    pub thermal_bunched: f64,
}

/// Transfer matrix and photon statistics of `beams` equally spaced inputs at the guide end.
pub fn summary(talbots: f64, beams: usize) -> Result<Summary, String> {
    if !(2..=3).contains(&beams) {
        return Err("two or three beams".into());
    }
    let positions: Vec<f64> = (0..beams).map(|k| (2 * k + 1) as f64 / (2 * beams) as f64).collect();
    let a = plane(talbots, &positions, talbots, MAX_SAMPLES)?;
    let bins = lobe_bins(&a.incoherent_intensity(), beams).map_err(err)?;
    let t = transfer_matrix_from_amplitudes(&a, &bins).map_err(err)?;
    let state = fock_output_state(&t).map_err(err)?;
    let q = quantum_lobe_masses(&a, &bins).map_err(err)?;
    let th = thermal_lobe_masses(&a, &bins, beams).map_err(err)?;
    Ok(Summary {
        width_um: a.grid.width() * 1e6,
        moduli: (0..beams).map(|m| (0..beams).map(|n| t.matrix[(m, n)].norm()).collect()).collect(),
        unitarity_residual: t.unitarity_residual,
        fock: state.basis.iter().cloned().zip(state.probabilities()).collect(),
        quantum_bunched: q.bunched() / q.total(),
        thermal_bunched: th.bunched() / th.total(),
    })
}

#[wasm_bindgen]
pub fn intensity_carpet(talbots: f64, positions: Vec<f64>, z_end: f64, steps: usize, samples: usize) -> Result<Vec<f64>, JsError> {
    carpet(talbots, &positions, z_end, steps, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn correlation_map(talbots: f64, positions: Vec<f64>, z: f64, state: &str, samples: usize) -> Result<Vec<f64>, JsError> {
    g2(talbots, &positions, z, state, samples).map_err(|e| JsError::new(&e))
}

/// JSON-encoded [`Summary`].
#[wasm_bindgen]
pub fn splitter_summary(talbots: f64, beams: usize) -> Result<String, JsError> {
    let s = summary(talbots, beams).map_err(|e| JsError::new(&e))?;
    Ok(serde_json::to_string(&s).expect("summary serializes"))
}
