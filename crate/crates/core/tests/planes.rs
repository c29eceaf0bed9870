use std::f64::consts::PI;

use wgcorr::correlations::{
    lobe_bins, quantum_correlation, quantum_lobe_masses, thermal_lobe_masses, integrate_map, AmplitudeMatrix,
    PropagatedBeams,
};
use wgcorr::splitter::{
    fock_output_state, three_photon_profile, transfer_matrix_from_amplitudes, unequal_three_way_reference,
};
use wgcorr::states::sigma_from_fwhm;
use wgcorr::{imaging_width, InputConfig, StateKind, TransverseGrid, WaveguideGeometry};

const L: f64 = 4.85e-2;
const LAMBDA: f64 = 532e-9;

/// Output amplitudes at the end of a guide whose length is `talbots` Talbot distances.
fn plane(talbots: f64, beams: usize) -> AmplitudeMatrix {
    let d0 = imaging_width(L, LAMBDA).unwrap();
    let width = d0 / (talbots / 4.0).sqrt();
    let g = WaveguideGeometry::new(width, L, LAMBDA, 128).unwrap();
    assert!((g.length_in_talbot() - talbots).abs() < 1e-9);
    let grid = TransverseGrid::for_geometry(&g, 1024).unwrap();
    let cfg = InputConfig::symmetric(beams, width, sigma_from_fwhm(5e-6), StateKind::FockOnePerBeam).unwrap();
    PropagatedBeams::new(&cfg, &g, &grid).unwrap().at(L).unwrap()
}

#[test]
fn imaging_keeps_photons_apart() {
    let a = plane(4.0, 2);
    let bins = lobe_bins(&a.incoherent_intensity(), 2).unwrap();
    let q = quantum_lobe_masses(&a, &bins).unwrap();
    assert!(q.bunched() < 1e-3 * q.total());
    let t = thermal_lobe_masses(&a, &bins, 2).unwrap();
    assert!((t.bunching_ratio().unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn equal_splitter_two_photons() {
    let a = plane(3.0, 2);
    let bins = lobe_bins(&a.incoherent_intensity(), 2).unwrap();
    let q = quantum_lobe_masses(&a, &bins).unwrap();
    assert!(q.antibunched() < 1e-3 * q.total(), "anti {}", q.antibunched() / q.total());
    let t = thermal_lobe_masses(&a, &bins, 2).unwrap();
    let r = t.bunching_ratio().unwrap();
    assert!((r - 3.0).abs() < 0.05 * 3.0, "ratio {r}");
    let tm = transfer_matrix_from_amplitudes(&a, &bins).unwrap();
    assert!(tm.unitarity_residual < 1e-2);
    for v in tm.moduli().iter() {
        assert!((v - 0.5f64.sqrt()).abs() < 1e-2);
    }
    let map = integrate_map(&quantum_correlation(&a, 2).unwrap(), &bins).unwrap();
    for (x, y) in map.values.iter().zip(&q.values) {
        assert!((x - y).abs() < 0.02 * q.total());
    }
}

#[test]
fn unequal_splitter_two_photons() {
    let a = plane(2.5, 2);
    let bins = lobe_bins(&a.incoherent_intensity(), 2).unwrap();
    let tm = transfer_matrix_from_amplitudes(&a, &bins).unwrap();
    let m = tm.moduli();
    let (c, s) = ((PI / 8.0).cos(), (PI / 8.0).sin());
    let (big, small) = (m[(0, 0)].max(m[(0, 1)]), m[(0, 0)].min(m[(0, 1)]));
    assert!((big - c).abs() < 1e-2 && (small - s).abs() < 1e-2, "{m}");
    let q = quantum_lobe_masses(&a, &bins).unwrap();
    assert!((q.bunching_ratio().unwrap() - 1.0).abs() < 0.02, "{}", q.bunching_ratio().unwrap());
    let t = thermal_lobe_masses(&a, &bins, 2).unwrap();
    assert!((t.bunching_ratio().unwrap() - 5.0 / 3.0).abs() < 0.05 * 5.0 / 3.0);
}

#[test]
fn three_way_splitters() {
    let a = plane(8.0 / 3.0, 3);
    let bins = lobe_bins(&a.incoherent_intensity(), 3).unwrap();
    let q = quantum_lobe_masses(&a, &bins).unwrap();
    let p = q.three_photon_profile().unwrap();
    assert!((p.triple - 2.0 / 3.0).abs() < 1e-2 && p.double < 1e-2 && (p.distinct - 1.0 / 3.0).abs() < 1e-2);
    let tm = transfer_matrix_from_amplitudes(&a, &bins).unwrap();
    let pd = three_photon_profile(&fock_output_state(&tm).unwrap()).unwrap();
    assert!((pd.triple - p.triple).abs() < 0.02 && (pd.distinct - p.distinct).abs() < 0.02);

    let a = plane(7.0 / 3.0, 3);
    let bins = lobe_bins(&a.incoherent_intensity(), 3).unwrap();
    let q = quantum_lobe_masses(&a, &bins).unwrap();
    let p = q.three_photon_profile().unwrap();
    assert!(p.distinct < 1e-2);
    let tm = transfer_matrix_from_amplitudes(&a, &bins).unwrap();
    let st = fock_output_state(&tm).unwrap();
    let reference = unequal_three_way_reference();
    for (occ, prob) in st.basis.iter().zip(st.probabilities()) {
        assert!((prob - reference.probability(occ)).abs() < 1e-3, "{occ:?}: {prob}");
    }
    assert!(st.modulus_fidelity(&reference) > 0.999);
    for (occ, prob) in q.occupation_probabilities() {
        assert!((prob - st.probability(&occ)).abs() < 0.02, "{occ:?}");
    }
}
