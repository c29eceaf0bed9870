//! Output amplitudes, intensities and quantum / pseudo-thermal correlation
//! maps of order 2 and 3, with lobe-level summaries.

mod amplitude;
mod lobes;
mod map;
mod reduce;

pub use amplitude::{amplitude_matrix, intensity, AmplitudeMatrix, PropagatedBeams};
pub use lobes::{
    bin_overlaps, bunching_ratio, count_lobes, integrate_map, lobe_bins, quantum_lobe_masses, thermal_lobe_masses,
    thermal_lobe_mc, LobeBinning, LobeEstimate, LobeMasses, ThreePhotonProfile, LOBE_THRESHOLD,
};
pub use map::{
    coherent_correlation, quantum_correlation, thermal_correlation_exact, thermal_correlation_from_phases,
    thermal_correlation_mc, CorrelationMap, Normalization,
};
pub use reduce::{reduce_difference_coords, ReducedMap3};
