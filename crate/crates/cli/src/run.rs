//! Executes a scenario and writes its files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wgcorr::correlations::{
    coherent_correlation, lobe_bins, quantum_correlation, quantum_lobe_masses, reduce_difference_coords,
    thermal_correlation_exact, thermal_correlation_mc, thermal_lobe_masses, thermal_lobe_mc, AmplitudeMatrix,
    CorrelationMap, LobeMasses, PropagatedBeams, ThreePhotonProfile,
};
use wgcorr::recurrence::scan_recurrence;
use wgcorr::splitter::{apply_splitter_to_density, fock_output_state, three_photon_profile, transfer_matrix_from_amplitudes};
use wgcorr::states::thermal_two_photon_input;
use wgcorr::{Error, StateKind, TransverseGrid};

use crate::config::{Resolved, ScenarioConfig, ThermalMethod};
use crate::error::CliError;
use crate::output::{dense_rows, pgm, table_csv, FileEntry, OutputDir};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub version: String,
    /// Fully resolved configuration, including every default.
    pub config: ScenarioConfig,
    pub derived: Derived,
    pub metrics: Metrics,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub width_m: f64,
    pub length_m: f64,
    pub wavelength_m: f64,
    pub revival_distance_m: f64,
    pub talbot_distance_m: f64,
    pub length_in_talbot: f64,
    pub modes: usize,
    pub grid_spacing_m: f64,
    pub beam_centers_m: Vec<f64>,
    pub beam_sigma_m: f64,
    pub order: usize,
    pub planes_m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupation {
    pub lobes: Vec<usize>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMetrics {
    pub total: f64,
    pub bunched_fraction: f64,
    pub antibunched_fraction: f64,
    /// Bunched over anti-bunched mass; `None` when nothing is anti-bunched.
    pub bunching_ratio: Option<f64>,
    pub occupations: Vec<Occupation>,
    pub three_photon_profile: Option<ThreePhotonProfile>,
}

impl StateMetrics {
    fn from_masses(m: &LobeMasses) -> Result<Self, CliError> {
        let total = m.total();
        let bunching_ratio = match m.bunching_ratio() {
            Ok(r) => Some(r),
            Err(Error::AllBunched | Error::UnsupportedOrder(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let occupations =
            m.occupation_probabilities().into_iter().map(|(lobes, probability)| Occupation { lobes, probability }).collect();
        let three_photon_profile = if m.order == 3 && m.bins == 3 { Some(m.three_photon_profile()?) } else { None };
        Ok(Self {
            total,
            bunched_fraction: m.bunched() / total,
            antibunched_fraction: m.antibunched() / total,
            bunching_ratio,
            occupations,
            three_photon_profile,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloMetrics {
    pub samples: u64,
    pub seed: u64,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub exact: Vec<f64>,
    pub within_3_sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMetrics {
    pub populations: [f64; 3],
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub bunching_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitterMetrics {
    /// `|T[m][n]|`, row per output lobe.
    pub moduli: Vec<Vec<f64>>,
    pub unitarity_residual: f64,
    pub lobe_power_error: f64,
    pub fock_output: Vec<Occupation>,
    pub three_photon_profile: Option<ThreePhotonProfile>,
    /// Largest difference between lobe-integrated quantum occupation
    /// probabilities and the transfer-matrix prediction.
    pub two_path_deviation: Option<f64>,
    pub thermal_density: Option<DensityMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodMetrics {
    pub intensity_m: Option<f64>,
    pub correlation_m: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateTag {
    pub state: StateKind,
    pub file: String,
    /// Largest `|G(x) - G(πx)|` over coordinate permutations, relative to the map maximum.
    pub exchange_asymmetry: f64,
    /// Reduced order-3 mass split by nearest lobe-lattice point.
    pub lattice_profile: Option<ThreePhotonProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneSummary {
    pub z_m: f64,
    pub lobes: usize,
    pub maps: Vec<StateTag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub plane_m: f64,
    pub lobe_intervals_m: Vec<(f64, f64)>,
    pub quantum: Option<StateMetrics>,
    pub thermal: Option<StateMetrics>,
    pub thermal_mc: Option<MonteCarloMetrics>,
    pub splitter: SplitterMetrics,
    pub planes: Vec<PlaneSummary>,
    pub periods: Option<PeriodMetrics>,
}

fn tag(kind: StateKind) -> &'static str {
    match kind {
        StateKind::FockOnePerBeam => "quantum",
        StateKind::Thermal => "thermal",
        StateKind::FixedPhaseCoherent => "coherent",
    }
}

fn correlation(cfg: &ScenarioConfig, kind: StateKind, a: &AmplitudeMatrix, order: usize) -> Result<CorrelationMap, CliError> {
    Ok(match kind {
        StateKind::FockOnePerBeam => quantum_correlation(a, order)?,
        StateKind::Thermal => match cfg.compute.thermal {
            ThermalMethod::Exact => thermal_correlation_exact(a, order)?,
            ThermalMethod::Mc => thermal_correlation_mc(a, order, cfg.compute.seed, cfg.compute.samples)?,
        },
        // beam phases are already part of the amplitudes
        StateKind::FixedPhaseCoherent => coherent_correlation(a, order, &vec![0.0; a.beams()])?,
    })
}

fn relative_asymmetry(g: &CorrelationMap) -> f64 {
    let peak = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        g.exchange_asymmetry() / peak
    } else {
        0.0
    }
}

fn write_maps(cfg: &ScenarioConfig, r: &Resolved, out: &mut OutputDir) -> Result<Vec<PlaneSummary>, CliError> {
    let order = r.order;
    if !(2..=3).contains(&order) {
        return Err(Error::UnsupportedOrder(order).into());
    }
    let samples = if order == 2 { cfg.grid.map_samples } else { cfg.grid.map3_samples };
    let geom = r.geometry.with_mode_count(r.geometry.mode_count().min(samples.saturating_sub(1).max(1)))?;
    let grid = TransverseGrid::for_geometry(&geom, samples)?;
    let beams = PropagatedBeams::new(&r.input, &geom, &grid)?;
    let n = r.input.len();
    let mut planes = Vec::new();
    for (p, &z) in r.planes.iter().enumerate() {
        let a = beams.at(z)?;
        let bins = lobe_bins(&a.incoherent_intensity(), n).ok();
        let mut maps = Vec::new();
        for &kind in &cfg.input.states {
            let g = correlation(cfg, kind, &a, order)?;
            let exchange_asymmetry = relative_asymmetry(&g);
            let (file, lattice_profile) = if order == 2 {
                let file = format!("g2_{}_{p}.csv", tag(kind));
                out.write_matrix(&file, z, &dense_rows(&g.values, samples))?;
                (file, None)
            } else {
                let reduced = reduce_difference_coords(&g)?;
                let file = format!("g3_{}_{p}_reduced.csv", tag(kind));
                out.write_matrix(&file, z, &reduced.rows())?;
                if cfg.output.slices {
                    for (b, &peak) in bins.iter().flat_map(|b| b.peaks.iter()).enumerate() {
                        let slice: Vec<f64> = (0..samples * samples).map(|ij| g.values[ij * samples + peak]).collect();
                        out.write_matrix(&format!("g3_{}_{p}_slice{b}.csv", tag(kind)), z, &dense_rows(&slice, samples))?;
                    }
                }
                let lattice = bins.as_ref().filter(|b| b.len() > 1).map(|b| {
                    let span = (b.peaks[b.len() - 1] - b.peaks[0]) as f64 * grid.spacing();
                    reduced.lattice_profile(span / (b.len() - 1) as f64)
                });
                (file, lattice)
            };
            maps.push(StateTag { state: kind, file, exchange_asymmetry, lattice_profile });
        }
        planes.push(PlaneSummary { z_m: z, lobes: bins.map_or(0, |b| b.len()), maps });
    }
    Ok(planes)
}

fn write_intensities(r: &Resolved, beams: &PropagatedBeams, out: &mut OutputDir) -> Result<(), CliError> {
    for (p, &z) in r.planes.iter().enumerate() {
        let i = beams.at(z)?.incoherent_intensity();
        let rows = r.grid.positions().into_iter().zip(i).map(|(x, v)| vec![x, v]);
        let mut text = format!("# axis units: m\n# z = {z:e}\n");
        text.push_str(&table_csv(&["x", "intensity"], rows));
        out.write(&format!("intensity_{p}.csv"), text.as_bytes())?;
    }
    Ok(())
}

fn write_carpet(cfg: &ScenarioConfig, r: &Resolved, beams: &PropagatedBeams, out: &mut OutputDir) -> Result<(), CliError> {
    let Some(c) = &cfg.compute.carpet else { return Ok(()) };
    let (start, end) = (c.start.resolve(&r.scales), c.end.resolve(&r.scales));
    if !(start >= 0.0 && end > start && c.steps >= 2) {
        return Err(CliError::Config("compute.carpet needs 0 <= start < end and at least 2 steps".into()));
    }
    let k = r.grid.len();
    let mut values = Vec::with_capacity(c.steps * k);
    for s in 0..c.steps {
        let z = start + (end - start) * s as f64 / (c.steps - 1) as f64;
        values.extend(beams.at(z)?.incoherent_intensity());
    }
    let mut text = format!("# axis units: m\n# z = {start:e}:{end:e}:{}\n", c.steps);
    for row in values.chunks(k) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    out.write("carpet.csv", text.as_bytes())?;
    if cfg.output.pgm {
        out.write("carpet.pgm", &pgm(k, &values))?;
    }
    Ok(())
}

fn write_scan(cfg: &ScenarioConfig, r: &Resolved, out: &mut OutputDir) -> Result<Option<PeriodMetrics>, CliError> {
    let Some(s) = &cfg.compute.scan else { return Ok(None) };
    let range = (s.start.resolve(&r.scales), s.end.resolve(&r.scales));
    let scan = scan_recurrence(&r.input, &r.geometry, range, s.steps, s.samples, s.correlation)?;
    let rows = (0..scan.z.len()).map(|i| vec![scan.z[i], scan.intensity_distance[i], scan.correlation_distance[i]]);
    out.write("scan.csv", table_csv(&["z", "intensity_distance", "correlation_distance"], rows).as_bytes())?;
    Ok(Some(PeriodMetrics {
        intensity_m: scan.intensity_period(),
        correlation_m: scan.correlation_period(),
        ratio: scan.period_ratio(),
    }))
}

fn plane_metrics(cfg: &ScenarioConfig, r: &Resolved, beams: &PropagatedBeams) -> Result<Metrics, CliError> {
    let z = r.geometry.length();
    let a = beams.at(z)?;
    let n = r.input.len();
    let bins = lobe_bins(&a.incoherent_intensity(), n)?;
    let dx = r.grid.spacing();
    let lobe_intervals_m = bins.intervals.iter().map(|&(s, e)| (s as f64 * dx, e as f64 * dx)).collect();
    let states = &cfg.input.states;

    let quantum_masses = if states.contains(&StateKind::FockOnePerBeam) {
        if r.order != n {
            return Err(Error::OrderMismatch { order: r.order, beams: n }.into());
        }
        Some(quantum_lobe_masses(&a, &bins)?)
    } else {
        None
    };
    let (thermal, thermal_mc) = if states.contains(&StateKind::Thermal) {
        let exact = thermal_lobe_masses(&a, &bins, r.order)?;
        let mc = match cfg.compute.thermal {
            ThermalMethod::Exact => None,
            ThermalMethod::Mc => {
                let est = thermal_lobe_mc(&a, &bins, r.order, cfg.compute.seed, cfg.compute.samples)?;
                Some(MonteCarloMetrics {
                    samples: est.samples,
                    seed: cfg.compute.seed,
                    within_3_sigma: est.within_sigma(&exact, 3.0),
                    mean: est.mean.values,
                    std_error: est.std_error,
                    exact: exact.values.clone(),
                })
            }
        };
        (Some(StateMetrics::from_masses(&exact)?), mc)
    } else {
        (None, None)
    };

    let t = transfer_matrix_from_amplitudes(&a, &bins)?;
    let fock = fock_output_state(&t)?;
    let fock_output: Vec<Occupation> = fock
        .basis
        .iter()
        .zip(fock.probabilities())
        .map(|(lobes, probability)| Occupation { lobes: lobes.clone(), probability })
        .collect();
    let quantum = quantum_masses.as_ref().map(StateMetrics::from_masses).transpose()?;
    let two_path_deviation = quantum.as_ref().map(|q| {
        q.occupations
            .iter()
            .map(|o| (o.probability - fock.probability(&o.lobes)).abs())
            .fold(0.0, f64::max)
    });
    let thermal_density = if n == 2 {
        match apply_splitter_to_density(&t, &thermal_two_photon_input()) {
            Ok(rho) => Some(DensityMetrics {
                populations: rho.populations(),
                trace: rho.trace().re,
                min_eigenvalue: rho.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min),
                bunching_ratio: rho.bunching_ratio(),
            }),
            Err(Error::NotUnitary { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let splitter = SplitterMetrics {
        moduli: (0..n).map(|m| (0..n).map(|k| t.matrix[(m, k)].norm()).collect()).collect(),
        unitarity_residual: t.unitarity_residual,
        lobe_power_error: t.lobe_power_error(),
        three_photon_profile: if n == 3 { Some(three_photon_profile(&fock)?) } else { None },
        fock_output,
        two_path_deviation,
        thermal_density,
    };
    Ok(Metrics {
        plane_m: z,
        lobe_intervals_m,
        quantum,
        thermal,
        thermal_mc,
        splitter,
        planes: Vec::new(),
        periods: None,
    })
}

/// Run `cfg`, writing every file and `report.json` into `dir`.
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path) -> Result<RunReport, CliError> {
    let r = cfg.resolve()?;
    let mut out = OutputDir::create(dir)?;
    let beams = PropagatedBeams::new(&r.input, &r.geometry, &r.grid)?;
    let mut metrics = plane_metrics(cfg, &r, &beams)?;
    write_intensities(&r, &beams, &mut out)?;
    metrics.planes = write_maps(cfg, &r, &mut out)?;
    write_carpet(cfg, &r, &beams, &mut out)?;
    metrics.periods = write_scan(cfg, &r, &mut out)?;

    let rd = r.geometry.revival_distances();
    let derived = Derived {
        width_m: r.geometry.width(),
        length_m: r.geometry.length(),
        wavelength_m: r.geometry.wavelength(),
        revival_distance_m: rd.revival,
        talbot_distance_m: rd.talbot,
        length_in_talbot: r.geometry.length_in_talbot(),
        modes: r.geometry.mode_count(),
        grid_spacing_m: r.grid.spacing(),
        beam_centers_m: r.input.beams.iter().map(|b| b.center).collect(),
        beam_sigma_m: r.input.beams[0].sigma,
        order: r.order,
        planes_m: r.planes.clone(),
    };
    let report = RunReport {
        name: cfg.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        derived,
        metrics,
        files: out.manifest(),
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    out.write("report.json", json.as_bytes())?;
    Ok(report)
}
