//! Output lobes and lobe-integrated correlation masses.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::amplitude::AmplitudeMatrix;
use super::map::{surviving_index_pairs, CorrelationMap, MC_CHUNK};
use crate::error::{Error, Result};
use crate::states::sample_phases;

/// Local maxima below this fraction of the global peak are ignored.
pub const LOBE_THRESHOLD: f64 = 0.1;
/// Two maxima are separate lobes only if the intensity between them dips
/// below this fraction of the smaller one.
const LOBE_DIP: f64 = 0.5;

/// Disjoint index intervals `[start, end)` covering the grid, one per lobe,
/// in ascending position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LobeBinning {
    pub intervals: Vec<(usize, usize)>,
    pub peaks: Vec<usize>,
}

impl LobeBinning {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn samples(&self) -> usize {
        self.intervals.last().map_or(0, |iv| iv.1)
    }

    /// Bin index of every grid sample.
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.samples()];
        for (b, &(s, e)) in self.intervals.iter().enumerate() {
            out[s..e].iter_mut().for_each(|v| *v = b);
        }
        out
    }

    pub fn integrate(&self, values: &[f64], spacing: f64) -> Vec<f64> {
        self.intervals.iter().map(|&(s, e)| values[s..e].iter().sum::<f64>() * spacing).collect()
    }
}

fn resolvable_maxima(intensity: &[f64]) -> Vec<usize> {
    let peak = intensity.iter().cloned().fold(0.0, f64::max);
    let k = intensity.len();
    let mut maxima: Vec<usize> = (0..k)
        .filter(|&i| {
            let left = if i == 0 { 0.0 } else { intensity[i - 1] };
            let right = if i + 1 == k { 0.0 } else { intensity[i + 1] };
            intensity[i] > left && intensity[i] >= right && intensity[i] >= LOBE_THRESHOLD * peak
        })
        .collect();
    // Merge maxima that are not separated by a clear dip, keeping the higher one.
    let mut merged = true;
    while merged && maxima.len() > 1 {
        merged = false;
        for w in 0..maxima.len() - 1 {
            let (a, b) = (maxima[w], maxima[w + 1]);
            let dip = intensity[a..=b].iter().cloned().fold(f64::INFINITY, f64::min);
            if dip > LOBE_DIP * intensity[a].min(intensity[b]) {
                let drop = if intensity[a] >= intensity[b] { w + 1 } else { w };
                maxima.remove(drop);
                merged = true;
                break;
            }
        }
    }
    maxima
}

/// Number of resolvable intensity lobes.
pub fn count_lobes(intensity: &[f64]) -> usize {
    resolvable_maxima(intensity).len()
}

/// Bins around the `n` highest resolvable maxima, split at the minima between them.
pub fn lobe_bins(intensity: &[f64], n: usize) -> Result<LobeBinning> {
    let mut maxima = resolvable_maxima(intensity);
    if maxima.len() < n || n == 0 {
        return Err(Error::UnresolvedLobes { found: maxima.len(), needed: n });
    }
    maxima.sort_by(|&a, &b| intensity[b].total_cmp(&intensity[a]).then(a.cmp(&b)));
    maxima.truncate(n);
    maxima.sort_unstable();
    let mut intervals = Vec::with_capacity(n);
    let mut start = 0;
    for w in maxima.windows(2) {
        let split = (w[0]..=w[1]).min_by(|&a, &b| intensity[a].total_cmp(&intensity[b])).unwrap_or(w[1]);
        intervals.push((start, split));
        start = split;
    }
    intervals.push((start, intensity.len()));
    Ok(LobeBinning { intervals, peaks: maxima })
}

/// Correlation mass integrated over every ordered tuple of bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobeMasses {
    pub order: usize,
    pub bins: usize,
    pub values: Vec<f64>,
}

/// Split of order-3 mass by how many photons share a lobe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreePhotonProfile {
    pub triple: f64,
    pub double: f64,
    pub distinct: f64,
}

impl LobeMasses {
    fn tuple(&self, mut idx: usize) -> Vec<usize> {
        let mut t = vec![0; self.order];
        for slot in t.iter_mut().rev() {
            *slot = idx % self.bins;
            idx /= self.bins;
        }
        t
    }

    pub fn get(&self, bins: &[usize]) -> f64 {
        self.values[bins.iter().fold(0, |acc, &b| acc * self.bins + b)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Mass with every photon in the same lobe.
    pub fn bunched(&self) -> f64 {
        self.sum_where(|t| t.iter().all(|&b| b == t[0]))
    }

    /// Mass with no two photons in the same lobe.
    pub fn antibunched(&self) -> f64 {
        self.sum_where(|t| {
            let mut s = t.to_vec();
            s.sort_unstable();
            s.windows(2).all(|w| w[0] != w[1])
        })
    }

    fn sum_where(&self, pred: impl Fn(&[usize]) -> bool) -> f64 {
        (0..self.values.len()).filter(|&i| pred(&self.tuple(i))).map(|i| self.values[i]).sum()
    }

    /// For order 2: same-lobe over different-lobe mass.
    pub fn bunching_ratio(&self) -> Result<f64> {
        if self.order != 2 {
            return Err(Error::UnsupportedOrder(self.order));
        }
        let anti = self.antibunched();
        if anti <= 0.0 || anti <= 1e-12 * self.total() {
            return Err(Error::AllBunched);
        }
        Ok(self.bunched() / anti)
    }

    pub fn three_photon_profile(&self) -> Result<ThreePhotonProfile> {
        if self.order != 3 {
            return Err(Error::UnsupportedOrder(self.order));
        }
        let total = self.total();
        let triple = self.bunched() / total;
        let distinct = self.antibunched() / total;
        Ok(ThreePhotonProfile { triple, double: 1.0 - triple - distinct, distinct })
    }

    /// Occupation probabilities of the `N`-photon lobe states, keyed by
    /// occupation numbers. Ordered-tuple masses are summed and divided by `N!`.
    pub fn occupation_probabilities(&self) -> Vec<(Vec<usize>, f64)> {
        let fact: f64 = (1..=self.order).map(|v| v as f64).product();
        let mut out: Vec<(Vec<usize>, f64)> = Vec::new();
        for i in 0..self.values.len() {
            let mut occ = vec![0; self.bins];
            for b in self.tuple(i) {
                occ[b] += 1;
            }
            match out.iter_mut().find(|(o, _)| *o == occ) {
                Some(entry) => entry.1 += self.values[i] / fact,
                None => out.push((occ, self.values[i] / fact)),
            }
        }
        out.sort_by(|a, b| b.0.cmp(&a.0));
        out
    }
}

/// Integrate a correlation map over all bin tuples.
pub fn integrate_map(g: &CorrelationMap, bins: &LobeBinning) -> Result<LobeMasses> {
    if bins.samples() != g.samples {
        return Err(Error::IncompatibleGrid("binning and map use different grids".into()));
    }
    let assign = bins.assignment();
    let nb = bins.len();
    let mut values = vec![0.0; nb.pow(g.order as u32)];
    let k = g.samples;
    for (idx, &v) in g.values.iter().enumerate() {
        let (mut rest, mut cell, mut mult) = (idx, 0, 1);
        for _ in 0..g.order {
            cell += assign[rest % k] * mult;
            mult *= nb;
            rest /= k;
        }
        values[cell] += v;
    }
    let w = g.spacing.powi(g.order as i32);
    values.iter_mut().for_each(|v| *v *= w);
    Ok(LobeMasses { order: g.order, bins: nb, values })
}

/// Same-lobe over different-lobe mass of an order-2 map.
pub fn bunching_ratio(g: &CorrelationMap, bins: &LobeBinning) -> Result<f64> {
    if g.order != 2 {
        return Err(Error::UnsupportedOrder(g.order));
    }
    integrate_map(g, bins)?.bunching_ratio()
}

/// `O_b[n][n'] = Σ_{x ∈ b} A_n(x) A*_n'(x) Δx` for every bin.
pub fn bin_overlaps(a: &AmplitudeMatrix, bins: &LobeBinning) -> Vec<Vec<Vec<Complex64>>> {
    let dx = a.grid.spacing();
    bins.intervals
        .iter()
        .map(|&(s, e)| {
            (0..a.beams())
                .map(|n| {
                    (0..a.beams())
                        .map(|m| (s..e).map(|x| a.rows[n][x] * a.rows[m][x].conj()).sum::<Complex64>() * dx)
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    match n {
        1 => vec![vec![0]],
        2 => vec![vec![0, 1], vec![1, 0]],
        _ => vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]],
    }
}

fn bin_tuples(nb: usize, order: usize) -> Vec<Vec<usize>> {
    (0..nb.pow(order as u32))
        .map(|mut c| {
            let mut t = vec![0; order];
            for slot in t.iter_mut().rev() {
                *slot = c % nb;
                c /= nb;
            }
            t
        })
        .collect()
}

/// Lobe-integrated quantum correlation for one photon per beam, computed from
/// bin overlaps: `Σ_{σ,τ} Π_j O_{b_j}[σ_j][τ_j]`.
pub fn quantum_lobe_masses(a: &AmplitudeMatrix, bins: &LobeBinning) -> Result<LobeMasses> {
    let order = a.beams();
    if !(2..=3).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let o = bin_overlaps(a, bins);
    let perms = permutations(order);
    let values = bin_tuples(bins.len(), order)
        .iter()
        .map(|t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in &perms {
                for u in &perms {
                    acc += (0..order).map(|j| o[t[j]][s[j]][u[j]]).product::<Complex64>();
                }
            }
            acc.re
        })
        .collect();
    Ok(LobeMasses { order, bins: bins.len(), values })
}

/// Lobe-integrated exact thermal correlation from bin overlaps.
pub fn thermal_lobe_masses(a: &AmplitudeMatrix, bins: &LobeBinning, order: usize) -> Result<LobeMasses> {
    if !(2..=3).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let o = bin_overlaps(a, bins);
    let pairs = surviving_index_pairs(a.beams(), order);
    let values = bin_tuples(bins.len(), order)
        .iter()
        .map(|t| {
            pairs
                .iter()
                .map(|(ua, cb)| (0..order).map(|j| o[t[j]][ua[j]][cb[j]]).product::<Complex64>())
                .sum::<Complex64>()
                .re
        })
        .collect();
    Ok(LobeMasses { order, bins: bins.len(), values })
}

/// Monte-Carlo lobe masses with per-cell standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobeEstimate {
    pub mean: LobeMasses,
    pub std_error: Vec<f64>,
    pub samples: u64,
}

impl LobeEstimate {
    /// Every cell lies within `sigmas` standard errors of `exact`.
    pub fn within_sigma(&self, exact: &LobeMasses, sigmas: f64) -> bool {
        let scale = exact.total().abs().max(1e-300);
        self.mean
            .values
            .iter()
            .zip(&exact.values)
            .zip(&self.std_error)
            .all(|((m, e), s)| (m - e).abs() <= sigmas * s + 1e-9 * scale)
    }
}

/// Sample the pseudo-thermal ensemble directly at lobe level. For each
/// realization the lobe powers `P_b(θ)` are formed from bin overlaps and the
/// cell value is `Π_j P_{b_j}`.
pub fn thermal_lobe_mc(
    a: &AmplitudeMatrix,
    bins: &LobeBinning,
    order: usize,
    seed: u64,
    samples: u64,
) -> Result<LobeEstimate> {
    if !(2..=3).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    if samples < 2 {
        return Err(Error::InvalidInput("need at least two samples for an error estimate".into()));
    }
    let o = bin_overlaps(a, bins);
    let n = a.beams();
    let tuples = bin_tuples(bins.len(), order);
    let cells = tuples.len();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![0.0; cells];
            let mut sq = vec![0.0; cells];
            for s in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(samples) {
                let th = sample_phases(seed, s, n);
                let power: Vec<f64> = o
                    .iter()
                    .map(|ob| {
                        let mut p = Complex64::new(0.0, 0.0);
                        for i in 0..n {
                            for j in 0..n {
                                p += Complex64::from_polar(1.0, th[i] - th[j]) * ob[i][j];
                            }
                        }
                        p.re
                    })
                    .collect();
                for (ci, t) in tuples.iter().enumerate() {
                    let v: f64 = t.iter().map(|&b| power[b]).product();
                    sum[ci] += v;
                    sq[ci] += v * v;
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![0.0; cells];
    let mut sq = vec![0.0; cells];
    for (s, q) in partial {
        sum.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
        sq.iter_mut().zip(&q).for_each(|(a, b)| *a += b);
    }
    let nf = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let std_error = sq
        .iter()
        .zip(&mean)
        .map(|(q, m)| ((q / nf - m * m).max(0.0) * nf / (nf - 1.0) / nf).sqrt())
        .collect();
    Ok(LobeEstimate { mean: LobeMasses { order, bins: bins.len(), values: mean }, std_error, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::map::{quantum_correlation, thermal_correlation_exact, thermal_correlation_mc};
    use crate::geometry::TransverseGrid;

    fn two_bumps(k: usize, a: f64, b: f64) -> Vec<f64> {
        (0..k)
            .map(|i| {
                let x = i as f64 / k as f64;
                a * (-(x - 0.25).powi(2) / 0.002).exp() + b * (-(x - 0.75).powi(2) / 0.002).exp()
            })
            .collect()
    }

    fn lobe_matrix(k: usize, t: [[Complex64; 2]; 2]) -> AmplitudeMatrix {
        // rows[n](x) = Σ_m t[m][n] g_m(x), with g_m unit-norm bumps in disjoint halves
        let grid = TransverseGrid::new(k, 1.0).unwrap();
        let bump = |x: f64, c: f64| (-(x - c).powi(2) / 0.004).exp();
        let norm = ((0..k).map(|i| bump(grid.position(i), 0.25).powi(2)).sum::<f64>() * grid.spacing()).sqrt();
        let rows = (0..2)
            .map(|n| {
                (0..k)
                    .map(|i| {
                        let x = grid.position(i);
                        (t[0][n] * bump(x, 0.25) + t[1][n] * bump(x, 0.75)) / norm
                    })
                    .collect()
            })
            .collect();
        AmplitudeMatrix::new(grid, 0.0, rows).unwrap()
    }

    #[test]
    fn symmetric_two_lobes_split_at_center() {
        let i = two_bumps(200, 1.0, 1.0);
        let bins = lobe_bins(&i, 2).unwrap();
        assert_eq!(bins.len(), 2);
        assert!(bins.intervals[0].1 == 100 || bins.intervals[0].1 == 99);
        assert_eq!(bins.intervals[0].0, 0);
        assert_eq!(bins.intervals[1].1, 200);
    }

    #[test]
    fn single_lobe_cannot_be_split() {
        let i = two_bumps(200, 1.0, 0.0);
        assert!(matches!(lobe_bins(&i, 2), Err(Error::UnresolvedLobes { found: 1, needed: 2 })));
        // a weak satellite below 10% is not a lobe
        assert_eq!(count_lobes(&two_bumps(200, 1.0, 0.05)), 1);
    }

    #[test]
    fn beam_splitter_lobe_statistics() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let a = lobe_matrix(256, [[c(h, 0.0), c(0.0, h)], [c(0.0, h), c(h, 0.0)]]);
        let bins = lobe_bins(&a.incoherent_intensity(), 2).unwrap();
        // Hong-Ou-Mandel: no coincidences across lobes
        let q = quantum_lobe_masses(&a, &bins).unwrap();
        assert!(q.antibunched() < 1e-9);
        assert!((q.total() - 2.0).abs() < 1e-9);
        assert!(matches!(q.bunching_ratio(), Err(Error::AllBunched)));
        // thermal: three times more bunching than anti-bunching
        let t = thermal_lobe_masses(&a, &bins, 2).unwrap();
        assert!((t.bunching_ratio().unwrap() - 3.0).abs() < 1e-9);
        let map = thermal_correlation_exact(&a, 2).unwrap();
        let via_map = integrate_map(&map, &bins).unwrap();
        for (x, y) in via_map.values.iter().zip(&t.values) {
            assert!((x - y).abs() < 1e-9);
        }
        let qmap = integrate_map(&quantum_correlation(&a, 2).unwrap(), &bins).unwrap();
        for (x, y) in qmap.values.iter().zip(&q.values) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn lobe_mc_agrees_with_map_mc_and_exact() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let (co, si) = ((std::f64::consts::PI / 8.0).cos(), (std::f64::consts::PI / 8.0).sin());
        let a = lobe_matrix(128, [[c(co, 0.0), c(0.0, si)], [c(0.0, si), c(co, 0.0)]]);
        let bins = lobe_bins(&a.incoherent_intensity(), 2).unwrap();
        let est = thermal_lobe_mc(&a, &bins, 2, 5, 20_000).unwrap();
        let map = integrate_map(&thermal_correlation_mc(&a, 2, 5, 20_000).unwrap(), &bins).unwrap();
        for (x, y) in est.mean.values.iter().zip(&map.values) {
            assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
        }
        let exact = thermal_lobe_masses(&a, &bins, 2).unwrap();
        assert!((exact.bunching_ratio().unwrap() - 5.0 / 3.0).abs() < 1e-9);
        assert!(est.within_sigma(&exact, 4.0));
    }

    #[test]
    fn occupation_probabilities_divide_by_multiplicity() {
        let c = |re: f64| Complex64::new(re, 0.0);
        let a = lobe_matrix(128, [[c(1.0), c(0.0)], [c(0.0), c(1.0)]]);
        let bins = lobe_bins(&a.incoherent_intensity(), 2).unwrap();
        let q = quantum_lobe_masses(&a, &bins).unwrap();
        let probs = q.occupation_probabilities();
        let p11 = probs.iter().find(|(o, _)| *o == vec![1, 1]).unwrap().1;
        assert!((p11 - 1.0).abs() < 1e-9);
    }
}
