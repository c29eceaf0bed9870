//! Spatial correlation maps of order 2 and 3.
//!
//! Maps are stored densely over ordered coordinate tuples. Every map is
//! evaluated on sorted tuples only and copied to all permutations, so
//! exchange symmetry is exact.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::amplitude::AmplitudeMatrix;
use crate::error::{Error, Result};
use crate::permanent::{permanent2, permanent3};
use crate::states::sample_phases;

/// Samples per deterministic accumulation chunk of the Monte-Carlo estimators.
pub(crate) const MC_CHUNK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Unnormalized joint detection rate.
    Raw,
    /// Divided by the product of singles rates.
    SinglesNormalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMap {
    pub order: usize,
    pub samples: usize,
    pub spacing: f64,
    pub z: f64,
    pub normalization: Normalization,
    pub values: Vec<f64>,
}

impl CorrelationMap {
    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.samples + c)
    }

    pub fn get(&self, coords: &[usize]) -> f64 {
        self.values[self.index(coords)]
    }

    /// Integral over all coordinates.
    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing.powi(self.order as i32)
    }

    /// Largest difference between the map and any coordinate permutation of it.
    pub fn exchange_asymmetry(&self) -> f64 {
        let k = self.samples;
        let mut worst: f64 = 0.0;
        match self.order {
            2 => {
                for i in 0..k {
                    for j in 0..k {
                        worst = worst.max((self.get(&[i, j]) - self.get(&[j, i])).abs());
                    }
                }
            }
            _ => {
                for i in 0..k {
                    for j in 0..k {
                        for l in 0..k {
                            let v = self.get(&[i, j, l]);
                            for p in [[j, i, l], [i, l, j], [l, j, i], [j, l, i], [l, i, j]] {
                                worst = worst.max((v - self.get(&p)).abs());
                            }
                        }
                    }
                }
            }
        }
        worst
    }

    /// `Σ|self - other| / Σ|other|`.
    pub fn l1_distance(&self, other: &CorrelationMap) -> f64 {
        let num: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum();
        let den: f64 = other.values.iter().map(|b| b.abs()).sum();
        num / den
    }

    /// Divide by `Π_j I(x_j)`; cells whose singles product vanishes become zero.
    pub fn singles_normalized(&self, singles: &[f64]) -> Result<CorrelationMap> {
        if singles.len() != self.samples {
            return Err(Error::IncompatibleGrid("singles rate has the wrong length".into()));
        }
        let peak = singles.iter().cloned().fold(0.0, f64::max);
        let floor = peak.powi(self.order as i32) * 1e-24;
        let mut out = self.clone();
        out.normalization = Normalization::SinglesNormalized;
        let k = self.samples;
        for (idx, v) in out.values.iter_mut().enumerate() {
            let mut rest = idx;
            let mut den = 1.0;
            for _ in 0..self.order {
                den *= singles[rest % k];
                rest /= k;
            }
            *v = if den > floor { *v / den } else { 0.0 };
        }
        Ok(out)
    }
}

/// Evaluate `f` on sorted tuples and scatter to every permutation.
fn fill_symmetric<F>(order: usize, k: usize, f: F) -> Vec<f64>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let mut values = vec![0.0; k.pow(order as u32)];
    match order {
        2 => {
            let rows: Vec<Vec<f64>> = (0..k).into_par_iter().map(|i| (i..k).map(|j| f(&[i, j])).collect()).collect();
            for (i, row) in rows.into_iter().enumerate() {
                for (off, v) in row.into_iter().enumerate() {
                    let j = i + off;
                    values[i * k + j] = v;
                    values[j * k + i] = v;
                }
            }
        }
        3 => {
            let slabs: Vec<Vec<f64>> = (0..k)
                .into_par_iter()
                .map(|i| {
                    let mut out = Vec::with_capacity((k - i) * (k - i + 1) / 2);
                    for j in i..k {
                        for l in j..k {
                            out.push(f(&[i, j, l]));
                        }
                    }
                    out
                })
                .collect();
            for (i, slab) in slabs.into_iter().enumerate() {
                let mut it = slab.into_iter();
                for j in i..k {
                    for l in j..k {
                        let v = it.next().unwrap_or(0.0);
                        for [a, b, c] in [[i, j, l], [i, l, j], [j, i, l], [j, l, i], [l, i, j], [l, j, i]] {
                            values[(a * k + b) * k + c] = v;
                        }
                    }
                }
            }
        }
        _ => unreachable!("orders are validated by callers"),
    }
    values
}

fn check_order(order: usize) -> Result<()> {
    if order == 2 || order == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(order))
    }
}

fn new_map(a: &AmplitudeMatrix, order: usize, values: Vec<f64>) -> CorrelationMap {
    CorrelationMap {
        order,
        samples: a.samples(),
        spacing: a.grid.spacing(),
        z: a.z,
        normalization: Normalization::Raw,
        values,
    }
}

/// `G(x_1..x_N) = |perm[A_n(x_j)]|²` for one photon in each of the `N` beams.
pub fn quantum_correlation(a: &AmplitudeMatrix, order: usize) -> Result<CorrelationMap> {
    check_order(order)?;
    if order != a.beams() {
        return Err(Error::OrderMismatch { order, beams: a.beams() });
    }
    let r = &a.rows;
    let values = match order {
        2 => fill_symmetric(2, a.samples(), |x| permanent2([r[0][x[0]], r[0][x[1]]], [r[1][x[0]], r[1][x[1]]]).norm_sqr()),
        _ => fill_symmetric(3, a.samples(), |x| {
            permanent3(
                [r[0][x[0]], r[0][x[1]], r[0][x[2]]],
                [r[1][x[0]], r[1][x[1]], r[1][x[2]]],
                [r[2][x[0]], r[2][x[1]], r[2][x[2]]],
            )
            .norm_sqr()
        }),
    };
    Ok(new_map(a, order, values))
}

/// Beam-index tuple pairs `(a, b)` whose phase factor
/// `exp(i Σθ_{a_j} - i Σθ_{b_j})` averages to one: `b` is a rearrangement of `a`.
pub(crate) fn surviving_index_pairs(beams: usize, order: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let tuples: Vec<Vec<usize>> = (0..beams.pow(order as u32))
        .map(|mut code| {
            let mut t = vec![0; order];
            for slot in t.iter_mut().rev() {
                *slot = code % beams;
                code /= beams;
            }
            t
        })
        .collect();
    let sorted = |t: &Vec<usize>| {
        let mut s = t.clone();
        s.sort_unstable();
        s
    };
    let mut pairs = Vec::new();
    for a in &tuples {
        for b in &tuples {
            if sorted(a) == sorted(b) {
                pairs.push((a.clone(), b.clone()));
            }
        }
    }
    pairs
}

/// Uniform-phase ensemble average of `Π_j I(x_j)`, summed exactly over the
/// surviving beam-index terms.
pub fn thermal_correlation_exact(a: &AmplitudeMatrix, order: usize) -> Result<CorrelationMap> {
    check_order(order)?;
    let pairs = surviving_index_pairs(a.beams(), order);
    let r = &a.rows;
    let values = fill_symmetric(order, a.samples(), |x| {
        pairs
            .iter()
            .map(|(ua, cb)| {
                (0..order)
                    .map(|j| r[ua[j]][x[j]] * r[cb[j]][x[j]].conj())
                    .product::<Complex64>()
            })
            .sum::<Complex64>()
            .re
            .max(0.0)
    });
    Ok(new_map(a, order, values))
}

/// Empirical moments `<Π_j w_{p_j}>` of the pair phase factors
/// `w_{(n,n')} = exp(i(θ_n - θ_n'))`, flattened over `(N²)^order`.
struct PhaseMoments {
    pairs: usize,
    values: Vec<Complex64>,
}

impl PhaseMoments {
    fn accumulate(beams: usize, order: usize, phase_sets: impl Iterator<Item = Vec<f64>>) -> Vec<Complex64> {
        let p = beams * beams;
        let mut acc = vec![Complex64::new(0.0, 0.0); p.pow(order as u32)];
        let mut w = vec![Complex64::new(0.0, 0.0); p];
        for th in phase_sets {
            for n in 0..beams {
                for m in 0..beams {
                    w[n * beams + m] = Complex64::from_polar(1.0, th[n] - th[m]);
                }
            }
            match order {
                2 => {
                    for (i, wi) in w.iter().enumerate() {
                        for (j, wj) in w.iter().enumerate() {
                            acc[i * p + j] += wi * wj;
                        }
                    }
                }
                _ => {
                    for (i, wi) in w.iter().enumerate() {
                        for (j, wj) in w.iter().enumerate() {
                            let wij = wi * wj;
                            for (l, wl) in w.iter().enumerate() {
                                acc[(i * p + j) * p + l] += wij * wl;
                            }
                        }
                    }
                }
            }
        }
        acc
    }

    fn from_seed(beams: usize, order: usize, seed: u64, samples: u64) -> Self {
        let chunks = samples.div_ceil(MC_CHUNK);
        let partial: Vec<Vec<Complex64>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let range = c * MC_CHUNK..((c + 1) * MC_CHUNK).min(samples);
                Self::accumulate(beams, order, range.map(|s| sample_phases(seed, s, beams)))
            })
            .collect();
        Self::finish(beams, partial, samples as f64)
    }

    fn finish(beams: usize, partial: Vec<Vec<Complex64>>, count: f64) -> Self {
        let mut values = partial[0].clone();
        for part in &partial[1..] {
            values.iter_mut().zip(part).for_each(|(v, p)| *v += p);
        }
        values.iter_mut().for_each(|v| *v /= count);
        Self { pairs: beams * beams, values }
    }

    /// `Re Σ_p M[p] Π_j B_{p_j}(x_j)` with `B_{(n,n')}(x) = A_n(x) A*_n'(x)`.
    fn contract(&self, a: &AmplitudeMatrix, order: usize) -> Vec<f64> {
        let n = a.beams();
        let p = self.pairs;
        let k = a.samples();
        let basis: Vec<Vec<Complex64>> = (0..k)
            .map(|x| {
                let mut b = Vec::with_capacity(p);
                for i in 0..n {
                    for j in 0..n {
                        b.push(a.rows[i][x] * a.rows[j][x].conj());
                    }
                }
                b
            })
            .collect();
        // Contract the last index first: h[x][rest] = Σ_q M[rest, q] B_q(x).
        let inner = p.pow(order as u32 - 1);
        let h: Vec<Vec<Complex64>> = basis
            .iter()
            .map(|b| {
                (0..inner)
                    .map(|rest| (0..p).map(|q| self.values[rest * p + q] * b[q]).sum())
                    .collect()
            })
            .collect();
        fill_symmetric(order, k, |x| {
            let last = x[order - 1];
            let v: Complex64 = match order {
                2 => (0..p).map(|i| basis[x[0]][i] * h[last][i]).sum(),
                _ => (0..p)
                    .map(|i| {
                        let bi = basis[x[0]][i];
                        (0..p).map(|j| bi * basis[x[1]][j] * h[last][i * p + j]).sum::<Complex64>()
                    })
                    .sum(),
            };
            v.re.max(0.0)
        })
    }
}

/// Mean of `Π_j I_θ(x_j)` over explicit phase realizations.
pub fn thermal_correlation_from_phases(
    a: &AmplitudeMatrix,
    order: usize,
    phase_sets: &[Vec<f64>],
) -> Result<CorrelationMap> {
    check_order(order)?;
    if phase_sets.is_empty() {
        return Err(Error::InvalidInput("no phase realizations".into()));
    }
    if let Some(p) = phase_sets.iter().find(|p| p.len() != a.beams()) {
        return Err(Error::PhaseCount { expected: a.beams(), got: p.len() });
    }
    let acc = PhaseMoments::accumulate(a.beams(), order, phase_sets.iter().cloned());
    let moments = PhaseMoments::finish(a.beams(), vec![acc], phase_sets.len() as f64);
    Ok(new_map(a, order, moments.contract(a, order)))
}

/// Pseudo-thermal correlation estimated from `samples` seeded phase
/// realizations. The result depends only on `(seed, samples)`, not on the
/// number of worker threads.
pub fn thermal_correlation_mc(a: &AmplitudeMatrix, order: usize, seed: u64, samples: u64) -> Result<CorrelationMap> {
    check_order(order)?;
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample is required".into()));
    }
    let moments = PhaseMoments::from_seed(a.beams(), order, seed, samples);
    Ok(new_map(a, order, moments.contract(a, order)))
}

/// Coherent product `Π_j I_θ(x_j)` for one fixed phase setting.
pub fn coherent_correlation(a: &AmplitudeMatrix, order: usize, phases: &[f64]) -> Result<CorrelationMap> {
    thermal_correlation_from_phases(a, order, &[phases.to_vec()])
}
