//! Order-3 maps reduced to photon position differences.

use serde::{Deserialize, Serialize};

use super::lobes::ThreePhotonProfile;
use super::map::CorrelationMap;
use crate::error::{Error, Result};

/// Mean of `G(x1, x2, x3)` over all triples sharing `(x1 - x2, x2 - x3)`.
///
/// Differences are in grid steps, `-(K-1)..=(K-1)` on both axes. Cells with
/// no contributing triple are absent rather than zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedMap3 {
    pub samples: usize,
    pub spacing: f64,
    pub z: f64,
    sums: Vec<f64>,
    counts: Vec<u32>,
}

impl ReducedMap3 {
    /// Cells per axis, `2K - 1`.
    pub fn side(&self) -> usize {
        2 * self.samples - 1
    }

    fn cell(&self, d12: isize, d23: isize) -> Option<usize> {
        let off = self.samples as isize - 1;
        let (a, b) = (d12 + off, d23 + off);
        let side = self.side() as isize;
        if (0..side).contains(&a) && (0..side).contains(&b) {
            Some((a * side + b) as usize)
        } else {
            None
        }
    }

    pub fn get(&self, d12: isize, d23: isize) -> Option<f64> {
        let c = self.cell(d12, d23)?;
        (self.counts[c] > 0).then(|| self.sums[c] / self.counts[c] as f64)
    }

    pub fn count(&self, d12: isize, d23: isize) -> u32 {
        self.cell(d12, d23).map_or(0, |c| self.counts[c])
    }

    /// Row-major cells, `d12` ascending by row and `d23` by column.
    pub fn rows(&self) -> Vec<Vec<Option<f64>>> {
        let off = self.samples as isize - 1;
        (-off..=off).map(|a| (-off..=off).map(|b| self.get(a, b)).collect()).collect()
    }

    /// Summed correlation mass (mean times count) grouped by the nearest
    /// point of the lobe lattice `(i·s, j·s)`, for lobe spacing `s` meters:
    /// the origin holds three-photon bunching, the axes and the anti-diagonal
    /// two-photon bunching, everything else complete anti-bunching.
    pub fn lattice_profile(&self, lobe_spacing: f64) -> ThreePhotonProfile {
        let step = lobe_spacing / self.spacing;
        let off = self.samples as isize - 1;
        let (mut triple, mut double, mut distinct) = (0.0, 0.0, 0.0);
        for a in -off..=off {
            for b in -off..=off {
                let c = self.cell(a, b).unwrap();
                if self.counts[c] == 0 {
                    continue;
                }
                let (i, j) = ((a as f64 / step).round() as i64, (b as f64 / step).round() as i64);
                let mass = self.sums[c];
                if i == 0 && j == 0 {
                    triple += mass;
                } else if i == 0 || j == 0 || i + j == 0 {
                    double += mass;
                } else {
                    distinct += mass;
                }
            }
        }
        let total = triple + double + distinct;
        ThreePhotonProfile { triple: triple / total, double: double / total, distinct: distinct / total }
    }
}

pub fn reduce_difference_coords(g: &CorrelationMap) -> Result<ReducedMap3> {
    if g.order != 3 {
        return Err(Error::UnsupportedOrder(g.order));
    }
    let k = g.samples;
    let side = 2 * k - 1;
    let mut sums = vec![0.0; side * side];
    let mut counts = vec![0u32; side * side];
    let off = k - 1;
    for i in 0..k {
        for j in 0..k {
            let row = (i + off - j) * side;
            let base = (i * k + j) * k;
            for l in 0..k {
                let c = row + (j + off - l);
                sums[c] += g.values[base + l];
                counts[c] += 1;
            }
        }
    }
    Ok(ReducedMap3 { samples: k, spacing: g.spacing, z: g.z, sums, counts })
}
