//! Following eigenstates across a scan by eigenvector overlap.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::diag::{GeometrySpectrum, SpinClass};
use crate::error::{Error, Result};

/// One degenerate level as seen by the tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackLevel {
    pub energy: f64,
    pub class: SpinClass,
    /// Orthonormal vectors spanning the level, in a basis shared by all geometries.
    pub vectors: Vec<Vec<Complex64>>,
}

impl TrackLevel {
    /// `(1/|A|) Σ_{a∈A, b∈B} |⟨a|b⟩|²`
    pub fn overlap(&self, other: &TrackLevel) -> f64 {
        let mut s = 0.0;
        for a in &self.vectors {
            for b in &other.vectors {
                let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                s += ip.norm_sqr();
            }
        }
        s / self.vectors.len() as f64
    }
}

pub fn track_levels_of(spectrum: &GeometrySpectrum) -> Vec<TrackLevel> {
    spectrum
        .levels
        .iter()
        .enumerate()
        .map(|(k, l)| TrackLevel { energy: l.energy, class: l.class, vectors: spectrum.level_vectors(k) })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackOptions {
    /// Steps with overlap below this flag the series.
    pub flag_threshold: f64,
    /// Steps with overlap below this lose the series.
    pub lost_threshold: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self { flag_threshold: 0.8, lost_threshold: 0.5 }
    }
}

/// A state followed through the scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    /// `S0`, `S1`, …, `T1`, …, or `Q1`, … for other multiplicities.
    pub label: String,
    pub class: SpinClass,
    /// Level index at each geometry; `None` once the series is lost.
    pub levels: Vec<Option<usize>>,
    /// Overlap of the step arriving at each geometry: 1 at the reference,
    /// 0 past the point where the series was lost.
    pub overlaps: Vec<f64>,
}

impl Series {
    pub fn min_overlap(&self) -> f64 {
        self.overlaps.iter().copied().fold(1.0, f64::min)
    }

    pub fn is_lost(&self) -> bool {
        self.levels.iter().any(Option::is_none)
    }

    /// Minimum overlap over steps with both ends inside `lo..=hi`.
    pub fn min_overlap_in(&self, lo: usize, hi: usize, reference: usize) -> f64 {
        (lo..=hi)
            .filter(|&k| k != reference)
            .filter(|&k| {
                let from = if k > reference { k - 1 } else { k + 1 };
                (lo..=hi).contains(&from)
            })
            .map(|k| self.overlaps[k])
            .fold(1.0, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tracking {
    pub reference: usize,
    pub flag_threshold: f64,
    pub series: Vec<Series>,
}

impl Tracking {
    /// True if any step of the series fell below the flag threshold.
    pub fn is_flagged(&self, s: &Series) -> bool {
        s.min_overlap() < self.flag_threshold
    }

    pub fn get(&self, label: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.label == label)
    }
}

/// Labels in energy order at one geometry: the lowest level is `S0`.
fn labels(levels: &[TrackLevel]) -> Vec<String> {
    let (mut s, mut t, mut q) = (0, 1, 1);
    levels
        .iter()
        .map(|l| match l.class {
            SpinClass::Singlet => {
                s += 1;
                format!("S{}", s - 1)
            }
            SpinClass::Triplet => {
                t += 1;
                format!("T{}", t - 1)
            }
            SpinClass::Other => {
                q += 1;
                format!("Q{}", q - 1)
            }
        })
        .collect()
}

/// Follow every level of the reference geometry outward in both directions.
///
/// At each step the series are assigned greedily in ascending energy order
/// to the unassigned level of the same spin class with maximal overlap.
pub fn track_levels(scan: &[Vec<TrackLevel>], reference: usize, opts: TrackOptions) -> Result<Tracking> {
    if scan.len() < 2 {
        return Err(Error::InvalidArgument("tracking needs at least two geometries".into()));
    }
    if reference >= scan.len() {
        return Err(Error::InvalidArgument(format!("reference index {reference} out of range")));
    }
    let m = scan.len();
    let names = labels(&scan[reference]);
    let mut series: Vec<Series> = scan[reference]
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let mut levels = vec![None; m];
            levels[reference] = Some(k);
            let mut overlaps = vec![0.0; m];
            overlaps[reference] = 1.0;
            Series { label: names[k].clone(), class: l.class, levels, overlaps }
        })
        .collect();

    let steps = (reference + 1..m).map(|k| (k - 1, k)).chain((0..reference).rev().map(|k| (k + 1, k)));
    for (from, to) in steps {
        let mut order: Vec<usize> = (0..series.len()).filter(|&s| series[s].levels[from].is_some()).collect();
        order.sort_by(|&a, &b| {
            let ea = scan[from][series[a].levels[from].expect("filtered")].energy;
            let eb = scan[from][series[b].levels[from].expect("filtered")].energy;
            ea.total_cmp(&eb)
        });
        let mut taken = vec![false; scan[to].len()];
        let mut best_any: f64 = 0.0;
        for s in order {
            let prev = &scan[from][series[s].levels[from].expect("filtered")];
            let best = scan[to]
                .iter()
                .enumerate()
                .filter(|(k, l)| !taken[*k] && l.class == prev.class)
                .map(|(k, l)| (k, prev.overlap(l)))
                .fold(None, |acc: Option<(usize, f64)>, (k, o)| match acc {
                    Some((_, bo)) if bo >= o => acc,
                    _ => Some((k, o)),
                });
            match best {
                Some((k, o)) if o >= opts.lost_threshold => {
                    taken[k] = true;
                    series[s].levels[to] = Some(k);
                    series[s].overlaps[to] = o;
                    best_any = best_any.max(o);
                }
                other => {
                    series[s].overlaps[to] = other.map_or(0.0, |(_, o)| o);
                    best_any = best_any.max(series[s].overlaps[to]);
                }
            }
        }
        if best_any < opts.lost_threshold {
            return Err(Error::GridTooSparse { step: to, overlap: best_any });
        }
    }
    Ok(Tracking { reference, flag_threshold: opts.flag_threshold, series })
}

/// Track the levels of a scan from the geometry with the lowest ground energy.
pub fn track_states(spectra: &[GeometrySpectrum], opts: TrackOptions) -> Result<Tracking> {
    let reference = spectra
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.ground_energy().total_cmp(&b.1.ground_energy()))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::Empty("no geometries".into()))?;
    let scan: Vec<Vec<TrackLevel>> = spectra.iter().map(track_levels_of).collect();
    track_levels(&scan, reference, opts)
}
