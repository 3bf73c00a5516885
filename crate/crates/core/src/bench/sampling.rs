//! Choosing the `L` training geometries of one replicate.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{fit_gpr, GprGrid};
use crate::error::{Error, Result};
use crate::rng::rng_from;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// One random point per third of the `R` range, then maximal GP posterior
    /// standard deviation.
    Bo,
    Equal,
    Random,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Bo => "bo",
            Strategy::Equal => "equal",
            Strategy::Random => "random",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bo" => Ok(Strategy::Bo),
            "equal" => Ok(Strategy::Equal),
            "random" => Ok(Strategy::Random),
            _ => Err(Error::InvalidArgument(format!("unknown sampling strategy {s:?}"))),
        }
    }
}

/// Region of each grid point: 0 repulsive, 1 equilibrium, 2 attractive
/// (equal thirds of the `R` range).
pub fn regions(r: &[f64]) -> Vec<usize> {
    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / 3.0;
    r.iter().map(|&x| if width > 0.0 { (((x - lo) / width) as usize).min(2) } else { 0 }).collect()
}

/// `L` grid indices spread evenly: `⌊i(M−1)/(L−1)⌋`.
pub fn equal_indices(m: usize, l: usize) -> Vec<usize> {
    (0..l).map(|i| i * (m - 1) / (l - 1)).collect()
}

/// Sorted training indices for one replicate. `r` and `y` are on the scaled axes.
pub fn sample_training_set(r: &[f64], y: &[f64], l: usize, strategy: Strategy, seed: u64) -> Result<Vec<usize>> {
    let m = r.len();
    if y.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: y.len() });
    }
    if l < 3 || l > m {
        return Err(Error::InvalidArgument(format!("training size {l} outside 3..={m}")));
    }
    let mut rng = rng_from(seed);
    let mut picked = match strategy {
        Strategy::Equal => equal_indices(m, l),
        Strategy::Random => index::sample(&mut rng, m, l).into_vec(),
        Strategy::Bo => bo_indices(r, y, l, &mut rng)?,
    };
    picked.sort_unstable();
    Ok(picked)
}

fn bo_indices(r: &[f64], y: &[f64], l: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    let reg = regions(r);
    let mut picked = Vec::with_capacity(l);
    for region in 0..3 {
        let pool: Vec<usize> = (0..r.len()).filter(|&k| reg[k] == region).collect();
        if pool.is_empty() {
            return Err(Error::InvalidArgument(format!("region {region} of the grid is empty")));
        }
        picked.push(pool[rng.random_range(0..pool.len())]);
    }
    let grid = GprGrid::default();
    while picked.len() < l {
        let xs: Vec<f64> = picked.iter().map(|&k| r[k]).collect();
        let ys: Vec<f64> = picked.iter().map(|&k| y[k]).collect();
        let gp = fit_gpr(&xs, &ys, &grid)?;
        let next = (0..r.len())
            .filter(|k| !picked.contains(k))
            .map(|k| (k, gp.predict_with_std(r[k]).1))
            .fold(None, |acc: Option<(usize, f64)>, (k, s)| match acc {
                Some((_, best)) if best >= s => acc,
                _ => Some((k, s)),
            })
            .expect("L ≤ M leaves candidates");
        picked.push(next.0);
    }
    Ok(picked)
}
