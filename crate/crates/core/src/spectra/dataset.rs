//! Target series and regression datasets.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diag::{analyze_geometry, AnalysisOptions, GeometrySpectrum, SpinClass};
use super::tracking::{track_levels, track_levels_of, TrackLevel, TrackOptions, Tracking};
use crate::error::{Error, Result};
use crate::operators::IntegralBundle;
use crate::simulator::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// `E_j − E_{S0}`, Hartree.
    TransitionEnergy,
    /// `‖⟨ψ_j|μ|ψ₀⟩‖₂`, e·a₀.
    TdmNorm,
}

/// A target function, written `dE:T2` or `tdm:S1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct TargetSpec {
    pub kind: TargetKind,
    pub state: String,
}

impl TargetSpec {
    pub fn energy(state: &str) -> Self {
        Self { kind: TargetKind::TransitionEnergy, state: state.to_string() }
    }

    pub fn tdm(state: &str) -> Self {
        Self { kind: TargetKind::TdmNorm, state: state.to_string() }
    }

    pub fn unit(&self) -> &'static str {
        match self.kind {
            TargetKind::TransitionEnergy => "Ha",
            TargetKind::TdmNorm => "e*a0",
        }
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            TargetKind::TransitionEnergy => "dE",
            TargetKind::TdmNorm => "tdm",
        };
        write!(f, "{k}:{}", self.state)
    }
}

impl FromStr for TargetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (k, state) = s.split_once(':').ok_or_else(|| Error::UnknownTarget(s.to_string()))?;
        let kind = match k.to_ascii_lowercase().as_str() {
            "de" | "energy" => TargetKind::TransitionEnergy,
            "tdm" => TargetKind::TdmNorm,
            _ => return Err(Error::UnknownTarget(s.to_string())),
        };
        let valid = state.len() >= 2
            && matches!(state.as_bytes()[0], b'S' | b'T' | b'Q')
            && state[1..].bytes().all(|b| b.is_ascii_digit());
        if !valid {
            return Err(Error::UnknownTarget(s.to_string()));
        }
        Ok(Self { kind, state: state.to_string() })
    }
}

impl From<TargetSpec> for String {
    fn from(t: TargetSpec) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for TargetSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Min-max map of `R` and `y` onto `[−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub r_min: f64,
    pub r_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

impl Scaling {
    /// Bounds from data; a constant series is widened to unit span.
    pub fn fit(r: &[f64], y: &[f64]) -> Self {
        let (r_min, r_max) = bounds(r);
        let (y_min, y_max) = bounds(y);
        Self { r_min, r_max, y_min, y_max }
    }

    pub fn scale_r(&self, r: f64) -> f64 {
        2.0 * (r - self.r_min) / (self.r_max - self.r_min) - 1.0
    }

    pub fn unscale_r(&self, s: f64) -> f64 {
        (s + 1.0) * 0.5 * (self.r_max - self.r_min) + self.r_min
    }

    pub fn scale_y(&self, y: f64) -> f64 {
        2.0 * (y - self.y_min) / (self.y_max - self.y_min) - 1.0
    }

    pub fn unscale_y(&self, s: f64) -> f64 {
        (s + 1.0) * 0.5 * (self.y_max - self.y_min) + self.y_min
    }

    /// `(Δy/2)²`: scaled squared errors times this are physical.
    pub fn mse_factor(&self) -> f64 {
        let h = 0.5 * (self.y_max - self.y_min);
        h * h
    }
}

/// Values of one target over the scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSeries {
    pub target: TargetSpec,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Tracking overlap of the step arriving at each geometry.
    pub overlaps: Vec<f64>,
    pub flagged: bool,
}

/// Diagonalized and tracked scan of one molecule.
#[derive(Debug, Clone)]
pub struct ScanAnalysis {
    pub molecule: String,
    pub spectra: Vec<GeometrySpectrum>,
    pub tracking: Tracking,
}

pub fn analyze_bundle(bundle: &IntegralBundle, analysis: AnalysisOptions, track: TrackOptions) -> Result<ScanAnalysis> {
    let v = bundle.violations();
    if !v.is_empty() {
        return Err(Error::InvalidIntegrals(v.join("; ")));
    }
    let ints = bundle.integrals()?;
    let spectra: Vec<GeometrySpectrum> =
        ints.par_iter().map(|i| analyze_geometry(i, analysis)).collect::<Result<_>>()?;
    let tracking = super::tracking::track_states(&spectra, track)?;
    Ok(ScanAnalysis { molecule: bundle.molecule.clone(), spectra, tracking })
}

impl ScanAnalysis {
    pub fn grid(&self) -> Vec<f64> {
        self.spectra.iter().map(|s| s.r).collect()
    }

    pub fn series(&self, target: &TargetSpec) -> Result<TargetSeries> {
        let s = self.tracking.get(&target.state).ok_or_else(|| Error::UnknownTarget(target.to_string()))?;
        let ground = self.tracking.get("S0").expect("ground level is always labelled");
        if let Some(k) = s.levels.iter().position(Option::is_none) {
            return Err(Error::GridTooSparse { step: k, overlap: s.overlaps[k] });
        }
        let values = self
            .spectra
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let level = s.levels[k].expect("checked");
                match target.kind {
                    TargetKind::TransitionEnergy => {
                        g.levels[level].energy - g.levels[ground.levels[k].expect("ground")].energy
                    }
                    TargetKind::TdmNorm => g.level_tdm(level),
                }
            })
            .collect();
        Ok(TargetSeries {
            target: target.clone(),
            grid: self.grid(),
            values,
            overlaps: s.overlaps.clone(),
            flagged: self.tracking.is_flagged(s),
        })
    }

    /// Re-track the scan restricted to `lo ≤ R ≤ hi`, with the reference at
    /// the in-range geometry nearest the global one.
    pub fn restricted(&self, lo: f64, hi: f64, track: TrackOptions) -> Result<ScanAnalysis> {
        let keep: Vec<usize> = (0..self.spectra.len()).filter(|&k| (lo..=hi).contains(&self.spectra[k].r)).collect();
        if keep.len() < 2 {
            return Err(Error::Empty(format!("fewer than two geometries in [{lo}, {hi}]")));
        }
        let r0 = self.spectra[self.tracking.reference].r;
        let reference = (0..keep.len())
            .min_by(|&a, &b| (self.spectra[keep[a]].r - r0).abs().total_cmp(&(self.spectra[keep[b]].r - r0).abs()))
            .expect("nonempty");
        let spectra: Vec<GeometrySpectrum> = keep.iter().map(|&k| self.spectra[k].clone()).collect();
        let scan: Vec<Vec<TrackLevel>> = spectra.iter().map(track_levels_of).collect();
        let tracking = track_levels(&scan, reference, track)?;
        Ok(ScanAnalysis { molecule: self.molecule.clone(), spectra, tracking })
    }

    /// The lowest `per_class` excited singlets and triplets without flagged
    /// steps, as transition energies; singlet TDM norms whose maximum over the
    /// scan exceeds `tdm_floor`.
    pub fn default_targets(&self, per_class: usize, tdm_floor: f64) -> Vec<TargetSpec> {
        let mut out = Vec::new();
        let mut tdms = Vec::new();
        for class in [SpinClass::Singlet, SpinClass::Triplet] {
            let excited = self.tracking.series.iter().filter(|s| s.class == class && s.label != "S0").take(per_class);
            for s in excited {
                if s.is_lost() || self.tracking.is_flagged(s) {
                    continue;
                }
                out.push(TargetSpec::energy(&s.label));
                if class == SpinClass::Singlet {
                    let t = TargetSpec::tdm(&s.label);
                    if let Ok(series) = self.series(&t) {
                        if series.values.iter().copied().fold(0.0, f64::max) > tdm_floor {
                            tdms.push(t);
                        }
                    }
                }
            }
        }
        out.extend(tdms);
        out
    }
}

/// Regression data for one target: ground states, distances and values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub molecule: String,
    pub target: TargetSpec,
    pub states: Vec<StateVector>,
    /// Å
    pub r: Vec<f64>,
    /// Physical units of the target.
    pub y: Vec<f64>,
    pub scaling: Scaling,
}

/// Assemble the dataset of one target, optionally on a sub-range of `R`.
pub fn build_dataset(
    analysis: &ScanAnalysis,
    target: &TargetSpec,
    range: Option<(f64, f64)>,
    track: TrackOptions,
) -> Result<Dataset> {
    let restricted;
    let scan = match range {
        Some((lo, hi)) => {
            restricted = analysis.restricted(lo, hi, track)?;
            &restricted
        }
        None => analysis,
    };
    let series = scan.series(target)?;
    if series.flagged {
        return Err(Error::AvoidedCrossing(target.to_string()));
    }
    let states: Vec<StateVector> = scan.spectra.iter().map(GeometrySpectrum::ground_state).collect();
    let scaling = Scaling::fit(&series.grid, &series.values);
    Ok(Dataset {
        molecule: scan.molecule.clone(),
        target: target.clone(),
        states,
        r: series.grid,
        y: series.values,
        scaling,
    })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.states.first().map_or(0, StateVector::n_qubits)
    }

    pub fn r_scaled(&self) -> Vec<f64> {
        self.r.iter().map(|&r| self.scaling.scale_r(r)).collect()
    }

    pub fn y_scaled(&self) -> Vec<f64> {
        self.y.iter().map(|&y| self.scaling.scale_y(y)).collect()
    }

    /// Write `<stem>.json` (metadata) and `<stem>.bin` (amplitudes).
    ///
    /// The binary file holds the ground states back to back, each as
    /// `2^n` amplitudes stored as little-endian `f64` pairs `(re, im)`.
    pub fn save(&self, stem: impl AsRef<Path>) -> Result<()> {
        let (json, bin) = cache_paths(stem.as_ref());
        let meta = CacheMeta {
            molecule: self.molecule.clone(),
            target: self.target.clone(),
            n_qubits: self.n_qubits(),
            n_states: self.len(),
            amplitudes_file: bin.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            layout: "states back to back; each 2^n_qubits amplitudes as little-endian f64 (re, im)".into(),
            r: self.r.clone(),
            y: self.y.clone(),
            scaling: self.scaling,
        };
        let mut bytes = Vec::with_capacity((self.len() * 16) << self.n_qubits());
        for s in &self.states {
            for a in s.amplitudes() {
                bytes.extend_from_slice(&a.re.to_le_bytes());
                bytes.extend_from_slice(&a.im.to_le_bytes());
            }
        }
        std::fs::write(&json, serde_json::to_string_pretty(&meta)?)?;
        std::fs::write(&bin, bytes)?;
        Ok(())
    }

    pub fn load(stem: impl AsRef<Path>) -> Result<Self> {
        let (json, _) = cache_paths(stem.as_ref());
        let meta: CacheMeta = serde_json::from_str(&std::fs::read_to_string(&json)?)?;
        let bin = json.with_file_name(&meta.amplitudes_file);
        let bytes = std::fs::read(bin)?;
        let dim = 1usize << meta.n_qubits;
        if bytes.len() != meta.n_states * dim * 16 || meta.r.len() != meta.n_states {
            return Err(Error::InvalidState("dataset cache size does not match its metadata".into()));
        }
        let f = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().expect("8 bytes"));
        let states = (0..meta.n_states)
            .map(|s| {
                let amps = (0..dim)
                    .map(|i| {
                        let k = 2 * (s * dim + i);
                        Complex64::new(f(k), f(k + 1))
                    })
                    .collect();
                StateVector::from_amplitudes(amps)
            })
            .collect::<Result<_>>()?;
        Ok(Self { molecule: meta.molecule, target: meta.target, states, r: meta.r, y: meta.y, scaling: meta.scaling })
    }
}

fn cache_paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

#[derive(Serialize, Deserialize)]
struct CacheMeta {
    molecule: String,
    target: TargetSpec,
    n_qubits: usize,
    n_states: usize,
    amplitudes_file: String,
    layout: String,
    r: Vec<f64>,
    y: Vec<f64>,
    scaling: Scaling,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_maps_bounds() {
        let s = Scaling::fit(&[0.5, 1.0, 3.3], &[2.0, 4.0, 3.0]);
        assert_eq!(s.scale_r(0.5), -1.0);
        assert_eq!(s.scale_r(3.3), 1.0);
        assert_eq!(s.scale_y(3.0), 0.0);
        assert!((s.unscale_y(s.scale_y(3.7)) - 3.7).abs() < 1e-12);
        assert_eq!(s.mse_factor(), 1.0);
    }

    #[test]
    fn constant_series_scales_finitely() {
        let s = Scaling::fit(&[0.0, 1.0], &[2.0, 2.0]);
        assert_eq!(s.scale_y(2.0), 0.0);
    }

    #[test]
    fn target_spec_round_trip() {
        for text in ["dE:T2", "tdm:S1"] {
            let t: TargetSpec = text.parse().unwrap();
            assert_eq!(t.to_string(), text);
        }
        assert!("dE:X1".parse::<TargetSpec>().is_err());
        assert!("foo".parse::<TargetSpec>().is_err());
    }
}
