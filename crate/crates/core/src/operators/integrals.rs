//! Active-space integral bundles.
//!
//! A bundle is a JSON document holding one record per geometry of a
//! dissociation scan. Matrices are row-major; the two-body tensor is flat
//! with index `p·n³ + q·n² + r·n + s` in physicist ordering, i.e. the
//! coefficient of `a†_p a†_q a_r a_s` in `½ Σ h_pqrs a†_p a†_q a_r a_s`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetry checks use this absolute tolerance.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// One geometry as serialized in a bundle file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GeometryRecord {
    #[serde(rename = "R")]
    pub r: f64,
    pub n_orb: usize,
    pub n_elec: usize,
    pub e_core: f64,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    /// Missing in malformed bundles; reported by validation.
    #[serde(default)]
    pub dipole1: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub nuclear_dipole: Option<Vec<f64>>,
    /// Ground-state energy reported by the exporter, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_energy: Option<f64>,
}

/// A molecule's scan: one record per geometry.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IntegralBundle {
    #[serde(default)]
    pub molecule: String,
    #[serde(default)]
    pub basis: String,
    pub geometries: Vec<GeometryRecord>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BundleFile {
    Document(IntegralBundle),
    Records(Vec<GeometryRecord>),
}

impl IntegralBundle {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(match serde_json::from_str::<BundleFile>(text)? {
            BundleFile::Document(b) => b,
            BundleFile::Records(geometries) => {
                IntegralBundle { molecule: String::new(), basis: String::new(), geometries }
            }
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    /// Every violation found in the bundle; empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.geometries.is_empty() {
            out.push("bundle contains no geometries".to_string());
        }
        for (k, g) in self.geometries.iter().enumerate() {
            for v in g.violations() {
                out.push(format!("geometry {k} (R={}): {v}", g.r));
            }
        }
        for (k, w) in self.geometries.windows(2).enumerate() {
            if w[1].r <= w[0].r {
                out.push(format!("grid not strictly increasing at index {}", k + 1));
            }
        }
        out
    }

    pub fn integrals(&self) -> Result<Vec<ActiveSpaceIntegrals>> {
        self.geometries.iter().map(ActiveSpaceIntegrals::try_from).collect()
    }

    pub fn grid(&self) -> Vec<f64> {
        self.geometries.iter().map(|g| g.r).collect()
    }
}

impl GeometryRecord {
    pub fn violations(&self) -> Vec<String> {
        let n = self.n_orb;
        let mut out = Vec::new();
        if n == 0 {
            out.push("n_orb must be positive".into());
            return out;
        }
        if self.n_elec > 2 * n {
            out.push(format!("n_elec={} exceeds 2·n_orb={}", self.n_elec, 2 * n));
        }
        if !self.e_core.is_finite() || !self.r.is_finite() {
            out.push("non-finite scalar".into());
        }
        check_matrix("h1", &self.h1, n, &mut out);
        if self.h2.len() != n.pow(4) {
            out.push(format!("h2 has {} entries, expected {}", self.h2.len(), n.pow(4)));
        } else if self.h2.iter().any(|v| !v.is_finite()) {
            out.push("h2 contains non-finite entries".into());
        } else {
            let dev = h2_hermiticity_error(&self.h2, n);
            if dev > SYMMETRY_TOLERANCE {
                out.push(format!("h2 not Hermitian (h_pqrs != h_srqp, max deviation {dev:e})"));
            }
        }
        match &self.dipole1 {
            None => out.push("missing dipole block (dipole1)".into()),
            Some(d) if d.len() != 3 => out.push(format!("dipole1 has {} components, expected 3", d.len())),
            Some(d) => {
                for (c, m) in d.iter().enumerate() {
                    check_matrix(&format!("dipole1[{c}]"), m, n, &mut out);
                }
            }
        }
        match &self.nuclear_dipole {
            None => out.push("missing nuclear_dipole".into()),
            Some(v) if v.len() != 3 || v.iter().any(|x| !x.is_finite()) => {
                out.push("nuclear_dipole must be 3 finite numbers".into())
            }
            Some(_) => {}
        }
        out
    }
}

fn check_matrix(name: &str, m: &[f64], n: usize, out: &mut Vec<String>) {
    if m.len() != n * n {
        out.push(format!("{name} has {} entries, expected {}", m.len(), n * n));
        return;
    }
    if m.iter().any(|v| !v.is_finite()) {
        out.push(format!("{name} contains non-finite entries"));
        return;
    }
    let dev = (0..n)
        .flat_map(|p| (0..n).map(move |q| (p, q)))
        .map(|(p, q)| (m[p * n + q] - m[q * n + p]).abs())
        .fold(0.0, f64::max);
    if dev > SYMMETRY_TOLERANCE {
        out.push(format!("{name} not symmetric (max deviation {dev:e})"));
    }
}

fn h2_hermiticity_error(h2: &[f64], n: usize) -> f64 {
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
    let mut dev = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    dev = dev.max((h2[idx(p, q, r, s)] - h2[idx(s, r, q, p)]).abs());
                }
            }
        }
    }
    dev
}

/// Validated integrals for one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSpaceIntegrals {
    pub n_orb: usize,
    pub n_elec: usize,
    /// Hartree.
    pub e_core: f64,
    /// Row-major `n_orb × n_orb`, Hartree.
    pub h1: Vec<f64>,
    /// Physicist-ordered flat tensor, Hartree.
    pub h2: Vec<f64>,
    /// Three row-major matrices, e·a₀.
    pub dipole1: [Vec<f64>; 3],
    /// e·a₀.
    pub nuclear_dipole: [f64; 3],
    /// Å.
    pub r: f64,
}

impl ActiveSpaceIntegrals {
    /// Integrals with zero two-body and dipole parts; handy for building tests.
    pub fn one_body(n_orb: usize, n_elec: usize, e_core: f64, h1: Vec<f64>) -> Self {
        Self {
            n_orb,
            n_elec,
            e_core,
            h1,
            h2: vec![0.0; n_orb.pow(4)],
            dipole1: [vec![0.0; n_orb * n_orb], vec![0.0; n_orb * n_orb], vec![0.0; n_orb * n_orb]],
            nuclear_dipole: [0.0; 3],
            r: 0.0,
        }
    }

    #[inline]
    pub fn h1(&self, p: usize, q: usize) -> f64 {
        self.h1[p * self.n_orb + q]
    }

    #[inline]
    pub fn h2(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orb;
        self.h2[((p * n + q) * n + r) * n + s]
    }

    #[inline]
    pub fn dipole(&self, c: usize, p: usize, q: usize) -> f64 {
        self.dipole1[c][p * self.n_orb + q]
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_orb
    }

    pub fn to_record(&self) -> GeometryRecord {
        GeometryRecord {
            r: self.r,
            n_orb: self.n_orb,
            n_elec: self.n_elec,
            e_core: self.e_core,
            h1: self.h1.clone(),
            h2: self.h2.clone(),
            dipole1: Some(self.dipole1.to_vec()),
            nuclear_dipole: Some(self.nuclear_dipole.to_vec()),
            reference_energy: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.to_record().violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidIntegrals(v.join("; ")))
        }
    }
}

impl TryFrom<&GeometryRecord> for ActiveSpaceIntegrals {
    type Error = Error;

    fn try_from(g: &GeometryRecord) -> Result<Self> {
        let v = g.violations();
        if !v.is_empty() {
            return Err(Error::InvalidIntegrals(v.join("; ")));
        }
        let d = g.dipole1.as_ref().expect("validated");
        let nd = g.nuclear_dipole.as_ref().expect("validated");
        Ok(Self {
            n_orb: g.n_orb,
            n_elec: g.n_elec,
            e_core: g.e_core,
            h1: g.h1.clone(),
            h2: g.h2.clone(),
            dipole1: [d[0].clone(), d[1].clone(), d[2].clone()],
            nuclear_dipole: [nd[0], nd[1], nd[2]],
            r: g.r,
        })
    }
}
