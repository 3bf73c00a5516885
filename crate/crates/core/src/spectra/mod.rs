//! Exact diagonalization, state labelling and tracking, and dataset assembly.

mod dataset;
mod diag;
mod tracking;

pub use dataset::{
    analyze_bundle, build_dataset, Dataset, Scaling, ScanAnalysis, TargetKind, TargetSeries, TargetSpec,
};
pub use diag::{
    analyze_geometry, classify_s2, classify_state, diagonalize, eigh, fix_phase, sector_matrix, tdm_norm,
    AnalysisOptions, GeometrySpectrum, Level, Sector, Spectrum, SpinClass, DEGENERACY_TOLERANCE, SECTOR_QUBIT_LIMIT,
};
pub use tracking::{track_levels, track_levels_of, track_states, Series, TrackLevel, TrackOptions, Tracking};
