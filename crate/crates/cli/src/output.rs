//! Self-describing output files: every CSV opens with `#` comment lines
//! naming the code version, config hash, seed and units.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Out {
    pub dir: PathBuf,
    pub hash: String,
    pub seed: u64,
}

impl Out {
    pub fn new(config: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(&config.output)
            .with_context(|| format!("creating output directory {}", config.output.display()))?;
        let out = Self { dir: config.output.clone(), hash: config.hash(), seed: config.seed };
        std::fs::write(out.path("run_config.toml"), format!("{}\n{}", out.preamble(&[]), config.to_toml()))?;
        Ok(out)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn preamble(&self, notes: &[&str]) -> String {
        let mut s = format!("# siqnn {VERSION}\n# config_hash: {}\n# seed: {}\n", self.hash, self.seed);
        for n in notes {
            s.push_str(&format!("# {n}\n"));
        }
        s
    }

    pub fn writer(&self, name: &str, notes: &[&str]) -> Result<BufWriter<File>> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        w.write_all(self.preamble(notes).as_bytes())?;
        Ok(w)
    }

    pub fn csv<T: Serialize>(&self, name: &str, notes: &[&str], rows: impl IntoIterator<Item = T>) -> Result<PathBuf> {
        let mut w = csv::Writer::from_writer(self.writer(name, notes)?);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(self.path(name))
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            version: &'a str,
            config_hash: &'a str,
            seed: u64,
            data: &'a T,
        }
        let w = Wrapped { version: VERSION, config_hash: &self.hash, seed: self.seed, data: value };
        let path = self.path(name);
        std::fs::write(&path, serde_json::to_string_pretty(&w)? + "\n")?;
        Ok(path)
    }
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().collect::<std::result::Result<_, _>>().with_context(|| format!("parsing {}", path.display()))
}

/// `dE:T2` → `dE_T2`, for file names.
pub fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}
