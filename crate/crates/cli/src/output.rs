use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A failed command, split by exit code.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Runtime(e) => e,
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

/// Tag an error with the exit code it should produce.
pub trait Classify<T> {
    fn config(self) -> CmdResult<T>;
    fn runtime(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn runtime(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

/// Parameter errors are configuration errors; everything else is a run-time
/// failure.
pub fn lib_error(e: hfvol::Error) -> Failure {
    match e {
        hfvol::Error::InvalidParameter { .. } => Failure::Config(e.into()),
        _ => Failure::Runtime(e.into()),
    }
}

pub fn config_error(msg: impl std::fmt::Display) -> Failure {
    Failure::Config(anyhow::anyhow!("{msg}"))
}

/// Output directory; created on first use.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: &Path) -> CmdResult<Self> {
        std::fs::create_dir_all(root)
            .with_context(|| format!("cannot create output directory {}", root.display()))
            .config()?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn create(&self, name: &str) -> CmdResult<BufWriter<File>> {
        let p = self.path(name);
        let f = File::create(&p)
            .with_context(|| format!("cannot write {}", p.display()))
            .runtime()?;
        Ok(BufWriter::new(f))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CmdResult<PathBuf> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).runtime()?;
        w.write_all(b"\n").runtime()?;
        w.flush().runtime()?;
        Ok(self.path(name))
    }

    /// Run a CSV writer against a new file.
    pub fn write_with<F>(&self, name: &str, f: F) -> CmdResult<PathBuf>
    where
        F: FnOnce(&mut BufWriter<File>) -> hfvol::Result<()>,
    {
        let mut w = self.create(name)?;
        f(&mut w).runtime()?;
        w.flush().runtime()?;
        Ok(self.path(name))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CmdResult<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))
        .config()?;
    serde_json::from_str(&text)
        .with_context(|| format!("config {}", path.display()))
        .config()
}

/// File-name-safe form of a design label.
pub fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    s.trim_matches('_').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("rho=-0.7"), "rho_-0.7");
        assert_eq!(slug("rho=0.7,dt=0.2s"), "rho_0.7_dt_0.2s");
    }
}
