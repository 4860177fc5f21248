use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// A named artifact produced by a subcommand.
pub struct Artifact {
    pub name: String,
    pub body: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, body: String) -> Self {
        Self {
            name: name.into(),
            body,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, P: Serialize> {
    pub command: &'a str,
    pub argv: Vec<String>,
    pub params: &'a P,
    pub seed: u64,
    pub version: &'a str,
    pub duration_seconds: f64,
    pub outputs: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes artifacts into `dir` with a `manifest.json`.
pub fn write_dir<P: Serialize>(
    dir: &Path,
    artifacts: &[Artifact],
    command: &str,
    params: &P,
    seed: u64,
    elapsed: Duration,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut outputs = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        fs::write(dir.join(&a.name), a.body.as_bytes())?;
        outputs.push(ManifestEntry {
            file: a.name.clone(),
            sha256: sha256_hex(a.body.as_bytes()),
            bytes: a.body.len(),
        });
    }
    let manifest = Manifest {
        command,
        argv: std::env::args().collect(),
        params,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        duration_seconds: elapsed.as_secs_f64(),
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(dir.join("manifest.json"), json + "\n")
}

/// Prints artifacts to stdout; several are separated by `# <name>` lines.
pub fn write_stdout(artifacts: &[Artifact]) -> io::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let many = artifacts.len() > 1;
    for a in artifacts {
        if many {
            writeln!(out, "# {}", a.name)?;
        }
        out.write_all(a.body.as_bytes())?;
        if !a.body.ends_with('\n') {
            writeln!(out)?;
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
