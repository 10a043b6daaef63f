//! CSV output with a `#` provenance header, and the provenance record.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::RunDocument;
use crate::error::Result;

pub const PROVENANCE_FILE: &str = "provenance.txt";

/// What produced an output directory. Contains no timestamps, so identical
/// inputs give identical bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: &'static str,
    pub tolerances: Vec<(&'static str, String)>,
}

impl Provenance {
    pub fn new(command: &str, doc: &RunDocument) -> Result<Self> {
        let canonical = doc.to_toml()?;
        let k = &doc.numerics.kernel;
        Ok(Self {
            command: command.to_string(),
            config_hash: sha256_hex(canonical.as_bytes()),
            seed: doc.numerics.seed,
            version: env!("CARGO_PKG_VERSION"),
            tolerances: vec![
                ("kernel.truncation", format!("{:e}", crate::kernel::TRUNCATION_TOL)),
                ("kernel.imag_tol", format!("{:e}", k.imag_tol)),
                ("kernel.ray_order", k.ray_order.to_string()),
                ("kernel.arc_order", k.arc_order.to_string()),
                ("duhamel.nodes", (doc.numerics.duhamel.panels * doc.numerics.duhamel.order).to_string()),
                ("oracle.dt", format!("{:e}", doc.numerics.oracle.dt)),
                ("oracle.alpha_nodes", doc.numerics.oracle.alpha_nodes.to_string()),
            ],
        })
    }

    /// Lines for a CSV comment header (without the `#`).
    pub fn header(&self) -> Vec<String> {
        vec![
            format!("ultraslow {} {}", self.version, self.command),
            format!("config_sha256 {}", self.config_hash),
            format!("seed {}", self.seed),
        ]
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "config_sha256 = {}", self.config_hash);
        let _ = writeln!(s, "seed = {}", self.seed);
        for (k, v) in &self.tolerances {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Writes the provenance record and the canonical config into `dir`.
    pub fn write(&self, dir: &Path, doc: &RunDocument) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(PROVENANCE_FILE), self.render())?;
        std::fs::write(dir.join("config.toml"), doc.to_toml()?)?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Fixed-width scientific notation used by every CSV column.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.15e}")
}

/// Comment header, column names, then rows.
pub fn write_csv(path: &Path, header: &[String], columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut s = String::new();
    for line in header {
        let _ = writeln!(s, "# {line}");
    }
    let _ = writeln!(s, "{}", columns.join(","));
    for r in rows {
        let _ = writeln!(s, "{}", r.join(","));
    }
    std::fs::write(path, s)?;
    Ok(())
}
