//! Artifact emission. Every file carries the tool version, the command,
//! the seed and the resolved config, and nothing that varies between runs.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Writer<'a> {
    pub dir: &'a Path,
    pub command: &'static str,
    pub config: &'a RunConfig,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: &'a RunConfig,
    result: T,
}

impl Writer<'_> {
    fn path(&self, suffix: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}.{ext}", self.command))
    }

    fn write(&self, path: PathBuf, text: &str) -> CliResult<PathBuf> {
        std::fs::create_dir_all(self.dir).map_err(|e| CliError::Io(format!("{}: {e}", self.dir.display())))?;
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    fn config_json(&self) -> String {
        serde_json::to_string(self.config).expect("config serialises")
    }

    pub fn json(&self, suffix: &str, result: impl Serialize) -> CliResult<PathBuf> {
        let env = Envelope {
            tool: "lnakit",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            seed: self.config.seed(),
            config: self.config,
            result,
        };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Numerical(e.to_string()))?;
        text.push('\n');
        self.write(self.path(suffix, "json"), &text)
    }

    /// `notes` become extra `#` lines between the provenance header and
    /// the table.
    pub fn csv(&self, suffix: &str, notes: &[String], table: &str) -> CliResult<PathBuf> {
        let mut text = self.header("#");
        for n in notes {
            text.push_str(&format!("# {n}\n"));
        }
        text.push_str(table);
        self.write(self.path(suffix, "csv"), &text)
    }

    /// Touchstone text with the provenance header as `!` comments.
    pub fn touchstone(&self, suffix: &str, body: &str) -> CliResult<PathBuf> {
        let text = self.header("!") + body;
        self.write(self.path(suffix, "s2p"), &text)
    }

    fn header(&self, mark: &str) -> String {
        format!(
            "{mark} lnakit {} {}\n{mark} seed: {}\n{mark} config: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.config.seed(),
            self.config_json()
        )
    }

    pub fn emit(&self, format: Format, result: impl Serialize, notes: &[String], table: &str) -> CliResult<PathBuf> {
        match format {
            Format::Json => self.json("", result),
            Format::Csv => self.csv("", notes, table),
        }
    }
}

/// CSV cell for an optional value; empty when absent.
pub fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
