//! Figure reproduction, sweeps and artifact output for the complex Berry
//! phase simulator.
//!
//! Every command turns a [`RunConfig`] into a list of [`Artifact`]s: CSV
//! tables with a provenance header and a units row, optionally paired with an
//! SVG plot. Output is deterministic for a fixed configuration, independent
//! of the worker count.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod runner;
pub mod table;

use std::path::PathBuf;

pub use commands::{run, Command};
pub use config::RunConfig;
pub use error::{CliError, Result};
pub use table::{Cell, Provenance, ResultTable};

use plot::PlotSpec;

/// One output file (and its optional plot).
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// File stem, e.g. `fig2_delta3.00MHz`.
    pub name: String,
    pub table: ResultTable,
    pub plot: Option<PlotSpec>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, table: ResultTable) -> Self {
        Artifact {
            name: name.into(),
            table,
            plot: None,
        }
    }

    pub fn with_plot(mut self, plot: PlotSpec) -> Self {
        self.plot = Some(plot);
        self
    }
}

/// Writes `<name>.csv` (and `<name>.svg`) under the configured output
/// directory and returns the written paths in order.
pub fn write_artifacts(config: &RunConfig, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut written = Vec::new();
    for a in artifacts {
        let path = dir.join(format!("{}.csv", a.name));
        a.table.write(&path)?;
        written.push(path);
        if let (true, Some(spec)) = (config.svg, &a.plot) {
            if let Some(svg) = plot::render(&a.table, spec) {
                let path = dir.join(format!("{}.svg", a.name));
                std::fs::write(&path, svg).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
