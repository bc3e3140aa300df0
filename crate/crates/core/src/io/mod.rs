//! Configuration input and tabular output for the command-line front end.

pub mod config;
pub mod output;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::SweepResult;

pub use config::{load_config, parse_config};
pub use output::{write_csv, write_metadata, write_pivot, OutputRow, COLUMNS};

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes the sweep CSV (long or pivoted layout) to `path`.
pub fn save_sweep(result: &SweepResult, path: &Path, pivot: bool) -> Result<()> {
    let out = create(path)?;
    let written = if pivot {
        write_pivot(result, out)
    } else {
        write_csv(result, out)
    };
    written.map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the `key=value` metadata sidecar to `path`.
pub fn save_metadata(result: &SweepResult, path: &Path) -> Result<()> {
    write_metadata(result, create(path)?).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
