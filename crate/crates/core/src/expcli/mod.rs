//! Experiment front end: configuration, recipes, CSV and manifest output,
//! and manifest summaries. The `ks-stab` binary is a thin wrapper.

pub mod config;
pub mod experiment;
pub mod manifest;
pub mod summarize;

use std::io::Write;
use std::path::Path;

pub use config::{parse_config, resolve_config, Experiment, ExperimentConfig};
pub use experiment::{run_experiment, spectrum_report};
pub use manifest::{RunManifest, RunStatus, MANIFEST_FILE};
pub use summarize::{summarize, Summary};

use crate::error::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const BLOW_UP: i32 = 3;
    pub const STRICT_VIOLATION: i32 = 4;
}

/// Exit code for an error surfaced by a subcommand.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidParameter(_) => exit::CONFIG,
        Error::BlowUp { .. } => exit::BLOW_UP,
        _ => exit::IO,
    }
}

/// Writes `bytes` to a temporary sibling of `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
