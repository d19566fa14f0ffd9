pub mod katok;
pub mod shadow;
pub mod shrink;
pub mod spectrum;
pub mod weave;

use orbitweave::systems::{ShiftSpace, System};

use crate::config::RunConfig;
use crate::error::{config, CliError, Result};

/// What a command reports after its files are queued.
pub struct Outcome {
    pub summary: Vec<String>,
    /// Set when outputs should still be written but the exit is nonzero.
    pub failure: Option<CliError>,
}

impl Outcome {
    pub fn ok(summary: Vec<String>) -> Self {
        Outcome { summary, failure: None }
    }
}

pub fn shift_of(cfg: &RunConfig) -> Result<ShiftSpace> {
    match System::from_spec(&cfg.system)? {
        System::Shift(s) => Ok(s),
        _ => Err(config("this command needs a shift system")),
    }
}
