use std::path::Path;

use gfk_core::chain::ChainConfig;

use crate::error::{CliError, CliResult};

/// Parses a JSON config. Missing keys take their defaults; unknown keys are
/// rejected.
pub fn parse_config(text: &str) -> CliResult<ChainConfig> {
    let config: ChainConfig =
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
    config.validate()?;
    Ok(config)
}

/// Reads and validates a config file. `None` gives the defaults.
pub fn load_config(path: Option<&Path>) -> CliResult<ChainConfig> {
    match path {
        None => Ok(ChainConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", p.display())))?;
            parse_config(&text)
        }
    }
}
