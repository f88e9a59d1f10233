use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sicforge::io::{to_json_string, ResidualTable};

#[derive(Serialize)]
struct Versions {
    sicforge: &'static str,
}

/// One record per run, written as `manifest.json` next to the outputs.
#[derive(Serialize)]
pub struct RunManifest {
    command: String,
    config: Value,
    seed: Option<u64>,
    versions: Versions,
    wall_time_s: f64,
    exit_code: u8,
    result: Value,
    residuals: ResidualTable,
}

pub struct ManifestBuilder {
    command: String,
    config: Value,
    seed: Option<u64>,
    start: Instant,
}

impl ManifestBuilder {
    pub fn start(command: &str, config: Value, seed: Option<u64>) -> Self {
        ManifestBuilder { command: command.to_string(), config, seed, start: Instant::now() }
    }

    pub fn finish(
        self,
        out: &Path,
        exit_code: u8,
        result: Value,
        residuals: ResidualTable,
    ) -> sicforge::Result<()> {
        let m = RunManifest {
            command: self.command,
            config: self.config,
            seed: self.seed,
            versions: Versions { sicforge: env!("CARGO_PKG_VERSION") },
            wall_time_s: self.start.elapsed().as_secs_f64(),
            exit_code,
            result,
            residuals,
        };
        std::fs::write(out.join("manifest.json"), to_json_string(&m)?)?;
        Ok(())
    }
}
