use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use clairvoyant::{Error, Params, Result};

use crate::args::Command;

/// Everything needed to reproduce a result file. Timestamps and the worker
/// count are recorded but do not affect the payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub command: Command,
    pub params: Params,
    pub seed: u64,
    pub force_point_estimate: bool,
    pub workers: usize,
    pub tool_version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub exit_code: i32,
    pub payload: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("manifest {}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Domain(e.to_string()))?;
        s.push('\n');
        std::fs::write(path, s).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

pub fn manifest_path(out: &str) -> String {
    format!("{out}.manifest.json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{Cli, Command};
    use clap::Parser;

    #[test]
    fn command_survives_serialization() {
        let cli = Cli::try_parse_from([
            "clairvoyant",
            "survive",
            "--M",
            "4",
            "--depths",
            "5,10",
            "--trials",
            "30",
        ])
        .unwrap();
        let m = RunManifest {
            subcommand: cli.cmd.name().into(),
            command: cli.cmd.clone(),
            params: Params::toy(),
            seed: 1,
            force_point_estimate: false,
            workers: 2,
            tool_version: "0".into(),
            started_unix_ms: 0,
            finished_unix_ms: 0,
            exit_code: 0,
            payload: "p".into(),
        };
        let text = serde_json::to_string(&m).unwrap();
        let back: RunManifest = serde_json::from_str(&text).unwrap();
        match back.command {
            Command::Survive(a) => {
                assert_eq!(a.depths, vec![5, 10]);
                assert_eq!(a.trials, 30);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(manifest_path("a/b.csv"), "a/b.csv.manifest.json");
    }
}
