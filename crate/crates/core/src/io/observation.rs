//! Observation files: one JSON document `{ "t": .., "observation": .. }` per
//! observation time, named `obs_NNNNN.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::report::{to_json, write_text};
use crate::observers::Observation;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationFile {
    pub t: f64,
    pub observation: Observation,
}

pub fn file_name(index: usize) -> String {
    format!("obs_{index:05}.json")
}

pub fn save_observation(path: &Path, obs: &ObservationFile) -> Result<()> {
    write_text(path, &to_json(obs)?)
}

pub fn load_observation(path: &Path) -> Result<ObservationFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

/// `obs_*.json` files in `dir`, sorted by name.
pub fn list_observations(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("obs_") && name.ends_with(".json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observers::{observe_modal, observe_nodal};
    use crate::solver::initial::random_field;
    use crate::spectral::TorusConfig;

    #[test]
    fn observations_round_trip_exactly() {
        let u = random_field(TorusConfig::new(1.0, 8).unwrap(), 1.0, 5, true);
        for observation in [
            Observation::Modal(observe_modal(&u, 12).unwrap()),
            Observation::Nodal(observe_nodal(&u, 4).unwrap()),
        ] {
            let file = ObservationFile { t: 0.3, observation };
            let text = to_json(&file).unwrap();
            let back: ObservationFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back, file);
        }
    }
}
