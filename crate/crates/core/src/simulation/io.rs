//! Scenario persistence: one JSON document per line, config first, then
//! every frame in order. The format round-trips bit-exactly because floats
//! serialize with shortest round-trip representation.

use std::path::Path;

use super::{ScenarioConfig, SensorFrame, SimulationError};

pub fn scenario_to_jsonl(
    config: &ScenarioConfig,
    frames: &[SensorFrame<f64>],
) -> Result<String, SimulationError> {
    let mut out = serde_json::to_string(config)?;
    out.push('\n');
    for frame in frames {
        out.push_str(&serde_json::to_string(frame)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn scenario_from_jsonl(
    text: &str,
) -> Result<(ScenarioConfig, Vec<SensorFrame<f64>>), SimulationError> {
    let mut lines = text.lines().enumerate();
    let config = match lines.next() {
        Some((_, first)) => {
            serde_json::from_str(first).map_err(|e| SimulationError::ParseScenario {
                line: 1,
                msg: format!("bad scenario config: {e}"),
            })?
        }
        None => {
            return Err(SimulationError::ParseScenario {
                line: 1,
                msg: "empty scenario file".into(),
            })
        }
    };
    let mut frames: Vec<SensorFrame<f64>> = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let frame: SensorFrame<f64> =
            serde_json::from_str(line).map_err(|e| SimulationError::ParseScenario {
                line: idx + 1,
                msg: format!("bad frame record: {e}"),
            })?;
        if frame.index != frames.len() as u64 {
            return Err(SimulationError::ParseScenario {
                line: idx + 1,
                msg: format!(
                    "frame index {} out of order (expected {})",
                    frame.index,
                    frames.len()
                ),
            });
        }
        frames.push(frame);
    }
    Ok((config, frames))
}

pub fn write_scenario(
    path: impl AsRef<Path>,
    config: &ScenarioConfig,
    frames: &[SensorFrame<f64>],
) -> Result<(), SimulationError> {
    std::fs::write(path, scenario_to_jsonl(config, frames)?)?;
    Ok(())
}

pub fn read_scenario(
    path: impl AsRef<Path>,
) -> Result<(ScenarioConfig, Vec<SensorFrame<f64>>), SimulationError> {
    scenario_from_jsonl(&std::fs::read_to_string(path)?)
}
