//! Discretized value-map export for maze snapshots: 12x12 position cells
//! times 20 heading bins, keeping the best entry per occupied bin.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::env::make_env;
use crate::error::{CecError, Result};
use crate::memory::EpisodicMemory;

pub const VALUE_MAP_HEADER: &str = "cell_x,cell_y,angle_bin,value,action_1,action_2";

const GRID_CELLS: i64 = 12;
const ANGLE_BINS: i64 = 20;
const ARENA: f64 = 12.0;

fn position_cell(coord: f64) -> i64 {
    ((coord / (ARENA / GRID_CELLS as f64)).floor() as i64).clamp(0, GRID_CELLS - 1)
}

fn angle_bin(cos_theta: f64, sin_theta: f64) -> i64 {
    let phi = sin_theta.atan2(cos_theta); // (-pi, pi]
    (((phi + PI) / (TAU / ANGLE_BINS as f64)).floor() as i64).rem_euclid(ANGLE_BINS)
}

/// Build the CSV body for a maze memory: one row per occupied
/// (cell_x, cell_y, angle_bin) with the max-value entry mapped into it.
pub fn value_map_csv(mem: &EpisodicMemory) -> Result<String> {
    if mem.state_dim() != 4 || mem.action_dim() != 2 {
        return Err(CecError::InvalidConfig(format!(
            "value map needs a maze snapshot with state_dim=4, action_dim=2; got {}x{}",
            mem.state_dim(),
            mem.action_dim()
        )));
    }
    let mut best: BTreeMap<(i64, i64, i64), (f64, f64, f64)> = BTreeMap::new();
    for entry in mem.iter_entries() {
        let key = (
            position_cell(entry.state[0]),
            position_cell(entry.state[1]),
            angle_bin(entry.state[2], entry.state[3]),
        );
        let candidate = (entry.value, entry.action[0], entry.action[1]);
        match best.get(&key) {
            Some(&(value, _, _)) if value >= candidate.0 => {}
            _ => {
                best.insert(key, candidate);
            }
        }
    }
    let mut out = String::from(VALUE_MAP_HEADER);
    out.push('\n');
    for ((cx, cy, bin), (value, a1, a2)) in best {
        let _ = writeln!(out, "{cx},{cy},{bin},{value},{a1},{a2}");
    }
    Ok(out)
}

/// Load a maze snapshot, check it against the named env, and write the
/// discretized value map.
pub fn export_value_map(snapshot: &Path, env_name: &str, out: &Path) -> Result<()> {
    let spec = make_env(env_name)?.spec().clone();
    if spec.state_dim != 4 {
        return Err(CecError::InvalidConfig(format!(
            "value map is defined for maze environments, not `{env_name}`"
        )));
    }
    let mem = EpisodicMemory::load(snapshot)?;
    if mem.state_dim() != spec.state_dim || mem.action_dim() != spec.action_dim {
        return Err(CecError::InvalidConfig(format!(
            "snapshot dimensions {}x{} do not match env `{env_name}` ({}x{})",
            mem.state_dim(),
            mem.action_dim(),
            spec.state_dim,
            spec.action_dim
        )));
    }
    fs::write(out, value_map_csv(&mem)?)?;
    Ok(())
}
