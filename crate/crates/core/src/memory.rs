//! Fixed-capacity episodic memory.
//!
//! The memory is a flat table of state-action-value tuples. Lookups are
//! exact Euclidean nearest-neighbor queries over the stored states; writes
//! follow an improve-or-discard rule near existing entries and evict the
//! least recently written slot once the table is full.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{CecError, Result};

/// One stored experience tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEntry {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub value: f64,
    pub tick: u64,
}

/// Borrowed view of one slot.
#[derive(Debug, Clone, Copy)]
pub struct EntryView<'a> {
    pub state: &'a [f64],
    pub action: &'a [f64],
    pub value: f64,
    pub tick: u64,
}

impl EntryView<'_> {
    pub fn to_owned(&self) -> MemoryEntry {
        MemoryEntry {
            state: self.state.to_vec(),
            action: self.action.to_vec(),
            value: self.value,
            tick: self.tick,
        }
    }
}

/// A query result: slot index, Euclidean distance to the query and the
/// stored tuple.
#[derive(Debug, Clone, Copy)]
pub struct Neighbor<'a> {
    pub index: usize,
    pub distance: f64,
    pub entry: EntryView<'a>,
}

/// What `insert_or_update` did with an incoming tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    /// Stored in a fresh slot.
    Appended,
    /// Replaced a nearby lower-valued entry in place.
    Overwrote { index: usize },
    /// Table was full and the incoming state was novel; the stalest slot
    /// was recycled.
    EvictedLruAndAppended { index: usize },
    /// A nearby entry already holds an equal or better value.
    Discarded,
}

impl UpdateOutcome {
    /// True when the operation changed any slot.
    pub fn wrote(&self) -> bool {
        !matches!(self, UpdateOutcome::Discarded)
    }
}

/// Bounded store of state-action-value tuples with exact kNN lookup.
///
/// Storage is slot-parallel: states and actions live in row-major flat
/// vectors so distance scans stream contiguously.
#[derive(Debug, Clone)]
pub struct EpisodicMemory {
    state_dim: usize,
    action_dim: usize,
    capacity: usize,
    distance_threshold: f64,
    global_tick: u64,
    states: Vec<f64>,
    actions: Vec<f64>,
    values: Vec<f64>,
    ticks: Vec<u64>,
}

impl EpisodicMemory {
    pub fn new(state_dim: usize, action_dim: usize, capacity: usize, distance_threshold: f64) -> Self {
        assert!(state_dim >= 1 && action_dim >= 1, "dimensions must be >= 1");
        assert!(capacity >= 1, "capacity must be >= 1");
        assert!(
            distance_threshold >= 0.0 && distance_threshold.is_finite(),
            "distance threshold must be finite and >= 0"
        );
        Self {
            state_dim,
            action_dim,
            capacity,
            distance_threshold,
            global_tick: 0,
            states: Vec::new(),
            actions: Vec::new(),
            values: Vec::new(),
            ticks: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn distance_threshold(&self) -> f64 {
        self.distance_threshold
    }

    pub fn global_tick(&self) -> u64 {
        self.global_tick
    }

    pub fn entry(&self, index: usize) -> EntryView<'_> {
        let s = index * self.state_dim;
        let a = index * self.action_dim;
        EntryView {
            state: &self.states[s..s + self.state_dim],
            action: &self.actions[a..a + self.action_dim],
            value: self.values[index],
            tick: self.ticks[index],
        }
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = EntryView<'_>> {
        (0..self.len()).map(move |i| self.entry(i))
    }

    fn check_state(&self, query: &[f64], context: &'static str) -> Result<()> {
        if query.len() != self.state_dim {
            return Err(CecError::DimensionMismatch {
                context,
                expected: self.state_dim,
                got: query.len(),
            });
        }
        if query.iter().any(|x| !x.is_finite()) {
            return Err(CecError::NonFinite { context });
        }
        Ok(())
    }

    /// Index and squared distance of the closest entry; ties go to the
    /// lowest index.
    fn nearest_slot(&self, query: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, chunk) in self.states.chunks_exact(self.state_dim).enumerate() {
            let mut d2 = 0.0;
            for (s, q) in chunk.iter().zip(query) {
                let d = s - q;
                d2 += d * d;
            }
            match best {
                Some((_, bd2)) if d2 >= bd2 => {}
                _ => best = Some((i, d2)),
            }
        }
        best
    }

    /// Closest stored entry to `query`, if any.
    pub fn nearest(&self, query: &[f64]) -> Result<Option<Neighbor<'_>>> {
        self.check_state(query, "memory nearest query")?;
        Ok(self.nearest_slot(query).map(|(index, d2)| Neighbor {
            index,
            distance: d2.sqrt(),
            entry: self.entry(index),
        }))
    }

    /// Up to `k` nearest entries within radius `n * d`, sorted by distance
    /// (ties by lower index). May be empty.
    pub fn knn(&self, k: usize, query: &[f64], n: f64, d: f64) -> Result<Vec<Neighbor<'_>>> {
        assert!(k >= 1, "k must be >= 1");
        assert!(n > 0.0, "filter factor must be > 0");
        assert!(d >= 0.0, "distance threshold must be >= 0");
        self.check_state(query, "memory knn query")?;

        let radius = n * d;
        let radius2 = radius * radius;
        // Bounded insertion sort over (dist2, index); k is small.
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for (i, chunk) in self.states.chunks_exact(self.state_dim).enumerate() {
            let mut d2 = 0.0;
            for (s, q) in chunk.iter().zip(query) {
                let diff = s - q;
                d2 += diff * diff;
            }
            if d2 > radius2 {
                continue;
            }
            if best.len() == k {
                let worst = best[k - 1];
                if (d2, i) >= (worst.0, worst.1) {
                    continue;
                }
            }
            let pos = best.partition_point(|&(bd2, bi)| (bd2, bi) < (d2, i));
            best.insert(pos, (d2, i));
            if best.len() > k {
                best.pop();
            }
        }
        Ok(best
            .into_iter()
            .map(|(d2, index)| Neighbor {
                index,
                distance: d2.sqrt(),
                entry: self.entry(index),
            })
            .collect())
    }

    fn next_tick(&mut self) -> u64 {
        self.global_tick += 1;
        self.global_tick
    }

    fn push_entry(&mut self, state: &[f64], action: &[f64], value: f64) {
        let tick = self.next_tick();
        self.states.extend_from_slice(state);
        self.actions.extend_from_slice(action);
        self.values.push(value);
        self.ticks.push(tick);
    }

    fn write_slot(&mut self, index: usize, state: &[f64], action: &[f64], value: f64) {
        let tick = self.next_tick();
        let s = index * self.state_dim;
        self.states[s..s + self.state_dim].copy_from_slice(state);
        let a = index * self.action_dim;
        self.actions[a..a + self.action_dim].copy_from_slice(action);
        self.values[index] = value;
        self.ticks[index] = tick;
    }

    /// Store an incoming tuple according to the update rule.
    ///
    /// With `s^c` the closest stored state and `d` the distance threshold:
    /// within `d` the tuple replaces `s^c`'s slot only when its value is
    /// strictly larger; at or beyond `d` it is appended, recycling the
    /// least recently written slot when the table is full.
    pub fn insert_or_update(&mut self, state: &[f64], action: &[f64], value: f64) -> Result<UpdateOutcome> {
        self.check_state(state, "memory insert state")?;
        if action.len() != self.action_dim {
            return Err(CecError::DimensionMismatch {
                context: "memory insert action",
                expected: self.action_dim,
                got: action.len(),
            });
        }
        if action.iter().any(|x| !x.is_finite()) || !value.is_finite() {
            return Err(CecError::NonFinite {
                context: "memory insert",
            });
        }

        let Some((index, d2)) = self.nearest_slot(state) else {
            self.push_entry(state, action, value);
            return Ok(UpdateOutcome::Appended);
        };

        let threshold2 = self.distance_threshold * self.distance_threshold;
        if d2 < threshold2 {
            if value > self.values[index] {
                self.write_slot(index, state, action, value);
                Ok(UpdateOutcome::Overwrote { index })
            } else {
                Ok(UpdateOutcome::Discarded)
            }
        } else if self.len() < self.capacity {
            self.push_entry(state, action, value);
            Ok(UpdateOutcome::Appended)
        } else {
            let lru = self
                .ticks
                .iter()
                .enumerate()
                .min_by_key(|&(_, t)| t)
                .map(|(i, _)| i)
                .expect("non-empty at capacity");
            self.write_slot(lru, state, action, value);
            Ok(UpdateOutcome::EvictedLruAndAppended { index: lru })
        }
    }

    /// Serialize to the `cec-mem v1` text format.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_snapshot_string())?;
        Ok(())
    }

    pub fn to_snapshot_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "cec-mem v1 state_dim={} action_dim={} capacity={} d={} global_tick={}",
            self.state_dim, self.action_dim, self.capacity, self.distance_threshold, self.global_tick
        );
        for i in 0..self.len() {
            let e = self.entry(i);
            let _ = write!(out, "{},{}", e.tick, e.value);
            for x in e.state.iter().chain(e.action) {
                let _ = write!(out, ",{}", x);
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_snapshot_str(&text)
    }

    pub fn from_snapshot_str(text: &str) -> Result<Self> {
        let malformed = |line: usize, reason: &str| CecError::SnapshotFormat {
            line,
            reason: reason.to_string(),
        };

        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| malformed(1, "missing header"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("cec-mem") || fields.next() != Some("v1") {
            return Err(malformed(1, "expected `cec-mem v1` header"));
        }
        let mut state_dim = None;
        let mut action_dim = None;
        let mut capacity = None;
        let mut d = None;
        let mut global_tick = None;
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| malformed(1, "header field is not key=value"))?;
            match key {
                "state_dim" => state_dim = value.parse::<usize>().ok(),
                "action_dim" => action_dim = value.parse::<usize>().ok(),
                "capacity" => capacity = value.parse::<usize>().ok(),
                "d" => d = value.parse::<f64>().ok(),
                "global_tick" => global_tick = value.parse::<u64>().ok(),
                _ => return Err(malformed(1, "unknown header field")),
            }
        }
        let (Some(state_dim), Some(action_dim), Some(capacity), Some(d), Some(global_tick)) =
            (state_dim, action_dim, capacity, d, global_tick)
        else {
            return Err(malformed(1, "incomplete or unparsable header"));
        };
        if state_dim < 1 || action_dim < 1 || capacity < 1 || !d.is_finite() || d < 0.0 {
            return Err(malformed(1, "header values out of range"));
        }

        let mut mem = Self::new(state_dim, action_dim, capacity, d);
        let row_len = 2 + state_dim + action_dim;
        for (i, row) in lines.enumerate() {
            let line_no = i + 2;
            if row.is_empty() {
                return Err(malformed(line_no, "empty row"));
            }
            let mut parts = row.split(',');
            let tick: u64 = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| malformed(line_no, "bad tick"))?;
            let value: f64 = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| malformed(line_no, "bad value"))?;
            let reals: Vec<f64> = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| malformed(line_no, "bad real"))?;
            if reals.len() != row_len - 2 {
                return Err(malformed(line_no, "row length does not match header dimensions"));
            }
            if !value.is_finite() || reals.iter().any(|x| !x.is_finite()) {
                return Err(malformed(line_no, "non-finite component"));
            }
            if mem.len() == capacity {
                return Err(malformed(line_no, "more rows than capacity"));
            }
            mem.states.extend_from_slice(&reals[..state_dim]);
            mem.actions.extend_from_slice(&reals[state_dim..]);
            mem.values.push(value);
            mem.ticks.push(tick);
        }
        if let Some(max_tick) = mem.ticks.iter().max() {
            if *max_tick > global_tick {
                return Err(malformed(1, "global_tick below an entry tick"));
            }
        }
        mem.global_tick = global_tick;
        Ok(mem)
    }
}
