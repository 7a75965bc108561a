//! Planning bank-wide content destruction.
//!
//! The many-row plan writes a pattern into the largest group with one
//! Bulk-Write, then spreads it with Multi-RowCopy, greedily choosing the group
//! that reaches the most rows not yet overwritten. Baselines overwrite one
//! row per operation (RowClone) or neutralize one row per Frac.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::bank::{BankState, Geometry};
use crate::bits::BitRow;
use crate::decoder::{RowAddress, RowDecoder, RowGroup};
use crate::engine::{
    trace_latency, CommandDurations, CommandKind, CommandTrace, Engine, EngineError, ExecLog,
    TimingParams,
};
use crate::primitives::{charge_share_trace, init_trace, mrc_trace};

#[derive(Debug, Error)]
pub enum DestructError {
    #[error("max_n must be a power of two in 2..=32, got {0}")]
    InvalidMaxN(usize),
    #[error("geometry has {geometry}-row subarrays but the decoder addresses {decoder}")]
    GeometryMismatch { geometry: usize, decoder: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum DestructStep {
    /// APA over `first`/`second`, then a WRITE of the pattern into every open row.
    BulkWrite {
        first: RowAddress,
        second: RowAddress,
        n: usize,
    },
    /// Sense `src`, then latch its partner so the whole group is restored.
    Mrc {
        src: RowAddress,
        partner: RowAddress,
        n: usize,
    },
    RowClone {
        src: RowAddress,
        dst: RowAddress,
    },
    Frac {
        row: RowAddress,
    },
    Write {
        row: RowAddress,
    },
}

impl DestructStep {
    fn offset(&self, by: u16) -> Self {
        let o = |r: RowAddress| RowAddress(r.0 + by);
        match *self {
            Self::BulkWrite { first, second, n } => Self::BulkWrite {
                first: o(first),
                second: o(second),
                n,
            },
            Self::Mrc { src, partner, n } => Self::Mrc {
                src: o(src),
                partner: o(partner),
                n,
            },
            Self::RowClone { src, dst } => Self::RowClone {
                src: o(src),
                dst: o(dst),
            },
            Self::Frac { row } => Self::Frac { row: o(row) },
            Self::Write { row } => Self::Write { row: o(row) },
        }
    }

    /// Commands of this step starting at time 0.
    pub fn trace(&self, pattern: &BitRow, timing: &TimingParams) -> CommandTrace {
        match *self {
            Self::BulkWrite { first, second, .. } => {
                charge_share_trace(first, second, Some(pattern), timing)
            }
            Self::Mrc { src, partner, .. } => mrc_trace(src, partner, timing),
            Self::RowClone { src, dst } => mrc_trace(src, dst, timing),
            Self::Frac { row } => init_trace(&[(row, None)], timing),
            Self::Write { row } => init_trace(&[(row, Some(pattern.clone()))], timing),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMethod {
    ManyRow { max_n: usize },
    RowClone,
    Frac,
}

impl fmt::Display for PlanMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ManyRow { max_n } => write!(f, "manyrow-{max_n}"),
            Self::RowClone => f.write_str("rowclone"),
            Self::Frac => f.write_str("frac"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DestructionPlan {
    pub method: PlanMethod,
    pub steps: Vec<DestructStep>,
    #[serde(skip)]
    pub covered: BTreeSet<RowAddress>,
    /// Issue time of each step after tFAW stretching.
    #[serde(skip)]
    pub start_times: Vec<f64>,
    pub modeled_time_ns: f64,
}

impl DestructionPlan {
    fn build(
        method: PlanMethod,
        local: Vec<DestructStep>,
        local_covered: BTreeSet<u16>,
        geometry: &Geometry,
        timing: &TimingParams,
    ) -> Self {
        let size = geometry.subarray_size;
        let mut steps = Vec::with_capacity(local.len() * geometry.n_subarrays);
        let mut covered = BTreeSet::new();
        for s in 0..geometry.n_subarrays {
            let base = (s * size) as u16;
            steps.extend(local.iter().map(|st| st.offset(base)));
            covered.extend(local_covered.iter().map(|&r| RowAddress(base + r)));
        }
        let (start_times, modeled_time_ns) = schedule(&steps, timing);
        Self {
            method,
            steps,
            covered,
            start_times,
            modeled_time_ns,
        }
    }

    /// Whole plan as one trace, the pattern as write data.
    pub fn to_trace(&self, pattern: &BitRow, timing: &TimingParams) -> CommandTrace {
        let mut trace = CommandTrace::default();
        for (step, &t) in self.steps.iter().zip(&self.start_times) {
            trace
                .append_shifted(&step.trace(pattern, timing), t)
                .expect("steps are scheduled back to back");
        }
        trace
    }

    pub fn execute(
        &self,
        engine: &Engine,
        bank: &mut BankState,
        pattern: &BitRow,
    ) -> Result<ExecLog, DestructError> {
        Ok(engine.execute(bank, &self.to_trace(pattern, &engine.timing))?)
    }
}

/// Start times of back-to-back steps, each delayed just enough that no tFAW
/// window holds more than the allowed number of ACTs. Returns the starts and
/// the end of the last step.
fn schedule(steps: &[DestructStep], timing: &TimingParams) -> (Vec<f64>, f64) {
    let durations = CommandDurations::from_timing(timing);
    let pattern = BitRow::zeros(0);
    let max = timing.max_acts_in_faw;
    let mut recent: Vec<f64> = Vec::new();
    let mut starts = Vec::with_capacity(steps.len());
    let mut t = 0.0;
    // steps of one kind share a shape, so cache it
    let mut shapes: HashMap<std::mem::Discriminant<DestructStep>, (Vec<f64>, f64)> = HashMap::new();
    for step in steps {
        let (acts, len) = shapes
            .entry(std::mem::discriminant(step))
            .or_insert_with(|| {
                let tr = step.trace(&pattern, timing);
                let acts = tr
                    .commands()
                    .iter()
                    .filter(|c| matches!(c.kind, CommandKind::Act(_)))
                    .map(|c| c.time)
                    .collect();
                (acts, trace_latency(&tr, &durations))
            })
            .clone();
        let mut start = t;
        loop {
            let mut shift: f64 = 0.0;
            let mut all = recent.clone();
            all.extend(acts.iter().map(|a| a + start));
            for i in recent.len()..all.len() {
                if i >= max && i - max < recent.len() {
                    shift = shift.max(all[i - max] + timing.t_faw - all[i]);
                }
            }
            if shift <= 0.0 {
                break;
            }
            start += shift;
        }
        starts.push(start);
        recent.extend(acts.iter().map(|a| a + start));
        let keep = recent.len().saturating_sub(max);
        recent.drain(..keep);
        t = start + len;
    }
    (starts, t)
}

fn check_geometry(decoder: &RowDecoder, geometry: &Geometry) -> Result<(), DestructError> {
    let size = decoder.layout().subarray_size();
    if geometry.subarray_size != size {
        return Err(DestructError::GeometryMismatch {
            geometry: geometry.subarray_size,
            decoder: size,
        });
    }
    Ok(())
}

/// Every distinct group of at most `max_n` rows in subarray 0, ordered by
/// (lowest row, that row's partner).
pub fn candidate_groups(decoder: &RowDecoder, max_n: usize) -> Vec<RowGroup> {
    let size = decoder.layout().subarray_size() as u16;
    let mut seen: HashMap<Vec<RowAddress>, RowGroup> = HashMap::new();
    for a in 0..size {
        for b in a + 1..size {
            if (1usize << decoder.differing_groups(RowAddress(a), RowAddress(b))) > max_n {
                continue;
            }
            let g = decoder
                .nrg(RowAddress(a), RowAddress(b))
                .expect("same subarray");
            seen.entry(g.rows.clone()).or_insert_with(|| {
                let low = g.rows[0];
                let partner = g.partner(low, decoder.layout()).expect("member");
                RowGroup {
                    rows: g.rows.clone(),
                    first: low,
                    second: partner,
                }
            });
        }
    }
    let mut out: Vec<RowGroup> = seen.into_values().collect();
    out.sort_by_key(|g| (g.first, g.second));
    out
}

/// Greedy many-row plan using groups of up to `max_n` rows, replicated over
/// every subarray.
pub fn plan_many_row(
    decoder: &RowDecoder,
    geometry: &Geometry,
    timing: &TimingParams,
    max_n: usize,
) -> Result<DestructionPlan, DestructError> {
    if !(2..=32).contains(&max_n) || !max_n.is_power_of_two() {
        return Err(DestructError::InvalidMaxN(max_n));
    }
    check_geometry(decoder, geometry)?;
    let size = geometry.subarray_size;
    let groups = candidate_groups(decoder, max_n);
    let mut covered = vec![false; size];
    let mut steps = Vec::new();

    let seed = groups
        .iter()
        .filter(|g| g.n() == max_n)
        .min_by_key(|g| (g.first, g.second))
        .or_else(|| groups.iter().max_by_key(|g| g.n()))
        .expect("every layout has two-row groups");
    steps.push(DestructStep::BulkWrite {
        first: seed.first,
        second: seed.second,
        n: seed.n(),
    });
    for r in &seed.rows {
        covered[r.index()] = true;
    }
    let mut left = size - seed.n();
    while left > 0 {
        let mut best: Option<(usize, &RowGroup)> = None;
        for g in &groups {
            let mut new = 0;
            let mut touches = false;
            for r in &g.rows {
                if covered[r.index()] {
                    touches = true;
                } else {
                    new += 1;
                }
            }
            if touches && new > best.map_or(0, |b| b.0) {
                best = Some((new, g));
            }
        }
        let (new, g) = best.expect("two-row groups connect the subarray");
        let src = *g.rows.iter().find(|r| covered[r.index()]).expect("touches");
        let partner = g.partner(src, decoder.layout()).expect("member");
        steps.push(DestructStep::Mrc {
            src,
            partner,
            n: g.n(),
        });
        for r in &g.rows {
            covered[r.index()] = true;
        }
        left -= new;
    }
    let local_covered = (0..size as u16).filter(|&r| covered[r as usize]).collect();
    Ok(DestructionPlan::build(
        PlanMethod::ManyRow { max_n },
        steps,
        local_covered,
        geometry,
        timing,
    ))
}

/// One nominal write, then one RowClone per remaining row, each from an
/// already overwritten row one predecoder group away.
pub fn plan_rowclone(
    decoder: &RowDecoder,
    geometry: &Geometry,
    timing: &TimingParams,
) -> Result<DestructionPlan, DestructError> {
    check_geometry(decoder, geometry)?;
    let layout = decoder.layout();
    let size = geometry.subarray_size;
    let mut covered = vec![false; size];
    let mut steps = vec![DestructStep::Write { row: RowAddress(0) }];
    covered[0] = true;
    let mut queue = std::collections::VecDeque::from([0u16]);
    while let Some(src) = queue.pop_front() {
        for g in layout.groups() {
            for v in 0..1u16 << g.width {
                let mask = ((1u16 << g.width) - 1) << g.shift;
                let dst = (src & !mask) | (v << g.shift);
                if !covered[dst as usize] {
                    covered[dst as usize] = true;
                    steps.push(DestructStep::RowClone {
                        src: RowAddress(src),
                        dst: RowAddress(dst),
                    });
                    queue.push_back(dst);
                }
            }
        }
    }
    let local_covered = (0..size as u16).collect();
    Ok(DestructionPlan::build(
        PlanMethod::RowClone,
        steps,
        local_covered,
        geometry,
        timing,
    ))
}

/// One Frac per row; every row ends at Vdd/2.
pub fn plan_frac(
    decoder: &RowDecoder,
    geometry: &Geometry,
    timing: &TimingParams,
) -> Result<DestructionPlan, DestructError> {
    check_geometry(decoder, geometry)?;
    let rows = 0..geometry.subarray_size as u16;
    let steps = rows
        .clone()
        .map(|r| DestructStep::Frac { row: RowAddress(r) })
        .collect();
    Ok(DestructionPlan::build(
        PlanMethod::Frac,
        steps,
        rows.collect(),
        geometry,
        timing,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanComparison {
    pub method: String,
    pub steps: usize,
    pub modeled_time_ns: f64,
    /// Baseline time over this plan's time.
    pub speedup: f64,
}

pub fn compare(plans: &[&DestructionPlan], baseline: &DestructionPlan) -> Vec<PlanComparison> {
    plans
        .iter()
        .map(|p| PlanComparison {
            method: p.method.to_string(),
            steps: p.steps.len(),
            modeled_time_ns: p.modeled_time_ns,
            speedup: baseline.modeled_time_ns / p.modeled_time_ns,
        })
        .collect()
}
