//! Latency model for majority-based kernels.
//!
//! Each MAJ-m on an n-row group costs `(init_rows(m, n) * init_latency +
//! maj_latency) / p(m, n)`: one row initialization per distinct input (its
//! copies are placed with a single Multi-RowCopy) and per neutral row, one
//! charge-sharing APA, and `1/p` expected repetitions at success rate `p`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::kernels::{Compute, FullAdderMode, ReduceOp};
use super::{BitColumnMatrix, BitserialError, LogicBackend};
use crate::decoder::RowAddress;
use crate::engine::{trace_latency, CommandDurations, TimingParams};
use crate::primitives::{charge_share_trace, mrc_trace, replication_layout};

/// The reference design every speedup is relative to: MAJ3 on four rows.
pub const BASELINE_ARITY: usize = 3;
pub const BASELINE_N: usize = 4;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MajOpCount {
    pub by_arity: BTreeMap<usize, u64>,
}

impl MajOpCount {
    pub fn record(&mut self, arity: usize) {
        *self.by_arity.entry(arity).or_default() += 1;
    }

    pub fn get(&self, arity: usize) -> u64 {
        self.by_arity.get(&arity).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.by_arity.values().sum()
    }

    pub fn max_arity(&self) -> usize {
        self.by_arity.keys().next_back().copied().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    And,
    Or,
    Xor,
    Add,
    Sub,
    Mul,
    Div,
}

impl Kernel {
    pub const ALL: [Kernel; 7] = [
        Kernel::And,
        Kernel::Or,
        Kernel::Xor,
        Kernel::Add,
        Kernel::Sub,
        Kernel::Mul,
        Kernel::Div,
    ];
    pub const LOGIC: [Kernel; 3] = [Kernel::And, Kernel::Or, Kernel::Xor];

    pub fn reduce_op(self) -> Option<ReduceOp> {
        match self {
            Kernel::And => Some(ReduceOp::And),
            Kernel::Or => Some(ReduceOp::Or),
            Kernel::Xor => Some(ReduceOp::Xor),
            _ => None,
        }
    }

    /// Runs the kernel on the matrices. Logic kernels reduce the bit planes
    /// of `a` and return a one-plane matrix; `b` is ignored.
    pub fn run<B: super::MajBackend>(
        self,
        c: &mut Compute<B>,
        a: &BitColumnMatrix,
        b: &BitColumnMatrix,
    ) -> Result<BitColumnMatrix, BitserialError> {
        Ok(match self {
            Kernel::And | Kernel::Or | Kernel::Xor => {
                let op = self.reduce_op().expect("logic kernel");
                BitColumnMatrix::from_signals(vec![c.reduce_planes(op, a)?])
            }
            Kernel::Add => c.add(a, b)?,
            Kernel::Sub => c.sub(a, b)?,
            Kernel::Mul => c.mul(a, b)?,
            Kernel::Div => c.div(a, b)?.0,
        })
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::And => "and",
            Kernel::Or => "or",
            Kernel::Xor => "xor",
            Kernel::Add => "add",
            Kernel::Sub => "sub",
            Kernel::Mul => "mul",
            Kernel::Div => "div",
        })
    }
}

impl FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kernel::ALL
            .into_iter()
            .find(|k| k.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown kernel {s:?}"))
    }
}

/// MAJ operations one element's worth of `kernel` needs. The networks are
/// data independent, so one column suffices.
pub fn count_ops(kernel: Kernel, max_arity: usize, fa_mode: Option<FullAdderMode>) -> MajOpCount {
    let mut c = Compute::new(LogicBackend, 1, max_arity);
    if let Some(mode) = fa_mode {
        c = c.with_full_adder(mode);
    }
    let zero = BitColumnMatrix::from_u32(&[0]);
    kernel
        .run(&mut c, &zero, &zero)
        .expect("logic backend cannot fail within the arity limit");
    c.counts().clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerfScenario {
    /// Measured success rates and initialization latency.
    RealExp,
    /// Perfect success, real initialization latency.
    RealInit,
    /// Real success rates, free initialization.
    RealSR,
    /// Perfect success, free initialization.
    Ideal,
    /// Every MAJ costs the same regardless of arity.
    #[serde(rename = "equal")]
    EqualLatency,
}

impl PerfScenario {
    pub const ALL: [PerfScenario; 5] = [
        PerfScenario::RealExp,
        PerfScenario::RealInit,
        PerfScenario::RealSR,
        PerfScenario::Ideal,
        PerfScenario::EqualLatency,
    ];

    fn uses_success_rate(self) -> bool {
        matches!(self, Self::RealExp | Self::RealSR)
    }

    fn uses_init(self) -> bool {
        matches!(self, Self::RealExp | Self::RealInit)
    }

    /// Scenario the reference design is evaluated under. The four real/ideal
    /// scenarios compare against the reference as measured, so removing a
    /// cost can only raise the speedup.
    pub fn baseline(self) -> Self {
        match self {
            Self::EqualLatency => Self::EqualLatency,
            _ => Self::RealExp,
        }
    }
}

impl fmt::Display for PerfScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RealExp => "realexp",
            Self::RealInit => "realinit",
            Self::RealSR => "realsr",
            Self::Ideal => "ideal",
            Self::EqualLatency => "equal",
        })
    }
}

impl FromStr for PerfScenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown scenario {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessEntry {
    pub m: usize,
    pub n: usize,
    pub rate: f64,
}

/// Success rate per (arity, row count).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessTable {
    pub entries: Vec<SuccessEntry>,
}

impl Default for SuccessTable {
    fn default() -> Self {
        Self::measured()
    }
}

impl SuccessTable {
    /// Average real-chip rates: MAJ3 on more than four rows 97.91%, on four
    /// rows 24.18 points lower; MAJ5 73.93%; MAJ7 29.28%; MAJ9 35.35% (the
    /// best module). Rates are not broken down by row count beyond that.
    pub fn measured() -> Self {
        let mut entries = Vec::new();
        for n in [4, 8, 16, 32] {
            for (m, rate) in [(3, 0.9791), (5, 0.7393), (7, 0.2928), (9, 0.3535)] {
                if replication_layout(m, n).is_err() {
                    continue;
                }
                let rate = if m == 3 && n == 4 {
                    0.9791 - 0.2418
                } else {
                    rate
                };
                entries.push(SuccessEntry { m, n, rate });
            }
        }
        Self { entries }
    }

    pub fn uniform(rate: f64) -> Self {
        let mut t = Self::measured();
        t.entries.iter_mut().for_each(|e| e.rate = rate);
        t
    }

    pub fn rate(&self, m: usize, n: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.m == m && e.n == n)
            .map(|e| e.rate)
    }

    pub fn set(&mut self, m: usize, n: usize, rate: f64) {
        match self.entries.iter_mut().find(|e| e.m == m && e.n == n) {
            Some(e) => e.rate = rate,
            None => self.entries.push(SuccessEntry { m, n, rate }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerfModel {
    /// Latency of one row initialization (a RowClone-style APA), ns.
    pub init_latency: f64,
    /// Latency of one charge-sharing APA, ns.
    pub maj_latency: f64,
    pub success: SuccessTable,
    /// Row counts a MAJ may pick from.
    pub row_counts: Vec<usize>,
}

impl Default for PerfModel {
    fn default() -> Self {
        Self::from_timing(&TimingParams::default())
    }
}

impl PerfModel {
    pub fn from_timing(timing: &TimingParams) -> Self {
        let d = CommandDurations::from_timing(timing);
        let (a, b) = (RowAddress(0), RowAddress(1));
        Self {
            init_latency: trace_latency(&mrc_trace(a, b, timing), &d),
            maj_latency: trace_latency(&charge_share_trace(a, b, None, timing), &d),
            success: SuccessTable::measured(),
            row_counts: vec![4, 8, 16, 32],
        }
    }

    pub fn init_rows(m: usize, n: usize) -> Option<usize> {
        replication_layout(m, n).ok().map(|l| m + l.neutrals)
    }

    pub fn op_cost(
        &self,
        m: usize,
        n: usize,
        scenario: PerfScenario,
    ) -> Result<f64, BitserialError> {
        let init = Self::init_rows(m, n).ok_or(BitserialError::NoRowCount { m })?;
        if scenario == PerfScenario::EqualLatency {
            return Ok(1.0);
        }
        let p = if scenario.uses_success_rate() {
            self.success
                .rate(m, n)
                .ok_or(BitserialError::NoRowCount { m })?
        } else {
            1.0
        };
        if p <= 0.0 {
            return Err(BitserialError::ZeroSuccessRate { m, n });
        }
        let init_cost = if scenario.uses_init() {
            init as f64 * self.init_latency
        } else {
            0.0
        };
        Ok((init_cost + self.maj_latency) / p)
    }

    /// Cheapest row count for MAJ-m; ties go to fewer rows.
    pub fn best_n(&self, m: usize, scenario: PerfScenario) -> Result<(usize, f64), BitserialError> {
        let mut best: Option<(usize, f64)> = None;
        for &n in &self.row_counts {
            let Ok(cost) = self.op_cost(m, n, scenario) else {
                continue;
            };
            if best.is_none_or(|(_, c)| cost < c) {
                best = Some((n, cost));
            }
        }
        best.ok_or(BitserialError::NoRowCount { m })
    }

    /// Modeled time of `counts`. With `n` fixed every op runs on that many
    /// rows; otherwise each arity picks its cheapest row count.
    pub fn model_time(
        &self,
        counts: &MajOpCount,
        scenario: PerfScenario,
        n: Option<usize>,
    ) -> Result<f64, BitserialError> {
        let mut total = 0.0;
        for (&m, &count) in &counts.by_arity {
            let cost = match n {
                Some(n) => self.op_cost(m, n, scenario)?,
                None => self.best_n(m, scenario)?.1,
            };
            total += count as f64 * cost;
        }
        Ok(total)
    }

    /// Time of the MAJ3/four-row reference running `kernel`.
    pub fn baseline_time(
        &self,
        kernel: Kernel,
        scenario: PerfScenario,
    ) -> Result<f64, BitserialError> {
        let counts = count_ops(kernel, BASELINE_ARITY, None);
        self.model_time(&counts, scenario, Some(BASELINE_N))
    }

    /// Speedup of `kernel` at `max_arity` over the reference, which runs
    /// under `scenario.baseline()`.
    pub fn speedup(
        &self,
        kernel: Kernel,
        max_arity: usize,
        scenario: PerfScenario,
        n: Option<usize>,
    ) -> Result<f64, BitserialError> {
        let counts = count_ops(kernel, max_arity, None);
        let t = self.model_time(&counts, scenario, n)?;
        Ok(self.baseline_time(kernel, scenario.baseline())? / t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latencies_from_default_timing() {
        let m = PerfModel::default();
        assert!((m.init_latency - 80.0).abs() < 1e-9);
        assert!((m.maj_latency - 50.5).abs() < 1e-9);
    }

    #[test]
    fn measured_table() {
        let t = SuccessTable::measured();
        assert!((t.rate(3, 4).unwrap() - 0.7373).abs() < 1e-12);
        assert_eq!(t.rate(3, 32), Some(0.9791));
        assert_eq!(t.rate(9, 16), Some(0.3535));
        assert_eq!(t.rate(9, 8), None);
    }

    #[test]
    fn ideal_half_ops_doubles_speed() {
        let m = PerfModel::default();
        let mut base = MajOpCount::default();
        let mut half = MajOpCount::default();
        for _ in 0..10 {
            base.record(3);
        }
        for _ in 0..5 {
            half.record(3);
        }
        let tb = m.model_time(&base, PerfScenario::Ideal, Some(4)).unwrap();
        let th = m.model_time(&half, PerfScenario::Ideal, Some(4)).unwrap();
        assert!((tb / th - 2.0).abs() < 1e-12);
    }

    #[test]
    fn retry_factor_doubles_time() {
        let mut m = PerfModel::default();
        let mut c = MajOpCount::default();
        c.record(5);
        m.success.set(5, 8, 1.0);
        let t1 = m.model_time(&c, PerfScenario::RealExp, Some(8)).unwrap();
        m.success.set(5, 8, 0.5);
        let t2 = m.model_time(&c, PerfScenario::RealExp, Some(8)).unwrap();
        assert!((t2 / t1 - 2.0).abs() < 1e-12);
        m.success.set(5, 8, 0.0);
        assert!(matches!(
            m.model_time(&c, PerfScenario::RealExp, Some(8)),
            Err(BitserialError::ZeroSuccessRate { m: 5, n: 8 })
        ));
    }

    #[test]
    fn monotone_in_success_and_init() {
        let mut c = MajOpCount::default();
        c.record(3);
        c.record(5);
        let mut prev = f64::INFINITY;
        for p in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let mut m = PerfModel::default();
            m.success = SuccessTable::uniform(p);
            let t = m.model_time(&c, PerfScenario::RealExp, None).unwrap();
            assert!(t < prev);
            prev = t;
        }
        let mut prev = 0.0;
        for init in [0.0, 20.0, 80.0, 200.0] {
            let m = PerfModel {
                init_latency: init,
                ..Default::default()
            };
            let t = m.model_time(&c, PerfScenario::RealExp, None).unwrap();
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn equal_latency_ordering() {
        let m = PerfModel::default();
        let avg = |arity: usize| {
            Kernel::LOGIC
                .iter()
                .map(|&k| {
                    m.speedup(k, arity, PerfScenario::EqualLatency, None)
                        .unwrap()
                })
                .sum::<f64>()
                / 3.0
        };
        let (s5, s7, s9) = (avg(5), avg(7), avg(9));
        assert!(s9 > s7 && s7 > s5 && s5 > 1.0, "{s5} {s7} {s9}");
        for k in Kernel::LOGIC {
            let mut prev = 0.0;
            for a in [3, 5, 7, 9] {
                let s = m.speedup(k, a, PerfScenario::EqualLatency, None).unwrap();
                assert!(s >= prev);
                prev = s;
            }
        }
    }

    #[test]
    fn maj9_slower_than_reference_under_real_rates() {
        let m = PerfModel::default();
        for k in Kernel::LOGIC {
            assert!(m.speedup(k, 9, PerfScenario::RealExp, None).unwrap() < 1.0);
        }
    }

    #[test]
    fn scenario_ordering() {
        let m = PerfModel::default();
        for k in Kernel::ALL {
            for a in [3, 5, 7, 9] {
                let s = |sc| m.speedup(k, a, sc, None).unwrap();
                let ideal = s(PerfScenario::Ideal);
                for sc in [
                    PerfScenario::RealExp,
                    PerfScenario::RealInit,
                    PerfScenario::RealSR,
                ] {
                    assert!(ideal >= s(sc) - 1e-12, "{k} MAJ{a} {sc}");
                }
                assert!(s(PerfScenario::RealInit) >= s(PerfScenario::RealExp));
            }
        }
    }

    #[test]
    fn names_roundtrip() {
        for k in Kernel::ALL {
            assert_eq!(k.to_string().parse::<Kernel>().unwrap(), k);
        }
        for s in PerfScenario::ALL {
            assert_eq!(s.to_string().parse::<PerfScenario>().unwrap(), s);
        }
    }
}
