//! Replays command traces against a bank. The gaps around each PRE decide
//! what happens: nominal access, Frac, Multi-RowCopy or charge sharing over
//! every row the predecoder latches select.

mod timing;
mod trace;

pub use timing::{
    check_power, classify_apa, trace_latency, ApaRegime, CommandDurations, FawViolation,
    TimingParams,
};
pub use trace::{Command, CommandKind, CommandTrace};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analog::{self, AnalogError, AnalogParams, VariationSample};
use crate::bank::{BankError, BankState, CellLevel, SenseAmps};
use crate::bits::BitRow;
use crate::decoder::{DecoderError, PredecoderLatchState, RowAddress, RowDecoder};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("undefined timing regime at {time} ns (gap1 {gap1} ns, gap2 {gap2:?} ns)")]
    UndefinedTimingRegime {
        time: f64,
        gap1: f64,
        gap2: Option<f64>,
    },
    #[error("WRITE at {time} ns while no row is open")]
    WriteWhileClosed { time: f64 },
    #[error("READ at {time} ns while no row is open")]
    ReadWhileClosed { time: f64 },
    #[error("ACT at {time} ns while rows are open; PRE first")]
    ActWhileOpen { time: f64 },
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error(transparent)]
    Bank(#[from] BankError),
    #[error(transparent)]
    Analog(#[from] AnalogError),
    #[error("trace line {line}: {reason}")]
    MalformedTrace { line: usize, reason: String },
    #[error("invalid timing: {0}")]
    InvalidTiming(String),
}

/// How sense amplifiers treat a lone row whose cells are not at a full rail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SenseProfile {
    /// Reading NEUTRAL or ANALOG cells nominally is an error.
    #[default]
    Strict,
    /// Sense amps lean to the row's polarity bias bit on a tie.
    Biased,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Activate {
        row: RowAddress,
    },
    Precharge,
    Restore {
        rows: Vec<RowAddress>,
    },
    Frac {
        row: RowAddress,
    },
    MultiRowCopy {
        source: RowAddress,
        rows: Vec<RowAddress>,
    },
    ChargeShare {
        rows: Vec<RowAddress>,
        ones: usize,
    },
    Write {
        row: RowAddress,
    },
    BulkWrite {
        rows: Vec<RowAddress>,
    },
    Read {
        rows: Vec<RowAddress>,
        data: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExecLog {
    pub events: Vec<Event>,
    /// Data returned by each READ, in order.
    pub reads: Vec<BitRow>,
    /// Sensed result of each charge-sharing APA, in order.
    pub shared: Vec<BitRow>,
}

impl ExecLog {
    fn push(&mut self, time: f64, kind: EventKind) {
        self.events.push(Event { time, kind });
    }

    pub fn to_jsonl(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("events serialize") + "\n")
            .collect()
    }
}

#[derive(Clone, Debug)]
struct OpenRows {
    rows: Vec<RowAddress>,
    first: RowAddress,
    act_time: f64,
    latch: PredecoderLatchState,
    sensed: Option<BitRow>,
}

#[derive(Clone, Debug)]
enum Phase {
    Closed,
    Open(OpenRows),
    Precharging { pre_time: f64, prev: OpenRows },
}

/// Trace interpreter. `trial` selects the noise draws for charge sharing, so
/// one engine configuration replays one Monte Carlo trial.
#[derive(Clone, Debug)]
pub struct Engine {
    pub decoder: RowDecoder,
    pub timing: TimingParams,
    pub analog: AnalogParams,
    pub variation: VariationSample,
    pub profile: SenseProfile,
    /// Capacitance weight of the first-activated row during charge sharing.
    pub first_row_weight: f64,
    pub trial: u64,
}

impl Engine {
    /// Noise-free engine with default timing for `n_bitlines`-wide rows.
    pub fn nominal(n_bitlines: usize) -> Self {
        Self {
            decoder: RowDecoder::default(),
            timing: TimingParams::default(),
            analog: AnalogParams::default(),
            variation: VariationSample::nominal(n_bitlines),
            profile: SenseProfile::Strict,
            first_row_weight: 1.0,
            trial: 0,
        }
    }

    pub fn with_profile(mut self, profile: SenseProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_variation(mut self, analog: AnalogParams, seed: u64) -> Self {
        self.variation = VariationSample::new(&analog, seed, self.variation.n_bitlines);
        self.analog = analog;
        self
    }

    pub fn with_trial(mut self, trial: u64) -> Self {
        self.trial = trial;
        self
    }

    /// Runs `trace` on a closed bank. On error the bank holds the effects of
    /// every command before the failing one.
    pub fn execute(
        &self,
        bank: &mut BankState,
        trace: &CommandTrace,
    ) -> Result<ExecLog, EngineError> {
        if !bank.is_closed() {
            return Err(BankError::BankOpen("executing a trace").into());
        }
        if bank.n_bitlines() != self.variation.n_bitlines {
            return Err(BankError::WidthMismatch {
                got: self.variation.n_bitlines,
                expected: bank.n_bitlines(),
            }
            .into());
        }
        let mut log = ExecLog::default();
        let mut phase = Phase::Closed;
        for cmd in trace.commands() {
            phase = self.step(bank, phase, cmd, &mut log)?;
        }
        match phase {
            Phase::Closed => {}
            Phase::Precharging { prev, .. } => self.finish_precharge(bank, prev, &mut log)?,
            Phase::Open(open) => {
                let senseamp = open.sensed.map(|bits| SenseAmps {
                    bits,
                    enabled: true,
                });
                bank.set_open(open.rows, senseamp);
            }
        }
        Ok(log)
    }

    fn step(
        &self,
        bank: &mut BankState,
        phase: Phase,
        cmd: &Command,
        log: &mut ExecLog,
    ) -> Result<Phase, EngineError> {
        let t = cmd.time;
        match (&cmd.kind, phase) {
            (CommandKind::Act(row), Phase::Closed) => self.activate(bank, *row, t, log),
            (CommandKind::Act(_), Phase::Open(_)) => Err(EngineError::ActWhileOpen { time: t }),
            (CommandKind::Act(row), Phase::Precharging { pre_time, prev }) => {
                let gap2 = t - pre_time;
                if gap2 >= self.timing.t_rp {
                    self.finish_precharge(bank, prev, log)?;
                    return self.activate(bank, *row, t, log);
                }
                self.apa(bank, prev, pre_time, *row, t, log)
            }
            (CommandKind::Pre, Phase::Open(mut open)) => {
                let gap1 = t - open.act_time;
                if gap1 >= self.timing.t_ras {
                    let bits = match open.sensed.take() {
                        Some(bits) => bits,
                        None => self.sense_single(bank, open.first)?,
                    };
                    for &r in &open.rows {
                        bank.set_row_bits(r, &bits)?;
                    }
                    log.push(
                        t,
                        EventKind::Restore {
                            rows: open.rows.clone(),
                        },
                    );
                    open.sensed = Some(bits);
                } else if gap1 >= self.timing.t_violation || open.sensed.is_some() {
                    return Err(EngineError::UndefinedTimingRegime {
                        time: t,
                        gap1,
                        gap2: None,
                    });
                }
                log.push(t, EventKind::Precharge);
                Ok(Phase::Precharging {
                    pre_time: t,
                    prev: open,
                })
            }
            (CommandKind::Pre, phase) => Ok(phase),
            (CommandKind::Write(bits), Phase::Open(mut open)) => {
                for &r in &open.rows {
                    bank.set_row_bits(r, bits)?;
                }
                let kind = if open.rows.len() > 1 {
                    EventKind::BulkWrite {
                        rows: open.rows.clone(),
                    }
                } else {
                    EventKind::Write { row: open.first }
                };
                log.push(t, kind);
                open.sensed = Some(bits.clone());
                bank.set_open(
                    open.rows.clone(),
                    Some(SenseAmps {
                        bits: bits.clone(),
                        enabled: true,
                    }),
                );
                Ok(Phase::Open(open))
            }
            (CommandKind::Write(_), _) => Err(EngineError::WriteWhileClosed { time: t }),
            (CommandKind::Read, Phase::Open(mut open)) => {
                let bits = match open.sensed.take() {
                    Some(bits) => bits,
                    None => self.sense_single(bank, open.first)?,
                };
                log.push(
                    t,
                    EventKind::Read {
                        rows: open.rows.clone(),
                        data: bits.to_hex(),
                    },
                );
                log.reads.push(bits.clone());
                open.sensed = Some(bits);
                Ok(Phase::Open(open))
            }
            (CommandKind::Read, _) => Err(EngineError::ReadWhileClosed { time: t }),
        }
    }

    fn activate(
        &self,
        bank: &mut BankState,
        row: RowAddress,
        t: f64,
        log: &mut ExecLog,
    ) -> Result<Phase, EngineError> {
        bank.check_row(row)?;
        let latch = self
            .decoder
            .latch(&PredecoderLatchState::default(), row, true)?;
        log.push(t, EventKind::Activate { row });
        bank.set_open(vec![row], None);
        Ok(Phase::Open(OpenRows {
            rows: vec![row],
            first: row,
            act_time: t,
            latch,
            sensed: None,
        }))
    }

    /// A precharge that was not interrupted by a quick ACT. If the row never
    /// got sensed, the truncated activation left its cells at Vdd/2.
    fn finish_precharge(
        &self,
        bank: &mut BankState,
        prev: OpenRows,
        log: &mut ExecLog,
    ) -> Result<(), EngineError> {
        if prev.sensed.is_none() {
            for &r in &prev.rows {
                bank.fill_row(r, CellLevel::Neutral)?;
                log.push(prev.act_time, EventKind::Frac { row: r });
            }
        }
        bank.close();
        Ok(())
    }

    fn apa(
        &self,
        bank: &mut BankState,
        prev: OpenRows,
        pre_time: f64,
        row: RowAddress,
        t: f64,
        log: &mut ExecLog,
    ) -> Result<Phase, EngineError> {
        bank.check_row(row)?;
        let gap1 = pre_time - prev.act_time;
        let gap2 = t - pre_time;
        let regime = classify_apa(gap1, gap2, &self.timing);
        let latch = self.decoder.latch(&prev.latch, row, false)?;
        let rows = self.decoder.activated_rows(&latch);
        log.push(t, EventKind::Activate { row });
        let bits = match regime {
            ApaRegime::Mrc => {
                let bits = prev
                    .sensed
                    .expect("restore regime implies the first row was sensed");
                for &r in &rows {
                    bank.set_row_bits(r, &bits)?;
                }
                log.push(
                    t,
                    EventKind::MultiRowCopy {
                        source: prev.first,
                        rows: rows.clone(),
                    },
                );
                bits
            }
            ApaRegime::ChargeShare => {
                let subarray = self.decoder.subarray_of(prev.first) as u64;
                let event = log.shared.len() as u64;
                let bits = self.share(bank, &rows, prev.first, subarray, event);
                for &r in &rows {
                    bank.set_row_bits(r, &bits)?;
                }
                log.push(
                    t,
                    EventKind::ChargeShare {
                        rows: rows.clone(),
                        ones: bits.count_ones(),
                    },
                );
                log.shared.push(bits.clone());
                bits
            }
            ApaRegime::Normal | ApaRegime::Undefined => {
                return Err(EngineError::UndefinedTimingRegime {
                    time: t,
                    gap1,
                    gap2: Some(gap2),
                })
            }
        };
        bank.set_open(
            rows.clone(),
            Some(SenseAmps {
                bits: bits.clone(),
                enabled: true,
            }),
        );
        Ok(Phase::Open(OpenRows {
            rows,
            first: prev.first,
            act_time: t,
            latch,
            sensed: Some(bits),
        }))
    }

    /// Nominal sensing of one row. Full-rail cells read exactly; anything else
    /// depends on the profile.
    fn sense_single(&self, bank: &BankState, row: RowAddress) -> Result<BitRow, EngineError> {
        let bias = bank.polarity(row).bias_bit();
        let half = self.analog.vdd / 2.0;
        let cells = bank.row_cells(row);
        let mut out = BitRow::zeros(cells.len());
        for (b, c) in cells.iter().enumerate() {
            let bit = match (c.bit(), self.profile) {
                (Some(bit), _) => bit,
                (None, SenseProfile::Strict) => {
                    return Err(BankError::UnresolvedCell { row, bitline: b }.into())
                }
                (None, SenseProfile::Biased) => {
                    analog::sense(c.volts(self.analog.vdd) - half, 0.0, 0.0, bias)
                }
            };
            out.set(b, bit);
        }
        Ok(out)
    }

    /// Charge sharing across `rows` on every bitline, then sensing with the
    /// first row's polarity deciding ties.
    pub fn share(
        &self,
        bank: &BankState,
        rows: &[RowAddress],
        first: RowAddress,
        subarray: u64,
        event: u64,
    ) -> BitRow {
        let vdd = self.analog.vdd;
        let volts: Vec<Vec<f64>> = rows
            .iter()
            .map(|&r| bank.row_cells(r).iter().map(|c| c.volts(vdd)).collect())
            .collect();
        let caps: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| self.variation.cap_multipliers(r.0 as u64, self.trial))
            .collect();
        let weights: Vec<f64> = rows
            .iter()
            .map(|&r| {
                if r == first {
                    self.first_row_weight
                } else {
                    1.0
                }
            })
            .collect();
        let dev = analog::share_rows(&volts, &caps, &weights, &self.analog);
        let offsets = self.variation.sense_offsets(subarray);
        let noise = self.variation.noise(self.trial, subarray, event);
        analog::sense_row(
            &dev,
            &offsets,
            &noise,
            &self.analog,
            bank.polarity(first).bias_bit(),
        )
    }

    /// Puts every cell of `row` at Vdd/2 with a truncated ACT -> PRE.
    pub fn frac(&self, bank: &mut BankState, row: RowAddress) -> Result<ExecLog, EngineError> {
        self.execute(bank, &self.frac_trace(row))
    }

    pub fn frac_trace(&self, row: RowAddress) -> CommandTrace {
        CommandTrace::new(vec![
            Command::new(0.0, CommandKind::Act(row)),
            Command::new(self.timing.apa_gap, CommandKind::Pre),
        ])
        .expect("increasing times")
    }

    /// Closes an open bank. Open rows were already restored.
    pub fn precharge(&self, bank: &mut BankState) {
        bank.close();
    }

    /// Nominal ACT / READ / PRE of one row.
    pub fn read_row(&self, bank: &mut BankState, row: RowAddress) -> Result<BitRow, EngineError> {
        let t = &self.timing;
        let trace = CommandTrace::new(vec![
            Command::new(0.0, CommandKind::Act(row)),
            Command::new(t.t_rcd, CommandKind::Read),
            Command::new(t.t_ras, CommandKind::Pre),
        ])?;
        let mut log = self.execute(bank, &trace)?;
        Ok(log.reads.pop().expect("trace has one READ"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bank::{DataPattern, Geometry};
    use proptest::prelude::*;

    const NB: usize = 64;

    fn bank() -> BankState {
        BankState::new(Geometry {
            n_subarrays: 2,
            subarray_size: 512,
            n_bitlines: NB,
        })
        .unwrap()
    }

    fn ra(v: u16) -> RowAddress {
        RowAddress(v)
    }

    fn trace(cmds: &[(f64, CommandKind)]) -> CommandTrace {
        CommandTrace::new(
            cmds.iter()
                .map(|(t, k)| Command::new(*t, k.clone()))
                .collect(),
        )
        .unwrap()
    }

    fn act(r: u16) -> CommandKind {
        CommandKind::Act(ra(r))
    }

    const PRE: CommandKind = CommandKind::Pre;

    fn nrg_rows(a: u16, b: u16) -> Vec<RowAddress> {
        RowDecoder::default().nrg(ra(a), ra(b)).unwrap().rows
    }

    #[test]
    fn mrc_drives_all_rows_to_source() {
        let mut b = bank();
        let rows = nrg_rows(256, 287);
        b.init_rows(rows.iter().copied(), &DataPattern::AllZeros)
            .unwrap();
        b.init_rows([ra(256)], &DataPattern::AllOnes).unwrap();
        let e = Engine::nominal(NB);
        let log = e
            .execute(
                &mut b,
                &trace(&[
                    (0.0, act(256)),
                    (32.0, PRE),
                    (34.5, act(287)),
                    (66.5, PRE),
                    (80.0, PRE),
                ]),
            )
            .unwrap();
        assert!(log
            .events
            .iter()
            .any(|ev| matches!(&ev.kind, EventKind::MultiRowCopy { rows, .. } if rows.len() == 8)));
        for r in rows {
            assert_eq!(b.row_bits(r).unwrap(), BitRow::ones(NB), "row {r}");
        }
    }

    #[test]
    fn charge_share_one_vs_seven_gives_zero() {
        let mut b = bank();
        let rows = nrg_rows(256, 287);
        b.init_rows(rows.iter().copied(), &DataPattern::AllZeros)
            .unwrap();
        b.init_rows([ra(256)], &DataPattern::AllOnes).unwrap();
        let e = Engine::nominal(NB);
        let log = e
            .execute(
                &mut b,
                &trace(&[(0.0, act(256)), (2.0, PRE), (4.0, act(287)), (36.0, PRE)]),
            )
            .unwrap();
        assert_eq!(log.shared.len(), 1);
        for r in rows {
            assert_eq!(b.row_bits(r).unwrap(), BitRow::zeros(NB));
        }
    }

    #[test]
    fn write_after_mrc_is_bulk_write() {
        let mut b = bank();
        let rows = nrg_rows(256, 287);
        b.init_rows(rows.iter().copied(), &DataPattern::Random(3))
            .unwrap();
        let p = BitRow::alternating(NB);
        let e = Engine::nominal(NB);
        let log = e
            .execute(
                &mut b,
                &trace(&[
                    (0.0, act(256)),
                    (32.0, PRE),
                    (34.5, act(287)),
                    (48.0, CommandKind::Write(p.clone())),
                    (66.5, PRE),
                ]),
            )
            .unwrap();
        assert!(log
            .events
            .iter()
            .any(|ev| matches!(ev.kind, EventKind::BulkWrite { .. })));
        for r in rows {
            assert_eq!(b.row_bits(r).unwrap(), p);
        }
    }

    #[test]
    fn nominal_access_touches_one_row() {
        let mut b = bank();
        b.init_rows((0..16).map(ra), &DataPattern::Random(9))
            .unwrap();
        let before = b.clone();
        let data = BitRow::alternating(NB);
        let e = Engine::nominal(NB);
        e.execute(
            &mut b,
            &trace(&[
                (0.0, act(0)),
                (32.0, PRE),
                (45.5, act(7)),
                (59.0, CommandKind::Write(data.clone())),
                (77.5, PRE),
            ]),
        )
        .unwrap();
        for r in 0..16 {
            let want = if r == 7 {
                data.clone()
            } else {
                before.row_bits(ra(r)).unwrap()
            };
            assert_eq!(b.row_bits(ra(r)).unwrap(), want);
        }
        assert_eq!(e.read_row(&mut b, ra(7)).unwrap(), data);
    }

    #[test]
    fn regime_errors() {
        let e = Engine::nominal(NB);
        let err = |cmds: &[(f64, CommandKind)]| e.execute(&mut bank(), &trace(cmds)).unwrap_err();
        assert!(matches!(
            err(&[(0.0, act(1)), (10.0, PRE)]),
            EngineError::UndefinedTimingRegime { .. }
        ));
        assert!(matches!(
            err(&[(0.0, act(1)), (32.0, PRE), (38.0, act(2))]),
            EngineError::UndefinedTimingRegime { .. }
        ));
        assert!(matches!(
            err(&[(0.0, CommandKind::Write(BitRow::zeros(NB)))]),
            EngineError::WriteWhileClosed { .. }
        ));
        assert!(matches!(
            err(&[(0.0, CommandKind::Read)]),
            EngineError::ReadWhileClosed { .. }
        ));
        assert!(matches!(
            err(&[(0.0, act(1)), (2.0, PRE), (4.0, act(600))]),
            EngineError::Decoder(DecoderError::CrossSubarray { .. })
        ));
        assert!(matches!(
            err(&[
                (0.0, act(1)),
                (2.0, PRE),
                (4.0, act(2)),
                (36.0, PRE),
                (38.0, act(4))
            ]),
            EngineError::Decoder(DecoderError::LatchOverflow)
        ));
        assert!(matches!(
            err(&[(0.0, act(1)), (1.0, act(2))]),
            EngineError::ActWhileOpen { .. }
        ));
    }

    #[test]
    fn frac_neutralizes_idempotently() {
        let mut b = bank();
        b.init_rows([ra(5)], &DataPattern::AllOnes).unwrap();
        let e = Engine::nominal(NB);
        e.frac(&mut b, ra(5)).unwrap();
        assert!(b.row_cells(ra(5)).iter().all(|c| *c == CellLevel::Neutral));
        let snap = b.snapshot();
        e.frac(&mut b, ra(5)).unwrap();
        assert_eq!(b.snapshot(), snap);
        assert!(matches!(
            e.read_row(&mut b, ra(5)),
            Err(EngineError::Bank(BankError::UnresolvedCell { .. }))
        ));
        b.close();
        let biased = Engine::nominal(NB).with_profile(SenseProfile::Biased);
        // row 5 is anti-cell: leans to one
        assert_eq!(biased.read_row(&mut b, ra(5)).unwrap(), BitRow::ones(NB));
    }

    #[test]
    fn execute_requires_closed_bank() {
        let mut b = bank();
        let e = Engine::nominal(NB);
        e.execute(&mut b, &trace(&[(0.0, act(3))])).unwrap();
        assert_eq!(b.open_rows(), &[ra(3)]);
        assert!(e.execute(&mut b, &trace(&[(0.0, PRE)])).is_err());
        e.precharge(&mut b);
        assert!(b.is_closed());
    }

    #[test]
    fn jsonl_log() {
        let mut b = bank();
        let log = Engine::nominal(NB)
            .execute(
                &mut b,
                &trace(&[(0.0, act(0)), (2.0, PRE), (4.0, act(7)), (36.0, PRE)]),
            )
            .unwrap();
        let text = log.to_jsonl();
        assert!(text.contains(r#""event":"charge_share""#), "{text}");
    }

    proptest! {
        #[test]
        fn mrc_copies_source_everywhere(seed in any::<u64>(), a in 0u16..512, b2 in 0u16..512) {
            prop_assume!(a != b2);
            let mut b = bank();
            let rows = nrg_rows(a, b2);
            b.init_rows(rows.iter().copied(), &DataPattern::Random(seed)).unwrap();
            let src = b.row_bits(ra(a)).unwrap();
            Engine::nominal(NB)
                .execute(&mut b, &trace(&[(0.0, act(a)), (32.0, PRE), (34.5, act(b2)), (66.5, PRE)]))
                .unwrap();
            for r in rows {
                prop_assert_eq!(b.row_bits(r).unwrap(), src.clone());
            }
        }

        #[test]
        fn noise_free_share_is_majority(seed in any::<u64>(), a in 0u16..512, b2 in 0u16..512) {
            let rows = nrg_rows(a, b2);
            prop_assume!(rows.len() >= 4);
            let mut b = bank();
            b.init_rows(rows.iter().copied(), &DataPattern::Random(seed)).unwrap();
            // odd effective count: neutralize one row
            let neutral = *rows.last().unwrap();
            b.fill_row(neutral, CellLevel::Neutral).unwrap();
            let inputs: Vec<BitRow> = rows[..rows.len() - 1].iter().map(|&r| b.row_bits(r).unwrap()).collect();
            let log = Engine::nominal(NB)
                .execute(&mut b, &trace(&[(0.0, act(a)), (2.0, PRE), (4.0, act(b2))]))
                .unwrap();
            for bl in 0..NB {
                let ones = inputs.iter().filter(|r| r.get(bl)).count();
                prop_assert_eq!(log.shared[0].get(bl), 2 * ones > inputs.len());
            }
        }
    }
}
