//! Operations built from APA traces: input-replicated majority, Multi-RowCopy,
//! Bulk-Write, and success-rate characterization.

use std::fmt::{self, Write as _};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analog::{self, count_correct};
use crate::bank::BankState;
use crate::bits::{majority, BitRow};
use crate::decoder::{RowAddress, RowGroup};
use crate::engine::{
    Command, CommandKind, CommandTrace, Engine, EngineError, SenseProfile, TimingParams,
};

#[derive(Debug, Error)]
pub enum PrimitiveError {
    #[error("MAJ{m} cannot run on {n} rows")]
    InvalidArity { m: usize, n: usize },
    #[error("expected {expected} input rows, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("source row {src} is not the group's first anchor {first}")]
    SourceNotAnchor { src: RowAddress, first: RowAddress },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// How `m` majority inputs fill `n` simultaneously activated rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReplicationLayout {
    pub m: usize,
    pub n: usize,
    pub copies: usize,
    pub neutrals: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Input(usize),
    Neutral,
}

pub fn replication_layout(m: usize, n: usize) -> Result<ReplicationLayout, PrimitiveError> {
    let ok = m % 2 == 1 && m >= 3 && m <= n && n <= 32 && n.is_power_of_two() && n >= 4;
    if !ok {
        return Err(PrimitiveError::InvalidArity { m, n });
    }
    let copies = n / m;
    Ok(ReplicationLayout {
        m,
        n,
        copies,
        neutrals: n - m * copies,
    })
}

impl ReplicationLayout {
    /// Slot of each row in ascending row order: inputs round-robin, then the
    /// neutral rows.
    pub fn slots(&self) -> Vec<Slot> {
        (0..self.n)
            .map(|k| {
                if k < self.m * self.copies {
                    Slot::Input(k % self.m)
                } else {
                    Slot::Neutral
                }
            })
            .collect()
    }
}

/// Values standing in for neutral rows when sense amps lean to `bias` on a
/// tie: they cancel pairwise, and an odd one out votes against the bias so an
/// exact input tie still resolves the right way.
pub fn biased_substitutes(count: usize, bias: bool) -> Vec<bool> {
    (0..count)
        .map(|i| if i % 2 == 0 { !bias } else { bias })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MajResult {
    pub bits: BitRow,
    pub stable_mask: BitRow,
}

impl MajResult {
    pub fn success_rate(&self) -> f64 {
        self.stable_mask.count_ones() as f64 / self.stable_mask.len().max(1) as f64
    }
}

/// One row initialization: `Some(bits)` is a nominal write, `None` a Frac.
pub type RowInit = (RowAddress, Option<BitRow>);

/// Nominal writes and Fracs, one after another, each honoring tRAS/tRP.
pub fn init_trace(inits: &[RowInit], timing: &TimingParams) -> CommandTrace {
    let mut cmds = Vec::new();
    let mut t = 0.0;
    for (row, data) in inits {
        cmds.push(Command::new(t, CommandKind::Act(*row)));
        match data {
            Some(bits) => {
                cmds.push(Command::new(
                    t + timing.t_rcd,
                    CommandKind::Write(bits.clone()),
                ));
                cmds.push(Command::new(t + timing.t_ras, CommandKind::Pre));
                t += timing.t_ras + timing.t_rp;
            }
            None => {
                cmds.push(Command::new(t + timing.apa_gap, CommandKind::Pre));
                t += timing.apa_gap + timing.t_rp;
            }
        }
    }
    CommandTrace::new(cmds).expect("increasing times")
}

/// ACT first, PRE and ACT second both within `apa_gap`, then an optional
/// WRITE, then a nominal PRE.
pub fn charge_share_trace(
    first: RowAddress,
    second: RowAddress,
    write: Option<&BitRow>,
    timing: &TimingParams,
) -> CommandTrace {
    let g = timing.apa_gap;
    let mut cmds = vec![
        Command::new(0.0, CommandKind::Act(first)),
        Command::new(g, CommandKind::Pre),
        Command::new(2.0 * g, CommandKind::Act(second)),
    ];
    if let Some(bits) = write {
        cmds.push(Command::new(
            2.0 * g + timing.t_rcd,
            CommandKind::Write(bits.clone()),
        ));
    }
    cmds.push(Command::new(2.0 * g + timing.t_ras, CommandKind::Pre));
    CommandTrace::new(cmds).expect("increasing times")
}

/// Fully restored ACT of `first`, then PRE and a quick ACT of `second`.
pub fn mrc_trace(first: RowAddress, second: RowAddress, timing: &TimingParams) -> CommandTrace {
    let t = timing.t_ras;
    let act2 = t + timing.apa_gap;
    CommandTrace::new(vec![
        Command::new(0.0, CommandKind::Act(first)),
        Command::new(t, CommandKind::Pre),
        Command::new(act2, CommandKind::Act(second)),
        Command::new(act2 + timing.t_ras, CommandKind::Pre),
    ])
    .expect("increasing times")
}

/// Data written into each row of `group` for a replicated MAJ.
fn layout_inits(
    bank: &BankState,
    group: &RowGroup,
    layout: &ReplicationLayout,
    inputs: &[BitRow],
    profile: SenseProfile,
) -> Vec<RowInit> {
    let nb = bank.n_bitlines();
    let subs = biased_substitutes(layout.neutrals, bank.polarity(group.first).bias_bit());
    let mut subs = subs.into_iter();
    group
        .rows
        .iter()
        .zip(layout.slots())
        .map(|(&row, slot)| match slot {
            Slot::Input(j) => (row, Some(inputs[j].clone())),
            Slot::Neutral => match profile {
                SenseProfile::Strict => (row, None),
                SenseProfile::Biased => (
                    row,
                    Some(BitRow::splat(nb, subs.next().expect("one per neutral"))),
                ),
            },
        })
        .collect()
}

fn check_inputs(
    group: &RowGroup,
    m: usize,
    inputs: &[BitRow],
) -> Result<ReplicationLayout, PrimitiveError> {
    let layout = replication_layout(m, group.n())?;
    if inputs.len() != m {
        return Err(PrimitiveError::InputCount {
            expected: m,
            got: inputs.len(),
        });
    }
    Ok(layout)
}

/// Full command trace of a replicated MAJ over `group`.
pub fn maj_trace(
    engine: &Engine,
    bank: &BankState,
    group: &RowGroup,
    inputs: &[BitRow],
) -> Result<CommandTrace, PrimitiveError> {
    let layout = check_inputs(group, inputs.len(), inputs)?;
    let t = &engine.timing;
    let mut trace = init_trace(
        &layout_inits(bank, group, &layout, inputs, engine.profile),
        t,
    );
    trace.append_shifted(
        &charge_share_trace(group.first, group.second, None, t),
        t.t_rp,
    )?;
    Ok(trace)
}

/// Writes replicated inputs (and neutral rows) into `group`, charge-shares
/// and returns the sensed bits against the boolean majority.
pub fn maj(
    engine: &Engine,
    bank: &mut BankState,
    group: &RowGroup,
    inputs: &[BitRow],
) -> Result<MajResult, PrimitiveError> {
    let trace = maj_trace(engine, bank, group, inputs)?;
    let log = engine.execute(bank, &trace)?;
    let bits = log
        .shared
        .last()
        .cloned()
        .expect("trace ends in a charge share");
    let refs: Vec<&BitRow> = inputs.iter().collect();
    let stable_mask = bits.xor(&majority(&refs)).not();
    Ok(MajResult { bits, stable_mask })
}

/// Copies `src` (the group's first anchor) into every row of `group`.
pub fn multi_row_clone(
    engine: &Engine,
    bank: &mut BankState,
    src: RowAddress,
    group: &RowGroup,
) -> Result<(), PrimitiveError> {
    if src != group.first {
        return Err(PrimitiveError::SourceNotAnchor {
            src,
            first: group.first,
        });
    }
    engine.execute(bank, &mrc_trace(group.first, group.second, &engine.timing))?;
    Ok(())
}

/// Writes `data` into every row of `group` with a single WRITE.
pub fn bulk_write(
    engine: &Engine,
    bank: &mut BankState,
    group: &RowGroup,
    data: &BitRow,
) -> Result<(), PrimitiveError> {
    let trace = charge_share_trace(group.first, group.second, Some(data), &engine.timing);
    engine.execute(bank, &trace)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputPattern {
    /// Fresh random inputs on every bitline each trial.
    Random,
    /// Every input all-ones or all-zeros; one trial per truth-table row.
    OnesZeros,
}

impl InputPattern {
    pub fn trials(self, m: usize, random_trials: u32) -> u32 {
        match self {
            Self::Random => random_trials,
            Self::OnesZeros => 1 << m,
        }
    }

    /// Inputs of `trial` for the cell `cell_key`.
    pub fn inputs(
        self,
        m: usize,
        n_bitlines: usize,
        seed: u64,
        cell_key: u64,
        trial: u64,
    ) -> Vec<BitRow> {
        match self {
            Self::Random => {
                let mut rng = analog::stream(seed, DATA_DOMAIN, analog::mix(cell_key, trial));
                (0..m)
                    .map(|_| BitRow::random(n_bitlines, &mut rng))
                    .collect()
            }
            Self::OnesZeros => (0..m)
                .map(|j| BitRow::splat(n_bitlines, (trial >> j) & 1 == 1))
                .collect(),
        }
    }
}

impl fmt::Display for InputPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Random => "random",
            Self::OnesZeros => "ones_zeros",
        })
    }
}

impl std::str::FromStr for InputPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Self::Random),
            "ones_zeros" | "ones-zeros" | "allones" => Ok(Self::OnesZeros),
            other => Err(format!("unknown pattern {other:?}")),
        }
    }
}

const DATA_DOMAIN: u64 = 0x6461_7461_0000_0004;

/// The charge share of a replicated MAJ on one group, with everything that
/// does not change between trials computed once. Produces exactly the bits
/// the engine would sense for the same trial.
pub struct MajTrialModel<'a> {
    engine: &'a Engine,
    slots: Vec<Slot>,
    /// Per-row fixed voltage for substituted neutrals (biased profile).
    fixed: Vec<Option<f64>>,
    weights: Vec<f64>,
    rows: Vec<u64>,
    static_caps: Option<Vec<Vec<f64>>>,
    offsets: Vec<f64>,
    subarray: u64,
    bias: bool,
}

impl<'a> MajTrialModel<'a> {
    pub fn new(
        engine: &'a Engine,
        bank: &BankState,
        group: &RowGroup,
        m: usize,
    ) -> Result<Self, PrimitiveError> {
        let layout = replication_layout(m, group.n())?;
        let vdd = engine.analog.vdd;
        let bias = bank.polarity(group.first).bias_bit();
        let mut subs = biased_substitutes(layout.neutrals, bias).into_iter();
        let slots = layout.slots();
        let fixed = slots
            .iter()
            .map(|s| match (s, engine.profile) {
                (Slot::Input(_), _) => None,
                (Slot::Neutral, SenseProfile::Strict) => Some(vdd / 2.0),
                (Slot::Neutral, SenseProfile::Biased) => {
                    Some(if subs.next().expect("one per neutral") {
                        vdd
                    } else {
                        0.0
                    })
                }
            })
            .collect();
        let rows: Vec<u64> = group.rows.iter().map(|r| r.0 as u64).collect();
        let static_caps = engine.variation.is_static().then(|| {
            rows.iter()
                .map(|&r| engine.variation.cap_multipliers(r, 0))
                .collect()
        });
        let subarray = group.subarray(engine.decoder.layout()) as u64;
        Ok(Self {
            engine,
            slots,
            fixed,
            weights: group
                .rows
                .iter()
                .map(|&r| {
                    if r == group.first {
                        engine.first_row_weight
                    } else {
                        1.0
                    }
                })
                .collect(),
            rows,
            static_caps,
            offsets: engine.variation.sense_offsets(subarray),
            subarray,
            bias,
        })
    }

    pub fn sense(&self, inputs: &[BitRow], trial: u64) -> BitRow {
        let nb = self.offsets.len();
        let vdd = self.engine.analog.vdd;
        let volts: Vec<Vec<f64>> = self
            .slots
            .iter()
            .zip(&self.fixed)
            .map(|(slot, fixed)| match (slot, fixed) {
                (_, Some(v)) => vec![*v; nb],
                (Slot::Input(j), None) => inputs[*j]
                    .iter()
                    .map(|b| if b { vdd } else { 0.0 })
                    .collect(),
                (Slot::Neutral, None) => unreachable!("neutral rows always have a fixed level"),
            })
            .collect();
        let dynamic;
        let caps = match &self.static_caps {
            Some(c) => c,
            None => {
                dynamic = self
                    .rows
                    .iter()
                    .map(|&r| self.engine.variation.cap_multipliers(r, trial))
                    .collect::<Vec<_>>();
                &dynamic
            }
        };
        let dev = analog::share_rows(&volts, caps, &self.weights, &self.engine.analog);
        let noise = self.engine.variation.noise(trial, self.subarray, 0);
        analog::sense_row(&dev, &self.offsets, &noise, &self.engine.analog, self.bias)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuccessRateRow {
    pub profile: String,
    pub subarray: u16,
    pub nrg_id: usize,
    pub first: u16,
    pub second: u16,
    pub m: usize,
    pub n: usize,
    pub pattern: InputPattern,
    pub trials: u32,
    pub success_rate: f64,
    pub unstable_bitlines: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SuccessRateReport {
    pub rows: Vec<SuccessRateRow>,
}

impl SuccessRateReport {
    pub const CSV_HEADER: &'static str =
        "profile,subarray,nrg_id,first,second,m,n,pattern,trials,success_rate,unstable_bitlines";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{:.6},{}",
                r.profile,
                r.subarray,
                r.nrg_id,
                r.first,
                r.second,
                r.m,
                r.n,
                r.pattern,
                r.trials,
                r.success_rate,
                r.unstable_bitlines
            );
        }
        out
    }

    /// Mean success rate over rows matching `filter`, or `None` if none do.
    pub fn mean(&self, filter: impl Fn(&SuccessRateRow) -> bool) -> Option<f64> {
        let picked: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| filter(r))
            .map(|r| r.success_rate)
            .collect();
        (!picked.is_empty()).then(|| picked.iter().sum::<f64>() / picked.len() as f64)
    }
}

/// Success rate of every `(group, m, pattern)` combination. A bitline counts
/// as stable when it senses the true majority in every trial. Combinations
/// where `m` does not fit the group are skipped.
pub fn characterize(
    engine: &Engine,
    bank: &BankState,
    groups: &[RowGroup],
    ms: &[usize],
    patterns: &[InputPattern],
    random_trials: u32,
    seed: u64,
) -> Result<SuccessRateReport, PrimitiveError> {
    let profile = match engine.profile {
        SenseProfile::Strict => "strict",
        SenseProfile::Biased => "biased",
    };
    let cells: Vec<(usize, &RowGroup, usize, InputPattern)> = groups
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| {
            ms.iter()
                .filter(move |&&m| replication_layout(m, g.n()).is_ok())
                .flat_map(move |&m| patterns.iter().map(move |&p| (gi, g, m, p)))
        })
        .collect();
    let nb = bank.n_bitlines();
    let rows = cells
        .par_iter()
        .map(|&(gi, group, m, pattern)| {
            let model = MajTrialModel::new(engine, bank, group, m)?;
            let trials = pattern.trials(m, random_trials);
            let cell_key = analog::mix(analog::mix(gi as u64, m as u64), pattern as u64);
            let correct = count_correct(nb, trials, |t| {
                let inputs = pattern.inputs(m, nb, seed, cell_key, t);
                let refs: Vec<&BitRow> = inputs.iter().collect();
                model.sense(&inputs, t).xor(&majority(&refs)).not()
            });
            let stable = correct.iter().filter(|&&c| c == trials).count();
            Ok(SuccessRateRow {
                profile: profile.to_string(),
                subarray: group.subarray(engine.decoder.layout()),
                nrg_id: gi,
                first: group.first.0,
                second: group.second.0,
                m,
                n: group.n(),
                pattern,
                trials,
                success_rate: stable as f64 / nb as f64,
                unstable_bitlines: nb - stable,
            })
        })
        .collect::<Result<Vec<_>, PrimitiveError>>()?;
    Ok(SuccessRateReport { rows })
}

/// `count` distinct random groups of exactly `n` rows in `subarray`.
pub fn random_groups<R: Rng + ?Sized>(
    engine: &Engine,
    subarray: u16,
    n: usize,
    count: usize,
    rng: &mut R,
) -> Vec<RowGroup> {
    let decoder = &engine.decoder;
    let size = decoder.layout().subarray_size() as u16;
    let base = subarray * size;
    let k = n.trailing_zeros() as usize;
    let mut out = Vec::new();
    if !n.is_power_of_two() || k > decoder.layout().groups().len() {
        return out;
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut attempts = 0usize;
    while out.len() < count {
        let a = RowAddress(base + rng.random_range(0..size));
        let b = RowAddress(base + rng.random_range(0..size));
        if decoder.differing_groups(a, b) != k {
            continue;
        }
        attempts += 1;
        let g = decoder.nrg(a, b).expect("same subarray");
        // repeats are allowed once distinct groups get hard to find
        if seen.insert(g.rows.clone()) || attempts > 64 * count {
            out.push(g);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analog::AnalogParams;
    use crate::bank::{DataPattern, Geometry};
    use crate::decoder::RowDecoder;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const NB: usize = 64;

    fn bank() -> BankState {
        BankState::new(Geometry {
            n_subarrays: 2,
            subarray_size: 512,
            n_bitlines: NB,
        })
        .unwrap()
    }

    fn group_of(n: usize) -> RowGroup {
        let dec = RowDecoder::default();
        let second = match n {
            2 => 1,
            4 => 7,
            8 => 31,
            16 => 127,
            32 => 511,
            _ => 0,
        };
        dec.nrg(RowAddress(0), RowAddress(second)).unwrap()
    }

    #[test]
    fn layout_examples() {
        let l = |m, n| replication_layout(m, n).unwrap();
        assert_eq!((l(3, 32).copies, l(3, 32).neutrals), (10, 2));
        assert_eq!((l(3, 4).copies, l(3, 4).neutrals), (1, 1));
        assert_eq!((l(5, 8).copies, l(5, 8).neutrals), (1, 3));
        assert_eq!((l(7, 8).copies, l(7, 8).neutrals), (1, 1));
        assert!(replication_layout(4, 8).is_err());
        assert!(replication_layout(9, 8).is_err());
        assert!(replication_layout(3, 12).is_err());
        for n in [4, 8, 16, 32] {
            for m in (3..=n.min(31)).step_by(2) {
                let l = l(m, n);
                assert_eq!(l.m * l.copies + l.neutrals, n);
            }
        }
    }

    #[test]
    fn slots_round_robin() {
        let s = replication_layout(3, 8).unwrap().slots();
        use Slot::*;
        assert_eq!(
            s,
            vec![
                Input(0),
                Input(1),
                Input(2),
                Input(0),
                Input(1),
                Input(2),
                Neutral,
                Neutral
            ]
        );
    }

    #[test]
    fn maj_examples_both_profiles() {
        for profile in [SenseProfile::Strict, SenseProfile::Biased] {
            let e = Engine::nominal(NB).with_profile(profile);
            for n in [4, 8, 16, 32] {
                let g = group_of(n);
                let mut b = bank();
                let inputs = [true, true, false].map(|x| BitRow::splat(NB, x));
                let r = maj(&e, &mut b, &g, &inputs).unwrap();
                assert_eq!(r.bits, BitRow::ones(NB), "n={n} {profile:?}");
                assert_eq!(r.success_rate(), 1.0);
            }
            let mut b = bank();
            let inputs = [true, true, false, false, true].map(|x| BitRow::splat(NB, x));
            assert_eq!(
                maj(&e, &mut b, &group_of(8), &inputs).unwrap().bits,
                BitRow::ones(NB)
            );
        }
    }

    #[test]
    fn maj_replication_equivalence_exhaustive_small() {
        let e = Engine::nominal(NB);
        for m in [3usize, 5] {
            // each bitline gets one truth-table row
            let inputs: Vec<BitRow> = (0..m)
                .map(|j| BitRow::from_fn(NB, |b| (b % (1 << m)) >> j & 1 == 1))
                .collect();
            let refs: Vec<&BitRow> = inputs.iter().collect();
            let want = majority(&refs);
            for n in [8, 32] {
                let mut b = bank();
                assert_eq!(maj(&e, &mut b, &group_of(n), &inputs).unwrap().bits, want);
            }
        }
    }

    #[test]
    fn clone_and_bulk_write() {
        let e = Engine::nominal(NB);
        for n in [2, 4, 8, 16, 32] {
            let g = group_of(n);
            let mut b = bank();
            b.init_rows(g.rows.iter().copied(), &DataPattern::Random(n as u64))
                .unwrap();
            let src = b.row_bits(g.first).unwrap();
            multi_row_clone(&e, &mut b, g.first, &g).unwrap();
            assert!(g.rows.iter().all(|&r| b.row_bits(r).unwrap() == src));
            let data = BitRow::alternating(NB);
            bulk_write(&e, &mut b, &g, &data).unwrap();
            assert!(g.rows.iter().all(|&r| b.row_bits(r).unwrap() == data));
        }
        let g = group_of(8);
        assert!(matches!(
            multi_row_clone(&e, &mut bank(), g.second, &g),
            Err(PrimitiveError::SourceNotAnchor { .. })
        ));
    }

    #[test]
    fn disjoint_bulk_writes_are_isolated() {
        let e = Engine::nominal(NB);
        let dec = RowDecoder::default();
        let g1 = dec.nrg(RowAddress(0), RowAddress(7)).unwrap();
        let g2 = dec.nrg(RowAddress(8), RowAddress(31)).unwrap();
        assert!(g1.rows.iter().all(|r| !g2.contains(*r)));
        let mut b = bank();
        bulk_write(&e, &mut b, &g1, &BitRow::ones(NB)).unwrap();
        bulk_write(&e, &mut b, &g2, &BitRow::alternating(NB)).unwrap();
        assert!(g1
            .rows
            .iter()
            .all(|&r| b.row_bits(r).unwrap() == BitRow::ones(NB)));
        assert!(g2
            .rows
            .iter()
            .all(|&r| b.row_bits(r).unwrap() == BitRow::alternating(NB)));
    }

    #[test]
    fn trial_model_matches_engine() {
        for (profile, static_variation) in [
            (SenseProfile::Strict, true),
            (SenseProfile::Biased, true),
            (SenseProfile::Strict, false),
        ] {
            let params = AnalogParams {
                static_variation,
                ..AnalogParams::default().with_variation(0.4)
            };
            for n in [4, 32] {
                let g = group_of(n);
                for trial in [0u64, 5] {
                    let e = Engine::nominal(NB)
                        .with_profile(profile)
                        .with_variation(params.clone(), 11)
                        .with_trial(trial);
                    let inputs = InputPattern::Random.inputs(3, NB, 1, 2, trial);
                    let mut b = bank();
                    let via_engine = maj(&e, &mut b, &g, &inputs).unwrap().bits;
                    let model = MajTrialModel::new(&e, &b, &g, 3).unwrap();
                    assert_eq!(model.sense(&inputs, trial), via_engine, "{profile:?} n={n}");
                }
            }
        }
    }

    #[test]
    fn characterize_nominal_is_perfect_and_deterministic() {
        let e = Engine::nominal(NB);
        let groups = [group_of(4), group_of(8)];
        let pats = [InputPattern::Random, InputPattern::OnesZeros];
        let r = characterize(&e, &bank(), &groups, &[3, 5, 7], &pats, 20, 1).unwrap();
        // (4: m=3) + (8: m=3,5,7) times two patterns
        assert_eq!(r.rows.len(), 8);
        assert!(r.rows.iter().all(|row| row.success_rate == 1.0));
        assert_eq!(r.rows[1].trials, 8);

        let noisy =
            Engine::nominal(NB).with_variation(AnalogParams::default().with_variation(0.4), 3);
        let a = characterize(&noisy, &bank(), &groups, &[3], &pats, 50, 9).unwrap();
        let b = characterize(&noisy, &bank(), &groups, &[3], &pats, 50, 9).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn random_groups_have_requested_size() {
        let e = Engine::nominal(NB);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [2, 4, 8, 16, 32] {
            let gs = random_groups(&e, 1, n, 10, &mut rng);
            assert_eq!(gs.len(), 10);
            assert!(gs
                .iter()
                .all(|g| g.n() == n && g.subarray(e.decoder.layout()) == 1));
        }
    }
}
