use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, VerifyRegime};
use super::{csv_lines, ExperimentError};
use crate::analog::{mix, stream};
use crate::bank::{BankState, CellLevel, DataPattern, Geometry};
use crate::bits::BitRow;
use crate::bitserial::{
    count_ops, BitColumnMatrix, Compute, DramBackend, Kernel, LogicBackend, MajBackend, MajOpCount,
    PerfScenario,
};
use crate::decoder::{NrgCensus, RowAddress, RowGroup};
use crate::destruct::{self, DestructionPlan, PlanComparison};
use crate::engine::{Command, CommandKind, CommandTrace, Engine, EngineError};
use crate::primitives::{self, charge_share_trace, InputPattern, SuccessRateReport};

const GROUP_DOMAIN: u64 = 0x6772_7073_0000_0005;
const VERIFY_DOMAIN: u64 = 0x7665_7269_0000_0006;
const OPERAND_DOMAIN: u64 = 0x6f70_6572_0000_0007;
const BANK_DOMAIN: u64 = 0x6261_6e6b_0000_0008;

pub fn run_census(cfg: &ExperimentConfig) -> NrgCensus {
    cfg.engine(0.0).decoder.nrg_census()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRow {
    pub subarray: u16,
    pub first: u16,
    pub second: u16,
    pub expected_n: usize,
    pub observed_n: usize,
    pub pass: bool,
}

impl VerifyRow {
    pub const CSV_HEADER: &'static str = "subarray,first,second,expected_n,observed_n,pass";

    pub fn to_csv(rows: &[Self]) -> String {
        csv_lines(
            Self::CSV_HEADER,
            rows.iter().map(|r| {
                format!(
                    "{},{},{},{},{},{}",
                    r.subarray, r.first, r.second, r.expected_n, r.observed_n, r.pass
                )
            }),
        )
    }
}

fn verify_trace(
    first: RowAddress,
    second: RowAddress,
    data: &BitRow,
    regime: VerifyRegime,
    engine: &Engine,
) -> CommandTrace {
    let t = &engine.timing;
    let act2 = match regime {
        VerifyRegime::ChargeShare => return charge_share_trace(first, second, Some(data), t),
        VerifyRegime::Mrc => t.t_ras + t.apa_gap,
        VerifyRegime::Nominal => t.t_ras + t.t_rp,
    };
    CommandTrace::new(vec![
        Command::new(0.0, CommandKind::Act(first)),
        Command::new(t.t_ras, CommandKind::Pre),
        Command::new(act2, CommandKind::Act(second)),
        Command::new(act2 + t.t_rcd, CommandKind::Write(data.clone())),
        Command::new(act2 + t.t_ras, CommandKind::Pre),
    ])
    .expect("increasing times")
}

/// Initializes the subarray with random rows, issues ACT `first`, PRE, ACT
/// `second` and a WRITE of fresh data under `regime`, then reads every row
/// back. Passes when exactly the predicted rows hold the written data and
/// all others are untouched.
pub fn verify_pair(
    engine: &Engine,
    geometry: &Geometry,
    first: RowAddress,
    second: RowAddress,
    regime: VerifyRegime,
    seed: u64,
) -> Result<VerifyRow, ExperimentError> {
    let decoder = &engine.decoder;
    let group = decoder.nrg(first, second).map_err(ExperimentError::input)?;
    let subarray = decoder.subarray_of(first);
    let size = decoder.layout().subarray_size() as u16;
    let rows: Vec<RowAddress> = (0..size).map(|r| RowAddress(subarray * size + r)).collect();

    let mut bank = BankState::new(*geometry).map_err(ExperimentError::input)?;
    let key = mix(first.0 as u64, second.0 as u64);
    bank.init_rows(rows.iter().copied(), &DataPattern::Random(mix(seed, key)))
        .map_err(ExperimentError::input)?;
    let before = bank.clone();
    let data = BitRow::random(geometry.n_bitlines, &mut stream(seed, VERIFY_DOMAIN, key));
    engine
        .execute(
            &mut bank,
            &verify_trace(first, second, &data, regime, engine),
        )
        .map_err(ExperimentError::other)?;
    engine.precharge(&mut bank);

    let written: Vec<CellLevel> = data.iter().map(CellLevel::from_bit).collect();
    let expected: Vec<RowAddress> = match regime {
        VerifyRegime::Nominal => vec![second],
        _ => group.rows.clone(),
    };
    let mut observed = Vec::new();
    let mut others_intact = true;
    for &r in &rows {
        let cells = bank.row_cells(r);
        if cells == written {
            observed.push(r);
        } else if cells != before.row_cells(r) {
            others_intact = false;
        }
    }
    Ok(VerifyRow {
        subarray,
        first: first.0,
        second: second.0,
        expected_n: expected.len(),
        observed_n: observed.len(),
        pass: others_intact && observed == expected,
    })
}

fn groups_for(engine: &Engine, seed: u64, subarray: u16, n: usize, count: usize) -> Vec<RowGroup> {
    let mut rng = stream(seed, GROUP_DOMAIN, mix(subarray as u64, n as u64));
    primitives::random_groups(engine, subarray, n, count, &mut rng)
}

pub fn run_verification(cfg: &ExperimentConfig) -> Result<Vec<VerifyRow>, ExperimentError> {
    let engine = cfg.engine(0.0);
    let mut out = Vec::new();
    for &s in &cfg.verify.subarrays {
        for &n in &cfg.verify.ns {
            for g in groups_for(&engine, cfg.seed, s, n, cfg.verify.pairs_per_n) {
                out.push(verify_pair(
                    &engine,
                    &cfg.geometry,
                    g.first,
                    g.second,
                    cfg.verify.regime,
                    cfg.seed,
                )?);
            }
        }
    }
    Ok(out)
}

fn closed_bank(cfg: &ExperimentConfig) -> Result<BankState, ExperimentError> {
    BankState::with_polarity(cfg.geometry, cfg.engine.polarity.clone())
        .map_err(|e| ExperimentError::Config(e.to_string()))
}

pub fn run_characterization(cfg: &ExperimentConfig) -> Result<SuccessRateReport, ExperimentError> {
    let c = &cfg.characterize;
    let engine = cfg.engine(c.variation_sigma);
    let bank = closed_bank(cfg)?;
    let mut groups = Vec::new();
    for &s in &c.subarrays {
        for &n in &c.ns {
            groups.extend(groups_for(&engine, cfg.seed, s, n, c.nrgs_per_n));
        }
    }
    primitives::characterize(
        &engine,
        &bank,
        &groups,
        &c.ms,
        &c.patterns,
        c.trials,
        cfg.seed,
    )
    .map_err(ExperimentError::other)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpatialRow {
    pub subarray: u16,
    pub sigma: f64,
    pub m: usize,
    pub n: usize,
    pub nrgs: usize,
    pub mean_success_rate: f64,
}

impl SpatialRow {
    pub const CSV_HEADER: &'static str = "subarray,sigma,m,n,nrgs,mean_success_rate";

    pub fn to_csv(rows: &[Self]) -> String {
        csv_lines(
            Self::CSV_HEADER,
            rows.iter().map(|r| {
                format!(
                    "{},{:.6},{},{},{},{:.6}",
                    r.subarray, r.sigma, r.m, r.n, r.nrgs, r.mean_success_rate
                )
            }),
        )
    }
}

/// Mean MAJ success rate of random groups in each subarray, with cell
/// variation following the configured profile.
pub fn run_spatial_profile(cfg: &ExperimentConfig) -> Result<Vec<SpatialRow>, ExperimentError> {
    let sp = &cfg.spatial;
    if sp.n_subarrays as usize > cfg.geometry.n_subarrays {
        return Err(ExperimentError::Config(format!(
            "spatial.n_subarrays {} exceeds the bank's {} subarrays",
            sp.n_subarrays, cfg.geometry.n_subarrays
        )));
    }
    let bank = closed_bank(cfg)?;
    let mut out = Vec::new();
    for s in 0..sp.n_subarrays {
        let sigma = sp.sigma(s);
        let engine = cfg.engine(sigma);
        for &n in &sp.ns {
            if n < sp.m {
                continue;
            }
            let groups = groups_for(&engine, cfg.seed, s, n, sp.nrgs_per_n);
            let report = primitives::characterize(
                &engine,
                &bank,
                &groups,
                &[sp.m],
                &[InputPattern::Random],
                sp.trials,
                cfg.seed,
            )
            .map_err(ExperimentError::other)?;
            out.push(SpatialRow {
                subarray: s,
                sigma,
                m: sp.m,
                n,
                nrgs: groups.len(),
                mean_success_rate: report.mean(|_| true).unwrap_or(0.0),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub kernel: Kernel,
    pub scenario: PerfScenario,
    pub baseline_scenario: PerfScenario,
    pub arity: usize,
    pub n: usize,
    pub maj_ops: u64,
    pub modeled_time_ns: f64,
    pub speedup: f64,
}

impl SensitivityRow {
    pub const CSV_HEADER: &'static str =
        "kernel,scenario,baseline_scenario,arity,n,maj_ops,modeled_time_ns,speedup";

    pub fn to_csv(rows: &[Self]) -> String {
        csv_lines(
            Self::CSV_HEADER,
            rows.iter().map(|r| {
                format!(
                    "{},{},{},{},{},{},{:.4},{:.6}",
                    r.kernel,
                    r.scenario,
                    r.baseline_scenario,
                    r.arity,
                    r.n,
                    r.maj_ops,
                    r.modeled_time_ns,
                    r.speedup
                )
            }),
        )
    }
}

/// Speedup of every kernel over the MAJ3/four-row reference across
/// scenario, arity and row count. Arities that do not fit `n` are skipped.
pub fn run_sensitivity(cfg: &ExperimentConfig) -> Result<Vec<SensitivityRow>, ExperimentError> {
    let model = cfg.perf_model();
    let sc = &cfg.sensitivity;
    let mut out = Vec::new();
    for &kernel in &sc.kernels {
        for &arity in &sc.arities {
            let counts = count_ops(kernel, arity, None);
            for &scenario in &sc.scenarios {
                let base = model
                    .baseline_time(kernel, scenario.baseline())
                    .map_err(|e| ExperimentError::Config(e.to_string()))?;
                for &n in &sc.ns {
                    if arity > n {
                        continue;
                    }
                    let Ok(t) = model.model_time(&counts, scenario, Some(n)) else {
                        continue;
                    };
                    out.push(SensitivityRow {
                        kernel,
                        scenario,
                        baseline_scenario: scenario.baseline(),
                        arity,
                        n,
                        maj_ops: counts.total(),
                        modeled_time_ns: t,
                        speedup: base / t,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComputeBackend {
    /// Exact host-side majority.
    Logic,
    /// Every majority executed as command traces on a simulated bank.
    Dram,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComputeRequest {
    pub kernel: Kernel,
    pub arity: usize,
    /// Row count for the model; the cheapest per arity when absent.
    pub n: Option<usize>,
    pub scenario: PerfScenario,
    pub elements: usize,
    pub backend: ComputeBackend,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComputeResult {
    pub request: ComputeRequest,
    /// SHA-256 of the little-endian result words.
    pub result_digest: String,
    pub op_counts: MajOpCount,
    pub modeled_time_ns: f64,
    pub speedup_vs_fracdram: f64,
    /// Elements that differ from host arithmetic.
    pub mismatches: usize,
}

fn host_result(kernel: Kernel, a: u32, b: u32) -> u32 {
    match kernel {
        Kernel::And => (a == u32::MAX) as u32,
        Kernel::Or => (a != 0) as u32,
        Kernel::Xor => a.count_ones() % 2,
        Kernel::Add => a.wrapping_add(b),
        Kernel::Sub => a.wrapping_sub(b),
        Kernel::Mul => a.wrapping_mul(b),
        Kernel::Div => a.checked_div(b).unwrap_or(u32::MAX),
    }
}

fn run_kernel<B: MajBackend>(
    backend: B,
    req: &ComputeRequest,
    a: &BitColumnMatrix,
    b: &BitColumnMatrix,
) -> Result<(Vec<u32>, MajOpCount), ExperimentError> {
    let mut c = Compute::new(backend, req.elements, req.arity);
    let out = req
        .kernel
        .run(&mut c, a, b)
        .map_err(ExperimentError::other)?;
    Ok((out.to_u32(), c.counts().clone()))
}

/// Runs one kernel on random operands and models its latency. With the
/// logic backend any disagreement with host arithmetic is an invariant
/// violation; with the DRAM backend it is reported as `mismatches`.
pub fn run_compute(
    cfg: &ExperimentConfig,
    req: &ComputeRequest,
) -> Result<ComputeResult, ExperimentError> {
    if req.arity < 3 || req.arity.is_multiple_of(2) {
        return Err(ExperimentError::Input(format!(
            "arity {} must be odd and at least 3",
            req.arity
        )));
    }
    if req.elements == 0 {
        return Err(ExperimentError::Input("elements must be positive".into()));
    }
    if let Some(n) = req.n {
        primitives::replication_layout(req.arity, n).map_err(ExperimentError::input)?;
    }
    let mut rng = stream(cfg.seed, OPERAND_DOMAIN, req.kernel as u64);
    let av: Vec<u32> = (0..req.elements).map(|_| rng.random()).collect();
    // small divisors keep quotients interesting; zero is included
    let bv: Vec<u32> = (0..req.elements)
        .map(|_| match req.kernel {
            Kernel::Div => rng.random_range(0..1u32 << 12),
            _ => rng.random(),
        })
        .collect();
    let (a, b) = (
        BitColumnMatrix::from_u32(&av),
        BitColumnMatrix::from_u32(&bv),
    );

    let (result, counts) = match req.backend {
        ComputeBackend::Logic => run_kernel(LogicBackend, req, &a, &b)?,
        ComputeBackend::Dram => {
            let n = req
                .n
                .unwrap_or_else(|| req.arity.next_power_of_two().max(4));
            let geometry = Geometry {
                n_bitlines: req.elements,
                ..cfg.geometry
            };
            let mut engine = cfg.engine(cfg.analog.variation_sigma);
            engine.variation =
                crate::analog::VariationSample::new(&engine.analog, cfg.seed, req.elements);
            let group = groups_for(&engine, cfg.seed, 0, n, 1)
                .pop()
                .ok_or_else(|| ExperimentError::Input(format!("no {n}-row group")))?;
            let bank = BankState::with_polarity(geometry, cfg.engine.polarity.clone())
                .map_err(ExperimentError::input)?;
            run_kernel(DramBackend::new(engine, bank, group), req, &a, &b)?
        }
    };
    let mismatches = (0..req.elements)
        .filter(|&i| result[i] != host_result(req.kernel, av[i], bv[i]))
        .count();
    if mismatches > 0 && req.backend == ComputeBackend::Logic {
        return Err(ExperimentError::Invariant(format!(
            "{} of {} elements differ from host arithmetic",
            mismatches, req.elements
        )));
    }
    let mut h = Sha256::new();
    for v in &result {
        h.update(v.to_le_bytes());
    }
    let model = cfg.perf_model();
    let modeled_time_ns = model
        .model_time(&counts, req.scenario, req.n)
        .map_err(|e| ExperimentError::Input(e.to_string()))?;
    let speedup_vs_fracdram = model
        .baseline_time(req.kernel, req.scenario.baseline())
        .map_err(|e| ExperimentError::Input(e.to_string()))?
        / modeled_time_ns;
    Ok(ComputeResult {
        request: req.clone(),
        result_digest: hex::encode(h.finalize()),
        op_counts: counts,
        modeled_time_ns,
        speedup_vs_fracdram,
        mismatches,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DestructBaseline {
    RowClone,
    Frac,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DestructResult {
    pub max_n: usize,
    pub steps: usize,
    pub modeled_time_ns: f64,
    pub speedup: f64,
    pub baseline: PlanComparison,
    /// Every max_n in the config against the same baseline.
    pub sweep: Vec<PlanComparison>,
    /// Rows still holding their original content after execution, when run.
    pub surviving_rows: Option<usize>,
}

/// Plans destruction with `max_n`, compares it to `baseline` and optionally
/// executes it on a randomly initialized bank. The plan is returned for
/// trace export.
pub fn run_destruct(
    cfg: &ExperimentConfig,
    max_n: usize,
    baseline: DestructBaseline,
    execute: bool,
) -> Result<(DestructResult, DestructionPlan), ExperimentError> {
    let engine = cfg.engine(0.0);
    let (dec, g, t) = (&engine.decoder, &cfg.geometry, &cfg.timing);
    let base = match baseline {
        DestructBaseline::RowClone => destruct::plan_rowclone(dec, g, t),
        DestructBaseline::Frac => destruct::plan_frac(dec, g, t),
    }
    .map_err(ExperimentError::input)?;
    let plan = destruct::plan_many_row(dec, g, t, max_n).map_err(ExperimentError::input)?;
    let mut sweep_plans = Vec::new();
    for &n in &cfg.destruct.max_n {
        sweep_plans.push(destruct::plan_many_row(dec, g, t, n).map_err(ExperimentError::input)?);
    }
    let sweep = destruct::compare(&sweep_plans.iter().collect::<Vec<_>>(), &base);
    let cmp = destruct::compare(&[&plan, &base], &base);

    let surviving_rows = if execute {
        let mut bank = closed_bank(cfg)?;
        let all: Vec<RowAddress> = (0..g.rows() as u32).map(|r| RowAddress(r as u16)).collect();
        let seed = stream(cfg.seed, BANK_DOMAIN, 0).random();
        bank.init_rows(all.iter().copied(), &DataPattern::Random(seed))
            .map_err(ExperimentError::other)?;
        let before = bank.clone();
        let pattern = BitRow::alternating(g.n_bitlines);
        plan.execute(&engine, &mut bank, &pattern)
            .map_err(ExperimentError::other)?;
        engine.precharge(&mut bank);
        let left = all
            .iter()
            .filter(|&&r| bank.row_cells(r) == before.row_cells(r))
            .count();
        if left > 0 {
            return Err(ExperimentError::Invariant(format!(
                "{left} rows kept their content"
            )));
        }
        Some(left)
    } else {
        None
    };
    Ok((
        DestructResult {
            max_n,
            steps: cmp[0].steps,
            modeled_time_ns: cmp[0].modeled_time_ns,
            speedup: cmp[0].speedup,
            baseline: cmp[1].clone(),
            sweep,
            surviving_rows,
        },
        plan,
    ))
}

impl From<EngineError> for ExperimentError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::MalformedTrace { .. }
            | EngineError::UndefinedTimingRegime { .. }
            | EngineError::WriteWhileClosed { .. }
            | EngineError::ReadWhileClosed { .. }
            | EngineError::ActWhileOpen { .. }
            | EngineError::Decoder(_)
            | EngineError::Bank(_) => Self::Input(e.to_string()),
            _ => Self::Other(e.to_string()),
        }
    }
}
