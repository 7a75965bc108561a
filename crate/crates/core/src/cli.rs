//! Command-line front end. The `manyrow` binary only calls [`main`].

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analog::VariationSample;
use crate::bank::BankState;
use crate::bits::BitRow;
use crate::bitserial::{Kernel, PerfScenario};
use crate::decoder::RowAddress;
use crate::engine::CommandTrace;
use crate::experiments::{
    self, ComputeBackend, ComputeRequest, DestructBaseline, ExperimentConfig, ExperimentError,
    Report, SensitivityRow, SpatialRow, VerifyRegime, VerifyRow,
};
use crate::primitives;

#[derive(Debug, Parser)]
#[command(
    name = "manyrow",
    version,
    about = "Many-row activation DRAM simulator and experiments"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML experiment configuration; built-in defaults otherwise.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report destination; stdout otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Full-scale sweeps (three subarrays, 10^4 trials).
    #[arg(long, global = true)]
    pub full: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decode a row address, or the group two anchors open.
    Decode { address: u16, second: Option<u16> },
    /// Replay a command trace file.
    Exec {
        trace: PathBuf,
        /// Start from a bank dump instead of an all-zero bank.
        #[arg(long)]
        bank: Option<PathBuf>,
        /// Write the final bank as a dump.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Group-size histogram over all anchor pairs of a subarray.
    Census,
    /// Initialize, APA, WRITE and read back, for random or given anchors.
    Verify {
        #[arg(long, requires = "second")]
        first: Option<u16>,
        #[arg(long)]
        second: Option<u16>,
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
    },
    /// One replicated MAJ on the group opened by two anchors.
    Maj {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        first: u16,
        #[arg(long)]
        second: u16,
        /// Comma-separated hex rows, one per input; random otherwise.
        #[arg(long, value_delimiter = ',')]
        inputs: Vec<String>,
    },
    /// Success rates over random groups, arities and data patterns.
    Characterize,
    /// Mean success rate per subarray under the configured variation profile.
    Spatial,
    /// Run a bit-serial kernel on random operands and model its latency.
    Compute {
        #[arg(long)]
        kernel: Kernel,
        #[arg(long, default_value_t = 3)]
        arity: usize,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = PerfScenario::RealExp)]
        scenario: PerfScenario,
        #[arg(long, default_value_t = 65536)]
        elements: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Logic)]
        backend: BackendArg,
    },
    /// Speedup grid across scenarios, arities and row counts.
    Sensitivity,
    /// Plan bank-wide content destruction and compare to a baseline.
    Destruct {
        #[arg(long, default_value_t = 32)]
        max_n: usize,
        #[arg(long, value_enum, default_value_t = BaselineArg::Rowclone)]
        baseline: BaselineArg,
        /// Run the plan on a randomly initialized bank and check every row.
        #[arg(long)]
        execute: bool,
        /// Write the plan as a trace file for `exec`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RegimeArg {
    ChargeShare,
    Mrc,
    Nominal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BackendArg {
    Logic,
    Dram,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BaselineArg {
    Rowclone,
    Frac,
}

fn load_config(g: &GlobalArgs) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if g.full {
        cfg = cfg.full();
        cfg.validate()?;
    }
    Ok(cfg)
}

fn row(cfg: &ExperimentConfig, r: u16) -> Result<RowAddress, ExperimentError> {
    if r as usize >= cfg.geometry.rows() {
        return Err(ExperimentError::Input(format!("row {r} outside the bank")));
    }
    Ok(RowAddress(r))
}

/// Runs one command. The report comes back even when it shows an invariant
/// violation, paired with the error.
pub fn run(
    cli: &Cli,
) -> Result<(ExperimentConfig, Report, Option<ExperimentError>), ExperimentError> {
    let mut cfg = load_config(&cli.global)?;
    let mut failure = None;
    let report = match &cli.command {
        Command::Decode { address, second } => {
            let engine = cfg.engine(0.0);
            let a = row(&cfg, *address)?;
            let mut v = json!({ "address": engine.decoder.decode_address(a) });
            if let Some(b) = second {
                let g = engine
                    .decoder
                    .nrg(a, row(&cfg, *b)?)
                    .map_err(ExperimentError::input)?;
                v["group"] = json!({ "n": g.n(), "rows": g.rows });
            }
            Report::json("decode", &v)
        }
        Command::Exec { trace, bank, save } => {
            let mut bank = match bank {
                Some(p) => {
                    let f = std::fs::File::open(p)?;
                    BankState::read_dump(std::io::BufReader::new(f))
                        .map_err(ExperimentError::input)?
                }
                None => BankState::with_polarity(cfg.geometry, cfg.engine.polarity.clone())
                    .map_err(|e| ExperimentError::Config(e.to_string()))?,
            };
            let text = std::fs::read_to_string(trace)?;
            let trace = CommandTrace::parse(&text, bank.n_bitlines())?;
            let mut engine = cfg.engine(cfg.analog.variation_sigma);
            engine.variation = VariationSample::new(&engine.analog, cfg.seed, bank.n_bitlines());
            let log = engine.execute(&mut bank, &trace)?;
            if let Some(p) = save {
                let f = std::fs::File::create(p)?;
                bank.write_dump(std::io::BufWriter::new(f), true)?;
            }
            let hex = |rows: &[BitRow]| rows.iter().map(BitRow::to_hex).collect::<Vec<_>>();
            Report::json(
                "exec",
                &json!({
                    "events": log.events,
                    "reads": hex(&log.reads),
                    "shared": hex(&log.shared),
                    "open_rows": bank.open_rows(),
                    "snapshot": bank.snapshot(),
                }),
            )
        }
        Command::Census => {
            let c = experiments::run_census(&cfg);
            let rows = c
                .counts
                .iter()
                .map(|(n, k)| format!("{n},{k},{:.6}", *k as f64 / c.total_pairs as f64));
            Report::csv(
                "census",
                experiments::csv_lines("n,ordered_pairs,fraction", rows),
            )
        }
        Command::Verify {
            first,
            second,
            regime,
        } => {
            if let Some(r) = regime {
                cfg.verify.regime = match r {
                    RegimeArg::ChargeShare => VerifyRegime::ChargeShare,
                    RegimeArg::Mrc => VerifyRegime::Mrc,
                    RegimeArg::Nominal => VerifyRegime::Nominal,
                };
            }
            let rows = match (first, second) {
                (Some(a), Some(b)) => vec![experiments::verify_pair(
                    &cfg.engine(0.0),
                    &cfg.geometry,
                    row(&cfg, *a)?,
                    row(&cfg, *b)?,
                    cfg.verify.regime,
                    cfg.seed,
                )?],
                _ => experiments::run_verification(&cfg)?,
            };
            let failed = rows.iter().filter(|r| !r.pass).count();
            if failed > 0 {
                failure = Some(ExperimentError::Invariant(format!(
                    "{failed} groups failed verification"
                )));
            }
            Report::csv("verify", VerifyRow::to_csv(&rows))
        }
        Command::Maj {
            m,
            first,
            second,
            inputs,
        } => {
            let engine = cfg.engine(cfg.analog.variation_sigma);
            let group = engine
                .decoder
                .nrg(row(&cfg, *first)?, row(&cfg, *second)?)
                .map_err(ExperimentError::input)?;
            let layout =
                primitives::replication_layout(*m, group.n()).map_err(ExperimentError::input)?;
            let nb = cfg.geometry.n_bitlines;
            let inputs: Vec<BitRow> = if inputs.is_empty() {
                primitives::InputPattern::Random.inputs(*m, nb, cfg.seed, 0, 0)
            } else {
                inputs
                    .iter()
                    .map(|h| {
                        BitRow::from_hex(nb, h).ok_or_else(|| {
                            ExperimentError::Input(format!("bad {nb}-bit hex row {h:?}"))
                        })
                    })
                    .collect::<Result<_, _>>()?
            };
            let mut bank = BankState::with_polarity(cfg.geometry, cfg.engine.polarity.clone())
                .map_err(|e| ExperimentError::Config(e.to_string()))?;
            let r = primitives::maj(&engine, &mut bank, &group, &inputs)
                .map_err(ExperimentError::input)?;
            let refs: Vec<&BitRow> = inputs.iter().collect();
            Report::json(
                "maj",
                &json!({
                    "rows": group.rows,
                    "layout": layout,
                    "result": r.bits.to_hex(),
                    "expected": crate::bits::majority(&refs).to_hex(),
                    "success_rate": r.success_rate(),
                }),
            )
        }
        Command::Characterize => Report::csv(
            "characterize",
            experiments::run_characterization(&cfg)?.to_csv(),
        ),
        Command::Spatial => Report::csv(
            "spatial",
            SpatialRow::to_csv(&experiments::run_spatial_profile(&cfg)?),
        ),
        Command::Compute {
            kernel,
            arity,
            n,
            scenario,
            elements,
            backend,
        } => {
            let req = ComputeRequest {
                kernel: *kernel,
                arity: *arity,
                n: *n,
                scenario: *scenario,
                elements: *elements,
                backend: match backend {
                    BackendArg::Logic => ComputeBackend::Logic,
                    BackendArg::Dram => ComputeBackend::Dram,
                },
            };
            Report::json("compute", &experiments::run_compute(&cfg, &req)?)
        }
        Command::Sensitivity => Report::csv(
            "sensitivity",
            SensitivityRow::to_csv(&experiments::run_sensitivity(&cfg)?),
        ),
        Command::Destruct {
            max_n,
            baseline,
            execute,
            trace,
        } => {
            let baseline = match baseline {
                BaselineArg::Rowclone => DestructBaseline::RowClone,
                BaselineArg::Frac => DestructBaseline::Frac,
            };
            let (result, plan) = experiments::run_destruct(&cfg, *max_n, baseline, *execute)?;
            if let Some(p) = trace {
                let pattern = BitRow::alternating(cfg.geometry.n_bitlines);
                std::fs::write(p, plan.to_trace(&pattern, &cfg.timing).to_string())?;
            }
            Report::json("destruct", &result)
        }
    };
    Ok((cfg, report, failure))
}

/// Parses arguments, runs the command, writes the report and returns the
/// process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match run(&cli).and_then(|(cfg, report, failure)| {
        let text = report.render(&cfg);
        match &cli.global.out {
            Some(p) => std::fs::write(p, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        failure.map_or(Ok(()), Err)
    }) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("manyrow: {e}");
            e.exit_code()
        }
    }
}
