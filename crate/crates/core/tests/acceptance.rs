//! End-to-end acceptance checks. Runs without the libtest harness and prints
//! one PASS/FAIL line per criterion; exits non-zero if any fails.

use std::collections::BTreeMap;
use std::time::Instant;

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use manyrow::analog::{self, count_correct, AnalogParams, VariationSample};
use manyrow::bank::{BankState, CellLevel, DataPattern, Geometry};
use manyrow::bits::{majority, BitRow};
use manyrow::bitserial::{
    count_ops, BitColumnMatrix, Compute, FullAdderMode, Kernel, LogicBackend, PerfModel,
    PerfScenario, Signal,
};
use manyrow::cli::{self, Cli};
use manyrow::decoder::{RowAddress, RowDecoder, RowGroup};
use manyrow::destruct::{self, PlanMethod};
use manyrow::engine::{Engine, TimingParams};
use manyrow::experiments::{self, ExperimentConfig};
use manyrow::primitives::{self, InputPattern, MajTrialModel};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn geometry(n_subarrays: usize, n_bitlines: usize) -> Geometry {
    Geometry {
        n_subarrays,
        subarray_size: 512,
        n_bitlines,
    }
}

fn group_of(engine: &Engine, n: usize, seed: u64) -> RowGroup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    primitives::random_groups(engine, 0, n, 1, &mut rng)
        .pop()
        .expect("group")
}

fn c1_decoder() -> Outcome {
    let d = RowDecoder::default();
    let n = |a, b| d.nrg(RowAddress(a), RowAddress(b)).unwrap().n();
    let four: Vec<u16> = d
        .nrg(RowAddress(0), RowAddress(7))
        .unwrap()
        .rows
        .iter()
        .map(|r| r.0)
        .collect();
    let groups = d.differing_groups(RowAddress(0), RowAddress(7));
    check(
        n(256, 287) == 8 && n(127, 128) == 32 && four == [0, 1, 6, 7] && groups == 2,
        format!(
            "nrg(256,287)={} nrg(127,128)={} nrg(0,7)={four:?}",
            n(256, 287),
            n(127, 128)
        ),
    )
}

fn c2_census() -> Outcome {
    let d = RowDecoder::default();
    let census = d.nrg_census();
    // brute force: materialize every group by its row set
    let mut brute: BTreeMap<usize, u64> = BTreeMap::new();
    for a in 0..512u16 {
        for b in 0..512u16 {
            if a != b {
                let mut rows = vec![0u16];
                for (shift, width) in [(0u16, 1u16), (1, 2), (3, 2), (5, 2), (7, 2)] {
                    let m = ((1 << width) - 1) << shift;
                    let mut v = vec![a & m, b & m];
                    v.dedup();
                    rows = rows
                        .iter()
                        .flat_map(|r| v.iter().map(move |x| r | x))
                        .collect();
                }
                *brute.entry(rows.len()).or_default() += 1;
            }
        }
    }
    check(
        census.counts == brute && census.total_pairs == 512 * 511,
        format!("{:?}", census.counts),
    )
}

fn c3_majority_algebra() -> Outcome {
    let mut checked = 0;
    for m in [3usize, 5, 7, 9] {
        let nb = 1 << m;
        let inputs: Vec<BitRow> = (0..m)
            .map(|j| BitRow::from_fn(nb, |c| (c >> j) & 1 == 1))
            .collect();
        let refs: Vec<&BitRow> = inputs.iter().collect();
        let expected = majority(&refs);
        let engine = Engine::nominal(nb);
        for n in [4usize, 8, 16, 32] {
            if n < m {
                continue;
            }
            for g in 0..3 {
                let group = group_of(&engine, n, (m * 100 + n * 10 + g) as u64);
                let mut bank = BankState::new(geometry(1, nb)).unwrap();
                let r = primitives::maj(&engine, &mut bank, &group, &inputs)
                    .map_err(|e| e.to_string())?;
                if r.bits != expected {
                    return Err(format!("MAJ{m} on {n} rows differs"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} (m, n, group) cases, all 2^m input combinations each"
    ))
}

fn c4_deviation() -> Outcome {
    let params = AnalogParams::default();
    let v = params.vdd;
    // MAJ3(1,1,0) replicated into 32 rows: 10 copies each plus 2 neutral rows
    let mut big = vec![(v, 1.0); 20];
    big.extend([(0.0, 1.0); 10]);
    big.extend([(v / 2.0, 1.0); 2]);
    let small = [(v, 1.0), (v, 1.0), (0.0, 1.0), (v / 2.0, 1.0)];
    let ratio = analog::charge_share(&big, &params) / analog::charge_share(&small, &params);
    check((ratio - 2.5905).abs() <= 0.01, format!("ratio {ratio:.4}"))
}

/// Fraction of bitlines that sense the majority in every trial, for the
/// fixed input (ones, ones, zeros) or its m-input analogue.
fn fixed_input_rate(m: usize, n: usize, sigma: f64, nb: usize, trials: u32, seed: u64) -> f64 {
    let engine =
        Engine::nominal(nb).with_variation(AnalogParams::default().with_variation(sigma), seed);
    let bank = BankState::new(geometry(1, nb)).unwrap();
    let group = group_of(&engine, n, 17);
    let model = MajTrialModel::new(&engine, &bank, &group, m).unwrap();
    let inputs: Vec<BitRow> = (0..m).map(|j| BitRow::splat(nb, j <= m / 2)).collect();
    let correct = count_correct(nb, trials, |t| model.sense(&inputs, t));
    correct.iter().filter(|&&c| c == trials).count() as f64 / nb as f64
}

fn c5_variation_trend() -> Outcome {
    let r = |n, s| fixed_input_rate(3, n, s, 4096, 10_000, 2024);
    let drop4 = r(4, 0.0) - r(4, 0.4);
    let drop32 = r(32, 0.0) - r(32, 0.4);
    check(
        drop4 >= 0.30 && drop4 >= 10.0 * drop32,
        format!(
            "4-row drop {:.2} points, 32-row drop {:.2} points",
            100.0 * drop4,
            100.0 * drop32
        ),
    )
}

fn c6_monotonicity() -> Outcome {
    let sigmas = [0.0, 0.1, 0.2, 0.3, 0.4];
    let mut rate: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for (si, &s) in sigmas.iter().enumerate() {
        let mut cfg = ExperimentConfig::default();
        cfg.geometry.n_bitlines = 512;
        cfg.characterize.nrgs_per_n = 10;
        cfg.characterize.trials = 300;
        cfg.characterize.patterns = vec![InputPattern::Random];
        cfg.characterize.variation_sigma = s;
        let report = experiments::run_characterization(&cfg).map_err(|e| e.to_string())?;
        let mut sums: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
        for r in &report.rows {
            let e = sums.entry((r.m, r.n)).or_default();
            e.0 += r.success_rate;
            e.1 += 1;
        }
        for ((m, n), (sum, k)) in sums {
            rate.insert((m, n, si), sum / k as f64);
        }
    }
    let mut bad = Vec::new();
    for (&(m, n, si), &r) in &rate {
        if si > 0 && r > rate[&(m, n, si - 1)] {
            bad.push(format!("sigma MAJ{m}/{n} at {}", sigmas[si]));
        }
        if let Some(&wider) = rate.get(&(m, 2 * n, si)) {
            if wider < r {
                bad.push(format!(
                    "n MAJ{m}/{n} at {} ({r:.4} -> {wider:.4})",
                    sigmas[si]
                ));
            }
        }
        if let Some(&more) = rate.get(&(m + 2, n, si)) {
            if more > r {
                bad.push(format!(
                    "m MAJ{m}/{n} at {} ({r:.4} -> {more:.4})",
                    sigmas[si]
                ));
            }
        }
    }
    let at = |m, n| rate[&(m, n, 2)];
    check(
        bad.is_empty(),
        format!(
            "{} grid points; sigma 0.2: MAJ3/4 {:.3} MAJ3/32 {:.3} MAJ9/32 {:.3}; violations {bad:?}",
            rate.len(),
            at(3, 4),
            at(3, 32),
            at(9, 32)
        ),
    )
}

fn c7_copy_and_bulk_write() -> Outcome {
    let nb = 256;
    let engine = Engine::nominal(nb);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut cases = 0;
    for n in [2usize, 4, 8, 16, 32] {
        for _ in 0..100 {
            let group = primitives::random_groups(&engine, 0, n, 1, &mut rng)
                .pop()
                .unwrap();
            let mut bank = BankState::new(geometry(1, nb)).unwrap();
            bank.init_rows(
                group.rows.iter().copied(),
                &DataPattern::Random(rng.random()),
            )
            .unwrap();
            let src = bank.row_bits(group.first).unwrap();
            primitives::multi_row_clone(&engine, &mut bank, group.first, &group)
                .map_err(|e| e.to_string())?;
            engine.precharge(&mut bank);
            let data = BitRow::random(nb, &mut rng);
            let copied = group.rows.iter().all(|&r| bank.row_bits(r).unwrap() == src);
            primitives::bulk_write(&engine, &mut bank, &group, &data).map_err(|e| e.to_string())?;
            engine.precharge(&mut bank);
            let written = group
                .rows
                .iter()
                .all(|&r| bank.row_bits(r).unwrap() == data);
            if !(copied && written) {
                return Err(format!("n={n}: copy {copied}, write {written}"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} random patterns"))
}

fn c8_arithmetic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let k = 10_000;
    let a: Vec<u32> = (0..k).map(|_| rng.random()).collect();
    let b: Vec<u32> = (0..k)
        .map(|i| {
            if i % 3 == 0 {
                rng.random_range(0..1 << 10)
            } else {
                rng.random()
            }
        })
        .collect();
    let (ma, mb) = (BitColumnMatrix::from_u32(&a), BitColumnMatrix::from_u32(&b));
    for arity in [3usize, 5] {
        let mut c = Compute::new(LogicBackend, k, arity);
        let add = c.add(&ma, &mb).unwrap().to_u32();
        let sub = c.sub(&ma, &mb).unwrap().to_u32();
        let mul = c.mul(&ma, &mb).unwrap().to_u32();
        let div = c.div(&ma, &mb).unwrap().0.to_u32();
        for i in 0..k {
            let ok = add[i] == a[i].wrapping_add(b[i])
                && sub[i] == a[i].wrapping_sub(b[i])
                && mul[i] == a[i].wrapping_mul(b[i])
                && div[i] == a[i].checked_div(b[i]).unwrap_or(u32::MAX);
            if !ok {
                return Err(format!("MAJ{arity} element {i}: {} op {}", a[i], b[i]));
            }
        }
    }
    let combos: Vec<Signal> = (0..3)
        .map(|j| Signal::new(BitRow::from_fn(8, |c| (c >> j) & 1 == 1)))
        .collect();
    for mode in [FullAdderMode::Maj5, FullAdderMode::Maj3Only] {
        let mut c = Compute::new(LogicBackend, 8, 5).with_full_adder(mode);
        let (s, co) = c.full_adder(&combos[0], &combos[1], &combos[2]).unwrap();
        for col in 0..8usize {
            if s.pos.get(col) != (col.count_ones() % 2 == 1)
                || co.pos.get(col) != (col.count_ones() >= 2)
            {
                return Err(format!("{mode:?} full adder case {col}"));
            }
        }
    }
    let mut c = Compute::new(LogicBackend, 4, 3);
    let x = c
        .xor(
            &Signal::new(BitRow::from_bools(&[false, true, false, true])),
            &Signal::new(BitRow::from_bools(&[false, false, true, true])),
        )
        .unwrap();
    check(
        x.pos == BitRow::from_bools(&[false, true, true, false]),
        format!("{k} pairs x 2 arities, both adder modes, XOR table"),
    )
}

fn c9_perf_model() -> Outcome {
    let model = PerfModel::default();
    let avg = |arity, sc| {
        Kernel::LOGIC
            .iter()
            .map(|&k| model.speedup(k, arity, sc, None).unwrap())
            .sum::<f64>()
            / 3.0
    };
    let (s5, s7, s9) = (
        avg(5, PerfScenario::EqualLatency),
        avg(7, PerfScenario::EqualLatency),
        avg(9, PerfScenario::EqualLatency),
    );
    let real9 = avg(9, PerfScenario::RealExp);
    let ops: Vec<u64> = [3, 5, 7, 9]
        .iter()
        .map(|&a| count_ops(Kernel::And, a, None).total())
        .collect();
    check(
        s9 > s7 && s7 > s5 && s5 > 1.0 && real9 < 1.0,
        format!("equal-latency MAJ5 {s5:.2}x MAJ7 {s7:.2}x MAJ9 {s9:.2}x; RealExp MAJ9 {real9:.2}x; AND ops {ops:?}"),
    )
}

fn c10_destruction() -> Outcome {
    let dec = RowDecoder::default();
    let t = TimingParams::default();
    let g = geometry(2, 64);
    let engine = Engine::nominal(g.n_bitlines);
    let rc = destruct::plan_rowclone(&dec, &g, &t).unwrap();
    let mut plans = vec![rc.clone(), destruct::plan_frac(&dec, &g, &t).unwrap()];
    for n in [2, 4, 8, 16, 32] {
        plans.push(destruct::plan_many_row(&dec, &g, &t, n).unwrap());
    }
    let pattern = BitRow::alternating(g.n_bitlines);
    for plan in &plans {
        let mut bank = BankState::new(g).unwrap();
        let all: Vec<RowAddress> = (0..g.rows() as u16).map(RowAddress).collect();
        bank.init_rows(all.iter().copied(), &DataPattern::Random(99))
            .unwrap();
        let before = bank.clone();
        plan.execute(&engine, &mut bank, &pattern)
            .map_err(|e| e.to_string())?;
        engine.precharge(&mut bank);
        let kept = all
            .iter()
            .filter(|&&r| bank.row_cells(r) == before.row_cells(r))
            .count();
        let neutral = all
            .iter()
            .filter(|&&r| bank.row_cells(r).iter().all(|c| *c == CellLevel::Neutral))
            .count();
        if kept > 0 || (plan.method == PlanMethod::Frac && neutral != all.len()) {
            return Err(format!("{}: {kept} rows kept content", plan.method));
        }
    }
    let speedups: Vec<f64> = plans[2..]
        .iter()
        .map(|p| rc.modeled_time_ns / p.modeled_time_ns)
        .collect();
    let increasing = speedups.windows(2).all(|w| w[1] > w[0]);
    let p32 = &plans[6];
    let s32 = speedups[4];
    let frac = plans[1].modeled_time_ns / p32.modeled_time_ns;
    check(
        increasing && p32.steps.len() * 8 <= rc.steps.len() && s32 >= 8.0,
        format!(
            "steps {} vs {}; speedup by max_n {:?}; vs Frac {frac:.2}x",
            p32.steps.len(),
            rc.steps.len(),
            speedups
                .iter()
                .map(|s| format!("{s:.2}"))
                .collect::<Vec<_>>()
        ),
    )
}

fn c11_reproducibility() -> Outcome {
    let dir = std::env::temp_dir().join(format!("manyrow-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let cfg_path = dir.join("small.toml");
    std::fs::write(
        &cfg_path,
        "seed = 5\n[geometry]\nn_subarrays = 4\nn_bitlines = 128\n\
         [characterize]\nnrgs_per_n = 2\ntrials = 100\n\
         [spatial]\nn_subarrays = 4\nnrgs_per_n = 2\ntrials = 50\n\
         [verify]\npairs_per_n = 2\n",
    )
    .map_err(|e| e.to_string())?;
    let cfg = cfg_path.to_str().unwrap();
    let commands: [&[&str]; 8] = [
        &["census"],
        &["verify"],
        &["characterize"],
        &["spatial"],
        &["sensitivity"],
        &[
            "compute",
            "--kernel",
            "mul",
            "--arity",
            "5",
            "--elements",
            "512",
        ],
        &["destruct", "--max-n", "16", "--execute"],
        &["maj", "--m", "5", "--first", "0", "--second", "511"],
    ];
    for args in commands {
        let render = || {
            let argv: Vec<&str> = ["manyrow", "--config", cfg]
                .iter()
                .chain(args.iter())
                .copied()
                .collect();
            let cli = Cli::try_parse_from(argv).map_err(|e| e.to_string())?;
            let (c, report, failure) = cli::run(&cli).map_err(|e| e.to_string())?;
            if let Some(f) = failure {
                return Err(f.to_string());
            }
            Ok::<_, String>(report.render(&c))
        };
        if render()? != render()? {
            return Err(format!("{args:?} differs between runs"));
        }
    }
    // same check for a Monte Carlo success-rate sweep with dynamic variation
    let params = AnalogParams {
        static_variation: false,
        ..AnalogParams::default().with_variation(0.3)
    };
    let v1 = VariationSample::new(&params, 3, 64).cap_multipliers(5, 9);
    let v2 = VariationSample::new(&params, 3, 64).cap_multipliers(5, 9);
    std::fs::remove_dir_all(&dir).ok();
    check(
        v1 == v2,
        format!("{} commands byte-identical", commands.len()),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("decoder walkthroughs", c1_decoder),
        ("NRG census vs brute force", c2_census),
        ("majority algebra", c3_majority_algebra),
        ("deviation calibration", c4_deviation),
        ("variation trend", c5_variation_trend),
        ("monotonicity suite", c6_monotonicity),
        ("Multi-RowCopy / Bulk-Write", c7_copy_and_bulk_write),
        ("arithmetic oracle", c8_arithmetic),
        ("performance model", c9_perf_model),
        ("content destruction", c10_destruction),
        ("reproducibility", c11_reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name} ({secs:.1}s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1}s): {d}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
