//! Plan the destruction of every row in a bank and compare against one-row-
//! at-a-time baselines.

use manyrow::bank::{BankState, DataPattern, Geometry};
use manyrow::bits::BitRow;
use manyrow::decoder::{RowAddress, RowDecoder};
use manyrow::destruct;
use manyrow::engine::{Engine, TimingParams};

fn main() {
    let dec = RowDecoder::default();
    let t = TimingParams::default();
    let geometry = Geometry {
        n_subarrays: 4,
        subarray_size: 512,
        n_bitlines: 64,
    };
    let rowclone = destruct::plan_rowclone(&dec, &geometry, &t).unwrap();
    let frac = destruct::plan_frac(&dec, &geometry, &t).unwrap();
    let many: Vec<_> = [2, 4, 8, 16, 32]
        .iter()
        .map(|&n| destruct::plan_many_row(&dec, &geometry, &t, n).unwrap())
        .collect();

    let mut plans = vec![&rowclone, &frac];
    plans.extend(many.iter());
    for c in destruct::compare(&plans, &rowclone) {
        println!(
            "{:<12} {:>5} steps {:>10.1} ns  {:>6.2}x",
            c.method, c.steps, c.modeled_time_ns, c.speedup
        );
    }

    let best = many.last().unwrap();
    let engine = Engine::nominal(64);
    let mut bank = BankState::new(geometry).unwrap();
    let all: Vec<RowAddress> = (0..geometry.rows() as u16).map(RowAddress).collect();
    bank.init_rows(all.iter().copied(), &DataPattern::Random(1))
        .unwrap();
    let pattern = BitRow::alternating(64);
    best.execute(&engine, &mut bank, &pattern).unwrap();
    engine.precharge(&mut bank);
    let left = all
        .iter()
        .filter(|&&r| bank.row_bits(r).unwrap() != pattern)
        .count();
    println!("{}: {left} rows left with other content", best.method);
    for s in best.steps.iter().take(4) {
        println!("  {s:?}");
    }
}
