//! Copy one row into a whole row group, then overwrite the group in a single
//! activation, and compare command latencies.

use manyrow::bank::{BankState, DataPattern, Geometry};
use manyrow::bits::BitRow;
use manyrow::decoder::RowAddress;
use manyrow::engine::{trace_latency, CommandDurations, Engine};
use manyrow::primitives;

fn main() {
    let geometry = Geometry {
        n_subarrays: 1,
        subarray_size: 512,
        n_bitlines: 64,
    };
    let engine = Engine::nominal(64);
    let durations = CommandDurations::from_timing(&engine.timing);
    let group = engine
        .decoder
        .nrg(RowAddress(127), RowAddress(128))
        .unwrap();

    let mut bank = BankState::new(geometry).unwrap();
    bank.init_rows(group.rows.iter().copied(), &DataPattern::Random(5))
        .unwrap();
    let src = bank.row_bits(group.first).unwrap();
    primitives::multi_row_clone(&engine, &mut bank, group.first, &group).unwrap();
    engine.precharge(&mut bank);
    let same = group
        .rows
        .iter()
        .filter(|&&r| bank.row_bits(r).unwrap() == src)
        .count();
    println!("row clone: {same}/{} rows hold {}", group.n(), src.to_hex());

    let data = BitRow::alternating(64);
    primitives::bulk_write(&engine, &mut bank, &group, &data).unwrap();
    engine.precharge(&mut bank);
    let same = group
        .rows
        .iter()
        .filter(|&&r| bank.row_bits(r).unwrap() == data)
        .count();
    println!(
        "bulk write: {same}/{} rows hold {}",
        group.n(),
        data.to_hex()
    );

    let mrc = primitives::mrc_trace(group.first, group.second, &engine.timing);
    let bw = primitives::charge_share_trace(group.first, group.second, Some(&data), &engine.timing);
    println!(
        "latency: clone {:.1} ns, bulk write {:.1} ns, {} rows each",
        trace_latency(&mrc, &durations),
        trace_latency(&bw, &durations),
        group.n()
    );
}
