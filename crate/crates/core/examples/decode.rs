//! Decode row addresses and list the rows two anchors open together.

use manyrow::decoder::{RowAddress, RowDecoder};

fn main() {
    let dec = RowDecoder::default();
    println!("{:?}", dec.decode_address(RowAddress(300)));

    for (a, b) in [(0, 7), (256, 287), (127, 128)] {
        let g = dec.nrg(RowAddress(a), RowAddress(b)).unwrap();
        let rows: Vec<u16> = g.rows.iter().map(|r| r.0).collect();
        println!("ACT {a} PRE ACT {b}: {} rows {rows:?}", g.n());
    }

    let census = dec.nrg_census();
    for (n, count) in &census.counts {
        println!(
            "n={n:>2}  {count:>6} pairs  {:.3}",
            *count as f64 / census.total_pairs as f64
        );
    }
}
