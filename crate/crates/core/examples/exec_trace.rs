//! Replay a hand-written command trace: a nominal write, then an ACT-PRE-ACT
//! with violated timings that leaves four rows open at once.

use manyrow::bank::{BankState, Geometry};
use manyrow::engine::{CommandTrace, Engine};

const TRACE: &str = "\
0     ACT 0
13.5  WRITE ffff
35    PRE
60    ACT 7
61.5  PRE
64    ACT 0     # second anchor arrives before the first PRE completes
100   READ
110   PRE
";

fn main() {
    let geometry = Geometry {
        n_subarrays: 1,
        subarray_size: 512,
        n_bitlines: 16,
    };
    let mut bank = BankState::new(geometry).unwrap();
    let engine = Engine::nominal(16);
    let trace = CommandTrace::parse(TRACE, 16).unwrap();
    let log = engine.execute(&mut bank, &trace).unwrap();
    print!("{}", log.to_jsonl());
    for r in &log.reads {
        println!("read {}", r.to_hex());
    }
}
