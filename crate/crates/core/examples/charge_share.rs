//! Bitline deviation of MAJ3(1,1,0) with and without input replication, and
//! the fraction of bitlines that stay correct as cell variation grows.

use manyrow::analog::{charge_share, mc_success_rate, AnalogParams};
use manyrow::bank::CellLevel;
use manyrow::bits::BitRow;

fn layout(copies: usize, neutrals: usize, n_bitlines: usize) -> Vec<Vec<CellLevel>> {
    let mut rows = Vec::new();
    for _ in 0..copies {
        for level in [CellLevel::One, CellLevel::One, CellLevel::Zero] {
            rows.push(vec![level; n_bitlines]);
        }
    }
    rows.extend(std::iter::repeat_n(
        vec![CellLevel::Neutral; n_bitlines],
        neutrals,
    ));
    rows
}

fn main() {
    let p = AnalogParams::default();
    let cells = |copies: usize, neutrals: usize| {
        let mut v = Vec::new();
        for _ in 0..copies {
            v.extend([(p.vdd, 1.0), (p.vdd, 1.0), (0.0, 1.0)]);
        }
        v.extend(std::iter::repeat_n((p.vdd / 2.0, 1.0), neutrals));
        v
    };
    let single = charge_share(&[(p.vdd, 1.0)], &p);
    for (n, copies, neutrals) in [(4, 1, 1), (8, 2, 2), (16, 5, 1), (32, 10, 2)] {
        let dev = charge_share(&cells(copies, neutrals), &p);
        println!(
            "n={n:>2} deviation {:.1} mV ({:.2}x a single row)",
            dev * 1e3,
            dev / single
        );
    }

    let nb = 2048;
    let expected = BitRow::splat(nb, true);
    for sigma in [0.0, 0.1, 0.2, 0.3, 0.4] {
        let params = AnalogParams::default().with_variation(sigma);
        let four = mc_success_rate(&layout(1, 1, nb), &expected, &params, 2000, 1, false);
        let many = mc_success_rate(&layout(10, 2, nb), &expected, &params, 2000, 1, false);
        println!(
            "variation {:>3.0}%: 4 rows {:.4}, 32 rows {:.4}",
            sigma * 100.0,
            four.success_rate(),
            many.success_rate()
        );
    }
}
