//! One replicated MAJ per arity on a 32-row group, with and without cell
//! variation.

use manyrow::analog::AnalogParams;
use manyrow::bank::{BankState, Geometry};
use manyrow::bits::{majority, BitRow};
use manyrow::decoder::RowAddress;
use manyrow::engine::Engine;
use manyrow::primitives;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let nb = 1024;
    let geometry = Geometry {
        n_subarrays: 1,
        subarray_size: 512,
        n_bitlines: nb,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for sigma in [0.0, 0.2] {
        let engine =
            Engine::nominal(nb).with_variation(AnalogParams::default().with_variation(sigma), 3);
        let group = engine
            .decoder
            .nrg(RowAddress(127), RowAddress(128))
            .unwrap();
        for m in [3, 5, 7, 9] {
            let layout = primitives::replication_layout(m, group.n()).unwrap();
            let inputs: Vec<BitRow> = (0..m).map(|_| BitRow::random(nb, &mut rng)).collect();
            let mut bank = BankState::new(geometry).unwrap();
            let r = primitives::maj(&engine, &mut bank, &group, &inputs).unwrap();
            let refs: Vec<&BitRow> = inputs.iter().collect();
            let wrong = r.bits.xor(&majority(&refs)).count_ones();
            println!(
                "sigma {sigma}: MAJ{m} x{} copies + {} neutral, {wrong} wrong bitlines, success {:.3}",
                layout.copies,
                layout.neutrals,
                r.success_rate()
            );
        }
    }
}
