//! Bit-serial arithmetic built only from majority operations, checked against
//! host integers, and its modeled speedup over 3-input majority.

use manyrow::bank::{BankState, Geometry};
use manyrow::bitserial::{
    count_ops, BitColumnMatrix, Compute, DramBackend, Kernel, LogicBackend, PerfModel, PerfScenario,
};
use manyrow::decoder::RowAddress;
use manyrow::engine::Engine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a: Vec<u32> = (0..256).map(|_| rng.random()).collect();
    let b: Vec<u32> = (0..256).map(|_| rng.random_range(1..1 << 12)).collect();
    let (ma, mb) = (BitColumnMatrix::from_u32(&a), BitColumnMatrix::from_u32(&b));

    for arity in [3, 5] {
        let mut c = Compute::new(LogicBackend, 256, arity);
        let sum = c.add(&ma, &mb).unwrap().to_u32();
        let prod = c.mul(&ma, &mb).unwrap().to_u32();
        let (quot, _) = c.div(&ma, &mb).unwrap();
        let ok = (0..256).all(|i| {
            sum[i] == a[i].wrapping_add(b[i])
                && prod[i] == a[i].wrapping_mul(b[i])
                && quot.to_u32()[i] == a[i] / b[i]
        });
        println!(
            "MAJ{arity} add/mul/div match host: {ok}; ops {:?}",
            c.counts().by_arity
        );
    }

    // the same addition on simulated DRAM rows, 32-row groups
    let engine = Engine::nominal(256);
    let bank = BankState::new(Geometry {
        n_subarrays: 1,
        subarray_size: 512,
        n_bitlines: 256,
    })
    .unwrap();
    let group = engine
        .decoder
        .nrg(RowAddress(127), RowAddress(128))
        .unwrap();
    let mut c = Compute::new(DramBackend::new(engine, bank, group), 256, 5);
    let sum = c.add(&ma, &mb).unwrap().to_u32();
    println!(
        "DRAM add matches host: {}",
        (0..256).all(|i| sum[i] == a[i].wrapping_add(b[i]))
    );

    let model = PerfModel::default();
    for kernel in Kernel::ALL {
        let row: Vec<String> = [3, 5, 7, 9]
            .iter()
            .map(|&m| {
                let eq = model
                    .speedup(kernel, m, PerfScenario::EqualLatency, None)
                    .unwrap();
                let real = model
                    .speedup(kernel, m, PerfScenario::RealExp, None)
                    .unwrap();
                format!(
                    "MAJ{m} {:>4} ops {eq:.2}x/{real:.2}x",
                    count_ops(kernel, m, None).total()
                )
            })
            .collect();
        println!("{:<4} {}", kernel.to_string(), row.join("  "));
    }
}
