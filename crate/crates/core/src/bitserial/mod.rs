//! Bit-serial computation on vertically laid out operands, using nothing but
//! majority gates over regular and negated rows.

mod kernels;
mod perf;

pub use kernels::{Compute, FullAdderMode, ReduceOp};
pub use perf::{
    count_ops, Kernel, MajOpCount, PerfModel, PerfScenario, SuccessTable, BASELINE_ARITY,
    BASELINE_N,
};

use thiserror::Error;

use crate::bank::BankState;
use crate::bits::{majority, BitRow};
use crate::decoder::RowGroup;
use crate::engine::Engine;
use crate::primitives::{self, PrimitiveError};

#[derive(Debug, Error)]
pub enum BitserialError {
    #[error("MAJ{arity} exceeds the configured maximum arity {max}")]
    ArityUnavailable { arity: usize, max: usize },
    #[error("success rate of MAJ{m} on {n} rows is zero")]
    ZeroSuccessRate { m: usize, n: usize },
    #[error("no usable row count for MAJ{m}")]
    NoRowCount { m: usize },
    #[error("operands are {got} columns wide, expected {expected}")]
    WidthMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
}

/// One bit plane and its complement. NOT swaps the rails and costs nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub pos: BitRow,
    pub neg: BitRow,
}

impl Signal {
    pub fn new(pos: BitRow) -> Self {
        let neg = pos.not();
        Self { pos, neg }
    }

    pub fn constant(bit: bool, n_columns: usize) -> Self {
        Self::new(BitRow::splat(n_columns, bit))
    }

    pub fn not(&self) -> Self {
        Self {
            pos: self.neg.clone(),
            neg: self.pos.clone(),
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.neg == self.pos.not()
    }
}

/// Something that evaluates one bitwise majority over rows of equal width.
pub trait MajBackend {
    fn maj(&mut self, inputs: &[&BitRow]) -> Result<BitRow, BitserialError>;
}

/// Exact host-side majority.
#[derive(Clone, Copy, Debug, Default)]
pub struct LogicBackend;

impl MajBackend for LogicBackend {
    fn maj(&mut self, inputs: &[&BitRow]) -> Result<BitRow, BitserialError> {
        Ok(majority(inputs))
    }
}

/// Runs every majority as a replicated MAJ command sequence on a simulated
/// bank, always on the same row group.
pub struct DramBackend {
    pub engine: Engine,
    pub bank: BankState,
    pub group: RowGroup,
    pub ops: u64,
}

impl DramBackend {
    pub fn new(engine: Engine, bank: BankState, group: RowGroup) -> Self {
        Self {
            engine,
            bank,
            group,
            ops: 0,
        }
    }
}

impl MajBackend for DramBackend {
    fn maj(&mut self, inputs: &[&BitRow]) -> Result<BitRow, BitserialError> {
        let owned: Vec<BitRow> = inputs.iter().map(|r| (*r).clone()).collect();
        let result = primitives::maj(&self.engine, &mut self.bank, &self.group, &owned)?;
        self.ops += 1;
        Ok(result.bits)
    }
}

/// Vertical layout: element `c` of every operand lives in column `c`, and
/// plane `i` holds bit `i` of all elements. Every plane has a stored
/// complement.
#[derive(Clone, Debug, PartialEq)]
pub struct BitColumnMatrix {
    pub width: usize,
    pub n_columns: usize,
    pub planes: Vec<BitRow>,
    pub negated_planes: Vec<BitRow>,
}

impl BitColumnMatrix {
    /// Loads 32-bit elements; complements are computed on the host.
    pub fn from_u32(values: &[u32]) -> Self {
        let planes: Vec<BitRow> = (0..32)
            .map(|i| BitRow::from_fn(values.len(), |c| (values[c] >> i) & 1 == 1))
            .collect();
        let negated_planes = planes.iter().map(BitRow::not).collect();
        Self {
            width: 32,
            n_columns: values.len(),
            planes,
            negated_planes,
        }
    }

    pub fn from_signals(signals: Vec<Signal>) -> Self {
        let n_columns = signals.first().map_or(0, |s| s.pos.len());
        let (planes, negated_planes) = signals.into_iter().map(|s| (s.pos, s.neg)).unzip();
        Self {
            width: 32,
            n_columns,
            planes,
            negated_planes,
        }
        .with_width()
    }

    fn with_width(mut self) -> Self {
        self.width = self.planes.len();
        self
    }

    pub fn signals(&self) -> Vec<Signal> {
        self.planes
            .iter()
            .zip(&self.negated_planes)
            .map(|(p, n)| Signal {
                pos: p.clone(),
                neg: n.clone(),
            })
            .collect()
    }

    pub fn to_u32(&self) -> Vec<u32> {
        (0..self.n_columns)
            .map(|c| {
                self.planes
                    .iter()
                    .take(32)
                    .enumerate()
                    .fold(0u32, |acc, (i, p)| acc | ((p.get(c) as u32) << i))
            })
            .collect()
    }

    pub fn negation_consistent(&self) -> bool {
        self.planes
            .iter()
            .zip(&self.negated_planes)
            .all(|(p, n)| *n == p.not())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_roundtrip_and_negation() {
        let vals = [0u32, 1, 0xdead_beef, u32::MAX, 12345];
        let m = BitColumnMatrix::from_u32(&vals);
        assert_eq!(m.to_u32(), vals);
        assert!(m.negation_consistent());
        let back = BitColumnMatrix::from_signals(m.signals());
        assert_eq!(back, m);
    }

    #[test]
    fn signal_not_is_free_swap() {
        let s = Signal::new(BitRow::alternating(10));
        assert_eq!(s.not().pos, s.neg);
        assert!(s.not().is_consistent());
    }
}
