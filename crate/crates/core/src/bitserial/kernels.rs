use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{BitColumnMatrix, BitserialError, MajBackend, MajOpCount, Signal};
use crate::bits::BitRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FullAdderMode {
    /// Sum = MAJ5(A, B, Cin, !Cout, !Cout).
    Maj5,
    /// Sum = MAJ3(!Cout, Cin, MAJ3(A, B, !Cin)).
    Maj3Only,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReduceOp {
    And,
    Or,
    Xor,
}

/// Dual-rail majority circuits on top of a [`MajBackend`]. Each gate
/// evaluates both rails (the complement rail through the self-duality of
/// majority) and counts as one operation of its arity.
pub struct Compute<B> {
    pub backend: B,
    n_columns: usize,
    max_arity: usize,
    fa_mode: FullAdderMode,
    counts: MajOpCount,
}

impl<B: MajBackend> Compute<B> {
    /// Full adders use MAJ5 when `max_arity` allows it.
    pub fn new(backend: B, n_columns: usize, max_arity: usize) -> Self {
        assert!(
            max_arity >= 3 && max_arity % 2 == 1,
            "arity must be odd and at least 3"
        );
        Self {
            backend,
            n_columns,
            max_arity,
            fa_mode: if max_arity >= 5 {
                FullAdderMode::Maj5
            } else {
                FullAdderMode::Maj3Only
            },
            counts: MajOpCount::default(),
        }
    }

    pub fn with_full_adder(mut self, mode: FullAdderMode) -> Self {
        self.fa_mode = mode;
        self
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    pub fn counts(&self) -> &MajOpCount {
        &self.counts
    }

    pub fn constant(&self, bit: bool) -> Signal {
        Signal::constant(bit, self.n_columns)
    }

    pub fn maj(&mut self, inputs: &[&Signal]) -> Result<Signal, BitserialError> {
        let arity = inputs.len();
        debug_assert!(arity % 2 == 1);
        if arity > self.max_arity {
            return Err(BitserialError::ArityUnavailable {
                arity,
                max: self.max_arity,
            });
        }
        if arity == 1 {
            return Ok(inputs[0].clone());
        }
        let pos: Vec<&BitRow> = inputs.iter().map(|s| &s.pos).collect();
        let neg: Vec<&BitRow> = inputs.iter().map(|s| &s.neg).collect();
        let out = Signal {
            pos: self.backend.maj(&pos)?,
            neg: self.backend.maj(&neg)?,
        };
        self.counts.record(arity);
        Ok(out)
    }

    /// MAJ over `xs` padded with `ones` constant-1 and `zeros` constant-0 rows.
    fn maj_padded(
        &mut self,
        xs: &[&Signal],
        ones: usize,
        zeros: usize,
    ) -> Result<Signal, BitserialError> {
        let one = self.constant(true);
        let zero = self.constant(false);
        let mut all: Vec<&Signal> = xs.to_vec();
        all.extend(std::iter::repeat_n(&one, ones));
        all.extend(std::iter::repeat_n(&zero, zeros));
        self.maj(&all)
    }

    /// AND (`pad` false) or OR (`pad` true) of up to (max_arity+1)/2 operands
    /// per gate, combined as a queue-ordered tree.
    fn tree(&mut self, xs: &[&Signal], pad: bool) -> Result<Signal, BitserialError> {
        assert!(!xs.is_empty());
        let per_gate = self.max_arity.div_ceil(2);
        let mut queue: VecDeque<Signal> = xs.iter().map(|s| (*s).clone()).collect();
        while queue.len() > 1 {
            let take = per_gate.min(queue.len());
            let group: Vec<Signal> = queue.drain(..take).collect();
            let refs: Vec<&Signal> = group.iter().collect();
            let (ones, zeros) = if pad { (take - 1, 0) } else { (0, take - 1) };
            let out = self.maj_padded(&refs, ones, zeros)?;
            queue.push_back(out);
        }
        Ok(queue.pop_front().expect("one left"))
    }

    pub fn and_many(&mut self, xs: &[&Signal]) -> Result<Signal, BitserialError> {
        self.tree(xs, false)
    }

    pub fn or_many(&mut self, xs: &[&Signal]) -> Result<Signal, BitserialError> {
        self.tree(xs, true)
    }

    /// MAJ3(MAJ3(A, B, 1), MAJ3(!A, !B, 1), 0).
    pub fn xor(&mut self, a: &Signal, b: &Signal) -> Result<Signal, BitserialError> {
        let or = self.maj_padded(&[a, b], 1, 0)?;
        let nand = self.maj_padded(&[&a.not(), &b.not()], 1, 0)?;
        self.maj_padded(&[&or, &nand], 0, 1)
    }

    pub fn full_adder(
        &mut self,
        a: &Signal,
        b: &Signal,
        cin: &Signal,
    ) -> Result<(Signal, Signal), BitserialError> {
        let cout = self.maj(&[a, b, cin])?;
        let ncout = cout.not();
        let sum = match self.fa_mode {
            FullAdderMode::Maj5 => self.maj(&[a, b, cin, &ncout, &ncout])?,
            FullAdderMode::Maj3Only => {
                let inner = self.maj(&[a, b, &cin.not()])?;
                self.maj(&[&ncout, cin, &inner])?
            }
        };
        Ok((sum, cout))
    }

    /// `[popcount(xs) >= t]` as one majority gate with constant padding.
    fn threshold(&mut self, xs: &[&Signal], t: usize) -> Result<Signal, BitserialError> {
        let s = xs.len();
        let mut arity = if s % 2 == 1 { s } else { s + 1 };
        loop {
            let half = arity.div_ceil(2);
            if half >= t && arity - s >= half - t {
                let ones = half - t;
                return self.maj_padded(xs, ones, arity - s - ones);
            }
            arity += 2;
        }
    }

    /// Largest operand group one parity step handles.
    fn parity_group(&self) -> usize {
        if self.max_arity >= 5 {
            2 * ((self.max_arity - 1) / 4) + 1
        } else {
            3
        }
    }

    /// Parity of 2..=parity_group() operands.
    fn parity(&mut self, xs: &[&Signal]) -> Result<Signal, BitserialError> {
        let s = xs.len();
        if self.max_arity < 5 {
            return match s {
                2 => self.xor(xs[0], xs[1]),
                3 => {
                    let saved = self.fa_mode;
                    self.fa_mode = FullAdderMode::Maj3Only;
                    let r = self.full_adder(xs[0], xs[1], xs[2]);
                    self.fa_mode = saved;
                    Ok(r?.0)
                }
                _ => unreachable!("MAJ3 parity groups hold two or three operands"),
            };
        }
        // sum + 2 * #{i : popcount < 2i} exceeds the midpoint exactly when
        // the popcount is odd
        let mut thresholds = Vec::new();
        for i in 1..=s / 2 {
            thresholds.push(self.threshold(xs, 2 * i)?.not());
        }
        let mut all: Vec<&Signal> = xs.to_vec();
        for t in &thresholds {
            all.push(t);
            all.push(t);
        }
        let zero = self.constant(false);
        if s.is_multiple_of(2) {
            all.push(&zero);
        }
        self.maj(&all)
    }

    pub fn xor_many(&mut self, xs: &[&Signal]) -> Result<Signal, BitserialError> {
        assert!(!xs.is_empty());
        let g = self.parity_group();
        let mut queue: VecDeque<Signal> = xs.iter().map(|s| (*s).clone()).collect();
        while queue.len() > 1 {
            let take = g.min(queue.len());
            let group: Vec<Signal> = queue.drain(..take).collect();
            let refs: Vec<&Signal> = group.iter().collect();
            let out = self.parity(&refs)?;
            queue.push_back(out);
        }
        Ok(queue.pop_front().expect("one left"))
    }

    pub fn reduce(&mut self, op: ReduceOp, xs: &[&Signal]) -> Result<Signal, BitserialError> {
        match op {
            ReduceOp::And => self.and_many(xs),
            ReduceOp::Or => self.or_many(xs),
            ReduceOp::Xor => self.xor_many(xs),
        }
    }

    /// Reduces the bit planes of each element: one output bit per column.
    pub fn reduce_planes(
        &mut self,
        op: ReduceOp,
        a: &BitColumnMatrix,
    ) -> Result<Signal, BitserialError> {
        let sigs = a.signals();
        let refs: Vec<&Signal> = sigs.iter().collect();
        self.reduce(op, &refs)
    }

    /// Ripple-carry addition of equal-width plane vectors.
    fn ripple(
        &mut self,
        a: &[Signal],
        b: &[Signal],
        cin: Signal,
    ) -> Result<(Vec<Signal>, Signal), BitserialError> {
        debug_assert_eq!(a.len(), b.len());
        let mut carry = cin;
        let mut out = Vec::with_capacity(a.len());
        for (x, y) in a.iter().zip(b) {
            let (s, c) = self.full_adder(x, y, &carry)?;
            out.push(s);
            carry = c;
        }
        Ok((out, carry))
    }

    fn check(&self, m: &BitColumnMatrix) -> Result<(), BitserialError> {
        if m.n_columns != self.n_columns {
            return Err(BitserialError::WidthMismatch {
                got: m.n_columns,
                expected: self.n_columns,
            });
        }
        Ok(())
    }

    pub fn add(
        &mut self,
        a: &BitColumnMatrix,
        b: &BitColumnMatrix,
    ) -> Result<BitColumnMatrix, BitserialError> {
        self.check(a)?;
        self.check(b)?;
        let (sum, _) = self.ripple(&a.signals(), &b.signals(), self.constant(false))?;
        Ok(BitColumnMatrix::from_signals(sum))
    }

    /// A + !B + 1.
    pub fn sub(
        &mut self,
        a: &BitColumnMatrix,
        b: &BitColumnMatrix,
    ) -> Result<BitColumnMatrix, BitserialError> {
        self.check(a)?;
        self.check(b)?;
        let nb: Vec<Signal> = b.signals().iter().map(Signal::not).collect();
        let (diff, _) = self.ripple(&a.signals(), &nb, self.constant(true))?;
        Ok(BitColumnMatrix::from_signals(diff))
    }

    /// Shift-and-add, keeping the low 32 bits.
    pub fn mul(
        &mut self,
        a: &BitColumnMatrix,
        b: &BitColumnMatrix,
    ) -> Result<BitColumnMatrix, BitserialError> {
        self.check(a)?;
        self.check(b)?;
        let a = a.signals();
        let b = b.signals();
        let w = a.len();
        let mut acc = Vec::with_capacity(w);
        for x in &a {
            acc.push(self.and_many(&[x, &b[0]])?);
        }
        for i in 1..w {
            let mut partial = Vec::with_capacity(w - i);
            for x in &a[..w - i] {
                partial.push(self.and_many(&[x, &b[i]])?);
            }
            let (sum, _) = self.ripple(&acc[i..], &partial, self.constant(false))?;
            acc.splice(i.., sum);
        }
        Ok(BitColumnMatrix::from_signals(acc))
    }

    /// `s ? x : y` as MAJ3(MAJ3(s, x, 0), MAJ3(!s, y, 0), 1).
    pub fn mux(&mut self, s: &Signal, x: &Signal, y: &Signal) -> Result<Signal, BitserialError> {
        let take_x = self.and_many(&[s, x])?;
        let take_y = self.and_many(&[&s.not(), y])?;
        self.or_many(&[&take_x, &take_y])
    }

    /// Restoring division. Returns the quotient and a mask of columns whose
    /// divisor is zero; those columns get an all-ones quotient.
    pub fn div(
        &mut self,
        a: &BitColumnMatrix,
        b: &BitColumnMatrix,
    ) -> Result<(BitColumnMatrix, BitRow), BitserialError> {
        self.check(a)?;
        self.check(b)?;
        let a = a.signals();
        let w = a.len();
        // divisor zero-extended by one bit, complemented for subtraction
        let mut nb: Vec<Signal> = b.signals().iter().map(Signal::not).collect();
        nb.push(self.constant(true));
        let mut rem: Vec<Signal> = (0..=w).map(|_| self.constant(false)).collect();
        let mut quotient = vec![self.constant(false); w];
        for i in (0..w).rev() {
            // shift left and bring down bit i; the dropped top bit is zero
            rem.pop();
            rem.insert(0, a[i].clone());
            let (diff, no_borrow) = self.ripple(&rem, &nb, self.constant(true))?;
            let mut next = Vec::with_capacity(rem.len());
            for (d, r) in diff.iter().zip(&rem) {
                next.push(self.mux(&no_borrow, d, r)?);
            }
            rem = next;
            quotient[i] = no_borrow;
        }
        let zero_mask = b
            .planes
            .iter()
            .fold(BitRow::zeros(self.n_columns), |acc, p| acc.or(p))
            .not();
        Ok((BitColumnMatrix::from_signals(quotient), zero_mask))
    }
}
