//! Mutable state of one DRAM bank: stored cell levels, open rows and the
//! sense-amplifier latches.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::BitRow;
use crate::decoder::RowAddress;

#[derive(Debug, Error)]
pub enum BankError {
    #[error("row {row} is outside the bank ({rows} rows)")]
    RowOutOfRange { row: RowAddress, rows: usize },
    #[error("row {row} bitline {bitline} holds unresolved charge")]
    UnresolvedCell { row: RowAddress, bitline: usize },
    #[error("data is {got} bits wide, rows are {expected}")]
    WidthMismatch { got: usize, expected: usize },
    #[error("bank is open; close it before {0}")]
    BankOpen(&'static str),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("bad bank dump: {0}")]
    BadDump(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Geometry {
    pub n_subarrays: usize,
    pub subarray_size: usize,
    pub n_bitlines: usize,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            n_subarrays: 128,
            subarray_size: 512,
            n_bitlines: 65536,
        }
    }
}

impl Geometry {
    pub fn rows(&self) -> usize {
        self.n_subarrays * self.subarray_size
    }

    pub fn validate(&self) -> Result<(), BankError> {
        if self.n_bitlines == 0 || self.n_subarrays == 0 {
            return Err(BankError::InvalidGeometry("empty bank".into()));
        }
        if !self.subarray_size.is_power_of_two() {
            return Err(BankError::InvalidGeometry(
                "subarray size must be a power of two".into(),
            ));
        }
        if self.rows() > 1 << 16 {
            return Err(BankError::InvalidGeometry(format!(
                "{} rows exceed the 16-bit row address",
                self.rows()
            )));
        }
        Ok(())
    }
}

/// Charge held by one cell, in logical terms.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum CellLevel {
    #[default]
    Zero,
    One,
    /// Exactly Vdd/2, as left by a Frac.
    Neutral,
    /// An arbitrary voltage in [0, Vdd].
    Analog(f64),
}

impl CellLevel {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Self::One
        } else {
            Self::Zero
        }
    }

    pub fn bit(self) -> Option<bool> {
        match self {
            Self::Zero => Some(false),
            Self::One => Some(true),
            Self::Neutral | Self::Analog(_) => None,
        }
    }

    pub fn volts(self, vdd: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::One => vdd,
            Self::Neutral => vdd / 2.0,
            Self::Analog(v) => v.clamp(0.0, vdd),
        }
    }

    fn code(self) -> u8 {
        match self {
            Self::Zero => 0,
            Self::One => 1,
            Self::Neutral => 2,
            Self::Analog(_) => 3,
        }
    }
}

/// Cell polarity of a row. Only the sense-amplifier tie bias depends on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    TrueCell,
    AntiCell,
}

impl Polarity {
    /// Value an unbiased (tied) bitline resolves to when this row drives it.
    pub fn bias_bit(self) -> bool {
        matches!(self, Self::AntiCell)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub enum PolarityLayout {
    /// Even rows true-cell, odd rows anti-cell.
    #[default]
    Alternating,
    Uniform(Polarity),
}

impl PolarityLayout {
    pub fn of(&self, row: RowAddress) -> Polarity {
        match self {
            Self::Alternating if row.0.is_multiple_of(2) => Polarity::TrueCell,
            Self::Alternating => Polarity::AntiCell,
            Self::Uniform(p) => *p,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataPattern {
    AllOnes,
    AllZeros,
    Random(u64),
    Explicit(BitRow),
}

impl DataPattern {
    /// Bits for `row`. Random patterns derive one stream per row from the seed.
    pub fn bits(&self, row: RowAddress, n_bitlines: usize) -> Result<BitRow, BankError> {
        Ok(match self {
            Self::AllOnes => BitRow::ones(n_bitlines),
            Self::AllZeros => BitRow::zeros(n_bitlines),
            Self::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(row.0 as u64);
                BitRow::random(n_bitlines, &mut rng)
            }
            Self::Explicit(bits) => {
                if bits.len() != n_bitlines {
                    return Err(BankError::WidthMismatch {
                        got: bits.len(),
                        expected: n_bitlines,
                    });
                }
                bits.clone()
            }
        })
    }
}

/// Sense-amplifier row buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct SenseAmps {
    pub bits: BitRow,
    pub enabled: bool,
}

/// One bank. Rows are stored sparsely; a row never written holds all ZERO.
#[derive(Clone, Debug)]
pub struct BankState {
    geometry: Geometry,
    polarity: PolarityLayout,
    cells: BTreeMap<u16, Vec<CellLevel>>,
    open_rows: Vec<RowAddress>,
    senseamp: Option<SenseAmps>,
}

impl BankState {
    pub fn new(geometry: Geometry) -> Result<Self, BankError> {
        Self::with_polarity(geometry, PolarityLayout::default())
    }

    pub fn with_polarity(geometry: Geometry, polarity: PolarityLayout) -> Result<Self, BankError> {
        geometry.validate()?;
        Ok(Self {
            geometry,
            polarity,
            cells: BTreeMap::new(),
            open_rows: Vec::new(),
            senseamp: None,
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn n_bitlines(&self) -> usize {
        self.geometry.n_bitlines
    }

    pub fn polarity(&self, row: RowAddress) -> Polarity {
        self.polarity.of(row)
    }

    pub fn polarity_layout(&self) -> &PolarityLayout {
        &self.polarity
    }

    pub fn open_rows(&self) -> &[RowAddress] {
        &self.open_rows
    }

    pub fn senseamp(&self) -> Option<&SenseAmps> {
        self.senseamp.as_ref()
    }

    pub fn is_closed(&self) -> bool {
        self.open_rows.is_empty()
    }

    pub(crate) fn set_open(&mut self, rows: Vec<RowAddress>, senseamp: Option<SenseAmps>) {
        debug_assert!(senseamp.is_none() || !rows.is_empty());
        self.open_rows = rows;
        self.senseamp = senseamp;
    }

    pub fn close(&mut self) {
        self.open_rows.clear();
        self.senseamp = None;
    }

    pub fn check_row(&self, row: RowAddress) -> Result<(), BankError> {
        if row.index() >= self.geometry.rows() {
            return Err(BankError::RowOutOfRange {
                row,
                rows: self.geometry.rows(),
            });
        }
        Ok(())
    }

    /// Cell levels of `row` (all ZERO if never written).
    pub fn row_cells(&self, row: RowAddress) -> Vec<CellLevel> {
        self.cells
            .get(&row.0)
            .cloned()
            .unwrap_or_else(|| vec![CellLevel::Zero; self.geometry.n_bitlines])
    }

    pub fn cell(&self, row: RowAddress, bitline: usize) -> CellLevel {
        self.cells
            .get(&row.0)
            .map_or(CellLevel::Zero, |r| r[bitline])
    }

    pub fn set_row_bits(&mut self, row: RowAddress, bits: &BitRow) -> Result<(), BankError> {
        self.check_row(row)?;
        self.check_width(bits.len())?;
        self.cells
            .insert(row.0, bits.iter().map(CellLevel::from_bit).collect());
        Ok(())
    }

    pub fn set_row_cells(
        &mut self,
        row: RowAddress,
        cells: Vec<CellLevel>,
    ) -> Result<(), BankError> {
        self.check_row(row)?;
        self.check_width(cells.len())?;
        self.cells.insert(row.0, cells);
        Ok(())
    }

    pub fn fill_row(&mut self, row: RowAddress, level: CellLevel) -> Result<(), BankError> {
        self.set_row_cells(row, vec![level; self.geometry.n_bitlines])
    }

    fn check_width(&self, got: usize) -> Result<(), BankError> {
        if got != self.geometry.n_bitlines {
            return Err(BankError::WidthMismatch {
                got,
                expected: self.geometry.n_bitlines,
            });
        }
        Ok(())
    }

    /// Resolved bits of `row`, failing on the first NEUTRAL/ANALOG cell.
    pub fn row_bits(&self, row: RowAddress) -> Result<BitRow, BankError> {
        self.check_row(row)?;
        let Some(cells) = self.cells.get(&row.0) else {
            return Ok(BitRow::zeros(self.geometry.n_bitlines));
        };
        let mut out = BitRow::zeros(cells.len());
        for (i, c) in cells.iter().enumerate() {
            out.set(
                i,
                c.bit()
                    .ok_or(BankError::UnresolvedCell { row, bitline: i })?,
            );
        }
        Ok(out)
    }

    pub fn init_rows(
        &mut self,
        rows: impl IntoIterator<Item = RowAddress>,
        pattern: &DataPattern,
    ) -> Result<(), BankError> {
        if !self.is_closed() {
            return Err(BankError::BankOpen("initializing rows"));
        }
        for row in rows {
            self.check_row(row)?;
            let bits = pattern.bits(row, self.geometry.n_bitlines)?;
            self.set_row_bits(row, &bits)?;
        }
        Ok(())
    }

    /// Rows holding anything other than all-ZERO, ascending.
    pub fn stored_rows(&self) -> impl Iterator<Item = (RowAddress, &[CellLevel])> {
        self.cells
            .iter()
            .filter(|(_, cells)| cells.iter().any(|c| *c != CellLevel::Zero))
            .map(|(&r, cells)| (RowAddress(r), cells.as_slice()))
    }

    /// SHA-256 over the extended dump. Changes iff some cell level changes.
    pub fn snapshot(&self) -> String {
        let mut hasher = Sha256::new();
        let mut buf = Vec::new();
        self.write_dump(&mut buf, true)
            .expect("writing to a Vec cannot fail");
        hasher.update(&buf);
        hex::encode(hasher.finalize())
    }

    /// Binary dump, little-endian:
    ///
    /// ```text
    /// magic "MRDB" | version u16 = 1 | flags u16 (bit0 = extended)
    /// n_subarrays u32 | subarray_size u32 | n_bitlines u32 | row_count u32
    /// per stored row, ascending:
    ///   row u32 | bits ceil(n_bitlines/8) bytes (unresolved cells read 0)
    ///   extended only: 2-bit level codes, 4 cells per byte, cell 4k in the
    ///   low bits (0 ZERO, 1 ONE, 2 NEUTRAL, 3 ANALOG), then analog_count u32
    ///   and that many f64 volts in bitline order
    /// ```
    ///
    /// Rows that are entirely ZERO are omitted.
    pub fn write_dump<W: Write>(&self, mut w: W, extended: bool) -> io::Result<()> {
        let rows: Vec<_> = self.stored_rows().collect();
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(extended as u16).to_le_bytes())?;
        for v in [
            self.geometry.n_subarrays,
            self.geometry.subarray_size,
            self.geometry.n_bitlines,
            rows.len(),
        ] {
            w.write_all(&(v as u32).to_le_bytes())?;
        }
        for (row, cells) in rows {
            w.write_all(&(row.0 as u32).to_le_bytes())?;
            let bits = BitRow::from_fn(cells.len(), |i| cells[i].bit().unwrap_or(false));
            w.write_all(&bits.to_bytes())?;
            if extended {
                let mut codes = vec![0u8; cells.len().div_ceil(4)];
                for (i, c) in cells.iter().enumerate() {
                    codes[i / 4] |= c.code() << (2 * (i % 4));
                }
                w.write_all(&codes)?;
                let analog: Vec<f64> = cells
                    .iter()
                    .filter_map(|c| match c {
                        CellLevel::Analog(v) => Some(*v),
                        _ => None,
                    })
                    .collect();
                w.write_all(&(analog.len() as u32).to_le_bytes())?;
                for v in analog {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    /// Load a dump written by [`write_dump`](Self::write_dump). Basic dumps
    /// restore resolved bits only.
    pub fn read_dump<R: Read>(mut r: R) -> Result<Self, BankError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(BankError::BadDump("bad magic".into()));
        }
        let version = read_u16(&mut r)?;
        if version != DUMP_VERSION {
            return Err(BankError::BadDump(format!("unsupported version {version}")));
        }
        let extended = read_u16(&mut r)? & 1 == 1;
        let geometry = Geometry {
            n_subarrays: read_u32(&mut r)? as usize,
            subarray_size: read_u32(&mut r)? as usize,
            n_bitlines: read_u32(&mut r)? as usize,
        };
        let mut bank = Self::new(geometry)?;
        let count = read_u32(&mut r)?;
        let nb = geometry.n_bitlines;
        for _ in 0..count {
            let row = RowAddress(
                u16::try_from(read_u32(&mut r)?)
                    .map_err(|_| BankError::BadDump("row index overflow".into()))?,
            );
            let mut bytes = vec![0u8; nb.div_ceil(8)];
            r.read_exact(&mut bytes)?;
            let bits = BitRow::from_bytes(nb, &bytes)
                .ok_or_else(|| BankError::BadDump("padding bits set".into()))?;
            let mut cells: Vec<CellLevel> = bits.iter().map(CellLevel::from_bit).collect();
            if extended {
                let mut codes = vec![0u8; nb.div_ceil(4)];
                r.read_exact(&mut codes)?;
                let n_analog = read_u32(&mut r)? as usize;
                let mut analog = Vec::with_capacity(n_analog);
                for _ in 0..n_analog {
                    let mut b = [0u8; 8];
                    r.read_exact(&mut b)?;
                    analog.push(f64::from_le_bytes(b));
                }
                let mut analog = analog.into_iter();
                for (i, cell) in cells.iter_mut().enumerate() {
                    *cell =
                        match (codes[i / 4] >> (2 * (i % 4))) & 3 {
                            0 => CellLevel::Zero,
                            1 => CellLevel::One,
                            2 => CellLevel::Neutral,
                            _ => CellLevel::Analog(analog.next().ok_or_else(|| {
                                BankError::BadDump("missing analog level".into())
                            })?),
                        };
                }
            }
            bank.set_row_cells(row, cells)?;
        }
        Ok(bank)
    }
}

const DUMP_MAGIC: &[u8; 4] = b"MRDB";
const DUMP_VERSION: u16 = 1;

fn read_u16<R: Read>(r: &mut R) -> io::Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BankState {
        BankState::new(Geometry {
            n_subarrays: 2,
            subarray_size: 512,
            n_bitlines: 64,
        })
        .unwrap()
    }

    fn ra(v: u16) -> RowAddress {
        RowAddress(v)
    }

    #[test]
    fn init_zeros_reads_zeros() {
        let mut b = small();
        b.init_rows((0..8).map(ra), &DataPattern::AllZeros).unwrap();
        for r in 0..8 {
            assert_eq!(b.row_bits(ra(r)).unwrap(), BitRow::zeros(64));
        }
    }

    #[test]
    fn init_ones_and_explicit() {
        let mut b = small();
        b.init_rows([ra(1)], &DataPattern::AllOnes).unwrap();
        assert_eq!(b.row_bits(ra(1)).unwrap().count_ones(), 64);
        let alt = BitRow::alternating(64);
        b.init_rows([ra(5)], &DataPattern::Explicit(alt.clone()))
            .unwrap();
        assert_eq!(b.row_bits(ra(5)).unwrap(), alt);
    }

    #[test]
    fn random_pattern_is_reproducible() {
        let mut a = small();
        let mut b = small();
        a.init_rows((0..4).map(ra), &DataPattern::Random(42))
            .unwrap();
        b.init_rows((0..4).map(ra), &DataPattern::Random(42))
            .unwrap();
        assert_eq!(a.snapshot(), b.snapshot());
        assert_ne!(a.row_bits(ra(0)).unwrap(), a.row_bits(ra(1)).unwrap());
    }

    #[test]
    fn out_of_range_and_width_errors() {
        let mut b = small();
        assert!(matches!(
            b.init_rows([ra(1024)], &DataPattern::AllOnes),
            Err(BankError::RowOutOfRange { .. })
        ));
        assert!(matches!(
            b.init_rows([ra(0)], &DataPattern::Explicit(BitRow::zeros(8))),
            Err(BankError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn neutral_row_is_unresolved() {
        let mut b = small();
        b.fill_row(ra(3), CellLevel::Neutral).unwrap();
        assert!(matches!(
            b.row_bits(ra(3)),
            Err(BankError::UnresolvedCell { bitline: 0, .. })
        ));
    }

    #[test]
    fn snapshot_tracks_levels_only() {
        let mut b = small();
        let empty = b.snapshot();
        b.init_rows([ra(9)], &DataPattern::AllZeros).unwrap();
        assert_eq!(b.snapshot(), empty, "writing zeros changes no level");
        b.init_rows([ra(9)], &DataPattern::AllOnes).unwrap();
        assert_ne!(b.snapshot(), empty);
    }

    #[test]
    fn extended_dump_roundtrip() {
        let mut b = small();
        b.init_rows((0..3).map(ra), &DataPattern::Random(7))
            .unwrap();
        let mut cells = vec![CellLevel::One; 64];
        cells[3] = CellLevel::Neutral;
        cells[10] = CellLevel::Analog(0.25);
        b.set_row_cells(ra(600), cells).unwrap();
        let mut buf = Vec::new();
        b.write_dump(&mut buf, true).unwrap();
        let back = BankState::read_dump(buf.as_slice()).unwrap();
        assert_eq!(back.snapshot(), b.snapshot());
        assert_eq!(back.cell(ra(600), 10), CellLevel::Analog(0.25));

        assert!(BankState::read_dump(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn polarity_default_alternates() {
        let b = small();
        assert_eq!(b.polarity(ra(0)), Polarity::TrueCell);
        assert_eq!(b.polarity(ra(1)), Polarity::AntiCell);
        assert!(!Polarity::TrueCell.bias_bit());
    }
}
