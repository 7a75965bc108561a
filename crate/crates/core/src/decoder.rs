//! Hierarchical row decoder: a global wordline decoder selects the subarray
//! from the high address bits, and five latched predecoders (A..E) select the
//! local wordline from the low nine bits.
//!
//! A precharge normally resets the predecoder latches. When the second ACT
//! of an ACT→PRE→ACT sequence lands before that reset completes, each
//! predecoder holds the union of both selects and the local decoder asserts
//! every wordline in the Cartesian product of the latched outputs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 16-bit DRAM row address (bank-relative).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RowAddress(pub u16);

impl RowAddress {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for RowAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u16> for RowAddress {
    fn from(v: u16) -> Self {
        Self(v)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecoderError {
    #[error("rows {first} and {second} are in different subarrays")]
    CrossSubarray {
        first: RowAddress,
        second: RowAddress,
    },
    #[error("a predecoder cannot latch more than two activations without a reset")]
    LatchOverflow,
    #[error("predecoder layout is invalid: {0}")]
    InvalidLayout(String),
}

/// One predecoder: the contiguous address bits it decodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredecoderSpec {
    pub name: char,
    pub shift: u32,
    pub width: u32,
}

impl PredecoderSpec {
    pub fn outputs(&self) -> usize {
        1 << self.width
    }

    fn select(&self, ra: u16) -> u8 {
        ((ra >> self.shift) & ((1 << self.width) - 1)) as u8
    }
}

/// Assignment of local row-address bits to predecoders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredecoderLayout {
    groups: Vec<PredecoderSpec>,
}

/// A = bit 0, B = bits 1:2, C = bits 3:4, D = bits 5:6, E = bits 7:8.
pub const HIERARCHICAL_SPLIT: [(char, u32, u32); 5] = [
    ('A', 0, 1),
    ('B', 1, 2),
    ('C', 3, 2),
    ('D', 5, 2),
    ('E', 7, 2),
];

impl Default for PredecoderLayout {
    fn default() -> Self {
        Self::new(
            HIERARCHICAL_SPLIT
                .iter()
                .map(|&(name, shift, width)| PredecoderSpec { name, shift, width })
                .collect(),
        )
        .expect("built-in layout is valid")
    }
}

impl PredecoderLayout {
    /// Groups must tile the low address bits starting at bit 0 with no gaps.
    pub fn new(groups: Vec<PredecoderSpec>) -> Result<Self, DecoderError> {
        let mut next = 0;
        for g in &groups {
            if g.shift != next || g.width == 0 || g.width > 3 {
                return Err(DecoderError::InvalidLayout(format!(
                    "group {} must start at bit {next} and be 1..=3 bits wide",
                    g.name
                )));
            }
            next += g.width;
        }
        if groups.is_empty() || next > 12 {
            return Err(DecoderError::InvalidLayout(format!(
                "{next} local address bits"
            )));
        }
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[PredecoderSpec] {
        &self.groups
    }

    pub fn local_bits(&self) -> u32 {
        self.groups.iter().map(|g| g.width).sum()
    }

    pub fn subarray_size(&self) -> usize {
        1 << self.local_bits()
    }

    /// Total number of predecoder output lines (18 for the default layout).
    pub fn total_outputs(&self) -> usize {
        self.groups.iter().map(PredecoderSpec::outputs).sum()
    }
}

/// One asserted predecoder output, e.g. `P_C3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PredecoderSelect {
    pub group: char,
    pub index: u8,
}

impl fmt::Display for PredecoderSelect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.group, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodedAddress {
    pub subarray: u16,
    pub selects: Vec<PredecoderSelect>,
}

/// Latched predecoder outputs plus the global wordline they hang off.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PredecoderLatchState {
    gwl: Option<u16>,
    /// Per-group bitmask of latched output indices.
    latched: Vec<u8>,
    activations: u8,
}

impl PredecoderLatchState {
    pub fn is_empty(&self) -> bool {
        self.gwl.is_none()
    }

    pub fn gwl(&self) -> Option<u16> {
        self.gwl
    }

    /// Latched output indices of each group, ascending.
    pub fn latched(&self) -> Vec<Vec<u8>> {
        self.latched
            .iter()
            .map(|&mask| (0..8).filter(|i| mask >> i & 1 == 1).collect())
            .collect()
    }

    pub fn activated_count(&self) -> usize {
        self.latched
            .iter()
            .map(|m| m.count_ones() as usize)
            .product()
    }
}

/// Set of rows one APA activates together, with the anchor pair that opened it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowGroup {
    pub rows: Vec<RowAddress>,
    pub first: RowAddress,
    pub second: RowAddress,
}

impl RowGroup {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn contains(&self, row: RowAddress) -> bool {
        self.rows.binary_search(&row).is_ok()
    }

    pub fn subarray(&self, layout: &PredecoderLayout) -> u16 {
        self.first.0 >> layout.local_bits()
    }

    /// The row that, paired with `row`, reopens this same group: every
    /// predecoder group where the anchors differ is flipped to its other value.
    pub fn partner(&self, row: RowAddress, layout: &PredecoderLayout) -> Option<RowAddress> {
        if !self.contains(row) {
            return None;
        }
        let mut out = row.0;
        for g in layout.groups() {
            let a = g.select(self.first.0);
            let b = g.select(self.second.0);
            if a != b {
                let cur = g.select(row.0);
                let other = if cur == a { b } else { a };
                let mask = ((1u16 << g.width) - 1) << g.shift;
                out = (out & !mask) | ((other as u16) << g.shift);
            }
        }
        Some(RowAddress(out))
    }
}

/// Fraction of ordered same-subarray pairs `(r1, r2)`, `r1 != r2`, whose APA
/// opens `n` rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NrgCensus {
    pub total_pairs: u64,
    pub counts: BTreeMap<usize, u64>,
}

impl NrgCensus {
    pub fn fraction(&self, n: usize) -> f64 {
        self.counts.get(&n).copied().unwrap_or(0) as f64 / self.total_pairs as f64
    }
}

/// Row decoder model for one bank.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDecoder {
    layout: PredecoderLayout,
}

impl RowDecoder {
    pub fn new(layout: PredecoderLayout) -> Self {
        Self { layout }
    }

    pub fn layout(&self) -> &PredecoderLayout {
        &self.layout
    }

    pub fn subarray_of(&self, ra: RowAddress) -> u16 {
        ra.0 >> self.layout.local_bits()
    }

    pub fn decode_address(&self, ra: RowAddress) -> DecodedAddress {
        DecodedAddress {
            subarray: self.subarray_of(ra),
            selects: self
                .layout
                .groups
                .iter()
                .map(|g| PredecoderSelect {
                    group: g.name,
                    index: g.select(ra.0),
                })
                .collect(),
        }
    }

    /// Latch `ra` into `state`. With `reset` the previous latches are cleared
    /// first (a precharge that was honored).
    pub fn latch(
        &self,
        state: &PredecoderLatchState,
        ra: RowAddress,
        reset: bool,
    ) -> Result<PredecoderLatchState, DecoderError> {
        let subarray = self.subarray_of(ra);
        let mut next = if reset || state.is_empty() {
            PredecoderLatchState {
                gwl: Some(subarray),
                latched: vec![0; self.layout.groups.len()],
                activations: 0,
            }
        } else {
            if state.gwl != Some(subarray) {
                return Err(DecoderError::CrossSubarray {
                    first: RowAddress(state.gwl.unwrap_or(0) << self.layout.local_bits()),
                    second: ra,
                });
            }
            if state.activations >= 2 {
                return Err(DecoderError::LatchOverflow);
            }
            state.clone()
        };
        for (mask, g) in next.latched.iter_mut().zip(&self.layout.groups) {
            *mask |= 1 << g.select(ra.0);
        }
        next.activations += 1;
        Ok(next)
    }

    /// Every row whose local wordline is asserted by the latched outputs.
    pub fn activated_rows(&self, state: &PredecoderLatchState) -> Vec<RowAddress> {
        let Some(gwl) = state.gwl else {
            return Vec::new();
        };
        let base = gwl << self.layout.local_bits();
        let mut rows = vec![0u16];
        for (g, indices) in self.layout.groups.iter().zip(state.latched()) {
            rows = rows
                .iter()
                .flat_map(|&r| indices.iter().map(move |&i| r | ((i as u16) << g.shift)))
                .collect();
        }
        let mut out: Vec<RowAddress> = rows.into_iter().map(|r| RowAddress(base | r)).collect();
        out.sort_unstable();
        out
    }

    /// The row group opened by an APA targeting `first` then `second`.
    pub fn nrg(&self, first: RowAddress, second: RowAddress) -> Result<RowGroup, DecoderError> {
        if self.subarray_of(first) != self.subarray_of(second) {
            return Err(DecoderError::CrossSubarray { first, second });
        }
        let state = self.latch(&PredecoderLatchState::default(), first, true)?;
        let state = self.latch(&state, second, false)?;
        Ok(RowGroup {
            rows: self.activated_rows(&state),
            first,
            second,
        })
    }

    /// Number of predecoder groups in which the two addresses differ.
    pub fn differing_groups(&self, a: RowAddress, b: RowAddress) -> usize {
        self.layout
            .groups
            .iter()
            .filter(|g| g.select(a.0) != g.select(b.0))
            .count()
    }

    /// Histogram of group sizes over all ordered pairs of distinct rows in one
    /// subarray. Group size depends only on how many predecoders differ, so
    /// the count is taken per pair without materializing the rows.
    pub fn nrg_census(&self) -> NrgCensus {
        let size = self.layout.subarray_size() as u16;
        let mut counts = BTreeMap::new();
        let mut total = 0u64;
        for a in 0..size {
            for b in 0..size {
                if a == b {
                    continue;
                }
                let k = self.differing_groups(RowAddress(a), RowAddress(b));
                *counts.entry(1usize << k).or_insert(0u64) += 1;
                total += 1;
            }
        }
        NrgCensus {
            total_pairs: total,
            counts,
        }
    }
}
