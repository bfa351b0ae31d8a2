//! Finite cell partitions of `[0, 1)` or of an abstract atom set.
//!
//! Cells of the unit interval are *dyadic cylinders*: sets of points whose
//! binary expansion has prescribed digits at finitely many positions. A
//! half-open dyadic interval `[j/2^L, (j+1)/2^L)` is the cylinder fixing the
//! first `L` digits to the bits of `j`; the set of points whose `n`-th digit
//! is `0` (the union of the even-index cells at level `n`) is a single
//! cylinder. This keeps partitions at level 64 down to a handful of cells.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Deepest binary digit a cylinder may constrain.
pub const MAX_DIGIT: u32 = 128;

/// `[index / 2^level, (index + 1) / 2^level)`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub index: u64,
    pub level: u32,
}

impl DyadicInterval {
    pub fn new(index: u64, level: u32) -> Result<Self> {
        if level > 63 || index >= (1u64 << level) {
            return Err(Error::InvalidDyadic { index, level });
        }
        Ok(DyadicInterval { index, level })
    }

    pub fn length(&self) -> Rational {
        Rational::pow2_neg(self.level)
    }

    pub fn left(&self) -> Rational {
        Rational::integer(self.index) * Rational::pow2_neg(self.level)
    }

    pub fn right(&self) -> Rational {
        Rational::integer(self.index + 1) * Rational::pow2_neg(self.level)
    }
}

/// Points of `[0, 1)` whose binary digits at the positions in `mask` equal
/// the corresponding bits of `bits`. Digit `p` (1-based, `p = 1` is the
/// halves digit) is stored at bit `p - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCylinder {
    mask: u128,
    bits: u128,
}

impl DyadicCylinder {
    /// The whole interval `[0, 1)`.
    pub const UNIT: DyadicCylinder = DyadicCylinder { mask: 0, bits: 0 };

    /// Cylinder fixing each listed `(digit position, bit)` pair.
    pub fn from_digits(digits: impl IntoIterator<Item = (u32, bool)>) -> Result<Self> {
        let mut c = Self::UNIT;
        for (pos, bit) in digits {
            if pos == 0 || pos > MAX_DIGIT {
                return Err(Error::InvalidPartition(format!(
                    "digit position {pos} outside 1..={MAX_DIGIT}"
                )));
            }
            let b = 1u128 << (pos - 1);
            if c.mask & b != 0 && ((c.bits & b != 0) != bit) {
                return Err(Error::InvalidPartition(format!(
                    "conflicting constraints on digit {pos}"
                )));
            }
            c.mask |= b;
            if bit {
                c.bits |= b;
            }
        }
        Ok(c)
    }

    /// Points whose `pos`-th binary digit equals `bit`.
    pub fn digit(pos: u32, bit: bool) -> Result<Self> {
        Self::from_digits([(pos, bit)])
    }

    /// Number of constrained digits.
    pub fn depth(&self) -> u32 {
        self.mask.count_ones()
    }

    /// Lebesgue measure, `2^-depth`.
    pub fn length(&self) -> Rational {
        Rational::pow2_neg(self.depth())
    }

    pub fn intersect(&self, other: &DyadicCylinder) -> Option<DyadicCylinder> {
        let common = self.mask & other.mask;
        if (self.bits ^ other.bits) & common != 0 {
            return None;
        }
        Some(DyadicCylinder {
            mask: self.mask | other.mask,
            bits: self.bits | other.bits,
        })
    }

    pub fn is_disjoint(&self, other: &DyadicCylinder) -> bool {
        self.intersect(other).is_none()
    }

    pub fn is_subset_of(&self, other: &DyadicCylinder) -> bool {
        other.mask & !self.mask == 0 && (self.bits ^ other.bits) & other.mask == 0
    }

    /// The dyadic interval this cylinder equals, if it constrains exactly
    /// the leading digits.
    pub fn as_interval(&self) -> Option<DyadicInterval> {
        let level = self.depth();
        if level > 63 || self.mask != low_mask(level) {
            return None;
        }
        let index = (0..level).fold(0u64, |acc, i| (acc << 1) | ((self.bits >> i) & 1) as u64);
        Some(DyadicInterval { index, level })
    }

    /// Constrained digits in increasing position order.
    pub fn digits(&self) -> Vec<(u32, bool)> {
        (0..MAX_DIGIT)
            .filter(|i| self.mask >> i & 1 == 1)
            .map(|i| (i + 1, self.bits >> i & 1 == 1))
            .collect()
    }
}

fn low_mask(level: u32) -> u128 {
    if level >= 128 {
        u128::MAX
    } else {
        (1u128 << level) - 1
    }
}

impl From<DyadicInterval> for DyadicCylinder {
    fn from(iv: DyadicInterval) -> Self {
        let mut bits = 0u128;
        for p in 1..=iv.level {
            if iv.index >> (iv.level - p) & 1 == 1 {
                bits |= 1u128 << (p - 1);
            }
        }
        DyadicCylinder {
            mask: low_mask(iv.level),
            bits,
        }
    }
}

impl fmt::Display for DyadicCylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(iv) = self.as_interval() {
            return write!(f, "[{}/2^{}, {}/2^{})", iv.index, iv.level, iv.index + 1, iv.level);
        }
        let parts: Vec<String> = self
            .digits()
            .into_iter()
            .map(|(p, b)| format!("d{p}={}", u8::from(b)))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cells {
    /// Disjoint cylinders covering `[0, 1)`.
    Dyadic(Vec<DyadicCylinder>),
    /// Labelled atoms.
    Atoms(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    DyadicUnitInterval,
    AtomSet,
}

/// Immutable, cheaply clonable partition.
#[derive(Clone, PartialEq, Eq)]
pub struct CellPartition {
    cells: Arc<Cells>,
}

impl fmt::Debug for CellPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.cells {
            Cells::Dyadic(cs) => {
                let shown: Vec<String> = cs.iter().map(ToString::to_string).collect();
                write!(f, "Dyadic[{}]", shown.join(" "))
            }
            Cells::Atoms(labels) => write!(f, "Atoms{labels:?}"),
        }
    }
}

impl CellPartition {
    /// Validates that the cylinders are pairwise disjoint and cover `[0, 1)`.
    pub fn dyadic(cells: Vec<DyadicCylinder>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidPartition("no cells".into()));
        }
        for (i, a) in cells.iter().enumerate() {
            for (j, b) in cells.iter().enumerate().skip(i + 1) {
                if !a.is_disjoint(b) {
                    return Err(Error::InvalidPartition(format!("cells {i} and {j} overlap")));
                }
            }
        }
        // Disjoint clopen cylinders of total length 1 leave nothing uncovered.
        let total: Rational = cells.iter().map(DyadicCylinder::length).sum();
        if total != Rational::one() {
            return Err(Error::InvalidPartition(format!(
                "cells cover length {total}, not 1"
            )));
        }
        Ok(CellPartition {
            cells: Arc::new(Cells::Dyadic(cells)),
        })
    }

    /// Partition by half-open dyadic intervals, which must tile `[0, 1)`.
    pub fn from_intervals(intervals: &[DyadicInterval]) -> Result<Self> {
        Self::dyadic(intervals.iter().map(|&iv| iv.into()).collect())
    }

    /// All `2^level` intervals at one level, left to right.
    pub fn dyadic_level(level: u32) -> Result<Self> {
        if level > 24 {
            return Err(Error::InvalidPartition(format!(
                "uniform level {level} has too many cells to materialise"
            )));
        }
        let cells = (0..1u64 << level)
            .map(|j| DyadicInterval { index: j, level }.into())
            .collect();
        Ok(CellPartition {
            cells: Arc::new(Cells::Dyadic(cells)),
        })
    }

    /// The one-cell partition `{[0, 1)}`.
    pub fn unit() -> Self {
        CellPartition {
            cells: Arc::new(Cells::Dyadic(vec![DyadicCylinder::UNIT])),
        }
    }

    /// `{digit pos = 0, digit pos = 1}`.
    pub fn digit_split(pos: u32) -> Result<Self> {
        Self::dyadic(vec![
            DyadicCylinder::digit(pos, false)?,
            DyadicCylinder::digit(pos, true)?,
        ])
    }

    pub fn atoms<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidPartition("no atoms".into()));
        }
        let unique: BTreeSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(Error::InvalidPartition("duplicate atom label".into()));
        }
        Ok(CellPartition {
            cells: Arc::new(Cells::Atoms(labels)),
        })
    }

    pub fn kind(&self) -> PartitionKind {
        match &*self.cells {
            Cells::Dyadic(_) => PartitionKind::DyadicUnitInterval,
            Cells::Atoms(_) => PartitionKind::AtomSet,
        }
    }

    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    pub fn len(&self) -> usize {
        match &*self.cells {
            Cells::Dyadic(c) => c.len(),
            Cells::Atoms(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cylinders(&self) -> Option<&[DyadicCylinder]> {
        match &*self.cells {
            Cells::Dyadic(c) => Some(c),
            Cells::Atoms(_) => None,
        }
    }

    /// Interval length for dyadic cells, 1 for atoms.
    pub fn base_weight(&self, cell: usize) -> Rational {
        match &*self.cells {
            Cells::Dyadic(c) => c[cell].length(),
            Cells::Atoms(_) => Rational::one(),
        }
    }

    pub fn base_weights(&self) -> Vec<Rational> {
        (0..self.len()).map(|i| self.base_weight(i)).collect()
    }

    pub fn cell_label(&self, cell: usize) -> String {
        match &*self.cells {
            Cells::Dyadic(c) => c[cell].to_string(),
            Cells::Atoms(a) => a[cell].clone(),
        }
    }

    pub fn same_as(&self, other: &CellPartition) -> bool {
        Arc::ptr_eq(&self.cells, &other.cells) || self.cells == other.cells
    }

    /// For each cell of `fine`, the index of the cell of `self` containing it.
    pub fn refinement_map(&self, fine: &CellPartition) -> Result<Vec<usize>> {
        if self.same_as(fine) {
            return Ok((0..self.len()).collect());
        }
        match (&*self.cells, &*fine.cells) {
            (Cells::Dyadic(coarse), Cells::Dyadic(fine)) => fine
                .iter()
                .map(|f| {
                    coarse
                        .iter()
                        .position(|c| f.is_subset_of(c))
                        .ok_or(Error::NotARefinement)
                })
                .collect(),
            (Cells::Atoms(_), Cells::Atoms(_)) => Err(Error::NotARefinement),
            _ => Err(Error::NotARefinement),
        }
    }

    pub fn refines(&self, coarse: &CellPartition) -> bool {
        coarse.refinement_map(self).is_ok()
    }
}

/// Coarsest common refinement together with the parent of each output cell
/// in either input.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub partition: CellPartition,
    pub left_parent: Vec<usize>,
    pub right_parent: Vec<usize>,
}

pub fn common_refinement(p: &CellPartition, q: &CellPartition) -> Result<Refinement> {
    if p.same_as(q) {
        let ids: Vec<usize> = (0..p.len()).collect();
        return Ok(Refinement {
            partition: p.clone(),
            left_parent: ids.clone(),
            right_parent: ids,
        });
    }
    match (&*p.cells, &*q.cells) {
        (Cells::Dyadic(a), Cells::Dyadic(b)) => {
            let mut cells = Vec::new();
            let mut left_parent = Vec::new();
            let mut right_parent = Vec::new();
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    if let Some(c) = x.intersect(y) {
                        cells.push(c);
                        left_parent.push(i);
                        right_parent.push(j);
                    }
                }
            }
            Ok(Refinement {
                partition: CellPartition {
                    cells: Arc::new(Cells::Dyadic(cells)),
                },
                left_parent,
                right_parent,
            })
        }
        (Cells::Atoms(_), Cells::Atoms(_)) => Err(Error::IncompatiblePartitions(
            "atom sets carry different labels".into(),
        )),
        _ => Err(Error::IncompatiblePartitions(
            "cannot refine a dyadic partition against an atom set".into(),
        )),
    }
}

/// Common refinement of any number of partitions (at least one).
pub fn common_refinement_all<'a>(
    parts: impl IntoIterator<Item = &'a CellPartition>,
) -> Result<CellPartition> {
    let mut it = parts.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::EmptyRange("no partitions to refine".into()))?
        .clone();
    it.try_fold(first, |acc, p| Ok(common_refinement(&acc, p)?.partition))
}
