//! Measures, signed measures and step functions over a [`CellPartition`].
//!
//! Within a cell, mass is spread in proportion to the cell's base weight
//! (Lebesgue length for dyadic cells), so every measure here is a
//! piecewise-constant density times the base measure.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::partition::{common_refinement, CellPartition};
use crate::rational::Rational;

/// Nonnegative rational mass per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measure {
    partition: CellPartition,
    mass: Vec<Rational>,
}

/// Rational mass of either sign per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedMeasure {
    partition: CellPartition,
    mass: Vec<Rational>,
}

/// Rational value per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepFunction {
    partition: CellPartition,
    value: Vec<Rational>,
}

fn check_len(partition: &CellPartition, got: usize) -> Result<()> {
    if partition.len() != got {
        return Err(Error::LengthMismatch {
            expected: partition.len(),
            got,
        });
    }
    Ok(())
}

/// Read access shared by [`Measure`] and [`SignedMeasure`].
pub trait CellMasses {
    fn partition(&self) -> &CellPartition;
    fn masses(&self) -> &[Rational];

    fn total(&self) -> Rational {
        self.masses().iter().sum()
    }

    /// Mass of a union of cells.
    fn mass_of(&self, cells: &[usize]) -> Result<Rational> {
        let m = self.masses();
        cells
            .iter()
            .map(|&c| {
                m.get(c).cloned().ok_or(Error::InvalidSetIndex {
                    index: c,
                    cells: m.len(),
                })
            })
            .sum()
    }
}

impl CellMasses for Measure {
    fn partition(&self) -> &CellPartition {
        &self.partition
    }
    fn masses(&self) -> &[Rational] {
        &self.mass
    }
}

impl CellMasses for SignedMeasure {
    fn partition(&self) -> &CellPartition {
        &self.partition
    }
    fn masses(&self) -> &[Rational] {
        &self.mass
    }
}

impl Measure {
    pub fn new(partition: CellPartition, mass: Vec<Rational>) -> Result<Self> {
        check_len(&partition, mass.len())?;
        if let Some((cell, m)) = mass.iter().enumerate().find(|(_, m)| m.is_negative()) {
            return Err(Error::NegativeMass {
                cell,
                mass: m.clone(),
            });
        }
        Ok(Measure { partition, mass })
    }

    /// Base measure of the partition: Lebesgue on dyadic cells, counting on atoms.
    pub fn base(partition: &CellPartition) -> Self {
        Measure {
            mass: partition.base_weights(),
            partition: partition.clone(),
        }
    }

    /// Lebesgue measure on `[0, 1)` carried by a single cell.
    pub fn lebesgue() -> Self {
        Self::base(&CellPartition::unit())
    }

    /// `density · base` for a nonnegative step density.
    pub fn with_density(density: &StepFunction) -> Result<Self> {
        let p = density.partition();
        let mass = density
            .values()
            .iter()
            .enumerate()
            .map(|(i, d)| d * p.base_weight(i))
            .collect();
        Self::new(p.clone(), mass)
    }

    pub fn to_signed(&self) -> SignedMeasure {
        SignedMeasure {
            partition: self.partition.clone(),
            mass: self.mass.clone(),
        }
    }

    pub fn is_probability(&self) -> bool {
        self.total() == Rational::one()
    }

    pub fn lift(&self, target: &CellPartition) -> Result<Self> {
        Ok(Measure {
            mass: split_masses(&self.partition, &self.mass, target)?,
            partition: target.clone(),
        })
    }
}

impl SignedMeasure {
    pub fn new(partition: CellPartition, mass: Vec<Rational>) -> Result<Self> {
        check_len(&partition, mass.len())?;
        Ok(SignedMeasure { partition, mass })
    }

    /// `density · m`, the signed measure with Radon–Nikodym derivative
    /// `density` against `m`.
    pub fn from_density(density: &StepFunction, m: &Measure) -> Result<Self> {
        same_partition(density.partition(), m.partition())?;
        let mass = density
            .values()
            .iter()
            .zip(m.masses())
            .map(|(d, w)| d * w)
            .collect();
        Ok(SignedMeasure {
            partition: m.partition().clone(),
            mass,
        })
    }

    /// Jordan decomposition `(positive, negative)`.
    pub fn jordan(&self) -> (Measure, Measure) {
        let pos = self.mass.iter().map(Rational::pos_part).collect();
        let neg = self.mass.iter().map(Rational::neg_part).collect();
        (
            Measure {
                partition: self.partition.clone(),
                mass: pos,
            },
            Measure {
                partition: self.partition.clone(),
                mass: neg,
            },
        )
    }

    /// Variation measure `|t|`.
    pub fn variation(&self) -> Measure {
        Measure {
            partition: self.partition.clone(),
            mass: self.mass.iter().map(Rational::abs).collect(),
        }
    }

    pub fn lift(&self, target: &CellPartition) -> Result<Self> {
        Ok(SignedMeasure {
            mass: split_masses(&self.partition, &self.mass, target)?,
            partition: target.clone(),
        })
    }
}

impl StepFunction {
    pub fn new(partition: CellPartition, value: Vec<Rational>) -> Result<Self> {
        check_len(&partition, value.len())?;
        Ok(StepFunction { partition, value })
    }

    pub fn constant(partition: &CellPartition, c: Rational) -> Self {
        StepFunction {
            value: vec![c; partition.len()],
            partition: partition.clone(),
        }
    }

    pub fn partition(&self) -> &CellPartition {
        &self.partition
    }

    pub fn values(&self) -> &[Rational] {
        &self.value
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> Self {
        StepFunction {
            partition: self.partition.clone(),
            value: self.value.iter().map(f).collect(),
        }
    }

    /// Cellwise binary operation after refining both operands.
    pub fn zip_with(
        &self,
        other: &StepFunction,
        f: impl Fn(&Rational, &Rational) -> Rational,
    ) -> Result<Self> {
        let r = common_refinement(&self.partition, &other.partition)?;
        let value = r
            .left_parent
            .iter()
            .zip(&r.right_parent)
            .map(|(&i, &j)| f(&self.value[i], &other.value[j]))
            .collect();
        Ok(StepFunction {
            partition: r.partition,
            value,
        })
    }

    pub fn pos_part(&self) -> Self {
        self.map(Rational::pos_part)
    }

    pub fn neg_part(&self) -> Self {
        self.map(Rational::neg_part)
    }

    pub fn abs(&self) -> Self {
        self.map(Rational::abs)
    }

    pub fn min_value(&self) -> Rational {
        self.value.iter().min().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn max_abs(&self) -> Rational {
        self.value.iter().map(Rational::abs).max().unwrap_or_else(Rational::zero)
    }

    pub fn lift(&self, target: &CellPartition) -> Result<Self> {
        let parent = self.partition.refinement_map(target)?;
        Ok(StepFunction {
            value: parent.iter().map(|&p| self.value[p].clone()).collect(),
            partition: target.clone(),
        })
    }
}

/// Values that can be re-expressed on a finer partition.
pub trait Lift: Sized {
    fn cell_partition(&self) -> &CellPartition;
    fn lift_to(&self, target: &CellPartition) -> Result<Self>;
}

impl Lift for Measure {
    fn cell_partition(&self) -> &CellPartition {
        &self.partition
    }
    fn lift_to(&self, target: &CellPartition) -> Result<Self> {
        self.lift(target)
    }
}

impl Lift for SignedMeasure {
    fn cell_partition(&self) -> &CellPartition {
        &self.partition
    }
    fn lift_to(&self, target: &CellPartition) -> Result<Self> {
        self.lift(target)
    }
}

impl Lift for StepFunction {
    fn cell_partition(&self) -> &CellPartition {
        &self.partition
    }
    fn lift_to(&self, target: &CellPartition) -> Result<Self> {
        self.lift(target)
    }
}

fn split_masses(
    source: &CellPartition,
    mass: &[Rational],
    target: &CellPartition,
) -> Result<Vec<Rational>> {
    if source.same_as(target) {
        return Ok(mass.to_vec());
    }
    let parent = source.refinement_map(target)?;
    parent
        .iter()
        .enumerate()
        .map(|(child, &p)| {
            let share = target.base_weight(child).checked_div(&source.base_weight(p))?;
            Ok(&mass[p] * share)
        })
        .collect()
}

fn same_partition(a: &CellPartition, b: &CellPartition) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::PartitionMismatch)
    }
}

/// `Σ value · mass` over cells; `f` and `m` must share a partition.
pub fn integrate<M: CellMasses>(f: &StepFunction, m: &M) -> Result<Rational> {
    same_partition(f.partition(), m.partition())?;
    Ok(f.values().iter().zip(m.masses()).map(|(v, w)| v * w).sum())
}

/// [`integrate`] restricted to a set of cells.
pub fn integrate_over<M: CellMasses>(f: &StepFunction, m: &M, cells: &[usize]) -> Result<Rational> {
    same_partition(f.partition(), m.partition())?;
    cells
        .iter()
        .map(|&c| match (f.values().get(c), m.masses().get(c)) {
            (Some(v), Some(w)) => Ok(v * w),
            _ => Err(Error::InvalidSetIndex {
                index: c,
                cells: f.values().len(),
            }),
        })
        .sum()
}

/// Comparison used by [`sublevel_cells`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
}

impl Cmp {
    pub fn holds(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Cmp::Le => a <= b,
            Cmp::Lt => a < b,
            Cmp::Ge => a >= b,
            Cmp::Gt => a > b,
        }
    }
}

/// Indices of cells where `f op k`.
pub fn sublevel_cells(f: &StepFunction, op: Cmp, k: &Rational) -> BTreeSet<usize> {
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| op.holds(v, k))
        .map(|(i, _)| i)
        .collect()
}
