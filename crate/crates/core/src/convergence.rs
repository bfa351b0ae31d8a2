//! Distances between measures and the per-`n` functionals behind the
//! convergence conditions: exceedance sets, lower tails and uniform
//! integrability tails.
//!
//! Every binary operation refines its operands to a common partition first.

use crate::error::{Error, Result};
use crate::measure::{integrate, sublevel_cells, CellMasses, Cmp, Lift, Measure, StepFunction};
use crate::partition::{common_refinement, common_refinement_all, CellPartition};
use crate::rational::Rational;
use crate::sequence::SequencePair;

fn positive(name: &'static str, value: &Rational) -> Result<()> {
    if value.is_positive() {
        Ok(())
    } else {
        Err(Error::NonPositive {
            name,
            value: value.clone(),
        })
    }
}

/// `Σ_c |m(c) − v(c)|`, the supremum of `|∫ h dm − ∫ h dv|` over `h` with
/// values in `[−1, 1]`.
pub fn tv_distance<M: CellMasses + Lift>(m: &M, v: &M) -> Result<Rational> {
    let r = common_refinement(m.cell_partition(), v.cell_partition())?;
    let (a, b) = (m.lift_to(&r.partition)?, v.lift_to(&r.partition)?);
    Ok(a.masses()
        .iter()
        .zip(b.masses())
        .map(|(x, y)| (x - y).abs())
        .sum())
}

/// Finite family of test sets, each a set of cell indices of `partition`.
#[derive(Debug, Clone)]
pub struct TestSetFamily {
    partition: CellPartition,
    sets: Vec<Vec<usize>>,
}

impl TestSetFamily {
    pub fn new(partition: CellPartition, sets: Vec<Vec<usize>>) -> Result<Self> {
        let cells = partition.len();
        for s in &sets {
            if let Some(&index) = s.iter().find(|&&i| i >= cells) {
                return Err(Error::InvalidSetIndex { index, cells });
            }
        }
        Ok(TestSetFamily { partition, sets })
    }

    /// Every dyadic interval of level `0..=level`, and each one's complement.
    pub fn dyadic(level: u32) -> Result<Self> {
        let partition = CellPartition::dyadic_level(level)?;
        let mut sets = Vec::new();
        let total = 1usize << level;
        for l in 0..=level {
            let width = 1usize << (level - l);
            for j in 0..(1usize << l) {
                let inside: Vec<usize> = (j * width..(j + 1) * width).collect();
                if l > 0 {
                    sets.push(
                        (0..total)
                            .filter(|i| *i < j * width || *i >= (j + 1) * width)
                            .collect(),
                    );
                }
                sets.push(inside);
            }
        }
        Ok(TestSetFamily { partition, sets })
    }

    pub fn partition(&self) -> &CellPartition {
        &self.partition
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// The same family re-expressed on the common refinement with `q`.
    pub fn refine_with(&self, q: &CellPartition) -> Result<Self> {
        Ok(self.refine_tracking(q)?.0)
    }

    fn refine_tracking(&self, q: &CellPartition) -> Result<(Self, Vec<usize>)> {
        let r = common_refinement(&self.partition, q)?;
        let mut member = vec![false; self.partition.len()];
        let sets = self
            .sets
            .iter()
            .map(|s| {
                member.iter_mut().for_each(|m| *m = false);
                s.iter().for_each(|&i| member[i] = true);
                (0..r.partition.len())
                    .filter(|&c| member[r.left_parent[c]])
                    .collect()
            })
            .collect();
        Ok((
            TestSetFamily {
                partition: r.partition,
                sets,
            },
            r.right_parent,
        ))
    }

    /// Adds the union of `cells` of partition `q` as a further test set.
    pub fn with_set_from(&self, q: &CellPartition, cells: &[usize]) -> Result<Self> {
        if let Some(&index) = cells.iter().find(|&&i| i >= q.len()) {
            return Err(Error::InvalidSetIndex {
                index,
                cells: q.len(),
            });
        }
        let (mut fam, right_parent) = self.refine_tracking(q)?;
        let set = (0..fam.partition.len())
            .filter(|&c| cells.contains(&right_parent[c]))
            .collect();
        fam.sets.push(set);
        Ok(fam)
    }
}

/// `max_{S ∈ fam} |m(S) − v(S)|`; zero for an empty family.
pub fn setwise_gap(m: &Measure, v: &Measure, fam: &TestSetFamily) -> Result<Rational> {
    let common =
        common_refinement_all([m.cell_partition(), v.cell_partition(), fam.partition()])?;
    let (a, b) = (m.lift(&common)?, v.lift(&common)?);
    let fam = fam.refine_with(&common)?;
    let mut worst = Rational::zero();
    for s in fam.sets() {
        let d = (a.mass_of(s)? - b.mass_of(s)?).abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

fn align(f: &StepFunction, g: &StepFunction, m: &Measure) -> Result<(StepFunction, StepFunction, Measure)> {
    let common = common_refinement_all([f.partition(), g.partition(), m.cell_partition()])?;
    Ok((f.lift(&common)?, g.lift(&common)?, m.lift(&common)?))
}

fn align_one(f: &StepFunction, m: &Measure) -> Result<(StepFunction, Measure)> {
    let r = common_refinement(f.partition(), m.cell_partition())?;
    Ok((f.lift(&r.partition)?, m.lift(&r.partition)?))
}

/// `m({g ≤ f − eps})`.
pub fn exceedance_measure(
    f: &StepFunction,
    g: &StepFunction,
    m: &Measure,
    eps: &Rational,
) -> Result<Rational> {
    positive("eps", eps)?;
    let (f, g, m) = align(f, g, m)?;
    Ok(f.values()
        .iter()
        .zip(g.values())
        .zip(m.masses())
        .filter(|((fv, gv), _)| *gv <= &(*fv - eps))
        .map(|(_, w)| w.clone())
        .sum())
}

/// `∫ f · 1{f ≤ −K} dm`, always `<= 0`.
pub fn lower_tail(f: &StepFunction, m: &Measure, k: &Rational) -> Result<Rational> {
    positive("K", k)?;
    let (f, m) = align_one(f, m)?;
    Ok(sublevel_cells(&f, Cmp::Le, &-k)
        .into_iter()
        .map(|c| &f.values()[c] * &m.masses()[c])
        .sum())
}

/// `∫ |f| · 1{|f| ≥ K} dm`, always `>= 0`.
pub fn ui_tail(f: &StepFunction, m: &Measure, k: &Rational) -> Result<Rational> {
    positive("K", k)?;
    let (f, m) = align_one(f, m)?;
    let abs = f.abs();
    Ok(sublevel_cells(&abs, Cmp::Ge, k)
        .into_iter()
        .map(|c| &abs.values()[c] * &m.masses()[c])
        .sum())
}

/// `∫ |f − g| dm`.
pub fn l1_distance(f: &StepFunction, g: &StepFunction, m: &Measure) -> Result<Rational> {
    let (f, g, m) = align(f, g, m)?;
    let diff = f.zip_with(&g, |a, b| (a - b).abs())?;
    integrate(&diff, &m)
}

/// `m({|g − f| ≥ eps})`.
pub fn distance_exceedance(
    f: &StepFunction,
    g: &StepFunction,
    m: &Measure,
    eps: &Rational,
) -> Result<Rational> {
    positive("eps", eps)?;
    let (f, g, m) = align(f, g, m)?;
    Ok(f.values()
        .iter()
        .zip(g.values())
        .zip(m.masses())
        .filter(|((a, b), _)| (*a - *b).abs() >= *eps)
        .map(|(_, w)| w.clone())
        .sum())
}

/// `μ({|f⁽ⁿ⁾ − f| ≥ eps})` for each available `n <= prefix`.
pub fn convergence_in_measure_prefix(
    seq: &SequencePair,
    eps: &Rational,
    prefix: u64,
) -> Result<Vec<(u64, Rational)>> {
    positive("eps", eps)?;
    if prefix == 0 {
        return Err(Error::EmptyRange("prefix must be at least 1".into()));
    }
    seq.indices(prefix)
        .into_iter()
        .map(|n| {
            let t = seq.term(n)?;
            let v = distance_exceedance(seq.limit_function(), &t.function, seq.limit_measure(), eps)?;
            Ok((n, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SignedMeasure;

    fn r(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    fn atoms(k: usize) -> CellPartition {
        CellPartition::atoms((0..k).map(|i| format!("a{i}"))).unwrap()
    }

    #[test]
    fn tv_of_identical_is_zero() {
        let m = Measure::base(&CellPartition::dyadic_level(3).unwrap());
        assert_eq!(tv_distance(&m, &m).unwrap(), Rational::zero());
    }

    #[test]
    fn tv_refines_before_comparing() {
        // same Lebesgue measure on two different partitions
        let a = Measure::base(&CellPartition::dyadic_level(1).unwrap());
        let b = Measure::lebesgue();
        assert_eq!(tv_distance(&a, &b).unwrap(), Rational::zero());
    }

    #[test]
    fn tv_on_signed_measures() {
        let p = atoms(2);
        let a = SignedMeasure::new(p.clone(), vec![r(1, 1), r(-1, 1)]).unwrap();
        let b = SignedMeasure::new(p, vec![r(-1, 1), r(0, 1)]).unwrap();
        assert_eq!(tv_distance(&a, &b).unwrap(), r(3, 1));
    }

    #[test]
    fn tv_incompatible() {
        let a = Measure::base(&atoms(2));
        assert!(tv_distance(&a, &Measure::lebesgue()).is_err());
    }

    #[test]
    fn nonpositive_parameters_rejected() {
        let p = atoms(1);
        let f = StepFunction::constant(&p, Rational::one());
        let m = Measure::base(&p);
        assert!(matches!(exceedance_measure(&f, &f, &m, &Rational::zero()), Err(Error::NonPositive { .. })));
        assert!(lower_tail(&f, &m, &r(-1, 1)).is_err());
        assert!(ui_tail(&f, &m, &Rational::zero()).is_err());
    }

    #[test]
    fn exceedance_zero_when_dominating() {
        let p = atoms(3);
        let f = StepFunction::new(p.clone(), vec![r(0, 1), r(1, 1), r(2, 1)]).unwrap();
        let g = f.map(|v| v + Rational::one());
        let m = Measure::base(&p);
        for eps in [r(1, 8), r(1, 1), r(5, 1)] {
            assert_eq!(exceedance_measure(&f, &g, &m, &eps).unwrap(), Rational::zero());
        }
    }

    #[test]
    fn exceedance_is_non_strict() {
        let p = atoms(1);
        let f = StepFunction::constant(&p, Rational::one());
        let g = StepFunction::constant(&p, r(1, 2));
        let m = Measure::base(&p);
        assert_eq!(exceedance_measure(&f, &g, &m, &r(1, 2)).unwrap(), Rational::one());
    }

    #[test]
    fn tails_simple_cases() {
        let p = CellPartition::dyadic_level(2).unwrap();
        let m = Measure::base(&p);
        let nonneg = StepFunction::new(p.clone(), vec![r(0, 1), r(3, 1), r(9, 1), r(1, 2)]).unwrap();
        for k in [r(1, 2), r(1, 1), r(4, 1)] {
            assert_eq!(lower_tail(&nonneg, &m, &k).unwrap(), Rational::zero());
        }
        let minus_five = StepFunction::constant(&p, r(-5, 1));
        assert_eq!(lower_tail(&minus_five, &m, &r(3, 1)).unwrap(), r(-5, 1));
        assert_eq!(ui_tail(&minus_five, &m, &r(5, 1)).unwrap(), r(5, 1));
        assert_eq!(ui_tail(&minus_five, &m, &r(6, 1)).unwrap(), Rational::zero());
    }

    #[test]
    fn l1_of_equal_functions() {
        let p = atoms(3);
        let f = StepFunction::new(p.clone(), vec![r(1, 1), r(-2, 1), r(3, 1)]).unwrap();
        assert_eq!(l1_distance(&f, &f, &Measure::base(&p)).unwrap(), Rational::zero());
    }

    #[test]
    fn dyadic_family_shape() {
        let fam = TestSetFamily::dyadic(2).unwrap();
        // level 0: 1 set; level 1: 2 + 2 complements; level 2: 4 + 4
        assert_eq!(fam.len(), 13);
        assert!(fam.sets().contains(&vec![0, 1, 2, 3]));
        assert!(fam.sets().contains(&vec![0, 2, 3]));
    }

    #[test]
    fn family_rejects_bad_index() {
        let p = atoms(2);
        assert!(matches!(
            TestSetFamily::new(p, vec![vec![0, 2]]),
            Err(Error::InvalidSetIndex { index: 2, cells: 2 })
        ));
    }

    #[test]
    fn setwise_gap_bounded_by_tv() {
        let p = CellPartition::dyadic_level(2).unwrap();
        let a = Measure::new(p.clone(), vec![r(1, 2), r(0, 1), r(1, 4), r(1, 4)]).unwrap();
        let b = Measure::base(&p);
        let fam = TestSetFamily::dyadic(1).unwrap();
        let gap = setwise_gap(&a, &b, &fam).unwrap();
        // [0,1/2): 1/2 vs 1/2; [1/2,1): 1/2 vs 1/2
        assert_eq!(gap, Rational::zero());
        let fine = TestSetFamily::dyadic(2).unwrap();
        assert_eq!(setwise_gap(&a, &b, &fine).unwrap(), r(1, 4));
        assert!(setwise_gap(&a, &b, &fine).unwrap() <= tv_distance(&a, &b).unwrap());
        assert_eq!(setwise_gap(&a, &a, &fine).unwrap(), Rational::zero());
    }

    #[test]
    fn extra_set_from_digit_split() {
        let fam = TestSetFamily::dyadic(1)
            .unwrap()
            .with_set_from(&CellPartition::digit_split(2).unwrap(), &[0])
            .unwrap();
        let last = fam.sets().last().unwrap();
        let leb = Measure::base(fam.partition());
        assert_eq!(leb.mass_of(last).unwrap(), r(1, 2));
        assert_eq!(fam.partition().len(), 4);
    }
}
