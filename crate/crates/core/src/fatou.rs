//! Uniform gap functionals and the constructions around them.
//!
//! For a pair `(f, m)` and a competitor `(g, v)` on a cell algebra the set
//! functional `S ↦ ∫_S g dv − ∫_S f dm` is additive over cells, so with
//! `Δ_c = g_c·v(c) − f_c·m(c)`:
//!
//! * `inf_S = Σ_c min(0, Δ_c)`, attained on `{c : Δ_c < 0}`;
//! * `sup_S |·| = max(Σ_c Δ_c⁺, Σ_c Δ_c⁻)`.
//!
//! [`brute_force_gap`] enumerates every subset instead and serves as the
//! oracle for both.

use crate::convergence::{exceedance_measure, ui_tail};
use crate::error::{Error, Result};
use crate::measure::{CellMasses, Lift, Measure, SignedMeasure, StepFunction};
use crate::partition::{common_refinement, common_refinement_all, CellPartition};
use crate::rational::Rational;
use crate::sequence::SequencePair;

/// Cell cap for subset enumeration.
pub const BRUTE_FORCE_MAX_CELLS: usize = 20;

struct Aligned {
    partition: CellPartition,
    f: StepFunction,
    m: Measure,
    g: StepFunction,
    v: Measure,
}

fn align4(f: &StepFunction, m: &Measure, g: &StepFunction, v: &Measure) -> Result<Aligned> {
    let partition = common_refinement_all([
        f.partition(),
        m.cell_partition(),
        g.partition(),
        v.cell_partition(),
    ])?;
    Ok(Aligned {
        f: f.lift(&partition)?,
        m: m.lift(&partition)?,
        g: g.lift(&partition)?,
        v: v.lift(&partition)?,
        partition,
    })
}

/// `Δ_c = g_c·v(c) − f_c·m(c)` on the common refinement.
pub fn cell_deltas(
    f: &StepFunction,
    m: &Measure,
    g: &StepFunction,
    v: &Measure,
) -> Result<(CellPartition, Vec<Rational>)> {
    let a = align4(f, m, g, v)?;
    let delta = (0..a.partition.len())
        .map(|c| &a.g.values()[c] * &a.v.masses()[c] - &a.f.values()[c] * &a.m.masses()[c])
        .collect();
    Ok((a.partition, delta))
}

/// Infimum of the gap together with a minimising set of cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapInf {
    pub value: Rational,
    /// Cells of `partition` with negative delta.
    pub witness: Vec<usize>,
    pub partition: CellPartition,
}

/// `inf_S (∫_S g dv − ∫_S f dm)`, always `<= 0`.
pub fn gap_inf(f: &StepFunction, m: &Measure, g: &StepFunction, v: &Measure) -> Result<GapInf> {
    let (partition, delta) = cell_deltas(f, m, g, v)?;
    let witness: Vec<usize> = (0..delta.len()).filter(|&c| delta[c].is_negative()).collect();
    let value = witness.iter().map(|&c| &delta[c]).sum();
    Ok(GapInf {
        value,
        witness,
        partition,
    })
}

/// `sup_S |∫_S g dv − ∫_S f dm|`, always `>= |gap_inf|`.
pub fn gap_sup(f: &StepFunction, m: &Measure, g: &StepFunction, v: &Measure) -> Result<Rational> {
    let (_, delta) = cell_deltas(f, m, g, v)?;
    let pos: Rational = delta.iter().map(Rational::pos_part).sum();
    let neg: Rational = delta.iter().map(Rational::neg_part).sum();
    Ok(pos.max_of(&neg).clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMode {
    Inf,
    Sup,
}

/// Exhaustive evaluation of the gap over all `2^cells` subsets.
pub fn brute_force_gap(
    f: &StepFunction,
    m: &Measure,
    g: &StepFunction,
    v: &Measure,
    mode: GapMode,
) -> Result<Rational> {
    let a = align4(f, m, g, v)?;
    let cells = a.partition.len();
    if cells > BRUTE_FORCE_MAX_CELLS {
        return Err(Error::TooManyCells {
            cells,
            max: BRUTE_FORCE_MAX_CELLS,
        });
    }
    let upper: Vec<Rational> = (0..cells).map(|c| &a.g.values()[c] * &a.v.masses()[c]).collect();
    let lower: Vec<Rational> = (0..cells).map(|c| &a.f.values()[c] * &a.m.masses()[c]).collect();

    // Gray-code walk: one cell enters or leaves S per step.
    let mut in_set = vec![false; cells];
    let (mut int_g, mut int_f) = (Rational::zero(), Rational::zero());
    let mut best = Rational::zero();
    for step in 1u64..(1u64 << cells) {
        let c = step.trailing_zeros() as usize;
        if in_set[c] {
            int_g -= &upper[c];
            int_f -= &lower[c];
        } else {
            int_g += &upper[c];
            int_f += &lower[c];
        }
        in_set[c] = !in_set[c];
        let diff = &int_g - &int_f;
        match mode {
            GapMode::Inf if diff < best => best = diff,
            GapMode::Sup if diff.abs() > best => best = diff.abs(),
            _ => {}
        }
    }
    Ok(best)
}

/// `max_s Σ_c s_c (m(c) − v(c))` over every sign vector `s ∈ {−1, 1}^cells`,
/// the enumeration oracle for the total-variation distance.
pub fn brute_force_tv<M: CellMasses + Lift>(m: &M, v: &M) -> Result<Rational> {
    let r = common_refinement(m.cell_partition(), v.cell_partition())?;
    let (a, b) = (m.lift_to(&r.partition)?, v.lift_to(&r.partition)?);
    let cells = r.partition.len();
    if cells > BRUTE_FORCE_MAX_CELLS {
        return Err(Error::TooManyCells {
            cells,
            max: BRUTE_FORCE_MAX_CELLS,
        });
    }
    let diff: Vec<Rational> = a.masses().iter().zip(b.masses()).map(|(x, y)| x - y).collect();
    let mut best: Option<Rational> = None;
    for signs in 0u32..1 << cells {
        let total: Rational = diff
            .iter()
            .enumerate()
            .map(|(c, d)| if signs >> c & 1 == 1 { d.clone() } else { -d })
            .sum();
        if best.as_ref().map_or(true, |b| &total > b) {
            best = Some(total);
        }
    }
    Ok(best.expect("at least one sign vector"))
}

/// Cellwise `dt/dm`, with `0/0 = 0`, on the common refinement.
pub fn radon_nikodym(t: &SignedMeasure, m: &Measure) -> Result<StepFunction> {
    let r = common_refinement(t.cell_partition(), m.cell_partition())?;
    let (t, m) = (t.lift(&r.partition)?, m.lift(&r.partition)?);
    let value = t
        .masses()
        .iter()
        .zip(m.masses())
        .enumerate()
        .map(|(cell, (tc, mc))| {
            if mc.is_zero() {
                if tc.is_zero() {
                    Ok(Rational::zero())
                } else {
                    Err(Error::NotAbsolutelyContinuous {
                        cell,
                        mass: tc.clone(),
                    })
                }
            } else {
                tc.checked_div(mc)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    StepFunction::new(r.partition, value)
}

/// `|t|({|dt/dm| ≥ K})`.
pub fn tv_measure_tail(t: &SignedMeasure, m: &Measure, k: &Rational) -> Result<Rational> {
    let density = radon_nikodym(t, m)?;
    ui_tail(&density, m, k)
}

/// One step of the subsequence search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionStep {
    pub k: u32,
    /// `2^-k`
    pub bound: Rational,
    /// Chosen index, or the best index searched when the bound was missed.
    pub index: Option<u64>,
    pub exceedance: Option<Rational>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsequenceReport {
    pub eps: Rational,
    pub budget: u64,
    pub steps: Vec<SelectionStep>,
}

impl SubsequenceReport {
    pub fn is_complete(&self) -> bool {
        self.steps.iter().all(|s| s.accepted)
    }

    /// Accepted indices `n_1 < n_2 < …`.
    pub fn indices(&self) -> Vec<u64> {
        self.steps
            .iter()
            .filter(|s| s.accepted)
            .filter_map(|s| s.index)
            .collect()
    }

    /// Smallest exceedance reached at the step that failed, if any.
    pub fn best_failed(&self) -> Option<&Rational> {
        self.steps
            .iter()
            .find(|s| !s.accepted)
            .and_then(|s| s.exceedance.as_ref())
    }

    /// Recomputes every accepted step against `seq`.
    pub fn verify(&self, seq: &SequencePair) -> Result<bool> {
        let mut prev = 0;
        for s in self.steps.iter().filter(|s| s.accepted) {
            let n = s.index.expect("accepted step has an index");
            if n <= prev {
                return Ok(false);
            }
            prev = n;
            let t = seq.term(n)?;
            let e = exceedance_measure(seq.limit_function(), &t.function, seq.limit_measure(), &self.eps)?;
            if e > s.bound {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Greedy selection of `n_1 < … < n_depth <= budget` with
/// `μ({f⁽ⁿᵏ⁾ ≤ f − eps}) <= 2^-k`. Stops at the first step that cannot be
/// met within the budget and records the best exceedance seen there.
pub fn extract_subsequence(
    seq: &SequencePair,
    eps: &Rational,
    depth: u32,
    budget: u64,
) -> Result<SubsequenceReport> {
    if !eps.is_positive() {
        return Err(Error::NonPositive {
            name: "eps",
            value: eps.clone(),
        });
    }
    if depth == 0 {
        return Err(Error::EmptyRange("depth must be at least 1".into()));
    }
    let candidates = seq.indices(budget);
    let mut steps = Vec::with_capacity(depth as usize);
    let mut cursor = 0usize;
    for k in 1..=depth {
        let bound = Rational::pow2_neg(k);
        let mut best: Option<(u64, Rational)> = None;
        let mut chosen = None;
        while cursor < candidates.len() {
            let n = candidates[cursor];
            cursor += 1;
            let t = seq.term(n)?;
            let e = exceedance_measure(seq.limit_function(), &t.function, seq.limit_measure(), eps)?;
            if e <= bound {
                chosen = Some((n, e));
                break;
            }
            if best.as_ref().map_or(true, |(_, b)| e < *b) {
                best = Some((n, e));
            }
        }
        match chosen {
            Some((n, e)) => steps.push(SelectionStep {
                k,
                bound,
                index: Some(n),
                exceedance: Some(e),
                accepted: true,
            }),
            None => {
                steps.push(SelectionStep {
                    k,
                    bound,
                    index: best.as_ref().map(|(n, _)| *n),
                    exceedance: best.map(|(_, e)| e),
                    accepted: false,
                });
                break;
            }
        }
    }
    Ok(SubsequenceReport {
        eps: eps.clone(),
        budget,
        steps,
    })
}

/// Cellwise minimum of `f⁽ⁿ⁾` over the given indices.
pub fn pointwise_min_over(seq: &SequencePair, indices: &[u64]) -> Result<StepFunction> {
    if indices.is_empty() {
        return Err(Error::EmptyRange("no indices".into()));
    }
    let functions = indices
        .iter()
        .map(|&n| Ok(seq.term(n)?.function))
        .collect::<Result<Vec<_>>>()?;
    let common = common_refinement_all(functions.iter().map(StepFunction::partition))?;
    let mut acc: Option<Vec<Rational>> = None;
    for f in &functions {
        let lifted = f.lift(&common)?;
        acc = Some(match acc {
            None => lifted.values().to_vec(),
            Some(cur) => cur
                .into_iter()
                .zip(lifted.values())
                .map(|(a, b)| if *b < a { b.clone() } else { a })
                .collect(),
        });
    }
    StepFunction::new(common, acc.expect("nonempty"))
}

/// `min_{start <= n <= prefix} f⁽ⁿ⁾`, a lower proxy for `liminf f⁽ⁿ⁾` that
/// increases with `start`.
pub fn pointwise_liminf_prefix(seq: &SequencePair, prefix: u64, start: u64) -> Result<StepFunction> {
    if start > prefix || start == 0 {
        return Err(Error::EmptyRange(format!("n in [{start}, {prefix}]")));
    }
    let indices: Vec<u64> = seq.indices(prefix).into_iter().filter(|&n| n >= start).collect();
    pointwise_min_over(seq, &indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::CellPartition;
    use crate::sequence::Term;

    fn r(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    fn atoms(k: usize) -> CellPartition {
        CellPartition::atoms((0..k).map(|i| format!("a{i}"))).unwrap()
    }

    #[test]
    fn identical_pairs_have_zero_gaps() {
        let p = atoms(3);
        let f = StepFunction::new(p.clone(), vec![r(1, 1), r(-2, 1), r(3, 1)]).unwrap();
        let m = Measure::new(p, vec![r(1, 2), r(1, 4), r(1, 4)]).unwrap();
        let gi = gap_inf(&f, &m, &f, &m).unwrap();
        assert_eq!(gi.value, Rational::zero());
        assert!(gi.witness.is_empty());
        assert_eq!(gap_sup(&f, &m, &f, &m).unwrap(), Rational::zero());
        for mode in [GapMode::Inf, GapMode::Sup] {
            assert_eq!(brute_force_gap(&f, &m, &f, &m, mode).unwrap(), Rational::zero());
        }
    }

    #[test]
    fn hand_computed_gap() {
        // deltas: +1/2, -1/4, -1/8
        let p = atoms(3);
        let one = StepFunction::constant(&p, Rational::one());
        let m = Measure::new(p.clone(), vec![r(0, 1), r(1, 2), r(1, 4)]).unwrap();
        let v = Measure::new(p, vec![r(1, 2), r(1, 4), r(1, 8)]).unwrap();
        let gi = gap_inf(&one, &m, &one, &v).unwrap();
        assert_eq!(gi.value, r(-3, 8));
        assert_eq!(gi.witness, vec![1, 2]);
        assert_eq!(gap_sup(&one, &m, &one, &v).unwrap(), r(1, 2));
        assert_eq!(brute_force_gap(&one, &m, &one, &v, GapMode::Inf).unwrap(), r(-3, 8));
        assert_eq!(brute_force_gap(&one, &m, &one, &v, GapMode::Sup).unwrap(), r(1, 2));
    }

    #[test]
    fn brute_force_cap() {
        let p = atoms(21);
        let f = StepFunction::constant(&p, Rational::one());
        let m = Measure::base(&p);
        assert!(matches!(
            brute_force_gap(&f, &m, &f, &m, GapMode::Inf),
            Err(Error::TooManyCells { cells: 21, max: 20 })
        ));
    }

    #[test]
    fn radon_nikodym_basics() {
        let p = atoms(3);
        let m = Measure::new(p.clone(), vec![r(1, 2), r(0, 1), r(1, 4)]).unwrap();
        let d = radon_nikodym(&m.to_signed(), &m).unwrap();
        assert_eq!(d.values(), &[r(1, 1), r(0, 1), r(1, 1)]);

        let bad = SignedMeasure::new(p, vec![r(1, 1), r(1, 3), r(0, 1)]).unwrap();
        assert_eq!(
            radon_nikodym(&bad, &m),
            Err(Error::NotAbsolutelyContinuous { cell: 1, mass: r(1, 3) })
        );
        assert!(tv_measure_tail(&bad, &m, &r(1, 1)).is_err());
    }

    #[test]
    fn measure_tail_constant_density() {
        let p = CellPartition::dyadic_level(2).unwrap();
        let m = Measure::base(&p);
        let t = SignedMeasure::new(p, m.masses().iter().map(|x| x * r(-5, 1)).collect()).unwrap();
        assert_eq!(tv_measure_tail(&t, &m, &r(2, 1)).unwrap(), r(5, 1));
        assert_eq!(tv_measure_tail(&m.to_signed(), &m, &r(2, 1)).unwrap(), Rational::zero());
    }

    fn constant_seq() -> SequencePair {
        let p = CellPartition::dyadic_level(1).unwrap();
        let f = StepFunction::new(p.clone(), vec![r(1, 1), r(-1, 2)]).unwrap();
        let limit = Term::new(Measure::base(&p), f);
        let l = limit.clone();
        SequencePair::generated(move |_| Ok(l.clone()), limit)
    }

    #[test]
    fn constant_sequence_subsequence() {
        let seq = constant_seq();
        let rep = extract_subsequence(&seq, &r(1, 2), 5, 10).unwrap();
        assert!(rep.is_complete());
        assert_eq!(rep.indices(), vec![1, 2, 3, 4, 5]);
        assert!(rep.steps.iter().all(|s| s.exceedance == Some(Rational::zero())));
        assert!(rep.verify(&seq).unwrap());
    }

    #[test]
    fn subsequence_budget_exhausted() {
        let seq = constant_seq();
        let rep = extract_subsequence(&seq, &r(1, 2), 5, 3).unwrap();
        assert!(!rep.is_complete());
        assert_eq!(rep.steps.len(), 4);
        assert_eq!(rep.steps[3].index, None);
        assert!(extract_subsequence(&seq, &Rational::zero(), 1, 3).is_err());
        assert!(extract_subsequence(&seq, &r(1, 1), 0, 3).is_err());
    }

    #[test]
    fn liminf_of_constant_is_itself() {
        let seq = constant_seq();
        let low = pointwise_liminf_prefix(&seq, 8, 3).unwrap();
        assert_eq!(&low, seq.limit_function());
        assert!(pointwise_liminf_prefix(&seq, 2, 3).is_err());
    }
}
