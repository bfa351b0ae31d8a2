//! Indexed families `n ↦ (μ⁽ⁿ⁾, f⁽ⁿ⁾)` together with their limit pair.

use std::fmt;
use std::sync::Arc;

use crate::analytic::Analytic;
use crate::error::{Error, Result};
use crate::measure::{Lift, Measure, StepFunction};
use crate::partition::{common_refinement, common_refinement_all, CellPartition};

/// One `(measure, function)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub measure: Measure,
    pub function: StepFunction,
}

impl Term {
    pub fn new(measure: Measure, function: StepFunction) -> Self {
        Term { measure, function }
    }

    /// Both parts on the common refinement of their partitions.
    pub fn aligned(&self) -> Result<Term> {
        let r = common_refinement(self.measure.cell_partition(), self.function.partition())?;
        self.lift_to(&r.partition)
    }

    pub fn lift_to(&self, target: &CellPartition) -> Result<Term> {
        Ok(Term {
            measure: self.measure.lift(target)?,
            function: self.function.lift(target)?,
        })
    }

    pub fn partitions(&self) -> [&CellPartition; 2] {
        [self.measure.cell_partition(), self.function.partition()]
    }
}

type Generator = Arc<dyn Fn(u64) -> Result<Term> + Send + Sync>;

#[derive(Clone)]
enum Terms {
    /// Sorted by strictly increasing index.
    Listed(Vec<(u64, Term)>),
    Generated(Generator),
}

#[derive(Clone)]
pub struct SequencePair {
    terms: Terms,
    limit: Term,
    analytic: Option<Analytic>,
}

impl fmt::Debug for SequencePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = match &self.terms {
            Terms::Listed(t) => format!("{} listed terms", t.len()),
            Terms::Generated(_) => "generated".to_string(),
        };
        f.debug_struct("SequencePair")
            .field("terms", &terms)
            .field("limit", &self.limit)
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

impl SequencePair {
    /// Explicit terms with strictly increasing indices `n >= 1`.
    pub fn listed(terms: Vec<(u64, Term)>, limit: Term) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidSequence("no terms".into()));
        }
        for w in terms.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidSequence(format!(
                    "term indices must increase strictly ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if terms[0].0 == 0 {
            return Err(Error::InvalidTermIndex(0));
        }
        for (n, t) in &terms {
            for p in t.partitions() {
                for q in limit.partitions() {
                    common_refinement(p, q).map_err(|e| {
                        Error::InvalidSequence(format!("term {n} incompatible with limit: {e}"))
                    })?;
                }
            }
        }
        Ok(SequencePair {
            terms: Terms::Listed(terms),
            limit,
            analytic: None,
        })
    }

    /// Terms produced on demand for every `n >= 1`.
    pub fn generated(
        generator: impl Fn(u64) -> Result<Term> + Send + Sync + 'static,
        limit: Term,
    ) -> Self {
        SequencePair {
            terms: Terms::Generated(Arc::new(generator)),
            limit,
            analytic: None,
        }
    }

    pub fn with_analytic(mut self, analytic: Analytic) -> Self {
        self.analytic = Some(analytic);
        self
    }

    pub fn analytic(&self) -> Option<&Analytic> {
        self.analytic.as_ref()
    }

    pub fn limit(&self) -> &Term {
        &self.limit
    }

    pub fn limit_measure(&self) -> &Measure {
        &self.limit.measure
    }

    pub fn limit_function(&self) -> &StepFunction {
        &self.limit.function
    }

    /// Indices `n <= prefix` for which a term exists.
    pub fn indices(&self, prefix: u64) -> Vec<u64> {
        match &self.terms {
            Terms::Listed(t) => t.iter().map(|(n, _)| *n).take_while(|n| *n <= prefix).collect(),
            Terms::Generated(_) => (1..=prefix).collect(),
        }
    }

    /// Largest listed index, `None` for generated sequences.
    pub fn last_index(&self) -> Option<u64> {
        match &self.terms {
            Terms::Listed(t) => t.last().map(|(n, _)| *n),
            Terms::Generated(_) => None,
        }
    }

    pub fn term(&self, n: u64) -> Result<Term> {
        if n == 0 {
            return Err(Error::InvalidTermIndex(0));
        }
        match &self.terms {
            Terms::Listed(t) => t
                .binary_search_by_key(&n, |(k, _)| *k)
                .map(|i| t[i].1.clone())
                .map_err(|_| Error::InvalidTermIndex(n)),
            Terms::Generated(g) => g(n),
        }
    }

    /// Common refinement of the limit pair and the listed terms `n <= prefix`.
    pub fn common_partition(&self, prefix: u64) -> Result<CellPartition> {
        let terms = self
            .indices(prefix)
            .into_iter()
            .map(|n| self.term(n))
            .collect::<Result<Vec<_>>>()?;
        let parts = self
            .limit
            .partitions()
            .into_iter()
            .chain(terms.iter().flat_map(|t| t.partitions()));
        common_refinement_all(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    fn unit_term(c: i64) -> Term {
        let p = CellPartition::unit();
        Term::new(Measure::base(&p), StepFunction::constant(&p, Rational::integer(c)))
    }

    #[test]
    fn listed_indices_must_increase() {
        let e = SequencePair::listed(vec![(2, unit_term(1)), (2, unit_term(1))], unit_term(1));
        assert!(e.is_err());
        assert!(SequencePair::listed(vec![(0, unit_term(1))], unit_term(1)).is_err());
        assert!(SequencePair::listed(vec![], unit_term(1)).is_err());
    }

    #[test]
    fn listed_rejects_atoms_against_interval() {
        let a = CellPartition::atoms(["x"]).unwrap();
        let t = Term::new(Measure::base(&a), StepFunction::constant(&a, Rational::one()));
        assert!(SequencePair::listed(vec![(1, t)], unit_term(1)).is_err());
    }

    #[test]
    fn sparse_indices() {
        let s = SequencePair::listed(vec![(1, unit_term(1)), (4, unit_term(2))], unit_term(1)).unwrap();
        assert_eq!(s.indices(3), vec![1]);
        assert_eq!(s.indices(10), vec![1, 4]);
        assert!(s.term(2).is_err());
        assert_eq!(s.term(4).unwrap(), unit_term(2));
    }

    #[test]
    fn generated_terms() {
        let s = SequencePair::generated(|n| Ok(unit_term(n as i64)), unit_term(0));
        assert_eq!(s.indices(3), vec![1, 2, 3]);
        assert_eq!(s.term(3).unwrap(), unit_term(3));
        assert!(s.last_index().is_none());
    }
}
