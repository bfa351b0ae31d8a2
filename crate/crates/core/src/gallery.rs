//! The four counterexample sequences on `[0, 1)` with Lebesgue limit
//! measure, each with exact closed forms for its per-`n` quantities.
//!
//! Examples 3.2 to 3.4 vary with the `n`-th binary digit only, so their
//! terms live on the two-cell partition `{Sₙ, [0,1) \ Sₙ}` where
//! `Sₙ = {digit n = 0}` is the union of the even-index cells at level `n`.
//! Lifting to the uniform level-`n` partition gives the literal
//! construction.

use std::fmt;
use std::str::FromStr;

use crate::analytic::{Analytic, ClosedForm, Keyed};
use crate::analytic::floor_log2;
use crate::error::{Error, Result};
use crate::measure::{CellMasses, Measure, StepFunction};
use crate::partition::{CellPartition, DyadicCylinder, MAX_DIGIT};
use crate::rational::Rational;
use crate::sequence::{SequencePair, Term};
use crate::verdict::{cross_check, evaluate_row, Grids};

/// Terms up to this index are cross-checked when an entry is built.
pub const CHECKED_PREFIX: u64 = 64;

/// Example 3.1 uses the uniform level-`k` partition up to this level and a
/// `k + 1` cell partition beyond it.
pub const LITERAL_LEVEL: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExampleId {
    E31,
    E32,
    E33,
    E34,
}

impl ExampleId {
    pub const ALL: [ExampleId; 4] = [ExampleId::E31, ExampleId::E32, ExampleId::E33, ExampleId::E34];

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleId::E31 => "3.1",
            ExampleId::E32 => "3.2",
            ExampleId::E33 => "3.3",
            ExampleId::E34 => "3.4",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownExample(s.to_string()))
    }
}

fn r(n: i64, d: i64) -> Rational {
    Rational::frac(n, d)
}

fn lebesgue_term(c: i64) -> Term {
    let p = CellPartition::unit();
    Term::new(Measure::base(&p), StepFunction::constant(&p, Rational::integer(c)))
}

fn check_index(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidTermIndex(0))
    } else {
        Ok(())
    }
}

/// `(k, j)` with `n = 2^k + j`, `0 <= j < 2^k`.
pub fn typewriter_position(n: u64) -> Result<(u32, u64)> {
    check_index(n)?;
    let k = floor_log2(n);
    Ok((k, n - (1u64 << k)))
}

/// The partition of `[0, 1)` used by Example 3.1 at index `n`, and the
/// position of the dip cell in it.
fn typewriter_partition(k: u32, j: u64) -> Result<(CellPartition, usize)> {
    if k <= LITERAL_LEVEL {
        return Ok((CellPartition::dyadic_level(k)?, j as usize));
    }
    // digit p of j counted from the most significant of k digits
    let bit = |p: u32| (j >> (k - p)) & 1 == 1;
    let mut cells = Vec::with_capacity(k as usize + 1);
    for level in 1..=k {
        let digits = (1..level).map(|p| (p, bit(p))).chain([(level, !bit(level))]);
        cells.push(DyadicCylinder::from_digits(digits)?);
    }
    cells.push(DyadicCylinder::from_digits((1..=k).map(|p| (p, bit(p))))?);
    let dip = cells.len() - 1;
    Ok((CellPartition::dyadic(cells)?, dip))
}

/// `μ⁽ⁿ⁾ = μ` Lebesgue and `f⁽ⁿ⁾ = 1 − I{[j/2ᵏ, (j+1)/2ᵏ)}` with
/// `k = ⌊log₂ n⌋`, `j = n − 2ᵏ`.
pub fn example_3_1(n: u64) -> Result<Term> {
    let (k, j) = typewriter_position(n)?;
    let (p, dip) = typewriter_partition(k, j)?;
    let values = (0..p.len())
        .map(|c| if c == dip { Rational::zero() } else { Rational::one() })
        .collect();
    Ok(Term::new(Measure::base(&p), StepFunction::new(p, values)?))
}

fn digit_partition(n: u64) -> Result<CellPartition> {
    check_index(n)?;
    if n > u64::from(MAX_DIGIT) {
        return Err(Error::InvalidTermIndex(n));
    }
    CellPartition::digit_split(n as u32)
}

/// Density `g` on `Sₙ`, `2 − g` off it, with `f⁽ⁿ⁾ = scale / density`.
fn density_term(n: u64, g_even: Rational, scale: Rational) -> Result<Term> {
    let p = digit_partition(n)?;
    let density = StepFunction::new(p.clone(), vec![g_even.clone(), Rational::integer(2) - &g_even])?;
    let measure = Measure::with_density(&density)?;
    let values = density
        .values()
        .iter()
        .map(|g| Ok(&scale * g.recip()?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Term::new(measure, StepFunction::new(p, values)?))
}

/// `μ⁽ⁿ⁾` with density `1/n` on `Sₙ` and `2 − 1/n` elsewhere, and
/// `f⁽ⁿ⁾ = −1/g⁽ⁿ⁾`.
pub fn example_3_2(n: u64) -> Result<Term> {
    check_index(n)?;
    density_term(n, Rational::integer(n as i64).recip()?, Rational::integer(-1))
}

/// Densities `½` on `Sₙ` and `3/2` elsewhere, and `f⁽ⁿ⁾ = 1/g⁽ⁿ⁾`.
pub fn example_3_3(n: u64) -> Result<Term> {
    density_term(n, r(1, 2), Rational::one())
}

/// The measures of Example 3.2 with `f⁽ⁿ⁾ ≡ 1`.
pub fn example_3_4(n: u64) -> Result<Term> {
    let m = example_3_2(n)?.measure;
    let f = StepFunction::constant(m.partition(), Rational::one());
    Ok(Term::new(m, f))
}

/// `Sₙ` as a partition of `[0,1)` together with its cell index.
pub fn s_n(n: u64) -> Result<(CellPartition, usize)> {
    Ok((digit_partition(n)?, 0))
}

pub fn limit_of(id: ExampleId) -> Term {
    match id {
        ExampleId::E32 => lebesgue_term(-1),
        _ => lebesgue_term(1),
    }
}

pub fn generator(id: ExampleId) -> fn(u64) -> Result<Term> {
    match id {
        ExampleId::E31 => example_3_1,
        ExampleId::E32 => example_3_2,
        ExampleId::E33 => example_3_3,
        ExampleId::E34 => example_3_4,
    }
}

/// `x` for `n < from`, `y` from then on. `from` is clamped to at least 1.
fn step(from: &Rational, x: Rational, y: Rational) -> ClosedForm {
    let from = from.ceil_integer();
    let from = u64::try_from(from).unwrap_or(u64::MAX).max(1);
    if from == 1 {
        ClosedForm::constant(y)
    } else {
        ClosedForm::switch_at(from, ClosedForm::constant(x), ClosedForm::constant(y))
    }
}

fn exceedance_form(id: ExampleId, eps: &Rational) -> ClosedForm {
    match id {
        ExampleId::E31 if eps <= &Rational::one() => ClosedForm::dyadic_decay(Rational::one()),
        ExampleId::E31 | ExampleId::E34 => ClosedForm::zero(),
        // −n <= −1 − ε on Sₙ exactly when n >= 1 + ε
        ExampleId::E32 => step(&(eps + Rational::one()), Rational::zero(), r(1, 2)),
        ExampleId::E33 if eps <= &r(1, 3) => ClosedForm::constant(r(1, 2)),
        ExampleId::E33 => ClosedForm::zero(),
    }
}

fn lower_tail_form(id: ExampleId, k: &Rational) -> Result<ClosedForm> {
    if id != ExampleId::E32 {
        return Ok(ClosedForm::zero());
    }
    let half = r(1, 2);
    if k > &Rational::one() {
        // only the Sₙ cell, where f⁽ⁿ⁾ = −n carries mass 1/(2n)
        return Ok(step(k, Rational::zero(), -half));
    }
    if k <= &half {
        return Ok(ClosedForm::constant(Rational::integer(-1)));
    }
    // off Sₙ, f⁽ⁿ⁾ = −n/(2n−1) <= −K exactly when n <= K/(2K−1)
    let q = k * (Rational::integer(2) * k - Rational::one()).recip()?;
    let upto = if q.denom() == &1.into() { q + Rational::one() } else { q };
    Ok(step(&upto, Rational::integer(-1), -half))
}

/// Closed forms for one example, with exceedance and lower tails keyed at
/// the given grids plus eps = 1, 1/3 and K = 2.
pub fn analytic_for(id: ExampleId, eps_grid: &[Rational], k_grid: &[Rational]) -> Result<Analytic> {
    let mut eps: Vec<Rational> = eps_grid.to_vec();
    eps.extend([Rational::one(), r(1, 3)]);
    let mut ks: Vec<Rational> = k_grid.to_vec();
    ks.push(Rational::integer(2));
    for (name, v) in eps.iter().map(|e| ("eps", e)).chain(ks.iter().map(|k| ("K", k))) {
        if !v.is_positive() {
            return Err(Error::NonPositive { name, value: v.clone() });
        }
    }
    eps.sort();
    eps.dedup();
    ks.sort();
    ks.dedup();

    let half = r(1, 2);
    let mut a = Analytic {
        exceedance: eps
            .iter()
            .map(|e| Keyed {
                at: e.clone(),
                value: exceedance_form(id, e),
            })
            .collect(),
        lower_tail: ks
            .iter()
            .map(|k| {
                Ok(Keyed {
                    at: k.clone(),
                    value: lower_tail_form(id, k)?,
                })
            })
            .collect::<Result<_>>()?,
        ..Analytic::default()
    };
    match id {
        ExampleId::E31 => {
            a.gap_inf = Some(ClosedForm::dyadic_decay(Rational::integer(-1)));
            a.gap_sup = Some(ClosedForm::dyadic_decay(Rational::one()));
            a.tv = Some(ClosedForm::zero());
            a.l1 = Some(ClosedForm::dyadic_decay(Rational::one()));
            a.lower_bound = Some(Rational::zero());
        }
        ExampleId::E32 => {
            a.gap_inf = Some(ClosedForm::zero());
            a.gap_sup = Some(ClosedForm::zero());
            a.tv = Some(ClosedForm::harmonic(Rational::one(), Rational::integer(-1)));
            a.lower_tail_limit = Some(-half);
        }
        ExampleId::E33 => {
            a.gap_inf = Some(ClosedForm::zero());
            a.gap_sup = Some(ClosedForm::zero());
            a.tv = Some(ClosedForm::constant(half));
            a.l1 = Some(ClosedForm::constant(r(2, 3)));
            a.lower_bound = Some(Rational::zero());
        }
        ExampleId::E34 => {
            a.gap_inf = Some(ClosedForm::harmonic(-half.clone(), half.clone()));
            a.gap_sup = Some(ClosedForm::harmonic(half.clone(), -half));
            a.tv = Some(ClosedForm::harmonic(Rational::one(), Rational::integer(-1)));
            a.l1 = Some(ClosedForm::zero());
            a.lower_bound = Some(Rational::one());
        }
    }
    Ok(a)
}

/// One example with its generator, limit pair and closed forms.
#[derive(Debug, Clone)]
pub struct GalleryEntry {
    id: ExampleId,
    sequence: SequencePair,
}

impl GalleryEntry {
    /// Builds the entry and checks every closed form against the computed
    /// values for `n <= 64`.
    pub fn new(id: ExampleId, eps_grid: &[Rational], k_grid: &[Rational]) -> Result<Self> {
        let entry = Self::unchecked(id, eps_grid, k_grid)?;
        if let Some(m) = entry.verify(CHECKED_PREFIX)?.into_iter().next() {
            return Err(Error::ExpectationMismatch {
                quantity: m.quantity,
                n: m.n,
                expected: m.expected,
                computed: m.computed,
            });
        }
        Ok(entry)
    }

    pub fn with_default_grids(id: ExampleId) -> Result<Self> {
        let g = Grids::default();
        Self::new(id, &g.eps, &g.k)
    }

    /// Same as [`GalleryEntry::new`] without the construction check.
    pub fn unchecked(id: ExampleId, eps_grid: &[Rational], k_grid: &[Rational]) -> Result<Self> {
        let analytic = analytic_for(id, eps_grid, k_grid)?;
        let sequence = SequencePair::generated(generator(id), limit_of(id)).with_analytic(analytic);
        Ok(GalleryEntry { id, sequence })
    }

    pub fn id(&self) -> ExampleId {
        self.id
    }

    pub fn sequence(&self) -> &SequencePair {
        &self.sequence
    }

    pub fn into_sequence(self) -> SequencePair {
        self.sequence
    }

    pub fn term(&self, n: u64) -> Result<Term> {
        self.sequence.term(n)
    }

    pub fn limit(&self) -> &Term {
        self.sequence.limit()
    }

    pub fn analytic(&self) -> &Analytic {
        self.sequence.analytic().expect("gallery entries carry closed forms")
    }

    /// Closed-form mismatches for `n <= prefix`.
    pub fn verify(&self, prefix: u64) -> Result<Vec<crate::verdict::Mismatch>> {
        let rows = (1..=prefix)
            .map(|n| evaluate_row(&self.sequence, n))
            .collect::<Result<Vec<_>>>()?;
        cross_check(&self.sequence, &rows, prefix)
    }
}
