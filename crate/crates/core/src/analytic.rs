//! Closed-form per-`n` expressions attached to a sequence.
//!
//! A finite prefix cannot decide a limit in `n` or `K`. A sequence whose
//! per-`n` quantities are known in closed form can: the expression's limit
//! and infimum are exact, so verdicts derived from it are certified rather
//! than read off the prefix. Every attached form is cross-checked against
//! the computed value at each evaluated `n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// An exact rational expression in the term index `n >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ClosedForm {
    Constant {
        value: Rational,
    },
    /// `a + b / n`
    Harmonic { a: Rational, b: Rational },
    /// `c · 2^(-⌊log₂ n⌋)`
    DyadicDecay { c: Rational },
    /// `head` for `n < from`, `tail` for `n >= from`.
    From {
        from: u64,
        head: Box<ClosedForm>,
        tail: Box<ClosedForm>,
    },
}

pub(crate) fn floor_log2(n: u64) -> u32 {
    debug_assert!(n >= 1);
    63 - n.leading_zeros()
}

impl ClosedForm {
    pub fn constant(value: Rational) -> Self {
        ClosedForm::Constant { value }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn harmonic(a: Rational, b: Rational) -> Self {
        ClosedForm::Harmonic { a, b }
    }

    pub fn dyadic_decay(c: Rational) -> Self {
        ClosedForm::DyadicDecay { c }
    }

    pub fn switch_at(from: u64, head: ClosedForm, tail: ClosedForm) -> Self {
        ClosedForm::From {
            from,
            head: Box::new(head),
            tail: Box::new(tail),
        }
    }

    pub fn eval(&self, n: u64) -> Result<Rational> {
        if n == 0 {
            return Err(Error::InvalidTermIndex(0));
        }
        Ok(match self {
            ClosedForm::Constant { value } => value.clone(),
            ClosedForm::Harmonic { a, b } => a + b * Rational::integer(n).recip()?,
            ClosedForm::DyadicDecay { c } => c * Rational::pow2_neg(floor_log2(n)),
            ClosedForm::From { from, head, tail } => {
                if n < *from {
                    head.eval(n)?
                } else {
                    tail.eval(n)?
                }
            }
        })
    }

    /// `lim_{n→∞}`
    pub fn limit(&self) -> Rational {
        match self {
            ClosedForm::Constant { value } => value.clone(),
            ClosedForm::Harmonic { a, .. } => a.clone(),
            ClosedForm::DyadicDecay { .. } => Rational::zero(),
            ClosedForm::From { tail, .. } => tail.limit(),
        }
    }

    fn negate(&self) -> ClosedForm {
        match self {
            ClosedForm::Constant { value } => Self::constant(-value),
            ClosedForm::Harmonic { a, b } => Self::harmonic(-a, -b),
            ClosedForm::DyadicDecay { c } => Self::dyadic_decay(-c),
            ClosedForm::From { from, head, tail } => {
                Self::switch_at(*from, head.negate(), tail.negate())
            }
        }
    }

    /// Infimum over `start <= n < end` (`end = None` for unbounded). The
    /// range must be nonempty.
    pub fn inf_on(&self, start: u64, end: Option<u64>) -> Result<Rational> {
        let start = start.max(1);
        if let Some(e) = end {
            if e <= start {
                return Err(Error::EmptyRange(format!("n in [{start}, {e})")));
            }
        }
        let last = end.map(|e| e - 1);
        Ok(match self {
            ClosedForm::Constant { value } => value.clone(),
            // monotone in n; the unattained end is the limit
            ClosedForm::Harmonic { .. } | ClosedForm::DyadicDecay { .. } => {
                let first = self.eval(start)?;
                let other = match last {
                    Some(l) => self.eval(l)?,
                    None => self.limit(),
                };
                first.min_of(&other).clone()
            }
            ClosedForm::From { from, head, tail } => {
                let mut best: Option<Rational> = None;
                let head_end = end.map_or(*from, |e| e.min(*from));
                if start < head_end {
                    best = Some(head.inf_on(start, Some(head_end))?);
                }
                let tail_start = start.max(*from);
                if end.map_or(true, |e| tail_start < e) {
                    let t = tail.inf_on(tail_start, end)?;
                    best = Some(match best {
                        Some(b) => b.min_of(&t).clone(),
                        None => t,
                    });
                }
                best.expect("nonempty range")
            }
        })
    }

    pub fn sup_on(&self, start: u64, end: Option<u64>) -> Result<Rational> {
        Ok(-self.negate().inf_on(start, end)?)
    }
}

/// A closed form indexed by a parameter (`ε` or `K`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keyed {
    pub at: Rational,
    pub value: ClosedForm,
}

/// Closed forms and certificates for one sequence pair.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analytic {
    /// `inf_S (∫_S f⁽ⁿ⁾ dμ⁽ⁿ⁾ − ∫_S f dμ)`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_inf: Option<ClosedForm>,
    /// `sup_S |∫_S f⁽ⁿ⁾ dμ⁽ⁿ⁾ − ∫_S f dμ|`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_sup: Option<ClosedForm>,
    /// `dist(μ⁽ⁿ⁾, μ)`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv: Option<ClosedForm>,
    /// `∫ |f⁽ⁿ⁾ − f| dμ`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1: Option<ClosedForm>,
    /// `μ({f⁽ⁿ⁾ ≤ f − ε})` keyed by `ε`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exceedance: Vec<Keyed>,
    /// `∫ f⁽ⁿ⁾ 1{f⁽ⁿ⁾ ≤ −K} dμ⁽ⁿ⁾` keyed by `K`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lower_tail: Vec<Keyed>,
    /// Every `f⁽ⁿ⁾` is bounded below by this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<Rational>,
    /// `lim_{K→∞} inf_n ∫ f⁽ⁿ⁾ 1{f⁽ⁿ⁾ ≤ −K} dμ⁽ⁿ⁾`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_tail_limit: Option<Rational>,
}

impl Analytic {
    pub fn exceedance_at(&self, eps: &Rational) -> Option<&ClosedForm> {
        self.exceedance.iter().find(|k| &k.at == eps).map(|k| &k.value)
    }

    pub fn lower_tail_at(&self, k: &Rational) -> Option<&ClosedForm> {
        self.lower_tail.iter().find(|e| &e.at == k).map(|e| &e.value)
    }
}
