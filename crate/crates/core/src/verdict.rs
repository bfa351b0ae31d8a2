//! Three-valued verdicts for the two conditions characterising the uniform
//! gap inequality, and the report tying them to the gap and
//! total-variation traces.
//!
//! A finite prefix can only show that a trace has reached zero. Limits in
//! `n` and `K` are decided only when the sequence carries [`Analytic`]
//! closed forms, and such verdicts are marked `certified`.

use serde::Serialize;

use crate::analytic::Analytic;
use crate::convergence::{
    convergence_in_measure_prefix, exceedance_measure, l1_distance, lower_tail, tv_distance, ui_tail,
};
use crate::error::{Error, Result};
use crate::fatou::{gap_inf, gap_sup};
use crate::rational::Rational;
use crate::sequence::SequencePair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    HoldsOnPrefix,
    Fails,
    Inconclusive,
}

/// Concrete evidence behind a [`Verdict::Fails`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Rational>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<Rational>,
    pub value: Rational,
    pub reason: String,
}

/// Evaluation grids for `ε`, `K` and the number of terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grids {
    pub eps: Vec<Rational>,
    pub k: Vec<Rational>,
    pub prefix: u64,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            eps: vec![
                Rational::one(),
                Rational::frac(1, 2),
                Rational::frac(1, 4),
                Rational::frac(1, 8),
            ],
            k: [1, 2, 4, 8, 16].into_iter().map(Rational::integer).collect(),
            prefix: 64,
        }
    }
}

fn validate_grid(name: &str, grid: &[Rational]) -> Result<Vec<Rational>> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} grid is empty")));
    }
    if let Some(bad) = grid.iter().find(|x| !x.is_positive()) {
        return Err(Error::InvalidGrid(format!("{name} value {bad} is not positive")));
    }
    let mut out: Vec<Rational> = Vec::with_capacity(grid.len());
    for x in grid {
        if !out.contains(x) {
            out.push(x.clone());
        }
    }
    Ok(out)
}

fn validate_prefix(prefix: u64) -> Result<()> {
    if prefix == 0 {
        Err(Error::InvalidGrid("prefix must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// One `μ({f⁽ⁿ⁾ ≤ f − ε})` trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExceedanceTrace {
    pub eps: Rational,
    pub values: Vec<(u64, Rational)>,
    /// Exact `lim_n` from a closed form, when one is attached.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_limit: Option<Rational>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionI {
    pub per_eps: Vec<ExceedanceTrace>,
    pub verdict: Verdict,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

fn exceedance_trace(seq: &SequencePair, eps: &Rational, prefix: u64) -> Result<Vec<(u64, Rational)>> {
    seq.indices(prefix)
        .into_iter()
        .map(|n| {
            let t = seq.term(n)?;
            Ok((n, exceedance_measure(seq.limit_function(), &t.function, seq.limit_measure(), eps)?))
        })
        .collect()
}

/// For each `ε`, the trace of `μ({f⁽ⁿ⁾ ≤ f − ε})` over `n <= prefix`.
///
/// `FAILS` needs a closed form with a positive limit; `HOLDS_ON_PREFIX`
/// needs either a closed form with limit zero or every trace ending at zero.
pub fn check_condition_i(seq: &SequencePair, eps_grid: &[Rational], prefix: u64) -> Result<ConditionI> {
    let grid = validate_grid("eps", eps_grid)?;
    validate_prefix(prefix)?;
    let analytic = seq.analytic();
    let mut per_eps = Vec::with_capacity(grid.len());
    let mut witness = None;
    let mut certified = true;
    for eps in grid {
        let values = exceedance_trace(seq, &eps, prefix)?;
        let certified_limit = analytic.and_then(|a| a.exceedance_at(&eps)).map(|f| f.limit());
        let last_zero = values.last().is_some_and(|(_, v)| v.is_zero());
        let verdict = match &certified_limit {
            Some(l) if l.is_positive() => match values.iter().rev().find(|(_, v)| v.is_positive()) {
                Some((n, v)) => {
                    if witness.is_none() {
                        witness = Some(Witness {
                            n: Some(*n),
                            eps: Some(eps.clone()),
                            k: None,
                            value: v.clone(),
                            reason: format!("exceedance converges to {l} > 0"),
                        });
                    }
                    Verdict::Fails
                }
                None => Verdict::Inconclusive,
            },
            Some(_) => Verdict::HoldsOnPrefix,
            None => {
                certified = false;
                if last_zero {
                    Verdict::HoldsOnPrefix
                } else {
                    Verdict::Inconclusive
                }
            }
        };
        per_eps.push(ExceedanceTrace {
            eps,
            values,
            certified_limit,
            verdict,
        });
    }
    let verdict = combine(per_eps.iter().map(|t| t.verdict));
    Ok(ConditionI {
        per_eps,
        verdict,
        certified: certified && verdict != Verdict::Inconclusive,
        witness: if verdict == Verdict::Fails { witness } else { None },
    })
}

fn combine(verdicts: impl Iterator<Item = Verdict>) -> Verdict {
    let mut all_hold = true;
    for v in verdicts {
        match v {
            Verdict::Fails => return Verdict::Fails,
            Verdict::Inconclusive => all_hold = false,
            Verdict::HoldsOnPrefix => {}
        }
    }
    if all_hold {
        Verdict::HoldsOnPrefix
    } else {
        Verdict::Inconclusive
    }
}

/// One `∫ f⁽ⁿ⁾ 1{f⁽ⁿ⁾ ≤ −K} dμ⁽ⁿ⁾` trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TailTrace {
    #[serde(rename = "K")]
    pub k: Rational,
    pub values: Vec<(u64, Rational)>,
    /// `inf_n` over the prefix and the first index attaining it.
    pub prefix_inf: Rational,
    pub argmin: u64,
    /// `inf_{N <= n <= prefix}` for each available `N` (the shifted form).
    pub shifted_inf: Vec<(u64, Rational)>,
    /// `inf` over all `n` from an attached closed form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_inf: Option<Rational>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionII {
    pub per_k: Vec<TailTrace>,
    pub verdict: Verdict,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// For each `K`, the lower tails over `n <= prefix` and their infimum.
///
/// Certification comes from `lower_bound` (tails vanish identically past
/// `−bound`) or from `lower_tail_limit`. Without either the condition holds
/// on the prefix only when every tail at the largest `K` is zero.
pub fn check_condition_ii(seq: &SequencePair, k_grid: &[Rational], prefix: u64) -> Result<ConditionII> {
    let grid = validate_grid("K", k_grid)?;
    validate_prefix(prefix)?;
    let indices = seq.indices(prefix);
    if indices.is_empty() {
        return Err(Error::EmptyRange(format!("no terms with n <= {prefix}")));
    }
    let terms = indices
        .iter()
        .map(|&n| seq.term(n))
        .collect::<Result<Vec<_>>>()?;
    let analytic = seq.analytic();
    let limit = analytic.and_then(|a| a.lower_tail_limit.clone());
    let failing = limit.as_ref().is_some_and(Rational::is_negative);

    let mut per_k = Vec::with_capacity(grid.len());
    for k in grid {
        let values = indices
            .iter()
            .zip(&terms)
            .map(|(&n, t)| Ok((n, lower_tail(&t.function, &t.measure, &k)?)))
            .collect::<Result<Vec<_>>>()?;
        let (argmin, prefix_inf) = values
            .iter()
            .fold(None::<(u64, Rational)>, |best, (n, v)| match best {
                Some((_, ref b)) if b <= v => best,
                _ => Some((*n, v.clone())),
            })
            .expect("nonempty");
        let mut shifted_inf: Vec<(u64, Rational)> = Vec::with_capacity(values.len());
        for (n, v) in values.iter().rev() {
            let m = match shifted_inf.last() {
                Some((_, m)) if m < v => m.clone(),
                _ => v.clone(),
            };
            shifted_inf.push((*n, m));
        }
        shifted_inf.reverse();
        let certified_inf = analytic
            .and_then(|a| a.lower_tail_at(&k))
            .map(|f| f.inf_on(1, None))
            .transpose()?;
        let verdict = if prefix_inf.is_zero() {
            Verdict::HoldsOnPrefix
        } else if failing {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        };
        per_k.push(TailTrace {
            k,
            values,
            prefix_inf,
            argmin,
            shifted_inf,
            certified_inf,
            verdict,
        });
    }

    let largest = per_k
        .iter()
        .max_by(|a, b| a.k.cmp(&b.k))
        .expect("nonempty grid");
    let (verdict, certified, witness) = match (limit, analytic.and_then(|a| a.lower_bound.clone())) {
        (Some(l), _) if l.is_negative() => {
            let w = per_k
                .iter()
                .filter(|t| t.prefix_inf.is_negative())
                .max_by(|a, b| a.k.cmp(&b.k))
                .map(|t| Witness {
                    n: Some(t.argmin),
                    eps: None,
                    k: Some(t.k.clone()),
                    value: t.prefix_inf.clone(),
                    reason: format!("tail infimum converges to {l} < 0 as K grows"),
                });
            match w {
                Some(w) => (Verdict::Fails, true, Some(w)),
                None => (Verdict::Inconclusive, false, None),
            }
        }
        (Some(_), _) | (None, Some(_)) => (Verdict::HoldsOnPrefix, true, None),
        (None, None) => {
            if largest.prefix_inf.is_zero() {
                (Verdict::HoldsOnPrefix, false, None)
            } else {
                (Verdict::Inconclusive, false, None)
            }
        }
    };
    Ok(ConditionII {
        per_k,
        verdict,
        certified,
        witness,
    })
}

/// Limiting behaviour of a nonnegative-magnitude trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    Vanishes,
    BoundedAway,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStatus {
    pub behavior: Behavior,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<Rational>,
}

impl TraceStatus {
    fn from_trace(values: &[Rational], form_limit: Option<Rational>) -> Self {
        match form_limit {
            Some(l) => TraceStatus {
                behavior: if l.is_zero() {
                    Behavior::Vanishes
                } else {
                    Behavior::BoundedAway
                },
                certified: true,
                limit: Some(l),
            },
            None => TraceStatus {
                behavior: if values.last().is_some_and(Rational::is_zero) {
                    Behavior::Vanishes
                } else {
                    Behavior::Undetermined
                },
                certified: false,
                limit: None,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Consistency {
    /// Gap behaviour agrees with the two conditions.
    Consistent,
    /// Disagreement under the theorem's hypothesis: an implementation fault.
    Inconsistent,
    /// Total-variation convergence is not established; the equivalence does
    /// not apply.
    HypothesisNotMet,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub n: u64,
    pub gap_inf: Rational,
    /// Minimising cells, labelled on the refinement used for this `n`.
    pub gap_witness: Vec<String>,
    pub gap_sup: Rational,
    pub tv: Rational,
    /// `∫ |f⁽ⁿ⁾ − f| dμ`
    pub l1: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub quantity: String,
    pub n: u64,
    pub expected: Rational,
    pub computed: Rational,
}

/// Which specialisations of the theorem the prefix falls under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Regime {
    /// Every `f⁽ⁿ⁾` on the prefix is nonnegative, so condition (ii) is automatic.
    pub nonnegative_functions: bool,
    /// Every `μ⁽ⁿ⁾` on the prefix equals `μ`.
    pub fixed_measure: bool,
}

/// Diagnostics for the two-sided (dominated convergence) variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominatedDiagnostics {
    pub gap_sup: TraceStatus,
    /// `μ({|f⁽ⁿ⁾ − f| ≥ ε})` per grid `ε`.
    pub in_measure: Vec<(Rational, Vec<(u64, Rational)>)>,
    /// `sup_n ∫ |f⁽ⁿ⁾| 1{|f⁽ⁿ⁾| ≥ K} dμ⁽ⁿ⁾` over the prefix, per grid `K`.
    pub ui_tail_sup: Vec<(Rational, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdictReport {
    pub prefix: u64,
    pub eps_grid: Vec<Rational>,
    #[serde(rename = "K_grid")]
    pub k_grid: Vec<Rational>,
    pub rows: Vec<Row>,
    pub gap: TraceStatus,
    pub tv: TraceStatus,
    pub condition_i: ConditionI,
    pub condition_ii: ConditionII,
    pub regime: Regime,
    pub dominated: DominatedDiagnostics,
    pub consistency: Consistency,
    /// Whether the gap pattern matches the two conditions; absent while any
    /// part is undetermined.
    pub consistency_flag: Option<bool>,
    pub mismatches: Vec<Mismatch>,
}

/// Gap, total-variation and `L¹` values at one index.
pub fn evaluate_row(seq: &SequencePair, n: u64) -> Result<Row> {
    let t = seq.term(n)?;
    let (f, mu) = (seq.limit_function(), seq.limit_measure());
    let gi = gap_inf(f, mu, &t.function, &t.measure)?;
    Ok(Row {
        n,
        gap_witness: gi.witness.iter().map(|&c| gi.partition.cell_label(c)).collect(),
        gap_inf: gi.value,
        gap_sup: gap_sup(f, mu, &t.function, &t.measure)?,
        tv: tv_distance(&t.measure, mu)?,
        l1: l1_distance(&t.function, f, mu)?,
    })
}

/// Compares every attached closed form with the computed value for each
/// available `n <= prefix`.
pub fn cross_check(seq: &SequencePair, rows: &[Row], prefix: u64) -> Result<Vec<Mismatch>> {
    let Some(a) = seq.analytic() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    let mut push = |quantity: String, n: u64, expected: Rational, computed: &Rational| {
        if &expected != computed {
            out.push(Mismatch {
                quantity,
                n,
                expected,
                computed: computed.clone(),
            });
        }
    };
    for row in rows {
        let n = row.n;
        let fields: [(&str, &Option<_>, &Rational); 4] = [
            ("gap_inf", &a.gap_inf, &row.gap_inf),
            ("gap_sup", &a.gap_sup, &row.gap_sup),
            ("tv", &a.tv, &row.tv),
            ("l1", &a.l1, &row.l1),
        ];
        for (name, form, computed) in fields {
            if let Some(form) = form {
                push(name.to_string(), n, form.eval(n)?, computed);
            }
        }
    }
    for keyed in &a.exceedance {
        for (n, v) in exceedance_trace(seq, &keyed.at, prefix)? {
            push(format!("exceedance[eps={}]", keyed.at), n, keyed.value.eval(n)?, &v);
        }
    }
    for n in seq.indices(prefix) {
        let t = seq.term(n)?;
        for keyed in &a.lower_tail {
            let v = lower_tail(&t.function, &t.measure, &keyed.at)?;
            push(format!("lower_tail[K={}]", keyed.at), n, keyed.value.eval(n)?, &v);
        }
        if let Some(b) = &a.lower_bound {
            let lo = t.function.min_value();
            if &lo < b {
                push("lower_bound".to_string(), n, b.clone(), &lo);
            }
        }
    }
    Ok(out)
}

fn regime(seq: &SequencePair, prefix: u64) -> Result<Regime> {
    let mut nonnegative = true;
    let mut fixed = true;
    for n in seq.indices(prefix) {
        let t = seq.term(n)?;
        nonnegative &= !t.function.min_value().is_negative();
        fixed &= tv_distance(&t.measure, seq.limit_measure())?.is_zero();
    }
    Ok(Regime {
        nonnegative_functions: nonnegative,
        fixed_measure: fixed,
    })
}

fn dominated(seq: &SequencePair, rows: &[Row], grids: &Grids, analytic: Option<&Analytic>) -> Result<DominatedDiagnostics> {
    let sups: Vec<Rational> = rows.iter().map(|r| r.gap_sup.clone()).collect();
    let gap_sup = TraceStatus::from_trace(&sups, analytic.and_then(|a| a.gap_sup.as_ref()).map(|f| f.limit()));
    let in_measure = grids
        .eps
        .iter()
        .map(|e| Ok((e.clone(), convergence_in_measure_prefix(seq, e, grids.prefix)?)))
        .collect::<Result<Vec<_>>>()?;
    let terms = seq
        .indices(grids.prefix)
        .into_iter()
        .map(|n| seq.term(n))
        .collect::<Result<Vec<_>>>()?;
    let ui_tail_sup = grids
        .k
        .iter()
        .map(|k| {
            let mut best = Rational::zero();
            for t in &terms {
                let v = ui_tail(&t.function, &t.measure, k)?;
                if v > best {
                    best = v;
                }
            }
            Ok((k.clone(), best))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DominatedDiagnostics {
        gap_sup,
        in_measure,
        ui_tail_sup,
    })
}

/// Gap and total-variation traces plus both condition verdicts, and whether
/// they agree with the characterisation.
pub fn theorem1_report(seq: &SequencePair, grids: &Grids) -> Result<VerdictReport> {
    let eps_grid = validate_grid("eps", &grids.eps)?;
    let k_grid = validate_grid("K", &grids.k)?;
    validate_prefix(grids.prefix)?;
    let grids = Grids {
        eps: eps_grid,
        k: k_grid,
        prefix: grids.prefix,
    };
    let rows = seq
        .indices(grids.prefix)
        .into_iter()
        .map(|n| evaluate_row(seq, n))
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(Error::EmptyRange(format!("no terms with n <= {}", grids.prefix)));
    }
    let analytic = seq.analytic();

    let gaps: Vec<Rational> = rows.iter().map(|r| r.gap_inf.clone()).collect();
    let tvs: Vec<Rational> = rows.iter().map(|r| r.tv.clone()).collect();
    let gap = TraceStatus::from_trace(&gaps, analytic.and_then(|a| a.gap_inf.as_ref()).map(|f| f.limit()));
    let tv = TraceStatus::from_trace(&tvs, analytic.and_then(|a| a.tv.as_ref()).map(|f| f.limit()));

    let condition_i = check_condition_i(seq, &grids.eps, grids.prefix)?;
    let condition_ii = check_condition_ii(seq, &grids.k, grids.prefix)?;

    let determinate = gap.behavior != Behavior::Undetermined
        && condition_i.verdict != Verdict::Inconclusive
        && condition_ii.verdict != Verdict::Inconclusive;
    let both_hold =
        condition_i.verdict == Verdict::HoldsOnPrefix && condition_ii.verdict == Verdict::HoldsOnPrefix;
    let consistency_flag = determinate.then(|| (gap.behavior == Behavior::Vanishes) == both_hold);
    let consistency = if tv.behavior != Behavior::Vanishes {
        Consistency::HypothesisNotMet
    } else {
        match consistency_flag {
            Some(true) => Consistency::Consistent,
            Some(false) => Consistency::Inconsistent,
            None => Consistency::Undetermined,
        }
    };

    let mismatches = cross_check(seq, &rows, grids.prefix)?;
    Ok(VerdictReport {
        prefix: grids.prefix,
        regime: regime(seq, grids.prefix)?,
        dominated: dominated(seq, &rows, &grids, analytic)?,
        eps_grid: grids.eps,
        k_grid: grids.k,
        rows,
        gap,
        tv,
        condition_i,
        condition_ii,
        consistency,
        consistency_flag,
        mismatches,
    })
}
