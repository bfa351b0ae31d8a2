//! Report assembly. JSON is canonical; Markdown renders the same data.

use std::fmt::Write as _;

use serde::Serialize;
use uniform_fatou::verdict::{
    Behavior, ConditionI, ConditionII, DominatedDiagnostics, Mismatch, Regime, Row, TraceStatus,
};
use uniform_fatou::{Consistency, Rational, Verdict, VerdictReport, Witness};

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub source: String,
    /// Inclusive range of the listed rows.
    pub n_range: [u64; 2],
    pub prefix: u64,
    pub eps_grid: Vec<Rational>,
    #[serde(rename = "K_grid")]
    pub k_grid: Vec<Rational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdicts {
    pub gap: TraceStatus,
    pub tv: TraceStatus,
    pub condition_i: ConditionI,
    pub condition_ii: ConditionII,
    pub consistency: Consistency,
    pub consistency_flag: Option<bool>,
    pub regime: Regime,
    pub dominated: DominatedDiagnostics,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witnesses {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_i: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_ii: Option<Witness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub meta: Meta,
    pub per_n_rows: Vec<Row>,
    pub verdicts: Verdicts,
    pub witnesses: Witnesses,
    pub mismatches: Vec<Mismatch>,
}

impl Report {
    /// Keeps the rows with `n >= first`; verdicts still cover the whole
    /// prefix.
    pub fn new(command: &'static str, source: String, first: u64, v: VerdictReport) -> Self {
        let rows: Vec<Row> = v.rows.into_iter().filter(|r| r.n >= first).collect();
        let last = rows.last().map_or(v.prefix, |r| r.n);
        Report {
            meta: Meta {
                tool: "ufatou",
                version: env!("CARGO_PKG_VERSION"),
                command,
                source,
                n_range: [first, last],
                prefix: v.prefix,
                eps_grid: v.eps_grid,
                k_grid: v.k_grid,
            },
            per_n_rows: rows,
            witnesses: Witnesses {
                condition_i: v.condition_i.witness.clone(),
                condition_ii: v.condition_ii.witness.clone(),
            },
            verdicts: Verdicts {
                gap: v.gap,
                tv: v.tv,
                condition_i: v.condition_i,
                condition_ii: v.condition_ii,
                consistency: v.consistency,
                consistency_flag: v.consistency_flag,
                regime: v.regime,
                dominated: v.dominated,
            },
            mismatches: v.mismatches,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let m = &self.meta;
        let _ = writeln!(out, "# {} {}, n = {}..{}\n", m.command, m.source, m.n_range[0], m.n_range[1]);
        out.push_str("| n | gap_inf | gap_sup | tv | l1 | gap witness |\n");
        out.push_str("|---|---|---|---|---|---|\n");
        for r in &self.per_n_rows {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                r.n,
                r.gap_inf,
                r.gap_sup,
                r.tv,
                r.l1,
                if r.gap_witness.is_empty() {
                    "∅".to_string()
                } else {
                    r.gap_witness.join(" ∪ ")
                }
            );
        }
        let v = &self.verdicts;
        out.push('\n');
        let _ = writeln!(out, "- gap: {}", status(&v.gap));
        let _ = writeln!(out, "- total variation: {}", status(&v.tv));
        let _ = writeln!(out, "- condition (i): {}", verdict(v.condition_i.verdict, v.condition_i.certified));
        let _ = writeln!(out, "- condition (ii): {}", verdict(v.condition_ii.verdict, v.condition_ii.certified));
        let _ = writeln!(out, "- consistency: {}", consistency(v.consistency));
        for (name, w) in [("(i)", &self.witnesses.condition_i), ("(ii)", &self.witnesses.condition_ii)] {
            if let Some(w) = w {
                let mut at = Vec::new();
                if let Some(n) = w.n {
                    at.push(format!("n = {n}"));
                }
                if let Some(e) = &w.eps {
                    at.push(format!("eps = {e}"));
                }
                if let Some(k) = &w.k {
                    at.push(format!("K = {k}"));
                }
                let _ = writeln!(out, "- witness {name}: {} at {}; {}", w.value, at.join(", "), w.reason);
            }
        }
        if self.mismatches.is_empty() {
            out.push_str("- closed forms: all match\n");
        } else {
            for mm in &self.mismatches {
                let _ = writeln!(
                    out,
                    "- MISMATCH {} at n = {}: expected {}, computed {}",
                    mm.quantity, mm.n, mm.expected, mm.computed
                );
            }
        }
        out
    }
}

fn status(s: &TraceStatus) -> String {
    let b = match s.behavior {
        Behavior::Vanishes => "vanishes",
        Behavior::BoundedAway => "bounded away from 0",
        Behavior::Undetermined => "undetermined",
    };
    match (&s.limit, s.certified) {
        (Some(l), true) => format!("{b} (certified, limit {l})"),
        (_, true) => format!("{b} (certified)"),
        _ => format!("{b} (prefix only)"),
    }
}

fn verdict(v: Verdict, certified: bool) -> String {
    let s = match v {
        Verdict::HoldsOnPrefix => "HOLDS_ON_PREFIX",
        Verdict::Fails => "FAILS",
        Verdict::Inconclusive => "INCONCLUSIVE",
    };
    if certified {
        format!("{s} (certified)")
    } else {
        s.to_string()
    }
}

fn consistency(c: Consistency) -> &'static str {
    match c {
        Consistency::Consistent => "consistent",
        Consistency::Inconsistent => "INCONSISTENT",
        Consistency::HypothesisNotMet => "hypothesis not met (no total-variation convergence)",
        Consistency::Undetermined => "undetermined",
    }
}
