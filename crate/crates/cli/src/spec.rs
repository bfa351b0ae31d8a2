//! JSON sequence-spec files: a cell space, listed terms and a limit pair,
//! every rational written as a `"p/q"` string.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use uniform_fatou::{
    Analytic, CellMasses, CellPartition, Lift, Measure, PartitionKind, Rational, SequencePair,
    StepFunction, Term,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    /// The `2^level` dyadic intervals of `[0, 1)`, left to right.
    DyadicUnitInterval { level: u32 },
    AtomSet { atoms: Vec<String> },
}

impl Space {
    pub fn partition(&self) -> uniform_fatou::Result<CellPartition> {
        match self {
            Space::DyadicUnitInterval { level } => CellPartition::dyadic_level(*level),
            Space::AtomSet { atoms } => CellPartition::atoms(atoms.iter().cloned()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellData {
    pub masses: Vec<Rational>,
    pub values: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub n: u64,
    pub masses: Vec<Rational>,
    pub values: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpecFile {
    pub space: Space,
    pub terms: Vec<TermSpec>,
    pub limit: CellData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<Analytic>,
}

fn data(path: impl Into<String>, message: impl ToString) -> CliError {
    CliError::Data {
        path: path.into(),
        message: message.to_string(),
    }
}

fn build_term(p: &CellPartition, masses: &[Rational], values: &[Rational]) -> uniform_fatou::Result<Term> {
    Ok(Term::new(
        Measure::new(p.clone(), masses.to_vec())?,
        StepFunction::new(p.clone(), values.to_vec())?,
    ))
}

impl SequenceSpecFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        // serde_json messages end with "at line L column C"
        serde_json::from_str(text).map_err(|e| data(origin, e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec files always serialize");
        s.push('\n');
        s
    }

    /// Validates the file and builds the sequence it describes.
    pub fn to_sequence(&self, origin: &str) -> Result<SequencePair, CliError> {
        let p = self
            .space
            .partition()
            .map_err(|e| data(format!("{origin}: space"), e))?;
        let limit = build_term(&p, &self.limit.masses, &self.limit.values)
            .map_err(|e| data(format!("{origin}: limit"), e))?;
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                build_term(&p, &t.masses, &t.values)
                    .map(|term| (t.n, term))
                    .map_err(|e| data(format!("{origin}: terms[{i}] (n = {})", t.n), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let seq = SequencePair::listed(terms, limit).map_err(|e| data(format!("{origin}: terms"), e))?;
        Ok(match &self.analytic {
            Some(a) => seq.with_analytic(a.clone()),
            None => seq,
        })
    }

    /// Writes the terms `n <= prefix` of `seq` on one shared space: the atom
    /// set, or the uniform dyadic level deep enough to resolve every cell.
    pub fn from_sequence(seq: &SequencePair, prefix: u64) -> uniform_fatou::Result<Self> {
        let common = seq.common_partition(prefix)?;
        let (space, target) = match common.kind() {
            PartitionKind::AtomSet => {
                let atoms = (0..common.len()).map(|c| common.cell_label(c)).collect();
                (Space::AtomSet { atoms }, common)
            }
            PartitionKind::DyadicUnitInterval => {
                let level = common
                    .cylinders()
                    .expect("dyadic partition")
                    .iter()
                    .flat_map(|c| c.digits())
                    .map(|(pos, _)| pos)
                    .max()
                    .unwrap_or(0);
                let target = CellPartition::dyadic_level(level)?;
                (Space::DyadicUnitInterval { level }, target)
            }
        };
        let dump = |t: &Term| -> uniform_fatou::Result<(Vec<Rational>, Vec<Rational>)> {
            Ok((
                t.measure.lift_to(&target)?.masses().to_vec(),
                t.function.lift_to(&target)?.values().to_vec(),
            ))
        };
        let terms = seq
            .indices(prefix)
            .into_iter()
            .map(|n| {
                let (masses, values) = dump(&seq.term(n)?)?;
                Ok(TermSpec { n, masses, values })
            })
            .collect::<uniform_fatou::Result<Vec<_>>>()?;
        let (masses, values) = dump(seq.limit())?;
        Ok(SequenceSpecFile {
            space,
            terms,
            limit: CellData { masses, values },
            analytic: seq.analytic().cloned(),
        })
    }
}
