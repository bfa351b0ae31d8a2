//! Seeded random instances and the closed-form versus enumeration check.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use uniform_fatou::{
    brute_force_gap, brute_force_tv, common_refinement, gap_inf, gap_sup, tv_distance, CellMasses,
    CellPartition, DyadicCylinder, GapMode, Lift, Measure, Rational, StepFunction,
};

/// Two `(function, measure)` pairs, each on its own partition.
#[derive(Debug, Clone)]
pub struct Instance {
    pub f: StepFunction,
    pub m: Measure,
    pub g: StepFunction,
    pub v: Measure,
}

/// The closed forms are evaluated with this offset added when the harness
/// is asked to corrupt them.
pub const CORRUPTION: (i64, i64) = (1, 97);

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Zero one time in five, otherwise a small positive rational.
pub fn random_mass(rng: &mut impl Rng) -> Rational {
    if rng.gen_ratio(1, 5) {
        return Rational::zero();
    }
    let d = *[1, 2, 3, 4, 8].choose(rng).expect("nonempty");
    Rational::frac(rng.gen_range(1..=8), d)
}

pub fn random_value(rng: &mut impl Rng) -> Rational {
    let d = *[1, 2, 3].choose(rng).expect("nonempty");
    Rational::frac(rng.gen_range(-8..=8), d)
}

/// Random splits of `[0, 1)` along binary digits 1 to 4. Most splits use
/// the next digit, which keeps cells intervals; the rest produce general
/// cylinders.
pub fn random_dyadic(rng: &mut impl Rng, leaves: usize) -> CellPartition {
    let leaves = leaves.clamp(1, 16);
    let mut cells = vec![DyadicCylinder::UNIT];
    while cells.len() < leaves {
        let i = rng.gen_range(0..cells.len());
        let fixed: Vec<u32> = cells[i].digits().into_iter().map(|(p, _)| p).collect();
        let free: Vec<u32> = (1..=4).filter(|p| !fixed.contains(p)).collect();
        let Some(&first) = free.first() else { continue };
        let pos = if rng.gen_ratio(3, 4) {
            first
        } else {
            *free.choose(rng).expect("nonempty")
        };
        let c = cells[i];
        let half = |bit| {
            c.intersect(&DyadicCylinder::digit(pos, bit).expect("digit in range"))
                .expect("free digit splits the cell")
        };
        cells[i] = half(false);
        cells.push(half(true));
    }
    CellPartition::dyadic(cells).expect("splits keep a partition")
}

fn random_pair(rng: &mut impl Rng, p: &CellPartition) -> (StepFunction, Measure) {
    let values = (0..p.len()).map(|_| random_value(rng)).collect();
    let masses = (0..p.len()).map(|_| random_mass(rng)).collect();
    (
        StepFunction::new(p.clone(), values).expect("lengths match"),
        Measure::new(p.clone(), masses).expect("masses are nonnegative"),
    )
}

/// An instance whose common refinement has at most `max_cells` cells.
pub fn random_instance(rng: &mut impl Rng, max_cells: usize) -> Instance {
    let max_cells = max_cells.max(1);
    if rng.gen_ratio(1, 4) {
        let k = rng.gen_range(1..=max_cells);
        let p = CellPartition::atoms((0..k).map(|i| format!("a{i}"))).expect("distinct labels");
        let (f, m) = random_pair(rng, &p);
        let (g, v) = random_pair(rng, &p);
        return Instance { f, m, g, v };
    }
    let side = max_cells.min(6);
    let (p, q) = loop {
        let (a, b) = (rng.gen_range(1..=side), rng.gen_range(1..=side));
        let p = random_dyadic(rng, a);
        let q = random_dyadic(rng, b);
        if common_refinement(&p, &q).expect("dyadic partitions refine").partition.len() <= max_cells {
            break (p, q);
        }
    };
    let (f, m) = random_pair(rng, &p);
    let (g, v) = random_pair(rng, &q);
    Instance { f, m, g, v }
}

/// Same as [`random_instance`] with `v = m`.
pub fn random_same_measure_instance(rng: &mut impl Rng, max_cells: usize) -> Instance {
    let mut inst = random_instance(rng, max_cells);
    inst.v = inst.m.clone();
    inst
}

/// The instance on its common refinement, for failure reports.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceDump {
    pub cells: Vec<String>,
    pub f: Vec<Rational>,
    pub m: Vec<Rational>,
    pub g: Vec<Rational>,
    pub v: Vec<Rational>,
}

impl Instance {
    pub fn dump(&self) -> uniform_fatou::Result<InstanceDump> {
        let p = uniform_fatou::partition::common_refinement_all([
            self.f.partition(),
            self.m.partition(),
            self.g.partition(),
            self.v.partition(),
        ])?;
        Ok(InstanceDump {
            cells: (0..p.len()).map(|c| p.cell_label(c)).collect(),
            f: self.f.lift_to(&p)?.values().to_vec(),
            m: self.m.lift_to(&p)?.masses().to_vec(),
            g: self.g.lift_to(&p)?.values().to_vec(),
            v: self.v.lift_to(&p)?.masses().to_vec(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub trial: u64,
    pub quantity: &'static str,
    pub closed_form: Rational,
    pub brute_force: Rational,
    pub instance: InstanceDump,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub seed: u64,
    pub trials: u64,
    pub max_cells: usize,
    pub passed: u64,
    pub failed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Failure>,
}

/// Closed form against enumeration for `gap_inf`, `gap_sup` and
/// `tv_distance`; the first disagreement, if any.
pub fn check_instance(inst: &Instance, trial: u64, corrupt: bool) -> uniform_fatou::Result<Option<Failure>> {
    let offset = if corrupt {
        Rational::frac(CORRUPTION.0, CORRUPTION.1)
    } else {
        Rational::zero()
    };
    let Instance { f, m, g, v } = inst;
    let pairs = [
        (
            "gap_inf",
            gap_inf(f, m, g, v)?.value + &offset,
            brute_force_gap(f, m, g, v, GapMode::Inf)?,
        ),
        ("gap_sup", gap_sup(f, m, g, v)?, brute_force_gap(f, m, g, v, GapMode::Sup)?),
        ("tv_distance", tv_distance(m, v)?, brute_force_tv(m, v)?),
    ];
    for (quantity, closed_form, brute_force) in pairs {
        if closed_form != brute_force {
            return Ok(Some(Failure {
                trial,
                quantity,
                closed_form,
                brute_force,
                instance: inst.dump()?,
            }));
        }
    }
    Ok(None)
}

pub fn run_oracle(max_cells: usize, trials: u64, seed: u64, corrupt: bool) -> uniform_fatou::Result<OracleSummary> {
    let mut rng = rng_from_seed(seed);
    let mut summary = OracleSummary {
        seed,
        trials,
        max_cells,
        passed: 0,
        failed: 0,
        first_failure: None,
    };
    for trial in 0..trials {
        let inst = random_instance(&mut rng, max_cells);
        match check_instance(&inst, trial, corrupt)? {
            None => summary.passed += 1,
            Some(f) => {
                summary.failed += 1;
                summary.first_failure.get_or_insert(f);
            }
        }
    }
    Ok(summary)
}
