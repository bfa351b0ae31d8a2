//! Exact computation of uniform Fatou gap functionals, total-variation
//! distances and the convergence conditions that characterise them, on
//! measure spaces generated by finitely many cells.
//!
//! ```
//! use uniform_fatou::{gap_inf, CellPartition, Measure, Rational, StepFunction};
//!
//! let p = CellPartition::dyadic_level(1)?;
//! let mu = Measure::base(&p);
//! let f = StepFunction::constant(&p, Rational::one());
//! let g = StepFunction::new(p.clone(), vec![Rational::zero(), Rational::integer(2)])?;
//! let gap = gap_inf(&f, &mu, &g, &mu)?;
//! assert_eq!(gap.value, Rational::frac(-1, 2));
//! assert_eq!(gap.witness, vec![0]);
//! # Ok::<(), uniform_fatou::error::Error>(())
//! ```

pub mod analytic;
pub mod convergence;
pub mod error;
pub mod fatou;
pub mod gallery;
pub mod measure;
pub mod partition;
pub mod rational;
pub mod sequence;
pub mod verdict;

pub use analytic::{Analytic, ClosedForm, Keyed};
pub use convergence::{
    convergence_in_measure_prefix, distance_exceedance, exceedance_measure, l1_distance, lower_tail,
    setwise_gap, tv_distance, ui_tail, TestSetFamily,
};
pub use error::{Error, Result};
pub use fatou::{
    brute_force_gap, brute_force_tv, extract_subsequence, gap_inf, gap_sup, radon_nikodym, GapInf, GapMode,
    SubsequenceReport,
};
pub use gallery::{GalleryEntry, ExampleId};
pub use measure::{
    integrate, integrate_over, sublevel_cells, CellMasses, Cmp, Lift, Measure, SignedMeasure,
    StepFunction,
};
pub use partition::{
    common_refinement, CellPartition, DyadicCylinder, DyadicInterval, PartitionKind, Refinement,
};
pub use rational::Rational;
pub use sequence::{SequencePair, Term};
pub use verdict::{theorem1_report, Consistency, Grids, Verdict, VerdictReport, Witness};
