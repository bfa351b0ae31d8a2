use proptest::prelude::*;
use rand::Rng;

use uniform_fatou::convergence::setwise_gap;
use uniform_fatou::fatou::{pointwise_min_over, GapMode};
use uniform_fatou::measure::{integrate, integrate_over};
use uniform_fatou::partition::common_refinement_all;
use uniform_fatou::verdict::{check_condition_ii, theorem1_report, Behavior, Consistency, Grids, Verdict};
use uniform_fatou::{
    brute_force_gap, exceedance_measure, gap_inf, gap_sup, l1_distance, lower_tail, radon_nikodym,
    tv_distance, ui_tail, CellMasses, CellPartition, Lift, Measure, Rational, SequencePair,
    SignedMeasure, StepFunction, Term, TestSetFamily,
};
use uniform_fatou_cli::oracle::{random_dyadic, random_instance, random_mass, random_value, rng_from_seed, Instance};

fn inst(seed: u64, cells: usize) -> Instance {
    random_instance(&mut rng_from_seed(seed), cells)
}

fn rational() -> impl Strategy<Value = Rational> {
    (-1000i64..1000, 1i64..200).prop_map(|(n, d)| Rational::frac(n, d))
}

fn integral(f: &StepFunction, m: &Measure) -> Rational {
    let r = common_refinement_all([f.partition(), m.partition()]).unwrap();
    integrate(&f.lift_to(&r).unwrap(), &m.lift(&r).unwrap()).unwrap()
}

fn all_subsets(cells: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << cells).map(move |m| (0..cells).filter(|c| m >> c & 1 == 1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_text_round_trip(x in rational()) {
        let s = x.to_string();
        prop_assert_eq!(s.parse::<Rational>().unwrap(), x.clone());
        let json = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rational>(&json).unwrap(), x);
    }

    #[test]
    fn rational_pos_neg_parts(x in rational()) {
        prop_assert_eq!(x.pos_part() - x.neg_part(), x.clone());
        prop_assert_eq!(x.pos_part() + x.neg_part(), x.abs());
    }

    #[test]
    fn lifting_preserves_integrals_and_mass(seed in any::<u64>(), leaves in 1usize..10) {
        let i = inst(seed, 10);
        let extra = random_dyadic(&mut rng_from_seed(seed ^ 0x9e37), leaves);
        if let Ok(fine) = common_refinement_all([i.f.partition(), i.m.partition(), &extra]) {
            let (f, m) = (i.f.lift_to(&fine).unwrap(), i.m.lift(&fine).unwrap());
            prop_assert_eq!(m.total(), i.m.total());
            let coarse = common_refinement_all([i.f.partition(), i.m.partition()]).unwrap();
            let before = integrate(&i.f.lift_to(&coarse).unwrap(), &i.m.lift(&coarse).unwrap()).unwrap();
            prop_assert_eq!(integrate(&f, &m).unwrap(), before);
        }
    }

    #[test]
    fn function_parts(seed in any::<u64>()) {
        let f = inst(seed, 12).f;
        let back = f.pos_part().zip_with(&f.neg_part(), |a, b| a - b).unwrap();
        prop_assert_eq!(back.values(), f.values());
        let abs = f.pos_part().zip_with(&f.neg_part(), |a, b| a + b).unwrap();
        let fa = f.abs();
        prop_assert_eq!(abs.values(), fa.values());
    }

    #[test]
    fn jordan_decomposition(seed in any::<u64>()) {
        let i = inst(seed, 12);
        let t = SignedMeasure::from_density(&i.f, &i.m.lift(i.f.partition()).unwrap()).unwrap();
        let (pos, neg) = t.jordan();
        for c in 0..t.masses().len() {
            prop_assert_eq!(&pos.masses()[c] - &neg.masses()[c], t.masses()[c].clone());
            prop_assert!(pos.masses()[c].is_zero() || neg.masses()[c].is_zero());
            prop_assert_eq!(&pos.masses()[c] + &neg.masses()[c], t.variation().masses()[c].clone());
        }
    }

    #[test]
    fn tv_is_a_metric(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (x, y, z) = (inst(a, 8).m, inst(b, 8).m, inst(c, 8).m);
        // atom sets with different labels cannot be compared
        if let (Ok(xy), Ok(yz), Ok(xz)) = (tv_distance(&x, &y), tv_distance(&y, &z), tv_distance(&x, &z)) {
            prop_assert_eq!(tv_distance(&y, &x).unwrap(), xy.clone());
            prop_assert!(xz <= &xy + &yz);
        }
        prop_assert!(tv_distance(&x, &x).unwrap().is_zero());
        let i = inst(a, 8);
        let d = tv_distance(&i.m, &i.v).unwrap();
        let p = common_refinement_all([i.m.partition(), i.v.partition()]).unwrap();
        let same = i.m.lift(&p).unwrap() == i.v.lift(&p).unwrap();
        prop_assert_eq!(d.is_zero(), same);
    }

    #[test]
    fn setwise_gap_bounded_by_tv(seed in any::<u64>(), level in 0u32..4) {
        let mut rng = rng_from_seed(seed);
        let (a, b) = (random_dyadic(&mut rng, 6), random_dyadic(&mut rng, 6));
        let ma = Measure::new(a.clone(), (0..a.len()).map(|_| random_mass(&mut rng)).collect()).unwrap();
        let mb = Measure::new(b.clone(), (0..b.len()).map(|_| random_mass(&mut rng)).collect()).unwrap();
        let fam = TestSetFamily::dyadic(level).unwrap();
        let tv = tv_distance(&ma, &mb).unwrap();
        let sg = setwise_gap(&ma, &mb, &fam).unwrap();
        prop_assert!(sg <= tv);
        // over every subset of the refinement: sup |m(S) − v(S)| <= tv <= 2 sup
        let p = common_refinement_all([&a, &b]).unwrap();
        let (la, lb) = (ma.lift(&p).unwrap(), mb.lift(&p).unwrap());
        let sup = all_subsets(p.len())
            .map(|s| (la.mass_of(&s).unwrap() - lb.mass_of(&s).unwrap()).abs())
            .max()
            .unwrap();
        prop_assert!(sup <= tv && tv <= &sup + &sup);
    }

    #[test]
    fn tails_are_monotone(seed in any::<u64>(), k1 in rational(), k2 in rational()) {
        let (k1, k2) = (k1.abs() + Rational::frac(1, 1000), k2.abs() + Rational::frac(1, 1000));
        let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
        let i = inst(seed, 12);
        prop_assert!(lower_tail(&i.g, &i.v, &lo).unwrap() <= lower_tail(&i.g, &i.v, &hi).unwrap());
        prop_assert!(ui_tail(&i.g, &i.v, &lo).unwrap() >= ui_tail(&i.g, &i.v, &hi).unwrap());
        prop_assert!(lower_tail(&i.g, &i.v, &lo).unwrap() <= Rational::zero());
        if let Ok(x) = exceedance_measure(&i.f, &i.g, &i.m, &lo) {
            prop_assert!(x >= exceedance_measure(&i.f, &i.g, &i.m, &hi).unwrap());
        }
    }

    #[test]
    fn tails_vanish_past_the_maximum(seed in any::<u64>(), slack in 1i64..100) {
        let i = inst(seed, 12);
        let k = i.g.max_abs() + Rational::frac(slack, 100);
        prop_assert!(lower_tail(&i.g, &i.v, &k).unwrap().is_zero());
        prop_assert!(ui_tail(&i.g, &i.v, &k).unwrap().is_zero());
    }

    #[test]
    fn l1_is_sum_of_parts(seed in any::<u64>()) {
        let i = inst(seed, 12);
        if let Ok(d) = i.g.zip_with(&i.f, |a, b| a - b) {
            let m = i.m.lift(d.partition());
            if let Ok(m) = m {
                let pos = integrate(&d.pos_part(), &m).unwrap();
                let neg = integrate(&d.neg_part(), &m).unwrap();
                prop_assert_eq!(l1_distance(&i.g, &i.f, &i.m).unwrap(), pos + neg);
            }
        }
    }

    #[test]
    fn closed_forms_match_enumeration(seed in any::<u64>(), cells in 1usize..11) {
        let Instance { f, m, g, v } = inst(seed, cells);
        prop_assert_eq!(gap_inf(&f, &m, &g, &v).unwrap().value, brute_force_gap(&f, &m, &g, &v, GapMode::Inf).unwrap());
        prop_assert_eq!(gap_sup(&f, &m, &g, &v).unwrap(), brute_force_gap(&f, &m, &g, &v, GapMode::Sup).unwrap());
    }

    #[test]
    fn same_measure_identities(seed in any::<u64>()) {
        let Instance { f, m, g, .. } = inst(seed, 12);
        let d = g.zip_with(&f, |a, b| a - b).unwrap();
        let mm = m.lift(d.partition()).unwrap();
        let pos = integrate(&d.pos_part(), &mm).unwrap();
        let neg = integrate(&d.neg_part(), &mm).unwrap();
        prop_assert_eq!(gap_inf(&f, &m, &g, &m).unwrap().value, -neg.clone());
        prop_assert_eq!(gap_sup(&f, &m, &g, &m).unwrap(), pos.max(neg));
    }

    #[test]
    fn gap_sandwich(seed in any::<u64>()) {
        let Instance { f, m, g, v } = inst(seed, 12);
        let gi = gap_inf(&f, &m, &g, &v).unwrap();
        let gs = gap_sup(&f, &m, &g, &v).unwrap();
        prop_assert!(-gs.clone() <= gi.value);
        prop_assert!(gi.value <= Rational::zero());
        prop_assert!(gs >= Rational::zero());
        // the witness attains the infimum
        let (f2, m2, g2, v2) = (
            f.lift_to(&gi.partition).unwrap(),
            m.lift(&gi.partition).unwrap(),
            g.lift_to(&gi.partition).unwrap(),
            v.lift(&gi.partition).unwrap(),
        );
        let on_w = integrate_over(&g2, &v2, &gi.witness).unwrap() - integrate_over(&f2, &m2, &gi.witness).unwrap();
        prop_assert_eq!(on_w, gi.value);
    }

    #[test]
    fn radon_nikodym_reconstructs(seed in any::<u64>()) {
        let i = inst(seed, 10);
        let p = common_refinement_all([i.f.partition(), i.m.partition()]).unwrap();
        let m = i.m.lift(&p).unwrap();
        let f = i.f.lift_to(&p).unwrap();
        let t = SignedMeasure::from_density(&f, &m).unwrap();
        let rn = radon_nikodym(&t, &m).unwrap();
        prop_assert_eq!(&SignedMeasure::from_density(&rn, &m).unwrap(), &t);
        for s in all_subsets(p.len()) {
            prop_assert_eq!(integrate_over(&rn, &m, &s).unwrap(), t.mass_of(&s).unwrap());
        }
    }

    #[test]
    fn classic_fatou_on_a_prefix(seed in any::<u64>(), len in 1usize..6) {
        // nonnegative functions under one measure: ∫ min_n f⁽ⁿ⁾ <= min_n ∫ f⁽ⁿ⁾
        let mut rng = rng_from_seed(seed);
        let p = random_dyadic(&mut rng, 6);
        let m = Measure::new(p.clone(), (0..p.len()).map(|_| random_mass(&mut rng)).collect()).unwrap();
        let terms: Vec<(u64, Term)> = (1..=len as u64)
            .map(|n| {
                let q = random_dyadic(&mut rng, 5);
                let vals = (0..q.len()).map(|_| random_value(&mut rng).abs()).collect();
                (n, Term::new(m.clone(), StepFunction::new(q, vals).unwrap()))
            })
            .collect();
        let limit = terms[0].1.clone();
        let seq = SequencePair::listed(terms, limit).unwrap();
        let idx = seq.indices(len as u64);
        let low = pointwise_min_over(&seq, &idx).unwrap();
        let lhs = integral(&low, &m);
        let rhs = idx
            .iter()
            .map(|&n| {
                let t = seq.term(n).unwrap();
                integral(&t.function, &t.measure)
            })
            .min()
            .unwrap();
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn eventually_constant_sequences_are_consistent(seed in any::<u64>(), settle in 1u64..6) {
        // values stay below the largest default K so the tails there vanish
        let mut rng = rng_from_seed(seed);
        let p = random_dyadic(&mut rng, 5);
        let masses: Vec<Rational> = (0..p.len()).map(|_| random_mass(&mut rng)).collect();
        let limit = Term::new(
            Measure::new(p.clone(), masses).unwrap(),
            StepFunction::new(p.clone(), (0..p.len()).map(|_| random_value(&mut rng)).collect()).unwrap(),
        );
        let terms: Vec<(u64, Term)> = (1..=settle + 3)
            .map(|n| {
                if n >= settle {
                    return (n, limit.clone());
                }
                let vals = (0..p.len()).map(|_| random_value(&mut rng)).collect();
                let masses = (0..p.len()).map(|_| random_mass(&mut rng)).collect();
                (n, Term::new(Measure::new(p.clone(), masses).unwrap(), StepFunction::new(p.clone(), vals).unwrap()))
            })
            .collect();
        let seq = SequencePair::listed(terms, limit).unwrap();
        let rep = theorem1_report(&seq, &Grids { prefix: settle + 3, ..Grids::default() }).unwrap();
        prop_assert_eq!(rep.gap.behavior, Behavior::Vanishes);
        prop_assert_eq!(rep.tv.behavior, Behavior::Vanishes);
        prop_assert_eq!(rep.condition_i.verdict, Verdict::HoldsOnPrefix);
        prop_assert_eq!(rep.condition_ii.verdict, Verdict::HoldsOnPrefix);
        prop_assert_eq!(rep.consistency, Consistency::Consistent);
        prop_assert!(rep.mismatches.is_empty());
    }

    #[test]
    fn shifted_infima_never_exceed_zero(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let p = CellPartition::atoms(["a", "b", "c"]).unwrap();
        let limit = Term::new(Measure::base(&p), StepFunction::constant(&p, Rational::zero()));
        let terms: Vec<(u64, Term)> = (1..=6)
            .map(|n| {
                let vals = (0..3).map(|_| Rational::integer(rng.gen_range(-20..=20))).collect();
                (n, Term::new(Measure::base(&p), StepFunction::new(p.clone(), vals).unwrap()))
            })
            .collect();
        let seq = SequencePair::listed(terms, limit).unwrap();
        let c = check_condition_ii(&seq, &Grids::default().k, 6).unwrap();
        for t in &c.per_k {
            prop_assert!(t.prefix_inf <= Rational::zero());
            prop_assert_eq!(&t.shifted_inf[0].1, &t.prefix_inf);
            prop_assert!(t.shifted_inf.windows(2).all(|w| w[0].1 <= w[1].1));
        }
        prop_assert!(c.per_k.windows(2).all(|w| w[0].prefix_inf <= w[1].prefix_inf));
    }
}
