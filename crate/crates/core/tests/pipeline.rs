use std::collections::HashSet;

use symref_core::auto::detect_symmetries;
use symref_core::groups::{analyze, closure};
use symref_core::handle::build_plan;
use symref_core::instances::{gen_disk_packing, gen_energy, gen_kissing, gen_maxcut, gen_packing, gen_two_pairs, Graph};
use symref_core::model::is_symmetry_oracle;
use symref_core::{Action, Classification, GroupReport, Minlp, Mode, Relation, Setting, SignedPermutation};

fn group(p: &Minlp) -> (Vec<SignedPermutation>, HashSet<SignedPermutation>) {
    let gens = detect_symmetries(p, Mode::Reflection, true).unwrap().generators;
    let all = closure(&gens, p.n()).unwrap().into_iter().collect();
    (gens, all)
}

fn sp(n: usize, s: &str) -> SignedPermutation {
    SignedPermutation::parse(n, s).unwrap()
}

fn report(p: &Minlp) -> GroupReport {
    let gens = detect_symmetries(p, Mode::Reflection, true).unwrap().generators;
    analyze(&gens, p.n())
}

fn has_ineq(actions: &[&Action], coefs: &[(usize, f64)], rhs: f64) -> bool {
    actions.iter().any(|a| match a {
        Action::StaticInequality { coefs: c, rhs: r, sense: Relation::Ge } => c.as_slice() == coefs && (r - rhs).abs() < 1e-12,
        _ => false,
    })
}

fn has_restriction(actions: &[&Action], var: usize, lower: f64) -> bool {
    actions.iter().any(|a| matches!(a, Action::RestrictDomain { var: v, lower: l } if *v == var && (*l - lower).abs() < 1e-12))
}

#[test]
fn two_pairs_group_is_the_four_listed_elements() {
    let (_, all) = group(&gen_two_pairs());
    let g1 = sp(4, "(1,-2)(2,-1)");
    let g2 = sp(4, "(3,-4)(4,-3)");
    let g3 = sp(4, "(1,-2)(2,-1)(3,-4)(4,-3)");
    let expected: HashSet<_> = [SignedPermutation::identity(4), g1, g2, g3].into_iter().collect();
    assert_eq!(all, expected);
}

#[test]
fn rectangular_disk_packing_has_disk_exchange_and_both_reflections() {
    let p = gen_disk_packing(3, 2.0, 1.0);
    let (gens, all) = group(&p);
    for g in &gens {
        assert!(is_symmetry_oracle(&p, g, 200, 7).unwrap(), "{}", g);
    }
    // S3 on disks times the two axis reflections; no column exchange
    assert_eq!(all.len(), 6 * 4);
    assert!(all.contains(&sp(7, "(1,2)(4,5)")));
    assert!(all.contains(&sp(7, "(1,-1)(2,-2)(3,-3)")));
    assert!(all.contains(&sp(7, "(4,-4)(5,-5)(6,-6)")));
}

#[test]
fn square_disk_packing_also_exchanges_axes() {
    let (_, all) = group(&gen_disk_packing(3, 1.0, 1.0));
    assert_eq!(all.len(), 6 * 8);
    assert!(all.contains(&sp(7, "(1,4)(2,5)(3,6)")));
}

#[test]
fn rectangular_disk_packing_is_rows_with_column_reflections() {
    let r = report(&gen_disk_packing(3, 2.0, 1.0));
    assert_eq!(r.factors.len(), 1);
    match &r.factors[0].classification {
        Classification::Row { matrix, column_reflections } => {
            assert!(*column_reflections);
            assert_eq!(matrix.len(), 3);
        }
        c => panic!("{:?}", c),
    }
}

#[test]
fn square_packing_is_row_column_with_reflections() {
    let r = report(&gen_packing(3, 2));
    assert_eq!(r.factors.len(), 1);
    match &r.factors[0].classification {
        Classification::RowColumn { column_reflections, row_reflections, .. } => assert!(*column_reflections || *row_reflections),
        c => panic!("{:?}", c),
    }
}

#[test]
fn cubic_energy_is_unstructured() {
    // point exchanges and coordinate exchanges both have three 2-cycles per generator
    let r = report(&gen_energy(3, 3));
    assert!(r.factors.iter().all(|f| f.classification == Classification::Unstructured), "{:?}", r.factors);
}

#[test]
fn kissing_reflects_both_coordinates() {
    let p = gen_kissing(3, 2);
    let (_, all) = group(&p);
    let x = |i: usize, c: usize| p.name_index(&format!("x{}_{}", i, c)).unwrap() as i32 + 1;
    for c in 1..=2 {
        let vars: Vec<usize> = (1..=3).map(|i| x(i, c) as usize - 1).collect();
        assert!(all.contains(&symref_core::groups::reflection_of(&vars, p.n())));
    }
}

#[test]
fn maxcut_has_full_reflection() {
    for g in [Graph::complete(3), Graph::cycle(5), Graph { n: 2, edges: vec![(0, 1)] }] {
        let r = report(&gen_maxcut(&g));
        assert!(r.factors.iter().any(|f| f.has_full_reflection));
    }
}

#[test]
fn maxcut_auto_plan_uses_half_cut() {
    let g = Graph::complete(3);
    let p = gen_maxcut(&g);
    let plan = build_plan(&p, &report(&p), Setting::Auto).unwrap();
    let ineqs = plan.inequalities();
    let x: Vec<usize> = (1..=3).map(|v| p.name_index(&format!("x{}", v)).unwrap()).collect();
    assert!(
        ineqs.iter().any(|(c, s, rhs)| *s == Relation::Ge && (*rhs - 1.5).abs() < 1e-12 && x.iter().all(|i| c.contains(&(*i, 1.0)))),
        "{}",
        plan.describe()
    );
    assert!(!plan.actions().any(|a| matches!(a, Action::LexReduce { .. })));
}

#[test]
fn two_pairs_auto_plan_has_one_lex_reduction_per_factor() {
    let p = gen_two_pairs();
    let plan = build_plan(&p, &report(&p), Setting::Auto).unwrap();
    assert_eq!(plan.factors.len(), 2);
    for f in &plan.factors {
        assert_eq!(f.actions.len(), 1);
        assert!(matches!(f.actions[0], Action::LexReduce { .. }));
    }
}

#[test]
fn disk_packing_restrictions_follow_the_halving_schedule() {
    // D=3: n1 = 2 rows restricted in x, n2 = 1 row in y
    let p = gen_disk_packing(3, 2.0, 1.0);
    let plan = build_plan(&p, &report(&p), Setting::Sym4).unwrap();
    let acts: Vec<&Action> = plan.actions().collect();
    let restricted: Vec<usize> =
        acts.iter().filter_map(|a| if let Action::RestrictDomain { var, .. } = a { Some(*var) } else { None }).collect();
    assert_eq!(restricted, vec![0, 1, 3]);
    assert!(has_restriction(&acts, 0, 0.0) && has_restriction(&acts, 3, 0.0));
}

#[test]
fn packing_sym3_inequalities() {
    let p = gen_packing(3, 2);
    let plan = build_plan(&p, &report(&p), Setting::Sym3).unwrap();
    let acts: Vec<&Action> = plan.actions().collect();
    let v = |s: &str| p.name_index(s).unwrap();
    // M11 >= M12, first row nonnegative, M11 >= M21 >= M31
    assert!(has_ineq(&acts, &[(v("x1_1"), 1.0), (v("x1_2"), -1.0)], 0.0), "{}", plan.describe());
    assert!(has_restriction(&acts, v("x1_1"), 0.0) && has_restriction(&acts, v("x1_2"), 0.0));
    assert!(has_ineq(&acts, &[(v("x1_1"), 1.0), (v("x2_1"), -1.0)], 0.0));
    assert!(has_ineq(&acts, &[(v("x2_1"), 1.0), (v("x3_1"), -1.0)], 0.0));
}

#[test]
fn sym0_plan_is_empty_and_settings_nest() {
    let p = gen_packing(3, 2);
    let r = report(&p);
    let count = |s: Setting| build_plan(&p, &r, s).unwrap().actions().count();
    assert_eq!(count(Setting::Sym0), 0);
    assert!(count(Setting::Sym1) <= count(Setting::Sym2));
    assert!(count(Setting::Sym2) <= count(Setting::Sym3));
    assert!(count(Setting::Sym4) <= count(Setting::Sym5));
}

#[test]
fn permutation_mode_misses_reflections() {
    let d = detect_symmetries(&gen_packing(3, 2), Mode::Permutation, true).unwrap();
    assert!(d.generators.iter().all(|g| g.is_plain()));
    assert!(!d.generators.is_empty());
}
