use symref_core::auto::detect_symmetries;
use symref_core::groups::analyze;
use symref_core::handle::build_plan;
use symref_core::instances::{gen_energy, gen_kissing, gen_maxcut, gen_packing, gen_two_pairs, Graph};
use symref_core::solve::{relative_gap, solve, Limits};
use symref_core::{Minlp, Mode, Setting, SolveResult, Status};

fn run(p: &Minlp, s: Setting, limits: &Limits) -> SolveResult {
    let gens = detect_symmetries(p, Mode::Reflection, true).unwrap().generators;
    let plan = build_plan(p, &analyze(&gens, p.n()), s).unwrap();
    solve(p, &plan, limits).unwrap()
}

fn optimal(p: &Minlp, s: Setting) -> f64 {
    let r = run(p, s, &Limits::default());
    assert_eq!(r.status, Status::Optimal, "{:?}", s);
    let v = r.value.unwrap();
    assert!(p.is_feasible(r.incumbent.as_ref().unwrap(), 1e-6));
    assert!(relative_gap(v, r.dual_bound) <= 1e-4 + 1e-12);
    v
}

/// Best radius over a coarse grid of point placements: a lower bound on the packing optimum.
fn grid_radius(n: usize, steps: usize) -> f64 {
    let grid: Vec<(f64, f64)> = (0..=steps)
        .flat_map(|i| (0..=steps).map(move |j| (-1.0 + 2.0 * i as f64 / steps as f64, -1.0 + 2.0 * j as f64 / steps as f64)))
        .collect();
    let mut best: f64 = 0.0;
    let mut idx = vec![0usize; n];
    loop {
        let pts: Vec<(f64, f64)> = idx.iter().map(|&k| grid[k]).collect();
        let mut r = pts.iter().map(|(x, y)| (1.0 - x.abs()).min(1.0 - y.abs())).fold(f64::INFINITY, f64::min);
        for a in 0..n {
            for b in a + 1..n {
                r = r.min(0.5 * ((pts[a].0 - pts[b].0).abs() + (pts[a].1 - pts[b].1).abs()));
            }
        }
        best = best.max(r);
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < grid.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            return best;
        }
    }
}

#[test]
fn one_dimensional_packing_of_two() {
    // centers at ±(1−r), distance 2(1−r) ≥ 2r gives r = 1/2
    for s in [Setting::Sym0, Setting::Auto] {
        assert!((optimal(&gen_packing(2, 1), s) + 0.5).abs() < 1e-4);
    }
}

#[test]
fn packing_three_agrees_across_settings() {
    let settings = [
        Setting::Sym0,
        Setting::Sym1,
        Setting::Sym2,
        Setting::Sym3,
        Setting::Sym4,
        Setting::Sym5,
        Setting::Sym6,
        Setting::Auto,
    ];
    let p = gen_packing(3, 2);
    let vals: Vec<f64> = settings.iter().map(|&s| optimal(&p, s)).collect();
    let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi - lo <= 1e-4, "{:?}", vals);
    // the solver maximizes r; a grid placement is feasible and cannot beat it
    let grid = grid_radius(3, 6);
    assert!(-hi >= grid - 1e-4, "solver {} grid {}", -hi, grid);
}

#[test]
fn antipodal_kissing_pair() {
    for s in [Setting::Sym0, Setting::Sym3, Setting::Auto] {
        assert!((optimal(&gen_kissing(2, 2), s) + 1.0).abs() < 1e-6);
    }
}

#[test]
fn energy_of_two_points_on_the_circle() {
    let limits = Limits { max_nodes: 2_000_000, ..Limits::default() };
    let r = run(&gen_energy(2, 2), Setting::Sym6, &limits);
    assert_eq!(r.status, Status::Optimal);
    assert!((r.value.unwrap() - 0.25).abs() < 1e-4);
}

#[test]
fn maxcut_matches_brute_force() {
    let graphs = [Graph::complete(3), Graph::cycle(5), Graph::petersen(), Graph { n: 2, edges: vec![(0, 1)] }];
    for g in graphs {
        let best = g.max_cut_bruteforce() as f64;
        let p = gen_maxcut(&g);
        for s in [Setting::Sym0, Setting::Auto] {
            assert_eq!(optimal(&p, s), -best);
        }
    }
    assert_eq!(Graph::petersen().max_cut_bruteforce(), 12);
    assert_eq!(Graph::complete(3).max_cut_bruteforce(), 2);
}

#[test]
fn two_pairs_feasibility_problem() {
    assert_eq!(optimal(&gen_two_pairs(), Setting::Auto), 0.0);
}

#[test]
fn node_limit_keeps_a_valid_dual_bound() {
    let p = gen_packing(3, 2);
    let r = run(&p, Setting::Sym0, &Limits { max_nodes: 5, ..Limits::default() });
    assert_eq!(r.status, Status::Limit);
    assert_eq!(r.node_count, 5);
    // the true optimum is about -4/7
    assert!(r.dual_bound <= -0.5714);
    assert!((0.0..=1.0).contains(&r.primal_dual_integral));
}
