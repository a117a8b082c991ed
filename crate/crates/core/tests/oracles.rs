//! Independent oracles: statistical checks on the generators and brute-force
//! checks on the application reductions.

mod common;

use augpack::advice::{corrupt_replacement, perturb_matrix};
use augpack::applications::{
    build_knapsack, build_ooic, build_throughput, Edge, KnapsackItem, KnapsackSpec, OoicSpec, Request, ThroughputSpec,
};
use augpack::harness::gen_synthetic_matrix;
use augpack::model::validate_instance;
use augpack::offline::{brute_force_opt, solve_lp, solve_offline, solve_separable_concave};
use augpack::seed::{derive_seed, rng};
use augpack::{Column, ConcavePiece, PackingInstance};
use rand::Rng as _;

/// Kolmogorov-Smirnov critical value at significance 0.01.
fn ks_critical(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

#[test]
fn perturbed_entries_follow_the_generator_law() {
    let ell = 0.01;
    let (a, _) = gen_synthetic_matrix(100, 100, ell, 11);
    let (b, positions) = perturb_matrix(&a, 10_000, ell, 12).unwrap();
    assert_eq!(positions.len(), 10_000);
    let mut values: Vec<f64> = positions.iter().map(|&(i, j)| b.get(i, j)).collect();
    let zeros = values.iter().filter(|&&v| v == 0.0).count() as f64;
    let sigma = (1e4 * ell * (1.0 - ell)).sqrt();
    assert!((zeros - 1e4 * ell).abs() <= 3.0 * sigma, "{zeros} zeros");

    values.retain(|&v| v > 0.0);
    values.sort_by(f64::total_cmp);
    let n = values.len();
    assert!(values.iter().all(|&v| (ell..=1.0).contains(&v)));
    let cdf = |v: f64| (v - ell) / (1.0 - ell);
    let d = values
        .iter()
        .enumerate()
        .map(|(k, &v)| (cdf(v) - k as f64 / n as f64).max((k + 1) as f64 / n as f64 - cdf(v)))
        .fold(0.0, f64::max);
    assert!(d < ks_critical(n), "KS statistic {d} over {n} samples");
}

#[test]
fn replacement_zeroes_about_a_fraction_p() {
    let ones = vec![1.0; 10_000];
    let advice = corrupt_replacement(&ones, 0.5, 3).unwrap();
    let kept = advice.values().iter().filter(|&&v| v == 1.0).count() as f64;
    assert!((kept - 5000.0).abs() <= 150.0, "{kept} survivors");
}

#[test]
fn synthetic_matrices_have_the_declared_law() {
    let ell = 0.05;
    let (a, b) = gen_synthetic_matrix(60, 60, ell, 4);
    for j in 0..60 {
        assert!(a.column(j).iter().any(|&v| v > 0.0));
        assert!(a.column(j).iter().all(|&v| v == 0.0 || (ell..=1.0).contains(&v)));
    }
    assert!(b.iter().all(|&v| v > 0.0 && v <= 1.0));
}

/// Fractional knapsack by density with each item capped at its value.
fn knapsack_direct(items: &[KnapsackItem], capacity: f64) -> f64 {
    let mut order: Vec<&KnapsackItem> = items.iter().collect();
    order.sort_by(|a, b| (b.value / b.weight).total_cmp(&(a.value / a.weight)));
    let mut room = capacity;
    let mut total = 0.0;
    for it in order {
        let take = room.min(it.weight);
        total += it.value * take / it.weight;
        room -= take;
    }
    total
}

#[test]
fn knapsack_reduction_matches_fractional_greedy() {
    for k in 0..40u64 {
        let mut r = rng(derive_seed(5, &[k]));
        let n = r.gen_range(1..=3);
        let items: Vec<KnapsackItem> =
            (0..n).map(|_| KnapsackItem { value: r.gen_range(0.2..1.5), weight: r.gen_range(0.2..1.5) }).collect();
        let capacity = r.gen_range(0.3..2.0);
        let inst = build_knapsack(&KnapsackSpec { items: items.clone(), capacity, include_box: true }).unwrap();
        assert!(validate_instance(&inst).is_ok());
        let direct = knapsack_direct(&items, capacity);
        let lp = solve_lp(&inst).unwrap().opt_value;
        let grid = brute_force_opt(&inst, 1e-3).unwrap().opt_value;
        assert!((lp - direct).abs() <= 1e-9, "case {k}: LP {lp} vs greedy {direct}");
        assert!((grid - direct).abs() <= 2e-3 * n as f64, "case {k}: grid {grid} vs greedy {direct}");
    }
}

/// Water-filling for `Σ_t c_t·ln(1 + x_t/s_t)` over `Σ_t x_t ≤ Δ`.
fn ooic_direct(pieces: &[(f64, f64)], delta: f64) -> f64 {
    let alloc = |lambda: f64| pieces.iter().map(|&(c, s)| (c / lambda - s).max(0.0)).collect::<Vec<_>>();
    let (mut lo, mut hi) = (1e-9f64, 1e9f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if alloc(mid).iter().sum::<f64>() > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    alloc(hi).iter().zip(pieces).map(|(x, &(c, s))| c * (x / s).ln_1p()).sum()
}

#[test]
fn inventory_reduction_matches_water_filling() {
    for k in 0..30u64 {
        let mut r = rng(derive_seed(6, &[k]));
        let params: Vec<(f64, f64)> =
            (0..r.gen_range(1..=3)).map(|_| (r.gen_range(0.5..2.0), r.gen_range(0.3..1.5))).collect();
        let delta = r.gen_range(0.5..2.0);
        let inst = build_ooic(&OoicSpec {
            pieces: params.iter().map(|&(scale, stretch)| ConcavePiece::Log { scale, stretch }).collect(),
            delta,
            slope_bounds: None,
        })
        .unwrap();
        let direct = ooic_direct(&params, delta);
        let grid = brute_force_opt(&inst, 1e-3).unwrap().opt_value;
        let fw = solve_offline(&inst).unwrap().opt_value;
        let tol = 2e-3 * params.len() as f64;
        assert!((grid - direct).abs() <= tol, "case {k}: grid {grid} vs water-filling {direct}");
        assert!((fw - direct).abs() <= tol, "case {k}: Frank-Wolfe {fw} vs water-filling {direct}");
    }
}

#[test]
fn throughput_reduction_shapes_and_optima() {
    let edge = |id: &str, from: &str, to: &str, capacity: f64| Edge {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        capacity,
    };
    let spec = ThroughputSpec {
        edges: vec![edge("sa", "s", "a", 0.5), edge("at", "a", "t", 1.0), edge("st", "s", "t", 0.25)],
        requests: vec![
            Request {
                source: "s".into(),
                target: "t".into(),
                paths: vec![vec!["sa".into(), "at".into()], vec!["st".into()]],
            },
            Request { source: "a".into(), target: "t".into(), paths: vec![vec!["at".into()]] },
        ],
    };
    let inst = build_throughput(&spec).unwrap();
    assert_eq!(inst.m(), 3 + 2);
    assert_eq!(inst.n(), 3);
    // First request: 0.5 via a plus 0.25 direct; second fills the remaining 0.5 on a→t.
    let lp = solve_lp(&inst).unwrap().opt_value;
    let grid = brute_force_opt(&inst, 1e-3).unwrap().opt_value;
    assert!((lp - 1.25).abs() <= 1e-9, "{lp}");
    assert!((grid - 1.25).abs() <= 6e-3, "{grid}");
}

#[test]
fn frank_wolfe_saturates_a_single_log_piece() {
    let inst = PackingInstance::new(
        vec![1.0],
        vec![Column::new(vec![(0, 1.0)], ConcavePiece::Log { scale: 1.0, stretch: 1.0 })],
    )
    .unwrap();
    let res = solve_separable_concave(&inst, 1e-6, 5000).unwrap();
    assert!((res.x_star[0] - 1.0).abs() < 1e-6);
    assert!((res.opt_value - 2f64.ln()).abs() < 1e-6);
}

#[test]
fn frank_wolfe_agrees_with_the_lp_on_linear_instances() {
    for k in 0..20u64 {
        let inst = common::random_instance(&mut rng(derive_seed(7, &[k])), 8, 5, true);
        let lp = solve_lp(&inst).unwrap().opt_value;
        let fw = solve_separable_concave(&inst, 1e-6, 5000).unwrap().opt_value;
        assert!((lp - fw).abs() <= 1e-6 * lp, "case {k}: {lp} vs {fw}");
    }
}
