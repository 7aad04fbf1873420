//! Search examples and invariants, against closed forms computed here.

use atlb_core::analytics::{p_alpha_roots, DEFAULT_TOL};
use atlb_core::kernel::{classify_camels, enumerate_annotations, int, rat, to_f64, Annotation, CamelKind, Mode, Rational};
use atlb_core::rules::verify_proof;
use atlb_core::search::{
    best_among, best_exponent, bpts_grover_proof, feasible, feasible_with, good_proof, optimality_scan, search_best,
    SearchOptions,
};
use num::Signed;

fn tol() -> Rational {
    rat(1, 1_000_000)
}

fn hundred_bound(alpha: f64) -> f64 {
    (1.0 + alpha).sqrt() / alpha
}

#[test]
fn hundred_best_exponent_matches_closed_form() {
    for alpha in [int(1), rat(2, 3), rat(1, 2)] {
        let c = best_exponent(&Annotation::ts("100"), &alpha, &tol(), &SearchOptions::default()).unwrap().unwrap();
        assert!((to_f64(&c) - hundred_bound(to_f64(&alpha))).abs() < 1e-6, "alpha={alpha}");
    }
}

#[test]
fn search_best_short_annotations() {
    let r = search_best(3, &int(1), Mode::Ts, &tol(), &SearchOptions::default()).unwrap().unwrap();
    assert_eq!(r.annotation.to_string(), "100");
    assert!((to_f64(&r.best_c) - 2f64.sqrt()).abs() < 1e-6);
    assert!(verify_proof(&r.certificate).contradiction);
    assert!(r.to_string().ends_with(&format!("best_c={} annotation=100\n", atlb_core::kernel::format_rational(&r.best_c))));

    let g = search_best(3, &rat(2, 3), Mode::Ts, &tol(), &SearchOptions::grover()).unwrap().unwrap();
    assert!((to_f64(&g.best_c) - 15f64.sqrt() / 2.0).abs() < 1e-6);
    assert!(verify_proof(&g.certificate).contradiction);
}

#[test]
fn search_best_grows_with_length_below_the_root() {
    let r1 = p_alpha_roots(&int(1), DEFAULT_TOL).unwrap().0;
    let t = rat(1, 10_000);
    let mut prev = 0.0;
    for len in [3, 5, 7, 8] {
        let r = search_best(len, &int(1), Mode::Ts, &t, &SearchOptions::default()).unwrap().unwrap();
        let c = to_f64(&r.best_c);
        assert!(c >= prev - 1e-4 && c < r1 + 1e-4, "len={len} c={c}");
        prev = c;
    }
}

#[test]
fn scan_examples() {
    let r = optimality_scan(&int(1), &rat(141, 100), 3, &SearchOptions::default()).unwrap();
    assert_eq!(r.feasible().map(|e| e.annotation.to_string()).collect::<Vec<_>>(), vec!["100"]);
    assert!(r.to_string().ends_with("1 feasible annotations\n"));
    let r = optimality_scan(&rat(2, 3), &rat(5, 2), 10, &SearchOptions::default()).unwrap();
    assert_eq!(r.feasible_count(), 0);
}

#[test]
fn positive_margins_replay_up_to_length_ten() {
    for (alpha, cc) in [(int(1), rat(7, 5)), (int(1), rat(17, 10)), (int(1), rat(177, 100)), (rat(2, 3), rat(9, 4)), (rat(1, 2), rat(5, 2))] {
        for a in enumerate_annotations(10, Mode::Ts) {
            let f = feasible(&a, &alpha, &cc).unwrap();
            if f.margin.as_ref().is_some_and(|m| m.is_positive()) {
                assert!(f.replay_ok && f.feasible, "{a} alpha={alpha} c={cc}");
                assert!(verify_proof(f.certificate.as_ref().unwrap()).contradiction);
            }
        }
    }
}

#[test]
fn nothing_feasible_at_the_simple_bound() {
    for n in 1..=10 {
        let alpha = rat(n, 10);
        let cc = (int(1) + &alpha) / &alpha;
        let r = optimality_scan(&alpha, &cc, 9, &SearchOptions::default()).unwrap();
        assert_eq!(r.feasible_count(), 0, "alpha={alpha}");
    }
}

#[test]
fn good_proof_bounds_increase_towards_the_root() {
    for alpha in [int(1), rat(2, 3)] {
        let r1 = p_alpha_roots(&alpha, DEFAULT_TOL).unwrap().0;
        let mut prev = 0.0;
        for k in 1..=6 {
            let a = Annotation::ts(&("1".repeat(k) + "0" + &"20".repeat(k)));
            let c = to_f64(&best_exponent(&a, &alpha, &tol(), &SearchOptions::default()).unwrap().unwrap());
            assert!(c > prev && c < r1, "k={k} c={c}");
            prev = c;
        }
    }
}

#[test]
fn good_proof_examples() {
    let g = good_proof(&int(1), &rat(181, 100), 20, &int(100)).unwrap();
    assert!(g.report.valid && !g.contradiction());
    let g = good_proof(&rat(2, 3), &rat(23, 10), 30, &int(100)).unwrap();
    assert!(g.report.valid && g.contradiction(), "{:?}", g.failures);
}

#[test]
fn grover_rounds_follow_the_recurrence() {
    let (c, d) = (rat(149, 100), int(10));
    let p = bpts_grover_proof(&c, &d).unwrap();
    assert!(p.contradiction());
    // Scalar iteration: 2c²d/3 after setup, then ×2c/3 until ≤ d/c.
    let (cf, df) = (1.49f64, to_f64(&p.d));
    let mut v = 2.0 * cf * cf * df / 3.0;
    let mut rounds = 0;
    while v > df / cf {
        v *= 2.0 * cf / 3.0;
        rounds += 1;
    }
    assert_eq!(p.rounds, rounds);
}

fn has_bactrian(a: &Annotation) -> bool {
    classify_camels(a).iter().any(|c| c.kind == CamelKind::Bactrian)
}

#[test]
fn bactrian_annotations_are_dominated() {
    let alpha = int(1);
    let t = rat(1, 100_000);
    let opts = SearchOptions::default();
    let all = enumerate_annotations(12, Mode::Ts);
    let mut record: Option<Rational> = None;
    for len in 3..=12 {
        let (drom, bact): (Vec<Annotation>, Vec<Annotation>) =
            all.iter().filter(|a| a.len() == len).cloned().partition(|a| !has_bactrian(a));
        if let Some((c, _, _)) = best_among(&drom, &alpha, &t, &opts).unwrap() {
            record = Some(record.map_or(c.clone(), |r| r.max(c)));
        }
        let bar = record.clone().map(|r| r + &t).unwrap_or_else(|| int(1) + &t);
        for a in &bact {
            assert!(!feasible_with(a, &alpha, &bar, &opts).unwrap().feasible, "{a} beats {bar}");
        }
    }
}
