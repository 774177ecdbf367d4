mod common;

use common::{all_zero, arctic_rows, lemming_rows, normalized_defect, q, raw_defect, wolbachia_rows};
use gonosomal::fixed_points::{
    arctic_fixed_points, model_fixed_points, sv_fixed_points, wolbachia_fixed_points, FixedPointError, NonNegBranch,
};
use gonosomal::models::build_model;
use gonosomal::oracle::{numeric_fixed_points, OracleConfig};
use gonosomal::scalar::int;
use gonosomal::{Rational, StatePoint, Surd};

fn exact_points(points: &[StatePoint<Rational>]) -> Vec<Vec<Rational>> {
    points.iter().map(StatePoint::coords).collect()
}

#[test]
fn wolbachia_points_for_partial_transmission() {
    for eta in [q(3, 5), q(7, 10), q(3, 4), q(4, 5), q(9, 10)] {
        let rows = wolbachia_rows(&eta);
        let set = wolbachia_fixed_points(&eta).unwrap();
        assert_eq!(set.raw.len(), 3);
        for p in &set.raw {
            assert!(all_zero(&raw_defect(&rows, &p.point)));
        }
        // Only (1/(1−η), 0, 0, 1/η) and (0, 2, 0, 2) are non-negative.
        assert_eq!(set.raw.iter().filter(|p| p.normalisable).count(), 2);
        let normalized = exact_points(&set.normalized);
        assert!(normalized.contains(&vec![eta.clone(), int(0), int(0), int(1) - &eta]));
        assert!(normalized.contains(&vec![int(0), q(1, 2), int(0), q(1, 2)]));
        for p in &set.normalized {
            assert!(all_zero(&normalized_defect(&rows, p)));
        }
    }
}

#[test]
fn wolbachia_half_has_a_segment_of_fixed_points() {
    let eta = q(1, 2);
    let rows = wolbachia_rows(&eta);
    let set = wolbachia_fixed_points(&eta).unwrap();
    assert_eq!(set.families.len(), 1);
    assert_eq!(set.normalized_families.len(), 1);
    for t in [int(0), q(1, 3), int(1), q(7, 4), int(2)] {
        assert!(all_zero(&raw_defect(&rows, &set.families[0].at(&t))));
        let p = set.normalized_families[0].at(&t);
        assert!(p.coords().iter().all(|c| c >= &int(0)));
        assert_eq!(p.total(), int(1));
        assert!(all_zero(&normalized_defect(&rows, &p)));
    }
    // The segment runs from (0, 1/2, 0, 1/2) to (1/2, 0, 0, 1/2).
    let ends = [
        set.normalized_families[0].at(&int(0)),
        set.normalized_families[0].at(&int(2)),
    ];
    assert_eq!(ends[0].coords(), vec![int(0), q(1, 2), int(0), q(1, 2)]);
    assert_eq!(ends[1].coords(), vec![q(1, 2), int(0), int(0), q(1, 2)]);
}

#[test]
fn wolbachia_full_transmission_fixes_the_pure_first_genotype() {
    let eta = int(1);
    let rows = wolbachia_rows(&eta);
    let set = wolbachia_fixed_points(&eta).unwrap();
    for family in &set.families {
        for t in family.samples() {
            assert!(all_zero(&raw_defect(&rows, &family.at(&t))));
        }
    }
    assert_eq!(
        exact_points(&set.normalized),
        vec![vec![int(0), q(1, 2), int(0), q(1, 2)]]
    );
    // (1, 0, 0, 0) has no males; the simplified operator still fixes it.
    assert_eq!(exact_points(&set.boundary), vec![vec![int(1), int(0), int(0), int(0)]]);
    assert!(matches!(
        wolbachia_fixed_points(&q(2, 5)),
        Err(FixedPointError::ParamOutOfRange { .. })
    ));
}

#[test]
fn arctic_points() {
    let rows = arctic_rows();
    let set = arctic_fixed_points();
    for p in &set.raw {
        assert!(all_zero(&raw_defect(&rows, &p.point)));
    }
    let normalized = exact_points(&set.normalized);
    assert!(normalized.contains(&vec![q(7, 20), q(7, 60), q(7, 60), q(5, 12)]));
    assert!(normalized.contains(&vec![q(1, 2), int(0), int(0), q(1, 2)]));
    for p in &set.normalized {
        assert!(all_zero(&normalized_defect(&rows, p)));
    }
}

#[test]
fn reduced_lemming_points_are_exact_on_a_grid() {
    for n in [2usize, 3, 4] {
        let m = n as i64 - 1;
        for gi in 0..=6 {
            let gamma = q(gi, 12);
            for li in 0..=6 {
                let lambda = q(li * m, 12);
                if gamma == int(0) && lambda == int(0) {
                    continue;
                }
                let analysis = sv_fixed_points(n, &gamma, &lambda).unwrap();
                let mut gammas = vec![gamma.clone()];
                gammas.extend(std::iter::repeat(&lambda / int(m)).take(n - 1));
                let rows = lemming_rows(&gammas);
                for p in &analysis.fixed_points.raw {
                    assert!(
                        all_zero(&raw_defect(&rows, &p.point)),
                        "n={n} gamma={gamma} lambda={lambda}"
                    );
                }
                for p in &analysis.fixed_points.normalized {
                    assert!(all_zero(&normalized_defect::<Surd>(&rows, p)));
                }
                let diagonal = &gamma * int(m);
                let expected_branch = if lambda == int(0) {
                    NonNegBranch::LambdaZero
                } else if lambda == diagonal {
                    NonNegBranch::OnDiagonal
                } else if lambda > diagonal {
                    NonNegBranch::AboveDiagonal
                } else {
                    NonNegBranch::BelowDiagonal
                };
                assert_eq!(analysis.classification.branch, expected_branch);
                assert_eq!(
                    analysis.classification.nonneg_count,
                    analysis.fixed_points.normalized.len()
                );
            }
        }
    }
}

#[test]
fn interior_lemming_point_with_half() {
    // γ = 1/2, n = 3, λ = 1/4: (x, y) = (2λ/m, (m − 4λ)/m²) = (1/4, 1/4).
    let analysis = sv_fixed_points(3, &q(1, 2), &q(1, 4)).unwrap();
    let want = StatePoint::new(vec![q(1, 4), q(1, 4), q(1, 4)], q(1, 4)).lift::<Surd>();
    assert!(analysis.fixed_points.normalized.iter().any(|p| p == &want));
}

#[test]
fn oracle_agrees_with_closed_forms() {
    let models = [
        build_model("wolbachia", &[("eta", q(3, 4))]).unwrap(),
        build_model("wolbachia", &[("eta", q(1, 2))]).unwrap(),
        build_model("wolbachia", &[("eta", int(1))]).unwrap(),
        build_model("arctic-lemming", &[]).unwrap(),
        build_model("wood-lemming", &[]).unwrap(),
        build_model("cichlid", &[]).unwrap(),
    ];
    let config = OracleConfig::default();
    for model in &models {
        let set = model_fixed_points(model).unwrap();
        let report = numeric_fixed_points(model.spec(), &config);
        for found in &report.points {
            assert!(
                set.distance_to_known(found) < 1e-6,
                "{}: stray point {found:?}",
                model.name()
            );
        }
        for known in set.normalized_f64() {
            let near = report
                .points
                .iter()
                .map(|p| common::sup(p, &known))
                .fold(f64::INFINITY, f64::min);
            assert!(near < 1e-8, "{}: missed {known:?}", model.name());
        }
    }
}
