mod common;

use common::{normalized_step_exact, q, Rows};
use gonosomal::dynamics::{iterate, iterate_exact, sv_reduced_step, IterConfig, ReducedState};
use gonosomal::operators::{apply_normalized, in_simplex, NormalizationMode};
use gonosomal::scalar::int;
use gonosomal::{GonosomalSpec, Rational, StatePoint};
use proptest::prelude::*;

/// Probability vector of length `len` from positive-or-zero integer weights.
fn weights_to_probability(w: &[u32]) -> Vec<Rational> {
    let total: u32 = w.iter().sum();
    w.iter().map(|&v| q(v as i64, total as i64)).collect()
}

fn probability(len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0u32..8, len)
        .prop_filter("some weight", |w| w.iter().any(|&v| v > 0))
        .prop_map(|w| weights_to_probability(&w))
}

/// Rows in `S^{n,1}`: every row has positive female and male mass.
fn rows(n: usize) -> impl Strategy<Value = Rows> {
    prop::collection::vec(
        probability(n + 1).prop_filter("row in S^{n,1}", move |r| {
            r[n] > int(0) && r[..n].iter().any(|v| v > &int(0))
        }),
        n,
    )
    .prop_map(move |rs| {
        rs.into_iter()
            .map(|mut r| {
                let male = r.pop().unwrap();
                (r, male)
            })
            .collect()
    })
}

/// Start in `S^{n,1}`: positive `u` and positive female mass.
fn start(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    probability(n + 1).prop_filter("start in S^{n,1}", move |s| {
        s[n] > int(0) && s[..n].iter().any(|v| v > &int(0))
    })
}

fn spec_and_start() -> impl Strategy<Value = (Rows, Vec<Rational>)> {
    (2usize..=5).prop_flat_map(|n| (rows(n), start(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalised_step_stays_in_the_simplex((rows, s) in spec_and_start()) {
        let spec = GonosomalSpec::from_rows(rows.clone()).unwrap();
        let p = StatePoint::from_coords(&s);
        let step = apply_normalized(&spec, &p, NormalizationMode::Simplified).unwrap();
        prop_assert!(in_simplex(&step.point));
        prop_assert_eq!(step.point.coords(), normalized_step_exact(&rows, &s));
        let full = apply_normalized(&spec, &p, NormalizationMode::Full).unwrap();
        prop_assert_eq!(full.point, step.point);
    }

    #[test]
    fn float_iteration_tracks_exact_iteration((rows, s) in spec_and_start()) {
        let spec = GonosomalSpec::from_rows(rows).unwrap();
        let exact_start = StatePoint::from_coords(&s);
        let exact = iterate_exact(&spec, &exact_start, 8, NormalizationMode::Simplified).unwrap();
        let cfg = IterConfig { max_iters: 8, conv_tol: 0.0, ..IterConfig::default() };
        let float = iterate(&spec, &exact_start.to_f64(), &cfg).unwrap();
        prop_assert_eq!(exact.states.len(), float.states.len());
        for ((k, e), (_, f)) in exact.states.iter().zip(&float.states) {
            let d = e.to_f64().distance(f);
            prop_assert!(d < 1e-13, "step {}: {}", k, d);
            prop_assert!(in_simplex(f));
        }
    }

    #[test]
    fn reduced_map_keeps_unit_mass(
        n in 2usize..=6,
        g in 0i64..=12,
        l in 0i64..=12,
        xw in 1u32..20,
        yw in 0u32..20,
    ) {
        let m = n as i64 - 1;
        let gamma = q(g, 24);
        let lambda = q(l * m, 24);
        prop_assume!(!(g == 0 && l == 0));
        // A reduced state of unit mass 2x + (n − 1)y = 1.
        let total = q(2 * xw as i64 + m * yw as i64, 1);
        let state = ReducedState { x: q(xw as i64, 1) / &total, y: q(yw as i64, 1) / &total };
        prop_assert_eq!(state.mass(n), int(1));
        let next = sv_reduced_step(n, &gamma, &lambda, &state).unwrap();
        prop_assert_eq!(next.mass(n), int(1));
        prop_assert!(next.x >= int(0) && next.y >= int(0));
    }
}
