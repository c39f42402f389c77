use std::f64::consts::PI;

use modctx_core::cv_sim::{apply_weyl, make_state, GridSpec, StateSpec};
use modctx_core::weyl_algebra::{
    certify_contexts, commutator_phase, compatibility_csv, compatibility_matrix, context_product, observable_table,
    symplectic_commutator, weyl_compose, ContextId, LinearForm, ObservableId, Phase, PiPoly, UnitSystem, WeylOp,
};
use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn shares_context(a: ObservableId, b: ObservableId) -> bool {
    ContextId::ALL
        .iter()
        .any(|c| c.members().contains(&a) && c.members().contains(&b))
}

#[test]
fn five_products_are_identity_and_one_is_minus_identity() {
    for units in [
        UnitSystem::default(),
        UnitSystem::new(r(7, 3), r(2, 5)).unwrap(),
        UnitSystem::new(r(1, 10), r(11, 2)).unwrap(),
    ] {
        for ctx in ContextId::ALL {
            let product = context_product(ctx, &units);
            let phase = product.scalar_phase().expect("product is a multiple of the identity");
            let expected = if ctx == ContextId::CcGamma { Phase::half_turn() } else { Phase::zero() };
            assert_eq!(phase, &expected, "{ctx}");
        }
        assert!(certify_contexts(&observable_table(&units)).iter().all(|c| c.certified));
    }
}

#[test]
fn compatible_iff_in_a_common_context_otherwise_anticommuting() {
    let m = compatibility_matrix(&UnitSystem::default());
    for a in ObservableId::ALL {
        for b in ObservableId::ALL {
            let phase = m.get(a, b);
            if a == b || shares_context(a, b) {
                assert!(phase.is_zero(), "{a} {b}");
            } else {
                assert_eq!(phase, &Phase::half_turn(), "{a} {b}");
            }
        }
    }
}

/// Oracle: apply both orderings of each pair to a random state on the grid
/// by direct shift-and-multiply, and read off the relative phase.
#[test]
fn commutator_phases_match_position_space_action() {
    let grid = GridSpec::default();
    let table = observable_table(grid.units());
    let psi = make_state(&StateSpec::random(5), &grid).unwrap();
    for a in ObservableId::ALL {
        for b in ObservableId::ALL {
            let (ua, ub) = (&table[a], &table[b]);
            let ab = apply_weyl(&apply_weyl(&psi, ub).unwrap(), ua).unwrap();
            let ba = apply_weyl(&apply_weyl(&psi, ua).unwrap(), ub).unwrap();
            let ratio = ba.inner(&ab);
            let expected = Complex64::from_polar(1.0, commutator_phase(ua, ub).radians());
            assert!((ratio - expected).norm() < 1e-10, "{a} {b}: {ratio} vs {expected}");
        }
    }
}

#[test]
fn context_products_match_position_space_action() {
    let grid = GridSpec::default();
    let table = observable_table(grid.units());
    let psi = make_state(&StateSpec::random(9), &grid).unwrap();
    for ctx in ContextId::ALL {
        let [a, b, c] = ctx.members();
        let out = apply_weyl(&apply_weyl(&apply_weyl(&psi, &table[c]).unwrap(), &table[b]).unwrap(), &table[a]).unwrap();
        let expected = psi.scaled(Complex64::new(f64::from(ctx.sign()), 0.0));
        assert!(out.distance(&expected) < 1e-10, "{ctx}");
    }
}

#[test]
fn compatibility_csv_has_36_rows_per_context() {
    let text = compatibility_csv(&observable_table(&UnitSystem::default())).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    for ctx in ContextId::ALL {
        let block: Vec<_> = rows.iter().filter(|r| &r[0] == ctx.name()).collect();
        assert_eq!(block.len(), 36, "{ctx}");
        assert!(block.iter().all(|r| &r[3] == "0"));
    }
    assert_eq!(rows.iter().filter(|r| &r[0] == "complex").count(), 81);
}

#[test]
fn weyl_relation_from_glossary() {
    // e^{-irx/ħ} e^{-itp/ħ} = e^{-irt/ħ} e^{-itp/ħ} e^{-irx/ħ}
    let units = UnitSystem::default();
    let x = WeylOp::exp(LinearForm::x1().scaled(&PiPoly::rational(r(-3, 2))), &units);
    let p = WeylOp::exp(LinearForm::p1().scaled(&PiPoly::pi(r(-1, 3))), &units);
    let lhs = weyl_compose(&x, &p);
    let rt = PiPoly::pi(r(1, 2));
    let rhs = weyl_compose(&WeylOp::new(LinearForm::zero(), Phase::new(-rt), &units), &weyl_compose(&p, &x));
    assert_eq!(lhs, rhs);
    assert!((commutator_phase(&x, &p).radians() - (2.0 * PI - PI / 2.0)).abs() < 1e-12);
}

fn coeff() -> impl Strategy<Value = PiPoly> {
    (-6i64..=6, 1i64..=4, -1i32..=1).prop_map(|(n, d, k)| PiPoly::monomial(r(n, d), k))
}

fn form() -> impl Strategy<Value = LinearForm> {
    (coeff(), coeff(), coeff(), coeff()).prop_map(|(x1, x2, p1, p2)| LinearForm { x1, x2, p1, p2 })
}

fn op() -> impl Strategy<Value = WeylOp> {
    (form(), -4i64..4).prop_map(|(g, q)| WeylOp::new(g, Phase::from_pi_multiple(r(q, 3)), &UnitSystem::default()))
}

proptest! {
    #[test]
    fn symplectic_form_is_antisymmetric(f in form(), g in form()) {
        prop_assert_eq!(symplectic_commutator(&f, &g), -symplectic_commutator(&g, &f));
        prop_assert!(symplectic_commutator(&f, &f).is_zero());
    }

    #[test]
    fn symplectic_form_is_bilinear(f in form(), g in form(), h in form(), c in coeff()) {
        let lhs = symplectic_commutator(&(f.clone() + g.scaled(&c)), &h);
        let rhs = symplectic_commutator(&f, &h) + &c * &symplectic_commutator(&g, &h);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn composition_is_associative(u in op(), v in op(), w in op()) {
        prop_assert_eq!(u.compose(&v).compose(&w), u.compose(&v.compose(&w)));
    }

    #[test]
    fn adjoint_inverts(u in op()) {
        let id = WeylOp::identity(&UnitSystem::default());
        prop_assert_eq!(u.compose(&u.adjoint()), id.clone());
        prop_assert_eq!(u.adjoint().compose(&u), id);
    }

    #[test]
    fn exchange_picks_up_commutator_phase(u in op(), v in op()) {
        let delta = commutator_phase(&u, &v);
        let twisted = WeylOp::new(LinearForm::zero(), delta.clone(), &UnitSystem::default()).compose(&v.compose(&u));
        prop_assert_eq!(u.compose(&v), twisted);
        prop_assert_eq!(&delta + &commutator_phase(&v, &u), Phase::zero());
    }
}
