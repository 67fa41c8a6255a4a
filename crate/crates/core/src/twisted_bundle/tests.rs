use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::form_algebra::{exterior_model, exterior_signed_permutation, Form, FormAlgebra, OmegaMatrix, Parity};
use crate::group_cocycle::{FiniteGroup, Phase, TwoCocycle};
use crate::gset::{FiniteGSet, GSetMap};
use crate::linalg::{self, CMat};
use crate::scalar::C64;

const TOL: f64 = 1e-10;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn mat(n: usize, v: &[f64]) -> CMat {
    CMat::from_iterator(n, n, v.iter().map(|&x| c(x))).transpose()
}

fn pauli_rho() -> Vec<CMat> {
    let sx = mat(2, &[0.0, 1.0, 1.0, 0.0]);
    let sz = mat(2, &[1.0, 0.0, 0.0, -1.0]);
    // ids: (a, b) = 2a + b
    vec![CMat::identity(2, 2), sz.clone(), sx.clone(), &sx * &sz]
}

fn pauli_bundle() -> TwistedBundle {
    TwistedBundle::over_point(TwoCocycle::pauli(), (2, 0), pauli_rho(), CMat::zeros(2, 2), TOL).unwrap()
}

fn trace_sum(e: &TwistedBundle, g: usize, t: f64) -> C64 {
    e.base()
        .fixed_points(g)
        .into_iter()
        .map(|x| e.supertrace_at(g, x, t).unwrap())
        .sum()
}

/// A random twisted rep over the point built from an `H`-equivariant odd
/// endomorphism on a sum of copies of the regular twisted rep.
fn random_point_bundle(rng: &mut ChaCha8Rng, cocycle: &TwoCocycle, copies: (usize, usize)) -> TwistedBundle {
    let group = cocycle.group().clone();
    let n = group.order();
    // left twisted regular rep: L(g) e_h = β(g, h) e_{gh}
    let reg: Vec<CMat> = group
        .elements()
        .map(|g| {
            let mut m = CMat::zeros(n, n);
            for h in group.elements() {
                m[(group.mul(g, h), h)] = cocycle.value(g, h).to_c64();
            }
            m
        })
        .collect();
    let (p, q) = copies;
    let dim = (p + q) * n;
    let rho: Vec<CMat> = reg
        .iter()
        .map(|r| {
            let blocks: Vec<&CMat> = std::iter::repeat(r).take(p + q).collect();
            linalg::block_diag(&blocks)
        })
        .collect();
    // Reynolds average of a random odd matrix
    let mut raw = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if (i < p * n) != (j < p * n) {
                raw[(i, j)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
    }
    let mut a0 = CMat::zeros(dim, dim);
    for g in group.elements() {
        let inv = &rho[group.inv(g)];
        let bi = cocycle.value(g, group.inv(g)).to_c64().inv();
        a0 += &rho[g] * &raw * inv.map(|z| z * bi);
    }
    a0 /= c(n as f64);
    TwistedBundle::over_point(cocycle.clone(), (p * n, q * n), rho, a0, 1e-9).unwrap()
}

#[test]
fn trivial_line_is_valid() {
    let beta = TwoCocycle::trivial(Arc::new(FiniteGroup::trivial()));
    let e = TwistedBundle::over_point(beta, (1, 0), vec![CMat::identity(1, 1)], CMat::zeros(1, 1), TOL).unwrap();
    assert_eq!(e.total_dim(), 1);
}

#[test]
fn pauli_rep_is_valid() {
    let e = pauli_bundle();
    assert_eq!(e.fibers(), &[(2, 0)]);
}

#[test]
fn pauli_data_fails_without_twist() {
    let beta = TwoCocycle::trivial(TwoCocycle::pauli().group().clone());
    let err = TwistedBundle::over_point(beta, (2, 0), pauli_rho(), CMat::zeros(2, 2), TOL).unwrap_err();
    match err {
        BundleError::TwistedComposition { g, h, x, deviation } => {
            let mut pair = [g, h];
            pair.sort();
            assert_eq!(pair, [1, 2]);
            assert_eq!(x, 0);
            assert!((deviation - 2.0).abs() < 1e-12);
        }
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn validation_reports_witnesses() {
    let beta = TwoCocycle::trivial(Arc::new(FiniteGroup::cyclic(2)));
    // odd ρ
    let swap = mat(2, &[0.0, 1.0, 1.0, 0.0]);
    let err = TwistedBundle::over_point(beta.clone(), (1, 1), vec![CMat::identity(2, 2), swap], CMat::zeros(2, 2), TOL)
        .unwrap_err();
    assert!(matches!(err, BundleError::NotEven { g: 1, x: 0, .. }));
    // non-equivariant A₀
    let sign = mat(2, &[1.0, 0.0, 0.0, -1.0]);
    let a0 = mat(2, &[0.0, 1.0, 1.0, 0.0]);
    let err = TwistedBundle::over_point(beta.clone(), (1, 1), vec![CMat::identity(2, 2), sign.clone()], a0.clone(), TOL)
        .unwrap_err();
    assert!(matches!(err, BundleError::NotEquivariant { g: 1, x: 0, .. }));
    // even A₀
    let err = TwistedBundle::over_point(beta.clone(), (1, 1), vec![CMat::identity(2, 2); 2], sign, TOL).unwrap_err();
    assert!(matches!(err, BundleError::ConnectionNotOdd { x: 0, .. }));
    // dimensions along an orbit
    let two = FiniteGSet::regular(beta.group().clone());
    let rho = vec![CMat::identity(1, 1), CMat::identity(2, 2), CMat::zeros(2, 1), CMat::zeros(1, 2)];
    let err = TwistedBundle::new(
        two,
        beta,
        vec![(1, 0), (2, 0)],
        rho,
        vec![CMat::zeros(1, 1), CMat::zeros(2, 2)],
        TOL,
    )
    .unwrap_err();
    assert!(matches!(err, BundleError::DimensionMismatch { .. }));
}

#[test]
fn direct_sum_examples() {
    let beta = TwoCocycle::trivial(Arc::new(FiniteGroup::trivial()));
    let even = TwistedBundle::over_point(beta.clone(), (1, 0), vec![CMat::identity(1, 1)], CMat::zeros(1, 1), TOL).unwrap();
    let odd = TwistedBundle::over_point(beta.clone(), (0, 1), vec![CMat::identity(1, 1)], CMat::zeros(1, 1), TOL).unwrap();
    assert_eq!(even.direct_sum(&odd).unwrap().fibers(), &[(1, 1)]);
    let p = pauli_bundle();
    let z = TwistedBundle::zero(p.base().clone(), p.cocycle().clone());
    let s = p.direct_sum(&z).unwrap();
    assert_eq!(s.fibers(), p.fibers());
    for g in 0..4 {
        assert_eq!(s.rho(g, 0), p.rho(g, 0));
    }
    assert!(matches!(p.direct_sum(&even), Err(BundleError::BaseMismatch)));
}

#[test]
fn direct_sum_puts_even_first_and_stays_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let beta = TwoCocycle::pauli();
    let a = random_point_bundle(&mut rng, &beta, (1, 1));
    let b = random_point_bundle(&mut rng, &beta, (2, 1));
    let s = a.direct_sum(&b).unwrap();
    assert_eq!(s.fibers(), &[(12, 8)]);
    let again = TwistedBundle::new(
        s.base().clone(),
        s.cocycle().clone(),
        s.fibers().to_vec(),
        s.rho_table().to_vec(),
        s.a0_table().to_vec(),
        1e-9,
    );
    assert!(again.is_ok());
    for g in 0..4 {
        let lhs = trace_sum(&s, g, 0.7);
        let rhs = trace_sum(&a, g, 0.7) + trace_sum(&b, g, 0.7);
        assert!((lhs - rhs).norm() < 1e-9);
    }
}

#[test]
fn trivial_theory_has_zero_character() {
    let beta = TwoCocycle::trivial(Arc::new(FiniteGroup::trivial()));
    let line = TwistedBundle::over_point(beta, (1, 0), vec![CMat::identity(1, 1)], CMat::zeros(1, 1), TOL).unwrap();
    let eps = TrivialTheory::new(line, TOL).unwrap();
    assert_eq!(eps.bundle().fibers(), &[(1, 1)]);
    assert!(eps.bundle().supertrace_at(0, 0, 1.0).unwrap().norm() < 1e-14);
    for lambda in [0.1, 1.0, 3.5] {
        let eps = TrivialTheory::scaled(pauli_bundle(), lambda, TOL).unwrap();
        for g in 0..4 {
            assert!(eps.bundle().supertrace_at(g, 0, 1.0).unwrap().norm() < 1e-12);
        }
        // A₀ invertible
        assert!(linalg::min_singular_value(eps.bundle().a0(0)) > 0.5 * lambda);
    }
    let graded = pauli_bundle().parity_shift();
    assert!(matches!(TrivialTheory::new(graded, TOL), Err(BundleError::NotUngraded)));
}

#[test]
fn transport_examples() {
    let p = pauli_bundle();
    for t in [0.0, 0.5, 2.0] {
        let r = p.transport(0, &SuperTime::theta(t)).unwrap();
        assert!(r.distance(&GrassmannMatrix::identity(vec![Parity::Even; 2])) < 1e-14);
    }
    let beta = TwoCocycle::trivial(Arc::new(FiniteGroup::trivial()));
    let a0 = mat(2, &[0.0, 1.0, 1.0, 0.0]);
    let e = TwistedBundle::over_point(beta.clone(), (1, 1), vec![CMat::identity(2, 2)], a0, TOL).unwrap();
    for t in [0.0, 0.3, 1.7] {
        let r = e.transport(0, &SuperTime::even(t)).unwrap();
        let want = CMat::identity(2, 2).map(|z| z * (-t).exp());
        assert!(linalg::max_abs_diff(r.one(), &want) < 1e-12);
        assert!(linalg::max_abs(r.theta()) < 1e-15);
    }
    let nil = mat(2, &[0.0, 1.0, 0.0, 0.0]);
    let e = TwistedBundle::over_point(beta, (1, 1), vec![CMat::identity(2, 2)], nil.clone(), TOL).unwrap();
    let r = e.transport(0, &SuperTime::theta(1.3)).unwrap();
    assert!(linalg::max_abs_diff(r.one(), &CMat::identity(2, 2)) < 1e-15);
    assert!(linalg::max_abs_diff(r.theta(), &nil) < 1e-15);
    assert!(matches!(e.transport(0, &SuperTime::even(-1.0)), Err(BundleError::NegativeTime(_))));
}

fn check_semigroup(e: &TwistedBundle, g1: usize, g2: usize, t1: f64, t2: f64) -> f64 {
    let group = e.base().group().clone();
    let lhs = &e.transport(g1, &SuperTime::theta(t1)).unwrap() * &e.transport(g2, &SuperTime::eta(t2)).unwrap();
    let time = SuperTime::theta(t1).compose(&SuperTime::eta(t2));
    let rhs = e
        .transport(group.mul(g1, g2), &time)
        .unwrap()
        .scale(e.cocycle().value(g1, g2).to_c64());
    lhs.distance(&rhs)
}

#[test]
fn transport_commutes_with_group_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let e = random_point_bundle(&mut rng, &TwoCocycle::pauli(), (1, 1));
    for g in 0..4 {
        for h in 0..4 {
            let r = e.transport(h, &SuperTime::even(0.4)).unwrap();
            let lhs = r.left_mul(&e.global_rho(g));
            let rhs = e
                .transport(e.base().group().conj(g, h), &SuperTime::even(0.4))
                .unwrap()
                .right_mul(&e.global_rho(g));
            let phase = (e.cocycle().value(g, h) / e.cocycle().value(e.base().group().conj(g, h), g)).to_c64();
            assert!(lhs.distance(&rhs.scale(phase)) < 1e-9);
        }
    }
}

#[test]
fn mckean_singer_exact_tier() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let e = random_point_bundle(&mut rng, &TwoCocycle::pauli(), (2, 1));
    for g in 0..4 {
        let base = trace_sum(&e, g, 0.0);
        for t in [0.1, 1.0, 4.0] {
            assert!((trace_sum(&e, g, t) - base).norm() < 1e-9);
        }
    }
}

#[test]
fn pullback_examples() {
    let p = pauli_bundle();
    let id = GSetMap::identity(p.base());
    let q = p.pullback(&id).unwrap();
    assert_eq!(q.rho_table(), p.rho_table());
    let group = p.base().group().clone();
    let two = FiniteGSet::from_fn(group.clone(), 2, |g, x| if g & 1 == 1 { 1 - x } else { x }).unwrap();
    let f = GSetMap::new(two.clone(), p.base().clone(), vec![0, 0]).unwrap();
    let pulled = p.pullback(&f).unwrap();
    assert_eq!(pulled.fibers(), &[(2, 0), (2, 0)]);
    let again = TwistedBundle::new(
        two,
        p.cocycle().clone(),
        pulled.fibers().to_vec(),
        pulled.rho_table().to_vec(),
        pulled.a0_table().to_vec(),
        TOL,
    );
    assert!(again.is_ok());
    for g in group.elements() {
        for x in pulled.base().fixed_points(g) {
            let lhs = pulled.supertrace_at(g, x, 1.0).unwrap();
            let rhs = p.supertrace_at(g, f.apply(x), 1.0).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}

#[test]
fn induced_bundle_matches_pullback_for_free_orbit() {
    let group = Arc::new(FiniteGroup::cyclic(2));
    let beta = TwoCocycle::trivial(group.clone());
    let two = FiniteGSet::regular(group);
    let sigma = vec![CMat::identity(1, 1)];
    let e = TwistedBundle::induced(two, beta, 0, (1, 0), &sigma, &CMat::zeros(1, 1), TOL).unwrap();
    assert_eq!(e.fibers(), &[(1, 0), (1, 0)]);
    assert!((e.rho(1, 0)[(0, 0)] - c(1.0)).norm() < 1e-15);
}

#[test]
fn induced_bundle_from_twisted_stabilizer_rep() {
    // G = Z2 × Z2 × Z2 with the Pauli cocycle pulled back along the projection
    // to the last two factors; X = G / {(0,b,c)} has two points
    let pauli = TwoCocycle::pauli();
    let group = Arc::new(FiniteGroup::abelian(&[2, 2, 2]));
    let beta = TwoCocycle::from_fn(group.clone(), |g, h| pauli.value(g % 4, h % 4)).unwrap();
    let x = FiniteGSet::cosets(group.clone(), &[0, 1, 2, 3]).unwrap();
    let x0 = (0..x.n_points()).find(|&p| x.stabilizer(p).len() == 4).unwrap();
    let stab = x.stabilizer_subgroup(x0);
    let rho = pauli_rho();
    let sigma: Vec<CMat> = (0..4).map(|l| rho[stab.ambient(l) % 4].clone()).collect();
    let e = TwistedBundle::induced(x, beta, x0, (2, 0), &sigma, &CMat::zeros(2, 2), TOL).unwrap();
    assert_eq!(e.total_dim(), 4);
}

#[test]
fn parity_shift_negates_characters() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let e = random_point_bundle(&mut rng, &TwoCocycle::pauli(), (2, 1));
    let s = e.parity_shift();
    for g in 0..4 {
        assert!((trace_sum(&e, g, 0.5) + trace_sum(&s, g, 0.5)).norm() < 1e-9);
    }
}

// graded tier

/// Λ[α, β] with Z/2 acting by α ↦ −α, β ↦ −β.
fn lambda2() -> Arc<FormAlgebra> {
    let alg = exterior_model::<C64>(&[1, 1], TOL).unwrap();
    let act = exterior_signed_permutation::<C64>(&[0, 1], &[-1, -1]);
    Arc::new(alg.with_action(1, act).unwrap())
}

#[test]
fn graded_curvature_matches_symbolic_expansion() {
    let alg = Arc::new(exterior_model::<C64>(&[1, 1], TOL).unwrap());
    let grading = vec![Parity::Even, Parity::Odd];
    let a0 = mat(2, &[0.0, 2.0, 0.5, 0.0]);
    let n = mat(2, &[0.0, -1.0, 3.0, 0.0]);
    let ab = Form::named(&alg, "ab").unwrap();
    let m = &OmegaMatrix::from_cmat(&alg, grading.clone(), grading.clone(), &a0)
        + &OmegaMatrix::from_cmat(&alg, grading.clone(), grading.clone(), &n).form_times(&ab);
    assert!(m.is_odd(1e-14));
    let f = curvature_of(&m);
    let want = &OmegaMatrix::from_cmat(&alg, grading.clone(), grading.clone(), &(&a0 * &a0))
        + &OmegaMatrix::from_cmat(&alg, grading.clone(), grading.clone(), &(&a0 * &n + &n * &a0)).form_times(&ab);
    assert!(f.distance(&want) < 1e-14);
    assert!(f.is_even(1e-14));
    let zero = OmegaMatrix::zeros(&alg, grading.clone(), grading);
    assert!(curvature_of(&zero).max_abs() == 0.0);
}

#[test]
fn packet_closure_and_validation() {
    let alg = lambda2();
    let group = Arc::new(FiniteGroup::cyclic(2));
    let beta = TwoCocycle::trivial(group);
    let grading = vec![Parity::Even, Parity::Odd];
    // M = A₀ + (a-entries) with the generator acting by the grading sign
    let a = Form::named(&alg, "a").unwrap();
    let b = Form::named(&alg, "b").unwrap();
    let mut m = OmegaMatrix::zeros(&alg, grading.clone(), grading.clone());
    m.set(0, 1, Form::constant(&alg, c(1.0)));
    m.set(1, 0, Form::constant(&alg, c(1.0)));
    // degree-one even-block entries
    m.set(0, 0, a.scale(&c(0.5)));
    m.set(1, 1, b.scale(&c(-2.0)));
    let r = OmegaMatrix::identity(&alg, grading.clone());
    // R_1 = id: equivariance needs a_1(M) = M, which fails for the odd forms
    let gens: BTreeMap<usize, OmegaMatrix> = [(1, r.clone())].into();
    let err = Packet::new(&beta, 0, alg.clone(), grading.clone(), m.clone(), gens.clone(), TOL).unwrap_err();
    assert!(matches!(err, BundleError::NotEquivariant { .. } | BundleError::Packet { .. }));
    // with only the constant part it is equivariant
    let mut m0 = OmegaMatrix::zeros(&alg, grading.clone(), grading.clone());
    m0.set(0, 1, Form::constant(&alg, c(1.0)));
    m0.set(1, 0, Form::constant(&alg, c(1.0)));
    let p = Packet::new(&beta, 0, alg.clone(), grading, m0, gens, TOL).unwrap();
    assert_eq!(p.centralizer(), vec![0, 1]);
    assert_eq!(p.rank(), (1, 1));
    assert!(p.heat_supertrace(0, 1.0).unwrap().max_abs() < 1e-14);
}

#[test]
fn packet_rejects_odd_rho_and_even_m() {
    let alg = lambda2();
    let beta = TwoCocycle::trivial(Arc::new(FiniteGroup::cyclic(2)));
    let grading = vec![Parity::Even, Parity::Odd];
    let even = OmegaMatrix::identity(&alg, grading.clone());
    let err = Packet::new(&beta, 0, alg.clone(), grading.clone(), even, BTreeMap::new(), TOL).unwrap_err();
    assert!(matches!(err, BundleError::Form(_) | BundleError::Packet { .. }));
    let odd = OmegaMatrix::from_cmat(&alg, grading.clone(), grading.clone(), &mat(2, &[0.0, 1.0, 1.0, 0.0]));
    let gens: BTreeMap<usize, OmegaMatrix> = [(1, odd.clone())].into();
    let zero = OmegaMatrix::zeros(&alg, grading.clone(), grading.clone());
    let err = Packet::new(&beta, 0, alg, grading, zero, gens, TOL).unwrap_err();
    assert!(matches!(err, BundleError::Form(_) | BundleError::Packet { .. }));
}

#[test]
fn pauli_packet_generates_centralizer() {
    let beta = TwoCocycle::pauli();
    let alg = Arc::new(
        crate::form_algebra::zero_dim_model::<C64>(1, TOL)
            .with_action(1, crate::form_algebra::point_permutation(&[0]))
            .unwrap()
            .with_action(2, crate::form_algebra::point_permutation(&[0]))
            .unwrap(),
    );
    let grading = vec![Parity::Even; 2];
    let rho = pauli_rho();
    let gens: BTreeMap<usize, OmegaMatrix> = [1, 2]
        .into_iter()
        .map(|h| (h, OmegaMatrix::from_cmat(&alg, grading.clone(), grading.clone(), &rho[h])))
        .collect();
    let m = OmegaMatrix::zeros(&alg, grading.clone(), grading.clone());
    let p = Packet::new(&beta, 0, alg.clone(), grading.clone(), m, gens, TOL).unwrap();
    let r3 = p.rho(3).unwrap();
    let want = OmegaMatrix::from_cmat(&alg, grading.clone(), grading, &rho[3]);
    assert!(r3.distance(&want) < 1e-14);
    assert!((p.heat_supertrace(0, 1.0).unwrap().coeff(0) - c(2.0)).norm() < 1e-14);
    for h in 1..4 {
        assert!(p.heat_supertrace(h, 1.0).unwrap().max_abs() < 1e-14);
    }
    let bundle = GradedBundle::new(beta, vec![p]).unwrap();
    assert!(matches!(bundle.require_packet(1), Err(BundleError::MissingPacket { class_rep: 1 })));
    let eps = GradedTrivialTheory::scaled(bundle, 2.0).unwrap();
    let q = eps.bundle().packet(0).unwrap();
    assert_eq!(q.rank(), (2, 2));
    for h in 0..4 {
        assert!(q.heat_supertrace(h, 1.0).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn graded_trivial_theory_with_connection_on_circle_like_model() {
    // Λ[a] with an ordinary connection a·N on a rank-2 ungraded bundle
    let alg = Arc::new(exterior_model::<C64>(&[1], TOL).unwrap());
    let beta = TwoCocycle::trivial(Arc::new(FiniteGroup::trivial()));
    let grading = vec![Parity::Even; 2];
    let a = Form::named(&alg, "a").unwrap();
    let conn = OmegaMatrix::from_cmat(&alg, grading.clone(), grading.clone(), &mat(2, &[1.0, 2.0, -0.5, 0.3])).form_times(&a);
    let p = Packet::new(&beta, 0, alg, grading, conn, BTreeMap::new(), TOL).unwrap();
    let v = GradedBundle::new(beta, vec![p]).unwrap();
    for lambda in [0.25, 1.0, 4.0] {
        let eps = GradedTrivialTheory::scaled(v.clone(), lambda).unwrap();
        let z = eps.bundle().packet(0).unwrap().heat_supertrace(0, 1.0).unwrap();
        assert!(z.max_abs() < 1e-12, "λ = {lambda}: {z:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn twisted_super_semigroup_law(seed in any::<u64>(), t1 in 0.0f64..2.0, t2 in 0.0f64..2.0, shift in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pauli = TwoCocycle::pauli();
        let b: Vec<Phase> = (0..4).map(|g| if g == 0 { Phase::ONE } else { Phase::new(rng.random_range(0..6), 6).unwrap() }).collect();
        let beta = pauli.coboundary_twist(&b).unwrap();
        let e = random_point_bundle(&mut rng, &beta, (1, 1));
        for g1 in 0..4 {
            let g2 = (g1 + shift) % 4;
            prop_assert!(check_semigroup(&e, g1, g2, t1, t2) < 1e-9);
        }
    }

    #[test]
    fn semigroup_law_on_s3_points(seed in any::<u64>(), t1 in 0.0f64..1.5, t2 in 0.0f64..1.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let group = Arc::new(FiniteGroup::symmetric(3));
        let beta = TwoCocycle::trivial(group.clone());
        let x = FiniteGSet::from_fn(group.clone(), 3, group_perm_image).unwrap();
        // induced from the trivial rep of the stabilizer of 0, with A₀ on (1|1)
        let a0 = mat(2, &[0.0, rng.random_range(0.1..2.0), rng.random_range(0.1..2.0), 0.0]);
        let stab = x.stabilizer_subgroup(0);
        let sigma = vec![CMat::identity(2, 2); stab.group.order()];
        let e = TwistedBundle::induced(x, beta, 0, (1, 1), &sigma, &a0, TOL).unwrap();
        for g1 in group.elements() {
            for g2 in group.elements() {
                prop_assert!(check_semigroup(&e, g1, g2, t1, t2) < 1e-9);
            }
        }
    }

    #[test]
    fn characters_add_under_direct_sum(seed in any::<u64>(), t in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta = TwoCocycle::pauli();
        let a = random_point_bundle(&mut rng, &beta, (1, 0));
        let b = random_point_bundle(&mut rng, &beta, (1, 1));
        let s = a.direct_sum(&b).unwrap();
        for g in 0..4 {
            let d = trace_sum(&s, g, t) - trace_sum(&a, g, t) - trace_sum(&b, g, t);
            prop_assert!(d.norm() < 1e-9);
        }
    }
}

/// Image of point `p` under the permutation with lexicographic index `g`.
fn group_perm_image(g: usize, p: usize) -> usize {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS[g][p]
}
