//! Acceptance run: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twistk::character::{CharacterSource, InertiaSection};
use twistk::chern_simons::{cs_form, cs_form_exact, identity_isomorphism, rg_flow_cs, rg_flow_cs_exact};
use twistk::diff_k::{
    brute_force_stable_search, check_graded_isomorphism, eft_sum, enumerate_ungraded, is_isomorphic, is_stably_isomorphic,
    khat_class, khat_rank, khat_rank_exact, orbit_irrep_sum, EffectiveTheory, GradedTheory, IrrepTable,
};
use twistk::form_algebra::{
    exterior_model, jet_model, jet_signed_permutation, zero_dim_model, Form, FormAlgebra, OmegaMatrix, Parity,
};
use twistk::group_cocycle::{FiniteGroup, TwoCocycle};
use twistk::gset::FiniteGSet;
use twistk::linalg::CMat;
use twistk::sample;
use twistk::scalar::C64;
use twistk::twisted_bundle::{GradedBundle, GradedTrivialTheory, Packet, SuperTime, TrivialTheory, TwistedBundle};
use twistk::{Quadrature, Settings};
use twistk_cli::report::Report;
use twistk_cli::resolve::{self, Bundle};
use twistk_cli::schema;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn grading(p: usize, q: usize) -> Vec<Parity> {
    [vec![Parity::Even; p], vec![Parity::Odd; q]].concat()
}

fn fixed(order: usize) -> Settings {
    Settings {
        quadrature: Quadrature::fixed(order),
        ..Settings::default()
    }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

const DATA_FILES: [&str; 3] = ["pauli.json", "s3_points.json", "circle_model.json"];

// ---------------------------------------------------------------- instances

fn group(g: FiniteGroup) -> Arc<FiniteGroup> {
    Arc::new(g)
}

fn cosets_of(g: &Arc<FiniteGroup>, gens: &[usize]) -> FiniteGSet {
    FiniteGSet::cosets(g.clone(), &g.generated_by(gens)).unwrap()
}

fn element_of_order(g: &FiniteGroup, n: usize) -> usize {
    g.elements().find(|&h| g.element_order(h) == n).unwrap()
}

fn s3_points() -> FiniteGSet {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    FiniteGSet::from_fn(group(FiniteGroup::symmetric(3)), 3, |g, x| PERMS[g][x]).unwrap()
}

/// A fixed family of `(X, β)` with `|G| ≤ 8`.
fn instance_pool(rng: &mut ChaCha8Rng) -> Vec<(&'static str, FiniteGSet, TwoCocycle)> {
    let z2 = group(FiniteGroup::cyclic(2));
    let z4 = group(FiniteGroup::cyclic(4));
    let pauli = TwoCocycle::pauli();
    let s3 = s3_points();
    let d4 = group(FiniteGroup::dihedral(4));
    let q8 = group(FiniteGroup::quaternion());
    let z2z4 = sample::random_abelian_cocycle(&[2, 4], rng);
    let z2cubed = sample::random_abelian_cocycle(&[2, 2, 2], rng);
    let z4_twisted = TwoCocycle::trivial(z4.clone())
        .coboundary_twist(&sample::random_coboundary(&z4, 8, rng))
        .unwrap();
    let reflection = element_of_order(&d4, 2);
    vec![
        ("Z2 on a point", FiniteGSet::point(z2.clone()), TwoCocycle::trivial(z2.clone())),
        ("Z2 free on two points", FiniteGSet::regular(z2.clone()), TwoCocycle::trivial(z2.clone())),
        ("Z4 with a coboundary on a point", FiniteGSet::point(z4.clone()), z4_twisted),
        ("Pauli on a point", FiniteGSet::point(pauli.group().clone()), pauli.clone()),
        ("Pauli free on four points", FiniteGSet::regular(pauli.group().clone()), pauli.clone()),
        ("S3 on three points", s3.clone(), TwoCocycle::trivial(s3.group().clone())),
        ("D4 on the vertices of a square", cosets_of(&d4, &[reflection]), TwoCocycle::trivial(d4.clone())),
        ("Q8 on a point", FiniteGSet::point(q8.clone()), TwoCocycle::trivial(q8)),
        ("Z2xZ4 random cocycle on a point", FiniteGSet::point(z2z4.group().clone()), z2z4.clone()),
        ("Z2^3 random cocycle on two points", cosets_of(z2cubed.group(), &[1, 2]), z2cubed),
    ]
}

/// A nonzero random bundle with every fiber of dimension at most 6.
fn random_bundle(x: &FiniteGSet, beta: &TwoCocycle, rng: &mut ChaCha8Rng) -> TwistedBundle {
    let shortest_orbit = x.orbits().iter().map(Vec::len).min().unwrap_or(1);
    loop {
        let e = sample::random_exact_bundle(x, beta, 6 * shortest_orbit, rng).unwrap();
        let max_fiber = (0..x.n_points()).map(|p| e.fiber_dim(p)).max().unwrap_or(0);
        if e.total_dim() > 0 && max_fiber <= 6 {
            return e;
        }
    }
}

// ---------------------------------------------------------------- criterion 1

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let pool = instance_pool(&mut rng);
    let mut bundles = 0;
    let mut identities = 0;
    let mut worst = [0.0f64; 4];
    while bundles < 240 {
        let (name, x, beta) = &pool[bundles % pool.len()];
        let e = random_bundle(x, beta, &mut rng);
        let group = x.group();
        for g1 in group.elements() {
            for g2 in group.elements() {
                let (t1, t2) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
                let lhs = &e.transport(g1, &SuperTime::theta(t1)).unwrap() * &e.transport(g2, &SuperTime::eta(t2)).unwrap();
                let time = SuperTime::theta(t1).compose(&SuperTime::eta(t2));
                let rhs = e
                    .transport(group.mul(g1, g2), &time)
                    .unwrap()
                    .scale(beta.value(g1, g2).to_c64());
                let dists = lhs.component_distances(&rhs);
                for (w, d) in worst.iter_mut().zip(dists) {
                    *w = w.max(d);
                }
                ensure(dists.iter().all(|&d| d < 1e-9), || {
                    format!("{name}: ({g1}, {g2}) at t = ({t1}, {t2}) deviates by {dists:?}")
                })?;
                identities += 1;
            }
        }
        bundles += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{bundles} bundles, {identities} identities, worst components {:.1e}/{:.1e}/{:.1e}/{:.1e}, {elapsed:.1?}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

// ---------------------------------------------------------------- criterion 2

fn check_exact_character(name: &str, e: &TwistedBundle) -> Result<usize, String> {
    let z = e.character(1e-9).map_err(|err| format!("{name}: {err}"))?;
    let (defect, _) = z.closedness_defect();
    ensure(defect <= 1e-9, || format!("{name}: dZ = {defect:e}"))?;
    let report = e.check_covariance(&z, 1e-9).map_err(|err| format!("{name}: {err}"))?;
    ensure(report.passed(), || format!("{name}: covariance {report:?}"))?;
    let base = e.base();
    let mut checks = report.identities_checked;
    for g in base.group().elements() {
        for x in base.fixed_points(g) {
            let at_one = e.supertrace_at(g, x, 1.0).unwrap();
            for t in [0.5, 2.0] {
                let dev = (e.supertrace_at(g, x, t).unwrap() - at_one).norm();
                ensure(dev <= 1e-9, || format!("{name}: t = {t} at ({g}, {x}) moves by {dev:e}"))?;
                checks += 1;
            }
        }
    }
    Ok(checks)
}

/// Undoes the heat rescaling: degree `k` is multiplied by `t^{-k/2}`.
fn rescale(form: &Form, t: f64) -> Form {
    let degrees = form.algebra().degrees();
    let coeffs = form
        .coeffs()
        .iter()
        .zip(degrees)
        .map(|(z, &k)| z * t.powf(-(k as f64) / 2.0))
        .collect();
    Form::new(form.algebra(), coeffs).unwrap()
}

fn check_graded_character(name: &str, e: &GradedBundle) -> Result<usize, String> {
    let z = e.character(1e-9).map_err(|err| format!("{name}: {err}"))?;
    let (defect, _) = z.closedness_defect();
    ensure(defect <= 1e-9, || format!("{name}: dZ = {defect:e}"))?;
    let report = e.check_covariance(&z, 1e-9).map_err(|err| format!("{name}: {err}"))?;
    ensure(report.passed(), || format!("{name}: covariance {report:?}"))?;
    let mut checks = report.identities_checked;
    for p in e.packets() {
        let g = p.class_rep();
        let at_one = p.heat_supertrace(g, 1.0).unwrap();
        for t in [0.5, 2.0] {
            let diff = &rescale(&p.heat_supertrace(g, t).unwrap(), t) - &at_one;
            ensure(diff.is_exact(1e-9), || format!("{name}: t = {t} at [{g}] changes the class"))?;
            checks += 1;
        }
    }
    Ok(checks)
}

fn z2_jet_bundle(jet: &Arc<FormAlgebra>, point: &Arc<FormAlgebra>, scale: f64, rng: &mut ChaCha8Rng) -> GradedBundle {
    let beta = TwoCocycle::trivial(group(FiniteGroup::cyclic(2)));
    let gr = grading(2, 1);
    let r = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0), c(-1.0)]));
    let packet = |alg: &Arc<FormAlgebra>, g: usize, rng: &mut ChaCha8Rng| {
        let rr = OmegaMatrix::from_cmat(alg, gr.clone(), gr.clone(), &r);
        let all = BTreeMap::from([(0, OmegaMatrix::identity(alg, gr.clone())), (1, rr.clone())]);
        let raw = sample::random_odd_omega(alg, &gr, rng).scale(&c(scale));
        let m = sample::reynolds_connection(&raw, &all).unwrap();
        Packet::new(&beta, g, alg.clone(), gr.clone(), m, BTreeMap::from([(1, rr)]), 1e-9).unwrap()
    };
    let p0 = packet(jet, 0, rng);
    let p1 = packet(point, 1, rng);
    GradedBundle::new(beta.clone(), vec![p0, p1]).unwrap()
}

fn z2_jet_models() -> (Arc<FormAlgebra>, Arc<FormAlgebra>) {
    let jet = jet_model::<C64>(1, 1, 1e-9)
        .unwrap()
        .with_action(1, jet_signed_permutation(1, 1, &[0], &[-1]))
        .unwrap();
    (Arc::new(jet), Arc::new(zero_dim_model::<C64>(1, 1e-9)))
}

fn trivial_group_bundle(alg: &Arc<FormAlgebra>, gr: &[Parity], m: OmegaMatrix) -> GradedBundle {
    let beta = TwoCocycle::trivial(group(FiniteGroup::trivial()));
    let p = Packet::new(&beta, 0, alg.clone(), gr.to_vec(), m, BTreeMap::new(), 1e-9).unwrap();
    GradedBundle::new(beta, vec![p]).unwrap()
}

fn data_file_bundles() -> Vec<(String, Bundle)> {
    let mut out = Vec::new();
    for name in DATA_FILES {
        let file = schema::parse(&data(name)).unwrap();
        let ctx = resolve::context(&file, 1e-9).unwrap();
        for b in file.bundles.keys() {
            out.push((format!("{name}:{b}"), ctx.bundle(&file, b, 1e-9).unwrap()));
        }
    }
    out
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let pool = instance_pool(&mut rng);
    let (mut exact, mut graded, mut checks) = (0, 0, 0);
    for k in 0..60 {
        let (name, x, beta) = &pool[k % pool.len()];
        checks += check_exact_character(name, &random_bundle(x, beta, &mut rng))?;
        exact += 1;
    }
    for (name, b) in data_file_bundles() {
        match b {
            Bundle::Exact(e) => {
                checks += check_exact_character(&name, &e)?;
                exact += 1;
            }
            Bundle::Graded(e) => {
                checks += check_graded_character(&name, &e)?;
                graded += 1;
            }
        }
    }
    let (jet, point) = z2_jet_models();
    for _ in 0..10 {
        checks += check_graded_character("Z2 reflecting jets", &z2_jet_bundle(&jet, &point, 1.0, &mut rng))?;
        graded += 1;
    }
    for (vars, order) in [(2, 1), (2, 2), (3, 1)] {
        let alg = Arc::new(jet_model::<C64>(vars, order, 1e-9).unwrap());
        for (p, q) in [(1, 1), (2, 1)] {
            let gr = grading(p, q);
            let m = sample::random_odd_omega(&alg, &gr, &mut rng);
            checks += check_graded_character("jets", &trivial_group_bundle(&alg, &gr, m))?;
            graded += 1;
        }
    }
    Ok(format!("{exact} exact and {graded} graded bundles, {checks} identities"))
}

// ---------------------------------------------------------------- criterion 3

/// `Z = sTr exp(−(δM + M²))` over the trivial group: `δ` and the
/// supertrace written out entrywise, the exponential summed as a power
/// series in the regular representation.
fn character_oracle(m: &OmegaMatrix) -> Form {
    let alg = m.algebra().clone();
    let n = m.nrows();
    let sign = |i: usize| if m.rows()[i].is_odd() { -1.0 } else { 1.0 };
    let mut f = OmegaMatrix::zeros(&alg, m.rows().to_vec(), m.cols().to_vec());
    for i in 0..n {
        for j in 0..n {
            let mut e = m.entry(i, j).d().scale(&c(sign(i)));
            for k in 0..n {
                e = &e + &m.entry(i, k).mul(m.entry(k, j));
            }
            f.set(i, j, e);
        }
    }
    let big = f.to_regular() * c(-1.0);
    let mut term = CMat::identity(big.nrows(), big.ncols());
    let mut sum = term.clone();
    for k in 1..80 {
        term = &term * &big / c(k as f64);
        sum += &term;
    }
    let heat = OmegaMatrix::from_regular(&alg, m.rows().to_vec(), m.cols().to_vec(), &sum);
    let mut z = Form::zero(&alg);
    for i in 0..n {
        z = &z + &heat.entry(i, i).scale(&c(sign(i)));
    }
    z
}

/// `‖dCS − (Z₁ − Z₀)‖` for the linear path `M₀ → M₁` with the oracle
/// characters.
fn dcs_defect(alg: &Arc<FormAlgebra>, gr: &[Parity], m0: &OmegaMatrix, m1: &OmegaMatrix, order: usize) -> (f64, f64) {
    let e0 = trivial_group_bundle(alg, gr, m0.clone());
    let e1 = trivial_group_bundle(alg, gr, m1.clone());
    let cs = cs_form(&e0, &e1, &identity_isomorphism(&e0), &fixed(order)).unwrap();
    let diff = &character_oracle(m1) - &character_oracle(m0);
    (cs.form(0).unwrap().d().distance(&diff), diff.max_abs())
}

/// Roundoff floor under which a larger error at higher order still counts
/// as not growing.
const FLOOR: f64 = 1e-12;

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut exterior = 0;
    let mut worst = 0.0f64;
    let degree_sets: [&[u32]; 5] = [&[1], &[1, 1], &[1, 3], &[1, 1, 1], &[1, 1, 3]];
    while exterior < 60 {
        let degrees = degree_sets[exterior % degree_sets.len()];
        let alg = Arc::new(exterior_model::<C64>(degrees, 1e-9).unwrap());
        let rank = 1 + exterior % 4;
        let p = rng.random_range(0..=rank);
        let gr = grading(p, rank - p);
        let m0 = sample::random_odd_omega(&alg, &gr, &mut rng);
        let m1 = sample::random_odd_omega(&alg, &gr, &mut rng);
        let (err32, _) = dcs_defect(&alg, &gr, &m0, &m1, 32);
        let (err64, _) = dcs_defect(&alg, &gr, &m0, &m1, 64);
        ensure(err32 < 1e-6, || format!("Λ{degrees:?} rank ({p}|{}): {err32:e}", rank - p))?;
        ensure(err64 <= err32.max(FLOOR), || format!("Λ{degrees:?}: error grew {err32:e} → {err64:e}"))?;
        worst = worst.max(err32);
        exterior += 1;
    }
    let mut jets = 0;
    let mut converging = 0;
    for (vars, order, (p, q)) in [(2, 1, (1, 1)), (2, 1, (2, 1)), (2, 2, (1, 1)), (3, 1, (1, 2)), (2, 1, (2, 2)), (3, 1, (1, 1))] {
        let alg = Arc::new(jet_model::<C64>(vars, order, 1e-9).unwrap());
        let gr = grading(p, q);
        for _ in 0..2 {
            let m0 = sample::random_odd_omega(&alg, &gr, &mut rng);
            let m1 = sample::random_odd_omega(&alg, &gr, &mut rng);
            let (err4, size) = dcs_defect(&alg, &gr, &m0, &m1, 4);
            let (err32, _) = dcs_defect(&alg, &gr, &m0, &m1, 32);
            let (err64, _) = dcs_defect(&alg, &gr, &m0, &m1, 64);
            ensure(size > 1e-3, || format!("jet({vars},{order}) gives Z₁ = Z₀"))?;
            ensure(err32 < 1e-6, || format!("jet({vars},{order}) rank ({p}|{q}): {err32:e}"))?;
            ensure(err64 <= err32.max(FLOOR), || format!("jet({vars},{order}): error grew {err32:e} → {err64:e}"))?;
            ensure(err32 <= err4, || format!("jet({vars},{order}): order 32 worse than order 4"))?;
            if err4 > 10.0 * err32.max(FLOOR) {
                converging += 1;
            }
            worst = worst.max(err32);
            jets += 1;
        }
    }
    ensure(converging > 0, || "no jet instance shows quadrature convergence".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{exterior} exterior and {jets} jet instances, worst error {worst:.1e} at order 32, {elapsed:.1?}"
    ))
}

// ---------------------------------------------------------------- criterion 4

/// Number of β-regular classes of the stabilizer, summed over orbits, from
/// the cocycle table alone.
fn regular_class_oracle(beta: &TwoCocycle, x: &FiniteGSet) -> usize {
    let group = beta.group();
    let mut total = 0;
    for orbit in x.orbits() {
        let stab = x.stabilizer(orbit[0]);
        let mut seen = vec![false; group.order()];
        for &g in &stab {
            if seen[g] {
                continue;
            }
            for &h in &stab {
                seen[group.mul(group.mul(h, g), group.inv(h))] = true;
            }
            let regular = stab
                .iter()
                .filter(|&&h| group.mul(h, g) == group.mul(g, h))
                .all(|&h| (beta.value(h, g).to_c64() / beta.value(g, h).to_c64() - c(1.0)).norm() < 1e-12);
            if regular {
                total += 1;
            }
        }
    }
    total
}

/// The fixed-point formula in floating point.
fn fixed_point_oracle(beta: &TwoCocycle, x: &FiniteGSet) -> f64 {
    let group = beta.group();
    let mut seen = vec![false; group.order()];
    let mut total = c(0.0);
    for g in group.elements() {
        if seen[g] {
            continue;
        }
        for h in group.elements() {
            seen[group.mul(group.mul(h, g), group.inv(h))] = true;
        }
        let cent: Vec<usize> = group.elements().filter(|&h| group.mul(h, g) == group.mul(g, h)).collect();
        let mut s = c(0.0);
        for &h in &cent {
            let chi = beta.value(h, g).to_c64() / beta.value(g, h).to_c64();
            let n = (0..x.n_points()).filter(|&p| x.act(g, p) == p && x.act(h, p) == p).count();
            s += chi * n as f64;
        }
        total += s / cent.len() as f64;
    }
    total.re
}

fn rank_case(label: &str, beta: &TwoCocycle, x: &FiniteGSet, want: Option<usize>) -> Result<usize, String> {
    let rank = khat_rank(beta, x).map_err(|e| format!("{label}: {e}"))?;
    let exact = khat_rank_exact(beta, x).map_err(|e| format!("{label}: {e}"))?;
    let orbit_sum = orbit_irrep_sum(beta, x).map_err(|e| format!("{label}: {e}"))?;
    let oracle = regular_class_oracle(beta, x);
    let float = fixed_point_oracle(beta, x);
    ensure(exact.to_string() == rank.to_string(), || format!("{label}: exact {exact} vs {rank}"))?;
    ensure(rank == orbit_sum, || format!("{label}: fixed-point {rank} vs orbit sum {orbit_sum}"))?;
    ensure(rank == oracle, || format!("{label}: {rank} vs regular-class oracle {oracle}"))?;
    ensure((float - rank as f64).abs() < 1e-9, || format!("{label}: {rank} vs float oracle {float}"))?;
    if let Some(w) = want {
        ensure(rank == w, || format!("{label}: rank {rank}, expected {w}"))?;
    }
    Ok(rank)
}

fn criterion_4() -> Outcome {
    let z2 = group(FiniteGroup::cyclic(2));
    let pauli = TwoCocycle::pauli();
    let s3 = s3_points();
    rank_case("(Z/2, triv, pt)", &TwoCocycle::trivial(z2.clone()), &FiniteGSet::point(z2.clone()), Some(2))?;
    rank_case("(Z/2×Z/2, Pauli, pt)", &pauli, &FiniteGSet::point(pauli.group().clone()), Some(1))?;
    rank_case("(Z/2 free on 2 points)", &TwoCocycle::trivial(z2.clone()), &FiniteGSet::regular(z2), Some(1))?;
    rank_case("(S3 on 3 points)", &TwoCocycle::trivial(s3.group().clone()), &s3, Some(2))?;

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let abelian: [&[usize]; 6] = [&[2], &[3], &[4], &[2, 2], &[2, 4], &[2, 2, 2]];
    let nonabelian = [FiniteGroup::symmetric(3), FiniteGroup::dihedral(4), FiniteGroup::quaternion()];
    let mut ranks = Vec::new();
    for k in 0..20 {
        let beta = if k % 3 == 2 {
            TwoCocycle::trivial(group(nonabelian[(k / 3) % nonabelian.len()].clone()))
        } else {
            sample::random_abelian_cocycle(abelian[k % abelian.len()], &mut rng)
        };
        let g = beta.group().clone();
        let mut x = cosets_of(&g, &[rng.random_range(0..g.order())]);
        if rng.random_bool(0.5) {
            x = x.disjoint_union(&cosets_of(&g, &[rng.random_range(0..g.order())])).unwrap();
        }
        let b = sample::random_coboundary(&g, 6, &mut rng);
        let twisted = beta.coboundary_twist(&b).unwrap();
        let label = format!("random case {k} (|G| = {}, |X| = {})", g.order(), x.n_points());
        let r0 = rank_case(&label, &beta, &x, None)?;
        let r1 = rank_case(&label, &twisted, &x, Some(r0))?;
        ranks.push(r1);
    }
    Ok(format!("4 fixed cases and 20 randomized cases agree, random ranks {ranks:?}"))
}

// ---------------------------------------------------------------- criterion 5

/// Every bundle up to isomorphism with total dimension at most `max_dim`,
/// built from induced irreducibles placed in either parity.
fn enumerate_graded(x: &FiniteGSet, beta: &TwoCocycle, max_dim: usize, rng: &mut ChaCha8Rng) -> Vec<TwistedBundle> {
    let mut pieces = Vec::new();
    for orbit in x.orbits() {
        let x0 = orbit[0];
        let table = IrrepTable::new(&beta.restrict(&x.stabilizer_subgroup(x0))).unwrap();
        for irrep in table.irreps() {
            let w = TwistedBundle::induced(
                x.clone(),
                beta.clone(),
                x0,
                (irrep.dim, 0),
                &irrep.rho,
                &CMat::zeros(irrep.dim, irrep.dim),
                1e-9,
            )
            .unwrap();
            pieces.push(w.parity_shift());
            pieces.push(w);
        }
    }
    fn extend(pieces: &[TwistedBundle], start: usize, acc: TwistedBundle, budget: usize, out: &mut Vec<TwistedBundle>) {
        for (k, w) in pieces.iter().enumerate().skip(start) {
            if w.total_dim() <= budget {
                extend(pieces, k, acc.direct_sum(w).unwrap(), budget - w.total_dim(), out);
            }
        }
        out.push(acc);
    }
    let mut out = Vec::new();
    extend(&pieces, 0, TwistedBundle::zero(x.clone(), beta.clone()), max_dim, &mut out);
    out.into_iter()
        .map(|e| {
            if rng.random_bool(0.5) {
                let a0 = sample::random_equivariant_a0(&e, rng);
                e.with_a0(a0, 1e-8).unwrap()
            } else {
                e
            }
        })
        .collect()
}

fn odd_dim(e: &TwistedBundle) -> usize {
    e.fibers().iter().map(|f| f.1).sum()
}

/// `φ` is even, invertible and intertwines `ρ` on `E₀ ⊕ ε_{V₀} → E₁ ⊕ ε_{V₁}`.
fn certificate_holds(s0: &TwistedBundle, s1: &TwistedBundle, phi: &[CMat]) -> bool {
    let base = s0.base();
    if s0.fibers() != s1.fibers() {
        return false;
    }
    for (x, f) in phi.iter().enumerate() {
        let (p, _) = s0.fibers()[x];
        let n = f.nrows();
        let odd_entries = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| (i < p) != (j < p));
        if odd_entries.map(|(i, j)| f[(i, j)].norm()).fold(0.0, f64::max) > 1e-9 {
            return false;
        }
        if n > 0 && f.clone().try_inverse().is_none() {
            return false;
        }
    }
    base.group().elements().all(|g| {
        (0..base.n_points()).all(|x| {
            let gx = base.act(g, x);
            let lhs = &phi[gx] * s0.rho(g, x);
            let rhs = s1.rho(g, x) * &phi[x];
            (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-8
        })
    })
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let settings = Settings::default();
    let z2 = group(FiniteGroup::cyclic(2));
    let z3 = group(FiniteGroup::cyclic(3));
    let z4 = group(FiniteGroup::cyclic(4));
    let klein = group(FiniteGroup::abelian(&[2, 2]));
    let pauli = TwoCocycle::pauli();
    let s3 = group(FiniteGroup::symmetric(3));
    let d4 = group(FiniteGroup::dihedral(4));
    let q8 = group(FiniteGroup::quaternion());
    let z2z4 = sample::bicharacter_cocycle(&[2, 4], &[vec![0, 1], vec![0, 0]]);
    let z2cubed = group(FiniteGroup::abelian(&[2, 2, 2]));
    let rotation = element_of_order(&d4, 4);
    let reflection = element_of_order(&d4, 2);
    let minus_one = element_of_order(&q8, 2);
    let instances: Vec<(&str, FiniteGSet, TwoCocycle)> = vec![
        ("Z2, point", FiniteGSet::point(z2.clone()), TwoCocycle::trivial(z2.clone())),
        ("Z2, two points", FiniteGSet::regular(z2.clone()), TwoCocycle::trivial(z2.clone())),
        ("Z3, point", FiniteGSet::point(z3.clone()), TwoCocycle::trivial(z3.clone())),
        ("Z3, three points", FiniteGSet::regular(z3.clone()), TwoCocycle::trivial(z3)),
        ("Z4, point", FiniteGSet::point(z4.clone()), TwoCocycle::trivial(z4.clone())),
        ("Z2xZ2, two points", cosets_of(&klein, &[1]), TwoCocycle::trivial(klein.clone())),
        ("Pauli, point", FiniteGSet::point(pauli.group().clone()), pauli.clone()),
        ("Pauli, four points", FiniteGSet::regular(pauli.group().clone()), pauli.clone()),
        ("S3, three points", s3_points(), TwoCocycle::trivial(s3.clone())),
        ("S3, two points", cosets_of(&s3, &[element_of_order(&s3, 3)]), TwoCocycle::trivial(s3)),
        ("D4, point", FiniteGSet::point(d4.clone()), TwoCocycle::trivial(d4.clone())),
        ("D4, two points", cosets_of(&d4, &[rotation]), TwoCocycle::trivial(d4.clone())),
        ("D4, four points", cosets_of(&d4, &[reflection]), TwoCocycle::trivial(d4)),
        ("Q8, four points", cosets_of(&q8, &[minus_one]), TwoCocycle::trivial(q8)),
        ("Z2xZ4 twisted, point", FiniteGSet::point(z2z4.group().clone()), z2z4),
        ("Z2^3, two points", cosets_of(&z2cubed, &[1, 2]), TwoCocycle::trivial(z2cubed)),
    ];
    let (mut pairs, mut positive, mut bundles) = (0, 0, 0);
    for (name, x, beta) in &instances {
        ensure(x.group().order() <= 8 && x.n_points() <= 4, || format!("{name} is out of range"))?;
        let all = enumerate_graded(x, beta, 4, &mut rng);
        bundles += all.len();
        let classes: Vec<_> = all.iter().map(|e| khat_class(e).unwrap()).collect();
        let n = all.len();
        let mut chosen: Vec<(usize, usize)> = Vec::new();
        if n <= 30 {
            for i in 0..n {
                for j in i..n {
                    chosen.push((i, j));
                }
            }
        } else {
            for _ in 0..150 {
                chosen.push((rng.random_range(0..n), rng.random_range(0..n)));
            }
            for _ in 0..60 {
                let i = rng.random_range(0..n);
                let same: Vec<usize> = (0..n).filter(|&j| j != i && classes[j] == classes[i]).collect();
                if !same.is_empty() {
                    chosen.push((i, same[rng.random_range(0..same.len())]));
                }
            }
        }
        for (i, j) in chosen {
            let t0 = EffectiveTheory::from_bundle(all[i].clone(), 1e-9).unwrap();
            let t1 = EffectiveTheory::from_bundle(all[j].clone(), 1e-9).unwrap();
            let bound = odd_dim(&all[i]).max(odd_dim(&all[j]));
            let brute = brute_force_stable_search(&t0, &t1, bound, &settings).unwrap();
            let by_class = classes[i] == classes[j];
            ensure(brute.is_some() == by_class, || {
                format!(
                    "{name}: fibers {:?} vs {:?}: class equality {by_class}, brute force {}",
                    all[i].fibers(),
                    all[j].fibers(),
                    brute.is_some()
                )
            })?;
            let decided = is_stably_isomorphic(&t0, &t1, &settings).unwrap();
            ensure(decided.holds == by_class, || format!("{name}: decision disagrees with class equality"))?;
            if let Some(cert) = brute {
                let s0 = all[i].direct_sum(TrivialTheory::new(cert.v0.clone(), 1e-9).unwrap().bundle()).unwrap();
                let s1 = all[j].direct_sum(TrivialTheory::new(cert.v1.clone(), 1e-9).unwrap().bundle()).unwrap();
                ensure(certificate_holds(&s0, &s1, &cert.phi), || format!("{name}: brute-force certificate fails"))?;
                positive += 1;
            }
            pairs += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} instances, {bundles} bundles, {pairs} pairs ({positive} stably isomorphic) agree, {elapsed:.1?}",
        instances.len()
    ))
}

// ---------------------------------------------------------------- criterion 6

fn one_form_connection(alg: &Arc<FormAlgebra>, p: usize, rng: &mut ChaCha8Rng) -> OmegaMatrix {
    let gr = vec![Parity::Even; p];
    let one_forms: Vec<usize> = (0..alg.dim()).filter(|&i| alg.degrees()[i] == 1).collect();
    OmegaMatrix::from_fn(alg, gr.clone(), gr, |_, _| {
        let mut coeffs = vec![c(0.0); alg.dim()];
        for &i in &one_forms {
            coeffs[i] = sample::random_c64(rng);
        }
        Form::new(alg, coeffs).unwrap()
    })
}

fn random_odd_section(beta: &TwoCocycle, alg: &Arc<FormAlgebra>, rng: &mut ChaCha8Rng) -> InertiaSection {
    let f = Form::new(alg, (0..alg.dim()).map(|_| sample::random_c64(rng)).collect()).unwrap().odd_part();
    let comps = BTreeMap::from([(0, twistk::character::Component { form: f, points: None })]);
    InertiaSection::new(beta.clone(), Parity::Odd, comps, 1e-9).unwrap()
}

fn criterion_6() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let settings = Settings::default();
    let pool = instance_pool(&mut rng);
    let mut checks = 0;
    for (name, x, beta) in &pool {
        for _ in 0..3 {
            // relation (3)
            let t = EffectiveTheory::from_bundle(random_bundle(x, beta, &mut rng), 1e-9).unwrap();
            let s = eft_sum(&t, &t.parity_shift()).unwrap();
            ensure(khat_class(s.bundle()).unwrap().is_zero(), || format!("{name}: E ⊕ πE has a nonzero class"))?;
            ensure(s.eta().max_abs() <= TOL, || format!("{name}: η − η = {:e}", s.eta().max_abs()))?;
            let zero = EffectiveTheory::from_bundle(TwistedBundle::zero(x.clone(), beta.clone()), 1e-9).unwrap();
            ensure(is_stably_isomorphic(&s, &zero, &settings).unwrap().holds, || format!("{name}: E ⊕ πE ≁ 0"))?;

            // relation (1): V ≅ V′ with η′ = η + CS(V′, V)
            let (e2, phi) = sample::random_basis_change(t.bundle(), &mut rng).unwrap();
            let a0 = sample::random_equivariant_a0(&e2, &mut rng);
            let e2 = e2.with_a0(a0, 1e-8).unwrap();
            let cs = cs_form_exact(t.bundle(), &e2, &phi, &settings).unwrap();
            ensure(cs.max_abs() <= TOL, || format!("{name}: exact-tier CS = {:e}", cs.max_abs()))?;
            let t2 = EffectiveTheory::new(e2, t.eta().add(&cs).unwrap(), 1e-9).unwrap();
            ensure(khat_class(t.bundle()).unwrap() == khat_class(t2.bundle()).unwrap(), || {
                format!("{name}: relation (1) changes the class")
            })?;
            ensure(is_isomorphic(&t, &t2, &settings).unwrap().holds, || format!("{name}: V ≇ V′"))?;

            // ε_V
            let vs = enumerate_ungraded(t.bundle(), 6).unwrap();
            let v = vs[rng.random_range(0..vs.len())].clone();
            let eps = TrivialTheory::new(v, 1e-9).unwrap();
            let z = eps.bundle().character(1e-9).unwrap();
            ensure(z.max_abs() <= TOL, || format!("{name}: Z(ε_V) = {:e}", z.max_abs()))?;
            for lambda in [2.0, 4.0, 8.0] {
                let flow = rg_flow_cs_exact(&eps, lambda, &settings).unwrap();
                ensure(flow.max_abs() <= TOL, || format!("{name}: rg flow to {lambda} = {:e}", flow.max_abs()))?;
            }
            checks += 1;
        }
    }

    // graded tier, over exterior and jet models
    let beta = TwoCocycle::trivial(group(FiniteGroup::trivial()));
    let models = [
        Arc::new(exterior_model::<C64>(&[1, 1], 1e-9).unwrap()),
        Arc::new(jet_model::<C64>(2, 1, 1e-9).unwrap()),
        Arc::new(jet_model::<C64>(2, 2, 1e-9).unwrap()),
    ];
    let mut graded = 0;
    for alg in &models {
        for (p, q) in [(1, 1), (2, 1), (1, 2)] {
            let gr = grading(p, q);
            let v0 = trivial_group_bundle(alg, &gr, sample::random_odd_omega(alg, &gr, &mut rng));
            let v1 = trivial_group_bundle(alg, &gr, sample::random_odd_omega(alg, &gr, &mut rng));
            let id = identity_isomorphism(&v0);
            let cs = cs_form(&v0, &v1, &id, &settings).unwrap();
            let eta = random_odd_section(&beta, alg, &mut rng);
            let t0 = GradedTheory::new(v0, eta.clone(), 1e-9).unwrap();
            let t1 = GradedTheory::new(v1, eta.sub(&cs).unwrap(), 1e-9).unwrap();
            let check = check_graded_isomorphism(&t0, &t1, &id, &settings).unwrap();
            ensure(check.holds(), || format!("graded relation (1): {:?}", check.reason))?;
            let gap = t0
                .partition_function(1e-9)
                .unwrap()
                .distance(&t1.partition_function(1e-9).unwrap())
                .unwrap();
            ensure(gap <= TOL, || format!("graded relation (1): partition functions differ by {gap:e}"))?;

            let v = trivial_group_bundle(alg, &vec![Parity::Even; p + q], one_form_connection(alg, p + q, &mut rng));
            let eps = GradedTrivialTheory::new(v).unwrap();
            let z = eps.bundle().character(1e-9).unwrap();
            ensure(z.max_abs() <= TOL, || format!("graded Z(ε_V) = {:e}", z.max_abs()))?;
            for lambda in [2.0, 4.0, 8.0] {
                let flow = rg_flow_cs(&eps, lambda, &settings).unwrap();
                ensure(flow.max_abs() <= TOL, || format!("graded rg flow to {lambda} = {:e}", flow.max_abs()))?;
            }
            graded += 1;
        }
    }
    Ok(format!("{checks} exact-tier and {graded} graded-tier instances"))
}

// ---------------------------------------------------------------- criterion 7

fn twistk(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_twistk")).args(args).output().expect("binary runs")
}

fn criterion_7(suite_start: Instant) -> Outcome {
    let mut runs = 0;
    for name in DATA_FILES {
        let path = data(name);
        let p = path.to_str().unwrap();
        let file = schema::parse(&path).map_err(|e| e.to_string())?;
        let mut invocations: Vec<Vec<&str>> = ["report", "validate", "regular-classes", "khat-rank"]
            .iter()
            .map(|cmd| vec![*cmd, p])
            .collect();
        for b in file.bundles.keys() {
            invocations.push(vec!["character", p, "--bundle", b.as_str()]);
        }
        for args in invocations {
            let cmd = args.join(" ");
            let args: Vec<&str> = args.into_iter().chain(["--format", "json", "--seed", "7"]).collect();
            let a = twistk(&args);
            let b = twistk(&args);
            ensure(a.status.code() == Some(0), || {
                format!("{cmd}: exit {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stderr))
            })?;
            ensure(a.stdout == b.stdout, || format!("{cmd}: output differs between runs"))?;
            let text = String::from_utf8(a.stdout).unwrap();
            let report = Report::from_json(&text).map_err(|e| format!("{cmd}: {e}"))?;
            ensure(report.to_json() == text, || format!("{cmd}: round trip changes the report"))?;
            ensure(report.settings.seed == 7 && report.settings.tolerance == 1e-9 && report.settings.quadrature == 32, || {
                format!("{cmd}: settings not embedded")
            })?;
            runs += 1;
        }
    }
    let elapsed = suite_start.elapsed();
    ensure(elapsed < Duration::from_secs(600), || format!("acceptance run took {elapsed:?}"))?;
    Ok(format!("{runs} command runs deterministic and round-tripping, acceptance run {elapsed:.1?}"))
}

// ---------------------------------------------------------------- driver

fn run(n: usize, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    match outcome {
        Ok(detail) => {
            println!("PASS criterion {n} [{:.1?}]: {detail}", start.elapsed());
            true
        }
        Err(why) => {
            println!("FAIL criterion {n} [{:.1?}]: {why}", start.elapsed());
            false
        }
    }
}

fn main() {
    let suite_start = Instant::now();
    let results = [
        run(1, criterion_1),
        run(2, criterion_2),
        run(3, criterion_3),
        run(4, criterion_4),
        run(5, criterion_5),
        run(6, criterion_6),
        run(7, || criterion_7(suite_start)),
    ];
    if results.iter().any(|ok| !ok) {
        std::process::exit(1);
    }
}
