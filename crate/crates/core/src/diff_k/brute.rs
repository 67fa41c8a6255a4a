use super::eft::{find_intertwiner, EffectiveTheory, StableCertificate};
use super::irreps::IrrepTable;
use super::DiffKError;
use crate::chern_simons::same_class;
use crate::linalg::CMat;
use crate::twisted_bundle::{TrivialTheory, TwistedBundle};
use crate::Settings;

/// Every ungraded bundle `V` with total fiber dimension at most `max_dim`,
/// as sums of bundles induced from single stabilizer irreducibles.
pub fn enumerate_ungraded(base_bundle: &TwistedBundle, max_dim: usize) -> Result<Vec<TwistedBundle>, DiffKError> {
    let base = base_bundle.base();
    let cocycle = base_bundle.cocycle();
    let mut pieces = Vec::new();
    for orbit in base.orbits() {
        let x0 = orbit[0];
        let stab = base.stabilizer_subgroup(x0);
        let table = IrrepTable::new(&cocycle.restrict(&stab))?;
        for irrep in table.irreps() {
            let w = TwistedBundle::induced(
                base.clone(),
                cocycle.clone(),
                x0,
                (irrep.dim, 0),
                &irrep.rho,
                &CMat::zeros(irrep.dim, irrep.dim),
                1e-9,
            )?;
            pieces.push((w.total_dim(), w));
        }
    }
    let mut out = Vec::new();
    let zero = TwistedBundle::zero(base.clone(), cocycle.clone());
    extend(&pieces, 0, zero, max_dim, &mut out)?;
    Ok(out)
}

fn extend(
    pieces: &[(usize, TwistedBundle)],
    start: usize,
    acc: TwistedBundle,
    budget: usize,
    out: &mut Vec<TwistedBundle>,
) -> Result<(), DiffKError> {
    for (k, (cost, w)) in pieces.iter().enumerate().skip(start) {
        if *cost <= budget {
            extend(pieces, k, acc.direct_sum(w)?, budget - cost, out)?;
        }
    }
    out.push(acc);
    Ok(())
}

/// Searches for `V₀`, `V₁` of total dimension at most `max_extra_dim` and
/// an isomorphism `E₀ ⊕ ε_{V₀} ≅ E₁ ⊕ ε_{V₁}` by solving intertwining
/// equations directly, without character theory. Also requires the η
/// classes to agree.
pub fn brute_force_stable_search(
    t0: &EffectiveTheory,
    t1: &EffectiveTheory,
    max_extra_dim: usize,
    settings: &Settings,
) -> Result<Option<StableCertificate>, DiffKError> {
    let (e0, e1) = (t0.bundle(), t1.bundle());
    if e0.base() != e1.base() || e0.cocycle() != e1.cocycle() {
        return Ok(None);
    }
    if !same_class(t0.eta(), t1.eta(), settings.tolerance)? {
        return Ok(None);
    }
    let tol = settings.tolerance;
    let candidates = enumerate_ungraded(e0, max_extra_dim)?;
    let stabilized = |e: &TwistedBundle, v: &TwistedBundle| -> Result<TwistedBundle, DiffKError> {
        Ok(e.direct_sum(TrivialTheory::new(v.clone(), tol)?.bundle())?)
    };
    let n = e0.base().n_points();
    for v0 in &candidates {
        let s0 = stabilized(e0, v0)?;
        for v1 in &candidates {
            let ranks_match = (0..n).all(|x| {
                let (a, b) = (e0.fibers()[x], e1.fibers()[x]);
                let (c, d) = (v0.fibers()[x].0, v1.fibers()[x].0);
                a.0 + c == b.0 + d && a.1 + c == b.1 + d
            });
            if !ranks_match {
                continue;
            }
            let s1 = stabilized(e1, v1)?;
            if let Some(phi) = find_intertwiner(&s0, &s1, settings) {
                return Ok(Some(StableCertificate {
                    v0: v0.clone(),
                    v1: v1.clone(),
                    phi,
                }));
            }
        }
    }
    Ok(None)
}
