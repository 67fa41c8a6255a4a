use super::{BundleError, TwistedBundle};
use crate::group_cocycle::TwoCocycle;
use crate::gset::FiniteGSet;
use crate::linalg::CMat;

impl TwistedBundle {
    /// The bundle induced from a twisted representation `sigma` of the
    /// stabilizer `H` of `x0` (indexed by local subgroup ids, with the
    /// restricted cocycle) and an `H`-equivariant odd endomorphism `a0`.
    /// Fibers off the orbit of `x0` are zero.
    ///
    /// With coset representatives `s_y` (least `g` with `g·x0 = y`) and
    /// `g s_y = s_{gy} h`, the fiber map is
    /// `ρ_y(g) = β(g, s_y) / β(s_{gy}, h) · σ(h)`.
    pub fn induced(
        base: FiniteGSet,
        cocycle: TwoCocycle,
        x0: usize,
        dims: (usize, usize),
        sigma: &[CMat],
        a0: &CMat,
        tol: f64,
    ) -> Result<Self, BundleError> {
        let group = base.group().clone();
        let stab = base.stabilizer_subgroup(x0);
        if sigma.len() != stab.group.order() {
            return Err(BundleError::Shape(format!(
                "{} stabilizer matrices, stabilizer of {x0} has order {}",
                sigma.len(),
                stab.group.order()
            )));
        }
        let n = base.n_points();
        let mut reps = vec![None; n];
        for g in group.elements() {
            let y = base.act(g, x0);
            if reps[y].is_none() {
                reps[y] = Some(g);
            }
        }
        let d = dims.0 + dims.1;
        let fibers: Vec<(usize, usize)> = reps.iter().map(|r| if r.is_some() { dims } else { (0, 0) }).collect();
        let mut rho = Vec::with_capacity(group.order() * n);
        for g in group.elements() {
            for y in 0..n {
                let Some(sy) = reps[y] else {
                    rho.push(CMat::zeros(0, 0));
                    continue;
                };
                let gy = base.act(g, y);
                let sgy = reps[gy].expect("orbit is closed");
                let h = group.mul(group.inv(sgy), group.mul(g, sy));
                let local = stab.local(h).expect("h stabilizes x0");
                let phase = cocycle.value(g, sy) / cocycle.value(sgy, h);
                let c = phase.to_c64();
                rho.push(sigma[local].map(|z| z * c));
            }
        }
        let a0s = reps
            .iter()
            .map(|r| if r.is_some() { a0.clone() } else { CMat::zeros(0, 0) })
            .collect();
        debug_assert!(fibers.iter().all(|f| f.0 + f.1 == d || *f == (0, 0)));
        Self::new(base, cocycle, fibers, rho, a0s, tol)
    }
}
