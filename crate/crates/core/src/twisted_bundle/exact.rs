use super::transport::{GrassmannMatrix, SuperTime};
use super::BundleError;
use crate::form_algebra::Parity;
use crate::group_cocycle::TwoCocycle;
use crate::gset::{FiniteGSet, GSetMap};
use crate::linalg::{self, CMat};
use crate::scalar::C64;

/// A twisted equivariant super vector bundle over a finite G-set, with the
/// degree-zero superconnection part `A₀` (the only part that survives in
/// dimension zero).
///
/// Fiber bases list the even vectors first.
#[derive(Clone, Debug)]
pub struct TwistedBundle {
    base: FiniteGSet,
    cocycle: TwoCocycle,
    fibers: Vec<(usize, usize)>,
    /// `rho[g * n + x]: E_x → E_{gx}`
    rho: Vec<CMat>,
    a0: Vec<CMat>,
}

/// Largest entry of the off-diagonal (odd) blocks of a fiber map.
fn odd_block_norm(m: &CMat, rows: (usize, usize), cols: (usize, usize)) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..rows.0 + rows.1 {
        for j in 0..cols.0 + cols.1 {
            if (i < rows.0) != (j < cols.0) {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

fn even_block_norm(m: &CMat, dims: (usize, usize)) -> f64 {
    let mut worst = 0.0f64;
    let n = dims.0 + dims.1;
    for i in 0..n {
        for j in 0..n {
            if (i < dims.0) == (j < dims.0) {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

impl TwistedBundle {
    /// Validates all bundle axioms; see [`BundleError`] for the witnesses
    /// reported on failure.
    pub fn new(
        base: FiniteGSet,
        cocycle: TwoCocycle,
        fibers: Vec<(usize, usize)>,
        rho: Vec<CMat>,
        a0: Vec<CMat>,
        tol: f64,
    ) -> Result<Self, BundleError> {
        if **cocycle.group() != **base.group() {
            return Err(BundleError::GroupMismatch);
        }
        if !cocycle.is_normalized() {
            return Err(BundleError::NotNormalized);
        }
        let n = base.n_points();
        let group = base.group().clone();
        if fibers.len() != n {
            return Err(BundleError::Shape(format!("{} fibers for {} points", fibers.len(), n)));
        }
        if rho.len() != group.order() * n {
            return Err(BundleError::Shape(format!(
                "{} fiber maps, expected |G|·|X| = {}",
                rho.len(),
                group.order() * n
            )));
        }
        if a0.len() != n {
            return Err(BundleError::Shape(format!("{} connection matrices for {} points", a0.len(), n)));
        }
        let dim = |x: usize| fibers[x].0 + fibers[x].1;
        for g in group.elements() {
            for x in 0..n {
                let gx = base.act(g, x);
                if fibers[gx] != fibers[x] {
                    return Err(BundleError::DimensionMismatch {
                        g,
                        x,
                        from: fibers[x],
                        to: fibers[gx],
                    });
                }
                let m = &rho[g * n + x];
                if m.shape() != (dim(gx), dim(x)) {
                    return Err(BundleError::Shape(format!(
                        "rho({g}) at point {x} is {}x{}, expected {}x{}",
                        m.nrows(),
                        m.ncols(),
                        dim(gx),
                        dim(x)
                    )));
                }
                let dev = odd_block_norm(m, fibers[gx], fibers[x]);
                if dev > tol {
                    return Err(BundleError::NotEven { g, x, deviation: dev });
                }
            }
        }
        for x in 0..n {
            if a0[x].shape() != (dim(x), dim(x)) {
                return Err(BundleError::Shape(format!(
                    "A0 at point {x} is {}x{}, expected {}x{}",
                    a0[x].nrows(),
                    a0[x].ncols(),
                    dim(x),
                    dim(x)
                )));
            }
            let dev = even_block_norm(&a0[x], fibers[x]);
            if dev > tol {
                return Err(BundleError::ConnectionNotOdd { x, deviation: dev });
            }
        }
        let e = group.identity();
        for x in 0..n {
            let dev = linalg::max_abs_diff(&rho[e * n + x], &CMat::identity(dim(x), dim(x)));
            if dev > tol {
                return Err(BundleError::IdentityNotTrivial { x, deviation: dev });
            }
        }
        for g in group.elements() {
            for h in group.elements() {
                let gh = group.mul(g, h);
                let b = cocycle.value(g, h).to_c64();
                for x in 0..n {
                    let hx = base.act(h, x);
                    let lhs = &rho[g * n + hx] * &rho[h * n + x];
                    let rhs = rho[gh * n + x].map(|z| z * b);
                    let dev = linalg::max_abs_diff(&lhs, &rhs);
                    if dev > tol {
                        return Err(BundleError::TwistedComposition { g, h, x, deviation: dev });
                    }
                }
            }
        }
        for g in group.elements() {
            for x in 0..n {
                let gx = base.act(g, x);
                let m = &rho[g * n + x];
                let dev = linalg::max_abs_diff(&(m * &a0[x]), &(&a0[gx] * m));
                if dev > tol {
                    return Err(BundleError::NotEquivariant { g, x, deviation: dev });
                }
            }
        }
        Ok(Self {
            base,
            cocycle,
            fibers,
            rho,
            a0,
        })
    }

    /// A bundle over a single point: a twisted representation `rho[g]` of
    /// the whole group with an equivariant odd endomorphism.
    pub fn over_point(
        cocycle: TwoCocycle,
        dims: (usize, usize),
        rho: Vec<CMat>,
        a0: CMat,
        tol: f64,
    ) -> Result<Self, BundleError> {
        let base = FiniteGSet::point(cocycle.group().clone());
        Self::new(base, cocycle, vec![dims], rho, vec![a0], tol)
    }

    /// The zero bundle.
    pub fn zero(base: FiniteGSet, cocycle: TwoCocycle) -> Self {
        let n = base.n_points();
        let order = base.group().order();
        Self {
            fibers: vec![(0, 0); n],
            rho: vec![CMat::zeros(0, 0); order * n],
            a0: vec![CMat::zeros(0, 0); n],
            base,
            cocycle,
        }
    }

    pub fn base(&self) -> &FiniteGSet {
        &self.base
    }

    pub fn cocycle(&self) -> &TwoCocycle {
        &self.cocycle
    }

    pub fn fibers(&self) -> &[(usize, usize)] {
        &self.fibers
    }

    pub fn fiber_dim(&self, x: usize) -> usize {
        self.fibers[x].0 + self.fibers[x].1
    }

    pub fn total_dim(&self) -> usize {
        (0..self.base.n_points()).map(|x| self.fiber_dim(x)).sum()
    }

    pub fn rho(&self, g: usize, x: usize) -> &CMat {
        &self.rho[g * self.base.n_points() + x]
    }

    pub fn rho_table(&self) -> &[CMat] {
        &self.rho
    }

    pub fn a0(&self, x: usize) -> &CMat {
        &self.a0[x]
    }

    pub fn a0_table(&self) -> &[CMat] {
        &self.a0
    }

    /// Fiber parities at `x`.
    pub fn grading(&self, x: usize) -> Vec<Parity> {
        let (p, q) = self.fibers[x];
        [vec![Parity::Even; p], vec![Parity::Odd; q]].concat()
    }

    /// Parities of the global module `⊕_x E_x`.
    pub fn global_grading(&self) -> Vec<Parity> {
        (0..self.base.n_points()).flat_map(|x| self.grading(x)).collect()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.base.n_points() + 1);
        let mut acc = 0;
        out.push(0);
        for x in 0..self.base.n_points() {
            acc += self.fiber_dim(x);
            out.push(acc);
        }
        out
    }

    /// `ρ(g)` on `⊕_x E_x`.
    pub fn global_rho(&self, g: usize) -> CMat {
        let off = self.offsets();
        let mut m = CMat::zeros(self.total_dim(), self.total_dim());
        for x in 0..self.base.n_points() {
            let gx = self.base.act(g, x);
            m.view_mut((off[gx], off[x]), self.rho(g, x).shape())
                .copy_from(self.rho(g, x));
        }
        m
    }

    pub fn global_a0(&self) -> CMat {
        let blocks: Vec<&CMat> = self.a0.iter().collect();
        linalg::block_diag(&blocks)
    }

    /// `F = A₀²` at each point.
    pub fn curvature(&self, x: usize) -> CMat {
        &self.a0[x] * &self.a0[x]
    }

    pub fn global_curvature(&self) -> CMat {
        let a = self.global_a0();
        &a * &a
    }

    /// `sTr(exp(−t A₀²) ρ_x(g))` at a fixed point `x` of `g`.
    pub fn supertrace_at(&self, g: usize, x: usize, t: f64) -> Result<C64, BundleError> {
        debug_assert_eq!(self.base.act(g, x), x);
        let heat = linalg::expm(&self.curvature(x).map(|z| -z * t))?;
        let m = heat * self.rho(g, x);
        let p = self.fibers[x].0;
        let mut s = C64::new(0.0, 0.0);
        for i in 0..self.fiber_dim(x) {
            if i < p {
                s += m[(i, i)];
            } else {
                s -= m[(i, i)];
            }
        }
        Ok(s)
    }

    /// Super-parallel transport `exp(−t𝔸² + θ𝔸) ∘ ρ(g)` on the global module.
    ///
    /// With `t = t₀ + t₃θη` and `θ = uθ + vη`, and since `(uθ + vη)A₀`
    /// squares to zero and commutes with `A₀²`, this is
    /// `e^{−t₀F}(1 + uθA₀ + vηA₀ − t₃θηF)ρ(g)`.
    pub fn transport(&self, g: usize, time: &SuperTime) -> Result<GrassmannMatrix, BundleError> {
        if time.t0 < 0.0 {
            return Err(BundleError::NegativeTime(time.t0));
        }
        let a = self.global_a0();
        let f = &a * &a;
        // F is block diagonal over points, so exponentiate fiber by fiber
        let blocks = (0..self.base.n_points())
            .map(|x| linalg::expm(&self.curvature(x).map(|z| -z * time.t0)))
            .collect::<Result<Vec<_>, _>>()?;
        let heat = linalg::block_diag(&blocks.iter().collect::<Vec<_>>());
        let r = self.global_rho(g);
        let base = &heat * &r;
        let ar = &heat * &a * &r;
        let fr = &heat * &f * &r;
        let s = |m: &CMat, c: f64| m.map(|z| z * c);
        Ok(GrassmannMatrix::new(
            self.global_grading(),
            [base, s(&ar, time.u), s(&ar, time.v), s(&fr, -time.t3)],
        ))
    }

    fn check_compatible(&self, other: &Self) -> Result<(), BundleError> {
        if self.base != other.base {
            return Err(BundleError::BaseMismatch);
        }
        if self.cocycle != other.cocycle {
            return Err(BundleError::CocycleMismatch);
        }
        Ok(())
    }

    /// Fiberwise direct sum, with even vectors of both summands first.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, BundleError> {
        self.check_compatible(other)?;
        let n = self.base.n_points();
        let fibers: Vec<(usize, usize)> = self
            .fibers
            .iter()
            .zip(&other.fibers)
            .map(|(a, b)| (a.0 + b.0, a.1 + b.1))
            .collect();
        // permutation taking [e1 o1 e2 o2] to [e1 e2 o1 o2]
        let perm = |x: usize| -> CMat {
            let (p1, q1) = self.fibers[x];
            let (p2, q2) = other.fibers[x];
            let d = p1 + q1 + p2 + q2;
            let mut m = CMat::zeros(d, d);
            let src_to_dst = (0..p1)
                .map(|i| (i, i))
                .chain((0..q1).map(|i| (p1 + i, p1 + p2 + i)))
                .chain((0..p2).map(|i| (p1 + q1 + i, p1 + i)))
                .chain((0..q2).map(|i| (p1 + q1 + p2 + i, p1 + p2 + q1 + i)));
            for (s, t) in src_to_dst {
                m[(t, s)] = C64::new(1.0, 0.0);
            }
            m
        };
        let perms: Vec<CMat> = (0..n).map(perm).collect();
        let conj = |x_out: usize, x_in: usize, a: &CMat, b: &CMat| -> CMat {
            let blocks = linalg::block_diag(&[a, b]);
            &perms[x_out] * blocks * perms[x_in].transpose()
        };
        let mut rho = Vec::with_capacity(self.rho.len());
        for g in self.base.group().elements() {
            for x in 0..n {
                let gx = self.base.act(g, x);
                rho.push(conj(gx, x, self.rho(g, x), other.rho(g, x)));
            }
        }
        let a0 = (0..n).map(|x| conj(x, x, &self.a0[x], &other.a0[x])).collect();
        Ok(Self {
            base: self.base.clone(),
            cocycle: self.cocycle.clone(),
            fibers,
            rho,
            a0,
        })
    }

    /// Pullback along an equivariant map `f: X → Y` into this bundle's base.
    pub fn pullback(&self, f: &GSetMap) -> Result<Self, BundleError> {
        if *f.target() != self.base {
            return Err(BundleError::BaseMismatch);
        }
        let src = f.source().clone();
        let n = src.n_points();
        let mut rho = Vec::with_capacity(src.group().order() * n);
        for g in src.group().elements() {
            for x in 0..n {
                rho.push(self.rho(g, f.apply(x)).clone());
            }
        }
        Ok(Self {
            fibers: (0..n).map(|x| self.fibers[f.apply(x)]).collect(),
            a0: (0..n).map(|x| self.a0[f.apply(x)].clone()).collect(),
            rho,
            base: src,
            cocycle: self.cocycle.clone(),
        })
    }

    /// Same bundle with `A₀` replaced; re-validates equivariance.
    pub fn with_a0(&self, a0: Vec<CMat>, tol: f64) -> Result<Self, BundleError> {
        Self::new(
            self.base.clone(),
            self.cocycle.clone(),
            self.fibers.clone(),
            self.rho.clone(),
            a0,
            tol,
        )
    }

    /// Parity shift `πE`: even and odd parts exchanged.
    pub fn parity_shift(&self) -> Self {
        let n = self.base.n_points();
        let swap = |x: usize| -> CMat {
            let (p, q) = self.fibers[x];
            let mut m = CMat::zeros(p + q, p + q);
            for i in 0..p {
                m[(q + i, i)] = C64::new(1.0, 0.0);
            }
            for i in 0..q {
                m[(i, p + i)] = C64::new(1.0, 0.0);
            }
            m
        };
        let swaps: Vec<CMat> = (0..n).map(swap).collect();
        let mut rho = Vec::with_capacity(self.rho.len());
        for g in self.base.group().elements() {
            for x in 0..n {
                let gx = self.base.act(g, x);
                rho.push(&swaps[gx] * self.rho(g, x) * swaps[x].transpose());
            }
        }
        let a0 = (0..n)
            .map(|x| &swaps[x] * &self.a0[x] * swaps[x].transpose())
            .collect();
        Self {
            base: self.base.clone(),
            cocycle: self.cocycle.clone(),
            fibers: self.fibers.iter().map(|&(p, q)| (q, p)).collect(),
            rho,
            a0,
        }
    }

    /// Whether every fiber is purely even and `A₀ = 0`.
    pub fn is_ungraded(&self) -> bool {
        self.fibers.iter().all(|f| f.1 == 0)
    }
}
