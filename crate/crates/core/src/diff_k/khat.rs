use serde::Serialize;

use super::irreps::{Fingerprint, IrrepTable};
use super::DiffKError;
use crate::group_cocycle::Subgroup;
use crate::linalg::CMat;
use crate::scalar::C64;
use crate::twisted_bundle::TwistedBundle;

/// Label of a twisted irreducible of a stabilizer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IrrepLabel {
    pub dim: usize,
    pub fingerprint: Fingerprint,
}

/// Virtual multiplicities over the twisted irreducibles of the stabilizer
/// of one orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitClass {
    /// Least point of the orbit.
    pub representative: usize,
    /// Stabilizer elements, ascending.
    pub stabilizer: Vec<usize>,
    pub irreps: Vec<IrrepLabel>,
    /// Even minus odd multiplicity, per irreducible.
    pub multiplicities: Vec<i64>,
}

/// Normal form of an exact-tier class: the η part always vanishes on a
/// zero-dimensional base, so only the virtual representation remains.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffKClass {
    pub orbits: Vec<OrbitClass>,
}

impl DiffKClass {
    pub fn is_zero(&self) -> bool {
        self.orbits.iter().all(|o| o.multiplicities.iter().all(|&m| m == 0))
    }
}

/// The fiber at a point decomposed into twisted irreducibles of its
/// stabilizer, even and odd parts separately.
#[derive(Clone, Debug)]
pub struct OrbitDecomposition {
    pub point: usize,
    pub stabilizer: Subgroup,
    pub table: IrrepTable,
    pub even: Vec<i64>,
    pub odd: Vec<i64>,
}

impl OrbitDecomposition {
    pub fn virtual_multiplicities(&self) -> Vec<i64> {
        self.even.iter().zip(&self.odd).map(|(a, b)| a - b).collect()
    }
}

fn block_trace(m: &CMat, range: std::ops::Range<usize>) -> C64 {
    range.map(|i| m[(i, i)]).sum()
}

/// Decomposes `E_x` under the stabilizer of `x`.
pub fn decompose_at(e: &TwistedBundle, x: usize) -> Result<OrbitDecomposition, DiffKError> {
    let stab = e.base().stabilizer_subgroup(x);
    let table = IrrepTable::new(&e.cocycle().restrict(&stab))?;
    let (p, q) = e.fibers()[x];
    let mut even_char = Vec::with_capacity(stab.group.order());
    let mut odd_char = Vec::with_capacity(stab.group.order());
    for l in stab.group.elements() {
        let r = e.rho(stab.ambient(l), x);
        even_char.push(block_trace(r, 0..p));
        odd_char.push(block_trace(r, p..p + q));
    }
    Ok(OrbitDecomposition {
        point: x,
        even: table.multiplicities(&even_char)?,
        odd: table.multiplicities(&odd_char)?,
        stabilizer: stab,
        table,
    })
}

/// Decompositions at the least point of every orbit.
pub fn decompose(e: &TwistedBundle) -> Result<Vec<OrbitDecomposition>, DiffKError> {
    e.base().orbits().iter().map(|o| decompose_at(e, o[0])).collect()
}

/// The class of an exact-tier theory: per orbit, virtual multiplicities of
/// the twisted irreducibles of the stabilizer.
pub fn khat_class(e: &TwistedBundle) -> Result<DiffKClass, DiffKError> {
    let orbits = decompose(e)?
        .into_iter()
        .map(|d| OrbitClass {
            representative: d.point,
            stabilizer: d.stabilizer.embedding.clone(),
            irreps: d
                .table
                .irreps()
                .iter()
                .map(|i| IrrepLabel {
                    dim: i.dim,
                    fingerprint: i.fingerprint.clone(),
                })
                .collect(),
            multiplicities: d.virtual_multiplicities(),
        })
        .collect();
    Ok(DiffKClass { orbits })
}
