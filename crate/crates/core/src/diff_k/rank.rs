use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use super::irreps::twisted_irrep_count;
use super::DiffKError;
use crate::group_cocycle::{Cyclotomic, CyclotomicField, TwoCocycle};
use crate::gset::FiniteGSet;

/// The rank of the complexified twisted equivariant K-group of a finite
/// `G`-set, as the sum over classes `[g]` of the dimension of the
/// `χ^β_g`-twisted invariants of functions on `X^g`:
///
/// `Σ_[g] (1/|C(g)|) Σ_{h ∈ C(g)} χ^β_g(h)·|{x ∈ X^g : hx = x}|`,
///
/// in exact cyclotomic arithmetic.
pub fn khat_rank_exact(cocycle: &TwoCocycle, x: &FiniteGSet) -> Result<BigInt, DiffKError> {
    if !cocycle.is_normalized() {
        return Err(DiffKError::NotNormalized);
    }
    if !std::sync::Arc::ptr_eq(cocycle.group(), x.group()) && **cocycle.group() != **x.group() {
        return Err(DiffKError::GroupMismatch);
    }
    let group = cocycle.group();
    let field = CyclotomicField::new(cocycle.phase_order().max(1));
    let mut total = Cyclotomic::zero(&field);
    for g in group.class_representatives() {
        let fixed = x.fixed_points(g);
        let cent = group.centralizer(g);
        let mut sum = Cyclotomic::zero(&field);
        for &h in &cent {
            let count = fixed.iter().filter(|&&p| x.act(h, p) == p).count() as i64;
            if count == 0 {
                continue;
            }
            let chi = Cyclotomic::from_phase(&field, cocycle.chi(g, h)).expect("field contains all cocycle phases");
            sum = &sum + &(&chi * &Cyclotomic::from_integer(&field, count));
        }
        total = &total + &sum.scale(&BigRational::new(1.into(), BigInt::from(cent.len())));
    }
    let value = total
        .as_integer()
        .ok_or_else(|| DiffKError::NonIntegral(format!("{total:?}")))?;
    if value.is_negative() {
        return Err(DiffKError::NonIntegral(format!("negative rank {value}")));
    }
    Ok(value)
}

/// `Σ_orbits` of the number of twisted irreducibles of the stabilizer with
/// the restricted cocycle.
pub fn orbit_irrep_sum(cocycle: &TwoCocycle, x: &FiniteGSet) -> Result<usize, DiffKError> {
    let mut total = 0;
    for orbit in x.orbits() {
        let sub = x.stabilizer_subgroup(orbit[0]);
        total += twisted_irrep_count(&cocycle.restrict(&sub))?;
    }
    Ok(total)
}

/// [`khat_rank_exact`], cross-checked against [`orbit_irrep_sum`].
pub fn khat_rank(cocycle: &TwoCocycle, x: &FiniteGSet) -> Result<usize, DiffKError> {
    let exact = khat_rank_exact(cocycle, x)?;
    let exact = exact
        .to_usize()
        .ok_or_else(|| DiffKError::NonIntegral(format!("rank {exact} out of range")))?;
    let orbits = orbit_irrep_sum(cocycle, x)?;
    if exact != orbits {
        return Err(DiffKError::RankMismatch {
            fixed_point: exact,
            orbit_sum: orbits,
        });
    }
    Ok(exact)
}
