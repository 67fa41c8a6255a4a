use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication table is empty")]
    Empty,
    #[error("multiplication table row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({row}, {col}) = {value} is not an element id")]
    EntryOutOfRange { row: usize, col: usize, value: usize },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {element} has no two-sided inverse")]
    MissingInverse { element: usize },
    #[error("associativity fails on ({a}, {b}, {c})")]
    NonAssociative { a: usize, b: usize, c: usize },
    #[error("subset is not a subgroup: {a}*{b} leaves it")]
    NotClosed { a: usize, b: usize },
    #[error("element id {0} is out of range")]
    UnknownElement(usize),
}

/// A finite group given by its multiplication table on ids `0..order`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Validates the group axioms on a square table, `rows[a][b] = a·b`.
    pub fn from_table(rows: &[Vec<usize>]) -> Result<Self, GroupError> {
        let n = rows.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        let mut table = Vec::with_capacity(n * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::NotSquare {
                    row: r,
                    len: row.len(),
                    expected: n,
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(GroupError::EntryOutOfRange { row: r, col: c, value: v });
                }
            }
            table.extend_from_slice(row);
        }
        let mul = |a: usize, b: usize| table[a * n + b];
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| mul(e, g) == g && mul(g, e) == g))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverses = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| mul(g, h) == identity && mul(h, g) == identity)
                .ok_or(GroupError::MissingInverse { element: g })?;
            inverses.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul(a, b);
                for c in 0..n {
                    if mul(ab, c) != mul(a, mul(b, c)) {
                        return Err(GroupError::NonAssociative { a, b, c });
                    }
                }
            }
        }
        Ok(Self {
            order: n,
            table,
            identity,
            inverses,
        })
    }

    /// Builds a group from a closed binary operation on `0..n`.
    pub fn from_fn(n: usize, op: impl Fn(usize, usize) -> usize) -> Result<Self, GroupError> {
        let rows: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| op(a, b)).collect()).collect();
        Self::from_table(&rows)
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        Self::from_fn(n, |a, b| (a + b) % n).expect("cyclic group table")
    }

    /// `Z/n_1 × … × Z/n_k`; element ids are mixed-radix with the first
    /// factor most significant (see [`abelian_coords`]).
    pub fn abelian(orders: &[usize]) -> Self {
        let n: usize = orders.iter().product();
        Self::from_fn(n, |a, b| {
            let ca = abelian_coords(orders, a);
            let cb = abelian_coords(orders, b);
            let sum: Vec<usize> = ca
                .iter()
                .zip(&cb)
                .zip(orders)
                .map(|((x, y), m)| (x + y) % m)
                .collect();
            abelian_index(orders, &sum)
        })
        .expect("abelian group table")
    }

    /// `G × H` with id `g * |H| + h`.
    pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let m = h.order;
        Self::from_fn(g.order * m, |a, b| {
            g.mul(a / m, b / m) * m + h.mul(a % m, b % m)
        })
        .expect("direct product table")
    }

    /// Permutations of `0..n` in lexicographic order (identity is id 0),
    /// composed right to left: `(σ·τ)(i) = σ(τ(i))`.
    pub fn symmetric(n: usize) -> Self {
        let perms = permutations(n);
        Self::from_permutations(&perms).expect("symmetric group")
    }

    /// The group of the given permutations, which must be closed under
    /// composition. Element ids follow the input order.
    pub fn from_permutations(perms: &[Vec<usize>]) -> Result<Self, GroupError> {
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p);
        let n = perms.len();
        let mut rows = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                let comp: Vec<usize> = perms[b].iter().map(|&i| perms[a][i]).collect();
                rows[a][b] = index(&comp).ok_or(GroupError::NotClosed { a, b })?;
            }
        }
        Self::from_table(&rows)
    }

    /// Dihedral group of order `2n`: ids `0..n` are rotations `r^k`, ids
    /// `n..2n` are reflections `s·r^k`.
    pub fn dihedral(n: usize) -> Self {
        Self::from_fn(2 * n, |a, b| {
            let (fa, ka) = (a / n, a % n);
            let (fb, kb) = (b / n, b % n);
            // (s^fa r^ka)(s^fb r^kb) = s^(fa+fb) r^(±ka + kb)
            let k = if fb == 0 { (ka + kb) % n } else { (n - ka + kb) % n };
            ((fa + fb) % 2) * n + k
        })
        .expect("dihedral table")
    }

    /// Quaternion group `{±1, ±i, ±j, ±k}`; ids `0..4` are `1, i, j, k` and
    /// `4..8` their negatives.
    pub fn quaternion() -> Self {
        // unit products among 1,i,j,k: (sign, unit)
        const T: [[(bool, usize); 4]; 4] = [
            [(false, 0), (false, 1), (false, 2), (false, 3)],
            [(false, 1), (true, 0), (false, 3), (true, 2)],
            [(false, 2), (true, 3), (true, 0), (false, 1)],
            [(false, 3), (false, 2), (true, 1), (true, 0)],
        ];
        Self::from_fn(8, |a, b| {
            let (sa, ua) = (a / 4, a % 4);
            let (sb, ub) = (b / 4, b % 4);
            let (neg, u) = T[ua][ub];
            let sign = (sa + sb + neg as usize) % 2;
            sign * 4 + u
        })
        .expect("quaternion table")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// `h g h⁻¹`.
    pub fn conj(&self, h: usize, g: usize) -> usize {
        self.mul(self.mul(h, g), self.inv(h))
    }

    pub fn contains(&self, g: usize) -> bool {
        g < self.order
    }

    pub fn is_abelian(&self) -> bool {
        self.elements()
            .all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Conjugacy classes, each sorted, ordered by their least element.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order];
        let mut classes = Vec::new();
        for g in self.elements() {
            if seen[g] {
                continue;
            }
            let class: BTreeSet<usize> = self.elements().map(|h| self.conj(h, g)).collect();
            for &x in &class {
                seen[x] = true;
            }
            classes.push(class.into_iter().collect());
        }
        classes
    }

    /// Least element of each conjugacy class.
    pub fn class_representatives(&self) -> Vec<usize> {
        self.conjugacy_classes().iter().map(|c| c[0]).collect()
    }

    /// The chosen representative (least element) of the class of `g`.
    pub fn class_representative(&self, g: usize) -> usize {
        self.elements().map(|h| self.conj(h, g)).min().unwrap_or(g)
    }

    pub fn centralizer(&self, g: usize) -> Vec<usize> {
        self.elements()
            .filter(|&h| self.mul(h, g) == self.mul(g, h))
            .collect()
    }

    /// Some `k` with `k g k⁻¹ = target`, if the two are conjugate.
    pub fn conjugator(&self, g: usize, target: usize) -> Option<usize> {
        self.elements().find(|&k| self.conj(k, g) == target)
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Sorted subgroup generated by `gens`.
    pub fn generated_by(&self, gens: &[usize]) -> Vec<usize> {
        let mut set: BTreeSet<usize> = BTreeSet::from([self.identity]);
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &s in gens {
                let y = self.mul(x, s);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set.into_iter().collect()
    }

    pub fn is_subgroup(&self, elements: &[usize]) -> bool {
        self.subgroup(elements).is_ok()
    }

    /// Validates that `elements` is a subgroup and re-indexes it as a group
    /// in its own right.
    pub fn subgroup(&self, elements: &[usize]) -> Result<Subgroup, GroupError> {
        let set: BTreeSet<usize> = elements.iter().copied().collect();
        if let Some(&bad) = set.iter().find(|&&g| g >= self.order) {
            return Err(GroupError::UnknownElement(bad));
        }
        if !set.contains(&self.identity) {
            return Err(GroupError::NoIdentity);
        }
        let embedding: Vec<usize> = set.iter().copied().collect();
        let local = |g: usize| embedding.binary_search(&g).ok();
        let mut rows = Vec::with_capacity(embedding.len());
        for &a in &embedding {
            let mut row = Vec::with_capacity(embedding.len());
            for &b in &embedding {
                let ab = self.mul(a, b);
                row.push(local(ab).ok_or(GroupError::NotClosed { a, b })?);
            }
            rows.push(row);
        }
        let group = FiniteGroup::from_table(&rows)?;
        Ok(Subgroup { group, embedding })
    }
}

/// A subgroup re-indexed as `0..|H|`, with its embedding into the ambient group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    pub group: FiniteGroup,
    /// `embedding[local] = ambient id`, increasing.
    pub embedding: Vec<usize>,
}

impl Subgroup {
    pub fn local(&self, ambient: usize) -> Option<usize> {
        self.embedding.binary_search(&ambient).ok()
    }

    pub fn ambient(&self, local: usize) -> usize {
        self.embedding[local]
    }
}

/// Mixed-radix coordinates of `id` in `Z/n_1 × … × Z/n_k`.
pub fn abelian_coords(orders: &[usize], mut id: usize) -> Vec<usize> {
    let mut coords = vec![0; orders.len()];
    for (c, &m) in coords.iter_mut().zip(orders).rev() {
        *c = id % m;
        id /= m;
    }
    coords
}

pub fn abelian_index(orders: &[usize], coords: &[usize]) -> usize {
    coords
        .iter()
        .zip(orders)
        .fold(0, |acc, (&c, &m)| acc * m + c % m)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z2_table() {
        let g = FiniteGroup::from_table(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.identity(), 0);
        assert_eq!(g.inv(1), 1);
    }

    #[test]
    fn left_projection_has_no_identity() {
        let err = FiniteGroup::from_table(&[vec![0, 0], vec![1, 1]]).unwrap_err();
        assert_eq!(err, GroupError::NoIdentity);
    }

    #[test]
    fn ragged_and_out_of_range_tables() {
        assert!(matches!(
            FiniteGroup::from_table(&[vec![0, 1], vec![1]]),
            Err(GroupError::NotSquare { row: 1, .. })
        ));
        assert!(matches!(
            FiniteGroup::from_table(&[vec![0, 2], vec![1, 0]]),
            Err(GroupError::EntryOutOfRange { .. })
        ));
    }

    #[test]
    fn non_associative_witness() {
        // a Latin square with identity 0 that is not a group (order-5 loop)
        let rows = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let err = FiniteGroup::from_table(&rows).unwrap_err();
        assert!(matches!(err, GroupError::NonAssociative { .. }), "{err:?}");
    }

    #[test]
    fn s3_structure() {
        let s3 = FiniteGroup::symmetric(3);
        assert_eq!(s3.order(), 6);
        assert_eq!(s3.identity(), 0);
        let sizes: Vec<usize> = s3.conjugacy_classes().iter().map(|c| c.len()).collect();
        let mut sorted = sizes.clone();
        sorted.sort();
        assert_eq!(sorted, vec![1, 2, 3]);
        for g in s3.elements() {
            let class = s3.conjugacy_classes().into_iter().find(|c| c.contains(&g)).unwrap();
            assert_eq!(class.len() * s3.centralizer(g).len(), 6);
        }
        // a transposition has centralizer {e, τ}
        let tau = (0..6).find(|&g| s3.element_order(g) == 2).unwrap();
        assert_eq!(s3.centralizer(tau), vec![0, tau]);
    }

    #[test]
    fn klein_four_is_abelian() {
        let v = FiniteGroup::abelian(&[2, 2]);
        assert!(v.is_abelian());
        assert_eq!(v.conjugacy_classes().len(), 4);
        for g in v.elements() {
            assert_eq!(v.centralizer(g).len(), 4);
        }
    }

    #[test]
    fn named_groups_have_expected_shape() {
        let d4 = FiniteGroup::dihedral(4);
        assert_eq!(d4.conjugacy_classes().len(), 5);
        let q8 = FiniteGroup::quaternion();
        assert_eq!(q8.conjugacy_classes().len(), 5);
        assert!(!q8.is_abelian());
        let z2z4 = FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(4));
        assert!(z2z4.is_abelian());
        assert_eq!(z2z4.order(), 8);
    }

    #[test]
    fn subgroup_reindexing() {
        let s3 = FiniteGroup::symmetric(3);
        let tau = (0..6).find(|&g| s3.element_order(g) == 2).unwrap();
        let h = s3.subgroup(&[0, tau]).unwrap();
        assert_eq!(h.group.order(), 2);
        assert_eq!(h.ambient(1), tau);
        let three_cycle = (0..6).find(|&g| s3.element_order(g) == 3).unwrap();
        assert!(s3.subgroup(&[0, tau, three_cycle]).is_err());
        assert_eq!(s3.generated_by(&[tau, three_cycle]).len(), 6);
    }

    #[test]
    fn mixed_radix_round_trip() {
        let orders = [2, 3, 4];
        for id in 0..24 {
            assert_eq!(abelian_index(&orders, &abelian_coords(&orders, id)), id);
        }
    }
}
