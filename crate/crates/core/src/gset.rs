//! Finite G-sets: the zero-dimensional base spaces.

use std::sync::Arc;

use thiserror::Error;

use crate::group_cocycle::{FiniteGroup, GroupError, Subgroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GSetError {
    #[error("action table has {found} entries, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error("action sends point {x} under {g} to {value}, which is not a point")]
    OutOfRange { g: usize, x: usize, value: usize },
    #[error("identity moves point {x}")]
    IdentityMoves { x: usize },
    #[error("action is not compatible with multiplication at (g, h, x) = ({g}, {h}, {x})")]
    NotAnAction { g: usize, h: usize, x: usize },
    #[error("map has {found} entries, expected {expected}")]
    MapShape { expected: usize, found: usize },
    #[error("map is not equivariant at (g, x) = ({g}, {x})")]
    NotEquivariant { g: usize, x: usize },
    #[error("G-sets are over different groups")]
    GroupMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A left action of a finite group on points `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGSet {
    group: Arc<FiniteGroup>,
    n_points: usize,
    /// `action[g * n + x] = g·x`
    action: Vec<usize>,
}

impl FiniteGSet {
    pub fn new(group: Arc<FiniteGroup>, n_points: usize, action: Vec<usize>) -> Result<Self, GSetError> {
        let n = n_points;
        let expected = group.order() * n;
        if action.len() != expected {
            return Err(GSetError::Shape {
                expected,
                found: action.len(),
            });
        }
        for g in group.elements() {
            for x in 0..n {
                let v = action[g * n + x];
                if v >= n {
                    return Err(GSetError::OutOfRange { g, x, value: v });
                }
            }
        }
        let s = Self {
            group,
            n_points,
            action,
        };
        let e = s.group.identity();
        if let Some(x) = (0..n).find(|&x| s.act(e, x) != x) {
            return Err(GSetError::IdentityMoves { x });
        }
        for g in s.group.elements() {
            for h in s.group.elements() {
                let gh = s.group.mul(g, h);
                if let Some(x) = (0..n).find(|&x| s.act(g, s.act(h, x)) != s.act(gh, x)) {
                    return Err(GSetError::NotAnAction { g, h, x });
                }
            }
        }
        Ok(s)
    }

    pub fn from_fn(group: Arc<FiniteGroup>, n_points: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self, GSetError> {
        let action = group
            .elements()
            .flat_map(|g| (0..n_points).map(move |x| (g, x)))
            .map(|(g, x)| f(g, x))
            .collect();
        Self::new(group, n_points, action)
    }

    /// `n` points, each fixed by every element.
    pub fn trivial(group: Arc<FiniteGroup>, n_points: usize) -> Self {
        Self::from_fn(group, n_points, |_, x| x).expect("trivial action")
    }

    pub fn point(group: Arc<FiniteGroup>) -> Self {
        Self::trivial(group, 1)
    }

    /// The group acting on itself by left multiplication.
    pub fn regular(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        let g2 = group.clone();
        Self::from_fn(group, n, move |g, x| g2.mul(g, x)).expect("regular action")
    }

    /// Left cosets `G/H`, numbered by the order of their least element.
    pub fn cosets(group: Arc<FiniteGroup>, subgroup: &[usize]) -> Result<Self, GSetError> {
        let sub = group.subgroup(subgroup)?;
        let mut reps: Vec<usize> = Vec::new();
        let mut label = vec![usize::MAX; group.order()];
        for g in group.elements() {
            if label[g] != usize::MAX {
                continue;
            }
            for &h in &sub.embedding {
                label[group.mul(g, h)] = reps.len();
            }
            reps.push(g);
        }
        let g2 = group.clone();
        Self::from_fn(group, reps.len(), move |g, x| label[g2.mul(g, reps[x])])
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn action_table(&self) -> &[usize] {
        &self.action
    }

    /// `g·x`.
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.action[g * self.n_points + x]
    }

    /// Orbits, each sorted, ordered by least point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n_points];
        let mut out = Vec::new();
        for x in 0..self.n_points {
            if seen[x] {
                continue;
            }
            let mut orbit: Vec<usize> = self.group.elements().map(|g| self.act(g, x)).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &y in &orbit {
                seen[y] = true;
            }
            out.push(orbit);
        }
        out
    }

    pub fn stabilizer(&self, x: usize) -> Vec<usize> {
        self.group.elements().filter(|&g| self.act(g, x) == x).collect()
    }

    pub fn stabilizer_subgroup(&self, x: usize) -> Subgroup {
        self.group
            .subgroup(&self.stabilizer(x))
            .expect("stabilizers are subgroups")
    }

    /// `X^g`, sorted.
    pub fn fixed_points(&self, g: usize) -> Vec<usize> {
        (0..self.n_points).filter(|&x| self.act(g, x) == x).collect()
    }

    /// The bijection `X^g → X^{hgh⁻¹}`, `x ↦ hx`, as pairs.
    pub fn conj_map(&self, g: usize, h: usize) -> Vec<(usize, usize)> {
        let target = self.group.conj(h, g);
        let map: Vec<(usize, usize)> = self
            .fixed_points(g)
            .into_iter()
            .map(|x| (x, self.act(h, x)))
            .collect();
        debug_assert!(map.iter().all(|&(_, y)| self.act(target, y) == y));
        debug_assert_eq!(map.len(), self.fixed_points(target).len());
        map
    }

    /// Least `g` with `g·x = y`, if any.
    pub fn transporter(&self, x: usize, y: usize) -> Option<usize> {
        self.group.elements().find(|&g| self.act(g, x) == y)
    }

    /// Disjoint union; points of `other` are shifted by `self.n_points()`.
    pub fn disjoint_union(&self, other: &Self) -> Result<Self, GSetError> {
        if self.group != other.group {
            return Err(GSetError::GroupMismatch);
        }
        let n = self.n_points;
        Self::from_fn(self.group.clone(), n + other.n_points, |g, x| {
            if x < n {
                self.act(g, x)
            } else {
                n + other.act(g, x - n)
            }
        })
    }
}

/// An equivariant map of G-sets, `map[x] = f(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSetMap {
    source: FiniteGSet,
    target: FiniteGSet,
    map: Vec<usize>,
}

impl GSetMap {
    pub fn new(source: FiniteGSet, target: FiniteGSet, map: Vec<usize>) -> Result<Self, GSetError> {
        if source.group != target.group {
            return Err(GSetError::GroupMismatch);
        }
        if map.len() != source.n_points {
            return Err(GSetError::MapShape {
                expected: source.n_points,
                found: map.len(),
            });
        }
        for (x, &y) in map.iter().enumerate() {
            if y >= target.n_points {
                return Err(GSetError::OutOfRange { g: source.group.identity(), x, value: y });
            }
        }
        for g in source.group.elements() {
            for x in 0..source.n_points {
                if map[source.act(g, x)] != target.act(g, map[x]) {
                    return Err(GSetError::NotEquivariant { g, x });
                }
            }
        }
        Ok(Self { source, target, map })
    }

    pub fn identity(x: &FiniteGSet) -> Self {
        Self {
            source: x.clone(),
            target: x.clone(),
            map: (0..x.n_points).collect(),
        }
    }

    pub fn source(&self) -> &FiniteGSet {
        &self.source
    }

    pub fn target(&self) -> &FiniteGSet {
        &self.target
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3_natural() -> FiniteGSet {
        let perms: Vec<Vec<usize>> = vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ];
        let g = Arc::new(FiniteGroup::from_permutations(&perms).unwrap());
        FiniteGSet::from_fn(g, 3, move |g, x| perms[g][x]).unwrap()
    }

    #[test]
    fn point_has_full_stabilizer() {
        let g = Arc::new(FiniteGroup::abelian(&[2, 2]));
        let x = FiniteGSet::point(g);
        assert_eq!(x.orbits(), vec![vec![0]]);
        assert_eq!(x.stabilizer(0).len(), 4);
    }

    #[test]
    fn swap_is_free() {
        let x = FiniteGSet::regular(Arc::new(FiniteGroup::cyclic(2)));
        assert_eq!(x.orbits().len(), 1);
        assert_eq!(x.stabilizer(0), vec![0]);
        assert!(x.fixed_points(1).is_empty());
        assert_eq!(x.fixed_points(0), vec![0, 1]);
    }

    #[test]
    fn s3_on_three_points() {
        let x = s3_natural();
        assert_eq!(x.orbits(), vec![vec![0, 1, 2]]);
        for p in 0..3 {
            assert_eq!(x.stabilizer(p).len(), 2);
        }
        // (12) in 1-based labels swaps 0 and 1: id 2 in the list above
        assert_eq!(x.fixed_points(2), vec![2]);
        // conj by (23) = id 1 lands in X^{(13)} = {1}
        let map = x.conj_map(2, 1);
        assert_eq!(map, vec![(2, 1)]);
        assert_eq!(x.fixed_points(x.group().conj(1, 2)), vec![1]);
    }

    #[test]
    fn invalid_actions_are_rejected() {
        let g = Arc::new(FiniteGroup::cyclic(2));
        assert!(matches!(
            FiniteGSet::new(g.clone(), 2, vec![1, 0, 1, 0]),
            Err(GSetError::IdentityMoves { .. })
        ));
        let z3 = Arc::new(FiniteGroup::cyclic(3));
        // generator swaps two points: not an action of Z/3
        assert!(matches!(
            FiniteGSet::new(z3, 2, vec![0, 1, 1, 0, 1, 0]),
            Err(GSetError::NotAnAction { .. })
        ));
    }

    #[test]
    fn cosets_and_burnside() {
        let s3 = Arc::new(FiniteGroup::symmetric(3));
        let tau = (0..6).find(|&g| s3.element_order(g) == 2).unwrap();
        let x = FiniteGSet::cosets(s3.clone(), &[0, tau]).unwrap();
        assert_eq!(x.n_points(), 3);
        let total: usize = s3.elements().map(|g| x.fixed_points(g).len()).sum();
        assert_eq!(total, 6 * x.orbits().len());
    }

    #[test]
    fn equivariant_maps() {
        let g = Arc::new(FiniteGroup::cyclic(2));
        let free = FiniteGSet::regular(g.clone());
        let pt = FiniteGSet::point(g.clone());
        assert!(GSetMap::new(free.clone(), pt.clone(), vec![0, 0]).is_ok());
        let two = FiniteGSet::trivial(g, 2);
        assert!(matches!(
            GSetMap::new(free, two, vec![0, 1]),
            Err(GSetError::NotEquivariant { .. })
        ));
    }
}
