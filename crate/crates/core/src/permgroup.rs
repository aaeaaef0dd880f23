//! Permutation groups given by generators, via a deterministic Schreier–Sims
//! stabilizer chain.

use std::collections::BTreeMap;

use crate::group::{FiniteGroup, Perm};

#[derive(Debug, Clone)]
struct Level {
    point: usize,
    /// Orbit of `point` under the level's group, with `u_b(point) = b`.
    transversal: BTreeMap<usize, Perm>,
}

/// A permutation group on `0..degree` with a base and strong generating set.
#[derive(Debug, Clone)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    strong: Vec<Perm>,
    levels: Vec<Level>,
}

impl PermGroup {
    pub fn trivial(degree: usize) -> Self {
        PermGroup { degree, generators: Vec::new(), strong: Vec::new(), levels: Vec::new() }
    }

    pub fn from_generators(degree: usize, gens: &[Perm]) -> Self {
        let generators: Vec<Perm> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        debug_assert!(generators.iter().all(|g| g.len() == degree));
        let mut strong = generators.clone();
        let mut base: Vec<usize> = Vec::new();
        loop {
            extend_base(&mut base, &strong);
            let levels = build_levels(&base, &strong);
            match find_missing(&levels, &base, &strong) {
                Some(residue) => strong.push(residue),
                None => return PermGroup { degree, generators, strong, levels },
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn strong_generators(&self) -> &[Perm] {
        &self.strong
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.point).collect()
    }

    /// Sizes of the basic orbits; their product is the order.
    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.transversal.len()).collect()
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.transversal.len() as u128).product()
    }

    pub fn is_trivial(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn contains(&self, p: &Perm) -> bool {
        p.len() == self.degree && sift(&self.levels, p.clone()).is_identity()
    }

    /// Every element, as products of transversal elements in base order.
    /// Panics if the order exceeds `limit`.
    pub fn elements(&self, limit: usize) -> Vec<Perm> {
        assert!(self.order() <= limit as u128, "group of order {} exceeds element limit {limit}", self.order());
        let mut out = vec![Perm::identity(self.degree)];
        for level in self.levels.iter().rev() {
            let mut next = Vec::with_capacity(out.len() * level.transversal.len());
            for u in level.transversal.values() {
                for x in &out {
                    next.push(u.compose(x));
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// Orbit partition of `0..degree`, each orbit sorted, ordered by least element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        orbits_of(self.degree, &self.strong)
    }

    pub fn orbit_of(&self, x: usize) -> Vec<usize> {
        let mut seen = vec![false; self.degree];
        seen[x] = true;
        let mut stack = vec![x];
        let mut out = vec![x];
        while let Some(y) = stack.pop() {
            for g in &self.strong {
                let z = g.apply(y);
                if !seen[z] {
                    seen[z] = true;
                    stack.push(z);
                    out.push(z);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.degree).filter(|&x| self.strong.iter().all(|g| g.apply(x) == x)).collect()
    }

    /// Pointwise stabilizer of `points`.
    pub fn pointwise_stabilizer(&self, points: &[usize]) -> PermGroup {
        // rebuild with the given points first in the base
        let mut base: Vec<usize> = points.to_vec();
        let mut strong = self.strong.clone();
        loop {
            extend_base(&mut base, &strong);
            let levels = build_levels(&base, &strong);
            match find_missing(&levels, &base, &strong) {
                Some(residue) => strong.push(residue),
                None => {
                    let gens: Vec<Perm> = strong.iter().filter(|g| points.iter().all(|&p| g.apply(p) == p)).cloned().collect();
                    return PermGroup::from_generators(self.degree, &gens);
                }
            }
        }
    }

    /// The action on an invariant subset, renumbered by position in `subset`.
    pub fn restrict(&self, subset: &[usize]) -> PermGroup {
        let pos: BTreeMap<usize, usize> = subset.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let gens: Vec<Perm> = self
            .generators
            .iter()
            .chain(&self.strong)
            .map(|g| Perm(subset.iter().map(|&x| pos[&g.apply(x)]).collect()))
            .collect();
        PermGroup::from_generators(subset.len(), &gens)
    }

    /// Multiplication table on the element list returned by `elements`.
    pub fn to_table(&self, limit: usize) -> (FiniteGroup, Vec<Perm>) {
        let elems = self.elements(limit);
        let index: BTreeMap<&Perm, usize> = elems.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let table = elems
            .iter()
            .map(|a| elems.iter().map(|b| index[&a.compose(b)]).collect())
            .collect();
        (FiniteGroup::from_table(table).expect("permutation group table"), elems)
    }
}

pub fn orbits_of(degree: usize, gens: &[Perm]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..degree).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for g in gens {
        for x in 0..degree {
            let (a, b) = (find(&mut parent, x), find(&mut parent, g.apply(x)));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for x in 0..degree {
        let r = find(&mut parent, x);
        groups.entry(r).or_default().push(x);
    }
    groups.into_values().collect()
}

fn extend_base(base: &mut Vec<usize>, strong: &[Perm]) {
    loop {
        let moved = strong
            .iter()
            .filter(|g| base.iter().all(|&b| g.apply(b) == b))
            .find_map(|g| (0..g.len()).find(|&x| g.apply(x) != x));
        match moved {
            Some(x) => base.push(x),
            None => return,
        }
    }
}

fn build_levels(base: &[usize], strong: &[Perm]) -> Vec<Level> {
    let mut levels = Vec::with_capacity(base.len());
    for (i, &point) in base.iter().enumerate() {
        let gens: Vec<&Perm> = strong.iter().filter(|g| base[..i].iter().all(|&b| g.apply(b) == b)).collect();
        let n = strong.first().map_or(0, Perm::len);
        let mut transversal = BTreeMap::from([(point, Perm::identity(n))]);
        let mut frontier = vec![point];
        while let Some(b) = frontier.pop() {
            let ub = transversal[&b].clone();
            for g in &gens {
                let c = g.apply(b);
                if let std::collections::btree_map::Entry::Vacant(e) = transversal.entry(c) {
                    e.insert(g.compose(&ub));
                    frontier.push(c);
                }
            }
        }
        levels.push(Level { point, transversal });
    }
    // drop trailing levels whose orbit is trivial
    while levels.last().is_some_and(|l| l.transversal.len() == 1) {
        levels.pop();
    }
    levels
}

fn sift(levels: &[Level], mut h: Perm) -> Perm {
    for level in levels {
        let b = h.apply(level.point);
        match level.transversal.get(&b) {
            Some(u) => h = u.inverse().compose(&h),
            None => return h,
        }
    }
    h
}

/// A Schreier generator that does not sift to the identity, if any.
fn find_missing(levels: &[Level], base: &[usize], strong: &[Perm]) -> Option<Perm> {
    for i in (0..levels.len()).rev() {
        let gens: Vec<&Perm> = strong.iter().filter(|g| base[..i].iter().all(|&b| g.apply(b) == b)).collect();
        for (&b, ub) in &levels[i].transversal {
            for s in &gens {
                let sb = s.apply(b);
                let h = levels[i].transversal[&sb].inverse().compose(&s.compose(ub));
                let residue = sift(&levels[i + 1..], h);
                if !residue.is_identity() {
                    return Some(residue);
                }
            }
        }
    }
    // generators not captured by any level (moves only points past the base)
    strong.iter().map(|g| sift(levels, g.clone())).find(|r| !r.is_identity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::close_perms;
    use proptest::prelude::*;

    #[test]
    fn symmetric_group_orders() {
        let n = 6;
        let cycle = Perm((1..n).chain([0]).collect());
        let swap = Perm([1, 0].into_iter().chain(2..n).collect());
        let g = PermGroup::from_generators(n, &[cycle, swap]);
        assert_eq!(g.order(), 720);
        assert_eq!(g.orbits(), vec![(0..n).collect::<Vec<_>>()]);
    }

    #[test]
    fn stabilizer_and_restriction() {
        let n = 4;
        let cycle = Perm(vec![1, 2, 3, 0]);
        let swap = Perm(vec![1, 0, 2, 3]);
        let g = PermGroup::from_generators(n, &[cycle, swap]);
        assert_eq!(g.pointwise_stabilizer(&[0]).order(), 6);
        assert_eq!(g.pointwise_stabilizer(&[0, 1]).order(), 2);
        // S3 × C2 on {0,1,2} ⊔ {3,4}
        let g = PermGroup::from_generators(5, &[Perm(vec![1, 2, 0, 4, 3]), Perm(vec![1, 0, 2, 3, 4])]);
        assert_eq!(g.order(), 12);
        assert_eq!(g.restrict(&[3, 4]).order(), 2);
        assert_eq!(g.restrict(&[0, 1, 2]).order(), 6);
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Perm> {
        Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(Perm)
    }

    proptest! {
        #[test]
        fn order_matches_closure(gens in proptest::collection::vec(arb_perm(6), 0..3)) {
            let g = PermGroup::from_generators(6, &gens);
            let all = close_perms(6, &gens, 1000).unwrap();
            prop_assert_eq!(g.order() as usize, all.len());
            prop_assert_eq!(g.elements(1000), all.clone());
            for p in &all {
                prop_assert!(g.contains(p));
            }
        }
    }
}
