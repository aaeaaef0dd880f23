//! Finite groups as multiplication tables, plus the permutation helpers used
//! by the automorphism machinery.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("table is not square or has entries out of range")]
    Shape,
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("associativity fails at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
}

/// A finite group given by its full multiplication table. `mul[a][b]` is the
/// product `a * b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupTable", into = "GroupTable")]
pub struct FiniteGroup {
    mul: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

/// Serialized form of a group: just the table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    pub table: Vec<Vec<usize>>,
}

impl TryFrom<GroupTable> for FiniteGroup {
    type Error = GroupError;
    fn try_from(t: GroupTable) -> Result<Self, GroupError> {
        FiniteGroup::from_table(t.table)
    }
}

impl From<FiniteGroup> for GroupTable {
    fn from(g: FiniteGroup) -> Self {
        GroupTable { table: g.mul }
    }
}

/// Order multiset of a group, sorted: `(element order, count)`.
pub type Fingerprint = Vec<(usize, usize)>;

impl FiniteGroup {
    pub fn from_table(mul: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = mul.len();
        if n == 0 || mul.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(GroupError::Shape);
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mul[e][x] == x && mul[x][e] == x))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverse = vec![0; n];
        for (x, inv) in inverse.iter_mut().enumerate() {
            *inv = (0..n)
                .find(|&y| mul[x][y] == identity && mul[y][x] == identity)
                .ok_or(GroupError::NoInverse(x))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        Ok(FiniteGroup { mul, identity, inverse })
    }

    /// Builds a table from a closed set of permutations. The identity must be
    /// present; elements keep the order given.
    pub fn from_perms(perms: &[Perm]) -> Result<Self, GroupError> {
        let index: BTreeMap<&Perm, usize> = perms.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut mul = vec![vec![0; perms.len()]; perms.len()];
        for (i, a) in perms.iter().enumerate() {
            for (j, b) in perms.iter().enumerate() {
                // a * b means "apply b, then a"
                let ab = a.compose(b);
                mul[i][j] = *index.get(&ab).ok_or(GroupError::Shape)?;
            }
        }
        Self::from_table(mul)
    }

    pub fn cyclic(n: usize) -> Self {
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(mul).expect("cyclic table is a group")
    }

    /// Direct product; element `(a, b)` is encoded as `a * |other| + b`.
    pub fn product(&self, other: &FiniteGroup) -> Self {
        let (n, m) = (self.order(), other.order());
        let mut mul = vec![vec![0; n * m]; n * m];
        for a in 0..n * m {
            for b in 0..n * m {
                let x = self.mul[a / m][b / m];
                let y = other.mul[a % m][b % m];
                mul[a][b] = x * m + y;
            }
        }
        Self::from_table(mul).expect("product of groups is a group")
    }

    pub fn klein() -> Self {
        Self::cyclic(2).product(&Self::cyclic(2))
    }

    /// The symmetric group on `n` letters, elements in lexicographic order of
    /// their images (so element 0 is the identity).
    pub fn symmetric(n: usize) -> Self {
        let perms: Vec<Perm> = all_permutations(n).into_iter().map(Perm).collect();
        Self::from_perms(&perms).expect("closed")
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul[x][a];
            k += 1;
        }
        k
    }

    pub fn fingerprint(&self) -> Fingerprint {
        let mut counts = BTreeMap::new();
        for a in self.elements() {
            *counts.entry(self.element_order(a)).or_insert(0) += 1;
        }
        counts.into_iter().collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.mul[a][b] == self.mul[b][a]))
    }

    /// Subgroup generated by `gens`, as a sorted element set.
    pub fn generated(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([self.identity]);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul[x][g];
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    pub fn is_subgroup(&self, set: &BTreeSet<usize>) -> bool {
        set.contains(&self.identity)
            && set.iter().all(|&a| set.iter().all(|&b| set.contains(&self.mul[a][self.inverse[b]])))
    }

    pub fn is_normal(&self, set: &BTreeSet<usize>) -> bool {
        self.elements()
            .all(|g| set.iter().all(|&n| set.contains(&self.mul[self.mul[g][n]][self.inverse[g]])))
    }

    pub fn commutator_subgroup_of(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut gens = BTreeSet::new();
        for &a in set {
            for &b in set {
                let c = self.mul[self.mul[self.inverse[a]][self.inverse[b]]][self.mul[a][b]];
                gens.insert(c);
            }
        }
        self.generated(&gens.into_iter().collect::<Vec<_>>())
    }

    /// Derived series terminates at the trivial group.
    pub fn is_solvable(&self) -> bool {
        let mut current: BTreeSet<usize> = self.elements().collect();
        loop {
            let next = self.commutator_subgroup_of(&current);
            if next.len() == 1 {
                return true;
            }
            if next.len() == current.len() {
                return false;
            }
            current = next;
        }
    }

    /// Restriction of the table to a subgroup, re-indexed in ascending order.
    pub fn subgroup_table(&self, set: &BTreeSet<usize>) -> FiniteGroup {
        let elems: Vec<usize> = set.iter().copied().collect();
        let pos: BTreeMap<usize, usize> = elems.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mul = elems
            .iter()
            .map(|&a| elems.iter().map(|&b| pos[&self.mul[a][b]]).collect())
            .collect();
        FiniteGroup::from_table(mul).expect("subgroup table")
    }

    /// Greedy small generating set: add the first element outside the span so far.
    pub fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = BTreeSet::from([self.identity]);
        for a in self.elements() {
            if !span.contains(&a) {
                gens.push(a);
                span = self.generated(&gens);
            }
        }
        gens
    }

    /// Searches for an isomorphism `self -> other`, returned as an element map.
    pub fn find_isomorphism(&self, other: &FiniteGroup) -> Option<Vec<usize>> {
        if self.order() != other.order() || self.fingerprint() != other.fingerprint() {
            return None;
        }
        let gens = self.generators();
        let mut images = Vec::with_capacity(gens.len());
        self.extend_iso(other, &gens, &mut images)
    }

    fn extend_iso(&self, other: &FiniteGroup, gens: &[usize], images: &mut Vec<usize>) -> Option<Vec<usize>> {
        if images.len() == gens.len() {
            return self.hom_from_generators(other, gens, images).filter(|map| {
                let distinct: BTreeSet<_> = map.iter().collect();
                distinct.len() == map.len()
            });
        }
        let g = gens[images.len()];
        let ord = self.element_order(g);
        for h in other.elements() {
            if other.element_order(h) != ord {
                continue;
            }
            images.push(h);
            if let Some(found) = self.extend_iso(other, gens, images) {
                return Some(found);
            }
            images.pop();
        }
        None
    }

    /// Extends generator images to a homomorphism if one exists.
    pub fn hom_from_generators(&self, other: &FiniteGroup, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
        let mut map: Vec<Option<usize>> = vec![None; self.order()];
        map[self.identity] = Some(other.identity);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            let fx = map[x].expect("queued elements are mapped");
            for (&g, &h) in gens.iter().zip(images) {
                let y = self.mul[x][g];
                let fy = other.mul[fx][h];
                match map[y] {
                    None => {
                        map[y] = Some(fy);
                        queue.push_back(y);
                    }
                    Some(existing) if existing != fy => return None,
                    Some(_) => {}
                }
            }
        }
        let map: Vec<usize> = map.into_iter().collect::<Option<Vec<_>>>()?;
        let is_hom = self
            .elements()
            .all(|a| self.elements().all(|b| map[self.mul[a][b]] == other.mul[map[a]][map[b]]));
        is_hom.then_some(map)
    }

    /// Abstract name for groups of order at most 15, looked up by order,
    /// abelianness and element-order multiset (which separate all such groups).
    pub fn name(&self) -> Option<&'static str> {
        identify(self.order(), &self.fingerprint())
    }
}

fn identify(order: usize, fp: &Fingerprint) -> Option<&'static str> {
    let count = |k: usize| fp.iter().find(|(o, _)| *o == k).map_or(0, |(_, c)| *c);
    if fp.iter().any(|(o, _)| *o == order) {
        return match order {
            1 => Some("C1"),
            2 => Some("C2"),
            3 => Some("C3"),
            4 => Some("C4"),
            5 => Some("C5"),
            6 => Some("C6"),
            7 => Some("C7"),
            8 => Some("C8"),
            9 => Some("C9"),
            10 => Some("C10"),
            11 => Some("C11"),
            12 => Some("C12"),
            13 => Some("C13"),
            14 => Some("C14"),
            15 => Some("C15"),
            _ => None,
        };
    }
    match (order, count(2), count(3), count(4), count(6)) {
        (4, 3, _, _, _) => Some("C2xC2"),
        (6, 3, 2, _, _) => Some("S3"),
        (8, 7, _, _, _) => Some("C2xC2xC2"),
        (8, 3, _, 4, _) => Some("C4xC2"),
        (8, 5, _, 2, _) => Some("D4"),
        (8, 1, _, 6, _) => Some("Q8"),
        (9, _, 8, _, _) => Some("C3xC3"),
        (10, 5, _, _, _) => Some("D5"),
        (12, 3, 2, _, 6) => Some("C6xC2"),
        (12, 7, 2, _, 2) => Some("D6"),
        (12, 3, 8, _, _) => Some("A4"),
        (12, 1, 2, 6, 2) => Some("Dic3"),
        (14, 7, _, _, _) => Some("D7"),
        _ => None,
    }
}

/// A permutation of `0..n`, stored as its image vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm(pub Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn order(&self) -> usize {
        let mut seen = vec![false; self.0.len()];
        let mut lcm = 1usize;
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x];
                len += 1;
            }
            lcm = lcm / gcd(lcm, len) * len;
        }
        lcm
    }
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..current.len()).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..current.len()).rev().find(|&j| current[j] > current[i - 1]).expect("exists");
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

/// Closes a set of permutations under composition (BFS from the identity).
pub fn close_perms(n: usize, gens: &[Perm], limit: usize) -> Option<Vec<Perm>> {
    let id = Perm::identity(n);
    let mut seen = BTreeSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = g.compose(&x);
            if seen.insert(y.clone()) {
                if seen.len() > limit {
                    return None;
                }
                queue.push_back(y);
            }
        }
    }
    Some(seen.into_iter().collect())
}
