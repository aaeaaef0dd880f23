//! Individualization–refinement search for isomorphisms and automorphisms.
//!
//! Colours are 64-bit hashes, refined jointly on both sides of a search so
//! that they stay comparable. Hash collisions only coarsen a partition, and
//! every leaf is verified tuple by tuple, so they never make a result wrong.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{FiniteStructure, Result, StructureError};
use crate::group::Perm;
use crate::permgroup::PermGroup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    /// Largest universe any search will accept.
    pub max_universe: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_universe: 64 }
    }
}

impl SearchLimits {
    pub fn with_universe(max_universe: usize) -> Self {
        SearchLimits { max_universe }
    }

    pub(crate) fn check(&self, s: &FiniteStructure) -> Result<()> {
        if s.size() > self.max_universe {
            return Err(StructureError::SizeLimitExceeded { size: s.size(), limit: self.max_universe });
        }
        Ok(())
    }
}

fn mix(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn combine(a: u64, b: u64) -> u64 {
    mix(a.rotate_left(17) ^ b)
}

const PIN: u64 = 0x50_494e;
const FIX: u64 = 0x46_4958;
const INDIV: u64 = 0x49_4e44;

/// Relations, function graphs and constants flattened into tuple lists.
struct Compiled {
    n: usize,
    rels: Vec<Vec<Vec<u32>>>,
    sets: Vec<HashSet<Vec<u32>>>,
    /// For each element, its occurrences `(relation, tuple, position)`.
    occ: Vec<Vec<(u32, u32, u32)>>,
    base: Vec<u64>,
}

impl Compiled {
    fn new(s: &FiniteStructure) -> Self {
        let n = s.size();
        let mut rels: Vec<Vec<Vec<u32>>> = Vec::new();
        for r in s.relations() {
            rels.push(r.tuples.iter().map(|t| t.iter().map(|&x| x as u32).collect()).collect());
        }
        for f in s.functions() {
            rels.push(f.table.iter().map(|(a, &v)| a.iter().chain([&v]).map(|&x| x as u32).collect()).collect());
        }
        for c in s.constants() {
            rels.push(vec![vec![c.element as u32]]);
        }
        let mut occ = vec![Vec::new(); n];
        for (ri, tuples) in rels.iter().enumerate() {
            for (ti, t) in tuples.iter().enumerate() {
                for (p, &x) in t.iter().enumerate() {
                    occ[x as usize].push((ri as u32, ti as u32, p as u32));
                }
            }
        }
        let sets = rels.iter().map(|ts| ts.iter().cloned().collect()).collect();
        let base = (0..n).map(|e| mix(s.sort_of(e).expect("element in universe") as u64 + 1)).collect();
        Compiled { n, rels, sets, occ, base }
    }

    fn signature(&self, colours: &[u64], v: usize) -> u64 {
        let mut acc = colours[v];
        let mut sum = 0u64;
        for &(r, t, p) in &self.occ[v] {
            let tuple = &self.rels[r as usize][t as usize];
            let mut h = combine(r as u64 + 1, p as u64 + 1);
            for &x in tuple {
                h = combine(h, colours[x as usize]);
            }
            sum = sum.wrapping_add(mix(h));
        }
        acc = combine(acc, sum);
        acc
    }
}

fn distinct(colours: &[u64]) -> usize {
    let mut v = colours.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

fn sorted(colours: &[u64]) -> Vec<u64> {
    let mut v = colours.to_vec();
    v.sort_unstable();
    v
}

/// Refines both colourings to a joint stable partition; `false` when the
/// colour multisets diverge (no isomorphism respects them).
fn refine(a: &Compiled, b: &Compiled, ca: &mut Vec<u64>, cb: &mut Vec<u64>) -> bool {
    if sorted(ca) != sorted(cb) {
        return false;
    }
    let mut count = distinct(ca);
    loop {
        let na: Vec<u64> = (0..a.n).map(|v| a.signature(ca, v)).collect();
        let nb: Vec<u64> = (0..b.n).map(|v| b.signature(cb, v)).collect();
        if sorted(&na) != sorted(&nb) {
            return false;
        }
        let next = distinct(&na);
        *ca = na;
        *cb = nb;
        if next == count {
            return true;
        }
        count = next;
    }
}

fn refine_one(a: &Compiled, ca: &mut Vec<u64>) {
    let mut cb = ca.clone();
    let ok = refine(a, a, ca, &mut cb);
    debug_assert!(ok);
}

/// The target cell: smallest non-singleton colour class, ties broken by
/// least member. Returns the colour.
fn choose_cell(colours: &[u64]) -> Option<u64> {
    let mut classes: std::collections::HashMap<u64, (usize, usize)> = std::collections::HashMap::new();
    for (v, &c) in colours.iter().enumerate() {
        let entry = classes.entry(c).or_insert((0, v));
        entry.0 += 1;
    }
    classes
        .into_iter()
        .filter(|&(_, (size, _))| size > 1)
        .min_by_key(|&(_, (size, first))| (size, first))
        .map(|(c, _)| c)
}

fn leaf_map(a: &Compiled, b: &Compiled, ca: &[u64], cb: &[u64]) -> Option<Vec<usize>> {
    let mut by_colour = std::collections::HashMap::new();
    for (w, &c) in cb.iter().enumerate() {
        by_colour.insert(c, w);
    }
    let map: Vec<usize> = ca.iter().map(|c| by_colour[c]).collect();
    let preserves = a.rels.iter().zip(&b.sets).all(|(ts, set)| {
        ts.iter().all(|t| set.contains(&t.iter().map(|&x| map[x as usize] as u32).collect::<Vec<_>>()))
    });
    preserves.then_some(map)
}

fn search(a: &Compiled, b: &Compiled, mut ca: Vec<u64>, mut cb: Vec<u64>, depth: u64) -> Option<Vec<usize>> {
    if !refine(a, b, &mut ca, &mut cb) {
        return None;
    }
    let Some(cell) = choose_cell(&ca) else {
        return leaf_map(a, b, &ca, &cb);
    };
    let v = (0..a.n).find(|&v| ca[v] == cell).expect("cell member");
    let mark = combine(INDIV, depth);
    for w in (0..b.n).filter(|&w| cb[w] == cell) {
        let (mut ca2, mut cb2) = (ca.clone(), cb.clone());
        ca2[v] = combine(cell, mark);
        cb2[w] = combine(cell, mark);
        if let Some(map) = search(a, b, ca2, cb2, depth + 1) {
            return Some(map);
        }
    }
    None
}

/// An isomorphism `s1 → s2` sending each `x` to `y` for `(x, y)` in `pins`,
/// or `None` after exhaustive search.
pub fn iso_extending(
    s1: &FiniteStructure,
    s2: &FiniteStructure,
    pins: &[(usize, usize)],
    limits: SearchLimits,
) -> Result<Option<Vec<usize>>> {
    limits.check(s1)?;
    limits.check(s2)?;
    for &(x, y) in pins {
        if x >= s1.size() {
            return Err(StructureError::UnknownElement(x));
        }
        if y >= s2.size() {
            return Err(StructureError::UnknownElement(y));
        }
    }
    if !s1.same_signature(s2) {
        return Ok(None);
    }
    let mut forward = std::collections::BTreeMap::new();
    let mut backward = std::collections::BTreeMap::new();
    for &(x, y) in pins {
        if *forward.entry(x).or_insert(y) != y || *backward.entry(y).or_insert(x) != x {
            return Ok(None);
        }
    }
    let (a, b) = (Compiled::new(s1), Compiled::new(s2));
    let (mut ca, mut cb) = (a.base.clone(), b.base.clone());
    for (i, (&x, &y)) in forward.iter().enumerate() {
        if a.base[x] != b.base[y] {
            return Ok(None);
        }
        let c = combine(PIN, i as u64);
        ca[x] = c;
        cb[y] = c;
    }
    let found = search(&a, &b, ca, cb, 0);
    debug_assert!(found.as_ref().is_none_or(|m| s1.is_isomorphism(s2, m)));
    Ok(found.filter(|m| s1.is_isomorphism(s2, m)))
}

/// `iso_over`: an isomorphism restricting to the identity on `part`.
pub fn iso_over(s1: &FiniteStructure, s2: &FiniteStructure, part: &[usize], limits: SearchLimits) -> Result<Option<Vec<usize>>> {
    let pins: Vec<(usize, usize)> = part.iter().map(|&x| (x, x)).collect();
    iso_extending(s1, s2, &pins, limits)
}

/// The automorphisms of a structure fixing a set pointwise.
#[derive(Debug, Clone)]
pub struct AutGroup {
    pub group: PermGroup,
    /// Base used by the search, with the orbit of each base point under the
    /// stabilizer of the earlier ones.
    pub base: Vec<usize>,
    pub basic_orbits: Vec<Vec<usize>>,
}

impl AutGroup {
    pub fn order(&self) -> u128 {
        self.group.order()
    }

    pub fn generators(&self) -> &[Perm] {
        self.group.generators()
    }

    pub fn elements(&self, limit: usize) -> Vec<Perm> {
        self.group.elements(limit)
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        self.group.orbits()
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        self.group.fixed_points()
    }

    /// Order of the action on an invariant subset.
    pub fn restricted_order(&self, subset: &[usize]) -> u128 {
        self.group.restrict(subset).order()
    }
}

/// `automorphism_group`, with `fix` fixed pointwise.
///
/// The base is found top-down by individualizing the least element of the
/// smallest cell; the levels are then completed bottom-up, searching only for
/// cell members not already in the orbit generated so far.
pub fn automorphism_group(s: &FiniteStructure, fix: &[usize], limits: SearchLimits) -> Result<AutGroup> {
    limits.check(s)?;
    if let Some(&e) = fix.iter().find(|&&e| e >= s.size()) {
        return Err(StructureError::UnknownElement(e));
    }
    let a = Compiled::new(s);
    let mut colours = a.base.clone();
    for &e in fix {
        colours[e] = combine(FIX, e as u64);
    }
    refine_one(&a, &mut colours);
    let mut levels: Vec<Vec<u64>> = Vec::new();
    let mut base = Vec::new();
    while let Some(cell) = choose_cell(&colours) {
        let v = (0..a.n).find(|&v| colours[v] == cell).expect("cell member");
        levels.push(colours.clone());
        base.push(v);
        colours[v] = combine(cell, combine(INDIV, base.len() as u64));
        refine_one(&a, &mut colours);
    }
    let n = a.n;
    let mut gens: Vec<Perm> = Vec::new();
    let mut basic_orbits = vec![Vec::new(); base.len()];
    for i in (0..base.len()).rev() {
        let col = &levels[i];
        let v = base[i];
        let cell: Vec<usize> = (0..n).filter(|&w| col[w] == col[v]).collect();
        let mark = combine(col[v], combine(INDIV, 1 << 40 | i as u64));
        let mut orbit = PermGroup::from_generators(n, &gens).orbit_of(v);
        for &w in &cell {
            if orbit.binary_search(&w).is_ok() {
                continue;
            }
            let (mut ca, mut cb) = (col.clone(), col.clone());
            ca[v] = mark;
            cb[w] = mark;
            if let Some(map) = search(&a, &a, ca, cb, 0) {
                gens.push(Perm(map));
                orbit = PermGroup::from_generators(n, &gens).orbit_of(v);
            }
        }
        basic_orbits[i] = orbit;
    }
    let group = PermGroup::from_generators(n, &gens);
    debug_assert_eq!(group.order(), basic_orbits.iter().map(|o| o.len() as u128).product::<u128>());
    debug_assert!(gens.iter().all(|g| s.is_automorphism(&g.0)));
    Ok(AutGroup { group, base, basic_orbits })
}

/// Definable closure: the points fixed by every automorphism fixing `base`.
pub fn dcl(s: &FiniteStructure, base: &BTreeSet<usize>, limits: SearchLimits) -> Result<BTreeSet<usize>> {
    let fix: Vec<usize> = base.iter().copied().collect();
    let g = automorphism_group(s, &fix, limits)?;
    Ok(g.fixed_points().into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finstruct::tests::directed_cycle;
    use crate::group::all_permutations;
    use proptest::prelude::*;

    fn pure_set(n: usize) -> FiniteStructure {
        let mut s = FiniteStructure::new();
        s.add_sort("P", n);
        s
    }

    fn linear_order(n: usize) -> FiniteStructure {
        let mut s = FiniteStructure::new();
        let v = s.add_sort("V", n);
        s.add_relation("lt", vec![v, v], (0..n).flat_map(|i| (i + 1..n).map(move |j| vec![i, j]))).unwrap();
        s
    }

    fn gf2_plane() -> FiniteStructure {
        let mut s = FiniteStructure::new();
        let v = s.add_sort("V", 4);
        s.add_function("add", vec![v, v], v, (0..4).flat_map(|x| (0..4).map(move |y| (vec![x, y], x ^ y)))).unwrap();
        s.add_constant("zero", 0).unwrap();
        s
    }

    /// Exhaustive oracle: every sort-preserving permutation that is an automorphism.
    fn brute_automorphisms(s: &FiniteStructure, fix: &[usize]) -> Vec<Vec<usize>> {
        all_permutations(s.size())
            .into_iter()
            .filter(|p| fix.iter().all(|&x| p[x] == x) && s.is_automorphism(p))
            .collect()
    }

    #[test]
    fn small_groups() {
        let limits = SearchLimits::default();
        assert_eq!(automorphism_group(&pure_set(3), &[], limits).unwrap().order(), 6);
        assert_eq!(automorphism_group(&directed_cycle(4), &[], limits).unwrap().order(), 4);
        assert_eq!(automorphism_group(&linear_order(5), &[], limits).unwrap().order(), 1);
        assert_eq!(automorphism_group(&pure_set(8), &[], limits).unwrap().order(), 40320);
    }

    #[test]
    fn dcl_examples() {
        let limits = SearchLimits::default();
        assert_eq!(dcl(&pure_set(3), &BTreeSet::from([0]), limits).unwrap(), BTreeSet::from([0]));
        assert_eq!(dcl(&gf2_plane(), &BTreeSet::from([1, 2]), limits).unwrap(), (0..4).collect());
        assert_eq!(dcl(&directed_cycle(4), &BTreeSet::from([2]), limits).unwrap(), (0..4).collect());
        // the zero vector is always named
        assert_eq!(dcl(&gf2_plane(), &BTreeSet::new(), limits).unwrap(), BTreeSet::from([0]));
    }

    #[test]
    fn size_limit() {
        let err = automorphism_group(&pure_set(65), &[], SearchLimits::default()).unwrap_err();
        assert_eq!(err, StructureError::SizeLimitExceeded { size: 65, limit: 64 });
    }

    #[test]
    fn iso_over_pins() {
        let s = directed_cycle(5);
        let limits = SearchLimits::default();
        let all: Vec<usize> = (0..5).collect();
        assert_eq!(iso_over(&s, &s, &all, limits).unwrap(), Some(all.clone()));
        assert_eq!(iso_extending(&s, &s, &[(0, 3)], limits).unwrap(), Some(vec![3, 4, 0, 1, 2]));
        assert_eq!(iso_extending(&s, &s, &[(0, 3), (1, 0)], limits).unwrap(), None);
        assert!(iso_over(&directed_cycle(4), &pure_set(4), &[], limits).unwrap().is_none());
    }

    #[test]
    fn exactness_of_restriction() {
        // two disjoint directed 3-cycles linked by a matching relation;
        // restricting to the first cycle, the kernel is the stabilizer of it
        let mut s = FiniteStructure::new();
        let a = s.add_sort("A", 3);
        let b = s.add_sort("B", 6);
        s.add_relation("E", vec![a, a], (0..3).map(|i| vec![i, (i + 1) % 3])).unwrap();
        s.add_relation("over", vec![b, a], (0..6).map(|j| vec![3 + j, j % 3])).unwrap();
        let limits = SearchLimits::default();
        let g = automorphism_group(&s, &[], limits).unwrap();
        let m: Vec<usize> = (0..3).collect();
        let image = g.restricted_order(&m);
        let kernel = automorphism_group(&s, &m, limits).unwrap();
        assert_eq!(image, 3);
        assert_eq!(kernel.order(), 8);
        assert_eq!(g.order(), image * kernel.order());
        for k in kernel.generators() {
            assert!(g.group.contains(k));
        }
    }

    fn arb_structure() -> impl Strategy<Value = FiniteStructure> {
        (2usize..6, proptest::collection::vec((0usize..6, 0usize..6), 0..10), proptest::collection::vec(0usize..6, 0..3))
            .prop_map(|(n, edges, marked)| {
                let mut s = FiniteStructure::new();
                let v = s.add_sort("V", n);
                s.add_relation("E", vec![v, v], edges.into_iter().map(|(x, y)| vec![x % n, y % n])).unwrap();
                s.add_relation("U", vec![v], marked.into_iter().map(|x| vec![x % n])).unwrap();
                s
            })
    }

    proptest! {
        #[test]
        fn group_matches_brute_force(s in arb_structure(), fix_first in any::<bool>()) {
            let fix: Vec<usize> = if fix_first { vec![0] } else { vec![] };
            let g = automorphism_group(&s, &fix, SearchLimits::default()).unwrap();
            let brute = brute_automorphisms(&s, &fix);
            prop_assert_eq!(g.order() as usize, brute.len());
            let elems: Vec<Vec<usize>> = g.elements(1000).into_iter().map(|p| p.0).collect();
            let mut brute_sorted = brute.clone();
            brute_sorted.sort();
            prop_assert_eq!(elems, brute_sorted);
        }

        #[test]
        fn dcl_is_a_closure(s in arb_structure(), seed in proptest::collection::btree_set(0usize..2, 0..2)) {
            let limits = SearchLimits::default();
            let d = dcl(&s, &seed, limits).unwrap();
            prop_assert!(d.is_superset(&seed));
            prop_assert_eq!(dcl(&s, &d, limits).unwrap(), d.clone());
            let bigger: BTreeSet<usize> = seed.iter().copied().chain([s.size() - 1]).collect();
            prop_assert!(dcl(&s, &bigger, limits).unwrap().is_superset(&d));
        }

        #[test]
        fn iso_search_matches_brute_force(s in arb_structure(), perm_seed in any::<u64>()) {
            // relabel s by a permutation and search both ways
            let n = s.size();
            let perms = all_permutations(n);
            let p = &perms[(perm_seed % perms.len() as u64) as usize];
            let mut t = FiniteStructure::new();
            let v = t.add_sort("V", n);
            for r in s.relations() {
                t.add_relation(&r.name, vec![v; r.sorts.len()], r.tuples.iter().map(|tu| tu.iter().map(|&x| p[x]).collect())).unwrap();
            }
            let found = iso_extending(&s, &t, &[], SearchLimits::default()).unwrap();
            prop_assert!(found.is_some());
            prop_assert!(s.is_isomorphism(&t, &found.unwrap()));
            let pinned = iso_extending(&s, &t, &[(0, p[0])], SearchLimits::default()).unwrap();
            prop_assert!(pinned.is_some());
        }
    }
}
