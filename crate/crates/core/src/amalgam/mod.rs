//! Amalgamation problems over the poset of proper subsets of `{1..N}`.
//!
//! Subsets are bitmasks: index `i` (0-based) is bit `i`. Serialized forms
//! use sorted 1-based lists. A problem stores an embedding for every pair
//! `u ⊊ v` of faces; the serialized form needs only those with
//! `|v| = |u| + 1` and the rest are composed.

mod checks;
mod stepup;
mod theory;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finstruct::{iso_extending, FiniteStructure, RawStructure, SearchLimits, StructureBuilder, StructureError};

pub use checks::{
    boundary_automorphisms, check_3ul, check_n_property, check_su, compatible_families, solve_with_automorphism, twist_solution,
    AutomorphicProblem, AutomorphicSolution, NPropertyReport, RawAutomorphicProblem, RawAutomorphicSolution, RawFaceMap, SuReport,
    ThreeUlReport, Witness, Witnesses,
};
pub use stepup::{stepup_problem, stepup_solve, StepupSolution};
pub use theory::{generate_instance, InstanceSpec, Parity, PureSet, Theory, TheoryKind, VectorSpace};

/// Largest dimension accepted by the generators.
pub const MAX_DIMENSION: usize = 5;
/// Largest proper face produced by the generators.
pub const MAX_FACE_SIZE: usize = 16;

#[derive(Debug, Clone, Error)]
pub enum AmalgamError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("face {subset:?} is missing")]
    MissingFace { subset: Vec<usize> },
    #[error("face {subset:?} is not an instance of the theory: {reason}")]
    NotAnInstance { subset: Vec<usize>, reason: String },
    #[error("embeddings {from:?} → {to:?}: {reason}")]
    Functoriality { from: Vec<usize>, to: Vec<usize>, reason: String },
    #[error("face {subset:?} is not the closure of its singleton faces")]
    Closure { subset: Vec<usize> },
    #[error("faces {left:?} and {right:?} are not independent inside {within:?}")]
    Independence { left: Vec<usize>, right: Vec<usize>, within: Vec<usize> },
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("face {subset:?} is not a maximal proper face")]
    NotMaximal { subset: Vec<usize> },
    #[error("σ does not fix the boundary of face {subset:?}")]
    NotBoundaryFixing { subset: Vec<usize> },
    #[error("automorphism family is not compatible at {from:?} → {to:?}")]
    IncompatibleFamily { from: Vec<usize>, to: Vec<usize> },
    #[error("the underlying problem has no solution")]
    NoBaseSolution,
    #[error("none of the {solutions} solutions carries an automorphism extending the family")]
    NoEquivariantExtension { solutions: usize },
    #[error("no solution for the sub-problem on {subset:?}")]
    StepFailed { subset: Vec<usize>, problem: Box<AmalgamationProblem> },
    #[error("instance spec out of bounds: {0}")]
    SpecOutOfBounds(String),
    #[error("malformed problem: {0}")]
    Malformed(String),
}

impl AmalgamError {
    pub fn kind(&self) -> &'static str {
        match self {
            AmalgamError::Structure(e) => e.kind(),
            AmalgamError::MissingFace { .. } => "MissingFace",
            AmalgamError::NotAnInstance { .. } => "NotAnInstance",
            AmalgamError::Functoriality { .. } => "FunctorialityError",
            AmalgamError::Closure { .. } => "ClosureError",
            AmalgamError::Independence { .. } => "IndependenceError",
            AmalgamError::DimensionMismatch { .. } => "DimensionMismatch",
            AmalgamError::NotMaximal { .. } => "NotMaximal",
            AmalgamError::NotBoundaryFixing { .. } => "NotBoundaryFixing",
            AmalgamError::IncompatibleFamily { .. } => "IncompatibleFamily",
            AmalgamError::NoBaseSolution => "NoBaseSolution",
            AmalgamError::NoEquivariantExtension { .. } => "NoEquivariantExtension",
            AmalgamError::StepFailed { .. } => "StepFailed",
            AmalgamError::SpecOutOfBounds(_) => "SpecOutOfBounds",
            AmalgamError::Malformed(_) => "Malformed",
        }
    }
}

pub type Result<T> = std::result::Result<T, AmalgamError>;

/// 1-based sorted members of a mask.
pub fn subset_list(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

pub fn subset_mask(list: &[usize]) -> Result<u32> {
    let mut mask = 0u32;
    for &i in list {
        if i == 0 || i > 31 {
            return Err(AmalgamError::Malformed(format!("index {i} out of range")));
        }
        mask |= 1 << (i - 1);
    }
    Ok(mask)
}

fn full(n: usize) -> u32 {
    (1u32 << n) - 1
}

fn is_subset(u: u32, v: u32) -> bool {
    u & !v == 0
}

/// Proper subsets of `mask`, in increasing numeric order.
fn proper_subsets(mask: u32) -> impl Iterator<Item = u32> {
    (0..=mask).filter(move |&u| u != mask && is_subset(u, mask))
}

fn singletons(mask: u32) -> impl Iterator<Item = u32> {
    (0..32).map(|i| 1u32 << i).filter(move |b| mask & b != 0)
}

fn image(map: &[usize]) -> BTreeSet<usize> {
    map.iter().copied().collect()
}

/// Checks that `map` embeds `a` into `b` as an induced substructure.
fn embedding_failure(a: &FiniteStructure, b: &FiniteStructure, map: &[usize]) -> Option<String> {
    if map.len() != a.size() {
        return Some(format!("map has {} entries for {} elements", map.len(), a.size()));
    }
    if a.sorts().iter().map(|s| &s.name).ne(b.sorts().iter().map(|s| &s.name)) {
        return Some("sorts differ".into());
    }
    let mut seen = BTreeSet::new();
    for (x, &y) in map.iter().enumerate() {
        if y >= b.size() {
            return Some(format!("image {y} outside the target"));
        }
        if a.sort_of(x) != b.sort_of(y) {
            return Some(format!("element {x} changes sort"));
        }
        if !seen.insert(y) {
            return Some(format!("not injective at {y}"));
        }
    }
    if a.relations().len() != b.relations().len() || !a.functions().is_empty() || !b.functions().is_empty() {
        return Some("signatures differ or use function symbols".into());
    }
    let back: BTreeMap<usize, usize> = map.iter().enumerate().map(|(x, &y)| (y, x)).collect();
    for (ra, rb) in a.relations().iter().zip(b.relations()) {
        if ra.name != rb.name {
            return Some(format!("relation {} against {}", ra.name, rb.name));
        }
        let forward = ra.tuples.len();
        let mut inside = 0;
        for t in &ra.tuples {
            if !rb.tuples.contains(&t.iter().map(|&x| map[x]).collect::<Vec<_>>()) {
                return Some(format!("{} tuple {t:?} is not preserved", ra.name));
            }
        }
        for t in &rb.tuples {
            if t.iter().all(|y| back.contains_key(y)) {
                inside += 1;
            }
        }
        if inside != forward {
            return Some(format!("{} gains tuples on the image", ra.name));
        }
    }
    None
}

/// A functor from the proper subsets of `{1..n}` (or a down-closed part of
/// them) to finite structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmalgamationProblem {
    pub n: usize,
    pub theory: TheoryKind,
    faces: BTreeMap<u32, FiniteStructure>,
    embeddings: BTreeMap<(u32, u32), Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFace {
    pub subset: Vec<usize>,
    pub structure: RawStructure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEmbedding {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub map: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawProblem {
    pub dimension: usize,
    pub theory: TheoryKind,
    pub faces: Vec<RawFace>,
    pub embeddings: Vec<RawEmbedding>,
}

impl AmalgamationProblem {
    /// Builds a problem from faces and embeddings along covering pairs (any
    /// further pairs are checked against the composites).
    pub fn new(
        n: usize,
        theory: TheoryKind,
        faces: BTreeMap<u32, FiniteStructure>,
        given: BTreeMap<(u32, u32), Vec<usize>>,
    ) -> Result<Self> {
        if n == 0 || n > 31 {
            return Err(AmalgamError::Malformed(format!("dimension {n}")));
        }
        for &u in faces.keys() {
            if !is_subset(u, full(n)) || u == full(n) {
                return Err(AmalgamError::Malformed(format!("{:?} is not a proper subset", subset_list(u))));
            }
        }
        for &(u, v) in given.keys() {
            if !faces.contains_key(&u) || !faces.contains_key(&v) || !is_subset(u, v) || u == v {
                return Err(AmalgamError::Functoriality {
                    from: subset_list(u),
                    to: subset_list(v),
                    reason: "embedding between absent or incomparable faces".into(),
                });
            }
        }
        let mut problem = AmalgamationProblem { n, theory, faces, embeddings: BTreeMap::new() };
        let keys: Vec<u32> = problem.faces.keys().copied().collect();
        for &v in &keys {
            problem.embeddings.insert((v, v), (0..problem.faces[&v].size()).collect());
        }
        // fill pairs in order of increasing gap, composing through the
        // covering pair that adds the least new index
        let mut pairs: Vec<(u32, u32)> =
            keys.iter().flat_map(|&u| keys.iter().map(move |&v| (u, v))).filter(|&(u, v)| u != v && is_subset(u, v)).collect();
        pairs.sort_by_key(|&(u, v)| ((v & !u).count_ones(), u, v));
        for (u, v) in pairs {
            let gap = v & !u;
            let map = if gap.count_ones() == 1 {
                given.get(&(u, v)).cloned().ok_or_else(|| AmalgamError::Functoriality {
                    from: subset_list(u),
                    to: subset_list(v),
                    reason: "missing covering embedding".into(),
                })?
            } else {
                let w = u | (gap & gap.wrapping_neg());
                let (first, second) = match (problem.embeddings.get(&(u, w)), problem.embeddings.get(&(w, v))) {
                    (Some(a), Some(b)) => (a, b),
                    _ => continue, // the intermediate face is absent
                };
                let composed: Vec<usize> = first.iter().map(|&x| second[x]).collect();
                if let Some(direct) = given.get(&(u, v)) {
                    if *direct != composed {
                        return Err(AmalgamError::Functoriality {
                            from: subset_list(u),
                            to: subset_list(v),
                            reason: "given embedding differs from the composite".into(),
                        });
                    }
                }
                composed
            };
            problem.embeddings.insert((u, v), map);
        }
        Ok(problem)
    }

    pub fn from_raw(raw: &RawProblem) -> Result<Self> {
        let mut faces = BTreeMap::new();
        for f in &raw.faces {
            let mask = subset_mask(&f.subset)?;
            if faces.insert(mask, FiniteStructure::from_raw(&f.structure)?).is_some() {
                return Err(AmalgamError::Malformed(format!("face {:?} given twice", f.subset)));
            }
        }
        let mut given = BTreeMap::new();
        for e in &raw.embeddings {
            given.insert((subset_mask(&e.from)?, subset_mask(&e.to)?), e.map.clone());
        }
        AmalgamationProblem::new(raw.dimension, raw.theory.clone(), faces, given)
    }

    pub fn to_raw(&self) -> RawProblem {
        RawProblem {
            dimension: self.n,
            theory: self.theory.clone(),
            faces: self.faces.iter().map(|(&u, s)| RawFace { subset: subset_list(u), structure: s.to_raw() }).collect(),
            embeddings: self
                .embeddings
                .iter()
                .filter(|((u, v), _)| (v & !u).count_ones() == 1)
                .map(|(&(u, v), m)| RawEmbedding { from: subset_list(u), to: subset_list(v), map: m.clone() })
                .collect(),
        }
    }

    pub fn face(&self, u: u32) -> Option<&FiniteStructure> {
        self.faces.get(&u)
    }

    pub fn faces(&self) -> &BTreeMap<u32, FiniteStructure> {
        &self.faces
    }

    /// The embedding `face(u) → face(v)`.
    pub fn embedding(&self, u: u32, v: u32) -> Option<&[usize]> {
        self.embeddings.get(&(u, v)).map(Vec::as_slice)
    }

    pub fn top(&self) -> u32 {
        full(self.n)
    }

    pub fn maximal_faces(&self) -> Vec<u32> {
        (0..self.n).rev().map(|i| self.top() & !(1 << i)).collect()
    }

    /// Checks that all proper faces are present, then every invariant.
    pub fn validate(&self) -> Result<()> {
        for u in proper_subsets(self.top()) {
            if !self.faces.contains_key(&u) {
                return Err(AmalgamError::MissingFace { subset: subset_list(u) });
            }
        }
        self.validate_present()
    }

    /// The invariants restricted to the faces present.
    pub fn validate_present(&self) -> Result<()> {
        let theory = self.theory.plugin();
        for (&u, s) in &self.faces {
            if let Some(reason) = theory.membership_failure(s) {
                return Err(AmalgamError::NotAnInstance { subset: subset_list(u), reason });
            }
        }
        for (&(u, v), map) in &self.embeddings {
            if let Some(reason) = embedding_failure(&self.faces[&u], &self.faces[&v], map) {
                return Err(AmalgamError::Functoriality { from: subset_list(u), to: subset_list(v), reason });
            }
        }
        for (&(u, v), m1) in &self.embeddings {
            for (&(v2, w), m2) in &self.embeddings {
                if v2 != v || u == v || v == w {
                    continue;
                }
                let direct = &self.embeddings[&(u, w)];
                if m1.iter().enumerate().any(|(x, &y)| m2[y] != direct[x]) {
                    return Err(AmalgamError::Functoriality {
                        from: subset_list(u),
                        to: subset_list(w),
                        reason: format!("composite through {:?} differs", subset_list(v)),
                    });
                }
            }
        }
        for (&u, s) in &self.faces {
            let mut seed = BTreeSet::new();
            for i in singletons(u).chain([0]) {
                if let Some(m) = self.embeddings.get(&(i, u)) {
                    seed.extend(m);
                }
            }
            if u.count_ones() >= 2 && theory.closure(s, &seed).len() != s.size() {
                return Err(AmalgamError::Closure { subset: subset_list(u) });
            }
        }
        for (&w, s) in &self.faces {
            let sub: Vec<u32> = self.faces.keys().copied().filter(|&u| u != w && is_subset(u, w)).collect();
            for (i, &a) in sub.iter().enumerate() {
                for &b in &sub[i + 1..] {
                    if is_subset(a, b) || is_subset(b, a) {
                        continue;
                    }
                    let Some(c) = self.embeddings.get(&(a & b, w)) else { continue };
                    let ia = image(&self.embeddings[&(a, w)]);
                    let ib = image(&self.embeddings[&(b, w)]);
                    if !theory.independent(s, &ia, &ib, &image(c)) {
                        return Err(AmalgamError::Independence { left: subset_list(a), right: subset_list(b), within: subset_list(w) });
                    }
                }
            }
        }
        Ok(())
    }

    /// The faces inside `mask`, renumbered so that the members of `mask` become
    /// `{1..|mask|}` in order.
    pub fn restrict(&self, mask: u32) -> Result<AmalgamationProblem> {
        let members: Vec<u32> = (0..32).filter(|i| mask >> i & 1 == 1).collect();
        let compress = |u: u32| -> u32 { members.iter().enumerate().filter(|(_, &b)| u >> b & 1 == 1).map(|(i, _)| 1 << i).sum() };
        let faces = self.faces.iter().filter(|(&u, _)| u != mask && is_subset(u, mask)).map(|(&u, s)| (compress(u), s.clone())).collect();
        let given = self
            .embeddings
            .iter()
            .filter(|(&(u, v), _)| u != v && v != mask && is_subset(v, mask))
            .map(|(&(u, v), m)| ((compress(u), compress(v)), m.clone()))
            .collect();
        AmalgamationProblem::new(members.len(), self.theory.clone(), faces, given)
    }

    /// The same problem with the indices permuted: index `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<AmalgamationProblem> {
        let move_mask = |u: u32| -> u32 { (0..self.n).filter(|&i| u >> i & 1 == 1).map(|i| 1u32 << perm[i]).sum() };
        let faces = self.faces.iter().map(|(&u, s)| (move_mask(u), s.clone())).collect();
        let given = self
            .embeddings
            .iter()
            .filter(|(&(u, v), _)| u != v)
            .map(|(&(u, v), m)| ((move_mask(u), move_mask(v)), m.clone()))
            .collect();
        AmalgamationProblem::new(self.n, self.theory.clone(), faces, given)
    }

    /// Largest face size.
    pub fn max_face_size(&self) -> usize {
        self.faces.values().map(FiniteStructure::size).max().unwrap_or(0)
    }
}

/// The colimit of the faces: each element of a face modulo the embeddings.
#[derive(Debug, Clone)]
pub struct Glued {
    pub union: FiniteStructure,
    /// Map from each face into the union.
    pub maps: BTreeMap<u32, Vec<usize>>,
    /// Whether every face embeds injectively.
    pub injective: bool,
}

pub fn glue(p: &AmalgamationProblem) -> Result<Glued> {
    let mut offsets = BTreeMap::new();
    let mut total = 0;
    for (&u, s) in &p.faces {
        offsets.insert(u, total);
        total += s.size();
    }
    let mut parent: Vec<usize> = (0..total).collect();
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
    for (&(u, v), map) in &p.embeddings {
        for (x, &y) in map.iter().enumerate() {
            let (a, b) = (find(&mut parent, offsets[&u] + x), find(&mut parent, offsets[&v] + y));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let template = p.faces.values().next().ok_or_else(|| AmalgamError::Malformed("no faces".into()))?;
    if !template.functions().is_empty() || !template.constants().is_empty() {
        return Err(AmalgamError::Malformed("gluing needs a purely relational signature".into()));
    }
    let mut b = StructureBuilder::like(template);
    let mut class_id: BTreeMap<usize, usize> = BTreeMap::new();
    let mut provisional: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (&u, s) in &p.faces {
        let mut m = Vec::with_capacity(s.size());
        for x in 0..s.size() {
            let root = find(&mut parent, offsets[&u] + x);
            let sort = s.sort_of(x).expect("element sort");
            let id = *class_id.entry(root).or_insert_with(|| b.add(sort));
            m.push(id);
        }
        provisional.insert(u, m);
    }
    let rel_ids: Vec<usize> = template.relations().iter().map(|r| b.relation(&r.name, &r.sorts)).collect();
    for (&u, s) in &p.faces {
        let m = &provisional[&u];
        for (r, &rid) in s.relations().iter().zip(&rel_ids) {
            for t in &r.tuples {
                b.insert(rid, t.iter().map(|&x| m[x]).collect());
            }
        }
    }
    let (union, new_id) = b.finish()?;
    let maps: BTreeMap<u32, Vec<usize>> =
        provisional.into_iter().map(|(u, m)| (u, m.into_iter().map(|x| new_id[x]).collect())).collect();
    let injective = maps.values().all(|m| image(m).len() == m.len());
    Ok(Glued { union, maps, injective })
}

/// A top structure with an embedding of every face.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub top: FiniteStructure,
    pub maps: BTreeMap<u32, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSolution {
    pub top: RawStructure,
    pub maps: Vec<RawEmbedding>,
}

impl Solution {
    pub fn to_raw(&self, n: usize) -> RawSolution {
        RawSolution {
            top: self.top.to_raw(),
            maps: self
                .maps
                .iter()
                .map(|(&u, m)| RawEmbedding { from: subset_list(u), to: subset_list(full(n)), map: m.clone() })
                .collect(),
        }
    }

    pub fn from_raw(raw: &RawSolution) -> Result<Self> {
        let mut maps = BTreeMap::new();
        for e in &raw.maps {
            maps.insert(subset_mask(&e.from)?, e.map.clone());
        }
        Ok(Solution { top: FiniteStructure::from_raw(&raw.top)?, maps })
    }

    /// Image of face `u` in the top.
    pub fn image(&self, u: u32) -> BTreeSet<usize> {
        self.maps.get(&u).map(|m| image(m)).unwrap_or_default()
    }

    fn union_of(&self, faces: impl Iterator<Item = u32>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for u in faces {
            out.extend(self.image(u));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SolutionSet {
    pub solutions: Vec<Solution>,
    /// Candidate tops proposed by the theory before filtering.
    pub candidates: usize,
}

impl SolutionSet {
    pub fn count(&self) -> usize {
        self.solutions.len()
    }
}

/// Checks that `sol` solves `p`: a legal top, closed over the faces, with
/// every face embedded compatibly and independently.
pub fn solution_failure(p: &AmalgamationProblem, sol: &Solution) -> Option<String> {
    let theory = p.theory.plugin();
    if let Some(reason) = theory.membership_failure(&sol.top) {
        return Some(format!("top is not an instance: {reason}"));
    }
    for (&u, s) in &p.faces {
        let Some(m) = sol.maps.get(&u) else { return Some(format!("no map for {:?}", subset_list(u))) };
        if let Some(reason) = embedding_failure(s, &sol.top, m) {
            return Some(format!("face {:?}: {reason}", subset_list(u)));
        }
    }
    for (&(u, v), e) in &p.embeddings {
        if e.iter().enumerate().any(|(x, &y)| sol.maps[&v][y] != sol.maps[&u][x]) {
            return Some(format!("maps do not commute on {:?} → {:?}", subset_list(u), subset_list(v)));
        }
    }
    let seed = sol.union_of(singletons(p.top()).chain([0]).filter(|u| p.faces.contains_key(u)));
    if theory.closure(&sol.top, &seed).len() != sol.top.size() {
        return Some("top is not the closure of the faces".into());
    }
    let keys: Vec<u32> = p.faces.keys().copied().collect();
    for (i, &a) in keys.iter().enumerate() {
        for &b in &keys[i + 1..] {
            if is_subset(a, b) || is_subset(b, a) || !p.faces.contains_key(&(a & b)) {
                continue;
            }
            if !theory.independent(&sol.top, &sol.image(a), &sol.image(b), &sol.image(a & b)) {
                return Some(format!("{:?} and {:?} are dependent in the top", subset_list(a), subset_list(b)));
            }
        }
    }
    None
}

/// Every solution up to isomorphism over the faces.
pub fn solve(p: &AmalgamationProblem, limits: SearchLimits) -> Result<SolutionSet> {
    let glued = glue(p)?;
    if !glued.injective {
        return Ok(SolutionSet { solutions: Vec::new(), candidates: 0 });
    }
    let theory = p.theory.plugin();
    let tops = theory.candidate_tops(&glued.union)?;
    let candidates = tops.len();
    let mut solutions: Vec<Solution> = Vec::new();
    for (top, iota) in tops {
        limits.check(&top)?;
        let maps = glued.maps.iter().map(|(&u, m)| (u, m.iter().map(|&x| iota[x]).collect())).collect();
        let sol = Solution { top, maps };
        if solution_failure(p, &sol).is_some() {
            continue;
        }
        let mut fresh = true;
        for other in &solutions {
            if solutions_isomorphic(other, &sol, limits)?.is_some() {
                fresh = false;
                break;
            }
        }
        if fresh {
            solutions.push(sol);
        }
    }
    Ok(SolutionSet { solutions, candidates })
}

/// An isomorphism `a.top → b.top` carrying each face map of `a` to that of `b`.
pub fn solutions_isomorphic(a: &Solution, b: &Solution, limits: SearchLimits) -> Result<Option<Vec<usize>>> {
    let mut pins = Vec::new();
    for (u, ma) in &a.maps {
        let Some(mb) = b.maps.get(u) else { return Ok(None) };
        pins.extend(ma.iter().copied().zip(mb.iter().copied()));
    }
    Ok(iso_extending(&a.top, &b.top, &pins, limits)?)
}
