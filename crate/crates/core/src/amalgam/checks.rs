//! Existence and uniqueness reports, the three-dimensional uniqueness
//! criteria, twisting by boundary automorphisms, and equivariant solutions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{
    is_subset, proper_subsets, solve, subset_list, subset_mask, AmalgamError, AmalgamationProblem, RawProblem,
    RawSolution, Result, Solution, TheoryKind,
};
use crate::finstruct::{automorphism_group, dcl, iso_extending, FiniteStructure, SearchLimits};
use crate::group::Perm;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub problem: RawProblem,
    pub solutions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Witnesses {
    pub existence: Option<Witness>,
    pub uniqueness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NPropertyReport {
    pub theory: TheoryKind,
    pub n: usize,
    pub bound: usize,
    pub instances: usize,
    /// Solution count of each generated instance, in generation order.
    pub counts: Vec<usize>,
    pub existence: bool,
    pub uniqueness: bool,
    pub witness: Witnesses,
}

/// Solves every generated instance of dimension `n` within `bound`.
pub fn check_n_property(theory: &TheoryKind, n: usize, bound: usize, limits: SearchLimits) -> Result<NPropertyReport> {
    let problems = theory.plugin().instances(n, bound)?;
    if problems.is_empty() {
        return Err(AmalgamError::SpecOutOfBounds(format!("no generated instance of dimension {n} within {bound}")));
    }
    let mut counts = Vec::new();
    let mut witness = Witnesses::default();
    for p in &problems {
        let count = solve(p, limits)?.count();
        counts.push(count);
        if count == 0 && witness.existence.is_none() {
            witness.existence = Some(Witness { problem: p.to_raw(), solutions: count });
        }
        if count > 1 && witness.uniqueness.is_none() {
            witness.uniqueness = Some(Witness { problem: p.to_raw(), solutions: count });
        }
    }
    Ok(NPropertyReport {
        theory: theory.clone(),
        n,
        bound,
        instances: problems.len(),
        existence: witness.existence.is_none(),
        uniqueness: witness.uniqueness.is_none(),
        counts,
        witness,
    })
}

fn sorted(s: &BTreeSet<usize>) -> Vec<usize> {
    s.iter().copied().collect()
}

/// Images under `map` of the embeddings into face `u` from its proper subfaces.
fn boundary_in_face(p: &AmalgamationProblem, u: u32) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for v in proper_subsets(u) {
        if let Some(e) = p.embedding(v, u) {
            out.extend(e);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeUlReport {
    /// `a(12) ∩ dcl(a(13) ∪ a(23))`, in the top.
    pub intersection: Vec<usize>,
    /// `dcl(a(1) ∪ a(2))` computed in the face over `{1,2}`, mapped to the top.
    pub boundary_dcl: Vec<usize>,
    pub condition1: bool,
    /// An element of `a(12)` whose orbit over `a(1) ∪ a(2)` is larger than
    /// its orbit over `a(13) ∪ a(23)`.
    pub orbit_witness: Option<usize>,
    pub condition2: bool,
    pub agree: bool,
}

/// Both uniqueness criteria for a solved three-dimensional problem.
pub fn check_3ul(p: &AmalgamationProblem, sol: &Solution, limits: SearchLimits) -> Result<ThreeUlReport> {
    if p.n != 3 {
        return Err(AmalgamError::DimensionMismatch { expected: 3, found: p.n });
    }
    let (f1, f2, f12, f13, f23) = (0b001, 0b010, 0b011, 0b101, 0b110);
    let a12 = sol.image(f12);
    let sides: BTreeSet<usize> = sol.image(f13).union(&sol.image(f23)).copied().collect();
    let points: BTreeSet<usize> = sol.image(f1).union(&sol.image(f2)).copied().chain(sol.image(0)).collect();
    let intersection: BTreeSet<usize> = dcl(&sol.top, &sides, limits)?.intersection(&a12).copied().collect();
    let face = p.face(f12).ok_or(AmalgamError::MissingFace { subset: vec![1, 2] })?;
    let inner = dcl(face, &boundary_in_face(p, f12), limits)?;
    let boundary_dcl: BTreeSet<usize> = inner.iter().map(|&x| sol.maps[&f12][x]).collect();
    let condition1 = intersection == boundary_dcl;

    let over_points = automorphism_group(&sol.top, &sorted(&points), limits)?;
    let over_sides = automorphism_group(&sol.top, &sorted(&sides), limits)?;
    let orbit_witness = a12.iter().copied().find(|&c| over_points.group.orbit_of(c) != over_sides.group.orbit_of(c));
    let condition2 = orbit_witness.is_none();
    Ok(ThreeUlReport {
        intersection: sorted(&intersection),
        boundary_dcl: sorted(&boundary_dcl),
        condition1,
        orbit_witness,
        condition2,
        agree: condition1 == condition2,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuReport {
    pub face: Vec<usize>,
    /// `a(u₀) ∩ dcl(a(≱u₀)) = dcl(a(<u₀))`.
    pub dcl_condition: bool,
    /// Order of `Aut(top / a(≱u₀))` acting on `a(u₀)`.
    pub restricted_order: u128,
    /// Order of `Aut(a(u₀) / a(<u₀))`.
    pub boundary_order: u128,
    pub surjective: bool,
    pub agree: bool,
}

/// Compares the definable-closure condition at a maximal face with
/// surjectivity of restricting top automorphisms to that face.
pub fn check_su(p: &AmalgamationProblem, sol: &Solution, u0: u32, limits: SearchLimits) -> Result<SuReport> {
    if !p.maximal_faces().contains(&u0) {
        return Err(AmalgamError::NotMaximal { subset: subset_list(u0) });
    }
    let a = sol.image(u0);
    let mut rest = BTreeSet::new();
    for v in proper_subsets(p.top()).filter(|&v| !is_subset(u0, v)) {
        rest.extend(sol.image(v));
    }
    let face = p.face(u0).ok_or(AmalgamError::MissingFace { subset: subset_list(u0) })?;
    let boundary = boundary_in_face(p, u0);
    let lhs: BTreeSet<usize> = dcl(&sol.top, &rest, limits)?.intersection(&a).copied().collect();
    let rhs: BTreeSet<usize> = dcl(face, &boundary, limits)?.iter().map(|&x| sol.maps[&u0][x]).collect();
    let g = automorphism_group(&sol.top, &sorted(&rest), limits)?;
    if g.generators().iter().any(|s| a.iter().any(|&x| !a.contains(&s.apply(x)))) {
        return Err(AmalgamError::Malformed("face is not invariant over the other faces".into()));
    }
    let restricted_order = g.restricted_order(&sorted(&a));
    let boundary_order = automorphism_group(face, &sorted(&boundary), limits)?.order();
    let dcl_condition = lhs == rhs;
    let surjective = restricted_order == boundary_order;
    Ok(SuReport { face: subset_list(u0), dcl_condition, restricted_order, boundary_order, surjective, agree: dcl_condition == surjective })
}

/// The solution with the embedding of maximal face `u0` precomposed with `sigma`.
pub fn twist_solution(p: &AmalgamationProblem, sol: &Solution, u0: u32, sigma: &[usize]) -> Result<Solution> {
    if !p.maximal_faces().contains(&u0) {
        return Err(AmalgamError::NotMaximal { subset: subset_list(u0) });
    }
    let face = p.face(u0).ok_or(AmalgamError::MissingFace { subset: subset_list(u0) })?;
    if sigma.len() != face.size() || !face.is_automorphism(sigma) || boundary_in_face(p, u0).iter().any(|&x| sigma[x] != x) {
        return Err(AmalgamError::NotBoundaryFixing { subset: subset_list(u0) });
    }
    let mut out = sol.clone();
    let m = &sol.maps[&u0];
    out.maps.insert(u0, sigma.iter().map(|&x| m[x]).collect());
    Ok(out)
}

/// A problem with an automorphism of every face, commuting with the embeddings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomorphicProblem {
    pub problem: AmalgamationProblem,
    pub family: BTreeMap<u32, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFaceMap {
    pub subset: Vec<usize>,
    pub map: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAutomorphicProblem {
    pub problem: RawProblem,
    pub family: Vec<RawFaceMap>,
}

impl AutomorphicProblem {
    pub fn new(problem: AmalgamationProblem, family: BTreeMap<u32, Vec<usize>>) -> Result<Self> {
        let ap = AutomorphicProblem { problem, family };
        ap.validate()?;
        Ok(ap)
    }

    fn validate(&self) -> Result<()> {
        let p = &self.problem;
        for (&u, s) in p.faces() {
            let sigma = self.family.get(&u).ok_or(AmalgamError::MissingFace { subset: subset_list(u) })?;
            if sigma.len() != s.size() || !s.is_automorphism(sigma) {
                return Err(AmalgamError::IncompatibleFamily { from: subset_list(u), to: subset_list(u) });
            }
        }
        for (&u, _) in p.faces() {
            for (&v, _) in p.faces() {
                if u == v || !is_subset(u, v) {
                    continue;
                }
                let e = p.embedding(u, v).expect("embedding between faces");
                if e.iter().enumerate().any(|(x, &y)| self.family[&v][y] != e[self.family[&u][x]]) {
                    return Err(AmalgamError::IncompatibleFamily { from: subset_list(u), to: subset_list(v) });
                }
            }
        }
        Ok(())
    }

    pub fn from_raw(raw: &RawAutomorphicProblem) -> Result<Self> {
        let problem = AmalgamationProblem::from_raw(&raw.problem)?;
        let mut family = BTreeMap::new();
        for f in &raw.family {
            family.insert(subset_mask(&f.subset)?, f.map.clone());
        }
        AutomorphicProblem::new(problem, family)
    }

    pub fn to_raw(&self) -> RawAutomorphicProblem {
        RawAutomorphicProblem {
            problem: self.problem.to_raw(),
            family: self.family.iter().map(|(&u, m)| RawFaceMap { subset: subset_list(u), map: m.clone() }).collect(),
        }
    }

    /// The family that is the identity everywhere.
    pub fn identity(problem: AmalgamationProblem) -> Self {
        let family = problem.faces().iter().map(|(&u, s)| (u, (0..s.size()).collect())).collect();
        AutomorphicProblem { problem, family }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomorphicSolution {
    pub solution: Solution,
    /// Automorphism of the top restricting to each face automorphism.
    pub sigma: Vec<usize>,
    /// Index of the solution (in `solve` order) that carries `sigma`.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAutomorphicSolution {
    pub solution: RawSolution,
    pub sigma: Vec<usize>,
    pub index: usize,
}

impl AutomorphicSolution {
    pub fn to_raw(&self, n: usize) -> RawAutomorphicSolution {
        RawAutomorphicSolution { solution: self.solution.to_raw(n), sigma: self.sigma.clone(), index: self.index }
    }
}

/// Looks for a solution `f` and an automorphism `σ` of its top with
/// `σ ∘ f_u = f_u ∘ σ_u` for every face.
pub fn solve_with_automorphism(ap: &AutomorphicProblem, limits: SearchLimits) -> Result<AutomorphicSolution> {
    let set = solve(&ap.problem, limits)?;
    if set.solutions.is_empty() {
        return Err(AmalgamError::NoBaseSolution);
    }
    for (index, sol) in set.solutions.iter().enumerate() {
        let mut pins = Vec::new();
        for (u, f) in &sol.maps {
            let sigma = &ap.family[u];
            pins.extend((0..f.len()).map(|x| (f[x], f[sigma[x]])));
        }
        if let Some(sigma) = iso_extending(&sol.top, &sol.top, &pins, limits)? {
            return Ok(AutomorphicSolution { solution: sol.clone(), sigma, index });
        }
    }
    Err(AmalgamError::NoEquivariantExtension { solutions: set.solutions.len() })
}

/// Every compatible automorphism family, chosen on the maximal faces and
/// restricted to the smaller ones; at most `max` are returned.
pub fn compatible_families(p: &AmalgamationProblem, max: usize, limits: SearchLimits) -> Result<Vec<BTreeMap<u32, Vec<usize>>>> {
    let tops = p.maximal_faces();
    let mut elements: Vec<Vec<Perm>> = Vec::new();
    for &u in &tops {
        let face = p.face(u).ok_or(AmalgamError::MissingFace { subset: subset_list(u) })?;
        let g = automorphism_group(face, &[], limits)?;
        if g.order() > 5040 {
            return Err(AmalgamError::SpecOutOfBounds(format!("face {:?} has {} automorphisms", subset_list(u), g.order())));
        }
        elements.push(g.elements(5040));
    }
    let mut out = Vec::new();
    let mut assigned: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    extend_family(p, &tops, &elements, 0, &mut assigned, &mut out, max);
    Ok(out)
}

/// The restriction of `sigma` on face `u` to subface `v`, if `sigma`
/// preserves its image.
fn restrict_to(p: &AmalgamationProblem, u: u32, v: u32, sigma: &[usize]) -> Option<Vec<usize>> {
    let e = p.embedding(v, u)?;
    let back: BTreeMap<usize, usize> = e.iter().enumerate().map(|(x, &y)| (y, x)).collect();
    e.iter().map(|&y| back.get(&sigma[y]).copied()).collect()
}

fn extend_family(
    p: &AmalgamationProblem,
    tops: &[u32],
    elements: &[Vec<Perm>],
    k: usize,
    assigned: &mut BTreeMap<u32, Vec<usize>>,
    out: &mut Vec<BTreeMap<u32, Vec<usize>>>,
    max: usize,
) {
    if out.len() >= max {
        return;
    }
    if k == tops.len() {
        out.push(assigned.clone());
        return;
    }
    let u = tops[k];
    'candidates: for sigma in &elements[k] {
        let mut added = Vec::new();
        for v in proper_subsets(u) {
            match restrict_to(p, u, v, &sigma.0) {
                Some(r) => match assigned.get(&v) {
                    Some(existing) if *existing != r => {
                        for a in added {
                            assigned.remove(&a);
                        }
                        continue 'candidates;
                    }
                    Some(_) => {}
                    None => {
                        assigned.insert(v, r);
                        added.push(v);
                    }
                },
                None => {
                    for a in added {
                        assigned.remove(&a);
                    }
                    continue 'candidates;
                }
            }
        }
        assigned.insert(u, sigma.0.clone());
        extend_family(p, tops, elements, k + 1, assigned, out, max);
        assigned.remove(&u);
        for a in added {
            assigned.remove(&a);
        }
        if out.len() >= max {
            return;
        }
    }
}

/// The maximal faces and their automorphisms fixing the boundary, for twisting.
pub fn boundary_automorphisms(p: &AmalgamationProblem, u0: u32, limits: SearchLimits) -> Result<Vec<Perm>> {
    let face: &FiniteStructure = p.face(u0).ok_or(AmalgamError::MissingFace { subset: subset_list(u0) })?;
    let fix = sorted(&boundary_in_face(p, u0));
    Ok(automorphism_group(face, &fix, limits)?.elements(5040))
}
