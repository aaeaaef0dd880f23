//! Solving partial problems given on the faces of size `< n`.
//!
//! For the last index `t`, every face of size `n` through `t` is solved as an
//! `n`-dimensional problem; the faces through `t` then form a problem of one
//! dimension less over the face of `t`, which is solved the same way. Faces
//! avoiding `t` are read off as closures in the final top.

use std::collections::{BTreeMap, BTreeSet};

use super::{full, is_subset, singletons, solve, subset_list, AmalgamError, AmalgamationProblem, Result, Solution};
use crate::finstruct::{FiniteStructure, SearchLimits};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepupSolution {
    pub top: FiniteStructure,
    /// Embedding of each given face into the top.
    pub maps: BTreeMap<u32, Vec<usize>>,
    /// The closed image of every subset of indices, including the new faces.
    pub closed: BTreeMap<u32, Vec<usize>>,
}

/// The faces of `p` of size `< n`, as a partial problem of the same dimension.
pub fn stepup_problem(p: &AmalgamationProblem, n: usize) -> Result<AmalgamationProblem> {
    let faces = p.faces().iter().filter(|(u, _)| (u.count_ones() as usize) < n).map(|(&u, s)| (u, s.clone())).collect();
    let given = p
        .embeddings
        .iter()
        .filter(|(&(u, v), _)| u != v && (v.count_ones() as usize) < n)
        .map(|(&k, m)| (k, m.clone()))
        .collect();
    AmalgamationProblem::new(p.n, p.theory.clone(), faces, given)
}

/// Extends a partial problem on the faces of size `< n` to a solution over
/// all of `{1..partial.n}`.
pub fn stepup_solve(partial: &AmalgamationProblem, n: usize, limits: SearchLimits) -> Result<StepupSolution> {
    let m = partial.n;
    if n < 2 || n > m {
        return Err(AmalgamError::DimensionMismatch { expected: n, found: m });
    }
    for u in 0..full(m) {
        let wanted = (u.count_ones() as usize) < n;
        if wanted != partial.faces().contains_key(&u) {
            return Err(AmalgamError::Malformed(format!(
                "partial data must have exactly the faces of size < {n}; {:?} disagrees",
                subset_list(u)
            )));
        }
    }
    partial.validate_present()?;
    let sol = fill(partial, n, &[], limits)?;
    let theory = partial.theory.plugin();
    let mut closed = BTreeMap::new();
    for s in 0..=full(m) {
        let mut seed: BTreeSet<usize> = sol.image(0);
        for i in singletons(s) {
            seed.extend(sol.image(i));
        }
        closed.insert(s, theory.closure(&sol.top, &seed).into_iter().collect());
    }
    Ok(StepupSolution { top: sol.top, maps: sol.maps, closed })
}

/// Renumbers the members of `mask` as `0..|mask|`.
fn compress(mask: u32, u: u32) -> u32 {
    let members = (0..32).filter(|i| mask >> i & 1 == 1);
    members.enumerate().filter(|&(_, b)| u >> b & 1 == 1).map(|(i, _)| 1u32 << i).sum()
}

/// Solves `q`, whose faces are those of size `< n`; `over` lists the indices
/// (1-based) already absorbed into the base, for error reports.
fn fill(q: &AmalgamationProblem, n: usize, over: &[usize], limits: SearchLimits) -> Result<Solution> {
    let m = q.n;
    let failed = |mask: u32, problem: AmalgamationProblem| {
        let mut subset = subset_list(mask);
        subset.extend(over);
        AmalgamError::StepFailed { subset, problem: Box::new(problem) }
    };
    if m == n {
        let set = solve(q, limits)?;
        return set.solutions.into_iter().next().ok_or_else(|| failed(q.top(), q.clone()));
    }
    let t = 1u32 << (m - 1);
    let mut faces = q.faces().clone();
    let mut given: BTreeMap<(u32, u32), Vec<usize>> =
        q.embeddings.iter().filter(|(&(u, v), _)| u != v).map(|(&k, e)| (k, e.clone())).collect();
    for u in (0..full(m)).filter(|&u| u & t != 0 && u.count_ones() as usize == n) {
        let sub = q.restrict(u)?;
        let set = solve(&sub, limits)?;
        let sol = set.solutions.into_iter().next().ok_or_else(|| failed(u, sub))?;
        for v in (0..u).filter(|&v| is_subset(v, u) && (u & !v).count_ones() == 1) {
            given.insert((v, u), sol.maps[&compress(u, v)].clone());
        }
        faces.insert(u, sol.top);
    }
    let filled = AmalgamationProblem::new(m, q.theory.clone(), faces, given)?;
    let link_faces = (0..t).filter(|&u| (u.count_ones() as usize) < n).map(|u| (u, filled.faces[&(u | t)].clone())).collect();
    let link_given = filled
        .embeddings
        .iter()
        .filter(|(&(u, v), _)| u != v && u & t != 0 && v & t != 0)
        .map(|(&(u, v), e)| ((u & !t, v & !t), e.clone()))
        .collect();
    let link = AmalgamationProblem::new(m - 1, q.theory.clone(), link_faces, link_given)?;
    let mut deeper = over.to_vec();
    deeper.insert(0, m);
    let inner = fill(&link, n, &deeper, limits)?;
    let mut maps = BTreeMap::new();
    for &u in q.faces().keys() {
        let map = if u & t != 0 {
            inner.maps[&(u & !t)].clone()
        } else {
            let outer = &inner.maps[&u];
            filled.embeddings[&(u, u | t)].iter().map(|&x| outer[x]).collect()
        };
        maps.insert(u, map);
    }
    Ok(Solution { top: inner.top, maps })
}
