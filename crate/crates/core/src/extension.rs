//! Canonical extension of a connected groupoid along a supergroup of one
//! vertex group, and groupoids twisted by central 2-cocycles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{FiniteGroup, GroupError, GroupTable};
use crate::groupoid::{ConcreteFunctor, FiniteGroupoid, GroupoidAutomorphism, GroupoidError, RawGroupoid};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("base groupoid is not connected (object {0} unreachable from the basepoint)")]
    NotConnected(u64),
    #[error("vertex group does not embed: {0}")]
    NotEmbedding(String),
    #[error("cocycle identity fails at ({g}, {h}, {k})")]
    NotACocycle { g: usize, h: usize, k: usize },
    #[error("carrier action is not regular: {0}")]
    NotRegular(String),
    #[error("malformed cocycle data: {0}")]
    Malformed(String),
}

impl ExtensionError {
    pub fn kind(&self) -> &'static str {
        match self {
            ExtensionError::Groupoid(e) => e.kind(),
            ExtensionError::Group(_) => "GroupError",
            ExtensionError::NotConnected(_) => "NotConnected",
            ExtensionError::NotEmbedding(_) => "NotEmbedding",
            ExtensionError::NotACocycle { .. } => "NotACocycle",
            ExtensionError::NotRegular(_) => "NotRegular",
            ExtensionError::Malformed(_) => "Malformed",
        }
    }
}

pub type Result<T> = std::result::Result<T, ExtensionError>;

/// A connected base groupoid, a basepoint `∗`, and an injective homomorphism
/// `ι` from the vertex group at `∗` into a finite group `G`.
#[derive(Debug, Clone)]
pub struct ExtensionInput {
    pub base: FiniteGroupoid,
    pub basepoint: usize,
    pub supergroup: FiniteGroup,
    /// `embedding[i]` is `ι(base.hom(∗, ∗)[i])`.
    pub embedding: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawExtensionInput {
    pub base: RawGroupoid,
    pub basepoint: u64,
    pub supergroup: GroupTable,
    /// Pairs `[morphism id, group element]`.
    pub embedding: Vec<[u64; 2]>,
}

impl ExtensionInput {
    pub fn new(base: FiniteGroupoid, basepoint: usize, supergroup: FiniteGroup, embedding: Vec<usize>) -> Result<Self> {
        let input = ExtensionInput { base, basepoint, supergroup, embedding };
        input.check()?;
        Ok(input)
    }

    /// Finds an embedding of the basepoint vertex group into `supergroup`
    /// automatically (first one in search order).
    pub fn with_some_embedding(base: FiniteGroupoid, basepoint: usize, supergroup: FiniteGroup) -> Result<Self> {
        let vertex = base.vertex_group(basepoint);
        let gens = vertex.generators();
        let embedding = find_injective_hom(&vertex, &supergroup, &gens)
            .ok_or_else(|| ExtensionError::NotEmbedding("no injective homomorphism into the supergroup".into()))?;
        Self::new(base, basepoint, supergroup, embedding)
    }

    pub fn from_raw(raw: &RawExtensionInput) -> Result<Self> {
        let base = FiniteGroupoid::validate(&raw.base)?;
        let basepoint = base
            .object_index(raw.basepoint)
            .ok_or_else(|| ExtensionError::Malformed(format!("unknown basepoint {}", raw.basepoint)))?;
        let supergroup = FiniteGroup::try_from(raw.supergroup.clone())?;
        let vertex = base.hom(basepoint, basepoint);
        let mut embedding = vec![usize::MAX; vertex.len()];
        for &[m, g] in &raw.embedding {
            let pos = base
                .morphism_index(m)
                .and_then(|i| vertex.iter().position(|&v| v == i))
                .ok_or_else(|| ExtensionError::NotEmbedding(format!("morphism {m} is not in the basepoint vertex group")))?;
            embedding[pos] = g as usize;
        }
        if embedding.contains(&usize::MAX) {
            return Err(ExtensionError::NotEmbedding("embedding is not total on the vertex group".into()));
        }
        Self::new(base, basepoint, supergroup, embedding)
    }

    pub fn to_raw(&self) -> RawExtensionInput {
        let vertex = self.base.hom(self.basepoint, self.basepoint);
        RawExtensionInput {
            base: self.base.to_raw(),
            basepoint: self.base.object_id(self.basepoint),
            supergroup: self.supergroup.clone().into(),
            embedding: vertex
                .iter()
                .zip(&self.embedding)
                .map(|(&m, &g)| [self.base.morphism(m).id, g as u64])
                .collect(),
        }
    }

    fn check(&self) -> Result<()> {
        let b = &self.base;
        if self.basepoint >= b.object_count() {
            return Err(ExtensionError::Malformed("basepoint out of range".into()));
        }
        if let Some(x) = (0..b.object_count()).find(|&x| b.hom(self.basepoint, x).is_empty()) {
            return Err(ExtensionError::NotConnected(b.object_id(x)));
        }
        let vertex = b.hom(self.basepoint, self.basepoint);
        if self.embedding.len() != vertex.len() || self.embedding.iter().any(|&g| g >= self.supergroup.order()) {
            return Err(ExtensionError::NotEmbedding("embedding has the wrong shape".into()));
        }
        for (i, &x) in vertex.iter().enumerate() {
            for (j, &y) in vertex.iter().enumerate() {
                let xy = vertex.iter().position(|&v| v == b.compose(x, y)).expect("vertex group is closed");
                if self.supergroup.mul(self.embedding[i], self.embedding[j]) != self.embedding[xy] {
                    return Err(ExtensionError::NotEmbedding(format!(
                        "not a homomorphism at ({}, {})",
                        b.morphism(x).id,
                        b.morphism(y).id
                    )));
                }
            }
        }
        let mut seen = vec![false; self.supergroup.order()];
        for &g in &self.embedding {
            if std::mem::replace(&mut seen[g], true) {
                return Err(ExtensionError::NotEmbedding("embedding has a nontrivial kernel".into()));
            }
        }
        Ok(())
    }

    /// `ι` applied to a base morphism in `Mor⁰(∗, ∗)`.
    fn iota(&self, m: usize) -> usize {
        let vertex = self.base.hom(self.basepoint, self.basepoint);
        self.embedding[vertex.iter().position(|&v| v == m).expect("vertex morphism")]
    }

    /// The triple relation: `(f, g, h) ~ (f', g', h')` iff
    /// `ι(f'⁻¹ f) g = g' ι(h' h⁻¹)`. Triples are `(f: ∗ → b, g ∈ G, h: a → ∗)`.
    pub fn triples_equivalent(&self, t1: (usize, usize, usize), t2: (usize, usize, usize)) -> bool {
        let b = &self.base;
        let ((f, g, h), (f2, g2, h2)) = (t1, t2);
        let grp = &self.supergroup;
        let lhs = grp.mul(self.iota(b.compose(b.inverse(f2), f)), g);
        let rhs = grp.mul(g2, self.iota(b.compose(h2, b.inverse(h))));
        lhs == rhs
    }

    /// All triples over `(a, b)`.
    pub fn triples(&self, a: usize, b: usize) -> Vec<(usize, usize, usize)> {
        let star = self.basepoint;
        let mut out = Vec::new();
        for &f in self.base.hom(star, b) {
            for g in self.supergroup.elements() {
                for &h in self.base.hom(a, star) {
                    out.push((f, g, h));
                }
            }
        }
        out
    }
}

fn find_injective_hom(from: &FiniteGroup, to: &FiniteGroup, gens: &[usize]) -> Option<Vec<usize>> {
    fn go(from: &FiniteGroup, to: &FiniteGroup, gens: &[usize], images: &mut Vec<usize>) -> Option<Vec<usize>> {
        if images.len() == gens.len() {
            let hom = from.hom_from_generators(to, gens, images)?;
            let mut sorted = hom.clone();
            sorted.sort_unstable();
            sorted.dedup();
            return (sorted.len() == hom.len()).then_some(hom);
        }
        let want = from.element_order(gens[images.len()]);
        for y in to.elements().filter(|&y| to.element_order(y) == want) {
            images.push(y);
            if let Some(h) = go(from, to, gens, images) {
                return Some(h);
            }
            images.pop();
        }
        None
    }
    go(from, to, gens, &mut Vec::new())
}

/// Output of [`extend_groupoid`]. Morphisms of `Mor(a, b)` are indexed by the
/// canonical middle component: index `(a·n + b)·|G| + g` is the class of
/// `(v_b⁻¹, g, v_a)`, where `v_x` is the first morphism of `Mor⁰(x, ∗)`.
#[derive(Debug, Clone)]
pub struct Extension {
    pub input: ExtensionInput,
    pub groupoid: FiniteGroupoid,
    anchors: Vec<usize>,
}

/// Extends a connected groupoid so that the vertex group at `∗` becomes `G`.
pub fn extend_groupoid(input: &ExtensionInput) -> Result<Extension> {
    input.check()?;
    let base = &input.base;
    let star = input.basepoint;
    let n = base.object_count();
    let order = input.supergroup.order();
    let anchors: Vec<usize> = (0..n).map(|x| base.hom(x, star)[0]).collect();
    let ext = Extension { input: input.clone(), groupoid: FiniteGroupoid::pair(0), anchors };
    let morphisms = (0..n * n * order).map(|i| (i / order / n, (i / order) % n, None)).collect();
    let groupoid = FiniteGroupoid::from_fn(n, morphisms, |gm, fm| {
        let (b, c, y) = ext.split_index(gm);
        let (a, b2, x) = ext.split_index(fm);
        debug_assert_eq!(b, b2);
        let (f, g, h) = ext.representative(a, b, x);
        let (j2, g2, f2) = ext.representative(b, c, y);
        // [(j', g', f')] ∘ [(f, g, h)] = [(j', g' ι(f' f) g, h)]
        let grp = &input.supergroup;
        let mid = grp.mul(grp.mul(g2, input.iota(base.compose(f2, f))), g);
        ext.class_of(a, c, (j2, mid, h))
    })?;
    let groupoid = groupoid.with_object_ids((0..n).map(|a| base.object_id(a)).collect());
    Ok(Extension { groupoid, ..ext })
}

impl Extension {
    fn split_index(&self, m: usize) -> (usize, usize, usize) {
        let n = self.input.base.object_count();
        let order = self.input.supergroup.order();
        (m / order / n, (m / order) % n, m % order)
    }

    /// The canonical triple `(v_b⁻¹, g, v_a)` of a morphism index.
    pub fn representative(&self, a: usize, b: usize, g: usize) -> (usize, usize, usize) {
        (self.input.base.inverse(self.anchors[b]), g, self.anchors[a])
    }

    /// Morphism index of the class of a triple `(f: ∗ → b, g, h: a → ∗)`.
    pub fn class_of(&self, a: usize, b: usize, (f, g, h): (usize, usize, usize)) -> usize {
        let base = &self.input.base;
        let grp = &self.input.supergroup;
        // (f, g, h) ~ (v_b⁻¹, ι(v_b f) g ι(h v_a⁻¹), v_a)
        let left = self.input.iota(base.compose(self.anchors[b], f));
        let right = self.input.iota(base.compose(h, base.inverse(self.anchors[a])));
        let mid = grp.mul(grp.mul(left, g), right);
        let n = base.object_count();
        (a * n + b) * grp.order() + mid
    }

    /// Image of a base morphism `f: a → b` under `f ↦ [(f v⁻¹, e, v)]` for the
    /// chosen `v ∈ Mor⁰(a, ∗)`.
    pub fn embed_base(&self, f: usize, v: usize) -> usize {
        let base = &self.input.base;
        let (a, b) = (base.source(f), base.target(f));
        debug_assert_eq!(base.source(v), a);
        self.class_of(a, b, (base.compose(f, base.inverse(v)), self.input.supergroup.identity(), v))
    }

    /// Morphism index of the element `g` of `Mor(∗, ∗)`.
    pub fn vertex_element(&self, g: usize) -> usize {
        let star = self.input.basepoint;
        self.class_of(star, star, (self.input.base.identity(star), g, self.input.base.identity(star)))
    }
}

/// Normalized 2-cocycle data: a finite group `G` acting regularly on a
/// carrier `X`, an abelian kernel `K` with trivial action, and `c: G×G → K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocycleData {
    group: FiniteGroup,
    kernel: FiniteGroup,
    cocycle: Vec<Vec<usize>>,
    /// `action[g][x] = g·x`.
    action: Vec<Vec<usize>>,
    note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCocycleData {
    pub group: GroupTable,
    pub kernel: GroupTable,
    /// `cocycle[g][h] = c(g, h)`.
    pub cocycle: Vec<Vec<usize>>,
    /// `action[g][x] = g·x`; defaults to left multiplication on `G` itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Vec<Vec<usize>>>,
}

impl CocycleData {
    /// Checks the cocycle identity and normalizes by subtracting the constant
    /// `c(e, e)`, which is itself a coboundary.
    pub fn new(group: FiniteGroup, kernel: FiniteGroup, cocycle: Vec<Vec<usize>>) -> Result<Self> {
        let action = group.table().to_vec();
        Self::with_carrier(group, kernel, cocycle, action)
    }

    /// The zero cocycle with cyclic kernel of the given order.
    pub fn trivial(group: FiniteGroup, kernel: FiniteGroup) -> Self {
        let n = group.order();
        let zero = kernel.identity();
        Self::new(group, kernel, vec![vec![zero; n]; n]).expect("zero cocycle")
    }

    pub fn with_carrier(group: FiniteGroup, kernel: FiniteGroup, cocycle: Vec<Vec<usize>>, action: Vec<Vec<usize>>) -> Result<Self> {
        if !kernel.is_abelian() {
            return Err(ExtensionError::Malformed("kernel must be abelian".into()));
        }
        let n = group.order();
        if cocycle.len() != n || cocycle.iter().any(|r| r.len() != n || r.iter().any(|&k| k >= kernel.order())) {
            return Err(ExtensionError::Malformed("cocycle table has the wrong shape".into()));
        }
        check_regular(&group, &action)?;
        let add = |x, y| kernel.mul(x, y);
        for g in 0..n {
            for h in 0..n {
                for k in 0..n {
                    let lhs = add(cocycle[g][h], cocycle[group.mul(g, h)][k]);
                    let rhs = add(cocycle[h][k], cocycle[g][group.mul(h, k)]);
                    if lhs != rhs {
                        return Err(ExtensionError::NotACocycle { g, h, k });
                    }
                }
            }
        }
        let e = group.identity();
        let shift = cocycle[e][e];
        let mut note = None;
        let cocycle = if shift == kernel.identity() {
            cocycle
        } else {
            note = Some(format!("normalized by subtracting the constant {shift}"));
            let neg = kernel.inv(shift);
            cocycle.into_iter().map(|row| row.into_iter().map(|k| add(k, neg)).collect()).collect()
        };
        Ok(CocycleData { group, kernel, cocycle, action, note })
    }

    pub fn from_raw(raw: &RawCocycleData) -> Result<Self> {
        let group = FiniteGroup::try_from(raw.group.clone())?;
        let kernel = FiniteGroup::try_from(raw.kernel.clone())?;
        let action = raw.action.clone().unwrap_or_else(|| group.table().to_vec());
        Self::with_carrier(group, kernel, raw.cocycle.clone(), action)
    }

    pub fn to_raw(&self) -> RawCocycleData {
        RawCocycleData {
            group: self.group.clone().into(),
            kernel: self.kernel.clone().into(),
            cocycle: self.cocycle.clone(),
            action: (self.action != self.group.table()).then(|| self.action.clone()),
        }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn kernel(&self) -> &FiniteGroup {
        &self.kernel
    }

    pub fn c(&self, g: usize, h: usize) -> usize {
        self.cocycle[g][h]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.cocycle
    }

    pub fn carrier_size(&self) -> usize {
        self.action.first().map_or(0, Vec::len)
    }

    pub fn act(&self, g: usize, x: usize) -> usize {
        self.action[g][x]
    }

    /// Note attached when the input had to be normalized.
    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    /// The unique `g` with `y = g·x`.
    pub fn difference(&self, x: usize, y: usize) -> usize {
        self.group.elements().find(|&g| self.action[g][x] == y).expect("regular action")
    }

    /// Automorphisms of the carrier as a `G`-set, `σ(g·x₀) = g·σ(x₀)`.
    pub fn carrier_automorphisms(&self) -> Vec<Vec<usize>> {
        let n = self.carrier_size();
        (0..n)
            .map(|y0| {
                let mut sigma = vec![0; n];
                for g in self.group.elements() {
                    sigma[self.action[g][0]] = self.action[g][y0];
                }
                sigma
            })
            .collect()
    }

    /// `groupoid_from_cocycle`, with the carrier translations lifted to
    /// groupoid automorphisms.
    pub fn groupoid(&self) -> Result<CocycleGroupoid> {
        groupoid_from_cocycle(self)
    }
}

fn check_regular(group: &FiniteGroup, action: &[Vec<usize>]) -> Result<()> {
    let n = group.order();
    if action.len() != n {
        return Err(ExtensionError::NotRegular("one row per group element is required".into()));
    }
    let size = action[0].len();
    if size != n || action.iter().any(|r| r.len() != size || r.iter().any(|&y| y >= size)) {
        return Err(ExtensionError::NotRegular("carrier must have |G| points".into()));
    }
    for g in 0..n {
        for h in 0..n {
            for x in 0..size {
                if action[group.mul(g, h)][x] != action[g][action[h][x]] {
                    return Err(ExtensionError::NotRegular(format!("not an action at ({g}, {h}, {x})")));
                }
            }
        }
    }
    if action[group.identity()].iter().enumerate().any(|(x, &y)| x != y) {
        return Err(ExtensionError::NotRegular("identity acts nontrivially".into()));
    }
    for x in 0..size {
        let mut hit = vec![false; size];
        for row in action {
            hit[row[x]] = true;
        }
        if hit.contains(&false) {
            return Err(ExtensionError::NotRegular(format!("orbit of point {x} is not the whole carrier")));
        }
    }
    Ok(())
}

/// A cocycle groupoid with its total regular functor and carrier symmetry.
///
/// Morphism `(x, y, k)` has index `(x·|X| + y)·|K| + k` and label `k`. The
/// fiber over `x` is the set of morphisms into `x`; element `(w, t)` has
/// index `w·|K| + t` and label `g_wx·|K| + t`, and a morphism acts by
/// composition. Carrier translations preserve both sets of labels.
#[derive(Debug, Clone)]
pub struct CocycleGroupoid {
    pub groupoid: FiniteGroupoid,
    pub functor: ConcreteFunctor,
    pub symmetry: Vec<GroupoidAutomorphism>,
}

impl CocycleGroupoid {
    pub fn morphism(&self, x: usize, y: usize, k: usize, kernel_order: usize) -> usize {
        (x * self.groupoid.object_count() + y) * kernel_order + k
    }
}

pub fn groupoid_from_cocycle(data: &CocycleData) -> Result<CocycleGroupoid> {
    let nx = data.carrier_size();
    let nk = data.kernel.order();
    let kern = &data.kernel;
    let index = |x: usize, y: usize, k: usize| (x * nx + y) * nk + k;
    let split = |m: usize| (m / nk / nx, (m / nk) % nx, m % nk);
    let diff: Vec<Vec<usize>> = (0..nx).map(|x| (0..nx).map(|y| data.difference(x, y)).collect()).collect();
    let morphisms = (0..nx * nx * nk).map(|m| {
        let (x, y, k) = split(m);
        (x, y, Some(k as u64))
    });
    // (y,z,k₂) ∘ (x,y,k₁) = (x, z, k₁ + k₂ + c(g_yz, g_xy))
    let compose = |g: usize, f: usize| {
        let (y, z, k2) = split(g);
        let (x, _, k1) = split(f);
        index(x, z, kern.mul(kern.mul(k1, k2), data.c(diff[y][z], diff[x][y])))
    };
    let groupoid = FiniteGroupoid::from_fn(nx, morphisms.collect(), compose)?;

    let fibers = vec![nx * nk; nx];
    let action = (0..groupoid.morphism_count())
        .map(|m| {
            let x = split(m).0;
            (0..nx * nk)
                .map(|e| {
                    let (w, t) = (e / nk, e % nk);
                    let (_, _, t2) = split(compose(m, index(w, x, t)));
                    w * nk + t2
                })
                .collect()
        })
        .collect();
    let labels = (0..nx)
        .map(|x| (0..nx * nk).map(|e| (diff[e / nk][x] * nk + e % nk) as u64).collect())
        .collect();
    let functor = ConcreteFunctor::new(&groupoid, fibers, action, Some(labels))?;

    let symmetry = data
        .carrier_automorphisms()
        .into_iter()
        .map(|sigma| GroupoidAutomorphism {
            morphisms: (0..groupoid.morphism_count())
                .map(|m| {
                    let (x, y, k) = split(m);
                    index(sigma[x], sigma[y], k)
                })
                .collect(),
            objects: sigma,
        })
        .collect();
    Ok(CocycleGroupoid { groupoid, functor, symmetry })
}

/// Exhaustive search for `b: G → K` with `b(e) = 0` and
/// `c(g, h) = b(g) + b(h) − b(gh)`.
pub fn is_coboundary(data: &CocycleData) -> Option<Vec<usize>> {
    let g = &data.group;
    let k = &data.kernel;
    let n = g.order();
    let others: Vec<usize> = g.elements().filter(|&x| x != g.identity()).collect();
    let mut b = vec![k.identity(); n];
    let mut counter = vec![0usize; others.len()];
    loop {
        for (i, &x) in others.iter().enumerate() {
            b[x] = counter[i];
        }
        if coboundary_of(g, k, &b) == data.cocycle {
            return Some(b);
        }
        // odometer over |K|^(|G|-1) cochains
        let mut i = 0;
        loop {
            if i == counter.len() {
                return None;
            }
            counter[i] += 1;
            if counter[i] < k.order() {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
    }
}

/// `δb(g, h) = b(g) + b(h) − b(gh)`.
pub fn coboundary_of(g: &FiniteGroup, k: &FiniteGroup, b: &[usize]) -> Vec<Vec<usize>> {
    g.elements()
        .map(|x| g.elements().map(|y| k.mul(k.mul(b[x], b[y]), k.inv(b[g.mul(x, y)]))).collect())
        .collect()
}

/// Every normalized cocycle `G × G → K`, by exhaustive enumeration of the
/// values off the identity row and column.
pub fn all_normalized_cocycles(g: &FiniteGroup, k: &FiniteGroup) -> Vec<CocycleData> {
    let n = g.order();
    let e = g.identity();
    let cells: Vec<(usize, usize)> = g
        .elements()
        .filter(|&x| x != e)
        .flat_map(|x| g.elements().filter(move |&y| y != e).map(move |y| (x, y)))
        .collect();
    let mut out = Vec::new();
    let mut counter = vec![0usize; cells.len()];
    let mut table = vec![vec![k.identity(); n]; n];
    loop {
        for (i, &(x, y)) in cells.iter().enumerate() {
            table[x][y] = counter[i];
        }
        if let Ok(data) = CocycleData::new(g.clone(), k.clone(), table.clone()) {
            out.push(data);
        }
        let mut i = 0;
        loop {
            if i == counter.len() {
                return out;
            }
            counter[i] += 1;
            if counter[i] < k.order() {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn z2_twisted() -> CocycleData {
        CocycleData::new(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2), vec![vec![0, 0], vec![0, 1]]).unwrap()
    }

    #[test]
    fn pair_groupoid_extended_by_s3() {
        let input = ExtensionInput::with_some_embedding(FiniteGroupoid::pair(3), 0, FiniteGroup::symmetric(3)).unwrap();
        let ext = extend_groupoid(&input).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(ext.groupoid.hom(a, b).len(), 6);
            }
        }
        let v = ext.groupoid.vertex_group(0);
        assert!(v.find_isomorphism(&FiniteGroup::symmetric(3)).is_some());
    }

    #[test]
    fn trivial_extension_recovers_base() {
        let base = CocycleData::trivial(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)).groupoid().unwrap().groupoid;
        let input = ExtensionInput::with_some_embedding(base.clone(), 0, FiniteGroup::cyclic(2)).unwrap();
        let ext = extend_groupoid(&input).unwrap();
        assert_eq!(ext.groupoid.morphism_count(), base.morphism_count());
        // the base embedding is a bijection here
        let image: BTreeSet<usize> = (0..base.morphism_count())
            .map(|f| ext.embed_base(f, base.hom(base.source(f), 0)[0]))
            .collect();
        assert_eq!(image.len(), base.morphism_count());
    }

    #[test]
    fn z2_vertex_groups_into_z4() {
        let base = CocycleData::trivial(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)).groupoid().unwrap().groupoid;
        let input = ExtensionInput::with_some_embedding(base, 0, FiniteGroup::cyclic(4)).unwrap();
        let ext = extend_groupoid(&input).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(ext.groupoid.hom(a, b).len(), 4);
                // brute-force classes of the 2·4·2 triples
                let triples = input.triples(a, b);
                assert_eq!(triples.len(), 16);
                let mut classes: Vec<Vec<(usize, usize, usize)>> = Vec::new();
                for t in triples {
                    match classes.iter_mut().find(|c| input.triples_equivalent(c[0], t)) {
                        Some(c) => c.push(t),
                        None => classes.push(vec![t]),
                    }
                }
                assert_eq!(classes.len(), 4);
                assert!(classes.iter().all(|c| c.len() == 4));
            }
        }
    }

    #[test]
    fn base_embedding_is_independent_of_anchor() {
        let base = CocycleData::trivial(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)).groupoid().unwrap().groupoid;
        let input = ExtensionInput::with_some_embedding(base.clone(), 0, FiniteGroup::cyclic(4)).unwrap();
        let ext = extend_groupoid(&input).unwrap();
        for f in 0..base.morphism_count() {
            let a = base.source(f);
            let images: BTreeSet<usize> = base.hom(a, 0).iter().map(|&v| ext.embed_base(f, v)).collect();
            assert_eq!(images.len(), 1);
        }
        // and it is a functor
        let emb = |f: usize| ext.embed_base(f, base.hom(base.source(f), 0)[0]);
        for g in 0..base.morphism_count() {
            for f in 0..base.morphism_count() {
                if let Some(h) = base.try_compose(g, f) {
                    assert_eq!(ext.groupoid.compose(emb(g), emb(f)), emb(h));
                }
            }
        }
    }

    #[test]
    fn non_embedding_is_rejected() {
        let g = FiniteGroupoid::from_group(&FiniteGroup::cyclic(2));
        let err = ExtensionInput::new(g, 0, FiniteGroup::cyclic(4), vec![0, 0]).unwrap_err();
        assert!(matches!(err, ExtensionError::NotEmbedding(_)));
    }

    #[test]
    fn disconnected_base_is_rejected() {
        let raw = RawGroupoid {
            objects: vec![0, 1],
            morphisms: vec![
                crate::groupoid::RawMorphism { id: 0, source: 0, target: 0, label: None },
                crate::groupoid::RawMorphism { id: 1, source: 1, target: 1, label: None },
            ],
            compose: vec![[0, 0, 0], [1, 1, 1]],
            identity: vec![[0, 0], [1, 1]],
        };
        let g = FiniteGroupoid::validate(&raw).unwrap();
        assert_eq!(
            ExtensionInput::new(g, 0, FiniteGroup::cyclic(1), vec![0]).unwrap_err(),
            ExtensionError::NotConnected(1)
        );
    }

    #[test]
    fn cocycle_groupoids_validate() {
        for data in [CocycleData::trivial(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)), z2_twisted()] {
            let built = data.groupoid().unwrap();
            let raw = built.groupoid.to_raw();
            let g = FiniteGroupoid::validate(&raw).unwrap();
            assert_eq!(g.associativity_check(), (128, true));
            let report = g.classify();
            assert_eq!(report.classes.len(), 1);
            assert_eq!(report.classes[0].vertex_group.order, 2);
            for s in &built.symmetry {
                assert!(g.is_automorphism(s));
            }
            assert!(built.functor.is_faithful(&g));
        }
    }

    #[test]
    fn not_a_cocycle() {
        // c(1,1) = 1 and c(1,2) = 1 only, over Z3: fails the identity
        let mut c = vec![vec![0; 3]; 3];
        c[1][1] = 1;
        let err = CocycleData::new(FiniteGroup::cyclic(3), FiniteGroup::cyclic(2), c).unwrap_err();
        assert!(matches!(err, ExtensionError::NotACocycle { .. }));
    }

    #[test]
    fn unnormalized_input_is_shifted() {
        let data = CocycleData::new(FiniteGroup::cyclic(2), FiniteGroup::cyclic(3), vec![vec![1, 1], vec![1, 1]]).unwrap();
        assert!(data.note().is_some());
        assert_eq!(data.table(), &[vec![0, 0], vec![0, 0]]);
    }

    #[test]
    fn coboundary_decisions() {
        let zero = CocycleData::trivial(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2));
        assert_eq!(is_coboundary(&zero), Some(vec![0, 0]));
        assert_eq!(is_coboundary(&z2_twisted()), None);
        // H²(Z3, Z2) = 0
        let all = all_normalized_cocycles(&FiniteGroup::cyclic(3), &FiniteGroup::cyclic(2));
        assert!(!all.is_empty());
        assert!(all.iter().all(|c| is_coboundary(c).is_some()));
    }

    #[test]
    fn z2_z2_has_one_class_of_each() {
        let all = all_normalized_cocycles(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
        assert_eq!(all.len(), 2);
        assert_eq!(all.iter().filter(|c| is_coboundary(c).is_some()).count(), 1);
    }

    #[test]
    fn twisted_quotient_by_full_vertex_groups_is_pair_groupoid() {
        let built = z2_twisted().groupoid().unwrap();
        let g = &built.groupoid;
        let system = crate::groupoid::NormalSubgroupSystem::full(g);
        let (q, proj) = g.quotient(&system).unwrap();
        assert_eq!(q.morphism_count(), 4);
        // brute force: morphisms with the same endpoints collapse
        for m1 in 0..g.morphism_count() {
            for m2 in 0..g.morphism_count() {
                let same = g.source(m1) == g.source(m2) && g.target(m1) == g.target(m2);
                assert_eq!(proj[m1] == proj[m2], same);
            }
        }
    }

    #[test]
    fn sections_match_coboundaries() {
        let built = CocycleData::trivial(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)).groupoid().unwrap();
        let s = built.groupoid.find_coherent_section(&built.symmetry).unwrap().unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(built.groupoid.morphism(s.get(x, y)).label, Some(0));
            }
        }
        let twisted = z2_twisted().groupoid().unwrap();
        assert!(twisted.groupoid.find_coherent_section(&twisted.symmetry).unwrap().is_none());
        // without the symmetry constraint any connected groupoid has a section
        assert!(twisted.groupoid.find_coherent_section(&[]).unwrap().is_some());
    }

    #[test]
    fn cohomologous_cocycles_give_isomorphic_groupoids() {
        let g = FiniteGroup::cyclic(3);
        let k = FiniteGroup::cyclic(3);
        let b = vec![0, 1, 2];
        let c = CocycleData::new(g.clone(), k.clone(), coboundary_of(&g, &k, &b)).unwrap();
        let zero = CocycleData::trivial(g, k.clone());
        let gc = c.groupoid().unwrap().groupoid;
        let g0 = zero.groupoid().unwrap().groupoid;
        // (x, y, k) ↦ (x, y, k + b(g_xy)) is an isomorphism over the objects
        let n = g0.object_count();
        let phi = |m: usize| {
            let (x, y, kk) = (m / 3 / n, (m / 3) % n, m % 3);
            (x * n + y) * 3 + k.mul(kk, b[c.difference(x, y)])
        };
        for g2 in 0..g0.morphism_count() {
            for f in 0..g0.morphism_count() {
                if let Some(h) = gc.try_compose(g2, f) {
                    assert_eq!(g0.compose(phi(g2), phi(f)), phi(h));
                }
            }
        }
    }
}
