//! Finite groupoids as validated composition tables.
//!
//! Objects and morphisms carry caller-chosen integer ids; internally both are
//! re-indexed densely in the order given. Every public operation works on
//! indices and reports witnesses with ids.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Fingerprint, FiniteGroup, Perm};

/// A failed groupoid law, with the morphism ids witnessing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Violation {
    /// `compose` has an entry for `(g, f)` although `source(g) != target(f)`.
    NotComposable { g: u64, f: u64 },
    /// `g ∘ f` lands outside `Mor(source f, target g)`.
    WrongHomSet { g: u64, f: u64, composite: u64 },
    /// A composable pair has no entry.
    MissingComposite { g: u64, f: u64 },
    NonAssociative { h: u64, g: u64, f: u64 },
    UnitFailure { object: u64, morphism: u64 },
    MissingInverse { morphism: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupoidError {
    #[error("malformed groupoid table: {0}")]
    Malformed(String),
    #[error("groupoid axiom violated: {0:?}")]
    AxiomViolation(Violation),
    #[error("subset at object {object} is not a subgroup of its vertex group")]
    NotASubgroup { object: u64 },
    #[error("subgroup at object {object} is not normal (conjugating {element} by {by})")]
    NotNormal { object: u64, element: u64, by: u64 },
    #[error("system is not transport-stable along morphism {morphism}")]
    NotTransportStable { morphism: u64 },
    #[error("groupoid is not connected (object {0} unreachable from the first object)")]
    NotConnected(u64),
    #[error("vertex group at object {0} is nontrivial")]
    NontrivialVertexGroup(u64),
    #[error("functor data invalid: {0}")]
    NotAFunctor(String),
    #[error("functor is not faithful: morphisms {0} and {1} act identically")]
    NotFaithful(u64, u64),
    #[error("not a groupoid automorphism: {0}")]
    NotAnAutomorphism(String),
}

impl GroupoidError {
    pub fn kind(&self) -> &'static str {
        match self {
            GroupoidError::Malformed(_) => "Malformed",
            GroupoidError::AxiomViolation(_) => "AxiomViolation",
            GroupoidError::NotASubgroup { .. } => "NotASubgroup",
            GroupoidError::NotNormal { .. } => "NotNormal",
            GroupoidError::NotTransportStable { .. } => "NotTransportStable",
            GroupoidError::NotConnected(_) => "NotConnected",
            GroupoidError::NontrivialVertexGroup(_) => "NontrivialVertexGroup",
            GroupoidError::NotAFunctor(_) => "NotAFunctor",
            GroupoidError::NotFaithful(..) => "NotFaithful",
            GroupoidError::NotAnAutomorphism(_) => "NotAnAutomorphism",
        }
    }
}

pub type Result<T> = std::result::Result<T, GroupoidError>;

/// Serialized, unvalidated groupoid tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGroupoid {
    pub objects: Vec<u64>,
    pub morphisms: Vec<RawMorphism>,
    /// Triples `[g, f, g∘f]`.
    pub compose: Vec<[u64; 3]>,
    /// Pairs `[object, identity morphism]`.
    pub identity: Vec<[u64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMorphism {
    pub id: u64,
    pub source: u64,
    pub target: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    pub id: u64,
    pub source: usize,
    pub target: usize,
    /// Optional name shared across hom-sets; treated as invariant data when a
    /// groupoid is placed inside a structure.
    pub label: Option<u64>,
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupoid {
    object_ids: Vec<u64>,
    morphisms: Vec<Morphism>,
    compose: Vec<u32>,
    identity: Vec<usize>,
    inverse: Vec<usize>,
    hom: Vec<Vec<Vec<usize>>>,
}

impl FiniteGroupoid {
    /// `validate_groupoid`: checks well-formedness and every groupoid law.
    pub fn validate(raw: &RawGroupoid) -> Result<Self> {
        let mut obj_index = BTreeMap::new();
        for (i, &o) in raw.objects.iter().enumerate() {
            if obj_index.insert(o, i).is_some() {
                return Err(GroupoidError::Malformed(format!("duplicate object id {o}")));
            }
        }
        let mut mor_index = BTreeMap::new();
        let mut morphisms = Vec::with_capacity(raw.morphisms.len());
        for (i, m) in raw.morphisms.iter().enumerate() {
            if mor_index.insert(m.id, i).is_some() {
                return Err(GroupoidError::Malformed(format!("duplicate morphism id {}", m.id)));
            }
            let lookup = |o: u64| {
                obj_index
                    .get(&o)
                    .copied()
                    .ok_or_else(|| GroupoidError::Malformed(format!("morphism {} references unknown object {o}", m.id)))
            };
            morphisms.push(Morphism { id: m.id, source: lookup(m.source)?, target: lookup(m.target)?, label: m.label });
        }
        let mor = |id: u64| {
            mor_index
                .get(&id)
                .copied()
                .ok_or_else(|| GroupoidError::Malformed(format!("unknown morphism id {id}")))
        };
        let n = morphisms.len();
        let mut compose = vec![NONE; n * n];
        for &[g, f, h] in &raw.compose {
            let (gi, fi, hi) = (mor(g)?, mor(f)?, mor(h)?);
            if compose[gi * n + fi] != NONE {
                return Err(GroupoidError::Malformed(format!("duplicate compose entry for ({g}, {f})")));
            }
            compose[gi * n + fi] = hi as u32;
        }
        let mut identity = vec![usize::MAX; raw.objects.len()];
        for &[o, m] in &raw.identity {
            let oi = *obj_index
                .get(&o)
                .ok_or_else(|| GroupoidError::Malformed(format!("identity for unknown object {o}")))?;
            if identity[oi] != usize::MAX {
                return Err(GroupoidError::Malformed(format!("duplicate identity for object {o}")));
            }
            identity[oi] = mor(m)?;
        }
        if let Some(i) = identity.iter().position(|&m| m == usize::MAX) {
            return Err(GroupoidError::Malformed(format!("object {} has no identity", raw.objects[i])));
        }
        Self::check_laws(raw.objects.clone(), morphisms, compose, identity)
    }

    /// Builds and validates a groupoid from a composition function on morphism
    /// indices. Ids are the indices; identities are found from the table.
    pub fn from_fn(
        objects: usize,
        morphisms: Vec<(usize, usize, Option<u64>)>,
        mut compose: impl FnMut(usize, usize) -> usize,
    ) -> Result<Self> {
        let morphisms: Vec<Morphism> = morphisms
            .into_iter()
            .enumerate()
            .map(|(i, (source, target, label))| Morphism { id: i as u64, source, target, label })
            .collect();
        let n = morphisms.len();
        let mut table = vec![NONE; n * n];
        for g in 0..n {
            for f in 0..n {
                if morphisms[g].source == morphisms[f].target {
                    table[g * n + f] = compose(g, f) as u32;
                }
            }
        }
        let mut identity = vec![usize::MAX; objects];
        for (a, slot) in identity.iter_mut().enumerate() {
            *slot = (0..n)
                .find(|&m| {
                    let mm = &morphisms[m];
                    mm.source == a
                        && mm.target == a
                        && (0..n).all(|f| {
                            (morphisms[f].target != a || table[m * n + f] as usize == f)
                                && (morphisms[f].source != a || table[f * n + m] as usize == f)
                        })
                })
                .ok_or_else(|| GroupoidError::Malformed(format!("object {a} has no identity")))?;
        }
        Self::check_laws((0..objects as u64).collect(), morphisms, table, identity)
    }

    fn check_laws(object_ids: Vec<u64>, morphisms: Vec<Morphism>, compose: Vec<u32>, identity: Vec<usize>) -> Result<Self> {
        let n = morphisms.len();
        let k = object_ids.len();
        let id_of = |m: usize| morphisms[m].id;
        let viol = |v| Err(GroupoidError::AxiomViolation(v));
        for g in 0..n {
            for f in 0..n {
                let h = compose[g * n + f];
                let composable = morphisms[g].source == morphisms[f].target;
                if !composable && h != NONE {
                    return viol(Violation::NotComposable { g: id_of(g), f: id_of(f) });
                }
                if composable {
                    if h == NONE {
                        return viol(Violation::MissingComposite { g: id_of(g), f: id_of(f) });
                    }
                    let h = h as usize;
                    if morphisms[h].source != morphisms[f].source || morphisms[h].target != morphisms[g].target {
                        return viol(Violation::WrongHomSet { g: id_of(g), f: id_of(f), composite: id_of(h) });
                    }
                }
            }
        }
        for (a, &e) in identity.iter().enumerate() {
            if morphisms[e].source != a || morphisms[e].target != a {
                return viol(Violation::UnitFailure { object: object_ids[a], morphism: id_of(e) });
            }
            for m in 0..n {
                let left_ok = morphisms[m].target != a || compose[e * n + m] as usize == m;
                let right_ok = morphisms[m].source != a || compose[m * n + e] as usize == m;
                if !(left_ok && right_ok) {
                    return viol(Violation::UnitFailure { object: object_ids[a], morphism: id_of(m) });
                }
            }
        }
        let mut hom = vec![vec![Vec::new(); k]; k];
        for (i, m) in morphisms.iter().enumerate() {
            hom[m.source][m.target].push(i);
        }
        // associativity over composable triples h∘g∘f
        for f in 0..n {
            let b = morphisms[f].target;
            for c in 0..k {
                for &g in &hom[b][c] {
                    let gf = compose[g * n + f] as usize;
                    for d in 0..k {
                        for &h in &hom[c][d] {
                            let hg = compose[h * n + g] as usize;
                            if compose[hg * n + f] != compose[h * n + gf] {
                                return viol(Violation::NonAssociative { h: id_of(h), g: id_of(g), f: id_of(f) });
                            }
                        }
                    }
                }
            }
        }
        let mut inverse = vec![0; n];
        for (m, slot) in inverse.iter_mut().enumerate() {
            let (a, b) = (morphisms[m].source, morphisms[m].target);
            *slot = hom[b][a]
                .iter()
                .copied()
                .find(|&x| compose[x * n + m] as usize == identity[a] && compose[m * n + x] as usize == identity[b])
                .ok_or(GroupoidError::AxiomViolation(Violation::MissingInverse { morphism: id_of(m) }))?;
        }
        Ok(FiniteGroupoid { object_ids, morphisms, compose, identity, inverse, hom })
    }

    /// Replaces object ids (one per object, in index order).
    pub fn with_object_ids(mut self, ids: Vec<u64>) -> Self {
        assert_eq!(ids.len(), self.object_count());
        self.object_ids = ids;
        self
    }

    /// Replaces morphism ids (one per morphism, in index order).
    pub fn with_morphism_ids(mut self, ids: Vec<u64>) -> Self {
        assert_eq!(ids.len(), self.morphism_count());
        for (m, id) in self.morphisms.iter_mut().zip(ids) {
            m.id = id;
        }
        self
    }

    pub fn to_raw(&self) -> RawGroupoid {
        let n = self.morphisms.len();
        let mut compose = Vec::new();
        for g in 0..n {
            for f in 0..n {
                let h = self.compose[g * n + f];
                if h != NONE {
                    compose.push([self.morphisms[g].id, self.morphisms[f].id, self.morphisms[h as usize].id]);
                }
            }
        }
        RawGroupoid {
            objects: self.object_ids.clone(),
            morphisms: self
                .morphisms
                .iter()
                .map(|m| RawMorphism {
                    id: m.id,
                    source: self.object_ids[m.source],
                    target: self.object_ids[m.target],
                    label: m.label,
                })
                .collect(),
            compose,
            identity: self
                .identity
                .iter()
                .enumerate()
                .map(|(a, &m)| [self.object_ids[a], self.morphisms[m].id])
                .collect(),
        }
    }

    /// One-object groupoid of a group; morphism ids are element indices.
    pub fn from_group(group: &FiniteGroup) -> Self {
        let morphisms = group.elements().map(|_| (0, 0, None)).collect();
        Self::from_fn(1, morphisms, |g, f| group.mul(g, f)).expect("a group is a groupoid")
    }

    /// The pair groupoid on `n` objects: exactly one morphism per ordered pair.
    /// Morphism `(a, b)` has index `a * n + b`.
    pub fn pair(n: usize) -> Self {
        let morphisms = (0..n * n).map(|i| (i / n, i % n, None)).collect();
        Self::from_fn(n, morphisms, |g, f| (f / n) * n + g % n).expect("pair groupoid")
    }

    pub fn object_count(&self) -> usize {
        self.object_ids.len()
    }

    pub fn morphism_count(&self) -> usize {
        self.morphisms.len()
    }

    pub fn object_id(&self, a: usize) -> u64 {
        self.object_ids[a]
    }

    pub fn object_index(&self, id: u64) -> Option<usize> {
        self.object_ids.iter().position(|&o| o == id)
    }

    pub fn morphism_index(&self, id: u64) -> Option<usize> {
        self.morphisms.iter().position(|m| m.id == id)
    }

    pub fn morphism(&self, m: usize) -> &Morphism {
        &self.morphisms[m]
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn source(&self, m: usize) -> usize {
        self.morphisms[m].source
    }

    pub fn target(&self, m: usize) -> usize {
        self.morphisms[m].target
    }

    pub fn hom(&self, a: usize, b: usize) -> &[usize] {
        &self.hom[a][b]
    }

    pub fn identity(&self, a: usize) -> usize {
        self.identity[a]
    }

    pub fn inverse(&self, m: usize) -> usize {
        self.inverse[m]
    }

    /// `g ∘ f`, or `None` when not composable.
    pub fn try_compose(&self, g: usize, f: usize) -> Option<usize> {
        let h = self.compose[g * self.morphisms.len() + f];
        (h != NONE).then_some(h as usize)
    }

    /// `g ∘ f`; panics when `source(g) != target(f)`.
    pub fn compose(&self, g: usize, f: usize) -> usize {
        self.try_compose(g, f).expect("composable pair")
    }

    /// Counts composable triples and checks associativity on each one.
    pub fn associativity_check(&self) -> (usize, bool) {
        let mut count = 0;
        let mut ok = true;
        for f in 0..self.morphism_count() {
            let b = self.target(f);
            for c in 0..self.object_count() {
                for &g in self.hom(b, c) {
                    for d in 0..self.object_count() {
                        for &h in self.hom(c, d) {
                            count += 1;
                            ok &= self.compose(self.compose(h, g), f) == self.compose(h, self.compose(g, f));
                        }
                    }
                }
            }
        }
        (count, ok)
    }

    /// Partition of objects into isomorphism classes, each sorted, classes
    /// ordered by least member.
    pub fn iso_classes(&self) -> Vec<Vec<usize>> {
        let mut class_of = vec![usize::MAX; self.object_count()];
        let mut classes = Vec::new();
        for a in 0..self.object_count() {
            if class_of[a] != usize::MAX {
                continue;
            }
            let members: Vec<usize> = (0..self.object_count()).filter(|&b| !self.hom(a, b).is_empty()).collect();
            for &b in &members {
                class_of[b] = classes.len();
            }
            classes.push(members);
        }
        classes
    }

    pub fn is_connected(&self) -> bool {
        self.object_count() == 0 || (0..self.object_count()).all(|b| !self.hom(0, b).is_empty())
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        match (0..self.object_count()).find(|&b| self.hom(0, b).is_empty()) {
            Some(b) => Err(GroupoidError::NotConnected(self.object_ids[b])),
            None => Ok(()),
        }
    }

    /// Vertex group `Mor(a, a)` as a table; group element `i` is morphism
    /// `hom(a, a)[i]`.
    pub fn vertex_group(&self, a: usize) -> FiniteGroup {
        let elems = self.hom(a, a);
        let pos: BTreeMap<usize, usize> = elems.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let table = elems
            .iter()
            .map(|&x| elems.iter().map(|&y| pos[&self.compose(x, y)]).collect())
            .collect();
        FiniteGroup::from_table(table).expect("vertex group of a valid groupoid")
    }

    /// Transport along `h: a -> b`: the isomorphism `G_b -> G_a`,
    /// `x ↦ h⁻¹ ∘ x ∘ h`, as a map on morphism indices.
    pub fn transport(&self, h: usize) -> BTreeMap<usize, usize> {
        let (a, b) = (self.source(h), self.target(h));
        let h_inv = self.inverse(h);
        debug_assert_eq!(self.source(h_inv), b);
        self.hom(b, b)
            .iter()
            .map(|&x| (x, self.compose(h_inv, self.compose(x, h))))
            .inspect(|&(_, y)| debug_assert_eq!(self.source(y), a))
            .collect()
    }

    /// `classify`: iso-classes, vertex groups and the abelian/solvable flags.
    pub fn classify(&self) -> GroupoidReport {
        let classes: Vec<IsoClassReport> = self
            .iso_classes()
            .into_iter()
            .map(|members| {
                let rep = members[0];
                let g = self.vertex_group(rep);
                IsoClassReport {
                    objects: members.iter().map(|&a| self.object_ids[a]).collect(),
                    representative: self.object_ids[rep],
                    vertex_group: VertexGroupReport {
                        elements: self.hom(rep, rep).iter().map(|&m| self.morphisms[m].id).collect(),
                        order: g.order(),
                        fingerprint: g.fingerprint(),
                        name: g.name().map(str::to_owned),
                        table: g.table().to_vec(),
                    },
                    abelian: g.is_abelian(),
                    solvable: g.is_solvable(),
                }
            })
            .collect();
        GroupoidReport {
            is_abelian: classes.iter().all(|c| c.abelian),
            is_solvable: classes.iter().all(|c| c.solvable),
            is_connected: classes.len() <= 1,
            classes,
        }
    }

    /// `quotient_by_normal_system`: same objects, hom-sets modulo the system.
    /// Also returns the projection on morphism indices.
    pub fn quotient(&self, system: &NormalSubgroupSystem) -> Result<(FiniteGroupoid, Vec<usize>)> {
        let subgroups = system.resolve(self)?;
        let mut class_of = vec![usize::MAX; self.morphism_count()];
        let mut classes: Vec<(usize, usize)> = Vec::new();
        let mut reps: Vec<usize> = Vec::new();
        for a in 0..self.object_count() {
            for b in 0..self.object_count() {
                for &f in self.hom(a, b) {
                    if class_of[f] != usize::MAX {
                        continue;
                    }
                    let c = classes.len();
                    classes.push((a, b));
                    reps.push(f);
                    for &g in self.hom(a, b) {
                        // f ~ g  iff  g⁻¹ f ∈ N_a
                        if subgroups[a].contains(&self.compose(self.inverse(g), f)) {
                            class_of[g] = c;
                        }
                    }
                }
            }
        }
        let morphisms = classes.iter().map(|&(a, b)| (a, b, None)).collect();
        let q = FiniteGroupoid::from_fn(self.object_count(), morphisms, |g, f| class_of[self.compose(reps[g], reps[f])])?;
        let q = FiniteGroupoid { object_ids: self.object_ids.clone(), ..q };
        Ok((q, class_of))
    }

    pub fn is_automorphism(&self, auto: &GroupoidAutomorphism) -> bool {
        self.check_automorphism(auto).is_ok()
    }

    pub fn check_automorphism(&self, auto: &GroupoidAutomorphism) -> Result<()> {
        let bad = |s: &str| Err(GroupoidError::NotAnAutomorphism(s.to_owned()));
        if auto.objects.len() != self.object_count() || auto.morphisms.len() != self.morphism_count() {
            return bad("wrong lengths");
        }
        let is_bijection = |v: &[usize]| {
            let set: BTreeSet<_> = v.iter().collect();
            set.len() == v.len() && v.iter().all(|&x| x < v.len())
        };
        if !is_bijection(&auto.objects) || !is_bijection(&auto.morphisms) {
            return bad("not a bijection");
        }
        for m in 0..self.morphism_count() {
            let im = auto.morphisms[m];
            if self.source(im) != auto.objects[self.source(m)] || self.target(im) != auto.objects[self.target(m)] {
                return bad("does not respect source/target");
            }
        }
        for g in 0..self.morphism_count() {
            for f in 0..self.morphism_count() {
                if let Some(h) = self.try_compose(g, f) {
                    if self.compose(auto.morphisms[g], auto.morphisms[f]) != auto.morphisms[h] {
                        return bad("does not respect composition");
                    }
                }
            }
        }
        Ok(())
    }

    /// `find_coherent_section`: a choice `s(a, b) ∈ Mor(a, b)` with
    /// `s(b, c) ∘ s(a, b) = s(a, c)`, invariant under every automorphism in
    /// `symmetry` (`σ(s(a, b)) = s(σa, σb)`). With no symmetry every connected
    /// groupoid has one; the invariant version is the finite stand-in for a
    /// section that is definable over the base.
    ///
    /// Backtracking over the star tree at object 0: the tree edges `s(0, b)`
    /// are chosen in order and everything else is derived from them; the
    /// invariance constraints are the chords, checked as soon as all the
    /// objects they mention are assigned.
    pub fn find_coherent_section(&self, symmetry: &[GroupoidAutomorphism]) -> Result<Option<Section>> {
        self.require_connected()?;
        for s in symmetry {
            self.check_automorphism(s)?;
        }
        let k = self.object_count();
        if k == 0 {
            return Ok(Some(Section { choice: Vec::new() }));
        }
        let mut tree = vec![usize::MAX; k];
        tree[0] = self.identity(0);
        Ok(self.extend_section(symmetry, &mut tree, 1).then(|| self.section_from_tree(&tree)))
    }

    fn derived(&self, tree: &[usize], a: usize, b: usize) -> usize {
        self.compose(tree[b], self.inverse(tree[a]))
    }

    fn extend_section(&self, symmetry: &[GroupoidAutomorphism], tree: &mut Vec<usize>, next: usize) -> bool {
        // chords among objects 0..next are now determined
        let assigned = next;
        for s in symmetry {
            for a in 0..assigned {
                for b in 0..assigned {
                    let (sa, sb) = (s.objects[a], s.objects[b]);
                    if sa < assigned && sb < assigned && s.morphisms[self.derived(tree, a, b)] != self.derived(tree, sa, sb) {
                        return false;
                    }
                }
            }
        }
        if next == tree.len() {
            return true;
        }
        for &m in self.hom(0, next) {
            tree[next] = m;
            if self.extend_section(symmetry, tree, next + 1) {
                return true;
            }
        }
        tree[next] = usize::MAX;
        false
    }

    fn section_from_tree(&self, tree: &[usize]) -> Section {
        let k = tree.len();
        Section { choice: (0..k).map(|a| (0..k).map(|b| self.derived(tree, a, b)).collect()).collect() }
    }

    /// Checks the coherence laws of a section (and invariance under `symmetry`).
    pub fn is_coherent_section(&self, s: &Section, symmetry: &[GroupoidAutomorphism]) -> bool {
        let k = self.object_count();
        if s.choice.len() != k || s.choice.iter().any(|row| row.len() != k) {
            return false;
        }
        let typed = (0..k).all(|a| (0..k).all(|b| self.source(s.get(a, b)) == a && self.target(s.get(a, b)) == b));
        typed
            && (0..k).all(|a| s.get(a, a) == self.identity(a))
            && (0..k).all(|a| {
                (0..k).all(|b| {
                    s.get(b, a) == self.inverse(s.get(a, b))
                        && (0..k).all(|c| self.compose(s.get(b, c), s.get(a, b)) == s.get(a, c))
                })
            })
            && symmetry.iter().all(|sym| {
                (0..k).all(|a| (0..k).all(|b| sym.morphisms[s.get(a, b)] == s.get(sym.objects[a], sym.objects[b])))
            })
    }

    /// The wide subgroupoid spanned by a section: every hom-set a singleton.
    pub fn section_subgroupoid(&self, s: &Section) -> FiniteGroupoid {
        let k = self.object_count();
        let morphisms = (0..k * k).map(|i| (i / k, i % k, None)).collect();
        let mut sub = FiniteGroupoid::from_fn(k, morphisms, |g, f| (f / k) * k + g % k).expect("pair groupoid");
        sub.object_ids = self.object_ids.clone();
        for (i, m) in sub.morphisms.iter_mut().enumerate() {
            m.id = self.morphisms[s.get(i / k, i % k)].id;
        }
        sub
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupoidReport {
    pub classes: Vec<IsoClassReport>,
    pub is_abelian: bool,
    pub is_solvable: bool,
    pub is_connected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoClassReport {
    pub objects: Vec<u64>,
    pub representative: u64,
    pub vertex_group: VertexGroupReport,
    pub abelian: bool,
    pub solvable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexGroupReport {
    /// Morphism ids; row/column `i` of `table` refers to `elements[i]`.
    pub elements: Vec<u64>,
    pub order: usize,
    pub fingerprint: Fingerprint,
    pub name: Option<String>,
    pub table: Vec<Vec<usize>>,
}

/// Per-object subsets of vertex groups, given by morphism ids. Objects not
/// listed get the trivial subgroup.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NormalSubgroupSystem {
    pub subgroups: BTreeMap<u64, Vec<u64>>,
}

impl NormalSubgroupSystem {
    /// Full vertex group at every object.
    pub fn full(g: &FiniteGroupoid) -> Self {
        let subgroups = (0..g.object_count())
            .map(|a| (g.object_id(a), g.hom(a, a).iter().map(|&m| g.morphism(m).id).collect()))
            .collect();
        NormalSubgroupSystem { subgroups }
    }

    /// Validates against `g`, returning per-object morphism-index sets.
    pub fn resolve(&self, g: &FiniteGroupoid) -> Result<Vec<BTreeSet<usize>>> {
        let mut sets: Vec<BTreeSet<usize>> = (0..g.object_count()).map(|a| BTreeSet::from([g.identity(a)])).collect();
        for (&o, ids) in &self.subgroups {
            let a = g.object_index(o).ok_or_else(|| GroupoidError::Malformed(format!("unknown object {o}")))?;
            let mut set = BTreeSet::new();
            for &id in ids {
                let m = g.morphism_index(id).ok_or_else(|| GroupoidError::Malformed(format!("unknown morphism {id}")))?;
                if g.source(m) != a || g.target(m) != a {
                    return Err(GroupoidError::NotASubgroup { object: o });
                }
                set.insert(m);
            }
            sets[a] = set;
        }
        for (a, set) in sets.iter().enumerate() {
            let closed = set.contains(&g.identity(a))
                && set.iter().all(|&x| set.iter().all(|&y| set.contains(&g.compose(x, g.inverse(y)))));
            if !closed {
                return Err(GroupoidError::NotASubgroup { object: g.object_id(a) });
            }
            for &h in g.hom(a, a) {
                for &n in set {
                    if !set.contains(&g.compose(g.compose(h, n), g.inverse(h))) {
                        return Err(GroupoidError::NotNormal {
                            object: g.object_id(a),
                            element: g.morphism(n).id,
                            by: g.morphism(h).id,
                        });
                    }
                }
            }
        }
        // h N_a h⁻¹ = N_b for every h: a -> b
        for h in 0..g.morphism_count() {
            let (a, b) = (g.source(h), g.target(h));
            let conj: BTreeSet<usize> = sets[a].iter().map(|&n| g.compose(g.compose(h, n), g.inverse(h))).collect();
            if conj != sets[b] {
                return Err(GroupoidError::NotTransportStable { morphism: g.morphism(h).id });
            }
        }
        Ok(sets)
    }
}

/// A coherent section, `choice[a][b] ∈ Mor(a, b)` (morphism indices).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub choice: Vec<Vec<usize>>,
}

impl Section {
    pub fn get(&self, a: usize, b: usize) -> usize {
        self.choice[a][b]
    }
}

/// A groupoid automorphism given by index permutations of objects and morphisms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupoidAutomorphism {
    pub objects: Vec<usize>,
    pub morphisms: Vec<usize>,
}

/// A functor into finite sets: fiber `a` is `0..fibers[a]`, and morphism `m`
/// acts by the bijection `action[m]` from its source fiber to its target fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteFunctor {
    fibers: Vec<usize>,
    action: Vec<Vec<usize>>,
    labels: Option<Vec<Vec<u64>>>,
}

/// Serialized functor, keyed by object and morphism ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFunctor {
    pub fibers: Vec<RawFiber>,
    pub actions: Vec<RawAction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFiber {
    pub object: u64,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAction {
    pub morphism: u64,
    pub map: Vec<usize>,
}

impl ConcreteFunctor {
    /// Checks typing, bijectivity, identities and `F(g∘f) = F(g)F(f)`.
    pub fn new(g: &FiniteGroupoid, fibers: Vec<usize>, action: Vec<Vec<usize>>, labels: Option<Vec<Vec<u64>>>) -> Result<Self> {
        let bad = |s: String| Err(GroupoidError::NotAFunctor(s));
        if fibers.len() != g.object_count() || action.len() != g.morphism_count() {
            return bad("fiber or action count does not match the groupoid".into());
        }
        if let Some(ls) = &labels {
            if ls.len() != fibers.len() || ls.iter().zip(&fibers).any(|(l, &n)| l.len() != n) {
                return bad("fiber labels do not match fiber sizes".into());
            }
        }
        for (m, map) in action.iter().enumerate() {
            let (a, b) = (g.source(m), g.target(m));
            let targets: BTreeSet<_> = map.iter().collect();
            if map.len() != fibers[a] || fibers[a] != fibers[b] || targets.len() != map.len() || map.iter().any(|&x| x >= fibers[b]) {
                return bad(format!("morphism {} does not act bijectively between its fibers", g.morphism(m).id));
            }
        }
        for a in 0..g.object_count() {
            if action[g.identity(a)].iter().enumerate().any(|(i, &x)| i != x) {
                return bad(format!("identity of object {} acts nontrivially", g.object_id(a)));
            }
        }
        for gm in 0..g.morphism_count() {
            for f in 0..g.morphism_count() {
                if let Some(h) = g.try_compose(gm, f) {
                    let ok = (0..fibers[g.source(f)]).all(|x| action[h][x] == action[gm][action[f][x]]);
                    if !ok {
                        return bad(format!(
                            "F({} ∘ {}) differs from F({}) F({})",
                            g.morphism(gm).id,
                            g.morphism(f).id,
                            g.morphism(gm).id,
                            g.morphism(f).id
                        ));
                    }
                }
            }
        }
        Ok(ConcreteFunctor { fibers, action, labels })
    }

    pub fn from_raw(g: &FiniteGroupoid, raw: &RawFunctor) -> Result<Self> {
        let mut fibers = vec![usize::MAX; g.object_count()];
        let mut labels: Vec<Option<Vec<u64>>> = vec![None; g.object_count()];
        for f in &raw.fibers {
            let a = g
                .object_index(f.object)
                .ok_or_else(|| GroupoidError::NotAFunctor(format!("fiber for unknown object {}", f.object)))?;
            fibers[a] = f.size;
            labels[a] = f.labels.clone();
        }
        if let Some(a) = fibers.iter().position(|&n| n == usize::MAX) {
            return Err(GroupoidError::NotAFunctor(format!("object {} has no fiber", g.object_id(a))));
        }
        let mut action = vec![Vec::new(); g.morphism_count()];
        let mut seen = vec![false; g.morphism_count()];
        for act in &raw.actions {
            let m = g
                .morphism_index(act.morphism)
                .ok_or_else(|| GroupoidError::NotAFunctor(format!("action for unknown morphism {}", act.morphism)))?;
            action[m] = act.map.clone();
            seen[m] = true;
        }
        if let Some(m) = seen.iter().position(|s| !s) {
            return Err(GroupoidError::NotAFunctor(format!("morphism {} has no action", g.morphism(m).id)));
        }
        let labels = if labels.iter().all(Option::is_some) {
            Some(labels.into_iter().map(Option::unwrap).collect())
        } else if labels.iter().all(Option::is_none) {
            None
        } else {
            return Err(GroupoidError::NotAFunctor("fiber labels must be given for every fiber or none".into()));
        };
        Self::new(g, fibers, action, labels)
    }

    pub fn to_raw(&self, g: &FiniteGroupoid) -> RawFunctor {
        RawFunctor {
            fibers: self
                .fibers
                .iter()
                .enumerate()
                .map(|(a, &size)| RawFiber {
                    object: g.object_id(a),
                    size,
                    labels: self.labels.as_ref().map(|l| l[a].clone()),
                })
                .collect(),
            actions: self
                .action
                .iter()
                .enumerate()
                .map(|(m, map)| RawAction { morphism: g.morphism(m).id, map: map.clone() })
                .collect(),
        }
    }

    pub fn fiber_size(&self, a: usize) -> usize {
        self.fibers[a]
    }

    pub fn fiber_sizes(&self) -> &[usize] {
        &self.fibers
    }

    pub fn act(&self, m: usize, x: usize) -> usize {
        self.action[m][x]
    }

    pub fn action(&self, m: usize) -> &[usize] {
        &self.action[m]
    }

    pub fn labels(&self) -> Option<&[Vec<u64>]> {
        self.labels.as_deref()
    }

    /// First pair of distinct parallel morphisms acting identically, if any.
    pub fn faithfulness_witness(&self, g: &FiniteGroupoid) -> Option<(usize, usize)> {
        for a in 0..g.object_count() {
            for b in 0..g.object_count() {
                let hom = g.hom(a, b);
                for (i, &x) in hom.iter().enumerate() {
                    if let Some(&y) = hom[i + 1..].iter().find(|&&y| self.action[x] == self.action[y]) {
                        return Some((x, y));
                    }
                }
            }
        }
        None
    }

    pub fn is_faithful(&self, g: &FiniteGroupoid) -> bool {
        self.faithfulness_witness(g).is_none()
    }

    /// Restriction along a wide subgroupoid whose morphism ids are a subset of
    /// `g`'s (as produced by [`FiniteGroupoid::section_subgroupoid`]).
    pub fn restrict(&self, g: &FiniteGroupoid, sub: &FiniteGroupoid) -> Result<Self> {
        let action = sub
            .morphisms()
            .iter()
            .map(|m| {
                g.morphism_index(m.id)
                    .map(|i| self.action[i].clone())
                    .ok_or_else(|| GroupoidError::NotAFunctor(format!("morphism {} not in the ambient groupoid", m.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sub, self.fibers.clone(), action, self.labels.clone())
    }
}

/// Result of collapsing a connected groupoid with trivial vertex groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collapse {
    /// Each class of `E_S`, as `(object index, fiber element)` pairs.
    pub classes: Vec<Vec<(usize, usize)>>,
    /// `to_class[a][x]`: the class of element `x` of fiber `a`.
    pub to_class: Vec<Vec<usize>>,
}

impl Collapse {
    pub fn size(&self) -> usize {
        self.classes.len()
    }
}

/// `collapse_trivial`: the quotient `S` of the disjoint union of fibers by
/// `(a, x) ~ (a', x')` iff the unique `c: a -> a'` sends `x` to `x'`.
pub fn collapse_trivial(g: &FiniteGroupoid, f: &ConcreteFunctor) -> Result<Collapse> {
    g.require_connected()?;
    if let Some(a) = (0..g.object_count()).find(|&a| g.hom(a, a).len() != 1) {
        return Err(GroupoidError::NontrivialVertexGroup(g.object_id(a)));
    }
    let k = g.object_count();
    let mut to_class: Vec<Vec<usize>> = (0..k).map(|a| vec![usize::MAX; f.fiber_size(a)]).collect();
    let mut classes = Vec::new();
    for a in 0..k {
        for x in 0..f.fiber_size(a) {
            if to_class[a][x] != usize::MAX {
                continue;
            }
            let c = classes.len();
            let members: Vec<(usize, usize)> = (0..k).map(|b| (b, f.act(g.hom(a, b)[0], x))).collect();
            for &(b, y) in &members {
                to_class[b][y] = c;
            }
            classes.push(members);
        }
    }
    Ok(Collapse { classes, to_class })
}

/// The group action obtained from a coherent section: the vertex group at
/// object 0 acting on the collapse of the section's subgroupoid.
pub fn group_action_from_section(g: &FiniteGroupoid, f: &ConcreteFunctor, s: &Section) -> Result<(FiniteGroupoid, ConcreteFunctor)> {
    let sub = g.section_subgroupoid(s);
    let collapse = collapse_trivial(&sub, &f.restrict(g, &sub)?)?;
    let vertex = g.vertex_group(0);
    let elems = g.hom(0, 0);
    let mut action_groupoid = FiniteGroupoid::from_group(&vertex);
    for (i, m) in action_groupoid.morphisms.iter_mut().enumerate() {
        m.id = g.morphism(elems[i]).id;
    }
    action_groupoid.object_ids = vec![g.object_id(0)];
    // each class has exactly one member in fiber 0
    let action = elems
        .iter()
        .map(|&m| (0..collapse.size()).map(|c| collapse.to_class[0][f.act(m, collapse.classes[c][0].1)]).collect())
        .collect();
    let functor = ConcreteFunctor::new(&action_groupoid, vec![collapse.size()], action, None)?;
    Ok((action_groupoid, functor))
}

/// One matched pair of iso-classes in an equivalence of concrete groupoids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMatch {
    pub left: u64,
    pub right: u64,
    /// Fiber bijection `F1(left) -> F2(right)` conjugating one image group onto the other.
    pub bijection: Vec<usize>,
}

/// Equivalence of faithful concrete groupoids.
///
/// The finite witness: a matching of iso-classes, and for matched
/// representatives a fiber bijection `β` with `β F1(G1_a) β⁻¹ = F2(G2_b)` as
/// permutation groups. Such `β` generates a concrete groupoid structure on
/// the disjoint union extending both sides and meeting every class.
pub fn concrete_equivalence(
    g1: &FiniteGroupoid,
    f1: &ConcreteFunctor,
    g2: &FiniteGroupoid,
    f2: &ConcreteFunctor,
) -> Result<Option<Vec<ClassMatch>>> {
    for (g, f) in [(g1, f1), (g2, f2)] {
        if let Some((x, y)) = f.faithfulness_witness(g) {
            return Err(GroupoidError::NotFaithful(g.morphism(x).id, g.morphism(y).id));
        }
    }
    let image = |g: &FiniteGroupoid, f: &ConcreteFunctor, a: usize| -> BTreeSet<Perm> {
        g.hom(a, a).iter().map(|&m| Perm(f.action(m).to_vec())).collect()
    };
    let classes1 = g1.iso_classes();
    let classes2 = g2.iso_classes();
    if classes1.len() != classes2.len() {
        return Ok(None);
    }
    let mut used = vec![false; classes2.len()];
    let mut matches = Vec::new();
    for c1 in &classes1 {
        let a = c1[0];
        let img1 = image(g1, f1, a);
        let found = classes2.iter().enumerate().find_map(|(j, c2)| {
            let b = c2[0];
            if used[j] || f1.fiber_size(a) != f2.fiber_size(b) {
                return None;
            }
            let img2 = image(g2, f2, b);
            if img1.len() != img2.len() {
                return None;
            }
            conjugating_bijection(f1.fiber_size(a), &img1, &img2).map(|beta| (j, b, beta))
        });
        match found {
            Some((j, b, beta)) => {
                used[j] = true;
                matches.push(ClassMatch { left: g1.object_id(a), right: g2.object_id(b), bijection: beta });
            }
            None => return Ok(None),
        }
    }
    Ok(Some(matches))
}

/// Finds `β` with `β P β⁻¹ = Q` by backtracking over images of `0..n`.
fn conjugating_bijection(n: usize, p: &BTreeSet<Perm>, q: &BTreeSet<Perm>) -> Option<Vec<usize>> {
    fn go(n: usize, p: &BTreeSet<Perm>, q: &BTreeSet<Perm>, beta: &mut Vec<usize>, used: &mut [bool]) -> bool {
        if beta.len() == n {
            let b = Perm(beta.clone());
            let binv = b.inverse();
            return p.iter().all(|x| q.contains(&b.compose(x).compose(&binv)));
        }
        for y in 0..n {
            if !used[y] {
                used[y] = true;
                beta.push(y);
                if go(n, p, q, beta, used) {
                    return true;
                }
                beta.pop();
                used[y] = false;
            }
        }
        false
    }
    let mut beta = Vec::with_capacity(n);
    let mut used = vec![false; n];
    go(n, p, q, &mut beta, &mut used).then_some(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z3_raw() -> RawGroupoid {
        RawGroupoid {
            objects: vec![7],
            morphisms: (0..3).map(|i| RawMorphism { id: i, source: 7, target: 7, label: None }).collect(),
            compose: (0..3)
                .flat_map(|a| (0..3).map(move |b| [a, b, (a + b) % 3]))
                .collect(),
            identity: vec![[7, 0]],
        }
    }

    #[test]
    fn z3_table_is_a_groupoid() {
        let g = FiniteGroupoid::validate(&z3_raw()).unwrap();
        let report = g.classify();
        assert_eq!(report.classes.len(), 1);
        assert_eq!(report.classes[0].vertex_group.order, 3);
        assert!(report.is_abelian && report.is_connected);
    }

    #[test]
    fn pair_groupoids_are_valid() {
        let g = FiniteGroupoid::validate(&FiniteGroupoid::pair(2).to_raw()).unwrap();
        assert_eq!(g.morphism_count(), 4);
        let report = FiniteGroupoid::pair(3).classify();
        assert_eq!(report.classes.len(), 1);
        assert_eq!(report.classes[0].vertex_group.order, 1);
        assert!(report.is_abelian);
    }

    #[test]
    fn composite_with_wrong_source_is_named() {
        let mut raw = FiniteGroupoid::pair(2).to_raw();
        // (0,1) ∘ (0,0) should be (0,1); send it to (1,1) instead
        for entry in raw.compose.iter_mut() {
            if entry[0] == 1 && entry[1] == 0 {
                entry[2] = 3;
            }
        }
        let err = FiniteGroupoid::validate(&raw).unwrap_err();
        assert_eq!(err, GroupoidError::AxiomViolation(Violation::WrongHomSet { g: 1, f: 0, composite: 3 }));
    }

    #[test]
    fn compose_entry_for_non_composable_pair() {
        let mut raw = FiniteGroupoid::pair(2).to_raw();
        raw.compose.push([0, 3, 0]);
        assert!(matches!(
            FiniteGroupoid::validate(&raw),
            Err(GroupoidError::AxiomViolation(Violation::NotComposable { g: 0, f: 3 }))
        ));
    }

    #[test]
    fn missing_entries_and_bad_ids() {
        let mut raw = z3_raw();
        raw.compose.pop();
        assert!(matches!(
            FiniteGroupoid::validate(&raw),
            Err(GroupoidError::AxiomViolation(Violation::MissingComposite { g: 2, f: 2 }))
        ));
        let mut raw = z3_raw();
        raw.morphisms[1].id = 0;
        assert!(matches!(FiniteGroupoid::validate(&raw), Err(GroupoidError::Malformed(_))));
    }

    #[test]
    fn non_associative_table_is_rejected() {
        // a loop whose table is a quasigroup with unit but not associative
        let table = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]];
        let raw = RawGroupoid {
            objects: vec![0],
            morphisms: (0..5).map(|i| RawMorphism { id: i, source: 0, target: 0, label: None }).collect(),
            compose: (0..5).flat_map(|a| (0..5).map(move |b| [a as u64, b as u64, table[a][b] as u64])).collect(),
            identity: vec![[0, 0]],
        };
        assert!(matches!(
            FiniteGroupoid::validate(&raw),
            Err(GroupoidError::AxiomViolation(Violation::NonAssociative { .. }))
        ));
    }

    #[test]
    fn z4_mod_two_is_z2() {
        let g = FiniteGroupoid::from_group(&FiniteGroup::cyclic(4));
        let n = NormalSubgroupSystem { subgroups: BTreeMap::from([(0, vec![0, 2])]) };
        let (q, proj) = g.quotient(&n).unwrap();
        assert_eq!(q.morphism_count(), 2);
        assert_eq!(proj, vec![0, 1, 0, 1]);
        assert_eq!(q.vertex_group(0).name(), Some("C2"));
    }

    #[test]
    fn non_subgroup_and_non_normal_systems() {
        let g = FiniteGroupoid::from_group(&FiniteGroup::cyclic(4));
        let n = NormalSubgroupSystem { subgroups: BTreeMap::from([(0, vec![0, 1])]) };
        assert!(matches!(g.quotient(&n), Err(GroupoidError::NotASubgroup { object: 0 })));
        let s3 = FiniteGroupoid::from_group(&FiniteGroup::symmetric(3));
        // a transposition generates a non-normal subgroup of S3
        let t = (0..6).find(|&x| FiniteGroup::symmetric(3).element_order(x) == 2).unwrap() as u64;
        let n = NormalSubgroupSystem { subgroups: BTreeMap::from([(0, vec![0, t])]) };
        assert!(matches!(s3.quotient(&n), Err(GroupoidError::NotNormal { .. })));
    }

    #[test]
    fn transport_unstable_system() {
        // two objects with vertex group Z2 each, connected; normal at one end only
        let g = crate::extension::CocycleData::trivial(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)).groupoid().unwrap().groupoid;
        let (a0, a1) = (g.object_id(0), g.object_id(1));
        let full0: Vec<u64> = g.hom(0, 0).iter().map(|&m| g.morphism(m).id).collect();
        let n = NormalSubgroupSystem { subgroups: BTreeMap::from([(a0, full0.clone())]) };
        assert!(matches!(g.quotient(&n), Err(GroupoidError::NotTransportStable { .. })));
        let mut ok = n.clone();
        ok.subgroups.insert(a1, g.hom(1, 1).iter().map(|&m| g.morphism(m).id).collect());
        assert!(g.quotient(&ok).is_ok());
    }

    #[test]
    fn collapse_of_pair_groupoid() {
        let g = FiniteGroupoid::pair(3);
        let action = vec![vec![0, 1, 2]; 9];
        let f = ConcreteFunctor::new(&g, vec![3, 3, 3], action, None).unwrap();
        let c = collapse_trivial(&g, &f).unwrap();
        assert_eq!(c.size(), 3);
        for a in 0..3 {
            assert_eq!(c.to_class[a], vec![0, 1, 2]);
        }
    }

    #[test]
    fn collapse_rejects_nontrivial_vertex_groups() {
        let g = FiniteGroupoid::from_group(&FiniteGroup::cyclic(2));
        let f = ConcreteFunctor::new(&g, vec![2], vec![vec![0, 1], vec![1, 0]], None).unwrap();
        assert_eq!(collapse_trivial(&g, &f), Err(GroupoidError::NontrivialVertexGroup(0)));
    }

    #[test]
    fn functor_laws_are_checked() {
        let g = FiniteGroupoid::from_group(&FiniteGroup::cyclic(3));
        // generator of order 3 sent to a transposition: not a functor
        let bad = ConcreteFunctor::new(&g, vec![3], vec![vec![0, 1, 2], vec![1, 0, 2], vec![0, 2, 1]], None);
        assert!(matches!(bad, Err(GroupoidError::NotAFunctor(_))));
        let trivial = ConcreteFunctor::new(&g, vec![1], vec![vec![0]; 3], None).unwrap();
        assert_eq!(trivial.faithfulness_witness(&g), Some((0, 1)));
    }

    #[test]
    fn equivalence_of_concrete_groupoids() {
        // Z2 acting on 2 points vs. the same action spread over a connected 2-object groupoid.
        let z2 = FiniteGroupoid::from_group(&FiniteGroup::cyclic(2));
        let act = ConcreteFunctor::new(&z2, vec![2], vec![vec![0, 1], vec![1, 0]], None).unwrap();
        let data = crate::extension::CocycleData::trivial(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2));
        let built = data.groupoid().unwrap();
        // faithful 2-point functor on the cocycle groupoid: label k acts by +k
        let two_point = ConcreteFunctor::new(
            &built.groupoid,
            vec![2, 2],
            built.groupoid.morphisms().iter().map(|m| if m.label == Some(0) { vec![0, 1] } else { vec![1, 0] }).collect(),
            None,
        )
        .unwrap();
        assert!(concrete_equivalence(&z2, &act, &built.groupoid, &two_point).unwrap().is_some());
        // Z2 acting on 3 points (fixing one) is not equivalent to the regular action
        let act3 = ConcreteFunctor::new(&z2, vec![3], vec![vec![0, 1, 2], vec![1, 0, 2]], None).unwrap();
        assert!(concrete_equivalence(&z2, &act, &z2, &act3).unwrap().is_none());
        // Z3 vs Z2: different image orders
        let z3 = FiniteGroupoid::from_group(&FiniteGroup::cyclic(3));
        let act_z3 = ConcreteFunctor::new(&z3, vec![3], vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]], None).unwrap();
        assert!(concrete_equivalence(&z2, &act3, &z3, &act_z3).unwrap().is_none());
    }
}
