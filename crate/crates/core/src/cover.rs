//! Covers of concrete groupoids: one new object per isomorphism class,
//! attachment to a base structure, and the exact-sequence and splitting
//! checks on the resulting automorphism groups.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finstruct::{automorphism_group, iso_over, FiniteStructure, SearchLimits, StructureError};
use crate::group::{Fingerprint, FiniteGroup, Perm};
use crate::groupoid::{ConcreteFunctor, FiniteGroupoid, GroupoidError};
use crate::permgroup::PermGroup;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error("anchor mismatch: {0}")]
    AnchorMismatch(String),
    #[error("representative {0} is not in the iso-class it is meant to represent")]
    BadRepresentative(u64),
}

impl CoverError {
    pub fn kind(&self) -> &'static str {
        match self {
            CoverError::Structure(e) => e.kind(),
            CoverError::Groupoid(e) => e.kind(),
            CoverError::AnchorMismatch(_) => "AnchorMismatch",
            CoverError::BadRepresentative(_) => "BadRepresentative",
        }
    }
}

pub type Result<T> = std::result::Result<T, CoverError>;

pub const OBJECT_SORT: &str = "O";
pub const MORPHISM_SORT: &str = "M";
pub const FIBER_SORT: &str = "D";

/// Where the pieces of a cover live inside its structure.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoverManifest {
    pub object_sort: String,
    pub morphism_sort: String,
    pub fiber_sort: String,
    /// Structure elements of the embedded objects, morphisms and fiber
    /// elements, in the input groupoid's index order.
    pub j_objects: Vec<usize>,
    pub j_morphisms: Vec<usize>,
    pub j_fibers: Vec<usize>,
    /// The new objects, one per iso-class, in class order.
    pub new_objects: Vec<usize>,
    /// Object ids of the representatives that were doubled.
    pub representatives: Vec<u64>,
    /// Sorts belonging to the base after attachment.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub base_sorts: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CoverStructure {
    pub structure: FiniteStructure,
    /// The extended groupoid on `O`; object `i` is element `i` of `O`.
    pub groupoid: FiniteGroupoid,
    pub functor: ConcreteFunctor,
    pub manifest: CoverManifest,
}

/// `build_cover` with the least object of each class as representative.
pub fn build_cover(g: &FiniteGroupoid, f: &ConcreteFunctor) -> Result<CoverStructure> {
    let reps: Vec<usize> = g.iso_classes().iter().map(|c| c[0]).collect();
    build_cover_with(g, f, &reps)
}

/// Adds, for each iso-class `ν`, an object `∗_ν` behaving exactly like the
/// representative `reps[ν]`: `Mor(∗_ν, y)` copies `Mor(r_ν, y)` and the
/// fiber over `∗_ν` copies the fiber over `r_ν`.
pub fn build_cover_with(g: &FiniteGroupoid, f: &ConcreteFunctor, reps: &[usize]) -> Result<CoverStructure> {
    let classes = g.iso_classes();
    if reps.len() != classes.len() {
        return Err(CoverError::AnchorMismatch("one representative per iso-class is required".into()));
    }
    for (c, &r) in classes.iter().zip(reps) {
        if !c.contains(&r) {
            return Err(CoverError::BadRepresentative(g.object_id(r)));
        }
    }
    let k = g.object_count();
    let total = k + reps.len();
    // π sends a new object to its representative
    let pi: Vec<usize> = (0..k).chain(reps.iter().copied()).collect();
    let mut morphisms: Vec<(usize, usize, usize)> = (0..g.morphism_count()).map(|m| (g.source(m), g.target(m), m)).collect();
    for a in 0..total {
        for b in 0..total {
            if a < k && b < k {
                continue;
            }
            for &m in g.hom(pi[a], pi[b]) {
                morphisms.push((a, b, m));
            }
        }
    }
    let index: HashMap<(usize, usize, usize), usize> = morphisms.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let ext = FiniteGroupoid::from_fn(total, morphisms.iter().map(|&(a, b, _)| (a, b, None)).collect(), |gm, fm| {
        let (_, c, m2) = morphisms[gm];
        let (a, _, m1) = morphisms[fm];
        index[&(a, c, g.compose(m2, m1))]
    })?;
    let fibers: Vec<usize> = pi.iter().map(|&a| f.fiber_size(a)).collect();
    let action = morphisms.iter().map(|&(_, _, m)| f.action(m).to_vec()).collect();
    let functor = ConcreteFunctor::new(&ext, fibers.clone(), action, None)?;

    let mut s = FiniteStructure::new();
    let o = s.add_sort(OBJECT_SORT, total);
    let msort = s.add_sort(MORPHISM_SORT, morphisms.len());
    let d = s.add_sort(FIBER_SORT, fibers.iter().sum());
    let obj = |s: &FiniteStructure, a: usize| s.element(o, a);
    let mor = |s: &FiniteStructure, m: usize| s.element(msort, m);
    let mut fiber_start = Vec::with_capacity(total);
    let mut acc = 0;
    for &size in &fibers {
        fiber_start.push(acc);
        acc += size;
    }
    let elt = |s: &FiniteStructure, a: usize, x: usize| s.element(d, fiber_start[a] + x);

    let i0 = (0..morphisms.len()).map(|m| (vec![mor(&s, m)], obj(&s, ext.source(m)))).collect::<Vec<_>>();
    let i1 = (0..morphisms.len()).map(|m| (vec![mor(&s, m)], obj(&s, ext.target(m)))).collect::<Vec<_>>();
    let id = (0..total).map(|a| (vec![obj(&s, a)], mor(&s, ext.identity(a)))).collect::<Vec<_>>();
    let r = (0..total)
        .flat_map(|a| (0..fibers[a]).map(move |x| (a, x)))
        .map(|(a, x)| (vec![elt(&s, a, x)], obj(&s, a)))
        .collect::<Vec<_>>();
    s.add_function("i0", vec![msort], o, i0)?;
    s.add_function("i1", vec![msort], o, i1)?;
    s.add_function("Id", vec![o], msort, id)?;
    s.add_function("r", vec![d], o, r)?;
    let mut comp = Vec::new();
    for gm in 0..ext.morphism_count() {
        for fm in ext.hom_into_source(gm) {
            comp.push(vec![mor(&s, gm), mor(&s, fm), mor(&s, ext.compose(gm, fm))]);
        }
    }
    s.add_relation("comp", vec![msort, msort, msort], comp)?;
    let mut act = Vec::new();
    for m in 0..ext.morphism_count() {
        let (a, b) = (ext.source(m), ext.target(m));
        for x in 0..fibers[a] {
            act.push(vec![elt(&s, a, x), mor(&s, m), elt(&s, b, functor.act(m, x))]);
        }
    }
    s.add_relation("act", vec![d, msort, d], act)?;

    // labels of the embedded groupoid are invariant data
    let mut mlabels: BTreeMap<u64, Vec<Vec<usize>>> = BTreeMap::new();
    for m in 0..g.morphism_count() {
        if let Some(l) = g.morphism(m).label {
            mlabels.entry(l).or_default().push(vec![mor(&s, m)]);
        }
    }
    for (l, tuples) in mlabels {
        s.add_relation(&format!("mlabel{l}"), vec![msort], tuples)?;
    }
    if let Some(labels) = f.labels() {
        let mut dlabels: BTreeMap<u64, Vec<Vec<usize>>> = BTreeMap::new();
        for (a, ls) in labels.iter().enumerate() {
            for (x, &l) in ls.iter().enumerate() {
                dlabels.entry(l).or_default().push(vec![elt(&s, a, x)]);
            }
        }
        for (l, tuples) in dlabels {
            s.add_relation(&format!("dlabel{l}"), vec![d], tuples)?;
        }
    }

    let manifest = CoverManifest {
        object_sort: OBJECT_SORT.into(),
        morphism_sort: MORPHISM_SORT.into(),
        fiber_sort: FIBER_SORT.into(),
        j_objects: (0..k).map(|a| obj(&s, a)).collect(),
        j_morphisms: (0..g.morphism_count()).map(|m| mor(&s, m)).collect(),
        j_fibers: (0..k).flat_map(|a| (0..fibers[a]).map(move |x| (a, x))).map(|(a, x)| elt(&s, a, x)).collect(),
        new_objects: (k..total).map(|a| obj(&s, a)).collect(),
        representatives: reps.iter().map(|&r| g.object_id(r)).collect(),
        base_sorts: Vec::new(),
    };
    Ok(CoverStructure { structure: s, groupoid: ext, functor, manifest })
}

impl FiniteGroupoid {
    /// Morphisms `f` with `target(f) = source(g)`.
    fn hom_into_source(&self, g: usize) -> Vec<usize> {
        let a = self.source(g);
        (0..self.object_count()).flat_map(|x| self.hom(x, a).iter().copied()).collect()
    }
}

impl CoverStructure {
    /// Elements of the embedded groupoid and its fibers.
    pub fn j_image(&self) -> Vec<usize> {
        let m = &self.manifest;
        m.j_objects.iter().chain(&m.j_morphisms).chain(&m.j_fibers).copied().collect()
    }

    /// Structure elements of the fiber over object `a` of the extended groupoid.
    pub fn fiber_elements(&self, a: usize) -> Vec<usize> {
        let d = self.structure.sort_index(FIBER_SORT).expect("fiber sort");
        let start: usize = (0..a).map(|b| self.functor.fiber_size(b)).sum();
        (start..start + self.functor.fiber_size(a)).map(|x| self.structure.element(d, x)).collect()
    }
}

/// Uniqueness check: two covers of the same groupoid are isomorphic over the
/// embedded groupoid and its fibers.
pub fn covers_isomorphic_over_j(c1: &CoverStructure, c2: &CoverStructure, limits: SearchLimits) -> Result<Option<Vec<usize>>> {
    if c1.j_image() != c2.j_image() {
        return Ok(None);
    }
    Ok(iso_over(&c1.structure, &c2.structure, &c1.j_image(), limits)?)
}

pub const ANCHOR_RELATION: &str = "anchor";

/// `attach_to_base`: the cover and the base as one structure, linked by the
/// relation `anchor(base element, object)` for each embedded object.
/// `anchor[i]` is the base element for object `i` of the input groupoid.
pub fn attach_to_base(base: &FiniteStructure, cover: &CoverStructure, anchor: &[usize]) -> Result<(FiniteStructure, CoverManifest)> {
    let mut manifest = cover.manifest.clone();
    manifest.base_sorts = base.sorts().iter().map(|s| s.name.clone()).collect();
    if cover.manifest.j_objects.is_empty() && cover.manifest.new_objects.is_empty() {
        if !anchor.is_empty() {
            return Err(CoverError::AnchorMismatch("anchor given for an empty cover".into()));
        }
        return Ok((base.clone(), manifest));
    }
    if anchor.len() != cover.manifest.j_objects.len() {
        return Err(CoverError::AnchorMismatch(format!(
            "{} anchors for {} objects",
            anchor.len(),
            cover.manifest.j_objects.len()
        )));
    }
    let distinct: BTreeSet<usize> = anchor.iter().copied().collect();
    if distinct.len() != anchor.len() {
        return Err(CoverError::AnchorMismatch("anchor is not injective".into()));
    }
    if let Some(&e) = anchor.iter().find(|&&e| e >= base.size()) {
        return Err(CoverError::AnchorMismatch(format!("anchor target {e} is not a base element")));
    }
    let anchor_sort = base.sort_of(anchor[0]).expect("checked");
    if anchor.iter().any(|&e| base.sort_of(e) != Some(anchor_sort)) {
        return Err(CoverError::AnchorMismatch("anchor targets lie in different sorts".into()));
    }
    let cs = &cover.structure;
    for s in cs.sorts() {
        if base.sort_index(&s.name).is_some() {
            return Err(CoverError::AnchorMismatch(format!("sort name {:?} used by both base and cover", s.name)));
        }
    }
    let mut n = FiniteStructure::new();
    for s in base.sorts().iter().chain(cs.sorts()) {
        n.add_sort(&s.name, s.size);
    }
    let shift = base.size();
    let base_sorts = base.sorts().len();
    for r in base.relations() {
        n.add_relation(&r.name, r.sorts.clone(), r.tuples.iter().cloned())?;
    }
    for f in base.functions() {
        n.add_function(&f.name, f.domain.clone(), f.codomain, f.table.iter().map(|(a, &v)| (a.clone(), v)))?;
    }
    for c in base.constants() {
        n.add_constant(&c.name, c.element)?;
    }
    let up = |t: &[usize]| t.iter().map(|&x| x + shift).collect::<Vec<_>>();
    let up_sorts = |v: &[usize]| v.iter().map(|&s| s + base_sorts).collect::<Vec<_>>();
    for r in cs.relations() {
        n.add_relation(&r.name, up_sorts(&r.sorts), r.tuples.iter().map(|t| up(t)))?;
    }
    for f in cs.functions() {
        n.add_function(&f.name, up_sorts(&f.domain), f.codomain + base_sorts, f.table.iter().map(|(a, &v)| (up(a), v + shift)))?;
    }
    let o = base_sorts + cs.sort_index(OBJECT_SORT).expect("object sort");
    n.add_relation(
        ANCHOR_RELATION,
        vec![anchor_sort, o],
        anchor.iter().zip(&cover.manifest.j_objects).map(|(&b, &obj)| vec![b, obj + shift]),
    )?;
    for v in [
        &mut manifest.j_objects,
        &mut manifest.j_morphisms,
        &mut manifest.j_fibers,
        &mut manifest.new_objects,
    ] {
        for x in v.iter_mut() {
            *x += shift;
        }
    }
    Ok((n, manifest))
}

/// Order, element-order fingerprint and (for small orders) a name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub order: u128,
    pub fingerprint: Option<Fingerprint>,
    pub name: Option<String>,
}

const TABLE_LIMIT: usize = 5040;

impl GroupSummary {
    pub fn of(g: &PermGroup) -> Self {
        if g.order() > TABLE_LIMIT as u128 {
            return GroupSummary { order: g.order(), fingerprint: None, name: None };
        }
        let (table, _) = g.to_table(TABLE_LIMIT);
        GroupSummary { order: g.order(), fingerprint: Some(table.fingerprint()), name: table.name().map(str::to_owned) }
    }

    pub fn has_element_of_order(&self, k: usize) -> bool {
        self.fingerprint.as_ref().is_some_and(|f| f.iter().any(|&(o, _)| o == k))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitReport {
    pub total: GroupSummary,
    pub kernel: GroupSummary,
    pub image: GroupSummary,
    /// Order of the full automorphism group of the base.
    pub base_order: u128,
    pub surjective: bool,
    /// `None` when only the exact sequence was requested.
    pub split: Option<bool>,
    /// Generators of a complement, as permutations of the structure.
    pub complement: Option<Vec<Perm>>,
    pub almost_split: Option<bool>,
    pub naming_bound: Option<usize>,
    /// Elements named for the almost-split test.
    pub named: Vec<usize>,
    pub image_after_naming: Option<u128>,
}

struct Sequence {
    total: PermGroup,
    kernel: PermGroup,
    image: PermGroup,
    base_order: u128,
    base_elements: Vec<usize>,
}

fn sequence(n: &FiniteStructure, base_sorts: &[String], limits: SearchLimits) -> Result<Sequence> {
    let base_elements = n.elements_of_sorts(base_sorts)?;
    let total = automorphism_group(n, &[], limits)?.group;
    let kernel = automorphism_group(n, &base_elements, limits)?.group;
    let image = total.restrict(&base_elements);
    let (base, _) = n.induced(&base_elements.iter().copied().collect())?;
    let base_order = automorphism_group(&base, &[], limits)?.order();
    Ok(Sequence { total, kernel, image, base_order, base_elements })
}

/// `check_exact_sequence`: `1 → Aut(N/M) → Aut(N) → Aut(M)`.
pub fn check_exact_sequence(n: &FiniteStructure, base_sorts: &[String], limits: SearchLimits) -> Result<SplitReport> {
    let seq = sequence(n, base_sorts, limits)?;
    Ok(SplitReport {
        total: GroupSummary::of(&seq.total),
        kernel: GroupSummary::of(&seq.kernel),
        image: GroupSummary::of(&seq.image),
        base_order: seq.base_order,
        surjective: seq.image.order() == seq.base_order,
        split: None,
        complement: None,
        almost_split: None,
        naming_bound: None,
        named: Vec::new(),
        image_after_naming: None,
    })
}

const ELEMENT_LIMIT: usize = 100_000;

fn restrict_perm(p: &Perm, subset: &[usize], pos: &HashMap<usize, usize>) -> Perm {
    Perm(subset.iter().map(|&x| pos[&p.apply(x)]).collect())
}

/// A subgroup of `total` meeting the kernel trivially and mapping onto the
/// image of `total` in the base, searched over all lifts of a generating set
/// of the image.
fn find_complement(total: &PermGroup, base_elements: &[usize]) -> Option<Vec<Perm>> {
    let pos: HashMap<usize, usize> = base_elements.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let elements = total.elements(ELEMENT_LIMIT);
    let mut fibers: BTreeMap<Perm, Vec<Perm>> = BTreeMap::new();
    for e in elements {
        fibers.entry(restrict_perm(&e, base_elements, &pos)).or_default().push(e);
    }
    let degree = base_elements.len();
    let mut image_gens: Vec<Perm> = Vec::new();
    let mut generated = PermGroup::trivial(degree);
    for q in fibers.keys() {
        if !generated.contains(q) {
            image_gens.push(q.clone());
            generated = PermGroup::from_generators(degree, &image_gens);
        }
    }
    let target = generated.order();
    let lifts: Vec<&Vec<Perm>> = image_gens.iter().map(|q| &fibers[q]).collect();
    let mut choice = vec![0usize; lifts.len()];
    loop {
        let gens: Vec<Perm> = choice.iter().zip(&lifts).map(|(&i, l)| l[i].clone()).collect();
        if PermGroup::from_generators(total.degree(), &gens).order() == target {
            return Some(gens);
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return None;
            }
            choice[i] += 1;
            if choice[i] < lifts[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// `is_split`, with the almost-split test naming every element outside the
/// base whose orbit has at most `naming_bound` elements (default: the
/// kernel order).
pub fn is_split(n: &FiniteStructure, base_sorts: &[String], naming_bound: Option<usize>, limits: SearchLimits) -> Result<SplitReport> {
    let seq = sequence(n, base_sorts, limits)?;
    let complement = find_complement(&seq.total, &seq.base_elements);
    let bound = naming_bound.unwrap_or(seq.kernel.order() as usize);
    let in_base: BTreeSet<usize> = seq.base_elements.iter().copied().collect();
    let named: Vec<usize> = seq
        .total
        .orbits()
        .into_iter()
        .filter(|o| o.len() <= bound)
        .flatten()
        .filter(|x| !in_base.contains(x))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let named_group = automorphism_group(n, &named, limits)?.group;
    let almost = find_complement(&named_group, &seq.base_elements).is_some();
    Ok(SplitReport {
        total: GroupSummary::of(&seq.total),
        kernel: GroupSummary::of(&seq.kernel),
        image: GroupSummary::of(&seq.image),
        base_order: seq.base_order,
        surjective: seq.image.order() == seq.base_order,
        split: Some(complement.is_some()),
        complement,
        almost_split: Some(almost),
        naming_bound: Some(bound),
        named,
        image_after_naming: Some(named_group.restrict(&seq.base_elements).order()),
    })
}

/// The carrier of a cocycle as a base structure: one binary relation
/// `R{g} = {(x, g·x)}` per non-identity `g`.
pub fn carrier_structure(group: &FiniteGroup, act: impl Fn(usize, usize) -> usize, size: usize) -> FiniteStructure {
    let mut s = FiniteStructure::new();
    let x = s.add_sort("X", size);
    for g in group.elements().filter(|&g| g != group.identity()) {
        s.add_relation(&format!("R{g}"), vec![x, x], (0..size).map(|p| vec![p, act(g, p)])).expect("carrier relation");
    }
    s
}

/// Cover of a cocycle groupoid attached to its carrier, anchored by identity.
pub fn cocycle_cover(data: &crate::extension::CocycleData) -> std::result::Result<(FiniteStructure, CoverManifest), CoverError> {
    let built = data.groupoid().map_err(|e| match e {
        crate::extension::ExtensionError::Groupoid(g) => CoverError::Groupoid(g),
        other => CoverError::AnchorMismatch(other.to_string()),
    })?;
    let cover = build_cover(&built.groupoid, &built.functor)?;
    let base = carrier_structure(data.group(), |g, x| data.act(g, x), data.carrier_size());
    let anchor: Vec<usize> = (0..data.carrier_size()).collect();
    attach_to_base(&base, &cover, &anchor)
}
