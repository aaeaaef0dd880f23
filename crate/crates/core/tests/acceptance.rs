//! End-to-end acceptance run. Prints one line per criterion and exits
//! nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

use gcov_core::amalgam::{
    check_3ul, check_n_property, check_su, compatible_families, glue, solve, solve_with_automorphism, stepup_problem,
    stepup_solve, AmalgamationProblem, AutomorphicProblem, Parity, PureSet, TheoryKind,
};
use gcov_core::cover::{build_cover_with, cocycle_cover, covers_isomorphic_over_j, is_split};
use gcov_core::extension::{all_normalized_cocycles, extend_groupoid, is_coboundary, CocycleData, ExtensionInput};
use gcov_core::finstruct::{FiniteStructure, SearchLimits};
use gcov_core::group::FiniteGroup;
use gcov_core::groupoid::{FiniteGroupoid, RawGroupoid, RawMorphism};
use gcov_core::linear::{
    code_flagged_line, code_point_set, code_subspace, decode_subspace, root_torsor, Field, FlaggedSpace, LinearError,
    Subspace, SubspaceCode,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn limits() -> SearchLimits {
    SearchLimits::with_universe(512)
}

// ---------------------------------------------------------------------------
// 1. groupoid laws

/// Connected components `pair(n) × G`, laid out as `(a, b, g)` blocks.
fn components(parts: &[(usize, FiniteGroup)]) -> FiniteGroupoid {
    let mut morphisms = Vec::new();
    let mut info = Vec::new();
    let mut offset = 0;
    for (k, (n, g)) in parts.iter().enumerate() {
        for a in 0..*n {
            for b in 0..*n {
                for x in g.elements() {
                    morphisms.push((offset + a, offset + b, None));
                    info.push((k, a, b, x));
                }
            }
        }
        offset += n;
    }
    let index: HashMap<(usize, usize, usize, usize), usize> = info.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    FiniteGroupoid::from_fn(offset, morphisms, |g, f| {
        let (k, _, c, y) = info[g];
        let (_, a, _, x) = info[f];
        index[&(k, a, c, parts[k].1.mul(y, x))]
    })
    .expect("product groupoids are lawful")
}

fn table_raw(table: &[Vec<u64>]) -> RawGroupoid {
    let n = table.len() as u64;
    RawGroupoid {
        objects: vec![0],
        morphisms: (0..n).map(|id| RawMorphism { id, source: 0, target: 0, label: None }).collect(),
        compose: (0..n).flat_map(|g| (0..n).map(move |f| [g, f, table[g as usize][f as usize]])).collect(),
        identity: vec![[0, 0]],
    }
}

/// Independent check of the groupoid laws directly on the raw tables.
fn raw_is_lawful(raw: &RawGroupoid) -> bool {
    let objects: HashSet<u64> = raw.objects.iter().copied().collect();
    if objects.len() != raw.objects.len() {
        return false;
    }
    let mut ends = HashMap::new();
    for m in &raw.morphisms {
        if !objects.contains(&m.source) || !objects.contains(&m.target) || ends.insert(m.id, (m.source, m.target)).is_some() {
            return false;
        }
    }
    let mut comp: HashMap<(u64, u64), u64> = HashMap::new();
    for &[g, f, h] in &raw.compose {
        let (Some(&(gs, gt)), Some(&(fs, ft)), Some(&(hs, ht))) = (ends.get(&g), ends.get(&f), ends.get(&h)) else {
            return false;
        };
        if gs != ft || hs != fs || ht != gt {
            return false;
        }
        if let Some(old) = comp.insert((g, f), h) {
            if old != h {
                return false;
            }
        }
    }
    let ids: Vec<u64> = raw.morphisms.iter().map(|m| m.id).collect();
    for &g in &ids {
        for &f in &ids {
            if ends[&g].0 == ends[&f].1 && !comp.contains_key(&(g, f)) {
                return false;
            }
        }
    }
    let mut unit = HashMap::new();
    for &[a, e] in &raw.identity {
        if unit.insert(a, e).is_some() || ends.get(&e) != Some(&(a, a)) {
            return false;
        }
    }
    if unit.len() != objects.len() {
        return false;
    }
    for &f in &ids {
        let (s, t) = ends[&f];
        if comp[&(unit[&t], f)] != f || comp[&(f, unit[&s])] != f {
            return false;
        }
        if !ids.iter().any(|&g| ends[&g] == (t, s) && comp[&(g, f)] == unit[&s] && comp[&(f, g)] == unit[&t]) {
            return false;
        }
    }
    let mut into: HashMap<u64, Vec<u64>> = HashMap::new();
    for &f in &ids {
        into.entry(ends[&f].1).or_default().push(f);
    }
    for &h in &ids {
        for &g in into.get(&ends[&h].0).into_iter().flatten() {
            let hg = comp[&(h, g)];
            for &f in into.get(&ends[&g].0).into_iter().flatten() {
                if comp[&(hg, f)] != comp[&(h, comp[&(g, f)])] {
                    return false;
                }
            }
        }
    }
    true
}

fn groupoid_suite() -> Vec<(String, RawGroupoid, bool)> {
    let z = FiniteGroup::cyclic;
    let lawful: Vec<(&str, Vec<(usize, FiniteGroup)>)> = vec![
        ("trivial group", vec![(1, z(1))]),
        ("Z4", vec![(1, z(4))]),
        ("S3", vec![(1, FiniteGroup::symmetric(3))]),
        ("pair(2) x Z3", vec![(2, z(3))]),
        ("pair(3) x S3", vec![(3, FiniteGroup::symmetric(3))]),
        ("pair(8)", vec![(8, z(1))]),
        ("pair(4) x V4", vec![(4, FiniteGroup::klein())]),
        ("pair(8) x S3", vec![(8, FiniteGroup::symmetric(3))]),
        ("pair(6) x Z5", vec![(6, z(5))]),
        ("three components", vec![(2, z(2)), (3, z(1)), (1, FiniteGroup::symmetric(3))]),
        ("two components", vec![(5, z(6)), (3, z(4))]),
    ];
    let mut suite: Vec<(String, RawGroupoid, bool)> =
        lawful.into_iter().map(|(name, parts)| (name.to_string(), components(&parts).to_raw(), true)).collect();
    let raw = |i: usize| suite[i].1.clone();

    let mut bad = Vec::new();
    // a missing composite
    let mut r = raw(3);
    let pos = r.compose.iter().position(|c| c[0] != c[1] && c[0] > 2 && c[1] > 2).unwrap();
    r.compose.remove(pos);
    bad.push(("missing composite", r));
    // one entry of a group table changed
    let mut r = raw(2);
    let e = r.compose.iter_mut().find(|c| c[0] == 1 && c[1] == 2).unwrap();
    e[2] = (e[2] + 1) % 6;
    bad.push(("altered S3 entry", r));
    // composite landing in the wrong hom-set
    let mut r = raw(4);
    let wrong = r.morphisms.iter().find(|m| m.source == 2 && m.target == 2).unwrap().id;
    r.compose.iter_mut().find(|c| c[0] != c[1]).unwrap()[2] = wrong;
    bad.push(("composite in wrong hom-set", r));
    // identity pointing at a non-identity loop
    let mut r = raw(6);
    let loop_ = r.morphisms.iter().filter(|m| m.source == 0 && m.target == 0).map(|m| m.id).find(|&m| m != r.identity[0][1]).unwrap();
    r.identity[0][1] = loop_;
    bad.push(("wrong identity", r));
    // identity of another object
    let mut r = raw(9);
    r.identity[1][1] = r.identity[0][1];
    bad.push(("borrowed identity", r));
    // conflicting duplicate composite
    let mut r = raw(1);
    let c = r.compose[5];
    r.compose.push([c[0], c[1], (c[2] + 1) % 4]);
    bad.push(("conflicting composite", r));
    // composite for a non-composable pair
    let mut r = raw(9);
    let (f, g) = (r.morphisms.iter().find(|m| m.source == 0).unwrap().id, r.morphisms.iter().find(|m| m.source == 4).unwrap().id);
    r.compose.push([g, f, f]);
    bad.push(("non-composable pair composed", r));
    // the arrow category 0 -> 1: associative and unital, no inverse
    let arrow = RawGroupoid {
        objects: vec![0, 1],
        morphisms: vec![
            RawMorphism { id: 0, source: 0, target: 0, label: None },
            RawMorphism { id: 1, source: 1, target: 1, label: None },
            RawMorphism { id: 2, source: 0, target: 1, label: None },
        ],
        compose: vec![[0, 0, 0], [1, 1, 1], [2, 0, 2], [1, 2, 2]],
        identity: vec![[0, 0], [1, 1]],
    };
    bad.push(("arrow category", arrow));
    // a non-associative loop of order 5 with every element self-inverse
    let loop5 = vec![
        vec![0, 1, 2, 3, 4],
        vec![1, 0, 3, 4, 2],
        vec![2, 4, 0, 1, 3],
        vec![3, 2, 4, 0, 1],
        vec![4, 3, 1, 2, 0],
    ];
    bad.push(("order-5 loop", table_raw(&loop5)));
    suite.extend(bad.into_iter().map(|(n, r)| (n.to_string(), r, false)));
    suite
}

fn groupoid_laws() -> Outcome {
    let suite = groupoid_suite();
    ensure!(suite.len() == 20, "suite has {} groupoids", suite.len());
    let mut slowest = Duration::ZERO;
    for (name, raw, expected) in &suite {
        ensure!(raw.objects.len() <= 8, "{name}: too many objects");
        let oracle = raw_is_lawful(raw);
        ensure!(oracle == *expected, "{name}: oracle says lawful = {oracle}");
        let start = Instant::now();
        let verdict = FiniteGroupoid::validate(raw);
        if let Ok(g) = &verdict {
            let (_, ok) = g.associativity_check();
            ensure!(ok, "{name}: associativity check failed on a valid groupoid");
            ensure!(
                (0..g.object_count()).all(|a| g.vertex_group(a).order() <= 6),
                "{name}: vertex group too large"
            );
        }
        let took = start.elapsed();
        slowest = slowest.max(took);
        ensure!(took < Duration::from_secs(1), "{name}: took {took:?}");
        ensure!(verdict.is_ok() == oracle, "{name}: validate accepted = {}, oracle = {oracle}", verdict.is_ok());
        if let Err(e) = verdict {
            ensure!(
                matches!(e.kind(), "AxiomViolation" | "Malformed"),
                "{name}: unexpected error {}",
                e.kind()
            );
        }
    }
    Ok(format!("11 lawful and 9 unlawful classified; slowest {slowest:?}"))
}

// ---------------------------------------------------------------------------
// 2. extension

fn extension_bases() -> Vec<(&'static str, FiniteGroupoid)> {
    let z2_vertex = CocycleData::trivial(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)).groupoid().unwrap().groupoid;
    vec![
        ("pair(2)", FiniteGroupoid::pair(2)),
        ("pair(3)", FiniteGroupoid::pair(3)),
        ("Z2 over 2 objects", z2_vertex),
        ("Z2 over 3 objects", components(&[(3, FiniteGroup::cyclic(2))])),
    ]
}

fn extension() -> Outcome {
    let groups = [("Z4", FiniteGroup::cyclic(4)), ("S3", FiniteGroup::symmetric(3)), ("Z2xZ2", FiniteGroup::klein())];
    let mut cases = 0;
    for (bname, base) in extension_bases() {
        for (gname, grp) in &groups {
            let tag = format!("{bname} by {gname}");
            let input = ExtensionInput::with_some_embedding(base.clone(), 0, grp.clone()).map_err(|e| format!("{tag}: {e}"))?;
            let ext = extend_groupoid(&input).map_err(|e| format!("{tag}: {e}"))?;
            let g = &ext.groupoid;
            let n = g.object_count();
            for a in 0..n {
                for b in 0..n {
                    ensure!(g.hom(a, b).len() == grp.order(), "{tag}: |Mor({a},{b})| = {}", g.hom(a, b).len());
                }
            }
            FiniteGroupoid::validate(&g.to_raw()).map_err(|e| format!("{tag}: output invalid: {e}"))?;
            // Mor(*, *) against the table of G
            let phi: Vec<usize> = grp.elements().map(|x| ext.vertex_element(x)).collect();
            let image: BTreeSet<usize> = phi.iter().copied().collect();
            ensure!(image == g.hom(0, 0).iter().copied().collect(), "{tag}: vertex elements miss Mor(*,*)");
            for x in grp.elements() {
                for y in grp.elements() {
                    ensure!(g.compose(phi[x], phi[y]) == phi[grp.mul(x, y)], "{tag}: table mismatch at ({x},{y})");
                }
            }
            // the relation on triples, by enumeration
            for a in 0..n {
                for b in 0..n {
                    let ts = input.triples(a, b);
                    let eq = |s, t| input.triples_equivalent(s, t);
                    for &s in &ts {
                        ensure!(eq(s, s), "{tag}: not reflexive");
                        for &t in &ts {
                            ensure!(eq(s, t) == eq(t, s), "{tag}: not symmetric");
                            if eq(s, t) {
                                for &u in &ts {
                                    ensure!(!eq(t, u) || eq(s, u), "{tag}: not transitive");
                                }
                            }
                        }
                    }
                    let mut reps: Vec<(usize, usize, usize)> = Vec::new();
                    for &t in &ts {
                        if !reps.iter().any(|&r| eq(r, t)) {
                            reps.push(t);
                        }
                    }
                    ensure!(reps.len() == grp.order(), "{tag}: {} classes over ({a},{b})", reps.len());
                }
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} extensions checked"))
}

// ---------------------------------------------------------------------------
// 3-5. cocycles and covers

struct CoverCase {
    tag: String,
    data: CocycleData,
    kernel: usize,
    coboundary: bool,
}

fn cocycle_suite() -> Vec<CoverCase> {
    let groups = [("Z2", FiniteGroup::cyclic(2)), ("Z3", FiniteGroup::cyclic(3)), ("Z2xZ2", FiniteGroup::klein())];
    let kernels = [("Z2", FiniteGroup::cyclic(2)), ("Z3", FiniteGroup::cyclic(3))];
    let mut out = Vec::new();
    for (gn, g) in &groups {
        for (kn, k) in &kernels {
            for (i, data) in all_normalized_cocycles(g, k).into_iter().enumerate() {
                let coboundary = is_coboundary(&data).is_some();
                out.push(CoverCase { tag: format!("{gn}/{kn} #{i}"), data, kernel: k.order(), coboundary });
            }
        }
    }
    out
}

fn splitting(suite: &[CoverCase]) -> Outcome {
    let start = Instant::now();
    let base = vec!["X".to_string()];
    let mut z2z2 = (0, 0);
    for case in suite {
        let built = case.data.groupoid().map_err(|e| format!("{}: {e}", case.tag))?;
        let section = built.groupoid.find_coherent_section(&built.symmetry).map_err(|e| format!("{}: {e}", case.tag))?;
        let (n, _) = cocycle_cover(&case.data).map_err(|e| format!("{}: {e}", case.tag))?;
        let report = is_split(&n, &base, None, limits()).map_err(|e| format!("{}: {e}", case.tag))?;
        let split = report.split == Some(true);
        ensure!(
            split == case.coboundary && section.is_some() == case.coboundary,
            "{}: split {split}, coboundary {}, section {}",
            case.tag,
            case.coboundary,
            section.is_some()
        );
        if case.tag.starts_with("Z2/Z2") {
            if split {
                z2z2.0 += 1;
            } else {
                z2z2.1 += 1;
            }
        }
    }
    ensure!(z2z2 == (1, 1), "Z2/Z2 gives {} split and {} non-split", z2z2.0, z2z2.1);
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(30), "took {took:?}");
    Ok(format!("{} cocycles agree on all three tests in {took:?}", suite.len()))
}

fn compose_perm(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&x| p[x]).collect()
}

fn perm_order(p: &[usize]) -> usize {
    let id: Vec<usize> = (0..p.len()).collect();
    let mut cur = p.to_vec();
    let mut k = 1;
    while cur != id {
        cur = compose_perm(p, &cur);
        k += 1;
    }
    k
}

/// Every automorphism of `s`, by backtracking over sort-preserving maps and
/// checking each relation tuple, function entry and constant once all its
/// elements are placed.
fn brute_automorphisms(s: &FiniteStructure) -> Vec<Vec<usize>> {
    let size = s.size();
    let sort_of: Vec<usize> = (0..s.sorts().len()).flat_map(|k| s.sort_range(k).map(move |_| k)).collect();
    // checks keyed by the largest element they mention
    let mut rel_checks: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); size];
    for (ri, r) in s.relations().iter().enumerate() {
        for t in &r.tuples {
            if let Some(&m) = t.iter().max() {
                rel_checks[m].push((ri, t.clone()));
            }
        }
    }
    let mut fun_checks: Vec<Vec<(usize, Vec<usize>, usize)>> = vec![Vec::new(); size];
    for (fi, f) in s.functions().iter().enumerate() {
        for (args, &v) in &f.table {
            let m = args.iter().copied().chain([v]).max().unwrap();
            fun_checks[m].push((fi, args.clone(), v));
        }
    }
    let fixed: Vec<usize> = s.constants().iter().map(|c| c.element).collect();
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; size];
    let mut used = vec![false; size];
    fn go(
        s: &FiniteStructure,
        e: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        sort_of: &[usize],
        rel_checks: &[Vec<(usize, Vec<usize>)>],
        fun_checks: &[Vec<(usize, Vec<usize>, usize)>],
        fixed: &[usize],
        out: &mut Vec<Vec<usize>>,
    ) {
        if e == map.len() {
            out.push(map.clone());
            return;
        }
        for y in s.sort_range(sort_of[e]) {
            if used[y] || (fixed.contains(&e) && y != e) {
                continue;
            }
            map[e] = y;
            let ok = rel_checks[e].iter().all(|(ri, t)| {
                let img: Vec<usize> = t.iter().map(|&x| map[x]).collect();
                s.relations()[*ri].tuples.contains(&img)
            }) && fun_checks[e].iter().all(|(fi, args, v)| {
                let img: Vec<usize> = args.iter().map(|&x| map[x]).collect();
                s.functions()[*fi].table.get(&img) == Some(&map[*v])
            });
            if ok {
                used[y] = true;
                go(s, e + 1, map, used, sort_of, rel_checks, fun_checks, fixed, out);
                used[y] = false;
            }
        }
        map[e] = usize::MAX;
    }
    go(s, 0, &mut map, &mut used, &sort_of, &rel_checks, &fun_checks, &fixed, &mut out);
    out
}

fn exact_sequence(suite: &[CoverCase]) -> Outcome {
    let base = vec!["X".to_string()];
    for case in suite {
        let (n, _) = cocycle_cover(&case.data).map_err(|e| format!("{}: {e}", case.tag))?;
        let r = is_split(&n, &base, None, limits()).map_err(|e| format!("{}: {e}", case.tag))?;
        ensure!(
            r.total.order == r.kernel.order * r.image.order,
            "{}: |Aut| = {} but {} x {}",
            case.tag,
            r.total.order,
            r.kernel.order,
            r.image.order
        );
        let vertex = case.data.groupoid().unwrap().groupoid.vertex_group(0).order();
        ensure!(vertex == case.kernel, "{}: vertex group of order {vertex}", case.tag);
        ensure!(r.kernel.order == vertex as u128, "{}: kernel of order {}", case.tag, r.kernel.order);
    }
    // the two Z2/Z2 covers against a brute-force automorphism count
    let mut orders = Vec::new();
    for (twist, expect_four) in [(1usize, true), (0, false)] {
        let data = CocycleData::new(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2), vec![vec![0, 0], vec![0, twist]]).unwrap();
        let (n, _) = cocycle_cover(&data).unwrap();
        let r = is_split(&n, &base, None, limits()).map_err(|e| e.to_string())?;
        let auts = brute_automorphisms(&n);
        let x = n.sorts().iter().position(|s| s.name == "X").unwrap();
        let kernel = auts.iter().filter(|p| n.sort_range(x).all(|e| p[e] == e)).count();
        let four = auts.iter().any(|p| perm_order(p) == 4);
        ensure!(auts.len() as u128 == r.total.order, "twist {twist}: brute force finds {} automorphisms", auts.len());
        ensure!(kernel as u128 == r.kernel.order, "twist {twist}: brute-force kernel {kernel}");
        ensure!(four == expect_four && r.total.has_element_of_order(4) == expect_four, "twist {twist}: order-4 element {four}");
        orders.push(auts.len());
    }
    Ok(format!("{} covers exact; Z2/Z2 automorphism groups of orders {:?}, order 4 element only when twisted", suite.len(), orders))
}

fn cover_uniqueness(suite: &[CoverCase]) -> Outcome {
    let mut count = 0;
    for case in suite {
        let built = case.data.groupoid().unwrap();
        let g = &built.groupoid;
        let classes = g.iso_classes();
        let first: Vec<usize> = classes.iter().map(|c| c[0]).collect();
        let last: Vec<usize> = classes.iter().map(|c| *c.last().unwrap()).collect();
        let c1 = build_cover_with(g, &built.functor, &first).map_err(|e| format!("{}: {e}", case.tag))?;
        let c2 = build_cover_with(g, &built.functor, &last).map_err(|e| format!("{}: {e}", case.tag))?;
        let iso = covers_isomorphic_over_j(&c1, &c2, limits()).map_err(|e| format!("{}: {e}", case.tag))?;
        ensure!(iso.is_some(), "{}: covers differ over j", case.tag);
        count += 1;
    }
    Ok(format!("{count} groupoids give covers isomorphic over j"))
}

// ---------------------------------------------------------------------------
// 6-9. amalgamation

fn n_property() -> Outcome {
    for theory in [TheoryKind::PureSet, TheoryKind::VectorSpace { q: 2, max_dim: 1 }] {
        let r = check_n_property(&theory, 3, 8, limits()).map_err(|e| e.to_string())?;
        ensure!(r.existence && r.uniqueness, "{theory:?}: existence {}, uniqueness {}", r.existence, r.uniqueness);
    }
    let mut solved = 0;
    for (theory, bound) in [(TheoryKind::PureSet, 8), (TheoryKind::VectorSpace { q: 2, max_dim: 1 }, 16)] {
        let instances = theory.plugin().instances(4, bound).map_err(|e| e.to_string())?;
        ensure!(!instances.is_empty(), "{theory:?}: no four-index instances");
        for p in instances {
            let partial = stepup_problem(&p, 3).map_err(|e| e.to_string())?;
            stepup_solve(&partial, 3, limits()).map_err(|e| format!("{theory:?}: {e}"))?;
            solved += 1;
        }
    }
    Ok(format!("3-existence and 3-uniqueness hold; {solved} step-up fills from edges succeed"))
}

/// Brute force: can every fiber be labelled by {0,1} so that `R` is exactly
/// the zero-sum relation on each triangle?
fn labelling_exists(s: &FiniteStructure) -> bool {
    let over = &s.relation("over").unwrap().tuples;
    let mut ends: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for t in over {
        ends.entry(t[0]).or_default().push(t[1]);
    }
    let mut fibers: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (f, mut e) in ends {
        e.sort_unstable();
        fibers.entry(e).or_default().push(f);
    }
    let points: Vec<usize> = s.sort_range(0).collect();
    let fiber = |a: usize, b: usize| fibers[&vec![a.min(b), a.max(b)]].clone();
    let r = &s.relation("R").unwrap().tuples;
    let pairs: Vec<Vec<usize>> = fibers.values().cloned().collect();
    (0..1u64 << pairs.len()).any(|bits| {
        let mut label = HashMap::new();
        for (k, f) in pairs.iter().enumerate() {
            let b = (bits >> k & 1) as usize;
            label.insert(f[0], b);
            label.insert(f[1], 1 - b);
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                for k in j + 1..points.len() {
                    let (p, q, w) = (points[i], points[j], points[k]);
                    for x in fiber(p, q) {
                        for y in fiber(q, w) {
                            for z in fiber(p, w) {
                                if r.contains(&vec![x, y, z]) != ((label[&x] + label[&y] + label[&z]) % 2 == 0) {
                                    return false;
                                }
                            }
                        }
                    }
                }
            }
        }
        true
    })
}

/// Brute force over all symmetric ternary relations on the glued triangle.
fn triangle_count(p: &AmalgamationProblem) -> usize {
    let u = glue(p).unwrap().union;
    let over = u.relation("over").unwrap().tuples.clone();
    let pts: Vec<usize> = u.sort_range(0).collect();
    let fib: Vec<usize> = u.sort_range(1).collect();
    let by_pair = |a: usize, b: usize| -> Vec<usize> {
        fib.iter().copied().filter(|&f| over.contains(&vec![f, a]) && over.contains(&vec![f, b])).collect()
    };
    let (fa, fb, fc) = (by_pair(pts[0], pts[1]), by_pair(pts[1], pts[2]), by_pair(pts[0], pts[2]));
    let mut triples = Vec::new();
    for &x in &fa {
        for &y in &fb {
            for &z in &fc {
                triples.push([x, y, z]);
            }
        }
    }
    let mut count = 0;
    for bits in 0..1u32 << triples.len() {
        let mut rel = BTreeSet::new();
        for (k, t) in triples.iter().enumerate() {
            if bits >> k & 1 == 1 {
                for o in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                    rel.insert(o.iter().map(|&i| t[i]).collect::<Vec<_>>());
                }
            }
        }
        let mut top = FiniteStructure::new();
        let ps = top.add_sort("P", pts.len());
        let fs = top.add_sort("F", fib.len());
        top.add_relation("over", vec![fs, ps], over.iter().cloned()).unwrap();
        top.add_relation("R", vec![fs, fs, fs], rel).unwrap();
        if labelling_exists(&top) {
            count += 1;
        }
    }
    count
}

fn parity() -> Outcome {
    let r = check_n_property(&TheoryKind::Parity, 3, 8, limits()).map_err(|e| e.to_string())?;
    ensure!(r.existence, "3-existence fails");
    ensure!(!r.uniqueness, "3-uniqueness holds");
    let triangle = Parity::problem(3, None).unwrap();
    let solved = solve(&triangle, limits()).map_err(|e| e.to_string())?.count();
    let brute = triangle_count(&triangle);
    ensure!(solved == 2 && brute == 2, "triangle: solver {solved}, brute force {brute}");
    ensure!(r.witness.uniqueness.as_ref().map(|w| w.solutions) == Some(2), "witness does not have 2 solutions");
    let (mut odd, mut even) = (0, 0);
    for bits in 0..16u8 {
        let par: Vec<u8> = (0..4).map(|k| bits >> k & 1).collect();
        let p = Parity::problem(4, Some(&par)).unwrap();
        let count = solve(&p, limits()).map_err(|e| e.to_string())?.count();
        let brute = usize::from(labelling_exists(&glue(&p).unwrap().union));
        ensure!(count == brute, "parities {par:?}: solver {count}, brute force {brute}");
        if par.iter().sum::<u8>() % 2 == 1 {
            ensure!(count == 0, "odd tetrahedron {par:?} has {count} solutions");
            odd += 1;
        } else {
            ensure!(count >= 1, "even tetrahedron {par:?} has no solution");
            even += 1;
        }
    }
    let r4 = check_n_property(&TheoryKind::Parity, 4, 16, limits()).map_err(|e| e.to_string())?;
    ensure!(!r4.existence, "4-existence holds");
    Ok(format!("triangle has 2 tops; {odd} odd tetrahedra have none, {even} even ones have some"))
}

fn criteria() -> Outcome {
    let theories = [
        TheoryKind::PureSet,
        TheoryKind::VectorSpace { q: 2, max_dim: 2 },
        TheoryKind::VectorSpace { q: 3, max_dim: 1 },
        TheoryKind::Parity,
    ];
    let mut checked = 0;
    for theory in theories {
        for p in theory.plugin().instances(3, 9).map_err(|e| e.to_string())? {
            let set = solve(&p, limits()).map_err(|e| e.to_string())?;
            for sol in &set.solutions {
                let r = check_3ul(&p, sol, limits()).map_err(|e| e.to_string())?;
                ensure!(r.condition1 == (set.count() == 1), "{theory:?}: condition (1) is {} with {} solutions", r.condition1, set.count());
                ensure!(r.condition1 == r.condition2, "{theory:?}: (1) and (2) disagree");
                for u0 in p.maximal_faces() {
                    let su = check_su(&p, sol, u0, limits()).map_err(|e| e.to_string())?;
                    ensure!(su.agree, "{theory:?}: (3) and (4) disagree at face {u0:b}");
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} solved triangles"))
}

fn automorphisms() -> Outcome {
    let mut solved = 0;
    for (base, sizes) in [(0, vec![1, 1, 1]), (1, vec![1, 1, 1]), (2, vec![1, 1, 1]), (1, vec![2, 1, 1])] {
        let p = PureSet::problem(base, &sizes).map_err(|e| e.to_string())?;
        let families = compatible_families(&p, 1000, limits()).map_err(|e| e.to_string())?;
        ensure!(!families.is_empty(), "no compatible family");
        for f in families {
            let ap = AutomorphicProblem::new(p.clone(), f).map_err(|e| e.to_string())?;
            let r = solve_with_automorphism(&ap, limits()).map_err(|e| format!("pure set base {base}: {e}"))?;
            ensure!(r.solution.top.is_automorphism(&r.sigma), "sigma is not an automorphism");
            solved += 1;
        }
    }
    let p = Parity::problem(3, None).unwrap();
    let (mut refused, mut fine) = (0, 0);
    for f in compatible_families(&p, 1000, limits()).map_err(|e| e.to_string())? {
        let flipped = [0b011u32, 0b101, 0b110]
            .iter()
            .filter(|&&u| p.face(u).unwrap().sort_range(1).any(|x| f[&u][x] != x))
            .count();
        let ap = AutomorphicProblem::new(p.clone(), f).map_err(|e| e.to_string())?;
        match solve_with_automorphism(&ap, limits()) {
            Ok(_) => {
                ensure!(flipped % 2 == 0, "odd flip family was extended");
                fine += 1;
            }
            Err(e) => {
                ensure!(flipped % 2 == 1 && e.kind() == "NoEquivariantExtension", "family with {flipped} flips refused: {e}");
                refused += 1;
            }
        }
    }
    ensure!(refused > 0 && fine > 0, "parity families: {fine} extended, {refused} refused");
    Ok(format!("{solved} pure-set families extend; parity: {fine} extend, {refused} odd flips refused"))
}

// ---------------------------------------------------------------------------
// 10. linear codes

fn vectors(q: usize, n: usize) -> Vec<Vec<usize>> {
    (0..q.pow(n as u32)).map(|x| (0..n).map(|i| x / q.pow(i as u32) % q).collect()).collect()
}

/// The set of all vectors spanned by `gens`, found by enumerating
/// coefficient vectors.
fn span_set(f: &Field, gens: &[Vec<usize>], n: usize) -> BTreeSet<Vec<usize>> {
    vectors(f.q(), gens.len())
        .into_iter()
        .map(|c| gens.iter().zip(&c).fold(vec![0; n], |acc, (g, &k)| f.axpy(k, g, &acc)))
        .collect()
}

/// Every `d`-dimensional subspace of `GF(q)^n`, as vector sets.
fn all_subspaces(f: &Field, n: usize, d: usize) -> BTreeSet<BTreeSet<Vec<usize>>> {
    let vs = vectors(f.q(), n);
    let target = f.q().pow(d as u32);
    let mut out = BTreeSet::new();
    let mut stack: Vec<Vec<Vec<usize>>> = vec![vec![]];
    while let Some(gens) = stack.pop() {
        let set = span_set(f, &gens, n);
        if set.len() == target {
            out.insert(set);
            continue;
        }
        if gens.len() == d {
            continue;
        }
        for v in &vs {
            if !set.contains(v) && gens.last().map_or(true, |l| v > l) {
                let mut g = gens.clone();
                g.push(v.clone());
                stack.push(g);
            }
        }
    }
    out
}

fn linear() -> Outcome {
    let start = Instant::now();
    let f2 = Field::new(2).unwrap();
    let planes = all_subspaces(&f2, 4, 2);
    ensure!(planes.len() == 35, "{} planes in GF(2)^4", planes.len());
    let mut codes = BTreeSet::new();
    for set in &planes {
        let gens: Vec<Vec<usize>> = set.iter().cloned().collect();
        let u = Subspace::span(&f2, 4, &gens).map_err(|e| e.to_string())?;
        let code = code_subspace(&f2, &u).map_err(|e| e.to_string())?;
        let back = decode_subspace(&f2, &code).map_err(|e| e.to_string())?;
        ensure!(span_set(&f2, &back.basis, 4) == *set, "plane does not round-trip");
        codes.insert(code.coords.clone());
    }
    ensure!(codes.len() == 35, "plane codes collide");

    let f3 = Field::new(3).unwrap();
    let lines = all_subspaces(&f3, 3, 1);
    ensure!(lines.len() == 13, "{} lines in GF(3)^3", lines.len());
    let flag = FlaggedSpace::standard(&["e1", "e2", "e3"]);
    let mut line_codes = BTreeSet::new();
    for set in &lines {
        let gens: Vec<Vec<usize>> = set.iter().cloned().collect();
        let u = Subspace::span(&f3, 3, &gens).map_err(|e| e.to_string())?;
        let back = decode_subspace(&f3, &code_subspace(&f3, &u).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure!(span_set(&f3, &back.basis, 3) == *set, "line does not round-trip");
        let c = code_flagged_line(&f3, &u, &flag).map_err(|e| e.to_string())?;
        line_codes.insert((c.k, c.element));
    }
    ensure!(line_codes.len() == 13, "flagged line codes collide");

    let bad = SubspaceCode { q: 2, ambient: 4, dim: 2, coords: vec![1, 0, 0, 0, 0, 1] };
    match decode_subspace(&f2, &bad) {
        Err(LinearError::NotDecomposable { relation }) => {
            ensure!(relation.text.contains("p12p34") && relation.text.contains("p13p24"), "relation cited as {:?}", relation.text)
        }
        other => return Err(format!("p12 = p34 = 1 decoded to {other:?}")),
    }

    let pts = vectors(2, 2);
    let mut set_codes = BTreeSet::new();
    for mask in 0u32..16 {
        let z: Vec<Vec<usize>> = (0..4).filter(|&i| mask >> i & 1 == 1).map(|i| pts[i].clone()).collect();
        let c = code_point_set(&f2, 2, &z, 2).map_err(|e| e.to_string())?;
        ensure!(c.complete, "cap 2 is not complete");
        set_codes.insert(c.code);
    }
    ensure!(set_codes.len() == 16, "{} distinct point-set codes", set_codes.len());

    let gcd = |mut a: usize, mut b: usize| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    for q in [3, 5, 7] {
        let f = Field::new(q).unwrap();
        for m in [2, 3, 4] {
            let r = root_torsor(&f, m).map_err(|e| e.to_string())?;
            ensure!(r.classes.len() == gcd(m, q - 1), "q={q} m={m}: {} classes", r.classes.len());
        }
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(10), "took {took:?}");
    Ok(format!("35 planes, 13 lines, 16 point sets, 9 root counts in {took:?}"))
}

fn main() {
    let suite = cocycle_suite();
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("groupoid laws", Box::new(groupoid_laws)),
        ("groupoid extension", Box::new(extension)),
        ("cocycles and splitting", Box::new(|| splitting(&suite))),
        ("exact sequence", Box::new(|| exact_sequence(&suite))),
        ("cover uniqueness over j", Box::new(|| cover_uniqueness(&suite))),
        ("3-existence, 3-uniqueness, step-up", Box::new(n_property)),
        ("parity theory", Box::new(parity)),
        ("uniqueness criteria agree", Box::new(criteria)),
        ("automorphic amalgamation", Box::new(automorphisms)),
        ("linear codes", Box::new(linear)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{took:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{took:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
