//! Theory plugins: membership, closure, independence, candidate tops and
//! instance generators.
//!
//! All three built-in theories use purely relational signatures, so that a
//! glued union of faces is again a finite structure.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{full, proper_subsets, AmalgamError, AmalgamationProblem, Result, MAX_DIMENSION, MAX_FACE_SIZE};
use crate::finstruct::{FiniteStructure, StructureBuilder, StructureError};

pub trait Theory {
    fn name(&self) -> &'static str;

    /// Why `s` is not a legal instance, if it is not.
    fn membership_failure(&self, s: &FiniteStructure) -> Option<String>;

    fn is_member(&self, s: &FiniteStructure) -> bool {
        self.membership_failure(s).is_none()
    }

    /// The closed set generated by `set` inside `s`.
    fn closure(&self, s: &FiniteStructure, set: &BTreeSet<usize>) -> BTreeSet<usize>;

    /// Whether closed sets `a` and `b` are independent over `c` inside `s`.
    fn independent(&self, s: &FiniteStructure, a: &BTreeSet<usize>, b: &BTreeSet<usize>, c: &BTreeSet<usize>) -> bool;

    /// Every top the theory allows over a glued union, each with the
    /// embedding of the union. The solver filters and deduplicates them.
    fn candidate_tops(&self, union: &FiniteStructure) -> Result<Vec<(FiniteStructure, Vec<usize>)>>;

    /// The generated problems of dimension `n` whose faces have at most
    /// `bound` elements.
    fn instances(&self, n: usize, bound: usize) -> Result<Vec<AmalgamationProblem>>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum TheoryKind {
    PureSet,
    VectorSpace {
        q: usize,
        /// Largest dimension of a singleton face over the base, for generators.
        #[serde(default = "one")]
        max_dim: usize,
    },
    Parity,
}

fn one() -> usize {
    1
}

impl TheoryKind {
    pub fn plugin(&self) -> Box<dyn Theory> {
        match *self {
            TheoryKind::PureSet => Box::new(PureSet),
            TheoryKind::VectorSpace { q, max_dim } => Box::new(VectorSpace { q, max_dim }),
            TheoryKind::Parity => Box::new(Parity),
        }
    }

    pub fn parse(name: &str) -> Option<TheoryKind> {
        match name {
            "pure_set" | "pure-set" => Some(TheoryKind::PureSet),
            "vector_space" | "vector-space" => Some(TheoryKind::VectorSpace { q: 2, max_dim: 1 }),
            "parity" => Some(TheoryKind::Parity),
            _ => None,
        }
    }
}

fn same_layout(s: &FiniteStructure, sorts: &[&str], relations: &[(&str, &[&str])]) -> Option<String> {
    if !s.functions().is_empty() || !s.constants().is_empty() {
        return Some("unexpected function or constant symbols".into());
    }
    if s.sorts().iter().map(|x| x.name.as_str()).ne(sorts.iter().copied()) {
        return Some(format!("sorts must be {sorts:?}"));
    }
    if s.relations().len() != relations.len() {
        return Some(format!("relations must be {:?}", relations.iter().map(|r| r.0).collect::<Vec<_>>()));
    }
    for (r, (name, rs)) in s.relations().iter().zip(relations) {
        let names: Vec<&str> = r.sorts.iter().map(|&i| s.sorts()[i].name.as_str()).collect();
        if r.name != *name || names != *rs {
            return Some(format!("expected relation {name}{rs:?}"));
        }
    }
    None
}

/// Builds a problem whose faces are induced substructures of `global`.
fn from_global(
    n: usize,
    theory: TheoryKind,
    global: &FiniteStructure,
    members: impl Fn(u32) -> BTreeSet<usize>,
) -> Result<AmalgamationProblem> {
    let mut faces = BTreeMap::new();
    let mut olds = BTreeMap::new();
    for u in proper_subsets(full(n)) {
        let (s, old) = global.induced(&members(u))?;
        faces.insert(u, s);
        olds.insert(u, old);
    }
    let mut given = BTreeMap::new();
    for (&u, old_u) in &olds {
        for i in 0..n {
            let v = u | 1 << i;
            if v == u || v == full(n) {
                continue;
            }
            let pos: BTreeMap<usize, usize> = olds[&v].iter().enumerate().map(|(k, &g)| (g, k)).collect();
            given.insert((u, v), old_u.iter().map(|g| pos[g]).collect());
        }
    }
    AmalgamationProblem::new(n, theory, faces, given)
}

fn check_dimension(n: usize) -> Result<()> {
    if !(2..=MAX_DIMENSION).contains(&n) {
        return Err(AmalgamError::SpecOutOfBounds(format!("dimension {n} outside 2..={MAX_DIMENSION}")));
    }
    Ok(())
}

/// Nondecreasing sequences of length `n` with entries in `lo..=hi`.
fn nondecreasing(n: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                let start = v.last().copied().unwrap_or(lo);
                (start..=hi).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Sets with no structure; closure is the identity and independence is
/// disjointness over the base.
#[derive(Debug, Clone, Copy)]
pub struct PureSet;

impl PureSet {
    /// Base points shared by all faces plus `extras[i]` points owned by index `i`.
    pub fn problem(base: usize, extras: &[usize]) -> Result<AmalgamationProblem> {
        let n = extras.len();
        check_dimension(n)?;
        let mut global = FiniteStructure::new();
        global.add_sort("P", base + extras.iter().sum::<usize>());
        let mut start = vec![base];
        for e in extras {
            start.push(start.last().unwrap() + e);
        }
        let members = |u: u32| -> BTreeSet<usize> {
            (0..base).chain((0..n).filter(|&i| u >> i & 1 == 1).flat_map(|i| start[i]..start[i + 1])).collect()
        };
        let biggest = (0..n).map(|i| members(full(n) & !(1 << i)).len()).max().unwrap_or(0);
        if biggest > MAX_FACE_SIZE {
            return Err(AmalgamError::SpecOutOfBounds(format!("faces of {biggest} points")));
        }
        from_global(n, TheoryKind::PureSet, &global, members)
    }
}

impl Theory for PureSet {
    fn name(&self) -> &'static str {
        "pure_set"
    }

    fn membership_failure(&self, s: &FiniteStructure) -> Option<String> {
        same_layout(s, &["P"], &[])
    }

    fn closure(&self, _: &FiniteStructure, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        set.clone()
    }

    fn independent(&self, _: &FiniteStructure, a: &BTreeSet<usize>, b: &BTreeSet<usize>, c: &BTreeSet<usize>) -> bool {
        a.intersection(b).eq(c.iter())
    }

    fn candidate_tops(&self, union: &FiniteStructure) -> Result<Vec<(FiniteStructure, Vec<usize>)>> {
        Ok(vec![(union.clone(), (0..union.size()).collect())])
    }

    fn instances(&self, n: usize, bound: usize) -> Result<Vec<AmalgamationProblem>> {
        check_dimension(n)?;
        let mut out = Vec::new();
        for extras in nondecreasing(n, 1, bound) {
            if extras.iter().sum::<usize>() - extras[0] <= bound {
                out.push(PureSet::problem(0, &extras)?);
            }
        }
        Ok(out)
    }
}

/// Vector spaces over a prime field, as the graph of addition plus the zero.
/// Since `q` is prime, additive maps are linear.
#[derive(Debug, Clone, Copy)]
pub struct VectorSpace {
    pub q: usize,
    pub max_dim: usize,
}

fn is_prime(q: usize) -> bool {
    q >= 2 && (2..q).take_while(|d| d * d <= q).all(|d| q % d != 0)
}

impl VectorSpace {
    /// `GF(q)^k`; element `x` has coordinate `j` as its `j`-th base-`q` digit.
    pub fn space(q: usize, k: usize) -> FiniteStructure {
        let size = q.pow(k as u32);
        let add = |x: usize, y: usize| -> usize {
            let (mut a, mut b, mut out, mut place) = (x, y, 0, 1);
            for _ in 0..k {
                out += (a % q + b % q) % q * place;
                a /= q;
                b /= q;
                place *= q;
            }
            out
        };
        let mut s = FiniteStructure::new();
        let v = s.add_sort("V", size);
        s.add_relation("add", vec![v, v, v], (0..size).flat_map(|x| (0..size).map(move |y| vec![x, y, add(x, y)])))
            .expect("addition table");
        s.add_relation("zero", vec![v], [vec![0]]).expect("zero");
        s
    }

    /// `base_dim` shared coordinates plus `dims[i]` coordinates owned by index `i`.
    pub fn problem(q: usize, base_dim: usize, dims: &[usize]) -> Result<AmalgamationProblem> {
        let n = dims.len();
        check_dimension(n)?;
        if !is_prime(q) {
            return Err(AmalgamError::SpecOutOfBounds(format!("q = {q} is not prime")));
        }
        let mut start = vec![base_dim];
        for d in dims {
            start.push(start.last().unwrap() + d);
        }
        let coords = |u: u32| -> Vec<usize> {
            (0..base_dim).chain((0..n).filter(|&i| u >> i & 1 == 1).flat_map(|i| start[i]..start[i + 1])).collect()
        };
        let biggest = (0..n).map(|i| q.saturating_pow(coords(full(n) & !(1 << i)).len() as u32)).max().unwrap_or(1);
        if biggest > MAX_FACE_SIZE {
            return Err(AmalgamError::SpecOutOfBounds(format!("faces of {biggest} vectors")));
        }
        let theory = TheoryKind::VectorSpace { q, max_dim: dims.iter().copied().max().unwrap_or(1) };
        let mut faces = BTreeMap::new();
        let mut given = BTreeMap::new();
        for u in proper_subsets(full(n)) {
            let cu = coords(u);
            faces.insert(u, VectorSpace::space(q, cu.len()));
            for i in 0..n {
                let v = u | 1 << i;
                if v == u || v == full(n) {
                    continue;
                }
                let cv = coords(v);
                let places: Vec<usize> = cu.iter().map(|c| q.pow(cv.iter().position(|d| d == c).unwrap() as u32)).collect();
                let map = (0..q.pow(cu.len() as u32))
                    .map(|mut x| {
                        let mut y = 0;
                        for &p in &places {
                            y += x % q * p;
                            x /= q;
                        }
                        y
                    })
                    .collect();
                given.insert((u, v), map);
            }
        }
        AmalgamationProblem::new(n, theory, faces, given)
    }

    fn additive_closure(s: &FiniteStructure, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = set.clone();
        if let Some(z) = s.relation("zero") {
            out.extend(z.tuples.iter().map(|t| t[0]));
        }
        let Some(add) = s.relation("add") else { return out };
        loop {
            let before = out.len();
            for t in &add.tuples {
                if out.contains(&t[0]) && out.contains(&t[1]) {
                    out.insert(t[2]);
                }
            }
            if out.len() == before {
                return out;
            }
        }
    }
}

impl Theory for VectorSpace {
    fn name(&self) -> &'static str {
        "vector_space"
    }

    fn membership_failure(&self, s: &FiniteStructure) -> Option<String> {
        if let Some(e) = same_layout(s, &["V"], &[("add", &["V", "V", "V"]), ("zero", &["V"])]) {
            return Some(e);
        }
        let n = s.size();
        let mut table = vec![vec![usize::MAX; n]; n];
        for t in &s.relation("add").unwrap().tuples {
            if table[t[0]][t[1]] != usize::MAX {
                return Some("addition is not a function".into());
            }
            table[t[0]][t[1]] = t[2];
        }
        if table.iter().flatten().any(|&z| z == usize::MAX) {
            return Some("addition is not total".into());
        }
        let zeros = &s.relation("zero").unwrap().tuples;
        if zeros.len() != 1 {
            return Some("exactly one zero required".into());
        }
        let e = zeros.iter().next().unwrap()[0];
        for x in 0..n {
            if table[e][x] != x || !(0..n).any(|y| table[x][y] == e) {
                return Some("zero is not a neutral element with inverses".into());
            }
            let mut m = x;
            for _ in 1..self.q {
                m = table[m][x];
            }
            if m != e {
                return Some(format!("element {x} does not have additive order dividing {}", self.q));
            }
            for y in 0..n {
                if table[x][y] != table[y][x] {
                    return Some("addition is not commutative".into());
                }
                for z in 0..n {
                    if table[table[x][y]][z] != table[x][table[y][z]] {
                        return Some("addition is not associative".into());
                    }
                }
            }
        }
        None
    }

    fn closure(&self, s: &FiniteStructure, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        VectorSpace::additive_closure(s, set)
    }

    fn independent(&self, s: &FiniteStructure, a: &BTreeSet<usize>, b: &BTreeSet<usize>, c: &BTreeSet<usize>) -> bool {
        let sum = VectorSpace::additive_closure(s, &a.union(b).copied().collect());
        a.intersection(b).eq(c.iter()) && sum.len() * c.len() == a.len() * b.len()
    }

    /// The freest assignment of coordinates to the union: known sums and
    /// differences are propagated, and an element that is not forced gets a
    /// new basis vector.
    fn candidate_tops(&self, union: &FiniteStructure) -> Result<Vec<(FiniteStructure, Vec<usize>)>> {
        let q = self.q;
        let n = union.size();
        let add: Vec<&Vec<usize>> = union.relation("add").map(|r| r.tuples.iter().collect()).unwrap_or_default();
        let mut coord: Vec<Option<Vec<usize>>> = vec![None; n];
        for t in union.relation("zero").map(|r| r.tuples.iter().collect::<Vec<_>>()).unwrap_or_default() {
            coord[t[0]] = Some(Vec::new());
        }
        let combine = |a: &[usize], b: &[usize], sign: usize| -> Vec<usize> {
            let len = a.len().max(b.len());
            let mut out: Vec<usize> = (0..len)
                .map(|i| (a.get(i).copied().unwrap_or(0) + sign * b.get(i).copied().unwrap_or(0)) % q)
                .collect();
            while out.last() == Some(&0) {
                out.pop();
            }
            out
        };
        let mut dim = 0;
        loop {
            loop {
                let mut changed = false;
                for t in &add {
                    let (x, y, z) = (t[0], t[1], t[2]);
                    let derived = match (&coord[x], &coord[y], &coord[z]) {
                        (Some(a), Some(b), c) => Some((z, combine(a, b, 1), c.clone())),
                        (Some(a), None, Some(c)) => Some((y, combine(c, a, q - 1), None)),
                        (None, Some(b), Some(c)) => Some((x, combine(c, b, q - 1), None)),
                        _ => None,
                    };
                    match derived {
                        Some((_, v, Some(old))) if old != v => return Ok(Vec::new()),
                        Some((target, v, None)) => {
                            coord[target] = Some(v);
                            changed = true;
                        }
                        _ => {}
                    }
                }
                if !changed {
                    break;
                }
            }
            match coord.iter().position(Option::is_none) {
                Some(e) => {
                    let mut v = vec![0; dim + 1];
                    v[dim] = 1;
                    coord[e] = Some(v);
                    dim += 1;
                }
                None => break,
            }
        }
        let size = q.checked_pow(dim as u32).filter(|&s| s <= 1 << 12).ok_or(StructureError::SizeLimitExceeded {
            size: usize::MAX,
            limit: 1 << 12,
        })?;
        let iota: Vec<usize> = coord
            .iter()
            .map(|c| c.as_ref().unwrap().iter().rev().fold(0, |acc, &d| acc * q + d))
            .collect();
        if iota.iter().collect::<BTreeSet<_>>().len() != n {
            return Ok(Vec::new());
        }
        debug_assert!(iota.iter().all(|&x| x < size));
        Ok(vec![(VectorSpace::space(q, dim), iota)])
    }

    fn instances(&self, n: usize, bound: usize) -> Result<Vec<AmalgamationProblem>> {
        check_dimension(n)?;
        let mut out = Vec::new();
        for dims in nondecreasing(n, 1, self.max_dim.max(1)) {
            let largest = dims.iter().sum::<usize>() - dims[0];
            if self.q.saturating_pow(largest as u32) <= bound.min(MAX_FACE_SIZE) {
                out.push(VectorSpace::problem(self.q, 0, &dims)?);
            }
        }
        Ok(out)
    }
}

/// Points with a two-element fiber over every pair and a ternary relation on
/// the fibers of each triangle. A structure is legal when some labelling of
/// each fiber by `{0, 1}` makes `R(x, y, z)` equivalent to
/// `λ(x) + λ(y) + λ(z) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct Parity;

/// The fibers of a parity structure indexed by their point pairs.
#[derive(Debug, Clone)]
struct ParityView {
    points: Vec<usize>,
    /// Point pair `(p, q)` with `p < q`, to its fiber in increasing order.
    fibers: BTreeMap<(usize, usize), Vec<usize>>,
    pair_of: BTreeMap<usize, (usize, usize)>,
}

impl ParityView {
    fn of(s: &FiniteStructure) -> std::result::Result<ParityView, String> {
        let points: Vec<usize> = s.sort_range(0).collect();
        let mut ends: BTreeMap<usize, Vec<usize>> = s.sort_range(1).map(|f| (f, Vec::new())).collect();
        for t in &s.relation("over").ok_or("missing relation over")?.tuples {
            ends.get_mut(&t[0]).ok_or("over on a non-fiber element")?.push(t[1]);
        }
        let mut fibers: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        let mut pair_of = BTreeMap::new();
        for (f, e) in ends {
            if e.len() != 2 {
                return Err(format!("fiber element {f} lies over {} points", e.len()));
            }
            let pair = (e[0].min(e[1]), e[0].max(e[1]));
            fibers.entry(pair).or_default().push(f);
            pair_of.insert(f, pair);
        }
        Ok(ParityView { points, fibers, pair_of })
    }

    fn triangles(&self) -> Vec<[(usize, usize); 3]> {
        let p = &self.points;
        let mut out = Vec::new();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                for k in j + 1..p.len() {
                    out.push([(p[i], p[j]), (p[j], p[k]), (p[i], p[k])]);
                }
            }
        }
        out
    }

    /// The four triples of a triangle whose reference bits sum to `parity`,
    /// in all orders.
    fn affine(&self, tri: &[(usize, usize); 3], parity: usize) -> BTreeSet<Vec<usize>> {
        let f: Vec<&Vec<usize>> = tri.iter().map(|p| &self.fibers[p]).collect();
        let mut out = BTreeSet::new();
        for a in 0..2 {
            for b in 0..2 {
                let c = (parity + a + b) % 2;
                let t = [f[0][a], f[1][b], f[2][c]];
                for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                    out.insert(perm.iter().map(|&i| t[i]).collect());
                }
            }
        }
        out
    }
}

/// Whether `rows` (variable sets with right-hand sides) has a solution over GF(2).
fn gf2_solvable(rows: &[(Vec<usize>, usize)], vars: usize) -> bool {
    let words = vars.div_ceil(64) + 1;
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|(vs, rhs)| {
            let mut r = vec![0u64; words];
            for &v in vs {
                r[v / 64] ^= 1 << (v % 64);
            }
            if rhs % 2 == 1 {
                r[vars / 64] ^= 1 << (vars % 64);
            }
            r
        })
        .collect();
    let mut rank = 0;
    for col in 0..vars {
        let bit = |r: &Vec<u64>| r[col / 64] >> (col % 64) & 1 == 1;
        let Some(pivot) = (rank..m.len()).find(|&i| bit(&m[i])) else { continue };
        m.swap(rank, pivot);
        let p = m[rank].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i != rank && bit(r) {
                r.iter_mut().zip(&p).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    m[rank..].iter().all(|r| r[vars / 64] >> (vars % 64) & 1 == 0)
}

impl Parity {
    /// `n` points, all fibers, and the relation on every triangle inside a
    /// proper face with the given parities (lexicographic triangle order,
    /// zero by default), relative to the fiber order.
    pub fn problem(n: usize, parity: Option<&[u8]>) -> Result<AmalgamationProblem> {
        check_dimension(n)?;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let triangles: Vec<[usize; 3]> = if n > 3 {
            (0..n).flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| [i, j, k]))).collect()
        } else {
            Vec::new()
        };
        let parity: Vec<u8> = match parity {
            Some(p) if p.len() == triangles.len() => p.to_vec(),
            Some(p) if p.is_empty() => vec![0; triangles.len()],
            Some(p) => {
                return Err(AmalgamError::SpecOutOfBounds(format!(
                    "{} parities given for {} triangles",
                    p.len(),
                    triangles.len()
                )))
            }
            None => vec![0; triangles.len()],
        };
        let biggest = (n - 1) + (n - 1) * (n - 2);
        if biggest > MAX_FACE_SIZE {
            return Err(AmalgamError::SpecOutOfBounds(format!("faces of {biggest} elements")));
        }
        let mut b = StructureBuilder::new(&["P", "F"]);
        let points: Vec<usize> = (0..n).map(|_| b.add(0)).collect();
        let fiber: BTreeMap<(usize, usize), [usize; 2]> = pairs.iter().map(|&p| (p, [b.add(1), b.add(1)])).collect();
        let over = b.relation("over", &[1, 0]);
        for (&(i, j), f) in &fiber {
            for &x in f {
                b.insert(over, vec![x, points[i]]);
                b.insert(over, vec![x, points[j]]);
            }
        }
        let r = b.relation("R", &[1, 1, 1]);
        for (tri, &par) in triangles.iter().zip(&parity) {
            let [i, j, k] = *tri;
            let f = [fiber[&(i, j)], fiber[&(j, k)], fiber[&(i, k)]];
            for a in 0..2 {
                for c in 0..2 {
                    let d = (par as usize + a + c) % 2;
                    let t = [f[0][a], f[1][c], f[2][d]];
                    for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                        b.insert(r, perm.iter().map(|&i| t[i]).collect());
                    }
                }
            }
        }
        let (global, new_id) = b.finish()?;
        let members = |u: u32| -> BTreeSet<usize> {
            let inside = |i: usize| u >> i & 1 == 1;
            let mut m: BTreeSet<usize> = (0..n).filter(|&i| inside(i)).map(|i| new_id[points[i]]).collect();
            for (&(i, j), f) in &fiber {
                if inside(i) && inside(j) {
                    m.extend(f.iter().map(|&x| new_id[x]));
                }
            }
            m
        };
        from_global(n, TheoryKind::Parity, &global, members)
    }

    /// Number of triangles the generator assigns parities to.
    pub fn triangle_count(n: usize) -> usize {
        if n > 3 {
            n * (n - 1) * (n - 2) / 6
        } else {
            0
        }
    }
}

impl Theory for Parity {
    fn name(&self) -> &'static str {
        "parity"
    }

    fn membership_failure(&self, s: &FiniteStructure) -> Option<String> {
        if let Some(e) = same_layout(s, &["P", "F"], &[("over", &["F", "P"]), ("R", &["F", "F", "F"])]) {
            return Some(e);
        }
        let view = match ParityView::of(s) {
            Ok(v) => v,
            Err(e) => return Some(e),
        };
        if let Some((p, f)) = view.fibers.iter().find(|(_, f)| f.len() != 2) {
            return Some(format!("fiber over {p:?} has {} elements", f.len()));
        }
        let pairs = view.points.len() * view.points.len().saturating_sub(1) / 2;
        if view.fibers.len() != pairs {
            return Some("some pair of points carries no fiber".into());
        }
        let index: BTreeMap<(usize, usize), usize> = view.fibers.keys().enumerate().map(|(i, &p)| (p, i)).collect();
        let r = &s.relation("R").unwrap().tuples;
        let mut covered = 0;
        let mut rows = Vec::new();
        for tri in view.triangles() {
            let on: BTreeSet<Vec<usize>> = {
                let fib: BTreeSet<usize> = tri.iter().flat_map(|p| view.fibers[p].iter().copied()).collect();
                r.iter().filter(|t| t.iter().all(|x| fib.contains(x))).cloned().collect()
            };
            covered += on.len();
            let parity = (0..2).find(|&p| view.affine(&tri, p) == on);
            match parity {
                Some(p) => rows.push((tri.iter().map(|p| index[p]).collect(), p)),
                None => return Some(format!("relation on the triangle {tri:?} is not affine")),
            }
        }
        if covered != r.len() {
            return Some("relation tuples outside any triangle".into());
        }
        if !gf2_solvable(&rows, index.len()) {
            return Some("no global fiber labelling".into());
        }
        None
    }

    fn closure(&self, s: &FiniteStructure, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let Ok(view) = ParityView::of(s) else { return set.clone() };
        let mut points: BTreeSet<usize> = set.iter().copied().filter(|x| view.points.contains(x)).collect();
        for x in set {
            if let Some(&(p, q)) = view.pair_of.get(x) {
                points.insert(p);
                points.insert(q);
            }
        }
        let mut out = points.clone();
        for (&(p, q), f) in &view.fibers {
            if points.contains(&p) && points.contains(&q) {
                out.extend(f);
            }
        }
        out.extend(set);
        out
    }

    fn independent(&self, _: &FiniteStructure, a: &BTreeSet<usize>, b: &BTreeSet<usize>, c: &BTreeSet<usize>) -> bool {
        a.intersection(b).eq(c.iter())
    }

    /// Adds missing fibers, then tries both parities on every triangle that
    /// carries no relation.
    fn candidate_tops(&self, union: &FiniteStructure) -> Result<Vec<(FiniteStructure, Vec<usize>)>> {
        let view = ParityView::of(union).map_err(AmalgamError::Malformed)?;
        let mut b = StructureBuilder::like(union);
        let ids: Vec<usize> = (0..union.size()).map(|x| b.add(union.sort_of(x).unwrap())).collect();
        let over = b.relation("over", &[1, 0]);
        let rel = b.relation("R", &[1, 1, 1]);
        for t in &union.relation("over").unwrap().tuples {
            b.insert(over, t.clone());
        }
        let mut fibers = view.fibers.clone();
        let pts = &view.points;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let fiber = fibers.entry((pts[i], pts[j])).or_default();
                while fiber.len() < 2 {
                    let x = b.add(1);
                    b.insert(over, vec![x, pts[i]]);
                    b.insert(over, vec![x, pts[j]]);
                    fiber.push(x);
                }
            }
        }
        let full_view = ParityView { points: view.points.clone(), fibers, pair_of: BTreeMap::new() };
        let r = &union.relation("R").unwrap().tuples;
        for t in r {
            b.insert(rel, t.clone());
        }
        let open: Vec<[(usize, usize); 3]> = full_view
            .triangles()
            .into_iter()
            .filter(|tri| {
                let fib: BTreeSet<usize> = tri.iter().flat_map(|p| full_view.fibers[p].iter().copied()).collect();
                !r.iter().any(|t| t.iter().all(|x| fib.contains(x)))
            })
            .collect();
        if open.len() > 12 {
            return Err(AmalgamError::Malformed(format!("{} open triangles", open.len())));
        }
        let mut out = Vec::new();
        for choice in 0..1usize << open.len() {
            let mut bb = b.clone();
            for (k, tri) in open.iter().enumerate() {
                for t in full_view.affine(tri, choice >> k & 1) {
                    bb.insert(rel, t);
                }
            }
            let (top, new_id) = bb.finish()?;
            out.push((top, ids.iter().map(|&x| new_id[x]).collect()));
        }
        Ok(out)
    }

    fn instances(&self, n: usize, bound: usize) -> Result<Vec<AmalgamationProblem>> {
        check_dimension(n)?;
        let face = (n - 1) + (n - 1) * (n - 2);
        if face > bound {
            return Err(AmalgamError::SpecOutOfBounds(format!("parity faces in dimension {n} have {face} elements")));
        }
        let t = Parity::triangle_count(n);
        let mut out = Vec::new();
        for bits in 0..1u32 << t {
            let parity: Vec<u8> = (0..t).map(|k| (bits >> k & 1) as u8).collect();
            let p = Parity::problem(n, Some(&parity))?;
            if p.validate().is_ok() {
                out.push(p);
            }
        }
        Ok(out)
    }
}

/// Parameters for the built-in generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum InstanceSpec {
    PureSet {
        n: usize,
        #[serde(default)]
        base: usize,
        /// Points owned by each index; one each by default.
        #[serde(default)]
        extras: Option<Vec<usize>>,
    },
    VectorSpace {
        q: usize,
        dims: Vec<usize>,
        #[serde(default)]
        base_dim: usize,
    },
    ParityCover {
        n: usize,
        #[serde(default)]
        parity: Option<Vec<u8>>,
    },
}

pub fn generate_instance(spec: &InstanceSpec) -> Result<AmalgamationProblem> {
    match spec {
        InstanceSpec::PureSet { n, base, extras } => {
            let extras = extras.clone().unwrap_or_else(|| vec![1; *n]);
            if extras.len() != *n {
                return Err(AmalgamError::SpecOutOfBounds(format!("{} extras for dimension {n}", extras.len())));
            }
            PureSet::problem(*base, &extras)
        }
        InstanceSpec::VectorSpace { q, dims, base_dim } => VectorSpace::problem(*q, *base_dim, dims),
        InstanceSpec::ParityCover { n, parity } => Parity::problem(*n, parity.as_deref()),
    }
}
