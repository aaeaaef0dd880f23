//! Subspaces of `GF(q)^n` coded by their Plücker coordinates.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Field, LinearError, Result};

/// A subspace of `GF(q)^n`, kept as a reduced row echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subspace {
    pub ambient: usize,
    pub basis: Vec<Vec<usize>>,
}

impl Subspace {
    pub fn span(f: &Field, ambient: usize, vectors: &[Vec<usize>]) -> Result<Subspace> {
        for v in vectors {
            if v.len() != ambient {
                return Err(LinearError::DimensionMismatch { expected: ambient, found: v.len() });
            }
            f.check(v)?;
        }
        Ok(Subspace { ambient, basis: f.rref(vectors).0 })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, f: &Field, v: &[usize]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        f.rank(&rows) == self.dim()
    }
}

/// Coordinates in `Λ^d GF(q)^n` on the basis `e_S`, `S` running over the
/// `d`-subsets of `0..n` in lexicographic order, scaled so the first nonzero
/// coordinate is `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubspaceCode {
    pub q: usize,
    pub ambient: usize,
    pub dim: usize,
    pub coords: Vec<usize>,
}

impl SubspaceCode {
    /// The coordinate of `e_S` for a sorted `S`.
    pub fn coord(&self, s: &[usize]) -> usize {
        let index = subsets(self.ambient, self.dim).iter().position(|t| t == s);
        index.map_or(0, |i| self.coords[i])
    }
}

/// A quadratic relation `sum_l ± p(J k_l) p(K - k_l) = 0` that a code fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PluckerRelation {
    /// `J`, a `(d-1)`-subset, 1-based.
    pub left: Vec<usize>,
    /// `K`, a `(d+1)`-subset, 1-based.
    pub right: Vec<usize>,
    pub value: usize,
    pub text: String,
}

/// The `d`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < d - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, d, &mut Vec::new(), &mut out);
    out
}

/// Sorts a sequence of indices, returning it with its sign, or `None` if an
/// index repeats.
fn sorted_sign(seq: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut v = seq.to_vec();
    let mut odd = false;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                odd = !odd;
            }
        }
    }
    v.windows(2).all(|w| w[0] < w[1]).then_some((v, odd))
}

struct Coords<'a> {
    f: &'a Field,
    index: HashMap<Vec<usize>, usize>,
    coords: &'a [usize],
}

impl Coords<'_> {
    /// `p` of an ordered index sequence.
    fn p(&self, seq: &[usize]) -> usize {
        match sorted_sign(seq) {
            None => 0,
            Some((s, odd)) => {
                let c = self.coords[self.index[&s]];
                if odd {
                    self.f.neg(c)
                } else {
                    c
                }
            }
        }
    }
}

fn normalize(f: &Field, coords: &mut [usize]) {
    if let Some(&lead) = coords.iter().find(|&&c| c != 0) {
        let s = f.inv(lead);
        for c in coords.iter_mut() {
            *c = f.mul(s, *c);
        }
    }
}

pub fn code_subspace(f: &Field, u: &Subspace) -> Result<SubspaceCode> {
    let d = u.dim();
    if d == 0 {
        return Err(LinearError::ZeroSubspace);
    }
    let mut coords: Vec<usize> = subsets(u.ambient, d)
        .iter()
        .map(|s| {
            let minor: Vec<Vec<usize>> = u.basis.iter().map(|row| s.iter().map(|&c| row[c]).collect()).collect();
            f.det(&minor)
        })
        .collect();
    normalize(f, &mut coords);
    Ok(SubspaceCode { q: f.q(), ambient: u.ambient, dim: d, coords })
}

fn label(s: &[usize], wide: bool) -> String {
    let parts: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
    parts.join(if wide { "," } else { "" })
}

/// Recovers the subspace from a code. Any nonzero multiple of a code is
/// accepted.
pub fn decode_subspace(f: &Field, code: &SubspaceCode) -> Result<Subspace> {
    let (n, d) = (code.ambient, code.dim);
    let all = subsets(n, d);
    if code.q != f.q() {
        return Err(LinearError::Malformed(format!("code over GF({}) read over GF({})", code.q, f.q())));
    }
    if d == 0 || d > n {
        return Err(LinearError::Malformed(format!("no {d}-subspaces of a {n}-dimensional space")));
    }
    if code.coords.len() != all.len() {
        return Err(LinearError::DimensionMismatch { expected: all.len(), found: code.coords.len() });
    }
    f.check(&code.coords)?;
    let mut coords = code.coords.clone();
    let Some(lead) = coords.iter().position(|&c| c != 0) else { return Err(LinearError::ZeroSubspace) };
    normalize(f, &mut coords);
    let table = Coords { f, index: all.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect(), coords: &coords };
    let pivot = &all[lead];
    let basis: Vec<Vec<usize>> = (0..d)
        .map(|r| {
            (0..n)
                .map(|j| {
                    let mut seq = pivot.clone();
                    seq[r] = j;
                    table.p(&seq)
                })
                .collect()
        })
        .collect();
    let u = Subspace::span(f, n, &basis)?;
    if code_subspace(f, &u)?.coords == coords {
        return Ok(u);
    }
    Err(violated_relation(&table, n, d)
        .map(|relation| LinearError::NotDecomposable { relation })
        .unwrap_or_else(|| LinearError::Malformed("code fails to decode but satisfies every relation".into())))
}

fn violated_relation(t: &Coords, n: usize, d: usize) -> Option<PluckerRelation> {
    let f = t.f;
    let wide = n >= 10;
    for j in subsets(n, d - 1) {
        for k in subsets(n, d + 1) {
            let mut value = 0;
            let mut terms = Vec::new();
            for l in 0..k.len() {
                let mut first = j.clone();
                first.push(k[l]);
                let Some((a, odd)) = sorted_sign(&first) else { continue };
                let b: Vec<usize> = k.iter().enumerate().filter(|&(i, _)| i != l).map(|(_, &x)| x).collect();
                let negative = odd ^ (l % 2 == 1);
                let term = f.mul(t.p(&a), t.p(&b));
                value = if negative { f.sub(value, term) } else { f.add(value, term) };
                let plus = !negative || f.neg(1) == 1;
                terms.push(format!("{}p{}p{}", if plus { "+" } else { "-" }, label(&a, wide), label(&b, wide)));
            }
            if value != 0 {
                let mut text = terms.join(" ").replace('+', "+ ").replace('-', "- ");
                if let Some(rest) = text.strip_prefix("+ ") {
                    text = rest.to_string();
                }
                let text = format!("{text} = {value} != 0");
                let one_based = |s: &[usize]| s.iter().map(|i| i + 1).collect();
                return Some(PluckerRelation { left: one_based(&j), right: one_based(&k), value, text });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    /// Every subspace of dimension `d`, by spanning all `d`-tuples of vectors.
    pub(crate) fn all_subspaces(f: &Field, n: usize, d: usize) -> BTreeSet<Subspace> {
        let q = f.q();
        let vectors: Vec<Vec<usize>> =
            (0..q.pow(n as u32)).map(|x| (0..n).map(|i| x / q.pow(i as u32) % q).collect()).collect();
        let mut out = BTreeSet::new();
        let mut idx = vec![0; d];
        loop {
            let rows: Vec<Vec<usize>> = idx.iter().map(|&i| vectors[i].clone()).collect();
            let s = Subspace::span(f, n, &rows).unwrap();
            if s.dim() == d {
                out.insert(s);
            }
            let mut i = 0;
            while i < d {
                idx[i] += 1;
                if idx[i] < vectors.len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == d {
                return out;
            }
        }
    }

    #[test]
    fn grassmannian_counts_and_roundtrip() {
        for (q, n, d, count) in [(2, 4, 2, 35), (3, 3, 1, 13), (2, 3, 2, 7), (3, 4, 2, 130), (4, 3, 1, 21)] {
            let f = Field::new(q).unwrap();
            let spaces = all_subspaces(&f, n, d);
            assert_eq!(spaces.len(), count);
            let codes: BTreeSet<SubspaceCode> = spaces
                .iter()
                .map(|u| {
                    let c = code_subspace(&f, u).unwrap();
                    assert_eq!(&decode_subspace(&f, &c).unwrap(), u);
                    c
                })
                .collect();
            assert_eq!(codes.len(), count);
        }
    }

    #[test]
    fn plucker_rejection() {
        let f = Field::new(2).unwrap();
        let mut coords = vec![0; 6];
        coords[0] = 1; // p12
        coords[5] = 1; // p34
        let code = SubspaceCode { q: 2, ambient: 4, dim: 2, coords };
        match decode_subspace(&f, &code) {
            Err(LinearError::NotDecomposable { relation }) => {
                assert_eq!(relation.text, "p12p34 + p13p24 + p14p23 = 1 != 0");
                assert_eq!(relation.left, vec![1]);
                assert_eq!(relation.right, vec![2, 3, 4]);
            }
            other => panic!("{other:?}"),
        }
        let f3 = Field::new(3).unwrap();
        let code = SubspaceCode { q: 3, ambient: 4, dim: 2, coords: vec![1, 0, 0, 0, 0, 1] };
        let Err(LinearError::NotDecomposable { relation }) = decode_subspace(&f3, &code) else { panic!() };
        assert_eq!(relation.text, "p12p34 - p13p24 + p14p23 = 1 != 0");
    }

    #[test]
    fn edge_cases() {
        let f = Field::new(5).unwrap();
        assert_eq!(code_subspace(&f, &Subspace::span(&f, 3, &[]).unwrap()), Err(LinearError::ZeroSubspace));
        let whole = Subspace::span(&f, 3, &[vec![1, 2, 0], vec![0, 1, 0], vec![3, 3, 3]]).unwrap();
        let code = code_subspace(&f, &whole).unwrap();
        assert_eq!(code.coords, vec![1]);
        assert_eq!(decode_subspace(&f, &code).unwrap(), whole);
        let bad = SubspaceCode { q: 5, ambient: 3, dim: 2, coords: vec![0, 0, 0] };
        assert_eq!(decode_subspace(&f, &bad), Err(LinearError::ZeroSubspace));
        let scaled = SubspaceCode { q: 5, ambient: 3, dim: 1, coords: vec![0, 2, 4] };
        assert_eq!(decode_subspace(&f, &scaled).unwrap().basis, vec![vec![0, 1, 2]]);
    }

    proptest! {
        #[test]
        fn code_is_basis_independent(q in prop::sample::select(vec![2usize, 3, 4, 5, 7]),
                                     rows in prop::collection::vec(prop::collection::vec(0usize..64, 5), 1..4),
                                     mix in prop::collection::vec(0usize..64, 9)) {
            let f = Field::new(q).unwrap();
            let rows: Vec<Vec<usize>> = rows.iter().map(|r| r.iter().map(|x| x % q).collect()).collect();
            let u = Subspace::span(&f, 5, &rows).unwrap();
            prop_assume!(u.dim() > 0);
            // another basis, by invertible row operations
            let mut other = u.basis.clone();
            if u.dim() == 1 {
                other[0] = f.scale(1 + mix[0] % (q - 1), &other[0]);
            } else {
                for (i, &c) in mix.iter().enumerate() {
                    let (a, b) = (i % u.dim(), (i + 1) % u.dim());
                    other[a] = f.axpy(1 + c % (q - 1), &other[b].clone(), &other[a]);
                }
            }
            other.reverse();
            let v = Subspace::span(&f, 5, &other).unwrap();
            prop_assert_eq!(code_subspace(&f, &u).unwrap(), code_subspace(&f, &v).unwrap());
            prop_assert_eq!(decode_subspace(&f, &code_subspace(&f, &u).unwrap()).unwrap(), u);
        }
    }
}
