//! Linear algebra over finite fields: subspace codes, flags, point-set
//! codes and root torsors.

mod flag;
mod points;
mod roots;
mod subspace;

use thiserror::Error;

pub use flag::{code_flagged_line, flag_dual, flag_tensor, FlaggedSpace, LineCode};
pub use points::{code_point_set, monomials, PointSetCode};
pub use roots::{root_torsor, RootTorsor};
pub use subspace::{code_subspace, decode_subspace, subsets, PluckerRelation, Subspace, SubspaceCode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinearError {
    #[error("{0} is not a prime power below 1024")]
    NotAPrimePower(usize),
    #[error("the subspace is zero")]
    ZeroSubspace,
    #[error("code is not decomposable: {}", relation.text)]
    NotDecomposable { relation: PluckerRelation },
    #[error("expected vectors of length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} is not a field element")]
    NotAnElement(usize),
    #[error("invalid flag: {0}")]
    InvalidFlag(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

impl LinearError {
    pub fn kind(&self) -> &'static str {
        match self {
            LinearError::NotAPrimePower(_) => "NotAPrimePower",
            LinearError::ZeroSubspace => "ZeroSubspace",
            LinearError::NotDecomposable { .. } => "NotDecomposable",
            LinearError::DimensionMismatch { .. } => "DimensionMismatch",
            LinearError::NotAnElement(_) => "NotAnElement",
            LinearError::InvalidFlag(_) => "InvalidFlag",
            LinearError::Malformed(_) => "Malformed",
        }
    }
}

pub type Result<T> = std::result::Result<T, LinearError>;

/// `GF(q)` by addition and multiplication tables. An element is the integer
/// whose base-`p` digits are the coefficients of its residue modulo the
/// least monic irreducible polynomial of degree `k` (lexicographically),
/// so `0` and `1` are the field's zero and one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    q: usize,
    p: usize,
    k: usize,
    add: Vec<Vec<usize>>,
    mul: Vec<Vec<usize>>,
    neg: Vec<usize>,
    inv: Vec<usize>,
}

fn prime_power(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let (mut r, mut k) = (q, 0);
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

/// Product of two polynomials over `GF(p)` reduced modulo a monic `modulus`;
/// coefficient vectors are little-endian.
fn poly_mulmod(a: &[usize], b: &[usize], modulus: &[usize], p: usize) -> Vec<usize> {
    let k = modulus.len() - 1;
    let mut prod = vec![0; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for d in (k..prod.len()).rev() {
        let c = prod[d];
        if c != 0 {
            for (i, &m) in modulus.iter().enumerate() {
                prod[d - k + i] = (prod[d - k + i] + (p - c) * m % p) % p;
            }
        }
    }
    prod.truncate(k);
    prod.resize(k, 0);
    prod
}

fn digits(mut x: usize, p: usize, k: usize) -> Vec<usize> {
    (0..k)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn undigits(d: &[usize], p: usize) -> usize {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

impl Field {
    pub fn new(q: usize) -> Result<Field> {
        let (p, k) = prime_power(q).filter(|_| q < 1024).ok_or(LinearError::NotAPrimePower(q))?;
        let modulus = (0..p.pow(k as u32))
            .map(|low| {
                let mut m = digits(low, p, k);
                m.push(1);
                m
            })
            .find(|m| k == 1 || is_irreducible(m, p))
            .expect("irreducible polynomials exist in every degree");
        let add: Vec<Vec<usize>> = (0..q)
            .map(|a| {
                let da = digits(a, p, k);
                (0..q)
                    .map(|b| {
                        let db = digits(b, p, k);
                        undigits(&da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect::<Vec<_>>(), p)
                    })
                    .collect()
            })
            .collect();
        let mul: Vec<Vec<usize>> = (0..q)
            .map(|a| {
                let da = digits(a, p, k);
                (0..q).map(|b| undigits(&poly_mulmod(&da, &digits(b, p, k), &modulus, p), p)).collect()
            })
            .collect();
        let neg = (0..q).map(|a| (0..q).find(|&b| add[a][b] == 0).unwrap()).collect();
        let inv = (0..q).map(|a| if a == 0 { 0 } else { (1..q).find(|&b| mul[a][b] == 1).unwrap() }).collect();
        Ok(Field { q, p, k, add, mul, neg, inv })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a][b]
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add[a][self.neg[b]]
    }

    pub fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    /// Multiplicative inverse; `inv(0)` is `0`.
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn pow(&self, a: usize, e: usize) -> usize {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.q
    }

    /// Least element generating the multiplicative group.
    pub fn primitive(&self) -> usize {
        (1..self.q)
            .find(|&g| {
                let mut x = g;
                let mut order = 1;
                while x != 1 {
                    x = self.mul(x, g);
                    order += 1;
                }
                order == self.q - 1
            })
            .expect("cyclic multiplicative group")
    }

    pub(crate) fn check(&self, v: &[usize]) -> Result<()> {
        match v.iter().find(|&&x| x >= self.q) {
            Some(&x) => Err(LinearError::NotAnElement(x)),
            None => Ok(()),
        }
    }

    pub fn scale(&self, c: usize, v: &[usize]) -> Vec<usize> {
        v.iter().map(|&x| self.mul(c, x)).collect()
    }

    pub fn axpy(&self, c: usize, x: &[usize], y: &[usize]) -> Vec<usize> {
        x.iter().zip(y).map(|(&a, &b)| self.add(self.mul(c, a), b)).collect()
    }

    pub fn dot(&self, a: &[usize], b: &[usize]) -> usize {
        a.iter().zip(b).fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    /// Reduced row echelon form of the rows; returns the nonzero rows and
    /// their pivot columns.
    pub fn rref(&self, rows: &[Vec<usize>]) -> (Vec<Vec<usize>>, Vec<usize>) {
        let mut m: Vec<Vec<usize>> = rows.to_vec();
        let width = m.first().map_or(0, Vec::len);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..width {
            let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
            m.swap(r, p);
            let s = self.inv(m[r][c]);
            m[r] = self.scale(s, &m[r]);
            for i in 0..m.len() {
                if i != r && m[i][c] != 0 {
                    let f = self.neg(m[i][c]);
                    m[i] = self.axpy(f, &m[r].clone(), &m[i]);
                }
            }
            pivots.push(c);
            r += 1;
        }
        m.truncate(r);
        (m, pivots)
    }

    pub fn rank(&self, rows: &[Vec<usize>]) -> usize {
        self.rref(rows).1.len()
    }

    pub fn det(&self, m: &[Vec<usize>]) -> usize {
        let n = m.len();
        let mut a = m.to_vec();
        let mut det = 1;
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| a[i][c] != 0) else { return 0 };
            if p != c {
                a.swap(p, c);
                det = self.neg(det);
            }
            det = self.mul(det, a[c][c]);
            let s = self.inv(a[c][c]);
            for i in c + 1..n {
                if a[i][c] != 0 {
                    let f = self.neg(self.mul(a[i][c], s));
                    a[i] = self.axpy(f, &a[c].clone(), &a[i]);
                }
            }
        }
        det
    }

    /// A basis of `{x : M x = 0}` for `M` given by rows of width `width`.
    pub fn kernel(&self, rows: &[Vec<usize>], width: usize) -> Vec<Vec<usize>> {
        let (r, pivots) = self.rref(rows);
        let free: Vec<usize> = (0..width).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0; width];
                v[f] = 1;
                for (row, &p) in r.iter().zip(&pivots) {
                    v[p] = self.neg(row[f]);
                }
                v
            })
            .collect()
    }

    /// Inverse of a square matrix, if invertible.
    pub fn inverse(&self, m: &[Vec<usize>]) -> Option<Vec<Vec<usize>>> {
        let n = m.len();
        let aug: Vec<Vec<usize>> = m
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().copied().chain((0..n).map(|j| usize::from(i == j))).collect())
            .collect();
        let (r, pivots) = self.rref(&aug);
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
    }
}

fn is_irreducible(m: &[usize], p: usize) -> bool {
    // trial division by every monic polynomial of degree 1..=k/2
    let k = m.len() - 1;
    for d in 1..=k / 2 {
        for low in 0..p.pow(d as u32) {
            let mut f = digits(low, p, d);
            f.push(1);
            if poly_rem(m, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn poly_rem(a: &[usize], f: &[usize], p: usize) -> Vec<usize> {
    let mut r = a.to_vec();
    let d = f.len() - 1;
    for i in (d..r.len()).rev() {
        let c = r[i];
        if c != 0 {
            for (j, &x) in f.iter().enumerate() {
                r[i - d + j] = (r[i - d + j] + (p - c) * x % p) % p;
            }
        }
    }
    r.truncate(d);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_small() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16, 25, 27] {
            let f = Field::new(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    }
                }
            }
            let g = f.primitive();
            let powers: std::collections::BTreeSet<usize> = (0..q - 1).map(|e| f.pow(g, e)).collect();
            assert_eq!(powers.len(), q - 1);
        }
        assert_eq!(Field::new(6).unwrap_err().kind(), "NotAPrimePower");
    }

    #[test]
    fn kernel_and_inverse() {
        let f = Field::new(5).unwrap();
        let m = vec![vec![1, 2, 3], vec![0, 1, 1]];
        let k = f.kernel(&m, 3);
        assert_eq!(k.len(), 1);
        for row in &m {
            assert_eq!(f.dot(row, &k[0]), 0);
        }
        let a = vec![vec![1, 2], vec![3, 4]];
        let inv = f.inverse(&a).unwrap();
        let prod: Vec<Vec<usize>> = (0..2).map(|i| (0..2).map(|j| f.dot(&a[i], &[inv[0][j], inv[1][j]])).collect()).collect();
        assert_eq!(prod, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(f.det(&a), f.sub(4, 6 % 5));
    }
}
