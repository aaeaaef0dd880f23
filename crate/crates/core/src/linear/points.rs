//! Point sets of `GF(q)^n` coded by the polynomials vanishing on them.

use serde::{Deserialize, Serialize};

use super::{code_subspace, Field, LinearError, Result, Subspace, SubspaceCode};

/// Exponent vectors of the reduced monomials of total degree `<= cap`
/// (each exponent `< q`), ordered by total degree and then
/// lexicographically.
pub fn monomials(q: usize, n: usize, cap: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0..q.pow(n as u32))
        .map(|x| (0..n).map(|i| x / q.pow(i as u32) % q).collect::<Vec<usize>>())
        .filter(|e| e.iter().sum::<usize>() <= cap)
        .collect();
    all.sort_by(|a, b| (a.iter().sum::<usize>(), a).cmp(&(b.iter().sum::<usize>(), b)));
    all
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSetCode {
    pub q: usize,
    pub n: usize,
    pub degree_cap: usize,
    pub monomials: Vec<Vec<usize>>,
    /// The vanishing space, on the monomial coordinates.
    pub vanishing: Subspace,
    /// `None` when nothing of degree `<= cap` vanishes on the set.
    pub code: Option<SubspaceCode>,
    /// Whether the cap allows every reduced polynomial, so that the code
    /// determines the set.
    pub complete: bool,
}

fn monomial_at(f: &Field, e: &[usize], z: &[usize]) -> usize {
    e.iter().zip(z).fold(1, |acc, (&k, &x)| f.mul(acc, f.pow(x, k)))
}

pub fn code_point_set(f: &Field, n: usize, points: &[Vec<usize>], degree_cap: usize) -> Result<PointSetCode> {
    for z in points {
        if z.len() != n {
            return Err(LinearError::DimensionMismatch { expected: n, found: z.len() });
        }
        f.check(z)?;
    }
    let q = f.q();
    let monomials = monomials(q, n, degree_cap);
    let rows: Vec<Vec<usize>> = points.iter().map(|z| monomials.iter().map(|e| monomial_at(f, e, z)).collect()).collect();
    let kernel = f.kernel(&rows, monomials.len());
    let vanishing = Subspace::span(f, monomials.len(), &kernel)?;
    let code = match vanishing.dim() {
        0 => None,
        _ => Some(code_subspace(f, &vanishing)?),
    };
    Ok(PointSetCode { q, n, degree_cap, monomials, vanishing, code, complete: degree_cap >= n * (q - 1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn points(q: usize, n: usize) -> Vec<Vec<usize>> {
        (0..q.pow(n as u32)).map(|x| (0..n).map(|i| x / q.pow(i as u32) % q).collect()).collect()
    }

    #[test]
    fn origin_in_plane() {
        let f = Field::new(2).unwrap();
        let c = code_point_set(&f, 2, &[vec![0, 0]], 2).unwrap();
        assert_eq!(c.monomials, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(c.vanishing.dim(), 3);
        assert!(c.vanishing.basis.iter().all(|p| p[0] == 0));
        assert!(c.complete);
        let full = code_point_set(&f, 2, &points(2, 2), 2).unwrap();
        assert_eq!(full.code, None);
    }

    #[test]
    fn complete_codes_separate_subsets() {
        for (q, n) in [(2, 2), (3, 1), (2, 3)] {
            let f = Field::new(q).unwrap();
            let all = points(q, n);
            let cap = n * (q - 1);
            let mut codes = BTreeSet::new();
            for mask in 0u32..1 << all.len() {
                let z: Vec<Vec<usize>> = all.iter().enumerate().filter(|&(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.clone()).collect();
                let c = code_point_set(&f, n, &z, cap).unwrap();
                // vanishing dimension is the number of points missed
                assert_eq!(c.vanishing.dim(), all.len() - z.len());
                codes.insert(c.code);
            }
            assert_eq!(codes.len(), 1 << all.len());
        }
    }

    #[test]
    fn lower_cap_is_a_projection() {
        let f = Field::new(3).unwrap();
        let z = vec![vec![0, 1], vec![2, 2], vec![1, 0]];
        let high = code_point_set(&f, 2, &z, 4).unwrap();
        for cap in 0..4 {
            let low = code_point_set(&f, 2, &z, cap).unwrap();
            assert!(!low.complete);
            // the low-degree monomials are a prefix; vanishing polynomials of
            // low degree are those of high degree with no higher terms
            let m = low.monomials.len();
            assert_eq!(&high.monomials[..m], &low.monomials[..]);
            let tail: Vec<Vec<usize>> = (m..high.monomials.len())
                .map(|j| high.vanishing.basis.iter().map(|row| row[j]).collect())
                .collect();
            let kernel = f.kernel(&tail, high.vanishing.dim());
            let restricted: Vec<Vec<usize>> = kernel
                .iter()
                .map(|c| (0..m).map(|j| high.vanishing.basis.iter().zip(c).fold(0, |a, (row, &x)| f.add(a, f.mul(x, row[j])))).collect())
                .collect();
            assert_eq!(Subspace::span(&f, m, &restricted).unwrap(), low.vanishing);
        }
    }
}
