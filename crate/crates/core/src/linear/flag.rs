//! Complete flags, their tensor products and duals, and the coding of lines
//! relative to a flag.

use serde::{Deserialize, Serialize};

use super::{Field, LinearError, Result, Subspace};

/// `GF(q)^n` with a complete flag `W_1 ⊂ … ⊂ W_n`, given by an adapted basis:
/// `W_i` is spanned by the first `i` vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedSpace {
    /// Names of the ambient coordinates.
    pub labels: Vec<String>,
    pub adapted: Vec<Vec<usize>>,
}

impl FlaggedSpace {
    pub fn standard(labels: &[&str]) -> FlaggedSpace {
        let n = labels.len();
        let adapted = (0..n).map(|i| (0..n).map(|j| usize::from(i == j)).collect()).collect();
        FlaggedSpace { labels: labels.iter().map(|s| s.to_string()).collect(), adapted }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn validate(&self, f: &Field) -> Result<()> {
        let n = self.dim();
        if self.adapted.len() != n {
            return Err(LinearError::InvalidFlag(format!("{} basis vectors in dimension {n}", self.adapted.len())));
        }
        for v in &self.adapted {
            if v.len() != n {
                return Err(LinearError::DimensionMismatch { expected: n, found: v.len() });
            }
            f.check(v)?;
        }
        if f.rank(&self.adapted) < n {
            return Err(LinearError::InvalidFlag("adapted vectors are dependent".into()));
        }
        Ok(())
    }

    /// `W_i`, with `W_0 = 0`.
    pub fn step(&self, f: &Field, i: usize) -> Subspace {
        Subspace { ambient: self.dim(), basis: f.rref(&self.adapted[..i]).0 }
    }

    /// Dimensions of `W_1, …, W_n`.
    pub fn chain_dims(&self, f: &Field) -> Vec<usize> {
        (1..=self.dim()).map(|i| f.rank(&self.adapted[..i])).collect()
    }

    /// Coefficients of `v` on the adapted basis.
    fn coefficients(&self, f: &Field, v: &[usize]) -> Vec<usize> {
        let n = self.dim();
        let columns: Vec<Vec<usize>> = (0..n).map(|i| (0..n).map(|j| self.adapted[j][i]).collect()).collect();
        let inv = f.inverse(&columns).expect("validated flag");
        inv.iter().map(|row| f.dot(row, v)).collect()
    }
}

/// The flag on `V ⊗ W` whose steps are `V_{i-1} ⊗ W + V_i ⊗ W_j` in
/// lexicographic order of `(i, j)`. Coordinates of `V ⊗ W` are the products
/// `a ⊗ b` of coordinates, also in lexicographic order.
pub fn flag_tensor(f: &Field, v: &FlaggedSpace, w: &FlaggedSpace) -> Result<FlaggedSpace> {
    v.validate(f)?;
    w.validate(f)?;
    let labels = v.labels.iter().flat_map(|a| w.labels.iter().map(move |b| format!("{a}⊗{b}"))).collect();
    let adapted = v
        .adapted
        .iter()
        .flat_map(|x| w.adapted.iter().map(move |y| x.iter().flat_map(|&a| y.iter().map(move |&b| f.mul(a, b))).collect()))
        .collect();
    Ok(FlaggedSpace { labels, adapted })
}

/// The flag on `V*` whose `i`-th step annihilates `V_{n-i}`, on the dual
/// coordinates.
pub fn flag_dual(f: &Field, v: &FlaggedSpace) -> Result<FlaggedSpace> {
    v.validate(f)?;
    let n = v.dim();
    let columns: Vec<Vec<usize>> = (0..n).map(|i| (0..n).map(|j| v.adapted[j][i]).collect()).collect();
    let mut adapted = f.inverse(&columns).expect("validated flag");
    adapted.reverse();
    Ok(FlaggedSpace { labels: v.labels.iter().map(|a| format!("{a}*")).collect(), adapted })
}

/// A line `U` with `U ⊆ W_{k+1}`, `U ⊄ W_k` is coded by `k` and the vector of
/// `U` that the inverse of `U → W_{k+1}/W_k` assigns to the class of the
/// `(k+1)`-th adapted vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineCode {
    pub k: usize,
    pub element: Vec<usize>,
}

pub fn code_flagged_line(f: &Field, line: &Subspace, w: &FlaggedSpace) -> Result<LineCode> {
    w.validate(f)?;
    if line.ambient != w.dim() {
        return Err(LinearError::DimensionMismatch { expected: w.dim(), found: line.ambient });
    }
    if line.dim() != 1 {
        return Err(LinearError::DimensionMismatch { expected: 1, found: line.dim() });
    }
    let u = &line.basis[0];
    let c = w.coefficients(f, u);
    let k = c.iter().rposition(|&x| x != 0).expect("nonzero vector");
    Ok(LineCode { k, element: f.scale(f.inv(c[k]), u) })
}
