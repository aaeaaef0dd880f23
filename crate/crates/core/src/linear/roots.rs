//! The torsor of `m`-th roots of a one-dimensional space.
//!
//! With `V = W = GF(q)` and `f: W^{⊗m} → V` sending `1 ⊗ … ⊗ 1` to `1`, the
//! map `t(w) = f(w ⊗ … ⊗ w) = w^m` lands in one class of `V \ 0` modulo
//! `(k*)^m`, and its fibres are torsors under the scalars `μ_m`.

use serde::{Deserialize, Serialize};

use super::{Field, LinearError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootTorsor {
    pub q: usize,
    pub m: usize,
    /// Classes of `V \ 0` modulo `m`-th powers, ordered by least element.
    pub classes: Vec<Vec<usize>>,
    /// `t(w)` for `w = 1, …, q-1`.
    pub t: Vec<usize>,
    /// Index of the class containing the image of `t`.
    pub image_class: usize,
    pub mu: Vec<usize>,
    /// Scalars `β` with `t(βw) = t(w)` for every `w`.
    pub stabilizer: Vec<usize>,
}

pub fn root_torsor(f: &Field, m: usize) -> Result<RootTorsor> {
    if m < 2 {
        return Err(LinearError::Malformed(format!("root degree must be at least 2, got {m}")));
    }
    let q = f.q();
    let powers: Vec<usize> = {
        let mut p: Vec<usize> = (1..q).map(|x| f.pow(x, m)).collect();
        p.sort_unstable();
        p.dedup();
        p
    };
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for v in 1..q {
        if classes.iter().any(|c| c.contains(&v)) {
            continue;
        }
        let mut class: Vec<usize> = powers.iter().map(|&p| f.mul(v, p)).collect();
        class.sort_unstable();
        classes.push(class);
    }
    let t: Vec<usize> = (1..q).map(|w| f.pow(w, m)).collect();
    let image_class = classes.iter().position(|c| c.contains(&t[0])).expect("classes cover V \\ 0");
    let mu = (1..q).filter(|&a| f.pow(a, m) == 1).collect();
    let stabilizer = (1..q).filter(|&b| (1..q).all(|w| f.pow(f.mul(b, w), m) == t[w - 1])).collect();
    Ok(RootTorsor { q, m, classes, t, image_class, mu, stabilizer })
}
