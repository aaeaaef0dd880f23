//! Finite multi-sorted structures.
//!
//! Elements are numbered globally: sort `i` owns the contiguous range
//! `offset(i)..offset(i) + size(i)`, in declaration order. Relations,
//! function graphs and constants all refer to global element numbers.

mod search;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use search::{automorphism_group, dcl, iso_extending, iso_over, AutGroup, SearchLimits};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("universe of {size} elements exceeds the search bound {limit}")]
    SizeLimitExceeded { size: usize, limit: usize },
    #[error("unknown sort {0:?}")]
    UnknownSort(String),
    #[error("element {0} is not in the universe")]
    UnknownElement(usize),
    #[error("malformed structure: {0}")]
    Malformed(String),
}

impl StructureError {
    pub fn kind(&self) -> &'static str {
        match self {
            StructureError::SizeLimitExceeded { .. } => "SizeLimitExceeded",
            StructureError::UnknownSort(_) => "UnknownSort",
            StructureError::UnknownElement(_) => "UnknownElement",
            StructureError::Malformed(_) => "Malformed",
        }
    }
}

pub type Result<T> = std::result::Result<T, StructureError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sort {
    pub name: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub sorts: Vec<usize>,
    pub tuples: BTreeSet<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub domain: Vec<usize>,
    pub codomain: usize,
    pub table: BTreeMap<Vec<usize>, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constant {
    pub name: String,
    pub element: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiniteStructure {
    sorts: Vec<Sort>,
    offsets: Vec<usize>,
    relations: Vec<Relation>,
    functions: Vec<Function>,
    constants: Vec<Constant>,
}

/// Serialized form; sorts are referenced by name.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RawStructure {
    pub sorts: Vec<Sort>,
    #[serde(default)]
    pub relations: Vec<RawRelation>,
    #[serde(default)]
    pub functions: Vec<RawFunction>,
    #[serde(default)]
    pub constants: Vec<Constant>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRelation {
    pub name: String,
    pub sorts: Vec<String>,
    pub tuples: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFunction {
    pub name: String,
    pub domain: Vec<String>,
    pub codomain: String,
    /// Rows `[x₁, …, x_k, f(x₁, …, x_k)]`.
    pub table: Vec<Vec<usize>>,
}

impl FiniteStructure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sort(&mut self, name: &str, size: usize) -> usize {
        let offset = self.size();
        self.sorts.push(Sort { name: name.to_owned(), size });
        self.offsets.push(offset);
        self.sorts.len() - 1
    }

    /// Global number of local element `i` of `sort`.
    pub fn element(&self, sort: usize, i: usize) -> usize {
        debug_assert!(i < self.sorts[sort].size);
        self.offsets[sort] + i
    }

    pub fn add_relation(&mut self, name: &str, sorts: Vec<usize>, tuples: impl IntoIterator<Item = Vec<usize>>) -> Result<()> {
        let tuples: BTreeSet<Vec<usize>> = tuples.into_iter().collect();
        for t in &tuples {
            self.check_tuple(name, &sorts, t)?;
        }
        self.relations.push(Relation { name: name.to_owned(), sorts, tuples });
        Ok(())
    }

    pub fn add_function(
        &mut self,
        name: &str,
        domain: Vec<usize>,
        codomain: usize,
        table: impl IntoIterator<Item = (Vec<usize>, usize)>,
    ) -> Result<()> {
        let mut map = BTreeMap::new();
        for (args, value) in table {
            self.check_tuple(name, &domain, &args)?;
            if self.sort_of(value) != Some(codomain) {
                return Err(StructureError::Malformed(format!("{name}: value {value} outside the codomain")));
            }
            if map.insert(args.clone(), value).is_some() {
                return Err(StructureError::Malformed(format!("{name}: two values at {args:?}")));
            }
        }
        let domain_size: usize = domain.iter().map(|&s| self.sorts[s].size).product();
        if map.len() != domain_size {
            return Err(StructureError::Malformed(format!("{name}: not total on its domain")));
        }
        self.functions.push(Function { name: name.to_owned(), domain, codomain, table: map });
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str, element: usize) -> Result<()> {
        if element >= self.size() {
            return Err(StructureError::UnknownElement(element));
        }
        self.constants.push(Constant { name: name.to_owned(), element });
        Ok(())
    }

    fn check_tuple(&self, name: &str, sorts: &[usize], t: &[usize]) -> Result<()> {
        if sorts.iter().any(|&s| s >= self.sorts.len()) {
            return Err(StructureError::Malformed(format!("{name}: unknown sort index")));
        }
        if t.len() != sorts.len() {
            return Err(StructureError::Malformed(format!("{name}: tuple {t:?} has the wrong arity")));
        }
        for (&x, &s) in t.iter().zip(sorts) {
            if self.sort_of(x) != Some(s) {
                return Err(StructureError::Malformed(format!(
                    "{name}: element {x} of tuple {t:?} is not in sort {}",
                    self.sorts[s].name
                )));
            }
        }
        Ok(())
    }

    pub fn from_raw(raw: &RawStructure) -> Result<Self> {
        let mut s = FiniteStructure::new();
        for sort in &raw.sorts {
            if s.sort_index(&sort.name).is_some() {
                return Err(StructureError::Malformed(format!("duplicate sort {:?}", sort.name)));
            }
            s.add_sort(&sort.name, sort.size);
        }
        let lookup = |s: &FiniteStructure, names: &[String]| -> Result<Vec<usize>> {
            names.iter().map(|n| s.sort_index(n).ok_or_else(|| StructureError::UnknownSort(n.clone()))).collect()
        };
        for r in &raw.relations {
            let sorts = lookup(&s, &r.sorts)?;
            s.add_relation(&r.name, sorts, r.tuples.iter().cloned())?;
        }
        for f in &raw.functions {
            let domain = lookup(&s, &f.domain)?;
            let codomain = lookup(&s, std::slice::from_ref(&f.codomain))?[0];
            let rows = f
                .table
                .iter()
                .map(|row| match row.split_last() {
                    Some((&v, args)) => Ok((args.to_vec(), v)),
                    None => Err(StructureError::Malformed(format!("{}: empty table row", f.name))),
                })
                .collect::<Result<Vec<_>>>()?;
            s.add_function(&f.name, domain, codomain, rows)?;
        }
        for c in &raw.constants {
            s.add_constant(&c.name, c.element)?;
        }
        Ok(s)
    }

    pub fn to_raw(&self) -> RawStructure {
        let names = |v: &[usize]| v.iter().map(|&i| self.sorts[i].name.clone()).collect();
        RawStructure {
            sorts: self.sorts.clone(),
            relations: self
                .relations
                .iter()
                .map(|r| RawRelation { name: r.name.clone(), sorts: names(&r.sorts), tuples: r.tuples.iter().cloned().collect() })
                .collect(),
            functions: self
                .functions
                .iter()
                .map(|f| RawFunction {
                    name: f.name.clone(),
                    domain: names(&f.domain),
                    codomain: self.sorts[f.codomain].name.clone(),
                    table: f.table.iter().map(|(a, &v)| a.iter().copied().chain([v]).collect()).collect(),
                })
                .collect(),
            constants: self.constants.clone(),
        }
    }

    pub fn size(&self) -> usize {
        self.sorts.iter().map(|s| s.size).sum()
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn functions(&self) -> &[Function] {
        &self.functions
    }

    pub fn constants(&self) -> &[Constant] {
        &self.constants
    }

    pub fn sort_index(&self, name: &str) -> Option<usize> {
        self.sorts.iter().position(|s| s.name == name)
    }

    pub fn sort_of(&self, e: usize) -> Option<usize> {
        (0..self.sorts.len()).find(|&i| e >= self.offsets[i] && e < self.offsets[i] + self.sorts[i].size)
    }

    pub fn sort_range(&self, sort: usize) -> std::ops::Range<usize> {
        self.offsets[sort]..self.offsets[sort] + self.sorts[sort].size
    }

    /// All elements of the named sorts, in order.
    pub fn elements_of_sorts(&self, names: &[String]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for n in names {
            let s = self.sort_index(n).ok_or_else(|| StructureError::UnknownSort(n.clone()))?;
            out.extend(self.sort_range(s));
        }
        Ok(out)
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn apply(&self, name: &str, args: &[usize]) -> Option<usize> {
        self.function(name)?.table.get(args).copied()
    }

    /// Same sorts (names and sizes) and the same named relations, functions
    /// and constants with the same signatures.
    pub fn same_signature(&self, other: &FiniteStructure) -> bool {
        self.sorts == other.sorts
            && self.relations.len() == other.relations.len()
            && self.relations.iter().zip(&other.relations).all(|(a, b)| a.name == b.name && a.sorts == b.sorts)
            && self.functions.len() == other.functions.len()
            && self
                .functions
                .iter()
                .zip(&other.functions)
                .all(|(a, b)| a.name == b.name && a.domain == b.domain && a.codomain == b.codomain)
            && self.constants.len() == other.constants.len()
            && self.constants.iter().zip(&other.constants).all(|(a, b)| a.name == b.name)
    }

    /// Checks that `map` (indexed by element of `self`) is an isomorphism onto `other`.
    pub fn is_isomorphism(&self, other: &FiniteStructure, map: &[usize]) -> bool {
        if !self.same_signature(other) || map.len() != self.size() || other.size() != self.size() {
            return false;
        }
        let mut hit = vec![false; other.size()];
        for (x, &y) in map.iter().enumerate() {
            if y >= hit.len() || hit[y] || self.sort_of(x) != other.sort_of(y) {
                return false;
            }
            hit[y] = true;
        }
        let image = |t: &Vec<usize>| t.iter().map(|&x| map[x]).collect::<Vec<_>>();
        self.relations
            .iter()
            .zip(&other.relations)
            .all(|(a, b)| a.tuples.len() == b.tuples.len() && a.tuples.iter().all(|t| b.tuples.contains(&image(t))))
            && self
                .functions
                .iter()
                .zip(&other.functions)
                .all(|(a, b)| a.table.iter().all(|(args, &v)| b.table.get(&image(args)) == Some(&map[v])))
            && self.constants.iter().zip(&other.constants).all(|(a, b)| map[a.element] == b.element)
    }

    pub fn is_automorphism(&self, map: &[usize]) -> bool {
        self.is_isomorphism(self, map)
    }

    /// Substructure on `subset` (which must be closed under the functions and
    /// contain the constants), renumbered in increasing order. Returns the
    /// structure and the list of original elements, indexed by new number.
    pub fn induced(&self, subset: &BTreeSet<usize>) -> Result<(FiniteStructure, Vec<usize>)> {
        if let Some(&e) = subset.iter().find(|&&e| e >= self.size()) {
            return Err(StructureError::UnknownElement(e));
        }
        let mut s = FiniteStructure::new();
        let mut old: Vec<usize> = Vec::new();
        for (i, sort) in self.sorts.iter().enumerate() {
            let members: Vec<usize> = self.sort_range(i).filter(|e| subset.contains(e)).collect();
            s.add_sort(&sort.name, members.len());
            old.extend(members);
        }
        let new_of: BTreeMap<usize, usize> = old.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let remap = |t: &[usize]| t.iter().map(|x| new_of.get(x).copied()).collect::<Option<Vec<_>>>();
        for r in &self.relations {
            s.add_relation(&r.name, r.sorts.clone(), r.tuples.iter().filter_map(|t| remap(t)))?;
        }
        for f in &self.functions {
            let mut rows = Vec::new();
            for (args, &v) in &f.table {
                if let Some(a) = remap(args) {
                    let v = *new_of
                        .get(&v)
                        .ok_or_else(|| StructureError::Malformed(format!("subset is not closed under {}", f.name)))?;
                    rows.push((a, v));
                }
            }
            s.add_function(&f.name, f.domain.clone(), f.codomain, rows)?;
        }
        for c in &self.constants {
            let e = *new_of
                .get(&c.element)
                .ok_or_else(|| StructureError::Malformed(format!("subset omits constant {}", c.name)))?;
            s.add_constant(&c.name, e)?;
        }
        Ok((s, old))
    }

    /// Closure of a set under the functions and constants.
    pub fn generated(&self, seed: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut set = seed.clone();
        set.extend(self.constants.iter().map(|c| c.element));
        loop {
            let mut grew = false;
            for f in &self.functions {
                for (args, &v) in &f.table {
                    if !set.contains(&v) && args.iter().all(|a| set.contains(a)) {
                        set.insert(v);
                        grew = true;
                    }
                }
            }
            if !grew {
                return set;
            }
        }
    }
}

/// Builder for structures whose elements are assigned one at a time,
/// in any sort order; `finish` renumbers sort by sort.
#[derive(Debug, Clone, Default)]
pub struct StructureBuilder {
    sorts: Vec<String>,
    elements: Vec<usize>,
    relations: Vec<(String, Vec<usize>, BTreeSet<Vec<usize>>)>,
    functions: Vec<(String, Vec<usize>, usize, BTreeMap<Vec<usize>, usize>)>,
    constants: Vec<(String, usize)>,
}

impl StructureBuilder {
    pub fn new(sorts: &[&str]) -> Self {
        StructureBuilder { sorts: sorts.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    /// Same sorts, relation and function names as `s`, with no elements.
    pub fn like(s: &FiniteStructure) -> Self {
        StructureBuilder {
            sorts: s.sorts.iter().map(|x| x.name.clone()).collect(),
            elements: Vec::new(),
            relations: s.relations.iter().map(|r| (r.name.clone(), r.sorts.clone(), BTreeSet::new())).collect(),
            functions: s.functions.iter().map(|f| (f.name.clone(), f.domain.clone(), f.codomain, BTreeMap::new())).collect(),
            constants: Vec::new(),
        }
    }

    pub fn sort(&self, name: &str) -> usize {
        self.sorts.iter().position(|s| s == name).expect("declared sort")
    }

    /// Adds an element of `sort`, returning its provisional id.
    pub fn add(&mut self, sort: usize) -> usize {
        self.elements.push(sort);
        self.elements.len() - 1
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn sort_of(&self, e: usize) -> usize {
        self.elements[e]
    }

    pub fn relation(&mut self, name: &str, sorts: &[usize]) -> usize {
        match self.relations.iter().position(|r| r.0 == name) {
            Some(i) => i,
            None => {
                self.relations.push((name.to_owned(), sorts.to_vec(), BTreeSet::new()));
                self.relations.len() - 1
            }
        }
    }

    pub fn insert(&mut self, relation: usize, tuple: Vec<usize>) {
        self.relations[relation].2.insert(tuple);
    }

    pub fn function(&mut self, name: &str, domain: &[usize], codomain: usize) -> usize {
        match self.functions.iter().position(|f| f.0 == name) {
            Some(i) => i,
            None => {
                self.functions.push((name.to_owned(), domain.to_vec(), codomain, BTreeMap::new()));
                self.functions.len() - 1
            }
        }
    }

    pub fn set(&mut self, function: usize, args: Vec<usize>, value: usize) {
        self.functions[function].3.insert(args, value);
    }

    pub fn constant(&mut self, name: &str, e: usize) {
        self.constants.push((name.to_owned(), e));
    }

    /// Builds the structure; returns it with `new_id[provisional id]`.
    pub fn finish(self) -> Result<(FiniteStructure, Vec<usize>)> {
        let mut s = FiniteStructure::new();
        let mut new_id = vec![0; self.elements.len()];
        for (i, name) in self.sorts.iter().enumerate() {
            let members: Vec<usize> = (0..self.elements.len()).filter(|&e| self.elements[e] == i).collect();
            let offset = s.size();
            s.add_sort(name, members.len());
            for (k, e) in members.into_iter().enumerate() {
                new_id[e] = offset + k;
            }
        }
        let remap = |t: &[usize]| t.iter().map(|&x| new_id[x]).collect::<Vec<_>>();
        for (name, sorts, tuples) in &self.relations {
            s.add_relation(name, sorts.clone(), tuples.iter().map(|t| remap(t)))?;
        }
        for (name, domain, codomain, table) in &self.functions {
            s.add_function(name, domain.clone(), *codomain, table.iter().map(|(a, &v)| (remap(a), new_id[v])))?;
        }
        for (name, e) in &self.constants {
            s.add_constant(name, new_id[*e])?;
        }
        Ok((s, new_id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn directed_cycle(n: usize) -> FiniteStructure {
        let mut s = FiniteStructure::new();
        let v = s.add_sort("V", n);
        s.add_relation("E", vec![v, v], (0..n).map(|i| vec![i, (i + 1) % n])).unwrap();
        s
    }

    #[test]
    fn raw_roundtrip() {
        let mut s = directed_cycle(4);
        let w = s.add_sort("W", 2);
        let (w0, w1) = (s.element(w, 0), s.element(w, 1));
        s.add_function("f", vec![w], 0, [(vec![w0], 0), (vec![w1], 2)]).unwrap();
        s.add_constant("c", w0).unwrap();
        let raw = s.to_raw();
        let back = FiniteStructure::from_raw(&raw).unwrap();
        assert_eq!(back, s);
        let json = serde_json::to_string(&raw).unwrap();
        assert_eq!(serde_json::from_str::<RawStructure>(&json).unwrap(), raw);
    }

    #[test]
    fn ill_sorted_tuples_and_partial_functions() {
        let mut s = FiniteStructure::new();
        let a = s.add_sort("A", 2);
        let b = s.add_sort("B", 1);
        assert!(s.add_relation("R", vec![a, b], [vec![0, 1]]).is_err());
        assert!(s.add_relation("R", vec![a, b], [vec![0, 2]]).is_ok());
        assert!(s.add_function("f", vec![a], b, [(vec![0], 2)]).is_err());
    }

    #[test]
    fn induced_substructure() {
        let s = directed_cycle(4);
        let (sub, old) = s.induced(&BTreeSet::from([1, 2, 3])).unwrap();
        assert_eq!(old, vec![1, 2, 3]);
        assert_eq!(sub.relations()[0].tuples, BTreeSet::from([vec![0, 1], vec![1, 2]]));
    }

    #[test]
    fn builder_renumbers_by_sort() {
        let mut b = StructureBuilder::new(&["P", "Q"]);
        let q = b.add(1);
        let p = b.add(0);
        let r = b.relation("R", &[0, 1]);
        b.insert(r, vec![p, q]);
        let (s, ids) = b.finish().unwrap();
        assert_eq!(ids, vec![1, 0]);
        assert!(s.relation("R").unwrap().tuples.contains(&vec![0, 1]));
    }
}
