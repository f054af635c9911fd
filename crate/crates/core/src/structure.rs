//! Finite relational structures over dense domains `0..n`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Tuple = Vec<usize>;

/// A total map from an instance domain into a template domain, indexed by source element.
pub type Assignment = Vec<usize>;

/// All homomorphisms between two structures, sorted lexicographically.
pub type HomSet = Vec<Assignment>;

/// Relation name used for graphs.
pub const EDGE: &str = "edge";

/// Relation name of the one-in-three template.
pub const ONE_IN_THREE: &str = "R";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// Relation symbols kept sorted by name so equal signatures compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut symbols: Vec<Symbol> = symbols
            .into_iter()
            .map(|(name, arity)| Symbol { name: name.into(), arity })
            .collect();
        symbols.sort();
        for s in &symbols {
            if s.arity == 0 {
                return Err(Error::InvalidStructure(format!("symbol `{}` has arity 0", s.name)));
            }
        }
        for w in symbols.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::InvalidStructure(format!("duplicate symbol `{}`", w[0].name)));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn graph() -> Self {
        Signature { symbols: vec![Symbol { name: EDGE.into(), arity: 2 }] }
    }

    pub fn one_in_three() -> Self {
        Signature { symbols: vec![Symbol { name: ONE_IN_THREE.into(), arity: 3 }] }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteStructure {
    signature: Signature,
    domain_size: usize,
    relations: Vec<BTreeSet<Tuple>>,
}

impl FiniteStructure {
    pub fn new(signature: Signature, domain_size: usize) -> Self {
        let relations = vec![BTreeSet::new(); signature.len()];
        FiniteStructure { signature, domain_size, relations }
    }

    /// Builds a structure from `(symbol, tuples)` pairs; every symbol of the signature may be listed at most once.
    pub fn from_relations<'a>(
        signature: Signature,
        domain_size: usize,
        relations: impl IntoIterator<Item = (&'a str, Vec<Tuple>)>,
    ) -> Result<Self> {
        let mut s = FiniteStructure::new(signature, domain_size);
        for (name, tuples) in relations {
            let idx = s
                .signature
                .index_of(name)
                .ok_or_else(|| Error::InvalidStructure(format!("unknown symbol `{name}`")))?;
            for t in tuples {
                s.insert(idx, t)?;
            }
        }
        Ok(s)
    }

    /// Undirected graph with both orientations of every edge stored.
    pub fn graph(vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut s = FiniteStructure::new(Signature::graph(), vertices);
        for &(u, v) in edges {
            s.insert(0, vec![u, v])?;
            s.insert(0, vec![v, u])?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, relation: usize, tuple: Tuple) -> Result<bool> {
        let sym = self
            .signature
            .symbols
            .get(relation)
            .ok_or_else(|| Error::InvalidStructure(format!("no relation with index {relation}")))?;
        if tuple.len() != sym.arity {
            return Err(Error::InvalidStructure(format!(
                "tuple {tuple:?} has length {} but `{}` has arity {}",
                tuple.len(),
                sym.name,
                sym.arity
            )));
        }
        if let Some(&bad) = tuple.iter().find(|&&x| x >= self.domain_size) {
            return Err(Error::InvalidStructure(format!(
                "element {bad} outside domain of size {}",
                self.domain_size
            )));
        }
        Ok(self.relations[relation].insert(tuple))
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn relation(&self, idx: usize) -> &BTreeSet<Tuple> {
        &self.relations[idx]
    }

    pub fn relation_named(&self, name: &str) -> Option<&BTreeSet<Tuple>> {
        self.signature.index_of(name).map(|i| &self.relations[i])
    }

    pub fn relations(&self) -> impl Iterator<Item = (&Symbol, &BTreeSet<Tuple>)> {
        self.signature.symbols.iter().zip(&self.relations)
    }

    pub fn contains(&self, relation: usize, tuple: &[usize]) -> bool {
        self.relations[relation].contains(tuple)
    }

    pub fn check_same_signature(&self, other: &FiniteStructure) -> Result<()> {
        if self.signature == other.signature {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!(
                "{} vs {}",
                describe(&self.signature),
                describe(&other.signature)
            )))
        }
    }

    /// Direct check that `map` sends every tuple of `self` into `template`.
    pub fn is_homomorphism(&self, template: &FiniteStructure, map: &[usize]) -> bool {
        if map.len() != self.domain_size || map.iter().any(|&x| x >= template.domain_size) {
            return false;
        }
        if self.signature != template.signature {
            return false;
        }
        self.relations.iter().enumerate().all(|(r, tuples)| {
            tuples.iter().all(|t| {
                let image: Tuple = t.iter().map(|&x| map[x]).collect();
                template.relations[r].contains(&image)
            })
        })
    }

    /// Unordered edges `u < v` of a binary `edge` relation; loops are reported as `(v, v)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.relation_named(EDGE)
            .map(|r| r.iter().filter(|t| t[0] <= t[1]).map(|t| (t[0], t[1])).collect())
            .unwrap_or_default()
    }

    /// Disjoint union with `other` placed after `self`; signatures must agree.
    pub fn disjoint_union(&self, other: &FiniteStructure) -> Result<FiniteStructure> {
        self.check_same_signature(other)?;
        let offset = self.domain_size;
        let mut out = FiniteStructure::new(self.signature.clone(), offset + other.domain_size);
        for (r, tuples) in self.relations.iter().enumerate() {
            out.relations[r].extend(tuples.iter().cloned());
        }
        for (r, tuples) in other.relations.iter().enumerate() {
            out.relations[r].extend(tuples.iter().map(|t| t.iter().map(|&x| x + offset).collect()));
        }
        Ok(out)
    }

    /// Image under a map onto `0..size`; used to glue elements together.
    pub fn quotient(&self, map: &[usize], size: usize) -> Result<FiniteStructure> {
        let mut out = FiniteStructure::new(self.signature.clone(), size);
        for (r, tuples) in self.relations.iter().enumerate() {
            for t in tuples {
                out.insert(r, t.iter().map(|&x| map[x]).collect())?;
            }
        }
        Ok(out)
    }
}

fn describe(sig: &Signature) -> String {
    let parts: Vec<String> = sig.symbols.iter().map(|s| format!("{}/{}", s.name, s.arity)).collect();
    format!("{{{}}}", parts.join(", "))
}

impl fmt::Display for FiniteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "structure {}", self.domain_size)?;
        for (sym, tuples) in self.relations() {
            writeln!(f, "rel {} {}", sym.name, sym.arity)?;
            for t in tuples {
                let parts: Vec<String> = t.iter().map(|x| (x + 1).to_string()).collect();
                writeln!(f, "{}", parts.join(" "))?;
            }
            writeln!(f, "end")?;
        }
        Ok(())
    }
}

/// The named templates: `K3`, `C3`, `D3` and `TWO` (case-insensitive).
pub fn builtin(name: &str) -> Result<FiniteStructure> {
    match name.to_ascii_uppercase().as_str() {
        "K3" => FiniteStructure::graph(3, &[(0, 1), (1, 2), (0, 2)]),
        "C3" => FiniteStructure::graph(5, &[(0, 1), (1, 2), (2, 4), (4, 3), (3, 1), (1, 4), (0, 3)]),
        "D3" => FiniteStructure::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 1), (0, 2)]),
        "TWO" => FiniteStructure::from_relations(
            Signature::one_in_three(),
            2,
            [(ONE_IN_THREE, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]])],
        ),
        _ => Err(Error::UnknownBuiltin(name.to_string())),
    }
}

/// Complete graph on `n` vertices.
pub fn complete_graph(n: usize) -> FiniteStructure {
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    FiniteStructure::graph(n, &edges).expect("complete graph edges are in range")
}

/// Cycle on `n >= 3` vertices.
pub fn cycle_graph(n: usize) -> FiniteStructure {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    FiniteStructure::graph(n, &edges).expect("cycle edges are in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_sizes() {
        let two = builtin("TWO").unwrap();
        assert_eq!(two.domain_size(), 2);
        assert_eq!(two.signature().len(), 1);
        assert_eq!(two.relation(0).len(), 3);

        let k3 = builtin("K3").unwrap();
        assert_eq!(k3.relation(0).len(), 6);

        let d3 = builtin("D3").unwrap();
        assert_eq!(d3.domain_size(), 4);
        assert_eq!(d3.edges().len(), 5);
        assert_eq!(d3.relation(0).len(), 10);

        let c3 = builtin("C3").unwrap();
        assert_eq!(c3.domain_size(), 5);
        assert_eq!(c3.edges().len(), 7);
    }

    #[test]
    fn builtin_is_stable_and_rejects_unknown() {
        assert_eq!(builtin("k3").unwrap(), builtin("K3").unwrap());
        assert!(matches!(builtin("K4"), Err(Error::UnknownBuiltin(_))));
    }

    #[test]
    fn insert_validates_tuples() {
        let mut s = FiniteStructure::new(Signature::graph(), 2);
        assert!(s.insert(0, vec![0, 2]).is_err());
        assert!(s.insert(0, vec![0]).is_err());
        assert!(s.insert(0, vec![0, 1]).unwrap());
        assert!(!s.insert(0, vec![0, 1]).unwrap());
    }

    #[test]
    fn signature_rejects_duplicates_and_nullary() {
        assert!(Signature::new([("r", 2), ("r", 3)]).is_err());
        assert!(Signature::new([("r", 0)]).is_err());
        let a = Signature::new([("b", 1), ("a", 2)]).unwrap();
        let b = Signature::new([("a", 2), ("b", 1)]).unwrap();
        assert_eq!(a, b);
    }
}
