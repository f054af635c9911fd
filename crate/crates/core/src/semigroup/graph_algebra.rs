//! Graph algebras and the closed-walk law separating them.

use super::identity::Term;
use super::FiniteGroupoid;
use crate::error::{Error, Result};
use crate::reduction::adjacency;
use crate::structure::FiniteStructure;

/// Vertices `1..=n` then `inf`; `u v = v` on edges and `inf` otherwise.
pub fn graph_algebra(graph: &FiniteStructure) -> Result<FiniteGroupoid> {
    let adj = adjacency(graph)?;
    let n = graph.domain_size();
    let mut names: Vec<String> = (1..=n).map(|v| v.to_string()).collect();
    names.push("inf".into());
    FiniteGroupoid::from_fn(
        names,
        |u, v| if u < n && v < n && adj[u].binary_search(&v).is_ok() { v } else { n },
        None,
        Some(n),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerianLaw {
    /// Closed walk using every edge once in each direction.
    pub walk: Vec<usize>,
    /// Left-combed product over the walk, one variable `v<i>` per vertex.
    pub word: Term,
    /// `x x`.
    pub square: Term,
}

/// Variable name for a vertex in the walk word.
pub fn vertex_variable(v: usize) -> String {
    format!("v{}", v + 1)
}

/// Hierholzer's algorithm on the doubled edge set, starting at the least vertex with an edge and
/// always leaving by the least unused arc.
pub fn eulerian_law(graph: &FiniteStructure) -> Result<EulerianLaw> {
    let adj = adjacency(graph)?;
    let start = (0..adj.len()).find(|&v| !adj[v].is_empty()).ok_or(Error::NoEdges)?;
    // every vertex must reach `start`; isolated vertices count as disconnecting
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !std::mem::replace(&mut seen[w], true) {
                stack.push(w);
            }
        }
    }
    if seen.contains(&false) {
        return Err(Error::Disconnected);
    }
    let mut next_arc = vec![0usize; adj.len()];
    let mut path = vec![start];
    let mut walk = Vec::new();
    while let Some(&v) = path.last() {
        if next_arc[v] < adj[v].len() {
            let w = adj[v][next_arc[v]];
            next_arc[v] += 1;
            path.push(w);
        } else {
            walk.push(v);
            path.pop();
        }
    }
    walk.reverse();
    let word = Term::left_combed(walk.iter().map(|&v| Term::var(vertex_variable(v)))).expect("walk is nonempty");
    let square = Term::product(Term::var("x"), Term::var("x"));
    Ok(EulerianLaw { walk, word, square })
}

impl EulerianLaw {
    /// Whether the word evaluates like `x x` when each vertex variable is the vertex itself.
    pub fn holds_under_trivial_assignment(&self, algebra: &FiniteGroupoid, x: usize) -> bool {
        let mut assignment: std::collections::BTreeMap<String, usize> =
            self.walk.iter().map(|&v| (vertex_variable(v), v)).collect();
        assignment.insert("x".into(), x);
        self.word.eval(algebra, &assignment) == self.square.eval(algebra, &assignment)
    }
}
