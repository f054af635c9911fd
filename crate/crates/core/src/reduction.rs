//! NAE3 instances to triangulated graphs, and graphs to monotone 1-in-3 instances.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::ControlFlow;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom::Solver;
use crate::nae::{Literal, Mode, NaeInstance};
use crate::structure::{builtin, FiniteStructure, HomSet, Signature, EDGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Special,
    Literal(Literal),
    /// Positions are 0-based.
    ClausePos { clause: usize, position: usize },
    Connector { clause: usize, position: usize },
}

/// Vertex `0` is special, then `x`, `-x` per variable, then per clause three
/// position vertices followed by three connectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionGraph {
    graph: FiniteStructure,
    roles: Vec<Role>,
    clauses: Vec<Vec<Literal>>,
    variable_count: usize,
}

impl ReductionGraph {
    pub const SPECIAL: usize = 0;

    pub fn graph(&self) -> &FiniteStructure {
        &self.graph
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn vertex_count(&self) -> usize {
        self.roles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edges().len()
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn literal_vertex(&self, lit: Literal) -> usize {
        1 + 2 * lit.var + usize::from(lit.negated)
    }

    pub fn clause_pos(&self, clause: usize, position: usize) -> usize {
        1 + 2 * self.variable_count + 6 * clause + position
    }

    pub fn connector(&self, clause: usize, position: usize) -> usize {
        self.clause_pos(clause, position) + 3
    }

    /// Rebuilds from a graph and its role labels, checking both against a fresh construction.
    pub fn from_parts(graph: FiniteStructure, roles: Vec<Role>) -> Result<Self> {
        let variable_count = roles.iter().filter(|r| matches!(r, Role::Literal(_))).count() / 2;
        let clause_count = roles.iter().filter(|r| matches!(r, Role::ClausePos { .. })).count() / 3;
        let adjacency = adjacency(&graph)?;
        let mut clauses = vec![Vec::new(); clause_count];
        for (v, role) in roles.iter().enumerate() {
            if let Role::ClausePos { clause, position } = *role {
                let lit = adjacency[v]
                    .iter()
                    .find_map(|&w| match roles.get(w) {
                        Some(Role::Literal(l)) => Some(*l),
                        _ => None,
                    })
                    .ok_or_else(|| Error::InvalidStructure(format!("position vertex {} has no literal", v + 1)))?;
                if clause >= clause_count || position > 2 {
                    return Err(Error::InvalidStructure(format!("vertex {} has an out-of-range role", v + 1)));
                }
                clauses[clause].push((position, lit));
            }
        }
        let clauses: Vec<Vec<Literal>> =
            clauses.into_iter().map(|mut c| { c.sort(); c.into_iter().map(|p| p.1).collect() }).collect();
        let inst = NaeInstance::new(variable_count, clauses, Mode::NaeWide)?;
        let rebuilt = nae_to_graph(&inst)?;
        if rebuilt.roles != roles || rebuilt.graph != graph {
            return Err(Error::InvalidStructure("graph does not match the construction for its roles".into()));
        }
        Ok(rebuilt)
    }

    /// The NAE3 instance this graph was built from.
    pub fn source_instance(&self) -> NaeInstance {
        NaeInstance::new(self.variable_count, self.clauses.clone(), Mode::NaeWide).expect("validated at construction")
    }
}

/// Sorted neighbour lists of a simple graph.
pub fn adjacency(graph: &FiniteStructure) -> Result<Vec<Vec<usize>>> {
    let mut adj = vec![Vec::new(); graph.domain_size()];
    for (u, v) in graph.edges() {
        if u == v {
            return Err(Error::InvalidStructure(format!("loop at vertex {}", u + 1)));
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    Ok(adj)
}

pub fn nae_to_graph(inst: &NaeInstance) -> Result<ReductionGraph> {
    if !inst.clauses().is_empty() && inst.width() != 3 {
        return Err(Error::InvalidInstance(format!("graph construction needs width 3, got {}", inst.width())));
    }
    // a repeated variable (x x y) or (x -x y) would close a 4-cycle through the position clique
    if let Some(c) = inst.clauses().iter().position(|c| !c.iter().map(|l| l.var).all_unique()) {
        return Err(Error::InvalidInstance(format!("clause {} repeats a variable", c + 1)));
    }
    let n = inst.variable_count();
    let m = inst.clauses().len();
    let mut roles = vec![Role::Special];
    for v in 0..n {
        roles.push(Role::Literal(Literal::positive(v)));
        roles.push(Role::Literal(Literal::negative(v)));
    }
    for clause in 0..m {
        roles.extend((0..3).map(|position| Role::ClausePos { clause, position }));
        roles.extend((0..3).map(|position| Role::Connector { clause, position }));
    }
    let mut rg = ReductionGraph {
        graph: FiniteStructure::new(Signature::graph(), roles.len()),
        roles,
        clauses: inst.clauses().to_vec(),
        variable_count: n,
    };
    let mut edges = Vec::with_capacity(3 * n + 12 * m);
    for v in 0..n {
        let (pos, neg) = (rg.literal_vertex(Literal::positive(v)), rg.literal_vertex(Literal::negative(v)));
        edges.extend([(0, pos), (0, neg), (pos, neg)]);
    }
    for (e, clause) in inst.clauses().iter().enumerate() {
        edges.extend((0..3).tuple_combinations().map(|(i, j)| (rg.clause_pos(e, i), rg.clause_pos(e, j))));
        for (i, &lit) in clause.iter().enumerate() {
            let (l, c, p) = (rg.literal_vertex(lit), rg.connector(e, i), rg.clause_pos(e, i));
            edges.extend([(l, c), (c, p), (l, p)]);
        }
    }
    rg.graph = FiniteStructure::graph(rg.roles.len(), &edges)?;
    Ok(rg)
}

/// Four distinct vertices `a b c d` with `ab bc cd da` all edges, if any.
pub fn find_four_cycle(graph: &FiniteStructure) -> Result<Option<[usize; 4]>> {
    let adj = adjacency(graph)?;
    // each 4-cycle is found from its vertex of highest degree rank, scanning only lower-ranked
    // two-step paths; this keeps the work near m * sqrt(m) even with one huge hub
    let order: Vec<usize> = (0..adj.len()).sorted_by_key(|&v| (std::cmp::Reverse(adj[v].len()), v)).collect();
    let mut rank = vec![0; adj.len()];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let mut seen: Vec<Option<(usize, usize)>> = vec![None; adj.len()];
    for &u in &order {
        for &v in adj[u].iter().filter(|&&v| rank[v] > rank[u]) {
            for &w in adj[v].iter().filter(|&&w| rank[w] > rank[u]) {
                match seen[w] {
                    Some((owner, other)) if owner == u => return Ok(Some([u, other, w, v])),
                    _ => seen[w] = Some((u, v)),
                }
            }
        }
    }
    Ok(None)
}

/// All 3-cliques as ascending triples, in lexicographic order.
pub fn triangles(graph: &FiniteStructure) -> Result<Vec<[usize; 3]>> {
    let adj = adjacency(graph)?;
    let mut out = Vec::new();
    for (u, nbrs) in adj.iter().enumerate() {
        for &v in nbrs.iter().filter(|&&v| v > u) {
            for &w in adj[v].iter().filter(|&&w| w > v) {
                if nbrs.binary_search(&w).is_ok() {
                    out.push([u, v, w]);
                }
            }
        }
    }
    Ok(out)
}

/// An edge lying in no triangle, if any.
pub fn untriangulated_edge(graph: &FiniteStructure) -> Result<Option<(usize, usize)>> {
    let adj = adjacency(graph)?;
    Ok(graph.edges().into_iter().find(|&(u, v)| !adj[u].iter().any(|w| adj[v].binary_search(w).is_ok())))
}

/// The graph plus a ternary `triangle` relation on each of its triangles, against `K3` plus every
/// colour permutation. Homomorphisms are exactly the 3-colourings; the implied relation lets
/// propagation act on whole triangles, which pairwise disequality alone cannot.
#[derive(Debug, Clone)]
pub struct ColouringCsp {
    pub instance: FiniteStructure,
    pub template: FiniteStructure,
}

impl ColouringCsp {
    pub fn new(graph: &FiniteStructure) -> Result<Self> {
        let signature = Signature::new([(EDGE, 2), (TRIANGLE, 3)])?;
        let tris = triangles(graph)?.into_iter().map(|t| t.to_vec()).collect();
        let edges = graph.relation_named(EDGE).map(|r| r.iter().cloned().collect()).unwrap_or_default();
        let instance =
            FiniteStructure::from_relations(signature.clone(), graph.domain_size(), [(EDGE, edges), (TRIANGLE, tris)])?;
        let k3 = builtin("K3")?;
        let k3_edges = k3.relation_named(EDGE).expect("K3 has edges").iter().cloned().collect();
        let perms = (0..3).permutations(3).collect();
        let template = FiniteStructure::from_relations(signature, 3, [(EDGE, k3_edges), (TRIANGLE, perms)])?;
        Ok(ColouringCsp { instance, template })
    }

    pub fn solver(&self) -> Solver<'_> {
        Solver::new(&self.instance, &self.template).expect("signatures agree by construction")
    }
}

const TRIANGLE: &str = "triangle";

pub fn three_colouring(graph: &FiniteStructure) -> Result<Option<Vec<usize>>> {
    Ok(ColouringCsp::new(graph)?.solver().first())
}

pub fn three_colourings(graph: &FiniteStructure) -> Result<HomSet> {
    Ok(ColouringCsp::new(graph)?.solver().all())
}

/// Permutes colours so the special vertex gets colour 2.
pub fn normalize_colouring(colouring: &[usize]) -> Vec<usize> {
    let s = colouring[ReductionGraph::SPECIAL];
    colouring
        .iter()
        .map(|&c| if c == s { 2 } else if c == 2 { s } else { c })
        .collect()
}

/// Truth values read off the positive literal vertices.
pub fn decode_colouring(rg: &ReductionGraph, colouring: &[usize]) -> Result<Vec<bool>> {
    let special = colouring[ReductionGraph::SPECIAL];
    if special != 2 {
        return Err(Error::NotNormalized(special));
    }
    Ok((0..rg.variable_count).map(|v| colouring[rg.literal_vertex(Literal::positive(v))] == 1).collect())
}

/// The colouring of a NAE-satisfying assignment using the least admissible position permutation.
pub fn encode_colouring(rg: &ReductionGraph, values: &[bool]) -> Result<Vec<usize>> {
    let inst = rg.source_instance();
    if !inst.satisfied_by(values) {
        return Err(Error::InvalidInstance("assignment does not NAE-satisfy the instance".into()));
    }
    let mut colouring = vec![2; rg.vertex_count()];
    for (v, &b) in values.iter().enumerate() {
        colouring[rg.literal_vertex(Literal::positive(v))] = usize::from(b);
        colouring[rg.literal_vertex(Literal::negative(v))] = usize::from(!b);
    }
    for (e, clause) in rg.clauses.iter().enumerate() {
        let truth: Vec<usize> = clause.iter().map(|l| usize::from(l.eval(values[l.var]))).collect();
        let perm = (0..3)
            .permutations(3)
            .find(|p| (0..3).all(|i| p[i] != truth[i]))
            .expect("NAE clause admits a position permutation");
        for i in 0..3 {
            colouring[rg.clause_pos(e, i)] = perm[i];
            colouring[rg.connector(e, i)] = 3 - truth[i] - perm[i];
        }
    }
    Ok(colouring)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    A2 { vertex: usize },
    B2 { triangle: usize, colour: usize },
}

/// Monotone 1-in-3 instance with ascending variable triples as clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneInThreeInstance {
    variable_count: usize,
    clauses: Vec<[usize; 3]>,
    provenance: Option<Vec<Provenance>>,
}

impl OneInThreeInstance {
    pub fn new(variable_count: usize, clauses: Vec<[usize; 3]>) -> Result<Self> {
        let mut clauses = clauses;
        for (idx, c) in clauses.iter_mut().enumerate() {
            if c.iter().any(|&v| v >= variable_count) {
                return Err(Error::InvalidInstance(format!("clause {} mentions a variable out of range", idx + 1)));
            }
            c.sort_unstable();
        }
        Ok(OneInThreeInstance { variable_count, clauses, provenance: None })
    }

    /// Attaches construction provenance; A2 clauses must be vertex triples and B2 clauses colour-classes.
    pub fn with_provenance(mut self, provenance: Vec<Provenance>) -> Result<Self> {
        if provenance.len() != self.clauses.len() {
            return Err(Error::InvalidInstance("provenance length differs from clause count".into()));
        }
        for (idx, (clause, prov)) in self.clauses.iter().zip(&provenance).enumerate() {
            let ok = match *prov {
                Provenance::A2 { vertex } => *clause == [3 * vertex, 3 * vertex + 1, 3 * vertex + 2],
                Provenance::B2 { colour, .. } => {
                    colour < 3 && clause.iter().all(|v| v % 3 == colour) && clause[0] / 3 < clause[1] / 3
                }
            };
            if !ok {
                return Err(Error::InvalidInstance(format!("clause {} does not match its provenance", idx + 1)));
            }
        }
        self.provenance = Some(provenance);
        Ok(self)
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn clauses(&self) -> &[[usize; 3]] {
        &self.clauses
    }

    pub fn provenance(&self) -> Option<&[Provenance]> {
        self.provenance.as_deref()
    }

    pub fn satisfied_by(&self, values: &[bool]) -> bool {
        values.len() == self.variable_count
            && self.clauses.iter().all(|c| c.iter().filter(|&&v| values[v]).count() == 1)
    }

    pub fn to_structure(&self) -> FiniteStructure {
        let mut s = FiniteStructure::new(Signature::one_in_three(), self.variable_count);
        for c in &self.clauses {
            s.insert(0, c.to_vec()).expect("clauses are in range");
        }
        s
    }

    /// Variables occurring in some clause.
    pub fn occurring_variables(&self) -> BTreeSet<usize> {
        self.clauses.iter().flatten().copied().collect()
    }
}

/// Variable `x_{i,j}` ("vertex i has colour j") is `3i + j`.
pub fn graph_to_1in3(graph: &FiniteStructure) -> Result<OneInThreeInstance> {
    if let Some((u, v)) = untriangulated_edge(graph)? {
        return Err(Error::UntriangulatedEdge(u, v));
    }
    let tris = triangles(graph)?;
    let mut sides: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in tris.iter().enumerate() {
        for (a, b) in [(tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2])] {
            if let Some(prev) = sides.insert((a, b), t) {
                return Err(Error::InvalidInstance(format!(
                    "triangles {} and {} share the edge {{{}, {}}}, so B2 clauses would share two variables",
                    prev + 1,
                    t + 1,
                    a + 1,
                    b + 1
                )));
            }
        }
    }
    let n = graph.domain_size();
    let mut clauses = Vec::new();
    let mut provenance = Vec::new();
    for vertex in 0..n {
        clauses.push([3 * vertex, 3 * vertex + 1, 3 * vertex + 2]);
        provenance.push(Provenance::A2 { vertex });
    }
    for (triangle, tri) in tris.iter().enumerate() {
        for colour in 0..3 {
            clauses.push([3 * tri[0] + colour, 3 * tri[1] + colour, 3 * tri[2] + colour]);
            provenance.push(Provenance::B2 { triangle, colour });
        }
    }
    OneInThreeInstance::new(3 * n, clauses)?.with_provenance(provenance)
}

pub fn colouring_to_1in3(colouring: &[usize]) -> Vec<bool> {
    colouring.iter().flat_map(|&c| (0..3).map(move |j| j == c)).collect()
}

/// The colouring encoded by a 1-in-3 assignment, if every vertex has exactly one colour.
pub fn one_in_three_to_colouring(values: &[bool]) -> Option<Vec<usize>> {
    values
        .chunks(3)
        .map(|ch| if ch.iter().filter(|&&b| b).count() == 1 { ch.iter().position(|&b| b) } else { None })
        .collect()
}

pub fn one_in_three_satisfiable(inst: &OneInThreeInstance) -> Result<Option<Vec<bool>>> {
    let two = builtin("TWO")?;
    Ok(crate::hom::csp_solve(&inst.to_structure(), &two)?.map(|a| a.into_iter().map(|v| v == 1).collect()))
}

/// All satisfying assignments, or a guard error once more than `limit` are found.
pub fn one_in_three_solutions(inst: &OneInThreeInstance, limit: usize) -> Result<Vec<Vec<bool>>> {
    let two = builtin("TWO")?;
    let solver = Solver::new(&inst.to_structure(), &two)?;
    let homs = solver.all_up_to(limit).ok_or_else(|| Error::guard("1-in-3 solutions", limit))?;
    Ok(homs.into_iter().map(|a| a.into_iter().map(|v| v == 1).collect()).collect())
}

/// Co-clausal pairs grouped into linkage classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkedClasses {
    /// Each class lists its pairs in ascending order; classes are ordered by their least pair.
    pub classes: Vec<Vec<(usize, usize)>>,
    pub class_of: BTreeMap<(usize, usize), usize>,
    /// Third variables completing each pair to a clause.
    pub apexes: BTreeMap<(usize, usize), BTreeSet<usize>>,
    /// Two pairs in one class that are not directly linked, if any.
    pub non_clique: Option<((usize, usize), (usize, usize))>,
}

impl LinkedClasses {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn is_clique_union(&self) -> bool {
        self.non_clique.is_none()
    }

    pub fn class_of_pair(&self, u: usize, v: usize) -> Option<usize> {
        self.class_of.get(&(u.min(v), u.max(v))).copied()
    }
}

/// Errors only when a constructed instance (one carrying provenance) has a non-clique class.
pub fn linked_classes(inst: &OneInThreeInstance) -> Result<LinkedClasses> {
    let mut apexes: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for c in &inst.clauses {
        if !c.iter().all_unique() {
            continue;
        }
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            apexes.entry((c[i], c[j])).or_default().insert(c[k]);
        }
    }
    let pairs: Vec<(usize, usize)> = apexes.keys().copied().collect();
    let index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut parent: Vec<usize> = (0..pairs.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    let mut by_apex: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (p, zs) in &apexes {
        for &z in zs {
            by_apex.entry(z).or_default().push(index[p]);
        }
    }
    for members in by_apex.values() {
        for &m in &members[1..] {
            let (a, b) = (find(&mut parent, members[0]), find(&mut parent, m));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, &p) in pairs.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(p);
    }
    let classes: Vec<Vec<(usize, usize)>> = groups.into_values().collect();
    let mut class_of = BTreeMap::new();
    for (c, class) in classes.iter().enumerate() {
        for &p in class {
            class_of.insert(p, c);
        }
    }
    let non_clique = classes.iter().find_map(|class| {
        class
            .iter()
            .tuple_combinations()
            .find(|(p, q)| apexes[p].is_disjoint(&apexes[q]))
            .map(|(p, q)| (*p, *q))
    });
    if let (Some((p, q)), Some(_)) = (non_clique, inst.provenance.as_ref()) {
        return Err(Error::Linkage(format!(
            "pairs {{{}, {}}} and {{{}, {}}} share a class without being linked",
            p.0 + 1,
            p.1 + 1,
            q.0 + 1,
            q.1 + 1
        )));
    }
    Ok(LinkedClasses { classes, class_of, apexes, non_clique })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservationStatus {
    Pass,
    Fail { witness: String },
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationReport {
    /// Statuses of Observations I to IV in order.
    pub items: [ObservationStatus; 4],
    pub solution_count: Option<usize>,
}

impl ObservationReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|s| *s == ObservationStatus::Pass)
    }
}

fn clause_pair_overlap(inst: &OneInThreeInstance) -> Option<(usize, usize)> {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (idx, c) in inst.clauses.iter().enumerate() {
        for (a, b) in c.iter().copied().tuple_combinations() {
            if let Some(prev) = seen.insert((a, b), idx) {
                return Some((prev, idx));
            }
        }
    }
    None
}

/// Observations II and III structurally; I and IV from the co-true relation over all solutions.
///
/// I fails exactly when some variable is never true or some non-clause triple is pairwise never
/// co-true. IV fails exactly when some variable is never true or four variables are pairwise never
/// co-true. Both are vacuous for unsatisfiable instances.
pub fn check_observations(inst: &OneInThreeInstance, solution_limit: usize) -> Result<ObservationReport> {
    let ii = if let Some(c) = inst.clauses.iter().position(|c| !c.iter().all_unique()) {
        ObservationStatus::Fail { witness: format!("clause {} repeats a variable", c + 1) }
    } else if let Some((a, b)) = clause_pair_overlap(inst) {
        ObservationStatus::Fail { witness: format!("clauses {} and {} share two variables", a + 1, b + 1) }
    } else {
        ObservationStatus::Pass
    };
    let linked = linked_classes(&OneInThreeInstance { provenance: None, ..inst.clone() })?;
    let iii = match linked.non_clique {
        None => ObservationStatus::Pass,
        Some((p, q)) => ObservationStatus::Fail {
            witness: format!("pairs {{{}, {}}} and {{{}, {}}} are not linked", p.0 + 1, p.1 + 1, q.0 + 1, q.1 + 1),
        },
    };
    let solutions = one_in_three_solutions(inst, solution_limit)?;
    if solutions.is_empty() {
        return Ok(ObservationReport {
            items: [ObservationStatus::Vacuous, ii, iii, ObservationStatus::Vacuous],
            solution_count: Some(0),
        });
    }
    let n = inst.variable_count;
    let words = n.div_ceil(64);
    // co_true[u] is a bitset of variables true together with u in some solution
    let mut co_true = vec![vec![0u64; words]; n];
    for sol in &solutions {
        let trues: Vec<usize> = (0..n).filter(|&v| sol[v]).collect();
        for &u in &trues {
            for &v in &trues {
                co_true[u][v / 64] |= 1 << (v % 64);
            }
        }
    }
    let together = |u: usize, v: usize| co_true[u][v / 64] >> (v % 64) & 1 == 1;
    let dead = (0..n).find(|&v| !together(v, v));
    let clause_set: BTreeSet<[usize; 3]> = inst.clauses.iter().copied().collect();
    let apart: Vec<Vec<usize>> =
        (0..n).map(|u| (u + 1..n).filter(|&v| !together(u, v)).collect()).collect();
    let mut triple = None;
    let mut quadruple = None;
    for u in 0..n {
        for (i, &v) in apart[u].iter().enumerate() {
            for &w in &apart[u][i + 1..] {
                if together(v, w) {
                    continue;
                }
                if triple.is_none() && !clause_set.contains(&[u, v, w]) {
                    triple = Some([u, v, w]);
                }
                if quadruple.is_none() {
                    if let Some(&x) = apart[w].iter().find(|&&x| !together(u, x) && !together(v, x)) {
                        quadruple = Some([u, v, w, x]);
                    }
                }
            }
        }
    }
    let names = |vs: &[usize]| vs.iter().map(|v| format!("x{}", v + 1)).join(" ");
    let i = match (dead, triple) {
        (Some(v), _) => ObservationStatus::Fail { witness: format!("x{} is never true", v + 1) },
        (None, Some(t)) => ObservationStatus::Fail { witness: format!("non-clause {} is pairwise never co-true", names(&t)) },
        (None, None) => ObservationStatus::Pass,
    };
    let iv = match (dead, quadruple) {
        (Some(v), _) => ObservationStatus::Fail { witness: format!("x{} is never true", v + 1) },
        (None, Some(q)) => ObservationStatus::Fail { witness: format!("{} are pairwise never co-true", names(&q)) },
        (None, None) => ObservationStatus::Pass,
    };
    Ok(ObservationReport { items: [i, ii, iii, iv], solution_count: Some(solutions.len()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgePairClass {
    ForcedTwo,
    ForcedThree,
    Flexible,
    Uncolourable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePairReport {
    /// Classification by exhaustive search; authoritative.
    pub class: EdgePairClass,
    /// Classification from the local configurations alone.
    pub pattern: EdgePairClass,
    pub agrees: bool,
    pub two_colour_witness: Option<Vec<usize>>,
    pub three_colour_witness: Option<Vec<usize>>,
}

/// The local configuration class of two distinct edges, assuming the graph is 3-colourable.
pub fn edge_pair_pattern(adj: &[Vec<usize>], e1: (usize, usize), e2: (usize, usize)) -> EdgePairClass {
    let adjacent = |a: usize, b: usize| adj[a].binary_search(&b).is_ok();
    let ends: Vec<usize> = [e1.0, e1.1, e2.0, e2.1].into_iter().sorted().dedup().collect();
    if ends.iter().tuple_combinations().any(|(&a, &b, &c)| adjacent(a, b) && adjacent(a, c) && adjacent(b, c)) {
        return EdgePairClass::ForcedThree;
    }
    if ends.len() < 4 {
        return EdgePairClass::Flexible;
    }
    let outside = |w: &usize| !ends.contains(w);
    if adj[e1.0].iter().filter(|w| outside(w)).any(|&w| ends.iter().all(|&p| adjacent(w, p))) {
        return EdgePairClass::ForcedTwo;
    }
    let apexes = |e: (usize, usize)| -> Vec<usize> {
        adj[e.0].iter().copied().filter(|&w| outside(&w) && adjacent(w, e.1)).collect()
    };
    let (a1, a2) = (apexes(e1), apexes(e2));
    if a1.iter().any(|&w1| a2.iter().any(|&w2| w1 != w2 && adjacent(w1, w2))) {
        return EdgePairClass::ForcedThree;
    }
    EdgePairClass::Flexible
}

/// Classifies two distinct edges by the number of colours their endpoints can take.
pub fn edge_pair_flex(graph: &FiniteStructure, e1: (usize, usize), e2: (usize, usize)) -> Result<EdgePairReport> {
    let adj = adjacency(graph)?;
    let csp = ColouringCsp::new(graph)?;
    let ends: Vec<usize> = [e1.0, e1.1, e2.0, e2.1].into_iter().sorted().dedup().collect();
    let mut two = None;
    let mut three = None;
    // the first endpoint may be fixed to colour 0 by symmetry
    for tail in std::iter::repeat_n(0..3usize, ends.len() - 1).multi_cartesian_product() {
        let colours: Vec<usize> = std::iter::once(0).chain(tail).collect();
        let used = colours.iter().unique().count();
        let slot = if used == 2 { &mut two } else if used == 3 { &mut three } else { continue };
        if slot.is_some() {
            continue;
        }
        let mut solver = csp.solver();
        for (&v, &c) in ends.iter().zip(&colours) {
            solver.fix(v, c);
        }
        *slot = solver.first();
        if two.is_some() && three.is_some() {
            break;
        }
    }
    let class = match (&two, &three) {
        (None, None) => EdgePairClass::Uncolourable,
        (Some(_), None) => EdgePairClass::ForcedTwo,
        (None, Some(_)) => EdgePairClass::ForcedThree,
        (Some(_), Some(_)) => EdgePairClass::Flexible,
    };
    let pattern = if class == EdgePairClass::Uncolourable { class } else { edge_pair_pattern(&adj, e1, e2) };
    Ok(EdgePairReport { class, pattern, agrees: class == pattern, two_colour_witness: two, three_colour_witness: three })
}

pub type EdgePairEntry = ((usize, usize), (usize, usize), EdgePairReport);

/// Every unordered pair of distinct edges with its report, deciding colour counts from one
/// enumeration of all colourings.
pub fn all_edge_pairs(graph: &FiniteStructure, limit: usize) -> Result<Vec<EdgePairEntry>> {
    let adj = adjacency(graph)?;
    let mut colourings = Vec::new();
    let complete = ColouringCsp::new(graph)?.solver().for_each(|c| {
        colourings.push(c.to_vec());
        if colourings.len() > limit { ControlFlow::Break(()) } else { ControlFlow::Continue(()) }
    });
    if !complete {
        return Err(Error::guard("3-colourings", limit));
    }
    let edges = graph.edges();
    let mut out = Vec::new();
    for (&e1, &e2) in edges.iter().tuple_combinations() {
        let ends: Vec<usize> = [e1.0, e1.1, e2.0, e2.1].into_iter().sorted().dedup().collect();
        let count = |c: &Vec<usize>| ends.iter().map(|&v| c[v]).unique().count();
        let two = colourings.iter().find(|c| count(c) == 2).cloned();
        let three = colourings.iter().find(|c| count(c) == 3).cloned();
        let class = match (&two, &three) {
            (None, None) => EdgePairClass::Uncolourable,
            (Some(_), None) => EdgePairClass::ForcedTwo,
            (None, Some(_)) => EdgePairClass::ForcedThree,
            (Some(_), Some(_)) => EdgePairClass::Flexible,
        };
        let pattern = if class == EdgePairClass::Uncolourable { class } else { edge_pair_pattern(&adj, e1, e2) };
        out.push((e1, e2, EdgePairReport { class, pattern, agrees: class == pattern, two_colour_witness: two, three_colour_witness: three }));
    }
    Ok(out)
}
