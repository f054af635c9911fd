//! Not-all-equal clause instances, Gottlob amplification and the split to width three.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::error::{Error, Result};
use crate::flex::PartialAssignment;
use crate::structure::{FiniteStructure, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn positive(var: usize) -> Self {
        Literal { var, negated: false }
    }

    pub fn negative(var: usize) -> Self {
        Literal { var, negated: true }
    }

    pub fn negate(self) -> Self {
        Literal { var: self.var, negated: !self.negated }
    }

    /// Truth value of the literal when its variable takes `value`.
    /// The map is an involution, so it also gives the variable value making the literal `value`.
    pub fn eval(self, value: bool) -> bool {
        value != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{}", self.var + 1)
        } else {
            write!(f, "{}", self.var + 1)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Width three, no negations.
    MonotoneNae3,
    /// Any fixed width, as produced by amplification.
    NaeWide,
    /// Width three with negated chain variables, as produced by splitting.
    Nae3Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NaeInstance {
    variable_count: usize,
    clauses: Vec<Vec<Literal>>,
    mode: Mode,
}

impl NaeInstance {
    pub fn new(variable_count: usize, clauses: Vec<Vec<Literal>>, mode: Mode) -> Result<Self> {
        let width = clauses.first().map(Vec::len);
        for (idx, clause) in clauses.iter().enumerate() {
            if Some(clause.len()) != width {
                return Err(Error::InvalidInstance(format!(
                    "clause {} has width {}, expected {}",
                    idx + 1,
                    clause.len(),
                    width.unwrap_or(0)
                )));
            }
            if let Some(lit) = clause.iter().find(|l| l.var >= variable_count) {
                return Err(Error::InvalidInstance(format!(
                    "clause {} mentions variable {} of {variable_count}",
                    idx + 1,
                    lit.var + 1
                )));
            }
            if clause.iter().any(|l| clause.contains(&l.negate())) {
                return Err(Error::ComplementaryLiterals { clause: idx + 1 });
            }
            if mode == Mode::MonotoneNae3 && clause.iter().any(|l| l.negated) {
                return Err(Error::InvalidInstance(format!("clause {} of a monotone instance has a negation", idx + 1)));
            }
        }
        if matches!(mode, Mode::MonotoneNae3 | Mode::Nae3Split) && width.is_some_and(|w| w != 3) {
            return Err(Error::InvalidInstance(format!("width {} where 3 is required", width.unwrap_or(0))));
        }
        if width == Some(0) {
            return Err(Error::InvalidInstance("empty clause".into()));
        }
        Ok(NaeInstance { variable_count, clauses, mode })
    }

    /// Monotone width-three instance from variable triples.
    pub fn monotone(variable_count: usize, clauses: &[[usize; 3]]) -> Result<Self> {
        let clauses = clauses.iter().map(|c| c.iter().map(|&v| Literal::positive(v)).collect()).collect();
        NaeInstance::new(variable_count, clauses, Mode::MonotoneNae3)
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Common clause width; zero for an instance without clauses.
    pub fn width(&self) -> usize {
        self.clauses.first().map_or(0, Vec::len)
    }

    pub fn is_monotone(&self) -> bool {
        self.clauses.iter().flatten().all(|l| !l.negated)
    }

    /// Whether every clause mentions pairwise distinct variables.
    pub fn has_distinct_variables(&self) -> bool {
        self.clauses.iter().all(|c| c.iter().map(|l| l.var).all_unique())
    }

    pub fn clause_satisfied(clause: &[Literal], values: &[bool]) -> bool {
        let first = clause[0].eval(values[clause[0].var]);
        clause.iter().any(|l| l.eval(values[l.var]) != first)
    }

    pub fn satisfied_by(&self, values: &[bool]) -> bool {
        values.len() == self.variable_count && self.clauses.iter().all(|c| Self::clause_satisfied(c, values))
    }

    /// Encoding as a relational instance and template over `{0,1}`, one relation per sign pattern.
    pub fn to_structures(&self) -> Result<(FiniteStructure, FiniteStructure)> {
        let pattern = |c: &[Literal]| -> String {
            let signs: String = c.iter().map(|l| if l.negated { '-' } else { '+' }).collect();
            format!("nae{signs}")
        };
        let names: BTreeSet<String> = self.clauses.iter().map(|c| pattern(c)).collect();
        let signature = Signature::new(names.iter().map(|n| (n.clone(), n.len() - 3)))?;
        let mut instance = FiniteStructure::new(signature.clone(), self.variable_count);
        let mut template = FiniteStructure::new(signature.clone(), 2);
        for name in &names {
            let idx = signature.index_of(name).expect("pattern names are in the signature");
            let negated: Vec<bool> = name[3..].chars().map(|c| c == '-').collect();
            for bits in std::iter::repeat_n([false, true], negated.len()).multi_cartesian_product() {
                let truths: Vec<bool> = bits.iter().zip(&negated).map(|(&b, &n)| b != n).collect();
                if truths.iter().any(|&t| t != truths[0]) {
                    template.insert(idx, bits.iter().map(|&b| usize::from(b)).collect())?;
                }
            }
        }
        for clause in &self.clauses {
            let idx = signature.index_of(&pattern(clause)).expect("pattern names are in the signature");
            instance.insert(idx, clause.iter().map(|l| l.var).collect())?;
        }
        Ok((instance, template))
    }
}

/// Every fully assigned clause is NAE-satisfied; proper projections of NAE are full.
pub fn nae_locally_compatible(instance: &NaeInstance, pins: &[(usize, bool)]) -> bool {
    let value = |v: usize| pins.iter().find(|p| p.0 == v).map(|p| p.1);
    for (i, &(v, b)) in pins.iter().enumerate() {
        if pins[..i].iter().any(|&(w, c)| w == v && c != b) {
            return false;
        }
    }
    instance.clauses.iter().all(|clause| {
        let truths: Option<Vec<bool>> = clause.iter().map(|l| value(l.var).map(|b| l.eval(b))).collect();
        truths.is_none_or(|t| t.iter().any(|&x| x != t[0]))
    })
}

/// DPLL search with NAE unit propagation; decisions go to the lowest free variable, `false` first.
pub struct NaeSolver<'a> {
    instance: &'a NaeInstance,
    occurrences: Vec<Vec<usize>>,
}

impl<'a> NaeSolver<'a> {
    pub fn new(instance: &'a NaeInstance) -> Self {
        let mut occurrences = vec![Vec::new(); instance.variable_count];
        for (c, clause) in instance.clauses.iter().enumerate() {
            for v in clause.iter().map(|l| l.var).unique() {
                occurrences[v].push(c);
            }
        }
        NaeSolver { instance, occurrences }
    }

    pub fn solve(&self, pins: &[(usize, bool)]) -> Option<Vec<bool>> {
        let mut found = None;
        self.search(pins, &mut |sol| {
            found = Some(sol.to_vec());
            false
        });
        found
    }

    /// Visits solutions extending `pins` in lexicographic order (false < true) while `visit` returns true.
    pub fn search(&self, pins: &[(usize, bool)], visit: &mut dyn FnMut(&[bool]) -> bool) {
        let n = self.instance.variable_count;
        let mut values: Vec<Option<bool>> = vec![None; n];
        let mut trail: Vec<usize> = Vec::new();
        for &(v, b) in pins {
            match values[v] {
                Some(old) if old != b => return,
                Some(_) => {}
                None => {
                    values[v] = Some(b);
                    trail.push(v);
                }
            }
        }
        // (decision variable, trail length before it, whether `true` is being tried)
        let mut decisions: Vec<(usize, usize, bool)> = Vec::new();
        let mut head = 0;
        let mut cursor = 0;
        loop {
            let consistent = self.propagate(&mut values, &mut trail, &mut head);
            if consistent {
                while cursor < n && values[cursor].is_some() {
                    cursor += 1;
                }
                if cursor < n {
                    decisions.push((cursor, trail.len(), false));
                    values[cursor] = Some(false);
                    trail.push(cursor);
                    continue;
                }
                let solution: Vec<bool> = values.iter().map(|v| v.expect("all assigned")).collect();
                if !visit(&solution) {
                    return;
                }
            }
            // backtrack to the most recent decision still offering `true`
            loop {
                let Some((var, mark, tried_true)) = decisions.pop() else {
                    return;
                };
                for v in trail.drain(mark..) {
                    values[v] = None;
                }
                head = head.min(mark);
                cursor = var;
                if !tried_true {
                    decisions.push((var, mark, true));
                    values[var] = Some(true);
                    trail.push(var);
                    break;
                }
            }
        }
    }

    fn propagate(&self, values: &mut [Option<bool>], trail: &mut Vec<usize>, head: &mut usize) -> bool {
        while *head < trail.len() {
            let var = trail[*head];
            *head += 1;
            for &c in &self.occurrences[var] {
                let clause = &self.instance.clauses[c];
                let (mut seen_true, mut seen_false) = (false, false);
                let mut free: Option<Literal> = None;
                let mut free_vars = 0;
                for &lit in clause {
                    match values[lit.var] {
                        Some(b) => {
                            if lit.eval(b) {
                                seen_true = true;
                            } else {
                                seen_false = true;
                            }
                        }
                        None => {
                            if free.is_none_or(|f| f.var != lit.var) {
                                free_vars += 1;
                            }
                            free = Some(lit);
                        }
                    }
                }
                if seen_true && seen_false {
                    continue;
                }
                match (free_vars, free) {
                    (0, _) => return false,
                    (1, Some(lit)) if seen_true || seen_false => {
                        // the last free literal must differ from the assigned ones
                        let want = !seen_true;
                        values[lit.var] = Some(lit.eval(want));
                        trail.push(lit.var);
                    }
                    _ => {}
                }
            }
        }
        true
    }
}

/// Some NAE-satisfying assignment, if one exists.
pub fn nae_satisfiable(instance: &NaeInstance) -> Option<Vec<bool>> {
    NaeSolver::new(instance).solve(&[])
}

/// Pinned NAE queries that remember every solution found, so repeated queries are mostly lookups.
pub struct WitnessCache<'a> {
    solver: NaeSolver<'a>,
    solutions: Vec<Vec<bool>>,
    pub queries: usize,
    pub solver_calls: usize,
}

impl<'a> WitnessCache<'a> {
    pub fn new(instance: &'a NaeInstance) -> Self {
        WitnessCache { solver: NaeSolver::new(instance), solutions: Vec::new(), queries: 0, solver_calls: 0 }
    }

    pub fn extend(&mut self, pins: &[(usize, bool)]) -> Option<&[bool]> {
        self.queries += 1;
        if let Some(i) = self.solutions.iter().position(|s| pins.iter().all(|&(v, b)| s[v] == b)) {
            return Some(&self.solutions[i]);
        }
        self.solver_calls += 1;
        let sol = self.solver.solve(pins)?;
        self.solutions.push(sol);
        self.solutions.last().map(Vec::as_slice)
    }
}

/// A locally compatible assignment to at most `k` variables with no NAE-satisfying extension.
pub fn nae_rigid_assignment(instance: &NaeInstance, k: usize) -> Option<Vec<(usize, bool)>> {
    let mut cache = WitnessCache::new(instance);
    let n = instance.variable_count;
    for size in 0..=k.min(n) {
        for support in (0..n).combinations(size) {
            for bits in std::iter::repeat_n([false, true], size).multi_cartesian_product() {
                let pins: Vec<(usize, bool)> = support.iter().copied().zip(bits).collect();
                if nae_locally_compatible(instance, &pins) && cache.extend(&pins).is_none() {
                    return Some(pins);
                }
            }
        }
    }
    None
}

pub fn nae_k_robust(instance: &NaeInstance, k: usize) -> bool {
    nae_rigid_assignment(instance, k).is_none()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmplifiedInstance {
    instance: NaeInstance,
    k: usize,
    origin: Vec<(usize, usize)>,
}

impl AmplifiedInstance {
    pub fn instance(&self) -> &NaeInstance {
        &self.instance
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn replicas(&self) -> usize {
        2 * self.k + 1
    }

    /// `(original variable, replica)` for every amplified variable; replicas are 0-based.
    pub fn origin(&self) -> &[(usize, usize)] {
        &self.origin
    }

    pub fn original_variable_count(&self) -> usize {
        self.instance.variable_count / self.replicas()
    }

    /// Rebuilds the bookkeeping for a stored amplified instance by re-amplifying its source.
    pub fn from_parts(instance: NaeInstance, k: usize) -> Result<Self> {
        let replicas = 2 * k + 1;
        let bad = || Error::InvalidInstance(format!("instance is not a k = {k} amplification"));
        if k == 0 || !instance.variable_count.is_multiple_of(replicas) {
            return Err(bad());
        }
        let block = (0..replicas).combinations(k + 1).count().pow(3);
        if !instance.clauses.len().is_multiple_of(block) || !instance.clauses.is_empty() && instance.width() != 3 * (k + 1) {
            return Err(bad());
        }
        // the first descendant of each clause takes replicas 0..=k of every literal
        let source: Vec<[usize; 3]> = instance
            .clauses
            .iter()
            .step_by(block)
            .map(|c| [0, 1, 2].map(|i| c[i * (k + 1)].var / replicas))
            .collect();
        let rebuilt = gottlob_amplify(&NaeInstance::monotone(instance.variable_count / replicas, &source)?, k)?;
        if rebuilt.instance.clauses != instance.clauses {
            return Err(bad());
        }
        Ok(rebuilt)
    }

    /// Copies each original value onto all of its replicas.
    pub fn lift(&self, values: &[bool]) -> Vec<bool> {
        self.origin.iter().map(|&(i, _)| values[i]).collect()
    }
}

/// Replaces each clause by all clauses picking a `(k+1)`-subset of replicas per literal.
pub fn gottlob_amplify(instance: &NaeInstance, k: usize) -> Result<AmplifiedInstance> {
    if k == 0 {
        return Err(Error::InvalidInstance("amplification needs k >= 1".into()));
    }
    if instance.width() != 3 && !instance.clauses.is_empty() || !instance.is_monotone() {
        return Err(Error::InvalidInstance("amplification expects a monotone width-3 instance".into()));
    }
    if let Some(c) = instance.clauses.iter().position(|c| !c.iter().map(|l| l.var).all_unique()) {
        return Err(Error::InvalidInstance(format!("clause {} repeats a variable", c + 1)));
    }
    let replicas = 2 * k + 1;
    let subsets: Vec<Vec<usize>> = (0..replicas).combinations(k + 1).collect();
    let mut clauses = Vec::with_capacity(instance.clauses.len() * subsets.len().pow(3));
    for clause in &instance.clauses {
        for (s1, s2, s3) in itertools::iproduct!(&subsets, &subsets, &subsets) {
            let wide = clause
                .iter()
                .zip([s1, s2, s3])
                .flat_map(|(lit, subset)| subset.iter().map(move |&j| Literal::positive(lit.var * replicas + j)))
                .collect();
            clauses.push(wide);
        }
    }
    let n = instance.variable_count * replicas;
    let origin = (0..n).map(|v| (v / replicas, v % replicas)).collect();
    Ok(AmplifiedInstance { instance: NaeInstance::new(n, clauses, Mode::NaeWide)?, k, origin })
}

/// Majority value over the replicas of each original variable.
pub fn majority_decode(values: &[bool], amplified: &AmplifiedInstance) -> Vec<bool> {
    let r = amplified.replicas();
    values.chunks(r).map(|chunk| 2 * chunk.iter().filter(|&&b| b).count() > r).collect()
}

/// A width-3 instance from splitting wide clauses with fresh chain variables.
///
/// A wide clause `(y_1 .. y_m)` becomes `(y_1 y_2 z_2) (-z_2 y_3 z_3) .. (-z_{m-2} y_{m-1} y_m)`;
/// chain variables follow all original variables, grouped by wide clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split3Instance {
    instance: NaeInstance,
    x_count: usize,
    wide: Vec<Vec<Literal>>,
    z_chain: Vec<Vec<usize>>,
    ancestor: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZMetadata {
    pub variable: usize,
    pub ancestor: usize,
    /// Chain index `i` of `z_i`, in `2..=m-2`.
    pub position: usize,
}

pub fn split_to_3(wide: &NaeInstance) -> Result<Split3Instance> {
    let m = wide.width();
    if m < 4 {
        return Err(Error::InvalidInstance(format!("splitting needs width at least 4, got {m}")));
    }
    let x_count = wide.variable_count;
    let mut next_z = x_count;
    let mut clauses = Vec::new();
    let mut ancestor = Vec::new();
    let mut z_chain = Vec::new();
    let mut sorted_wide = Vec::new();
    for (c, clause) in wide.clauses.iter().enumerate() {
        let mut ys = clause.clone();
        ys.sort_by_key(|l| l.var);
        // zs[t] is z_{t+2}
        let zs: Vec<usize> = (next_z..next_z + m - 3).collect();
        next_z += m - 3;
        clauses.push(vec![ys[0], ys[1], Literal::positive(zs[0])]);
        for t in 1..m - 3 {
            clauses.push(vec![Literal::negative(zs[t - 1]), ys[t + 1], Literal::positive(zs[t])]);
        }
        clauses.push(vec![Literal::negative(zs[m - 4]), ys[m - 2], ys[m - 1]]);
        ancestor.extend((0..m - 2).map(|t| (c, t)));
        z_chain.push(zs);
        sorted_wide.push(ys);
    }
    Ok(Split3Instance {
        instance: NaeInstance::new(next_z, clauses, Mode::Nae3Split)?,
        x_count,
        wide: sorted_wide,
        z_chain,
        ancestor,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stabilized {
    pub assignment: PartialAssignment,
    /// X-variables given a value that had none before.
    pub x_variables_used: usize,
    /// Clauses decided regardless of the free boundary chain literals.
    pub clauses: Range<usize>,
    pub left_boundary: Option<usize>,
    pub right_boundary: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, ThisError)]
pub enum StabilizeFailure {
    #[error("variable {0} is not a chain variable")]
    NotAChainLiteral(usize),
    #[error("pre-existing value of variable {0} blocks both patterns")]
    Conflict(usize),
    #[error("the extension violates clause {0}")]
    Incompatible(usize),
}

impl Split3Instance {
    /// Rebuilds chain bookkeeping from a split instance and its chain-variable metadata.
    pub fn from_parts(instance: NaeInstance, x_count: usize, z_meta: &[ZMetadata]) -> Result<Self> {
        let bad = |msg: String| Error::InvalidInstance(msg);
        let chain_len = instance.width().max(3);
        let groups = if z_meta.is_empty() { 0 } else { z_meta.iter().map(|z| z.ancestor).max().unwrap_or(0) + 1 };
        let per_wide = z_meta.iter().filter(|z| z.ancestor == 0).count();
        let m = per_wide + 3;
        let descendants = m - 2;
        if instance.clauses.len() != groups * descendants || chain_len != 3 {
            return Err(bad("clause count does not match the chain metadata".into()));
        }
        let mut z_chain = vec![vec![usize::MAX; m - 3]; groups];
        for z in z_meta {
            if z.position < 2 || z.position > m - 2 || z.ancestor >= groups {
                return Err(bad(format!("chain variable {} has position {} out of range", z.variable + 1, z.position)));
            }
            z_chain[z.ancestor][z.position - 2] = z.variable;
        }
        let mut wide = Vec::new();
        for (c, zs) in z_chain.iter().enumerate() {
            if zs.contains(&usize::MAX) {
                return Err(bad(format!("wide clause {} has an incomplete chain", c + 1)));
            }
            let block = &instance.clauses[c * descendants..(c + 1) * descendants];
            let mut ys = vec![block[0][0], block[0][1]];
            ys.extend(block[1..descendants - 1].iter().map(|cl| cl[1]));
            ys.push(block[descendants - 1][1]);
            ys.push(block[descendants - 1][2]);
            wide.push(ys);
        }
        let rebuilt = split_to_3(&NaeInstance::new(x_count, wide, Mode::NaeWide)?)?;
        let renamed: Vec<Vec<Literal>> = rebuilt
            .instance
            .clauses
            .iter()
            .map(|cl| {
                cl.iter()
                    .map(|l| match rebuilt.z_position(l.var) {
                        Some((c, i)) => Literal { var: z_chain[c][i - 2], negated: l.negated },
                        None => *l,
                    })
                    .collect()
            })
            .collect();
        if renamed != instance.clauses {
            return Err(bad("clauses do not follow the chain layout".into()));
        }
        Ok(Split3Instance { instance, x_count, wide: rebuilt.wide, z_chain, ancestor: rebuilt.ancestor })
    }

    pub fn instance(&self) -> &NaeInstance {
        &self.instance
    }

    pub fn x_variables(&self) -> Range<usize> {
        0..self.x_count
    }

    pub fn z_variables(&self) -> Range<usize> {
        self.x_count..self.instance.variable_count
    }

    pub fn is_z(&self, var: usize) -> bool {
        var >= self.x_count && var < self.instance.variable_count
    }

    /// Wide clauses with literals in ascending variable order.
    pub fn wide_clauses(&self) -> &[Vec<Literal>] {
        &self.wide
    }

    pub fn z_chain(&self) -> &[Vec<usize>] {
        &self.z_chain
    }

    /// `(wide clause, descendant index)` for each 3-clause.
    pub fn ancestor(&self) -> &[(usize, usize)] {
        &self.ancestor
    }

    pub fn wide_width(&self) -> usize {
        self.wide.first().map_or(0, Vec::len)
    }

    /// `(wide clause, i)` for the chain variable `z_i`.
    pub fn z_position(&self, var: usize) -> Option<(usize, usize)> {
        if !self.is_z(var) {
            return None;
        }
        let per = self.wide_width() - 3;
        let offset = var - self.x_count;
        Some((offset / per, offset % per + 2))
    }

    pub fn z_metadata(&self) -> Vec<ZMetadata> {
        self.z_variables()
            .map(|v| {
                let (ancestor, position) = self.z_position(v).expect("chain variable");
                ZMetadata { variable: v, ancestor, position }
            })
            .collect()
    }

    /// Global index of the `t`-th descendant (1-based, as in the chain layout) of a wide clause.
    fn clause_index(&self, wide: usize, t: usize) -> usize {
        wide * (self.wide_width() - 2) + t - 1
    }

    /// Each chain variable occurs once positively and once negatively.
    pub fn chain_occurrences_ok(&self) -> bool {
        let mut counts = vec![(0usize, 0usize); self.instance.variable_count];
        for lit in self.instance.clauses.iter().flatten() {
            let slot = &mut counts[lit.var];
            if lit.negated {
                slot.1 += 1;
            } else {
                slot.0 += 1;
            }
        }
        self.z_variables().all(|z| counts[z] == (1, 1))
            && self.x_variables().all(|x| counts[x].1 == 0 || self.wide.iter().flatten().any(|l| l.var == x && l.negated))
    }

    /// Extends X values to the chain variables, if possible.
    pub fn extend_from_x(&self, x_values: &[bool]) -> Option<Vec<bool>> {
        let pins: Vec<(usize, bool)> = x_values.iter().copied().enumerate().collect();
        NaeSolver::new(&self.instance).solve(&pins)
    }

    /// Fixes the chain literal `z` to `value` and assigns a few neighbouring X-variables so the
    /// clauses around it are NAE-satisfied whatever the boundary chain literals become.
    ///
    /// Each side first tries the narrow pattern and widens by one X-variable when a preset value
    /// conflicts.
    pub fn stabilize(
        &self,
        z: Literal,
        value: bool,
        partial: &PartialAssignment,
    ) -> std::result::Result<Stabilized, StabilizeFailure> {
        let (c, i) = self.z_position(z.var).ok_or(StabilizeFailure::NotAChainLiteral(z.var))?;
        let m = self.wide_width();
        let zv = z.eval(value);
        let y = |j: usize| self.wide[c][j - 1];
        let zvar = |j: usize| self.z_chain[c][j - 2];
        let mut out = partial.clone();
        let mut used = 0;
        let mut set = |out: &mut PartialAssignment, lit: Literal, truth: bool| -> std::result::Result<(), StabilizeFailure> {
            let want = usize::from(lit.eval(truth));
            match out.get(lit.var) {
                Some(old) if old != want => Err(StabilizeFailure::Conflict(lit.var)),
                Some(_) => Ok(()),
                None => {
                    if !self.is_z(lit.var) {
                        used += 1;
                    }
                    out.insert(lit.var, want);
                    Ok(())
                }
            }
        };
        let lit_value = |out: &PartialAssignment, lit: Literal| out.get(lit.var).map(|v| lit.eval(v == 1));

        set(&mut out, Literal::positive(zvar(i)), zv)?;

        // z_i sits in descendant i-1 next to y_i
        let (first, left_boundary) = if lit_value(&out, y(i)) != Some(zv) {
            set(&mut out, y(i), !zv)?;
            (i - 1, (i > 2).then(|| zvar(i - 1)))
        } else if i == 2 {
            set(&mut out, y(1), !zv)?;
            (1, None)
        } else {
            set(&mut out, Literal::positive(zvar(i - 1)), zv)?;
            set(&mut out, y(i - 1), !zv)?;
            (i - 2, (i > 3).then(|| zvar(i - 2)))
        };

        // -z_i sits in descendant i next to y_{i+1}
        let (last, right_boundary) = if lit_value(&out, y(i + 1)) != Some(!zv) {
            set(&mut out, y(i + 1), zv)?;
            (i, (i < m - 2).then(|| zvar(i + 1)))
        } else if i == m - 2 {
            set(&mut out, y(m), zv)?;
            (m - 2, None)
        } else {
            set(&mut out, Literal::positive(zvar(i + 1)), zv)?;
            set(&mut out, y(i + 2), zv)?;
            (i + 1, (i + 1 < m - 2).then(|| zvar(i + 2)))
        };

        let pins: Vec<(usize, bool)> = out.iter().map(|(v, b)| (v, b == 1)).collect();
        if !nae_locally_compatible(&self.instance, &pins) {
            let bad = self
                .instance
                .clauses
                .iter()
                .position(|cl| !nae_locally_compatible(&NaeInstance { clauses: vec![cl.clone()], ..self.instance.clone() }, &pins))
                .unwrap_or(0);
            return Err(StabilizeFailure::Incompatible(bad));
        }
        Ok(Stabilized {
            assignment: out,
            x_variables_used: used,
            clauses: self.clause_index(c, first)..self.clause_index(c, last) + 1,
            left_boundary,
            right_boundary,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ItemStatus {
    Holds,
    Fails { witness: String },
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaItem {
    pub item: usize,
    pub description: String,
    pub status: ItemStatus,
    pub checks: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub satisfiable: bool,
    pub items: Vec<LemmaItem>,
}

impl LemmaReport {
    pub fn all_hold(&self) -> bool {
        self.items.iter().all(|i| i.status == ItemStatus::Holds)
    }
}

fn describe_pins(pins: &[(usize, bool)]) -> String {
    pins.iter().map(|&(v, b)| format!("x{}={}", v + 1, u8::from(b))).join(" ")
}

/// Measures the four flexibility properties of a split instance by exhaustive pinned search.
pub fn check_lemma_nae_props(split: &Split3Instance, guard: usize) -> Result<LemmaReport> {
    let inst = &split.instance;
    if inst.variable_count > guard {
        return Err(Error::guard("variables for lemma checks", guard));
    }
    let names = [
        "2-robust NAE-satisfiability",
        "pairs extend with the first literal in majority",
        "chain literals admit matching X-variables",
        "clause valuations extend",
    ];
    let satisfiable = nae_satisfiable(inst).is_some();
    if !satisfiable {
        let items = names
            .iter()
            .enumerate()
            .map(|(i, d)| LemmaItem { item: i + 1, description: d.to_string(), status: ItemStatus::Vacuous, checks: 0 })
            .collect();
        return Ok(LemmaReport { satisfiable, items });
    }
    let mut cache = WitnessCache::new(inst);
    let mut items = Vec::new();

    let status = match nae_rigid_assignment(inst, 2) {
        None => ItemStatus::Holds,
        Some(p) => ItemStatus::Fails { witness: describe_pins(&p) },
    };
    items.push(LemmaItem { item: 1, description: names[0].into(), status, checks: 0 });

    // item 2
    let literals: BTreeSet<Literal> = inst.clauses.iter().flatten().copied().collect();
    let mut checks = 0;
    let mut status = ItemStatus::Holds;
    'outer: for (c, clause) in inst.clauses.iter().enumerate() {
        for (pos, &lit) in clause.iter().enumerate() {
            for &other in &literals {
                let elsewhere = inst.clauses.iter().enumerate().any(|(d, cl)| d != c && cl.contains(&other));
                if !elsewhere {
                    continue;
                }
                for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
                    let pins = vec![(lit.var, lit.eval(a)), (other.var, other.eval(b))];
                    if !nae_locally_compatible(inst, &pins) {
                        continue;
                    }
                    checks += 1;
                    let extends = clause.iter().enumerate().filter(|&(q, _)| q != pos).any(|(_, &o)| {
                        let mut with = pins.clone();
                        with.push((o.var, o.eval(a)));
                        nae_locally_compatible(inst, &with) && cache.extend(&with).is_some()
                    });
                    if !extends {
                        status = ItemStatus::Fails {
                            witness: format!("clause {} literal {lit}={} with {other}={}", c + 1, u8::from(a), u8::from(b)),
                        };
                        break 'outer;
                    }
                }
            }
        }
    }
    items.push(LemmaItem { item: 2, description: names[1].into(), status, checks });

    // item 3
    let mut checks = 0;
    let mut status = ItemStatus::Holds;
    'z: for z in split.z_variables() {
        let host = |negated: bool| {
            inst.clauses.iter().find(|cl| cl.contains(&Literal { var: z, negated })).expect("chain variable occurs twice")
        };
        let xs_in = |cl: &Vec<Literal>| -> Vec<usize> { cl.iter().filter(|l| !split.is_z(l.var)).map(|l| l.var).collect() };
        let (xs, ys) = (xs_in(host(false)), xs_in(host(true)));
        for v in [false, true] {
            checks += 1;
            let found = xs.iter().any(|&x| {
                ys.iter().any(|&y| {
                    let pins = [(z, v), (x, v), (y, !v)];
                    nae_locally_compatible(inst, &pins) && cache.extend(&pins).is_some()
                })
            });
            if !found {
                status = ItemStatus::Fails { witness: format!("chain variable x{} = {}", z + 1, u8::from(v)) };
                break 'z;
            }
        }
    }
    items.push(LemmaItem { item: 3, description: names[2].into(), status, checks });

    // item 4
    let mut checks = 0;
    let mut status = ItemStatus::Holds;
    'clauses: for (c, clause) in inst.clauses.iter().enumerate() {
        for bits in std::iter::repeat_n([false, true], clause.len()).multi_cartesian_product() {
            if bits.iter().all(|&b| b == bits[0]) {
                continue;
            }
            let pins: Vec<(usize, bool)> = clause.iter().zip(&bits).map(|(l, &t)| (l.var, l.eval(t))).collect();
            if !nae_locally_compatible(inst, &pins) {
                continue;
            }
            checks += 1;
            if cache.extend(&pins).is_none() {
                status = ItemStatus::Fails { witness: format!("clause {} with {}", c + 1, describe_pins(&pins)) };
                break 'clauses;
            }
        }
    }
    items.push(LemmaItem { item: 4, description: names[3].into(), status, checks });

    Ok(LemmaReport { satisfiable, items })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flex::k_robust;

    fn brute_nae(inst: &NaeInstance) -> Vec<Vec<bool>> {
        let n = inst.variable_count();
        (0..1u64 << n)
            .map(|code| (0..n).map(|i| code >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|a| inst.satisfied_by(a))
            .collect()
    }

    fn all_solutions(inst: &NaeInstance) -> Vec<Vec<bool>> {
        let mut out = Vec::new();
        NaeSolver::new(inst).search(&[], &mut |s| {
            out.push(s.to_vec());
            true
        });
        out.sort();
        out
    }

    #[test]
    fn satisfiability_examples() {
        let one = NaeInstance::monotone(3, &[[0, 1, 2]]).unwrap();
        assert!(nae_satisfiable(&one).is_some());
        let collapsed = NaeInstance::monotone(1, &[[0, 0, 0]]).unwrap();
        assert!(nae_satisfiable(&collapsed).is_none());
        let both = NaeInstance::new(
            3,
            vec![
                vec![Literal::positive(0), Literal::positive(1), Literal::positive(2)],
                vec![Literal::negative(0), Literal::negative(1), Literal::negative(2)],
            ],
            Mode::NaeWide,
        )
        .unwrap();
        assert_eq!(brute_nae(&both).len(), 6);
        assert_eq!(all_solutions(&both).len(), 6);
    }

    #[test]
    fn complementary_literals_rejected() {
        let bad = NaeInstance::new(2, vec![vec![Literal::positive(0), Literal::negative(0), Literal::positive(1)]], Mode::Nae3Split);
        assert_eq!(bad, Err(Error::ComplementaryLiterals { clause: 1 }));
    }

    #[test]
    fn solver_matches_brute_force() {
        let all5: Vec<[usize; 3]> =
            (0..5).combinations(3).map(|c| [c[0], c[1], c[2]]).collect();
        let unsat = NaeInstance::monotone(5, &all5).unwrap();
        assert!(brute_nae(&unsat).is_empty());
        assert!(nae_satisfiable(&unsat).is_none());
        let some = NaeInstance::monotone(5, &all5[..4]).unwrap();
        let mut brute = brute_nae(&some);
        brute.sort();
        assert_eq!(all_solutions(&some), brute);
    }

    #[test]
    fn amplification_sizes() {
        let one = NaeInstance::monotone(3, &[[0, 1, 2]]).unwrap();
        let a1 = gottlob_amplify(&one, 1).unwrap();
        assert_eq!(a1.instance().variable_count(), 9);
        assert_eq!(a1.instance().clauses().len(), 27);
        assert_eq!(a1.instance().width(), 6);
        let a2 = gottlob_amplify(&one, 2).unwrap();
        assert_eq!(a2.instance().variable_count(), 15);
        assert_eq!(a2.instance().clauses().len(), 1000);
        assert_eq!(a2.instance().width(), 9);
        let two = NaeInstance::monotone(6, &[[0, 1, 2], [3, 4, 5]]).unwrap();
        let t1 = gottlob_amplify(&two, 1).unwrap();
        assert_eq!((t1.instance().variable_count(), t1.instance().clauses().len()), (18, 54));
        assert!(gottlob_amplify(&one, 0).is_err());
    }

    #[test]
    fn majority_and_lift() {
        let one = NaeInstance::monotone(3, &[[0, 1, 2]]).unwrap();
        let amp = gottlob_amplify(&one, 1).unwrap();
        let mut nu = vec![false; 9];
        nu[0] = true;
        nu[1] = true;
        assert_eq!(majority_decode(&nu, &amp), vec![true, false, false]);
        assert_eq!(majority_decode(&[false; 9], &amp), vec![false; 3]);
        let sat = vec![true, false, true];
        assert_eq!(majority_decode(&amp.lift(&sat), &amp), sat);
        assert!(amp.instance().satisfied_by(&amp.lift(&sat)));
    }

    #[test]
    fn majority_argument_exhaustive() {
        let one = NaeInstance::monotone(3, &[[0, 1, 2]]).unwrap();
        let amp = gottlob_amplify(&one, 1).unwrap();
        for code in 0..1u32 << 9 {
            let nu: Vec<bool> = (0..9).map(|i| code >> i & 1 == 1).collect();
            if !one.satisfied_by(&majority_decode(&nu, &amp)) {
                assert!(!amp.instance().satisfied_by(&nu));
            }
        }
    }

    #[test]
    fn split_sizes_and_equivalence() {
        let wide6 = NaeInstance::new(6, vec![(0..6).map(Literal::positive).collect()], Mode::NaeWide).unwrap();
        let s = split_to_3(&wide6).unwrap();
        assert_eq!(s.instance().clauses().len(), 4);
        assert_eq!(s.z_variables().len(), 3);
        assert!(s.chain_occurrences_ok());
        assert_eq!(nae_satisfiable(&wide6).is_some(), nae_satisfiable(s.instance()).is_some());
        let wide9 = NaeInstance::new(9, vec![(0..9).map(Literal::positive).collect()], Mode::NaeWide).unwrap();
        let s9 = split_to_3(&wide9).unwrap();
        assert_eq!((s9.instance().clauses().len(), s9.z_variables().len()), (7, 6));
        let stuck = NaeInstance::new(1, vec![vec![Literal::positive(0); 6]], Mode::NaeWide).unwrap();
        assert!(nae_satisfiable(split_to_3(&stuck).unwrap().instance()).is_none());
        let narrow = NaeInstance::monotone(3, &[[0, 1, 2]]).unwrap();
        assert!(split_to_3(&narrow).is_err());
    }

    #[test]
    fn split_projection_matches_wide_solutions() {
        let wide = NaeInstance::new(
            7,
            vec![(0..6).map(Literal::positive).collect(), (1..7).map(Literal::positive).collect()],
            Mode::NaeWide,
        )
        .unwrap();
        let split = split_to_3(&wide).unwrap();
        let projected: BTreeSet<Vec<bool>> = all_solutions(split.instance()).into_iter().map(|s| s[..7].to_vec()).collect();
        let direct: BTreeSet<Vec<bool>> = brute_nae(&wide).into_iter().collect();
        assert_eq!(projected, direct);
    }

    #[test]
    fn from_parts_round_trip() {
        let wide = NaeInstance::new(
            7,
            vec![(0..6).map(Literal::positive).collect(), (1..7).map(Literal::positive).collect()],
            Mode::NaeWide,
        )
        .unwrap();
        let split = split_to_3(&wide).unwrap();
        let back = Split3Instance::from_parts(split.instance().clone(), 7, &split.z_metadata()).unwrap();
        assert_eq!(back, split);
    }

    fn chain6() -> Split3Instance {
        let wide6 = NaeInstance::new(6, vec![(0..6).map(Literal::positive).collect()], Mode::NaeWide).unwrap();
        split_to_3(&wide6).unwrap()
    }

    #[test]
    fn stabilize_narrow_pattern() {
        let s = chain6();
        // z_2 is variable 6; y_2 = variable 1, y_3 = variable 2
        let out = s.stabilize(Literal::positive(6), false, &PartialAssignment::new()).unwrap();
        assert_eq!(out.assignment.get(1), Some(1));
        assert_eq!(out.assignment.get(2), Some(0));
        assert_eq!(out.x_variables_used, 2);
        assert_eq!(out.left_boundary, None);
        assert_eq!(out.right_boundary, Some(7));
    }

    #[test]
    fn stabilize_widens_on_conflict() {
        let s = chain6();
        let preset = PartialAssignment::new().with(1, 0).with(2, 1);
        let out = s.stabilize(Literal::positive(6), false, &preset).unwrap();
        assert_eq!(out.assignment.get(0), Some(1));
        assert_eq!(out.assignment.get(7), Some(0));
        assert_eq!(out.assignment.get(3), Some(0));
        assert_eq!(out.right_boundary, Some(8));
        let blocked = PartialAssignment::new().with(1, 0).with(0, 0);
        assert!(matches!(s.stabilize(Literal::positive(6), false, &blocked), Err(StabilizeFailure::Conflict(_))));
        assert!(matches!(
            s.stabilize(Literal::positive(0), false, &PartialAssignment::new()),
            Err(StabilizeFailure::NotAChainLiteral(0))
        ));
    }

    #[test]
    fn stabilized_clauses_are_decided() {
        let s = chain6();
        for z in s.z_variables() {
            for value in [false, true] {
                for code in 0..1u32 << 6 {
                    // preset a random-ish subset of X values
                    let preset: PartialAssignment =
                        (0..6).filter(|i| code >> i & 1 == 1).map(|i| (i, (code as usize >> (i / 2)) & 1)).collect();
                    let Ok(out) = s.stabilize(Literal::positive(z), value, &preset) else { continue };
                    for c in out.clauses.clone() {
                        let truths: Vec<bool> = s.instance().clauses()[c]
                            .iter()
                            .filter_map(|l| out.assignment.get(l.var).map(|v| l.eval(v == 1)))
                            .collect();
                        assert!(truths.contains(&true) && truths.contains(&false));
                    }
                }
            }
        }
    }

    #[test]
    fn robustness_matches_structure_encoding() {
        let inst = NaeInstance::monotone(5, &[[0, 1, 2], [2, 3, 4]]).unwrap();
        let (b, a) = inst.to_structures().unwrap();
        for k in 0..=4 {
            assert_eq!(nae_k_robust(&inst, k), k_robust(&b, &a, k).unwrap(), "k = {k}");
        }
        assert!(nae_k_robust(&inst, 2));
        assert!(!nae_k_robust(&inst, 4));
    }

    #[test]
    fn amplified_toy_is_robust() {
        let one = NaeInstance::monotone(3, &[[0, 1, 2]]).unwrap();
        let amp = gottlob_amplify(&one, 1).unwrap();
        assert!(nae_k_robust(amp.instance(), 1));
    }

    #[test]
    fn lemma_report_on_unsatisfiable_input() {
        let stuck = NaeInstance::new(1, vec![vec![Literal::positive(0); 6]], Mode::NaeWide).unwrap();
        let report = check_lemma_nae_props(&split_to_3(&stuck).unwrap(), 1000).unwrap();
        assert!(!report.satisfiable);
        assert!(report.items.iter().all(|i| i.status == ItemStatus::Vacuous));
    }

    #[test]
    fn lemma_items_match_brute_force() {
        let wides = [
            NaeInstance::new(6, vec![(0..6).map(Literal::positive).collect()], Mode::NaeWide).unwrap(),
            NaeInstance::new(
                4,
                vec![
                    vec![Literal::positive(0), Literal::positive(1), Literal::positive(2), Literal::positive(2)],
                    vec![Literal::positive(0), Literal::positive(1), Literal::positive(3), Literal::positive(3)],
                    vec![Literal::positive(2), Literal::positive(3), Literal::positive(0), Literal::positive(0)],
                ],
                Mode::NaeWide,
            )
            .unwrap(),
        ];
        for wide in &wides {
            let split = split_to_3(wide).unwrap();
            let inst = split.instance();
            let sols = brute_nae(inst);
            let extends = |pins: &[(usize, bool)]| sols.iter().any(|s| pins.iter().all(|&(v, b)| s[v] == b));
            let item4 = inst.clauses().iter().all(|clause| {
                std::iter::repeat_n([false, true], 3).multi_cartesian_product().all(|bits| {
                    let pins: Vec<(usize, bool)> = clause.iter().zip(&bits).map(|(l, &t)| (l.var, l.eval(t))).collect();
                    bits.iter().all(|&b| b == bits[0]) || !nae_locally_compatible(inst, &pins) || extends(&pins)
                })
            });
            let report = check_lemma_nae_props(&split, 1000).unwrap();
            assert_eq!(report.items[3].status == ItemStatus::Holds, item4);
            let robust2 = (0..inst.variable_count()).combinations(2).all(|vs| {
                std::iter::repeat_n([false, true], 2).multi_cartesian_product().all(|bits| {
                    let pins: Vec<(usize, bool)> = vs.iter().copied().zip(bits).collect();
                    !nae_locally_compatible(inst, &pins) || extends(&pins)
                })
            });
            assert_eq!(report.items[0].status == ItemStatus::Holds, robust2);
        }
    }
}
