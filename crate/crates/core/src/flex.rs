//! Local compatibility, robust satisfiability and frozen relation analysis.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom::{enumerate_homs, is_core, Solver};
use crate::structure::{FiniteStructure, HomSet, Tuple};

/// Homomorphism enumeration bound before `k_robust` switches to pinned searches.
const ENUMERATION_LIMIT: usize = 100_000;

/// A relation symbol of the signature or the equality pseudo-symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationRef {
    Symbol(String),
    Equality,
}

impl RelationRef {
    pub fn symbol(name: impl Into<String>) -> Self {
        RelationRef::Symbol(name.into())
    }

    /// `eq` (any case) names equality; anything else is a symbol.
    pub fn parse(text: &str) -> Self {
        if text.eq_ignore_ascii_case("eq") || text == "=" || text.eq_ignore_ascii_case("equality") {
            RelationRef::Equality
        } else {
            RelationRef::Symbol(text.to_string())
        }
    }

    /// Every symbol of the signature plus equality.
    pub fn full_set(structure: &FiniteStructure) -> Vec<RelationRef> {
        let mut all: Vec<RelationRef> =
            structure.signature().symbols().iter().map(|s| RelationRef::Symbol(s.name.clone())).collect();
        all.push(RelationRef::Equality);
        all
    }
}

impl fmt::Display for RelationRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationRef::Symbol(s) => f.write_str(s),
            RelationRef::Equality => f.write_str("="),
        }
    }
}

/// A map from a subset of the instance domain into the template domain.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct PartialAssignment {
    values: BTreeMap<usize, usize>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, element: usize, value: usize) -> Self {
        self.values.insert(element, value);
        self
    }

    pub fn insert(&mut self, element: usize, value: usize) -> Option<usize> {
        self.values.insert(element, value)
    }

    pub fn get(&self, element: usize) -> Option<usize> {
        self.values.get(&element).copied()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn agrees_with(&self, total: &[usize]) -> bool {
        self.values.iter().all(|(&k, &v)| total.get(k) == Some(&v))
    }
}

impl FromIterator<(usize, usize)> for PartialAssignment {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        PartialAssignment { values: iter.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrozenReport {
    pub relation: RelationRef,
    pub frozen_in: Vec<Tuple>,
    pub frozen_out: Vec<Tuple>,
    pub satisfiable: bool,
}

/// True iff every projection of every constraint onto coordinates inside the support
/// lands in the matching projection of the template relation.
pub fn locally_compatible(instance: &FiniteStructure, template: &FiniteStructure, p: &PartialAssignment) -> bool {
    for (r, (_, tuples)) in instance.relations().enumerate() {
        let target = template.relation(r);
        for t in tuples {
            let pinned: Vec<(usize, usize)> =
                t.iter().enumerate().filter_map(|(j, &b)| p.get(b).map(|v| (j, v))).collect();
            if pinned.is_empty() {
                continue;
            }
            if !target.iter().any(|s| pinned.iter().all(|&(j, v)| s[j] == v)) {
                return false;
            }
        }
    }
    true
}

/// All locally compatible partial assignments whose support has size at most `k`.
pub fn locally_compatible_assignments(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    k: usize,
) -> Vec<PartialAssignment> {
    let n = instance.domain_size();
    let m = template.domain_size();
    let mut out = Vec::new();
    for size in 0..=k.min(n) {
        for support in (0..n).combinations(size) {
            for values in std::iter::repeat_n(0..m, size).multi_cartesian_product() {
                let p: PartialAssignment = support.iter().copied().zip(values).collect();
                if locally_compatible(instance, template, &p) {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Every locally compatible partial assignment on at most `k` elements extends to a homomorphism.
pub fn k_robust(instance: &FiniteStructure, template: &FiniteStructure, k: usize) -> Result<bool> {
    Ok(first_rigid_assignment(instance, template, k)?.is_none())
}

/// A locally compatible partial assignment on at most `k` elements that does not extend, if any.
pub fn first_rigid_assignment(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    k: usize,
) -> Result<Option<PartialAssignment>> {
    let solver = Solver::new(instance, template)?;
    let candidates = locally_compatible_assignments(instance, template, k);
    match solver.all_up_to(ENUMERATION_LIMIT) {
        Some(homs) => {
            let mut realised: HashSet<Vec<(usize, usize)>> = HashSet::new();
            let n = instance.domain_size();
            for size in 0..=k.min(n) {
                for support in (0..n).combinations(size) {
                    for h in &homs {
                        realised.insert(support.iter().map(|&b| (b, h[b])).collect());
                    }
                }
            }
            Ok(candidates.into_iter().find(|p| !realised.contains(&p.iter().collect::<Vec<_>>())))
        }
        None => {
            for p in candidates {
                let mut pinned = Solver::new(instance, template)?;
                for (b, v) in p.iter() {
                    pinned.fix(b, v);
                }
                if !pinned.exists() {
                    return Ok(Some(p));
                }
            }
            Ok(None)
        }
    }
}

/// Tuples of the instance lying outside the relation, in lexicographic order.
fn outside_tuples(instance: &FiniteStructure, relation: &RelationRef) -> Result<(Vec<Tuple>, Option<usize>)> {
    let n = instance.domain_size();
    match relation {
        RelationRef::Equality => {
            let pairs = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| vec![u, v])).collect();
            Ok((pairs, None))
        }
        RelationRef::Symbol(name) => {
            let idx = instance
                .signature()
                .index_of(name)
                .ok_or_else(|| Error::SignatureMismatch(format!("no symbol `{name}`")))?;
            let arity = instance.signature().symbols()[idx].arity;
            let rel = instance.relation(idx);
            let tuples = std::iter::repeat_n(0..n, arity)
                .multi_cartesian_product()
                .filter(|t| !rel.contains(t))
                .collect();
            Ok((tuples, Some(idx)))
        }
    }
}

fn image_in(template: &FiniteStructure, relation: Option<usize>, image: &[usize]) -> bool {
    match relation {
        None => image[0] == image[1],
        Some(idx) => template.contains(idx, image),
    }
}

/// Frozen-in and frozen-out tuples computed from the full homomorphism set.
pub fn frozen_report(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    relation: &RelationRef,
) -> Result<FrozenReport> {
    let homs = enumerate_homs(instance, template)?;
    frozen_report_from(instance, template, relation, &homs)
}

/// As [`frozen_report`] but reusing an already enumerated homomorphism set.
pub fn frozen_report_from(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    relation: &RelationRef,
    homs: &HomSet,
) -> Result<FrozenReport> {
    let (outside, idx) = outside_tuples(instance, relation)?;
    let mut report =
        FrozenReport { relation: relation.clone(), frozen_in: vec![], frozen_out: vec![], satisfiable: !homs.is_empty() };
    if homs.is_empty() {
        return Ok(report);
    }
    let mut image = Vec::new();
    for t in outside {
        let (mut some_in, mut some_out) = (false, false);
        for h in homs {
            image.clear();
            image.extend(t.iter().map(|&b| h[b]));
            if image_in(template, idx, &image) {
                some_in = true;
            } else {
                some_out = true;
            }
            if some_in && some_out {
                break;
            }
        }
        if !some_out {
            report.frozen_in.push(t);
        } else if !some_in {
            report.frozen_out.push(t);
        }
    }
    Ok(report)
}

/// Satisfiable, and no relation in `rset` has a frozen-in tuple.
pub fn separation_holds(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    rset: &[RelationRef],
) -> Result<bool> {
    let homs = enumerate_homs(instance, template)?;
    if homs.is_empty() {
        return Ok(false);
    }
    for r in rset {
        if !frozen_report_from(instance, template, r, &homs)?.frozen_in.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Satisfiable, and no relation in `rset` has a frozen-out tuple.
pub fn identification_holds(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    rset: &[RelationRef],
) -> Result<bool> {
    let homs = enumerate_homs(instance, template)?;
    if homs.is_empty() {
        return Ok(false);
    }
    for r in rset {
        if !frozen_report_from(instance, template, r, &homs)?.frozen_out.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerEmbedding {
    /// `map[b][i]` is the value of the `i`-th homomorphism at `b`.
    Present { exponent: usize, map: Vec<Vec<usize>> },
    /// The canonical map sends this tuple outside `relation` into the power's relation.
    Absent { relation: RelationRef, tuple: Tuple },
    Unsatisfiable,
}

impl PowerEmbedding {
    pub fn is_present(&self) -> bool {
        matches!(self, PowerEmbedding::Present { .. })
    }

    /// Whether the embedding map is injective (only meaningful when present).
    pub fn is_injective(&self) -> bool {
        match self {
            PowerEmbedding::Present { map, .. } => map.iter().collect::<BTreeSet<_>>().len() == map.len(),
            _ => false,
        }
    }
}

/// The canonical map `b -> (phi(b))_phi` into the power indexed by all homomorphisms,
/// checked to be a homomorphism that preserves the complement of every relation in `rset`.
pub fn power_embedding(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    rset: &[RelationRef],
) -> Result<PowerEmbedding> {
    let homs = enumerate_homs(instance, template)?;
    if homs.is_empty() {
        return Ok(PowerEmbedding::Unsatisfiable);
    }
    let map: Vec<Vec<usize>> = (0..instance.domain_size()).map(|b| homs.iter().map(|h| h[b]).collect()).collect();
    let exponent = homs.len();
    let coordinate = |t: &[usize], i: usize| -> Vec<usize> { t.iter().map(|&b| map[b][i]).collect() };
    for (r, (_, tuples)) in instance.relations().enumerate() {
        for t in tuples {
            if !(0..exponent).all(|i| template.contains(r, &coordinate(t, i))) {
                return Err(Error::InvalidStructure("canonical map is not a homomorphism".into()));
            }
        }
    }
    for relation in rset {
        let (outside, idx) = outside_tuples(instance, relation)?;
        for t in outside {
            let in_power = match idx {
                None => map[t[0]] == map[t[1]],
                Some(r) => (0..exponent).all(|i| template.contains(r, &coordinate(&t, i))),
            };
            if in_power {
                return Ok(PowerEmbedding::Absent { relation: relation.clone(), tuple: t });
            }
        }
    }
    Ok(PowerEmbedding::Present { exponent, map })
}

/// Membership in the universal Horn class: separation for every symbol and equality.
pub fn uhc_membership(instance: &FiniteStructure, template: &FiniteStructure) -> Result<bool> {
    separation_holds(instance, template, &RelationRef::full_set(instance))
}

/// A decision procedure for homomorphism existence into a fixed template.
pub trait CspOracle {
    fn decide(&self, instance: &FiniteStructure, template: &FiniteStructure) -> Result<bool>;
}

/// The default oracle backed by [`Solver`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverOracle;

impl CspOracle for SolverOracle {
    fn decide(&self, instance: &FiniteStructure, template: &FiniteStructure) -> Result<bool> {
        Ok(Solver::new(instance, template)?.exists())
    }
}

impl<F> CspOracle for F
where
    F: Fn(&FiniteStructure, &FiniteStructure) -> Result<bool>,
{
    fn decide(&self, instance: &FiniteStructure, template: &FiniteStructure) -> Result<bool> {
        self(instance, template)
    }
}

/// `instance` with a copy of `template` adjoined and each pinned element glued to its value.
pub fn glue_template(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    pins: &[(usize, usize)],
) -> Result<FiniteStructure> {
    let union = instance.disjoint_union(template)?;
    let n = instance.domain_size();
    let mut target: Vec<Option<usize>> = vec![None; n];
    for &(b, a) in pins {
        match target[b] {
            Some(prev) if prev != a => {
                return Err(Error::InvalidStructure(format!("element {b} pinned to both {prev} and {a}")))
            }
            _ => target[b] = Some(a),
        }
    }
    let kept = target.iter().filter(|t| t.is_none()).count();
    let mut map = vec![0; union.domain_size()];
    let mut next = 0;
    for b in 0..n {
        map[b] = match target[b] {
            Some(a) => kept + a,
            None => {
                next += 1;
                next - 1
            }
        };
    }
    for a in 0..template.domain_size() {
        map[n + a] = kept + a;
    }
    union.quotient(&map, kept + template.domain_size())
}

fn require_core(instance: &FiniteStructure, template: &FiniteStructure) -> Result<()> {
    instance.check_same_signature(template)?;
    if !is_core(template)? {
        return Err(Error::NotACore);
    }
    Ok(())
}

/// k-robustness decided through oracle queries on glued instances; the template must be a core.
pub fn robust_via_oracle(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    k: usize,
    oracle: &dyn CspOracle,
) -> Result<bool> {
    require_core(instance, template)?;
    for p in locally_compatible_assignments(instance, template, k) {
        let pins: Vec<(usize, usize)> = p.iter().collect();
        if !oracle.decide(&glue_template(instance, template, &pins)?, template)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Condition {
    Separation,
    Identification,
}

fn condition_via_oracle(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    rset: &[RelationRef],
    oracle: &dyn CspOracle,
    condition: Condition,
) -> Result<bool> {
    require_core(instance, template)?;
    if !oracle.decide(instance, template)? {
        return Ok(false);
    }
    let m = template.domain_size();
    for relation in rset {
        let (outside, idx) = outside_tuples(instance, relation)?;
        let Some(arity) = outside.first().map(Vec::len) else {
            continue;
        };
        // the dictionary: complement tuples for separation, relation tuples for identification
        let dictionary: Vec<Tuple> = std::iter::repeat_n(0..m, arity)
            .multi_cartesian_product()
            .filter(|a| image_in(template, idx, a) == (condition == Condition::Identification))
            .collect();
        for b in &outside {
            let mut witnessed = false;
            for a in &dictionary {
                let clash = (0..arity).any(|j| (0..arity).any(|j2| b[j] == b[j2] && a[j] != a[j2]));
                if clash {
                    continue;
                }
                let pins: Vec<(usize, usize)> = b.iter().copied().zip(a.iter().copied()).collect();
                if oracle.decide(&glue_template(instance, template, &pins)?, template)? {
                    witnessed = true;
                    break;
                }
            }
            if !witnessed {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Separation decided by matching each outside tuple against the template's complement relation.
pub fn separation_via_oracle(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    rset: &[RelationRef],
    oracle: &dyn CspOracle,
) -> Result<bool> {
    condition_via_oracle(instance, template, rset, oracle, Condition::Separation)
}

/// Identification decided by matching each outside tuple against the template relation.
pub fn identification_via_oracle(
    instance: &FiniteStructure,
    template: &FiniteStructure,
    rset: &[RelationRef],
    oracle: &dyn CspOracle,
) -> Result<bool> {
    condition_via_oracle(instance, template, rset, oracle, Condition::Identification)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{builtin, complete_graph, cycle_graph, Signature};

    fn eq() -> RelationRef {
        RelationRef::Equality
    }

    fn edge() -> RelationRef {
        RelationRef::symbol("edge")
    }

    fn one_clause() -> FiniteStructure {
        FiniteStructure::from_relations(Signature::one_in_three(), 3, [("R", vec![vec![0, 1, 2]])]).unwrap()
    }

    #[test]
    fn local_compatibility_examples() {
        let two = builtin("TWO").unwrap();
        let k3 = builtin("K3").unwrap();
        let clause = one_clause();
        assert!(!locally_compatible(&clause, &two, &PartialAssignment::new().with(0, 1).with(1, 1)));
        assert!(locally_compatible(&clause, &two, &PartialAssignment::new()));
        let edge = FiniteStructure::graph(2, &[(0, 1)]).unwrap();
        assert!(!locally_compatible(&edge, &k3, &PartialAssignment::new().with(0, 0).with(1, 0)));
    }

    #[test]
    fn oracle_skips_relations_without_outside_tuples() {
        let k3 = builtin("K3").unwrap();
        let single = FiniteStructure::graph(1, &[]).unwrap();
        let rset = [eq(), edge()];
        assert!(separation_via_oracle(&single, &k3, &rset, &SolverOracle).unwrap());
        assert!(separation_holds(&single, &k3, &rset).unwrap());
    }

    #[test]
    fn robustness_examples() {
        let k3 = builtin("K3").unwrap();
        let two = builtin("TWO").unwrap();
        assert!(k_robust(&k3, &k3, 2).unwrap());
        assert!(k_robust(&one_clause(), &two, 2).unwrap());
        assert!(!k_robust(&complete_graph(4), &k3, 1).unwrap());
    }

    #[test]
    fn frozen_examples() {
        let k3 = builtin("K3").unwrap();
        let c4 = cycle_graph(4);
        let r = frozen_report(&c4, &k3, &eq()).unwrap();
        assert!(r.satisfiable && r.frozen_in.is_empty());

        let r = frozen_report(&k3, &k3, &edge()).unwrap();
        assert!(r.frozen_in.is_empty());
        assert_eq!(r.frozen_out, vec![vec![0, 0], vec![1, 1], vec![2, 2]]);

        let r = frozen_report(&complete_graph(4), &k3, &edge()).unwrap();
        assert!(!r.satisfiable && r.frozen_in.is_empty() && r.frozen_out.is_empty());
    }

    #[test]
    fn separation_examples() {
        let k3 = builtin("K3").unwrap();
        assert!(separation_holds(&cycle_graph(4), &k3, &[edge(), eq()]).unwrap());
        assert!(!separation_holds(&complete_graph(4), &k3, &[eq()]).unwrap());
        let two_points = FiniteStructure::graph(2, &[]).unwrap();
        assert!(identification_holds(&two_points, &k3, &[eq()]).unwrap());
        // loops are never edges of K3, so (v, v) is always frozen out
        assert!(!identification_holds(&two_points, &k3, &[edge()]).unwrap());
    }

    #[test]
    fn power_embedding_examples() {
        let k3 = builtin("K3").unwrap();
        let c4 = cycle_graph(4);
        let colourings = enumerate_homs(&c4, &k3).unwrap().len();
        // 3-colourings of a 4-cycle: (k-1)^4 + (k-1) with k = 3
        assert_eq!(colourings, 18);
        match power_embedding(&c4, &k3, &[edge(), eq()]).unwrap() {
            PowerEmbedding::Present { exponent, .. } => assert_eq!(exponent, colourings),
            other => panic!("expected embedding, got {other:?}"),
        }
        match power_embedding(&k3, &k3, &[edge(), eq()]).unwrap() {
            PowerEmbedding::Present { exponent, .. } => assert_eq!(exponent, 6),
            other => panic!("expected embedding, got {other:?}"),
        }
        assert_eq!(power_embedding(&complete_graph(4), &k3, &[]).unwrap(), PowerEmbedding::Unsatisfiable);
    }

    #[test]
    fn uhc_examples() {
        let k3 = builtin("K3").unwrap();
        assert!(uhc_membership(&cycle_graph(4), &k3).unwrap());
        assert!(uhc_membership(&k3, &k3).unwrap());
        assert!(!uhc_membership(&complete_graph(4), &k3).unwrap());
    }

    #[test]
    fn oracle_examples() {
        let k3 = builtin("K3").unwrap();
        let c4 = cycle_graph(4);
        assert!(robust_via_oracle(&k3, &k3, 2, &SolverOracle).unwrap());
        assert_eq!(robust_via_oracle(&c4, &k3, 2, &SolverOracle).unwrap(), k_robust(&c4, &k3, 2).unwrap());
        let not_core = FiniteStructure::graph(4, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(robust_via_oracle(&c4, &not_core, 1, &SolverOracle), Err(Error::NotACore));

        assert!(separation_via_oracle(&c4, &k3, &[eq()], &SolverOracle).unwrap());
        assert!(!separation_via_oracle(&complete_graph(4), &k3, &[eq()], &SolverOracle).unwrap());
        let two = builtin("TWO").unwrap();
        assert!(matches!(
            separation_via_oracle(&k3, &two, &[eq()], &SolverOracle),
            Err(Error::SignatureMismatch(_))
        ));
    }

    #[test]
    fn local_compatibility_is_weaker_than_extension() {
        // NAE on {0,1}: (v,w,x) and (x,y,z) constrained; v=w=1, y=z=0 is locally fine but rigid
        let nae: Vec<Tuple> = std::iter::repeat_n(0..2usize, 3)
            .multi_cartesian_product()
            .filter(|t| !(t[0] == t[1] && t[1] == t[2]))
            .collect();
        let sig = Signature::new([("nae", 3)]).unwrap();
        let template = FiniteStructure::from_relations(sig.clone(), 2, [("nae", nae)]).unwrap();
        let inst = FiniteStructure::from_relations(sig, 5, [("nae", vec![vec![0, 1, 2], vec![2, 3, 4]])]).unwrap();
        let p = PartialAssignment::new().with(0, 1).with(1, 1).with(3, 0).with(4, 0);
        assert!(locally_compatible(&inst, &template, &p));
        let mut solver = Solver::new(&inst, &template).unwrap();
        for (b, v) in p.iter() {
            solver.fix(b, v);
        }
        assert!(!solver.exists());
        assert!(!k_robust(&inst, &template, 4).unwrap());
    }

    #[test]
    fn glue_identifies_pins() {
        let k3 = builtin("K3").unwrap();
        let edge = FiniteStructure::graph(2, &[(0, 1)]).unwrap();
        let glued = glue_template(&edge, &k3, &[(0, 1)]).unwrap();
        assert_eq!(glued.domain_size(), 4);
        // element 1 of the edge is kept at index 0; template vertex 1 sits at 1 + 1
        assert!(glued.contains(0, &[0, 2]));
    }
}
