//! Homomorphism search: backtracking with generalised arc consistency.
//!
//! Domains are bitmasks over the template, so templates are limited to 64 elements.
//! Branching picks the variable with the smallest remaining domain (lowest index on
//! ties) and tries values in ascending order.

use std::collections::VecDeque;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::structure::{Assignment, FiniteStructure, HomSet};

struct Constraint {
    relation: usize,
    scope: Vec<usize>,
}

pub struct Solver<'a> {
    template: &'a FiniteStructure,
    template_tuples: Vec<Vec<&'a [usize]>>,
    constraints: Vec<Constraint>,
    watches: Vec<Vec<usize>>,
    domains: Vec<u64>,
}

impl<'a> Solver<'a> {
    pub fn new(instance: &FiniteStructure, template: &'a FiniteStructure) -> Result<Self> {
        instance.check_same_signature(template)?;
        let size = template.domain_size();
        if size > 64 {
            return Err(Error::TemplateTooLarge(size));
        }
        let full = if size == 64 { u64::MAX } else { (1u64 << size) - 1 };
        let template_tuples = (0..template.signature().len())
            .map(|r| template.relation(r).iter().map(|t| t.as_slice()).collect())
            .collect();
        let mut constraints = Vec::new();
        let mut watches = vec![Vec::new(); instance.domain_size()];
        for r in 0..instance.signature().len() {
            for t in instance.relation(r) {
                let id = constraints.len();
                let mut vars = t.clone();
                vars.sort_unstable();
                vars.dedup();
                for v in vars {
                    watches[v].push(id);
                }
                constraints.push(Constraint { relation: r, scope: t.clone() });
            }
        }
        Ok(Solver {
            template,
            template_tuples,
            constraints,
            watches,
            domains: vec![full; instance.domain_size()],
        })
    }

    /// Restricts a variable to a single value.
    pub fn fix(&mut self, var: usize, value: usize) -> &mut Self {
        self.domains[var] &= if value < 64 { 1u64 << value } else { 0 };
        self
    }

    /// Restricts a variable to the values in `mask`.
    pub fn restrict(&mut self, var: usize, mask: u64) -> &mut Self {
        self.domains[var] &= mask;
        self
    }

    pub fn first(&self) -> Option<Assignment> {
        let mut found = None;
        self.search(&mut |sol| {
            found = Some(sol.to_vec());
            ControlFlow::Break(())
        });
        found
    }

    pub fn exists(&self) -> bool {
        self.first().is_some()
    }

    /// Visits every solution (in search order) until the callback breaks.
    /// Returns `true` if the search ran to completion.
    pub fn for_each(&self, mut visit: impl FnMut(&[usize]) -> ControlFlow<()>) -> bool {
        self.search(&mut visit)
    }

    /// All solutions sorted lexicographically, or `None` if more than `limit` exist.
    pub fn all_up_to(&self, limit: usize) -> Option<HomSet> {
        let mut out = Vec::new();
        let complete = self.search(&mut |sol| {
            if out.len() == limit {
                return ControlFlow::Break(());
            }
            out.push(sol.to_vec());
            ControlFlow::Continue(())
        });
        if !complete {
            return None;
        }
        out.sort();
        Some(out)
    }

    pub fn all(&self) -> HomSet {
        self.all_up_to(usize::MAX).expect("unbounded enumeration completes")
    }

    fn search(&self, visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>) -> bool {
        let mut domains = self.domains.clone();
        if domains.contains(&0) {
            return true;
        }
        let mut trail = Vec::new();
        let all: Vec<usize> = (0..self.constraints.len()).collect();
        if !self.propagate(&mut domains, &mut trail, all) {
            return true;
        }
        let mut assignment = vec![0; domains.len()];
        self.descend(&mut domains, &mut trail, &mut assignment, visit).is_continue()
    }

    /// Depth-first over branching decisions with an explicit stack; each frame remembers the
    /// values still to try and the trail length to restore.
    fn descend(
        &self,
        domains: &mut [u64],
        trail: &mut Vec<(usize, u64)>,
        assignment: &mut [usize],
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        struct Frame {
            var: usize,
            remaining: u64,
            mark: usize,
        }
        let mut stack: Vec<Frame> = Vec::new();
        loop {
            let choice = domains
                .iter()
                .enumerate()
                .filter(|(_, d)| d.count_ones() > 1)
                .min_by_key(|(i, d)| (d.count_ones(), *i))
                .map(|(i, _)| i);
            match choice {
                Some(var) => stack.push(Frame { var, remaining: domains[var], mark: trail.len() }),
                None => {
                    for (slot, d) in assignment.iter_mut().zip(domains.iter()) {
                        *slot = d.trailing_zeros() as usize;
                    }
                    visit(assignment)?;
                }
            }
            // advance the innermost frame with a value left that survives propagation
            loop {
                let Some(frame) = stack.last_mut() else {
                    return ControlFlow::Continue(());
                };
                while trail.len() > frame.mark {
                    let (v, old) = trail.pop().expect("trail above mark");
                    domains[v] = old;
                }
                if frame.remaining == 0 {
                    stack.pop();
                    continue;
                }
                let (var, value) = (frame.var, frame.remaining.trailing_zeros() as usize);
                frame.remaining &= frame.remaining - 1;
                trail.push((var, domains[var]));
                domains[var] = 1u64 << value;
                if self.propagate(domains, trail, self.watches[var].clone()) {
                    break;
                }
            }
        }
    }

    fn propagate(&self, domains: &mut [u64], trail: &mut Vec<(usize, u64)>, seed: Vec<usize>) -> bool {
        let mut queued = vec![false; self.constraints.len()];
        let mut queue: VecDeque<usize> = VecDeque::with_capacity(seed.len());
        for c in seed {
            if !queued[c] {
                queued[c] = true;
                queue.push_back(c);
            }
        }
        let mut support = Vec::new();
        while let Some(c) = queue.pop_front() {
            queued[c] = false;
            let cons = &self.constraints[c];
            let scope = &cons.scope;
            support.clear();
            support.resize(scope.len(), 0u64);
            'tuples: for t in &self.template_tuples[cons.relation] {
                for (j, (&var, &val)) in scope.iter().zip(t.iter()).enumerate() {
                    if domains[var] >> val & 1 == 0 {
                        continue 'tuples;
                    }
                    // repeated variables in a scope must receive equal values
                    if scope[..j].iter().zip(t.iter()).any(|(&v2, &x2)| v2 == var && x2 != val) {
                        continue 'tuples;
                    }
                }
                for (s, &val) in support.iter_mut().zip(t.iter()) {
                    *s |= 1u64 << val;
                }
            }
            for (j, &var) in scope.iter().enumerate() {
                let narrowed = domains[var] & support[j];
                if narrowed != domains[var] {
                    if narrowed == 0 {
                        return false;
                    }
                    trail.push((var, domains[var]));
                    domains[var] = narrowed;
                    for &other in &self.watches[var] {
                        if other != c && !queued[other] {
                            queued[other] = true;
                            queue.push_back(other);
                        }
                    }
                }
            }
        }
        true
    }

    pub fn template(&self) -> &FiniteStructure {
        self.template
    }
}

/// Every homomorphism `instance -> template`, sorted lexicographically.
pub fn enumerate_homs(instance: &FiniteStructure, template: &FiniteStructure) -> Result<HomSet> {
    Ok(Solver::new(instance, template)?.all())
}

/// Some homomorphism `instance -> template`, if one exists.
pub fn csp_solve(instance: &FiniteStructure, template: &FiniteStructure) -> Result<Option<Assignment>> {
    Ok(Solver::new(instance, template)?.first())
}

/// Whether every endomorphism is a bijection.
pub fn is_core(structure: &FiniteStructure) -> Result<bool> {
    let solver = Solver::new(structure, structure)?;
    let mut core = true;
    solver.for_each(|map| {
        let mut seen = vec![false; map.len()];
        for &x in map {
            if std::mem::replace(&mut seen[x], true) {
                core = false;
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    Ok(core)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{builtin, complete_graph, FiniteStructure, Signature};

    #[test]
    fn deep_search_runs_on_a_small_stack() {
        // a perfect matching branches once per edge
        let edges: Vec<(usize, usize)> = (0..4000).map(|i| (2 * i, 2 * i + 1)).collect();
        let matching = FiniteStructure::graph(8000, &edges).unwrap();
        let found = std::thread::Builder::new()
            .stack_size(64 * 1024)
            .spawn(move || csp_solve(&matching, &builtin("K3").unwrap()).unwrap().is_some())
            .unwrap()
            .join()
            .unwrap();
        assert!(found);
    }

    /// Reference enumeration over all `|A|^|B|` maps.
    fn brute_homs(b: &FiniteStructure, a: &FiniteStructure) -> HomSet {
        let n = b.domain_size();
        let m = a.domain_size();
        let total = (m as u64).pow(n as u32);
        let mut out = Vec::new();
        for code in 0..total {
            let mut map = vec![0; n];
            let mut c = code;
            for slot in map.iter_mut().rev() {
                *slot = (c % m as u64) as usize;
                c /= m as u64;
            }
            if b.is_homomorphism(a, &map) {
                out.push(map);
            }
        }
        out
    }

    #[test]
    fn k3_automorphisms() {
        let k3 = builtin("K3").unwrap();
        let homs = enumerate_homs(&k3, &k3).unwrap();
        assert_eq!(homs, brute_homs(&k3, &k3));
        assert_eq!(homs.len(), 6);
    }

    #[test]
    fn looped_vertex_has_no_colouring() {
        let looped = FiniteStructure::graph(1, &[(0, 0)]).unwrap();
        assert!(enumerate_homs(&looped, &builtin("K3").unwrap()).unwrap().is_empty());
    }

    #[test]
    fn empty_instance_has_one_hom() {
        let empty = FiniteStructure::new(Signature::graph(), 0);
        assert_eq!(enumerate_homs(&empty, &builtin("K3").unwrap()).unwrap(), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn solve_examples() {
        let k3 = builtin("K3").unwrap();
        assert!(csp_solve(&k3, &k3).unwrap().is_some());
        let k4 = complete_graph(4);
        assert!(brute_homs(&k4, &k3).is_empty());
        assert!(csp_solve(&k4, &k3).unwrap().is_none());
        let path = FiniteStructure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        let sol = csp_solve(&path, &k3).unwrap().unwrap();
        assert!(path.is_homomorphism(&k3, &sol));
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let k3 = builtin("K3").unwrap();
        let two = builtin("TWO").unwrap();
        assert!(matches!(csp_solve(&k3, &two), Err(Error::SignatureMismatch(_))));
    }

    #[test]
    fn cores() {
        let k3 = builtin("K3").unwrap();
        let with_isolated = FiniteStructure::graph(4, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(is_core(&k3).unwrap());
        assert!(!is_core(&with_isolated).unwrap());
        assert!(is_core(&builtin("TWO").unwrap()).unwrap());
        let two = builtin("TWO").unwrap();
        assert_eq!(brute_homs(&two, &two), vec![vec![0, 1]]);
    }

    #[test]
    fn repeated_variables_in_scope() {
        let two = builtin("TWO").unwrap();
        let inst = FiniteStructure::from_relations(
            Signature::one_in_three(),
            2,
            [("R", vec![vec![0, 0, 1]])],
        )
        .unwrap();
        assert_eq!(enumerate_homs(&inst, &two).unwrap(), brute_homs(&inst, &two));
        assert_eq!(enumerate_homs(&inst, &two).unwrap(), vec![vec![0, 1]]);
    }

    #[test]
    fn pinned_search() {
        let k3 = builtin("K3").unwrap();
        let path = FiniteStructure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        let mut solver = Solver::new(&path, &k3).unwrap();
        solver.fix(0, 2).fix(2, 2);
        assert_eq!(solver.all(), vec![vec![2, 0, 2], vec![2, 1, 2]]);
    }
}
