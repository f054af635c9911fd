//! The semigroup attached to a monotone 1-in-3 instance, built from its normal forms.

use itertools::Itertools;

use super::FiniteSemigroup;
use crate::error::{Error, Result};
use crate::reduction::{linked_classes, LinkedClasses, OneInThreeInstance};

/// A factor between occurrences of `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    One,
    A,
    /// Generator `a_v`.
    Var(usize),
    /// `a_u a_v` for a co-clausal pair in the given linkage class.
    Class(usize),
}

/// Normal form `left [b right]`; `a b a` never occurs since it equals `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SiElement {
    Zero,
    Word { left: Block, right: Option<Block> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiPresentation {
    pub variable_count: usize,
    pub linked: LinkedClasses,
    /// Apex variable of each linkage class.
    pub class_apex: Vec<usize>,
    pub elements: Vec<SiElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiSemigroup {
    pub semigroup: FiniteSemigroup,
    pub presentation: SiPresentation,
}

impl SiPresentation {
    pub fn class_count(&self) -> usize {
        self.class_apex.len()
    }

    /// Closed-form element count `(m + 2)(m + 3)` with `m` variables plus classes.
    pub fn expected_size(&self) -> usize {
        let (n, l) = (self.variable_count, self.class_count());
        6 + 5 * n + n * n + 5 * l + 2 * l * n + l * l
    }

    pub fn index_of(&self, e: SiElement) -> Option<usize> {
        self.elements.binary_search(&e).ok()
    }

    fn block_mul(&self, x: Block, y: Block) -> Option<Block> {
        use Block::*;
        match (x, y) {
            (One, z) | (z, One) => Some(z),
            (A, _) | (_, A) => None,
            (Var(u), Var(v)) => self.linked.class_of_pair(u, v).filter(|_| u != v).map(Class),
            (Var(u), Class(c)) | (Class(c), Var(u)) => (self.class_apex[c] == u).then_some(A),
            (Class(_), Class(_)) => None,
        }
    }

    fn normalize(left: Block, right: Option<Block>) -> SiElement {
        match (left, right) {
            (Block::A, Some(Block::A)) => SiElement::Word { left: Block::A, right: None },
            _ => SiElement::Word { left, right },
        }
    }

    pub fn mul(&self, x: SiElement, y: SiElement) -> SiElement {
        let (SiElement::Word { left: l1, right: r1 }, SiElement::Word { left: l2, right: r2 }) = (x, y) else {
            return SiElement::Zero;
        };
        match (r1, r2) {
            (None, _) => match self.block_mul(l1, l2) {
                Some(l) => Self::normalize(l, r2),
                None => SiElement::Zero,
            },
            (Some(r1), None) => match self.block_mul(r1, l2) {
                Some(r) => Self::normalize(l1, Some(r)),
                None => SiElement::Zero,
            },
            // b m b survives only when the middle m is a
            (Some(r1), Some(r2)) => match self.block_mul(r1, l2) {
                Some(Block::A) => Self::normalize(l1, Some(r2)),
                _ => SiElement::Zero,
            },
        }
    }

    fn block_name(&self, block: Block) -> Option<String> {
        match block {
            Block::One => None,
            Block::A => Some("a".into()),
            Block::Var(v) => Some(format!("a_{}", v + 1)),
            Block::Class(c) => {
                let (u, v) = self.linked.classes[c][0];
                Some(format!("a_[{} {}]", u + 1, v + 1))
            }
        }
    }

    pub fn name(&self, e: SiElement) -> String {
        match e {
            SiElement::Zero => "0".into(),
            SiElement::Word { left: Block::One, right: None } => "1".into(),
            SiElement::Word { left, right } => {
                let mut parts: Vec<String> = self.block_name(left).into_iter().collect();
                if let Some(r) = right {
                    parts.push("b".into());
                    parts.extend(self.block_name(r));
                }
                parts.join(" ")
            }
        }
    }
}

/// Requires no clause sharing two variables, clique linkage classes and every variable in a clause.
pub fn build_s_i(inst: &OneInThreeInstance, element_limit: usize) -> Result<SiSemigroup> {
    let n = inst.variable_count();
    if let Some(c) = inst.clauses().iter().position(|c| !c.iter().all_unique()) {
        return Err(Error::InvalidInstance(format!("clause {} repeats a variable", c + 1)));
    }
    let occurring = inst.occurring_variables();
    if let Some(v) = (0..n).find(|v| !occurring.contains(v)) {
        return Err(Error::InvalidInstance(format!("variable {} occurs in no clause", v + 1)));
    }
    let linked = linked_classes(inst)?;
    if let Some((p, zs)) = linked.apexes.iter().find(|(_, zs)| zs.len() > 1) {
        return Err(Error::InvalidInstance(format!(
            "pair {{{}, {}}} lies in {} clauses",
            p.0 + 1,
            p.1 + 1,
            zs.len()
        )));
    }
    if let Some((p, q)) = linked.non_clique {
        return Err(Error::Linkage(format!("pairs {:?} and {:?} share a class without being linked", p, q)));
    }
    let class_apex: Vec<usize> = linked
        .classes
        .iter()
        .map(|class| *linked.apexes[&class[0]].iter().next().expect("pairs come from clauses"))
        .collect();
    let m = n + class_apex.len();
    let size = (m + 2) * (m + 3);
    if size > element_limit {
        return Err(Error::guard("S_I elements", element_limit));
    }
    let blocks: Vec<Block> = [Block::One, Block::A]
        .into_iter()
        .chain((0..n).map(Block::Var))
        .chain((0..class_apex.len()).map(Block::Class))
        .collect();
    let mut elements = vec![SiElement::Zero];
    for &left in &blocks {
        elements.push(SiElement::Word { left, right: None });
        for &right in &blocks {
            if (left, right) != (Block::A, Block::A) {
                elements.push(SiElement::Word { left, right: Some(right) });
            }
        }
    }
    elements.sort();
    let presentation = SiPresentation { variable_count: n, linked, class_apex, elements };
    let names = presentation.elements.iter().map(|&e| presentation.name(e)).collect();
    let idx = |e: SiElement| presentation.index_of(e).expect("normal forms are closed under products");
    let identity = idx(SiElement::Word { left: Block::One, right: None });
    let zero = idx(SiElement::Zero);
    let semigroup = FiniteSemigroup::from_fn(
        names,
        |x, y| idx(presentation.mul(presentation.elements[x], presentation.elements[y])),
        Some(identity),
        Some(zero),
    )?;
    if semigroup.len() != presentation.expected_size() {
        return Err(Error::InvalidTable(format!(
            "{} normal forms but the closed form gives {}",
            semigroup.len(),
            presentation.expected_size()
        )));
    }
    Ok(SiSemigroup { semigroup, presentation })
}

impl SiSemigroup {
    pub fn element(&self, e: SiElement) -> usize {
        self.presentation.index_of(e).expect("normal form")
    }

    pub fn generator_a(&self) -> usize {
        self.element(SiElement::Word { left: Block::A, right: None })
    }

    pub fn generator_b(&self) -> usize {
        self.element(SiElement::Word { left: Block::One, right: Some(Block::One) })
    }

    pub fn generator_var(&self, v: usize) -> usize {
        self.element(SiElement::Word { left: Block::Var(v), right: None })
    }

    /// `1, b` and every `a_v`; these generate the whole semigroup apart from `0` and `a` being products.
    pub fn generators(&self) -> Vec<usize> {
        let one = self.semigroup.identity().expect("monoid");
        let mut gens = vec![one, self.generator_b()];
        gens.extend((0..self.presentation.variable_count).map(|v| self.generator_var(v)));
        gens
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i0() -> OneInThreeInstance {
        OneInThreeInstance::new(3, vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn single_clause_has_72_elements() {
        let si = build_s_i(&i0(), 10_000).unwrap();
        assert_eq!(si.semigroup.len(), 72);
        assert_eq!(si.presentation.expected_size(), 72);
        // independent count by closing the generators
        assert_eq!(si.semigroup.closure(&si.generators()).len(), 72);
    }

    #[test]
    fn presentation_rules() {
        let si = build_s_i(&i0(), 10_000).unwrap();
        let s = &si.semigroup;
        let (x, y, z) = (si.generator_var(0), si.generator_var(1), si.generator_var(2));
        let (a, b) = (si.generator_a(), si.generator_b());
        let zero = s.zero().unwrap();
        assert_eq!(s.product([x, y, z]), Some(a));
        assert_eq!(s.product([z, x, y]), Some(a));
        assert_eq!(s.mul(x, x), zero);
        assert_eq!(s.mul(x, y), s.mul(y, x));
        assert_eq!(s.product([a, b, a]), Some(a));
        assert_eq!(s.product([b, a, b]), Some(b));
        assert_eq!(s.mul(a, a), zero);
        assert_eq!(s.mul(b, b), zero);
        for quad in std::iter::repeat_n([x, y, z], 4).multi_cartesian_product() {
            assert_eq!(s.product(quad), Some(zero));
        }
    }

    #[test]
    fn linked_pairs_are_identified() {
        // {0,1,2} and {3,4,2}: pairs {0,1} and {3,4} are linked via 2
        let inst = OneInThreeInstance::new(5, vec![[0, 1, 2], [2, 3, 4]]).unwrap();
        let si = build_s_i(&inst, 10_000).unwrap();
        let s = &si.semigroup;
        let v = |i| si.generator_var(i);
        assert_eq!(s.mul(v(0), v(1)), s.mul(v(3), v(4)));
        assert_ne!(s.mul(v(0), v(2)), s.mul(v(3), v(2)));
        assert_eq!(s.mul(v(0), v(3)), s.zero().unwrap());
        assert_eq!(s.len(), si.presentation.expected_size());
    }

    #[test]
    fn contains_brandt_monoid() {
        let si = build_s_i(&i0(), 10_000).unwrap();
        let s = &si.semigroup;
        let (a, b) = (si.generator_a(), si.generator_b());
        let sub = s.closure(&[s.identity().unwrap(), a, b]);
        assert_eq!(sub.len(), 6);
    }

    #[test]
    fn preconditions() {
        let overlap = OneInThreeInstance::new(4, vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        assert!(build_s_i(&overlap, 10_000).is_err());
        let isolated = OneInThreeInstance::new(4, vec![[0, 1, 2]]).unwrap();
        assert!(build_s_i(&isolated, 10_000).is_err());
        assert!(matches!(build_s_i(&i0(), 10), Err(Error::Guard { .. })));
    }
}
