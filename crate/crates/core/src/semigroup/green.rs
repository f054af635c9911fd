//! Green's preorders and equivalences.

use std::collections::BTreeMap;

use super::FiniteSemigroup;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreenData {
    /// `leq_l[x][y]` iff `x` lies in `S^1 y`.
    pub leq_l: Vec<Vec<bool>>,
    pub leq_r: Vec<Vec<bool>>,
    pub leq_j: Vec<Vec<bool>>,
    /// Class identifiers are the least element index of each class.
    pub l_class: Vec<usize>,
    pub r_class: Vec<usize>,
    pub h_class: Vec<usize>,
    pub j_class: Vec<usize>,
}

impl GreenData {
    pub fn leq_h(&self, x: usize, y: usize) -> bool {
        self.leq_l[x][y] && self.leq_r[x][y]
    }

    fn group(ids: &[usize]) -> Vec<Vec<usize>> {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (x, &id) in ids.iter().enumerate() {
            map.entry(id).or_default().push(x);
        }
        map.into_values().collect()
    }

    pub fn l_classes(&self) -> Vec<Vec<usize>> {
        Self::group(&self.l_class)
    }

    pub fn r_classes(&self) -> Vec<Vec<usize>> {
        Self::group(&self.r_class)
    }

    pub fn h_classes(&self) -> Vec<Vec<usize>> {
        Self::group(&self.h_class)
    }

    pub fn j_classes(&self) -> Vec<Vec<usize>> {
        Self::group(&self.j_class)
    }

    pub fn is_h_trivial(&self) -> bool {
        self.h_class.iter().enumerate().all(|(x, &c)| c == x)
    }
}

fn classes(leq: &[Vec<bool>]) -> Vec<usize> {
    (0..leq.len()).map(|x| (0..leq.len()).find(|&y| leq[x][y] && leq[y][x]).expect("reflexive")).collect()
}

/// Guarded by element count; in a finite semigroup `x <=_H y` and `y <=_J x` force `x H y`,
/// which is checked as a sanity condition on the table.
pub fn green(s: &FiniteSemigroup, element_limit: usize) -> Result<GreenData> {
    let n = s.len();
    if n > element_limit {
        return Err(Error::guard("Green's relations", element_limit));
    }
    let mut leq_l = vec![vec![false; n]; n];
    let mut leq_r = vec![vec![false; n]; n];
    for y in 0..n {
        leq_l[y][y] = true;
        leq_r[y][y] = true;
        for z in 0..n {
            leq_l[s.mul(z, y)][y] = true;
            leq_r[s.mul(y, z)][y] = true;
        }
    }
    // S^1 y S^1 is the union of the right ideals of members of S^1 y
    let mut leq_j = vec![vec![false; n]; n];
    for y in 0..n {
        for l in (0..n).filter(|&l| leq_l[l][y]) {
            for x in (0..n).filter(|&x| leq_r[x][l]) {
                leq_j[x][y] = true;
            }
        }
    }
    let l_class = classes(&leq_l);
    let r_class = classes(&leq_r);
    let j_class = classes(&leq_j);
    let h_class = (0..n)
        .map(|x| (0..n).find(|&y| l_class[y] == l_class[x] && r_class[y] == r_class[x]).expect("reflexive"))
        .collect();
    let data = GreenData { leq_l, leq_r, leq_j, l_class, r_class, h_class, j_class };
    for x in 0..n {
        for y in 0..n {
            if data.leq_h(x, y) && data.leq_j[y][x] && data.h_class[x] != data.h_class[y] {
                return Err(Error::InvalidTable(format!("stability fails at ({x}, {y})")));
            }
        }
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::builtin_semigroup;

    fn named(s: &FiniteSemigroup, classes: Vec<Vec<usize>>) -> Vec<Vec<String>> {
        classes.into_iter().map(|c| c.into_iter().map(|x| s.name(x).to_string()).collect()).collect()
    }

    #[test]
    fn brandt_monoid_structure() {
        let s = builtin_semigroup("B21").unwrap();
        let g = green(&s, 1000).unwrap();
        assert!(g.is_h_trivial());
        assert_eq!(named(&s, g.j_classes()), vec![vec!["1"], vec!["a", "b", "ab", "ba"], vec!["0"]]);
    }

    #[test]
    fn a2_idempotent_b() {
        let s = builtin_semigroup("A2").unwrap();
        let g = green(&s, 1000).unwrap();
        let b = s.index_of("b").unwrap();
        assert!(s.is_idempotent(b));
        assert_eq!(g.h_classes().into_iter().find(|c| c.contains(&b)), Some(vec![b]));
    }

    #[test]
    fn zero_semigroups() {
        // x y = x: every element is a left zero, so S^1 y = S and x S^1 = {x}
        let left = FiniteSemigroup::from_fn(vec!["p".into(), "q".into()], |x, _| x, None, None).unwrap();
        let g = green(&left, 10).unwrap();
        assert_eq!((g.l_classes().len(), g.r_classes().len()), (1, 2));
        let right = FiniteSemigroup::from_fn(vec!["p".into(), "q".into()], |_, y| y, None, None).unwrap();
        let g = green(&right, 10).unwrap();
        assert_eq!((g.l_classes().len(), g.r_classes().len()), (2, 1));
    }
}
