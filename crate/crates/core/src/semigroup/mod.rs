//! Finite semigroups and groupoids given by multiplication tables.

mod graph_algebra;
mod green;
mod identity;
mod iso;
mod si;
mod tmodu;

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;
use std::ops::Deref;

use crate::error::{Error, Result};

pub use graph_algebra::{eulerian_law, graph_algebra, EulerianLaw};
pub use green::{green, GreenData};
pub use identity::{check_identity, omega_power, parse_identity, satisfies_lds, LdsCounterexample, Term};
pub use iso::{isomorphic, minimal_generators};
pub use si::{build_s_i, Block, SiElement, SiPresentation, SiSemigroup};
pub use tmodu::{build_t_mod_u, coordinate_extraction, TModU};

/// Default cap on table sizes built by closure.
pub const DEFAULT_ELEMENT_LIMIT: usize = 20_000;

/// A set with one binary operation, stored as a full table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupoid {
    names: Vec<String>,
    table: Vec<usize>,
    identity: Option<usize>,
    zero: Option<usize>,
}

impl FiniteGroupoid {
    pub fn new(names: Vec<String>, table: Vec<Vec<usize>>, identity: Option<usize>, zero: Option<usize>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidTable("no elements".into()));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidTable(format!("table must be {n} x {n}")));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(Error::InvalidTable("table entry out of range".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = names.iter().find(|name| !seen.insert(name.as_str())) {
            return Err(Error::InvalidTable(format!("duplicate element name `{dup}`")));
        }
        let g = FiniteGroupoid { names, table: table.into_iter().flatten().collect(), identity, zero };
        if let Some(e) = identity {
            if e >= n || (0..n).any(|x| g.mul(e, x) != x || g.mul(x, e) != x) {
                return Err(Error::InvalidTable("claimed identity does not act as one".into()));
            }
        }
        if let Some(z) = zero {
            if z >= n || (0..n).any(|x| g.mul(z, x) != z || g.mul(x, z) != z) {
                return Err(Error::InvalidTable("claimed zero does not absorb".into()));
            }
        }
        Ok(g)
    }

    /// Builds the table from a product function on indices.
    pub fn from_fn(names: Vec<String>, mul: impl Fn(usize, usize) -> usize, identity: Option<usize>, zero: Option<usize>) -> Result<Self> {
        let n = names.len();
        let table = (0..n).map(|x| (0..n).map(|y| mul(x, y)).collect()).collect();
        FiniteGroupoid::new(names, table, identity, zero)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn identity(&self) -> Option<usize> {
        self.identity
    }

    pub fn zero(&self) -> Option<usize> {
        self.zero
    }

    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x * self.names.len() + y]
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.names.len()).map(<[usize]>::to_vec).collect()
    }

    /// Left-to-right product of a nonempty sequence.
    pub fn product(&self, xs: impl IntoIterator<Item = usize>) -> Option<usize> {
        xs.into_iter().reduce(|acc, x| self.mul(acc, x))
    }

    /// First triple violating associativity, if any.
    pub fn associativity_failure(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for x in 0..n {
            for y in 0..n {
                let xy = self.mul(x, y);
                for z in 0..n {
                    if self.mul(xy, z) != self.mul(x, self.mul(y, z)) {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }
}

/// A finite groupoid whose table has been checked to be associative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSemigroup(FiniteGroupoid);

impl Deref for FiniteSemigroup {
    type Target = FiniteGroupoid;

    fn deref(&self) -> &FiniteGroupoid {
        &self.0
    }
}

impl FiniteSemigroup {
    pub fn new(names: Vec<String>, table: Vec<Vec<usize>>, identity: Option<usize>, zero: Option<usize>) -> Result<Self> {
        FiniteSemigroup::from_groupoid(FiniteGroupoid::new(names, table, identity, zero)?)
    }

    pub fn from_fn(names: Vec<String>, mul: impl Fn(usize, usize) -> usize, identity: Option<usize>, zero: Option<usize>) -> Result<Self> {
        FiniteSemigroup::from_groupoid(FiniteGroupoid::from_fn(names, mul, identity, zero)?)
    }

    pub fn from_groupoid(g: FiniteGroupoid) -> Result<Self> {
        match g.associativity_failure() {
            Some((x, y, z)) => Err(Error::NotAssociative(x, y, z)),
            None => Ok(FiniteSemigroup(g)),
        }
    }

    pub fn as_groupoid(&self) -> &FiniteGroupoid {
        &self.0
    }

    pub fn into_groupoid(self) -> FiniteGroupoid {
        self.0
    }

    pub fn is_idempotent(&self, x: usize) -> bool {
        self.mul(x, x) == x
    }

    /// The monoid `S` with a fresh identity named `name` appended as the last element.
    pub fn adjoin_identity(&self, name: &str) -> Result<FiniteSemigroup> {
        let n = self.len();
        let mut names = self.names().to_vec();
        names.push(name.to_string());
        FiniteSemigroup::from_fn(
            names,
            |x, y| if x == n { y } else if y == n { x } else { self.mul(x, y) },
            Some(n),
            self.zero(),
        )
    }

    /// Sorted elements of the subsemigroup generated by `gens`.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &g in gens {
            if !seen[g] {
                seen[g] = true;
                queue.push_back(g);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.len()).filter(|&x| seen[x]).collect()
    }
}

/// Closes `gens` under right multiplication by generators, naming each new element by the
/// generator word that first reached it. Elements are numbered in breadth-first order.
pub(crate) fn close_under<T: Clone + Eq + Hash>(
    gens: &[(String, T)],
    mul: impl Fn(&T, &T) -> T,
    limit: usize,
) -> Result<(Vec<T>, Vec<String>)> {
    let mut index: HashMap<T, usize> = HashMap::new();
    let mut elements: Vec<T> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for (name, g) in gens {
        if !index.contains_key(g) {
            index.insert(g.clone(), elements.len());
            elements.push(g.clone());
            names.push(name.clone());
        }
    }
    let mut head = 0;
    while head < elements.len() {
        for (gname, g) in gens {
            let y = mul(&elements[head], g);
            if !index.contains_key(&y) {
                if elements.len() >= limit {
                    return Err(Error::guard("semigroup closure", limit));
                }
                index.insert(y.clone(), elements.len());
                names.push(format!("{} {}", names[head], gname));
                elements.push(y);
            }
        }
        head += 1;
    }
    Ok((elements, names))
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Brandt {
    One,
    Zero,
    /// Matrix unit `e_ij` over indices `{0, 1}`.
    Unit(u8, u8),
}

fn brandt_mul(x: Brandt, y: Brandt, sandwich: [[bool; 2]; 2]) -> Brandt {
    match (x, y) {
        (Brandt::One, z) | (z, Brandt::One) => z,
        (Brandt::Zero, _) | (_, Brandt::Zero) => Brandt::Zero,
        (Brandt::Unit(i, j), Brandt::Unit(k, l)) => {
            if sandwich[j as usize][k as usize] {
                Brandt::Unit(i, l)
            } else {
                Brandt::Zero
            }
        }
    }
}

fn semigroup_from_elements(named: &[(&str, Brandt)], sandwich: [[bool; 2]; 2]) -> Result<FiniteSemigroup> {
    let names = named.iter().map(|(n, _)| n.to_string()).collect();
    let pos = |b: Brandt| named.iter().position(|(_, e)| *e == b).expect("closed element list");
    let identity = named.iter().position(|(_, e)| *e == Brandt::One);
    let zero = named.iter().position(|(_, e)| *e == Brandt::Zero);
    FiniteSemigroup::from_fn(names, |x, y| pos(brandt_mul(named[x].1, named[y].1, sandwich)), identity, zero)
}

/// `B21` (the six-element Brandt monoid), `A2`, or `A21` (`A2` with an identity).
pub fn builtin_semigroup(name: &str) -> Result<FiniteSemigroup> {
    // B21: a = e01, b = e10 with identity sandwich; A2: a = e00, b = e11 with a a = 0
    const B21: [[bool; 2]; 2] = [[true, false], [false, true]];
    const A2: [[bool; 2]; 2] = [[false, true], [true, true]];
    match name.to_ascii_uppercase().as_str() {
        "B21" => semigroup_from_elements(
            &[
                ("1", Brandt::One),
                ("a", Brandt::Unit(0, 1)),
                ("b", Brandt::Unit(1, 0)),
                ("ab", Brandt::Unit(0, 0)),
                ("ba", Brandt::Unit(1, 1)),
                ("0", Brandt::Zero),
            ],
            B21,
        ),
        "A2" => semigroup_from_elements(
            &[
                ("a", Brandt::Unit(0, 0)),
                ("b", Brandt::Unit(1, 1)),
                ("ab", Brandt::Unit(0, 1)),
                ("ba", Brandt::Unit(1, 0)),
                ("0", Brandt::Zero),
            ],
            A2,
        ),
        "A21" => builtin_semigroup("A2")?.adjoin_identity("1"),
        _ => Err(Error::UnknownBuiltin(name.to_string())),
    }
}
