//! Terms, identity checking and idempotent powers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;

use super::{FiniteGroupoid, FiniteSemigroup};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    /// A named element of the algebra being evaluated in.
    Const(usize),
    Product(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn product(left: Term, right: Term) -> Term {
        Term::Product(Box::new(left), Box::new(right))
    }

    /// `((t1 t2) t3) ... tn`; `None` for an empty sequence.
    pub fn left_combed(terms: impl IntoIterator<Item = Term>) -> Option<Term> {
        terms.into_iter().reduce(Term::product)
    }

    /// Parses juxtaposed single-character factors with optional parentheses, associating left.
    ///
    /// Characters naming an element of `algebra` are constants; other letters are variables.
    pub fn parse(text: &str, algebra: &FiniteGroupoid) -> Result<Term> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let term = parse_product(&chars, &mut pos, algebra)?;
        if pos != chars.len() {
            return Err(Error::parse(1, format!("unexpected `{}` in `{text}`", chars[pos])));
        }
        Ok(term)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::Product(l, r) => {
                l.collect_variables(out);
                r.collect_variables(out);
            }
        }
    }

    pub fn eval(&self, algebra: &FiniteGroupoid, assignment: &BTreeMap<String, usize>) -> usize {
        match self {
            Term::Var(v) => assignment[v],
            Term::Const(c) => *c,
            Term::Product(l, r) => algebra.mul(l.eval(algebra, assignment), r.eval(algebra, assignment)),
        }
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: Option<&FiniteGroupoid>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => match names {
                Some(g) => write!(f, "{}", g.name(*c)),
                None => write!(f, "#{c}"),
            },
            Term::Product(l, r) => {
                l.fmt_with(f, names)?;
                write!(f, " ")?;
                if matches!(**r, Term::Product(..)) {
                    write!(f, "(")?;
                    r.fmt_with(f, names)?;
                    write!(f, ")")
                } else {
                    r.fmt_with(f, names)
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, None)
    }
}

fn parse_product(chars: &[char], pos: &mut usize, algebra: &FiniteGroupoid) -> Result<Term> {
    let mut acc: Option<Term> = None;
    while *pos < chars.len() && chars[*pos] != ')' {
        let c = chars[*pos];
        *pos += 1;
        let factor = if c == '(' {
            let inner = parse_product(chars, pos, algebra)?;
            if chars.get(*pos) != Some(&')') {
                return Err(Error::parse(1, "unbalanced parentheses"));
            }
            *pos += 1;
            inner
        } else if let Some(idx) = algebra.index_of(&c.to_string()) {
            Term::Const(idx)
        } else if c.is_ascii_alphabetic() {
            Term::Var(c.to_string())
        } else {
            return Err(Error::parse(1, format!("`{c}` is neither a variable nor an element name")));
        };
        acc = Some(match acc {
            None => factor,
            Some(prev) => Term::product(prev, factor),
        });
    }
    acc.ok_or_else(|| Error::parse(1, "empty term"))
}

/// Splits `u=v` and parses both sides.
pub fn parse_identity(text: &str, algebra: &FiniteGroupoid) -> Result<(Term, Term)> {
    let (u, v) = text.split_once('=').ok_or_else(|| Error::parse(1, "identity needs `=`"))?;
    Ok((Term::parse(u, algebra)?, Term::parse(v, algebra)?))
}

/// The first assignment (lexicographic over sorted variables) separating `u` and `v`, if any.
pub fn check_identity(
    algebra: &FiniteGroupoid,
    u: &Term,
    v: &Term,
    limit: usize,
) -> Result<Option<BTreeMap<String, usize>>> {
    let vars: Vec<String> = u.variables().union(&v.variables()).cloned().collect();
    let total = (algebra.len() as u128).checked_pow(vars.len() as u32).unwrap_or(u128::MAX);
    if total > limit as u128 {
        return Err(Error::guard("identity substitutions", limit));
    }
    for values in std::iter::repeat_n(0..algebra.len(), vars.len()).multi_cartesian_product() {
        let assignment: BTreeMap<String, usize> = vars.iter().cloned().zip(values).collect();
        if u.eval(algebra, &assignment) != v.eval(algebra, &assignment) {
            return Ok(Some(assignment));
        }
    }
    Ok(None)
}

/// The idempotent power of `x`, found on the cycle of its powers.
pub fn omega_power(s: &FiniteSemigroup, x: usize) -> usize {
    let mut powers = vec![x];
    let start = loop {
        let next = s.mul(*powers.last().expect("nonempty"), x);
        if let Some(i) = powers.iter().position(|&p| p == next) {
            break i;
        }
        powers.push(next);
    };
    powers[start..].iter().copied().find(|&p| s.mul(p, p) == p).expect("a finite cycle holds an idempotent")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdsCounterexample {
    pub x: usize,
    pub y1: usize,
    pub z: usize,
    pub y2: usize,
}

/// Checks `u = (u z u)^w` for `u = (e y1 e z e y2 e)^w` and `e = x^w` over all substitutions;
/// returns the first failing one.
pub fn satisfies_lds(s: &FiniteSemigroup, limit: usize) -> Result<Option<LdsCounterexample>> {
    let n = s.len();
    if (n as u128).pow(4) > limit as u128 {
        return Err(Error::guard("pseudo-identity substitutions", limit));
    }
    let omega: Vec<usize> = (0..n).map(|x| omega_power(s, x)).collect();
    for x in 0..n {
        let e = omega[x];
        for y1 in 0..n {
            let ey1e = s.product([e, y1, e]).expect("nonempty");
            for z in 0..n {
                let left = s.product([ey1e, z, e]).expect("nonempty");
                for y2 in 0..n {
                    let u = omega[s.product([left, y2, e]).expect("nonempty")];
                    if u != omega[s.product([u, z, u]).expect("nonempty")] {
                        return Ok(Some(LdsCounterexample { x, y1, z, y2 }));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::builtin_semigroup;

    #[test]
    fn identities_in_brandt_monoid() {
        let s = builtin_semigroup("B21").unwrap();
        let (u, v) = parse_identity("x(yz)=(xy)z", &s).unwrap();
        assert_eq!(check_identity(&s, &u, &v, 1000).unwrap(), None);
        let (u, v) = parse_identity("aba=a", &s).unwrap();
        assert!(u.variables().is_empty());
        assert_eq!(check_identity(&s, &u, &v, 1000).unwrap(), None);
        let (u, v) = parse_identity("xy=yx", &s).unwrap();
        assert!(check_identity(&s, &u, &v, 1000).unwrap().is_some());
        assert!(check_identity(&s, &u, &v, 10).is_err());
        assert!(parse_identity("x(y", &s).is_err());
    }

    #[test]
    fn cube_against_square_by_exhaustion() {
        let s = builtin_semigroup("B21").unwrap();
        let (u, v) = parse_identity("xxx=xx", &s).unwrap();
        let brute = (0..6).all(|x| s.product([x, x, x]) == s.product([x, x]));
        assert_eq!(check_identity(&s, &u, &v, 100).unwrap().is_none(), brute);
    }

    #[test]
    fn omega_examples() {
        let s = builtin_semigroup("B21").unwrap();
        let el = |n| s.index_of(n).unwrap();
        assert_eq!(omega_power(&s, el("a")), el("0"));
        assert_eq!(omega_power(&s, el("ab")), el("ab"));
        assert_eq!(omega_power(&s, el("1")), el("1"));
    }

    #[test]
    fn omega_matches_factorial_power() {
        for name in ["B21", "A2", "A21"] {
            let s = builtin_semigroup(name).unwrap();
            let fact: usize = (1..=s.len()).product();
            for x in 0..s.len() {
                let naive = s.product(std::iter::repeat_n(x, fact)).unwrap();
                assert_eq!(omega_power(&s, x), naive, "{name} {}", s.name(x));
            }
        }
    }

    #[test]
    fn lds_examples() {
        let b21 = builtin_semigroup("B21").unwrap();
        assert!(satisfies_lds(&b21, 10_000).unwrap().is_some());
        let semilattice = FiniteSemigroup::from_fn(vec!["0".into(), "1".into()], |x, y| x.min(y), Some(1), Some(0)).unwrap();
        assert_eq!(satisfies_lds(&semilattice, 100).unwrap(), None);
    }
}
