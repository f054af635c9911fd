//! The Rees quotient `T/U` of the subsemigroup of a power of `B21` indexed by 1-in-3 solutions.

use super::{builtin_semigroup, close_under, FiniteSemigroup};
use crate::error::{Error, Result};
use crate::reduction::{one_in_three_solutions, OneInThreeInstance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TModU {
    pub semigroup: FiniteSemigroup,
    /// Coordinates: the solutions of the instance, in lexicographic order.
    pub homs: Vec<Vec<bool>>,
    /// Tuple over `B21` element indices for each element; `None` is the collapsed ideal.
    pub tuples: Vec<Option<Vec<u8>>>,
    /// Element indices of the generators `a_v`.
    pub var_generators: Vec<usize>,
    pub b: usize,
    pub a: usize,
}

/// Guarded by the number of solutions and by the closure size.
pub fn build_t_mod_u(inst: &OneInThreeInstance, hom_limit: usize, element_limit: usize) -> Result<TModU> {
    let b21 = builtin_semigroup("B21")?;
    let el = |name: &str| b21.index_of(name).expect("B21 element") as u8;
    let (one, a, b, zero) = (el("1"), el("a"), el("b"), el("0"));
    let homs = one_in_three_solutions(inst, hom_limit)?;
    if homs.is_empty() {
        return Err(Error::Unsatisfiable);
    }
    let constant = |x: u8| Some(vec![x; homs.len()]);
    let mut gens: Vec<(String, Option<Vec<u8>>)> =
        vec![("1".into(), constant(one)), ("b".into(), constant(b)), ("a".into(), constant(a))];
    for v in 0..inst.variable_count() {
        let tuple = homs.iter().map(|phi| if phi[v] { a } else { one }).collect();
        gens.push((format!("a_{}", v + 1), Some(tuple)));
    }
    let mul = |x: &Option<Vec<u8>>, y: &Option<Vec<u8>>| -> Option<Vec<u8>> {
        let (x, y) = (x.as_ref()?, y.as_ref()?);
        let t: Vec<u8> = x.iter().zip(y).map(|(&p, &q)| b21.mul(p as usize, q as usize) as u8).collect();
        (!t.contains(&zero)).then_some(t)
    };
    let (tuples, mut names) = close_under(&gens, mul, element_limit)?;
    let position = |t: &Option<Vec<u8>>| tuples.iter().position(|u| u == t);
    let zero_idx = position(&None).ok_or_else(|| Error::InvalidTable("closure has no zero".into()))?;
    names[zero_idx] = "0".into();
    let find = |t: &Option<Vec<u8>>| position(t).expect("generator is an element");
    let var_generators = gens[3..].iter().map(|(_, t)| find(t)).collect();
    let index: std::collections::HashMap<&Option<Vec<u8>>, usize> = tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let semigroup = FiniteSemigroup::from_fn(
        names,
        |x, y| index[&mul(&tuples[x], &tuples[y])],
        Some(find(&constant(one))),
        Some(zero_idx),
    )?;
    Ok(TModU { b: find(&constant(b)), a: find(&constant(a)), semigroup, homs, tuples, var_generators })
}

/// Reads a 1-in-3 assignment off the first coordinate where every `a_v` lies in `{1, a}` and
/// decoding `a` as true satisfies the instance.
pub fn coordinate_extraction(t: &TModU, inst: &OneInThreeInstance) -> Option<Vec<bool>> {
    let b21 = builtin_semigroup("B21").expect("builtin");
    let (one, a) = (b21.index_of("1")? as u8, b21.index_of("a")? as u8);
    (0..t.homs.len()).find_map(|coord| {
        let values: Option<Vec<bool>> = t
            .var_generators
            .iter()
            .map(|&g| {
                let entry = t.tuples[g].as_ref()?[coord];
                (entry == one || entry == a).then_some(entry == a)
            })
            .collect();
        values.filter(|vals| inst.satisfied_by(vals))
    })
}
