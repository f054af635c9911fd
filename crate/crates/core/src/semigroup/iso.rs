//! Isomorphism search between finite semigroups by backtracking over generator images.

use std::collections::BTreeSet;

use super::FiniteSemigroup;

/// Greedy generating set: scan elements in index order, keeping those outside the closure so far.
pub fn minimal_generators(s: &FiniteSemigroup) -> Vec<usize> {
    let mut gens: Vec<usize> = Vec::new();
    let mut reached = vec![false; s.len()];
    for x in 0..s.len() {
        if !reached[x] {
            gens.push(x);
            for y in s.closure(&gens) {
                reached[y] = true;
            }
        }
    }
    gens
}

/// Isomorphism-invariant fingerprint of an element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Profile {
    idempotent: bool,
    index: usize,
    period: usize,
    left_ideal: usize,
    right_ideal: usize,
    two_sided: usize,
}

fn profiles(s: &FiniteSemigroup) -> Vec<Profile> {
    let n = s.len();
    (0..n)
        .map(|x| {
            let mut powers = vec![x];
            let (index, period) = loop {
                let next = s.mul(*powers.last().expect("nonempty"), x);
                if let Some(i) = powers.iter().position(|&p| p == next) {
                    break (i + 1, powers.len() - i);
                }
                powers.push(next);
            };
            let left: BTreeSet<usize> = (0..n).map(|y| s.mul(y, x)).collect();
            let right: BTreeSet<usize> = (0..n).map(|y| s.mul(x, y)).collect();
            let two: BTreeSet<usize> = left.iter().flat_map(|&l| (0..n).map(move |y| s.mul(l, y))).collect();
            Profile {
                idempotent: s.mul(x, x) == x,
                index,
                period,
                left_ideal: left.len(),
                right_ideal: right.len(),
                two_sided: two.len(),
            }
        })
        .collect()
}

/// A table-preserving bijection `S -> T`, if one exists.
///
/// The witness is the first found when generator images are tried in ascending index order.
pub fn isomorphic(s: &FiniteSemigroup, t: &FiniteSemigroup) -> Option<Vec<usize>> {
    if s.len() != t.len() {
        return None;
    }
    let (ps, pt) = (profiles(s), profiles(t));
    let mut sorted_s = ps.clone();
    let mut sorted_t = pt.clone();
    sorted_s.sort();
    sorted_t.sort();
    if sorted_s != sorted_t {
        return None;
    }
    let gens = minimal_generators(s);
    let candidates: Vec<Vec<usize>> =
        gens.iter().map(|&g| (0..t.len()).filter(|&y| pt[y] == ps[g]).collect()).collect();
    let mut images = vec![0; gens.len()];
    search(s, t, &gens, &candidates, &ps, &pt, &mut images, 0)
}

#[allow(clippy::too_many_arguments)]
fn search(
    s: &FiniteSemigroup,
    t: &FiniteSemigroup,
    gens: &[usize],
    candidates: &[Vec<usize>],
    ps: &[Profile],
    pt: &[Profile],
    images: &mut Vec<usize>,
    depth: usize,
) -> Option<Vec<usize>> {
    if depth == gens.len() {
        return extend(s, t, gens, images, ps, pt);
    }
    for &y in &candidates[depth] {
        if images[..depth].contains(&y) {
            continue;
        }
        images[depth] = y;
        // prune with the partial map generated so far
        if partial_consistent(s, t, &gens[..=depth], &images[..=depth]) {
            if let Some(map) = search(s, t, gens, candidates, ps, pt, images, depth + 1) {
                return Some(map);
            }
        }
    }
    None
}

/// Propagates generator images along products; `None` on a clash.
fn propagate(s: &FiniteSemigroup, t: &FiniteSemigroup, gens: &[usize], images: &[usize]) -> Option<Vec<Option<usize>>> {
    let mut map: Vec<Option<usize>> = vec![None; s.len()];
    let mut queue = Vec::new();
    for (&g, &y) in gens.iter().zip(images) {
        match map[g] {
            Some(prev) if prev != y => return None,
            Some(_) => {}
            None => {
                map[g] = Some(y);
                queue.push(g);
            }
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        let fx = map[x].expect("queued elements are mapped");
        for (&g, &fg) in gens.iter().zip(images) {
            let (p, fp) = (s.mul(x, g), t.mul(fx, fg));
            match map[p] {
                Some(prev) if prev != fp => return None,
                Some(_) => {}
                None => {
                    map[p] = Some(fp);
                    queue.push(p);
                }
            }
        }
    }
    Some(map)
}

fn partial_consistent(s: &FiniteSemigroup, t: &FiniteSemigroup, gens: &[usize], images: &[usize]) -> bool {
    let Some(map) = propagate(s, t, gens, images) else { return false };
    let mut used = vec![false; t.len()];
    for y in map.into_iter().flatten() {
        if std::mem::replace(&mut used[y], true) {
            return false;
        }
    }
    true
}

fn extend(
    s: &FiniteSemigroup,
    t: &FiniteSemigroup,
    gens: &[usize],
    images: &[usize],
    ps: &[Profile],
    pt: &[Profile],
) -> Option<Vec<usize>> {
    let map: Vec<usize> = propagate(s, t, gens, images)?.into_iter().collect::<Option<Vec<usize>>>()?;
    let distinct: BTreeSet<usize> = map.iter().copied().collect();
    if distinct.len() != s.len() || (0..s.len()).any(|x| ps[x] != pt[map[x]]) {
        return None;
    }
    let n = s.len();
    let homomorphic = (0..n).all(|x| (0..n).all(|y| map[s.mul(x, y)] == t.mul(map[x], map[y])));
    homomorphic.then_some(map)
}
