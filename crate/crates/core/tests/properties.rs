use itertools::Itertools;
use proptest::prelude::*;

use robustcsp::format;
use robustcsp::{builtin, csp_solve, enumerate_homs, FiniteStructure, Literal, Mode, NaeInstance, Signature};

fn digraph(n: usize, arcs: &[(usize, usize)]) -> FiniteStructure {
    let mut s = FiniteStructure::new(Signature::graph(), n);
    for &(u, v) in arcs {
        s.insert(0, vec![u % n, v % n]).unwrap();
    }
    s
}

fn arb_digraph(max: usize) -> impl Strategy<Value = FiniteStructure> {
    (1..=max).prop_flat_map(|n| prop::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |arcs| digraph(n, &arcs)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn search_agrees_with_exhaustive_maps(b in arb_digraph(5), template in prop::sample::select(vec!["K3", "D3", "C3"])) {
        let a = builtin(template).unwrap();
        let homs = enumerate_homs(&b, &a).unwrap();
        let brute: Vec<Vec<usize>> = std::iter::repeat_n(0..a.domain_size(), b.domain_size())
            .multi_cartesian_product()
            .filter(|m| b.is_homomorphism(&a, m))
            .collect();
        prop_assert_eq!(&homs, &brute);
        prop_assert_eq!(csp_solve(&b, &a).unwrap().is_some(), !homs.is_empty());
    }

    #[test]
    fn text_formats_round_trip(
        b in arb_digraph(6),
        clauses in prop::collection::vec(prop::collection::vec((0usize..7, any::<bool>()), 4), 1..5),
    ) {
        prop_assert_eq!(format::read_structure(&format::write_structure(&b)).unwrap(), b);
        let clauses: Vec<Vec<Literal>> = clauses
            .into_iter()
            .map(|c| c.into_iter().map(|(v, neg)| if neg { Literal::negative(v) } else { Literal::positive(v) }).collect())
            .collect();
        // complementary literals are rejected at construction
        if let Ok(inst) = NaeInstance::new(7, clauses, Mode::NaeWide) {
            prop_assert_eq!(format::read_nae(&format::write_nae(&inst)).unwrap(), inst);
        }
    }
}
