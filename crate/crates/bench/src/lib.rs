//! Shared inputs for the criterion benches.

use robustcsp::nae::{gottlob_amplify, split_to_3};
use robustcsp::reduction::nae_to_graph;
use robustcsp::{NaeInstance, OneInThreeInstance, ReductionGraph};

/// The one-clause NAE3 instance `(x1 x2 x3)`.
pub fn single_clause() -> NaeInstance {
    NaeInstance::monotone(3, &[[0, 1, 2]]).expect("valid clause")
}

/// The one-clause 1-in-3 instance.
pub fn single_clause_1in3() -> OneInThreeInstance {
    OneInThreeInstance::new(3, vec![[0, 1, 2]]).expect("valid clause")
}

/// Graph of the single clause after amplification at `k` and splitting.
pub fn amplified_graph(k: usize) -> ReductionGraph {
    let amp = gottlob_amplify(&single_clause(), k).expect("monotone input");
    let split = split_to_3(amp.instance()).expect("wide clauses");
    nae_to_graph(split.instance()).expect("width-3 input")
}
