//! The reduction chain with per-stage artifacts, persistence and an exhaustive verifier.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flex::k_robust;
use crate::format;
use crate::nae::{
    check_lemma_nae_props, gottlob_amplify, majority_decode, nae_rigid_assignment, nae_satisfiable, split_to_3,
    AmplifiedInstance, ItemStatus, Mode, NaeInstance, Split3Instance,
};
use crate::reduction::{
    all_edge_pairs, check_observations, colouring_to_1in3, decode_colouring, encode_colouring, find_four_cycle,
    graph_to_1in3, nae_to_graph, three_colouring, ColouringCsp, normalize_colouring, one_in_three_satisfiable, one_in_three_solutions,
    one_in_three_to_colouring, untriangulated_edge, ObservationStatus, OneInThreeInstance, ReductionGraph,
};
use crate::semigroup::{build_s_i, build_t_mod_u, coordinate_extraction, isomorphic, FiniteSemigroup};
use crate::structure::{builtin, FiniteStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Stage {
    Amplify,
    Split,
    Graph,
    OneInThree,
    Semigroup,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Amplify, Stage::Split, Stage::Graph, Stage::OneInThree, Stage::Semigroup];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Amplify => "amplify",
            Stage::Split => "split",
            Stage::Graph => "graph",
            Stage::OneInThree => "1in3",
            Stage::Semigroup => "semigroup",
        }
    }

    /// The full chain, without the first two stages when amplification is skipped.
    pub fn chain(skip_amplification: bool) -> &'static [Stage] {
        if skip_amplification {
            &Stage::ALL[2..]
        } else {
            &Stage::ALL
        }
    }

    /// Parses a comma-separated list.
    pub fn parse_list(text: &str) -> Result<Vec<Stage>> {
        text.split(',').map(|s| s.trim().parse()).collect()
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Stage> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidInstance(format!("unknown stage `{s}`")))
    }
}

impl From<Stage> for String {
    fn from(s: Stage) -> String {
        s.name().into()
    }
}

impl TryFrom<String> for Stage {
    type Error = Error;

    fn try_from(s: String) -> Result<Stage> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainOptions {
    /// Amplification parameter; ignored when amplification is skipped.
    pub k: usize,
    /// Feed the input straight into the graph stage.
    pub skip_amplification: bool,
    /// Must be a prefix of [`Stage::chain`]; empty means the whole chain.
    pub stages: Vec<Stage>,
    pub element_limit: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            k: 6,
            skip_amplification: false,
            stages: Vec::new(),
            element_limit: crate::semigroup::DEFAULT_ELEMENT_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineRun {
    pub input: NaeInstance,
    /// `None` when amplification was skipped.
    pub k: Option<usize>,
    pub amplified: Option<AmplifiedInstance>,
    pub split: Option<Split3Instance>,
    pub graph: Option<ReductionGraph>,
    pub one_in_three: Option<OneInThreeInstance>,
    pub semigroup: Option<FiniteSemigroup>,
}

impl PipelineRun {
    pub fn stages(&self) -> Vec<Stage> {
        let present = [
            self.amplified.is_some(),
            self.split.is_some(),
            self.graph.is_some(),
            self.one_in_three.is_some(),
            self.semigroup.is_some(),
        ];
        Stage::ALL.into_iter().zip(present).filter_map(|(s, p)| p.then_some(s)).collect()
    }

    /// The width-3 instance the graph stage consumed.
    fn graph_source(&self) -> Option<&NaeInstance> {
        match (&self.split, self.k) {
            (Some(split), _) => Some(split.instance()),
            (None, None) => Some(&self.input),
            (None, Some(_)) => None,
        }
    }
}

fn at(stage: Stage) -> impl Fn(Error) -> Error {
    move |e| Error::Stage { stage: stage.name().into(), source: Box::new(e) }
}

/// Runs a prefix of the chain on a monotone width-3 input (any width-3 input when skipping
/// amplification).
pub fn run_chain(input: &NaeInstance, options: &ChainOptions) -> Result<PipelineRun> {
    let chain = Stage::chain(options.skip_amplification);
    let stages: &[Stage] = if options.stages.is_empty() { chain } else { &options.stages };
    if !chain.starts_with(stages) {
        let names = chain.iter().map(|s| s.name()).join(",");
        return Err(Error::InvalidInstance(format!("stages must be a prefix of {names}")));
    }
    let input_ok = input.clauses().is_empty() || input.width() == 3;
    if !input_ok || !options.skip_amplification && !input.is_monotone() {
        return Err(Error::InvalidInstance("the chain expects a monotone width-3 NAE instance".into()));
    }
    let mut run = PipelineRun {
        input: input.clone(),
        k: (!options.skip_amplification).then_some(options.k),
        amplified: None,
        split: None,
        graph: None,
        one_in_three: None,
        semigroup: None,
    };
    for &stage in stages {
        let wrap = at(stage);
        match stage {
            Stage::Amplify => run.amplified = Some(gottlob_amplify(input, options.k).map_err(wrap)?),
            Stage::Split => {
                let amp = run.amplified.as_ref().expect("prefix order");
                run.split = Some(split_to_3(amp.instance()).map_err(wrap)?);
            }
            Stage::Graph => {
                let source = run.graph_source().expect("prefix order");
                run.graph = Some(nae_to_graph(source).map_err(wrap)?);
            }
            Stage::OneInThree => {
                let rg = run.graph.as_ref().expect("prefix order");
                run.one_in_three = Some(graph_to_1in3(rg.graph()).map_err(wrap)?);
            }
            Stage::Semigroup => {
                let inst = run.one_in_three.as_ref().expect("prefix order");
                run.semigroup = Some(build_s_i(inst, options.element_limit).map_err(wrap)?.semigroup);
            }
        }
    }
    Ok(run)
}

const MANIFEST: &str = "run.json";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    k: Option<usize>,
    stages: Vec<Stage>,
}

fn file_name(stage: Option<Stage>) -> &'static str {
    match stage {
        None => "input.nae",
        Some(Stage::Amplify) => "amplified.nae",
        Some(Stage::Split) => "split.nae",
        Some(Stage::Graph) => "graph.col",
        Some(Stage::OneInThree) => "instance.1in3",
        Some(Stage::Semigroup) => "si.sgp",
    }
}

/// Writes one file per artifact plus a manifest.
pub fn save_run(run: &PipelineRun, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let write = |stage: Option<Stage>, text: String| std::fs::write(dir.join(file_name(stage)), text);
    write(None, format::write_nae(&run.input))?;
    if let Some(a) = &run.amplified {
        write(Some(Stage::Amplify), format::write_amplified(a))?;
    }
    if let Some(s) = &run.split {
        write(Some(Stage::Split), format::write_split(s))?;
    }
    if let Some(g) = &run.graph {
        write(Some(Stage::Graph), format::write_reduction_graph(g))?;
    }
    if let Some(i) = &run.one_in_three {
        write(Some(Stage::OneInThree), format::write_one_in_three(i))?;
    }
    if let Some(s) = &run.semigroup {
        write(Some(Stage::Semigroup), format::write_groupoid(s))?;
    }
    let manifest = Manifest { k: run.k, stages: run.stages() };
    std::fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    Ok(())
}

/// Reads a run directory; every artifact is revalidated by its reader.
pub fn load_run(dir: &Path) -> Result<PipelineRun> {
    let read_file = |name: &str| -> Result<String> {
        let path = dir.join(name);
        std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    };
    let read = |stage: Option<Stage>| read_file(file_name(stage));
    let manifest: Manifest =
        serde_json::from_str(&read_file(MANIFEST)?).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    let chain = Stage::chain(manifest.k.is_none());
    if !chain.starts_with(&manifest.stages) {
        return Err(Error::InvalidInstance("manifest stages are not a prefix of the chain".into()));
    }
    let has = |s: Stage| manifest.stages.contains(&s);
    let load = |s: Stage| read(Some(s)).map_err(at(s));
    Ok(PipelineRun {
        input: format::read_nae(&read(None)?)?,
        k: manifest.k,
        amplified: has(Stage::Amplify).then(|| format::read_amplified(&load(Stage::Amplify)?)).transpose()?,
        split: has(Stage::Split).then(|| format::read_split(&load(Stage::Split)?)).transpose()?,
        graph: has(Stage::Graph).then(|| format::read_reduction_graph(&load(Stage::Graph)?)).transpose()?,
        one_in_three: has(Stage::OneInThree)
            .then(|| format::read_one_in_three(&load(Stage::OneInThree)?))
            .transpose()?,
        semigroup: has(Stage::Semigroup).then(|| format::read_semigroup(&load(Stage::Semigroup)?)).transpose()?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
    Skipped,
    Measured,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Vacuous => "VACUOUS",
            Status::Skipped => "SKIPPED",
            Status::Measured => "MEASURED",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub stage: String,
    pub check: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VerifyReport {
    pub rows: Vec<ReportRow>,
}

impl VerifyReport {
    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.status == Status::Fail)
    }

    pub fn row(&self, stage: &str, check: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.stage == stage && r.check == check)
    }

    fn push(&mut self, stage: &str, check: &str, status: Status, witness: Option<String>) {
        self.rows.push(ReportRow { stage: stage.into(), check: check.into(), status, witness });
    }

    fn pass_or_fail(&mut self, stage: &str, check: &str, failure: Option<String>) {
        let status = if failure.is_some() { Status::Fail } else { Status::Pass };
        self.push(stage, check, status, failure);
    }

    /// Guard errors become SKIPPED rows; anything else is reported as a failure.
    fn guarded<T>(&mut self, stage: &str, check: &str, result: Result<T>) -> Option<T> {
        match result {
            Ok(v) => Some(v),
            Err(e @ Error::Guard { .. }) => {
                self.push(stage, check, Status::Skipped, Some(e.to_string()));
                None
            }
            Err(e) => {
                self.push(stage, check, Status::Fail, Some(e.to_string()));
                None
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Bound on enumerated objects per check.
    pub guard: usize,
    /// Solution count up to which `T/U` is built.
    pub hom_limit: usize,
    pub element_limit: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { guard: 1 << 20, hom_limit: 12, element_limit: crate::semigroup::DEFAULT_ELEMENT_LIMIT }
    }
}

fn bits(values: &[bool]) -> String {
    values.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn sat_word(sat: bool) -> String {
    if sat { "satisfiable" } else { "unsatisfiable" }.into()
}

/// Partial assignments on at most `k` of `n` elements with `m` values.
fn partial_assignment_count(n: usize, m: usize, k: usize) -> u128 {
    (0..=k.min(n)).map(|i| (0..i).fold(1u128, |acc, j| acc * (n - j) as u128 / (j + 1) as u128) * (m as u128).pow(i as u32)).sum()
}

fn equivalence(upstream: bool, downstream: bool, transfer: Option<String>) -> Option<String> {
    if upstream != downstream {
        Some(format!("upstream {} but this stage {}", sat_word(upstream), sat_word(downstream)))
    } else {
        transfer
    }
}

/// Exhaustive checks over every artifact of a run.
///
/// Robustness is measured, never assumed: rows for the amplified instance use the run's `k`,
/// rows for the graph and the 1-in-3 instance use 2.
pub fn verify_chain(run: &PipelineRun, options: &VerifyOptions) -> VerifyReport {
    let mut report = VerifyReport::default();
    let guard = options.guard;
    let input_sol = nae_satisfiable(&run.input);
    report.push("input", "satisfiability", Status::Measured, Some(sat_word(input_sol.is_some())));

    // (sat, witness) of the instance feeding the graph stage
    let mut upstream: Option<Option<Vec<bool>>> = if run.k.is_none() { Some(input_sol.clone()) } else { None };

    if let (Some(amp), Some(k)) = (&run.amplified, run.k) {
        let st = "amplify";
        let rebuilt = gottlob_amplify(&run.input, k);
        report.pass_or_fail(st, "construction", (rebuilt.as_ref() != Ok(amp)).then(|| "artifact differs from a fresh amplification".into()));
        let sol = nae_satisfiable(amp.instance());
        let transfer = match (&input_sol, &sol) {
            (Some(x), Some(y)) => {
                if !amp.instance().satisfied_by(&amp.lift(x)) {
                    Some(format!("lift of {} fails", bits(x)))
                } else if !run.input.satisfied_by(&majority_decode(y, amp)) {
                    Some(format!("majority decode of {} fails", bits(y)))
                } else {
                    None
                }
            }
            _ => None,
        };
        report.pass_or_fail(st, "satisfiability-equivalence", equivalence(input_sol.is_some(), sol.is_some(), transfer));
        if sol.is_none() {
            report.push(st, &format!("{k}-robust"), Status::Vacuous, None);
        } else if partial_assignment_count(amp.instance().variable_count(), 2, k) > guard as u128 {
            report.push(st, &format!("{k}-robust"), Status::Skipped, Some(Error::guard("partial assignments", guard).to_string()));
        } else {
            let witness = match nae_rigid_assignment(amp.instance(), k) {
                None => "true".to_string(),
                Some(pins) => format!("false: {}", pins.iter().map(|&(v, b)| format!("{}={}", v + 1, u8::from(b))).join(" ")),
            };
            report.push(st, &format!("{k}-robust"), Status::Measured, Some(witness));
        }

        if let Some(split) = &run.split {
            let st = "split";
            let rebuilt = split_to_3(amp.instance());
            report.pass_or_fail(st, "construction", (rebuilt.as_ref() != Ok(split)).then(|| "artifact differs from a fresh split".into()));
            report.pass_or_fail(st, "z-occurrences", (!split.chain_occurrences_ok()).then(|| "a chain variable occurs other than twice".into()));
            let split_sol = nae_satisfiable(split.instance());
            let transfer = match (&sol, &split_sol) {
                (Some(y), Some(z)) => {
                    if split.extend_from_x(y).is_none_or(|e| !split.instance().satisfied_by(&e)) {
                        Some(format!("{} does not extend", bits(y)))
                    } else if !amp.instance().satisfied_by(&z[..split.x_variables().end]) {
                        Some(format!("restriction of {} fails", bits(z)))
                    } else {
                        None
                    }
                }
                _ => None,
            };
            report.pass_or_fail(st, "satisfiability-equivalence", equivalence(sol.is_some(), split_sol.is_some(), transfer));
            if let Some(lemma) = report.guarded(st, "chain-lemma", check_lemma_nae_props(split, guard)) {
                for item in &lemma.items {
                    let check = format!("chain-lemma-{}", item.item);
                    match &item.status {
                        ItemStatus::Holds => report.push(st, &check, Status::Pass, None),
                        ItemStatus::Vacuous => report.push(st, &check, Status::Vacuous, None),
                        ItemStatus::Fails { witness } => report.push(st, &check, Status::Fail, Some(witness.clone())),
                    }
                }
            }
            upstream = Some(split_sol);
        }
    }

    let Some(rg) = &run.graph else { return report };
    let st = "graph";
    let source = run.graph_source().expect("graph implies its source");
    let rebuilt = nae_to_graph(source);
    report.pass_or_fail(st, "construction", (rebuilt.as_ref() != Ok(rg)).then(|| "artifact differs from a fresh construction".into()));
    let (n, m) = (rg.variable_count(), rg.clauses().len());
    let counts = (rg.vertex_count(), rg.edge_count());
    report.pass_or_fail(
        st,
        "counts",
        (counts != (1 + 2 * n + 6 * m, 3 * n + 12 * m)).then(|| format!("{} vertices, {} edges for n = {n}, m = {m}", counts.0, counts.1)),
    );
    let graph = rg.graph();
    match untriangulated_edge(graph) {
        Ok(e) => report.pass_or_fail(st, "triangulated", e.map(|(u, v)| format!("edge {{{}, {}}}", u + 1, v + 1))),
        Err(e) => report.pass_or_fail(st, "triangulated", Some(e.to_string())),
    }
    match find_four_cycle(graph) {
        Ok(c) => report.pass_or_fail(st, "no-4-cycle", c.map(|c| c.iter().map(|v| v + 1).join("-"))),
        Err(e) => report.pass_or_fail(st, "no-4-cycle", Some(e.to_string())),
    }
    let k3 = builtin("K3").expect("builtin");
    let colouring = three_colouring(graph).expect("adjacency was checked");
    let upstream_sol = upstream.expect("graph implies its source");
    let transfer = match (&upstream_sol, &colouring) {
        (Some(x), Some(c)) => {
            let enc = encode_colouring(rg, x);
            if enc.as_ref().map_or(true, |e| !graph.is_homomorphism(&k3, e)) {
                Some(format!("encoding of {} is not a colouring", bits(x)))
            } else if decode_colouring(rg, &normalize_colouring(c)).map_or(true, |v| !source.satisfied_by(&v)) {
                Some("decoded colouring does not satisfy the source".into())
            } else {
                None
            }
        }
        _ => None,
    };
    report.pass_or_fail(st, "satisfiability-equivalence", equivalence(upstream_sol.is_some(), colouring.is_some(), transfer));
    measure_robust(&mut report, st, graph, &k3, colouring.is_some(), guard);
    let edges = rg.edge_count();
    let pairs = edges * edges.saturating_sub(1) / 2;
    if colouring.is_none() {
        report.push(st, "edge-pairs", Status::Vacuous, None);
    } else if pairs > guard {
        report.push(st, "edge-pairs", Status::Skipped, Some(Error::guard("edge pairs", guard).to_string()));
    } else if let Some(all) = report.guarded(st, "edge-pairs", all_edge_pairs(graph, guard / pairs.max(1))) {
        let bad = all.iter().find(|(_, _, r)| !r.agrees);
        report.pass_or_fail(
            st,
            "edge-pairs",
            bad.map(|(e1, e2, r)| format!("{{{},{}}} {{{},{}}}: {:?} vs {:?}", e1.0 + 1, e1.1 + 1, e2.0 + 1, e2.1 + 1, r.pattern, r.class)),
        );
    }

    let Some(inst) = &run.one_in_three else { return report };
    let st = "1in3";
    let rebuilt = graph_to_1in3(graph);
    report.pass_or_fail(st, "construction", (rebuilt.as_ref() != Ok(inst)).then(|| "artifact differs from a fresh construction".into()));
    let sol = match one_in_three_satisfiable(inst) {
        Ok(s) => s,
        Err(e) => {
            report.push(st, "satisfiability-equivalence", Status::Fail, Some(e.to_string()));
            return report;
        }
    };
    let transfer = match (&colouring, &sol) {
        (Some(c), Some(x)) => {
            if !inst.satisfied_by(&colouring_to_1in3(c)) {
                Some("encoded colouring fails".into())
            } else if one_in_three_to_colouring(x).is_none_or(|c| !graph.is_homomorphism(&k3, &c)) {
                Some(format!("{} does not decode to a colouring", bits(x)))
            } else {
                None
            }
        }
        _ => None,
    };
    report.pass_or_fail(st, "satisfiability-equivalence", equivalence(colouring.is_some(), sol.is_some(), transfer));

    let limit = guard / inst.variable_count().max(1);
    if let Some(solutions) = report.guarded(st, "colouring-bijection", one_in_three_solutions(inst, limit)) {
        match ColouringCsp::new(graph).expect("adjacency was checked").solver().all_up_to(limit) {
            None => report.push(st, "colouring-bijection", Status::Skipped, Some(Error::guard("3-colourings", limit).to_string())),
            Some(colourings) => {
                let failure = if solutions.len() != colourings.len() {
                    Some(format!("{} solutions, {} colourings", solutions.len(), colourings.len()))
                } else {
                    colourings
                        .iter()
                        .find(|c| one_in_three_to_colouring(&colouring_to_1in3(c)).as_ref() != Some(*c))
                        .map(|c| format!("colouring {} does not round-trip", c.iter().join("")))
                };
                report.pass_or_fail(st, "colouring-bijection", failure);
            }
        }
    }
    if let Some(obs) = report.guarded(st, "observations", check_observations(inst, limit)) {
        for (i, item) in obs.items.iter().enumerate() {
            let check = format!("observation-{}", ["I", "II", "III", "IV"][i]);
            match item {
                ObservationStatus::Pass => report.push(st, &check, Status::Pass, None),
                ObservationStatus::Vacuous => report.push(st, &check, Status::Vacuous, None),
                ObservationStatus::Fail { witness } => report.push(st, &check, Status::Fail, Some(witness.clone())),
            }
        }
    }
    let two = builtin("TWO").expect("builtin");
    let robust = measure_robust(&mut report, st, &inst.to_structure(), &two, sol.is_some(), guard);

    let Some(si) = &run.semigroup else { return report };
    let st = "semigroup";
    let Some(fresh) = report.guarded(st, "construction", build_s_i(inst, options.element_limit)) else { return report };
    report.pass_or_fail(st, "construction", (fresh.semigroup != *si).then(|| "artifact differs from a fresh construction".into()));
    report.pass_or_fail(
        st,
        "size",
        (si.len() != fresh.presentation.expected_size())
            .then(|| format!("{} elements, closed form {}", si.len(), fresh.presentation.expected_size())),
    );
    if sol.is_none() {
        report.push(st, "t-mod-u-isomorphism", Status::Vacuous, None);
        return report;
    }
    if robust != Some(true) {
        report.push(st, "t-mod-u-isomorphism", Status::Skipped, Some("instance not verified 2-robust".into()));
        return report;
    }
    let Some(tu) = report.guarded(st, "t-mod-u-isomorphism", build_t_mod_u(inst, options.hom_limit, options.element_limit))
    else {
        return report;
    };
    report.pass_or_fail(
        st,
        "t-mod-u-isomorphism",
        isomorphic(si, &tu.semigroup)
            .is_none()
            .then(|| format!("|S_I| = {}, |T/U| = {}", si.len(), tu.semigroup.len())),
    );
    report.pass_or_fail(
        st,
        "coordinate-extraction",
        coordinate_extraction(&tu, inst).is_none_or(|x| !inst.satisfied_by(&x)).then(|| "no coordinate decodes to a solution".into()),
    );
    report
}

/// Adds a `2-robust` row; returns the measured value when one was computed.
fn measure_robust(
    report: &mut VerifyReport,
    stage: &str,
    instance: &FiniteStructure,
    template: &FiniteStructure,
    satisfiable: bool,
    guard: usize,
) -> Option<bool> {
    let check = "2-robust";
    if !satisfiable {
        report.push(stage, check, Status::Vacuous, None);
        return None;
    }
    if partial_assignment_count(instance.domain_size(), template.domain_size(), 2) > guard as u128 {
        report.push(stage, check, Status::Skipped, Some(Error::guard("partial assignments", guard).to_string()));
        return None;
    }
    let robust = report.guarded(stage, check, k_robust(instance, template, 2))?;
    report.push(stage, check, Status::Measured, Some(robust.to_string()));
    Some(robust)
}

impl PipelineRun {
    /// Monotone width-3 input in canonical mode, as `run_chain` expects after reading a file.
    pub fn normalize_input(input: NaeInstance) -> Result<NaeInstance> {
        if input.mode() == Mode::MonotoneNae3 || !input.is_monotone() || input.width() != 3 {
            return Ok(input);
        }
        let clauses: Vec<[usize; 3]> = input.clauses().iter().map(|c| [c[0].var, c[1].var, c[2].var]).collect();
        NaeInstance::monotone(input.variable_count(), &clauses)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> NaeInstance {
        NaeInstance::monotone(3, &[[0, 1, 2]]).unwrap()
    }

    #[test]
    fn stage_prefixes() {
        let opts = ChainOptions { k: 1, stages: vec![Stage::Amplify, Stage::Split], ..Default::default() };
        let run = run_chain(&toy(), &opts).unwrap();
        assert_eq!(run.stages(), vec![Stage::Amplify, Stage::Split]);
        let bad = ChainOptions { k: 1, stages: vec![Stage::Split], ..Default::default() };
        assert!(run_chain(&toy(), &bad).is_err());
        assert_eq!(Stage::parse_list("amplify,split,graph,1in3").unwrap().len(), 4);
        assert!(Stage::parse_list("amplify,nope").is_err());
    }

    #[test]
    fn skip_amplification_builds_graph_and_instance() {
        let opts = ChainOptions { skip_amplification: true, stages: vec![Stage::Graph, Stage::OneInThree], ..Default::default() };
        let run = run_chain(&toy(), &opts).unwrap();
        assert!(run.amplified.is_none() && run.split.is_none());
        assert_eq!(run.graph.as_ref().unwrap().vertex_count(), 13);
        let report = verify_chain(&run, &VerifyOptions::default());
        assert!(!report.failed(), "{report:#?}");
        assert_eq!(report.row("graph", "edge-pairs").unwrap().status, Status::Pass);
        assert_eq!(report.row("1in3", "observation-IV").unwrap().status, Status::Pass);
    }

    #[test]
    fn stage_errors_are_attributed() {
        let wide = NaeInstance::new(
            4,
            vec![(0..4).map(crate::nae::Literal::positive).collect()],
            Mode::NaeWide,
        )
        .unwrap();
        assert!(run_chain(&wide, &ChainOptions { k: 1, ..Default::default() }).is_err());
        let opts = ChainOptions { k: 1, element_limit: 10, ..Default::default() };
        let err = run_chain(&toy(), &opts).unwrap_err();
        assert!(matches!(&err, Error::Stage { stage, .. } if stage == "semigroup"), "{err}");
        assert!(matches!(err.root(), Error::Guard { .. }));
    }

    #[test]
    fn unsatisfiable_input_stays_unsatisfiable() {
        // every triple of five variables: some side of any 2-colouring holds three
        let triples: Vec<[usize; 3]> = (0..5).combinations(3).map(|c| [c[0], c[1], c[2]]).collect();
        let inst = NaeInstance::monotone(5, &triples).unwrap();
        let opts = ChainOptions { skip_amplification: true, stages: vec![Stage::Graph, Stage::OneInThree], ..Default::default() };
        let run = run_chain(&inst, &opts).unwrap();
        let report = verify_chain(&run, &VerifyOptions::default());
        assert!(!report.failed(), "{report:#?}");
        assert_eq!(report.row("1in3", "2-robust").unwrap().status, Status::Vacuous);
        assert_eq!(report.row("1in3", "satisfiability-equivalence").unwrap().status, Status::Pass);
    }

    #[test]
    fn save_and_load() {
        let dir = std::env::temp_dir().join(format!("robustcsp-run-{}", std::process::id()));
        let opts = ChainOptions { k: 1, stages: vec![Stage::Amplify, Stage::Split, Stage::Graph], ..Default::default() };
        let run = run_chain(&toy(), &opts).unwrap();
        save_run(&run, &dir).unwrap();
        assert_eq!(load_run(&dir).unwrap(), run);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn report_serializes_as_rows() {
        let run = run_chain(&toy(), &ChainOptions { skip_amplification: true, stages: vec![Stage::Graph], ..Default::default() }).unwrap();
        let json = serde_json::to_value(verify_chain(&run, &VerifyOptions::default())).unwrap();
        let first = &json.as_array().unwrap()[0];
        assert_eq!(first["stage"], "input");
        assert_eq!(first["status"], "MEASURED");
    }
}
