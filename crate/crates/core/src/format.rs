//! Text formats for structures, clause instances, reduction graphs and semigroups.
//!
//! Every index written to a text format is 1-based; comment lines start with `c`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nae::{AmplifiedInstance, Literal, Mode, NaeInstance, Split3Instance, ZMetadata};
use crate::reduction::{OneInThreeInstance, Provenance, ReductionGraph, Role};
use crate::semigroup::{FiniteGroupoid, FiniteSemigroup};
use crate::structure::{FiniteStructure, Signature, EDGE};

/// Non-blank lines with their 1-based line numbers, split into tokens.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty() && !t[0].starts_with('#'))
}

fn number(line: usize, token: &str) -> Result<usize> {
    token.parse().map_err(|_| Error::parse(line, format!("expected a number, found `{token}`")))
}

/// A 1-based index in `1..=bound`, returned 0-based.
fn index(line: usize, token: &str, bound: usize) -> Result<usize> {
    let v = number(line, token)?;
    if v == 0 || v > bound {
        return Err(Error::parse(line, format!("index {v} outside 1..={bound}")));
    }
    Ok(v - 1)
}

fn expect_len(line: usize, tokens: &[&str], len: usize) -> Result<()> {
    if tokens.len() != len {
        return Err(Error::parse(line, format!("expected {len} fields, found {}", tokens.len())));
    }
    Ok(())
}

pub fn write_structure(s: &FiniteStructure) -> String {
    s.to_string()
}

/// Reads the `structure` text format or a DIMACS edge list.
pub fn read_structure(text: &str) -> Result<FiniteStructure> {
    let first = lines(text).find(|(_, t)| t[0] != "c");
    match first {
        Some((_, t)) if t[0] == "p" => read_graph(text),
        Some((_, t)) if t[0] == "structure" => read_structure_text(text),
        Some((line, _)) => Err(Error::parse(line, "expected `structure` or `p edge` header")),
        None => Err(Error::parse(0, "empty input")),
    }
}

fn read_structure_text(text: &str) -> Result<FiniteStructure> {
    let mut it = lines(text).filter(|(_, t)| t[0] != "c");
    let (line, header) = it.next().ok_or_else(|| Error::parse(0, "empty input"))?;
    expect_len(line, &header, 2)?;
    let size = number(line, header[1])?;
    let mut rels: Vec<(String, usize, Vec<Vec<usize>>)> = Vec::new();
    let mut open = false;
    for (line, t) in it {
        match t[0] {
            "rel" if !open => {
                expect_len(line, &t, 3)?;
                rels.push((t[1].to_string(), number(line, t[2])?, Vec::new()));
                open = true;
            }
            "end" if open => open = false,
            _ if open => {
                let (_, arity, tuples) = rels.last_mut().expect("open relation");
                expect_len(line, &t, *arity)?;
                tuples.push(t.iter().map(|x| index(line, x, size)).collect::<Result<_>>()?);
            }
            other => return Err(Error::parse(line, format!("unexpected `{other}`"))),
        }
    }
    if open {
        return Err(Error::parse(text.lines().count(), "missing `end`"));
    }
    let signature = Signature::new(rels.iter().map(|(n, a, _)| (n.clone(), *a)))?;
    FiniteStructure::from_relations(signature, size, rels.iter().map(|(n, _, ts)| (n.as_str(), ts.clone())))
}

/// DIMACS edge list; role comments are ignored.
pub fn read_graph(text: &str) -> Result<FiniteStructure> {
    read_graph_with_comments(text).map(|(g, _)| g)
}

/// Comment lines with their line numbers, split into tokens.
type Comments<'a> = Vec<(usize, Vec<&'a str>)>;

fn read_graph_with_comments(text: &str) -> Result<(FiniteStructure, Comments<'_>)> {
    let mut size = None;
    let mut declared = 0;
    let mut edges = Vec::new();
    let mut comments = Vec::new();
    for (line, t) in lines(text) {
        match (t[0], size) {
            ("c", _) => comments.push((line, t)),
            ("p", None) => {
                expect_len(line, &t, 4)?;
                if t[1] != EDGE {
                    return Err(Error::parse(line, format!("expected `p edge`, found `p {}`", t[1])));
                }
                size = Some(number(line, t[2])?);
                declared = number(line, t[3])?;
            }
            ("e", Some(n)) => {
                expect_len(line, &t, 3)?;
                let (u, v) = (index(line, t[1], n)?, index(line, t[2], n)?);
                if u == v {
                    return Err(Error::parse(line, "loops are not allowed"));
                }
                edges.push((u, v));
            }
            (other, _) => return Err(Error::parse(line, format!("unexpected `{other}`"))),
        }
    }
    let n = size.ok_or_else(|| Error::parse(0, "missing `p edge` header"))?;
    if edges.len() != declared {
        return Err(Error::parse(0, format!("header declares {declared} edges, found {}", edges.len())));
    }
    Ok((FiniteStructure::graph(n, &edges)?, comments))
}

pub fn write_graph(graph: &FiniteStructure) -> String {
    let edges = graph.edges();
    let mut out = format!("p edge {} {}\n", graph.domain_size(), edges.len());
    for (u, v) in edges {
        writeln!(out, "e {} {}", u + 1, v + 1).expect("writing to a string");
    }
    out
}

fn role_text(role: Role) -> String {
    match role {
        Role::Special => "SPECIAL".into(),
        Role::Literal(l) => format!("LIT {l}"),
        Role::ClausePos { clause, position } => format!("POS {} {}", clause + 1, position + 1),
        Role::Connector { clause, position } => format!("CONN {} {}", clause + 1, position + 1),
    }
}

fn parse_literal(line: usize, token: &str, n: usize) -> Result<Literal> {
    let v: i64 = token.parse().map_err(|_| Error::parse(line, format!("expected a literal, found `{token}`")))?;
    if v == 0 || v.unsigned_abs() as usize > n {
        return Err(Error::parse(line, format!("literal {v} outside 1..={n}")));
    }
    let var = v.unsigned_abs() as usize - 1;
    Ok(if v < 0 { Literal::negative(var) } else { Literal::positive(var) })
}

/// DIMACS edge list preceded by one `c role` comment per vertex.
pub fn write_reduction_graph(rg: &ReductionGraph) -> String {
    let mut out = String::new();
    for (v, &role) in rg.roles().iter().enumerate() {
        writeln!(out, "c role {} {}", v + 1, role_text(role)).expect("writing to a string");
    }
    out + &write_graph(rg.graph())
}

pub fn read_reduction_graph(text: &str) -> Result<ReductionGraph> {
    let (graph, comments) = read_graph_with_comments(text)?;
    let n = graph.domain_size();
    let mut roles = vec![None; n];
    for (line, t) in comments.into_iter().filter(|(_, t)| t.get(1) == Some(&"role")) {
        if t.len() < 4 {
            return Err(Error::parse(line, "truncated role comment"));
        }
        let v = index(line, t[2], n)?;
        let pair = |line| -> Result<(usize, usize)> {
            expect_len(line, &t, 6)?;
            Ok((index(line, t[4], usize::MAX)?, index(line, t[5], 3)?))
        };
        let role = match t[3] {
            "SPECIAL" => Role::Special,
            "LIT" => {
                expect_len(line, &t, 5)?;
                Role::Literal(parse_literal(line, t[4], n)?)
            }
            "POS" => pair(line).map(|(clause, position)| Role::ClausePos { clause, position })?,
            "CONN" => pair(line).map(|(clause, position)| Role::Connector { clause, position })?,
            other => return Err(Error::parse(line, format!("unknown role `{other}`"))),
        };
        roles[v] = Some(role);
    }
    let roles = roles
        .into_iter()
        .enumerate()
        .map(|(v, r)| r.ok_or_else(|| Error::parse(0, format!("vertex {} has no role", v + 1))))
        .collect::<Result<Vec<_>>>()?;
    ReductionGraph::from_parts(graph, roles)
}

fn write_clause_lines<'a>(out: &mut String, clauses: impl Iterator<Item = Vec<String>> + 'a) {
    for c in clauses {
        writeln!(out, "{} 0", c.join(" ")).expect("writing to a string");
    }
}

/// `p nae3 <n> <m>` for monotone width-3 instances and `p nae <n> <m> <width>` otherwise.
pub fn write_nae(inst: &NaeInstance) -> String {
    let mut out = match inst.mode() {
        Mode::MonotoneNae3 => format!("p nae3 {} {}\n", inst.variable_count(), inst.clauses().len()),
        _ => format!("p nae {} {} {}\n", inst.variable_count(), inst.clauses().len(), inst.width()),
    };
    write_clause_lines(&mut out, inst.clauses().iter().map(|c| c.iter().map(Literal::to_string).collect()));
    out
}

pub fn write_split(split: &Split3Instance) -> String {
    let mut out = String::new();
    for z in split.z_metadata() {
        writeln!(out, "c z {} ancestor {} pos {}", z.variable + 1, z.ancestor + 1, z.position).expect("writing to a string");
    }
    out + &write_nae(split.instance())
}

pub fn write_amplified(amp: &AmplifiedInstance) -> String {
    format!("c amplified {}\n", amp.k()) + &write_nae(amp.instance())
}

struct NaeFile<'a> {
    instance: NaeInstance,
    comments: Vec<(usize, Vec<&'a str>)>,
}

fn read_nae_file(text: &str) -> Result<NaeFile<'_>> {
    let mut header: Option<(bool, usize, usize, Option<usize>)> = None;
    let mut clauses = Vec::new();
    let mut comments = Vec::new();
    for (line, t) in lines(text) {
        match (t[0], header) {
            ("c", _) => comments.push((line, t)),
            ("p", None) => match t.get(1) {
                Some(&"nae3") => {
                    expect_len(line, &t, 4)?;
                    header = Some((true, number(line, t[2])?, number(line, t[3])?, Some(3)));
                }
                Some(&"nae") => {
                    expect_len(line, &t, 5)?;
                    header = Some((false, number(line, t[2])?, number(line, t[3])?, Some(number(line, t[4])?)));
                }
                _ => return Err(Error::parse(line, "expected `p nae` or `p nae3` header")),
            },
            (_, Some((_, n, _, width))) => {
                let (&last, body) = t.split_last().expect("non-empty line");
                if last != "0" {
                    return Err(Error::parse(line, "clause must end with 0"));
                }
                if width.is_some_and(|w| w != body.len()) {
                    return Err(Error::parse(line, format!("clause has width {}, header says {}", body.len(), width.unwrap_or(0))));
                }
                clauses.push(body.iter().map(|x| parse_literal(line, x, n)).collect::<Result<Vec<_>>>()?);
            }
            (other, None) => return Err(Error::parse(line, format!("unexpected `{other}` before header"))),
        }
    }
    let (monotone3, n, m, _) = header.ok_or_else(|| Error::parse(0, "missing header"))?;
    if clauses.len() != m {
        return Err(Error::parse(0, format!("header declares {m} clauses, found {}", clauses.len())));
    }
    let has_z = comments.iter().any(|(_, t)| t.get(1) == Some(&"z"));
    let mode = match (monotone3, has_z) {
        (true, _) => Mode::MonotoneNae3,
        (false, true) => Mode::Nae3Split,
        (false, false) => Mode::NaeWide,
    };
    Ok(NaeFile { instance: NaeInstance::new(n, clauses, mode)?, comments })
}

pub fn read_nae(text: &str) -> Result<NaeInstance> {
    read_nae_file(text).map(|f| f.instance)
}

pub fn read_split(text: &str) -> Result<Split3Instance> {
    let file = read_nae_file(text)?;
    let n = file.instance.variable_count();
    let mut meta = Vec::new();
    for (line, t) in file.comments.iter().filter(|(_, t)| t.get(1) == Some(&"z")) {
        expect_len(*line, t, 7)?;
        if t[3] != "ancestor" || t[5] != "pos" {
            return Err(Error::parse(*line, "expected `c z <var> ancestor <clause> pos <i>`"));
        }
        meta.push(ZMetadata {
            variable: index(*line, t[2], n)?,
            ancestor: index(*line, t[4], usize::MAX)?,
            position: number(*line, t[6])?,
        });
    }
    let x_count = n - meta.len().min(n);
    Split3Instance::from_parts(file.instance, x_count, &meta)
}

pub fn read_amplified(text: &str) -> Result<AmplifiedInstance> {
    let file = read_nae_file(text)?;
    let (line, t) = file
        .comments
        .iter()
        .find(|(_, t)| t.get(1) == Some(&"amplified"))
        .ok_or_else(|| Error::parse(0, "missing `c amplified <k>` comment"))?;
    expect_len(*line, t, 3)?;
    AmplifiedInstance::from_parts(file.instance, number(*line, t[2])?)
}

/// `p 1in3 <n> <m>` with optional `c prov` comments.
pub fn write_one_in_three(inst: &OneInThreeInstance) -> String {
    let mut out = String::new();
    for (idx, p) in inst.provenance().unwrap_or_default().iter().enumerate() {
        let detail = match *p {
            Provenance::A2 { vertex } => format!("A2 {}", vertex + 1),
            Provenance::B2 { triangle, colour } => format!("B2 {} {}", triangle + 1, colour + 1),
        };
        writeln!(out, "c prov {} {detail}", idx + 1).expect("writing to a string");
    }
    writeln!(out, "p 1in3 {} {}", inst.variable_count(), inst.clauses().len()).expect("writing to a string");
    write_clause_lines(&mut out, inst.clauses().iter().map(|c| c.iter().map(|v| (v + 1).to_string()).collect()));
    out
}

pub fn read_one_in_three(text: &str) -> Result<OneInThreeInstance> {
    let mut header = None;
    let mut clauses = Vec::new();
    let mut prov = BTreeMap::new();
    for (line, t) in lines(text) {
        match (t[0], header) {
            ("c", _) if t.get(1) == Some(&"prov") => {
                let p = match (t.get(3), t.len()) {
                    (Some(&"A2"), 5) => Provenance::A2 { vertex: index(line, t[4], usize::MAX)? },
                    (Some(&"B2"), 6) => Provenance::B2 {
                        triangle: index(line, t[4], usize::MAX)?,
                        colour: index(line, t[5], 3)?,
                    },
                    _ => return Err(Error::parse(line, "expected `c prov <clause> A2 <v>` or `B2 <t> <colour>`")),
                };
                if prov.insert(number(line, t[2])?, p).is_some() {
                    return Err(Error::parse(line, "duplicate provenance"));
                }
            }
            ("c", _) => {}
            ("p", None) => {
                expect_len(line, &t, 4)?;
                if t[1] != "1in3" {
                    return Err(Error::parse(line, "expected `p 1in3` header"));
                }
                header = Some((number(line, t[2])?, number(line, t[3])?));
            }
            (_, Some((n, _))) => {
                expect_len(line, &t, 4)?;
                if t[3] != "0" {
                    return Err(Error::parse(line, "clause must end with 0"));
                }
                clauses.push([index(line, t[0], n)?, index(line, t[1], n)?, index(line, t[2], n)?]);
            }
            (other, None) => return Err(Error::parse(line, format!("unexpected `{other}` before header"))),
        }
    }
    let (n, m) = header.ok_or_else(|| Error::parse(0, "missing header"))?;
    if clauses.len() != m {
        return Err(Error::parse(0, format!("header declares {m} clauses, found {}", clauses.len())));
    }
    let inst = OneInThreeInstance::new(n, clauses)?;
    if prov.is_empty() {
        return Ok(inst);
    }
    if prov.keys().copied().ne(1..=m) {
        return Err(Error::parse(0, "provenance must cover every clause exactly once"));
    }
    inst.with_provenance(prov.into_values().collect())
}

/// JSON record for multiplication tables; table entries index `elements` from 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemigroupRecord {
    pub elements: Vec<String>,
    pub table: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero: Option<usize>,
}

impl From<&FiniteGroupoid> for SemigroupRecord {
    fn from(g: &FiniteGroupoid) -> Self {
        SemigroupRecord { elements: g.names().to_vec(), table: g.rows(), identity: g.identity(), zero: g.zero() }
    }
}

impl TryFrom<SemigroupRecord> for FiniteGroupoid {
    type Error = Error;

    fn try_from(r: SemigroupRecord) -> Result<Self> {
        FiniteGroupoid::new(r.elements, r.table, r.identity, r.zero)
    }
}

pub fn write_groupoid(g: &FiniteGroupoid) -> String {
    serde_json::to_string_pretty(&SemigroupRecord::from(g)).expect("records serialize") + "\n"
}

pub fn read_groupoid(text: &str) -> Result<FiniteGroupoid> {
    let record: SemigroupRecord =
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    record.try_into()
}

/// Reads a table and checks associativity.
pub fn read_semigroup(text: &str) -> Result<FiniteSemigroup> {
    FiniteSemigroup::from_groupoid(read_groupoid(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nae::{gottlob_amplify, split_to_3};
    use crate::reduction::{graph_to_1in3, nae_to_graph};
    use crate::semigroup::builtin_semigroup;
    use crate::structure::{builtin, cycle_graph};

    #[test]
    fn structure_round_trip() {
        for name in ["K3", "C3", "D3", "TWO"] {
            let s = builtin(name).unwrap();
            assert_eq!(read_structure(&write_structure(&s)).unwrap(), s, "{name}");
        }
        let text = "structure 2\nrel R 3\n1 1 2\nend\nrel S 1\nend\n";
        let s = read_structure(text).unwrap();
        assert_eq!(s.relation_named("R").unwrap().iter().next(), Some(&vec![0, 0, 1]));
        assert!(s.relation_named("S").unwrap().is_empty());
        assert!(read_structure("structure 2\nrel R 1\n3\nend\n").is_err());
        assert!(read_structure("structure 2\nrel R 1\n1\n").is_err());
    }

    #[test]
    fn dimacs_graphs() {
        let c4 = cycle_graph(4);
        let text = write_graph(&c4);
        assert!(text.starts_with("p edge 4 4\n"));
        assert_eq!(read_structure(&text).unwrap(), c4);
        assert!(read_graph("p edge 2 1\ne 1 1\n").is_err());
        assert!(read_graph("p edge 2 2\ne 1 2\n").is_err());
    }

    #[test]
    fn reduction_graph_round_trip() {
        let inst = NaeInstance::monotone(4, &[[0, 1, 2], [1, 2, 3]]).unwrap();
        let rg = nae_to_graph(&inst).unwrap();
        let text = write_reduction_graph(&rg);
        assert!(text.contains("c role 1 SPECIAL\n"));
        assert!(text.contains("c role 3 LIT -1\n"));
        assert_eq!(read_reduction_graph(&text).unwrap(), rg);
        let tampered = text.replace("c role 1 SPECIAL\n", "");
        assert!(read_reduction_graph(&tampered).is_err());
    }

    #[test]
    fn nae_round_trips() {
        let inst = NaeInstance::monotone(3, &[[0, 1, 2]]).unwrap();
        let text = write_nae(&inst);
        assert_eq!(text, "p nae3 3 1\n1 2 3 0\n");
        assert_eq!(read_nae(&text).unwrap(), inst);

        let amp = gottlob_amplify(&inst, 1).unwrap();
        assert_eq!(read_amplified(&write_amplified(&amp)).unwrap(), amp);

        let split = split_to_3(amp.instance()).unwrap();
        let text = write_split(&split);
        assert!(text.starts_with("c z 10 ancestor 1 pos 2\n"));
        assert_eq!(read_split(&text).unwrap(), split);
        assert!(read_nae("p nae3 3 1\n1 2 3 4 0\n").is_err());
        assert!(read_nae("p nae 3 1 3\n1 -1 2 0\n").is_err());
    }

    #[test]
    fn one_in_three_round_trip() {
        let rg = nae_to_graph(&NaeInstance::monotone(3, &[[0, 1, 2]]).unwrap()).unwrap();
        let inst = graph_to_1in3(rg.graph()).unwrap();
        let text = write_one_in_three(&inst);
        assert!(text.contains("c prov 1 A2 1\n"));
        assert_eq!(read_one_in_three(&text).unwrap(), inst);
        let bare = OneInThreeInstance::new(3, vec![[2, 0, 1]]).unwrap();
        assert_eq!(read_one_in_three(&write_one_in_three(&bare)).unwrap(), bare);
        assert!(read_one_in_three("p 1in3 3 1\n1 2 4 0\n").is_err());
    }

    #[test]
    fn semigroup_round_trip() {
        let b21 = builtin_semigroup("B21").unwrap();
        let text = write_groupoid(&b21);
        assert_eq!(read_semigroup(&text).unwrap(), b21);
        let magma = r#"{"elements": ["p", "q"], "table": [[1, 0], [0, 0]]}"#;
        assert!(read_groupoid(magma).is_ok());
        assert!(matches!(read_semigroup(magma), Err(Error::NotAssociative(..))));
    }
}
