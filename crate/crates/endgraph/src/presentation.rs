//! Finitely presented infinite graphs.
//!
//! A presentation has a finite core of named vertices plus generators that
//! each stand for infinitely many vertices: a `Ray` generator `g` contributes
//! a one-way infinite path `g[0] g[1] …`, a `Clique` generator an infinite
//! complete graph on the same index set.  Infinite attachment patterns are
//! declared symbolically: ω-fans (a core vertex adjacent to infinitely many
//! vertices of one generator), ladders (the rung family `g[i]–h[i]`), and
//! combs (an ω-family of fresh pendant rays, one edge onto each `g[i]`).
//! Finite truncations of the described graph serve as oracle substrates.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenKind {
    Ray,
    Clique,
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenKind::Ray => write!(f, "ray"),
            GenKind::Clique => write!(f, "clique"),
        }
    }
}

/// A vertex token usable in declared finite edges: a core vertex by name, or
/// an explicitly indexed generator vertex `g[i]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VTok {
    Core(String),
    Gen(String, u32),
}

impl fmt::Display for VTok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VTok::Core(v) => write!(f, "{v}"),
            VTok::Gen(g, i) => write!(f, "{g}[{i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Support {
    Omega,
    Finite(BTreeSet<u32>),
}

/// A fan: core vertex `v` adjacent to the vertices `g[i]` for `i` in the
/// support (all `i` when the support is `Omega`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fan {
    pub vertex: String,
    pub generator: String,
    pub support: Support,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphPresentation {
    pub core: BTreeSet<String>,
    pub generators: BTreeMap<String, GenKind>,
    /// Unordered pairs, stored with the smaller token first.
    pub finite_edges: BTreeSet<(VTok, VTok)>,
    pub fans: BTreeSet<Fan>,
    /// Unordered generator pairs, stored sorted.
    pub ladders: BTreeSet<(String, String)>,
    /// (base ray generator, pendant family id).
    pub combs: BTreeSet<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    DanglingCore { name: String, context: String },
    DanglingGenerator { name: String, context: String },
    FanVertexNotCore { name: String },
    SelfLadder { generator: String },
    EmptyFiniteFan { vertex: String, generator: String },
    CombBaseNotRay { generator: String },
    DuplicateFamilyId { family: String },
    FamilyIdClash { family: String },
    EdgeLoop { token: String },
    BadId { id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingCore { name, context } => {
                write!(f, "dangling reference to core vertex {name:?} in {context}")
            }
            Violation::DanglingGenerator { name, context } => {
                write!(f, "dangling reference to generator {name:?} in {context}")
            }
            Violation::FanVertexNotCore { name } => {
                write!(f, "fan vertex {name:?} is not a declared core vertex")
            }
            Violation::SelfLadder { generator } => {
                write!(f, "ladder from generator {generator:?} to itself")
            }
            Violation::EmptyFiniteFan { vertex, generator } => {
                write!(f, "finite fan ({vertex:?}, {generator:?}) has empty index set")
            }
            Violation::CombBaseNotRay { generator } => {
                write!(f, "comb base {generator:?} is not a ray generator")
            }
            Violation::DuplicateFamilyId { family } => {
                write!(f, "pendant family id {family:?} used by two combs")
            }
            Violation::FamilyIdClash { family } => {
                write!(f, "pendant family id {family:?} clashes with a declared id")
            }
            Violation::EdgeLoop { token } => write!(f, "edge loop at {token}"),
            Violation::BadId { id } => write!(f, "malformed identifier {id:?}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

fn id_ok(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '+' | '-'))
}

impl GraphPresentation {
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for id in self.core.iter().chain(self.generators.keys()) {
            if !id_ok(id) {
                violations.push(Violation::BadId { id: id.clone() });
            }
        }
        let check_tok = |tok: &VTok, context: &str, violations: &mut Vec<Violation>| match tok {
            VTok::Core(v) => {
                if !self.core.contains(v) {
                    violations.push(Violation::DanglingCore {
                        name: v.clone(),
                        context: context.to_string(),
                    });
                }
            }
            VTok::Gen(g, _) => {
                if !self.generators.contains_key(g) {
                    violations.push(Violation::DanglingGenerator {
                        name: g.clone(),
                        context: context.to_string(),
                    });
                }
            }
        };
        for (u, v) in &self.finite_edges {
            check_tok(u, "edge", &mut violations);
            check_tok(v, "edge", &mut violations);
            if u == v {
                violations.push(Violation::EdgeLoop {
                    token: u.to_string(),
                });
            }
        }
        for fan in &self.fans {
            if !self.core.contains(&fan.vertex) {
                violations.push(Violation::FanVertexNotCore {
                    name: fan.vertex.clone(),
                });
            }
            if !self.generators.contains_key(&fan.generator) {
                violations.push(Violation::DanglingGenerator {
                    name: fan.generator.clone(),
                    context: "fan".to_string(),
                });
            }
            if let Support::Finite(ixs) = &fan.support {
                if ixs.is_empty() {
                    violations.push(Violation::EmptyFiniteFan {
                        vertex: fan.vertex.clone(),
                        generator: fan.generator.clone(),
                    });
                }
            }
        }
        for (g, h) in &self.ladders {
            for side in [g, h] {
                if !self.generators.contains_key(side) {
                    violations.push(Violation::DanglingGenerator {
                        name: side.clone(),
                        context: "ladder".to_string(),
                    });
                }
            }
            if g == h {
                violations.push(Violation::SelfLadder {
                    generator: g.clone(),
                });
            }
        }
        let mut families = BTreeSet::new();
        for (base, family) in &self.combs {
            match self.generators.get(base) {
                Some(GenKind::Ray) => {}
                Some(GenKind::Clique) => violations.push(Violation::CombBaseNotRay {
                    generator: base.clone(),
                }),
                None => violations.push(Violation::DanglingGenerator {
                    name: base.clone(),
                    context: "comb".to_string(),
                }),
            }
            if !id_ok(family) {
                violations.push(Violation::BadId { id: family.clone() });
            }
            if !families.insert(family.clone()) {
                violations.push(Violation::DuplicateFamilyId {
                    family: family.clone(),
                });
            }
            if self.core.contains(family) || self.generators.contains_key(family) {
                violations.push(Violation::FamilyIdClash {
                    family: family.clone(),
                });
            }
        }
        ValidationReport { violations }
    }

    /// True when nothing of infinite degree is declared: no ω-fans, no
    /// cliques, no combs, no ladders incident to a clique.
    pub fn locally_finite(&self) -> bool {
        self.combs.is_empty()
            && !self.generators.values().any(|k| *k == GenKind::Clique)
            && !self
                .fans
                .iter()
                .any(|f| matches!(f.support, Support::Omega))
    }

    pub fn edge(u: VTok, v: VTok) -> (VTok, VTok) {
        if u <= v {
            (u, v)
        } else {
            (v, u)
        }
    }

    pub fn ladder(g: &str, h: &str) -> (String, String) {
        if g <= h {
            (g.to_string(), h.to_string())
        } else {
            (h.to_string(), g.to_string())
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiniteGraph {
    pub vertices: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl FiniteGraph {
    pub fn add_edge(&mut self, u: &str, v: &str) {
        assert_ne!(u, v, "simple graph: no loops");
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        self.vertices.insert(a.to_string());
        self.vertices.insert(b.to_string());
        self.edges.insert((a.to_string(), b.to_string()));
    }

    pub fn neighbors<'a>(&'a self, v: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges.iter().filter_map(move |(a, b)| {
            if a == v {
                Some(b.as_str())
            } else if b == v {
                Some(a.as_str())
            } else {
                None
            }
        })
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TruncateError {
    #[error("declared finite edge references {token} but truncation depth is {depth}")]
    IndexOutOfRange { token: String, depth: u32 },
    #[error("presentation is not well-formed: {0}")]
    Invalid(String),
}

/// Name of a generator vertex in a truncation.
pub fn gen_vertex(g: &str, i: u32) -> String {
    format!("{g}[{i}]")
}

/// Name of the `i`-th vertex of the `j`-th pendant ray of a comb family.
pub fn pendant_vertex(family: &str, j: u32, i: u32) -> String {
    format!("{family}.{j}[{i}]")
}

/// The finite graph on the core plus the first `n` vertices of each generator
/// (and the first `n` pendants of each comb, truncated to depth `n`).
pub fn truncate(p: &GraphPresentation, n: u32) -> Result<FiniteGraph, TruncateError> {
    assert!(n >= 1, "truncation depth must be positive");
    let report = p.validate();
    if !report.is_empty() {
        return Err(TruncateError::Invalid(format!(
            "{}",
            report.violations[0]
        )));
    }
    let mut g = FiniteGraph::default();
    for v in &p.core {
        g.vertices.insert(v.clone());
    }
    for (id, kind) in &p.generators {
        for i in 0..n {
            g.vertices.insert(gen_vertex(id, i));
        }
        match kind {
            GenKind::Ray => {
                for i in 0..n.saturating_sub(1) {
                    g.add_edge(&gen_vertex(id, i), &gen_vertex(id, i + 1));
                }
            }
            GenKind::Clique => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        g.add_edge(&gen_vertex(id, i), &gen_vertex(id, j));
                    }
                }
            }
        }
    }
    for (u, v) in &p.finite_edges {
        for tok in [u, v] {
            if let VTok::Gen(_, i) = tok {
                if *i >= n {
                    return Err(TruncateError::IndexOutOfRange {
                        token: tok.to_string(),
                        depth: n,
                    });
                }
            }
        }
        let name = |tok: &VTok| match tok {
            VTok::Core(c) => c.clone(),
            VTok::Gen(gen, i) => gen_vertex(gen, *i),
        };
        g.add_edge(&name(u), &name(v));
    }
    for fan in &p.fans {
        let indices: Vec<u32> = match &fan.support {
            Support::Omega => (0..n).collect(),
            Support::Finite(ixs) => ixs.iter().copied().filter(|i| *i < n).collect(),
        };
        for i in indices {
            g.add_edge(&fan.vertex, &gen_vertex(&fan.generator, i));
        }
    }
    for (a, b) in &p.ladders {
        for i in 0..n {
            g.add_edge(&gen_vertex(a, i), &gen_vertex(b, i));
        }
    }
    for (base, family) in &p.combs {
        for j in 0..n {
            for i in 0..n {
                g.vertices.insert(pendant_vertex(family, j, i));
            }
            for i in 0..n.saturating_sub(1) {
                g.add_edge(&pendant_vertex(family, j, i), &pendant_vertex(family, j, i + 1));
            }
            g.add_edge(&gen_vertex(base, j), &pendant_vertex(family, j, 0));
        }
    }
    Ok(g)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
}

fn parse_vtok(s: &str, line: usize) -> Result<VTok, ParseError> {
    if let Some(open) = s.find('[') {
        let close = s.rfind(']').ok_or_else(|| ParseError::Syntax {
            line,
            msg: format!("unterminated index in {s:?}"),
        })?;
        let idx: u32 = s[open + 1..close].parse().map_err(|_| ParseError::Syntax {
            line,
            msg: format!("bad index in {s:?}"),
        })?;
        Ok(VTok::Gen(s[..open].to_string(), idx))
    } else {
        Ok(VTok::Core(s.to_string()))
    }
}

/// Parses the `.egp` text format.
pub fn parse(text: &str) -> Result<GraphPresentation, ParseError> {
    let mut p = GraphPresentation::default();
    let mut section: Option<String> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = Some(line[1..line.len() - 1].to_string());
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let sec = section.as_deref().ok_or_else(|| ParseError::Syntax {
            line: line_no,
            msg: "content before any section header".to_string(),
        })?;
        match sec {
            "core" => {
                let [name] = words[..] else {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: "expected a single vertex name".to_string(),
                    });
                };
                if !p.core.insert(name.to_string()) {
                    return Err(ParseError::DuplicateId {
                        line: line_no,
                        id: name.to_string(),
                    });
                }
            }
            "generators" => {
                let [id, kind] = words[..] else {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: "expected `id ray|clique`".to_string(),
                    });
                };
                let kind = match kind {
                    "ray" => GenKind::Ray,
                    "clique" => GenKind::Clique,
                    other => {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            msg: format!("unknown generator kind {other:?}"),
                        })
                    }
                };
                if p.generators.insert(id.to_string(), kind).is_some() {
                    return Err(ParseError::DuplicateId {
                        line: line_no,
                        id: id.to_string(),
                    });
                }
            }
            "edges" => {
                let [u, v] = words[..] else {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: "expected `u v`".to_string(),
                    });
                };
                let u = parse_vtok(u, line_no)?;
                let v = parse_vtok(v, line_no)?;
                p.finite_edges.insert(GraphPresentation::edge(u, v));
            }
            "fans" => {
                let [v, g, sup] = words[..] else {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: "expected `v g omega|i1,i2,...`".to_string(),
                    });
                };
                let support = if sup == "omega" {
                    Support::Omega
                } else {
                    let ixs = sup
                        .split(',')
                        .map(|s| {
                            s.parse::<u32>().map_err(|_| ParseError::Syntax {
                                line: line_no,
                                msg: format!("bad fan index {s:?}"),
                            })
                        })
                        .collect::<Result<BTreeSet<u32>, _>>()?;
                    Support::Finite(ixs)
                };
                p.fans.insert(Fan {
                    vertex: v.to_string(),
                    generator: g.to_string(),
                    support,
                });
            }
            "ladders" => {
                let [g, h] = words[..] else {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: "expected `g h`".to_string(),
                    });
                };
                p.ladders.insert(GraphPresentation::ladder(g, h));
            }
            "combs" => {
                let [g, fam] = words[..] else {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: "expected `g familyid`".to_string(),
                    });
                };
                p.combs.insert((g.to_string(), fam.to_string()));
            }
            other => {
                return Err(ParseError::Syntax {
                    line: line_no,
                    msg: format!("unknown section {other:?}"),
                })
            }
        }
    }
    Ok(p)
}

/// Serializes to the canonical `.egp` form: fixed section order, entries
/// sorted lexicographically, LF endings, empty sections omitted.
pub fn serialize(p: &GraphPresentation) -> String {
    let mut out = String::new();
    let section = |header: &str, lines: Vec<String>, out: &mut String| {
        if lines.is_empty() {
            return;
        }
        out.push_str(&format!("[{header}]\n"));
        let mut lines = lines;
        lines.sort();
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
    };
    section("core", p.core.iter().cloned().collect(), &mut out);
    section(
        "generators",
        p.generators
            .iter()
            .map(|(id, kind)| format!("{id} {kind}"))
            .collect(),
        &mut out,
    );
    section(
        "edges",
        p.finite_edges
            .iter()
            .map(|(u, v)| format!("{u} {v}"))
            .collect(),
        &mut out,
    );
    section(
        "fans",
        p.fans
            .iter()
            .map(|f| {
                let sup = match &f.support {
                    Support::Omega => "omega".to_string(),
                    Support::Finite(ixs) => ixs
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                };
                format!("{} {} {sup}", f.vertex, f.generator)
            })
            .collect(),
        &mut out,
    );
    section(
        "ladders",
        p.ladders
            .iter()
            .map(|(g, h)| format!("{g} {h}"))
            .collect(),
        &mut out,
    );
    section(
        "combs",
        p.combs
            .iter()
            .map(|(g, fam)| format!("{g} {fam}"))
            .collect(),
        &mut out,
    );
    out
}
