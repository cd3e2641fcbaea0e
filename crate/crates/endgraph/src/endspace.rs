//! End spaces and edge-end spaces of presented graphs.
//!
//! Two rays are end-equivalent when no finite vertex set separates their
//! tails, and edge-end-equivalent when no finite edge set does.  For
//! presented graphs both relations are decided symbolically: only
//! infinite-multiplicity attachments (ω-fans, ladders, cliques) survive every
//! finite deletion.  A fan merges edge-ends but not ends — its apex is a
//! one-vertex separator — while ladders and cliques merge both.  The
//! [`separator_oracle`] checks these symbolic answers by exhaustive search on
//! finite truncations.

use crate::descriptor::SpaceDescriptor;
pub use crate::descriptor::{homeomorphic, DescriptorError};
use crate::presentation::{
    gen_vertex, pendant_vertex, truncate, FiniteGraph, GenKind, GraphPresentation, Support,
};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Vertex,
    Edge,
}

/// The finite reachability substrate for edge-end equivalence: generators and
/// fan apexes as nodes, with an edge wherever an ω-fan or ladder provides
/// infinitely many edge-disjoint connections.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OmegaQuotient {
    pub nodes: BTreeSet<String>,
    pub omega_edges: BTreeSet<(String, String)>,
    /// (base generator, pendant family id) annotations from combs.
    pub comb_edges: BTreeSet<(String, String)>,
}

pub fn omega_quotient(p: &GraphPresentation) -> OmegaQuotient {
    let mut q = OmegaQuotient::default();
    for g in p.generators.keys() {
        q.nodes.insert(g.clone());
    }
    for fan in &p.fans {
        if fan.support == Support::Omega {
            q.nodes.insert(fan.vertex.clone());
            q.omega_edges
                .insert(sorted_pair(&fan.vertex, &fan.generator));
        }
    }
    for (g, h) in &p.ladders {
        q.omega_edges.insert(sorted_pair(g, h));
    }
    q.comb_edges = p.combs.clone();
    q
}

fn sorted_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn components(
    nodes: &BTreeSet<String>,
    edges: &BTreeSet<(String, String)>,
) -> Vec<BTreeSet<String>> {
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    for start in nodes {
        if seen.contains(start.as_str()) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([start.as_str()]);
        seen.insert(start);
        while let Some(v) = queue.pop_front() {
            comp.insert(v.to_string());
            for w in adj.get(v).into_iter().flatten() {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        out.push(comp);
    }
    out
}

fn point_id(class: &BTreeSet<String>, generators: &BTreeMap<String, GenKind>) -> String {
    let rep = class
        .iter()
        .find(|n| generators.contains_key(*n))
        .expect("class contains a generator");
    format!("[{rep}]")
}

fn descriptor_from_classes(
    p: &GraphPresentation,
    classes: &[BTreeSet<String>],
) -> SpaceDescriptor {
    let mut d = SpaceDescriptor::default();
    let mut gen_point: BTreeMap<&str, String> = BTreeMap::new();
    for class in classes {
        let id = point_id(class, &p.generators);
        for g in class {
            if p.generators.contains_key(g) {
                gen_point.insert(g, id.clone());
            }
        }
        d.isolated.insert(id);
    }
    for (base, family) in &p.combs {
        let limit = gen_point[base.as_str()].clone();
        d.isolated.remove(&limit);
        d.limits.insert(limit.clone());
        d.sequences.insert((family.clone(), limit));
    }
    d.canonicalize()
}

/// Generator → point id under edge-end equivalence.
pub fn edge_end_classes(p: &GraphPresentation) -> BTreeMap<String, String> {
    let q = omega_quotient(p);
    let mut table = BTreeMap::new();
    for class in components(&q.nodes, &q.omega_edges) {
        if !class.iter().any(|n| p.generators.contains_key(n)) {
            continue;
        }
        let id = point_id(&class, &p.generators);
        for g in &class {
            if p.generators.contains_key(g) {
                table.insert(g.clone(), id.clone());
            }
        }
    }
    table
}

pub fn edge_end_space(p: &GraphPresentation) -> SpaceDescriptor {
    let q = omega_quotient(p);
    let classes: Vec<BTreeSet<String>> = components(&q.nodes, &q.omega_edges)
        .into_iter()
        .filter(|c| c.iter().any(|n| p.generators.contains_key(n)))
        .collect();
    descriptor_from_classes(p, &classes)
}

/// Generator → point id under end equivalence: only ladders merge (a fan
/// apex is a one-vertex separator between the rays it fans onto).
pub fn end_classes(p: &GraphPresentation) -> BTreeMap<String, String> {
    let nodes: BTreeSet<String> = p.generators.keys().cloned().collect();
    let mut table = BTreeMap::new();
    for class in components(&nodes, &p.ladders) {
        let id = point_id(&class, &p.generators);
        for g in &class {
            table.insert(g.clone(), id.clone());
        }
    }
    table
}

pub fn end_space(p: &GraphPresentation) -> SpaceDescriptor {
    let nodes: BTreeSet<String> = p.generators.keys().cloned().collect();
    let classes = components(&nodes, &p.ladders);
    descriptor_from_classes(p, &classes)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EndspaceError {
    #[error("unknown endpoint id {0:?}")]
    UnknownEndpoint(String),
}

/// The symbolic token for "every vertex of clique generator `k`".
pub fn all_vertices_of(k: &str) -> String {
    format!("all-vertices-of({k})")
}

/// Vertices dominating an end (`Vertex` mode, endpoint of [`end_space`]) or
/// edge-dominating an edge-end (`Edge` mode, endpoint of [`edge_end_space`]).
pub fn dominators(
    p: &GraphPresentation,
    endpoint: &str,
    mode: Mode,
) -> Result<BTreeSet<String>, EndspaceError> {
    let mut out = BTreeSet::new();
    match mode {
        Mode::Vertex => {
            let table = end_classes(p);
            let class: BTreeSet<&String> = table
                .iter()
                .filter(|(_, pt)| pt.as_str() == endpoint)
                .map(|(g, _)| g)
                .collect();
            if class.is_empty() {
                return Err(EndspaceError::UnknownEndpoint(endpoint.to_string()));
            }
            for fan in &p.fans {
                if fan.support == Support::Omega && class.contains(&fan.generator) {
                    out.insert(fan.vertex.clone());
                }
            }
            for g in &class {
                if p.generators.get(*g) == Some(&GenKind::Clique) {
                    out.insert(all_vertices_of(g));
                }
            }
        }
        Mode::Edge => {
            let q = omega_quotient(p);
            let component = components(&q.nodes, &q.omega_edges)
                .into_iter()
                .find(|c| {
                    c.iter().any(|n| p.generators.contains_key(n))
                        && point_id(c, &p.generators) == endpoint
                })
                .ok_or_else(|| EndspaceError::UnknownEndpoint(endpoint.to_string()))?;
            for n in &component {
                if p.core.contains(n) {
                    out.insert(n.clone());
                } else if p.generators.get(n) == Some(&GenKind::Clique) {
                    out.insert(all_vertices_of(n));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Cut {
    Vertices(BTreeSet<String>),
    Edges(BTreeSet<(String, String)>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Separation {
    /// `cut` together with the free initial patch disconnects the two tails.
    Separates { cut: Cut, patch: BTreeSet<String> },
    CannotSeparate,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("separator search exceeded the configured budget")]
    BoundTooLarge,
    #[error("{0:?} is not a ray generator or comb pendant of the presentation")]
    UnknownRay(String),
    #[error("truncation failed: {0}")]
    Truncate(#[from] crate::presentation::TruncateError),
}

/// Resolves a ray name to (anchor vertex at depth `n`, tail membership test).
/// Accepted names: a ray generator id `g`, or a comb pendant `family.j`.
fn resolve_ray(
    p: &GraphPresentation,
    name: &str,
    n: u32,
) -> Result<String, OracleError> {
    if p.generators.get(name) == Some(&GenKind::Ray) {
        return Ok(gen_vertex(name, n - 1));
    }
    if let Some((family, j)) = name.rsplit_once('.') {
        if let Ok(j) = j.parse::<u32>() {
            if j < n && p.combs.iter().any(|(_, f)| f == family) {
                return Ok(pendant_vertex(family, j, n - 1));
            }
        }
    }
    Err(OracleError::UnknownRay(name.to_string()))
}

/// All truncation vertices of generator/pendant index below `depth`: deleting
/// them is free because tail equivalence ignores initial segments.
fn initial_patch(p: &GraphPresentation, depth: u32, n: u32) -> BTreeSet<String> {
    let mut patch = BTreeSet::new();
    for g in p.generators.keys() {
        for i in 0..depth.min(n) {
            patch.insert(gen_vertex(g, i));
        }
    }
    for (_, family) in &p.combs {
        for j in 0..n {
            for i in 0..depth.min(n) {
                patch.insert(pendant_vertex(family, j, i));
            }
        }
    }
    patch
}

fn adjacency(g: &FiniteGraph, removed: &BTreeSet<String>) -> BTreeMap<String, BTreeSet<String>> {
    let mut adj: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for v in &g.vertices {
        if !removed.contains(v) {
            adj.insert(v.clone(), BTreeSet::new());
        }
    }
    for (a, b) in &g.edges {
        if !removed.contains(a) && !removed.contains(b) {
            adj.get_mut(a).unwrap().insert(b.clone());
            adj.get_mut(b).unwrap().insert(a.clone());
        }
    }
    adj
}

/// Shortest path from `a` to `b` avoiding cut vertices/edges; `None` when
/// already disconnected.
fn find_path(
    adj: &BTreeMap<String, BTreeSet<String>>,
    a: &str,
    b: &str,
    cut_vertices: &BTreeSet<String>,
    cut_edges: &BTreeSet<(String, String)>,
) -> Option<Vec<String>> {
    if cut_vertices.contains(a) || cut_vertices.contains(b) {
        return None;
    }
    let mut prev: BTreeMap<&str, &str> = BTreeMap::new();
    let mut queue: VecDeque<&str> = VecDeque::from([a]);
    let mut seen: BTreeSet<&str> = BTreeSet::from([a]);
    while let Some(v) = queue.pop_front() {
        if v == b {
            let mut path = vec![b.to_string()];
            let mut cur = b;
            while cur != a {
                cur = prev[cur];
                path.push(cur.to_string());
            }
            path.reverse();
            return Some(path);
        }
        for w in adj.get(v).into_iter().flatten() {
            if cut_vertices.contains(w) {
                continue;
            }
            if cut_edges.contains(&sorted_pair(v, w)) {
                continue;
            }
            if seen.insert(w) {
                prev.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    None
}

/// Generator/pendant index of a truncation vertex name, if any.
fn vertex_index(name: &str) -> Option<u32> {
    let open = name.rfind('[')?;
    name[open + 1..name.len() - 1].parse().ok()
}

struct Search<'a> {
    adj: &'a BTreeMap<String, BTreeSet<String>>,
    a: &'a str,
    b: &'a str,
    k: usize,
    /// Vertices of index at or above this are truncation boundary artifacts:
    /// neither they nor their incident edges may be cut (in the infinite
    /// graph every such vertex has further neighbors above the truncation).
    protected_from: u32,
    budget: usize,
}

impl Search<'_> {
    fn protected(&self, v: &str) -> bool {
        vertex_index(v).is_some_and(|i| i >= self.protected_from)
    }
}

impl Search<'_> {
    fn vertices(
        &mut self,
        cut: &mut BTreeSet<String>,
    ) -> Result<Option<BTreeSet<String>>, OracleError> {
        if self.budget == 0 {
            return Err(OracleError::BoundTooLarge);
        }
        self.budget -= 1;
        let Some(path) = find_path(self.adj, self.a, self.b, cut, &BTreeSet::new()) else {
            return Ok(Some(cut.clone()));
        };
        if cut.len() == self.k {
            return Ok(None);
        }
        for v in &path {
            if v == self.a || v == self.b || self.protected(v) {
                continue;
            }
            cut.insert(v.clone());
            let found = self.vertices(cut)?;
            cut.remove(v);
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    fn edges(
        &mut self,
        cut: &mut BTreeSet<(String, String)>,
    ) -> Result<Option<BTreeSet<(String, String)>>, OracleError> {
        if self.budget == 0 {
            return Err(OracleError::BoundTooLarge);
        }
        self.budget -= 1;
        let Some(path) = find_path(self.adj, self.a, self.b, &BTreeSet::new(), cut) else {
            return Ok(Some(cut.clone()));
        };
        if cut.len() == self.k {
            return Ok(None);
        }
        for pair in path.windows(2) {
            if self.protected(&pair[0]) || self.protected(&pair[1]) {
                continue;
            }
            let e = sorted_pair(&pair[0], &pair[1]);
            cut.insert(e.clone());
            let found = self.edges(cut)?;
            cut.remove(&e);
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

pub const DEFAULT_ORACLE_BUDGET: usize = 500_000;

/// Exhaustively decides whether ≤ `k` vertices (or edges) disconnect the
/// depth-`n` tails of rays `a` and `b` in `truncate(p, n)`.  Vertices of
/// generator index below `k+1` are deleted up front for free — tails ignore
/// initial segments — so a reported cut is `cut ∪ patch`.
pub fn separator_oracle(
    p: &GraphPresentation,
    a: &str,
    b: &str,
    mode: Mode,
    k: usize,
    n: u32,
    budget: usize,
) -> Result<Separation, OracleError> {
    assert!(n as usize >= 3 * k, "depth must be at least 3k");
    assert!(n >= k as u32 + 2, "depth must leave a nonempty tail");
    // a named pendant must exist in the truncation
    let mut n = n;
    for name in [a, b] {
        if let Some((_, j)) = name.rsplit_once('.') {
            if let Ok(j) = j.parse::<u32>() {
                n = n.max(j + k as u32 + 2);
            }
        }
    }
    let anchor_a = resolve_ray(p, a, n)?;
    let anchor_b = resolve_ray(p, b, n)?;
    let g = truncate(p, n)?;
    let patch = initial_patch(p, k as u32 + 1, n);
    let adj = adjacency(&g, &patch);
    if !adj.contains_key(&anchor_a) || !adj.contains_key(&anchor_b) {
        // a tail vanished entirely into the patch; nothing to separate
        return Ok(Separation::Separates {
            cut: match mode {
                Mode::Vertex => Cut::Vertices(BTreeSet::new()),
                Mode::Edge => Cut::Edges(BTreeSet::new()),
            },
            patch,
        });
    }
    let mut search = Search {
        adj: &adj,
        a: &anchor_a,
        b: &anchor_b,
        k,
        protected_from: n - (k as u32 + 1),
        budget,
    };
    let sep = match mode {
        Mode::Vertex => search
            .vertices(&mut BTreeSet::new())?
            .map(Cut::Vertices),
        Mode::Edge => search.edges(&mut BTreeSet::new())?.map(Cut::Edges),
    };
    Ok(match sep {
        Some(cut) => Separation::Separates { cut, patch },
        None => Separation::CannotSeparate,
    })
}

/// The oracle verdict aggregated over all `k ≤ max_k` at depth `3k+3`:
/// `true` means no bounded separator was found at any size, i.e. the rays
/// look equivalent to the oracle.
pub fn oracle_equivalent(
    p: &GraphPresentation,
    a: &str,
    b: &str,
    mode: Mode,
    max_k: usize,
    budget: usize,
) -> Result<bool, OracleError> {
    // Depth 3k+3, raised when a declared finite index would not even exist
    // in the truncation.
    let mut min_depth = 1;
    for (u, v) in &p.finite_edges {
        for tok in [u, v] {
            if let crate::presentation::VTok::Gen(_, i) = tok {
                min_depth = min_depth.max(i + 1);
            }
        }
    }
    for fan in &p.fans {
        if let Support::Finite(ixs) = &fan.support {
            min_depth = min_depth.max(ixs.iter().max().map_or(1, |i| i + 1));
        }
    }
    for k in 0..=max_k {
        let n = ((3 * k + 3) as u32).max(min_depth);
        match separator_oracle(p, a, b, mode, k, n, budget)? {
            Separation::Separates { .. } => return Ok(false),
            Separation::CannotSeparate => {}
        }
    }
    Ok(true)
}
