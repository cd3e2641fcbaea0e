//! The two constructions relating end spaces and edge-end spaces.
//!
//! Clique expansion replaces every infinite-degree core vertex by an infinite
//! clique, spreading its edges over distinct clique vertices; the end space
//! of the result is the edge-end space of the input.  Dominator duplication
//! goes the other way on the restricted class where every vertex
//! edge-dominates at most one end: each dominating vertex is split in two, so
//! that the copy carrying the infinite attachments meets only its own end's
//! envelope, making the edge-end space of the result the end space of the
//! input.

use crate::descriptor::{homeomorphic, SpaceDescriptor};
use crate::endspace::{
    all_vertices_of, dominators, edge_end_classes, edge_end_space, end_classes, end_space,
    omega_quotient, Mode,
};
use crate::presentation::{Fan, GenKind, GraphPresentation, Support, VTok};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// The envelope of an end: its dominating vertices plus all vertices of a
/// maximal disjoint ray family in the end's class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Envelope {
    pub end: String,
    pub dominators: BTreeSet<String>,
    /// All generators of the end's class (pairwise disjoint by construction).
    pub ray_family: BTreeSet<String>,
    /// Symbolic union: dominator names plus `V(g)` per family generator.
    pub vertex_set: BTreeSet<String>,
}

impl Envelope {
    /// Membership of a vertex token in the symbolic vertex set.
    pub fn contains(&self, tok: &VTok) -> bool {
        match tok {
            VTok::Core(v) => self.dominators.contains(v),
            VTok::Gen(g, _) => {
                self.ray_family.contains(g) || self.dominators.contains(&all_vertices_of(g))
            }
        }
    }

    /// Membership of a whole generator (all of its vertices at once).
    pub fn contains_generator(&self, g: &str) -> bool {
        self.ray_family.contains(g) || self.dominators.contains(&all_vertices_of(g))
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("unknown end id {0:?}")]
    UnknownEnd(String),
    #[error("vertex {vertex:?} edge-dominates both {end1} and {end2}")]
    PreconditionViolated {
        vertex: String,
        end1: String,
        end2: String,
    },
}

pub fn compute_envelope(p: &GraphPresentation, end: &str) -> Result<Envelope, TransformError> {
    let table = end_classes(p);
    let ray_family: BTreeSet<String> = table
        .iter()
        .filter(|(_, pt)| pt.as_str() == end)
        .map(|(g, _)| g.clone())
        .collect();
    if ray_family.is_empty() {
        return Err(TransformError::UnknownEnd(end.to_string()));
    }
    let dominators = dominators(p, end, Mode::Vertex)
        .map_err(|_| TransformError::UnknownEnd(end.to_string()))?;
    let mut vertex_set = dominators.clone();
    for g in &ray_family {
        vertex_set.insert(format!("V({g})"));
    }
    Ok(Envelope {
        end: end.to_string(),
        dominators,
        ray_family,
        vertex_set,
    })
}

/// Clique expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpansionMap {
    pub source: GraphPresentation,
    pub target: GraphPresentation,
    /// Each replaced infinite-degree core vertex and its clique generator.
    pub replaced: BTreeMap<String, String>,
}

/// Replaces every core vertex carrying an ω-fan by a clique generator; its
/// ω-fans become ladders and each of its finitely many remaining attachments
/// lands on a distinct fresh clique vertex.
pub fn expand_cliques(p: &GraphPresentation) -> (GraphPresentation, ExpansionMap) {
    let dominating: BTreeSet<String> = p
        .fans
        .iter()
        .filter(|f| f.support == Support::Omega)
        .map(|f| f.vertex.clone())
        .collect();
    let replaced: BTreeMap<String, String> = dominating
        .iter()
        .map(|v| (v.clone(), format!("{v}.k")))
        .collect();
    let mut out = GraphPresentation::default();
    out.core = p.core.difference(&dominating).cloned().collect();
    out.generators = p.generators.clone();
    for k in replaced.values() {
        out.generators.insert(k.clone(), GenKind::Clique);
    }
    out.ladders = p.ladders.clone();
    out.combs = p.combs.clone();
    // fresh clique indices, consumed in canonical attachment order
    let mut next: BTreeMap<&str, u32> = dominating.iter().map(|v| (v.as_str(), 0)).collect();
    let fresh = |v: &str, next: &mut BTreeMap<&str, u32>| -> VTok {
        let i = next.get_mut(v).unwrap();
        let tok = VTok::Gen(replaced[v].clone(), *i);
        *i += 1;
        tok
    };
    for (u, w) in &p.finite_edges {
        let map_tok = |tok: &VTok, next: &mut BTreeMap<&str, u32>| match tok {
            VTok::Core(v) if dominating.contains(v) => fresh(v, next),
            other => other.clone(),
        };
        let u2 = map_tok(u, &mut next);
        let w2 = map_tok(w, &mut next);
        out.finite_edges.insert(GraphPresentation::edge(u2, w2));
    }
    for fan in &p.fans {
        if !dominating.contains(&fan.vertex) {
            out.fans.insert(fan.clone());
            continue;
        }
        match &fan.support {
            Support::Omega => {
                out.ladders
                    .insert(GraphPresentation::ladder(&replaced[&fan.vertex], &fan.generator));
            }
            Support::Finite(ixs) => {
                for i in ixs {
                    let kv = fresh(&fan.vertex, &mut next);
                    out.finite_edges.insert(GraphPresentation::edge(
                        kv,
                        VTok::Gen(fan.generator.clone(), *i),
                    ));
                }
            }
        }
    }
    let map = ExpansionMap {
        source: p.clone(),
        target: out.clone(),
        replaced,
    };
    (out, map)
}

/// Dominator duplication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicationMap {
    pub source: GraphPresentation,
    pub target: GraphPresentation,
    /// Each split vertex, its copy, and the end whose envelope it keeps.
    pub split: BTreeMap<String, (String, String)>,
    /// Corpus cases where vertex- and edge-domination disagree are reported
    /// rather than silently resolved.
    pub flags: Vec<String>,
}

/// End-space points whose class is infinitely edge-connected to core vertex
/// `v` (empty when `v` carries no ω-fan).
pub fn dominated_ends(p: &GraphPresentation, v: &str) -> BTreeSet<String> {
    let q = omega_quotient(p);
    if !q.nodes.contains(v) {
        return BTreeSet::new();
    }
    // component of v in the ω-quotient
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in &q.omega_edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen: BTreeSet<&str> = BTreeSet::from([v]);
    let mut queue = VecDeque::from([v]);
    let mut ends = BTreeSet::new();
    let table = end_classes(p);
    while let Some(x) = queue.pop_front() {
        if let Some(pt) = table.get(x) {
            ends.insert(pt.clone());
        }
        for w in adj.get(x).into_iter().flatten() {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    ends
}

/// Splits every dominating core vertex `v` into `v` (keeping exactly the
/// attachments into its end's envelope) and a fresh `v.prime` carrying the
/// rest, joined by an edge.
pub fn duplicate_dominators(
    p: &GraphPresentation,
) -> Result<(GraphPresentation, DuplicationMap), TransformError> {
    let mut envelopes: BTreeMap<String, Envelope> = BTreeMap::new();
    let mut flags = Vec::new();
    for v in &p.core {
        let ends = dominated_ends(p, v);
        if ends.len() > 1 {
            let mut it = ends.iter();
            return Err(TransformError::PreconditionViolated {
                vertex: v.clone(),
                end1: it.next().unwrap().clone(),
                end2: it.next().unwrap().clone(),
            });
        }
        if let Some(end) = ends.into_iter().next() {
            let env = compute_envelope(p, &end)?;
            // vertex- vs edge-level domination may disagree in principle;
            // surface such cases instead of picking a reading
            let edge_pt = edge_end_classes(p)
                .get(env.ray_family.iter().next().unwrap())
                .cloned();
            if let Some(edge_pt) = edge_pt {
                let edge_doms = dominators(p, &edge_pt, Mode::Edge).unwrap_or_default();
                let vertex_doms = dominators(p, &end, Mode::Vertex).unwrap_or_default();
                if !vertex_doms.is_subset(&edge_doms) {
                    flags.push(format!(
                        "vertex/edge dominator sets differ for {end}: {vertex_doms:?} vs {edge_doms:?}"
                    ));
                }
            }
            envelopes.insert(v.clone(), env);
        }
    }
    let mut out = p.clone();
    let mut split = BTreeMap::new();
    for (v, env) in &envelopes {
        let prime = format!("{v}.prime");
        out.core.insert(prime.clone());
        split.insert(v.clone(), (prime.clone(), env.end.clone()));
    }
    // an endpoint of a finite edge moves to its copy unless the other
    // endpoint lies in its envelope
    let moved = |tok: &VTok, other: &VTok| -> VTok {
        if let VTok::Core(v) = tok {
            if let Some(env) = envelopes.get(v) {
                if !env.contains(other) {
                    return VTok::Core(format!("{v}.prime"));
                }
            }
        }
        tok.clone()
    };
    out.finite_edges = p
        .finite_edges
        .iter()
        .map(|(u, w)| GraphPresentation::edge(moved(u, w), moved(w, u)))
        .collect();
    out.fans = p
        .fans
        .iter()
        .map(|fan| {
            let vertex = match envelopes.get(&fan.vertex) {
                Some(env) if !env.contains_generator(&fan.generator) => {
                    format!("{}.prime", fan.vertex)
                }
                _ => fan.vertex.clone(),
            };
            Fan {
                vertex,
                generator: fan.generator.clone(),
                support: fan.support.clone(),
            }
        })
        .collect();
    for (v, (prime, _)) in &split {
        out.finite_edges.insert(GraphPresentation::edge(
            VTok::Core(v.clone()),
            VTok::Core(prime.clone()),
        ));
    }
    let map = DuplicationMap {
        source: p.clone(),
        target: out.clone(),
        split,
        flags,
    };
    Ok((out, map))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Rho,
    Tau,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub direction: Direction,
    pub pass: bool,
    pub left: SpaceDescriptor,
    pub right: SpaceDescriptor,
    pub flags: Vec<String>,
}

/// Runs one transformation and checks the promised homeomorphism; for the
/// expansion direction additionally checks that no image vertex
/// edge-dominates two distinct ends.
pub fn verify_correspondence(
    p: &GraphPresentation,
    direction: Direction,
) -> Result<Report, TransformError> {
    match direction {
        Direction::Rho => {
            let (p2, _) = expand_cliques(p);
            let left = end_space(&p2);
            let right = edge_end_space(p);
            let mut pass = homeomorphic(&left, &right);
            let mut flags = Vec::new();
            for v in &p2.core {
                let ends = dominated_ends(&p2, v);
                if ends.len() > 1 {
                    pass = false;
                    flags.push(format!("image vertex {v} edge-dominates {ends:?}"));
                }
            }
            Ok(Report {
                direction,
                pass,
                left,
                right,
                flags,
            })
        }
        Direction::Tau => {
            let (p2, map) = duplicate_dominators(p)?;
            let left = edge_end_space(&p2);
            let right = end_space(p);
            Ok(Report {
                direction,
                pass: homeomorphic(&left, &right),
                left,
                right,
                flags: map.flags,
            })
        }
    }
}
