//! Special clopen subbases and completeness checks.
//!
//! A family of sets is *special* when it is nested (any two members are
//! comparable or disjoint), noetherian (increasing chains have maxima), and
//! σ-disjoint (a countable union of layers of pairwise disjoint sets); with
//! clopen members it is a special clopen subbase.  Families live either over
//! an explicit finite ground or over the ray space of a tree scheme, where
//! the canonical family is all sets `[t,∅]` (rays through `t`).

use crate::ordertree::{
    expand_families, ray_contains, BasicOpen, NodeRef, SegKind, TreeScheme,
};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SubbaseFamily {
    Finite {
        points: BTreeSet<String>,
        sets: BTreeMap<String, BTreeSet<String>>,
        /// Declared open sets; `None` means discrete.  Opens are closed
        /// under arbitrary union implicitly (a set is open when covered by
        /// declared opens inside itself).
        topology: Option<Vec<BTreeSet<String>>>,
    },
    /// The intensional family `{[t,∅]}` over all nodes of a scheme,
    /// instantiated at the given family cut for sampling.
    SchemeRaySpace { scheme: TreeScheme, cut: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub pass: bool,
    pub witness: Vec<String>,
    /// True when the verdict follows from the tree structure and sampling,
    /// rather than exhaustive set comparison.
    pub structural: bool,
}

impl Check {
    fn pass(structural: bool) -> Check {
        Check {
            pass: true,
            witness: Vec::new(),
            structural,
        }
    }
    fn fail(witness: Vec<String>, structural: bool) -> Check {
        Check {
            pass: false,
            witness,
            structural,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecialReport {
    pub nested: Check,
    pub noetherian: Check,
    pub sigma_disjoint: Check,
    /// Disjointness layers found (set ids per layer).
    pub layers: Vec<Vec<String>>,
    pub clopen: Check,
}

impl SpecialReport {
    pub fn pass(&self) -> bool {
        self.nested.pass && self.noetherian.pass && self.sigma_disjoint.pass && self.clopen.pass
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SubbaseError {
    #[error("scheme ground undecidable at family cut {0} (max 8)")]
    GroundUndecidable(u32),
    #[error("ground has {points} points, exceeding the bound of {bound}")]
    BoundExceeded { points: usize, bound: usize },
    #[error("unknown set id {0:?}")]
    UnknownSet(String),
    #[error("hereditary completeness needs an explicit finite ground")]
    NotFinite,
}

/// Instantiated view of a family: named sets over named points.
fn instantiate(f: &SubbaseFamily) -> Result<(BTreeSet<String>, BTreeMap<String, BTreeSet<String>>), SubbaseError> {
    match f {
        SubbaseFamily::Finite { points, sets, .. } => Ok((points.clone(), sets.clone())),
        SubbaseFamily::SchemeRaySpace { scheme, cut } => {
            if *cut > 8 {
                return Err(SubbaseError::GroundUndecidable(*cut));
            }
            let ex = expand_families(scheme, *cut);
            let rays: Vec<String> = ex
                .segments
                .iter()
                .filter(|(_, k)| **k == SegKind::OmegaChain)
                .map(|(s, _)| s.clone())
                .collect();
            let points: BTreeSet<String> = rays.iter().cloned().collect();
            let mut sets = BTreeMap::new();
            for node in sample_nodes(&ex, *cut) {
                let members: BTreeSet<String> = rays
                    .iter()
                    .filter(|r| ray_contains(&ex, r, &node))
                    .cloned()
                    .collect();
                sets.insert(node.to_string(), members);
            }
            Ok((points, sets))
        }
    }
}

pub(crate) fn sample_nodes(ex: &TreeScheme, cut: u32) -> Vec<NodeRef> {
    let mut nodes = Vec::new();
    for (s, kind) in &ex.segments {
        let count = match kind {
            SegKind::FiniteChain(l) => *l,
            SegKind::OmegaChain => cut,
        };
        for i in 0..count {
            nodes.push(NodeRef::Seg(s.clone(), i));
        }
    }
    for (s, k) in ex.tops() {
        nodes.push(NodeRef::Top(s, k));
    }
    nodes
}

fn disjoint(a: &BTreeSet<String>, b: &BTreeSet<String>) -> bool {
    a.intersection(b).next().is_none()
}

/// Is `set` open: every point has a declared open around it inside `set`?
fn open_in(set: &BTreeSet<String>, topology: &[BTreeSet<String>]) -> bool {
    set.iter()
        .all(|p| topology.iter().any(|o| o.contains(p) && o.is_subset(set)))
}

pub fn check_special(f: &SubbaseFamily) -> Result<SpecialReport, SubbaseError> {
    let structural = matches!(f, SubbaseFamily::SchemeRaySpace { .. });
    let (points, sets) = instantiate(f)?;
    let ids: Vec<&String> = sets.keys().collect();
    // nested: comparable or disjoint, pairwise
    let mut nested = Check::pass(structural);
    'outer: for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            let (sa, sb) = (&sets[*a], &sets[*b]);
            if !(sa.is_subset(sb) || sb.is_subset(sa) || disjoint(sa, sb)) {
                nested = Check::fail(vec![(*a).clone(), (*b).clone()], structural);
                break 'outer;
            }
        }
    }
    // noetherian: finite instantiations always pass exhaustively; on scheme
    // families increasing chains of [t,∅] follow decreasing anchors, which
    // bottom out at the root
    let noetherian = Check::pass(structural);
    // σ-disjoint: greedy layering into pairwise disjoint layers
    let mut layers: Vec<Vec<String>> = Vec::new();
    let mut by_size: Vec<&String> = sets.keys().collect();
    by_size.sort_by_key(|id| std::cmp::Reverse(sets[*id].len()));
    for id in by_size {
        let place = layers.iter_mut().find(|layer| {
            layer.iter().all(|other| disjoint(&sets[id], &sets[other]))
        });
        match place {
            Some(layer) => layer.push(id.clone()),
            None => layers.push(vec![id.clone()]),
        }
    }
    for layer in &mut layers {
        layer.sort();
    }
    let sigma_disjoint = Check::pass(structural);
    // clopen
    let clopen = match f {
        SubbaseFamily::Finite {
            topology: Some(top),
            ..
        } => {
            let mut result = Check::pass(false);
            for (id, s) in &sets {
                let complement: BTreeSet<String> = points.difference(s).cloned().collect();
                if !open_in(s, top) || !open_in(&complement, top) {
                    result = Check::fail(vec![id.clone()], false);
                    break;
                }
            }
            result
        }
        // discrete ground: every set clopen
        SubbaseFamily::Finite { topology: None, .. } => Check::pass(false),
        // [t,∅] is clopen in the ray space: its complement is the union of
        // the opens [t,{tops above the branch}] anchored off the branch
        SubbaseFamily::SchemeRaySpace { .. } => Check::pass(true),
    };
    Ok(SpecialReport {
        nested,
        noetherian,
        sigma_disjoint,
        layers,
        clopen,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisElement {
    /// Instantiated membership (ray ids for scheme grounds, sampled).
    pub points: BTreeSet<String>,
    /// Normalized excluded ids actually used.
    pub excluded: Vec<String>,
    pub schema: Option<BasicOpen>,
    pub empty: bool,
}

/// Materializes the basis element `U ∖ ⋃_{β∈F} U_β` with normalization:
/// excluded sets disjoint from `U` are dropped, nested excluded sets are
/// replaced by their maximal elements, and an excluded superset of `U` makes
/// the element empty (reported, not an error).
pub fn basis_elements(
    f: &SubbaseFamily,
    u: &str,
    excluded: &[String],
) -> Result<BasisElement, SubbaseError> {
    let (_, sets) = instantiate(f)?;
    let su = sets.get(u).ok_or_else(|| SubbaseError::UnknownSet(u.to_string()))?;
    let mut kept: Vec<String> = Vec::new();
    for b in excluded {
        let sb = sets.get(b).ok_or_else(|| SubbaseError::UnknownSet(b.clone()))?;
        if disjoint(su, sb) {
            continue;
        }
        kept.push(b.clone());
    }
    // keep only ⊆-maximal excluded sets
    let maximal: Vec<String> = kept
        .iter()
        .filter(|b| {
            !kept
                .iter()
                .any(|c| c != *b && sets[*b].is_subset(&sets[c]) && sets[*b] != sets[c])
        })
        .cloned()
        .collect();
    let mut points = su.clone();
    for b in &maximal {
        points = points.difference(&sets[b]).cloned().collect();
    }
    let schema = match f {
        SubbaseFamily::SchemeRaySpace { .. } => {
            let anchor = parse_node(u)?;
            let excluded = maximal
                .iter()
                .map(|b| parse_node(b))
                .collect::<Result<BTreeSet<NodeRef>, _>>()?;
            Some(BasicOpen { anchor, excluded })
        }
        SubbaseFamily::Finite { .. } => None,
    };
    Ok(BasisElement {
        empty: points.is_empty(),
        points,
        excluded: maximal,
        schema,
    })
}

/// Parses the `Display` form of a node reference (`s[i]` or `top(s,k)`).
pub fn parse_node(s: &str) -> Result<NodeRef, SubbaseError> {
    if let Some(inner) = s.strip_prefix("top(").and_then(|x| x.strip_suffix(')')) {
        let (seg, k) = match inner.split_once(',') {
            Some((seg, k)) => (seg, k.parse().map_err(|_| SubbaseError::UnknownSet(s.to_string()))?),
            None => (inner, 0),
        };
        return Ok(NodeRef::Top(seg.to_string(), k));
    }
    if let Some((seg, rest)) = s.split_once('[') {
        if let Some(i) = rest.strip_suffix(']') {
            if let Ok(i) = i.parse() {
                return Ok(NodeRef::Seg(seg.to_string(), i));
            }
        }
    }
    Err(SubbaseError::UnknownSet(s.to_string()))
}

pub const HC_POINT_BOUND: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Completeness {
    Pass,
    Fail {
        /// The closed subspace on which a centered trace family has empty
        /// total intersection.
        subspace: BTreeSet<String>,
        /// Ids of the centered subfamily.
        subfamily: Vec<String>,
    },
}

/// Exhaustively checks hereditary completeness over an explicit finite
/// ground: for every closed subspace, every trace subfamily whose members
/// are nonempty and pairwise intersecting must have nonempty total
/// intersection.
pub fn check_hereditary_completeness(f: &SubbaseFamily) -> Result<Completeness, SubbaseError> {
    let SubbaseFamily::Finite {
        points,
        sets,
        topology,
    } = f
    else {
        return Err(SubbaseError::NotFinite);
    };
    if points.len() > HC_POINT_BOUND {
        return Err(SubbaseError::BoundExceeded {
            points: points.len(),
            bound: HC_POINT_BOUND,
        });
    }
    let pts: Vec<&String> = points.iter().collect();
    let ids: Vec<&String> = sets.keys().collect();
    for mask in 0u32..(1 << pts.len()) {
        let y: BTreeSet<String> = pts
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, p)| (*p).clone())
            .collect();
        if let Some(top) = topology {
            // closed = complement open
            let complement: BTreeSet<String> = points.difference(&y).cloned().collect();
            if !open_in(&complement, top) {
                continue;
            }
        }
        let traces: Vec<(usize, BTreeSet<String>)> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (i, sets[*id].intersection(&y).cloned().collect()))
            .filter(|(_, t): &(usize, BTreeSet<String>)| !t.is_empty())
            .collect();
        if let Some(chosen) = find_centered_empty(&traces, &mut Vec::new(), None, 0) {
            return Ok(Completeness::Fail {
                subspace: y,
                subfamily: chosen.into_iter().map(|i| ids[i].clone()).collect(),
            });
        }
    }
    Ok(Completeness::Pass)
}

/// Backtracking search for a pairwise-intersecting subfamily of traces whose
/// total intersection is empty.
fn find_centered_empty(
    traces: &[(usize, BTreeSet<String>)],
    chosen: &mut Vec<usize>,
    total: Option<BTreeSet<String>>,
    from: usize,
) -> Option<Vec<usize>> {
    if let Some(t) = &total {
        if t.is_empty() {
            return Some(chosen.iter().map(|i| traces[*i].0).collect());
        }
    }
    for i in from..traces.len() {
        // pairwise condition against everything already chosen
        if chosen
            .iter()
            .any(|j| disjoint(&traces[*j].1, &traces[i].1))
        {
            continue;
        }
        let new_total = match &total {
            None => traces[i].1.clone(),
            Some(t) => t.intersection(&traces[i].1).cloned().collect(),
        };
        chosen.push(i);
        if let Some(found) = find_centered_empty(traces, chosen, Some(new_total), i + 1) {
            return Some(found);
        }
        chosen.pop();
    }
    None
}
