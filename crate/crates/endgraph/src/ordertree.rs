//! Finite schemes for order trees of height below ω·ω.
//!
//! A scheme assembles a tree from chain segments: `FiniteChain(n)` contributes
//! `n` consecutive nodes, `OmegaChain` an ω-sequence.  A segment attaches
//! either at a concrete node of its parent segment or at a *top* of an
//! ω-segment — an implicit limit node sitting above the entire segment.
//! Several incomparable tops over the same segment are distinguished by
//! index.  A *family* attaches one isomorphic copy of a fragment scheme at
//! every index of an ω-segment; families stay intensional, and operations
//! that need concrete copies take a cut (first `n` copies).
//!
//! High-rays (down-closed chains of cofinality ω) are the points of the ray
//! space; the module computes them, their tops, level decompositions, the
//! top-splitting surgery, the subtree of high-ray nodes, the uniform T-graph
//! presentation, and normal spanning trees of finite graphs.

use crate::descriptor::SpaceDescriptor;
use crate::presentation::{Fan, FiniteGraph, GenKind, GraphPresentation, Support, VTok};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SegKind {
    FiniteChain(u32),
    OmegaChain,
}

/// Where a segment's first node hangs: as successor of a concrete node, or
/// as successor of the `k`-th top above an ω-segment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Attach {
    At(String, u32),
    Top(String, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Family {
    pub base: String,
    pub fragment: TreeScheme,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeScheme {
    pub segments: BTreeMap<String, SegKind>,
    /// child segment → attachment; the root has none.
    pub attach: BTreeMap<String, Attach>,
    pub families: BTreeMap<String, Family>,
    pub root: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum NodeRef {
    Seg(String, u32),
    Top(String, u32),
}

impl std::fmt::Display for NodeRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NodeRef::Seg(s, i) => write!(f, "{s}[{i}]"),
            NodeRef::Top(s, k) => write!(f, "top({s},{k})"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SchemeError {
    #[error("segment {0:?} is not declared")]
    UnknownSegment(String),
    #[error("root {0:?} must not have an attachment")]
    RootAttached(String),
    #[error("segment {0:?} has no attachment and is not the root")]
    Detached(String),
    #[error("attachment cycle through {0:?}")]
    Cycle(String),
    #[error("attachment index {index} out of range for finite segment {segment:?}")]
    IndexOutOfRange { segment: String, index: u32 },
    #[error("top({0:?}) requires an ω-segment")]
    TopOfFiniteChain(String),
    #[error("family {0:?} must be based on an ω-segment")]
    FamilyBaseNotOmega(String),
    #[error("invalid node reference {0}")]
    InvalidNode(String),
}

impl TreeScheme {
    /// A scheme with a single segment as root.
    pub fn single(id: &str, kind: SegKind) -> TreeScheme {
        TreeScheme {
            segments: [(id.to_string(), kind)].into(),
            attach: BTreeMap::new(),
            families: BTreeMap::new(),
            root: id.to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        if !self.segments.contains_key(&self.root) {
            return Err(SchemeError::UnknownSegment(self.root.clone()));
        }
        if self.attach.contains_key(&self.root) {
            return Err(SchemeError::RootAttached(self.root.clone()));
        }
        for (child, att) in &self.attach {
            if !self.segments.contains_key(child) {
                return Err(SchemeError::UnknownSegment(child.clone()));
            }
            let parent = match att {
                Attach::At(p, i) => {
                    match self.segments.get(p) {
                        None => return Err(SchemeError::UnknownSegment(p.clone())),
                        Some(SegKind::FiniteChain(len)) if i >= len => {
                            return Err(SchemeError::IndexOutOfRange {
                                segment: p.clone(),
                                index: *i,
                            })
                        }
                        _ => {}
                    }
                    p
                }
                Attach::Top(p, _) => {
                    match self.segments.get(p) {
                        None => return Err(SchemeError::UnknownSegment(p.clone())),
                        Some(SegKind::FiniteChain(_)) => {
                            return Err(SchemeError::TopOfFiniteChain(p.clone()))
                        }
                        Some(SegKind::OmegaChain) => {}
                    }
                    p
                }
            };
            let _ = parent;
        }
        for s in self.segments.keys() {
            if s != &self.root && !self.attach.contains_key(s) {
                return Err(SchemeError::Detached(s.clone()));
            }
            // walk to the root, detecting cycles
            let mut cur = s.clone();
            let mut steps = 0;
            while let Some(att) = self.attach.get(&cur) {
                cur = match att {
                    Attach::At(p, _) | Attach::Top(p, _) => p.clone(),
                };
                steps += 1;
                if steps > self.segments.len() {
                    return Err(SchemeError::Cycle(s.clone()));
                }
            }
            if cur != self.root {
                return Err(SchemeError::Detached(s.clone()));
            }
        }
        for (id, fam) in &self.families {
            match self.segments.get(&fam.base) {
                Some(SegKind::OmegaChain) => {}
                _ => return Err(SchemeError::FamilyBaseNotOmega(id.clone())),
            }
            fam.fragment.validate()?;
        }
        Ok(())
    }

    pub fn node_valid(&self, n: &NodeRef) -> bool {
        match n {
            NodeRef::Seg(s, i) => match self.segments.get(s) {
                Some(SegKind::FiniteChain(len)) => i < len,
                Some(SegKind::OmegaChain) => true,
                None => false,
            },
            NodeRef::Top(s, k) => self.tops().contains(&(s.clone(), *k)),
        }
    }

    /// All tops that exist as nodes, i.e. carry at least one attachment.
    pub fn tops(&self) -> BTreeSet<(String, u32)> {
        self.attach
            .values()
            .filter_map(|a| match a {
                Attach::Top(p, k) => Some((p.clone(), *k)),
                Attach::At(..) => None,
            })
            .collect()
    }

    /// The node the first node of `seg` succeeds, if `seg` is not the root.
    pub fn parent_node(&self, seg: &str) -> Option<NodeRef> {
        self.attach.get(seg).map(|a| match a {
            Attach::At(p, i) => NodeRef::Seg(p.clone(), *i),
            Attach::Top(p, k) => NodeRef::Top(p.clone(), *k),
        })
    }

    fn le(&self, a: &NodeRef, b: &NodeRef) -> bool {
        if a == b {
            return true;
        }
        match b {
            NodeRef::Seg(s, i) => {
                if let NodeRef::Seg(s2, j) = a {
                    if s2 == s {
                        return j <= i;
                    }
                }
                match self.parent_node(s) {
                    Some(p) => self.le(a, &p),
                    None => false,
                }
            }
            NodeRef::Top(s, _) => {
                match a {
                    // a top lies above every node of its segment
                    NodeRef::Seg(s2, _) if s2 == s => return true,
                    // distinct tops of the same segment are incomparable
                    NodeRef::Top(s2, _) if s2 == s => return false,
                    _ => {}
                }
                match self.parent_node(s) {
                    Some(p) => self.le(a, &p),
                    None => false,
                }
            }
        }
    }
}

/// Tree order: `a ≤ b` iff `a` lies on the root-to-`b` chain.  Family-scoped
/// nodes must be addressed in an expanded scheme.
pub fn order_le(t: &TreeScheme, a: &NodeRef, b: &NodeRef) -> Result<bool, SchemeError> {
    for n in [a, b] {
        if !t.node_valid(n) {
            return Err(SchemeError::InvalidNode(n.to_string()));
        }
    }
    Ok(t.le(a, b))
}

/// A high-ray schema: the down-closure of one ω-segment.  `family: Some(f)`
/// describes one ray per copy of family `f` (intensional).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HighRay {
    pub id: String,
    pub segment: String,
    pub family: Option<String>,
}

pub fn high_rays(t: &TreeScheme) -> Vec<HighRay> {
    let mut out = Vec::new();
    collect_rays(t, None, &mut out);
    out
}

fn collect_rays(t: &TreeScheme, prefix: Option<&str>, out: &mut Vec<HighRay>) {
    for (s, kind) in &t.segments {
        if *kind == SegKind::OmegaChain {
            out.push(HighRay {
                id: match prefix {
                    Some(p) => format!("{p}.{s}"),
                    None => s.clone(),
                },
                segment: s.clone(),
                family: prefix.map(|p| p.to_string()),
            });
        }
    }
    for (fid, fam) in &t.families {
        let nested = match prefix {
            Some(p) => format!("{p}.{fid}"),
            None => fid.clone(),
        };
        collect_rays(&fam.fragment, Some(&nested), out);
    }
}

/// The minimal nodes above every node of the high-ray: exactly the existing
/// tops of its ω-segment (in fragment coordinates for family rays).
pub fn tops_of(t: &TreeScheme, r: &HighRay) -> BTreeSet<NodeRef> {
    let scheme = match &r.family {
        None => t,
        Some(path) => {
            let mut cur = t;
            for fid in path.split('.') {
                match cur.families.get(fid) {
                    Some(f) => cur = &f.fragment,
                    None => return BTreeSet::new(),
                }
            }
            cur
        }
    };
    scheme
        .tops()
        .into_iter()
        .filter(|(s, _)| s == &r.segment)
        .map(|(s, k)| NodeRef::Top(s, k))
        .collect()
}

/// Replaces each family by its first `cut` concrete copies; copy segments are
/// named `family.i.inner` and the copy root hangs at base index `i`.
pub fn expand_families(t: &TreeScheme, cut: u32) -> TreeScheme {
    let mut out = TreeScheme {
        segments: t.segments.clone(),
        attach: t.attach.clone(),
        families: BTreeMap::new(),
        root: t.root.clone(),
    };
    for (fid, fam) in &t.families {
        let frag = expand_families(&fam.fragment, cut);
        for i in 0..cut {
            let rename = |s: &str| format!("{fid}.{i}.{s}");
            for (sid, kind) in &frag.segments {
                out.segments.insert(rename(sid), *kind);
            }
            for (child, att) in &frag.attach {
                let att = match att {
                    Attach::At(p, j) => Attach::At(rename(p), *j),
                    Attach::Top(p, k) => Attach::Top(rename(p), *k),
                };
                out.attach.insert(rename(child), att);
            }
            out.attach
                .insert(rename(&frag.root), Attach::At(fam.base.clone(), i));
        }
    }
    out
}

/// Ordinal `ω·a + b` as the pair `(a, b)`.
pub type Ordinal = (u32, u32);

/// Height of a node in a family-free scheme.
pub fn height(t: &TreeScheme, n: &NodeRef) -> Ordinal {
    match n {
        NodeRef::Seg(s, i) => {
            let (a, b) = seg_first_height(t, s);
            (a, b + i)
        }
        NodeRef::Top(s, _) => top_height(t, s),
    }
}

fn seg_first_height(t: &TreeScheme, s: &str) -> Ordinal {
    match t.attach.get(s) {
        None => (0, 0),
        Some(Attach::At(p, j)) => {
            let (a, b) = seg_first_height(t, p);
            (a, b + j + 1)
        }
        Some(Attach::Top(p, _)) => {
            let (a, b) = top_height(t, p);
            (a, b + 1)
        }
    }
}

fn top_height(t: &TreeScheme, s: &str) -> Ordinal {
    let (a, _) = seg_first_height(t, s);
    (a + 1, 0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AntichainDecomposition {
    /// Sampled levels: height → pairwise incomparable nodes at that height.
    pub levels: BTreeMap<Ordinal, BTreeSet<NodeRef>>,
    pub cut: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Specialness {
    Special(AntichainDecomposition),
    NotSpecial,
}

/// Decomposes the tree into level antichains.  Schemes have height below
/// ω·ω, so countably many levels always suffice; the returned decomposition
/// samples families at the given cut and ω-indices below the cut, and every
/// sampled level is verified to be an antichain.
pub fn specialness(t: &TreeScheme, cut: u32) -> Specialness {
    let ex = expand_families(t, cut);
    let mut levels: BTreeMap<Ordinal, BTreeSet<NodeRef>> = BTreeMap::new();
    let mut add = |n: NodeRef, h: Ordinal| {
        levels.entry(h).or_default().insert(n);
    };
    for (s, kind) in &ex.segments {
        let count = match kind {
            SegKind::FiniteChain(len) => *len,
            SegKind::OmegaChain => cut,
        };
        for i in 0..count {
            let n = NodeRef::Seg(s.clone(), i);
            let h = height(&ex, &n);
            add(n, h);
        }
    }
    for (s, k) in ex.tops() {
        let n = NodeRef::Top(s, k);
        let h = height(&ex, &n);
        add(n, h);
    }
    for nodes in levels.values() {
        let v: Vec<&NodeRef> = nodes.iter().collect();
        for (i, a) in v.iter().enumerate() {
            for b in &v[i + 1..] {
                if ex.le(a, b) || ex.le(b, a) {
                    return Specialness::NotSpecial;
                }
            }
        }
    }
    Specialness::Special(AntichainDecomposition { levels, cut })
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SurgeryError {
    #[error("N is missing successor {0:?} (first node of a top-attached segment)")]
    MissingSuccessor(String),
    #[error("N({child}) contains {node}, which is not below the replaced top")]
    NotBelowTop { child: String, node: String },
    #[error("family fragments with top attachments are not supported by surgery")]
    FragmentHasTops,
}

fn has_top_attachments(t: &TreeScheme) -> bool {
    t.attach
        .values()
        .any(|a| matches!(a, Attach::Top(..)))
        || t.families.values().any(|f| has_top_attachments(&f.fragment))
}

/// Splits every limit node with successors according to `N`: successors with
/// equal `N`-value keep a common new limit node, successors with different
/// values end up over distinct, pairwise incomparable new limit nodes.  `N`
/// maps each top-attached segment (by id, standing for its first node) to a
/// finite set of nodes below the replaced top.
pub fn surgery_tprime(
    t: &TreeScheme,
    n_map: &BTreeMap<String, BTreeSet<NodeRef>>,
) -> Result<TreeScheme, SurgeryError> {
    if t.families.values().any(|f| has_top_attachments(&f.fragment)) {
        return Err(SurgeryError::FragmentHasTops);
    }
    let mut out = t.clone();
    // group top-attached children per top
    let mut per_top: BTreeMap<(String, u32), Vec<String>> = BTreeMap::new();
    for (child, att) in &t.attach {
        if let Attach::Top(p, k) = att {
            per_top
                .entry((p.clone(), *k))
                .or_default()
                .push(child.clone());
        }
    }
    for ((seg, k), children) in per_top {
        let top = NodeRef::Top(seg.clone(), k);
        let mut classes: BTreeMap<&BTreeSet<NodeRef>, Vec<&String>> = BTreeMap::new();
        for child in &children {
            let x = n_map
                .get(child)
                .ok_or_else(|| SurgeryError::MissingSuccessor(child.clone()))?;
            for node in x {
                if !t.le(node, &top) || node == &top {
                    return Err(SurgeryError::NotBelowTop {
                        child: child.clone(),
                        node: node.to_string(),
                    });
                }
            }
            classes.entry(x).or_default().push(child);
        }
        let mut fresh = t
            .tops()
            .iter()
            .filter(|(s, _)| s == &seg)
            .map(|(_, k)| k + 1)
            .max()
            .unwrap_or(0);
        for (class_idx, (_, members)) in classes.into_iter().enumerate() {
            let new_k = if class_idx == 0 {
                k
            } else {
                let v = fresh;
                fresh += 1;
                v
            };
            for child in members {
                out.attach
                    .insert(child.clone(), Attach::Top(seg.clone(), new_k));
            }
        }
    }
    Ok(out)
}

/// The subtree of nodes lying on some high-ray: ω-segments stay whole,
/// finite segments are trimmed to the deepest index a surviving child hangs
/// from, and segments below no ω-segment vanish.  `None` when the tree has
/// no high-rays at all.
pub fn hat_subtree(t: &TreeScheme) -> Option<TreeScheme> {
    let mut keep: BTreeMap<String, u32> = BTreeMap::new(); // kept length for finite segments
    let mut kept: BTreeSet<String> = BTreeSet::new();
    // families survive when their fragment has high-rays
    let families: BTreeMap<String, Family> = t
        .families
        .iter()
        .filter_map(|(id, fam)| {
            hat_subtree(&fam.fragment).map(|fragment| {
                (
                    id.clone(),
                    Family {
                        base: fam.base.clone(),
                        fragment,
                    },
                )
            })
        })
        .collect();
    // iterate to a fixed point: a segment is kept if it is an ω-segment or
    // some kept segment (or surviving family) hangs from it
    loop {
        let mut changed = false;
        for (s, kind) in &t.segments {
            if kept.contains(s) && *kind == SegKind::OmegaChain {
                continue;
            }
            let needed = *kind == SegKind::OmegaChain
                || families.values().any(|f| &f.base == s)
                || t.attach.iter().any(|(child, att)| {
                    kept.contains(child)
                        && match att {
                            Attach::At(p, _) | Attach::Top(p, _) => p == s,
                        }
                });
            if needed && kept.insert(s.clone()) {
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if !kept.contains(&t.root) {
        return None;
    }
    for (child, att) in &t.attach {
        if !kept.contains(child) {
            continue;
        }
        if let Attach::At(p, j) = att {
            let e = keep.entry(p.clone()).or_insert(0);
            *e = (*e).max(j + 1);
        }
    }
    let segments: BTreeMap<String, SegKind> = t
        .segments
        .iter()
        .filter(|(s, _)| kept.contains(*s))
        .map(|(s, kind)| {
            let kind = match kind {
                SegKind::FiniteChain(_) => SegKind::FiniteChain(keep.get(s).copied().unwrap_or(1)),
                SegKind::OmegaChain => SegKind::OmegaChain,
            };
            (s.clone(), kind)
        })
        .collect();
    let attach = t
        .attach
        .iter()
        .filter(|(child, _)| kept.contains(*child))
        .map(|(c, a)| (c.clone(), a.clone()))
        .collect();
    Some(TreeScheme {
        segments,
        attach,
        families,
        root: t.root.clone(),
    })
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TgraphError {
    #[error("family {0:?} nests beyond a single ω-chain fragment")]
    NestingTooDeep(String),
}

fn tgraph_node(t: &TreeScheme, s: &str, i: u32) -> VTok {
    match t.segments[s] {
        SegKind::OmegaChain => VTok::Gen(s.to_string(), i),
        SegKind::FiniteChain(_) => VTok::Core(format!("{s}.{i}")),
    }
}

/// The uniform T-graph of a scheme: ω-segments become rays, finite segments
/// become core paths, successor adjacencies become edges, each top becomes a
/// core vertex whose neighborhood (an ω-fan) is cofinal in the chain below
/// it, and single-ω-chain families become combs.
pub fn uniform_tgraph(t: &TreeScheme) -> Result<GraphPresentation, TgraphError> {
    let mut p = GraphPresentation::default();
    for (s, kind) in &t.segments {
        match kind {
            SegKind::OmegaChain => {
                p.generators.insert(s.clone(), GenKind::Ray);
            }
            SegKind::FiniteChain(len) => {
                for i in 0..*len {
                    p.core.insert(format!("{s}.{i}"));
                }
                for i in 0..len.saturating_sub(1) {
                    p.finite_edges.insert(GraphPresentation::edge(
                        VTok::Core(format!("{s}.{i}")),
                        VTok::Core(format!("{s}.{}", i + 1)),
                    ));
                }
            }
        }
    }
    for (child, att) in &t.attach {
        let first = tgraph_node(t, child, 0);
        match att {
            Attach::At(parent, j) => {
                p.finite_edges
                    .insert(GraphPresentation::edge(tgraph_node(t, parent, *j), first));
            }
            Attach::Top(parent, k) => {
                let top = format!("{parent}.top{k}");
                p.core.insert(top.clone());
                p.fans.insert(Fan {
                    vertex: top.clone(),
                    generator: parent.clone(),
                    support: Support::Omega,
                });
                p.finite_edges
                    .insert(GraphPresentation::edge(VTok::Core(top), first));
            }
        }
    }
    for (fid, fam) in &t.families {
        let frag = &fam.fragment;
        let single_omega = frag.segments.len() == 1
            && frag.families.is_empty()
            && frag.segments[&frag.root] == SegKind::OmegaChain;
        if !single_omega {
            return Err(TgraphError::NestingTooDeep(fid.clone()));
        }
        p.combs.insert((fam.base.clone(), fid.clone()));
    }
    Ok(p)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RayspaceError {
    #[error("family {0:?} nests converging rays beyond rank 1")]
    RankTooHigh(String),
}

/// The ray space of a scheme as a descriptor: one point per high-ray schema;
/// family rays converge to the ray of their base segment.
pub fn rayspace_descriptor(t: &TreeScheme) -> Result<SpaceDescriptor, RayspaceError> {
    let mut d = SpaceDescriptor::default();
    for (s, kind) in &t.segments {
        if *kind == SegKind::OmegaChain {
            d.isolated.insert(s.clone());
        }
    }
    for (fid, fam) in &t.families {
        for (nested, nf) in &fam.fragment.families {
            if high_rays(&nf.fragment)
                .iter()
                .any(|_| true)
            {
                return Err(RayspaceError::RankTooHigh(format!("{fid}.{nested}")));
            }
        }
        let frag_rays: Vec<String> = fam
            .fragment
            .segments
            .iter()
            .filter(|(_, k)| **k == SegKind::OmegaChain)
            .map(|(s, _)| s.clone())
            .collect();
        for seg in frag_rays {
            d.isolated.remove(&fam.base);
            d.limits.insert(fam.base.clone());
            d.sequences.insert((format!("{fid}.{seg}"), fam.base.clone()));
        }
    }
    Ok(d.canonicalize())
}

/// Whether node `x` belongs to the high-ray of ω-segment `seg`: the ray is
/// the down-closure of the whole segment.
pub fn ray_contains(t: &TreeScheme, seg: &str, x: &NodeRef) -> bool {
    if let NodeRef::Seg(s, _) = x {
        if s == seg {
            return true;
        }
    }
    t.le(x, &NodeRef::Seg(seg.to_string(), 0))
}

/// A basic open set of the ray space: rays through `anchor` avoiding every
/// node of `excluded`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct BasicOpen {
    pub anchor: NodeRef,
    pub excluded: BTreeSet<NodeRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootedForest {
    pub roots: Vec<String>,
    pub parent: BTreeMap<String, String>,
    /// DFS visit order, root-first per component.
    pub order: Vec<String>,
}

impl RootedForest {
    /// Tree-order comparability: one endpoint an ancestor of the other.
    pub fn comparable(&self, u: &str, v: &str) -> bool {
        let ancestor = |x: &str, y: &str| {
            let mut x = x;
            loop {
                if x == y {
                    return true;
                }
                match self.parent.get(x) {
                    Some(p) => x = p,
                    None => return false,
                }
            }
        };
        ancestor(u, v) || ancestor(v, u)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("graph is empty after removing K")]
    EmptyGraph,
}

/// Depth-first spanning forest of `g∖K`, rooted at the smallest vertex of
/// each component.  DFS trees are normal: every edge of the graph joins
/// tree-comparable vertices.
pub fn normal_tree_search(
    g: &FiniteGraph,
    k: &BTreeSet<String>,
) -> Result<RootedForest, SearchError> {
    let vertices: BTreeSet<&String> = g.vertices.iter().filter(|v| !k.contains(*v)).collect();
    if vertices.is_empty() {
        return Err(SearchError::EmptyGraph);
    }
    let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (a, b) in &g.edges {
        if !k.contains(a) && !k.contains(b) {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
    }
    let mut forest = RootedForest {
        roots: Vec::new(),
        parent: BTreeMap::new(),
        order: Vec::new(),
    };
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for start in &vertices {
        if seen.contains(start.as_str()) {
            continue;
        }
        forest.roots.push((*start).clone());
        let mut stack: Vec<(&str, Option<&str>)> = vec![(start, None)];
        while let Some((v, from)) = stack.pop() {
            if !seen.insert(v) {
                continue;
            }
            if let Some(f) = from {
                forest.parent.insert(v.to_string(), f.to_string());
            }
            forest.order.push(v.to_string());
            // push in reverse so the smallest neighbor is explored first
            for w in adj.get(v).into_iter().flatten().rev() {
                if !seen.contains(w) {
                    stack.push((w, Some(v)));
                }
            }
        }
    }
    Ok(forest)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OtsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("fragment {file:?}: {msg}")]
    Fragment { file: String, msg: String },
    #[error("missing [root] section")]
    MissingRoot,
    #[error("invalid scheme: {0}")]
    Invalid(#[from] SchemeError),
}

/// Parses the `.ots` text format; `loader` resolves family fragment files to
/// their text.
pub fn parse_ots(
    text: &str,
    loader: &mut dyn FnMut(&str) -> Result<String, String>,
) -> Result<TreeScheme, OtsError> {
    let mut segments = BTreeMap::new();
    let mut attach = BTreeMap::new();
    let mut families = BTreeMap::new();
    let mut root = None;
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
        match section.as_deref() {
            Some("segments") => {
                let (id, kind) = match words[..] {
                    [id, "omega"] => (id, SegKind::OmegaChain),
                    [id, "finite", n] => (
                        id,
                        SegKind::FiniteChain(n.parse().map_err(|_| OtsError::Syntax {
                            line: line_no,
                            msg: format!("bad length {n:?}"),
                        })?),
                    ),
                    _ => {
                        return Err(OtsError::Syntax {
                            line: line_no,
                            msg: "expected `id omega` or `id finite N`".to_string(),
                        })
                    }
                };
                if segments.insert(id.to_string(), kind).is_some() {
                    return Err(OtsError::DuplicateId {
                        line: line_no,
                        id: id.to_string(),
                    });
                }
            }
            Some("attach") => {
                let [child, "at", place] = words[..] else {
                    return Err(OtsError::Syntax {
                        line: line_no,
                        msg: "expected `child at seg[i]` or `child at top(seg[,k])`".to_string(),
                    });
                };
                let att = parse_place(place, line_no)?;
                if attach.insert(child.to_string(), att).is_some() {
                    return Err(OtsError::DuplicateId {
                        line: line_no,
                        id: child.to_string(),
                    });
                }
            }
            Some("families") => {
                let [base, file] = words[..] else {
                    return Err(OtsError::Syntax {
                        line: line_no,
                        msg: "expected `base fragmentfile`".to_string(),
                    });
                };
                let id = file.strip_suffix(".ots").unwrap_or(file).to_string();
                let frag_text = loader(file).map_err(|msg| OtsError::Fragment {
                    file: file.to_string(),
                    msg,
                })?;
                let fragment = parse_ots(&frag_text, loader)?;
                if families
                    .insert(
                        id.clone(),
                        Family {
                            base: base.to_string(),
                            fragment,
                        },
                    )
                    .is_some()
                {
                    return Err(OtsError::DuplicateId {
                        line: line_no,
                        id,
                    });
                }
            }
            Some("root") => {
                let [id] = words[..] else {
                    return Err(OtsError::Syntax {
                        line: line_no,
                        msg: "expected a single segment id".to_string(),
                    });
                };
                root = Some(id.to_string());
            }
            other => {
                return Err(OtsError::Syntax {
                    line: line_no,
                    msg: format!("content in unknown section {other:?}"),
                })
            }
        }
    }
    let scheme = TreeScheme {
        segments,
        attach,
        families,
        root: root.ok_or(OtsError::MissingRoot)?,
    };
    scheme.validate()?;
    Ok(scheme)
}

fn parse_place(place: &str, line: usize) -> Result<Attach, OtsError> {
    if let Some(inner) = place.strip_prefix("top(").and_then(|s| s.strip_suffix(')')) {
        let (seg, k) = match inner.split_once(',') {
            Some((seg, k)) => (
                seg,
                k.parse().map_err(|_| OtsError::Syntax {
                    line,
                    msg: format!("bad top index {k:?}"),
                })?,
            ),
            None => (inner, 0),
        };
        return Ok(Attach::Top(seg.to_string(), k));
    }
    if let Some((seg, rest)) = place.split_once('[') {
        if let Some(i) = rest.strip_suffix(']') {
            let i = i.parse().map_err(|_| OtsError::Syntax {
                line,
                msg: format!("bad index {i:?}"),
            })?;
            return Ok(Attach::At(seg.to_string(), i));
        }
    }
    Err(OtsError::Syntax {
        line,
        msg: format!("unparseable attachment place {place:?}"),
    })
}

/// Canonical `.ots` text for the main scheme; families are referenced as
/// `ID.ots` (emit fragments separately via [`fragment_files`]).
pub fn serialize_ots(t: &TreeScheme) -> String {
    let mut out = String::from("[segments]\n");
    for (id, kind) in &t.segments {
        match kind {
            SegKind::OmegaChain => out.push_str(&format!("{id} omega\n")),
            SegKind::FiniteChain(n) => out.push_str(&format!("{id} finite {n}\n")),
        }
    }
    if !t.attach.is_empty() {
        out.push_str("[attach]\n");
        for (child, att) in &t.attach {
            let place = match att {
                Attach::At(p, i) => format!("{p}[{i}]"),
                Attach::Top(p, 0) => format!("top({p})"),
                Attach::Top(p, k) => format!("top({p},{k})"),
            };
            out.push_str(&format!("{child} at {place}\n"));
        }
    }
    if !t.families.is_empty() {
        out.push_str("[families]\n");
        for (id, fam) in &t.families {
            out.push_str(&format!("{} {id}.ots\n", fam.base));
        }
    }
    out.push_str(&format!("[root]\n{}\n", t.root));
    out
}

/// All fragment files (name → canonical text) a serialized scheme refers to.
pub fn fragment_files(t: &TreeScheme) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for (id, fam) in &t.families {
        out.insert(format!("{id}.ots"), serialize_ots(&fam.fragment));
        out.extend(fragment_files(&fam.fragment));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::schemes;
    use crate::descriptor::homeomorphic;
    use crate::endspace::end_space;

    fn seg(s: &str, i: u32) -> NodeRef {
        NodeRef::Seg(s.into(), i)
    }

    fn top(s: &str, k: u32) -> NodeRef {
        NodeRef::Top(s.into(), k)
    }

    #[test]
    fn fixtures_validate() {
        for t in [
            schemes::fork(),
            schemes::omega2(),
            schemes::comb_tree(),
            schemes::example26(3),
        ] {
            assert_eq!(t.validate(), Ok(()));
        }
    }

    #[test]
    fn omega2_order() {
        let t = schemes::omega2();
        assert!(order_le(&t, &seg("s0", 3), &seg("s1", 0)).unwrap());
        assert!(order_le(&t, &top("s0", 0), &seg("s1", 2)).unwrap());
        assert!(!order_le(&t, &top("s0", 0), &seg("s0", 7)).unwrap());
        assert!(order_le(&t, &seg("s0", 7), &top("s0", 0)).unwrap());
        assert!(!order_le(&t, &seg("s1", 0), &seg("s0", 9)).unwrap());
    }

    #[test]
    fn fork_nodes_incomparable() {
        let t = schemes::fork();
        assert!(!order_le(&t, &seg("left", 1), &seg("right", 4)).unwrap());
        assert!(!order_le(&t, &seg("right", 4), &seg("left", 1)).unwrap());
        assert!(order_le(&t, &seg("base", 0), &seg("right", 4)).unwrap());
    }

    #[test]
    fn order_le_rejects_invalid_node() {
        let t = schemes::fork();
        assert!(order_le(&t, &seg("base", 5), &seg("left", 0)).is_err());
        assert!(order_le(&t, &top("left", 0), &seg("left", 0)).is_err());
    }

    #[test]
    fn order_le_is_partial_order_on_samples() {
        let t = expand_families(&schemes::comb_tree(), 3);
        let mut nodes = Vec::new();
        for (s, kind) in &t.segments {
            let count = match kind {
                SegKind::FiniteChain(l) => *l,
                SegKind::OmegaChain => 4,
            };
            for i in 0..count {
                nodes.push(seg(s, i));
            }
        }
        for a in &nodes {
            assert!(t.le(a, a));
            for b in &nodes {
                if t.le(a, b) && t.le(b, a) {
                    assert_eq!(a, b);
                }
                for c in &nodes {
                    if t.le(a, b) && t.le(b, c) {
                        assert!(t.le(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn high_ray_counts() {
        assert_eq!(high_rays(&schemes::fork()).len(), 2);
        assert_eq!(
            high_rays(&TreeScheme::single("r", SegKind::OmegaChain)).len(),
            1
        );
        // bottom chain and full chain, one per ω-segment
        assert_eq!(high_rays(&schemes::omega2()).len(), 2);
        // base ray plus the intensional pendant family schema
        let rays = high_rays(&schemes::comb_tree());
        assert_eq!(rays.len(), 2);
        assert!(rays.iter().any(|r| r.family.as_deref() == Some("teeth")));
    }

    #[test]
    fn tops_of_rays() {
        let t = schemes::omega2();
        let rays = high_rays(&t);
        let bottom = rays.iter().find(|r| r.segment == "s0").unwrap();
        let full = rays.iter().find(|r| r.segment == "s1").unwrap();
        assert_eq!(tops_of(&t, bottom), [top("s0", 0)].into());
        assert_eq!(tops_of(&t, full), BTreeSet::new());
    }

    #[test]
    fn example26_tops_exist_per_leaf_ray() {
        let t = schemes::example26(2);
        let rays = high_rays(&t);
        assert_eq!(rays.len(), 4);
        for r in &rays {
            assert_eq!(tops_of(&t, r).len(), 1, "ray {}", r.id);
        }
    }

    #[test]
    fn omega2_heights() {
        let t = schemes::omega2();
        assert_eq!(height(&t, &seg("s0", 4)), (0, 4));
        assert_eq!(height(&t, &top("s0", 0)), (1, 0));
        assert_eq!(height(&t, &seg("s1", 0)), (1, 1));
    }

    #[test]
    fn specialness_omega2_singletons() {
        let Specialness::Special(d) = specialness(&schemes::omega2(), 6) else {
            panic!("schemes are special");
        };
        assert!(d.levels.values().all(|l| l.len() == 1));
    }

    #[test]
    fn specialness_fork_levels_le_2() {
        let Specialness::Special(d) = specialness(&schemes::fork(), 6) else {
            panic!("schemes are special");
        };
        assert!(d.levels.values().all(|l| l.len() <= 2));
        assert!(d.levels.values().any(|l| l.len() == 2));
    }

    #[test]
    fn specialness_comb_tree_levels_grow() {
        let Specialness::Special(d) = specialness(&schemes::comb_tree(), 5) else {
            panic!("schemes are special");
        };
        // level n holds the base node and the pendant nodes that have
        // climbed there from lower attachment points
        let max = d.levels.values().map(|l| l.len()).max().unwrap();
        assert!(max > 1);
    }

    #[test]
    fn surgery_identity_without_tops() {
        let t = schemes::fork();
        assert_eq!(surgery_tprime(&t, &BTreeMap::new()), Ok(t));
    }

    #[test]
    fn surgery_missing_successor_rejected() {
        let t = schemes::omega2();
        assert_eq!(
            surgery_tprime(&t, &BTreeMap::new()),
            Err(SurgeryError::MissingSuccessor("s1".into()))
        );
    }

    #[test]
    fn surgery_omega2_keeps_rays() {
        let t = schemes::omega2();
        let n: BTreeMap<String, BTreeSet<NodeRef>> =
            [("s1".to_string(), [seg("s0", 5)].into())].into();
        let t2 = surgery_tprime(&t, &n).unwrap();
        assert_eq!(high_rays(&t2).len(), 2);
        assert!(homeomorphic(
            &rayspace_descriptor(&t).unwrap(),
            &rayspace_descriptor(&t2).unwrap()
        ));
    }

    #[test]
    fn surgery_splits_by_n_value() {
        // limit node with two successors carrying different N-values splits
        let mut t = schemes::omega2();
        t.segments.insert("s2".into(), SegKind::OmegaChain);
        t.attach.insert("s2".into(), Attach::Top("s0".into(), 0));
        let n: BTreeMap<String, BTreeSet<NodeRef>> = [
            ("s1".to_string(), [seg("s0", 1)].into()),
            ("s2".to_string(), [seg("s0", 2)].into()),
        ]
        .into();
        let t2 = surgery_tprime(&t, &n).unwrap();
        let tops = t2.tops();
        assert_eq!(tops.len(), 2);
        // the branches now climb over incomparable limit nodes
        assert!(!t2.le(&seg("s1", 0), &seg("s2", 0)));
        let a1 = t2.attach["s1"].clone();
        let a2 = t2.attach["s2"].clone();
        assert_ne!(a1, a2);
        // same N-values keep a common top
        let n_same: BTreeMap<String, BTreeSet<NodeRef>> = [
            ("s1".to_string(), [seg("s0", 1)].into()),
            ("s2".to_string(), [seg("s0", 1)].into()),
        ]
        .into();
        let t3 = surgery_tprime(&t, &n_same).unwrap();
        assert_eq!(t3.tops().len(), 1);
    }

    #[test]
    fn surgery_rejects_node_not_below_top() {
        let t = schemes::omega2();
        let n: BTreeMap<String, BTreeSet<NodeRef>> =
            [("s1".to_string(), [seg("s1", 0)].into())].into();
        assert!(matches!(
            surgery_tprime(&t, &n),
            Err(SurgeryError::NotBelowTop { .. })
        ));
    }

    #[test]
    fn hat_subtree_keeps_omega2() {
        let t = schemes::omega2();
        assert_eq!(hat_subtree(&t), Some(t));
    }

    #[test]
    fn hat_subtree_drops_pendant_leaf() {
        let mut t = TreeScheme::single("r", SegKind::OmegaChain);
        t.segments.insert("leaf".into(), SegKind::FiniteChain(2));
        t.attach.insert("leaf".into(), Attach::At("r".into(), 3));
        let hat = hat_subtree(&t).unwrap();
        assert!(!hat.segments.contains_key("leaf"));
        assert_eq!(hat.segments.len(), 1);
    }

    #[test]
    fn hat_subtree_trims_finite_prefix() {
        let mut t = TreeScheme::single("base", SegKind::FiniteChain(5));
        t.segments.insert("r".into(), SegKind::OmegaChain);
        t.attach.insert("r".into(), Attach::At("base".into(), 2));
        let hat = hat_subtree(&t).unwrap();
        assert_eq!(hat.segments["base"], SegKind::FiniteChain(3));
    }

    #[test]
    fn hat_subtree_of_all_finite_is_empty() {
        let t = TreeScheme::single("base", SegKind::FiniteChain(4));
        assert_eq!(hat_subtree(&t), None);
    }

    #[test]
    fn hat_subtree_comb_tree_family_kept_or_dropped() {
        let t = schemes::comb_tree();
        let hat = hat_subtree(&t).unwrap();
        assert!(hat.families.contains_key("teeth"));
        // finite pendants vanish
        let mut t2 = schemes::comb_tree();
        t2.families.get_mut("teeth").unwrap().fragment =
            TreeScheme::single("p", SegKind::FiniteChain(2));
        let hat2 = hat_subtree(&t2).unwrap();
        assert!(hat2.families.is_empty());
    }

    #[test]
    fn tgraph_single_chain_is_ray() {
        let t = TreeScheme::single("r", SegKind::OmegaChain);
        let p = uniform_tgraph(&t).unwrap();
        assert_eq!(p.generators.len(), 1);
        assert_eq!(end_space(&p).signature(), (0, 0, 1));
    }

    #[test]
    fn tgraph_omega2_shape() {
        let p = uniform_tgraph(&schemes::omega2()).unwrap();
        assert!(p.core.contains("s0.top0"));
        assert!(p.fans.iter().any(|f| f.vertex == "s0.top0"
            && f.generator == "s0"
            && f.support == Support::Omega));
        assert_eq!(end_space(&p).signature(), (0, 0, 2));
    }

    #[test]
    fn tgraph_comb_tree_is_comb() {
        let p = uniform_tgraph(&schemes::comb_tree()).unwrap();
        assert!(p.combs.contains(&("base".to_string(), "teeth".to_string())));
        assert_eq!(end_space(&p).signature(), (1, 0, 0));
    }

    #[test]
    fn tgraph_rejects_deep_nesting() {
        let mut t = schemes::comb_tree();
        t.families.get_mut("teeth").unwrap().fragment = schemes::comb_tree();
        assert_eq!(
            uniform_tgraph(&t),
            Err(TgraphError::NestingTooDeep("teeth".into()))
        );
    }

    #[test]
    fn rayspace_examples() {
        assert_eq!(
            rayspace_descriptor(&schemes::fork()).unwrap().signature(),
            (0, 0, 2)
        );
        assert_eq!(
            rayspace_descriptor(&schemes::omega2()).unwrap().signature(),
            (0, 0, 2)
        );
        assert_eq!(
            rayspace_descriptor(&schemes::comb_tree())
                .unwrap()
                .signature(),
            (1, 0, 0)
        );
    }

    #[test]
    fn rayspace_matches_tgraph_end_space() {
        for t in [
            schemes::fork(),
            schemes::omega2(),
            schemes::comb_tree(),
            TreeScheme::single("r", SegKind::OmegaChain),
        ] {
            let d1 = rayspace_descriptor(&t).unwrap();
            let d2 = end_space(&uniform_tgraph(&t).unwrap());
            assert!(homeomorphic(&d1, &d2), "{t:?}");
        }
    }

    #[test]
    fn rayspace_point_count_matches_high_ray_schemas() {
        for t in [schemes::fork(), schemes::omega2(), schemes::comb_tree()] {
            let d = rayspace_descriptor(&t).unwrap();
            let points = d.isolated.len() + d.limits.len() + d.sequences.len();
            assert_eq!(points, high_rays(&t).len());
        }
    }

    #[test]
    fn normal_search_path_is_path() {
        let mut g = FiniteGraph::default();
        g.add_edge("a", "b");
        g.add_edge("b", "c");
        let f = normal_tree_search(&g, &BTreeSet::new()).unwrap();
        assert_eq!(f.roots, vec!["a".to_string()]);
        assert_eq!(f.parent["b"], "a");
        assert_eq!(f.parent["c"], "b");
    }

    #[test]
    fn normal_search_is_normal_on_samples() {
        use crate::presentation::truncate;
        let cases = [
            (crate::corpus::fixtures::figure1(), vec!["vinf"]),
            (crate::corpus::fixtures::ladder_pair(), vec![]),
            (crate::corpus::fixtures::comb(), vec![]),
        ];
        for (p, k) in cases {
            let g = truncate(&p, 4).unwrap();
            let k: BTreeSet<String> = k.into_iter().map(String::from).collect();
            let f = normal_tree_search(&g, &k).unwrap();
            for (u, v) in &g.edges {
                if k.contains(u) || k.contains(v) {
                    continue;
                }
                assert!(f.comparable(u, v), "edge {u}–{v} not comparable");
            }
        }
    }

    #[test]
    fn normal_search_k4() {
        let mut g = FiniteGraph::default();
        for (a, b) in [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")] {
            g.add_edge(a, b);
        }
        let f = normal_tree_search(&g, &BTreeSet::new()).unwrap();
        for (u, v) in &g.edges {
            assert!(f.comparable(u, v));
        }
    }

    #[test]
    fn normal_search_empty_rejected() {
        let g = FiniteGraph::default();
        assert_eq!(
            normal_tree_search(&g, &BTreeSet::new()),
            Err(SearchError::EmptyGraph)
        );
    }

    #[test]
    fn ots_roundtrip_with_fragments() {
        let t = schemes::comb_tree();
        let main = serialize_ots(&t);
        let frags = fragment_files(&t);
        let mut loader = |file: &str| {
            frags
                .get(file)
                .cloned()
                .ok_or_else(|| format!("no fragment {file}"))
        };
        let t2 = parse_ots(&main, &mut loader).unwrap();
        assert_eq!(t, t2);
        assert_eq!(serialize_ots(&t2), main);
    }

    #[test]
    fn ots_parses_indexed_tops() {
        let text = "[segments]\ns0 omega\ns1 omega\ns2 omega\n[attach]\ns1 at top(s0)\ns2 at top(s0,1)\n[root]\ns0\n";
        let t = parse_ots(text, &mut |_| Err("no fragments".into())).unwrap();
        assert_eq!(t.attach["s1"], Attach::Top("s0".into(), 0));
        assert_eq!(t.attach["s2"], Attach::Top("s0".into(), 1));
        assert!(!t.le(&seg("s1", 0), &seg("s2", 0)));
    }

    #[test]
    fn ots_rejects_top_of_finite_segment() {
        let text = "[segments]\nb finite 2\nr omega\n[attach]\nr at top(b)\n[root]\nb\n";
        assert!(matches!(
            parse_ots(text, &mut |_| Err("none".into())),
            Err(OtsError::Invalid(SchemeError::TopOfFiniteChain(_)))
        ));
    }

    #[test]
    fn expanded_comb_tree_shape() {
        let t = expand_families(&schemes::comb_tree(), 3);
        assert!(t.families.is_empty());
        assert_eq!(t.segments.len(), 4);
        assert_eq!(t.attach["teeth.1.p"], Attach::At("base".into(), 1));
        // each pendant node sits above its attachment point
        assert!(t.le(&seg("base", 1), &seg("teeth.1.p", 0)));
        assert!(!t.le(&seg("base", 2), &seg("teeth.1.p", 0)));
    }
}
