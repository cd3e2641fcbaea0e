//! The end game on ray spaces: referee, Player II's canonical stationary
//! strategy, match adjudication, the K′ partition procedure, and the
//! strategy-tree construction.
//!
//! One round of the game: Player I declares a basic open set, Player II
//! answers with a disjoint basic open cover of it, and Player I's next
//! declaration must lie inside one cover part.  Player II wins a match when
//! the intersection of Player I's moves is, in exactly one way, a point
//! plus an open set not containing it.
//!
//! Infinite objects are handled by instantiating family schemas up to a
//! cut and extrapolating eventually-periodic behaviour; covers are checked
//! exhaustively by high-ray membership over the instantiated sample.

use crate::descriptor::SpaceDescriptor;
use crate::ordertree::{
    expand_families, order_le, ray_contains, Attach, BasicOpen, NodeRef, SegKind, TreeScheme,
};
use crate::subbase::{parse_node, sample_nodes};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum IllegalMove {
    #[error("{0} is not a node of the tree")]
    NotBasic(String),
    #[error("move {0} is not contained in any part of the previous cover")]
    NotContained(String),
    #[error("cover parts {0} and {1} overlap")]
    Overlap(String, String),
    #[error("cover misses the ray {0}")]
    NotCovering(String),
}

#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error("anchor {0} is not a node of the tree")]
    AnchorNotInTree(String),
    #[error("target {0} excludes a node below its anchor, so it is empty")]
    EmptyTarget(String),
    #[error(transparent)]
    Illegal(#[from] IllegalMove),
    #[error("unknown ray {0:?}")]
    UnknownRay(String),
    #[error("unknown subbasic set {0:?}")]
    UnknownSet(String),
    #[error("the move limit did not settle within the shadow horizon")]
    LimitNotComputable,
    #[error("context undecidable: {0}")]
    ContextUndecidable(String),
}

/// A tree-scheme game context: the scheme expanded at a family cut, its
/// sampled high-rays, and the subbase `{[t,∅]}`.
#[derive(Debug, Clone)]
pub struct SchemeCtx {
    pub scheme: TreeScheme,
    pub cut: u32,
    pub rays: Vec<String>,
    tops: Vec<NodeRef>,
}

fn le(t: &TreeScheme, a: &NodeRef, b: &NodeRef) -> bool {
    order_le(t, a, b).unwrap_or(false)
}

fn lt(t: &TreeScheme, a: &NodeRef, b: &NodeRef) -> bool {
    a != b && le(t, a, b)
}

impl SchemeCtx {
    pub fn new(t: &TreeScheme, cut: u32) -> SchemeCtx {
        let scheme = expand_families(t, cut);
        let rays = scheme
            .segments
            .iter()
            .filter(|(_, k)| **k == SegKind::OmegaChain)
            .map(|(s, _)| s.clone())
            .collect();
        let tops = scheme
            .tops()
            .into_iter()
            .map(|(s, k)| NodeRef::Top(s, k))
            .collect();
        SchemeCtx {
            scheme,
            cut,
            rays,
            tops,
        }
    }

    pub fn members(&self, o: &BasicOpen) -> BTreeSet<String> {
        self.rays
            .iter()
            .filter(|r| {
                ray_contains(&self.scheme, r, &o.anchor)
                    && o.excluded.iter().all(|x| !ray_contains(&self.scheme, r, x))
            })
            .cloned()
            .collect()
    }

    /// Smallest basic open around ray `r` anchored at the `i`-th node of its
    /// own segment: excludes every top above the anchor that `r` avoids.
    fn shrink_around(&self, r: &str, i: u32) -> BasicOpen {
        let anchor = NodeRef::Seg(r.to_string(), i);
        let excluded = self
            .tops
            .iter()
            .filter(|x| le(&self.scheme, &anchor, x) && !ray_contains(&self.scheme, r, x))
            .cloned()
            .collect();
        BasicOpen { anchor, excluded }
    }

    /// Whether `a` is a union of sampled basic open sets.
    pub fn is_open(&self, a: &BTreeSet<String>) -> bool {
        a.iter().all(|r| {
            (0..self.cut).any(|i| self.members(&self.shrink_around(r, i)).is_subset(a))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cover {
    pub target: BasicOpen,
    pub parts: Vec<BasicOpen>,
}

/// Referee check for Player II: parts must be pairwise disjoint and cover
/// the target exactly (by exhaustive high-ray membership).
pub fn validate_cover(ctx: &SchemeCtx, cover: &Cover) -> Result<(), IllegalMove> {
    for p in std::iter::once(&cover.target).chain(&cover.parts) {
        if !ctx.scheme.node_valid(&p.anchor) {
            return Err(IllegalMove::NotBasic(p.anchor.to_string()));
        }
    }
    let target = ctx.members(&cover.target);
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, p) in cover.parts.iter().enumerate() {
        let m = ctx.members(p);
        if !m.is_subset(&target) {
            return Err(IllegalMove::NotContained(p.anchor.to_string()));
        }
        for r in m {
            if let Some(j) = seen.insert(r, i) {
                return Err(IllegalMove::Overlap(
                    cover.parts[j].anchor.to_string(),
                    cover.parts[i].anchor.to_string(),
                ));
            }
        }
    }
    if let Some(missing) = target.iter().find(|r| !seen.contains_key(*r)) {
        return Err(IllegalMove::NotCovering(missing.clone()));
    }
    Ok(())
}

/// Referee check for Player I: the move must lie inside one part of the
/// cover answered last round (no constraint on the opening move).
pub fn validate_move(
    ctx: &SchemeCtx,
    previous: Option<&Cover>,
    mv: &BasicOpen,
) -> Result<(), IllegalMove> {
    if !ctx.scheme.node_valid(&mv.anchor) {
        return Err(IllegalMove::NotBasic(mv.anchor.to_string()));
    }
    if let Some(cover) = previous {
        let m = ctx.members(mv);
        if !cover.parts.iter().any(|p| m.is_subset(&ctx.members(p))) {
            return Err(IllegalMove::NotContained(mv.anchor.to_string()));
        }
    }
    Ok(())
}

/// Nearest limit node at or below `n` (limit nodes are exactly the tops).
fn limit_hat(t: &TreeScheme, n: &NodeRef) -> Option<NodeRef> {
    match n {
        NodeRef::Top(..) => Some(n.clone()),
        NodeRef::Seg(s, _) => t.parent_node(s).and_then(|p| limit_hat(t, &p)),
    }
}

/// The successors of `t`: the next node of its segment plus the first nodes
/// of segments attached at `t`.
fn successors(t: &TreeScheme, n: &NodeRef) -> Vec<NodeRef> {
    let mut out = Vec::new();
    if let NodeRef::Seg(s, i) = n {
        match t.segments.get(s) {
            Some(SegKind::OmegaChain) => out.push(NodeRef::Seg(s.clone(), i + 1)),
            Some(SegKind::FiniteChain(len)) if i + 1 < *len => {
                out.push(NodeRef::Seg(s.clone(), i + 1))
            }
            _ => {}
        }
    }
    for (child, att) in &t.attach {
        let parent = match att {
            Attach::At(p, j) => NodeRef::Seg(p.clone(), *j),
            Attach::Top(p, k) => NodeRef::Top(p.clone(), *k),
        };
        if &parent == n {
            out.push(NodeRef::Seg(child.clone(), 0));
        }
    }
    out
}

/// Player II's canonical stationary strategy: answers a target `[t,F]` with
/// the disjoint cover made of per-successor sets, per-exclusion sets
/// anchored on the canonical cofinal sequence of the exclusion's nearest
/// limit node, and per-exclusion sets anchored at that limit node itself.
pub fn canonical_strategy(ctx: &SchemeCtx, v: &BasicOpen) -> Result<Cover, GameError> {
    let sch = &ctx.scheme;
    if !sch.node_valid(&v.anchor) {
        return Err(GameError::AnchorNotInTree(v.anchor.to_string()));
    }
    let t = &v.anchor;
    let mut f: Vec<NodeRef> = Vec::new();
    for m in &v.excluded {
        if !sch.node_valid(m) {
            return Err(GameError::AnchorNotInTree(m.to_string()));
        }
        if le(sch, m, t) {
            return Err(GameError::EmptyTarget(t.to_string()));
        }
        if lt(sch, t, m) {
            f.push(m.clone());
        }
        // incomparable exclusions cut nothing below t and are dropped
    }
    let f: Vec<NodeRef> = f
        .iter()
        .filter(|m| !f.iter().any(|n| lt(sch, n, m)))
        .cloned()
        .collect();
    // per exclusion: its nearest limit node and, when that node lies
    // strictly above t, the first element of its canonical cofinal
    // sequence that does
    struct Exc {
        m: NodeRef,
        hat: Option<NodeRef>,
        seq_at: Option<NodeRef>,
    }
    let excs: Vec<Exc> = f
        .iter()
        .map(|m| {
            let hat = limit_hat(sch, m).filter(|h| lt(sch, t, h));
            let seq_at = hat.as_ref().map(|h| {
                let NodeRef::Top(s, _) = h else { unreachable!() };
                match t {
                    NodeRef::Seg(s2, j) if s2 == s => NodeRef::Seg(s.clone(), j + 1),
                    _ => NodeRef::Seg(s.clone(), 0),
                }
            });
            Exc {
                m: m.clone(),
                hat,
                seq_at,
            }
        })
        .collect();
    let seq_anchors: BTreeSet<&NodeRef> = excs.iter().filter_map(|e| e.seq_at.as_ref()).collect();
    // anchors already under an exclusion describe empty or out-of-target
    // sets and are skipped
    let guarded = |a: &NodeRef| f.iter().any(|n| le(sch, n, a));
    let above = |xs: &mut BTreeSet<NodeRef>, cands: Vec<&NodeRef>, a: &NodeRef| {
        for c in cands {
            if lt(sch, a, c) {
                xs.insert(c.clone());
            }
        }
    };
    let mut parts: BTreeSet<BasicOpen> = BTreeSet::new();
    for s in successors(sch, t) {
        if seq_anchors.contains(&s) || guarded(&s) {
            continue;
        }
        let mut excluded: BTreeSet<NodeRef> = f.iter().cloned().collect();
        above(
            &mut excluded,
            excs.iter().filter_map(|e| e.seq_at.as_ref()).collect(),
            &s,
        );
        parts.insert(BasicOpen { anchor: s, excluded });
    }
    for e in &excs {
        let Some(a) = &e.seq_at else { continue };
        if guarded(a) {
            continue;
        }
        let mut excluded = BTreeSet::new();
        above(
            &mut excluded,
            excs.iter()
                .filter_map(|x| x.seq_at.as_ref())
                .chain(excs.iter().filter_map(|x| x.hat.as_ref()))
                .chain(f.iter())
                .collect(),
            a,
        );
        parts.insert(BasicOpen {
            anchor: a.clone(),
            excluded,
        });
    }
    for e in &excs {
        let Some(h) = &e.hat else { continue };
        if *h == e.m || guarded(h) {
            continue;
        }
        let mut excluded = BTreeSet::new();
        above(
            &mut excluded,
            excs.iter()
                .filter_map(|x| x.seq_at.as_ref())
                .chain(f.iter())
                .collect(),
            h,
        );
        parts.insert(BasicOpen {
            anchor: h.clone(),
            excluded,
        });
    }
    let cover = Cover {
        target: v.clone(),
        parts: parts
            .into_iter()
            .filter(|p| !ctx.members(p).is_empty())
            .collect(),
    };
    validate_cover(ctx, &cover)?;
    Ok(cover)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PlayerIPolicy {
    /// Always enter the cover part containing the named high-ray.
    Descend { ray: String },
    /// Pick a uniformly random nonempty part each round.
    Random { seed: u64 },
    /// Follow the target ray, but on script letter `h` hold the previous
    /// anchor and grow the exclusion set instead of descending ('d').
    Oscillate { target: String, script: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Round {
    pub mv: BasicOpen,
    pub cover: Cover,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Capture {
        x: String,
        remainder: BTreeSet<String>,
        flags: Vec<String>,
    },
    PlayerIWins {
        flags: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum MatchStatus {
    Running,
    Adjudicated(Outcome),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchState {
    pub rounds: Vec<Round>,
    pub status: MatchStatus,
}

fn containing_part<'a>(
    ctx: &SchemeCtx,
    cover: &'a Cover,
    ray: &str,
) -> Option<&'a BasicOpen> {
    cover.parts.iter().find(|p| ctx.members(p).contains(ray))
}

fn choose_move(
    ctx: &SchemeCtx,
    policy: &PlayerIPolicy,
    cover: &Cover,
    previous: &BasicOpen,
    step: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BasicOpen, GameError> {
    let fallback = || {
        cover
            .parts
            .iter()
            .find(|p| !ctx.members(p).is_empty())
            .cloned()
            .ok_or(GameError::LimitNotComputable)
    };
    match policy {
        PlayerIPolicy::Descend { ray } => match containing_part(ctx, cover, ray) {
            Some(p) => Ok(p.clone()),
            None => fallback(),
        },
        PlayerIPolicy::Random { .. } => {
            let nonempty: Vec<&BasicOpen> = cover
                .parts
                .iter()
                .filter(|p| !ctx.members(p).is_empty())
                .collect();
            if nonempty.is_empty() {
                return Err(GameError::LimitNotComputable);
            }
            Ok(nonempty[rng.gen_range(0..nonempty.len())].clone())
        }
        PlayerIPolicy::Oscillate { target, script } => {
            let part = match containing_part(ctx, cover, target) {
                Some(p) => p.clone(),
                None => return fallback(),
            };
            let letters: Vec<char> = script.chars().collect();
            if letters.is_empty() || letters[step % letters.len()] == 'd' {
                return Ok(part);
            }
            // hold: same extension as the chosen part, rewritten over the
            // previous anchor with one exclusion per dropped ray
            let kept = ctx.members(&part);
            let wide = ctx.members(&BasicOpen {
                anchor: previous.anchor.clone(),
                excluded: part.excluded.clone(),
            });
            let mut excluded = part.excluded.clone();
            for r in wide.difference(&kept) {
                let cut_node = (0..ctx.cut).map(|i| NodeRef::Seg(r.clone(), i)).find(|n| {
                    kept.iter().all(|k| !ray_contains(&ctx.scheme, k, n))
                });
                match cut_node {
                    Some(n) => {
                        excluded.insert(n);
                    }
                    None => return Ok(part),
                }
            }
            let held = BasicOpen {
                anchor: previous.anchor.clone(),
                excluded,
            };
            if ctx.members(&held) == kept {
                Ok(held)
            } else {
                Ok(part)
            }
        }
    }
}

/// Plays `rounds` referee-enforced rounds of `policy` against the canonical
/// strategy, then adjudicates the limit by shadow-extending the match until
/// the intersection and the containing-part anchors settle.
pub fn run_match(
    t: &TreeScheme,
    policy: &PlayerIPolicy,
    rounds: u32,
) -> Result<MatchState, GameError> {
    let cut = rounds + 8;
    let ctx = SchemeCtx::new(t, cut);
    if let PlayerIPolicy::Descend { ray } | PlayerIPolicy::Oscillate { target: ray, .. } = policy {
        if !ctx.rays.contains(ray) {
            return Err(GameError::UnknownRay(ray.clone()));
        }
    }
    let seed = match policy {
        PlayerIPolicy::Random { seed } => *seed,
        _ => 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mv = BasicOpen {
        anchor: NodeRef::Seg(ctx.scheme.root.clone(), 0),
        excluded: BTreeSet::new(),
    };
    let mut state = MatchState {
        rounds: Vec::new(),
        status: MatchStatus::Running,
    };
    let mut inter: BTreeSet<String> = ctx.rays.iter().cloned().collect();
    // anchors of the cover parts Player I entered, which ascend strictly
    let mut part_anchors: Vec<NodeRef> = Vec::new();
    let mut previous: Option<Cover> = None;
    let total = rounds + 2 * cut;
    for step in 0..total {
        validate_move(&ctx, previous.as_ref(), &mv)?;
        inter = inter
            .intersection(&ctx.members(&mv))
            .cloned()
            .collect();
        let cover = canonical_strategy(&ctx, &mv)?;
        if step < rounds {
            state.rounds.push(Round {
                mv: mv.clone(),
                cover: cover.clone(),
            });
        }
        let next = choose_move(&ctx, policy, &cover, &mv, step as usize, &mut rng)?;
        let next_members = ctx.members(&next);
        if let Some(p) = cover
            .parts
            .iter()
            .find(|p| next_members.is_subset(&ctx.members(p)))
        {
            part_anchors.push(p.anchor.clone());
        }
        previous = Some(cover);
        mv = next;
    }
    state.status = MatchStatus::Adjudicated(adjudicate_scheme(&ctx, &part_anchors, &inter));
    Ok(state)
}

/// Decides the winner from the settled intersection and the ascending chain
/// of entered-part anchors: anchors climbing an ω-segment are cofinal in
/// its high-ray, which is the captured point.
pub fn adjudicate_scheme(
    ctx: &SchemeCtx,
    part_anchors: &[NodeRef],
    inter: &BTreeSet<String>,
) -> Outcome {
    if inter.is_empty() {
        return Outcome::PlayerIWins {
            flags: vec!["empty-intersection".into()],
        };
    }
    let climbing = match part_anchors.last() {
        Some(NodeRef::Seg(s, i)) if ctx.scheme.segments.get(s) == Some(&SegKind::OmegaChain) => {
            part_anchors
                .iter()
                .any(|a| matches!(a, NodeRef::Seg(s2, j) if s2 == s && j < i))
                .then(|| s.clone())
        }
        _ => None,
    };
    if let Some(s) = climbing {
        let mut flags = Vec::new();
        if !inter.contains(&s) {
            return Outcome::PlayerIWins {
                flags: vec!["cofinal-ray-excluded".into()],
            };
        }
        let remainder: BTreeSet<String> = inter.iter().filter(|r| **r != s).cloned().collect();
        if !ctx.is_open(&remainder) {
            flags.push("remainder-not-open".into());
        }
        return Outcome::Capture {
            x: s,
            remainder,
            flags,
        };
    }
    // stabilized anchors: fall back to the unique-decomposition test
    let removable: Vec<&String> = inter
        .iter()
        .filter(|p| {
            let rest: BTreeSet<String> = inter.iter().filter(|q| q != p).cloned().collect();
            ctx.is_open(&rest)
        })
        .collect();
    if removable.len() == 1 {
        let x = removable[0].clone();
        let remainder = inter.iter().filter(|q| **q != x).cloned().collect();
        Outcome::Capture {
            x,
            remainder,
            flags: Vec::new(),
        }
    } else {
        Outcome::PlayerIWins {
            flags: vec!["ambiguous-decomposition".into()],
        }
    }
}

/// Winner of an explicit move sequence on a finite discrete ground: every
/// subset is open there, so the decomposition is unique exactly when the
/// intersection is a single point.
pub fn adjudicate_ground(points: &BTreeSet<String>, moves: &[BTreeSet<String>]) -> Outcome {
    let mut inter = points.clone();
    for m in moves {
        inter = inter.intersection(m).cloned().collect();
    }
    match inter.len() {
        0 => Outcome::PlayerIWins {
            flags: vec!["empty-intersection".into()],
        },
        1 => Outcome::Capture {
            x: inter.iter().next().unwrap().clone(),
            remainder: BTreeSet::new(),
            flags: Vec::new(),
        },
        _ => Outcome::PlayerIWins {
            flags: vec!["ambiguous-decomposition".into()],
        },
    }
}

/// A finite instantiation of a special subbase context: named subbasic sets
/// over named points, deduplicated extensionally, with the full space
/// guaranteed present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubbaseCtx {
    pub points: BTreeSet<String>,
    pub sets: BTreeMap<String, BTreeSet<String>>,
    /// Id of the set equal to the whole space.
    pub full: String,
}

impl SubbaseCtx {
    pub fn ground(
        points: BTreeSet<String>,
        sets: BTreeMap<String, BTreeSet<String>>,
    ) -> SubbaseCtx {
        let mut by_value: BTreeMap<BTreeSet<String>, String> = BTreeMap::new();
        for (id, s) in sets {
            by_value.entry(s).or_insert(id);
        }
        let full = by_value
            .entry(points.clone())
            .or_insert_with(|| "X".to_string())
            .clone();
        SubbaseCtx {
            points,
            sets: by_value.into_iter().map(|(v, id)| (id, v)).collect(),
            full,
        }
    }

    /// The subbase `{[t,∅]}` instantiated over the sampled rays of a scheme.
    pub fn from_scheme(t: &TreeScheme, cut: u32) -> (SubbaseCtx, SchemeCtx) {
        let ctx = SchemeCtx::new(t, cut);
        let points: BTreeSet<String> = ctx.rays.iter().cloned().collect();
        let mut sets = BTreeMap::new();
        for node in sample_nodes(&ctx.scheme, cut) {
            sets.insert(
                node.to_string(),
                ctx.members(&BasicOpen {
                    anchor: node,
                    excluded: BTreeSet::new(),
                }),
            );
        }
        (SubbaseCtx::ground(points, sets), ctx)
    }

    fn set(&self, id: &str) -> Result<&BTreeSet<String>, GameError> {
        self.sets
            .get(id)
            .ok_or_else(|| GameError::UnknownSet(id.to_string()))
    }

    fn rep(&self, value: &BTreeSet<String>) -> Option<String> {
        self.sets
            .iter()
            .find(|(_, v)| *v == value)
            .map(|(id, _)| id.clone())
    }
}

/// A basic open set `[U,F]` over a finite subbase context, with its
/// materialized membership.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TcOpen {
    pub u: String,
    pub f: BTreeSet<String>,
    pub members: BTreeSet<String>,
}

fn strict_subset(a: &BTreeSet<String>, b: &BTreeSet<String>) -> bool {
    a.is_subset(b) && a != b
}

/// Largest subbasic set strictly between `inner` and `bound`, if any;
/// otherwise `inner` itself (by its given id).
fn prime(
    ctx: &SubbaseCtx,
    inner_id: &str,
    inner: &BTreeSet<String>,
    bound: &BTreeSet<String>,
) -> String {
    ctx.sets
        .iter()
        .filter(|(_, v)| strict_subset(inner, v) && strict_subset(v, bound))
        .max_by_key(|(_, v)| v.len())
        .map(|(id, _)| id.clone())
        .unwrap_or_else(|| inner_id.to_string())
}

/// Disjoint parts from a nested family of anchor sets: each anchor keeps
/// what lies in no smaller anchor and in no excluded set inside it.
fn onion(ctx: &SubbaseCtx, anchors: &BTreeSet<String>, f: &BTreeSet<String>) -> Vec<TcOpen> {
    let mut parts = Vec::new();
    for w in anchors {
        let wset = &ctx.sets[w];
        let mut removed: Vec<&String> = anchors
            .iter()
            .filter(|a| *a != w && strict_subset(&ctx.sets[*a], wset))
            .collect();
        removed.extend(f.iter().filter(|b| ctx.sets[*b].is_subset(wset)));
        // keep only ⊆-maximal removed sets for the representation
        let maximal: BTreeSet<String> = removed
            .iter()
            .filter(|b| {
                !removed
                    .iter()
                    .any(|c| strict_subset(&ctx.sets[**b], &ctx.sets[*c]))
            })
            .map(|b| (*b).clone())
            .collect();
        let mut members = wset.clone();
        for b in &maximal {
            members = members.difference(&ctx.sets[b]).cloned().collect();
        }
        if !members.is_empty() {
            parts.push(TcOpen {
                u: w.clone(),
                f: maximal,
                members,
            });
        }
    }
    parts.sort();
    parts.dedup();
    parts
}

/// Partitions the basic open set `[U,F]` into basic open sets, selecting
/// among the four construction cases by whether every point of the target
/// sits in a subbasic set strictly inside `U`.
pub fn kprime_partition(
    ctx: &SubbaseCtx,
    u: &str,
    f: &BTreeSet<String>,
) -> Result<Vec<TcOpen>, GameError> {
    let uset = ctx.set(u)?.clone();
    // normalize F: drop exclusions disjoint from U, keep ⊆-maximal ones
    let mut kept: Vec<String> = Vec::new();
    for b in f {
        let bset = ctx.set(b)?;
        if uset.is_subset(bset) {
            return Ok(Vec::new());
        }
        if bset.intersection(&uset).next().is_some() {
            kept.push(b.clone());
        }
    }
    let f: BTreeSet<String> = kept
        .iter()
        .filter(|b| {
            !kept
                .iter()
                .any(|c| strict_subset(&ctx.sets[*b], &ctx.sets[c]))
        })
        .cloned()
        .collect();
    let mut members = uset.clone();
    for b in &f {
        members = members.difference(&ctx.sets[b]).cloned().collect();
    }
    if members.is_empty() {
        return Ok(Vec::new());
    }
    let bare: Vec<&String> = members
        .iter()
        .filter(|x| {
            !ctx.sets
                .values()
                .any(|v| strict_subset(v, &uset) && v.contains(*x))
        })
        .collect();
    match bare.len() {
        0 => {
            // every point has a proper subbasic home: cells are the maximal
            // ones, and each exclusion grows to its largest set inside its
            // cell
            let mut cells: BTreeSet<String> = BTreeSet::new();
            for x in &members {
                let cell = ctx
                    .sets
                    .iter()
                    .filter(|(_, v)| strict_subset(v, &uset) && v.contains(x))
                    .max_by_key(|(_, v)| v.len())
                    .map(|(id, _)| id.clone())
                    .expect("case-one point has a proper subbasic set");
                cells.insert(cell);
            }
            let mut anchors = cells.clone();
            for b in &f {
                let bset = &ctx.sets[b];
                let bound = cells
                    .iter()
                    .find(|c| bset.is_subset(&ctx.sets[*c]))
                    .map(|c| ctx.sets[c].clone());
                anchors.insert(match bound {
                    Some(bound) => prime(ctx, b, bset, &bound),
                    None => b.clone(),
                });
            }
            Ok(onion(ctx, &anchors, &f))
        }
        1 => {
            let x = bare[0].clone();
            let primes: BTreeSet<String> = f
                .iter()
                .map(|b| prime(ctx, b, &ctx.sets[b], &uset))
                .collect();
            let widened = f.iter().any(|b| !primes.contains(b));
            if widened {
                let mut anchors = primes;
                anchors.insert(u.to_string());
                Ok(onion(ctx, &anchors, &f))
            } else if members.len() == 1 {
                Ok(vec![TcOpen {
                    u: u.to_string(),
                    f,
                    members,
                }])
            } else {
                let y = members.iter().find(|p| **p != x).unwrap();
                let uy = ctx
                    .sets
                    .iter()
                    .filter(|(_, v)| strict_subset(v, &uset) && v.contains(y))
                    .max_by_key(|(_, v)| v.len())
                    .map(|(id, _)| id.clone())
                    .expect("non-captured point has a proper subbasic home");
                let rest: BTreeSet<String> =
                    members.difference(&ctx.sets[&uy]).cloned().collect();
                let mut f2 = f.clone();
                f2.insert(uy.clone());
                Ok(vec![
                    TcOpen {
                        u: uy.clone(),
                        f: BTreeSet::new(),
                        members: ctx.sets[&uy].clone(),
                    },
                    TcOpen {
                        u: u.to_string(),
                        f: f2,
                        members: rest,
                    },
                ])
            }
        }
        _ => Err(GameError::ContextUndecidable(format!(
            "{} points of [{u},F] lie in no proper subbasic set",
            bare.len()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TcNode {
    pub id: String,
    pub open: TcOpen,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub singleton: bool,
    /// Still splitting when the depth bound was reached.
    pub continuing: bool,
    /// For continuing nodes on a scheme context: the high-ray the branch is
    /// converging to, and the rays that survive the extrapolated limit.
    pub capture: Option<String>,
    pub remainder: BTreeSet<String>,
}

/// The strategy tree: basic open sets ordered by reverse inclusion, built
/// breadth-first to a depth bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tc {
    pub nodes: Vec<TcNode>,
    pub depth: u32,
}

enum TcChildren<'a> {
    /// Player I re-declares each part: children are its K′ cells.
    Trivial,
    /// Children come from K′ of every part of the canonical answer.
    Strategy(&'a SchemeCtx),
}

fn tc_children(
    ctx: &SubbaseCtx,
    mode: &TcChildren,
    node: &TcOpen,
) -> Result<Vec<TcOpen>, GameError> {
    let covers: Vec<(String, BTreeSet<String>)> = match mode {
        TcChildren::Trivial => vec![(node.u.clone(), node.f.clone())],
        TcChildren::Strategy(sctx) => {
            let anchor =
                parse_node(&node.u).map_err(|_| GameError::UnknownSet(node.u.clone()))?;
            let excluded = node
                .f
                .iter()
                .map(|x| parse_node(x).map_err(|_| GameError::UnknownSet(x.clone())))
                .collect::<Result<BTreeSet<NodeRef>, _>>()?;
            let cover = canonical_strategy(sctx, &BasicOpen { anchor, excluded })?;
            cover
                .parts
                .iter()
                .filter(|p| !sctx.members(p).is_empty())
                .map(|p| {
                    let u = ctx
                        .rep(&sctx.members(&BasicOpen {
                            anchor: p.anchor.clone(),
                            excluded: BTreeSet::new(),
                        }))
                        .ok_or_else(|| {
                            GameError::ContextUndecidable(format!(
                                "part anchor {} outside the sampled subbase",
                                p.anchor
                            ))
                        })?;
                    let mut f = BTreeSet::new();
                    for x in &p.excluded {
                        let xs = sctx.members(&BasicOpen {
                            anchor: x.clone(),
                            excluded: BTreeSet::new(),
                        });
                        if xs.intersection(&ctx.sets[&u]).next().is_none() {
                            continue;
                        }
                        f.insert(ctx.rep(&xs).ok_or_else(|| {
                            GameError::ContextUndecidable(format!(
                                "exclusion {x} outside the sampled subbase"
                            ))
                        })?);
                    }
                    Ok((u, f))
                })
                .collect::<Result<Vec<_>, GameError>>()?
        }
    };
    let mut out = Vec::new();
    for (u, f) in covers {
        out.extend(kprime_partition(ctx, &u, &f)?);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn build_tc(
    ctx: &SubbaseCtx,
    mode: TcChildren<'_>,
    depth: u32,
) -> Result<Tc, GameError> {
    let root = TcOpen {
        u: ctx.full.clone(),
        f: BTreeSet::new(),
        members: ctx.points.clone(),
    };
    let mut tc = Tc {
        nodes: vec![TcNode {
            id: "n0".into(),
            open: root,
            parent: None,
            children: Vec::new(),
            singleton: ctx.points.len() == 1,
            continuing: false,
            capture: None,
            remainder: BTreeSet::new(),
        }],
        depth,
    };
    let mut frontier = vec![0usize];
    for level in 0..depth {
        let mut next = Vec::new();
        for idx in frontier {
            if tc.nodes[idx].singleton {
                continue;
            }
            let children = tc_children(ctx, &mode, &tc.nodes[idx].open)?;
            // a node reproducing only itself cannot make progress
            if children.len() == 1 && children[0] == tc.nodes[idx].open {
                tc.nodes[idx].continuing = true;
                continue;
            }
            for child in children {
                let k = tc.nodes.len();
                let singleton = child.members.len() == 1;
                tc.nodes.push(TcNode {
                    id: format!("n{k}"),
                    open: child,
                    parent: Some(idx),
                    children: Vec::new(),
                    singleton,
                    continuing: false,
                    capture: None,
                    remainder: BTreeSet::new(),
                });
                tc.nodes[idx].children.push(k);
                next.push(k);
            }
        }
        frontier = next;
        if level + 1 == depth {
            for &idx in &frontier {
                if !tc.nodes[idx].singleton {
                    tc.nodes[idx].continuing = true;
                }
            }
        }
    }
    Ok(tc)
}

/// Builds the strategy tree over an explicit finite ground with a special
/// subbase; Player I explores every K′ cell.
pub fn build_tc_ground(ctx: &SubbaseCtx, depth: u32) -> Result<Tc, GameError> {
    build_tc(ctx, TcChildren::Trivial, depth)
}

/// Builds the strategy tree over the ray space of a scheme, playing the
/// canonical strategy; continuing branches are adjudicated symbolically.
pub fn build_tc_scheme(
    t: &TreeScheme,
    cut: u32,
    depth: u32,
) -> Result<(Tc, SubbaseCtx), GameError> {
    let (ctx, sctx) = SubbaseCtx::from_scheme(t, cut);
    let mut tc = build_tc(&ctx, TcChildren::Strategy(&sctx), depth)?;
    for node in &mut tc.nodes {
        if !node.continuing {
            continue;
        }
        let anchor =
            parse_node(&node.open.u).map_err(|_| GameError::UnknownSet(node.open.u.clone()))?;
        let NodeRef::Seg(s, _) = &anchor else {
            return Err(GameError::LimitNotComputable);
        };
        if sctx.scheme.segments.get(s) != Some(&SegKind::OmegaChain) {
            return Err(GameError::LimitNotComputable);
        }
        node.capture = Some(s.clone());
        // rays surviving the extrapolated limit pass through a top of the
        // captured ray's segment
        let tops: Vec<NodeRef> = sctx
            .scheme
            .tops()
            .into_iter()
            .filter(|(seg, _)| seg == s)
            .map(|(seg, k)| NodeRef::Top(seg, k))
            .collect();
        node.remainder = node
            .open
            .members
            .iter()
            .filter(|r| {
                *r != s && tops.iter().any(|x| ray_contains(&sctx.scheme, r, x))
            })
            .cloned()
            .collect();
    }
    Ok((tc, ctx))
}

/// Space shape read off a strategy tree: terminated singleton branches are
/// points, continuing branches are limits, and singletons splitting off
/// along a continuing branch form the converging sequence.
pub fn tc_descriptor(tc: &Tc) -> Result<SpaceDescriptor, GameError> {
    let mut d = SpaceDescriptor::default();
    let mut sequence_members: BTreeSet<String> = BTreeSet::new();
    for (i, node) in tc.nodes.iter().enumerate() {
        if !node.continuing {
            continue;
        }
        let x = node
            .capture
            .clone()
            .ok_or(GameError::LimitNotComputable)?;
        // singleton leaves hanging directly off this branch
        let mut spine: BTreeSet<usize> = BTreeSet::new();
        let mut cur = Some(i);
        while let Some(k) = cur {
            spine.insert(k);
            cur = tc.nodes[k].parent;
        }
        let side: Vec<&TcNode> = tc
            .nodes
            .iter()
            .filter(|n| {
                n.singleton && n.parent.map(|p| spine.contains(&p)).unwrap_or(false)
            })
            .collect();
        d.limits.insert(x.clone());
        if side.len() >= 2 {
            d.sequences.insert((format!("seq.{}", node.id), x.clone()));
            for n in side {
                sequence_members.insert(n.open.members.iter().next().unwrap().clone());
            }
        }
    }
    for node in &tc.nodes {
        if node.singleton && !node.continuing {
            let p = node.open.members.iter().next().unwrap();
            if !sequence_members.contains(p) && !d.limits.contains(p) {
                d.isolated.insert(p.clone());
            }
        }
    }
    Ok(d.canonicalize())
}

/// The strategy-tree node sets as a subbase family over the context's
/// points, for the special/completeness checks.
pub fn tc_family(ctx: &SubbaseCtx, tc: &Tc) -> crate::subbase::SubbaseFamily {
    crate::subbase::SubbaseFamily::Finite {
        points: ctx.points.clone(),
        sets: tc
            .nodes
            .iter()
            .map(|n| (n.id.clone(), n.open.members.clone()))
            .collect(),
        topology: None,
    }
}
