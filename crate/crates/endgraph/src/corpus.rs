//! Fixed fixtures and seeded random instances used by the test suites and
//! the `corpus` CLI verb.

use crate::presentation::{Fan, GenKind, GraphPresentation, Support, VTok};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hand-written presentations and tree schemes exercised by every suite.
pub mod fixtures {
    use super::*;

    /// Two rays sharing an origin, plus a vertex adjacent to infinitely many
    /// vertices of both: two ends, one edge-end.
    pub fn figure1() -> GraphPresentation {
        let mut p = GraphPresentation::default();
        p.core.insert("v0".into());
        p.core.insert("vinf".into());
        p.generators.insert("r+".into(), GenKind::Ray);
        p.generators.insert("r-".into(), GenKind::Ray);
        p.finite_edges.insert(GraphPresentation::edge(
            VTok::Core("v0".into()),
            VTok::Gen("r+".into(), 0),
        ));
        p.finite_edges.insert(GraphPresentation::edge(
            VTok::Core("v0".into()),
            VTok::Gen("r-".into(), 0),
        ));
        for g in ["r+", "r-"] {
            p.fans.insert(Fan {
                vertex: "vinf".into(),
                generator: g.into(),
                support: Support::Omega,
            });
        }
        p
    }

    /// A single ray: one end, one edge-end.
    pub fn single_ray() -> GraphPresentation {
        let mut p = GraphPresentation::default();
        p.generators.insert("r".into(), GenKind::Ray);
        p
    }

    /// Two rays joined by all rungs `r[i]–s[i]`: one end.
    pub fn ladder_pair() -> GraphPresentation {
        let mut p = GraphPresentation::default();
        p.generators.insert("r".into(), GenKind::Ray);
        p.generators.insert("s".into(), GenKind::Ray);
        p.ladders.insert(GraphPresentation::ladder("r", "s"));
        p
    }

    /// A base ray with a pendant ray hanging off every vertex: the pendant
    /// ends form a sequence converging to the base end.
    pub fn comb() -> GraphPresentation {
        let mut p = GraphPresentation::default();
        p.generators.insert("base".into(), GenKind::Ray);
        p.combs.insert(("base".into(), "teeth".into()));
        p
    }
}

/// Hand-written order-tree schemes.
pub mod schemes {
    use crate::ordertree::{Attach, Family, SegKind, TreeScheme};

    /// A finite stem with two ω-chains above it: two incomparable high-rays.
    pub fn fork() -> TreeScheme {
        let mut t = TreeScheme::single("base", SegKind::FiniteChain(1));
        t.segments.insert("left".into(), SegKind::OmegaChain);
        t.segments.insert("right".into(), SegKind::OmegaChain);
        t.attach.insert("left".into(), Attach::At("base".into(), 0));
        t.attach.insert("right".into(), Attach::At("base".into(), 0));
        t
    }

    /// An ω-chain, a limit node above it, and a second ω-chain on top:
    /// order type ω·2.
    pub fn omega2() -> TreeScheme {
        let mut t = TreeScheme::single("s0", SegKind::OmegaChain);
        t.segments.insert("s1".into(), SegKind::OmegaChain);
        t.attach.insert("s1".into(), Attach::Top("s0".into(), 0));
        t
    }

    /// A base ω-chain with one pendant ω-chain per node: the pendant rays
    /// converge to the base ray.
    pub fn comb_tree() -> TreeScheme {
        let mut t = TreeScheme::single("base", SegKind::OmegaChain);
        t.families.insert(
            "teeth".into(),
            Family {
                base: "base".into(),
                fragment: TreeScheme::single("p", SegKind::OmegaChain),
            },
        );
        t
    }

    /// A binary tree of depth `d` with an ω-chain at each of the `2^d`
    /// leaves and a top above each chain (witnessed by a one-node child).
    /// Finite stand-in for the tree whose full version has uncountably many
    /// branches.
    pub fn example26(d: u32) -> TreeScheme {
        let mut t = TreeScheme::single("b".into(), SegKind::FiniteChain(1));
        let mut frontier = vec!["b".to_string()];
        for _ in 0..d {
            let mut next = Vec::new();
            for parent in frontier {
                for bit in ["0", "1"] {
                    let id = format!("{parent}{bit}");
                    t.segments.insert(id.clone(), SegKind::FiniteChain(1));
                    t.attach.insert(id.clone(), Attach::At(parent.clone(), 0));
                    next.push(id);
                }
            }
            frontier = next;
        }
        for leaf in frontier {
            let ray = format!("{leaf}.r");
            let wit = format!("{leaf}.w");
            t.segments.insert(ray.clone(), SegKind::OmegaChain);
            t.attach.insert(ray.clone(), Attach::At(leaf.clone(), 0));
            t.segments.insert(wit.clone(), SegKind::FiniteChain(1));
            t.attach.insert(wit, Attach::Top(ray, 0));
        }
        t
    }
}

/// Deterministic small random tree schemes: at most 6 segments, families
/// restricted to single ω-chain fragments (nesting depth ≤ 2).
pub fn seeded_scheme(seed: u64) -> crate::ordertree::TreeScheme {
    use crate::ordertree::{Attach, Family, SegKind, TreeScheme};
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(seed));
    let n_seg = rng.gen_range(1..=6usize);
    let mut t = TreeScheme::single(
        "s0",
        if rng.gen_bool(0.7) {
            SegKind::OmegaChain
        } else {
            SegKind::FiniteChain(rng.gen_range(1..=4))
        },
    );
    for i in 1..n_seg {
        let id = format!("s{i}");
        let kind = if rng.gen_bool(0.6) {
            SegKind::OmegaChain
        } else {
            SegKind::FiniteChain(rng.gen_range(1..=4))
        };
        // attach under an already-present segment
        let parents: Vec<(String, SegKind)> =
            t.segments.iter().map(|(s, k)| (s.clone(), *k)).collect();
        let (p, pk) = parents[rng.gen_range(0..parents.len())].clone();
        let att = match pk {
            SegKind::OmegaChain if rng.gen_bool(0.4) => Attach::Top(p, rng.gen_range(0..2)),
            SegKind::OmegaChain => Attach::At(p, rng.gen_range(0..4)),
            SegKind::FiniteChain(len) => Attach::At(p, rng.gen_range(0..len)),
        };
        t.segments.insert(id.clone(), kind);
        t.attach.insert(id, att);
    }
    let omega_segs: Vec<String> = t
        .segments
        .iter()
        .filter(|(_, k)| **k == SegKind::OmegaChain)
        .map(|(s, _)| s.clone())
        .collect();
    if !omega_segs.is_empty() && rng.gen_bool(0.5) {
        let base = omega_segs[rng.gen_range(0..omega_segs.len())].clone();
        t.families.insert(
            "fam".into(),
            Family {
                base,
                fragment: TreeScheme::single("p", SegKind::OmegaChain),
            },
        );
    }
    debug_assert_eq!(t.validate(), Ok(()));
    t
}

/// The standard scheme corpus: fixed scheme fixtures followed by seeded
/// instances up to `n` members total.
pub fn scheme_corpus(seed: u64, n: usize) -> Vec<(String, crate::ordertree::TreeScheme)> {
    let mut out: Vec<(String, crate::ordertree::TreeScheme)> = vec![
        ("fork".into(), schemes::fork()),
        ("omega2".into(), schemes::omega2()),
        ("comb_tree".into(), schemes::comb_tree()),
        ("example26".into(), schemes::example26(3)),
    ];
    let mut i = 0u64;
    while out.len() < n {
        out.push((format!("seeded{i}"), seeded_scheme(seed.wrapping_add(i))));
        i += 1;
    }
    out.truncate(n);
    out
}

/// Deterministic small random presentations: at most 6 core vertices and 6
/// generators, finite indices bounded by 3 so depth-bounded separator
/// oracles see past every declared finite attachment.
pub fn seeded_presentation(seed: u64) -> GraphPresentation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = GraphPresentation::default();
    let n_core = rng.gen_range(1..=6usize);
    let n_gen = rng.gen_range(1..=6usize);
    for i in 0..n_core {
        p.core.insert(format!("v{i}"));
    }
    for i in 0..n_gen {
        let kind = if rng.gen_bool(0.25) {
            GenKind::Clique
        } else {
            GenKind::Ray
        };
        p.generators.insert(format!("g{i}"), kind);
    }
    let core: Vec<String> = p.core.iter().cloned().collect();
    let gens: Vec<String> = p.generators.keys().cloned().collect();
    let rays: Vec<String> = p
        .generators
        .iter()
        .filter(|(_, k)| **k == GenKind::Ray)
        .map(|(g, _)| g.clone())
        .collect();
    for _ in 0..rng.gen_range(0..=4usize) {
        let u = random_tok(&mut rng, &core, &gens);
        let v = random_tok(&mut rng, &core, &gens);
        if u != v {
            p.finite_edges.insert(GraphPresentation::edge(u, v));
        }
    }
    for _ in 0..rng.gen_range(0..=3usize) {
        let v = core.choose(&mut rng).unwrap().clone();
        let g = gens.choose(&mut rng).unwrap().clone();
        let support = if rng.gen_bool(0.6) {
            Support::Omega
        } else {
            let mut ixs = std::collections::BTreeSet::new();
            for _ in 0..rng.gen_range(1..=3usize) {
                ixs.insert(rng.gen_range(0..=3u32));
            }
            Support::Finite(ixs)
        };
        p.fans.insert(Fan {
            vertex: v,
            generator: g,
            support,
        });
    }
    if gens.len() >= 2 {
        for _ in 0..rng.gen_range(0..=2usize) {
            let g = gens.choose(&mut rng).unwrap();
            let h = gens.choose(&mut rng).unwrap();
            if g != h {
                p.ladders.insert(GraphPresentation::ladder(g, h));
            }
        }
    }
    if !rays.is_empty() && rng.gen_bool(0.4) {
        let base = rays.choose(&mut rng).unwrap().clone();
        p.combs.insert((base, "fam0".into()));
    }
    debug_assert!(p.validate().is_empty());
    p
}

fn random_tok(rng: &mut ChaCha8Rng, core: &[String], gens: &[String]) -> VTok {
    if rng.gen_bool(0.5) {
        VTok::Core(core.choose(rng).unwrap().clone())
    } else {
        VTok::Gen(gens.choose(rng).unwrap().clone(), rng.gen_range(0..=3u32))
    }
}

/// Deterministic laminar subbase over at most 12 named points: every block
/// either splits fully into sub-blocks or leaves exactly one point bare, so
/// the family is nested, separating, and σ-disjoint.
pub fn seeded_ground(
    seed: u64,
) -> (
    std::collections::BTreeSet<String>,
    std::collections::BTreeMap<String, std::collections::BTreeSet<String>>,
) {
    use std::collections::{BTreeMap, BTreeSet};
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0xd1b5_4a33).wrapping_add(7));
    let n = rng.gen_range(2..=12usize);
    let points: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut counter = 0usize;
    fn split(
        block: &[String],
        rng: &mut ChaCha8Rng,
        sets: &mut BTreeMap<String, BTreeSet<String>>,
        counter: &mut usize,
    ) {
        if block.len() == 1 {
            let id = format!("u{}", *counter);
            *counter += 1;
            sets.insert(id, block.iter().cloned().collect());
            return;
        }
        let mut rest: Vec<String> = block.to_vec();
        if rng.gen_bool(0.4) {
            // leave one point bare in this block
            let bare = rng.gen_range(0..rest.len());
            rest.remove(bare);
        }
        let k = if rest.len() < 2 {
            1
        } else {
            rng.gen_range(2..=3usize.min(rest.len()))
        };
        let mut blocks: Vec<Vec<String>> = vec![Vec::new(); k];
        for (i, p) in rest.into_iter().enumerate() {
            blocks[i % k].push(p);
        }
        for b in blocks.into_iter().filter(|b| !b.is_empty()) {
            let id = format!("u{}", *counter);
            *counter += 1;
            sets.insert(id, b.iter().cloned().collect());
            if b.len() > 1 {
                split(&b, rng, sets, counter);
            }
        }
    }
    split(&points, &mut rng, &mut sets, &mut counter);
    (points.into_iter().collect(), sets)
}

/// The standard presentation corpus: the fixed presentation fixtures followed
/// by seeded instances up to `n` members total.
pub fn presentation_corpus(seed: u64, n: usize) -> Vec<(String, GraphPresentation)> {
    let mut out: Vec<(String, GraphPresentation)> = vec![
        ("figure1".into(), fixtures::figure1()),
        ("single_ray".into(), fixtures::single_ray()),
        ("ladder_pair".into(), fixtures::ladder_pair()),
        ("comb".into(), fixtures::comb()),
    ];
    let mut i = 0u64;
    while out.len() < n {
        out.push((format!("seeded{i}"), seeded_presentation(seed.wrapping_add(i))));
        i += 1;
    }
    out.truncate(n);
    out
}
