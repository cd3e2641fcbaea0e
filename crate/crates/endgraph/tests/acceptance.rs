//! End-to-end acceptance checks.  Each test prints one `criterion N: pass`
//! line (visible with `--nocapture`) and fails loudly otherwise.

use endgraph::corpus::{self, fixtures, schemes};
use endgraph::descriptor::homeomorphic;
use endgraph::endspace::{
    edge_end_classes, edge_end_space, end_classes, end_space, oracle_equivalent, Mode,
    DEFAULT_ORACLE_BUDGET,
};
use endgraph::game::{
    build_tc_ground, run_match, tc_descriptor, tc_family, MatchStatus, Outcome, PlayerIPolicy,
    SchemeCtx, SubbaseCtx,
};
use endgraph::ordertree::{
    high_rays, rayspace_descriptor, surgery_tprime, uniform_tgraph, Attach, NodeRef, SegKind,
    TreeScheme,
};
use endgraph::presentation::{GenKind, GraphPresentation};
use endgraph::subbase::{
    check_hereditary_completeness, check_special, Completeness, SubbaseFamily,
};
use endgraph::transform::{verify_correspondence, Direction, TransformError};
use endgraph::{descriptor::SpaceDescriptor, par};
use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

fn finish(criterion: u32, start: Instant, limit: Duration, detail: &str) {
    let elapsed = start.elapsed();
    println!(
        "criterion {criterion}: pass ({} ms{}{})",
        elapsed.as_millis(),
        if detail.is_empty() { "" } else { "; " },
        detail
    );
    assert!(
        elapsed < limit,
        "criterion {criterion} exceeded {limit:?} ({elapsed:?})"
    );
}

/// The eight fixed fixtures as presentations: the four graph fixtures plus
/// the uniform T-graphs of the four scheme fixtures.
fn eight_fixtures() -> Vec<(String, GraphPresentation)> {
    let mut out = vec![
        ("figure1".to_string(), fixtures::figure1()),
        ("single_ray".to_string(), fixtures::single_ray()),
        ("ladder_pair".to_string(), fixtures::ladder_pair()),
        ("comb".to_string(), fixtures::comb()),
    ];
    for (name, t) in [
        ("fork", schemes::fork()),
        ("omega2", schemes::omega2()),
        ("comb_tree", schemes::comb_tree()),
        ("example26", schemes::example26(3)),
    ] {
        out.push((format!("tgraph_{name}"), uniform_tgraph(&t).unwrap()));
    }
    out
}

fn full_presentation_corpus() -> Vec<(String, GraphPresentation)> {
    let mut out = eight_fixtures();
    for i in 0..100u64 {
        out.push((
            format!("seeded{i}"),
            corpus::seeded_presentation(7u64.wrapping_add(i)),
        ));
    }
    out
}

#[test]
fn criterion_01_figure1_end_counts() {
    let start = Instant::now();
    let p = fixtures::figure1();
    let ends = end_space(&p);
    assert_eq!(ends.isolated.len(), 2, "{ends:?}");
    assert!(ends.limits.is_empty() && ends.free_families.is_empty());
    let edge_ends = edge_end_space(&p);
    assert_eq!(edge_ends.isolated.len(), 1, "{edge_ends:?}");
    assert!(edge_ends.limits.is_empty() && edge_ends.free_families.is_empty());
    finish(1, start, Duration::from_secs(1), "2 ends, 1 edge-end");
}

#[test]
fn criterion_02_expansion_homeomorphism() {
    let start = Instant::now();
    let items = full_presentation_corpus();
    assert_eq!(items.len(), 108);
    let failures: Vec<String> = par::map_items(items, |(name, p)| {
        match verify_correspondence(&p, Direction::Rho) {
            Ok(r) if r.pass => None,
            Ok(r) => Some(format!("{name}: {:?}", r.flags)),
            Err(e) => Some(format!("{name}: {e}")),
        }
    })
    .into_iter()
    .flatten()
    .collect();
    assert!(failures.is_empty(), "{failures:?}");
    finish(2, start, Duration::from_secs(30), "108/108");
}

#[test]
fn criterion_03_duplication_homeomorphism() {
    let start = Instant::now();
    match verify_correspondence(&fixtures::figure1(), Direction::Tau) {
        Err(TransformError::PreconditionViolated { .. }) => {}
        other => panic!("figure1 must be rejected, got {other:?}"),
    }
    let items = full_presentation_corpus();
    let mut qualifying = 0usize;
    let mut failures = Vec::new();
    for (name, pass) in par::map_items(items, |(name, p)| {
        let verdict = match verify_correspondence(&p, Direction::Tau) {
            Ok(r) => Some(r.pass),
            Err(TransformError::PreconditionViolated { .. }) => None,
            Err(_) => Some(false),
        };
        (name, verdict)
    }) {
        match pass {
            Some(true) => qualifying += 1,
            Some(false) => failures.push(name),
            None => {}
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
    assert!(qualifying > 0);
    finish(
        3,
        start,
        Duration::from_secs(30),
        &format!("{qualifying} qualifying members"),
    );
}

#[test]
fn criterion_04_oracle_agreement() {
    let start = Instant::now();
    let items = full_presentation_corpus();
    let disagreements: Vec<String> = par::map_items(items, |(name, p)| {
        let vertex_table = end_classes(&p);
        let edge_table = edge_end_classes(&p);
        let rays: Vec<&String> = p
            .generators
            .iter()
            .filter(|(_, k)| **k == GenKind::Ray)
            .map(|(g, _)| g)
            .collect();
        let mut bad = Vec::new();
        for (i, a) in rays.iter().enumerate() {
            for b in &rays[i + 1..] {
                for (mode, table) in [(Mode::Vertex, &vertex_table), (Mode::Edge, &edge_table)] {
                    match oracle_equivalent(&p, a, b, mode, 3, DEFAULT_ORACLE_BUDGET) {
                        Ok(v) if v == (table[*a] == table[*b]) => {}
                        other => bad.push(format!("{name}: {a}/{b} {mode:?}: {other:?}")),
                    }
                }
            }
        }
        bad
    })
    .into_iter()
    .flatten()
    .collect();
    assert!(disagreements.is_empty(), "{disagreements:?}");
    finish(4, start, Duration::from_secs(30), "108/108 members agree");
}

#[test]
fn criterion_05_node_families_are_special() {
    let start = Instant::now();
    let trees = corpus::scheme_corpus(7, 50);
    assert!(trees.len() >= 50);
    let failures: Vec<String> = par::map_items(trees, |(name, t)| {
        match check_special(&SubbaseFamily::SchemeRaySpace { scheme: t, cut: 4 }) {
            Ok(r) if r.pass() => None,
            Ok(r) => Some(format!("{name}: {r:?}")),
            Err(e) => Some(format!("{name}: {e}")),
        }
    })
    .into_iter()
    .flatten()
    .collect();
    assert!(failures.is_empty(), "{failures:?}");
    finish(5, start, Duration::from_secs(30), "50/50 trees");
}

#[test]
fn criterion_06_canonical_strategy_wins_matches() {
    let start = Instant::now();
    let mut jobs: Vec<(String, TreeScheme, PlayerIPolicy)> = Vec::new();
    let mut i = 0u64;
    while jobs.len() < 200 {
        let (name, t) = &corpus::scheme_corpus(7, 40)[(i % 40) as usize];
        let rays = SchemeCtx::new(t, 4).rays;
        if rays.is_empty() {
            i += 1;
            continue;
        }
        for ray in &rays {
            jobs.push((
                name.clone(),
                t.clone(),
                PlayerIPolicy::Descend { ray: ray.clone() },
            ));
        }
        jobs.push((name.clone(), t.clone(), PlayerIPolicy::Random { seed: i }));
        jobs.push((
            name.clone(),
            t.clone(),
            PlayerIPolicy::Oscillate {
                target: rays[(i as usize) % rays.len()].clone(),
                script: "dhdh".into(),
            },
        ));
        i += 1;
    }
    jobs.truncate(200);
    let failures: Vec<String> = par::map_items(jobs, |(name, t, policy)| {
        match run_match(&t, &policy, 6) {
            Ok(state) => match state.status {
                MatchStatus::Adjudicated(Outcome::Capture { ref flags, .. })
                    if flags.is_empty() =>
                {
                    None
                }
                other => Some(format!("{name}: {policy:?}: {other:?}")),
            },
            Err(e) => Some(format!("{name}: {policy:?}: {e}")),
        }
    })
    .into_iter()
    .flatten()
    .collect();
    assert!(failures.is_empty(), "{failures:?}");
    finish(6, start, Duration::from_secs(60), "200/200 matches");
}

#[test]
fn criterion_07_rayspace_matches_tgraph_ends() {
    let start = Instant::now();
    let trees = corpus::scheme_corpus(7, 50);
    let failures: Vec<String> = par::map_items(trees, |(name, t)| {
        let d1 = rayspace_descriptor(&t).map_err(|e| e.to_string());
        let d2 = uniform_tgraph(&t)
            .map(|p| end_space(&p))
            .map_err(|e| e.to_string());
        match (d1, d2) {
            (Ok(d1), Ok(d2)) if homeomorphic(&d1, &d2) => None,
            other => Some(format!("{name}: {other:?}")),
        }
    })
    .into_iter()
    .flatten()
    .collect();
    assert!(failures.is_empty(), "{failures:?}");
    finish(7, start, Duration::from_secs(30), "50/50 trees");
}

/// A base ω-chain with `m` segments attached at its top, plus the supplied
/// pattern map grouping them.
fn top_bouquet(m: usize, patterns: &[u32]) -> (TreeScheme, BTreeMap<String, BTreeSet<NodeRef>>) {
    let mut t = TreeScheme::single("s0", SegKind::OmegaChain);
    let mut n_map = BTreeMap::new();
    for j in 0..m {
        let id = format!("c{j}");
        let kind = if j % 2 == 0 {
            SegKind::OmegaChain
        } else {
            SegKind::FiniteChain(2)
        };
        t.segments.insert(id.clone(), kind);
        t.attach.insert(id.clone(), Attach::Top("s0".into(), 0));
        let i = patterns[j % patterns.len()];
        n_map.insert(id, BTreeSet::from([NodeRef::Seg("s0".into(), i)]));
    }
    (t, n_map)
}

#[test]
fn criterion_08_surgery_preserves_the_ray_space() {
    let start = Instant::now();
    let mut cases: Vec<(String, TreeScheme, BTreeMap<String, BTreeSet<NodeRef>>)> = Vec::new();
    for m in 1..=5usize {
        for (pi, patterns) in [vec![0], vec![0, 1], vec![2], vec![0, 1, 3]]
            .iter()
            .enumerate()
        {
            cases.push((format!("bouquet{m}p{pi}"), top_bouquet(m, patterns).0, {
                top_bouquet(m, patterns).1
            }));
        }
    }
    assert!(cases.len() >= 20);
    cases.truncate(20);
    for (name, t, n_map) in cases {
        let t2 = surgery_tprime(&t, &n_map).unwrap_or_else(|e| panic!("{name}: {e}"));
        let d1 = rayspace_descriptor(&t).unwrap();
        let d2 = rayspace_descriptor(&t2).unwrap();
        assert!(homeomorphic(&d1, &d2), "{name}: {d1:?} vs {d2:?}");
    }
    finish(8, start, Duration::from_secs(30), "20/20 maps");
}

#[test]
fn criterion_09_strategy_tree_soundness() {
    let start = Instant::now();
    let failures: Vec<String> = par::map_items((0..25u64).collect::<Vec<_>>(), |seed| {
        let (points, sets) = corpus::seeded_ground(seed);
        let n = points.len() as u32;
        let ctx = SubbaseCtx::ground(points.clone(), sets);
        let tc = match build_tc_ground(&ctx, n + 3) {
            Ok(tc) => tc,
            Err(e) => return Some(format!("ground{seed}: {e}")),
        };
        let family = tc_family(&ctx, &tc);
        match check_special(&family) {
            Ok(r) if r.pass() => {}
            other => return Some(format!("ground{seed}: special {other:?}")),
        }
        match check_hereditary_completeness(&family) {
            Ok(Completeness::Pass) => {}
            other => return Some(format!("ground{seed}: completeness {other:?}")),
        }
        let expected = SpaceDescriptor {
            isolated: points,
            ..SpaceDescriptor::default()
        };
        match tc_descriptor(&tc) {
            Ok(d) if d == expected.canonicalize() => None,
            other => Some(format!("ground{seed}: descriptor {other:?}")),
        }
    })
    .into_iter()
    .flatten()
    .collect();
    assert!(failures.is_empty(), "{failures:?}");
    finish(9, start, Duration::from_secs(30), "25/25 grounds");
}

#[test]
fn criterion_10_uncountability_declared() {
    let start = Instant::now();
    // The truncated binary tree at depth d carries 2^d high-rays; the full
    // tree's branch set therefore outgrows every countable enumeration.
    // This is reported structurally — no metrizability verdict is computed
    // or claimed at this scale.
    for d in 1..=6u32 {
        let t = schemes::example26(d);
        assert_eq!(high_rays(&t).len(), 1usize << d, "depth {d}");
    }
    println!(
        "report: the depth-d truncation has 2^d branches for every checked d; \
         the untruncated tree has uncountably many branches (one per infinite \
         0/1 word); metrizability of the associated spaces is not decided here"
    );
    finish(
        10,
        start,
        Duration::from_secs(10),
        "non-reproducible content declared, no metrizability verdict",
    );
}
