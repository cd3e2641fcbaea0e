//! Canonical finite descriptions of countable rank-≤1 topological spaces.
//!
//! A [`SpaceDescriptor`] records finitely many isolated points, finitely many
//! limit points each with at least one ω-sequence of isolated points
//! converging to it, and finitely many free ω-families (isolated points with
//! no limit in the space).  Two descriptors describe homeomorphic spaces
//! exactly when their canonical forms agree in the three cardinalities
//! (limits, free families, isolated non-sequence points).

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    /// Named isolated points that are not members of any sequence.
    pub isolated: BTreeSet<String>,
    /// Named limit points.
    pub limits: BTreeSet<String>,
    /// (family id, limit point id): an ω-sequence of distinct isolated points
    /// converging to the limit.
    pub sequences: BTreeSet<(String, String)>,
    /// ω-families of isolated points with no limit in the space.
    pub free_families: BTreeSet<String>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DescriptorError {
    #[error("point {0:?} is declared both isolated and a limit")]
    IsolatedLimitOverlap(String),
    #[error("sequence family {family:?} converges to undeclared limit {limit:?}")]
    DanglingLimit { family: String, limit: String },
    #[error("limit {0:?} has no converging sequence")]
    LimitWithoutSequence(String),
}

impl SpaceDescriptor {
    pub fn validate(&self) -> Result<(), DescriptorError> {
        if let Some(p) = self.isolated.intersection(&self.limits).next() {
            return Err(DescriptorError::IsolatedLimitOverlap(p.clone()));
        }
        for (family, limit) in &self.sequences {
            if !self.limits.contains(limit) {
                return Err(DescriptorError::DanglingLimit {
                    family: family.clone(),
                    limit: limit.clone(),
                });
            }
        }
        for l in &self.limits {
            if !self.sequences.iter().any(|(_, lim)| lim == l) {
                return Err(DescriptorError::LimitWithoutSequence(l.clone()));
            }
        }
        Ok(())
    }

    /// Merges all sequences sharing a limit into one (interleaving two
    /// convergent sequences of isolated points yields a single convergent
    /// sequence).  The surviving family id is the lexicographically smallest
    /// of the merged ones.
    pub fn canonicalize(&self) -> SpaceDescriptor {
        let mut per_limit: BTreeMap<&String, BTreeSet<&String>> = BTreeMap::new();
        for (family, limit) in &self.sequences {
            per_limit.entry(limit).or_default().insert(family);
        }
        let sequences = per_limit
            .iter()
            .map(|(limit, families)| {
                let keep = families.iter().next().expect("nonempty by construction");
                ((*keep).clone(), (*limit).clone())
            })
            .collect();
        SpaceDescriptor {
            isolated: self.isolated.clone(),
            limits: self.limits.clone(),
            sequences,
            free_families: self.free_families.clone(),
        }
    }

    /// The homeomorphism invariant of the canonical form:
    /// (#limits, #free families, #isolated non-sequence points).
    pub fn signature(&self) -> (usize, usize, usize) {
        let c = self.canonicalize();
        (c.limits.len(), c.free_families.len(), c.isolated.len())
    }
}

/// Descriptor-level homeomorphism: canonical forms agree in the number of
/// limit points, free families, and isolated non-sequence points.
pub fn homeomorphic(d1: &SpaceDescriptor, d2: &SpaceDescriptor) -> bool {
    d1.signature() == d2.signature()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desc(
        isolated: &[&str],
        limits: &[&str],
        sequences: &[(&str, &str)],
        free: &[&str],
    ) -> SpaceDescriptor {
        SpaceDescriptor {
            isolated: isolated.iter().map(|s| s.to_string()).collect(),
            limits: limits.iter().map(|s| s.to_string()).collect(),
            sequences: sequences
                .iter()
                .map(|(f, l)| (f.to_string(), l.to_string()))
                .collect(),
            free_families: free.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn two_sequences_to_same_limit_merge() {
        let d = desc(&[], &["l"], &[("f1", "l"), ("f2", "l")], &[]);
        let c = d.canonicalize();
        assert_eq!(c.sequences.len(), 1);
        assert_eq!(
            c.sequences.iter().next().unwrap(),
            &("f1".to_string(), "l".to_string())
        );
    }

    #[test]
    fn homeomorphic_counts_only() {
        let a = desc(&["p", "q"], &[], &[], &[]);
        let b = desc(&["x", "y"], &[], &[], &[]);
        assert!(homeomorphic(&a, &b));
        let c = desc(&["x"], &["l"], &[("f", "l")], &[]);
        assert!(!homeomorphic(&a, &c));
    }

    #[test]
    fn one_limit_plus_sequence_differs_from_two_isolated() {
        let a = desc(&[], &["l"], &[("f", "l")], &[]);
        let b = desc(&["x", "y"], &[], &[], &[]);
        assert!(!homeomorphic(&a, &b));
    }

    #[test]
    fn validate_flags_limit_without_sequence() {
        let d = desc(&[], &["l"], &[], &[]);
        assert_eq!(
            d.validate(),
            Err(DescriptorError::LimitWithoutSequence("l".into()))
        );
    }

    #[test]
    fn homeomorphic_is_equivalence_on_samples() {
        let samples = [
            desc(&[], &[], &[], &[]),
            desc(&["a"], &[], &[], &[]),
            desc(&["a", "b"], &[], &[], &[]),
            desc(&["a"], &["l"], &[("f", "l")], &[]),
            desc(&[], &["l"], &[("f", "l"), ("g", "l")], &["h"]),
        ];
        for d in &samples {
            assert!(homeomorphic(d, d));
        }
        for a in &samples {
            for b in &samples {
                assert_eq!(homeomorphic(a, b), homeomorphic(b, a));
                for c in &samples {
                    if homeomorphic(a, b) && homeomorphic(b, c) {
                        assert!(homeomorphic(a, c));
                    }
                }
            }
        }
    }
}
