use alloc::collections::BTreeSet;
use alloc::format;

use crate::error::{Error, Result};

/// Signatures the ambient space may have when a Frobenius manifold with
/// metric of signature `2s - N` is realized as a k-potential submanifold with
/// `p` extra normals: `(2s - N)(2r - k + 1) + 2t - p` over `0 ≤ r ≤ k`,
/// `0 ≤ t ≤ p`. Never empty.
pub fn admissible_signatures(n: usize, s: usize, k: usize, p: usize) -> Result<BTreeSet<i64>> {
    if s > n {
        return Err(Error::Precondition(format!(
            "positive inertia index {s} exceeds dimension {n}"
        )));
    }
    let base = 2 * s as i64 - n as i64;
    let (k, p) = (k as i64, p as i64);
    let mut out = BTreeSet::new();
    for r in 0..=k {
        for t in 0..=p {
            out.insert(base * (2 * r - k + 1) + 2 * t - p);
        }
    }
    Ok(out)
}
