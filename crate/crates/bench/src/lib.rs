//! Shared parameter sets for the criterion benches.

/// `(r, c1, c2)` triples in the non-degenerate region.
pub const PARAMS: &[(f64, f64, f64)] = &[(10.0, 0.5, 1.0), (20.0, 1.0, 4.0), (5.0, 0.5, 0.6)];
