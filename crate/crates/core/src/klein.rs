//! Tight-set verification for line sets, in the Klein correspondence view.
//!
//! Under the Pluecker map, lines of PG(3,q) become points of the Klein
//! quadric and two lines meet exactly when their images are conjugate, so a
//! Cameron-Liebler line class with parameter x is the same thing as an
//! x-tight set of the quadric. The verifier counts, for every line l, the
//! members of the set meeting l (l itself included when it belongs to the
//! set) and compares against the two admissible values
//!
//!   x(q+1) + q^2   for members,      x(q+1)   for outsiders.
//!
//! Counts come from the linear star-sum identity; the quadratic all-pairs
//! scan is kept as an independent oracle and cross-checked in the tests.

use rayon::prelude::*;

use crate::bitset::BitSet;
use crate::geometry::{Geometry, LineId};

/// For every line, the number of set members meeting it, where a member
/// meets itself. Linear in the set size: a member m is seen by l at each
/// shared point, and m = l is seen q+1 times, so subtracting q corrects
/// the self count to one.
pub fn meeting_counts(geo: &Geometry, s: &BitSet) -> Vec<u64> {
    let q = geo.field().q() as u64;
    let star = geo.star_counts(s);
    (0..geo.n_lines() as LineId)
        .map(|l| {
            let sum: u64 = geo
                .points_on_line(l)
                .iter()
                .map(|&p| star[p as usize] as u64)
                .sum();
            if s.contains(l as usize) {
                sum - q
            } else {
                sum
            }
        })
        .collect()
}

/// Quadratic reference implementation of [`meeting_counts`].
pub fn meeting_counts_oracle(geo: &Geometry, s: &BitSet) -> Vec<u64> {
    (0..geo.n_lines() as LineId)
        .map(|l| {
            s.iter_ones()
                .filter(|&m| geo.lines_meet(l, m as LineId))
                .count() as u64
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TightReport {
    pub size: usize,
    /// x with |set| = x (q^2+q+1), when the size divides evenly.
    pub parameter: Option<u64>,
    pub member_value: u64,
    pub outside_value: u64,
    pub is_tight: bool,
    /// Up to eight (line, got, want) witnesses when not tight.
    pub violations: Vec<(LineId, u64, u64)>,
}

/// Decides whether a line set is an x-tight set / Cameron-Liebler class.
pub fn verify_tight(geo: &Geometry, s: &BitSet) -> TightReport {
    assert_eq!(s.len(), geo.n_lines(), "line-set universe mismatch");
    let q = geo.field().q() as u64;
    let modulus = q * q + q + 1;
    let size = s.count();
    if size as u64 % modulus != 0 {
        return TightReport {
            size,
            parameter: None,
            member_value: 0,
            outside_value: 0,
            is_tight: false,
            violations: Vec::new(),
        };
    }
    let x = size as u64 / modulus;
    let member_value = x * (q + 1) + q * q;
    let outside_value = x * (q + 1);
    let star = geo.star_counts(s);
    let mut violations: Vec<(LineId, u64, u64)> = (0..geo.n_lines() as LineId)
        .into_par_iter()
        .filter_map(|l| {
            let sum: u64 = geo
                .points_on_line(l)
                .iter()
                .map(|&p| star[p as usize] as u64)
                .sum();
            let (got, want) = if s.contains(l as usize) {
                (sum - q, member_value)
            } else {
                (sum, outside_value)
            };
            (got != want).then_some((l, got, want))
        })
        .collect();
    violations.par_sort_unstable();
    violations.truncate(8);
    TightReport {
        size,
        parameter: Some(x),
        member_value,
        outside_value,
        is_tight: violations.is_empty(),
        violations,
    }
}
