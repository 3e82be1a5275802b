use alloc::vec::Vec;

use crate::party::PartyId;

/// Colluder pairs `(i, j)` with `i > j` that sit far enough apart to split the
/// circle into two honest groups of nearly equal size.
pub fn strategy1_positions(n: usize) -> Vec<(PartyId, PartyId)> {
    let gaps: Vec<usize> = if n.is_multiple_of(2) { alloc::vec![n / 2] } else { alloc::vec![n / 2, n.div_ceil(2)] };
    let mut out = Vec::new();
    for i in 2..=n {
        for j in 1..i {
            if gaps.contains(&(i - j)) {
                out.push((PartyId::from_slot(i - 1), PartyId::from_slot(j - 1)));
            }
        }
    }
    out
}

/// The single honest party sandwiched between colluders `i` and `j`, if they
/// sit exactly two seats apart around the circle.
pub fn strategy2_target(i: PartyId, j: PartyId, n: usize) -> Option<PartyId> {
    if n < 3 || i == j {
        return None;
    }
    if j.distance_to(i, n) == 2 {
        Some(i.prev(n))
    } else if i.distance_to(j, n) == 2 {
        Some(j.prev(n))
    } else {
        None
    }
}
