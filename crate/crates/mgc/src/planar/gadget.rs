//! The crossing gadget: a 6-vertex, 7-edge planar weighted graph that
//! simulates an edge crossing inside matching sums. Externals 1,2,3,4 sit
//! counterclockwise on its boundary disk; one chord runs 1↔3, the other
//! 2↔4. Its matching sums satisfy
//!
//! ```text
//!   PM(∅) = 1,   PM({1,3}) = PM({2,4}) = 1,   PM({1,2,3,4}) = −1,
//!   PM({1,2}) = PM({3,4}) = PM({1,4}) = PM({2,3}) = 0,
//!   PM(S) = 0 for odd |S|,
//! ```
//!
//! so the only boundary states with weight are "both strands of a chord
//! occupied or both free", and the doubly-occupied crossing carries the
//! fermionic −1.

use num_complex::Complex64;

use super::{PlanarGraph, Slot};

/// Template connectivity on vertices 0..6 (externals 0..4 = the printed
/// 1..4, internals 4 = "5", 5 = "6"). Edge 4 (between the internals)
/// carries weight −1; every other edge carries +1.
pub const GADGET_EDGES: [(usize, usize); 7] = [
    (0, 1), // (1,2)
    (2, 3), // (3,4)
    (0, 4), // (1,5)
    (3, 4), // (4,5)
    (4, 5), // (5,6)  weight −1
    (1, 5), // (2,6)
    (2, 5), // (3,6)
];

pub const GADGET_MINUS_EDGE: usize = 4;

/// Counterclockwise rotations of the template drawing (externals on a
/// circle at W, S, E, N; internal 4 at NW, 5 at SE). The `usize::MAX`
/// entries mark the outward attachment slot of each external vertex.
pub(crate) const GADGET_ROTATIONS: [&[usize]; 6] = [
    // vertex 0 (external 1, W): [edge to 4 (NE), out, edge to 1 (SSE)]
    &[2, usize::MAX, 0],
    // vertex 1 (external 2, S): [edge to 5 (NE), edge to 0 (NW), out]
    &[5, 0, usize::MAX],
    // vertex 2 (external 3, E): [out, edge to 3 (NW), edge to 5 (SW)]
    &[usize::MAX, 1, 6],
    // vertex 3 (external 4, N): [out, edge to 4 (SW), edge to 2 (SE)]
    &[usize::MAX, 3, 1],
    // vertex 4 (internal 5, NW): [to 3 (NE), to 0 (SW), to 5 (SE)]
    &[3, 2, 4],
    // vertex 5 (internal 6, SE): [to 2 (NE), to 4 (NW), to 1 (SW)]
    &[6, 4, 5],
];

/// Per-gadget internal fills for the four consistent boundary states,
/// as indexes into [`GADGET_EDGES`]. The boundary state is keyed by which
/// chords are occupied: occupied strands cover externals from outside.
pub const FILL_NONE: [usize; 3] = [0, 1, 4]; // (1,2)(3,4)(5,6)
pub const FILL_CHORD_13: [usize; 2] = [5, 3]; // (2,6)(4,5)
pub const FILL_CHORD_24: [usize; 2] = [2, 6]; // (1,5)(3,6)
pub const FILL_BOTH: [usize; 1] = [4]; // (5,6)

/// Builds the standalone gadget with four stubs 0..4 at its externals.
pub fn crossing_gadget() -> PlanarGraph {
    let mut rotations: Vec<Vec<Slot>> = Vec::new();
    for (v, rot) in GADGET_ROTATIONS.iter().enumerate() {
        let mut slots = Vec::new();
        for &item in rot.iter() {
            if item == usize::MAX {
                slots.push(Slot::Stub { stub: v });
            } else {
                let (a, _) = GADGET_EDGES[item];
                let end = if a == v { 0 } else { 1 };
                slots.push(Slot::Edge { edge: item, end });
            }
        }
        rotations.push(slots);
    }
    let weights: Vec<Complex64> = (0..7)
        .map(|e| {
            if e == GADGET_MINUS_EDGE {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    PlanarGraph::new(rotations, weights, 4).expect("gadget template is well-formed")
}
