//! Compilation of a canonical matchgate into a weighted planar graph whose
//! matching sums reproduce the tensor components: the block matrix
//! [[A, −Bᵀ], [B, 0]] is laid out as a complete chord graph in a disk, every
//! chord crossing is replaced by the crossing gadget, each chord's low-side
//! segment carries the matrix entry, bit-flip pendant edges turn row
//! *deletion* into external-vertex *occupation*, and one floating edge
//! carries the scalar prefactor C·ε.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::SkewMatrix;
use crate::matchgate::CanonicalMatchgate;

use super::chords::{chord_arrangement, sweep_keys, ChordArrangement, CircleSlot};
use super::gadget::{GADGET_EDGES, GADGET_MINUS_EDGE, GADGET_ROTATIONS};
use super::{PlanarGraph, Slot};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A compiled matchgate: `matching_sum(graph, S) = T(x)` where S is the set
/// of external vertices flagged by x.
pub struct CompiledMatchsum {
    pub graph: PlanarGraph,
    /// External (bit-flip) vertices, one per tensor index.
    pub externals: Vec<usize>,
    /// Vertex order giving the exact matching-sum dynamic program a small
    /// frontier (left-to-right geometric sweep).
    pub sweep_order: Vec<usize>,
}

/// One gadget instance: the two chords it lies on and its seven edge ids in
/// template order.
pub(crate) struct GadgetInfo {
    pub chord1: (usize, usize),
    pub chord2: (usize, usize),
    pub edges: [usize; 7],
}

/// Internal compiled form used by the network stitcher: no prefactor edge;
/// the scalar is carried separately. Stubs 0..n sit at the externals.
pub(crate) struct MatchsumPiece {
    pub graph: PlanarGraph,
    pub externals: Vec<usize>,
    pub flip_edges: Vec<usize>,
    pub prefactor: Complex64,
    pub n: usize,
    pub kappa: usize,
    pub chord_segments: HashMap<(usize, usize), Vec<usize>>,
    pub gadgets: Vec<GadgetInfo>,
    pub sweep_order: Vec<usize>,
}

/// Which template external (0..4) of the gadget at `cr` attaches the
/// segment of `chord` on its low (`side_low`) or high side.
fn gadget_ext(cr: &super::chords::Crossing, chord: (usize, usize), side_low: bool) -> usize {
    if cr.chord1 == chord {
        if side_low {
            0
        } else {
            2
        }
    } else if cr.ccw_c2_first {
        if side_low {
            1
        } else {
            3
        }
    } else if side_low {
        3
    } else {
        1
    }
}

/// Builds the chord-and-gadget graph for a κ×κ antisymmetric weight matrix,
/// with bit-flip pendants on the first `n_flips` circle vertices.
pub(crate) fn build_chord_graph(
    weights: &SkewMatrix,
    n_flips: usize,
) -> Result<MatchsumPiece> {
    let kappa = weights.dim();
    let arr: ChordArrangement = chord_arrangement(kappa)?;
    let n_gadgets = arr.crossings.len();
    let circle_base = 0usize;
    let gadget_base = kappa;
    let flip_base = kappa + 6 * n_gadgets;
    let n_vertices = flip_base + n_flips;

    let mut rotations: Vec<Vec<Slot>> = vec![Vec::new(); n_vertices];
    let mut edge_weights: Vec<Complex64> = Vec::new();
    let mut chord_segments: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    // (gadget, template external) → the segment slot attached there.
    let mut attach: HashMap<(usize, usize), Slot> = HashMap::new();
    // circle vertex → (partner → its first-segment slot).
    let mut circle_slot: HashMap<(usize, usize), Slot> = HashMap::new();

    // Segments chord by chord.
    for a in 0..kappa {
        for b in (a + 1)..kappa {
            let ids = &arr.along[&(a, b)];
            let mut segs = Vec::new();
            let count = ids.len() + 1;
            for s in 0..count {
                let e = edge_weights.len();
                let w = if s == 0 { weights.get(a, b) } else { ONE };
                edge_weights.push(w);
                segs.push(e);
                // end 0 = low side attachment, end 1 = high side.
                let low_slot = Slot::Edge { edge: e, end: 0 };
                let high_slot = Slot::Edge { edge: e, end: 1 };
                if s == 0 {
                    circle_slot.insert((a, b), low_slot);
                } else {
                    let x = ids[s - 1];
                    let ext = gadget_ext(&arr.crossings[x], (a, b), false);
                    attach.insert((x, ext), low_slot);
                }
                if s == count - 1 {
                    circle_slot.insert((b, a), high_slot);
                } else {
                    let x = ids[s];
                    let ext = gadget_ext(&arr.crossings[x], (a, b), true);
                    attach.insert((x, ext), high_slot);
                }
            }
            chord_segments.insert((a, b), segs);
        }
    }

    // Gadget internals.
    let mut gadgets = Vec::new();
    for (x, cr) in arr.crossings.iter().enumerate() {
        let mut ids = [0usize; 7];
        for (t, &(ta, tb)) in GADGET_EDGES.iter().enumerate() {
            let e = edge_weights.len();
            edge_weights.push(if t == GADGET_MINUS_EDGE { -ONE } else { ONE });
            ids[t] = e;
            let _ = (ta, tb);
        }
        gadgets.push(GadgetInfo {
            chord1: cr.chord1,
            chord2: cr.chord2,
            edges: ids,
        });
        // rotations of the six template vertices
        for tv in 0..6 {
            let vid = gadget_base + 6 * x + tv;
            for &item in GADGET_ROTATIONS[tv] {
                if item == usize::MAX {
                    let slot = attach
                        .get(&(x, tv))
                        .copied()
                        .expect("segment attached at every gadget external");
                    rotations[vid].push(slot);
                } else {
                    let (ta, _) = GADGET_EDGES[item];
                    let end = if ta == tv { 0 } else { 1 };
                    rotations[vid].push(Slot::Edge {
                        edge: ids[item],
                        end,
                    });
                }
            }
        }
    }

    // Flip pendants.
    let mut flip_edges = Vec::new();
    for j in 0..n_flips {
        let e = edge_weights.len();
        edge_weights.push(ONE);
        flip_edges.push(e);
        rotations[flip_base + j] = vec![Slot::Edge { edge: e, end: 1 }, Slot::Stub { stub: j }];
    }

    // Circle vertex rotations from the exact angular order.
    for j in 0..kappa {
        let vid = circle_base + j;
        for item in &arr.rotations[j] {
            match *item {
                CircleSlot::Out => {
                    if j < n_flips {
                        rotations[vid].push(Slot::Edge {
                            edge: flip_edges[j],
                            end: 0,
                        });
                    }
                }
                CircleSlot::Chord(l) => {
                    let slot = circle_slot[&(j, l)];
                    rotations[vid].push(slot);
                }
            }
        }
    }

    let graph = PlanarGraph::new(rotations, edge_weights, n_flips)?;
    graph.check_disk_embedding()?;

    // Left-to-right sweep order for the matching DP.
    let (circle_x, cross_x) = sweep_keys(kappa, &arr);
    let mut keyed: Vec<(f64, usize)> = Vec::with_capacity(n_vertices);
    for j in 0..kappa {
        keyed.push((circle_x[j], circle_base + j));
    }
    for x in 0..n_gadgets {
        for tv in 0..6 {
            keyed.push((cross_x[x], gadget_base + 6 * x + tv));
        }
    }
    for j in 0..n_flips {
        keyed.push((circle_x[j], flip_base + j));
    }
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let sweep_order: Vec<usize> = keyed.into_iter().map(|(_, v)| v).collect();

    Ok(MatchsumPiece {
        graph,
        externals: (0..n_flips).map(|j| flip_base + j).collect(),
        flip_edges,
        prefactor: ONE,
        n: n_flips,
        kappa,
        chord_segments,
        gadgets,
        sweep_order,
    })
}

pub(crate) fn compile_core(g: &CanonicalMatchgate) -> Result<MatchsumPiece> {
    let block = g.block_matrix();
    let mut piece = build_chord_graph(&block, g.rank())?;
    piece.prefactor = g.c() * Complex64::new(g.parity().epsilon(), 0.0);
    Ok(piece)
}

/// Compiles a matchgate into a planar weighted graph with one external
/// vertex per tensor index, such that
/// `matching_sum(graph, {externals[j] : x_j = 1}) = T(x)` for every x.
pub fn compile_matchsum(g: &CanonicalMatchgate) -> Result<CompiledMatchsum> {
    let piece = compile_core(g)?;
    let mut graph = piece.graph;
    // The scalar prefactor rides on a floating edge that every matching
    // must use.
    let u = graph.rotations.len();
    graph.rotations.push(Vec::new());
    graph.rotations.push(Vec::new());
    let e = graph.weights.len();
    graph.weights.push(piece.prefactor);
    graph.rotations[u].push(Slot::Edge { edge: e, end: 0 });
    graph.rotations[u + 1].push(Slot::Edge { edge: e, end: 1 });
    graph.rebuild_index();
    let mut sweep_order = piece.sweep_order;
    sweep_order.push(u);
    sweep_order.push(u + 1);
    Ok(CompiledMatchsum {
        graph,
        externals: piece.externals,
        sweep_order,
    })
}

/// Chord-and-gadget graph of a bare antisymmetric matrix, without flips or
/// prefactor: its perfect-matching sum equals Pf(A), and removing boundary
/// subsets gives the Pfaffian minors.
pub fn compile_pfaffian_graph(a: &SkewMatrix) -> Result<(PlanarGraph, Vec<usize>)> {
    let piece = build_chord_graph(a, 0)?;
    Ok((piece.graph, piece.sweep_order))
}
