//! Kasteleyn orientations of disk-embedded graphs: every inner face gets an
//! odd number of counterclockwise boundary edges (condition 1), and the
//! outer boundary path 1→2→…→m is oriented forward (condition 2). Built
//! from a spanning tree of the dual graph in linear time; verified by an
//! independent re-check of both conditions.

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{Faces, PlanarGraph, Slot};

/// Per-edge direction bit: `forward[e]` means edge e is oriented from its
/// end-0 vertex to its end-1 vertex.
#[derive(Clone, Debug)]
pub struct KasteleynOrientation {
    pub forward: Vec<bool>,
}

impl KasteleynOrientation {
    /// +1 when the dart agrees with the orientation, −1 otherwise.
    pub fn dart_sign(&self, dart: usize) -> i32 {
        let forward = self.forward[dart / 2];
        if (dart % 2 == 0) == forward {
            1
        } else {
            -1
        }
    }
}

/// The boundary data produced alongside an orientation.
pub struct OrientedBoundary {
    pub orientation: KasteleynOrientation,
    /// Outer face id.
    pub outer_face: usize,
    /// Boundary vertices in counterclockwise order, starting at the marked
    /// vertex (labels 1..m of the orientation conditions).
    pub boundary_ccw: Vec<usize>,
    /// Stubs in counterclockwise boundary order, aligned with the start.
    pub stubs_ccw: Vec<usize>,
}

/// Repeatedly inserts zero-weight shortcut edges until every face walk
/// visits each vertex at most once (two-connecting the embedding without
/// changing any matching sum or coupling). `dart_weights` stays aligned:
/// new darts get weight zero.
pub fn augment_two_connect(g: &mut PlanarGraph, dart_weights: &mut Vec<Complex64>) {
    loop {
        let faces = g.trace_faces();
        let mut fixed_any = false;
        'faces: for walk in &faces.walks {
            let len = walk.len();
            if len < 2 {
                continue;
            }
            let sources: Vec<usize> = walk.iter().map(|&d| g.dart_source(d)).collect();
            // find a repeated source
            let mut seen = std::collections::HashMap::new();
            for (j, &v) in sources.iter().enumerate() {
                if seen.contains_key(&v) {
                    // corner at the second visit: shortcut from the previous
                    // source to the next target
                    let jm = (j + len - 1) % len;
                    let d_prev = walk[jm];
                    let d_here = walk[j];
                    let w = g.dart_source(d_prev);
                    let z = g.dart_target(d_here);
                    if w == v || z == v || w == z {
                        // degenerate corner (parallel edges); try another
                        continue;
                    }
                    // insertion positions: at w the new dart goes right
                    // before d_prev (so the face walk turns onto it); at z
                    // its twin goes right after twin(d_here) (so the cut-off
                    // triangle closes through it).
                    let (wv, wpos) = g.dart_position(d_prev);
                    debug_assert_eq!(wv, w);
                    let (zv, zpos) = g.dart_position(d_here ^ 1);
                    debug_assert_eq!(zv, z);
                    g.insert_edge_at(w, wpos, z, zpos + 1, Complex64::new(0.0, 0.0));
                    dart_weights.push(Complex64::new(0.0, 0.0));
                    dart_weights.push(Complex64::new(0.0, 0.0));
                    fixed_any = true;
                    break 'faces;
                }
                seen.insert(v, j);
            }
        }
        if !fixed_any {
            return;
        }
    }
}

/// Builds a Kasteleyn orientation. The graph must be a connected disk
/// embedding whose face walks are vertex-simple (see
/// [`augment_two_connect`]); `outer_face` designates the boundary face and
/// `marked` the starting boundary vertex.
pub fn kasteleyn_orient(
    g: &PlanarGraph,
    faces: &Faces,
    outer_face: usize,
    marked: usize,
) -> Result<OrientedBoundary> {
    let n_edges = g.n_edges();
    let n_faces = faces.walks.len();
    let mut forward = vec![true; n_edges];

    // Dual spanning tree rooted at the outer face.
    let mut parent_edge: Vec<Option<usize>> = vec![None; n_faces];
    let mut visited = vec![false; n_faces];
    let mut order = Vec::new();
    visited[outer_face] = true;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(outer_face);
    while let Some(f) = queue.pop_front() {
        order.push(f);
        for &d in &faces.walks[f] {
            let other = faces.face_of_dart[d ^ 1];
            if !visited[other] {
                visited[other] = true;
                parent_edge[other] = Some(d / 2);
                queue.push_back(other);
            }
        }
    }
    if visited.iter().any(|v| !v) {
        return Err(Error::NotPlanar("dual graph is disconnected".into()));
    }
    let in_tree: Vec<bool> = {
        let mut t = vec![false; n_edges];
        for pe in parent_edge.iter().flatten() {
            t[*pe] = true;
        }
        t
    };
    let _ = in_tree;

    // Fix tree edges from the leaves toward the root: when a face is
    // processed, its parent edge is its only unassigned boundary edge.
    let orientation_ref = |forward: &[bool], dart: usize| -> i32 {
        if (dart % 2 == 0) == forward[dart / 2] {
            1
        } else {
            -1
        }
    };
    for &f in order.iter().rev() {
        if f == outer_face {
            continue;
        }
        let pe = parent_edge[f].expect("non-root face has a parent");
        let mut ccw_count = 0usize;
        let mut parent_dart = usize::MAX;
        for &d in &faces.walks[f] {
            if d / 2 == pe {
                parent_dart = d;
                continue;
            }
            if orientation_ref(&forward, d) == 1 {
                ccw_count += 1;
            }
        }
        // choose the parent edge's direction so the ccw count is odd
        let need_agree = ccw_count % 2 == 0;
        forward[pe] = (parent_dart % 2 == 0) == need_agree;
    }

    // Boundary labels: the outer orbit runs clockwise in the drawing, so the
    // counterclockwise boundary is its reverse.
    let outer_walk = &faces.walks[outer_face];
    let m = outer_walk.len();
    let mut boundary_ccw: Vec<usize> = Vec::with_capacity(m);
    let mut step_edge: Vec<usize> = Vec::with_capacity(m);
    if m > 0 {
        // ccw vertex i = source of outer_walk[m−1−i shifted]; the edge used
        // stepping ccw from sources[j+1] to sources[j] is edge(walk[j]).
        let sources: Vec<usize> = outer_walk.iter().map(|&d| g.dart_source(d)).collect();
        let start = sources
            .iter()
            .position(|&v| v == marked)
            .ok_or_else(|| Error::NotPlanar("marked vertex not on the outer face".into()))?;
        for i in 0..m {
            let j = (start + m - i) % m;
            boundary_ccw.push(sources[j]);
            // ccw step i: from sources[j] to sources[j−1] along edge of
            // walk[j−1]
            step_edge.push(outer_walk[(j + m - 1) % m] / 2);
        }
    }

    // Condition (2): orient the boundary path forward, gauging at the later
    // vertex of each offending step. Gauges at boundary vertex i+1 flip all
    // its edges; condition (1) is preserved.
    let mut orientation = KasteleynOrientation { forward };
    for i in 0..m.saturating_sub(1) {
        let x = boundary_ccw[i];
        let e = step_edge[i];
        let (u0, _) = g.endpoints(e);
        let points_forward = if u0 == x {
            orientation.forward[e]
        } else {
            !orientation.forward[e]
        };
        if !points_forward {
            gauge_flip(g, &mut orientation, boundary_ccw[i + 1]);
        }
    }

    Ok(OrientedBoundary {
        orientation,
        outer_face,
        boundary_ccw,
        stubs_ccw: Vec::new(),
    })
}

/// Reverses every edge incident to `v` (self-loops are invariant).
pub fn gauge_flip(g: &PlanarGraph, orientation: &mut KasteleynOrientation, v: usize) {
    for slot in g.rotation(v) {
        if let Slot::Edge { edge, .. } = *slot {
            let (a, b) = g.endpoints(edge);
            if a != b {
                orientation.forward[edge] = !orientation.forward[edge];
            }
        }
    }
}

/// Independent verifier: re-traces the faces and checks both orientation
/// conditions exactly.
pub fn verify_kasteleyn(
    g: &PlanarGraph,
    orientation: &KasteleynOrientation,
    outer_face: usize,
    boundary_ccw: &[usize],
) -> bool {
    let faces = g.trace_faces();
    for (f, walk) in faces.walks.iter().enumerate() {
        if f == outer_face {
            continue;
        }
        let ccw = walk
            .iter()
            .filter(|&&d| orientation.dart_sign(d) == 1)
            .count();
        if ccw % 2 != 1 {
            return false;
        }
    }
    let m = boundary_ccw.len();
    for i in 0..m.saturating_sub(1) {
        let x = boundary_ccw[i];
        let y = boundary_ccw[i + 1];
        // find a boundary edge from x to y oriented x→y
        let mut ok = false;
        for slot in g.rotation(x) {
            if let Slot::Edge { edge, end } = *slot {
                let (a, b) = g.endpoints(edge);
                let other = if end == 0 { b } else { a };
                if other != y {
                    continue;
                }
                let points_forward = if end == 0 {
                    orientation.forward[edge]
                } else {
                    !orientation.forward[edge]
                };
                if points_forward {
                    ok = true;
                    break;
                }
            }
        }
        if !ok {
            return false;
        }
    }
    true
}

/// Stubs of the outer face in counterclockwise order, rotated so the
/// smallest stub id comes first.
pub fn boundary_stub_order(faces: &Faces, outer_face: usize) -> Vec<usize> {
    let mut stubs = faces.face_stubs[outer_face].clone();
    stubs.reverse();
    if let Some(pos) = stubs
        .iter()
        .position(|&s| s == *stubs.iter().min().unwrap_or(&0))
    {
        stubs.rotate_left(pos);
    }
    stubs
}
