//! One-shot contraction of a planar open network: every vertex tensor is
//! simulated by a matching-sum graph, the pieces are stitched into one
//! planar graph of linear tensors, a Kasteleyn orientation makes all
//! matchings contribute with one common sign, and the whole contraction
//! collapses to a single Gaussian integral over one variable per stitched
//! vertex. Networks whose tensors are all linear (matching sums) skip the
//! compilation and use their own graph directly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{gaussian_integral_closed, pfaffian, CMat, SkewMatrix};
use crate::matchgate::{repair_gauge, CanonicalMatchgate, Parity};
use crate::network::{residual_deficient, VertexTensor};

use super::compile::{compile_core, MatchsumPiece};
use super::gadget::{FILL_BOTH, FILL_CHORD_13, FILL_CHORD_24, FILL_NONE};
use super::kasteleyn::{
    augment_two_connect, boundary_stub_order, kasteleyn_orient, verify_kasteleyn,
};
use super::matchsum::find_reference_matching;
use super::{PlanarGraph, Slot};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An open tensor network: a disk-embedded graph whose boundary carries
/// external stubs, with a matchgate tensor at every vertex. Slot lists are
/// counterclockwise and define each tensor's index order.
#[derive(Clone, Debug)]
pub struct OpenNetwork {
    rotations: Vec<Vec<Slot>>,
    n_edges: usize,
    n_stubs: usize,
    tensors: Vec<VertexTensor>,
}

impl OpenNetwork {
    pub fn new(
        rotations: Vec<Vec<Slot>>,
        n_edges: usize,
        n_stubs: usize,
        tensors: Vec<VertexTensor>,
    ) -> Result<Self> {
        if tensors.len() != rotations.len() {
            return Err(Error::BadNetwork(format!(
                "{} vertices but {} tensors",
                rotations.len(),
                tensors.len()
            )));
        }
        let mut edge_seen = vec![[false, false]; n_edges];
        let mut stub_seen = vec![false; n_stubs];
        for (v, rot) in rotations.iter().enumerate() {
            if tensors[v].rank() != rot.len() {
                return Err(Error::BadNetwork(format!(
                    "vertex {v}: degree {} but tensor rank {}",
                    rot.len(),
                    tensors[v].rank()
                )));
            }
            for slot in rot {
                match *slot {
                    Slot::Edge { edge, end } => {
                        if edge >= n_edges || end > 1 || edge_seen[edge][end as usize] {
                            return Err(Error::BadNetwork(format!(
                                "vertex {v}: bad edge end ({edge},{end})"
                            )));
                        }
                        edge_seen[edge][end as usize] = true;
                    }
                    Slot::Stub { stub } => {
                        if stub >= n_stubs || stub_seen[stub] {
                            return Err(Error::BadNetwork(format!("vertex {v}: bad stub {stub}")));
                        }
                        stub_seen[stub] = true;
                    }
                }
            }
        }
        if edge_seen.iter().any(|s| !s[0] || !s[1]) || stub_seen.iter().any(|s| !s) {
            return Err(Error::BadNetwork("missing edge end or stub".into()));
        }
        Ok(Self {
            rotations,
            n_edges,
            n_stubs,
            tensors,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.rotations.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn n_stubs(&self) -> usize {
        self.n_stubs
    }

    pub fn rotation(&self, v: usize) -> &[Slot] {
        &self.rotations[v]
    }

    pub fn tensors(&self) -> &[VertexTensor] {
        &self.tensors
    }
}

/// Result of a one-shot planar contraction.
pub struct OpenContraction {
    /// The contracted tensor in canonical form; `None` when it vanishes
    /// identically.
    pub tensor: Option<CanonicalMatchgate>,
    /// Stub ids in counterclockwise boundary order — the index order of the
    /// contracted tensor.
    pub stub_order: Vec<usize>,
    /// Dimension of the antisymmetric matrix in the single Gaussian
    /// integral (one variable per stitched vertex).
    pub matrix_dim: usize,
}

impl OpenContraction {
    /// The scalar value of a fully closed contraction (rank 0).
    pub fn scalar_value(&self) -> Complex64 {
        match &self.tensor {
            Some(g) if g.rank() == 0 => g.c(),
            Some(_) => panic!("contraction is not a scalar"),
            None => ZERO,
        }
    }
}

/// The stitched linear matching-sum network fed into the Gaussian step.
struct LinearNetwork {
    graph: PlanarGraph,
    /// Coupling weight on each dart (2 per edge; the edge's matching weight
    /// is their product).
    dart_weights: Vec<Complex64>,
    /// Coupling weight on each stub.
    stub_weights: Vec<Complex64>,
    /// ∏ C_u·ε_u over compiled pieces.
    prefactor: Complex64,
    /// Σ tensor parities mod 2 = parity of the contracted tensor.
    parity_bit: usize,
    /// Reference matching: `Some((stubs, edges))` when known by
    /// construction, `None` to search for one.
    reference: Option<(Vec<usize>, Vec<usize>)>,
}

/// Contracts all internal edges of a planar open network into a single
/// rank-m matchgate via one Gaussian integral. The returned index order is
/// the counterclockwise boundary order of the stubs.
pub fn contract_open_network(net: &OpenNetwork) -> Result<OpenContraction> {
    // Validate the network's own embedding.
    let skeleton = PlanarGraph::new(
        net.rotations.clone(),
        vec![ONE; net.n_edges],
        net.n_stubs,
    )?;
    skeleton.check_disk_embedding()?;

    let linear: Option<Vec<Vec<Complex64>>> = net
        .tensors
        .iter()
        .map(|t| t.linear_weights())
        .collect::<Option<Vec<_>>>();

    let mut lin = match linear {
        Some(weights) => build_raw_linear(net, weights)?,
        None => build_stitched(net)?,
    };

    // Empty graph: a single scalar piece.
    if lin.graph.n_edges() == 0 && lin.graph.n_stubs() == 0 && lin.graph.n_vertices() <= 2 {
        let tensor = if lin.prefactor == ZERO {
            None
        } else {
            Some(CanonicalMatchgate::scalar(lin.prefactor)?)
        };
        return Ok(OpenContraction {
            tensor,
            stub_order: Vec::new(),
            matrix_dim: 0,
        });
    }

    augment_two_connect(&mut lin.graph, &mut lin.dart_weights);
    let faces = lin.graph.trace_faces();
    let m = lin.graph.n_stubs();
    let outer = if m > 0 {
        faces.face_with_all_stubs(m).ok_or_else(|| {
            Error::NotPlanar("external stubs do not share one boundary face".into())
        })?
    } else {
        0
    };
    let stubs_ccw = boundary_stub_order(&faces, outer);
    let marked = if m > 0 {
        lin.graph.stub_position(stubs_ccw[0]).0
    } else {
        let w = &faces.walks[outer];
        if w.is_empty() {
            0
        } else {
            w.iter().map(|&d| lin.graph.dart_source(d)).min().unwrap()
        }
    };
    let ob = kasteleyn_orient(&lin.graph, &faces, outer, marked)?;
    if !verify_kasteleyn(&lin.graph, &ob.orientation, outer, &ob.boundary_ccw) {
        return Err(Error::NotPlanar("orientation conditions failed".into()));
    }

    // Vertex order: boundary counterclockwise from the marked vertex, then
    // the interior by id.
    let nv = lin.graph.n_vertices();
    let mut ko_index = vec![usize::MAX; nv];
    let mut order = Vec::with_capacity(nv);
    for &v in &ob.boundary_ccw {
        if ko_index[v] == usize::MAX {
            ko_index[v] = order.len();
            order.push(v);
        }
    }
    for v in 0..nv {
        if ko_index[v] == usize::MAX {
            ko_index[v] = order.len();
            order.push(v);
        }
    }

    // Reference matching and the common matching sign.
    let reference = match &lin.reference {
        Some(r) => Some(r.clone()),
        None => find_reference_matching(&lin.graph).map(|r| (r.stubs, r.edges)),
    };
    let Some((s0, m0)) = reference else {
        return Ok(OpenContraction {
            tensor: None,
            stub_order: stubs_ccw,
            matrix_dim: nv,
        });
    };
    let s0_sign = matching_sign(&lin.graph, &ob.orientation, &ko_index, &stubs_ccw, &s0, &m0);

    // Assemble the Gaussian data over one variable per vertex, listed in
    // reversed vertex order so the nested-integral conventions carry no
    // leftover sign.
    let n = nv;
    let mut amat = CMat::zeros(n, n);
    for e in 0..lin.graph.n_edges() {
        let (u, v) = lin.graph.endpoints(e);
        if u == v {
            continue;
        }
        let coef = -orient_sign(&ob.orientation, e)
            * lin.dart_weights[2 * e]
            * lin.dart_weights[2 * e + 1];
        if coef == ZERO {
            continue;
        }
        let pu = n - 1 - ko_index[u];
        let pv = n - 1 - ko_index[v];
        if pu < pv {
            amat[(pu, pv)] += coef;
            amat[(pv, pu)] -= coef;
        } else {
            amat[(pv, pu)] -= coef;
            amat[(pu, pv)] += coef;
        }
    }
    let askew = SkewMatrix::new_canonicalized(amat);
    let scale = Complex64::new(s0_sign, 0.0) * lin.prefactor;

    if m == 0 {
        let value = scale * pfaffian(&askew);
        let tensor = if value == ZERO {
            None
        } else {
            Some(CanonicalMatchgate::scalar(value)?)
        };
        return Ok(OpenContraction {
            tensor,
            stub_order: stubs_ccw,
            matrix_dim: n,
        });
    }

    let mut bmat = CMat::zeros(n, m);
    for (col, &s) in stubs_ccw.iter().enumerate() {
        let (v, _) = lin.graph.stub_position(s);
        bmat[(n - 1 - ko_index[v], col)] += lin.stub_weights[s];
    }
    let gf = gaussian_integral_closed(&askew, &bmat)?;
    let c_out = scale * gf.prefactor;
    if gf.is_zero || residual_deficient(&gf.residual) || c_out == ZERO {
        return Ok(OpenContraction {
            tensor: None,
            stub_order: stubs_ccw,
            matrix_dim: n,
        });
    }
    let g = CanonicalMatchgate::new_lax(gf.quad.clone(), gf.residual.clone(), c_out)?;
    debug_assert_eq!(g.parity(), Parity::from_k(lin.parity_bit % 2));
    Ok(OpenContraction {
        tensor: Some(repair_gauge(g)),
        stub_order: stubs_ccw,
        matrix_dim: n,
    })
}

fn orient_sign(orientation: &super::KasteleynOrientation, e: usize) -> Complex64 {
    if orientation.forward[e] {
        ONE
    } else {
        -ONE
    }
}

/// The common sign of all matchings under the orientation: compares the
/// matching-ordered variable product (stub factors in boundary order, then
/// one oriented pair per matched edge) against the normally ordered product
/// over (vertex, slot).
fn matching_sign(
    g: &PlanarGraph,
    orientation: &super::KasteleynOrientation,
    ko_index: &[usize],
    stubs_ccw: &[usize],
    s0: &[usize],
    m0: &[usize],
) -> f64 {
    let mut seq: Vec<(usize, usize)> = Vec::new();
    for &s in stubs_ccw {
        if s0.contains(&s) {
            let (v, slot) = g.stub_position(s);
            seq.push((ko_index[v], slot));
        }
    }
    let mut sign = 1.0f64;
    for &e in m0 {
        if !orientation.forward[e] {
            sign = -sign;
        }
        let (v0, slot0) = g.dart_position(2 * e);
        let (v1, slot1) = g.dart_position(2 * e + 1);
        seq.push((ko_index[v0], slot0));
        seq.push((ko_index[v1], slot1));
    }
    // parity of the permutation sorting `seq`
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in (i + 1)..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 1 {
        sign = -sign;
    }
    sign
}

/// Raw path: the network's tensors are all linear, so the network itself is
/// the matching-sum graph. Self-loops contribute a factor of one and are
/// stripped.
fn build_raw_linear(net: &OpenNetwork, weights: Vec<Vec<Complex64>>) -> Result<LinearNetwork> {
    let mut is_loop = vec![false; net.n_edges];
    {
        let mut seen_at = vec![usize::MAX; net.n_edges];
        for (v, rot) in net.rotations.iter().enumerate() {
            for slot in rot {
                if let Slot::Edge { edge, .. } = *slot {
                    if seen_at[edge] == v {
                        is_loop[edge] = true;
                    }
                    seen_at[edge] = v;
                }
            }
        }
    }
    let mut edge_map = vec![usize::MAX; net.n_edges];
    let mut kept = 0usize;
    for e in 0..net.n_edges {
        if !is_loop[e] {
            edge_map[e] = kept;
            kept += 1;
        }
    }
    let mut rotations: Vec<Vec<Slot>> = Vec::with_capacity(net.n_vertices());
    let mut dart_weights = vec![ZERO; 2 * kept];
    let mut stub_weights = vec![ZERO; net.n_stubs];
    for (v, rot) in net.rotations.iter().enumerate() {
        let mut out = Vec::new();
        for (i, slot) in rot.iter().enumerate() {
            match *slot {
                Slot::Edge { edge, end } => {
                    if is_loop[edge] {
                        continue;
                    }
                    let e = edge_map[edge];
                    out.push(Slot::Edge { edge: e, end });
                    dart_weights[2 * e + end as usize] = weights[v][i];
                }
                Slot::Stub { stub } => {
                    out.push(Slot::Stub { stub });
                    stub_weights[stub] = weights[v][i];
                }
            }
        }
        rotations.push(out);
    }
    let edge_w: Vec<Complex64> = (0..kept)
        .map(|e| dart_weights[2 * e] * dart_weights[2 * e + 1])
        .collect();
    let graph = PlanarGraph::new(rotations, edge_w, net.n_stubs)?;
    Ok(LinearNetwork {
        graph,
        dart_weights,
        stub_weights,
        prefactor: ONE,
        parity_bit: net.n_vertices() % 2,
        reference: None,
    })
}

/// Compile path: every vertex tensor becomes a matching-sum piece; the
/// pieces are stitched along the network edges, and a reference matching is
/// constructed from a parity-fixing edge assignment.
fn build_stitched(net: &OpenNetwork) -> Result<LinearNetwork> {
    let nv = net.n_vertices();
    let mut pieces: Vec<MatchsumPiece> = Vec::with_capacity(nv);
    let mut parities = Vec::with_capacity(nv);
    for t in &net.tensors {
        let g = t.to_canonical(1e-9)?;
        parities.push(g.parity().bit());
        pieces.push(compile_core(&g)?);
    }

    // Merge with vertex/edge offsets.
    let mut vtx_offset = Vec::with_capacity(nv);
    let mut edge_offset = Vec::with_capacity(nv);
    let mut rotations: Vec<Vec<Slot>> = Vec::new();
    let mut dart_weights: Vec<Complex64> = Vec::new();
    let mut edge_w: Vec<Complex64> = Vec::new();
    let mut prefactor = ONE;
    for piece in &pieces {
        vtx_offset.push(rotations.len());
        edge_offset.push(edge_w.len());
        prefactor *= piece.prefactor;
        let voff = *vtx_offset.last().unwrap();
        let eoff = *edge_offset.last().unwrap();
        for rot in 0..piece.graph.n_vertices() {
            let slots: Vec<Slot> = piece
                .graph
                .rotation(rot)
                .iter()
                .map(|s| match *s {
                    Slot::Edge { edge, end } => Slot::Edge {
                        edge: edge + eoff,
                        end,
                    },
                    // local stub j marks where external j attaches; resolved
                    // below
                    Slot::Stub { stub } => Slot::Stub { stub: usize::MAX - stub },
                })
                .collect();
            rotations.push(slots);
            let _ = voff;
        }
        for e in 0..piece.graph.n_edges() {
            edge_w.push(piece.graph.weight(e));
            dart_weights.push(piece.graph.weight(e));
            dart_weights.push(ONE);
        }
    }

    // Resolve attachments: stitch edges for network edges, global stubs for
    // network stubs.
    let mut stitch_edge = vec![usize::MAX; net.n_edges];
    let mut pending: Vec<Vec<(usize, usize)>> = vec![Vec::new(); net.n_edges];
    for (v, rot) in net.rotations.iter().enumerate() {
        for (i, slot) in rot.iter().enumerate() {
            let flip_vertex = vtx_offset[v] + pieces[v].externals[i] - 0;
            match *slot {
                Slot::Edge { edge, end } => pending[edge].push((flip_vertex, end as usize)),
                Slot::Stub { stub } => {
                    // replace the placeholder stub slot
                    for s in rotations[flip_vertex].iter_mut() {
                        if matches!(s, Slot::Stub { .. }) {
                            *s = Slot::Stub { stub };
                        }
                    }
                }
            }
        }
    }
    for (edge, ends) in pending.iter().enumerate() {
        if ends.is_empty() {
            continue;
        }
        debug_assert_eq!(ends.len(), 2);
        let (fa, ea) = ends.iter().find(|(_, e)| *e == 0).copied().unwrap();
        let (fb, _) = ends.iter().find(|(_, e)| *e == 1).copied().unwrap();
        let _ = ea;
        let e = edge_w.len();
        edge_w.push(ONE);
        dart_weights.push(ONE);
        dart_weights.push(ONE);
        stitch_edge[edge] = e;
        for (fv, end) in [(fa, 0u8), (fb, 1u8)] {
            for s in rotations[fv].iter_mut() {
                if matches!(s, Slot::Stub { .. }) {
                    *s = Slot::Edge { edge: e, end };
                }
            }
        }
    }
    // Drop any unresolved placeholder stubs (piece externals always bind to
    // exactly one network slot, so none should remain).
    for rot in rotations.iter_mut() {
        debug_assert!(rot
            .iter()
            .all(|s| !matches!(s, Slot::Stub { stub } if *stub > net.n_stubs && *stub != usize::MAX)));
    }

    let graph = PlanarGraph::new(rotations, edge_w, net.n_stubs)?;

    // Reference matching from a parity-fixing assignment over the network.
    let reference = build_reference(net, &pieces, &parities, &vtx_offset, &edge_offset, &stitch_edge);

    Ok(LinearNetwork {
        graph,
        dart_weights,
        stub_weights: vec![ONE; net.n_stubs],
        prefactor,
        parity_bit: parities.iter().sum::<usize>() % 2,
        reference: reference.map(Some).unwrap_or(None),
    })
}

/// Chooses per-edge occupations z and a stub set fixing every vertex's
/// parity, then lifts them to an explicit matching of the stitched graph.
/// Returns `None` when no consistent assignment exists (the contraction is
/// then identically zero).
fn build_reference(
    net: &OpenNetwork,
    pieces: &[MatchsumPiece],
    parities: &[usize],
    vtx_offset: &[usize],
    edge_offset: &[usize],
    stitch_edge: &[usize],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let nv = net.n_vertices();
    // adjacency over non-loop network edges
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    let mut endpoints: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); net.n_edges];
    for (v, rot) in net.rotations.iter().enumerate() {
        for slot in rot {
            if let Slot::Edge { edge, end } = *slot {
                if end == 0 {
                    endpoints[edge].0 = v;
                } else {
                    endpoints[edge].1 = v;
                }
            }
        }
    }
    for (e, &(a, b)) in endpoints.iter().enumerate() {
        if a != b {
            adj[a].push((e, b));
            adj[b].push((e, a));
        }
    }
    // stub carriers
    let mut vertex_stub: Vec<Option<usize>> = vec![None; nv];
    for (v, rot) in net.rotations.iter().enumerate() {
        for slot in rot {
            if let Slot::Stub { stub } = *slot {
                vertex_stub[v].get_or_insert(stub);
            }
        }
    }
    // BFS tree rooted at a stub carrier when one exists
    let root = (0..nv).find(|&v| vertex_stub[v].is_some()).unwrap_or(0);
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nv]; // (edge, parent vertex)
    let mut bfs = vec![root];
    let mut seen = vec![false; nv];
    seen[root] = true;
    let mut qi = 0;
    while qi < bfs.len() {
        let v = bfs[qi];
        qi += 1;
        for &(e, o) in &adj[v] {
            if !seen[o] {
                seen[o] = true;
                parent[o] = Some((e, v));
                bfs.push(o);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return None; // disconnected; rejected earlier anyway
    }
    let mut z = vec![false; net.n_edges];
    let mut deficiency: Vec<usize> = parities.to_vec();
    for &v in bfs.iter().skip(1).rev() {
        if deficiency[v] % 2 == 1 {
            let (e, p) = parent[v].unwrap();
            z[e] = true;
            deficiency[v] += 1;
            deficiency[p] += 1;
        }
    }
    let mut s0 = Vec::new();
    if deficiency[root] % 2 == 1 {
        match vertex_stub[root] {
            Some(s) => s0.push(s),
            None => return None,
        }
    }

    // Lift to a matching of the stitched graph.
    let mut m0 = Vec::new();
    for (v, rot) in net.rotations.iter().enumerate() {
        let piece = &pieces[v];
        let eoff = edge_offset[v];
        let mut occupied = vec![false; rot.len()];
        for (i, slot) in rot.iter().enumerate() {
            occupied[i] = match *slot {
                Slot::Edge { edge, .. } => z[edge],
                Slot::Stub { stub } => s0.contains(&stub),
            };
        }
        // kept circle vertices: occupied tensor indexes plus all μ rows
        let mut kept: Vec<usize> = (0..rot.len()).filter(|&i| occupied[i]).collect();
        kept.extend(rot.len()..piece.kappa);
        debug_assert_eq!(kept.len() % 2, 0);
        let mut used_chords = std::collections::HashSet::new();
        for pair in kept.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            used_chords.insert((a, b));
            for &seg in &piece.chord_segments[&(a, b)] {
                m0.push(seg + eoff);
            }
        }
        for (i, &occ) in occupied.iter().enumerate() {
            if !occ {
                m0.push(piece.flip_edges[i] + eoff);
            }
        }
        for gi in &piece.gadgets {
            let occ1 = used_chords.contains(&gi.chord1);
            let occ2 = used_chords.contains(&gi.chord2);
            let fill: &[usize] = match (occ1, occ2) {
                (false, false) => &FILL_NONE,
                (true, false) => &FILL_CHORD_13,
                (false, true) => &FILL_CHORD_24,
                (true, true) => &FILL_BOTH,
            };
            for &t in fill {
                m0.push(gi.edges[t] + eoff);
            }
        }
        let _ = vtx_offset;
    }
    for (e, &(a, b)) in endpoints.iter().enumerate() {
        if a != b && z[e] {
            m0.push(stitch_edge[e]);
        }
    }
    Some((s0, m0))
}

/// Sign-coherence diagnostic for small stitched networks: enumerates every
/// boundary subset S and every ∂S-imperfect matching M of the stitched
/// graph, and reports each matching's sign relative to the calibrated
/// orientation. When the variable count allows (2|E| + m ≤ 24) every sign
/// is recomputed independently inside the Grassmann oracle by multiplying
/// the matching's monomial out and reading the coefficient.
pub struct SignDiagnostic {
    /// Calibrated sign of every enumerated (S, M) pair.
    pub signs: Vec<f64>,
    /// The enumerated pairs (stub set, matching edges).
    pub matchings: Vec<(Vec<usize>, Vec<usize>)>,
    /// The stitched, augmented graph.
    pub graph: PlanarGraph,
    pub orientation: super::KasteleynOrientation,
    /// Whether the Grassmann-oracle cross-check ran.
    pub oracle_checked: bool,
}

pub fn sign_diagnostic(net: &OpenNetwork) -> Result<SignDiagnostic> {
    let skeleton = PlanarGraph::new(
        net.rotations.clone(),
        vec![ONE; net.n_edges],
        net.n_stubs,
    )?;
    skeleton.check_disk_embedding()?;
    let linear: Option<Vec<Vec<Complex64>>> = net
        .tensors
        .iter()
        .map(|t| t.linear_weights())
        .collect::<Option<Vec<_>>>();
    let mut lin = match linear {
        Some(weights) => build_raw_linear(net, weights)?,
        None => build_stitched(net)?,
    };
    augment_two_connect(&mut lin.graph, &mut lin.dart_weights);
    let faces = lin.graph.trace_faces();
    let m = lin.graph.n_stubs();
    let outer = if m > 0 {
        faces
            .face_with_all_stubs(m)
            .ok_or_else(|| Error::NotPlanar("stubs span several faces".into()))?
    } else {
        0
    };
    let stubs_ccw = boundary_stub_order(&faces, outer);
    let marked = if m > 0 {
        lin.graph.stub_position(stubs_ccw[0]).0
    } else {
        faces.walks[outer]
            .iter()
            .map(|&d| lin.graph.dart_source(d))
            .min()
            .unwrap_or(0)
    };
    let ob = kasteleyn_orient(&lin.graph, &faces, outer, marked)?;
    let nv = lin.graph.n_vertices();
    let mut ko_index = vec![usize::MAX; nv];
    let mut next = 0;
    for &v in &ob.boundary_ccw {
        if ko_index[v] == usize::MAX {
            ko_index[v] = next;
            next += 1;
        }
    }
    for v in 0..nv {
        if ko_index[v] == usize::MAX {
            ko_index[v] = next;
            next += 1;
        }
    }
    // Calibration from one reference, as in contraction.
    let reference = match &lin.reference {
        Some(r) => Some(r.clone()),
        None => find_reference_matching(&lin.graph).map(|r| (r.stubs, r.edges)),
    };
    let Some((s0_stubs, m0_edges)) = reference else {
        return Ok(SignDiagnostic {
            signs: Vec::new(),
            matchings: Vec::new(),
            graph: lin.graph,
            orientation: ob.orientation,
            oracle_checked: false,
        });
    };
    let s0 = matching_sign(
        &lin.graph,
        &ob.orientation,
        &ko_index,
        &stubs_ccw,
        &s0_stubs,
        &m0_edges,
    );

    // Enumerate every (S, M).
    let mut matchings = Vec::new();
    enumerate_boundary_matchings(&lin.graph, &mut matchings);
    let mut signs = Vec::with_capacity(matchings.len());
    let total_vars = 2 * lin.graph.n_edges() + m;
    let oracle_checked = total_vars <= crate::grassmann::MAX_GENERATORS;
    for (s, edges) in &matchings {
        let sign = s0
            * matching_sign(
                &lin.graph,
                &ob.orientation,
                &ko_index,
                &stubs_ccw,
                s,
                edges,
            );
        if oracle_checked {
            let oracle = grassmann_matching_sign(
                &lin.graph,
                &ob.orientation,
                &ko_index,
                &stubs_ccw,
                s,
                edges,
            )?;
            if (oracle - sign / s0).abs() > 0.5 {
                return Err(Error::BadNetwork(
                    "permutation and Grassmann sign routes disagree".into(),
                ));
            }
        }
        signs.push(sign);
    }
    Ok(SignDiagnostic {
        signs,
        matchings,
        graph: lin.graph,
        orientation: ob.orientation,
        oracle_checked,
    })
}

/// All (S ⊆ stubs, ∂S-imperfect matching) pairs by direct recursion.
fn enumerate_boundary_matchings(
    g: &PlanarGraph,
    out: &mut Vec<(Vec<usize>, Vec<usize>)>,
) {
    let m = g.n_stubs();
    for s_mask in 0u32..(1 << m) {
        let stubs: Vec<usize> = (0..m).filter(|&s| s_mask >> s & 1 == 1).collect();
        let mut excluded = vec![false; g.n_vertices()];
        let mut valid = true;
        for &s in &stubs {
            let (v, _) = g.stub_position(s);
            if excluded[v] {
                valid = false; // at most one active stub per vertex
                break;
            }
            excluded[v] = true;
        }
        if !valid {
            continue;
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.n_vertices()];
        for e in 0..g.n_edges() {
            let (a, b) = g.endpoints(e);
            if a != b {
                adj[a].push((e, b));
                adj[b].push((e, a));
            }
        }
        let mut current = Vec::new();
        enumerate_rec(&adj, &mut excluded, &mut current, &stubs, out);
    }
}

fn enumerate_rec(
    adj: &[Vec<(usize, usize)>],
    covered: &mut [bool],
    current: &mut Vec<usize>,
    stubs: &[usize],
    out: &mut Vec<(Vec<usize>, Vec<usize>)>,
) {
    let Some(v) = covered.iter().position(|&c| !c) else {
        out.push((stubs.to_vec(), current.clone()));
        return;
    };
    covered[v] = true;
    for &(e, o) in &adj[v] {
        if covered[o] {
            continue;
        }
        covered[o] = true;
        current.push(e);
        enumerate_rec(adj, covered, current, stubs, out);
        current.pop();
        covered[o] = false;
    }
    covered[v] = false;
}

/// Independent sign route: multiply the matching's monomial out inside the
/// Grassmann algebra (one generator per vertex slot, normally ordered by
/// (vertex, slot) in the contraction's vertex order) and read the top
/// coefficient.
fn grassmann_matching_sign(
    g: &PlanarGraph,
    orientation: &super::KasteleynOrientation,
    ko_index: &[usize],
    stubs_ccw: &[usize],
    s: &[usize],
    edges: &[usize],
) -> Result<f64> {
    use crate::grassmann::GrassmannPoly;
    // Generator index of each (vertex, slot), sorted by (ko order, slot).
    let mut slots: Vec<(usize, usize)> = Vec::new();
    for v in 0..g.n_vertices() {
        for i in 0..g.rotation(v).len() {
            slots.push((ko_index[v], i));
        }
    }
    slots.sort_unstable();
    let total = slots.len();
    if total > crate::grassmann::MAX_GENERATORS {
        return Err(Error::SizeLimit {
            what: "sign-oracle generators",
            got: total,
            limit: crate::grassmann::MAX_GENERATORS,
        });
    }
    let gen_of = |v: usize, slot: usize| -> usize {
        slots
            .binary_search(&(ko_index[v], slot))
            .expect("slot is indexed")
    };
    let mut prod = GrassmannPoly::one(total)?;
    let mut used = 0u32;
    for &stub in stubs_ccw {
        if s.contains(&stub) {
            let (v, slot) = g.stub_position(stub);
            let gi = gen_of(v, slot);
            prod = prod.multiply(&GrassmannPoly::generator(total, gi)?)?;
            used |= 1 << gi;
        }
    }
    for &e in edges {
        let (v0, p0) = g.dart_position(2 * e);
        let (v1, p1) = g.dart_position(2 * e + 1);
        let (g0, g1) = (gen_of(v0, p0), gen_of(v1, p1));
        let mut pair = GrassmannPoly::generator(total, g0)?
            .multiply(&GrassmannPoly::generator(total, g1)?)?;
        if !orientation.forward[e] {
            pair = pair.scale(Complex64::new(-1.0, 0.0));
        }
        prod = prod.multiply(&pair)?;
        used |= (1 << g0) | (1 << g1);
    }
    let coeff = prod.coeff(used);
    Ok(coeff.re.signum())
}
