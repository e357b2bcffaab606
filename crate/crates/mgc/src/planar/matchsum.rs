//! Exact matching-sum evaluation: PerfMatch(G, S) sums the edge-weight
//! products over all matchings that leave exactly the vertices of S
//! unmatched and match every other vertex once.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{PlanarGraph, Slot};

/// Enumeration bound for the recursive oracle.
pub const MAX_BRUTEFORCE_VERTICES: usize = 30;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Recursive enumeration of S-imperfect matchings, |V| ≤ 30. Self-loops
/// never participate in matchings and are ignored.
pub fn matching_sum_bruteforce(g: &PlanarGraph, s: &[usize]) -> Result<Complex64> {
    let n = g.n_vertices();
    if n > MAX_BRUTEFORCE_VERTICES {
        return Err(Error::SizeLimit {
            what: "matching-sum vertices",
            got: n,
            limit: MAX_BRUTEFORCE_VERTICES,
        });
    }
    let mut excluded = vec![false; n];
    for &v in s {
        if v >= n {
            return Err(Error::BadNetwork(format!("S contains unknown vertex {v}")));
        }
        excluded[v] = true;
    }
    // adjacency: per vertex, (edge, other endpoint)
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for e in 0..g.n_edges() {
        let (a, b) = g.endpoints(e);
        if a == b {
            continue;
        }
        adj[a].push((e, b));
        adj[b].push((e, a));
    }
    let mut matched = excluded;
    let mut total = ZERO;
    recurse(g, &adj, &mut matched, ONE, &mut total);
    Ok(total)
}

fn recurse(
    g: &PlanarGraph,
    adj: &[Vec<(usize, usize)>],
    matched: &mut [bool],
    acc: Complex64,
    total: &mut Complex64,
) {
    // Pick the uncovered vertex with the fewest available partners.
    let mut pick = usize::MAX;
    let mut pick_count = usize::MAX;
    for v in 0..matched.len() {
        if matched[v] {
            continue;
        }
        let count = adj[v].iter().filter(|(_, o)| !matched[*o]).count();
        if count < pick_count {
            pick = v;
            pick_count = count;
            if count == 0 {
                return; // dead branch
            }
        }
    }
    if pick == usize::MAX {
        *total += acc;
        return;
    }
    matched[pick] = true;
    for &(e, other) in &adj[pick] {
        if matched[other] {
            continue;
        }
        matched[other] = true;
        recurse(g, adj, matched, acc * g.weight(e), total);
        matched[other] = false;
    }
    matched[pick] = false;
}

/// Exact matching sum by dynamic programming over a vertex elimination
/// order: the state tracks which frontier vertices are already matched.
/// Used as the larger-scale cross-check oracle for compiled graphs, whose
/// construction supplies a low-width sweep order. The frontier is capped at
/// 60 vertices.
pub fn matching_sum_exact(g: &PlanarGraph, s: &[usize], order: &[usize]) -> Result<Complex64> {
    let n = g.n_vertices();
    if order.len() != n {
        return Err(Error::BadNetwork(format!(
            "sweep order has {} entries for {} vertices",
            order.len(),
            n
        )));
    }
    let mut in_s = vec![false; n];
    for &v in s {
        in_s[v] = true;
    }
    let mut time = vec![usize::MAX; n];
    for (t, &v) in order.iter().enumerate() {
        time[v] = t;
    }
    if time.iter().any(|&t| t == usize::MAX) {
        return Err(Error::BadNetwork("sweep order is not a permutation".into()));
    }
    // Retirement time of each vertex: when its last incident edge appears.
    let mut retire = time.clone();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for e in 0..g.n_edges() {
        let (a, b) = g.endpoints(e);
        if a == b {
            continue;
        }
        adj[a].push((e, b));
        adj[b].push((e, a));
        let t = time[a].max(time[b]);
        retire[a] = retire[a].max(t);
        retire[b] = retire[b].max(t);
    }

    // Frontier window bookkeeping.
    let mut window_of: HashMap<usize, usize> = HashMap::new();
    let mut free_windows: Vec<usize> = (0..64).rev().collect();
    // states: mask of matched frontier vertices → weight
    let mut states: HashMap<u64, Complex64> = HashMap::new();
    states.insert(0, ONE);

    for (t, &v) in order.iter().enumerate() {
        let Some(wv) = free_windows.pop() else {
            return Err(Error::SizeLimit {
                what: "matching DP frontier",
                got: 65,
                limit: 64,
            });
        };
        window_of.insert(v, wv);
        // place v unmatched, then branch on matching it now
        let mut next: HashMap<u64, Complex64> = HashMap::new();
        for (&mask, &w) in &states {
            // v stays unmatched for now
            merge(&mut next, mask, w);
            // or match v with an earlier, unmatched frontier neighbor
            for &(e, o) in &adj[v] {
                if time[o] >= t {
                    continue;
                }
                let Some(&wo) = window_of.get(&o) else {
                    continue;
                };
                if mask & (1 << wo) != 0 {
                    continue;
                }
                merge(
                    &mut next,
                    mask | (1 << wo) | (1 << wv),
                    w * g.weight(e),
                );
            }
        }
        states = next;
        // retire vertices whose last edge has now been seen
        let retiring: Vec<usize> = window_of
            .keys()
            .copied()
            .filter(|&u| retire[u] <= t)
            .collect();
        for u in retiring {
            let wu = window_of.remove(&u).unwrap();
            free_windows.push(wu);
            let bit = 1u64 << wu;
            let mut next: HashMap<u64, Complex64> = HashMap::new();
            for (&mask, &w) in &states {
                let is_matched = mask & bit != 0;
                // a retiring vertex must be matched unless it is in S;
                // an S vertex must stay unmatched
                if in_s[u] {
                    if !is_matched {
                        merge(&mut next, mask, w);
                    }
                } else if is_matched {
                    merge(&mut next, mask & !bit, w);
                }
            }
            states = next;
        }
    }
    Ok(states.get(&0).copied().unwrap_or(ZERO))
}

fn merge(map: &mut HashMap<u64, Complex64>, key: u64, w: Complex64) {
    *map.entry(key).or_insert(ZERO) += w;
}

/// A matching plus the stub set it leaves unmatched, used as the sign
/// reference for the one-shot contraction.
pub struct ReferenceMatching {
    /// Edges in the matching.
    pub edges: Vec<usize>,
    /// Stubs marking the unmatched boundary vertices.
    pub stubs: Vec<usize>,
}

/// Searches for an S-imperfect matching where S ranges over subsets of the
/// stub-carrying vertices: every vertex is matched except possibly stub
/// carriers. Ghost vertices make stub use optional; petgraph's maximum
/// matching does the search. Returns `None` when no such matching exists
/// (the contracted tensor is then identically zero).
pub fn find_reference_matching(g: &PlanarGraph) -> Option<ReferenceMatching> {
    use petgraph::graph::{NodeIndex, UnGraph};
    let n = g.n_vertices();
    let m = g.n_stubs();
    let mut pg: UnGraph<(), usize> = UnGraph::new_undirected();
    let nodes: Vec<NodeIndex> = (0..n).map(|_| pg.add_node(())).collect();
    for e in 0..g.n_edges() {
        let (a, b) = g.endpoints(e);
        if a != b {
            pg.add_edge(nodes[a], nodes[b], e);
        }
    }
    // Ghosts: one per stub, attached to its carrier; cliqued together so
    // unused ghosts can pair off. A pad ghost fixes the parity.
    let mut ghosts = Vec::new();
    for s in 0..m {
        let gh = pg.add_node(());
        let (v, _) = g.stub_position(s);
        pg.add_edge(gh, nodes[v], usize::MAX - s);
        ghosts.push(gh);
    }
    if (n + m) % 2 == 1 {
        ghosts.push(pg.add_node(()));
    }
    for i in 0..ghosts.len() {
        for j in (i + 1)..ghosts.len() {
            pg.add_edge(ghosts[i], ghosts[j], usize::MAX);
        }
    }
    let matching = petgraph::algo::matching::maximum_matching(&pg);
    if 2 * matching.len() != pg.node_count() {
        return None;
    }
    let mut edges = Vec::new();
    let mut stubs = Vec::new();
    for (a, b) in matching.edges() {
        let (ai, bi) = (a.index(), b.index());
        if ai < n && bi < n {
            let eid = pg
                .find_edge(a, b)
                .and_then(|e| pg.edge_weight(e).copied())
                .unwrap();
            // find_edge may return a parallel edge; any edge between the
            // pair serves equally as a reference matching edge
            edges.push(eid);
        } else if ai < n || bi < n {
            let ghost = if ai < n { bi } else { ai };
            let stub = usize::MAX - pg.edge_weight(pg.find_edge(a, b).unwrap()).copied().unwrap();
            let _ = ghost;
            stubs.push(stub);
        }
    }
    stubs.sort_unstable();
    Some(ReferenceMatching { edges, stubs })
}
