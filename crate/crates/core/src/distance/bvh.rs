//! Bounding-volume tree over edge pieces.

use crate::curve::{CurveGraph, EdgeHit};
use crate::geometry::{Aabb, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Piece {
    edge: usize,
    s0: f64,
    s1: f64,
    bbox: Aabb,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bbox: Aabb, start: usize, end: usize },
    Inner { bbox: Aabb, left: usize, right: usize },
}

impl Node {
    fn bbox(&self) -> &Aabb {
        match self {
            Node::Leaf { bbox, .. } | Node::Inner { bbox, .. } => bbox,
        }
    }
}

/// Acceleration structure for closest-point queries against one graph.
/// Results are identical to a brute-force scan over every edge, including
/// the tie-break (lowest edge index, then lowest arc-length parameter).
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    pieces: Vec<Piece>,
    nodes: Vec<Node>,
    edge_count: usize,
}

impl SpatialIndex {
    pub fn build(graph: &CurveGraph) -> Self {
        let mut pieces: Vec<Piece> = graph
            .edges()
            .iter()
            .enumerate()
            .flat_map(|(edge, e)| {
                e.geometry().index_pieces().into_iter().map(move |(s0, s1)| Piece {
                    edge,
                    s0,
                    s1,
                    bbox: e.geometry().bounding_box(s0, s1),
                })
            })
            .collect();
        let mut nodes = Vec::new();
        if !pieces.is_empty() {
            let n = pieces.len();
            build_node(&mut pieces, 0, n, &mut nodes);
        }
        SpatialIndex { pieces, nodes, edge_count: graph.edges().len() }
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Closest edge hit as `(edge index, hit)`; `None` for an empty graph.
    pub(crate) fn closest(&self, graph: &CurveGraph, p: &Vec3) -> Option<(usize, EdgeHit)> {
        debug_assert_eq!(graph.edges().len(), self.edge_count, "index built for another graph");
        let mut best: Option<(usize, EdgeHit)> = None;
        if self.nodes.is_empty() {
            return best;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            // keep boxes at exactly the best distance: they may win the tie-break
            if best.is_some_and(|(_, b)| node.bbox().distance(p) > b.rho) {
                continue;
            }
            match node {
                Node::Leaf { start, end, .. } => {
                    for piece in &self.pieces[*start..*end] {
                        if best.is_some_and(|(_, b)| piece.bbox.distance(p) > b.rho) {
                            continue;
                        }
                        let hit = graph.edges()[piece.edge].geometry().closest_in_range(p, piece.s0, piece.s1);
                        if best.map_or(true, |(e, b)| precedes(piece.edge, &hit, e, &b)) {
                            best = Some((piece.edge, hit));
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[*left].bbox().distance(p);
                    let dr = self.nodes[*right].bbox().distance(p);
                    if dl <= dr {
                        stack.push(*right);
                        stack.push(*left);
                    } else {
                        stack.push(*left);
                        stack.push(*right);
                    }
                }
            }
        }
        best
    }
}

/// Lexicographic order on (distance, edge, parameter).
pub(crate) fn precedes(edge: usize, hit: &EdgeHit, best_edge: usize, best: &EdgeHit) -> bool {
    hit.rho < best.rho || (hit.rho == best.rho && (edge, hit.s) < (best_edge, best.s))
}

fn build_node(pieces: &mut [Piece], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let bbox = pieces[start..end].iter().fold(Aabb::empty(), |b, p| b.merge(&p.bbox));
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { bbox, start, end });
        return id;
    }
    let centers = pieces[start..end].iter().fold(Aabb::empty(), |mut b, p| {
        b.include(&p.bbox.center());
        b
    });
    let axis = centers.longest_axis();
    let mid = (start + end) / 2;
    pieces[start..end].select_nth_unstable_by(mid - start, |a, b| {
        a.bbox.center()[axis].total_cmp(&b.bbox.center()[axis])
    });
    nodes.push(Node::Leaf { bbox, start, end }); // placeholder
    let left = build_node(pieces, start, mid, nodes);
    let right = build_node(pieces, mid, end, nodes);
    nodes[id] = Node::Inner { bbox, left, right };
    id
}
