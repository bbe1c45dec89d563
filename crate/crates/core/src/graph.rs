//! Graphs: segments, cycles, the integer line and general finite graphs.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_rational::Ratio;

use crate::error::{invalid, Error, Result};

pub type NodeId = i64;

/// Canonical key of an undirected edge: the endpoints in increasing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub lo: NodeId,
    pub hi: NodeId,
}

impl EdgeKey {
    pub fn new(u: NodeId, v: NodeId) -> Self {
        if u <= v {
            Self { lo: u, hi: v }
        } else {
            Self { lo: v, hi: u }
        }
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.lo == v || self.hi == v
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

/// An edge with an orientation: from `tail` (ě) to `head` (ê).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedEdge {
    pub tail: NodeId,
    pub head: NodeId,
}

impl DirectedEdge {
    pub fn new(tail: NodeId, head: NodeId) -> Self {
        Self { tail, head }
    }

    pub fn reverse(self) -> Self {
        Self { tail: self.head, head: self.tail }
    }

    pub fn key(self) -> EdgeKey {
        EdgeKey::new(self.tail, self.head)
    }

    /// True when the edge runs from the smaller to the larger id.
    pub fn is_forward(self) -> bool {
        self.tail < self.head
    }
}

impl fmt::Display for DirectedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}->{})", self.tail, self.head)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Segment,
    Cycle,
    IntegerLine,
    FiniteGeneral,
}

/// Parameters accepted by [`Graph::build`].
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// Path on the consecutive ids `left..=right`.
    Segment { left: NodeId, right: NodeId },
    /// Cycle on `1..=len`; the right neighbour of `x` is `x mod len + 1`.
    Cycle { len: usize },
    IntegerLine,
    /// Tree whose root `0` has `degree` children and every other inner node
    /// `degree - 1` children, down to `depth`. Ids are assigned breadth first.
    RegularTree { degree: usize, depth: usize },
    Complete { n: usize },
    /// Arbitrary simple graph given by its edge list.
    Edges(Vec<(NodeId, NodeId)>),
}

/// Neighbour list of a node; lists on oriented kinds are `[left, right]`.
#[derive(Debug, Clone, Copy)]
pub enum Neighbors<'a> {
    Pair([NodeId; 2]),
    Stored(&'a [NodeId]),
}

impl std::ops::Deref for Neighbors<'_> {
    type Target = [NodeId];
    fn deref(&self) -> &[NodeId] {
        match self {
            Neighbors::Pair(p) => p,
            Neighbors::Stored(s) => s,
        }
    }
}

/// Largest id span accepted for finite graphs (ids are stored densely).
const MAX_ID_SPAN: i64 = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    kind: GraphKind,
    /// Finite kinds: smallest id and adjacency indexed by `id - offset`.
    offset: NodeId,
    adjacency: Vec<Option<Vec<NodeId>>>,
    node_count: usize,
    degree_bound: usize,
}

impl Graph {
    pub fn build(spec: &GraphSpec) -> Result<Graph> {
        match spec {
            GraphSpec::Segment { left, right } => {
                if right <= left {
                    return invalid(format!("segment needs at least 2 nodes, got {left}..={right}"));
                }
                let edges: Vec<_> = (*left..*right).map(|x| (x, x + 1)).collect();
                Self::from_edges_with_kind(&edges, GraphKind::Segment)
            }
            GraphSpec::Cycle { len } => {
                if *len < 3 {
                    return invalid(format!("cycle length must be at least 3, got {len}"));
                }
                let n = *len as NodeId;
                let mut g = Self::from_edges_with_kind(
                    &(1..=n).map(|x| (x, x % n + 1)).collect::<Vec<_>>(),
                    GraphKind::Cycle,
                )?;
                for x in 1..=n {
                    let l = (x + n - 2) % n + 1;
                    let r = x % n + 1;
                    *g.slot_mut(x) = Some(vec![l, r]);
                }
                Ok(g)
            }
            GraphSpec::IntegerLine => Ok(Graph {
                kind: GraphKind::IntegerLine,
                offset: 0,
                adjacency: Vec::new(),
                node_count: 0,
                degree_bound: 2,
            }),
            GraphSpec::RegularTree { degree, depth } => {
                if *degree < 2 {
                    return invalid("regular tree degree must be at least 2");
                }
                let mut edges = Vec::new();
                let mut frontier = vec![0];
                let mut next_id: NodeId = 1;
                for level in 0..*depth {
                    let mut next = Vec::new();
                    for &p in &frontier {
                        let children = if level == 0 { *degree } else { degree - 1 };
                        for _ in 0..children {
                            edges.push((p, next_id));
                            next.push(next_id);
                            next_id += 1;
                            if next_id > MAX_ID_SPAN {
                                return Err(Error::Size("tree too large".into()));
                            }
                        }
                    }
                    frontier = next;
                }
                if edges.is_empty() {
                    return invalid("regular tree of depth 0 has no edges");
                }
                Self::from_edges_with_kind(&edges, GraphKind::FiniteGeneral)
            }
            GraphSpec::Complete { n } => {
                if *n < 2 {
                    return invalid("complete graph needs at least 2 nodes");
                }
                let n = *n as NodeId;
                let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
                Self::from_edges_with_kind(&edges, GraphKind::FiniteGeneral)
            }
            GraphSpec::Edges(edges) => Self::from_edges_with_kind(edges, GraphKind::FiniteGeneral),
        }
    }

    fn from_edges_with_kind(edges: &[(NodeId, NodeId)], kind: GraphKind) -> Result<Graph> {
        if edges.is_empty() {
            return invalid("graph needs at least one edge");
        }
        let mut seen = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return invalid(format!("self-loop at {u}"));
            }
            if !seen.insert(EdgeKey::new(u, v)) {
                return invalid(format!("duplicate edge {}", EdgeKey::new(u, v)));
            }
        }
        let lo = edges.iter().map(|e| e.0.min(e.1)).min().unwrap_or(0);
        let hi = edges.iter().map(|e| e.0.max(e.1)).max().unwrap_or(0);
        if hi - lo >= MAX_ID_SPAN {
            return Err(Error::Size(format!("node ids span {lo}..={hi}")));
        }
        let mut adjacency: Vec<Option<Vec<NodeId>>> = vec![None; (hi - lo + 1) as usize];
        for &(u, v) in edges {
            adjacency[(u - lo) as usize].get_or_insert_with(Vec::new).push(v);
            adjacency[(v - lo) as usize].get_or_insert_with(Vec::new).push(u);
        }
        for list in adjacency.iter_mut().flatten() {
            list.sort_unstable();
        }
        let node_count = adjacency.iter().filter(|a| a.is_some()).count();
        let degree_bound = adjacency.iter().flatten().map(Vec::len).max().unwrap_or(0);
        let g = Graph { kind, offset: lo, adjacency, node_count, degree_bound };
        if !g.is_connected() {
            return invalid("graph is not connected");
        }
        Ok(g)
    }

    fn slot(&self, v: NodeId) -> Option<&Vec<NodeId>> {
        let i = v.checked_sub(self.offset)?;
        if i < 0 {
            return None;
        }
        self.adjacency.get(i as usize)?.as_ref()
    }

    fn slot_mut(&mut self, v: NodeId) -> &mut Option<Vec<NodeId>> {
        &mut self.adjacency[(v - self.offset) as usize]
    }

    fn is_connected(&self) -> bool {
        let Some(start) = self.nodes().next() else { return false };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &w in self.slot(u).into_iter().flatten() {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen.len() == self.node_count
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn is_finite(&self) -> bool {
        self.kind != GraphKind::IntegerLine
    }

    /// Maximum degree K.
    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Number of nodes; `None` for the integer line.
    pub fn node_count(&self) -> Option<usize> {
        self.is_finite().then_some(self.node_count)
    }

    /// Nodes of a finite graph in increasing order (empty for the line).
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_some())
            .map(move |(i, _)| i as NodeId + self.offset)
    }

    /// Undirected edges of a finite graph in increasing key order.
    pub fn edges(&self) -> Vec<EdgeKey> {
        let mut out = Vec::new();
        for u in self.nodes() {
            for &v in self.slot(u).into_iter().flatten() {
                if u < v {
                    out.push(EdgeKey::new(u, v));
                }
            }
        }
        out
    }

    pub fn contains(&self, v: NodeId) -> bool {
        match self.kind {
            GraphKind::IntegerLine => true,
            _ => self.slot(v).is_some(),
        }
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        match self.kind {
            GraphKind::IntegerLine => (u - v).abs() == 1,
            _ => self.slot(u).is_some_and(|a| a.contains(&v)),
        }
    }

    pub fn neighbors(&self, v: NodeId) -> Result<Neighbors<'_>> {
        match self.kind {
            GraphKind::IntegerLine => Ok(Neighbors::Pair([v - 1, v + 1])),
            _ => self.slot(v).map(|a| Neighbors::Stored(a)).ok_or(Error::UnknownNode(v)),
        }
    }

    /// Whether the graph has a left/right orientation (segment, cycle, line).
    pub fn is_oriented(&self) -> bool {
        self.kind != GraphKind::FiniteGeneral
    }

    /// Right neighbour on oriented graphs: `v + 1` on the line and segment,
    /// the cyclic successor on the cycle.
    pub fn right_of(&self, v: NodeId) -> Option<NodeId> {
        match self.kind {
            GraphKind::IntegerLine => Some(v + 1),
            GraphKind::Segment => self.slot(v + 1).map(|_| v + 1),
            GraphKind::Cycle => self.slot(v).map(|a| a[1]),
            GraphKind::FiniteGeneral => None,
        }
    }

    /// Left neighbour on oriented graphs.
    pub fn left_of(&self, v: NodeId) -> Option<NodeId> {
        match self.kind {
            GraphKind::IntegerLine => Some(v - 1),
            GraphKind::Segment => self.slot(v - 1).map(|_| v - 1),
            GraphKind::Cycle => self.slot(v).map(|a| a[0]),
            GraphKind::FiniteGeneral => None,
        }
    }

    /// Induced subgraph on the nodes within distance `radius` of `center`.
    pub fn ball(&self, center: NodeId, radius: u64) -> Result<Graph> {
        if !self.contains(center) {
            return Err(Error::UnknownNode(center));
        }
        if self.kind == GraphKind::IntegerLine {
            if radius == 0 {
                return invalid("ball of radius 0 has no edges");
            }
            let r = radius as NodeId;
            return Graph::build(&GraphSpec::Segment { left: center - r, right: center + r });
        }
        let dist = self.bfs(center, Some(radius));
        let inside: BTreeSet<NodeId> = dist.iter().map(|(v, _)| *v).collect();
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .filter(|e| inside.contains(&e.lo) && inside.contains(&e.hi))
            .map(|e| (e.lo, e.hi))
            .collect();
        if edges.is_empty() {
            return invalid("ball of radius 0 has no edges");
        }
        let kind = match self.kind {
            GraphKind::Segment => GraphKind::Segment,
            GraphKind::Cycle if inside.len() == self.node_count => GraphKind::Cycle,
            _ => GraphKind::FiniteGeneral,
        };
        if kind == GraphKind::Cycle {
            return Ok(self.clone());
        }
        Self::from_edges_with_kind(&edges, kind)
    }

    /// Breadth-first distances from `source`, optionally cut off at `limit`.
    fn bfs(&self, source: NodeId, limit: Option<u64>) -> Vec<(NodeId, u64)> {
        let mut out = vec![(source, 0)];
        let mut seen = BTreeSet::from([source]);
        let mut queue = VecDeque::from([(source, 0u64)]);
        while let Some((u, d)) = queue.pop_front() {
            if limit.is_some_and(|l| d >= l) {
                continue;
            }
            for &w in self.slot(u).into_iter().flatten() {
                if seen.insert(w) {
                    out.push((w, d + 1));
                    queue.push_back((w, d + 1));
                }
            }
        }
        out
    }

    /// Graph distance; `Ok(None)` when `v` cannot be reached from `u`.
    pub fn distance(&self, u: NodeId, v: NodeId) -> Result<Option<u64>> {
        for x in [u, v] {
            if !self.contains(x) {
                return Err(Error::UnknownNode(x));
            }
        }
        if self.kind == GraphKind::IntegerLine {
            return Ok(Some(u.abs_diff(v)));
        }
        Ok(self.bfs(u, None).into_iter().find(|(w, _)| *w == v).map(|(_, d)| d))
    }

    /// Distance from `v` to the nearer endpoint of `e`.
    pub fn distance_to_edge(&self, v: NodeId, e: EdgeKey) -> Result<Option<u64>> {
        if !self.has_edge(e.lo, e.hi) {
            return invalid(format!("{e} is not an edge"));
        }
        let a = self.distance(v, e.lo)?;
        let b = self.distance(v, e.hi)?;
        Ok(match (a, b) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        })
    }

    /// Vertex-isoperimetric constant min |∂A|/|A| over nonempty proper subsets
    /// A, where ∂A is the set of nodes outside A adjacent to A.
    pub fn cheeger_constant(&self) -> Result<Ratio<u64>> {
        const MAX_NODES: usize = 24;
        if !self.is_finite() || self.node_count > MAX_NODES {
            return Err(Error::Size(format!("cheeger constant needs at most {MAX_NODES} nodes")));
        }
        let nodes: Vec<NodeId> = self.nodes().collect();
        let n = nodes.len();
        let masks: Vec<u32> = nodes
            .iter()
            .map(|&u| {
                self.slot(u)
                    .into_iter()
                    .flatten()
                    .map(|w| 1u32 << nodes.binary_search(w).expect("neighbour is a node"))
                    .fold(0, |m, b| m | b)
            })
            .collect();
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let mut best = Ratio::new(u64::MAX, 1);
        for a in 1..full {
            let mut reach = 0u32;
            let mut bits = a;
            while bits != 0 {
                reach |= masks[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            let boundary = u64::from((reach & !a).count_ones());
            let r = Ratio::new(boundary, u64::from(a.count_ones()));
            if r < best {
                best = r;
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(l: i64, r: i64) -> Graph {
        Graph::build(&GraphSpec::Segment { left: l, right: r }).unwrap()
    }

    #[test]
    fn builders() {
        let s = seg(-1, 1);
        assert_eq!(s.edges(), vec![EdgeKey::new(-1, 0), EdgeKey::new(0, 1)]);
        assert_eq!(s.degree_bound(), 2);
        let t = Graph::build(&GraphSpec::Cycle { len: 3 }).unwrap();
        assert_eq!(t.nodes().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(t.nodes().all(|v| t.neighbors(v).unwrap().len() == 2));
        assert_eq!((t.left_of(1), t.right_of(1)), (Some(3), Some(2)));
        assert_eq!((t.left_of(3), t.right_of(3)), (Some(2), Some(1)));
        let z = Graph::build(&GraphSpec::IntegerLine).unwrap();
        assert_eq!(&*z.neighbors(0).unwrap(), &[-1, 1]);
        assert_eq!(&*z.neighbors(-7_000_000_000).unwrap(), &[-7_000_000_001, -6_999_999_999]);
        assert!(Graph::build(&GraphSpec::Segment { left: 0, right: 0 }).is_err());
        assert!(Graph::build(&GraphSpec::Cycle { len: 2 }).is_err());
        assert!(Graph::build(&GraphSpec::Edges(vec![(0, 1), (2, 3)])).is_err());
        assert!(Graph::build(&GraphSpec::Edges(vec![(0, 1), (1, 0)])).is_err());
    }

    #[test]
    fn symmetry_of_adjacency() {
        for g in [
            Graph::build(&GraphSpec::RegularTree { degree: 4, depth: 3 }).unwrap(),
            Graph::build(&GraphSpec::Complete { n: 5 }).unwrap(),
            Graph::build(&GraphSpec::Cycle { len: 7 }).unwrap(),
        ] {
            for u in g.nodes() {
                let nb = g.neighbors(u).unwrap();
                assert!(nb.len() <= g.degree_bound());
                for &w in nb.iter() {
                    assert!(g.neighbors(w).unwrap().contains(&u));
                }
            }
        }
    }

    #[test]
    fn balls() {
        let z = Graph::build(&GraphSpec::IntegerLine).unwrap();
        let b = z.ball(0, 2).unwrap();
        assert_eq!(b.kind(), GraphKind::Segment);
        assert_eq!(b.nodes().collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
        let t = Graph::build(&GraphSpec::Cycle { len: 3 }).unwrap();
        assert_eq!(t.ball(1, 1).unwrap(), t);
        let tree = Graph::build(&GraphSpec::RegularTree { degree: 4, depth: 3 }).unwrap();
        assert_eq!(tree.node_count(), Some(1 + 4 + 12 + 36));
        let star = tree.ball(0, 1).unwrap();
        assert_eq!(star.node_count(), Some(5));
        assert_eq!(star.neighbors(0).unwrap().len(), 4);
    }

    #[test]
    fn distances() {
        let s = seg(-2, 2);
        assert_eq!(s.distance(-2, 2).unwrap(), Some(4));
        assert_eq!(s.distance(1, 1).unwrap(), Some(0));
        let z = Graph::build(&GraphSpec::IntegerLine).unwrap();
        assert_eq!(z.distance_to_edge(0, EdgeKey::new(3, 4)).unwrap(), Some(3));
        assert_eq!(z.distance_to_edge(9, EdgeKey::new(3, 4)).unwrap(), Some(5));
        assert!(s.distance(0, 9).is_err());
        assert!(s.distance_to_edge(0, EdgeKey::new(-2, 0)).is_err());
    }

    #[test]
    fn cheeger_examples() {
        assert_eq!(seg(-1, 1).cheeger_constant().unwrap(), Ratio::new(1, 2));
        let k4 = Graph::build(&GraphSpec::Complete { n: 4 }).unwrap();
        assert_eq!(k4.cheeger_constant().unwrap(), Ratio::new(1, 3));
        assert_eq!(seg(0, 1).cheeger_constant().unwrap(), Ratio::new(1, 1));
        let big = Graph::build(&GraphSpec::Complete { n: 25 }).unwrap();
        assert!(matches!(big.cheeger_constant(), Err(Error::Size(_))));
    }

    #[test]
    fn directed_edges() {
        let e = DirectedEdge::new(3, 2);
        assert_eq!(e.reverse().reverse(), e);
        assert_eq!(e.key(), EdgeKey::new(2, 3));
        assert!(!e.is_forward());
    }
}
