//! Connected simple graphs, spanning trees, rooted branch statistics and
//! depth-first patrol tours.
//!
//! Vertices are dense `0..n` ids. Every [`Graph`] is validated at
//! construction: no self-loops, no duplicate edges, connected.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("graph is disconnected ({reached} of {n} vertices reachable from 0)")]
    Disconnected { reached: usize, n: usize },
    #[error("not a tree: {edges} edges on {n} vertices")]
    NotATree { n: usize, edges: usize },
}

/// Connected undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds and validates a graph. Edges are stored normalized (`u < v`)
    /// and sorted; adjacency lists are ascending.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let e = (u.min(v), u.max(v));
            if !set.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = Graph { n, edges, adj };
        let reached = g.bfs_order(0).len();
        if reached != n {
            return Err(GraphError::Disconnected { reached, n });
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Ascending neighbor list.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// True when `u == v` or `{u, v}` is an edge: the cop may move from `u`
    /// to `v` in one step.
    pub fn can_step(&self, u: usize, v: usize) -> bool {
        u == v || self.has_edge(u, v)
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n
    }

    /// Vertices of degree one.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.degree(v) == 1).collect()
    }

    /// Breadth-first distances from `src`.
    pub fn distances_from(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn bfs_order(&self, src: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        seen[src] = true;
        let mut order = vec![src];
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
        order
    }

    /// Breadth-first spanning tree from vertex 0, neighbors scanned in
    /// ascending order. A tree input comes back unchanged.
    pub fn spanning_tree(&self) -> Graph {
        let mut seen = vec![false; self.n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        let mut edges = Vec::with_capacity(self.n - 1);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    edges.push((u, w));
                    queue.push_back(w);
                }
            }
        }
        Graph::new(self.n, edges).expect("spanning tree of a connected graph is valid")
    }

    /// If this graph is the star `K_{1,n-1}` (n >= 2), returns its center.
    /// For `n = 2` the center is vertex 0.
    pub fn star_center(&self) -> Option<usize> {
        if self.n < 2 || !self.is_tree() {
            return None;
        }
        (0..self.n).find(|&v| self.degree(v) == self.n - 1)
    }

    /// If this graph is the cycle `C_n` (n >= 3), returns the cyclic vertex
    /// order starting at `start` and heading to its smaller neighbor.
    pub fn cycle_order(&self, start: usize) -> Option<Vec<usize>> {
        if self.n < 3 || start >= self.n || self.edges.len() != self.n {
            return None;
        }
        if (0..self.n).any(|v| self.degree(v) != 2) {
            return None;
        }
        let mut order = Vec::with_capacity(self.n);
        let (mut prev, mut cur) = (start, self.adj[start][0]);
        order.push(start);
        while cur != start {
            order.push(cur);
            let next = if self.adj[cur][0] == prev { self.adj[cur][1] } else { self.adj[cur][0] };
            prev = cur;
            cur = next;
        }
        // connected + all degree 2 means a single cycle
        (order.len() == self.n).then_some(order)
    }

    /// Parses the edge-list format: first non-comment line `n m`, then `m`
    /// lines `u v`. Lines starting with `#` and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(GraphError::Malformed {
            line: 0,
            msg: "missing header line \"n m\"".into(),
        })?;
        let [n, m] = parse_pair(hline, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, body) in lines {
            if edges.len() == m {
                return Err(GraphError::Malformed { line, msg: format!("more than {m} edge lines") });
            }
            let [u, v] = parse_pair(line, body)?;
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(GraphError::Malformed {
                line: 0,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, edges)
    }

    /// Renders the graph in the edge-list file format.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

fn parse_pair(line: usize, body: &str) -> Result<[usize; 2], GraphError> {
    let fields: Vec<&str> = body.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(GraphError::Malformed { line, msg: format!("expected two integers, got {:?}", body) });
    }
    let mut out = [0; 2];
    for (slot, f) in out.iter_mut().zip(&fields) {
        *slot = f.parse().map_err(|_| GraphError::Malformed { line, msg: format!("not a vertex id: {f:?}") })?;
    }
    Ok(out)
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Graph::parse(s)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_edge_list())
    }
}

/// A tree with a distinguished root and per-vertex branch sizes.
///
/// The branch at `v` is the set of vertices whose path to the root passes
/// through `v`; `subtree_size(v)` is its cardinality.
#[derive(Debug, Clone)]
pub struct RootedTree {
    tree: Graph,
    root: usize,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    subtree_size: Vec<usize>,
    preorder: Vec<usize>,
}

impl RootedTree {
    pub fn new(tree: Graph, root: usize) -> Result<Self, GraphError> {
        let n = tree.n();
        if !tree.is_tree() {
            return Err(GraphError::NotATree { n, edges: tree.edge_count() });
        }
        if root >= n {
            return Err(GraphError::VertexOutOfRange { vertex: root, n });
        }
        let mut parent = vec![usize::MAX; n];
        let mut children = vec![Vec::new(); n];
        parent[root] = root;
        let mut preorder = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            preorder.push(u);
            for &w in tree.neighbors(u).iter().rev() {
                if parent[w] == usize::MAX {
                    parent[w] = u;
                    stack.push(w);
                }
            }
        }
        for &v in &preorder[1..] {
            children[parent[v]].push(v);
        }
        for list in &mut children {
            list.sort_unstable();
        }
        let mut subtree_size = vec![1; n];
        for &v in preorder[1..].iter().rev() {
            subtree_size[parent[v]] += subtree_size[v];
        }
        Ok(RootedTree { tree, root, parent, children, subtree_size, preorder })
    }

    pub fn tree(&self) -> &Graph {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Parent of `v`; the root is its own parent.
    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn subtree_size(&self, v: usize) -> usize {
        self.subtree_size[v]
    }

    /// Depth-first preorder from the root, children ascending.
    pub fn preorder(&self) -> &[usize] {
        &self.preorder
    }

    /// A non-root vertex without children.
    pub fn is_leaf(&self, v: usize) -> bool {
        v != self.root && self.children[v].is_empty()
    }

    /// Closed depth-first tour from the root back to the root. Every tree
    /// edge is walked twice and each leaf entry is followed by one extra
    /// turn at that leaf. Children are taken in ascending order; `reversed`
    /// yields the same tour backwards (children descending).
    ///
    /// The single-vertex tree gives `[root, root]`.
    pub fn dfs_patrol_order(&self, reversed: bool) -> Vec<usize> {
        if self.n() == 1 {
            return vec![self.root, self.root];
        }
        let mut tour = Vec::with_capacity(3 * self.n());
        // (vertex, index of next child to visit)
        let mut stack = vec![(self.root, 0usize)];
        tour.push(self.root);
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if let Some(&c) = self.children[v].get(top.1) {
                top.1 += 1;
                tour.push(c);
                if self.children[c].is_empty() {
                    tour.push(c);
                }
                stack.push((c, 0));
            } else {
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    tour.push(p);
                }
            }
        }
        if reversed {
            tour.reverse();
        }
        tour
    }
}
