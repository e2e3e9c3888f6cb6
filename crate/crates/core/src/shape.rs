//! Query graphs and join-shape labels.
//!
//! Subjects and objects of the triple patterns become nodes and predicates
//! become directed edges. Variables share one node wherever they occur and
//! constant subjects share one node per value. Constant objects always get a
//! node of their own.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Term;
use crate::sparql::{QueryAst, TriplePattern};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: NodeId,
    pub predicate: Term,
    pub to: NodeId,
    /// Index into `QueryAst::all_patterns()`.
    pub pattern: usize,
    pub optional: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryGraph {
    nodes: Vec<Term>,
    edges: Vec<GraphEdge>,
}

impl QueryGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn term(&self, node: NodeId) -> &Term {
        &self.nodes[node]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Term)> {
        self.nodes.iter().enumerate()
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// Node holding the given variable, if any.
    pub fn variable_node(&self, var: &str) -> Option<NodeId> {
        self.nodes.iter().position(|t| t.as_variable() == Some(var))
    }

    pub fn out_edges(&self, node: NodeId) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(move |e| e.from == node)
    }

    pub fn in_edges(&self, node: NodeId) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(move |e| e.to == node)
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.out_edges(node).count()
    }

    pub fn in_degree(&self, node: NodeId) -> usize {
        self.in_edges(node).count()
    }

    /// True when the edges contain no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        let mut indeg: Vec<usize> = (0..self.nodes.len()).map(|n| self.in_degree(n)).collect();
        let mut ready: Vec<NodeId> = (0..self.nodes.len()).filter(|&n| indeg[n] == 0).collect();
        let mut seen = 0;
        while let Some(n) = ready.pop() {
            seen += 1;
            for e in self.out_edges(n) {
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    ready.push(e.to);
                }
            }
        }
        seen == self.nodes.len()
    }

    /// Breadth-first levels reachable from `source` along outgoing edges.
    /// Level 0 is the source itself.
    pub fn bfs_levels(&self, source: NodeId) -> Vec<Vec<NodeId>> {
        let mut depth = vec![usize::MAX; self.nodes.len()];
        let mut queue = VecDeque::from([source]);
        depth[source] = 0;
        let mut levels: Vec<Vec<NodeId>> = Vec::new();
        while let Some(n) = queue.pop_front() {
            let d = depth[n];
            if levels.len() <= d {
                levels.push(Vec::new());
            }
            levels[d].push(n);
            for e in self.out_edges(n) {
                if depth[e.to] == usize::MAX {
                    depth[e.to] = d + 1;
                    queue.push_back(e.to);
                }
            }
        }
        levels
    }

    /// Nodes in breadth-first visiting order from `source`.
    pub fn bfs_order(&self, source: NodeId) -> Vec<NodeId> {
        self.bfs_levels(source).into_iter().flatten().collect()
    }
}

pub fn build_query_graph(ast: &QueryAst) -> QueryGraph {
    let required = ast.patterns.len();
    build_from_patterns(ast.all_patterns().enumerate().map(|(i, p)| (p, i >= required)))
}

fn build_from_patterns<'a>(patterns: impl Iterator<Item = (&'a TriplePattern, bool)>) -> QueryGraph {
    let mut g = QueryGraph::default();
    let mut shared: HashMap<Term, NodeId> = HashMap::new();
    let mut shared_node = |g: &mut QueryGraph, t: &Term| -> NodeId {
        *shared.entry(t.clone()).or_insert_with(|| {
            g.nodes.push(t.clone());
            g.nodes.len() - 1
        })
    };
    for (index, (p, optional)) in patterns.enumerate() {
        let from = shared_node(&mut g, &p.subject);
        let to = if p.object.is_variable() {
            shared_node(&mut g, &p.object)
        } else {
            g.nodes.push(p.object.clone());
            g.nodes.len() - 1
        };
        g.edges.push(GraphEdge {
            from,
            predicate: p.predicate.clone(),
            to,
            pattern: index,
            optional,
        });
    }
    g
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("query graph has no source node")]
    NoSource,
    #[error("query cannot be labeled: {0}")]
    UnlabelableQuery(String),
}

/// Nodes with no incoming and at least one outgoing edge, in order of first
/// appearance.
pub fn find_source_nodes(g: &QueryGraph) -> Result<Vec<NodeId>, ShapeError> {
    let sources: Vec<NodeId> = (0..g.node_count())
        .filter(|&n| g.in_degree(n) == 0 && g.out_degree(n) > 0)
        .collect();
    if sources.is_empty() {
        return Err(ShapeError::NoSource);
    }
    Ok(sources)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    SingleTriplePattern,
    SubjectSubject,
    SubjectObject,
    TreeLike,
}

impl Shape {
    pub const ALL: [Shape; 4] = [
        Shape::SingleTriplePattern,
        Shape::SubjectSubject,
        Shape::SubjectObject,
        Shape::TreeLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::SingleTriplePattern => "single-triple-pattern",
            Shape::SubjectSubject => "subject-subject",
            Shape::SubjectObject => "subject-object",
            Shape::TreeLike => "tree-like",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Shape::SingleTriplePattern => "STP",
            Shape::SubjectSubject => "SS",
            Shape::SubjectObject => "SO",
            Shape::TreeLike => "Co",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Shape::ALL
            .into_iter()
            .find(|sh| sh.name().eq_ignore_ascii_case(s) || sh.short().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown shape {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLabel {
    pub shape: Shape,
    pub has_modifiers: bool,
    pub has_optional: bool,
    pub has_filter: bool,
    pub source_nodes: Vec<NodeId>,
}

impl QueryLabel {
    /// A label with the given shape and flags and no graph behind it.
    pub fn synthetic(shape: Shape, has_modifiers: bool, has_optional: bool, has_filter: bool) -> Self {
        QueryLabel {
            shape,
            has_modifiers,
            has_optional,
            has_filter,
            source_nodes: Vec::new(),
        }
    }

    /// Compact form such as `SS+OPT+ORD+Lim+OFF`.
    pub fn summary(&self, ast: &QueryAst) -> String {
        let mut parts = vec![self.shape.short().to_string()];
        if self.has_optional {
            parts.push("OPT".into());
        }
        if self.has_filter {
            parts.push("Fil".into());
        }
        if ast.modifiers.order_by.is_some() {
            parts.push("ORD".into());
        }
        if ast.modifiers.limit.is_some() {
            parts.push("Lim".into());
        }
        if ast.modifiers.offset.is_some() {
            parts.push("OFF".into());
        }
        parts.join("+")
    }
}

impl fmt::Display for QueryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (modifiers: {}, optional: {}, filter: {})",
            self.shape, self.has_modifiers, self.has_optional, self.has_filter
        )
    }
}

pub fn label_query(ast: &QueryAst) -> Result<QueryLabel, ShapeError> {
    let g = build_query_graph(ast);
    let shape = classify(&g)?;
    Ok(QueryLabel {
        shape,
        has_modifiers: ast.modifiers.any(),
        has_optional: !ast.optional_blocks.is_empty(),
        has_filter: ast.filter.is_some(),
        source_nodes: find_source_nodes(&g)?,
    })
}

/// Shape of an already built graph.
pub fn classify(g: &QueryGraph) -> Result<Shape, ShapeError> {
    if g.edge_count() == 0 {
        return Err(ShapeError::UnlabelableQuery("query has no triple patterns".into()));
    }
    let sources = find_source_nodes(g).map_err(|e| ShapeError::UnlabelableQuery(e.to_string()))?;
    if !g.is_acyclic() {
        return Err(ShapeError::UnlabelableQuery("query graph contains a cycle".into()));
    }
    if g.edge_count() == 1 {
        return Ok(Shape::SingleTriplePattern);
    }
    let [source] = sources[..] else {
        return Ok(Shape::TreeLike);
    };
    let levels = g.bfs_levels(source);
    if levels.len() == 2 && levels[1].iter().all(|&n| g.out_degree(n) == 0) {
        return Ok(Shape::SubjectSubject);
    }
    let chain = levels.iter().all(|level| level.len() == 1)
        && levels.iter().flatten().all(|&n| g.out_degree(n) <= 1)
        && levels.last().is_some_and(|l| g.out_degree(l[0]) == 0);
    if chain {
        return Ok(Shape::SubjectObject);
    }
    Ok(Shape::TreeLike)
}
