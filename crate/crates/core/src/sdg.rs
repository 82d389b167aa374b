//! Symmetry detection graphs: typed nodes, optionally valued edges and
//! ε-blocked colors.
//!
//! Payloads live in one array per node kind; `node_kind` and `node_info_pos`
//! locate the payload of a node.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{plain_type, variable_type, Minlp, VariableType, EPS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    Permutation,
    Reflection,
}

/// Declaration order is the order of the color ranges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum NodeKind {
    Operator,
    Value,
    Var,
    Constraint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum NodeData {
    Operator(u32),
    Value(f64),
    Var(i32),
    Constraint { handler: u32, lhs: f64, rhs: f64 },
}

/// `value` is `f64::INFINITY` when the edge carries no value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub first: usize,
    pub second: usize,
    pub value: f64,
}

impl Edge {
    pub fn has_value(&self) -> bool {
        self.value != f64::INFINITY
    }
}

/// Nodes added for one constraint; `anchor` is its constraint node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub constraint: usize,
    pub anchor: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug)]
pub struct Sdg {
    mode: Mode,
    n: usize,
    var_types: Vec<VariableType>,
    node_kind: Vec<NodeKind>,
    node_info_pos: Vec<usize>,
    op_ids: Vec<u32>,
    values: Vec<f64>,
    var_ids: Vec<i32>,
    cons: Vec<(u32, f64, f64)>,
    edges: Vec<Edge>,
    segments: Vec<Segment>,
    locked: bool,
    node_colors: Option<Vec<usize>>,
    edge_colors: Option<Vec<usize>>,
}

impl Sdg {
    /// Graph holding only the distinguished variable nodes: `v_1..v_n`, then
    /// `v_{-1}..v_{-n}` with pair edges in reflection mode.
    pub fn new(p: &Minlp, mode: Mode) -> Self {
        let n = p.n();
        let mut var_types = Vec::new();
        let mut g = Sdg {
            mode,
            n,
            var_types: Vec::new(),
            node_kind: Vec::new(),
            node_info_pos: Vec::new(),
            op_ids: Vec::new(),
            values: Vec::new(),
            var_ids: Vec::new(),
            cons: Vec::new(),
            edges: Vec::new(),
            segments: Vec::new(),
            locked: false,
            node_colors: None,
            edge_colors: None,
        };
        let signed: Vec<i32> = match mode {
            Mode::Permutation => (1..=n as i32).collect(),
            Mode::Reflection => (1..=n as i32).chain((1..=n as i32).map(|i| -i)).collect(),
        };
        for i in signed {
            let t = match mode {
                Mode::Permutation => plain_type(p, i as usize - 1),
                Mode::Reflection => variable_type(p, i),
            };
            var_types.push(t.expect("index in range"));
            g.var_ids.push(i);
            g.push_node(NodeKind::Var);
        }
        g.var_types = var_types;
        if mode == Mode::Reflection {
            for i in 0..n {
                g.edges.push(Edge { first: i, second: n + i, value: f64::INFINITY });
            }
        }
        g
    }

    fn push_node(&mut self, kind: NodeKind) -> usize {
        let pos = match kind {
            NodeKind::Operator => self.op_ids.len(),
            NodeKind::Value => self.values.len(),
            NodeKind::Var => self.var_ids.len(),
            NodeKind::Constraint => self.cons.len(),
        } - 1;
        self.node_kind.push(kind);
        self.node_info_pos.push(pos);
        self.node_kind.len() - 1
    }

    fn unlocked(&self) -> Result<()> {
        if self.locked {
            Err(Error::Locked)
        } else {
            Ok(())
        }
    }

    pub fn add_operator_node(&mut self, op_id: u32) -> Result<usize> {
        self.unlocked()?;
        self.op_ids.push(op_id);
        Ok(self.push_node(NodeKind::Operator))
    }

    pub fn add_value_node(&mut self, v: f64) -> Result<usize> {
        self.unlocked()?;
        if v.is_nan() {
            return Err(Error::InvalidModel("NaN value node".into()));
        }
        self.values.push(v);
        Ok(self.push_node(NodeKind::Value))
    }

    pub fn add_constraint_node(&mut self, handler: u32, lhs: f64, rhs: f64) -> Result<usize> {
        self.unlocked()?;
        self.cons.push((handler, lhs, rhs));
        Ok(self.push_node(NodeKind::Constraint))
    }

    pub fn var_node(&self, i: i32) -> Result<usize> {
        let a = i.unsigned_abs() as usize;
        if i == 0 || a > self.n {
            return Err(Error::IndexOutOfRange { index: i as i64, n: self.n });
        }
        match (i > 0, self.mode) {
            (true, _) => Ok(a - 1),
            (false, Mode::Reflection) => Ok(self.n + a - 1),
            (false, Mode::Permutation) => Err(Error::NegativeInPermutationMode),
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, value: Option<f64>) -> Result<()> {
        self.unlocked()?;
        let count = self.node_count();
        if u >= count || v >= count {
            return Err(Error::BadEdge(format!("node {} or {} does not exist", u, v)));
        }
        if u == v {
            return Err(Error::BadEdge(format!("self-loop at {}", u)));
        }
        if self.node_kind[u] == NodeKind::Var && self.node_kind[v] == NodeKind::Var {
            return Err(Error::BadEdge("edge between two variable nodes".into()));
        }
        let value = match value {
            Some(x) if x.is_nan() || x.is_infinite() => {
                return Err(Error::BadEdge(format!("edge value {}", x)));
            }
            Some(x) => x,
            None => f64::INFINITY,
        };
        self.edges.push(Edge { first: u, second: v, value });
        Ok(())
    }

    pub fn record_segment(&mut self, constraint: usize, anchor: usize, start: usize) {
        let end = self.node_count();
        self.segments.push(Segment { constraint, anchor, start, end });
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.node_kind.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_locked(&self) -> bool {
        self.locked
    }

    pub fn kind(&self, u: usize) -> NodeKind {
        self.node_kind[u]
    }

    pub fn node(&self, u: usize) -> NodeData {
        let pos = self.node_info_pos[u];
        match self.node_kind[u] {
            NodeKind::Operator => NodeData::Operator(self.op_ids[pos]),
            NodeKind::Value => NodeData::Value(self.values[pos]),
            NodeKind::Var => NodeData::Var(self.var_ids[pos]),
            NodeKind::Constraint => {
                let (handler, lhs, rhs) = self.cons[pos];
                NodeData::Constraint { handler, lhs, rhs }
            }
        }
    }

    /// Signed variable index of a variable node.
    pub fn var_of(&self, u: usize) -> Option<i32> {
        (self.node_kind.get(u) == Some(&NodeKind::Var)).then(|| self.var_ids[self.node_info_pos[u]])
    }

    pub fn var_type_of(&self, u: usize) -> Option<VariableType> {
        (self.node_kind.get(u) == Some(&NodeKind::Var)).then(|| self.var_types[self.node_info_pos[u]])
    }

    pub fn count_kind(&self, kind: NodeKind) -> usize {
        self.node_kind.iter().filter(|&&k| k == kind).count()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            adj[e.first].push(e.second);
            adj[e.second].push(e.first);
        }
        adj
    }

    fn node_key(&self, u: usize) -> Vec<f64> {
        // adding 0.0 maps -0 to 0; total_cmp would otherwise split them
        let key = match self.node(u) {
            NodeData::Operator(id) => vec![id as f64],
            NodeData::Value(v) => vec![v],
            NodeData::Var(_) => {
                let t = self.var_type_of(u).expect("var node");
                vec![t.rel_lower, t.rel_upper, t.obj_coef, f64::from(u8::from(t.integral))]
            }
            NodeData::Constraint { handler, lhs, rhs } => vec![handler as f64, lhs, rhs],
        };
        key.into_iter().map(|v| v + 0.0).collect()
    }

    /// Assigns colors and locks the graph. Within each node kind, and over edge
    /// values, sorted data is cut into maximal blocks whose first and last
    /// entries differ by at most `eps` in every component.
    pub fn compute_colors(&mut self, eps: f64) {
        self.locked = true;
        let mut next = 0usize;
        let mut node_colors = vec![0; self.node_count()];
        for kind in [NodeKind::Operator, NodeKind::Value, NodeKind::Var, NodeKind::Constraint] {
            let mut items: Vec<(Vec<f64>, usize)> =
                (0..self.node_count()).filter(|&u| self.node_kind[u] == kind).map(|u| (self.node_key(u), u)).collect();
            items.sort_by(|a, b| lex_cmp(&a.0, &b.0).then(a.1.cmp(&b.1)));
            for (u, c) in blocks(&items, eps, &mut next) {
                node_colors[u] = c;
            }
        }
        let mut items: Vec<(Vec<f64>, usize)> =
            self.edges.iter().enumerate().filter(|(_, e)| e.has_value()).map(|(k, e)| (vec![e.value + 0.0], k)).collect();
        items.sort_by(|a, b| lex_cmp(&a.0, &b.0).then(a.1.cmp(&b.1)));
        let mut edge_colors = vec![0; self.edges.len()];
        for (k, c) in blocks(&items, eps, &mut next) {
            edge_colors[k] = c;
        }
        if self.edges.iter().any(|e| !e.has_value()) {
            for (k, e) in self.edges.iter().enumerate() {
                if !e.has_value() {
                    edge_colors[k] = next;
                }
            }
        }
        self.node_colors = Some(node_colors);
        self.edge_colors = Some(edge_colors);
    }

    pub fn node_colors(&self) -> Option<&[usize]> {
        self.node_colors.as_deref()
    }

    pub fn edge_colors(&self) -> Option<&[usize]> {
        self.edge_colors.as_deref()
    }

    /// Deterministic text listing of nodes and edges with colors.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let nc = self.node_colors.as_deref();
        let ec = self.edge_colors.as_deref();
        let color = |c: Option<&[usize]>, k: usize| c.map_or("-".to_string(), |c| c[k].to_string());
        for u in 0..self.node_count() {
            let payload = match self.node(u) {
                NodeData::Operator(id) => format!("op {}", id),
                NodeData::Value(v) => format!("value {}", v),
                NodeData::Var(i) => format!("var {}", i),
                NodeData::Constraint { handler, lhs, rhs } => format!("cons {} {} {}", handler, lhs, rhs),
            };
            let _ = writeln!(s, "node {} {} color {}", u, payload, color(nc, u));
        }
        for (k, e) in self.edges.iter().enumerate() {
            let v = if e.has_value() { e.value.to_string() } else { "none".to_string() };
            let _ = writeln!(s, "edge {} {} value {} color {}", e.first, e.second, v, color(ec, k));
        }
        s
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

fn within(a: &[f64], b: &[f64], eps: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| x == y || (x - y).abs() <= eps)
}

fn blocks(items: &[(Vec<f64>, usize)], eps: f64, next: &mut usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(items.len());
    let mut first: Option<&[f64]> = None;
    for (key, id) in items {
        match first {
            Some(f) if within(f, key, eps) => {}
            _ => {
                if first.is_some() {
                    *next += 1;
                }
                first = Some(key);
            }
        }
        out.push((*id, *next));
    }
    if !items.is_empty() {
        *next += 1;
    }
    out
}

/// Default color tolerance.
pub const DEFAULT_EPS: f64 = EPS;
