//! Edge-color elimination, automorphism search and extraction of signed
//! permutations from graph automorphisms.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::builders::{build_problem_sdg, Registry};
use crate::error::{Error, Result};
use crate::groups::prune_generators;
use crate::model::{Minlp, SignedPermutation};
use crate::sdg::{Mode, NodeKind, Sdg};

/// Node-colored simple graph. The first `n_original` nodes are the SDG nodes,
/// the rest are auxiliary nodes standing for colored edges.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuotientGraph {
    pub colors: Vec<usize>,
    pub adj: Vec<Vec<usize>>,
    pub back_map: Vec<Option<usize>>,
    pub n_original: usize,
}

impl QuotientGraph {
    /// Plain colored graph; every node is original.
    pub fn new(colors: Vec<usize>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = colors.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::BadEdge(format!("{{{}, {}}}", u, v)));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        Ok(QuotientGraph { colors, adj, back_map: (0..n).map(Some).collect(), n_original: n })
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn is_automorphism(&self, perm: &[usize]) -> bool {
        perm.len() == self.len()
            && (0..self.len()).all(|u| {
                self.colors[perm[u]] == self.colors[u]
                    && self.adj[u].len() == self.adj[perm[u]].len()
                    && self.adj[u].iter().all(|&v| self.adjacent(perm[u], perm[v]))
            })
    }
}

/// Replaces colored edges by auxiliary nodes, grouping auxiliary nodes that
/// share a hub and a color.
///
/// Parallel edges are first merged into one edge whose color encodes the
/// multiset of their colors. A valued edge with exactly one variable endpoint
/// is grouped at that variable if there are fewer constraint nodes than
/// variable nodes, and at the other endpoint otherwise.
pub fn eliminate_edge_colors(g: &Sdg) -> Result<QuotientGraph> {
    let (Some(node_colors), Some(edge_colors)) = (g.node_colors(), g.edge_colors()) else {
        return Err(Error::NotLocked);
    };
    let n = g.node_count();
    let sentinel = g.edges().iter().zip(edge_colors).find(|(e, _)| !e.has_value()).map(|(_, &c)| c);
    let mut next_color = node_colors.iter().chain(edge_colors).copied().max().map_or(0, |m| m + 1);

    let mut merged: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (e, &c) in g.edges().iter().zip(edge_colors) {
        merged.entry((e.first.min(e.second), e.first.max(e.second))).or_default().push(c);
    }
    let mut interned: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut plain = Vec::new();
    let mut valued = Vec::new();
    for ((u, v), mut cs) in merged {
        if cs.len() == 1 {
            if Some(cs[0]) == sentinel {
                plain.push((u, v));
            } else {
                valued.push((u, v, cs[0]));
            }
        } else {
            cs.sort_unstable();
            let c = *interned.entry(cs).or_insert_with(|| {
                next_color += 1;
                next_color - 1
            });
            valued.push((u, v, c));
        }
    }

    let group_at_var = g.count_kind(NodeKind::Constraint) < g.count_kind(NodeKind::Var);
    let mut colors = node_colors.to_vec();
    let mut back_map: Vec<Option<usize>> = (0..n).map(Some).collect();
    let mut edges = plain;
    let mut hubs: HashMap<(usize, usize), usize> = HashMap::new();
    let is_var = |u: usize| g.kind(u) == NodeKind::Var;
    for (u, v, c) in valued {
        let hub = match (is_var(u), is_var(v)) {
            (true, false) => Some(if group_at_var { u } else { v }),
            (false, true) => Some(if group_at_var { v } else { u }),
            _ => None,
        };
        match hub {
            Some(h) => {
                let other = if h == u { v } else { u };
                let w = *hubs.entry((h, c)).or_insert_with(|| {
                    colors.push(c);
                    back_map.push(None);
                    edges.push((h, colors.len() - 1));
                    colors.len() - 1
                });
                edges.push((other, w));
            }
            None => {
                colors.push(c);
                back_map.push(None);
                let w = colors.len() - 1;
                edges.push((u, w));
                edges.push((v, w));
            }
        }
    }
    let mut q = QuotientGraph::new(colors, &edges)?;
    q.back_map = back_map;
    q.n_original = n;
    Ok(q)
}

/// Default limit on search tree nodes.
pub const DEFAULT_BUDGET: usize = 500_000;

type Cells = Vec<Vec<usize>>;

struct Level {
    cells: Cells,
    trace: u64,
    target: usize,
    vertex: usize,
}

struct Engine<'a> {
    q: &'a QuotientGraph,
    budget: usize,
    visited: usize,
    path: Vec<Level>,
    lab0: Vec<usize>,
}

fn shape(cells: &Cells) -> Vec<usize> {
    cells.iter().map(Vec::len).collect()
}

fn target_cell(cells: &Cells) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, c) in cells.iter().enumerate() {
        if c.len() > 1 && best.is_none_or(|b| c.len() < cells[b].len()) {
            best = Some(k);
        }
    }
    best
}

fn individualize(cells: &Cells, idx: usize, v: usize) -> Cells {
    let mut out = Vec::with_capacity(cells.len() + 1);
    out.extend_from_slice(&cells[..idx]);
    out.push(vec![v]);
    out.push(cells[idx].iter().copied().filter(|&u| u != v).collect());
    out.extend_from_slice(&cells[idx + 1..]);
    out
}

impl<'a> Engine<'a> {
    /// Equitable refinement; splits are ordered by neighbour-cell signature.
    fn refine(&self, mut cells: Cells) -> (Cells, u64) {
        let mut h = DefaultHasher::new();
        let mut cell_of = vec![0usize; self.q.len()];
        loop {
            for (k, c) in cells.iter().enumerate() {
                for &v in c {
                    cell_of[v] = k;
                }
            }
            let mut changed = false;
            let mut out = Vec::with_capacity(cells.len());
            for (k, c) in cells.iter().enumerate() {
                if c.len() == 1 {
                    out.push(c.clone());
                    continue;
                }
                let mut sig: Vec<(Vec<usize>, usize)> = c
                    .iter()
                    .map(|&v| {
                        let mut s: Vec<usize> = self.q.adj[v].iter().map(|&w| cell_of[w]).collect();
                        s.sort_unstable();
                        (s, v)
                    })
                    .collect();
                sig.sort();
                let mut start = 0;
                for i in 1..=sig.len() {
                    if i == sig.len() || sig[i].0 != sig[start].0 {
                        if i - start != sig.len() {
                            changed = true;
                            (k, &sig[start].0, i - start).hash(&mut h);
                        }
                        out.push(sig[start..i].iter().map(|x| x.1).collect());
                        start = i;
                    }
                }
            }
            cells = out;
            if !changed {
                break;
            }
        }
        shape(&cells).hash(&mut h);
        (cells, h.finish())
    }

    fn tick(&mut self) -> Result<()> {
        self.visited += 1;
        if self.visited > self.budget {
            Err(Error::Budget(self.budget))
        } else {
            Ok(())
        }
    }

    fn leaf_map(&self, cells: &Cells) -> Vec<usize> {
        let mut perm = vec![0; self.q.len()];
        for (k, c) in cells.iter().enumerate() {
            perm[self.lab0[k]] = c[0];
        }
        perm
    }

    fn dfs(&mut self, depth: usize, cells: Cells) -> Result<Option<Vec<usize>>> {
        if cells.len() == self.q.len() {
            let perm = self.leaf_map(&cells);
            return Ok(self.q.is_automorphism(&perm).then_some(perm));
        }
        let target = self.path[depth].target;
        let preferred = self.path[depth].vertex;
        let mut cand = cells[target].clone();
        cand.sort_unstable();
        if let Some(pos) = cand.iter().position(|&u| u == preferred) {
            cand.remove(pos);
            cand.insert(0, preferred);
        }
        for u in cand {
            self.tick()?;
            let (next, trace) = self.refine(individualize(&cells, target, u));
            let want = &self.path[depth + 1];
            if trace != want.trace || shape(&next) != shape(&want.cells) {
                continue;
            }
            if let Some(p) = self.dfs(depth + 1, next)? {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

/// Generators of the color-preserving automorphism group, found by
/// individualization and refinement with orbit pruning on the first path.
pub fn find_automorphism_generators(q: &QuotientGraph, budget: usize) -> Result<Vec<Vec<usize>>> {
    if q.is_empty() {
        return Ok(vec![]);
    }
    let mut by_color: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, &c) in q.colors.iter().enumerate() {
        by_color.entry(c).or_default().push(v);
    }
    let mut eng = Engine { q, budget, visited: 0, path: Vec::new(), lab0: Vec::new() };
    let (mut cells, mut trace) = eng.refine(by_color.into_values().collect());
    while let Some(t) = target_cell(&cells) {
        let v = *cells[t].iter().min().expect("non-empty cell");
        let (next, next_trace) = eng.refine(individualize(&cells, t, v));
        eng.path.push(Level { cells, trace, target: t, vertex: v });
        cells = next;
        trace = next_trace;
    }
    eng.lab0 = cells.iter().map(|c| c[0]).collect();
    eng.path.push(Level { cells, trace, target: usize::MAX, vertex: usize::MAX });

    let mut gens = Vec::new();
    let mut uf: Vec<usize> = (0..q.len()).collect();
    for level in (0..eng.path.len() - 1).rev() {
        let v = eng.path[level].vertex;
        let mut cell = eng.path[level].cells[eng.path[level].target].clone();
        cell.sort_unstable();
        for w in cell {
            if w == v || find(&mut uf, w) == find(&mut uf, v) {
                continue;
            }
            eng.tick()?;
            let t = eng.path[level].target;
            let (next, tr) = eng.refine(individualize(&eng.path[level].cells, t, w));
            let want = &eng.path[level + 1];
            if tr != want.trace || shape(&next) != shape(&want.cells) {
                continue;
            }
            if let Some(perm) = eng.dfs(level + 1, next)? {
                for (a, &b) in perm.iter().enumerate() {
                    let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
                    uf[ra] = rb;
                }
                gens.push(perm);
            }
        }
    }
    Ok(gens)
}

/// Reads each node permutation on the variable nodes as a signed permutation.
pub fn extract_signed_permutations(gens: &[Vec<usize>], g: &Sdg) -> Result<Vec<SignedPermutation>> {
    let n = g.n_vars();
    let mut out = Vec::new();
    for perm in gens {
        let mut img = Vec::with_capacity(n);
        for i in 1..=n as i32 {
            let target = perm[g.var_node(i)?];
            let j = g.var_of(target).ok_or_else(|| Error::Internal(format!("variable node {} leaves the variable set", i)))?;
            if g.mode() == Mode::Reflection && perm[g.var_node(-i)?] != g.var_node(-j)? {
                return Err(Error::Internal(format!("pairing violated at {}", i)));
            }
            img.push(j);
        }
        let gamma = SignedPermutation::from_images(img)?;
        if !gamma.is_identity() {
            out.push(gamma);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Detection {
    pub generators: Vec<SignedPermutation>,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub quotient_nodes: usize,
}

/// Full pipeline: graph construction, color elimination, search, extraction
/// and removal of redundant generators.
pub fn detect_symmetries(p: &Minlp, mode: Mode, enhanced: bool) -> Result<Detection> {
    let g = build_problem_sdg(p, &Registry::standard(enhanced), mode)?;
    let q = eliminate_edge_colors(&g)?;
    let gens = find_automorphism_generators(&q, DEFAULT_BUDGET)?;
    let signed = extract_signed_permutations(&gens, &g)?;
    Ok(Detection {
        generators: prune_generators(&signed),
        graph_nodes: g.node_count(),
        graph_edges: g.edges().len(),
        quotient_nodes: q.len(),
    })
}


#[cfg(test)]
mod pipeline_tests {
    use super::*;
    use crate::expr::Expr;
    use crate::groups::group_order;
    use crate::model::{Constraint, Relation, Variable};

    fn two_pairs() -> Minlp {
        let vars = vec![
            Variable::continuous("x1", -1.0, 1.0, 0.0),
            Variable::continuous("x2", -1.0, 1.0, 0.0),
            Variable::continuous("x3", 1.0, 3.0, 0.0),
            Variable::continuous("x4", -2.0, 0.0, 0.0),
        ];
        let body = Expr::sum(vec![Expr::term(4.0, 0), Expr::term(-4.0, 1), Expr::var(2), Expr::term(-1.0, 3)]);
        Minlp::new(vars, vec![Constraint::expr(body, Relation::Le, 0.0)]).unwrap()
    }

    #[test]
    fn two_pairs_orders() {
        let basic = detect_symmetries(&two_pairs(), Mode::Reflection, false).unwrap();
        assert_eq!(group_order(&basic.generators, 4), Some(2));
        assert_eq!(basic.generators[0].to_string(), "(1,-2)(2,-1)");
        let enh = detect_symmetries(&two_pairs(), Mode::Reflection, true).unwrap();
        assert_eq!(group_order(&enh.generators, 4), Some(4));
        let perm = detect_symmetries(&two_pairs(), Mode::Permutation, true).unwrap();
        assert!(perm.generators.is_empty());
    }
}
