//! Per-constraint graph builders and their composition into one problem graph.
//!
//! Every builder adds exactly one constraint node (the anchor) and keeps all of
//! its other nodes reachable from the anchor without passing through variable
//! nodes.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expr::{hoist_coefficients, match_node, shift_to_centers, EvenOp, Expr, PatternKind};
use crate::model::{compute_centers, ConstraintBody, Minlp, Relation, StableSet, Tag, EPS};
use crate::sdg::{Mode, Sdg};

pub const HANDLER_EXPR: u32 = 1;
pub const HANDLER_EXPR_ENHANCED: u32 = 2;
pub const HANDLER_STABLESET: u32 = 3;

pub const OP_SUM: u32 = 1;
pub const OP_PRODUCT: u32 = 2;
pub const OP_ABS: u32 = 3;
pub const OP_NEGATE: u32 = 4;
/// Difference gadget over `abs`.
pub const OP_ABS_DIFF: u32 = 5;
pub const OP_STABLESET_NODE: u32 = 200;

const MAX_EXPONENT: i32 = 1 << 20;

fn zigzag(k: i32) -> u32 {
    ((k << 1) ^ (k >> 31)) as u32
}

/// Operator id of `pow(·, k)`; even ids from 1000 on.
pub fn power_op(k: i32) -> Option<u32> {
    (k.abs() <= MAX_EXPONENT).then(|| 1000 + 2 * zigzag(k))
}

fn even_op(op: EvenOp) -> Option<u32> {
    match op {
        EvenOp::Abs => Some(OP_ABS),
        EvenOp::Power(k) => power_op(k),
    }
}

fn difference_op(op: EvenOp) -> Option<u32> {
    match op {
        EvenOp::Abs => Some(OP_ABS_DIFF),
        EvenOp::Power(k) => power_op(k).map(|id| id + 1),
    }
}

fn operator_id(e: &Expr) -> Option<u32> {
    match e {
        Expr::Sum(_) => Some(OP_SUM),
        Expr::Product(_) => Some(OP_PRODUCT),
        Expr::Abs(_) => Some(OP_ABS),
        Expr::Negate(_) => Some(OP_NEGATE),
        Expr::Power(_, k) => power_op(*k),
        Expr::Value(_) | Expr::Var { .. } => None,
    }
}

/// Builder callback for one constraint handler.
pub trait ConstraintBuilder {
    fn handler_id(&self) -> u32;
    /// Adds the subgraph of constraint `k`. `Ok(false)` means the constraint
    /// is not supported and detection must be disabled.
    fn build(&self, p: &Minlp, k: usize, g: &mut Sdg) -> Result<bool>;
}

fn prepared_tree(p: &Minlp, t: &Expr, mode: Mode) -> Expr {
    match mode {
        Mode::Reflection => hoist_coefficients(&shift_to_centers(t, &compute_centers(p))),
        Mode::Permutation => hoist_coefficients(t),
    }
}

fn attach_var(g: &mut Sdg, parent: usize, i: usize, alpha: f64) -> Result<()> {
    let i = i as i32 + 1;
    let v = g.var_node(i)?;
    g.add_edge(parent, v, Some(alpha))?;
    if g.mode() == Mode::Reflection {
        let w = g.var_node(-i)?;
        g.add_edge(parent, w, Some(-alpha))?;
    }
    Ok(())
}

fn expr_body(p: &Minlp, k: usize) -> Result<Option<(&Expr, Relation, f64)>> {
    let c = p.constraints.get(k).ok_or_else(|| Error::Internal(format!("no constraint {}", k)))?;
    Ok(match &c.body {
        ConstraintBody::Expr(e) => Some((e, c.relation, c.rhs)),
        ConstraintBody::StableSet(_) => None,
    })
}

/// Faithful copy of the centered, hoisted expression tree.
pub struct ExpressionBuilder;

impl ExpressionBuilder {
    fn copy(g: &mut Sdg, e: &Expr, parent: usize) -> Result<bool> {
        match e {
            Expr::Var { index, coef } => attach_var(g, parent, *index, coef.unwrap_or(1.0))?,
            Expr::Value(v) => {
                let u = g.add_value_node(*v)?;
                g.add_edge(parent, u, None)?;
            }
            _ => {
                let Some(id) = operator_id(e) else { return Ok(false) };
                let u = g.add_operator_node(id)?;
                g.add_edge(parent, u, None)?;
                for c in e.children() {
                    if !Self::copy(g, c, u)? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

impl ConstraintBuilder for ExpressionBuilder {
    fn handler_id(&self) -> u32 {
        HANDLER_EXPR
    }

    fn build(&self, p: &Minlp, k: usize, g: &mut Sdg) -> Result<bool> {
        let Some((t, rel, rhs)) = expr_body(p, k)? else { return Ok(false) };
        let t = prepared_tree(p, t, g.mode());
        let start = g.node_count();
        let (lhs, rhs) = rel.sides(rhs);
        let anchor = g.add_constraint_node(HANDLER_EXPR, lhs, rhs)?;
        let ok = Self::copy(g, &t, anchor)?;
        g.record_segment(k, anchor, start);
        Ok(ok)
    }
}

/// Copy of the tree in which recognized patterns are replaced by gadgets.
pub struct EnhancedBuilder;

impl EnhancedBuilder {
    fn pair_gadget(g: &mut Sdg, parent: usize, op: u32, value: f64, i: usize, j: usize) -> Result<()> {
        let d = g.add_operator_node(op)?;
        g.add_edge(parent, d, None)?;
        let a1 = g.add_value_node(value)?;
        g.add_edge(d, a1, None)?;
        g.add_edge(a1, g.var_node(i as i32 + 1)?, None)?;
        g.add_edge(a1, g.var_node(j as i32 + 1)?, None)?;
        if g.mode() == Mode::Reflection {
            let a2 = g.add_value_node(value)?;
            g.add_edge(d, a2, None)?;
            g.add_edge(a2, g.var_node(-(i as i32) - 1)?, None)?;
            g.add_edge(a2, g.var_node(-(j as i32) - 1)?, None)?;
        }
        Ok(())
    }

    /// Encodes `e` below `parent`. At the root, `rhs` is folded into the sum constant.
    fn emit(g: &mut Sdg, e: &Expr, parent: usize, root_rhs: Option<f64>) -> Result<bool> {
        let root = root_rhs.is_some();
        match match_node(e, root) {
            Some(PatternKind::Sum { terms, constant, rest }) => {
                let s = g.add_operator_node(OP_SUM)?;
                g.add_edge(parent, s, None)?;
                for (i, alpha) in terms {
                    attach_var(g, s, i, alpha)?;
                }
                let c = constant - root_rhs.unwrap_or(0.0);
                if c.abs() > EPS {
                    let u = g.add_value_node(c)?;
                    g.add_edge(s, u, None)?;
                }
                let children = e.children();
                for k in rest {
                    if !Self::emit(g, children[k], s, None)? {
                        return Ok(false);
                    }
                }
            }
            Some(PatternKind::EvenDifference { op, i, j, scale }) => {
                let Some(id) = difference_op(op) else { return Ok(false) };
                Self::pair_gadget(g, parent, id, scale, i, j)?;
            }
            Some(PatternKind::Bilinear { i, j, coef }) => Self::pair_gadget(g, parent, OP_PRODUCT, coef, i, j)?,
            Some(PatternKind::Even { op, i, coef }) => {
                let Some(id) = even_op(op) else { return Ok(false) };
                let o = g.add_operator_node(id)?;
                g.add_edge(parent, o, None)?;
                g.add_edge(o, g.var_node(i as i32 + 1)?, Some(coef))?;
                if g.mode() == Mode::Reflection {
                    g.add_edge(o, g.var_node(-(i as i32) - 1)?, Some(coef))?;
                }
            }
            None => match e {
                Expr::Var { index, coef } => attach_var(g, parent, *index, coef.unwrap_or(1.0))?,
                Expr::Value(v) => {
                    let u = g.add_value_node(*v)?;
                    g.add_edge(parent, u, None)?;
                }
                _ => {
                    let Some(id) = operator_id(e) else { return Ok(false) };
                    let u = g.add_operator_node(id)?;
                    g.add_edge(parent, u, None)?;
                    for c in e.children() {
                        if !Self::emit(g, c, u, None)? {
                            return Ok(false);
                        }
                    }
                }
            },
        }
        Ok(true)
    }
}

impl ConstraintBuilder for EnhancedBuilder {
    fn handler_id(&self) -> u32 {
        HANDLER_EXPR_ENHANCED
    }

    fn build(&self, p: &Minlp, k: usize, g: &mut Sdg) -> Result<bool> {
        let Some((t, rel, rhs)) = expr_body(p, k)? else { return Ok(false) };
        let t = prepared_tree(p, t, g.mode());
        let folded = matches!(match_node(&t, true), Some(PatternKind::Sum { .. }));
        let start = g.node_count();
        let (lhs, rhs_side) = rel.sides(if folded { 0.0 } else { rhs });
        let anchor = g.add_constraint_node(HANDLER_EXPR_ENHANCED, lhs, rhs_side)?;
        let ok = Self::emit(g, &t, anchor, Some(if folded { rhs } else { 0.0 }))?;
        g.record_segment(k, anchor, start);
        Ok(ok)
    }
}

/// Copy of the conflict graph `H`, one operator node per node of `H`.
pub struct StableSetBuilder;

pub fn build_stable_set_constraint(set: &StableSet, rel: Relation, rhs: f64, k: usize, g: &mut Sdg) -> Result<bool> {
    let start = g.node_count();
    let (lhs, rhs) = rel.sides(rhs);
    let anchor = g.add_constraint_node(HANDLER_STABLESET, lhs, rhs)?;
    let mut copies = Vec::with_capacity(set.nodes.len());
    for (pos, &var) in set.nodes.iter().enumerate() {
        let u = g.add_operator_node(OP_STABLESET_NODE)?;
        g.add_edge(anchor, u, None)?;
        g.add_edge(u, g.var_node(var as i32 + 1)?, Some(set.weights[pos]))?;
        copies.push(u);
    }
    for &(a, b) in &set.edges {
        g.add_edge(copies[a], copies[b], None)?;
    }
    g.record_segment(k, anchor, start);
    Ok(true)
}

impl ConstraintBuilder for StableSetBuilder {
    fn handler_id(&self) -> u32 {
        HANDLER_STABLESET
    }

    fn build(&self, p: &Minlp, k: usize, g: &mut Sdg) -> Result<bool> {
        let c = &p.constraints[k];
        match &c.body {
            ConstraintBody::StableSet(s) => build_stable_set_constraint(s, c.relation, c.rhs, k, g),
            ConstraintBody::Expr(_) => Ok(false),
        }
    }
}

pub fn build_expression_constraint(p: &Minlp, k: usize, g: &mut Sdg) -> Result<bool> {
    ExpressionBuilder.build(p, k, g)
}

pub fn build_enhanced_constraint(p: &Minlp, k: usize, g: &mut Sdg) -> Result<bool> {
    EnhancedBuilder.build(p, k, g)
}

/// Builders keyed by constraint tag.
pub struct Registry {
    builders: HashMap<Tag, Box<dyn ConstraintBuilder>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { builders: HashMap::new() }
    }

    /// Standard builders; with `enhanced`, plain expression constraints also use gadgets.
    pub fn standard(enhanced: bool) -> Self {
        let mut r = Registry::empty();
        if enhanced {
            r.register(Tag::Expr, Box::new(EnhancedBuilder));
        } else {
            r.register(Tag::Expr, Box::new(ExpressionBuilder));
        }
        r.register(Tag::ExprEnhanced, Box::new(EnhancedBuilder));
        r.register(Tag::StableSet, Box::new(StableSetBuilder));
        r
    }

    pub fn register(&mut self, tag: Tag, b: Box<dyn ConstraintBuilder>) {
        self.builders.insert(tag, b);
    }
}

/// Builds, colors and locks the graph of the whole problem.
pub fn build_problem_sdg(p: &Minlp, registry: &Registry, mode: Mode) -> Result<Sdg> {
    let mut g = Sdg::new(p, mode);
    for (k, c) in p.constraints.iter().enumerate() {
        let b = registry.builders.get(&c.tag).ok_or(Error::Unsupported(k + 1))?;
        if !b.build(p, k, &mut g)? {
            return Err(Error::Unsupported(k + 1));
        }
    }
    g.compute_colors(EPS);
    Ok(g)
}
