//! Expression trees for constraint functions and the preprocessing used
//! before graph construction (centering, coefficient hoisting, pattern matching).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ReflectionCenters;

/// Arborescence over operators, numerical values and variables.
///
/// `Var::coef` is the label of the arc entering the variable leaf. It is `None`
/// until coefficients are hoisted and means 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Expr {
    Value(f64),
    Var { index: usize, coef: Option<f64> },
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Box<Expr>, i32),
    Abs(Box<Expr>),
    Negate(Box<Expr>),
}

impl Expr {
    pub fn val(v: f64) -> Expr {
        Expr::Value(v)
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var { index, coef: None }
    }

    pub fn scaled_var(index: usize, coef: f64) -> Expr {
        Expr::Var { index, coef: Some(coef) }
    }

    pub fn sum(children: Vec<Expr>) -> Expr {
        Expr::Sum(children)
    }

    pub fn prod(children: Vec<Expr>) -> Expr {
        Expr::Product(children)
    }

    pub fn pow(base: Expr, k: i32) -> Expr {
        Expr::Power(Box::new(base), k)
    }

    pub fn abs(e: Expr) -> Expr {
        Expr::Abs(Box::new(e))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Negate(Box::new(e))
    }

    /// `c·x_i` as a product node, the form found in unprocessed trees.
    pub fn term(c: f64, i: usize) -> Expr {
        Expr::prod(vec![Expr::val(c), Expr::var(i)])
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Value(_) | Expr::Var { .. } => vec![],
            Expr::Sum(c) | Expr::Product(c) => c.iter().collect(),
            Expr::Power(b, _) | Expr::Abs(b) | Expr::Negate(b) => vec![b],
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Var { index, .. } => out.push(*index),
            _ => self.children().into_iter().for_each(|c| c.collect_vars(out)),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Expr::size).sum::<usize>()
    }

    /// Checks arity rules: unary operators have one child, Sum/Product at least two.
    pub fn validate(&self) -> Result<()> {
        match self {
            Expr::Sum(c) | Expr::Product(c) if c.len() < 2 => {
                Err(Error::InvalidModel(format!("n-ary operator with {} children", c.len())))
            }
            Expr::Value(v) if !v.is_finite() => Err(Error::InvalidModel("non-finite constant".into())),
            _ => self.children().into_iter().try_for_each(Expr::validate),
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&Expr> {
        match path.split_first() {
            None => Some(self),
            Some((&k, rest)) => self.children().get(k).and_then(|c| c.at(rest)),
        }
    }
}

pub fn evaluate(t: &Expr, x: &[f64]) -> Result<f64> {
    Ok(match t {
        Expr::Value(v) => *v,
        Expr::Var { index, coef } => {
            let v = x.get(*index).ok_or(Error::IndexOutOfRange { index: *index as i64 + 1, n: x.len() })?;
            coef.unwrap_or(1.0) * v
        }
        Expr::Sum(c) => c.iter().map(|e| evaluate(e, x)).sum::<Result<f64>>()?,
        Expr::Product(c) => c.iter().map(|e| evaluate(e, x)).product::<Result<f64>>()?,
        Expr::Power(b, k) => {
            let v = evaluate(b, x)?;
            if *k < 0 && v == 0.0 {
                return Err(Error::Eval(format!("0 raised to {}", k)));
            }
            v.powi(*k)
        }
        Expr::Abs(b) => evaluate(b, x)?.abs(),
        Expr::Negate(b) => -evaluate(b, x)?,
    })
}

/// Coefficients and constant if the tree is an affine function.
pub fn affine_view(t: &Expr) -> Option<(BTreeMap<usize, f64>, f64)> {
    let (mut m, c) = affine_raw(t)?;
    m.retain(|_, v| *v != 0.0);
    Some((m, c))
}

fn affine_raw(t: &Expr) -> Option<(BTreeMap<usize, f64>, f64)> {
    match t {
        Expr::Value(v) => Some((BTreeMap::new(), *v)),
        Expr::Var { index, coef } => Some((BTreeMap::from([(*index, coef.unwrap_or(1.0))]), 0.0)),
        Expr::Sum(cs) => {
            let mut m = BTreeMap::new();
            let mut k = 0.0;
            for c in cs {
                let (cm, ck) = affine_raw(c)?;
                for (i, v) in cm {
                    *m.entry(i).or_insert(0.0) += v;
                }
                k += ck;
            }
            Some((m, k))
        }
        Expr::Product(cs) => {
            let mut scale = 1.0;
            let mut linear: Option<(BTreeMap<usize, f64>, f64)> = None;
            for c in cs {
                let (cm, ck) = affine_raw(c)?;
                if cm.values().all(|v| *v == 0.0) {
                    scale *= ck;
                } else if linear.is_some() {
                    return None;
                } else {
                    linear = Some((cm, ck));
                }
            }
            Some(match linear {
                None => (BTreeMap::new(), scale),
                Some((m, k)) => (m.into_iter().map(|(i, v)| (i, v * scale)).collect(), k * scale),
            })
        }
        Expr::Negate(b) => {
            let (m, k) = affine_raw(b)?;
            Some((m.into_iter().map(|(i, v)| (i, -v)).collect(), -k))
        }
        Expr::Power(b, e) => {
            let (m, k) = affine_raw(b)?;
            let constant = m.values().all(|v| *v == 0.0);
            match *e {
                1 => Some((m, k)),
                0 => Some((BTreeMap::new(), 1.0)),
                _ if constant && !(*e < 0 && k == 0.0) => Some((BTreeMap::new(), k.powi(*e))),
                _ => None,
            }
        }
        Expr::Abs(b) => {
            let (m, k) = affine_raw(b)?;
            m.values().all(|v| *v == 0.0).then(|| (BTreeMap::new(), k.abs()))
        }
    }
}

fn value_var_pair(cs: &[Expr]) -> Option<(f64, usize, f64)> {
    match cs {
        [Expr::Value(c), Expr::Var { index, coef }] | [Expr::Var { index, coef }, Expr::Value(c)] => {
            Some((*c, *index, coef.unwrap_or(1.0)))
        }
        _ => None,
    }
}

/// Collapses binary `Value · Var` products into a labelled variable arc.
pub fn hoist_coefficients(t: &Expr) -> Expr {
    match t {
        Expr::Product(cs) => {
            let cs: Vec<Expr> = cs.iter().map(hoist_coefficients).collect();
            match value_var_pair(&cs) {
                Some((c, index, a)) => Expr::Var { index, coef: Some(c * a) },
                None => Expr::Product(cs),
            }
        }
        Expr::Sum(cs) => Expr::Sum(cs.iter().map(hoist_coefficients).collect()),
        Expr::Power(b, k) => Expr::Power(Box::new(hoist_coefficients(b)), *k),
        Expr::Abs(b) => Expr::Abs(Box::new(hoist_coefficients(b))),
        Expr::Negate(b) => Expr::Negate(Box::new(hoist_coefficients(b))),
        leaf => leaf.clone(),
    }
}

/// Rewrites every occurrence of `α·x_i` as `α·x_i + α·ξ_i`, so the result
/// evaluated at `y = x − ξ` equals the input evaluated at `x`.
///
/// Both bare variables and binary `Value · Var` products count as `α·x_i`.
pub fn shift_to_centers(t: &Expr, centers: &ReflectionCenters) -> Expr {
    let xi = |i: usize| centers.centers.get(i).copied().unwrap_or(0.0);
    let wrap = |e: Expr, alpha: f64, i: usize| {
        if xi(i) == 0.0 {
            e
        } else {
            Expr::Sum(vec![e, Expr::Value(alpha * xi(i))])
        }
    };
    match t {
        Expr::Var { index, coef } => wrap(t.clone(), coef.unwrap_or(1.0), *index),
        Expr::Product(cs) => match value_var_pair(cs) {
            Some((c, index, a)) => wrap(t.clone(), c * a, index),
            None => Expr::Product(cs.iter().map(|c| shift_to_centers(c, centers)).collect()),
        },
        Expr::Sum(cs) => Expr::Sum(cs.iter().map(|c| shift_to_centers(c, centers)).collect()),
        Expr::Power(b, k) => Expr::Power(Box::new(shift_to_centers(b, centers)), *k),
        Expr::Abs(b) => Expr::Abs(Box::new(shift_to_centers(b, centers))),
        Expr::Negate(b) => Expr::Negate(Box::new(shift_to_centers(b, centers))),
        Expr::Value(_) => t.clone(),
    }
}

/// Even univariate operators handled by gadgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EvenOp {
    Abs,
    Power(i32),
}

impl EvenOp {
    fn of(e: &Expr) -> Option<(EvenOp, &Expr)> {
        match e {
            Expr::Abs(b) => Some((EvenOp::Abs, b)),
            Expr::Power(b, k) if *k != 0 && k % 2 == 0 => Some((EvenOp::Power(*k), b)),
            _ => None,
        }
    }

    pub fn apply(self, v: f64) -> f64 {
        match self {
            EvenOp::Abs => v.abs(),
            EvenOp::Power(k) => v.powi(k),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum PatternKind {
    /// `Σ terms + constant + Σ rest`, where `rest` are non-affine child positions.
    Sum { terms: Vec<(usize, f64)>, constant: f64, rest: Vec<usize> },
    /// `op(scale·(y_i − y_j))`; covers the squared difference.
    EvenDifference { op: EvenOp, i: usize, j: usize, scale: f64 },
    /// `coef·y_i·y_j` with `i ≠ j`.
    Bilinear { i: usize, j: usize, coef: f64 },
    /// `op(coef·y_i)` with `coef > 0`.
    Even { op: EvenOp, i: usize, coef: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternMatch {
    /// Child positions from the root to the matched node.
    pub path: Vec<usize>,
    pub kind: PatternKind,
}

fn single_var(e: &Expr) -> Option<(usize, f64)> {
    let (m, k) = affine_view(e)?;
    if m.len() == 1 && k.abs() <= 1e-12 {
        m.into_iter().next()
    } else {
        None
    }
}

fn is_value(e: &Expr) -> bool {
    matches!(e, Expr::Value(_))
}

/// Pattern at a single node, by priority sum > difference > bilinear > even.
///
/// At the root every affine expression, even a bare variable, is a sum; below
/// the root a sum needs an operator node.
pub fn match_node(e: &Expr, root: bool) -> Option<PatternKind> {
    if let Some((m, constant)) = affine_view(e) {
        let eligible = match e {
            Expr::Value(_) => false,
            Expr::Var { .. } => root,
            _ => true,
        };
        if eligible {
            return Some(PatternKind::Sum { terms: m.into_iter().collect(), constant, rest: vec![] });
        }
    }
    if let Expr::Sum(cs) = e {
        let mut terms: BTreeMap<usize, f64> = BTreeMap::new();
        let mut constant = 0.0;
        let mut rest = Vec::new();
        for (k, c) in cs.iter().enumerate() {
            match affine_view(c) {
                Some((m, ck)) => {
                    for (i, v) in m {
                        *terms.entry(i).or_insert(0.0) += v;
                    }
                    constant += ck;
                }
                None => rest.push(k),
            }
        }
        terms.retain(|_, v| *v != 0.0);
        return Some(PatternKind::Sum { terms: terms.into_iter().collect(), constant, rest });
    }
    if let Some((op, inner)) = EvenOp::of(e) {
        if let Some((m, k)) = affine_view(inner) {
            let v: Vec<(usize, f64)> = m.into_iter().collect();
            if v.len() == 2 && k.abs() <= 1e-12 && (v[0].1 + v[1].1).abs() <= 1e-12 {
                let (i, j) = if v[0].1 > 0.0 { (v[0].0, v[1].0) } else { (v[1].0, v[0].0) };
                return Some(PatternKind::EvenDifference { op, i, j, scale: v[0].1.abs() });
            }
        }
    }
    if let Expr::Product(cs) = e {
        let mut coef = 1.0;
        let mut vars = Vec::new();
        let mut ok = true;
        for c in cs {
            if let Expr::Value(v) = c {
                coef *= v;
            } else if let Some((i, a)) = single_var(c) {
                coef *= a;
                vars.push(i);
            } else {
                ok = false;
            }
        }
        if ok && vars.len() == 2 && vars[0] != vars[1] {
            let (i, j) = (vars[0].min(vars[1]), vars[0].max(vars[1]));
            return Some(PatternKind::Bilinear { i, j, coef });
        }
    }
    if let Some((op, inner)) = EvenOp::of(e) {
        if let Some((i, c)) = single_var(inner) {
            return Some(PatternKind::Even { op, i, coef: c.abs() });
        }
    }
    None
}

/// Non-overlapping pattern matches found greedily from the root downwards.
/// Expects a centered, hoisted tree.
pub fn find_patterns(t: &Expr) -> Vec<PatternMatch> {
    fn walk(e: &Expr, path: &mut Vec<usize>, root: bool, out: &mut Vec<PatternMatch>) {
        match match_node(e, root) {
            Some(kind) => {
                let rest = match &kind {
                    PatternKind::Sum { rest, .. } => rest.clone(),
                    _ => vec![],
                };
                out.push(PatternMatch { path: path.clone(), kind });
                let children = e.children();
                for k in rest {
                    path.push(k);
                    walk(children[k], path, false, out);
                    path.pop();
                }
            }
            None => {
                for (k, c) in e.children().into_iter().enumerate() {
                    if !is_value(c) {
                        path.push(k);
                        walk(c, path, false, out);
                        path.pop();
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), true, &mut out);
    out
}

/// Value of `node` computed from the semantics of its pattern instead of the tree.
pub fn pattern_value(node: &Expr, kind: &PatternKind, y: &[f64]) -> Result<f64> {
    Ok(match kind {
        PatternKind::Sum { terms, constant, rest } => {
            let children = node.children();
            let mut v = constant + terms.iter().map(|&(i, a)| a * y[i]).sum::<f64>();
            for &k in rest {
                v += evaluate(children[k], y)?;
            }
            v
        }
        PatternKind::EvenDifference { op, i, j, scale } => op.apply(scale * (y[*i] - y[*j])),
        PatternKind::Bilinear { i, j, coef } => coef * y[*i] * y[*j],
        PatternKind::Even { op, i, coef } => op.apply(coef * y[*i]),
    })
}
