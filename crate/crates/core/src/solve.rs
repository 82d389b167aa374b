//! Spatial branch-and-bound over interval arithmetic.
//!
//! Each node is bounded by the objective's interval after plan propagation
//! and feasibility-based bound tightening. Incumbents come from a rounding
//! dive followed by a projection onto the constraints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::expr::{evaluate, Expr};
use crate::handle::{BoundsBox, HandlerPlan};
use crate::model::{ConstraintBody, Minlp, ReflectionCenters, Relation};

/// Closed interval; `lo > hi` never escapes this module's public functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || self.lo.is_nan() || self.hi.is_nan()
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn intersect(self, o: Interval) -> Interval {
        Interval { lo: self.lo.max(o.lo), hi: self.hi.min(o.hi) }
    }

    pub fn hull(self, o: Interval) -> Interval {
        if self.is_empty() {
            return o;
        }
        if o.is_empty() {
            return self;
        }
        Interval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }

    pub fn sub(self, o: Interval) -> Interval {
        Interval { lo: self.lo - o.hi, hi: self.hi - o.lo }
    }

    pub fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn scale(self, c: f64) -> Interval {
        if c == 0.0 {
            return Interval::point(0.0);
        }
        let (a, b) = (self.lo * c, self.hi * c);
        Interval { lo: a.min(b), hi: a.max(b) }
    }

    pub fn mul(self, o: Interval) -> Interval {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in [self.lo, self.hi] {
            for b in [o.lo, o.hi] {
                // 0·∞ counts as 0
                let p = if a == 0.0 || b == 0.0 { 0.0 } else { a * b };
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
        Interval { lo, hi }
    }

    /// `self / o` for `o` not containing zero.
    fn div(self, o: Interval) -> Interval {
        self.mul(Interval { lo: 1.0 / o.hi, hi: 1.0 / o.lo })
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval { lo: 0.0, hi: self.hi.max(-self.lo) }
        }
    }

    pub fn powi(self, k: i32) -> Interval {
        if k == 0 {
            return Interval::point(1.0);
        }
        if k < 0 {
            let m = self.powi(-k);
            return if m.lo > 0.0 || m.hi < 0.0 {
                Interval::new(1.0 / m.hi, 1.0 / m.lo)
            } else if m.lo == 0.0 && m.hi > 0.0 {
                Interval::new(1.0 / m.hi, f64::INFINITY)
            } else if m.hi == 0.0 && m.lo < 0.0 {
                Interval::new(f64::NEG_INFINITY, 1.0 / m.lo)
            } else {
                Interval::ENTIRE
            };
        }
        if k % 2 == 1 {
            Interval { lo: self.lo.powi(k), hi: self.hi.powi(k) }
        } else {
            let a = self.abs();
            Interval { lo: a.lo.powi(k), hi: a.hi.powi(k) }
        }
    }
}

/// Interval extension of `t` over the box.
pub fn interval_eval(t: &Expr, b: &BoundsBox) -> Interval {
    forward(t, b).iv
}

struct INode {
    iv: Interval,
    kids: Vec<INode>,
}

fn forward(t: &Expr, b: &BoundsBox) -> INode {
    let leaf = |iv| INode { iv, kids: vec![] };
    match t {
        Expr::Value(v) => leaf(Interval::point(*v)),
        Expr::Var { index, coef } => leaf(Interval::new(b.lower[*index], b.upper[*index]).scale(coef.unwrap_or(1.0))),
        Expr::Sum(ch) => {
            let kids: Vec<INode> = ch.iter().map(|c| forward(c, b)).collect();
            let iv = kids.iter().fold(Interval::point(0.0), |a, k| a.add(k.iv));
            INode { iv, kids }
        }
        Expr::Product(ch) => {
            let kids: Vec<INode> = ch.iter().map(|c| forward(c, b)).collect();
            let iv = kids.iter().fold(Interval::point(1.0), |a, k| a.mul(k.iv));
            INode { iv, kids }
        }
        Expr::Power(c, k) => {
            let kid = forward(c, b);
            INode { iv: kid.iv.powi(*k), kids: vec![kid] }
        }
        Expr::Abs(c) => {
            let kid = forward(c, b);
            INode { iv: kid.iv.abs(), kids: vec![kid] }
        }
        Expr::Negate(c) => {
            let kid = forward(c, b);
            INode { iv: kid.iv.neg(), kids: vec![kid] }
        }
    }
}

struct Infeasible;

/// Values whose `k`-th power (`k ≥ 1`) lies in `t`, hulled inside `cur`.
fn power_preimage(t: Interval, k: i32, cur: Interval) -> Interval {
    if k % 2 == 1 {
        let root = |v: f64| v.signum() * v.abs().powf(1.0 / k as f64);
        return Interval::new(root(t.lo), root(t.hi));
    }
    if t.hi < 0.0 {
        return Interval::new(1.0, 0.0);
    }
    let hi = t.hi.powf(1.0 / k as f64);
    let lo = t.lo.max(0.0).powf(1.0 / k as f64);
    let neg = Interval::new(-hi, -lo).intersect(cur);
    let pos = Interval::new(lo, hi).intersect(cur);
    match (neg.is_empty(), pos.is_empty()) {
        (true, true) => Interval::new(1.0, 0.0),
        (true, false) => pos,
        (false, true) => neg,
        (false, false) => neg.hull(pos),
    }
}

fn widen(t: Interval) -> Interval {
    let pad = |v: f64| 1e-9 * v.abs().max(1.0);
    Interval::new(t.lo - pad(t.lo), t.hi + pad(t.hi))
}

fn backward(t: &Expr, node: &INode, target: Interval, b: &mut BoundsBox) -> Result<(), Infeasible> {
    let tgt = widen(target).intersect(node.iv);
    if tgt.is_empty() {
        return Err(Infeasible);
    }
    match t {
        Expr::Value(_) => {}
        Expr::Var { index, coef } => {
            let c = coef.unwrap_or(1.0);
            if c != 0.0 {
                let r = tgt.scale(1.0 / c);
                restrict(b, *index, r)?;
            }
        }
        Expr::Sum(ch) => {
            if ch.len() == 1 {
                return backward(&ch[0], &node.kids[0], tgt, b);
            }
            for (k, c) in ch.iter().enumerate() {
                let others = node
                    .kids
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != k)
                    .fold(Interval::point(0.0), |a, (_, kid)| a.add(kid.iv));
                if others.lo.is_infinite() && others.hi.is_infinite() {
                    continue;
                }
                backward(c, &node.kids[k], tgt.sub(others), b)?;
            }
        }
        Expr::Product(ch) => {
            for (k, c) in ch.iter().enumerate() {
                let others = node
                    .kids
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != k)
                    .fold(Interval::point(1.0), |a, (_, kid)| a.mul(kid.iv));
                if others.contains(0.0) || others.lo.is_infinite() || others.hi.is_infinite() {
                    continue;
                }
                backward(c, &node.kids[k], tgt.div(others), b)?;
            }
        }
        Expr::Negate(c) => backward(c, &node.kids[0], tgt.neg(), b)?,
        Expr::Abs(c) => {
            let cur = node.kids[0].iv;
            let (lo, hi) = (tgt.lo.max(0.0), tgt.hi);
            let r = Interval::new(-hi, -lo).intersect(cur).hull(Interval::new(lo, hi).intersect(cur));
            if r.is_empty() {
                return Err(Infeasible);
            }
            backward(c, &node.kids[0], r, b)?;
        }
        Expr::Power(c, k) => {
            let cur = node.kids[0].iv;
            let (u, k) = if *k > 0 {
                (tgt, *k)
            } else if *k < 0 && (tgt.lo > 0.0 || tgt.hi < 0.0) {
                (Interval::new(1.0 / tgt.hi, 1.0 / tgt.lo), -*k)
            } else {
                return Ok(());
            };
            let r = power_preimage(u, k, cur);
            if r.is_empty() {
                return Err(Infeasible);
            }
            backward(c, &node.kids[0], r, b)?;
        }
    }
    Ok(())
}

fn restrict(b: &mut BoundsBox, i: usize, r: Interval) -> Result<(), Infeasible> {
    let (mut lo, mut hi) = (b.lower[i].max(r.lo), b.upper[i].min(r.hi));
    if b.integral[i] {
        lo = (lo - 1e-9).ceil();
        hi = (hi + 1e-9).floor();
    }
    if lo > hi {
        if lo - hi <= 1e-9 && !b.integral[i] {
            hi = lo;
        } else {
            return Err(Infeasible);
        }
    }
    b.lower[i] = lo;
    b.upper[i] = hi;
    Ok(())
}

/// One row `lo ≤ body ≤ hi` of the search.
#[derive(Clone, Debug)]
struct Row {
    body: Expr,
    range: Interval,
}

fn rows_of(p: &Minlp, plan: &HandlerPlan) -> Vec<Row> {
    let range = |rel: Relation, rhs: f64| match rel {
        Relation::Le => Interval::new(f64::NEG_INFINITY, rhs),
        Relation::Ge => Interval::new(rhs, f64::INFINITY),
        Relation::Eq => Interval::point(rhs),
    };
    let mut rows = Vec::new();
    for c in &p.constraints {
        match &c.body {
            ConstraintBody::Expr(e) => rows.push(Row { body: e.clone(), range: range(c.relation, c.rhs) }),
            ConstraintBody::StableSet(s) => {
                for &(a, b) in &s.edges {
                    rows.push(Row {
                        body: Expr::sum(vec![Expr::var(s.nodes[a]), Expr::var(s.nodes[b])]),
                        range: range(c.relation, c.rhs),
                    });
                }
            }
        }
    }
    for (coefs, sense, rhs) in plan.inequalities() {
        let body = Expr::sum(coefs.iter().map(|&(i, c)| Expr::term(c, i)).collect());
        rows.push(Row { body, range: range(sense, rhs) });
    }
    rows
}

fn objective_expr(p: &Minlp) -> Expr {
    Expr::sum(
        p.variables.iter().enumerate().filter(|(_, v)| v.obj_coef != 0.0).map(|(i, v)| Expr::term(v.obj_coef, i)).collect(),
    )
}

fn objective_bound(p: &Minlp, b: &BoundsBox) -> f64 {
    p.variables
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let c = v.obj_coef;
            if c > 0.0 {
                c * b.lower[i]
            } else if c < 0.0 {
                c * b.upper[i]
            } else {
                0.0
            }
        })
        .sum()
}

const FBBT_ROUNDS: usize = 10;

fn changed(a: &BoundsBox, b: &BoundsBox) -> bool {
    let moved = |x: f64, y: f64| (x - y).abs() > 1e-9 * x.abs().max(1.0) && !(x.is_infinite() && y.is_infinite());
    (0..a.len()).any(|i| moved(a.lower[i], b.lower[i]) || moved(a.upper[i], b.upper[i]))
}

fn fbbt(rows: &[Row], cutoff: Option<(&Expr, f64)>, b: &mut BoundsBox) -> Result<(), Infeasible> {
    for _ in 0..FBBT_ROUNDS {
        let before = b.clone();
        for r in rows {
            let node = forward(&r.body, b);
            backward(&r.body, &node, r.range, b)?;
        }
        if let Some((obj, v)) = cutoff {
            let node = forward(obj, b);
            backward(obj, &node, Interval::new(f64::NEG_INFINITY, v), b)?;
        }
        if !changed(&before, b) {
            break;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Limit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Limits {
    pub max_nodes: usize,
    pub gap: f64,
    pub time_limit: Option<Duration>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_nodes: 100_000, gap: 1e-4, time_limit: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    pub status: Status,
    pub incumbent: Option<Vec<f64>>,
    pub value: Option<f64>,
    pub dual_bound: f64,
    pub node_count: usize,
    pub primal_dual_integral: f64,
}

/// `(primal − dual) / max(1, |primal|)`.
pub fn relative_gap(primal: f64, dual: f64) -> f64 {
    (primal - dual).max(0.0) / primal.abs().max(1.0)
}

/// Normalized gap in `[0, 1]` used for the integral; 1 without an incumbent.
fn integral_gap(primal: Option<f64>, dual: f64) -> f64 {
    match primal {
        None => 1.0,
        Some(_) if !dual.is_finite() => 1.0,
        Some(p) if (p - dual).abs() <= 1e-12 => 0.0,
        Some(p) if p * dual < 0.0 => 1.0,
        Some(p) => ((p - dual).abs() / p.abs().max(dual.abs())).min(1.0),
    }
}

/// Trapezoid area under the normalized gap curve over node indices,
/// divided by the number of nodes.
pub fn primal_dual_integral(trace: &[(Option<f64>, f64)]) -> f64 {
    if trace.len() < 2 {
        return trace.first().map_or(0.0, |&(p, d)| integral_gap(p, d));
    }
    let g: Vec<f64> = trace.iter().map(|&(p, d)| integral_gap(p, d)).collect();
    g.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() / (g.len() - 1) as f64
}

struct Node {
    bound: f64,
    seq: usize,
    b: BoundsBox,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    // max-heap: smallest bound, then oldest, first
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound.total_cmp(&self.bound).then(o.seq.cmp(&self.seq))
    }
}

const FEAS_TOL: f64 = 1e-6;
const MIN_WIDTH: f64 = 1e-6;
const DIVE_FREQ: usize = 4;

struct Search<'a> {
    p: &'a Minlp,
    plan: &'a HandlerPlan,
    rows: Vec<Row>,
    obj: Expr,
    root_width: Vec<f64>,
    centers: ReflectionCenters,
    incumbent: Option<(Vec<f64>, f64)>,
    gap: f64,
}

impl Search<'_> {
    fn cutoff(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|i| i.1)
    }

    /// Plan propagation and FBBT until neither changes the box. Only
    /// improvements beyond the gap tolerance are searched for.
    fn propagate(&self, mut b: BoundsBox) -> Option<BoundsBox> {
        let cutoff = self.cutoff().map(|v| v - self.gap * v.abs().max(1.0));
        for _ in 0..FBBT_ROUNDS {
            let before = b.clone();
            b = self.plan.propagate(&self.centers, &b)?;
            fbbt(&self.rows, cutoff.map(|v| (&self.obj, v)), &mut b).ok()?;
            if !changed(&before, &b) {
                break;
            }
        }
        Some(b)
    }

    fn offer(&mut self, x: Vec<f64>) -> bool {
        if !self.p.in_box(&x, FEAS_TOL) || !self.p.is_feasible(&x, FEAS_TOL) {
            return false;
        }
        let v = self.p.objective(&x);
        if self.incumbent.as_ref().is_none_or(|i| v < i.1 - 1e-12) {
            self.incumbent = Some((x, v));
            return true;
        }
        false
    }

    /// Fixes integral variables one at a time (favoring the objective,
    /// else rounding the midpoint), then polishes the continuous part.
    fn dive(&mut self, b: &BoundsBox) {
        let mut cur = b.clone();
        for i in 0..cur.len() {
            if !cur.integral[i] || cur.is_fixed(i) {
                continue;
            }
            let c = self.p.variables[i].obj_coef;
            let first = if c < 0.0 {
                cur.upper[i]
            } else if c > 0.0 {
                cur.lower[i]
            } else {
                (0.5 * (cur.lower[i] + cur.upper[i])).round()
            };
            let second = if first == cur.lower[i] { cur.upper[i] } else { cur.lower[i] };
            let mut next = None;
            for v in [first, second] {
                let mut t = cur.clone();
                t.lower[i] = v;
                t.upper[i] = v;
                if let Some(t) = self.propagate_plain(t) {
                    next = Some(t);
                    break;
                }
            }
            match next {
                Some(t) => cur = t,
                None => return,
            }
        }
        let x: Vec<f64> = (0..cur.len()).map(|i| 0.5 * (cur.lower[i] + cur.upper[i])).collect();
        let x = self.polish(x, &cur);
        self.offer(x);
    }

    /// FBBT without the plan or the cutoff, for the dive.
    fn propagate_plain(&self, mut b: BoundsBox) -> Option<BoundsBox> {
        fbbt(&self.rows, None, &mut b).ok()?;
        Some(b)
    }

    /// Projects onto violated rows by Newton steps, then pushes along the
    /// objective while feasibility can be restored.
    fn polish(&self, x: Vec<f64>, b: &BoundsBox) -> Vec<f64> {
        let Some(mut x) = self.project(x, b) else { return vec![] };
        let c: Vec<f64> = self.p.variables.iter().map(|v| v.obj_coef).collect();
        if c.iter().zip(&b.integral).all(|(&ci, &int)| ci == 0.0 || int) {
            return x;
        }
        let mut step = 0.1 * self.root_width.iter().fold(0.0f64, |a, &w| a.max(w.min(1e6)));
        let mut best = self.p.objective(&x);
        for _ in 0..16 {
            let y: Vec<f64> = (0..x.len())
                .map(|i| if b.integral[i] { x[i] } else { (x[i] - step * c[i]).clamp(b.lower[i], b.upper[i]) })
                .collect();
            match self.project(y, b) {
                Some(y) if self.p.objective(&y) < best - 1e-12 => {
                    best = self.p.objective(&y);
                    x = y;
                    step *= 1.5;
                }
                _ => step *= 0.5,
            }
            if step < 1e-9 {
                break;
            }
        }
        x
    }

    fn project(&self, mut x: Vec<f64>, b: &BoundsBox) -> Option<Vec<f64>> {
        let fixed: Vec<bool> = b.integral.clone();
        for _ in 0..40 {
            let mut worst: f64 = 0.0;
            for r in &self.rows {
                let Ok(v) = evaluate(&r.body, &x) else { return None };
                let target = if v < r.range.lo {
                    r.range.lo
                } else if v > r.range.hi {
                    r.range.hi
                } else {
                    continue;
                };
                worst = worst.max((v - target).abs());
                let g = gradient(&r.body, &x);
                let norm: f64 = g.iter().enumerate().filter(|&(i, _)| !fixed[i]).map(|(_, gi)| gi * gi).sum();
                if norm < 1e-18 {
                    continue;
                }
                let t = (target - v) / norm;
                for i in 0..x.len() {
                    if !fixed[i] {
                        x[i] = (x[i] + t * g[i]).clamp(b.lower[i], b.upper[i]);
                    }
                }
            }
            if worst <= 1e-10 {
                break;
            }
        }
        (self.p.in_box(&x, FEAS_TOL) && self.p.is_feasible(&x, FEAS_TOL)).then_some(x)
    }

    fn branch_var(&self, b: &BoundsBox) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..b.len() {
            let w = b.upper[i] - b.lower[i];
            if b.integral[i] && w < 0.5 || !b.integral[i] && w <= MIN_WIDTH {
                continue;
            }
            let rel = w / self.root_width[i].max(1e-12);
            if best.is_none_or(|(_, r)| rel > r) {
                best = Some((i, rel));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Reverse-mode is unnecessary at this size; forward differences per variable
/// would lose accuracy near kinks, so derivatives are symbolic.
fn gradient(t: &Expr, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    grad_into(t, x, 1.0, &mut g);
    g
}

fn grad_into(t: &Expr, x: &[f64], w: f64, g: &mut [f64]) {
    let val = |e: &Expr| evaluate(e, x).unwrap_or(f64::NAN);
    match t {
        Expr::Value(_) => {}
        Expr::Var { index, coef } => g[*index] += w * coef.unwrap_or(1.0),
        Expr::Sum(ch) => ch.iter().for_each(|c| grad_into(c, x, w, g)),
        Expr::Product(ch) => {
            let vals: Vec<f64> = ch.iter().map(val).collect();
            for (k, c) in ch.iter().enumerate() {
                let others: f64 = vals.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, v)| v).product();
                grad_into(c, x, w * others, g);
            }
        }
        Expr::Power(c, k) => {
            let v = val(c);
            let d = *k as f64 * v.powi(k - 1);
            if d.is_finite() {
                grad_into(c, x, w * d, g);
            }
        }
        Expr::Abs(c) => {
            let v = val(c);
            grad_into(c, x, w * if v >= 0.0 { 1.0 } else { -1.0 }, g);
        }
        Expr::Negate(c) => grad_into(c, x, -w, g),
    }
}

/// Best-first branch-and-bound with the plan's propagators and inequalities.
/// Requires finite variable bounds.
pub fn solve(p: &Minlp, plan: &HandlerPlan, limits: &Limits) -> crate::error::Result<SolveResult> {
    if let Some(i) = p.variables.iter().position(|v| !v.lower.is_finite() || !v.upper.is_finite()) {
        return Err(crate::error::Error::Unbounded(i + 1));
    }
    let start = Instant::now();
    let root = BoundsBox::from_minlp(p);
    let mut s = Search {
        p,
        plan,
        rows: rows_of(p, plan),
        obj: objective_expr(p),
        root_width: (0..root.len()).map(|i| root.upper[i] - root.lower[i]).collect(),
        centers: p.centers(),
        incumbent: None,
        gap: limits.gap,
    };
    let mut trace: Vec<(Option<f64>, f64)> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let mut dual = f64::NEG_INFINITY;
    if let Some(b) = s.propagate(root.clone()) {
        s.dive(&root);
        heap.push(Node { bound: objective_bound(p, &b), seq, b });
        seq += 1;
    }
    let mut nodes = 0;
    let mut status = Status::Optimal;
    let prunable = |bound: f64, inc: Option<f64>, gap: f64| inc.is_some_and(|v| bound >= v - gap * v.abs().max(1.0));
    while let Some(node) = heap.pop() {
        dual = dual.max(node.bound);
        let inc = s.cutoff();
        if prunable(node.bound, inc, limits.gap) {
            heap.clear();
            dual = inc.expect("incumbent").min(node.bound).max(dual);
            break;
        }
        if nodes >= limits.max_nodes || limits.time_limit.is_some_and(|t| start.elapsed() >= t) {
            heap.push(node);
            status = Status::Limit;
            break;
        }
        nodes += 1;
        // the box may tighten further once a better incumbent is known
        let Some(b) = s.propagate(node.b) else {
            trace.push((s.cutoff(), dual));
            continue;
        };
        if nodes % DIVE_FREQ == 1 {
            s.dive(&b);
        }
        trace.push((s.cutoff(), dual));
        let Some(i) = s.branch_var(&b) else {
            let x: Vec<f64> = (0..b.len()).map(|k| 0.5 * (b.lower[k] + b.upper[k])).collect();
            if !s.offer(x.clone()) {
                let y = s.polish(x, &b);
                s.offer(y);
            }
            continue;
        };
        let mid = 0.5 * (b.lower[i] + b.upper[i]);
        let (left_hi, right_lo) = if b.integral[i] { (mid.floor(), mid.floor() + 1.0) } else { (mid, mid) };
        for (lo, hi) in [(b.lower[i], left_hi), (right_lo, b.upper[i])] {
            let mut c = b.clone();
            c.lower[i] = lo;
            c.upper[i] = hi;
            if let Some(c) = s.propagate(c) {
                let bound = objective_bound(p, &c).max(node.bound);
                if !prunable(bound, s.cutoff(), limits.gap) {
                    heap.push(Node { bound, seq, b: c });
                    seq += 1;
                }
            }
        }
    }
    if status == Status::Optimal {
        match &s.incumbent {
            None => status = Status::Infeasible,
            // regions cut off by the slackened cutoff may hold values down to here
            Some((_, v)) => dual = v - limits.gap * v.abs().max(1.0),
        }
    } else if let Some((_, v)) = &s.incumbent {
        dual = dual.min(v - limits.gap * v.abs().max(1.0));
    }
    // an optimal finish closes the gap within tolerance
    trace.push((s.cutoff(), if status == Status::Optimal { s.cutoff().unwrap_or(dual) } else { dual }));
    let (incumbent, value) = match s.incumbent {
        Some((x, v)) => (Some(x), Some(v)),
        None => (None, None),
    };
    Ok(SolveResult {
        status,
        incumbent,
        value,
        dual_bound: dual,
        node_count: nodes,
        primal_dual_integral: primal_dual_integral(&trace),
    })
}
