//! MINLP instances, reflection centers, variable types and signed permutations.
//!
//! Variables are stored 0-based. Signed indices used by [`SignedPermutation`]
//! are 1-based: `i` denotes `x_i` and `-i` its reflected copy.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{affine_view, evaluate, Expr};

/// Default numerical tolerance.
pub const EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integral: bool,
    pub obj_coef: f64,
}

impl Variable {
    /// Finite bounds of integral variables are rounded inward.
    pub fn new(name: impl Into<String>, lower: f64, upper: f64, integral: bool, obj_coef: f64) -> Self {
        let (lower, upper) = if integral {
            (
                if lower.is_finite() { (lower - EPS).ceil() } else { lower },
                if upper.is_finite() { (upper + EPS).floor() } else { upper },
            )
        } else {
            (lower, upper)
        };
        Variable { name: name.into(), lower, upper, integral, obj_coef }
    }

    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64, obj_coef: f64) -> Self {
        Self::new(name, lower, upper, false, obj_coef)
    }

    pub fn binary(name: impl Into<String>, obj_coef: f64) -> Self {
        Self::new(name, 0.0, 1.0, true, obj_coef)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    /// Left- and right-hand side of `body rel rhs` as a ranged row.
    pub fn sides(self, rhs: f64) -> (f64, f64) {
        match self {
            Relation::Le => (f64::NEG_INFINITY, rhs),
            Relation::Eq => (rhs, rhs),
            Relation::Ge => (rhs, f64::INFINITY),
        }
    }

    pub fn violation(self, value: f64, rhs: f64) -> f64 {
        match self {
            Relation::Le => (value - rhs).max(0.0),
            Relation::Ge => (rhs - value).max(0.0),
            Relation::Eq => (value - rhs).abs(),
        }
    }
}

/// Which builder encodes a constraint in the symmetry detection graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Tag {
    Expr,
    ExprEnhanced,
    StableSet,
}

/// Abstract stable-set constraint: `x_u + x_v rel rhs` for every edge of `H`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StableSet {
    /// Variable (0-based) represented by each node of `H`.
    pub nodes: Vec<usize>,
    pub weights: Vec<f64>,
    /// Edges of `H` as pairs of node positions.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ConstraintBody {
    Expr(Expr),
    StableSet(StableSet),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    pub tag: Tag,
    pub body: ConstraintBody,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn expr(body: Expr, relation: Relation, rhs: f64) -> Self {
        Constraint { tag: Tag::Expr, body: ConstraintBody::Expr(body), relation, rhs }
    }

    pub fn enhanced(body: Expr, relation: Relation, rhs: f64) -> Self {
        Constraint { tag: Tag::ExprEnhanced, body: ConstraintBody::Expr(body), relation, rhs }
    }

    pub fn stable_set(set: StableSet, relation: Relation, rhs: f64) -> Self {
        Constraint { tag: Tag::StableSet, body: ConstraintBody::StableSet(set), relation, rhs }
    }

    /// Violation of every row this constraint stands for.
    pub fn violations(&self, x: &[f64]) -> Vec<f64> {
        match &self.body {
            ConstraintBody::Expr(e) => match evaluate(e, x) {
                Ok(v) => vec![self.relation.violation(v, self.rhs)],
                Err(_) => vec![f64::INFINITY],
            },
            ConstraintBody::StableSet(s) => s
                .edges
                .iter()
                .map(|&(a, b)| self.relation.violation(x[s.nodes[a]] + x[s.nodes[b]], self.rhs))
                .collect(),
        }
    }

    /// Affine rows `(coefs, constant)` with `coefs·x + constant rel rhs`, if linear.
    pub fn linear_rows(&self) -> Option<Vec<(BTreeMap<usize, f64>, f64)>> {
        match &self.body {
            ConstraintBody::Expr(e) => affine_view(e).map(|a| vec![a]),
            ConstraintBody::StableSet(s) => Some(
                s.edges
                    .iter()
                    .map(|&(a, b)| {
                        let mut m = BTreeMap::new();
                        *m.entry(s.nodes[a]).or_insert(0.0) += 1.0;
                        *m.entry(s.nodes[b]).or_insert(0.0) += 1.0;
                        (m, 0.0)
                    })
                    .collect(),
            ),
        }
    }

    fn variables(&self, out: &mut Vec<usize>) {
        match &self.body {
            ConstraintBody::Expr(e) => e.collect_vars(out),
            ConstraintBody::StableSet(s) => out.extend(s.nodes.iter().copied()),
        }
    }
}

/// A minimization problem `min <c,x>` over expression-tree constraints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Minlp {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Optional variable matrix known to the modeller (rows of 0-based indices).
    pub matrix_hint: Option<Vec<Vec<usize>>>,
}

impl Minlp {
    pub fn new(variables: Vec<Variable>, constraints: Vec<Constraint>) -> Result<Self> {
        let p = Minlp { variables, constraints, matrix_hint: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_matrix_hint(mut self, m: Vec<Vec<usize>>) -> Result<Self> {
        for &v in m.iter().flatten() {
            if v >= self.n() {
                return Err(Error::IndexOutOfRange { index: v as i64 + 1, n: self.n() });
            }
        }
        self.matrix_hint = Some(m);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::InvalidModel(format!("variable {} has bounds [{}, {}]", i + 1, v.lower, v.upper)));
            }
            if v.integral && v.lower.is_finite() && v.upper.is_finite() && v.lower.ceil() > v.upper.floor() {
                return Err(Error::InvalidModel(format!("integer variable {} has empty domain", i + 1)));
            }
        }
        let mut vars = Vec::new();
        for (k, c) in self.constraints.iter().enumerate() {
            vars.clear();
            c.variables(&mut vars);
            if let Some(&bad) = vars.iter().find(|&&v| v >= self.n()) {
                return Err(Error::IndexOutOfRange { index: bad as i64 + 1, n: self.n() });
            }
            let tag_ok = matches!(
                (c.tag, &c.body),
                (Tag::Expr | Tag::ExprEnhanced, ConstraintBody::Expr(_)) | (Tag::StableSet, ConstraintBody::StableSet(_))
            );
            if !tag_ok {
                return Err(Error::InvalidModel(format!("constraint {} has mismatched tag", k + 1)));
            }
            if let ConstraintBody::StableSet(s) = &c.body {
                if s.weights.len() != s.nodes.len() || s.edges.iter().any(|&(a, b)| a >= s.nodes.len() || b >= s.nodes.len() || a == b) {
                    return Err(Error::InvalidModel(format!("constraint {} has a malformed graph", k + 1)));
                }
            }
        }
        Ok(())
    }

    pub fn centers(&self) -> ReflectionCenters {
        compute_centers(self)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, xi)| v.obj_coef * xi).sum()
    }

    pub fn in_box(&self, x: &[f64], tol: f64) -> bool {
        self.variables.iter().zip(x).all(|(v, &xi)| {
            xi >= v.lower - tol && xi <= v.upper + tol && (!v.integral || (xi - xi.round()).abs() <= tol)
        })
    }

    /// Maximum violation over bounds, integrality and constraints.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xi) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xi).max(xi - v.upper);
            if v.integral {
                worst = worst.max((xi - xi.round()).abs());
            }
        }
        for c in &self.constraints {
            for viol in c.violations(x) {
                worst = worst.max(viol);
            }
        }
        worst
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.max_violation(x) <= tol
    }

    pub fn name_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }
}

/// Reflection centers `xi` and the set `C` of variables with a well-defined center.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReflectionCenters {
    pub centers: Vec<f64>,
    pub centered: Vec<bool>,
}

impl ReflectionCenters {
    pub fn zeros(n: usize) -> Self {
        ReflectionCenters { centers: vec![0.0; n], centered: vec![true; n] }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

pub fn compute_centers(p: &Minlp) -> ReflectionCenters {
    let mut centers = Vec::with_capacity(p.n());
    let mut centered = Vec::with_capacity(p.n());
    for v in &p.variables {
        let both_finite = v.lower.is_finite() && v.upper.is_finite();
        let free = v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY;
        if both_finite {
            centers.push((v.lower + v.upper) / 2.0);
            centered.push(true);
        } else {
            // -inf + inf = 0 for free variables; no center otherwise
            centers.push(0.0);
            centered.push(free);
        }
    }
    ReflectionCenters { centers, centered }
}

/// Type of a (possibly reflected) variable relative to its reflection center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VariableType {
    pub rel_lower: f64,
    pub rel_upper: f64,
    pub obj_coef: f64,
    pub integral: bool,
}

impl VariableType {
    /// Component-wise comparison with tolerance; equal infinities match.
    pub fn approx_eq(&self, other: &VariableType, eps: f64) -> bool {
        close(self.rel_lower, other.rel_lower, eps)
            && close(self.rel_upper, other.rel_upper, eps)
            && close(self.obj_coef, other.obj_coef, eps)
            && self.integral == other.integral
    }

    /// Lexicographic total order with infinities as extreme values.
    pub fn total_cmp(&self, other: &VariableType) -> std::cmp::Ordering {
        self.rel_lower
            .total_cmp(&other.rel_lower)
            .then(self.rel_upper.total_cmp(&other.rel_upper))
            .then(self.obj_coef.total_cmp(&other.obj_coef))
            .then(self.integral.cmp(&other.integral))
    }
}

pub(crate) fn close(a: f64, b: f64, eps: f64) -> bool {
    a == b || (a - b).abs() <= eps
}

fn check_signed(n: usize, i: i32) -> Result<usize> {
    let a = i.unsigned_abs() as usize;
    if i == 0 || a > n {
        return Err(Error::IndexOutOfRange { index: i as i64, n });
    }
    Ok(a - 1)
}

/// `t(x_i)` for `i > 0` and `t(x_{-i})` for `i < 0`.
pub fn variable_type(p: &Minlp, i: i32) -> Result<VariableType> {
    let k = check_signed(p.n(), i)?;
    let v = &p.variables[k];
    let xi = compute_centers(p).centers[k];
    let t = VariableType { rel_lower: v.lower - xi, rel_upper: v.upper - xi, obj_coef: v.obj_coef, integral: v.integral };
    Ok(if i > 0 { t } else { negate_type(t) })
}

/// Type with unshifted bounds, used for permutation symmetries.
pub fn plain_type(p: &Minlp, i: usize) -> Result<VariableType> {
    let v = p.variables.get(i).ok_or(Error::IndexOutOfRange { index: i as i64 + 1, n: p.n() })?;
    Ok(VariableType { rel_lower: v.lower, rel_upper: v.upper, obj_coef: v.obj_coef, integral: v.integral })
}

fn negate_type(t: VariableType) -> VariableType {
    VariableType { rel_lower: -t.rel_upper, rel_upper: -t.rel_lower, obj_coef: -t.obj_coef, integral: t.integral }
}

/// Bijection on `{±1,…,±n}` with `γ(−i) = −γ(i)`, stored by the images of `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SignedPermutation {
    img: Vec<i32>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        SignedPermutation { img: (1..=n as i32).collect() }
    }

    /// `img[k]` is the image of `k + 1`.
    pub fn from_images(img: Vec<i32>) -> Result<Self> {
        let n = img.len();
        let mut seen = vec![false; n];
        for &v in &img {
            let a = check_signed(n, v)?;
            if seen[a] {
                return Err(Error::Cycle(format!("{:?} is not bijective", img)));
            }
            seen[a] = true;
        }
        Ok(SignedPermutation { img })
    }

    /// Plain permutation given by 0-based images.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        Self::from_images(perm.iter().map(|&v| v as i32 + 1).collect())
    }

    pub fn n(&self) -> usize {
        self.img.len()
    }

    pub fn images(&self) -> &[i32] {
        &self.img
    }

    pub fn apply(&self, i: i32) -> i32 {
        let v = self.img[i.unsigned_abs() as usize - 1];
        if i > 0 {
            v
        } else {
            -v
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (k, &v) in self.img.iter().enumerate() {
            let src = k as i32 + 1;
            inv[v.unsigned_abs() as usize - 1] = if v > 0 { src } else { -src };
        }
        SignedPermutation { img: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(k, &v)| v == k as i32 + 1)
    }

    /// True if no index is mapped to a negative one.
    pub fn is_plain(&self) -> bool {
        self.img.iter().all(|&v| v > 0)
    }

    /// 0-based variables moved by the permutation.
    pub fn support(&self) -> Vec<usize> {
        self.img.iter().enumerate().filter(|&(k, &v)| v != k as i32 + 1).map(|(k, _)| k).collect()
    }

    /// Cycles on the signed index set, starting only from positive indices.
    pub fn cycles(&self) -> Vec<Vec<i32>> {
        let n = self.n();
        let mut seen = vec![false; 2 * n + 1];
        let slot = |i: i32| (i + n as i32) as usize;
        let mut out = Vec::new();
        for s in 1..=n as i32 {
            if seen[slot(s)] || self.apply(s) == s {
                continue;
            }
            let mut cyc = vec![s];
            seen[slot(s)] = true;
            let mut c = self.apply(s);
            while c != s {
                seen[slot(c)] = true;
                cyc.push(c);
                c = self.apply(c);
            }
            out.push(cyc);
        }
        out
    }

    /// Parses signed cycle notation such as `(1,-2)(2,-1)`; `()` or `id` is the identity.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut img: Vec<Option<i32>> = vec![None; n];
        let set = |a: i32, b: i32, img: &mut Vec<Option<i32>>| -> Result<()> {
            let ka = check_signed(n, a)?;
            check_signed(n, b)?;
            let want = if a > 0 { b } else { -b };
            match img[ka] {
                Some(old) if old != want => Err(Error::Cycle(format!("conflicting image for {}", a))),
                _ => {
                    img[ka] = Some(want);
                    Ok(())
                }
            }
        };
        if t != "id" && t != "()" && !t.is_empty() {
            let mut rest = t.as_str();
            while !rest.is_empty() {
                let body = rest.strip_prefix('(').ok_or_else(|| Error::Cycle(s.to_string()))?;
                let end = body.find(')').ok_or_else(|| Error::Cycle(s.to_string()))?;
                let elems = body[..end]
                    .split(',')
                    .map(|e| e.parse::<i32>().map_err(|_| Error::Cycle(s.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                for w in 0..elems.len() {
                    set(elems[w], elems[(w + 1) % elems.len()], &mut img)?;
                }
                rest = &body[end + 1..];
            }
        }
        let full = img.iter().enumerate().map(|(k, v)| v.unwrap_or(k as i32 + 1)).collect();
        Self::from_images(full)
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            write!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

/// `g2 ∘ g1`: apply `g1` first.
pub fn compose(g2: &SignedPermutation, g1: &SignedPermutation) -> Result<SignedPermutation> {
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch(g2.n(), g1.n()));
    }
    Ok(SignedPermutation { img: g1.img.iter().map(|&v| g2.apply(v)).collect() })
}

/// `ρ(x;γ)_i = ξ_i + sign(γ⁻¹(i))·(x_{|γ⁻¹(i)|} − ξ_{|γ⁻¹(i)|})`.
pub fn apply_reflection(x: &[f64], g: &SignedPermutation, centers: &ReflectionCenters) -> Vec<f64> {
    let xi = &centers.centers;
    let mut out = vec![0.0; x.len()];
    for (k, &v) in g.img.iter().enumerate() {
        // γ(k+1) = v, so γ⁻¹(|v|) = sign(v)·(k+1)
        let dst = v.unsigned_abs() as usize - 1;
        let s = if v > 0 { 1.0 } else { -1.0 };
        out[dst] = xi[dst] + s * (x[k] - xi[k]);
    }
    out
}

fn sample_point(p: &Minlp, rng: &mut ChaCha8Rng) -> Vec<f64> {
    p.variables
        .iter()
        .map(|v| {
            if v.integral {
                rng.gen_range(v.lower as i64..=v.upper as i64) as f64
            } else if v.lower == v.upper {
                v.lower
            } else {
                rng.gen_range(v.lower..=v.upper)
            }
        })
        .collect()
}

fn sorted_violations(p: &Minlp, x: &[f64], only_nonlinear: bool) -> Vec<f64> {
    let mut out: Vec<f64> = p
        .constraints
        .iter()
        .filter(|c| !only_nonlinear || c.linear_rows().is_none())
        .flat_map(|c| c.violations(x))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn violations_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(&u, &v)| (u.is_infinite() && v.is_infinite()) || (u - v).abs() <= EPS * (1.0 + u.abs().max(v.abs())))
}

fn bounded(p: &Minlp) -> Result<()> {
    match p.variables.iter().position(|v| !v.lower.is_finite() || !v.upper.is_finite()) {
        Some(i) => Err(Error::Unbounded(i + 1)),
        None => Ok(()),
    }
}

fn sampled_check(p: &Minlp, g: &SignedPermutation, samples: usize, seed: u64, only_nonlinear: bool) -> bool {
    let centers = compute_centers(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let x = sample_point(p, &mut rng);
        let y = apply_reflection(&x, g, &centers);
        if !p.in_box(&y, EPS) {
            return false;
        }
        if p.is_feasible(&x, EPS) != p.is_feasible(&y, EPS) {
            return false;
        }
        let (ox, oy) = (p.objective(&x), p.objective(&y));
        if (ox - oy).abs() > EPS * (1.0 + ox.abs()) {
            return false;
        }
        if !violations_match(&sorted_violations(p, &x, only_nonlinear), &sorted_violations(p, &y, only_nonlinear)) {
            return false;
        }
    }
    true
}

/// Sampling test of conditions (S1)/(S2): feasibility, objective value and the
/// multiset of per-constraint violations must agree at `x` and `ρ(x;γ)`.
///
/// This is a necessary condition only; passing it does not prove symmetry.
pub fn is_symmetry_oracle(p: &Minlp, g: &SignedPermutation, samples: usize, seed: u64) -> Result<bool> {
    bounded(p)?;
    if g.n() != p.n() {
        return Err(Error::SizeMismatch(g.n(), p.n()));
    }
    Ok(sampled_check(p, g, samples, seed, false))
}

pub const BRUTE_FORCE_MAX_N: usize = 5;

fn all_signed_permutations(n: usize) -> Vec<SignedPermutation> {
    fn perms(rest: &mut Vec<i32>, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for k in 0..rest.len() {
            let v = rest.remove(k);
            cur.push(v);
            perms(rest, cur, out);
            cur.pop();
            rest.insert(k, v);
        }
    }
    let mut plain = Vec::new();
    perms(&mut (1..=n as i32).collect(), &mut Vec::new(), &mut plain);
    let mut out = Vec::new();
    for p in plain {
        for mask in 0u32..(1 << n) {
            let img = p.iter().enumerate().map(|(k, &v)| if mask >> k & 1 == 1 { -v } else { v }).collect();
            out.push(SignedPermutation { img });
        }
    }
    out
}

/// Normalized linear row: relation, constant minus rhs in centered coordinates, coefficients.
type Row = (Relation, f64, Vec<f64>);

fn linear_rows(p: &Minlp, centers: &ReflectionCenters) -> Vec<Row> {
    let mut rows = Vec::new();
    for c in &p.constraints {
        if let Some(list) = c.linear_rows() {
            for (coefs, k) in list {
                let mut a = vec![0.0; p.n()];
                let mut constant = k - c.rhs;
                for (&i, &v) in &coefs {
                    a[i] += v;
                    constant += v * centers.centers[i];
                }
                rows.push((c.relation, constant, a));
            }
        }
    }
    rows
}

fn rows_match(a: &[Row], b: &[Row]) -> bool {
    let mut used = vec![false; b.len()];
    'outer: for r in a {
        for (k, s) in b.iter().enumerate() {
            if !used[k] && r.0 == s.0 && close(r.1, s.1, EPS) && r.2.iter().zip(&s.2).all(|(u, v)| close(*u, *v, EPS)) {
                used[k] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Every signed permutation that is a formulation symmetry of `p`.
///
/// Variable types must be preserved; linear constraints are compared exactly in
/// centered coordinates; nonlinear constraints are checked by [`is_symmetry_oracle`]
/// on a fixed-seed sample set.
pub fn enumerate_symmetries_bruteforce(p: &Minlp) -> Result<Vec<SignedPermutation>> {
    let n = p.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge { n, max: BRUTE_FORCE_MAX_N });
    }
    let has_nonlinear = p.constraints.iter().any(|c| c.linear_rows().is_none());
    if has_nonlinear {
        bounded(p)?;
    }
    let centers = compute_centers(p);
    let types: Vec<VariableType> = (1..=n as i32)
        .flat_map(|i| [i, -i])
        .map(|i| variable_type(p, i))
        .collect::<Result<_>>()?;
    let ty = |i: i32| types[2 * (i.unsigned_abs() as usize - 1) + usize::from(i < 0)];
    let rows = linear_rows(p, &centers);
    let mut out = Vec::new();
    for g in all_signed_permutations(n) {
        if !(1..=n as i32).all(|i| ty(g.apply(i)).approx_eq(&ty(i), EPS)) {
            continue;
        }
        let mapped: Vec<Row> = rows
            .iter()
            .map(|(rel, c, a)| {
                let b = (1..=n as i32)
                    .map(|j| {
                        let t = g.apply(j);
                        let s = if t > 0 { 1.0 } else { -1.0 };
                        s * a[t.unsigned_abs() as usize - 1]
                    })
                    .collect();
                (*rel, *c, b)
            })
            .collect();
        if !rows_match(&mapped, &rows) {
            continue;
        }
        if has_nonlinear && !sampled_check(p, &g, 256, 0x5eed, true) {
            continue;
        }
        out.push(g);
    }
    Ok(out)
}
