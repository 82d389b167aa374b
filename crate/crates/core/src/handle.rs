//! Symmetry handling: lexicographic reduction for signed permutations, static
//! row sorting, reflection restrictions for matrices with column reflections,
//! the aggregated reflection inequality, and per-setting plans.

use std::ops::Range;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{classify_matrix, Classification, GroupReport};
use crate::model::{Minlp, ReflectionCenters, Relation, SignedPermutation};

const TOL: f64 = 1e-9;
/// Largest equality domain inspected by the post-processing step.
const PEEK_LIMIT: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integral: Vec<bool>,
}

impl BoundsBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, integral: Vec<bool>) -> Self {
        BoundsBox { lower, upper, integral }
    }

    pub fn from_minlp(p: &Minlp) -> Self {
        BoundsBox {
            lower: p.variables.iter().map(|v| v.lower).collect(),
            upper: p.variables.iter().map(|v| v.upper).collect(),
            integral: p.variables.iter().map(|v| v.integral).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.lower[i] == self.upper[i]
    }

    /// Rounds integral bounds; false if some domain became empty.
    fn settle(&mut self, i: usize) -> bool {
        if self.integral[i] {
            self.lower[i] = (self.lower[i] - TOL).ceil();
            self.upper[i] = (self.upper[i] + TOL).floor();
        }
        if self.lower[i] > self.upper[i] {
            if self.lower[i] - self.upper[i] <= TOL {
                self.upper[i] = self.lower[i];
            } else {
                return false;
            }
        }
        true
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(i, &v)| v >= self.lower[i] - TOL && v <= self.upper[i] + TOL)
    }
}

/// `ρ(x;γ)_i = ξ_i + s·(x_j − ξ_j)` is described by `(j, s)`.
fn source(inv: &SignedPermutation, i: usize) -> (usize, f64) {
    let t = inv.apply(i as i32 + 1);
    (t.unsigned_abs() as usize - 1, if t > 0 { 1.0 } else { -1.0 })
}

fn rho_bounds(b: &BoundsBox, xi: &[f64], i: usize, j: usize, s: f64) -> (f64, f64) {
    if s > 0.0 {
        (xi[i] + b.lower[j] - xi[j], xi[i] + b.upper[j] - xi[j])
    } else {
        (xi[i] - b.upper[j] + xi[j], xi[i] - b.lower[j] + xi[j])
    }
}

fn forced_equal(b: &BoundsBox, xi: &[f64], i: usize, j: usize, s: f64) -> bool {
    let (rl, ru) = rho_bounds(b, xi, i, j, s);
    b.is_fixed(i) && rl == ru && (b.lower[i] - rl).abs() <= TOL
}

/// Tightens so that `x_i ≥ ρ_i + delta`; false on an empty domain.
fn tighten(b: &mut BoundsBox, xi: &[f64], i: usize, j: usize, s: f64, delta: f64) -> bool {
    if i == j {
        // x_i ≥ 2ξ_i − x_i + delta
        b.lower[i] = b.lower[i].max(xi[i] + delta / 2.0);
        return b.settle(i);
    }
    let (rl, _) = rho_bounds(b, xi, i, j, s);
    let xu = b.upper[i];
    b.lower[i] = b.lower[i].max(rl + delta);
    if s > 0.0 {
        b.upper[j] = b.upper[j].min(xu - delta - xi[i] + xi[j]);
    } else {
        b.lower[j] = b.lower[j].max(xi[i] + xi[j] - xu + delta);
    }
    b.settle(i) && b.settle(j)
}

enum Walk {
    Infeasible,
    Done(BoundsBox),
}

fn walk(inv: &SignedPermutation, xi: &[f64], mut b: BoundsBox, order: &[usize], start: usize, peek: bool) -> Walk {
    for k in start..order.len() {
        let i = order[k];
        let (j, s) = source(inv, i);
        if j == i && s > 0.0 {
            continue;
        }
        if forced_equal(&b, xi, i, j, s) {
            continue;
        }
        let (rl, ru) = rho_bounds(&b, xi, i, j, s);
        if b.upper[i] < rl - TOL {
            return Walk::Infeasible;
        }
        if b.lower[i] > ru + TOL {
            return Walk::Done(b);
        }
        if !tighten(&mut b, xi, i, j, s, 0.0) {
            return Walk::Infeasible;
        }
        if forced_equal(&b, xi, i, j, s) {
            continue;
        }
        if peek {
            return strict_if_equality_fails(inv, xi, b, order, k);
        }
        return Walk::Done(b);
    }
    Walk::Done(b)
}

/// If every way of making position `k` an equality makes the remaining
/// positions infeasible, the comparison at `k` must be strict.
fn strict_if_equality_fails(inv: &SignedPermutation, xi: &[f64], b: BoundsBox, order: &[usize], k: usize) -> Walk {
    let i = order[k];
    let (j, s) = source(inv, i);
    if !b.integral[i] || !b.integral[j] {
        return Walk::Done(b);
    }
    let offset = xi[i] - s * xi[j];
    if i != j && (offset - offset.round()).abs() > TOL {
        return Walk::Done(b);
    }
    let (rl, ru) = rho_bounds(&b, xi, i, j, s);
    let lo = b.lower[i].max(rl).ceil();
    let hi = b.upper[i].min(ru).floor();
    if !lo.is_finite() || !hi.is_finite() || hi - lo + 1.0 > PEEK_LIMIT {
        return Walk::Done(b);
    }
    let mut v = lo;
    while v <= hi {
        let mut e = b.clone();
        e.lower[i] = v;
        e.upper[i] = v;
        let xj = xi[j] + s * (v - xi[i]);
        let consistent = if i == j {
            (xj - v).abs() <= TOL
        } else {
            e.lower[j] = e.lower[j].max(xj);
            e.upper[j] = e.upper[j].min(xj);
            e.settle(j) && (e.lower[j] - xj).abs() <= TOL
        };
        if consistent && matches!(walk(inv, xi, e, order, k + 1, false), Walk::Done(_)) {
            return Walk::Done(b);
        }
        v += 1.0;
    }
    let mut b = b;
    if tighten(&mut b, xi, i, j, s, 1.0) {
        Walk::Done(b)
    } else {
        Walk::Infeasible
    }
}

/// Enforces `x ≥lex ρ(x;γ)` on bounds, comparing positions in `order`.
/// Returns `None` if no point of the box satisfies it.
pub fn lex_reduce(gamma: &SignedPermutation, centers: &ReflectionCenters, b: &BoundsBox, order: &[usize]) -> Option<BoundsBox> {
    let inv = gamma.inverse();
    match walk(&inv, &centers.centers, b.clone(), order, 0, true) {
        Walk::Infeasible => None,
        Walk::Done(b) => Some(b),
    }
}

pub fn identity_order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn row_swap(matrix: &[Vec<usize>], a: usize, b: usize, n: usize) -> SignedPermutation {
    let mut img: Vec<i32> = (1..=n as i32).collect();
    for (&u, &v) in matrix[a].iter().zip(&matrix[b]) {
        img[u] = v as i32 + 1;
        img[v] = u as i32 + 1;
    }
    SignedPermutation::from_images(img).expect("row swap")
}

/// Lexicographically decreasing rows inside `rows`, by iterating the
/// adjacent-swap lexicographic reductions to a fixpoint.
pub fn sort_rows_static(matrix: &[Vec<usize>], rows: Range<usize>, centers: &ReflectionCenters, b: &BoundsBox) -> Option<BoundsBox> {
    let n = b.len();
    let q = matrix.first().map_or(0, Vec::len);
    let rounds = (matrix.len() * q).max(1);
    let swaps: Vec<(SignedPermutation, Vec<usize>)> = (rows.start..rows.end.saturating_sub(1))
        .map(|r| {
            let order: Vec<usize> = matrix[r].iter().chain(&matrix[r + 1]).copied().collect();
            (row_swap(matrix, r, r + 1, n), order)
        })
        .collect();
    let mut cur = b.clone();
    for _ in 0..rounds {
        let mut changed = false;
        for (g, order) in &swaps {
            let next = lex_reduce(g, centers, &cur, order)?;
            if next != cur {
                changed = true;
                cur = next;
            }
        }
        if !changed {
            break;
        }
    }
    Some(cur)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Action {
    LexReduce { gamma: SignedPermutation, order: Vec<usize> },
    /// Sort rows `rows` (0-based, half-open) of `matrix`.
    SortRows { matrix: Vec<Vec<usize>>, rows: Range<usize> },
    RestrictDomain { var: usize, lower: f64 },
    /// `Σ coef·x  sense  rhs`.
    StaticInequality { coefs: Vec<(usize, f64)>, rhs: f64, sense: Relation },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    None,
    Settings,
    RowColumnSorting,
    ReflectionRestrictions,
    FullOrdering,
    RowPairLex,
    RowSorting,
    SimpleCut,
    LexPerGenerator,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorPlan {
    pub factor: Option<usize>,
    pub method: Method,
    pub actions: Vec<Action>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct HandlerPlan {
    pub factors: Vec<FactorPlan>,
}

impl HandlerPlan {
    pub fn actions(&self) -> impl Iterator<Item = &Action> {
        self.factors.iter().flat_map(|f| f.actions.iter())
    }

    pub fn is_empty(&self) -> bool {
        self.actions().next().is_none()
    }

    pub fn inequalities(&self) -> Vec<(Vec<(usize, f64)>, Relation, f64)> {
        self.actions()
            .filter_map(|a| match a {
                Action::StaticInequality { coefs, rhs, sense } => Some((coefs.clone(), *sense, *rhs)),
                _ => None,
            })
            .collect()
    }

    /// Applies domain restrictions and all propagators once, in order.
    pub fn propagate(&self, centers: &ReflectionCenters, b: &BoundsBox) -> Option<BoundsBox> {
        let mut cur = b.clone();
        for a in self.actions() {
            match a {
                Action::LexReduce { gamma, order } => cur = lex_reduce(gamma, centers, &cur, order)?,
                Action::SortRows { matrix, rows } => cur = sort_rows_static(matrix, rows.clone(), centers, &cur)?,
                Action::RestrictDomain { var, lower } => {
                    cur.lower[*var] = cur.lower[*var].max(*lower);
                    if !cur.settle(*var) {
                        return None;
                    }
                }
                Action::StaticInequality { .. } => {}
            }
        }
        Some(cur)
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        for f in &self.factors {
            let name = f.factor.map_or("matrix".to_string(), |k| format!("factor {}", k + 1));
            s.push_str(&format!("{}: {:?}\n", name, f.method));
            for a in &f.actions {
                s.push_str(&format!("  {}\n", describe_action(a)));
            }
        }
        s
    }
}

fn var_name(i: usize) -> String {
    format!("x{}", i + 1)
}

pub fn describe_action(a: &Action) -> String {
    match a {
        Action::LexReduce { gamma, .. } => format!("lexred {}", gamma),
        Action::SortRows { matrix, rows } => {
            let r: Vec<String> = matrix[rows.clone()]
                .iter()
                .map(|row| row.iter().map(|&v| var_name(v)).collect::<Vec<_>>().join(" "))
                .collect();
            format!("sortrows [{}]", r.join(" | "))
        }
        Action::RestrictDomain { var, lower } => format!("restrict {} >= {}", var_name(*var), lower),
        Action::StaticInequality { coefs, rhs, sense } => {
            let lhs: Vec<String> = coefs.iter().map(|&(v, c)| format!("{:+}*{}", c, var_name(v))).collect();
            let op = match sense {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            format!("ineq {} {} {}", lhs.join(" "), op, rhs)
        }
    }
}

/// Row counts `n_0 = p, n_j = ⌈n_{j−1}/2⌉` for `j = 0..=q`.
pub fn halving_schedule(p: usize, q: usize) -> Vec<usize> {
    let mut n = vec![p];
    for _ in 0..q {
        let last = *n.last().expect("n_0");
        n.push(last.div_ceil(2));
    }
    n
}

fn column_centers(matrix: &[Vec<usize>], centers: &ReflectionCenters) -> Result<Vec<f64>> {
    let q = matrix.first().map_or(0, Vec::len);
    (0..q)
        .map(|c| {
            let xi = centers.centers[matrix[0][c]];
            if matrix.iter().all(|r| (centers.centers[r[c]] - xi).abs() <= TOL) {
                Ok(xi)
            } else {
                Err(Error::NonUniformCenters(c + 1))
            }
        })
        .collect()
}

fn chain(vars: &[usize]) -> Vec<Action> {
    vars.windows(2)
        .map(|w| Action::StaticInequality { coefs: vec![(w[0], 1.0), (w[1], -1.0)], rhs: 0.0, sense: Relation::Ge })
        .collect()
}

/// Row blocks `n_j+1..n_{j−1}` (1-based) for `j = 1..=q`, then `1..n_q`.
pub fn reflection_blocks(p: usize, q: usize) -> Vec<Range<usize>> {
    let n = halving_schedule(p, q);
    let mut blocks: Vec<Range<usize>> = (1..=q).map(|j| n[j]..n[j - 1]).collect();
    blocks.push(0..n[q]);
    blocks
}

fn restrictions(matrix: &[Vec<usize>], xi: &[f64]) -> Vec<Action> {
    let (p, q) = (matrix.len(), xi.len());
    let n = halving_schedule(p, q);
    let mut out = Vec::new();
    for j in 1..=q {
        for row in matrix.iter().take(n[j]) {
            out.push(Action::RestrictDomain { var: row[j - 1], lower: xi[j - 1] });
        }
    }
    out
}

fn first_column(matrix: &[Vec<usize>], rows: Range<usize>) -> Vec<usize> {
    matrix[rows].iter().map(|r| r[0]).collect()
}

/// Domain restrictions of the halving schedule plus row sorting inside each block.
pub fn plan_reflection_restrictions(matrix: &[Vec<usize>], centers: &ReflectionCenters) -> Result<Vec<Action>> {
    let xi = column_centers(matrix, centers)?;
    let mut out = restrictions(matrix, &xi);
    for block in reflection_blocks(matrix.len(), xi.len()) {
        if block.len() > 1 {
            out.push(Action::SortRows { matrix: matrix.to_vec(), rows: block });
        }
    }
    Ok(out)
}

fn transpose(m: &[Vec<usize>]) -> Vec<Vec<usize>> {
    if m.is_empty() {
        return vec![];
    }
    (0..m[0].len()).map(|c| m.iter().map(|r| r[c]).collect()).collect()
}

/// Static sorting of rows and of columns, plus first-column and first-row chains.
pub fn plan_row_column_sorting(matrix: &[Vec<usize>]) -> Vec<Action> {
    let t = transpose(matrix);
    let mut out = vec![
        Action::SortRows { matrix: matrix.to_vec(), rows: 0..matrix.len() },
        Action::SortRows { matrix: t.clone(), rows: 0..t.len() },
    ];
    out.extend(chain(&first_column(matrix, 0..matrix.len())));
    out.extend(chain(&matrix[0]));
    out
}

/// `Σ_{i∈support} x_i ≥ Σ_{i∈support} ξ_i`.
pub fn emit_simple_reflection_cut(support: &[usize], centers: &ReflectionCenters) -> Action {
    Action::StaticInequality {
        coefs: support.iter().map(|&i| (i, 1.0)).collect(),
        rhs: support.iter().map(|&i| centers.centers[i]).sum(),
        sense: Relation::Ge,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Setting {
    Sym0,
    Sym1,
    Sym2,
    Sym3,
    Sym4,
    Sym5,
    Sym6,
    Auto,
}

impl Setting {
    pub const ALL: [Setting; 8] =
        [Setting::Sym0, Setting::Sym1, Setting::Sym2, Setting::Sym3, Setting::Sym4, Setting::Sym5, Setting::Sym6, Setting::Auto];

    pub fn name(self) -> &'static str {
        match self {
            Setting::Sym0 => "sym0",
            Setting::Sym1 => "sym1",
            Setting::Sym2 => "sym2",
            Setting::Sym3 => "sym3",
            Setting::Sym4 => "sym4",
            Setting::Sym5 => "sym5",
            Setting::Sym6 => "sym6",
            Setting::Auto => "auto",
        }
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Setting::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidModel(format!("unknown setting '{}'", s)))
    }
}

/// Matrix with its column reflections (if any) oriented as columns.
fn oriented(c: &Classification) -> Option<(Vec<Vec<usize>>, bool, bool)> {
    match c {
        Classification::RowColumn { matrix, column_reflections, row_reflections } => {
            if *row_reflections && !*column_reflections {
                Some((transpose(matrix), true, true))
            } else {
                Some((matrix.clone(), *column_reflections, true))
            }
        }
        Classification::Row { matrix, column_reflections } => Some((matrix.clone(), *column_reflections, false)),
        Classification::Unstructured => None,
    }
}

/// The hint, else a detected matrix with row, column and column-reflection
/// symmetries; other structures do not support the settings' inequalities.
fn setting_matrix(p: &Minlp, report: &GroupReport) -> Vec<Vec<usize>> {
    if let Some(m) = &p.matrix_hint {
        return m.clone();
    }
    report
        .factors
        .iter()
        .find_map(|f| oriented(&f.classification).filter(|o| o.1 && o.2).map(|o| o.0))
        .unwrap_or_default()
}

fn setting_actions(setting: Setting, matrix: &[Vec<usize>], centers: &ReflectionCenters) -> Result<Vec<Action>> {
    if matrix.is_empty() || matrix[0].is_empty() {
        return Ok(vec![]);
    }
    let (p, q) = (matrix.len(), matrix[0].len());
    let xi = column_centers(matrix, centers)?;
    let row_chain = || chain(&matrix[0]);
    let first_row_restrict = || (0..q).map(|j| Action::RestrictDomain { var: matrix[0][j], lower: xi[j] }).collect::<Vec<_>>();
    let block_chains = || {
        reflection_blocks(p, q).into_iter().flat_map(|b| chain(&first_column(matrix, b))).collect::<Vec<_>>()
    };
    let mut out = Vec::new();
    match setting {
        Setting::Sym0 | Setting::Auto => {}
        Setting::Sym1 => out.extend(row_chain()),
        Setting::Sym2 => {
            out.extend(row_chain());
            out.extend(first_row_restrict());
        }
        Setting::Sym3 => {
            out.extend(row_chain());
            out.extend(first_row_restrict());
            out.extend(chain(&first_column(matrix, 0..p)));
        }
        Setting::Sym4 => out.extend(restrictions(matrix, &xi)),
        Setting::Sym5 => {
            out.extend(restrictions(matrix, &xi));
            out.extend(block_chains());
        }
        Setting::Sym6 => {
            out.extend(row_chain());
            out.extend(restrictions(matrix, &xi));
            out.extend(block_chains());
        }
    }
    Ok(out)
}

fn auto_factor(k: usize, f: &crate::groups::Factor, hint: Option<&Vec<Vec<usize>>>, centers: &ReflectionCenters) -> Result<FactorPlan> {
    let n = centers.len();
    let general = || {
        if f.has_full_reflection {
            FactorPlan {
                factor: Some(k),
                method: Method::SimpleCut,
                actions: vec![emit_simple_reflection_cut(&f.reflected_support, centers)],
            }
        } else {
            FactorPlan {
                factor: Some(k),
                method: Method::LexPerGenerator,
                actions: f
                    .generators
                    .iter()
                    .map(|g| Action::LexReduce { gamma: g.clone(), order: identity_order(n) })
                    .collect(),
            }
        }
    };
    // a hint confirmed by the group beats the generator-based guess
    let from_hint = hint
        .filter(|m| m.iter().flatten().all(|v| f.support.binary_search(v).is_ok()))
        .map(|m| classify_matrix(&f.generators, m))
        .filter(|c| *c != Classification::Unstructured);
    let classification = from_hint.as_ref().unwrap_or(&f.classification);
    let Some((matrix, col_refl, row_and_col)) = oriented(classification) else { return Ok(general()) };
    let plan = |method, actions| Ok(FactorPlan { factor: Some(k), method, actions });
    if col_refl {
        if let Ok(mut actions) = plan_reflection_restrictions(&matrix, centers) {
            for b in reflection_blocks(matrix.len(), matrix[0].len()) {
                actions.extend(chain(&first_column(&matrix, b)));
            }
            return plan(Method::ReflectionRestrictions, actions);
        }
        return Ok(general());
    }
    if row_and_col {
        return plan(Method::RowColumnSorting, plan_row_column_sorting(&matrix));
    }
    if 1.0 - f.signed_fraction <= 0.8 {
        return Ok(general());
    }
    let (p, q) = (matrix.len(), matrix[0].len());
    if q == 1 {
        plan(Method::FullOrdering, chain(&first_column(&matrix, 0..p)))
    } else if p == 2 {
        let order: Vec<usize> = matrix[0].iter().chain(&matrix[1]).copied().collect();
        plan(Method::RowPairLex, vec![Action::LexReduce { gamma: row_swap(&matrix, 0, 1, n), order }])
    } else {
        plan(Method::RowSorting, vec![Action::SortRows { matrix: matrix.clone(), rows: 0..p }])
    }
}

/// Symmetry handling plan for `setting`. Settings `sym1`–`sym6` act on the
/// model's matrix hint (or the first classified matrix) and assume that its
/// rows are interchangeable and its columns can be permuted and reflected.
pub fn build_plan(p: &Minlp, report: &GroupReport, setting: Setting) -> Result<HandlerPlan> {
    let centers = p.centers();
    match setting {
        Setting::Sym0 => Ok(HandlerPlan::default()),
        Setting::Auto => Ok(HandlerPlan {
            factors: report.factors.iter().enumerate().map(|(k, f)| auto_factor(k, f, p.matrix_hint.as_ref(), &centers)).collect::<Result<_>>()?,
        }),
        s => {
            let matrix = setting_matrix(p, report);
            let actions = setting_actions(s, &matrix, &centers)?;
            Ok(HandlerPlan { factors: vec![FactorPlan { factor: None, method: Method::Settings, actions }] })
        }
    }
}
