//! Instance generators and the line-oriented text format.
//!
//! ```text
//! # comment
//! var <name> <lb> <ub> <cont|int|bin> <objcoef>
//! con <expr|expr-enhanced> <sexpr> <le|ge|eq> <rhs>
//! con stableset (stableset (nodes a b c) (weights 1 1 1) (edges (1 2) (2 3))) <le|ge|eq> <rhs>
//! matrix a b | c d
//! ```
//!
//! S-expressions use `(+ …)`, `(* …)`, `(pow e k)`, `(abs e)`, `(neg e)`,
//! variable names and numeric literals. The objective is always minimized.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::model::{Constraint, ConstraintBody, Minlp, Relation, StableSet, Tag, Variable};

fn name(s: usize, i: usize) -> String {
    format!("x{}_{}", s + 1, i + 1)
}

fn diff(a: usize, b: usize) -> Expr {
    Expr::sum(vec![Expr::var(a), Expr::neg(Expr::var(b))])
}

fn matrix(n: usize, d: usize) -> Vec<Vec<usize>> {
    (0..n).map(|s| (0..d).map(|i| s * d + i).collect()).collect()
}

/// Largest radius of `n` disjoint ℓ1-balls in `[-1,1]^d`. Variables are the
/// row-major `n × d` center matrix followed by `r`.
pub fn gen_packing(n: usize, d: usize) -> Minlp {
    let r = n * d;
    let mut vars: Vec<Variable> =
        (0..n).flat_map(|s| (0..d).map(move |i| Variable::continuous(name(s, i), -1.0, 1.0, 0.0))).collect();
    vars.push(Variable::continuous("r", 0.0, 1.0, -1.0));
    let mut cons = Vec::new();
    for s in 0..n {
        for t in s + 1..n {
            let mut terms: Vec<Expr> = (0..d).map(|i| Expr::abs(diff(s * d + i, t * d + i))).collect();
            terms.push(Expr::term(-2.0, r));
            cons.push(Constraint::expr(Expr::sum(terms), Relation::Ge, 0.0));
        }
    }
    // ±x + r ≤ 1 instead of variable bounds, so the centers stay fixed and the
    // two rows map onto each other under x ↦ −x
    for v in 0..r {
        cons.push(Constraint::expr(Expr::sum(vec![Expr::var(v), Expr::var(r)]), Relation::Le, 1.0));
        cons.push(Constraint::expr(Expr::sum(vec![Expr::term(-1.0, v), Expr::var(r)]), Relation::Le, 1.0));
    }
    Minlp::new(vars, cons).and_then(|p| p.with_matrix_hint(matrix(n, d))).expect("packing model")
}

/// Maximum scaled distance `α` of `n` points on the sphere of radius 2.
pub fn gen_kissing(n: usize, d: usize) -> Minlp {
    let a = n * d;
    let mut vars: Vec<Variable> =
        (0..n).flat_map(|s| (0..d).map(move |i| Variable::continuous(name(s, i), -2.0, 2.0, 0.0))).collect();
    vars.push(Variable::continuous("alpha", 0.0, 1.0, -1.0));
    let mut cons = Vec::new();
    for s in 0..n {
        let sq = (0..d).map(|i| Expr::pow(Expr::var(s * d + i), 2)).collect();
        cons.push(Constraint::expr(Expr::sum(sq), Relation::Eq, 4.0));
    }
    for s in 0..n {
        for t in s + 1..n {
            let mut terms = vec![Expr::val(8.0)];
            terms.extend((0..d).map(|i| Expr::prod(vec![Expr::val(-2.0), Expr::var(s * d + i), Expr::var(t * d + i)])));
            terms.push(Expr::term(-4.0, a));
            cons.push(Constraint::expr(Expr::sum(terms), Relation::Ge, 0.0));
        }
    }
    Minlp::new(vars, cons).and_then(|p| p.with_matrix_hint(matrix(n, d))).expect("kissing model")
}

/// Upper bound on the energy variable; a pair at distance below
/// `1/sqrt(ENERGY_CAP)` alone exceeds it.
pub const ENERGY_CAP: f64 = 100.0;

/// Minimum total inverse squared distance of `n` points on the unit sphere,
/// with the objective lifted into `α`.
pub fn gen_energy(n: usize, d: usize) -> Minlp {
    let a = n * d;
    let pairs = (n * n.saturating_sub(1) / 2).max(1) as f64;
    let mut vars: Vec<Variable> =
        (0..n).flat_map(|s| (0..d).map(move |i| Variable::continuous(name(s, i), -1.0, 1.0, 0.0))).collect();
    vars.push(Variable::continuous("alpha", 0.0, pairs * ENERGY_CAP, 1.0));
    let mut cons = Vec::new();
    for s in 0..n {
        let sq = (0..d).map(|i| Expr::pow(Expr::var(s * d + i), 2)).collect();
        cons.push(Constraint::expr(Expr::sum(sq), Relation::Eq, 1.0));
    }
    let mut terms = vec![Expr::var(a)];
    for s in 0..n {
        for t in s + 1..n {
            let dist = Expr::sum((0..d).map(|i| Expr::pow(diff(s * d + i, t * d + i), 2)).collect());
            terms.push(Expr::neg(Expr::pow(dist, -1)));
        }
    }
    cons.push(Constraint::expr(Expr::sum(terms), Relation::Ge, 0.0));
    Minlp::new(vars, cons).and_then(|p| p.with_matrix_hint(matrix(n, d))).expect("energy model")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn complete(n: usize) -> Graph {
        Graph { n, edges: (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect() }
    }

    pub fn cycle(n: usize) -> Graph {
        Graph { n, edges: (0..n).map(|u| (u, (u + 1) % n)).collect() }
    }

    pub fn petersen() -> Graph {
        let mut edges: Vec<(usize, usize)> = (0..5).map(|u| (u, (u + 1) % 5)).collect();
        edges.extend((0..5).map(|u| (u, u + 5)));
        edges.extend((0..5).map(|u| (u + 5, (u + 2) % 5 + 5)));
        Graph { n: 10, edges }
    }

    pub fn max_cut_bruteforce(&self) -> usize {
        (0..1u64 << self.n)
            .map(|m| self.edges.iter().filter(|&&(u, v)| (m >> u & 1) != (m >> v & 1)).count())
            .max()
            .unwrap_or(0)
    }
}

/// Max-cut with side variables `x_v` followed by edge variables `y_e`.
pub fn gen_maxcut(g: &Graph) -> Minlp {
    let mut vars: Vec<Variable> = (0..g.n).map(|v| Variable::binary(format!("x{}", v + 1), 0.0)).collect();
    vars.extend(g.edges.iter().map(|&(u, v)| Variable::binary(format!("y{}_{}", u + 1, v + 1), -1.0)));
    let mut cons = Vec::new();
    for (k, &(u, v)) in g.edges.iter().enumerate() {
        let y = g.n + k;
        cons.push(Constraint::expr(Expr::sum(vec![Expr::var(u), Expr::var(v), Expr::var(y)]), Relation::Le, 2.0));
        cons.push(Constraint::expr(
            Expr::sum(vec![Expr::term(-1.0, u), Expr::term(-1.0, v), Expr::var(y)]),
            Relation::Le,
            0.0,
        ));
    }
    Minlp::new(vars, cons).expect("max-cut model")
}

/// `k` disks in the box `[-w/2, w/2] × [-h/2, h/2]`; variables
/// `(x_1..x_k, y_1..y_k, r)`.
pub fn gen_disk_packing(k: usize, w: f64, h: f64) -> Minlp {
    let r = 2 * k;
    let mut vars: Vec<Variable> = (0..k).map(|i| Variable::continuous(format!("x{}", i + 1), -w / 2.0, w / 2.0, 0.0)).collect();
    vars.extend((0..k).map(|i| Variable::continuous(format!("y{}", i + 1), -h / 2.0, h / 2.0, 0.0)));
    vars.push(Variable::continuous("r", 0.0, w.min(h) / 2.0, -1.0));
    let mut cons = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let body = Expr::sum(vec![
                Expr::pow(diff(i, j), 2),
                Expr::pow(diff(k + i, k + j), 2),
                Expr::prod(vec![Expr::val(-4.0), Expr::pow(Expr::var(r), 2)]),
            ]);
            cons.push(Constraint::expr(body, Relation::Ge, 0.0));
        }
    }
    for (v, half) in (0..k).map(|i| (i, w / 2.0)).chain((0..k).map(|i| (k + i, h / 2.0))) {
        cons.push(Constraint::expr(Expr::sum(vec![Expr::var(v), Expr::var(r)]), Relation::Le, half));
        cons.push(Constraint::expr(Expr::sum(vec![Expr::term(-1.0, v), Expr::var(r)]), Relation::Le, half));
    }
    let m = (0..k).map(|i| vec![i, k + i]).collect();
    Minlp::new(vars, cons).and_then(|p| p.with_matrix_hint(m)).expect("disk packing model")
}

/// `4x₁ − 4x₂ + x₃ − x₄ ≤ 0` with `x₁,x₂ ∈ [−1,1]`, `x₃ ∈ [1,3]`, `x₄ ∈ [−2,0]`.
pub fn gen_two_pairs() -> Minlp {
    let vars = vec![
        Variable::continuous("x1", -1.0, 1.0, 0.0),
        Variable::continuous("x2", -1.0, 1.0, 0.0),
        Variable::continuous("x3", 1.0, 3.0, 0.0),
        Variable::continuous("x4", -2.0, 0.0, 0.0),
    ];
    let body = Expr::sum(vec![Expr::term(4.0, 0), Expr::term(-4.0, 1), Expr::var(2), Expr::term(-1.0, 3)]);
    Minlp::new(vars, vec![Constraint::expr(body, Relation::Le, 0.0)]).expect("two-pair model")
}

// ---- text format ----

#[derive(Clone, Debug, PartialEq)]
enum Sx {
    Atom(String),
    List(Vec<Sx>),
}

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn read_sx(toks: &[String], pos: &mut usize) -> std::result::Result<Sx, String> {
    let t = toks.get(*pos).ok_or("unexpected end of expression")?;
    *pos += 1;
    match t.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match toks.get(*pos).map(String::as_str) {
                    None => return Err("unbalanced '('".into()),
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sx::List(items));
                    }
                    Some(_) => items.push(read_sx(toks, pos)?),
                }
            }
        }
        ")" => Err("unexpected ')'".into()),
        a => Ok(Sx::Atom(a.to_string())),
    }
}

fn number(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("bad number '{}'", s))
}

fn to_expr(sx: &Sx, names: &dyn Fn(&str) -> Option<usize>) -> std::result::Result<Expr, String> {
    match sx {
        Sx::Atom(a) => {
            if let Some(i) = names(a) {
                Ok(Expr::var(i))
            } else {
                number(a).map(Expr::val).map_err(|_| format!("unknown variable '{}'", a))
            }
        }
        Sx::List(items) => {
            let Some(Sx::Atom(head)) = items.first() else { return Err("expected operator".into()) };
            let args = &items[1..];
            let kids = || args.iter().map(|a| to_expr(a, names)).collect::<std::result::Result<Vec<_>, _>>();
            let one = || -> std::result::Result<Expr, String> {
                if args.len() != 1 {
                    return Err(format!("'{}' takes one argument", head));
                }
                to_expr(&args[0], names)
            };
            match head.as_str() {
                "+" => Ok(Expr::sum(kids()?)),
                "*" => Ok(Expr::prod(kids()?)),
                "abs" => Ok(Expr::abs(one()?)),
                "neg" => Ok(Expr::neg(one()?)),
                "pow" => {
                    let [base, Sx::Atom(k)] = args else { return Err("'pow' takes a base and an integer".into()) };
                    let k: i32 = k.parse().map_err(|_| format!("bad exponent '{}'", k))?;
                    Ok(Expr::pow(to_expr(base, names)?, k))
                }
                h => Err(format!("unknown operator '{}'", h)),
            }
        }
    }
}

fn to_stable_set(sx: &Sx, names: &dyn Fn(&str) -> Option<usize>) -> std::result::Result<StableSet, String> {
    let Sx::List(items) = sx else { return Err("expected (stableset …)".into()) };
    if items.first() != Some(&Sx::Atom("stableset".into())) {
        return Err("expected (stableset …)".into());
    }
    let mut set = StableSet { nodes: vec![], weights: vec![], edges: vec![] };
    for part in &items[1..] {
        let Sx::List(p) = part else { return Err("expected a section".into()) };
        let Some(Sx::Atom(key)) = p.first() else { return Err("expected a section name".into()) };
        let atoms = |s: &Sx| match s {
            Sx::Atom(a) => Ok(a.clone()),
            Sx::List(_) => Err(format!("nested list in '{}'", key)),
        };
        match key.as_str() {
            "nodes" => {
                for a in &p[1..] {
                    let a = atoms(a)?;
                    set.nodes.push(names(&a).ok_or_else(|| format!("unknown variable '{}'", a))?);
                }
            }
            "weights" => {
                for a in &p[1..] {
                    set.weights.push(number(&atoms(a)?)?);
                }
            }
            "edges" => {
                for e in &p[1..] {
                    let Sx::List(uv) = e else { return Err("edge must be (u v)".into()) };
                    let [Sx::Atom(u), Sx::Atom(v)] = uv.as_slice() else { return Err("edge must be (u v)".into()) };
                    let idx = |s: &str| -> std::result::Result<usize, String> {
                        let k: usize = s.parse().map_err(|_| format!("bad node '{}'", s))?;
                        k.checked_sub(1).ok_or_else(|| "nodes are 1-based".to_string())
                    };
                    set.edges.push((idx(u)?, idx(v)?));
                }
            }
            k => return Err(format!("unknown section '{}'", k)),
        }
    }
    if set.weights.is_empty() {
        set.weights = vec![1.0; set.nodes.len()];
    }
    if set.weights.len() != set.nodes.len() {
        return Err("weights and nodes differ in length".into());
    }
    if set.edges.iter().any(|&(u, v)| u >= set.nodes.len() || v >= set.nodes.len()) {
        return Err("edge references a missing node".into());
    }
    Ok(set)
}

fn relation(s: &str) -> std::result::Result<Relation, String> {
    match s {
        "le" => Ok(Relation::Le),
        "ge" => Ok(Relation::Ge),
        "eq" => Ok(Relation::Eq),
        _ => Err(format!("bad relation '{}'", s)),
    }
}

fn is_name(s: &str) -> bool {
    !s.is_empty()
        && s.parse::<f64>().is_err()
        && !s.chars().any(|c| c.is_whitespace() || c == '(' || c == ')' || c == '|')
        && !matches!(s, "+" | "*" | "abs" | "neg" | "pow")
}

/// Parses the text format; errors carry 1-based line numbers.
pub fn parse(text: &str) -> Result<Minlp> {
    let mut vars: Vec<Variable> = Vec::new();
    let mut cons: Vec<Constraint> = Vec::new();
    let mut hint: Option<(usize, Vec<Vec<String>>)> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let err = |msg: String| Error::Parse { line, msg };
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let (kw, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        match kw {
            "var" => {
                let f: Vec<&str> = rest.split_whitespace().collect();
                let [n, lb, ub, ty, obj] = f.as_slice() else { return Err(err("expected: var <name> <lb> <ub> <type> <obj>".into())) };
                if !is_name(n) {
                    return Err(err(format!("bad variable name '{}'", n)));
                }
                if vars.iter().any(|v| v.name == *n) {
                    return Err(err(format!("duplicate variable '{}'", n)));
                }
                let (lb, ub, obj) = (number(lb).map_err(err)?, number(ub).map_err(err)?, number(obj).map_err(err)?);
                let v = match *ty {
                    "cont" => Variable::continuous(*n, lb, ub, obj),
                    "int" => Variable::new(*n, lb, ub, true, obj),
                    "bin" => Variable::new(*n, lb.max(0.0), ub.min(1.0), true, obj),
                    t => return Err(err(format!("bad variable type '{}'", t))),
                };
                vars.push(v);
            }
            "con" => {
                let toks = tokenize(rest);
                let tag = toks.first().ok_or_else(|| err("missing constraint tag".into()))?;
                let tag = match tag.as_str() {
                    "expr" => Tag::Expr,
                    "expr-enhanced" => Tag::ExprEnhanced,
                    "stableset" => Tag::StableSet,
                    t => return Err(err(format!("unknown tag '{}'", t))),
                };
                let mut pos = 1;
                let sx = read_sx(&toks, &mut pos).map_err(err)?;
                let [rel, rhs] = &toks[pos..] else { return Err(err("expected '<le|ge|eq> <rhs>' after the expression".into())) };
                let (rel, rhs) = (relation(rel).map_err(err)?, number(rhs).map_err(err)?);
                let lookup = |s: &str| vars.iter().position(|v| v.name == s);
                let body = match tag {
                    Tag::StableSet => ConstraintBody::StableSet(to_stable_set(&sx, &lookup).map_err(err)?),
                    _ => ConstraintBody::Expr(to_expr(&sx, &lookup).map_err(err)?),
                };
                cons.push(Constraint { tag, body, relation: rel, rhs });
            }
            "matrix" => {
                let rows = rest.split('|').map(|r| r.split_whitespace().map(String::from).collect()).collect();
                hint = Some((line, rows));
            }
            k => return Err(err(format!("unknown keyword '{}'", k))),
        }
    }
    let mut p = Minlp::new(vars, cons)?;
    if let Some((line, rows)) = hint {
        let m = rows
            .iter()
            .map(|r: &Vec<String>| {
                r.iter()
                    .map(|s| p.name_index(s).ok_or_else(|| Error::Parse { line, msg: format!("unknown variable '{}'", s) }))
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if m.iter().any(|r| r.len() != m[0].len()) || m.is_empty() || m[0].is_empty() {
            return Err(Error::Parse { line, msg: "matrix rows must be non-empty and of equal length".into() });
        }
        p = p.with_matrix_hint(m)?;
    }
    Ok(p)
}

fn write_expr(e: &Expr, p: &Minlp, out: &mut String) {
    match e {
        Expr::Value(v) => write!(out, "{}", v).unwrap(),
        Expr::Var { index, coef: None } => out.push_str(&p.variables[*index].name),
        Expr::Var { index, coef: Some(c) } => write!(out, "(* {} {})", c, p.variables[*index].name).unwrap(),
        Expr::Sum(ch) | Expr::Product(ch) => {
            out.push_str(if matches!(e, Expr::Sum(_)) { "(+" } else { "(*" });
            for c in ch {
                out.push(' ');
                write_expr(c, p, out);
            }
            out.push(')');
        }
        Expr::Power(b, k) => {
            out.push_str("(pow ");
            write_expr(b, p, out);
            write!(out, " {})", k).unwrap();
        }
        Expr::Abs(b) | Expr::Negate(b) => {
            out.push_str(if matches!(e, Expr::Abs(_)) { "(abs " } else { "(neg " });
            write_expr(b, p, out);
            out.push(')');
        }
    }
}

/// Canonical text form; `parse(&write(p))` reproduces `p` when `p` uses no
/// scaled variable leaves.
pub fn write(p: &Minlp) -> String {
    let mut out = String::new();
    for v in &p.variables {
        let ty = match (v.integral, v.lower >= 0.0 && v.upper <= 1.0) {
            (false, _) => "cont",
            (true, true) => "bin",
            (true, false) => "int",
        };
        // adding 0.0 turns -0 into 0
        writeln!(out, "var {} {} {} {} {}", v.name, v.lower + 0.0, v.upper + 0.0, ty, v.obj_coef + 0.0).unwrap();
    }
    for c in &p.constraints {
        let tag = match c.tag {
            Tag::Expr => "expr",
            Tag::ExprEnhanced => "expr-enhanced",
            Tag::StableSet => "stableset",
        };
        let rel = match c.relation {
            Relation::Le => "le",
            Relation::Ge => "ge",
            Relation::Eq => "eq",
        };
        let mut body = String::new();
        match &c.body {
            ConstraintBody::Expr(e) => write_expr(e, p, &mut body),
            ConstraintBody::StableSet(s) => {
                let nodes: Vec<&str> = s.nodes.iter().map(|&i| p.variables[i].name.as_str()).collect();
                let w: Vec<String> = s.weights.iter().map(|w| w.to_string()).collect();
                let e: Vec<String> = s.edges.iter().map(|(a, b)| format!("({} {})", a + 1, b + 1)).collect();
                write!(body, "(stableset (nodes {}) (weights {}) (edges {}))", nodes.join(" "), w.join(" "), e.join(" ")).unwrap();
            }
        }
        writeln!(out, "con {} {} {} {}", tag, body, rel, c.rhs + 0.0).unwrap();
    }
    if let Some(m) = &p.matrix_hint {
        let rows: Vec<String> =
            m.iter().map(|r| r.iter().map(|&i| p.variables[i].name.as_str()).collect::<Vec<_>>().join(" ")).collect();
        writeln!(out, "matrix {}", rows.join(" | ")).unwrap();
    }
    out
}
