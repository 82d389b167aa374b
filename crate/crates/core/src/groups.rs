//! Structure of detected groups: independent factors, row/column matrix
//! symmetries, single row or column reflections and the full reflection.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::model::{compose, SignedPermutation};

/// Closure is only attempted up to this many elements.
pub const CLOSURE_MAX_ORDER: usize = 1_000_000;
const CLOSURE_MAX_ENTRIES: usize = 20_000_000;

fn closure_cap(n: usize) -> usize {
    CLOSURE_MAX_ORDER.min(CLOSURE_MAX_ENTRIES / n.max(1))
}

/// All elements of the generated group, or `None` beyond the size cap.
pub fn closure(gens: &[SignedPermutation], n: usize) -> Option<Vec<SignedPermutation>> {
    closure_with_cap(gens, n, closure_cap(n))
}

pub fn closure_with_cap(gens: &[SignedPermutation], n: usize, cap: usize) -> Option<Vec<SignedPermutation>> {
    let id = SignedPermutation::identity(n);
    let mut seen: HashSet<SignedPermutation> = HashSet::from([id.clone()]);
    let mut all = vec![id];
    let mut k = 0;
    while k < all.len() {
        let x = all[k].clone();
        k += 1;
        for g in gens {
            let y = compose(g, &x).ok()?;
            if seen.insert(y.clone()) {
                if all.len() >= cap {
                    return None;
                }
                all.push(y);
            }
        }
    }
    Some(all)
}

/// Order of the generated group; `None` if it does not fit in `usize`.
pub fn group_order(gens: &[SignedPermutation], n: usize) -> Option<usize> {
    usize::try_from(StabilizerChain::new(gens, n).order()).ok()
}

/// Schreier-Sims stabilizer chain of a signed permutation group, acting on
/// the `2n` signed indices. Gives the order and membership without listing
/// the elements.
#[derive(Clone, Debug)]
pub struct StabilizerChain {
    n: usize,
    levels: Vec<Level>,
}

#[derive(Clone, Debug)]
struct Level {
    base: usize,
    gens: Vec<Vec<usize>>,
    /// `transversal[p]` maps the base point to `p`, for `p` in the orbit.
    transversal: Vec<Option<Vec<usize>>>,
}

fn as_points(g: &SignedPermutation, n: usize) -> Vec<usize> {
    let slot = |i: i32| if i > 0 { i as usize - 1 } else { n + (-i) as usize - 1 };
    let mut out = vec![0; 2 * n];
    for i in (1..=n as i32).flat_map(|i| [i, -i]) {
        out[slot(i)] = slot(g.apply(i));
    }
    out
}

/// `b ∘ a`: apply `a` first.
fn after(b: &[usize], a: &[usize]) -> Vec<usize> {
    a.iter().map(|&x| b[x]).collect()
}

fn invert(a: &[usize]) -> Vec<usize> {
    let mut out = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        out[x] = i;
    }
    out
}

fn is_id(a: &[usize]) -> bool {
    a.iter().enumerate().all(|(i, &x)| i == x)
}

impl Level {
    fn new(base: usize, m: usize) -> Self {
        let mut transversal = vec![None; m];
        transversal[base] = Some((0..m).collect());
        Level { base, gens: Vec::new(), transversal }
    }

    fn grow_orbit(&mut self) {
        let mut queue: Vec<usize> = (0..self.transversal.len()).filter(|&p| self.transversal[p].is_some()).collect();
        while let Some(p) = queue.pop() {
            for s in &self.gens {
                let q = s[p];
                if self.transversal[q].is_none() {
                    let u = after(s, self.transversal[p].as_ref().expect("orbit point"));
                    self.transversal[q] = Some(u);
                    queue.push(q);
                }
            }
        }
    }

    fn orbit_len(&self) -> usize {
        self.transversal.iter().filter(|t| t.is_some()).count()
    }
}

impl StabilizerChain {
    pub fn new(gens: &[SignedPermutation], n: usize) -> Self {
        let mut chain = StabilizerChain { n, levels: Vec::new() };
        let points: Vec<Vec<usize>> = gens.iter().map(|g| as_points(g, n)).filter(|g| !is_id(g)).collect();
        for g in points {
            if let Some((r, j)) = chain.sift(g, 0) {
                chain.insert(r, 0, j);
            }
        }
        chain.complete();
        chain
    }

    /// Strips `g` through the levels from `from`; the residue and the level
    /// where it stopped, or `None` if it reduces to the identity.
    fn sift(&self, mut g: Vec<usize>, from: usize) -> Option<(Vec<usize>, usize)> {
        for (j, level) in self.levels.iter().enumerate().skip(from) {
            let p = g[level.base];
            match &level.transversal[p] {
                Some(u) => g = after(&invert(u), &g),
                None => return Some((g, j)),
            }
        }
        (!is_id(&g)).then_some((g, self.levels.len()))
    }

    /// Adds `r` (fixing the bases below `from`) as a generator of levels `from..=to`.
    fn insert(&mut self, r: Vec<usize>, from: usize, to: usize) {
        if to == self.levels.len() {
            let base = (0..r.len()).find(|&p| r[p] != p).expect("non-identity residue");
            self.levels.push(Level::new(base, 2 * self.n));
        }
        for level in &mut self.levels[from..=to] {
            level.gens.push(r.clone());
            level.grow_orbit();
        }
    }

    /// Sifts Schreier generators until every level is closed.
    fn complete(&mut self) {
        let mut i = self.levels.len();
        'outer: while i > 0 {
            let k = i - 1;
            let level = &self.levels[k];
            let m = level.transversal.len();
            for p in 0..m {
                let Some(up) = &level.transversal[p] else { continue };
                for s in &level.gens {
                    let q = s[p];
                    let uq = level.transversal[q].as_ref().expect("orbit closed");
                    let h = after(&invert(uq), &after(s, up));
                    if let Some((r, j)) = self.sift(h, k + 1) {
                        self.insert(r, k + 1, j);
                        i = self.levels.len();
                        continue 'outer;
                    }
                }
            }
            i -= 1;
        }
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().fold(1u128, |acc, l| acc.saturating_mul(l.orbit_len() as u128))
    }

    pub fn contains(&self, g: &SignedPermutation) -> bool {
        g.n() == self.n && self.sift(as_points(g, self.n), 0).is_none()
    }
}

/// Drops generators that lie in the group generated by the ones kept before them.
pub fn prune_generators(gens: &[SignedPermutation]) -> Vec<SignedPermutation> {
    let Some(n) = gens.first().map(SignedPermutation::n) else { return vec![] };
    let mut kept: Vec<SignedPermutation> = Vec::new();
    let mut chain = StabilizerChain::new(&[], n);
    for g in gens {
        if chain.contains(g) {
            continue;
        }
        kept.push(g.clone());
        chain = StabilizerChain::new(&kept, n);
    }
    kept
}

/// Generators grouped by connected components of the "move a common variable" relation.
pub fn split_components(gens: &[SignedPermutation]) -> Vec<Vec<SignedPermutation>> {
    let mut parent: Vec<usize> = (0..gens.len()).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, g) in gens.iter().enumerate() {
        for v in g.support() {
            match owner.get(&v) {
                Some(&o) => {
                    let (a, b) = (root(&mut parent, o), root(&mut parent, k));
                    parent[a] = b;
                }
                None => {
                    owner.insert(v, k);
                }
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<SignedPermutation>> = BTreeMap::new();
    let mut order: Vec<usize> = Vec::new();
    for (k, g) in gens.iter().enumerate() {
        let r = root(&mut parent, k);
        if !comps.contains_key(&r) {
            order.push(r);
        }
        comps.entry(r).or_default().push(g.clone());
    }
    order.into_iter().map(|r| comps.remove(&r).expect("component")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Classification {
    /// Rows and columns of `matrix` (0-based variables) can be permuted.
    RowColumn { matrix: Vec<Vec<usize>>, column_reflections: bool, row_reflections: bool },
    /// Rows of `matrix` can be permuted.
    Row { matrix: Vec<Vec<usize>>, column_reflections: bool },
    Unstructured,
}

fn two_cycles(g: &SignedPermutation) -> Option<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for c in g.cycles() {
        if c.len() != 2 || c[0] < 0 || c[1] < 0 {
            return None;
        }
        out.push((c[0] as usize - 1, c[1] as usize - 1));
    }
    Some(out)
}

/// Rows glued from generators that swap consecutive rows.
fn rows_from_swaps(class: &[Vec<(usize, usize)>]) -> Option<Vec<Vec<usize>>> {
    if class.len() == 1 {
        let mut pairs = class[0].clone();
        pairs.sort_unstable();
        return Some(vec![pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect()]);
    }
    let supports: Vec<BTreeSet<usize>> = class.iter().map(|c| c.iter().flat_map(|&(a, b)| [a, b]).collect()).collect();
    let m = class.len();
    let mut adj = vec![Vec::new(); m];
    for a in 0..m {
        for b in a + 1..m {
            if !supports[a].is_disjoint(&supports[b]) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    if adj.iter().any(|a| a.len() > 2 || a.is_empty()) {
        return None;
    }
    let ends: Vec<usize> = (0..m).filter(|&k| adj[k].len() == 1).collect();
    if ends.len() != 2 {
        return None;
    }
    let mut order = vec![ends[0].min(ends[1])];
    while order.len() < m {
        let last = *order.last().expect("non-empty");
        let next = adj[last].iter().copied().find(|x| !order.contains(x))?;
        order.push(next);
    }
    let first: BTreeSet<usize> = supports[order[0]].difference(&supports[order[1]]).copied().collect();
    let mut rows = vec![first.into_iter().collect::<Vec<usize>>()];
    for &k in &order {
        let map: BTreeMap<usize, usize> = class[k].iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        let prev = rows.last().expect("row");
        let next: Option<Vec<usize>> = prev.iter().map(|v| map.get(v).copied()).collect();
        rows.push(next?);
    }
    let q = rows[0].len();
    let all: BTreeSet<usize> = rows.iter().flatten().copied().collect();
    if q == 0 || rows.iter().any(|r| r.len() != q) || all.len() != q * rows.len() {
        return None;
    }
    for (k, &g) in order.iter().enumerate() {
        let mut want: Vec<(usize, usize)> = (0..q).map(|c| (rows[k][c].min(rows[k + 1][c]), rows[k][c].max(rows[k + 1][c]))).collect();
        let mut got: Vec<(usize, usize)> = class[g].iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        want.sort_unstable();
        got.sort_unstable();
        if want != got {
            return None;
        }
    }
    Some(rows)
}

fn transpose(m: &[Vec<usize>]) -> Vec<Vec<usize>> {
    if m.is_empty() {
        return vec![];
    }
    (0..m[0].len()).map(|c| m.iter().map(|r| r[c]).collect()).collect()
}

/// `γ(i) = −i` on `vars`, identity elsewhere.
pub fn reflection_of(vars: &[usize], n: usize) -> SignedPermutation {
    let mut img: Vec<i32> = (1..=n as i32).collect();
    for &v in vars {
        img[v] = -img[v];
    }
    SignedPermutation::from_images(img).expect("valid reflection")
}

/// Membership test with a lazily built stabilizer chain.
fn in_group(x: &SignedPermutation, gens: &[SignedPermutation], chain: &mut Option<StabilizerChain>) -> bool {
    gens.contains(x) || chain.get_or_insert_with(|| StabilizerChain::new(gens, x.n())).contains(x)
}

/// Row/column classification of a generator set.
pub fn detect_matrix_symmetry(gens: &[SignedPermutation]) -> Classification {
    let Some(n) = gens.first().map(SignedPermutation::n) else { return Classification::Unstructured };
    let mut classes: BTreeMap<usize, Vec<Vec<(usize, usize)>>> = BTreeMap::new();
    for g in gens.iter().filter(|g| g.is_plain()) {
        match two_cycles(g) {
            Some(c) if !c.is_empty() => classes.entry(c.len()).or_default().push(c),
            _ => return Classification::Unstructured,
        }
    }
    let mut cache = None;
    let mut reflectable = |lines: &[Vec<usize>]| lines.iter().all(|l| in_group(&reflection_of(l, n), gens, &mut cache));
    match classes.len() {
        1 => {
            let class = classes.into_values().next().expect("one class");
            let Some(matrix) = rows_from_swaps(&class) else { return Classification::Unstructured };
            let column_reflections = reflectable(&transpose(&matrix));
            Classification::Row { matrix, column_reflections }
        }
        2 => {
            let mut it = classes.into_values();
            let col_class = it.next().expect("fewer 2-cycles");
            let row_class = it.next().expect("more 2-cycles");
            let (Some(rows), Some(cols)) = (rows_from_swaps(&row_class), rows_from_swaps(&col_class)) else {
                return Classification::Unstructured;
            };
            // `cols` lists columns as rows; reorder the row-built matrix to that order
            let current = transpose(&rows);
            let mut ordered = Vec::with_capacity(cols.len());
            for c in &cols {
                let set: BTreeSet<usize> = c.iter().copied().collect();
                match current.iter().find(|col| col.iter().copied().collect::<BTreeSet<_>>() == set) {
                    Some(col) => ordered.push(col.clone()),
                    None => return Classification::Unstructured,
                }
            }
            if ordered.len() != current.len() {
                return Classification::Unstructured;
            }
            let matrix = transpose(&ordered);
            let swap = |a: &[usize], b: &[usize]| {
                let mut v: Vec<(usize, usize)> = a.iter().zip(b).map(|(&x, &y)| (x.min(y), x.max(y))).collect();
                v.sort_unstable();
                v
            };
            let adjacent: Vec<Vec<(usize, usize)>> = ordered.windows(2).map(|w| swap(&w[0], &w[1])).collect();
            for g in &col_class {
                let mut got: Vec<(usize, usize)> = g.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
                got.sort_unstable();
                if !adjacent.contains(&got) {
                    return Classification::Unstructured;
                }
            }
            let column_reflections = reflectable(&ordered);
            let row_reflections = reflectable(&matrix);
            Classification::RowColumn { matrix, column_reflections, row_reflections }
        }
        _ => Classification::Unstructured,
    }
}

/// Classification of a known variable matrix, checked by group membership of
/// the adjacent row and column swaps and of the line reflections.
pub fn classify_matrix(gens: &[SignedPermutation], matrix: &[Vec<usize>]) -> Classification {
    let Some(n) = gens.first().map(SignedPermutation::n) else { return Classification::Unstructured };
    if matrix.len() < 2 || matrix[0].is_empty() || matrix.iter().flatten().any(|&v| v >= n) {
        return Classification::Unstructured;
    }
    let swap = |a: &[usize], b: &[usize]| {
        let mut img: Vec<i32> = (1..=n as i32).collect();
        for (&u, &v) in a.iter().zip(b) {
            img[u] = v as i32 + 1;
            img[v] = u as i32 + 1;
        }
        SignedPermutation::from_images(img).expect("swap")
    };
    let mut cache = None;
    let mut member = |g: &SignedPermutation| in_group(g, gens, &mut cache);
    if !matrix.windows(2).all(|w| member(&swap(&w[0], &w[1]))) {
        return Classification::Unstructured;
    }
    let cols = transpose(matrix);
    let column_reflections = cols.iter().all(|c| member(&reflection_of(c, n)));
    if cols.len() >= 2 && cols.windows(2).all(|w| member(&swap(&w[0], &w[1]))) {
        let row_reflections = matrix.iter().all(|r| member(&reflection_of(r, n)));
        Classification::RowColumn { matrix: matrix.to_vec(), column_reflections, row_reflections }
    } else {
        Classification::Row { matrix: matrix.to_vec(), column_reflections }
    }
}

/// Union-find orbits on signed indices; each orbit sorted ascending.
pub fn orbits(gens: &[SignedPermutation], n: usize) -> Vec<Vec<i32>> {
    let slot = |i: i32| if i > 0 { i as usize - 1 } else { n + (-i) as usize - 1 };
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for g in gens {
        for i in (1..=n as i32).flat_map(|i| [i, -i]) {
            let (a, b) = (root(&mut parent, slot(i)), root(&mut parent, slot(g.apply(i))));
            parent[a] = b;
        }
    }
    let mut by_root: BTreeMap<usize, Vec<i32>> = BTreeMap::new();
    for i in (1..=n as i32).flat_map(|i| [i, -i]) {
        let r = root(&mut parent, slot(i));
        by_root.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<i32>> = by_root.into_values().map(|mut o| {
        o.sort_unstable();
        o
    }).collect();
    out.sort_by_key(|o| o.iter().map(|v| v.abs()).min());
    out
}

/// Variables whose orbit contains their own reflection.
pub fn reflected_support(gens: &[SignedPermutation], n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = orbits(gens, n)
        .iter()
        .filter(|o| o.iter().any(|&v| v < 0 && o.contains(&-v)))
        .flat_map(|o| o.iter().filter(|&&v| v > 0).map(|&v| v as usize - 1))
        .collect();
    out.sort_unstable();
    out
}

/// Whether `γ*` (negating exactly `support`) lies in the generated group.
pub fn detect_full_reflection(gens: &[SignedPermutation], support: &[usize]) -> bool {
    let Some(n) = gens.first().map(SignedPermutation::n) else { return false };
    if support.is_empty() {
        return false;
    }
    in_group(&reflection_of(support, n), gens, &mut None)
}

pub fn signed_fraction(gens: &[SignedPermutation]) -> f64 {
    if gens.is_empty() {
        return 0.0;
    }
    gens.iter().filter(|g| !g.is_plain()).count() as f64 / gens.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Factor {
    pub support: Vec<usize>,
    pub generators: Vec<SignedPermutation>,
    pub classification: Classification,
    pub has_full_reflection: bool,
    pub reflected_support: Vec<usize>,
    pub signed_fraction: f64,
    pub order: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupReport {
    pub n: usize,
    pub factors: Vec<Factor>,
    pub orbits: Vec<Vec<i32>>,
}

pub fn analyze(gens: &[SignedPermutation], n: usize) -> GroupReport {
    let factors = split_components(gens)
        .into_iter()
        .map(|fg| {
            let mut support: Vec<usize> = fg.iter().flat_map(|g| g.support()).collect();
            support.sort_unstable();
            support.dedup();
            let refl = reflected_support(&fg, n);
            Factor {
                has_full_reflection: detect_full_reflection(&fg, &refl),
                classification: detect_matrix_symmetry(&fg),
                signed_fraction: signed_fraction(&fg),
                order: group_order(&fg, n),
                reflected_support: refl,
                support,
                generators: fg,
            }
        })
        .collect::<Vec<Factor>>();
    let mut factors = factors;
    factors.sort_by_key(|f| f.support.first().copied());
    GroupReport { n, factors, orbits: orbits(gens, n) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(n: usize, s: &str) -> SignedPermutation {
        SignedPermutation::parse(n, s).unwrap()
    }

    #[test]
    fn square_matrix_from_hint() {
        // 2×2 matrix [[1,2],[3,4]] with row swap, column swap, column reflections
        let gens = [sp(4, "(1,3)(2,4)"), sp(4, "(1,2)(3,4)"), sp(4, "(1,-1)(3,-3)")];
        match classify_matrix(&gens, &[vec![0, 1], vec![2, 3]]) {
            Classification::RowColumn { column_reflections, row_reflections, .. } => {
                assert!(column_reflections);
                assert!(!row_reflections);
            }
            c => panic!("{:?}", c),
        }
        assert_eq!(classify_matrix(&gens[1..], &[vec![0, 1], vec![2, 3]]), Classification::Unstructured);
    }

    #[test]
    fn components() {
        assert_eq!(split_components(&[sp(4, "(1,2)"), sp(4, "(3,4)")]).len(), 2);
        assert_eq!(split_components(&[sp(4, "(1,-2)(2,-1)"), sp(4, "(3,-4)(4,-3)")]).len(), 2);
        assert_eq!(split_components(&[sp(4, "(1,2)"), sp(4, "(2,3)")]).len(), 1);
        assert_eq!(split_components(&[sp(4, "(1,2)")]).len(), 1);
    }

    #[test]
    fn orbits_small() {
        let o = orbits(&[sp(3, "(1,2)")], 3);
        assert!(o.contains(&vec![1, 2]) && o.contains(&vec![3]));
        assert!(orbits(&[sp(1, "(1,-1)")], 1).contains(&vec![-1, 1]));
        let o = orbits(&[sp(4, "(1,-2)(2,-1)"), sp(4, "(3,-4)(4,-3)")], 4);
        assert!(o.contains(&vec![-2, 1]) && o.contains(&vec![-4, 3]));
    }

    #[test]
    fn full_reflection() {
        assert!(!detect_full_reflection(&[sp(4, "(1,-2)(2,-1)")], &[0, 1, 2, 3]));
        assert!(!detect_full_reflection(&[], &[0]));
        assert!(detect_full_reflection(&[sp(2, "(1,-1)"), sp(2, "(2,-2)")], &[0, 1]));
    }

    #[test]
    fn row_matrix_from_adjacent_swaps() {
        // 3 rows x 2 columns, rows (1,2) (3,4) (5,6)
        let gens = [sp(6, "(1,3)(2,4)"), sp(6, "(3,5)(4,6)"), sp(6, "(1,-1)(3,-3)(5,-5)"), sp(6, "(2,-2)(4,-4)(6,-6)")];
        match detect_matrix_symmetry(&gens) {
            Classification::Row { matrix, column_reflections } => {
                assert_eq!(matrix, vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
                assert!(column_reflections);
            }
            c => panic!("{:?}", c),
        }
    }

    #[test]
    fn row_column_matrix() {
        // 2 rows x 3 columns: rows {1,2,3},{4,5,6}; row swap has 3 2-cycles
        let gens = [sp(6, "(1,4)(2,5)(3,6)"), sp(6, "(1,2)(4,5)"), sp(6, "(2,3)(5,6)")];
        match detect_matrix_symmetry(&gens) {
            Classification::RowColumn { matrix, column_reflections, row_reflections } => {
                assert_eq!(matrix, vec![vec![0, 1, 2], vec![3, 4, 5]]);
                assert!(!column_reflections && !row_reflections);
            }
            c => panic!("{:?}", c),
        }
    }

    #[test]
    fn non_involutions_are_unstructured() {
        assert_eq!(detect_matrix_symmetry(&[sp(3, "(1,2,3)")]), Classification::Unstructured);
        let three = [sp(9, "(1,2)"), sp(9, "(3,4)(5,6)"), sp(9, "(7,8)(1,9)(3,5)")];
        assert_eq!(detect_matrix_symmetry(&three), Classification::Unstructured);
    }

    #[test]
    fn pruning_drops_redundant_generators() {
        let g = [sp(3, "(1,2)"), sp(3, "(2,3)"), sp(3, "(1,3)"), sp(3, "(1,2,3)")];
        assert_eq!(prune_generators(&g).len(), 2);
        assert_eq!(group_order(&g, 3), Some(6));
        assert_eq!(closure_with_cap(&g, 3, 3), None);
    }

    #[test]
    fn chain_orders_of_large_groups() {
        // S_8 on points, and the hyperoctahedral group 2^8·8!
        let s8 = [sp(8, "(1,2)"), sp(8, "(1,2,3,4,5,6,7,8)")];
        assert_eq!(group_order(&s8, 8), Some(40320));
        let b8 = [sp(8, "(1,2)"), sp(8, "(1,2,3,4,5,6,7,8)"), sp(8, "(1,-1)")];
        assert_eq!(group_order(&b8, 8), Some(40320 * 256));
        let chain = StabilizerChain::new(&s8, 8);
        assert!(chain.contains(&sp(8, "(3,7)")));
        assert!(!chain.contains(&sp(8, "(3,-3)")));
        assert_eq!(group_order(&[], 5), Some(1));
    }

    proptest::proptest! {
        #[test]
        fn chain_agrees_with_closure(imgs in proptest::collection::vec(proptest::strategy::Strategy::prop_shuffle(proptest::strategy::Just((1..=5).collect::<Vec<i32>>())), 1..4), signs in proptest::collection::vec(0u32..32, 3)) {
            let gens: Vec<SignedPermutation> = imgs
                .iter()
                .zip(signs.iter().cycle())
                .map(|(img, &mask)| {
                    let img = img.iter().enumerate().map(|(k, &v)| if mask >> k & 1 == 1 { -v } else { v }).collect();
                    SignedPermutation::from_images(img).unwrap()
                })
                .collect();
            let all = closure(&gens, 5).unwrap();
            let chain = StabilizerChain::new(&gens, 5);
            proptest::prop_assert_eq!(chain.order(), all.len() as u128);
            for g in all.iter().take(50) {
                proptest::prop_assert!(chain.contains(g));
            }
        }
    }

    #[test]
    fn signed_fraction_counts_signed_generators() {
        assert_eq!(signed_fraction(&[sp(2, "(1,2)"), sp(2, "(1,-1)")]), 0.5);
        assert_eq!(signed_fraction(&[]), 0.0);
    }
}
