//! Cartan matrices of reflection groups: validation, Perron typing, cyclic
//! products, circuits, equivalence up to diagonal conjugation, gauge fixing.

use std::collections::BTreeSet;
use std::fmt;

use crate::coxeter::{CoxeterMatrix, Label};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::{make_cos_entry, Scalar, Sign, APPROX_TOL};

pub const MAX_CYCLES: usize = 1_000_000;

#[derive(Clone, PartialEq, Debug)]
pub struct CartanMatrix {
    pub names: Vec<String>,
    pub a: Matrix,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    Diagonal(usize),
    Positive(usize, usize),
    ZeroPattern(usize, usize),
    Product(usize, usize),
    Inconclusive(usize, usize),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum PerronType {
    Positive,
    Zero,
    Negative,
}

impl fmt::Display for PerronType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PerronType::Positive => "Positive",
            PerronType::Zero => "Zero",
            PerronType::Negative => "Negative",
        })
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct PerronReport {
    pub kind: PerronType,
    pub lambda: Scalar,
    pub rank: usize,
}

/// A k-tuple of indices, read cyclically.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Circuit(pub Vec<usize>);

impl Circuit {
    pub fn reversed(&self) -> Circuit {
        let mut v = self.0.clone();
        v.reverse();
        Circuit(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Consecutive pairs, closing back to the start.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.0.len();
        (0..k).map(move |i| (self.0[i], self.0[(i + 1) % k]))
    }

    /// Rotation starting at the minimum, oriented so the second entry is
    /// smaller than the last.
    pub fn canonical(&self) -> Circuit {
        let k = self.0.len();
        if k == 0 {
            return self.clone();
        }
        let rot = |v: &[usize]| {
            let p = (0..k).min_by_key(|&i| v[i]).unwrap();
            (0..k).map(|i| v[(p + i) % k]).collect::<Vec<_>>()
        };
        let fwd = rot(&self.0);
        if k <= 2 || fwd[1] < fwd[k - 1] {
            Circuit(fwd)
        } else {
            Circuit(rot(&self.reversed().0))
        }
    }

    pub fn names(&self, names: &[String]) -> Vec<String> {
        self.0.iter().map(|&i| names[i].clone()).collect()
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct NormalizedRatio {
    pub num: Scalar,
    pub den: Scalar,
    pub ratio: Scalar,
    pub log_value: f64,
}

impl NormalizedRatio {
    pub fn is_zero(&self) -> bool {
        self.num.approx_eq(&self.den)
    }
}

/// Every simple cycle of length at least 3, once per orientation class, in
/// canonical form; sorted by length and then lexicographically.
pub fn simple_cycles(adj: &[Vec<bool>]) -> Result<Vec<Circuit>> {
    let n = adj.len();
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; n];
    for s in 0..n {
        path.clear();
        path.push(s);
        on_path[s] = true;
        dfs(adj, s, s, &mut path, &mut on_path, &mut out)?;
        on_path[s] = false;
    }
    out.sort_by(|a: &Circuit, b: &Circuit| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

fn dfs(
    adj: &[Vec<bool>],
    start: usize,
    v: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Circuit>,
) -> Result<()> {
    for w in 0..adj.len() {
        if !adj[v][w] || w == v {
            continue;
        }
        if w == start {
            if path.len() >= 3 && path[1] < path[path.len() - 1] {
                out.push(Circuit(path.clone()));
                if out.len() > MAX_CYCLES {
                    return Err(Error::TooManyCycles(MAX_CYCLES));
                }
            }
            continue;
        }
        if w < start || on_path[w] {
            continue;
        }
        path.push(w);
        on_path[w] = true;
        dfs(adj, start, w, path, on_path, out)?;
        on_path[w] = false;
        path.pop();
    }
    Ok(())
}

/// Relevant circuits of a diagram: simple cycles plus infinite edges as 2-circuits.
pub fn relevant_circuits_of(cox: &CoxeterMatrix) -> Result<Vec<Circuit>> {
    let n = cox.rank();
    let adj: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| i != j && cox.m[i][j].is_edge()).collect()).collect();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if cox.m[i][j] == Label::Inf {
                out.push(Circuit(vec![i, j]));
            }
        }
    }
    out.extend(simple_cycles(&adj)?);
    Ok(out)
}

fn in_crystal_range(p: f64) -> bool {
    if p >= 4.0 - APPROX_TOL {
        return true;
    }
    (3..10_000u32).any(|m| {
        let c = 2.0 * (std::f64::consts::PI / m as f64).cos();
        (c * c - p).abs() <= APPROX_TOL * 10.0
    })
}

impl CartanMatrix {
    pub fn new(names: Vec<String>, a: Matrix) -> Self {
        CartanMatrix { names, a }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let n = rows.len();
        let a = rows.iter().map(|r| r.iter().map(|&x| Scalar::int(x)).collect()).collect();
        CartanMatrix { names: crate::coxeter::names(n), a }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownFacet(name.to_string()))
    }

    pub fn is_exact(&self) -> bool {
        self.a.iter().flatten().all(Scalar::is_exact)
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        i != j && !self.a[i][j].is_zero()
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.adjacent(i, j)).collect()).collect()
    }

    pub fn edge_product(&self, i: usize, j: usize) -> Scalar {
        &self.a[i][j] * &self.a[j][i]
    }

    pub fn validate(&self) -> Vec<Violation> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            if !self.a[i][i].approx_eq(&Scalar::int(2)) {
                out.push(Violation::Diagonal(i));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                match self.a[i][j].sign() {
                    Some(Sign::Positive) => out.push(Violation::Positive(i, j)),
                    None => out.push(Violation::Inconclusive(i, j)),
                    _ => {}
                }
                if j < i {
                    continue;
                }
                let (zi, zj) = (self.a[i][j].is_zero(), self.a[j][i].is_zero());
                if zi != zj {
                    out.push(Violation::ZeroPattern(i, j));
                    continue;
                }
                if zi {
                    continue;
                }
                let p = self.edge_product(i, j);
                match &p {
                    Scalar::Exact(x) => {
                        let ok = [1, 2, 3].iter().any(|&k| *x == crate::AlgScalar::from_int(k))
                            || (x - &crate::AlgScalar::from_int(4)).sign() != Sign::Negative;
                        if !ok {
                            out.push(Violation::Product(i, j));
                        }
                    }
                    Scalar::Approx(v) => {
                        if !in_crystal_range(*v) {
                            out.push(Violation::Product(i, j));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Parse(format!("invalid Cartan matrix: {v:?}")))
        }
    }

    /// The Coxeter label carried by the pair `(i, j)`.
    pub fn label(&self, i: usize, j: usize) -> Label {
        if i == j {
            return Label::Finite(1);
        }
        let p = self.edge_product(i, j);
        if let Scalar::Exact(x) = &p {
            for (k, m) in [(0, 2), (1, 3), (2, 4), (3, 6)] {
                if *x == crate::AlgScalar::from_int(k) {
                    return Label::Finite(m);
                }
            }
            return Label::Inf;
        }
        let v = p.to_f64();
        if v >= 4.0 - APPROX_TOL {
            return Label::Inf;
        }
        let m = std::f64::consts::PI / (v.max(0.0).sqrt() / 2.0).min(1.0).acos();
        Label::Finite(m.round().max(2.0) as u32)
    }

    pub fn coxeter(&self) -> CoxeterMatrix {
        let n = self.dim();
        CoxeterMatrix {
            names: self.names.clone(),
            m: (0..n).map(|i| (0..n).map(|j| self.label(i, j)).collect()).collect(),
        }
    }

    pub fn restrict(&self, idx: &[usize]) -> CartanMatrix {
        CartanMatrix {
            names: idx.iter().map(|&i| self.names[i].clone()).collect(),
            a: idx.iter().map(|&i| idx.iter().map(|&j| self.a[i][j].clone()).collect()).collect(),
        }
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut k = 0;
            while k < comp.len() {
                let i = comp[k];
                for j in 0..n {
                    if !seen[j] && self.adjacent(i, j) {
                        seen[j] = true;
                        comp.push(j);
                    }
                }
                k += 1;
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    pub fn component_reports(&self) -> Result<Vec<(Vec<usize>, PerronReport)>> {
        self.components()
            .into_iter()
            .map(|c| {
                let r = self.restrict(&c).perron_type()?;
                Ok((c, r))
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.a)
    }

    /// Sign of the Perron eigenvalue of an irreducible matrix.
    ///
    /// `A = 2I - N` with `N >= 0` irreducible. Proper leading blocks have
    /// strictly smaller spectral radius, so a nonpositive pivot before the
    /// last one forces a negative type; otherwise the last pivot, a Schur
    /// complement, carries the sign of the Perron eigenvalue.
    pub fn perron_type(&self) -> Result<PerronReport> {
        let n = self.dim();
        if self.components().len() > 1 {
            return Err(Error::Reducible);
        }
        let pivots = linalg::leading_pivots(&self.a);
        let last = pivots.last().cloned().unwrap_or(Scalar::int(2));
        let kind = match last.sign() {
            None => {
                return Err(Error::Inconclusive("Perron type undecidable at tolerance".into()))
            }
            Some(_) if pivots.len() < n => PerronType::Negative,
            Some(Sign::Positive) => PerronType::Positive,
            Some(Sign::Zero) => PerronType::Zero,
            Some(Sign::Negative) => PerronType::Negative,
        };
        let rank = self.rank();
        let lambda = match kind {
            PerronType::Zero => Scalar::zero(),
            _ if n == 1 => self.a[0][0].clone(),
            _ => {
                let est = 2.0 - self.spectral_radius_offdiag();
                let est = match kind {
                    PerronType::Positive => est.max(f64::MIN_POSITIVE),
                    _ => est.min(-f64::MIN_POSITIVE),
                };
                Scalar::Approx(est)
            }
        };
        Ok(PerronReport { kind, lambda, rank })
    }

    /// Spectral radius of `2I - A` by power iteration on `3I - A`.
    fn spectral_radius_offdiag(&self) -> f64 {
        let n = self.dim();
        let m = linalg::to_f64(&self.a);
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut rho = 0.0;
        for _ in 0..20_000 {
            let w: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { v[j] } else { -m[i][j] * v[j] }).sum())
                .collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
            let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = next;
            rho = norm - 1.0;
            if delta < 1e-15 {
                break;
            }
        }
        rho
    }

    /// Product of entries along the circuit; `2` for a 1-circuit.
    pub fn cyclic_product(&self, c: &Circuit) -> Scalar {
        if c.len() == 1 {
            return self.a[c.0[0]][c.0[0]].clone();
        }
        c.steps().fold(Scalar::one(), |acc, (i, j)| &acc * &self.a[i][j])
    }

    /// `C(A) C̄(A)`: the product of the edge products along the circuit.
    pub fn circuit_edge_product(&self, c: &Circuit) -> Scalar {
        if c.len() == 2 {
            return self.edge_product(c.0[0], c.0[1]);
        }
        c.steps().fold(Scalar::one(), |acc, (i, j)| &acc * &self.edge_product(i, j))
    }

    pub fn normalized_cyclic_product(&self, c: &Circuit) -> Result<NormalizedRatio> {
        let num = self.cyclic_product(c);
        let den = self.cyclic_product(&c.reversed());
        if num.is_zero() || den.is_zero() {
            return Err(Error::ZeroCyclicProduct(c.0.clone()));
        }
        if num.sign() != den.sign() {
            return Err(Error::SignMismatch(c.0.clone()));
        }
        let ratio = num.div(&den)?;
        let log_value = ratio.to_f64().ln();
        Ok(NormalizedRatio { num, den, ratio, log_value })
    }

    /// Simple cycles of the adjacency graph plus infinite pairs as 2-circuits.
    pub fn relevant_circuits(&self) -> Result<Vec<Circuit>> {
        relevant_circuits_of(&self.coxeter())
    }

    /// Each simple cycle in both orientations.
    pub fn directed_cycles(&self) -> Result<Vec<Circuit>> {
        let cyc = simple_cycles(&self.adjacency())?;
        Ok(cyc.iter().flat_map(|c| [c.clone(), c.reversed()]).collect())
    }

    pub fn conjugate_by_diagonal(&self, d: &[Scalar]) -> Result<CartanMatrix> {
        let n = self.dim();
        let inv = d.iter().map(Scalar::inv).collect::<Result<Vec<_>>>()?;
        let a = (0..n)
            .map(|i| (0..n).map(|j| &(&d[i] * &self.a[i][j]) * &inv[j]).collect())
            .collect();
        Ok(CartanMatrix { names: self.names.clone(), a })
    }

    /// Diagonal-conjugacy equivalence, decided on the zero pattern, the edge
    /// products and every directed simple-cycle product. Every closed walk
    /// decomposes into directed simple cycles and back-and-forth steps, so
    /// this finite set generates all cyclic products.
    pub fn equivalent(&self, other: &CartanMatrix) -> Result<bool> {
        if self.names != other.names {
            return Err(Error::IndexMismatch);
        }
        let n = self.dim();
        for i in 0..n {
            if !self.a[i][i].approx_eq(&other.a[i][i]) {
                return Ok(false);
            }
            for j in (i + 1)..n {
                if self.adjacent(i, j) != other.adjacent(i, j) {
                    return Ok(false);
                }
                if !self.edge_product(i, j).approx_eq(&other.edge_product(i, j)) {
                    return Ok(false);
                }
            }
        }
        for c in self.directed_cycles()? {
            if !self.cyclic_product(&c).approx_eq(&other.cyclic_product(&c)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Spanning tree from Kruskal over the lexicographic edge order.
    pub fn spanning_tree(&self) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
        spanning_tree(&self.adjacency())
    }

    /// The equivalent matrix that is symmetric on the spanning tree, with
    /// tree entries `-sqrt(A_st A_ts)` and the circuit asymmetry on the
    /// remaining edges.
    pub fn canonical_gauge(&self) -> Result<CartanMatrix> {
        let n = self.dim();
        let (tree, rest) = self.spanning_tree()?;
        let mut out = CartanMatrix {
            names: self.names.clone(),
            a: (0..n)
                .map(|i| (0..n).map(|j| if i == j { self.a[i][i].clone() } else { Scalar::zero() }).collect())
                .collect(),
        };
        for &(i, j) in &tree {
            let e = -self.edge_product(i, j).sqrt();
            out.a[i][j] = e.clone();
            out.a[j][i] = e;
        }
        for &(i, j) in &rest {
            let c = fundamental_cycle(n, &tree, i, j);
            let r = self.normalized_cyclic_product(&c)?.ratio;
            let p = self.edge_product(i, j);
            out.a[i][j] = -(&p * &r).sqrt();
            out.a[j][i] = -(p.div(&r)?).sqrt();
        }
        Ok(out)
    }
}

pub fn spanning_tree(adj: &[Vec<bool>]) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    let n = adj.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut tree = Vec::new();
    let mut rest = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !adj[i][j] {
                continue;
            }
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a == b {
                rest.push((i, j));
            } else {
                parent[a] = b;
                tree.push((i, j));
            }
        }
    }
    if n > 0 && tree.len() + 1 != n {
        return Err(Error::Disconnected);
    }
    Ok((tree, rest))
}

/// The cycle `(i, j, ..., )` closing the non-tree edge `(i, j)` through the tree.
pub fn fundamental_cycle(n: usize, tree: &[(usize, usize)], i: usize, j: usize) -> Circuit {
    let mut nb = vec![Vec::new(); n];
    for &(a, b) in tree {
        nb[a].push(b);
        nb[b].push(a);
    }
    let mut prev = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([j]);
    prev[j] = j;
    while let Some(v) = queue.pop_front() {
        for &w in &nb[v] {
            if prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    // walk from i back to j, then reverse to get j .. i
    let mut walk = vec![i];
    let mut v = i;
    while v != j {
        v = prev[v];
        walk.push(v);
    }
    walk.reverse();
    walk.pop();
    let mut c = vec![i];
    c.extend(walk);
    Circuit(c)
}

pub fn cosine_matrix(m: &CoxeterMatrix) -> Result<CartanMatrix> {
    let n = m.rank();
    let mut a = vec![vec![Scalar::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = if i == j { Scalar::int(2) } else { make_cos_entry(m.m[i][j].finite())? };
        }
    }
    Ok(CartanMatrix { names: m.names.clone(), a })
}

/// Index pairs of edges used by a set of circuits.
pub fn circuit_edges(cs: &[Circuit]) -> BTreeSet<(usize, usize)> {
    cs.iter()
        .flat_map(|c| c.steps().map(|(i, j)| (i.min(j), i.max(j))).collect::<Vec<_>>())
        .collect()
}
