//! Deformation-space charts and points for simplices, once-truncated
//! simplices and their gluings, with the bending action in closed form.
//!
//! A simplex point is a Cartan matrix in canonical gauge. A glued point is a
//! list of leaf points plus one bending value `E = e^{(d+1)u}` per cut; the
//! global Cartan matrix on the non-truncation facets is assembled by
//! realizing the leaves one after the other in a common frame.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::cartan::{cosine_matrix, fundamental_cycle, spanning_tree, CartanMatrix, Circuit, PerronType};
use crate::coxeter::{CoxeterMatrix, GroupClass, Label};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::polytope::{GluingTree, LabeledPolytope};
use crate::scalar::{Scalar, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChartTag {
    Triangle,
    RightTriangle,
    /// 3-simplex without right angles.
    Case1,
    /// 3-simplex with one right angle.
    Case2,
    Pan,
    Cycle,
    Tree,
    K23,
    General,
}

/// Chart of a labeled simplex: the normalized cyclic products of
/// `coordinates`, subject to `constraints` (integer exponent relations whose
/// product must be 1).
#[derive(Clone, Debug, PartialEq)]
pub struct CellChart {
    pub dim: usize,
    pub cox: CoxeterMatrix,
    pub tree: Vec<(usize, usize)>,
    pub nontree: Vec<(usize, usize)>,
    pub coordinates: Vec<Circuit>,
    /// Row `k`: exponents of the non-tree ratios in coordinate `k`.
    pub exponents: Vec<Vec<i64>>,
    pub constraints: Vec<Vec<i64>>,
    pub dimension: usize,
    pub tag: ChartTag,
}

fn circuit_exponents(c: &Circuit, nontree: &[(usize, usize)]) -> Vec<i64> {
    let mut row = vec![0i64; nontree.len()];
    for (a, b) in c.steps() {
        if let Some(k) = nontree.iter().position(|&e| e == (a, b)) {
            row[k] += 1;
        } else if let Some(k) = nontree.iter().position(|&e| e == (b, a)) {
            row[k] -= 1;
        }
    }
    row
}

fn int_matrix(rows: &[Vec<i64>]) -> Matrix {
    rows.iter().map(|r| r.iter().map(|&x| Scalar::int(x)).collect()).collect()
}

/// Integer basis of the left kernel of `rows`.
fn integer_relations(rows: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let t: Matrix = (0..cols).map(|j| rows.iter().map(|r| Scalar::int(r[j])).collect()).collect();
    linalg::kernel(&t, rows.len())
        .into_iter()
        .map(|v| {
            let qs: Vec<crate::Rational> =
                v.iter().map(|x| x.exact().and_then(|e| e.as_rational().cloned()).expect("rational")).collect();
            let lcm = qs.iter().fold(num_bigint::BigInt::from(1), |acc, q| num_integer::Integer::lcm(&acc, q.denom()));
            qs.iter()
                .map(|q| {
                    let z = q * crate::Rational::from_integer(lcm.clone());
                    i64::try_from(z.to_integer()).expect("small relation")
                })
                .collect()
        })
        .collect()
}

/// Product of `values[k]^{exp[k]}`; exact when every used value is.
fn monomial(values: &[Scalar], exp: &[i64]) -> Result<Scalar> {
    let mut acc = Scalar::one();
    for (v, &e) in values.iter().zip(exp) {
        let base = if e < 0 { v.inv()? } else { v.clone() };
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
    }
    Ok(acc)
}

impl CellChart {
    /// Chart of the simplex with the given Coxeter data (all pairs adjacent).
    pub fn simplex(cox: &CoxeterMatrix) -> Result<CellChart> {
        let n = cox.rank();
        if n < 3 {
            return Err(Error::BadDimension(n.saturating_sub(1)));
        }
        let d = n - 1;
        if d > 9 {
            return Err(Error::EmptyCell(format!("dimension {d} exceeds 9")));
        }
        if cox.m.iter().flatten().any(|l| *l == Label::Inf) {
            return Err(Error::UnsupportedShape("simplex with an infinite label is not 2-perfect".into()));
        }
        let adj: Vec<Vec<bool>> =
            (0..n).map(|i| (0..n).map(|j| i != j && cox.m[i][j].is_edge()).collect()).collect();
        let (tree, nontree) =
            spanning_tree(&adj).map_err(|_| Error::UnsupportedShape("reducible simplex".into()))?;
        let e_plus = tree.len() + nontree.len();
        let right = n * (n - 1) / 2 - e_plus;
        let triangles = crate::cartan::simple_cycles(&adj)?.into_iter().filter(|c| c.len() == 3).count();
        let degrees: Vec<usize> = (0..n).map(|i| adj[i].iter().filter(|&&x| x).count()).collect();
        let tag = match (d, nontree.len()) {
            (2, 0) => ChartTag::RightTriangle,
            (2, _) => ChartTag::Triangle,
            (_, 0) => ChartTag::Tree,
            (3, _) if right == 0 => ChartTag::Case1,
            (3, _) if right == 1 => ChartTag::Case2,
            (_, 1) if triangles == 1 && d == 3 || (nontree.len() == 1 && degrees.iter().any(|&x| x == 1)) => {
                ChartTag::Pan
            }
            (_, 1) => ChartTag::Cycle,
            (_, 2) if n == 5 && {
                let mut ds = degrees.clone();
                ds.sort();
                ds == vec![2, 2, 2, 3, 3]
                    && (0..n).all(|i| (0..n).all(|j| !(adj[i][j] && degrees[i] == degrees[j])))
            } =>
            {
                ChartTag::K23
            }
            _ => ChartTag::General,
        };
        let coordinates: Vec<Circuit> = match tag {
            ChartTag::Case1 => [[1, 2, 3], [3, 2, 0], [0, 1, 3], [0, 2, 1]].iter().map(|c| Circuit(c.to_vec())).collect(),
            ChartTag::Case2 | ChartTag::K23 => {
                let cycles = crate::cartan::simple_cycles(&adj)?;
                let shortest = cycles.iter().map(|c| c.len()).min().unwrap_or(0);
                let mut cs: Vec<Circuit> = cycles.into_iter().filter(|c| c.len() == shortest).collect();
                if tag == ChartTag::K23 {
                    // orient the three 4-cycles so their ratios multiply to 1
                    let rows: Vec<Vec<i64>> = cs.iter().map(|c| circuit_exponents(c, &nontree)).collect();
                    let rel = integer_relations(&rows, nontree.len());
                    if let Some(r) = rel.first() {
                        for (k, c) in cs.iter_mut().enumerate() {
                            if r[k] < 0 {
                                *c = c.reversed();
                            }
                        }
                    }
                }
                cs
            }
            _ => nontree.iter().map(|&(i, j)| fundamental_cycle(n, &tree, i, j)).collect(),
        };
        let exponents: Vec<Vec<i64>> = coordinates.iter().map(|c| circuit_exponents(c, &nontree)).collect();
        let dimension = if exponents.is_empty() { 0 } else { linalg::rank(&int_matrix(&exponents)) };
        let constraints = integer_relations(&exponents, nontree.len());
        Ok(CellChart { dim: d, cox: cox.clone(), tree, nontree, coordinates, exponents, constraints, dimension, tag })
    }

    pub fn e_plus(&self) -> usize {
        self.tree.len() + self.nontree.len()
    }

    pub fn names(&self) -> &[String] {
        &self.cox.names
    }

    /// Symmetric representative, the base point of the chart.
    pub fn cosine(&self) -> Result<CartanMatrix> {
        cosine_matrix(&self.cox)
    }

    /// Non-tree ratios `A_ij / A_ji` read from a matrix.
    pub fn nontree_ratios(&self, a: &CartanMatrix) -> Result<Vec<Scalar>> {
        let n = self.cox.rank();
        self.nontree
            .iter()
            .map(|&(i, j)| Ok(a.normalized_cyclic_product(&fundamental_cycle(n, &self.tree, i, j))?.ratio))
            .collect()
    }

    /// Canonical-gauge matrix with the given non-tree ratios.
    pub fn matrix_from_ratios(&self, ratios: &[Scalar]) -> Result<CartanMatrix> {
        let mut a = self.cosine()?;
        for (&(i, j), r) in self.nontree.iter().zip(ratios) {
            if r.sign() != Some(Sign::Positive) {
                return Err(Error::ConstraintViolated(format!("ratio {r} is not positive")));
            }
            let p = a.edge_product(i, j);
            a.a[i][j] = -(&p * r).sqrt();
            a.a[j][i] = -(p.div(r)?).sqrt();
        }
        Ok(a)
    }

    /// Canonical-gauge matrix from the cyclic products of the fundamental
    /// cycles (each `C(A)` with its sign).
    pub fn matrix_from_cycle_values(&self, values: &[Scalar]) -> Result<CartanMatrix> {
        let n = self.cox.rank();
        let base = self.cosine()?;
        let ratios = self
            .nontree
            .iter()
            .zip(values)
            .map(|(&(i, j), c)| {
                let m = base.circuit_edge_product(&fundamental_cycle(n, &self.tree, i, j));
                // C / C̄ = C^2 / M_C
                (c * c).div(&m)
            })
            .collect::<Result<Vec<_>>>()?;
        self.matrix_from_ratios(&ratios)
    }

    pub fn coordinates_of(&self, a: &CartanMatrix) -> Result<Vec<Scalar>> {
        self.coordinates.iter().map(|c| Ok(a.normalized_cyclic_product(c)?.ratio)).collect()
    }

    /// Solves the coordinate system for the non-tree ratios.
    fn solve_ratios(&self, values: &[Scalar]) -> Result<Vec<Scalar>> {
        let m = self.nontree.len();
        if values.len() != self.coordinates.len() {
            return Err(Error::ConstraintViolated(format!(
                "expected {} coordinates, got {}",
                self.coordinates.len(),
                values.len()
            )));
        }
        if m == 0 {
            return Ok(Vec::new());
        }
        let mut rows = Vec::new();
        for k in 0..self.exponents.len() {
            let mut trial = rows.clone();
            trial.push(k);
            let sub: Vec<Vec<i64>> = trial.iter().map(|&i| self.exponents[i].clone()).collect();
            if linalg::rank(&int_matrix(&sub)) == trial.len() {
                rows = trial;
            }
            if rows.len() == m {
                break;
            }
        }
        let sub = int_matrix(&rows.iter().map(|&i| self.exponents[i].clone()).collect::<Vec<_>>());
        // columns of the inverse: solve sub * x = e_k
        let mut inv = vec![vec![Scalar::zero(); m]; m];
        for k in 0..m {
            let mut e = vec![Scalar::zero(); m];
            e[k] = Scalar::one();
            let x = linalg::solve(&sub, &e).expect("independent rows");
            for (i, xi) in x.into_iter().enumerate() {
                inv[i][k] = xi;
            }
        }
        let integral = inv.iter().flatten().all(|x| matches!(x.is_integer(), Ok(Some(_))));
        let chosen: Vec<Scalar> = rows.iter().map(|&i| values[i].clone()).collect();
        if integral {
            inv.iter()
                .map(|row| {
                    let exp: Vec<i64> = row
                        .iter()
                        .map(|x| i64::try_from(x.is_integer().unwrap().unwrap()).unwrap())
                        .collect();
                    monomial(&chosen, &exp)
                })
                .collect()
        } else {
            Ok(inv
                .iter()
                .map(|row| {
                    let l: f64 = row.iter().zip(&chosen).map(|(x, v)| x.to_f64() * v.to_f64().ln()).sum();
                    Scalar::Approx(l.exp())
                })
                .collect())
        }
    }

    /// Matrix with the given coordinate ratios; rejects values violating a
    /// constraint or landing outside the loxodromic region.
    pub fn point_from_coordinates(&self, values: &[Scalar]) -> Result<CartanMatrix> {
        let ratios = self.solve_ratios(values)?;
        for (k, row) in self.exponents.iter().enumerate() {
            let got = monomial(&ratios, row)?;
            if !got.approx_eq(&values[k]) {
                return Err(Error::ConstraintViolated(format!(
                    "coordinate {:?} is {} but the others force {}",
                    self.coordinates[k].names(self.names()),
                    values[k],
                    got
                )));
            }
        }
        let a = self.matrix_from_ratios(&ratios)?;
        check_loxodromic(&a, self.dim)?;
        Ok(a)
    }

    pub fn point_from_logs(&self, logs: &[f64]) -> Result<CartanMatrix> {
        let values: Vec<Scalar> = logs.iter().map(|l| Scalar::Approx(l.exp())).collect();
        self.point_from_coordinates(&values)
    }
}

/// Negative Perron type and full rank.
pub fn check_loxodromic(a: &CartanMatrix, d: usize) -> Result<()> {
    let rep = a.perron_type()?;
    if rep.kind != PerronType::Negative {
        return Err(Error::NotLoxodromic(format!("Perron type {}", rep.kind)));
    }
    if rep.rank != d + 1 {
        return Err(Error::NotLoxodromic(format!("rank {} instead of {}", rep.rank, d + 1)));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Truncatability {
    pub truncatable: bool,
    pub reason: String,
}

/// Whether the simplex vertex cut out by `vertex` (facet names) can be
/// truncated at the point `a`.
pub fn truncatability(a: &CartanMatrix, vertex: &[String]) -> Result<Truncatability> {
    let idx = vertex
        .iter()
        .map(|n| a.index_of(n).map_err(|_| Error::UnknownVertex(vertex.to_vec())))
        .collect::<Result<Vec<_>>>()?;
    let sub = a.restrict(&idx);
    let cox = sub.coxeter();
    if !cox.is_irreducible() {
        return Ok(Truncatability { truncatable: false, reason: "reducible link".into() });
    }
    let class = cox.classify(true)?;
    if class == GroupClass::Large && cox.refine()?.is_lanner {
        return Ok(Truncatability { truncatable: true, reason: "Lanner link".into() });
    }
    if cox.is_a_tilde() && cox.rank() + 1 == a.dim() {
        let c = crate::cartan::simple_cycles(&sub.adjacency())?.remove(0);
        let r = sub.normalized_cyclic_product(&c)?;
        return Ok(if r.is_zero() {
            Truncatability { truncatable: false, reason: "affine link with vanishing normalized cyclic product".into() }
        } else {
            Truncatability { truncatable: true, reason: "affine link with nonzero normalized cyclic product".into() }
        });
    }
    Ok(Truncatability { truncatable: false, reason: format!("{class} link is not loxodromic") })
}

/// Chart of a labeled polytope: leaf charts of its gluing tree, one bending
/// coordinate per cut, one identification per cut whose circuit is a cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub dim: usize,
    pub leaves: Vec<CellChart>,
    pub tree: GluingTree,
    /// Cuts whose circuit diagram carries a cycle, identified across the cut.
    pub identified: Vec<usize>,
    pub dimension: usize,
    pub e_plus: usize,
}

pub fn leaf_cox(piece: &LabeledPolytope, simplex: &[String]) -> Result<CoxeterMatrix> {
    let idx = simplex.iter().map(|n| piece.facet_index(n)).collect::<Result<Vec<_>>>()?;
    Ok(piece.coxeter().restrict(&idx))
}

pub fn cell_chart(g: &LabeledPolytope) -> Result<Chart> {
    if g.dim > 9 {
        return Err(Error::EmptyCell(format!("dimension {} exceeds 9", g.dim)));
    }
    if g.dim >= 3 {
        let cox = g.coxeter();
        if !cox.is_irreducible() || cox.classify(false)? != GroupClass::Large {
            return Err(Error::UnsupportedShape("polytope is not irreducible and large".into()));
        }
        if !g.perfection()?.two_perfect {
            return Err(Error::UnsupportedShape("polytope is not 2-perfect".into()));
        }
    } else if g.facet_count() != 3 {
        return Err(Error::UnsupportedShape("polygons other than triangles".into()));
    }
    let tree = g.gluing_tree()?;
    let mut leaves = Vec::new();
    for leaf in &tree.leaves {
        let cox = leaf_cox(&leaf.piece, &leaf.simplex)?;
        for t in leaf.cut_facets.iter().chain(&leaf.free_truncations) {
            let v = leaf.truncated_vertex(t)?;
            let idx: Vec<usize> = v.iter().map(|n| cox.index_of(n)).collect::<Result<_>>()?;
            let link = cox.restrict(&idx);
            let ok = link.is_irreducible()
                && ((link.classify(true)? == GroupClass::Large && link.refine()?.is_lanner) || link.is_a_tilde());
            if !ok {
                return Err(Error::EmptyCell(format!("vertex {v:?} is neither Lanner nor affine of type A")));
            }
        }
        leaves.push(CellChart::simplex(&cox)?);
    }
    let mut identified = Vec::new();
    for (k, c) in tree.cuts.iter().enumerate() {
        let leaf = &tree.leaves[c.left];
        let cox = leaf_cox(&leaf.piece, &c.delta)?;
        if !crate::cartan::relevant_circuits_of(&cox)?.is_empty() {
            identified.push(k);
        }
    }
    let dimension = leaves.iter().map(|l| l.dimension).sum::<usize>() + tree.cuts.len() - identified.len();
    Ok(Chart { dim: g.dim, leaves, e_plus: g.e_plus(), tree, identified, dimension })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeafPoint {
    pub matrix: CartanMatrix,
    /// Truncated simplex vertices, as facet names.
    pub truncated: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutLink {
    pub delta: Vec<String>,
    pub left: usize,
    pub right: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeformationPoint {
    pub dim: usize,
    pub leaves: Vec<LeafPoint>,
    pub cuts: Vec<CutLink>,
    /// Bending value per cut.
    pub e: Vec<Scalar>,
}

/// Placement record for one cut: the child's new facet `r` against the
/// parent's facet `l` outside the circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub cut: usize,
    pub parent: usize,
    pub child: usize,
    pub l: usize,
    pub r: usize,
    pub delta: Vec<usize>,
    pub n: Vec<Scalar>,
    pub nu: Vec<Scalar>,
    pub u_r: Vec<Scalar>,
    pub alpha_pi: Vec<Scalar>,
    pub kappa: Scalar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assembly {
    pub matrix: CartanMatrix,
    pub alpha: Vec<Vec<Scalar>>,
    pub b: Vec<Vec<Scalar>>,
    pub frames: Vec<Frame>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BendingFiberData {
    pub k1: Scalar,
    pub x1: Scalar,
    pub y1: Scalar,
    pub k2: Scalar,
    pub x2: Scalar,
    pub y2: Scalar,
    /// Probe circuit `(l, s_1, ..., s_j, r)` in the assembled index order.
    pub probe: Circuit,
    pub probe_names: Vec<String>,
    pub dim: usize,
}

impl BendingFiberData {
    pub fn numerator(&self, e: &Scalar) -> Scalar {
        &self.k1 * &(&self.x1 + &(e * &self.y1))
    }

    pub fn denominator(&self, e: &Scalar) -> Result<Scalar> {
        Ok(&self.k2 * &(&self.x2 + &self.y2.div(e)?))
    }

    /// `log(N/D)` as a function of the bending parameter `u`, relative to `e0`.
    pub fn log_ratio(&self, e0: f64, u: f64) -> f64 {
        let e = e0 * ((self.dim as f64 + 1.0) * u).exp();
        let n = self.k1.to_f64() * (self.x1.to_f64() + e * self.y1.to_f64());
        let d = self.k2.to_f64() * (self.x2.to_f64() + self.y2.to_f64() / e);
        (n / d).ln()
    }

    /// `x1, y1, x2, y2 > 0` and `K1, K2` of one sign.
    pub fn check(&self) -> Result<()> {
        for (name, v) in [("x1", &self.x1), ("y1", &self.y1), ("x2", &self.x2), ("y2", &self.y2)] {
            if v.sign() != Some(Sign::Positive) {
                return Err(Error::ConstraintViolated(format!("{name} = {v} is not positive")));
            }
        }
        match (self.k1.sign(), self.k2.sign()) {
            (Some(a), Some(b)) if a == b && a != Sign::Zero => Ok(()),
            _ => Err(Error::ConstraintViolated("K1 and K2 differ in sign".into())),
        }
    }
}

fn axpy(y: &[Scalar], a: &Scalar, x: &[Scalar]) -> Vec<Scalar> {
    y.iter().zip(x).map(|(yi, xi)| yi + &(a * xi)).collect()
}

impl DeformationPoint {
    pub fn single(matrix: CartanMatrix, truncated: Vec<Vec<String>>) -> DeformationPoint {
        DeformationPoint {
            dim: matrix.dim() - 1,
            leaves: vec![LeafPoint { matrix, truncated }],
            cuts: Vec::new(),
            e: Vec::new(),
        }
    }

    /// Leaf order from leaf 0, with the cut used to reach each leaf.
    fn order(&self) -> Vec<(usize, usize, usize)> {
        let mut seen = vec![false; self.leaves.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let mut out = Vec::new();
        while let Some(a) = queue.pop_front() {
            for (k, c) in self.cuts.iter().enumerate() {
                let b = if c.left == a {
                    c.right
                } else if c.right == a {
                    c.left
                } else {
                    continue;
                };
                if !seen[b] {
                    seen[b] = true;
                    out.push((k, a, b));
                    queue.push_back(b);
                }
            }
        }
        out
    }

    /// Leaf validity (loxodromic, truncatable vertices) and positive bending.
    pub fn validate(&self) -> Result<()> {
        for leaf in &self.leaves {
            check_loxodromic(&leaf.matrix, self.dim)?;
            for v in &leaf.truncated {
                let t = truncatability(&leaf.matrix, v)?;
                if !t.truncatable {
                    return Err(if t.reason.contains("vanishing") {
                        Error::TruncationDegenerate(v.clone())
                    } else {
                        Error::NotLoxodromic(format!("vertex {v:?}: {}", t.reason))
                    });
                }
            }
        }
        for e in &self.e {
            if e.sign() != Some(Sign::Positive) {
                return Err(Error::NonPositiveBend);
            }
        }
        self.assemble().map(|_| ())
    }

    /// Realizes all leaves in one frame and returns the Cartan matrix on the
    /// union of their facets.
    pub fn assemble(&self) -> Result<Assembly> {
        let n = self.dim + 1;
        let root = &self.leaves[0].matrix;
        let mut names = root.names.clone();
        let mut alpha: Vec<Vec<Scalar>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect())
            .collect();
        let mut b: Vec<Vec<Scalar>> = (0..n).map(|j| (0..n).map(|i| root.a[i][j].clone()).collect()).collect();
        let mut frames = Vec::new();
        let mut leaf_idx: Vec<Vec<usize>> = vec![Vec::new(); self.leaves.len()];
        leaf_idx[0] = (0..n).collect();
        for (k, pa, ch) in self.order() {
            let cut = &self.cuts[k];
            let pos = |name: &String| names.iter().position(|x| x == name);
            let delta: Vec<usize> = cut
                .delta
                .iter()
                .map(|s| pos(s).ok_or_else(|| Error::UnknownFacet(s.clone())))
                .collect::<Result<_>>()?;
            let leaf = &self.leaves[ch].matrix;
            let local_delta: Vec<usize> = cut.delta.iter().map(|s| leaf.index_of(s)).collect::<Result<_>>()?;
            let r_local = (0..n).find(|i| !local_delta.contains(i)).expect("one facet outside the circuit");
            let placed: Matrix = delta
                .iter()
                .map(|&s| delta.iter().map(|&t| linalg::dot(&alpha[s], &b[t])).collect())
                .collect();
            // gauge the child so its circuit block equals the placed block
            let mut dg = vec![Scalar::zero(); n];
            dg[r_local] = Scalar::one();
            let mut done = vec![false; delta.len()];
            done[0] = true;
            dg[local_delta[0]] = Scalar::one();
            let mut queue = VecDeque::from([0usize]);
            while let Some(x) = queue.pop_front() {
                for y in 0..delta.len() {
                    if done[y] || placed[x][y].is_zero() {
                        continue;
                    }
                    let (sx, sy) = (local_delta[x], local_delta[y]);
                    // d_x A_xy / d_y = P_xy
                    dg[sy] = (&dg[sx] * &leaf.a[sx][sy]).div(&placed[x][y])?;
                    done[y] = true;
                    queue.push_back(y);
                }
            }
            if done.iter().any(|x| !x) {
                return Err(Error::Disconnected);
            }
            let gauged = leaf.conjugate_by_diagonal(&dg)?;
            for x in 0..delta.len() {
                for y in 0..delta.len() {
                    if !gauged.a[local_delta[x]][local_delta[y]].approx_eq(&placed[x][y]) {
                        return Err(Error::ConstraintViolated(format!(
                            "circuit {:?} carries different cyclic products on the two sides",
                            cut.delta
                        )));
                    }
                }
            }
            let parent_set: BTreeSet<usize> = leaf_idx[pa].iter().copied().collect();
            let l = *parent_set
                .iter()
                .find(|i| !delta.contains(i))
                .ok_or_else(|| Error::UnsupportedShape("parent leaf lies inside the circuit".into()))?;
            let rows: Matrix = delta.iter().map(|&s| alpha[s].clone()).collect();
            let ker = linalg::kernel(&rows, n);
            if ker.len() != 1 {
                return Err(Error::NotAHyperplane(n - ker.len()));
            }
            let scale = linalg::dot(&alpha[l], &ker[0]);
            if scale.is_zero() {
                return Err(Error::NotAHyperplane(n));
            }
            let nvec: Vec<Scalar> = ker[0].iter().map(|x| -&x.div(&scale).unwrap()).collect();
            // basis (b_s for s in delta, n); functionals are solved from values on it
            let mut mt: Matrix = delta.iter().map(|&s| b[s].clone()).collect();
            mt.push(nvec.clone());
            let mut rhs_nu = vec![Scalar::zero(); n];
            rhs_nu[n - 1] = Scalar::one();
            let nu = linalg::solve(&mt, &rhs_nu).ok_or(Error::NotAHyperplane(linalg::rank(&mt)))?;
            let mut rhs_pi: Vec<Scalar> = local_delta.iter().map(|&s| gauged.a[r_local][s].clone()).collect();
            rhs_pi.push(Scalar::zero());
            let alpha_pi = linalg::solve(&mt, &rhs_pi).ok_or(Error::NotAHyperplane(linalg::rank(&mt)))?;
            let col: Vec<Scalar> = local_delta.iter().map(|&s| gauged.a[s][r_local].clone()).collect();
            let c = linalg::solve(&placed, &col).ok_or(Error::NotAHyperplane(linalg::rank(&placed)))?;
            let mut u_r = vec![Scalar::zero(); n];
            for (ci, &t) in c.iter().zip(&delta) {
                u_r = axpy(&u_r, ci, &b[t]);
            }
            let kappa = &Scalar::int(2) - &linalg::dot(&alpha_pi, &u_r);
            let e = &self.e[k];
            if e.sign() != Some(Sign::Positive) {
                return Err(Error::NonPositiveBend);
            }
            let b_r = axpy(&u_r, &kappa.div(e)?, &nvec);
            let alpha_r = axpy(&alpha_pi, e, &nu);
            let r_name = leaf.names[r_local].clone();
            let r = match pos(&r_name) {
                Some(_) => {
                    return Err(Error::UnsupportedShape(format!("facet {r_name} placed twice")));
                }
                None => {
                    names.push(r_name);
                    alpha.push(alpha_r);
                    b.push(b_r);
                    names.len() - 1
                }
            };
            let mut idx = delta.clone();
            idx.push(r);
            leaf_idx[ch] = idx;
            frames.push(Frame { cut: k, parent: pa, child: ch, l, r, delta, n: nvec, nu, u_r, alpha_pi, kappa });
        }
        let m = names.len();
        let a = (0..m).map(|x| (0..m).map(|y| linalg::dot(&alpha[x], &b[y])).collect()).collect();
        Ok(Assembly { matrix: CartanMatrix::new(names, a), alpha, b, frames })
    }

    /// Probe data of the fiber through this point over cut `k`.
    pub fn bending_data(&self, k: usize) -> Result<BendingFiberData> {
        let asm = self.assemble()?;
        let f = asm.frames.iter().find(|f| f.cut == k).ok_or(Error::NotEssential)?;
        let a = &asm.matrix;
        // shortest path l -> s_1 .. s_j -> r through the circuit, j >= 1
        let mut best: Option<Vec<usize>> = None;
        let mut queue: VecDeque<Vec<usize>> = f
            .delta
            .iter()
            .filter(|&&s| a.adjacent(f.l, s))
            .map(|&s| vec![s])
            .collect();
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut found_len = usize::MAX;
        while let Some(p) = queue.pop_front() {
            if p.len() > found_len {
                break;
            }
            let last = *p.last().unwrap();
            if a.adjacent(last, f.r) {
                found_len = p.len();
                let key = |q: &Vec<usize>| q.iter().map(|&i| a.names[i].clone()).collect::<Vec<_>>();
                if best.as_ref().is_none_or(|bp| key(&p) < key(bp)) {
                    best = Some(p.clone());
                }
                continue;
            }
            if !seen.insert(last) {
                continue;
            }
            for &s in &f.delta {
                if !p.contains(&s) && a.adjacent(last, s) {
                    let mut q = p.clone();
                    q.push(s);
                    queue.push_back(q);
                }
            }
        }
        let path = best.ok_or(Error::NoProbeCircuit)?;
        let mut probe = vec![f.l];
        probe.extend(&path);
        probe.push(f.r);
        let prod = |steps: &[usize]| {
            steps.windows(2).fold(Scalar::one(), |acc, w| &acc * &a.a[w[0]][w[1]])
        };
        let fwd = prod(&probe);
        let mut rev = probe.clone();
        rev.reverse();
        let bwd = prod(&rev);
        let x = linalg::dot(&f.alpha_pi, &asm.b[f.l]);
        let y = linalg::dot(&f.nu, &asm.b[f.l]);
        let xp = linalg::dot(&asm.alpha[f.l], &f.u_r);
        Ok(BendingFiberData {
            k1: -fwd,
            x1: -x,
            y1: -y,
            k2: -bwd,
            x2: -xp,
            y2: f.kappa.clone(),
            probe_names: probe.iter().map(|&i| a.names[i].clone()).collect(),
            probe: Circuit(probe),
            dim: self.dim,
        })
    }

    /// Multiplies the bending value of cut `k` by `factor = e^{(d+1)u}`.
    pub fn bend(&self, k: usize, factor: &Scalar) -> Result<DeformationPoint> {
        if factor.sign() != Some(Sign::Positive) {
            return Err(Error::NonPositiveBend);
        }
        let mut p = self.clone();
        p.e[k] = &p.e[k] * factor;
        Ok(p)
    }

    pub fn bend_u(&self, k: usize, u: f64) -> Result<DeformationPoint> {
        self.bend(k, &Scalar::Approx(((self.dim as f64 + 1.0) * u).exp()))
    }

    /// The leaves in `set` (connected in the tree) with `root` first, so
    /// every cut keeps the parent side it has from leaf 0.
    pub fn subtree(&self, set: &BTreeSet<usize>, root: usize) -> DeformationPoint {
        let mut order = vec![root];
        order.extend(set.iter().copied().filter(|&i| i != root));
        let re = |i: usize| order.iter().position(|&x| x == i).unwrap();
        let mut cuts = Vec::new();
        let mut e = Vec::new();
        for (j, c) in self.cuts.iter().enumerate() {
            if set.contains(&c.left) && set.contains(&c.right) {
                cuts.push(CutLink { delta: c.delta.clone(), left: re(c.left), right: re(c.right) });
                e.push(self.e[j].clone());
            }
        }
        DeformationPoint {
            dim: self.dim,
            leaves: order.iter().map(|&i| self.leaves[i].clone()).collect(),
            cuts,
            e,
        }
    }

    /// Splits along the cut with circuit `delta` into the two side points and
    /// the shared normalized cyclic product of the circuit (1 for a tree).
    pub fn cut(&self, delta: &[String]) -> Result<(DeformationPoint, DeformationPoint, Scalar)> {
        let mut key: Vec<String> = delta.to_vec();
        key.sort();
        let k = self
            .cuts
            .iter()
            .position(|c| {
                let mut d = c.delta.clone();
                d.sort();
                d == key
            })
            .ok_or(Error::NotEssential)?;
        let side = |start: usize| {
            let mut seen = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(a) = queue.pop_front() {
                for (j, c) in self.cuts.iter().enumerate() {
                    if j == k {
                        continue;
                    }
                    for (x, y) in [(c.left, c.right), (c.right, c.left)] {
                        if x == a && seen.insert(y) {
                            queue.push_back(y);
                        }
                    }
                }
            }
            seen
        };
        let c = &self.cuts[k];
        let (ls, rs) = (side(c.left), side(c.right));
        let root = |set: &BTreeSet<usize>, end: usize| if set.contains(&0) { 0 } else { end };
        let left = self.subtree(&ls, root(&ls, c.left));
        let right = self.subtree(&rs, root(&rs, c.right));
        let m = &self.leaves[c.left].matrix;
        let idx: Vec<usize> = c.delta.iter().map(|s| m.index_of(s)).collect::<Result<_>>()?;
        let block = m.restrict(&idx);
        let cycles = crate::cartan::simple_cycles(&block.adjacency())?;
        let ratio = match cycles.first() {
            Some(cyc) => block.normalized_cyclic_product(cyc)?.ratio,
            None => Scalar::one(),
        };
        Ok((left, right, ratio))
    }

    /// Leaf coordinates followed by the bending values.
    pub fn coordinates(&self, chart: &Chart) -> Result<Vec<Vec<Scalar>>> {
        let mut out = Vec::new();
        for (leaf, cc) in self.leaves.iter().zip(&chart.leaves) {
            let idx: Vec<usize> = cc.names().iter().map(|n| leaf.matrix.index_of(n)).collect::<Result<_>>()?;
            out.push(cc.coordinates_of(&leaf.matrix.restrict(&idx))?);
        }
        out.push(self.e.clone());
        Ok(out)
    }
}

impl Chart {
    /// Point with per-leaf coordinate values and per-cut bending values.
    pub fn point(&self, values: &[Vec<Scalar>], e: &[Scalar]) -> Result<DeformationPoint> {
        if values.len() != self.leaves.len() || e.len() != self.tree.cuts.len() {
            return Err(Error::ConstraintViolated("wrong number of coordinate blocks".into()));
        }
        let mut leaves = Vec::new();
        for ((cc, v), leaf) in self.leaves.iter().zip(values).zip(&self.tree.leaves) {
            let m = cc.point_from_coordinates(v)?;
            leaves.push(LeafPoint { matrix: m, truncated: leaf_truncations(leaf)? });
        }
        self.point_from_leaves(leaves, e)
    }

    pub fn point_from_leaves(&self, leaves: Vec<LeafPoint>, e: &[Scalar]) -> Result<DeformationPoint> {
        let p = DeformationPoint {
            dim: self.dim,
            leaves,
            cuts: self
                .tree
                .cuts
                .iter()
                .map(|c| CutLink { delta: c.delta.clone(), left: c.left, right: c.right })
                .collect(),
            e: e.to_vec(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Bending coordinates contributed by the cuts.
    pub fn bending_dimension(&self) -> usize {
        self.tree.cuts.len()
    }
}

pub fn leaf_truncations(leaf: &crate::polytope::Leaf) -> Result<Vec<Vec<String>>> {
    leaf.cut_facets.iter().chain(&leaf.free_truncations).map(|t| leaf.truncated_vertex(t)).collect()
}

/// Ratio pairs `(C(A), C̄(A))` per relevant circuit of a matrix.
pub fn circuit_values(a: &CartanMatrix) -> Result<BTreeMap<Circuit, (Scalar, Scalar)>> {
    let mut out = BTreeMap::new();
    for c in a.relevant_circuits()? {
        out.insert(c.clone(), (a.cyclic_product(&c), a.cyclic_product(&c.reversed())));
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::coxeter::{cycle, names, triangle};
    use crate::polytope::tests::{glued_pans, pan};
    use crate::scalar::{ratio, AlgScalar};
    use Label::Finite as L;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::rational(ratio(n, d))
    }

    fn simplex3(edges: &[(usize, usize, u32)]) -> CoxeterMatrix {
        let mut c = CoxeterMatrix::commuting(names(4));
        for &(i, j, m) in edges {
            c.set(i, j, L(m));
        }
        c
    }

    /// Triangle matrix with parameter x on the (2,3) pair, written out entry by entry.
    fn x_triangle(m12: u32, m13: u32, m23: u32, x: &Scalar) -> CartanMatrix {
        let mut a = cosine_matrix(&triangle(m12, m13, m23)).unwrap();
        a.a[1][2] = &a.a[1][2] * x;
        a.a[2][1] = &a.a[2][1] * &x.inv().unwrap();
        a
    }

    #[test]
    fn triangle_charts() {
        let c = CellChart::simplex(&triangle(3, 4, 6)).unwrap();
        assert_eq!((c.tag, c.dimension), (ChartTag::Triangle, 1));
        let r = CellChart::simplex(&triangle(2, 3, 7)).unwrap();
        assert_eq!((r.tag, r.dimension), (ChartTag::RightTriangle, 0));
    }

    #[test]
    fn triangle_ratio_is_x_squared_on_123() {
        let chart = CellChart::simplex(&triangle(3, 4, 6)).unwrap();
        for k in -5i32..=5 {
            let x = if k >= 0 { q(1 << k, 1) } else { q(1, 1 << (-k)) };
            let a = x_triangle(3, 4, 6, &x);
            assert_eq!(a.canonical_gauge().unwrap(), a);
            let fwd = a.normalized_cyclic_product(&Circuit(vec![0, 1, 2])).unwrap();
            let bwd = a.normalized_cyclic_product(&Circuit(vec![2, 1, 0])).unwrap();
            assert_eq!(fwd.ratio, &x * &x);
            assert_eq!(bwd.ratio, (&x * &x).inv().unwrap());
            let coords = chart.coordinates_of(&a).unwrap();
            assert_eq!(coords, vec![&x * &x]);
            let back = chart.point_from_coordinates(&coords);
            // (3,4,6) is large, so every ratio is loxodromic
            assert_eq!(back.unwrap(), a);
        }
    }

    #[test]
    fn simplex_cases() {
        let all = simplex3(&[(0, 1, 3), (0, 2, 3), (0, 3, 3), (1, 2, 3), (1, 3, 3), (2, 3, 4)]);
        let c1 = CellChart::simplex(&all).unwrap();
        assert_eq!((c1.tag, c1.dimension, c1.coordinates.len()), (ChartTag::Case1, 3, 4));
        assert_eq!(c1.constraints, vec![vec![1, 1, 1, 1]]);
        let c2 = CellChart::simplex(&simplex3(&[(0, 1, 3), (0, 2, 3), (0, 3, 3), (1, 2, 3), (1, 3, 3)])).unwrap();
        assert_eq!((c2.tag, c2.dimension, c2.coordinates.len()), (ChartTag::Case2, 2, 2));
        let pan = CellChart::simplex(&simplex3(&[(0, 1, 3), (1, 2, 3), (0, 2, 4), (2, 3, 3)])).unwrap();
        assert_eq!((pan.tag, pan.dimension), (ChartTag::Pan, 1));
        let cyc = CellChart::simplex(&cycle(&[3, 3, 3, 4])).unwrap();
        assert_eq!((cyc.tag, cyc.dimension), (ChartTag::Cycle, 1));
        let tree = CellChart::simplex(&simplex3(&[(0, 1, 3), (1, 2, 5), (2, 3, 3)])).unwrap();
        assert_eq!((tree.tag, tree.dimension), (ChartTag::Tree, 0));
    }

    #[test]
    fn case1_constraint() {
        let all = simplex3(&[(0, 1, 3), (0, 2, 3), (0, 3, 3), (1, 2, 3), (1, 3, 3), (2, 3, 4)]);
        let c = CellChart::simplex(&all).unwrap();
        let ok = c.point_from_coordinates(&[q(2, 1), q(3, 1), q(1, 2), q(1, 3)]).unwrap();
        let coords = c.coordinates_of(&ok).unwrap();
        assert_eq!(coords, vec![q(2, 1), q(3, 1), q(1, 2), q(1, 3)]);
        let prod = coords.iter().fold(Scalar::one(), |a, b| &a * b);
        assert_eq!(prod, Scalar::one());
        assert!(matches!(
            c.point_from_coordinates(&[q(2, 1), q(3, 1), q(1, 2), q(1, 2)]),
            Err(Error::ConstraintViolated(_))
        ));
        let sym = c.point_from_coordinates(&vec![Scalar::one(); 4]).unwrap();
        assert_eq!(sym, cosine_matrix(&all).unwrap());
    }

    #[test]
    fn truncatability_cases() {
        let a = cosine_matrix(&simplex3(&[(0, 1, 3), (1, 2, 3), (0, 2, 4), (2, 3, 3)])).unwrap();
        let v: Vec<String> = names(3);
        assert!(truncatability(&a, &v).unwrap().truncatable);
        let sph = vec!["F1".to_string(), "F2".to_string(), "F4".to_string()];
        assert!(!truncatability(&a, &sph).unwrap().truncatable);
        let at = simplex3(&[(0, 1, 3), (1, 2, 3), (0, 2, 3), (2, 3, 3)]);
        let sym = cosine_matrix(&at).unwrap();
        let t = truncatability(&sym, &v).unwrap();
        assert!(!t.truncatable && t.reason.contains("vanishing"));
        let chart = CellChart::simplex(&at).unwrap();
        let bent = chart.point_from_coordinates(&[q(4, 1)]).unwrap();
        assert!(truncatability(&bent, &v).unwrap().truncatable);
    }

    #[test]
    fn glued_chart_dimension() {
        let g = glued_pans();
        let chart = cell_chart(&g).unwrap();
        assert_eq!(chart.dimension, g.e_plus() - g.dim);
        assert_eq!(chart.identified, vec![0]);
    }

    pub(crate) fn glued_point(e: Scalar) -> DeformationPoint {
        let g = glued_pans();
        let chart = cell_chart(&g).unwrap();
        // pan leaf: coordinate is the (3,3,4) triangle, M_C = 2
        chart.point(&[vec![q(2, 1)], vec![q(2, 1)]], &[e]).unwrap()
    }

    #[test]
    fn assembled_matrix_restricts_to_leaves() {
        let p = glued_point(q(3, 2));
        let asm = p.assemble().unwrap();
        assert_eq!(asm.matrix.names, vec!["F1", "F2", "F3", "F4", "F4'"]);
        for leaf in &p.leaves {
            let idx: Vec<usize> = leaf.matrix.names.iter().map(|n| asm.matrix.index_of(n).unwrap()).collect();
            assert!(asm.matrix.restrict(&idx).equivalent(&leaf.matrix).unwrap());
        }
        assert!(asm.matrix.is_exact());
        let bd = p.bending_data(0).unwrap();
        bd.check().unwrap();
        let rep = asm.matrix.perron_type().unwrap();
        assert_eq!((rep.kind, rep.rank), (PerronType::Negative, 4));
    }

    #[test]
    fn probe_formula_matches_assembly() {
        for e in [q(1, 3), q(1, 1), q(5, 2), q(7, 1)] {
            let p = glued_point(e.clone());
            let bd = p.bending_data(0).unwrap();
            let a = p.assemble().unwrap().matrix;
            assert_eq!(a.cyclic_product(&bd.probe), bd.numerator(&e));
            assert_eq!(a.cyclic_product(&bd.probe.reversed()), bd.denominator(&e).unwrap());
        }
    }

    #[test]
    fn bending_cocycle_and_cut_invariance() {
        let p = glued_point(Scalar::one());
        assert_eq!(p.bend(0, &Scalar::one()).unwrap(), p);
        let twice = p.bend(0, &q(2, 1)).unwrap().bend(0, &q(3, 1)).unwrap();
        assert_eq!(twice, p.bend(0, &q(6, 1)).unwrap());
        let delta = p.cuts[0].delta.clone();
        let (l0, r0, c0) = p.cut(&delta).unwrap();
        let (l1, r1, c1) = twice.cut(&delta).unwrap();
        assert_eq!((l0, r0, c0), (l1, r1, c1));
        let a0 = p.assemble().unwrap().matrix;
        let a1 = twice.assemble().unwrap().matrix;
        for side in [vec![0, 1, 2, 3], vec![0, 1, 2, 4]] {
            assert!(a0.restrict(&side).equivalent(&a1.restrict(&side)).unwrap());
        }
        assert!(!a0.equivalent(&a1).unwrap());
        assert!(matches!(p.bend(0, &Scalar::zero()), Err(Error::NonPositiveBend)));
    }

    #[test]
    fn mismatched_circuit_values_rejected() {
        let g = glued_pans();
        let chart = cell_chart(&g).unwrap();
        let r = chart.point(&[vec![q(2, 1)], vec![q(3, 1)]], &[Scalar::one()]);
        assert!(matches!(r, Err(Error::ConstraintViolated(_))));
    }

    #[test]
    fn cosine_exactness() {
        let a = CellChart::simplex(&pan().coxeter()).unwrap().cosine().unwrap();
        assert_eq!(a.a[0][2], Scalar::Exact(-AlgScalar::sqrt2()));
    }
}
