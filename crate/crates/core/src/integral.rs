//! Integrality of points and enumeration of the integral points of a
//! deformation space.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::cartan::{fundamental_cycle, spanning_tree, CartanMatrix, Circuit};
use crate::coxeter::{GroupClass, Label};
use crate::deform::{
    cell_chart, check_loxodromic, leaf_truncations, truncatability, BendingFiberData, CellChart, Chart, CutLink,
    DeformationPoint, LeafPoint,
};
use crate::error::{Error, Result};
use crate::polytope::{CircuitKind, LabeledPolytope};
use crate::scalar::{cos_square_times_four, AlgScalar, Rational, Scalar, Sign};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertEntry {
    pub circuit: Vec<String>,
    pub value: BigInt,
}

/// Integer values of every edge product and every directed simple cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralCertificate {
    pub entries: Vec<CertEntry>,
    pub note: String,
}

const NOTE: &str = "closed walks decompose into edge pairs and directed simple cycles";

impl IntegralCertificate {
    /// Recomputes every entry on `a`.
    pub fn verify(&self, a: &CartanMatrix) -> bool {
        self.entries.iter().all(|e| {
            let Ok(idx) = e.circuit.iter().map(|n| a.index_of(n)).collect::<Result<Vec<_>>>() else {
                return false;
            };
            let v = if idx.len() == 2 {
                a.edge_product(idx[0], idx[1])
            } else {
                a.cyclic_product(&Circuit(idx))
            };
            matches!(v.is_integer(), Ok(Some(z)) if z == e.value)
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Integrality {
    Integral(IntegralCertificate),
    Fails { circuit: Vec<String>, value: Scalar },
}

impl Integrality {
    pub fn certificate(self) -> Option<IntegralCertificate> {
        match self {
            Integrality::Integral(c) => Some(c),
            Integrality::Fails { .. } => None,
        }
    }
}

fn require_large_irreducible(a: &CartanMatrix) -> Result<()> {
    let cox = a.coxeter();
    if !cox.is_irreducible() {
        return Err(Error::NotLargeIrreducible("reducible".into()));
    }
    match cox.classify(true)? {
        GroupClass::Large => Ok(()),
        c => Err(Error::NotLargeIrreducible(format!("{c}"))),
    }
}

/// Exact integrality of a Cartan matrix through its edge products and
/// directed simple-cycle products.
pub fn integral_check_matrix(a: &CartanMatrix) -> Result<Integrality> {
    if !a.is_exact() {
        return Err(Error::ApproxData);
    }
    require_large_irreducible(a)?;
    let mut entries = Vec::new();
    let n = a.dim();
    let mut test = |c: Vec<usize>, v: Scalar| -> Result<Option<Integrality>> {
        let names: Vec<String> = c.iter().map(|&i| a.names[i].clone()).collect();
        match v.is_integer()? {
            Some(z) => {
                entries.push(CertEntry { circuit: names, value: z });
                Ok(None)
            }
            None => Ok(Some(Integrality::Fails { circuit: names, value: v })),
        }
    };
    for i in 0..n {
        for j in i + 1..n {
            if a.adjacent(i, j) {
                if let Some(f) = test(vec![i, j], a.edge_product(i, j))? {
                    return Ok(f);
                }
            }
        }
    }
    for c in a.directed_cycles()? {
        let v = a.cyclic_product(&c);
        if let Some(f) = test(c.0, v)? {
            return Ok(f);
        }
    }
    Ok(Integrality::Integral(IntegralCertificate { entries, note: NOTE.into() }))
}

/// Integrality of the assembled Cartan matrix of a point.
pub fn integral_check(pt: &DeformationPoint) -> Result<Integrality> {
    for leaf in &pt.leaves {
        require_large_irreducible(&leaf.matrix)?;
    }
    integral_check_matrix(&pt.assemble()?.matrix)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    pub reason: Option<String>,
}

/// Every ridge label must be 2, 3, 4 or 6.
pub fn integral_feasible(g: &LabeledPolytope) -> Feasibility {
    for (&(i, j), &l) in &g.labels {
        if !g.adjacent(i, j) {
            continue;
        }
        let ok = matches!(l, Label::Finite(2 | 3 | 4 | 6));
        if !ok {
            return Feasibility {
                feasible: false,
                reason: Some(format!("ridge {}{} has label {l}", g.facets[i], g.facets[j])),
            };
        }
    }
    Feasibility { feasible: true, reason: None }
}

/// All `(C, C̄)` with `C·C̄ = M_C`, both of sign `(-1)^k`.
pub fn divisor_pairs(edge_products: &[i64], k: usize) -> Result<Vec<(i64, i64)>> {
    let mut m: i64 = 1;
    for &p in edge_products {
        if p < 1 {
            return Err(Error::BadEdgeProduct(p.to_string()));
        }
        m = m.checked_mul(p).ok_or_else(|| Error::BadEdgeProduct(p.to_string()))?;
    }
    let s = if k % 2 == 0 { 1 } else { -1 };
    let small: Vec<i64> = (1..).take_while(|t| t * t <= m).filter(|t| m % t == 0).collect();
    let large = small.iter().rev().map(|t| m / t).filter(|t| t * t != m);
    Ok(small.iter().copied().chain(large).map(|t| (s * t, s * (m / t))).collect())
}

fn exact_int(s: &Scalar) -> Result<i64> {
    match s.is_integer()? {
        Some(z) => z.to_i64().ok_or_else(|| Error::BadEdgeProduct(z.to_string())),
        None => Err(Error::BadEdgeProduct(s.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralPoint {
    pub point: DeformationPoint,
    pub certificate: IntegralCertificate,
    pub provenance: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeafSolution {
    pub leaf: LeafPoint,
    pub certificate: IntegralCertificate,
    pub provenance: Vec<String>,
}

/// Integral points of one simplex leaf with the given truncated vertices.
pub fn enumerate_leaf(cc: &CellChart, truncated: &[Vec<String>]) -> Result<Vec<LeafSolution>> {
    if cc.cox.m.iter().flatten().any(|l| !matches!(l, Label::Finite(1 | 2 | 3 | 4 | 6))) {
        return Ok(Vec::new());
    }
    let base = cc.cosine()?;
    let mut choices: Vec<Vec<(i64, i64)>> = Vec::new();
    for c in &cc.coordinates {
        let prods = c.steps().map(|(i, j)| exact_int(&base.edge_product(i, j))).collect::<Result<Vec<_>>>()?;
        choices.push(divisor_pairs(&prods, c.len())?);
    }
    let mut out = Vec::new();
    let mut pick = vec![0usize; choices.len()];
    loop {
        let pairs: Vec<(i64, i64)> = pick.iter().zip(&choices).map(|(&k, ch)| ch[k]).collect();
        let values: Vec<Scalar> =
            pairs.iter().map(|&(c, cb)| Scalar::rational(Rational::new(c.into(), cb.into()))).collect();
        if let Some(sol) = leaf_candidate(cc, truncated, &values)? {
            let provenance = cc
                .coordinates
                .iter()
                .zip(&pairs)
                .map(|(c, (x, y))| format!("{}: ({x}, {y})", c.names(cc.names()).join("")))
                .collect();
            out.push(LeafSolution { provenance, ..sol });
        }
        // odometer
        let mut k = 0;
        loop {
            if k == pick.len() {
                return Ok(out);
            }
            pick[k] += 1;
            if pick[k] < choices[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

fn leaf_candidate(cc: &CellChart, truncated: &[Vec<String>], values: &[Scalar]) -> Result<Option<LeafSolution>> {
    let m = match cc.point_from_coordinates(values) {
        Ok(m) => m,
        Err(Error::ConstraintViolated(_) | Error::NotLoxodromic(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    for v in truncated {
        if !truncatability(&m, v)?.truncatable {
            return Ok(None);
        }
    }
    Ok(integral_check_matrix(&m)?.certificate().map(|certificate| LeafSolution {
        leaf: LeafPoint { matrix: m, truncated: truncated.to_vec() },
        certificate,
        provenance: Vec::new(),
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shortcut {
    AffineTruncatedVertex(Vec<String>),
    AffineEssentialCircuit(Vec<String>),
}

impl std::fmt::Display for Shortcut {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shortcut::AffineTruncatedVertex(v) => write!(f, "truncated vertex {} has an affine link of type A", v.join(",")),
            Shortcut::AffineEssentialCircuit(d) => {
                write!(f, "essential circuit {} generates an affine group of type A", d.join(","))
            }
        }
    }
}

/// Sound reasons why no integral point can exist.
pub fn nonexistence_shortcuts(g: &LabeledPolytope) -> Result<Option<Shortcut>> {
    if g.truncation_polytope {
        for c in g.prismatic_circuits()? {
            if c.kind == CircuitKind::Essential && c.a_tilde {
                return Ok(Some(Shortcut::AffineEssentialCircuit(c.names)));
            }
        }
    }
    let cox = g.coxeter();
    for t in (0..g.facet_count()).filter(|&i| g.truncation[i]) {
        let link = g.neighbors(t);
        if cox.restrict(&link).is_a_tilde() {
            return Ok(Some(Shortcut::AffineTruncatedVertex(g.names_of(&link))));
        }
    }
    Ok(None)
}

/// Bending values on one fiber where both probe products are integers.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberBand {
    /// Smallest and largest bending value that can carry integer probe products.
    pub lo: Scalar,
    pub hi: Scalar,
    /// `(n, E, D)`: probe product, bending value, reversed probe product.
    pub candidates: Vec<(BigInt, Scalar, BigInt)>,
}

fn exact(s: &Scalar) -> Result<AlgScalar> {
    s.exact().cloned().ok_or(Error::ApproxData)
}

const MAX_FIBER_STEPS: usize = 1_000_000;

pub fn fiber_candidates(fd: &BendingFiberData) -> Result<FiberBand> {
    fd.check()?;
    let (k1, x1, y1) = (exact(&fd.k1)?, exact(&fd.x1)?, exact(&fd.y1)?);
    let (k2, x2, y2) = (exact(&fd.k2)?, exact(&fd.x2)?, exact(&fd.y2)?);
    let s1 = k1.sign();
    let s2 = k2.sign();
    let abs = |v: &AlgScalar| if v.sign() == Sign::Negative { -v.clone() } else { v.clone() };
    let (a1, a2) = (abs(&k1), abs(&k2));
    // |N| runs from |K1| x1 upwards, |D| from infinity down to |K2| x2
    let start = (&a1 * &x1).floor() + BigInt::one();
    let floor_d = (&a2 * &x2).floor() + BigInt::one();
    let g = AlgScalar::from_rational(Rational::from_integer(floor_d.clone()));
    let e_of = |m: &BigInt| -> Result<AlgScalar> {
        let mq = AlgScalar::from_rational(Rational::from_integer(m.clone()));
        (&mq.div(&a1)? - &x1).div(&y1)
    };
    let lo = e_of(&start)?;
    let hi = (&a2 * &y2).div(&(&g - &(&a2 * &x2)))?;
    let mut candidates = Vec::new();
    let mut m = start;
    for _ in 0..MAX_FIBER_STEPS {
        let e = e_of(&m)?;
        let d_abs = &a2 * &(&x2 + &y2.div(&e)?);
        if d_abs.cmp_value(&g) == std::cmp::Ordering::Less {
            return Ok(FiberBand { lo: Scalar::Exact(lo), hi: Scalar::Exact(hi), candidates });
        }
        if let Some(dz) = d_abs.is_integer() {
            let n = if s1 == Sign::Negative { -m.clone() } else { m.clone() };
            let d = if s2 == Sign::Negative { -dz } else { dz };
            candidates.push((n, Scalar::Exact(e), d));
        }
        m += 1;
    }
    Err(Error::Inconclusive(format!("fiber sweep exceeded {MAX_FIBER_STEPS} steps")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberSweep {
    pub band: FiberBand,
    pub survivors: Vec<(Scalar, IntegralCertificate, BigInt)>,
}

/// Integral points on the fiber of cut `k` through `pt` (whose own value at
/// `k` is ignored).
pub fn fiber_sweep(pt: &DeformationPoint, k: usize) -> Result<FiberSweep> {
    let mut probe = pt.clone();
    probe.e[k] = Scalar::one();
    let fd = probe.bending_data(k)?;
    let band = fiber_candidates(&fd)?;
    let mut survivors = Vec::new();
    for (n, e, _) in &band.candidates {
        let mut q = pt.clone();
        q.e[k] = e.clone();
        if let Some(cert) = integral_check(&q)?.certificate() {
            survivors.push((e.clone(), cert, n.clone()));
        }
    }
    Ok(FiberSweep { band, survivors })
}

/// Partial solution on a connected set of leaves, indexed as in the tree.
#[derive(Clone, Debug)]
struct Partial {
    leaves: BTreeMap<usize, LeafPoint>,
    e: BTreeMap<usize, Scalar>,
    provenance: Vec<String>,
}

fn materialize(chart: &Chart, set: &BTreeSet<usize>, root: usize, p: &Partial) -> (DeformationPoint, Vec<usize>) {
    let mut order = vec![root];
    order.extend(set.iter().copied().filter(|&i| i != root));
    let re = |i: usize| order.iter().position(|&x| x == i).unwrap();
    let mut cuts = Vec::new();
    let mut e = Vec::new();
    let mut cut_ids = Vec::new();
    for (j, c) in chart.tree.cuts.iter().enumerate() {
        if set.contains(&c.left) && set.contains(&c.right) {
            cuts.push(CutLink { delta: c.delta.clone(), left: re(c.left), right: re(c.right) });
            e.push(p.e.get(&j).cloned().unwrap_or_else(Scalar::one));
            cut_ids.push(j);
        }
    }
    let leaves = order.iter().map(|i| p.leaves[i].clone()).collect();
    (DeformationPoint { dim: chart.dim, leaves, cuts, e }, cut_ids)
}

fn side(chart: &Chart, set: &BTreeSet<usize>, skip: usize, start: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(a) = stack.pop() {
        for (j, c) in chart.tree.cuts.iter().enumerate() {
            if j == skip || !set.contains(&c.left) || !set.contains(&c.right) {
                continue;
            }
            for (x, y) in [(c.left, c.right), (c.right, c.left)] {
                if x == a && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
    }
    seen
}

fn recurse(
    chart: &Chart,
    leaf_sols: &[Vec<LeafSolution>],
    set: &BTreeSet<usize>,
    root: usize,
) -> Result<Vec<Partial>> {
    if set.len() == 1 {
        return Ok(leaf_sols[root]
            .iter()
            .map(|s| Partial {
                leaves: BTreeMap::from([(root, s.leaf.clone())]),
                e: BTreeMap::new(),
                provenance: s.provenance.iter().map(|p| format!("leaf {root} {p}")).collect(),
            })
            .collect());
    }
    // outermost split first: cuts are recorded innermost first
    let k = (0..chart.tree.cuts.len())
        .rev()
        .find(|&j| set.contains(&chart.tree.cuts[j].left) && set.contains(&chart.tree.cuts[j].right))
        .expect("connected set with two leaves has a cut");
    let c = &chart.tree.cuts[k];
    let sa = side(chart, set, k, root);
    let (near, far) = if sa.contains(&c.left) { (c.left, c.right) } else { (c.right, c.left) };
    let sb = side(chart, set, k, far);
    let (pa, pb) = rayon::join(|| recurse(chart, leaf_sols, &sa, root), || recurse(chart, leaf_sols, &sb, far));
    let (pa, pb) = (pa?, pb?);
    let pairs: Vec<(&Partial, &Partial)> = pa.iter().flat_map(|a| pb.iter().map(move |b| (a, b))).collect();
    let results: Vec<Result<Vec<Partial>>> = pairs
        .par_iter()
        .map(|(a, b)| {
            let la = &a.leaves[&near].matrix;
            let lb = &b.leaves[&far].matrix;
            let ia: Vec<usize> = c.delta.iter().map(|s| la.index_of(s)).collect::<Result<_>>()?;
            let ib: Vec<usize> = c.delta.iter().map(|s| lb.index_of(s)).collect::<Result<_>>()?;
            if !la.restrict(&ia).equivalent(&lb.restrict(&ib))? {
                return Ok(Vec::new());
            }
            let mut joined = Partial {
                leaves: a.leaves.clone(),
                e: a.e.clone(),
                provenance: a.provenance.iter().chain(&b.provenance).cloned().collect(),
            };
            joined.leaves.extend(b.leaves.clone());
            joined.e.extend(b.e.clone());
            joined.e.insert(k, Scalar::one());
            let (pt, ids) = materialize(chart, set, root, &joined);
            let local = ids.iter().position(|&j| j == k).unwrap();
            let sweep = fiber_sweep(&pt, local)?;
            Ok(sweep
                .survivors
                .into_iter()
                .map(|(e, _, n)| {
                    let mut p = joined.clone();
                    p.e.insert(k, e);
                    p.provenance.push(format!("cut {}: probe product {n}", c.delta.join("")));
                    p
                })
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub feasible: Feasibility,
    pub shortcut: Option<Shortcut>,
    pub points: Vec<IntegralPoint>,
}

fn sort_key(p: &IntegralPoint) -> Vec<String> {
    let mut k: Vec<String> = p.certificate.entries.iter().map(|e| format!("{}={:>8}", e.circuit.join(","), e.value)).collect();
    k.extend(p.point.e.iter().map(|e| e.to_string()));
    k
}

/// All integral points of the deformation space of `g`.
pub fn enumerate(g: &LabeledPolytope) -> Result<Enumeration> {
    if g.dim < 3 {
        return Err(Error::BadDimension(g.dim));
    }
    let feasible = integral_feasible(g);
    if !feasible.feasible {
        return Ok(Enumeration { feasible, shortcut: None, points: Vec::new() });
    }
    let chart = cell_chart(g)?;
    if let Some(s) = nonexistence_shortcuts(g)? {
        return Ok(Enumeration { feasible, shortcut: Some(s), points: Vec::new() });
    }
    let leaf_sols: Vec<Vec<LeafSolution>> = chart
        .leaves
        .par_iter()
        .zip(&chart.tree.leaves)
        .map(|(cc, leaf)| enumerate_leaf(cc, &leaf_truncations(leaf)?))
        .collect::<Result<_>>()?;
    let all: BTreeSet<usize> = (0..chart.leaves.len()).collect();
    let partials = recurse(&chart, &leaf_sols, &all, 0)?;
    let mut points = Vec::new();
    for p in partials {
        let (point, _) = materialize(&chart, &all, 0, &p);
        let certificate = integral_check(&point)?
            .certificate()
            .ok_or_else(|| Error::Inconclusive("assembled point lost integrality".into()))?;
        points.push(IntegralPoint { point, certificate, provenance: p.provenance });
    }
    points.sort_by_cached_key(sort_key);
    Ok(Enumeration { feasible, shortcut: None, points })
}

/// Label-preserving combinatorial symmetries of `g`, as facet permutations.
pub fn symmetries(g: &LabeledPolytope) -> Vec<Vec<usize>> {
    let n = g.facet_count();
    let mut out = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        g: &LabeledPolytope,
        k: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = g.facet_count();
        if k == n {
            let mapped: BTreeSet<Vec<usize>> = g
                .vertices
                .iter()
                .map(|v| {
                    let mut w: Vec<usize> = v.iter().map(|&f| perm[f]).collect();
                    w.sort();
                    w
                })
                .collect();
            if mapped == g.vertices {
                out.push(perm.clone());
            }
            return;
        }
        for t in 0..n {
            if used[t] || g.truncation[t] != g.truncation[k] {
                continue;
            }
            if (0..k).any(|j| g.label(j, k) != g.label(perm[j], t)) {
                continue;
            }
            perm[k] = t;
            used[t] = true;
            go(g, k + 1, perm, used, out);
            used[t] = false;
        }
        perm[k] = usize::MAX;
    }
    go(g, 0, &mut perm, &mut used, &mut out);
    out
}

/// Number of orbits of `points` under the symmetries of `g`.
pub fn quotient_count(g: &LabeledPolytope, points: &[IntegralPoint]) -> Result<usize> {
    let syms = symmetries(g);
    let mats: Vec<CartanMatrix> = points.iter().map(|p| p.point.assemble().map(|a| a.matrix)).collect::<Result<_>>()?;
    let mut rep: Vec<usize> = (0..mats.len()).collect();
    for i in 0..mats.len() {
        if rep[i] != i {
            continue;
        }
        for perm in &syms {
            let names: Vec<String> = mats[i]
                .names
                .iter()
                .map(|n| g.facets[perm[g.facet_index(n).unwrap()]].clone())
                .collect();
            let moved = CartanMatrix::new(names, mats[i].a.clone());
            for j in i + 1..mats.len() {
                if rep[j] == j && same_up_to_order(&moved, &mats[j])? {
                    rep[j] = i;
                }
            }
        }
    }
    Ok(rep.iter().enumerate().filter(|(i, r)| *i == **r).count())
}

/// Equivalence after matching facet names.
pub fn same_up_to_order(a: &CartanMatrix, b: &CartanMatrix) -> Result<bool> {
    let Ok(idx) = b.names.iter().map(|n| a.index_of(n)).collect::<Result<Vec<_>>>() else {
        return Ok(false);
    };
    let ar = a.restrict(&idx);
    if ar.dim() != a.dim() {
        return Ok(false);
    }
    let ar = CartanMatrix::new(b.names.clone(), ar.a);
    ar.equivalent(b)
}

/// Recursive enumeration against the direct search.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleComparison {
    pub bound: i64,
    pub recursive: usize,
    pub direct: usize,
    /// Points of either side without a partner with an identical certificate.
    pub unmatched: Vec<String>,
}

impl OracleComparison {
    pub fn agrees(&self) -> bool {
        self.recursive == self.direct && self.unmatched.is_empty()
    }
}

/// Runs the direct search with bound `max(min_bound, largest infinite-pair
/// product among the enumerated points)` and pairs up the two point sets.
pub fn compare_with_direct(g: &LabeledPolytope, en: &Enumeration, min_bound: i64) -> Result<OracleComparison> {
    let mut recursive = Vec::new();
    let mut bound = min_bound;
    for p in &en.points {
        let a = p.point.assemble()?.matrix;
        bound = bound.max(max_infinite_product(g, &a)?.to_i64().unwrap_or(i64::MAX));
        recursive.push((a, p.certificate.clone()));
    }
    let direct: Vec<(CartanMatrix, IntegralCertificate)> = direct_search(g, bound)?
        .into_iter()
        .map(|m| {
            let c = integral_check_matrix(&m)?.certificate().ok_or(Error::ApproxData)?;
            Ok((m, c))
        })
        .collect::<Result<_>>()?;
    let same = |(a, ca): &(CartanMatrix, IntegralCertificate), (b, cb): &(CartanMatrix, IntegralCertificate)| {
        Ok::<bool, Error>(
            same_up_to_order(a, b)? && ca.entries.len() == cb.entries.len() && ca.verify(b) && cb.verify(a),
        )
    };
    let mut unmatched = Vec::new();
    for (k, r) in recursive.iter().enumerate() {
        let hits = direct.iter().map(|d| same(r, d)).collect::<Result<Vec<_>>>()?.into_iter().filter(|&h| h).count();
        if hits != 1 {
            unmatched.push(format!("recursive point {k}: {hits} direct partners"));
        }
    }
    for (k, d) in direct.iter().enumerate() {
        if !recursive.iter().map(|r| same(r, d)).collect::<Result<Vec<_>>>()?.into_iter().any(|h| h) {
            unmatched.push(format!("direct point {k}: no recursive partner"));
        }
    }
    Ok(OracleComparison { bound, recursive: recursive.len(), direct: direct.len(), unmatched })
}

/// Integral Cartan matrices on the non-truncation facets of `g` found by a
/// direct search over the whole diagram, without splitting: infinite pairs
/// get products in `4..=bound`, fundamental cycles get divisor pairs, and the
/// matrix is built in the rational tree gauge (tree entries `-1`, `-p`).
/// Kept when loxodromic, integral, and nonzero on every truncated affine
/// link. Partial assignments are pruned as soon as a principal minor on
/// `d+2` facets is fully known and nonzero.
pub fn direct_search(g: &LabeledPolytope, bound: i64) -> Result<Vec<CartanMatrix>> {
    let core = g.core();
    let cox = g.coxeter().restrict(&core);
    let n = core.len();
    let d = g.dim;
    // an irrational edge product rules out integrality outright
    if cox.m.iter().flatten().any(|&l| matches!(l, Label::Finite(m) if m > 2 && cos_square_times_four(m).is_none())) {
        return Ok(Vec::new());
    }
    let adj: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| i != j && cox.m[i][j] != Label::Finite(2)).collect()).collect();
    // a tree of finite ridges keeps each infinite pair on its own cycle
    let finite_adj: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| adj[i][j] && cox.m[i][j] != Label::Inf).collect()).collect();
    let (tree, mut rest) = match spanning_tree(&finite_adj) {
        Ok(t) => t,
        Err(_) => spanning_tree(&adj)?,
    };
    for i in 0..n {
        for j in i + 1..n {
            if adj[i][j] && !tree.iter().chain(&rest).any(|&e| key_pair(e.0, e.1) == (i, j)) {
                rest.push((i, j));
            }
        }
    }
    let cycles: Vec<Circuit> = rest.iter().map(|&(i, j)| fundamental_cycle(n, &tree, i, j)).collect();
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        for &(a, b) in &tree {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    stack.push(y);
                }
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = tree.iter().chain(&rest).map(|&(i, j)| key_pair(i, j)).collect();
    edges.sort_by_key(|&(i, j)| (j, i));
    let inf: Vec<(usize, usize)> = edges.iter().copied().filter(|&(i, j)| cox.m[i][j] == Label::Inf).collect();
    // decision order: infinite products by largest facet, each cycle as soon as its products are known
    #[derive(Clone, Copy)]
    enum Step {
        Product(usize),
        Cycle(usize),
    }
    let mut steps = Vec::new();
    let mut decided: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut placed = vec![false; cycles.len()];
    let ready = |c: &Circuit, decided: &BTreeSet<(usize, usize)>| {
        c.steps().all(|(i, j)| cox.m[i][j] != Label::Inf || decided.contains(&key_pair(i, j)))
    };
    for k in 0..cycles.len() {
        if ready(&cycles[k], &decided) {
            steps.push(Step::Cycle(k));
            placed[k] = true;
        }
    }
    for (k, &e) in inf.iter().enumerate() {
        steps.push(Step::Product(k));
        decided.insert(e);
        for c in 0..cycles.len() {
            if !placed[c] && ready(&cycles[c], &decided) {
                steps.push(Step::Cycle(c));
                placed[c] = true;
            }
        }
    }
    // step index after which each entry is known (0 = from the start)
    let mut known_at = vec![vec![0usize; n]; n];
    for (k, st) in steps.iter().enumerate() {
        match *st {
            Step::Product(e) => {
                let (i, j) = inf[e];
                if tree.iter().any(|&t| key_pair(t.0, t.1) == (i, j)) {
                    known_at[i][j] = k + 1;
                    known_at[j][i] = k + 1;
                }
            }
            Step::Cycle(c) => {
                let (i, j) = rest[c];
                known_at[i][j] = k + 1;
                known_at[j][i] = k + 1;
            }
        }
    }
    let mut minors_at: Vec<Vec<Vec<usize>>> = vec![Vec::new(); steps.len() + 1];
    if n > d + 1 {
        let all: Vec<usize> = (0..n).collect();
        for t in crate::polytope::subsets(&all, d + 2) {
            let at = t.iter().flat_map(|&i| t.iter().map(move |&j| (i, j))).map(|(i, j)| known_at[i][j]).max().unwrap();
            minors_at[at].push(t);
        }
    }
    // simple cycles, checked for integral products as soon as they are known
    let mut cycles_at: Vec<Vec<Circuit>> = vec![Vec::new(); steps.len() + 1];
    for c in crate::cartan::simple_cycles(&adj)? {
        let at = c.steps().map(|(i, j)| known_at[i][j]).max().unwrap_or(0);
        cycles_at[at].push(c);
    }
    // affine links of truncated vertices, as cycles in core indices
    let mut affine_links = Vec::new();
    for t in (0..g.facet_count()).filter(|&i| g.truncation[i]) {
        let link: Vec<usize> = g.neighbors(t).iter().map(|f| core.iter().position(|c| c == f).unwrap()).collect();
        let sub = cox.restrict(&link);
        if sub.is_a_tilde() {
            let ladj: Vec<Vec<bool>> = link.iter().map(|&i| link.iter().map(|&j| adj[i][j]).collect()).collect();
            let c = crate::cartan::simple_cycles(&ladj)?.remove(0);
            affine_links.push(Circuit(c.0.iter().map(|&k| link[k]).collect()));
        }
    }
    let fixed_product = |i: usize, j: usize| -> Result<i64> {
        match cox.m[i][j] {
            Label::Finite(m) => cos_square_times_four(m).ok_or_else(|| Error::BadEdgeProduct(format!("label {m}"))),
            Label::Inf => unreachable!(),
        }
    };
    let q = |v: i64| Rational::from_integer(BigInt::from(v));
    let mut a: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| q(if i == j { 2 } else { 0 })).collect()).collect();
    for w in 1..n {
        let u = parent[w];
        if cox.m[u][w] != Label::Inf {
            a[u][w] = q(-1);
            a[w][u] = q(-fixed_product(u, w)?);
        }
    }
    struct Search<'a> {
        steps: &'a [Step],
        inf: &'a [(usize, usize)],
        rest: &'a [(usize, usize)],
        cycles: &'a [Circuit],
        parent: &'a [usize],
        minors_at: &'a [Vec<Vec<usize>>],
        cycles_at: &'a [Vec<Circuit>],
        affine_links: &'a [Circuit],
        names: &'a [String],
        cox: &'a crate::coxeter::CoxeterMatrix,
        bound: i64,
        d: usize,
        prods: Vec<i64>,
        found: Vec<CartanMatrix>,
    }
    impl Search<'_> {
        fn product(&self, i: usize, j: usize) -> i64 {
            let k = (i.min(j), i.max(j));
            match self.inf.iter().position(|&e| e == k) {
                Some(e) => self.prods[e],
                None => match self.cox.m[i][j] {
                    Label::Finite(m) => cos_square_times_four(m).unwrap_or(0),
                    Label::Inf => unreachable!(),
                },
            }
        }

        fn minors_vanish(&self, a: &[Vec<Rational>], k: usize) -> bool {
            self.minors_at[k].iter().all(|t| {
                let f: Vec<Vec<f64>> =
                    t.iter().map(|&i| t.iter().map(|&j| a[i][j].to_f64().unwrap_or(f64::NAN)).collect()).collect();
                if float_det_nonzero(f) {
                    return false;
                }
                let m: Vec<Vec<Rational>> = t.iter().map(|&i| t.iter().map(|&j| a[i][j].clone()).collect()).collect();
                rational_det(m).is_zero()
            })
        }

        fn go(&mut self, a: &mut Vec<Vec<Rational>>, k: usize) -> Result<()> {
            let integral = |c: &Circuit| c.steps().fold(Rational::one(), |acc, (x, y)| acc * &a[x][y]).is_integer();
            if !self.cycles_at[k].iter().all(|c| integral(c) && integral(&c.reversed())) {
                return Ok(());
            }
            if !self.minors_vanish(a, k) {
                return Ok(());
            }
            if k == self.steps.len() {
                return self.finish(a);
            }
            match self.steps[k] {
                Step::Product(e) => {
                    let (i, j) = self.inf[e];
                    let in_tree = self.parent[j] == i || self.parent[i] == j;
                    if let Some(Step::Cycle(c)) = self.steps.get(k + 1) {
                        if !in_tree && self.rest[*c] == (i, j) && self.solve_pair(a, k, e, *c)? {
                            return Ok(());
                        }
                    }
                    for p in 4..=self.bound {
                        self.prods[e] = p;
                        if in_tree {
                            let (u, w) = if self.parent[j] == i { (i, j) } else { (j, i) };
                            a[u][w] = Rational::from_integer(BigInt::from(-1));
                            a[w][u] = Rational::from_integer(BigInt::from(-p));
                        }
                        self.go(a, k + 1)?;
                    }
                    Ok(())
                }
                Step::Cycle(c) => {
                    let cyc = &self.cycles[c];
                    let ps: Vec<i64> = cyc.steps().map(|(x, y)| self.product(x, y)).collect();
                    let (i, j) = self.rest[c];
                    let (ci, cj) = (cyc.0[0], cyc.0[1]);
                    debug_assert_eq!(key_pair(ci, cj), key_pair(i, j));
                    for (cval, _) in divisor_pairs(&ps, cyc.len())? {
                        let path = cyc.steps().skip(1).fold(Rational::one(), |acc, (x, y)| acc * &a[x][y]);
                        let aij = Rational::from_integer(BigInt::from(cval)) / path;
                        a[cj][ci] = Rational::from_integer(BigInt::from(self.product(ci, cj))) / &aij;
                        a[ci][cj] = aij;
                        self.go(a, k + 1)?;
                    }
                    Ok(())
                }
            }
        }

        /// Product step `k` for a non-tree pair followed by its cycle step,
        /// when a minor completes right after: that minor is bilinear in the
        /// two cycle values, so one of them is small and fixes the other.
        /// Returns false on a degenerate minor.
        fn solve_pair(&mut self, a: &mut Vec<Vec<Rational>>, k: usize, e: usize, c: usize) -> Result<bool> {
            if self.minors_at[k + 2].is_empty() || !self.minors_at[k + 1].is_empty() || !self.cycles_at[k + 1].is_empty()
            {
                return Ok(false);
            }
            let cyc = self.cycles[c].clone();
            let (ci, cj) = (cyc.0[0], cyc.0[1]);
            let p1 = cyc.steps().skip(1).fold(Rational::one(), |acc, (x, y)| acc * &a[x][y]);
            let p2 = cyc.reversed().steps().filter(|&st| st != (cj, ci)).fold(Rational::one(), |acc, (x, y)| acc * &a[x][y]);
            let m0: i64 = cyc.steps().skip(1).map(|(x, y)| self.product(x, y)).product();
            let sign: i64 = if cyc.len() % 2 == 0 { 1 } else { -1 };
            let t = &self.minors_at[k + 2][0];
            let mut f = |x: i64, y: i64| {
                a[ci][cj] = Rational::from_integer(BigInt::from(x));
                a[cj][ci] = Rational::from_integer(BigInt::from(y));
                rational_det(t.iter().map(|&r| t.iter().map(|&s| a[r][s].clone()).collect()).collect())
            };
            let f00 = f(0, 0);
            let (f10, f01, f11) = (f(1, 0), f(0, 1), f(1, 1));
            let (al, be, ga) = (f00.clone(), &f10 - &f00, &f01 - &f00);
            let de = f11 - f10 - f01 + f00;
            // al + be x + ga y + de x y = 0 with x = C / p1, y = Cbar / p2
            let (k0, k1, k2, k3) = (al * &p1 * &p2, be * &p2, ga * &p1, de);
            // Err(()) when the other value is left free
            let cbar_of = |c: &Rational| {
                let (num, den) = (-(&k0 + &k1 * c), &k2 + &k3 * c);
                match (num.is_zero(), den.is_zero()) {
                    (true, true) => Err(()),
                    (_, false) => Ok(Some(num / den)),
                    (false, true) => Ok(None),
                }
            };
            let c_of = |cb: &Rational| {
                let (num, den) = (-(&k0 + &k2 * cb), &k1 + &k3 * cb);
                match (num.is_zero(), den.is_zero()) {
                    (true, true) => Err(()),
                    (_, false) => Ok(Some(num / den)),
                    (false, true) => Ok(None),
                }
            };
            let limit = (((self.bound as f64) * (m0 as f64)).sqrt() as i64) + 1;
            let mut found: BTreeMap<i64, i64> = BTreeMap::new();
            for t in 1..=limit {
                let small = Rational::from_integer(BigInt::from(sign * t));
                // small C, solve for Cbar; then small Cbar, solve for C
                let (Ok(cbar), Ok(cval)) = (cbar_of(&small), c_of(&small)) else { return Ok(false) };
                let pairs = [cbar.map(|cb| (small.clone(), cb)), cval.map(|cv| (cv, small.clone()))];
                for (cv, cb) in pairs.into_iter().flatten() {
                    if !cv.is_integer() || !cb.is_integer() {
                        continue;
                    }
                    let (Some(cv), Some(cb)) = (cv.to_integer().to_i64(), cb.to_integer().to_i64()) else { continue };
                    let prod = cv.checked_mul(cb).unwrap_or(0);
                    if cv * sign <= 0 || cb * sign <= 0 || prod % m0 != 0 || !(4..=self.bound).contains(&(prod / m0)) {
                        continue;
                    }
                    found.insert(cv, prod / m0);
                }
            }
            for (cv, p) in found {
                let cval = Rational::from_integer(BigInt::from(cv));
                let aij = &cval / &p1;
                self.prods[e] = p;
                a[cj][ci] = Rational::from_integer(BigInt::from(self.product(ci, cj))) / &aij;
                a[ci][cj] = aij;
                self.go(a, k + 2)?;
            }
            Ok(true)
        }

        fn finish(&mut self, a: &[Vec<Rational>]) -> Result<()> {
            let a = a.iter().map(|r| r.iter().map(|x| Scalar::rational(x.clone())).collect()).collect();
            let m = CartanMatrix::new(self.names.to_vec(), a);
            if check_loxodromic(&m, self.d).is_err() || integral_check_matrix(&m)?.certificate().is_none() {
                return Ok(());
            }
            if self.affine_links.iter().any(|c| m.cyclic_product(c) == m.cyclic_product(&c.reversed())) {
                return Ok(());
            }
            self.found.push(m);
            Ok(())
        }
    }
    let mut search = Search {
        steps: &steps,
        inf: &inf,
        rest: &rest,
        cycles: &cycles,
        parent: &parent,
        minors_at: &minors_at,
        cycles_at: &cycles_at,
        affine_links: &affine_links,
        names: &cox.names,
        cox: &cox,
        bound,
        d,
        prods: vec![4; inf.len()],
        found: Vec::new(),
    };
    search.go(&mut a, 0)?;
    Ok(search.found)
}

/// True when the determinant is certainly nonzero: its size beats the
/// rounding error, bounded through Hadamard's inequality.
fn float_det_nonzero(mut m: Vec<Vec<f64>>) -> bool {
    let n = m.len();
    let hadamard: f64 = m.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).product();
    if !hadamard.is_finite() {
        return false;
    }
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return false;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    det.abs() > 1e-8 * hadamard
}

fn rational_det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let pivot = m[c][c].clone();
        det *= &pivot;
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &pivot;
            for k in c..n {
                let v = &f * &m[c][k];
                m[r][k] -= v;
            }
        }
    }
    det
}

fn key_pair(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

/// Largest product over infinite pairs of an assembled point.
pub fn max_infinite_product(g: &LabeledPolytope, a: &CartanMatrix) -> Result<BigInt> {
    let mut best = BigInt::zero();
    for i in 0..a.dim() {
        for j in i + 1..a.dim() {
            let (fi, fj) = (g.facet_index(&a.names[i])?, g.facet_index(&a.names[j])?);
            if g.label(fi, fj) == Label::Inf {
                if let Some(z) = a.edge_product(i, j).is_integer()? {
                    if z.abs() > best {
                        best = z.abs();
                    }
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::cosine_matrix;
    use crate::coxeter::{cycle, names};
    use crate::polytope::tests::{glued_pans, pan};
    use crate::scalar::ratio;
    use Label::Finite as L;

    #[test]
    fn divisor_pair_examples() {
        assert_eq!(divisor_pairs(&[1, 1, 1], 3).unwrap(), vec![(-1, -1)]);
        assert_eq!(divisor_pairs(&[1, 2, 1], 3).unwrap(), vec![(-1, -2), (-2, -1)]);
        let p = divisor_pairs(&[2, 2, 3, 1], 4).unwrap();
        assert_eq!(p.len(), 6);
        assert!(p.iter().all(|&(a, b)| a > 0 && b > 0 && a * b == 12));
        assert!(divisor_pairs(&[0], 2).is_err());
    }

    #[test]
    fn feasibility() {
        assert!(integral_feasible(&pan()).feasible);
        let five = LabeledPolytope::simplex_from(3, &[(0, 1, L(5)), (1, 2, L(3)), (2, 3, L(3))]);
        let f = integral_feasible(&five);
        assert!(!f.feasible && f.reason.unwrap().contains('5'));
        assert!(enumerate(&five).unwrap().points.is_empty());
    }

    #[test]
    fn cycle_simplex_symmetric_point_fails() {
        let a = cosine_matrix(&cycle(&[3, 3, 3, 4])).unwrap();
        match integral_check_matrix(&a).unwrap() {
            Integrality::Fails { value, .. } => assert!(value.is_integer().unwrap().is_none()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cycle_simplex_divisor_point() {
        let chart = CellChart::simplex(&cycle(&[3, 3, 3, 4])).unwrap();
        let sols = enumerate_leaf(&chart, &[]).unwrap();
        // brute force over both divisor pairs with the Perron oracle
        let mut expect = 0;
        for (c, cb) in [(1i64, 2i64), (2, 1)] {
            let m = chart.point_from_coordinates(&[Scalar::rational(ratio(c, cb))]).unwrap();
            let cyc = m.relevant_circuits().unwrap().remove(0);
            assert_eq!(m.cyclic_product(&cyc) * m.cyclic_product(&cyc.reversed()), Scalar::int(2));
            if integral_check_matrix(&m).unwrap().certificate().is_some() {
                expect += 1;
            }
        }
        assert_eq!(sols.len(), expect);
        assert_eq!(sols.len(), 2);
        for s in &sols {
            assert!(s.certificate.verify(&s.leaf.matrix));
        }
    }

    #[test]
    fn a_tilde_circuit_certificate() {
        // affine triangle of 3s inside a pan: the forced pair is (-1, -1)
        let chart = CellChart::simplex(&crate::polytope::tests::pan_a_tilde().coxeter()).unwrap();
        let sols = enumerate_leaf(&chart, &[]).unwrap();
        assert_eq!(sols.len(), 1);
        let e = &sols[0].certificate.entries;
        assert!(e.iter().filter(|x| x.circuit.len() == 3).all(|x| x.value == BigInt::from(-1)));
        let v = names(3);
        assert!(enumerate_leaf(&chart, &[v]).unwrap().is_empty());
    }

    #[test]
    fn fiber_example() {
        let one = Scalar::one();
        let fd = BendingFiberData {
            k1: one.clone(),
            x1: one.clone(),
            y1: one.clone(),
            k2: one.clone(),
            x2: one.clone(),
            y2: one.clone(),
            probe: Circuit(vec![0, 1, 2]),
            probe_names: names(3),
            dim: 3,
        };
        let band = fiber_candidates(&fd).unwrap();
        assert_eq!(band.candidates, vec![(BigInt::from(2), Scalar::one(), BigInt::from(2))]);
        assert_eq!((band.lo.clone(), band.hi.clone()), (Scalar::one(), Scalar::one()));
        // grid over u in [-10, 10]
        let mut hits = BTreeSet::new();
        for k in 0..=200_000 {
            let u = -10.0 + 20.0 * k as f64 / 200_000.0;
            let e = (4.0 * u).exp();
            let (n, d) = (1.0 + e, 1.0 + 1.0 / e);
            // N and D stay strictly above their limit 1
            let strict = n.round() > 1.0 && d.round() > 1.0;
            if strict && (n - n.round()).abs() < 1e-4 && (d - d.round()).abs() < 1e-4 {
                hits.insert((n.round() as i64, d.round() as i64));
            }
        }
        assert_eq!(hits, BTreeSet::from([(2, 2)]));
    }

    #[test]
    fn shortcuts() {
        assert_eq!(nonexistence_shortcuts(&pan()).unwrap(), None);
        let t = pan().truncate(&[0, 1, 2]).unwrap();
        assert_eq!(nonexistence_shortcuts(&t).unwrap(), None);
        let at = crate::polytope::tests::pan_a_tilde().truncate(&[0, 1, 2]).unwrap();
        assert!(matches!(nonexistence_shortcuts(&at).unwrap(), Some(Shortcut::AffineTruncatedVertex(_))));
    }

    #[test]
    fn glued_pans_match_direct_search() {
        let g = glued_pans();
        let en = enumerate(&g).unwrap();
        let direct = direct_search(&g, 60).unwrap();
        // value from the direct search, frozen
        assert_eq!(direct.len(), 6);
        for p in &en.points {
            let a = p.point.assemble().unwrap().matrix;
            assert!(p.certificate.verify(&a));
            assert!(max_infinite_product(&g, &a).unwrap() <= BigInt::from(60));
            assert_eq!(a.coxeter(), g.coxeter().restrict(&g.core()));
        }
        assert_eq!(en.points.len(), direct.len(), "recursive {} vs direct {}", en.points.len(), direct.len());
        for m in &direct {
            let hits = en
                .points
                .iter()
                .filter(|p| same_up_to_order(&p.point.assemble().unwrap().matrix, m).unwrap())
                .count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn symmetry_of_glued_pans() {
        let g = glued_pans();
        assert_eq!(symmetries(&g).len(), 2);
    }
}
