//! Reflection data `(α_s, b_s)` realizing a Cartan matrix, the generators
//! `σ_s = Id - α_s ⊗ b_s`, and numeric checks on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cartan::{CartanMatrix, PerronType};
use crate::coxeter::{CoxeterMatrix, Label};
use crate::deform::DeformationPoint;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

pub type FMatrix = Vec<Vec<f64>>;

pub const REPRODUCTION_TOL: f64 = 1e-10;
pub const RELATION_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct VinbergRealization {
    pub dim: usize,
    pub names: Vec<String>,
    pub alpha: FMatrix,
    pub b: FMatrix,
    pub generators: Vec<FMatrix>,
    /// `max |α_s(b_t) - A_st|`.
    pub epsilon: f64,
    /// Bending parameters `u = log(E) / (d+1)` per cut, for glued points.
    pub bending: Vec<f64>,
    /// The generators over Q(√2, √3) when every `α_s`, `b_s` is exact.
    pub exact: Option<Vec<Matrix>>,
}

fn identity(n: usize) -> FMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn mat_mul(x: &FMatrix, y: &FMatrix) -> FMatrix {
    let n = x.len();
    let m = y[0].len();
    (0..n).map(|i| (0..m).map(|j| (0..y.len()).map(|k| x[i][k] * y[k][j]).sum()).collect()).collect()
}

fn max_dev(x: &FMatrix, y: &FMatrix) -> f64 {
    x.iter().flatten().zip(y.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn trace(x: &FMatrix) -> f64 {
    (0..x.len()).map(|i| x[i][i]).sum()
}

pub fn det(x: &FMatrix) -> f64 {
    let mut m = x.clone();
    let n = m.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    d
}

fn from_exact(names: Vec<String>, alpha_x: &[Vec<Scalar>], b_x: &[Vec<Scalar>], a: &CartanMatrix) -> VinbergRealization {
    let alpha: FMatrix = alpha_x.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect();
    let b: FMatrix = b_x.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect();
    let n = alpha[0].len();
    let generators = alpha
        .iter()
        .zip(&b)
        .map(|(al, bs)| (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - bs[i] * al[j]).collect()).collect())
        .collect();
    let mut epsilon: f64 = 0.0;
    for s in 0..alpha.len() {
        for t in 0..alpha.len() {
            let v: f64 = alpha[s].iter().zip(&b[t]).map(|(x, y)| x * y).sum();
            epsilon = epsilon.max((v - a.a[s][t].to_f64()).abs());
        }
    }
    let exact = (alpha_x.iter().chain(b_x).flatten().all(Scalar::is_exact)).then(|| {
        alpha_x
            .iter()
            .zip(b_x)
            .map(|(al, bs)| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let id = if i == j { Scalar::one() } else { Scalar::zero() };
                                &id - &(&bs[i] * &al[j])
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    });
    VinbergRealization { dim: n - 1, names, alpha, b, generators, epsilon, bending: Vec::new(), exact }
}

/// Rank factorization `A_st = α_s(b_t)` through an invertible block
/// `A[R, C]`: `α_s = A[s, C] A[R, C]^{-1}`, `b_t = A[R, t]`.
pub fn realize(a: &CartanMatrix) -> Result<VinbergRealization> {
    let rep = a.perron_type()?;
    if rep.kind != PerronType::Negative {
        return Err(Error::NotLoxodromic(format!("Perron type {}", rep.kind)));
    }
    if !a.coxeter().is_irreducible() {
        return Err(Error::NotLoxodromic("reducible".into()));
    }
    let n = a.dim();
    let r = rep.rank;
    let col = |m: &Matrix, cs: &[usize], rs: &[usize]| -> Matrix {
        rs.iter().map(|&i| cs.iter().map(|&j| m[i][j].clone()).collect()).collect()
    };
    let all: Vec<usize> = (0..n).collect();
    let mut cols = Vec::new();
    for j in 0..n {
        let mut t = cols.clone();
        t.push(j);
        if linalg::rank(&col(&a.a, &t, &all)) == t.len() {
            cols = t;
        }
    }
    let mut rows = Vec::new();
    for i in 0..n {
        let mut t = rows.clone();
        t.push(i);
        if linalg::rank(&col(&a.a, &cols, &t)) == t.len() {
            rows = t;
        }
    }
    if cols.len() != r || rows.len() != r {
        return Err(Error::RankDeficient { expected: r, found: cols.len().min(rows.len()) });
    }
    let block = col(&a.a, &cols, &rows);
    // alpha_s solves block^T x = A[s, C]
    let bt: Matrix = (0..r).map(|i| (0..r).map(|j| block[j][i].clone()).collect()).collect();
    let alpha: Vec<Vec<Scalar>> = (0..n)
        .map(|s| {
            let rhs: Vec<Scalar> = cols.iter().map(|&c| a.a[s][c].clone()).collect();
            linalg::solve(&bt, &rhs).ok_or(Error::RankDeficient { expected: r, found: linalg::rank(&bt) })
        })
        .collect::<Result<_>>()?;
    let b: Vec<Vec<Scalar>> = (0..n).map(|t| rows.iter().map(|&i| a.a[i][t].clone()).collect()).collect();
    Ok(from_exact(a.names.clone(), &alpha, &b, a))
}

/// Realization of a glued point from its exact assembly.
pub fn realize_point(pt: &DeformationPoint) -> Result<VinbergRealization> {
    let asm = pt.assemble()?;
    let rank = asm.matrix.rank();
    if rank != pt.dim + 1 {
        return Err(Error::RankDeficient { expected: pt.dim + 1, found: rank });
    }
    let mut r = from_exact(asm.matrix.names.clone(), &asm.alpha, &asm.b, &asm.matrix);
    r.bending = pt.e.iter().map(|e| e.to_f64().ln() / (pt.dim as f64 + 1.0)).collect();
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PairKind {
    /// `(σ_s σ_t)^m = Id` with the given deviation.
    Finite { order: u32, deviation: f64 },
    /// Trace on the plane of the two polars, `A_st A_ts - 2`.
    Loxodromic { trace: f64 },
    Parabolic { trace: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairCheck {
    pub s: String,
    pub t: String,
    pub kind: PairKind,
}

impl VinbergRealization {
    pub fn word(&self, w: &[usize]) -> FMatrix {
        w.iter().fold(identity(self.dim + 1), |acc, &g| mat_mul(&acc, &self.generators[g]))
    }

    /// Largest deviation of `σ_s^2` from the identity.
    pub fn involution_error(&self) -> f64 {
        let id = identity(self.dim + 1);
        self.generators.iter().map(|g| max_dev(&mat_mul(g, g), &id)).fold(0.0, f64::max)
    }
}

/// Relation check, in exact arithmetic when the realization is exact.
pub fn verify_relations(r: &VinbergRealization, m: &CoxeterMatrix, tol: f64) -> Result<Vec<PairCheck>> {
    let n = r.generators.len();
    let id = identity(r.dim + 1);
    let mut out = Vec::new();
    for s in 0..n {
        for t in s + 1..n {
            let st = mat_mul(&r.generators[s], &r.generators[t]);
            let kind = match m.m[s][t] {
                Label::Finite(order) => {
                    let deviation = match &r.exact {
                        Some(g) => {
                            let xst = exact_mul(&g[s], &g[t]);
                            let p = (0..order).fold(exact_identity(r.dim + 1), |p, _| exact_mul(&p, &xst));
                            max_dev(&linalg::to_f64(&p), &id)
                        }
                        None => {
                            let p = (0..order).fold(identity(r.dim + 1), |p, _| mat_mul(&p, &st));
                            max_dev(&p, &id)
                        }
                    };
                    if deviation > tol {
                        return Err(Error::ToleranceExceeded(r.names[s].clone(), r.names[t].clone(), deviation));
                    }
                    PairKind::Finite { order, deviation }
                }
                Label::Inf => {
                    // the product acts trivially off the plane of b_s, b_t
                    let tr = trace(&st) - (r.dim as f64 - 1.0);
                    if tr > 2.0 + tol {
                        PairKind::Loxodromic { trace: tr }
                    } else if (tr - 2.0).abs() <= tol {
                        PairKind::Parabolic { trace: tr }
                    } else {
                        return Err(Error::ToleranceExceeded(r.names[s].clone(), r.names[t].clone(), 2.0 - tr));
                    }
                }
            };
            out.push(PairCheck { s: r.names[s].clone(), t: r.names[t].clone(), kind });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMeet {
    /// The facet of the vertex not containing the edge.
    pub leaving: String,
    /// Position of the meeting point on the segment from the vertex (0) to
    /// the opposite vertex (1).
    pub parameter: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationData {
    pub vertex: Vec<String>,
    /// Functional vanishing on the polars of the vertex facets.
    pub normal: Vec<f64>,
    pub edges: Vec<EdgeMeet>,
}

fn kernel_f64(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let m: Matrix = rows.iter().map(|r| r.iter().map(|&x| Scalar::Approx(x)).collect()).collect();
    linalg::kernel(&m, n).into_iter().map(|v| v.iter().map(Scalar::to_f64).collect()).collect()
}

fn dotf(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Where the hyperplane spanned by the polars of `vertex` meets the edges of
/// a realized simplex issuing from that vertex.
pub fn truncation_geometry(r: &VinbergRealization, vertex: &[String]) -> Result<TruncationData> {
    let n = r.dim + 1;
    if r.names.len() != n {
        return Err(Error::UnsupportedShape("truncation geometry needs a simplex realization".into()));
    }
    let idx: Vec<usize> = vertex
        .iter()
        .map(|v| r.names.iter().position(|x| x == v).ok_or_else(|| Error::UnknownVertex(vertex.to_vec())))
        .collect::<Result<_>>()?;
    if idx.len() != r.dim {
        return Err(Error::UnknownVertex(vertex.to_vec()));
    }
    let polars: Vec<Vec<f64>> = idx.iter().map(|&s| r.b[s].clone()).collect();
    let ker = kernel_f64(&polars, n);
    if ker.len() != 1 {
        return Err(Error::NotAHyperplane(n - ker.len()));
    }
    let nu = ker[0].clone();
    let g = (0..n).find(|i| !idx.contains(i)).unwrap();
    let point = |zero: &[usize], positive: usize| -> Vec<f64> {
        let rows: Vec<Vec<f64>> = zero.iter().map(|&s| r.alpha[s].clone()).collect();
        let mut p = kernel_f64(&rows, n).remove(0);
        if dotf(&r.alpha[positive], &p) > 0.0 {
            p.iter_mut().for_each(|x| *x = -*x);
        }
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        p.iter().map(|x| x / norm).collect()
    };
    let v = point(&idx, g);
    let mut edges = Vec::new();
    for &f in &idx {
        let mut zero: Vec<usize> = idx.iter().copied().filter(|&s| s != f).collect();
        zero.push(g);
        let w = point(&zero, f);
        let (nv, nw) = (dotf(&nu, &v), dotf(&nu, &w));
        let t = if (nv - nw).abs() < 1e-300 { f64::INFINITY } else { nv / (nv - nw) };
        if !(t > 0.0 && t < 1.0) {
            let mut e: Vec<String> = zero.iter().filter(|&&s| s != g).map(|&s| r.names[s].clone()).collect();
            e.sort();
            return Err(Error::EdgeIntersectionOutside(e));
        }
        edges.push(EdgeMeet { leaving: r.names[f].clone(), parameter: t });
    }
    Ok(TruncationData { vertex: vertex.to_vec(), normal: nu, edges })
}

/// Traces of `count` seeded random words of length `1..=max_len`, evaluated
/// exactly when the realization is exact.
pub fn word_traces(r: &VinbergRealization, count: usize, max_len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = r.generators.len();
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len.max(1));
            let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..k)).collect();
            match &r.exact {
                Some(gens) => exact_trace(gens, &w, r.dim + 1).to_f64(),
                None => trace(&r.word(&w)),
            }
        })
        .collect()
}

fn exact_identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect()
}

fn exact_mul(x: &Matrix, y: &Matrix) -> Matrix {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).fold(Scalar::zero(), |s, l| &s + &(&x[i][l] * &y[l][j]))).collect())
        .collect()
}

fn exact_trace(gens: &[Matrix], w: &[usize], n: usize) -> Scalar {
    let acc = w.iter().fold(exact_identity(n), |acc, &g| exact_mul(&acc, &gens[g]));
    (0..n).fold(Scalar::zero(), |s, i| &s + &acc[i][i])
}
