//! Labeled simple polytopes built from simplices by truncation and gluing.
//!
//! Vertices are sorted tuples of incident facet indices. Two facets are
//! adjacent exactly when they share a vertex, which holds for simple
//! polytopes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::coxeter::{CoxeterMatrix, GroupClass, Label};
use crate::error::{Error, Result};

/// Recorded construction; also the polytope JSON input format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construct {
    Simplex {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
        labels: BTreeMap<String, Label>,
    },
    Truncate {
        of: Box<Construct>,
        vertex: Vec<String>,
    },
    Glue {
        left: Box<Construct>,
        #[serde(rename = "leftVertex")]
        left_vertex: Vec<String>,
        right: Box<Construct>,
        #[serde(rename = "rightVertex")]
        right_vertex: Vec<String>,
        #[serde(rename = "match")]
        matching: BTreeMap<String, String>,
    },
    /// Explicit face data for polytopes outside the simplex/truncate/glue grammar.
    Explicit {
        dim: usize,
        facets: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        truncation: Vec<String>,
        vertices: Vec<Vec<String>>,
        labels: BTreeMap<String, Label>,
        #[serde(default, rename = "truncationPolytope")]
        truncation_polytope: bool,
    },
}

impl Construct {
    pub fn build(&self) -> Result<LabeledPolytope> {
        match self {
            Construct::Simplex { dim, names, labels } => {
                let names = names.clone().unwrap_or_else(|| crate::coxeter::names(dim + 1));
                LabeledPolytope::simplex_named(*dim, names, labels)
            }
            Construct::Truncate { of, vertex } => {
                let g = of.build()?;
                let v = g.vertex_from_names(vertex)?;
                g.truncate(&v)
            }
            Construct::Glue { left, left_vertex, right, right_vertex, matching } => {
                let g1 = left.build()?;
                let g2 = right.build()?;
                let v1 = g1.vertex_from_names(left_vertex)?;
                let v2 = g2.vertex_from_names(right_vertex)?;
                LabeledPolytope::glue(&g1, &v1, &g2, &v2, matching)
            }
            Construct::Explicit { dim, facets, truncation, vertices, labels, truncation_polytope } => {
                LabeledPolytope::explicit(*dim, facets, truncation, vertices, labels, *truncation_polytope)
            }
        }
    }
}

pub fn pair_key(a: &str, b: &str) -> String {
    format!("{a},{b}")
}

fn lookup_label(labels: &BTreeMap<String, Label>, a: &str, b: &str) -> Option<Label> {
    labels.get(&pair_key(a, b)).or_else(|| labels.get(&pair_key(b, a))).copied()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPolytope {
    pub dim: usize,
    pub facets: Vec<String>,
    pub truncation: Vec<bool>,
    pub vertices: BTreeSet<Vec<usize>>,
    /// Labels of adjacent pairs `(i, j)` with `i < j`.
    pub labels: BTreeMap<(usize, usize), Label>,
    pub construct: Construct,
    pub truncation_polytope: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexLink {
    pub polytope: LabeledPolytope,
    /// Facet `k` of the link is facet `back_map[k]` of the parent.
    pub back_map: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Perfection {
    pub perfect: bool,
    pub two_perfect: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CircuitKind {
    Useless,
    NonEssential,
    Essential,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrismaticCircuit {
    pub delta: Vec<usize>,
    pub names: Vec<String>,
    pub kind: CircuitKind,
    pub class: GroupClass,
    pub a_tilde: bool,
    pub sides: (Vec<usize>, Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub delta: Vec<String>,
    pub left: LabeledPolytope,
    pub right: LabeledPolytope,
    pub left_facet: String,
    pub right_facet: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub piece: LabeledPolytope,
    /// The d+1 non-truncation facets.
    pub simplex: Vec<String>,
    /// Truncation facets created by cuts.
    pub cut_facets: Vec<String>,
    /// Truncation facets inherited from the input.
    pub free_truncations: Vec<String>,
}

impl Leaf {
    /// Simplex vertex (as facet names) cut off by a truncation facet.
    pub fn truncated_vertex(&self, facet: &str) -> Result<Vec<String>> {
        let t = self.piece.facet_index(facet)?;
        Ok(self.piece.neighbors(t).into_iter().map(|i| self.piece.facets[i].clone()).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub delta: Vec<String>,
    pub left: usize,
    pub right: usize,
    pub left_facet: String,
    pub right_facet: String,
    pub class: GroupClass,
    pub a_tilde: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GluingTree {
    pub leaves: Vec<Leaf>,
    pub cuts: Vec<Cut>,
    pub essential_count: usize,
    pub exceeds_dimension_bound: bool,
}

pub(crate) fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

impl LabeledPolytope {
    pub fn simplex(dim: usize, labels: &BTreeMap<String, Label>) -> Result<Self> {
        Self::simplex_named(dim, crate::coxeter::names(dim + 1), labels)
    }

    /// Labeled simplex from `(i, j, label)` triples over facets `F1..`; other pairs get 2.
    pub fn simplex_from(dim: usize, edges: &[(usize, usize, Label)]) -> Self {
        let names = crate::coxeter::names(dim + 1);
        let mut labels = BTreeMap::new();
        for i in 0..=dim {
            for j in (i + 1)..=dim {
                labels.insert(pair_key(&names[i], &names[j]), Label::Finite(2));
            }
        }
        for &(i, j, l) in edges {
            let (a, b) = (i.min(j), i.max(j));
            labels.insert(pair_key(&names[a], &names[b]), l);
        }
        Self::simplex_named(dim, names, &labels).expect("complete labels")
    }

    pub fn simplex_named(dim: usize, names: Vec<String>, labels: &BTreeMap<String, Label>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        Self::simplex_unchecked(dim, names, labels)
    }

    fn simplex_unchecked(dim: usize, names: Vec<String>, labels: &BTreeMap<String, Label>) -> Result<Self> {
        if names.len() != dim + 1 {
            return Err(Error::BadDimension(dim));
        }
        let mut lab = BTreeMap::new();
        for i in 0..=dim {
            for j in (i + 1)..=dim {
                let l = lookup_label(labels, &names[i], &names[j])
                    .ok_or_else(|| Error::MissingLabel(pair_key(&names[i], &names[j])))?;
                if l == Label::Finite(0) || l == Label::Finite(1) {
                    return Err(Error::Parse(format!("label {l} on {}", pair_key(&names[i], &names[j]))));
                }
                lab.insert((i, j), l);
            }
        }
        let all: Vec<usize> = (0..=dim).collect();
        let vertices = subsets(&all, dim).into_iter().collect();
        let mut canon = BTreeMap::new();
        for (&(i, j), &l) in &lab {
            canon.insert(pair_key(&names[i], &names[j]), l);
        }
        let default_names = names == crate::coxeter::names(dim + 1);
        Ok(LabeledPolytope {
            dim,
            truncation: vec![false; names.len()],
            construct: Construct::Simplex {
                dim,
                names: if default_names { None } else { Some(names.clone()) },
                labels: canon,
            },
            facets: names,
            vertices,
            labels: lab,
            truncation_polytope: true,
        })
    }

    pub fn explicit(
        dim: usize,
        facets: &[String],
        truncation: &[String],
        vertices: &[Vec<String>],
        labels: &BTreeMap<String, Label>,
        truncation_polytope: bool,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        let index = |n: &str| facets.iter().position(|f| f == n).ok_or_else(|| Error::UnknownFacet(n.to_string()));
        let mut vs = BTreeSet::new();
        for v in vertices {
            let mut idx = v.iter().map(|n| index(n)).collect::<Result<Vec<_>>>()?;
            idx.sort();
            idx.dedup();
            if idx.len() != dim {
                return Err(Error::UnknownVertex(v.clone()));
            }
            vs.insert(idx);
        }
        let mut g = LabeledPolytope {
            dim,
            facets: facets.to_vec(),
            truncation: facets.iter().map(|f| truncation.contains(f)).collect(),
            vertices: vs,
            labels: BTreeMap::new(),
            construct: Construct::Explicit {
                dim,
                facets: facets.to_vec(),
                truncation: truncation.to_vec(),
                vertices: vertices.to_vec(),
                labels: labels.clone(),
                truncation_polytope,
            },
            truncation_polytope,
        };
        for t in truncation {
            index(t)?;
        }
        for i in 0..facets.len() {
            for j in (i + 1)..facets.len() {
                if g.vertices.iter().any(|v| v.contains(&i) && v.contains(&j)) {
                    let l = lookup_label(labels, &facets[i], &facets[j])
                        .ok_or_else(|| Error::MissingLabel(pair_key(&facets[i], &facets[j])))?;
                    g.labels.insert((i, j), l);
                } else if lookup_label(labels, &facets[i], &facets[j]).is_some() {
                    return Err(Error::Parse(format!(
                        "label given for non-adjacent pair {}",
                        pair_key(&facets[i], &facets[j])
                    )));
                }
            }
        }
        let mut count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for v in &g.vertices {
            for f in v {
                let e: Vec<usize> = v.iter().copied().filter(|x| x != f).collect();
                *count.entry(e).or_default() += 1;
            }
        }
        if let Some((e, _)) = count.iter().find(|(_, &c)| c != 2) {
            return Err(Error::Parse(format!(
                "not a simple polytope: face {:?} lies on other than two vertices",
                g.names_of(e)
            )));
        }
        Ok(g)
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn facet_index(&self, name: &str) -> Result<usize> {
        self.facets
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| Error::UnknownFacet(name.to_string()))
    }

    pub fn names_of(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| self.facets[i].clone()).collect()
    }

    pub fn vertex_from_names(&self, names: &[String]) -> Result<Vec<usize>> {
        let mut idx = Vec::new();
        for n in names {
            match self.facets.iter().position(|f| f == n) {
                Some(i) => idx.push(i),
                None => return Err(Error::UnknownVertex(names.to_vec())),
            }
        }
        idx.sort();
        if self.vertices.contains(&idx) {
            Ok(idx)
        } else {
            Err(Error::UnknownVertex(names.to_vec()))
        }
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.labels.contains_key(&(i.min(j), i.max(j)))
    }

    /// Ridge label, `1` on the diagonal and infinity for non-adjacent facets.
    pub fn label(&self, i: usize, j: usize) -> Label {
        if i == j {
            return Label::Finite(1);
        }
        self.labels.get(&(i.min(j), i.max(j))).copied().unwrap_or(Label::Inf)
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.facet_count()).filter(|&j| j != i && self.adjacent(i, j)).collect()
    }

    pub fn coxeter(&self) -> CoxeterMatrix {
        let n = self.facet_count();
        CoxeterMatrix {
            names: self.facets.clone(),
            m: (0..n).map(|i| (0..n).map(|j| self.label(i, j)).collect()).collect(),
        }
    }

    pub fn core(&self) -> Vec<usize> {
        (0..self.facet_count()).filter(|&i| !self.truncation[i]).collect()
    }

    pub fn e_plus(&self) -> usize {
        self.labels.values().filter(|l| **l != Label::Finite(2)).count()
    }

    /// Edges as the `d-1` facets they lie on.
    pub fn edges(&self) -> Vec<Vec<usize>> {
        let mut set = BTreeSet::new();
        for v in &self.vertices {
            for f in v {
                set.insert(v.iter().copied().filter(|x| x != f).collect::<Vec<_>>());
            }
        }
        set.into_iter().collect()
    }

    pub fn vertex_link(&self, v: &[usize]) -> Result<VertexLink> {
        if !self.vertices.contains(v) {
            return Err(Error::UnknownVertex(self.names_of(v)));
        }
        let names = self.names_of(v);
        let mut labels = BTreeMap::new();
        for a in 0..v.len() {
            for b in (a + 1)..v.len() {
                labels.insert(pair_key(&names[a], &names[b]), self.label(v[a], v[b]));
            }
        }
        let polytope = LabeledPolytope::simplex_unchecked(self.dim - 1, names, &labels)?;
        Ok(VertexLink { polytope, back_map: v.to_vec() })
    }

    pub fn vertex_group(&self, v: &[usize]) -> CoxeterMatrix {
        self.coxeter().restrict(v)
    }

    pub fn perfection(&self) -> Result<Perfection> {
        let cox = self.coxeter();
        let mut perfect = true;
        for v in &self.vertices {
            if !cox.restrict(v).is_spherical()? {
                perfect = false;
                break;
            }
        }
        let mut two_perfect = true;
        for e in self.edges() {
            if !cox.restrict(&e).is_spherical()? {
                two_perfect = false;
                break;
            }
        }
        Ok(Perfection { perfect, two_perfect })
    }

    fn fresh_name(&self, taken: &[String]) -> String {
        (1..)
            .map(|k| format!("T{k}"))
            .find(|n| !self.facets.contains(n) && !taken.contains(n))
            .unwrap()
    }

    pub fn truncate(&self, v: &[usize]) -> Result<Self> {
        if !self.vertices.contains(v) {
            return Err(Error::UnknownVertex(self.names_of(v)));
        }
        let name = self.fresh_name(&[]);
        Ok(self.truncate_named(v, name, true))
    }

    fn truncate_named(&self, v: &[usize], name: String, record: bool) -> Self {
        let t = self.facet_count();
        let mut g = self.clone();
        g.facets.push(name);
        g.truncation.push(true);
        g.vertices.remove(v);
        for &f in v {
            let mut w: Vec<usize> = v.iter().copied().filter(|&x| x != f).collect();
            w.push(t);
            g.vertices.insert(w);
        }
        for &s in v {
            g.labels.insert((s, t), Label::Finite(2));
        }
        if record {
            g.construct = Construct::Truncate { of: Box::new(self.construct.clone()), vertex: self.names_of(v) };
        }
        g
    }

    /// Glues `g1` truncated at `v1` to `g2` truncated at `v2`, identifying the
    /// link facets through `phi` (left name to right name). Right facets
    /// outside the link whose names collide with left facets get primes.
    pub fn glue(
        g1: &LabeledPolytope,
        v1: &[usize],
        g2: &LabeledPolytope,
        v2: &[usize],
        phi: &BTreeMap<String, String>,
    ) -> Result<Self> {
        if g1.dim != g2.dim {
            return Err(Error::LinkMismatch("dimensions differ".into()));
        }
        if !g1.vertices.contains(v1) {
            return Err(Error::UnknownVertex(g1.names_of(v1)));
        }
        if !g2.vertices.contains(v2) {
            return Err(Error::UnknownVertex(g2.names_of(v2)));
        }
        let mut right_of = BTreeMap::new();
        for &a in v1 {
            let target = phi
                .get(&g1.facets[a])
                .ok_or_else(|| Error::LinkMismatch(format!("{} is unmatched", g1.facets[a])))?;
            let b = g2.facet_index(target).map_err(|_| Error::LinkMismatch(format!("unknown facet {target}")))?;
            if !v2.contains(&b) {
                return Err(Error::LinkMismatch(format!("{target} is not at the right vertex")));
            }
            right_of.insert(a, b);
        }
        if phi.len() != v1.len() || right_of.values().collect::<BTreeSet<_>>().len() != v2.len() {
            return Err(Error::LinkMismatch("matching is not a bijection".into()));
        }
        for &a in v1 {
            for &b in v1 {
                if a < b && g1.label(a, b) != g2.label(right_of[&a], right_of[&b]) {
                    return Err(Error::LinkMismatch(format!(
                        "label of {} differs from label of {}",
                        pair_key(&g1.facets[a], &g1.facets[b]),
                        pair_key(&g2.facets[right_of[&a]], &g2.facets[right_of[&b]])
                    )));
                }
            }
        }
        let mut g = g1.clone();
        g.vertices.remove(v1);
        let mut map = vec![usize::MAX; g2.facet_count()];
        for (&a, &b) in &right_of {
            map[b] = a;
        }
        for j in 0..g2.facet_count() {
            if map[j] != usize::MAX {
                continue;
            }
            let mut name = g2.facets[j].clone();
            while g.facets.contains(&name) {
                name.push('\'');
            }
            map[j] = g.facets.len();
            g.facets.push(name);
            g.truncation.push(g2.truncation[j]);
        }
        for w in &g2.vertices {
            if w.as_slice() == v2 {
                continue;
            }
            let mut x: Vec<usize> = w.iter().map(|&f| map[f]).collect();
            x.sort();
            g.vertices.insert(x);
        }
        for (&(i, j), &l) in &g2.labels {
            let (a, b) = (map[i].min(map[j]), map[i].max(map[j]));
            g.labels.entry((a, b)).or_insert(l);
        }
        g.construct = Construct::Glue {
            left: Box::new(g1.construct.clone()),
            left_vertex: g1.names_of(v1),
            right: Box::new(g2.construct.clone()),
            right_vertex: g2.names_of(v2),
            matching: phi.clone(),
        };
        g.truncation_polytope = g1.truncation_polytope && g2.truncation_polytope;
        Ok(g)
    }

    /// Sides of `delta` when it is a prismatic circuit.
    pub fn prismatic_sides(&self, delta: &[usize]) -> Option<(Vec<usize>, Vec<usize>)> {
        if delta.len() != self.dim {
            return None;
        }
        for (k, &a) in delta.iter().enumerate() {
            for &b in &delta[k + 1..] {
                if !self.adjacent(a, b) {
                    return None;
                }
            }
        }
        if self.vertices.iter().any(|v| delta.iter().all(|f| v.contains(f))) {
            return None;
        }
        let rest: Vec<usize> = (0..self.facet_count()).filter(|f| !delta.contains(f)).collect();
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut seen = BTreeSet::new();
        for &s in &rest {
            if seen.contains(&s) {
                continue;
            }
            seen.insert(s);
            let mut comp = vec![s];
            let mut k = 0;
            while k < comp.len() {
                let x = comp[k];
                for &y in &rest {
                    if !seen.contains(&y) && self.adjacent(x, y) {
                        seen.insert(y);
                        comp.push(y);
                    }
                }
                k += 1;
            }
            comp.sort();
            comps.push(comp);
        }
        if comps.len() != 2 {
            return None;
        }
        let b = comps.pop().unwrap();
        let a = comps.pop().unwrap();
        Some((a, b))
    }

    fn piece_useless(&self, delta: &[usize], side: &[usize]) -> bool {
        side.len() == 1 && delta.iter().all(|&f| self.label(side[0], f) == Label::Finite(2))
    }

    pub fn prismatic_circuits(&self) -> Result<Vec<PrismaticCircuit>> {
        if !self.truncation_polytope {
            return Err(Error::NotTruncationPolytope("no truncation construction recorded".into()));
        }
        let all: Vec<usize> = (0..self.facet_count()).collect();
        let cox = self.coxeter();
        let mut out = Vec::new();
        for delta in subsets(&all, self.dim) {
            let Some(sides) = self.prismatic_sides(&delta) else { continue };
            let ua = self.piece_useless(&delta, &sides.0);
            let ub = self.piece_useless(&delta, &sides.1);
            let kind = match (ua, ub) {
                (true, true) => CircuitKind::Useless,
                (true, false) | (false, true) => CircuitKind::NonEssential,
                _ => CircuitKind::Essential,
            };
            let sub = cox.restrict(&delta);
            out.push(PrismaticCircuit {
                names: self.names_of(&delta),
                class: sub.classify(false)?,
                a_tilde: sub.is_a_tilde(),
                delta,
                kind,
                sides,
            });
        }
        Ok(out)
    }

    fn piece(&self, delta: &[usize], side: &[usize], name: String) -> LabeledPolytope {
        let keep: Vec<usize> = (0..self.facet_count()).filter(|f| delta.contains(f) || side.contains(f)).collect();
        let mut pos = vec![usize::MAX; self.facet_count()];
        for (k, &f) in keep.iter().enumerate() {
            pos[f] = k;
        }
        let t = keep.len();
        let mut facets = self.names_of(&keep);
        facets.push(name);
        let mut truncation: Vec<bool> = keep.iter().map(|&f| self.truncation[f]).collect();
        truncation.push(true);
        let mut vertices = BTreeSet::new();
        for v in &self.vertices {
            if v.iter().all(|f| pos[*f] != usize::MAX) {
                vertices.insert(v.iter().map(|f| pos[*f]).collect::<Vec<_>>());
            }
        }
        let dpos: Vec<usize> = delta.iter().map(|f| pos[*f]).collect();
        for &f in &dpos {
            let mut w: Vec<usize> = dpos.iter().copied().filter(|&x| x != f).collect();
            w.push(t);
            vertices.insert(w);
        }
        let mut labels = BTreeMap::new();
        for (&(i, j), &l) in &self.labels {
            if pos[i] != usize::MAX && pos[j] != usize::MAX {
                labels.insert((pos[i], pos[j]), l);
            }
        }
        for &f in &dpos {
            labels.insert((f, t), Label::Finite(2));
        }
        let mut g = LabeledPolytope {
            dim: self.dim,
            facets,
            truncation,
            vertices,
            labels,
            construct: Construct::Simplex { dim: 0, names: None, labels: BTreeMap::new() },
            truncation_polytope: self.truncation_polytope,
        };
        g.construct = g.to_explicit();
        g
    }

    pub fn split(&self, delta_names: &[String]) -> Result<Split> {
        let a = self.fresh_name(&[]);
        let b = self.fresh_name(&[a.clone()]);
        self.split_named(delta_names, a, b)
    }

    fn split_named(&self, delta_names: &[String], left_name: String, right_name: String) -> Result<Split> {
        let mut delta = Vec::new();
        for n in delta_names {
            delta.push(self.facet_index(n).map_err(|_| Error::NotPrismatic(delta_names.to_vec()))?);
        }
        delta.sort();
        let (sa, sb) = self.prismatic_sides(&delta).ok_or_else(|| Error::NotPrismatic(delta_names.to_vec()))?;
        Ok(Split {
            delta: self.names_of(&delta),
            left: self.piece(&delta, &sa, left_name.clone()),
            right: self.piece(&delta, &sb, right_name.clone()),
            left_facet: left_name,
            right_facet: right_name,
        })
    }

    pub fn to_explicit(&self) -> Construct {
        let mut labels = BTreeMap::new();
        for (&(i, j), &l) in &self.labels {
            labels.insert(pair_key(&self.facets[i], &self.facets[j]), l);
        }
        Construct::Explicit {
            dim: self.dim,
            facets: self.facets.clone(),
            truncation: (0..self.facet_count())
                .filter(|&i| self.truncation[i])
                .map(|i| self.facets[i].clone())
                .collect(),
            vertices: self.vertices.iter().map(|v| self.names_of(v)).collect(),
            labels,
            truncation_polytope: self.truncation_polytope,
        }
    }

    /// Same facet names, vertices and labels, regardless of construction.
    pub fn same_lattice(&self, other: &LabeledPolytope) -> bool {
        let key = |g: &LabeledPolytope| {
            let facets: BTreeSet<String> = g.facets.iter().cloned().collect();
            let verts: BTreeSet<BTreeSet<String>> =
                g.vertices.iter().map(|v| g.names_of(v).into_iter().collect()).collect();
            let labels: BTreeSet<(BTreeSet<String>, Label)> = g
                .labels
                .iter()
                .map(|(&(i, j), &l)| ([g.facets[i].clone(), g.facets[j].clone()].into_iter().collect(), l))
                .collect();
            (g.dim, facets, verts, labels)
        };
        key(self) == key(other)
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> LabeledPolytope {
        let mut g = self.clone();
        for f in g.facets.iter_mut() {
            if let Some(n) = map.get(f) {
                *f = n.clone();
            }
        }
        g.construct = g.to_explicit();
        g
    }

    /// Splits along essential circuits, least first, until no essential
    /// circuit remains.
    pub fn gluing_tree(&self) -> Result<GluingTree> {
        if !self.truncation_polytope {
            return Err(Error::NotTruncationPolytope("no truncation construction recorded".into()));
        }
        let essential_count = self
            .prismatic_circuits()?
            .iter()
            .filter(|c| c.kind == CircuitKind::Essential)
            .count();
        let mut tree = GluingTree {
            leaves: Vec::new(),
            cuts: Vec::new(),
            essential_count,
            exceeds_dimension_bound: self.dim > 9,
        };
        let free: Vec<String> =
            (0..self.facet_count()).filter(|&i| self.truncation[i]).map(|i| self.facets[i].clone()).collect();
        let mut counter = 0;
        self.grow(&mut tree, &free, &mut counter)?;
        Ok(tree)
    }

    fn grow(&self, tree: &mut GluingTree, free: &[String], counter: &mut usize) -> Result<()> {
        let mut ess: Vec<PrismaticCircuit> = self
            .prismatic_circuits()?
            .into_iter()
            .filter(|c| c.kind == CircuitKind::Essential)
            .collect();
        ess.sort_by(|a, b| a.names.cmp(&b.names));
        let Some(c) = ess.first() else {
            let simplex: Vec<String> = self.core().into_iter().map(|i| self.facets[i].clone()).collect();
            if simplex.len() != self.dim + 1 {
                return Err(Error::UnsupportedShape(format!(
                    "leaf with {} non-truncation facets in dimension {}",
                    simplex.len(),
                    self.dim
                )));
            }
            let truncs = (0..self.facet_count()).filter(|&i| self.truncation[i]).map(|i| self.facets[i].clone());
            let (free_t, cut_t): (Vec<String>, Vec<String>) = truncs.partition(|n| free.contains(n));
            tree.leaves.push(Leaf { piece: self.clone(), simplex, cut_facets: cut_t, free_truncations: free_t });
            return Ok(());
        };
        *counter += 1;
        let split = self.split_named(&c.names, format!("X{counter}"), format!("Y{counter}"))?;
        split.left.grow(tree, free, counter)?;
        split.right.grow(tree, free, counter)?;
        let find = |name: &str| tree.leaves.iter().position(|l| l.piece.facets.iter().any(|f| f == name)).unwrap();
        let cut = Cut {
            delta: c.names.clone(),
            left: find(&split.left_facet),
            right: find(&split.right_facet),
            left_facet: split.left_facet,
            right_facet: split.right_facet,
            class: c.class,
            a_tilde: c.a_tilde,
        };
        tree.cuts.push(cut);
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use Label::Finite as L;

    pub(crate) fn all3(dim: usize) -> LabeledPolytope {
        let edges: Vec<(usize, usize, Label)> =
            (0..=dim).flat_map(|i| ((i + 1)..=dim).map(move |j| (i, j, L(3)))).collect();
        LabeledPolytope::simplex_from(dim, &edges)
    }

    /// Simplex with a (3,3,4) Lanner vertex {F1,F2,F3} and pan shape.
    pub(crate) fn pan() -> LabeledPolytope {
        LabeledPolytope::simplex_from(3, &[(0, 1, L(3)), (1, 2, L(3)), (0, 2, L(4)), (2, 3, L(3))])
    }

    /// Affine triangle {F1,F2,F3} with a pendant F4.
    pub(crate) fn pan_a_tilde() -> LabeledPolytope {
        LabeledPolytope::simplex_from(3, &[(0, 1, L(3)), (1, 2, L(3)), (0, 2, L(3)), (2, 3, L(3))])
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn identity_match(v: &[&str]) -> BTreeMap<String, String> {
        v.iter().map(|s| (s.to_string(), s.to_string())).collect()
    }

    #[test]
    fn simplex_examples() {
        assert_eq!(all3(3).e_plus(), 6);
        let t = LabeledPolytope::simplex_from(2, &[(0, 1, L(2)), (0, 2, L(3)), (1, 2, L(7))]);
        assert_eq!(t.e_plus(), 2);
        assert_eq!(t.vertices.len(), 3);
        // three non-right edges forming a path 2-1-3-4
        let case5 = LabeledPolytope::simplex_from(3, &[(0, 1, L(3)), (2, 3, L(3)), (0, 2, L(3))]);
        assert_eq!(case5.e_plus(), 3);
        let mut labels = BTreeMap::new();
        labels.insert("F1,F2".to_string(), L(3));
        assert!(matches!(LabeledPolytope::simplex(2, &labels), Err(Error::MissingLabel(_))));
        assert_eq!(LabeledPolytope::simplex(1, &labels), Err(Error::BadDimension(1)));
    }

    #[test]
    fn links() {
        let g = pan();
        let v = g.vertex_from_names(&names(&["F1", "F2", "F3"])).unwrap();
        let link = g.vertex_link(&v).unwrap();
        assert_eq!(link.polytope.dim, 2);
        assert_eq!(link.polytope.label(0, 2), L(4));
        assert_eq!(link.back_map, vec![0, 1, 2]);
        assert!(matches!(g.vertex_link(&[0, 1]), Err(Error::UnknownVertex(_))));
        let g4 = all3(4);
        let l4 = g4.vertex_link(&[0, 1, 2, 3]).unwrap();
        assert_eq!(l4.polytope.dim, 3);
        assert_eq!(l4.polytope.vertices.len(), 4);
    }

    #[test]
    fn perfection_examples() {
        let t = LabeledPolytope::simplex_from(2, &[(0, 1, L(2)), (0, 2, L(3)), (1, 2, L(7))]);
        assert_eq!(t.perfection().unwrap(), Perfection { perfect: true, two_perfect: true });
        let a = all3(3).perfection().unwrap();
        assert!(!a.perfect && a.two_perfect);
        let inf = LabeledPolytope::simplex_from(3, &[(0, 1, Label::Inf)]);
        assert!(!inf.perfection().unwrap().two_perfect);
    }

    #[test]
    fn truncation_examples() {
        let g = all3(3);
        let t = g.truncate(&[0, 1, 2]).unwrap();
        assert_eq!(t.facet_count(), 5);
        assert_eq!(t.vertices.len(), 6);
        assert_eq!(t.edges().len(), 9);
        assert_eq!(t.e_plus(), g.e_plus());
        let mut all = g.clone();
        for v in g.vertices.iter() {
            let names = g.names_of(v);
            let idx = all.vertex_from_names(&names).unwrap();
            all = all.truncate(&idx).unwrap();
        }
        assert_eq!(all.facet_count(), 8);
        assert_eq!(all.labels.len(), 6 + 12);
        let tf = all.facet_index("T1").unwrap();
        assert!(all.neighbors(tf).iter().all(|&s| all.label(s, tf) == L(2)));
    }

    #[test]
    fn truncation_facet_matches_link() {
        let g = pan();
        let v = vec![0, 1, 2];
        let t = g.truncate(&v).unwrap();
        let tf = t.facet_index("T1").unwrap();
        let around = t.neighbors(tf);
        let link = g.vertex_link(&v).unwrap();
        assert_eq!(around, link.back_map);
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(t.label(around[a], around[b]), link.polytope.label(a, b));
            }
        }
    }

    pub(crate) fn glued_pans() -> LabeledPolytope {
        let g = pan();
        LabeledPolytope::glue(&g, &[0, 1, 2], &g, &[0, 1, 2], &identity_match(&["F1", "F2", "F3"])).unwrap()
    }

    #[test]
    fn glue_examples() {
        let g = glued_pans();
        assert_eq!(g.facets, names(&["F1", "F2", "F3", "F4", "F4'"]));
        assert_eq!(g.vertices.len(), 6);
        assert!(!g.adjacent(3, 4));
        assert_eq!(g.label(3, 4), Label::Inf);
        let p = pan();
        let mut bad = identity_match(&["F1", "F2", "F3"]);
        bad.insert("F1".into(), "F2".into());
        bad.insert("F2".into(), "F1".into());
        // swapping F1 and F2 sends the 4-edge F1F3 to the 3-edge F2F3
        assert!(matches!(LabeledPolytope::glue(&p, &[0, 1, 2], &p, &[0, 1, 2], &bad), Err(Error::LinkMismatch(_))));
    }

    #[test]
    fn glue_split_round_trip() {
        let g = glued_pans();
        let circuits = g.prismatic_circuits().unwrap();
        assert_eq!(circuits.len(), 1);
        assert_eq!(circuits[0].kind, CircuitKind::Essential);
        assert_eq!(circuits[0].names, names(&["F1", "F2", "F3"]));
        let s = g.split(&circuits[0].names).unwrap();
        let t1 = pan().truncate(&[0, 1, 2]).unwrap();
        let mut ren = BTreeMap::new();
        ren.insert(s.left_facet.clone(), "T1".to_string());
        assert!(s.left.rename(&ren).same_lattice(&t1));
        let mut ren = BTreeMap::new();
        ren.insert(s.right_facet.clone(), "T1".to_string());
        ren.insert("F4'".to_string(), "F4".to_string());
        assert!(s.right.rename(&ren).same_lattice(&t1));
        // glue the pieces back: untruncate by removing the cut facet
        let back = LabeledPolytope::glue(&pan(), &[0, 1, 2], &pan(), &[0, 1, 2], &identity_match(&["F1", "F2", "F3"]))
            .unwrap();
        assert!(back.same_lattice(&g));
        assert!(matches!(g.split(&names(&["F1", "F2", "F4"])), Err(Error::NotPrismatic(_))));
    }

    #[test]
    fn glued_e_plus_recount() {
        let g = glued_pans();
        let t = pan().truncate(&[0, 1, 2]).unwrap();
        let link = pan().vertex_link(&[0, 1, 2]).unwrap();
        assert_eq!(g.e_plus(), 2 * t.e_plus() - link.polytope.e_plus());
    }

    #[test]
    fn circuits_of_truncated_simplex() {
        assert!(pan().prismatic_circuits().unwrap().is_empty());
        let t = pan().truncate(&[0, 1, 2]).unwrap();
        let c = t.prismatic_circuits().unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].names, names(&["F1", "F2", "F3"]));
        assert_eq!(c[0].kind, CircuitKind::NonEssential);
        assert_eq!(c[0].class, GroupClass::Large);
    }

    #[test]
    fn split_twice_truncated() {
        let g = pan().truncate(&[0, 1, 2]).unwrap();
        let v = g.vertex_from_names(&names(&["F1", "F2", "F4"])).unwrap();
        let g = g.truncate(&v).unwrap();
        let s = g.split(&names(&["F1", "F2", "F3"])).unwrap();
        // one piece is the prism on T1, the other the simplex truncated at both vertices minus T1
        let sizes = (s.left.facet_count(), s.right.facet_count());
        assert_eq!(sizes, (6, 5));
        let once = pan().truncate(&[0, 1, 3]).unwrap();
        let cut = once.vertex_from_names(&names(&["F1", "F2", "F3"])).unwrap();
        let expect = once.truncate(&cut).unwrap();
        let mut ren = BTreeMap::new();
        ren.insert(s.left_facet.clone(), "T2".to_string());
        ren.insert("T2".to_string(), "T1".to_string());
        assert!(s.left.rename(&ren).same_lattice(&expect));
    }

    #[test]
    fn gluing_tree_examples() {
        let s = pan();
        let t = s.gluing_tree().unwrap();
        assert_eq!((t.leaves.len(), t.cuts.len()), (1, 0));
        let chain = {
            let g = glued_pans();
            // second copy glued at the far vertex {F1,F2,F4'} of the right piece
            let w = g.vertex_from_names(&names(&["F1", "F2", "F4'"])).unwrap();
            let link = g.vertex_link(&w).unwrap();
            assert_eq!(link.polytope.label(0, 1), L(3));
            let p2 = LabeledPolytope::simplex_from(3, &[(0, 1, L(3)), (0, 3, L(3)), (2, 3, L(3))]);
            let pv = p2.vertex_from_names(&names(&["F1", "F2", "F3"])).unwrap();
            let mut phi = BTreeMap::new();
            phi.insert("F1".to_string(), "F1".to_string());
            phi.insert("F2".to_string(), "F2".to_string());
            phi.insert("F4'".to_string(), "F3".to_string());
            LabeledPolytope::glue(&g, &w, &p2, &pv, &phi)
        };
        let chain = chain.unwrap();
        let tree = chain.gluing_tree().unwrap();
        assert_eq!(tree.leaves.len(), 3);
        assert_eq!(tree.cuts.len(), 2);
        assert_eq!(tree.essential_count, 2);
        let degrees: Vec<usize> = (0..3)
            .map(|i| tree.cuts.iter().filter(|c| c.left == i || c.right == i).count())
            .collect();
        let mut d = degrees.clone();
        d.sort();
        assert_eq!(d, vec![1, 1, 2]);
    }

    #[test]
    fn high_dimension_flag() {
        let g = LabeledPolytope::simplex_from(10, &[(0, 1, L(3))]);
        assert!(g.gluing_tree().unwrap().exceeds_dimension_bound);
    }

    #[test]
    fn explicit_cube() {
        let cube = crate::catalog::fig5_cube();
        assert_eq!(cube.vertices.len(), 8);
        assert_eq!(cube.edges().len(), 12);
        let v = cube.vertex_from_names(&names(&["F2", "F5", "F6"])).unwrap();
        let link = cube.vertex_link(&v).unwrap();
        assert!(link.polytope.labels.values().all(|l| *l == L(4)));
        assert!(matches!(cube.prismatic_circuits(), Err(Error::NotTruncationPolytope(_))));
        let t = cube.truncate(&v).unwrap();
        assert_eq!(t.facet_count(), 7);
    }

    #[test]
    fn construct_json_round_trip() {
        let g = glued_pans();
        let js = serde_json::to_string(&g.construct).unwrap();
        let back: Construct = serde_json::from_str(&js).unwrap();
        assert_eq!(back, g.construct);
        assert_eq!(back.build().unwrap(), g);
        assert_eq!(serde_json::to_string(&back).unwrap(), js);
    }
}
