//! Coxeter matrices, diagrams and the spherical / affine / large trichotomy.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{definiteness, Definiteness, Matrix};
use crate::scalar::{make_cos_entry, Scalar};

pub const MAX_RANK: usize = 12;

/// A Coxeter label: a finite order `m >= 1` or infinity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Label {
    Finite(u32),
    Inf,
}

impl Label {
    pub fn finite(self) -> Option<u32> {
        match self {
            Label::Finite(m) => Some(m),
            Label::Inf => None,
        }
    }

    /// Diagram edge: label greater than 2.
    pub fn is_edge(self) -> bool {
        !matches!(self, Label::Finite(m) if m <= 2)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Label::Finite(m) => s.serialize_u32(*m),
            Label::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) if s == "inf" => Ok(Label::Inf),
            serde_json::Value::Number(n) => match n.as_u64() {
                Some(m) if (1..=u32::MAX as u64).contains(&m) => Ok(Label::Finite(m as u32)),
                _ => Err(D::Error::custom(format!("bad label {n}"))),
            },
            v => Err(D::Error::custom(format!("bad label {v}"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Finite(m) => write!(f, "{m}"),
            Label::Inf => write!(f, "inf"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoxeterMatrix {
    pub names: Vec<String>,
    pub m: Vec<Vec<Label>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub enum GroupClass {
    Spherical,
    Affine,
    Large,
}

impl fmt::Display for GroupClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GroupClass::Spherical => "Spherical",
            GroupClass::Affine => "Affine",
            GroupClass::Large => "Large",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Refinement {
    pub is_lanner: bool,
    pub is_2lanner: bool,
    pub is_affine_a_tilde: bool,
}

impl CoxeterMatrix {
    /// Matrix with 1 on the diagonal and 2 elsewhere.
    pub fn commuting(names: Vec<String>) -> Self {
        let n = names.len();
        let m = (0..n)
            .map(|i| (0..n).map(|j| Label::Finite(if i == j { 1 } else { 2 })).collect())
            .collect();
        CoxeterMatrix { names, m }
    }

    /// Builds from a list of diagram edges; unspecified pairs get label 2.
    pub fn from_edges(names: &[&str], edges: &[(usize, usize, Label)]) -> Self {
        let mut c = CoxeterMatrix::commuting(names.iter().map(|s| s.to_string()).collect());
        for &(i, j, l) in edges {
            c.set(i, j, l);
        }
        c
    }

    pub fn set(&mut self, i: usize, j: usize, l: Label) {
        self.m[i][j] = l;
        self.m[j][i] = l;
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownFacet(name.to_string()))
    }

    /// Every `(s, t)` violating `M_ss = 1`, `M_st = M_ts` or `M_st >= 2`.
    pub fn validate(&self) -> Vec<(usize, usize)> {
        let n = self.rank();
        let mut bad = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let l = self.m[i][j];
                let ok = if i == j {
                    l == Label::Finite(1)
                } else {
                    l != Label::Finite(0) && l != Label::Finite(1) && l == self.m[j][i]
                };
                if !ok {
                    bad.push((i, j));
                }
            }
        }
        bad
    }

    pub fn edges(&self) -> Vec<(usize, usize, Label)> {
        let n = self.rank();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.m[i][j].is_edge() {
                    out.push((i, j, self.m[i][j]));
                }
            }
        }
        out
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.rank();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut k = 0;
            while k < comp.len() {
                let i = comp[k];
                for j in 0..n {
                    if !seen[j] && i != j && self.m[i][j].is_edge() {
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

    pub fn is_irreducible(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn restrict(&self, idx: &[usize]) -> CoxeterMatrix {
        CoxeterMatrix {
            names: idx.iter().map(|&i| self.names[i].clone()).collect(),
            m: idx.iter().map(|&i| idx.iter().map(|&j| self.m[i][j]).collect()).collect(),
        }
    }

    pub fn standard_subgroup(&self, subset: &[&str]) -> Result<CoxeterMatrix> {
        let idx = subset.iter().map(|s| self.index_of(s)).collect::<Result<Vec<_>>>()?;
        Ok(self.restrict(&idx))
    }

    /// The symmetric cosine matrix, with `-2` standing in for infinite labels.
    pub fn gram(&self) -> Matrix {
        let n = self.rank();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Scalar::int(2)
                        } else {
                            make_cos_entry(self.m[i][j].finite()).unwrap_or(Scalar::int(-2))
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn classify_connected(&self) -> Result<GroupClass> {
        if self.rank() == 0 {
            return Ok(GroupClass::Spherical);
        }
        match definiteness(&self.gram()) {
            Definiteness::PositiveDefinite => Ok(GroupClass::Spherical),
            Definiteness::Degenerate => Ok(GroupClass::Affine),
            Definiteness::Indefinite => Ok(GroupClass::Large),
            Definiteness::Inconclusive => Err(Error::Inconclusive(
                "cosine form too close to degenerate for floating evaluation".into(),
            )),
        }
    }

    /// Classifies the group. Reducible input (when allowed) is Large if some
    /// component is large, else Affine if some component is affine.
    pub fn classify(&self, require_irreducible: bool) -> Result<GroupClass> {
        if self.rank() > MAX_RANK {
            return Err(Error::RankTooLarge(self.rank()));
        }
        let comps = self.components();
        if require_irreducible && comps.len() > 1 {
            return Err(Error::Reducible);
        }
        let mut worst = GroupClass::Spherical;
        for c in comps {
            worst = worst.max(self.restrict(&c).classify_connected()?);
        }
        Ok(worst)
    }

    pub fn is_spherical(&self) -> Result<bool> {
        Ok(self.classify(false)? == GroupClass::Spherical)
    }

    pub fn refine(&self) -> Result<Refinement> {
        let class = self.classify(true)?;
        let n = self.rank();
        let all: Vec<usize> = (0..n).collect();
        let without = |drop: &[usize]| -> Vec<usize> {
            all.iter().copied().filter(|i| !drop.contains(i)).collect()
        };
        let large = class == GroupClass::Large;
        let mut is_lanner = large;
        if large {
            for s in 0..n {
                if !self.restrict(&without(&[s])).is_spherical()? {
                    is_lanner = false;
                    break;
                }
            }
        }
        let mut is_2lanner = large;
        if large {
            'outer: for s in 0..n {
                for t in (s + 1)..n {
                    if !self.restrict(&without(&[s, t])).is_spherical()? {
                        is_2lanner = false;
                        break 'outer;
                    }
                }
            }
        }
        Ok(Refinement { is_lanner, is_2lanner, is_affine_a_tilde: self.is_a_tilde() })
    }

    /// A single cycle on at least three nodes with every edge labeled 3.
    pub fn is_a_tilde(&self) -> bool {
        let n = self.rank();
        if n < 3 || !self.is_irreducible() {
            return false;
        }
        let edges = self.edges();
        if edges.len() != n || edges.iter().any(|e| e.2 != Label::Finite(3)) {
            return false;
        }
        (0..n).all(|i| (0..n).filter(|&j| j != i && self.m[i][j].is_edge()).count() == 2)
    }

    /// Graphviz rendering; label 3 is left implicit.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph coxeter {\n");
        for name in &self.names {
            s.push_str(&format!("  \"{name}\";\n"));
        }
        for (i, j, l) in self.edges() {
            if l == Label::Finite(3) {
                s.push_str(&format!("  \"{}\" -- \"{}\";\n", self.names[i], self.names[j]));
            } else {
                s.push_str(&format!(
                    "  \"{}\" -- \"{}\" [label=\"{l}\"];\n",
                    self.names[i], self.names[j]
                ));
            }
        }
        s.push_str("}\n");
        s
    }

    /// Node pairs as a set, for diagram comparisons.
    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges().into_iter().map(|(i, j, _)| (i, j)).collect()
    }
}

/// Shorthand for building test and catalog diagrams.
pub fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("F{i}")).collect()
}

pub fn triangle(l12: u32, l13: u32, l23: u32) -> CoxeterMatrix {
    let mut c = CoxeterMatrix::commuting(names(3));
    c.set(0, 1, Label::Finite(l12));
    c.set(0, 2, Label::Finite(l13));
    c.set(1, 2, Label::Finite(l23));
    c
}

pub fn cycle(labels: &[u32]) -> CoxeterMatrix {
    let n = labels.len();
    let mut c = CoxeterMatrix::commuting(names(n));
    for (i, &l) in labels.iter().enumerate() {
        c.set(i, (i + 1) % n, Label::Finite(l));
    }
    c
}

pub fn path(labels: &[u32]) -> CoxeterMatrix {
    let n = labels.len() + 1;
    let mut c = CoxeterMatrix::commuting(names(n));
    for (i, &l) in labels.iter().enumerate() {
        c.set(i, i + 1, Label::Finite(l));
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validation() {
        let ok = CoxeterMatrix::commuting(names(1));
        assert!(ok.validate().is_empty());
        let mut bad = CoxeterMatrix::commuting(names(2));
        bad.set(0, 1, Label::Finite(1));
        assert_eq!(bad.validate(), vec![(0, 1), (1, 0)]);
        let mut diag = CoxeterMatrix::commuting(names(2));
        diag.m[0][0] = Label::Finite(2);
        assert_eq!(diag.validate(), vec![(0, 0)]);
    }

    #[test]
    fn trichotomy_examples() {
        assert_eq!(path(&[3, 3]).classify(true).unwrap(), GroupClass::Spherical);
        assert_eq!(triangle(3, 3, 3).classify(true).unwrap(), GroupClass::Affine);
        assert_eq!(triangle(2, 3, 7).classify(true).unwrap(), GroupClass::Large);
        assert_eq!(path(&[4, 4]).classify(true).unwrap(), GroupClass::Affine);
        assert_eq!(path(&[5, 3]).classify(true).unwrap(), GroupClass::Spherical);
        assert_eq!(path(&[6]).classify(true).unwrap(), GroupClass::Spherical);
        let mut a1t = CoxeterMatrix::commuting(names(2));
        a1t.set(0, 1, Label::Inf);
        assert_eq!(a1t.classify(true).unwrap(), GroupClass::Affine);
        let reducible = CoxeterMatrix::commuting(names(2));
        assert_eq!(reducible.classify(true), Err(Error::Reducible));
        assert_eq!(reducible.classify(false).unwrap(), GroupClass::Spherical);
    }

    #[test]
    fn large_triangle_determinant_oracle() {
        // det of the (2,3,7) cosine matrix: 2(4 - 4cos^2(pi/7) - 4cos^2(pi/3)) = 2(3 - 4cos^2(pi/7))
        let c7 = (std::f64::consts::PI / 7.0).cos();
        assert!(2.0 * (3.0 - 4.0 * c7 * c7) < 0.0);
    }

    #[test]
    fn refinement_examples() {
        let r = triangle(2, 3, 7).refine().unwrap();
        assert!(r.is_lanner && r.is_2lanner);
        let r = cycle(&[3, 3, 3, 3]).refine().unwrap();
        assert!(r.is_affine_a_tilde && !r.is_lanner);
        let r = cycle(&[3, 3, 3, 4]).refine().unwrap();
        assert!(r.is_lanner && r.is_2lanner && !r.is_affine_a_tilde);
        let mut pendant = CoxeterMatrix::commuting(names(4));
        pendant.set(0, 1, Label::Finite(3));
        pendant.set(1, 2, Label::Finite(3));
        pendant.set(0, 2, Label::Finite(3));
        pendant.set(2, 3, Label::Finite(3));
        let r = pendant.refine().unwrap();
        assert!(r.is_2lanner && !r.is_lanner && !r.is_affine_a_tilde);
    }

    #[test]
    fn standard_subgroups() {
        let a2t = triangle(3, 3, 3);
        let sub = a2t.standard_subgroup(&["F1", "F2"]).unwrap();
        assert_eq!(sub.m[0][1], Label::Finite(3));
        assert_eq!(a2t.standard_subgroup(&[]).unwrap().rank(), 0);
        let t = triangle(2, 3, 7);
        let d = t.standard_subgroup(&["F2", "F3"]).unwrap();
        assert_eq!(d.m[0][1], Label::Finite(7));
        assert!(matches!(a2t.standard_subgroup(&["X"]), Err(Error::UnknownFacet(_))));
    }

    #[test]
    fn dot_omits_label_three() {
        let dot = triangle(3, 2, 4).to_dot();
        assert!(dot.contains("\"F1\" -- \"F2\";"));
        assert!(dot.contains("[label=\"4\"]"));
        assert!(!dot.contains("\"F1\" -- \"F3\""));
    }

    fn label() -> impl Strategy<Value = Label> {
        prop_oneof![
            Just(Label::Finite(2)),
            Just(Label::Finite(3)),
            Just(Label::Finite(4)),
            Just(Label::Finite(6)),
            Just(Label::Inf)
        ]
    }

    fn matrix(n: usize) -> impl Strategy<Value = CoxeterMatrix> {
        proptest::collection::vec(label(), n * (n - 1) / 2).prop_map(move |ls| {
            let mut c = CoxeterMatrix::commuting(names(n));
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    c.set(i, j, ls[k]);
                    k += 1;
                }
            }
            c
        })
    }

    proptest! {
        #[test]
        fn classify_is_relabeling_invariant(c in (2usize..6).prop_flat_map(matrix), rot in 0usize..6) {
            let n = c.rank();
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
            let p = c.restrict(&perm);
            prop_assert_eq!(c.classify(false).unwrap(), p.classify(false).unwrap());
        }

        #[test]
        fn refinement_implications(c in (3usize..6).prop_flat_map(matrix)) {
            prop_assume!(c.is_irreducible());
            let r = c.refine().unwrap();
            let class = c.classify(true).unwrap();
            if r.is_lanner || r.is_2lanner {
                prop_assert_eq!(class, GroupClass::Large);
            }
            if r.is_affine_a_tilde {
                prop_assert_eq!(class, GroupClass::Affine);
            }
        }
    }

    #[test]
    fn exhaustive_small_connected_diagrams() {
        let labels = [
            Label::Finite(2),
            Label::Finite(3),
            Label::Finite(4),
            Label::Finite(6),
            Label::Inf,
        ];
        for n in 1..=4usize {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
            let total = labels.len().pow(pairs.len() as u32);
            for code in 0..total {
                let mut c = CoxeterMatrix::commuting(names(n));
                let mut k = code;
                for &(i, j) in &pairs {
                    c.set(i, j, labels[k % labels.len()]);
                    k /= labels.len();
                }
                if c.is_irreducible() {
                    assert!(c.classify(true).is_ok());
                }
            }
        }
    }
}
