//! Named example polytopes and a table of known diagrams.

use std::collections::BTreeMap;

use crate::coxeter::{self, CoxeterMatrix, GroupClass, Label};
use crate::error::{Error, Result};
use crate::polytope::{pair_key, LabeledPolytope};

use Label::Finite as L;

fn s(v: &[&str]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn matching(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn glue_named(
    g1: &LabeledPolytope,
    v1: &[&str],
    g2: &LabeledPolytope,
    v2: &[&str],
    phi: &[(&str, &str)],
) -> LabeledPolytope {
    let a = g1.vertex_from_names(&s(v1)).expect("left vertex");
    let b = g2.vertex_from_names(&s(v2)).expect("right vertex");
    LabeledPolytope::glue(g1, &a, g2, &b, &matching(phi)).expect("catalog gluing")
}

fn truncate_named(g: &LabeledPolytope, v: &[&str]) -> LabeledPolytope {
    let v = g.vertex_from_names(&s(v)).expect("vertex");
    g.truncate(&v).expect("catalog truncation")
}

const LINK: [&str; 3] = ["F1", "F2", "F3"];
const ID: [(&str, &str); 3] = [("F1", "F1"), ("F2", "F2"), ("F3", "F3")];

/// A labeled cube that is not a truncation polytope. F1 is the inner face,
/// F6 the outer one, F2..F5 the sides in cyclic order.
pub fn fig5_cube() -> LabeledPolytope {
    let facets = s(&["F1", "F2", "F3", "F4", "F5", "F6"]);
    let vertices = vec![
        s(&["F3", "F4", "F6"]),
        s(&["F4", "F5", "F6"]),
        s(&["F2", "F5", "F6"]),
        s(&["F2", "F3", "F6"]),
        s(&["F1", "F3", "F4"]),
        s(&["F1", "F4", "F5"]),
        s(&["F1", "F2", "F5"]),
        s(&["F1", "F2", "F3"]),
    ];
    let mut labels = BTreeMap::new();
    for (a, b, m) in [
        ("F2", "F6", 4),
        ("F5", "F6", 4),
        ("F4", "F6", 2),
        ("F3", "F6", 2),
        ("F2", "F3", 2),
        ("F2", "F5", 4),
        ("F3", "F4", 4),
        ("F4", "F5", 2),
        ("F1", "F2", 2),
        ("F1", "F3", 2),
        ("F1", "F4", 2),
        ("F1", "F5", 2),
    ] {
        labels.insert(pair_key(a, b), Label::Finite(m));
    }
    LabeledPolytope::explicit(3, &facets, &[], &vertices, &labels, false).expect("cube data")
}

/// No right angles; every vertex group is a Lanner triangle.
pub fn case1_simplex() -> LabeledPolytope {
    LabeledPolytope::simplex_from(
        3,
        &[(0, 1, L(4)), (0, 2, L(3)), (0, 3, L(3)), (1, 2, L(3)), (1, 3, L(3)), (2, 3, L(4))],
    )
}

/// One right angle: a 4-cycle with a chord.
pub fn case2_simplex() -> LabeledPolytope {
    LabeledPolytope::simplex_from(3, &[(0, 2, L(3)), (0, 3, L(3)), (1, 2, L(3)), (1, 3, L(3)), (2, 3, L(3))])
}

/// Triangle F1F2F3 (3,3,4) with F4 hanging off F3.
pub fn pan() -> LabeledPolytope {
    LabeledPolytope::simplex_from(3, &[(0, 1, L(3)), (1, 2, L(3)), (0, 2, L(4)), (2, 3, L(3))])
}

pub fn cycle_simplex() -> LabeledPolytope {
    LabeledPolytope::simplex_from(3, &[(0, 1, L(3)), (1, 2, L(3)), (2, 3, L(3)), (0, 3, L(4))])
}

pub fn tree_simplex() -> LabeledPolytope {
    LabeledPolytope::simplex_from(3, &[(0, 1, L(3)), (1, 2, L(5)), (2, 3, L(3))])
}

/// Affine triangle F1F2F3 with F4 hanging off F3.
pub fn pan_a_tilde() -> LabeledPolytope {
    LabeledPolytope::simplex_from(3, &[(0, 1, L(3)), (1, 2, L(3)), (0, 2, L(3)), (2, 3, L(3))])
}

/// 4-cycle F1F2F3F4 with F5 hanging off F4.
pub fn pan4() -> LabeledPolytope {
    LabeledPolytope::simplex_from(4, &[(0, 1, L(3)), (1, 2, L(3)), (2, 3, L(3)), (0, 3, L(3)), (3, 4, L(3))])
}

/// F1, F2 each joined to F3, F4, F5.
pub fn k23_simplex() -> LabeledPolytope {
    let edges: Vec<(usize, usize, Label)> = [0, 1].iter().flat_map(|&i| (2..5).map(move |j| (i, j, L(3)))).collect();
    LabeledPolytope::simplex_from(4, &edges)
}

pub fn cycle5_simplex() -> LabeledPolytope {
    LabeledPolytope::simplex_from(4, &[(0, 1, L(3)), (1, 2, L(3)), (2, 3, L(3)), (3, 4, L(3)), (0, 4, L(4))])
}

/// Path 6-4-3: the vertex F1F2F3 is a Lanner triangle, the rest spherical.
pub fn tree_lanner() -> LabeledPolytope {
    LabeledPolytope::simplex_from(3, &[(0, 1, L(6)), (1, 2, L(4)), (2, 3, L(3))])
}

/// Path 4-5-3: as above but with a label-5 ridge.
pub fn tree_lanner5() -> LabeledPolytope {
    LabeledPolytope::simplex_from(3, &[(0, 1, L(4)), (1, 2, L(5)), (2, 3, L(3))])
}

/// Two Lanner vertices F1F2F3 and F1F2F4; F3F4 is a right angle.
pub fn double_lanner() -> LabeledPolytope {
    LabeledPolytope::simplex_from(
        3,
        &[(0, 1, L(4)), (0, 2, L(3)), (0, 3, L(3)), (1, 2, L(3)), (1, 3, L(3))],
    )
}

pub fn all3(dim: usize) -> LabeledPolytope {
    let edges: Vec<(usize, usize, Label)> =
        (0..=dim).flat_map(|i| ((i + 1)..=dim).map(move |j| (i, j, L(3)))).collect();
    LabeledPolytope::simplex_from(dim, &edges)
}

pub fn two_lanner_glue() -> LabeledPolytope {
    glue_named(&pan(), &LINK, &pan(), &LINK, &ID)
}

pub fn tree_lanner_glue() -> LabeledPolytope {
    glue_named(&tree_lanner(), &LINK, &tree_lanner(), &LINK, &ID)
}

pub fn a_tilde_glue() -> LabeledPolytope {
    glue_named(&pan_a_tilde(), &LINK, &pan_a_tilde(), &LINK, &ID)
}

/// pan + double_lanner + pan along two cuts.
pub fn lanner_chain3() -> LabeledPolytope {
    let g1 = glue_named(&pan(), &LINK, &double_lanner(), &LINK, &[("F1", "F1"), ("F2", "F3"), ("F3", "F2")]);
    glue_named(&g1, &["F1", "F3", "F4'"], &pan(), &LINK, &[("F1", "F1"), ("F3", "F3"), ("F4'", "F2")])
}

pub struct Entry {
    pub name: &'static str,
    pub summary: &'static str,
    pub build: fn() -> LabeledPolytope,
}

pub const ENTRIES: &[Entry] = &[
    Entry { name: "triangle-346", summary: "hyperbolic triangle (3,4,6)", build: || {
        LabeledPolytope::simplex_from(2, &[(0, 1, L(3)), (0, 2, L(4)), (1, 2, L(6))])
    } },
    Entry { name: "triangle-237", summary: "hyperbolic triangle (2,3,7), one right angle", build: || {
        LabeledPolytope::simplex_from(2, &[(0, 1, L(3)), (1, 2, L(7))])
    } },
    Entry { name: "case1-simplex", summary: "3-simplex without right angles", build: case1_simplex },
    Entry { name: "case2-simplex", summary: "3-simplex with one right angle", build: case2_simplex },
    Entry { name: "case3-pan", summary: "3-simplex shaped as a pan", build: pan },
    Entry { name: "case4-cycle", summary: "3-simplex shaped as a 4-cycle", build: cycle_simplex },
    Entry { name: "case5-tree", summary: "3-simplex shaped as a path", build: tree_simplex },
    Entry { name: "pan-4", summary: "4-simplex shaped as a 4-pan", build: pan4 },
    Entry { name: "k23-simplex", summary: "4-simplex shaped as K(2,3)", build: k23_simplex },
    Entry { name: "cycle-5", summary: "4-simplex shaped as a 5-cycle", build: cycle5_simplex },
    Entry { name: "lanner-truncated", summary: "pan truncated at its Lanner vertex", build: || {
        truncate_named(&pan(), &LINK)
    } },
    Entry { name: "label5-truncated", summary: "path 4-5-3 truncated at its Lanner vertex", build: || {
        truncate_named(&tree_lanner5(), &LINK)
    } },
    Entry { name: "a-tilde-truncated", summary: "affine pan truncated at its affine vertex", build: || {
        truncate_named(&pan_a_tilde(), &LINK)
    } },
    Entry { name: "a-tilde-3-truncated", summary: "4-pan truncated at its affine vertex", build: || {
        truncate_named(&pan4(), &["F1", "F2", "F3", "F4"])
    } },
    Entry { name: "two-lanner-glue-1", summary: "two pans glued along their Lanner vertex", build: two_lanner_glue },
    Entry { name: "tree-lanner-glue", summary: "two 6-4-3 paths glued along their Lanner vertex", build: tree_lanner_glue },
    Entry { name: "a-tilde-glue", summary: "two affine pans glued along an affine circuit", build: a_tilde_glue },
    Entry { name: "lanner-chain-3", summary: "three simplices glued in a chain", build: lanner_chain3 },
    Entry { name: "fig5-cube", summary: "labeled cube, not a truncation polytope", build: fig5_cube },
    Entry { name: "simplex-d10", summary: "10-simplex with all labels 3", build: || all3(10) },
];

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

pub fn lookup(name: &str) -> Result<LabeledPolytope> {
    ENTRIES
        .iter()
        .find(|e| e.name == name)
        .map(|e| (e.build)())
        .ok_or_else(|| Error::UnknownName(name.to_string()))
}

/// A diagram with its expected class and Lanner flag.
pub struct KnownDiagram {
    pub name: &'static str,
    pub coxeter: CoxeterMatrix,
    pub class: GroupClass,
    pub lanner: bool,
}

pub fn known_diagrams() -> Vec<KnownDiagram> {
    use GroupClass::*;
    let k = |name, coxeter, class, lanner| KnownDiagram { name, coxeter, class, lanner };
    let d4 = CoxeterMatrix::from_edges(&["F1", "F2", "F3", "F4"], &[(0, 1, L(3)), (0, 2, L(3)), (0, 3, L(3))]);
    let inf2 = CoxeterMatrix::from_edges(&["F1", "F2"], &[(0, 1, Label::Inf)]);
    let d4_tilde = CoxeterMatrix::from_edges(
        &["F1", "F2", "F3", "F4", "F5"],
        &[(0, 1, L(3)), (0, 2, L(3)), (0, 3, L(3)), (0, 4, L(3))],
    );
    vec![
        k("A2", coxeter::path(&[3]), Spherical, false),
        k("B2", coxeter::path(&[4]), Spherical, false),
        k("G2", coxeter::path(&[6]), Spherical, false),
        k("I2(7)", coxeter::path(&[7]), Spherical, false),
        k("A3", coxeter::path(&[3, 3]), Spherical, false),
        k("B3", coxeter::path(&[4, 3]), Spherical, false),
        k("H3", coxeter::path(&[5, 3]), Spherical, false),
        k("A4", coxeter::path(&[3, 3, 3]), Spherical, false),
        k("B4", coxeter::path(&[4, 3, 3]), Spherical, false),
        k("D4", d4, Spherical, false),
        k("F4", coxeter::path(&[3, 4, 3]), Spherical, false),
        k("H4", coxeter::path(&[5, 3, 3]), Spherical, false),
        k("A1~", inf2, Affine, false),
        k("A2~", coxeter::triangle(3, 3, 3), Affine, false),
        k("B2~", coxeter::path(&[4, 4]), Affine, false),
        k("G2~", coxeter::path(&[6, 3]), Affine, false),
        k("A3~", coxeter::cycle(&[3, 3, 3, 3]), Affine, false),
        k("B3~", CoxeterMatrix::from_edges(&["F1", "F2", "F3", "F4"], &[(0, 1, L(3)), (0, 2, L(3)), (0, 3, L(4))]), Affine, false),
        k("C3~", coxeter::path(&[4, 3, 4]), Affine, false),
        k("D4~", d4_tilde, Affine, false),
        k("F4~", coxeter::path(&[3, 3, 4, 3]), Affine, false),
        k("(2,3,7)", coxeter::path(&[3, 7]), Large, true),
        k("(2,4,5)", coxeter::path(&[4, 5]), Large, true),
        k("(3,3,4)", coxeter::triangle(3, 4, 3), Large, true),
        k("(4,4,4)", coxeter::triangle(4, 4, 4), Large, true),
        k("[3,5,3]", coxeter::path(&[3, 5, 3]), Large, true),
        k("[5,3,5]", coxeter::path(&[5, 3, 5]), Large, true),
        k("[4,3,5]", coxeter::path(&[4, 3, 5]), Large, true),
        k("cycle(3,3,3,4)", coxeter::cycle(&[3, 3, 3, 4]), Large, true),
        k("[5,3,3,3]", coxeter::path(&[5, 3, 3, 3]), Large, true),
        k("[5,3,3,4]", coxeter::path(&[5, 3, 3, 4]), Large, true),
        k("[5,3,3,5]", coxeter::path(&[5, 3, 3, 5]), Large, true),
        k("cycle(3,3,3,3,4)", coxeter::cycle(&[3, 3, 3, 3, 4]), Large, true),
        k("[3,6,3]", coxeter::path(&[3, 6, 3]), Large, false),
        k("[4,4,4]", coxeter::path(&[4, 4, 4]), Large, false),
    ]
}
