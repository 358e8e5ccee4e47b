//! JSON documents for diagrams, Cartan matrices, polytopes and deformation
//! points. Scalars travel as strings in their display form (`-√2`,
//! `1/2+√6`, `~0.25` for approximate values).

use serde::{Deserialize, Serialize};

use crate::cartan::CartanMatrix;
use crate::coxeter::{CoxeterMatrix, Label};
use crate::deform::{CutLink, DeformationPoint, LeafPoint};
use crate::error::{Error, Result};
use crate::polytope::{Construct, LabeledPolytope};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Document {
    Coxeter {
        names: Vec<String>,
        labels: Vec<Vec<Label>>,
    },
    Cartan {
        names: Vec<String>,
        entries: Vec<Vec<String>>,
    },
    Polytope {
        construct: Construct,
    },
    Point {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        polytope: Option<Construct>,
        leaves: Vec<LeafDoc>,
        #[serde(default)]
        cuts: Vec<CutDoc>,
        #[serde(default)]
        e: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafDoc {
    pub names: Vec<String>,
    pub entries: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub truncated: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutDoc {
    pub delta: Vec<String>,
    pub left: usize,
    pub right: usize,
}

pub fn parse(text: &str) -> Result<Document> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn emit<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn entries_of(a: &CartanMatrix) -> Vec<Vec<String>> {
    a.a.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

fn square<T>(names: &[String], rows: &[Vec<T>]) -> Result<()> {
    if rows.len() != names.len() || rows.iter().any(|r| r.len() != names.len()) {
        return Err(Error::Parse(format!("expected a {0}x{0} matrix", names.len())));
    }
    Ok(())
}

fn cartan_from(names: &[String], entries: &[Vec<String>]) -> Result<CartanMatrix> {
    square(names, entries)?;
    let a = entries
        .iter()
        .map(|r| r.iter().map(|x| x.parse::<Scalar>()).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(CartanMatrix::new(names.to_vec(), a))
}

impl Document {
    pub fn coxeter(m: &CoxeterMatrix) -> Self {
        Document::Coxeter { names: m.names.clone(), labels: m.m.clone() }
    }

    pub fn cartan(a: &CartanMatrix) -> Self {
        Document::Cartan { names: a.names.clone(), entries: entries_of(a) }
    }

    pub fn polytope(g: &LabeledPolytope) -> Self {
        Document::Polytope { construct: g.construct.clone() }
    }

    pub fn point(pt: &DeformationPoint, polytope: Option<&LabeledPolytope>) -> Self {
        Document::Point {
            polytope: polytope.map(|g| g.construct.clone()),
            leaves: pt
                .leaves
                .iter()
                .map(|l| LeafDoc {
                    names: l.matrix.names.clone(),
                    entries: entries_of(&l.matrix),
                    truncated: l.truncated.clone(),
                })
                .collect(),
            cuts: pt.cuts.iter().map(|c| CutDoc { delta: c.delta.clone(), left: c.left, right: c.right }).collect(),
            e: pt.e.iter().map(|x| x.to_string()).collect(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Document::Coxeter { .. } => "coxeter",
            Document::Cartan { .. } => "cartan",
            Document::Polytope { .. } => "polytope",
            Document::Point { .. } => "point",
        }
    }

    /// The Coxeter matrix as written; validity is left to the caller.
    pub fn to_coxeter(&self) -> Result<CoxeterMatrix> {
        match self {
            Document::Coxeter { names, labels } => {
                square(names, labels)?;
                Ok(CoxeterMatrix { names: names.clone(), m: labels.clone() })
            }
            Document::Cartan { .. } => Ok(self.to_cartan()?.coxeter()),
            Document::Polytope { construct } => {
                let g = construct.build()?;
                Ok(g.coxeter())
            }
            Document::Point { .. } => Ok(self.to_point()?.assemble()?.matrix.coxeter()),
        }
    }

    pub fn to_cartan(&self) -> Result<CartanMatrix> {
        match self {
            Document::Cartan { names, entries } => cartan_from(names, entries),
            Document::Point { .. } => Ok(self.to_point()?.assemble()?.matrix),
            d => Err(Error::Parse(format!("expected a cartan or point document, found {}", d.kind()))),
        }
    }

    pub fn to_polytope(&self) -> Result<LabeledPolytope> {
        match self {
            Document::Polytope { construct } | Document::Point { polytope: Some(construct), .. } => {
                construct.build()
            }
            d => Err(Error::Parse(format!("expected a polytope document, found {}", d.kind()))),
        }
    }

    /// A point document; a cartan document reads as a single-leaf point.
    pub fn to_point(&self) -> Result<DeformationPoint> {
        match self {
            Document::Point { leaves, cuts, e, .. } => {
                let leaves = leaves
                    .iter()
                    .map(|l| Ok(LeafPoint { matrix: cartan_from(&l.names, &l.entries)?, truncated: l.truncated.clone() }))
                    .collect::<Result<Vec<_>>>()?;
                if leaves.is_empty() {
                    return Err(Error::Parse("a point needs at least one leaf".into()));
                }
                let cuts: Vec<CutLink> =
                    cuts.iter().map(|c| CutLink { delta: c.delta.clone(), left: c.left, right: c.right }).collect();
                let e = e.iter().map(|x| x.parse::<Scalar>()).collect::<Result<Vec<_>>>()?;
                if cuts.len() != e.len() || cuts.len() + 1 != leaves.len() {
                    return Err(Error::Parse(format!(
                        "{} leaves, {} cuts and {} bending values do not fit a tree",
                        leaves.len(),
                        cuts.len(),
                        e.len()
                    )));
                }
                let dim = leaves[0].matrix.dim() - 1;
                let pt = DeformationPoint { dim, leaves, cuts, e };
                pt.validate()?;
                Ok(pt)
            }
            Document::Cartan { .. } => {
                Ok(DeformationPoint::single(self.to_cartan()?, Vec::new()))
            }
            d => Err(Error::Parse(format!("expected a point or cartan document, found {}", d.kind()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn catalog_round_trip() {
        for e in catalog::ENTRIES {
            let g = (e.build)();
            let text = emit(&Document::polytope(&g));
            let back = parse(&text).unwrap().to_polytope().unwrap();
            assert!(back.same_lattice(&g), "{}", e.name);
            assert_eq!(emit(&Document::polytope(&back)), text, "{}", e.name);
        }
    }

    #[test]
    fn point_round_trip() {
        let pt = crate::deform::tests::glued_point(Scalar::int(3));
        let g = catalog::two_lanner_glue();
        let text = emit(&Document::point(&pt, Some(&g)));
        let doc = parse(&text).unwrap();
        assert_eq!(doc.to_point().unwrap(), pt);
        assert_eq!(emit(&doc), text);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse("{\"type\":\"coxeter\"}"), Err(Error::Parse(_))));
        assert!(matches!(parse("{\"type\":\"nope\"}"), Err(Error::Parse(_))));
        let d = parse(r#"{"type":"cartan","names":["F1","F2"],"entries":[["2","-1"],["-1"]]}"#).unwrap();
        assert!(matches!(d.to_cartan(), Err(Error::Parse(_))));
        let d = parse(r#"{"type":"cartan","names":["F1","F2"],"entries":[["2","-√2"],["-√2","2"]]}"#).unwrap();
        assert_eq!(d.to_cartan().unwrap().edge_product(0, 1), Scalar::int(2));
    }
}
