use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("label infinity carries a free parameter and has no canonical entry")]
    InfiniteLabel,
    #[error("diagram is reducible")]
    Reducible,
    #[error("unknown facet `{0}`")]
    UnknownFacet(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("rank {0} exceeds the supported maximum of 12")]
    RankTooLarge(usize),
    #[error("cyclic product vanishes on circuit {0:?}")]
    ZeroCyclicProduct(Vec<usize>),
    #[error("circuit {0:?} and its reversal have opposite signs")]
    SignMismatch(Vec<usize>),
    #[error("more than {0} cycles")]
    TooManyCycles(usize),
    #[error("index sets differ")]
    IndexMismatch,
    #[error("adjacency graph is disconnected")]
    Disconnected,
    #[error("missing label for ridge {0}")]
    MissingLabel(String),
    #[error("bad dimension {0}")]
    BadDimension(usize),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(Vec<String>),
    #[error("link matching is not a label-preserving isomorphism: {0}")]
    LinkMismatch(String),
    #[error("not a truncation polytope: {0}")]
    NotTruncationPolytope(String),
    #[error("facet set {0:?} is not a prismatic circuit")]
    NotPrismatic(Vec<String>),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("deformation space is empty: {0}")]
    EmptyCell(String),
    #[error("chart constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("not loxodromic: {0}")]
    NotLoxodromic(String),
    #[error("truncation degenerate at vertex {0:?}: normalized cyclic product is zero")]
    TruncationDegenerate(Vec<String>),
    #[error("circuit is not essential")]
    NotEssential,
    #[error("no relevant probe circuit crosses the cut")]
    NoProbeCircuit,
    #[error("bending value must be positive")]
    NonPositiveBend,
    #[error("not irreducible and large: {0}")]
    NotLargeIrreducible(String),
    #[error("approximate data: integrality is undecidable")]
    ApproxData,
    #[error("edge product {0} is not in {{1,2,3}}")]
    BadEdgeProduct(String),
    #[error("rank deficient: expected {expected}, found {found}")]
    RankDeficient { expected: usize, found: usize },
    #[error("facet polars do not span a hyperplane (rank {0})")]
    NotAHyperplane(usize),
    #[error("edge {0:?} meets the truncating hyperplane outside its interior")]
    EdgeIntersectionOutside(Vec<String>),
    #[error("tolerance exceeded at pair ({0}, {1}): {2:e}")]
    ToleranceExceeded(String, String, f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),
}

pub type Result<T> = std::result::Result<T, Error>;
