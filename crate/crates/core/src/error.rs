use thiserror::Error;

#[derive(Debug, Error)]
pub enum HopfError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point at infinity (projection pole)")]
    PointAtInfinity,

    #[error("not a frame: determinant {0:.3e}")]
    NotAFrame(f64),

    #[error("outside domain: {0}")]
    OutsideDomain(String),

    #[error("chart singularity: m is antipodal to the chart target")]
    ChartSingularity,

    #[error("near-critical value: preimage jacobian determinant {0:.3e}")]
    NearCriticalValue(f64),

    #[error("non-regular target: {0}")]
    NonRegularTarget(String),

    #[error("ambiguous winding: transverse field vanishes on every probe circle")]
    AmbiguousWinding,

    #[error("curves not disjoint (distance {0:.3e})")]
    CurvesNotDisjoint(f64),

    #[error("curve self-intersects (distance {0:.3e})")]
    SelfIntersection(f64),

    #[error("degenerate projection after {0} retries")]
    DegenerateProjection(usize),

    #[error("curve {0} is open")]
    OpenCurve(usize),

    #[error("push-off failed: {0}")]
    PushOff(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HopfError>;
