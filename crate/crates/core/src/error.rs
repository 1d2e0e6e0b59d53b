use core::fmt;

/// Rejected geometric input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryError {
    NonFinite,
    ZeroLength { id: u32 },
    NonPositiveRadius,
    NonPositiveSide,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::NonFinite => write!(f, "coordinate is NaN or infinite"),
            GeometryError::ZeroLength { id } => {
                write!(f, "segment {id} has zero length")
            }
            GeometryError::NonPositiveRadius => write!(f, "ball radius must be positive"),
            GeometryError::NonPositiveSide => write!(f, "square side must be positive"),
        }
    }
}

impl core::error::Error for GeometryError {}

/// Failures of the dyadic machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalError {
    /// `bit_delta` of two equal values.
    EqualValues,
    /// Value outside `[0, 1)` (or the closed interval where stated).
    OutOfUnitRange(f64),
    /// The required dyadic level exceeds [`crate::canonical::MAX_LEVEL`].
    LevelCapExceeded { level: u32 },
    /// All input points coincide, there is no scale to normalize with.
    DegenerateExtent,
    /// Empty input where at least one segment is required.
    EmptyInput,
    /// A rectangle that is empty, inverted, or reaches outside the unit square.
    InvalidRegion,
    /// `(level, kx, ky)` does not name a cell of the unit square.
    InvalidSquare,
}

impl fmt::Display for CanonicalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalError::EqualValues => write!(f, "values are equal, no differing bit"),
            CanonicalError::OutOfUnitRange(v) => write!(f, "value {v} is outside the unit range"),
            CanonicalError::LevelCapExceeded { level } => write!(
                f,
                "dyadic level {level} exceeds the cap of {}; coordinates are nearly coincident",
                crate::canonical::MAX_LEVEL
            ),
            CanonicalError::DegenerateExtent => {
                write!(f, "all points coincide, no valid normalization scale")
            }
            CanonicalError::EmptyInput => write!(f, "no segments given"),
            CanonicalError::InvalidRegion => {
                write!(
                    f,
                    "region is empty or not inside the unit square; normalize first"
                )
            }
            CanonicalError::InvalidSquare => write!(f, "not a canonical square of the unit square"),
        }
    }
}

impl core::error::Error for CanonicalError {}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityError {
    UnsupportedFactor(u32),
    OracleCapExceeded { len: usize, cap: usize },
    GridResolutionTooSmall(usize),
}

impl fmt::Display for DensityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityError::UnsupportedFactor(k) => {
                write!(f, "approximation factor {k} is not one of 3, 4, 25")
            }
            DensityError::OracleCapExceeded { len, cap } => write!(
                f,
                "oracle refuses {len} segments (cap {cap}); use an approximation instead"
            ),
            DensityError::GridResolutionTooSmall(r) => {
                write!(f, "oracle grid resolution {r} is below the minimum of 50")
            }
        }
    }
}

impl core::error::Error for DensityError {}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadtreeError {
    Canonical(CanonicalError),
    /// The segment does not fit the index's normalized domain. `required` is
    /// the bounding box `[min_x, min_y, max_x, max_y]` (original coordinates)
    /// that a rebuild must cover.
    OutOfDomain {
        id: u32,
        required: [f64; 4],
    },
}

impl fmt::Display for QuadtreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadtreeError::Canonical(e) => write!(f, "{e}"),
            QuadtreeError::OutOfDomain { id, required } => write!(
                f,
                "segment {id} lies outside the indexed domain; rebuild over \
                 [{}, {}] x [{}, {}]",
                required[0], required[2], required[1], required[3]
            ),
        }
    }
}

impl core::error::Error for QuadtreeError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            QuadtreeError::Canonical(e) => Some(e),
            QuadtreeError::OutOfDomain { .. } => None,
        }
    }
}

impl From<CanonicalError> for QuadtreeError {
    fn from(e: CanonicalError) -> Self {
        QuadtreeError::Canonical(e)
    }
}
