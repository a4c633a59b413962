use thiserror::Error;

/// Errors raised while building circuits, states and devices or while simulating them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("cannot normalize a state with zero norm")]
    ZeroNorm,

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("channel {channel} out of range (circuit has {nchannels} channels)")]
    ChannelOutOfRange { channel: usize, nchannels: usize },

    #[error("duplicate target {0}")]
    DuplicateTarget(usize),

    #[error("polarization element on an unpolarized circuit")]
    Unpolarized,

    #[error("qubit encoding: {0}")]
    Encoding(String),

    #[error("photon number mismatch: expected {expected}, found {found}")]
    PhotonNumber { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("degenerate packet {index}: linearly dependent on earlier packets")]
    DegeneratePacket { index: usize },

    #[error("packet shapes differ; mixed Gaussian/exponential overlaps are unsupported")]
    MixedShapes,

    #[error("packet capacity exceeded: {0}")]
    Capacity(String),

    #[error("emitter already applied")]
    EmitterApplied,

    #[error("singular value {0} exceeds one: amplifying circuits are unsupported")]
    Gain(f64),

    #[error("sampler: {0}")]
    Sampler(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("channel {0} already has a detector")]
    DuplicateDetector(usize),

    #[error("gate composition: {0}")]
    Gate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
