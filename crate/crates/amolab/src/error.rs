use thiserror::Error;

/// Errors produced by the laboratory's operations.
#[derive(Error, Debug)]
pub enum Error {
    #[error("continued-fraction input must lie strictly in (0,1), got {0}")]
    PhaseOutOfRange(String),

    #[error("expansion depth must be positive")]
    BadDepth,

    #[error("convergent too shallow: |k| = {k} is not below q_{level} = {q}")]
    ConvergentTooShallow { k: String, level: usize, q: String },

    #[error("level {level} would need ~{predicted_digits} decimal digits, over the budget of {budget}")]
    DigitBudget {
        level: usize,
        predicted_digits: u64,
        budget: u64,
    },

    #[error("frequency stores no level {0}")]
    NoSuchLevel(usize),

    #[error("site y = 0 is excluded from resonance classification")]
    ZeroSite,

    #[error("eta must lie in (0, 1/20), got {0}")]
    BadEta(f64),

    #[error("site {0} is outside the resolvable range of the stored convergents")]
    SiteOutOfRange(i64),

    #[error("Sturm sequence hit an exact zero at step {0}; perturb E and retry")]
    SturmBoundary(usize),

    #[error("energy is resonant with the interval [{x1}, {x2}]: pivot underflow at row {row}")]
    ResonantInterval { x1: i64, x2: i64, row: usize },

    #[error("interval [{x1}, {x2}] is not strictly inside the vector's domain [{lo}, {hi}]")]
    IntervalOutsideDomain { x1: i64, x2: i64, lo: i64, hi: i64 },

    #[error("max_hops must be >= 1")]
    BadHopCap,

    #[error("no resonance scale admits the expansion at distance {dist}")]
    NoExpansionScale { dist: String },

    #[error("theta set points {i} and {j} collide as cosine values (separation {sep})")]
    DegenerateNodes { i: usize, j: usize, sep: String },

    #[error("theta set needs at least two points")]
    TooFewNodes,

    #[error("uniformity violation: no index reaches the interpolation lower bound (best margin {best})")]
    UniformityViolation { best: f64, margins: Vec<f64> },

    #[error("inverse iteration failed to converge for eigenvalue near {0}")]
    InverseIteration(f64),

    #[error("vector is not localized; decay fit is meaningless")]
    NotLocalized,

    #[error("level too deep for box: q_n = {q} exceeds the box diameter {diam}")]
    LevelTooDeep { q: String, diam: i64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cache format error: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
