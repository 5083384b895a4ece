use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row} of a stochastic matrix sums to {sum:.17e}, expected 1 within 1e-12")]
    RowNotStochastic { row: usize, sum: f64 },
    #[error("matrix must be square with at least one state")]
    BadMatrixShape,
    #[error("sampling chain assigns positive probability to forbidden transition {from}->{to}")]
    ChainNotCompatible { from: usize, to: usize },
    #[error("no unique stationary vector: chain is reducible or the solve did not close (residual {residual:.3e})")]
    NoStationaryVector { residual: f64 },
    #[error("weights must be non-negative and sum to 1 within 1e-12 (sum = {0:.17e})")]
    BadWeights(f64),
    #[error("point {0} lies outside [0, 1]")]
    PointOutOfRange(f64),
    #[error("intermittency exponent must lie in (0, 1), got {0}")]
    BadIntermittencyExponent(f64),
    #[error("orbit point {point:.17e} fell below the deepest precomputed boundary a_{depth}; request a deeper ladder")]
    LadderTooShallow { point: f64, depth: usize },
    #[error("word must be non-empty")]
    EmptyWord,
    #[error("word is inadmissible for this system")]
    InadmissibleWord,
    #[error("symbols {from} and {to} do not communicate; recurrence time is infinite")]
    NoFiniteRecurrence { from: u32, to: u32 },
    #[error("cylinder selection gave up: {accepted} accepted in {attempts} draws (rejection rate above 99.9%)")]
    SelectionExhausted { attempts: usize, accepted: usize },
    #[error("stream too short: need {need} symbols, have {have}")]
    StreamTooShort { need: usize, have: usize },
    #[error("k_max = {0} exceeds the supported maximum 10^6")]
    KMaxTooLarge(usize),
    #[error("index k = {k} outside the valid range [1, {k_max})")]
    IndexOutOfRange { k: usize, k_max: usize },
    #[error("mixing sequence alpha(k) is defined for k >= 1")]
    AlphaAtZero,
    #[error("polynomial mixing profile needs beta > 1 to be summable, got beta = {0}")]
    NotSummable(f64),
    #[error("mixing table must be non-negative and non-increasing")]
    BadMixingTable,
    #[error("empirical alpha is only available for Bernoulli and Markov measure models")]
    EmpiricalAlphaUnsupported,
    #[error("enumeration of size {size} exceeds the cap {cap}")]
    EnumerationTooLarge { size: u128, cap: u128 },
    #[error("return time must be integrable: mean return is not finite")]
    NonIntegrableReturn,
    #[error("tower needs at least one branch and all return times >= 1")]
    BadTowerSpec,
    #[error("power iteration did not converge within {0} steps")]
    PowerIterationStalled(usize),
    #[error("initial density must be non-negative and sum to 1 (sum = {0:.17e})")]
    BadDensity(f64),
    #[error("gap delta = {delta} must exceed the word length n = {n}")]
    GapTooSmall { delta: usize, n: usize },
    #[error("gap delta must be >= 1")]
    GapZero,
    #[error("nothing to optimize: exact-zero mixing makes delta = 1 trivially optimal")]
    NothingToOptimize,
    #[error("rate hypothesis violated: need beta > 1 + eta (beta = {beta}, eta = {eta})")]
    RateHypothesisViolated { beta: f64, eta: f64 },
    #[error("gap optimization needs an exponential or polynomial profile")]
    UnsupportedProfile,
    #[error("tower bound needs the outer-cylinder measure mu_a_outer")]
    MissingOuterMeasure,
    #[error("bound input out of range: {0}")]
    BadBoundInput(&'static str),
    #[error("invalid tower config: {0}")]
    BadTowerConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
