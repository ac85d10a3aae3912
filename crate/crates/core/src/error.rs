use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("roll-off factor {0} outside [0, 1]")]
    InvalidRolloff(f64),

    #[error("bins per subcarrier must be even on this grid, got {0}")]
    OddBinsPerSubcarrier(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid filter input: {0}")]
    InvalidFilter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("offset modulation needs an even subcarrier count, got K={0}")]
    OddSubcarriers(usize),

    #[error("modulation matrix is singular for K={k}, M={m}, filter {filter} (condition estimate {cond:.3e})")]
    SingularModulationMatrix {
        k: usize,
        m: usize,
        filter: String,
        cond: f64,
    },

    #[error("zero-forcing detection requested but the modem holds no inverse")]
    NoZeroForcingDetector,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("{n_guard} guard subsymbols exceed the {subsymbols} subsymbols of a block")]
    TooManyGuardSymbols { n_guard: usize, subsymbols: usize },

    #[error("cyclic prefix of {cp} samples must be shorter than the block length {n}")]
    CyclicPrefixTooLong { cp: usize, n: usize },

    #[error(
        "cyclic prefix of {cp} samples is shorter than the channel memory of {memory} samples"
    )]
    CyclicPrefixTooShort { cp: usize, memory: usize },

    #[error("channel frequency response vanishes at bin {bin}")]
    DeepFade { bin: usize },

    #[error("burst of {symbols} symbols exceeds the pulse period of {periods} symbols")]
    BurstTooLong { symbols: usize, periods: usize },

    #[error("unknown configuration id '{0}'")]
    UnknownConfig(String),

    #[error("trial count must be positive")]
    ZeroTrials,

    #[error("signal of {len} samples is too short for one segment of {segment}")]
    SignalTooShort { len: usize, segment: usize },

    #[error("empty frequency band: {0}")]
    EmptyBand(&'static str),
}
