//! Conjugate-root OQAM multicarrier modulation.
//!
//! The crate covers prototype filter design on a block DFT grid, burst-mode
//! linear OFDM/OQAM, a circular GFDM block modem with QAM and offset-QAM
//! modes, a Rayleigh multipath channel with time-reversal space-time coding,
//! and the Monte-Carlo and spectral measurements built on top of them.

pub mod channel;
pub mod dft;
pub mod error;
pub mod filters;
pub mod gfdm;
pub mod linalg;
pub mod oqam;
pub mod psd;
pub mod qam;
pub mod ser;
pub mod stc;

pub use error::{Error, Result};
pub use filters::{FilterFamily, FilterGrid, IciResponse, PrototypeFilter};
pub use gfdm::{
    build_modem, Detector, GfdmBlock, GfdmConfig, GfdmModem, ModulationMode, Table1Column,
};
pub use oqam::{OqamBurstConfig, PhaseMode, SymbolGrid};
