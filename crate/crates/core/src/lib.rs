//! Growth of hooking and bipolar networks under linear preferential
//! attachment, the Pólya urn describing their degree census, and Monte-Carlo
//! checks of the resulting central limit theorem.

pub mod analysis;
pub mod commands;
pub mod covariance;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod growth;
pub mod linalg;
pub mod model;
pub mod profile;
pub mod scalar;
pub mod sumtree;
pub mod urn;
pub mod verify;

pub use analysis::{Analysis, AnalysisReport, AnyModel, Model};
pub use error::{Error, Result};
pub use model::{parse_blockset, Block, BlockSet, InitialBlock, Kind, ModelError};
pub use profile::DegreeProfile;
pub use scalar::{Number, Scalar};
pub use urn::UrnModel;
pub use growth::{simulate, CensusVector, GrowthState, Mode, Simulator};
pub use verify::{Tolerances, VerificationReport, VerifyConfig};
