//! Numerical toolkit for non-malleability and authentication of quantum encryption.

pub mod auth;
pub mod channels;
pub mod designs;
pub mod error;
pub mod lemmas;
pub mod linalg;
pub mod nm;
pub mod quantum;
pub mod random;
pub mod schemes;
pub mod serial;

pub use channels::{DiamondBounds, Isometry, QuantumChannel};
pub use error::{Error, Result};
pub use quantum::{DensityOperator, SystemLayout};
pub use designs::{DeficiencyReport, DesignNotion, UnitaryEnsemble};
pub use schemes::{EncryptionScheme, SchemeSpec};
pub use nm::{AttackScenario, EffectiveAttack, NamedAttack};
pub use auth::{DnsReport, KeywiseReport};
