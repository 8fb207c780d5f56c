//! Construction schemes on finite and ω-prefix domains, their ordinal metrics, capturing,
//! the finite-condition forcing, and the derived AD, entangled and metric objects.

pub mod ad;
pub mod applications;
pub mod capturing;
pub mod delta;
pub mod error;
pub mod forcing;
pub mod io;
pub mod metrics;
pub mod ordinal;
pub mod scheme;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
pub use ordinal::OrdinalCode;
pub use scheme::{Block, SchemePrefix};
pub use types::TypeSpec;
