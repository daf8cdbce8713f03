pub mod driver;
pub mod error;
pub mod format;
pub mod numerics;
pub mod pencil;
pub mod random;
pub mod reproduce;
pub mod shh;
pub mod specializations;
pub mod tol;
pub mod update_structured;
pub mod update_unstructured;
pub mod verify;

pub use error::{Error, Result};
