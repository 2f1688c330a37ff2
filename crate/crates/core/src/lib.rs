//! Lie point symmetries of ordinary difference schemes, their discrete
//! prolongation, and the contact-closure analysis showing that generalized
//! discrete transformations reduce to point transformations.

pub mod cli;
pub mod contact;
pub mod continuous;
pub mod error;
pub mod expr;
pub mod files;
pub mod prolong;
pub mod scheme;
pub mod stencil;

pub use error::{Error, Result};
