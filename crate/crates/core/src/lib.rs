//! String diagrams for strict physical duoidal categories.
//!
//! Objects are reduced duoidal expressions ([`expr`]); their symmetry classes are
//! the zetless (series-parallel) posets ([`poset`], [`zetless`]). Morphisms of the
//! free physical duoidal category over a [`signature`] are wire-linear acyclic
//! hypergraphs whose wires carry a derived zetless order ([`diagram`]). Diagrams
//! can be interpreted in any strict physical duoidal algebra ([`eval`]).
//!
//! The [`cli`] module is the batch front-end behind the `physduo` binary.

pub mod cli;
pub mod diagram;
pub mod eval;
pub mod expr;
mod lex;
pub mod poset;
pub mod signature;
pub mod zetless;

pub use diagram::{DiagramBuilder, DiagramError, StringDiagram};
pub use eval::{Algebra, SelfAlgebra, WeightAlgebra};
pub use expr::{par_e, seq_e, Expression};
pub use poset::TypedPoset;
pub use signature::{Signature, SignatureHom};
pub use zetless::{decode, encode, Inclusion, StructureTerm};
