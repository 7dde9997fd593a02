//! Symmetric topological interlocking assemblies of the Versatile Block.
//!
//! The crate covers the full pipeline: planar isometries and the wallpaper
//! groups `p1`, `pg`, `p4`; the block mesh and its grid orientations;
//! Truchet-tiling encodings of assemblies; directional blocking graphs built
//! both from the tiling rule and from mesh geometry; the interlocking-flow
//! load model with an iterative and a closed-form solver; and enumeration and
//! ranking of every valid tiling of a rectangular grid.

pub mod assembly;
pub mod block;
pub mod blocking;
pub mod enumeration;
mod error;
pub mod export;
pub mod flows;
pub mod isometry;
pub mod mesh;
pub mod par;

pub use error::{Error, Result};
