pub mod catalog;
pub mod cohomology;
pub mod collections;
pub mod error;
pub mod fan;
pub mod fibration;
pub mod format;
pub mod homology;
pub mod lattice;
