//! Finite groupoids, internal covers, hypercube amalgamation and linear
//! codings over finite fields.

pub mod amalgam;
pub mod cover;
pub mod extension;
pub mod finstruct;
pub mod group;
pub mod groupoid;
pub mod linear;
pub mod permgroup;
