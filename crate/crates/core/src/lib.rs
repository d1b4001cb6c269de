//! Exact computer algebra for properads.

pub mod error;
pub mod linear;
pub mod combinatorics;
pub mod properad;
pub mod frobenius;
pub mod endomorphism;
pub mod cobar;
pub mod master;
pub mod io;
