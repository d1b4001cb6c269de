//! Frobenius properads: closed, open, and open-closed surfaces.

pub mod closed;
pub mod open;
pub mod open_closed;
pub mod oracle;

pub use closed::{closed_chi, closed_compose, stability_check, ClosedFrobenius, ClosedGenerator};
pub use open_closed::{oc_compose, OpenClosedGenerator};
pub use open::{
    cycle_decompositions, open_basis, open_glue, split_mixed_cycle, trace_mixed_cycles, GenusRule, OpenFrobenius,
    OpenSurface, Side,
};
