//! File formats: fleet CSV, reference lists, session documents and exports.

pub mod export;
pub mod fixtures;
pub mod fleet;
pub mod lists;
pub mod session;

pub use export::{ExportProvenance, SweepExport};
pub use fleet::{parse_fleet, Fleet, FleetMode, Strictness};
pub use lists::{parse_reference_lists, MissingListEntry};
pub use session::{SessionDerived, SessionDocument, ValidationReport, ZSource, SESSION_VERSION};
