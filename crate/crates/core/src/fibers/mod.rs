//! Preimage curves ("fibers") of regular targets, their winding numbers,
//! and the current they carry.

mod current;
mod io;
mod trace;
mod transverse;
mod winding;

pub use current::{current_at, current_divergence, disk_flux, fiber_flux, string_current_at};
pub use io::{CurveFile, CurveRecord, CURVE_FORMAT, CURVE_FORMAT_VERSION};
pub use trace::{
    auto_domain, choose_chart, extract_fibers, ExtractionMetadata, ExtractionOptions, FiberCurve, FiberDomain,
    KnotFamily,
};
pub use transverse::{target_from_angles, transverse_coordinates, TargetFrame, ANTIPODE_TOL};
pub use winding::{transverse_plane, winding_number, winding_of};
