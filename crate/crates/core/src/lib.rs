//! Construction and numerical verification of cohomogeneity-one Gray metrics
//! on ruled surfaces and on CP².

pub mod curvature;
pub mod families;
pub mod ode;
pub mod oracle;
pub mod poly;
pub mod quadrature;
pub mod verify;

/// Library version recorded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use curvature::{ac_report, eigen_difference_law, ricci_closed_form, ACReport, RicciSpectrum};
pub use families::{cp2_family, eta, genus_family, trivial_ruled_nonexistence, CaseTag, FamilySpec, ProductCase};
pub use ode::{boundary_report, synthesize_profile, BoundaryReport, Profile, ProfileGrid};
pub use oracle::{calibrate, ricci_fd, ChartKind, ChartPoint};
pub use poly::{certify_positive, real_roots, Polynomial};
pub use verify::{verify_family, FamilyVerification};
