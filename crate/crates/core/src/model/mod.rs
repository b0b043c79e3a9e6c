//! Domain types shared across the toolkit: phases, region combinations, test
//! densities, sampled fiber integrals, asymptotic expansions and pole tables.

mod density;
mod expansion;
mod phase;
mod poles;
mod region;
mod samples;

pub use density::{cutoff_profile, TestDensity};
pub use expansion::{AsymptoticExpansion, Coset, ExponentLattice, ProfileKind, Side, Term};
pub use phase::{Family, PhaseGerm};
pub use poles::{parse_rational64, Pole, PoleRecord, PoleTable};
pub use region::{
    boundary_at_origin, enumerate_components, enumerate_components_with, Coef, Descriptor,
    RegionCombination, Sign,
};
pub use samples::{FiberSamples, SampleRow};
