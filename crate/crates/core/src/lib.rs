//! Idempotent (max-plus) probability measures with finite support over
//! finite metric spaces.
//!
//! The crate models compacts as finite metric spaces and implements the
//! subspace `I_f(X)` of measures with a single dominant atom together with
//! its retraction onto the Dirac measures, the explicit homotopies that
//! contract it, the weak-topology neighborhood machinery, and a seeded
//! property harness that checks all of it.

pub mod error;
pub mod harness;
pub mod homotopy;
pub mod maxplus;
pub mod measure;
pub mod space;
pub mod subspace;
pub mod topology;
pub mod wire;

pub use error::{Error, Result};
pub use maxplus::{ln_coeffs, odot, oplus, LnCoeffs, MaxPlus};
pub use measure::{
    eval_gap, pushforward, support_oracle, tropical_combination, verify_axioms, AxiomResiduals, IdempotentMeasure,
    Normalize,
};
pub use space::{
    build_space, compose_maps, verify_collapse, FiniteMetricSpace, HomotopyWitness, Point, PointSpec, SpaceMap,
    TestFunction,
};
pub use subspace::{
    ambient_merge, ambient_retract, classify, fibre_contains, neighborhood_retract, o_delta_contains, retract_to_dirac,
    AmbientRetractionData, IfClassification, RetractVariant,
};
