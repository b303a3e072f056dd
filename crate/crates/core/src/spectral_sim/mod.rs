//! Parametric structural models along the bridge-to-aeroplane morph, their
//! natural frequencies, and noisy healthy/damaged frequency datasets.
//!
//! Every structure in the chain shares one reduced-order topology: an
//! Euler-Bernoulli beam (the deck, or the fuselage at the aeroplane end)
//! resting on three equally spaced elastic supports, with translational
//! ground springs at both ends. Only the parameter values change along the
//! chain, so the morph is continuous.

mod beam;
mod dataset;
mod modal;
mod params;

pub use beam::{assemble_model, BeamModel, DEFAULT_ELEMENTS};
pub use dataset::{generate_dataset, sample_dataset, Condition, ModalDataset};
pub use modal::{natural_frequencies, RIGID_BODY_CUTOFF};
pub use params::{
    chain_parameters, interpolate_params, interpolate_params_with, DamageSpec, StiffnessSchedule,
    StructureParams, CRACK_CENTRE_FRACTION,
};

/// Number of natural frequencies kept as features.
pub const DEFAULT_MODES: usize = 15;
