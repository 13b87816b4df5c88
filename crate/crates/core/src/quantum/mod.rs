//! States, measurements, Bell operators and visibilities.

pub mod linalg;
mod model;
mod povm;
mod state;

pub use model::{
    behavior_of, bell_operator, eigen_residual, evaluate, ghz_value_closed_form, local_noise, min_eig_state,
    optimize_fourier_phases, visibility, FourierOptimum, FourierSearch, QuantumModel, Visibility,
};
pub use povm::{fourier_assemblage, fourier_povm, ghz_paradox_assemblage, psi3_assemblage, Assemblage, Povm};
pub use state::{ghz, state_factory, Ket, State, RANK_TOL};
pub(crate) use model::setting_operator;
pub(crate) use state::serde_cmat;
