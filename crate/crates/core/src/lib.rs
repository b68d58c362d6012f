//! Quantum analytic descent: a classical surrogate of a variational energy
//! landscape built from a handful of shifted energy queries, and the
//! two-loop optimizer that descends on it.

pub mod ansatz;
pub mod descent;
pub mod error;
pub mod lanczos;
pub mod linalg;
pub mod metric;
pub mod pauli;
pub mod presets;
pub mod scalar;
pub mod scaling;
pub mod simulator;
pub mod surrogate;

pub use error::{QadError, Result};
pub use scalar::Real;

pub type StateVector64 = simulator::StateVector<f64>;
pub type StateVector32 = simulator::StateVector<f32>;
pub type PauliSum64 = pauli::PauliSum<f64>;
pub type PauliSum32 = pauli::PauliSum<f32>;
pub type AnsatzCircuit64 = ansatz::AnsatzCircuit<f64>;
pub type AnsatzCircuit32 = ansatz::AnsatzCircuit<f32>;
pub type SurrogateModel64 = surrogate::SurrogateModel<f64>;
pub type SurrogateModel32 = surrogate::SurrogateModel<f32>;
pub type MetricTensor64 = metric::MetricTensor<f64>;
pub type MetricTensor32 = metric::MetricTensor<f32>;
pub type OptimizationTrace64 = descent::OptimizationTrace<f64>;
pub type OptimizationTrace32 = descent::OptimizationTrace<f32>;
