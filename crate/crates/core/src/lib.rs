//! Longitudinal tail-sitter flight simulation with a small fixed-topology
//! multilayer perceptron that estimates the aerodynamic specific-force terms
//! `f1(u, w)` and `f2(u, w)`.
//!
//! The pipeline is: aerodynamic oracle ([`aero`]) → labelled samples
//! ([`dataset`]) → backpropagation training ([`train`]) → in-flight inference
//! over a scripted hover/transition/cruise flight ([`mission`]), integrated
//! with [`dynamics`].

pub mod aero;
pub mod alloc_probe;
pub mod dataset;
pub mod dynamics;
pub mod mission;
pub mod mlp;
pub mod train;

mod fmt;

pub use aero::{AeroParams, CoefficientTable, ForcePair};
pub use dataset::{Dataset, Ranges, Sample};
pub use dynamics::{AttitudeGains, BodyState, ControlInput};
pub use mission::{MissionPhase, PhaseName, TraceRecord};
pub use mlp::{Activation, InitScheme, Network, Scratch, Topology};
pub use train::{TrainConfig, TrainReport};
