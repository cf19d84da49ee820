//! Spectral geometry of convex planar domains: support-function
//! representation, volume-preserving mean curvature flow, Dirichlet
//! Laplacian spectra with boundary traces, and the Riesz-mean family of
//! spectral functionals (counting, correlation, trace, Berezin–Li–Yau,
//! Weyl fits, Cesàro averages).

pub mod flow;
pub mod fourier;
pub mod geometry;
pub mod hash;
pub mod riesz;
pub mod spectral;

pub use flow::{flow_run, flow_step, FlowConfig, FlowState, FlowTrace};
pub use geometry::{BoundarySample, ConvexDomain2D, GeometryError, GeometryReport};
