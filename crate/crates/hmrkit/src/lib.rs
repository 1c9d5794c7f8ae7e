//! Metric perspective-camera toolkit for human mesh recovery: pinhole
//! geometry and camera ray maps, a procedural parametric body with
//! optimization-based keypoint fitting, a synthetic metric scene
//! generator, and the world-frame trajectory metric suite.

pub mod body;
pub mod camera;
pub mod cli;
pub mod fitting;
pub mod metrics;
pub mod svg;
pub mod synth;
