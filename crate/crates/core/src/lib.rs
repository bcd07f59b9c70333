//! Number walls over prime fields: exact arithmetic, a fast Frame Constraints
//! generator, the 2D morphism predicting the zero profile, and fractal dimension tools.

pub mod finite_field;
pub mod par;
pub mod sequences;
pub mod toeplitz_oracle;
pub mod wall_engine;
pub mod wall_geometry;
pub mod morphism2d;
pub mod fractal;
pub mod render;
pub mod verify;

pub use finite_field::{binom, binomial, FieldError, Fp, HalfInt, Prime};
pub use par::Exec;
pub use sequences::{Cell, Extension, Seq, SeqError};
pub use wall_engine::{
    detect_windows, generate_ra_wall, generate_wall, profile, EngineError, FrameLabel, ProfileCell, ProfileGrid, Side, Wall,
    WindowRecord,
};
