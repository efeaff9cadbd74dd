//! Recovery of strain, stress, Ψ and energy density from a displacement
//! field, crack-tip paths, crack-opening profiles and file export.

pub mod export;
pub mod sample;

pub use export::{
    export_csv, export_opening_csv, export_vtk, opening_csv, radial_csv, vtk_string, write_atomic, OPENING_HEADER,
    RADIAL_HEADER,
};
pub use sample::{
    crack_opening, default_r_min, field_distance, l2_error_against, locate, radial_samples, sample_at,
    tip_element_size, CrackOpeningProfile, FieldSample, PathSpec, RadialSample, SAMPLE_CLAMP_DELTA,
};
