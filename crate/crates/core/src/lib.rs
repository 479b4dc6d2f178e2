//! Numerical experiments on the geometry of high-dimensional image classes:
//! how much of a body sits near its boundary, how far a typical point is
//! from a decision boundary, and how those quantities scale with resolution.

pub mod adversarial;
pub mod geometry;
pub mod landscape;
pub mod lid;
pub mod montecarlo;
pub mod seed;
pub mod spectra;
pub mod stats;

pub use geometry::{ShapeKind, ShapeSpec, SurfaceDistance};
pub use montecarlo::Estimate;
pub use seed::Seed;

#[cfg(doctest)]
mod book {
    macro_rules! chapters {
        ($($name:ident = $file:literal;)*) => {
            $(#[doc = include_str!(concat!("../../../book/src/", $file))] mod $name {})*
        };
    }

    chapters! {
        introduction = "introduction.md";
        seeds = "seeds.md";
        concentration = "concentration.md";
        dilation = "dilation.md";
        spectra = "spectra.md";
        landscape = "landscape.md";
        lid = "lid.md";
        adversarial = "adversarial.md";
        cli = "cli.md";
    }
}
