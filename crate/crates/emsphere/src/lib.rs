//! Semi-analytic Maxwell scattering for concentric layered spheres.
//!
//! A plane wave hits a sphere made of an impenetrable core (PEC or PMC) or a
//! penetrable core, wrapped in isotropic homogeneous shells. The solver
//! expands everything in vector spherical waves, matches tangential fields
//! across each interface with per-mode 2x2 transfer matrices, and produces
//! modal coefficients, near fields, far-field patterns and the norms needed
//! to study how well a penetrable core with extreme parameters imitates an
//! impenetrable one.
//!
//! Modules:
//! - [`specfun`]: spherical Bessel/Hankel and Riccati-Bessel functions for
//!   complex arguments, with exponentially scaled variants, plus the Mie
//!   angular functions.
//! - [`scene`]: scene/incidence data model and the effective-core material
//!   constructors.
//! - [`mie`]: the per-mode layered solve.
//! - [`calderon`]: the exterior Calderon operator on the artificial sphere.
//! - [`fields`]: point evaluation, far fields (two independent routes),
//!   sphere quadrature and region norms.
//! - [`verify`]: energy identity, weak-form residual, delta-ladder
//!   convergence studies and rate fitting.
//! - [`config`]: scene configuration files and run settings for the CLI.

pub mod calderon;
pub mod config;
pub mod fields;
pub mod mie;
pub mod quad;
pub mod scene;
pub mod specfun;
pub mod vec3;
pub mod verify;

use std::fmt;

/// Largest supported multipole order. Everything above fails loudly.
pub const N_CAP: u32 = 512;

#[derive(Debug)]
pub enum Error {
    /// Bad argument values (NaN, non-unit vectors, invalid ranges).
    InvalidArgument(String),
    /// Multipole order above [`N_CAP`].
    UnsupportedOrder(u32),
    /// z = 0 handed to a function with a pole at the origin.
    SingularArgument(&'static str),
    /// Result not representable even after exponential scaling.
    Range(String),
    /// Per-mode solve too ill-conditioned to trust (interior resonance).
    NumericalResonance {
        n: u32,
        parity: mie::Parity,
        condition: f64,
    },
    /// Point sits on a material interface; the region is ambiguous.
    AmbiguousRegion(f64),
    /// Operation called on a scene that does not satisfy its precondition.
    Precondition(String),
    /// Configuration file problems.
    Config(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            Error::UnsupportedOrder(n) => {
                write!(f, "order {n} above supported maximum {N_CAP}")
            }
            Error::SingularArgument(w) => write!(f, "singular argument: {w}"),
            Error::Range(m) => write!(f, "out of representable range: {m}"),
            Error::NumericalResonance {
                n,
                parity,
                condition,
            } => write!(
                f,
                "numerical resonance in mode (n={n}, {parity:?}): \
                 condition estimate {condition:.3e} exceeds 1e12"
            ),
            Error::AmbiguousRegion(r) => {
                write!(f, "point at radius {r} lies on a material interface")
            }
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::Config(m) => write!(f, "config error: {m}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
