use std::fmt;
use std::str::FromStr;

use crate::curve::{self, make_circle_with, ClosedCurve};
use crate::error::{Error, Result};
use crate::fourier::C64;
use crate::shrinker;

/// Named initial curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Unit circle.
    Circle,
    /// Unit circle traversed twice.
    Omega2,
    /// `r = 1 + 0.05 cos 3θ` traversed twice (`θ ∈ [0, 4π)`), keeping the
    /// two-fold symmetry.
    Omega2Balanced,
    /// `r = 1 + 0.1 cos 3θ`.
    Perturbed3,
    /// `r = 1 + 0.3 cos 3θ`, initially nonconvex.
    Perturbed3Large,
    /// Gerono figure-eight `(cos u, sin u cos u)`, winding 0.
    Figure8,
    /// Bernoulli lemniscate with `a = 1`, winding 0.
    Lemniscate,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Circle,
        Preset::Omega2,
        Preset::Omega2Balanced,
        Preset::Perturbed3,
        Preset::Perturbed3Large,
        Preset::Figure8,
        Preset::Lemniscate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Circle => "circle",
            Preset::Omega2 => "omega2",
            Preset::Omega2Balanced => "omega2-balanced",
            Preset::Perturbed3 => "perturbed3",
            Preset::Perturbed3Large => "perturbed3-large",
            Preset::Figure8 => "figure8",
            Preset::Lemniscate => "lemniscate",
        }
    }

    pub fn build(self, n_modes: usize) -> Result<ClosedCurve> {
        let origin = C64::new(0.0, 0.0);
        match self {
            Preset::Circle => make_circle_with(1.0, 1, origin, n_modes),
            Preset::Omega2 => make_circle_with(1.0, 2, origin, n_modes),
            Preset::Omega2Balanced => curve::from_sampler(n_modes, |u| {
                C64::from_polar(1.0 + 0.05 * (6.0 * u).cos(), 2.0 * u)
            }),
            Preset::Perturbed3 => curve::polar_curve(n_modes, |u| 1.0 + 0.1 * (3.0 * u).cos()),
            Preset::Perturbed3Large => {
                curve::polar_curve(n_modes, |u| 1.0 + 0.3 * (3.0 * u).cos())
            }
            Preset::Figure8 => {
                curve::from_sampler(n_modes, |u| C64::new(u.cos(), u.sin() * u.cos()))
            }
            Preset::Lemniscate => shrinker::lemniscate(1.0, n_modes),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.strip_prefix("preset:").unwrap_or(s);
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::InvalidParameter(format!("unknown preset {s:?}; expected one of {names:?}"))
            })
    }
}
