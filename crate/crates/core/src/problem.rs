//! Problem description shared by the operators, weights and solver.

use std::fmt;
use std::str::FromStr;

use crate::domain::{Exhaustion, Region, TauMap};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operators::{Kernel, MultiMapF, OuterMap};

/// Shape of the fixed-point equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// `u(x) ∈ g(x, u(x)) + V(w)(x)`.
    Additive,
    /// `u(x) = g(x, u(x), V(w)(x))`.
    Nested,
    /// `u(x) ∈ G(x, V(w)(x))`, solved through the Steiner selection.
    SetValued,
}

impl Form {
    pub fn code(self) -> u32 {
        match self {
            Form::Additive => 13,
            Form::Nested => 21,
            Form::SetValued => 24,
        }
    }

    pub fn from_code(code: i64) -> Option<Form> {
        match code {
            13 => Some(Form::Additive),
            21 => Some(Form::Nested),
            24 => Some(Form::SetValued),
            _ => None,
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Which point of the interval `F(x, u)` the Nemytskii selection picks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Midpoint,
    Lower,
    Upper,
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Strategy::Midpoint),
            "lower" => Ok(Strategy::Lower),
            "upper" => Ok(Strategy::Upper),
            other => Err(Error::InvalidProblem(format!(
                "unknown strategy `{other}` (expected midpoint, lower or upper)"
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Midpoint => "midpoint",
            Strategy::Lower => "lower",
            Strategy::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Discretization {
    /// Exhaustion index solved on.
    pub n: usize,
    pub h: f64,
    /// Step of the grid used by the weight functional (defaults per dimension).
    pub h_phi: Option<f64>,
    pub tol_fix: f64,
    pub max_iter: usize,
    pub strategy: Strategy,
    /// `a_n = a_scale * n`; `None` picks the scale automatically.
    pub a_scale: Option<f64>,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            n: 1,
            h: 1.0 / 64.0,
            h_phi: None,
            tol_fix: 1e-10,
            max_iter: 1000,
            strategy: Strategy::Midpoint,
            a_scale: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub form: Form,
    pub exhaustion: Exhaustion,
    pub region: Region,
    pub tau: TauMap,
    pub kernel: Kernel,
    pub f: MultiMapF,
    pub outer: OuterMap,
    pub disc: Discretization,
}

impl ProblemSpec {
    pub fn new(
        exhaustion: Exhaustion,
        region: Region,
        tau: TauMap,
        kernel: Kernel,
        f: MultiMapF,
        outer: OuterMap,
        disc: Discretization,
    ) -> Result<ProblemSpec> {
        let dim = exhaustion.dim();
        if region.dim() != dim || kernel.dim() != dim || f.dim() != dim || outer.dim() != dim {
            return Err(Error::InvalidProblem(format!(
                "dimension mismatch: domain {dim}, region {}, kernel {}, F {}, outer map {}",
                region.dim(),
                kernel.dim(),
                f.dim(),
                outer.dim()
            )));
        }
        let m = f.components();
        if kernel.components() != m || outer.components() != m {
            return Err(Error::InvalidProblem(format!(
                "state dimension mismatch: F has {m}, kernel {}, outer map {}",
                kernel.components(),
                outer.components()
            )));
        }
        if disc.n == 0 || !(disc.h > 0.0) || !(disc.tol_fix > 0.0) || disc.max_iter == 0 {
            return Err(Error::InvalidProblem(
                "need n >= 1, h > 0, tol_fix > 0 and max_iter >= 1".into(),
            ));
        }
        Ok(ProblemSpec {
            form: outer.form(),
            exhaustion,
            region,
            tau,
            kernel,
            f,
            outer,
            disc,
        })
    }

    pub fn dim(&self) -> usize {
        self.exhaustion.dim()
    }

    pub fn components(&self) -> usize {
        self.f.components()
    }

    /// Solve grid of exhaustion member `n`.
    pub fn grid(&self, n: usize) -> Result<Grid<f64>> {
        Grid::over(&self.exhaustion.member(n), self.disc.h)
    }

    /// Grid for the weight functional on member `n`.
    pub fn phi_grid(&self, n: usize) -> Result<Grid<f64>> {
        let member = self.exhaustion.member(n);
        let h = match self.disc.h_phi {
            Some(h) => h,
            None if self.dim() == 1 => self.disc.h,
            None => {
                let ext = (0..self.dim())
                    .map(|i| member.upper[i] - member.lower[i])
                    .fold(0.0, f64::max);
                self.disc.h.max(ext / 24.0)
            }
        };
        Grid::over(&member, h)
    }

    pub fn with_n(&self, n: usize) -> ProblemSpec {
        let mut s = self.clone();
        s.disc.n = n;
        s
    }

    pub fn with_h(&self, h: f64) -> ProblemSpec {
        let mut s = self.clone();
        s.disc.h = h;
        s
    }
}
