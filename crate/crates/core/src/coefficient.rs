//! Named diffusion coefficients on `[0,1]^d`.
//!
//! Every preset has a 1D and a 2D form; the 2D form of a separable-looking
//! preset uses the coordinate sum where the 1D form uses `x`.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficient {
    /// `a ≡ 1`
    One,
    /// `e^x`, `e^{x+y}`
    ExpXy,
    /// `1 + 2√x`, `1 + 2√x + y`
    SqrtMix,
    /// 1D: `1` for `x ≤ 1/2`, else `2`. 2D: `1` for `y ≥ x`, else `2`.
    Jump,
    /// `10x + 1`, `10(x+y) + 1`
    X10,
    /// `|x−1/2| + 1`, `|x−1/2| + |y−1/2| + 1`
    AbsCentered,
    /// `1` when every coordinate is `≤ 1/2`, else `5000`.
    Jump5000,
    Constant(f64),
}

impl Coefficient {
    pub const PRESETS: [Coefficient; 7] = [
        Coefficient::One,
        Coefficient::ExpXy,
        Coefficient::SqrtMix,
        Coefficient::Jump,
        Coefficient::X10,
        Coefficient::AbsCentered,
        Coefficient::Jump5000,
    ];

    pub fn one() -> Self {
        Self::One
    }

    pub fn constant(c: f64) -> Self {
        Self::Constant(c)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::One | Self::Constant(_))
    }

    pub fn name(&self) -> String {
        match self {
            Self::One => "one".into(),
            Self::ExpXy => "exp_xy".into(),
            Self::SqrtMix => "sqrt_mix".into(),
            Self::Jump => "jump".into(),
            Self::X10 => "x10".into(),
            Self::AbsCentered => "abs_centered".into(),
            Self::Jump5000 => "jump5000".into(),
            Self::Constant(c) => format!("const{c}"),
        }
    }

    /// Evaluates at a point of `[0,1]` or `[0,1]^2`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let sum: f64 = x.iter().sum();
        match self {
            Self::One => 1.0,
            Self::Constant(c) => *c,
            Self::ExpXy => sum.exp(),
            Self::SqrtMix => 1.0 + 2.0 * x[0].max(0.0).sqrt() + x.get(1).copied().unwrap_or(0.0),
            Self::Jump => match x {
                [x] => {
                    if *x <= 0.5 {
                        1.0
                    } else {
                        2.0
                    }
                }
                [x, y, ..] => {
                    if y >= x {
                        1.0
                    } else {
                        2.0
                    }
                }
                [] => 1.0,
            },
            Self::X10 => 10.0 * sum + 1.0,
            Self::AbsCentered => 1.0 + x.iter().map(|v| (v - 0.5).abs()).sum::<f64>(),
            Self::Jump5000 => {
                if x.iter().all(|&v| v <= 0.5) {
                    1.0
                } else {
                    5000.0
                }
            }
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Coefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::PRESETS
            .into_iter()
            .find(|c| c.name() == s)
            .or_else(|| s.strip_prefix("const").and_then(|v| v.parse().ok()).map(Self::Constant))
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown coefficient {s}; presets: one, exp_xy, sqrt_mix, jump, x10, abs_centered, jump5000, const<value>"
                ))
            })
    }
}
