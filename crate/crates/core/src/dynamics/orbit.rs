//! Orbit generators for long Monte Carlo runs.
//!
//! Double-precision iteration of the doubling or tripling map collapses onto
//! the fixed point within ~53 steps (every f64 is a dyadic rational), so the
//! piecewise-linear maps are run on exact digit registers instead: a 63-bit
//! binary window for the doubling map and a 39-trit base-3 window for the
//! tripling map. Shifting the window and appending an independent random
//! digit reproduces the map's action on a Lebesgue-random point exactly.

use rand::Rng;

use crate::dynamics::{InducedScheme, MapSpec};
use crate::error::Result;

const MASK63: u64 = (1u64 << 63) - 1;
const POW2_63: f64 = 9_223_372_036_854_775_808.0;
const POW3_39: u64 = 4_052_555_153_018_976_267;
const POW3_38: u64 = 1_350_851_717_672_992_089;
const POW3_37: u64 = 450_283_905_890_997_363;

/// Exact or floating orbit state.
#[derive(Debug, Clone)]
pub enum ExactOrbit {
    /// Doubling map: x = reg / 2^63.
    Bits { reg: u64, buf: u64, left: u32 },
    /// Tripling map: x = reg / 3^39.
    Trits { reg: u64 },
    /// Any map, double precision.
    Float { x: f64, map: MapSpec },
}

impl ExactOrbit {
    pub fn bits_from_register(reg: u64) -> Self {
        ExactOrbit::Bits {
            reg: reg & MASK63,
            buf: 0,
            left: 0,
        }
    }

    pub fn float(x: f64, map: MapSpec) -> Self {
        ExactOrbit::Float { x, map }
    }

    /// Random start distributed per the scheme's reference measure on the
    /// whole interval (Lebesgue for the exact registers).
    pub fn random_anywhere<R: Rng>(scheme: &InducedScheme, rng: &mut R) -> Self {
        match scheme.map {
            MapSpec::Doubling => ExactOrbit::bits_from_register(rng.gen::<u64>() >> 1),
            MapSpec::Tripling => ExactOrbit::Trits {
                reg: rng.gen_range(0..POW3_39),
            },
            map => ExactOrbit::Float {
                x: {
                    let mut x: f64 = rng.gen_range(0.01..0.99);
                    for _ in 0..256 {
                        x = map.apply(x).unwrap_or_else(|_| rng.gen());
                    }
                    x
                },
                map,
            },
        }
    }

    /// Random start in the inducing set, distributed per mu_X.
    pub fn random_in_x<R: Rng>(scheme: &InducedScheme, rng: &mut R) -> Self {
        match scheme.map {
            MapSpec::Doubling => {
                ExactOrbit::bits_from_register((1 << 62) | (rng.gen::<u64>() >> 2))
            }
            MapSpec::Tripling => loop {
                let o = ExactOrbit::Trits {
                    reg: rng.gen_range(0..POW3_39),
                };
                if o.in_x(scheme) {
                    return o;
                }
            },
            map => ExactOrbit::Float {
                x: scheme.sample_mu_x(rng),
                map,
            },
        }
    }

    pub fn x(&self) -> f64 {
        match self {
            ExactOrbit::Bits { reg, .. } => *reg as f64 / POW2_63,
            ExactOrbit::Trits { reg } => *reg as f64 / POW3_39 as f64,
            ExactOrbit::Float { x, .. } => *x,
        }
    }

    pub fn in_x(&self, scheme: &InducedScheme) -> bool {
        match self {
            ExactOrbit::Bits { reg, .. } => reg >> 62 == 1,
            ExactOrbit::Trits { reg } => {
                let d1 = reg / POW3_38;
                let d2 = (reg / POW3_37) % 3;
                !((d1 == 0 && d2 == 1) || (d1 == 1 && d2 == 0))
            }
            ExactOrbit::Float { x, .. } => scheme.contains(*x),
        }
    }

    pub fn step<R: Rng>(&mut self, rng: &mut R) -> Result<()> {
        match self {
            ExactOrbit::Bits { reg, buf, left } => {
                if *left == 0 {
                    *buf = rng.gen();
                    *left = 64;
                }
                let bit = *buf & 1;
                *buf >>= 1;
                *left -= 1;
                *reg = ((*reg << 1) & MASK63) | bit;
                Ok(())
            }
            ExactOrbit::Trits { reg } => {
                let trit: u64 = rng.gen_range(0..3);
                *reg = (*reg % POW3_38) * 3 + trit;
                Ok(())
            }
            ExactOrbit::Float { x, map } => {
                *x = map.apply(*x)?;
                Ok(())
            }
        }
    }
}
