use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math::{self, exp, norm, pow, unit_sphere_area};

/// Radial shape of a single-site potential.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "shape", rename_all = "snake_case")
)]
pub enum Profile {
    /// `height · χ_{B(0, radius)}`.
    Indicator { height: f64, radius: f64 },
    /// `height · exp(1 - 1/(1 - (|x|/radius)²))` inside the ball.
    Bump { height: f64, radius: f64 },
    /// Piecewise-linear in `|x|` through `(radii[k], values[k])`, zero past
    /// the last node.
    Radial { radii: Vec<f64>, values: Vec<f64> },
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        match self {
            Profile::Indicator { height, radius } | Profile::Bump { height, radius } => {
                if !height.is_finite() || !(*radius >= 0.0) {
                    return Err(invalid("profile needs a finite height and radius >= 0"));
                }
            }
            Profile::Radial { radii, values } => {
                if radii.len() != values.len() || radii.is_empty() {
                    return Err(invalid("radial table needs matching nonempty columns"));
                }
                if radii[0] < 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid("radial table radii must increase from >= 0"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("radial table values must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Value at distance `r` from the site.
    pub fn at_radius(&self, r: f64) -> f64 {
        match self {
            Profile::Indicator { height, radius } => {
                if r <= *radius {
                    *height
                } else {
                    0.0
                }
            }
            Profile::Bump { height, radius } => {
                if r < *radius {
                    let t = r / radius;
                    height * exp(1.0 - 1.0 / (1.0 - t * t))
                } else {
                    0.0
                }
            }
            Profile::Radial { radii, values } => {
                let last = radii.len() - 1;
                if r > radii[last] {
                    return 0.0;
                }
                if r <= radii[0] {
                    return values[0];
                }
                let k = radii.partition_point(|&x| x <= r).min(last);
                let (r0, r1) = (radii[k - 1], radii[k]);
                let (v0, v1) = (values[k - 1], values[k]);
                v0 + (v1 - v0) * (r - r0) / (r1 - r0)
            }
        }
    }

    /// Radius outside which the profile vanishes.
    pub fn support_radius(&self) -> f64 {
        match self {
            Profile::Indicator { height, radius } | Profile::Bump { height, radius } => {
                if *height == 0.0 {
                    0.0
                } else {
                    *radius
                }
            }
            Profile::Radial { radii, values } => {
                let mut sup = 0.0;
                for k in 0..radii.len() {
                    if values[k] != 0.0 {
                        // A nonzero node also makes the segment to the next
                        // node nonzero.
                        sup = if k + 1 < radii.len() {
                            radii[k + 1]
                        } else {
                            radii[k]
                        };
                    }
                }
                sup
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match self {
            Profile::Indicator { height, .. } | Profile::Bump { height, .. } => height.abs(),
            Profile::Radial { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Sign pattern of the profile values.
    pub fn sign(&self) -> Sign {
        let (mut pos, mut neg) = (false, false);
        let mut see = |v: f64| {
            pos |= v > 0.0;
            neg |= v < 0.0;
        };
        match self {
            Profile::Indicator { height, .. } | Profile::Bump { height, .. } => see(*height),
            Profile::Radial { values, .. } => values.iter().for_each(|v| see(*v)),
        }
        match (pos, neg) {
            (true, true) => Sign::Indefinite,
            (_, true) => Sign::Nonpositive,
            _ => Sign::Nonnegative,
        }
    }

    /// `‖f‖_p` in `ℝ^d`, by radial quadrature (closed form for indicators).
    pub fn lp_norm(&self, dim: usize, p: f64) -> f64 {
        let area = unit_sphere_area(dim);
        match self {
            Profile::Indicator { height, radius } => {
                height.abs() * pow(math::ball_volume(dim, *radius), 1.0 / p)
            }
            _ => {
                let sup = self.support_radius();
                if sup == 0.0 {
                    return 0.0;
                }
                // Composite Simpson in r on [0, sup].
                let m = 4000usize;
                let h = sup / m as f64;
                let g = |r: f64| pow(self.at_radius(r).abs(), p) * area * pow(r, dim as f64 - 1.0);
                let mut s = g(0.0) + g(sup);
                for k in 1..m {
                    let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                    s += w * g(k as f64 * h);
                }
                pow(s * h / 3.0, 1.0 / p)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum Sign {
    Nonnegative,
    Nonpositive,
    Indefinite,
}

/// Certificate `|f| ≥ c` on `B(0, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LowerBump {
    pub c: f64,
    pub s: f64,
}

/// `f_i` with its declared support radius `ρ`, `L^p` exponent and bound.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SingleSitePotential {
    pub profile: Profile,
    pub rho: f64,
    pub p_exponent: f64,
    pub norm_bound: f64,
    pub sign: Sign,
    #[cfg_attr(feature = "serde", serde(default))]
    pub lower_bump: Option<LowerBump>,
}

impl SingleSitePotential {
    /// A potential whose declared data are read off the profile.
    pub fn from_profile(profile: Profile, dim: usize, p_exponent: f64) -> Result<Self> {
        profile.validate()?;
        let rho = profile.support_radius();
        let norm_bound = profile.lp_norm(dim, p_exponent) * 1.01;
        let sign = profile.sign();
        Ok(SingleSitePotential {
            profile,
            rho,
            p_exponent,
            norm_bound,
            sign,
            lower_bump: None,
        })
    }

    pub fn with_lower_bump(mut self, c: f64, s: f64) -> Self {
        self.lower_bump = Some(LowerBump { c, s });
        self
    }

    pub fn eval(&self, offset: &[f64]) -> f64 {
        self.profile.at_radius(norm(offset))
    }

    /// Radius within which sites have to be summed to evaluate `V_ω`.
    pub fn reach(&self) -> f64 {
        self.rho.max(self.profile.support_radius())
    }
}

/// Background potential `V₀`.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum Background {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `pattern[(Σ_k ⌊x_k / cell⌋) mod len]`: a checkerboard-like periodic
    /// potential on cubes of side `cell`.
    Periodic {
        cell: f64,
        pattern: Vec<f64>,
    },
}

impl Background {
    pub fn validate(&self) -> Result<()> {
        match self {
            Background::Zero => Ok(()),
            Background::Constant { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("background constant must be finite"))
                }
            }
            Background::Periodic { cell, pattern } => {
                if !(*cell > 0.0) || pattern.is_empty() || pattern.iter().any(|v| !v.is_finite()) {
                    Err(invalid(
                        "periodic background needs cell > 0 and finite pattern",
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn at(&self, x: &[f64]) -> f64 {
        match self {
            Background::Zero => 0.0,
            Background::Constant { value } => *value,
            Background::Periodic { cell, pattern } => {
                let s: i64 = x.iter().map(|c| math::floor(c / cell) as i64).sum();
                pattern[s.rem_euclid(pattern.len() as i64) as usize]
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match self {
            Background::Zero => 0.0,
            Background::Constant { value } => value.abs(),
            Background::Periodic { pattern, .. } => pattern.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// `sup_x ‖V₀‖_{L^p(B(x,1))}` estimated by quadrature over unit balls
    /// centred on a grid covering one period (the potential is periodic or
    /// constant, so this is the full supremum up to grid error).
    pub fn local_lp_norm(&self, dim: usize, p: f64) -> f64 {
        match self {
            Background::Zero => 0.0,
            Background::Constant { value } => {
                value.abs() * pow(math::ball_volume(dim, 1.0), 1.0 / p)
            }
            Background::Periodic { cell, .. } => {
                if dim > 3 {
                    return self.sup_abs() * pow(math::ball_volume(dim, 1.0), 1.0 / p);
                }
                let h = match dim {
                    1 => 0.002,
                    2 => 0.02,
                    _ => 0.08,
                };
                let per = (cell * self.period_len() as f64).min(4.0);
                let centres_per_axis = 8usize;
                let mut best = 0.0f64;
                let mut c = alloc::vec![0usize; dim];
                loop {
                    let centre: Vec<f64> = c
                        .iter()
                        .map(|&k| per * k as f64 / centres_per_axis as f64)
                        .collect();
                    best = best.max(self.ball_lp(&centre, p, h));
                    let mut k = 0;
                    loop {
                        if k == dim {
                            return pow(best, 1.0 / p);
                        }
                        c[k] += 1;
                        if c[k] < centres_per_axis {
                            break;
                        }
                        c[k] = 0;
                        k += 1;
                    }
                }
            }
        }
    }

    fn period_len(&self) -> usize {
        match self {
            Background::Periodic { pattern, .. } => pattern.len(),
            _ => 1,
        }
    }

    /// `∫_{B(centre,1)} |V₀|^p` by a midpoint grid of spacing `h`.
    fn ball_lp(&self, centre: &[f64], p: f64, h: f64) -> f64 {
        let dim = centre.len();
        let m = math::ceil(1.0 / h) as i64;
        let mut idx = alloc::vec![-m; dim];
        let mut x = alloc::vec![0.0; dim];
        let cell = math::powi(h, dim as i32);
        let mut total = 0.0;
        loop {
            let mut r2 = 0.0;
            for k in 0..dim {
                let off = (idx[k] as f64 + 0.5) * h;
                r2 += off * off;
                x[k] = centre[k] + off;
            }
            if r2 <= 1.0 {
                total += pow(self.at(&x).abs(), p) * cell;
            }
            let mut k = 0;
            loop {
                if k == dim {
                    return total;
                }
                idx[k] += 1;
                if idx[k] < m {
                    break;
                }
                idx[k] = -m;
                k += 1;
            }
        }
    }
}
