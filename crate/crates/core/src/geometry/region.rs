use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{self, acos, cos, dist, dot, norm, sin, sqrt, PI};
use crate::rng::Stream;

/// Upper limit on the number of surface samples used by sampled distance
/// fallbacks; the reported tolerance grows when the limit binds.
pub const MAX_SURFACE_SAMPLES: usize = 200_000;

const MEMBERSHIP_TOL: f64 = 1e-9;

/// Open spherical cap removed from a sphere: directions at angle strictly
/// less than `half_angle` from `direction`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hole {
    pub direction: Vec<f64>,
    pub half_angle: f64,
}

/// Building block of a [`RegionSet`].
///
/// `Annulus`, `Cap` and `PerforatedSphere` are centred at the origin.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "shape", rename_all = "snake_case")
)]
pub enum Primitive {
    Point {
        center: Vec<f64>,
    },
    /// Closed ball `B(center, radius)`.
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `∂B(center, radius)`.
    Sphere {
        center: Vec<f64>,
        radius: f64,
    },
    /// `A_{r,R} = B(0,R) ∖ B(0,r)`, i.e. `r < |x| ≤ R`. Distances use the
    /// closure.
    Annulus {
        inner: f64,
        outer: f64,
    },
    /// `∂B(0, radius) ∩ B(radius·direction, ball_radius)`: the directions
    /// within `half_angle` of `direction`.
    Cap {
        radius: f64,
        direction: Vec<f64>,
        half_angle: f64,
        ball_radius: f64,
    },
    /// Closure of `∂B(0, radius)` minus a family of open caps.
    PerforatedSphere {
        radius: f64,
        holes: Vec<Hole>,
    },
    /// Axis-aligned box `[lo, hi]`.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

/// A distance together with the tolerance of the method that produced it.
/// Exact routes report a zero tolerance; the true distance lies in
/// `[value - tolerance, value]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub value: f64,
    pub tolerance: f64,
}

impl Distance {
    fn exact(value: f64) -> Self {
        Distance {
            value,
            tolerance: 0.0,
        }
    }

    /// Certified lower bound for the true distance.
    pub fn lower_bound(&self) -> f64 {
        (self.value - self.tolerance).max(0.0)
    }

    fn min(self, other: Distance) -> Distance {
        if other.value < self.value {
            other
        } else if other.value == self.value {
            Distance {
                value: self.value,
                tolerance: self.tolerance.max(other.tolerance),
            }
        } else {
            self
        }
    }
}

/// A compact subset of `ℝ^d` given as a finite union of primitives.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionSet {
    pub dim: usize,
    pub primitives: Vec<Primitive>,
}

fn angle_between(u: &[f64], v: &[f64]) -> f64 {
    acos(dot(u, v))
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        None
    } else {
        Some(v.iter().map(|x| x / n).collect())
    }
}

/// Distance from a point at norm `t` to a point at norm `r` separated by
/// angle `phi`.
fn chord(t: f64, r: f64, phi: f64) -> f64 {
    let s = sin(0.5 * phi);
    sqrt((t - r) * (t - r) + 4.0 * t * r * s * s)
}

/// Direction obtained by rotating unit vector `from` towards unit vector
/// `to` by `angle`, within their common plane.
fn rotate_towards(from: &[f64], to: &[f64], angle: f64) -> Vec<f64> {
    let c = dot(from, to);
    let mut perp: Vec<f64> = to.iter().zip(from).map(|(t, f)| t - c * f).collect();
    let pn = norm(&perp);
    if pn < 1e-12 {
        // `to` is parallel to `from`; any perpendicular works.
        perp = vec![0.0; from.len()];
        let k = (0..from.len())
            .min_by(|&a, &b| from[a].abs().total_cmp(&from[b].abs()))
            .unwrap_or(0);
        perp[k] = 1.0;
        let c2 = from[k];
        for (p, f) in perp.iter_mut().zip(from) {
            *p -= c2 * f;
        }
        let n2 = norm(&perp);
        for p in perp.iter_mut() {
            *p /= n2;
        }
    } else {
        for p in perp.iter_mut() {
            *p /= pn;
        }
    }
    from.iter()
        .zip(&perp)
        .map(|(f, p)| cos(angle) * f + sin(angle) * p)
        .collect()
}

/// Deterministic directions covering `S^{d-1}` with roughly the requested
/// angular spacing. Returns the directions and the achieved spacing.
fn sphere_directions(dim: usize, angular_spacing: f64) -> (Vec<Vec<f64>>, f64) {
    match dim {
        1 => (vec![vec![1.0], vec![-1.0]], 0.0),
        2 => {
            let mut m = math::ceil(2.0 * PI / angular_spacing.max(1e-9)) as usize;
            m = m.clamp(8, MAX_SURFACE_SAMPLES);
            let step = 2.0 * PI / m as f64;
            let dirs = (0..m)
                .map(|k| {
                    let t = k as f64 * step;
                    vec![cos(t), sin(t)]
                })
                .collect();
            (dirs, step)
        }
        3 => {
            let area = 4.0 * PI;
            let mut m = math::ceil(area / (angular_spacing * angular_spacing).max(1e-12)) as usize;
            m = m.clamp(32, MAX_SURFACE_SAMPLES);
            let golden = PI * (3.0 - sqrt(5.0));
            let dirs = (0..m)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                    let r = sqrt((1.0 - z * z).max(0.0));
                    let t = golden * k as f64;
                    vec![r * cos(t), r * sin(t), z]
                })
                .collect();
            // Fibonacci lattices have covering radius about 2·sqrt(area / m).
            (dirs, 2.0 * sqrt(area / m as f64))
        }
        _ => {
            let area = math::unit_sphere_area(dim);
            let target = area / math::powi(angular_spacing.max(1e-6), dim as i32 - 1);
            let m = (math::ceil(target) as usize).clamp(64, MAX_SURFACE_SAMPLES);
            let mut s = Stream::new(0x5350_4845_5245, dim as u64);
            let dirs = (0..m)
                .map(|_| {
                    let v: Vec<f64> = (0..dim).map(|_| s.next_normal()).collect();
                    let n = norm(&v);
                    v.into_iter().map(|x| x / n).collect()
                })
                .collect();
            let spacing = 2.0 * math::pow(area / m as f64, 1.0 / (dim as f64 - 1.0));
            (dirs, spacing)
        }
    }
}

impl Primitive {
    fn validate(&self, dim: usize) -> Result<()> {
        let check_len = |v: &[f64]| {
            if v.len() != dim {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                })
            } else if v.iter().any(|x| !x.is_finite()) {
                Err(invalid("non-finite coordinate"))
            } else {
                Ok(())
            }
        };
        let check_radius = |r: f64| {
            if r >= 0.0 && r.is_finite() {
                Ok(())
            } else {
                Err(invalid("radius must be finite and >= 0"))
            }
        };
        match self {
            Primitive::Point { center } => check_len(center),
            Primitive::Ball { center, radius } | Primitive::Sphere { center, radius } => {
                check_len(center)?;
                check_radius(*radius)
            }
            Primitive::Annulus { inner, outer } => {
                check_radius(*inner)?;
                check_radius(*outer)?;
                if inner > outer {
                    return Err(invalid("annulus inner radius exceeds outer radius"));
                }
                Ok(())
            }
            Primitive::Cap {
                radius,
                direction,
                half_angle,
                ball_radius,
            } => {
                check_len(direction)?;
                check_radius(*radius)?;
                check_radius(*ball_radius)?;
                if (norm(direction) - 1.0).abs() > 1e-9 {
                    return Err(invalid("cap direction must be a unit vector"));
                }
                if !(0.0..=PI).contains(half_angle) {
                    return Err(invalid("cap half-angle outside [0, π]"));
                }
                Ok(())
            }
            Primitive::PerforatedSphere { radius, holes } => {
                check_radius(*radius)?;
                for h in holes {
                    check_len(&h.direction)?;
                    if (norm(&h.direction) - 1.0).abs() > 1e-9 {
                        return Err(invalid("hole direction must be a unit vector"));
                    }
                }
                Ok(())
            }
            Primitive::Box { lo, hi } => {
                check_len(lo)?;
                check_len(hi)?;
                if lo.iter().zip(hi).any(|(a, b)| a > b) {
                    return Err(invalid("box lower corner exceeds upper corner"));
                }
                Ok(())
            }
        }
    }

    /// Whether the primitive has Lebesgue measure zero.
    pub fn is_null_set(&self, dim: usize) -> bool {
        match self {
            Primitive::Point { .. }
            | Primitive::Sphere { .. }
            | Primitive::Cap { .. }
            | Primitive::PerforatedSphere { .. } => true,
            Primitive::Ball { radius, .. } => *radius == 0.0,
            Primitive::Annulus { inner, outer } => inner == outer,
            Primitive::Box { lo, hi } => dim == 0 || lo.iter().zip(hi).any(|(a, b)| a == b),
        }
    }

    /// Exact Lebesgue measure.
    pub fn volume(&self, dim: usize) -> f64 {
        match self {
            Primitive::Ball { radius, .. } => math::ball_volume(dim, *radius),
            Primitive::Annulus { inner, outer } => {
                math::ball_volume(dim, *outer) - math::ball_volume(dim, *inner)
            }
            Primitive::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            _ => 0.0,
        }
    }

    /// `(d-1)`-dimensional measure of surface primitives where a closed form
    /// is implemented (spheres in any dimension, caps for `d ∈ {2, 3}`).
    pub fn surface_measure(&self, dim: usize) -> Option<f64> {
        match self {
            Primitive::Sphere { radius, .. } => {
                Some(math::unit_sphere_area(dim) * math::powi(*radius, dim as i32 - 1))
            }
            Primitive::Cap {
                radius, half_angle, ..
            } => match dim {
                2 => Some(2.0 * radius * half_angle),
                3 => Some(2.0 * PI * radius * radius * (1.0 - cos(*half_angle))),
                _ => None,
            },
            _ => None,
        }
    }

    /// Exact diameter, or an upper bound for perforated spheres.
    pub fn diameter(&self, dim: usize) -> f64 {
        match self {
            Primitive::Point { .. } => 0.0,
            Primitive::Ball { radius, .. } | Primitive::Sphere { radius, .. } => {
                if dim == 0 {
                    0.0
                } else {
                    2.0 * radius
                }
            }
            Primitive::Annulus { outer, .. } => 2.0 * outer,
            Primitive::Cap {
                radius, half_angle, ..
            } => {
                if dim == 1 {
                    if *half_angle >= PI {
                        2.0 * radius
                    } else {
                        0.0
                    }
                } else if *half_angle >= PI / 2.0 {
                    2.0 * radius
                } else {
                    2.0 * radius * sin(*half_angle)
                }
            }
            Primitive::PerforatedSphere { radius, .. } => 2.0 * radius,
            Primitive::Box { lo, hi } => {
                sqrt(lo.iter().zip(hi).map(|(a, b)| (b - a) * (b - a)).sum())
            }
        }
    }

    fn bounding_box(&self, dim: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            Primitive::Point { center } => (center.clone(), center.clone()),
            Primitive::Ball { center, radius } | Primitive::Sphere { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Primitive::Annulus { outer: r, .. }
            | Primitive::Cap { radius: r, .. }
            | Primitive::PerforatedSphere { radius: r, .. } => (vec![-r; dim], vec![*r; dim]),
            Primitive::Box { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    /// Largest norm of a point of the primitive.
    pub fn max_norm(&self) -> f64 {
        match self {
            Primitive::Point { center } => norm(center),
            Primitive::Ball { center, radius } | Primitive::Sphere { center, radius } => {
                norm(center) + radius
            }
            Primitive::Annulus { outer, .. } => *outer,
            Primitive::Cap { radius, .. } | Primitive::PerforatedSphere { radius, .. } => *radius,
            Primitive::Box { lo, hi } => sqrt(
                lo.iter()
                    .zip(hi)
                    .map(|(a, b)| {
                        let m = a.abs().max(b.abs());
                        m * m
                    })
                    .sum(),
            ),
        }
    }

    /// Exact distance from `x` to the primitive where a closed form exists;
    /// perforated spheres in `d ≥ 3` may fall back to sampling.
    pub fn point_distance(&self, dim: usize, x: &[f64]) -> Distance {
        match self {
            Primitive::Point { center } => Distance::exact(dist(x, center)),
            Primitive::Ball { center, radius } => {
                Distance::exact((dist(x, center) - radius).max(0.0))
            }
            Primitive::Sphere { center, radius } => {
                Distance::exact((dist(x, center) - radius).abs())
            }
            Primitive::Annulus { inner, outer } => {
                let t = norm(x);
                Distance::exact(if t < *inner {
                    inner - t
                } else if t > *outer {
                    t - outer
                } else {
                    0.0
                })
            }
            Primitive::Cap {
                radius,
                direction,
                half_angle,
                ..
            } => {
                let t = norm(x);
                if t == 0.0 {
                    return Distance::exact(*radius);
                }
                let u: Vec<f64> = x.iter().map(|v| v / t).collect();
                let phi = angle_between(&u, direction);
                if phi <= *half_angle {
                    Distance::exact((t - radius).abs())
                } else {
                    Distance::exact(chord(t, *radius, phi - half_angle))
                }
            }
            Primitive::PerforatedSphere { radius, holes } => {
                perforated_point_distance(dim, *radius, holes, x)
            }
            Primitive::Box { lo, hi } => {
                let s: f64 = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (a, b))| {
                        let e = if v < a {
                            a - v
                        } else if v > b {
                            v - b
                        } else {
                            0.0
                        };
                        e * e
                    })
                    .sum();
                Distance::exact(sqrt(s))
            }
        }
    }

    /// Membership with the half-open convention for annuli and a small
    /// tolerance for lower-dimensional pieces.
    pub fn contains(&self, dim: usize, x: &[f64]) -> bool {
        match self {
            Primitive::Annulus { inner, outer } => {
                let t = norm(x);
                t > *inner && t <= *outer + MEMBERSHIP_TOL
            }
            _ => self.point_distance(dim, x).value <= MEMBERSHIP_TOL,
        }
    }

    /// Sample points on the primitive (on the boundary for solids) with the
    /// given spacing. Returns the points and the achieved covering radius.
    pub fn sample_points(&self, dim: usize, spacing: f64) -> (Vec<Vec<f64>>, f64) {
        match self {
            Primitive::Point { center } => (vec![center.clone()], 0.0),
            Primitive::Ball { center, radius } | Primitive::Sphere { center, radius } => {
                if *radius == 0.0 {
                    return (vec![center.clone()], 0.0);
                }
                let (dirs, ang) = sphere_directions(dim, spacing / radius);
                let pts = dirs
                    .into_iter()
                    .map(|u| u.iter().zip(center).map(|(a, c)| c + radius * a).collect())
                    .collect();
                (pts, ang * radius)
            }
            Primitive::Annulus { inner, outer } => {
                let (mut pts, tol) = Primitive::Sphere {
                    center: vec![0.0; dim],
                    radius: *outer,
                }
                .sample_points(dim, spacing);
                if *inner > 0.0 {
                    let (more, _) = Primitive::Sphere {
                        center: vec![0.0; dim],
                        radius: *inner,
                    }
                    .sample_points(dim, spacing);
                    pts.extend(more);
                }
                (pts, tol)
            }
            Primitive::Cap {
                radius,
                direction,
                half_angle,
                ..
            } => {
                let (dirs, ang) = sphere_directions(dim, spacing / radius.max(1e-12));
                let mut pts: Vec<Vec<f64>> = dirs
                    .into_iter()
                    .filter(|u| angle_between(u, direction) <= *half_angle)
                    .map(|u| u.into_iter().map(|a| a * radius).collect())
                    .collect();
                pts.push(direction.iter().map(|a| a * radius).collect());
                (pts, ang * radius)
            }
            Primitive::PerforatedSphere { radius, holes } => {
                let (dirs, ang) = sphere_directions(dim, spacing / radius.max(1e-12));
                let pts = dirs
                    .into_iter()
                    .filter(|u| !in_open_hole(holes, u, 0.0))
                    .map(|u| u.into_iter().map(|a| a * radius).collect())
                    .collect();
                (pts, ang * radius)
            }
            Primitive::Box { lo, hi } => {
                // Corners plus a face grid; enough for distances to sets
                // outside the box.
                let n_axis: Vec<usize> = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| (math::ceil((b - a) / spacing) as usize).clamp(1, 2000))
                    .collect();
                let total: usize = n_axis.iter().map(|n| n + 1).product();
                let mut pts = Vec::new();
                if total <= MAX_SURFACE_SAMPLES {
                    let mut idx = vec![0usize; dim];
                    loop {
                        let on_face = idx.iter().zip(&n_axis).any(|(i, n)| *i == 0 || i == n);
                        if on_face {
                            pts.push(
                                (0..dim)
                                    .map(|k| {
                                        lo[k] + (hi[k] - lo[k]) * idx[k] as f64 / n_axis[k] as f64
                                    })
                                    .collect(),
                            );
                        }
                        let mut k = 0;
                        loop {
                            if k == dim {
                                let step = lo
                                    .iter()
                                    .zip(hi)
                                    .zip(&n_axis)
                                    .map(|((a, b), n)| (b - a) / *n as f64)
                                    .fold(0.0, f64::max);
                                return (pts, step);
                            }
                            idx[k] += 1;
                            if idx[k] <= n_axis[k] {
                                break;
                            }
                            idx[k] = 0;
                            k += 1;
                        }
                    }
                }
                let step = lo.iter().zip(hi).map(|(a, b)| b - a).fold(0.0, f64::max);
                (vec![lo.clone(), hi.clone()], step)
            }
        }
    }

    fn is_origin_centered_surface(&self) -> Option<f64> {
        match self {
            Primitive::Sphere { center, radius } if center.iter().all(|c| *c == 0.0) => {
                Some(*radius)
            }
            Primitive::Cap { radius, .. } => Some(*radius),
            Primitive::PerforatedSphere { radius, holes }
                if !holes.is_empty() || *radius >= 0.0 =>
            {
                Some(*radius)
            }
            _ => None,
        }
    }

    /// Range `[min |x - c|, max |x - c|]` over points of a box.
    fn box_distance_range(lo: &[f64], hi: &[f64], c: &[f64]) -> (f64, f64) {
        let mut near = 0.0;
        let mut far = 0.0;
        for k in 0..c.len() {
            let e = if c[k] < lo[k] {
                lo[k] - c[k]
            } else if c[k] > hi[k] {
                c[k] - hi[k]
            } else {
                0.0
            };
            near += e * e;
            let f = (c[k] - lo[k]).abs().max((c[k] - hi[k]).abs());
            far += f * f;
        }
        (sqrt(near), sqrt(far))
    }
}

fn in_open_hole(holes: &[Hole], u: &[f64], slack: f64) -> bool {
    holes
        .iter()
        .any(|h| angle_between(u, &h.direction) < h.half_angle - slack)
}

fn perforated_point_distance(dim: usize, radius: f64, holes: &[Hole], x: &[f64]) -> Distance {
    let t = norm(x);
    if t > 0.0 {
        let u: Vec<f64> = x.iter().map(|v| v / t).collect();
        if !in_open_hole(holes, &u, 0.0) {
            return Distance::exact((t - radius).abs());
        }
    }
    if dim == 1 {
        let best = [1.0, -1.0]
            .iter()
            .filter(|s| !in_open_hole(holes, &[**s], 0.0))
            .map(|s| (x[0] - s * radius).abs())
            .fold(f64::INFINITY, f64::min);
        return Distance::exact(best);
    }
    if t == 0.0 {
        // Every point of the sphere is at distance `radius`; only emptiness
        // matters.
        let (dirs, tol) = sphere_directions(dim, 0.01);
        let any = dirs.iter().any(|u| !in_open_hole(holes, u, 0.0));
        return if any {
            Distance::exact(radius)
        } else if dim == 2 {
            Distance::exact(f64::INFINITY)
        } else {
            Distance {
                value: f64::INFINITY,
                tolerance: tol * radius,
            }
        };
    }
    let u: Vec<f64> = x.iter().map(|v| v / t).collect();
    // Candidate nearest points lie on hole boundaries.
    let mut best_valid = f64::INFINITY;
    let mut best_invalid = f64::INFINITY;
    for h in holes {
        let mut cands = vec![rotate_towards(&h.direction, &u, h.half_angle)];
        if dim == 2 {
            cands.push(rotate_towards(&h.direction, &u, -h.half_angle));
        }
        for w in cands {
            let d = chord(t, radius, angle_between(&u, &w));
            if in_open_hole(holes, &w, 1e-12) {
                best_invalid = best_invalid.min(d);
            } else {
                best_valid = best_valid.min(d);
            }
        }
    }
    if dim == 2 || best_invalid >= best_valid {
        return Distance::exact(best_valid);
    }
    let (dirs, ang) = sphere_directions(dim, 0.002);
    let sampled = dirs
        .iter()
        .filter(|w| !in_open_hole(holes, w, 0.0))
        .map(|w| chord(t, radius, angle_between(&u, w)))
        .fold(best_valid, f64::min);
    Distance {
        value: sampled,
        tolerance: ang * radius,
    }
}

fn radial_range(p: &Primitive) -> Option<(f64, f64)> {
    match p {
        Primitive::Annulus { inner, outer } => Some((*inner, *outer)),
        Primitive::Sphere { center, radius } => {
            let c = norm(center);
            Some(((c - radius).abs(), c + radius))
        }
        Primitive::Cap { radius, .. } | Primitive::PerforatedSphere { radius, .. } => {
            Some((*radius, *radius))
        }
        _ => None,
    }
}

fn interval_gap(a: (f64, f64), b: (f64, f64)) -> f64 {
    if a.1 < b.0 {
        b.0 - a.1
    } else if b.1 < a.0 {
        a.0 - b.1
    } else {
        0.0
    }
}

fn primitive_distance(dim: usize, a: &Primitive, b: &Primitive, spacing: f64) -> Distance {
    use Primitive as P;
    match (a, b) {
        (P::Point { center }, other) | (other, P::Point { center }) => {
            other.point_distance(dim, center)
        }
        (P::Ball { center, radius }, other) | (other, P::Ball { center, radius }) => {
            let d = other.point_distance(dim, center);
            Distance {
                value: (d.value - radius).max(0.0),
                tolerance: d.tolerance,
            }
        }
        (
            P::Sphere {
                center: c1,
                radius: r1,
            },
            P::Sphere {
                center: c2,
                radius: r2,
            },
        ) => {
            let d = dist(c1, c2);
            Distance::exact(if d >= r1 + r2 {
                d - r1 - r2
            } else if d <= (r1 - r2).abs() {
                (r1 - r2).abs() - d
            } else {
                0.0
            })
        }
        (P::Box { lo: l1, hi: h1 }, P::Box { lo: l2, hi: h2 }) => {
            let s: f64 = (0..dim)
                .map(|k| {
                    let g = interval_gap((l1[k], h1[k]), (l2[k], h2[k]));
                    g * g
                })
                .sum();
            Distance::exact(sqrt(s))
        }
        (P::Sphere { center, radius }, P::Box { lo, hi })
        | (P::Box { lo, hi }, P::Sphere { center, radius }) => {
            let (near, far) = Primitive::box_distance_range(lo, hi, center);
            Distance::exact(if *radius < near {
                near - radius
            } else if *radius > far {
                radius - far
            } else {
                0.0
            })
        }
        (P::Annulus { inner, outer }, P::Box { lo, hi })
        | (P::Box { lo, hi }, P::Annulus { inner, outer }) => {
            let (near, far) = Primitive::box_distance_range(lo, hi, &vec![0.0; dim]);
            Distance::exact(interval_gap((near, far), (*inner, *outer)))
        }
        (P::Annulus { .. }, other) | (other, P::Annulus { .. })
            if radial_range(other).is_some()
                && (matches!(other, P::Annulus { .. })
                    || other.is_origin_centered_surface().is_some()
                    || matches!(other, P::Sphere { .. })) =>
        {
            let ra = radial_range(a).unwrap_or((0.0, 0.0));
            let rb = radial_range(b).unwrap_or((0.0, 0.0));
            Distance::exact(interval_gap(ra, rb))
        }
        (P::Sphere { center, radius }, other) | (other, P::Sphere { center, radius })
            if center.iter().all(|c| *c == 0.0) && other.is_origin_centered_surface().is_some() =>
        {
            // Radial projection from a full concentric sphere.
            let r2 = other.is_origin_centered_surface().unwrap_or(0.0);
            Distance::exact((radius - r2).abs())
        }
        _ => sampled_distance(dim, a, b, spacing),
    }
}

fn sampled_distance(dim: usize, a: &Primitive, b: &Primitive, spacing: f64) -> Distance {
    // Sample the side whose own point distance may be inexact.
    let (sampled, exact) = match a {
        Primitive::PerforatedSphere { .. } if dim >= 3 => (a, b),
        _ => (b, a),
    };
    let (pts, cover) = sampled.sample_points(dim, spacing);
    let mut best = Distance::exact(f64::INFINITY);
    for p in &pts {
        best = best.min(exact.point_distance(dim, p));
    }
    Distance {
        value: best.value,
        tolerance: best.tolerance + cover,
    }
}

impl RegionSet {
    pub fn new(dim: usize, primitives: Vec<Primitive>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        for p in &primitives {
            p.validate(dim)?;
        }
        Ok(RegionSet { dim, primitives })
    }

    pub fn empty(dim: usize) -> Self {
        RegionSet {
            dim,
            primitives: Vec::new(),
        }
    }

    pub fn single(dim: usize, p: Primitive) -> Result<Self> {
        RegionSet::new(dim, vec![p])
    }

    pub fn point(center: Vec<f64>) -> Result<Self> {
        RegionSet::single(center.len(), Primitive::Point { center })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        RegionSet::single(center.len(), Primitive::Ball { center, radius })
    }

    pub fn sphere(center: Vec<f64>, radius: f64) -> Result<Self> {
        RegionSet::single(center.len(), Primitive::Sphere { center, radius })
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    /// Union with another set of the same dimension.
    pub fn union(mut self, other: RegionSet) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        self.primitives.extend(other.primitives);
        Ok(self)
    }

    /// Whether every primitive has Lebesgue measure zero.
    pub fn is_null_set(&self) -> bool {
        self.primitives.iter().all(|p| p.is_null_set(self.dim))
    }

    /// Exact volume for a single primitive or a union of null sets.
    pub fn exact_volume(&self) -> Option<f64> {
        match self.primitives.as_slice() {
            [p] => Some(p.volume(self.dim)),
            _ if self.is_null_set() => Some(0.0),
            _ => None,
        }
    }

    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut iter = self.primitives.iter();
        let first = iter.next()?;
        let (mut lo, mut hi) = first.bounding_box(self.dim);
        for p in iter {
            let (l, h) = p.bounding_box(self.dim);
            for k in 0..self.dim {
                lo[k] = lo[k].min(l[k]);
                hi[k] = hi[k].max(h[k]);
            }
        }
        Some((lo, hi))
    }

    /// Exact diameter for single primitives, bounding-box diagonal (an upper
    /// bound) for unions. Zero for the empty set.
    pub fn diameter(&self) -> f64 {
        match self.primitives.as_slice() {
            [] => 0.0,
            [p] => p.diameter(self.dim),
            _ => {
                let (lo, hi) = self.bounding_box().unwrap_or_default();
                dist(&lo, &hi)
            }
        }
    }

    /// Largest norm of any point of the set.
    pub fn max_norm(&self) -> f64 {
        self.primitives
            .iter()
            .map(Primitive::max_norm)
            .fold(0.0, f64::max)
    }

    /// Radius of the largest origin-centred ball contained in the set, as
    /// far as it can be read off single primitives (0 when none contains
    /// the origin).
    pub fn inscribed_radius_about_origin(&self) -> f64 {
        self.primitives
            .iter()
            .map(|p| match p {
                Primitive::Ball { center, radius } => (radius - norm(center)).max(0.0),
                Primitive::Box { lo, hi } => lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| (-a).min(*b))
                    .fold(f64::INFINITY, f64::min)
                    .max(0.0),
                _ => 0.0,
            })
            .fold(0.0, f64::max)
    }

    pub fn point_distance(&self, x: &[f64]) -> Distance {
        self.primitives
            .iter()
            .map(|p| p.point_distance(self.dim, x))
            .fold(Distance::exact(f64::INFINITY), Distance::min)
    }

    /// Plain distance value, used on hot paths such as grid quadrature.
    pub(crate) fn point_distance_value(&self, x: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for p in &self.primitives {
            let d = p.point_distance(self.dim, x).value;
            if d < best {
                best = d;
            }
        }
        best
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.primitives.iter().any(|p| p.contains(self.dim, x))
    }

    /// Distance to another set, using `spacing` for sampled fallbacks.
    pub fn distance_to(&self, other: &RegionSet, spacing: f64) -> Result<Distance> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut best = Distance::exact(f64::INFINITY);
        for a in &self.primitives {
            for b in &other.primitives {
                best = best.min(primitive_distance(self.dim, a, b, spacing));
            }
        }
        Ok(best)
    }
}

/// Distance between two sets; `+∞` when either is empty. Exact for the
/// closed-form primitive pairs, sampled (with the tolerance reported)
/// otherwise.
pub fn distance_between(a: &RegionSet, b: &RegionSet) -> Result<Distance> {
    a.distance_to(b, 0.01)
}

/// The solid annulus `A_{r,R} = B(0,R) ∖ B(0,r)` in `ℝ^d`.
pub fn make_annulus(inner: f64, outer: f64, dim: usize) -> Result<RegionSet> {
    if !(inner >= 0.0) || inner > outer {
        return Err(invalid("annulus requires 0 <= r <= R"));
    }
    RegionSet::single(dim, Primitive::Annulus { inner, outer })
}

/// `∂B(0, R) ∩ B(R·direction/|direction|, cap_ball_radius)`.
pub fn spherical_cap(
    sphere_radius: f64,
    direction: &[f64],
    cap_ball_radius: f64,
) -> Result<RegionSet> {
    if !(sphere_radius > 0.0) {
        return Err(invalid("sphere radius must be positive"));
    }
    if !(cap_ball_radius >= 0.0) {
        return Err(invalid("cap ball radius must be >= 0"));
    }
    let dir = unit(direction).ok_or_else(|| invalid("zero direction vector"))?;
    let half_angle = cap_half_angle(sphere_radius, cap_ball_radius);
    RegionSet::single(
        dir.len(),
        Primitive::Cap {
            radius: sphere_radius,
            direction: dir,
            half_angle,
            ball_radius: cap_ball_radius,
        },
    )
}

/// Angle from the cap centre to its rim: the chord `2R sin(φ/2)` equals the
/// ball radius.
pub(crate) fn cap_half_angle(sphere_radius: f64, ball_radius: f64) -> f64 {
    if ball_radius >= 2.0 * sphere_radius {
        PI
    } else {
        2.0 * math::asin(ball_radius / (2.0 * sphere_radius))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn annulus_volumes() {
        let a = make_annulus(1.0, 2.0, 2).unwrap();
        assert!(close(a.exact_volume().unwrap(), 3.0 * PI, 1e-12));
        let b = make_annulus(0.0, 1.0, 2).unwrap();
        assert!(close(b.exact_volume().unwrap(), PI, 1e-12));
        let c = make_annulus(2.0, 2.0, 3).unwrap();
        assert_eq!(c.exact_volume().unwrap(), 0.0);
        assert!(make_annulus(2.0, 1.0, 2).is_err());
        assert!(make_annulus(-1.0, 1.0, 2).is_err());
    }

    #[test]
    fn annulus_membership_is_half_open() {
        let a = make_annulus(1.0, 2.0, 1).unwrap();
        assert!(!a.contains(&[1.0]));
        assert!(a.contains(&[2.0]));
        assert!(a.contains(&[-1.5]));
    }

    #[test]
    fn distance_examples() {
        let p0 = RegionSet::point(vec![0.0]).unwrap();
        let p3 = RegionSet::point(vec![3.0]).unwrap();
        assert_eq!(distance_between(&p0, &p3).unwrap().value, 3.0);

        let s1 = RegionSet::sphere(vec![0.0, 0.0], 1.0).unwrap();
        let s4 = RegionSet::sphere(vec![0.0, 0.0], 4.0).unwrap();
        let d = distance_between(&s1, &s4).unwrap();
        assert_eq!(d.value, 3.0);
        assert_eq!(d.tolerance, 0.0);

        let b0 = RegionSet::ball(vec![0.0, 0.0], 2.0).unwrap();
        let b1 = RegionSet::ball(vec![1.0, 0.0], 2.0).unwrap();
        assert_eq!(distance_between(&b0, &b1).unwrap().value, 0.0);

        let e = RegionSet::empty(2);
        assert_eq!(distance_between(&e, &b0).unwrap().value, f64::INFINITY);
    }

    #[test]
    fn cap_examples() {
        let full = spherical_cap(10.0, &[0.3, -0.2], 25.0).unwrap();
        let s = RegionSet::sphere(vec![0.0, 0.0], 10.0).unwrap();
        for x in [[10.0, 0.0], [-10.0, 0.0], [0.0, 7.0], [3.0, 40.0]] {
            assert!(close(
                full.point_distance(&x).value,
                s.point_distance(&x).value,
                1e-12
            ));
        }

        let arc = spherical_cap(10.0, &[1.0, 0.0], 2.0).unwrap();
        let half = 2.0 * math::asin(0.1);
        let len = arc.primitives[0].surface_measure(2).unwrap();
        assert!(close(len, 2.0 * 10.0 * half, 1e-12));
        // Rim points sit exactly at the ball radius from the cap centre.
        let rim = [10.0 * cos(half), 10.0 * sin(half)];
        assert!(close(dist(&rim, &[10.0, 0.0]), 2.0, 1e-12));
        assert!(arc.contains(&rim));

        let pt = spherical_cap(10.0, &[1.0, 0.0], 0.0).unwrap();
        assert_eq!(pt.point_distance(&[10.0, 0.0]).value, 0.0);
        assert!(close(pt.point_distance(&[10.0, 1.0]).value, 1.0, 1e-12));
        assert!(spherical_cap(10.0, &[0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn perforated_sphere_distance_in_plane() {
        // Circle of radius 5 with the half plane x > 0 removed (hole of half
        // angle π/2 around e₁): remaining arc is x ≤ 0.
        let cheese = RegionSet::single(
            2,
            Primitive::PerforatedSphere {
                radius: 5.0,
                holes: vec![Hole {
                    direction: vec![1.0, 0.0],
                    half_angle: PI / 2.0,
                }],
            },
        )
        .unwrap();
        let d = cheese.point_distance(&[5.0, 0.0]);
        assert!(close(d.value, sqrt(50.0), 1e-12));
        assert_eq!(d.tolerance, 0.0);
        assert!(close(cheese.point_distance(&[-7.0, 0.0]).value, 2.0, 1e-12));
    }

    #[test]
    fn sampled_fallback_reports_tolerance() {
        let cap = spherical_cap(3.0, &[1.0, 0.0, 0.0], 1.0).unwrap();
        let cap2 = spherical_cap(5.0, &[1.0, 0.0, 0.0], 1.0).unwrap();
        let d = cap.distance_to(&cap2, 0.05).unwrap();
        assert!(d.value >= 2.0 - 1e-9);
        assert!(d.lower_bound() <= 2.0 + 1e-9);
    }
}
