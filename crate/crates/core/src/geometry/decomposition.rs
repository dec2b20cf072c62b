use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use super::region::{Primitive, RegionSet};
use crate::error::{invalid, Result};
use crate::math::{self, ball_volume, dot};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum DecompositionKind {
    SphereShells,
    CapCheese,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum MemberRole {
    Sphere,
    Cap,
    Cheese,
    Custom,
}

/// One set `S` of a decomposition, tagged with the scale `n` it belongs to
/// and the construction's guaranteed lower bound on its distance to the
/// difference support (if the construction provides one).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecompositionMember {
    pub scale: u32,
    pub role: MemberRole,
    pub region: RegionSet,
    pub delta_lower: Option<f64>,
}

/// Asymptotic description of the truncated part of a sequence: consecutive
/// σ-values (or volumes) grow by at most `e^{log_growth}` while `δ` grows by
/// at least `delta_growth`, so the term ratio is eventually
/// `e^{log_growth - γ·delta_growth}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailRule {
    pub log_growth: f64,
    pub delta_growth: f64,
}

impl TailRule {
    pub fn log_ratio(&self, gamma: f64) -> f64 {
        self.log_growth - gamma * self.delta_growth
    }
}

/// A connected component of the complement of an origin-centred family of
/// spheres: `{inner < |x| < outer}` (`outer = None` for the exterior).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Component {
    pub inner: f64,
    pub outer: Option<f64>,
    pub volume: f64,
}

impl Component {
    pub fn is_bounded(&self) -> bool {
        self.outer.is_some()
    }
}

/// Outcome of the structural checks on a decomposition.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StructureReport {
    pub measure_zero: bool,
    pub radii_increasing: bool,
    pub covers_spheres: bool,
    pub bounded_components: usize,
    pub unbounded_components: usize,
    /// The check was only sampled (custom families).
    pub weak: bool,
    pub notes: Vec<String>,
}

impl StructureReport {
    pub fn ok(&self) -> bool {
        self.measure_zero && self.radii_increasing && self.covers_spheres
    }
}

/// A finite truncation of a sequence of measure-zero compact sets whose
/// complement splits into bounded open pieces.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TotalDecomposition {
    pub dim: usize,
    pub kind: DecompositionKind,
    pub gamma: Option<f64>,
    pub members: Vec<DecompositionMember>,
    pub tail: Option<TailRule>,
    /// The stored members are a finite prefix of an infinite sequence, so
    /// the outermost complement component is unbounded.
    pub truncated: bool,
}

/// Radius of the origin-centred sphere a surface member lies on.
fn member_sphere_radius(m: &DecompositionMember) -> Option<f64> {
    match m.region.primitives.as_slice() {
        [Primitive::Sphere { center, radius }] if center.iter().all(|c| *c == 0.0) => Some(*radius),
        [Primitive::Cap { radius, .. }] | [Primitive::PerforatedSphere { radius, .. }] => {
            Some(*radius)
        }
        _ => None,
    }
}

impl TotalDecomposition {
    pub fn new(
        dim: usize,
        kind: DecompositionKind,
        gamma: Option<f64>,
        members: Vec<DecompositionMember>,
    ) -> Result<Self> {
        if let Some(g) = gamma {
            if !(g > 0.0) {
                return Err(invalid("gamma must be positive"));
            }
        }
        for m in &members {
            if m.region.dim != dim {
                return Err(invalid("member dimension differs from decomposition"));
            }
        }
        let dec = TotalDecomposition {
            dim,
            kind,
            gamma,
            members,
            tail: None,
            truncated: true,
        };
        if kind == DecompositionKind::SphereShells {
            let radii = dec.scale_radii();
            if radii.len() != dec.members.len() {
                return Err(invalid(
                    "sphere-shell members must be origin-centred spheres",
                ));
            }
            if radii.windows(2).any(|w| !(w[1].1 > w[0].1)) {
                return Err(invalid("sphere radii must be strictly increasing"));
            }
        }
        Ok(dec)
    }

    pub fn with_tail(mut self, tail: TailRule) -> Self {
        self.tail = Some(tail);
        self
    }

    /// Distinct scales in increasing order with the radius of their sphere.
    pub fn scale_radii(&self) -> Vec<(u32, f64)> {
        let mut map: BTreeMap<u32, f64> = BTreeMap::new();
        let mut out = Vec::new();
        for m in &self.members {
            if let Some(r) = member_sphere_radius(m) {
                if self.kind == DecompositionKind::SphereShells {
                    out.push((m.scale, r));
                } else {
                    map.entry(m.scale).or_insert(r);
                }
            }
        }
        if self.kind == DecompositionKind::SphereShells {
            out
        } else {
            map.into_iter().collect()
        }
    }

    pub fn members_at(&self, scale: u32) -> impl Iterator<Item = &DecompositionMember> {
        self.members.iter().filter(move |m| m.scale == scale)
    }

    /// Complement components for the origin-centred kinds: inner ball,
    /// shells between consecutive spheres, and the unbounded exterior.
    pub fn complement_components(&self) -> Vec<Component> {
        if self.kind == DecompositionKind::Custom {
            return Vec::new();
        }
        let radii: Vec<f64> = self.scale_radii().into_iter().map(|(_, r)| r).collect();
        let mut out = Vec::with_capacity(radii.len() + 1);
        let mut prev = 0.0;
        for r in radii {
            out.push(Component {
                inner: prev,
                outer: Some(r),
                volume: ball_volume(self.dim, r) - ball_volume(self.dim, prev),
            });
            prev = r;
        }
        out.push(Component {
            inner: prev,
            outer: None,
            volume: f64::INFINITY,
        });
        out
    }

    /// Structural validation: measure zero, increasing radii, and (for
    /// cap/cheese) that caps and cheese reassemble each sphere, checked by
    /// sampled membership.
    pub fn structure_report(&self) -> StructureReport {
        let mut notes = Vec::new();
        let measure_zero = self.members.iter().all(|m| m.region.is_null_set());
        if !measure_zero {
            notes.push(String::from("a member has positive volume"));
        }
        let radii = self.scale_radii();
        let radii_increasing = radii.windows(2).all(|w| w[1].1 > w[0].1);
        let mut covers = true;
        let mut weak = false;
        match self.kind {
            DecompositionKind::SphereShells => {}
            DecompositionKind::CapCheese => {
                for &(n, r) in &radii {
                    let parts: Vec<&DecompositionMember> = self.members_at(n).collect();
                    if parts.iter().any(|m| member_sphere_radius(m) != Some(r)) {
                        covers = false;
                        notes.push(format!("scale {n}: members on different spheres"));
                        continue;
                    }
                    if !covers_sphere(self.dim, &parts) {
                        covers = false;
                        notes.push(format!(
                            "scale {n}: caps and cheese miss part of the sphere"
                        ));
                    }
                }
            }
            DecompositionKind::Custom => {
                weak = true;
                notes.push(String::from(
                    "custom family: only measure zero and boundedness checked",
                ));
            }
        }
        let comps = self.complement_components();
        let bounded = comps.iter().filter(|c| c.is_bounded()).count();
        StructureReport {
            measure_zero,
            radii_increasing,
            covers_spheres: covers,
            bounded_components: bounded,
            unbounded_components: comps.len() - bounded,
            weak,
            notes,
        }
    }
}

/// Checks on a deterministic direction sample that every direction lies in
/// a cap or in the cheese.
fn covers_sphere(dim: usize, parts: &[&DecompositionMember]) -> bool {
    let dirs = sample_directions(dim, 4096);
    dirs.iter().all(|u| {
        parts.iter().any(|m| match m.region.primitives.as_slice() {
            [Primitive::Sphere { .. }] => true,
            [Primitive::Cap {
                direction,
                half_angle,
                ..
            }] => math::acos(dot(u, direction)) <= *half_angle + 1e-12,
            [Primitive::PerforatedSphere { holes, .. }] => holes
                .iter()
                .all(|h| math::acos(dot(u, &h.direction)) >= h.half_angle - 1e-12),
            _ => false,
        })
    })
}

fn sample_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * math::PI * k as f64 / count as f64;
                vec![math::cos(t), math::sin(t)]
            })
            .collect(),
        _ => {
            let mut s = crate::rng::Stream::new(0x0043_4f56_4552, dim as u64);
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..dim).map(|_| s.next_normal()).collect();
                    let n = math::norm(&v);
                    v.into_iter().map(|x| x / n).collect()
                })
                .collect()
        }
    }
}

/// Concentric spheres `∂B(0, r_n)` for strictly increasing positive radii.
pub fn sphere_shell_decomposition(radii: &[f64], dim: usize) -> Result<TotalDecomposition> {
    check_radii(radii)?;
    let members = radii
        .iter()
        .enumerate()
        .map(|(n, &r)| {
            Ok(DecompositionMember {
                scale: n as u32 + 1,
                role: MemberRole::Sphere,
                region: RegionSet::sphere(vec![0.0; dim], r)?,
                delta_lower: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TotalDecomposition::new(dim, DecompositionKind::SphereShells, None, members)
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(invalid("radii must be finite and positive"));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("radii must be strictly increasing"));
    }
    Ok(())
}

/// Nested balls `A_n = B(0, R_n)` with boundaries `S_n = ∂A_n`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShellSequence {
    pub dim: usize,
    pub(crate) radii: Vec<f64>,
    pub(crate) scales: Vec<u32>,
    pub tail: Option<TailRule>,
    /// Construction lower bound on `δ'_n`, per entry.
    pub delta_lower: Vec<Option<f64>>,
}

impl ShellSequence {
    pub fn new(dim: usize, radii: Vec<f64>, scales: Vec<u32>) -> Result<Self> {
        check_radii(&radii)?;
        if scales.len() != radii.len() {
            return Err(invalid("one scale label per radius required"));
        }
        let delta_lower = vec![None; radii.len()];
        Ok(ShellSequence {
            dim,
            radii,
            scales,
            tail: None,
            delta_lower,
        })
    }

    /// A sequence without the monotonicity check, for exercising the
    /// certificate's handling of degenerate inputs.
    pub fn new_unchecked(dim: usize, radii: Vec<f64>, scales: Vec<u32>) -> Self {
        let delta_lower = vec![None; radii.len()];
        ShellSequence {
            dim,
            radii,
            scales,
            tail: None,
            delta_lower,
        }
    }

    pub fn with_tail(mut self, tail: TailRule) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn scales(&self) -> &[u32] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn boundary(&self, i: usize) -> Result<RegionSet> {
        RegionSet::sphere(vec![0.0; self.dim], self.radii[i])
    }

    /// `|A_{i+1} ∖ A_{i-1}|` for an interior index.
    pub fn annular_volume(&self, i: usize) -> Option<f64> {
        if i == 0 || i + 1 >= self.radii.len() {
            return None;
        }
        Some(ball_volume(self.dim, self.radii[i + 1]) - ball_volume(self.dim, self.radii[i - 1]))
    }

    /// `½ dist(S_i, S_{i-1} ∪ S_{i+1})` for an interior index.
    pub fn half_neighbour_gap(&self, i: usize) -> Option<f64> {
        if i == 0 || i + 1 >= self.radii.len() {
            return None;
        }
        let lo = (self.radii[i] - self.radii[i - 1]).abs();
        let hi = (self.radii[i + 1] - self.radii[i]).abs();
        Some(0.5 * lo.min(hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{spherical_cap, Hole};
    use crate::math::PI;

    #[test]
    fn shell_examples() {
        let d = sphere_shell_decomposition(&[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(d.members.len(), 3);
        let comps = d.complement_components();
        assert_eq!(comps.iter().filter(|c| c.is_bounded()).count(), 3);
        assert_eq!(comps.iter().filter(|c| !c.is_bounded()).count(), 1);
        assert!(d.truncated);

        let one = sphere_shell_decomposition(&[5.0], 2).unwrap();
        let c = one.complement_components();
        assert!((c[0].volume - 25.0 * PI).abs() < 1e-12);

        assert!(sphere_shell_decomposition(&[1.0, 1.0, 2.0], 2).is_err());
        assert!(sphere_shell_decomposition(&[0.0, 1.0], 2).is_err());
    }

    #[test]
    fn structure_report_for_shells() {
        let d = sphere_shell_decomposition(&[1.0, 2.5], 3).unwrap();
        let r = d.structure_report();
        assert!(r.ok());
        assert_eq!(r.bounded_components, 2);
        assert_eq!(r.unbounded_components, 1);
    }

    fn cap_member(radius: f64, dir: &[f64], ball: f64) -> DecompositionMember {
        DecompositionMember {
            scale: 1,
            role: MemberRole::Cap,
            region: spherical_cap(radius, dir, ball).unwrap(),
            delta_lower: None,
        }
    }

    #[test]
    fn cap_cheese_cover() {
        let cap = cap_member(10.0, &[1.0, 0.0], 3.0);
        let Primitive::Cap { half_angle, .. } = cap.region.primitives[0] else {
            unreachable!()
        };
        let cheese = DecompositionMember {
            scale: 1,
            role: MemberRole::Cheese,
            region: RegionSet::single(
                2,
                Primitive::PerforatedSphere {
                    radius: 10.0,
                    holes: vec![Hole {
                        direction: vec![1.0, 0.0],
                        half_angle,
                    }],
                },
            )
            .unwrap(),
            delta_lower: None,
        };
        let good = TotalDecomposition::new(
            2,
            DecompositionKind::CapCheese,
            Some(1.0),
            vec![cap.clone(), cheese.clone()],
        )
        .unwrap();
        assert!(good.structure_report().ok());

        let mut bad_cheese = cheese;
        if let Primitive::PerforatedSphere { holes, .. } = &mut bad_cheese.region.primitives[0] {
            holes[0].half_angle *= 2.0;
        }
        let bad = TotalDecomposition::new(
            2,
            DecompositionKind::CapCheese,
            Some(1.0),
            vec![cap, bad_cheese],
        )
        .unwrap();
        assert!(!bad.structure_report().covers_spheres);
    }

    #[test]
    fn shell_sequence_volumes() {
        let radii: Vec<f64> = (1..=5)
            .map(|n| math::powi(2.0, n) + n as f64 / 2.0)
            .collect();
        let s = ShellSequence::new(1, radii, (1..=5).collect()).unwrap();
        for i in 1..4 {
            let n = (i + 1) as i32;
            let want = 2.0 * (math::powi(2.0, n + 1) - math::powi(2.0, n - 1) + 1.0);
            assert!((s.annular_volume(i).unwrap() - want).abs() < 1e-9);
        }
        assert!(s.annular_volume(0).is_none());
    }
}
