use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::geometry::{
    distance_between, exact_generalized_surface_area, sigma_volume_bound, DecompositionKind,
    MemberRole, Primitive, RegionSet, ShellSequence, TailRule, TotalDecomposition,
};
use crate::math::exp;

/// Number of trailing consecutive ratios the tail test inspects.
pub const RATIO_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum Verdict {
    Certified,
    NotCertified,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum SeriesKind {
    /// `Σ σ(S_n) e^{-γ δ_n}`.
    SurfaceArea,
    /// `Σ |A_{n+1} ∖ A_{n-1}| e^{-γ δ'_n}`.
    Volume,
}

/// One term of the series.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TermRecord {
    pub n: u32,
    pub member: usize,
    pub role: MemberRole,
    pub delta: f64,
    pub delta_lower: Option<f64>,
    /// `σ(S)` or the annular volume.
    pub weight: f64,
    /// `weight · e^{-γ δ}`.
    pub term: f64,
}

impl TermRecord {
    pub fn new(
        n: u32,
        member: usize,
        role: MemberRole,
        delta: f64,
        delta_lower: Option<f64>,
        weight: f64,
        gamma: f64,
    ) -> Self {
        TermRecord {
            n,
            member,
            role,
            delta,
            delta_lower,
            weight,
            term: term_value(weight, delta, gamma),
        }
    }

    /// `δ` used for the dominating series: the construction's lower bound
    /// when it is positive and smaller than the measured distance.
    pub fn dominating_delta(&self) -> f64 {
        match self.delta_lower {
            Some(l) if l > 0.0 => self.delta.min(l),
            _ => self.delta,
        }
    }
}

/// `w e^{-γ δ}`, with `e^{-∞} = 0` even for infinite weights.
pub fn term_value(weight: f64, delta: f64, gamma: f64) -> f64 {
    if delta == f64::INFINITY || weight == 0.0 {
        0.0
    } else {
        weight * exp(-gamma * delta)
    }
}

/// Per-scale sums of actual and dominating terms.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaleTerm {
    pub n: u32,
    pub term: f64,
    pub dominating: f64,
    /// Smallest dominating `δ` among members at this scale.
    pub delta: f64,
}

/// A finite prefix of a summability series with its verdict.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecompositionCertificate {
    pub series: SeriesKind,
    pub gamma: f64,
    pub records: Vec<TermRecord>,
    pub scales: Vec<ScaleTerm>,
    pub partial_sum: f64,
    /// Largest ratio of consecutive dominating terms over the trailing
    /// window.
    pub observed_ratio: Option<f64>,
    pub tail_log_ratio: Option<f64>,
    /// Geometric bound on the dominating terms past the last scale.
    pub tail_bound: Option<f64>,
    pub verdict: Verdict,
    pub reason: String,
    /// Index into `records` of a term violating `δ > 0`.
    pub witness: Option<usize>,
}

impl DecompositionCertificate {
    /// Recomputes each stored term from its stored `δ` and weight.
    pub fn max_recompute_error(&self) -> f64 {
        self.records
            .iter()
            .map(|r| (term_value(r.weight, r.delta, self.gamma) - r.term).abs())
            .fold(0.0, f64::max)
    }
}

/// Aggregates term records into a verdict.
///
/// Certified requires: every `δ > 0`; at least `RATIO_WINDOW + 1`
/// consecutive trailing scales; a lower envelope of `δ` that increases; all
/// trailing ratios of the dominating series `≤ q < 1`; and a negative
/// tail-rule exponent when a rule is supplied. A nonempty series whose terms
/// are all exactly zero (no difference set) is certified outright; an empty
/// one is inconclusive.
pub fn certify_terms(
    series: SeriesKind,
    records: Vec<TermRecord>,
    gamma: f64,
    tail: Option<TailRule>,
) -> Result<DecompositionCertificate> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma must be positive"));
    }
    let partial_sum = records.iter().fold(0.0, |acc, r| acc + r.term);
    let mut cert = DecompositionCertificate {
        series,
        gamma,
        records,
        scales: Vec::new(),
        partial_sum,
        observed_ratio: None,
        tail_log_ratio: tail.map(|t| t.log_ratio(gamma)),
        tail_bound: None,
        verdict: Verdict::Inconclusive,
        reason: String::new(),
        witness: None,
    };
    if cert.records.is_empty() {
        cert.reason = String::from("no members to certify");
        return Ok(cert);
    }
    if let Some((k, r)) = cert
        .records
        .iter()
        .enumerate()
        .find(|(_, r)| !(r.delta > 0.0))
    {
        cert.verdict = Verdict::NotCertified;
        cert.witness = Some(k);
        cert.reason = format!("δ = {} ≤ 0 at scale {}", r.delta, r.n);
        return Ok(cert);
    }

    let mut scales: Vec<ScaleTerm> = Vec::new();
    for r in &cert.records {
        let dom_delta = r.dominating_delta();
        let dom = term_value(r.weight, dom_delta, gamma);
        match scales.last_mut() {
            Some(s) if s.n == r.n => {
                s.term += r.term;
                s.dominating += dom;
                s.delta = s.delta.min(dom_delta);
            }
            _ => scales.push(ScaleTerm {
                n: r.n,
                term: r.term,
                dominating: dom,
                delta: dom_delta,
            }),
        }
    }
    scales.sort_by_key(|s| s.n);
    cert.scales = scales;

    if cert.scales.iter().all(|s| s.dominating == 0.0) {
        cert.verdict = Verdict::Certified;
        cert.tail_bound = Some(0.0);
        cert.observed_ratio = Some(0.0);
        cert.reason = String::from("every term vanishes");
        return Ok(cert);
    }

    let s = &cert.scales;
    if s.len() < RATIO_WINDOW + 1 {
        cert.reason = format!("only {} scales; need {}", s.len(), RATIO_WINDOW + 1);
        return Ok(cert);
    }
    let tail_part = &s[s.len() - RATIO_WINDOW - 1..];
    if tail_part.windows(2).any(|w| w[1].n != w[0].n + 1) {
        cert.reason = String::from("missing scales among the trailing terms");
        return Ok(cert);
    }

    // Lower envelope e_n = min_{m ≥ n} δ_m.
    let mut envelope = Vec::with_capacity(s.len());
    let mut running = f64::INFINITY;
    for st in s.iter().rev() {
        running = running.min(st.delta);
        envelope.push(running);
    }
    envelope.reverse();
    let increasing = envelope[envelope.len() - 1] > envelope[0];

    let mut q = 0.0f64;
    for w in tail_part.windows(2) {
        let ratio = if w[0].dominating == 0.0 {
            if w[1].dominating == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            w[1].dominating / w[0].dominating
        };
        q = q.max(ratio);
    }
    cert.observed_ratio = Some(q);

    let tail_q = match cert.tail_log_ratio {
        Some(lr) => q.max(exp(lr)),
        None => q,
    };
    if tail_q < 1.0 {
        let last = s[s.len() - 1].dominating;
        cert.tail_bound = Some(last * tail_q / (1.0 - tail_q));
    }

    if q >= 1.0 {
        cert.verdict = Verdict::NotCertified;
        cert.reason = format!("trailing term ratio {q:.6} ≥ 1");
    } else if cert.tail_log_ratio.is_some_and(|lr| lr >= 0.0) {
        cert.verdict = Verdict::NotCertified;
        cert.reason = format!(
            "tail rule ratio e^{:.6} ≥ 1",
            cert.tail_log_ratio.unwrap_or(0.0)
        );
    } else if !increasing {
        cert.reason = String::from("δ lower envelope does not increase");
    } else {
        cert.verdict = Verdict::Certified;
        cert.reason = format!("trailing ratio ≤ {tail_q:.6}");
    }
    Ok(cert)
}

/// `σ` for a decomposition member: closed form for spheres, the volume
/// bound by diameter otherwise.
pub fn member_sigma(region: &RegionSet) -> f64 {
    match region.primitives.as_slice() {
        [Primitive::Sphere { .. }] => exact_generalized_surface_area(region)
            .map(|s| s.sigma)
            .unwrap_or_else(|| sigma_volume_bound(region.diameter(), region.dim)),
        _ => sigma_volume_bound(region.diameter(), region.dim),
    }
}

/// Certificate for `Σ_n σ(S_n) e^{-γ δ_n}` with
/// `δ_n = dist(diff_support, S_n)`.
pub fn certify_ac(
    decomposition: &TotalDecomposition,
    diff_support: &RegionSet,
    gamma: f64,
) -> Result<DecompositionCertificate> {
    let mut records = Vec::with_capacity(decomposition.members.len());
    for (k, m) in decomposition.members.iter().enumerate() {
        let delta = if diff_support.is_empty() {
            f64::INFINITY
        } else {
            distance_between(diff_support, &m.region)?.lower_bound()
        };
        let sigma = if decomposition.kind == DecompositionKind::SphereShells {
            member_sigma(&m.region)
        } else {
            sigma_volume_bound(m.region.diameter(), m.region.dim)
        };
        records.push(TermRecord::new(
            m.scale,
            k,
            m.role,
            delta,
            m.delta_lower,
            sigma,
            gamma,
        ));
    }
    records.sort_by_key(|r| (r.n, r.member));
    certify_terms(SeriesKind::SurfaceArea, records, gamma, decomposition.tail)
}

/// Certificate for `Σ_n |A_{n+1} ∖ A_{n-1}| e^{-γ δ'_n}` with
/// `δ'_n = min(dist(S_n, diff_support), ½ dist(S_n, S_{n-1} ∪ S_{n+1}))`,
/// over the interior indices of the sequence.
pub fn certify_pp(
    shells: &ShellSequence,
    diff_support: &RegionSet,
    gamma: f64,
) -> Result<DecompositionCertificate> {
    let mut records = Vec::new();
    for i in 1..shells.len().saturating_sub(1) {
        let to_support = if diff_support.is_empty() {
            f64::INFINITY
        } else {
            distance_between(diff_support, &shells.boundary(i)?)?.lower_bound()
        };
        let half_gap = shells.half_neighbour_gap(i).unwrap_or(0.0);
        let delta = to_support.min(half_gap);
        let volume = shells.annular_volume(i).unwrap_or(f64::INFINITY);
        records.push(TermRecord::new(
            shells.scales()[i],
            i,
            MemberRole::Sphere,
            delta,
            shells.delta_lower[i],
            volume,
            gamma,
        ));
    }
    certify_terms(SeriesKind::Volume, records, gamma, shells.tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sphere_shell_decomposition;
    use crate::math::{ln, powi};
    use alloc::vec;

    fn synthetic(
        a: f64,
        d: i32,
        gamma: f64,
        rho: f64,
        ns: core::ops::RangeInclusive<u32>,
    ) -> Vec<TermRecord> {
        ns.map(|n| {
            let sigma = powi(a, n as i32 * (d - 1));
            TermRecord::new(
                n,
                n as usize,
                MemberRole::Sphere,
                n as f64 / 2.0 - rho,
                None,
                sigma,
                gamma,
            )
        })
        .collect()
    }

    #[test]
    fn geometric_examples() {
        let tail = |a: f64, d: f64| TailRule {
            log_growth: (d - 1.0) * ln(a),
            delta_growth: 0.5,
        };
        let good = certify_terms(
            SeriesKind::SurfaceArea,
            synthetic(1.1, 2, 1.0, 0.5, 2..=20),
            1.0,
            Some(tail(1.1, 2.0)),
        )
        .unwrap();
        assert_eq!(good.verdict, Verdict::Certified);
        let q = good.observed_ratio.unwrap();
        assert!((q - exp(ln(1.1) - 0.5)).abs() < 1e-12);
        assert_eq!(good.max_recompute_error(), 0.0);

        let bad = certify_terms(
            SeriesKind::SurfaceArea,
            synthetic(2.0, 3, 0.1, 0.5, 2..=20),
            0.1,
            Some(tail(2.0, 3.0)),
        )
        .unwrap();
        assert_eq!(bad.verdict, Verdict::NotCertified);
    }

    #[test]
    fn empty_support_is_certified() {
        let d = sphere_shell_decomposition(&[1.0, 2.0, 3.0], 2).unwrap();
        let c = certify_ac(&d, &RegionSet::empty(2), 1.0).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        assert!(c
            .records
            .iter()
            .all(|r| r.delta == f64::INFINITY && r.term == 0.0));
    }

    #[test]
    fn no_members_is_inconclusive() {
        let c = certify_terms(SeriesKind::SurfaceArea, Vec::new(), 1.0, None).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert_eq!(c.partial_sum.to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn intersecting_member_is_witnessed() {
        let d = sphere_shell_decomposition(&[1.0, 2.0, 3.0], 2).unwrap();
        let s = RegionSet::ball(vec![2.0, 0.0], 0.5).unwrap();
        let c = certify_ac(&d, &s, 1.0).unwrap();
        assert_eq!(c.verdict, Verdict::NotCertified);
        assert_eq!(c.records[c.witness.unwrap()].n, 2);
    }

    #[test]
    fn too_few_scales_is_inconclusive() {
        let c = certify_terms(
            SeriesKind::SurfaceArea,
            synthetic(1.1, 2, 1.0, 0.5, 2..=4),
            1.0,
            None,
        )
        .unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn pp_examples() {
        // d = 1, radii 2^n + n/2: δ' = ½ min gap grows like 2^{n-2}.
        let radii: Vec<f64> = (1..=14).map(|n| powi(2.0, n) + n as f64 / 2.0).collect();
        let s = ShellSequence::new(1, radii, (1..=14).collect()).unwrap();
        let c = certify_pp(&s, &RegionSet::empty(1), 1.0).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        for r in &c.records {
            let n = r.n as i32;
            let want_vol = 2.0 * (powi(2.0, n + 1) - powi(2.0, n - 1) + 1.0);
            assert!((r.weight - want_vol).abs() < 1e-9);
            let want_delta = 0.5 * (powi(2.0, n - 1) + 0.5);
            assert!((r.delta - want_delta).abs() < 1e-9);
        }

        let equal =
            ShellSequence::new_unchecked(1, vec![1.0, 2.0, 2.0, 3.0, 4.0], vec![1, 2, 3, 4, 5]);
        let c = certify_pp(&equal, &RegionSet::empty(1), 1.0).unwrap();
        assert_eq!(c.verdict, Verdict::NotCertified);
        assert!(c.witness.is_some());
    }
}
