//! The tile operator Q, Toom's rule R and the biased rule R+ = Q∘R∘R.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{normalize, Site, SiteSet, Space};

/// Corner `i` (1-based) of the tile centered at `p`: `p`, `p+(1,0)`, `p+(0,1)`.
pub fn corner(p: Site, i: usize, space: Space) -> Site {
    let q = match i {
        1 => p,
        2 => p.offset(1, 0),
        3 => p.offset(0, 1),
        _ => panic!("tile corners are numbered 1..=3, got {i}"),
    };
    normalize(q, space)
}

/// Center of the tile whose corner `i` is `q`, i.e. the `b` with `e_i(b) = q`.
pub fn center_with_corner(q: Site, i: usize, space: Space) -> Site {
    let b = match i {
        1 => q,
        2 => q.offset(-1, 0),
        3 => q.offset(0, -1),
        _ => panic!("tile corners are numbered 1..=3, got {i}"),
    };
    normalize(b, space)
}

/// The three corners `[e1, e2, e3]` of the tile centered at `p`.
pub fn tile_corners(p: Site, space: Space) -> [Site; 3] {
    [corner(p, 1, space), corner(p, 2, space), corner(p, 3, space)]
}

pub fn tile(p: Site, space: Space) -> SiteSet {
    SiteSet::from_sites(space, tile_corners(p, space))
}

/// Centers of the three tiles containing `q`, ordered so that entry `i-1`
/// has `q` as its corner `i`.
pub fn tiles_containing(q: Site, space: Space) -> [Site; 3] {
    [center_with_corner(q, 1, space), center_with_corner(q, 2, space), center_with_corner(q, 3, space)]
}

/// Whether `s` holds the tile centered at `p` (meets it in two or more sites).
pub fn holds(s: &SiteSet, p: Site) -> bool {
    tile_corners(p, s.space()).iter().filter(|&&q| s.contains(q)).count() >= 2
}

/// Toom's north-east-center majority rule.
pub fn apply_r(s: &SiteSet) -> SiteSet {
    let space = s.space();
    let mut out = SiteSet::new(space);
    for q in s.iter() {
        for p in tiles_containing(q, space) {
            if !out.contains(p) && holds(s, p) {
                out.insert(p);
            }
        }
    }
    out
}

/// Inflation: the union of the tiles centered at the members of `s`.
pub fn apply_q(s: &SiteSet) -> SiteSet {
    let space = s.space();
    SiteSet::from_sites(space, s.iter().flat_map(|p| tile_corners(p, space)))
}

pub fn apply_rplus(s: &SiteSet) -> SiteSet {
    apply_q(&apply_r(&apply_r(s)))
}

/// R+ in its pointwise form: `p` is occupied iff R²(S) contains one of
/// `p`, `p-(0,1)`, `p-(1,0)`.
pub fn apply_rplus_max_form(s: &SiteSet) -> SiteSet {
    let space = s.space();
    let rr = apply_r(&apply_r(s));
    let mut out = SiteSet::new(space);
    for q in rr.iter() {
        for p in [q, q.offset(0, 1), q.offset(1, 0)] {
            let p = normalize(p, space);
            let hit = [p, p.offset(0, -1), p.offset(-1, 0)].into_iter().any(|r| rr.contains(r));
            if hit {
                out.insert(p);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleId {
    R,
    Q,
    RPlus,
}

impl RuleId {
    pub fn apply(self, s: &SiteSet) -> SiteSet {
        match self {
            RuleId::R => apply_r(s),
            RuleId::Q => apply_q(s),
            RuleId::RPlus => apply_rplus(s),
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleId::R => "r",
            RuleId::Q => "q",
            RuleId::RPlus => "rplus",
        })
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r" => Ok(RuleId::R),
            "q" => Ok(RuleId::Q),
            "rplus" | "r+" => Ok(RuleId::RPlus),
            other => Err(Error::Config(format!("unknown rule `{other}`"))),
        }
    }
}

/// Applies `rule` `k` times.
pub fn iterate(rule: RuleId, s: &SiteSet, k: usize) -> SiteSet {
    let mut cur = s.clone();
    for _ in 0..k {
        cur = rule.apply(&cur);
    }
    cur
}

/// A single-site fault overwriting the state after the rule of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureEvent {
    /// 1-based step after whose rule application the fault lands.
    pub step: usize,
    pub site: Site,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionTrace {
    pub rule: RuleId,
    pub space: Space,
    /// `states[t]` is the configuration after `t` steps.
    pub states: Vec<SiteSet>,
}

impl EvolutionTrace {
    pub fn last(&self) -> &SiteSet {
        self.states.last().expect("a trace always holds the initial state")
    }
}

/// Runs `steps` synchronous updates, overlaying each step's failures after
/// the rule has been applied.
pub fn evolve(rule: RuleId, s: &SiteSet, steps: usize, failures: &[FailureEvent]) -> Result<EvolutionTrace> {
    let space = s.space();
    for f in failures {
        if !space.is_canonical(f.site) {
            return Err(Error::NonCanonicalSite { site: f.site, space });
        }
        if f.step == 0 || f.step > steps {
            return Err(Error::FailureOutOfRange { step: f.step, steps });
        }
    }
    let mut states = Vec::with_capacity(steps + 1);
    states.push(s.clone());
    for t in 1..=steps {
        let mut next = rule.apply(&states[t - 1]);
        for f in failures.iter().filter(|f| f.step == t) {
            if f.value {
                next.insert(f.site);
            } else {
                next.remove(f.site);
            }
        }
        states.push(next);
    }
    Ok(EvolutionTrace { rule, space, states })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Homogeneity {
    H0,
    H1,
    Neither,
}

impl fmt::Display for Homogeneity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Homogeneity::H0 => "h0",
            Homogeneity::H1 => "h1",
            Homogeneity::Neither => "neither",
        })
    }
}

pub fn is_homogeneous(s: &SiteSet) -> Result<Homogeneity> {
    let capacity = s.space().capacity().ok_or(Error::NotTorus(s.space()))?;
    Ok(if s.is_empty() {
        Homogeneity::H0
    } else if s.len() == capacity {
        Homogeneity::H1
    } else {
        Homogeneity::Neither
    })
}

/// Long-run behavior of a deterministic iteration on a finite torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Erasure {
    /// Reached the empty set after this many steps.
    Erased { steps: usize },
    /// Entered a cycle of nonempty states.
    Persists { cycle_start: usize, period: usize },
}

/// Iterates `rule` on a torus set until it empties or revisits a state.
///
/// `cap` bounds the number of steps; `None` uses `4 n^2`.
pub fn run_to_erasure(rule: RuleId, s: &SiteSet, cap: Option<usize>) -> Result<Erasure> {
    let Space::Torus(n) = s.space() else {
        return Err(Error::NotTorus(s.space()));
    };
    let cap = cap.unwrap_or((4 * n * n) as usize);
    let mut seen: HashMap<SiteSet, usize> = HashMap::new();
    let mut cur = s.clone();
    for t in 0..=cap {
        if cur.is_empty() {
            return Ok(Erasure::Erased { steps: t });
        }
        if let Some(&first) = seen.get(&cur) {
            return Ok(Erasure::Persists { cycle_start: first, period: t - first });
        }
        let next = rule.apply(&cur);
        seen.insert(cur, t);
        cur = next;
    }
    Err(Error::StepCapExceeded(cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{connected_components, is_connected};

    fn plane(v: &[(i64, i64)]) -> SiteSet {
        SiteSet::plane(v.iter().copied())
    }

    fn seg(n: i64) -> SiteSet {
        SiteSet::plane((0..n).map(|i| (i, 0)))
    }

    #[test]
    fn tile_examples() {
        assert_eq!(tile(Site::new(0, 0), Space::Plane), plane(&[(0, 0), (1, 0), (0, 1)]));
        let t5 = Space::torus(5).unwrap();
        assert_eq!(tile(Site::new(4, 4), t5), SiteSet::from_sites(t5, [(4, 4), (0, 4), (4, 0)]));
        assert_eq!(tile(Site::new(2, 3), Space::Plane), plane(&[(2, 3), (3, 3), (2, 4)]));
    }

    #[test]
    fn r_examples() {
        assert!(apply_r(&plane(&[(0, 0)])).is_empty());
        assert_eq!(apply_r(&plane(&[(0, 0), (1, 0), (0, 1)])), plane(&[(0, 0)]));
        assert_eq!(apply_r(&seg(5)), seg(4));
        let t5 = Space::torus(5).unwrap();
        let ring = SiteSet::from_sites(t5, (0..5).map(|i| (i, 0)));
        assert_eq!(apply_r(&ring), ring);
    }

    #[test]
    fn q_examples() {
        assert!(apply_q(&SiteSet::new(Space::Plane)).is_empty());
        assert_eq!(apply_q(&plane(&[(0, 0)])), plane(&[(0, 0), (1, 0), (0, 1)]));
        assert_eq!(apply_q(&seg(3)), plane(&[(0, 0), (1, 0), (2, 0), (3, 0), (0, 1), (1, 1), (2, 1)]));
    }

    #[test]
    fn rplus_examples() {
        let expected = plane(&[(0, 0), (1, 0), (2, 0), (3, 0), (0, 1), (1, 1), (2, 1)]);
        assert_eq!(apply_rplus(&seg(5)), expected);
        assert_eq!(apply_rplus_max_form(&seg(5)), expected);
        assert!(apply_rplus(&SiteSet::new(Space::Plane)).is_empty());
        let full = SiteSet::full(Space::torus(4).unwrap()).unwrap();
        assert_eq!(apply_rplus(&full), full);
    }

    #[test]
    fn evolve_examples() {
        let s = plane(&[(0, 0), (1, 0)]);
        let tr = evolve(RuleId::R, &s, 1, &[]).unwrap();
        assert_eq!(tr.states.len(), 2);
        assert_eq!(tr.states[1], plane(&[(0, 0)]));

        let fault = FailureEvent { step: 1, site: Site::new(5, 5), value: true };
        let tr = evolve(RuleId::R, &s, 1, &[fault]).unwrap();
        assert_eq!(tr.states[1], plane(&[(0, 0), (5, 5)]));

        let tr = evolve(RuleId::Q, &plane(&[(0, 0)]), 2, &[]).unwrap();
        assert_eq!(tr.last().len(), 6);
        assert_eq!(tr.last(), &apply_q(&apply_q(&plane(&[(0, 0)]))));
    }

    #[test]
    fn evolve_rejects_bad_failures() {
        let t4 = Space::torus(4).unwrap();
        let s = SiteSet::new(t4);
        let off = FailureEvent { step: 1, site: Site::new(4, 0), value: true };
        assert!(matches!(evolve(RuleId::R, &s, 2, &[off]), Err(Error::NonCanonicalSite { .. })));
        let late = FailureEvent { step: 3, site: Site::new(0, 0), value: true };
        assert!(matches!(evolve(RuleId::R, &s, 2, &[late]), Err(Error::FailureOutOfRange { .. })));
    }

    #[test]
    fn zero_failure_clears_a_site() {
        let s = plane(&[(0, 0), (1, 0)]);
        let fault = FailureEvent { step: 1, site: Site::new(0, 0), value: false };
        assert!(evolve(RuleId::R, &s, 1, &[fault]).unwrap().last().is_empty());
    }

    #[test]
    fn homogeneity_examples() {
        let t4 = Space::torus(4).unwrap();
        assert_eq!(is_homogeneous(&SiteSet::new(t4)).unwrap(), Homogeneity::H0);
        assert_eq!(is_homogeneous(&SiteSet::full(t4).unwrap()).unwrap(), Homogeneity::H1);
        assert_eq!(is_homogeneous(&SiteSet::from_sites(t4, [(1, 1)])).unwrap(), Homogeneity::Neither);
        assert_eq!(is_homogeneous(&SiteSet::new(Space::Plane)), Err(Error::NotTorus(Space::Plane)));
    }

    #[test]
    fn erasure_on_torus() {
        let t5 = Space::torus(5).unwrap();
        let blob = SiteSet::from_sites(t5, [(0, 0), (1, 0), (0, 1), (2, 2)]);
        assert!(matches!(run_to_erasure(RuleId::R, &blob, None), Ok(Erasure::Erased { .. })));
        let ring = SiteSet::from_sites(t5, (0..5).map(|i| (i, 0)));
        assert_eq!(run_to_erasure(RuleId::R, &ring, None).unwrap(), Erasure::Persists { cycle_start: 0, period: 1 });
    }

    #[test]
    fn connected_image_under_r_stays_connected() {
        let s = plane(&[(0, 0), (1, 0), (2, 0), (2, 1), (2, 2), (3, 2)]);
        let r = apply_r(&s);
        assert!(is_connected(&r));
        assert_eq!(connected_components(&r).len(), 1);
    }
}
