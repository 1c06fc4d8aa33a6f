//! Triangles `L(a,b,c)`, deflation, and the span functional `span(E, d)`.
//!
//! With `L1(x,y) = -x`, `L2 = -y`, `L3 = x + y`, the triangle `L(a,b,c)` is
//! the region where `L1 <= a`, `L2 <= b` and `L3 <= c`; its span is
//! `a + b + c`. Deflation amounts come in multiples of 1/3, so every
//! parameter is stored exactly as an integer count of thirds.
//!
//! `span(E, d)` is the least total span of a family of triangles whose
//! `d`-deflations cover `E`. For `d >= 1/3`, two blocks containing
//! G-neighbors can always be merged into one triangle at no extra cost, so
//! an optimal family has one triangle per group of connected components,
//! each triangle being the group's bounding triangle inflated by `d`. The
//! minimum is then a set-partition problem over the components.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{connected_components, lift_component, Site, SiteSet, Space};

/// A rational `v / 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Thirds(pub i64);

impl Thirds {
    pub const ZERO: Thirds = Thirds(0);
    pub const ONE_THIRD: Thirds = Thirds(1);
    /// The deflation used by `Span`.
    pub const DEFL: Thirds = Thirds(6);

    pub const fn from_int(n: i64) -> Self {
        Thirds(3 * n)
    }

    /// The count of thirds.
    pub const fn raw(self) -> i64 {
        self.0
    }

    /// Some(n) when the value is the integer n.
    pub fn as_int(self) -> Option<i64> {
        (self.0 % 3 == 0).then_some(self.0 / 3)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 3.0
    }
}

impl fmt::Display for Thirds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_int() {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "{}/3", self.0),
        }
    }
}

impl FromStr for Thirds {
    type Err = Error;

    /// Accepts `n`, `n/3` or `n/1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("`{s}` is not an integer or a multiple of 1/3"));
        let s = s.trim();
        match s.split_once('/') {
            None => s.parse::<i64>().map(Thirds::from_int).map_err(|_| bad()),
            Some((num, den)) => {
                let num: i64 = num.trim().parse().map_err(|_| bad())?;
                match den.trim() {
                    "3" => Ok(Thirds(num)),
                    "1" => Ok(Thirds::from_int(num)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

impl Add for Thirds {
    type Output = Thirds;
    fn add(self, rhs: Thirds) -> Thirds {
        Thirds(self.0 + rhs.0)
    }
}

impl AddAssign for Thirds {
    fn add_assign(&mut self, rhs: Thirds) {
        self.0 += rhs.0;
    }
}

impl Sub for Thirds {
    type Output = Thirds;
    fn sub(self, rhs: Thirds) -> Thirds {
        Thirds(self.0 - rhs.0)
    }
}

impl Neg for Thirds {
    type Output = Thirds;
    fn neg(self) -> Thirds {
        Thirds(-self.0)
    }
}

impl Mul<i64> for Thirds {
    type Output = Thirds;
    fn mul(self, rhs: i64) -> Thirds {
        Thirds(self.0 * rhs)
    }
}

impl std::iter::Sum for Thirds {
    fn sum<I: Iterator<Item = Thirds>>(iter: I) -> Thirds {
        iter.fold(Thirds::ZERO, Add::add)
    }
}

/// A nonempty triangle `L(a,b,c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triangle {
    a: Thirds,
    b: Thirds,
    c: Thirds,
}

impl Triangle {
    /// `None` when `a + b + c < 0`, i.e. the region is empty.
    pub fn new(a: Thirds, b: Thirds, c: Thirds) -> Option<Triangle> {
        (a + b + c >= Thirds::ZERO).then_some(Triangle { a, b, c })
    }

    pub fn from_ints(a: i64, b: i64, c: i64) -> Option<Triangle> {
        Self::new(Thirds::from_int(a), Thirds::from_int(b), Thirds::from_int(c))
    }

    pub fn params(&self) -> (Thirds, Thirds, Thirds) {
        (self.a, self.b, self.c)
    }

    pub fn span(&self) -> Thirds {
        self.a + self.b + self.c
    }

    /// `D(I, d)`: every bound reduced by `d`. Negative `d` blows the
    /// triangle up. `None` once the result is empty.
    pub fn deflate(&self, d: Thirds) -> Option<Triangle> {
        Triangle::new(self.a - d, self.b - d, self.c - d)
    }

    pub fn contains(&self, p: Site) -> bool {
        Thirds::from_int(-p.x) <= self.a && Thirds::from_int(-p.y) <= self.b && Thirds::from_int(p.x + p.y) <= self.c
    }

    /// Whether `other` lies inside `self` as a region.
    pub fn contains_triangle(&self, other: &Triangle) -> bool {
        other.a <= self.a && other.b <= self.b && other.c <= self.c
    }

    pub fn intersection(&self, other: &Triangle) -> Option<Triangle> {
        Triangle::new(self.a.min(other.a), self.b.min(other.b), self.c.min(other.c))
    }

    pub fn intersects(&self, other: &Triangle) -> bool {
        self.intersection(other).is_some()
    }

    /// Lattice points of the triangle, in canonical order.
    pub fn lattice_points(&self) -> SiteSet {
        let xmin = ceil_div3(-self.a.0);
        let ymin = ceil_div3(-self.b.0);
        let cmax = floor_div3(self.c.0);
        let mut out = SiteSet::new(Space::Plane);
        for y in ymin..=cmax - xmin {
            for x in xmin..=cmax - y {
                out.insert(Site::new(x, y));
            }
        }
        out
    }
}

impl fmt::Display for Triangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L({},{},{})", self.a, self.b, self.c)
    }
}

fn floor_div3(v: i64) -> i64 {
    v.div_euclid(3)
}

fn ceil_div3(v: i64) -> i64 {
    -(-v).div_euclid(3)
}

/// The smallest triangle containing two intersecting triangles.
///
/// Its span is at most the sum of the two spans: the componentwise maximum
/// and minimum add up to the sum of both parameter triples, and the
/// minimum is the (nonempty) intersection.
pub fn merge_intersecting(t1: &Triangle, t2: &Triangle) -> Result<Triangle> {
    if !t1.intersects(t2) {
        return Err(Error::DisjointTriangles);
    }
    let merged = Triangle::new(t1.a.max(t2.a), t1.b.max(t2.b), t1.c.max(t2.c))
        .expect("the hull of nonempty triangles is nonempty");
    debug_assert!(merged.span() <= t1.span() + t2.span());
    debug_assert!(merged.contains_triangle(t1) && merged.contains_triangle(t2));
    Ok(merged)
}

/// Integer extremes of a plane point set: `max(-x)`, `max(-y)`, `max(x+y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Extent {
    pub neg_x: i64,
    pub neg_y: i64,
    pub sum: i64,
}

impl Extent {
    pub fn of_site(p: Site) -> Extent {
        Extent { neg_x: -p.x, neg_y: -p.y, sum: p.x + p.y }
    }

    pub fn of_sites(sites: impl IntoIterator<Item = Site>) -> Option<Extent> {
        sites.into_iter().map(Extent::of_site).reduce(Extent::join)
    }

    pub fn join(self, o: Extent) -> Extent {
        Extent { neg_x: self.neg_x.max(o.neg_x), neg_y: self.neg_y.max(o.neg_y), sum: self.sum.max(o.sum) }
    }

    /// Span of the bounding triangle, an integer.
    pub fn span(&self) -> i64 {
        self.neg_x + self.neg_y + self.sum
    }

    pub fn triangle(&self) -> Triangle {
        Triangle::from_ints(self.neg_x, self.neg_y, self.sum).expect("bounding triangles are nonempty")
    }
}

/// The tightest triangle containing a nonempty connected set.
///
/// Torus sets are lifted to the plane first, which needs a simple
/// component.
pub fn bounding_triangle(e: &SiteSet) -> Result<Triangle> {
    if e.is_empty() {
        return Err(Error::Empty);
    }
    let lifted;
    let plane_set = match e.space() {
        Space::Plane => e,
        Space::Torus(_) => {
            lifted = lift_component(e)?.ok_or(Error::NonSimple)?;
            &lifted
        }
    };
    Ok(Extent::of_sites(plane_set.iter()).expect("nonempty").triangle())
}

/// Span of the bounding triangle of a connected set (integer valued).
pub fn bounding_span(e: &SiteSet) -> Result<i64> {
    let (a, b, c) = bounding_triangle(e)?.params();
    Ok((a + b + c).as_int().expect("integer bounds"))
}

/// Largest component count for which `span_d` searches every grouping.
pub const EXACT_COMPONENT_LIMIT: usize = 12;

/// A minimal (or, beyond the exact limit, heuristic) triangle cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverResult {
    pub value: Thirds,
    pub exact: bool,
    /// Each block is a union of connected components covered by one triangle.
    pub blocks: Vec<SiteSet>,
}

/// Cover cost of a group: bounding span plus `3d`.
fn group_cost(ext: Extent, d: Thirds) -> Thirds {
    Thirds::from_int(ext.span()) + d * 3
}

/// Minimizes the total cover cost over groupings of the given pieces.
///
/// Returns the value, whether the search was exhaustive, and the grouping
/// as lists of piece indices.
pub fn min_grouping(pieces: &[Extent], d: Thirds) -> (Thirds, bool, Vec<Vec<usize>>) {
    let n = pieces.len();
    if n == 0 {
        return (Thirds::ZERO, true, Vec::new());
    }
    if n == 1 {
        return (group_cost(pieces[0], d), true, vec![vec![0]]);
    }
    if n <= EXACT_COMPONENT_LIMIT {
        let (value, groups) = exact_grouping(pieces, d);
        return (value, true, groups);
    }
    let singles: Thirds = pieces.iter().map(|&e| group_cost(e, d)).sum();
    let (greedy, groups) = greedy_grouping(pieces, d);
    if greedy <= singles {
        (greedy, false, groups)
    } else {
        (singles, false, (0..n).map(|i| vec![i]).collect())
    }
}

fn exact_grouping(pieces: &[Extent], d: Thirds) -> (Thirds, Vec<Vec<usize>>) {
    let n = pieces.len();
    let full = (1usize << n) - 1;
    let mut cost = vec![Thirds::ZERO; full + 1];
    let mut ext = vec![pieces[0]; full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        ext[mask] = if rest == 0 { pieces[low] } else { ext[rest].join(pieces[low]) };
        cost[mask] = group_cost(ext[mask], d);
    }
    let mut best = vec![Thirds::ZERO; full + 1];
    let mut choice = vec![0usize; full + 1];
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let others = mask ^ low;
        // Blocks containing the lowest piece: low | (any submask of others).
        let mut sub = others;
        let mut best_v = None;
        loop {
            let block = sub | low;
            let v = cost[block] + best[mask ^ block];
            if best_v.is_none_or(|b| v < b) {
                best_v = Some(v);
                choice[mask] = block;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & others;
        }
        best[mask] = best_v.expect("at least one block");
    }
    let mut groups = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let block = choice[mask];
        groups.push((0..n).filter(|i| block & (1 << i) != 0).collect());
        mask ^= block;
    }
    groups.sort();
    (best[full], groups)
}

fn greedy_grouping(pieces: &[Extent], d: Thirds) -> (Thirds, Vec<Vec<usize>>) {
    let mut groups: Vec<(Extent, Vec<usize>)> = pieces.iter().enumerate().map(|(i, &e)| (e, vec![i])).collect();
    loop {
        let mut best: Option<(Thirds, usize, usize)> = None;
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let joined = groups[i].0.join(groups[j].0);
                let gain = group_cost(joined, d) - group_cost(groups[i].0, d) - group_cost(groups[j].0, d);
                if gain < Thirds::ZERO && best.is_none_or(|(g, _, _)| gain < g) {
                    best = Some((gain, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        let (ej, mj) = groups.remove(j);
        groups[i].0 = groups[i].0.join(ej);
        groups[i].1.extend(mj);
    }
    let value = groups.iter().map(|(e, _)| group_cost(*e, d)).sum();
    let mut out: Vec<Vec<usize>> = groups
        .into_iter()
        .map(|(_, mut m)| {
            m.sort();
            m
        })
        .collect();
    out.sort();
    (value, out)
}

/// `span(E, d)` for `d >= 1/3`.
///
/// On a torus each component is lifted separately and covered by its own
/// triangle (lifts of different components have no common frame), so the
/// result is flagged inexact when there are several components.
pub fn span_d(e: &SiteSet, d: Thirds) -> Result<CoverResult> {
    if d < Thirds::ONE_THIRD {
        return Err(Error::DeflationTooSmall(d));
    }
    let comps = connected_components(e);
    match e.space() {
        Space::Plane => {
            let extents: Vec<Extent> =
                comps.iter().map(|c| Extent::of_sites(c.iter()).expect("components are nonempty")).collect();
            let (value, exact, groups) = min_grouping(&extents, d);
            let blocks = groups
                .into_iter()
                .map(|g| g.into_iter().fold(SiteSet::new(Space::Plane), |acc, i| acc.union(&comps[i])))
                .collect();
            Ok(CoverResult { value, exact, blocks })
        }
        Space::Torus(_) => {
            let mut value = Thirds::ZERO;
            for c in &comps {
                let lifted = lift_component(c)?.ok_or(Error::NonSimple)?;
                value += group_cost(Extent::of_sites(lifted.iter()).expect("nonempty"), d);
            }
            Ok(CoverResult { value, exact: comps.len() <= 1, blocks: comps })
        }
    }
}

/// `Span(E) = span(E, 2)`.
pub fn big_span(e: &SiteSet) -> Result<Thirds> {
    Ok(span_d(e, Thirds::DEFL)?.value)
}

/// The discrete span `span(E, 1/3)`.
pub fn discrete_span(e: &SiteSet) -> Result<Thirds> {
    Ok(span_d(e, Thirds::ONE_THIRD)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th(s: &str) -> Thirds {
        s.parse().unwrap()
    }

    fn tri(a: &str, b: &str, c: &str) -> Triangle {
        Triangle::new(th(a), th(b), th(c)).unwrap()
    }

    #[test]
    fn thirds_parse_and_display() {
        assert_eq!(th("1/3"), Thirds(1));
        assert_eq!(th("2"), Thirds(6));
        assert_eq!(th("-1/3"), Thirds(-1));
        assert_eq!(th("4/3").to_string(), "4/3");
        assert_eq!(Thirds(6).to_string(), "2");
        assert!("1/2".parse::<Thirds>().is_err());
        assert!("x".parse::<Thirds>().is_err());
    }

    #[test]
    fn bounding_triangle_examples() {
        let t = bounding_triangle(&SiteSet::plane([(2, 3)])).unwrap();
        assert_eq!(t, Triangle::from_ints(-2, -3, 5).unwrap());
        assert_eq!(t.span(), Thirds::ZERO);
        let t = bounding_triangle(&SiteSet::plane([(0, 0), (1, 0), (0, 1)])).unwrap();
        assert_eq!(t, Triangle::from_ints(0, 0, 1).unwrap());
        let t = bounding_triangle(&SiteSet::plane((0..5).map(|i| (i, 0)))).unwrap();
        assert_eq!(t, Triangle::from_ints(0, 0, 4).unwrap());
        assert_eq!(t.span(), Thirds::from_int(4));
        assert_eq!(bounding_triangle(&SiteSet::new(Space::Plane)), Err(Error::Empty));
    }

    #[test]
    fn bounding_triangle_rejects_torus_ring() {
        let t5 = Space::torus(5).unwrap();
        let ring = SiteSet::from_sites(t5, (0..5).map(|i| (i, 0)));
        assert_eq!(bounding_triangle(&ring), Err(Error::NonSimple));
        let arc = SiteSet::from_sites(t5, [(4, 0), (0, 0), (1, 0)]);
        assert_eq!(bounding_span(&arc).unwrap(), 2);
    }

    #[test]
    fn deflate_examples() {
        let t = Triangle::from_ints(0, 0, 4).unwrap();
        assert_eq!(t.deflate(Thirds::ZERO), Some(t));
        assert_eq!(t.deflate(Thirds::from_int(2)), None);
        let t = Triangle::from_ints(0, 0, 1).unwrap();
        let blown = t.deflate(th("-1/3")).unwrap();
        assert_eq!(blown, tri("1/3", "1/3", "4/3"));
        assert_eq!(blown.span(), Thirds::from_int(2));
    }

    #[test]
    fn contains_examples() {
        let t = Triangle::from_ints(0, 0, 1).unwrap();
        assert!(t.contains(Site::new(0, 0)));
        assert!(!t.contains(Site::new(1, 1)));
        assert!(Triangle::from_ints(-2, -3, 5).unwrap().contains(Site::new(2, 3)));
    }

    #[test]
    fn merge_examples() {
        let t1 = Triangle::from_ints(0, 0, 1).unwrap();
        assert_eq!(merge_intersecting(&t1, &t1).unwrap(), t1);
        let t2 = Triangle::from_ints(-1, 0, 2).unwrap();
        let m = merge_intersecting(&t1, &t2).unwrap();
        assert_eq!(m, Triangle::from_ints(0, 0, 2).unwrap());
        assert!(m.span() <= t1.span() + t2.span());
        let p = Triangle::from_ints(0, 0, 0).unwrap();
        let big = Triangle::from_ints(0, 0, 4).unwrap();
        assert_eq!(merge_intersecting(&p, &big).unwrap(), big);
        let far = Triangle::from_ints(-5, 0, 5).unwrap();
        assert_eq!(merge_intersecting(&p, &far), Err(Error::DisjointTriangles));
    }

    #[test]
    fn span_d_examples() {
        let one = Thirds::ONE_THIRD;
        let two = Thirds::from_int(2);
        assert_eq!(span_d(&SiteSet::plane([(0, 0)]), one).unwrap().value, Thirds::from_int(1));
        assert_eq!(span_d(&SiteSet::new(Space::Plane), two).unwrap().value, Thirds::ZERO);
        assert_eq!(span_d(&SiteSet::plane([(0, 0)]), two).unwrap().value, Thirds::from_int(6));
        assert_eq!(span_d(&SiteSet::plane([(0, 0), (1, 0)]), one).unwrap().value, Thirds::from_int(2));
        let apart = span_d(&SiteSet::plane([(0, 0), (7, 0)]), two).unwrap();
        assert_eq!(apart.value, Thirds::from_int(12));
        assert_eq!(apart.blocks.len(), 2);
        assert!(apart.exact);
        assert_eq!(span_d(&SiteSet::plane([(0, 0)]), Thirds::ZERO), Err(Error::DeflationTooSmall(Thirds::ZERO)));
    }

    #[test]
    fn nearby_components_share_a_triangle() {
        // Two points two apart: separate at d = 1/3 (1 + 1 < 2 + 1),
        // merged at d = 2 (2 + 6 < 6 + 6).
        let r = span_d(&SiteSet::plane([(0, 0), (2, 0)]), Thirds::ONE_THIRD).unwrap();
        assert_eq!(r.value, Thirds::from_int(2));
        assert_eq!(r.blocks.len(), 2);
        let r = span_d(&SiteSet::plane([(0, 0), (2, 0)]), Thirds::DEFL).unwrap();
        assert_eq!(r.value, Thirds::from_int(8));
        assert_eq!(r.blocks.len(), 1);
    }

    #[test]
    fn lattice_point_count_of_full_triangle() {
        for i in 0..8 {
            let t = Triangle::from_ints(0, 0, i).unwrap();
            assert_eq!(t.lattice_points().len() as i64, (i + 1) * (i + 2) / 2);
        }
        let t = tri("1/3", "1/3", "4/3");
        assert_eq!(t.lattice_points(), SiteSet::plane([(0, 0), (1, 0), (0, 1)]));
    }

    // The criterion is about a single covering triangle: the size-1
    // triangles around the two points intersect. Two separate unit
    // triangles always cover a pair for a total of 2.
    #[test]
    fn neighbors_iff_single_triangle_discrete_span_at_most_two() {
        let o = Site::new(0, 0);
        let unit = |p: Site| Triangle::from_ints(-p.x, -p.y, p.x + p.y).unwrap().deflate(Thirds(-1)).unwrap();
        for dx in -3..=3 {
            for dy in -3..=3 {
                let p = Site::new(dx, dy);
                if p == o {
                    continue;
                }
                let pair = SiteSet::plane([o, p]);
                let single = Thirds::from_int(bounding_span(&pair).unwrap()) + Thirds::ONE_THIRD * 3;
                let adjacent = crate::lattice::are_neighbors(o, p, Space::Plane);
                assert_eq!(single <= Thirds::from_int(2), adjacent, "{p}");
                assert_eq!(unit(o).intersects(&unit(p)), adjacent, "{p}");
                assert_eq!(discrete_span(&pair).unwrap(), Thirds::from_int(2));
            }
        }
    }

    #[test]
    fn greedy_fallback_beyond_exact_limit() {
        // Thirteen far-apart points: the heuristic keeps them separate.
        let s = SiteSet::plane((0..13).map(|i| (10 * i, 0)));
        let r = span_d(&s, Thirds::DEFL).unwrap();
        assert!(!r.exact);
        assert_eq!(r.value, Thirds::from_int(13 * 6));
        // Thirteen points two apart: merging everything is cheaper.
        let s = SiteSet::plane((0..13).map(|i| (2 * i, 0)));
        let r = span_d(&s, Thirds::DEFL).unwrap();
        assert_eq!(r.value, Thirds::from_int(24 + 6));
    }
}
