//! Sites, spaces and the six-neighbor graph G.
//!
//! A site `(x, y)` has `x` growing eastward and `y` northward. G joins every
//! site to its north, south, east, west, north-west and south-east
//! neighbors. Sets of sites iterate in `(y, x)` lexicographic order; every
//! "pick any element" choice elsewhere in the crate resolves to the first
//! element in that order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six offsets of G: N, S, E, W, NW, SE.
pub const NEIGHBOR_OFFSETS: [(i64, i64); 6] = [(0, 1), (0, -1), (1, 0), (-1, 0), (-1, 1), (1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub x: i64,
    pub y: i64,
}

impl Site {
    pub const fn new(x: i64, y: i64) -> Self {
        Site { x, y }
    }

    pub const fn offset(self, dx: i64, dy: i64) -> Self {
        Site { x: self.x + dx, y: self.y + dy }
    }
}

impl Ord for Site {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Site {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl From<(i64, i64)> for Site {
    fn from((x, y): (i64, i64)) -> Self {
        Site { x, y }
    }
}

/// The ambient geometry: the infinite plane or an `n x n` torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    Plane,
    Torus(i64),
}

impl Space {
    /// A validated torus; `n >= 3` keeps the six neighbors distinct.
    pub fn torus(n: i64) -> Result<Space> {
        if n < 3 {
            return Err(Error::TorusTooSmall(n));
        }
        Ok(Space::Torus(n))
    }

    pub fn validate(self) -> Result<Space> {
        match self {
            Space::Torus(n) if n < 3 => Err(Error::TorusTooSmall(n)),
            s => Ok(s),
        }
    }

    pub fn is_torus(self) -> bool {
        matches!(self, Space::Torus(_))
    }

    /// Number of sites, `None` on the plane.
    pub fn capacity(self) -> Option<usize> {
        match self {
            Space::Plane => None,
            Space::Torus(n) => Some((n * n) as usize),
        }
    }

    pub fn is_canonical(self, p: Site) -> bool {
        match self {
            Space::Plane => true,
            Space::Torus(n) => (0..n).contains(&p.x) && (0..n).contains(&p.y),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Plane => write!(f, "plane"),
            Space::Torus(n) => write!(f, "torus {n}"),
        }
    }
}

/// Reduces a site to its canonical representative.
pub fn normalize(p: Site, space: Space) -> Site {
    match space {
        Space::Plane => p,
        Space::Torus(n) => Site::new(p.x.rem_euclid(n), p.y.rem_euclid(n)),
    }
}

/// The six G-neighbors of `p`, in N, S, E, W, NW, SE order.
pub fn neighbors(p: Site, space: Space) -> [Site; 6] {
    NEIGHBOR_OFFSETS.map(|(dx, dy)| normalize(p.offset(dx, dy), space))
}

/// Whether `p` and `q` are joined by an edge of G.
pub fn are_neighbors(p: Site, q: Site, space: Space) -> bool {
    neighbors(p, space).contains(&q)
}

/// A finite set of canonical sites in a fixed space.
///
/// On a torus a set is also a 0/1 configuration: the occupied sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteSet {
    space: Space,
    members: BTreeSet<Site>,
}

impl SiteSet {
    pub fn new(space: Space) -> Self {
        SiteSet { space, members: BTreeSet::new() }
    }

    /// Builds a set, reducing torus coordinates.
    pub fn from_sites<I, P>(space: Space, sites: I) -> Self
    where
        I: IntoIterator<Item = P>,
        P: Into<Site>,
    {
        let members = sites.into_iter().map(|p| normalize(p.into(), space)).collect();
        SiteSet { space, members }
    }

    pub fn plane<I, P>(sites: I) -> Self
    where
        I: IntoIterator<Item = P>,
        P: Into<Site>,
    {
        Self::from_sites(Space::Plane, sites)
    }

    /// All `n^2` sites of a torus.
    pub fn full(space: Space) -> Result<Self> {
        match space.validate()? {
            Space::Plane => Err(Error::NotTorus(space)),
            Space::Torus(n) => Ok(Self::from_sites(space, (0..n).flat_map(|y| (0..n).map(move |x| Site::new(x, y))))),
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: Site) -> bool {
        self.members.contains(&normalize(p, self.space))
    }

    pub fn insert(&mut self, p: Site) -> bool {
        self.members.insert(normalize(p, self.space))
    }

    pub fn remove(&mut self, p: Site) -> bool {
        self.members.remove(&normalize(p, self.space))
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Site> + ExactSizeIterator + '_ {
        self.members.iter().copied()
    }

    pub fn first(&self) -> Option<Site> {
        self.members.first().copied()
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn is_disjoint(&self, other: &SiteSet) -> bool {
        self.members.is_disjoint(&other.members)
    }

    pub fn intersects(&self, other: &SiteSet) -> bool {
        !self.is_disjoint(other)
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        SiteSet { space: self.space, members: &self.members | &other.members }
    }

    pub fn difference(&self, other: &SiteSet) -> SiteSet {
        SiteSet { space: self.space, members: &self.members - &other.members }
    }

    pub fn intersection(&self, other: &SiteSet) -> SiteSet {
        SiteSet { space: self.space, members: &self.members & &other.members }
    }

    pub fn retain(&mut self, f: impl FnMut(&Site) -> bool) {
        self.members.retain(f);
    }

    /// Checks that both sets share a space.
    pub fn same_space(&self, other: &SiteSet) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(self.space, other.space))
        }
    }

    /// Translates every member (torus coordinates are re-reduced).
    pub fn translate(&self, dx: i64, dy: i64) -> SiteSet {
        Self::from_sites(self.space, self.iter().map(|p| p.offset(dx, dy)))
    }

    /// Smallest `(xmin, ymin, xmax, ymax)` box, `None` if empty.
    pub fn bounding_box(&self) -> Option<(i64, i64, i64, i64)> {
        let first = self.first()?;
        Some(self.iter().fold((first.x, first.y, first.x, first.y), |(x0, y0, x1, y1), p| {
            (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y))
        }))
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl<'a> IntoIterator for &'a SiteSet {
    type Item = Site;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, Site>>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter().copied()
    }
}

/// Partitions `s` into maximal G-connected pieces, sorted by smallest member.
pub fn connected_components(s: &SiteSet) -> Vec<SiteSet> {
    let space = s.space();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for start in s.iter() {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = SiteSet::new(space);
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(p) = queue.pop_front() {
            comp.insert(p);
            for q in neighbors(p, space) {
                if s.contains(q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Empty sets count as connected.
pub fn is_connected(s: &SiteSet) -> bool {
    connected_components(s).len() <= 1
}

/// Sites of `s \ a` adjacent to some element of `a`.
pub fn boundary(s: &SiteSet, a: &SiteSet) -> Result<SiteSet> {
    s.same_space(a)?;
    if !a.is_subset(s) {
        return Err(Error::NotSubset);
    }
    let space = s.space();
    let mut out = SiteSet::new(space);
    for p in a.iter() {
        for q in neighbors(p, space) {
            if s.contains(q) && !a.contains(q) {
                out.insert(q);
            }
        }
    }
    Ok(out)
}

/// Lifts a connected set to unreduced plane coordinates.
///
/// Coordinates are assigned breadth-first along G-edges starting from the
/// smallest member. Returns `Ok(None)` when two paths disagree on a site's
/// lift, i.e. some cycle has nonzero total increment.
pub fn lift_component(s: &SiteSet) -> Result<Option<SiteSet>> {
    if !is_connected(s) {
        return Err(Error::Disconnected);
    }
    let space = s.space();
    let Some(start) = s.first() else {
        return Ok(Some(SiteSet::new(Space::Plane)));
    };
    if space == Space::Plane {
        return Ok(Some(SiteSet::from_sites(Space::Plane, s.iter())));
    }
    let mut lift: BTreeMap<Site, Site> = BTreeMap::from([(start, start)]);
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        let lp = lift[&p];
        for (dx, dy) in NEIGHBOR_OFFSETS {
            let q = normalize(p.offset(dx, dy), space);
            if !s.contains(q) {
                continue;
            }
            let lq = lp.offset(dx, dy);
            match lift.get(&q) {
                Some(&existing) if existing != lq => return Ok(None),
                Some(_) => {}
                None => {
                    lift.insert(q, lq);
                    queue.push_back(q);
                }
            }
        }
    }
    Ok(Some(SiteSet::from_sites(Space::Plane, lift.into_values())))
}

/// Whether a connected set admits a consistent planar lift.
pub fn is_simple_component(s: &SiteSet) -> Result<bool> {
    Ok(lift_component(s)?.is_some())
}

/// Seeded random growth of a connected set of exactly `size` sites.
///
/// Starts at the origin and repeatedly adds a uniformly chosen site from
/// the current outer boundary (taken in canonical order).
pub fn random_connected_set(space: Space, size: usize, seed: u64) -> Result<SiteSet> {
    let space = space.validate()?;
    if size == 0 {
        return Err(Error::Empty);
    }
    if let Some(capacity) = space.capacity() {
        if size > capacity {
            return Err(Error::CapacityExceeded { requested: size, capacity });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = SiteSet::new(space);
    set.insert(Site::new(0, 0));
    let mut frontier: BTreeSet<Site> = neighbors(Site::new(0, 0), space).into_iter().collect();
    while set.len() < size {
        let candidates: Vec<Site> = frontier.iter().copied().collect();
        let &p = candidates.choose(&mut rng).expect("frontier of a non-full set is nonempty");
        frontier.remove(&p);
        set.insert(p);
        for q in neighbors(p, space) {
            if !set.contains(q) {
                frontier.insert(q);
            }
        }
    }
    Ok(set)
}
