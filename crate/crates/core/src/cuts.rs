//! Cuts of connected sets and the thickness functionals Θ and θ.
//!
//! A cut `(C, A1, A2)` of a connected `S` is a triple of disjoint subsets
//! such that every path in `S` from `A1` to `A2` meets `C`. Its parameters
//! are `k = |C|` and `m = min_j Span(A_j ∪ C)`.
//!
//! Thickness is computed by exhaustive search. Enumerating cutting sets `C`
//! in order of size is enough; for a fixed `C` only the sides need choosing,
//! and any cut can be closed (each side grown to the union of the
//! components of `S \ C` it meets) without shrinking `m` and without
//! breaking the connectedness of `A_j ∪ C`. So sides range over unions of
//! components of `S \ C`.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{big_span, min_grouping, Extent, Thirds};
use crate::lattice::{boundary, connected_components, is_connected, lift_component, neighbors, Site, SiteSet, Space};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub c: SiteSet,
    pub a1: SiteSet,
    pub a2: SiteSet,
}

impl Cut {
    pub fn new(c: SiteSet, a1: SiteSet, a2: SiteSet) -> Self {
        Cut { c, a1, a2 }
    }

    pub fn k(&self) -> usize {
        self.c.len()
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C={} A1={} A2={}", self.c, self.a1, self.a2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutEvaluation {
    pub k: usize,
    pub m: Thirds,
    pub is_cut: bool,
    pub closed: bool,
    pub connected: bool,
}

fn check_parts(s: &SiteSet, cut: &Cut) -> Result<()> {
    for part in [&cut.c, &cut.a1, &cut.a2] {
        s.same_space(part)?;
        if !part.is_subset(s) {
            return Err(Error::NotSubset);
        }
    }
    if cut.c.intersects(&cut.a1) || cut.c.intersects(&cut.a2) || cut.a1.intersects(&cut.a2) {
        return Err(Error::CutNotDisjoint);
    }
    Ok(())
}

/// Whether `C` separates `A1` from `A2` inside `host` (no connectivity
/// requirement on `host`).
pub fn separates(host: &SiteSet, c: &SiteSet, a1: &SiteSet, a2: &SiteSet) -> bool {
    connected_components(&host.difference(c)).iter().all(|comp| !(comp.intersects(a1) && comp.intersects(a2)))
}

fn span_or_zero(e: &SiteSet) -> Result<Thirds> {
    if e.is_empty() {
        Ok(Thirds::ZERO)
    } else {
        big_span(e)
    }
}

pub fn evaluate_cut(s: &SiteSet, cut: &Cut) -> Result<CutEvaluation> {
    check_parts(s, cut)?;
    if !is_connected(s) {
        return Err(Error::Disconnected);
    }
    let is_cut = separates(s, &cut.c, &cut.a1, &cut.a2);
    let closed = boundary(s, &cut.a1)?.union(&boundary(s, &cut.a2)?).is_subset(&cut.c);
    let side1 = cut.a1.union(&cut.c);
    let side2 = cut.a2.union(&cut.c);
    let connected = is_connected(&side1) && is_connected(&side2);
    let m = span_or_zero(&side1)?.min(span_or_zero(&side2)?);
    Ok(CutEvaluation { k: cut.k(), m, is_cut, closed, connected })
}

/// Grows each side to every site reachable from it without crossing `C`.
pub fn close_cut(s: &SiteSet, cut: &Cut) -> Result<Cut> {
    check_parts(s, cut)?;
    if !separates(s, &cut.c, &cut.a1, &cut.a2) {
        return Err(Error::NotACut);
    }
    let comps = connected_components(&s.difference(&cut.c));
    let grow = |a: &SiteSet| {
        comps.iter().filter(|comp| comp.intersects(a)).fold(SiteSet::new(s.space()), |acc, comp| acc.union(comp))
    };
    Ok(Cut { c: cut.c.clone(), a1: grow(&cut.a1), a2: grow(&cut.a2) })
}

/// Every cutting site has a neighbor in both sides.
pub fn is_tight(s: &SiteSet, cut: &Cut) -> bool {
    let space = s.space();
    cut.c.iter().all(|c| {
        let nbrs = neighbors(c, space);
        nbrs.iter().any(|&q| cut.a1.contains(q)) && nbrs.iter().any(|&q| cut.a2.contains(q))
    })
}

/// Moves cutting sites that touch at most one side into that side, as long
/// as `C` stays nonempty and both `A_j ∪ C` stay connected. Preserves
/// being a closed cut; the result is usually tight.
pub fn tighten_cut(s: &SiteSet, cut: &Cut) -> Result<Cut> {
    check_parts(s, cut)?;
    if !separates(s, &cut.c, &cut.a1, &cut.a2) {
        return Err(Error::NotACut);
    }
    let space = s.space();
    let mut cut = cut.clone();
    'outer: loop {
        for c in cut.c.clone().iter() {
            let nbrs = neighbors(c, space);
            let touches1 = nbrs.iter().any(|&q| cut.a1.contains(q));
            let touches2 = nbrs.iter().any(|&q| cut.a2.contains(q));
            if (touches1 && touches2) || cut.c.len() == 1 {
                continue;
            }
            let mut rest = cut.c.clone();
            rest.remove(c);
            let (mut a1, mut a2) = (cut.a1.clone(), cut.a2.clone());
            if touches1 {
                a1.insert(c);
            } else {
                a2.insert(c);
            }
            if is_connected(&a1.union(&rest)) && is_connected(&a2.union(&rest)) {
                cut = Cut { c: rest, a1, a2 };
                continue 'outer;
            }
        }
        return Ok(cut);
    }
}

/// A thickness value; `Infinite` when no qualifying cut exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Thickness {
    Finite(usize),
    Infinite,
}

impl Thickness {
    /// `+1`, with ∞ absorbing.
    pub fn succ(self) -> Thickness {
        match self {
            Thickness::Finite(k) => Thickness::Finite(k + 1),
            Thickness::Infinite => Thickness::Infinite,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Thickness::Finite(_))
    }
}

impl fmt::Display for Thickness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Thickness::Finite(k) => write!(f, "{k}"),
            Thickness::Infinite => write!(f, "inf"),
        }
    }
}

/// Limits on the exponential search; exceeding them is an error, never a
/// silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchGuard {
    pub max_sites: usize,
    pub max_k: usize,
}

impl Default for SearchGuard {
    fn default() -> Self {
        SearchGuard { max_sites: 30, max_k: 4 }
    }
}

impl SearchGuard {
    pub fn unlimited() -> Self {
        SearchGuard { max_sites: 64, max_k: usize::MAX }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub cut: Cut,
    pub m: Thirds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThicknessResult {
    pub value: Thickness,
    pub witness: Option<Witness>,
    /// Largest `k` for which `α k + β < Span(S)`; no larger `k` can qualify.
    /// `None` when even `k = 0` cannot.
    pub search_bound: Option<usize>,
}

/// Which thickness is being computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Θ: arbitrary cuts.
    General,
    /// θ: cuts with both `A_j ∪ C` connected.
    Connected,
}

/// `S` re-indexed for bitmask search: sites in canonical order with
/// adjacency masks and plane coordinates (torus sets are lifted).
struct MaskGraph {
    original: Vec<Site>,
    space: Space,
    adj: Vec<u64>,
    ext: Vec<Extent>,
}

impl MaskGraph {
    fn new(s: &SiteSet) -> Result<MaskGraph> {
        let original: Vec<Site> = s.iter().collect();
        if original.len() > 64 {
            return Err(Error::Config("bitmask search supports at most 64 sites".into()));
        }
        let lifted = match s.space() {
            Space::Plane => s.clone(),
            Space::Torus(_) => lift_component(s)?.ok_or(Error::NonSimple)?,
        };
        // Lifting preserves adjacency; recover each site's lift by position.
        let plane: Vec<Site> = if s.space() == Space::Plane {
            original.clone()
        } else {
            let mut by_canon: Vec<(Site, Site)> =
                lifted.iter().map(|p| (crate::lattice::normalize(p, s.space()), p)).collect();
            by_canon.sort();
            by_canon.into_iter().map(|(_, p)| p).collect()
        };
        let index = |p: Site| original.binary_search(&p).ok();
        let adj = original
            .iter()
            .map(|&p| neighbors(p, s.space()).into_iter().filter_map(index).fold(0u64, |m, i| m | (1 << i)))
            .collect();
        let ext = plane.iter().map(|&p| Extent::of_site(p)).collect();
        Ok(MaskGraph { original, space: s.space(), adj, ext })
    }

    fn n(&self) -> usize {
        self.original.len()
    }

    fn full(&self) -> u64 {
        if self.n() == 64 {
            u64::MAX
        } else {
            (1u64 << self.n()) - 1
        }
    }

    fn components(&self, mask: u64) -> Vec<u64> {
        let mut rest = mask;
        let mut out = Vec::new();
        while rest != 0 {
            let mut comp = rest & rest.wrapping_neg();
            let mut frontier = comp;
            while frontier != 0 {
                let i = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let new = self.adj[i] & mask & !comp;
                comp |= new;
                frontier |= new;
            }
            out.push(comp);
            rest &= !comp;
        }
        out
    }

    fn is_connected(&self, mask: u64) -> bool {
        mask == 0 || self.components(mask).len() == 1
    }

    fn extent(&self, mask: u64) -> Extent {
        bits(mask).map(|i| self.ext[i]).reduce(Extent::join).expect("nonempty mask")
    }

    /// `Span` of the sites in `mask` (exact grouping of its components).
    fn span(&self, mask: u64) -> Thirds {
        if mask == 0 {
            return Thirds::ZERO;
        }
        let pieces: Vec<Extent> = self.components(mask).into_iter().map(|c| self.extent(c)).collect();
        min_grouping(&pieces, Thirds::DEFL).0
    }

    fn to_set(&self, mask: u64) -> SiteSet {
        SiteSet::from_sites(self.space, bits(mask).map(|i| self.original[i]))
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            i
        })
    })
}

/// All `k`-subsets of `0..n` as masks, in lexicographic order of their
/// sorted index tuples.
fn combinations(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.iter().fold(0u64, |m, &i| m | (1 << i)));
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return out;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Best `(m, A1, A2)` for a fixed cutting set, if any assignment exists.
fn best_sides(g: &MaskGraph, c: u64, mode: Mode) -> Option<(Thirds, u64, u64)> {
    let comps = g.components(g.full() & !c);
    if comps.len() < 2 {
        return None;
    }
    let mut best: Option<(Thirds, u64, u64)> = None;
    let mut consider = |a1: u64, a2: u64| {
        if a1 == 0 || a2 == 0 {
            return;
        }
        if mode == Mode::Connected && !(g.is_connected(a1 | c) && g.is_connected(a2 | c)) {
            return;
        }
        let m = g.span(a1 | c).min(g.span(a2 | c));
        if best.is_none_or(|(bm, _, _)| m > bm) {
            best = Some((m, a1, a2));
        }
    };
    // The first component always sits on side 1 or outside both sides;
    // swapping sides gives the same m.
    match mode {
        Mode::General => {
            let rest = &comps[1..];
            for bitsel in 0..(1u64 << rest.len()) {
                let (mut a1, mut a2) = (comps[0], 0);
                for (j, &comp) in rest.iter().enumerate() {
                    if bitsel & (1 << j) != 0 {
                        a2 |= comp;
                    } else {
                        a1 |= comp;
                    }
                }
                consider(a1, a2);
            }
        }
        Mode::Connected => {
            let total = 3usize.pow(comps.len() as u32);
            for code in 0..total {
                let (mut a1, mut a2) = (0, 0);
                let mut x = code;
                for &comp in &comps {
                    match x % 3 {
                        1 => a1 |= comp,
                        2 => a2 |= comp,
                        _ => {}
                    }
                    x /= 3;
                }
                consider(a1, a2);
            }
        }
    }
    best
}

fn thickness(s: &SiteSet, alpha: Thirds, beta: Thirds, mode: Mode, guard: &SearchGuard) -> Result<ThicknessResult> {
    if s.is_empty() {
        return Err(Error::Empty);
    }
    if !is_connected(s) {
        return Err(Error::Disconnected);
    }
    if alpha <= Thirds::ZERO {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    let n = s.len();
    let span_s = big_span(s)?;
    // m <= Span(S) for every cut, so k qualifies only if α k + β < Span(S).
    let mut bound: Option<usize> = None;
    let mut k = 0usize;
    while k + 2 <= n && alpha * k as i64 + beta < span_s {
        bound = Some(k);
        k += 1;
    }
    let Some(k_max) = bound else {
        return Ok(ThicknessResult { value: Thickness::Infinite, witness: None, search_bound: None });
    };
    if n > guard.max_sites {
        return Err(Error::GuardExceeded {
            sites: n,
            needed_k: k_max,
            max_sites: guard.max_sites,
            max_k: guard.max_k,
            lower_bound: 0,
        });
    }
    let g = MaskGraph::new(s)?;
    for k in 0..=k_max {
        if k > guard.max_k {
            return Err(Error::GuardExceeded {
                sites: n,
                needed_k: k_max,
                max_sites: guard.max_sites,
                max_k: guard.max_k,
                lower_bound: k,
            });
        }
        let threshold = alpha * k as i64 + beta;
        let found = combinations(n, k).par_iter().find_map_first(|&c| {
            best_sides(&g, c, mode).filter(|&(m, _, _)| m > threshold).map(|(m, a1, a2)| (c, m, a1, a2))
        });
        if let Some((c, m, a1, a2)) = found {
            let cut = Cut::new(g.to_set(c), g.to_set(a1), g.to_set(a2));
            return Ok(ThicknessResult {
                value: Thickness::Finite(k),
                witness: Some(Witness { cut, m }),
                search_bound: Some(k_max),
            });
        }
    }
    Ok(ThicknessResult { value: Thickness::Infinite, witness: None, search_bound: Some(k_max) })
}

/// Θ(S, α): the least `k` with a cut of parameters `k, m` and `m > α k`.
pub fn thickness_general(s: &SiteSet, alpha: Thirds, guard: &SearchGuard) -> Result<ThicknessResult> {
    thickness(s, alpha, Thirds::ZERO, Mode::General, guard)
}

/// θ(S, α, β): the least `k` with a connected cut and `m > α k + β`.
pub fn thickness_connected(s: &SiteSet, alpha: Thirds, beta: Thirds, guard: &SearchGuard) -> Result<ThicknessResult> {
    thickness(s, alpha, beta, Mode::Connected, guard)
}

/// The dichotomy satisfied by closed cuts smaller than θ(S, α, β): either
/// every component `U` of `A1 ∪ C` has `Span(U) <= α |U ∩ C| + β`, or every
/// component of `A2 ∪ C` does. Returns which side satisfies it, if either.
pub fn each_component_bound(s: &SiteSet, cut: &Cut, alpha: Thirds, beta: Thirds) -> Result<(bool, bool)> {
    check_parts(s, cut)?;
    let side_ok = |a: &SiteSet| -> Result<bool> {
        for u in connected_components(&a.union(&cut.c)) {
            let bound = alpha * u.intersection(&cut.c).len() as i64 + beta;
            if big_span(&u)? > bound {
                return Ok(false);
            }
        }
        Ok(true)
    };
    Ok((side_ok(&cut.a1)?, side_ok(&cut.a2)?))
}
