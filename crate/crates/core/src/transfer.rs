//! Pulling cuts of `R(S)` and `Q(S)` back to cuts of `S`.
//!
//! Both constructions map each cutting site `a` to a site `a'` of `S` that
//! shares a tile with it. The R-pullback keeps the cutting set's size; the
//! Q-pullback walks a chain through `C` until it finds a superfluous element
//! and drops it, so the new cutting set is one smaller.
//!
//! Throughout, `B(a) = [b1, b2, b3]` are the centers of the three tiles
//! containing `a`, numbered so that `a` is corner `i` of the tile at `b_i`.

use std::collections::BTreeSet;

use crate::cuts::{separates, Cut};
use crate::error::{Error, Result};
use crate::lattice::{boundary, Site, SiteSet, Space};
use crate::rules::{apply_q, apply_r, corner, tile, tile_corners, tiles_containing};

/// `P_i(a)`: the centers `b != a` of the tiles containing corner `e_i(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairsP {
    pub pairs: [[Site; 2]; 3],
}

impl PairsP {
    pub fn get(&self, i: usize) -> [Site; 2] {
        self.pairs[i - 1]
    }
}

pub fn pairs_p(a: Site, space: Space) -> PairsP {
    let pair = |i: usize| {
        let q = corner(a, i, space);
        let mut others = tiles_containing(q, space).into_iter().filter(|&b| b != a).collect::<Vec<_>>();
        others.sort();
        [others[0], others[1]]
    };
    PairsP { pairs: [pair(1), pair(2), pair(3)] }
}

fn check_closed(host: &SiteSet, cut: &Cut) -> Result<()> {
    for part in [&cut.c, &cut.a1, &cut.a2] {
        host.same_space(part)?;
        if !part.is_subset(host) {
            return Err(Error::NotSubset);
        }
    }
    if cut.c.intersects(&cut.a1) || cut.c.intersects(&cut.a2) || cut.a1.intersects(&cut.a2) {
        return Err(Error::CutNotDisjoint);
    }
    if !separates(host, &cut.c, &cut.a1, &cut.a2) {
        return Err(Error::NotACut);
    }
    let bd = boundary(host, &cut.a1)?.union(&boundary(host, &cut.a2)?);
    if !bd.is_subset(&cut.c) {
        return Err(Error::CutNotClosed);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RPullback {
    pub cut: Cut,
    /// `(a, a')` for each `a` in the original cutting set, in order.
    pub mapping: Vec<(Site, Site)>,
}

/// Pulls a closed cut `(C, A1, A2)` of `R(S)` back to a cut `(C', B1, B2)`
/// of `S` with `|C'| <= |C|`.
///
/// For `a` in `C`: if exactly one pair `P_i(a)` meets `A1`, or exactly two
/// do and `P_i(a)` is the one left out, and `e_i(a)` lies in `S`, then
/// `a' = e_i(a)`; otherwise `a'` is the first site of `Q(a) ∩ S`. Then
/// `B_j = (S ∩ Q(A_j)) \ C'`.
pub fn pullback_cut_r(s: &SiteSet, cut: &Cut) -> Result<RPullback> {
    let space = s.space();
    let image = apply_r(s);
    check_closed(&image, cut)?;
    let mut mapping = Vec::with_capacity(cut.k());
    for a in cut.c.iter() {
        let pairs = pairs_p(a, space);
        let meets: Vec<bool> = (1..=3).map(|i| pairs.get(i).iter().any(|&b| cut.a1.contains(b))).collect();
        let hit = meets.iter().filter(|&&m| m).count();
        let special = match hit {
            1 => meets.iter().position(|&m| m),
            2 => meets.iter().position(|&m| !m),
            _ => None,
        }
        .map(|i| corner(a, i + 1, space))
        .filter(|&e| s.contains(e));
        let a_prime = match special {
            Some(e) => e,
            None => tile(a, space).intersection(s).first().ok_or(Error::EmptyTilePreimage(a))?,
        };
        mapping.push((a, a_prime));
    }
    let c_prime = SiteSet::from_sites(space, mapping.iter().map(|&(_, ap)| ap));
    let side = |a: &SiteSet| s.intersection(&apply_q(a)).difference(&c_prime);
    let out = Cut::new(c_prime.clone(), side(&cut.a1), side(&cut.a2));
    Ok(RPullback { cut: out, mapping })
}

/// The linear functional strictly minimized, within any tile, by corner
/// `r`: `x + y` for corner 1, `-x` for corner 2, `-y` for corner 3.
/// It strictly decreases along every forward step of a Q-pullback chain.
pub fn corner_functional(r: usize, p: Site) -> i64 {
    match r {
        1 => p.x + p.y,
        2 => -p.x,
        3 => -p.y,
        _ => panic!("tile corners are numbered 1..=3, got {r}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Chain element reached by a strong forward choice (`a_t = e_r(a'_{t-1})`).
    StrongForward,
    /// Chain element reached by a plain forward choice.
    Forward,
    /// First chain element.
    Start,
    /// Element of `C` handled after the superfluous one was found.
    Remainder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub a: Site,
    /// `[b1, b2, b3]` with `a = e_i(b_i)`.
    pub b: [Site; 3],
    /// Eligible tile centers `E(t)` (empty when superfluous).
    pub eligible: Vec<Site>,
    pub superfluous: bool,
    /// `None` only for the dropped superfluous element.
    pub a_prime: Option<Site>,
    pub kind: StepKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PullbackTraceQ {
    /// Corner index driving the chain; `None` when `a_1` was superfluous.
    pub r: Option<usize>,
    pub steps: Vec<TraceStep>,
    /// Index into `steps` of the dropped element `x`.
    pub s: usize,
    pub c_prime: SiteSet,
}

impl PullbackTraceQ {
    pub fn superfluous_site(&self) -> Site {
        self.steps[self.s].a
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPullback {
    pub cut: Cut,
    pub trace: PullbackTraceQ,
    /// `S_j = Q⁻¹(R_j, S)`.
    pub preimages: [SiteSet; 2],
}

/// `Q⁻¹(E, S)`: sites of `S` whose tile meets `E`.
pub fn q_preimage(e: &SiteSet, s: &SiteSet) -> SiteSet {
    let space = s.space();
    SiteSet::from_sites(space, s.iter().filter(|&a| tile_corners(a, space).iter().any(|&q| e.contains(q))))
}

/// Working state of the Q-pullback: the two preimages, the removed
/// `C'_t`, and the chain so far.
struct Walk<'a> {
    space: Space,
    s: &'a SiteSet,
    c: &'a SiteSet,
    sides: [&'a SiteSet; 2],
    c_prime: BTreeSet<Site>,
    visited: BTreeSet<Site>,
}

impl Walk<'_> {
    fn b(&self, a: Site) -> [Site; 3] {
        tiles_containing(a, self.space)
    }

    /// `B(a) ∩ S_j^{t-1}`.
    fn hits(&self, a: Site, j: usize) -> Vec<Site> {
        self.b(a).into_iter().filter(|&b| self.sides[j].contains(b) && !self.c_prime.contains(&b)).collect()
    }

    fn superfluous(&self, a: Site) -> bool {
        self.hits(a, 0).is_empty() || self.hits(a, 1).is_empty()
    }

    fn eligible(&self, a: Site) -> Vec<Site> {
        let mut e: Vec<Site> = (0..2)
            .filter_map(|j| match self.hits(a, j).as_slice() {
                [only] => Some(*only),
                _ => None,
            })
            .collect();
        e.sort();
        e.dedup();
        e
    }

    /// `F(t)`: centers of the live forward tiles.
    fn forward(&self, a: Site, r: usize) -> Vec<Site> {
        let b = self.b(a);
        let mut f: Vec<Site> = b
            .into_iter()
            .filter(|&x| x != b[r - 1])
            .filter(|&x| (0..2).any(|j| self.sides[j].contains(x)) && !self.c_prime.contains(&x))
            .collect();
        f.sort();
        f
    }

    fn forward_meets_both(&self, a: Site, r: usize) -> bool {
        let f = self.forward(a, r);
        (0..2).all(|j| f.iter().any(|&x| self.sides[j].contains(x)))
    }

    /// `e_r(b)` is a not-yet-visited cutting site.
    fn available(&self, b: Site, r: usize) -> bool {
        let next = corner(b, r, self.space);
        self.c.contains(next) && !self.visited.contains(&next)
    }

    fn strong_candidate(&self, a: Site, r: usize) -> Option<Site> {
        let e = self.eligible(a);
        self.forward(a, r).into_iter().find(|b| e.contains(b) && self.available(*b, r))
    }

    fn step(&self, a: Site, kind: StepKind) -> TraceStep {
        let superfluous = self.superfluous(a);
        TraceStep {
            a,
            b: self.b(a),
            eligible: if superfluous { Vec::new() } else { self.eligible(a) },
            superfluous,
            a_prime: None,
            kind,
        }
    }
}

/// How the chain is seeded.
enum Start {
    /// `a_1` itself is superfluous.
    Superfluous(Site),
    /// `|E(1)| = 2`; `r` makes `E(1) = F(1)`.
    TwoEligible(Site, usize),
    /// `(r, a_1, a'_1, a_2)` with `a_2` superfluous or set up for strong
    /// forward choices.
    Pair { r: usize, a1: Site, a1_prime: Site, a2: Site },
}

/// All starts of the highest-priority admissible class, canonical order.
fn admissible_starts(w: &mut Walk<'_>) -> Vec<Start> {
    let cs: Vec<Site> = w.c.iter().collect();
    let superfluous: Vec<Start> = cs.iter().filter(|&&a| w.superfluous(a)).map(|&a| Start::Superfluous(a)).collect();
    if !superfluous.is_empty() {
        return superfluous;
    }
    let two: Vec<Start> = cs
        .iter()
        .filter(|&&a| w.eligible(a).len() == 2)
        .filter_map(|&a| {
            let b = w.b(a);
            (1..=3).find(|&i| !(0..2).any(|j| w.sides[j].contains(b[i - 1]))).map(|r| Start::TwoEligible(a, r))
        })
        .collect();
    if !two.is_empty() {
        return two;
    }
    // First insist that strong forward choices can follow, then accept any
    // configuration meeting the forward conditions.
    for strict in [true, false] {
        let mut found = Vec::new();
        for r in 1..=3 {
            for &a1 in &cs {
                for a1_prime in w.eligible(a1) {
                    for &a2 in &cs {
                        if a2 == a1 || !tile(w.b(a2)[r - 1], w.space).contains(a1) {
                            continue;
                        }
                        w.c_prime.insert(a1_prime);
                        w.visited.insert(a1);
                        w.visited.insert(a2);
                        let ok = w.superfluous(a2)
                            || (w.forward_meets_both(a2, r) && (!strict || w.strong_candidate(a2, r).is_some()));
                        w.c_prime.clear();
                        w.visited.clear();
                        if ok {
                            found.push(Start::Pair { r, a1, a1_prime, a2 });
                        }
                    }
                }
            }
        }
        if !found.is_empty() {
            return found;
        }
    }
    Vec::new()
}

const REMAINDER_SEARCH_BUDGET: usize = 20_000;

/// Admissible images for an element handled after `x`: an eligible center
/// if it is not superfluous, otherwise any unused tile center in `S`.
fn remainder_options(w: &Walk<'_>, st: &TraceStep) -> Vec<Site> {
    if st.superfluous {
        let mut v: Vec<Site> = st.b.iter().copied().filter(|&b| w.s.contains(b) && !w.c_prime.contains(&b)).collect();
        v.sort();
        v
    } else {
        st.eligible.clone()
    }
}

/// Depth-first search over both the order of the remaining elements and
/// their images; elements with fewer options are tried first.
fn assign_injective(w: &mut Walk<'_>, rest: &[Site], out: &mut Vec<TraceStep>, budget: &mut usize) -> bool {
    if rest.is_empty() {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let mut candidates: Vec<(usize, TraceStep, Vec<Site>)> = rest
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let st = w.step(a, StepKind::Remainder);
            let options = remainder_options(w, &st);
            (i, st, options)
        })
        .collect();
    if candidates.iter().any(|(_, _, o)| o.is_empty()) {
        return false;
    }
    candidates.sort_by_key(|(i, _, o)| (o.len(), *i));
    for (i, st, options) in candidates {
        let tail: Vec<Site> = rest.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &a)| a).collect();
        for option in options {
            w.c_prime.insert(option);
            out.push(TraceStep { a_prime: Some(option), ..st.clone() });
            if assign_injective(w, &tail, out, budget) {
                return true;
            }
            out.pop();
            w.c_prime.remove(&option);
        }
    }
    false
}

/// Pulls a closed cut `(C, R1, R2)` of `Q(S)` back to a cut of `S` whose
/// cutting set has one element fewer.
pub fn pullback_cut_q(s: &SiteSet, cut: &Cut) -> Result<QPullback> {
    let space = s.space();
    let image = apply_q(s);
    check_closed(&image, cut)?;
    if cut.c.is_empty() {
        return Err(Error::Empty);
    }
    let s1 = q_preimage(&cut.a1, s);
    let s2 = q_preimage(&cut.a2, s);
    let fail = |reason: &str, steps: usize| Error::Pullback { reason: reason.to_string(), steps };
    if s1.intersects(&s2) {
        return Err(fail("preimages of the two sides overlap", 0));
    }
    for (r_j, s_j) in [(&cut.a1, &s1), (&cut.a2, &s2)] {
        let q = apply_q(s_j);
        if !r_j.is_subset(&q) || !q.is_subset(&r_j.union(&cut.c)) {
            return Err(fail("preimage images are not sandwiched between R_j and R_j ∪ C", 0));
        }
    }

    let mut w = Walk { space, s, c: &cut.c, sides: [&s1, &s2], c_prime: BTreeSet::new(), visited: BTreeSet::new() };
    let starts = admissible_starts(&mut w);
    if starts.is_empty() {
        return Err(fail("no admissible choice of r, a_1, a'_1, a_2", 0));
    }
    // Every admissible start satisfies the construction; the first one
    // whose remainder admits an injective assignment is preferred.
    let mut fallback = None;
    for start in starts {
        w.c_prime.clear();
        w.visited.clear();
        let attempt = walk_from(&mut w, start, cut.k());
        match attempt {
            Ok((_, true)) => {
                fallback = Some(attempt);
                break;
            }
            _ if fallback.is_none() => fallback = Some(attempt),
            _ => {}
        }
    }
    let (trace, _) = fallback.expect("at least one start was tried")?;
    let c_prime = trace.c_prime.clone();
    let new_cut = Cut::new(c_prime.clone(), s1.difference(&c_prime), s2.difference(&c_prime));
    if !separates(s, &new_cut.c, &new_cut.a1, &new_cut.a2) {
        return Err(fail("pulled-back triple is not a cut", trace.steps.len()));
    }
    Ok(QPullback { cut: new_cut, trace, preimages: [s1, s2] })
}

/// Runs the chain from `start`, then assigns the rest of `C`. The flag
/// reports whether `a -> a'` came out injective.
fn walk_from(w: &mut Walk<'_>, start: Start, k: usize) -> Result<(PullbackTraceQ, bool)> {
    let space = w.space;
    let fail = |reason: &str, steps: usize| Error::Pullback { reason: reason.to_string(), steps };
    let mut steps: Vec<TraceStep> = Vec::new();
    let (r, mut current, mut kind) = match start {
        Start::Superfluous(a1) => (None, a1, StepKind::Start),
        Start::TwoEligible(a1, r) => (Some(r), a1, StepKind::Start),
        Start::Pair { r, a1, a1_prime, a2 } => {
            let mut first = w.step(a1, StepKind::Start);
            first.a_prime = Some(a1_prime);
            steps.push(first);
            w.visited.insert(a1);
            w.c_prime.insert(a1_prime);
            let kind = if corner(a1_prime, r, space) == a2 { StepKind::StrongForward } else { StepKind::Forward };
            (Some(r), a2, kind)
        }
    };

    // The forward chain, up to the first superfluous element.
    let s_index = loop {
        if steps.len() > k + 1 {
            return Err(fail("chain exceeded |C| + 1 steps", steps.len()));
        }
        w.visited.insert(current);
        let mut st = w.step(current, kind);
        if st.superfluous {
            steps.push(st);
            break steps.len() - 1;
        }
        let r = r.ok_or_else(|| fail("non-superfluous start without a corner index", steps.len()))?;
        let (a_prime, next, next_kind) = if let Some(b) = w.strong_candidate(current, r) {
            (b, corner(b, r, space), StepKind::StrongForward)
        } else if let Some(b) = w.forward(current, r).into_iter().find(|&b| w.available(b, r)) {
            (st.eligible[0], corner(b, r, space), StepKind::Forward)
        } else {
            st.a_prime = st.eligible.first().copied();
            steps.push(st);
            return Err(fail("no forward choice available before a superfluous element", steps.len()));
        };
        st.a_prime = Some(a_prime);
        steps.push(st);
        w.c_prime.insert(a_prime);
        current = next;
        kind = next_kind;
    };

    // The rest of C. The search looks for an assignment keeping `a -> a'`
    // injective; if none exists within the budget the greedy choice is kept.
    let rest: Vec<Site> = w.c.iter().filter(|a| !w.visited.contains(a)).collect();
    let mut budget = REMAINDER_SEARCH_BUDGET;
    let mut assigned = Vec::with_capacity(rest.len());
    let injective = assign_injective(w, &rest, &mut assigned, &mut budget);
    if !injective {
        assigned.clear();
        for &a in &rest {
            let mut st = w.step(a, StepKind::Remainder);
            let a_prime = remainder_options(w, &st)
                .first()
                .copied()
                .or_else(|| st.b.iter().copied().filter(|&b| w.s.contains(b)).min())
                .ok_or(Error::EmptyTilePreimage(a))?;
            st.a_prime = Some(a_prime);
            w.c_prime.insert(a_prime);
            assigned.push(st);
        }
    }
    steps.extend(assigned);
    let c_prime = SiteSet::from_sites(space, w.c_prime.iter().copied());
    Ok((PullbackTraceQ { r, steps, s: s_index, c_prime }, injective))
}

/// Checks the structural guarantees of a Q-pullback trace; returns a
/// description of the first violation.
pub fn check_trace(result: &QPullback, original: &Cut) -> std::result::Result<(), String> {
    let trace = &result.trace;
    let space = original.c.space();
    let superfluous_at = trace.steps.iter().position(|st| st.superfluous);
    if superfluous_at != Some(trace.s) {
        return Err(format!("first superfluous step is {superfluous_at:?}, trace says {}", trace.s));
    }
    let sites: BTreeSet<Site> = trace.steps.iter().map(|st| st.a).collect();
    if sites.len() != trace.steps.len() || sites != original.c.iter().collect() {
        return Err("trace does not enumerate C exactly once".into());
    }
    for (t, st) in trace.steps.iter().enumerate() {
        for (i, &b) in st.b.iter().enumerate() {
            if corner(b, i + 1, space) != st.a {
                return Err(format!("step {t}: a is not corner {} of b_{}", i + 1, i + 1));
            }
        }
        match (t == trace.s, st.a_prime) {
            (true, Some(_)) => return Err(format!("step {t}: superfluous element was mapped")),
            (false, None) => return Err(format!("step {t}: element left unmapped")),
            (false, Some(ap)) => {
                if !tile(ap, space).contains(st.a) {
                    return Err(format!("step {t}: a not in Q(a')"));
                }
                if !st.superfluous && !st.eligible.contains(&ap) {
                    return Err(format!("step {t}: a' not eligible"));
                }
            }
            (true, None) => {}
        }
    }
    if let Some(r) = trace.r {
        for t in 1..=trace.s {
            let (prev, cur) = (&trace.steps[t - 1], &trace.steps[t]);
            if !tile(cur.b[r - 1], space).contains(prev.a) {
                return Err(format!("step {t}: not a forward choice"));
            }
            if corner_functional(r, cur.a) >= corner_functional(r, prev.a) {
                return Err(format!("step {t}: corner functional did not decrease"));
            }
            if cur.kind == StepKind::StrongForward && prev.a_prime.map(|ap| corner(ap, r, space)) != Some(cur.a) {
                return Err(format!("step {t}: strong forward step with a_t != e_r(a'_(t-1))"));
            }
        }
    }
    if result.cut.c != trace.c_prime {
        return Err("cut and trace disagree on C'".into());
    }
    Ok(())
}
