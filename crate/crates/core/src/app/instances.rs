//! Seeded instance generators shared by the suites, experiments and tests.
//!
//! Every generator is a pure function of its seed (ChaCha8).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cuts::{evaluate_cut, tighten_cut, Cut};
use crate::error::Result;
use crate::lattice::{boundary, connected_components, neighbors, random_connected_set, Site, SiteSet, Space};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random plane set of `size` sites in one to three blobs, possibly
/// touching; mixed connectivity.
pub fn random_plane_set(size: usize, seed: u64) -> Result<SiteSet> {
    let mut rng = rng(seed);
    let blobs = rng.gen_range(1..=3usize).min(size.max(1));
    let mut set = SiteSet::new(Space::Plane);
    let mut remaining = size;
    for b in 0..blobs {
        let part = if b + 1 == blobs { remaining } else { rng.gen_range(1..=remaining - (blobs - b - 1)) };
        remaining -= part;
        let blob = random_connected_set(Space::Plane, part, rng.gen())?;
        let (dx, dy) = (rng.gen_range(-6..=6), rng.gen_range(-6..=6));
        set = set.union(&blob.translate(dx, dy));
    }
    Ok(set)
}

/// Each site of the torus independently occupied with probability `density`.
pub fn random_torus_set(space: Space, density: f64, seed: u64) -> Result<SiteSet> {
    let full = SiteSet::full(space)?;
    let mut rng = rng(seed);
    Ok(SiteSet::from_sites(space, full.iter().filter(|_| rng.gen_bool(density))))
}

/// Connected region of `size` sites grown inside `host` from `start`.
fn grow_region(host: &SiteSet, start: Site, size: usize, rng: &mut ChaCha8Rng) -> SiteSet {
    let space = host.space();
    let mut region = SiteSet::new(space);
    region.insert(start);
    while region.len() < size {
        let frontier: Vec<Site> = SiteSet::from_sites(
            space,
            region.iter().flat_map(|p| neighbors(p, space)).filter(|&q| host.contains(q) && !region.contains(q)),
        )
        .iter()
        .collect();
        match frontier.choose(rng) {
            Some(&q) => {
                region.insert(q);
            }
            None => break,
        }
    }
    region
}

/// A random closed connected cut of the connected set `host` with a
/// nonempty cutting set, or `None` if this seed found none.
///
/// A connected region `A` is grown; `C = b(A)`; one component of the rest
/// becomes `A2` and `C` is then trimmed to `b(A2)`, so `A2 ∪ C` is
/// connected and both sides' boundaries lie in `C`.
pub fn random_closed_cut(host: &SiteSet, seed: u64) -> Result<Option<Cut>> {
    let mut rng = rng(seed);
    let sites: Vec<Site> = host.iter().collect();
    let Some(&start) = sites.choose(&mut rng) else { return Ok(None) };
    let size = rng.gen_range(1..=host.len().max(2) - 1);
    let region = grow_region(host, start, size, &mut rng);
    let c = boundary(host, &region)?;
    let rest = host.difference(&region).difference(&c);
    let comps = connected_components(&rest);
    let (c, a1, a2) = match comps.choose(&mut rng) {
        Some(a2) if rng.gen_bool(0.5) => {
            let c = boundary(host, a2)?;
            (c.clone(), host.difference(a2).difference(&c), a2.clone())
        }
        _ => (c, region, rest),
    };
    if c.is_empty() {
        return Ok(None);
    }
    let cut = if rng.gen_bool(0.5) { Cut::new(c, a1, a2) } else { Cut::new(c, a2, a1) };
    let ev = evaluate_cut(host, &cut)?;
    Ok((ev.is_cut && ev.closed && ev.connected).then_some(cut))
}

/// Which cuts [`cut_instances`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutShape {
    /// Any closed connected cut with nonempty `C`.
    Any,
    /// Tightened, with both sides nonempty.
    Tight,
}

/// `count` pairs `(S, cut of image(S))` with `S` connected of 1..=max_size
/// sites; instance `i` is derived from `seed + i` (retrying with further
/// sub-seeds until a cut is found).
pub fn cut_instances(
    count: usize,
    seed: u64,
    max_size: usize,
    shape: CutShape,
    image: impl Fn(&SiteSet) -> SiteSet,
) -> Result<Vec<(SiteSet, Cut)>> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let base = seed.wrapping_add(i);
        let mut r = rng(base);
        for attempt in 0u64.. {
            let size = r.gen_range(1..=max_size.max(1));
            let s = random_connected_set(Space::Plane, size, base ^ (attempt << 32))?;
            let host = image(&s);
            if host.len() < 2 || !crate::lattice::is_connected(&host) {
                continue;
            }
            let Some(cut) = random_closed_cut(&host, r.gen())? else { continue };
            let cut = match shape {
                CutShape::Any => cut,
                CutShape::Tight => {
                    let t = tighten_cut(&host, &cut)?;
                    if t.a1.is_empty() || t.a2.is_empty() {
                        continue;
                    }
                    t
                }
            };
            out.push((s, cut));
            break;
        }
    }
    Ok(out)
}

/// Full triangle `{(x, y) : x, y >= 0, x + y <= size - 1}` translated by `(dx, dy)`.
pub fn full_triangle(size: i64, dx: i64, dy: i64) -> SiteSet {
    SiteSet::plane((0..size).flat_map(|y| (0..size - y).map(move |x| (x + dx, y + dy))))
}

/// Two full triangles of side `size` joined by a horizontal bridge of
/// `bridge` sites: the standard thin-neck instance.
pub fn dumbbell(size: i64, bridge: i64) -> SiteSet {
    let left = full_triangle(size, 0, 0);
    let bridge_set = SiteSet::plane((0..bridge).map(|i| (size + i, 0)));
    let right = full_triangle(size, size + bridge, 0);
    left.union(&bridge_set).union(&right)
}

pub fn segment(len: i64) -> SiteSet {
    SiteSet::plane((0..len).map(|i| (i, 0)))
}

/// A self-avoiding random walk of up to `len` sites on G from the origin;
/// stops early if it traps itself.
pub fn random_path(len: usize, seed: u64) -> SiteSet {
    let mut rng = rng(seed);
    let mut set = SiteSet::new(Space::Plane);
    let mut cur = Site::new(0, 0);
    set.insert(cur);
    while set.len() < len {
        let free: Vec<Site> = neighbors(cur, Space::Plane).into_iter().filter(|&q| !set.contains(q)).collect();
        let Some(&next) = free.choose(&mut rng) else { break };
        set.insert(next);
        cur = next;
    }
    set
}

/// One to three random blobs on a torus, and with probability 1/3 a
/// wrapping ring (a row, a column or an anti-diagonal), which is never
/// simple.
pub fn random_torus_blobs(space: Space, seed: u64) -> Result<SiteSet> {
    let Space::Torus(n) = space else {
        return Err(crate::error::Error::NotTorus(space));
    };
    let mut rng = rng(seed);
    let mut set = SiteSet::new(space);
    for _ in 0..rng.gen_range(1..=3) {
        let size = rng.gen_range(1..=(2 * n) as usize);
        let blob = random_connected_set(space, size, rng.gen())?;
        set = set.union(&blob.translate(rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    if rng.gen_range(0..3) == 0 {
        let c = rng.gen_range(0..n);
        let ring: Vec<(i64, i64)> = match rng.gen_range(0..3) {
            0 => (0..n).map(|x| (x, c)).collect(),
            1 => (0..n).map(|y| (c, y)).collect(),
            _ => (0..n).map(|x| (x, c - x)).collect(),
        };
        set = set.union(&SiteSet::from_sites(space, ring));
    }
    Ok(set)
}

/// One or two hooks (two straight arms in different lattice directions,
/// long enough to have a large span yet simple) plus densely packed
/// isolated dust sites;
/// a torus set with many components, some of them long-lived.
pub fn random_hooks_with_dust(space: Space, seed: u64) -> Result<SiteSet> {
    let Space::Torus(n) = space else {
        return Err(crate::error::Error::NotTorus(space));
    };
    const DIRS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];
    let mut rng = rng(seed);
    let mut set = SiteSet::new(space);
    for _ in 0..rng.gen_range(1..=2) {
        let mut p = Site::new(rng.gen_range(0..n), rng.gen_range(0..n));
        let first = rng.gen_range(0..6);
        let turn = [1, 2, 4, 5][rng.gen_range(0..4)];
        for dir in [DIRS[first], DIRS[(first + turn) % 6]] {
            for _ in 0..rng.gen_range(n / 2..=3 * n / 4) {
                set.insert(crate::lattice::normalize(p, space));
                p = p.offset(dir.0, dir.1);
            }
        }
    }
    // Dust sits on the sublattice x = y (mod 3), which has no G edges, so
    // it can be packed densely and every grain is its own component.
    let fill = rng.gen_range(0.7..1.0);
    for q in SiteSet::full(space)?.iter() {
        if (q.x - q.y).rem_euclid(3) == 0
            && rng.gen_bool(fill)
            && !set.contains(q)
            && neighbors(q, space).iter().all(|&r| !set.contains(r))
        {
            set.insert(q);
        }
    }
    Ok(set)
}

/// Named thin connected sets with a one-site bottleneck: segments in the
/// three edge directions, L shapes, and two-blob bridges (dumbbells).
pub fn curated_thin_sets() -> Vec<(String, SiteSet)> {
    let mut out = Vec::new();
    for n in 5..=12 {
        out.push((format!("seg{n}"), segment(n)));
    }
    for n in 5..=8 {
        out.push((format!("col{n}"), SiteSet::plane((0..n).map(|i| (0, i)))));
        out.push((format!("diag{n}"), SiteSet::plane((0..n).map(|i| (-i, i)))));
    }
    for (size, bridge) in [(2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3)] {
        out.push((format!("dumbbell{size}x{bridge}"), dumbbell(size, bridge)));
    }
    for n in 4..=6 {
        let l = SiteSet::plane((0..n).map(|i| (i, 0)).chain((1..n).map(|i| (0, i))));
        out.push((format!("ell{n}"), l));
    }
    out
}
