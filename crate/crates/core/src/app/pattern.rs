//! Text formats: pattern files, cut specs, failure lists, ASCII rendering.
//!
//! Pattern file:
//! ```text
//! # optional comments
//! space: plane            (or: space: torus 5)
//! origin: 2 3             (plane only, default 0 0)
//! o.
//! .o
//! ```
//! The top row is the largest `y`.

use std::fmt::Write as _;

use crate::cuts::Cut;
use crate::error::{Error, Result};
use crate::lattice::{Site, SiteSet, Space};
use crate::rules::FailureEvent;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_space(line: usize, value: &str) -> Result<Space> {
    let words: Vec<&str> = value.split_whitespace().collect();
    match words.as_slice() {
        ["plane"] => Ok(Space::Plane),
        ["torus", n] => {
            let n: i64 = n.parse().map_err(|_| parse_err(line, format!("bad torus size {n:?}")))?;
            Space::torus(n)
        }
        _ => Err(parse_err(line, format!("unknown space {value:?}"))),
    }
}

fn parse_int(line: usize, s: &str) -> Result<i64> {
    s.trim().parse().map_err(|_| parse_err(line, format!("expected an integer, got {s:?}")))
}

pub fn parse_pattern(text: &str) -> Result<SiteSet> {
    let mut lines = content_lines(text).peekable();
    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "missing space header"))?;
    let space = match header.strip_prefix("space:") {
        Some(v) => parse_space(line, v)?,
        None => return Err(parse_err(line, "expected `space: plane` or `space: torus <n>`")),
    };
    let mut origin = (0, 0);
    if let Some(&(line, l)) = lines.peek() {
        if let Some(v) = l.strip_prefix("origin:") {
            let nums: Vec<&str> = v.split_whitespace().collect();
            let [x, y] = nums.as_slice() else {
                return Err(parse_err(line, "origin needs two integers"));
            };
            origin = (parse_int(line, x)?, parse_int(line, y)?);
            if space.is_torus() && origin != (0, 0) {
                return Err(parse_err(line, "torus files must have origin 0 0"));
            }
            lines.next();
        }
    }
    let mut rows: Vec<(usize, Vec<bool>)> = Vec::new();
    for (line, l) in lines {
        let row = l
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'o' => Ok(true),
                '.' => Ok(false),
                other => Err(parse_err(line, format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        if let Some((_, first)) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(line, format!("ragged row: {} cells, expected {}", row.len(), first.len())));
            }
        }
        rows.push((line, row));
    }
    if let Space::Torus(n) = space {
        let width = rows.first().map_or(0, |(_, r)| r.len());
        if rows.len() as i64 != n || width as i64 != n {
            let line = rows.last().map_or(line, |(l, _)| *l);
            return Err(parse_err(line, format!("torus {n} needs a {n}x{n} grid, got {}x{width}", rows.len())));
        }
    }
    let h = rows.len() as i64;
    let sites = rows.iter().enumerate().flat_map(|(r, (_, row))| {
        let y = origin.1 + (h - 1 - r as i64);
        row.iter().enumerate().filter(|(_, &occ)| occ).map(move |(c, _)| Site::new(origin.0 + c as i64, y))
    });
    Ok(SiteSet::from_sites(space, sites))
}

/// A rectangle of sites: columns `x0..x0+width`, rows `y0..y0+height`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub x0: i64,
    pub y0: i64,
    pub width: i64,
    pub height: i64,
}

impl Window {
    /// The torus extent, or the plane bounding box padded by `pad`.
    pub fn around(s: &SiteSet, pad: i64) -> Window {
        match s.space() {
            Space::Torus(n) => Window { x0: 0, y0: 0, width: n, height: n },
            Space::Plane => match s.bounding_box() {
                Some((x0, y0, x1, y1)) => {
                    Window { x0: x0 - pad, y0: y0 - pad, width: x1 - x0 + 1 + 2 * pad, height: y1 - y0 + 1 + 2 * pad }
                }
                None => Window { x0: 0, y0: 0, width: 0, height: 0 },
            },
        }
    }
}

fn grid(s: &SiteSet, w: Window) -> String {
    let mut out = String::new();
    for y in (w.y0..w.y0 + w.height).rev() {
        for x in w.x0..w.x0 + w.width {
            out.push(if s.contains(Site::new(x, y)) { 'o' } else { '.' });
        }
        out.push('\n');
    }
    out
}

pub fn serialize_pattern(s: &SiteSet) -> String {
    let mut out = format!("space: {}\n", s.space());
    let w = Window::around(s, 0);
    if !s.space().is_torus() {
        let _ = writeln!(out, "origin: {} {}", w.x0, w.y0);
    }
    out.push_str(&grid(s, w));
    out
}

/// Rows of 'o'/'.', top row first. Defaults to [`Window::around`] with
/// padding 1.
pub fn render_ascii(s: &SiteSet, window: Option<Window>) -> String {
    grid(s, window.unwrap_or_else(|| Window::around(s, 1)))
}

fn parse_site_list(line: usize, text: &str, space: Space) -> Result<SiteSet> {
    let mut set = SiteSet::new(space);
    for token in text.split_whitespace() {
        let t = token.trim_start_matches('(').trim_end_matches(')');
        let (x, y) = t.split_once(',').ok_or_else(|| parse_err(line, format!("expected x,y, got {token:?}")))?;
        let p = Site::new(parse_int(line, x)?, parse_int(line, y)?);
        if !space.is_canonical(p) {
            return Err(Error::NonCanonicalSite { site: p, space });
        }
        set.insert(p);
    }
    Ok(set)
}

/// Cut spec: lines `C: x,y x,y ...`, `A1: ...`, `A2: ...`; missing lines
/// mean empty sets.
pub fn parse_cutspec(text: &str, space: Space) -> Result<Cut> {
    let mut parts = [SiteSet::new(space), SiteSet::new(space), SiteSet::new(space)];
    for (line, l) in content_lines(text) {
        let (key, rest) = l.split_once(':').ok_or_else(|| parse_err(line, "expected `C:`, `A1:` or `A2:`"))?;
        let idx = match key.trim() {
            "C" => 0,
            "A1" => 1,
            "A2" => 2,
            other => return Err(parse_err(line, format!("unknown cut part {other:?}"))),
        };
        parts[idx] = parts[idx].union(&parse_site_list(line, rest, space)?);
    }
    let [c, a1, a2] = parts;
    Ok(Cut::new(c, a1, a2))
}

pub fn serialize_cutspec(cut: &Cut) -> String {
    let list = |s: &SiteSet| s.iter().map(|p| format!(" {},{}", p.x, p.y)).collect::<String>();
    format!("C:{}\nA1:{}\nA2:{}\n", list(&cut.c), list(&cut.a1), list(&cut.a2))
}

/// Failure list: lines `step x y value` with value 0 or 1.
pub fn parse_failures(text: &str) -> Result<Vec<FailureEvent>> {
    content_lines(text)
        .map(|(line, l)| {
            let w: Vec<&str> = l.split_whitespace().collect();
            let [step, x, y, v] = w.as_slice() else {
                return Err(parse_err(line, "expected `step x y value`"));
            };
            let step = step.parse().map_err(|_| parse_err(line, format!("bad step {step:?}")))?;
            let value = match *v {
                "0" => false,
                "1" => true,
                other => return Err(parse_err(line, format!("value must be 0 or 1, got {other:?}"))),
            };
            Ok(FailureEvent { step, site: Site::new(parse_int(line, x)?, parse_int(line, y)?), value })
        })
        .collect()
}

pub fn serialize_failures(events: &[FailureEvent]) -> String {
    events.iter().map(|f| format!("{} {} {} {}\n", f.step, f.site.x, f.site.y, u8::from(f.value))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::apply_rplus;
    use proptest::prelude::*;

    fn plane(v: &[(i64, i64)]) -> SiteSet {
        SiteSet::plane(v.iter().copied())
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_pattern("space: plane\nooo\n").unwrap(), plane(&[(0, 0), (1, 0), (2, 0)]));
        assert_eq!(parse_pattern("space: plane\norigin: 2 3\no.\n.o\n").unwrap(), plane(&[(2, 4), (3, 3)]));
        let t3 = Space::torus(3).unwrap();
        assert_eq!(parse_pattern("space: torus 3\nooo\nooo\nooo\n").unwrap(), SiteSet::full(t3).unwrap());
    }

    #[test]
    fn parse_comments_and_spacing() {
        let text = "# a comment\nspace: plane\n\n# another\no . o\n";
        assert_eq!(parse_pattern(text).unwrap(), plane(&[(0, 0), (2, 0)]));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_pattern("ooo\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_pattern("space: sphere\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_pattern("space: plane\noo\no\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_pattern("space: plane\nox\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_pattern("space: torus 3\nooo\nooo\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_pattern("space: torus 3\norigin: 1 0\nooo\nooo\nooo\n"), Err(Error::Parse { .. })));
        assert_eq!(parse_pattern("space: torus 2\n"), Err(Error::TorusTooSmall(2)));
    }

    #[test]
    fn serialize_examples() {
        assert_eq!(serialize_pattern(&plane(&[(0, 0)])), "space: plane\norigin: 0 0\no\n");
        let t3 = Space::torus(3).unwrap();
        assert_eq!(serialize_pattern(&SiteSet::full(t3).unwrap()), "space: torus 3\nooo\nooo\nooo\n");
        assert_eq!(serialize_pattern(&plane(&[(2, 4), (3, 3)])), "space: plane\norigin: 2 3\no.\n.o\n");
        let empty = SiteSet::new(Space::Plane);
        assert_eq!(parse_pattern(&serialize_pattern(&empty)).unwrap(), empty);
    }

    #[test]
    fn render_examples() {
        assert!(render_ascii(&plane(&[(0, 0), (1, 0)]), None).lines().any(|l| l == ".oo."));
        let w = Window { x0: 0, y0: 0, width: 2, height: 2 };
        assert_eq!(render_ascii(&SiteSet::new(Space::Plane), Some(w)), "..\n..\n");
        let seg5 = SiteSet::plane((0..5).map(|i| (i, 0)));
        let img = apply_rplus(&seg5);
        assert_eq!(render_ascii(&img, Some(Window::around(&img, 0))), "ooo.\noooo\n");
    }

    #[test]
    fn cutspec_round_trip() {
        let cut = Cut::new(plane(&[(2, 0)]), plane(&[(0, 0), (1, 0)]), plane(&[(3, 0), (-1, 4)]));
        let text = serialize_cutspec(&cut);
        assert_eq!(parse_cutspec(&text, Space::Plane).unwrap(), cut);
        let loose = "# cut\nC: (2,0)\nA1: 0,0 1,0\n";
        let parsed = parse_cutspec(loose, Space::Plane).unwrap();
        assert_eq!(parsed.a1.len(), 2);
        assert!(parsed.a2.is_empty());
        assert!(parse_cutspec("B: 1,1\n", Space::Plane).is_err());
        let t3 = Space::torus(3).unwrap();
        assert!(matches!(parse_cutspec("C: 5,0\n", t3), Err(Error::NonCanonicalSite { .. })));
    }

    #[test]
    fn failures_round_trip() {
        let text = "# step x y value\n3 1 2 1\n5 0 0 0\n";
        let events = parse_failures(text).unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0], FailureEvent { step: 3, site: Site::new(1, 2), value: true });
        assert_eq!(parse_failures(&serialize_failures(&events)).unwrap(), events);
        assert!(parse_failures("1 2 3\n").is_err());
        assert!(parse_failures("1 2 3 7\n").is_err());
    }

    proptest! {
        #[test]
        fn plane_round_trip(sites in prop::collection::vec((-8i64..8, -8i64..8), 0..30)) {
            let s = SiteSet::plane(sites);
            let text = serialize_pattern(&s);
            prop_assert_eq!(parse_pattern(&text).unwrap(), s);
            prop_assert_eq!(serialize_pattern(&parse_pattern(&text).unwrap()), text);
        }

        #[test]
        fn torus_round_trip(n in 3i64..7, bits in prop::collection::vec(any::<bool>(), 49)) {
            let space = Space::torus(n).unwrap();
            let s = SiteSet::from_sites(
                space,
                (0..n * n).filter(|&i| bits[i as usize]).map(|i| Site::new(i % n, i / n)),
            );
            prop_assert_eq!(parse_pattern(&serialize_pattern(&s)).unwrap(), s);
        }
    }
}
