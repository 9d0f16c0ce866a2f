//! Text formats `dgf v1` (grid), `dms v1` (measure) and `dst v1` (set).
//!
//! ```text
//! dgf v1
//! d=1 n=2
//! origin=0 side=1
//! 1.0000000000000000e0 2.0000000000000000e0 3.0000000000000000e0 4.0000000000000000e0
//! ```
//!
//! Values are written with 17 significant digits, which round-trips every `f64`. Payload rows
//! follow the last axis; readers accept any whitespace layout.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CapError, Result};
use crate::grid::{DiscreteMeasure, DyadicSet, GridFunction, RootCube};

const GRID_TAG: &str = "dgf v1";
const MEASURE_TAG: &str = "dms v1";
const SET_TAG: &str = "dst v1";

fn perr(line: usize, token: usize, msg: impl Into<String>) -> CapError {
    CapError::Parse { line, token, msg: msg.into() }
}

struct Parsed<'a> {
    root: RootCube,
    // (line, token-in-line, text)
    payload: Vec<(usize, usize, &'a str)>,
}

fn key_value<'a>(tok: &'a str, key: &str, line: usize, pos: usize) -> Result<&'a str> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| perr(line, pos, format!("expected `{key}=...`, found `{tok}`")))
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize, pos: usize, what: &str) -> Result<T> {
    s.parse().map_err(|_| perr(line, pos, format!("invalid {what} `{s}`")))
}

fn parse_common<'a>(text: &'a str, tag: &str) -> Result<Parsed<'a>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, first) = lines.next().ok_or_else(|| perr(1, 1, "empty file"))?;
    if first.trim() != tag {
        return Err(perr(ln, 1, format!("expected header `{tag}`, found `{}`", first.trim())));
    }

    let (ln, second) = lines.next().ok_or_else(|| perr(2, 1, "missing `d=.. n=..` line"))?;
    let toks: Vec<&str> = second.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(perr(ln, toks.len().min(2) + 1, "expected exactly `d=<int> n=<int>`"));
    }
    let d: usize = parse_num(key_value(toks[0], "d", ln, 1)?, ln, 1, "dimension")?;
    let n: u32 = parse_num(key_value(toks[1], "n", ln, 2)?, ln, 2, "resolution")?;

    let (ln, third) = lines.next().ok_or_else(|| perr(3, 1, "missing `origin=.. side=..` line"))?;
    let toks: Vec<&str> = third.split_whitespace().collect();
    if toks.len() != d + 1 {
        return Err(perr(ln, toks.len() + 1, format!("expected {d} origin coordinates and a side")));
    }
    let mut origin = Vec::with_capacity(d);
    for (i, t) in toks[..d].iter().enumerate() {
        let t = if i == 0 { key_value(t, "origin", ln, 1)? } else { t };
        origin.push(parse_num::<f64>(t, ln, i + 1, "origin coordinate")?);
    }
    let side: f64 = parse_num(key_value(toks[d], "side", ln, d + 1)?, ln, d + 1, "side")?;
    let root = RootCube::new(d, origin, side, n).map_err(|e| perr(ln, 1, e.to_string()))?;

    let mut payload = Vec::with_capacity(root.leaf_count());
    for (ln, l) in lines {
        for (j, t) in l.split_whitespace().enumerate() {
            payload.push((ln, j + 1, t));
        }
    }
    let expected = root.leaf_count();
    if payload.len() != expected {
        let (line, token) = payload.last().map(|&(l, t, _)| (l, t)).unwrap_or((3, d + 1));
        return Err(perr(line, token, format!("payload has {} values, expected {expected}", payload.len())));
    }
    Ok(Parsed { root, payload })
}

fn parse_reals(p: &Parsed<'_>, what: &str) -> Result<Vec<f64>> {
    p.payload
        .iter()
        .map(|&(l, t, s)| {
            let v: f64 = parse_num(s, l, t, what)?;
            if !v.is_finite() {
                return Err(perr(l, t, format!("non-finite {what} `{s}`")));
            }
            Ok(v)
        })
        .collect()
}

pub fn parse_grid(text: &str) -> Result<GridFunction> {
    let p = parse_common(text, GRID_TAG)?;
    let v = parse_reals(&p, "value")?;
    GridFunction::new(p.root, v)
}

pub fn parse_measure(text: &str) -> Result<DiscreteMeasure> {
    let p = parse_common(text, MEASURE_TAG)?;
    let v = parse_reals(&p, "mass")?;
    if let Some((i, &m)) = v.iter().enumerate().find(|(_, m)| **m < 0.0) {
        let (l, t, _) = p.payload[i];
        return Err(perr(l, t, format!("negative mass {m}")));
    }
    DiscreteMeasure::new(p.root, v)
}

pub fn parse_set(text: &str) -> Result<DyadicSet> {
    let p = parse_common(text, SET_TAG)?;
    let mask = p
        .payload
        .iter()
        .map(|&(l, t, s)| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(perr(l, t, format!("expected 0 or 1, found `{s}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    DyadicSet::new(p.root, mask)
}

fn header(tag: &str, root: &RootCube) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{tag}");
    let _ = writeln!(s, "d={} n={}", root.d(), root.n());
    let coords: Vec<String> = root.origin().iter().map(|x| format!("{x:?}")).collect();
    let _ = writeln!(s, "origin={} side={:?}", coords.join(" "), root.side());
    s
}

fn body<T>(root: &RootCube, items: &[T], fmt: impl Fn(&T) -> String) -> String {
    let mut s = String::new();
    for row in items.chunks(root.per_axis()) {
        let toks: Vec<String> = row.iter().map(&fmt).collect();
        s.push_str(&toks.join(" "));
        s.push('\n');
    }
    s
}

fn fmt_real(v: &f64) -> String {
    format!("{v:.16e}")
}

pub fn format_grid(f: &GridFunction) -> String {
    header(GRID_TAG, f.root()) + &body(f.root(), f.values(), fmt_real)
}

pub fn format_measure(m: &DiscreteMeasure) -> String {
    header(MEASURE_TAG, m.root()) + &body(m.root(), m.masses(), fmt_real)
}

pub fn format_set(e: &DyadicSet) -> String {
    header(SET_TAG, e.root()) + &body(e.root(), e.mask(), |&b| if b { "1".into() } else { "0".into() })
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<GridFunction> {
    parse_grid(&std::fs::read_to_string(path)?)
}

pub fn read_measure(path: impl AsRef<Path>) -> Result<DiscreteMeasure> {
    parse_measure(&std::fs::read_to_string(path)?)
}

pub fn read_set(path: impl AsRef<Path>) -> Result<DyadicSet> {
    parse_set(&std::fs::read_to_string(path)?)
}

pub fn write_grid(path: impl AsRef<Path>, f: &GridFunction) -> Result<()> {
    Ok(std::fs::write(path, format_grid(f))?)
}

pub fn write_measure(path: impl AsRef<Path>, m: &DiscreteMeasure) -> Result<()> {
    Ok(std::fs::write(path, format_measure(m))?)
}

pub fn write_set(path: impl AsRef<Path>, e: &DyadicSet) -> Result<()> {
    Ok(std::fs::write(path, format_set(e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_grid() {
        let f = parse_grid("dgf v1\nd=1 n=0\norigin=0 side=1\n1.0\n").unwrap();
        assert_eq!(f.values(), &[1.0]);
        assert_eq!(f.root().n(), 0);
    }

    #[test]
    fn short_payload_is_rejected() {
        let err = parse_grid("dgf v1\nd=1 n=2\norigin=0 side=1\n1 2 3\n").unwrap_err();
        match err {
            CapError::Parse { line, token, .. } => assert_eq!((line, token), (4, 3)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_token_is_located() {
        let err = parse_grid("dgf v1\nd=1 n=1\norigin=0 side=1\n1\nnope\n").unwrap_err();
        assert!(matches!(err, CapError::Parse { line: 5, token: 1, .. }), "{err}");
        let err = parse_grid("dgf v1\nd=1 n=1\norigin=0 side=1\n1 inf\n").unwrap_err();
        assert!(matches!(err, CapError::Parse { line: 4, token: 2, .. }), "{err}");
        assert!(parse_grid("dgx v1\nd=1 n=1\norigin=0 side=1\n1 2\n").is_err());
        assert!(parse_set("dst v1\nd=1 n=1\norigin=0 side=1\n1 2\n").is_err());
        assert!(parse_measure("dms v1\nd=1 n=1\norigin=0 side=1\n1 -2\n").is_err());
    }

    #[test]
    fn set_and_measure_round_trip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let root = RootCube::new(2, vec![-1.5, 0.25], 3.0, 2).unwrap();
        let e = DyadicSet::from_leaves(root.clone(), &[0, 5, 15]).unwrap();
        write_set(dir.path().join("e.dst"), &e).unwrap();
        assert_eq!(read_set(dir.path().join("e.dst")).unwrap(), e);
        let m = DiscreteMeasure::new(root, (0..16).map(|i| i as f64 / 7.0).collect()).unwrap();
        write_measure(dir.path().join("m.dms"), &m).unwrap();
        assert_eq!(read_measure(dir.path().join("m.dms")).unwrap(), m);
    }

    proptest! {
        #[test]
        fn grid_round_trip_is_bitwise(vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 64)) {
            let root = RootCube::unit(1, 6).unwrap();
            let f = GridFunction::new(root, vals).unwrap();
            let g = parse_grid(&format_grid(&f)).unwrap();
            for (a, b) in f.values().iter().zip(g.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn three_d_round_trip(vals in proptest::collection::vec(-1e3f64..1e3, 64), ox in -10.0f64..10.0) {
            let root = RootCube::new(3, vec![ox, 0.1, 1e-7], 0.3, 2).unwrap();
            let f = GridFunction::new(root, vals).unwrap();
            prop_assert_eq!(parse_grid(&format_grid(&f)).unwrap(), f);
        }
    }
}
