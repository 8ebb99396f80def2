//! Grid layout files.
//!
//! ```text
//! reachsynth-grid 1
//! size 3 2
//! start 0 0
//! target 2 1
//! slip 0.9        # optional, default 0.9
//! discount 0.9    # optional, default 0.9
//! row L M L       # top row (y = 1)
//! row L X H       # bottom row (y = 0)
//! ```
//!
//! Cells are `H`, `M`, `L` or `X` (obstacle).

use std::fmt::Write;

use super::mdp_format::number;
use super::Lines;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Risk};

pub const LAYOUT_HEADER: &str = "reachsynth-grid";

fn coord(line: usize, rest: &[&str], kw: &str) -> Result<(usize, usize)> {
    let [x, y] = rest else {
        return Err(Error::parse(line, format!("expected `{kw} <x> <y>`")));
    };
    let p = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| Error::parse(line, format!("{kw}: `{t}` is not a non-negative integer")))
    };
    Ok((p(x)?, p(y)?))
}

pub fn parse_layout(text: &str) -> Result<GridSpec> {
    let mut lines = Lines::new(text);
    lines.header(LAYOUT_HEADER, 1)?;
    let mut size = None;
    let mut start = None;
    let mut target = None;
    let mut slip = None;
    let mut discount = None;
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    while let Some((line, toks)) = lines.next_line() {
        let (kw, rest) = (toks[0], &toks[1..]);
        let once = |set: bool| {
            if set {
                Err(Error::parse(line, format!("`{kw}` given twice")))
            } else {
                Ok(())
            }
        };
        match kw {
            "size" => {
                once(size.is_some())?;
                let (w, h) = coord(line, rest, kw)?;
                if w == 0 || h == 0 || w.saturating_mul(h) > 1 << 20 {
                    return Err(Error::parse(line, format!("unsupported grid size {w}x{h}")));
                }
                size = Some((w, h));
            }
            "start" => {
                once(start.is_some())?;
                start = Some(coord(line, rest, kw)?);
            }
            "target" => {
                once(target.is_some())?;
                target = Some(coord(line, rest, kw)?);
            }
            "slip" | "discount" => {
                let [v] = rest else {
                    return Err(Error::parse(line, format!("expected `{kw} <value>`")));
                };
                let v = number(line, kw, v)?;
                let slot = if kw == "slip" { &mut slip } else { &mut discount };
                once(slot.is_some())?;
                *slot = Some(v);
            }
            "row" => {
                let Some((w, h)) = size else {
                    return Err(Error::parse(line, "`row` before `size`"));
                };
                if rows.len() == h {
                    return Err(Error::parse(line, format!("more than {h} rows")));
                }
                if rest.len() != w {
                    return Err(Error::parse(line, format!("row has {} cells, expected {w}", rest.len())));
                }
                rows.push((line, rest.to_vec()));
            }
            other => return Err(Error::parse(line, format!("unknown keyword `{other}`"))),
        }
    }
    let end = lines.line_count() + 1;
    let (w, h) = size.ok_or_else(|| Error::parse(end, "missing `size`"))?;
    if rows.len() != h {
        return Err(Error::parse(end, format!("{} rows, expected {h}", rows.len())));
    }
    let mut spec = GridSpec::new(w, h);
    spec.initial = start.ok_or_else(|| Error::parse(end, "missing `start`"))?;
    spec.target = target.ok_or_else(|| Error::parse(end, "missing `target`"))?;
    spec.slip = slip.unwrap_or(spec.slip);
    spec.discount = discount.unwrap_or(spec.discount);
    for (i, (line, cells)) in rows.iter().enumerate() {
        let y = h - 1 - i;
        for (x, &c) in cells.iter().enumerate() {
            if c == "X" {
                spec.obstacles.insert((x, y));
            } else {
                let r = Risk::from_symbol(c)
                    .ok_or_else(|| Error::parse(*line, format!("unknown cell `{c}`")))?;
                spec.set_risk(x, y, r);
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

pub fn write_layout(spec: &GridSpec) -> String {
    let mut out = format!("{LAYOUT_HEADER} 1\n");
    let _ = writeln!(out, "size {} {}", spec.width, spec.height);
    let _ = writeln!(out, "start {} {}", spec.initial.0, spec.initial.1);
    let _ = writeln!(out, "target {} {}", spec.target.0, spec.target.1);
    let _ = writeln!(out, "slip {}", spec.slip);
    let _ = writeln!(out, "discount {}", spec.discount);
    for y in (0..spec.height).rev() {
        out.push_str("row");
        for x in 0..spec.width {
            out.push(' ');
            if spec.obstacles.contains(&(x, y)) {
                out.push('X');
            } else {
                out.push(spec.risk_at(x, y).symbol());
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "reachsynth-grid 1\nsize 3 2\nstart 0 0\ntarget 2 1\nrow L M L\nrow L X H\n";

    #[test]
    fn small_layout() {
        let spec = parse_layout(SMALL).unwrap();
        assert_eq!((spec.width, spec.height), (3, 2));
        assert!(spec.obstacles.contains(&(1, 0)));
        assert_eq!(spec.risk_at(2, 0), Risk::High);
        assert_eq!(spec.risk_at(1, 1), Risk::Moderate);
        assert_eq!(parse_layout(&write_layout(&spec)).unwrap(), spec);
    }

    #[test]
    fn bad_layouts() {
        let cases = [
            (SMALL.replace("row L X H", "row L X Q"), "unknown cell"),
            (SMALL.replace("row L X H\n", ""), "1 rows, expected 2"),
            (SMALL.replace("start 0 0", "start 1 0"), "obstacle"),
            (SMALL.replace("size 3 2", "size 0 2"), "unsupported grid size"),
            (SMALL.replace("row L M L", "row L M"), "line 5"),
        ];
        for (text, needle) in cases {
            let err = parse_layout(&text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text:?}: {err}");
        }
    }
}
