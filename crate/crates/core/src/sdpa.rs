//! SDPA sparse (`.dat-s`) reader and writer.
//!
//! SDPA files describe a maximization problem, so `C` is negated on read and
//! on write. Multi-block files are flattened into one block-diagonal matrix.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::{InstanceMeta, SdpInstance};
use crate::matrix::{SparseSymMatrix, SymMatrix};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let cleaned = tok.replace(['D', 'd'], "e");
    let v: f64 = cleaned.parse().map_err(|_| parse_err(line, format!("bad number `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite number `{tok}`")));
    }
    Ok(v)
}

fn parse_int(tok: &str, line: usize) -> Result<i64> {
    tok.parse().map_err(|_| parse_err(line, format!("bad integer `{tok}`")))
}

fn header_tokens(raw: &str) -> Vec<&str> {
    raw.split(|c: char| c.is_whitespace() || matches!(c, ',' | '(' | ')' | '{' | '}'))
        .filter(|t| !t.is_empty())
        .collect()
}

const META_PREFIX: &str = "\"sdpxlab ";

/// Recovers metadata from a `"sdpxlab label=… offset=… maximize=…` comment.
fn read_meta(text: &str) -> Result<Option<InstanceMeta>> {
    let Some((ln, line)) = text.lines().enumerate().find(|(_, l)| l.trim_start().starts_with(META_PREFIX)) else {
        return Ok(None);
    };
    let mut meta = InstanceMeta::default();
    for tok in line.trim_start()[META_PREFIX.len()..].split_whitespace() {
        let (key, value) = tok.split_once('=').ok_or_else(|| parse_err(ln + 1, format!("bad metadata token `{tok}`")))?;
        match key {
            "label" => meta.label = value.to_string(),
            "offset" => meta.offset = parse_f64(value, ln + 1)?,
            "maximize" => meta.maximize = value.parse().map_err(|_| parse_err(ln + 1, format!("bad flag `{value}`")))?,
            _ => {}
        }
    }
    Ok(Some(meta))
}

pub fn read_sdpa(text: &str) -> Result<SdpInstance> {
    let meta = read_meta(text)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));

    let mut next_line = |what: &str| lines.next().ok_or_else(|| parse_err(0, format!("unexpected end of input, expected {what}")));

    let (ln, l) = next_line("constraint count")?;
    let m = *header_tokens(l).first().ok_or_else(|| parse_err(ln, "missing constraint count"))?;
    let m = usize::try_from(parse_int(m, ln)?).map_err(|_| parse_err(ln, "negative constraint count"))?;

    let (ln, l) = next_line("block count")?;
    let nb = *header_tokens(l).first().ok_or_else(|| parse_err(ln, "missing block count"))?;
    let nb = usize::try_from(parse_int(nb, ln)?).map_err(|_| parse_err(ln, "negative block count"))?;
    if nb == 0 {
        return Err(parse_err(ln, "block count must be positive"));
    }

    let (ln, l) = next_line("block sizes")?;
    let toks = header_tokens(l);
    if toks.len() < nb {
        return Err(parse_err(ln, format!("expected {nb} block sizes, found {}", toks.len())));
    }
    let mut offsets = Vec::with_capacity(nb);
    let mut sizes = Vec::with_capacity(nb);
    let mut n = 0usize;
    for t in &toks[..nb] {
        let s = parse_int(t, ln)?;
        if s < 0 {
            return Err(Error::Unsupported(format!("diagonal (LP) block of size {} on line {ln}", -s)));
        }
        if s == 0 {
            return Err(parse_err(ln, "zero block size"));
        }
        offsets.push(n);
        sizes.push(s as usize);
        n += s as usize;
    }

    let mut b = Vec::with_capacity(m);
    while b.len() < m {
        let (ln, l) = next_line("right-hand side")?;
        for t in header_tokens(l) {
            if b.len() == m {
                break;
            }
            b.push(parse_f64(t, ln)?);
        }
    }

    let mut mats: Vec<BTreeMap<(usize, usize), f64>> = vec![BTreeMap::new(); m + 1];
    for (ln, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < 5 {
            return Err(parse_err(ln, format!("expected `k blk i j value`, found `{l}`")));
        }
        let k = parse_int(toks[0], ln)?;
        let blk = parse_int(toks[1], ln)?;
        let i = parse_int(toks[2], ln)?;
        let j = parse_int(toks[3], ln)?;
        let v = parse_f64(toks[4], ln)?;
        if k < 0 || k as usize > m {
            return Err(parse_err(ln, format!("matrix index {k} outside 0..={m}")));
        }
        if blk < 1 || blk as usize > nb {
            return Err(parse_err(ln, format!("block index {blk} outside 1..={nb}")));
        }
        let bi = blk as usize - 1;
        let size = sizes[bi] as i64;
        if i < 1 || j < 1 || i > size || j > size {
            return Err(parse_err(ln, format!("entry ({i},{j}) outside block of size {size}")));
        }
        let gi = offsets[bi] + i as usize - 1;
        let gj = offsets[bi] + j as usize - 1;
        *mats[k as usize].entry((gi.min(gj), gi.max(gj))).or_insert(0.0) += v;
    }

    let mut c = SymMatrix::zeros(n);
    for (&(i, j), &v) in &mats[0] {
        c.set(i, j, -v);
    }
    let a = mats[1..]
        .iter()
        .map(|mk| SparseSymMatrix::new(n, mk.iter().map(|(&(i, j), &v)| (i, j, v))))
        .collect::<Result<Vec<_>>>()?;
    let mut inst = SdpInstance::new(c, a, b)?;
    inst.check_nonzero_constraints()?;
    if let Some(meta) = meta {
        inst = inst.with_meta(meta);
    }
    Ok(inst)
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a single-block SDPA file; values carry 17 significant digits.
pub fn write_sdpa(inst: &SdpInstance) -> String {
    let mut out = String::new();
    let meta = &inst.meta;
    if *meta != InstanceMeta::default() && !meta.label.contains(char::is_whitespace) {
        let _ = writeln!(out, "{META_PREFIX}label={} offset={} maximize={}", meta.label, fmt_value(meta.offset), meta.maximize);
    }
    let _ = writeln!(out, "{}", inst.m);
    let _ = writeln!(out, "1");
    let _ = writeln!(out, "{}", inst.n);
    let b: Vec<String> = inst.b.iter().map(|&v| fmt_value(v)).collect();
    let _ = writeln!(out, "{}", b.join(" "));
    for i in 0..inst.n {
        for j in i..inst.n {
            let v = inst.c.get(i, j);
            if v != 0.0 {
                let _ = writeln!(out, "0 1 {} {} {}", i + 1, j + 1, fmt_value(-v));
            }
        }
    }
    for (k, ak) in inst.a.iter().enumerate() {
        for &(i, j, v) in ak.coords() {
            let _ = writeln!(out, "{} 1 {} {} {}", k + 1, i + 1, j + 1, fmt_value(v));
        }
    }
    out
}
