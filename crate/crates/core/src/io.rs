//! CSV files for sample sets and histograms.
//!
//! Every file opens with `# key=value` metadata lines, followed by an
//! RFC-4180 body with a header row. Floats use the shortest representation
//! that round-trips, so rewriting a file read back is byte-identical.
//!
//! Sample files: metadata `domain`, `seed`, `sigma_u_sq`, `sigma_v_sq`,
//! `sigma_w_sq`; columns `a,b,c`.
//!
//! Histogram files: metadata `dim`, `truncated` plus caller entries; columns
//! `lo_0..lo_{D-1},hi_0..hi_{D-1},mass,depth`.

use std::io::{Read, Write};

use crate::entropy::{AxisBox, Leaf, MultiResHistogram};
use crate::error::{Error, Result};
use crate::sampler::{Domain, TripletSampleSet};
use crate::types::TripartiteGaussianState;

/// Ordered `key=value` metadata.
pub type Metadata = Vec<(String, String)>;

pub fn write_metadata<W: Write>(w: &mut W, meta: &[(String, String)]) -> Result<()> {
    for (k, v) in meta {
        if k.contains(['=', '\n']) || v.contains('\n') {
            return Err(Error::Format(format!("metadata entry `{k}` is not a single key=value line")));
        }
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Splits leading `#` lines off `text`, returning the metadata and the body.
pub fn split_metadata(text: &str) -> (Metadata, &str) {
    let mut meta = Vec::new();
    let mut rest = text;
    while let Some(line) = rest.strip_prefix('#') {
        let (line, tail) = line.split_once('\n').unwrap_or((line, ""));
        if let Some((k, v)) = line.trim().split_once('=') {
            meta.push((k.trim().to_string(), v.trim().to_string()));
        }
        rest = tail;
    }
    (meta, rest)
}

fn lookup<'a>(meta: &'a [(String, String)], key: &str) -> Result<&'a str> {
    meta.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Format(format!("missing metadata `{key}`")))
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Format(format!("bad {what}: `{s}`")))
}

fn body_reader(body: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().from_reader(body.as_bytes())
}

pub fn write_samples_csv<W: Write>(set: &TripletSampleSet, mut w: W) -> Result<()> {
    let [u, v, ww] = set.state.position_variances();
    let meta: Metadata = vec![
        ("domain".into(), set.domain.name().into()),
        ("seed".into(), set.seed.to_string()),
        ("sigma_u_sq".into(), u.to_string()),
        ("sigma_v_sq".into(), v.to_string()),
        ("sigma_w_sq".into(), ww.to_string()),
    ];
    write_metadata(&mut w, &meta)?;
    let mut out = csv::WriterBuilder::new().from_writer(w);
    out.write_record(["a", "b", "c"])?;
    for s in &set.samples {
        out.write_record(s.iter().map(|x| x.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(mut r: R) -> Result<TripletSampleSet> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let (meta, body) = split_metadata(&text);
    let domain: Domain = lookup(&meta, "domain")?.parse()?;
    let seed = parse(lookup(&meta, "seed")?, "seed")?;
    let var = |k| parse::<f64>(lookup(&meta, k)?, k);
    let state = TripartiteGaussianState::new(var("sigma_u_sq")?, var("sigma_v_sq")?, var("sigma_w_sq")?)?;
    let mut samples = Vec::new();
    for rec in body_reader(body).records() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Format(format!("expected 3 columns, got {}", rec.len())));
        }
        samples.push([
            parse(&rec[0], "sample")?,
            parse(&rec[1], "sample")?,
            parse(&rec[2], "sample")?,
        ]);
    }
    Ok(TripletSampleSet {
        domain,
        samples,
        seed,
        state,
    })
}

pub fn write_histogram_csv<const D: usize, W: Write>(
    hist: &MultiResHistogram<D>,
    extra: &[(String, String)],
    mut w: W,
) -> Result<()> {
    let mut meta: Metadata = vec![
        ("dim".into(), D.to_string()),
        ("truncated".into(), hist.truncated.to_string()),
    ];
    meta.extend(extra.iter().cloned());
    write_metadata(&mut w, &meta)?;
    let mut out = csv::WriterBuilder::new().from_writer(w);
    let header: Vec<String> = (0..D)
        .map(|i| format!("lo_{i}"))
        .chain((0..D).map(|i| format!("hi_{i}")))
        .chain(["mass".into(), "depth".into()])
        .collect();
    out.write_record(&header)?;
    for l in &hist.leaves {
        let row: Vec<String> = l
            .bbox
            .lo
            .iter()
            .chain(&l.bbox.hi)
            .map(|x| x.to_string())
            .chain([l.mass.to_string(), l.depth.to_string()])
            .collect();
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a histogram file. The root box is the bounding box of the leaves.
pub fn read_histogram_csv<const D: usize, R: Read>(mut r: R) -> Result<(MultiResHistogram<D>, Metadata)> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let (meta, body) = split_metadata(&text);
    let dim: usize = parse(lookup(&meta, "dim")?, "dim")?;
    if dim != D {
        return Err(Error::Format(format!("file holds a {dim}-D histogram, expected {D}-D")));
    }
    let truncated = parse(lookup(&meta, "truncated")?, "truncated")?;
    let mut leaves = Vec::new();
    for rec in body_reader(body).records() {
        let rec = rec?;
        if rec.len() != 2 * D + 2 {
            return Err(Error::Format(format!("expected {} columns, got {}", 2 * D + 2, rec.len())));
        }
        let lo: [f64; D] = std::array::from_fn(|i| parse(&rec[i], "lo").unwrap_or(f64::NAN));
        let hi: [f64; D] = std::array::from_fn(|i| parse(&rec[D + i], "hi").unwrap_or(f64::NAN));
        leaves.push(Leaf {
            bbox: AxisBox::new(lo, hi)?,
            mass: parse(&rec[2 * D], "mass")?,
            depth: parse(&rec[2 * D + 1], "depth")?,
        });
    }
    if leaves.is_empty() {
        return Err(Error::Format("no leaves".into()));
    }
    let mut lo = [f64::INFINITY; D];
    let mut hi = [f64::NEG_INFINITY; D];
    for l in &leaves {
        for i in 0..D {
            lo[i] = lo[i].min(l.bbox.lo[i]);
            hi[i] = hi[i].max(l.bbox.hi[i]);
        }
    }
    let hist = MultiResHistogram::new(AxisBox::new(lo, hi)?, leaves, truncated)?;
    Ok((hist, meta))
}
