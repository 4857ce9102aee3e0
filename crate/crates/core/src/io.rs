//! Deterministic output formats: full-precision CSV, pretty JSON, a minimal
//! SVG spectrum plot, and a compact binary format for network realizations.
//!
//! All float text goes through [`fmt17`] so a rerun with the same seed
//! produces byte-identical files.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::net::{NetworkRealization, Weights};
use crate::params::{Arch, GatedNetParams};
use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Shortest round-trippable decimal form of an `f64` (17 significant
/// digits), in scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Eigenvalue cloud as CSV with header `re,im`.
pub fn write_csv_cloud(path: &Path, values: &[Complex64]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "re,im")?;
    for v in values {
        writeln!(w, "{},{}", fmt17(v.re), fmt17(v.im))?;
    }
    w.flush()?;
    Ok(())
}

/// Boundary loops as CSV with header `loop,vertex,re,im`.
pub fn write_csv_loops(path: &Path, loops: &[Vec<Complex64>]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "loop,vertex,re,im")?;
    for (li, l) in loops.iter().enumerate() {
        for (vi, p) in l.iter().enumerate() {
            writeln!(w, "{},{},{},{}", li, vi, fmt17(p.re), fmt17(p.im))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Generic numeric table as CSV. Every row must match the header's arity.
pub fn write_csv_rows(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::InvalidParams(format!(
                "row of {} values under a {}-column header",
                row.len(),
                header.len()
            )));
        }
        let cells: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Minimal standalone SVG of an eigenvalue cloud with optional boundary
/// loops and the unit circle for scale. The view box is the data's bounding
/// square with 10% padding.
pub fn svg_spectrum(
    path: &Path,
    values: &[Complex64],
    loops: &[Vec<Complex64>],
    unit_circle: bool,
) -> Result<()> {
    let pts = values
        .iter()
        .chain(loops.iter().flatten())
        .collect::<Vec<_>>();
    if pts.is_empty() {
        return Err(Error::InvalidParams("nothing to draw".into()));
    }
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for p in &pts {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    if unit_circle {
        x0 = x0.min(-1.0);
        x1 = x1.max(1.0);
        y0 = y0.min(-1.0);
        y1 = y1.max(1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-6);
    let pad = 0.1 * span;
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let half = 0.5 * span + pad;
    const SIZE: f64 = 800.0;
    let sx = |x: f64| (x - (cx - half)) / (2.0 * half) * SIZE;
    // SVG y grows downward; flip so the upper half plane is on top.
    let sy = |y: f64| ((cy + half) - y) / (2.0 * half) * SIZE;

    let mut w = create(path)?;
    writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" \
         viewBox=\"0 0 {SIZE} {SIZE}\">"
    )?;
    writeln!(w, "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>")?;
    if unit_circle {
        writeln!(
            w,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"#bbbbbb\" \
             stroke-width=\"1\" stroke-dasharray=\"4 4\"/>",
            sx(0.0),
            sy(0.0),
            SIZE / (2.0 * half)
        )?;
    }
    for v in values {
        writeln!(
            w,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\" fill=\"#1f4e8c\" fill-opacity=\"0.55\"/>",
            sx(v.re),
            sy(v.im)
        )?;
    }
    for l in loops {
        if l.is_empty() {
            continue;
        }
        let mut d = String::new();
        for (i, p) in l.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            d.push_str(&format!("{cmd}{:.2} {:.2} ", sx(p.re), sy(p.im)));
        }
        d.push('Z');
        writeln!(
            w,
            "<path d=\"{}\" fill=\"none\" stroke=\"#c23b22\" stroke-width=\"1.8\"/>",
            d.trim_end()
        )?;
    }
    writeln!(w, "</svg>")?;
    w.flush()?;
    Ok(())
}

const NET_MAGIC: &[u8; 6] = b"GSNW1\n";

fn weight_blocks(weights: &Weights) -> (Vec<&DenseMatrix>, Vec<&Vec<f64>>) {
    match weights {
        Weights::Gru {
            u_z,
            u_r,
            u_h,
            b_z,
            b_r,
            b_h,
        } => (vec![u_z, u_r, u_h], vec![b_z, b_r, b_h]),
        Weights::Lstm {
            u_f,
            u_i,
            u_o,
            u_h,
            b_f,
            b_i,
            b_o,
            b_h,
        } => (vec![u_f, u_i, u_o, u_h], vec![b_f, b_i, b_o, b_h]),
        Weights::Vanilla { u_h, b_h } => (vec![u_h], vec![b_h]),
    }
}

/// Saves a realization: magic, JSON-encoded parameters (length-prefixed),
/// the seed, then all weight matrices and bias vectors as little-endian
/// `f64` in the architecture's canonical gate order.
pub fn save_realization(path: &Path, net: &NetworkRealization) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(NET_MAGIC)?;
    let params_json = serde_json::to_vec(&net.params)?;
    w.write_all(&(params_json.len() as u64).to_le_bytes())?;
    w.write_all(&params_json)?;
    w.write_all(&net.seed.to_le_bytes())?;
    let (mats, biases) = weight_blocks(&net.weights);
    for m in mats {
        for v in &m.data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    for b in biases {
        for v in b.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact_f64(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

/// Loads a realization saved by [`save_realization`].
pub fn load_realization(path: &Path) -> Result<NetworkRealization> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != NET_MAGIC {
        return Err(Error::InvalidParams(format!(
            "not a network realization file (bad magic {magic:?})"
        )));
    }
    let mut len8 = [0u8; 8];
    r.read_exact(&mut len8)?;
    let json_len = u64::from_le_bytes(len8) as usize;
    if json_len > 1 << 20 {
        return Err(Error::InvalidParams(format!(
            "implausible parameter block of {json_len} bytes"
        )));
    }
    let mut json = vec![0u8; json_len];
    r.read_exact(&mut json)?;
    let params: GatedNetParams = serde_json::from_slice(&json)?;
    params.validate()?;
    let mut seed8 = [0u8; 8];
    r.read_exact(&mut seed8)?;
    let seed = u64::from_le_bytes(seed8);

    let n = params.n;
    let mut mat = || -> Result<DenseMatrix> {
        Ok(DenseMatrix {
            rows: n,
            cols: n,
            data: read_exact_f64(&mut r, n * n)?,
        })
    };
    let weights = match params.arch {
        Arch::Gru => {
            let (u_z, u_r, u_h) = (mat()?, mat()?, mat()?);
            Weights::Gru {
                u_z,
                u_r,
                u_h,
                b_z: read_exact_f64(&mut r, n)?,
                b_r: read_exact_f64(&mut r, n)?,
                b_h: read_exact_f64(&mut r, n)?,
            }
        }
        Arch::Lstm => {
            let (u_f, u_i, u_o, u_h) = (mat()?, mat()?, mat()?, mat()?);
            Weights::Lstm {
                u_f,
                u_i,
                u_o,
                u_h,
                b_f: read_exact_f64(&mut r, n)?,
                b_i: read_exact_f64(&mut r, n)?,
                b_o: read_exact_f64(&mut r, n)?,
                b_h: read_exact_f64(&mut r, n)?,
            }
        }
        Arch::Vanilla => {
            let u_h = mat()?;
            Weights::Vanilla {
                u_h,
                b_h: read_exact_f64(&mut r, n)?,
            }
        }
    };
    Ok(NetworkRealization {
        params,
        seed,
        weights,
    })
}
