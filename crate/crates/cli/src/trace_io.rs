//! CSV trace reading/writing for the matrix-valued flows and the report
//! command.

use anyhow::{bail, Context};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::io;

/// Matrix trace: header `t, g_1_1_re, g_1_1_im, g_1_2_re, ...` over the
/// upper triangle (1-based indices).
pub fn write_matrix_csv<W: io::Write>(
    w: W,
    samples: &[(f64, DMatrix<Complex64>)],
) -> anyhow::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let n = samples
        .first()
        .map(|(_, g)| g.nrows())
        .context("empty trace")?;
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        for j in i..n {
            header.push(format!("g_{}_{}_re", i + 1, j + 1));
            header.push(format!("g_{}_{}_im", i + 1, j + 1));
        }
    }
    wtr.write_record(&header)?;
    for (t, g) in samples {
        let mut rec = vec![format!("{t:.17e}")];
        for i in 0..n {
            for j in i..n {
                rec.push(format!("{:.17e}", g[(i, j)].re));
                rec.push(format!("{:.17e}", g[(i, j)].im));
            }
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads either trace schema back into metric samples; returns the matrices
/// and, for the normal-form schema, the block size s.
pub fn read_trace_csv<R: io::Read>(r: R) -> anyhow::Result<Vec<(f64, DMatrix<Complex64>)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr
        .headers()
        .context("missing CSV header")?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if header.first().map(String::as_str) != Some("t") {
        bail!("first trace column must be t");
    }
    if header.iter().any(|h| h.starts_with("g_1_1")) {
        read_matrix_schema(&header, rdr)
    } else {
        read_normal_form_schema(&header, rdr)
    }
}

fn read_matrix_schema<R: io::Read>(
    header: &[String],
    mut rdr: csv::Reader<R>,
) -> anyhow::Result<Vec<(f64, DMatrix<Complex64>)>> {
    // n(n+1) value columns for the upper triangle
    let cols = header.len() - 1;
    let n = (0..=64)
        .find(|n| n * (n + 1) == cols)
        .context("matrix trace has an unexpected column count")?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let val = |k: usize| -> anyhow::Result<f64> {
            record
                .get(k)
                .context("short record")?
                .parse::<f64>()
                .context("bad float in trace")
        };
        let t = val(0)?;
        let mut g = DMatrix::<Complex64>::zeros(n, n);
        let mut k = 1;
        for i in 0..n {
            for j in i..n {
                let z = Complex64::new(val(k)?, val(k + 1)?);
                g[(i, j)] = z;
                g[(j, i)] = z.conj();
                k += 2;
            }
        }
        out.push((t, g));
    }
    Ok(out)
}

fn read_normal_form_schema<R: io::Read>(
    header: &[String],
    mut rdr: csv::Reader<R>,
) -> anyhow::Result<Vec<(f64, DMatrix<Complex64>)>> {
    let s = header.iter().filter(|h| h.starts_with("A_")).count();
    if s == 0 || header.iter().filter(|h| h.starts_with("B_")).count() != s {
        bail!("normal-form trace must carry A_1..A_s and B_1..B_s");
    }
    // mixed positions from ReC_p{k} columns (1-based)
    let mixed: Vec<usize> = header
        .iter()
        .filter_map(|h| h.strip_prefix("ReC_p"))
        .map(|tail| tail.parse::<usize>().context("bad mixed column"))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let col = |name: &str| -> anyhow::Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("missing column {name}"))
    };
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let val = |k: usize| -> anyhow::Result<f64> {
            record
                .get(k)
                .context("short record")?
                .parse::<f64>()
                .context("bad float in trace")
        };
        let t = val(0)?;
        let mut g = DMatrix::<Complex64>::zeros(2 * s, 2 * s);
        for i in 0..s {
            g[(i, i)] = Complex64::new(val(col(&format!("A_{}", i + 1))?)?, 0.0);
            g[(s + i, s + i)] = Complex64::new(val(col(&format!("B_{}", i + 1))?)?, 0.0);
        }
        for &p in &mixed {
            let re = val(col(&format!("ReC_p{p}"))?)?;
            let im = val(col(&format!("ImC_p{p}"))?)?;
            let z = Complex64::new(re, im);
            g[(p - 1, s + p - 1)] = z;
            g[(s + p - 1, p - 1)] = z.conj();
        }
        out.push((t, g));
    }
    Ok(out)
}
