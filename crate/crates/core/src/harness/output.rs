//! CSV files written by the experiments. Each starts with a comment line
//! carrying the config hash and master seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::experiments::{ComplexityRow, Fig2Output, RunOutput};
use crate::Result;

fn header<W: Write>(out: &mut W, hash: &str, seed: u64, columns: &str) -> Result<()> {
    writeln!(out, "# config_sha256={hash} seed={seed}")?;
    writeln!(out, "{columns}")?;
    Ok(())
}

pub fn write_fig1_cdf<W: Write>(run: &RunOutput, mut out: W) -> Result<()> {
    header(&mut out, &run.config_hash, run.seed, "scheme,se_value,cdf")?;
    for s in &run.schemes {
        for p in &s.cdf {
            writeln!(out, "{},{:.6},{:.6}", s.spec.label(), p.value, p.cdf)?;
        }
    }
    Ok(())
}

pub fn write_fig1_summary<W: Write>(run: &RunOutput, mut out: W) -> Result<()> {
    header(&mut out, &run.config_hash, run.seed, "scheme,median_se,mean_se,mean_aps")?;
    for s in &run.schemes {
        writeln!(out, "{},{:.6},{:.6},{:.4}", s.spec.label(), s.median_se, s.mean_se, s.mean_aps)?;
    }
    Ok(())
}

pub fn write_fig2<W: Write>(run: &Fig2Output, mut out: W) -> Result<()> {
    header(&mut out, &run.config_hash, run.seed, "scheme,snr_db,sigma_c_db,mean_sinr_db")?;
    for r in &run.rows {
        writeln!(out, "{},{},{},{:.6}", r.scheme, r.snr_db, r.sigma_c_db, r.mean_sinr_db)?;
    }
    Ok(())
}

pub fn write_complexity<W: Write>(rows: &[ComplexityRow], hash: &str, seed: u64, mut out: W) -> Result<()> {
    header(&mut out, hash, seed, "scheme,ops,backhaul_scalars,extra_scalars")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.scheme, r.ops, r.backhaul_scalars, r.extra_scalars)?;
    }
    Ok(())
}

/// Create `dir/name` (and `dir`), hand a buffered writer to `f`.
pub fn write_file<F>(dir: &Path, name: &str, f: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(path)
}
