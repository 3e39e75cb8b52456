//! Plain-text dumps of spectra and correlation functions.
//!
//! Spectra are written as two columns `nu amplitude`, correlation functions as
//! three columns `t re im`. Header lines start with `#`; `#@ key = value` lines
//! carry metadata and are understood by the spectrum reader.

use std::fmt::Write as _;
use std::path::Path;

use super::correlation::CorrelationSeries;
use super::grid::Spectrum;
use crate::error::{Error, Result};

pub fn format_spectrum(s: &Spectrum, meta: &[(&str, String)]) -> String {
    let mut out = String::new();
    out.push_str("# nu_cm-1 amplitude\n");
    let _ = writeln!(out, "#@ units = cm-1");
    let _ = writeln!(out, "#@ normalized = {}", s.normalized);
    for (k, v) in meta {
        let _ = writeln!(out, "#@ {k} = {v}");
    }
    for (nu, a) in s.nu().iter().zip(&s.amp) {
        let _ = writeln!(out, "{nu:e} {a:e}");
    }
    out
}

pub fn format_correlation(m: &CorrelationSeries) -> String {
    let mut out = String::new();
    out.push_str("# t_cm re im\n");
    let _ = writeln!(out, "#@ kind = {:?}", m.kind);
    let _ = writeln!(out, "#@ dt = {:e}", m.grid.dt);
    for (j, v) in m.values.iter().enumerate() {
        let _ = writeln!(out, "{:.9e} {:.12e} {:.12e}", m.grid.t(j), v.re, v.im);
    }
    out
}

pub fn write_spectrum(path: &Path, s: &Spectrum, meta: &[(&str, String)]) -> Result<()> {
    std::fs::write(path, format_spectrum(s, meta)).map_err(|e| Error::io(path, e))
}

pub fn write_correlation(path: &Path, m: &CorrelationSeries) -> Result<()> {
    std::fs::write(path, format_correlation(m)).map_err(|e| Error::io(path, e))
}
