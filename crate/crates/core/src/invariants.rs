//! Closed-form invariants: product Laplace spectrum, marked length spectrum,
//! isoperimetric comparisons, the curvature-gap constant, the curvature
//! deviation functional and the moduli count.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hyperbolic::{translation_length, MobiusElement};
use crate::metric::{metric_at, r_v_operator, vertical_derivative_norm2, MetricSpec};
use crate::report::{fmt_f, Table};
use crate::sampling::{stream_rng, SampleBox};

pub const MAX_WORD: usize = 8;
const TRACE_DEDUP: f64 = 1e-9;

/// Laplace eigenvalues of the base surface, with repeats for multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSpectrum {
    eigenvalues: Vec<f64>,
}

impl SigmaSpectrum {
    /// Sorts the input. The smallest eigenvalue must be a simple `0`.
    pub fn new(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::domain("empty surface spectrum"));
        }
        if let Some(bad) = eigenvalues.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::domain(format!("eigenvalue {bad} is not a finite value >= 0")));
        }
        eigenvalues.sort_by(f64::total_cmp);
        if eigenvalues[0] != 0.0 {
            return Err(Error::domain("a connected surface has lowest eigenvalue 0"));
        }
        if eigenvalues.get(1) == Some(&0.0) {
            return Err(Error::domain("eigenvalue 0 must be simple on a connected surface"));
        }
        Ok(Self { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Smallest positive eigenvalue.
    pub fn lambda1(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }

    /// One decimal per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| format!("line {}: `{line}` is not a number", i + 1))?;
            values.push(v);
        }
        Self::new(values).map_err(|e| e.to_string())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|reason| Error::Parse {
            path: path.to_path_buf(),
            reason,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub value: f64,
    pub multiplicity: usize,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain(format!("{name} = {v} must be > 0")));
    }
    Ok(())
}

/// All `λ_m + (2πn/L)² ≤ cutoff`, sorted, with `±n` folded into multiplicity 2
/// and exactly equal values merged.
pub fn product_spectrum(sig: &SigmaSpectrum, l: f64, cutoff: f64) -> Result<Vec<SpectrumEntry>> {
    check_positive("L", l)?;
    check_positive("cutoff", cutoff)?;
    let mut raw: Vec<SpectrumEntry> = Vec::new();
    for &lambda in &sig.eigenvalues {
        for n in 0u64.. {
            let value = lambda + (TAU * n as f64 / l).powi(2);
            if value > cutoff {
                break;
            }
            raw.push(SpectrumEntry {
                value,
                multiplicity: if n == 0 { 1 } else { 2 },
            });
        }
    }
    raw.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut out: Vec<SpectrumEntry> = Vec::with_capacity(raw.len());
    for e in raw {
        match out.last_mut() {
            Some(last) if last.value == e.value => last.multiplicity += e.multiplicity,
            _ => out.push(e),
        }
    }
    Ok(out)
}

pub fn spectrum_table(entries: &[SpectrumEntry]) -> Table {
    let mut table = Table::new("spectrum", &["value", "multiplicity"]);
    for e in entries {
        table.push(vec![fmt_f(e.value), e.multiplicity.to_string()]);
    }
    table
}

/// `min(λ₁, (2π/L)²)`.
pub fn spectral_gap(sig: &SigmaSpectrum, l: f64) -> Result<f64> {
    check_positive("L", l)?;
    let lambda1 = sig
        .lambda1()
        .ok_or_else(|| Error::domain("surface spectrum has no positive eigenvalue"))?;
    Ok(lambda1.min((TAU / l).powi(2)))
}

/// `√(ℓ_Σ² + (nL)²)`.
pub fn mls_length(ell_sigma: f64, n: i64, l: f64) -> Result<f64> {
    check_positive("L", l)?;
    if !(ell_sigma >= 0.0) || !ell_sigma.is_finite() {
        return Err(Error::domain(format!("surface length {ell_sigma} must be >= 0")));
    }
    if ell_sigma == 0.0 && n == 0 {
        return Err(Error::domain("not a closed geodesic class"));
    }
    Ok(ell_sigma.hypot(n as f64 * l))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthEntry {
    /// Letters `a, b, …` for generators and `A, B, …` for inverses; `id` for
    /// the trivial word.
    pub word: String,
    pub trace: f64,
    pub ell_sigma: f64,
    pub n: i64,
    pub ell: f64,
    /// Number of enumerated words merged into this entry.
    pub merged: usize,
}

fn letter(index: usize, inverse: bool) -> char {
    let c = (b'a' + index as u8) as char;
    if inverse {
        c.to_ascii_uppercase()
    } else {
        c
    }
}

/// Reduced words up to `max_word` letters over the generators and their
/// inverses, one entry per hyperbolic class proxy `(|trace|, n)` and fiber
/// winding `n ∈ [−n_max, n_max]`, sorted by total length.
pub fn enumerate_length_spectrum(
    generators: &[MobiusElement],
    max_word: usize,
    l: f64,
    n_max: u32,
) -> Result<Vec<LengthEntry>> {
    check_positive("L", l)?;
    if max_word > MAX_WORD {
        return Err(Error::domain(format!("max_word {max_word} exceeds {MAX_WORD}")));
    }
    if generators.len() > 26 {
        return Err(Error::domain("at most 26 generators"));
    }
    for (i, g) in generators.iter().enumerate() {
        if (g.determinant() - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "generator {} has determinant {}",
                letter(i, false),
                g.determinant()
            )));
        }
    }
    // letters: (generator index, inverse?)
    let letters: Vec<(usize, bool)> = (0..generators.len()).flat_map(|i| [(i, false), (i, true)]).collect();
    let mats: Vec<MobiusElement> = letters
        .iter()
        .map(|&(i, inv)| if inv { generators[i].inverse() } else { generators[i] })
        .collect();

    let mut words: Vec<(String, MobiusElement)> = Vec::new();
    let mut frontier: Vec<(String, MobiusElement, usize)> = Vec::new();
    for (k, m) in mats.iter().enumerate() {
        if max_word >= 1 {
            frontier.push((letter(letters[k].0, letters[k].1).to_string(), *m, k));
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (w, m, last) in frontier {
            if w.len() < max_word {
                for (k, step) in mats.iter().enumerate() {
                    // skip a letter followed by its own inverse
                    if letters[k].0 == letters[last].0 && letters[k].1 != letters[last].1 {
                        continue;
                    }
                    let mut w2 = w.clone();
                    w2.push(letter(letters[k].0, letters[k].1));
                    next.push((w2, m.compose(step), k));
                }
            }
            words.push((w, m));
        }
        frontier = next;
    }

    let n_max = n_max as i64;
    let mut entries: Vec<LengthEntry> = Vec::new();
    for n in -n_max..=n_max {
        if n != 0 {
            entries.push(LengthEntry {
                word: "id".into(),
                trace: 2.0,
                ell_sigma: 0.0,
                n,
                ell: mls_length(0.0, n, l)?,
                merged: 1,
            });
        }
    }
    for (w, m) in &words {
        if !m.is_hyperbolic() {
            continue;
        }
        let ell_sigma = translation_length(m)?;
        for n in -n_max..=n_max {
            let trace = m.trace();
            if let Some(e) = entries
                .iter_mut()
                .find(|e| e.n == n && (e.trace.abs() - trace.abs()).abs() <= TRACE_DEDUP)
            {
                e.merged += 1;
                continue;
            }
            entries.push(LengthEntry {
                word: w.clone(),
                trace,
                ell_sigma,
                n,
                ell: mls_length(ell_sigma, n, l)?,
                merged: 1,
            });
        }
    }
    entries.sort_by(|a, b| a.ell.total_cmp(&b.ell).then(a.n.cmp(&b.n)).then(a.word.cmp(&b.word)));
    Ok(entries)
}

pub fn length_spectrum_table(entries: &[LengthEntry]) -> Table {
    let mut table = Table::new("length_spectrum", &["word", "trace", "ell_sigma", "n", "ell", "merged"]);
    for e in entries {
        table.push(vec![
            e.word.clone(),
            fmt_f(e.trace),
            fmt_f(e.ell_sigma),
            e.n.to_string(),
            fmt_f(e.ell),
            e.merged.to_string(),
        ]);
    }
    table
}

/// `2πL √(2v/(Lπ) + (v/(2πL))²)`.
pub fn isoperimetric_bound(v: f64, l: f64) -> Result<f64> {
    check_positive("L", l)?;
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::domain(format!("volume {v} must be >= 0")));
    }
    Ok(TAU * l * (2.0 * v / (l * PI) + (v / (TAU * l)).powi(2)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TubeKind {
    /// `D_r × S¹`.
    Disk,
    /// Collar of width `w` around a closed geodesic, times `S¹`.
    Collar,
}

impl TubeKind {
    pub fn name(&self) -> &'static str {
        match self {
            TubeKind::Disk => "disk",
            TubeKind::Collar => "collar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeRow {
    pub kind: TubeKind,
    /// Radius `r` or width `w`.
    pub parameter: f64,
    pub volume: f64,
    pub area: f64,
    pub bound: f64,
}

impl TubeRow {
    /// Sign of `area − bound` as −1, 0 or 1.
    pub fn sign(&self) -> i32 {
        let d = self.area - self.bound;
        if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// `(v, area) = (2πL(cosh r − 1), 2πL sinh r)`.
pub fn disk_tube(l: f64, r: f64) -> Result<TubeRow> {
    check_positive("L", l)?;
    check_positive("r", r)?;
    let volume = TAU * l * 2.0 * (0.5 * r).sinh().powi(2);
    let area = TAU * l * r.sinh();
    Ok(TubeRow {
        kind: TubeKind::Disk,
        parameter: r,
        volume,
        area,
        bound: isoperimetric_bound(volume, l)?,
    })
}

/// `(v, area) = (2Lℓ sinh w, 2Lℓ cosh w)`.
pub fn collar_tube(l: f64, ell: f64, w: f64) -> Result<TubeRow> {
    check_positive("L", l)?;
    check_positive("collar length", ell)?;
    check_positive("w", w)?;
    let volume = 2.0 * l * ell * w.sinh();
    Ok(TubeRow {
        kind: TubeKind::Collar,
        parameter: w,
        volume,
        area: 2.0 * l * ell * w.cosh(),
        bound: isoperimetric_bound(volume, l)?,
    })
}

/// `area / bound` for disk tubes as `r → 0`, evaluated at a vanishing radius.
pub fn disk_tube_limit_ratio(l: f64) -> Result<f64> {
    let row = disk_tube(l, 1e-9)?;
    Ok(row.area / row.bound)
}

pub fn tube_profiles(l: f64, r_list: &[f64], ell_collar: f64, w_list: &[f64]) -> Result<Vec<TubeRow>> {
    let mut rows = Vec::with_capacity(r_list.len() + w_list.len());
    for &r in r_list {
        rows.push(disk_tube(l, r)?);
    }
    for &w in w_list {
        rows.push(collar_tube(l, ell_collar, w)?);
    }
    Ok(rows)
}

pub fn tube_table(rows: &[TubeRow]) -> Table {
    let mut table = Table::new(
        "isoperimetric",
        &["kind", "parameter", "volume", "area", "bound", "area_minus_bound_sign"],
    );
    for r in rows {
        table.push(vec![
            r.kind.name().into(),
            fmt_f(r.parameter),
            fmt_f(r.volume),
            fmt_f(r.area),
            fmt_f(r.bound),
            r.sign().to_string(),
        ]);
    }
    table
}

/// `δ = min(λ₁/2, π²/L²)` and `ε₀ = δ / (4(1 + diam²))`.
pub fn epsilon0(lambda1: f64, l: f64, diam: f64) -> Result<(f64, f64)> {
    check_positive("lambda1", lambda1)?;
    check_positive("L", l)?;
    check_positive("diam", diam)?;
    let delta = (0.5 * lambda1).min(PI * PI / (l * l));
    Ok((delta, delta / (4.0 * (1.0 + diam * diam))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Monte Carlo estimate of `∫ (|R_V|² + |∇V|²) dvol` over a chart box.
pub fn curvature_deviation(spec: &MetricSpec, bx: &SampleBox, n: usize, seed: u64) -> Result<DeviationEstimate> {
    if n < 100 {
        return Err(Error::domain(format!("N = {n} must be >= 100")));
    }
    if !(bx.y.0 > 0.0) {
        return Err(Error::domain("sampling box must lie in y > 0"));
    }
    let box_volume = (bx.x.1 - bx.x.0) * (bx.y.1 - bx.y.0) * (bx.t.1 - bx.t.0);
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let q = bx.sample(&mut stream_rng(seed, i as u64));
            let rv = r_v_operator(spec, &q)?.norm_squared();
            let dv = vertical_derivative_norm2(spec, &q)?;
            let density = metric_at(spec, &q)?.determinant().sqrt();
            Ok((rv + dv) * density * box_volume)
        })
        .collect::<Result<_>>()?;
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(DeviationEstimate {
        value: mean,
        std_error: (var / n as f64).sqrt(),
        n,
    })
}

/// `6g − 6 + 1`.
pub fn moduli_dimension(genus: u32) -> Result<u32> {
    if genus < 2 {
        return Err(Error::domain(format!(
            "genus {genus}: theorem hypothesis χ < 0 violated"
        )));
    }
    Ok(6 * genus - 5)
}
