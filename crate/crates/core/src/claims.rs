//! The claim ledger: each registered claim is recomputed and compared with
//! its reference value.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::Vector3;

use crate::asymptotics::{busemann_gradient, busemann_hessian, volume_entropy, ProductPoint};
use crate::error::Result;
use crate::geodesic::{integrate_geodesic, PhaseState};
use crate::hyperbolic::{translation_length, vertical_busemann_at, HPoint, MobiusElement};
use crate::invariants::{
    curvature_deviation, disk_tube, epsilon0, mls_length, moduli_dimension, product_spectrum, spectral_gap,
    SigmaSpectrum,
};
use crate::jacobi::{fit_sine_frequency, propagate_jacobi, rauch_check, scan_conjugate, ScanOptions};
use crate::metric::{curvature_at, orthonormal_frame, potential_by_name, ChartPoint, MetricSpec, WarpProfile, T, X};
use crate::report::{fmt_f, fmt_opt, Table};
use crate::riccati::{riccati_average, stable_tensor, AverageOptions, VerticalSampler};
use crate::sampling::SampleBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimStatus {
    Match,
    Mismatch,
    ReportOnly,
}

impl fmt::Display for ClaimStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClaimStatus::Match => "MATCH",
            ClaimStatus::Mismatch => "MISMATCH",
            ClaimStatus::ReportOnly => "REPORT_ONLY",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimRecord {
    pub claim_id: String,
    pub paper_value: Option<f64>,
    pub computed: f64,
    pub tolerance: f64,
    pub status: ClaimStatus,
    pub note: String,
}

impl ClaimRecord {
    /// `MATCH` iff `|computed − paper_value| ≤ tolerance`.
    pub fn checked(id: &str, paper_value: f64, computed: f64, tolerance: f64, note: &str) -> Self {
        let status = if (computed - paper_value).abs() <= tolerance {
            ClaimStatus::Match
        } else {
            ClaimStatus::Mismatch
        };
        Self {
            claim_id: id.into(),
            paper_value: Some(paper_value),
            computed,
            tolerance,
            status,
            note: note.into(),
        }
    }

    pub fn report_only(id: &str, paper_value: Option<f64>, computed: f64, note: &str) -> Self {
        Self {
            claim_id: id.into(),
            paper_value,
            computed,
            tolerance: 0.0,
            status: ClaimStatus::ReportOnly,
            note: note.into(),
        }
    }
}

pub fn claims_table(records: &[ClaimRecord]) -> Table {
    let mut table = Table::new(
        "claims",
        &["claim_id", "paper_value", "computed", "tolerance", "status", "note"],
    );
    for r in records {
        table.push(vec![
            r.claim_id.clone(),
            fmt_opt(r.paper_value),
            fmt_f(r.computed),
            fmt_f(r.tolerance),
            r.status.to_string(),
            r.note.clone(),
        ]);
    }
    table
}

/// Sizes of the sampled claims.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerOptions {
    pub seed: u64,
    pub scan_n: usize,
    pub scan_tmax: f64,
    pub average_n: usize,
    pub deviation_n: usize,
}

impl Default for LedgerOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            scan_n: 24,
            scan_tmax: 50.0,
            average_n: 24,
            deviation_n: 1000,
        }
    }
}

fn example1(records: &mut Vec<ClaimRecord>) -> Result<()> {
    let spec = MetricSpec::product(1.0)?;
    let q = ChartPoint::new(0.3, 1.7, 0.2)?;
    let c = curvature_at(&spec, &q)?;
    let [e1, e2, e3] = orthonormal_frame(&spec, &q)?;
    let ric = c.ricci()?;
    let ric_at = |u: &Vector3<f64>| u.dot(&(ric * u));
    records.push(ClaimRecord::checked(
        "example1_sec_horizontal",
        -1.0,
        c.sectional(&e1, &e2),
        1e-6,
        "Sec(E1, E2) of the product",
    ));
    records.push(ClaimRecord::checked(
        "example1_sec_vertical",
        0.0,
        c.sectional(&e1, &e3).abs().max(c.sectional(&e2, &e3).abs()),
        1e-6,
        "max |Sec(E_i, E3)|",
    ));
    records.push(ClaimRecord::checked(
        "example1_ricci_horizontal",
        -1.0,
        0.5 * (ric_at(&e1) + ric_at(&e2)),
        1e-6,
        "mean of Ric(E1, E1) and Ric(E2, E2)",
    ));
    records.push(ClaimRecord::checked(
        "example1_ricci_vertical",
        0.0,
        ric_at(&e3),
        1e-6,
        "Ric(E3, E3)",
    ));
    Ok(())
}

fn example1_scan(records: &mut Vec<ClaimRecord>, opts: &LedgerOptions) -> Result<()> {
    let spec = MetricSpec::product(1.0)?;
    let bx = SampleBox::new((-1.0, 1.0), (0.5, 2.0), (0.0, 1.0))?;
    let scan = scan_conjugate(
        &spec,
        &bx,
        &ScanOptions {
            n: opts.scan_n,
            seed: opts.seed,
            tmax: opts.scan_tmax,
            step: 1e-3,
        },
    )?;
    let found = scan.iter().filter(|r| r.first_conjugate.is_some()).count();
    records.push(ClaimRecord::checked(
        "example1_no_conjugate_points",
        0.0,
        found as f64,
        0.0,
        &format!("{} random product geodesics", scan.len()),
    ));
    Ok(())
}

fn example2(records: &mut Vec<ClaimRecord>) -> Result<()> {
    let spec = MetricSpec::warped(WarpProfile::new(HPoint::I, 0.1)?);
    let q = ChartPoint::new(0.0, 1.0, 0.0)?;
    let s = PhaseState::normalized(&spec, q, Vector3::new(0.0, 0.0, 1.0))?;
    let traj = integrate_geodesic(&spec, q, s.v, 10.0, 1e-3)?;
    let run = propagate_jacobi(&traj)?;
    let t_star = run.first_conjugate().unwrap_or(f64::NAN);
    records.push(ClaimRecord::checked(
        "example2_conjugate_720",
        7.20,
        t_star,
        0.005 * 7.20,
        "first conjugate point on the central vertical geodesic, eps = 0.1",
    ));
    let values: Vec<f64> = run.a.iter().map(|a| a[(0, 0)]).collect();
    let (omega, _) = fit_sine_frequency(&run.times, &values, 0.1, 1.0)?;
    records.push(ClaimRecord::checked(
        "example2_omega_0436",
        0.436,
        omega,
        0.01 * 0.436,
        "sine fit of the Jacobi block",
    ));
    Ok(())
}

fn example3(records: &mut Vec<ClaimRecord>) -> Result<()> {
    let alpha = 1e-3;
    let spec = MetricSpec::twisted(alpha, potential_by_name("log_y")?)?;
    let c = curvature_at(&spec, &ChartPoint::new(0.0, 1.0, 0.0)?)?;
    records.push(ClaimRecord::checked(
        "example3_twist_rxtxt",
        alpha,
        c.riemann[X][T][X][T],
        0.02 * alpha,
        "R_xtxt at i for alpha = 1e-3, h = log y; an exact twist is locally the product",
    ));
    Ok(())
}

fn busemann_claims(records: &mut Vec<ClaimRecord>) -> Result<()> {
    let p = HPoint::new(0.5, 2.0)?;
    records.push(ClaimRecord::checked(
        "vertical_busemann_log",
        -p.y.ln(),
        vertical_busemann_at(&p, 30.0)?,
        1e-9,
        "d(p, i e^s) - s at s = 30 against -ln y, p = 0.5 + 2i",
    ));
    let x = ProductPoint::new(1.0, 2.0, 3.0)?;
    let g = busemann_gradient(1.0, &x, None)?;
    records.push(ClaimRecord::checked(
        "lemma_gradient_killing",
        -1.0,
        g.fiber_alignment,
        1e-6,
        "d_t b / L for the fiber-ray Busemann function (grad b = -V)",
    ));
    records.push(ClaimRecord::report_only(
        "example6_busemann_sign",
        Some(1.0),
        g.fiber_alignment,
        "stated b = log Im z + t/L gives d_t b = +1/L; the unit-speed fiber ray gives b = -L t",
    ));
    let h = busemann_hessian(1.0, &x, None)?;
    records.push(ClaimRecord::checked(
        "lemma_vanishing_hessian",
        0.0,
        h.horizontal.amax().max(h.vertical.abs()),
        1e-6,
        "largest horizontal or vertical Hessian entry",
    ));
    Ok(())
}

fn riccati_claims(records: &mut Vec<ClaimRecord>, opts: &LedgerOptions) -> Result<()> {
    let spec = MetricSpec::product(1.0)?;
    let bx = SampleBox::new((-1.0, 1.0), (0.5, 2.0), (0.0, 1.0))?;
    let avg = riccati_average(
        &spec,
        &VerticalSampler::Box(bx),
        &AverageOptions {
            n: opts.average_n,
            seed: opts.seed,
            anchor: 20.0,
            step: 1e-2,
        },
    )?;
    records.push(ClaimRecord::checked(
        "lemma_riccati_integral",
        0.0,
        avg.mean,
        1e-8,
        "mean of Tr(U^2 + R_V) over vertical product geodesics",
    ));

    let q = ChartPoint::new(0.0, 1.0, 0.0)?;
    let traj = integrate_geodesic(&spec, q, Vector3::new(0.0, 1.0, 0.0), 40.0, 1e-3)?;
    let st = stable_tensor(&traj, 20.0)?;
    records.push(ClaimRecord::checked(
        "lemma_stable_anchor_convergence",
        0.0,
        st.discrepancy,
        1e-6,
        "U(0) from anchors 20 and 40 along the upward product geodesic",
    ));
    let eig = st.value.symmetric_eigenvalues();
    records.push(ClaimRecord::report_only(
        "riccati_stable_vanishes",
        Some(0.0),
        eig.min(),
        "U_s = 0 holds along vertical geodesics; along a horizontal product geodesic the hyperbolic block is -1",
    ));

    let traj = integrate_geodesic(&spec, q, Vector3::new(0.0, 1.0, 0.0), 10.0, 1e-3)?;
    let rauch = rauch_check(&propagate_jacobi(&traj)?, -1.0)?;
    records.push(ClaimRecord::checked(
        "thm_rauch_equality",
        0.0,
        rauch.max_equality_gap(),
        1e-6,
        "relative gap to the comparison bound, product horizontal geodesic, t <= 10",
    ));
    Ok(())
}

fn spectral_claims(records: &mut Vec<ClaimRecord>) -> Result<()> {
    let sig = SigmaSpectrum::new(vec![0.0, 0.25, 0.9, 1.7])?;
    for l in [PI, TAU, 15.0] {
        let formula = spectral_gap(&sig, l)?;
        let lowest = product_spectrum(&sig, l, 10.0)?
            .iter()
            .map(|e| e.value)
            .find(|v| *v > 0.0)
            .unwrap_or(f64::NAN);
        records.push(ClaimRecord::checked(
            &format!("example8_spectral_gap_L{}", fmt_f((l * 100.0f64).round() / 100.0)),
            formula,
            lowest,
            0.0,
            "lowest positive product eigenvalue against min(lambda1, (2 pi / L)^2)",
        ));
    }
    records.push(ClaimRecord::checked(
        "cor_mls_pythagorean",
        5.0,
        mls_length(3.0, 4, 1.0)?,
        0.0,
        "length of the class (surface length 3, winding 4) at L = 1",
    ));
    let m = MobiusElement::new(2.0, 1.0, 1.0, 1.0)?;
    records.push(ClaimRecord::checked(
        "translation_length_trace3",
        2.0 * 1.5f64.acosh(),
        translation_length(&m)?,
        1e-9,
        "2 arccosh(3/2)",
    ));
    Ok(())
}

fn growth_claims(records: &mut Vec<ClaimRecord>) -> Result<()> {
    let h = volume_entropy(1.0, 30.0)?;
    records.push(ClaimRecord::report_only(
        "thm_volume_entropy_sqrt_neg_chi",
        Some(2f64.sqrt()),
        h.estimate,
        "genus 2 value sqrt(-chi) against the entropy of the curvature -1 base",
    ));
    let tube = disk_tube(1.0, 1.0)?;
    records.push(ClaimRecord::report_only(
        "thm_isoperimetric_disk_tube_r1",
        Some(tube.bound),
        tube.area,
        "boundary area of D_1 x S^1 falls below the stated bound at its volume",
    ));
    Ok(())
}

fn constant_claims(records: &mut Vec<ClaimRecord>, opts: &LedgerOptions) -> Result<()> {
    let (delta, eps0) = epsilon0(2.0, PI, 1.0)?;
    records.push(ClaimRecord::checked(
        "prop_gap_delta",
        1.0,
        delta,
        0.0,
        "lambda1 = 2, L = pi, diam = 1",
    ));
    records.push(ClaimRecord::checked(
        "prop_gap_epsilon0",
        0.125,
        eps0,
        0.0,
        "lambda1 = 2, L = pi, diam = 1",
    ));
    records.push(ClaimRecord::checked(
        "example7_moduli_dim",
        7.0,
        moduli_dimension(2)? as f64,
        0.0,
        "genus 2",
    ));
    let bx = SampleBox::new((-1.0, 1.0), (0.5, 2.0), (0.0, 1.0))?;
    let d = curvature_deviation(&MetricSpec::product(1.0)?, &bx, opts.deviation_n, opts.seed)?;
    records.push(ClaimRecord::checked(
        "thm_integral_curvature_product",
        0.0,
        d.value,
        1e-10,
        "curvature deviation of the product",
    ));
    Ok(())
}

/// Recomputes every registered claim.
pub fn run_ledger(opts: &LedgerOptions) -> Result<Vec<ClaimRecord>> {
    let mut records = Vec::new();
    example1(&mut records)?;
    example1_scan(&mut records, opts)?;
    example2(&mut records)?;
    example3(&mut records)?;
    busemann_claims(&mut records)?;
    riccati_claims(&mut records, opts)?;
    spectral_claims(&mut records)?;
    growth_claims(&mut records)?;
    constant_claims(&mut records, opts)?;
    Ok(records)
}
