//! Quench-time sweeps, power-law fits, and finite-size studies.
//!
//! A sweep evaluates the kink cumulants over a grid of quench times; a
//! log-log least-squares fit then extracts the power-law exponent
//! `κ_q ∝ τ_Q^{-α}`. The distribution comparison places the exact `P(n)`
//! next to its Gaussian approximation, and the finite-size study tracks how
//! the scaling window grows with the system size.

use std::time::Instant;

use serde::Serialize;

use crate::counting::{
    cumulants_exact, cumulants_from_moments, kink_distribution, moments_from_distribution,
    KinkDistribution, Pairing,
};
use crate::dynamics::{mode_probabilities, Method, SolverConfig};
use crate::error::Error;
use crate::ising::{ChainParams, QuenchProtocol};
use crate::sum::CompensatedSum;
use crate::theory::{adiabatic_onset, erf_corrected_cumulants, ScalingTheory};
use crate::Result;

/// One sweep cell: cumulants `κ_1 … κ_qmax` for a `(N, τ_Q, method)` key.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub tau_q: f64,
    pub method: Method,
    pub kappa: Vec<f64>,
    /// Seconds spent computing the row; informational only.
    pub wall_time: f64,
    /// Largest pre-renormalization norm defect over the mode grid (zero for
    /// the Landau-Zener route).
    pub max_norm_defect: f64,
}

/// Sweep rows sorted by `(N, τ_Q)`, unique per `(N, τ_Q, method)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    qmax: usize,
    rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new(qmax: usize) -> Self {
        Self {
            qmax,
            rows: Vec::new(),
        }
    }

    pub fn qmax(&self) -> usize {
        self.qmax
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Insert one row, rejecting duplicate keys and non-finite cumulants.
    pub fn insert(&mut self, row: SweepRow) -> Result<()> {
        if row.kappa.len() != self.qmax {
            return Err(Error::InvalidParameter(format!(
                "row carries {} cumulants, table expects {}",
                row.kappa.len(),
                self.qmax
            )));
        }
        if row.kappa.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite cumulant in row (N={}, tau_q={})",
                row.n, row.tau_q
            )));
        }
        if self
            .rows
            .iter()
            .any(|r| r.n == row.n && r.tau_q == row.tau_q && r.method == row.method)
        {
            return Err(Error::InvalidParameter(format!(
                "duplicate sweep key (N={}, tau_q={}, method={})",
                row.n, row.tau_q, row.method
            )));
        }
        let at = self
            .rows
            .partition_point(|r| (r.n, r.tau_q) <= (row.n, row.tau_q));
        self.rows.insert(at, row);
        Ok(())
    }

    /// Serialize to CSV with 17 significant digits (round-trip safe for
    /// doubles). `comments` are emitted first as `#`-prefixed header lines.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for line in comments {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("N,tau_Q,method");
        for q in 1..=self.qmax {
            out.push_str(&format!(",kappa{q}"));
        }
        out.push_str(",wall_time,max_norm_defect\n");
        for row in &self.rows {
            out.push_str(&format!("{},{:.16e},{}", row.n, row.tau_q, row.method));
            for k in &row.kappa {
                out.push_str(&format!(",{k:.16e}"));
            }
            out.push_str(&format!(
                ",{:.16e},{:.16e}\n",
                row.wall_time, row.max_norm_defect
            ));
        }
        out
    }

    /// Parse a table written by [`SweepTable::to_csv`]. Malformed content is
    /// rejected with its 1-based line number.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut table: Option<SweepTable> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if table.is_none() {
                // Header row.
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() < 5
                    || fields[0] != "N"
                    || fields[1] != "tau_Q"
                    || fields[2] != "method"
                    || fields[fields.len() - 2] != "wall_time"
                    || fields[fields.len() - 1] != "max_norm_defect"
                {
                    return Err(Error::Parse {
                        line: line_no,
                        reason: "expected header N,tau_Q,method,kappa1..,wall_time,max_norm_defect"
                            .into(),
                    });
                }
                let qmax = fields.len() - 5;
                for (q, field) in fields[3..3 + qmax].iter().enumerate() {
                    if *field != format!("kappa{}", q + 1) {
                        return Err(Error::Parse {
                            line: line_no,
                            reason: format!("expected column kappa{}, found {field:?}", q + 1),
                        });
                    }
                }
                table = Some(SweepTable::new(qmax));
                continue;
            }
            let t = table.as_mut().unwrap();
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != t.qmax + 5 {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("expected {} fields, found {}", t.qmax + 5, fields.len()),
                });
            }
            let parse_f64 = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    reason: format!("invalid {what}: {s:?}"),
                })
            };
            let n: usize = fields[0].parse().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("invalid N: {:?}", fields[0]),
            })?;
            let tau_q = parse_f64(fields[1], "tau_Q")?;
            let method: Method = fields[2].parse().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("invalid method: {:?}", fields[2]),
            })?;
            let mut kappa = Vec::with_capacity(t.qmax);
            for (q, field) in fields[3..3 + t.qmax].iter().enumerate() {
                kappa.push(parse_f64(field, &format!("kappa{}", q + 1))?);
            }
            let wall_time = parse_f64(fields[3 + t.qmax], "wall_time")?;
            let max_norm_defect = parse_f64(fields[4 + t.qmax], "max_norm_defect")?;
            t.insert(SweepRow {
                n,
                tau_q,
                method,
                kappa,
                wall_time,
                max_norm_defect,
            })
            .map_err(|e| Error::Parse {
                line: line_no,
                reason: e.to_string(),
            })?;
        }
        table.ok_or_else(|| Error::Parse {
            line: 1,
            reason: "no header row found".into(),
        })
    }
}

/// `count` logarithmically spaced points on `[lo, hi]`, endpoints included.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "log grid needs 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if count < 2 {
        return Err(Error::InvalidParameter(format!(
            "log grid needs >= 2 points, got {count}"
        )));
    }
    let ratio = (hi / lo).ln();
    let mut grid: Vec<f64> = (0..count)
        .map(|i| lo * (ratio * i as f64 / (count - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[count - 1] = hi;
    Ok(grid)
}

/// Compute one sweep row.
pub fn sweep_row(
    params: &ChainParams,
    tau_q: f64,
    method: Method,
    qmax: usize,
    solver: &SolverConfig,
) -> Result<SweepRow> {
    let start = Instant::now();
    let protocol = QuenchProtocol::new(tau_q)?;
    let probs = mode_probabilities(params, &protocol, method, solver)?;
    let report = cumulants_exact(&probs, Pairing::Independent, qmax)?;
    Ok(SweepRow {
        n: params.spins(),
        tau_q,
        method,
        kappa: report.kappas().to_vec(),
        wall_time: start.elapsed().as_secs_f64(),
        max_norm_defect: probs.max_norm_defect(),
    })
}

/// A sweep together with the cells that failed.
#[derive(Debug)]
pub struct SweepOutcome {
    pub table: SweepTable,
    pub failures: Vec<(f64, Error)>,
}

/// Evaluate the cumulants over a grid of quench times. Failed cells are
/// recorded and the sweep continues.
pub fn sweep(
    params: &ChainParams,
    tau_list: &[f64],
    method: Method,
    qmax: usize,
    solver: &SolverConfig,
) -> Result<SweepOutcome> {
    if tau_list.is_empty() {
        return Err(Error::InvalidParameter("empty quench-time list".into()));
    }
    let mut table = SweepTable::new(qmax);
    let mut failures = Vec::new();
    for &tau_q in tau_list {
        match sweep_row(params, tau_q, method, qmax, solver) {
            Ok(row) => table.insert(row)?,
            Err(e) => failures.push((tau_q, e)),
        }
    }
    Ok(SweepOutcome { table, failures })
}

/// Result of an ordinary least-squares fit of `log κ_q` against `log τ_Q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Cumulant order that was fitted.
    pub q: usize,
    /// Power-law exponent, `κ_q ∝ τ_Q^{-alpha}`.
    pub alpha: f64,
    /// Prefactor `A` in `κ_q = A τ_Q^{-alpha}`.
    pub amplitude: f64,
    /// Coefficient of determination of the log-log fit.
    pub r_squared: f64,
    /// Quench-time window actually used.
    pub tau_range: (f64, f64),
    /// Rows entering the fit.
    pub n_points: usize,
    /// Rows inside the window rejected because `κ_q ≤ 0` (high cumulants
    /// change sign near regime boundaries; they are excluded, never folded
    /// in by absolute value).
    pub n_excluded: usize,
}

/// Fit `κ_q ∝ τ_Q^{-α}` on log-log axes over `tau_range` (whole table when
/// `None`). At least five usable rows are required.
pub fn fit_power_law(
    table: &SweepTable,
    q: usize,
    tau_range: Option<(f64, f64)>,
) -> Result<FitResult> {
    if q < 1 || q > table.qmax() {
        return Err(Error::InvalidParameter(format!(
            "cumulant order {q} outside table range 1..={}",
            table.qmax()
        )));
    }
    let mut points = Vec::new();
    let mut excluded = 0usize;
    for row in table.rows() {
        if let Some((lo, hi)) = tau_range {
            if row.tau_q < lo || row.tau_q > hi {
                continue;
            }
        }
        let kappa = row.kappa[q - 1];
        if kappa > 0.0 {
            points.push((row.tau_q.ln(), kappa.ln(), row.tau_q));
        } else {
            excluded += 1;
        }
    }
    if points.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs >= 5 positive rows, found {} ({} excluded)",
            points.len(),
            excluded
        )));
    }

    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y, _) in &points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "degenerate abscissas in power-law fit".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    for (x, y, _) in &points {
        let r = y - (intercept + slope * x);
        ss_res += r * r;
    }
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };

    let lo = points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult {
        q,
        alpha: -slope,
        amplitude: intercept.exp(),
        r_squared,
        tau_range: (lo, hi),
        n_points: points.len(),
        n_excluded: excluded,
    })
}

/// Where a quench time sits relative to the adiabatic onset
/// `τ_Q* = ħN²/(8π²J)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Scaling window: the closed forms apply.
    Scaling,
    /// Predicted mean below two kinks (`τ_Q > τ_Q*/4`): the normal
    /// approximation becomes unreliable.
    NearOnset,
    /// Past the onset (`⟨n⟩ ≤ 1`): adiabatic dynamics, no power law.
    Adiabatic,
}

impl Regime {
    pub fn warning(&self) -> Option<&'static str> {
        match self {
            Regime::Scaling => None,
            Regime::NearOnset => Some("near adiabatic onset: normal approximation unreliable"),
            Regime::Adiabatic => Some("adiabatic regime: scaling forms do not apply"),
        }
    }
}

/// Classify a quench time against the onset threshold of the chain.
pub fn regime(params: &ChainParams, tau_q: f64) -> Regime {
    let onset = adiabatic_onset(params);
    if tau_q >= onset {
        Regime::Adiabatic
    } else if tau_q > 0.25 * onset {
        Regime::NearOnset
    } else {
        Regime::Scaling
    }
}

/// Exact distribution next to its Gaussian approximation.
#[derive(Debug, Clone)]
pub struct DistributionComparison {
    /// Exact kink distribution.
    pub exact: KinkDistribution,
    /// Gaussian `N(Nd, 3Nd/π²)` sampled at integers and renormalized over
    /// the same support.
    pub normal: Vec<f64>,
    /// Total variation distance `Σ_n |P(n) - Q(n)|`.
    pub tv_distance: f64,
    /// First two cumulants of the exact distribution (moment route).
    pub kappa1: f64,
    pub kappa2: f64,
    pub regime: Regime,
    /// Set when the exact distribution collapsed to a point mass, where the
    /// Gaussian comparison carries no information.
    pub degenerate: bool,
}

/// Compare a readily computed distribution against the scaling-theory
/// Gaussian.
pub fn compare_distribution_parts(
    dist: KinkDistribution,
    theory: &ScalingTheory,
) -> Result<DistributionComparison> {
    let n_max = dist.probabilities().len() - 1;
    let normal = theory.normal_approximation().pmf_grid(n_max);
    let mut tv = CompensatedSum::new();
    for (p, q) in dist.probabilities().iter().zip(&normal) {
        tv.add((p - q).abs());
    }
    let moments = moments_from_distribution(&dist, 2)?;
    let report = cumulants_from_moments(&moments);
    let degenerate = dist.probabilities().iter().any(|&p| p > 1.0 - 1e-12);
    Ok(DistributionComparison {
        exact: dist,
        normal,
        tv_distance: tv.value(),
        kappa1: report.kappa(1),
        kappa2: report.kappa(2),
        regime: regime(theory.params(), theory.tau_q()),
        degenerate,
    })
}

/// Compute the exact kink distribution for `(params, protocol, method)` and
/// compare it against the Gaussian approximation.
pub fn compare_distribution(
    params: &ChainParams,
    protocol: &QuenchProtocol,
    method: Method,
    pairing: Pairing,
    solver: &SolverConfig,
) -> Result<DistributionComparison> {
    let probs = mode_probabilities(params, protocol, method, solver)?;
    let dist = kink_distribution(&probs, pairing)?;
    let theory = ScalingTheory::new(*params, protocol.tau_q())?;
    compare_distribution_parts(dist, &theory)
}

/// Largest quench time of the contiguous block, at the slow end of the
/// table, where `κ_1` deviates from the erf-corrected theory by more than
/// `threshold` (relative). Returns the first quench time of that block, i.e.
/// where the power law breaks down; `None` when the table never leaves the
/// scaling window (or never enters it).
pub fn scaling_breakdown(table: &SweepTable, params: &ChainParams, threshold: f64) -> Option<f64> {
    let rows: Vec<&SweepRow> = table
        .rows()
        .iter()
        .filter(|r| r.n == params.spins())
        .collect();
    if rows.is_empty() {
        return None;
    }
    let deviation = |row: &SweepRow| -> f64 {
        let (k1_theory, _) = erf_corrected_cumulants(params, row.tau_q);
        if k1_theory == 0.0 {
            return f64::INFINITY;
        }
        (row.kappa[0] / k1_theory - 1.0).abs()
    };
    let mut idx = rows.len();
    while idx > 0 && deviation(rows[idx - 1]) > threshold {
        idx -= 1;
    }
    if idx == rows.len() || idx == 0 {
        None
    } else {
        Some(rows[idx].tau_q)
    }
}

/// One system size within a finite-size study.
#[derive(Debug)]
pub struct FiniteSizeEntry {
    pub n: usize,
    pub table: SweepTable,
    pub fits: Vec<FitResult>,
    /// Onset of the slow-quench power-law breakdown, when the grid reaches
    /// it.
    pub breakdown: Option<f64>,
}

/// Sweep several system sizes over the same quench-time grid.
///
/// `fit_range` selects the window for per-size power-law fits (orders
/// `1..=qmax`); without it no fits are attempted. The breakdown detector
/// compares `κ_1` against the erf-corrected theory at a 5% relative
/// threshold.
pub fn finite_size_study(
    n_list: &[usize],
    j: f64,
    hbar: f64,
    tau_list: &[f64],
    method: Method,
    qmax: usize,
    solver: &SolverConfig,
    fit_range: Option<(f64, f64)>,
) -> Result<Vec<FiniteSizeEntry>> {
    let mut entries = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let params = ChainParams::new(n, j, hbar)?;
        let outcome = sweep(&params, tau_list, method, qmax, solver)?;
        if let Some((tau, err)) = outcome.failures.into_iter().next() {
            return Err(Error::NumericalFault(format!(
                "sweep cell (N={n}, tau_q={tau}) failed: {err}"
            )));
        }
        let fits = match fit_range {
            Some(range) => (1..=qmax)
                .map(|q| fit_power_law(&outcome.table, q, Some(range)))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let breakdown = scaling_breakdown(&outcome.table, &params, 0.05);
        entries.push(FiniteSizeEntry {
            n,
            table: outcome.table,
            fits,
            breakdown,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ModeProbabilities;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn synthetic_table(scale: f64) -> SweepTable {
        // κ_1 = scale · τ^{-1/2} exactly, κ_2 mixes in a sign flip.
        let mut table = SweepTable::new(2);
        for i in 0..12 {
            let tau = 2.0_f64 * 1.5_f64.powi(i);
            table
                .insert(SweepRow {
                    n: 400,
                    tau_q: tau,
                    method: Method::Lz,
                    kappa: vec![scale * tau.powf(-0.5), if i < 6 { 1.0 } else { -1.0 }],
                    wall_time: 0.0,
                    max_norm_defect: 0.0,
                })
                .unwrap();
        }
        table
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let table = synthetic_table(3.7);
        let fit = fit_power_law(&table, 1, None).unwrap();
        assert!(close(fit.alpha, 0.5, 1e-12), "alpha = {}", fit.alpha);
        assert!(close(fit.r_squared, 1.0, 1e-12));
        assert!(close(fit.amplitude, 3.7, 1e-10));
        assert_eq!(fit.n_points, 12);
        assert_eq!(fit.n_excluded, 0);
    }

    #[test]
    fn fit_is_scale_equivariant() {
        let a = fit_power_law(&synthetic_table(1.0), 1, None).unwrap();
        let b = fit_power_law(&synthetic_table(123.456), 1, None).unwrap();
        assert!(close(a.alpha, b.alpha, 1e-12));
        assert!(close(a.r_squared, b.r_squared, 1e-12));
        assert!(close(b.amplitude / a.amplitude, 123.456, 1e-9));
    }

    #[test]
    fn fit_excludes_nonpositive_rows() {
        let table = synthetic_table(1.0);
        let fit = fit_power_law(&table, 2, None).unwrap();
        assert_eq!(fit.n_points, 6);
        assert_eq!(fit.n_excluded, 6);
    }

    #[test]
    fn fit_rejects_insufficient_points() {
        let mut table = SweepTable::new(1);
        table
            .insert(SweepRow {
                n: 400,
                tau_q: 100.0,
                method: Method::Lz,
                kappa: vec![1.0],
                wall_time: 0.0,
                max_norm_defect: 0.0,
            })
            .unwrap();
        assert!(matches!(
            fit_power_law(&table, 1, None),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn fit_honors_tau_range() {
        let table = synthetic_table(1.0);
        let fit = fit_power_law(&table, 1, Some((2.0, 40.0))).unwrap();
        assert!(fit.tau_range.0 >= 2.0 && fit.tau_range.1 <= 40.0);
        assert!(fit.n_points < 12);
        assert!(close(fit.alpha, 0.5, 1e-12));
    }

    #[test]
    fn table_rejects_duplicates_but_keys_methods_separately() {
        let mut table = SweepTable::new(1);
        let row = |method: Method| SweepRow {
            n: 400,
            tau_q: 10.0,
            method,
            kappa: vec![1.0],
            wall_time: 0.0,
            max_norm_defect: 0.0,
        };
        table.insert(row(Method::Lz)).unwrap();
        table.insert(row(Method::Ode)).unwrap();
        assert!(table.insert(row(Method::Lz)).is_err());
        assert_eq!(table.rows().len(), 2);
    }

    #[test]
    fn table_rejects_nonfinite() {
        let mut table = SweepTable::new(1);
        let bad = SweepRow {
            n: 4,
            tau_q: 1.0,
            method: Method::Lz,
            kappa: vec![f64::NAN],
            wall_time: 0.0,
            max_norm_defect: 0.0,
        };
        assert!(table.insert(bad).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let params = ChainParams::with_spins(64).unwrap();
        let taus = log_spaced(0.7, 300.0, 7).unwrap();
        let outcome = sweep(&params, &taus, Method::Lz, 3, &SolverConfig::default()).unwrap();
        let text = outcome.table.to_csv(&["config: test".into()]);
        let parsed = SweepTable::from_csv(&text).unwrap();
        assert_eq!(parsed.qmax(), 3);
        assert_eq!(parsed.rows().len(), outcome.table.rows().len());
        for (a, b) in outcome.table.rows().iter().zip(parsed.rows()) {
            assert_eq!(a.n, b.n);
            assert_eq!(a.tau_q.to_bits(), b.tau_q.to_bits());
            assert_eq!(a.method, b.method);
            for (x, y) in a.kappa.iter().zip(&b.kappa) {
                assert_eq!(x.to_bits(), y.to_bits(), "cumulant bits differ");
            }
            assert_eq!(a.wall_time.to_bits(), b.wall_time.to_bits());
        }
    }

    #[test]
    fn csv_parse_errors_carry_line_numbers() {
        let text = "# comment\nN,tau_Q,method,kappa1,wall_time,max_norm_defect\n400,1.0,lz,2.0,0.0,0.0\n400,oops,lz,2.0,0.0,0.0\n";
        match SweepTable::from_csv(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(SweepTable::from_csv("").is_err());
        match SweepTable::from_csv("a,b\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected header error, got {other:?}"),
        }
    }

    #[test]
    fn log_grid_endpoints_and_monotonicity() {
        let grid = log_spaced(2.0, 200.0, 25).unwrap();
        assert_eq!(grid.len(), 25);
        assert_eq!(grid[0], 2.0);
        assert_eq!(grid[24], 200.0);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!(log_spaced(0.0, 1.0, 5).is_err());
        assert!(log_spaced(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn lz_sweep_row_matches_erf_theory() {
        let params = ChainParams::with_spins(400).unwrap();
        let row = sweep_row(&params, 100.0, Method::Lz, 1, &SolverConfig::default()).unwrap();
        let (k1_theory, _) = erf_corrected_cumulants(&params, 100.0);
        assert!(
            (row.kappa[0] - k1_theory).abs() < 1e-10,
            "kappa1 = {}, theory = {}",
            row.kappa[0],
            k1_theory
        );
    }

    #[test]
    fn sweep_extensivity_in_scaling_regime() {
        let solver = SolverConfig::default();
        let small = sweep_row(
            &ChainParams::with_spins(400).unwrap(),
            50.0,
            Method::Lz,
            1,
            &solver,
        )
        .unwrap();
        let large = sweep_row(
            &ChainParams::with_spins(800).unwrap(),
            50.0,
            Method::Lz,
            1,
            &solver,
        )
        .unwrap();
        let ratio = large.kappa[0] / small.kappa[0];
        assert!((ratio / 2.0 - 1.0).abs() < 1e-6, "ratio = {ratio}");
    }

    #[test]
    fn methods_diverge_at_fast_quench() {
        // The Landau-Zener formula is asymptotic in τ_Q k²; at τ_Q well
        // below one it no longer describes the exact dynamics.
        let params = ChainParams::with_spins(64).unwrap();
        let solver = SolverConfig::default();
        let lz = sweep_row(&params, 0.5, Method::Lz, 1, &solver).unwrap();
        let ode = sweep_row(&params, 0.5, Method::Ode, 1, &solver).unwrap();
        let rel = (ode.kappa[0] / lz.kappa[0] - 1.0).abs();
        assert!(
            rel > 0.02,
            "expected >2% divergence at tau_Q=0.5, got {rel:.4}"
        );
    }

    #[test]
    fn pure_scaling_exponent_at_large_n() {
        // With 10⁴ spins the whole window τ_Q ∈ [10, 10³] sits deep in the
        // scaling regime and the Landau-Zener mean follows τ_Q^{-1/2}.
        let params = ChainParams::with_spins(10_000).unwrap();
        let taus = log_spaced(10.0, 1e3, 12).unwrap();
        let outcome = sweep(&params, &taus, Method::Lz, 1, &SolverConfig::default()).unwrap();
        let fit = fit_power_law(&outcome.table, 1, None).unwrap();
        assert!((fit.alpha - 0.5).abs() <= 0.005, "alpha = {}", fit.alpha);
    }

    #[test]
    fn regime_classification() {
        let params = ChainParams::with_spins(400).unwrap();
        // Onset ≈ 2026.4.
        assert_eq!(regime(&params, 100.0), Regime::Scaling);
        assert_eq!(regime(&params, 1000.0), Regime::NearOnset);
        assert_eq!(regime(&params, 2500.0), Regime::Adiabatic);
        assert!(regime(&params, 1000.0).warning().is_some());
        assert!(regime(&params, 100.0).warning().is_none());
    }

    #[test]
    fn comparison_in_scaling_regime_is_close_to_normal() {
        let params = ChainParams::with_spins(400).unwrap();
        let protocol = QuenchProtocol::new(100.0).unwrap();
        let cmp = compare_distribution(
            &params,
            &protocol,
            Method::Lz,
            Pairing::Independent,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(cmp.regime, Regime::Scaling);
        assert!(!cmp.degenerate);
        assert!(cmp.tv_distance < 0.1, "tv = {}", cmp.tv_distance);
        assert!(close(cmp.kappa1, 4.5016, 1e-2));
        assert!(cmp.kappa2 < cmp.kappa1);
    }

    #[test]
    fn comparison_flags_degenerate_point_mass() {
        // All-zero probabilities at a quench time whose theory mean is ~4.5:
        // the exact distribution is a point mass at zero and the Gaussian
        // comparison is meaningless.
        let params = ChainParams::with_spins(400).unwrap();
        let probs =
            ModeProbabilities::from_probabilities(params, 100.0, Method::Lz, vec![0.0; 200])
                .unwrap();
        let dist = kink_distribution(&probs, Pairing::Independent).unwrap();
        let theory = ScalingTheory::new(params, 100.0).unwrap();
        let cmp = compare_distribution_parts(dist, &theory).unwrap();
        assert!(cmp.degenerate);
        assert!(cmp.tv_distance > 0.9, "tv = {}", cmp.tv_distance);
        assert!(close(cmp.kappa1, 0.0, 1e-12));
    }

    #[test]
    fn breakdown_tracks_onset_within_factor_two() {
        let params = ChainParams::with_spins(100).unwrap();
        let onset = adiabatic_onset(&params); // ≈ 126.7
        let taus = log_spaced(1.0, 4.0 * onset, 60).unwrap();
        let outcome = sweep(&params, &taus, Method::Lz, 1, &SolverConfig::default()).unwrap();
        let breakdown =
            scaling_breakdown(&outcome.table, &params, 0.05).expect("grid reaches past the onset");
        assert!(
            breakdown > 0.5 * onset && breakdown < 2.0 * onset,
            "breakdown = {breakdown}, onset = {onset}"
        );
    }

    #[test]
    fn finite_size_breakdown_moves_right() {
        let taus = log_spaced(1.0, 3000.0, 50).unwrap();
        let entries = finite_size_study(
            &[100, 200],
            1.0,
            1.0,
            &taus,
            Method::Lz,
            1,
            &SolverConfig::default(),
            None,
        )
        .unwrap();
        let b100 = entries[0]
            .breakdown
            .expect("N=100 breakdown inside the grid");
        let b200 = entries[1]
            .breakdown
            .expect("N=200 breakdown inside the grid");
        assert!(b100 < b200, "breakdowns: {b100} vs {b200}");
    }
}
