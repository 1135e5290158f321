//! Deterministic text and CSV output.
//!
//! CSV files have a header row, comma separators, LF line endings and
//! six-decimal fixed-point numbers; row order is fixed.

use std::fmt::Write;

use num_rational::BigRational;

use crate::channel::{ree_oracle, ree_upper_bound, ChannelPoint};
use crate::error::{domain, Result};
use crate::montecarlo::EstimateReport;
use crate::numerics::exact::EXACT_MAX_BLOCK;
use crate::rate::{raw_hashing_rate, PolicyEntry, RateTable, Strategy};
use crate::recurrence::{improved_recurrence_rate, original_two_copy_rate};
use crate::state::SourceState;

/// Tail tolerance for the iterated two-copy curve.
pub const RECURRENCE_TAIL: f64 = 1e-12;

/// Points at which the closed-form REE is checked against the oracle.
pub const REE_CHECK_POINTS: [f64; 4] = [0.2, 0.5, 2.0 / 3.0, 0.9];

/// Allowed closed-form/oracle disagreement.
pub const REE_TOLERANCE: f64 = 1e-4;

/// Six-decimal fixed point, never printing a negative zero.
pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Source parameters, optionally with exact rational values for the exact
/// backend.
#[derive(Clone, Debug)]
pub struct SourceSpec {
    pub source: SourceState,
    pub exact: Option<(BigRational, BigRational)>,
}

impl SourceSpec {
    pub fn float(source: SourceState) -> Self {
        SourceSpec {
            source,
            exact: None,
        }
    }

    fn expected_rate(&self, table: &RateTable, n: usize) -> Result<f64> {
        match &self.exact {
            Some((p, alpha2)) => {
                if n > EXACT_MAX_BLOCK {
                    return domain(format!("exact backend limited to n <= {EXACT_MAX_BLOCK}"));
                }
                table.expected_rate_exact_at(p, alpha2, n)
            }
            None => table.expected_rate_at(&self.source, n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Table1Row {
    pub n: usize,
    pub rate: f64,
    pub bisection_only: f64,
}

/// Rates with and without hashing for `n = 2, 4, ..., max_n`.
pub fn table1_rows(spec: &SourceSpec, max_n: usize, limit: usize) -> Result<Vec<Table1Row>> {
    crate::check_block_size(max_n, limit)?;
    if max_n < 2 {
        return domain("table needs max_n >= 2");
    }
    let full = RateTable::build(max_n, Strategy::HashingAndBisection)?;
    let bisect = RateTable::build(max_n, Strategy::BisectionOnly)?;
    let mut rows = Vec::new();
    let mut n = 2;
    while n <= max_n {
        rows.push(Table1Row {
            n,
            rate: spec.expected_rate(&full, n)?,
            bisection_only: spec.expected_rate(&bisect, n)?,
        });
        n *= 2;
    }
    Ok(rows)
}

pub fn render_table1(rows: &[Table1Row]) -> String {
    let mut out = String::from("n,R,R_prime\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.n, fmt6(r.rate), fmt6(r.bisection_only));
    }
    out
}

/// Where the REE column comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReeSource {
    /// Closed form, validated against the oracle at [`REE_CHECK_POINTS`].
    ClosedForm,
    /// Oracle evaluated at every grid point (validation failed).
    Oracle,
}

/// Result of checking the closed-form REE against the oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct ReeValidation {
    /// `(p, closed form, oracle)` per check point.
    pub checks: Vec<(f64, f64, f64)>,
    pub source: ReeSource,
}

/// Runs the oracle at [`REE_CHECK_POINTS`]. An oracle that fails to converge
/// is an error, never a silent fallback.
pub fn validate_ree() -> Result<ReeValidation> {
    let mut checks = Vec::new();
    for p in REE_CHECK_POINTS {
        checks.push((p, ree_upper_bound(p)?, ree_oracle(p)?.value));
    }
    let agrees = checks
        .iter()
        .all(|(_, c, o)| (c - o).abs() <= REE_TOLERANCE);
    let source = if agrees {
        ReeSource::ClosedForm
    } else {
        ReeSource::Oracle
    };
    Ok(ReeValidation { checks, source })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Figure1Row {
    pub p: f64,
    pub coherent_info: f64,
    pub ree: f64,
    pub bennett_oneshot: f64,
    pub bennett_iterated: f64,
    pub ours: f64,
}

/// The `grid_points` interior points `i / (grid_points + 1)`.
pub fn open_grid(grid_points: usize) -> Vec<f64> {
    (1..=grid_points)
        .map(|i| i as f64 / (grid_points + 1) as f64)
        .collect()
}

/// All comparison curves on an open uniform grid of the Bell-state mixture.
pub fn figure1_rows(n: usize, grid_points: usize, ree: ReeSource) -> Result<Vec<Figure1Row>> {
    if grid_points < 3 {
        return domain("figure grid needs at least 3 points");
    }
    crate::check_block_size(n, crate::MAX_BLOCK)?;
    let table = RateTable::build(n, Strategy::HashingAndBisection)?;
    open_grid(grid_points)
        .into_iter()
        .map(|p| {
            let source = SourceState::symmetric(p)?;
            Ok(Figure1Row {
                p,
                coherent_info: raw_hashing_rate(p)?,
                ree: match ree {
                    ReeSource::ClosedForm => ree_upper_bound(p)?,
                    ReeSource::Oracle => ree_oracle(p)?.value,
                },
                bennett_oneshot: original_two_copy_rate(p)?,
                bennett_iterated: improved_recurrence_rate(p, RECURRENCE_TAIL)?,
                ours: table.expected_rate(&source),
            })
        })
        .collect()
}

pub fn render_figure1(rows: &[Figure1Row]) -> String {
    let mut out = String::from("p,coherent_info,ree,bennett_oneshot,bennett_iterated,ours\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt6(r.p),
            fmt6(r.coherent_info),
            fmt6(r.ree),
            fmt6(r.bennett_oneshot),
            fmt6(r.bennett_iterated),
            fmt6(r.ours)
        );
    }
    out
}

pub fn render_policy(entries: &[PolicyEntry]) -> String {
    let mut out = format!(
        "{:>6} {:>6} {:>6}  {:<9} {:>12}\n",
        "level", "a", "b", "decision", "rate"
    );
    for e in entries {
        let _ = writeln!(
            out,
            "{:>6} {:>6} {:>6}  {:<9} {:>12}",
            e.outcome.n,
            e.outcome.a,
            e.outcome.b,
            e.decision.to_string(),
            fmt6(e.rate)
        );
    }
    out
}

pub fn render_estimate(report: &EstimateReport) -> String {
    format!(
        "mean={} stderr={} trials={} seed={}\n",
        fmt6(report.mean),
        fmt6(report.stderr),
        report.trials,
        report.seed
    )
}

pub fn render_channel_point(point: &ChannelPoint, n: usize) -> String {
    format!(
        "gamma={} n={} best_alpha2={} rate={}\n",
        fmt6(point.gamma),
        n,
        fmt6(point.best_alpha2),
        fmt6(point.rate)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::exact::parse_rational;

    #[test]
    fn six_decimals() {
        assert_eq!(fmt6(0.16638), "0.166380");
        assert_eq!(fmt6(-1e-12), "0.000000");
        assert_eq!(fmt6(1.0), "1.000000");
    }

    #[test]
    fn table_rows_for_two_thirds() {
        let spec = SourceSpec::float(SourceState::symmetric(2.0 / 3.0).unwrap());
        let csv = render_table1(&table1_rows(&spec, 8, 128).unwrap());
        assert_eq!(
            csv,
            "n,R,R_prime\n2,0.111111,0.111111\n4,0.158981,0.158981\n8,0.173419,0.166380\n"
        );
    }

    #[test]
    fn vacuum_table_is_zero() {
        let spec = SourceSpec::float(SourceState::symmetric(0.0).unwrap());
        let csv = render_table1(&table1_rows(&spec, 4, 128).unwrap());
        assert_eq!(
            csv,
            "n,R,R_prime\n2,0.000000,0.000000\n4,0.000000,0.000000\n"
        );
    }

    #[test]
    fn exact_backend_agrees() {
        let p = parse_rational("2/3").unwrap();
        let half = parse_rational("1/2").unwrap();
        let exact = SourceSpec {
            source: SourceState::symmetric(2.0 / 3.0).unwrap(),
            exact: Some((p, half)),
        };
        let float = SourceSpec::float(SourceState::symmetric(2.0 / 3.0).unwrap());
        let a = table1_rows(&exact, 16, 128).unwrap();
        let b = table1_rows(&float, 16, 128).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.rate - y.rate).abs() < 1e-12);
            assert!((x.bisection_only - y.bisection_only).abs() < 1e-12);
        }
        assert!(table1_rows(&exact, 32, 128).is_err());
    }

    #[test]
    fn figure_row_at_two_thirds() {
        let rows = figure1_rows(64, 5, ReeSource::ClosedForm).unwrap();
        let row = rows[3];
        assert!((row.p - 2.0 / 3.0).abs() < 1e-15);
        let csv = render_figure1(&[row]);
        let line = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "0.666667");
        assert_eq!(fields[1], "0.000000");
        assert_eq!(fields[5], "0.175129");
        assert!(figure1_rows(64, 2, ReeSource::ClosedForm).is_err());
    }

    #[test]
    fn grid_is_open() {
        let g = open_grid(19);
        assert_eq!(g.len(), 19);
        assert!((g[0] - 0.05).abs() < 1e-15 && (g[18] - 0.95).abs() < 1e-15);
    }
}
