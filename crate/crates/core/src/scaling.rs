//! Log-log regression and scaling verdicts.
//!
//! Every rate claim in the crate reduces to "this quantity decays at least
//! like eps^s": a sweep collects (eps, value) pairs, an ordinary
//! least-squares fit on log-log axes produces the measured slope, and the
//! verdict compares it one-sidedly against the predicted slope. Faster
//! decay than predicted is compliant.

use std::fmt;

/// Values at or below this are treated as numerically zero in sweeps.
pub const ZERO_FLOOR: f64 = 1e-13;

/// Replacement value for nonpositive entries so the log fit stays defined.
pub const MACHINE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    /// exp(intercept): the prefactor C in value = C * eps^slope.
    pub prefactor: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points_used: usize,
}

/// OLS fit of ln(y) against ln(x); pairs with y <= 0 are skipped.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<LogLogFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let m = logs.len();
    if m < 2 {
        return None;
    }
    let n = m as f64;
    let sx: f64 = logs.iter().map(|(x, _)| x).sum();
    let sy: f64 = logs.iter().map(|(_, y)| y).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss_res: f64 = logs
        .iter()
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let residual = (ss_res / n).sqrt();
    let slope_stderr = if m > 2 {
        let var = ss_res / (n - 2.0);
        (var / (sxx - sx * sx / n)).sqrt()
    } else {
        f64::NAN
    };
    Some(LogLogFit {
        slope,
        prefactor: intercept.exp(),
        slope_stderr,
        residual,
        points_used: m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Fitted slope at least predicted minus tolerance.
    Pass,
    Fail,
    /// Every value was numerically zero; nothing to fit.
    VacuousPass,
    /// Predicted slope is not positive: no decay is guaranteed. Informational.
    Marginal,
}

impl Verdict {
    pub fn failed(&self) -> bool {
        matches!(self, Verdict::Fail)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::VacuousPass => "vacuous-pass",
            Verdict::Marginal => "marginal",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub quantity: String,
    /// Raw sweep table (eps, value), in sweep order.
    pub points: Vec<(f64, f64)>,
    /// Indices of points replaced by [`MACHINE_FLOOR`] before fitting.
    pub floored: Vec<usize>,
    pub fit: Option<LogLogFit>,
    pub predicted_slope: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl ScalingReport {
    pub fn fitted_slope(&self) -> f64 {
        self.fit.map(|f| f.slope).unwrap_or(f64::NAN)
    }

    /// One CSV row per sweep point: `epsilon,quantity,value`.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for (eps, value) in &self.points {
            out.push_str(&format!("{:.12e},{},{:.12e}\n", eps, self.quantity, value));
        }
        out
    }

    /// Compact summary line: measured vs predicted slope and the verdict.
    pub fn summary(&self) -> String {
        match self.fit {
            Some(fit) => format!(
                "{}: fitted_slope={:.4} predicted_slope={:.4} tolerance={:.3} prefactor={:.4e} residual={:.3e} verdict={}",
                self.quantity, fit.slope, self.predicted_slope, self.tolerance,
                fit.prefactor, fit.residual, self.verdict
            ),
            None => format!(
                "{}: all values numerically zero; predicted_slope={:.4} verdict={}",
                self.quantity, self.predicted_slope, self.verdict
            ),
        }
    }
}

/// Check the sweep geometry: at least `needed` points spanning one decade.
pub fn check_sweep_geometry(eps: &[f64], needed: usize) -> crate::Result<()> {
    let span = if eps.is_empty() {
        0.0
    } else {
        let lo = eps.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eps.iter().cloned().fold(0.0f64, f64::max);
        (hi / lo).log10()
    };
    if eps.len() < needed || span < 1.0 - 1e-9 {
        return Err(crate::Error::SweepTooNarrow {
            needed,
            got: eps.len(),
            span,
        });
    }
    Ok(())
}

/// Build a report for a decay claim.
///
/// Nonpositive values are floored at [`MACHINE_FLOOR`] and recorded; a sweep
/// of all-zero values passes vacuously. A predicted slope `<= 0` never
/// fails: the claim guarantees no decay there, so the verdict is marginal.
pub fn build_report(
    quantity: impl Into<String>,
    points: Vec<(f64, f64)>,
    predicted_slope: f64,
    tolerance: f64,
) -> ScalingReport {
    build_inner(quantity, points, predicted_slope, tolerance, false)
}

/// Build a report that grades one-sidedly even for nonpositive predicted
/// slopes (bound claims such as "grows no faster than eps^(alpha-1)").
pub fn build_report_graded(
    quantity: impl Into<String>,
    points: Vec<(f64, f64)>,
    predicted_slope: f64,
    tolerance: f64,
) -> ScalingReport {
    build_inner(quantity, points, predicted_slope, tolerance, true)
}

fn build_inner(
    quantity: impl Into<String>,
    points: Vec<(f64, f64)>,
    predicted_slope: f64,
    tolerance: f64,
    grade_nonpositive: bool,
) -> ScalingReport {
    let quantity = quantity.into();
    let mut floored = Vec::new();
    let mut fit_points = Vec::with_capacity(points.len());
    for (i, &(eps, value)) in points.iter().enumerate() {
        if value > ZERO_FLOOR {
            fit_points.push((eps, value));
        } else {
            floored.push(i);
            fit_points.push((eps, MACHINE_FLOOR));
        }
    }
    let all_zero = floored.len() == points.len();
    let fit = if all_zero {
        None
    } else {
        fit_loglog(
            &fit_points
                .iter()
                .enumerate()
                .filter(|(i, _)| !floored.contains(i))
                .map(|(_, p)| *p)
                .collect::<Vec<_>>(),
        )
    };
    let verdict = if all_zero {
        Verdict::VacuousPass
    } else if predicted_slope <= 0.0 && !grade_nonpositive {
        Verdict::Marginal
    } else {
        match fit {
            Some(f) if f.slope >= predicted_slope - tolerance => Verdict::Pass,
            Some(_) => Verdict::Fail,
            None => Verdict::VacuousPass,
        }
    };
    ScalingReport {
        quantity,
        points,
        floored,
        fit,
        predicted_slope,
        tolerance,
        verdict,
    }
}

/// Run `evaluate` over `eps_list` and grade the decay slope.
pub fn scaling_sweep<F>(
    quantity: impl Into<String>,
    mut evaluate: F,
    eps_list: &[f64],
    predicted_slope: f64,
    tolerance: f64,
) -> crate::Result<ScalingReport>
where
    F: FnMut(f64) -> crate::Result<f64>,
{
    check_sweep_geometry(eps_list, 4)?;
    let mut points = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        points.push((eps, evaluate(eps)?));
    }
    Ok(build_report(quantity, points, predicted_slope, tolerance))
}

/// Geometric epsilon ladder between `lo` and `hi`, inclusive.
pub fn geometric_eps(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| lo * ratio.powi(i as i32)).collect()
}

/// Default sweep ladder for a grid: 8 geometric points from 4 grid
/// spacings up to length/8.
pub fn default_eps_ladder(grid: &crate::grid::Grid) -> Vec<f64> {
    geometric_eps(4.0 * grid.spacing(), grid.length() / 8.0, 8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power_law() {
        let points: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let eps = 0.01 * 2f64.powi(i);
                (eps, 3.0 * eps.powf(1.7))
            })
            .collect();
        let fit = fit_loglog(&points).unwrap();
        assert!((fit.slope - 1.7).abs() < 1e-10);
        assert!((fit.prefactor - 3.0).abs() < 1e-9);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn zero_sweep_is_vacuous() {
        let points = vec![(0.1, 0.0), (0.2, 0.0), (0.4, 1e-16), (0.8, 0.0)];
        let report = build_report("zero-term", points, 1.0, 0.1);
        assert_eq!(report.verdict, Verdict::VacuousPass);
        assert_eq!(report.floored.len(), 4);
    }

    #[test]
    fn nonpositive_prediction_is_marginal() {
        let points = vec![(0.1, 1.0), (0.2, 1.1), (0.4, 0.9), (0.8, 1.05)];
        let report = build_report("threshold-term", points, -0.4, 0.1);
        assert_eq!(report.verdict, Verdict::Marginal);
        assert!(!report.verdict.failed());
        let report0 = build_report("endpoint-term", vec![(0.1, 1.0), (0.8, 1.0)], 0.0, 0.1);
        assert_eq!(report0.verdict, Verdict::Marginal);
    }

    #[test]
    fn one_sided_grading() {
        let fast: Vec<(f64, f64)> = (0..6).map(|i| {
            let eps = 0.02 * 2f64.powi(i);
            (eps, eps.powf(2.5))
        }).collect();
        assert_eq!(build_report("fast", fast, 1.0, 0.1).verdict, Verdict::Pass);
        let slow: Vec<(f64, f64)> = (0..6).map(|i| {
            let eps = 0.02 * 2f64.powi(i);
            (eps, eps.powf(0.5))
        }).collect();
        assert_eq!(build_report("slow", slow, 1.0, 0.1).verdict, Verdict::Fail);
    }

    #[test]
    fn sweep_geometry_enforced() {
        assert!(check_sweep_geometry(&[0.1, 0.2, 0.4, 1.01], 4).is_ok());
        assert!(check_sweep_geometry(&[0.1, 0.2, 0.4], 4).is_err());
        assert!(check_sweep_geometry(&[0.1, 0.2, 0.3, 0.5], 4).is_err());
    }

    #[test]
    fn geometric_ladder_consistent() {
        let eps = geometric_eps(0.05, 0.8, 8);
        assert_eq!(eps.len(), 8);
        assert!((eps[0] - 0.05).abs() < 1e-12);
        assert!((eps[7] - 0.8).abs() < 1e-12);
        let r0 = eps[1] / eps[0];
        for w in eps.windows(2) {
            assert!((w[1] / w[0] - r0).abs() < 1e-9);
        }
    }
}
