//! Monte Carlo study harness and historical backtest pipeline.
//!
//! [`run_study`] sweeps (parameters × sample size × method) cells, repeats
//! each one, and reports cross-replication means and 2.5%/97.5% bounds next
//! to the exact values. [`historical_backtest`] walks an expanding window
//! over a return series, estimating the risk measures of the negated
//! returns for each day from everything strictly before it. Both emit flat
//! delimiter-separated tables.

use std::fmt;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::distributions::{BaselineModel, Family, Seed};
use crate::estimators::{
    empirical_quantile, estimate_bmh, estimate_ipbmh, estimate_mh, EstimError, MethodId,
    RiskEstimate,
};
use crate::mcmc::ChainConfig;
use crate::numfmt::{sig7, sig7_opt};
use crate::risk;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid study grid: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Estim(#[from] EstimError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Which risk measure a result row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Var,
    Cvar,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Var => "var",
            Measure::Cvar => "cvar",
        })
    }
}

/// Full specification of a simulation study for one family.
#[derive(Debug, Clone)]
pub struct StudyGrid {
    pub family: Family,
    /// Parameter vectors to sweep (one entry per grid point).
    pub params: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub p: f64,
    pub p_u: f64,
    pub methods: Vec<MethodId>,
    /// Chain settings template; per-task seeds are derived from `seed`.
    pub chain: ChainConfig,
    pub seed: u64,
}

impl StudyGrid {
    /// The study defaults: scale parameters 2^j for j = −2…2 (crossed with
    /// the same grid of rates for Gamma), sizes 2^5…2^10, 100 replications,
    /// p = 0.95, p_u = 0.9, all three methods.
    pub fn defaults(family: Family) -> StudyGrid {
        let two_pows: Vec<f64> = (-2..=2).map(|j| 2.0_f64.powi(j)).collect();
        let params: Vec<Vec<f64>> = match family {
            Family::Exponential => two_pows.iter().map(|&l| vec![l]).collect(),
            Family::Gamma => two_pows
                .iter()
                .flat_map(|&a| two_pows.iter().map(move |&b| vec![a, b]))
                .collect(),
            // Location is irrelevant to the tail estimates; fixed at 0.
            Family::Normal | Family::Cauchy => two_pows.iter().map(|&s| vec![0.0, s]).collect(),
        };
        StudyGrid {
            family,
            params,
            sizes: (5..=10).map(|i| 1 << i).collect(),
            replications: 100,
            p: 0.95,
            p_u: 0.9,
            methods: vec![MethodId::Mh, MethodId::Bmh, MethodId::Ipbmh],
            chain: ChainConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.params.is_empty() || self.sizes.is_empty() || self.methods.is_empty() {
            return Err(HarnessError::Config(
                "parameter grid, sizes and methods must all be non-empty".into(),
            ));
        }
        if self.replications == 0 {
            return Err(HarnessError::Config("need at least 1 replication".into()));
        }
        if !(self.p_u > 0.0 && self.p_u < 1.0 && self.p > self.p_u && self.p < 1.0) {
            return Err(HarnessError::Config(format!(
                "need 0 < p_u < p < 1, got p = {}, p_u = {}",
                self.p, self.p_u
            )));
        }
        let min_n = (1.0 / (1.0 - self.p_u)).ceil() as usize;
        if let Some(&n) = self.sizes.iter().find(|&&n| n < min_n) {
            return Err(HarnessError::Config(format!(
                "size {n} is below the minimum {min_n} for p_u = {}",
                self.p_u
            )));
        }
        for params in &self.params {
            BaselineModel::from_params(self.family, params)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }
}

/// One aggregated row of the study output.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyCell {
    pub family: Family,
    pub params: Vec<f64>,
    pub n: usize,
    pub method: MethodId,
    pub measure: Measure,
    pub mean: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub true_value: Option<f64>,
    pub fail_count: usize,
    /// Mean width of the per-run posterior 2.5%/97.5% interval across the
    /// successful replications (not part of the output table, which carries
    /// the cross-replication quantiles).
    pub mean_width: Option<f64>,
}

/// Exact (VaR, CVaR) of a parameterized family; CVaR is `None` where the
/// tail mean does not exist (Cauchy).
pub fn true_measures(family: Family, params: &[f64], p: f64) -> (f64, Option<f64>) {
    match family {
        Family::Exponential => {
            let r = risk::risk_exponential(params[0], p);
            (r.var, r.cvar)
        }
        Family::Gamma => {
            let model = BaselineModel::gamma(params[0], params[1]).expect("validated grid");
            let var = model.quantile(p).expect("p validated");
            (var, Some(risk::cvar_gamma(params[0], params[1], p)))
        }
        Family::Normal => {
            let r = risk::risk_normal(params[0], params[1], p);
            (r.var, r.cvar)
        }
        Family::Cauchy => (risk::var_cauchy(params[0], params[1], p), None),
    }
}

struct RepOutcome {
    var_point: Option<f64>,
    var_width: Option<f64>,
    cvar_point: Option<f64>,
    cvar_width: Option<f64>,
    failed: bool,
}

/// Run the full study grid: every (params, n, method) cell is replicated
/// `replications` times on fresh samples, and summarized by the mean and
/// the 2.5%/97.5% cross-replication quantiles of the per-run point
/// estimates.
///
/// Samples are shared across methods within a replication (paired
/// comparisons); all seeds derive from `grid.seed`, so the output is
/// byte-identical across reruns and independent of scheduling.
pub fn run_study(grid: &StudyGrid) -> Result<Vec<StudyCell>, HarnessError> {
    grid.validate()?;
    let base = Seed(grid.seed);
    let mut tasks = Vec::new();
    for pi in 0..grid.params.len() {
        for si in 0..grid.sizes.len() {
            for rep in 0..grid.replications {
                tasks.push((pi, si, rep));
            }
        }
    }

    let outcomes: Vec<Vec<RepOutcome>> = tasks
        .par_iter()
        .map(|&(pi, si, rep)| {
            let task_id = ((pi * grid.sizes.len()) + si) * grid.replications + rep;
            let task_seed = base.derive(task_id as u64);
            let model = BaselineModel::from_params(grid.family, &grid.params[pi])
                .expect("validated grid");
            let sample = model.sample(grid.sizes[si], task_seed.derive(0));
            grid.methods
                .iter()
                .enumerate()
                .map(|(mi, &method)| {
                    let cfg = grid.chain.reseeded(task_seed.derive(1 + mi as u64));
                    let result = match method {
                        MethodId::Mh => estimate_mh(&sample, grid.p, grid.p_u, &cfg),
                        MethodId::Bmh => {
                            estimate_bmh(&sample, grid.family, grid.p, grid.p_u, &cfg)
                        }
                        MethodId::Ipbmh => {
                            estimate_ipbmh(&sample, grid.family, grid.p, grid.p_u, &cfg)
                        }
                    };
                    match result {
                        Ok(est) => RepOutcome {
                            var_point: Some(est.var_point),
                            var_width: Some(est.var_hi - est.var_lo),
                            cvar_point: est.cvar_point,
                            cvar_width: est.cvar_hi.zip(est.cvar_lo).map(|(h, l)| h - l),
                            failed: false,
                        },
                        Err(_) => RepOutcome {
                            var_point: None,
                            var_width: None,
                            cvar_point: None,
                            cvar_width: None,
                            failed: true,
                        },
                    }
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::new();
    for pi in 0..grid.params.len() {
        let (true_var, true_cvar) = true_measures(grid.family, &grid.params[pi], grid.p);
        for si in 0..grid.sizes.len() {
            for (mi, &method) in grid.methods.iter().enumerate() {
                let mut vars = Vec::new();
                let mut cvars = Vec::new();
                let mut var_widths = Vec::new();
                let mut cvar_widths = Vec::new();
                let mut fail_count = 0;
                for rep in 0..grid.replications {
                    let task_id = ((pi * grid.sizes.len()) + si) * grid.replications + rep;
                    let outcome = &outcomes[task_id][mi];
                    if outcome.failed {
                        fail_count += 1;
                    }
                    if let Some(v) = outcome.var_point {
                        vars.push(v);
                    }
                    if let Some(c) = outcome.cvar_point {
                        cvars.push(c);
                    }
                    if let Some(w) = outcome.var_width {
                        var_widths.push(w);
                    }
                    if let Some(w) = outcome.cvar_width {
                        cvar_widths.push(w);
                    }
                }
                if fail_count * 20 > grid.replications {
                    log::warn!(
                        "study cell {} params {:?} n {} {}: {fail_count}/{} replications failed",
                        grid.family,
                        grid.params[pi],
                        grid.sizes[si],
                        method,
                        grid.replications
                    );
                }
                let (vm, vl, vh) = across_rep_summary(&mut vars);
                let (cm, cl, ch) = across_rep_summary(&mut cvars);
                let mean_of = |w: &[f64]| {
                    (!w.is_empty()).then(|| w.iter().sum::<f64>() / w.len() as f64)
                };
                cells.push(StudyCell {
                    family: grid.family,
                    params: grid.params[pi].clone(),
                    n: grid.sizes[si],
                    method,
                    measure: Measure::Var,
                    mean: vm,
                    lo: vl,
                    hi: vh,
                    true_value: Some(true_var),
                    fail_count,
                    mean_width: mean_of(&var_widths),
                });
                cells.push(StudyCell {
                    family: grid.family,
                    params: grid.params[pi].clone(),
                    n: grid.sizes[si],
                    method,
                    measure: Measure::Cvar,
                    mean: cm,
                    lo: cl,
                    hi: ch,
                    true_value: true_cvar,
                    fail_count,
                    mean_width: mean_of(&cvar_widths),
                });
            }
        }
    }
    Ok(cells)
}

fn across_rep_summary(points: &mut [f64]) -> (Option<f64>, Option<f64>, Option<f64>) {
    if points.is_empty() {
        return (None, None, None);
    }
    let mean = points.iter().sum::<f64>() / points.len() as f64;
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    let lo = empirical_quantile(points, 0.025);
    let hi = empirical_quantile(points, 0.975);
    (Some(mean), Some(lo), Some(hi))
}

/// Render study cells as the flat result table.
pub fn study_csv(cells: &[StudyCell]) -> String {
    let mut out = String::from("family,params,n,method,measure,mean,lo2.5,hi97.5,true,fail_count\n");
    for c in cells {
        let params = c
            .params
            .iter()
            .map(|v| sig7(*v))
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            c.family,
            params,
            c.n,
            c.method,
            c.measure,
            sig7_opt(c.mean),
            sig7_opt(c.lo),
            sig7_opt(c.hi),
            sig7_opt(c.true_value),
            c.fail_count
        ));
    }
    out
}

pub fn write_study_csv(cells: &[StudyCell], path: &Path) -> Result<(), HarnessError> {
    fs::write(path, study_csv(cells)).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A price path with its log returns R_t = ln(P_t / P_{t−1}).
///
/// `dates`, when present, aligns with `prices`; return t (0-based) belongs
/// to date index t + 1. `percent` records whether returns are scaled by
/// 100.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub dates: Option<Vec<NaiveDate>>,
    pub prices: Vec<f64>,
    pub returns: Vec<f64>,
    pub percent: bool,
}

impl ReturnSeries {
    pub fn from_prices(
        dates: Option<Vec<NaiveDate>>,
        prices: Vec<f64>,
        percent: bool,
    ) -> Result<Self, HarnessError> {
        if prices.len() < 2 {
            return Err(HarnessError::Data(format!(
                "need at least 2 prices, got {}",
                prices.len()
            )));
        }
        if let Some(dates) = &dates {
            if dates.len() != prices.len() {
                return Err(HarnessError::Data(format!(
                    "{} dates for {} prices",
                    dates.len(),
                    prices.len()
                )));
            }
        }
        if let Some(row) = prices.iter().position(|&p| !(p > 0.0)) {
            return Err(HarnessError::Data(format!(
                "price at row {} is not strictly positive: {}",
                row + 1,
                prices[row]
            )));
        }
        let scale = if percent { 100.0 } else { 1.0 };
        let returns = prices
            .windows(2)
            .map(|w| scale * (w[1] / w[0]).ln())
            .collect();
        Ok(ReturnSeries {
            dates,
            prices,
            returns,
            percent,
        })
    }
}

/// Log returns of a plain price vector (fraction scale, no dates).
pub fn log_returns(prices: &[f64]) -> Result<ReturnSeries, HarnessError> {
    ReturnSeries::from_prices(None, prices.to_vec(), false)
}

/// One output row of the backtest: `method` is a method name or `real` for
/// the full-sample closed-form reference.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestRow {
    pub date: NaiveDate,
    pub method: String,
    pub measure: Measure,
    pub estimate: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

/// Expanding-window historical backtest.
///
/// For every day t past the warmup, each method runs on the negated
/// returns −R_1 … −R_{t−1} (losses); the resulting upper-tail measures are
/// re-negated so the output matches the return convention (a 5% VaR of
/// returns is the negated 95% VaR of losses). BMH and IPBMH model the
/// returns as normal. `real` rows carry the closed-form measures of a
/// normal fit to the *entire* series, as a constant reference line.
pub fn historical_backtest(
    series: &ReturnSeries,
    p: f64,
    p_u: f64,
    methods: &[MethodId],
    warmup: usize,
    cfg: &ChainConfig,
) -> Result<Vec<BacktestRow>, HarnessError> {
    let dates = series
        .dates
        .as_ref()
        .ok_or_else(|| HarnessError::Data("backtest needs dated prices".into()))?;
    let min_warmup = (1.0 / (1.0 - p_u)).ceil() as usize;
    if warmup < min_warmup {
        return Err(HarnessError::Config(format!(
            "warmup {warmup} is below the minimum {min_warmup} for p_u = {p_u}"
        )));
    }
    if series.returns.len() <= warmup {
        return Err(HarnessError::Config(format!(
            "series has {} returns, not enough for a warmup of {warmup}",
            series.returns.len()
        )));
    }
    if methods.is_empty() {
        return Err(HarnessError::Config("no methods requested".into()));
    }
    let losses: Vec<f64> = series.returns.iter().map(|r| -r).collect();
    let reference = reference_measures(&losses, p);

    let days: Vec<usize> = (warmup..losses.len()).collect();
    let per_day: Vec<Vec<BacktestRow>> = days
        .par_iter()
        .map(|&t| {
            let date = dates[t + 1];
            let window = &losses[..t];
            let mut rows = Vec::new();
            for (mi, &method) in methods.iter().enumerate() {
                let cfg_day = cfg.reseeded(cfg.seed.derive((t as u64) * 8 + mi as u64));
                let result = match method {
                    MethodId::Mh => estimate_mh(window, p, p_u, &cfg_day),
                    MethodId::Bmh => estimate_bmh(window, Family::Normal, p, p_u, &cfg_day),
                    MethodId::Ipbmh => estimate_ipbmh(window, Family::Normal, p, p_u, &cfg_day),
                };
                rows.extend(estimate_rows(date, method, result.ok()));
            }
            if let Some((var, cvar)) = reference {
                rows.push(BacktestRow {
                    date,
                    method: "real".into(),
                    measure: Measure::Var,
                    estimate: Some(-var),
                    lo: None,
                    hi: None,
                });
                rows.push(BacktestRow {
                    date,
                    method: "real".into(),
                    measure: Measure::Cvar,
                    estimate: cvar.map(|c| -c),
                    lo: None,
                    hi: None,
                });
            }
            rows
        })
        .collect();

    Ok(per_day.into_iter().flatten().collect())
}

/// Closed-form normal measures fitted to the full loss series by sample
/// mean and standard deviation; `None` when the series is degenerate.
fn reference_measures(losses: &[f64], p: f64) -> Option<(f64, Option<f64>)> {
    let n = losses.len() as f64;
    let mean = losses.iter().sum::<f64>() / n;
    let var = losses.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return None;
    }
    let r = risk::risk_normal(mean, var.sqrt(), p);
    Some((r.var, r.cvar))
}

/// Loss-scale estimate re-negated to the return convention; the bounds
/// swap sides under the sign flip.
fn estimate_rows(date: NaiveDate, method: MethodId, est: Option<RiskEstimate>) -> Vec<BacktestRow> {
    let (var_row, cvar_row) = match est {
        Some(e) => (
            (Some(-e.var_point), Some(-e.var_hi), Some(-e.var_lo)),
            (
                e.cvar_point.map(|v| -v),
                e.cvar_hi.map(|v| -v),
                e.cvar_lo.map(|v| -v),
            ),
        ),
        None => ((None, None, None), (None, None, None)),
    };
    vec![
        BacktestRow {
            date,
            method: method.to_string(),
            measure: Measure::Var,
            estimate: var_row.0,
            lo: var_row.1,
            hi: var_row.2,
        },
        BacktestRow {
            date,
            method: method.to_string(),
            measure: Measure::Cvar,
            estimate: cvar_row.0,
            lo: cvar_row.1,
            hi: cvar_row.2,
        },
    ]
}

/// Render backtest rows as the flat result table.
pub fn backtest_csv(rows: &[BacktestRow]) -> String {
    let mut out = String::from("date,method,measure,estimate,lo2.5,hi97.5\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.date,
            r.method,
            r.measure,
            sig7_opt(r.estimate),
            sig7_opt(r.lo),
            sig7_opt(r.hi)
        ));
    }
    out
}

pub fn write_backtest_csv(rows: &[BacktestRow], path: &Path) -> Result<(), HarnessError> {
    fs::write(path, backtest_csv(rows)).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read a `date,price` file: ISO-8601 dates, decimal-point prices, UTF-8.
pub fn read_price_csv(path: &Path) -> Result<(Vec<NaiveDate>, Vec<f64>), HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_start_matches('\u{feff}').trim() == "date,price" => {}
        other => {
            return Err(HarnessError::Data(format!(
                "expected header `date,price`, got {:?}",
                other.map(|(_, l)| l).unwrap_or("<empty file>")
            )))
        }
    }
    let mut dates = Vec::new();
    let mut prices = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = idx + 1; // 1-based, header included
        let (date_str, price_str) = line.split_once(',').ok_or_else(|| {
            HarnessError::Data(format!("row {row}: expected `date,price`, got `{line}`"))
        })?;
        let date = NaiveDate::parse_from_str(date_str.trim(), "%Y-%m-%d").map_err(|e| {
            HarnessError::Data(format!("row {row}: bad date `{date_str}`: {e}"))
        })?;
        let price: f64 = price_str.trim().parse().map_err(|e| {
            HarnessError::Data(format!("row {row}: bad price `{price_str}`: {e}"))
        })?;
        dates.push(date);
        prices.push(price);
    }
    Ok((dates, prices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Days;

    fn smoke_chain() -> ChainConfig {
        ChainConfig {
            length: 2_000,
            burn_in: 500,
            thin: 15,
            ..ChainConfig::default()
        }
    }

    fn synthetic_dates(n: usize) -> Vec<NaiveDate> {
        let start = NaiveDate::from_ymd_opt(2022, 1, 3).unwrap();
        (0..n).map(|i| start + Days::new(i as u64)).collect()
    }

    #[test]
    fn log_return_values() {
        let series = log_returns(&[100.0, 100.0]).unwrap();
        assert_eq!(series.returns, vec![0.0]);

        let series = log_returns(&[100.0, 105.0]).unwrap();
        assert!((series.returns[0] - 0.048_790_164_169_432).abs() < 1e-12);

        let err = log_returns(&[100.0, 0.0]);
        assert!(matches!(err, Err(HarnessError::Data(msg)) if msg.contains("row 2")));
    }

    #[test]
    fn percent_scaling_is_recorded() {
        let series = ReturnSeries::from_prices(None, vec![100.0, 105.0], true).unwrap();
        assert!(series.percent);
        assert!((series.returns[0] - 4.879_016_416_943_2).abs() < 1e-10);
    }

    #[test]
    fn study_emits_true_values_and_ordered_bounds() {
        let grid = StudyGrid {
            params: vec![vec![1.0]],
            sizes: vec![64],
            replications: 5,
            methods: vec![MethodId::Mh, MethodId::Ipbmh],
            chain: smoke_chain(),
            seed: 11,
            ..StudyGrid::defaults(Family::Exponential)
        };
        let cells = run_study(&grid).unwrap();
        assert_eq!(cells.len(), 2 * 2); // 2 methods × {var, cvar}
        for cell in &cells {
            assert_eq!(cell.fail_count, 0);
            let (lo, mean, hi) = (
                cell.lo.unwrap(),
                cell.mean.unwrap(),
                cell.hi.unwrap(),
            );
            assert!(lo <= mean && mean <= hi);
            match cell.measure {
                Measure::Var => {
                    assert!((cell.true_value.unwrap() - 2.995_732_273_553_991).abs() < 1e-12)
                }
                Measure::Cvar => {
                    assert!((cell.true_value.unwrap() - 3.995_732_273_553_991).abs() < 1e-12)
                }
            }
        }
    }

    #[test]
    fn study_marks_cauchy_cvar_undefined() {
        let grid = StudyGrid {
            params: vec![vec![0.0, 1.0]],
            sizes: vec![64],
            replications: 3,
            methods: vec![MethodId::Bmh],
            chain: smoke_chain(),
            seed: 13,
            ..StudyGrid::defaults(Family::Cauchy)
        };
        let cells = run_study(&grid).unwrap();
        let cvar = cells.iter().find(|c| c.measure == Measure::Cvar).unwrap();
        assert!(cvar.true_value.is_none());
        assert!(cvar.mean.is_none());
        let var = cells.iter().find(|c| c.measure == Measure::Var).unwrap();
        assert!(var.mean.is_some());
    }

    #[test]
    fn study_output_is_deterministic() {
        let grid = StudyGrid {
            params: vec![vec![1.0]],
            sizes: vec![32, 64],
            replications: 3,
            methods: vec![MethodId::Ipbmh],
            chain: smoke_chain(),
            seed: 17,
            ..StudyGrid::defaults(Family::Exponential)
        };
        let a = study_csv(&run_study(&grid).unwrap());
        let b = study_csv(&run_study(&grid).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn true_measure_values() {
        let (var, cvar) = true_measures(Family::Exponential, &[1.0], 0.95);
        assert!((var - 2.995_732_273_553_991).abs() < 1e-12);
        assert!((cvar.unwrap() - 3.995_732_273_553_991).abs() < 1e-12);

        let (var, _) = true_measures(Family::Normal, &[0.0, 2.0], 0.95);
        assert!((var - 3.289_707_253_902_944_4).abs() < 1e-9);

        let (var, cvar) = true_measures(Family::Cauchy, &[0.0, 2.0], 0.95);
        assert!((var - 12.627_503_029_350_086).abs() < 1e-9);
        assert!(cvar.is_none());
    }

    #[test]
    fn defaults_grid_shape() {
        let grid = StudyGrid::defaults(Family::Exponential);
        assert_eq!(grid.sizes, vec![32, 64, 128, 256, 512, 1024]);
        assert_eq!(grid.replications, 100);
        assert_eq!(grid.params.len(), 5);
        assert_eq!(grid.p, 0.95);
        assert_eq!(grid.p_u, 0.9);
        assert_eq!(StudyGrid::defaults(Family::Gamma).params.len(), 25);
        grid.validate().unwrap();
    }

    #[test]
    fn grid_validation() {
        let mut grid = StudyGrid::defaults(Family::Exponential);
        grid.sizes = vec![4]; // below ceil(1/(1−0.9))
        assert!(matches!(grid.validate(), Err(HarnessError::Config(_))));
        let mut grid = StudyGrid::defaults(Family::Exponential);
        grid.replications = 0;
        assert!(grid.validate().is_err());
    }

    #[test]
    fn backtest_row_arithmetic_and_causality() {
        let n_prices = 140;
        let model = BaselineModel::normal(0.0, 0.015).unwrap();
        let returns = model.sample(n_prices - 1, Seed(23));
        let mut prices = vec![100.0];
        for r in &returns {
            let last = *prices.last().unwrap();
            prices.push(last * r.exp());
        }
        let series =
            ReturnSeries::from_prices(Some(synthetic_dates(n_prices)), prices.clone(), false)
                .unwrap();
        let warmup = 100;
        let cfg = ChainConfig {
            seed: Seed(29),
            ..smoke_chain()
        };
        let rows =
            historical_backtest(&series, 0.95, 0.9, &[MethodId::Ipbmh], warmup, &cfg).unwrap();

        let days = n_prices - 1 - warmup;
        let ipbmh_var: Vec<&BacktestRow> = rows
            .iter()
            .filter(|r| r.method == "ipbmh" && r.measure == Measure::Var)
            .collect();
        assert_eq!(ipbmh_var.len(), days);
        // VaR of returns at the 5% level is negative.
        assert!(ipbmh_var.iter().all(|r| r.estimate.unwrap() < 0.0));

        // Causality: truncating the series must not change earlier rows.
        let cut = n_prices - 10;
        let truncated = ReturnSeries::from_prices(
            Some(synthetic_dates(cut)),
            prices[..cut].to_vec(),
            false,
        )
        .unwrap();
        let rows_cut =
            historical_backtest(&truncated, 0.95, 0.9, &[MethodId::Ipbmh], warmup, &cfg).unwrap();
        // The `real` rows are a full-sample reference line, so causality
        // applies to the method rows only.
        let method_rows = |rows: &[BacktestRow]| -> Vec<BacktestRow> {
            rows.iter().filter(|r| r.method != "real").cloned().collect()
        };
        let full = method_rows(&rows);
        for (a, b) in method_rows(&rows_cut).iter().zip(full.iter()) {
            assert_eq!(a, b, "prefix rows changed under truncation");
        }
    }

    #[test]
    fn backtest_rejects_insufficient_warmup() {
        let series = ReturnSeries::from_prices(
            Some(synthetic_dates(50)),
            (0..50).map(|i| 100.0 + i as f64).collect(),
            false,
        )
        .unwrap();
        let err = historical_backtest(
            &series,
            0.95,
            0.9,
            &[MethodId::Mh],
            5,
            &ChainConfig::default(),
        );
        assert!(matches!(err, Err(HarnessError::Config(_))));
    }

    #[test]
    fn backtest_on_constant_prices_yields_undefined_estimates() {
        let n = 120;
        let series = ReturnSeries::from_prices(
            Some(synthetic_dates(n)),
            vec![100.0; n],
            false,
        )
        .unwrap();
        let rows = historical_backtest(
            &series,
            0.95,
            0.9,
            &[MethodId::Mh],
            100,
            &smoke_chain(),
        )
        .unwrap();
        assert!(rows
            .iter()
            .filter(|r| r.method == "mh")
            .all(|r| r.estimate.is_none()));
    }

    #[test]
    fn price_csv_round_trip_and_errors() {
        let dir = std::env::temp_dir().join("tailrisk_harness_test");
        fs::create_dir_all(&dir).unwrap();
        let good = dir.join("good.csv");
        fs::write(&good, "date,price\n2022-01-03,100.0\n2022-01-04,101.5\n").unwrap();
        let (dates, prices) = read_price_csv(&good).unwrap();
        assert_eq!(dates.len(), 2);
        assert_eq!(prices, vec![100.0, 101.5]);

        let bad = dir.join("bad.csv");
        fs::write(&bad, "date,price\n2022-01-03,abc\n").unwrap();
        assert!(matches!(
            read_price_csv(&bad),
            Err(HarnessError::Data(msg)) if msg.contains("row 2")
        ));

        let no_header = dir.join("no_header.csv");
        fs::write(&no_header, "2022-01-03,100.0\n").unwrap();
        assert!(read_price_csv(&no_header).is_err());
    }

    #[test]
    fn csv_rendering_uses_undefined_for_absent_values() {
        let cells = vec![StudyCell {
            family: Family::Cauchy,
            params: vec![0.0, 2.0],
            n: 32,
            method: MethodId::Mh,
            measure: Measure::Cvar,
            mean: None,
            lo: None,
            hi: None,
            true_value: None,
            fail_count: 1,
            mean_width: None,
        }];
        let csv = study_csv(&cells);
        assert!(csv.starts_with("family,params,n,method,measure,mean,lo2.5,hi97.5,true,fail_count\n"));
        assert!(csv.contains("cauchy,0.000000;2.000000,32,mh,cvar,undefined,undefined,undefined,undefined,1"));
    }
}
