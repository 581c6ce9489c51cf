use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::env::Objective;
use crate::error::{Error, Result};
use crate::harness::campaign::RunRecord;

pub const ALPHA: f64 = 0.05;

/// Which per-episode series to aggregate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Latency,
    Return,
}

impl Metric {
    pub fn for_objective(objective: Objective) -> Self {
        match objective {
            Objective::LowerIsBetter => Metric::Latency,
            Objective::HigherIsBetter => Metric::Return,
        }
    }

    fn series(self, record: &RunRecord) -> Vec<f64> {
        match self {
            Metric::Latency => record.latencies.iter().map(|&l| l as f64).collect(),
            Metric::Return => record.returns.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub metric: Metric,
    pub window: usize,
    /// Mean over runs, per episode.
    pub mean_curve: Vec<f64>,
    /// Sample standard deviation over runs, per episode.
    pub std_curve: Vec<f64>,
    /// Each run's mean over the trailing window.
    pub run_means: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation of `run_means`.
    pub std: f64,
    pub n: usize,
    pub best_run: usize,
    pub best_curve: Vec<f64>,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n - 1 denominator); zero for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn summarize(records: &[RunRecord], window: usize, objective: Objective) -> Result<SummaryStats> {
    let metric = Metric::for_objective(objective);
    let Some(first) = records.first() else {
        return Err(Error::Input("no runs to summarise".into()));
    };
    let episodes = first.episodes();
    if records.iter().any(|r| r.episodes() != episodes || r.returns.len() != episodes) {
        return Err(Error::Input("runs have different episode counts".into()));
    }
    if window == 0 || window > episodes {
        return Err(Error::Input(format!("window {window} outside 1..={episodes}")));
    }
    let series: Vec<Vec<f64>> = records.iter().map(|r| metric.series(r)).collect();
    let mut mean_curve = Vec::with_capacity(episodes);
    let mut std_curve = Vec::with_capacity(episodes);
    let mut column = Vec::with_capacity(series.len());
    for e in 0..episodes {
        column.clear();
        column.extend(series.iter().map(|s| s[e]));
        mean_curve.push(mean(&column));
        std_curve.push(variance(&column).sqrt());
    }
    let run_means: Vec<f64> = series.iter().map(|s| mean(&s[episodes - window..])).collect();
    let better = |a: f64, b: f64| match objective {
        Objective::LowerIsBetter => a < b,
        Objective::HigherIsBetter => a > b,
    };
    let mut best_run = 0;
    for (i, &m) in run_means.iter().enumerate() {
        if better(m, run_means[best_run]) {
            best_run = i;
        }
    }
    Ok(SummaryStats {
        metric,
        window,
        mean: mean(&run_means),
        std: variance(&run_means).sqrt(),
        n: records.len(),
        best_curve: series[best_run].clone(),
        best_run,
        run_means,
        mean_curve,
        std_curve,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub dof: f64,
    /// Two-sided.
    pub p_value: f64,
    pub significant: bool,
    /// Both samples have zero variance; `t` is then 0 or infinite.
    pub degenerate: bool,
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Input("Welch's test needs at least two samples per group".into()));
    }
    welch_from_moments(
        mean(a),
        variance(a).sqrt(),
        a.len(),
        mean(b),
        variance(b).sqrt(),
        b.len(),
    )
}

pub fn welch_from_moments(m1: f64, s1: f64, n1: usize, m2: f64, s2: f64, n2: usize) -> Result<WelchTest> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::Input("Welch's test needs at least two samples per group".into()));
    }
    if ![m1, s1, m2, s2].iter().all(|x| x.is_finite()) {
        return Err(Error::Numerical("non-finite sample moments".into()));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let v1 = s1 * s1 / n1f;
    let v2 = s2 * s2 / n2f;
    let se2 = v1 + v2;
    if se2 == 0.0 {
        let differ = m1 != m2;
        return Ok(WelchTest {
            t: if differ { f64::INFINITY.copysign(m1 - m2) } else { 0.0 },
            dof: n1f + n2f - 2.0,
            p_value: if differ { 0.0 } else { 1.0 },
            significant: differ,
            degenerate: true,
        });
    }
    let t = (m1 - m2) / se2.sqrt();
    let dof = se2 * se2 / (v1 * v1 / (n1f - 1.0) + v2 * v2 / (n2f - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Numerical(e.to_string()))?;
    let p_value = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0);
    Ok(WelchTest {
        t,
        dof,
        p_value,
        significant: p_value < ALPHA,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(latencies: &[usize]) -> RunRecord {
        RunRecord {
            config_id: "x".into(),
            seed: 0,
            latencies: latencies.to_vec(),
            returns: latencies.iter().map(|&l| -(l as f64)).collect(),
        }
    }

    #[test]
    fn constant_runs() {
        let runs = vec![record(&[200; 10]), record(&[200; 10])];
        let s = summarize(&runs, 5, Objective::LowerIsBetter).unwrap();
        assert_eq!((s.mean, s.std, s.n), (200.0, 0.0, 2));
        assert!(s.std_curve.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn window_and_best_run() {
        let runs = vec![record(&[10, 20, 30, 40]), record(&[50, 50, 10, 10])];
        let s = summarize(&runs, 2, Objective::LowerIsBetter).unwrap();
        assert_eq!(s.run_means, vec![35.0, 10.0]);
        assert_eq!(s.best_run, 1);
        assert_eq!(s.mean_curve, vec![30.0, 35.0, 20.0, 25.0]);
        let s = summarize(&runs, 2, Objective::HigherIsBetter).unwrap();
        assert_eq!(s.metric, Metric::Return);
        assert_eq!(s.best_run, 1);
    }

    #[test]
    fn bad_windows() {
        let runs = vec![record(&[1, 2, 3])];
        assert!(summarize(&runs, 0, Objective::LowerIsBetter).is_err());
        assert!(summarize(&runs, 4, Objective::LowerIsBetter).is_err());
        assert!(summarize(&[], 1, Objective::LowerIsBetter).is_err());
        assert!(summarize(&[record(&[1, 2]), record(&[1])], 1, Objective::LowerIsBetter).is_err());
    }

    #[test]
    fn welch_reference_value() {
        // 460 (52) vs 332 (134), 30 runs each
        let w = welch_from_moments(460.0, 52.0, 30, 332.0, 134.0, 30).unwrap();
        let se = (52f64.powi(2) / 30.0 + 134f64.powi(2) / 30.0).sqrt();
        assert!((w.t - 128.0 / se).abs() < 1e-12);
        assert!((w.t - 4.88).abs() < 0.01);
        assert!(w.significant && w.p_value < 1e-4);
    }

    #[test]
    fn welch_p_matches_t_table() {
        // equal n = 6 and s = 1 give 10 dof; t = 2 has two-sided p = 0.073388
        let diff = 2.0 * (2.0f64 / 6.0).sqrt();
        let w = welch_from_moments(diff, 1.0, 6, 0.0, 1.0, 6).unwrap();
        assert!((w.t - 2.0).abs() < 1e-12 && (w.dof - 10.0).abs() < 1e-12);
        assert!((w.p_value - 0.073388).abs() < 1e-5, "{}", w.p_value);
        assert!(!w.significant);
    }

    #[test]
    fn welch_identical_and_degenerate() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let w = welch_t_test(&a, &a).unwrap();
        assert_eq!(w.t, 0.0);
        assert!((w.p_value - 1.0).abs() < 1e-12 && !w.significant);
        let d = welch_t_test(&[5.0, 5.0], &[5.0, 5.0]).unwrap();
        assert!(d.degenerate && !d.significant);
        let d = welch_t_test(&[5.0, 5.0], &[6.0, 6.0]).unwrap();
        assert!(d.degenerate && d.significant);
        assert!(welch_t_test(&[1.0], &a).is_err());
    }
}
