//! Report rendering: aligned text summaries, delimited prediction and
//! diagnostics tables.

use bgnlm::results::DiagPoint;
use bgnlm::{DiagStat, GmjResult, MergedResult, PopSelector, PredictionSet, Summary};

/// `x` with `digits` significant digits, trailing zeros trimmed.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    trim_zeros(format!("{x:.decimals$}"))
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Decimal places for a probability column: enough that the smallest
/// nonzero entry keeps 7 significant digits, at least 6, at most 12.
fn prob_decimals(probs: impl Iterator<Item = f64>) -> usize {
    probs
        .filter(|p| *p > 0.0)
        .map(|p| (6 - p.log10().floor() as i32).max(6) as usize)
        .max()
        .unwrap_or(6)
        .min(12)
}

fn render_columns(headers: &[String], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = headers
        .iter()
        .enumerate()
        .map(|(j, h)| rows.iter().map(|r| r[j].len()).max().unwrap_or(0).max(h.len()))
        .collect();
    let idx_width = rows.len().to_string().len();
    let mut out = String::new();
    out.push_str(&" ".repeat(idx_width));
    for (h, w) in headers.iter().zip(&widths) {
        out.push_str(&format!(" {h:>w$}"));
    }
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        out.push_str(&format!("{:>idx_width$}", i + 1));
        for (cell, w) in row.iter().zip(&widths) {
            out.push_str(&format!(" {cell:>w$}"));
        }
        out.push('\n');
    }
    out
}

/// Where the overall best model sits and what the report is based on.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryHeader {
    /// 1-based generation of the best model.
    pub best_population: usize,
    /// 1-based source run, shown for multi-run or all-population reports.
    pub best_thread: Option<usize>,
    pub best_crit: f64,
    /// (population, criterion) of the reported generation when it is not
    /// the best one.
    pub report: Option<(usize, f64)>,
    /// Single-generation linear chains drop the population bookkeeping.
    pub populations: bool,
}

/// Locate the best run/generation and, for last-population reports, the
/// reported generation.
pub fn summary_header(
    runs: &[GmjResult],
    selector: PopSelector,
    merged: &MergedResult,
    populations: bool,
) -> SummaryHeader {
    let (mut best_run, mut best_gen, mut best_crit) = (0, 0, f64::NEG_INFINITY);
    for (r, run) in runs.iter().enumerate() {
        let crit = run.best_crit[run.best_generation];
        if crit > best_crit {
            (best_run, best_gen, best_crit) = (r, run.best_generation, crit);
        }
    }
    let report = if selector == PopSelector::Last {
        let last = runs.iter().map(|r| r.last_generation).max().unwrap_or(0);
        let crit = merged.models.iter().map(|m| m.crit).fold(f64::NEG_INFINITY, f64::max);
        if last == best_gen {
            None
        } else {
            Some((last + 1, crit))
        }
    } else {
        None
    };
    SummaryHeader {
        best_population: best_gen + 1,
        best_thread: (runs.len() > 1 || selector == PopSelector::All).then_some(best_run + 1),
        best_crit,
        report,
        populations,
    }
}

pub fn render_summary(header: &SummaryHeader, summary: &Summary) -> String {
    let mut out = String::new();
    if header.populations {
        out.push_str(&format!("Best   population: {}  ", header.best_population));
        if let Some(thread) = header.best_thread {
            out.push_str(&format!("thread: {thread}  "));
        }
        out.push_str(&format!("log marginal posterior: {}\n", sig(header.best_crit, 7)));
        if let Some((pop, crit)) = header.report {
            out.push_str(&format!(
                "Report population: {pop}  log marginal posterior: {}\n",
                sig(crit, 7)
            ));
        }
    } else {
        out.push_str(&format!("Best log marginal posterior:  {}\n", sig(header.best_crit, 7)));
    }
    out.push('\n');

    let decimals = prob_decimals(summary.rows.iter().map(|r| r.prob));
    let prob_rows: Vec<Vec<String>> = summary
        .rows
        .iter()
        .map(|r| vec![r.feature.clone(), format!("{:.decimals$}", r.prob)])
        .collect();
    let with_effects = summary.effect_levels.is_some();
    if with_effects {
        out.push_str("$PIP\n");
    }
    out.push_str(&render_columns(
        &["feats.strings".into(), "marg.probs".into()],
        &prob_rows,
    ));

    if let Some(levels) = &summary.effect_levels {
        out.push_str("\n$EFF\n");
        let mut headers = vec!["Covariate".to_string()];
        headers.extend(levels.iter().map(|l| format!("quant_{}", sig(*l, 6))));
        let mut rows = Vec::new();
        if let Some(q) = &summary.intercept_effects {
            let mut row = vec!["intercept".to_string()];
            row.extend(q.iter().map(|v| effect(*v)));
            rows.push(row);
        }
        for r in &summary.rows {
            if let Some(q) = &r.effects {
                let mut row = vec![r.feature.clone()];
                row.extend(q.iter().map(|v| effect(*v)));
                rows.push(row);
            }
        }
        out.push_str(&render_columns(&headers, &rows));
    }
    out
}

fn effect(x: f64) -> String {
    trim_zeros(format!("{x:.4}"))
}

pub fn render_summary_csv(summary: &Summary) -> String {
    let mut out = String::from("feature,prob");
    if let Some(levels) = &summary.effect_levels {
        for l in levels {
            out.push_str(&format!(",quant_{}", sig(*l, 6)));
        }
    }
    out.push('\n');
    for row in &summary.rows {
        out.push_str(&format!("\"{}\",{}", row.feature.replace('"', "\"\""), row.prob));
        if let Some(q) = &row.effects {
            for v in q {
                out.push_str(&format!(",{v}"));
            }
        }
        out.push('\n');
    }
    out
}

pub fn render_prediction_csv(pred: &PredictionSet) -> String {
    let mut out = String::from("id,mean");
    for level in &pred.levels {
        out.push_str(&format!(",q{}", sig(*level, 6)));
    }
    out.push('\n');
    for i in 0..pred.mean.len() {
        out.push_str(&format!("{},{:.6}", i + 1, pred.mean[i]));
        for q in &pred.quantiles {
            out.push_str(&format!(",{:.6}", q[i]));
        }
        out.push('\n');
    }
    out
}

fn stat_name(stat: DiagStat) -> &'static str {
    match stat {
        DiagStat::Median => "median",
        DiagStat::Mean => "mean",
        DiagStat::Min => "min",
        DiagStat::Max => "max",
        DiagStat::Var => "var",
    }
}

/// Long-format table, one row per generation per statistic, populations
/// numbered from 1.
pub fn render_diagnostics_csv(series: &[(DiagStat, Vec<DiagPoint>)]) -> String {
    let mut out = String::from("generation,statistic,value,lower,upper\n");
    for (stat, points) in series {
        for p in points {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6}\n",
                p.generation + 1,
                stat_name(*stat),
                p.value,
                p.lower,
                p.upper
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use bgnlm::results::SummaryRow;

    #[test]
    fn significant_digit_display_matches_reference_style() {
        assert_eq!(sig(1024.1872, 7), "1024.187");
        assert_eq!(sig(56.2259, 7), "56.2259");
        assert_eq!(sig(1.0, 7), "1");
        assert_eq!(sig(0.5, 6), "0.5");
        assert_eq!(sig(0.025, 6), "0.025");
        assert_eq!(sig(0.0, 7), "0");
        assert_eq!(sig(-3.25, 7), "-3.25");
    }

    #[test]
    fn probability_columns_widen_for_small_entries() {
        assert_eq!(prob_decimals([1.0].into_iter()), 6);
        assert_eq!(prob_decimals([1.0, 0.9986].into_iter()), 7);
        assert_eq!(prob_decimals([1.0, 0.0008679760].into_iter()), 10);
        assert_eq!(prob_decimals(std::iter::empty()), 6);
    }

    fn plain_summary() -> Summary {
        Summary {
            rows: vec![
                SummaryRow { feature: "x3".into(), prob: 1.0, effects: None },
                SummaryRow { feature: "(troot(x3)*x3)".into(), prob: 0.9999999, effects: None },
            ],
            effect_levels: None,
            intercept_effects: None,
        }
    }

    #[test]
    fn population_summary_mirrors_reference_layout() {
        let header = SummaryHeader {
            best_population: 8,
            best_thread: None,
            best_crit: 1024.1872,
            report: None,
            populations: true,
        };
        let text = render_summary(&header, &plain_summary());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Best   population: 8  log marginal posterior: 1024.187");
        assert_eq!(lines[1], "");
        assert_eq!(lines[2], "   feats.strings marg.probs");
        assert_eq!(lines[3], "1             x3  1.0000000");
        assert_eq!(lines[4], "2 (troot(x3)*x3)  0.9999999");
    }

    #[test]
    fn thread_and_report_lines_appear_when_relevant() {
        let header = SummaryHeader {
            best_population: 10,
            best_thread: Some(19),
            best_crit: 1078.438,
            report: Some((50, 1060.667)),
            populations: true,
        };
        let text = render_summary(&header, &plain_summary());
        assert!(text.starts_with(
            "Best   population: 10  thread: 19  log marginal posterior: 1078.438\n\
             Report population: 50  log marginal posterior: 1060.667\n"
        ));
    }

    #[test]
    fn linear_chain_summary_adds_effect_sections() {
        let summary = Summary {
            rows: vec![SummaryRow {
                feature: "X2".into(),
                prob: 0.94943379,
                effects: Some(vec![1.7034, 0.0, 1.7383]),
            }],
            effect_levels: Some(vec![0.5, 0.025, 0.975]),
            intercept_effects: Some(vec![0.0, 0.0, 0.0]),
        };
        let header = SummaryHeader {
            best_population: 1,
            best_thread: None,
            best_crit: 56.2259,
            report: None,
            populations: false,
        };
        let text = render_summary(&header, &summary);
        assert!(text.starts_with("Best log marginal posterior:  56.2259\n\n$PIP\n"));
        assert!(text.contains("\n$EFF\n"));
        assert!(text.contains("quant_0.5 quant_0.025 quant_0.975"));
        let intercept_line =
            text.lines().find(|l| l.contains("intercept")).unwrap();
        let tokens: Vec<&str> = intercept_line.split_whitespace().collect();
        assert_eq!(tokens, vec!["1", "intercept", "0", "0", "0"]);
        assert!(text.contains("1.7034"));
    }

    #[test]
    fn prediction_table_has_the_documented_header() {
        let pred = PredictionSet {
            mean: vec![1.5, 2.5],
            levels: vec![0.025, 0.975],
            quantiles: vec![vec![1.0, 2.0], vec![2.0, 3.0]],
        };
        let text = render_prediction_csv(&pred);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "id,mean,q0.025,q0.975");
        assert_eq!(lines[1], "1,1.500000,1.000000,2.000000");
        assert_eq!(lines[2], "2,2.500000,2.000000,3.000000");
    }

    #[test]
    fn diagnostics_table_is_long_format_with_one_based_generations() {
        let series = vec![
            (
                DiagStat::Median,
                vec![DiagPoint { generation: 0, value: 1.0, lower: 0.5, upper: 1.5 }],
            ),
            (
                DiagStat::Max,
                vec![DiagPoint { generation: 0, value: 2.0, lower: 2.0, upper: 2.0 }],
            ),
        ];
        let text = render_diagnostics_csv(&series);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "generation,statistic,value,lower,upper");
        assert_eq!(lines[1], "1,median,1.000000,0.500000,1.500000");
        assert_eq!(lines[2], "1,max,2.000000,2.000000,2.000000");
    }
}
