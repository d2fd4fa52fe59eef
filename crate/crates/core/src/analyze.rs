//! Rankings, rank correlation and difference curves from regression output.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::regress::{fmt_f64, RegressionResult};
use crate::scorer::ScorePair;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyzeError {
    #[error("k = {k} exceeds the {available} retained words")]
    KTooLarge { k: usize, available: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("empty input")]
    EmptyInput,
}

pub type Result<T> = std::result::Result<T, AnalyzeError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedWord {
    pub word: String,
    pub p: f64,
}

/// The `k` words with the smallest and the `k` with the largest p-values.
///
/// Ties are broken lexicographically by word in both lists.
pub fn rank_words(result: &RegressionResult, k: usize) -> Result<(Vec<RankedWord>, Vec<RankedWord>)> {
    let mut words: Vec<RankedWord> = result
        .words()
        .map(|c| RankedWord {
            word: c.label.clone(),
            p: c.p_value,
        })
        .collect();
    if k == 0 || k > words.len() {
        return Err(AnalyzeError::KTooLarge {
            k,
            available: words.len(),
        });
    }
    words.sort_by(|a, b| a.p.total_cmp(&b.p).then_with(|| a.word.cmp(&b.word)));
    let smallest = words[..k].to_vec();
    words.sort_by(|a, b| b.p.total_cmp(&a.p).then_with(|| a.word.cmp(&b.word)));
    let largest = words[..k].to_vec();
    Ok((smallest, largest))
}

/// Average (mid) ranks, 1-based.
pub fn mid_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // positions i..=j share rank (i+1 + j+1) / 2
        let rank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman's rho: Pearson correlation of mid-ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(AnalyzeError::DegenerateInput(format!(
            "length mismatch {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(AnalyzeError::DegenerateInput("fewer than two observations".into()));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(AnalyzeError::DegenerateInput("NaN in input".into()));
    }
    if xs.iter().all(|&x| x == xs[0]) || ys.iter().all(|&y| y == ys[0]) {
        return Err(AnalyzeError::DegenerateInput("constant sequence".into()));
    }
    Ok(pearson(&mid_ranks(xs), &mid_ranks(ys)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    pub n_used: usize,
    pub n_excluded: usize,
}

/// Spearman correlation between lexicon happiness and regression p-value
/// over retained words, after removing words with `p < zero_p_threshold`.
pub fn happiness_vs_p_correlation(
    lex: &Lexicon,
    result: &RegressionResult,
    zero_p_threshold: f64,
) -> Result<Correlation> {
    let mut happiness = Vec::new();
    let mut p_values = Vec::new();
    let mut excluded = 0;
    for c in result.words() {
        if c.p_value < zero_p_threshold {
            excluded += 1;
            continue;
        }
        let Some(h) = lex.get(&c.label) else { continue };
        happiness.push(h);
        p_values.push(c.p_value);
    }
    let rho = spearman(&happiness, &p_values)?;
    Ok(Correlation {
        rho,
        n_used: happiness.len(),
        n_excluded: excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub rank: usize,
    pub doc_id: String,
    pub hedonometer_unit: f64,
    pub reference_unit: f64,
    pub difference: f64,
}

/// Pairs sorted by difference ascending (ties by doc id), ranked from 1.
pub fn difference_curve(pairs: &[ScorePair]) -> Result<Vec<CurvePoint>> {
    if pairs.is_empty() {
        return Err(AnalyzeError::EmptyInput);
    }
    let mut sorted: Vec<&ScorePair> = pairs.iter().collect();
    sorted.sort_by(|a, b| match a.difference.total_cmp(&b.difference) {
        Ordering::Equal => a.doc_id.cmp(&b.doc_id),
        o => o,
    });
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, p)| CurvePoint {
            rank: i + 1,
            doc_id: p.doc_id.clone(),
            hedonometer_unit: p.hedonometer_unit,
            reference_unit: p.reference_unit,
            difference: p.difference,
        })
        .collect())
}

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rank", "doc_id", "hedonometer_unit", "reference_unit", "difference"])?;
    for p in points {
        out.write_record([
            p.rank.to_string(),
            p.doc_id.clone(),
            fmt_f64(p.hedonometer_unit),
            fmt_f64(p.reference_unit),
            fmt_f64(p.difference),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Per-domain (or pooled) audit output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub domain: String,
    pub smallest_p: Vec<RankedWord>,
    pub largest_p: Vec<RankedWord>,
    pub spearman_rho: Option<f64>,
    pub n_words_used: usize,
    pub excluded_zero_p: usize,
    pub no_coverage_docs: usize,
    pub n_docs: usize,
    pub vocabulary_size: usize,
    pub retained_words: usize,
    pub dropped_words: usize,
    pub fit_status: Option<crate::regress::FitStatus>,
    pub warnings: Vec<String>,
}

pub fn write_rankings_csv<W: Write>(report: &AuditReport, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["list", "rank", "word", "p"])?;
    for (name, list) in [("smallest", &report.smallest_p), ("largest", &report.largest_p)] {
        for (i, rw) in list.iter().enumerate() {
            out.write_record([name.to_string(), (i + 1).to_string(), rw.word.clone(), fmt_f64(rw.p)])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::{Coefficient, FitStatus, INTERCEPT};

    fn result_with(ps: &[(&str, f64)]) -> RegressionResult {
        let mut coefficients = vec![Coefficient {
            label: INTERCEPT.into(),
            coefficient: 0.0,
            std_error: 1.0,
            t_statistic: 0.0,
            p_value: 1e-320,
            p_bh: None,
        }];
        coefficients.extend(ps.iter().map(|&(w, p)| Coefficient {
            label: w.into(),
            coefficient: 0.0,
            std_error: 1.0,
            t_statistic: 0.0,
            p_value: p,
            p_bh: None,
        }));
        RegressionResult {
            coefficients,
            dropped_columns: vec![],
            rows: 100,
            degrees_of_freedom: 90,
            residual_variance: 1.0,
            r_squared: 0.5,
            status: FitStatus::Ok,
        }
    }

    fn words(list: &[RankedWord]) -> Vec<&str> {
        list.iter().map(|r| r.word.as_str()).collect()
    }

    #[test]
    fn ranks_extremes() {
        let r = result_with(&[("a", 0.01), ("b", 0.5), ("c", 0.99)]);
        let (small, large) = rank_words(&r, 1).unwrap();
        assert_eq!(words(&small), ["a"]);
        assert_eq!(words(&large), ["c"]);
    }

    #[test]
    fn ties_lexicographic() {
        let r = result_with(&[("b", 0.5), ("a", 0.5)]);
        let (small, large) = rank_words(&r, 1).unwrap();
        assert_eq!(words(&small), ["a"]);
        assert_eq!(words(&large), ["a"]);
    }

    #[test]
    fn intercept_never_ranked() {
        let r = result_with(&[("a", 0.2), ("b", 0.3)]);
        let (small, _) = rank_words(&r, 2).unwrap();
        assert_eq!(words(&small), ["a", "b"]);
        assert_eq!(rank_words(&r, 3), Err(AnalyzeError::KTooLarge { k: 3, available: 2 }));
        assert!(rank_words(&r, 0).is_err());
    }

    #[test]
    fn disjoint_lists() {
        let ps: Vec<(String, f64)> = (0..20).map(|i| (format!("w{i:02}"), (i as f64) / 20.0)).collect();
        let refs: Vec<(&str, f64)> = ps.iter().map(|(w, p)| (w.as_str(), *p)).collect();
        let (small, large) = rank_words(&result_with(&refs), 10).unwrap();
        assert!(small.iter().all(|s| large.iter().all(|l| l.word != s.word)));
        assert!(small.windows(2).all(|w| w[0].p <= w[1].p));
        assert!(large.windows(2).all(|w| w[0].p >= w[1].p));
    }

    #[test]
    fn spearman_monotone_and_textbook() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn spearman_degenerate() {
        assert!(spearman(&[1.0], &[2.0]).is_err());
        assert!(spearman(&[1.0, 2.0], &[2.0]).is_err());
        assert!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).is_err());
        assert!(spearman(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mid_ranks_ties() {
        assert_eq!(
            mid_ranks(&[10.0, 20.0, 10.0, 30.0, 20.0, 20.0]),
            vec![1.5, 4.0, 1.5, 6.0, 4.0, 4.0]
        );
    }

    #[test]
    fn happiness_correlation() {
        let lex = Lexicon::from_entries("t", [("a", 2.0), ("b", 5.0), ("c", 8.0), ("d", 9.0)]).unwrap();
        let r = result_with(&[("a", 0.1), ("b", 0.2), ("c", 0.7), ("d", 1e-310)]);
        let c = happiness_vs_p_correlation(&lex, &r, 1e-300).unwrap();
        assert!((c.rho - 1.0).abs() < 1e-12);
        assert_eq!((c.n_used, c.n_excluded), (3, 1));

        let all_zero = result_with(&[("a", 0.0), ("b", 0.0)]);
        assert!(matches!(
            happiness_vs_p_correlation(&lex, &all_zero, 1e-300),
            Err(AnalyzeError::DegenerateInput(_))
        ));
    }

    fn pair(id: &str, diff: f64) -> ScorePair {
        ScorePair {
            doc_id: id.into(),
            hedonometer_unit: 0.5,
            reference_unit: 0.5 - diff,
            difference: diff,
        }
    }

    #[test]
    fn curve_sorted() {
        let curve = difference_curve(&[pair("x", 0.2), pair("y", -0.1), pair("z", 0.0)]).unwrap();
        let diffs: Vec<f64> = curve.iter().map(|p| p.difference).collect();
        assert_eq!(diffs, [-0.1, 0.0, 0.2]);
        assert_eq!(curve.iter().map(|p| p.rank).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn curve_ties_by_id() {
        let curve = difference_curve(&[pair("c", 0.1), pair("a", 0.1), pair("b", 0.1)]).unwrap();
        let ids: Vec<&str> = curve.iter().map(|p| p.doc_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(difference_curve(&[]), Err(AnalyzeError::EmptyInput));
    }

    #[test]
    fn curve_csv_fixture() {
        let pairs = [
            ScorePair::new("d1", 0.5, 0.25).unwrap(),
            ScorePair::new("d2", 0.5, 0.75).unwrap(),
            ScorePair::new("d3", 0.25, 0.25).unwrap(),
            ScorePair::new("d4", 1.0, 0.5).unwrap(),
            ScorePair::new("d5", 0.0, 0.125).unwrap(),
        ];
        let mut buf = Vec::new();
        write_curve_csv(&difference_curve(&pairs).unwrap(), &mut buf).unwrap();
        let expect = "rank,doc_id,hedonometer_unit,reference_unit,difference\n\
                      1,d2,0.5,0.75,-0.25\n\
                      2,d5,0,0.125,-0.125\n\
                      3,d3,0.25,0.25,0\n\
                      4,d1,0.5,0.25,0.25\n\
                      5,d4,1,0.5,0.5\n";
        assert_eq!(String::from_utf8(buf).unwrap(), expect);
    }
}
