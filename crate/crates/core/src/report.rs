//! Sweeps over rules and targets, and the artifacts they emit: CSV tables,
//! JSON documents and PGM matrix images.

use std::io::{Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::ca::{digits_lsb_first, format_letters, Letter, Rule};
use crate::cc::{cc_bounds, CcMatrix};
use crate::classify::{
    onesidedness, permutivity, spreading_status, stagnating_pair_condition, stagnating_words, LetterSet, OnesidedMode,
    Permutivity, Sidedness,
};
use crate::error::{Error, Result};
use crate::protocols::verify_applicable;

/// First header cell of every CSV this crate writes.
pub const CSV_SCHEMA: &str = "tracecc-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZMode {
    Zeros,
    All,
    Sample { count: usize, seed: u64 },
}

impl FromStr for ZMode {
    type Err = Error;

    /// `zeros`, `all` or `sample:K:SEED`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split(':').collect::<Vec<_>>().as_slice() {
            ["zeros"] => Ok(ZMode::Zeros),
            ["all"] => Ok(ZMode::All),
            ["sample", k, seed] => Ok(ZMode::Sample {
                count: k.parse().map_err(|_| Error::Parse(format!("bad sample count {k:?}")))?,
                seed: seed.parse().map_err(|_| Error::Parse(format!("bad sample seed {seed:?}")))?,
            }),
            _ => Err(Error::Parse(format!("unknown z mode {s:?}"))),
        }
    }
}

/// Target words for a sweep, in a fixed order.
pub fn targets(mode: ZMode, q: usize, n: usize, budget: &Budget) -> Result<Vec<Vec<Letter>>> {
    match mode {
        ZMode::Zeros => Ok(vec![vec![0; n + 1]]),
        ZMode::All => {
            let total = budget.check_pow("target words", q, n + 1)?;
            Ok((0..total)
                .map(|index| {
                    // most significant letter first, so the list is lexicographic
                    let mut z = vec![0; n + 1];
                    digits_lsb_first(index, q, &mut z);
                    z.reverse();
                    z
                })
                .collect())
        }
        ZMode::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..count).map(|_| (0..=n).map(|_| rng.gen_range(0..q) as Letter).collect()).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRow {
    #[serde(rename = "tracecc-v1")]
    pub row: usize,
    pub rule: String,
    pub n: usize,
    pub z: String,
    pub quiescent_zero: bool,
    pub onesided_zero: Sidedness,
    pub star_onesided_zero: Sidedness,
    pub spreading_nonzero: bool,
    pub stagnating_pair: bool,
    /// Stagnating words of length at most 2, separated by `|`.
    pub stagnating: String,
    pub permutivity: Permutivity,
    pub distinct_rows: Option<usize>,
    pub distinct_cols: Option<usize>,
    pub left_bits: Option<u32>,
    pub right_bits: Option<u32>,
    pub multiround_exact: Option<u32>,
    pub fooling_bits: Option<u32>,
    pub rank_gf2: Option<usize>,
    pub rank_rational: Option<usize>,
    pub trace_column_left_bits: Option<u32>,
    pub trace_column_right_bits: Option<u32>,
    pub trace_tau_left_bits: Option<u32>,
    pub trace_tau_right_bits: Option<u32>,
    pub protocols_checked: Option<usize>,
    pub protocols_passed: Option<usize>,
    /// Protocols that failed, separated by `|`.
    pub protocol_failures: String,
    pub error: String,
}

impl SurveyRow {
    pub fn min_one_round(&self) -> Option<u32> {
        Some(self.left_bits?.min(self.right_bits?))
    }
}

/// One row: classification flags, every bound, and protocol verification.
/// Budget failures land in the `error` column.
pub fn survey_row(row: usize, rule: &Rule, z: &[Letter], budget: &Budget) -> SurveyRow {
    let zero = LetterSet::singleton(0);
    let q = rule.alphabet_size();
    let mut out = SurveyRow {
        row,
        rule: rule.label(),
        n: z.len().saturating_sub(1),
        z: format_letters(z),
        quiescent_zero: rule.apply(0, 0, 0) == 0,
        onesided_zero: onesidedness(rule, &zero, OnesidedMode::Plain).expect("nonempty"),
        star_onesided_zero: onesidedness(rule, &zero, OnesidedMode::Star).expect("nonempty"),
        spreading_nonzero: spreading_status(rule, &zero.complement(q)).map(|s| s.semi_strong()).unwrap_or(false),
        stagnating_pair: stagnating_pair_condition(rule),
        stagnating: stagnating_words(rule).iter().map(|w| format_letters(w)).collect::<Vec<_>>().join("|"),
        permutivity: permutivity(rule),
        distinct_rows: None,
        distinct_cols: None,
        left_bits: None,
        right_bits: None,
        multiround_exact: None,
        fooling_bits: None,
        rank_gf2: None,
        rank_rational: None,
        trace_column_left_bits: None,
        trace_column_right_bits: None,
        trace_tau_left_bits: None,
        trace_tau_right_bits: None,
        protocols_checked: None,
        protocols_passed: None,
        protocol_failures: String::new(),
        error: String::new(),
    };
    match cc_bounds(rule, z, budget) {
        Ok(b) => {
            out.distinct_rows = Some(b.distinct_rows);
            out.distinct_cols = Some(b.distinct_cols);
            out.left_bits = Some(b.left_cc_bits);
            out.right_bits = Some(b.right_cc_bits);
            out.multiround_exact = b.multiround_exact_bits;
            out.fooling_bits = Some(b.fooling_bound_bits);
            out.rank_gf2 = Some(b.rank_gf2);
            out.rank_rational = Some(b.rank_rational);
            out.trace_column_left_bits = b.trace_column_left_bits;
            out.trace_column_right_bits = b.trace_column_right_bits;
            out.trace_tau_left_bits = b.trace_tau_left_bits;
            out.trace_tau_right_bits = b.trace_tau_right_bits;
        }
        Err(e) => {
            out.error = e.to_string();
            return out;
        }
    }
    match verify_applicable(rule, z, budget) {
        Ok(reports) => {
            out.protocols_checked = Some(reports.len());
            out.protocols_passed = Some(reports.iter().filter(|r| r.correct && r.within_bound).count());
            out.protocol_failures = reports
                .iter()
                .filter(|r| !(r.correct && r.within_bound))
                .map(|r| r.protocol.clone())
                .collect::<Vec<_>>()
                .join("|");
        }
        Err(e) => out.error = e.to_string(),
    }
    out
}

/// One row per `(rule, z)`, rules outermost, in input order.
pub fn survey(n: usize, mode: ZMode, rules: &[Rule], budget: &Budget) -> Result<Vec<SurveyRow>> {
    let mut jobs = Vec::new();
    for rule in rules {
        for z in targets(mode, rule.alphabet_size(), n, budget)? {
            jobs.push((rule, z));
        }
    }
    Ok(jobs.par_iter().enumerate().map(|(k, (rule, z))| survey_row(k, rule, z, budget)).collect())
}

pub fn write_csv<W: Write>(rows: &[SurveyRow], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    if rows.is_empty() {
        writer.write_record(header())?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn header() -> Vec<&'static str> {
    vec![
        CSV_SCHEMA,
        "rule",
        "n",
        "z",
        "quiescent_zero",
        "onesided_zero",
        "star_onesided_zero",
        "spreading_nonzero",
        "stagnating_pair",
        "stagnating",
        "permutivity",
        "distinct_rows",
        "distinct_cols",
        "left_bits",
        "right_bits",
        "multiround_exact",
        "fooling_bits",
        "rank_gf2",
        "rank_rational",
        "trace_column_left_bits",
        "trace_column_right_bits",
        "trace_tau_left_bits",
        "trace_tau_right_bits",
        "protocols_checked",
        "protocols_passed",
        "protocol_failures",
        "error",
    ]
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<SurveyRow>> {
    let mut reader = csv::Reader::from_reader(r);
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some(CSV_SCHEMA) {
        return Err(Error::Parse(format!("expected schema {CSV_SCHEMA}, found {:?}", headers.get(0))));
    }
    reader.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Binary PGM of `f̂_z`: white where the trace is `z`; elsewhere, for a
/// binary alphabet, black if the top cell is 1 and gray if it is 0. Row 0 is
/// at the top and column 0 at the left.
pub fn render_pgm<W: Write>(m: &CcMatrix, mut w: W) -> Result<()> {
    let dim = m.dim();
    write!(w, "P5\n{dim} {dim}\n255\n")?;
    let binary = m.alphabet_size() == 2;
    let pixels: Vec<u8> = m
        .hat_cells()
        .iter()
        .zip(m.top_cells())
        .map(|(&h, &t)| match (h, binary, t) {
            (0, ..) => 255,
            (_, true, 0) => 128,
            _ => 0,
        })
        .collect();
    w.write_all(&pixels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cc::build_matrix;

    fn e(n: u8) -> Rule {
        Rule::elementary(n)
    }

    fn pgm(rule: u8, n: usize) -> Vec<u8> {
        let m = build_matrix(&e(rule), &vec![0; n + 1], &Budget::default()).unwrap();
        let mut out = Vec::new();
        render_pgm(&m, &mut out).unwrap();
        out
    }

    fn pixels(image: &[u8]) -> &[u8] {
        let header = b"P5\n16 16\n255\n".len();
        &image[header..]
    }

    #[test]
    fn pgm_examples() {
        let img = pgm(0, 4);
        assert!(img.starts_with(b"P5\n16 16\n255\n"));
        assert_eq!(pixels(&img).len(), 256);
        assert!(pixels(&img).iter().all(|&p| p == 255));

        let img = pgm(182, 4);
        for (k, &p) in pixels(&img).iter().enumerate() {
            assert_eq!(p == 255, k == 0);
        }
        assert!(!pixels(&pgm(222, 4)).contains(&128));
    }

    #[test]
    fn survey_examples() {
        let b = Budget::default();
        let rows = survey(2, ZMode::Zeros, &[e(90)], &b).unwrap();
        assert_eq!(rows[0].distinct_rows, Some(4));
        let rows = survey(6, ZMode::Zeros, &[e(0)], &b).unwrap();
        let r = &rows[0];
        assert_eq!((r.left_bits, r.right_bits, r.fooling_bits, r.rank_gf2), (Some(0), Some(0), Some(0), Some(0)));
        assert_eq!(r.protocols_checked, r.protocols_passed);
        assert!(r.error.is_empty());
    }

    #[test]
    fn budget_errors_stay_in_row() {
        let rows = survey(3, ZMode::Zeros, &[e(30)], &Budget::new(40)).unwrap();
        assert!(rows[0].error.contains("budget"), "{}", rows[0].error);
        assert_eq!(rows[0].left_bits, None);
    }

    #[test]
    fn targets_are_deterministic() {
        let b = Budget::default();
        let all = targets(ZMode::All, 2, 2, &b).unwrap();
        assert_eq!(all.len(), 8);
        assert_eq!(all[1], vec![0, 0, 1]);
        let s1 = targets(ZMode::Sample { count: 5, seed: 7 }, 4, 3, &b).unwrap();
        let s2 = targets(ZMode::Sample { count: 5, seed: 7 }, 4, 3, &b).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.iter().flatten().all(|&l| l < 4));
        assert_eq!("sample:5:7".parse::<ZMode>().unwrap(), ZMode::Sample { count: 5, seed: 7 });
        assert!("sample:x".parse::<ZMode>().is_err());
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let b = Budget::default();
        let rules: Vec<Rule> = [0u8, 30, 90, 232].iter().map(|&n| e(n)).collect();
        let mut rows = survey(3, ZMode::All, &rules, &b).unwrap();
        rows.push(survey_row(rows.len(), &e(30), &[0, 0, 0, 0], &Budget::new(10)));
        let mut first = Vec::new();
        write_csv(&rows, &mut first).unwrap();
        let head = String::from_utf8(first.clone()).unwrap().lines().next().unwrap().to_string();
        assert_eq!(head, header().join(","));
        let back = read_csv(first.as_slice()).unwrap();
        assert_eq!(back, rows);
        let mut second = Vec::new();
        write_csv(&back, &mut second).unwrap();
        assert_eq!(first, second);

        let mut empty = Vec::new();
        write_csv(&[], &mut empty).unwrap();
        assert!(read_csv(empty.as_slice()).unwrap().is_empty());
        assert!(read_csv(&b"other,rule\n"[..]).is_err());
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let rows = survey(2, ZMode::All, &[e(110)], &Budget::default()).unwrap();
        let first = serde_json::to_string_pretty(&rows).unwrap();
        let back: Vec<SurveyRow> = serde_json::from_str(&first).unwrap();
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), first);
    }

    #[test]
    fn survey_is_order_stable_across_pools() {
        let rules: Vec<Rule> = (0..=255u8).step_by(17).map(e).collect();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| survey(3, ZMode::Zeros, &rules, &Budget::default()).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
