//! Four-fold coincidence counts: CSV ingestion, correlation estimation,
//! Svetlichny/Mermin parameters from data, and Poissonian Monte Carlo
//! uncertainty propagation.
//!
//! The CSV format is `party_a,party_b,party_c,count` with tokens
//! `U+ U- P+ P- H V` (U = unprimed equatorial analyzer, P = primed, sign =
//! assigned outcome). A phases sidecar gives the physical meaning of U/P
//! per party; it defaults to the optimal Svetlichny angles.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::hidden_variables::{MERMIN_TERMS, SVETLICHNY_SIGNS};
use crate::inequalities::{svetlichny_qm, AngleSet};
use crate::quantum::{fidelity, ghz_state};
use crate::tomography::{build_projectors, reconstruct, ReconstructOptions};

/// The measurement party a setting label belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Party {
    A,
    B,
    C,
}

/// One analyzer token: equatorial unprimed/primed with outcome sign, or a
/// computational H/V projector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Token {
    UPlus,
    UMinus,
    PPlus,
    PMinus,
    H,
    V,
}

impl Token {
    pub const ALL: [Token; 6] = [
        Token::UPlus,
        Token::UMinus,
        Token::PPlus,
        Token::PMinus,
        Token::H,
        Token::V,
    ];

    pub fn parse(s: &str) -> Option<Token> {
        match s {
            "U+" => Some(Token::UPlus),
            "U-" => Some(Token::UMinus),
            "P+" => Some(Token::PPlus),
            "P-" => Some(Token::PMinus),
            "H" => Some(Token::H),
            "V" => Some(Token::V),
            _ => None,
        }
    }

    /// Outcome sign of an equatorial token; None for H/V.
    pub fn sign(self) -> Option<i64> {
        match self {
            Token::UPlus | Token::PPlus => Some(1),
            Token::UMinus | Token::PMinus => Some(-1),
            Token::H | Token::V => None,
        }
    }

    pub fn is_equatorial(self) -> bool {
        !matches!(self, Token::H | Token::V)
    }

    fn equatorial(basis: Basis, sign: i64) -> Token {
        match (basis, sign >= 0) {
            (Basis::U, true) => Token::UPlus,
            (Basis::U, false) => Token::UMinus,
            (Basis::P, true) => Token::PPlus,
            (Basis::P, false) => Token::PMinus,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Token::UPlus => "U+",
            Token::UMinus => "U-",
            Token::PPlus => "P+",
            Token::PMinus => "P-",
            Token::H => "H",
            Token::V => "V",
        };
        f.write_str(s)
    }
}

/// A token tagged with its party, mostly for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SettingLabel {
    pub party: Party,
    pub token: Token,
}

/// The analyzer tokens of the three parties for one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SettingTriple {
    pub a: Token,
    pub b: Token,
    pub c: Token,
}

impl SettingTriple {
    pub fn new(a: Token, b: Token, c: Token) -> Self {
        Self { a, b, c }
    }
}

impl fmt::Display for SettingTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// Equatorial basis choice of one party.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Unprimed analyzer.
    U,
    /// Primed analyzer.
    P,
}

impl Basis {
    pub fn label(self) -> char {
        match self {
            Basis::U => 'U',
            Basis::P => 'P',
        }
    }
}

/// Completeness scheme a table can be checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// The 64 equatorial triples entering the Svetlichny parameter.
    Svetlichny,
    /// The full 216-triple overcomplete tomography set.
    Tomography,
}

/// Immutable table of four-fold coincidence counts keyed by setting triple,
/// together with the analyzer phases that give U/P their physical meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    entries: BTreeMap<SettingTriple, u64>,
    phases: AngleSet,
}

impl CountsTable {
    pub fn new(entries: BTreeMap<SettingTriple, u64>, phases: AngleSet) -> Self {
        Self { entries, phases }
    }

    /// Parse the counts CSV format. Duplicate triples and unknown tokens are
    /// validation errors; negative or non-integer counts are parse errors.
    pub fn parse(text: &str, phases: AngleSet) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Validation("empty counts file".into()))?;
        if header.trim() != "party_a,party_b,party_c,count" {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header 'party_a,party_b,party_c,count', got '{}'",
                    header.trim()
                ),
            });
        }
        let mut entries = BTreeMap::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let mut tokens = [Token::H; 3];
            for (k, field) in fields[..3].iter().enumerate() {
                tokens[k] = Token::parse(field).ok_or_else(|| {
                    Error::Validation(format!("line {line_no}: unknown setting token '{field}'"))
                })?;
            }
            let count: i64 = fields[3].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("count '{}' is not an integer", fields[3]),
            })?;
            if count < 0 {
                return Err(Error::Validation(format!(
                    "line {line_no}: negative count {count}"
                )));
            }
            let triple = SettingTriple::new(tokens[0], tokens[1], tokens[2]);
            if entries.insert(triple, count as u64).is_some() {
                return Err(Error::Validation(format!(
                    "line {line_no}: duplicate setting triple {triple}"
                )));
            }
        }
        Ok(Self { entries, phases })
    }

    /// Load a counts CSV from disk.
    pub fn load(path: &Path, phases: AngleSet) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, phases)
    }

    /// Serialize back to the CSV format, in canonical token order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("party_a,party_b,party_c,count\n");
        for (triple, count) in &self.entries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                triple.a, triple.b, triple.c, count
            ));
        }
        out
    }

    pub fn phases(&self) -> &AngleSet {
        &self.phases
    }

    pub fn entries(&self) -> &BTreeMap<SettingTriple, u64> {
        &self.entries
    }

    pub fn get(&self, triple: SettingTriple) -> Option<u64> {
        self.entries.get(&triple).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Triples a scheme requires that this table does not contain.
    pub fn missing(&self, scheme: Scheme) -> Vec<SettingTriple> {
        let tokens: &[Token] = match scheme {
            Scheme::Svetlichny => &Token::ALL[..4],
            Scheme::Tomography => &Token::ALL,
        };
        let mut missing = Vec::new();
        for &a in tokens {
            for &b in tokens {
                for &c in tokens {
                    let triple = SettingTriple::new(a, b, c);
                    if !self.entries.contains_key(&triple) {
                        missing.push(triple);
                    }
                }
            }
        }
        missing
    }

    /// Redraw every count from a Poisson distribution whose mean is the
    /// measured count. A measured zero stays zero.
    pub fn resample(&self, rng: &mut ChaCha8Rng) -> CountsTable {
        let entries = self
            .entries
            .iter()
            .map(|(&triple, &count)| {
                let drawn = if count == 0 {
                    0
                } else {
                    Poisson::new(count as f64).unwrap().sample(rng) as u64
                };
                (triple, drawn)
            })
            .collect();
        CountsTable {
            entries,
            phases: self.phases,
        }
    }
}

/// A measured three-particle correlation: exact ratio of the signed count
/// sum to the block total, with the eight contributing counts retained.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub numerator: i64,
    pub total: u64,
    pub block: Vec<(SettingTriple, u64)>,
}

/// Correlation E = sum(s_a s_b s_c N) / sum(N) over the eight outcome-sign
/// combinations of the chosen per-party bases.
pub fn correlation(
    table: &CountsTable,
    basis_a: Basis,
    basis_b: Basis,
    basis_c: Basis,
) -> Result<CorrelationEstimate> {
    let mut numerator = 0i64;
    let mut total = 0u64;
    let mut block = Vec::with_capacity(8);
    let mut missing = Vec::new();
    for sa in [1i64, -1] {
        for sb in [1i64, -1] {
            for sc in [1i64, -1] {
                let triple = SettingTriple::new(
                    Token::equatorial(basis_a, sa),
                    Token::equatorial(basis_b, sb),
                    Token::equatorial(basis_c, sc),
                );
                match table.get(triple) {
                    Some(count) => {
                        numerator += sa * sb * sc * count as i64;
                        total += count;
                        block.push((triple, count));
                    }
                    None => missing.push(triple),
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingCounts(missing.len(), missing[0].to_string()));
    }
    if total == 0 {
        return Err(Error::ZeroTotal(format!(
            "({}, {}, {})",
            basis_a.label(),
            basis_b.label(),
            basis_c.label()
        )));
    }
    Ok(CorrelationEstimate {
        value: numerator as f64 / total as f64,
        numerator,
        total,
        block,
    })
}

/// Basis triple of one correlation term, `false` = U, `true` = P.
fn bases_of(idx: usize) -> (Basis, Basis, Basis) {
    let pick = |primed: bool| if primed { Basis::P } else { Basis::U };
    (
        pick(idx >> 2 & 1 == 1),
        pick(idx >> 1 & 1 == 1),
        pick(idx & 1 == 1),
    )
}

/// The eight correlation terms of the Svetlichny combination in canonical
/// order (UUU, UUP, UPU, UPP, PUU, PUP, PPU, PPP) with their signs.
pub fn svetlichny_correlations(
    table: &CountsTable,
) -> Result<Vec<(String, f64, CorrelationEstimate)>> {
    (0..8)
        .map(|idx| {
            let (ba, bb, bc) = bases_of(idx);
            let est = correlation(table, ba, bb, bc)?;
            let label = format!("{}{}{}", ba.label(), bb.label(), bc.label());
            Ok((label, SVETLICHNY_SIGNS[idx] as f64, est))
        })
        .collect()
}

/// Svetlichny parameter from measured counts: the eight correlations
/// combined with the standard sign pattern, absolute value.
pub fn svetlichny_from_counts(table: &CountsTable) -> Result<f64> {
    let mut total = 0.0;
    for (idx, &sign) in SVETLICHNY_SIGNS.iter().enumerate() {
        let (ba, bb, bc) = bases_of(idx);
        total += sign as f64 * correlation(table, ba, bb, bc)?.value;
    }
    Ok(total.abs())
}

/// Mermin parameter from measured counts:
/// |E(P,U,U) + E(U,P,U) + E(U,U,P) - E(P,P,P)|.
pub fn mermin_from_counts(table: &CountsTable) -> Result<f64> {
    let mut total = 0.0;
    for &(pa, pb, pc, sign) in &MERMIN_TERMS {
        let pick = |primed: bool| if primed { Basis::P } else { Basis::U };
        total += sign as f64 * correlation(table, pick(pa), pick(pb), pick(pc))?.value;
    }
    Ok(total.abs())
}

/// Statistic recomputed on every Monte Carlo replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    Svetlichny,
    Mermin,
    Correlation(Basis, Basis, Basis),
    FidelityAfterTomography,
    SvetlichnyQmAfterTomography,
}

impl Statistic {
    pub fn evaluate(&self, table: &CountsTable, seed: u64) -> Result<f64> {
        match *self {
            Statistic::Svetlichny => svetlichny_from_counts(table),
            Statistic::Mermin => mermin_from_counts(table),
            Statistic::Correlation(a, b, c) => Ok(correlation(table, a, b, c)?.value),
            Statistic::FidelityAfterTomography => {
                let result = reconstruct(
                    table,
                    &build_projectors(table.phases()),
                    &ReconstructOptions::with_seed(seed),
                )?;
                fidelity(&result.rho, &ghz_state())
            }
            Statistic::SvetlichnyQmAfterTomography => {
                let result = reconstruct(
                    table,
                    &build_projectors(table.phases()),
                    &ReconstructOptions::with_seed(seed),
                )?;
                svetlichny_qm(&result.rho, table.phases())
            }
        }
    }
}

/// Run `f` for indices 0..n on a scoped thread pool, collecting results in
/// index order so aggregation is independent of scheduling.
pub(crate) fn parallel_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1)
        .min(n.max(1));
    let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
    if threads <= 1 {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = Some(f(i));
        }
    } else {
        let chunk = n.div_ceil(threads);
        std::thread::scope(|scope| {
            for piece in out.chunks_mut(chunk).enumerate() {
                let (chunk_idx, slots) = piece;
                let f = &f;
                scope.spawn(move || {
                    let base = chunk_idx * chunk;
                    for (off, slot) in slots.iter_mut().enumerate() {
                        *slot = Some(f(base + off));
                    }
                });
            }
        });
    }
    out.into_iter().map(|v| v.unwrap()).collect()
}

/// Deterministic two-pass sample mean and standard deviation.
pub fn mean_stddev(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Poissonian Monte Carlo: redraw every count around its measured mean,
/// recompute the statistic, and return the sample mean and standard
/// deviation over the replicates. Replicate r uses the sub-seed
/// `seed ^ r`, so the result is deterministic and parallelism-safe.
pub fn monte_carlo(
    table: &CountsTable,
    statistic: Statistic,
    replicates: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if replicates < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 replicates, got {replicates}"
        )));
    }
    let results = parallel_map_indexed(replicates, |r| {
        let sub_seed = seed ^ r as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        let resampled = table.resample(&mut rng);
        statistic.evaluate(&resampled, sub_seed)
    });
    let mut values = Vec::with_capacity(replicates);
    for r in results {
        values.push(r?);
    }
    Ok(mean_stddev(&values))
}

/// Parse the phases sidecar: a forgiving key/value format accepting
/// `phi_a = 2.356`, `"phi_a": 2.356,` and friends. Missing keys keep the
/// optimal-angle defaults.
pub fn parse_phases(text: &str) -> Result<AngleSet> {
    let mut ang = AngleSet::optimal();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw
            .trim()
            .trim_matches(|ch| ch == '{' || ch == '}' || ch == ',');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once(['=', ':']) else {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected key = value, got '{line}'"),
            });
        };
        let key = key.trim().trim_matches('"');
        let value: f64 = value
            .trim()
            .trim_matches(|ch| ch == '"' || ch == ',')
            .parse()
            .map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("'{}' is not a number", value.trim()),
            })?;
        match key {
            "phi_a" => ang.phi_a = crate::quantum::normalize_phase(value),
            "phi_a_prime" => ang.phi_a_prime = crate::quantum::normalize_phase(value),
            "phi_b" => ang.phi_b = crate::quantum::normalize_phase(value),
            "phi_b_prime" => ang.phi_b_prime = crate::quantum::normalize_phase(value),
            "phi_c" => ang.phi_c = crate::quantum::normalize_phase(value),
            "phi_c_prime" => ang.phi_c_prime = crate::quantum::normalize_phase(value),
            other => {
                return Err(Error::Validation(format!(
                    "line {}: unknown phase key '{other}'",
                    idx + 1
                )))
            }
        }
    }
    Ok(ang)
}

/// Load the phases sidecar from disk.
pub fn load_phases(path: &Path) -> Result<AngleSet> {
    parse_phases(&std::fs::read_to_string(path)?)
}

/// The dataset bundled with the crate: the full 216-setting coincidence
/// table of the three-photon experiment this crate reproduces.
pub const BUNDLED_TABLE1_CSV: &str = include_str!("../data/lavoie_table1.csv");

/// Parse the bundled dataset with the optimal analyzer phases.
pub fn bundled_table1() -> CountsTable {
    CountsTable::parse(BUNDLED_TABLE1_CSV, AngleSet::optimal()).expect("bundled dataset must parse")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_dataset_loads_and_matches_spot_cells() {
        let t = bundled_table1();
        assert_eq!(t.len(), 216);
        assert!(t.missing(Scheme::Tomography).is_empty());
        assert!(t.missing(Scheme::Svetlichny).is_empty());
        assert_eq!(
            t.get(SettingTriple::new(Token::UPlus, Token::UPlus, Token::UPlus)),
            Some(12)
        );
        assert_eq!(
            t.get(SettingTriple::new(Token::H, Token::H, Token::H)),
            Some(8)
        );
        assert_eq!(
            t.get(SettingTriple::new(Token::V, Token::V, Token::V)),
            Some(1)
        );
        assert_eq!(t.total(), 7590);
    }

    #[test]
    fn parse_rejects_bad_input() {
        let phases = AngleSet::optimal();
        // negative count
        let res = CountsTable::parse("party_a,party_b,party_c,count\nU+,U+,U+,-3\n", phases);
        assert!(matches!(res, Err(Error::Validation(_))));
        // unknown token
        let res = CountsTable::parse("party_a,party_b,party_c,count\nQ+,U+,U+,3\n", phases);
        assert!(matches!(res, Err(Error::Validation(_))));
        // duplicate triple
        let res = CountsTable::parse(
            "party_a,party_b,party_c,count\nU+,U+,U+,3\nU+,U+,U+,4\n",
            phases,
        );
        assert!(matches!(res, Err(Error::Validation(_))));
        // malformed count
        let res = CountsTable::parse("party_a,party_b,party_c,count\nU+,U+,U+,three\n", phases);
        assert!(matches!(res, Err(Error::Parse { .. })));
        // bad header
        let res = CountsTable::parse("a,b,c,n\nU+,U+,U+,3\n", phases);
        assert!(matches!(res, Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_triples_are_reported() {
        let t = CountsTable::parse(
            "party_a,party_b,party_c,count\nU+,U+,U+,3\n",
            AngleSet::optimal(),
        )
        .unwrap();
        assert_eq!(t.missing(Scheme::Svetlichny).len(), 63);
        assert_eq!(t.missing(Scheme::Tomography).len(), 215);
    }

    #[test]
    fn correlation_uuu_is_exact_ratio() {
        let t = bundled_table1();
        let est = correlation(&t, Basis::U, Basis::U, Basis::U).unwrap();
        assert_eq!(est.numerator, -172);
        assert_eq!(est.total, 290);
        assert_eq!(est.value, -172.0 / 290.0);
        assert_eq!(est.block.len(), 8);
        assert!((est.value - -0.59310).abs() < 1e-5);
    }

    #[test]
    fn correlation_uup() {
        let t = bundled_table1();
        let est = correlation(&t, Basis::U, Basis::U, Basis::P).unwrap();
        assert_eq!(est.numerator, -129);
        assert_eq!(est.total, 245);
        assert!((est.value - -0.52653).abs() < 1e-5);
    }

    #[test]
    fn correlation_cancels_on_uniform_counts() {
        let mut csv = String::from("party_a,party_b,party_c,count\n");
        for a in &Token::ALL[..4] {
            for b in &Token::ALL[..4] {
                for c in &Token::ALL[..4] {
                    csv.push_str(&format!("{a},{b},{c},5\n"));
                }
            }
        }
        let t = CountsTable::parse(&csv, AngleSet::optimal()).unwrap();
        for ba in [Basis::U, Basis::P] {
            for bb in [Basis::U, Basis::P] {
                for bc in [Basis::U, Basis::P] {
                    assert_eq!(correlation(&t, ba, bb, bc).unwrap().value, 0.0);
                }
            }
        }
        assert_eq!(svetlichny_from_counts(&t).unwrap(), 0.0);
        assert_eq!(mermin_from_counts(&t).unwrap(), 0.0);
    }

    #[test]
    fn correlation_errors() {
        let t = CountsTable::parse(
            "party_a,party_b,party_c,count\nU+,U+,U+,3\n",
            AngleSet::optimal(),
        )
        .unwrap();
        assert!(matches!(
            correlation(&t, Basis::U, Basis::U, Basis::U),
            Err(Error::MissingCounts(7, _))
        ));

        let mut csv = String::from("party_a,party_b,party_c,count\n");
        for a in &Token::ALL[..2] {
            for b in &Token::ALL[..2] {
                for c in &Token::ALL[..2] {
                    csv.push_str(&format!("{a},{b},{c},0\n"));
                }
            }
        }
        let zero = CountsTable::parse(&csv, AngleSet::optimal()).unwrap();
        assert!(matches!(
            correlation(&zero, Basis::U, Basis::U, Basis::U),
            Err(Error::ZeroTotal(_))
        ));
    }

    #[test]
    fn svetlichny_from_bundled_counts_frozen_regression() {
        // Independent hand arithmetic over the eight blocks of the table.
        let expected = (-172.0 / 290.0
            - 129.0 / 245.0
            - 169.0 / 315.0
            - 154.0 / 272.0
            - 176.0 / 300.0
            - 170.0 / 296.0
            - 177.0 / 277.0
            - 143.0 / 295.0f64)
            .abs();
        let got = svetlichny_from_counts(&bundled_table1()).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 4.507_044_390_994_878).abs() < 1e-12);
        assert!((got - 4.51).abs() <= 0.005);
    }

    #[test]
    fn mermin_from_bundled_counts() {
        let expected = (-176.0 / 300.0 - 169.0 / 315.0 - 129.0 / 245.0 - 143.0 / 295.0f64).abs();
        let got = mermin_from_counts(&bundled_table1()).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 2.14).abs() <= 0.01);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let t = bundled_table1();
        let a = monte_carlo(&t, Statistic::Svetlichny, 2, 99).unwrap();
        let b = monte_carlo(&t, Statistic::Svetlichny, 2, 99).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo(&t, Statistic::Mermin, 16, 5).unwrap();
        let d = monte_carlo(&t, Statistic::Mermin, 16, 5).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn monte_carlo_rejects_too_few_replicates() {
        let t = bundled_table1();
        assert!(monte_carlo(&t, Statistic::Svetlichny, 1, 0).is_err());
    }

    #[test]
    fn monte_carlo_sigma_matches_published_error_bar() {
        let t = bundled_table1();
        let (_, sigma) = monte_carlo(&t, Statistic::Svetlichny, 400, 4096).unwrap();
        assert!(
            (sigma - 0.14).abs() <= 0.03,
            "sigma {sigma} outside 0.14 +- 0.03"
        );
    }

    #[test]
    fn monte_carlo_mean_tracks_point_estimate() {
        let t = bundled_table1();
        let point = svetlichny_from_counts(&t).unwrap();
        for seed in 1..=10u64 {
            let (mean, sigma) = monte_carlo(&t, Statistic::Svetlichny, 400, seed * 4096).unwrap();
            assert!(
                (mean - point).abs() <= 3.0 * sigma / (400f64).sqrt() + 0.01,
                "mean {mean} vs point {point} at seed {seed}"
            );
        }
    }

    #[test]
    fn generator_oracle_reproduces_quantum_values() {
        use crate::quantum::{ghz_state, DensityMatrix};
        use crate::tomography::expected_counts;

        // Counts exactly proportional to GHZ probabilities at the optimal
        // phases reproduce the quantum maximum.
        let rho = DensityMatrix::from_pure(&ghz_state());
        let table = expected_counts(&rho, &AngleSet::optimal(), 1e6);
        let sv = svetlichny_from_counts(&table).unwrap();
        assert!((sv - 5.657).abs() < 1e-3, "S_v {sv}");

        // At the Mermin-maximizing phases the Mermin parameter reaches 4.
        let mermin_phases = AngleSet::new(
            0.0,
            std::f64::consts::FRAC_PI_2,
            0.0,
            std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
            0.0,
        );
        let table = expected_counts(&rho, &mermin_phases, 1e6);
        let m = mermin_from_counts(&table).unwrap();
        assert!((m - 4.0).abs() < 1e-3, "Mermin {m}");
    }

    #[test]
    fn monte_carlo_sigma_scales_as_inverse_root_intensity() {
        use crate::quantum::{ghz_state, DensityMatrix};
        use crate::tomography::expected_counts;

        let rho = DensityMatrix::from_pure(&ghz_state());
        let low = expected_counts(&rho, &AngleSet::optimal(), 1e4);
        let high = expected_counts(&rho, &AngleSet::optimal(), 1e6);
        let (_, sigma_low) = monte_carlo(&low, Statistic::Svetlichny, 400, 9).unwrap();
        let (_, sigma_high) = monte_carlo(&high, Statistic::Svetlichny, 400, 9).unwrap();
        let ratio = sigma_low / sigma_high;
        assert!(
            (8.5..=11.5).contains(&ratio),
            "100x counts should shrink sigma ~10x, got ratio {ratio}"
        );
    }

    #[test]
    fn tomography_statistics_through_monte_carlo() {
        let t = bundled_table1();
        let a = monte_carlo(&t, Statistic::FidelityAfterTomography, 2, 5).unwrap();
        let b = monte_carlo(&t, Statistic::FidelityAfterTomography, 2, 5).unwrap();
        assert_eq!(a, b);
        assert!((0.80..=0.90).contains(&a.0), "fidelity mean {}", a.0);
        let (sv_mean, _) = monte_carlo(&t, Statistic::SvetlichnyQmAfterTomography, 2, 5).unwrap();
        assert!((4.0..=5.0).contains(&sv_mean), "S_v^QM mean {sv_mean}");
    }

    #[test]
    fn phases_sidecar_parses_both_styles() {
        let a = parse_phases("phi_a = 0.5\nphi_c_prime = 1.25\n").unwrap();
        assert!((a.phi_a - 0.5).abs() < 1e-15);
        assert!((a.phi_c_prime - 1.25).abs() < 1e-15);
        assert!((a.phi_b - AngleSet::optimal().phi_b).abs() < 1e-15);

        let b = parse_phases("{\n  \"phi_a\": 0.5,\n  \"phi_c_prime\": 1.25\n}\n").unwrap();
        assert_eq!(a, b);

        assert!(parse_phases("phi_q = 1\n").is_err());
        assert!(parse_phases("phi_a = fast\n").is_err());
    }
}
