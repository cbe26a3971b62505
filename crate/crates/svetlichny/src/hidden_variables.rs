//! Exhaustive enumeration of deterministic hidden-variable models.
//!
//! Local-realistic models assign predetermined outcomes +-1 to every
//! measurement; bipartite-nonlocal models instead treat the four joint
//! outcomes of one chosen pair as free signs while the remaining particle
//! stays local. All bounds here come from exact integer enumeration over
//! the 2^6 = 64 deterministic assignments, which anchors the floating-point
//! evaluators elsewhere in the crate.

use crate::error::{Error, Result};

/// Sign pattern of the eight-term Svetlichny combination, indexed by
/// (a primed) << 2 | (b primed) << 1 | (c primed).
pub const SVETLICHNY_SIGNS: [i64; 8] = [1, 1, 1, -1, 1, -1, -1, -1];

/// Terms of the Mermin combination: (a primed, b primed, c primed, sign).
pub const MERMIN_TERMS: [(bool, bool, bool, i64); 4] = [
    (true, false, false, 1),
    (false, true, false, 1),
    (false, false, true, 1),
    (true, true, true, -1),
];

/// Predetermined outcomes a, a', b, b', c, c' of a local-realistic model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalAssignment {
    pub a: i64,
    pub a_prime: i64,
    pub b: i64,
    pub b_prime: i64,
    pub c: i64,
    pub c_prime: i64,
}

impl LocalAssignment {
    pub fn new(a: i64, a_prime: i64, b: i64, b_prime: i64, c: i64, c_prime: i64) -> Self {
        for v in [a, a_prime, b, b_prime, c, c_prime] {
            assert!(v == 1 || v == -1, "outcomes must be +-1");
        }
        Self {
            a,
            a_prime,
            b,
            b_prime,
            c,
            c_prime,
        }
    }

    /// All 64 deterministic assignments.
    pub fn enumerate() -> impl Iterator<Item = LocalAssignment> {
        (0..64u32).map(|bits| {
            let sign = |k: u32| if bits >> k & 1 == 1 { 1 } else { -1 };
            LocalAssignment::new(sign(0), sign(1), sign(2), sign(3), sign(4), sign(5))
        })
    }

    fn outcome(&self, party: usize, primed: bool) -> i64 {
        match (party, primed) {
            (0, false) => self.a,
            (0, true) => self.a_prime,
            (1, false) => self.b,
            (1, true) => self.b_prime,
            (2, false) => self.c,
            (2, true) => self.c_prime,
            _ => unreachable!(),
        }
    }
}

/// Which pair of particles carries the nonlocal correlations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    /// a and b nonlocal, c local.
    AbC,
    /// b and c nonlocal, a local.
    BcA,
    /// a and c nonlocal, b local.
    AcB,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::AbC, Partition::BcA, Partition::AcB];
}

/// Deterministic assignment of a bipartite-nonlocal model: the four joint
/// pair outcomes are independent signs, the local particle keeps
/// predetermined c, c'.
///
/// Field names follow the ab|c partition; for the other partitions the pair
/// fields refer to the nonlocal pair in the same primed-index order and
/// (c, c') to whichever particle is local.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteAssignment {
    pub ab: i64,
    pub ab_prime: i64,
    pub a_prime_b: i64,
    pub a_prime_b_prime: i64,
    pub c: i64,
    pub c_prime: i64,
    pub partition: Partition,
}

impl BipartiteAssignment {
    /// Joint outcome of the nonlocal pair for primed flags (x, y).
    fn pair(&self, x: bool, y: bool) -> i64 {
        match (x, y) {
            (false, false) => self.ab,
            (false, true) => self.ab_prime,
            (true, false) => self.a_prime_b,
            (true, true) => self.a_prime_b_prime,
        }
    }

    fn single(&self, z: bool) -> i64 {
        if z {
            self.c_prime
        } else {
            self.c
        }
    }

    /// All 64 deterministic assignments for one partition.
    pub fn enumerate(partition: Partition) -> impl Iterator<Item = BipartiteAssignment> {
        (0..64u32).map(move |bits| {
            let sign = |k: u32| if bits >> k & 1 == 1 { 1 } else { -1 };
            BipartiteAssignment {
                ab: sign(0),
                ab_prime: sign(1),
                a_prime_b: sign(2),
                a_prime_b_prime: sign(3),
                c: sign(4),
                c_prime: sign(5),
                partition,
            }
        })
    }
}

/// S_2 = a(b + b') + a'(b - b'). Always +-2.
pub fn s2_value(x: &LocalAssignment) -> i64 {
    x.a * (x.b + x.b_prime) + x.a_prime * (x.b - x.b_prime)
}

/// The companion combination S_2' = a'(b' + b) + a(b' - b).
pub fn s2_prime_value(x: &LocalAssignment) -> i64 {
    x.a_prime * (x.b_prime + x.b) + x.a * (x.b_prime - x.b)
}

/// S_3 = 2(a'bc + ab'c + abc' - a'b'c'). Always +-4.
pub fn s3_value(x: &LocalAssignment) -> i64 {
    2 * (x.a_prime * x.b * x.c + x.a * x.b_prime * x.c + x.a * x.b * x.c_prime
        - x.a_prime * x.b_prime * x.c_prime)
}

/// The eight-term identity obeyed by every deterministic bipartite model:
/// (ab)c + (ab)c' + (ab')c - (ab')c' + (a'b)c - (a'b)c' - (a'b')c - (a'b')c'.
/// Always one of 0, +-2, +-4.
pub fn svetlichny_identity_value(x: &BipartiteAssignment) -> i64 {
    let mut total = 0;
    for (idx, &sign) in SVETLICHNY_SIGNS.iter().enumerate() {
        let pa = idx >> 2 & 1 == 1;
        let pb = idx >> 1 & 1 == 1;
        let pc = idx & 1 == 1;
        total += sign * x.pair(pa, pb) * x.single(pc);
    }
    total
}

/// Expression whose hidden-variable maximum is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expression {
    Chsh,
    Mermin,
    Svetlichny,
}

/// Class of deterministic model to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Local,
    Bipartite,
}

fn chsh_local(x: &LocalAssignment) -> i64 {
    x.a * x.b + x.a * x.b_prime + x.a_prime * x.b - x.a_prime * x.b_prime
}

fn mermin_local(x: &LocalAssignment) -> i64 {
    MERMIN_TERMS
        .iter()
        .map(|&(pa, pb, pc, s)| s * x.outcome(0, pa) * x.outcome(1, pb) * x.outcome(2, pc))
        .sum()
}

fn svetlichny_local(x: &LocalAssignment) -> i64 {
    (0..8usize)
        .map(|idx| {
            let pa = idx >> 2 & 1 == 1;
            let pb = idx >> 1 & 1 == 1;
            let pc = idx & 1 == 1;
            SVETLICHNY_SIGNS[idx] * x.outcome(0, pa) * x.outcome(1, pb) * x.outcome(2, pc)
        })
        .sum()
}

/// Value of an expression on a bipartite assignment. Each correlation term
/// factors into (pair outcome) x (local outcome) according to the partition.
fn bipartite_term_value(x: &BipartiteAssignment, pa: bool, pb: bool, pc: bool) -> i64 {
    match x.partition {
        Partition::AbC => x.pair(pa, pb) * x.single(pc),
        Partition::BcA => x.pair(pb, pc) * x.single(pa),
        Partition::AcB => x.pair(pa, pc) * x.single(pb),
    }
}

fn mermin_bipartite(x: &BipartiteAssignment) -> i64 {
    MERMIN_TERMS
        .iter()
        .map(|&(pa, pb, pc, s)| s * bipartite_term_value(x, pa, pb, pc))
        .sum()
}

fn svetlichny_bipartite(x: &BipartiteAssignment) -> i64 {
    (0..8usize)
        .map(|idx| {
            let pa = idx >> 2 & 1 == 1;
            let pb = idx >> 1 & 1 == 1;
            let pc = idx & 1 == 1;
            SVETLICHNY_SIGNS[idx] * bipartite_term_value(x, pa, pb, pc)
        })
        .sum()
}

/// Exact maximum of |expression| over all deterministic assignments of the
/// chosen model. The Mermin value is reported after its division by two for
/// the local model (the bound of the inequality itself), and directly for
/// the bipartite model, whose free pair outcomes reach the algebraic
/// maximum. The bipartite model enumerates all three partitions and takes
/// the largest value.
pub fn model_bound(expr: Expression, model: Model) -> Result<f64> {
    match (expr, model) {
        (Expression::Chsh, Model::Local) => {
            let max = LocalAssignment::enumerate()
                .map(|x| chsh_local(&x).abs())
                .max()
                .unwrap();
            Ok(max as f64)
        }
        (Expression::Chsh, Model::Bipartite) => Err(Error::InvalidParameter(
            "CHSH has no bipartite-nonlocal model for two particles".into(),
        )),
        (Expression::Mermin, Model::Local) => {
            // Half of S_3: the four-term combination bounded by 2.
            let max = LocalAssignment::enumerate()
                .map(|x| mermin_local(&x).abs())
                .max()
                .unwrap();
            Ok(max as f64)
        }
        (Expression::Svetlichny, Model::Local) => {
            let max = LocalAssignment::enumerate()
                .map(|x| svetlichny_local(&x).abs())
                .max()
                .unwrap();
            Ok(max as f64)
        }
        (Expression::Mermin, Model::Bipartite) => {
            let max = Partition::ALL
                .iter()
                .flat_map(|&p| BipartiteAssignment::enumerate(p))
                .map(|x| mermin_bipartite(&x).abs())
                .max()
                .unwrap();
            Ok(max as f64)
        }
        (Expression::Svetlichny, Model::Bipartite) => {
            let max = Partition::ALL
                .iter()
                .flat_map(|&p| BipartiteAssignment::enumerate(p))
                .map(|x| svetlichny_bipartite(&x).abs())
                .max()
                .unwrap();
            Ok(max as f64)
        }
    }
}

/// Per-partition maximum of the Svetlichny expression, for the symmetry check.
pub fn svetlichny_partition_bound(partition: Partition) -> i64 {
    BipartiteAssignment::enumerate(partition)
        .map(|x| svetlichny_bipartite(&x).abs())
        .max()
        .unwrap()
}
