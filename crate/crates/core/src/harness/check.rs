use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::data::trial_rng;
use crate::algebra::{aleph, conjugate, gimel, unit_table, Octonion, RealMat8, PRODUCT_TABLE};
use crate::par::{self, Exec};

/// Worst-case deviations over a batch of random pairs. Every field except
/// `non_associative_triples` should sit at rounding level.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AlgebraCheck {
    pub pairs: usize,
    /// `| |ab| - |a||b| | / (|a||b|)`.
    pub norm_multiplicativity: f64,
    /// Left and right alternative laws, relative to `|a|^2 |b|`.
    pub alternativity: f64,
    /// Table product against `gimel(a) aleph(b)`, relative to `|a||b|`.
    pub representation: f64,
    /// `gimel(a)^T` against `gimel(conj a)`.
    pub transpose: f64,
    /// `gimel(a)^T gimel(a)` against `|a|^2 I`, relative to `|a|^2`.
    pub orthogonality: f64,
    pub table_matches_gimel: bool,
    pub non_associative_triples: usize,
}

impl AlgebraCheck {
    pub fn worst(&self) -> f64 {
        [
            self.norm_multiplicativity,
            self.alternativity,
            self.representation,
            self.transpose,
            self.orthogonality,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.worst() < tol && self.table_matches_gimel && self.non_associative_triples > 0
    }
}

fn merge(a: AlgebraCheck, b: AlgebraCheck) -> AlgebraCheck {
    AlgebraCheck {
        pairs: a.pairs + b.pairs,
        norm_multiplicativity: a.norm_multiplicativity.max(b.norm_multiplicativity),
        alternativity: a.alternativity.max(b.alternativity),
        representation: a.representation.max(b.representation),
        transpose: a.transpose.max(b.transpose),
        orthogonality: a.orthogonality.max(b.orthogonality),
        ..a
    }
}

fn check_pair(a: &Octonion, b: &Octonion) -> AlgebraCheck {
    let (na, nb) = (a.norm(), b.norm());
    let ab = *a * *b;
    let aa = *a * *a;
    let left = (*a * ab - aa * *b).norm();
    let right = ((*b * *a) * *a - *b * aa).norm();
    let via = gimel(a).mul_vec(&aleph(b));
    let rep = aleph(&ab)
        .iter()
        .zip(via)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    let g = gimel(a);
    let mut scaled = RealMat8::zeros();
    for i in 0..8 {
        scaled.0[i][i] = a.norm_sqr();
    }
    AlgebraCheck {
        pairs: 1,
        norm_multiplicativity: (ab.norm() - na * nb).abs() / (na * nb),
        alternativity: left.max(right) / (na * na * nb),
        representation: rep / (na * nb),
        transpose: g.transpose().max_abs_diff(&gimel(&conjugate(a))),
        orthogonality: g.transpose().mul_mat(&g).max_abs_diff(&scaled) / a.norm_sqr(),
        ..AlgebraCheck::default()
    }
}

/// Checks the composition-algebra identities on `pairs` seeded random pairs
/// and inspects the unit table.
pub fn algebra_check(pairs: usize, seed: u64, exec: Exec) -> AlgebraCheck {
    const BLOCK: usize = 4096;
    let blocks = pairs.div_ceil(BLOCK);
    let parts = par::map_indices(blocks, exec, |blk| {
        let mut rng = trial_rng(seed, blk as u64);
        let count = BLOCK.min(pairs - blk * BLOCK);
        let mut acc = AlgebraCheck::default();
        for _ in 0..count {
            let a = Octonion(std::array::from_fn(|_| StandardNormal.sample(&mut rng)));
            let b = Octonion(std::array::from_fn(|_| StandardNormal.sample(&mut rng)));
            acc = merge(acc, check_pair(&a, &b));
        }
        acc
    });
    let mut out = parts.into_iter().fold(AlgebraCheck::default(), merge);

    out.table_matches_gimel = unit_table() == PRODUCT_TABLE;
    let e = Octonion::unit;
    for i in 1..8 {
        for j in 1..8 {
            for k in 1..8 {
                if (e(i) * e(j)) * e(k) == -(e(i) * (e(j) * e(k))) {
                    out.non_associative_triples += 1;
                }
            }
        }
    }
    out
}
