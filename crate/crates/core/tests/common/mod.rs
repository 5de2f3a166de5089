#![allow(dead_code)]

use cbop::measure::DiscreteMeasure;
use cbop::scalar::ratio;
use cbop::{Bundle, Frame, Rational};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn six_atom_pair() -> (DiscreteMeasure<Rational>, DiscreteMeasure<Rational>) {
    let alpha = DiscreteMeasure::from_decimal(&[
        ("1", "1"),
        ("2", "1"),
        ("3", "2"),
        ("5", "1"),
        ("7/2", "1/3"),
        ("9", "1"),
    ])
    .unwrap();
    let beta = DiscreteMeasure::from_decimal(&[
        ("0.5", "1"),
        ("3", "1"),
        ("4", "0.5"),
        ("6", "2"),
        ("8", "1"),
        ("11", "1"),
    ])
    .unwrap();
    (alpha, beta)
}

pub fn two_atom_pair() -> (DiscreteMeasure<Rational>, DiscreteMeasure<Rational>) {
    (
        DiscreteMeasure::from_decimal(&[("1", "1"), ("2", "1")]).unwrap(),
        DiscreteMeasure::from_decimal(&[("1", "1"), ("3", "1")]).unwrap(),
    )
}

/// Random measure with `atoms` distinct positions in (0, 12] on a grid of
/// quarters and weights in {1/3, ..., 3}.
pub fn random_measure(rng: &mut ChaCha8Rng, atoms: usize) -> DiscreteMeasure<Rational> {
    let mut positions: Vec<i64> = Vec::new();
    while positions.len() < atoms {
        let p = rng.gen_range(1..=48);
        if !positions.contains(&p) {
            positions.push(p);
        }
    }
    DiscreteMeasure::from_pairs(
        positions
            .into_iter()
            .map(|p| (ratio(p, 4), ratio(rng.gen_range(1..=9), 3))),
    )
    .unwrap()
}

pub fn random_pairs(seed: u64, count: usize, atoms: usize) -> Vec<(DiscreteMeasure<Rational>, DiscreteMeasure<Rational>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (random_measure(&mut rng, atoms), random_measure(&mut rng, atoms)))
        .collect()
}

pub fn exact_bundle(order: usize) -> Bundle<Rational> {
    let (a, b) = six_atom_pair();
    Bundle::new(a, b, order, Frame::MonicDual).unwrap()
}

pub fn float_bundle(order: usize) -> Bundle<f64> {
    let (a, b) = six_atom_pair();
    Bundle::new(a.to_f64(), b.to_f64(), order, Frame::Normalized).unwrap()
}

/// A few rational test points away from both supports and their reflections.
pub fn rational_points() -> Vec<Rational> {
    [(1, 3), (-13, 2), (101, 1), (7, 3), (-5, 7), (17, 1), (-1, 9), (23, 4), (-29, 3), (2, 13)]
        .iter()
        .map(|&(n, d)| ratio(n, d))
        .collect()
}

pub fn zero() -> Rational {
    ratio(0, 1)
}
