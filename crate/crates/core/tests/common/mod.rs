//! Shared state corpus and direct-evaluation oracles for integration tests.

#![allow(dead_code)]

use aapt_core::channel::Channel;
use aapt_core::linalg::{c, identity, random_density, tensor, ComplexMatrix, RandomSeed};
use aapt_core::sensitivity::{make_cq_state, make_prop4_state};
use aapt_core::state::{max_entangled, product, random_mixed, random_pure, BipartiteState};
use rand::Rng;

pub struct Labeled {
    pub label: String,
    pub state: BipartiteState,
}

fn push(out: &mut Vec<Labeled>, label: String, state: BipartiteState) {
    out.push(Labeled { label, state });
}

const SHAPES: [(usize, usize); 7] = [(2, 2), (2, 3), (3, 2), (3, 3), (2, 4), (4, 2), (4, 4)];

/// Random probability vector with no two entries within `1e-3` of each other.
fn spread_spectrum(d: usize, seed: RandomSeed) -> Vec<f64> {
    let mut rng = seed.rng();
    loop {
        let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let distinct = (0..d).all(|i| ((i + 1)..d).all(|j| (p[i] - p[j]).abs() > 1e-3));
        if distinct {
            return p;
        }
    }
}

/// At least 200 states spanning every family the certificates distinguish.
pub fn corpus() -> Vec<Labeled> {
    let mut out = Vec::new();
    for d in [2, 3] {
        push(&mut out, format!("max-entangled d={d}"), max_entangled(d).unwrap());
    }
    let mut seed = 0u64;
    let mut next = || {
        seed += 1;
        RandomSeed(0xC0FFEE + seed)
    };
    for k in 0..42 {
        let (da, db) = SHAPES[k % SHAPES.len()];
        push(&mut out, format!("random pure {da}x{db} #{k}"), random_pure(da, db, next()).unwrap());
    }
    for k in 0..42 {
        let (da, db) = SHAPES[k % SHAPES.len()];
        push(&mut out, format!("random full-rank {da}x{db} #{k}"), random_mixed(da, db, da * db, next()).unwrap());
    }
    for k in 0..21 {
        let (da, db) = SHAPES[k % SHAPES.len()];
        let rank = 2 + k % 3;
        push(&mut out, format!("random rank-{rank} {da}x{db} #{k}"), random_mixed(da, db, rank, next()).unwrap());
    }
    for k in 0..28 {
        let (da, db) = SHAPES[k % SHAPES.len()];
        // alternate full-rank and rank-deficient marginals
        let ra = if k % 2 == 0 { da } else { 1 };
        let a = random_density(da, ra, next()).unwrap();
        let b = random_density(db, db, next()).unwrap();
        push(&mut out, format!("product {da}x{db} #{k}"), product(&a, &b).unwrap());
    }
    for k in 0..28 {
        let (da, db) = SHAPES[k % SHAPES.len()];
        let p = spread_spectrum(da, next());
        let sigmas: Vec<ComplexMatrix> = (0..da).map(|_| random_density(db, 1 + k % db, next()).unwrap()).collect();
        push(&mut out, format!("cq {da}x{db} #{k}"), make_cq_state(&p, &sigmas).unwrap());
    }
    for k in 0..30 {
        let d = 2 + k % 3;
        let lambda = spread_spectrum(d, next());
        push(&mut out, format!("prop4 d={d} #{k}"), make_prop4_state(&lambda).unwrap());
    }
    for k in 0..12 {
        let d = 2 + k % 2;
        let p = 0.1 + 0.07 * k as f64;
        let phi = max_entangled(d).unwrap();
        let noise = identity(d * d) * c(1.0 / (d * d) as f64, 0.0);
        let m = phi.matrix() * c(p, 0.0) + noise * c(1.0 - p, 0.0);
        push(&mut out, format!("isotropic d={d} p={p:.2}"), BipartiteState::new(m, phi.dims()).unwrap());
    }
    assert!(out.len() >= 200, "corpus has only {} states", out.len());
    out
}

/// `sum_k (K_k (x) 1) rho (K_k (x) 1)^dagger`, evaluated from Kraus operators.
pub fn apply_kraus_on_a(kraus: &[ComplexMatrix], rho: &BipartiteState) -> ComplexMatrix {
    let db = rho.dims().dim_b;
    let dout = kraus[0].nrows();
    let mut out = ComplexMatrix::zeros(dout * db, dout * db);
    for k in kraus {
        let big = tensor(k, &identity(db));
        out += &big * rho.matrix() * big.adjoint();
    }
    out
}

pub fn kraus_of(ch: &Channel) -> Vec<ComplexMatrix> {
    ch.kraus(0.0).expect("channel is CP")
}

pub fn random_operator(d: usize, seed: RandomSeed) -> ComplexMatrix {
    let mut rng = seed.rng();
    ComplexMatrix::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}
