//! Seeded randomness for trial sweeps. Every trial derives its own stream from
//! (seed, stream index), so results are independent of execution order.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{mat_exp, C64, ComplexMatrix};

/// Derive a deterministic per-stream generator from a base seed.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn random_complex(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    Complex64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale))
}

/// A complex number of modulus <= 1.
pub fn random_unit_complex(rng: &mut ChaCha8Rng) -> C64 {
    loop {
        let z = random_complex(rng, 1.0);
        if z.norm() <= 1.0 {
            return z;
        }
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| random_complex(rng, scale))
}

/// exp(radius * K) with ||K|| normalized to 1; always invertible.
pub fn random_invertible_near_identity(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> ComplexMatrix {
    let k = random_matrix(rng, n, 1.0);
    let nrm = k.norm().max(1e-12);
    mat_exp(&k.scale(C64::new(radius / nrm, 0.0))).expect("bounded exponent")
}

/// Diagonal entries with pairwise gaps and moduli above `sep`.
pub fn random_regular_diagonal(rng: &mut ChaCha8Rng, n: usize, sep: f64) -> Vec<C64> {
    'outer: loop {
        let q: Vec<C64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.5..=1.5), rng.gen_range(-1.5..=1.5)))
            .collect();
        for i in 0..n {
            if q[i].norm() < sep {
                continue 'outer;
            }
            for j in i + 1..n {
                if (q[i] - q[j]).norm() < sep {
                    continue 'outer;
                }
            }
        }
        return q;
    }
}

/// A group element with comfortably separated eigenvalues: a conjugated
/// regular diagonal.
pub fn random_regular_group_element(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let q = ComplexMatrix::diagonal(&random_regular_diagonal(rng, n, 0.3));
    let eta = random_invertible_near_identity(rng, n, 0.5);
    let inv = eta.inverse().expect("exp image is invertible");
    eta.matmul(&q).matmul(&inv)
}
