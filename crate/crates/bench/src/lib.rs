//! Shared input builders for the benchmark targets.

use gatesep_core::{expm_i_hermitian, ComplexMatrix, Complex64, Tolerances};

/// Deterministic pseudo-random Hermitian matrix (splitmix64 driven, so the
/// benches need no RNG dependency at build time).
pub fn seeded_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        (z as f64 / u64::MAX as f64) * 2.0 - 1.0
    };
    ComplexMatrix::from_fn(dim, dim, |_, _| Complex64::new(next(), next())).symmetrized()
}

pub fn seeded_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    expm_i_hermitian(&seeded_hermitian(dim, seed), 1.0, &Tolerances::default())
        .expect("seeded generator is Hermitian")
}
