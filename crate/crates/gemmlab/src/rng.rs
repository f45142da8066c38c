//! Seeded Gaussian data generation.
//!
//! A small splitmix64 generator feeds the Box-Muller transform; the same seed
//! always yields the same matrix, on any platform. No external RNG crate so
//! the sequence is pinned by this file alone.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer: a bijective mixer with full avalanche.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic stream of uniform and Gaussian variates.
///
/// Box-Muller produces Gaussians in pairs; the second member is cached and
/// consumed by the next draw, so no transcendental work is wasted.
#[derive(Debug, Clone)]
pub struct RandomStream<T = f64> {
    state: u64,
    cached_gaussian: Option<T>,
}

impl<T: Real> RandomStream<T> {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            state: seed,
            cached_gaussian: None,
        }
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// One uniform draw strictly inside (0, 1).
    #[inline]
    pub fn next_uniform(&mut self) -> T {
        T::from_uniform_bits(self.next_u64())
    }

    /// Two independent uniform draws, both strictly inside (0, 1).
    pub fn next_uniform_pair(&mut self) -> (T, T) {
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        (u1, u2)
    }

    /// One standard-normal draw; consumes the cached pair member first.
    pub fn next_gaussian(&mut self) -> T {
        if let Some(z) = self.cached_gaussian.take() {
            return z;
        }
        let (u1, u2) = self.next_uniform_pair();
        // The stream's uniforms are strictly inside (0, 1), so this cannot fail.
        let (z0, z1) = box_muller(u1, u2).expect("uniform draw left (0, 1)");
        self.cached_gaussian = Some(z1);
        z0
    }

    /// Fills a rows x cols matrix with consecutive Gaussian draws in
    /// row-major order.
    pub fn random_matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix<T>> {
        let mut m = Matrix::zeros(rows, cols)?;
        for v in m.as_mut_slice() {
            *v = self.next_gaussian();
        }
        Ok(m)
    }
}

/// Box-Muller transform: maps two uniforms on (0, 1) to two independent
/// standard-normal variates
///
///   z0 = sqrt(-2 ln u1) * cos(2 pi u2)
///   z1 = sqrt(-2 ln u1) * sin(2 pi u2)
///
/// The open interval is enforced; u1 at either endpoint would take the log
/// of zero or of one-with-rounding and is rejected.
pub fn box_muller<T: Real>(u1: T, u2: T) -> Result<(T, T)> {
    if !(u1 > T::zero() && u1 < T::one()) {
        return Err(Error::UniformOutOfRange(u1.to_f64().unwrap_or(f64::NAN)));
    }
    if !(u2 > T::zero() && u2 < T::one()) {
        return Err(Error::UniformOutOfRange(u2.to_f64().unwrap_or(f64::NAN)));
    }
    let two = T::one() + T::one();
    let radius = (-two * u1.ln()).sqrt();
    let angle = two * T::PI() * u2;
    Ok((radius * angle.cos(), radius * angle.sin()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_pairs_are_deterministic_and_in_range() {
        let mut a = RandomStream::<f64>::new(42);
        let mut b = RandomStream::<f64>::new(42);
        for _ in 0..1000 {
            let (x1, x2) = a.next_uniform_pair();
            assert_eq!((x1, x2), b.next_uniform_pair());
            assert!(x1 > 0.0 && x1 < 1.0);
            assert!(x2 > 0.0 && x2 < 1.0);
        }
    }

    #[test]
    fn uniform_range_holds_over_ten_million_draws() {
        let mut s = RandomStream::<f64>::new(0xFACE);
        for _ in 0..10_000_000u32 {
            let u = s.next_uniform();
            assert!(u > 0.0 && u < 1.0, "uniform draw {u} left (0, 1)");
        }
    }

    #[test]
    fn uniform_mean_matches_expectation() {
        let mut s = RandomStream::<f64>::new(42);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let (u1, _) = s.next_uniform_pair();
            sum += u1;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "uniform mean {mean} too far from 0.5");
    }

    #[test]
    fn box_muller_hand_values() {
        // u2 = 0.25 puts the angle at pi/2: cosine vanishes, sine is 1.
        let (z0, z1) = box_muller(0.5f64, 0.25).unwrap();
        assert!(z0.abs() < 1e-15, "z0 = {z0}");
        let expected = (2.0 * 2.0f64.ln()).sqrt();
        assert!((z1 - expected).abs() < 1e-12, "z1 = {z1}, expected {expected}");

        // u1 near 1 sends the radius to zero.
        let (z0, z1) = box_muller(1.0f64 - 1e-12, 0.7).unwrap();
        assert!(z0.abs() < 1e-5 && z1.abs() < 1e-5);
    }

    #[test]
    fn box_muller_radius_identity() {
        let (z0, z1) = box_muller(0.3, 0.7).unwrap();
        let radius_sq = z0 * z0 + z1 * z1;
        assert!((radius_sq + 2.0 * 0.3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn box_muller_rejects_closed_endpoints() {
        assert!(box_muller(0.0, 0.5).is_err());
        assert!(box_muller(1.0, 0.5).is_err());
        assert!(box_muller(-0.1, 0.5).is_err());
        assert!(box_muller(0.5, 0.0).is_err());
        assert!(box_muller(0.5, 1.0).is_err());
    }

    #[test]
    fn random_matrix_is_seed_deterministic() {
        let m1 = RandomStream::<f64>::new(7).random_matrix(4, 4).unwrap();
        let m2 = RandomStream::<f64>::new(7).random_matrix(4, 4).unwrap();
        assert!(m1.bit_equal(&m2));

        let m3 = RandomStream::<f64>::new(8).random_matrix(4, 4).unwrap();
        assert!(!m1.bit_equal(&m3), "distinct seeds should give distinct matrices");
    }

    #[test]
    fn random_matrix_consumes_cached_member() {
        // 3x3 ends on an odd draw, leaving one cached Gaussian; the next
        // matrix must start from that cache, exactly as one long stream.
        let mut s = RandomStream::<f64>::new(11);
        let first = s.random_matrix(3, 3).unwrap();
        let second = s.random_matrix(3, 3).unwrap();

        let mut long = RandomStream::<f64>::new(11);
        let mut draws = Vec::with_capacity(18);
        for _ in 0..18 {
            draws.push(long.next_gaussian());
        }
        let expected_first = Matrix::from_vec(3, 3, draws[..9].to_vec()).unwrap();
        let expected_second = Matrix::from_vec(3, 3, draws[9..].to_vec()).unwrap();
        assert!(first.bit_equal(&expected_first));
        assert!(second.bit_equal(&expected_second));
    }

    #[test]
    fn gaussian_moments_converge() {
        let mut s = RandomStream::<f64>::new(7);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let z = s.next_gaussian();
            sum += z;
            sum_sq += z * z;
        }
        let mean = sum / n as f64;
        let variance = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.005, "gaussian mean {mean}");
        assert!((variance - 1.0).abs() < 0.01, "gaussian variance {variance}");
    }
}
