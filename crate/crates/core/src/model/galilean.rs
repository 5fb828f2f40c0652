use crate::error::{Error, Result};

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Energy and momentum seen from a frame moving with velocity `u`:
/// `Q′ = Q − M u`, `E′ = E − Q·u + ½ M |u|²`.
pub fn galilean_shift(energy: f64, momentum: [f64; 3], mass: f64, u: [f64; 3]) -> Result<(f64, [f64; 3])> {
    if !(mass > 0.0) {
        return Err(Error::domain(format!("mass must be positive, got {mass}")));
    }
    let shifted_q = [momentum[0] - mass * u[0], momentum[1] - mass * u[1], momentum[2] - mass * u[2]];
    let shifted_e = energy - dot(momentum, u) + 0.5 * mass * dot(u, u);
    Ok((shifted_e, shifted_q))
}

/// `E − |Q|²/(2M)`, unchanged by [`galilean_shift`].
pub fn galilean_invariant(energy: f64, momentum: [f64; 3], mass: f64) -> f64 {
    energy - dot(momentum, momentum) / (2.0 * mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_boost() {
        let (e, q) = galilean_shift(1.5, [0.1, 0.2, 0.3], 2.0, [0.0; 3]).unwrap();
        assert_eq!((e, q), (1.5, [0.1, 0.2, 0.3]));

        let (e, q) = galilean_shift(1.0, [0.0; 3], 1.0, [2.0, 0.0, 0.0]).unwrap();
        assert_eq!(e, 3.0);
        assert_eq!(q, [-2.0, 0.0, 0.0]);
        assert_eq!(galilean_invariant(e, q, 1.0), 1.0);
    }

    #[test]
    fn round_trip() {
        let u = [0.5, -1.25, 2.0];
        let (e1, q1) = galilean_shift(-0.3, [1.0, 2.0, -0.5], 4.0, u).unwrap();
        let (e2, q2) = galilean_shift(e1, q1, 4.0, [-u[0], -u[1], -u[2]]).unwrap();
        assert!((e2 + 0.3).abs() < 1e-14);
        for (a, b) in q2.iter().zip([1.0, 2.0, -0.5]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_nonpositive_mass() {
        assert!(galilean_shift(1.0, [0.0; 3], 0.0, [1.0, 0.0, 0.0]).is_err());
    }
}
