//! Spectral sampler for the log-variance chain conditioned on both endpoints.
//!
//! In the lognormal branch the log-variance chain is a Gaussian random walk
//! with drift `mu - xi^2/2` and step volatility `xi sqrt(eps)`. Rescaling to
//! unit steps, `eta_i = (y_i + drift * eps * i) / (sqrt(eps) xi)`, the joint
//! density of the walk depends on the interior slots through the quadratic
//! form `eta' M eta` with `M = tridiag(-1, 2, -1)`, the positive-definite
//! second-difference matrix. `M` has closed-form eigenpairs
//!
//! ```text
//! m_j = 4 sin^2(j pi / (2(n+1))),    O_ij = sqrt(2/(n+1)) sin(i j pi/(n+1)),
//! ```
//!
//! so conditioned interior paths are sampled from `n` independent standard
//! normal modes, and the marginal density of the maturity endpoint (the
//! "endpoint weight") falls out of the same factorization. No runtime
//! eigensolver is involved.

use std::f64::consts::PI;

use crate::model::{ModelParams, PricingError};

/// Largest supported interior slot count; the dense mode basis is O(n^2)
/// memory, which at this bound is already 512 MiB.
pub const MAX_SPECTRAL_N: usize = 8192;

/// Closed-form eigensystem of the interior precision matrix for `n` slots.
#[derive(Debug, Clone)]
pub struct SpectralBridge {
    n: usize,
    /// Ascending eigenvalues `m_j`, `j = 1..=n`.
    eigenvalues: Vec<f64>,
    /// `1/sqrt(m_j)`.
    inv_sqrt_eigenvalues: Vec<f64>,
    /// Row-major orthogonal basis; entry `(i, j)` at `[(i-1) n + (j-1)]`.
    basis: Vec<f64>,
    /// `sum_j ln m_j`; equals `ln(n+1)` analytically.
    log_det: f64,
}

impl SpectralBridge {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Basis entry `O_ij`, `i, j` in `1..=n`.
    #[inline]
    pub fn basis_at(&self, i: usize, j: usize) -> f64 {
        self.basis[(i - 1) * self.n + (j - 1)]
    }

    /// Row `i` (a slot index in `1..=n`) over all modes.
    #[inline]
    pub fn basis_row(&self, i: usize) -> &[f64] {
        &self.basis[(i - 1) * self.n..i * self.n]
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }
}

/// Builds the closed-form eigensystem for `n >= 1` interior slots.
pub fn build_spectral(n: usize) -> Result<SpectralBridge, PricingError> {
    if n < 1 {
        return Err(PricingError::InvalidInput(
            "spectral bridge needs at least one interior slot".into(),
        ));
    }
    if n > MAX_SPECTRAL_N {
        return Err(PricingError::InvalidInput(format!(
            "n = {n} exceeds the dense spectral basis limit {MAX_SPECTRAL_N}"
        )));
    }
    let period = 2 * (n + 1);
    let norm = (2.0 / (n + 1) as f64).sqrt();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut inv_sqrt = Vec::with_capacity(n);
    let mut log_det = 0.0;
    for j in 1..=n {
        let s = (0.5 * PI * j as f64 / (n + 1) as f64).sin();
        let m = 4.0 * s * s;
        eigenvalues.push(m);
        inv_sqrt.push(1.0 / m.sqrt());
        log_det += m.ln();
    }
    let mut basis = vec![0.0; n * n];
    for i in 1..=n {
        for j in 1..=n {
            // Reduce i*j mod the sine period in integers to keep large-n
            // arguments exact.
            let k = (i * j) % period;
            basis[(i - 1) * n + (j - 1)] = norm * (PI * k as f64 / (n + 1) as f64).sin();
        }
    }
    Ok(SpectralBridge {
        n,
        eigenvalues,
        inv_sqrt_eigenvalues: inv_sqrt,
        basis,
        log_det,
    })
}

/// Determinant of the k x k second-difference matrix via its three-term
/// recurrence; equals `k + 1`.
pub fn tridiag_det(k: usize) -> f64 {
    let (mut prev, mut cur) = (1.0f64, 2.0f64);
    if k == 0 {
        return prev;
    }
    for _ in 1..k {
        (prev, cur) = (cur, 2.0 * cur - prev);
    }
    cur
}

/// Endpoint-dependent pieces of the conditioned chain at one terminal
/// log-variance: the mode couplings, the endpoint marginal weight, and the
/// conditional mean path in mode coordinates.
#[derive(Debug, Clone)]
pub struct BridgeCoefficients {
    /// Mode coupling `g_j` of the two fixed endpoints.
    pub g: Vec<f64>,
    /// Log marginal density of the maturity endpoint `y0` given the
    /// valuation endpoint; `exp` of it integrates to one over `y0`.
    pub endpoint_weight_log: f64,
    /// Conditional mean of the interior path in rescaled coordinates,
    /// slot `i` at `[i - 1]`.
    pub mean_eta: Vec<f64>,
}

/// Rescaled endpoint values `(eta_maturity, eta_today)` for the lognormal
/// branch.
fn endpoint_etas(
    y_today: f64,
    y0: f64,
    eps: f64,
    params: &ModelParams,
    n: usize,
) -> (f64, f64) {
    let scale = eps.sqrt() * params.xi;
    let drift = params.lognormal_drift();
    let eta_mat = y0 / scale;
    let eta_today = (y_today + drift * eps * (n as f64 + 1.0)) / scale;
    (eta_mat, eta_today)
}

/// Couples the fixed endpoints `(y_today, y0)` into the interior modes.
///
/// Slot 1 of the interior is adjacent to the maturity endpoint and slot `n`
/// to the valuation endpoint, so mode `j` feels the coupling
/// `g_j = eta_maturity O_1j + eta_today O_nj`.
pub fn bridge_coefficients(
    y_today: f64,
    y0: f64,
    eps: f64,
    params: &ModelParams,
    spectral: &SpectralBridge,
) -> BridgeCoefficients {
    let n = spectral.n;
    let (eta_mat, eta_today) = endpoint_etas(y_today, y0, eps, params, n);
    let mut g = Vec::with_capacity(n);
    let mut coupling = 0.0;
    for j in 1..=n {
        let gj = eta_mat * spectral.basis_at(1, j) + eta_today * spectral.basis_at(n, j);
        coupling += gj * gj / spectral.eigenvalues[j - 1];
        g.push(gj);
    }
    let endpoint_weight_log = -0.5 * (eta_mat * eta_mat + eta_today * eta_today - coupling)
        - 0.5 * ((2.0 * PI * eps * params.xi * params.xi).ln() + spectral.log_det);
    let mut mean_eta = vec![0.0; n];
    for (i, m) in mean_eta.iter_mut().enumerate() {
        let row = spectral.basis_row(i + 1);
        let mut acc = 0.0;
        for j in 0..n {
            acc += row[j] * g[j] / spectral.eigenvalues[j];
        }
        *m = acc;
    }
    BridgeCoefficients {
        g,
        endpoint_weight_log,
        mean_eta,
    }
}

/// Samples one conditioned interior path from `n` standard normal modes,
/// writing all `n + 2` slots; the endpoints are pinned exactly to `y0`
/// (slot 0) and `y_today` (slot n + 1).
pub fn sample_variance_path_into(
    zeta: &[f64],
    coeffs: &BridgeCoefficients,
    spectral: &SpectralBridge,
    eps: f64,
    params: &ModelParams,
    y_today: f64,
    y0: f64,
    path: &mut [f64],
) {
    let n = spectral.n;
    assert_eq!(zeta.len(), n, "mode count must equal the interior slot count");
    assert_eq!(path.len(), n + 2, "path must have n + 2 slots");
    let scale = eps.sqrt() * params.xi;
    let drift = params.lognormal_drift();
    path[0] = y0;
    path[n + 1] = y_today;
    for i in 1..=n {
        let row = spectral.basis_row(i);
        let mut eta = coeffs.mean_eta[i - 1];
        for j in 0..n {
            eta += row[j] * zeta[j] * spectral.inv_sqrt_eigenvalues[j];
        }
        path[i] = scale * eta - drift * eps * i as f64;
    }
}

/// Allocating variant of [`sample_variance_path_into`].
pub fn sample_variance_path(
    zeta: &[f64],
    coeffs: &BridgeCoefficients,
    spectral: &SpectralBridge,
    eps: f64,
    params: &ModelParams,
    y_today: f64,
    y0: f64,
) -> Vec<f64> {
    let mut path = vec![0.0; spectral.n + 2];
    sample_variance_path_into(zeta, coeffs, spectral, eps, params, y_today, y0, &mut path);
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{StreamDomain, SubstreamRng};
    use approx::assert_relative_eq;

    fn lognormal(mu: f64, xi: f64) -> ModelParams {
        ModelParams::lognormal(0.04, mu, xi, 0.0)
    }

    #[test]
    fn smallest_bridges_have_known_eigensystems() {
        let s = build_spectral(1).unwrap();
        assert_relative_eq!(s.eigenvalues()[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(s.basis_at(1, 1), 1.0, epsilon = 1e-15);

        let s = build_spectral(3).unwrap();
        let expect = [2.0 - 2.0f64.sqrt(), 2.0, 2.0 + 2.0f64.sqrt()];
        for (m, e) in s.eigenvalues().iter().zip(expect) {
            assert_relative_eq!(*m, e, epsilon = 1e-14);
        }
        assert_relative_eq!(s.log_det().exp(), 4.0, epsilon = 1e-13);
    }

    #[test]
    fn closed_form_matches_dense_diagonalization() {
        for n in 1..=8usize {
            let s = build_spectral(n).unwrap();
            let m: nalgebra::DMatrix<f64> = nalgebra::DMatrix::from_fn(n, n, |a, b| {
                if a == b {
                    2.0
                } else if a.abs_diff(b) == 1 {
                    -1.0
                } else {
                    0.0
                }
            });
            let eig = m.symmetric_eigen();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| f64::total_cmp(&eig.eigenvalues[a], &eig.eigenvalues[b]));
            for (j, &dense_j) in order.iter().enumerate() {
                assert!(
                    (eig.eigenvalues[dense_j] - s.eigenvalues()[j]).abs() < 1e-10,
                    "eigenvalue {j} at n = {n}"
                );
                let col = eig.eigenvectors.column(dense_j);
                // Eigenvectors are defined up to sign; align on the largest
                // closed-form component.
                let anchor = (1..=n).max_by(|&a, &b| {
                    s.basis_at(a, j + 1)
                        .abs()
                        .total_cmp(&s.basis_at(b, j + 1).abs())
                }).unwrap();
                let sign = (col[anchor - 1] * s.basis_at(anchor, j + 1)).signum();
                for i in 1..=n {
                    assert!(
                        (sign * col[i - 1] - s.basis_at(i, j + 1)).abs() < 1e-10,
                        "eigenvector {j} component {i} at n = {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        for n in [1usize, 2, 5, 16, 33] {
            let s = build_spectral(n).unwrap();
            for a in 1..=n {
                for b in a..=n {
                    let dot: f64 = (1..=n).map(|j| s.basis_at(a, j) * s.basis_at(b, j)).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-12, "rows {a},{b} at n={n}: {dot}");
                }
            }
        }
    }

    #[test]
    fn determinant_recurrence_is_exact_up_to_ten_thousand() {
        for k in 0..=10_000usize {
            assert_eq!(tridiag_det(k), (k + 1) as f64, "k = {k}");
        }
    }

    #[test]
    fn eigenvalue_product_matches_determinant() {
        for n in [1usize, 2, 3, 8, 64, 513] {
            let s = build_spectral(n).unwrap();
            assert_relative_eq!(s.log_det(), ((n + 1) as f64).ln(), max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(build_spectral(0).is_err());
        assert!(build_spectral(MAX_SPECTRAL_N + 1).is_err());
    }

    #[test]
    fn zero_endpoint_etas_decouple_the_modes() {
        let p = lognormal(0.3, 0.5);
        let (n, eps) = (8usize, 0.1);
        let s = build_spectral(n).unwrap();
        // Endpoints whose rescaled coordinates vanish.
        let y0 = 0.0;
        let y_today = -p.lognormal_drift() * eps * (n as f64 + 1.0);
        let c = bridge_coefficients(y_today, y0, eps, &p, &s);
        assert!(c.g.iter().all(|&g| g.abs() < 1e-12));
        assert!(c.mean_eta.iter().all(|&m| m.abs() < 1e-12));
        let expect = -0.5 * ((2.0 * PI * eps * p.xi * p.xi).ln() + s.log_det());
        assert_relative_eq!(c.endpoint_weight_log, expect, epsilon = 1e-13);
    }

    /// One interior slot: integrating the two-step chain by hand gives the
    /// endpoint marginal as the Gaussian convolution of two steps, i.e.
    /// `y0 ~ N(y_today + 2 eps drift, 2 eps xi^2)`. Pins the sign with which
    /// each endpoint couples into the modes.
    #[test]
    fn single_slot_endpoint_weight_is_the_two_step_convolution() {
        for (mu, xi, y_today) in [(0.0, 0.5, -1.2), (0.4, 0.2, 0.3), (-0.6, 1.1, -2.4)] {
            let p = lognormal(mu, xi);
            let eps = 0.07;
            let s = build_spectral(1).unwrap();
            let mean = y_today + 2.0 * eps * p.lognormal_drift();
            let var = 2.0 * eps * xi * xi;
            for dy in [-2.0, -0.3, 0.0, 0.7, 1.9] {
                let y0 = mean + dy;
                let c = bridge_coefficients(y_today, y0, eps, &p, &s);
                let expect = -0.5 * dy * dy / var - 0.5 * (2.0 * PI * var).ln();
                assert_relative_eq!(c.endpoint_weight_log, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn endpoint_weight_mass_is_one() {
        for (n, mu, xi, y_today, tau) in [
            (1usize, 0.0, 0.5, -1.2, 1.0),
            (4, 0.3, 0.2, -2.0, 0.5),
            (16, -0.4, 0.8, 0.0, 2.0),
            (64, 0.0, 1.0, -1.0, 1.0),
        ] {
            let p = lognormal(mu, xi);
            let eps = tau / (n as f64 + 1.0);
            let s = build_spectral(n).unwrap();
            let center = y_today + p.lognormal_drift() * tau;
            let sigma = xi * tau.sqrt();
            let (lo, hi, count) = (center - 10.0 * sigma, center + 10.0 * sigma, 4001);
            let h = (hi - lo) / (count - 1) as f64;
            let mut mass = 0.0;
            for i in 0..count {
                let w = if i == 0 || i == count - 1 { 0.5 } else { 1.0 };
                let y0 = lo + h * i as f64;
                mass += w * bridge_coefficients(y_today, y0, eps, &p, &s)
                    .endpoint_weight_log
                    .exp();
            }
            mass *= h;
            assert!((mass - 1.0).abs() < 1e-6, "mass {mass} at n = {n}");
        }
    }

    #[test]
    fn zero_modes_give_the_linear_interpolation_for_any_drift() {
        for (mu, xi) in [(0.125, 0.5), (0.0, 0.5), (-0.8, 0.3)] {
            let p = lognormal(mu, xi);
            let (n, eps) = (7usize, 0.11);
            let s = build_spectral(n).unwrap();
            let (y_today, y0) = (-1.0, -2.3);
            let c = bridge_coefficients(y_today, y0, eps, &p, &s);
            let path = sample_variance_path(&vec![0.0; n], &c, &s, eps, &p, y_today, y0);
            for (i, &y) in path.iter().enumerate() {
                let interp = y0 + (y_today - y0) * i as f64 / (n as f64 + 1.0);
                assert_relative_eq!(y, interp, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn endpoints_are_pinned_bitwise() {
        let p = lognormal(0.2, 0.7);
        let (n, eps) = (5usize, 0.09);
        let s = build_spectral(n).unwrap();
        let (y_today, y0) = (-0.4f64, -1.9f64);
        let c = bridge_coefficients(y_today, y0, eps, &p, &s);
        let mut rng = SubstreamRng::new(5, StreamDomain::Bridge, 0, 0);
        let mut zeta = vec![0.0; n];
        for _ in 0..32 {
            rng.fill_standard_normal(&mut zeta);
            let path = sample_variance_path(&zeta, &c, &s, eps, &p, y_today, y0);
            assert_eq!(path[0].to_bits(), y0.to_bits());
            assert_eq!(path[n + 1].to_bits(), y_today.to_bits());
        }
    }

    #[test]
    fn fluctuations_scale_linearly_with_xi() {
        let (n, eps) = (6usize, 0.08);
        let s = build_spectral(n).unwrap();
        let (y_today, y0) = (-1.5, -0.7);
        let mut rng = SubstreamRng::new(11, StreamDomain::Bridge, 0, 0);
        let mut zeta = vec![0.0; n];
        rng.fill_standard_normal(&mut zeta);
        let zero = vec![0.0; n];
        let centered = |xi: f64| {
            let p = lognormal(0.1, xi);
            let c = bridge_coefficients(y_today, y0, eps, &p, &s);
            let path = sample_variance_path(&zeta, &c, &s, eps, &p, y_today, y0);
            let mean = sample_variance_path(&zero, &c, &s, eps, &p, y_today, y0);
            path.iter().zip(mean).map(|(a, b)| a - b).collect::<Vec<_>>()
        };
        let f1 = centered(0.4);
        let f2 = centered(0.8);
        for (a, b) in f1.iter().zip(&f2) {
            assert_relative_eq!(2.0 * a, *b, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    /// Two interior slots: the bridge sample moments must match the sequential
    /// chain law conditioned on its final value, worked out by Gaussian
    /// conditioning of the three-variable joint.
    #[test]
    fn two_slot_bridge_matches_conditioned_sequential_law() {
        let p = lognormal(0.15, 0.6);
        let (n, eps) = (2usize, 0.26);
        let s = build_spectral(n).unwrap();
        let y_today = -1.1;
        let drift = p.lognormal_drift();
        let step_var = eps * p.xi * p.xi;

        // Joint of (y1, y2) and y0 given y_today under forward stepping.
        let mean = |i: usize| y_today + (3 - i) as f64 * eps * drift; // slots 0..=2
        let cov = |i: usize, j: usize| (3 - i.max(j)) as f64 * step_var;
        let y0 = mean(0) + 0.9; // condition well off the drift path
        let cond_mean = |i: usize| mean(i) + cov(i, 0) / cov(0, 0) * (y0 - mean(0));
        let cond_cov = |i: usize, j: usize| cov(i, j) - cov(i, 0) * cov(j, 0) / cov(0, 0);

        let c = bridge_coefficients(y_today, y0, eps, &p, &s);
        let paths = 200_000usize;
        let mut zeta = vec![0.0; n];
        let (mut s1, mut s2, mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for v in 0..paths {
            let mut rng = SubstreamRng::new(77, StreamDomain::Bridge, 0, v as u64);
            rng.fill_standard_normal(&mut zeta);
            let path = sample_variance_path(&zeta, &c, &s, eps, &p, y_today, y0);
            let (a, b) = (path[1], path[2]);
            s1 += a;
            s2 += b;
            s11 += a * a;
            s22 += b * b;
            s12 += a * b;
        }
        let nf = paths as f64;
        let (m1, m2) = (s1 / nf, s2 / nf);
        let c11 = s11 / nf - m1 * m1;
        let c22 = s22 / nf - m2 * m2;
        let c12 = s12 / nf - m1 * m2;

        let band_mean = 4.0 * (cond_cov(1, 1) / nf).sqrt();
        assert!((m1 - cond_mean(1)).abs() < band_mean, "mean slot 1");
        assert!((m2 - cond_mean(2)).abs() < band_mean, "mean slot 2");
        let band_cov = |i: usize, j: usize| {
            4.0 * ((cond_cov(i, i) * cond_cov(j, j) + cond_cov(i, j).powi(2)) / nf).sqrt()
        };
        assert!((c11 - cond_cov(1, 1)).abs() < band_cov(1, 1), "var slot 1");
        assert!((c22 - cond_cov(2, 2)).abs() < band_cov(2, 2), "var slot 2");
        assert!((c12 - cond_cov(1, 2)).abs() < band_cov(1, 2), "cov slots 1,2");
    }

    /// The sampled path density times the endpoint weight must reproduce the
    /// sequential chain density evaluated on the same path — the bridge is a
    /// reparametrization, not an approximation.
    #[test]
    fn bridge_density_times_endpoint_weight_is_the_chain_density() {
        let mut rng = SubstreamRng::new(123, StreamDomain::Bridge, 0, 0);
        for n in 1..=6usize {
            let s = build_spectral(n).unwrap();
            for trial in 0..100 {
                let mu = 0.4 * rng.standard_normal();
                let xi = 0.3 + 0.2 * (trial % 4) as f64;
                let p = lognormal(mu, xi);
                let eps = 0.05 + 0.01 * (trial % 7) as f64;
                let y_today = -1.0 + rng.standard_normal();
                let y0 = y_today + p.lognormal_drift() * eps * (n as f64 + 1.0)
                    + xi * (eps * (n as f64 + 1.0)).sqrt() * rng.standard_normal();
                let c = bridge_coefficients(y_today, y0, eps, &p, &s);
                let mut zeta = vec![0.0; n];
                rng.fill_standard_normal(&mut zeta);
                let path = sample_variance_path(&zeta, &c, &s, eps, &p, y_today, y0);

                let scale = eps.sqrt() * xi;
                // Bridge density of the interior slots: standard normal modes
                // pushed through mode mixing (unit Jacobian), mode scaling
                // (det M^{-1/2}), and the eta -> y rescaling.
                let mut lhs = 0.5 * s.log_det() - (n as f64) * scale.ln()
                    + c.endpoint_weight_log;
                for &z in &zeta {
                    lhs += -0.5 * z * z - 0.5 * (2.0 * PI).ln();
                }
                // Sequential chain density of the same path.
                let mut rhs = 0.0;
                for i in (0..=n).rev() {
                    let resid = (path[i] - path[i + 1] - eps * p.lognormal_drift()) / scale;
                    rhs += -0.5 * resid * resid - (scale * (2.0 * PI).sqrt()).ln();
                }
                let tol = 1e-8 * rhs.abs().max(1.0);
                assert!(
                    (lhs - rhs).abs() < tol,
                    "density mismatch at n = {n}, trial {trial}: {lhs} vs {rhs}"
                );
            }
        }
    }
}
