//! Rank-mu CMA-ES with cumulative step-size adaptation.
//!
//! Minimises. Parameters follow Hansen's tutorial defaults; positive
//! recombination weights only.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Smallest eigenvalue the covariance is allowed to keep.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Default population size for dimension `n`: 4 + floor(3 ln n).
pub fn default_population(n: usize) -> usize {
    4 + (3.0 * (n as f64).ln()).floor() as usize
}

#[derive(Debug, Clone)]
pub struct CmaState {
    pub dim: usize,
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub cov: DMatrix<f64>,
    pub path_sigma: DVector<f64>,
    pub path_c: DVector<f64>,
    pub generation: usize,
    pub population: usize,
    /// Recombination weights of the best `mu` candidates, summing to one.
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub c_mu: f64,
    chi_n: f64,
    /// Eigenvectors (columns) and square roots of eigenvalues of `cov`.
    basis: DMatrix<f64>,
    scales: DVector<f64>,
    /// Number of times an eigenvalue had to be raised to [`EIGEN_FLOOR`].
    pub repairs: usize,
    pending: bool,
}

impl CmaState {
    pub fn new(mean: &[f64], sigma0: f64, population: usize) -> Result<Self> {
        let n = mean.len();
        if n == 0 {
            return Err(Error::invalid_arg("search dimension must be positive"));
        }
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(Error::invalid_arg(format!("initial step size must be positive, got {sigma0}")));
        }
        if population < 2 {
            return Err(Error::invalid_arg(format!("population must be at least 2, got {population}")));
        }
        let nf = n as f64;
        let mu = population / 2;
        let raw: Vec<f64> =
            (1..=mu).map(|i| ((population as f64 + 1.0) / 2.0).ln() - (i as f64).ln()).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let c_1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));

        Ok(Self {
            dim: n,
            mean: DVector::from_column_slice(mean),
            sigma: sigma0,
            cov: DMatrix::identity(n, n),
            path_sigma: DVector::zeros(n),
            path_c: DVector::zeros(n),
            generation: 0,
            population,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
            basis: DMatrix::identity(n, n),
            scales: DVector::from_element(n, 1.0),
            repairs: 0,
            pending: false,
        })
    }

    /// Draws a generation of candidates, mean + sigma * N(0, C).
    pub fn ask<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        if self.pending {
            return Err(Error::InvalidState("ask called twice without tell".into()));
        }
        self.pending = true;
        let n = self.dim;
        let out = (0..self.population)
            .map(|_| {
                let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let y = &self.basis * z.component_mul(&self.scales);
                (&self.mean + y * self.sigma).iter().copied().collect()
            })
            .collect();
        Ok(out)
    }

    /// Updates the distribution from a full generation of `candidates` and
    /// their `fitnesses` (lower is better). Order does not matter: candidates
    /// are ranked by fitness, ties broken by the candidate coordinates.
    pub fn tell(&mut self, candidates: &[Vec<f64>], fitnesses: &[f64]) -> Result<()> {
        if !self.pending {
            return Err(Error::InvalidState("tell called without a matching ask".into()));
        }
        if candidates.len() != self.population || fitnesses.len() != self.population {
            return Err(Error::invalid_arg(format!(
                "expected {} candidates and fitnesses, got {} and {}",
                self.population,
                candidates.len(),
                fitnesses.len()
            )));
        }
        if candidates.iter().any(|c| c.len() != self.dim) {
            return Err(Error::invalid_arg("candidate dimension mismatch"));
        }
        if fitnesses.iter().any(|f| f.is_nan()) {
            return Err(Error::invalid_arg("fitness is NaN"));
        }
        self.pending = false;

        let mut order: Vec<usize> = (0..self.population).collect();
        order.sort_by(|&i, &j| {
            fitnesses[i]
                .total_cmp(&fitnesses[j])
                .then_with(|| {
                    candidates[i]
                        .iter()
                        .zip(&candidates[j])
                        .map(|(a, b)| a.total_cmp(b))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        });

        let n = self.dim;
        let nf = n as f64;
        let steps: Vec<DVector<f64>> = order
            .iter()
            .take(self.weights.len())
            .map(|&i| (DVector::from_column_slice(&candidates[i]) - &self.mean) / self.sigma)
            .collect();
        let mut y_w = DVector::zeros(n);
        for (w, y) in self.weights.iter().zip(&steps) {
            y_w += y * *w;
        }
        self.mean += &y_w * self.sigma;

        // C^{-1/2} y_w = B D^{-1} B^T y_w
        let inv_sqrt_y = &self.basis * (self.basis.transpose() * &y_w).component_div(&self.scales);
        self.path_sigma = &self.path_sigma * (1.0 - self.c_sigma)
            + inv_sqrt_y * (self.c_sigma * (2.0 - self.c_sigma) * self.mu_eff).sqrt();
        let gen = (self.generation + 1) as f64;
        let ps_norm = self.path_sigma.norm();
        let h_sigma = ps_norm / (1.0 - (1.0 - self.c_sigma).powf(2.0 * gen)).sqrt()
            < (1.4 + 2.0 / (nf + 1.0)) * self.chi_n;
        let h = if h_sigma { 1.0 } else { 0.0 };
        self.path_c = &self.path_c * (1.0 - self.c_c)
            + &y_w * (h * (self.c_c * (2.0 - self.c_c) * self.mu_eff).sqrt());

        let delta = (1.0 - h) * self.c_c * (2.0 - self.c_c);
        let mut cov = &self.cov * (1.0 + self.c_1 * delta - self.c_1 - self.c_mu)
            + (&self.path_c * self.path_c.transpose()) * self.c_1;
        for (w, y) in self.weights.iter().zip(&steps) {
            cov += (y * y.transpose()) * (self.c_mu * w);
        }
        self.cov = cov;
        self.sigma *= ((self.c_sigma / self.d_sigma) * (ps_norm / self.chi_n - 1.0)).exp();
        self.generation += 1;
        self.decompose();
        Ok(())
    }

    /// Symmetrises the covariance, floors its spectrum and refreshes the
    /// sampling basis.
    fn decompose(&mut self) {
        let sym = (&self.cov + self.cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let mut values = eig.eigenvalues.clone();
        let mut floored = false;
        for v in values.iter_mut() {
            if !(*v >= EIGEN_FLOOR) {
                *v = EIGEN_FLOOR;
                floored = true;
            }
        }
        if floored {
            self.repairs += 1;
        }
        let b = eig.eigenvectors;
        let rebuilt = &b * DMatrix::from_diagonal(&values) * b.transpose();
        self.cov = (&rebuilt + rebuilt.transpose()) * 0.5;
        self.scales = values.map(f64::sqrt);
        self.basis = b;
    }

    /// Smallest eigenvalue of the current covariance.
    pub fn min_eigenvalue(&self) -> f64 {
        self.scales.iter().map(|s| s * s).fold(f64::INFINITY, f64::min)
    }

    pub fn is_symmetric(&self) -> bool {
        (&self.cov - self.cov.transpose()).amax() == 0.0
    }
}
