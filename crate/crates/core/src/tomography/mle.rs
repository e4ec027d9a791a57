use nalgebra::{Cholesky, SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linear::{linear_inversion, psd_projection};
use super::{TomographyData, TomographySettingSet};
use crate::error::{Error, Result};
use crate::polarization::{bell_state, fidelity, hermitian_part, BellState, DensityMatrix, Matrix4c};

/// Real parameters of the lower-triangular factor `T`: four real diagonal
/// entries, then real and imaginary parts of the six sub-diagonal entries.
pub const PARAMETERS: usize = 16;

type Params = SVector<f64, PARAMETERS>;


const LOWER: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

fn factor(x: &[f64]) -> Matrix4c {
    let mut t = Matrix4c::zeros();
    for d in 0..4 {
        t[(d, d)] = Complex64::new(x[d], 0.0);
    }
    for (k, &(r, c)) in LOWER.iter().enumerate() {
        t[(r, c)] = Complex64::new(x[4 + 2 * k], x[5 + 2 * k]);
    }
    t
}

fn unfactor(t: &Matrix4c) -> Params {
    let mut x = Params::zeros();
    for d in 0..4 {
        x[d] = t[(d, d)].re;
    }
    for (k, &(r, c)) in LOWER.iter().enumerate() {
        x[4 + 2 * k] = t[(r, c)].re;
        x[5 + 2 * k] = t[(r, c)].im;
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub grad_tol: f64,
    pub f_tol: f64,
    pub max_iter: usize,
    /// Model accidentals as a known background inside the likelihood
    /// instead of subtracting them beforehand.
    pub background_in_likelihood: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            grad_tol: 1e-8,
            f_tol: 1e-12,
            max_iter: 2000,
            background_in_likelihood: false,
        }
    }
}

/// Poisson deviance `Σ μ_k − n_k + n_k·ln(n_k/μ_k)` over the factor
/// parameters, with counts rescaled to unit total. This is the negative
/// log-likelihood measured from the saturated model, so it vanishes on
/// perfectly consistent data. The expected count of setting `k` is
/// `t_k·Tr(T†T·Π_k) (+ b_k)`, so `Tr(T†T)` carries the shared flux.
#[derive(Debug, Clone)]
pub struct NegLogLikelihood {
    projectors: Vec<Matrix4c>,
    counts: Vec<f64>,
    exposure: Vec<f64>,
    background: Vec<f64>,
    scale: f64,
}

impl NegLogLikelihood {
    pub fn new(data: &TomographyData, settings: &TomographySettingSet, background_in_likelihood: bool) -> Result<Self> {
        if data.len() != settings.len() {
            return Err(Error::param(
                "data",
                format!("{} counts for {} settings", data.len(), settings.len()),
            ));
        }
        let scale = data.total();
        if !(scale > 0.0) {
            return Err(Error::NoData);
        }
        let mean_t = data.exposure_s.iter().sum::<f64>() / data.len() as f64;
        Ok(NegLogLikelihood {
            projectors: settings.settings().iter().map(|s| s.projector).collect(),
            counts: data.counts.iter().map(|c| c / scale).collect(),
            exposure: data.exposure_s.iter().map(|t| t / mean_t).collect(),
            background: if background_in_likelihood {
                data.accidentals.iter().map(|b| b / scale).collect()
            } else {
                vec![0.0; data.len()]
            },
            scale,
        })
    }

    fn means(&self, a: &Matrix4c) -> impl Iterator<Item = f64> + '_ {
        let a = *a;
        self.projectors
            .iter()
            .zip(&self.exposure)
            .zip(&self.background)
            .map(move |((p, t), b)| t * (a * p).trace().re + b)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let t = factor(x);
        let a = t.adjoint() * t;
        let mut f = 0.0;
        for (mu, n) in self.means(&a).zip(&self.counts) {
            if *n > 0.0 {
                if mu <= 0.0 {
                    return f64::INFINITY;
                }
                f += n * (n / mu).ln() - n;
            }
            f += mu;
        }
        f
    }

    /// `∂f/∂x` from `∂f/∂A = G = Σ (1 − n_k/μ_k) t_k Π_k`, which pulls back
    /// through `A = T†T` to `2·T·G`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let t = factor(x);
        let a = t.adjoint() * t;
        let g = self
            .means(&a)
            .zip(&self.counts)
            .zip(self.projectors.iter().zip(&self.exposure))
            .fold(Matrix4c::zeros(), |acc, ((mu, n), (p, w))| {
                let r = if *n > 0.0 { 1.0 - n / mu } else { 1.0 };
                acc + p.scale(r * w)
            });
        let tg = t * g;
        let mut out = vec![0.0; PARAMETERS];
        for d in 0..4 {
            out[d] = 2.0 * tg[(d, d)].re;
        }
        for (k, &(r, c)) in LOWER.iter().enumerate() {
            out[4 + 2 * k] = 2.0 * tg[(r, c)].re;
            out[5 + 2 * k] = 2.0 * tg[(r, c)].im;
        }
        out
    }

    /// Poisson log-likelihood `Σ n ln μ − μ` of the original counts for a
    /// scaled deviance `f`.
    fn log_likelihood(&self, f: f64) -> f64 {
        let s = self.scale;
        let saturated: f64 = self
            .counts
            .iter()
            .filter(|&&n| n > 0.0)
            .map(|&n| s * n * (s * n).ln() - s * n)
            .sum();
        saturated - s * f
    }

    /// Factor parameters whose normalized `T†T` equals `rho`, at flux
    /// matching the data.
    pub fn parameters_for(&self, rho: &DensityMatrix) -> Params {
        let mean: f64 = self.means(rho.matrix()).sum();
        let flux = if mean > 0.0 { self.counts.iter().sum::<f64>() / mean } else { 1.0 };
        // T†T with T lower is a Cholesky factorization in reversed index order
        let rev = |m: &Matrix4c| Matrix4c::from_fn(|r, c| m[(3 - r, 3 - c)]);
        let a = rev(&rho.matrix().scale(flux));
        let l = Cholesky::new(hermitian_part(&a)).expect("positive definite start").l();
        unfactor(&rev(&l).adjoint())
    }

    pub fn density(&self, x: &[f64]) -> Result<DensityMatrix> {
        let t = factor(x);
        let a = t.adjoint() * t;
        let tr = a.trace().re;
        if !(tr > 0.0) {
            return Err(Error::DegenerateState);
        }
        Ok(DensityMatrix::from_constructed(a.unscale(tr)))
    }
}

/// Sorts settings by their projector entries so that every floating-point
/// sum runs in the same order whatever order the caller used.
fn canonical_order(data: &TomographyData, settings: &TomographySettingSet) -> Result<(TomographyData, TomographySettingSet)> {
    if data.len() != settings.len() {
        return Err(Error::param(
            "data",
            format!("{} counts for {} settings", data.len(), settings.len()),
        ));
    }
    let key = |k: usize| {
        let p = &settings.settings()[k].projector;
        let mut v: Vec<f64> = p.iter().flat_map(|z| [z.re, z.im]).collect();
        v.extend([data.counts[k], data.accidentals[k], data.exposure_s[k]]);
        v
    };
    let mut order: Vec<usize> = (0..settings.len()).collect();
    order.sort_by(|&a, &b| {
        key(a)
            .iter()
            .zip(key(b).iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok((data.permuted(&order), settings.permuted(&order)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    pub fidelity_to_bell: f64,
    pub log_likelihood: f64,
    /// Log-likelihood after each accepted step, starting point first.
    pub likelihood_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximum-likelihood state under `ρ = T†T/Tr(T†T)`, by BFGS from the
/// PSD-projected linear-inversion estimate.
pub fn mle_reconstruct(
    data: &TomographyData,
    settings: &TomographySettingSet,
    opts: &MleOptions,
) -> Result<ReconstructionResult> {
    let (data, settings) = canonical_order(data, settings)?;
    let (data, settings) = (&data, &settings);
    let nll = NegLogLikelihood::new(data, settings, opts.background_in_likelihood)?;
    let start = {
        let lin = linear_inversion(data, settings)?;
        let proj = psd_projection(&lin)?;
        // keep the start strictly inside the cone so its factor exists
        let eps = 1e-6;
        DensityMatrix::from_constructed(proj.matrix().scale(1.0 - eps) + Matrix4c::identity().scale(eps / 4.0))
    };
    let mut x = nll.parameters_for(&start);
    let mut f = nll.value(x.as_slice());
    let mut g = Params::from_column_slice(&nll.gradient(x.as_slice()));
    let mut h = SMatrix::<f64, PARAMETERS, PARAMETERS>::identity();
    let mut fresh = true;
    let mut history = vec![nll.log_likelihood(f)];
    let mut small_changes = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if g.norm() < opts.grad_tol {
            converged = true;
            break;
        }
        let mut p = -(h * g);
        let mut slope = g.dot(&p);
        if slope >= 0.0 {
            h = SMatrix::identity();
            fresh = true;
            p = -g;
            slope = -g.norm_squared();
        }
        let mut alpha = 1.0;
        let accepted = loop {
            let trial = x + p * alpha;
            let ft = nll.value(trial.as_slice());
            if ft.is_finite() && ft <= f + 1e-4 * alpha * slope {
                break Some((trial, ft));
            }
            alpha *= 0.5;
            if alpha < 1e-20 {
                break None;
            }
        };
        let Some((x_new, f_new)) = accepted else {
            if fresh {
                // steepest descent cannot lower f any further at working precision
                converged = true;
                break;
            }
            h = SMatrix::identity();
            fresh = true;
            continue;
        };
        iterations += 1;
        let g_new = Params::from_column_slice(&nll.gradient(x_new.as_slice()));
        let s = x_new - x;
        let y = g_new - g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            if fresh {
                h = SMatrix::identity() * (sy / y.norm_squared());
            }
            let rho = 1.0 / sy;
            let hy = h * y;
            h += (s * s.transpose()) * (rho * rho * y.dot(&hy) + rho) - (hy * s.transpose() + s * hy.transpose()) * rho;
            fresh = false;
        }
        let scale = f.abs().max(f_new.abs());
        let change = if scale > 0.0 { (f - f_new).abs() / scale } else { 0.0 };
        x = x_new;
        f = f_new;
        g = g_new;
        history.push(nll.log_likelihood(f));
        small_changes = if change < opts.f_tol { small_changes + 1 } else { 0 };
        if small_changes >= 2 {
            converged = true;
            break;
        }
    }

    let rho = nll.density(x.as_slice())?;
    let fidelity_to_bell = fidelity(&rho, &bell_state(BellState::PhiPlus))?;
    Ok(ReconstructionResult {
        rho,
        fidelity_to_bell,
        log_likelihood: nll.log_likelihood(f),
        likelihood_history: history,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{derive_seed, simulate_counts, DetectorConfig};
    use crate::polarization::densify;
    use crate::tomography::{random_density_matrix, tomo_settings};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn noiseless(rho: &DensityMatrix, total: f64) -> TomographyData {
        TomographyData::expected(rho, &tomo_settings(), total).unwrap()
    }

    #[test]
    fn factor_round_trip() {
        let x: Vec<f64> = (0..16).map(|k| k as f64 * 0.1 - 0.7).collect();
        assert_eq!(unfactor(&factor(&x)).as_slice(), x.as_slice());
    }

    #[test]
    fn start_parameters_reproduce_state() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let rho = random_density_matrix(&mut rng);
        let nll = NegLogLikelihood::new(&noiseless(&rho, 1e4), &tomo_settings(), false).unwrap();
        let x = nll.parameters_for(&rho);
        assert!((nll.density(x.as_slice()).unwrap().matrix() - rho.matrix()).camax() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let rho = random_density_matrix(&mut rng);
        let nll = NegLogLikelihood::new(&noiseless(&rho, 1e5), &tomo_settings(), false).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g = nll.gradient(&x);
            for j in 0..16 {
                let h = 1e-6;
                let mut up = x.clone();
                let mut dn = x.clone();
                up[j] += h;
                dn[j] -= h;
                let fd = (nll.value(&up) - nll.value(&dn)) / (2.0 * h);
                assert!((fd - g[j]).abs() <= 1e-5 * fd.abs().max(1e-3), "{j}: {fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn noiseless_bell_counts() {
        let phi = densify(&bell_state(BellState::PhiPlus)).unwrap().rho;
        let r = mle_reconstruct(&noiseless(&phi, 16e6), &tomo_settings(), &MleOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.fidelity_to_bell >= 0.9999, "{}", r.fidelity_to_bell);
    }

    #[test]
    fn flat_counts_give_maximally_mixed() {
        let data = TomographyData::from_counts(vec![1000.0; 16]).unwrap();
        let r = mle_reconstruct(&data, &tomo_settings(), &MleOptions::default()).unwrap();
        assert!((r.fidelity_to_bell - 0.25).abs() < 0.01);
        assert!((r.rho.matrix() - DensityMatrix::maximally_mixed().matrix()).camax() < 1e-6);
    }

    #[test]
    fn zero_counts_are_rejected() {
        let data = TomographyData::from_counts(vec![0.0; 16]).unwrap();
        assert!(matches!(mle_reconstruct(&data, &tomo_settings(), &MleOptions::default()), Err(Error::NoData)));
    }

    #[test]
    fn matches_linear_inversion_on_consistent_data() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let settings = tomo_settings();
        for _ in 0..10 {
            let rho = random_density_matrix(&mut rng);
            let data = noiseless(&rho, 1e6);
            let lin = linear_inversion(&data, &settings).unwrap();
            let r = mle_reconstruct(&data, &settings, &MleOptions::default()).unwrap();
            assert!(r.converged);
            assert!((r.rho.matrix() - lin).camax() < 1e-6);
        }
    }

    #[test]
    fn werner_state_from_poisson_counts() {
        // F = (1 + 3V)/4 = 0.971
        let v = (4.0 * 0.971 - 1.0) / 3.0;
        let rho = DensityMatrix::werner(v).unwrap();
        let settings = tomo_settings();
        let det = DetectorConfig::ideal();
        let p_total: f64 = settings.settings().iter().map(|s| rho.expectation(&s.projector)).sum();
        let pair_rate = 1e5 / p_total;
        let records: Vec<_> = settings
            .settings()
            .iter()
            .enumerate()
            .map(|(k, s)| simulate_counts(&rho, &s.analyzer, pair_rate, 1.0, &det, derive_seed(4, "werner", k as u64)).unwrap())
            .collect();
        let data = crate::tomography::subtract_accidentals(&TomographyData::from_records(&records, &settings).unwrap());
        let r = mle_reconstruct(&data, &settings, &MleOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.fidelity_to_bell - 0.971).abs() < 0.01, "{}", r.fidelity_to_bell);
    }

    #[test]
    fn likelihood_never_decreases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rho = random_density_matrix(&mut rng);
        let mut data = noiseless(&rho, 2e3);
        for c in &mut data.counts {
            *c = c.round();
        }
        let r = mle_reconstruct(&data, &tomo_settings(), &MleOptions::default()).unwrap();
        assert!(r.likelihood_history.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs()));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let rho = random_density_matrix(&mut rng);
        let mut data = noiseless(&rho, 1e4);
        data.counts[3] *= 1.7;
        let opts = MleOptions { max_iter: 1, ..MleOptions::default() };
        let r = mle_reconstruct(&data, &tomo_settings(), &opts).unwrap();
        assert!(!r.converged);
        assert!(r.rho.validate().is_ok());
    }

    #[test]
    fn background_mode_matches_presubtraction_on_clean_data() {
        let rho = DensityMatrix::werner(0.9).unwrap();
        let settings = tomo_settings();
        let mut data = noiseless(&rho, 1e5);
        data.accidentals = vec![50.0; 16];
        for c in &mut data.counts {
            *c += 50.0;
        }
        let opts = MleOptions { background_in_likelihood: true, ..MleOptions::default() };
        let r = mle_reconstruct(&data, &settings, &opts).unwrap();
        assert!((r.rho.matrix() - rho.matrix()).camax() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn output_is_always_a_state(counts in proptest::collection::vec(0.0..1e4f64, 16)) {
            prop_assume!(counts.iter().sum::<f64>() > 0.0);
            let data = TomographyData::from_counts(counts).unwrap();
            if let Ok(r) = mle_reconstruct(&data, &tomo_settings(), &MleOptions::default()) {
                prop_assert!(r.rho.validate().is_ok());
                prop_assert!(r.rho.eigenvalues()[0] >= -1e-12);
            }
        }

        #[test]
        fn relabeling_settings_is_harmless(seed in 0u64..1000, shift in 1usize..16) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density_matrix(&mut rng);
            let settings = tomo_settings();
            let mut data = noiseless(&rho, 5e3);
            for c in &mut data.counts {
                *c = c.round();
            }
            let order: Vec<usize> = (0..16).map(|k| (k * 7 + shift) % 16).collect();
            let a = mle_reconstruct(&data, &settings, &MleOptions::default()).unwrap();
            let b = mle_reconstruct(&data.permuted(&order), &settings.permuted(&order), &MleOptions::default()).unwrap();
            prop_assert!((a.rho.matrix() - b.rho.matrix()).camax() < 1e-9);
        }
    }
}
