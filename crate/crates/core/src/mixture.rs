//! Tikhonov mixtures and adaptive mixture reduction.
//!
//! A mixture holds its coefficients in natural-log domain; every operation
//! that returns a mixture returns it normalized. [`TikhonovMixture::reduce`]
//! implements the greedy KL-threshold clustering that keeps the canonical
//! model order adaptive: heavy components lead clusters, every component
//! within `mu` nats of the lead is merged into it by circular mean/variance
//! matching, and a hard cap `n_max` bounds the output order.

use crate::dirstat::{cmvm, tikhonov_kl, TikhonovComponent};
use crate::logspace::log_sum_exp_slice;
use std::fmt;

/// Relative weight floor for the reduction, in nats: a component whose log
/// weight sits this far below the heaviest one carries no usable probability
/// mass, so it is folded into the lead cluster instead of occupying a cluster
/// of its own. Without a floor, hypotheses whose weights have decayed to
/// ~e-300 would still hold mixture slots and inflate the model order; with
/// it, the density perturbation is bounded by `order · e^-WEIGHT_FLOOR_NATS`,
/// far below every tolerance in the test suite.
pub const WEIGHT_FLOOR_NATS: f64 = 9.0;

/// Errors for malformed mixtures.
#[derive(Debug, Clone, PartialEq)]
pub enum MixtureError {
    /// Component and weight lists differ in length, or are empty.
    Shape { components: usize, weights: usize },
    /// Every weight is zero; the mixture cannot be normalized.
    DegenerateWeights,
}

impl fmt::Display for MixtureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MixtureError::Shape { components, weights } => {
                write!(f, "mixture shape invalid: {components} components, {weights} weights")
            }
            MixtureError::DegenerateWeights => write!(f, "all mixture weights are zero"),
        }
    }
}

impl std::error::Error for MixtureError {}

/// Parameters of the mixture reduction step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionConfig {
    /// KL clustering threshold in nats; components within `mu` of the
    /// cluster lead are merged into it. `f64::INFINITY` collapses everything.
    pub mu: f64,
    /// Hard cap on the output mixture order.
    pub n_max: usize,
}

impl ReductionConfig {
    /// `mu` must be nonnegative (NaN rejected), `n_max` at least 1.
    pub fn new(mu: f64, n_max: usize) -> Result<Self, MixtureError> {
        if !(mu >= 0.0) || n_max == 0 {
            return Err(MixtureError::Shape { components: n_max, weights: 0 });
        }
        Ok(ReductionConfig { mu, n_max })
    }

    /// Collapse-to-one configuration used by the single-component tracker.
    pub fn collapse_to_one() -> Self {
        ReductionConfig { mu: f64::INFINITY, n_max: 1 }
    }
}

/// A weighted mixture of Tikhonov components with log-domain coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TikhonovMixture {
    components: Vec<TikhonovComponent>,
    log_weights: Vec<f64>,
}

impl TikhonovMixture {
    /// Builds a mixture from parallel component/log-weight lists.
    /// The result is not normalized; see [`TikhonovMixture::normalized`].
    pub fn new(
        components: Vec<TikhonovComponent>,
        log_weights: Vec<f64>,
    ) -> Result<Self, MixtureError> {
        if components.is_empty() || components.len() != log_weights.len() {
            return Err(MixtureError::Shape {
                components: components.len(),
                weights: log_weights.len(),
            });
        }
        Ok(TikhonovMixture { components, log_weights })
    }

    /// Single-component mixture with weight 1.
    pub fn single(component: TikhonovComponent) -> Self {
        TikhonovMixture { components: vec![component], log_weights: vec![0.0] }
    }

    /// The uniform distribution as an order-1 mixture.
    pub fn uniform() -> Self {
        TikhonovMixture::single(TikhonovComponent::uniform())
    }

    /// Number of components.
    #[inline]
    pub fn order(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn components(&self) -> &[TikhonovComponent] {
        &self.components
    }

    #[inline]
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Shifts the log weights so the weights sum to exactly 1.
    ///
    /// Idempotent; component parameters are untouched. Fails if every weight
    /// is zero (`-inf` log weight).
    pub fn normalized(mut self) -> Result<Self, MixtureError> {
        let lse = log_sum_exp_slice(&self.log_weights);
        if lse == f64::NEG_INFINITY || lse.is_nan() {
            return Err(MixtureError::DegenerateWeights);
        }
        if lse != 0.0 {
            for lw in &mut self.log_weights {
                *lw -= lse;
            }
        }
        Ok(self)
    }

    /// Mixture density `Σ_i w_i t_i(theta)`.
    pub fn evaluate(&self, theta: f64) -> f64 {
        self.components
            .iter()
            .zip(&self.log_weights)
            .map(|(c, &lw)| (lw + c.log_density(theta)).exp())
            .sum()
    }

    /// Greedy KL-threshold mixture reduction.
    ///
    /// Repeatedly selects the heaviest remaining component as the cluster
    /// lead (ties broken by lowest index), gathers every remaining component
    /// whose KL divergence to the lead is at most `cfg.mu`, merges the
    /// cluster with CMVM under its renormalized weights, and assigns the
    /// cluster the summed weight. When the `cfg.n_max`-th cluster has been
    /// emitted, any residual components are folded into it. Singleton
    /// clusters pass through unchanged, so with `mu = 0` the reduction is
    /// the identity up to reordering by weight (for components above the
    /// [`WEIGHT_FLOOR_NATS`] floor; numerically dead components always merge
    /// into the first cluster).
    pub fn reduce(&self, cfg: &ReductionConfig) -> TikhonovMixture {
        debug_assert!(cfg.n_max >= 1 && cfg.mu >= 0.0);
        if self.order() == 1 {
            return self.clone().normalized().expect("order-1 mixture normalizes");
        }

        struct Pending {
            component: TikhonovComponent,
            log_weight: f64,
        }
        let max_log_w = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let floor = max_log_w - WEIGHT_FLOOR_NATS;
        let mut remaining: Vec<Pending> = Vec::with_capacity(self.order());
        let mut dead: Vec<Pending> = Vec::new();
        for (&component, &log_weight) in self.components.iter().zip(&self.log_weights) {
            let p = Pending { component, log_weight };
            if log_weight < floor {
                dead.push(p);
            } else {
                remaining.push(p);
            }
        }

        let mut out_components: Vec<TikhonovComponent> = Vec::new();
        let mut out_log_weights: Vec<f64> = Vec::new();

        while !remaining.is_empty() {
            // argmax over weights, lowest index on ties
            let lead_idx = remaining
                .iter()
                .enumerate()
                .fold(0usize, |best, (i, p)| {
                    if p.log_weight > remaining[best].log_weight { i } else { best }
                });
            let lead = remaining[lead_idx].component;

            // snapshot pass over the current remainder
            let cluster: Vec<usize> = remaining
                .iter()
                .enumerate()
                .filter(|&(i, p)| i == lead_idx || tikhonov_kl(p.component, lead) <= cfg.mu)
                .map(|(i, _)| i)
                .collect();

            // the first (heaviest) cluster also absorbs the floored components
            let absorbed = if out_components.is_empty() { dead.as_slice() } else { &[] };
            let (merged, beta_log) = merge_cluster(
                cluster
                    .iter()
                    .map(|&i| (remaining[i].component, remaining[i].log_weight))
                    .chain(absorbed.iter().map(|p| (p.component, p.log_weight))),
            );
            // remove back-to-front so earlier indices stay valid; `remove`
            // keeps the residual in original order for the tie rule
            for &i in cluster.iter().rev() {
                remaining.remove(i);
            }
            out_components.push(merged);
            out_log_weights.push(beta_log);

            if out_components.len() == cfg.n_max && !remaining.is_empty() {
                // fold the residual into the final cluster
                let last_c = out_components.pop().expect("cluster just pushed");
                let last_w = out_log_weights.pop().expect("cluster just pushed");
                let (merged, beta_log) = merge_cluster(
                    std::iter::once((last_c, last_w))
                        .chain(remaining.iter().map(|p| (p.component, p.log_weight))),
                );
                out_components.push(merged);
                out_log_weights.push(beta_log);
                remaining.clear();
            }
        }

        TikhonovMixture { components: out_components, log_weights: out_log_weights }
            .normalized()
            .expect("reduction output has positive total weight")
    }
}

/// Merges `(component, log_weight)` pairs with CMVM; returns the merged
/// component and the cluster's total log weight. Singletons pass through
/// bitwise unchanged.
fn merge_cluster(
    items: impl Iterator<Item = (TikhonovComponent, f64)>,
) -> (TikhonovComponent, f64) {
    let items: Vec<(TikhonovComponent, f64)> = items.collect();
    debug_assert!(!items.is_empty());
    if items.len() == 1 {
        return (items[0].0, items[0].1);
    }
    let logs: Vec<f64> = items.iter().map(|&(_, lw)| lw).collect();
    let beta_log = log_sum_exp_slice(&logs);
    // softmax within the cluster; the lead always carries finite weight
    let weights: Vec<f64> = logs.iter().map(|&lw| (lw - beta_log).exp()).collect();
    let comps: Vec<TikhonovComponent> = items.iter().map(|&(c, _)| c).collect();
    let merged = cmvm(&weights, &comps).expect("cluster weights are a valid softmax");
    (merged, beta_log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirstat::TikhonovComponent;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::PI;

    fn quad<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
        let h = 2.0 * PI / n as f64;
        (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    fn rand_mixture(rng: &mut impl Rng, order: usize, max_kappa: f64) -> TikhonovMixture {
        let comps: Vec<TikhonovComponent> = (0..order)
            .map(|_| {
                TikhonovComponent::from_polar(
                    rng.gen::<f64>() * max_kappa,
                    rng.gen::<f64>() * 2.0 * PI - PI,
                )
            })
            .collect();
        let logw: Vec<f64> = (0..order).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        TikhonovMixture::new(comps, logw).unwrap().normalized().unwrap()
    }

    fn weights(m: &TikhonovMixture) -> Vec<f64> {
        m.log_weights().iter().map(|lw| lw.exp()).collect()
    }

    #[test]
    fn normalize_basic() {
        let m = TikhonovMixture::new(
            vec![TikhonovComponent::uniform(), TikhonovComponent::from_polar(2.0, 0.0)],
            vec![0.2f64.ln(), 0.2f64.ln()],
        )
        .unwrap()
        .normalized()
        .unwrap();
        assert!((m.log_weights()[0] - 0.5f64.ln()).abs() < 1e-15);
        assert!((m.log_weights()[1] - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn normalize_idempotent() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let m = rand_mixture(&mut rng, 5, 50.0);
        let again = m.clone().normalized().unwrap();
        for (a, b) in m.log_weights().iter().zip(again.log_weights()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn normalize_extreme_dynamic_range() {
        // weights spanning 300 orders of magnitude; extended-precision
        // oracle: the big weight keeps everything, smalls survive as ratios
        let comps = vec![TikhonovComponent::uniform(); 3];
        let logw = vec![0.0, -300.0 * std::f64::consts::LN_10, -600.0 * std::f64::consts::LN_10];
        let m = TikhonovMixture::new(comps, logw.clone()).unwrap().normalized().unwrap();
        let total: f64 = m.log_weights().iter().map(|lw| lw.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // relative spacing preserved exactly
        assert!((m.log_weights()[0] - m.log_weights()[1] - 300.0 * std::f64::consts::LN_10).abs() < 1e-9);
    }

    #[test]
    fn normalize_degenerate_errors() {
        let m = TikhonovMixture::new(
            vec![TikhonovComponent::uniform()],
            vec![f64::NEG_INFINITY],
        )
        .unwrap();
        assert_eq!(m.normalized(), Err(MixtureError::DegenerateWeights));
    }

    #[test]
    fn evaluate_uniform() {
        let m = TikhonovMixture::uniform();
        for i in 0..8 {
            let theta = i as f64;
            assert!((m.evaluate(theta) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn evaluate_bounded_by_peaks() {
        let a = TikhonovComponent::from_polar(30.0, 0.0);
        let b = TikhonovComponent::from_polar(30.0, PI);
        let m = TikhonovMixture::new(vec![a, b], vec![0.5f64.ln(), 0.5f64.ln()]).unwrap();
        // far in the tails of both components
        let v = m.evaluate(PI / 2.0);
        assert!(v <= a.density(0.0) && v <= b.density(PI));
    }

    #[test]
    fn evaluate_integrates_to_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..10 {
            let m = rand_mixture(&mut rng, 6, 80.0);
            let integral = quad(|t| m.evaluate(t), 4096);
            assert!((integral - 1.0).abs() < 1e-8, "integral {integral}");
        }
    }

    #[test]
    fn reduce_identical_components_collapse() {
        let c = TikhonovComponent::from_polar(7.0, 0.4);
        let m = TikhonovMixture::new(vec![c, c], vec![0.5f64.ln(), 0.5f64.ln()]).unwrap();
        let out = m.reduce(&ReductionConfig::new(0.3, 20).unwrap());
        assert_eq!(out.order(), 1);
        assert!((weights(&out)[0] - 1.0).abs() < 1e-12);
        assert!((out.components()[0].kappa() - 7.0).abs() < 1e-6);
        assert!((out.components()[0].mean_direction() - 0.4).abs() < 1e-6);
    }

    #[test]
    fn reduce_antipodal_stays_apart() {
        let a = TikhonovComponent::from_polar(10.0, 0.0);
        let b = TikhonovComponent::from_polar(10.0, PI);
        let m = TikhonovMixture::new(vec![b, a], vec![0.4f64.ln(), 0.6f64.ln()]).unwrap();
        let out = m.reduce(&ReductionConfig::new(0.01, 20).unwrap());
        assert_eq!(out.order(), 2);
        // emitted in decreasing weight order: the 0.6 component leads
        assert!((weights(&out)[0] - 0.6).abs() < 1e-12);
        assert_eq!(out.components()[0], a);
        assert_eq!(out.components()[1], b);
    }

    #[test]
    fn reduce_mu_infinite_equals_full_cmvm() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        for _ in 0..10 {
            let m = rand_mixture(&mut rng, 7, 40.0);
            let out = m.reduce(&ReductionConfig::new(f64::INFINITY, 20).unwrap());
            assert_eq!(out.order(), 1);
            let w = weights(&m);
            let full = crate::dirstat::cmvm(&w, m.components()).unwrap();
            assert!((out.components()[0].z - full.z).norm() < 1e-9);
        }
    }

    #[test]
    fn reduce_mu_zero_is_identity_up_to_weight_order() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..10 {
            let m = rand_mixture(&mut rng, 12, 60.0);
            let out = m.reduce(&ReductionConfig::new(0.0, 20).unwrap());
            assert_eq!(out.order(), 12);
            // sort inputs by decreasing weight and compare
            let mut idx: Vec<usize> = (0..12).collect();
            idx.sort_by(|&a, &b| {
                m.log_weights()[b].partial_cmp(&m.log_weights()[a]).unwrap()
            });
            for (j, &i) in idx.iter().enumerate() {
                assert_eq!(out.components()[j], m.components()[i]);
                assert!((out.log_weights()[j] - m.log_weights()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reduce_respects_n_max_and_preserves_mass() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for _ in 0..20 {
            let order = 2 + rng.gen_range(0..14);
            let m = rand_mixture(&mut rng, order, 30.0);
            let n_max = 1 + rng.gen_range(0..5);
            let out = m.reduce(&ReductionConfig::new(0.05, n_max).unwrap());
            assert!(out.order() <= n_max.min(order));
            assert!(out.order() >= 1);
            let total: f64 = weights(&out).iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reduce_never_worse_than_full_collapse() {
        // KL(input ‖ reduced) ≤ KL(input ‖ cmvm-to-1), both by quadrature
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for trial in 0..100 {
            let order = 2 + rng.gen_range(0..6);
            let m = rand_mixture(&mut rng, order, 25.0);
            let reduced = m.reduce(&ReductionConfig::new(0.3, 20).unwrap());
            let collapsed = m.reduce(&ReductionConfig::collapse_to_one());
            let kl_to = |g: &TikhonovMixture| {
                quad(
                    |t| {
                        let p = m.evaluate(t);
                        if p > 0.0 {
                            p * (p.ln() - g.evaluate(t).ln())
                        } else {
                            0.0
                        }
                    },
                    2048,
                )
            };
            let kl_reduced = kl_to(&reduced);
            let kl_collapsed = kl_to(&collapsed);
            assert!(
                kl_reduced <= kl_collapsed + 1e-9,
                "trial {trial}: reduced {kl_reduced} vs collapsed {kl_collapsed}"
            );
        }
    }

    #[test]
    fn reduce_total_variation_stays_small_at_operating_point() {
        // mixtures shaped like one forward-recursion step at Es/N0 = 4.5 dB:
        // 4 rotated copies of a moderately concentrated component, QPSK-style
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        for _ in 0..20 {
            let base_kappa = 4.0 + rng.gen::<f64>() * 8.0;
            let base_dir = rng.gen::<f64>() * 2.0 * PI;
            let mut comps = Vec::new();
            let mut logw = Vec::new();
            for arm in 0..8 {
                let jitter = 0.1 * rng.gen::<f64>();
                comps.push(TikhonovComponent::from_polar(
                    base_kappa * (1.0 + 0.2 * rng.gen::<f64>()),
                    base_dir + arm as f64 * PI / 2.0 + jitter,
                ));
                logw.push(rng.gen::<f64>().ln());
            }
            let m = TikhonovMixture::new(comps, logw).unwrap().normalized().unwrap();
            let out = m.reduce(&ReductionConfig::new(0.3, 20).unwrap());
            let tv = 0.5 * quad(|t| (m.evaluate(t) - out.evaluate(t)).abs(), 4096);
            assert!(tv <= 0.05, "TV {tv}");
        }
    }

    #[test]
    fn reduce_deterministic() {
        let mut rng = ChaCha12Rng::seed_from_u64(16);
        let m = rand_mixture(&mut rng, 9, 45.0);
        let cfg = ReductionConfig::new(0.2, 4).unwrap();
        let a = m.reduce(&cfg);
        let b = m.reduce(&cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn order_counting() {
        let mut rng = ChaCha12Rng::seed_from_u64(18);
        assert_eq!(TikhonovMixture::uniform().order(), 1);
        let m = rand_mixture(&mut rng, 12, 30.0);
        assert_eq!(m.reduce(&ReductionConfig::new(f64::INFINITY, 20).unwrap()).order(), 1);
        assert_eq!(m.reduce(&ReductionConfig::new(0.0, 20).unwrap()).order(), 12);
    }

    #[test]
    fn config_validation() {
        assert!(ReductionConfig::new(-0.1, 5).is_err());
        assert!(ReductionConfig::new(f64::NAN, 5).is_err());
        assert!(ReductionConfig::new(0.0, 0).is_err());
        assert!(ReductionConfig::new(0.3, 1).is_ok());
    }
}
