//! Per-pair offloading success probability.
//!
//! The helper's channel alternates between contact periods ~ Exp(mu) and
//! inter-contact periods ~ Exp(gamma); the task's processing time is
//! Erlang(n_h, xi). The offload succeeds when processing completes inside a
//! contact period. Three routes compute the same quantity:
//!
//! * closed forms for the n_h = 1 and n_h = 2 shapes,
//! * absorption in a small continuous-time Markov chain for any shape,
//! * Monte Carlo over simulated offloading episodes.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::model::{Instance, ModelError};

/// The (mu, gamma, xi, n_h) tuple behind one p_ij entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams {
    pub mu: f64,
    pub gamma: f64,
    pub xi: f64,
    pub n_h: u32,
}

impl PairParams {
    pub fn new(mu: f64, gamma: f64, xi: f64, n_h: u32) -> Result<Self, ModelError> {
        for (name, v) in [("mu", mu), ("gamma", gamma), ("xi", xi)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelError::Parameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if n_h == 0 {
            return Err(ModelError::Parameter("n_h must be >= 1".into()));
        }
        Ok(PairParams { mu, gamma, xi, n_h })
    }
}

/// R x H matrix of success probabilities, indexed `[task][helper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessProbMatrix {
    pub p: Vec<Vec<f64>>,
}

impl SuccessProbMatrix {
    pub fn r(&self) -> usize {
        self.p.len()
    }

    pub fn h(&self) -> usize {
        self.p.first().map_or(0, |row| row.len())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub trials: u64,
    pub std_error: f64,
}

/// Success probability for a single-stage (exponential) processing time:
/// (xi + gamma) / (mu + xi + gamma).
pub fn closed_form_nh1(params: &PairParams) -> f64 {
    debug_assert_eq!(params.n_h, 1);
    (params.xi + params.gamma) / (params.mu + params.xi + params.gamma)
}

/// Success probability for a two-stage Erlang processing time. The geometric
/// ratio q = mu*gamma / ((mu+xi)(gamma+xi)) is < 1 for positive rates, so the
/// series collapses to three closed terms.
pub fn closed_form_nh2(params: &PairParams) -> f64 {
    debug_assert_eq!(params.n_h, 2);
    let (mu, gamma, xi) = (params.mu, params.gamma, params.xi);
    let q = mu * gamma / ((mu + xi) * (gamma + xi));
    let a = xi / (mu + xi);
    let geo = q / ((1.0 - q) * (1.0 - q));
    a * a / (1.0 - q) + a * a * geo + xi * xi / ((mu + xi) * (gamma + xi)) * geo
}

/// Success probability for any Erlang shape via absorption in the chain with
/// transient states (stage k, channel in {contact, gap}), started at
/// (1, contact): rate xi advances the stage (absorbing as success from the
/// last contact state, as failure from the last gap state), mu flips
/// contact -> gap, gamma flips gap -> contact.
///
/// Writing a_k / b_k for the success probability from (k, contact) / (k, gap),
/// the 2*n_h balance equations are block-triangular in the stage index, so
/// back-substitution from a_{n_h+1} = 1, b_{n_h+1} = 0 solves them exactly:
///
/// ```text
/// a_k = ((xi + gamma) * a_{k+1} + mu * b_{k+1}) / (xi + mu + gamma)
/// b_k = (xi * b_{k+1} + gamma * a_k) / (xi + gamma)
/// ```
///
/// The denominators are positive for valid rates, so the system is never
/// singular. At n_h = 1 this collapses to (xi + gamma) / (mu + xi + gamma).
pub fn phase_type_success(params: &PairParams) -> f64 {
    let (mu, gamma, xi) = (params.mu, params.gamma, params.xi);
    let mut a = 1.0; // success already decided in the contact branch
    let mut b = 0.0; // ... and lost in the gap branch
    for _ in 0..params.n_h {
        let a_next = ((xi + gamma) * a + mu * b) / (xi + mu + gamma);
        b = (xi * b + gamma * a_next) / (xi + gamma);
        a = a_next;
    }
    a
}

/// Estimate the success probability by simulating `trials` offloading
/// episodes: draw the processing time as a sum of n_h exponentials of rate
/// xi, then walk the alternating contact/gap timeline (the residual of the
/// first contact is a fresh Exp(mu) by memorylessness) and count success when
/// completion lands inside a contact. Bit-reproducible for a fixed seed.
pub fn monte_carlo_success(params: &PairParams, trials: u64, seed: u64) -> MonteCarloEstimate {
    assert!(trials >= 1, "need at least one trial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let proc = Exp::new(params.xi).expect("xi > 0");
    let contact = Exp::new(params.mu).expect("mu > 0");
    let gap = Exp::new(params.gamma).expect("gamma > 0");
    let mut successes = 0u64;
    for _ in 0..trials {
        let mut t = 0.0;
        for _ in 0..params.n_h {
            t += proc.sample(&mut rng);
        }
        let mut cover = 0.0;
        loop {
            cover += contact.sample(&mut rng);
            if t <= cover {
                successes += 1;
                break;
            }
            cover += gap.sample(&mut rng);
            if t <= cover {
                break;
            }
        }
    }
    let estimate = successes as f64 / trials as f64;
    MonteCarloEstimate {
        estimate,
        trials,
        std_error: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
    }
}

/// Analytic success probability dispatching on the shape: the dedicated
/// closed forms for n_h 1 and 2, the absorption solve otherwise.
pub fn analytic_success(params: &PairParams) -> f64 {
    match params.n_h {
        1 => closed_form_nh1(params),
        2 => closed_form_nh2(params),
        _ => phase_type_success(params),
    }
}

/// Fill the full R x H probability matrix for an instance.
pub fn build_prob_matrix(instance: &Instance) -> SuccessProbMatrix {
    let p = instance
        .tasks
        .iter()
        .enumerate()
        .map(|(i, _)| {
            instance
                .helpers
                .iter()
                .enumerate()
                .map(|(j, h)| {
                    let params = PairParams {
                        mu: h.mobility.mu,
                        gamma: h.mobility.gamma,
                        xi: instance.xi[i][j],
                        n_h: instance.n_h,
                    };
                    analytic_success(&params)
                })
                .collect()
        })
        .collect();
    SuccessProbMatrix { p }
}

/// Draw a random parameter tuple in a regime where probabilities stay well
/// inside (0,1); shared by tests and the validation report.
pub fn sample_params<R: Rng>(rng: &mut R, n_h: u32) -> PairParams {
    PairParams {
        mu: rng.gen_range(0.3..1.0),
        gamma: rng.gen_range(1.2..3.0),
        xi: rng.gen_range(1.2..3.0),
        n_h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Independent route for any shape: the channel is in contact at time t
    /// with probability gamma/(mu+gamma) + mu/(mu+gamma)*exp(-(mu+gamma)t),
    /// and completion time is Erlang, whose transform gives
    /// E[exp(-(mu+gamma)T)] = (xi/(xi+mu+gamma))^n_h.
    fn occupancy_oracle(p: &PairParams) -> f64 {
        let s = p.mu + p.gamma;
        let damp = (p.xi / (p.xi + s)).powi(p.n_h as i32);
        p.gamma / s + p.mu / s * damp
    }

    #[test]
    fn nh1_closed_form_values() {
        let p = PairParams::new(1.0, 1.0, 1.0, 1).unwrap();
        assert!((closed_form_nh1(&p) - 2.0 / 3.0).abs() < 1e-15);
        let p = PairParams::new(0.5, 2.0, 1.0, 1).unwrap();
        assert!((closed_form_nh1(&p) - 6.0 / 7.0).abs() < 1e-15);
        // vanishing mu: the helper is effectively always in contact
        let p = PairParams::new(1e-12, 1.0, 1.0, 1).unwrap();
        assert!(closed_form_nh1(&p) > 0.999_999);
    }

    #[test]
    fn nh2_closed_form_values() {
        let p = PairParams::new(1.0, 1.0, 1.0, 2).unwrap();
        assert!((closed_form_nh2(&p) - 5.0 / 9.0).abs() < 1e-15);
        let p = PairParams::new(1e-12, 1.0, 1.0, 2).unwrap();
        assert!(closed_form_nh2(&p) > 0.999_999);
    }

    #[test]
    fn two_stage_completion_is_riskier_than_one_stage() {
        let mut rng = crate::test_rng(42);
        for _ in 0..200 {
            let p1 = sample_params(&mut rng, 1);
            let p2 = PairParams { n_h: 2, ..p1 };
            assert!(closed_form_nh2(&p2) < closed_form_nh1(&p1));
        }
    }

    #[test]
    fn absorption_solve_matches_closed_forms() {
        let mut rng = crate::test_rng(7);
        for _ in 0..500 {
            let p1 = sample_params(&mut rng, 1);
            assert!((phase_type_success(&p1) - closed_form_nh1(&p1)).abs() < 1e-12);
            let p2 = PairParams { n_h: 2, ..p1 };
            assert!((phase_type_success(&p2) - closed_form_nh2(&p2)).abs() < 1e-10);
        }
    }

    #[test]
    fn absorption_solve_matches_occupancy_identity_for_deep_shapes() {
        let mut rng = crate::test_rng(11);
        for _ in 0..200 {
            let n_h = rng.gen_range(1..=12);
            let p = sample_params(&mut rng, n_h);
            assert!(
                (phase_type_success(&p) - occupancy_oracle(&p)).abs() < 1e-12,
                "mismatch at {p:?}"
            );
        }
        let p = PairParams::new(1.0, 1.0, 1.0, 3).unwrap();
        assert!((phase_type_success(&p) - 0.5185185185185185).abs() < 1e-12);
    }

    #[test]
    fn probabilities_stay_strictly_inside_unit_interval() {
        let mut rng = crate::test_rng(13);
        for _ in 0..500 {
            let n_h = rng.gen_range(1..=8);
            let p = PairParams {
                mu: rng.gen_range(0.01..10.0),
                gamma: rng.gen_range(0.01..10.0),
                xi: rng.gen_range(0.01..10.0),
                n_h,
            };
            let v = phase_type_success(&p);
            assert!(v > 0.0 && v < 1.0, "{p:?} -> {v}");
        }
    }

    #[test]
    fn monotone_in_each_rate_and_in_shape() {
        let mut rng = crate::test_rng(17);
        for _ in 0..200 {
            let base = PairParams {
                mu: rng.gen_range(0.1..3.0),
                gamma: rng.gen_range(0.1..3.0),
                xi: rng.gen_range(0.1..3.0),
                n_h: rng.gen_range(1..=5),
            };
            let v = phase_type_success(&base);
            let bump = 1.3;
            let more_mu = PairParams {
                mu: base.mu * bump,
                ..base
            };
            assert!(phase_type_success(&more_mu) <= v + 1e-12);
            let more_gamma = PairParams {
                gamma: base.gamma * bump,
                ..base
            };
            assert!(phase_type_success(&more_gamma) >= v - 1e-12);
            let more_xi = PairParams {
                xi: base.xi * bump,
                ..base
            };
            assert!(phase_type_success(&more_xi) >= v - 1e-12);
            let deeper = PairParams {
                n_h: base.n_h + 1,
                ..base
            };
            assert!(phase_type_success(&deeper) <= v + 1e-12);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic_and_consistent() {
        let p = PairParams::new(1.0, 1.0, 1.0, 1).unwrap();
        let a = monte_carlo_success(&p, 50_000, 99);
        let b = monte_carlo_success(&p, 50_000, 99);
        assert_eq!(a, b);
        assert!((a.estimate - 2.0 / 3.0).abs() < 3.0 * a.std_error);
        assert!((a.std_error - (a.estimate * (1.0 - a.estimate) / 50_000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_brackets_closed_form_on_random_tuples() {
        let mut rng = crate::test_rng(23);
        let mut hits = 0;
        for k in 0..20 {
            let p = sample_params(&mut rng, if k % 2 == 0 { 1 } else { 2 });
            let mc = monte_carlo_success(&p, 50_000, 1000 + k);
            if (mc.estimate - analytic_success(&p)).abs() <= 4.0 * mc.std_error {
                hits += 1;
            }
        }
        assert!(hits >= 19, "only {hits}/20 tuples within 4 standard errors");
    }

    #[test]
    fn matrix_matches_elementwise_absorption() {
        use crate::model::{HelperSpec, MobilityParams, TaskSpec};
        let inst = Instance::new(
            vec![TaskSpec { id: 0, size: 1 }, TaskSpec { id: 1, size: 2 }],
            vec![
                HelperSpec {
                    id: 0,
                    capacity: 3,
                    mobility: MobilityParams {
                        mu: 1.0,
                        gamma: 1.0,
                    },
                },
                HelperSpec {
                    id: 1,
                    capacity: 4,
                    mobility: MobilityParams {
                        mu: 0.5,
                        gamma: 2.0,
                    },
                },
            ],
            vec![vec![1.0, 2.0], vec![0.7, 1.3]],
            2,
        )
        .unwrap();
        let m = build_prob_matrix(&inst);
        for i in 0..2 {
            for j in 0..2 {
                let params = PairParams {
                    mu: inst.helpers[j].mobility.mu,
                    gamma: inst.helpers[j].mobility.gamma,
                    xi: inst.xi[i][j],
                    n_h: 2,
                };
                assert!((m.get(i, j) - phase_type_success(&params)).abs() < 1e-12);
            }
        }
        // uniform rates at shape 1 give the constant 2/3 matrix
        let inst = Instance::new(
            vec![TaskSpec { id: 0, size: 1 }],
            vec![HelperSpec {
                id: 0,
                capacity: 1,
                mobility: MobilityParams {
                    mu: 1.0,
                    gamma: 1.0,
                },
            }],
            vec![vec![1.0]],
            1,
        )
        .unwrap();
        assert!((build_prob_matrix(&inst).get(0, 0) - 2.0 / 3.0).abs() < 1e-15);
    }
}
