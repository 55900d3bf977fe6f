//! Full-batch gradient-descent baseline: fit only the inner weights of a
//! network whose scales, offsets and activation are known and fixed,
//! minimizing the mean squared error on a training set drawn from the same
//! query budget as the pipeline.

use nalgebra::{DMatrix, DVector};

use crate::model::RidgeNetwork;
use crate::rng::{derive_rng, TAG_GD};
use crate::sampling::{haar_semi_orthogonal, uniform_ball};

pub struct GdOutcome {
    pub weights: DMatrix<f64>,
    pub frob_error: f64,
    pub train_mse_history: Vec<f64>,
    /// Fraction of steps where the training MSE did not increase.
    pub monotone_fraction: f64,
}

/// Runs `steps` gradient-descent updates with a fixed step size from a Haar
/// orthogonal initialization. Columns keep their unit order because every
/// per-unit parameter except the weight vector is known.
pub fn run_gd(
    net: &RidgeNetwork,
    train_x: &DMatrix<f64>,
    train_y: &DVector<f64>,
    steps: usize,
    step_size: f64,
    seed: u64,
) -> GdOutcome {
    let d = net.dim();
    let m = net.num_units();
    let n = train_x.ncols();
    let b = net.scales();
    let theta = net.offsets();

    let mut rng = derive_rng(seed, &[TAG_GD]);
    let mut a = haar_semi_orthogonal(d, m, &mut rng);

    let zero_level: f64 = (0..m).map(|i| b[i] * theta[i].tanh()).sum();
    let mut history = Vec::with_capacity(steps);
    for _ in 0..steps {
        // z = A^T X + theta, residual r = b^T tanh(z) - zero_level - y.
        let mut z = a.transpose() * train_x;
        for k in 0..n {
            for i in 0..m {
                z[(i, k)] += theta[i];
            }
        }
        let tanh_z = z.map(f64::tanh);
        let mut residual = DVector::zeros(n);
        for k in 0..n {
            let mut pred = -zero_level;
            for i in 0..m {
                pred += b[i] * tanh_z[(i, k)];
            }
            residual[k] = pred - train_y[k];
        }
        let mse = residual.norm_squared() / n as f64;
        history.push(mse);

        // dMSE/da_i = (2/N) sum_k r_k b_i (1 - tanh² z_ik) x_k, as one GEMM.
        let mut w = DMatrix::zeros(m, n);
        for k in 0..n {
            for i in 0..m {
                let gp = 1.0 - tanh_z[(i, k)] * tanh_z[(i, k)];
                w[(i, k)] = b[i] * gp * residual[k];
            }
        }
        let grad = train_x * w.transpose() * (2.0 / n as f64);
        a -= grad * step_size;
    }

    let monotone = if history.len() < 2 {
        1.0
    } else {
        let ok = history.windows(2).filter(|w| w[1] <= w[0] + 1e-15).count();
        ok as f64 / (history.len() - 1) as f64
    };
    GdOutcome {
        frob_error: (&a - net.weights()).norm(),
        weights: a,
        train_mse_history: history,
        monotone_fraction: monotone,
    }
}

/// Evaluates the network family with substituted weights on a test set,
/// returning (mse, sup) against the ground-truth outputs.
pub fn weights_error_on_test(
    net: &RidgeNetwork,
    weights: &DMatrix<f64>,
    test_x: &DMatrix<f64>,
) -> (f64, f64) {
    let m = net.num_units();
    let n = test_x.ncols();
    let b = net.scales();
    let theta = net.offsets();
    let zero_level: f64 = (0..m).map(|i| b[i] * theta[i].tanh()).sum();

    let z_true = net.weights().transpose() * test_x;
    let z_hat = weights.transpose() * test_x;
    let mut sq = 0.0f64;
    let mut sup = 0.0f64;
    for k in 0..n {
        let mut f_true = -zero_level;
        let mut f_hat = -zero_level;
        for i in 0..m {
            f_true += b[i] * (z_true[(i, k)] + theta[i]).tanh();
            f_hat += b[i] * (z_hat[(i, k)] + theta[i]).tanh();
        }
        let diff = f_hat - f_true;
        sq += diff * diff;
        sup = sup.max(diff.abs());
    }
    (sq / n as f64, sup)
}

/// Uniform-in-ball training or test design matrix.
pub fn ball_design(dim: usize, n: usize, seed: u64, tag: u64) -> DMatrix<f64> {
    let mut rng = derive_rng(seed, &[TAG_GD, tag]);
    let mut x = DMatrix::zeros(dim, n);
    for k in 0..n {
        x.set_column(k, &uniform_ball(dim, &mut rng));
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_network;

    #[test]
    fn zero_steps_return_the_initialization() {
        let net = generate_network(3, 3, 0.5, 2).unwrap();
        let x = ball_design(3, 50, 2, 1);
        let y = DVector::from_fn(50, |k, _| net.eval(&x.column(k).clone_owned()));
        let out = run_gd(&net, &x, &y, 0, 0.1, 2);
        let mut rng = derive_rng(2, &[TAG_GD]);
        let init = haar_semi_orthogonal(3, 3, &mut rng);
        assert_eq!(out.weights, init);
        assert!(out.train_mse_history.is_empty());
    }

    #[test]
    fn training_mse_decreases_with_fixed_step() {
        let net = generate_network(4, 4, 0.8, 5).unwrap();
        let x = ball_design(4, 200, 5, 1);
        let y = DVector::from_fn(200, |k, _| net.eval(&x.column(k).clone_owned()));
        let out = run_gd(&net, &x, &y, 200, 0.1, 5);
        assert!(out.monotone_fraction > 0.9, "monotone {}", out.monotone_fraction);
        assert!(out.train_mse_history.last().unwrap() < &out.train_mse_history[0]);
    }

    #[test]
    fn substituting_true_weights_gives_zero_error() {
        let net = generate_network(3, 3, 0.4, 7).unwrap();
        let x = ball_design(3, 100, 7, 2);
        let (mse, sup) = weights_error_on_test(&net, net.weights(), &x);
        assert_eq!(mse, 0.0);
        assert_eq!(sup, 0.0);
    }
}
