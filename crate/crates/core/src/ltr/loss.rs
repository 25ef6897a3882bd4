//! The three training objectives: pointwise binary cross-entropy, pairwise
//! RankNet, and listwise top-one ListNet. Each returns the loss together
//! with its analytic gradient w.r.t. the input scores, in numerically
//! stable forms.

use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::Result;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + math::exp(-x))
    } else {
        let e = math::exp(x);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + math::ln_1p(math::exp(-x))
    } else {
        math::ln_1p(math::exp(x))
    }
}

/// Binary cross-entropy on a logit score.
///
/// `loss = -y ln(sigma(s)) - (1-y) ln(1 - sigma(s))`, gradient
/// `sigma(s) - y`. Stable for |s| up to hundreds.
pub fn pointwise_loss(score: f64, label: u8) -> Result<(f64, f64)> {
    if label > 1 {
        return Err(CoreError::Argument {
            message: alloc::format!("pointwise label must be 0 or 1, got {label}"),
        });
    }
    let y = f64::from(label);
    let loss = softplus(score) - score * y;
    let grad = sigmoid(score) - y;
    Ok((loss, grad))
}

/// RankNet logistic pair loss.
///
/// `loss = ln(1 + e^{-(s_pos - s_neg)})`; the two gradients are
/// `(-sigma(-delta), +sigma(-delta))` and always sum to zero.
pub fn pairwise_ranknet_loss(s_pos: f64, s_neg: f64) -> (f64, (f64, f64)) {
    let delta = s_pos - s_neg;
    let loss = softplus(-delta);
    let g = sigmoid(-delta);
    (loss, (-g, g))
}

/// Top-one ListNet: cross-entropy between the gain-derived target
/// distribution and the softmax of the scores.
///
/// The target is `p_j = gain_j / sum_k gain_k` with `gain = 2^grade - 1`,
/// so a list with a single grade-1 positive has a one-hot target and the
/// loss coincides with the contrastive entropy of the same score list.
/// Gradient: `q - p` with `q = softmax(scores)`.
pub fn listwise_listnet_loss(scores: &[f64], grades: &[u8]) -> Result<(f64, Vec<f64>)> {
    if scores.len() != grades.len() {
        return Err(CoreError::Shape {
            expected: scores.len(),
            got: grades.len(),
        });
    }
    if scores.len() < 2 {
        return Err(CoreError::Precondition {
            message: "listwise loss needs at least 2 documents".into(),
        });
    }
    let gains: Vec<f64> = grades
        .iter()
        .map(|&g| (1u64 << g) as f64 - 1.0)
        .collect();
    let gain_sum: f64 = gains.iter().sum();
    if gain_sum <= 0.0 {
        return Err(CoreError::Precondition {
            message: "listwise loss needs at least one grade > 0".into(),
        });
    }

    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max
        + math::ln(
            scores
                .iter()
                .map(|s| math::exp(s - max))
                .sum::<f64>(),
        );
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(scores.len());
    for (s, gain) in scores.iter().zip(&gains) {
        let p = gain / gain_sum;
        let log_q = s - lse;
        loss -= p * log_q;
        grad.push(math::exp(log_q) - p);
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::contrastive_entropy;
    use alloc::vec;

    const LN_2: f64 = core::f64::consts::LN_2;

    #[test]
    fn pointwise_symmetric_point() {
        let (loss, grad) = pointwise_loss(0.0, 1).unwrap();
        assert!((loss - LN_2).abs() < 1e-12);
        assert!((grad + 0.5).abs() < 1e-12);
        let (loss, grad) = pointwise_loss(0.0, 0).unwrap();
        assert!((loss - LN_2).abs() < 1e-12);
        assert!((grad - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pointwise_hand_value() {
        let (loss, _) = pointwise_loss(2.0, 1).unwrap();
        let expect = (1.0 + (-2.0f64).exp()).ln();
        assert!((loss - expect).abs() < 1e-12);
        assert!((loss - 0.1269).abs() < 1e-4);
    }

    #[test]
    fn pointwise_stable_at_extremes() {
        let (loss, grad) = pointwise_loss(500.0, 1).unwrap();
        assert!(loss.is_finite() && loss >= 0.0);
        assert!(grad.is_finite());
        let (loss, _) = pointwise_loss(-500.0, 0).unwrap();
        assert!(loss.is_finite() && loss >= 0.0);
        assert!(pointwise_loss(0.0, 2).is_err());
    }

    #[test]
    fn ranknet_zero_margin() {
        let (loss, (gp, gn)) = pairwise_ranknet_loss(1.3, 1.3);
        assert!((loss - LN_2).abs() < 1e-12);
        assert!((gp + 0.5).abs() < 1e-12);
        assert!((gn - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ranknet_hand_value_and_limit() {
        let (loss, _) = pairwise_ranknet_loss(1.0, 0.0);
        assert!((loss - (1.0 + (-1.0f64).exp()).ln()).abs() < 1e-12);
        assert!((loss - 0.3133).abs() < 1e-4);

        let mut prev = f64::INFINITY;
        for delta in [1.0, 5.0, 20.0, 100.0, 700.0] {
            let (loss, _) = pairwise_ranknet_loss(delta, 0.0);
            assert!(loss < prev, "loss must decrease with margin");
            assert!(loss >= 0.0);
            prev = loss;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn ranknet_gradients_sum_to_zero() {
        for (p, n) in [(0.0, 0.0), (3.2, -1.1), (-40.0, 55.0)] {
            let (_, (gp, gn)) = pairwise_ranknet_loss(p, n);
            assert_eq!(gp + gn, 0.0);
        }
    }

    #[test]
    fn listnet_uniform_grades_equal_scores() {
        for n in [2usize, 5, 11] {
            let scores = vec![0.7; n];
            let grades = vec![1u8; n];
            let (loss, grad) = listwise_listnet_loss(&scores, &grades).unwrap();
            assert!((loss - (n as f64).ln()).abs() < 1e-12);
            for g in grad {
                assert!(g.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn listnet_single_positive_equals_contrastive_entropy() {
        let scores = [0.9, -0.4, 0.1, 0.3];
        let grades = [1u8, 0, 0, 0];
        let (loss, _) = listwise_listnet_loss(&scores, &grades).unwrap();
        let ce = contrastive_entropy(scores[0], &scores[1..]);
        assert!((loss - ce).abs() < 1e-12);
    }

    #[test]
    fn listnet_two_doc_value() {
        // Scores [1,0], grades [1,0]: one-hot target, loss = -ln softmax_1.
        let (loss, grad) = listwise_listnet_loss(&[1.0, 0.0], &[1, 0]).unwrap();
        let q1 = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((loss + q1.ln()).abs() < 1e-12);
        assert!((grad[0] - (q1 - 1.0)).abs() < 1e-12);
        assert!((grad[1] - (1.0 - q1)).abs() < 1e-12);
    }

    #[test]
    fn listnet_graded_target() {
        // Grades [2, 1]: gains [3, 1] -> target [0.75, 0.25].
        let (loss, _) = listwise_listnet_loss(&[0.0, 0.0], &[2, 1]).unwrap();
        let expect = -(0.75 * (0.5f64).ln() + 0.25 * (0.5f64).ln());
        assert!((loss - expect).abs() < 1e-12);
    }

    #[test]
    fn listnet_preconditions() {
        assert!(matches!(
            listwise_listnet_loss(&[1.0, 2.0], &[0, 0]),
            Err(CoreError::Precondition { .. })
        ));
        assert!(matches!(
            listwise_listnet_loss(&[1.0], &[1]),
            Err(CoreError::Precondition { .. })
        ));
        assert!(matches!(
            listwise_listnet_loss(&[1.0, 2.0], &[1]),
            Err(CoreError::Shape { .. })
        ));
    }
}
