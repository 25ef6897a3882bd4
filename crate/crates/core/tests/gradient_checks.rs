//! Central finite-difference checks for the three loss gradients, plus the
//! ListNet/contrastive-entropy identity.

use rankscale_core::ltr::{listwise_listnet_loss, pairwise_ranknet_loss, pointwise_loss};
use rankscale_core::metrics::contrastive_entropy;
use rankscale_core::rng;

const H: f64 = 1e-5;
const REL_TOL: f64 = 1e-4;

fn rel_err(analytic: &[f64], fd: &[f64]) -> f64 {
    let num: f64 = analytic
        .iter()
        .zip(fd)
        .map(|(a, f)| (a - f) * (a - f))
        .sum::<f64>()
        .sqrt();
    let den: f64 = fd.iter().map(|f| f * f).sum::<f64>().sqrt();
    num / den.max(1e-9)
}

#[test]
fn pointwise_gradient_matches_finite_differences() {
    let mut rng = rng::stream(101, "fd-pointwise");
    for trial in 0..200 {
        let s = (rng::uniform(&mut rng) - 0.5) * 8.0;
        let y = (rng::uniform(&mut rng) > 0.5) as u8;
        let (_, grad) = pointwise_loss(s, y).unwrap();
        let (lp, _) = pointwise_loss(s + H, y).unwrap();
        let (lm, _) = pointwise_loss(s - H, y).unwrap();
        let fd = (lp - lm) / (2.0 * H);
        let err = rel_err(&[grad], &[fd]);
        assert!(err < REL_TOL, "trial {trial}: analytic {grad} vs fd {fd} (rel {err})");
    }
}

#[test]
fn ranknet_gradient_matches_finite_differences() {
    let mut rng = rng::stream(102, "fd-ranknet");
    for trial in 0..200 {
        let sp = (rng::uniform(&mut rng) - 0.5) * 8.0;
        let sn = (rng::uniform(&mut rng) - 0.5) * 8.0;
        let (_, (gp, gn)) = pairwise_ranknet_loss(sp, sn);
        let fd_p = (pairwise_ranknet_loss(sp + H, sn).0 - pairwise_ranknet_loss(sp - H, sn).0)
            / (2.0 * H);
        let fd_n = (pairwise_ranknet_loss(sp, sn + H).0 - pairwise_ranknet_loss(sp, sn - H).0)
            / (2.0 * H);
        let err = rel_err(&[gp, gn], &[fd_p, fd_n]);
        assert!(err < REL_TOL, "trial {trial}: rel err {err}");
        assert_eq!(gp + gn, 0.0);
    }
}

#[test]
fn listnet_gradient_matches_finite_differences() {
    let mut rng = rng::stream(103, "fd-listnet");
    for trial in 0..150 {
        let n = 2 + rng::index(&mut rng, 10);
        let scores: Vec<f64> = (0..n).map(|_| (rng::uniform(&mut rng) - 0.5) * 6.0).collect();
        let mut grades: Vec<u8> = (0..n).map(|_| rng::index(&mut rng, 4) as u8).collect();
        if grades.iter().all(|&g| g == 0) {
            grades[0] = 1 + rng::index(&mut rng, 3) as u8;
        }
        let (_, grad) = listwise_listnet_loss(&scores, &grades).unwrap();
        let mut fd = Vec::with_capacity(n);
        for i in 0..n {
            let mut plus = scores.clone();
            plus[i] += H;
            let mut minus = scores.clone();
            minus[i] -= H;
            let (lp, _) = listwise_listnet_loss(&plus, &grades).unwrap();
            let (lm, _) = listwise_listnet_loss(&minus, &grades).unwrap();
            fd.push((lp - lm) / (2.0 * H));
        }
        let err = rel_err(&grad, &fd);
        assert!(err < REL_TOL, "trial {trial} (n={n}): rel err {err}");
    }
}

/// A list with a single grade-1 positive and grade-0 negatives has a one-hot
/// target, so the ListNet loss must equal the contrastive entropy of the
/// identical unnormalized score list.
#[test]
fn listnet_single_positive_is_contrastive_entropy() {
    let mut rng = rng::stream(104, "listnet-ce");
    for _ in 0..200 {
        let n = 2 + rng::index(&mut rng, 15);
        let scores: Vec<f64> = (0..n).map(|_| (rng::uniform(&mut rng) - 0.5) * 10.0).collect();
        let mut grades = vec![0u8; n];
        let pos = rng::index(&mut rng, n);
        grades[pos] = 1;
        let (loss, _) = listwise_listnet_loss(&scores, &grades).unwrap();
        let negatives: Vec<f64> = scores
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pos)
            .map(|(_, &s)| s)
            .collect();
        let ce = contrastive_entropy(scores[pos], &negatives);
        assert!((loss - ce).abs() < 1e-9, "loss {loss} vs ce {ce}");
    }
}
