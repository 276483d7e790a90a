//! Finite-difference checks for the network's input and parameter gradients.

use pressrec::fields::{GradientField, PointSet2};
use pressrec::rng::CounterRng;
use pressrec::siren::{forward_with_gradient, init_siren, loss_and_param_gradient, GradientDataset, SirenConfig, SirenParams};

fn config(hidden: usize, width: usize, omega0: f64) -> SirenConfig {
    SirenConfig { hidden_layers: hidden, width, omega0, omega_hidden: 30.0, rng_seed: 17 }
}

fn sample_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = CounterRng::new(seed, 0);
    (0..n).map(|_| [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)]).collect()
}

/// Loss evaluated one point at a time, independent of the batched path.
fn pointwise_loss(p: &SirenParams, pts: &[[f64; 2]], g: &[[f64; 2]]) -> f64 {
    pts.iter()
        .zip(g)
        .map(|(&x, t)| {
            let d = forward_with_gradient(p, x).1;
            (d[0] - t[0]).powi(2) + (d[1] - t[1]).powi(2)
        })
        .sum::<f64>()
        / pts.len() as f64
}

#[test]
fn input_gradient_matches_central_differences() {
    for (hidden, width) in [(1, 16), (2, 32), (3, 64)] {
        let p = init_siren(&config(hidden, width, 4.0)).unwrap();
        for x in sample_points(10, hidden as u64) {
            let h = 2e-7;
            let g = forward_with_gradient(&p, x).1;
            for d in 0..2 {
                // Fourth-order central stencil.
                let phi = |off: f64| {
                    let mut y = x;
                    y[d] += off;
                    forward_with_gradient(&p, y).0
                };
                let fd = (8.0 * (phi(h) - phi(-h)) - (phi(2.0 * h) - phi(-2.0 * h))) / (12.0 * h);
                let scale = g[0].abs().max(g[1].abs()).max(1.0);
                assert!((fd - g[d]).abs() <= 1e-6 * scale, "{hidden}x{width} d={d}: fd {fd} analytic {}", g[d]);
            }
        }
    }
}

fn check_param_gradient(hidden: usize, width: usize, n_checked: usize) {
    let p = init_siren(&config(hidden, width, 3.0)).unwrap();
    let pts = sample_points(6, 99);
    let mut rng = CounterRng::new(5, 5);
    let targets: Vec<[f64; 2]> = (0..pts.len()).map(|_| [rng.normal(), rng.normal()]).collect();
    let data = GradientDataset::new(&PointSet2::new(pts.clone()).unwrap(), &GradientField::from_pairs(&targets)).unwrap();
    let (loss, grads) = loss_and_param_gradient(&p, &data).unwrap();
    assert!((loss - pointwise_loss(&p, &pts, &targets)).abs() <= 1e-10 * loss);

    let analytic = grads.flatten();
    let flat = p.flatten();
    let indices: Vec<usize> = if n_checked >= flat.len() {
        (0..flat.len()).collect()
    } else {
        (0..n_checked).map(|_| (rng.next_u64() % flat.len() as u64) as usize).collect()
    };
    let gscale = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut probe = p.clone();
    for &i in &indices {
        // Fourth-order stencil; the larger step keeps round-off below the
        // tolerance for parameters near zero.
        let h = 1e-5 * flat[i].abs().max(0.1);
        let mut shifted = flat.clone();
        let mut loss_at = |off: f64| {
            shifted[i] = flat[i] + off;
            probe.assign(&shifted);
            pointwise_loss(&probe, &pts, &targets)
        };
        let fd = (8.0 * (loss_at(h) - loss_at(-h)) - (loss_at(2.0 * h) - loss_at(-2.0 * h))) / (12.0 * h);
        let err = (fd - analytic[i]).abs() / analytic[i].abs().max(1e-3 * gscale);
        assert!(err < 1e-5, "{hidden}x{width} param {i}: fd {fd} analytic {}", analytic[i]);
    }
}

#[test]
fn parameter_gradient_small_network_all_entries() {
    check_param_gradient(1, 8, usize::MAX);
    check_param_gradient(2, 6, usize::MAX);
}

#[test]
fn parameter_gradient_3x128_sampled_entries() {
    check_param_gradient(3, 128, 150);
}
