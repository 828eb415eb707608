//! Bounded Nelder–Mead simplex search used by the grating design search.
//!
//! Derivative-free, deterministic: fixed initial simplex, standard
//! reflection/expansion/contraction/shrink coefficients, box constraints
//! enforced by clamping trial points. Good enough for the smooth 1–2 parameter
//! objectives this crate produces.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Stop when the spread of simplex objective values falls below this.
    pub tolerance: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-10,
        }
    }
}

pub struct SimplexResult {
    pub position: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Minimize `f` starting from `x0` with per-dimension initial steps `step`,
/// clamped to `[lo, hi]` boxes.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    lo: &[f64],
    hi: &[f64],
    options: &SimplexOptions,
) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert!(dim > 0 && step.len() == dim && lo.len() == dim && hi.len() == dim);
    let clamp = |x: &mut Vec<f64>| {
        for d in 0..dim {
            if x[d] < lo[d] {
                x[d] = lo[d];
            }
            if x[d] > hi[d] {
                x[d] = hi[d];
            }
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for d in 0..dim {
        let mut p = x0.to_vec();
        p[d] += if p[d] + step[d] <= hi[d] { step[d] } else { -step[d] };
        clamp(&mut p);
        simplex.push(p);
    }
    for p in &mut simplex {
        clamp(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    for _ in 0..options.max_iterations {
        iterations += 1;
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(core::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        if (values[worst] - values[best]).abs() <= options.tolerance {
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = alloc::vec![0.0; dim];
        for &i in order.iter().take(dim) {
            for d in 0..dim {
                centroid[d] += simplex[i][d];
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }

        let mut reflected: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + alpha * (centroid[d] - simplex[worst][d]))
            .collect();
        clamp(&mut reflected);
        let reflected_value = f(&reflected);

        if reflected_value < values[best] {
            let mut expanded: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + gamma * (reflected[d] - centroid[d]))
                .collect();
            clamp(&mut expanded);
            let expanded_value = f(&expanded);
            if expanded_value < reflected_value {
                simplex[worst] = expanded;
                values[worst] = expanded_value;
            } else {
                simplex[worst] = reflected;
                values[worst] = reflected_value;
            }
            continue;
        }
        if reflected_value < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = reflected_value;
            continue;
        }

        let mut contracted: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + rho * (simplex[worst][d] - centroid[d]))
            .collect();
        clamp(&mut contracted);
        let contracted_value = f(&contracted);
        if contracted_value < values[worst] {
            simplex[worst] = contracted;
            values[worst] = contracted_value;
            continue;
        }

        let best_point = simplex[best].clone();
        for i in 0..=dim {
            if i == best {
                continue;
            }
            for d in 0..dim {
                simplex[i][d] = best_point[d] + sigma * (simplex[i][d] - best_point[d]);
            }
            clamp(&mut simplex[i]);
            values[i] = f(&simplex[i]);
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if values[i] < values[best] {
            best = i;
        }
    }
    SimplexResult {
        position: simplex.swap_remove(best),
        value: values[best],
        iterations,
    }
}
