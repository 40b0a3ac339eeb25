//! Bounded Nelder-Mead simplex search over the free coordinates of a
//! flattened gait parameter vector.
//!
//! Every candidate is clipped into the box before evaluation, so the
//! objective never sees an out-of-bounds point. Infeasible candidates carry
//! an infinite cost and take part in the ordinary simplex ordering. The
//! search is fully deterministic: no randomness, stable ordering.

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn clip(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lower[i], upper[i]);
    }
}

/// Runs the simplex search from `start`, moving only the `free` coordinates.
/// Stops when the cost spread falls below `tolerance` relative to the best
/// cost or when `budget` evaluations are spent. Returns the best vertex and
/// its cost.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    objective: &mut F,
    lower: &[f64],
    upper: &[f64],
    start: &[f64],
    free: &[usize],
    step_scale: f64,
    tolerance: f64,
    budget: usize,
) -> (Vec<f64>, f64) {
    let mut evaluations = 0usize;
    let mut evaluate = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        objective(x)
    };

    let mut origin = start.to_vec();
    clip(&mut origin, lower, upper);
    let origin_cost = evaluate(&origin, &mut evaluations);
    if free.is_empty() {
        return (origin, origin_cost);
    }

    // Initial simplex: per-dimension offsets scaled to the box width,
    // flipped when they would leave the box through the upper face.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(free.len() + 1);
    simplex.push((origin.clone(), origin_cost));
    for &dim in free {
        let mut vertex = origin.clone();
        let step = step_scale * (upper[dim] - lower[dim]);
        if vertex[dim] + step <= upper[dim] {
            vertex[dim] += step;
        } else {
            vertex[dim] -= step;
        }
        clip(&mut vertex, lower, upper);
        let cost = evaluate(&vertex, &mut evaluations);
        simplex.push((vertex, cost));
    }

    let n = free.len();
    while evaluations < budget {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("costs are never NaN"));
        let best_cost = simplex[0].1;
        let worst_cost = simplex[n].1;
        if worst_cost - best_cost <= tolerance * (best_cost.abs() + 1e-12) {
            break;
        }

        // Centroid of all vertices but the worst, over the free coordinates.
        let mut centroid = simplex[0].0.clone();
        for dim in free {
            let mut sum = 0.0;
            for vertex in &simplex[..n] {
                sum += vertex.0[*dim];
            }
            centroid[*dim] = sum / n as f64;
        }

        let blend = |from: &[f64], toward: &[f64], factor: f64| {
            let mut out = centroid.clone();
            for dim in free {
                out[*dim] = from[*dim] + factor * (toward[*dim] - from[*dim]);
            }
            clip(&mut out, lower, upper);
            out
        };

        let worst = simplex[n].0.clone();
        let reflected = blend(&centroid, &worst, -REFLECTION);
        let reflected_cost = evaluate(&reflected, &mut evaluations);

        if reflected_cost < simplex[0].1 {
            let expanded = blend(&centroid, &worst, -EXPANSION);
            let expanded_cost = evaluate(&expanded, &mut evaluations);
            simplex[n] = if expanded_cost < reflected_cost {
                (expanded, expanded_cost)
            } else {
                (reflected, reflected_cost)
            };
            continue;
        }
        if reflected_cost < simplex[n - 1].1 {
            simplex[n] = (reflected, reflected_cost);
            continue;
        }

        let contracted = if reflected_cost < simplex[n].1 {
            blend(&centroid, &worst, -CONTRACTION)
        } else {
            blend(&centroid, &worst, CONTRACTION)
        };
        let contracted_cost = evaluate(&contracted, &mut evaluations);
        if contracted_cost < simplex[n].1.min(reflected_cost) {
            simplex[n] = (contracted, contracted_cost);
            continue;
        }

        // Shrink toward the best vertex.
        let anchor = simplex[0].0.clone();
        for vertex in simplex[1..].iter_mut() {
            let mut shrunk = anchor.clone();
            for dim in free {
                shrunk[*dim] = anchor[*dim] + SHRINK * (vertex.0[*dim] - anchor[*dim]);
            }
            clip(&mut shrunk, lower, upper);
            let cost = evaluate(&shrunk, &mut evaluations);
            *vertex = (shrunk, cost);
            if evaluations >= budget {
                break;
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("costs are never NaN"));
    simplex.swap_remove(0)
}
