//! Derivative-free simplex minimisation.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Edge length of the initial simplex along every axis.
    pub initial_step: f64,
    pub max_evaluations: usize,
    /// Stop once the simplex diameter falls below this.
    pub diameter_tolerance: f64,
    /// ...or once the spread of vertex values, relative to the best, falls below this.
    pub value_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            initial_step: 0.25,
            max_evaluations: 20_000,
            diameter_tolerance: 1e-10,
            value_tolerance: 1e-15,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Minimum<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimise `f` from `start` with the standard reflection / expansion /
/// contraction / shrink coefficients (1, 2, ½, ½).
pub fn minimize<const N: usize, F>(f: F, start: [f64; N], options: &NelderMeadOptions) -> Minimum<N>
where
    F: Fn(&[f64; N]) -> f64,
{
    let eval = |x: &[f64; N]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex = [[0.0; N]; 33];
    assert!(N + 1 <= simplex.len(), "dimension too large");
    let mut values = [0.0; 33];
    simplex[0] = start;
    values[0] = eval(&start);
    for i in 0..N {
        let mut v = start;
        v[i] += options.initial_step;
        simplex[i + 1] = v;
        values[i + 1] = eval(&v);
    }
    let mut evaluations = N + 1;
    let mut converged = false;
    let mut order = [0usize; 33];

    while evaluations < options.max_evaluations {
        for (i, o) in order.iter_mut().enumerate().take(N + 1) {
            *o = i;
        }
        order[..N + 1].sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, worst, second_worst) = (order[0], order[N], order[N - 1]);

        let diameter = (1..=N)
            .map(|k| {
                let v = &simplex[order[k]];
                v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let spread = values[worst] - values[best];
        if diameter < options.diameter_tolerance || spread <= options.value_tolerance * values[best].abs() {
            converged = true;
            break;
        }

        let mut centroid = [0.0; N];
        for &k in &order[..N] {
            for (c, x) in centroid.iter_mut().zip(&simplex[k]) {
                *c += x / N as f64;
            }
        }
        let along = |t: f64| {
            let mut p = [0.0; N];
            for i in 0..N {
                p[i] = centroid[i] + t * (simplex[worst][i] - centroid[i]);
            }
            p
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected);
        evaluations += 1;
        if fr < values[best] {
            let expanded = along(-2.0);
            let fe = eval(&expanded);
            evaluations += 1;
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[worst] {
            let p = along(-0.5);
            let v = eval(&p);
            (p, v)
        } else {
            let p = along(0.5);
            let v = eval(&p);
            (p, v)
        };
        evaluations += 1;
        if fc < values[worst].min(fr) {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best];
        for &k in &order[1..=N] {
            for i in 0..N {
                simplex[k][i] = anchor[i] + 0.5 * (simplex[k][i] - anchor[i]);
            }
            values[k] = eval(&simplex[k]);
        }
        evaluations += N;
    }

    let best = (0..=N).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Minimum { x: simplex[best], value: values[best], evaluations, converged }
}
