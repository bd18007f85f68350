/// Minimises `f` from `start` with a standard Nelder–Mead simplex
/// (reflection 1, expansion 2, contraction ½, shrink ½). `project` maps a
/// trial point back into the feasible box.
pub(crate) fn minimize(
    f: impl Fn(&[f64]) -> f64,
    project: impl Fn(&mut [f64]),
    start: &[f64],
    max_iter: usize,
) -> Vec<f64> {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for j in 0..n {
        let mut v = start.to_vec();
        let step = if v[j] != 0.0 { 0.05 * v[j].abs() } else { 1e-3 };
        v[j] += step;
        project(&mut v);
        if v[j] == start[j] {
            v[j] -= 2.0 * step;
            project(&mut v);
        }
        simplex.push(v);
    }
    let eval = |v: &[f64]| {
        let c = f(v);
        if c.is_finite() {
            c
        } else {
            f64::INFINITY
        }
    };
    let mut costs: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        costs = order.iter().map(|&i| costs[i]).collect();

        let (best, worst) = (costs[0], costs[n]);
        if (worst - best).abs() <= 1e-14 * (best.abs() + 1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let mut v: Vec<f64> = (0..n)
                .map(|j| centroid[j] + t * (simplex[n][j] - centroid[j]))
                .collect();
            project(&mut v);
            v
        };

        let refl = along(-1.0);
        let c_refl = eval(&refl);
        if c_refl < costs[0] {
            let exp = along(-2.0);
            let c_exp = eval(&exp);
            if c_exp < c_refl {
                simplex[n] = exp;
                costs[n] = c_exp;
            } else {
                simplex[n] = refl;
                costs[n] = c_refl;
            }
        } else if c_refl < costs[n - 1] {
            simplex[n] = refl;
            costs[n] = c_refl;
        } else {
            let con = if c_refl < costs[n] { along(-0.5) } else { along(0.5) };
            let c_con = eval(&con);
            if c_con < costs[n].min(c_refl) {
                simplex[n] = con;
                costs[n] = c_con;
            } else {
                for i in 1..=n {
                    let mut v: Vec<f64> = (0..n)
                        .map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]))
                        .collect();
                    project(&mut v);
                    costs[i] = eval(&v);
                    simplex[i] = v;
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| costs[a].total_cmp(&costs[b])).unwrap_or(0);
    simplex.swap_remove(best)
}
