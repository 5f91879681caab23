//! Nelder–Mead simplex minimization for small nonsmooth objectives.

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub initial_step: f64,
    pub max_evaluations: usize,
    /// Stop when the spread of simplex values falls below this.
    pub value_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            initial_step: 0.25,
            max_evaluations: 4000,
            value_tol: 1e-13,
        }
    }
}

impl NelderMead {
    /// Minimizes `f` from `start`; returns the best point and value.
    pub fn minimize(&self, start: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> (Vec<f64>, f64) {
        let dim = start.len();
        if dim == 0 {
            let v = f(start);
            return (Vec::new(), v);
        }
        let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
        for k in 0..dim {
            let mut p = start.to_vec();
            p[k] += self.initial_step;
            simplex.push(p);
        }
        let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
        let mut evaluations = dim + 1;

        while evaluations < self.max_evaluations {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();
            if (values[dim] - values[0]).abs() <= self.value_tol {
                break;
            }

            let centroid: Vec<f64> = (0..dim)
                .map(|k| simplex[..dim].iter().map(|p| p[k]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                (0..dim).map(|k| centroid[k] + t * (simplex[dim][k] - centroid[k])).collect()
            };

            let reflected = along(-1.0);
            let fr = f(&reflected);
            evaluations += 1;
            if fr < values[0] {
                let expanded = along(-2.0);
                let fe = f(&expanded);
                evaluations += 1;
                if fe < fr {
                    simplex[dim] = expanded;
                    values[dim] = fe;
                } else {
                    simplex[dim] = reflected;
                    values[dim] = fr;
                }
                continue;
            }
            if fr < values[dim - 1] {
                simplex[dim] = reflected;
                values[dim] = fr;
                continue;
            }
            let (contracted, fc) = if fr < values[dim] {
                let p = along(-0.5);
                let v = f(&p);
                (p, v)
            } else {
                let p = along(0.5);
                let v = f(&p);
                (p, v)
            };
            evaluations += 1;
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
                continue;
            }
            let best = simplex[0].clone();
            for i in 1..=dim {
                for k in 0..dim {
                    simplex[i][k] = best[k] + 0.5 * (simplex[i][k] - best[k]);
                }
                values[i] = f(&simplex[i]);
            }
            evaluations += dim;
        }

        let best = (0..=dim).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
        (simplex[best].clone(), values[best])
    }
}
