//! Exact discrete-grid account of the adversarial objective.
//!
//! Over a finite cell set, a data mass `q`, a penalty mass `t`, and a
//! generator mass `p` (all probability vectors) induce:
//!
//! * the closed-form optimal discriminator `D* = q / (q + t + p)`;
//! * the generator objective at that optimum,
//!   `C(p) = 2 KL((t+p)/2 || s/3) + KL(q || s/3) - ln(27/4)` with `s = q+t+p`;
//! * a unique optimal generator of water-filling form `p = max(0, beta q - t)`
//!   where `beta` in [1, 2] is fixed by total mass one.
//!
//! `solve_beta` finds beta by bisection on the positive-part mass and then
//! snaps it to the exact rational value implied by the identified support.
//! `minimize_objective_pgd` minimizes `C` directly by projected gradient
//! descent; it shares no logic with the solver and serves as its oracle.

use serde::{Deserialize, Serialize};

use crate::dist::{DistSpec, Grid2D};
use crate::error::{Error, Result};
use crate::tensor::csum;

/// ln(3/2), the constant part of dC/dp.
const LN_3_2: f64 = 0.405_465_108_108_164_4;

/// Paired data/penalty masses over one cell set, both normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointGrid {
    q: Vec<f64>,
    t: Vec<f64>,
}

impl JointGrid {
    /// Requires equal lengths, nonnegative finite entries, and both sums
    /// within 1e-12 of one.
    pub fn new(q: Vec<f64>, t: Vec<f64>) -> Result<JointGrid> {
        if q.is_empty() || q.len() != t.len() {
            return Err(Error::Shape(format!(
                "joint grid needs equal non-empty masses, got {}/{}",
                q.len(),
                t.len()
            )));
        }
        for (name, m) in [("q", &q), ("t", &t)] {
            if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Infeasible(format!("{name} has negative or non-finite mass")));
            }
            let total = csum(m.iter().copied());
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Infeasible(format!(
                    "{name} must sum to 1 within 1e-12, got {total}"
                )));
            }
        }
        Ok(JointGrid { q, t })
    }

    /// Normalizes both mass vectors, then constructs.
    pub fn from_unnormalized(q: &[f64], t: &[f64]) -> Result<JointGrid> {
        let norm = |name: &str, m: &[f64]| -> Result<Vec<f64>> {
            if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Infeasible(format!("{name} has negative or non-finite mass")));
            }
            let total = csum(m.iter().copied());
            if total <= 0.0 {
                return Err(Error::Infeasible(format!("{name} has zero total mass")));
            }
            Ok(m.iter().map(|v| v / total).collect())
        };
        JointGrid::new(norm("q", q)?, norm("t", t)?)
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

/// Pointwise optimal discriminator `q / (q + t + p)`. Cells with zero total
/// mass have no defined value and return `None`.
pub fn optimal_discriminator(q: &[f64], t: &[f64], p: &[f64]) -> Result<Vec<Option<f64>>> {
    check_masses(&[("q", q), ("t", t), ("p", p)])?;
    Ok(q.iter()
        .zip(t)
        .zip(p)
        .map(|((&q, &t), &p)| {
            let s = q + t + p;
            if s > 0.0 {
                Some(q / s)
            } else {
                None
            }
        })
        .collect())
}

/// Value of the adversarial game at the optimal discriminator:
/// `2 KL((t+p)/2 || s/3) + KL(q || s/3) - ln(27/4)`, natural log, with the
/// convention 0 ln 0 = 0. Requires `p` to be a probability vector.
pub fn objective(q: &[f64], t: &[f64], p: &[f64]) -> Result<f64> {
    check_masses(&[("q", q), ("t", t), ("p", p)])?;
    let total_p = csum(p.iter().copied());
    if (total_p - 1.0).abs() > 1e-9 {
        return Err(Error::Infeasible(format!(
            "p must sum to 1 within 1e-9, got {total_p}"
        )));
    }
    Ok(objective_unchecked(q, t, p))
}

fn objective_unchecked(q: &[f64], t: &[f64], p: &[f64]) -> f64 {
    let mut terms = Vec::with_capacity(2 * q.len());
    for ((&q, &t), &p) in q.iter().zip(t).zip(p) {
        let s = q + t + p;
        if s <= 0.0 {
            continue;
        }
        let b = s / 3.0;
        let a = (t + p) / 2.0;
        if a > 0.0 {
            terms.push(2.0 * a * (a / b).ln());
        }
        if q > 0.0 {
            terms.push(q * (q / b).ln());
        }
    }
    csum(terms) - (27.0f64 / 4.0).ln()
}

/// Total mass of the water-filling candidate `max(0, beta q - t)`.
/// Continuous, convex, and nondecreasing in beta; equals 1 at the optimum.
pub fn positive_part_mass(q: &[f64], t: &[f64], beta: f64) -> f64 {
    debug_assert_eq!(q.len(), t.len());
    csum(q.iter().zip(t).map(|(&q, &t)| (beta * q - t).max(0.0)))
}

/// Output of the exact generator solvers, with KKT-style diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSolution {
    /// Water-filling level in [1, 2].
    pub beta: f64,
    /// Optimal generator mass, `p[i] = max(0, beta q[i] - t[i])`.
    pub p: Vec<f64>,
    /// Cells with `beta q - t >= 0`.
    pub support: Vec<bool>,
    /// Multiplier of the total-mass constraint: `ln(2 (beta + 1) / (3 beta))`,
    /// the value that makes dC/dp + lambda vanish on the support.
    pub lambda: f64,
    /// Nonnegativity multipliers; zero on the support.
    pub mu: Vec<f64>,
    /// Per-cell stationarity residual of the Lagrangian; ~0 everywhere at the
    /// exact solution, 0 by convention on zero-mass cells.
    pub stationarity: Vec<f64>,
}

impl BetaSolution {
    fn from_beta(grid: &JointGrid, beta: f64) -> BetaSolution {
        let n = grid.len();
        let (q, t) = (grid.q(), grid.t());
        let mut p = vec![0.0; n];
        let mut support = vec![false; n];
        for i in 0..n {
            let v = beta * q[i] - t[i];
            support[i] = v >= 0.0;
            p[i] = v.max(0.0);
        }
        // On the support, t + p = beta q and s = (1 + beta) q, so the gradient
        // is ln(3 beta / (2 (1 + beta))); lambda is its negation.
        let lambda = (2.0 * (beta + 1.0) / (3.0 * beta)).ln();
        let mut mu = vec![0.0; n];
        let mut stationarity = vec![0.0; n];
        for i in 0..n {
            let s = q[i] + t[i] + p[i];
            if s <= 0.0 {
                continue;
            }
            // dC/dp_i = ln((t+p)/s) + ln(3/2); stationarity demands it equal
            // -lambda on the support and -lambda + mu off it.
            let g = ((t[i] + p[i]) / s).ln() + LN_3_2;
            if support[i] {
                stationarity[i] = g + lambda;
            } else {
                mu[i] = g + lambda;
            }
        }
        BetaSolution {
            beta,
            p,
            support,
            lambda,
            mu,
            stationarity,
        }
    }
}

/// Exact optimal generator via bisection on `positive_part_mass` over [1, 2],
/// refined by snapping beta to `(1 + sum_S t) / (sum_S q)` on the identified
/// support. The bracket always holds: the candidate mass is <= 1 at beta = 1
/// and >= 1 at beta = 2 for any valid grid.
pub fn solve_beta(grid: &JointGrid, tol: f64) -> Result<BetaSolution> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("solve_beta: bad tolerance {tol}")));
    }
    let (q, t) = (grid.q(), grid.t());
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    // 2^-52 per halving: reaches any tol >= 4e-16 in at most 52 steps.
    let max_iters = 64;
    let mut iters = 0;
    while hi - lo > tol && iters < max_iters {
        let mid = 0.5 * (lo + hi);
        if positive_part_mass(q, t, mid) >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    let mut beta = 0.5 * (lo + hi);
    if hi - lo > tol {
        return Err(Error::NonConvergence {
            iters,
            residual: hi - lo,
        });
    }
    // Snap to the exact level implied by the support at the bisection point.
    // When the support is identified correctly this lands on the true beta
    // (e.g. exactly 2 for q = t, exactly 1 for disjoint supports); if a
    // breakpoint still separates them, keep the bisection value.
    let (mut sq, mut st) = (Vec::new(), Vec::new());
    for i in 0..grid.len() {
        if beta * q[i] - t[i] >= 0.0 {
            sq.push(q[i]);
            st.push(t[i]);
        }
    }
    let support_q = csum(sq);
    if support_q > 0.0 {
        let snapped = ((1.0 + csum(st)) / support_q).clamp(1.0, 2.0);
        if (positive_part_mass(q, t, snapped) - 1.0).abs() <= 1e-12 {
            beta = snapped;
        }
    }
    let residual = (positive_part_mass(q, t, beta) - 1.0).abs();
    if residual > 1e-9 {
        return Err(Error::NonConvergence { iters, residual });
    }
    Ok(BetaSolution::from_beta(grid, beta))
}

/// Independent exact solver: sorts cells by the ratio t/q, walks candidate
/// supports in breakpoint order, and returns the closed-form beta for the
/// first support whose level is consistent. Used to cross-check `solve_beta`.
pub fn solve_beta_breakpoints(grid: &JointGrid) -> Result<BetaSolution> {
    let (q, t) = (grid.q(), grid.t());
    // Cells with q = 0 never enter the support with positive mass; cells are
    // admitted in increasing order of ratio r = t/q, since beta q - t >= 0
    // means r <= beta.
    let mut idx: Vec<usize> = (0..grid.len()).filter(|&i| q[i] > 0.0).collect();
    idx.sort_by(|&a, &b| (t[a] / q[a]).total_cmp(&(t[b] / q[b])));
    let mut acc_q = 0.0;
    let mut acc_t = 0.0;
    let mut k = 0;
    while k < idx.len() {
        let r = t[idx[k]] / q[idx[k]];
        // Admit the whole tie group at once.
        while k < idx.len() && t[idx[k]] / q[idx[k]] == r {
            acc_q += q[idx[k]];
            acc_t += t[idx[k]];
            k += 1;
        }
        let beta = (1.0 + acc_t) / acc_q;
        let next_r = idx.get(k).map(|&i| t[i] / q[i]).unwrap_or(f64::INFINITY);
        // Valid iff every admitted cell satisfies r <= beta and none of the
        // excluded ones does.
        if beta >= r && beta <= next_r {
            return Ok(BetaSolution::from_beta(grid, beta.clamp(1.0, 2.0)));
        }
    }
    Err(Error::Infeasible(
        "no consistent support found (grid violates mass preconditions?)".into(),
    ))
}

/// Euclidean projection onto the probability simplex.
pub fn simplex_project(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        acc += u;
        let cand = (acc - 1.0) / (k + 1) as f64;
        if u - cand > 0.0 {
            tau = cand;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Oracle minimizer of `objective` by projected gradient descent from the
/// uniform start. Independent of the water-filling solver. The step is halved
/// whenever a step fails to decrease the objective; convergence is declared
/// when an accepted step moves the iterate less than 1e-11 in l1.
pub fn minimize_objective_pgd(grid: &JointGrid, max_iters: usize, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!("pgd: bad step {step}")));
    }
    let (q, t) = (grid.q(), grid.t());
    let n = grid.len();
    let mut p = vec![1.0 / n as f64; n];
    let mut obj = objective_unchecked(q, t, &p);
    let mut step = step;
    let mut grad = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        for i in 0..n {
            let s = q[i] + t[i] + p[i];
            grad[i] = if s <= 0.0 {
                // Limit of the gradient as mass enters an empty cell; positive,
                // so such cells stay empty.
                LN_3_2
            } else {
                ((t[i] + p[i]) / s).max(1e-18).ln() + LN_3_2
            };
        }
        let cand: Vec<f64> =
            simplex_project(&p.iter().zip(&grad).map(|(&p, &g)| p - step * g).collect::<Vec<_>>());
        let cand_obj = objective_unchecked(q, t, &cand);
        if cand_obj > obj + 1e-15 {
            step *= 0.5;
            if step < 1e-18 {
                break;
            }
            continue;
        }
        residual = csum(cand.iter().zip(&p).map(|(&a, &b)| (a - b).abs()));
        p = cand;
        obj = cand_obj;
        if residual < 1e-11 {
            return Ok(p);
        }
    }
    Err(Error::NonConvergence {
        iters: max_iters,
        residual,
    })
}

/// Full 2-D demo pipeline: discretize a data and a penalty distribution onto
/// one grid, solve for the optimal generator, and evaluate the optimal
/// discriminator and objective at the solution.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub grid: Grid2D,
    pub q: Vec<f64>,
    pub t: Vec<f64>,
    pub solution: BetaSolution,
    /// Optimal discriminator at the optimal generator; `None` on empty cells.
    pub d_opt: Vec<Option<f64>>,
    /// Objective value at the optimal generator.
    pub objective: f64,
}

pub fn optimal_generator_grid(
    q_spec: &DistSpec,
    t_spec: &DistSpec,
    grid: &Grid2D,
    tol: f64,
) -> Result<GridSolution> {
    let q = q_spec.density_on_grid(grid)?;
    let t = t_spec.density_on_grid(grid)?;
    let joint = JointGrid::new(q, t)?;
    let solution = solve_beta(&joint, tol)?;
    let d_opt = optimal_discriminator(joint.q(), joint.t(), &solution.p)?;
    let objective = objective(joint.q(), joint.t(), &solution.p)?;
    let (q, t) = (joint.q().to_vec(), joint.t().to_vec());
    Ok(GridSolution {
        grid: *grid,
        q,
        t,
        solution,
        d_opt,
        objective,
    })
}

fn check_masses(named: &[(&str, &[f64])]) -> Result<()> {
    let len = named[0].1.len();
    for (name, m) in named {
        if m.len() != len || len == 0 {
            return Err(Error::Shape(format!(
                "{name} has {} cells, expected non-empty {len}",
                m.len()
            )));
        }
        if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Infeasible(format!(
                "{name} has negative or non-finite mass"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    use crate::seeds::stream_rng;

    fn random_grid(n: usize, seed: u64) -> JointGrid {
        let mut rng = stream_rng(seed, 90);
        let q: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let t: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        JointGrid::from_unnormalized(&q, &t).unwrap()
    }

    #[test]
    fn two_cell_worked_example() {
        // q = (0.7, 0.3), t = (0.2, 0.8). Candidate support {cell 0} gives
        // beta = (1 + 0.2) / 0.7 = 12/7; cell 1 stays out since
        // 12/7 * 0.3 - 0.8 < 0. Then p = (12/7 * 0.7 - 0.2, 0) = (1, 0).
        let grid = JointGrid::new(vec![0.7, 0.3], vec![0.2, 0.8]).unwrap();
        for sol in [
            solve_beta(&grid, 1e-12).unwrap(),
            solve_beta_breakpoints(&grid).unwrap(),
        ] {
            assert!((sol.beta - 12.0 / 7.0).abs() < 1e-12, "beta {}", sol.beta);
            assert!((sol.p[0] - 1.0).abs() < 1e-12);
            assert_eq!(sol.p[1], 0.0);
            assert_eq!(sol.support, vec![true, false]);
            // lambda = ln(2 (beta+1) / (3 beta)) with beta = 12/7.
            assert!((sol.lambda - (19.0f64 / 18.0).ln()).abs() < 1e-12);
            assert!(sol.mu[1] > 0.0, "inactive cell multiplier {}", sol.mu[1]);
            assert!(sol.stationarity[0].abs() < 1e-12);
        }
    }

    #[test]
    fn discriminator_formula_and_sentinel() {
        let d = optimal_discriminator(&[0.5, 0.0], &[0.3, 0.0], &[0.2, 0.0]).unwrap();
        assert_eq!(d[0], Some(0.5));
        assert_eq!(d[1], None);
        assert!(optimal_discriminator(&[-0.1], &[0.5], &[0.5]).is_err());
        assert!(optimal_discriminator(&[0.5, 0.5], &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn discriminator_between_zero_and_one() {
        let grid = random_grid(64, 5);
        let sol = solve_beta(&grid, 1e-12).unwrap();
        let d = optimal_discriminator(grid.q(), grid.t(), &sol.p).unwrap();
        for (i, v) in d.iter().enumerate() {
            let v = v.expect("random grid has positive mass everywhere");
            assert!((0.0..=1.0).contains(&v));
            // With p >= 0, adding generator mass can only shrink q/(q+t+p).
            let cap = grid.q()[i] / (grid.q()[i] + grid.t()[i]);
            assert!(v <= cap + 1e-15);
        }
    }

    #[test]
    fn objective_reaches_known_minimum_when_all_equal() {
        let grid = random_grid(32, 6);
        let q = grid.q().to_vec();
        let c = objective(&q, &q, &q).unwrap();
        assert!(
            (c + (27.0f64 / 4.0).ln()).abs() < 1e-12,
            "objective at q=t=p: {c}"
        );
    }

    #[test]
    fn objective_validates_inputs() {
        assert!(objective(&[0.5, 0.5], &[0.5, 0.5], &[0.7, 0.7]).is_err());
        assert!(objective(&[0.5, 0.5], &[0.5, 0.5], &[-0.1, 1.1]).is_err());
        assert!(objective(&[0.5, 0.5], &[0.5, 0.5], &[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn joint_grid_validates_mass() {
        assert!(JointGrid::new(vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(JointGrid::new(vec![0.5, 0.5], vec![0.5, -0.5]).is_err());
        assert!(JointGrid::new(vec![], vec![]).is_err());
        assert!(JointGrid::from_unnormalized(&[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(JointGrid::from_unnormalized(&[3.0, 1.0], &[1.0, 1.0]).is_ok());
    }

    #[test]
    fn identical_masses_give_beta_two_and_p_equals_q_exactly() {
        for seed in 0..5 {
            let mut rng = stream_rng(seed, 91);
            let n = rng.random_range(2..200);
            let q: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let grid = JointGrid::from_unnormalized(&q, &q).unwrap();
            let sol = solve_beta(&grid, 1e-12).unwrap();
            assert_eq!(sol.beta, 2.0, "n={n}");
            assert_eq!(sol.p, grid.q(), "p must equal q bit-for-bit");
        }
    }

    #[test]
    fn disjoint_supports_give_beta_one_and_p_equals_q_exactly() {
        for seed in 0..5 {
            let mut rng = stream_rng(seed, 92);
            let n = rng.random_range(2..200usize);
            let half = n / 2;
            let mut q = vec![0.0; n];
            let mut t = vec![0.0; n];
            for i in 0..n {
                if i < half.max(1) {
                    q[i] = rng.random::<f64>() + 1e-3;
                } else {
                    t[i] = rng.random::<f64>() + 1e-3;
                }
            }
            if half == 0 || half == n {
                continue;
            }
            let grid = JointGrid::from_unnormalized(&q, &t).unwrap();
            let sol = solve_beta(&grid, 1e-12).unwrap();
            assert_eq!(sol.beta, 1.0, "n={n}");
            assert_eq!(sol.p, grid.q());
        }
    }

    #[test]
    fn bisection_and_breakpoint_solvers_agree() {
        for seed in 0..20 {
            let grid = random_grid(48, 100 + seed);
            let a = solve_beta(&grid, 1e-12).unwrap();
            let b = solve_beta_breakpoints(&grid).unwrap();
            assert!(
                (a.beta - b.beta).abs() < 1e-12,
                "seed {seed}: {} vs {}",
                a.beta,
                b.beta
            );
            let l1: f64 = csum(a.p.iter().zip(&b.p).map(|(&x, &y)| (x - y).abs()));
            assert!(l1 < 1e-12, "seed {seed}: p gap {l1}");
        }
    }

    #[test]
    fn pgd_recovers_waterfilling_solution() {
        // Includes the two-cell boundary case and random interior cases.
        let grids = vec![
            JointGrid::new(vec![0.7, 0.3], vec![0.2, 0.8]).unwrap(),
            random_grid(16, 7),
            random_grid(16, 8),
            random_grid(16, 9),
        ];
        for (k, grid) in grids.iter().enumerate() {
            let sol = solve_beta(&grid, 1e-12).unwrap();
            let p = minimize_objective_pgd(&grid, 200_000, 0.05).unwrap();
            let l1: f64 = csum(sol.p.iter().zip(&p).map(|(&a, &b)| (a - b).abs()));
            assert!(l1 < 1e-3, "grid {k}: l1 gap {l1}");
            let c_solver = objective(grid.q(), grid.t(), &sol.p).unwrap();
            let c_pgd = objective(grid.q(), grid.t(), &p).unwrap();
            assert!(
                c_solver <= c_pgd + 1e-9,
                "grid {k}: solver {c_solver} vs pgd {c_pgd}"
            );
        }
    }

    #[test]
    fn pgd_reports_non_convergence() {
        let grid = random_grid(16, 10);
        assert!(matches!(
            minimize_objective_pgd(&grid, 3, 0.05),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn simplex_projection_known_values() {
        assert_eq!(simplex_project(&[2.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(simplex_project(&[0.5, 0.5]), vec![0.5, 0.5]);
        let p = simplex_project(&[0.3, 0.3, 0.1]);
        for (got, want) in p.iter().zip([0.4, 0.4, 0.2]) {
            assert!((got - want).abs() < 1e-15);
        }
        let far = simplex_project(&[-5.0, 3.0, 2.5]);
        assert!((csum(far.iter().copied()) - 1.0).abs() < 1e-12);
        assert_eq!(far[0], 0.0);
    }

    #[test]
    fn demo_pipeline_solves_concentrated_vs_flat() {
        // Narrow data mass against a broad penalty: the optimal generator
        // must concentrate where q dominates and vanish in the tails.
        let grid = Grid2D::square(-1.0, 1.0, 24).unwrap();
        let q_spec = DistSpec::gaussian(2, 0.0, 0.02);
        let t_spec = DistSpec::uniform(2, -1.0, 1.0);
        let out = optimal_generator_grid(&q_spec, &t_spec, &grid, 1e-12).unwrap();
        assert!(out.solution.beta > 1.0 && out.solution.beta < 2.0);
        let total: f64 = csum(out.solution.p.iter().copied());
        assert!((total - 1.0).abs() < 1e-10);
        // Center cell carries generator mass, the corner does not.
        let center = grid.index(12, 12);
        let corner = grid.index(0, 0);
        assert!(out.solution.p[center] > 0.0);
        assert_eq!(out.solution.p[corner], 0.0);
        assert!(out.objective >= -(27.0f64 / 4.0).ln() - 1e-12);
        assert!(out.d_opt[center].unwrap() > out.d_opt[corner].unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn solver_invariants_on_random_grids(
            qs in proptest::collection::vec(0.0f64..1.0, 2..80),
            ts in proptest::collection::vec(0.0f64..1.0, 2..80),
        ) {
            let n = qs.len().min(ts.len());
            let (qs, ts) = (&qs[..n], &ts[..n]);
            prop_assume!(csum(qs.iter().copied()) > 1e-3);
            prop_assume!(csum(ts.iter().copied()) > 1e-3);
            let grid = JointGrid::from_unnormalized(qs, ts).unwrap();
            let sol = solve_beta(&grid, 1e-12).unwrap();
            prop_assert!((1.0..=2.0).contains(&sol.beta));
            prop_assert!((csum(sol.p.iter().copied()) - 1.0).abs() < 1e-10);
            prop_assert!(sol.p.iter().all(|&v| v >= 0.0));
            for i in 0..n {
                let slack = sol.p[i] * (grid.t()[i] - sol.beta * grid.q()[i]).max(0.0);
                prop_assert!(slack < 1e-12);
                if !sol.support[i] {
                    prop_assert_eq!(sol.p[i], 0.0);
                    prop_assert!(sol.mu[i] > -1e-12);
                } else {
                    prop_assert!(sol.stationarity[i].abs() < 1e-9);
                }
            }
            // Monotone bracketing of the mass function.
            prop_assert!(positive_part_mass(grid.q(), grid.t(), 1.0) <= 1.0 + 1e-12);
            prop_assert!(positive_part_mass(grid.q(), grid.t(), 2.0) >= 1.0 - 1e-12);
        }

        #[test]
        fn solver_beats_random_feasible_points(
            qs in proptest::collection::vec(0.01f64..1.0, 8),
            ts in proptest::collection::vec(0.01f64..1.0, 8),
            ps in proptest::collection::vec(0.01f64..1.0, 8),
        ) {
            let grid = JointGrid::from_unnormalized(&qs, &ts).unwrap();
            let total = csum(ps.iter().copied());
            let p_rand: Vec<f64> = ps.iter().map(|v| v / total).collect();
            let sol = solve_beta(&grid, 1e-12).unwrap();
            let c_opt = objective(grid.q(), grid.t(), &sol.p).unwrap();
            let c_rand = objective(grid.q(), grid.t(), &p_rand).unwrap();
            prop_assert!(c_opt <= c_rand + 1e-12, "{} vs {}", c_opt, c_rand);
            // Global lower bound of the objective.
            prop_assert!(c_opt >= -(27.0f64/4.0).ln() - 1e-12);
        }
    }
}
