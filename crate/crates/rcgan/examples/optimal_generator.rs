//! Solve one small discrete problem by hand and inspect every piece of the
//! closed-form solution: the water-filling level beta, the generator mass
//! p[i] = max(0, beta q[i] - t[i]), the KKT multipliers, and the optimal
//! discriminator on the resulting three-way mixture.
//!
//! Run: cargo run --example optimal_generator

use rcgan::theory::{objective, optimal_discriminator, solve_beta, JointGrid};

fn main() {
    // Data mass q concentrates on the left half, penalty mass t on the right.
    // Partial overlap forces beta strictly between its 1 and 2 extremes.
    let q = [0.30, 0.25, 0.20, 0.10, 0.08, 0.05, 0.02, 0.00];
    let t = [0.00, 0.02, 0.05, 0.08, 0.10, 0.20, 0.25, 0.30];
    let grid = JointGrid::from_unnormalized(&q, &t).unwrap();
    let sol = solve_beta(&grid, 1e-12).unwrap();

    println!("beta   = {:.12}", sol.beta);
    println!("lambda = {:.12}", sol.lambda);
    println!();
    println!("cell      q        t        p     support  stationarity        mu");
    for i in 0..grid.len() {
        println!(
            "{i:4} {:8.4} {:8.4} {:8.4}   {:5}   {:+12.3e} {:+12.3e}",
            grid.q()[i],
            grid.t()[i],
            sol.p[i],
            sol.support[i],
            sol.stationarity[i],
            sol.mu[i],
        );
    }

    let p_mass: f64 = sol.p.iter().sum();
    println!("\nsum p = {p_mass:.15}  (must be 1)");

    // The solved p beats both the data distribution and the penalty
    // distribution as a candidate generator.
    let at_p = objective(grid.q(), grid.t(), &sol.p).unwrap();
    let at_q = objective(grid.q(), grid.t(), grid.q()).unwrap();
    let at_t = objective(grid.q(), grid.t(), grid.t()).unwrap();
    println!("objective at p* = {at_p:.12}");
    println!("objective at q  = {at_q:.12}");
    println!("objective at t  = {at_t:.12}");
    let floor = -(27.0f64 / 4.0).ln();
    println!("unconstrained floor -ln(27/4) = {floor:.12} (reached only when p = q = t)");

    // Optimal discriminator q / (q + t + p): above 1/3 where data mass
    // dominates the penalty+generator mixture, below where it does not.
    let d = optimal_discriminator(grid.q(), grid.t(), &sol.p).unwrap();
    println!("\ncell   D*(cell)   vs 1/3");
    for (i, v) in d.iter().enumerate() {
        match v {
            Some(v) => println!("{i:4}   {v:.6}   {}", if *v > 1.0 / 3.0 { "above" } else { "below" }),
            None => println!("{i:4}   (empty cell)"),
        }
    }
}
