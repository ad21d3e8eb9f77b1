//! Generators, independent oracles and counted property checks shared by
//! the `properties` and `acceptance` targets. Each check returns a short
//! summary on success and the first counterexample on failure.
#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use std::f64::consts::{PI, SQRT_2};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sigma_minmax::closed_form::{self, TriangleParams};
use sigma_minmax::geometry::{Configuration, FamilyTree, Point2, EPS};
use sigma_minmax::lp::{solve_max, Constraint, LpProblem};
use sigma_minmax::objective::{self, eval_f, eval_f_flat, RadiiAssignment};
use sigma_minmax::oracle;
use sigma_minmax::proof::{self, SweepParams};

pub type Check = Result<String, String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Origin plus `n − 1` points uniform in `[-1.2, 1.2]²`.
pub fn random_config(rng: &mut impl Rng, n: usize, sigma: f64) -> Configuration {
    let mut pts = vec![Point2::ORIGIN];
    while pts.len() < n {
        pts.push(Point2::new(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)));
    }
    Configuration::planar(pts, sigma).unwrap()
}

pub fn uniform_in_disk(rng: &mut impl Rng, centre: Point2, radius: f64) -> Point2 {
    let rho = radius * rng.gen::<f64>().sqrt();
    let theta = rng.gen_range(0.0..2.0 * PI);
    centre + Point2::new(rho * theta.cos(), rho * theta.sin())
}

/// A member of `𝓕_σ(k)`: every point of the previous generation gets a
/// child pair in the closed unit disk around it. The children sit roughly
/// opposite each other and the pair is resampled until it is at least `2σ`
/// apart, which needs `σ < 1` to terminate.
pub fn random_family(rng: &mut impl Rng, k: usize, sigma: f64) -> (Configuration, FamilyTree) {
    let mut pts = vec![Point2::ORIGIN];
    let mut edges = Vec::new();
    let mut leaves = vec![0usize];
    let polar = |rho: f64, theta: f64| Point2::new(rho * theta.cos(), rho * theta.sin());
    for _ in 0..k {
        let mut next = Vec::new();
        for &parent in &leaves {
            let p = pts[parent];
            let (q1, q2) = loop {
                let theta = rng.gen_range(0.0..2.0 * PI);
                let turn = rng.gen_range(-0.6..0.6);
                let q1 = p + polar(rng.gen_range(sigma..=1.0), theta);
                let q2 = p + polar(rng.gen_range(sigma..=1.0), theta + PI + turn);
                if q1.dist(q2) >= 2.0 * sigma {
                    break (q1, q2);
                }
            };
            pts.push(q1);
            pts.push(q2);
            let (c1, c2) = (pts.len() - 2, pts.len() - 1);
            edges.push((parent, c1, c2));
            next.extend([c1, c2]);
        }
        leaves = next;
    }
    let cfg = Configuration::planar_with_origin(pts, sigma, 0).unwrap();
    (cfg, FamilyTree::new(edges))
}

pub fn family_sampler_check(samples: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    for k in 0..=3 {
        for s in 0..samples {
            let sigma = rng.gen_range(0.5..0.98);
            let (cfg, tree) = random_family(&mut rng, k, sigma);
            if !cfg.validate_family(&tree).map_err(|e| e.to_string())? {
                return Err(format!("sample {s} of generation {k} rejected at sigma {sigma}"));
            }
        }
    }
    Ok(format!("{} families, k <= 3", 4 * samples))
}

// ---------------------------------------------------------------------------
// Objective invariants

pub fn nonneg_and_monotone(count: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut worst_subset: f64 = f64::NEG_INFINITY;
    let mut worst_sigma: f64 = f64::NEG_INFINITY;
    for c in 0..count {
        let n = rng.gen_range(1..=6);
        let sigma = rng.gen_range(0.5..0.95);
        let cfg = random_config(&mut rng, n, sigma);
        let full = objective::m_sigma(&cfg).map_err(|e| e.to_string())?.value;
        if full < 0.0 {
            return Err(format!("config {c}: M_sigma = {full} < 0"));
        }
        let mut idx: Vec<usize> = (1..n).filter(|_| rng.gen_bool(0.5)).collect();
        idx.insert(0, 0);
        let sub = objective::m_sigma(&cfg.subset(&idx).unwrap()).map_err(|e| e.to_string())?.value;
        worst_subset = worst_subset.max(sub - full);
        if sub > full + 2.0 * EPS {
            return Err(format!("config {c}: subset {idx:?} gives {sub} > {full}"));
        }
        let higher = sigma + rng.gen_range(0.0..(1.0 - sigma));
        let up = objective::m_sigma(&cfg.with_sigma(higher).unwrap()).map_err(|e| e.to_string())?.value;
        worst_sigma = worst_sigma.max(full - up);
        if full > up + 2.0 * EPS {
            return Err(format!("config {c}: sigma {sigma} -> {higher} drops {full} to {up}"));
        }
    }
    Ok(format!("{count} configs; worst subset excess {worst_subset:+.2e}, worst sigma drop {worst_sigma:+.2e}"))
}

pub fn lipschitz(count: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut worst: f64 = f64::NEG_INFINITY;
    for c in 0..count {
        let n = rng.gen_range(2..=5);
        let sigma = rng.gen_range(0.55..0.95);
        let p = random_config(&mut rng, n, sigma);
        let pts: Vec<Point2> = p.points().unwrap().to_vec();
        let mut moved = pts.clone();
        let mut total = 0.0;
        for q in moved.iter_mut().skip(1) {
            let shift = uniform_in_disk(&mut rng, Point2::ORIGIN, 0.1);
            *q = *q + shift;
            total += shift.norm();
        }
        let q = Configuration::planar_with_origin(moved, sigma, 0).unwrap();
        let value = |cfg: &Configuration| objective::m_sharp(cfg, 0).unwrap().unwrap().value;
        let gap = (value(&p) - value(&q)).abs();
        worst = worst.max(gap - total);
        if gap > total + 2.0 * EPS {
            return Err(format!("pair {c}: |ΔM♯| = {gap} > Σ|p − q| = {total}"));
        }
    }
    Ok(format!("{count} perturbation pairs; worst slack {worst:+.2e}"))
}

pub fn flat_homogeneity(count: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let n = rng.gen_range(1..=6);
        let sigma = rng.gen_range(0.5..=1.0);
        let cfg = random_config(&mut rng, n, sigma);
        let pts = cfg.points().unwrap();
        let gap = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| pts[i].dist(pts[j])).fold(0.1, f64::min);
        let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..gap / 2.0)).collect();
        let radii = RadiiAssignment::new(&cfg, r.clone()).map_err(|e| e.to_string())?;
        let base = eval_f_flat(&cfg, &radii);
        for lambda in [0.5, 0.7, 1.3, 2.0] {
            let scaled = cfg.scaled(lambda);
            let sr: Vec<f64> = r.iter().map(|v| v * lambda).collect();
            // scaled radii may leave [0, 1]; the flat branch is defined by formula
            let value = flat_by_formula(&scaled, &sr);
            worst = worst.max((value - lambda * base).abs());
        }
    }
    if worst <= 1e-12 {
        Ok(format!("{count} configs, lambda in {{0.5, 0.7, 1.3, 2}}; worst {worst:.1e}"))
    } else {
        Err(format!("homogeneity error {worst:e}"))
    }
}

/// `Σr − diam/(2σ)` written out directly, without radius validation.
pub fn flat_by_formula(cfg: &Configuration, r: &[f64]) -> f64 {
    let mut diam: f64 = 0.0;
    for i in 0..r.len() {
        for j in i..r.len() {
            if r[i] > 0.0 && r[j] > 0.0 {
                diam = diam.max(cfg.distance(i, j).unwrap() + r[i] + r[j]);
            }
        }
    }
    r.iter().sum::<f64>() - diam / (2.0 * cfg.sigma())
}

pub fn witness_reproduction(count: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut worst_lp: f64 = 0.0;
    let mut worst_eval: f64 = 0.0;
    for c in 0..count {
        let (n, rows) = (rng.gen_range(1..=6), rng.gen_range(0..=12));
        let lp = random_packing_lp(&mut rng, n, rows);
        if let sigma_minmax::lp::CertifiedLpResult::Optimal { point, certified_value } = solve_max(&lp).unwrap() {
            let err = (lp.objective_at(&point) - EPS - certified_value).abs();
            worst_lp = worst_lp.max(err);
            if err > 1e-12 {
                return Err(format!("LP {c}: objective at point misses certified value by {err:e}"));
            }
        }
        let n = rng.gen_range(1..=5);
        let sigma = rng.gen_range(0.5..=1.0);
        let cfg = random_config(&mut rng, n, sigma);
        let best = objective::m_sigma(&cfg).unwrap();
        let direct = eval_f(&cfg, &best.witness);
        let err = best.value - direct;
        worst_eval = worst_eval.max(err.abs());
        if !(-EPS - 1e-12..=1e-12).contains(&err) {
            return Err(format!("config {c}: value {} but witness evaluates to {direct}", best.value));
        }
    }
    Ok(format!("{count} LPs and configs; LP error {worst_lp:.1e}, witness gap {worst_eval:.1e}"))
}

/// Box `[0, 1]^n`, nonnegative rows with nonnegative bounds, any objective.
/// Rounding a feasible point down stays feasible, which the grid oracle
/// relies on.
pub fn random_packing_lp(rng: &mut impl Rng, n: usize, rows: usize) -> LpProblem {
    let objective = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut lp = LpProblem::new(vec![(0.0, 1.0); n], objective);
    lp.objective_offset = rng.gen_range(-1.0..1.0);
    for _ in 0..rows {
        let row = (0..n).map(|_| if rng.gen_bool(0.6) { rng.gen_range(0.0..1.0) } else { 0.0 }).collect();
        lp.push(Constraint::general(row, rng.gen_range(0.0..1.5)));
    }
    lp
}

/// Maximum over the grid `{0, h, …}^n` intersected with the feasible set.
pub fn lp_grid_max(lp: &LpProblem, h: f64) -> f64 {
    let n = lp.num_vars();
    let steps = (1.0 / h).round() as usize;
    let mut x = vec![0.0; n];
    let mut idx = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        for k in 0..n {
            x[k] = idx[k] as f64 * h;
        }
        if lp.max_violation(&x) <= 0.0 {
            best = best.max(lp.objective_at(&x));
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            idx[k] += 1;
            if idx[k] <= steps {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn lp_grid_oracle(count: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for c in 0..count {
        let n = rng.gen_range(1..=4);
        // the grid is exhaustive, so its step grows with the dimension
        let h = [1e-3, 1e-3, 1e-2, 2.5e-2][n - 1];
        let rows = rng.gen_range(0..=10);
        let lp = random_packing_lp(&mut rng, n, rows);
        let lp_value = solve_max(&lp).unwrap().value().unwrap() + EPS;
        let grid = lp_grid_max(&lp, h);
        let tol = h * lp.objective.iter().map(|c| c.abs()).sum::<f64>() + EPS;
        worst = worst.max(grid - lp_value);
        if lp_value < grid - 1e-9 || lp_value > grid + tol {
            return Err(format!("LP {c} (n = {n}): solver {lp_value}, grid {grid}, tolerance {tol:e}"));
        }
    }
    Ok(format!("{count} random LPs; worst grid excess {worst:+.1e}"))
}

pub fn config_grid_oracle(count: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for c in 0..count {
        let n = rng.gen_range(1..=3);
        let sigma = rng.gen_range(0.5..=1.0);
        let cfg = random_config(&mut rng, n, sigma);
        let grid = oracle::grid_maxima(&cfg, 1e-3).unwrap();
        let tol = 1e-3 * n as f64 + EPS;
        let sharp = objective::m_sharp(&cfg, 0).unwrap().unwrap().value;
        let flat = objective::m_flat(&cfg).unwrap().value;
        for (what, lp, g) in [("sharp", sharp, grid.sharp), ("flat", flat, grid.flat)] {
            worst = worst.max((lp - g).abs());
            if (lp - g).abs() > tol {
                return Err(format!("config {c} ({n} points) {what}: LP {lp}, grid {g}"));
            }
        }
    }
    Ok(format!("{count} configs of <= 3 points; worst gap {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// Triangle formula

/// A random admissible triangle `{O, (0, d1), p2}` with `|p2| = d2 ≤ d1`,
/// `p2.x ≥ 0` and `D = |p1 − p2| ∈ [2σ, d1 + d2]`. Half the draws hug
/// `d1 = 1` and `D = 2σ`, where the minimum of the formula sits.
pub fn random_triangle(rng: &mut impl Rng, sigma: f64) -> (TriangleParams, Point2, Point2) {
    loop {
        let near = rng.gen_bool(0.5);
        let d1: f64 = if near { 1.0 - rng.gen_range(0.0..0.02) } else { rng.gen_range(sigma..=1.0) };
        let d2: f64 = rng.gen_range((2.0 * sigma - d1).max(0.0)..=d1);
        if d1 + d2 < 2.0 * sigma {
            continue;
        }
        let lo = (2.0 * sigma).max((d1 - d2).abs());
        let d = if near { (lo + rng.gen_range(0.0..0.02)).min(d1 + d2) } else { rng.gen_range(lo..=d1 + d2) };
        // law of cosines for the angle at O between p1 and p2
        let cos = ((d1 * d1 + d2 * d2 - d * d) / (2.0 * d1 * d2)).clamp(-1.0, 1.0);
        let sin = (1.0 - cos * cos).sqrt();
        let (p1, p2) = (Point2::new(0.0, d1), Point2::new(d2 * sin, d2 * cos));
        let t = TriangleParams::new(p1.dist(p2), d1, d2);
        if t.check(sigma).is_ok() {
            return (t, p1, p2);
        }
    }
}

/// The triangle formula against the LP value of `M♯({O, p1, p2})`.
pub fn triangle_formula_vs_lp(count: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for c in 0..count {
        let sigma = rng.gen_range(0.55..=0.95);
        let (t, p1, p2) = random_triangle(&mut rng, sigma);
        let exact = closed_form::max_diesis(sigma, t).map_err(|e| e.to_string())?;
        let cfg = Configuration::planar(vec![Point2::ORIGIN, p1, p2], sigma).unwrap();
        let lp = objective::m_sharp(&cfg, 0).unwrap().unwrap().value;
        worst = worst.max((exact - lp).abs());
        if (exact - lp).abs() > 2.0 * EPS {
            return Err(format!("triangle {c} {t:?} at sigma {sigma}: formula {exact}, LP {lp}"));
        }
    }
    Ok(format!("{count} triangles; worst gap {worst:.2e} <= {:.0e}", 2.0 * EPS))
}

/// The two pair terms of the triangle formula without the singleton term:
/// the quantity whose minimum over admissible triangles is the cubic
/// `(8σ³ + 4σ² − 3σ − 3)/(4σ(σ + 1))`.
pub fn pair_terms(sigma: f64, t: TriangleParams) -> f64 {
    let TriangleParams { d, d1, d2 } = t;
    let a = 2.0 * sigma * d - (d + d1 + d2) / 2.0;
    let b = sigma * (d + d1 + d2) - (d + 3.0 * d1 - d2) / 2.0;
    (a.max(b) - 0.5) / (2.0 * sigma)
}

/// At each σ: the pair terms at the minimizer equal the cubic expression,
/// `max_diesis` there is that value joined with the singleton value
/// `1 − 3/(4σ)`, and no random admissible triangle goes lower in either.
pub fn minimizer_checks(sigmas: &[f64], trials: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut notes = Vec::new();
    for &sigma in sigmas {
        let t = closed_form::one_gen_minimizer(sigma).map_err(|e| e.to_string())?;
        let cubic = (8.0 * sigma.powi(3) + 4.0 * sigma * sigma - 3.0 * sigma - 3.0) / (4.0 * sigma * (sigma + 1.0));
        let pair = pair_terms(sigma, t);
        if (pair - cubic).abs() > 1e-9 {
            return Err(format!("sigma {sigma}: pair terms at the minimizer {pair}, cubic {cubic}"));
        }
        let singleton = 1.0 - 3.0 / (4.0 * sigma);
        let at = closed_form::max_diesis(sigma, t).map_err(|e| e.to_string())?;
        if (at - cubic.max(singleton)).abs() > 1e-9 {
            return Err(format!("sigma {sigma}: max_diesis at the minimizer {at}, expected {}", cubic.max(singleton)));
        }
        let mut lowest = f64::INFINITY;
        for _ in 0..trials {
            let (t, _, _) = random_triangle(&mut rng, sigma);
            let v = closed_form::max_diesis(sigma, t).map_err(|e| e.to_string())?;
            let p = pair_terms(sigma, t);
            lowest = lowest.min(p);
            if v < at - 1e-9 || p < pair - 1e-9 {
                return Err(format!("sigma {sigma}: {t:?} gives {v} (pair terms {p}) below the minimizer"));
            }
        }
        let note = if singleton > cubic { " (singleton term dominates max_diesis)" } else { "" };
        notes.push(format!("{sigma:.5}: {cubic:+.6}, search min {lowest:+.6}{note}"));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// Sweep invariants

/// The first `count` cubes of the default shuffled order that S1 does not
/// dispose of (their nets are nonempty).
pub fn hard_cubes(params: &SweepParams, count: usize) -> Vec<(Point2, Point2)> {
    let mut cubes = proof::discretize_omega(params);
    cubes.shuffle(&mut rng(params.seed));
    cubes.into_iter().filter(|&(p1, p2)| !proof::check_s1(params, p1, p2)).take(count).collect()
}

/// Random members of `X_σ(p1, p2, r, m)` (checked by evaluating `M♯`
/// directly) must lie within `δ₁/√2` of the net.
pub fn net_property(cubes: usize, samples: usize, delta1: f64, seed: u64) -> Check {
    let params = SweepParams::default();
    let mut rng = rng(seed);
    let (m, r) = (params.m_delta(), params.r_delta());
    let opts = objective::ObjectiveOptions::pipeline_parity();
    let mut members = 0;
    let mut worst: f64 = 0.0;
    for (p1, p2) in hard_cubes(&params, cubes) {
        let net = proof::x_net(&params, delta1, p1, p2, r, m);
        for _ in 0..samples {
            let q = uniform_in_disk(&mut rng, p1, r);
            let cfg = Configuration::planar_with_origin(vec![Point2::ORIGIN, p1, p2, q], params.sigma, 0).unwrap();
            let value = objective::m_sharp_with(&cfg, 0, opts).unwrap().map_or(f64::NEG_INFINITY, |v| v.value);
            if value > m {
                continue;
            }
            members += 1;
            let nearest = net.iter().map(|p| p.dist(q)).fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
            if nearest > delta1 / SQRT_2 {
                return Err(format!("cube {p1}/{p2}: member {q} is {nearest} from the net"));
            }
        }
    }
    if members == 0 {
        return Err("no members sampled".into());
    }
    Ok(format!("{cubes} cubes, {members} members; farthest {worst:.4} <= {:.4}", delta1 / SQRT_2))
}

pub fn brute_bicolor_k4(colors: &[bool], adj: &[Vec<bool>]) -> bool {
    let n = colors.len();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for d in (c + 1)..n {
                    let q = [a, b, c, d];
                    let trues = q.iter().filter(|&&v| colors[v]).count();
                    if trues == 2 && (0..4).all(|u| ((u + 1)..4).all(|v| adj[q[u]][q[v]])) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

pub fn k4_oracle(count: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut positives = 0;
    for g in 0..count {
        let n = rng.gen_range(0..=12);
        let density = rng.gen_range(0.1..0.95);
        let colors: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let mut adj = vec![vec![false; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let e = rng.gen_bool(density);
                adj[i][j] = e;
                adj[j][i] = e;
            }
        }
        let expected = brute_bicolor_k4(&colors, &adj);
        positives += expected as usize;
        if proof::contains_bicolor_k4(&colors, &adj) != expected {
            return Err(format!("graph {g}: expected {expected}"));
        }
    }
    Ok(format!("{count} graphs, {positives} with a bicoloured K4"))
}

/// Inflating `eps` tenfold must never make a strategy succeed where it
/// failed at the default. S1 and every S2 `δ₁` are compared on all cubes;
/// S3 on the cubes that need it at the default tolerance.
pub fn eps_audit(count: usize) -> Check {
    let base = SweepParams::default();
    let wide = SweepParams { eps: 10.0 * EPS, ..SweepParams::default() };
    let mut cubes = proof::discretize_omega(&base);
    cubes.shuffle(&mut rng(base.seed));
    cubes.truncate(count);
    let mut s3_runs = 0;
    for (k, &(p1, p2)) in cubes.iter().enumerate() {
        let s1 = proof::check_s1(&base, p1, p2);
        if proof::check_s1(&wide, p1, p2) && !s1 {
            return Err(format!("cube {k}: S1 only with inflated eps"));
        }
        let mut any_s2 = false;
        for &d in &base.s2_deltas {
            let held = proof::s2_holds(&base, d, p1, p2);
            any_s2 |= held;
            if proof::s2_holds(&wide, d, p1, p2) && !held {
                return Err(format!("cube {k}: S2({d}) only with inflated eps"));
            }
        }
        if !s1 && !any_s2 {
            s3_runs += 1;
            if proof::check_s3(&wide, p1, p2) && !proof::check_s3(&base, p1, p2) {
                return Err(format!("cube {k}: S3 only with inflated eps"));
            }
        }
    }
    Ok(format!("{count} cubes, {s3_runs} needing S3; no unproven-to-proved flips"))
}
