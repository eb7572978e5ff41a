//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the verdict lines always reach the
//! terminal; the process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use forge_core::bargmann::{p_matrix, MAX_SEEDS};
use forge_core::expr::{Func, Node};
use forge_core::multichannel::solve_diagonal_base;
use forge_core::solver::seed_from_expression;
use forge_core::verify::{check_wronskian_integral, matrix_residual, residual, TRANSFORMED_TOLERANCE};
use forge_core::{
    solve, AnalyticExpr, BargmannSeed, BargmannSeedSet, BargmannTransform, BoundaryCondition, ChainTransform,
    ChannelSystem, DarbouxTransform, Direction, KernelForm, PotentialMatrix, RadialGrid, SampledField, Solution,
    Weight,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn field(text: &str, grid: &RadialGrid) -> SampledField {
    AnalyticExpr::parse(text).unwrap().evaluate_on_grid(grid).unwrap()
}

fn regular(v0: &SampledField, w: &Weight, gamma_sq: f64) -> Solution {
    solve(v0, w.field(), gamma_sq, BoundaryCondition::RegularAtLeft).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn classical_reduction() -> Outcome {
    let start = Instant::now();
    let grid = RadialGrid::with_step(0.0, 10.0, 1e-3).unwrap();
    let w = Weight::unit(&grid);
    let v0 = SampledField::zeros(grid);
    let seed = seed_from_expression("cosh(r)", &grid, &v0, w.field(), -1.0, 1e-6).unwrap();
    let t = DarbouxTransform::new(seed, &w, &v0).unwrap();
    let elapsed = start.elapsed();
    let exact = field("-2*sech(r)^2", &grid);
    let err = t.potential().sup_distance(&exact).unwrap();
    check(
        err <= 1e-6 && elapsed < Duration::from_secs(1),
        format!("sup|V + 2 sech^2| = {err:.3e}, {:.1} ms", elapsed.as_secs_f64() * 1e3),
    )
}

fn generalized_darboux_residual() -> Outcome {
    let grid = RadialGrid::with_step(0.0, 4.0, 5e-4).unwrap();
    let w = Weight::parse("(1+r)^4", &grid).unwrap();
    let v0 = SampledField::zeros(grid);
    let seed = seed_from_expression("1", &grid, &v0, w.field(), 0.0, 1e-6).unwrap();
    let t = DarbouxTransform::new(seed, &w, &v0).unwrap();
    let pot_err = t.potential().sup_distance(&field("6/(1+r)^2", &grid)).unwrap();
    let mut worst: f64 = 0.0;
    for gamma_sq in [0.25, 1.0, 2.25, 4.0, -1.0] {
        let phi = t.solution(&regular(&v0, &w, gamma_sq)).unwrap();
        worst = worst.max(
            residual(t.potential(), w.field(), &phi, TRANSFORMED_TOLERANCE)
                .unwrap()
                .max_rel,
        );
    }
    check(
        pot_err <= 1e-8 && worst <= 1e-5,
        format!("potential error {pot_err:.3e}, worst relative residual {worst:.3e}"),
    )
}

fn wronskian_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = RadialGrid::with_step(0.0, 3.0, 1e-3).unwrap();
    let mut worst_regular: f64 = 0.0;
    for _ in 0..10 {
        let a: f64 = rng.random_range(0.0..2.0);
        let b: f64 = rng.random_range(0.0..0.5);
        let w = Weight::parse(&format!("1+{b}*tanh(r)"), &grid).unwrap();
        let v0 = field(&format!("-{a}*sech(r)^2"), &grid);
        let g1 = rng.random_range(-1.0..4.0);
        let g2 = rng.random_range(-1.0..4.0);
        let rep = check_wronskian_integral(
            &regular(&v0, &w, g1),
            &regular(&v0, &w, g2),
            w.field(),
            Direction::FromLeft,
            1e-7,
        )
        .unwrap();
        worst_regular = worst_regular.max(rep.max_abs);
    }

    let grid = RadialGrid::with_step(0.0, 12.0, 1e-3).unwrap();
    let w = Weight::unit(&grid);
    let v0 = field("-sech(r)^2", &grid);
    let jost = |g2: f64| solve(&v0, w.field(), g2, BoundaryCondition::JostAtRight).unwrap();
    let mut worst_jost: f64 = 0.0;
    for _ in 0..5 {
        let g1 = rng.random_range(-4.0..-0.5);
        let g2 = rng.random_range(-4.0..-0.5);
        let rep = check_wronskian_integral(&jost(g1), &jost(g2), w.field(), Direction::FromRight, 1e-7).unwrap();
        worst_jost = worst_jost.max(rep.max_abs);
    }
    check(
        worst_regular <= 1e-7 && worst_jost <= 1e-7,
        format!("regular pairs {worst_regular:.3e}, decaying pairs {worst_jost:.3e}"),
    )
}

fn superposition_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = RadialGrid::with_step(0.0, 8.0, 1e-3).unwrap();
    let w = Weight::parse("1+0.3*tanh(r)", &grid).unwrap();
    let v0 = field("-1.5*sech(r)^2", &grid);
    let c = 0.8;
    let seed = regular(&v0, &w, -1.0);
    let chain = ChainTransform::new(seed.clone(), &w, &v0, c, Direction::FromLeft).unwrap();
    let set = BargmannSeedSet::new(vec![BargmannSeed::new(c, seed)], Direction::FromLeft).unwrap();
    let bt = BargmannTransform::new(set, &w, &v0).unwrap();
    let pot = chain.potential().sup_distance(bt.potential()).unwrap();
    let mut sol: f64 = 0.0;
    for _ in 0..5 {
        let phi0 = regular(&v0, &w, rng.random_range(-0.5..4.0));
        let a = chain.solution(&phi0).unwrap();
        let b = bt.solution(&phi0).unwrap();
        sol = sol.max(sup_diff(a.values(), b.values()));
    }
    check(
        pot <= 1e-6 && sol <= 1e-8,
        format!("potentials {pot:.3e}, solutions {sol:.3e}"),
    )
}

fn identity_limit() -> Outcome {
    let grid = RadialGrid::with_step(0.0, 5.0, 1e-3).unwrap();
    let w = Weight::parse("1+0.5*sech(r)", &grid).unwrap();
    let v0 = field("-sech(r)^2", &grid);
    let seeds = [-1.0, -2.25, -4.0]
        .iter()
        .map(|&g| BargmannSeed::new(0.0, regular(&v0, &w, g)))
        .collect();
    let t = BargmannTransform::new(BargmannSeedSet::new(seeds, Direction::FromLeft).unwrap(), &w, &v0).unwrap();
    let pm = t.pmatrix();
    let identity = nalgebra::DMatrix::<f64>::identity(3, 3);
    let p_err = (0..grid.len())
        .map(|i| (pm.at(i) - &identity).abs().max())
        .fold(0.0, f64::max);
    let v_err = t.potential().sup_distance(&v0).unwrap();
    let phi0 = regular(&v0, &w, 1.7);
    let phi_err = sup_diff(t.solution(&phi0).unwrap().values(), phi0.values());
    check(
        p_err <= 1e-12 && v_err <= 1e-12 && phi_err <= 1e-12,
        format!("P - I {p_err:.1e}, V - V0 {v_err:.1e}, phi - phi0 {phi_err:.1e}"),
    )
}

fn multi_seed_bargmann() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // long intervals push cond(P) high enough that roundoff in P⁻¹, seen
    // through the second-difference residual, approaches the tolerance
    let grid = RadialGrid::with_step(0.0, 4.0, 1e-3).unwrap();
    let w = Weight::unit(&grid);
    let v0 = SampledField::zeros(grid);
    let seeds: Vec<_> = [-1.0, -2.25, -4.0]
        .iter()
        .map(|&g| {
            // (0, 1] rather than [0, 1)
            let c = 1.0 - rng.random_range(0.0..1.0);
            BargmannSeed::new(c, regular(&v0, &w, g))
        })
        .collect();
    assert!(seeds.len() <= MAX_SEEDS);
    let set = BargmannSeedSet::new(seeds, Direction::FromLeft).unwrap();
    let pm = match p_matrix(&set, w.field()) {
        Ok(pm) => pm,
        Err(e) => return Err(format!("P-matrix rejected: {e}")),
    };
    let summary = pm.summary();
    let t = BargmannTransform::new(set, &w, &v0).unwrap();
    let mut worst: f64 = 0.0;
    for gamma_sq in [0.5, 2.0] {
        let phi = t.solution(&regular(&v0, &w, gamma_sq)).unwrap();
        worst = worst.max(
            residual(t.potential(), w.field(), &phi, TRANSFORMED_TOLERANCE)
                .unwrap()
                .max_rel,
        );
    }
    for y in t.transformed_seeds().unwrap() {
        worst = worst.max(
            residual(t.potential(), w.field(), &y, TRANSFORMED_TOLERANCE)
                .unwrap()
                .max_rel,
        );
    }
    check(
        summary.det_sign > 0.0 && worst <= 1e-5,
        format!(
            "det P > 0 (min {:.3e}), worst relative residual {worst:.3e}",
            summary.min_abs_det
        ),
    )
}

fn multichannel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = RadialGrid::with_step(0.0, 5.0, 1e-3).unwrap();
    let w = Weight::parse("1+0.2*tanh(r)", &grid).unwrap();
    let v0 = PotentialMatrix::diagonal(vec![field("0", &grid), field("-sech(r)^2", &grid)]).unwrap();
    let seeds = solve_diagonal_base(&v0, w.field(), &[-1.0, -2.25], BoundaryCondition::RegularAtLeft).unwrap();
    let c = [rng.random_range(0.2..1.0), rng.random_range(0.2..1.0)];
    let sys = ChannelSystem::new(v0.clone(), &w, &seeds, &c, Direction::FromLeft).unwrap();
    let phi0 = solve_diagonal_base(&v0, w.field(), &[1.0, -0.25], BoundaryCondition::RegularAtLeft).unwrap();
    let by_integral = sys.solution(&phi0, KernelForm::Integral).unwrap();
    let by_wronskian = sys.solution(&phi0, KernelForm::Wronskian).unwrap();
    let forms = by_integral
        .entries()
        .iter()
        .zip(by_wronskian.entries())
        .map(|(a, b)| a.sup_distance(b).unwrap())
        .fold(0.0, f64::max);
    let tol = TRANSFORMED_TOLERANCE;
    let res = [
        matrix_residual(sys.potential(), w.field(), &sys.transformed_seed().unwrap(), tol).unwrap(),
        matrix_residual(sys.potential(), w.field(), &by_integral, tol).unwrap(),
        matrix_residual(sys.potential(), w.field(), &by_wronskian, tol).unwrap(),
    ]
    .iter()
    .map(|r| r.max_rel)
    .fold(0.0, f64::max);
    let symmetry = sys.symmetry_defect();

    // N = 1 against the single-channel transform with C = c^2
    let single = PotentialMatrix::diagonal(vec![field("-sech(r)^2", &grid)]).unwrap();
    let s1 = solve_diagonal_base(&single, w.field(), &[-1.0], BoundaryCondition::RegularAtLeft).unwrap();
    let one = ChannelSystem::new(single.clone(), &w, &s1, &[c[0]], Direction::FromLeft).unwrap();
    let set = BargmannSeedSet::new(
        vec![BargmannSeed::new(c[0] * c[0], regular(single.get(0, 0), &w, -1.0))],
        Direction::FromLeft,
    )
    .unwrap();
    let bt = BargmannTransform::new(set, &w, single.get(0, 0)).unwrap();
    let mut reduction = one.potential().get(0, 0).sup_distance(bt.potential()).unwrap();
    let phi1 = solve_diagonal_base(&single, w.field(), &[0.8], BoundaryCondition::RegularAtLeft).unwrap();
    let a = one.solution(&phi1, KernelForm::Integral).unwrap();
    let b = bt.solution(&regular(single.get(0, 0), &w, 0.8)).unwrap();
    reduction = reduction.max(sup_diff(a.get(0, 0).values(), b.values()));

    check(
        res <= 1e-5 && forms <= 1e-7 && reduction <= 1e-10 && symmetry <= 1e-5,
        format!("residual {res:.3e}, forms {forms:.3e}, N=1 reduction {reduction:.3e}, symmetry defect {symmetry:.3e}"),
    )
}

/// Random expression of depth at most `depth`.
fn random_node(rng: &mut ChaCha8Rng, depth: u32) -> Node {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.6) {
            Node::Var
        } else {
            Node::Const((rng.random_range(-3.0..3.0f64) * 100.0).round() / 100.0)
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_node(rng, depth - 1));
    match rng.random_range(0..7) {
        0 => Node::Add(sub(rng), sub(rng)),
        1 => Node::Sub(sub(rng), sub(rng)),
        2 => Node::Mul(sub(rng), sub(rng)),
        3 => Node::Div(sub(rng), sub(rng)),
        4 => Node::Pow(sub(rng), Box::new(Node::Const(rng.random_range(-2..=4) as f64))),
        5 => Node::Neg(sub(rng)),
        _ => {
            let f = Func::ALL[rng.random_range(0..Func::ALL.len())];
            Node::Call(f, sub(rng))
        }
    }
}

fn expression_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let points: Vec<f64> = {
        let mut p = ChaCha8Rng::seed_from_u64(9);
        (0..100).map(|_| p.random_range(0.1..3.0)).collect()
    };
    // small enough for fast oscillations such as sin(r^4) near r = 3, large
    // enough that roundoff stays below 1e-7 for |f| <= 1e4
    let step = 1e-4;
    let stencil = [-2.0, -1.0, 1.0, 2.0];
    let mut accepted = 0;
    let mut worst: f64 = 0.0;
    let mut draws = 0;
    while accepted < 50 {
        draws += 1;
        if draws > 100_000 {
            return Err(format!("only {accepted} usable expressions generated"));
        }
        let expr = AnalyticExpr::from_node(random_node(&mut rng, 4));
        if expr.is_constant() {
            continue;
        }
        let d = expr.derivative();
        // keep expressions that are smooth and moderate around every sample
        let samples: Option<Vec<(f64, f64)>> = points
            .iter()
            .map(|&r| {
                let sym = d.eval(r).ok()?;
                let f: Vec<f64> = stencil
                    .iter()
                    .map(|k| expr.eval(r + k * step).ok())
                    .collect::<Option<_>>()?;
                if f.iter().chain([&sym]).any(|v| !v.is_finite() || v.abs() > 1e4) {
                    return None;
                }
                let fd = (f[0] - 8.0 * f[1] + 8.0 * f[2] - f[3]) / (12.0 * step);
                // reject samples near a singularity, where the stencil straddles it
                let coarse = (f[2] - f[1]) / (2.0 * step);
                if (coarse - fd).abs() > 1e-2 * (1.0 + fd.abs()) {
                    return None;
                }
                Some((sym, fd))
            })
            .collect();
        let Some(samples) = samples else { continue };
        accepted += 1;
        for (sym, fd) in samples {
            worst = worst.max((sym - fd).abs() / sym.abs().max(1.0));
        }
    }
    check(
        worst <= 1e-6,
        format!("50 expressions x 100 points ({draws} drawn), worst relative error {worst:.3e}"),
    )
}

fn solver_order() -> Outcome {
    let err = |n: usize| {
        let grid = RadialGrid::new(0.0, PI, n).unwrap();
        let w = Weight::unit(&grid);
        let sol = regular(&SampledField::zeros(grid), &w, 1.0);
        grid.nodes()
            .zip(sol.values())
            .map(|(r, v)| (v - r.sin()).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine, finer) = (err(33), err(65), err(129));
    let (r1, r2) = (coarse / fine, fine / finer);
    check(
        r1 >= 11.0 && r2 >= 11.0,
        format!(
            "error ratios {r1:.2}, {r2:.2} (orders {:.2}, {:.2})",
            r1.log2(),
            r2.log2()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("classical reduction", classical_reduction),
        ("generalized Darboux residual", generalized_darboux_residual),
        ("Wronskian-integral duality", wronskian_duality),
        ("superposition equivalence", superposition_equivalence),
        ("identity limit", identity_limit),
        ("multi-seed Bargmann", multi_seed_bargmann),
        ("multichannel", multichannel),
        ("expression engine", expression_engine),
        ("solver order", solver_order),
    ];
    let started = Instant::now();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.2} s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
