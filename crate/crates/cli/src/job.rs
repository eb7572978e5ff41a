//! The `run` pipeline: build fields, transform, check, render artifacts.
//!
//! Nothing touches the filesystem here. The caller writes the returned
//! artifacts only after every step has succeeded.

use forge_core::bargmann::p_matrix_quadrature_defect;
use forge_core::multichannel::solve_diagonal_base;
use forge_core::solver::seed_from_expression;
use forge_core::verify::{matrix_residual, residual, SEED_TOLERANCE};
use forge_core::{
    solve, AnalyticExpr, BargmannSeed, BargmannSeedSet, BargmannTransform, ChainTransform, ChannelSystem,
    DarbouxTransform, Direction, PotentialMatrix, RadialGrid, SampledField, Solution, SolutionMatrix, Weight,
};
use sha2::{Digest, Sha256};

use crate::config::{JobConfig, Mode, SeedSpec};
use crate::csv;
use crate::report::{GridEntry, PMatrixEntry, Report, ResidualEntry, ToleranceSource};

/// Files to write, in order, and the overall verdict.
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub report: Report,
}

impl Artifacts {
    pub fn passed(&self) -> bool {
        self.report.passed
    }
}

struct Scalar {
    grid: RadialGrid,
    weight: Weight,
    v0: SampledField,
    tol: f64,
    files: Vec<(String, Vec<u8>)>,
    residuals: Vec<ResidualEntry>,
}

impl Scalar {
    fn seed(&self, spec: &SeedSpec) -> anyhow::Result<Solution> {
        Ok(match &spec.expr {
            Some(text) => seed_from_expression(
                text,
                &self.grid,
                &self.v0,
                self.weight.field(),
                spec.gamma_sq,
                SEED_TOLERANCE,
            )?,
            None => solve(
                &self.v0,
                self.weight.field(),
                spec.gamma_sq,
                spec.bc.unwrap_or_default().into(),
            )?,
        })
    }

    fn base_solutions(&self, cfg: &JobConfig) -> anyhow::Result<Vec<Solution>> {
        cfg.eval
            .gamma_sq
            .iter()
            .map(|&g| Ok(solve(&self.v0, self.weight.field(), g, cfg.eval.bc.into())?))
            .collect()
    }

    /// Check `phi` against `v` and queue it as `<stem>.csv`.
    fn emit(&mut self, stem: &str, v: &SampledField, phi: &Solution) -> anyhow::Result<()> {
        let file = format!("{stem}.csv");
        let rep = residual(v, self.weight.field(), phi, self.tol)?;
        self.residuals.push(ResidualEntry::new(
            stem.into(),
            file.clone(),
            vec![phi.gamma_sq],
            &rep,
            &self.grid,
        ));
        self.files.push((file, csv::solution(&phi.field).into_bytes()));
        Ok(())
    }
}

pub fn config_hash(raw: &[u8]) -> String {
    hex::encode(Sha256::digest(raw))
}

pub fn run(cfg: &JobConfig, raw: &[u8], tol: f64, source: ToleranceSource) -> anyhow::Result<Artifacts> {
    let grid = RadialGrid::new(cfg.grid.a, cfg.grid.b, cfg.grid.n)?;
    let weight = Weight::parse(&cfg.base.h, &grid)?;
    let direction: Direction = cfg.direction.into();
    let mut pmatrix = None;
    let mut chain_vs_bargmann = None;
    let mut symmetry = None;

    let (mut files, residuals) = if cfg.mode == Mode::Multichannel {
        let (files, residuals, defect) = multichannel(cfg, &grid, &weight, direction, tol)?;
        symmetry = Some(defect);
        (files, residuals)
    } else {
        let v0_text = cfg.base.v0.as_deref().unwrap_or_default();
        let v0 = AnalyticExpr::parse(v0_text)?.evaluate_on_grid(&grid)?;
        let mut job = Scalar {
            grid,
            weight,
            v0,
            tol,
            files: Vec::new(),
            residuals: Vec::new(),
        };
        let seeds = cfg
            .seeds
            .iter()
            .map(|s| job.seed(s))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let base = job.base_solutions(cfg)?;
        let potential = match cfg.mode {
            Mode::Darboux => {
                let t = DarbouxTransform::new(seeds[0].clone(), &job.weight, &job.v0)?;
                let phis = base.iter().map(|p| t.solution(p)).collect::<Result<Vec<_>, _>>()?;
                for (k, phi) in phis.iter().enumerate() {
                    job.emit(&format!("phi_{}", k + 1), t.potential(), phi)?;
                }
                t.potential().clone()
            }
            Mode::Chain => {
                let c = cfg.seeds[0].c.unwrap_or_default();
                let chain = ChainTransform::new(seeds[0].clone(), &job.weight, &job.v0, c, direction)?;
                let set = BargmannSeedSet::new(vec![BargmannSeed::new(c, seeds[0].clone())], direction)?;
                let bt = BargmannTransform::new(set, &job.weight, &job.v0)?;
                chain_vs_bargmann = Some(chain.potential().sup_distance(bt.potential())?);
                let phis = base.iter().map(|p| chain.solution(p)).collect::<Result<Vec<_>, _>>()?;
                for (k, phi) in phis.iter().enumerate() {
                    job.emit(&format!("phi_{}", k + 1), chain.potential(), phi)?;
                }
                chain.potential().clone()
            }
            Mode::Bargmann => {
                let list = cfg
                    .seeds
                    .iter()
                    .zip(seeds)
                    .map(|(spec, s)| BargmannSeed::new(spec.c.unwrap_or_default(), s))
                    .collect();
                let set = BargmannSeedSet::new(list, direction)?;
                let t = BargmannTransform::new(set, &job.weight, &job.v0)?;
                let defect = p_matrix_quadrature_defect(t.seeds(), t.pmatrix(), job.weight.field())?;
                pmatrix = Some(PMatrixEntry::new(t.seeds().len(), t.pmatrix().summary(), defect));
                let phis = base.iter().map(|p| t.solution(p)).collect::<Result<Vec<_>, _>>()?;
                for (k, phi) in phis.iter().enumerate() {
                    job.emit(&format!("phi_{}", k + 1), t.potential(), phi)?;
                }
                for (k, y) in t.transformed_seeds()?.iter().enumerate() {
                    job.emit(&format!("y_{}", k + 1), t.potential(), y)?;
                }
                t.potential().clone()
            }
            Mode::Multichannel => unreachable!("handled above"),
        };
        let mut files = vec![("V.csv".to_string(), csv::potential(&potential).into_bytes())];
        files.append(&mut job.files);
        (files, job.residuals)
    };

    let passed = residuals.iter().all(|r| r.pass);
    let report = Report {
        tool: "forge",
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config_hash(raw),
        config: cfg.clone(),
        mode: cfg.mode,
        grid: GridEntry::from(&grid),
        tolerance: tol,
        tolerance_source: source,
        potential_file: "V.csv".into(),
        residuals,
        pmatrix,
        chain_vs_bargmann_supnorm: chain_vs_bargmann,
        symmetry_defect: symmetry,
        passed,
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    files.push(("report.json".into(), json));
    Ok(Artifacts { files, report })
}

type Outputs = (Vec<(String, Vec<u8>)>, Vec<ResidualEntry>, f64);

fn multichannel(
    cfg: &JobConfig,
    grid: &RadialGrid,
    weight: &Weight,
    direction: Direction,
    tol: f64,
) -> anyhow::Result<Outputs> {
    let ch = cfg.channels.as_ref().expect("validated config has channels");
    let n = ch.v0.len();
    let diag = ch
        .v0
        .iter()
        .map(|t| Ok(AnalyticExpr::parse(t)?.evaluate_on_grid(grid)?))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let v0 = PotentialMatrix::diagonal(diag)?;
    let seeds = solve_diagonal_base(&v0, weight.field(), &ch.seed_gamma_sq, ch.seed_bc.into())?;
    let sys = ChannelSystem::new(v0.clone(), weight, &seeds, &ch.c, direction)?;

    let index = |a: usize, b: usize| format!("{}{}", a + 1, b + 1);
    let mut names = Vec::new();
    let mut cols: Vec<&[f64]> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            names.push(format!("V_{}", index(a, b)));
            cols.push(sys.potential().get(a, b).values());
        }
    }
    let mut files = vec![(
        "V.csv".to_string(),
        csv::write_columns(grid, &names, &cols).into_bytes(),
    )];
    let mut residuals = Vec::new();

    let mut emit =
        |stem: String, m: &SolutionMatrix, entry_name: &dyn Fn(usize, usize) -> String| -> anyhow::Result<()> {
            let file = format!("{stem}.csv");
            let rep = matrix_residual(sys.potential(), weight.field(), m, tol)?;
            residuals.push(ResidualEntry::new(
                stem,
                file.clone(),
                m.gamma_sq().to_vec(),
                &rep,
                grid,
            ));
            let mut names = Vec::new();
            let mut cols: Vec<&[f64]> = Vec::new();
            for a in 0..m.rows() {
                for b in 0..m.cols() {
                    let name = entry_name(a, b);
                    names.push(name.clone());
                    names.push(format!("d{name}"));
                    cols.push(m.get(a, b).values());
                    cols.push(m.get(a, b).derivs());
                }
            }
            files.push((file, csv::write_columns(grid, &names, &cols).into_bytes()));
            Ok(())
        };

    emit("psi".into(), &sys.transformed_seed()?, &|a, _| format!("psi_{}", a + 1))?;
    for (k, g) in ch.eval_gamma_sq.iter().enumerate() {
        let phi0 = solve_diagonal_base(&v0, weight.field(), g, cfg.eval.bc.into())?;
        let phi = sys.solution(&phi0, ch.kernel.into())?;
        emit(format!("phi_{}", k + 1), &phi, &|a, b| format!("phi_{}", index(a, b)))?;
    }
    let defect = sys.symmetry_defect();
    Ok((files, residuals, defect))
}
