use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{ExperimentConfig, Start};
use super::{create, out_subdir, write_json, CliError, Code, Report};
use crate::error::Error;
use crate::flows::{comparison_run, write_trajectory, ComparisonRow};
use crate::geometry::{reference_potential, LatticeSectionBasis};
use crate::quantisation::{divergence_diagnosis, iterate_to_balance, t_map, HermitianForm, Problem};
use crate::stability::{
    blowup_table, cone_criteria, df_weight, inequality_checks, j_constant, j_weight, CriteriaReport, IntersectionTable,
    NormalConeConfig, SurfaceClassData, BLOWUP_LABELS, Q,
};

/// Deterministic generator for level `k`.
pub(super) fn rng_for(seed: u64, k: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (u64::from(k) << 32))
}

/// Diagonal form with log-uniform entries in `[e⁻¹, e]`.
pub(super) fn random_diagonal(basis: &LatticeSectionBasis, rng: &mut ChaCha8Rng) -> Result<HermitianForm, CliError> {
    let d: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0f64).exp()).collect();
    Ok(HermitianForm::from_diagonal(basis, &d)?)
}

/// `|tr(Hilb_χ(FS(H))·H⁻¹) − (N+1)| / (N+1)`.
pub(super) fn trace_defect(problem: &Problem, basis: &LatticeSectionBasis, h: &HermitianForm) -> Result<f64, CliError> {
    let g = t_map(problem, basis, h)?;
    let n1 = basis.len() as f64;
    Ok((h.trace_against(g.matrix())? - n1).abs() / n1)
}

#[derive(Debug, Serialize)]
struct BalanceRow {
    k: u32,
    sections: usize,
    converged: bool,
    iterations: usize,
    mu0_frob: f64,
    mu0_op: f64,
    /// largest step-to-step increase of `I_{μ⁰}`
    i_mu0_max_increase: f64,
    trace_defect: f64,
    note: String,
}

/// Balanced form and iteration log for every `k`.
///
/// Writes `balance/k{k}_form.json`, `balance/k{k}_log.csv` and `balance/summary.json`.
pub fn cmd_balance(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let problem = cfg.problem()?;
    let dir = out_subdir(cfg, "balance")?;
    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    let mut lines = Vec::new();
    for &k in &cfg.k_list {
        let basis = problem.basis(k)?;
        let mut rng = rng_for(cfg.seed, k);
        let h0 = match cfg.start {
            Start::Identity => HermitianForm::identity(&basis),
            Start::Random => random_diagonal(&basis, &mut rng)?,
        };
        let defect = trace_defect(&problem, &basis, &h0)?;
        let out = iterate_to_balance(&problem, &basis, &h0, cfg.tolerances.balance, cfg.max_iterations)?;
        artifacts.push(write_json(&dir.join(format!("k{k}_form.json")), &out.h.to_record())?);
        let log_path = dir.join(format!("k{k}_log.csv"));
        out.write_csv(create(&log_path)?)?;
        artifacts.push(log_path);
        let last = *out.log.last().ok_or_else(|| Error::Convergence("empty iteration log".into()))?;
        let note = if defect > cfg.tolerances.trace {
            format!("quadrature health: trace defect {defect:e} exceeds {:e}", cfg.tolerances.trace)
        } else if out.converged {
            String::new()
        } else {
            divergence_diagnosis(&out)
        };
        lines.push(format!(
            "k={k} N+1={} converged={} iterations={} mu0_op={:.3e} trace_defect={defect:.2e}",
            basis.len(),
            out.converged,
            last.step,
            last.mu0_op
        ));
        rows.push(BalanceRow {
            k,
            sections: basis.len(),
            converged: out.converged,
            iterations: last.step,
            mu0_frob: last.mu0_frob,
            mu0_op: last.mu0_op,
            i_mu0_max_increase: if out.log.len() > 1 { out.max_increase() } else { 0.0 },
            trace_defect: defect,
            note,
        });
    }
    artifacts.push(write_json(&dir.join("summary.json"), &rows)?);
    let code = if rows.iter().any(|r| r.trace_defect > cfg.tolerances.trace) {
        Code::Health
    } else if rows.iter().any(|r| !r.converged) {
        Code::Convergence
    } else {
        Code::Success
    };
    Ok(Report { code, artifacts, lines })
}

/// Balancing flow per `k` against one J-flow run from the reference potential.
///
/// Writes `flow/jflow_trajectory.csv`, `flow/jflow_final.csv`,
/// `flow/k{k}_trajectory.csv`, `flow/comparison.csv` and `flow/comparison.json`.
pub fn cmd_flow(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let problem = cfg.problem()?;
    if problem.dim() != 2 {
        return Err(CliError::Usage("the flow comparison runs on surfaces".into()));
    }
    let dir = out_subdir(cfg, "flow")?;
    let u0 = reference_potential(&problem.polytope);
    let run = comparison_run(&problem, &u0, &cfg.k_list, &cfg.flow)?;
    let mut artifacts = Vec::new();
    let p = dir.join("jflow_trajectory.csv");
    write_trajectory(&run.continuum, create(&p)?)?;
    artifacts.push(p);
    let p = dir.join("jflow_final.csv");
    run.final_grid.write_csv(create(&p)?)?;
    artifacts.push(p);
    for (k, states) in &run.quantum {
        let p = dir.join(format!("k{k}_trajectory.csv"));
        write_trajectory(states, create(&p)?)?;
        artifacts.push(p);
    }
    let p = dir.join("comparison.csv");
    let mut w = csv::Writer::from_writer(create(&p)?);
    for r in &run.rows {
        w.serialize(r).map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    artifacts.push(p);
    artifacts.push(write_json(&dir.join("comparison.json"), &run.rows)?);
    let lines = run
        .rows
        .iter()
        .map(|r: &ComparisonRow| format!("k={} t={} t_quantum={:.4} distance={:.4e}", r.k, r.t, r.t_quantum, r.distance))
        .collect();
    Ok(Report { code: Code::Success, artifacts, lines })
}

#[derive(Debug, Serialize)]
struct RayVerdicts {
    l2: Vec<i64>,
    report: CriteriaReport,
}

#[derive(Debug, Serialize)]
struct SweepRow {
    configuration: &'static str,
    r: i64,
    j_weight: String,
    df: String,
    exceptional: String,
    mixed: String,
    surface: String,
    admissible: bool,
}

fn sweep_rows(
    name: &'static str,
    table: &IntersectionTable,
    data: &SurfaceClassData,
    gamma: &Q,
    r_max: i64,
    nef: &[&str],
) -> Result<Vec<SweepRow>, CliError> {
    (1..=r_max)
        .map(|r| {
            let rq = Q::from_integer(r.into());
            let ineq = inequality_checks(table, &rq, nef)?;
            Ok(SweepRow {
                configuration: name,
                r,
                j_weight: j_weight(table, gamma, &rq)?.to_string(),
                df: df_weight(table, data, &rq)?.to_string(),
                exceptional: ineq.exceptional.value.to_string(),
                mixed: ineq.mixed.value.to_string(),
                surface: ineq.surface.value.to_string(),
                admissible: ineq.admissible,
            })
        })
        .collect()
}

/// Cone criteria for `L₂` and every extra ray, and an `r`-sweep of the weights of
/// the deformation to the normal cone of the chosen facet next to the product
/// configuration (`E = 0`).
///
/// Writes `stability/criteria.json` and `stability/r_sweep.csv`; rationals are exact strings.
pub fn cmd_stability(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let (polytope, l2) = cfg.classes()?;
    if polytope.dim() != 2 {
        return Err(CliError::Usage("stability weights are computed on surfaces".into()));
    }
    let dir = out_subdir(cfg, "stability")?;
    let mut lines = Vec::new();
    let mut verdicts = Vec::new();
    for ray in std::iter::once(&l2).chain(&cfg.stability.l2_rays) {
        let data = SurfaceClassData::from_toric(&polytope, ray)?;
        let report = cone_criteria(&data)?;
        for v in &report.verdicts {
            let margin = v.margin.as_ref().map(|m| m.to_string()).unwrap_or_else(|| "-".into());
            lines.push(format!("L2={ray:?} {} {:?} margin={margin}", v.criterion, v.status));
        }
        verdicts.push(RayVerdicts { l2: ray.clone(), report });
    }
    let mut artifacts = vec![write_json(&dir.join("criteria.json"), &verdicts)?];

    let data = SurfaceClassData::from_toric(&polytope, &l2)?;
    let gamma = j_constant(&data)?;
    let nc = NormalConeConfig::toric_facet(&polytope, &l2, cfg.stability.facet)?;
    let table = blowup_table(&data, &nc)?;
    let l2_nef = data.generators.iter().all(|g| g.l2 >= 0);
    let nef: Vec<&str> = if l2_nef { vec!["L1", "L2"] } else { vec!["L1"] };
    let mut rows = sweep_rows("normal_cone", &table, &data, &gamma, cfg.stability.r_max, &nef)?;
    let product = IntersectionTable::new(&BLOWUP_LABELS);
    rows.extend(sweep_rows("product", &product, &data, &gamma, cfg.stability.r_max, &nef)?);
    let p = dir.join("r_sweep.csv");
    let mut w = csv::Writer::from_writer(create(&p)?);
    for r in &rows {
        w.serialize(r).map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    artifacts.push(p);
    for r in rows.iter().filter(|r| r.configuration == "normal_cone") {
        lines.push(format!("r={} J={} DF={} admissible={}", r.r, r.j_weight, r.df, r.admissible));
    }
    Ok(Report { code: Code::Success, artifacts, lines })
}
