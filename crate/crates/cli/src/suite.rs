use std::time::Instant;

use serde::Serialize;
use tlsub_core::fock::{build_fock_with_budget, FockError, FockOperators, GradedOp, Letter};
use tlsub_core::jw::{dims_by_recurrence, q_integer, JwError, JwTower};
use tlsub_core::ktheory::{
    fuse, k0_order, k1_group, mult_closed_form, mult_in_fock_rep, pi_star_from_multiplicities, pi_star_matrix,
};
use tlsub_core::matrix::{self, frobenius_norm, isometry_defect, CMatrix};
use tlsub_core::tl::{
    invariants_of, normal_form, satisfies_normal_form_constraints, tl_check, tl_relation_residuals, vector_of,
    AntiLinearOp, TlError, TlSystem,
};
use tlsub_core::{c, C64};

use crate::report::{complex, reals, Check, DecayTable, InputEcho, Parameters, Real, Report, Timing};
use crate::{default_levels, CommandKind, Input, RunConfig, EXIT_FAILURE, EXIT_PASS, EXIT_RESOURCE};

/// Threshold for `Tr f_n = dim H_n`, a sum of many rounded eigenvalues.
const TRACE_TOL: f64 = 1e-6;

enum Abort {
    Resource(String),
    Failure(String),
}

impl From<TlError> for Abort {
    fn from(e: TlError) -> Self {
        Abort::Failure(e.to_string())
    }
}

impl From<JwError> for Abort {
    fn from(e: JwError) -> Self {
        match e {
            JwError::MemoryBudgetExceeded { .. } => Abort::Resource(e.to_string()),
            _ => Abort::Failure(e.to_string()),
        }
    }
}

impl From<FockError> for Abort {
    fn from(e: FockError) -> Self {
        match e {
            FockError::Jw(j) => j.into(),
            _ => Abort::Failure(e.to_string()),
        }
    }
}

struct Stopwatch {
    start: Instant,
    stages: Vec<Timing>,
}

impl Stopwatch {
    fn new() -> Self {
        Stopwatch {
            start: Instant::now(),
            stages: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.stages.push(Timing {
            stage: stage.into(),
            seconds: Real((now - self.start).as_secs_f64()),
        });
        self.start = now;
    }
}

fn echo(cfg: &RunConfig) -> InputEcho {
    let mut e = InputEcho {
        tol: Real(cfg.tol),
        levels: cfg.levels,
        m: cfg.m,
        n: cfg.n,
        ..Default::default()
    };
    match &cfg.input {
        Some(Input::Coeffs(a)) => e.coeffs = Some(a.iter().copied().map(complex).collect()),
        Some(Input::Matrix { path, .. }) => e.matrix = Some(path.display().to_string()),
        None => {}
    }
    if cfg.command == CommandKind::Ktheory {
        e.truncate = Some(cfg.truncate);
    }
    e
}

fn parameters(sys: &TlSystem) -> Parameters {
    Parameters {
        m: sys.m(),
        lambda: Real(sys.lambda()),
        q: Real(sys.q()),
        t: Real(sys.t()),
        tau: sys.tau().map(|t| t.value() as i8),
    }
}

fn operator_of(input: &Input) -> Result<AntiLinearOp, Abort> {
    Ok(match input {
        Input::Coeffs(a) => AntiLinearOp::from_coefficients(a)?,
        Input::Matrix { matrix, .. } => AntiLinearOp::new(matrix.clone())?,
    })
}

/// The normalized system: coefficient input is rescaled so that `|a_i a_(m-i+1)| = 1`,
/// matrix input is first brought to normal form.
fn system_of(input: &Input) -> Result<TlSystem, Abort> {
    let op = operator_of(input)?;
    let scalars = tl_check(&op)?;
    let coeffs = match input {
        Input::Coeffs(a) => {
            let s = scalars.alpha.powf(-0.25);
            a.iter().map(|z| z * s).collect()
        }
        Input::Matrix { .. } => normal_form(&op)?.coeffs,
    };
    Ok(TlSystem::from_coefficients(&coeffs)?)
}

fn coeff_list(a: &[C64]) -> Vec<[Real; 2]> {
    a.iter().copied().map(complex).collect()
}

/// Runs the selected command; returns the report and the exit status.
pub fn run_suite(cfg: &RunConfig) -> (Report, u8) {
    let mut report = Report::new(cfg.command.name(), echo(cfg));
    let mut clock = Stopwatch::new();
    let outcome = match cfg.command {
        CommandKind::Check => check(cfg, &mut report),
        CommandKind::NormalForm => normal_form_cmd(cfg, &mut report),
        CommandKind::Jw => jw(cfg, &mut report, &mut clock),
        CommandKind::Verify => verify(cfg, &mut report, &mut clock),
        CommandKind::Boundary => boundary(cfg, &mut report, &mut clock),
        CommandKind::Ktheory => ktheory(cfg, &mut report),
        CommandKind::Dims => dims(cfg, &mut report),
    };
    clock.lap("total");
    if cfg.timings {
        report.timings = Some(clock.stages);
    }
    let status = match outcome {
        Ok(()) => {
            report.pass = report.checks.iter().all(|c| c.pass);
            if report.pass {
                EXIT_PASS
            } else {
                EXIT_FAILURE
            }
        }
        Err(Abort::Failure(msg)) => {
            report.checks.push(Check::exact("error", false, msg));
            EXIT_FAILURE
        }
        Err(Abort::Resource(msg)) => {
            report.checks.push(Check::exact("resource_limit", false, msg));
            EXIT_RESOURCE
        }
    };
    (report, status)
}

fn check(cfg: &RunConfig, report: &mut Report) -> Result<(), Abort> {
    let input = cfg.input.as_ref().expect("check has input");
    let op = operator_of(input)?;
    let scalars = match tl_check(&op) {
        Ok(s) => s,
        Err(TlError::NotTemperleyLieb { deviation }) => {
            let mut failed = Check::residual("tl_condition", deviation, tlsub_core::tl::TL_TOL)
                .with_detail("(A^2)* A^2 is not a positive multiple of the identity");
            failed.pass = false;
            report.checks.push(failed);
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    report.checks.push(Check::residual(
        "tl_condition",
        scalars.deviation,
        tlsub_core::tl::TL_TOL * scalars.alpha.max(1.0),
    ));
    let e = matrix::rank_one_projection(&vector_of(&op));
    let (r1, r2) = tl_relation_residuals(e.as_ref(), op.dim(), scalars.lambda);
    report.checks.push(Check::residual("e1_e2_e1", r1, cfg.tol));
    report.checks.push(Check::residual("e2_e1_e2", r2, cfg.tol));
    report.put("alpha", &Real(scalars.alpha));
    report.put("lambda", &Real(scalars.lambda));
    let sys = system_of(input)?;
    report.put("normalized_coeffs", &coeff_list(sys.coeffs()));
    report.parameters = Some(parameters(&sys));
    Ok(())
}

#[derive(Serialize)]
struct BlockOut {
    beta: Real,
    phases: Vec<[Real; 2]>,
}

fn normal_form_cmd(cfg: &RunConfig, report: &mut Report) -> Result<(), Abort> {
    let op = operator_of(cfg.input.as_ref().expect("normal-form has input"))?;
    tl_check(&op)?;
    let nf = normal_form(&op)?;
    let target = AntiLinearOp::from_coefficients(&nf.coeffs)?;
    let resid = frobenius_norm((nf.transformed(&op) - target.matrix()).as_ref());
    report.checks.push(Check::residual("basis_unitary", isometry_defect(nf.basis.as_ref()), cfg.tol));
    report.checks.push(Check::residual("anti_diagonal_residual", resid, cfg.tol));
    report.checks.push(Check::exact(
        "normal_form_constraints",
        satisfies_normal_form_constraints(&nf.coeffs, cfg.tol.max(1e-8)),
        "|a_i a_(m-i+1)| = 1 with the canonical ordering",
    ));
    let again = normal_form(&target)?;
    let drift = nf
        .coeffs
        .iter()
        .zip(&again.coeffs)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    report.checks.push(Check::residual("idempotent", drift, cfg.tol.max(1e-8)));

    let inv = invariants_of(&op)?;
    let blocks: Vec<BlockOut> = inv
        .blocks
        .iter()
        .map(|b| BlockOut {
            beta: Real(b.beta),
            phases: coeff_list(&b.phases),
        })
        .collect();
    let basis: Vec<Vec<[Real; 2]>> = (0..nf.basis.nrows())
        .map(|i| (0..nf.basis.ncols()).map(|j| complex(nf.basis[(i, j)])).collect())
        .collect();
    report.put("coeffs", &coeff_list(&nf.coeffs));
    report.put("scale", &Real(nf.scale));
    report.put("basis", &basis);
    report.put("invariants", &blocks);
    report.parameters = Some(parameters(&TlSystem::from_coefficients(&nf.coeffs)?));
    Ok(())
}

fn levels_for(cfg: &RunConfig, sys: &TlSystem) -> usize {
    cfg.levels.unwrap_or_else(|| default_levels(sys.m()))
}

fn tower_checks(cfg: &RunConfig, report: &mut Report, tower: &JwTower) -> Result<(), Abort> {
    let m = tower.m();
    let levels = tower.levels();
    let expected = dims_by_recurrence(m, levels).ok_or_else(|| Abort::Failure("dimension overflow".into()))?;
    let got: Vec<u128> = tower.dims().iter().map(|&d| d as u128).collect();
    report.checks.push(Check::exact(
        "ranks_match_recurrence",
        got == expected,
        format!("ranks {got:?}"),
    ));
    let t = tower.system().t();
    let quantum_ok = expected
        .iter()
        .enumerate()
        .all(|(n, &d)| (q_integer(n + 1, t) - d as f64).abs() <= 1e-9 * d as f64);
    report.checks.push(Check::exact("dims_are_quantum_integers", quantum_ok, "d_n = [n+1]_t"));

    let mut idem: f64 = 0.0;
    let mut trace: f64 = 0.0;
    let mut kill: f64 = 0.0;
    for n in 0..=levels {
        idem = idem.max(tower.idempotency_defect(n));
        let basis = tower.subspace_basis(n)?;
        let tr = matrix::trace((basis.matrix().adjoint() * basis.matrix()).as_ref()).re;
        trace = trace.max((tr - expected[n] as f64).abs());
        if n >= 2 {
            kill = kill.max(tower.max_kill_defect(n));
        }
    }
    report.checks.push(Check::residual("idempotency", idem, cfg.tol));
    report.checks.push(Check::residual("trace_equals_rank", trace, TRACE_TOL));
    report.checks.push(Check::residual("kill_defect", kill, 10.0 * cfg.tol));
    report.put("dims", &expected);
    report.put(
        "wenzl_defect",
        &reals(&(1..levels).map(|n| tower.wenzl_defect(n)).collect::<Vec<_>>()),
    );
    Ok(())
}

fn jw(cfg: &RunConfig, report: &mut Report, clock: &mut Stopwatch) -> Result<(), Abort> {
    let sys = system_of(cfg.input.as_ref().expect("jw has input"))?;
    report.parameters = Some(parameters(&sys));
    let levels = levels_for(cfg, &sys);
    report.input.levels = Some(levels);
    let tower = JwTower::build(&sys, levels, cfg.max_scalars)?;
    clock.lap("tower");
    tower_checks(cfg, report, &tower)?;
    clock.lap("checks");
    report.tables.push(DecayTable::new(
        "wenzl_defect",
        sys.q(),
        (1..levels).map(|n| (n, tower.wenzl_defect(n))),
    ));
    Ok(())
}

fn fock_of(cfg: &RunConfig, report: &mut Report, clock: &mut Stopwatch) -> Result<FockOperators, Abort> {
    let sys = system_of(cfg.input.as_ref().expect("command has input"))?;
    report.parameters = Some(parameters(&sys));
    let levels = levels_for(cfg, &sys).max(2);
    report.input.levels = Some(levels);
    let ops = build_fock_with_budget(&sys, levels, cfg.max_scalars)?;
    clock.lap("fock");
    Ok(ops)
}

fn verify(cfg: &RunConfig, report: &mut Report, clock: &mut Stopwatch) -> Result<(), Abort> {
    let ops = fock_of(cfg, report, clock)?;
    let q = ops.system().q();
    for (name, v) in ops.verify_relations().entries() {
        report.checks.push(Check::residual(format!("relation_{name}"), v, cfg.tol));
    }
    let tails = ops.verify_tails();
    report.checks.push(Check::residual("tail_idempotency", tails.idempotency, cfg.tol));
    report.checks.push(Check::residual("tail_level_difference", tails.level_difference, cfg.tol));
    report.checks.push(Check::residual("tail_intertwining", tails.intertwining, cfg.tol));
    clock.lap("relations");
    let top = ops.levels();
    let norms: Vec<(f64, f64)> = (0..top).map(|n| ops.commutator_norms(n)).collect();
    let c1 = norms.iter().map(|p| p.0).fold(0.0, f64::max);
    report.checks.push(
        Check::residual("left_right_commute", c1, cfg.tol).with_detail("max ||[S_i, R_j]|| over levels below N"),
    );
    report.put("commutator", &reals(&norms.iter().map(|p| p.1).collect::<Vec<_>>()));
    report.tables.push(DecayTable::new(
        "commutator",
        q,
        norms.iter().enumerate().map(|(n, p)| (n, p.1)),
    ));
    let tower = ops.space().tower();
    report.tables.push(DecayTable::new(
        "wenzl_defect",
        q,
        (1..top).map(|n| (n, tower.wenzl_defect(n))),
    ));
    clock.lap("commutators");
    Ok(())
}

/// A fixed Hermitian matrix; deterministic so that reports are reproducible.
fn test_hermitian(dim: usize, seed: usize) -> CMatrix {
    let z = CMatrix::from_fn(dim, dim, |i, j| {
        let a = (1 + i + 2 * j + 3 * seed) as f64;
        c(a.cos(), (0.7 * a).sin())
    });
    matrix::hermitian_part(z.as_ref())
}

fn boundary(cfg: &RunConfig, report: &mut Report, clock: &mut Stopwatch) -> Result<(), Abort> {
    let ops = fock_of(cfg, report, clock)?;
    let q = ops.system().q();
    let dims = ops.dims();
    let top = ops.levels() - 1;
    let tower = ops.space().tower();

    let x = (0..dims.len()).fold(GradedOp::zero(&dims, 0), |acc, n| {
        acc.add(&GradedOp::supported_on(&dims, n, test_hermitian(dims[n], n)))
    });
    let mut worst: f64 = 0.0;
    let mut iterate = x.clone();
    for k in 1..=top {
        iterate = ops.theta(&iterate);
        for n in 0..=top - k {
            let psi = tlsub_core::fock::psi_map(tower, n, k, x.block(n).expect("degree zero"));
            let got = iterate.block(n + k).expect("degree zero");
            worst = worst.max(matrix::operator_norm((got - &psi).as_ref()));
        }
    }
    report.checks.push(Check::residual("theta_iterates_match_psi", worst, cfg.tol));
    let growth = (ops.theta(&x).norm_up_to(top) - x.norm_up_to(top + 1)).max(0.0);
    report.checks.push(Check::residual("theta_contractive", growth, cfg.tol));
    report.checks.push(Check::residual(
        "identity_flat",
        ops.boundary_flatness(&ops.identity(), 0),
        cfg.tol,
    ));
    let p1 = ops.tail_projection(1).clone();
    report.checks.push(Check::residual("tail_projection_flat", ops.boundary_flatness(&p1, 1), cfg.tol));
    clock.lap("theta");

    let word = ops.word(&[Letter::S(0), Letter::SStar(0)]);
    let flat: Vec<(usize, f64)> = (0..top).map(|n0| (n0, ops.boundary_flatness(&word, n0))).collect();
    report.put("flatness", &reals(&flat.iter().map(|p| p.1).collect::<Vec<_>>()));
    report.tables.push(DecayTable::new("flatness_s1_s1star", q, flat));
    clock.lap("flatness");
    Ok(())
}

#[derive(Serialize)]
struct KGroups {
    m: usize,
    k0: String,
    k1: String,
}

fn ktheory(cfg: &RunConfig, report: &mut Report) -> Result<(), Abort> {
    let t = cfg.truncate;
    let kerr = |e: tlsub_core::ktheory::KError| Abort::Failure(e.to_string());
    let full = pi_star_matrix(t).map_err(kerr)?;
    let mut routes_agree = true;
    let mut dets = Vec::with_capacity(t);
    let mut triangular = true;
    for tt in 1..=t {
        let a = pi_star_matrix(tt).map_err(kerr)?;
        let b = pi_star_from_multiplicities(tt).map_err(kerr)?;
        routes_agree &= a == b;
        triangular &= a.is_triangular_unipotent();
        dets.push(a.determinant());
    }
    report.checks.push(Check::exact(
        "pi_star_routes_agree",
        routes_agree,
        "fusion-rule route equals the multiplicity route",
    ));
    report.checks.push(Check::exact(
        "pi_star_unimodular",
        dets.iter().all(|d| d.abs() == 1),
        format!("determinants {dets:?}"),
    ));
    report.checks.push(Check::exact(
        "pi_star_triangular",
        triangular,
        "upper triangular with diagonal 1, -1, ..., -1",
    ));

    let mut fusion_ok = true;
    for l in 0..t {
        for k in 0..t - l {
            if l + k < t {
                let brute = mult_in_fock_rep(l, k, t).map_err(kerr)?;
                fusion_ok &= brute == mult_closed_form(l, k);
            }
        }
    }
    report.checks.push(Check::exact(
        "fusion_multiplicities",
        fusion_ok,
        "U_l (x) U_k against the closed form for l + k < T",
    ));

    let ms: Vec<usize> = match cfg.m {
        Some(m) => vec![m],
        None => (2..=5).collect(),
    };
    let mut conserved = true;
    for &m in &ms {
        let span = t.min(6);
        let Some(d) = dims_by_recurrence(m, 2 * span) else {
            return Err(Abort::Failure(format!("dimension overflow for m = {m}")));
        };
        for l in 0..=span {
            for k in 0..=span {
                let prod = fuse(l, k).dimension(&d);
                conserved &= prod == Some(d[l] * d[k]);
            }
        }
    }
    report.checks.push(Check::exact(
        "fusion_preserves_dimension",
        conserved,
        "dim(U_l (x) U_k) = d_l d_k",
    ));

    let groups: Vec<KGroups> = ms
        .iter()
        .map(|&m| KGroups {
            m,
            k0: k0_order(m).to_string(),
            k1: k1_group(m).to_string(),
        })
        .collect();
    report.put("pi_star", &full.entries);
    report.put("determinants", &dets);
    report.put("k_groups", &groups);
    Ok(())
}

fn dims(cfg: &RunConfig, report: &mut Report) -> Result<(), Abort> {
    let (m, n) = (cfg.m.expect("dims has m"), cfg.n.expect("dims has n"));
    let Some(d) = dims_by_recurrence(m, n) else {
        return Err(Abort::Failure(format!("d_n overflows 128 bits for m = {m}, n = {n}")));
    };
    let t = tlsub_core::tl::inverse_quantum_two(m as f64);
    let bad: Vec<usize> = d
        .iter()
        .enumerate()
        .filter(|&(k, &v)| (q_integer(k + 1, t) - v as f64).abs() > 1e-9 * v as f64)
        .map(|(k, _)| k)
        .collect();
    report.checks.push(Check::exact(
        "quantum_integer_agreement",
        bad.is_empty(),
        if bad.is_empty() {
            "d_n = [n+1]_t for every n".to_string()
        } else {
            format!("mismatch at n = {bad:?}")
        },
    ));
    report.put("dims", &d);
    Ok(())
}
