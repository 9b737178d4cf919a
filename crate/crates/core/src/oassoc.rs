//! The Oriented Associativity system for three unknowns: both charts, both
//! Hamiltonian structures and the verification scenarios built on them.

use std::sync::Arc;
use std::time::Instant;

use hydroham_kernel::{parse, parse_rational, ArithError, BigRational, Expr, ParseError, Var, Workspace};
use thiserror::Error;

use crate::conditions::{
    check_commuting, check_coupling, check_local_third_order, check_nonlocal_third_order, check_q_conditions,
    coupling_oracle, derive_metric, COUPLING_FAMILIES, CTensor, MetricOutcome, NonlocalTail, Residual, ResidualReport,
};
use crate::jet::{DirectFrame, EvolutionSystem, JetError, JetExpr, JetMono, JetSpace, JetVar};
use crate::lax::{
    char_poly, flows_from_density, is_quasihomogeneous, leading_relation, match_density, pullback_jet, riccati_expand,
    scalar_reduce, split_lambda, substitution_oracle, variational_difference, zero_curvature, DensityMatch,
    GeneratingSeries, LaxError, LaxPair, Series,
};
use crate::par;
use crate::tensor::{identity, inverse, mat_mul, mat_sub, transpose, zeros, ChartMap, Matrix, Metric, TensorError};

pub const FLUX_Q: &str = include_str!("../fixtures/flux_q.txt");
pub const CHART_U: &str = include_str!("../fixtures/chart_u.txt");
pub const METRIC10: &str = include_str!("../fixtures/metric10.txt");
pub const FIRST_ORDER: &str = include_str!("../fixtures/first_order.txt");
pub const W16: &str = include_str!("../fixtures/w16.txt");
pub const W18: &str = include_str!("../fixtures/w18.txt");
pub const DENSITIES: &str = include_str!("../fixtures/densities.txt");
pub const SCALAR_ODE: &str = include_str!("../fixtures/scalar_ode.txt");
pub const LAWS: &str = include_str!("../fixtures/laws.txt");

const N: usize = 6;

#[derive(Debug, Error)]
pub enum OAssocError {
    #[error("{file}:{line}: {message}")]
    Fixture { file: String, line: usize, message: String },
    #[error("inconsistent bundle: {0}")]
    Inconsistent(String),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Lax(#[from] LaxError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Key of a fixture line: an index tuple (one-based in the file, zero-based here) or a name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixtureKey {
    Index(Vec<usize>),
    Name(String),
}

#[derive(Clone, Debug)]
pub struct FixtureLine {
    pub line: usize,
    pub key: FixtureKey,
    pub text: String,
}

/// Lines `key: expression`; `#` starts a comment line.
pub fn parse_fixture(file: &str, src: &str) -> Result<Vec<FixtureLine>, OAssocError> {
    let mut out = Vec::new();
    for (k, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, text) = line.split_once(':').ok_or_else(|| OAssocError::Fixture {
            file: file.into(),
            line: k + 1,
            message: "expected `key: expression`".into(),
        })?;
        let toks: Vec<&str> = key.split_whitespace().collect();
        let idx: Option<Vec<usize>> = toks.iter().map(|t| t.parse::<usize>().ok().filter(|&i| i >= 1)).collect();
        let key = match idx {
            Some(v) if !v.is_empty() => FixtureKey::Index(v.into_iter().map(|i| i - 1).collect()),
            _ => FixtureKey::Name(key.trim().to_string()),
        };
        out.push(FixtureLine {
            line: k + 1,
            key,
            text: text.trim().to_string(),
        });
    }
    Ok(out)
}

fn fixture_err(file: &str, line: usize, e: impl std::fmt::Display) -> OAssocError {
    OAssocError::Fixture {
        file: file.into(),
        line,
        message: e.to_string(),
    }
}

fn parse_at(file: &str, l: &FixtureLine, ws: &Workspace) -> Result<Expr, OAssocError> {
    parse(&l.text, ws).map_err(|e: ParseError| fixture_err(file, l.line, e))
}

fn named(file: &str, src: &str, name: &str, ws: &Workspace) -> Result<Expr, OAssocError> {
    let lines = parse_fixture(file, src)?;
    let l = lines
        .iter()
        .find(|l| l.key == FixtureKey::Name(name.into()))
        .ok_or_else(|| fixture_err(file, 0, format!("missing `{name}`")))?;
    parse_at(file, l, ws)
}

fn vector(file: &str, src: &str, ws: &Workspace, n: usize) -> Result<Vec<Expr>, OAssocError> {
    let mut out = vec![None; n];
    for l in parse_fixture(file, src)? {
        if let FixtureKey::Index(ix) = &l.key {
            match ix.as_slice() {
                [i] if *i < n => out[*i] = Some(parse_at(file, &l, ws)?),
                _ => return Err(fixture_err(file, l.line, "index out of range")),
            }
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, e)| e.ok_or_else(|| fixture_err(file, 0, format!("missing component {}", i + 1))))
        .collect()
}

/// Upper-triangle entries, mirrored with `sign` (`1` symmetric, `-1` skew).
fn triangle(file: &str, src: &str, ws: &Workspace, n: usize, sign: i64) -> Result<Matrix, OAssocError> {
    let mut m = zeros(n, n);
    for l in parse_fixture(file, src)? {
        if let FixtureKey::Index(ix) = &l.key {
            let (i, j) = match ix.as_slice() {
                [i, j] if *i < n && *j < n && i <= j => (*i, *j),
                _ => return Err(fixture_err(file, l.line, "expected `i j` with i <= j")),
            };
            let e = parse_at(file, &l, ws)?;
            if i == j && sign < 0 && !e.is_zero() {
                return Err(fixture_err(file, l.line, "nonzero diagonal in a skew matrix"));
            }
            m[j][i] = e.scale_int(&sign.into());
            m[i][j] = e;
        }
    }
    Ok(m)
}

/// Everything the verifications need, assembled from the fixtures.
pub struct OAssocBundle {
    /// `q1..q6, lambda, v`
    pub ws_q: Workspace,
    /// `u1..u6, lambda`
    pub ws_u: Workspace,
    pub q_vars: Vec<Var>,
    pub u_vars: Vec<Var>,
    pub lambda: Var,
    pub system_q: EvolutionSystem,
    pub chart: ChartMap,
    /// The `q`-system with `u` as parameters.
    pub system_qu: EvolutionSystem,
    /// The system in Viete coordinates, with fluxes from the extra conservation laws.
    pub system_u: EvolutionSystem,
    /// `u^i_t = velocity_u[i][j] u^j_x`, transported from the `q`-system.
    pub velocity_u: Matrix,
    /// Contravariant constant metric of the first-order operator.
    pub metric1: Matrix,
    pub hamiltonian: JetExpr,
    pub momentum: JetExpr,
    pub metric3_q: Metric,
    pub c3_q: CTensor,
    /// The Monge metric in `q`-components with `u` as parameters.
    pub metric3: Metric,
    pub c3: CTensor,
    pub delta: Expr,
    /// `Delta`-scaled lowered tails as listed.
    pub tilde_w: [Matrix; 2],
    pub constants: [BigRational; 3],
    /// `w^i_{aj}` in `q`-components.
    pub tails: NonlocalTail,
    pub lax: LaxPair,
    pub char_poly_printed: Expr,
    pub scalar_ode_printed: [JetExpr; 4],
    /// Extra conservation-law fluxes in `u` for `k = 1, 2, 3`.
    pub v_fluxes: [Expr; 3],
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn check_identity(what: &str, a: &Matrix, b: &Matrix) -> Result<(), OAssocError> {
    if a != b {
        return Err(OAssocError::Inconsistent(what.into()));
    }
    Ok(())
}

pub fn build_bundle() -> Result<OAssocBundle, OAssocError> {
    let mut qn = names("q", N);
    qn.extend(["lambda".to_string(), "v".to_string()]);
    let ws_q = Workspace::with_symbols(&qn).expect("distinct names");
    let mut un = names("u", N);
    un.push("lambda".into());
    let ws_u = Workspace::with_symbols(&un).expect("distinct names");
    let q_vars: Vec<Var> = (0..N as u8).map(Var).collect();
    let u_vars = q_vars.clone();
    let lambda = Var(N as u8);
    let v_sym = Var(N as u8 + 1);

    let fluxes = vector("flux_q.txt", FLUX_Q, &ws_q, N)?;
    let space_q = JetSpace::new(Arc::new(DirectFrame::new(q_vars.clone())), names("q", N));
    let system_q = EvolutionSystem::new(space_q, fluxes.clone());

    let q_of_u = vector("chart_u.txt", CHART_U, &ws_u, N)?;
    let chart = ChartMap::new(u_vars.clone(), q_of_u)?;
    check_identity("J J^{-1} = I", &mat_mul(&chart.j, &chart.jinv), &identity(N))?;
    let pull = |e: &Expr| chart.pullback(e, &q_vars);

    let space_qu = JetSpace::new(Arc::new(chart.param_frame()), names("q", N));
    let fluxes_u: Vec<Expr> = fluxes.iter().map(pull).collect::<Result<_, _>>()?;
    let system_qu = EvolutionSystem::new(space_qu, fluxes_u.clone());
    let velocity_u = mat_mul(&mat_mul(&chart.jinv, &system_qu.jac), &chart.j);

    let v_flux = named("laws.txt", LAWS, "v_flux", &ws_q)?;
    let v_fluxes: [Expr; 3] = par::try_map(&[0usize, 1, 2], |&k| {
        let mut subs: Vec<(Var, Expr)> = q_vars.iter().copied().zip(chart.q_of_u.iter().cloned()).collect();
        subs.push((v_sym, Expr::var(u_vars[k])));
        v_flux.substitute(&subs)
    })?
    .try_into()
    .expect("three fluxes");
    let sum_v = &(&v_fluxes[0] + &v_fluxes[1]) + &v_fluxes[2];
    let flux_u6 = &fluxes_u[2].scale_int(&2.into()) - &sum_v;
    let space_u = JetSpace::new(Arc::new(DirectFrame::new(u_vars.clone())), names("u", N));
    let system_u = EvolutionSystem::new(
        space_u,
        vec![
            v_fluxes[0].clone(),
            v_fluxes[1].clone(),
            v_fluxes[2].clone(),
            fluxes_u[3].clone(),
            fluxes_u[4].clone(),
            flux_u6,
        ],
    );

    let metric1 = triangle("first_order.txt", FIRST_ORDER, &ws_u, N, 1)?;
    let ham = pull(&named("laws.txt", LAWS, "hamiltonian", &ws_q)?)?;
    let mom = pull(&named("laws.txt", LAWS, "momentum", &ws_q)?)?;

    let g10 = triangle("metric10.txt", METRIC10, &ws_q, N, 1)?;
    let metric3_q = Metric::new(g10.clone(), system_q.space.frame.clone())?;
    let c3_q = CTensor::from_metric(&metric3_q);
    let g10u = chart.pullback_matrix(&g10, &q_vars)?;
    let metric3 = Metric::new(g10u, system_qu.space.frame.clone())?;
    let c3 = CTensor::from_metric(&metric3);

    let delta = named("chart_u.txt", CHART_U, "delta", &ws_u)?;
    let det = metric3.det()?;
    let d2 = &delta * &delta;
    if det != d2 && det != -&d2 {
        return Err(OAssocError::Inconsistent("det g = +-Delta^2".into()));
    }
    let w1t = triangle("w16.txt", W16, &ws_u, N, -1)?;
    let w2t = triangle("w18.txt", W18, &ws_u, N, -1)?;
    let dinv = delta.inv()?;
    let raise = |wt: &Matrix| {
        let m = mat_mul(&metric3.ginv, wt);
        m.iter().map(|r| r.iter().map(|e| e * &dinv).collect()).collect::<Matrix>()
    };
    let c = |k: &str| -> Result<BigRational, OAssocError> {
        let lines = parse_fixture("laws.txt", LAWS)?;
        let l = lines
            .iter()
            .find(|l| l.key == FixtureKey::Name(k.into()))
            .ok_or_else(|| fixture_err("laws.txt", 0, format!("missing `{k}`")))?;
        parse_rational(&l.text).map_err(|e| fixture_err("laws.txt", l.line, e))
    };
    let constants = [c("c1")?, c("c2")?, c("c3")?];
    let tails = NonlocalTail::pair(constants.clone(), raise(&w1t), raise(&w2t));

    let lax = LaxPair::oriented_associativity(&q_vars, lambda, &fluxes);
    let char_poly_printed = named("laws.txt", LAWS, "char_poly", &ws_q)?;
    let mut ode: [JetExpr; 4] = Default::default();
    let ode_lines = parse_fixture("scalar_ode.txt", SCALAR_ODE)?;
    for (k, key) in ["psi", "psi_x", "psi_xx", "psi_xxx"].iter().enumerate() {
        let l = ode_lines
            .iter()
            .find(|l| l.key == FixtureKey::Name(key.to_string()))
            .ok_or_else(|| fixture_err("scalar_ode.txt", 0, format!("missing `{key}`")))?;
        ode[k] = system_q
            .space
            .parse(&ws_q, &l.text)
            .map_err(|e| fixture_err("scalar_ode.txt", l.line, e))?;
    }

    let viete = pull(&(&Expr::var(q_vars[2]) + &Expr::var(q_vars[5])))?;
    if viete != sum_u123(&u_vars) {
        return Err(OAssocError::Inconsistent("q3 + q6 = u1 + u2 + u3".into()));
    }

    Ok(OAssocBundle {
        ws_q,
        ws_u,
        q_vars,
        u_vars,
        lambda,
        system_q,
        chart,
        system_qu,
        system_u,
        velocity_u,
        metric1,
        hamiltonian: JetExpr::constant(ham),
        momentum: JetExpr::constant(mom),
        metric3_q,
        c3_q,
        metric3,
        c3,
        delta,
        tilde_w: [w1t, w2t],
        constants,
        tails,
        lax,
        char_poly_printed,
        scalar_ode_printed: ode,
        v_fluxes,
    })
}

fn sum_u123(u: &[Var]) -> Expr {
    &(&Expr::var(u[0]) + &Expr::var(u[1])) + &Expr::var(u[2])
}

fn hydro(row: &[Expr]) -> JetExpr {
    let mut e = JetExpr::zero();
    for (j, c) in row.iter().enumerate() {
        e.add_term(JetMono::var(JetVar::U(j as u8, 1)), c);
    }
    e
}

impl OAssocBundle {
    /// `u^i_t - g^{ik} D_x (dH/du^k)` for a density `h(u)`.
    pub fn first_order_flow(&self, h: &Expr) -> ResidualReport {
        let frame = &self.system_u.space.frame;
        let grad = frame.gradient(h);
        let hess: Matrix = grad.iter().map(|g| frame.gradient(g)).collect();
        let rhs = mat_mul(&self.metric1, &hess);
        let mut r = ResidualReport::new("first-order Hamiltonian flow");
        for i in 0..N {
            let row: Vec<Expr> = (0..N).map(|j| &self.velocity_u[i][j] - &rhs[i][j]).collect();
            r.push(vec![i], hydro(&row));
        }
        r
    }

    /// `P - (1/2) g~_{ik} u^i u^k`.
    pub fn momentum_quadratic(&self) -> Result<ResidualReport, OAssocError> {
        let lower = inverse(&self.metric1)?;
        let mut q = Expr::zero();
        for i in 0..N {
            for k in 0..N {
                if !lower[i][k].is_zero() {
                    q = &q + &(&(&lower[i][k] * &Expr::var(self.u_vars[i])) * &Expr::var(self.u_vars[k]));
                }
            }
        }
        let p = self.momentum.as_scalar().unwrap_or_default();
        let mut r = ResidualReport::new("momentum as quadratic form");
        r.push(vec![], &p - &(&q * &hydroham_kernel::expr::ratio(1, 2)));
        Ok(r)
    }

    /// The six trivial laws, `H`, `P` in `q`, the three extra laws in `u`.
    pub fn conservation_laws(&self) -> Result<Vec<ResidualReport>, OAssocError> {
        let sys = &self.system_q;
        let law = |rho: &Expr, sigma: &Expr| -> Result<JetExpr, JetError> {
            let t = sys.total_t(&JetExpr::constant(rho.clone()))?;
            let x = sys.total_x(&JetExpr::constant(sigma.clone()))?;
            Ok(&t - &x)
        };
        let mut trivial = ResidualReport::new("conservation laws of the system");
        for i in 0..N {
            trivial.push(vec![i], law(&Expr::var(self.q_vars[i]), &sys.fluxes[i])?);
        }
        let mut hp = ResidualReport::new("Hamiltonian and momentum conservation");
        hp.push(vec![0], law(&Expr::var(self.q_vars[1]), &sys.fluxes[1])?);
        hp.push(vec![1], law(&Expr::var(self.q_vars[0]), &sys.fluxes[0])?);
        let mut extra = ResidualReport::new("extra conservation laws in Viete coordinates");
        for k in 0..3 {
            let grad = self.system_u.space.frame.gradient(&self.v_fluxes[k]);
            let row: Vec<Expr> = (0..N).map(|j| &self.velocity_u[k][j] - &grad[j]).collect();
            extra.push(vec![k], hydro(&row));
        }
        let mut transported = ResidualReport::new("Viete-coordinate system equals the transported system");
        for i in 0..N {
            let row: Vec<Expr> = (0..N).map(|j| &self.velocity_u[i][j] - &self.system_u.jac[i][j]).collect();
            transported.push(vec![i], hydro(&row));
        }
        let mut viete = ResidualReport::new("Viete identity q3 + q6 = u1 + u2 + u3");
        let pulled = self
            .chart
            .pullback(&(&Expr::var(self.q_vars[2]) + &Expr::var(self.q_vars[5])), &self.q_vars)?;
        viete.push(vec![], &pulled - &sum_u123(&self.u_vars));
        Ok(vec![trivial, hp, extra, transported, viete])
    }

    /// Scalar-ODE coefficients pulled back to `u`, split in powers of `lambda`.
    pub fn riccati_coefficients(&self) -> Result<[Series; 4], OAssocError> {
        let a = scalar_reduce(&self.lax, &self.system_q.space)?;
        let mut out: [Series; 4] = Default::default();
        for (k, ak) in a.iter().enumerate() {
            let p = pullback_jet(ak, &self.chart, &self.q_vars, &self.system_u.space)?;
            out[k] = Series::from_terms(split_lambda(&p, self.lambda)?);
        }
        Ok(out)
    }

    /// Branches `k = 0, 1, 2` of the generating function, to the given depth.
    pub fn expand_branches(&self, depth: usize) -> Result<Vec<GeneratingSeries>, OAssocError> {
        let a = self.riccati_coefficients()?;
        let ks = [0usize, 1, 2];
        Ok(par::try_map(&ks, |&k| {
            riccati_expand(&a, &self.system_u.space, self.u_vars[k], k, depth)
        })?)
    }

    pub fn expand_branch(&self, branch: usize, depth: usize) -> Result<GeneratingSeries, OAssocError> {
        if branch >= 3 {
            return Err(LaxError::Branch(branch + 1).into());
        }
        let a = self.riccati_coefficients()?;
        Ok(riccati_expand(&a, &self.system_u.space, self.u_vars[branch], branch, depth)?)
    }

    /// Printed first density of branch `k`; `reading` replaces the literal `u_2`.
    pub fn printed_density(&self, k: usize, reading: &str) -> Result<JetExpr, OAssocError> {
        let lines = parse_fixture("densities.txt", DENSITIES)?;
        let name = format!("h0{}", k + 1);
        let l = lines
            .iter()
            .find(|l| l.key == FixtureKey::Name(name.clone()))
            .ok_or_else(|| fixture_err("densities.txt", 0, format!("missing `{name}`")))?;
        let text = l.text.replace("u_2", reading);
        self.system_u
            .space
            .parse(&self.ws_u, &text)
            .map_err(|e| fixture_err("densities.txt", l.line, e))
    }

    /// `Delta g J w J^{-1}` for a flow `w` in Viete components.
    pub fn scaled_lowered(&self, w_u: &Matrix) -> Matrix {
        let wq = self.chart.transform_flow(w_u);
        let l = self.metric3.lower(&wq);
        l.iter().map(|r| r.iter().map(|e| e * &self.delta).collect()).collect()
    }

    pub fn tails_with(&self, c: [i64; 3]) -> NonlocalTail {
        let r = |v: i64| BigRational::from_integer(v.into());
        NonlocalTail::pair([r(c[0]), r(c[1]), r(c[2])], self.tails.w[0].clone(), self.tails.w[1].clone())
    }
}

/// Expected outcome of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Pass,
    Fail,
}

impl Expect {
    pub fn as_str(self) -> &'static str {
        match self {
            Expect::Pass => "pass",
            Expect::Fail => "fail",
        }
    }
}

/// Coordinates a residual is written in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Chart {
    #[default]
    Q,
    /// `q`-components with `u` as parameters.
    QofU,
    U,
}

#[derive(Clone, Debug)]
pub struct Check {
    /// Case the check belongs to.
    pub case: String,
    pub report: ResidualReport,
    pub expect: Expect,
    pub chart: Chart,
    pub seconds: f64,
}

impl Check {
    pub fn met(&self) -> bool {
        self.report.passed() == (self.expect == Expect::Pass)
    }
}

#[derive(Clone, Debug, Default)]
pub struct CaseReport {
    pub case: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    chart: Chart,
}

impl CaseReport {
    fn new(case: &str, chart: Chart) -> CaseReport {
        CaseReport {
            case: case.into(),
            chart,
            ..Default::default()
        }
    }

    pub fn met(&self) -> bool {
        self.checks.iter().all(Check::met)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.report.name == name)
    }

    fn push(&mut self, report: ResidualReport, expect: Expect, start: Instant) {
        self.checks.push(Check {
            case: self.case.clone(),
            report,
            expect,
            chart: self.chart,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    fn push_all(&mut self, reports: impl IntoIterator<Item = ResidualReport>, expect: Expect, start: Instant) {
        let s = start.elapsed().as_secs_f64();
        for report in reports {
            self.checks.push(Check {
                case: self.case.clone(),
                report,
                expect,
                chart: self.chart,
                seconds: s,
            });
        }
    }

    fn extend(&mut self, other: CaseReport) {
        if self.case == "all" {
            self.notes.extend(other.notes.into_iter().map(|n| format!("{}: {n}", other.case)));
            self.checks.extend(other.checks);
        } else {
            let case = self.case.clone();
            self.notes.extend(other.notes);
            self.checks.extend(other.checks.into_iter().map(|c| Check { case: case.clone(), ..c }));
        }
    }
}

fn renamed(mut r: ResidualReport, name: impl Into<String>) -> ResidualReport {
    r.name = name.into();
    r
}

pub const CASES: [&str; 8] = [
    "first-order",
    "metric",
    "local-fail",
    "nonlocal",
    "coupling",
    "theorem",
    "densities",
    "zero-curvature",
];

pub fn run_case(b: &OAssocBundle, case: &str) -> Result<CaseReport, OAssocError> {
    match case {
        "first-order" => verify_first_order(b),
        "metric" => verify_metric(b),
        "local-fail" => Ok(verify_local_fail(b)),
        "nonlocal" => Ok(verify_nonlocal(b)),
        "coupling" => verify_coupling(b),
        "theorem" => verify_theorem(b),
        "densities" => verify_densities(b),
        "zero-curvature" => verify_zero_curvature(b),
        "all" => {
            let mut all = CaseReport::new("all", Chart::Q);
            for c in CASES.iter().filter(|&&c| c != "coupling") {
                all.extend(run_case(b, c)?);
            }
            all.notes.push("coupling checks are reported once, within theorem".into());
            Ok(all)
        }
        other => Err(OAssocError::UnknownCase(other.into())),
    }
}

pub fn verify_first_order(b: &OAssocBundle) -> Result<CaseReport, OAssocError> {
    let mut r = CaseReport::new("first-order", Chart::U);
    let t = Instant::now();
    r.push(b.first_order_flow(&b.hamiltonian.as_scalar().unwrap_or_default()), Expect::Pass, t);
    let t = Instant::now();
    r.push(b.momentum_quadratic()?, Expect::Pass, t);
    let t = Instant::now();
    let swapped = b.first_order_flow(&b.momentum.as_scalar().unwrap_or_default());
    r.push(renamed(swapped, "first-order flow with the momentum as Hamiltonian"), Expect::Fail, t);
    let t = Instant::now();
    let mut laws = b.conservation_laws()?.into_iter();
    r.chart = Chart::Q;
    r.push_all(laws.by_ref().take(2), Expect::Pass, t);
    r.chart = Chart::U;
    r.push_all(laws, Expect::Pass, t);
    Ok(r)
}

pub fn verify_metric(b: &OAssocBundle) -> Result<CaseReport, OAssocError> {
    let mut r = CaseReport::new("metric", Chart::Q);
    let t = Instant::now();
    let frame = DirectFrame::new(b.q_vars.clone());
    let d = derive_metric(&frame, &b.system_q.fluxes, &names("q", N));
    r.notes.push(format!(
        "metric ansatz: {} unknowns, {} scalar equations, rank {}",
        d.unknowns.len(),
        d.scalar_equations,
        d.rank
    ));
    let mut cmp = ResidualReport::new("derived metric equals the Monge metric");
    match &d.outcome {
        MetricOutcome::Unique { g, scale_freedom } => {
            r.notes.push(format!("solution unique up to {scale_freedom} free scale after g11 = 2"));
            for i in 0..N {
                for j in 0..N {
                    cmp.push(vec![i, j], &g[i][j] - &b.metric3_q.g[i][j]);
                }
            }
            let metric = Metric::new(g.clone(), b.system_q.space.frame.clone())?;
            let c = CTensor::from_metric(&metric);
            let [_, _, _, c27] = check_local_third_order(&metric, &c);
            r.push(d.back_substitution.clone(), Expect::Pass, t);
            r.push(cmp, Expect::Pass, t);
            r.push(renamed(c27, "(27) on the derived metric"), Expect::Fail, t);
        }
        MetricOutcome::Free { free } => {
            r.notes.push(format!("underdetermined: {}", free.join(", ")));
            cmp.push(vec![], Expr::one());
            r.push(cmp, Expect::Pass, t);
        }
        MetricOutcome::Inconsistent => {
            r.notes.push("inconsistent ansatz".into());
            cmp.push(vec![], Expr::one());
            r.push(cmp, Expect::Pass, t);
        }
    }
    Ok(r)
}

pub fn verify_local_fail(b: &OAssocBundle) -> CaseReport {
    let mut r = CaseReport::new("local-fail", Chart::Q);
    let t = Instant::now();
    let [c22, c28, c23, c27] = check_local_third_order(&b.metric3_q, &b.c3_q);
    if let Some((ix, _)) = c27.first_nonzero() {
        let ix: Vec<String> = ix.iter().map(|i| (i + 1).to_string()).collect();
        r.notes.push(format!("(27) first nonzero residual at ({})", ix.join(",")));
    }
    r.push_all([c22, c28, c23], Expect::Pass, t);
    r.push(c27, Expect::Fail, t);
    r
}

pub fn verify_nonlocal(b: &OAssocBundle) -> CaseReport {
    let mut r = CaseReport::new("nonlocal", Chart::QofU);
    r.notes.push(format!(
        "constants c1 = {}, c2 = {}, c3 = {}",
        b.constants[0], b.constants[1], b.constants[2]
    ));
    let t = Instant::now();
    r.push_all(check_nonlocal_third_order(&b.metric3, &b.c3, &b.tails), Expect::Pass, t);
    let t = Instant::now();
    r.push_all(
        check_q_conditions(&b.metric3, &b.c3, &b.tails, &b.u_vars, &b.chart.jinv),
        Expect::Pass,
        t,
    );
    let base = [2i64, 1, 2];
    for k in 0..3 {
        for d in [-1i64, 1] {
            let t = Instant::now();
            let mut c = base;
            c[k] += d;
            let tails = b.tails_with(c);
            let [first, _] = check_q_conditions(&b.metric3, &b.c3, &tails, &b.u_vars, &b.chart.jinv);
            let name = format!("(20) curvature-type condition, constants ({}, {}, {})", c[0], c[1], c[2]);
            r.push(renamed(first, name), Expect::Fail, t);
        }
    }
    let t = Instant::now();
    let [_, _, c31] = check_nonlocal_third_order(&b.metric3, &b.c3, &b.tails_with([1, 1, 2]));
    r.push(renamed(c31, "(31) with c1 = 1"), Expect::Fail, t);
    let t = Instant::now();
    let swapped = NonlocalTail::new(b.tails.constants.clone(), vec![b.tails.w[1].clone(), b.tails.w[0].clone()]);
    let [first, _] = check_q_conditions(&b.metric3, &b.c3, &swapped, &b.u_vars, &b.chart.jinv);
    r.push(
        renamed(first, "(20) curvature-type condition, tail labels swapped"),
        Expect::Pass,
        t,
    );
    r.notes.push("swapping the two tail labels leaves c1 = c3 constants invariant".into());
    r
}

pub fn verify_coupling(b: &OAssocBundle) -> Result<CaseReport, OAssocError> {
    let mut r = CaseReport::new("coupling", Chart::QofU);
    let t = Instant::now();
    r.push_all(check_coupling(&b.system_qu, &b.metric3, &b.c3, &b.tails), Expect::Pass, t);
    let t = Instant::now();
    let oracle = coupling_oracle(&b.system_qu, &b.metric3, &b.c3, &b.tails)?;
    for f in oracle.discrepancies() {
        r.notes.push(format!("{f}: printed form differs from the expansion of l_F(B(p))"));
    }
    for (a, f) in oracle.agreement.iter().zip(COUPLING_FAMILIES) {
        let expect = if f == "(21)" { Expect::Fail } else { Expect::Pass };
        r.push(a.clone(), expect, t);
    }
    r.push(oracle.corrected_21.clone(), Expect::Pass, t);
    r.push(oracle.unclassified.clone(), Expect::Pass, t);
    r.extend(verify_commuting(b)?);
    Ok(r)
}

fn verify_commuting(b: &OAssocBundle) -> Result<CaseReport, OAssocError> {
    let mut r = CaseReport::new("commuting", Chart::QofU);
    for (a, w) in b.tails.w.iter().enumerate() {
        let t = Instant::now();
        let c = check_commuting(&b.system_qu, w)?;
        r.push(renamed(c, format!("tail flow {} commutes with the system", a + 1)), Expect::Pass, t);
    }
    let t = Instant::now();
    let mut w = b.tails.w[0].clone();
    let (i, j) = first_nonzero_entry(&w).unwrap_or((0, 0));
    w[i][j] = &w[i][j] + &Expr::one();
    let c = check_commuting(&b.system_qu, &w)?;
    r.push(renamed(c, "tail flow 1 with one entry shifted by 1"), Expect::Fail, t);
    Ok(r)
}

fn first_nonzero_entry(m: &Matrix) -> Option<(usize, usize)> {
    (0..m.len()).flat_map(|i| (0..m[i].len()).map(move |j| (i, j))).find(|&(i, j)| !m[i][j].is_zero())
}

pub fn verify_theorem(b: &OAssocBundle) -> Result<CaseReport, OAssocError> {
    let mut r = CaseReport::new("theorem", Chart::QofU);
    let t = Instant::now();
    let [c22, c28, c23, c27] = check_local_third_order(&b.metric3, &b.c3);
    r.push_all([c22, c28, c23], Expect::Pass, t);
    r.push(c27, Expect::Fail, t);
    r.extend(verify_nonlocal_core(b));
    r.extend(verify_coupling(b)?);
    let t = Instant::now();
    let [first, _] = check_q_conditions(&b.metric3, &b.c3, &b.tails_with([1, 1, 1]), &b.u_vars, &b.chart.jinv);
    r.push(renamed(first, "(20) curvature-type condition, constants (1, 1, 1)"), Expect::Fail, t);
    let t = Instant::now();
    let [_, _, c31] = check_nonlocal_third_order(&b.metric3, &b.c3, &NonlocalTail::empty());
    r.push(renamed(c31, "(31) with the tails removed"), Expect::Fail, t);
    Ok(r)
}

fn verify_nonlocal_core(b: &OAssocBundle) -> CaseReport {
    let mut r = CaseReport::new("nonlocal", Chart::QofU);
    r.notes.push(format!(
        "constants c1 = {}, c2 = {}, c3 = {}",
        b.constants[0], b.constants[1], b.constants[2]
    ));
    let t = Instant::now();
    r.push_all(check_nonlocal_third_order(&b.metric3, &b.c3, &b.tails), Expect::Pass, t);
    let t = Instant::now();
    r.push_all(
        check_q_conditions(&b.metric3, &b.c3, &b.tails, &b.u_vars, &b.chart.jinv),
        Expect::Pass,
        t,
    );
    r
}

pub fn verify_densities(b: &OAssocBundle) -> Result<CaseReport, OAssocError> {
    let mut r = CaseReport::new("densities", Chart::U);
    let t = Instant::now();
    let branches = b.expand_branches(0)?;
    let space = &b.system_u.space;
    let mut leading = ResidualReport::new("leading order on each branch");
    let mut linear = ResidualReport::new("recursion coefficient equals q5 times the characteristic derivative");
    let q5 = b.chart.q_of_u[4].clone();
    for g in &branches {
        leading.push(vec![g.branch], g.leading_residual.clone());
        let uk = Expr::var(b.u_vars[g.branch]);
        let mut prod = q5.clone();
        for j in 0..3 {
            if j != g.branch {
                prod = &prod * &(&uk - &Expr::var(b.u_vars[j]));
            }
        }
        linear.push(vec![g.branch], &g.linear - &prod);
    }
    r.push(leading, Expect::Pass, t);
    r.push(linear, Expect::Pass, t);

    let t = Instant::now();
    let mut grading = ResidualReport::new("first densities have x-weight 1");
    let mut matches = ResidualReport::new("first densities match the printed ones modulo total derivatives");
    let mut conserved = ResidualReport::new("first densities are conserved");
    for g in &branches {
        let h = &g.h[0];
        grading.push(vec![g.branch], if is_quasihomogeneous(h, 1) { Expr::zero() } else { Expr::one() });
        let readings: &[&str] = if g.branch == 2 { &["u2", "u2_x"] } else { &["u2"] };
        let mut best: Option<(DensityMatch, Vec<JetExpr>)> = None;
        for reading in readings {
            let printed = b.printed_density(g.branch, reading)?;
            let m = match_density(space, h, &printed)?;
            if g.branch == 2 {
                r.notes.push(format!("h03 with u_2 read as {reading}: {}", m.as_str()));
            } else {
                r.notes.push(format!("h0{}: {}", g.branch + 1, m.as_str()));
            }
            let v = variational_difference(space, h, &printed)?;
            if best.is_none() || m != DensityMatch::Mismatch {
                best = Some((m, v));
            }
            if m != DensityMatch::Mismatch {
                break;
            }
        }
        let (_, v) = best.expect("at least one reading");
        for (k, e) in v.into_iter().enumerate() {
            matches.push(vec![g.branch, k], e);
        }
        let tt = b.system_u.total_t(h)?;
        for k in 0..N {
            conserved.push(vec![g.branch, k], space.variational(&tt, k)?);
        }
    }
    r.push(grading, Expect::Pass, t);
    r.push(matches, Expect::Pass, t);
    r.push(conserved, Expect::Pass, t);

    let t = Instant::now();
    let sum = &(&branches[0].h[0] + &branches[1].h[0]) + &branches[2].h[0];
    let mut exact = ResidualReport::new("sum of the three first densities vanishes");
    exact.push(vec![], sum.clone());
    let mut modulo = ResidualReport::new("sum of the three first densities is a total derivative");
    for k in 0..N {
        modulo.push(vec![k], space.variational(&sum, k)?);
    }
    if !sum.is_zero() {
        r.notes.push(format!("sum of first densities: {}", space.print(&b.ws_u, &sum)));
    }
    r.push(exact, Expect::Pass, t);
    r.push(modulo, Expect::Pass, t);

    let gt = &b.metric1;
    for (a, file) in [(0usize, "w16"), (1, "w18")] {
        let t = Instant::now();
        let w = flows_from_density(space, &branches[a].h[0], gt)?;
        let scaled = b.scaled_lowered(&w);
        let mut cmp = ResidualReport::new(format!("tail {} from density h0{} matches {file}", a + 1, a + 1));
        let mut skew = ResidualReport::new(format!("tail {} lowered is skew", a + 1));
        let sk = mat_sub(&scaled, &transpose(&scaled).iter().map(|r| r.iter().map(|e| -e).collect()).collect());
        for i in 0..N {
            for j in 0..N {
                cmp.push(vec![i, j], &scaled[i][j] - &b.tilde_w[a][i][j]);
                skew.push(vec![i, j], sk[i][j].clone());
            }
        }
        r.push(cmp, Expect::Pass, t);
        r.push(skew, Expect::Pass, t);
    }
    Ok(r)
}

pub fn verify_zero_curvature(b: &OAssocBundle) -> Result<CaseReport, OAssocError> {
    let mut r = CaseReport::new("zero-curvature", Chart::Q);
    let t = Instant::now();
    r.push(zero_curvature(&b.lax, &b.system_q)?, Expect::Pass, t);

    let t = Instant::now();
    let cp = char_poly(&b.lax)?;
    let mut rep = ResidualReport::new("characteristic polynomial");
    rep.push(vec![], &cp - &b.char_poly_printed);
    r.push(rep, Expect::Pass, t);

    let t = Instant::now();
    let coeffs = scalar_reduce(&b.lax, &b.system_q.space)?;
    let mut rep = ResidualReport::new("scalar reduction");
    for k in 0..4 {
        rep.push(vec![k], &coeffs[k] - &b.scalar_ode_printed[k]);
    }
    r.push(rep, Expect::Pass, t);
    let t = Instant::now();
    r.push(substitution_oracle(&b.lax, &b.system_q.space, &b.scalar_ode_printed)?, Expect::Pass, t);

    let t = Instant::now();
    let lead = leading_relation(&coeffs, b.lambda)?;
    let mut rep = ResidualReport::new("leading relation equals q5 times the characteristic polynomial");
    rep.push(vec![], &lead - &(&Expr::var(b.q_vars[4]) * &cp));
    r.push(rep, Expect::Pass, t);

    let t = Instant::now();
    let mut fluxes = b.system_q.fluxes.clone();
    fluxes[1] = &fluxes[1] + &Expr::var(b.q_vars[0]);
    let perturbed = EvolutionSystem::new(b.system_q.space.clone(), fluxes.clone());
    let lax = LaxPair::oriented_associativity(&b.q_vars, b.lambda, &fluxes);
    r.push(
        renamed(zero_curvature(&lax, &perturbed)?, "zero curvature with the second flux shifted by q1"),
        Expect::Fail,
        t,
    );
    Ok(r)
}

/// Canonical text of a residual in the chart it was computed in.
pub fn residual_text(b: &OAssocBundle, chart: Chart, r: &Residual) -> String {
    let (ws, space) = match chart {
        Chart::Q => (&b.ws_q, &b.system_q.space),
        Chart::QofU => (&b.ws_u, &b.system_qu.space),
        Chart::U => (&b.ws_u, &b.system_u.space),
    };
    match r {
        Residual::Scalar(e) => ws.print(e),
        Residual::Jet(j) => space.print(ws, j),
    }
}
