//! TOML description of a hydrodynamic-type system and an optional operator.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use hydroham_core::conditions::{
    check_commuting, check_coupling, check_local_third_order, check_nonlocal_third_order, check_q_conditions,
    derive_metric, CTensor, MetricOutcome, NonlocalTail, Residual, ResidualReport,
};
use hydroham_core::jet::{DirectFrame, EvolutionSystem, Frame, JetSpace};
use hydroham_core::oassoc::Expect;
use hydroham_core::tensor::{mat_mul, ChartMap, Matrix, Metric};
use hydroham_kernel::{parse, Expr, Var, Workspace};
use serde::Deserialize;
use thiserror::Error;

use crate::report::{CheckEntry, Report};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("{at}: {message}")]
    Invalid { at: String, message: String },
}

fn invalid(at: impl Into<String>, message: impl std::fmt::Display) -> InputError {
    InputError::Invalid {
        at: at.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub coordinates: Vec<String>,
    pub fluxes: BTreeMap<String, String>,
    pub chart: Option<ChartBlock>,
    pub operator: Option<OperatorBlock>,
}

/// Coordinates as functions of parameters; every other expression may then use both.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartBlock {
    pub parameters: Vec<String>,
    pub map: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorBlock {
    /// Covariant metric `g_ij`.
    pub metric: Vec<Vec<String>>,
    pub tail: Option<TailBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailBlock {
    /// Symmetric matrix `c^{ab}`.
    pub constants: Vec<Vec<String>>,
    /// Mixed components `w^i_{aj}`.
    pub flows: Option<Vec<Vec<Vec<String>>>>,
    /// Lowered components `w_{aij}`, each divided by `divisor`.
    pub lowered: Option<Vec<Vec<Vec<String>>>>,
    pub divisor: Option<String>,
}

/// A validated system file.
pub struct LoadedSystem {
    pub ws: Workspace,
    pub coords: Vec<Var>,
    pub chart: Option<ChartMap>,
    pub system: EvolutionSystem,
    pub metric: Option<Metric>,
    pub tail: Option<NonlocalTail>,
}

impl SystemFile {
    pub fn from_toml(text: &str) -> Result<SystemFile, InputError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(&self) -> Result<LoadedSystem, InputError> {
        let n = self.coordinates.len();
        if n == 0 {
            return Err(invalid("coordinates", "at least one coordinate is required"));
        }
        let mut names = self.coordinates.clone();
        if let Some(c) = &self.chart {
            names.extend(c.parameters.iter().cloned());
        }
        let ws = Workspace::with_symbols(&names).map_err(|e| invalid("coordinates", e))?;
        let coords: Vec<Var> = (0..n as u8).map(Var).collect();
        let raw = |at: &str, text: &str| parse(text, &ws).map_err(|e| invalid(at, e));

        let chart = match &self.chart {
            None => None,
            Some(c) => {
                if c.parameters.len() != n {
                    return Err(invalid("chart.parameters", "one parameter per coordinate"));
                }
                let params: Vec<Var> = (n as u8..2 * n as u8).map(Var).collect();
                let mut q_of_u = Vec::with_capacity(n);
                for name in &self.coordinates {
                    let at = format!("chart.map.{name}");
                    let text = c.map.get(name).ok_or_else(|| invalid(&at, "missing"))?;
                    let e = raw(&at, text)?;
                    if coords.iter().any(|&v| e.depends_on(v)) {
                        return Err(invalid(at, "must depend on parameters only"));
                    }
                    q_of_u.push(e);
                }
                if let Some(extra) = c.map.keys().find(|k| !self.coordinates.contains(k)) {
                    return Err(invalid(format!("chart.map.{extra}"), "not a coordinate"));
                }
                Some(ChartMap::new(params, q_of_u).map_err(|e| invalid("chart.map", e))?)
            }
        };
        let expr = |at: &str, text: &str| -> Result<Expr, InputError> {
            let e = raw(at, text)?;
            match &chart {
                Some(ch) => ch.pullback(&e, &coords).map_err(|err| invalid(at, err)),
                None => Ok(e),
            }
        };
        let matrix = |at: &str, rows: &[Vec<String>]| -> Result<Matrix, InputError> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(invalid(at, format!("expected a {n}x{n} matrix")));
            }
            rows.iter()
                .enumerate()
                .map(|(i, r)| {
                    r.iter()
                        .enumerate()
                        .map(|(j, t)| expr(&format!("{at}[{}][{}]", i + 1, j + 1), t))
                        .collect()
                })
                .collect()
        };

        let mut fluxes = Vec::with_capacity(n);
        for name in &self.coordinates {
            let at = format!("fluxes.{name}");
            let text = self.fluxes.get(name).ok_or_else(|| invalid(&at, "missing"))?;
            fluxes.push(expr(&at, text)?);
        }
        if let Some(extra) = self.fluxes.keys().find(|k| !self.coordinates.contains(k)) {
            return Err(invalid(format!("fluxes.{extra}"), "not a coordinate"));
        }
        let frame: Arc<dyn Frame> = match &chart {
            Some(ch) => Arc::new(ch.param_frame()),
            None => Arc::new(DirectFrame::new(coords.clone())),
        };
        let space = JetSpace::new(frame.clone(), self.coordinates.clone());
        let system = EvolutionSystem::new(space, fluxes);

        let (metric, tail) = match &self.operator {
            None => (None, None),
            Some(op) => {
                let g = matrix("operator.metric", &op.metric)?;
                let metric = Metric::new(g, frame.clone()).map_err(|e| invalid("operator.metric", e))?;
                let tail = match &op.tail {
                    None => None,
                    Some(t) => Some(load_tail(t, &metric, n, &expr, &matrix)?),
                };
                (Some(metric), tail)
            }
        };
        Ok(LoadedSystem {
            ws,
            coords,
            chart,
            system,
            metric,
            tail,
        })
    }
}

type ExprFn<'a> = dyn Fn(&str, &str) -> Result<Expr, InputError> + 'a;
type MatrixFn<'a> = dyn Fn(&str, &[Vec<String>]) -> Result<Matrix, InputError> + 'a;

fn load_tail(t: &TailBlock, metric: &Metric, n: usize, expr: &ExprFn, matrix: &MatrixFn) -> Result<NonlocalTail, InputError> {
    let w: Vec<Matrix> = match (&t.flows, &t.lowered) {
        (Some(f), None) => f
            .iter()
            .enumerate()
            .map(|(a, m)| matrix(&format!("operator.tail.flows[{}]", a + 1), m))
            .collect::<Result<_, _>>()?,
        (None, Some(l)) => {
            let div = match &t.divisor {
                Some(d) => expr("operator.tail.divisor", d)?,
                None => Expr::one(),
            };
            let inv = div.inv().map_err(|e| invalid("operator.tail.divisor", e))?;
            l.iter()
                .enumerate()
                .map(|(a, m)| {
                    let low = matrix(&format!("operator.tail.lowered[{}]", a + 1), m)?;
                    let raised = mat_mul(&metric.ginv, &low);
                    Ok(raised.iter().map(|r| r.iter().map(|e| e * &inv).collect()).collect())
                })
                .collect::<Result<_, InputError>>()?
        }
        _ => return Err(invalid("operator.tail", "give exactly one of `flows` or `lowered`")),
    };
    let m = w.len();
    if t.constants.len() != m || t.constants.iter().any(|r| r.len() != m) {
        return Err(invalid("operator.tail.constants", format!("expected a {m}x{m} matrix")));
    }
    let constants: Vec<Vec<Expr>> = t
        .constants
        .iter()
        .enumerate()
        .map(|(a, r)| {
            r.iter()
                .enumerate()
                .map(|(b, s)| {
                    let at = format!("operator.tail.constants[{}][{}]", a + 1, b + 1);
                    let e = expr(&at, s)?;
                    if !e.is_constant() {
                        return Err(invalid(at, "must be a number"));
                    }
                    Ok(e)
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    for a in 0..m {
        for b in 0..a {
            if constants[a][b] != constants[b][a] {
                return Err(invalid("operator.tail.constants", "must be symmetric"));
            }
        }
    }
    let _ = n;
    Ok(NonlocalTail::new(constants, w))
}

impl LoadedSystem {
    fn print(&self, r: &Residual) -> String {
        match r {
            Residual::Scalar(e) => self.ws.print(e),
            Residual::Jet(j) => self.system.space.print(&self.ws, j),
        }
    }

    /// Runs every checker that applies to the supplied blocks.
    pub fn run(&self, file: &str, timings: bool) -> Report {
        let mut notes = Vec::new();
        let mut reports: Vec<(ResidualReport, f64)> = Vec::new();
        let mut derived = None;
        let timed = |reports: &mut Vec<(ResidualReport, f64)>, t: Instant, rs: Vec<ResidualReport>| {
            let s = t.elapsed().as_secs_f64();
            reports.extend(rs.into_iter().map(|r| (r, s)));
        };
        match (&self.metric, &self.chart) {
            (None, None) => {
                let t = Instant::now();
                let frame = DirectFrame::new(self.coords.clone());
                let d = derive_metric(&frame, &self.system.fluxes, &self.system.space.field_names);
                notes.push(format!(
                    "metric ansatz: {} unknowns, {} scalar equations, rank {}",
                    d.unknowns.len(),
                    d.scalar_equations,
                    d.rank
                ));
                match &d.outcome {
                    MetricOutcome::Unique { g, scale_freedom } => {
                        notes.push(format!("unique metric after g11 = 2 ({scale_freedom} scale freedom)"));
                        derived = Some(g.iter().map(|r| r.iter().map(|e| self.ws.print(e)).collect()).collect());
                        timed(&mut reports, t, vec![d.back_substitution.clone()]);
                    }
                    MetricOutcome::Free { free } => notes.push(format!("metric underdetermined: {}", free.join(", "))),
                    MetricOutcome::Inconsistent => notes.push("metric ansatz inconsistent".into()),
                }
            }
            (None, Some(_)) => notes.push("no operator supplied; metric derivation needs a direct chart".into()),
            (Some(m), _) => {
                let c = CTensor::from_metric(m);
                let t = Instant::now();
                let [c22, c28, c23, c27] = check_local_third_order(m, &c);
                let empty = NonlocalTail::empty();
                let tail = self.tail.as_ref().unwrap_or(&empty);
                if self.tail.is_some() {
                    timed(&mut reports, t, vec![c22, c28, c23]);
                    let t = Instant::now();
                    timed(&mut reports, t, check_nonlocal_third_order(m, &c, tail).to_vec());
                    if let Some(ch) = &self.chart {
                        let t = Instant::now();
                        timed(&mut reports, t, check_q_conditions(m, &c, tail, &ch.params, &ch.jinv).to_vec());
                    }
                } else {
                    timed(&mut reports, t, vec![c22, c28, c23, c27]);
                }
                let t = Instant::now();
                timed(&mut reports, t, check_coupling(&self.system, m, &c, tail).to_vec());
                for (a, w) in tail.w.iter().enumerate() {
                    let t = Instant::now();
                    match check_commuting(&self.system, w) {
                        Ok(mut r) => {
                            r.name = format!("tail flow {} commutes with the system", a + 1);
                            timed(&mut reports, t, vec![r]);
                        }
                        Err(e) => notes.push(format!("tail flow {}: {e}", a + 1)),
                    }
                }
            }
        }
        let checks: Vec<CheckEntry> = reports
            .iter()
            .map(|(r, s)| CheckEntry::new(r, Expect::Pass, &|x| self.print(x), timings.then_some(*s)))
            .collect();
        Report {
            command: "check".into(),
            case: None,
            file: Some(file.into()),
            met: checks.iter().all(|c| c.met),
            notes,
            checks,
            derived_metric: derived,
        }
    }
}
