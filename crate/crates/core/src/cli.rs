//! Run configuration and the `moment`, `filter` and `bench` commands.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt::Write as _;
use std::time::Instant;

use crate::cases;
use crate::error::{Error, Result};
use crate::functions::{atom_mixture, kobol_mgf, nts_mgf, AnalyticFunction};
use crate::invz::{invert_batch, select_auto, select_params, InversionReport, Method, Plan, Tuning};
use crate::oracle::{binomial_series_h, trapezoid_oracle};
use crate::wienerhopf::{impulse_response_with, rational_psd, FilterOptions};

pub const SCHEMA_VERSION: u32 = 1;

/// A real parameter kept as its decimal text so configs round-trip exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Decimal {
    text: String,
    value: f64,
}

impl Decimal {
    pub fn parse(text: &str) -> Result<Self> {
        let value: f64 = text.trim().parse().map_err(|_| Error::Config(format!("`{text}` is not a decimal number")))?;
        if !value.is_finite() {
            return Err(Error::Config(format!("`{text}` is not finite")));
        }
        Ok(Decimal { text: text.trim().to_string(), value })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

impl From<f64> for Decimal {
    fn from(v: f64) -> Self {
        Decimal { text: format!("{v:?}"), value: v }
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Decimal::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    Kobol {
        c: Decimal,
        nu: Decimal,
        lambda: Decimal,
        #[serde(default = "zero")]
        mu: Decimal,
    },
    Nts {
        delta: Decimal,
        nu: Decimal,
        lambda: Decimal,
        #[serde(default = "zero")]
        mu: Decimal,
    },
    Mixture {
        w: Decimal,
        mu: Decimal,
        base: Box<Model>,
    },
    RationalPsd {
        a_plus: Decimal,
        a_minus: Decimal,
        m_plus: Decimal,
        m_minus: Decimal,
    },
}

fn zero() -> Decimal {
    Decimal::parse("0").unwrap()
}

impl Model {
    pub fn kobol(c: f64, nu: f64, lambda: f64, mu: f64) -> Self {
        Model::Kobol { c: c.into(), nu: nu.into(), lambda: lambda.into(), mu: mu.into() }
    }

    pub fn nts(delta: f64, nu: f64, lambda: f64, mu: f64) -> Self {
        Model::Nts { delta: delta.into(), nu: nu.into(), lambda: lambda.into(), mu: mu.into() }
    }

    pub fn mixture(w: f64, mu: f64, base: Model) -> Self {
        Model::Mixture { w: w.into(), mu: mu.into(), base: Box::new(base) }
    }

    pub fn rational(a_plus: f64, a_minus: f64, m_plus: f64, m_minus: f64) -> Self {
        Model::RationalPsd {
            a_plus: a_plus.into(),
            a_minus: a_minus.into(),
            m_plus: m_plus.into(),
            m_minus: m_minus.into(),
        }
    }

    /// Transform for moment computations.
    pub fn transform(&self) -> Result<AnalyticFunction> {
        match self {
            Model::Kobol { c, nu, lambda, mu } => kobol_mgf(c.value(), nu.value(), lambda.value(), mu.value()),
            Model::Nts { delta, nu, lambda, mu } => nts_mgf(delta.value(), nu.value(), lambda.value(), mu.value()),
            Model::Mixture { w, mu, base } => atom_mixture(w.value(), mu.value(), &base.transform()?),
            Model::RationalPsd { .. } => {
                Err(Error::Config("rational_psd is a filter model; use the filter task".into()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Moment,
    Filter,
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Trap,
    Sinh1,
    Sinh2,
    Sinh3,
    Log,
    Auto,
}

impl MethodChoice {
    pub fn fixed(self) -> Option<Method> {
        match self {
            MethodChoice::Trap => Some(Method::Trap),
            MethodChoice::Sinh1 => Some(Method::Sinh1),
            MethodChoice::Sinh2 => Some(Method::Sinh2),
            MethodChoice::Sinh3 => Some(Method::Sinh3),
            MethodChoice::Log => Some(Method::Log),
            MethodChoice::Auto => None,
        }
    }
}

/// Optional contour and grid parameters; unset fields are derived from the tolerance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_minus: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_plus: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_half: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_d: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduce: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_half: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_half_inner: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Decimal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_range: Option<[u32; 2]>,
    #[serde(default = "auto")]
    pub method: MethodChoice,
    #[serde(default = "default_eps")]
    pub eps: Decimal,
    #[serde(default)]
    pub overrides: Overrides,
    /// Compare against a brute-force reference.
    #[serde(default)]
    pub oracle: bool,
    /// Timing repetitions for `bench`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
}

fn auto() -> MethodChoice {
    MethodChoice::Auto
}

fn default_eps() -> Decimal {
    Decimal::parse("1e-15").unwrap()
}

impl RunConfig {
    pub fn new(task: Task) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            task,
            model: None,
            n: None,
            n_range: None,
            method: MethodChoice::Auto,
            eps: default_eps(),
            overrides: Overrides::default(),
            oracle: false,
            repetitions: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if c.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                c.schema_version
            )));
        }
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Inclusive n range from `n` or `n_range`.
    pub fn range(&self) -> Result<(u32, u32)> {
        match (self.n, self.n_range) {
            (Some(n), None) => Ok((n, n)),
            (None, Some([lo, hi])) if lo <= hi => Ok((lo, hi)),
            (None, Some([lo, hi])) => Err(Error::Config(format!("empty n_range [{lo}, {hi}]"))),
            (Some(_), Some(_)) => Err(Error::Config("give either n or n_range, not both".into())),
            (None, None) => Err(Error::Config("missing n or n_range".into())),
        }
    }

    pub fn tuning(&self) -> Result<Tuning> {
        let o = &self.overrides;
        let v = |d: &Option<Decimal>| d.as_ref().map(Decimal::value);
        let interval = match (v(&o.r_minus), v(&o.r_plus)) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(Error::Config("r_minus and r_plus must be given together".into())),
        };
        let d = Tuning::default();
        Ok(Tuning {
            eps: self.eps.value(),
            m_budget: v(&o.budget),
            m1: None,
            interval,
            omega: v(&o.omega),
            d_half: v(&o.d_half),
            k_d: v(&o.k_d).unwrap_or(d.k_d),
            reduce: v(&o.reduce).unwrap_or(d.reduce),
            zeta: v(&o.zeta),
            n_half: o.n_half,
            radius: v(&o.radius),
            trap_nodes: o.trap_nodes,
            p: v(&o.p).unwrap_or(d.p),
            phi: v(&o.phi).unwrap_or(d.phi),
        })
    }

    pub fn filter_options(&self) -> FilterOptions {
        let o = &self.overrides;
        let v = |d: &Option<Decimal>| d.as_ref().map(Decimal::value);
        FilterOptions {
            eps: self.eps.value(),
            k_d: v(&o.k_d).unwrap_or(0.9),
            r_plus: v(&o.r_plus),
            zeta: v(&o.zeta),
            zeta_inner: None,
            n_half: o.n_half,
            n_half_inner: o.n_half_inner,
            d_method: None,
            circle_nodes: None,
        }
    }

    fn model(&self) -> Result<&Model> {
        self.model.as_ref().ok_or_else(|| Error::Config("missing model".into()))
    }
}

/// One CSV row: `n,value,abs_err_est,rel_err_vs_oracle,nodes,method`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: u32,
    pub value: f64,
    pub abs_err_est: f64,
    pub rel_err_vs_oracle: Option<f64>,
    pub nodes: usize,
    pub method: String,
}

pub const CSV_HEADER: &str = "n,value,abs_err_est,rel_err_vs_oracle,nodes,method";

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl Row {
    pub fn csv(&self) -> String {
        let rel = self.rel_err_vs_oracle.map(fmt17).unwrap_or_default();
        format!("{},{},{},{},{},{}", self.n, fmt17(self.value), fmt17(self.abs_err_est), rel, self.nodes, self.method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
    pub summary: String,
    pub seconds: f64,
}

impl Report {
    pub fn csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    }
}

fn plan_for(u: &AnalyticFunction, method: MethodChoice, lo: u32, hi: u32, t: &Tuning) -> Result<Plan> {
    match method.fixed() {
        Some(m) => select_params(u, m, lo, hi, t),
        None => select_auto(u, lo, hi, t),
    }
}

/// Radius for brute-force references: the unit circle when it lies in the annulus.
pub fn oracle_radius(u: &AnalyticFunction) -> f64 {
    let d = &u.descriptor;
    if d.a_minus < 1.0 && 1.0 < d.a_plus {
        1.0
    } else {
        0.5 * (d.a_minus + d.a_plus.min(2.0 * d.a_minus + 1.0))
    }
}

pub fn cmd_moment(config: &RunConfig) -> Result<Report> {
    if config.task != Task::Moment {
        return Err(Error::Config("task is not `moment`".into()));
    }
    let u = config.model()?.transform()?;
    let (lo, hi) = config.range()?;
    let t = config.tuning()?;
    let start = Instant::now();
    let plan = plan_for(&u, config.method, lo, hi, &t)?;
    let ns: Vec<u32> = (lo..=hi).collect();
    let reps: Vec<InversionReport> = invert_batch(&u, &ns, &plan)?;
    let seconds = start.elapsed().as_secs_f64();
    let mut rows = Vec::with_capacity(ns.len());
    for (n, rep) in ns.iter().zip(&reps) {
        let rel = if config.oracle {
            let o = trapezoid_oracle(&u, *n, oracle_radius(&u), 1e-16 * rep.value.norm().max(1.0))?;
            Some(((rep.value.re - o.value) / o.value).abs())
        } else {
            None
        };
        rows.push(Row {
            n: *n,
            value: rep.value.re,
            abs_err_est: rep.est_discretization_error + rep.est_truncation_error,
            rel_err_vs_oracle: rel,
            nodes: rep.nodes_used,
            method: rep.method.to_string(),
        });
    }
    let summary =
        format!("model {}; method {}; nodes {}; time {:.3} ms", u.name, plan.method, plan.nodes(), seconds * 1e3);
    Ok(Report { rows, summary, seconds })
}

pub fn cmd_filter(config: &RunConfig) -> Result<Report> {
    if config.task != Task::Filter {
        return Err(Error::Config("task is not `filter`".into()));
    }
    let Model::RationalPsd { a_plus, a_minus, m_plus, m_minus } = config.model()? else {
        return Err(Error::Config("filter needs a rational_psd model".into()));
    };
    let (ap, am, mp, mm) = (a_plus.value(), a_minus.value(), m_plus.value(), m_minus.value());
    let (lo, hi) = config.range()?;
    if (lo as f64) <= mp + mm {
        return Err(Error::Config(format!("n range must start above m+ + m- = {}", mp + mm)));
    }
    let (psd, _) = rational_psd(ap, am, mp, mm)?;
    let start = Instant::now();
    let resp = impulse_response_with(&psd, lo, hi, &config.filter_options())?;
    let seconds = start.elapsed().as_secs_f64();
    let reference = if config.oracle { Some(binomial_series_h(ap, am, mp, mm, hi as usize)?) } else { None };
    let hmax = resp.h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = config.eps.value() + resp.max_imag / hmax.max(f64::MIN_POSITIVE);
    let nodes = 2 * resp.outer_nodes + 1 + 2 * resp.inner_nodes + 1;
    let mut max_rel = 0.0f64;
    let rows = resp
        .h
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let n = lo + i as u32;
            let rel = reference.as_ref().map(|r| ((v - r[n as usize]) / r[n as usize]).abs());
            if let Some(r) = rel {
                max_rel = max_rel.max(r);
            }
            Row { n, value: v, abs_err_est: floor * v.abs(), rel_err_vs_oracle: rel, nodes, method: "whf-sinh3".into() }
        })
        .collect();
    let mut summary = format!(
        "grids N={} N1={}; d={:.6e}; max |Im h|={:.2e}; time {:.3} ms",
        resp.outer_nodes,
        resp.inner_nodes,
        resp.factorization.d,
        resp.max_imag,
        seconds * 1e3
    );
    if reference.is_some() {
        let _ = write!(summary, "; max rel err vs series {max_rel:.3e}");
    }
    Ok(Report { rows, summary, seconds })
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub case: String,
    pub method: String,
    pub nodes: usize,
    pub max_error: f64,
    pub median_seconds: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs[xs.len() / 2]
}

/// Node counts, errors against high-precision references and median timings for every stored case.
pub fn cmd_bench(config: &RunConfig) -> Result<Vec<BenchRow>> {
    if config.task != Task::Bench {
        return Err(Error::Config("task is not `bench`".into()));
    }
    let reps = config.repetitions.unwrap_or(20).max(1);
    let mut out = Vec::new();
    for case in cases::moment_cases() {
        let u = case.model.transform()?;
        let mut times = Vec::with_capacity(reps);
        let mut rep = None;
        for _ in 0..reps {
            let t0 = Instant::now();
            let plan = select_params(&u, case.method, case.n, case.n, &case.tuning)?;
            let r = crate::invz::invert(&u, case.n, &plan)?;
            times.push(t0.elapsed().as_secs_f64());
            rep = Some(r);
        }
        let rep = rep.expect("at least one repetition");
        out.push(BenchRow {
            case: case.name.to_string(),
            method: case.method.to_string(),
            nodes: rep.nodes_used,
            max_error: (rep.value.re - case.reference).abs(),
            median_seconds: median(times),
        });
    }
    for case in cases::filter_cases() {
        let (psd, _) = rational_psd(case.a_plus, case.a_minus, case.m_plus, case.m_minus)?;
        let reference = binomial_series_h(case.a_plus, case.a_minus, case.m_plus, case.m_minus, case.n_hi as usize)?;
        let mut times = Vec::with_capacity(reps);
        let mut last = None;
        for _ in 0..reps.min(5) {
            let t0 = Instant::now();
            let r = impulse_response_with(&psd, case.n_lo, case.n_hi, &case.options())?;
            times.push(t0.elapsed().as_secs_f64());
            last = Some(r);
        }
        let r = last.expect("at least one repetition");
        let err =
            r.h.iter()
                .enumerate()
                .map(|(i, v)| {
                    let e = reference[case.n_lo as usize + i];
                    ((v - e) / e).abs()
                })
                .fold(0.0, f64::max);
        out.push(BenchRow {
            case: case.name.to_string(),
            method: "whf-sinh3".into(),
            nodes: 2 * r.outer_nodes + 2 * r.inner_nodes + 2,
            max_error: err,
            median_seconds: median(times),
        });
    }
    Ok(out)
}

pub fn render_bench(rows: &[BenchRow]) -> String {
    let mut s = format!("{:<26} {:<10} {:>7} {:>12} {:>12}\n", "case", "method", "nodes", "max_error", "median_us");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<26} {:<10} {:>7} {:>12.3e} {:>12.1}",
            r.case,
            r.method,
            r.nodes,
            r.max_error,
            r.median_seconds * 1e6
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let text = r#"{
            "schema_version": 1,
            "task": "moment",
            "model": {"type": "mixture", "w": "0.3", "mu": "2",
                      "base": {"type": "kobol", "c": "0.1", "nu": "0.5", "lambda": "1.0100000000000000000001"}},
            "n": 100,
            "method": "sinh2",
            "eps": "1e-15",
            "overrides": {"r_minus": "0.98", "r_plus": "1", "reduce": "0.75"}
        }"#;
        let c = RunConfig::from_json(text).unwrap();
        let again = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
        assert!(c.to_json().contains("1.0100000000000000000001"));
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(RunConfig::from_json(r#"{"schema_version": 2, "task": "moment"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"schema_version": 1, "task": "moment", "eps": 1e-15}"#).is_err());
        let bad = r#"{"schema_version": 1, "task": "moment", "model": {"type": "kobol", "c": "x", "nu": "0.5", "lambda": "1.01"}}"#;
        assert!(RunConfig::from_json(bad).is_err());
    }

    #[test]
    fn moment_command_reports_value() {
        let mut c = RunConfig::new(Task::Moment);
        c.model = Some(Model::kobol(0.1, 0.5, 1.01, 0.0));
        c.n = Some(100);
        c.method = MethodChoice::Sinh1;
        let r = cmd_moment(&c).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!((r.rows[0].value - 5.32400799771669e-05).abs() < 1e-15);
        assert!(r.csv().starts_with(CSV_HEADER));
    }

    #[test]
    fn method_gate_names_condition() {
        let mut c = RunConfig::new(Task::Moment);
        c.model = Some(Model::kobol(0.1, 1.5, 1.01, 0.0));
        c.n = Some(100);
        c.method = MethodChoice::Sinh1;
        let e = cmd_moment(&c).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let msg = e.to_string();
        assert!(msg.contains("Z-SINH1") && msg.contains("sinh3"), "{msg}");
    }

    #[test]
    fn filter_rejects_low_range() {
        let mut c = RunConfig::new(Task::Filter);
        c.model = Some(Model::rational(1.0001, 1.00015, 3.0, -1.0));
        c.n_range = Some([2, 10]);
        assert_eq!(cmd_filter(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
    }
}
