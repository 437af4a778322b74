//! JSON run configuration. Every field is optional.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::model::SystemParams;
use crate::moments::{GilPelaezOptions, MomentKernel};
use crate::numerics::ToleranceBudget;
use crate::sim::{Estimator, LinkWeighting, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Proposed,
    Beta,
    Gilpelaez,
    Mc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Beta => "beta",
            Method::Gilpelaez => "gilpelaez",
            Method::Mc => "mc",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    bs_density: Option<f64>,
    path_loss: Option<f64>,
    power_control_mw: Option<f64>,
    power_control_w: Option<f64>,
    p_max_mw: Option<f64>,
    p_max_w: Option<f64>,
    noise_mw: Option<f64>,
    noise_w: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimFile {
    n_realizations: Option<usize>,
    window_radius_m: Option<f64>,
    guard_margin_m: Option<f64>,
    seed: Option<u64>,
    estimator: Option<Estimator>,
    weighting: Option<LinkWeighting>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GilPelaezFile {
    shift: Option<f64>,
    terms: Option<usize>,
    euler_order: Option<usize>,
    tolerance: Option<f64>,
    quadrature_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputFile {
    dir: Option<PathBuf>,
    csv: Option<String>,
    moments_csv: Option<String>,
    report: Option<String>,
    svg: Option<bool>,
    plot_gammas: Option<Vec<f64>>,
    dump_realizations: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    params: Option<ParamsFile>,
    theta_db: Option<Vec<f64>>,
    gamma: Option<Vec<f64>>,
    epsilon: Option<Vec<f64>>,
    methods: Option<Vec<Method>>,
    b: Option<Vec<f64>>,
    moment_kernel: Option<MomentKernel>,
    tolerances: Option<ToleranceBudget>,
    gil_pelaez: Option<GilPelaezFile>,
    sim: Option<SimFile>,
    validation: Option<BTreeMap<Method, f64>>,
    output: Option<OutputFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub csv: String,
    pub moments_csv: String,
    pub report: String,
    pub svg: bool,
    /// γ values at which θ-sweep plots are drawn.
    pub plot_gammas: Vec<f64>,
    pub dump_realizations: usize,
}

/// Fully resolved configuration of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Physical constants; `compensation` is overridden by each `epsilons` entry.
    pub params: SystemParams,
    pub theta_db: Vec<f64>,
    pub gammas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub methods: Vec<Method>,
    pub b_orders: Vec<f64>,
    pub moment_kernel: MomentKernel,
    pub tolerances: ToleranceBudget,
    #[serde(skip)]
    pub gil_pelaez: GilPelaezOptions,
    pub sim: SimConfig,
    /// Largest accepted deviation from the simulation, per method.
    pub validation: BTreeMap<Method, f64>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        resolve(ConfigFile::default()).expect("defaults are valid")
    }
}

fn bad(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: msg.into(),
    }
}

fn power(field: &str, mw: Option<f64>, w: Option<f64>, default_w: f64) -> Result<f64, CliError> {
    match (mw, w) {
        (Some(_), Some(_)) => Err(bad(&format!("params.{field}"), "give either the _mw or the _w field, not both")),
        (Some(v), None) => Ok(v * 1e-3),
        (None, Some(v)) => Ok(v),
        (None, None) => Ok(default_w),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            bad(if path == "." { "<root>" } else { &path }, e.inner().to_string())
        })?;
        resolve(file)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parameters at compensation factor `eps`.
    pub fn params_at(&self, eps: f64) -> SystemParams {
        self.params.with_compensation(eps)
    }

    pub fn thetas_linear(&self) -> Vec<f64> {
        self.theta_db.iter().map(|d| 10f64.powf(d / 10.0)).collect()
    }

    pub fn csv_path(&self) -> PathBuf {
        self.output.dir.join(&self.output.csv)
    }

    pub fn moments_csv_path(&self) -> PathBuf {
        self.output.dir.join(&self.output.moments_csv)
    }

    pub fn report_path(&self) -> PathBuf {
        self.output.dir.join(&self.output.report)
    }
}

fn resolve(file: ConfigFile) -> Result<RunConfig, CliError> {
    let pf = file.params.unwrap_or_default();
    let base = SystemParams::default();
    let params = SystemParams {
        bs_density: pf.bs_density.unwrap_or(base.bs_density),
        path_loss: pf.path_loss.unwrap_or(base.path_loss),
        compensation: base.compensation,
        power_control: power("power_control", pf.power_control_mw, pf.power_control_w, base.power_control)?,
        max_power: power("p_max", pf.p_max_mw, pf.p_max_w, base.max_power)?,
        noise: power("noise", pf.noise_mw, pf.noise_w, base.noise)?,
    };
    params.validate().map_err(|e| bad("params", e.to_string()))?;

    let theta_db = file.theta_db.unwrap_or_else(|| vec![-10.0, -5.0, 0.0, 5.0, 10.0]);
    if theta_db.is_empty() {
        return Err(bad("theta_db", "grid is empty"));
    }
    if let Some(t) = theta_db.iter().find(|t| !t.is_finite()) {
        return Err(bad("theta_db", format!("{t} is not a finite dB value")));
    }
    let gammas = file.gamma.unwrap_or_else(|| (1..10).map(|i| i as f64 / 10.0).collect());
    if gammas.is_empty() {
        return Err(bad("gamma", "grid is empty"));
    }
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && **g < 1.0)) {
        return Err(bad("gamma", format!("{g} is outside the open interval (0, 1)")));
    }
    let epsilons = file.epsilon.unwrap_or_else(|| vec![0.4, 0.8]);
    if epsilons.is_empty() {
        return Err(bad("epsilon", "list is empty"));
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(bad("epsilon", format!("{e} is outside (0, 1]")));
    }
    let mut methods = file
        .methods
        .unwrap_or_else(|| vec![Method::Proposed, Method::Beta, Method::Gilpelaez, Method::Mc]);
    if methods.is_empty() {
        return Err(bad("methods", "at least one method is required"));
    }
    methods.sort();
    methods.dedup();
    let b_orders = file.b.unwrap_or_else(|| vec![0.0, 1.0, 2.0]);
    if b_orders.is_empty() {
        return Err(bad("b", "list is empty"));
    }
    if let Some(b) = b_orders.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
        return Err(bad("b", format!("moment order {b} must be a finite nonnegative number")));
    }

    let tolerances = file.tolerances.unwrap_or_default();
    for (name, v) in [("inner", tolerances.inner), ("middle", tolerances.middle), ("outer", tolerances.outer)] {
        if !(v > 0.0) {
            return Err(bad(&format!("tolerances.{name}"), "must be positive"));
        }
    }
    let gf = file.gil_pelaez.unwrap_or_default();
    let gd = GilPelaezOptions::default();
    let gil_pelaez = GilPelaezOptions {
        shift: gf.shift.unwrap_or(gd.shift),
        terms: gf.terms.unwrap_or(gd.terms),
        euler_order: gf.euler_order.unwrap_or(gd.euler_order),
        tolerance: gf.tolerance.unwrap_or(gd.tolerance),
        quadrature_tol: gf.quadrature_tol.unwrap_or(gd.quadrature_tol),
    };
    if !(gil_pelaez.shift > 0.0) || gil_pelaez.terms == 0 {
        return Err(bad("gil_pelaez", "shift must be positive and terms nonzero"));
    }

    let sf = file.sim.unwrap_or_default();
    let sd = SimConfig::for_params(&params);
    let sim = SimConfig {
        n_realizations: sf.n_realizations.unwrap_or(sd.n_realizations),
        window_radius: sf.window_radius_m.unwrap_or(sd.window_radius),
        guard_margin: sf.guard_margin_m.unwrap_or(sd.guard_margin),
        seed: sf.seed.unwrap_or(sd.seed),
        estimator: sf.estimator.unwrap_or(sd.estimator),
        weighting: sf.weighting.unwrap_or(sd.weighting),
    };
    sim.validate(&params).map_err(|e| match e {
        crate::Error::InvalidParameter { field, reason } => bad(&format!("sim.{field}"), reason),
        other => bad("sim", other.to_string()),
    })?;

    let mut validation: BTreeMap<Method, f64> = [(Method::Proposed, 0.05), (Method::Beta, 0.05), (Method::Gilpelaez, 0.05)].into();
    for (m, t) in file.validation.unwrap_or_default() {
        if m == Method::Mc {
            return Err(bad("validation.mc", "the simulation is the reference, it has no tolerance"));
        }
        if !(t >= 0.0) {
            return Err(bad(&format!("validation.{}", m.name()), "tolerance must be nonnegative"));
        }
        validation.insert(m, t);
    }

    let of = file.output.unwrap_or_default();
    let plot_gammas = match of.plot_gammas {
        Some(v) => v,
        None => {
            let picked: Vec<f64> = gammas.iter().copied().filter(|g| (*g - 0.6).abs() < 1e-12 || (*g - 0.9).abs() < 1e-12).collect();
            if picked.is_empty() {
                vec![gammas[gammas.len() / 2]]
            } else {
                picked
            }
        }
    };
    if let Some(g) = plot_gammas.iter().find(|g| !gammas.contains(g)) {
        return Err(bad("output.plot_gammas", format!("{g} is not on the γ grid")));
    }
    let output = OutputConfig {
        dir: of.dir.unwrap_or_else(|| PathBuf::from("out")),
        csv: of.csv.unwrap_or_else(|| "results.csv".into()),
        moments_csv: of.moments_csv.unwrap_or_else(|| "moments.csv".into()),
        report: of.report.unwrap_or_else(|| "validation.json".into()),
        svg: of.svg.unwrap_or(true),
        plot_gammas,
        dump_realizations: of.dump_realizations.unwrap_or(0),
    };

    Ok(RunConfig {
        params,
        theta_db,
        gammas,
        epsilons,
        methods,
        b_orders,
        moment_kernel: file.moment_kernel.unwrap_or_default(),
        tolerances,
        gil_pelaez,
        sim,
        validation,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c.params, SystemParams::default());
        assert_eq!(c.methods.len(), 4);
        assert_eq!(c.gammas.len(), 9);
        assert_eq!(c.output.plot_gammas, vec![0.6, 0.9]);
    }

    #[test]
    fn unit_tagged_powers() {
        let a = RunConfig::from_json(r#"{"params": {"p_max_mw": 200, "power_control_mw": 0.008}}"#).unwrap();
        let b = RunConfig::from_json(r#"{"params": {"p_max_w": 0.2, "power_control_w": 8e-6}}"#).unwrap();
        assert!((a.params.max_power - b.params.max_power).abs() < 1e-15);
        assert!((a.params.power_control - b.params.power_control).abs() < 1e-18);
        let err = RunConfig::from_json(r#"{"params": {"p_max_mw": 200, "p_max_w": 0.2}}"#).unwrap_err();
        assert!(err.to_string().contains("params.p_max"));
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (r#"{"methods": []}"#, "methods"),
            (r#"{"gamma": [0.0, 0.5]}"#, "gamma"),
            (r#"{"gamma": [0.5, 1.0]}"#, "gamma"),
            (r#"{"theta_db": []}"#, "theta_db"),
            (r#"{"epsilon": [1.5]}"#, "epsilon"),
            (r#"{"methods": ["magic"]}"#, "methods"),
            (r#"{"params": {"path_loss": "four"}}"#, "params.path_loss"),
            (r#"{"sim": {"n_realizations": 0}}"#, "sim.n_realizations"),
            (r#"{"sim": {"window_radius_m": 100}}"#, "sim.window_radius"),
            (r#"{"unknown": 1}"#, "unknown"),
        ];
        for (json, field) in cases {
            match RunConfig::from_json(json) {
                Err(CliError::Config { field: f, .. }) => assert!(f.starts_with(field), "{json}: {f}"),
                other => panic!("{json}: {other:?}"),
            }
        }
    }

    #[test]
    fn estimator_forms() {
        let c = RunConfig::from_json(r#"{"sim": {"estimator": {"fading-draws": 100}, "weighting": "per-link"}}"#).unwrap();
        assert_eq!(c.sim.estimator, Estimator::FadingDraws(100));
        assert_eq!(c.sim.weighting, LinkWeighting::PerLink);
        let c = RunConfig::from_json(r#"{"sim": {"estimator": "analytic-conditional"}}"#).unwrap();
        assert_eq!(c.sim.estimator, Estimator::AnalyticConditional);
    }
}
