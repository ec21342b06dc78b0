use serde_json::{json, Value};

use gmla_core::checks::{run_check, CheckKind, CheckOptions};
use gmla_core::operators::{anti_wick_apply, q_norm, weyl_operator, QMethod, Quantization};
use gmla_core::report::Status;
use gmla_core::stft::{make_window, moyal_residual, stft, WindowKind};
use gmla_core::symbols::charset::{
    char_monotone, estimate_char_set, estimate_microsupport, uniform_directions, RayOptions, Thresholds,
};
use gmla_core::symbols::parametrix::{parametrix_truncated, ParametrixOptions};
use gmla_core::symbols::seminorm::seminorm_screen;
use gmla_core::wavefront::{
    build_cone_filter, filter_order_report, gabor_wf, InclusionOptions, WfOptions, DEFAULT_TOL,
};
use gmla_core::{Cone, Error, PhaseGrid, SampledSignal, ShubinSymbol, SignalExpr, SymbolExpr};

use crate::config::{parse_pair, Resolver};
use crate::{Command, Common, UsageError};

#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    Core(Error),
}

impl From<UsageError> for CmdError {
    fn from(e: UsageError) -> Self {
        CmdError::Usage(e.0)
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::UnknownPrimitive { .. } | Error::Arity { .. } | Error::Grid(_) | Error::Cone(_) => {
                CmdError::Usage(e.to_string())
            }
            other => CmdError::Core(other),
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub payload: Value,
    pub warnings: Vec<String>,
    pub side: Vec<(String, String)>,
}

impl Outcome {
    fn ok(payload: Value) -> Self {
        Outcome {
            status: Status::Ok,
            payload,
            warnings: Vec::new(),
            side: Vec::new(),
        }
    }

    fn verdict(pass: bool, payload: Value) -> Self {
        Outcome {
            status: if pass { Status::Pass } else { Status::Fail },
            ..Outcome::ok(payload)
        }
    }
}

pub fn command_label(cmd: &Command) -> String {
    match cmd {
        Command::Stft { .. } => "stft".into(),
        Command::Wf { .. } => "wf".into(),
        Command::Qnorm { .. } => "qnorm".into(),
        Command::Op { .. } => "op".into(),
        Command::Symcheck { .. } => "symcheck".into(),
        Command::Parametrix { .. } => "parametrix".into(),
        Command::FilterDemo { .. } => "filter-demo".into(),
        Command::Check { kind, .. } => format!("check {kind}"),
    }
}

/// Stem of the report file.
pub fn report_name(cmd: &Command) -> String {
    command_label(cmd).replace(' ', "-")
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CmdError> {
    serde_json::to_value(v).map_err(|e| CmdError::Core(e.into()))
}

fn grid(res: &mut Resolver) -> Result<PhaseGrid, CmdError> {
    let n = res.get("n", 256usize)?;
    let l = res.get("half_width", 16.0f64)?;
    let os = res.get("oversample", 1usize)?;
    Ok(PhaseGrid::new(1, l, n, os)?)
}

fn window(res: &mut Resolver) -> Result<WindowKind, CmdError> {
    let w = res.string("window", "gaussian");
    WindowKind::parse(&w).map_err(|e| CmdError::Usage(e.to_string()))
}

fn wf_options(res: &mut Resolver) -> Result<WfOptions, CmdError> {
    let d = WfOptions::default();
    Ok(WfOptions {
        directions: res.get("directions", d.directions)?,
        half_width_steps: res.get("cone_half_width", d.half_width_steps)?,
        fit_window: res.pair("fit_window")?,
        ..d
    })
}

fn signal(res: &mut Resolver, default: Option<&str>) -> Result<SignalExpr, CmdError> {
    let text = match default {
        Some(d) => res.string("signal", d),
        None => res.require("signal")?,
    };
    Ok(SignalExpr::parse(&text)?)
}

fn symbol(res: &mut Resolver, default: Option<&str>) -> Result<ShubinSymbol, CmdError> {
    let text = match default {
        Some(d) => res.string("symbol", d),
        None => res.require("symbol")?,
    };
    let order = res.opt::<f64>("order")?;
    Ok(ShubinSymbol::parse(&text, order)?)
}

fn quantization(res: &mut Resolver, default: &str) -> Result<Quantization, CmdError> {
    match res.string("quant", default).as_str() {
        "weyl" => Ok(Quantization::Weyl),
        "antiwick" => Ok(Quantization::AntiWick),
        other => Err(CmdError::Usage(format!("`quant` must be weyl or antiwick, got `{other}`"))),
    }
}

fn cone_deg(res: &mut Resolver, key: &str, default: &str) -> Result<Cone, CmdError> {
    let text = res.string(key, default);
    let (lo, hi) = parse_pair(&text).ok_or_else(|| CmdError::Usage(format!("`{key}` expects `lo,hi` in degrees")))?;
    Ok(Cone::from_degrees(lo, hi, 0.0)?)
}

fn register(cmd: &Command, common: &Common, res: &mut Resolver) {
    res.flag("n", &common.n);
    res.flag("half_width", &common.half_width);
    res.flag("oversample", &common.oversample);
    res.flag("window", &common.window);
    res.flag("directions", &common.directions);
    res.flag("cone_half_width", &common.cone_half_width);
    res.flag("fit_window", &common.fit_window);
    res.flag("tol", &common.tol);
    match cmd {
        Command::Stft { signal, plot } => {
            res.flag("signal", signal);
            res.flag("plot", plot);
        }
        Command::Wf { signal, mode, s, plot } => {
            res.flag("signal", signal);
            res.flag("mode", mode);
            res.flag("s", s);
            res.flag("plot", plot);
        }
        Command::Qnorm { signal, s, method } => {
            res.flag("signal", signal);
            res.flag("s", s);
            res.flag("method", method);
        }
        Command::Op { symbol, signal, quant, order } => {
            res.flag("symbol", symbol);
            res.flag("signal", signal);
            res.flag("quant", quant);
            res.flag("order", order);
        }
        Command::Symcheck { symbol, order, m_prime, k, n_max } => {
            res.flag("symbol", symbol);
            res.flag("order", order);
            res.flag("m_prime", m_prime);
            res.flag("k", k);
            res.flag("n_max", n_max);
        }
        Command::Parametrix { symbol, chi, order, m_prime, terms } => {
            res.flag("symbol", symbol);
            res.flag("chi", chi);
            res.flag("order", order);
            res.flag("m_prime", m_prime);
            res.flag("terms", terms);
        }
        Command::FilterDemo { signal, g1, g2, m, quant } => {
            res.flag("signal", signal);
            res.flag("g1", g1);
            res.flag("g2", g2);
            res.flag("m", m);
            res.flag("quant", quant);
        }
        Command::Check { signal, symbol, quant, .. } => {
            res.flag("signal", signal);
            res.flag("symbol", symbol);
            res.flag("quant", quant);
        }
    }
}

pub fn run(cmd: &Command, common: &Common, res: &mut Resolver) -> Result<Outcome, CmdError> {
    register(cmd, common, res);
    match cmd {
        Command::Stft { .. } => run_stft(res),
        Command::Wf { .. } => run_wf(res),
        Command::Qnorm { .. } => run_qnorm(res),
        Command::Op { .. } => run_op(res),
        Command::Symcheck { .. } => run_symcheck(res),
        Command::Parametrix { .. } => run_parametrix(res),
        Command::FilterDemo { .. } => run_filter(res),
        Command::Check { kind, .. } => run_check_cmd(kind, res),
    }
}

fn run_stft(res: &mut Resolver) -> Result<Outcome, CmdError> {
    let g = grid(res)?;
    let w = window(res)?;
    let u = signal(res, None)?;
    let plot = res.string("plot", "none");
    if !matches!(plot.as_str(), "none" | "heatmap") {
        return Err(CmdError::Usage(format!(
            "plot kind `{plot}` does not apply to a phase field (use heatmap)"
        )));
    }
    let s = SampledSignal::sample(&u, &g)?;
    let psi = make_window(w, &g)?;
    let v = stft(&s, &psi)?;
    let moyal = moyal_residual(&s, &psi)?;
    let (mut best, mut at) = (0.0f64, (0.0, 0.0));
    for j in 0..g.n {
        for k in 0..v.cols() {
            let a = v.get(j, k).norm();
            if a > best {
                best = a;
                at = (g.x(j), g.xi(k));
            }
        }
    }
    let mut o = Outcome::ok(json!({
        "signal": u.to_string(),
        "window": w.label(),
        "grid": to_value(&g)?,
        "norm": v.norm(),
        "max_abs": best,
        "argmax": [at.0, at.1],
        "moyal": { "inversion": moyal.inversion, "energy": moyal.energy },
    }));
    o.warnings = s.warnings.clone();
    o.side.push(("stft.csv".into(), v.to_csv()));
    if plot == "heatmap" {
        o.side.push(("stft_heatmap.csv".into(), v.heatmap_csv()));
    }
    Ok(o)
}

fn degrees(idx: &[usize], d: usize) -> Vec<f64> {
    idx.iter().map(|&j| 360.0 * j as f64 / d as f64).collect()
}

fn run_wf(res: &mut Resolver) -> Result<Outcome, CmdError> {
    let g = grid(res)?;
    let w = window(res)?;
    let opts = wf_options(res)?;
    let u = signal(res, None)?;
    let mode = res.string("mode", "gabor");
    let plot = res.string("plot", "none");
    if !matches!(plot.as_str(), "none" | "polar") {
        return Err(CmdError::Usage(format!(
            "plot kind `{plot}` does not apply to a wave front estimate (use polar)"
        )));
    }
    let est = gabor_wf(&u, w, &g, &opts)?;
    let d = est.directions;
    let (members, s) = match mode.as_str() {
        "gabor" => (est.gabor_set(), None),
        "sobolev" => {
            let s = res.get("s", 0.0f64)?;
            (est.sobolev_set(s), Some(s))
        }
        other => return Err(CmdError::Usage(format!("`mode` must be gabor or sobolev, got `{other}`"))),
    };
    let inconclusive = est.inconclusive();
    let mut o = Outcome::ok(json!({
        "mode": mode,
        "s": s,
        "in_directions_deg": degrees(&members, d),
        "inconclusive_deg": degrees(&inconclusive, d),
        "estimate": to_value(&est)?,
    }));
    if !inconclusive.is_empty() {
        o.warnings.push(format!("{} inconclusive directions", inconclusive.len()));
    }
    if plot == "polar" {
        o.side.push(("wf_polar.csv".into(), est.polar_csv()));
    }
    Ok(o)
}

fn run_qnorm(res: &mut Resolver) -> Result<Outcome, CmdError> {
    let g = grid(res)?;
    let w = window(res)?;
    let u = signal(res, None)?;
    let s = res.get("s", 0.0f64)?;
    let method = QMethod::parse(&res.string("method", "stft-weighted")).map_err(|e| CmdError::Usage(e.to_string()))?;
    let sampled = SampledSignal::sample(&u, &g)?;
    let psi = make_window(w, &g)?;
    let r = q_norm(&sampled, s, method, &psi)?;
    let mut o = Outcome::ok(to_value(&r)?);
    o.warnings = sampled.warnings.clone();
    Ok(o)
}

fn run_op(res: &mut Resolver) -> Result<Outcome, CmdError> {
    let g = grid(res)?;
    let a = symbol(res, None)?;
    let u = signal(res, None)?;
    let q = quantization(res, "weyl")?;
    let s = SampledSignal::sample(&u, &g)?;
    let (out, defect) = match q {
        Quantization::Weyl => {
            let op = weyl_operator(&a, &g);
            (op.apply(&s)?, Some(op.hermitian_defect()))
        }
        Quantization::AntiWick => {
            let psi0 = make_window(WindowKind::Gaussian, &g)?;
            (anti_wick_apply(&a.expr, &s, &psi0)?, None)
        }
    };
    let mut o = Outcome::ok(json!({
        "symbol": a.expr.to_string(),
        "order": a.order,
        "quantization": to_value(&q)?,
        "signal": u.to_string(),
        "input_norm": s.norm(),
        "output_norm": out.norm(),
        "hermitian_defect": defect,
    }));
    o.warnings = s.warnings.clone();
    o.side.push(("op_output.csv".into(), out.to_csv()));
    Ok(o)
}

fn run_symcheck(res: &mut Resolver) -> Result<Outcome, CmdError> {
    let g = grid(res)?;
    let a = symbol(res, None)?;
    let mp = res.get("m_prime", a.order)?;
    let k = res.get("k", 3u32)?;
    let n_max = res.get("n_max", 8.0f64)?;
    let d = res.get("directions", 360usize)?;
    let ray = RayOptions {
        k,
        ..RayOptions::for_grid(&g)
    };
    let screen = seminorm_screen(&a, a.order, ray.r_min, ray.r_max, k)?;
    let dirs = uniform_directions(d);
    let high = estimate_char_set(&a.expr, mp, &dirs, ray, Thresholds::default());
    let low = estimate_char_set(&a.expr, mp - 1.0, &dirs, ray, Thresholds::default());
    let monotone = char_monotone(&low, &high);
    let micro = estimate_microsupport(&a.expr, &dirs, ray, n_max, Thresholds::default());
    Ok(Outcome::verdict(
        screen.pass && monotone,
        json!({
            "symbol": a.expr.to_string(),
            "order": a.order,
            "m_prime": mp,
            "seminorms": to_value(&screen)?,
            "char_set": to_value(&high)?,
            "char_directions_deg": high.char_directions().iter().map(|t| t.to_degrees()).collect::<Vec<_>>(),
            "char_monotone": monotone,
            "microsupport": to_value(&micro)?,
        }),
    ))
}

fn run_parametrix(res: &mut Resolver) -> Result<Outcome, CmdError> {
    let a = symbol(res, Some("bracket(2)"))?;
    let chi_text = res.string("chi", "coneCutoff(-0.5, 0.5, 2, 0.2, 1)");
    let chi = SymbolExpr::parse(&chi_text)?;
    let mp = res.get("m_prime", a.order)?;
    let terms = res.get("terms", 1u32)?;
    let tol = res.get("tol", DEFAULT_TOL)?;
    let p = parametrix_truncated(&a, &chi, mp, terms, ParametrixOptions::default())?;
    let expected = 2.0 * terms as f64;
    let pass = p.report.decay.map(|d| d >= expected - tol).unwrap_or(true);
    Ok(Outcome::verdict(
        pass,
        json!({
            "symbol": a.expr.to_string(),
            "chi": chi.to_string(),
            "m_prime": mp,
            "expected_decay": expected,
            "b": p.b.to_string(),
            "report": to_value(&p.report)?,
        }),
    ))
}

fn run_filter(res: &mut Resolver) -> Result<Outcome, CmdError> {
    let g = grid(res)?;
    let opts = wf_options(res)?;
    let u = signal(res, Some("planewave(2) + planewave(-3)"))?;
    let g1 = cone_deg(res, "g1", "-150,150")?;
    let g2 = cone_deg(res, "g2", "30,330")?;
    let m = res.get("m", 2.0f64)?;
    let tol = res.get("tol", DEFAULT_TOL)?;
    let q = quantization(res, "antiwick")?;
    let f = build_cone_filter(&g1, &g2, m, 2.0, 1.0)?;
    let dirs = uniform_directions(opts.directions);
    let chars = estimate_char_set(&f.symbol.expr, -m, &dirs, RayOptions::for_grid(&g), Thresholds::default());
    let io = InclusionOptions {
        wf: opts,
        tol,
        quantization: q,
        grid: g,
    };
    let rep = filter_order_report(&u, &f, &g1, &g2, &io)?;
    let mut o = Outcome::verdict(
        rep.pass && chars.is_empty(),
        json!({
            "signal": u.to_string(),
            "chi1": f.chi1.to_string(),
            "chi2": f.chi2.to_string(),
            "m": m,
            "overlap_width_deg": f.overlap_width.to_degrees(),
            "char_set_empty": chars.is_empty(),
            "char_directions_deg": chars.char_directions().iter().map(|t| t.to_degrees()).collect::<Vec<_>>(),
            "report": to_value(&rep)?,
        }),
    );
    o.warnings = rep.notices.clone();
    Ok(o)
}

fn run_check_cmd(kind: &str, res: &mut Resolver) -> Result<Outcome, CmdError> {
    let k = CheckKind::parse(kind).map_err(|e| CmdError::Usage(e.to_string()))?;
    let g = grid(res)?;
    let w = window(res)?;
    let wf = wf_options(res)?;
    let tol = res.get("tol", DEFAULT_TOL)?;
    let u = signal(res, None)?;
    let a = match k {
        CheckKind::Weylwick | CheckKind::Microlocal | CheckKind::Microelliptic => Some(symbol(res, Some("bracket(2)"))?),
        _ => None,
    };
    let q = quantization(res, "weyl")?;
    let opts = CheckOptions {
        grid: g,
        window: w,
        wf,
        tol,
        quantization: q,
        resolution_steps: 1,
    };
    let r = run_check(k, &u, a.as_ref(), &opts)?;
    let mut o = Outcome::verdict(r.pass, to_value(&r)?);
    o.warnings = r.notes.clone();
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_error_classes() {
        let c = Command::Check {
            kind: "window-invariance".into(),
            signal: None,
            symbol: None,
            quant: None,
        };
        assert_eq!(command_label(&c), "check window-invariance");
        assert_eq!(report_name(&c), "check-window-invariance");
        let parse = SignalExpr::parse("gauss(1,").unwrap_err();
        assert!(matches!(CmdError::from(parse), CmdError::Usage(_)));
        let runtime = Error::Eval("x".into());
        assert!(matches!(CmdError::from(runtime), CmdError::Core(_)));
    }

    #[test]
    fn resolver_drives_grid_and_cones() {
        let mut r = Resolver::new(Default::default());
        r.flag("n", &Some(64usize));
        let g = grid(&mut r).unwrap();
        assert_eq!((g.n, g.half_width), (64, 16.0));
        let c = cone_deg(&mut r, "g1", "-150,150").unwrap();
        assert!((c.width().to_degrees() - 300.0).abs() < 1e-9);
        r.flag("quant", &Some("toeplitz"));
        assert!(matches!(quantization(&mut r, "weyl"), Err(CmdError::Usage(_))));
    }
}
