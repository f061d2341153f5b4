//! Flat `key = value` configuration with dotted keys.
//!
//! ```text
//! # Δ × g₀ map at J = 30κ
//! preset = resolved_sideband
//! params.J = 30
//! axis1.name = delta
//! axis1.start = -1
//! axis1.stop = 0.5
//! axis1.count = 151
//! axis2.name = g0
//! axis2.start = 0
//! axis2.stop = 0.6
//! axis2.count = 61
//! method = langevin
//! outputs = g2_aa, G1, G2
//! ```
//!
//! Recognized keys: `preset` (`resolved_sideband` | `low_frequency_mirror`),
//! `params.<name>` (or a bare parameter name), `axis{1,2}.{name,start,stop,count,scale}`,
//! `method`, `outputs`, `tau.{stop,count}`, `fock.{n_a,n_b,n_m}`, `workers`.
//! Later assignments override earlier ones, so command-line overrides are
//! simply appended.

use super::spec::{Axis, Method, Output, Scale, SweepSpec, TauGrid};
use crate::error::{Error, Result};
use crate::lindblad::FockConfig;
use crate::model::SystemParams;

/// Splits configuration text into (key, value) pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse_assignment(line).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("line {}: {msg}", lineno + 1)),
            other => other,
        })?);
    }
    Ok(out)
}

/// Parses one `key=value` assignment.
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected `key = value`, got `{s}`")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(Error::Config(format!("missing key in `{s}`")));
    }
    Ok((k.to_string(), v.to_string()))
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}` as a number")))
}

#[derive(Default)]
struct AxisDraft {
    name: Option<String>,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    scale: Scale,
}

impl AxisDraft {
    fn is_empty(&self) -> bool {
        self.name.is_none() && self.start.is_none() && self.stop.is_none() && self.count.is_none()
    }

    fn finish(self, label: &str) -> Result<Axis> {
        let missing = |field: &str| Error::Config(format!("`{label}.{field}` is missing"));
        Ok(Axis {
            name: self.name.ok_or_else(|| missing("name"))?,
            start: self.start.ok_or_else(|| missing("start"))?,
            stop: self.stop.ok_or_else(|| missing("stop"))?,
            count: self.count.ok_or_else(|| missing("count"))?,
            scale: self.scale,
        })
    }
}

/// Builds and validates a spec from ordered assignments.
pub fn spec_from_pairs(pairs: &[(String, String)]) -> Result<SweepSpec> {
    let mut base = SystemParams::default();
    if let Some((_, preset)) = pairs.iter().rev().find(|(k, _)| k == "preset") {
        base = match preset.as_str() {
            "resolved_sideband" | "default" => SystemParams::default(),
            "low_frequency_mirror" => SystemParams::low_frequency_mirror(),
            other => return Err(Error::Config(format!("unknown preset `{other}`"))),
        };
    }
    let mut axes = [AxisDraft::default(), AxisDraft::default()];
    let mut method = Method::Langevin;
    let mut outputs: Option<Vec<Output>> = None;
    let mut tau_stop: Option<f64> = None;
    let mut tau_count: Option<usize> = None;
    let mut fock = FockConfig::default();
    let mut workers = None;

    for (key, v) in pairs {
        let key = key.as_str();
        match key {
            "preset" => {}
            "method" => method = v.parse()?,
            "workers" => workers = Some(number(key, v)?),
            "outputs" => {
                outputs = Some(
                    v.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::parse)
                        .collect::<Result<_>>()?,
                )
            }
            "tau.stop" => tau_stop = Some(number(key, v)?),
            "tau.count" => tau_count = Some(number(key, v)?),
            "fock.n_a" => fock.n_a = number(key, v)?,
            "fock.n_b" => fock.n_b = number(key, v)?,
            "fock.n_m" => fock.n_m = number(key, v)?,
            _ => {
                if let Some((axis, field)) =
                    key.split_once('.').filter(|(a, _)| a.starts_with("axis"))
                {
                    let slot = match axis {
                        "axis1" => &mut axes[0],
                        "axis2" => &mut axes[1],
                        _ => return Err(Error::Config(format!("unknown key `{key}`"))),
                    };
                    match field {
                        "name" => slot.name = Some(v.clone()),
                        "start" => slot.start = Some(number(key, v)?),
                        "stop" => slot.stop = Some(number(key, v)?),
                        "count" => slot.count = Some(number(key, v)?),
                        "scale" => slot.scale = v.parse()?,
                        _ => return Err(Error::Config(format!("unknown key `{key}`"))),
                    }
                } else {
                    let name = key.strip_prefix("params.").unwrap_or(key);
                    base.set(name, number(key, v)?)
                        .map_err(|_| Error::Config(format!("unknown key `{key}`")))?;
                }
            }
        }
    }

    let [a1, a2] = axes;
    let mut axis_list = Vec::new();
    if !a1.is_empty() {
        axis_list.push(a1.finish("axis1")?);
    }
    if !a2.is_empty() {
        if axis_list.is_empty() {
            return Err(Error::Config("axis2 given without axis1".into()));
        }
        axis_list.push(a2.finish("axis2")?);
    }

    let mut spec = SweepSpec::new(base, axis_list, method);
    spec.fock = fock;
    spec.workers = workers;
    if let Some(o) = outputs {
        spec.outputs = o;
    }
    match (tau_stop, tau_count) {
        (Some(stop), Some(count)) => {
            spec.tau = Some(TauGrid { stop, count });
            if !spec.outputs.contains(&Output::G2Tau) {
                spec.outputs.push(Output::G2Tau);
            }
        }
        (None, None) => {}
        _ => {
            return Err(Error::Config(
                "tau grid needs both `tau.stop` and `tau.count`".into(),
            ))
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// Parses configuration text followed by overrides.
pub fn load_spec(text: &str, overrides: &[(String, String)]) -> Result<SweepSpec> {
    let mut pairs = parse_pairs(text)?;
    pairs.extend_from_slice(overrides);
    spec_from_pairs(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAP: &str = "
        # Δ × g₀ map
        preset = resolved_sideband
        params.J = 30
        axis1.name = delta   # inline comment
        axis1.start = -1
        axis1.stop = 0.5
        axis1.count = 16
        axis2.name = g0
        axis2.start = 0
        axis2.stop = 0.6
        axis2.count = 7
        outputs = g2_aa, G1, G2
        workers = 2
    ";

    #[test]
    fn parses_a_two_axis_map() {
        let spec = load_spec(MAP, &[]).unwrap();
        assert_eq!(spec.axes.len(), 2);
        assert_eq!(spec.axes[0].name, "delta");
        assert_eq!(spec.axes[1].count, 7);
        assert_eq!(spec.method, Method::Langevin);
        assert_eq!(spec.outputs, vec![Output::G2Aa, Output::G1, Output::G2]);
        assert_eq!(spec.workers, Some(2));
        assert_eq!(spec.point_count(), 112);
    }

    #[test]
    fn overrides_win() {
        let o = vec![
            parse_assignment("params.temperature=0.01").unwrap(),
            parse_assignment("axis1.count = 3").unwrap(),
            parse_assignment("g0=0.25").unwrap(),
        ];
        let spec = load_spec(MAP, &o).unwrap();
        assert_eq!(spec.base.temperature, 0.01);
        assert_eq!(spec.base.g0, 0.25);
        assert_eq!(spec.axes[0].count, 3);
    }

    #[test]
    fn preset_applies_before_params_regardless_of_order() {
        let spec = load_spec(
            "params.g0 = 0.63\npreset = low_frequency_mirror\nmethod = master",
            &[],
        )
        .unwrap();
        assert_eq!(spec.base.omega_m, 10.0);
        assert_eq!(spec.base.g0, 0.63);
        assert_eq!(spec.method, Method::Master);
        assert!(spec.axes.is_empty());
    }

    #[test]
    fn errors_carry_context() {
        let e = load_spec(
            "axis1.name = kappa\naxis1.start=0\naxis1.stop=1\naxis1.count=3",
            &[],
        )
        .unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        let e = parse_pairs("x = 1\nnot an assignment").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(load_spec("bogus.key = 1", &[]).is_err());
        assert!(load_spec("axis1.name = g0", &[])
            .unwrap_err()
            .to_string()
            .contains("axis1.start"));
        assert!(load_spec("tau.stop = 3", &[]).is_err());
        assert!(load_spec("delta = abc", &[]).is_err());
    }

    #[test]
    fn tau_grid_enables_g2_tau() {
        let spec = load_spec("tau.stop = 2\ntau.count = 5", &[]).unwrap();
        assert!(spec.outputs.contains(&Output::G2Tau));
        assert_eq!(spec.tau.unwrap().values(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }
}
