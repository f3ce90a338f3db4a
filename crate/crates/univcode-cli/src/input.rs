//! Channel, family, distribution and code ingestion.

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;

use univcode::channels::{bsc, build_channel_swap, build_example1, build_example2, s2mac, BCDPair, CQChannel, CompoundFamily, MACChannel};
use univcode::infomeasure::{Dist, MarkovTriple};
use univcode::qmat::{DensityMat, HermMat};
use univcode::types::PackedCode;

use crate::CliError;

/// Anything the commands can consume as a channel argument.
#[derive(Clone, Debug)]
pub enum Loaded {
    Cq(CQChannel),
    Mac(MACChannel),
    Bcd(BCDPair),
    Family(CompoundFamily),
}

impl Loaded {
    pub fn into_family(self) -> Result<CompoundFamily, CliError> {
        Ok(match self {
            Loaded::Family(f) => f,
            Loaded::Mac(m) => CompoundFamily::mac(vec![m])?,
            Loaded::Bcd(p) => CompoundFamily::bcd(vec![p])?,
            Loaded::Cq(_) => return Err(CliError::Input("a single-sender channel is not a MAC or BCD family".into())),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelJson {
    kind: String,
    #[serde(default)]
    a_size: Option<usize>,
    #[serde(default)]
    b_size: Option<usize>,
    out_dim: usize,
    states: Vec<Vec<Vec<[f64; 2]>>>,
}

fn builtin(name: &str) -> Result<Loaded, CliError> {
    let mut parts = name.splitn(2, ':');
    let base = parts.next().unwrap_or_default();
    let arg = parts.next();
    let param = |default: f64| -> Result<f64, CliError> {
        arg.map_or(Ok(default), |s| s.parse::<f64>().map_err(|e| CliError::Input(format!("builtin:{name}: {e}"))))
    };
    Ok(match base {
        "example1" => Loaded::Family(build_example1()),
        "example2" => Loaded::Family(build_example2()),
        "s2mac" => Loaded::Mac(s2mac()),
        "bsc" => Loaded::Cq(bsc(param(0.1)?)?),
        "swap" => Loaded::Family(build_channel_swap(&bsc(param(0.1)?)?)),
        "bsc-pair" => {
            let p = param(0.1)?;
            Loaded::Bcd(BCDPair::new(bsc(p)?, bsc((2.0 * p).min(0.5))?)?)
        }
        _ => return Err(CliError::Input(format!("unknown builtin '{name}'"))),
    })
}

fn read_json(path: &str) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

fn states_of(c: &ChannelJson) -> Result<Vec<DensityMat>, CliError> {
    c.states
        .iter()
        .enumerate()
        .map(|(i, rows)| {
            if rows.len() != c.out_dim {
                return Err(CliError::Input(format!("state {i}: expected {} rows, got {}", c.out_dim, rows.len())));
            }
            let m: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|z| Complex64::new(z[0], z[1])).collect()).collect();
            let h = HermMat::from_complex_rows(&m).map_err(|e| CliError::Input(format!("state {i}: {e}")))?;
            DensityMat::new(h).map_err(|e| CliError::Input(format!("state {i}: {e}")))
        })
        .collect()
}

fn channel_from_value(v: Value, origin: &str) -> Result<Loaded, CliError> {
    let kind = v.get("kind").and_then(Value::as_str).unwrap_or_default().to_string();
    match kind.as_str() {
        "bcd" => {
            let y = v.get("y").cloned().ok_or_else(|| CliError::Input(format!("{origin}: bcd needs \"y\"")))?;
            let z = v.get("z").cloned().ok_or_else(|| CliError::Input(format!("{origin}: bcd needs \"z\"")))?;
            match (channel_from_value(y, origin)?, channel_from_value(z, origin)?) {
                (Loaded::Cq(y), Loaded::Cq(z)) => Ok(Loaded::Bcd(BCDPair::new(y, z)?)),
                _ => Err(CliError::Input(format!("{origin}: bcd receivers must be cq channels"))),
            }
        }
        "family" => {
            let members = v
                .get("members")
                .and_then(Value::as_array)
                .cloned()
                .ok_or_else(|| CliError::Input(format!("{origin}: family needs a \"members\" array")))?;
            let loaded = members.into_iter().map(|m| channel_from_value(m, origin)).collect::<Result<Vec<_>, _>>()?;
            if loaded.iter().all(|l| matches!(l, Loaded::Mac(_))) {
                let ms = loaded.into_iter().map(|l| if let Loaded::Mac(m) = l { m } else { unreachable!() }).collect();
                Ok(Loaded::Family(CompoundFamily::mac(ms)?))
            } else if loaded.iter().all(|l| matches!(l, Loaded::Bcd(_))) {
                let ps = loaded.into_iter().map(|l| if let Loaded::Bcd(p) = l { p } else { unreachable!() }).collect();
                Ok(Loaded::Family(CompoundFamily::bcd(ps)?))
            } else {
                Err(CliError::Input(format!("{origin}: family members must all be mac or all be bcd")))
            }
        }
        "cq" | "mac" => {
            let c: ChannelJson = serde_json::from_value(v).map_err(|e| CliError::Input(format!("{origin}: {e}")))?;
            let states = states_of(&c)?;
            if c.kind == "cq" {
                if let Some(a) = c.a_size {
                    if a != states.len() {
                        return Err(CliError::Input(format!("{origin}: a_size {a} but {} states", states.len())));
                    }
                }
                Ok(Loaded::Cq(CQChannel::new(states)?))
            } else {
                let a = c.a_size.ok_or_else(|| CliError::Input(format!("{origin}: mac needs a_size")))?;
                let b = c.b_size.ok_or_else(|| CliError::Input(format!("{origin}: mac needs b_size")))?;
                Ok(Loaded::Mac(MACChannel::new(a, b, states)?))
            }
        }
        other => Err(CliError::Input(format!("{origin}: unknown channel kind '{other}'"))),
    }
}

/// `builtin:<name>[:param]` or a JSON file path.
pub fn load_channel(spec: &str) -> Result<Loaded, CliError> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return builtin(name);
    }
    channel_from_value(read_json(spec)?, spec)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistJson {
    p_t: Vec<f64>,
    p_a_t: Vec<Vec<f64>>,
    #[serde(default)]
    p_b_t: Option<Vec<Vec<f64>>>,
}

pub fn load_dist(path: &str) -> Result<MarkovTriple, CliError> {
    let d: DistJson = serde_json::from_value(read_json(path)?).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    let p_b_t = d.p_b_t.unwrap_or_else(|| vec![vec![1.0]; d.p_t.len()]);
    let rows = |v: Vec<Vec<f64>>| v.into_iter().map(Dist::new).collect::<univcode::Result<Vec<_>>>();
    Ok(MarkovTriple::new(Dist::new(d.p_t)?, rows(d.p_a_t)?, rows(p_b_t)?)?)
}

pub fn load_code(path: &str) -> Result<PackedCode, CliError> {
    serde_json::from_value(read_json(path)?).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

/// Comma-separated floats; the empty string is the empty list.
pub fn parse_floats(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| CliError::Input(format!("'{t}': {e}"))))
        .collect()
}

pub fn parse_pair(s: &str, what: &str) -> Result<[f64; 2], CliError> {
    match parse_floats(s)?.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(CliError::Input(format!("{what} needs two comma-separated numbers"))),
    }
}
