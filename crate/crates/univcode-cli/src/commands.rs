use univcode::channels::{build_example1, CompoundFamily};
use univcode::exponents::{exp_bcd_y, exp_bcd_z, exp_mac_joint, exp_mac_joint_general, exp_mac_separate, exp_superposition_alt, ExponentReport, RateSpec};
use univcode::infomeasure::{bcd_ensemble, holevo_mi, mac_cond_mi, mac_renyi_cmi, renyi_mi_sibson, BcdTerm, Dist, MacTerm, MarkovTriple, Unit};
use univcode::regions::{
    example1_curves, example2_curves, example2_input_scan, f1_slope_scan, r_quantities, region_bcd, region_bcd_sum_variant, region_compound_bcd,
    region_compound_mac, region_corner_union, region_mac, Region2D,
};
use univcode::schur::{
    bcd_error_probabilities, build_bcd_decoders, build_mac_decoders, build_single_decoder, error_probability, gentle_bound,
    mac_error_probabilities, DecoderSlacks, MacMode,
};
use univcode::types::{pack_mac, pack_mac_sized, pack_single, pack_single_sized, pack_superposition, pack_superposition_sized, CondType, PackedCode, Setting, TypeVec};

use crate::input::{load_channel, load_code, load_dist, parse_floats, parse_pair, Loaded};
use crate::output::{num, svg_plot, Artifact, Csv, Series};
use crate::{CliError, Common};

fn col(name: &str, unit: Unit) -> String {
    format!("{name}[{}]", unit.name())
}

// ---------------------------------------------------------------------------
// info

fn default_triple(a: usize, b: usize) -> MarkovTriple {
    MarkovTriple::product(Dist::uniform(a), Dist::uniform(b))
}

pub fn info(common: &Common, channel: &str, dist: Option<&str>, alphas: &str) -> Result<Vec<Artifact>, CliError> {
    let unit = common.unit;
    let alphas = parse_floats(alphas)?;
    let mut csv = Csv::new(&["measure", "alpha", "value", "unit"]);
    let mut push = |name: &str, alpha: f64, nats: f64| {
        csv.row(&[name.into(), num(alpha), num(unit.from_nats(nats)), unit.name().into()]);
    };
    match load_channel(channel)? {
        Loaded::Cq(w) => {
            let p = match dist {
                Some(path) => load_dist(path)?.marginal_a(),
                None => Dist::uniform(w.input_size()),
            };
            push("holevo_mi", 1.0, holevo_mi(&p, &w)?.value);
            for &a in &alphas {
                let v = if a == 1.0 { holevo_mi(&p, &w)? } else { renyi_mi_sibson(&p, &w, a)? };
                push("sibson_mi", a, v.value);
            }
        }
        Loaded::Mac(m) => {
            let triple = match dist {
                Some(path) => load_dist(path)?,
                None => default_triple(m.a_size(), m.b_size()),
            };
            let terms = [
                ("i_a_given_t", MacTerm::AGivenT),
                ("i_b_given_t", MacTerm::BGivenT),
                ("i_a_given_bt", MacTerm::AGivenBT),
                ("i_b_given_at", MacTerm::BGivenAT),
                ("i_ab_given_t", MacTerm::ABGivenT),
            ];
            for (name, term) in terms {
                push(name, 1.0, mac_cond_mi(&triple, &m, term)?.value);
                for &a in &alphas {
                    let v = if a == 1.0 { mac_cond_mi(&triple, &m, term)? } else { mac_renyi_cmi(&triple, &m, term, a)? };
                    push(&format!("renyi_{name}"), a, v.value);
                }
            }
        }
        Loaded::Bcd(pair) => {
            let triple = match dist {
                Some(path) => load_dist(path)?,
                None => MarkovTriple::bcd(Dist::point(1, 0), vec![Dist::uniform(pair.input_size())])?,
            };
            let rows = [
                ("i_u_y", &pair.w_y, BcdTerm::U),
                ("i_u_z", &pair.w_z, BcdTerm::U),
                ("i_x_y_given_u", &pair.w_y, BcdTerm::XGivenU),
                ("i_x_y", &pair.w_y, BcdTerm::X),
            ];
            for (name, w, term) in rows {
                let ens = bcd_ensemble(&triple, w, term)?;
                push(name, 1.0, ens.holevo());
                for &a in &alphas {
                    push(&format!("renyi_{name}"), a, ens.renyi(a));
                }
            }
        }
        Loaded::Family(_) => return Err(CliError::Input("info takes a single channel, not a family".into())),
    }
    Ok(vec![csv.finish("info.csv")])
}

// ---------------------------------------------------------------------------
// region

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum RegionSetting {
    Mac,
    CompoundMac,
    CornerUnion,
    Bcd,
    CompoundBcd,
    BcdSum,
    RQuantities,
}

fn region_artifacts(region: &Region2D, unit: Unit, title: &str) -> Vec<Artifact> {
    let r = region.in_unit(unit);
    let mut csv = Csv::new(&["vertex", &col("r_a", unit), &col("r_b", unit)]);
    for (i, v) in r.vertices.iter().enumerate() {
        csv.row(&[i.to_string(), num(v[0]), num(v[1])]);
    }
    let svg = svg_plot(
        title,
        &col("R_A", unit),
        &col("R_B", unit),
        &[Series { label: title.into(), color: "red", points: r.vertices.clone(), closed: true }],
    );
    vec![csv.finish("region.csv"), Artifact { name: "region.svg".into(), contents: svg }]
}

pub fn region(common: &Common, family: &str, setting: RegionSetting) -> Result<Vec<Artifact>, CliError> {
    let grid = common.grid()?;
    let loaded = load_channel(family)?;
    let unit = common.unit;
    let title = format!("{setting:?} region");
    let reg = match setting {
        RegionSetting::Mac => match loaded {
            Loaded::Mac(m) => region_mac(&m, &grid)?,
            other => region_compound_mac(&single_member_mac(other)?, &grid)?,
        },
        RegionSetting::CompoundMac => region_compound_mac(&loaded.into_family()?, &grid)?,
        RegionSetting::CornerUnion => region_corner_union(&loaded.into_family()?, &grid)?,
        RegionSetting::Bcd => match loaded {
            Loaded::Bcd(p) => region_bcd(&p, &grid)?,
            _ => return Err(CliError::Input("bcd setting needs a bcd channel".into())),
        },
        RegionSetting::CompoundBcd => region_compound_bcd(&loaded.into_family()?, &grid)?,
        RegionSetting::BcdSum => match loaded {
            Loaded::Bcd(p) => region_bcd_sum_variant(&p, &grid)?,
            _ => return Err(CliError::Input("bcd-sum setting needs a bcd channel".into())),
        },
        RegionSetting::RQuantities => {
            let q = r_quantities(&loaded.into_family()?, &grid)?;
            let mut csv = Csv::new(&["quantity", "value", "unit"]);
            for (name, m) in [("r1", q.r1), ("r2", q.r2), ("r3", q.r3)] {
                csv.row(&[name.into(), num(m.to(unit).value), unit.name().into()]);
            }
            return Ok(vec![csv.finish("r_quantities.csv")]);
        }
    };
    Ok(region_artifacts(&reg, unit, &title))
}

fn single_member_mac(loaded: Loaded) -> Result<CompoundFamily, CliError> {
    let fam = loaded.into_family()?;
    if fam.len() != 1 {
        return Err(CliError::Input("mac setting needs a single channel; use compound-mac for families".into()));
    }
    Ok(fam)
}

// ---------------------------------------------------------------------------
// exponent

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ExponentVariant {
    BcdY,
    BcdZ,
    SuperpositionAlt,
    MacJoint,
    MacSeparate,
    MacJointGeneral,
}

pub fn exponent(common: &Common, channel: &str, dist: Option<&str>, rates: &str, slacks: &str, variant: ExponentVariant) -> Result<Vec<Artifact>, CliError> {
    let unit = common.unit;
    let [ra, rb] = parse_pair(rates, "--rates")?;
    let [sa, sb] = parse_pair(slacks, "--slacks")?;
    let spec = RateSpec::new(unit.to_nats(ra), unit.to_nats(rb), unit.to_nats(sa), unit.to_nats(sb))?;
    let loaded = load_channel(channel)?;
    let mut reports: Vec<(&str, ExponentReport)> = Vec::new();
    match (variant, loaded) {
        (ExponentVariant::BcdY | ExponentVariant::BcdZ | ExponentVariant::SuperpositionAlt, Loaded::Bcd(pair)) => {
            let triple = match dist {
                Some(p) => load_dist(p)?,
                None => MarkovTriple::bcd(Dist::point(1, 0), vec![Dist::uniform(pair.input_size())])?,
            };
            let rep = match variant {
                ExponentVariant::BcdY => exp_bcd_y(&pair, &triple, &spec)?,
                ExponentVariant::BcdZ => exp_bcd_z(&pair, &triple, &spec)?,
                _ => exp_superposition_alt(&pair, &triple, &spec)?,
            };
            reports.push(("receiver", rep));
        }
        (ExponentVariant::MacJoint | ExponentVariant::MacSeparate | ExponentVariant::MacJointGeneral, Loaded::Mac(mac)) => {
            let triple = match dist {
                Some(p) => load_dist(p)?,
                None => default_triple(mac.a_size(), mac.b_size()),
            };
            match variant {
                ExponentVariant::MacJoint => reports.push(("joint", exp_mac_joint(&mac, &triple, &spec)?)),
                ExponentVariant::MacSeparate => {
                    let (a, b) = exp_mac_separate(&mac, &triple, &spec)?;
                    reports.push(("a", a));
                    reports.push(("b", b));
                }
                _ => reports.push(("joint_general", exp_mac_joint_general(&mac, &triple, &spec)?)),
            }
        }
        _ => return Err(CliError::Input("channel kind does not match the exponent variant".into())),
    }
    let mut csv = Csv::new(&["decoder", "term", &col("value", unit), "s"]);
    for (name, rep) in reports {
        for t in &rep.term_breakdown {
            csv.row(&[name.into(), t.name.clone(), num(unit.from_nats(t.value)), t.s.map_or(String::new(), num)]);
        }
        csv.row(&[name.into(), "exponent".into(), num(unit.from_nats(rep.value)), num(rep.maximizing_s)]);
    }
    Ok(vec![csv.finish("exponent.csv")])
}

// ---------------------------------------------------------------------------
// pack

#[derive(serde::Deserialize)]
#[serde(tag = "setting", rename_all = "lowercase", deny_unknown_fields)]
enum PackConfig {
    Single {
        #[serde(rename = "type")]
        ty: Vec<usize>,
        rate: f64,
        #[serde(default)]
        slack: Option<f64>,
        #[serde(default)]
        size: Option<usize>,
    },
    Superposition {
        u_type: Vec<usize>,
        x_given_u: Vec<Vec<usize>>,
        rates: [f64; 2],
        #[serde(default)]
        slack: Option<f64>,
        #[serde(default)]
        sizes: Option<[usize; 2]>,
    },
    Mac {
        t_type: Vec<usize>,
        a_given_t: Vec<Vec<usize>>,
        b_given_t: Vec<Vec<usize>>,
        rates: [f64; 2],
        #[serde(default)]
        slack: Option<f64>,
        #[serde(default)]
        sizes: Option<[usize; 2]>,
    },
}

fn cond_type(base: &[usize], rows: &[Vec<usize>]) -> Result<CondType, CliError> {
    let rows = rows.iter().map(|r| TypeVec::new(r.clone())).collect::<univcode::Result<Vec<_>>>()?;
    Ok(CondType::new(TypeVec::new(base.to_vec())?, rows)?)
}

pub fn pack(common: &Common, config: &str) -> Result<Vec<Artifact>, CliError> {
    let text = std::fs::read_to_string(config).map_err(|e| CliError::Input(format!("{config}: {e}")))?;
    let cfg: PackConfig = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{config}: {e}")))?;
    let u = common.unit;
    let seed = common.seed;
    let code = match cfg {
        PackConfig::Single { ty, rate, slack, size } => {
            let tv = TypeVec::new(ty)?;
            let n = tv.n;
            match size {
                Some(m) => pack_single_sized(n, &tv, m, u.to_nats(rate), seed)?,
                None => pack_single(n, &tv, u.to_nats(rate), slack.unwrap_or(1.0), seed)?,
            }
        }
        PackConfig::Superposition { u_type, x_given_u, rates, slack, sizes } => {
            let joint = cond_type(&u_type, &x_given_u)?;
            let n = joint.base.n;
            let (ru, rx) = (u.to_nats(rates[0]), u.to_nats(rates[1]));
            match sizes {
                Some(s) => pack_superposition_sized(n, &joint, s, ru, rx, seed)?,
                None => pack_superposition(n, &joint, ru, rx, slack.unwrap_or(1.0), seed)?,
            }
        }
        PackConfig::Mac { t_type, a_given_t, b_given_t, rates, slack, sizes } => {
            let at = cond_type(&t_type, &a_given_t)?;
            let bt = cond_type(&t_type, &b_given_t)?;
            let t = at.base.sorted_sequence();
            let (ra, rb) = (u.to_nats(rates[0]), u.to_nats(rates[1]));
            match sizes {
                Some(s) => pack_mac_sized(&t, &at, &bt, s, ra, rb, seed)?,
                None => pack_mac(&t, &at, &bt, ra, rb, slack.unwrap_or(1.0), seed)?,
            }
        }
    };
    let json = serde_json::to_string_pretty(&code).map_err(|e| CliError::Input(e.to_string()))? + "\n";
    Ok(vec![Artifact { name: "code.json".into(), contents: json }])
}

// ---------------------------------------------------------------------------
// decode

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum DecodeMode {
    Joint,
    Separate,
    Alt,
}

pub fn decode(channel: &str, code: &str, mode: DecodeMode, slacks: &str) -> Result<Vec<Artifact>, CliError> {
    let code: PackedCode = load_code(code)?;
    let [r_a, r_b] = parse_pair(slacks, "--slacks")?;
    let slacks = DecoderSlacks { r_a, r_b };
    let mut csv = Csv::new(&["receiver", "error_probability"]);
    match (code.setting, load_channel(channel)?) {
        (Setting::Single, Loaded::Cq(w)) => {
            let povm = build_single_decoder(&w, &code, slacks)?;
            let sent = code.codewords.iter().map(|x| w.product_state(x)).collect::<univcode::Result<Vec<_>>>()?;
            csv.row(&["y".into(), num(error_probability(&sent, &povm)?)]);
        }
        (Setting::Superposition, Loaded::Bcd(pair)) => {
            let (py, pz) = build_bcd_decoders(&pair, &code, slacks)?;
            let (ey, ez) = bcd_error_probabilities(&pair, &code, &py, &pz)?;
            csv.row(&["y".into(), num(ey)]);
            csv.row(&["z".into(), num(ez)]);
        }
        (Setting::Mac, Loaded::Mac(mac)) => {
            let m = match mode {
                DecodeMode::Joint => MacMode::Joint,
                DecodeMode::Separate => MacMode::Separate,
                DecodeMode::Alt => MacMode::Alt,
            };
            let dec = build_mac_decoders(&mac, &code, slacks, m)?;
            let e = mac_error_probabilities(&mac, &code, &dec)?;
            if let (Some(a), Some(b)) = (e.eps_a, e.eps_b) {
                csv.row(&["a".into(), num(a)]);
                csv.row(&["b".into(), num(b)]);
                csv.row(&["joint".into(), num(e.eps)]);
                csv.row(&["gentle_bound".into(), num(gentle_bound(a, b))]);
            } else {
                csv.row(&["joint".into(), num(e.eps)]);
            }
        }
        _ => return Err(CliError::Input("code setting does not match the channel kind".into())),
    }
    Ok(vec![csv.finish("decode.csv")])
}

// ---------------------------------------------------------------------------
// paperfig

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    #[value(name = "FF2")]
    Ff2,
    #[value(name = "FF3")]
    Ff3,
    #[value(name = "FF4")]
    Ff4,
    #[value(name = "PO1")]
    Po1,
    #[value(name = "Fregion")]
    Fregion,
}

pub fn paperfig(common: &Common, figure: Figure, resolution: Option<usize>) -> Result<Vec<Artifact>, CliError> {
    let unit = common.unit;
    let conv = |bits: f64| unit.from_nats(Unit::Bits.to_nats(bits));
    let (name, csv, svg) = match figure {
        Figure::Ff2 => {
            let rows = example1_curves(resolution.unwrap_or(60));
            let mut csv = Csv::new(&[&col("rate", unit), &col("hi1", unit), &col("hi2", unit)]);
            for r in &rows {
                csv.row(&[num(conv(r.rate)), num(conv(r.hi1)), num(conv(r.hi2))]);
            }
            let s = |f: fn(&univcode::regions::Example1Row) -> f64| rows.iter().map(|r| [conv(r.rate), conv(f(r))]).collect();
            let svg = svg_plot(
                "Example 1 trade-off curves",
                &col("R_B", unit),
                &col("R_A", unit),
                &[
                    Series { label: "Hi1".into(), color: "blue", points: s(|r| r.hi1), closed: false },
                    Series { label: "Hi2".into(), color: "red", points: s(|r| r.hi2), closed: false },
                ],
            );
            ("FF2", csv, svg)
        }
        Figure::Ff3 => {
            let rows = f1_slope_scan(resolution.unwrap_or(50));
            let mut csv = Csv::new(&[&col("rate", unit), "slope"]);
            for r in &rows {
                csv.row(&[num(conv(r.rate)), num(r.slope)]);
            }
            let pts: Vec<[f64; 2]> = rows.iter().map(|r| [conv(r.rate), r.slope]).collect();
            let svg = svg_plot(
                "(f1(R) - f1(0)) / R",
                &col("R", unit),
                "slope",
                &[Series { label: "slope".into(), color: "blue", points: pts, closed: false }],
            );
            ("FF3", csv, svg)
        }
        Figure::Ff4 => {
            let rows = example2_curves(resolution.unwrap_or(60));
            let mut csv = Csv::new(&[&col("rate", unit), &col("exact", unit), &col("lower_bound", unit)]);
            for r in &rows {
                csv.row(&[num(conv(r.rate)), num(conv(r.exact)), num(conv(r.lower_bound))]);
            }
            let s = |f: fn(&univcode::regions::Example2Row) -> f64| rows.iter().map(|r| [conv(r.rate), conv(f(r))]).collect();
            let svg = svg_plot(
                "Example 2 curves",
                &col("R", unit),
                &col("value", unit),
                &[
                    Series { label: "exact".into(), color: "red", points: s(|r| r.exact), closed: false },
                    Series { label: "lower bound".into(), color: "blue", points: s(|r| r.lower_bound), closed: false },
                ],
            );
            ("FF4", csv, svg)
        }
        Figure::Po1 => {
            let rows = example2_input_scan(resolution.unwrap_or(200));
            let mut csv = Csv::new(&["p", "best_q", &col("value", unit)]);
            for r in &rows {
                csv.row(&[num(r.p), num(r.best_q), num(conv(r.value))]);
            }
            let pts = rows.iter().map(|r| [r.p, conv(r.value)]).collect();
            let svg = svg_plot("max over q", "p", &col("value", unit), &[Series { label: "max_q".into(), color: "blue", points: pts, closed: false }]);
            ("PO1", csv, svg)
        }
        Figure::Fregion => {
            let grid = common.grid()?;
            let fam = build_example1();
            let outer = region_compound_mac(&fam, &grid)?.in_unit(unit);
            let inner = region_corner_union(&fam, &grid)?.in_unit(unit);
            let mut csv = Csv::new(&["region", "vertex", &col("r_a", unit), &col("r_b", unit)]);
            for (label, r) in [("compound", &outer), ("corner_union", &inner)] {
                for (i, v) in r.vertices.iter().enumerate() {
                    csv.row(&[label.into(), i.to_string(), num(v[0]), num(v[1])]);
                }
            }
            let svg = svg_plot(
                "Example 1 regions",
                &col("R_A", unit),
                &col("R_B", unit),
                &[
                    Series { label: "compound".into(), color: "red", points: outer.vertices.clone(), closed: true },
                    Series { label: "corner union".into(), color: "blue", points: inner.vertices.clone(), closed: true },
                ],
            );
            ("Fregion", csv, svg)
        }
    };
    Ok(vec![csv.finish(&format!("{name}.csv")), Artifact { name: format!("{name}.svg"), contents: svg }])
}
