use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_univcode"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn univcode")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> (String, Vec<Vec<String>>) {
    let mut lines = csv.lines();
    let header = lines.next().expect("header").to_string();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s}"))
}

fn vertices(csv: &str) -> Vec<(f64, f64)> {
    let (header, body) = rows(csv);
    assert_eq!(header, "vertex,r_a[bits],r_b[bits]");
    body.iter().map(|r| (num(&r[1]), num(&r[2]))).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn has_vertex(vs: &[(f64, f64)], x: f64, y: f64, tol: f64) -> bool {
    vs.iter().any(|&(a, b)| (a - x).abs() < tol && (b - y).abs() < tol)
}

const AND_STATES: &str = "[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[1,0],[0,0]],[[0,0],[0,0]]],[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]]";

#[test]
fn info_on_the_bsc() {
    let out = ok_stdout(&["info", "--channel", "builtin:bsc"]);
    let (header, body) = rows(&out);
    assert_eq!(header, "measure,alpha,value,unit");
    assert_eq!(body.len(), 1);
    assert_eq!(body[0][0], "holevo_mi");
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    assert!((num(&body[0][2]) - (1.0 - h(0.1))).abs() < 1e-6);
    assert_eq!(body[0][3], "bits");

    let out = ok_stdout(&["--unit", "nats", "info", "--channel", "builtin:bsc", "--alpha", "0.5,2"]);
    let (_, body) = rows(&out);
    assert_eq!(body.len(), 3);
    assert!((num(&body[0][2]) - (1.0 - h(0.1)) * 2f64.ln()).abs() < 1e-6);
    assert!(body.iter().all(|r| r[3] == "nats"));
    // sibson order is monotone in alpha
    let s: Vec<f64> = body[1..].iter().map(|r| num(&r[2])).collect();
    assert!(s[0] < num(&body[0][2]) && num(&body[0][2]) < s[1]);
}

#[test]
fn json_channel_matches_the_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let bsc = write(
        dir.path(),
        "bsc.json",
        r#"{"kind":"cq","out_dim":2,"states":[[[[0.9,0],[0,0]],[[0,0],[0.1,0]]],[[[0.1,0],[0,0]],[[0,0],[0.9,0]]]]}"#,
    );
    assert_eq!(ok_stdout(&["info", "--channel", &bsc]), ok_stdout(&["info", "--channel", "builtin:bsc"]));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"kind": "cq", "out_dim": 2, "states": [[[1,0]"#);
    let out = run(&["info", "--channel", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let not_psd = write(
        dir.path(),
        "neg.json",
        r#"{"kind":"cq","out_dim":2,"states":[[[[1.5,0],[0,0]],[[0,0],[-0.5,0]]]]}"#,
    );
    assert_eq!(run(&["info", "--channel", &not_psd]).status.code(), Some(2));
    assert_eq!(run(&["info", "--channel", "builtin:nope"]).status.code(), Some(2));
    assert_eq!(run(&["info", "--channel", "/no/such/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["--threads", "0", "info", "--channel", "builtin:bsc"]).status.code(), Some(2));
}

#[test]
fn example1_compound_square_and_corner_union() {
    let sq = vertices(&ok_stdout(&["region", "--family", "builtin:example1", "--setting", "compound-mac"]));
    for (x, y) in [(0.0, 0.0), (0.5, 0.0), (0.5, 0.5), (0.0, 0.5)] {
        assert!(has_vertex(&sq, x, y, 1e-3), "missing ({x}, {y}) in {sq:?}");
    }
    let cu = vertices(&ok_stdout(&["region", "--family", "builtin:example1", "--setting", "corner-union"]));
    assert!(has_vertex(&cu, 0.5, 0.25, 1e-3));
    assert!(has_vertex(&cu, 0.25, 0.5, 1e-3));
    assert!(cu.iter().all(|&(x, y)| x + y <= 0.75 + 1e-3));

    let out = ok_stdout(&["region", "--family", "builtin:example1", "--setting", "r-quantities"]);
    let (header, body) = rows(&out);
    assert_eq!(header, "quantity,value,unit");
    let want = [("r1", 0.75), ("r2", 1.0), ("r3", 1.0)];
    for (r, (name, v)) in body.iter().zip(want) {
        assert_eq!(r[0], name);
        assert!((num(&r[1]) - v).abs() < 1e-3);
    }
}

#[test]
fn singleton_family_equals_the_mac_region() {
    let dir = tempfile::tempdir().unwrap();
    let mac = format!(r#"{{"kind":"mac","a_size":2,"b_size":2,"out_dim":2,"states":{AND_STATES}}}"#);
    let mac_path = write(dir.path(), "and.json", &mac);
    let fam_path = write(dir.path(), "fam.json", &format!(r#"{{"kind":"family","members":[{mac}]}}"#));
    let single = vertices(&ok_stdout(&["region", "--family", &mac_path, "--setting", "mac"]));
    let compound = vertices(&ok_stdout(&["region", "--family", &fam_path, "--setting", "compound-mac"]));
    assert_eq!(single.len(), compound.len());
    for (&(a, b), &(c, d)) in single.iter().zip(&compound) {
        assert!((a - c).abs() < 1e-6 && (b - d).abs() < 1e-6);
    }
    // deterministic AND output: the sum rate is capped by one bit
    assert!(single.iter().all(|&(x, y)| x + y <= 1.0 + 1e-6));
    assert!(has_vertex(&single, 1.0, 0.0, 1e-6));
}

#[test]
fn exponent_vanishes_above_the_rates() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(dir.path(), "d.json", r#"{"p_t":[0.5,0.5],"p_a_t":[[0.9,0.1],[0.1,0.9]]}"#);
    let value = |rates: &str| {
        let out = ok_stdout(&[
            "--unit", "nats", "exponent", "--channel", "builtin:bsc-pair", "--dist", &dist, "--rates", rates, "--slacks",
            "0.02,0.02", "--variant", "bcd-y",
        ]);
        let (header, body) = rows(&out);
        assert_eq!(header, "decoder,term,value[nats],s");
        let last = body.iter().find(|r| r[1] == "exponent").expect("exponent row");
        num(&last[2])
    };
    let inner = value("0.05,0.05");
    assert!(inner > 0.0);
    assert!(value("0.01,0.01") >= inner);
    assert_eq!(value("5,5"), 0.0);
}

#[test]
fn packing_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", r#"{"setting":"single","type":[4,4],"rate":0.6,"size":5}"#);
    let pack = |out: &str| {
        let o = dir.path().join(out);
        ok_stdout(&["--unit", "nats", "pack", "--config", &cfg, "--seed", "0", "--out", o.to_str().unwrap()]);
        std::fs::read_to_string(o.join("code.json")).unwrap()
    };
    let a = pack("a");
    assert_eq!(a, pack("b"));
    let code: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(code["setting"], "single");
    assert_eq!(code["n"], 8);
    let words = code["codewords"].as_array().unwrap();
    assert_eq!(words.len(), 5);
    for w in words {
        let ones = w.as_array().unwrap().iter().filter(|x| x.as_u64() == Some(1)).count();
        assert_eq!(ones, 4);
    }

    let infeasible = write(dir.path(), "q.json", r#"{"setting":"single","type":[4,4],"rate":0.1,"size":60}"#);
    assert_eq!(run(&["--unit", "nats", "pack", "--config", &infeasible, "--seed", "0"]).status.code(), Some(3));
}

#[test]
fn decoding_hand_written_codes() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(
        dir.path(),
        "one.json",
        r#"{"setting":"single","n":3,"codewords":[[0,1,1]],"rates":[0.0],"slack":1.0,"margins":{},"seed":0}"#,
    );
    let (header, body) = rows(&ok_stdout(&["decode", "--channel", "builtin:bsc", "--code", &one]));
    assert_eq!(header, "receiver,error_probability");
    assert_eq!(num(&body[0][1]), 0.0);

    let bcd = write(
        dir.path(),
        "bcd.json",
        r#"{"setting":"superposition","n":4,"clouds":[[0,0,1,1],[1,1,0,0]],
            "codewords":[[0,1,0,1],[1,0,1,0],[0,1,1,0],[1,0,0,1]],
            "rates":[0.17,0.17],"slack":1.0,"margins":{},"seed":0}"#,
    );
    for slacks in ["0.01,0.01", "-0.4,-0.4"] {
        let (_, body) = rows(&ok_stdout(&["decode", "--channel", "builtin:bsc-pair", "--code", &bcd, "--slacks", slacks]));
        assert_eq!(body.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["y", "z"]);
        assert!(body.iter().all(|r| (0.0..=1.0).contains(&num(&r[1]))));
    }
    // every projection is the identity, so the square-root measurement guesses uniformly
    let (_, body) = rows(&ok_stdout(&["decode", "--channel", "builtin:bsc-pair", "--code", &bcd, "--slacks", "-2,-2"]));
    assert!((num(&body[0][1]) - 0.75).abs() < 1e-9);
    assert!((num(&body[1][1]) - 0.5).abs() < 1e-9);

    let big = write(
        dir.path(),
        "big.json",
        r#"{"setting":"single","n":11,"codewords":[[0,0,0,0,0,0,0,0,0,0,0],[1,1,1,1,1,1,1,1,1,1,1]],
            "rates":[0.0],"slack":1.0,"margins":{},"seed":0}"#,
    );
    assert_eq!(run(&["decode", "--channel", "builtin:bsc", "--code", &big]).status.code(), Some(4));
}

#[test]
fn figure_ff2_closes_at_half_a_bit() {
    let (header, body) = rows(&ok_stdout(&["paperfig", "--figure", "FF2", "--resolution", "60"]));
    assert_eq!(header, "rate[bits],hi1[bits],hi2[bits]");
    let at_half = body.iter().find(|r| (num(&r[0]) - 0.5).abs() < 1e-9).expect("row at 0.5");
    assert!(num(&at_half[1]).abs() < 1e-4);
    assert!(num(&at_half[2]).abs() < 1e-6);
    let first = &body[0];
    assert!(num(&first[1]) > 0.0 && num(&first[2]) > 0.0);
}

#[test]
fn figure_po1_peak() {
    let (header, body) = rows(&ok_stdout(&["paperfig", "--figure", "PO1", "--resolution", "200"]));
    assert_eq!(header, "p,best_q,value[bits]");
    let peak = body.iter().map(|r| num(&r[2])).fold(f64::NEG_INFINITY, f64::max);
    assert!((peak - 0.311278).abs() < 1e-4, "peak {peak}");
}

#[test]
fn figure_region_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig");
    ok_stdout(&["paperfig", "--figure", "Fregion", "--out", out.to_str().unwrap()]);
    let svg = std::fs::read_to_string(out.join("Fregion.svg")).unwrap();
    assert!(svg.contains("<svg"));
    let (header, body) = rows(&std::fs::read_to_string(out.join("Fregion.csv")).unwrap());
    assert_eq!(header, "region,vertex,r_a[bits],r_b[bits]");
    let pick = |name: &str| -> Vec<(f64, f64)> {
        body.iter().filter(|r| r[0] == name).map(|r| (num(&r[2]), num(&r[3]))).collect()
    };
    let compound = pick("compound");
    let corner = pick("corner_union");
    let (xmax, ymax) = compound.iter().fold((0.0f64, 0.0f64), |(a, b), &(x, y)| (a.max(x), b.max(y)));
    assert!(corner.iter().all(|&(x, y)| x <= xmax + 1e-9 && y <= ymax + 1e-9));
    assert!(has_vertex(&compound, xmax, ymax, 1e-9));
    assert!(!corner.iter().any(|&(x, y)| (x - xmax).abs() < 1e-3 && (y - ymax).abs() < 1e-3));
}
