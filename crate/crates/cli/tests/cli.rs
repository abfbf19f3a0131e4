use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pvc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvc"))
        .args(args)
        .env_remove("PVC_SEED")
        .output()
        .expect("spawn pvc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(out: &str, key: &str) -> String {
    out.split_whitespace()
        .find_map(|w| w.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {out}"))
        .to_string()
}

#[test]
fn params_validation() {
    let ok = pvc(&["params", "12347", "2", "5", "6"]);
    assert_eq!(ok.status.code(), Some(0));
    let s = stdout(&ok);
    assert!(s.contains("p-1=2 * 6173"));
    assert!(s.contains("status=valid"));

    let bad_g = pvc(&["params", "12347", "1", "5", "6"]);
    assert_eq!(bad_g.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_g.stderr).contains("g1"));

    let bad_p = pvc(&["params", "12348", "2", "5", "6"]);
    assert_eq!(bad_p.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_p.stderr).contains("not prime"));

    assert_eq!(pvc(&["params", "0x303B", "2", "5", "6"]).status.code(), Some(0));
}

#[test]
fn demo_walkthrough() {
    let o = pvc(&["demo", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("G=(10509,11849,10836)"));
    assert!(s.contains("plan I={1,4,6} J={1,4,7,8} blocks=12"));
    assert!(s.contains("holds for 12/12 blocks"));
    assert!(s.trim_end().lines().last().unwrap().starts_with("round trip ok"));
    assert_eq!(s, stdout(&pvc(&["demo", "--seed", "1"])));
}

fn keys(seed: &str) -> (String, String) {
    let o = pvc(&["exchange", "--seed", seed]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(field(&s, "agree"), "true");
    (field(&s, "responder_secret"), field(&s, "responder_public"))
}

fn encrypt(dir: &Path, msg: &[u8], public: &str, extra: &[&str]) -> std::path::PathBuf {
    let input = dir.join("msg.txt");
    let out = dir.join("msg.pvc");
    fs::write(&input, msg).unwrap();
    let mut args = vec![
        "encrypt",
        "--in",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--peer-public",
        public,
        "--shape",
        "8x10",
        "--start",
        "2,3",
    ];
    args.extend_from_slice(extra);
    let o = pvc(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (secret, public) = keys("11");
    let msg = b"Peace at home, peace in the world.";
    let ct = encrypt(dir.path(), msg, &public, &["--seed", "5"]);
    assert_eq!(fs::metadata(&ct).unwrap().len(), 86 + 216);
    let back = dir.path().join("back.txt");
    let o = pvc(&[
        "decrypt",
        "--in",
        ct.to_str().unwrap(),
        "--out",
        back.to_str().unwrap(),
        "--secret",
        &secret,
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&back).unwrap(), msg);
}

#[test]
fn offsets_must_match_on_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let (secret, public) = keys("12");
    let ct = encrypt(dir.path(), b"layer test", &public, &["--offsets", "off", "--seed", "3"]);
    let back = dir.path().join("back.txt");
    let args = |o: &'static str| {
        vec![
            "decrypt".to_string(),
            "--in".into(),
            ct.to_str().unwrap().into(),
            "--out".into(),
            back.to_str().unwrap().into(),
            "--secret".into(),
            secret.clone(),
            "--offsets".into(),
            o.into(),
        ]
    };
    let run = |a: Vec<String>| pvc(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(run(args("off")).status.code(), Some(0));
    assert_eq!(fs::read(&back).unwrap(), b"layer test");
    assert_eq!(run(args("on")).status.code(), Some(4));
}

#[test]
fn truncated_and_tampered_files() {
    let dir = tempfile::tempdir().unwrap();
    let (secret, public) = keys("13");
    let ct = encrypt(
        dir.path(),
        b"Peace at home, peace in the world.",
        &public,
        &["--seed", "7"],
    );
    let bytes = fs::read(&ct).unwrap();
    let back = dir.path().join("back.txt");
    let run = |data: &[u8]| {
        let p = dir.path().join("x.pvc");
        fs::write(&p, data).unwrap();
        pvc(&[
            "decrypt",
            "--in",
            p.to_str().unwrap(),
            "--out",
            back.to_str().unwrap(),
            "--secret",
            &secret,
        ])
        .status
        .code()
    };
    assert_eq!(run(&bytes[..bytes.len() - 3]), Some(3));
    assert_eq!(run(&bytes[..10]), Some(3));
    // column 8 of the matrix is shared by blocks (1,7) and (1,8): column l = 10
    let mut bad = bytes.clone();
    let off = 86 + 9 * 6 + 1;
    bad[off] ^= 0x01;
    assert_eq!(run(&bad), Some(4));
    let missing = dir.path().join("nope.pvc");
    let o = pvc(&[
        "decrypt",
        "--in",
        missing.to_str().unwrap(),
        "--out",
        back.to_str().unwrap(),
        "--secret",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn config_errors_name_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("m");
    fs::write(&input, vec![b'x'; 81]).unwrap();
    let out = dir.path().join("o");
    let base = [
        "encrypt",
        "--in",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    let run = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend_from_slice(extra);
        pvc(&a)
    };
    let o = run(&["--peer-public", "1,2,3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--peer-public"));
    let o = run(&["--peer-public", "8,125,216", "--shape", "2x5"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--shape"));
    let o = run(&["--peer-public", "8,125,216", "--prime", "12348"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--prime"));
    let o = run(&["--peer-public", "8,125,216", "--gvec", "2,2,6"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--gvec"));
    // 81 bytes do not fit 8x10
    let o = run(&["--peer-public", "8,125,216"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_reports() {
    let o = pvc(&["analyze", "ops", "--shape", "12x23"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("field_mults=1152 threshold=1152 status=PASS"));
    assert!(s.contains("field_adds=1152"));
    assert!(s.contains("hmac_calls=288"));

    let o = pvc(&["analyze", "entropy", "--shape", "5x7", "--seed", "1", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("n_values=54"));

    let o = pvc(&["analyze", "kpa", "--offsets", "off", "--seed", "2", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("V recovered"));

    let o = pvc(&["analyze", "randomness", "--seed", "3", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    // the measured diffusion is 2/9, outside the published window
    let o = pvc(&["analyze", "avalanche", "--seed", "4", "--trials", "50"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mean_diffusion_pct=22.22"));

    assert_eq!(pvc(&["analyze", "ops", "--shape", "1x9"]).status.code(), Some(2));
    assert_eq!(pvc(&["analyze", "timing"]).status.code(), Some(2));
}

#[test]
fn seed_from_environment() {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_pvc"))
            .args(["exchange"])
            .env("PVC_SEED", "99")
            .output()
            .unwrap()
    };
    assert_eq!(stdout(&run()), stdout(&run()));
    assert_eq!(stdout(&run()), stdout(&pvc(&["exchange", "--seed", "99"])));
}
