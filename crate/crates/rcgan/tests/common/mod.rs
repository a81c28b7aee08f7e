//! Shared helpers for the integration suites: the deterministic tabular
//! fixture and a runner for the installed binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const FIXTURE_ROWS: usize = 200;
pub const FIXTURE_ANOMALOUS: usize = 24;
/// f_a, f_b, proto one-hot (3), f_c.
pub const FIXTURE_EXPANDED_DIM: usize = 6;

pub const SCHEMA_TEXT: &str = "\
# layout of the synthetic tabular fixture
f_a continuous
f_b continuous
proto categorical alpha beta gamma
f_c continuous
";

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_csv_path() -> PathBuf {
    fixture_dir().join("synth_tabular.csv")
}

pub fn fixture_schema_path() -> PathBuf {
    fixture_dir().join("synth_tabular.schema")
}

/// Deterministic fixture content. Rows `i` with `i % 25 < 3` are anomalous
/// (24 of 200), interleaved with normal rows. Normal rows cluster around
/// f_a ~ 2, f_b in [10, 30), f_c ~ -1 with alpha/beta-heavy protocols;
/// anomalies sit shifted in every column and skew to gamma.
pub fn fixture_csv_text() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut out = String::from("f_a,f_b,proto,f_c,label\n");
    for i in 0..FIXTURE_ROWS {
        let anomalous = i % 25 < 3;
        let (f_a, f_b, proto, f_c): (f64, f64, &str, f64);
        if anomalous {
            f_a = 5.0 + 0.7 * unit.sample(&mut rng);
            f_b = rng.random_range(25.0..45.0);
            proto = if rng.random::<f64>() < 0.2 { "alpha" } else { "gamma" };
            f_c = 1.5 + 0.5 * unit.sample(&mut rng);
        } else {
            f_a = 2.0 + 0.5 * unit.sample(&mut rng);
            f_b = rng.random_range(10.0..30.0);
            let p = rng.random::<f64>();
            proto = if p < 0.5 {
                "alpha"
            } else if p < 0.8 {
                "beta"
            } else {
                "gamma"
            };
            f_c = -1.0 + 0.25 * unit.sample(&mut rng);
        }
        out.push_str(&format!(
            "{f_a},{f_b},{proto},{f_c},{}\n",
            u8::from(anomalous)
        ));
    }
    out
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rcgan")
}

/// Run the binary with the given arguments, capturing output.
pub fn run_bin(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawn rcgan binary")
}

pub fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "exit code mismatch\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

/// Byte-compare every file in two directories (non-recursive).
pub fn assert_dirs_identical(a: &Path, b: &Path) {
    let list = |d: &Path| -> Vec<String> {
        let mut names: Vec<String> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        names
    };
    let names = list(a);
    assert_eq!(names, list(b), "directory listings differ");
    for name in names {
        let fa = std::fs::read(a.join(&name)).unwrap();
        let fb = std::fs::read(b.join(&name)).unwrap();
        assert_eq!(fa, fb, "file {name} differs between reruns");
    }
}
