use std::fs;
use std::path::{Path, PathBuf};

use cvngs::manifest::Manifest;
use cvngs::{execute, Overrides};

enum Compare {
    Bytes,
    Numeric(f64),
}

const CASES: &[(&str, &[(&str, Compare)])] = &[
    ("fig2a", &[("fig2a/sweep.csv", Compare::Bytes)]),
    ("fig2d", &[("wigner.csv", Compare::Numeric(1e-8))]),
    ("fig2e", &[("wigner.csv", Compare::Numeric(1e-8))]),
    (
        "four_cat",
        &[
            ("marginal.csv", Compare::Numeric(1e-6)),
            ("wigner.csv", Compare::Numeric(1e-6)),
        ],
    ),
    (
        "oracle_fig2h",
        &[
            ("fock.csv", Compare::Numeric(1e-8)),
            ("phase_space.csv", Compare::Numeric(1e-8)),
        ],
    ),
    ("gaussian", &[("sweep.csv", Compare::Numeric(1e-12))]),
];

fn golden_dir() -> PathBuf {
    std::env::var_os("CVNGS_GOLDEN_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden"))
}

fn run_case(case: &str, out: &Path) {
    let m = Manifest::load(&golden_dir().join(case).join("manifest.json")).unwrap();
    let (report, code) = execute(&m, out, &Overrides::default());
    assert_eq!(code, 0, "{case}: {:?}", report.error);
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| {
            rec.unwrap()
                .iter()
                .map(|s| s.parse::<f64>().unwrap())
                .collect()
        })
        .collect();
    (header, rows)
}

fn max_diff(got: &Path, want: &Path) -> f64 {
    let (gh, gr) = table(got);
    let (wh, wr) = table(want);
    assert_eq!(gh, wh, "{}", got.display());
    assert_eq!(gr.len(), wr.len(), "{}", got.display());
    let mut worst: f64 = 0.0;
    for (a, b) in gr.iter().zip(&wr) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            if !(x.is_nan() && y.is_nan()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    worst
}

#[test]
fn outputs_match_golden_files() {
    for (case, files) in CASES {
        let dir = tempfile::tempdir().unwrap();
        run_case(case, dir.path());
        for (file, how) in files.iter() {
            let got = dir.path().join(file);
            let want = golden_dir()
                .join(case)
                .join(Path::new(file).file_name().unwrap());
            match how {
                Compare::Bytes => {
                    assert!(
                        fs::read(&got).unwrap() == fs::read(&want).unwrap(),
                        "{case}/{file} differs from golden"
                    );
                }
                Compare::Numeric(tol) => {
                    let d = max_diff(&got, &want);
                    assert!(d <= *tol, "{case}/{file}: max-abs diff {d:e} > {tol:e}");
                }
            }
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_case("fig2d", a.path());
    run_case("fig2d", b.path());
    assert!(
        fs::read(a.path().join("wigner.csv")).unwrap()
            == fs::read(b.path().join("wigner.csv")).unwrap()
    );
}

/// Regenerates the expected files; run with `--ignored`.
#[test]
#[ignore]
fn bless() {
    for (case, files) in CASES {
        let dir = tempfile::tempdir().unwrap();
        run_case(case, dir.path());
        for (file, _) in files.iter() {
            let dest = golden_dir()
                .join(case)
                .join(Path::new(file).file_name().unwrap());
            fs::copy(dir.path().join(file), dest).unwrap();
        }
    }
}
