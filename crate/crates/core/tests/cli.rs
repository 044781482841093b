use biortho::kernels::{EnsembleSpec, Family, FiniteKernel};
use biortho::scaling::ScaledKernel;
use biortho::special::{limit_kernel, limit_kernel_hermite, LimitKernelParams, Method};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::process::{Command, Output};

fn biortho(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biortho"))
        .args(args)
        .env_remove("BIORTHO_REL_TOL")
        .env_remove("BIORTHO_ABS_TOL")
        .env_remove("BIORTHO_MAX_TERMS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn values(csv: &str) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect()
}

#[test]
fn kernel_grid_shape() {
    let o = biortho(&["kernel", "--family", "laguerre", "--alpha", "0", "--theta", "1", "--n", "5", "--grid", "0.5:2:4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("x,y,value"));
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn limit_value_matches_library() {
    let o = biortho(&["kernel", "--limit", "--family", "jacobi", "--alpha", "0", "--theta", "1", "--x", "1", "--y", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let p = LimitKernelParams::new(0.0, 1.0).unwrap();
    assert_eq!(values(&stdout(&o)), vec![limit_kernel(p, 1.0, 1.0, Method::Auto).unwrap()]);
}

#[test]
fn usage_errors_exit_with_two() {
    let o = biortho(&["kernel", "--family", "jacobi", "--alpha", "0", "--theta", "1", "--n", "3", "--grid", "0:1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = biortho(&["kernel", "--family", "jacobi", "--alpha", "-1", "--theta", "1", "--n", "3", "--x", "0.5", "--y", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha must be > -1"));
    assert_eq!(biortho(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(biortho(&["converge", "--family", "laguerre", "--alpha", "0", "--theta", "1", "--grid", ""]).status.code(), Some(2));
    assert_eq!(biortho(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn environment_tolerance_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_biortho"))
        .args(["kernel", "--limit", "--family", "jacobi", "--alpha", "0", "--theta", "1", "--x", "1", "--y", "1"])
        .env("BIORTHO_REL_TOL", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("BIORTHO_REL_TOL"));
}

#[test]
fn cli_values_equal_library_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for case in 0..20 {
        let fam = [Family::Jacobi, Family::Laguerre, Family::Hermite][case % 3];
        let alpha = -0.5 + 2.5 * rng.random::<f64>();
        let theta = 0.4 + 2.0 * rng.random::<f64>();
        let n = 1 + (rng.random::<u32>() % 9) as usize;
        let (x, y) = match fam {
            Family::Jacobi => (0.05 + 0.9 * rng.random::<f64>(), 0.05 + 0.9 * rng.random::<f64>()),
            Family::Laguerre => (0.1 + 4.0 * rng.random::<f64>(), 0.1 + 4.0 * rng.random::<f64>()),
            Family::Hermite => (-2.0 + 4.0 * rng.random::<f64>(), -2.0 + 4.0 * rng.random::<f64>()),
        };
        let mode = case / 3 % 3;
        let (fs, a_s, t_s, n_s, x_s, y_s) =
            (fam.to_string(), alpha.to_string(), theta.to_string(), n.to_string(), x.to_string(), y.to_string());
        let mut args = vec!["kernel", "--family", &fs, "--alpha", &a_s, "--theta", &t_s, "--x", &x_s, "--y", &y_s];
        let spec = EnsembleSpec::new(fam, alpha, theta, n).unwrap();
        let want = match mode {
            0 => {
                args.extend(["--n", &n_s]);
                FiniteKernel::new(spec).unwrap().eval(x, y).unwrap()
            }
            1 if fam != Family::Hermite || n >= 2 => {
                // The Jacobi scale N^{1+1/θ} is at least 1, so (x, y) stay inside.
                args.extend(["--n", &n_s, "--scaled"]);
                ScaledKernel::new(spec).unwrap().eval(x, y).unwrap()
            }
            _ => {
                args.push("--limit");
                let p = LimitKernelParams::new(alpha, theta).unwrap();
                match fam {
                    Family::Hermite => {
                        // The CLI forwards --method auto; the library default is the series.
                        args.extend(["--method", "series"]);
                        limit_kernel_hermite(p, x, y).unwrap()
                    }
                    _ => limit_kernel(p, x.abs(), y.abs(), Method::Auto).unwrap(),
                }
            }
        };
        let o = biortho(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let got = values(&stdout(&o));
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].to_bits(), want.to_bits(), "{args:?}: {} vs {want}", got[0]);
    }
}

#[test]
fn converge_honours_n_list_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = biortho(&["converge", "--family", "laguerre", "--alpha", "0", "--theta", "1", "--n-list", "25,50,100", "--out-dir", d]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("converge.csv")).unwrap();
    let mut ns: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    ns.dedup();
    assert_eq!(ns, ["25", "50", "100"]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("converge.json")).unwrap()).unwrap();
    assert!(json["monotone_flag"].is_boolean());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "converge");
    assert!(manifest["version"].is_string());
    assert!(manifest["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn verify_lists_and_reports() {
    let o = biortho(&["verify", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for s in ["kernels", "gram", "polynomials", "symmetry", "reductions", "components"] {
        assert!(text.contains(s), "{s}");
    }
    let o = biortho(&["verify", "--suite", "reductions", "--suite", "symmetry"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    let suites = v["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 2);
    for c in suites.iter().flat_map(|s| s["checks"].as_array().unwrap()) {
        assert!(c["residual"].is_number() && c["passed"] == true, "{c}");
    }
}

fn sample_into(dir: &Path, extra: &[&str]) -> Output {
    let d = dir.to_str().unwrap();
    let mut args = vec!["sample", "--family", "jacobi", "--alpha", "1", "--theta", "2", "--n", "3", "--kept", "3000", "--out-dir", d];
    args.extend_from_slice(extra);
    biortho(&args)
}

#[test]
fn sampling_is_reproducible_and_overlays_predictions() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(sample_into(a.path(), &["--seed", "7"]).status.code(), Some(0));
    assert_eq!(sample_into(b.path(), &["--seed", "7"]).status.code(), Some(0));
    for f in ["samples.csv", "rho1.csv", "rho2.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let rho1 = std::fs::read_to_string(a.path().join("rho1.csv")).unwrap();
    assert!(rho1.starts_with("bin,center,empirical,predicted,sigma\n"));
    assert_eq!(rho1.lines().count(), 21);
    let samples = std::fs::read_to_string(a.path().join("samples.csv")).unwrap();
    assert!(samples.starts_with("chain,step,x_1,x_2,x_3\n"));
    assert_eq!(samples.lines().count(), 1 + 4 * 3000);
}

#[test]
fn binary_format_and_generated_seed() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sample_into(dir.path(), &["--format", "binary"]).status.code(), Some(0));
    let bytes = std::fs::read(dir.path().join("samples.bin")).unwrap();
    assert_eq!(&bytes[..4], b"BIOE");
    assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
    assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), 3);
    assert_eq!(u64::from_le_bytes(bytes[10..18].try_into().unwrap()), 4 * 3000);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["seed"].is_u64(), "{manifest}");
}

#[test]
fn runtime_failures_exit_with_one() {
    let o = biortho(&["verify", "--suite", "reductions", "--output", "/nonexistent-dir/verdict.json"]);
    assert_eq!(o.status.code(), Some(1));
}
