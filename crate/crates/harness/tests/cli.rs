use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const LAB: &str = env!("CARGO_BIN_EXE_lab");

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn lab(args: &[&str], dir: &Path) -> Output {
    Command::new(LAB).args(args).current_dir(dir).env_remove("LAB_THREADS").output().expect("lab runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn data_lines(s: &str) -> Vec<&str> {
    s.lines().filter(|l| !l.starts_with('#')).collect()
}

const TINY_SWEEP: &str = r#"
experiment = "noise-sweep"
trials = 2
seed = 5

[distribution]
kind = "prototypes"
source = "synthetic"
dim = 16

[learner]
hidden = [32]
lr_schedule = [[0, 0.1]]
batch_size = 32
epochs = 5
train_size = 100
test_size = 50

[attack]
norm = "linf"
epsilon = 0.1
steps = 5
step_size = 0.05

[sweep]
sigma = [0.5]
eta = [0.0, 0.3]
"#;

#[test]
fn every_shipped_config_validates() {
    let tmp = tempfile::tempdir().unwrap();
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = lab(&["validate-config", "--config", path.to_str().unwrap()], tmp.path());
            assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
            seen += 1;
        }
    }
    assert!(seen >= 7);
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.toml", "experiment = \"noise-sweep\"\nbogus = 1\n[distribution]\nkind = \"prototypes\"\n"),
        ("syntax.toml", "experiment = \n"),
        ("kind.toml", "experiment = \"no-such-thing\"\n"),
    ];
    for (name, body) in cases {
        let p = write(tmp.path(), name, body);
        let out = lab(&["noise-sweep", "--config", p.to_str().unwrap()], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let missing = lab(&["noise-sweep", "--config", "nope.toml"], tmp.path());
    assert_eq!(missing.status.code(), Some(2));

    // A valid config run under the wrong subcommand.
    let p = write(tmp.path(), "sweep.toml", TINY_SWEEP);
    let out = lab(&["majority-mc", "--config", p.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let body = TINY_SWEEP.replace(
        "source = \"synthetic\"",
        "source = \"mnist\"\nimages = \"absent-images.idx\"\nlabels = \"absent-labels.idx\"",
    );
    let p = write(tmp.path(), "mnist.toml", &body);
    let out = lab(&["noise-sweep", "--config", p.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_output_is_deterministic_and_complete() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "sweep.toml", TINY_SWEEP);
    let run = |dir: &str, threads: &str| {
        let out = lab(&["noise-sweep", "--config", p.to_str().unwrap(), "--out", dir, "--threads", threads], tmp.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read_to_string(tmp.path().join(dir).join("noise-sweep.csv")).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "2");
    assert_eq!(a, b, "output must not depend on the thread count");

    assert!(a.starts_with("# lab noise-sweep\n# config_sha256: "));
    assert!(a.contains("# seed: 5\n"));
    let rows = data_lines(&a);
    assert_eq!(rows[0], "sigma,eta,trial,train_err,test_err,adv_err,epochs");
    assert_eq!(rows.len() - 1, 2 * 2, "one row per sigma (1), eta (2) and trial (2)");

    let reseeded = lab(&["noise-sweep", "--config", p.to_str().unwrap(), "--out", "c", "--seed", "6"], tmp.path());
    assert!(reseeded.status.success());
    let c = fs::read_to_string(tmp.path().join("c/noise-sweep.csv")).unwrap();
    assert!(c.contains("# seed: 6\n"));
}

#[test]
fn lab_threads_must_be_positive() {
    let tmp = tempfile::tempdir().unwrap();
    let p = configs_dir().join("majority-mc.toml");
    let out = Command::new(LAB)
        .args(["majority-mc", "--config", p.to_str().unwrap(), "--out", "o"])
        .current_dir(tmp.path())
        .env("LAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(LAB)
        .args(["majority-mc", "--config", p.to_str().unwrap(), "--out", "o", "--threads", "0"])
        .current_dir(tmp.path())
        .env("LAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success(), "LAB_THREADS wins over --threads: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn boundary_raster_writes_rasters_of_the_requested_size() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
experiment = "boundary-raster"
seed = 1

[distribution]
kind = "blobs"
layout = "boundary"

[learner]
architectures = ["shallow"]
lr_schedule = [[0, 0.05]]
batch_size = 32
epochs = 20
stop_at_zero_error = false
train_size = 200

[sweep]
raster_resolution = 24
"#;
    let p = write(tmp.path(), "raster.toml", body);
    let out = lab(&["boundary-raster", "--config", p.to_str().unwrap(), "--out", "r"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("r");
    for model in ["nat-shallow", "1-nn"] {
        let pgm = fs::read_to_string(dir.join(format!("raster-{model}-t0.pgm"))).unwrap();
        let body = data_lines(&pgm);
        assert_eq!(body[0], "P2");
        assert_eq!(body[1], "24 24");
        assert_eq!(body[2], "255");
        assert_eq!(body.len(), 3 + 24);
        assert!(body[3..].iter().all(|l| l.split(' ').count() == 24));

        let csv = fs::read_to_string(dir.join(format!("raster-{model}-t0.csv"))).unwrap();
        let grid = data_lines(&csv);
        assert_eq!(grid.len(), 24);
        assert!(grid.iter().all(|l| l.split(',').all(|c| c == "0" || c == "1")));
    }
    let margins = fs::read_to_string(dir.join("boundary-raster.csv")).unwrap();
    assert_eq!(data_lines(&margins)[0], "trial,model,train_err,blob,label,radius,margin");
}
