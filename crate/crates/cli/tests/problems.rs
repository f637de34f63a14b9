use std::path::{Path, PathBuf};
use std::process::Command;

use dyndist_cli::{run, Problem, ResultTable};

fn problems() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("problems");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    files
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dyndist-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn declared(p: &Problem) -> ResultTable {
    let (cmd, args) = p.command.clone().expect("declared command");
    run(p, &cmd, &args).unwrap()
}

#[test]
fn every_problem_runs_and_round_trips() {
    let files = problems();
    assert!(files.len() >= 10);
    for path in files {
        let p = Problem::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let table = declared(&p);
        assert!(!table.rows().is_empty(), "{}", path.display());
        let csv = table.to_csv();
        let back = ResultTable::from_csv(&csv).unwrap();
        assert_eq!(back.to_csv(), csv, "{}", path.display());
        for (r, s) in table.rows().iter().zip(back.rows()) {
            for (a, b) in r.iter().zip(s) {
                if let Some(v) = a.as_num() {
                    assert_eq!(b.as_num().map(f64::to_bits), Some(v.to_bits()));
                }
            }
        }
    }
}

#[test]
fn binary_output_is_byte_identical() {
    for path in problems() {
        let stem = path.file_stem().unwrap().to_string_lossy().to_string();
        let outs: Vec<Vec<u8>> = (0..2)
            .map(|k| {
                let out = scratch(&format!("{stem}-{k}.csv"));
                let status = Command::new(env!("CARGO_BIN_EXE_dyndist"))
                    .args(["run", "--problem"])
                    .arg(&path)
                    .arg("--out")
                    .arg(&out)
                    .env("DYNDIST_THREADS", if k == 0 { "1" } else { "4" })
                    .output()
                    .unwrap();
                assert!(status.status.success(), "{stem}: {}", String::from_utf8_lossy(&status.stderr));
                std::fs::read(out).unwrap()
            })
            .collect();
        assert_eq!(outs[0], outs[1], "{stem}");
    }
}

fn exit_code(problem: &str, args: &[&str]) -> i32 {
    let path = scratch(&format!("exit-{}.txt", problem.len()));
    std::fs::write(&path, problem).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dyndist"))
        .args(args)
        .arg("--problem")
        .arg(&path)
        .output()
        .unwrap();
    out.status.code().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(exit_code("interval = 2 1\n", &["run"]), 2);
    assert_eq!(exit_code("command = pair d phi\n", &["run"]), 4);
    assert_eq!(
        exit_code(
            "interval = 0 3\ncommand = solve\nsteps = 100\n[system]\nt0 = 0.5\nx0 = 1\nf = x1^2\n",
            &["run"]
        ),
        3
    );
    assert_eq!(exit_code("[shape s]\npiece -0.5 0.5 : 3\n", &["run"]), 2);
}

#[test]
fn names_on_the_command_line_override() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("problems/product_step_delta.txt");
    let out = Command::new(env!("CARGO_BIN_EXE_dyndist"))
        .args(["derivative", "--problem"])
        .arg(&path)
        .arg("theta")
        .output()
        .unwrap();
    // the step profile has no derivative
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_dyndist"))
        .args(["pair", "--problem"])
        .arg(&path)
        .args(["delta"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
