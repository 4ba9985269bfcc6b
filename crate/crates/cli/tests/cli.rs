use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sstree")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn body(o: &Output) -> Vec<String> {
    stdout(o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

#[test]
fn ray_prefix_is_a_path() {
    let o = run(&["gen", "ray", "--depth", "3"]);
    assert!(o.status.success());
    assert_eq!(body(&o), vec!["(((())))"]);
    assert!(stdout(&o).contains("# depth=3"));
}

#[test]
fn bouquet_with_gamma_one_is_bare() {
    let o = run(&["gen", "bouquet", "--gamma", "1.0", "--depth", "2", "--seed", "4"]);
    assert!(o.status.success());
    assert_eq!(body(&o), vec!["((()))"]);
}

#[test]
fn randomized_commands_need_a_seed() {
    let o = run(&["gen", "bouquet", "--depth", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "selfsim", "--p", "1.5", "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn output_is_reproducible() {
    let args = ["gen", "bouquet", "--seed", "9", "--replicates", "20", "--depth", "3"];
    let a = run(&args);
    assert_eq!(a.stdout, run(&args).stdout);
    assert_eq!(body(&a).len(), 20);
    assert_ne!(a.stdout, run(&["gen", "bouquet", "--seed", "10", "--replicates", "20", "--depth", "3"]).stdout);
}

#[test]
fn qsd_suite_passes() {
    let o = run(&["verify", "qsd", "--p", "0.4", "--q", "0.7"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("qsd"));
}

#[test]
fn selfsim_suite_writes_csv() {
    let path = std::env::temp_dir().join(format!("sstree-selfsim-{}.csv", std::process::id()));
    let o = run(&["verify", "selfsim", "--gamma", "0.5", "--p", "0.5", "--seed", "1", "--replicates", "5000", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let csv = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("name,statistic,p_value"));
    assert!(lines[1].contains(",1,") && lines[1].contains("gamma=0.5"));
}

#[test]
fn zero_mass_commutation_is_inconclusive() {
    let args = ["verify", "commute", "--tree", "tree{ rootatom=0 }", "--seed", "1", "--replicates", "50"];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("inconclusive"));
    let mut relaxed = args.to_vec();
    relaxed.push("--inconclusive-ok");
    assert!(run(&relaxed).status.success());
}

#[test]
fn spec_file_supplies_flags() {
    let path = std::env::temp_dir().join(format!("sstree-spec-{}.txt", std::process::id()));
    std::fs::write(&path, "seed=9\nreplicates=20\ndepth=3\n").unwrap();
    let from_file = run(&["gen", "bouquet", "--spec", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    let direct = run(&["gen", "bouquet", "--seed", "9", "--replicates", "20", "--depth", "3"]);
    assert_eq!(body(&from_file), body(&direct));
}

#[test]
fn mass_process_csv() {
    let o = run(&["massproc", "uniform", "--lambda", "2", "--horizon", "2", "--steps", "4"]);
    let out = stdout(&o);
    let rows: Vec<Vec<f64>> = out.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(out.lines().next(), Some("t,X,X_c,X_j"));
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!((r[1] - r[0]).abs() < 1e-12 && (r[2] - r[0]).abs() < 1e-12 && r[3] == 0.0);
    }

    let o = run(&["massproc", "subordinator", "--alpha", "0.5", "--seed", "3", "--steps", "10"]);
    let out = stdout(&o);
    for line in out.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(cols[2], 0.0);
    }
    assert!(!out.contains("-0,"));

    let o = run(&["massproc", "uniform", "--horizon", "0"]);
    assert_eq!(stdout(&o), "t,X,X_c,X_j\n");
}
