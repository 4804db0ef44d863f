use std::path::Path;
use std::process::{Command, Output};

use kep_core::format::{parse_instance, write_instance, write_instance_string};
use kep_core::{
    brute_force_oracle, build_compat, build_model, generate, Agent, BloodType, GenConfig, Instance,
    ModelConfig, PairRecord,
};

fn kep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kep"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn two_pairs() -> Instance {
    Instance {
        agents: vec![Agent {
            id: 0,
            name: "agent-1".into(),
        }],
        pairs: vec![
            PairRecord {
                pair_id: 0,
                agent_id: 0,
                patient_blood: BloodType::A,
                donor_blood: BloodType::O,
            },
            PairRecord {
                pair_id: 1,
                agent_id: 0,
                patient_blood: BloodType::B,
                donor_blood: BloodType::O,
            },
        ],
        pra_compat: vec![vec![0, 1], vec![1, 0]],
        hla_score: vec![vec![0, 255], vec![210, 0]],
    }
}

fn write_two_pairs(dir: &Path) -> String {
    let path = dir.join("two.toml");
    write_instance(&path, &two_pairs()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn csv_total(csv: &str) -> u32 {
    let row = csv.lines().nth(1).expect("at least one data row");
    row.rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn generate_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.toml");
    let b = dir.path().join("b.toml");
    for path in [&a, &b] {
        let out = kep(&["generate", "--seed", "42", "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let inst = parse_instance(&text).unwrap();
    assert_eq!(inst.len(), 20);
    assert_eq!(inst.num_agents(), 4);
    assert_eq!(inst, generate(&GenConfig::with_seed(42)).unwrap());
}

#[test]
fn format_closure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.toml");
    let out = kep(&[
        "generate",
        "--seed",
        "9",
        "--agents",
        "2",
        "--pairs",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(write_instance_string(&parse_instance(&text).unwrap()), text);
}

#[test]
fn solve_two_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_two_pairs(dir.path());

    let m1 = kep(&["solve", "--instance", &inst, "--model", "1"]);
    assert!(m1.status.success());
    assert!(stdout(&m1).contains("total: 2"));

    let csv_path = dir.path().join("m1.csv");
    let out = kep(&[
        "solve",
        "--instance",
        &inst,
        "--model",
        "1",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv, "model,agent_id,assigned_kidneys,total\nmodel1,0,2,2\n");

    let m2 = kep(&["solve", "--instance", &inst, "--model", "2", "--l-hla", "256"]);
    assert!(m2.status.success());
    assert!(stdout(&m2).contains("total: 0"));
    let m2_ok = kep(&["solve", "--instance", &inst, "--model", "2", "--l-hla", "210"]);
    assert!(stdout(&m2_ok).contains("objective: 465"));
}

#[test]
fn model3_auto_floors_match_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.toml");
    let cfg = GenConfig {
        num_agents: 3,
        pairs_per_agent: 4,
        pra_compat_probability: 0.8,
        ..GenConfig::with_seed(11)
    };
    write_instance(&path, &generate(&cfg).unwrap()).unwrap();
    let csv_path = dir.path().join("m3.csv");
    let out = kep(&[
        "solve",
        "--instance",
        path.to_str().unwrap(),
        "--model",
        "3",
        "--l-hla",
        "150",
        "--objective",
        "count-only",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);

    let inst = generate(&cfg).unwrap();
    let compat = build_compat(&inst).unwrap();
    let floors = kep_core::compute_fairness_floors(&inst, &compat).unwrap();
    let floor_line = floors.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    assert!(text.contains(&format!("floors: {floor_line}")), "{text}");

    let all: Vec<usize> = (0..inst.len()).collect();
    let mcfg = ModelConfig::model3(150, floors, kep_core::ObjectiveMode::CountOnly);
    let oracle = brute_force_oracle(&build_model(&inst, &compat, &mcfg, &all).unwrap()).unwrap();
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(text.contains(&format!("status: {}", oracle.status.as_str())));
    if oracle.status == kep_core::SolveStatus::Optimal {
        assert_eq!(csv_total(&csv), 2 * oracle.solution.matches.len() as u32);
    }
}

#[test]
fn sweeps() {
    let lhla = kep(&["sweep", "--mode", "lhla", "--range", "205:230:5", "--seed", "1"]);
    assert!(lhla.status.success());
    let text = stdout(&lhla);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "swept_param,value,model1_total,model2_total,model3_total,model3_status"
    );
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("l_hla,205,"));
    assert!(lines[6].starts_with("l_hla,230,"));

    let pairs = kep(&[
        "sweep",
        "--mode",
        "pairs",
        "--range",
        "5,6,8,10,12",
        "--nested",
        "--seed",
        "1",
    ]);
    assert!(pairs.status.success());
    let text = stdout(&pairs);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.starts_with("pairs_per_agent,")));
}

#[test]
fn base_scenario_table() {
    let out = kep(&["base", "--seed", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("model,agent_id,assigned_kidneys,total"));
    assert_eq!(text.lines().filter(|l| l.starts_with("model1,")).count(), 4);
    assert_eq!(text.lines().filter(|l| l.starts_with("model2,")).count(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_two_pairs(dir.path());

    assert_eq!(
        kep(&["sweep", "--mode", "lhla", "--range", "230:205:5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        kep(&["solve", "--instance", &inst, "--model", "4"]).status.code(),
        Some(1)
    );
    assert_eq!(
        kep(&["solve", "--instance", &inst, "--model", "3", "--floors", "1,2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(kep(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kep(&["--help"]).status.code(), Some(0));

    let missing = dir.path().join("missing.toml");
    assert_eq!(
        kep(&["solve", "--instance", missing.to_str().unwrap(), "--model", "1"])
            .status
            .code(),
        Some(2)
    );
    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, "[header]\nformat_version = 1\n").unwrap();
    assert_eq!(
        kep(&["solve", "--instance", broken.to_str().unwrap(), "--model", "1"])
            .status
            .code(),
        Some(2)
    );

    // Unattainable floors are a result, not an error.
    let out = kep(&["solve", "--instance", &inst, "--model", "3", "--floors", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("status: infeasible_floors"));
}
