use std::process::Command;

use graphtv::random::{random_connected_graph, uniform_field};
use graphtv::OrientedGraph;
use graphtv_cli::error::{EXIT_CHECK_FAILED, EXIT_INVALID_FLAGS, EXIT_OK, EXIT_PARSE};
use graphtv_cli::problem::{self, Problem, ProblemFile};
use graphtv_cli::trajectory::TrajectoryFile;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scratch_dir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("graphtv-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn graphtv(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_graphtv")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn write_problem(dir: &std::path::Path, name: &str, problem: &Problem) -> String {
    let path = dir.join(name);
    std::fs::write(&path, ProblemFile::from_problem(problem).to_json()).unwrap();
    path.display().to_string()
}

fn counterexample_file(dir: &std::path::Path) -> String {
    let (code, text) = graphtv(&["instance", "counterexample"]);
    assert_eq!(code, EXIT_OK);
    let path = dir.join("counterexample.json");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn column(file: &TrajectoryFile, name: &str) -> usize {
    file.vertex_names.iter().position(|n| n == name).unwrap()
}

#[test]
fn rof_rows_and_path() {
    let dir = scratch_dir("rof");
    let input = counterexample_file(&dir);
    let (code, text) = graphtv(&["rof", &input, "--alpha", "1,0"]);
    assert_eq!(code, EXIT_OK);
    let file = TrajectoryFile::parse(&text).unwrap();
    assert_eq!(file.parameters().collect::<Vec<_>>(), vec![0.0, 1.0]);
    let row = file.row_at(1.0).unwrap();
    assert!((row[column(&file, "v22")] - 20.5).abs() < 1e-9 && (row[column(&file, "v32")] - 20.5).abs() < 1e-9);
    assert!((row[column(&file, "v33")] - 2.0).abs() < 1e-9);
    let datum = problem::builtin("counterexample").unwrap().datum;
    assert_eq!(file.row_at(0.0).unwrap(), datum.as_slice());

    let (code, text) = graphtv(&["rof", &input, "--path"]);
    assert_eq!(code, EXIT_OK);
    let file = TrajectoryFile::parse(&text).unwrap();
    assert!((file.breakpoints[0] - 0.4).abs() < 1e-4 && (file.breakpoints[1] - 2.0).abs() < 1e-4);
    assert_eq!(file.rows.len(), file.breakpoints.len() + 1);
}

#[test]
fn flow_rows() {
    let dir = scratch_dir("flow");
    let input = counterexample_file(&dir);
    let (code, text) = graphtv(&["flow", &input, "--t-end", "1,0"]);
    assert_eq!(code, EXIT_OK);
    let file = TrajectoryFile::parse(&text).unwrap();
    let row = file.row_at(1.0).unwrap();
    assert!((row[column(&file, "v22")] - 20.8).abs() < 1e-9 && (row[column(&file, "v32")] - 20.2).abs() < 1e-9);
    assert_eq!(file.row_at(0.0).unwrap(), problem::builtin("counterexample").unwrap().datum.as_slice());

    let output = dir.join("full.txt");
    let (code, _) = graphtv(&["flow", &input, "--full", "--output", output.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let file = TrajectoryFile::parse(&std::fs::read_to_string(output).unwrap()).unwrap();
    let last = &file.rows.last().unwrap()[1..];
    assert!(last.iter().all(|&x| (x - 938.0 / 9.0).abs() < 1e-9));
    assert_eq!(file.rows.len(), file.breakpoints.len() + 1);
}

#[test]
fn compare_flags() {
    let dir = scratch_dir("compare");
    let input = counterexample_file(&dir);
    let (code, text) = graphtv(&["compare", &input, "--grid", "0.2,1,3"]);
    assert_eq!(code, EXIT_OK);
    let equal: Vec<&str> = text.lines().filter_map(|l| l.trim().strip_prefix("equal ")).collect();
    assert_eq!(equal, vec!["true", "false", "false"]);

    let constant = Problem {
        graph: OrientedGraph::cartesian(2, 2).unwrap(),
        datum: graphtv::VertexField::constant(4, 5.0),
    };
    let path = write_problem(&dir, "constant.json", &constant);
    let (code, text) = graphtv(&["compare", &path, "--grid", "0.5,2"]);
    assert_eq!(code, EXIT_OK);
    assert!(text.lines().filter_map(|l| l.trim().strip_prefix("equal ")).all(|v| v == "true"));
    assert!(text.lines().filter(|l| l.trim().starts_with("jump_set")).all(|l| l.split_whitespace().count() == 1));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let line = Problem {
        graph: OrientedGraph::path(12).unwrap(),
        datum: uniform_field(&mut rng, 12, -4.0, 4.0),
    };
    let path = write_problem(&dir, "path.json", &line);
    let (code, text) = graphtv(&["compare", &path, "--grid", "0.1,0.5,1,3,10"]);
    assert_eq!(code, EXIT_OK);
    assert!(text.lines().filter_map(|l| l.trim().strip_prefix("equal ")).all(|v| v == "true"));
}

#[test]
fn verify_modes() {
    let dir = scratch_dir("verify");
    let input = counterexample_file(&dir);
    let (code, text) = graphtv(&["verify", "phimin", &input, "--alpha", "1"]);
    assert_eq!(code, EXIT_OK, "{text}");
    assert!(text.contains("PASS") && !text.contains("FAIL"));

    let (code, text) = graphtv(&["verify", "isotropic", "--random-fields", "20", "--seed", "7"]);
    assert_eq!(code, EXIT_OK);
    let iso = text.lines().find(|l| l.trim().starts_with("isotropic ")).unwrap();
    assert!(iso.contains("witness"));
    assert!(text.lines().any(|l| l.trim().starts_with("anisotropic no witness in catalog")));

    let (code, text) = graphtv(&["verify", "counterexample"]);
    assert_eq!(code, EXIT_OK);
    assert!(!text.contains("FAIL") && text.contains("summary"));
}

#[test]
fn exit_codes() {
    let dir = scratch_dir("exit");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{ \"edges\": [[0, 0]], \"datum\": [1.0] }").unwrap();
    assert_eq!(graphtv(&["rof", bad.to_str().unwrap(), "--alpha", "1"]).0, EXIT_PARSE);
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(graphtv(&["rof", bad.to_str().unwrap(), "--alpha", "1"]).0, EXIT_PARSE);
    let disconnected = dir.join("disconnected.json");
    std::fs::write(&disconnected, "{ \"edges\": [[1, 0]], \"datum\": [1.0, 2.0, 3.0] }").unwrap();
    assert_eq!(graphtv(&["flow", disconnected.to_str().unwrap(), "--full"]).0, EXIT_PARSE);

    assert_eq!(graphtv(&["rof", "builtin:counterexample"]).0, EXIT_INVALID_FLAGS);
    assert_eq!(graphtv(&["rof", "builtin:counterexample", "--alpha", "-1"]).0, EXIT_INVALID_FLAGS);
    assert_eq!(graphtv(&["rof", "builtin:counterexample", "--alpha", "1", "--solve-tol", "0"]).0, EXIT_INVALID_FLAGS);
    assert_eq!(graphtv(&["compare", "builtin:counterexample", "--grid", "0"]).0, EXIT_INVALID_FLAGS);
    assert_eq!(graphtv(&["rof", "builtin:nope", "--alpha", "1"]).0, EXIT_INVALID_FLAGS);
    assert_eq!(graphtv(&["frobnicate"]).0, EXIT_INVALID_FLAGS);
    assert_eq!(graphtv(&["verify", "counterexample", "--flat-tol", "-1"]).0, EXIT_INVALID_FLAGS);
    assert_ne!(EXIT_CHECK_FAILED, EXIT_OK);
}

#[test]
fn output_files_are_byte_identical() {
    let dir = scratch_dir("determinism");
    let (a, b) = (dir.join("a.txt"), dir.join("b.txt"));
    for path in [&a, &b] {
        let code = graphtv(&["rof", "builtin:variant", "--path", "--alpha", "0.3", "-o", path.to_str().unwrap()]).0;
        assert_eq!(code, EXIT_OK);
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn builtin_problem_round_trips() {
    for name in problem::BUILTIN_NAMES {
        let original = problem::builtin(name).unwrap();
        let json = ProblemFile::from_problem(&original).to_json();
        let back = ProblemFile::from_json(&json, name).unwrap().into_problem(name).unwrap();
        assert_eq!(back, original);
    }
}

#[test]
fn cartesian_tag_is_checked() {
    let file = ProblemFile {
        vertices: None,
        edges: vec![[1, 0], [2, 1], [3, 2]],
        datum: vec![0.0; 4],
        cartesian: Some(problem::CartesianTag { rows: 2, cols: 2, grid: None }),
    };
    assert!(file.into_problem("square").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn problem_files_round_trip(n in 1usize..14, extra in 0.0f64..0.7, seed in any::<u64>(), named in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut graph = random_connected_graph(&mut rng, n, extra);
        if named {
            graph = graph.with_names((0..n).map(|k| format!("x{k}")).collect()).unwrap();
        }
        let original = Problem { graph, datum: uniform_field(&mut rng, n, -1e6, 1e6) };
        let json = ProblemFile::from_problem(&original).to_json();
        let back = ProblemFile::from_json(&json, "generated").unwrap().into_problem("generated").unwrap();
        prop_assert_eq!(back, original);
    }

    #[test]
    fn trajectory_files_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e9f64..1e9, 3), 1..6), breaks in prop::collection::vec(0.0f64..1e3, 0..4)) {
        let rows: Vec<Vec<f64>> = rows
            .into_iter()
            .enumerate()
            .map(|(k, mut r)| { r.insert(0, k as f64 * 0.5); r })
            .collect();
        let file = TrajectoryFile {
            kind: "flow".into(),
            parameter: "t".into(),
            vertex_names: vec!["a".into(), "b".into(), "c".into()],
            rows,
            breakpoints: breaks,
        };
        prop_assert_eq!(TrajectoryFile::parse(&file.render()).unwrap(), file);
    }
}
