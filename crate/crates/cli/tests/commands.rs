use std::path::Path;
use std::process::{Command, Output};

use voxanim_cli::bench::BenchReport;
use voxanim_cli::error::{EXIT_IO, EXIT_PARSE, EXIT_USAGE, EXIT_VALIDATION};
use voxanim_core::ingest::write_binvox;
use voxanim_core::{SvoModel, VoxelGrid};

fn voxanim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voxanim"))
        .args(args)
        .current_dir(cwd)
        .env_remove("VOXANIM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn info_field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

#[test]
fn menger_level_three_has_8000_leaves() {
    let dir = tempfile::tempdir().unwrap();
    let o = voxanim(
        &[
            "build",
            "--shape",
            "menger",
            "--depth",
            "3",
            "--out",
            "sponge.svo",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let info = voxanim(&["info", "sponge.svo"], dir.path());
    assert!(info.status.success());
    let text = stdout(&info);
    assert_eq!(info_field(&text, "leaf_count"), "8000");
    let on_disk = std::fs::metadata(dir.path().join("sponge.svo"))
        .unwrap()
        .len();
    assert_eq!(info_field(&text, "byte_size"), on_disk.to_string());
    assert!(info_field(&text, "animation_state_bytes").starts_with("120 "));
}

#[test]
fn full_binvox_cube_has_full_root() {
    let dir = tempfile::tempdir().unwrap();
    let mut grid = VoxelGrid::with_depth(1).unwrap();
    for i in 0..8 {
        grid.set(i >> 2, i >> 1 & 1, i & 1, true);
    }
    std::fs::write(dir.path().join("cube.binvox"), write_binvox(&grid)).unwrap();
    let o = voxanim(
        &[
            "build",
            "--input",
            "cube.binvox",
            "--depth",
            "1",
            "--out",
            "cube.svo",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let model =
        SvoModel::deserialize(&std::fs::read(dir.path().join("cube.svo")).unwrap()).unwrap();
    assert_eq!(model.nodes[0].valid_mask, 0xFF);
    assert_eq!(model.nodes[0].leaf_mask, 0xFF);

    let deeper = voxanim(
        &[
            "build",
            "--input",
            "cube.binvox",
            "--depth",
            "4",
            "--out",
            "x.svo",
        ],
        dir.path(),
    );
    assert_eq!(deeper.status.code(), Some(EXIT_USAGE));
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = voxanim(
        &["build", "--input", "absent.binvox", "--out", "x.svo"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(EXIT_IO));
    assert!(stderr(&o).contains("absent.binvox"));
    assert!(!dir.path().join("x.svo").exists());
}

#[test]
fn exit_codes_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(voxanim(&["frobnicate"], p).status.code(), Some(EXIT_USAGE));
    assert_eq!(
        voxanim(&["bench", "--mode", "turbo"], p).status.code(),
        Some(EXIT_USAGE)
    );

    std::fs::write(p.join("bad.binvox"), b"#binvox 1\ndim 2 2 2\ndata\n\x01").unwrap();
    let o = voxanim(&["build", "--input", "bad.binvox", "--out", "x.svo"], p);
    assert_eq!(o.status.code(), Some(EXIT_PARSE), "{}", stderr(&o));

    std::fs::write(p.join("junk.svo"), b"SVOX").unwrap();
    assert_eq!(
        voxanim(&["info", "junk.svo"], p).status.code(),
        Some(EXIT_PARSE)
    );

    std::fs::write(p.join("bad.json"), "{ not json").unwrap();
    let o = voxanim(&["render", "--scene", "bad.json", "--out", "f"], p);
    assert_eq!(o.status.code(), Some(EXIT_PARSE));

    std::fs::write(
        p.join("orphan.json"),
        r#"{"objects": [{"id": 0, "model": "m"}]}"#,
    )
    .unwrap();
    let o = voxanim(&["render", "--scene", "orphan.json", "--out", "f"], p);
    assert_eq!(o.status.code(), Some(EXIT_VALIDATION), "{}", stderr(&o));

    let o = voxanim(
        &[
            "build", "--shape", "menger", "--depth", "7", "--out", "x.svo",
        ],
        p,
    );
    assert_eq!(o.status.code(), Some(EXIT_VALIDATION));
}

#[test]
fn root_only_model_info() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.svo"), SvoModel::empty(3).serialize()).unwrap();
    let o = voxanim(&["info", "empty.svo"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(info_field(&stdout(&o), "node_count"), "1");
}

/// Two objects, one of them animated unless `static_only`.
fn write_scene(dir: &Path, static_only: bool) {
    let o = voxanim(
        &[
            "build", "--shape", "sphere", "--depth", "4", "--out", "ball.svo",
        ],
        dir,
    );
    assert!(o.status.success());
    let tracks = if static_only {
        ""
    } else {
        r#", "tracks": [{"object": 2, "keys": [
            {"time": 0, "translation": [1, 0, 0]},
            {"time": 1, "translation": [1, 1, 0], "rotation": {"axis": [0, 1, 0], "angle_deg": 40}}]}]"#
    };
    let doc = format!(
        r#"{{"models": {{"ball": "ball.svo"}},
            "objects": [{{"id": 1, "model": "ball", "translation": [-1, 0, 0]}},
                        {{"id": 2, "model": "ball", "translation": [1, 0, 0]}}]{tracks},
            "camera": {{"position": [0, 0, 6]}}}}"#
    );
    std::fs::write(dir.join("scene.json"), doc).unwrap();
}

fn read(p: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn static_scene_frames_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_scene(p, true);
    let o = voxanim(
        &[
            "render",
            "--scene",
            "scene.json",
            "--out",
            "frames",
            "--size",
            "40x30",
            "--frames",
            "3",
            "--threads",
            "2",
        ],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let f0 = read(p.join("frames/frame_00000.ppm"));
    assert!(f0.starts_with(b"P6\n40 30\n255\n"));
    assert_eq!(f0, read(p.join("frames/frame_00001.ppm")));
    assert_eq!(f0, read(p.join("frames/frame_00002.ppm")));
    let csv = stdout(&o);
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("mode,frame,ms,rays,sphere_tests,svo_traversals,pixels_reused\n"));
}

#[test]
fn hbo_toggle_changes_stats_not_pixels() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_scene(p, false);
    let common = [
        "render",
        "--scene",
        "scene.json",
        "--size",
        "48x32",
        "--frames",
        "4",
        "--fps",
        "8",
    ];
    let on = voxanim(
        &[&common[..], &["--out", "on", "--csv", "on.csv"]].concat(),
        p,
    );
    let off = voxanim(
        &[
            &common[..],
            &["--out", "off", "--no-hbo", "--csv", "off.csv"],
        ]
        .concat(),
        p,
    );
    assert!(on.status.success() && off.status.success());
    for k in 0..4 {
        let name = format!("frame_{k:05}.ppm");
        assert_eq!(
            read(p.join("on").join(&name)),
            read(p.join("off").join(&name)),
            "{name}"
        );
    }
    let reused = |file: &str| -> u64 {
        std::fs::read_to_string(p.join(file))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
            .sum()
    };
    assert!(reused("on.csv") > 0);
    assert_eq!(reused("off.csv"), 0);
}

#[test]
fn single_frame_writes_one_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = voxanim(
        &[
            "render", "--out", "one", "--size", "16x12", "--csv", "s.csv",
        ],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let names: Vec<String> = std::fs::read_dir(p.join("one"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names, ["frame_00000.ppm"]);
}

#[test]
fn failed_render_removes_written_frames() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // a directory squatting on the second frame's name makes its write fail
    std::fs::create_dir_all(p.join("out/frame_00001.ppm/blocker")).unwrap();
    let o = voxanim(
        &[
            "render", "--out", "out", "--size", "8x6", "--frames", "3", "--csv", "s.csv",
        ],
        p,
    );
    assert_eq!(o.status.code(), Some(EXIT_IO));
    assert!(!p.join("out/frame_00000.ppm").exists());
    assert!(!p.join("out/frame_00002.ppm").exists());
    assert!(!p.join("out/frame_00000.ppm.partial").exists());
}

#[test]
fn bench_csv_parses() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = voxanim(
        &[
            "bench",
            "--mode",
            "animated-opt",
            "--frames",
            "3",
            "--size",
            "32x24",
            "--csv",
            "b.csv",
            "--threads",
            "1",
        ],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report =
        BenchReport::parse_csv(&std::fs::read_to_string(p.join("b.csv")).unwrap()).unwrap();
    assert_eq!(report.samples.len(), 3);
    assert!((report.fps * report.avg_ms - 1000.0).abs() < 1e-6);
    assert_eq!(stdout(&o).trim(), report.summary_line());

    let o = voxanim(
        &[
            "bench",
            "--mode",
            "static",
            "--seconds",
            "0.01",
            "--size",
            "8x8",
        ],
        p,
    );
    assert!(o.status.success());
    let report = BenchReport::parse_csv(&stdout(&o)).unwrap();
    assert!(!report.samples.is_empty());
}
