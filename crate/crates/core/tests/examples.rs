#[allow(dead_code)]
mod exact_trajectory {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/exact_trajectory.rs"
    ));
}

#[test]
fn exact_trajectory_runs() {
    exact_trajectory::run_example().expect("exact_trajectory example should run");
}

#[allow(dead_code)]
mod common_paths {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/common_paths.rs"
    ));
}

#[test]
fn common_paths_runs() {
    common_paths::run_example().expect("common_paths example should run");
}

#[allow(dead_code)]
mod strong_convergence {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/strong_convergence.rs"
    ));
}

#[test]
fn strong_convergence_runs() {
    strong_convergence::run_example().expect("strong_convergence example should run");
}

#[allow(dead_code)]
mod weak_error {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/weak_error.rs"
    ));
}

#[test]
fn weak_error_runs() {
    weak_error::run_example().expect("weak_error example should run");
}

#[allow(dead_code)]
mod strang_vs_lie {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/strang_vs_lie.rs"
    ));
}

#[test]
fn strang_vs_lie_runs() {
    strang_vs_lie::run_example().expect("strang_vs_lie example should run");
}

#[allow(dead_code)]
mod bimolecular_long_time {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/bimolecular_long_time.rs"
    ));
}

#[test]
fn bimolecular_long_time_runs() {
    bimolecular_long_time::run_example().expect("bimolecular_long_time example should run");
}

#[allow(dead_code)]
mod illposed_split {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/illposed_split.rs"
    ));
}

#[test]
fn illposed_split_runs() {
    illposed_split::run_example().expect("illposed_split example should run");
}

#[allow(dead_code)]
mod spatial_diffusion {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/spatial_diffusion.rs"
    ));
}

#[test]
fn spatial_diffusion_runs() {
    spatial_diffusion::run_example().expect("spatial_diffusion example should run");
}

#[allow(dead_code)]
mod model_file {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/model_file.rs"
    ));
}

#[test]
fn model_file_runs() {
    model_file::run_example().expect("model_file example should run");
}

#[allow(dead_code)]
mod poisson_paths {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/poisson_paths.rs"
    ));
}

#[test]
fn poisson_paths_runs() {
    poisson_paths::run_example().expect("poisson_paths example should run");
}
