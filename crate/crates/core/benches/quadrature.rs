use std::f64::consts::FRAC_1_SQRT_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hopflab::theorems::{energy_of_field, volume_of_field, FieldSurvey};
use hopflab::{hopf, lambda_field, solid_torus, ExecMode, QuadratureSpec, Region, SphereDim, VolumeForm};

fn modes() -> Vec<ExecMode> {
    let mut m = vec![ExecMode::Sequential];
    if cfg!(feature = "parallel") {
        m.push(ExecMode::Parallel);
    }
    m
}

fn tensor_volume(c: &mut Criterion) {
    let region = Region::Chart(solid_torus(FRAC_1_SQRT_2).unwrap());
    let field = lambda_field(2.0).unwrap();
    let mut group = c.benchmark_group("lambda_volume_solid_torus");
    group.sample_size(10);
    for mode in modes() {
        let q = QuadratureSpec::with_nodes(vec![32, 32, 24]).exec(mode);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &q, |b, q| {
            b.iter(|| volume_of_field(black_box(&field), &region, q, VolumeForm::FullGram).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo_energy(c: &mut Criterion) {
    let dim = SphereDim::new(2).unwrap();
    let region = Region::sphere(dim);
    let field = hopf(dim);
    let mut group = c.benchmark_group("hopf_energy_s5_monte_carlo");
    group.sample_size(10);
    for mode in modes() {
        let q = QuadratureSpec::monte_carlo(50_000, 1).exec(mode);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &q, |b, q| {
            b.iter(|| energy_of_field(black_box(&field), &region, q).unwrap())
        });
    }
    group.finish();
}

fn custom_field_survey(c: &mut Criterion) {
    // finite-difference covariant derivatives dominate here
    let field = hopflab::FieldDefinition::from_expressions("bench", &["-y + 0.1*x*z", "x", "-w", "z + 0.2*y^2"]).unwrap();
    let region = Region::Chart(solid_torus(0.6).unwrap());
    let mut group = c.benchmark_group("custom_field_survey");
    group.sample_size(10);
    for mode in modes() {
        let q = QuadratureSpec::with_nodes(vec![16, 16, 12]).exec(mode);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &q, |b, q| {
            b.iter(|| FieldSurvey::new(black_box(&field), &region, q).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, tensor_volume, monte_carlo_energy, custom_field_survey);
criterion_main!(benches);
