use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use multiris_bench::{batch, labeled, model};
use multiris_core::learning::{build_dataset, EncoderKind};
use multiris_core::mlp::{to_matrix, train_epoch, OptimizerState, TrainHyper};

const CEN: [usize; 5] = [1539, 256, 128, 16, 16];
const IND: [usize; 5] = [387, 64, 32, 4, 4];

fn forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward_batch64");
    group.throughput(Throughput::Elements(64));
    for (name, dims) in [("pos_cen", &CEN), ("pos_ind", &IND)] {
        let m = model(dims);
        let x = to_matrix(&batch(64, dims[0]), dims[0]).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(name), &x, |b, x| b.iter(|| m.forward_batch(black_box(x.view())).unwrap()));
    }
    group.finish();
}

fn backward(c: &mut Criterion) {
    let mut group = c.benchmark_group("loss_and_grad_batch64");
    for (name, dims) in [("pos_cen", &CEN), ("pos_ind", &IND)] {
        let m = model(dims);
        let x = to_matrix(&batch(64, dims[0]), dims[0]).unwrap();
        let t = to_matrix(&batch(64, dims[4]), dims[4]).unwrap();
        group.bench_function(name, |b| b.iter(|| m.loss_and_grad_batch(black_box(x.view()), t.view(), 1e-4).unwrap()));
    }
    group.finish();
}

fn epoch(c: &mut Criterion) {
    let (exp, data) = labeled(1, 512);
    let ds = build_dataset(&exp.problem, EncoderKind::ChanInd(0), &data).unwrap();
    let x = to_matrix(&ds.standardized().unwrap(), ds.feature_width()).unwrap();
    let t = to_matrix(&ds.targets(), ds.target_width()).unwrap();
    let hyper = TrainHyper::default();
    let dims = [ds.feature_width(), 64, 32, 4, 4];
    let mut group = c.benchmark_group("train_epoch");
    group.sample_size(20);
    group.bench_function("chan_ind_512", |b| {
        b.iter_batched(
            || (model(&dims), OptimizerState::default()),
            |(mut m, mut s)| train_epoch(&mut m, &mut s, x.view(), t.view(), &hyper, 0).unwrap(),
            criterion::BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, forward, backward, epoch);
criterion_main!(benches);
