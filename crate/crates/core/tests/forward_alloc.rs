use tailsitter::alloc_probe::{count_allocations, CountingAlloc};
use tailsitter::mlp::{InitScheme, Network, Topology};

#[global_allocator]
static ALLOC: CountingAlloc = CountingAlloc;

#[test]
fn forward_does_not_allocate() {
    for biases in [false, true] {
        let net = Network::init(Topology::standard(), 11, InitScheme::UniformXavier, biases);
        let mut scratch = net.scratch();
        let (sum, allocs) = count_allocations(|| {
            let mut acc = 0.0;
            for k in 0..10_000 {
                let u = (k % 180) as f64 * 0.1;
                let w = (k % 50) as f64 * 0.1 - 1.0;
                acc += net.forward(&[u, w], &mut scratch);
            }
            acc
        });
        assert!(sum.is_finite());
        assert_eq!(allocs, 0, "biases={biases}");
    }
}

#[test]
fn probe_sees_allocations() {
    let (v, allocs) = count_allocations(|| vec![1u8; 64]);
    assert_eq!(v.len(), 64);
    assert!(allocs >= 1);
}
