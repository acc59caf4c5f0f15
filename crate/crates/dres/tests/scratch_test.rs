// temp scratch: time the draw loop and count draw lengths
use rand::{Rng, SeedableRng};

#[test]
fn scratch_draw_cost() {
    let inst = dres::instances::builtin_fixture("test1").unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let t0 = std::time::Instant::now();
    let mut found = 0;
    for _ in 0..50 {
        let g = dres::evolution::random_stable_genotype(&inst, &mut rng, 0).unwrap();
        found += g.len();
    }
    println!("50 migrants in {:?} ({found})", t0.elapsed());

    // raw gen_range cost
    let t0 = std::time::Instant::now();
    let mut acc = 0usize;
    for _ in 0..10_000_000u64 {
        acc = acc.wrapping_add(rng.gen_range(0..4usize));
    }
    println!("10M usize gen_range in {:?} (acc {acc})", t0.elapsed());

    let t0 = std::time::Instant::now();
    let mut acc = 0u32;
    for _ in 0..10_000_000u64 {
        acc = acc.wrapping_add(rng.gen_range(0..4u32));
    }
    println!("10M u32 gen_range in {:?} (acc {acc})", t0.elapsed());

    use rand::distributions::{Distribution, Uniform};
    let uniform = Uniform::new(0u32, 4);
    let t0 = std::time::Instant::now();
    let mut acc = 0u32;
    for _ in 0..10_000_000u64 {
        acc = acc.wrapping_add(uniform.sample(&mut rng));
    }
    println!("10M prebuilt Uniform<u32> in {:?} (acc {acc})", t0.elapsed());
}
