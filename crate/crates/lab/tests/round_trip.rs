use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shortcut_core::engine::{construct_full, EngineConfig};
use shortcut_core::generators::{assign_weights, gen_comb, gen_ktree, gen_parts_random};
use shortcut_core::graph::bfs_tree;
use shortcut_lab::io;

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn instance_files_round_trip(n in 4usize..150, width in 1usize..4, k in 1usize..20, seed in any::<u64>(), weighted in any::<bool>()) {
        prop_assume!(n > width && k <= n);
        let mut g = gen_ktree(n, width, seed).unwrap();
        if weighted {
            g = assign_weights(&g, seed).unwrap();
        }
        let text = io::write_graph(&g);
        let back = io::parse_graph(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(io::write_graph(&back), text);

        let p = gen_parts_random(&g, k, seed).unwrap();
        let text = io::write_partition(&p);
        prop_assert_eq!(io::write_partition(&io::parse_partition(&text, n).unwrap()), text);

        let t = bfs_tree(&g, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = construct_full(&g, &t, &p, &EngineConfig::default(), &mut rng).unwrap();
        let text = io::write_shortcut(&c.shortcut);
        prop_assert_eq!(io::write_shortcut(&io::parse_shortcut(&text).unwrap()), text);
    }

    #[test]
    fn certificates_round_trip(columns in 9usize..16, rows in 12usize..30, seed in any::<u64>()) {
        let (g, p) = gen_comb(columns, rows).unwrap();
        let t = bfs_tree(&g, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = construct_full(&g, &t, &p, &EngineConfig::default(), &mut rng).unwrap();
        let text = io::write_certificates(&c.certificates);
        let back = io::parse_certificates(&text).unwrap();
        prop_assert_eq!(&back, &c.certificates);
        prop_assert_eq!(io::write_certificates(&back), text);
    }
}
