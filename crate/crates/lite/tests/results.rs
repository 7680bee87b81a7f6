use lite::harness::{Algorithm, RunRecord, Status};
use lite::results::{read_records, write_records};
use proptest::prelude::*;

fn algorithm() -> impl Strategy<Value = Algorithm> {
    proptest::sample::select(Algorithm::ALL.to_vec())
}

fn record() -> impl Strategy<Value = RunRecord> {
    (
        "[a-z][a-z0-9_]{0,8}",
        algorithm(),
        proptest::option::of(1usize..200),
        0usize..1000,
        any::<u64>(),
        0usize..1000,
        proptest::option::of(0.0f64..=1.0),
        proptest::option::of("[a-z ,:\"]{1,12}"),
    )
        .prop_map(
            |(dataset, algorithm, budget, repeat, seed, labels_used, best_d2h, failure)| {
                let status = match (&best_d2h, failure) {
                    (None, Some(msg)) => Status::Failed(msg),
                    _ => Status::Ok,
                };
                RunRecord {
                    dataset,
                    algorithm,
                    budget,
                    repeat,
                    seed,
                    labels_used,
                    best_d2h: if status == Status::Ok {
                        best_d2h.or(Some(0.5))
                    } else {
                        None
                    },
                    status,
                }
            },
        )
}

proptest! {
    #[test]
    fn records_survive_a_round_trip(records in proptest::collection::vec(record(), 0..30)) {
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let back = read_records(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &records);
        let mut again = Vec::new();
        write_records(&mut again, &back).unwrap();
        prop_assert_eq!(again, buf);
    }
}
