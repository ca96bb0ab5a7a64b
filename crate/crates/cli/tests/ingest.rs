use choquet_probit::csv_io::{parse_dataset, write_dataset, write_dataset_to};
use choquet_probit::error::{exit, CliError};
use choquet_probit_core::dataset::ChoiceDataset;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HEADER: &str = "individual_id,task_id,alt_id,chosen,available,x1,x2";

fn parse(text: &str) -> Result<ChoiceDataset, CliError> {
    parse_dataset(text.as_bytes(), "test.csv")
}

fn line_of(e: &CliError) -> Option<u64> {
    match e {
        CliError::DataAt { line, .. } => Some(*line),
        _ => None,
    }
}

/// Valid long-format rows: `n_ind` individuals, two tasks each, three
/// alternatives.
fn rows(rng: &mut ChaCha8Rng, n_ind: u64) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for i in 1..=n_ind {
        for t in 1..=2u64 {
            let chosen = rng.random_range(1..=3u64);
            for a in 1..=3u64 {
                let x1: f64 = rng.random_range(0.0..10.0);
                let x2: f64 = rng.random_range(-5.0..5.0);
                out.push(vec![
                    i.to_string(),
                    t.to_string(),
                    a.to_string(),
                    u8::from(a == chosen).to_string(),
                    "1".into(),
                    x1.to_string(),
                    x2.to_string(),
                ]);
            }
        }
    }
    out
}

fn render(rows: &[Vec<String>]) -> String {
    let mut s = String::from(HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn sorted(mut d: ChoiceDataset) -> ChoiceDataset {
    d.tasks.sort_by_key(|t| (t.individual, t.task));
    d
}

#[test]
fn documented_malformations_are_located() {
    let good = "individual_id,task_id,alt_id,chosen,x1\n1,1,1,1,0.5\n1,1,2,0,0.7\n";
    assert!(parse(good).is_ok());
    let cases: &[(&str, &str, u64)] = &[
        ("missing column", "individual_id,task_id,chosen,x1\n1,1,1,0.5\n", 1),
        ("bad integer", "individual_id,task_id,alt_id,chosen,x1\n1,1,1,1,0.5\nx,1,2,0,0.7\n", 3),
        ("alternative zero", "individual_id,task_id,alt_id,chosen,x1\n1,1,0,1,0.5\n", 2),
        ("chosen not a flag", "individual_id,task_id,alt_id,chosen,x1\n1,1,1,2,0.5\n", 2),
        ("not a number", "individual_id,task_id,alt_id,chosen,x1\n1,1,1,1,abc\n", 2),
        ("non-finite", "individual_id,task_id,alt_id,chosen,x1\n1,1,1,1,0.5\n1,1,2,0,inf\n", 3),
        ("empty cell", "individual_id,task_id,alt_id,chosen,x1\n1,1,1,1,\n", 2),
        ("duplicate", "individual_id,task_id,alt_id,chosen,x1\n1,1,1,1,0.5\n1,1,2,0,0.7\n1,1,2,0,0.9\n", 4),
        ("no chosen", "individual_id,task_id,alt_id,chosen,x1\n1,1,1,0,0.5\n1,1,2,0,0.7\n", 2),
        ("two chosen", "individual_id,task_id,alt_id,chosen,x1\n1,1,1,1,0.5\n1,1,2,1,0.7\n", 3),
        (
            "chosen unavailable",
            "individual_id,task_id,alt_id,chosen,available,x1\n1,1,1,0,1,0.5\n1,1,2,1,0,0.7\n",
            3,
        ),
        ("ragged row", "individual_id,task_id,alt_id,chosen,x1\n1,1,1,1,0.5,9\n", 2),
    ];
    for (what, text, line) in cases {
        let e = parse(text).expect_err(what);
        assert_eq!(line_of(&e), Some(*line), "{what}: {e}");
        assert_eq!(e.exit_code(), exit::DATA, "{what}");
        assert!(e.to_string().contains(&format!("line {line}")), "{what}: {e}");
    }
}

#[test]
fn duplicate_row_cites_the_first_occurrence() {
    let text = "individual_id,task_id,alt_id,chosen,x1\n1,1,1,1,0.5\n1,1,2,0,0.7\n1,1,2,0,0.9\n";
    let e = parse(text).unwrap_err();
    assert!(e.to_string().contains("first on line 3"), "{e}");
}

#[test]
fn unavailable_rows_may_leave_cells_empty() {
    let text = "individual_id,task_id,alt_id,chosen,available,x1\n1,1,1,1,1,0.5\n1,1,2,0,0,\n1,1,3,0,1,0.2\n";
    let d = parse(text).unwrap();
    assert_eq!(d.tasks[0].available, vec![true, false, true]);
}

#[test]
fn export_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut r = rows(&mut rng, 5);
    r[4][4] = "0".into();
    r[4][3] = "0".into();
    r[3][3] = "0".into();
    r[5][3] = "1".into();
    let d = parse(&render(&r)).unwrap();
    let mut buf = Vec::new();
    write_dataset_to(&mut buf, &d).unwrap();
    let back = parse_dataset(buf.as_slice(), "export").unwrap();
    assert_eq!(d, back);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    write_dataset(&path, &d).unwrap();
    assert_eq!(choquet_probit::csv_io::read_dataset(&path).unwrap(), d);
}

#[derive(Debug, Clone, Copy)]
enum Benign {
    Shuffle,
    DropUnchosen,
    Whitespace,
    MarkUnavailable,
    NewNumber,
}

#[derive(Debug, Clone, Copy)]
enum Malformed {
    Garbage,
    Duplicate,
    NoChosen,
    TwoChosen,
    ChosenUnavailable,
}

fn benign() -> impl Strategy<Value = Benign> {
    prop_oneof![
        Just(Benign::Shuffle),
        Just(Benign::DropUnchosen),
        Just(Benign::Whitespace),
        Just(Benign::MarkUnavailable),
        Just(Benign::NewNumber),
    ]
}

fn malformed() -> impl Strategy<Value = Malformed> {
    prop_oneof![
        Just(Malformed::Garbage),
        Just(Malformed::Duplicate),
        Just(Malformed::NoChosen),
        Just(Malformed::TwoChosen),
        Just(Malformed::ChosenUnavailable),
    ]
}

fn pick_row(rng: &mut ChaCha8Rng, r: &[Vec<String>], chosen: bool) -> usize {
    let idx: Vec<usize> = (0..r.len()).filter(|&i| (r[i][3] == "1") == chosen).collect();
    idx[rng.random_range(0..idx.len())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn benign_mutations_are_accepted(seed: u64, n_ind in 1u64..6, m in benign()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = rows(&mut rng, n_ind);
        let original = sorted(parse(&render(&r)).unwrap());
        match m {
            Benign::Shuffle => {
                r.shuffle(&mut rng);
                let d = sorted(parse(&render(&r)).unwrap());
                prop_assert_eq!(d, original);
            }
            Benign::DropUnchosen => {
                let i = pick_row(&mut rng, &r, false);
                r.remove(i);
                prop_assert!(parse(&render(&r)).is_ok());
            }
            Benign::Whitespace => {
                let i = rng.random_range(0..r.len());
                let c = rng.random_range(0..r[i].len());
                r[i][c] = format!("  {} ", r[i][c]);
                let d = sorted(parse(&render(&r)).unwrap());
                prop_assert_eq!(d, original);
            }
            Benign::MarkUnavailable => {
                let i = pick_row(&mut rng, &r, false);
                r[i][4] = "0".into();
                let d = parse(&render(&r)).unwrap();
                prop_assert_eq!(d.tasks.iter().filter(|t| !t.all_available()).count(), 1);
            }
            Benign::NewNumber => {
                let i = rng.random_range(0..r.len());
                let v: f64 = rng.random_range(-1e6..1e6);
                r[i][5] = format!("{v:e}");
                prop_assert!(parse(&render(&r)).is_ok());
            }
        }
    }

    #[test]
    fn malformed_mutations_are_rejected(seed: u64, n_ind in 1u64..6, m in malformed()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = rows(&mut rng, n_ind);
        match m {
            Malformed::Garbage => {
                let i = rng.random_range(0..r.len());
                r[i][5 + rng.random_range(0..2)] = "1.2.3".into();
            }
            Malformed::Duplicate => {
                let i = rng.random_range(0..r.len());
                let mut dup = r[i].clone();
                dup[3] = "0".into();
                r.push(dup);
            }
            Malformed::NoChosen => {
                let i = pick_row(&mut rng, &r, true);
                r[i][3] = "0".into();
            }
            Malformed::TwoChosen => {
                let i = pick_row(&mut rng, &r, false);
                r[i][3] = "1".into();
            }
            Malformed::ChosenUnavailable => {
                let i = pick_row(&mut rng, &r, true);
                r[i][4] = "0".into();
            }
        }
        let e = parse(&render(&r)).unwrap_err();
        prop_assert!(line_of(&e).is_some(), "{}", e);
        prop_assert_eq!(e.exit_code(), exit::DATA);
    }
}
