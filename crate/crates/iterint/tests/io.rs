use iterint::io::*;
use iterint_core::fourier_tableau::{sample_tableau, Tableau};
use iterint_core::integrals::{integral_set, IntegralSet};
use iterint_core::fourier_tableau::DirectConvolver;

fn bits(t: &Tableau) -> Vec<u64> {
    t.w1.iter().chain(&t.x).chain(&t.y).map(|v| v.to_bits()).collect()
}

fn odd_tableau() -> Tableau {
    let mut t = sample_tableau(2, 5, 9, 4).unwrap();
    t.x[0] = -0.0;
    t.x[1] = f64::MIN_POSITIVE / 4.0;
    t.y[2] = 1e300;
    t.w1[1] = -1.0 / 3.0;
    t
}

#[test]
fn binary_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.bin");
    let t = odd_tableau();
    write_tableau_binary(&path, &t).unwrap();
    let back = read_tableau_binary(&path).unwrap();
    assert_eq!(bits(&back), bits(&t));
    assert_eq!((back.q, back.p, back.seed, back.stream), (t.q, t.p, t.seed, t.stream));
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let t = odd_tableau();
    let mut buf = Vec::new();
    write_tableau_csv(&mut buf, &t).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("format,version,q,p,seed,stream\niterint-tableau,1,2,5,9,4\nkind,j,r,value\n"));
    let back = read_tableau_csv(buf.as_slice()).unwrap();
    assert_eq!(bits(&back), bits(&t));
    assert_eq!((back.seed, back.stream), (9, 4));
}

#[test]
fn corrupt_containers_are_rejected() {
    let t = sample_tableau(1, 2, 0, 0).unwrap();
    let bytes = t.to_bytes();
    assert!(Tableau::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    let mut bad = bytes.clone();
    bad[0] ^= 1;
    assert!(Tableau::from_bytes(&bad).is_err());

    let mut buf = Vec::new();
    write_tableau_csv(&mut buf, &t).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let missing: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
    assert!(read_tableau_csv(missing.as_bytes()).is_err());
    let dup = format!("{text}x,0,1,0.5\n");
    assert!(read_tableau_csv(dup.as_bytes()).is_err());
    let wrong = text.replace("iterint-tableau,1", "iterint-tableau,2");
    assert!(read_tableau_csv(wrong.as_bytes()).is_err());
    let out_of_range = text.replace("x,0,2,", "x,0,3,");
    assert!(read_tableau_csv(out_of_range.as_bytes()).is_err());
}

#[test]
fn integral_csv_lists_every_entry() {
    let sets: Vec<(u64, IntegralSet)> =
        (0..3).map(|i| (i, integral_set(&sample_tableau(2, 8, 1, i).unwrap(), &mut DirectConvolver))).collect();
    let mut buf = Vec::new();
    write_integral_csv(&mut buf, &sets).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("path_id,h,entity,indices,value\n"));
    let rows = read_integral_csv(buf.as_slice()).unwrap();
    assert_eq!(rows.len(), 3 * (2 + 4 + 8));
    for r in &rows {
        let set = &sets[r.path_id as usize].1;
        let idx: Vec<usize> = r.indices.split(' ').map(|s| s.parse().unwrap()).collect();
        let expected = match r.entity.as_str() {
            "dw" => set.dw[idx[0]],
            "i2" => set.i2_at(idx[0], idx[1]),
            "i3" => set.i3_at(idx[0], idx[1], idx[2]),
            other => panic!("unexpected entity {other}"),
        };
        assert_eq!(r.value.to_bits(), expected.to_bits());
        assert_eq!(r.h, 1.0);
    }
}
