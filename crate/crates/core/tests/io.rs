use tripent::entropy::partition_differential_entropy;
use tripent::io::*;
use tripent::sampler::{adaptive_histogram, sample_triplets, Domain, RefinementPolicy};
use tripent::spdc::{gaussian_triphoton_state, PhaseMatchSolution};
use tripent::{Execution, TripartiteGaussianState};

fn defaults_state() -> TripartiteGaussianState {
    let phase = PhaseMatchSolution::from_k_tilde(2.6e7, 3e-3).unwrap();
    gaussian_triphoton_state(&phase, 1e-3).unwrap()
}

#[test]
fn samples_round_trip_byte_identical() {
    let set = sample_triplets(&defaults_state(), Domain::Momentum, 5000, 42, Execution::Parallel).unwrap();
    let mut first = Vec::new();
    write_samples_csv(&set, &mut first).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("# domain=momentum\n# seed=42\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5001);

    let back = read_samples_csv(first.as_slice()).unwrap();
    assert_eq!(back, set);
    let mut second = Vec::new();
    write_samples_csv(&back, &mut second).unwrap();
    assert_eq!(first, second);
}

#[test]
fn histogram_round_trip_byte_identical() {
    let set = sample_triplets(&defaults_state(), Domain::Position, 20_000, 1, Execution::Parallel).unwrap();
    let h3 = adaptive_histogram(&set.samples, &RefinementPolicy::default()).unwrap();
    let extra = vec![("seed".to_string(), "1".to_string()), ("note".to_string(), "a, \"quoted\" value".to_string())];
    let mut first = Vec::new();
    write_histogram_csv(&h3, &extra, &mut first).unwrap();
    let (back, meta) = read_histogram_csv::<3, _>(first.as_slice()).unwrap();
    assert_eq!(back.leaves, h3.leaves);
    assert_eq!(back.truncated, h3.truncated);
    assert_eq!(&meta[2..], &extra[..]);
    let mut second = Vec::new();
    write_histogram_csv(&back, &extra, &mut second).unwrap();
    assert_eq!(first, second);

    let pts: Vec<[f64; 1]> = set.samples.iter().map(|t| [t[0]]).collect();
    let h1 = adaptive_histogram(&pts, &RefinementPolicy::default()).unwrap();
    let mut out = Vec::new();
    write_histogram_csv(&h1, &[], &mut out).unwrap();
    let (back, _) = read_histogram_csv::<1, _>(out.as_slice()).unwrap();
    assert_eq!(
        partition_differential_entropy(&back).unwrap(),
        partition_differential_entropy(&h1).unwrap()
    );
    assert!(read_histogram_csv::<3, _>(out.as_slice()).is_err());
}

#[test]
fn malformed_files_rejected() {
    assert!(read_samples_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
    let head = "# domain=position\n# seed=1\n# sigma_u_sq=1\n# sigma_v_sq=1\n# sigma_w_sq=1\n";
    assert!(read_samples_csv(format!("{head}a,b,c\n1,2,3\n").as_bytes()).is_ok());
    assert!(read_samples_csv(format!("{head}a,b,c\n1,2\n").as_bytes()).is_err());
    assert!(read_samples_csv(format!("{head}a,b,c\n1,x,3\n").as_bytes()).is_err());
    let bad_domain = head.replace("position", "spin");
    assert!(read_samples_csv(format!("{bad_domain}a,b,c\n").as_bytes()).is_err());
    assert!(read_histogram_csv::<1, _>("# dim=1\n# truncated=false\nlo_0,hi_0,mass,depth\n".as_bytes()).is_err());
}
