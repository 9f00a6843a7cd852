use maple::linalg::{sq_dist, Matrix};
use maple::nn::{mine_triplets, MlpClassifier};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;

struct Case {
    model: MlpClassifier,
    x: Matrix,
    labels: Vec<usize>,
    triplets: Vec<(usize, usize, usize)>,
    weight: f64,
    margin: f64,
}

fn case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input = rng.random_range(2..6);
    let hidden: Vec<usize> = (0..rng.random_range(1..3)).map(|_| rng.random_range(3..8)).collect();
    let emb = rng.random_range(2..5);
    let classes = rng.random_range(2..5);
    let n = rng.random_range(4..10);
    let model = MlpClassifier::new(input, &hidden, emb, classes, seed).unwrap();
    let x = Matrix::from_vec(n, input, (0..n * input).map(|_| rng.random_range(-2.0..2.0)).collect());
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let triplets = mine_triplets(&labels, seed);
    Case {
        model,
        x,
        labels,
        triplets,
        weight: rng.random_range(0.1..2.0),
        margin: rng.random_range(0.0..2.0),
    }
}

/// Which triplet hinges are open at the current parameters.
fn hinge_pattern(c: &Case, m: &MlpClassifier) -> Vec<bool> {
    let e = m.embed(&c.x).unwrap();
    c.triplets
        .iter()
        .map(|&(a, p, n)| {
            sq_dist(e.row(a), e.row(p)).sqrt() - sq_dist(e.row(a), e.row(n)).sqrt() + c.margin > 0.0
        })
        .collect()
}

fn total(c: &Case, m: &MlpClassifier) -> f64 {
    m.loss(&c.x, &c.labels, &c.triplets, c.weight, c.margin).unwrap().total
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut checked = 0;
    let mut skipped = 0;
    for seed in 0..50 {
        let c = case(seed);
        let (_, grad) = c
            .model
            .loss_and_grad(&c.x, &c.labels, &c.triplets, c.weight, c.margin)
            .unwrap();
        let analytic = grad.flatten();
        let base = c.model.flat_params();
        let relu = c.model.activation_pattern(&c.x).unwrap();
        let hinge = hinge_pattern(&c, &c.model);
        let mut probe = c.model.clone();
        for (j, &a) in analytic.iter().enumerate() {
            let mut evaluate = |delta: f64| {
                let mut p = base.clone();
                p[j] += delta;
                probe.set_flat_params(&p);
                let smooth = probe.activation_pattern(&c.x).unwrap() == relu && hinge_pattern(&c, &probe) == hinge;
                (total(&c, &probe), smooth)
            };
            let (plus, s1) = evaluate(H);
            let (minus, s2) = evaluate(-H);
            if !(s1 && s2) {
                skipped += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * H);
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-6);
            assert!(rel < 1e-4, "seed {seed} param {j}: analytic {a} numeric {numeric} rel {rel}");
            checked += 1;
        }
    }
    assert!(checked > 20 * skipped.max(1), "checked {checked} skipped {skipped}");
}
