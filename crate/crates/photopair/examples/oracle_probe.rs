use num_complex::Complex64;
use ndarray::Array2;
use photopair::cascade::CascadeModel;
use photopair::collision::{SublevelDensityMatrix, TargetManifold};
use photopair::oracle::{default_mode_grid, validate_against_cascade, IterationOrder, TruncatedSystem};

fn structured_pure_rho() -> SublevelDensityMatrix {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let psi = [c(0.50, 0.00), c(0.00, 0.40), c(0.60, 0.00), c(-0.20, 0.10), c(0.30, 0.10)];
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut rho = Array2::<Complex64>::zeros((5, 5));
    for i in 0..5 {
        for j in 0..5 {
            rho[(i, j)] = psi[i] * psi[j].conj() / (norm * norm);
        }
    }
    SublevelDensityMatrix::new(TargetManifold::hydrogen_4d(), rho, 1.0).unwrap()
}

fn main() {
    let model = CascadeModel::hydrogen_4d_3p_1s().unwrap();
    let rho = structured_pure_rho();
    let full = default_mode_grid(&model).unwrap();
    let sys_f = TruncatedSystem::new(&model, &full, 1e-3).unwrap();
    let t2 = std::time::Instant::now();
    let check_f =
        validate_against_cascade(&sys_f, &rho, IterationOrder::default(), 10_000.0, 0.2).unwrap();
    println!(
        "full grid t=1e4: pairs {}, deviation {:.3e}, propagate {:.1} s",
        check_f.pair_count,
        check_f.max_deviation,
        t2.elapsed().as_secs_f64()
    );
}
