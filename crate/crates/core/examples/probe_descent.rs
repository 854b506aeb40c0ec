use willmore::optimizer::{minimize, SolveConfig};

fn main() {
    let mut config = SolveConfig::new(1.0, 192);
    config.grad_tol = 1e-5;
    config.max_iters = 400;
    config.noise_amp = 1e-4;
    match minimize(&config) {
        Ok(r) => {
            println!("converged={} iters={} pg={:.4e} W={:.8}", r.converged, r.iterations, r.projected_grad_norm, r.beta_hat);
            for (k, rec) in r.history.iter().enumerate() {
                if k % 20 == 0 || k + 3 > r.history.len() {
                    println!("  it {k:4}  W={:.10}  step={:.3e} reparam={}", rec.willmore, rec.step, rec.reparam);
                }
            }
        }
        Err(e) => println!("error: {e}"),
    }
}
