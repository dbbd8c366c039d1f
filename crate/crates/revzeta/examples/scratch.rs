use revzeta::cylinder::CylinderConfig;
use revzeta::profile::make_gaussian_bump;
use revzeta::speczeta::{casimir_energy, delta_energy, delta_energy_cylinder};
use revzeta::{perturbed_profile, QuadratureSpec};

fn main() {
    let t0 = std::time::Instant::now();
    let cfg = CylinderConfig::new(1.0, 0.0, 1.0);
    let bump = make_gaussian_bump(0.5, 0.3);
    let tol = QuadratureSpec::new(1e-7, 1e-9, 28);

    let de = delta_energy_cylinder(&cfg, &bump, 200, &tol).unwrap();
    println!("dE_cyl = {:.9}  (expect ~ -0.36684783)", de.delta_e);
    println!("  breakdown: {:?}", de.term_breakdown);
    println!("  k_used = {}, tail = {:.2e}  [{:.1?}]", de.k_used, de.tail_bound, t0.elapsed());

    let t1 = std::time::Instant::now();
    let gen = delta_energy(&cfg.profile(), &bump, 200, &tol).unwrap();
    println!("dE_generic = {:.9}  diff = {:.2e}  [{:.1?}]", gen.delta_e, (gen.delta_e - de.delta_e).abs(), t1.elapsed());

    let t2 = std::time::Instant::now();
    let e0 = casimir_energy(&cfg.profile(), 200, &tol).unwrap();
    println!("E(cyl) = {:.9}, residue = {:.3e}  [{:.1?}]", e0.energy, e0.residue, t2.elapsed());
    println!("  z0 = {:.9}, zneq = {:.9}, k_used = {}", e0.ledger.z0, e0.ledger.zneq, e0.ledger.k_used);

    let t3 = std::time::Instant::now();
    let eps = 5e-3;
    let ep = casimir_energy(&perturbed_profile(&cfg.profile(), &bump, eps).unwrap(), 200, &tol).unwrap();
    let em = casimir_energy(&perturbed_profile(&cfg.profile(), &bump, -eps).unwrap(), 200, &tol).unwrap();
    let fd = (ep.energy - em.energy) / (2.0 * eps);
    println!("FD({eps}) = {:.9}  diff vs dE = {:.2e}  [{:.1?}]", fd, (fd - de.delta_e).abs(), t3.elapsed());
}
