use pflid::dataset::Dataset;
use pflid::identification::*;

fn main() {
    let ds = Dataset::load_file(std::path::Path::new("/tmp/pflid_smoke/ds20.json")).unwrap();
    let spec: StructureSpec = serde_json::from_str(
        &std::fs::read_to_string("/tmp/pflid_smoke/structure.json").unwrap(),
    ).unwrap();
    let t0 = std::time::Instant::now();
    let trail = fit_support_matching(&ds, &spec);
    eprintln!("trail len {} in {:?}", trail.len(), t0.elapsed());
    for (i, th) in trail.iter().enumerate().take(4) {
        match model_from_theta(th, &spec, 2) {
            Ok(m) => {
                let l1 = evaluate_loss(&m, &ds, Norm::L1).unwrap();
                eprintln!("cand {i}: eval_l1 = {l1:.3e}");
            }
            Err(e) => eprintln!("cand {i}: invalid: {e}"),
        }
    }
}
