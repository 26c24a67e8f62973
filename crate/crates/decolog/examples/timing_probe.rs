use decolog::logic::{ruleset, RuleSet};
use decolog::semantics::{parse_model, validate_ruleset, HarnessOptions};
use decolog::signature::parse_signature;

fn main() {
    let st_sig = parse_signature("base EV\nbase Val\nexception T : EV\nexception R : EV\nlocation X : Val\nlocation Y : Val\n").unwrap();
    let st_m = parse_model("carrier EV = v0 v1\ncarrier Val = w0 w1\nfuel 100\n", &st_sig).unwrap();
    let which = RuleSet::Combined;
    let mut total_t = std::time::Duration::ZERO;
    for rule in ruleset(which) {
        let t0 = std::time::Instant::now();
        let report = validate_ruleset(
            which,
            &st_m,
            &HarnessOptions { depth: 3, only_rules: vec![rule.name.into()], disable_sides_of: None },
        );
        let dt = t0.elapsed();
        total_t += dt;
        let total: usize = report.stats.iter().map(|s| s.instances).sum();
        println!("C  {:6} {:?} instances={total} clean={}", rule.name, dt, report.clean());
        if !report.clean() {
            for c in report.counterexamples.iter().take(3) {
                println!("  CEX: {}  [{}]", c.conclusion, c.detail);
            }
        }
    }
    println!("total {total_t:?}");
}
