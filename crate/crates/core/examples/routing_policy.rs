//! Inspect the default routing rules, then route with an edited policy.

use symphony::routing::{default_policy, select_backends, RoutingPolicy};
use symphony::shape::{QueryLabel, Shape};

fn main() {
    let policy = default_policy();
    for shape in Shape::ALL {
        for (modifiers, optional) in [(false, false), (true, false), (false, true)] {
            let label = QueryLabel::synthetic(shape, modifiers, optional, false);
            println!(
                "{:<22} modifiers={modifiers:<5} optional={optional:<5} -> {}",
                shape.name(),
                select_backends(&label, &policy)
            );
        }
    }

    // chains go to the columnar slot instead
    let text = policy
        .to_toml()
        .unwrap()
        .replace("targets = [\"btree-store\"]", "targets = [\"columnar-store\"]");
    let edited = RoutingPolicy::from_toml(&text).unwrap();
    edited.validate().unwrap();
    let chain = QueryLabel::synthetic(Shape::SubjectObject, false, false, false);
    println!("edited: {}", select_backends(&chain, &edited));
}
