//! Parse, validate and canonically render behavioural policies.
//!
//! ```bash
//! cargo run -p toykit --example parse_policies
//! ```

use toykit::policy::{
    builtin_policies, parse_policy, render_policy, validate_policy, BUILTIN_POLICY_SRC,
};

fn main() {
    // The five built-ins ship as policy-language source text.
    let set = builtin_policies();
    println!("built-in policies: {}", set.len());
    for policy in &set.policies {
        println!(
            "  {} gates `{}` behind fin({}) and done(.., {})",
            policy.name,
            policy.authorize.outcome,
            policy.fin_scope.tokens.join(","),
            policy.done_clause.action,
        );
    }

    // Round-trip: canonical text reparses to the identical AST.
    let p4 = set.get("Policy4").unwrap();
    let canonical = render_policy(p4);
    println!("\ncanonical Policy4:\n{canonical}");
    assert_eq!(&parse_policy(&canonical).unwrap(), p4);

    // Parse errors carry a position and the expected token.
    let broken = BUILTIN_POLICY_SRC.replacen(';', " ", 1);
    match toykit::policy::parse_policy_set(&broken) {
        Ok(_) => unreachable!("the mutation broke the grammar"),
        Err(e) => println!("parse error as expected -> {e}"),
    }

    // Validation violations are values, reported separately from parsing.
    let unbound = parse_policy(
        "policy P { fin(X); bind A as a; all i=0..t=A done(b,Act); authorize+(a,Out); }",
    )
    .unwrap();
    for violation in validate_policy(&unbound) {
        println!("validation violation -> {violation}");
    }
}
