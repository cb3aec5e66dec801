//! Canonical pretty-printer: one clause per line, two-space indent,
//! no spaces inside argument lists. `parse(render(ast))` equals `ast`
//! for every valid AST, and rendering parsed text is idempotent.

use super::{PolicyAst, PolicySet};

pub fn render_policy(ast: &PolicyAst) -> String {
    let mut out = String::new();
    out.push_str("policy ");
    out.push_str(&ast.name);
    out.push_str(" {\n");

    out.push_str("  fin(");
    out.push_str(&ast.fin_scope.tokens.join(","));
    if let Some(q) = &ast.fin_scope.qualifier {
        out.push(':');
        out.push_str(q);
    }
    out.push_str(");\n");

    for b in &ast.bindings {
        out.push_str("  bind ");
        out.push_str(&b.module);
        out.push_str(" as ");
        out.push_str(&b.alias);
        out.push_str(";\n");
    }

    let d = &ast.done_clause;
    out.push_str(&format!(
        "  all i={}..t={} done({},{});\n",
        d.lower,
        d.bound_tokens.join(","),
        d.args.join(","),
        d.action
    ));

    out.push_str(&format!(
        "  authorize+({},{});\n",
        ast.authorize.args.join(","),
        ast.authorize.outcome
    ));

    out.push_str("}\n");
    out
}

/// Policies separated by one blank line.
pub fn render_policy_set(set: &PolicySet) -> String {
    set.policies
        .iter()
        .map(render_policy)
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use crate::policy::{
        builtin_policies, parse_policy, parse_policy_set, render_policy, render_policy_set,
        Binding, PolicyAst,
    };

    #[test]
    fn builtins_round_trip_through_canonical_text() {
        for p in &builtin_policies().policies {
            let text = render_policy(p);
            let reparsed = parse_policy(&text).unwrap();
            assert_eq!(&reparsed, p, "canonical text:\n{text}");
            // Canonical form is a fixed point.
            assert_eq!(render_policy(&reparsed), text);
        }
    }

    #[test]
    fn renders_bindings_in_declaration_order() {
        let ast = PolicyAst {
            name: "P".into(),
            fin_scope: crate::policy::FinScope {
                tokens: vec!["X".into()],
                qualifier: None,
            },
            bindings: vec![
                Binding {
                    module: "First".into(),
                    alias: "a".into(),
                },
                Binding {
                    module: "Second".into(),
                    alias: "b".into(),
                },
                Binding {
                    module: "Third".into(),
                    alias: "c".into(),
                },
            ],
            done_clause: crate::policy::DoneClause {
                lower: 0,
                bound_tokens: vec!["X".into()],
                args: vec!["a".into(), "b".into(), "c".into()],
                action: "Act".into(),
            },
            authorize: crate::policy::AuthorizeClause {
                args: vec!["a".into()],
                outcome: "Out".into(),
            },
        };
        let text = render_policy(&ast);
        let first = text.find("bind First as a;").unwrap();
        let second = text.find("bind Second as b;").unwrap();
        let third = text.find("bind Third as c;").unwrap();
        assert!(first < second && second < third);
        assert_eq!(parse_policy(&text).unwrap(), ast);
    }

    #[test]
    fn set_rendering_reparses_to_the_same_set() {
        let set = builtin_policies();
        let text = render_policy_set(&set);
        assert_eq!(parse_policy_set(&text).unwrap(), set);
    }
}
