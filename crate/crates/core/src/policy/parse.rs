//! Recursive-descent parser for the policy grammar.
//!
//! The grammar is LL(1); one token of lookahead decides every production:
//!
//! ```text
//! policyset  = { policy } ;
//! policy     = "policy" IDENT "{" fin { bind } done then "}" ;
//! fin        = "fin" "(" IDENT { "," IDENT } [ ":" IDENT ] ")" ";" ;
//! bind       = "bind" IDENT "as" IDENT ";" ;
//! done       = "all" "i" "=" INT ".." "t" "=" IDENT { "," IDENT }
//!              "done" "(" IDENT { "," IDENT } "," IDENT ")" ";" ;
//! then       = "authorize+" "(" IDENT { "," IDENT } "," IDENT ")" ";" ;
//! ```
//!
//! Parsing populates the AST exactly from surface syntax; cross-clause
//! checks (alias binding, duplicates, name uniqueness) live in
//! [`validate_policy`](super::validate_policy) and are reported separately.

use super::lex::{Keyword, Lexer, ParseError, Pos, Spanned, Token};
use super::{AuthorizeClause, Binding, DoneClause, FinScope, PolicyAst, PolicySet};

struct Parser {
    tokens: Vec<Spanned>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at].token
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].token.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        ParseError::new(self.pos(), expected, self.peek())
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(want.to_string()))
        }
    }

    fn expect_keyword(&mut self, kw: Keyword) -> Result<(), ParseError> {
        self.expect(Token::Keyword(kw))
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Token::Ident(_) => match self.bump() {
                Token::Ident(s) => Ok(s),
                _ => unreachable!(),
            },
            _ => Err(self.error("an identifier")),
        }
    }

    /// An identifier with a required spelling (the contextual `i` / `t`).
    fn ident_spelled(&mut self, spelling: &str) -> Result<(), ParseError> {
        match self.peek() {
            Token::Ident(s) if s == spelling => {
                self.bump();
                Ok(())
            }
            _ => Err(self.error(format!("`{spelling}`"))),
        }
    }

    fn int(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Token::Int(n) => {
                let n = *n;
                self.bump();
                Ok(n)
            }
            _ => Err(self.error("an integer")),
        }
    }

    /// `IDENT { "," IDENT }`
    fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.ident()?];
        while *self.peek() == Token::Comma {
            self.bump();
            out.push(self.ident()?);
        }
        Ok(out)
    }

    /// A parenthesized identifier list whose final element is split off
    /// (the `done` action / `authorize+` outcome).
    fn args_then_last(&mut self) -> Result<(Vec<String>, String), ParseError> {
        self.expect(Token::LParen)?;
        let mut items = self.ident_list()?;
        if items.len() < 2 {
            return Err(self.error("`,`"));
        }
        self.expect(Token::RParen)?;
        let last = items.pop().unwrap();
        Ok((items, last))
    }

    fn fin(&mut self) -> Result<FinScope, ParseError> {
        self.expect_keyword(Keyword::Fin)?;
        self.expect(Token::LParen)?;
        let tokens = self.ident_list()?;
        let qualifier = if *self.peek() == Token::Colon {
            self.bump();
            Some(self.ident()?)
        } else {
            None
        };
        self.expect(Token::RParen)?;
        self.expect(Token::Semi)?;
        Ok(FinScope { tokens, qualifier })
    }

    fn bind(&mut self) -> Result<Binding, ParseError> {
        self.expect_keyword(Keyword::Bind)?;
        let module = self.ident()?;
        self.expect_keyword(Keyword::As)?;
        let alias = self.ident()?;
        self.expect(Token::Semi)?;
        Ok(Binding { module, alias })
    }

    fn done(&mut self) -> Result<DoneClause, ParseError> {
        self.expect_keyword(Keyword::All)?;
        self.ident_spelled("i")?;
        self.expect(Token::Eq)?;
        let lower = self.int()?;
        self.expect(Token::DotDot)?;
        self.ident_spelled("t")?;
        self.expect(Token::Eq)?;
        let bound_tokens = self.ident_list()?;
        self.expect_keyword(Keyword::Done)?;
        let (args, action) = self.args_then_last()?;
        self.expect(Token::Semi)?;
        Ok(DoneClause {
            lower,
            bound_tokens,
            args,
            action,
        })
    }

    fn authorize(&mut self) -> Result<AuthorizeClause, ParseError> {
        self.expect_keyword(Keyword::Authorize)?;
        self.expect(Token::Plus)?;
        let (args, outcome) = self.args_then_last()?;
        self.expect(Token::Semi)?;
        Ok(AuthorizeClause { args, outcome })
    }

    fn policy(&mut self) -> Result<PolicyAst, ParseError> {
        self.expect_keyword(Keyword::Policy)?;
        let name = self.ident()?;
        self.expect(Token::LBrace)?;
        let fin_scope = self.fin()?;
        let mut bindings = Vec::new();
        while *self.peek() == Token::Keyword(Keyword::Bind) {
            bindings.push(self.bind()?);
        }
        let done_clause = self.done()?;
        let authorize = self.authorize()?;
        self.expect(Token::RBrace)?;
        Ok(PolicyAst {
            name,
            fin_scope,
            bindings,
            done_clause,
            authorize,
        })
    }
}

/// Parses exactly one policy; trailing input is an error.
pub fn parse_policy(src: &str) -> Result<PolicyAst, ParseError> {
    let mut p = Parser {
        tokens: Lexer::new(src).tokenize()?,
        at: 0,
    };
    let ast = p.policy()?;
    p.expect(Token::Eof)?;
    Ok(ast)
}

/// Parses zero or more policies up to end of input.
pub fn parse_policy_set(src: &str) -> Result<PolicySet, ParseError> {
    let mut p = Parser {
        tokens: Lexer::new(src).tokenize()?,
        at: 0,
    };
    let mut policies = Vec::new();
    while *p.peek() != Token::Eof {
        policies.push(p.policy()?);
    }
    Ok(PolicySet { policies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::validate_policy;

    #[test]
    fn parses_the_voice_modulation_policy_shape() {
        let src = "\
policy Policy4 {
  fin(ChildBehaviour);
  bind MaleVoice as MV;
  bind FemaleVoice as FV;
  all i=0..t=MaleVoice,FemaleVoice done(MV,FV,Submit);
  authorize+(MV,FV,VoiceModulation);
}";
        let ast = parse_policy(src).unwrap();
        assert_eq!(ast.name, "Policy4");
        assert_eq!(
            ast.bindings,
            vec![
                Binding {
                    module: "MaleVoice".into(),
                    alias: "MV".into()
                },
                Binding {
                    module: "FemaleVoice".into(),
                    alias: "FV".into()
                },
            ]
        );
        assert_eq!(ast.done_clause.action, "Submit");
        assert_eq!(ast.authorize.outcome, "VoiceModulation");
    }

    #[test]
    fn parses_qualified_fin_scope() {
        let src = "\
policy Policy3 {
  fin(Energy,Maintain:Essential);
  bind Voice as V;
  bind Modulation as M;
  all i=0..t=Matching done(V,M,SuccessfulCommunication);
  authorize+(V,M,Communication);
}";
        let ast = parse_policy(src).unwrap();
        assert_eq!(ast.fin_scope.tokens, vec!["Energy", "Maintain"]);
        assert_eq!(ast.fin_scope.qualifier.as_deref(), Some("Essential"));
        assert_eq!(ast.done_clause.action, "SuccessfulCommunication");
    }

    #[test]
    fn unbound_alias_parses_but_fails_validation() {
        let src =
            "policy P { fin(X); bind A as a; all i=0..t=A done(b, Act); authorize+(a, Out); }";
        let ast = parse_policy(src).unwrap();
        let violations = validate_policy(&ast);
        assert!(violations.iter().any(|v| v.to_string().contains('b')));
    }

    #[test]
    fn missing_semicolon_is_positioned() {
        let src = "policy P {\n  fin(X)\n  bind A as a;\n  all i=0..t=A done(a,Act);\n  authorize+(a,Out);\n}";
        let err = parse_policy(src).unwrap_err();
        assert_eq!(err.pos.line, 3);
        assert!(err.expected.contains(';'));
    }

    #[test]
    fn single_item_call_lists_are_rejected() {
        let src = "policy P { fin(X); bind A as a; all i=0..t=A done(a); authorize+(a,Out); }";
        let err = parse_policy(src).unwrap_err();
        assert!(err.expected.contains(','));
    }

    #[test]
    fn keywords_cannot_name_things() {
        let err = parse_policy("policy done { fin(X); }").unwrap_err();
        assert!(err.expected.contains("identifier"));
    }

    #[test]
    fn trailing_input_after_single_policy_is_an_error() {
        let src =
            "policy P { fin(X); bind A as a; all i=0..t=A done(a,Act); authorize+(a,Out); } policy";
        assert!(parse_policy(src).is_err());
    }

    #[test]
    fn empty_source_parses_to_an_empty_set() {
        let set = parse_policy_set("# nothing but a comment\n").unwrap();
        assert!(set.policies.is_empty());
    }
}
