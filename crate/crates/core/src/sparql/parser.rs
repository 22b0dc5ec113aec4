use super::ast::*;
use super::{ParseError, ParseErrorKind};
use crate::lexical::{is_varname, Cursor, LexError, SourcePosition};
use crate::model::{Iri, DEFAULT_MAX_NESTING};
use crate::query::Variable;
use crate::vocab::xsd;

/// Guards recursion through nested groups and filter expressions.
const MAX_GROUP_DEPTH: usize = 256;

/// Parses a SPARQL* `SELECT` query.
///
/// Constructs outside the supported fragment fail with
/// [`ParseErrorKind::Unsupported`] instead of being skipped.
pub fn parse_query(input: &str) -> Result<Query, ParseError> {
    let mut parser = Parser {
        cur: Cursor::new(input),
        anon: 0,
        depth: 0,
    };
    parser.query()
}

struct Parser<'a> {
    cur: Cursor<'a>,
    anon: usize,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError {
            position: e.position,
            kind: ParseErrorKind::Syntax(e.message),
        }
    }
}

fn syntax<T>(position: SourcePosition, message: impl Into<String>) -> PResult<T> {
    Err(ParseError {
        position,
        kind: ParseErrorKind::Syntax(message.into()),
    })
}

fn unsupported<T>(position: SourcePosition, feature: impl Into<String>) -> PResult<T> {
    Err(ParseError {
        position,
        kind: ParseErrorKind::Unsupported(feature.into()),
    })
}

/// Intermediate filter result: either a condition or a bare operand.
enum Expr {
    Condition(FilterExpr),
    Operand(Term),
}

impl<'a> Parser<'a> {
    fn pos(&self) -> SourcePosition {
        self.cur.position()
    }

    fn ws(&mut self) {
        self.cur.skip_ws();
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        self.ws();
        Ok(self.cur.expect(c)?)
    }

    fn keyword(&mut self, keyword: &str) -> bool {
        self.ws();
        if self.cur.at_keyword(keyword) {
            self.cur.bump_n(keyword.len());
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        syntax(
            self.pos(),
            format!("expected {expected}, found {}", self.cur.describe_next()),
        )
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_GROUP_DEPTH {
            return syntax(self.pos(), "query is nested too deeply");
        }
        Ok(())
    }

    fn query(&mut self) -> PResult<Query> {
        let prologue = self.prologue()?;
        self.ws();
        let at = self.pos();
        for form in ["CONSTRUCT", "ASK", "DESCRIBE"] {
            if self.cur.at_keyword(form) {
                return unsupported(at, format!("{form} queries"));
            }
        }
        if !self.keyword("SELECT") {
            return self.unexpected("SELECT");
        }
        let projection = self.projection()?;
        self.ws();
        if self.cur.at_keyword("FROM") {
            return unsupported(self.pos(), "FROM clauses");
        }
        self.keyword("WHERE");
        self.ws();
        if self.cur.peek() != Some('{') {
            return self.unexpected("'{'");
        }
        let pattern = self.group()?;
        self.ws();
        for modifier in ["GROUP", "HAVING", "ORDER", "LIMIT", "OFFSET", "VALUES"] {
            if self.cur.at_keyword(modifier) {
                return unsupported(self.pos(), format!("{modifier} clauses"));
            }
        }
        if !self.cur.is_eof() {
            return self.unexpected("end of query");
        }
        Ok(Query {
            prologue,
            projection,
            pattern,
        })
    }

    fn prologue(&mut self) -> PResult<Vec<PrologueDecl>> {
        let mut decls = Vec::new();
        loop {
            self.ws();
            let position = self.pos();
            if self.keyword("BASE") {
                self.ws();
                let iri = self.cur.read_iriref()?;
                decls.push(PrologueDecl::Base { iri, position });
            } else if self.keyword("PREFIX") {
                self.ws();
                let (prefix, local) = self.cur.read_pname()?;
                if !local.is_empty() {
                    return syntax(position, "expected a prefix name ending in ':'");
                }
                self.ws();
                let iri = self.cur.read_iriref()?;
                decls.push(PrologueDecl::Prefix {
                    prefix,
                    iri,
                    position,
                });
            } else {
                return Ok(decls);
            }
        }
    }

    fn projection(&mut self) -> PResult<Projection> {
        self.ws();
        for modifier in ["DISTINCT", "REDUCED"] {
            if self.cur.at_keyword(modifier) {
                return unsupported(self.pos(), format!("SELECT {modifier}"));
            }
        }
        if self.cur.eat('*') {
            return Ok(Projection::All);
        }
        let mut vars = Vec::new();
        loop {
            self.ws();
            match self.cur.peek() {
                Some('?' | '$') => vars.push(self.variable()?),
                Some('(') => return unsupported(self.pos(), "projection expressions"),
                _ => break,
            }
        }
        if vars.is_empty() {
            return self.unexpected("'*' or a variable");
        }
        Ok(Projection::Variables(vars))
    }

    fn variable(&mut self) -> PResult<Spanned<Variable>> {
        let position = self.pos();
        let name = self.cur.read_variable()?;
        let node = Variable::new(name).or_else(|e| syntax(position, e.to_string()))?;
        Ok(Spanned { node, position })
    }

    fn group(&mut self) -> PResult<GroupPattern> {
        self.enter()?;
        self.ws();
        let position = self.pos();
        self.expect('{')?;
        self.ws();
        if self.cur.at_keyword("SELECT") {
            return unsupported(self.pos(), "subqueries");
        }
        let mut elements: Vec<GroupElement> = Vec::new();
        // true right after a triples statement that was not closed with '.'
        let mut open_statement = false;
        loop {
            self.ws();
            let at = self.pos();
            if self.cur.eat('}') {
                break;
            }
            if self.cur.is_eof() {
                return syntax(position, "unclosed '{'");
            }
            if self.at_term_start() {
                if open_statement {
                    return self.unexpected("'.'");
                }
                let statement = self.triples_same_subject()?;
                match elements.last_mut() {
                    Some(GroupElement::Triples(block)) => block.push(statement),
                    _ => elements.push(GroupElement::Triples(vec![statement])),
                }
                self.ws();
                open_statement = !self.cur.eat('.');
                continue;
            }
            open_statement = false;
            let element = if self.keyword("OPTIONAL") {
                GroupElement::Optional(self.group()?)
            } else if self.keyword("FILTER") {
                GroupElement::Filter(self.filter(at)?)
            } else if self.keyword("BIND") {
                GroupElement::Bind(self.bind(at)?)
            } else if self.cur.peek() == Some('{') {
                let mut groups = vec![self.group()?];
                while self.keyword("UNION") {
                    groups.push(self.group()?);
                }
                if groups.len() == 1 {
                    GroupElement::Group(groups.pop().unwrap())
                } else {
                    GroupElement::Union(groups)
                }
            } else {
                for keyword in ["MINUS", "GRAPH", "SERVICE", "VALUES"] {
                    if self.cur.at_keyword(keyword) {
                        return unsupported(at, keyword);
                    }
                }
                return self.unexpected("a triple pattern or group element");
            };
            elements.push(element);
            self.ws();
            self.cur.eat('.');
        }
        self.depth -= 1;
        Ok(GroupPattern { position, elements })
    }

    fn at_term_start(&self) -> bool {
        match self.cur.peek() {
            Some('?' | '$' | '<' | '"' | '\'' | '_' | '[' | '(' | ':') => true,
            Some(_) if self.cur.at_number() => true,
            Some(c) if c.is_alphabetic() => {
                // prefixed names and true/false, but not keywords
                const KEYWORDS: [&str; 9] = [
                    "OPTIONAL", "FILTER", "BIND", "UNION", "MINUS", "GRAPH", "SERVICE", "VALUES",
                    "SELECT",
                ];
                !KEYWORDS.iter().any(|k| self.cur.at_keyword(k))
            }
            _ => false,
        }
    }

    fn triples_same_subject(&mut self) -> PResult<TriplesSameSubject> {
        let subject = self.term(0)?;
        let mut predicates = Vec::new();
        loop {
            let verb = self.verb()?;
            let mut objects = vec![self.term(0)?];
            loop {
                self.ws();
                if !self.cur.eat(',') {
                    break;
                }
                objects.push(self.term(0)?);
            }
            predicates.push((verb, objects));
            self.ws();
            if !self.cur.eat(';') {
                break;
            }
            // repeated or trailing ';'
            loop {
                self.ws();
                if !self.cur.eat(';') {
                    break;
                }
            }
            self.ws();
            if matches!(self.cur.peek(), Some('.' | '}')) || self.cur.is_eof() {
                break;
            }
        }
        Ok(TriplesSameSubject {
            subject,
            predicates,
        })
    }

    fn verb(&mut self) -> PResult<Verb> {
        self.ws();
        let position = self.pos();
        let kind = match self.cur.peek() {
            Some('?' | '$') => {
                return Ok(Verb {
                    position,
                    kind: VerbKind::Variable(self.variable()?.node),
                })
            }
            Some('^' | '!' | '(') => return unsupported(position, "property paths"),
            Some('a') if self.cur.at_keyword("a") => {
                self.cur.bump();
                VerbKind::Type
            }
            Some('<') if self.cur.starts_with("<<") => {
                return syntax(position, "an embedded triple pattern cannot be a predicate")
            }
            _ => VerbKind::Iri(self.iri_ref()?),
        };
        self.reject_path_continuation()?;
        Ok(Verb { position, kind })
    }

    /// Rejects `/`, `|` and the path modifiers after a predicate.
    fn reject_path_continuation(&mut self) -> PResult<()> {
        let path = match self.cur.peek() {
            Some('/' | '|' | '*' | '{') => true,
            Some('?') => !self
                .cur
                .peek_nth(1)
                .is_some_and(|c| is_varname(&c.to_string())),
            Some('+') => !self.cur.at_number(),
            _ => false,
        };
        if path {
            return unsupported(self.pos(), "property paths");
        }
        self.ws();
        if matches!(self.cur.peek(), Some('/' | '|')) {
            return unsupported(self.pos(), "property paths");
        }
        Ok(())
    }

    fn iri_ref(&mut self) -> PResult<IriRef> {
        if self.cur.peek() == Some('<') {
            Ok(IriRef::Written(self.cur.read_iriref()?))
        } else {
            let at = self.pos();
            let (prefix, local) = self.cur.read_pname().map_err(|_| ParseError {
                position: at,
                kind: ParseErrorKind::Syntax(format!(
                    "expected an IRI, found {}",
                    self.cur.describe_next()
                )),
            })?;
            Ok(IriRef::Prefixed { prefix, local })
        }
    }

    /// A subject or object inside `nesting` enclosing `<< >>`.
    fn term(&mut self, nesting: usize) -> PResult<Term> {
        self.ws();
        let position = self.pos();
        let embedded = nesting > 0;
        let kind = match self.cur.peek() {
            Some('?' | '$') => TermKind::Variable(self.variable()?.node),
            Some('<') if self.cur.starts_with("<<") => {
                TermKind::Embedded(Box::new(self.embedded(position, nesting + 1)?))
            }
            Some('<') => TermKind::Iri(IriRef::Written(self.cur.read_iriref()?)),
            Some('_') if self.cur.starts_with("_:") => {
                if embedded {
                    return syntax(
                        position,
                        "blank nodes are not allowed in embedded triple patterns",
                    );
                }
                TermKind::BlankNode(self.cur.read_blank_node_label()?)
            }
            Some('[') => {
                if embedded {
                    return syntax(
                        position,
                        "blank nodes are not allowed in embedded triple patterns",
                    );
                }
                self.cur.bump();
                self.ws();
                if !self.cur.eat(']') {
                    return unsupported(position, "blank node property lists");
                }
                self.anon += 1;
                TermKind::AnonBlankNode(self.anon)
            }
            Some('(') => return unsupported(position, "collections"),
            Some('"' | '\'') => self.literal()?,
            Some(_) if self.cur.at_number() => {
                let (lexical, datatype) = self.cur.read_number()?;
                TermKind::Literal {
                    lexical,
                    language: None,
                    datatype: Some(IriRef::Resolved(Iri::new(datatype).expect("known IRI"))),
                }
            }
            Some(_) if self.cur.at_keyword("true") || self.cur.at_keyword("false") => {
                let lexical = if self.cur.at_keyword("true") {
                    "true"
                } else {
                    "false"
                };
                self.cur.bump_n(lexical.len());
                TermKind::Literal {
                    lexical: lexical.to_owned(),
                    language: None,
                    datatype: Some(IriRef::Resolved(Iri::new(xsd::BOOLEAN).expect("known IRI"))),
                }
            }
            _ => TermKind::Iri(self.iri_ref()?),
        };
        Ok(Term { position, kind })
    }

    fn literal(&mut self) -> PResult<TermKind> {
        let lexical = self.cur.read_string()?;
        let (language, datatype) = if self.cur.eat('@') {
            (Some(self.cur.read_langtag()?), None)
        } else if self.cur.eat_str("^^") {
            (None, Some(self.iri_ref()?))
        } else {
            (None, None)
        };
        Ok(TermKind::Literal {
            lexical,
            language,
            datatype,
        })
    }

    fn embedded(&mut self, start: SourcePosition, nesting: usize) -> PResult<EmbeddedPattern> {
        if nesting > DEFAULT_MAX_NESTING {
            return syntax(start, "embedded triple patterns are nested too deeply");
        }
        self.cur.eat_str("<<");
        let subject = self.term(nesting)?;
        let verb = self.verb()?;
        let object = self.term(nesting)?;
        self.ws();
        if !self.cur.eat_str(">>") {
            if self.cur.is_eof() {
                return syntax(start, "unclosed '<<'");
            }
            return self.unexpected("'>>'");
        }
        Ok(EmbeddedPattern {
            subject,
            verb,
            object,
        })
    }

    fn bind(&mut self, position: SourcePosition) -> PResult<Bind> {
        self.expect('(')?;
        self.ws();
        let at = self.pos();
        const OTHER_EXPRESSIONS: &str =
            "BIND expressions other than constants, variables and embedded triple patterns";
        let expression = if self.cur.starts_with("<<") {
            BindExpression::Embedded(self.term(0)?)
        } else {
            match self.term(0) {
                Ok(t)
                    if matches!(
                        t.kind,
                        TermKind::Variable(_) | TermKind::Iri(_) | TermKind::Literal { .. }
                    ) =>
                {
                    BindExpression::Value(t)
                }
                _ => return unsupported(at, OTHER_EXPRESSIONS),
            }
        };
        self.ws();
        if !self.keyword("AS") {
            if matches!(
                self.cur.peek(),
                Some('+' | '-' | '*' | '/' | '(' | '|' | '&' | '=' | '!' | '<' | '>')
            ) {
                return unsupported(self.pos(), OTHER_EXPRESSIONS);
            }
            return self.unexpected("AS");
        }
        self.ws();
        let variable = self.variable()?;
        self.expect(')')?;
        Ok(Bind {
            position,
            expression,
            variable,
        })
    }

    fn filter(&mut self, position: SourcePosition) -> PResult<Filter> {
        self.ws();
        let at = self.pos();
        let expr = if self.cur.peek() == Some('(') {
            self.cur.bump();
            let e = self.or_expr()?;
            self.expect(')')?;
            e
        } else if self.cur.at_keyword("BOUND") {
            self.primary()?
        } else if self.cur.at_keyword("NOT") || self.cur.at_keyword("EXISTS") {
            return unsupported(at, "EXISTS");
        } else {
            return unsupported(at, "filter functions");
        };
        match expr {
            Expr::Condition(condition) => Ok(Filter {
                position,
                condition,
            }),
            Expr::Operand(t) => {
                unsupported(t.position, "filters that are not bound(), = or != tests")
            }
        }
    }

    fn condition(&self, e: Expr) -> PResult<FilterExpr> {
        match e {
            Expr::Condition(c) => Ok(c),
            Expr::Operand(t) => {
                unsupported(t.position, "filters that are not bound(), = or != tests")
            }
        }
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let mut left = self.and_expr()?;
        loop {
            self.ws();
            if !self.cur.eat_str("||") {
                break;
            }
            let right = self.and_expr()?;
            left = Expr::Condition(FilterExpr::Or(
                Box::new(self.condition(left)?),
                Box::new(self.condition(right)?),
            ));
        }
        self.depth -= 1;
        Ok(left)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut left = self.relational()?;
        loop {
            self.ws();
            if !self.cur.eat_str("&&") {
                break;
            }
            let right = self.relational()?;
            left = Expr::Condition(FilterExpr::And(
                Box::new(self.condition(left)?),
                Box::new(self.condition(right)?),
            ));
        }
        Ok(left)
    }

    fn relational(&mut self) -> PResult<Expr> {
        let left = self.unary()?;
        self.ws();
        let at = self.pos();
        let negated = if self.cur.eat_str("!=") {
            true
        } else if self.cur.eat('=') {
            false
        } else {
            if matches!(self.cur.peek(), Some('<' | '>')) {
                return unsupported(at, "ordering comparisons");
            }
            if matches!(self.cur.peek(), Some('+' | '-' | '*' | '/')) {
                return unsupported(at, "arithmetic");
            }
            if self.cur.at_keyword("IN") || self.cur.at_keyword("NOT") {
                return unsupported(at, "IN");
            }
            return Ok(left);
        };
        let right = self.unary()?;
        let (Expr::Operand(a), Expr::Operand(b)) = (left, right) else {
            return unsupported(at, "comparisons between conditions");
        };
        let is_var = |t: &Term| matches!(t.kind, TermKind::Variable(_));
        if !is_var(&a) && !is_var(&b) {
            return unsupported(at, "comparisons without a variable");
        }
        Ok(Expr::Condition(if negated {
            FilterExpr::NotEquals(a, b)
        } else {
            FilterExpr::Equals(a, b)
        }))
    }

    fn unary(&mut self) -> PResult<Expr> {
        self.ws();
        if self.cur.peek() == Some('!') && self.cur.peek_nth(1) != Some('=') {
            self.cur.bump();
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Condition(FilterExpr::Not(Box::new(
                self.condition(inner)?,
            ))));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        self.ws();
        let at = self.pos();
        match self.cur.peek() {
            Some('(') => {
                self.cur.bump();
                let e = self.or_expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some('?' | '$' | '"' | '\'') => Ok(Expr::Operand(self.term(0)?)),
            Some('<') if self.cur.starts_with("<<") => {
                unsupported(at, "embedded triple patterns in filters")
            }
            Some('<') => Ok(Expr::Operand(self.term(0)?)),
            Some(_) if self.cur.at_number() => Ok(Expr::Operand(self.term(0)?)),
            Some(_) if self.cur.at_keyword("BOUND") => {
                self.cur.bump_n(5);
                self.expect('(')?;
                self.ws();
                let v = self.variable()?;
                self.expect(')')?;
                Ok(Expr::Condition(FilterExpr::Bound(v)))
            }
            Some(_) if self.cur.at_keyword("true") || self.cur.at_keyword("false") => {
                Ok(Expr::Operand(self.term(0)?))
            }
            Some(c) if c.is_alphabetic() || c == ':' => {
                // a prefixed name, unless it is a function call
                let term = self.term(0);
                self.ws();
                match term {
                    Ok(t) if self.cur.peek() != Some('(') => Ok(Expr::Operand(t)),
                    _ => unsupported(at, "filter functions"),
                }
            }
            _ => self.unexpected("a filter expression"),
        }
    }
}
