//! Java tokenizer. Comments, whitespace and literal contents are dropped;
//! literals survive only as a placeholder token so the parser can still see
//! where an operand begins.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Keyword(&'static str),
    Punct(char),
    Ellipsis,
    DoubleColon,
    Arrow,
    Literal,
}

impl Tok {
    pub(crate) fn is_kw(&self, kw: &str) -> bool {
        matches!(self, Tok::Keyword(k) if *k == kw)
    }

    pub(crate) fn is_punct(&self, c: char) -> bool {
        matches!(self, Tok::Punct(p) if *p == c)
    }

    pub(crate) fn ident(&self) -> Option<&str> {
        match self {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "false",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "null",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "true",
    "try",
    "void",
    "volatile",
    "while",
    "_",
];

pub(crate) const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "double", "float", "int", "long", "short", "void",
];

fn keyword(word: &str) -> Option<&'static str> {
    KEYWORDS.iter().copied().find(|k| *k == word)
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

pub(crate) fn tokenize(src: &str) -> Vec<Tok> {
    let chars: Vec<char> = src.chars().collect();
    let n = chars.len();
    let mut toks = Vec::new();
    let mut i = 0;
    let at = |i: usize| chars.get(i).copied().unwrap_or('\0');
    while i < n {
        let c = chars[i];
        if c.is_whitespace() || c == '\u{feff}' {
            i += 1;
        } else if c == '/' && at(i + 1) == '/' {
            while i < n && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && at(i + 1) == '*' {
            i += 2;
            while i < n && !(chars[i] == '*' && at(i + 1) == '/') {
                i += 1;
            }
            i = (i + 2).min(n);
        } else if c == '"' && at(i + 1) == '"' && at(i + 2) == '"' {
            i += 3;
            while i < n && !(chars[i] == '"' && at(i + 1) == '"' && at(i + 2) == '"') {
                i += if chars[i] == '\\' { 2 } else { 1 };
            }
            i = (i + 3).min(n);
            toks.push(Tok::Literal);
        } else if c == '"' || c == '\'' {
            i += 1;
            while i < n && chars[i] != c && chars[i] != '\n' {
                i += if chars[i] == '\\' { 2 } else { 1 };
            }
            i = (i + 1).min(n);
            toks.push(Tok::Literal);
        } else if c.is_ascii_digit() || (c == '.' && at(i + 1).is_ascii_digit()) {
            while i < n {
                let d = chars[i];
                let exponent_sign = (d == '+' || d == '-') && matches!(chars[i - 1], 'e' | 'E' | 'p' | 'P');
                if d.is_ascii_alphanumeric() || d == '_' || d == '.' || exponent_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            toks.push(Tok::Literal);
        } else if is_ident_start(c) {
            let start = i;
            while i < n && is_ident_part(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            toks.push(match keyword(&word) {
                Some(k) => Tok::Keyword(k),
                None => Tok::Ident(word),
            });
        } else if c == '.' && at(i + 1) == '.' && at(i + 2) == '.' {
            toks.push(Tok::Ellipsis);
            i += 3;
        } else if c == ':' && at(i + 1) == ':' {
            toks.push(Tok::DoubleColon);
            i += 2;
        } else if c == '-' && at(i + 1) == '>' {
            toks.push(Tok::Arrow);
            i += 2;
        } else {
            toks.push(Tok::Punct(c));
            i += 1;
        }
    }
    toks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idents(src: &str) -> Vec<String> {
        tokenize(src)
            .into_iter()
            .filter_map(|t| t.ident().map(str::to_string))
            .collect()
    }

    #[test]
    fn comments_and_literals_are_stripped() {
        let src = r#"
            // Foo in a line comment
            /* Bar in a block
               comment */
            String s = "Baz \" still string"; char c = '\''; char d = '"';
            String t = """
                Qux inside a text block "" with quotes
                """;
            Real r;
        "#;
        assert_eq!(idents(src), ["String", "s", "c", "d", "String", "t", "Real", "r"]);
    }

    #[test]
    fn keywords_and_compound_punctuation() {
        let toks = tokenize("class A<T> { void f(String... xs) { Runnable r = () -> g(); X::y; } }");
        assert!(toks[0].is_kw("class"));
        assert!(toks.contains(&Tok::Ellipsis));
        assert!(toks.contains(&Tok::Arrow));
        assert!(toks.contains(&Tok::DoubleColon));
        assert!(toks.iter().any(|t| t.is_kw("void")));
    }

    #[test]
    fn numbers_are_single_literals() {
        let toks = tokenize("x = 1.5e-3f + 0x1F + .5 + 1_000L;");
        assert_eq!(toks.iter().filter(|t| **t == Tok::Literal).count(), 4);
    }

    #[test]
    fn unterminated_input_does_not_panic() {
        tokenize("class A { String s = \"open");
        tokenize("/* never closed");
        tokenize("'");
    }
}
