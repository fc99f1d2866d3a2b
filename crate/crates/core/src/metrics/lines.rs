//! Lexical line classification.
//!
//! Works on raw text so it also covers files that failed to parse. A line is
//! a code line if it has a non-blank character outside comments, a comment
//! line if it has a non-blank character inside a comment (delimiters
//! included), and blank if neither. A line can be both code and comment.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LineKind {
    pub code: bool,
    pub comment: bool,
}

impl LineKind {
    pub fn blank(&self) -> bool {
        !self.code && !self.comment
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LineStats {
    pub lines: usize,
    pub blank: usize,
    pub code: usize,
    pub comment: usize,
}

impl LineStats {
    /// Counts over 1-based inclusive line range `[first, last]`.
    pub fn over(kinds: &[LineKind], first: usize, last: usize) -> LineStats {
        let mut s = LineStats::default();
        let lo = first.max(1);
        let hi = last.min(kinds.len());
        for k in kinds.iter().take(hi).skip(lo - 1) {
            s.lines += 1;
            s.blank += k.blank() as usize;
            s.code += k.code as usize;
            s.comment += k.comment as usize;
        }
        s
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Code,
    LineComment,
    BlockComment,
    Str,
    Char,
}

/// One entry per physical line. A trailing newline does not start a new line.
pub fn classify_lines(text: &str) -> Vec<LineKind> {
    let mut out = Vec::new();
    if text.is_empty() {
        return out;
    }
    let chars: Vec<char> = text.chars().collect();
    let mut state = State::Code;
    let mut cur = LineKind::default();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if c == '\n' {
            out.push(cur);
            cur = LineKind::default();
            if state == State::LineComment {
                state = State::Code;
            }
            i += 1;
            continue;
        }
        match state {
            State::Code => {
                if c == '/' && next == Some('/') {
                    state = State::LineComment;
                    cur.comment = true;
                    i += 2;
                    continue;
                }
                if c == '/' && next == Some('*') {
                    state = State::BlockComment;
                    cur.comment = true;
                    i += 2;
                    continue;
                }
                if !c.is_whitespace() {
                    cur.code = true;
                }
                if c == '"' {
                    state = State::Str;
                } else if c == '\'' {
                    state = State::Char;
                }
            }
            State::LineComment => {
                if !c.is_whitespace() {
                    cur.comment = true;
                }
            }
            State::BlockComment => {
                if !c.is_whitespace() {
                    cur.comment = true;
                }
                if c == '*' && next == Some('/') {
                    state = State::Code;
                    i += 2;
                    continue;
                }
            }
            State::Str | State::Char => {
                if !c.is_whitespace() {
                    cur.code = true;
                }
                let quote = if state == State::Str { '"' } else { '\'' };
                if c == '\\' {
                    i += 2;
                    continue;
                }
                if c == quote {
                    state = State::Code;
                }
            }
        }
        i += 1;
    }
    if !text.ends_with('\n') {
        out.push(cur);
    }
    out
}
