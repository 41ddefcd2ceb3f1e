//! Seeded synthetic Java corpora for the integration tests.
#![allow(dead_code)]

use jpretrain::clean::{clean_pair, CleanConfig, MethodRecord, RawPair, StopwordDetector};
use jpretrain::java;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VARS: &[&str] = &["count", "total", "size", "index", "value", "limit", "offset", "x", "y", "n"];
const CALLS: &[&str] = &["process", "logger.info", "this.update", "buffer.append", "notifyAll", "queue.add"];
const REL: &[&str] = &["<", "<=", ">", ">=", "==", "!="];
const MATH: &[&str] = &["+", "-", "*", "/", "%"];
const VERBS: &[&str] = &["compute", "update", "find", "check", "build", "merge", "load", "scan", "apply", "reset"];
const NOUNS: &[&str] = &["Total", "Index", "Buffer", "Range", "Entry", "Value", "Limit", "Node", "Cache", "Offset"];
const DOC_VERBS: &[&str] = &["Computes", "Updates", "Finds", "Checks", "Builds", "Merges", "Loads", "Scans"];
const DOC_NOUNS: &[&str] = &["total", "index", "buffer", "range", "entry", "value", "limit", "node", "cache"];
const RETURN_TYPES: &[&str] = &["void", "int", "long", "double", "boolean", "String", "List<String>", "Object", "Integer"];

pub struct Generator {
    rng: ChaCha8Rng,
    out: String,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), out: String::new() }
    }

    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs.choose(&mut self.rng).copied().unwrap()
    }

    fn atom(&mut self) -> String {
        match self.rng.gen_range(0..10) {
            0..=5 => self.pick(VARS).to_string(),
            6 => format!("-{}", self.pick(VARS)),
            7 => format!("-{}", self.rng.gen_range(1..9)),
            _ => self.rng.gen_range(0..100).to_string(),
        }
    }

    fn expr(&mut self) -> String {
        let mut s = self.atom();
        for _ in 0..self.rng.gen_range(0..3) {
            let op = self.pick(MATH);
            let a = self.atom();
            s = format!("{s} {op} {a}");
        }
        s
    }

    fn cond(&mut self) -> String {
        if self.rng.gen_ratio(1, 6) {
            return format!("{} != null", self.pick(VARS));
        }
        let (a, op, b) = (self.pick(VARS), self.pick(REL), self.atom());
        format!("{a} {op} {b}")
    }

    fn block(&mut self, depth: usize) {
        self.out.push_str("{ ");
        for _ in 0..self.rng.gen_range(1..=3) {
            self.stmt(depth + 1);
        }
        self.out.push_str("} ");
    }

    fn stmt(&mut self, depth: usize) {
        let nested = depth < 2;
        let v = self.pick(VARS);
        let line = match self.rng.gen_range(0..if nested { 11 } else { 8 }) {
            0 => format!("int {v}{} = {}; ", self.rng.gen_range(0..9), self.expr()),
            1 => format!("{v} {} {}; ", if self.rng.gen_bool(0.5) { "+=" } else { "-=" }, self.atom()),
            2 => format!("{v}{}; ", if self.rng.gen_bool(0.5) { "++" } else { "--" }),
            3 | 4 => {
                let args: Vec<String> = (0..self.rng.gen_range(0..3)).map(|_| self.atom()).collect();
                format!("{}({}); ", self.pick(CALLS), args.join(", "))
            }
            5 => format!("{v} = {}; ", self.expr()),
            6 => format!("String s{} = \"item\" + {v}; ", self.rng.gen_range(0..9)),
            7 => format!("{v} = {} ? {} : {}; ", self.cond(), self.atom(), self.atom()),
            8 => {
                let c = self.cond();
                self.out.push_str(&format!("if ({c}) "));
                self.block(depth);
                if self.rng.gen_bool(0.3) {
                    self.out.push_str("else ");
                    self.block(depth);
                }
                return;
            }
            9 => {
                self.out.push_str(&format!("for (int i = 0; i < {v}; i++) "));
                self.block(depth);
                return;
            }
            _ => {
                self.out.push_str(&format!("while ({v} > 0) "));
                self.block(depth);
                return;
            }
        };
        self.out.push_str(&line);
    }

    fn return_stmt(&mut self, ty: &str) -> String {
        match ty {
            "void" => String::new(),
            "int" | "long" | "double" => format!("return {}; ", self.expr()),
            "boolean" => format!("return {}; ", self.cond()),
            "String" => format!("return \"v\" + {}; ", self.pick(VARS)),
            "List<String>" => "return items; ".to_string(),
            "Object" => "return cache; ".to_string(),
            _ => format!("return {}; ", self.pick(VARS)),
        }
    }

    /// Source of one method with `statements` top-level statements.
    pub fn method(&mut self, k: usize, statements: usize) -> String {
        self.out.clear();
        let ty = self.pick(RETURN_TYPES);
        let name = format!("{}{}{k}", self.pick(VERBS), self.pick(NOUNS));
        let params: Vec<String> =
            (0..self.rng.gen_range(0..3)).map(|i| format!("int {}", ["a", "b"][i])).collect();
        self.out.push_str(&format!("public {ty} {name}({}) {{ ", params.join(", ")));
        for _ in 0..statements {
            self.stmt(0);
        }
        let ret = self.return_stmt(ty);
        self.out.push_str(&ret);
        self.out.push('}');
        std::mem::take(&mut self.out)
    }

    pub fn javadoc(&mut self) -> String {
        let (v, a, b) = (self.pick(DOC_VERBS), self.pick(DOC_NOUNS), self.pick(DOC_NOUNS));
        let tail = match self.rng.gen_range(0..3) {
            0 => " and returns the result",
            1 => " for the current request",
            _ => " if it is not empty",
        };
        format!("/**\n * {v} the {a} of the given {b}{tail}.\n * @param a the input\n */")
    }

    /// A raw pair that survives cleaning.
    pub fn pair(&mut self, k: usize, statements: std::ops::RangeInclusive<usize>) -> RawPair {
        loop {
            let n = self.rng.gen_range(statements.clone());
            let method = self.method(k, n);
            let javadoc = self.javadoc();
            let pair = RawPair {
                id: format!("m{k:05}"),
                repo: "synthetic".into(),
                path: "Gen.java".into(),
                method,
                javadoc,
            };
            if clean_pair(&pair, &StopwordDetector, &CleanConfig::default()).is_ok() {
                return pair;
            }
        }
    }
}

/// Raw pairs of mixed size; mean length roughly 150 to 250 tokens.
pub fn raw_pairs(n: usize, seed: u64) -> Vec<RawPair> {
    let mut g = Generator::new(seed);
    (0..n).map(|k| g.pair(k, 4..=22)).collect()
}

/// Short raw pairs, for tests that touch every mutant.
pub fn small_raw_pairs(n: usize, seed: u64) -> Vec<RawPair> {
    let mut g = Generator::new(seed);
    (0..n)
        .map(|k| {
            let mut p = g.pair(k, 1..=5);
            p.id = format!("s{k:05}");
            p
        })
        .collect()
}

pub fn clean_all(pairs: &[RawPair]) -> Vec<MethodRecord> {
    pairs
        .iter()
        .map(|p| clean_pair(p, &StopwordDetector, &CleanConfig::default()).expect("generated pair is clean"))
        .collect()
}

pub fn records(n: usize, seed: u64) -> Vec<MethodRecord> {
    clean_all(&raw_pairs(n, seed))
}

/// Tiny records over a small vocabulary, so that trigram contexts repeat and
/// every backoff level is reached. Nine method tokens plus one summary word.
pub fn tiny_records(n: usize, seed: u64) -> Vec<MethodRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bodies = ["x ++", "y --", "return x", "return 0", "return y", "z ++"];
    let words = ["Increments", "Returns", "Runs", "Counts", "Gets"];
    (0..n)
        .map(|k| {
            let ty = ["void", "int"][rng.gen_range(0..2)];
            let name = ["f", "g", "h", "run", "get", "inc"][rng.gen_range(0..6)];
            let body = bodies[rng.gen_range(0..bodies.len())];
            let src = format!("{ty} {name}() {{ {body}; }}");
            let tokens = java::tokenize(&src).unwrap();
            let word = words[rng.gen_range(0..words.len())];
            MethodRecord::new(format!("t{k:04}"), tokens, vec![word.to_string()], vec![])
        })
        .collect()
}
