#include "attnparse/treebank.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "attnparse/error.hpp"

namespace attnparse {

RawTree RawTree::terminal(std::string tag, std::string word) {
  return RawTree{std::move(tag), std::move(word), {}};
}

RawTree RawTree::node(std::string label, std::vector<RawTree> children) {
  return RawTree{std::move(label), {}, std::move(children)};
}

namespace {

struct Token {
  enum class Type { open, close, atom, end } type;
  std::string_view text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  const Token& peek() {
    if (!lookahead_) lookahead_ = scan();
    return *lookahead_;
  }

  Token next() {
    Token t = peek();
    lookahead_.reset();
    return t;
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  Token scan() {
    while (pos_ < text_.size() && is_space(text_[pos_])) advance();
    const std::size_t line = line_;
    const std::size_t column = column_;
    if (pos_ == text_.size()) return {Token::Type::end, {}, line, column};
    const char c = text_[pos_];
    if (c == '(' || c == ')') {
      advance();
      return {c == '(' ? Token::Type::open : Token::Type::close, text_.substr(pos_ - 1, 1), line, column};
    }
    const std::size_t begin = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' && text_[pos_] != ')') advance();
    return {Token::Type::atom, text_.substr(begin, pos_ - begin), line, column};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  std::optional<Token> lookahead_;
};

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : lexer_(text) {}

  std::vector<RawTree> parse_all() {
    std::vector<RawTree> trees;
    for (;;) {
      const Token t = lexer_.next();
      switch (t.type) {
        case Token::Type::end:
          return trees;
        case Token::Type::open:
          trees.push_back(unwrap(parse_node(t)));
          break;
        case Token::Type::close:
          throw ParseError("unbalanced brackets: unexpected ')'", t.line, t.column);
        case Token::Type::atom:
          throw ParseError("unexpected token '" + std::string(t.text) + "' outside of brackets", t.line, t.column);
      }
    }
  }

 private:
  // `open` has been consumed.
  RawTree parse_node(const Token& open) {
    std::string label;
    if (lexer_.peek().type == Token::Type::atom) label = std::string(lexer_.next().text);

    const Token& t = lexer_.peek();
    if (t.type == Token::Type::close) {
      lexer_.next();
      if (label.empty()) throw ParseError("empty node \"( )\"", open.line, open.column);
      throw ParseError("node '" + label + "' has no children", open.line, open.column);
    }
    if (t.type == Token::Type::atom) {
      std::string word(lexer_.next().text);
      const Token close = lexer_.next();
      if (close.type != Token::Type::close) expect_close_failed(close, open);
      if (label.empty()) throw ParseError("terminal '" + word + "' has no tag", open.line, open.column);
      return RawTree::terminal(std::move(label), std::move(word));
    }

    std::vector<RawTree> children;
    for (;;) {
      const Token c = lexer_.next();
      if (c.type == Token::Type::close) break;
      if (c.type == Token::Type::open) {
        children.push_back(parse_node(c));
        continue;
      }
      if (c.type == Token::Type::end) expect_close_failed(c, open);
      throw ParseError("unexpected word '" + std::string(c.text) + "' among child nodes", c.line, c.column);
    }
    return RawTree::node(std::move(label), std::move(children));
  }

  [[noreturn]] static void expect_close_failed(const Token& got, const Token& open) {
    if (got.type == Token::Type::end) {
      throw ParseError("unbalanced brackets: '(' at " + std::to_string(open.line) + ":" +
                           std::to_string(open.column) + " is never closed",
                       got.line, got.column);
    }
    throw ParseError("expected ')' but found '" + std::string(got.text) + "'", got.line, got.column);
  }

  static RawTree unwrap(RawTree t) {
    while (t.label.empty() && t.children.size() == 1) {
      RawTree inner = std::move(t.children.front());
      t = std::move(inner);
    }
    return t;
  }

  Lexer lexer_;
};

void write_bracketed(const RawTree& t, std::string& out) {
  out += '(';
  out += t.label;
  if (t.is_terminal()) {
    out += ' ';
    out += t.word;
  } else {
    for (const auto& c : t.children) {
      out += ' ';
      write_bracketed(c, out);
    }
  }
  out += ')';
}

std::optional<RawTree> prune(const RawTree& t, const std::function<bool(const RawTree&)>& drop_terminal) {
  if (t.is_terminal()) {
    if (drop_terminal(t)) return std::nullopt;
    return t;
  }
  std::vector<RawTree> kept;
  kept.reserve(t.children.size());
  for (const auto& c : t.children) {
    if (auto p = prune(c, drop_terminal)) kept.push_back(std::move(*p));
  }
  if (kept.empty()) return std::nullopt;
  return RawTree::node(t.label, std::move(kept));
}

void relabel(RawTree& t) {
  t.label = strip_function_tags(t.label);
  for (auto& c : t.children) relabel(c);
}

std::size_t collect_spans(const RawTree& t, std::size_t start, GoldSentence& out) {
  if (t.is_terminal()) {
    out.words.push_back(t.word);
    return start;
  }
  const std::size_t slot = out.labeled_spans.size();
  out.labeled_spans.push_back({t.label, start, 0});
  std::size_t next = start;
  std::size_t end = start;
  for (const auto& c : t.children) {
    end = collect_spans(c, next, out);
    next = end + 1;
  }
  out.labeled_spans[slot].end = end;
  return end;
}

}  // namespace

std::vector<RawTree> parse_ptb(std::string_view text) {
  return TreeParser(text).parse_all();
}

std::string to_bracketed(const RawTree& tree) {
  std::string out;
  write_bracketed(tree, out);
  return out;
}

std::size_t terminal_count(const RawTree& tree) {
  if (tree.is_terminal()) return 1;
  std::size_t n = 0;
  for (const auto& c : tree.children) n += terminal_count(c);
  return n;
}

const std::set<std::string>& default_punct_tags() {
  static const std::set<std::string> tags{",", ".", ":", "``", "''", "-LRB-", "-RRB-", "#", "$"};
  return tags;
}

std::string strip_function_tags(std::string_view label) {
  if (label == "-NONE-" || label == "-LRB-" || label == "-RRB-") return std::string(label);
  const auto cut = label.find_first_of("-=", 1);
  return std::string(label.substr(0, cut));
}

std::optional<RawTree> normalize(const RawTree& tree, const std::set<std::string>& punct_tags) {
  auto without_traces = prune(tree, [](const RawTree& t) { return t.label == "-NONE-"; });
  if (!without_traces) return std::nullopt;
  relabel(*without_traces);
  return prune(*without_traces, [&](const RawTree& t) { return punct_tags.contains(t.label); });
}

GoldSentence gold_spans(const RawTree& normalized, std::size_t sentence_id) {
  GoldSentence g;
  g.sentence_id = sentence_id;
  collect_spans(normalized, 1, g);
  return g;
}

Treebank build_treebank(const std::vector<RawTree>& trees, const std::set<std::string>& punct_tags) {
  Treebank tb;
  tb.tree_count = trees.size();
  for (std::size_t id = 0; id < trees.size(); ++id) {
    if (auto n = normalize(trees[id], punct_tags)) {
      tb.sentences.push_back(gold_spans(*n, id));
    } else {
      tb.dropped_ids.push_back(id);
    }
  }
  return tb;
}

Treebank load_treebank(const std::filesystem::path& path, const std::set<std::string>& punct_tags) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw InputError("treebank not found: " + path.string());
  }

  std::vector<RawTree> trees;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw InputError("cannot open treebank file: " + f.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      auto parsed = parse_ptb(buf.str());
      std::move(parsed.begin(), parsed.end(), std::back_inserter(trees));
    } catch (const ParseError& e) {
      throw ParseError(e.detail(), e.line(), e.column(), f.string());
    }
  }
  return build_treebank(trees, punct_tags);
}

}  // namespace attnparse
