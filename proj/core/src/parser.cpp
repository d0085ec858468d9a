#include "dekl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <optional>

#include "dekl/printer.hpp"

namespace dekl {

ParseError::ParseError(SourceSpan span, std::vector<std::string> expected, std::string found,
                       const std::string& message)
    : std::runtime_error(message), span_(std::move(span)), expected_(std::move(expected)), found_(std::move(found)) {}

std::string ParseError::format() const { return span_.to_string() + ": " + what(); }

bool NameTable::declared(std::string_view name) const {
  return states.count(name) || events.count(name) || witnesses.count(name) || corecs.count(name) ||
         defs.count(name) || policies.count(name) || presheaves.count(name);
}

std::set<std::string> NameTable::all() const {
  std::set<std::string> out;
  out.insert(states.begin(), states.end());
  out.insert(events.begin(), events.end());
  out.insert(witnesses.begin(), witnesses.end());
  out.insert(corecs.begin(), corecs.end());
  for (const auto& [n, _] : defs) out.insert(n);
  for (const auto& [n, _] : policies) out.insert(n);
  out.insert(presheaves.begin(), presheaves.end());
  return out;
}

namespace {

enum class Tok { Ident, Number, Symbol, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t col;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

class Lexer {
 public:
  Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) {
        out.push_back({Tok::End, "", line_, col_});
        return out;
      }
      std::size_t line = line_;
      std::size_t col = col_;
      unsigned char c = static_cast<unsigned char>(text_[pos_]);
      if (c >= 0x80) fail(line, col, "non-ASCII character in input; identifiers are ASCII only");
      if (std::isalpha(c) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '_' || text_[pos_] == '\'')) {
          advance();
        }
        out.push_back({Tok::Ident, std::string(text_.substr(start, pos_ - start)), line, col});
        continue;
      }
      if (std::isdigit(c)) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        out.push_back({Tok::Number, std::string(text_.substr(start, pos_ - start)), line, col});
        continue;
      }
      static constexpr std::string_view symbols[] = {"]->", "-[", "->", ":=", "=>", ">=", "(", ")",
                                                     ",",   ".",  ":",  ";"};
      bool matched = false;
      for (std::string_view s : symbols) {
        if (text_.substr(pos_, s.size()) == s) {
          for (std::size_t i = 0; i < s.size(); ++i) advance();
          out.push_back({Tok::Symbol, std::string(s), line, col});
          matched = true;
          break;
        }
      }
      if (!matched) fail(line, col, std::string("unexpected character '") + static_cast<char>(c) + "'");
    }
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (text_.substr(pos_, 2) == "--") {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(std::size_t line, std::size_t col, const std::string& msg) {
    std::string found(1, text_[pos_]);
    throw ParseError(SourceSpan{file_, line, col, line, col + 1}, {}, found, msg);
  }

  std::string_view text_;
  std::string file_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string file, NameTable names)
      : toks_(std::move(toks)), file_(std::move(file)), names_(std::move(names)) {}

  ModuleAST module() {
    ModuleAST m;
    m.file = file_;
    // Corecursive names may be referenced before their declaration.
    for (std::size_t i = 0; i + 1 < toks_.size(); ++i) {
      if (is_kw(toks_[i], "corec") && toks_[i + 1].kind == Tok::Ident) forward_corecs_.insert(toks_[i + 1].text);
    }
    while (peek().kind != Tok::End) m.declarations.push_back(declaration());
    return m;
  }

  TermPtr standalone_term(std::vector<std::string> locals) {
    locals_ = std::move(locals);
    TermPtr t = term();
    if (peek().kind != Tok::End) error({"end of input"});
    return t;
  }

 private:
  // --- token helpers -------------------------------------------------------

  static bool is_kw(const Token& t, std::string_view kw) { return t.kind == Tok::Ident && t.text == kw; }
  static bool is_sym(const Token& t, std::string_view s) { return t.kind == Tok::Symbol && t.text == s; }

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    last_ = &t;
    return t;
  }

  SourceSpan span_of(const Token& t) const {
    std::size_t width = t.kind == Tok::End ? 0 : t.text.size();
    return SourceSpan{file_, t.line, t.col, t.line, t.col + width};
  }

  [[noreturn]] void error(std::vector<std::string> expected, const std::string& message = "") {
    const Token& t = peek();
    std::string msg = message;
    if (msg.empty()) {
      msg = "expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) msg += i + 1 == expected.size() ? " or " : ", ";
        msg += expected[i];
      }
      msg += ", found " + describe(t);
    }
    throw ParseError(span_of(t), std::move(expected), t.kind == Tok::End ? "" : t.text, msg);
  }

  [[noreturn]] void error_at(const Token& t, const std::string& message) {
    throw ParseError(span_of(t), {}, t.text, message);
  }

  void expect_sym(std::string_view s) {
    if (!is_sym(peek(), s)) error({"'" + std::string(s) + "'"});
    next();
  }

  void expect_kw(std::string_view kw) {
    if (!is_kw(peek(), kw)) error({"'" + std::string(kw) + "'"});
    next();
  }

  const Token& ident(const std::string& what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || is_keyword(t.text)) error({what});
    return next();
  }

  std::size_t number() {
    const Token& t = peek();
    if (t.kind != Tok::Number) error({"a number"});
    std::size_t v = 0;
    for (char c : t.text) {
      std::size_t d = static_cast<std::size_t>(c - '0');
      if (v > (std::numeric_limits<std::size_t>::max() - d) / 10) error_at(t, "number too large");
      v = v * 10 + d;
    }
    next();
    return v;
  }

  unsigned level() {
    const Token& t = peek();
    std::size_t v = number();
    if (v > 1000) error_at(t, "universe level too large");
    return static_cast<unsigned>(v);
  }

  // --- declarations --------------------------------------------------------

  std::string fresh_global(const std::string& what) {
    const Token& t = ident(what);
    if (names_.declared(t.text)) error_at(t, "duplicate declaration of '" + t.text + "'");
    return t.text;
  }

  std::string known(const std::set<std::string, std::less<>>& set, const std::string& what) {
    const Token& t = ident(what);
    if (!set.count(t.text)) error_at(t, "unknown " + what + " '" + t.text + "'");
    return t.text;
  }

  SourceSpan finish(const Token& first) {
    expect_sym(".");
    SourceSpan s = span_of(first);
    s.end_line = last_->line;
    s.end_col = last_->col + 1;
    return s;
  }

  Declaration declaration() {
    const Token& first = peek();
    if (is_kw(first, "state")) {
      next();
      std::string name = fresh_global("a state name");
      SourceSpan span = finish(first);
      names_.states.insert(name);
      return StateDecl{name, span};
    }
    if (is_kw(first, "event")) {
      next();
      std::string name = fresh_global("an event name");
      SourceSpan span = finish(first);
      names_.events.insert(name);
      return EventDecl{name, span};
    }
    if (is_kw(first, "step")) {
      next();
      std::string src = known(names_.states, "state");
      expect_sym("-[");
      std::string ev = known(names_.events, "event");
      expect_sym("]->");
      std::string dst = known(names_.states, "state");
      expect_kw("as");
      std::string w = fresh_global("a step witness name");
      SourceSpan span = finish(first);
      names_.witnesses.insert(w);
      return StepDecl{src, ev, dst, w, span};
    }
    if (is_kw(first, "def")) {
      next();
      std::string name = fresh_global("a definition name");
      expect_sym(":");
      TermPtr type = term();
      expect_sym(":=");
      TermPtr body = term();
      SourceSpan span = finish(first);
      names_.defs.emplace(name, body);
      return DefDecl{name, type, body, span};
    }
    if (is_kw(first, "policy")) {
      next();
      std::string name = fresh_global("a policy name");
      expect_sym(":=");
      PolicyPtr p = policy();
      SourceSpan span = finish(first);
      names_.policies.emplace(name, p);
      return PolicyDecl{name, p, span};
    }
    if (is_kw(first, "presheaf")) return presheaf(first);
    if (is_kw(first, "corec")) return corec(first);
    error({"'state'", "'event'", "'step'", "'def'", "'policy'", "'presheaf'", "'corec'"});
  }

  Declaration presheaf(const Token& first) {
    next();
    std::string name = fresh_global("a presheaf name");
    expect_sym(":=");
    PresheafDecl d;
    if (is_kw(peek(), "predicate")) {
      next();
      d.spec = PredicateSpec{name, policy()};
    } else if (is_kw(peek(), "evidence")) {
      next();
      expect_kw("issue");
      std::string issue = known(names_.events, "event");
      expect_kw("revoke");
      std::string revoke = known(names_.events, "event");
      d.spec = EvidenceSpec{name, issue, revoke};
    } else {
      error({"'predicate'", "'evidence'"});
    }
    expect_kw("from");
    d.roots.push_back(known(names_.states, "state"));
    while (is_sym(peek(), ",")) {
      next();
      d.roots.push_back(known(names_.states, "state"));
    }
    if (is_kw(peek(), "depth")) {
      next();
      d.depth = number();
    }
    d.span = finish(first);
    names_.presheaves.insert(name);
    return d;
  }

  Declaration corec(const Token& first) {
    next();
    std::string name = fresh_global("a corecursive name");
    names_.corecs.insert(name);
    expect_sym(":=");
    CorecDecl d;
    d.name = name;
    if (is_kw(peek(), "head")) {
      next();
      d.head = term();
      expect_sym(";");
      expect_kw("tail");
      expect_sym("(");
      d.tail_event = term();
      expect_sym(",");
      d.tail_ref = ident("a corecursive name").text;
      expect_sym(")");
    } else {
      d.tail_ref = ident("'head' or a corecursive name").text;
    }
    d.span = finish(first);
    return d;
  }

  PolicyPtr policy() {
    const Token& t = peek();
    if (is_kw(t, "not")) {
      next();
      return PolicyExpr::negate(policy());
    }
    if (is_kw(t, "occurs")) {
      next();
      expect_sym("(");
      std::string e = known(names_.events, "event");
      expect_sym(")");
      return PolicyExpr::occurs(e);
    }
    if (is_kw(t, "count")) {
      next();
      expect_sym("(");
      std::string e = known(names_.events, "event");
      expect_sym(")");
      expect_sym(">=");
      return PolicyExpr::count_at_least(e, number());
    }
    if (is_kw(t, "and") || is_kw(t, "or")) {
      bool conj = is_kw(t, "and");
      next();
      expect_sym("(");
      PolicyPtr a = policy();
      expect_sym(",");
      PolicyPtr b = policy();
      expect_sym(")");
      return conj ? PolicyExpr::both(a, b) : PolicyExpr::either(a, b);
    }
    if (is_sym(t, "(")) {
      next();
      PolicyPtr p = policy();
      expect_sym(")");
      return p;
    }
    if (t.kind == Tok::Ident && !is_keyword(t.text)) {
      auto it = names_.policies.find(t.text);
      if (it == names_.policies.end()) error_at(t, "unknown policy '" + t.text + "'");
      next();
      return it->second;
    }
    error({"a policy"});
  }

  // --- terms ---------------------------------------------------------------

  bool starts_atom(const Token& t) const {
    if (is_sym(t, "(")) return true;
    if (t.kind != Tok::Ident) return false;
    static const std::set<std::string, std::less<>> atom_keywords = {
        "Uc",   "Type", "Prop",  "State", "Event", "Nat",      "InfTrace", "bot",
        "zero", "succ", "nil",   "step",  "trace_elim", "FinTrace", "Step"};
    return !is_keyword(t.text) || atom_keywords.count(t.text);
  }

  std::string binder() {
    const Token& t = ident("a binder name");
    if (std::find(locals_.begin(), locals_.end(), t.text) != locals_.end()) {
      error_at(t, "'" + t.text + "' is already bound here");
    }
    return t.text;
  }

  TermPtr term() {
    if (is_kw(peek(), "fun")) {
      next();
      std::string x = binder();
      expect_sym("=>");
      locals_.push_back(x);
      TermPtr body = term();
      locals_.pop_back();
      return mk::lam(body, x);
    }
    if (is_sym(peek(), "(") && peek(1).kind == Tok::Ident && is_sym(peek(2), ":")) {
      next();
      std::string x = binder();
      expect_sym(":");
      TermPtr dom = term();
      expect_sym(")");
      expect_sym("->");
      locals_.push_back(x);
      TermPtr cod = term();
      locals_.pop_back();
      return mk::pi(dom, cod, x);
    }
    TermPtr lhs = application();
    if (is_sym(peek(), "->")) {
      next();
      locals_.emplace_back();  // anonymous binder
      TermPtr rhs = term();
      locals_.pop_back();
      return mk::pi(lhs, rhs, "_");
    }
    return lhs;
  }

  TermPtr application() {
    if (!starts_atom(peek())) error({"a term"});
    TermPtr t = atom();
    while (starts_atom(peek())) t = mk::app(t, atom());
    return t;
  }

  std::vector<TermPtr> args(std::size_t n) {
    expect_sym("(");
    std::vector<TermPtr> out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) expect_sym(",");
      out.push_back(term());
    }
    expect_sym(")");
    return out;
  }

  TermPtr atom() {
    const Token& t = peek();
    if (is_sym(t, "(")) {
      next();
      TermPtr inner = term();
      expect_sym(")");
      return inner;
    }
    const std::string& w = t.text;
    if (w == "Uc" || w == "Type") {
      next();
      expect_sym("(");
      unsigned l = level();
      expect_sym(")");
      return w == "Uc" ? mk::uc(l) : mk::type(l);
    }
    if (w == "Prop") return next(), mk::prop();
    if (w == "State") return next(), mk::state_ty();
    if (w == "Event") return next(), mk::event_ty();
    if (w == "Nat") return next(), mk::nat_ty();
    if (w == "InfTrace") return next(), mk::inf_trace_ty();
    if (w == "bot") return next(), mk::bottom();
    if (w == "zero") return next(), mk::zero();
    if (w == "succ") {
      next();
      return mk::succ(args(1)[0]);
    }
    if (w == "nil") {
      next();
      return mk::nil(args(1)[0]);
    }
    if (w == "step") {
      next();
      auto a = args(3);
      return mk::step(a[0], a[1], a[2]);
    }
    if (w == "trace_elim") {
      next();
      auto a = args(4);
      return mk::trace_elim(a[0], a[1], a[2], a[3]);
    }
    if (w == "FinTrace") {
      next();
      auto a = args(2);
      return mk::fin_trace(a[0], a[1]);
    }
    if (w == "Step") {
      next();
      auto a = args(3);
      return mk::step_ty(a[0], a[1], a[2]);
    }
    return name(next());
  }

  TermPtr name(const Token& t) {
    for (std::size_t i = locals_.size(); i-- > 0;) {
      if (locals_[i] == t.text) return mk::var(locals_.size() - 1 - i);
    }
    if (names_.states.count(t.text)) return mk::state(t.text);
    if (names_.events.count(t.text)) return mk::event(t.text);
    if (names_.witnesses.count(t.text)) return mk::witness(t.text);
    if (names_.corecs.count(t.text) || forward_corecs_.count(t.text)) return mk::corec(t.text);
    if (auto it = names_.defs.find(t.text); it != names_.defs.end()) return it->second;
    error_at(t, "unknown identifier '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Token* last_ = nullptr;
  std::string file_;
  NameTable names_;
  std::set<std::string, std::less<>> forward_corecs_;
  std::vector<std::string> locals_;
};

}  // namespace

ModuleAST parse_module(std::string_view text, const std::string& file) {
  Parser p(Lexer(text, file).run(), file, NameTable{});
  return p.module();
}

NameTable names_of(const ModuleAST& m) {
  NameTable n;
  for (const auto& d : m.declarations) {
    if (const auto* s = std::get_if<StateDecl>(&d)) n.states.insert(s->name);
    if (const auto* e = std::get_if<EventDecl>(&d)) n.events.insert(e->name);
    if (const auto* st = std::get_if<StepDecl>(&d)) n.witnesses.insert(st->witness);
    if (const auto* df = std::get_if<DefDecl>(&d)) n.defs.emplace(df->name, df->body);
    if (const auto* p = std::get_if<PolicyDecl>(&d)) n.policies.emplace(p->name, p->expr);
    if (const auto* ps = std::get_if<PresheafDecl>(&d)) n.presheaves.insert(presheaf_name(ps->spec));
    if (const auto* c = std::get_if<CorecDecl>(&d)) n.corecs.insert(c->name);
  }
  return n;
}

TermPtr parse_term(std::string_view text, const NameTable& names, const std::vector<std::string>& locals) {
  Parser p(Lexer(text, "<term>").run(), "<term>", names);
  return p.standalone_term(locals);
}

}  // namespace dekl
