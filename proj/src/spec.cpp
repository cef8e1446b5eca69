#include "veristat/spec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "veristat/error.hpp"

namespace veristat {

// ---------------------------------------------------------------------------
// Values

Value Value::of_number(double v) {
  Value out;
  out.kind = Kind::number;
  out.number = v;
  return out;
}

Value Value::of_string(std::string s) {
  Value out;
  out.kind = Kind::string;
  out.text = std::move(s);
  return out;
}

Value Value::of_reference(std::string root, std::optional<ColumnSelector> column) {
  Value out;
  out.kind = Kind::reference;
  out.text = std::move(root);
  out.column = std::move(column);
  return out;
}

Value Value::of_list(std::vector<Value> items) {
  Value out;
  out.kind = Kind::list;
  out.items = std::move(items);
  return out;
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string Value::to_text() const {
  switch (kind) {
    case Kind::number:
      return format_number(number);
    case Kind::string:
      return quote(text);
    case Kind::reference: {
      if (!column) return text;
      if (const auto* index = std::get_if<std::size_t>(&*column)) {
        return text + ".col[" + std::to_string(*index) + "]";
      }
      return text + "." + std::get<std::string>(*column);
    }
    case Kind::list: {
      std::string out = "[";
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i].to_text();
      }
      return out + "]";
    }
  }
  return {};
}

const Directive* Block::find(const std::string& key) const {
  for (const auto& d : directives) {
    if (d.key == key) return &d;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { ident, number, string, lbrace, rbrace, lbracket, rbracket, equals, semicolon, comma, dot, newline, end };

struct Token {
  Tok type;
  std::string text;
  double number = 0;
  SourceLocation loc;
};

const char* token_name(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::number: return "number";
    case Tok::string: return "string";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::equals: return "'='";
    case Tok::semicolon: return "';'";
    case Tok::comma: return "','";
    case Tok::dot: return "'.'";
    case Tok::newline: return "end of line";
    case Tok::end: return "end of input";
  }
  return "?";
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) { throw ParseError(msg, line, col); };
  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto single = [&](Tok t) {
    tokens.push_back({t, std::string(1, text[i]), 0, {line, col}});
    advance();
  };

  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance();
      continue;
    }
    if (c == '\n') {
      single(Tok::newline);
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      advance();
      continue;
    }
    switch (c) {
      case '{': single(Tok::lbrace); continue;
      case '}': single(Tok::rbrace); continue;
      case '[': single(Tok::lbracket); continue;
      case ']': single(Tok::rbracket); continue;
      case '=': single(Tok::equals); continue;
      case ';': single(Tok::semicolon); continue;
      case ',': single(Tok::comma); continue;
      case '.':
        if (!(i + 1 < text.size() && digit(text[i + 1]))) {
          single(Tok::dot);
          continue;
        }
        break;
      default: break;
    }
    const SourceLocation loc{line, col};
    if (c == '"') {
      advance();
      std::string s;
      while (true) {
        if (i >= text.size() || text[i] == '\n') fail("unterminated string");
        if (text[i] == '"') break;
        if (text[i] == '\\') {
          advance();
          if (i >= text.size()) fail("unterminated string");
          s.push_back(text[i] == 'n' ? '\n' : text[i]);
          advance();
          continue;
        }
        s.push_back(text[i]);
        advance();
      }
      advance();
      tokens.push_back({Tok::string, std::move(s), 0, loc});
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      tokens.push_back({Tok::ident, text.substr(i, j - i), 0, loc});
      advance(j - i);
      continue;
    }
    if (digit(c) || c == '-' || c == '+' || c == '.') {
      std::size_t j = i;
      if (text[j] == '-' || text[j] == '+') ++j;
      while (j < text.size() && digit(text[j])) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        while (j < text.size() && digit(text[j])) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '-' || text[k] == '+')) ++k;
        if (k < text.size() && digit(text[k])) {
          j = k;
          while (j < text.size() && digit(text[j])) ++j;
        }
      }
      std::string_view lexeme(text.data() + i, j - i);
      if (!lexeme.empty() && lexeme.front() == '+') lexeme.remove_prefix(1);
      double value = 0;
      auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
      if (ec != std::errc() || ptr != lexeme.data() + lexeme.size()) {
        fail("malformed number '" + text.substr(i, j - i) + "'");
      }
      tokens.push_back({Tok::number, text.substr(i, j - i), value, loc});
      advance(j - i);
      continue;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
  tokens.push_back({Tok::end, "", 0, {line, col}});
  return tokens;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Document document() {
    Document doc;
    while (true) {
      skip_separators();
      if (peek().type == Tok::end) break;
      const Token head = expect(Tok::ident, "a block keyword");
      if (peek().type == Tok::equals) {
        next();
        doc.assignments.push_back({head.text, value(), head.loc});
        end_of_directive();
        continue;
      }
      Block block;
      block.keyword = head.text;
      block.location = head.loc;
      block.id = expect(Tok::ident, "a block identifier").text;
      expect(Tok::lbrace, "'{'");
      while (true) {
        skip_separators();
        if (peek().type == Tok::rbrace) {
          next();
          break;
        }
        const Token key = expect(Tok::ident, "a key or '}'");
        expect(Tok::equals, "'='");
        block.directives.push_back({key.text, value(), key.loc});
        if (peek().type == Tok::rbrace) continue;
        end_of_directive();
      }
      doc.blocks.push_back(std::move(block));
    }
    return doc;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  Token next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw ParseError(msg, at.loc.line, at.loc.column);
  }

  Token expect(Tok type, const std::string& what) {
    if (peek().type != type) {
      fail(peek(), std::string("expected ") + what + ", found " + token_name(peek().type) +
                       (peek().text.empty() || peek().type == Tok::newline ? "" : " '" + peek().text + "'"));
    }
    return next();
  }

  void skip_separators() {
    while (peek().type == Tok::newline || peek().type == Tok::semicolon) next();
  }

  void skip_newlines() {
    while (peek().type == Tok::newline) next();
  }

  void end_of_directive() {
    const Tok t = peek().type;
    if (t != Tok::newline && t != Tok::semicolon && t != Tok::end) {
      fail(peek(), std::string("expected end of directive, found ") + token_name(t));
    }
  }

  Value value() {
    const Token t = next();
    switch (t.type) {
      case Tok::number: {
        Value v = Value::of_number(t.number);
        v.location = t.loc;
        return v;
      }
      case Tok::string: {
        Value v = Value::of_string(t.text);
        v.location = t.loc;
        return v;
      }
      case Tok::ident: {
        Value v = Value::of_reference(t.text);
        v.location = t.loc;
        if (peek().type == Tok::dot) {
          next();
          const Token member = expect(Tok::ident, "a column name or col[n]");
          if (member.text == "col" && peek().type == Tok::lbracket) {
            next();
            const Token index = expect(Tok::number, "a column index");
            if (index.number < 1 || index.number != std::floor(index.number)) {
              fail(index, "column index must be a positive integer");
            }
            expect(Tok::rbracket, "']'");
            v.column = static_cast<std::size_t>(index.number);
          } else {
            v.column = member.text;
          }
        }
        return v;
      }
      case Tok::lbracket: {
        std::vector<Value> items;
        skip_newlines();
        while (peek().type != Tok::rbracket) {
          items.push_back(value());
          skip_newlines();
          if (peek().type == Tok::comma) {
            next();
            skip_newlines();
          } else if (peek().type != Tok::rbracket) {
            fail(peek(), "expected ',' or ']' in list");
          }
        }
        next();
        Value v = Value::of_list(std::move(items));
        v.location = t.loc;
        return v;
      }
      default:
        fail(t, std::string("expected a value, found ") + token_name(t.type));
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Document parse_document(const std::string& text) {
  return Parser(tokenize(text)).document();
}

// ---------------------------------------------------------------------------
// Kind catalog

namespace {

ParamInfo param(std::string name, ParamType type, bool required, std::optional<Value> def,
                std::string meaning) {
  return ParamInfo{std::move(name), type, required, std::move(def), std::move(meaning)};
}

std::vector<KindInfo> build_catalog() {
  using K = StatementKind;
  using B = BindingType;
  using P = ParamType;
  const auto num = [](double v) { return std::optional<Value>(Value::of_number(v)); };
  return {
      {K::no_missing, B::column,
       {param("sentinels", P::number_list, false, std::nullopt,
              "coded-missing values; defaults to the dataset's sentinels")},
       false,
       {"any absent cell -> \"NA values present\"",
        "any cell equal to a sentinel s -> \"<s> missing values present\""},
       "column has no absent cells and no sentinel-coded values"},
      {K::no_infinite, B::column, {}, false,
       {"any +/-infinite cell -> \"Inf/-Inf values present\""},
       "column has no infinite values"},
      {K::mean_equals, B::column,
       {param("target", P::number, true, std::nullopt, "claimed mean"),
        param("rel_tol", P::number, false, num(1.5e-8), "relative tolerance of the comparison"),
        param("round_digits", P::integer, false, std::nullopt,
              "compare the mean rounded half-even to this many digits instead")},
       false,
       {"mean absent, or not equal to target in the all.equal sense -> \"mean of <column> is not equal to <target>\""},
       "column mean equals the target"},
      {K::median_close_to, B::column,
       {param("target", P::number, true, std::nullopt, "claimed centre"),
        param("window", P::number, false, num(0.5), "allowed distance of the median from target")},
       true,
       {"|median - target| > window -> \"median not close to <target>\""},
       "column median lies within the window around target"},
      {K::fivenum_no_outliers, B::column,
       {param("iqr_multiplier", P::number, false, num(3), "reach in hinge spreads from the median")},
       true,
       {"max > median + k * (upper hinge - lower hinge) -> \"there are outliers to the right\"",
        "min < median - k * (upper hinge - lower hinge) -> \"there are outliers to the left\""},
       "five-number summary shows no values beyond k hinge spreads of the median"},
      {K::table_shape, B::table,
       {param("n_rows", P::integer, false, std::nullopt, "expected row count"),
        param("n_cols", P::integer, false, std::nullopt, "expected column count"),
        param("column_names", P::string_list, false, std::nullopt, "expected set of column names"),
        param("no_missing_in", P::string_list, false, std::nullopt,
              "columns that must have no absent cells")},
       false,
       {"row count differs -> \"incorrect number of rows\"",
        "column count differs -> \"incorrect number of columns\"",
        "column names differ -> \"wrong column names\"",
        "absent cell in a listed column -> \"NA values in '<a>' or '<b>'\""},
       "table has the expected shape"},
      {K::slope_claim, B::fit,
       {param("claim", P::number, true, std::nullopt, "claimed slope"),
        param("round_digits", P::integer, false, num(2), "digits the slope is rounded to")},
       false,
       {"round(slope, digits) != claim -> \"slope coefficient does not match claim\""},
       "fitted slope rounds to the claimed value"},
      {K::no_nonlinearity, B::fit,
       {param("llr_bound", P::number, false, num(7),
              "log-likelihood gain of a quadratic term that counts as nonlinearity")},
       false,
       {"logLik(quadratic) - logLik(linear) >= llr_bound -> \"strong evidence of nonlinearity in the data\""},
       "a quadratic term does not improve the fit substantially"},
      {K::no_resid_outliers, B::fit,
       {param("resid_bound", P::number, false, num(4), "largest allowed |standardized residual|")},
       false,
       {"any |standardized residual| > resid_bound -> \"some standardized residuals are greater than +/-<bound>\""},
       "no standardized residual is extreme"},
      {K::no_high_leverage, B::fit,
       {param("leverage_factor", P::number, false, num(5), "allowed multiple of the mean hat value")},
       false,
       {"any hat value > leverage_factor * mean(hat) -> \"some points have very high leverage\""},
       "no point has very high leverage"},
      {K::plot_confirm, B::fit,
       {param("plot", P::word, true, std::nullopt, "residual_histogram or fitted_vs_residual")},
       false,
       {"answer is not y (residual_histogram) -> \"problem with histogram of standardized residuals\"",
        "answer is not y (fitted_vs_residual) -> \"problem with residuals vs. fitted plot\""},
       "analyst confirms the diagnostic plot looks as expected"},
      {K::all_of, B::none, {}, false, {}, "group; holds when all premises hold"},
  };
}

}  // namespace

const char* to_string(StatementKind kind) {
  switch (kind) {
    case StatementKind::no_missing: return "no_missing";
    case StatementKind::no_infinite: return "no_infinite";
    case StatementKind::mean_equals: return "mean_equals";
    case StatementKind::median_close_to: return "median_close_to";
    case StatementKind::fivenum_no_outliers: return "fivenum_no_outliers";
    case StatementKind::table_shape: return "table_shape";
    case StatementKind::slope_claim: return "slope_claim";
    case StatementKind::no_nonlinearity: return "no_nonlinearity";
    case StatementKind::no_resid_outliers: return "no_resid_outliers";
    case StatementKind::no_high_leverage: return "no_high_leverage";
    case StatementKind::plot_confirm: return "plot_confirm";
    case StatementKind::all_of: return "all_of";
  }
  return "?";
}

const std::vector<StatementKind>& all_statement_kinds() {
  static const std::vector<StatementKind> kinds = [] {
    std::vector<StatementKind> out;
    for (const auto& info : build_catalog()) out.push_back(info.kind);
    return out;
  }();
  return kinds;
}

std::optional<StatementKind> parse_statement_kind(const std::string& name) {
  for (auto k : all_statement_kinds()) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

const KindInfo& kind_info(StatementKind kind) {
  static const std::vector<KindInfo> catalog = build_catalog();
  for (const auto& info : catalog) {
    if (info.kind == kind) return info;
  }
  throw SpecError("unknown statement kind");
}

std::string describe(const Binding& binding) {
  return std::visit(
      [](const auto& b) -> std::string {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, ColumnBinding>) {
          return Value::of_reference(b.table, b.selector).to_text();
        } else if constexpr (std::is_same_v<T, TableBinding>) {
          return b.table;
        } else {
          return b.fit;
        }
      },
      binding);
}

// ---------------------------------------------------------------------------
// Typed parameter access

namespace {

const ParamInfo* find_param(StatementKind kind, const std::string& name) {
  for (const auto& p : kind_info(kind).params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

}  // namespace

std::optional<double> StatementSpec::optional_number(const std::string& name) const {
  if (auto it = params.find(name); it != params.end()) return it->second.number;
  if (const auto* p = find_param(kind, name); p && p->default_value) return p->default_value->number;
  return std::nullopt;
}

double StatementSpec::number(const std::string& name) const {
  if (auto v = optional_number(name)) return *v;
  throw SpecError("statement '" + id + "' has no parameter '" + name + "'");
}

std::string StatementSpec::word(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) throw SpecError("statement '" + id + "' has no parameter '" + name + "'");
  return it->second.text;
}

std::optional<std::vector<std::string>> StatementSpec::strings(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& item : it->second.items) out.push_back(item.text);
  return out;
}

std::optional<std::vector<double>> StatementSpec::numbers(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  std::vector<double> out;
  for (const auto& item : it->second.items) out.push_back(item.number);
  return out;
}

// ---------------------------------------------------------------------------
// AnalysisSpec lookups

const StatementSpec* AnalysisSpec::find_statement(const std::string& id) const {
  for (const auto& s : statements) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const StatementSpec& AnalysisSpec::statement(const std::string& id) const {
  if (const auto* s = find_statement(id)) return *s;
  throw SpecError("unknown statement '" + id + "'");
}

const DatasetSpec* AnalysisSpec::find_dataset(const std::string& id) const {
  for (const auto& d : datasets) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const DeriveSpec* AnalysisSpec::find_derivation(const std::string& id) const {
  for (const auto& d : derivations) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const FitSpec* AnalysisSpec::find_fit(const std::string& id) const {
  for (const auto& f : fits) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

bool AnalysisSpec::is_table(const std::string& id) const {
  return find_dataset(id) != nullptr || find_derivation(id) != nullptr;
}

const DatasetSpec& AnalysisSpec::origin_dataset(const std::string& table_id) const {
  std::string id = table_id;
  for (std::size_t guard = 0; guard <= derivations.size(); ++guard) {
    if (const auto* d = find_dataset(id)) return *d;
    const auto* derive = find_derivation(id);
    if (!derive) break;
    id = derive->left;
  }
  throw SpecError("'" + table_id + "' is not a dataset or derivation");
}

// ---------------------------------------------------------------------------
// Spec construction

namespace {

[[noreturn]] void fail_at(const SourceLocation& loc, const std::string& msg) {
  throw ParseError(msg, loc.line, loc.column);
}

bool is_word(const Value& v) {
  return v.kind == Value::Kind::string || (v.kind == Value::Kind::reference && !v.column);
}

std::string require_word(const Directive& d) {
  if (!is_word(d.value)) fail_at(d.value.location, "'" + d.key + "' expects a name");
  return d.value.text;
}

std::vector<std::string> require_words(const Directive& d) {
  if (d.value.kind != Value::Kind::list) fail_at(d.value.location, "'" + d.key + "' expects a list");
  std::vector<std::string> out;
  for (const auto& item : d.value.items) {
    if (!is_word(item)) fail_at(item.location, "'" + d.key + "' expects a list of names");
    out.push_back(item.text);
  }
  return out;
}

std::vector<double> require_numbers(const Directive& d) {
  if (d.value.kind != Value::Kind::list) fail_at(d.value.location, "'" + d.key + "' expects a list");
  std::vector<double> out;
  for (const auto& item : d.value.items) {
    if (item.kind != Value::Kind::number) {
      fail_at(item.location, "'" + d.key + "' expects a list of numbers");
    }
    out.push_back(item.number);
  }
  return out;
}

ColumnSelector require_selector(const Directive& d) {
  if (d.value.kind == Value::Kind::number) {
    if (d.value.number < 1 || d.value.number != std::floor(d.value.number)) {
      fail_at(d.value.location, "'" + d.key + "' column index must be a positive integer");
    }
    return static_cast<std::size_t>(d.value.number);
  }
  if (is_word(d.value)) return d.value.text;
  fail_at(d.value.location, "'" + d.key + "' expects a column name or 1-based index");
}

void check_keys(const Block& block, std::initializer_list<const char*> allowed) {
  std::set<std::string> seen;
  for (const auto& d : block.directives) {
    if (!seen.insert(d.key).second) fail_at(d.location, "duplicate key '" + d.key + "'");
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return d.key == k; })) {
      fail_at(d.location, "unknown key '" + d.key + "' in " + block.keyword + " '" + block.id + "'");
    }
  }
}

const Directive& required(const Block& block, const std::string& key) {
  if (const auto* d = block.find(key)) return *d;
  fail_at(block.location, block.keyword + " '" + block.id + "' is missing '" + key + "'");
}

void validate_param(const Directive& d, const ParamInfo& info) {
  const Value& v = d.value;
  switch (info.type) {
    case ParamType::number:
    case ParamType::integer:
      if (v.kind != Value::Kind::number) fail_at(v.location, "'" + d.key + "' expects a number");
      if (info.type == ParamType::integer && v.number != std::floor(v.number)) {
        fail_at(v.location, "'" + d.key + "' expects an integer");
      }
      break;
    case ParamType::word:
      require_word(d);
      break;
    case ParamType::string_list:
      require_words(d);
      break;
    case ParamType::number_list:
      for (double s : require_numbers(d)) {
        if (!std::isfinite(s)) fail_at(v.location, "'" + d.key + "' values must be finite");
      }
      break;
  }
  static const std::set<std::string> positive{"rel_tol", "window", "iqr_multiplier", "llr_bound",
                                              "resid_bound", "leverage_factor"};
  static const std::set<std::string> non_negative{"round_digits", "n_rows", "n_cols"};
  if (positive.count(d.key) && !(v.number > 0)) fail_at(v.location, "'" + d.key + "' must be positive");
  if (non_negative.count(d.key) && v.number < 0) {
    fail_at(v.location, "'" + d.key + "' must be non-negative");
  }
  if (d.key == "plot" && v.text != "residual_histogram" && v.text != "fitted_vs_residual") {
    fail_at(v.location, "'plot' must be residual_histogram or fitted_vs_residual");
  }
}

}  // namespace

AnalysisSpec parse_spec(const std::string& text) {
  const Document doc = parse_document(text);
  AnalysisSpec spec;
  std::set<std::string> ids;
  auto claim_id = [&](const Block& b) {
    if (!ids.insert(b.id).second) fail_at(b.location, "duplicate id '" + b.id + "'");
  };
  auto require_table = [&](const Directive& d) {
    const std::string id = require_word(d);
    if (!spec.is_table(id)) {
      fail_at(d.value.location, "'" + id + "' is not a previously declared dataset or derivation");
    }
    return id;
  };

  std::vector<const Block*> statement_blocks;
  for (const auto& block : doc.blocks) {
    if (block.keyword == "dataset") {
      claim_id(block);
      check_keys(block, {"source", "missing", "sentinels", "text", "numeric"});
      DatasetSpec ds;
      ds.id = block.id;
      ds.location = block.location;
      const Directive& source = required(block, "source");
      if (source.value.kind != Value::Kind::string) fail_at(source.value.location, "'source' expects a string");
      ds.source = source.value.text;
      if (const auto* d = block.find("missing")) ds.conventions.missing_tokens = require_words(*d);
      if (const auto* d = block.find("sentinels")) {
        ds.conventions.numeric_sentinels = require_numbers(*d);
        for (double s : ds.conventions.numeric_sentinels) {
          if (!std::isfinite(s)) fail_at(d->value.location, "sentinels must be finite numbers");
        }
      }
      for (const char* key : {"text", "numeric"}) {
        if (const auto* d = block.find(key)) {
          for (const auto& name : require_words(*d)) {
            ds.types[name] = std::string(key) == "text" ? ColumnType::text : ColumnType::numeric;
          }
        }
      }
      spec.datasets.push_back(std::move(ds));
    } else if (block.keyword == "derive") {
      claim_id(block);
      check_keys(block, {"join", "left", "right", "keys"});
      DeriveSpec dv;
      dv.id = block.id;
      dv.location = block.location;
      const Directive& join = required(block, "join");
      const auto kind = parse_join_kind(require_word(join));
      if (!kind) fail_at(join.value.location, "unknown join kind '" + join.value.text + "'");
      dv.join = *kind;
      dv.left = require_table(required(block, "left"));
      dv.right = require_table(required(block, "right"));
      dv.keys = require_words(required(block, "keys"));
      if (dv.keys.empty()) fail_at(block.location, "derive '" + block.id + "' needs at least one key");
      spec.derivations.push_back(std::move(dv));
    } else if (block.keyword == "fit") {
      claim_id(block);
      check_keys(block, {"data", "x", "y", "degree"});
      FitSpec fit;
      fit.id = block.id;
      fit.location = block.location;
      fit.data = require_table(required(block, "data"));
      fit.x = require_selector(required(block, "x"));
      fit.y = require_selector(required(block, "y"));
      if (const auto* d = block.find("degree")) {
        if (d->value.kind != Value::Kind::number || (d->value.number != 1 && d->value.number != 2)) {
          fail_at(d->value.location, "'degree' must be 1 or 2");
        }
        fit.degree = static_cast<int>(d->value.number);
      }
      spec.fits.push_back(std::move(fit));
    } else if (block.keyword == "statement") {
      claim_id(block);
      statement_blocks.push_back(&block);
    } else {
      fail_at(block.location, "unknown block keyword '" + block.keyword + "'");
    }
  }

  for (const Block* block : statement_blocks) {
    StatementSpec st;
    st.id = block->id;
    st.location = block->location;
    const Directive& kind_d = required(*block, "kind");
    const auto kind = parse_statement_kind(require_word(kind_d));
    if (!kind) fail_at(kind_d.value.location, "unknown statement kind '" + kind_d.value.text + "'");
    st.kind = *kind;
    const KindInfo& info = kind_info(st.kind);

    std::set<std::string> seen;
    for (const auto& d : block->directives) {
      if (!seen.insert(d.key).second) fail_at(d.location, "duplicate key '" + d.key + "'");
      if (d.key == "kind") continue;
      if (d.key == "premises") {
        if (d.value.kind != Value::Kind::list) fail_at(d.value.location, "'premises' expects a list");
        for (const auto& item : d.value.items) {
          if (item.kind != Value::Kind::reference || item.column) {
            fail_at(item.location, "premises must be statement ids");
          }
          st.premises.push_back(item.text);
        }
        continue;
      }
      if (d.key == "on") {
        const Value& v = d.value;
        if (v.kind != Value::Kind::reference) fail_at(v.location, "'on' expects a binding");
        switch (info.binding) {
          case BindingType::none:
            fail_at(v.location, std::string(to_string(st.kind)) + " takes no binding");
          case BindingType::column:
            if (!v.column) fail_at(v.location, "expected <table>.col[n] or <table>.<name>");
            if (!spec.is_table(v.text)) fail_at(v.location, "unknown dataset '" + v.text + "'");
            st.binding = ColumnBinding{v.text, *v.column};
            break;
          case BindingType::table:
            if (v.column || !spec.is_table(v.text)) fail_at(v.location, "expected a dataset or derivation id");
            st.binding = TableBinding{v.text};
            break;
          case BindingType::fit:
            if (v.column || !spec.find_fit(v.text)) fail_at(v.location, "expected a fit id, got '" + v.to_text() + "'");
            st.binding = FitBinding{v.text};
            break;
        }
        continue;
      }
      const ParamInfo* p = find_param(st.kind, d.key);
      if (!p) {
        fail_at(d.location, "unknown parameter '" + d.key + "' for kind " + to_string(st.kind));
      }
      validate_param(d, *p);
      Value v = d.value;
      st.params.emplace(d.key, std::move(v));
    }
    if (info.binding != BindingType::none && std::holds_alternative<std::monostate>(st.binding)) {
      fail_at(block->location, "statement '" + st.id + "' needs 'on'");
    }
    for (const auto& p : info.params) {
      if (p.required && !st.params.count(p.name)) {
        fail_at(block->location, "statement '" + st.id + "' is missing parameter '" + p.name + "'");
      }
    }
    if (st.kind == StatementKind::table_shape && st.params.empty()) {
      fail_at(block->location, "table_shape '" + st.id + "' states no expectation");
    }
    spec.statements.push_back(std::move(st));
  }

  // Premise references may point forward, so resolve them once every statement is known.
  for (std::size_t i = 0; i < statement_blocks.size(); ++i) {
    if (const auto* d = statement_blocks[i]->find("premises")) {
      for (const auto& item : d->value.items) {
        if (!spec.find_statement(item.text)) {
          fail_at(item.location, "premise '" + item.text + "' is not a declared statement");
        }
      }
    }
  }

  for (const auto& a : doc.assignments) {
    if (a.key != "roots") fail_at(a.location, "unknown top-level setting '" + a.key + "'");
    if (spec.explicit_roots) fail_at(a.location, "duplicate 'roots'");
    spec.explicit_roots = true;
    for (const auto& item : a.value.kind == Value::Kind::list ? a.value.items : std::vector<Value>{}) {
      if (item.kind != Value::Kind::reference || item.column || !spec.find_statement(item.text)) {
        fail_at(item.location, "root '" + item.to_text() + "' is not a declared statement");
      }
      spec.roots.push_back(item.text);
    }
    if (a.value.kind != Value::Kind::list) fail_at(a.value.location, "'roots' expects a list");
  }
  if (!spec.explicit_roots) {
    std::set<std::string> referenced;
    for (const auto& s : spec.statements) referenced.insert(s.premises.begin(), s.premises.end());
    for (const auto& s : spec.statements) {
      if (!referenced.count(s.id)) spec.roots.push_back(s.id);
    }
  }
  return spec;
}

AnalysisSpec parse_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot read spec '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

std::string to_text(const AnalysisSpec& spec) {
  std::ostringstream os;
  auto words = [](const std::vector<std::string>& names) {
    std::vector<Value> items;
    for (const auto& n : names) items.push_back(Value::of_string(n));
    return Value::of_list(std::move(items)).to_text();
  };
  auto selector = [](const ColumnSelector& s) {
    if (const auto* i = std::get_if<std::size_t>(&s)) return std::to_string(*i);
    return Value::of_string(std::get<std::string>(s)).to_text();
  };

  for (const auto& ds : spec.datasets) {
    os << "dataset " << ds.id << " {\n";
    os << "  source = " << Value::of_string(ds.source).to_text() << "\n";
    os << "  missing = " << words(ds.conventions.missing_tokens) << "\n";
    std::vector<Value> sentinels;
    for (double s : ds.conventions.numeric_sentinels) sentinels.push_back(Value::of_number(s));
    os << "  sentinels = " << Value::of_list(sentinels).to_text() << "\n";
    std::vector<std::string> text_cols;
    std::vector<std::string> numeric_cols;
    for (const auto& [name, type] : ds.types) {
      (type == ColumnType::text ? text_cols : numeric_cols).push_back(name);
    }
    if (!text_cols.empty()) os << "  text = " << words(text_cols) << "\n";
    if (!numeric_cols.empty()) os << "  numeric = " << words(numeric_cols) << "\n";
    os << "}\n\n";
  }
  // Derivations and fits may only reference earlier tables, so emit them in dependency order.
  for (const auto& dv : spec.derivations) {
    os << "derive " << dv.id << " {\n"
       << "  join = " << to_string(dv.join) << "\n"
       << "  left = " << dv.left << "\n"
       << "  right = " << dv.right << "\n"
       << "  keys = " << words(dv.keys) << "\n}\n\n";
  }
  for (const auto& fit : spec.fits) {
    os << "fit " << fit.id << " {\n"
       << "  data = " << fit.data << "\n"
       << "  x = " << selector(fit.x) << "\n"
       << "  y = " << selector(fit.y) << "\n"
       << "  degree = " << fit.degree << "\n}\n\n";
  }
  for (const auto& st : spec.statements) {
    os << "statement " << st.id << " {\n";
    os << "  kind = " << to_string(st.kind) << "\n";
    if (!std::holds_alternative<std::monostate>(st.binding)) os << "  on = " << describe(st.binding) << "\n";
    if (!st.premises.empty()) {
      std::vector<Value> refs;
      for (const auto& p : st.premises) refs.push_back(Value::of_reference(p));
      os << "  premises = " << Value::of_list(refs).to_text() << "\n";
    }
    for (const auto& [key, value] : st.params) os << "  " << key << " = " << value.to_text() << "\n";
    os << "}\n\n";
  }
  if (spec.explicit_roots) {
    std::vector<Value> refs;
    for (const auto& r : spec.roots) refs.push_back(Value::of_reference(r));
    os << "roots = " << Value::of_list(refs).to_text() << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Lint

namespace {

using Graph = std::map<std::string, std::vector<std::string>>;

Graph premise_graph(const AnalysisSpec& spec) {
  Graph g;
  for (const auto& s : spec.statements) g[s.id] = s.premises;
  return g;
}

// Every node reachable from `start` through premise edges, `start` included.
std::set<std::string> closure(const Graph& g, const std::string& start) {
  std::set<std::string> seen;
  std::vector<std::string> stack{start};
  while (!stack.empty()) {
    const std::string id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    if (auto it = g.find(id); it != g.end()) {
      for (const auto& p : it->second) stack.push_back(p);
    }
  }
  return seen;
}

std::vector<std::vector<std::string>> find_cycles(const AnalysisSpec& spec, const Graph& g) {
  enum class Mark { unvisited, active, done };
  std::map<std::string, Mark> marks;
  std::vector<std::string> path;
  std::vector<std::vector<std::string>> cycles;
  std::set<std::vector<std::string>> canonical;

  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    marks[id] = Mark::active;
    path.push_back(id);
    for (const auto& p : g.at(id)) {
      if (marks[p] == Mark::active) {
        auto start = std::find(path.begin(), path.end(), p);
        std::vector<std::string> cycle(start, path.end());
        auto key = cycle;
        std::sort(key.begin(), key.end());
        if (canonical.insert(key).second) cycles.push_back(cycle);
      } else if (marks[p] == Mark::unvisited) {
        visit(p);
      }
    }
    path.pop_back();
    marks[id] = Mark::done;
  };
  for (const auto& s : spec.statements) {
    if (marks[s.id] == Mark::unvisited) visit(s.id);
  }
  return cycles;
}

bool covers(const AnalysisSpec& spec, const Graph& g, const std::string& subtree_root,
            const ColumnBinding& column, const std::string& exclude) {
  for (const auto& id : closure(g, subtree_root)) {
    if (id == exclude) continue;
    const auto& st = spec.statement(id);
    if (st.kind != StatementKind::no_missing) continue;
    if (const auto* b = std::get_if<ColumnBinding>(&st.binding); b && *b == column) return true;
  }
  return false;
}

}  // namespace

std::vector<Finding> lint_spec(const AnalysisSpec& spec) {
  std::vector<Finding> findings;
  const Graph g = premise_graph(spec);

  for (const auto& cycle : find_cycles(spec, g)) {
    std::string text;
    for (const auto& id : cycle) text += id + " -> ";
    text += cycle.front();
    findings.push_back({Severity::error, cycle.front(), "premise cycle: " + text});
  }

  std::set<std::string> reachable;
  for (const auto& root : spec.roots) {
    auto c = closure(g, root);
    reachable.insert(c.begin(), c.end());
  }
  for (const auto& s : spec.statements) {
    if (!reachable.count(s.id)) {
      findings.push_back({Severity::warning, s.id, "statement is not reachable from any root"});
    }
  }

  std::map<std::string, std::vector<std::string>> parents;
  for (const auto& s : spec.statements) {
    for (const auto& p : s.premises) parents[p].push_back(s.id);
  }
  for (const auto& s : spec.statements) {
    if (!kind_info(s.kind).needs_complete_column) continue;
    const auto* column = std::get_if<ColumnBinding>(&s.binding);
    if (!column) continue;
    bool covered = covers(spec, g, s.id, *column, s.id);
    if (!covered && parents.count(s.id)) {
      // Every parent must evaluate a covering sibling before this statement.
      covered = true;
      for (const auto& parent_id : parents[s.id]) {
        const auto& siblings = spec.statement(parent_id).premises;
        bool found = false;
        for (const auto& sibling : siblings) {
          if (sibling == s.id) break;
          if (covers(spec, g, sibling, *column, s.id)) {
            found = true;
            break;
          }
        }
        covered = covered && found;
      }
    }
    if (!covered) {
      findings.push_back({Severity::warning, s.id,
                          std::string(to_string(s.kind)) + " on " + describe(s.binding) +
                              " has no preceding no_missing premise on that column"});
    }
  }
  return findings;
}

bool has_errors(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Severity::error; });
}

std::string to_string(const Finding& finding) {
  return std::string(finding.severity == Severity::error ? "error" : "warning") + ": " +
         finding.statement_id + ": " + finding.message;
}

}  // namespace veristat
