#include "mazt/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "mazt/errors.hpp"

namespace mazt {

struct Recipe::Node {
  enum class Op { Num, X, Y, Add, Sub, Mul, Div, Pow, Neg, Cos, Sin, Exp };
  Op op;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;

  double eval(double x, double y) const {
    switch (op) {
      case Op::Num: return value;
      case Op::X: return x;
      case Op::Y: return y;
      case Op::Add: return a->eval(x, y) + b->eval(x, y);
      case Op::Sub: return a->eval(x, y) - b->eval(x, y);
      case Op::Mul: return a->eval(x, y) * b->eval(x, y);
      case Op::Div: return a->eval(x, y) / b->eval(x, y);
      case Op::Pow: return std::pow(a->eval(x, y), b->eval(x, y));
      case Op::Neg: return -a->eval(x, y);
      case Op::Cos: return std::cos(a->eval(x, y));
      case Op::Sin: return std::sin(a->eval(x, y));
      case Op::Exp: return std::exp(a->eval(x, y));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Recipe::Node>;
using Op = Recipe::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr,
             double value = 0.0) {
  auto n = std::make_shared<Recipe::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->value = value;
  return n;
}

struct RecipeError {
  std::size_t pos;
  std::string msg;
};

class RecipeParser {
 public:
  explicit RecipeParser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw RecipeError{pos_, msg};
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    while (true) {
      if (eat('+')) {
        n = make(Op::Add, n, term());
      } else if (eat('-')) {
        n = make(Op::Sub, n, term());
      } else {
        return n;
      }
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    while (true) {
      if (eat('*')) {
        n = make(Op::Mul, n, unary());
      } else if (eat('/')) {
        n = make(Op::Div, n, unary());
      } else {
        return n;
      }
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Op::Neg, unary());
    if (eat('+')) return unary();
    NodePtr base = primary();
    if (eat('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("expression ends early");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const char* first = s_.data() + pos_;
      const auto [ptr, ec] =
          std::from_chars(first, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("bad number");
      pos_ += static_cast<std::size_t>(ptr - first);
      return make(Op::Num, nullptr, nullptr, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x") return make(Op::X);
      if (name == "y") return make(Op::Y);
      if (name == "pi") return make(Op::Num, nullptr, nullptr, std::numbers::pi);
      if (name == "e") return make(Op::Num, nullptr, nullptr, std::numbers::e);
      Op fn;
      if (name == "cos") {
        fn = Op::Cos;
      } else if (name == "sin") {
        fn = Op::Sin;
      } else if (name == "exp") {
        fn = Op::Exp;
      } else {
        pos_ = start;
        fail("unknown name '" + name + "'");
      }
      if (!eat('(')) fail("expected '(' after " + name);
      NodePtr arg = expr();
      if (!eat(')')) fail("expected ')'");
      return make(fn, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct Entry {
  std::string value;
  int line;
  int column;  // of the first value character
};

[[noreturn]] void parse_fail(int line, int column, const std::string& msg) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) +
                                         ", column " + std::to_string(column) +
                                         ": " + msg);
}

[[noreturn]] void invalid(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::ValidationError, field + ": " + msg);
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"scenario", {"kind"}},
      {"grid", {"N"}},
      {"forms", {"f_theta", "g"}},
      {"divisor", {"points", "f_L"}},
      {"params",
       {"beta", "lambda", "c", "lambda_count", "t", "delta_frac",
        "calibrate_N", "continuation", "seed"}},
      {"tolerances",
       {"newton_tol", "max_newton_iters", "linear_tol", "lcp_tol",
        "contact_tol", "psor_tol", "omega_relax", "ortho_tol", "support_tol",
        "stat_tol", "area_tol", "nesting_tol", "conc_tol", "legendre_tol",
        "slope_tol", "decay_tol", "flat_tail_tol"}},
      {"output", {"dir"}},
  };
  return s;
}

double to_double(const Entry& e, const std::string& field) {
  const std::string v = trim(e.value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    parse_fail(e.line, e.column, field + " expects a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const Entry& e, const std::string& field) {
  const std::string v = trim(e.value);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    parse_fail(e.line, e.column, field + " expects an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const Entry& e, const std::string& field) {
  const std::string v = trim(e.value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  parse_fail(e.line, e.column, field + " expects true or false");
}

// "[a, b, c]" or "a, b, c"; brackets optional.
std::vector<double> to_list(const Entry& e, const std::string& field) {
  std::string v = trim(e.value);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') parse_fail(e.line, e.column, field + ": missing ']'");
    v = v.substr(1, v.size() - 2);
  }
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    Entry sub{item, e.line, e.column};
    out.push_back(to_double(sub, field));
  }
  return out;
}

// "(x, y, m), (x, y, m)" with optional surrounding brackets.
std::vector<DivisorSpec::Point> to_points(const Entry& e) {
  std::string v = trim(e.value);
  if (!v.empty() && v.front() == '[' && v.back() == ']') {
    v = v.substr(1, v.size() - 2);
  }
  std::vector<DivisorSpec::Point> out;
  std::size_t pos = 0;
  while (true) {
    while (pos < v.size() && (std::isspace(static_cast<unsigned char>(v[pos])) ||
                              v[pos] == ',' || v[pos] == ';'))
      ++pos;
    if (pos >= v.size()) break;
    if (v[pos] != '(') {
      parse_fail(e.line, e.column + static_cast<int>(pos),
                 "divisor points are written (x, y, multiplicity)");
    }
    const std::size_t close = v.find(')', pos);
    if (close == std::string::npos) {
      parse_fail(e.line, e.column + static_cast<int>(pos), "missing ')'");
    }
    Entry inner{v.substr(pos + 1, close - pos - 1), e.line,
                e.column + static_cast<int>(pos) + 1};
    const std::vector<double> xs = to_list(inner, "divisor.points");
    if (xs.size() != 3) {
      parse_fail(inner.line, inner.column,
                 "divisor point needs exactly 3 entries");
    }
    if (xs[2] != std::floor(xs[2])) {
      parse_fail(inner.line, inner.column, "multiplicity must be an integer");
    }
    out.push_back({xs[0], xs[1], static_cast<int>(xs[2])});
    pos = close + 1;
  }
  return out;
}

void check_recipe(const Entry& e, const std::string& field) {
  try {
    RecipeParser(e.value).parse();
  } catch (const RecipeError& err) {
    parse_fail(e.line, e.column + static_cast<int>(err.pos),
               field + ": " + err.msg);
  }
}

void require_positive(double v, const std::string& field) {
  if (!(v > 0.0)) invalid(field, "must be positive");
}

void require_increasing(const std::vector<double>& v, const std::string& field) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] > v[k - 1])) invalid(field, "values must increase strictly");
  }
}

}  // namespace

Recipe Recipe::compile(const std::string& text) {
  Recipe r;
  r.text_ = text;
  try {
    r.root_ = RecipeParser(text).parse();
  } catch (const RecipeError& err) {
    throw Error(ErrorCode::ParseError,
                "column " + std::to_string(err.pos + 1) + ": " + err.msg);
  }
  return r;
}

double Recipe::operator()(double x, double y) const {
  return root_->eval(x, y);
}

std::function<double(double, double)> Recipe::function() const {
  auto root = root_;
  return [root](double x, double y) { return root->eval(x, y); };
}

const char* scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Solve: return "solve";
    case ScenarioKind::Envelope: return "envelope";
    case ScenarioKind::SweepBeta: return "sweep-beta";
    case ScenarioKind::HeleShaw: return "hele-shaw";
    case ScenarioKind::Geodesic: return "geodesic";
  }
  return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(const std::string& name) {
  for (ScenarioKind k :
       {ScenarioKind::Solve, ScenarioKind::Envelope, ScenarioKind::SweepBeta,
        ScenarioKind::HeleShaw, ScenarioKind::Geodesic}) {
    if (name == scenario_kind_name(k)) return k;
  }
  return std::nullopt;
}

Scenario parse_scenario_text(const std::string& text,
                             std::optional<ScenarioKind> kind) {
  std::map<std::string, Entry> entries;  // "section.key"
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::size_t first = 0;
    while (first < raw.size() && std::isspace(static_cast<unsigned char>(raw[first])))
      ++first;
    if (first == raw.size() || raw[first] == '#' || raw[first] == ';') continue;
    const int col = static_cast<int>(first) + 1;
    if (raw[first] == '[') {
      const std::size_t close = raw.find(']', first);
      if (close == std::string::npos) parse_fail(line_no, col, "missing ']'");
      if (!trim(raw.substr(close + 1)).empty()) {
        parse_fail(line_no, static_cast<int>(close) + 2,
                   "text after section header");
      }
      section = trim(raw.substr(first + 1, close - first - 1));
      if (!schema().count(section)) {
        parse_fail(line_no, col + 1, "unknown section '" + section + "'");
      }
      continue;
    }
    const std::size_t eq = raw.find('=', first);
    if (eq == std::string::npos) parse_fail(line_no, col, "expected key = value");
    const std::string key = trim(raw.substr(first, eq - first));
    if (section.empty()) {
      parse_fail(line_no, col, "key '" + key + "' outside any section");
    }
    if (!schema().at(section).count(key)) {
      parse_fail(line_no, col,
                 "unknown key '" + key + "' in section [" + section + "]");
    }
    const std::string full = section + "." + key;
    if (entries.count(full)) parse_fail(line_no, col, "duplicate key '" + full + "'");
    std::size_t vstart = eq + 1;
    while (vstart < raw.size() && std::isspace(static_cast<unsigned char>(raw[vstart])))
      ++vstart;
    std::string value = trim(raw.substr(vstart));
    // Values may be wrapped in double quotes.
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
      ++vstart;
    }
    entries[full] = Entry{value, line_no, static_cast<int>(vstart) + 1};
  }

  Scenario s;
  auto get = [&](const std::string& k) -> const Entry* {
    auto it = entries.find(k);
    return it == entries.end() ? nullptr : &it->second;
  };

  if (const Entry* e = get("scenario.kind")) {
    const auto k = parse_scenario_kind(trim(e->value));
    if (!k) parse_fail(e->line, e->column, "unknown kind '" + trim(e->value) + "'");
    if (kind && *kind != *k) {
      invalid("scenario.kind", std::string("config says ") +
                                   scenario_kind_name(*k) +
                                   " but the command asks for " +
                                   scenario_kind_name(*kind));
    }
    kind = k;
  }
  if (!kind) invalid("scenario.kind", "no scenario kind given");
  s.kind = *kind;

  if (const Entry* e = get("grid.N")) {
    const long long n = to_int(*e, "grid.N");
    if (n < 8 || n > 8192) invalid("grid.N", "must lie in [8, 8192]");
    s.n = static_cast<int>(n);
  }
  if (const Entry* e = get("forms.f_theta")) {
    check_recipe(*e, "forms.f_theta");
    s.f_theta = trim(e->value);
  }
  if (const Entry* e = get("forms.g")) {
    check_recipe(*e, "forms.g");
    s.g = trim(e->value);
  }
  if (get("divisor.points") || get("divisor.f_L")) {
    DivisorSpec d;
    if (const Entry* e = get("divisor.points")) d.points = to_points(*e);
    if (d.points.empty()) invalid("divisor.points", "at least one point needed");
    for (const auto& p : d.points) {
      if (p.multiplicity < 1) invalid("divisor.points", "multiplicity must be >= 1");
    }
    if (const Entry* e = get("divisor.f_L")) {
      check_recipe(*e, "divisor.f_L");
      d.f_l = trim(e->value);
    }
    s.divisor = std::move(d);
  }

  if (const Entry* e = get("params.beta")) s.betas = to_list(*e, "params.beta");
  if (const Entry* e = get("params.lambda")) s.lambdas = to_list(*e, "params.lambda");
  if (const Entry* e = get("params.c")) s.c = to_double(*e, "params.c");
  if (const Entry* e = get("params.lambda_count")) {
    s.lambda_count = static_cast<int>(to_int(*e, "params.lambda_count"));
  }
  if (const Entry* e = get("params.t")) s.ts = to_list(*e, "params.t");
  if (const Entry* e = get("params.delta_frac")) {
    s.delta_frac = to_double(*e, "params.delta_frac");
  }
  if (const Entry* e = get("params.calibrate_N")) {
    for (double v : to_list(*e, "params.calibrate_N")) {
      if (v != std::floor(v) || v < 8) {
        invalid("params.calibrate_N", "grid sizes must be integers >= 8");
      }
      s.calibrate_ns.push_back(static_cast<int>(v));
    }
  }
  if (const Entry* e = get("params.continuation")) {
    s.continuation = to_bool(*e, "params.continuation");
  }
  if (const Entry* e = get("params.seed")) {
    s.seed = static_cast<unsigned long long>(to_int(*e, "params.seed"));
  }

  Tolerances& t = s.tol;
  const std::pair<const char*, double*> tols[] = {
      {"newton_tol", &t.newton_tol},   {"linear_tol", &t.linear_tol},
      {"lcp_tol", &t.lcp_tol},         {"contact_tol", &t.contact_tol},
      {"psor_tol", &t.psor_tol},       {"omega_relax", &t.omega_relax},
      {"ortho_tol", &t.ortho_tol},     {"support_tol", &t.support_tol},
      {"stat_tol", &t.stat_tol},       {"area_tol", &t.area_tol},
      {"nesting_tol", &t.nesting_tol}, {"conc_tol", &t.conc_tol},
      {"legendre_tol", &t.legendre_tol}, {"slope_tol", &t.slope_tol},
      {"decay_tol", &t.decay_tol},     {"flat_tail_tol", &t.flat_tail_tol},
  };
  for (const auto& [name, slot] : tols) {
    const std::string key = std::string("tolerances.") + name;
    if (const Entry* e = get(key)) {
      *slot = to_double(*e, key);
      require_positive(*slot, key);
    }
  }
  if (const Entry* e = get("tolerances.max_newton_iters")) {
    t.max_newton_iters = static_cast<int>(to_int(*e, "tolerances.max_newton_iters"));
    if (t.max_newton_iters < 1) invalid("tolerances.max_newton_iters", "must be >= 1");
  }
  if (!(t.omega_relax > 0.0 && t.omega_relax < 2.0)) {
    invalid("tolerances.omega_relax", "must lie in (0, 2)");
  }
  if (const Entry* e = get("output.dir")) {
    const std::string d = trim(e->value);
    if (d.empty()) invalid("output.dir", "must not be empty");
    s.out_dir = d;
  }

  // Kind-specific defaults and requirements.
  const bool needs_divisor =
      s.kind == ScenarioKind::HeleShaw || s.kind == ScenarioKind::Geodesic;
  if (needs_divisor && !s.divisor) {
    invalid("divisor", std::string("required for ") + scenario_kind_name(s.kind));
  }
  if (s.betas.empty()) {
    switch (s.kind) {
      case ScenarioKind::Solve: s.betas = {64.0}; break;
      case ScenarioKind::SweepBeta:
        for (double b = 8.0; b <= 1024.0; b *= 2.0) s.betas.push_back(b);
        break;
      case ScenarioKind::Geodesic: s.betas = {32.0, 64.0, 128.0}; break;
      default: break;
    }
  }
  for (double b : s.betas) {
    if (!(b > 1.0)) invalid("params.beta", "beta must exceed 1");
  }
  if (s.kind == ScenarioKind::SweepBeta || s.kind == ScenarioKind::Geodesic) {
    require_increasing(s.betas, "params.beta");
  }
  for (double l : s.lambdas) {
    if (l < 0.0) invalid("params.lambda", "lambda must be >= 0");
  }
  require_increasing(s.lambdas, "params.lambda");
  if (!(s.c > 0.0)) invalid("params.c", "must be positive");
  if (s.lambda_count < 1) invalid("params.lambda_count", "must be >= 1");
  if (s.kind == ScenarioKind::Geodesic) {
    if (s.ts.empty()) {
      for (int k = 0; k <= 8; ++k) s.ts.push_back(0.25 * k);
      for (double v = 4.0; v <= 64.0; v *= 2.0) s.ts.push_back(v);
    }
    if (s.ts.size() < 3) invalid("params.t", "need at least 3 times");
  }
  for (double v : s.ts) {
    if (v < 0.0) invalid("params.t", "times must be >= 0");
  }
  require_increasing(s.ts, "params.t");
  if (!(s.delta_frac > 0.0 && s.delta_frac < 1.0)) {
    invalid("params.delta_frac", "must lie in (0, 1)");
  }
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path,
                        std::optional<ScenarioKind> kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), kind);
}

}  // namespace mazt
