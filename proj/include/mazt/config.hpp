#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mazt {

/// Compiled density recipe: arithmetic over x, y with + - * / ^, unary minus,
/// cos, sin, exp and the constants pi, e.
class Recipe {
 public:
  /// Throws ParseError naming the column (1-based) of the offending character.
  static Recipe compile(const std::string& text);

  double operator()(double x, double y) const;
  const std::string& text() const noexcept { return text_; }
  std::function<double(double, double)> function() const;

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

enum class ScenarioKind { Solve, Envelope, SweepBeta, HeleShaw, Geodesic };

const char* scenario_kind_name(ScenarioKind kind);
/// Accepts solve, envelope, sweep-beta, hele-shaw, geodesic.
std::optional<ScenarioKind> parse_scenario_kind(const std::string& name);

struct DivisorSpec {
  struct Point {
    double x;
    double y;
    int multiplicity;
  };
  std::vector<Point> points;
  std::optional<std::string> f_l;
};

struct Tolerances {
  double newton_tol = 1e-9;
  int max_newton_iters = 200;
  double linear_tol = 1e-12;
  double lcp_tol = 1e-10;
  double contact_tol = 1e-7;
  double psor_tol = 1e-4;
  double omega_relax = 1.5;
  double ortho_tol = 1e-8;
  double support_tol = 1e-8;
  double stat_tol = 1e-6;
  double area_tol = 0.02;
  double nesting_tol = 0.005;
  double conc_tol = 1e-6;
  double legendre_tol = 1e-9;
  double slope_tol = 0.02;
  double decay_tol = 0.15;
  double flat_tail_tol = 1e-6;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::Solve;
  int n = 64;
  std::string f_theta = "1";
  std::string g = "1";
  std::optional<DivisorSpec> divisor;
  std::vector<double> betas;
  std::vector<double> lambdas;
  double c = 0.5;
  int lambda_count = 33;
  std::vector<double> ts;
  double delta_frac = 0.1;
  std::vector<int> calibrate_ns;
  bool continuation = true;
  unsigned long long seed = 1;
  Tolerances tol;
  std::filesystem::path out_dir = "out";
};

/// INI-style text: [section] headers and key = value lines, '#' or ';'
/// comments. Unknown sections and keys are rejected. Fills kind-specific
/// defaults and validates. `kind` comes from the command line; a
/// [scenario] kind entry, if present, must agree with it.
Scenario parse_scenario_text(const std::string& text,
                             std::optional<ScenarioKind> kind = std::nullopt);
Scenario parse_scenario(const std::filesystem::path& path,
                        std::optional<ScenarioKind> kind = std::nullopt);

}  // namespace mazt
