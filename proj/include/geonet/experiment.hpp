#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "geonet/catalog.hpp"
#include "geonet/nets.hpp"
#include "geonet/quad.hpp"
#include "geonet/stats.hpp"

namespace geonet {

/// Parameters of a convergence experiment. `geometry` names one split per
/// factor; an empty list means the default split of each catalog root.
struct ExperimentConfig {
  std::string integrand = "interval_exp";
  std::vector<std::string> geometry;
  int s = 1;
  int b = 2;
  int m_min = 4;
  int m_max = 10;
  int t = 0;
  int replicates = 30;
  std::uint64_t seed = 1;
  int digits = 0;  // 0: default depth for the base
  std::string out = "-";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Single-line `key=value` form, used in CSV comment headers.
inline std::string serialize(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "integrand=" << c.integrand << " geometry=";
  for (std::size_t i = 0; i < c.geometry.size(); ++i) os << (i ? "," : "") << c.geometry[i];
  os << " s=" << c.s << " b=" << c.b << " m=" << c.m_min << ".." << c.m_max << " t=" << c.t
     << " replicates=" << c.replicates << " seed=" << c.seed << " digits=" << c.digits << " out=" << c.out;
  return os.str();
}

namespace detail {

template <class T>
T parse_number(const std::string& s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("bad number: " + s);
  return v;
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& line) {
  ExperimentConfig c;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad config token: " + tok);
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "integrand") c.integrand = val;
    else if (key == "geometry") {
      c.geometry.clear();
      std::size_t start = 0;
      while (start < val.size()) {
        const auto comma = val.find(',', start);
        c.geometry.push_back(val.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } else if (key == "s") c.s = detail::parse_number<int>(val);
    else if (key == "b") c.b = detail::parse_number<int>(val);
    else if (key == "m") {
      const auto dots = val.find("..");
      if (dots == std::string::npos) throw std::invalid_argument("m range must be lo..hi");
      c.m_min = detail::parse_number<int>(val.substr(0, dots));
      c.m_max = detail::parse_number<int>(val.substr(dots + 2));
    } else if (key == "t") c.t = detail::parse_number<int>(val);
    else if (key == "replicates") c.replicates = detail::parse_number<int>(val);
    else if (key == "seed") c.seed = detail::parse_number<std::uint64_t>(val);
    else if (key == "digits") c.digits = detail::parse_number<int>(val);
    else if (key == "out") c.out = val;
    else throw std::invalid_argument("unknown config key: " + key);
  }
  return c;
}

/// Product space for a config: catalog roots with the named (or default) splits.
inline ProductSpace make_space(const ExperimentConfig& c) {
  const auto& entry = find_integrand(c.integrand);
  if (static_cast<int>(entry.roots.size()) != c.s)
    throw std::invalid_argument("integrand " + c.integrand + " has " + std::to_string(entry.roots.size()) +
                                " factors, config says s=" + std::to_string(c.s));
  if (!c.geometry.empty() && static_cast<int>(c.geometry.size()) != c.s && c.geometry.size() != 1)
    throw std::invalid_argument("give one geometry per factor (or one for all)");
  std::vector<Factor> f;
  for (int j = 0; j < c.s; ++j) {
    const auto& root = entry.roots[static_cast<std::size_t>(j)];
    if (c.geometry.empty()) {
      f.push_back({root, default_scheme(root, c.b)});
      continue;
    }
    const auto& name = c.geometry[c.geometry.size() == 1 ? 0 : static_cast<std::size_t>(j)];
    auto scheme = parse_scheme(name == "interval" ? "interval-b" + std::to_string(c.b) : name);
    if (!scheme) throw std::invalid_argument("unknown geometry: " + name);
    if (scheme->base() != c.b)
      throw std::invalid_argument("geometry " + name + " has base " + std::to_string(scheme->base()) + ", config says b=" +
                                  std::to_string(c.b));
    f.push_back({root, *scheme});
  }
  return ProductSpace(std::move(f));
}

struct ConvergenceRow {
  int m = 0;
  std::string method;
  std::uint64_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double standard_error = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double slope_net = std::numeric_limits<double>::quiet_NaN();
  double slope_mc = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr const char* kNetMethod = "scrambled-geometric-net";
inline constexpr const char* kMonteCarloMethod = "plain-MC";

/// Upper bound on b^m_max * R * s for one convergence run.
inline constexpr double kConvergenceBudget = static_cast<double>(std::uint64_t{1} << 28);

/// Least-squares slope of log variance on log n over the largest half of the
/// m range (levels with zero variance are skipped).
inline double tail_slope(const std::vector<ConvergenceRow>& rows, const std::string& method) {
  std::vector<const ConvergenceRow*> sel;
  for (const auto& r : rows)
    if (r.method == method) sel.push_back(&r);
  const std::size_t keep = (sel.size() + 1) / 2;
  std::vector<double> x, y;
  for (std::size_t i = sel.size() - keep; i < sel.size(); ++i)
    if (sel[i]->variance > 0.0) {
      x.push_back(std::log(static_cast<double>(sel[i]->n)));
      y.push_back(std::log(sel[i]->variance));
    }
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return fit_slope(x, y);
}

/// Variance of mu-hat against n for scrambled geometric nets and plain MC.
inline ConvergenceResult run_convergence(const ExperimentConfig& c, bool with_monte_carlo = true, int threads = 1) {
  if (c.m_min < 0 || c.m_max < c.m_min) throw std::invalid_argument("bad m range");
  if (c.replicates < 2) throw std::invalid_argument("need at least two replicates");
  if (c.t != 0) throw std::invalid_argument("the built-in construction gives t = 0 only");
  const double work = std::pow(static_cast<double>(c.b), c.m_max) * c.replicates * c.s;
  if (work > kConvergenceBudget) throw std::length_error("convergence budget exceeded: b^m_max * R * s too large");
  const auto& entry = find_integrand(c.integrand);
  const ProductSpace space = make_space(c);
  const int depth = c.digits > 0 ? c.digits : default_depth(c.b);
  ConvergenceResult res;
  for (int m = c.m_min; m <= c.m_max; ++m) {
    const auto net = faure_net(c.b, c.s, m, depth);
    const auto rep = replicate_variance(entry.f, space, net, c.seed, static_cast<std::size_t>(c.replicates), threads);
    res.rows.push_back({m, kNetMethod, rep.n, rep.mean, rep.variance, rep.standard_error});
    if (with_monte_carlo) {
      const auto mc = monte_carlo_replicates(entry.f, space, net.size(), c.seed ^ static_cast<std::uint64_t>(m),
                                             static_cast<std::size_t>(c.replicates), depth, threads);
      res.rows.push_back({m, kMonteCarloMethod, mc.n, mc.mean, mc.variance, mc.standard_error});
    }
  }
  res.slope_net = tail_slope(res.rows, kNetMethod);
  if (with_monte_carlo) res.slope_mc = tail_slope(res.rows, kMonteCarloMethod);
  return res;
}

inline void write_convergence_csv(std::ostream& os, const ExperimentConfig& c, const ConvergenceResult& r) {
  os << "# converge " << serialize(c) << '\n';
  os << "m,method,n,mean,variance,stderr\n";
  os.precision(17);
  for (const auto& row : r.rows)
    os << row.m << ',' << row.method << ',' << row.n << ',' << row.mean << ',' << row.variance << ','
       << row.standard_error << '\n';
  os << "# slope " << kNetMethod << '=' << r.slope_net << '\n';
  if (!std::isnan(r.slope_mc)) os << "# slope " << kMonteCarloMethod << '=' << r.slope_mc << '\n';
}

}  // namespace geonet
