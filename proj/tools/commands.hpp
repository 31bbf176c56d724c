#pragma once

// Subcommand bodies of the geonet tool. Each writes CSV to `out`,
// diagnostics to `err`, and returns the process exit code.

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "geonet/catalog.hpp"
#include "geonet/experiment.hpp"
#include "geonet/nets.hpp"
#include "geonet/quad.hpp"
#include "geonet/regions.hpp"
#include "geonet/scramble.hpp"
#include "geonet/stats.hpp"

namespace geonet::cli {

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kVerificationFailure = 2 };

struct GlobalOptions {
  std::uint64_t seed = 1;
  int replicates = 30;
  int digits = 0;  // 0: default depth for the base
  std::string out = "-";
  int threads = 1;

  int depth_for(int b) const { return digits > 0 ? digits : default_depth(b); }
};

inline std::string digit_string(std::span<const Digit> d, int b) {
  std::string s;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (b > 10 && k) s.push_back('.');
    s += std::to_string(d[k]);
  }
  return s;
}

struct NetOptions {
  int b = 2;
  int s = 1;
  int m = 0;
  int t = 0;
  bool scrambled = false;
};

inline int cmd_net(const NetOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  PointSet ps = [&] {
    auto net = faure_net(o.b, o.s, o.m, g.depth_for(o.b));
    return o.scrambled ? scramble_point_set(net, ScrambleKey{g.seed, 1}) : net;
  }();
  out << "# net b=" << o.b << " s=" << o.s << " m=" << o.m << " t=" << o.t << " digits=" << ps.depth()
      << " scrambled=" << (o.scrambled ? 1 : 0) << " seed=" << g.seed << '\n';
  out << "i,j,value,digits\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (int j = 0; j < ps.dims(); ++j)
      out << i << ',' << j << ',' << ps.value(i, j) << ','
          << digit_string(ps.coord(i, j).first(static_cast<std::size_t>(o.m)), o.b) << '\n';
  const bool ok = verify_net(ps, o.t);
  out << "# verify t=" << o.t << ' ' << (ok ? "PASS" : "FAIL") << '\n';
  if (!ok) err << "net property fails for t=" << o.t << '\n';
  return ok ? kSuccess : kVerificationFailure;
}

/// Resolves geometry names to factors on their default roots.
inline std::vector<Factor> factors_from_names(const std::vector<std::string>& names, int b) {
  std::vector<Factor> f;
  for (const auto& name : names) {
    auto scheme = parse_scheme(name == "interval" ? "interval-b" + std::to_string(b) : name);
    if (!scheme) throw std::invalid_argument("unknown geometry: " + name);
    f.push_back({default_root(*scheme), *scheme});
  }
  return f;
}

struct SampleOptions {
  std::vector<std::string> geometry{"interval"};
  int b = 2;
  int m = 4;
  bool scrambled = true;
};

inline int cmd_sample(const SampleOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream&) {
  const ProductSpace space(factors_from_names(o.geometry, o.b));
  if (space.base() != o.b) throw std::invalid_argument("geometry base differs from -b");
  auto net = faure_net(o.b, space.dims(), o.m, g.depth_for(o.b));
  if (o.scrambled) net = scramble_point_set(net, ScrambleKey{g.seed, 1});
  out << "# sample b=" << o.b << " m=" << o.m << " geometry=";
  for (std::size_t j = 0; j < o.geometry.size(); ++j) out << (j ? "," : "") << o.geometry[j];
  out << " scrambled=" << (o.scrambled ? 1 : 0) << " seed=" << g.seed << " digits=" << net.depth() << '\n';
  out << "i,factor,x,y,z\n" << std::setprecision(17);
  std::vector<Point> x(static_cast<std::size_t>(space.dims()));
  for (std::size_t i = 0; i < net.size(); ++i) {
    space.map([&](int j) { return net.coord(i, j); }, x);
    for (int j = 0; j < space.dims(); ++j) {
      const int dim = ambient_dim(space.factor(j).root);
      out << i << ',' << j;
      for (int c = 0; c < 3; ++c) {
        out << ',';
        if (c < dim) out << x[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
      }
      out << '\n';
    }
  }
  return kSuccess;
}

inline int cmd_converge(ExperimentConfig c, const GlobalOptions& g, std::ostream& out, std::ostream&) {
  c.seed = g.seed;
  c.replicates = g.replicates;
  c.digits = g.digits;
  c.out = g.out;
  const auto res = run_convergence(c, true, g.threads);
  write_convergence_csv(out, c, res);
  return kSuccess;
}

struct GainsOptions {
  int b = 2;
  int s = 1;
  int m = 3;
  int max_kappa = -1;  // default: m + 1
};

inline std::string join_ints(const std::vector<int>& v, int offset) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s.push_back(' ');
    s += std::to_string(v[k] + offset);
  }
  return s;
}

inline int cmd_gains(const GainsOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream&) {
  const auto net = faure_net(o.b, o.s, o.m, g.depth_for(o.b));
  const int max_kappa = o.max_kappa >= 0 ? o.max_kappa : o.m + 1;
  if (max_kappa + 1 > net.depth()) throw std::invalid_argument("max kappa exceeds digit depth");
  out << "# gains b=" << o.b << " s=" << o.s << " m=" << o.m << " t=0 max_kappa=" << max_kappa << '\n';
  out << "u,kappa,gamma\n" << std::setprecision(17);
  for (const auto& e : gain_table(net, max_kappa))
    out << join_ints(e.u, 1) << ',' << join_ints(e.kappa, 0) << ',' << e.gamma << '\n';
  return kSuccess;
}

struct MeasureOptions {
  std::string geometry = "interval";
  int b = 2;
  int level = 1;
  std::size_t samples = 0;  // default: 100 b^level
  double confidence = 0.999;
};

inline int cmd_verify_measure(const MeasureOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const auto f = factors_from_names({o.geometry}, o.b).front();
  const std::size_t n = o.samples ? o.samples : 100 * static_cast<std::size_t>(ipow(f.scheme.base(), o.level));
  const auto res = measure_preservation_check(f.root, f.scheme, g.seed, n, o.level, g.digits > 0 ? std::optional<int>(g.digits) : std::nullopt);
  const double q = chi_square_quantile(res.dof, o.confidence);
  const bool ok = res.statistic <= q;
  out << "# verify-measure geometry=" << f.scheme.name() << " level=" << o.level << " samples=" << n
      << " seed=" << g.seed << " confidence=" << o.confidence << '\n';
  out << "statistic,dof,quantile,verdict\n" << std::setprecision(17);
  out << res.statistic << ',' << res.dof << ',' << q << ',' << (ok ? "PASS" : "FAIL") << '\n';
  if (!ok) err << "chi-square statistic exceeds the " << o.confidence << " quantile\n";
  return ok ? kSuccess : kVerificationFailure;
}

struct SphericityOptions {
  std::string geometry = "interval";
  int b = 2;
  int depth = 8;
};

inline int cmd_sphericity(const SphericityOptions& o, const GlobalOptions&, std::ostream& out, std::ostream&) {
  const auto f = factors_from_names({o.geometry}, o.b).front();
  if (ipow(f.scheme.base(), o.depth) > (std::uint64_t{1} << 20)) throw std::length_error("sphericity: too many cells");
  const auto prof = sphericity_profile(f.root, f.scheme, o.depth);
  out << "# sphericity geometry=" << f.scheme.name() << " depth=" << o.depth << '\n';
  out << "level,c_hat\n" << std::setprecision(17);
  for (std::size_t k = 0; k < prof.size(); ++k) out << k << ',' << prof[k] << '\n';
  return kSuccess;
}

}  // namespace geonet::cli
