#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace geonet;
using namespace geonet::cli;

template <class Body>
int run_with_output(const GlobalOptions& g, Body&& body) {
  try {
    if (g.out == "-") return body(std::cout);
    std::ofstream file(g.out);
    if (!file) {
      std::cerr << "cannot open " << g.out << " for writing\n";
      return kValidationFailure;
    }
    return body(file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scrambled geometric nets: generation, sampling and convergence experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master scrambling seed");
  app.add_option("--replicates", g.replicates, "Independent scrambles per estimate")->check(CLI::Range(2, 1 << 20));
  app.add_option("--digits", g.digits, "Digit depth K (0: largest exact in double precision)")->check(CLI::Range(0, 64));
  app.add_option("--out", g.out, "Output CSV path ('-' for stdout)");
  app.add_option("--threads", g.threads, "Worker threads for replicates")->check(CLI::Range(1, 256));

  NetOptions net;
  auto* net_cmd = app.add_subcommand("net", "Generate a Faure net and verify the net property");
  net_cmd->add_option("-b,--base", net.b, "Base")->required();
  net_cmd->add_option("-s,--dims", net.s, "Dimension")->required();
  net_cmd->add_option("-m", net.m, "log_b of the point count")->required()->check(CLI::Range(0, 24));
  net_cmd->add_option("-t", net.t, "Quality parameter to verify")->check(CLI::NonNegativeNumber);
  net_cmd->add_flag("--scrambled", net.scrambled, "Apply a nested uniform scramble (replicate 1)");

  SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "Map a scrambled net into a product of regions");
  sample_cmd->add_option("-g,--geometry", sample.geometry, "Split per factor (repeatable)");
  sample_cmd->add_option("-b,--base", sample.b, "Base");
  sample_cmd->add_option("-m", sample.m, "log_b of the point count")->check(CLI::Range(0, 24));
  bool unscrambled = false;
  sample_cmd->add_flag("--unscrambled", unscrambled, "Map the net without scrambling");

  ExperimentConfig conv;
  auto* conv_cmd = app.add_subcommand("converge", "Variance against n for scrambled geometric nets and plain MC");
  conv_cmd->add_option("-i,--integrand", conv.integrand, "Catalog integrand");
  conv_cmd->add_option("-g,--geometry", conv.geometry, "Split per factor (default: catalog default for the base)");
  conv_cmd->add_option("-s,--dims", conv.s, "Number of factors");
  conv_cmd->add_option("-b,--base", conv.b, "Base");
  conv_cmd->add_option("--m-min", conv.m_min, "Smallest m");
  conv_cmd->add_option("--m-max", conv.m_max, "Largest m");

  GainsOptions gains;
  auto* gains_cmd = app.add_subcommand("gains", "Gain coefficients of a Faure net");
  gains_cmd->add_option("-b,--base", gains.b, "Base")->required();
  gains_cmd->add_option("-s,--dims", gains.s, "Dimension")->required();
  gains_cmd->add_option("-m", gains.m, "log_b of the point count")->required()->check(CLI::Range(0, 16));
  gains_cmd->add_option("--max-kappa", gains.max_kappa, "Largest |kappa| listed (default m + 1)");

  MeasureOptions measure;
  auto* measure_cmd = app.add_subcommand("verify-measure", "Chi-square test that phi preserves volume");
  measure_cmd->add_option("-g,--geometry", measure.geometry, "Split rule")->required();
  measure_cmd->add_option("-b,--base", measure.b, "Base for interval splits");
  measure_cmd->add_option("-k,--level", measure.level, "Cell level")->check(CLI::Range(1, 8));
  measure_cmd->add_option("-n,--samples", measure.samples, "Sample count (default 100 b^k)");
  measure_cmd->add_option("--confidence", measure.confidence, "Acceptance quantile")->check(CLI::Range(0.5, 0.999999));

  SphericityOptions sph;
  auto* sph_cmd = app.add_subcommand("sphericity", "Empirical sphericity constant per level");
  sph_cmd->add_option("-g,--geometry", sph.geometry, "Split rule")->required();
  sph_cmd->add_option("-b,--base", sph.b, "Base for interval splits");
  sph_cmd->add_option("-d,--depth", sph.depth, "Deepest level")->check(CLI::Range(0, 20));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kValidationFailure;
  }

  if (*net_cmd) return run_with_output(g, [&](std::ostream& os) { return cmd_net(net, g, os, std::cerr); });
  if (*sample_cmd) {
    sample.scrambled = !unscrambled;
    return run_with_output(g, [&](std::ostream& os) { return cmd_sample(sample, g, os, std::cerr); });
  }
  if (*conv_cmd) return run_with_output(g, [&](std::ostream& os) { return cmd_converge(conv, g, os, std::cerr); });
  if (*gains_cmd) return run_with_output(g, [&](std::ostream& os) { return cmd_gains(gains, g, os, std::cerr); });
  if (*measure_cmd)
    return run_with_output(g, [&](std::ostream& os) { return cmd_verify_measure(measure, g, os, std::cerr); });
  if (*sph_cmd) return run_with_output(g, [&](std::ostream& os) { return cmd_sphericity(sph, g, os, std::cerr); });
  return kValidationFailure;
}
