// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.
//
// Command-line front end: synthesize optimal designs, score user testers,
// tabulate figures of merit, and run reproducible simulations.
//
// Exit codes: 0 success, 2 validation/argument error, 3 numerical or
// informational-completeness error.

#include "optomo/covopt.hpp"
#include "optomo/io.hpp"
#include "optomo/simkit.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace optomo;

constexpr const char* kSeedEnvVar = "OPTOMO_RNG_SEED";
constexpr std::uint64_t kDefaultSeed = 20100404;

std::uint64_t default_rng_seed() {
  if (const char* env = std::getenv(kSeedEnvVar)) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(kSeedEnvVar) +
                                  " is not an unsigned integer");
    }
  }
  return kDefaultSeed;
}

io::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  io::json j;
  try {
    in >> j;
  } catch (const io::json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

CovariantDesign make_design(ProtocolClass cls, int d) {
  if (cls == ProtocolClass::State || cls == ProtocolClass::Povm)
    return state_povm_design(cls, d);
  return optimize_class(cls, d);
}

int cmd_design(const std::string& cls_name, int d, const std::string& out) {
  const ProtocolClass cls = protocol_class_from_string(cls_name);
  if (d < 2 || d > 8) throw std::invalid_argument("d must be in [2, 8]");
  const CovariantDesign design = make_design(cls, d);
  if (!out.empty())
    io::atomic_write_file(out, io::design_to_json(design).dump(2) + "\n");
  std::cout << "eta=" << io::format_double(design.eta)
            << " A=" << io::format_double(design.a_coeff) << "\n";
  return 0;
}

int cmd_eta(const std::string& seeds_path, const std::string& cls_name) {
  const ProtocolClass cls = protocol_class_from_string(cls_name);
  const SeedSet seeds = io::seeds_from_json(load_json(seeds_path));
  const SchurCoeffs abc = coeffs_abc(seeds);
  const double eta = eta_of(seeds, cls);
  std::cout << "eta=" << io::format_double(eta)
            << " A=" << io::format_double(abc.a)
            << " B=" << io::format_double(abc.b)
            << " C=" << io::format_double(abc.c) << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out,
                 const std::string& format) {
  const io::SimConfig cfg = io::simconfig_from_json(load_json(config_path));

  CovariantDesign design;
  Mat psi;
  if (cfg.design) {
    design = *cfg.design;
    psi = design.psi;
  } else {
    if (cfg.seeds->size() != 1)
      throw std::invalid_argument(
          "simulate: the scheme takes exactly one seed");
    const int d = cfg.seeds->d_out;
    if (cfg.seeds->d_in != d)
      throw std::invalid_argument("simulate: seed must be square");
    psi = cfg.seeds->psis.front();
    design.cls = *cfg.seed_class;
    design.d = d;
    design.psi = psi;
  }

  SchemeSpec spec;
  spec.d = design.d;
  spec.psi = psi;
  spec.shots = cfg.shots;
  spec.rng_seed = cfg.rng_seed ? *cfg.rng_seed : default_rng_seed();
  spec.names = cfg.names;
  spec.observables = cfg.observables;

  const SimReport report = run_simulation(spec, cfg.choi, design);

  const std::string body = format == "csv"
                               ? io::report_to_csv(report)
                               : io::report_to_json(report).dump(2) + "\n";
  if (!out.empty()) io::atomic_write_file(out, body);
  std::cout << "shots=" << report.shots
            << " eta_hat=" << io::format_double(report.eta_hat)
            << " eta_analytic=" << io::format_double(report.eta_analytic)
            << "\n";
  return 0;
}

int cmd_table(int d_min, int d_max, const std::string& classes_arg,
              const std::string& out) {
  if (d_min < 2 || d_max > 8 || d_min > d_max)
    throw std::invalid_argument("d range must satisfy 2 <= d_min <= d_max <= 8");
  std::vector<ProtocolClass> classes;
  std::stringstream ss(classes_arg);
  std::string token;
  while (std::getline(ss, token, ','))
    classes.push_back(protocol_class_from_string(token));
  if (classes.empty()) throw std::invalid_argument("no classes given");

  std::string csv = "d,class,eta_analytic,eta_numeric,abs_diff\n";
  for (int d = d_min; d <= d_max; ++d) {
    for (ProtocolClass cls : classes) {
      const CovariantDesign design = make_design(cls, d);
      const auto [d_out, d_in] = dims_for_class(cls, d);
      SeedSet seeds;
      seeds.d_out = d_out;
      seeds.d_in = d_in;
      seeds.alphas = {static_cast<double>(d_out)};
      seeds.psis = {design.psi};
      const double numeric = eta_dense(coeffs_abc(seeds), cls, d_out, d_in);
      csv += std::to_string(d) + "," + to_string(cls) + "," +
             io::format_double(design.eta) + "," + io::format_double(numeric) +
             "," + io::format_double(std::abs(design.eta - numeric)) + "\n";
    }
  }
  if (!out.empty())
    io::atomic_write_file(out, csv);
  else
    std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tomography protocol designer and simulator"};
  app.require_subcommand(1);

  std::string cls = "qo", out, seeds_path, config_path, format = "json",
              classes = "qo,channel,unital";
  int d = 2, d_min = 2, d_max = 3;

  CLI::App* design = app.add_subcommand(
      "design", "Synthesize the optimal covariant design for a class");
  design->add_option("--class", cls, "qo|channel|unital|state|povm");
  design->add_option("--d", d, "Hilbert space dimension (2..8)");
  design->add_option("--out", out, "Write the design JSON here");

  CLI::App* eta = app.add_subcommand(
      "eta", "Score a seed file: figure of merit and Schur coefficients");
  eta->add_option("--seeds", seeds_path, "Seed set JSON file")->required();
  eta->add_option("--class", cls, "qo|channel|unital|state|povm");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Run the double-Bell scheme simulator");
  simulate->add_option("--config", config_path, "Simulation config JSON")
      ->required();
  simulate->add_option("--out", out, "Report output path");
  simulate->add_option("--format", format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* table = app.add_subcommand(
      "table", "CSV of analytic vs dense-path figures over a dimension range");
  table->add_option("--d-min", d_min, "Smallest dimension (>= 2)");
  table->add_option("--d-max", d_max, "Largest dimension (<= 8)");
  table->add_option("--classes", classes, "Comma-separated class list");
  table->add_option("--out", out, "CSV output path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (design->parsed()) return cmd_design(cls, d, out);
    if (eta->parsed()) return cmd_eta(seeds_path, cls);
    if (simulate->parsed()) return cmd_simulate(config_path, out, format);
    if (table->parsed()) return cmd_table(d_min, d_max, classes, out);
  } catch (const optomo::incomplete_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
