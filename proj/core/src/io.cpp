// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#include "optomo/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <system_error>

namespace optomo::io {

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::set<std::string>& required,
                const std::string& what) {
  if (!j.is_object())
    throw std::invalid_argument(what + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key))
      throw std::invalid_argument(what + ": unknown field '" + key + "'");
  for (const std::string& key : required)
    if (!j.contains(key))
      throw std::invalid_argument(what + ": missing field '" + key + "'");
}

Cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument("complex scalar must be a [re, im] pair");
  return Cplx(j[0].get<double>(), j[1].get<double>());
}

json complex_to_json(const Cplx& z) { return json::array({z.real(), z.imag()}); }

}  // namespace

json matrix_to_json(const Mat& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(complex_to_json(m(r, c)));
    data.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Mat matrix_from_json(const json& j) {
  check_keys(j, {"rows", "cols", "data"}, {"rows", "cols", "data"}, "matrix");
  const auto rows = j["rows"].get<Eigen::Index>();
  const auto cols = j["cols"].get<Eigen::Index>();
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("matrix: dimensions must be positive");
  const json& data = j["data"];
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows)
    throw std::invalid_argument("matrix: row count mismatch");
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = data[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("matrix: column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

json choi_to_json(const ChoiOp& r) {
  return json{{"d_out", r.d_out}, {"d_in", r.d_in}, {"matrix", matrix_to_json(r.m)}};
}

ChoiOp choi_from_json(const json& j) {
  check_keys(j, {"d_out", "d_in", "matrix"}, {"d_out", "d_in", "matrix"},
             "choi");
  ChoiOp r;
  r.d_out = j["d_out"].get<int>();
  r.d_in = j["d_in"].get<int>();
  r.m = matrix_from_json(j["matrix"]);
  r.validate();
  return r;
}

json tester_to_json(const Tester& t) {
  json elems = json::array();
  for (const Mat& e : t.elements) elems.push_back(matrix_to_json(e));
  return json{{"d_out", t.d_out},
              {"d_in", t.d_in},
              {"sigma", matrix_to_json(t.sigma)},
              {"elements", std::move(elems)}};
}

Tester tester_from_json(const json& j) {
  check_keys(j, {"d_out", "d_in", "sigma", "elements"},
             {"d_out", "d_in", "sigma", "elements"}, "tester");
  Tester t;
  t.d_out = j["d_out"].get<int>();
  t.d_in = j["d_in"].get<int>();
  t.sigma = matrix_from_json(j["sigma"]);
  for (const json& e : j["elements"]) t.elements.push_back(matrix_from_json(e));
  validate_tester(t);
  return t;
}

json seeds_to_json(const SeedSet& s) {
  json psis = json::array();
  for (const Mat& p : s.psis) psis.push_back(matrix_to_json(p));
  return json{{"alphas", s.alphas}, {"psis", std::move(psis)}};
}

SeedSet seeds_from_json(const json& j) {
  check_keys(j, {"alphas", "psis"}, {"alphas", "psis"}, "seeds");
  SeedSet s;
  s.alphas = j["alphas"].get<std::vector<double>>();
  for (const json& p : j["psis"]) s.psis.push_back(matrix_from_json(p));
  if (s.psis.empty() || s.psis.size() != s.alphas.size())
    throw std::invalid_argument("seeds: alphas/psis length mismatch");
  s.d_out = static_cast<int>(s.psis.front().rows());
  s.d_in = static_cast<int>(s.psis.front().cols());
  s.validate();
  return s;
}

json realization_to_json(const Realization& r) {
  json povm = json::array();
  for (const Mat& p : r.povm) povm.push_back(matrix_to_json(p));
  return json{{"d_out", r.d_out},
              {"d_in", r.d_in},
              {"d_anc", r.d_anc},
              {"nu", matrix_to_json(r.nu)},
              {"povm", std::move(povm)}};
}

Realization realization_from_json(const json& j) {
  check_keys(j, {"d_out", "d_in", "d_anc", "nu", "povm"},
             {"d_out", "d_in", "d_anc", "nu", "povm"}, "realization");
  Realization r;
  r.d_out = j["d_out"].get<int>();
  r.d_in = j["d_in"].get<int>();
  r.d_anc = j["d_anc"].get<int>();
  r.nu = matrix_from_json(j["nu"]);
  for (const json& p : j["povm"]) r.povm.push_back(matrix_from_json(p));
  return r;
}

json design_to_json(const CovariantDesign& d) {
  return json{{"class", to_string(d.cls)}, {"d", d.d},     {"A", d.a_coeff},
              {"beta", d.beta},            {"eta", d.eta}, {"psi", matrix_to_json(d.psi)}};
}

CovariantDesign design_from_json(const json& j) {
  check_keys(j, {"class", "d", "A", "beta", "eta", "psi"},
             {"class", "d", "A", "beta", "eta", "psi"}, "design");
  CovariantDesign d;
  d.cls = protocol_class_from_string(j["class"].get<std::string>());
  d.d = j["d"].get<int>();
  d.a_coeff = j["A"].get<double>();
  d.beta = j["beta"].get<double>();
  d.eta = j["eta"].get<double>();
  d.psi = matrix_from_json(j["psi"]);
  const auto [d_out, d_in] = dims_for_class(d.cls, d.d);
  if (d.psi.rows() != d_out || d.psi.cols() != d_in)
    throw std::invalid_argument("design: psi shape does not match class/d");
  d.purity = ((d.psi * d.psi.adjoint()) * (d.psi * d.psi.adjoint()))
                 .trace()
                 .real();
  return d;
}

json report_to_json(const SimReport& r) {
  json obs = json::array();
  for (const ObservableStat& s : r.observables)
    obs.push_back(json{{"name", s.name},
                       {"mean", s.mean},
                       {"se", s.se},
                       {"truth", s.truth},
                       {"z", s.z}});
  return json{{"shots", r.shots},
              {"rng_seed", r.rng_seed},
              {"eta_analytic", r.eta_analytic},
              {"eta_hat", r.eta_hat},
              {"eta_hat_se", r.eta_hat_se},
              {"observables", std::move(obs)}};
}

std::string report_to_csv(const SimReport& r) {
  std::string out = "name,mean,se,truth,z\n";
  for (const ObservableStat& s : r.observables) {
    out += s.name + "," + format_double(s.mean) + "," + format_double(s.se) +
           "," + format_double(s.truth) + "," + format_double(s.z) + "\n";
  }
  out += "eta_hat," + format_double(r.eta_hat) + "," +
         format_double(r.eta_hat_se) + "," + format_double(r.eta_analytic) +
         "," +
         format_double(r.eta_hat_se > 0.0
                           ? (r.eta_hat - r.eta_analytic) / r.eta_hat_se
                           : 0.0) +
         "\n";
  return out;
}

SimConfig simconfig_from_json(const json& j) {
  check_keys(j,
             {"design", "seeds", "class", "choi", "shots", "rng_seed",
              "observables"},
             {"choi", "shots", "observables"}, "simulation config");
  SimConfig cfg;
  if (j.contains("design") == j.contains("seeds"))
    throw std::invalid_argument(
        "simulation config: exactly one of 'design' or 'seeds' is required");
  if (j.contains("design")) {
    if (j.contains("class"))
      throw std::invalid_argument(
          "simulation config: 'class' is only valid with 'seeds'");
    cfg.design = design_from_json(j["design"]);
  } else {
    cfg.seeds = seeds_from_json(j["seeds"]);
    cfg.seed_class = j.contains("class")
                         ? protocol_class_from_string(j["class"].get<std::string>())
                         : ProtocolClass::QuantumOperation;
  }
  cfg.choi = choi_from_json(j["choi"]);
  if (!j["shots"].is_number_unsigned() && !j["shots"].is_number_integer())
    throw std::invalid_argument("simulation config: shots must be an integer");
  const auto shots = j["shots"].get<long long>();
  if (shots < 1)
    throw std::invalid_argument("simulation config: shots must be >= 1");
  cfg.shots = static_cast<std::uint64_t>(shots);
  if (j.contains("rng_seed"))
    cfg.rng_seed = j["rng_seed"].get<std::uint64_t>();
  const json& obs = j["observables"];
  if (!obs.is_array() || obs.empty())
    throw std::invalid_argument(
        "simulation config: observables must be a nonempty array");
  for (const json& o : obs) {
    check_keys(o, {"name", "matrix"}, {"name", "matrix"}, "observable");
    cfg.names.push_back(o["name"].get<std::string>());
    cfg.observables.push_back(matrix_from_json(o["matrix"]));
  }
  return cfg;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc())
    throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("rename failed for " + target.string());
  }
}

}  // namespace optomo::io
