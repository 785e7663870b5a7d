// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include "optomo/covopt.hpp"
#include "optomo/simkit.hpp"
#include "optomo/tester.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace optomo::io {

using nlohmann::json;

// JSON wire formats. Complex scalars are two-element arrays [re, im];
// matrices carry explicit "rows"/"cols" and row-major nested "data".
// Unknown fields are rejected on every parse.

json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& j);

json choi_to_json(const ChoiOp& r);
ChoiOp choi_from_json(const json& j);

json tester_to_json(const Tester& t);
Tester tester_from_json(const json& j);

json seeds_to_json(const SeedSet& s);
SeedSet seeds_from_json(const json& j);

json realization_to_json(const Realization& r);
Realization realization_from_json(const json& j);

json design_to_json(const CovariantDesign& d);
CovariantDesign design_from_json(const json& j);

json report_to_json(const SimReport& r);
std::string report_to_csv(const SimReport& r);

// Simulation run description: either a solved design or a raw single seed
// (with an optional class tag, default "qo").
struct SimConfig {
  std::optional<CovariantDesign> design;
  std::optional<SeedSet> seeds;
  std::optional<ProtocolClass> seed_class;
  ChoiOp choi;
  std::uint64_t shots = 0;
  std::optional<std::uint64_t> rng_seed;
  std::vector<std::string> names;
  std::vector<Mat> observables;
};

SimConfig simconfig_from_json(const json& j);

// Shortest round-trip decimal form of a double (diffs stay meaningful and
// parsing recovers the exact value).
std::string format_double(double v);

// Write via temp file + rename so readers never observe partial output.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace optomo::io
