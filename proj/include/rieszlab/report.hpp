#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rieszlab/config.hpp"
#include "rieszlab/critical.hpp"
#include "rieszlab/inequality.hpp"
#include "rieszlab/operators.hpp"
#include "rieszlab/young.hpp"

namespace rieszlab {

nlohmann::json to_json(const ConditionReport& r);
nlohmann::json to_json(const ConstantReport& r);
nlohmann::json to_json(const CoveringReport& r);
nlohmann::json to_json(const EnvelopeReport& r, bool include_values = false);
nlohmann::json to_json(const IntegrabilityReport& r);
nlohmann::json to_json(const CriticalRadiusField& r);
nlohmann::json to_json(const DpReport& r);
nlohmann::json to_json(const TomlValue& v);
nlohmann::json to_json(const TomlTable& t);

// Envelope shared by every artifact: schema riesz-lab/1, the report kind,
// a timestamp (the single nondeterministic field), and the resolved
// parameter set that produced the payload.
nlohmann::json report_envelope(const std::string& kind, nlohmann::json payload,
                               nlohmann::json resolved_config);
void write_json_file(const std::string& path, const nlohmann::json& j);

struct IndexRow {
  std::string task;
  std::string op_name;
  std::string maximal;
  double p = 0.0;
  double theta = 0.0;
  double best_ratio = 0.0;
  double stability = 0.0;
  long long samples = 0;
  std::uint64_t seed = 0;
};

void write_index_csv(const std::string& path, const std::vector<IndexRow>& rows);
std::vector<IndexRow> read_index_csv(const std::string& path);

// Potential field from a config spec: kind constant (value), file (RLGF
// path), or formula ("one-plus-cos", "wells").
GridFunction build_potential(const Grid& g, const std::string& kind,
                             double value, const std::string& path_or_formula);

// Operator tag resolution: classical tags go through assemble_classical;
// zoo tags need the Schrodinger operator and error without one.
LinearOperator resolve_operator(const Grid& g, const std::string& tag,
                                const SchrodingerOperator* L);

// Named test fields for configs and flags: "gaussian", "cos:k", "file:path".
GridFunction field_from_formula(const Grid& g, const std::string& tag);

// Parse, execute tasks in declared order, write one JSON per task plus
// index.csv under out_dir. Returns the number of hard task errors.
int run_config(const std::string& path, const std::string& out_dir,
               bool has_seed_override, std::uint64_t seed_override);

}  // namespace rieszlab
