#include "rieszlab/report.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "rieszlab/io.hpp"
#include "rieszlab/kernel_conditions.hpp"
#include "rieszlab/rng.hpp"

namespace rieszlab {

using nlohmann::json;

nlohmann::json to_json(const ConditionReport& r) {
  json j;
  j["condition"] = r.condition;
  j["params"] = r.params;
  j["empirical_constant"] = r.empirical_constant;
  j["secondary_constant"] = r.secondary_constant;
  j["worst_sample"] = {{"x0", r.worst.x0}, {"y", r.worst.y}, {"R", r.worst.R}};
  j["sample_count"] = r.sample_count;
  j["skipped"] = r.skipped;
  j["extras"] = r.extras;
  return j;
}

nlohmann::json to_json(const ConstantReport& r) {
  json j;
  j["task_id"] = r.task_id;
  j["best_ratio"] = r.best_ratio;
  j["argmax_id"] = r.argmax_id;
  j["trace"] = r.trace;
  j["stability"] = r.stability;
  j["trial_count"] = r.trial_count;
  j["degenerate_skipped"] = r.degenerate_skipped;
  return j;
}

nlohmann::json to_json(const CoveringReport& r) {
  json j;
  json balls = json::array();
  for (const Ball& b : r.balls)
    balls.push_back({{"center", {b.center[0], b.center[1], b.center[2]}},
                     {"radius", b.radius}});
  j["balls"] = balls;
  json overlaps = json::object();
  for (auto [sigma, count] : r.overlap_max)
    overlaps[std::to_string(sigma)] = count;
  j["overlap_max"] = overlaps;
  j["fitted_N1"] = r.fitted_N1;
  j["fitted_C"] = r.fitted_C;
  j["fit_r2"] = r.fit_r2;
  return j;
}

nlohmann::json to_json(const EnvelopeReport& r, bool include_values) {
  json j;
  j["c1"] = r.c1;
  j["sigma1"] = r.sigma1;
  j["c2"] = r.c2;
  j["sigma2"] = r.sigma2;
  j["fit_residual"] = r.fit_residual;
  if (include_values) j["values"] = r.values.values;
  return j;
}

nlohmann::json to_json(const IntegrabilityReport& r) {
  json j;
  j["sides"] = r.sides;
  j["weighted_integrals"] = r.weighted_integrals;
  j["sigma_integrals"] = r.sigma_integrals;
  j["weighted_growth"] = r.weighted_growth;
  j["sigma_growth"] = r.sigma_growth;
  j["theta"] = r.theta;
  j["weighted_cauchy"] = r.weighted_cauchy;
  j["sigma_cauchy"] = r.sigma_cauchy;
  j["trends_agree"] = r.trends_agree;
  return j;
}

nlohmann::json to_json(const CriticalRadiusField& r) {
  json j;
  j["q"] = r.q;
  j["fitted_C0"] = r.fitted_C0;
  j["fitted_N0"] = r.fitted_N0;
  j["capped_fraction"] = r.capped_fraction;
  j["floored_fraction"] = r.floored_fraction;
  double lo = r.rho[0], hi = r.rho[0];
  for (double v : r.rho.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  j["rho_min"] = lo;
  j["rho_max"] = hi;
  return j;
}

nlohmann::json to_json(const DpReport& r) {
  json j;
  switch (r.verdict) {
    case DpVerdict::In: j["verdict"] = "in"; break;
    case DpVerdict::Out: j["verdict"] = "out"; break;
    default: j["verdict"] = "inconclusive"; break;
  }
  j["tail_estimate"] = r.tail_estimate;
  j["tail_rate"] = r.tail_rate;
  j["block_ratio"] = r.block_ratio;
  j["spread"] = r.spread;
  return j;
}

nlohmann::json to_json(const TomlValue& v) {
  switch (v.kind) {
    case TomlValue::Kind::String: return v.str;
    case TomlValue::Kind::Boolean: return v.boolean;
    case TomlValue::Kind::Array: {
      json arr = json::array();
      for (const TomlValue& e : v.array) arr.push_back(to_json(e));
      return arr;
    }
    default: return v.num;
  }
}

nlohmann::json to_json(const TomlTable& t) {
  json j = json::object();
  for (const auto& [key, value] : t.entries) j[key] = to_json(value);
  return j;
}

nlohmann::json report_envelope(const std::string& kind, nlohmann::json payload,
                               nlohmann::json resolved_config) {
  json j;
  j["schema"] = "riesz-lab/1";
  j["kind"] = kind;
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  j["timestamp"] = buf;
  j["config"] = std::move(resolved_config);
  j["result"] = std::move(payload);
  return j;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_index_csv(const std::string& path,
                     const std::vector<IndexRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "task,operator,maximal,p,theta,best_ratio,stability,samples,seed\n";
  char buf[512];
  for (const IndexRow& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%s,%s,%s,%.17g,%.17g,%.17g,%.17g,%lld,%" PRIu64 "\n",
                  r.task.c_str(), r.op_name.c_str(), r.maximal.c_str(), r.p,
                  r.theta, r.best_ratio, r.stability, r.samples,
                  static_cast<std::uint64_t>(r.seed));
    out << buf;
  }
}

std::vector<IndexRow> read_index_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty index csv: " + path);
  std::vector<IndexRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9)
      throw std::runtime_error("malformed index row: " + line);
    IndexRow r;
    r.task = cells[0];
    r.op_name = cells[1];
    r.maximal = cells[2];
    r.p = std::stod(cells[3]);
    r.theta = std::stod(cells[4]);
    r.best_ratio = std::stod(cells[5]);
    r.stability = std::stod(cells[6]);
    r.samples = std::stoll(cells[7]);
    r.seed = std::stoull(cells[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

GridFunction build_potential(const Grid& g, const std::string& kind,
                             double value, const std::string& path_or_formula) {
  if (kind == "constant") {
    if (!(value > 0.0))
      throw std::invalid_argument("potential: constant value must be > 0");
    return constant_function(g, value);
  }
  if (kind == "file") {
    GridFunction V = read_rlgf(path_or_formula);
    if (!(V.grid == g))
      throw std::invalid_argument(
          "potential: field file grid does not match the configured grid");
    return V;
  }
  if (kind == "formula") {
    GridFunction V(g);
    if (path_or_formula == "one-plus-cos") {
      for (std::size_t i = 0; i < V.size(); ++i) {
        Point x = g.point(i);
        double s = 0.0;
        for (int a = 0; a < g.d; ++a)
          s += std::cos(2.0 * M_PI * x[a] / g.side);
        V[i] = 1.0 + 0.5 * s / g.d;
      }
      return V;
    }
    if (path_or_formula == "wells") {
      Point c1, c2;
      for (int a = 0; a < 3; ++a) {
        c1[a] = a < g.d ? 0.25 * g.side : 0.0;
        c2[a] = a < g.d ? 0.75 * g.side : 0.0;
      }
      double s2 = std::pow(g.side / 10.0, 2);
      for (std::size_t i = 0; i < V.size(); ++i) {
        Point x = g.point(i);
        double d1 = g.dist(x, c1), d2 = g.dist(x, c2);
        V[i] = 0.25 + std::exp(-d1 * d1 / (2.0 * s2)) +
               std::exp(-d2 * d2 / (2.0 * s2));
      }
      return V;
    }
    throw std::invalid_argument("potential: unknown formula '" +
                                path_or_formula +
                                "' (available: one-plus-cos, wells)");
  }
  throw std::invalid_argument("potential: unknown kind '" + kind +
                              "' (constant | file | formula)");
}

LinearOperator resolve_operator(const Grid& g, const std::string& tag,
                                const SchrodingerOperator* L) {
  if (tag == "identity" || tag.rfind("classical:", 0) == 0 ||
      tag.rfind("grad:", 0) == 0)
    return assemble_classical(g, tag);
  if (L == nullptr)
    throw std::invalid_argument(
        "operator '" + tag +
        "' needs a potential: add a [potential] section or use a classical "
        "tag");
  if (!(L->grid == g))
    throw std::invalid_argument("operator grid mismatch");
  return build_operator(*L, tag);
}

namespace {

// Shared task context built from the config's global sections.
struct RunContext {
  Grid grid;
  std::shared_ptr<GridFunction> V;  // null if no potential section
  double q = 2.0;
  std::unique_ptr<SchrodingerOperator> L;
  std::unique_ptr<CriticalRadiusField> rho;

  const SchrodingerOperator* schrodinger() {
    if (!V) return nullptr;
    if (!L) L = std::make_unique<SchrodingerOperator>(
                 assemble_schrodinger(grid, *V));
    return L.get();
  }
  const CriticalRadiusField& critical() {
    if (!rho) {
      if (!V)
        throw std::runtime_error(
            "this task needs a critical radius field: add a [potential] "
            "section");
      if (grid.d >= 3) {
        rho = std::make_unique<CriticalRadiusField>(rho_field(*V, q));
      } else {
        // In low dimension the radius integral never crosses 1; use the
        // constant field at the quarter-side scale instead.
        rho = std::make_unique<CriticalRadiusField>(
            synthetic_rho(constant_function(grid, grid.side / 4.0)));
      }
    }
    return *rho;
  }
};

MaximalSpec maximal_from_table(const TomlTable& t, RunContext& ctx) {
  YoungFunction young = parse_young(t.string_or("young", "power:1"));
  int k_radii = static_cast<int>(t.number_or("k_radii", 10));
  int stride = static_cast<int>(t.number_or("stride", 1));
  auto dict = std::make_shared<BallDictionary>(
      build_dictionary(ctx.grid, k_radii, stride));
  std::string mode = t.string_or("maximal", "full");
  int hl = static_cast<int>(t.number_or("compose_with_hl", 0));
  MaximalSpec spec;
  if (mode == "full") {
    spec = maximal_full(young, dict, hl);
  } else if (mode == "local" || mode == "theta") {
    auto rho_ptr =
        std::make_shared<GridFunction>(ctx.critical().rho);
    if (mode == "local") {
      spec = maximal_local(young, dict, rho_ptr);
    } else {
      spec = maximal_theta(young, dict, rho_ptr, t.number_or("theta", 0.0));
    }
    spec.compose_with_hl = hl;
  } else {
    throw std::runtime_error(t.origin + ":" + std::to_string(t.line) +
                             ": unknown maximal mode '" + mode +
                             "' (full | local | theta)");
  }
  return spec;
}

}  // namespace

GridFunction field_from_formula(const Grid& g, const std::string& tag) {
  GridFunction f(g);
  if (tag.rfind("cos:", 0) == 0) {
    int k = std::stoi(tag.substr(4));
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] = std::cos(2.0 * M_PI * k * g.point(i)[0] / g.side);
    return f;
  }
  if (tag == "gaussian") {
    Point c;
    for (int a = 0; a < 3; ++a) c[a] = a < g.d ? 0.5 * g.side : 0.0;
    double s2 = std::pow(g.side / 8.0, 2);
    for (std::size_t i = 0; i < f.size(); ++i) {
      double r = g.dist(g.point(i), c);
      f[i] = std::exp(-r * r / (2.0 * s2));
    }
    return f;
  }
  if (tag.rfind("file:", 0) == 0) return read_rlgf(tag.substr(5));
  throw std::runtime_error("unknown field formula '" + tag +
                           "' (cos:k | gaussian | file:path)");
}

int run_config(const std::string& path, const std::string& out_dir,
               bool has_seed_override, std::uint64_t seed_override) {
  TomlDocument doc = parse_toml_file(path);

  const TomlTable* gt = doc.unique("grid");
  if (!gt)
    throw std::runtime_error(path + ": missing required [grid] section");
  RunContext ctx;
  ctx.grid = make_grid(static_cast<int>(gt->number("d")),
                       static_cast<int>(gt->number("n")), gt->number("side"));

  if (const TomlTable* pt = doc.unique("potential")) {
    ctx.V = std::make_shared<GridFunction>(build_potential(
        ctx.grid, pt->string_or("kind", "constant"),
        pt->number_or("value", 1.0),
        pt->has("path") ? pt->string("path") : pt->string_or("formula", "")));
    ctx.q = pt->number_or("q", 2.0);
  }

  std::uint64_t master = has_seed_override
                             ? seed_override
                             : static_cast<std::uint64_t>(
                                   doc.root.number_or("seed", 1));

  std::filesystem::create_directories(out_dir);
  auto tasks = doc.named("task");
  std::vector<IndexRow> index;
  int errors = 0;

  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    const TomlTable& t = *tasks[ti];
    std::string kind = t.string("kind");
    std::string name = t.string_or("name", "task" + std::to_string(ti));
    std::uint64_t seed =
        t.has("seed") ? static_cast<std::uint64_t>(t.number("seed"))
                      : derive_seed({master, ti});

    json resolved = to_json(t);
    resolved["grid"] = {{"d", ctx.grid.d}, {"n", ctx.grid.n},
                        {"side", ctx.grid.side}};
    resolved["seed"] = seed;
    resolved["name"] = name;

    IndexRow row;
    row.task = name;
    row.seed = seed;

    auto resolve = [&](const std::string& tag) {
      bool classical = tag == "identity" || tag.rfind("classical:", 0) == 0 ||
                       tag.rfind("grad:", 0) == 0;
      return resolve_operator(ctx.grid, tag,
                              classical ? nullptr : ctx.schrodinger());
    };

    try {
      json payload;
      if (kind == "fs-constant" || kind == "weak-check") {
        InequalityTask task;
        task.id = name;
        task.op = resolve(t.string("operator"));
        task.maximal = maximal_from_table(t, ctx);
        task.p = t.number_or("p", kind == "weak-check" ? 1.0 : 2.0);
        task.type =
            kind == "weak-check" ? TaskType::Weak : TaskType::Strong;
        task.trials = static_cast<int>(t.number_or("trials", 500));
        task.seed = seed;
        task.search.restarts = static_cast<int>(t.number_or("restarts", 2));
        task.search.passes = static_cast<int>(t.number_or("passes", 3));
        task.search.coord_cap =
            static_cast<int>(t.number_or("coord_cap", 0));
        ConstantReport rep = estimate_constant(task);
        payload = to_json(rep);
        row.op_name = task.op.name;
        row.maximal = maximal_name(task.maximal);
        row.p = task.p;
        row.theta = task.maximal.theta;
        row.best_ratio = rep.best_ratio;
        row.stability = rep.stability;
        row.samples = task.trials;
      } else if (kind == "kernel-check") {
        LinearOperator T = resolve(t.string("operator"));
        OperatorKernel K = kernel_of(T);
        std::unique_ptr<OperatorKernel> K0;
        if (t.has("k0"))
          K0 = std::make_unique<OperatorKernel>(kernel_of(resolve(t.string("k0"))));
        KernelCheckParams kp;
        kp.s = t.number_or("s", 2.0);
        kp.N = t.number_or("N", 1.0);
        kp.delta = t.number_or("delta", 1.0);
        kp.samples = static_cast<int>(t.number_or("samples", 400));
        kp.seed = seed;
        ConditionReport rep =
            check_condition(K, K0.get(), ctx.critical(),
                            kernel_condition_from_name(t.string("cond")), kp);
        payload = to_json(rep);
        row.op_name = T.name;
        row.p = kp.s;
        row.best_ratio = rep.empirical_constant;
        row.samples = static_cast<long long>(rep.sample_count);
      } else if (kind == "rho") {
        const CriticalRadiusField& f = ctx.critical();
        payload = to_json(f);
        row.best_ratio = f.fitted_C0;
        row.samples = static_cast<long long>(f.grid.num_points());
        if (t.has("field_out")) {
          write_rlgf(t.string("field_out"), f.rho);
          payload["field_out"] = t.string("field_out");
        }
      } else if (kind == "covering") {
        CoveringReport rep =
            critical_covering(ctx.critical(), t.number_or("shrink", 1.0));
        payload = to_json(rep);
        row.best_ratio = rep.fitted_N1;
        row.samples = static_cast<long long>(rep.balls.size());
      } else if (kind == "maximal") {
        MaximalSpec spec = maximal_from_table(t, ctx);
        GridFunction f =
            field_from_formula(ctx.grid, t.string_or("field", "gaussian"));
        GridFunction Mf = maximal_apply(f, spec);
        double mx = 0.0, mean = 0.0;
        for (double v : Mf.values) {
          mx = std::max(mx, v);
          mean += v;
        }
        mean /= Mf.size();
        payload = {{"max", mx}, {"mean", mean},
                   {"maximal", maximal_name(spec)}};
        if (t.has("field_out")) {
          write_rlgf(t.string("field_out"), Mf);
          payload["field_out"] = t.string("field_out");
        }
        row.maximal = maximal_name(spec);
        row.theta = spec.theta;
        row.best_ratio = mx;
      } else if (kind == "envelope") {
        MaximalSpec spec = maximal_from_table(t, ctx);
        const CriticalRadiusField& f = ctx.critical();
        std::size_t center = t.has("center")
                                 ? static_cast<std::size_t>(t.number("center"))
                                 : ctx.grid.pack(ctx.grid.n / 2,
                                                 ctx.grid.n / 2,
                                                 ctx.grid.n / 2);
        if (center >= ctx.grid.num_points())
          throw std::runtime_error("envelope: center index out of range");
        Ball Q{ctx.grid.point(center), f.rho[center]};
        EnvelopeReport rep = chi_envelope(spec, Q);
        payload = to_json(rep, t.boolean_or("include_values", false));
        row.maximal = maximal_name(spec);
        row.theta = spec.theta;
        row.best_ratio = rep.sigma2;
      } else if (kind == "integrability") {
        IntegrabilityReport rep = integrability_verdict(
            t.number_or("beta", 0.0), t.number_or("p", 2.0),
            t.number("sigma"), static_cast<int>(t.number_or("boxdim", 3)),
            parse_young(t.string_or("young", "power:1")),
            t.number_or("theta", -1.0));
        payload = to_json(rep);
        row.p = t.number_or("p", 2.0);
        row.theta = rep.theta;
        row.best_ratio = rep.weighted_cauchy ? 1.0 : 0.0;
      } else if (kind == "pde") {
        const SchrodingerOperator* L = ctx.schrodinger();
        if (!L)
          throw std::runtime_error("pde task needs a [potential] section");
        PdeRhs rhs;
        std::string rk = t.string_or("rhs", "gaussian");
        if (t.string_or("rhs_kind", "source") == "divergence") {
          rhs.kind = PdeRhs::Kind::Divergence;
          for (int a = 0; a < ctx.grid.d; ++a)
            rhs.F.push_back(field_from_formula(ctx.grid, rk));
        } else {
          rhs.kind = PdeRhs::Kind::Source;
          rhs.f = field_from_formula(ctx.grid, rk);
        }
        PdeSolution sol = solve_pde(*L, rhs);
        payload = {{"residual_rel", sol.residual_rel},
                   {"u_l2", lp_norm(sol.u, 2.0)},
                   {"Vu_l2", lp_norm(sol.Vu, 2.0)}};
        json gl = json::array();
        for (const auto& gj : sol.grad) gl.push_back(lp_norm(gj, 2.0));
        payload["grad_l2"] = gl;
        if (t.has("field_out")) {
          write_rlgf(t.string("field_out"), sol.u);
          payload["field_out"] = t.string("field_out");
        }
        row.best_ratio = sol.residual_rel;
      } else {
        throw std::runtime_error(
            t.origin + ":" + std::to_string(t.line) + ": unknown task kind '" +
            kind + "'");
      }

      json envelope = report_envelope(kind, std::move(payload), resolved);
      write_json_file(out_dir + "/" + name + ".json", envelope);
      index.push_back(row);
    } catch (const std::exception& e) {
      ++errors;
      std::cerr << "task '" << name << "' failed: " << e.what() << "\n";
      json envelope = report_envelope(
          kind, json{{"error", e.what()}}, resolved);
      write_json_file(out_dir + "/" + name + ".json", envelope);
    }
  }

  write_index_csv(out_dir + "/index.csv", index);
  return errors;
}

}  // namespace rieszlab
