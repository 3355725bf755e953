// riesz-lab: command-line front end for the torus harmonic-analysis lab.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "rieszlab/io.hpp"
#include "rieszlab/kernel_conditions.hpp"
#include "rieszlab/report.hpp"
#include "rieszlab/rng.hpp"

using namespace rieszlab;
using nlohmann::json;

namespace {

struct GridFlags {
  int d = 1;
  int n = 64;
  double side = 1.0;
  std::string potential;  // "constant:1" | "file:path" | "formula:tag"
  double q = 2.0;
};

void add_grid_flags(CLI::App* cmd, GridFlags& gf) {
  cmd->add_option("-d,--dim", gf.d, "dimension (1, 2 or 3)");
  cmd->add_option("-n,--points", gf.n, "points per axis (even, >= 4)");
  cmd->add_option("--side", gf.side, "box side length");
  cmd->add_option("--potential", gf.potential,
                  "potential spec: constant:<v> | file:<path> | formula:<tag>");
  cmd->add_option("--q", gf.q, "reverse Holder order for the radius field");
}

GridFunction potential_from_flag(const Grid& g, const std::string& spec) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "constant")
    return build_potential(g, "constant", arg.empty() ? 1.0 : std::stod(arg),
                           "");
  return build_potential(g, kind, 0.0, arg);
}

json grid_flags_json(const GridFlags& gf) {
  json j{{"d", gf.d}, {"n", gf.n}, {"side", gf.side}, {"q", gf.q}};
  if (!gf.potential.empty()) j["potential"] = gf.potential;
  return j;
}

void emit(const json& report, const std::string& out) {
  if (out.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    write_json_file(out, report);
  }
}

// Runs the first matching task of a task file through the config runner
// machinery, but emits a single report.
int run_single_task_file(const std::string& task_path, const std::string& out,
                         bool has_seed, std::uint64_t seed) {
  std::string dir = out.empty() ? "." : out + ".d";
  int errors = run_config(task_path, dir, has_seed, seed);
  if (errors != 0) return 1;
  if (!out.empty()) {
    // Move the single task report over the requested name.
    auto rows = read_index_csv(dir + "/index.csv");
    if (rows.size() == 1) {
      std::filesystem::rename(dir + "/" + rows[0].task + ".json", out);
      std::filesystem::remove(dir + "/index.csv");
      std::filesystem::remove(dir);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for weighted inequalities on the torus"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  bool has_seed = false;
  int threads = 1;
  std::string out;
  app.add_option("--seed", seed, "master seed")->each([&](const std::string&) {
    has_seed = true;
  });
  app.add_option("--threads", threads, "worker threads (execution is "
                                       "deterministic regardless)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output file (or directory for run)");

  GridFlags gf;

  auto* c_grid = app.add_subcommand("grid-info", "describe a grid");
  add_grid_flags(c_grid, gf);

  auto* c_rho = app.add_subcommand("rho", "critical radius field");
  add_grid_flags(c_rho, gf);
  std::string field_out;
  c_rho->add_option("--field-out", field_out, "write the field (RLGF)");

  auto* c_cov = app.add_subcommand("covering", "greedy critical covering");
  add_grid_flags(c_cov, gf);
  double shrink = 1.0;
  c_cov->add_option("--shrink", shrink, "ball shrink factor in (0,1]");

  auto* c_max = app.add_subcommand("maximal", "apply a maximal operator");
  add_grid_flags(c_max, gf);
  std::string young_tag = "power:1", mode = "full", field = "gaussian";
  double theta = 0.0;
  int k_radii = 10, stride = 1, compose_hl = 0;
  c_max->add_option("--young", young_tag, "gauge: power:r | logpower:a | loglog:a,b");
  c_max->add_option("--mode", mode, "full | local | theta");
  c_max->add_option("--theta", theta, "damping exponent (theta mode)");
  c_max->add_option("--k-radii", k_radii, "dictionary radii (>= 8)");
  c_max->add_option("--stride", stride, "center subsampling stride");
  c_max->add_option("--compose-hl", compose_hl, "extra plain passes");
  c_max->add_option("--field", field, "input field: gaussian | cos:k | file:path");
  c_max->add_option("--field-out", field_out, "write the result (RLGF)");

  auto* c_kc = app.add_subcommand("kernel-check", "sampled kernel conditions");
  add_grid_flags(c_kc, gf);
  std::string op_tag = "classical:R1:0", k0_tag, cond = "a_s";
  double s_par = 2.0, N_par = 1.0, delta_par = 1.0;
  int samples = 400;
  c_kc->add_option("--op", op_tag, "operator tag");
  c_kc->add_option("--k0", k0_tag, "comparison kernel tag (b_s, b_inf)");
  c_kc->add_option("--cond", cond, "a_s | a_s_prime | b_s | c_s | a_inf | b_inf");
  c_kc->add_option("--s", s_par, "slice-norm index");
  c_kc->add_option("--N", N_par, "decay exponent");
  c_kc->add_option("--delta", delta_par, "singularity exponent");
  c_kc->add_option("--samples", samples, "sample count");

  auto* c_fs = app.add_subcommand("fs-constant", "strong-type constant search");
  std::string task_path;
  c_fs->add_option("--task", task_path, "task config (TOML)")->required();

  auto* c_wk = app.add_subcommand("weak-check", "weak-type constant search");
  c_wk->add_option("--task", task_path, "task config (TOML)")->required();

  auto* c_env = app.add_subcommand("envelope", "critical-ball maximal envelope");
  add_grid_flags(c_env, gf);
  c_env->add_option("--theta", theta, "damping exponent");
  c_env->add_option("--young", young_tag, "gauge");
  c_env->add_option("--k-radii", k_radii, "dictionary radii (>= 8)");
  long long center = -1;
  c_env->add_option("--center", center, "ball center (linear index)");

  auto* c_int = app.add_subcommand("integrability", "growing-box trend check");
  double beta = 0.0, p_par = 2.0, sigma = 4.0, theta_flag = -1.0;
  int boxdim = 3;
  c_int->add_option("--beta", beta, "growth exponent of |f|")->required();
  c_int->add_option("--p", p_par, "integrability power")->required();
  c_int->add_option("--sigma", sigma, "envelope decay")->required();
  c_int->add_option("--theta", theta_flag, "damping (default max(0, sigma-d))");
  c_int->add_option("--boxdim", boxdim, "box dimension");
  c_int->add_option("--young", young_tag, "gauge");

  auto* c_pde = app.add_subcommand("pde", "solve the potential equation");
  add_grid_flags(c_pde, gf);
  std::string rhs = "gaussian", rhs_kind = "source";
  c_pde->add_option("--rhs", rhs, "right side: gaussian | cos:k | file:path");
  c_pde->add_option("--rhs-kind", rhs_kind, "source | divergence");
  c_pde->add_option("--field-out", field_out, "write the solution (RLGF)");

  auto* c_run = app.add_subcommand("run", "execute a config suite");
  std::string config_path;
  c_run->add_option("config", config_path, "experiment config (TOML)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_grid->parsed()) {
      Grid g = make_grid(gf.d, gf.n, gf.side);
      json payload{{"spacing", g.spacing()},
                   {"num_points", g.num_points()},
                   {"max_ball_radius", 2.0 * g.side}};
      emit(report_envelope("grid-info", payload, grid_flags_json(gf)), out);
      return 0;
    }

    if (c_rho->parsed() || c_cov->parsed()) {
      Grid g = make_grid(gf.d, gf.n, gf.side);
      if (gf.potential.empty())
        throw std::runtime_error("--potential is required here");
      GridFunction V = potential_from_flag(g, gf.potential);
      CriticalRadiusField f = rho_field(V, gf.q);
      json payload = to_json(f);
      if (c_cov->parsed()) {
        payload["covering"] = to_json(critical_covering(f, shrink));
        payload["covering"]["shrink"] = shrink;
      } else if (!field_out.empty()) {
        write_rlgf(field_out, f.rho);
        payload["field_out"] = field_out;
      }
      emit(report_envelope(c_cov->parsed() ? "covering" : "rho", payload,
                           grid_flags_json(gf)),
           out);
      return 0;
    }

    if (c_max->parsed() || c_env->parsed() || c_kc->parsed() ||
        c_pde->parsed()) {
      // These share the ad-hoc single-shot config path through the runner's
      // building blocks.
      Grid g = make_grid(gf.d, gf.n, gf.side);
      std::shared_ptr<GridFunction> V;
      std::unique_ptr<SchrodingerOperator> L;
      std::unique_ptr<CriticalRadiusField> rho;
      auto need_V = [&]() -> GridFunction& {
        if (!V) {
          if (gf.potential.empty())
            throw std::runtime_error("--potential is required here");
          V = std::make_shared<GridFunction>(
              potential_from_flag(g, gf.potential));
        }
        return *V;
      };
      auto need_rho = [&]() -> const CriticalRadiusField& {
        if (!rho) {
          if (g.d >= 3) {
            rho = std::make_unique<CriticalRadiusField>(
                rho_field(need_V(), gf.q));
          } else {
            rho = std::make_unique<CriticalRadiusField>(
                synthetic_rho(constant_function(g, g.side / 4.0)));
          }
        }
        return *rho;
      };
      auto need_L = [&]() -> const SchrodingerOperator& {
        if (!L)
          L = std::make_unique<SchrodingerOperator>(
              assemble_schrodinger(g, need_V()));
        return *L;
      };
      auto resolve = [&](const std::string& tag) {
        bool classical = tag == "identity" ||
                         tag.rfind("classical:", 0) == 0 ||
                         tag.rfind("grad:", 0) == 0;
        return resolve_operator(g, tag, classical ? nullptr : &need_L());
      };
      auto build_spec = [&](const std::string& m) {
        auto dict = std::make_shared<BallDictionary>(
            build_dictionary(g, k_radii, stride));
        YoungFunction A = parse_young(young_tag);
        MaximalSpec spec;
        if (m == "full") {
          spec = maximal_full(A, dict, compose_hl);
        } else {
          auto rp = std::make_shared<GridFunction>(need_rho().rho);
          spec = m == "local" ? maximal_local(A, dict, rp)
                              : maximal_theta(A, dict, rp, theta);
          spec.compose_with_hl = compose_hl;
        }
        return spec;
      };

      if (c_max->parsed()) {
        MaximalSpec spec = build_spec(mode);
        GridFunction f = field_from_formula(g, field);
        GridFunction Mf = maximal_apply(f, spec);
        double mx = 0.0;
        for (double v : Mf.values) mx = std::max(mx, v);
        json payload{{"max", mx}, {"maximal", maximal_name(spec)}};
        if (!field_out.empty()) {
          write_rlgf(field_out, Mf);
          payload["field_out"] = field_out;
        }
        emit(report_envelope("maximal", payload, grid_flags_json(gf)), out);
        return 0;
      }
      if (c_env->parsed()) {
        MaximalSpec spec = build_spec("theta");
        const CriticalRadiusField& f = need_rho();
        std::size_t cidx = center >= 0 ? static_cast<std::size_t>(center)
                                       : g.pack(g.n / 2, g.n / 2, g.n / 2);
        if (cidx >= g.num_points())
          throw std::runtime_error("envelope: center index out of range");
        Ball Q{g.point(cidx), f.rho[cidx]};
        emit(report_envelope("envelope", to_json(chi_envelope(spec, Q)),
                             grid_flags_json(gf)),
             out);
        return 0;
      }
      if (c_kc->parsed()) {
        OperatorKernel K = kernel_of(resolve(op_tag));
        std::unique_ptr<OperatorKernel> K0;
        if (!k0_tag.empty())
          K0 = std::make_unique<OperatorKernel>(kernel_of(resolve(k0_tag)));
        KernelCheckParams kp;
        kp.s = s_par;
        kp.N = N_par;
        kp.delta = delta_par;
        kp.samples = samples;
        kp.seed = seed;
        ConditionReport rep = check_condition(
            K, K0.get(), need_rho(), kernel_condition_from_name(cond), kp);
        emit(report_envelope("kernel-check", to_json(rep),
                             grid_flags_json(gf)),
             out);
        return 0;
      }
      // pde
      PdeRhs prhs;
      if (rhs_kind == "divergence") {
        prhs.kind = PdeRhs::Kind::Divergence;
        for (int a = 0; a < g.d; ++a)
          prhs.F.push_back(field_from_formula(g, rhs));
      } else {
        prhs.kind = PdeRhs::Kind::Source;
        prhs.f = field_from_formula(g, rhs);
      }
      PdeSolution sol = solve_pde(need_L(), prhs);
      json payload{{"residual_rel", sol.residual_rel},
                   {"u_l2", lp_norm(sol.u, 2.0)}};
      if (!field_out.empty()) {
        write_rlgf(field_out, sol.u);
        payload["field_out"] = field_out;
      }
      emit(report_envelope("pde", payload, grid_flags_json(gf)), out);
      return 0;
    }

    if (c_int->parsed()) {
      IntegrabilityReport rep = integrability_verdict(
          beta, p_par, sigma, boxdim, parse_young(young_tag), theta_flag);
      json resolved{{"beta", beta},     {"p", p_par},
                    {"sigma", sigma},   {"boxdim", boxdim},
                    {"young", young_tag}, {"theta", theta_flag}};
      emit(report_envelope("integrability", to_json(rep), resolved), out);
      return 0;
    }

    if (c_fs->parsed() || c_wk->parsed())
      return run_single_task_file(task_path, out, has_seed, seed);

    if (c_run->parsed())
      return run_config(config_path, out.empty() ? "reports" : out, has_seed,
                        seed) == 0
                 ? 0
                 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
