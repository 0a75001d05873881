#include "miocp/cli.hpp"

#include <cstdio>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "miocp/montecarlo.hpp"
#include "miocp/prior_update.hpp"
#include "miocp/synthesis.hpp"

namespace miocp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw std::invalid_argument("expected an array of rows");
  }
  Eigen::MatrixXd m(j.size(), j.front().size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != j.front().size()) {
      throw std::invalid_argument("ragged matrix rows");
    }
    for (std::size_t c = 0; c < j[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          j[r][c].get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + dir.string() +
                             ": " + ec.message());
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

}  // namespace

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return json::parse(in);
}

void write_json_file(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json policy_to_json(const AffinePolicy& policy) {
  json j;
  j["T"] = policy.horizon();
  j["P"] = json::array();
  j["q"] = json::array();
  j["sigma_pi"] = json::array();
  for (int k = 0; k < policy.horizon(); ++k) {
    j["P"].push_back(matrix_to_json(policy.P[k]));
    j["q"].push_back(vector_to_json(policy.q[k]));
    j["sigma_pi"].push_back(matrix_to_json(policy.sigma_pi[k]));
  }
  return j;
}

AffinePolicy policy_from_json(const json& j) {
  AffinePolicy policy;
  const auto& jp = j.at("P");
  const auto& jq = j.at("q");
  const auto& js = j.at("sigma_pi");
  if (jp.size() != jq.size() || jp.size() != js.size()) {
    throw std::invalid_argument("policy json: P/q/sigma_pi length mismatch");
  }
  for (std::size_t k = 0; k < jp.size(); ++k) {
    policy.P.push_back(matrix_from_json(jp[k]));
    policy.q.push_back(vector_from_json(jq[k]));
    policy.sigma_pi.push_back(matrix_from_json(js[k]));
  }
  return policy;
}

json prior_to_json(const PriorSequence& prior) {
  json entries = json::array();
  for (const auto& g : prior.priors) {
    entries.push_back(
        {{"mu", vector_to_json(g.mean())}, {"sigma", matrix_to_json(g.cov())}});
  }
  return json{{"priors", std::move(entries)}};
}

PriorSequence prior_from_json(const json& j) {
  PriorSequence prior;
  for (const auto& entry : j.at("priors")) {
    prior.priors.emplace_back(vector_from_json(entry.at("mu")),
                              matrix_from_json(entry.at("sigma")));
  }
  return prior;
}

json objective_to_json(const ObjectiveBreakdown& objective) {
  json per_step = json::array();
  for (const auto& step : objective.per_step) {
    per_step.push_back({{"quadratic", step.quadratic}, {"kl", step.kl}});
  }
  return json{{"quadratic_cost", objective.quadratic_cost},
              {"kl_cost", objective.kl_cost},
              {"terminal_cost", objective.terminal_cost},
              {"total", objective.total},
              {"per_step", std::move(per_step)}};
}

SolveTrace run_solve(const ProblemSpec& spec, const SolveConfig& cfg,
                     const fs::path& out_dir) {
  ensure_dir(out_dir);
  const ValidatedSpec vs = validate(spec);

  SolveConfig effective = cfg;
  effective.record_priors = true;  // needed for the distance-to-final column
  const SolveTrace trace = solve(vs, initial_prior(vs), effective);

  const PriorSequence& last_prior = trace.prior_history.back();
  auto csv = open_out(out_dir / "trace.csv");
  csv << "iter,J_total,J_quadratic,J_kl,J_terminal,prior_step_w2,w2_to_final\n";
  for (std::size_t row = 0; row < trace.objective.size(); ++row) {
    const int iter = trace.trace_iterations[row];
    const ObjectiveBreakdown& J = trace.objective[row];
    const double to_final =
        prior_w2_sq_sum(trace.prior_history[iter], last_prior);
    csv << iter << ',' << format_double(J.total) << ','
        << format_double(J.quadratic_cost) << ',' << format_double(J.kl_cost)
        << ',' << format_double(J.terminal_cost) << ','
        << format_double(trace.prior_step_w2[row]) << ','
        << format_double(to_final) << '\n';
  }
  csv.close();

  write_json_file(out_dir / "policy.json", policy_to_json(trace.final_policy));
  write_json_file(out_dir / "prior.json", prior_to_json(trace.final_prior));

  json summary;
  summary["iterations_run"] = trace.iterations_run;
  summary["converged"] = trace.converged;
  summary["final_objective"] = objective_to_json(trace.objective.back());
  summary["epsilon"] = spec.epsilon;
  summary["T"] = spec.T;
  write_json_file(out_dir / "summary.json", summary);
  return trace;
}

void cmd_solve(const RunManifest& manifest) {
  run_solve(load_spec(manifest.spec_path), manifest.solve,
            manifest.output_dir);
}

void cmd_simulate(const RunManifest& manifest) {
  const fs::path out_dir = manifest.output_dir;
  if (!fs::exists(out_dir / "policy.json")) {
    cmd_solve(manifest);
  }
  const ValidatedSpec vs = validate(load_spec(manifest.spec_path));
  const AffinePolicy policy =
      policy_from_json(read_json_file(out_dir / "policy.json"));
  const RolloutBatch batch =
      rollout(vs, policy, manifest.num_paths, manifest.seed);

  const int T = batch.horizon;
  const int n = batch.state_dim;
  const int m = batch.input_dim;
  {
    auto csv = open_out(out_dir / "paths.csv");
    csv << "path,k";
    for (int i = 0; i < n; ++i) csv << ",x" << i + 1;
    for (int i = 0; i < m; ++i) csv << ",u" << i + 1;
    csv << '\n';
    for (int p = 0; p < batch.num_paths; ++p) {
      for (int k = 0; k <= T; ++k) {
        csv << p << ',' << k;
        for (int i = 0; i < n; ++i) {
          csv << ',' << format_double(batch.states(p, k * n + i));
        }
        for (int i = 0; i < m; ++i) {
          csv << ',';
          if (k < T) csv << format_double(batch.inputs(p, k * m + i));
        }
        csv << '\n';
      }
    }
  }
  {
    auto csv = open_out(out_dir / "terminal_scatter.csv");
    csv << "path";
    for (int i = 0; i < n; ++i) csv << ",x" << i + 1;
    csv << '\n';
    for (int p = 0; p < batch.num_paths; ++p) {
      csv << p;
      for (int i = 0; i < n; ++i) {
        csv << ',' << format_double(batch.states(p, T * n + i));
      }
      csv << '\n';
    }
  }
  if (n >= 2) {
    const RegressionLine line = terminal_regression(batch, 0, 1);
    write_json_file(out_dir / "terminal_regression.json",
                    json{{"slope", line.slope},
                         {"intercept", line.intercept},
                         {"coord_x", 0},
                         {"coord_y", 1},
                         {"num_paths", batch.num_paths},
                         {"seed", batch.seed}});
  }
}

void cmd_evaluate(const RunManifest& manifest) {
  const fs::path out_dir = manifest.output_dir;
  ensure_dir(out_dir);
  const ValidatedSpec vs = validate(load_spec(manifest.spec_path));
  const AffinePolicy policy =
      policy_from_json(read_json_file(out_dir / "policy.json"));
  const PriorSequence prior =
      prior_from_json(read_json_file(out_dir / "prior.json"));
  const ObjectiveBreakdown objective = evaluate_objective(vs, policy, prior);
  write_json_file(out_dir / "objective.json", objective_to_json(objective));
}

void cmd_sweep(const RunManifest& manifest) {
  if (manifest.epsilons.empty()) {
    throw std::invalid_argument("sweep: no epsilon values given");
  }
  const ProblemSpec base = load_spec(manifest.spec_path);
  const fs::path out_dir = manifest.output_dir;
  ensure_dir(out_dir);

  const int cap = std::min<int>(env_thread_cap(),
                                static_cast<int>(manifest.epsilons.size()));
  std::vector<std::exception_ptr> errors(manifest.epsilons.size());
  const auto run_one = [&](std::size_t i) {
    try {
      ProblemSpec spec = base;
      spec.epsilon = manifest.epsilons[i];
      char name[48];
      std::snprintf(name, sizeof(name), "eps_%g", manifest.epsilons[i]);
      run_solve(spec, manifest.solve, out_dir / name);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (cap <= 1) {
    for (std::size_t i = 0; i < manifest.epsilons.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    while (next < manifest.epsilons.size()) {
      pool.clear();
      for (int t = 0; t < cap && next < manifest.epsilons.size(); ++t) {
        pool.emplace_back(run_one, next++);
      }
      for (auto& th : pool) th.join();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace miocp::cli
