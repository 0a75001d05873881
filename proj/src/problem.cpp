#include "miocp/problem.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace miocp {

namespace {

using nlohmann::json;

constexpr double kRcondMin = 1e-12;
constexpr double kSymTol = 1e-10;

bool approx_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= kSymTol * scale;
}

bool is_spd(const Eigen::MatrixXd& m) {
  if (!approx_symmetric(m)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  return llt.info() == Eigen::Success;
}

[[noreturn]] void fail_field(const std::string& field, const std::string& why) {
  throw std::invalid_argument("spec config: field '" + field + "': " + why);
}

const json& require_field(const json& j, const std::string& field) {
  const auto it = j.find(field);
  if (it == j.end()) {
    throw std::invalid_argument("spec config: missing field '" + field + "'");
  }
  return *it;
}

Eigen::VectorXd as_vector(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    fail_field(field, "expected a nonempty array of numbers");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail_field(field, "entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    fail_field(field, "expected an array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  if (cols == 0) fail_field(field, "rows must be nonempty");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      fail_field(field, "ragged rows (row " + std::to_string(r) + ")");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) fail_field(field, "entries must be numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          j[r][c].get<double>();
    }
  }
  return m;
}

// A per-step field is either one matrix [[..],..] broadcast to all steps or
// a T-length list of matrices [[[..],..],..].
std::vector<Eigen::MatrixXd> as_matrix_list(const json& j,
                                            const std::string& field, int T) {
  if (!j.is_array() || j.empty()) {
    fail_field(field, "expected a matrix or a list of matrices");
  }
  const json& first = j.front();
  const bool per_step =
      first.is_array() && !first.empty() && first.front().is_array();
  if (per_step) {
    if (static_cast<int>(j.size()) != T) {
      fail_field(field, "expected " + std::to_string(T) + " matrices, got " +
                            std::to_string(j.size()));
    }
    std::vector<Eigen::MatrixXd> out;
    out.reserve(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) {
      out.push_back(as_matrix(j[k], field + "[" + std::to_string(k) + "]"));
    }
    return out;
  }
  return std::vector<Eigen::MatrixXd>(T, as_matrix(j, field));
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v[i]);
  }
  return out;
}

json matrix_list_to_json(const std::vector<Eigen::MatrixXd>& ms) {
  json out = json::array();
  for (const auto& m : ms) {
    out.push_back(matrix_to_json(m));
  }
  return out;
}

}  // namespace

PriorSequence PriorSequence::constant(const Gaussian& g, int T) {
  PriorSequence seq;
  seq.priors.assign(T, g);
  return seq;
}

ValidatedSpec validate(ProblemSpec spec) {
  std::vector<std::string> issues;
  const auto complain = [&issues](const std::string& msg) {
    issues.push_back(msg);
  };

  if (spec.T < 1) {
    complain("T must be >= 1 (got " + std::to_string(spec.T) + ")");
  }
  if (!(spec.epsilon > 0.0)) {
    complain("epsilon must be > 0");
  }

  const int T = spec.T;
  bool lists_ok = T >= 1;
  const auto check_len = [&](const char* name, std::size_t len) {
    if (static_cast<int>(len) != T) {
      complain(std::string(name) + " must have exactly T=" + std::to_string(T) +
               " entries (got " + std::to_string(len) + ")");
      lists_ok = false;
    }
  };
  check_len("A", spec.A.size());
  check_len("B", spec.B.size());
  check_len("sigma_w", spec.sigma_w.size());
  check_len("R", spec.R.size());

  if (!lists_ok || spec.A.empty() || spec.B.empty()) {
    throw std::invalid_argument("invalid problem: " + [&issues] {
      std::string joined;
      for (const auto& s : issues) joined += (joined.empty() ? "" : "; ") + s;
      return joined;
    }());
  }

  const int n = static_cast<int>(spec.A[0].rows());
  const int m = static_cast<int>(spec.B[0].cols());
  if (n < 1) complain("state dimension must be >= 1");
  if (m < 1) complain("input dimension must be >= 1");

  for (int k = 0; k < T; ++k) {
    if (spec.A[k].rows() != n || spec.A[k].cols() != n) {
      complain("A must be " + std::to_string(n) + "x" + std::to_string(n) +
               " at k=" + std::to_string(k));
      continue;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(spec.A[k]);
    if (!lu.isInvertible() || lu.rcond() <= kRcondMin) {
      complain("A not invertible at k=" + std::to_string(k) +
               " (rcond <= 1e-12)");
    }
  }
  for (int k = 0; k < T; ++k) {
    if (spec.B[k].rows() != n || spec.B[k].cols() != m) {
      complain("B must be " + std::to_string(n) + "x" + std::to_string(m) +
               " at k=" + std::to_string(k));
    }
  }
  for (int k = 0; k < T; ++k) {
    if (spec.sigma_w[k].rows() != n || spec.sigma_w[k].cols() != n) {
      complain("sigma_w must be " + std::to_string(n) + "x" +
               std::to_string(n) + " at k=" + std::to_string(k));
    } else if (!is_spd(spec.sigma_w[k])) {
      complain("sigma_w not symmetric positive definite at k=" +
               std::to_string(k));
    }
  }
  for (int k = 0; k < T; ++k) {
    if (spec.R[k].rows() != m || spec.R[k].cols() != m) {
      complain("R must be " + std::to_string(m) + "x" + std::to_string(m) +
               " at k=" + std::to_string(k));
    } else if (!is_spd(spec.R[k])) {
      complain("R not symmetric positive definite at k=" + std::to_string(k));
    }
  }
  if (spec.F.rows() != n || spec.F.cols() != n) {
    complain("F must be " + std::to_string(n) + "x" + std::to_string(n));
  } else if (!is_spd(spec.F)) {
    complain("F not symmetric positive definite");
  }
  if (spec.mu_ini.size() != n) {
    complain("mu_ini must have length " + std::to_string(n));
  }
  if (spec.mu_fin.size() != n) {
    complain("mu_fin must have length " + std::to_string(n));
  }
  if (spec.sigma_ini.rows() != n || spec.sigma_ini.cols() != n) {
    complain("sigma_ini must be " + std::to_string(n) + "x" +
             std::to_string(n));
  } else if (!is_spd(spec.sigma_ini)) {
    complain("sigma_ini not symmetric positive definite");
  }
  if (spec.prior_init && spec.prior_init->dim() != m) {
    complain("prior_init must have dimension " + std::to_string(m));
  }

  if (!issues.empty()) {
    std::string joined;
    for (const auto& s : issues) joined += (joined.empty() ? "" : "; ") + s;
    throw std::invalid_argument("invalid problem: " + joined);
  }
  return ValidatedSpec(std::move(spec));
}

ProblemSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open spec config: " + path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("spec config: parse error in " + path + ": " +
                                e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("spec config: top level must be an object");
  }

  ProblemSpec s;
  const json& jt = require_field(j, "T");
  if (!jt.is_number_integer() || jt.get<int>() < 1) {
    fail_field("T", "expected a positive integer");
  }
  s.T = jt.get<int>();
  s.A = as_matrix_list(require_field(j, "A"), "A", s.T);
  s.B = as_matrix_list(require_field(j, "B"), "B", s.T);
  s.sigma_w = as_matrix_list(require_field(j, "sigma_w"), "sigma_w", s.T);
  s.R = as_matrix_list(require_field(j, "R"), "R", s.T);
  s.F = as_matrix(require_field(j, "F"), "F");
  const json& je = require_field(j, "epsilon");
  if (!je.is_number()) fail_field("epsilon", "expected a number");
  s.epsilon = je.get<double>();
  s.mu_ini = as_vector(require_field(j, "mu_ini"), "mu_ini");
  s.sigma_ini = as_matrix(require_field(j, "sigma_ini"), "sigma_ini");
  s.mu_fin = as_vector(require_field(j, "mu_fin"), "mu_fin");
  if (j.contains("prior_init")) {
    const json& p = j["prior_init"];
    if (!p.is_object()) fail_field("prior_init", "expected an object");
    const Eigen::VectorXd mu = as_vector(require_field(p, "mu"), "prior_init.mu");
    const Eigen::MatrixXd sigma =
        as_matrix(require_field(p, "sigma"), "prior_init.sigma");
    try {
      s.prior_init = Gaussian(mu, sigma);
    } catch (const std::exception& e) {
      fail_field("prior_init", e.what());
    }
  }
  return s;
}

void save_spec(const ProblemSpec& spec, const std::string& path) {
  json j;
  j["T"] = spec.T;
  j["A"] = matrix_list_to_json(spec.A);
  j["B"] = matrix_list_to_json(spec.B);
  j["sigma_w"] = matrix_list_to_json(spec.sigma_w);
  j["R"] = matrix_list_to_json(spec.R);
  j["F"] = matrix_to_json(spec.F);
  j["epsilon"] = spec.epsilon;
  j["mu_ini"] = vector_to_json(spec.mu_ini);
  j["sigma_ini"] = matrix_to_json(spec.sigma_ini);
  j["mu_fin"] = vector_to_json(spec.mu_fin);
  if (spec.prior_init) {
    j["prior_init"] = {{"mu", vector_to_json(spec.prior_init->mean())},
                       {"sigma", matrix_to_json(spec.prior_init->cov())}};
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write spec config: " + path);
  }
  out << j.dump(2) << '\n';
}

PriorSequence initial_prior(const ValidatedSpec& vs) {
  const int m = vs.input_dim();
  const Gaussian g = vs->prior_init
                         ? *vs->prior_init
                         : Gaussian(Eigen::VectorXd::Zero(m),
                                    Eigen::MatrixXd::Identity(m, m));
  return PriorSequence::constant(g, vs.horizon());
}

void require_policy_shape(const ValidatedSpec& vs, const AffinePolicy& policy) {
  const int T = vs.horizon();
  const int n = vs.state_dim();
  const int m = vs.input_dim();
  if (policy.horizon() != T || static_cast<int>(policy.q.size()) != T ||
      static_cast<int>(policy.sigma_pi.size()) != T) {
    throw std::invalid_argument("policy horizon does not match problem T=" +
                                std::to_string(T));
  }
  for (int k = 0; k < T; ++k) {
    if (policy.P[k].rows() != m || policy.P[k].cols() != n ||
        policy.q[k].size() != m || policy.sigma_pi[k].rows() != m ||
        policy.sigma_pi[k].cols() != m) {
      throw std::invalid_argument("policy has wrong shape at k=" +
                                  std::to_string(k));
    }
  }
}

void require_prior_shape(const ValidatedSpec& vs, const PriorSequence& prior) {
  if (prior.horizon() != vs.horizon()) {
    throw std::invalid_argument("prior horizon does not match problem T=" +
                                std::to_string(vs.horizon()));
  }
  for (int k = 0; k < prior.horizon(); ++k) {
    if (prior.priors[k].dim() != vs.input_dim()) {
      throw std::invalid_argument("prior has wrong dimension at k=" +
                                  std::to_string(k));
    }
  }
}

}  // namespace miocp
