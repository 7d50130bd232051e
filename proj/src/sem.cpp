#include "sva/sem.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace sva {

double poly_eval(const std::vector<double>& coeffs, double y) {
  // Horner on a_1*y + ... + a_d*y^d
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * y + *it;
  return acc * y;
}

bool poly_is_zero(const std::vector<double>& coeffs) {
  for (double c : coeffs)
    if (c != 0.0) return false;
  return true;
}

Dag induced_dag(const SemSpec& spec, SemNodeIds* ids) {
  SemNodeIds layout;
  layout.y = 0;
  for (int l = 0; l < spec.L; ++l) layout.c.push_back(1 + l);
  for (int k = 0; k < spec.K; ++k) layout.h.push_back(1 + spec.L + k);
  for (int j = 0; j < spec.J; ++j) layout.x.push_back(1 + spec.L + spec.K + j);

  std::vector<std::pair<int, int>> edges;
  for (int k = 0; k < spec.K; ++k)
    if (!poly_is_zero(spec.fh_coeffs[k])) edges.emplace_back(layout.y, layout.h[k]);
  for (int l = 0; l < spec.L; ++l)
    for (int k = 0; k < spec.K; ++k)
      if (spec.gamma(l, k) != 0.0) edges.emplace_back(layout.c[l], layout.h[k]);
  for (int j = 0; j < spec.J; ++j)
    if (!poly_is_zero(spec.fx_coeffs[j])) edges.emplace_back(layout.y, layout.x[j]);
  for (int k = 0; k < spec.K; ++k)
    for (int j = 0; j < spec.J; ++j)
      if (spec.beta(k, j) != 0.0) edges.emplace_back(layout.h[k], layout.x[j]);

  if (ids) *ids = layout;
  return Dag(1 + spec.L + spec.K + spec.J, edges);
}

namespace {

std::vector<double> random_poly(int d_max, Rng& rng) {
  const int degree = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d_max)));
  std::vector<double> coeffs(degree);
  for (auto& c : coeffs) c = rng.normal();
  return coeffs;
}

// first `count` elements of a random permutation of {0,...,n-1}
std::vector<int> sample_indices(int n, int count, Rng& rng) {
  auto perm = rng.permutation(n);
  perm.resize(count);
  return perm;
}

}  // namespace

SemSpec build_sem(const SemConfig& config, Rng& rng) {
  const auto& sp = config.sparsity;
  for (double frac : {sp.p0j, sp.p0k, sp.p0beta, sp.p_dse})
    if (frac < 0.0 || frac > 1.0)
      throw std::invalid_argument("build_sem: sparsity fractions must lie in [0,1]");
  if (sp.p_dse > sp.p0j)
    throw std::invalid_argument("build_sem: p_dse must not exceed p0j");
  if (!config.dense_gamma && config.L != config.K)
    throw std::invalid_argument("build_sem: identity gamma pattern needs L == K");

  SemSpec spec;
  spec.J = config.J;
  spec.K = config.K;
  spec.L = config.L;
  spec.d_max = config.d_max;
  spec.sigma_y = config.sigma_y;
  spec.sigma_c = config.sigma_c;
  spec.sigma_x = config.sigma_x;
  spec.sigma_h = config.sigma_h;
  spec.sparsity = sp;

  spec.fx_coeffs.resize(config.J);
  for (auto& p : spec.fx_coeffs) p = random_poly(config.d_max, rng);
  spec.fh_coeffs.resize(config.K);
  for (auto& p : spec.fh_coeffs) p = random_poly(config.d_max, rng);

  spec.beta.resize(config.K, config.J);
  for (int k = 0; k < config.K; ++k)
    for (int j = 0; j < config.J; ++j) spec.beta(k, j) = rng.normal();

  if (config.dense_gamma) {
    spec.gamma.resize(config.L, config.K);
    for (int l = 0; l < config.L; ++l)
      for (int k = 0; k < config.K; ++k) spec.gamma(l, k) = rng.normal();
  } else {
    spec.gamma = Eigen::MatrixXd::Identity(config.L, config.K);
  }

  const int n_j0 = static_cast<int>(std::ceil(sp.p0j * config.J));
  const auto j0 = sample_indices(config.J, n_j0, rng);
  for (int j : j0) spec.fx_coeffs[j].clear();

  const int n_k0 = static_cast<int>(std::ceil(sp.p0k * config.K));
  const auto k0 = sample_indices(config.K, n_k0, rng);
  std::vector<bool> in_k0(config.K, false);
  for (int k : k0) {
    spec.fh_coeffs[k].clear();
    in_k0[k] = true;
  }

  const int n_b0 =
      static_cast<int>(std::ceil(sp.p0beta * config.K * config.J));
  for (int flat : sample_indices(config.K * config.J, n_b0, rng))
    spec.beta(flat / config.J, flat % config.J) = 0.0;

  const int n_dse = static_cast<int>(std::ceil(sp.p_dse * config.J));
  if (n_dse > 0) {
    Rng sub(Rng::derive(rng.next_u64(), 0xd5eULL));
    auto pick = sample_indices(n_j0, n_dse, sub);
    for (int idx : pick) {
      const int j = j0[idx];
      spec.j_dse.push_back(j);
      for (int k = 0; k < config.K; ++k)
        if (!in_k0[k]) spec.beta(k, j) = 0.0;
    }
  }
  return spec;
}

SemSpec build_lowdim_sem() {
  SemSpec spec;
  spec.J = spec.K = spec.L = 4;
  spec.d_max = 2;
  spec.gamma = Eigen::MatrixXd::Identity(4, 4);

  spec.fh_coeffs = {{}, {}, {-0.28, 1.29}, {1.54, 0.59}};
  spec.fx_coeffs = {{}, {}, {-0.92}, {1.24, -1.48}};

  // Fixed loading pattern giving each x_j a distinct route to y:
  //   x_1 via f_{h_4} only, x_2 none, x_3 via f_{h_3} and f_{x_3},
  //   x_4 via f_{x_4} only.
  spec.beta.setZero(4, 4);
  spec.beta(0, 0) = 0.62;
  spec.beta(3, 0) = -1.31;
  spec.beta(0, 1) = 0.74;
  spec.beta(1, 1) = -0.43;
  spec.beta(0, 2) = -0.29;
  spec.beta(2, 2) = 1.17;
  spec.beta(0, 3) = 0.95;
  spec.beta(1, 3) = 0.55;
  return spec;
}

Dataset simulate(const SemSpec& spec, int n, Rng& rng, std::uint64_t seed_tag) {
  if (n < 2) throw std::invalid_argument("simulate: need n >= 2");
  const int J = spec.J, K = spec.K, L = spec.L;

  Dataset ds;
  ds.seed = seed_tag;
  ds.Y.resize(n);
  for (int i = 0; i < n; ++i) ds.Y(i) = spec.sigma_y * rng.normal();

  ds.C_true.resize(n, L);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < L; ++l) ds.C_true(i, l) = spec.sigma_c * rng.normal();

  Eigen::MatrixXd h_noise = Eigen::MatrixXd::Zero(n, K);
  if (spec.sigma_h > 0.0)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < K; ++k) h_noise(i, k) = spec.sigma_h * rng.normal();

  Eigen::MatrixXd x_noise(n, J);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < J; ++j) x_noise(i, j) = spec.sigma_x * rng.normal();

  Eigen::MatrixXd fh(n, K), fx(n, J);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) fh(i, k) = poly_eval(spec.fh_coeffs[k], ds.Y(i));
    for (int j = 0; j < J; ++j) fx(i, j) = poly_eval(spec.fx_coeffs[j], ds.Y(i));
  }

  ds.H_true = fh + ds.C_true * spec.gamma + h_noise;
  ds.X = fx + ds.H_true * spec.beta + x_noise;

  // Generation-time reconstruction check: X must equal the structural
  // equations applied to Y, H_true and the noise draws.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < J; ++j) {
      double v = poly_eval(spec.fx_coeffs[j], ds.Y(i)) + x_noise(i, j);
      for (int k = 0; k < K; ++k) v += spec.beta(k, j) * ds.H_true(i, k);
      const double scale = std::max(1.0, std::abs(ds.X(i, j)));
      if (std::abs(v - ds.X(i, j)) > 1e-10 * scale)
        throw std::logic_error("simulate: reconstruction check failed");
    }
  return ds;
}

void Dataset::write_csv(std::ostream& os) const {
  os << "y";
  for (int j = 0; j < X.cols(); ++j) os << ",x" << (j + 1);
  os << "\n";
  os.precision(17);
  for (int i = 0; i < X.rows(); ++i) {
    os << Y(i);
    for (int j = 0; j < X.cols(); ++j) os << "," << X(i, j);
    os << "\n";
  }
}

namespace {
using nlohmann::json;

json poly_list(const std::vector<std::vector<double>>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back(r);
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  return m;
}
}  // namespace

std::string SemSpec::to_json() const {
  json j;
  j["J"] = J;
  j["K"] = K;
  j["L"] = L;
  j["beta"] = matrix_to_json(beta);
  j["gamma"] = matrix_to_json(gamma);
  j["fx_coeffs"] = poly_list(fx_coeffs);
  j["fh_coeffs"] = poly_list(fh_coeffs);
  j["sigma_y"] = sigma_y;
  j["sigma_c"] = sigma_c;
  j["sigma_x"] = sigma_x;
  j["sigma_h"] = sigma_h;
  j["d_max"] = d_max;
  j["sparsity"] = {{"p0j", sparsity.p0j},
                   {"p0k", sparsity.p0k},
                   {"p0beta", sparsity.p0beta},
                   {"p_dse", sparsity.p_dse}};
  j["j_dse"] = j_dse;
  return j.dump(2);
}

SemSpec SemSpec::from_json(const std::string& text) {
  const json j = json::parse(text);
  SemSpec spec;
  spec.J = j.at("J").get<int>();
  spec.K = j.at("K").get<int>();
  spec.L = j.at("L").get<int>();
  spec.beta = matrix_from_json(j.at("beta"));
  spec.gamma = matrix_from_json(j.at("gamma"));
  for (const auto& row : j.at("fx_coeffs"))
    spec.fx_coeffs.push_back(row.get<std::vector<double>>());
  for (const auto& row : j.at("fh_coeffs"))
    spec.fh_coeffs.push_back(row.get<std::vector<double>>());
  spec.sigma_y = j.at("sigma_y").get<double>();
  spec.sigma_c = j.at("sigma_c").get<double>();
  spec.sigma_x = j.at("sigma_x").get<double>();
  spec.sigma_h = j.value("sigma_h", 0.0);
  spec.d_max = j.at("d_max").get<int>();
  const auto& sp = j.at("sparsity");
  spec.sparsity = {sp.at("p0j").get<double>(), sp.at("p0k").get<double>(),
                   sp.at("p0beta").get<double>(), sp.at("p_dse").get<double>()};
  spec.j_dse = j.value("j_dse", std::vector<int>{});
  return spec;
}

}  // namespace sva
