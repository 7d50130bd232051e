#include "sva/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sva/fdr.hpp"

namespace sva {

namespace {

using nlohmann::json;

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

struct RepOutput {
  std::vector<MetricsReport> rows;               // one per method
  std::vector<Eigen::VectorXd> feature_pvalues;  // parallel to rows; empty if failed
};

SemSpec spec_for_rep(const ExperimentConfig& config, Rng& rng) {
  SemSpec spec = config.scenario == "lowdim" ? build_lowdim_sem()
                                             : build_sem(config.sem, rng);
  if (config.null_mode)
    for (auto& poly : spec.fx_coeffs) poly.clear();
  return spec;
}

RepOutput run_one_rep(const ExperimentConfig& config, int rep) {
  const std::uint64_t rep_seed = Rng::derive(config.seed, static_cast<std::uint64_t>(rep));
  RepOutput out;
  out.rows.resize(config.methods.size());
  out.feature_pvalues.resize(config.methods.size());
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    out.rows[i].method = method_name(config.methods[i]);
    out.rows[i].rep_index = rep;
  }

  try {
    Rng rng(rep_seed);
    const SemSpec spec = spec_for_rep(config, rng);
    const Dataset ds = simulate(spec, config.n, rng, rep_seed);
    const BasisModel basis =
        build_basis(ds.Y, config.basis_degree, config.basis_intercept);

    PaConfig pa = config.pa;
    pa.seed = Rng::derive(rep_seed, 0xA1);
    PaConfig pa_x = config.pa;
    pa_x.seed = Rng::derive(rep_seed, 0xA2);

    const bool needs_span =
        std::any_of(config.methods.begin(), config.methods.end(), [](Method m) {
          return m == Method::kSva || m == Method::kSvdr;
        });
    FactorizationResult span;
    if (needs_span) span = estimate_c_span(ds.X, ds.Y, basis, pa);

    for (std::size_t i = 0; i < config.methods.size(); ++i) {
      MetricsReport& row = out.rows[i];
      try {
        SurrogateSet set;
        switch (config.methods[i]) {
          case Method::kSva:
            set = sva_from_span(ds.X, span, pa, config.selector);
            break;
          case Method::kSvdr:
            set = svdr_from_span(span);
            break;
          case Method::kSvdx:
            set = build_surrogates_svdx(ds.X, ds.Y, pa_x);
            break;
          case Method::kVanilla:
            set = vanilla_surrogates(config.n);
            break;
        }
        const MethodFit fit_out = fit_method(ds.X, ds.Y, basis, set);

        if (config.methods[i] == Method::kSva)
          row.cnode_overlap_pct = set.source_factors.cols() > 0
                                      ? cca_overlap(ds.C_true, set.source_factors)
                                      : 0.0;
        row.hnode_overlap_pct =
            set.H_hat.cols() > 0 ? cca_overlap(ds.H_true, set.H_hat) : 0.0;
        row.r2_diff = r2_diff(ds.Y, ds.H_true, set.H_hat);
        row.fxj_mae = fxj_mae(spec.fx_coeffs, fit_out.fhat_coeffs,
                              config.basis_intercept, ds.Y);
        row.fxj_mae_median = median(std::vector<double>(
            row.fxj_mae.data(), row.fxj_mae.data() + row.fxj_mae.size()));
        row.ks_stat = ks_uniform(fit_out.pvalues).first;
        out.feature_pvalues[i] = fit_out.pvalues;
      } catch (const std::exception& e) {
        row.failed = true;
        row.failure = e.what();
      }
    }
  } catch (const std::exception& e) {
    for (auto& row : out.rows) {
      row.failed = true;
      row.failure = e.what();
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.M < 1 || config.n < 2)
    throw std::invalid_argument("run_experiment: need M >= 1 and n >= 2");

  std::vector<RepOutput> reps(config.M);
#pragma omp parallel for schedule(dynamic)
  for (int rep = 0; rep < config.M; ++rep) reps[rep] = run_one_rep(config, rep);

  ExperimentResult result;
  result.scenario = config.scenario;
  result.seed = config.seed;
  for (const auto& rep : reps)
    result.rows.insert(result.rows.end(), rep.rows.begin(), rep.rows.end());

  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    const std::string name = method_name(config.methods[i]);
    std::vector<const Eigen::VectorXd*> kept;
    for (const auto& rep : reps)
      if (rep.feature_pvalues[i].size() > 0) kept.push_back(&rep.feature_pvalues[i]);
    if (kept.empty()) continue;
    Eigen::MatrixXd stacked(static_cast<int>(kept.size()), kept[0]->size());
    for (std::size_t r = 0; r < kept.size(); ++r)
      stacked.row(static_cast<int>(r)) = kept[r]->transpose();
    result.method_pvalues[name] = stacked;
    result.nested[name] = nested_ks(stacked);
  }
  return result;
}

void write_results_csv(const ExperimentResult& result, std::ostream& os) {
  os.precision(17);
  os << "method,rep,cnode_overlap,hnode_overlap,r2_diff,fxj_mae_median,ks_stat,failed\n";
  for (const auto& row : result.rows) {
    os << row.method << ',' << row.rep_index << ',' << row.cnode_overlap_pct
       << ',' << row.hnode_overlap_pct << ',' << row.r2_diff << ','
       << row.fxj_mae_median << ',' << row.ks_stat << ','
       << (row.failed ? 1 : 0) << '\n';
  }
}

std::string summary_json(const ExperimentResult& result) {
  json per_method = json::object();
  std::map<std::string, std::map<std::string, std::vector<double>>> gathered;
  for (const auto& row : result.rows) {
    if (row.failed) continue;
    auto& bucket = gathered[row.method];
    if (!std::isnan(row.cnode_overlap_pct))
      bucket["cnode_overlap"].push_back(row.cnode_overlap_pct);
    bucket["hnode_overlap"].push_back(row.hnode_overlap_pct);
    bucket["r2_diff"].push_back(row.r2_diff);
    bucket["fxj_mae_median"].push_back(row.fxj_mae_median);
    bucket["ks_stat"].push_back(row.ks_stat);
  }
  for (const auto& [name, metrics] : gathered) {
    json entry = json::object();
    for (const auto& [metric, values] : metrics) {
      entry[metric] = {{"median", quantile(values, 0.5)},
                       {"q25", quantile(values, 0.25)},
                       {"q75", quantile(values, 0.75)}};
    }
    per_method[name] = entry;
  }

  json nested = json::object();
  for (const auto& [name, stat] : result.nested)
    nested[name] = {{"stat", stat.first}, {"pvalue", stat.second}};

  json failures = json::array();
  for (const auto& row : result.rows)
    if (row.failed)
      failures.push_back({{"method", row.method},
                          {"rep", row.rep_index},
                          {"error", row.failure}});

  json j;
  j["scenario"] = result.scenario;
  j["seed"] = result.seed;
  j["per_method"] = per_method;
  j["nested_ks"] = nested;
  j["failures"] = failures;
  return j.dump(2);
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  const fs::path dir(config.out_dir);

  std::ofstream csv(dir / "results.csv", std::ios::binary);
  if (!csv) throw std::ios_base::failure("cannot write " + (dir / "results.csv").string());
  write_results_csv(result, csv);

  std::ofstream js(dir / "summary.json", std::ios::binary);
  if (!js) throw std::ios_base::failure("cannot write " + (dir / "summary.json").string());
  js << summary_json(result) << '\n';
}

namespace {

json config_to_json_obj(const ExperimentConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["sem"] = {{"J", c.sem.J},
              {"K", c.sem.K},
              {"L", c.sem.L},
              {"d_max", c.sem.d_max},
              {"sigma_y", c.sem.sigma_y},
              {"sigma_c", c.sem.sigma_c},
              {"sigma_x", c.sem.sigma_x},
              {"sigma_h", c.sem.sigma_h},
              {"dense_gamma", c.sem.dense_gamma},
              {"sparsity",
               {{"p0j", c.sem.sparsity.p0j},
                {"p0k", c.sem.sparsity.p0k},
                {"p0beta", c.sem.sparsity.p0beta},
                {"p_dse", c.sem.sparsity.p_dse}}}};
  j["n"] = c.n;
  j["M"] = c.M;
  j["basis_degree"] = c.basis_degree;
  j["basis_intercept"] = c.basis_intercept;
  j["pa"] = {{"B", c.pa.B}, {"alpha", c.pa.alpha}};
  j["selector"] = {{"type", c.selector.selector == Selector::kLfdr ? "lfdr" : "qvalue"},
                   {"alpha", c.selector.alpha}};
  j["seed"] = c.seed;
  std::vector<std::string> names;
  for (Method m : c.methods) names.push_back(method_name(m));
  j["methods"] = names;
  j["null_mode"] = c.null_mode;
  j["out_dir"] = c.out_dir;
  return j;
}

ExperimentConfig config_from_json_obj(const json& j) {
  ExperimentConfig c;
  c.scenario = j.value("scenario", c.scenario);
  if (j.contains("sem")) {
    const auto& s = j.at("sem");
    c.sem.J = s.value("J", c.sem.J);
    c.sem.K = s.value("K", c.sem.K);
    c.sem.L = s.value("L", c.sem.L);
    c.sem.d_max = s.value("d_max", c.sem.d_max);
    c.sem.sigma_y = s.value("sigma_y", c.sem.sigma_y);
    c.sem.sigma_c = s.value("sigma_c", c.sem.sigma_c);
    c.sem.sigma_x = s.value("sigma_x", c.sem.sigma_x);
    c.sem.sigma_h = s.value("sigma_h", c.sem.sigma_h);
    c.sem.dense_gamma = s.value("dense_gamma", c.sem.dense_gamma);
    if (s.contains("sparsity")) {
      const auto& sp = s.at("sparsity");
      c.sem.sparsity.p0j = sp.value("p0j", 0.0);
      c.sem.sparsity.p0k = sp.value("p0k", 0.0);
      c.sem.sparsity.p0beta = sp.value("p0beta", 0.0);
      c.sem.sparsity.p_dse = sp.value("p_dse", 0.0);
    }
  }
  c.n = j.value("n", c.n);
  c.M = j.value("M", c.M);
  c.basis_degree = j.value("basis_degree", c.basis_degree);
  c.basis_intercept = j.value("basis_intercept", c.basis_intercept);
  if (j.contains("pa")) {
    c.pa.B = j.at("pa").value("B", c.pa.B);
    c.pa.alpha = j.at("pa").value("alpha", c.pa.alpha);
  }
  if (j.contains("selector")) {
    const std::string type = j.at("selector").value("type", "lfdr");
    c.selector.selector = type == "qvalue" ? Selector::kQvalue : Selector::kLfdr;
    c.selector.alpha =
        j.at("selector").value("alpha", c.selector.selector == Selector::kLfdr ? 0.5 : 0.1);
  }
  c.seed = j.value("seed", c.seed);
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& name : j.at("methods"))
      c.methods.push_back(method_from_name(name.get<std::string>()));
  }
  c.null_mode = j.value("null_mode", c.null_mode);
  c.out_dir = j.value("out_dir", c.out_dir);
  return c;
}

}  // namespace

std::string ExperimentConfig::to_json() const {
  return config_to_json_obj(*this).dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  return config_from_json_obj(json::parse(text));
}

std::string SweepSpec::to_json() const {
  json j;
  j["parameter"] = parameter;
  j["values"] = values;
  j["base"] = config_to_json_obj(base);
  return j.dump(2);
}

SweepSpec SweepSpec::from_json(const std::string& text) {
  const json j = json::parse(text);
  SweepSpec s;
  s.parameter = j.at("parameter").get<std::string>();
  s.values = j.at("values").get<std::vector<double>>();
  if (j.contains("base")) s.base = config_from_json_obj(j.at("base"));
  if (s.values.empty())
    throw std::invalid_argument("sweep: empty value list");
  return s;
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& base,
                                   const std::string& parameter, double value) {
  ExperimentConfig c = base;
  if (parameter == "J") {
    c.sem.J = static_cast<int>(value);
  } else if (parameter == "KJ") {
    c.sem.K = c.sem.L = static_cast<int>(value);
    c.sem.J = 10 * static_cast<int>(value);
  } else if (parameter == "n") {
    c.n = static_cast<int>(value);
  } else if (parameter == "d_max") {
    c.sem.d_max = static_cast<int>(value);
    c.basis_degree = static_cast<int>(value);
  } else if (parameter == "sigma_c") {
    c.sem.sigma_c = value;
  } else if (parameter == "sigma_x") {
    c.sem.sigma_x = value;
  } else if (parameter == "p0j") {
    c.sem.sparsity.p0j = value;
  } else if (parameter == "p0k") {
    c.sem.sparsity.p0k = value;
  } else if (parameter == "p0beta") {
    c.sem.sparsity.p0beta = value;
  } else if (parameter == "p0j_pdse") {
    c.sem.sparsity.p0j = value;
    c.sem.sparsity.p_dse = value * value;
  } else {
    throw std::invalid_argument("sweep: unknown parameter " + parameter);
  }
  return c;
}

SweepResult run_sweep(const SweepSpec& sweep) {
  if (sweep.values.empty())
    throw std::invalid_argument("run_sweep: empty value list");
  SweepResult out;
  for (double value : sweep.values) {
    try {
      const ExperimentConfig config =
          apply_sweep_value(sweep.base, sweep.parameter, value);
      out.runs.emplace_back(value, run_experiment(config));
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << sweep.parameter << "=" << value << ": " << e.what();
      out.skipped.push_back(msg.str());
    }
  }
  return out;
}

void write_sweep_csv(const SweepSpec& sweep, const SweepResult& result,
                     std::ostream& os) {
  os.precision(17);
  os << "parameter,value,method,rep,cnode_overlap,hnode_overlap,r2_diff,"
        "fxj_mae_median,ks_stat,failed\n";
  for (const auto& [value, run] : result.runs)
    for (const auto& row : run.rows) {
      os << sweep.parameter << ',' << value << ',' << row.method << ','
         << row.rep_index << ',' << row.cnode_overlap_pct << ','
         << row.hnode_overlap_pct << ',' << row.r2_diff << ','
         << row.fxj_mae_median << ',' << row.ks_stat << ','
         << (row.failed ? 1 : 0) << '\n';
    }
}

}  // namespace sva
