#include "scoredyn_cli/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "scoredyn/errors.hpp"
#include "scoredyn_cli/measure_io.hpp"

namespace scoredyn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Typed field access that remembers which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidArgs(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgs(where_ + "." + key + ": " + e.what());
    }
  }

  void count(const char* key, std::size_t& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw InvalidArgs(where_ + "." + key + ": expected a non-negative integer");
    out = v.get<std::size_t>();
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw InvalidArgs("unknown key " + where_ + "." + item.key());
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgs(message);
}

bool finite_positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::flow: return "flow";
    case Experiment::langevin: return "langevin";
    case Experiment::pf_ode: return "pf-ode";
    case Experiment::loss_check: return "loss-check";
    case Experiment::equilibria: return "equilibria";
    case Experiment::basins: return "basins";
    case Experiment::growth: return "growth";
  }
  return "flow";
}

Experiment experiment_from_string(const std::string& name) {
  for (Experiment e : {Experiment::flow, Experiment::langevin, Experiment::pf_ode,
                       Experiment::loss_check, Experiment::equilibria, Experiment::basins,
                       Experiment::growth})
    if (to_string(e) == name) return e;
  throw InvalidArgs("unknown experiment '" + name + "'");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["model"] = {{"d", c.model.d},
                {"alpha", c.model.alpha},
                {"sigma_eps", c.model.sigma_eps},
                {"sigma_T", c.model.sigma_T}};
  j["schedule"] = {{"kind", c.schedule.kind}, {"epsilon", c.schedule.epsilon}, {"T", c.schedule.T}};
  json m = json::object();
  if (!c.measure.csv.empty()) {
    m["csv"] = c.measure.csv;
  } else {
    m["points"] = c.measure.points;
    if (!c.measure.weights.empty()) m["weights"] = c.measure.weights;
  }
  j["measure"] = m;
  json p = {{"kind", c.perturbation.kind}};
  if (!c.perturbation.vector.empty()) p["vector"] = c.perturbation.vector;
  if (!c.perturbation.matrix.empty()) p["matrix"] = c.perturbation.matrix;
  if (c.perturbation.kind == "radial_bump") {
    p["radius"] = c.perturbation.radius;
    p["amplitude"] = c.perturbation.amplitude;
  }
  j["perturbation"] = p;
  const Params& q = c.params;
  j["params"] = {
      {"x0", q.x0},
      {"t_end", q.t_end},
      {"integrator",
       {{"method", q.integrator.method},
        {"step", q.integrator.step},
        {"rel_tol", q.integrator.rel_tol},
        {"abs_tol", q.integrator.abs_tol}}},
      {"record_stride", q.record_stride},
      {"levels", q.levels},
      {"level_list", q.level_list},
      {"steps_per_level", q.steps_per_level},
      {"step_scale", q.step_scale},
      {"noise_scale", q.noise_scale},
      {"n_t", q.n_t},
      {"n_data", q.n_data},
      {"n_noise", q.n_noise},
      {"grid_nodes", q.grid_nodes},
      {"k", q.k},
      {"grid_lo", q.grid_lo},
      {"grid_hi", q.grid_hi},
      {"radius_factors", q.radius_factors},
      {"directions", q.directions},
  };
  return j;
}

ExperimentConfig from_json(const json& j, const std::string& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  Reader top(j, "config");
  std::string experiment;
  top.get("experiment", experiment);
  require(!experiment.empty(), "config.experiment is required");
  c.experiment = experiment_from_string(experiment);
  top.get("seed", c.seed);
  top.get("output", c.output);

  const json* model = top.child("model");
  require(model != nullptr, "config.model is required");
  Reader rm(*model, "model");
  rm.get("d", c.model.d);
  rm.get("alpha", c.model.alpha);
  rm.get("sigma_eps", c.model.sigma_eps);
  rm.get("sigma_T", c.model.sigma_T);
  rm.finish();

  if (const json* s = top.child("schedule")) {
    Reader rs(*s, "schedule");
    rs.get("kind", c.schedule.kind);
    rs.get("epsilon", c.schedule.epsilon);
    rs.get("T", c.schedule.T);
    rs.finish();
  }

  const json* measure = top.child("measure");
  require(measure != nullptr, "config.measure is required");
  Reader rmeas(*measure, "measure");
  rmeas.get("points", c.measure.points);
  rmeas.get("weights", c.measure.weights);
  rmeas.get("csv", c.measure.csv);
  rmeas.finish();

  if (const json* p = top.child("perturbation")) {
    Reader rp(*p, "perturbation");
    rp.get("kind", c.perturbation.kind);
    rp.get("vector", c.perturbation.vector);
    rp.get("matrix", c.perturbation.matrix);
    rp.get("radius", c.perturbation.radius);
    rp.get("amplitude", c.perturbation.amplitude);
    rp.finish();
  }

  if (const json* p = top.child("params")) {
    Params& q = c.params;
    Reader rq(*p, "params");
    rq.get("x0", q.x0);
    rq.get("t_end", q.t_end);
    if (const json* integ = rq.child("integrator")) {
      Reader ri(*integ, "params.integrator");
      ri.get("method", q.integrator.method);
      ri.get("step", q.integrator.step);
      ri.get("rel_tol", q.integrator.rel_tol);
      ri.get("abs_tol", q.integrator.abs_tol);
      ri.finish();
    }
    rq.count("record_stride", q.record_stride);
    rq.count("levels", q.levels);
    rq.get("level_list", q.level_list);
    rq.count("steps_per_level", q.steps_per_level);
    rq.get("step_scale", q.step_scale);
    rq.get("noise_scale", q.noise_scale);
    rq.count("n_t", q.n_t);
    rq.count("n_data", q.n_data);
    rq.count("n_noise", q.n_noise);
    rq.count("grid_nodes", q.grid_nodes);
    rq.get("k", q.k);
    rq.get("grid_lo", q.grid_lo);
    rq.get("grid_hi", q.grid_hi);
    rq.get("radius_factors", q.radius_factors);
    rq.count("directions", q.directions);
    rq.finish();
  }
  top.finish();
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgs("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  const fs::path parent = fs::path(path).parent_path();
  return from_json(j, parent.empty() ? std::string(".") : parent.string());
}

void validate(const ExperimentConfig& c) {
  c.model.validate();
  const int d = c.model.d;
  const auto dim = static_cast<std::size_t>(d);
  require(c.schedule.kind == "geometric", "schedule.kind must be 'geometric'");
  require(finite_positive(c.schedule.epsilon) && c.schedule.T > c.schedule.epsilon &&
              std::isfinite(c.schedule.T),
          "schedule requires 0 < epsilon < T");

  const bool inline_points = !c.measure.points.empty();
  require(inline_points != !c.measure.csv.empty(),
          "measure needs exactly one of 'points' or 'csv'");
  if (!c.measure.csv.empty()) {
    fs::path p(c.measure.csv);
    if (p.is_relative()) p = fs::path(c.base_dir) / p;
    require(fs::exists(p), "measure.csv: file not found: " + p.string());
  }
  if (inline_points) {
    for (const auto& pt : c.measure.points)
      require(pt.size() == dim, "measure.points: every point needs d coordinates");
    require(c.measure.weights.empty() || c.measure.weights.size() == c.measure.points.size(),
            "measure.weights: one weight per point");
  }

  const auto& pc = c.perturbation;
  if (pc.kind == "zero") {
  } else if (pc.kind == "constant") {
    require(pc.vector.size() == dim, "perturbation.vector needs d entries");
  } else if (pc.kind == "linear") {
    require(pc.matrix.size() == dim, "perturbation.matrix must be d x d");
    for (const auto& row : pc.matrix) require(row.size() == dim, "perturbation.matrix must be d x d");
  } else if (pc.kind == "radial_bump") {
    require(pc.vector.size() == dim, "perturbation.vector (bump centre) needs d entries");
    require(finite_positive(pc.radius), "perturbation.radius must be positive");
    require(std::isfinite(pc.amplitude), "perturbation.amplitude must be finite");
  } else {
    throw InvalidArgs("perturbation.kind must be zero, constant, linear or radial_bump");
  }

  const Params& q = c.params;
  require(q.x0.empty() || q.x0.size() == dim, "params.x0 needs d entries");
  require(finite_positive(q.t_end), "params.t_end must be positive");
  require(q.integrator.method == "dopri45" || q.integrator.method == "rk4",
          "params.integrator.method must be dopri45 or rk4");
  make_step_control(q.integrator).validate();
  require(q.record_stride >= 1, "params.record_stride must be >= 1");
  require(q.levels >= 1, "params.levels must be >= 1");
  require(q.steps_per_level >= 1, "params.steps_per_level must be >= 1");
  require(finite_positive(q.step_scale), "params.step_scale must be positive");
  require(q.noise_scale >= 0.0 && std::isfinite(q.noise_scale), "params.noise_scale must be >= 0");
  require(q.n_t >= 2 && q.n_data >= 1 && q.n_noise >= 1,
          "params.n_t must be >= 2 and n_data, n_noise >= 1");
  require(q.grid_nodes >= 2, "params.grid_nodes must be >= 2");
  require(q.grid_lo < q.grid_hi, "params.grid_lo must be below grid_hi");
  require(!q.radius_factors.empty(), "params.radius_factors must not be empty");
  for (double r : q.radius_factors) require(finite_positive(r), "params.radius_factors must be positive");
  require(q.directions >= 1, "params.directions must be >= 1");
  for (std::size_t i = 0; i < q.level_list.size(); ++i) {
    require(q.level_list[i] >= c.model.sigma_eps && q.level_list[i] <= c.model.sigma_T,
            "params.level_list must lie in [sigma_eps, sigma_T]");
    require(i == 0 || q.level_list[i] < q.level_list[i - 1], "params.level_list must decrease");
  }

  if (c.experiment == Experiment::equilibria || c.experiment == Experiment::basins) {
    require(c.model.alpha > -d, "equilibria and basins require alpha > -d");
    require(q.k > 0.0 && q.k < c.model.k_bound(),
            "params.k must lie in (0, " + std::to_string(c.model.k_bound()) + ")");
  }
  if (c.experiment == Experiment::loss_check) require(d <= 3, "loss-check grid quadrature needs d <= 3");
  if (c.experiment == Experiment::basins) require(d <= 2, "basins grids are limited to d <= 2");
}

Schedule make_schedule(const ExperimentConfig& c) {
  return Schedule::geometric(c.schedule.epsilon, c.schedule.T, c.model.sigma_eps, c.model.sigma_T);
}

EmpiricalMeasure make_measure(const ExperimentConfig& c) {
  if (!c.measure.csv.empty()) {
    fs::path p(c.measure.csv);
    if (p.is_relative()) p = fs::path(c.base_dir) / p;
    return load_measure_csv(p.string(), c.model.d);
  }
  return make_measure(c.measure.points, c.measure.weights, c.model.d);
}

Perturbation make_perturbation(const ExperimentConfig& c) {
  const auto& pc = c.perturbation;
  auto vec = [](const std::vector<double>& v) {
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  if (pc.kind == "constant") return Perturbation::constant(vec(pc.vector));
  if (pc.kind == "linear") {
    const auto n = static_cast<Eigen::Index>(pc.matrix.size());
    Matrix A(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index k = 0; k < n; ++k)
        A(r, k) = pc.matrix[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
    return Perturbation::linear(A);
  }
  if (pc.kind == "radial_bump") return Perturbation::radial_bump(vec(pc.vector), pc.radius, pc.amplitude);
  return Perturbation::zero();
}

StepControl make_step_control(const IntegratorConfig& config) {
  StepControl ctl;
  ctl.method = config.method == "rk4" ? StepMethod::rk4 : StepMethod::dopri45;
  ctl.step = config.step;
  ctl.rel_tol = config.rel_tol;
  ctl.abs_tol = config.abs_tol;
  return ctl;
}

std::vector<double> noise_levels(const ExperimentConfig& c) {
  if (!c.params.level_list.empty()) return c.params.level_list;
  return geometric_levels(c.model.sigma_T, c.model.sigma_eps, static_cast<int>(c.params.levels));
}

}  // namespace scoredyn::cli
