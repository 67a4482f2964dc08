#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scoredyn/field_spec.hpp"
#include "scoredyn/mixture.hpp"
#include "scoredyn/ode.hpp"
#include "scoredyn/schedule.hpp"

namespace scoredyn::cli {

enum class Experiment { flow, langevin, pf_ode, loss_check, equilibria, basins, growth };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

struct ScheduleConfig {
  std::string kind = "geometric";
  double epsilon = 0.01;
  double T = 1.0;
  bool operator==(const ScheduleConfig&) const = default;
};

struct MeasureConfig {
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
  /// CSV file; relative paths resolve against the config file's directory.
  std::string csv;
  bool operator==(const MeasureConfig&) const = default;
};

struct PerturbationConfig {
  std::string kind = "zero";  // zero | constant | linear | radial_bump
  std::vector<double> vector;  // constant offset or bump centre
  std::vector<std::vector<double>> matrix;
  double radius = 1.0;
  double amplitude = 0.0;
  bool operator==(const PerturbationConfig&) const = default;
};

struct IntegratorConfig {
  std::string method = "dopri45";  // dopri45 | rk4
  double step = 1e-2;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  bool operator==(const IntegratorConfig&) const = default;
};

/// Numeric parameters; each experiment reads the subset it needs.
struct Params {
  // flow, pf-ode, langevin
  std::vector<double> x0;
  double t_end = 100.0;
  IntegratorConfig integrator;
  std::size_t record_stride = 1;
  // langevin
  std::size_t levels = 10;
  std::vector<double> level_list;
  std::size_t steps_per_level = 100;
  double step_scale = 1e-3;
  double noise_scale = 1.0;
  // loss-check
  std::size_t n_t = 100000;
  std::size_t n_data = 1;
  std::size_t n_noise = 1;
  std::size_t grid_nodes = 401;
  // equilibria, basins
  double k = 1.0;
  double grid_lo = -2.0;
  double grid_hi = 2.0;
  // growth
  std::vector<double> radius_factors{10.0, 100.0, 1000.0};
  std::size_t directions = 64;
  bool operator==(const Params&) const = default;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::flow;
  ModelConfig model;
  ScheduleConfig schedule;
  MeasureConfig measure;
  PerturbationConfig perturbation;
  Params params;
  std::string output = "out";
  std::uint64_t seed = 0;
  /// Directory of the config file; not serialized.
  std::string base_dir;

  bool operator==(const ExperimentConfig& o) const {
    return experiment == o.experiment && model.d == o.model.d && model.alpha == o.model.alpha &&
           model.sigma_eps == o.model.sigma_eps && model.sigma_T == o.model.sigma_T &&
           schedule == o.schedule && measure == o.measure && perturbation == o.perturbation &&
           params == o.params && output == o.output && seed == o.seed;
  }
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Throws InvalidArgs for unknown keys, wrong types and out-of-range values.
ExperimentConfig from_json(const nlohmann::json& j, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// Range checks that need no data; load_config calls it.
void validate(const ExperimentConfig& config);

Schedule make_schedule(const ExperimentConfig& config);
EmpiricalMeasure make_measure(const ExperimentConfig& config);
Perturbation make_perturbation(const ExperimentConfig& config);
StepControl make_step_control(const IntegratorConfig& config);
/// Explicit level list, or geometric levels from sigma_T down to sigma_eps.
std::vector<double> noise_levels(const ExperimentConfig& config);

}  // namespace scoredyn::cli
