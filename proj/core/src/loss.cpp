#include "scoredyn/loss.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "scoredyn/errors.hpp"
#include "scoredyn/random.hpp"
#include "scoredyn/special_functions.hpp"

namespace scoredyn {

namespace {

double gaussian_prefactor(int d) { return std::pow(2.0 * std::numbers::pi, -0.5 * d); }

bool uses_s_star(const FieldSpec& model) {
  return model.kind() == FieldSpec::Kind::s_star ||
         model.kind() == FieldSpec::Kind::s_star_plus_perturbation;
}

/// s_theta(x), reusing an already computed s*(x).
Vector evaluate_with(const FieldSpec& model, const ScoreField& field, const Vector& x,
                     const Vector& s_star) {
  switch (model.kind()) {
    case FieldSpec::Kind::s_star: return s_star;
    case FieldSpec::Kind::s_star_plus_perturbation: return s_star + model.perturbation()(x);
    default: return model.evaluate(field, x);
  }
}

/// s_theta(x) - s*(x).
Vector model_error(const FieldSpec& model, const ScoreField& field, const Vector& x) {
  switch (model.kind()) {
    case FieldSpec::Kind::s_star: return Vector::Zero(x.size());
    case FieldSpec::Kind::s_star_plus_perturbation: return model.perturbation()(x);
    default: return model.evaluate(field, x) - field.s_star(x);
  }
}

McEstimate summarize(const std::vector<double>& unit_means, std::size_t samples) {
  McEstimate out;
  out.samples = samples;
  const double n = static_cast<double>(unit_means.size());
  double sum = 0.0;
  for (double v : unit_means) sum += v;
  out.estimate = sum / n;
  if (unit_means.size() < 2) {
    out.std_error = std::numeric_limits<double>::infinity();
    return out;
  }
  double ss = 0.0;
  for (double v : unit_means) ss += (v - out.estimate) * (v - out.estimate);
  out.std_error = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

void check_model_dimension(const FieldSpec& model, const ScoreField& field) {
  if (model.kind() == FieldSpec::Kind::s_star_plus_perturbation) {
    const Perturbation& e = model.perturbation();
    if (!e.is_zero() && e.dimension() != field.dimension())
      throw InvalidArgs("loss: perturbation dimension does not match the model");
  }
}

/// Evaluates one or two models on the same samples; returns unit means.
void run_objective(const ScoreField& field, const FieldSpec* models[2], std::size_t n_models,
                   const Schedule& schedule, const McSampling& sampling,
                   std::vector<double> means[2]) {
  sampling.validate();
  for (std::size_t m = 0; m < n_models; ++m) check_model_dimension(*models[m], field);
  const double eps = schedule.epsilon();
  const double T = schedule.T();
  const double alpha = field.config().alpha;
  const Eigen::Index d = field.dimension();
  const auto& measure = field.measure();
  bool need_s_star = false;
  for (std::size_t m = 0; m < n_models; ++m) need_s_star = need_s_star || uses_s_star(*models[m]);

  for (std::size_t m = 0; m < n_models; ++m) means[m].assign(sampling.n_t, 0.0);
  const std::size_t blocks = (sampling.n_t + sampling.block_size - 1) / sampling.block_size;
  const double per_unit = static_cast<double>(sampling.n_data * sampling.n_noise);

  parallel_for(blocks, sampling.parallelism, [&](std::size_t block) {
    Rng rng = make_stream(sampling.seed, block);
    std::uniform_real_distribution<double> time_dist(eps, T);
    std::discrete_distribution<std::size_t> data_dist(measure.weights().begin(),
                                                      measure.weights().end());
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector xi(d), x(d), s_star;
    const std::size_t first = block * sampling.block_size;
    const std::size_t last = std::min(sampling.n_t, first + sampling.block_size);
    for (std::size_t unit = first; unit < last; ++unit) {
      const double t = time_dist(rng);
      const double sigma = schedule.sigma(t);
      const double lambda = sampling.weighting ? sampling.weighting(t) : schedule.g_squared(t);
      const double scale = (T - eps) * lambda;
      const double model_factor = std::pow(sigma, -alpha);
      double acc[2] = {0.0, 0.0};
      for (std::size_t i = 0; i < sampling.n_data; ++i) {
        const Vector& datum = measure.point(data_dist(rng));
        for (std::size_t k = 0; k < sampling.n_noise; ++k) {
          for (Eigen::Index c = 0; c < d; ++c) xi[c] = normal(rng);
          x = datum + sigma * xi;
          if (need_s_star) s_star = field.s_star(x);
          for (std::size_t m = 0; m < n_models; ++m) {
            const Vector r = model_factor * evaluate_with(*models[m], field, x, s_star) + xi / sigma;
            acc[m] += scale * r.squaredNorm();
          }
        }
      }
      for (std::size_t m = 0; m < n_models; ++m) means[m][unit] = acc[m] / per_unit;
    }
  });
}

}  // namespace

double i1(const ScoreField& field, const Vector& x) {
  return gaussian_prefactor(field.dimension()) * field.lyapunov_denominator(x).value();
}

Vector i2(const ScoreField& field, const Vector& x) {
  return gaussian_prefactor(field.dimension()) *
         field.grad_big_l(field.config().lyapunov_shape(), x);
}

double i3_upper(const ScoreField& field, const Vector& x) {
  if (x.size() != field.dimension() || !x.allFinite())
    throw InvalidArgs("i3_upper: point must be finite with the model dimension");
  const auto& cfg = field.config();
  const auto& measure = field.measure();
  const double s = 0.5 * (cfg.d + 2.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < measure.size(); ++j) {
    const double r2 = (measure.point(j) - x).squaredNorm();
    if (r2 == 0.0 || measure.weight(j) == 0.0) continue;
    sum += measure.weight(j) * phi(PhiArgs{cfg.sigma_eps, cfg.sigma_T, s, 0.5 * r2}).value() * r2;
  }
  return gaussian_prefactor(cfg.d) * sum;
}

void McSampling::validate() const {
  if (n_t == 0 || n_data == 0 || n_noise == 0)
    throw InvalidArgs("mc_objective: sample counts must be positive");
  if (block_size == 0) throw InvalidArgs("mc_objective: block_size must be positive");
}

McEstimate mc_objective(const ScoreField& field, const FieldSpec& model, const Schedule& schedule,
                        const McSampling& sampling) {
  const FieldSpec* models[2] = {&model, nullptr};
  std::vector<double> means[2];
  run_objective(field, models, 1, schedule, sampling, means);
  return summarize(means[0], sampling.n_t * sampling.n_data * sampling.n_noise);
}

McDifference mc_objective_difference(const ScoreField& field, const FieldSpec& first,
                                     const FieldSpec& second, const Schedule& schedule,
                                     const McSampling& sampling) {
  const FieldSpec* models[2] = {&first, &second};
  std::vector<double> means[2];
  run_objective(field, models, 2, schedule, sampling, means);
  const std::size_t samples = sampling.n_t * sampling.n_data * sampling.n_noise;
  McDifference out;
  out.first = summarize(means[0], samples);
  out.second = summarize(means[1], samples);
  std::vector<double> diff(means[0].size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = means[0][i] - means[1][i];
  const McEstimate paired = summarize(diff, samples);
  out.delta = paired.estimate;
  out.std_error = paired.std_error;
  return out;
}

double weighted_l2_gap(const FieldSpec& model, const ScoreField& field, const Grid& grid) {
  if (grid.size() == 0) throw InvalidArgs("weighted_l2_gap: empty grid");
  if (grid.dimension() != field.dimension())
    throw InvalidArgs("weighted_l2_gap: grid dimension does not match the model");
  if (grid.dimension() > 3)
    throw InvalidArgs("weighted_l2_gap: grid quadrature is limited to d <= 3");
  check_model_dimension(model, field);
  if (model.kind() == FieldSpec::Kind::s_star) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vector x = grid.point(i);
    const double err2 = model_error(model, field, x).squaredNorm();
    if (err2 == 0.0) continue;
    sum += grid.trapezoid_weight(i) * field.lyapunov_denominator(x).value() * err2;
  }
  return gaussian_prefactor(field.dimension()) * sum;
}

McEstimate weighted_l2_gap_mc(const FieldSpec& model, const ScoreField& field, std::size_t samples,
                              std::uint64_t seed, Parallelism parallelism) {
  if (samples < 2) throw InvalidArgs("weighted_l2_gap_mc: at least two samples are required");
  check_model_dimension(model, field);
  const auto& measure = field.measure();
  const int d = field.dimension();
  const double sigma = field.config().sigma_T;
  const double log_gauss = -0.5 * d * std::log(2.0 * std::numbers::pi);
  const double log_proposal_norm = log_gauss - d * std::log(sigma);
  std::vector<double> values(samples, 0.0);
  const std::size_t block_size = 256;
  const std::size_t blocks = (samples + block_size - 1) / block_size;
  parallel_for(blocks, parallelism, [&](std::size_t block) {
    Rng rng = make_stream(seed, block);
    std::discrete_distribution<std::size_t> data_dist(measure.weights().begin(),
                                                      measure.weights().end());
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector x(d);
    const std::size_t first = block * block_size;
    const std::size_t last = std::min(samples, first + block_size);
    for (std::size_t i = first; i < last; ++i) {
      const Vector& datum = measure.point(data_dist(rng));
      for (int c = 0; c < d; ++c) x[c] = datum[c] + sigma * normal(rng);
      LogSumAccumulator q;
      for (std::size_t j = 0; j < measure.size(); ++j) {
        if (measure.weight(j) == 0.0) continue;
        q.add_log(std::log(measure.weight(j)) + log_proposal_norm -
                  0.5 * (x - measure.point(j)).squaredNorm() / (sigma * sigma));
      }
      const double err2 = model_error(model, field, x).squaredNorm();
      if (err2 == 0.0) continue;
      const double log_target = log_gauss + field.lyapunov_denominator(x).log();
      values[i] = std::exp(log_target - q.log()) * err2;
    }
  });
  return summarize(values, samples);
}

}  // namespace scoredyn
