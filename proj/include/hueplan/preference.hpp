#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hueplan/reward.hpp"
#include "hueplan/rng.hpp"

namespace hueplan {


enum class Choice : int { Indifferent = 0, Left = 1, Right = 2 };

/// Maps the wire encoding 0/1/2 to a Choice.
std::optional<Choice> choice_from_int(int value);

struct PreferenceParams {
  std::size_t sample_count = 100;
  /// Minimum perceivable difference.
  double delta = 0.01;
  /// Acquisition temperature rewarding distant sample pairs.
  double lambda = 500.0;
  std::size_t burn_in = 200;
  /// Chain steps between retained samples.
  std::size_t thin = 10;
  double proposal_sigma = 0.05;
};

/// A pairwise query over candidate indices.
struct Query {
  std::size_t left = 0;
  std::size_t right = 0;
};

/// One answered query, with the features it was judged on.
struct Comparison {
  std::size_t left = 0;
  std::size_t right = 0;
  FeatureVector left_features{};
  FeatureVector right_features{};
  Choice choice = Choice::Indifferent;
};

/// Probability of picking the option with reward `chosen` over `other`, with
/// perceivable-difference threshold delta.
double choice_probability(double chosen, double other, double delta);
/// Plain two-way softmax exp(chosen) / (exp(chosen) + exp(other)).
double softmax_probability(double chosen, double other);
/// Response likelihood for a query whose options have the given rewards.
double likelihood(Choice choice, double reward_left, double reward_right, double delta);
double log_likelihood(Choice choice, double reward_left, double reward_right, double delta);

/// Sample-based belief over unit-norm reward weights.
class PreferenceModel {
 public:
  /// Uniform samples on the unit hypersphere.
  static PreferenceModel prior(const PreferenceParams& params, Rng& rng);
  PreferenceModel(PreferenceParams params, std::vector<Weights> samples,
                  std::vector<Comparison> history);

  const PreferenceParams& params() const { return params_; }
  const std::vector<Weights>& samples() const { return samples_; }
  const std::vector<Comparison>& history() const { return history_; }

  Weights mean() const;
  /// mean() scaled to unit norm (or mean() itself when it vanishes).
  Weights mean_direction() const;

  /// Sum of response log-likelihoods over the history at `theta`.
  double log_likelihood(const Weights& theta) const;

  /// Returns a copy with every sample multiplied by `factor`.
  PreferenceModel scaled(double factor) const;

  bool answered(std::size_t a, std::size_t b) const;

 private:
  PreferenceParams params_;
  std::vector<Weights> samples_;
  std::vector<Comparison> history_;
};

Weights random_unit_weights(Rng& rng);
double norm(const Weights& w);
double cosine(const Weights& x, const Weights& y);

/// Appends `comparison` to the history and redraws the samples by
/// Metropolis-Hastings, starting from the previous sample mean.
PreferenceModel update_belief(const PreferenceModel& model, const Comparison& comparison, Rng& rng);

/// Gaussian KDE (isotropic, Scott's rule bandwidth) of `samples`, evaluated at each sample.
std::vector<double> kde_at_samples(std::span<const Weights> samples);

/// Query-by-disagreement over candidate feature vectors. Throws with fewer than 2 candidates.
Query acquire_query(const PreferenceModel& model, std::span<const FeatureVector> candidates);

struct RankedCandidate {
  std::size_t index = 0;
  double score = 0.0;
};

/// Scores by mean(W) . phi, descending; ties broken by id.
std::vector<RankedCandidate> rank_corpus(const PreferenceModel& model,
                                         std::span<const FeatureVector> candidates,
                                         std::span<const std::string> ids);

/// Answers a query, or nullopt to abort the session.
using ResponseSource = std::function<std::optional<Choice>(const Query&)>;

/// Runs `rounds` acquire -> respond -> update iterations. An aborted source
/// returns the model as trained so far.
PreferenceModel teach_loop(PreferenceModel model, std::span<const FeatureVector> candidates,
                           std::size_t rounds, const ResponseSource& respond, Rng& rng);

/// Answers queries from hidden weights. Noiseless mode picks the higher reward
/// and reports indifference inside delta; otherwise it samples the likelihood.
class SimulatedOracle {
 public:
  SimulatedOracle(Weights theta, std::vector<FeatureVector> candidates, bool noiseless,
                  double delta, std::uint64_t rng_seed);
  std::optional<Choice> operator()(const Query& q);

 private:
  Weights theta_;
  std::vector<FeatureVector> candidates_;
  bool noiseless_;
  double delta_;
  Rng rng_;
};

nlohmann::json model_to_json(const PreferenceModel& model);
PreferenceModel model_from_json(const nlohmann::json& doc);

}  // namespace hueplan
