#include "hueplan/preference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "hueplan/error.hpp"

namespace hueplan {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double log_choice_probability(double chosen, double other, double delta) {
  return -softplus(delta + other - chosen);
}

Weights normalized(const Weights& w) {
  const double n = norm(w);
  if (n == 0.0) return w;
  Weights out{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) out[i] = w[i] / n;
  return out;
}

double squared_distance(const Weights& x, const Weights& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s;
}

}  // namespace

std::optional<Choice> choice_from_int(int value) {
  switch (value) {
    case 0: return Choice::Indifferent;
    case 1: return Choice::Left;
    case 2: return Choice::Right;
    default: return std::nullopt;
  }
}

double choice_probability(double chosen, double other, double delta) {
  return std::exp(log_choice_probability(chosen, other, delta));
}

double softmax_probability(double chosen, double other) {
  const double m = std::max(chosen, other);
  const double e1 = std::exp(chosen - m);
  const double e2 = std::exp(other - m);
  return e1 / (e1 + e2);
}

double log_likelihood(Choice choice, double reward_left, double reward_right, double delta) {
  switch (choice) {
    case Choice::Left: return log_choice_probability(reward_left, reward_right, delta);
    case Choice::Right: return log_choice_probability(reward_right, reward_left, delta);
    case Choice::Indifferent:
      if (delta <= 0.0) return -std::numeric_limits<double>::infinity();
      return std::log(std::expm1(2.0 * delta)) +
             log_choice_probability(reward_left, reward_right, delta) +
             log_choice_probability(reward_right, reward_left, delta);
  }
  return -std::numeric_limits<double>::infinity();
}

double likelihood(Choice choice, double reward_left, double reward_right, double delta) {
  return std::exp(log_likelihood(choice, reward_left, reward_right, delta));
}

// ---------------------------------------------------------------------------

double norm(const Weights& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return std::sqrt(s);
}

double cosine(const Weights& x, const Weights& y) {
  const double nx = norm(x);
  const double ny = norm(y);
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return dot(x, y) / (nx * ny);
}

Weights random_unit_weights(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Weights w{};
  do {
    for (auto& v : w) v = gauss(rng);
  } while (norm(w) < 1e-12);
  return normalized(w);
}

PreferenceModel::PreferenceModel(PreferenceParams params, std::vector<Weights> samples,
                                 std::vector<Comparison> history)
    : params_(params), samples_(std::move(samples)), history_(std::move(history)) {
  if (samples_.empty()) throw ValidationError("preference model needs at least one sample");
}

PreferenceModel PreferenceModel::prior(const PreferenceParams& params, Rng& rng) {
  std::vector<Weights> samples;
  samples.reserve(params.sample_count);
  for (std::size_t i = 0; i < params.sample_count; ++i) samples.push_back(random_unit_weights(rng));
  return PreferenceModel(params, std::move(samples), {});
}

Weights PreferenceModel::mean() const {
  Weights m{};
  for (const auto& w : samples_) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) m[i] += w[i];
  }
  for (auto& v : m) v /= static_cast<double>(samples_.size());
  return m;
}

Weights PreferenceModel::mean_direction() const { return normalized(mean()); }

double PreferenceModel::log_likelihood(const Weights& theta) const {
  double total = 0.0;
  for (const auto& c : history_) {
    total += hueplan::log_likelihood(c.choice, dot(theta, c.left_features),
                                     dot(theta, c.right_features), params_.delta);
  }
  return total;
}

PreferenceModel PreferenceModel::scaled(double factor) const {
  auto samples = samples_;
  for (auto& w : samples) {
    for (auto& v : w) v *= factor;
  }
  return PreferenceModel(params_, std::move(samples), history_);
}

bool PreferenceModel::answered(std::size_t a, std::size_t b) const {
  return std::any_of(history_.begin(), history_.end(), [&](const Comparison& c) {
    return (c.left == a && c.right == b) || (c.left == b && c.right == a);
  });
}

PreferenceModel update_belief(const PreferenceModel& model, const Comparison& comparison,
                              Rng& rng) {
  auto history = model.history();
  history.push_back(comparison);
  const PreferenceParams& params = model.params();
  PreferenceModel next(params, model.samples(), std::move(history));

  std::normal_distribution<double> gauss(0.0, params.proposal_sigma);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Weights current = next.mean_direction();
  if (norm(current) < 1e-9) current = model.samples().front();
  double current_ll = next.log_likelihood(current);

  auto step = [&] {
    Weights proposal = current;
    for (auto& v : proposal) v += gauss(rng);
    proposal = normalized(proposal);
    const double ll = next.log_likelihood(proposal);
    // Symmetric proposal on the sphere and a uniform prior: the ratio is the likelihood ratio.
    if (ll >= current_ll || unit(rng) < std::exp(ll - current_ll)) {
      current = proposal;
      current_ll = ll;
    }
  };

  for (std::size_t i = 0; i < params.burn_in; ++i) step();
  std::vector<Weights> samples;
  samples.reserve(params.sample_count);
  for (std::size_t s = 0; s < params.sample_count; ++s) {
    for (std::size_t i = 0; i < std::max<std::size_t>(1, params.thin); ++i) step();
    samples.push_back(current);
  }
  return PreferenceModel(params, std::move(samples), next.history());
}

std::vector<double> kde_at_samples(std::span<const Weights> samples) {
  const std::size_t n = samples.size();
  constexpr double d = static_cast<double>(kFeatureCount);
  double variance = 0.0;
  if (n > 1) {
    Weights mean{};
    for (const auto& w : samples) {
      for (std::size_t i = 0; i < kFeatureCount; ++i) mean[i] += w[i] / static_cast<double>(n);
    }
    for (const auto& w : samples) variance += squared_distance(w, mean);
    variance /= static_cast<double>(n - 1) * d;
  }
  const double scott = std::pow(static_cast<double>(n), -1.0 / (d + 4.0));
  const double h = std::max(scott * std::sqrt(variance), 1e-3);
  const double norm_const = std::pow(2.0 * std::numbers::pi * h * h, -d / 2.0);

  std::vector<double> density(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::exp(-squared_distance(samples[i], samples[j]) / (2.0 * h * h));
    density[i] = norm_const * s / static_cast<double>(n);
  }
  return density;
}

Query acquire_query(const PreferenceModel& model, std::span<const FeatureVector> candidates) {
  if (candidates.size() < 2) throw ValidationError("query acquisition needs at least 2 candidates");
  const auto& W = model.samples();
  const std::size_t m = W.size();

  // Candidate ordering under each sample, best first (ties by index).
  std::vector<std::vector<std::size_t>> order(m);
  for (std::size_t s = 0; s < m; ++s) {
    std::vector<double> score(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) score[c] = dot(W[s], candidates[c]);
    auto& o = order[s];
    o.resize(candidates.size());
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](std::size_t x, std::size_t y) { return score[x] > score[y]; });
  }
  auto make_query = [&](std::size_t i, std::size_t j) {
    const std::size_t left = order[i][0];
    const std::size_t right = order[j][0] != left ? order[j][0] : order[j][1];
    return Query{left, right};
  };

  if (m < 2) return make_query(0, 0);

  const auto density = kde_at_samples(W);
  struct Pair {
    std::size_t i, j;
    double score;
  };
  std::vector<Pair> pairs;
  pairs.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      pairs.push_back({i, j, density[i] * density[j] + model.params().lambda * std::sqrt(squared_distance(W[i], W[j]))});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.score > y.score; });

  for (const auto& p : pairs) {
    const Query q = make_query(p.i, p.j);
    if (!model.answered(q.left, q.right)) return q;
  }
  // Every sample pair leads to an answered query: walk down the top pair's orderings.
  const Pair& top = pairs.front();
  for (std::size_t a : order[top.i]) {
    for (std::size_t b : order[top.j]) {
      if (a != b && !model.answered(a, b)) return Query{a, b};
    }
  }
  return make_query(top.i, top.j);
}

std::vector<RankedCandidate> rank_corpus(const PreferenceModel& model,
                                         std::span<const FeatureVector> candidates,
                                         std::span<const std::string> ids) {
  if (ids.size() != candidates.size()) throw ValidationError("ranking ids and candidates differ in length");
  const Weights m = model.mean();
  std::vector<RankedCandidate> ranked;
  ranked.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) ranked.push_back({i, dot(m, candidates[i])});
  std::sort(ranked.begin(), ranked.end(), [&](const RankedCandidate& x, const RankedCandidate& y) {
    if (x.score != y.score) return x.score > y.score;
    return ids[x.index] < ids[y.index];
  });
  return ranked;
}

PreferenceModel teach_loop(PreferenceModel model, std::span<const FeatureVector> candidates,
                           std::size_t rounds, const ResponseSource& respond, Rng& rng) {
  for (std::size_t t = 0; t < rounds; ++t) {
    const Query q = acquire_query(model, candidates);
    const auto choice = respond(q);
    if (!choice) break;
    model = update_belief(model, Comparison{q.left, q.right, candidates[q.left], candidates[q.right], *choice}, rng);
  }
  return model;
}

SimulatedOracle::SimulatedOracle(Weights theta, std::vector<FeatureVector> candidates,
                                 bool noiseless, double delta, std::uint64_t rng_seed)
    : theta_(theta), candidates_(std::move(candidates)), noiseless_(noiseless), delta_(delta), rng_(rng_seed) {}

std::optional<Choice> SimulatedOracle::operator()(const Query& q) {
  const double rl = dot(theta_, candidates_.at(q.left));
  const double rr = dot(theta_, candidates_.at(q.right));
  if (noiseless_) {
    if (std::abs(rl - rr) < delta_) return Choice::Indifferent;
    return rl > rr ? Choice::Left : Choice::Right;
  }
  const double pl = likelihood(Choice::Left, rl, rr, delta_);
  const double pr = likelihood(Choice::Right, rl, rr, delta_);
  const double pi = likelihood(Choice::Indifferent, rl, rr, delta_);
  const double u = std::uniform_real_distribution<double>(0.0, pl + pr + pi)(rng_);
  if (u < pl) return Choice::Left;
  if (u < pl + pr) return Choice::Right;
  return Choice::Indifferent;
}

namespace {

nlohmann::json weights_json(const std::array<double, kFeatureCount>& w) {
  return nlohmann::json(std::vector<double>(w.begin(), w.end()));
}

std::array<double, kFeatureCount> weights_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != kFeatureCount) {
    throw ValidationError("weight vectors must have " + std::to_string(kFeatureCount) + " entries");
  }
  std::array<double, kFeatureCount> w{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) w[i] = j[i].get<double>();
  return w;
}

}  // namespace

nlohmann::json model_to_json(const PreferenceModel& model) {
  const auto& p = model.params();
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& w : model.samples()) samples.push_back(weights_json(w));
  nlohmann::json history = nlohmann::json::array();
  for (const auto& c : model.history()) {
    history.push_back({{"left", c.left},
                       {"right", c.right},
                       {"left_features", weights_json(c.left_features)},
                       {"right_features", weights_json(c.right_features)},
                       {"choice", static_cast<int>(c.choice)}});
  }
  return {{"params",
           {{"sample_count", p.sample_count},
            {"delta", p.delta},
            {"lambda", p.lambda},
            {"burn_in", p.burn_in},
            {"thin", p.thin},
            {"proposal_sigma", p.proposal_sigma}}},
          {"samples", samples},
          {"history", history}};
}

PreferenceModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("samples")) throw ValidationError("model document lacks samples");
  PreferenceParams p;
  if (doc.contains("params")) {
    const auto& j = doc["params"];
    p.sample_count = j.value("sample_count", p.sample_count);
    p.delta = j.value("delta", p.delta);
    p.lambda = j.value("lambda", p.lambda);
    p.burn_in = j.value("burn_in", p.burn_in);
    p.thin = j.value("thin", p.thin);
    p.proposal_sigma = j.value("proposal_sigma", p.proposal_sigma);
  }
  std::vector<Weights> samples;
  for (const auto& s : doc["samples"]) samples.push_back(weights_from(s));
  std::vector<Comparison> history;
  if (doc.contains("history")) {
    for (const auto& h : doc["history"]) {
      const auto choice = choice_from_int(h.at("choice").get<int>());
      if (!choice) throw ValidationError("history entry has an invalid choice");
      history.push_back({h.at("left").get<std::size_t>(), h.at("right").get<std::size_t>(),
                         weights_from(h.at("left_features")), weights_from(h.at("right_features")), *choice});
    }
  }
  return PreferenceModel(p, std::move(samples), std::move(history));
}

}  // namespace hueplan
