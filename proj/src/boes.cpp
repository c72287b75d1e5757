// SPDX-License-Identifier: Apache-2.0
#include "evoboss/boes.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "evoboss/acquisition.hpp"
#include "evoboss/errors.hpp"
#include "evoboss/rng.hpp"

namespace evoboss {

std::string to_string(StoreKind kind) {
  switch (kind) {
    case StoreKind::Embedding: return "embedding";
    case StoreKind::OneHot: return "onehot";
    case StoreKind::Synthetic: return "synthetic";
  }
  return "embedding";
}

StoreKind parse_store_kind(const std::string& text) {
  if (text == "embedding") return StoreKind::Embedding;
  if (text == "onehot") return StoreKind::OneHot;
  if (text == "synthetic") return StoreKind::Synthetic;
  throw std::invalid_argument("unknown store kind: " + text);
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = "boes";
  j["budget"] = budget;
  j["start"] = start.word();
  j["kernel"] = to_string(kernel_family);
  j["store_kind"] = to_string(store_kind);
  j["batch"] = batch;
  j["init"] = init_random > 0 ? "random:" + std::to_string(init_random) : std::string("start_only");
  j["fit_objective"] = to_string(fit_objective);
  j["warm_start"] = warm_start;
  j["starts"] = starts;
  j["rho_end"] = rho_end;
  j["seed"] = seed;
  if (stop_at) j["stop_at"] = *stop_at;
  return j;
}

namespace {

// Observations plus the raw distances from each observation to every store
// row; the distances do not depend on theta, so each row is computed once.
class ObservationSet {
 public:
  explicit ObservationSet(const EmbeddingStore& store, int capacity)
      : store_(store), distances_(capacity, static_cast<Eigen::Index>(store.count())) {}

  void add(std::size_t row, double y) {
    Eigen::VectorXd e = store_.row_vector(row);
    const auto t = static_cast<Eigen::Index>(rows_.size());
    for (std::size_t c = 0; c < store_.count(); ++c) {
      auto other = store_.row(c);
      double sq = 0.0;
      for (int j = 0; j < store_.dim(); ++j) {
        double diff = e[j] - static_cast<double>(other[static_cast<std::size_t>(j)]);
        sq += diff * diff;
      }
      distances_(t, static_cast<Eigen::Index>(c)) = std::sqrt(sq);
    }
    rows_.push_back(row);
    y_.push_back(y);
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(rows_.size()); }
  Eigen::MatrixXd inputs() const { return store_.gather(rows_); }
  Eigen::VectorXd targets() const { return Eigen::Map<const Eigen::VectorXd>(y_.data(), size()); }
  auto distances() const { return distances_.topRows(size()); }

 private:
  const EmbeddingStore& store_;
  Eigen::MatrixXd distances_;
  std::vector<std::size_t> rows_;
  std::vector<double> y_;
};

}  // namespace

RunTrace run_boes(const RunConfig& config, const Landscape& landscape, const EmbeddingStore& store) {
  if (config.budget < 1) throw std::invalid_argument("budget must be positive");
  if (config.batch < 1) throw std::invalid_argument("batch must be positive");
  if (config.init_random < 0) throw std::invalid_argument("init_random must be non-negative");
  if (store.count() == 0) throw std::invalid_argument("embedding store is empty");
  if (config.start.length() != landscape.n()) throw std::invalid_argument("start length does not match landscape");

  const std::size_t start_row = store.row_of(config.start);
  const int budget = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.budget), store.count()));

  ScreeningSession session(landscape, budget);
  session.trace().config = config.to_json();
  session.trace().config["landscape"] = landscape.name();
  session.trace().seed = config.seed;

  ObservationSet observations(store, budget);
  std::vector<bool> screened(store.count(), false);
  auto screen_row = [&](std::size_t row, std::optional<double> theta) {
    double y = session.screen(store.variant(row), theta);
    screened[row] = true;
    observations.add(row, y);
  };

  screen_row(start_row, std::nullopt);

  if (config.init_random > 0 && !session.exhausted()) {
    Rng rng(config.seed);
    std::vector<std::size_t> pool;
    pool.reserve(store.count() - 1);
    for (std::size_t r = 0; r < store.count(); ++r) {
      if (r != start_row) pool.push_back(r);
    }
    auto k = std::min<std::size_t>({static_cast<std::size_t>(config.init_random), pool.size(),
                                    static_cast<std::size_t>(session.remaining())});
    // Partial Fisher-Yates: the first k slots become a uniform ordered sample.
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      screen_row(pool[i], std::nullopt);
    }
  }

  std::vector<std::size_t> candidates(store.count());
  std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  const LengthScalePrior prior = LengthScalePrior::for_dimension(store.dim());

  FitOptions options;
  options.family = config.kernel_family;
  options.objective = config.fit_objective;
  options.starts = config.starts;
  options.rho_end = config.rho_end;

  auto reached_target = [&] { return config.stop_at && session.best() >= *config.stop_at; };
  std::optional<double> previous_theta;
  while (!session.exhausted() && session.count() < static_cast<int>(store.count()) && !reached_target()) {
    options.extra_start = config.warm_start ? previous_theta : std::nullopt;
    FittedGP gp = fit(observations.inputs(), observations.targets(), prior, options);
    previous_theta = gp.theta();

    Eigen::VectorXd mean, variance;
    gp.posterior_from_distances(observations.distances(), mean, variance);
    const double f_best = session.best();
    auto open = static_cast<std::size_t>(static_cast<int>(store.count()) - session.count());
    std::size_t q = std::min({static_cast<std::size_t>(config.batch),
                              static_cast<std::size_t>(session.remaining()), open});
    std::vector<std::size_t> chosen;
    if (q == 1) {
      chosen.push_back(select_from_posteriors(candidates, mean, variance, screened, f_best).chosen);
    } else {
      chosen = top_q_from_posteriors(candidates, mean, variance, screened, f_best, q);
    }
    for (std::size_t row : chosen) {
      screen_row(row, gp.theta());
      if (reached_target()) break;
    }
  }
  return session.take_trace();
}

}  // namespace evoboss
