#pragma once

// Empirical exploration of which weighted majority functions are the most
// noise sensitive at fixed (n, eps). Integer weights only; candidates are
// canonicalized to sorted positive weight vectors (sign flips and coordinate
// permutations do not change p_eps).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltfnoise/core.hpp"
#include "ltfnoise/exact.hpp"

namespace ltfnoise {

inline constexpr const char* kOpenQuestionNote =
    "open: whether simple majority is asymptotically the most noise sensitive weighted majority "
    "(eps -> 0, n eps -> infinity), i.e. whether sqrt(2/pi) can be replaced by 2/pi, is "
    "unresolved; a finite search is only suggestive";

// Thrown when a search finds p > 2 sqrt(eps) for eps <= 1/2. That would
// contradict a proven bound, so it signals a bug.
struct CounterexampleFound : std::runtime_error {
  CounterexampleFound(const std::string& what, std::vector<std::int64_t> weights, double t,
                      double p)
      : std::runtime_error(what), weights(std::move(weights)), threshold(t), p(p) {}
  std::vector<std::int64_t> weights;
  double threshold;
  double p;
};

struct Candidate {
  std::vector<std::int64_t> weights;
  double threshold = 0.0;
  double p = 0.0;
  double ci_low = 0.0;   // equal to p for exact objectives
  double ci_high = 0.0;
};

enum class SearchObjective { exact, montecarlo };

struct SearchReport {
  std::string method;   // "exhaustive" or "random-restart local search"
  std::string objective = "exact";
  std::size_t n = 0;
  double epsilon = 0.0;
  Candidate best;
  std::vector<Candidate> near_optimal;   // within 1e-12 of best (exhaustive only)
  std::vector<Candidate> candidates;     // every evaluated candidate (exhaustive only)
  std::uint64_t evaluations = 0;
  double baseline_simple_majority_p = 0.0;
  bool baseline_exact = true;
  bool exceeds_baseline = false;          // some candidate strictly above baseline (> 1e-12)
  bool bound_applies = false;             // eps <= 1/2
  double bound_2sqrt = 0.0;
  double sheppard = 0.0;
  double ratio_to_sheppard = 0.0;
  std::string open_question = kOpenQuestionNote;
  // Local search: objective value after each iteration, per restart.
  std::vector<std::vector<double>> trajectories;
};

struct ExhaustiveOptions {
  bool include_thresholds = false;   // t in {k/2 : 1 <= k <= 2W} besides t = 0
  ExactLimits limits;
};

// Requires n <= 10 and 1 <= weight_cap.
SearchReport search_exhaustive(std::size_t n, const NoiseParams& noise, std::int64_t weight_cap,
                               const ExhaustiveOptions& options = {});

struct LocalSearchOptions {
  SearchObjective objective = SearchObjective::exact;
  std::int64_t max_weight = 64;
  std::int64_t initial_max_weight = 8;
  int max_iterations = 200;
  std::uint64_t mc_samples = 20'000;
  int workers = 0;
  ExactLimits limits;
};

// Restart 0 starts at simple majority, the others at random weights.
SearchReport search_local(std::size_t n, const NoiseParams& noise, int restarts, std::uint64_t seed,
                          const LocalSearchOptions& options = {});

enum class RatioFamily { simple, best_found };

struct RatioRow {
  double epsilon = 0.0;
  double p = 0.0;
  double p_over_sqrt_eps = 0.0;
  double p_over_sheppard = 0.0;
  std::string source;                 // "exact" or "mc"
  std::vector<std::int64_t> weights;  // function used at this point
};

struct RatioOptions {
  std::uint64_t samples = 1'000'000;   // when the Monte Carlo fallback is used
  std::uint64_t seed = 1;
  std::int64_t max_exact_weight = 400;  // W above which simple majority uses Monte Carlo
  int restarts = 8;                     // best_found
  int workers = 0;
};

std::vector<RatioRow> ratio_curve(std::size_t n, const std::vector<double>& grid, RatioFamily family,
                                  const RatioOptions& options = {});

}  // namespace ltfnoise
