#include "ltfnoise/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <omp.h>

#include "ltfnoise/bounds.hpp"
#include "ltfnoise/montecarlo.hpp"
#include "ltfnoise/rng.hpp"

namespace ltfnoise {

namespace {

constexpr double kTieTolerance = 1e-12;

ThresholdFunction to_function(const std::vector<std::int64_t>& w, double t) {
  return ThresholdFunction(std::vector<double>(w.begin(), w.end()), t);
}

// Smaller is preferred: lexicographic weights, then threshold.
bool canonical_less(const Candidate& a, const Candidate& b) {
  if (a.weights != b.weights) return a.weights < b.weights;
  return a.threshold < b.threshold;
}

void fill_common(SearchReport& r, std::size_t n, const NoiseParams& noise) {
  r.n = n;
  r.epsilon = noise.epsilon();
  r.bound_applies = noise.epsilon() > 0.0 && noise.epsilon() <= 0.5;
  r.bound_2sqrt = 2.0 * std::sqrt(noise.epsilon());
  r.sheppard = sheppard(noise).p;
}

void guard_bound(const SearchReport& r, const Candidate& c, double value) {
  if (r.bound_applies && value > r.bound_2sqrt)
    throw CounterexampleFound("candidate exceeds 2*sqrt(eps): p=" + std::to_string(value) +
                                  " bound=" + std::to_string(r.bound_2sqrt),
                              c.weights, c.threshold, value);
}

void finish_ratios(SearchReport& r) {
  r.ratio_to_sheppard = r.sheppard > 0.0 ? r.best.p / r.sheppard : 0.0;
  r.exceeds_baseline = r.best.p > r.baseline_simple_majority_p + kTieTolerance;
}

// Recursively visits nondecreasing sequences in [lo, cap]^k.
template <typename Fn>
void for_each_sorted(std::vector<std::int64_t>& cur, std::size_t n, std::int64_t lo,
                     std::int64_t cap, Fn&& fn) {
  if (cur.size() == n) {
    fn(cur);
    return;
  }
  for (std::int64_t v = lo; v <= cap; ++v) {
    cur.push_back(v);
    for_each_sorted(cur, n, v, cap, fn);
    cur.pop_back();
  }
}

std::int64_t gcd_of(const std::vector<std::int64_t>& w) {
  std::int64_t g = 0;
  for (auto v : w) g = std::gcd(g, v);
  return g;
}

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

struct RestartResult {
  Candidate best;
  std::vector<double> trajectory;
  std::uint64_t evaluations = 0;
};

std::uint64_t weights_hash(const std::vector<std::int64_t>& w) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto v : w) h = mix64(h ^ static_cast<std::uint64_t>(v));
  return h;
}

}  // namespace

SearchReport search_exhaustive(std::size_t n, const NoiseParams& noise, std::int64_t weight_cap,
                               const ExhaustiveOptions& options) {
  if (n < 1 || n > 10) throw InvalidArgument("exhaustive search supports 1 <= n <= 10");
  if (weight_cap < 1) throw InvalidArgument("weight cap must be >= 1");
  if (static_cast<std::int64_t>(n) * weight_cap > options.limits.max_dp_total_weight)
    throw CapExceeded("n * cap exceeds the dp cap", "max_dp_total_weight",
                      options.limits.max_dp_total_weight, "lower --cap");
  const NoiseParams eval_noise(noise.epsilon());

  SearchReport r;
  r.method = "exhaustive";
  fill_common(r, n, noise);

  std::vector<Candidate> all;
  std::vector<std::int64_t> cur;
  for_each_sorted(cur, n, 1, weight_cap, [&](const std::vector<std::int64_t>& w) {
    std::int64_t total = 0;
    for (auto v : w) total += v;
    std::vector<double> thresholds{0.0};
    if (options.include_thresholds) {
      for (std::int64_t k = 1; k <= 2 * total; ++k) thresholds.push_back(0.5 * static_cast<double>(k));
    } else if (gcd_of(w) > 1) {
      return;  // same function as w / gcd when t = 0
    }
    for (double t : thresholds) {
      Candidate c;
      c.weights = w;
      c.threshold = t;
      c.p = p_exact_dp(to_function(w, t), eval_noise, options.limits).p;
      c.ci_low = c.ci_high = c.p;
      guard_bound(r, c, c.p);
      all.push_back(std::move(c));
    }
  });
  r.evaluations = all.size();

  double max_p = 0.0;
  for (const auto& c : all) max_p = std::max(max_p, c.p);
  for (const auto& c : all)
    if (c.p >= max_p - kTieTolerance) r.near_optimal.push_back(c);
  std::sort(r.near_optimal.begin(), r.near_optimal.end(), canonical_less);
  r.best = r.near_optimal.front();
  r.candidates = std::move(all);

  r.baseline_simple_majority_p =
      p_exact_dp(ThresholdFunction::simple_majority(n), eval_noise, options.limits).p;
  finish_ratios(r);
  return r;
}

SearchReport search_local(std::size_t n, const NoiseParams& noise, int restarts, std::uint64_t seed,
                          const LocalSearchOptions& options) {
  if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
  if (n < 1) throw InvalidArgument("n must be >= 1");
  const bool exact = options.objective == SearchObjective::exact;
  const std::int64_t max_w = options.max_weight;
  if (max_w < 1 || options.initial_max_weight < 1) throw InvalidArgument("weights caps must be >= 1");
  if (exact && static_cast<std::int64_t>(n) * max_w > options.limits.max_dp_total_weight)
    throw CapExceeded("n * max_weight exceeds the dp cap of the exact objective",
                      "max_dp_total_weight", options.limits.max_dp_total_weight,
                      "use the montecarlo objective or a smaller max weight");
  const NoiseParams eval_noise(noise.epsilon());

  SearchReport r;
  r.method = "random-restart local search";
  r.objective = exact ? "exact" : "montecarlo";
  fill_common(r, n, noise);

  auto evaluate_candidate = [&](const std::vector<std::int64_t>& w) {
    Candidate c;
    c.weights = w;
    if (exact) {
      ExactLimits lim = options.limits;
      lim.workers = 1;
      c.p = p_exact_dp(to_function(w, 0.0), eval_noise, lim).p;
      c.ci_low = c.ci_high = c.p;
    } else {
      McOptions mo;
      mo.workers = 1;
      const auto e = estimate(to_function(w, 0.0), eval_noise, options.mc_samples,
                              mix64(seed ^ weights_hash(w)), mo);
      c.p = e.p_hat;
      c.ci_low = e.ci_low;
      c.ci_high = e.ci_high;
    }
    return c;
  };

  std::vector<RestartResult> results(static_cast<std::size_t>(restarts));
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_workers(options.workers))
  for (int k = 0; k < restarts; ++k) {
    CounterRng rng(seed, static_cast<std::uint64_t>(k));
    std::vector<std::int64_t> w(n, 1);
    if (k > 0)
      for (auto& v : w)
        v = std::min(max_w, 1 + static_cast<std::int64_t>(
                                    rng.next() % static_cast<std::uint64_t>(options.initial_max_weight)));
    std::sort(w.begin(), w.end());

    RestartResult& out = results[static_cast<std::size_t>(k)];
    std::map<std::vector<std::int64_t>, Candidate> memo;
    auto eval = [&](const std::vector<std::int64_t>& cand) -> const Candidate& {
      auto it = memo.find(cand);
      if (it == memo.end()) {
        ++out.evaluations;
        it = memo.emplace(cand, evaluate_candidate(cand)).first;
      }
      return it->second;
    };

    Candidate incumbent = eval(w);
    out.trajectory.push_back(incumbent.p);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
      std::optional<Candidate> pick;
      for (std::size_t i = 0; i < n; ++i) {
        for (int delta : {-1, 1}) {
          std::vector<std::int64_t> cand = incumbent.weights;
          cand[i] = std::clamp<std::int64_t>(cand[i] + delta, 1, max_w);
          std::sort(cand.begin(), cand.end());
          if (cand == incumbent.weights) continue;
          const Candidate& c = eval(cand);
          const bool better = exact ? c.p > incumbent.p + kTieTolerance : c.ci_low > incumbent.ci_high;
          if (!better) continue;
          if (!pick || c.p > pick->p || (c.p == pick->p && canonical_less(c, *pick))) pick = c;
        }
      }
      if (!pick) break;
      incumbent = *pick;
      out.trajectory.push_back(incumbent.p);
    }
    out.best = incumbent;
  }

  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& res = results[k];
    r.evaluations += res.evaluations;
    r.trajectories.push_back(res.trajectory);
    guard_bound(r, res.best, exact ? res.best.p : res.best.ci_low);
    if (k == 0 || res.best.p > r.best.p + kTieTolerance ||
        (std::fabs(res.best.p - r.best.p) <= kTieTolerance && canonical_less(res.best, r.best)))
      r.best = res.best;
  }

  const auto simple = ThresholdFunction::simple_majority(n);
  if (static_cast<std::int64_t>(n) <= options.limits.max_dp_total_weight) {
    r.baseline_simple_majority_p = p_exact_dp(simple, eval_noise, options.limits).p;
  } else {
    r.baseline_exact = false;
    r.baseline_simple_majority_p =
        estimate_bitparallel(n, 0.0, eval_noise, options.mc_samples, seed).p_hat;
  }
  finish_ratios(r);
  return r;
}

std::vector<RatioRow> ratio_curve(std::size_t n, const std::vector<double>& grid, RatioFamily family,
                                  const RatioOptions& options) {
  if (grid.empty()) throw InvalidArgument("ratio curve grid is empty");
  if (n < 1) throw InvalidArgument("n must be >= 1");
  std::vector<RatioRow> rows;
  for (double eps : grid) {
    if (!(eps > 0.0 && eps <= 0.5)) throw InvalidArgument("ratio curve grid must lie in (0, 1/2]");
    const NoiseParams noise(eps);
    RatioRow row;
    row.epsilon = eps;
    if (family == RatioFamily::simple) {
      row.weights.assign(n, 1);
      if (static_cast<std::int64_t>(n) <= options.max_exact_weight) {
        row.p = p_exact_dp(ThresholdFunction::simple_majority(n), noise).p;
        row.source = "exact";
      } else {
        McOptions mo;
        mo.workers = options.workers;
        row.p = estimate_bitparallel(n, 0.0, noise, options.samples,
                                     sweep_point_seed(options.seed, eps), mo)
                    .p_hat;
        row.source = "mc";
      }
    } else {
      LocalSearchOptions lo;
      lo.workers = options.workers;
      lo.max_weight = std::max<std::int64_t>(1, std::min<std::int64_t>(64, 2000 / static_cast<std::int64_t>(n)));
      const auto rep = search_local(n, noise, options.restarts, sweep_point_seed(options.seed, eps), lo);
      row.p = rep.best.p;
      row.weights = rep.best.weights;
      row.source = "exact";
    }
    row.p_over_sqrt_eps = row.p / std::sqrt(eps);
    row.p_over_sheppard = row.p / sheppard(noise).p;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ltfnoise
