#include "ltfnoise/proofcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <omp.h>

#include "ltfnoise/bounds.hpp"
#include "ltfnoise/exact.hpp"
#include "ltfnoise/montecarlo.hpp"

namespace ltfnoise {

double PartitionTrace::total() const {
  double s = 0.0;
  for (double v : block_sums) s += v;
  return s;
}

std::int64_t PartitionTrace::nonempty_blocks() const {
  std::int64_t k = 0;
  for (std::size_t j = 1; j < blocks.size(); ++j) k += !blocks[j].empty();
  return k;
}

namespace {

// Block label from one uniform draw: block j in 1..m has probability
// floor(eps 2^64) / 2^64 each, block 0 takes the rest.
class BlockLabeler {
 public:
  BlockLabeler(const NoiseParams& noise) : m_(noise.m()) {
    if (noise.epsilon() >= 1.0) {
      always_one_ = true;
    } else {
      width_ = static_cast<std::uint64_t>(std::floor(std::ldexp(noise.epsilon(), 64)));
    }
  }
  int operator()(std::uint64_t u) const {
    if (always_one_) return 1;
    const std::uint64_t j = u / width_;
    return j < static_cast<std::uint64_t>(m_) ? static_cast<int>(j) + 1 : 0;
  }
  std::int64_t m() const { return m_; }

 private:
  std::int64_t m_;
  std::uint64_t width_ = 1;
  bool always_one_ = false;
};

void require_partition_inputs(const ThresholdFunction& f, const NoiseParams& noise) {
  if (!(noise.epsilon() > 0.0)) throw InvalidArgument("random partition needs epsilon > 0");
  if (f.threshold() != 0.0)
    throw InvalidArgument("random partition assumes threshold 0; apply reduce_threshold first");
}

PartitionTrace sample_with(const ThresholdFunction& f, const BlockLabeler& label, CounterRng& rng) {
  const std::size_t n = f.size();
  const auto w = f.weights();
  PartitionTrace tr;
  tr.m = label.m();
  const auto blocks = static_cast<std::size_t>(tr.m) + 1;

  PackedPoint xp{n, std::vector<std::uint64_t>(words_for(n))};
  for (auto& word : xp.words) word = rng.next();
  xp.words.back() &= tail_mask(n);
  tr.x = unpack(xp);

  tr.tau.resize(n);
  tr.blocks.assign(blocks, {});
  tr.block_sums.assign(blocks, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int j = label(rng.next());
    tr.tau[i] = j;
    tr.blocks[static_cast<std::size_t>(j)].push_back(i);
    tr.block_sums[static_cast<std::size_t>(j)] += tr.x[i] > 0 ? w[i] : -w[i];
  }
  tr.xi.resize(blocks);
  for (std::size_t j = 0; j < blocks; ++j) tr.xi[j] = sign_of(tr.block_sums[j]);
  for (std::size_t j = 1; j < blocks; ++j) {
    if (tr.xi[j] == Sign::zero) continue;
    tr.lambda.push_back(static_cast<std::int64_t>(j));
    tr.b_lambda += tr.xi[j] == Sign::positive;
  }
  tr.y1 = tr.total() - tr.block_sums[1];
  return tr;
}

// sum_{j in lambda} (1 - 2 * 1[sgn = -xi_j]); the summand of the tight
// identity is half of this integer.
std::int64_t twice_lambda_sum(const PartitionTrace& tr, Sign sign_wx) {
  std::int64_t k = 0;
  for (auto j : tr.lambda) k += sign_wx == negate(tr.xi[static_cast<std::size_t>(j)]) ? -1 : 1;
  return k;
}

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

// Integer-valued sample moments -> normal interval on mean * scale.
StatisticalCheck moments_check(std::int64_t sum, double sum_sq, std::uint64_t draws, double scale,
                               double level) {
  StatisticalCheck c;
  c.draws = draws;
  const double nd = static_cast<double>(draws);
  const double mean = static_cast<double>(sum) / nd;
  const double var = std::max(0.0, sum_sq / nd - mean * mean) * nd / std::max(1.0, nd - 1.0);
  const double half = normal_two_sided_z(level) * std::sqrt(var / nd);
  c.estimate = mean * scale;
  c.ci_low = (mean - half) * scale;
  c.ci_high = (mean + half) * scale;
  return c;
}

}  // namespace

PartitionTrace sample_partition(const ThresholdFunction& f, const NoiseParams& noise,
                                CounterRng& rng) {
  require_partition_inputs(f, noise);
  return sample_with(f, BlockLabeler(noise), rng);
}

KeypointCheck check_keypoint(double s1, double y1, double fault) {
  KeypointCheck c;
  c.lhs = sign_of(y1 + s1) != sign_of(y1 - s1) ? 1 : 0;
  if (s1 != 0.0) {
    const double a = std::fabs(s1);
    // Conditional law of S_1 given (Y_1, |S_1|): uniform on {-a, +a}.
    double hit = 0.0;
    for (double s : {-a, a}) hit += sign_of(s + y1) == negate(sign_of(s)) ? 0.5 : 0.0;
    c.rhs = 2.0 * (0.5 - hit);
  }
  c.rhs += fault;
  c.equal = static_cast<double>(c.lhs) == c.rhs;
  return c;
}

PointwiseCheck check_pointwise_inequality(const PartitionTrace& trace, Sign sign_wx) {
  PointwiseCheck c;
  c.lhs = 0.5 * static_cast<double>(twice_lambda_sum(trace, sign_wx));
  const auto size = static_cast<double>(trace.lambda.size());
  c.rhs = std::fabs(static_cast<double>(trace.b_lambda) - size / 2.0);
  if (sign_wx == Sign::zero) c.rhs += 0.5 * static_cast<double>(trace.nonempty_blocks());
  c.holds = c.lhs <= c.rhs;
  return c;
}

bool check_mad_monotone(std::int64_t l_max) {
  if (l_max < 2) throw InvalidArgument("check_mad_monotone needs l_max >= 2");
  BinomialMad prev = mad_binomial(1);
  for (std::int64_t l = 2; l <= l_max; ++l) {
    BinomialMad cur = mad_binomial(l);
    const bool ok = (prev.exact && cur.exact) ? *prev.exact <= *cur.exact : prev.value <= cur.value;
    if (!ok) return false;
    prev = std::move(cur);
  }
  return true;
}

StatisticalCheck check_setup_law(const ThresholdFunction& f, const NoiseParams& noise,
                                 std::uint64_t draws, std::uint64_t seed, double level,
                                 int workers) {
  require_partition_inputs(f, noise);
  if (draws < 1) throw InvalidArgument("draws must be >= 1");
  const BlockLabeler label(noise);
  const auto total = static_cast<std::int64_t>(draws);
  std::uint64_t count = 0;
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers)) reduction(+ : count)
  for (std::int64_t i = 0; i < total; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const PartitionTrace tr = sample_with(f, label, rng);
    const double s1 = tr.block_sums[1];
    count += sign_of(tr.y1 + s1) != sign_of(tr.y1 - s1);
  }
  StatisticalCheck c;
  c.draws = draws;
  c.estimate = static_cast<double>(count) / static_cast<double>(draws);
  const auto ci = wilson_interval(count, draws, level);
  c.ci_low = ci.low;
  c.ci_high = ci.high;
  c.target = p_exact_auto(f, noise).p;
  c.passed = c.ci_low <= c.target && c.target <= c.ci_high;
  return c;
}

StatisticalCheck check_tight(const ThresholdFunction& f, const NoiseParams& noise,
                             std::uint64_t draws, std::uint64_t seed, double level, int workers) {
  require_partition_inputs(f, noise);
  if (draws < 2) throw InvalidArgument("draws must be >= 2");
  const BlockLabeler label(noise);
  const auto total = static_cast<std::int64_t>(draws);
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers)) \
    reduction(+ : sum, sum_sq)
  for (std::int64_t i = 0; i < total; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const PartitionTrace tr = sample_with(f, label, rng);
    const std::int64_t k = twice_lambda_sum(tr, sign_of(tr.total()));
    sum += k;
    sum_sq += k * k;
  }
  // Summand (2/m) * (k/2) = k/m.
  StatisticalCheck c = moments_check(sum, static_cast<double>(sum_sq), draws,
                                     1.0 / static_cast<double>(label.m()), level);
  c.target = p_exact_auto(f, noise).p;
  c.passed = c.ci_low <= c.target && c.target <= c.ci_high;
  return c;
}

TightExactCheck check_tight_exact(const ThresholdFunction& f, const NoiseParams& noise) {
  require_partition_inputs(f, noise);
  const auto& q = noise.rational();
  if (!q) throw InvalidArgument("exact tight check needs epsilon as a fraction");
  const std::size_t n = f.size();
  const std::int64_t m = noise.m();
  const double work = std::pow(2.0, static_cast<double>(n)) * std::pow(static_cast<double>(m + 1), static_cast<double>(n));
  if (work > 16777216.0)
    throw CapExceeded("exact tight enumeration too large", "2^n (m+1)^n", 16777216, "check_tight");

  const mpq_class eps(q->num, q->den);
  const mpq_class rest = 1 - m * eps;   // P(tau = 0)
  const auto w = f.weights();
  mpq_class expectation = 0;

  std::vector<int> tau(n, 0);
  const std::size_t points = std::size_t{1} << n;
  for (;;) {
    mpq_class weight = 1;
    for (auto j : tau) weight *= j == 0 ? rest : eps;
    if (weight != 0) {
      for (std::size_t xi = 0; xi < points; ++xi) {
        PartitionTrace tr;
        tr.m = m;
        tr.block_sums.assign(static_cast<std::size_t>(m) + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          tr.block_sums[static_cast<std::size_t>(tau[i])] += (xi >> i) & 1U ? w[i] : -w[i];
        tr.xi.resize(tr.block_sums.size());
        for (std::size_t j = 0; j < tr.block_sums.size(); ++j) tr.xi[j] = sign_of(tr.block_sums[j]);
        for (std::int64_t j = 1; j <= m; ++j)
          if (tr.xi[static_cast<std::size_t>(j)] != Sign::zero) tr.lambda.push_back(j);
        const std::int64_t k = twice_lambda_sum(tr, sign_of(tr.total()));
        if (k != 0) expectation += weight * mpq_class(k, m);
      }
    }
    // Next tau vector in base (m+1).
    std::size_t pos = 0;
    while (pos < n && tau[pos] == m) tau[pos++] = 0;
    if (pos == n) break;
    ++tau[pos];
  }
  expectation /= mpz_class(1) << static_cast<mp_bitcnt_t>(n);
  expectation.canonicalize();

  TightExactCheck c;
  c.expectation = expectation;
  c.p = *p_exact_enum(f, noise).rational;
  c.equal = c.expectation == c.p;
  return c;
}

StatisticalCheck check_lambda_averaging(const ThresholdFunction& f, const NoiseParams& noise,
                                        std::uint64_t draws, std::uint64_t seed, double level) {
  require_partition_inputs(f, noise);
  if (draws < 2) throw InvalidArgument("draws must be >= 2");
  const BlockLabeler label(noise);
  std::int64_t sum = 0;
  double sum_sq = 0.0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    CounterRng rng(seed, i);
    const PartitionTrace tr = sample_with(f, label, rng);
    const std::int64_t k = std::llabs(2 * tr.b_lambda - static_cast<std::int64_t>(tr.lambda.size()));
    sum += k;
    sum_sq += static_cast<double>(k * k);
  }
  StatisticalCheck c = moments_check(sum, sum_sq, draws, 0.5, level);
  c.target = mad_binomial(label.m()).value;
  c.passed = c.ci_low <= c.target;
  return c;
}

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::vector<std::pair<ThresholdFunction, NoiseParams>> default_verification_corpus() {
  return {
      {ThresholdFunction::simple_majority(3), NoiseParams(1, 10)},
      {ThresholdFunction({1.0}, 0.0), NoiseParams(3, 10)},
      {ThresholdFunction::simple_majority(4), NoiseParams(1, 4)},
      {ThresholdFunction({1.0, 2.0, 3.0, 4.0}, 0.0), NoiseParams(1, 3)},
      {ThresholdFunction({3.0, 1.0, 1.0, 1.0, 2.0}, 0.0), NoiseParams(1, 5)},
  };
}

namespace {

std::string describe(const ThresholdFunction& f, const NoiseParams& noise) {
  std::ostringstream os;
  os << "w=(";
  for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << f.weights()[i];
  os << ") t=" << f.threshold() << " eps=";
  if (noise.rational())
    os << noise.rational()->num << "/" << noise.rational()->den;
  else
    os << noise.epsilon();
  return os.str();
}

VerificationCheck from_statistical(std::string name, std::string instance, const StatisticalCheck& s) {
  VerificationCheck c;
  c.name = std::move(name);
  c.instance = std::move(instance);
  c.cases = s.draws;
  c.passed = s.passed;
  c.values = {{"estimate", s.estimate}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high},
              {"target", s.target}};
  return c;
}

}  // namespace

VerificationReport run_verification(const VerifyConfig& cfg) {
  VerificationReport report;
  const double fault = cfg.inject_fault ? 0.5 : 0.0;

  {
    VerificationCheck c{"keypoint_grid", "s1, y1 in {-3, -2.5, ..., 3}", 0, true, {}, ""};
    for (int a = -6; a <= 6; ++a)
      for (int b = -6; b <= 6; ++b) {
        const auto k = check_keypoint(0.5 * a, 0.5 * b, fault);
        ++c.cases;
        if (!k.equal) {
          if (c.passed) c.detail = "first failure at s1=" + std::to_string(0.5 * a) + " y1=" + std::to_string(0.5 * b);
          c.passed = false;
        }
      }
    report.checks.push_back(std::move(c));
  }
  {
    VerificationCheck c{"keypoint_random", "real pairs in [-4,4]^2 with s1=0 and |s1|=|y1| cases",
                        0, true, {}, ""};
    CounterRng rng(cfg.seed, 0x6b6579ULL);
    for (std::uint64_t i = 0; i < cfg.keypoint_random_pairs; ++i) {
      double s1 = 8.0 * rng.uniform01() - 4.0;
      double y1 = 8.0 * rng.uniform01() - 4.0;
      switch (i % 4) {
        case 1: s1 = 0.0; break;
        case 2: y1 = s1; break;
        case 3: y1 = -s1; break;
        default: break;
      }
      ++c.cases;
      if (!check_keypoint(s1, y1, fault).equal) c.passed = false;
    }
    report.checks.push_back(std::move(c));
  }
  if (cfg.keypoint_only) return report;

  {
    VerificationCheck c{"mad_monotone", "l = 1.." + std::to_string(cfg.mad_l_max),
                        static_cast<std::uint64_t>(cfg.mad_l_max), check_mad_monotone(cfg.mad_l_max),
                        {}, ""};
    report.checks.push_back(std::move(c));
  }

  const auto corpus = cfg.instances.empty() ? default_verification_corpus() : cfg.instances;
  std::uint64_t stream = 1;
  for (const auto& [f, noise] : corpus) {
    const std::string inst = describe(f, noise);
    report.checks.push_back(from_statistical(
        "setup_law", inst,
        check_setup_law(f, noise, cfg.setup_draws, mix64(cfg.seed + stream++), cfg.level, cfg.workers)));
    report.checks.push_back(from_statistical(
        "tight_statistical", inst,
        check_tight(f, noise, cfg.tight_draws, mix64(cfg.seed + stream++), cfg.level, cfg.workers)));
    report.checks.push_back(from_statistical(
        "lambda_averaging", inst,
        check_lambda_averaging(f, noise, cfg.setup_draws, mix64(cfg.seed + stream++), cfg.level)));

    VerificationCheck chain{"bound_chain", inst, 1, true, {}, ""};
    const double p = p_exact_auto(f, noise).p;
    chain.values["p"] = p;
    if (noise.epsilon() <= 0.5) {
      const auto refined = bound_refined(static_cast<std::int64_t>(f.size()), noise);
      const double root = bound_sqrt(noise).value;
      chain.values["bound_refined"] = refined.bound.value;
      chain.values["bound_sqrt"] = root;
      chain.passed = p <= refined.bound.value && p <= root;
    } else {
      chain.detail = "epsilon > 1/2: bounds not applicable";
    }
    report.checks.push_back(std::move(chain));

    if (const auto& q = noise.rational(); q && f.size() <= 4 && noise.m() <= 4) {
      const auto ex = check_tight_exact(f, noise);
      VerificationCheck c{"tight_exact", inst, 1, ex.equal, {{"expectation", ex.expectation.get_d()}, {"p", ex.p.get_d()}},
                          ex.expectation.get_str() + " vs " + ex.p.get_str()};
      report.checks.push_back(std::move(c));
    }
  }

  {
    VerificationCheck c{"pointwise_inequality", "random integer weights in [-5,5]\\{0}, n <= 8", 0,
                        true, {}, ""};
    CounterRng pick(cfg.seed, 0x706f696eULL);
    const NoiseParams grid[] = {NoiseParams(1, 2), NoiseParams(1, 3), NoiseParams(1, 4),
                                NoiseParams(1, 5), NoiseParams(1, 10), NoiseParams(0.07)};
    for (std::uint64_t i = 0; i < cfg.pointwise_traces; ++i) {
      const std::size_t n = 1 + pick.next() % 8;
      std::vector<double> w(n);
      for (auto& v : w) {
        const auto r = static_cast<int>(pick.next() % 10);
        v = r < 5 ? r - 5 : r - 4;  // -5..-1, 1..5
      }
      const ThresholdFunction f(w, 0.0);
      const NoiseParams& noise = grid[pick.next() % std::size(grid)];
      CounterRng rng(cfg.seed ^ 0x5a5a5a5aULL, i);
      const PartitionTrace tr = sample_partition(f, noise, rng);
      const auto chk = check_pointwise_inequality(tr, sign_of(tr.total()));
      ++c.cases;
      if (!chk.holds) {
        if (c.passed) c.detail = "violated on trace " + std::to_string(i);
        c.passed = false;
      }
    }
    report.checks.push_back(std::move(c));
  }
  return report;
}

}  // namespace ltfnoise
