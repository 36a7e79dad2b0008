#include "ltfnoise/bounds.hpp"

#include <cmath>
#include <numbers>

namespace ltfnoise {

namespace {

// log C(m, k) - m log 2
double log_binomial_half(std::int64_t m, std::int64_t k) {
  return std::lgamma(static_cast<double>(m) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(m - k) + 1.0) - static_cast<double>(m) * std::numbers::ln2;
}

mpz_class binomial(std::int64_t n, std::int64_t k) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return out;
}

void require_bound_range(const NoiseParams& noise) {
  if (!(noise.epsilon() > 0.0 && noise.epsilon() <= 0.5))
    throw InvalidArgument("bound requires 0 < epsilon <= 1/2");
}

}  // namespace

BinomialMad mad_binomial(std::int64_t m) {
  if (m < 1) throw InvalidArgument("mad_binomial needs m >= 1");
  if (m > 1'000'000) throw InvalidArgument("mad_binomial direct sum limited to m <= 10^6");
  BinomialMad out;
  out.m = m;
  if (m <= kExactBinomialCap) {
    // sum_k C(m,k) |2k - m| / 2^(m+1)
    mpz_class numer = 0;
    mpz_class c = 1;  // C(m, k), updated incrementally
    for (std::int64_t k = 0; k <= m; ++k) {
      numer += c * std::abs(2 * k - m);
      c *= m - k;
      c /= k + 1;
    }
    mpz_class denom = 1;
    denom <<= static_cast<mp_bitcnt_t>(m + 1);
    mpq_class q(numer, denom);
    q.canonicalize();
    out.value = q.get_d();
    out.exact = std::move(q);
    return out;
  }
  const double half = static_cast<double>(m) / 2.0;
  double sum = 0.0;
  for (std::int64_t k = 0; k <= m; ++k) {
    const double dev = std::fabs(static_cast<double>(k) - half);
    if (dev == 0.0) continue;
    sum += std::exp(log_binomial_half(m, k)) * dev;
  }
  out.value = sum;
  return out;
}

Hypotheses hypotheses_for(double epsilon) {
  return Hypotheses{epsilon > 0.0 && epsilon <= 0.5, epsilon > 0.0 && epsilon <= 0.25};
}

BoundValue bound_sqrt(const NoiseParams& noise) {
  require_bound_range(noise);
  return BoundValue{2.0 * std::sqrt(noise.epsilon()), std::nullopt, hypotheses_for(noise.epsilon())};
}

SpernerBound sperner_bound(std::int64_t n) {
  if (n < 1) throw InvalidArgument("sperner_bound needs n >= 1");
  SpernerBound out;
  out.n = n;
  if (n <= kExactBinomialCap) {
    mpz_class denom = 1;
    denom <<= static_cast<mp_bitcnt_t>(n);
    mpq_class q(binomial(n, n / 2), denom);
    q.canonicalize();
    out.value = q.get_d();
    out.exact = std::move(q);
  } else {
    out.value = std::exp(log_binomial_half(n, n / 2));
  }
  out.auxiliary = std::sqrt(0.75) / std::sqrt(static_cast<double>(n));
  out.auxiliary_holds = out.value <= out.auxiliary;
  return out;
}

RefinedBound bound_refined(std::int64_t n, const NoiseParams& noise) {
  require_bound_range(noise);
  if (n < 1) throw InvalidArgument("bound_refined needs n >= 1");
  RefinedBound out;
  out.m = noise.m();
  out.mad = mad_binomial(out.m);
  const SpernerBound sp = sperner_bound(n);
  const double eps = noise.epsilon();
  out.mad_term = 2.0 / static_cast<double>(out.m) * out.mad.value;
  out.tie_term = -std::expm1(static_cast<double>(n) * std::log1p(-eps)) * sp.value;
  out.bound.value = out.mad_term + out.tie_term;
  out.bound.hypotheses = hypotheses_for(eps);

  if (const auto& q = noise.rational(); q && out.mad.exact && sp.exact) {
    mpz_class keep_num, keep_den;
    mpz_ui_pow_ui(keep_num.get_mpz_t(), static_cast<unsigned long>(q->den - q->num),
                  static_cast<unsigned long>(n));
    mpz_ui_pow_ui(keep_den.get_mpz_t(), static_cast<unsigned long>(q->den),
                  static_cast<unsigned long>(n));
    mpq_class not_kept = 1 - mpq_class(keep_num, keep_den);
    mpq_class exact = mpq_class(2, static_cast<unsigned long>(out.m)) * *out.mad.exact +
                      not_kept * *sp.exact;
    exact.canonicalize();
    out.bound.exact = std::move(exact);
  }
  return out;
}

SheppardValue sheppard(const NoiseParams& noise) {
  const double alpha = std::acos(1.0 - 2.0 * noise.epsilon());
  return SheppardValue{alpha / std::numbers::pi, alpha};
}

double clt_constant_check(std::int64_t m) {
  return 2.0 * mad_binomial(m).value / std::sqrt(static_cast<double>(m));
}

}  // namespace ltfnoise
