#include "ltfnoise/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ltfnoise {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("not a number: '" + raw + "'");
  return v;
}

std::int64_t parse_int(const std::string& raw) {
  const std::string s = trim(raw);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("not an integer: '" + raw + "'");
  return v;
}

// Exact fraction of a plain decimal literal such as "0.125" or "1e-3".
Fraction decimal_to_fraction(const std::string& raw) {
  std::string s = trim(raw);
  std::int64_t exponent = 0;
  if (const auto e = s.find_first_of("eE"); e != std::string::npos) {
    exponent = parse_int(s.substr(e + 1));
    s = s.substr(0, e);
  }
  std::string digits;
  bool seen_point = false;
  for (char c : s) {
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_point) --exponent;
    } else {
      throw InvalidArgument("not a decimal: '" + raw + "'");
    }
  }
  if (digits.empty()) throw InvalidArgument("not a decimal: '" + raw + "'");
  mpz_class num(digits, 10);
  mpz_class den = 1;
  mpz_class ten = 10;
  if (exponent >= 0) {
    mpz_class scale;
    mpz_pow_ui(scale.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(exponent));
    num *= scale;
  } else {
    mpz_pow_ui(den.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(-exponent));
  }
  mpq_class q(num, den);
  q.canonicalize();
  if (!q.get_num().fits_slong_p() || !q.get_den().fits_slong_p())
    throw InvalidArgument("decimal too long for an exact fraction: '" + raw + "'");
  return Fraction{q.get_num().get_si(), q.get_den().get_si()};
}

}  // namespace

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> out;
  if (!text.empty() && text[0] == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw InvalidArgument("cannot open weights file '" + text.substr(1) + "'");
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      if (trim(line).empty()) continue;
      out.push_back(parse_number(line));
    }
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
  }
  if (out.empty()) throw InvalidArgument("no weights given");
  return out;
}

NoiseParams parse_epsilon(const std::string& text, bool force_rational) {
  if (const auto slash = text.find('/'); slash != std::string::npos)
    return NoiseParams(Fraction::reduced(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1))));
  if (force_rational) return NoiseParams(decimal_to_fraction(text));
  return NoiseParams(parse_number(text));
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') == std::string::npos) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!trim(item).empty()) grid.push_back(parse_number(item));
    if (grid.empty()) throw InvalidArgument("empty epsilon grid");
    return grid;
  }
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(trim(item));
  if (parts.size() < 3 || parts.size() > 4)
    throw InvalidArgument("grid must look like start:stop:scale[:count]");
  const double start = parse_number(parts[0]);
  const double stop = parse_number(parts[1]);
  const std::string& scale = parts[2];
  if (!(start > 0.0) || start > stop) throw InvalidArgument("empty epsilon grid: need 0 < start <= stop");
  const std::int64_t count = parts.size() == 4 ? parse_int(parts[3]) : 0;
  if (parts.size() == 4 && count < 1) throw InvalidArgument("grid count must be >= 1");

  if (scale == "log10" || scale == "log") {
    const double l0 = std::log10(start), l1 = std::log10(stop);
    if (count == 0) {
      const bool integral = std::floor(l0) == l0;
      for (int k = 0; l0 + k <= l1 + 1e-9; ++k)
        grid.push_back(integral ? std::pow(10.0, l0 + k) : start * std::pow(10.0, k));
    } else if (count == 1) {
      grid.push_back(start);
    } else {
      for (std::int64_t k = 0; k < count; ++k)
        grid.push_back(std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(count - 1)));
      grid.front() = start;
      grid.back() = stop;
    }
  } else if (scale == "linear" || scale == "lin") {
    const std::int64_t c = count == 0 ? 10 : count;
    if (c == 1) {
      grid.push_back(start);
    } else {
      for (std::int64_t k = 0; k < c; ++k)
        grid.push_back(start + (stop - start) * static_cast<double>(k) / static_cast<double>(c - 1));
    }
  } else {
    throw InvalidArgument("unknown grid scale '" + scale + "' (use log10 or linear)");
  }
  if (grid.empty()) throw InvalidArgument("empty epsilon grid");
  return grid;
}

Json rational_json(const mpq_class& q) {
  return Json{{"num", q.get_num().get_str()}, {"den", q.get_den().get_str()}};
}

mpq_class rational_from_json(const Json& j) {
  mpq_class q(mpz_class(j.at("num").get<std::string>(), 10), mpz_class(j.at("den").get<std::string>(), 10));
  q.canonicalize();
  return q;
}

Json to_json(const ExactResult& r) {
  Json j;
  j["p"] = r.p;
  j["p_rational"] = r.rational ? rational_json(*r.rational) : Json(nullptr);
  j["representation"] = r.rational ? "rational" : "float";
  j["method"] = to_string(r.method);
  j["n"] = r.n;
  j["weights"] = r.weights;
  j["t"] = r.threshold;
  j["epsilon"] = r.epsilon;
  j["epsilon_rational"] = r.epsilon_rational
                              ? Json{{"num", std::to_string(r.epsilon_rational->num)},
                                     {"den", std::to_string(r.epsilon_rational->den)}}
                              : Json(nullptr);
  j["note"] = r.note;
  return j;
}

Json to_json(const McEstimate& e) {
  Json j;
  j["p_hat"] = e.p_hat;
  j["ci_low"] = e.ci_low;
  j["ci_high"] = e.ci_high;
  j["level"] = e.level;
  j["std_error"] = e.std_error;
  j["disagreements"] = e.disagreements;
  j["samples"] = e.samples;
  j["seed"] = e.seed;
  j["workers"] = e.workers;
  j["method"] = to_string(e.method);
  j["decision_scheme"] = to_string(e.scheme);
  j["epsilon"] = e.epsilon;
  j["realized_epsilon"] = e.realized_epsilon;
  return j;
}

namespace {

Json candidate_json(const Candidate& c) {
  return Json{{"weights", c.weights}, {"t", c.threshold}, {"p", c.p}, {"ci_low", c.ci_low},
              {"ci_high", c.ci_high}};
}

}  // namespace

Json to_json(const SearchReport& r) {
  Json j;
  j["method"] = r.method;
  j["objective"] = r.objective;
  j["n"] = r.n;
  j["epsilon"] = r.epsilon;
  j["best_f"] = Json{{"weights", r.best.weights}, {"t", r.best.threshold}};
  j["best_p"] = r.best.p;
  j["best_ci"] = Json::array({r.best.ci_low, r.best.ci_high});
  j["evaluations"] = r.evaluations;
  j["baseline_simple_majority_p"] = r.baseline_simple_majority_p;
  j["baseline_exact"] = r.baseline_exact;
  j["exceeds_baseline"] = r.exceeds_baseline;
  j["bound_applies"] = r.bound_applies;
  j["bound_2sqrt"] = r.bound_2sqrt;
  j["sheppard"] = r.sheppard;
  j["ratio_to_sheppard"] = r.ratio_to_sheppard;
  Json near = Json::array();
  for (const auto& c : r.near_optimal) near.push_back(candidate_json(c));
  j["near_optimal"] = near;
  if (!r.candidates.empty()) {
    Json all = Json::array();
    for (const auto& c : r.candidates) all.push_back(candidate_json(c));
    j["candidates"] = all;
  }
  j["open_question"] = r.open_question;
  if (!r.trajectories.empty()) j["trajectories"] = r.trajectories;
  return j;
}

Json to_json(const VerificationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json v = Json::object();
    for (const auto& [k, x] : c.values) v[k] = x;
    checks.push_back(Json{{"name", c.name}, {"instance", c.instance}, {"cases", c.cases},
                          {"passed", c.passed}, {"values", v}, {"detail", c.detail}});
  }
  return Json{{"all_passed", r.all_passed()}, {"checks", checks}};
}

Json to_json(const BinomialMad& m) {
  return Json{{"m", m.m}, {"value", m.value},
              {"exact", m.exact ? rational_json(*m.exact) : Json(nullptr)}};
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    const NoiseParams noise(r.epsilon);
    const bool bounded = r.epsilon > 0.0 && r.epsilon <= 0.5;
    os << r.family.n << ',' << r.family.weights_id() << ',' << format_double(r.family.threshold) << ','
       << format_double(r.epsilon) << ',' << format_double(r.estimate.p_hat) << ','
       << format_double(r.estimate.ci_low) << ',' << format_double(r.estimate.ci_high) << ','
       << (bounded ? format_double(bound_sqrt(noise).value) : std::string()) << ','
       << format_double(sheppard(noise).p) << ','
       << (r.epsilon > 0.0 ? format_double(r.estimate.p_hat / std::sqrt(r.epsilon)) : std::string())
       << '\n';
  }
}

void write_ratio_csv(std::ostream& os, const std::vector<RatioRow>& rows) {
  os << kRatioHeader << '\n';
  for (const auto& r : rows)
    os << format_double(r.epsilon) << ',' << format_double(r.p) << ','
       << format_double(r.p_over_sqrt_eps) << ',' << format_double(r.p_over_sheppard) << ','
       << r.source << '\n';
}

}  // namespace ltfnoise
