#pragma once

// Text formats: argument parsing for weights, epsilon and grids; JSON
// payloads for run records; CSV rows for sweeps and ratio curves.
//
// Floats are written as shortest round-trip decimals and rationals as
// {"num": "...", "den": "..."} strings, so every number reads back exactly.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltfnoise/bounds.hpp"
#include "ltfnoise/exact.hpp"
#include "ltfnoise/montecarlo.hpp"
#include "ltfnoise/proofcheck.hpp"
#include "ltfnoise/search.hpp"

namespace ltfnoise {

using Json = nlohmann::ordered_json;

std::string format_double(double v);

// "1,2,3" or "@path" (one number per line; blank lines and '#' comments skipped).
std::vector<double> parse_weights(const std::string& text);

// "0.1" (float mode) or "p/q" (rational mode). With force_rational a decimal
// is converted to its exact fraction, e.g. "0.1" -> 1/10.
NoiseParams parse_epsilon(const std::string& text, bool force_rational = false);

// "a,b,c" or "start:stop:scale[:count]" with scale in {log10, linear}.
// log10 without a count yields one point per decade from start to stop.
std::vector<double> parse_grid(const std::string& text);

Json rational_json(const mpq_class& q);
mpq_class rational_from_json(const Json& j);

Json to_json(const ExactResult& r);
Json to_json(const McEstimate& e);
Json to_json(const SearchReport& r);
Json to_json(const VerificationReport& r);
Json to_json(const BinomialMad& m);

inline const char* kSweepHeader =
    "n,weights_id,t,epsilon,p,ci_low,ci_high,bound_sqrt,sheppard,p_over_sqrt_eps";
inline const char* kRatioHeader = "epsilon,p,p_over_sqrt_eps,p_over_sheppard,source";

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_ratio_csv(std::ostream& os, const std::vector<RatioRow>& rows);

}  // namespace ltfnoise
